use std::path::Path;
use std::process::{Command, Output};

use sparse_ide::cli::{run_cli, EXIT_DIFFER, EXIT_PARSE, EXIT_USAGE};

fn bin(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparse-ide"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

/// In-process run: exit code, stdout, stderr.
fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["sparse-ide"];
    argv.extend_from_slice(args);
    let code = run_cli(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn analyze_increment_query() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "increment.ir", "proc main() {\n  a = 3\n  a = a + 1\n}\n");
    for mode in ["dense", "sparse", "both"] {
        let o = bin(&["analyze", "increment.ir", "--mode", mode, "--query", "main:exit:a"], dir.path());
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o), "main exit a 4\n");
    }
}

#[test]
fn analyze_empty_main_prints_nothing() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "empty.ir", "proc main() {\n}\n");
    let o = bin(&["analyze", "empty.ir"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "");
}

#[test]
fn parse_errors_report_file_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.ir", "proc main() {\n  a = = 3\n}\n");
    let o = bin(&["analyze", "bad.ir"], dir.path());
    assert_eq!(o.status.code(), Some(EXIT_PARSE));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("bad.ir:2:"), "{err}");

    // Lines are relative to the file that holds the error.
    write(dir.path(), "ok.ir", "proc f() {\n  return\n}\n");
    let (code, _, err) = cli(&[
        "analyze",
        dir.path().join("ok.ir").to_str().unwrap(),
        dir.path().join("bad.ir").to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_PARSE);
    assert!(err.contains("bad.ir:2:"), "{err}");
}

#[test]
fn unknown_entries_and_queries_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "p.ir", "proc main() {\n  a = 1\n}\n");
    let p = dir.path().join("p.ir");
    let p = p.to_str().unwrap();
    assert_eq!(cli(&["analyze", p, "--entry", "nope"]).0, EXIT_USAGE);
    for q in ["nope:exit:a", "main:42:a", "main:exit:", "main"] {
        assert_eq!(cli(&["analyze", p, "--query", q]).0, EXIT_USAGE, "{q}");
    }
    assert_eq!(cli(&["analyze", "/no/such/file.ir"]).0, EXIT_USAGE);
    assert_eq!(cli(&["frobnicate"]).0, EXIT_USAGE);
}

#[test]
fn multiple_files_and_entries() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "lib.ir", "proc id(x) {\n  return x\n}\nproc other() {\n  b = 2\n}\n");
    write(dir.path(), "main.ir", "proc main() {\n  a = 5\n  r = call id(a)\n}\n");
    let (code, out, _) = cli(&[
        "analyze",
        dir.path().join("lib.ir").to_str().unwrap(),
        dir.path().join("main.ir").to_str().unwrap(),
        "--entry",
        "main",
        "--entry",
        "other",
        "--query",
        "main:exit:r",
        "--query",
        "other:exit:b",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out, "main exit r 5\nother exit b 2\n");
}

#[test]
fn all_exits_lists_non_top_symbols() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "p.ir", "proc main() {\n  a = 1\n  b = a + 2\n  o = new\n  o.f = b\n}\n");
    let (code, out, _) = cli(&["analyze", dir.path().join("p.ir").to_str().unwrap(), "--all-exits"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    for want in ["main exit a 1", "main exit b 3", "main exit o.f 3"] {
        assert!(lines.contains(&want), "{out}");
    }
    assert!(lines.iter().all(|l| !l.ends_with(" T")));
}

#[test]
fn analyze_records_have_fixed_keys() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "p.ir", "proc main() {\n  a = 1\n  b = a\n}\n");
    let (code, out, _) = cli(&[
        "analyze",
        dir.path().join("p.ir").to_str().unwrap(),
        "--mode",
        "both",
        "--format",
        "records",
    ]);
    assert_eq!(code, 0);
    let recs: Vec<serde_json::Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(recs.len(), 2);
    for r in &recs {
        let mut keys: Vec<&str> = r.as_object().unwrap().keys().map(String::as_str).collect();
        keys.sort();
        assert_eq!(
            keys,
            ["case", "mode", "propagations", "sparse_cfg_count", "sparse_cfg_ms", "verdict", "wall_ms"]
        );
        assert_eq!(r["verdict"], "equal");
    }
    assert_eq!(recs[0]["mode"], "dense");
    assert_eq!(recs[1]["mode"], "sparse");
}

#[test]
fn bench_corpus_all_equal() {
    for client in ["lcp", "taint"] {
        let (code, out, err) = cli(&["bench", "--corpus", "--mode", "both", "--client", client, "--repeats", "1"]);
        assert_eq!(code, 0, "{err}");
        let recs: Vec<serde_json::Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(recs.len(), 2 * 42);
        assert!(recs.iter().all(|r| r["verdict"] == "equal"));
    }
}

#[test]
fn bench_generated_ratio_and_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, err) = cli(&[
        "bench",
        "--gen",
        "rho=0.95,n=10000",
        "--mode",
        "both",
        "--repeats",
        "1",
        "--plot-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let recs: Vec<serde_json::Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let dense = recs[0]["propagations"].as_f64().unwrap();
    let sparse = recs[1]["propagations"].as_f64().unwrap();
    assert!(dense / sparse >= 5.0, "{dense} / {sparse}");
    for f in ["speedup.dat", "ratio.dat"] {
        let text = std::fs::read_to_string(dir.path().join(f)).unwrap();
        let row = text.lines().find(|l| !l.starts_with('#')).unwrap();
        assert!(row.split_whitespace().take(2).all(|x| x.parse::<f64>().is_ok()), "{row}");
    }
    assert_eq!(cli(&["bench", "--gen", "rho=7"]).0, EXIT_USAGE);
    assert_eq!(cli(&["bench", "--gen", "bogus=1"]).0, EXIT_USAGE);
    assert_eq!(cli(&["bench"]).0, EXIT_USAGE);
}

#[test]
fn bench_single_mode_has_null_verdict() {
    let (code, out, _) = cli(&["bench", "--gen", "procs=2,stmts=20", "--mode", "sparse", "--repeats", "1"]);
    assert_eq!(code, 0);
    let r: serde_json::Value = serde_json::from_str(out.lines().next().unwrap()).unwrap();
    assert_eq!(r["mode"], "sparse");
    assert!(r["verdict"].is_null());
}

#[test]
fn gen_is_deterministic_and_reports_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = bin(&["gen", "--seed", "7", "-o", "a.ir"], dir.path());
    let b = bin(&["gen", "--seed", "7", "-o", "b.ir"], dir.path());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), "1000 statements in 10 procedures\n");
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(
        std::fs::read(dir.path().join("a.ir")).unwrap(),
        std::fs::read(dir.path().join("b.ir")).unwrap()
    );
    let (code, src, err) = cli(&["gen", "--procs", "2", "--stmts", "10"]);
    assert_eq!(code, 0);
    assert!(src.starts_with("proc "));
    assert_eq!(err, "20 statements in 2 procedures\n");
    assert_eq!(cli(&["gen", "--rho", "1.5"]).0, EXIT_USAGE);
    assert_eq!(cli(&["gen", "--procs", "0"]).0, EXIT_USAGE);
}

#[test]
fn gen_rho_one_leaves_queries_top() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["gen", "--rho", "1.0", "--procs", "4", "--stmts", "30", "-o", "r.ir"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let o = bin(&["analyze", "r.ir", "--query", "main:exit:v", "--query", "f1:exit:v", "--all-exits"], dir.path());
    assert_eq!(stdout(&o), "main exit v T\nf1 exit v T\n");
}

#[test]
fn diff_reports_equal() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "p.ir", "proc main() {\n  a = 3\n  if * goto L\n  a = 4\nL:\n  b = a\n}\n");
    let p = dir.path().join("p.ir");
    for client in ["lcp", "taint"] {
        let (code, out, _) = cli(&["diff", p.to_str().unwrap(), "--client", client]);
        assert_eq!(code, 0);
        assert_eq!(out, "equal\n");
    }
    assert_ne!(EXIT_DIFFER, 0);
}
