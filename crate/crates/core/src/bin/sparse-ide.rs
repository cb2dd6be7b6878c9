fn main() {
    env_logger::init();
    let code = sparse_ide::cli::run_cli(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
