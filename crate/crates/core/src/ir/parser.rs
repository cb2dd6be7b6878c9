use super::{BinOp, Expectation, IrError, Place, Procedure, Program, Statement, StmtKind};
use crate::lattice::LatticeValue;

const KEYWORDS: &[&str] = &["proc", "return", "goto", "if", "call", "new"];

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_' || c == '$')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$')
        && !KEYWORDS.contains(&s)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Punct(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    col: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> IrError {
    IrError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn lex(text: &str, line: usize, col_offset: usize) -> Result<Vec<Token>, IrError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let col = col_offset + i + 1;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_alphabetic() || c == '_' || c == '$' {
            let start = i;
            while i < bytes.len()
                && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'$')
            {
                i += 1;
            }
            tokens.push(Token {
                tok: Tok::Ident(text[start..i].to_string()),
                col,
            });
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let value = text[start..i]
                .parse()
                .map_err(|_| syntax(line, col, "integer literal out of range"))?;
            tokens.push(Token {
                tok: Tok::Int(value),
                col,
            });
        } else if "=+-*/.@[](),:{}".contains(c) {
            tokens.push(Token {
                tok: Tok::Punct(c),
                col,
            });
            i += 1;
        } else {
            return Err(syntax(line, col, format!("unexpected character `{c}`")));
        }
    }
    Ok(tokens)
}

/// Cursor over the tokens of a single line.
struct Cursor<'a> {
    tokens: &'a [Token],
    pos: usize,
    line: usize,
    end_col: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, offset: usize) -> Option<&Tok> {
        self.tokens.get(self.pos + offset).map(|t| &t.tok)
    }

    fn col(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end_col, |t| t.col)
    }

    fn err(&self, message: impl Into<String>) -> IrError {
        syntax(self.line, self.col(), message)
    }

    fn next(&mut self) -> Option<Tok> {
        let tok = self.tokens.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        tok
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), IrError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String, IrError> {
        match self.peek() {
            Some(Tok::Ident(s)) if is_identifier(s) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            Some(Tok::Ident(s)) => Err(self.err(format!("`{s}` is a keyword"))),
            _ => Err(self.err("expected identifier")),
        }
    }

    fn int(&mut self) -> Result<i64, IrError> {
        let negative = self.eat('-');
        match self.next() {
            Some(Tok::Int(v)) => Ok(if negative { -v } else { v }),
            _ => {
                self.pos -= 1;
                Err(self.err("expected integer literal"))
            }
        }
    }

    fn at_int(&self) -> bool {
        matches!(self.peek(), Some(Tok::Int(_)))
            || (self.peek() == Some(&Tok::Punct('-')) && matches!(self.peek_at(1), Some(Tok::Int(_))))
    }

    fn done(&self) -> Result<(), IrError> {
        if self.pos < self.tokens.len() {
            Err(self.err("unexpected trailing input"))
        } else {
            Ok(())
        }
    }

    fn args(&mut self) -> Result<Vec<String>, IrError> {
        self.expect('(')?;
        let mut args = Vec::new();
        if self.eat(')') {
            return Ok(args);
        }
        loop {
            args.push(self.ident()?);
            if self.eat(')') {
                return Ok(args);
            }
            self.expect(',')?;
        }
    }
}

fn parse_statement(cur: &mut Cursor) -> Result<StmtKind, IrError> {
    if cur.eat_keyword("return") {
        let value = if cur.peek().is_some() { Some(cur.ident()?) } else { None };
        return Ok(StmtKind::Return { value });
    }
    if cur.eat_keyword("goto") {
        return Ok(StmtKind::Goto { label: cur.ident()? });
    }
    if cur.eat_keyword("if") {
        let cond = if cur.eat('*') { None } else { Some(cur.ident()?) };
        if !cur.eat_keyword("goto") {
            return Err(cur.err("expected `goto`"));
        }
        return Ok(StmtKind::Branch {
            cond,
            label: cur.ident()?,
        });
    }
    if cur.eat_keyword("call") {
        let callee = cur.ident()?;
        let args = cur.args()?;
        return Ok(StmtKind::Call {
            target: None,
            callee,
            args,
        });
    }
    if cur.eat('@') {
        let class = cur.ident()?;
        cur.expect('.')?;
        let field = cur.ident()?;
        cur.expect('=')?;
        return Ok(StmtKind::StaticStore {
            class,
            field,
            source: cur.ident()?,
        });
    }
    let lhs = cur.ident()?;
    if cur.eat('.') {
        let field = cur.ident()?;
        cur.expect('=')?;
        return Ok(StmtKind::FieldStore {
            base: lhs,
            field,
            source: cur.ident()?,
        });
    }
    if cur.eat('[') {
        let index = cur.int()?;
        cur.expect(']')?;
        cur.expect('=')?;
        return Ok(StmtKind::ArrayStore {
            base: lhs,
            index,
            source: cur.ident()?,
        });
    }
    cur.expect('=')?;
    let target = lhs;
    if cur.at_int() {
        let value = cur.int()?;
        if matches!(cur.peek(), Some(Tok::Punct('+' | '-' | '*' | '/'))) {
            return Err(cur.err("binop must have the variable operand first"));
        }
        return Ok(StmtKind::ConstAssign { target, value });
    }
    if cur.eat_keyword("new") {
        return Ok(StmtKind::New { target });
    }
    if cur.eat_keyword("call") {
        let callee = cur.ident()?;
        let args = cur.args()?;
        return Ok(StmtKind::Call {
            target: Some(target),
            callee,
            args,
        });
    }
    if cur.eat('@') {
        let class = cur.ident()?;
        cur.expect('.')?;
        return Ok(StmtKind::StaticLoad {
            target,
            class,
            field: cur.ident()?,
        });
    }
    let source = cur.ident()?;
    if cur.eat('.') {
        return Ok(StmtKind::FieldLoad {
            target,
            base: source,
            field: cur.ident()?,
        });
    }
    if cur.eat('[') {
        let index = cur.int()?;
        cur.expect(']')?;
        return Ok(StmtKind::ArrayLoad {
            target,
            base: source,
            index,
        });
    }
    let op = match cur.peek() {
        Some(Tok::Punct('+')) => BinOp::Add,
        Some(Tok::Punct('-')) => BinOp::Sub,
        Some(Tok::Punct('*')) => BinOp::Mul,
        Some(Tok::Punct('/')) => BinOp::Div,
        _ => return Ok(StmtKind::Copy { target, source }),
    };
    cur.pos += 1;
    if matches!(cur.peek(), Some(Tok::Ident(_))) {
        return Err(cur.err("non-linear binop: both operands are variables"));
    }
    let operand = cur.int()?;
    Ok(StmtKind::Binop {
        target,
        source,
        op,
        operand,
    })
}

struct OpenProc {
    name: String,
    params: Vec<String>,
    body: Vec<Statement>,
    expectations: Vec<Expectation>,
    line: usize,
}

fn parse_expectation(text: &str, line: usize, col: usize) -> Result<Option<(Place, LatticeValue)>, IrError> {
    let Some(rest) = text.trim().strip_prefix("expect ") else {
        return Ok(None);
    };
    let (place, value) = rest
        .split_once('=')
        .ok_or_else(|| syntax(line, col, "expectation needs `place = value`"))?;
    let place = Place::parse(place).ok_or_else(|| syntax(line, col, "bad expectation place"))?;
    let value = LatticeValue::parse(value).ok_or_else(|| syntax(line, col, "bad expectation value"))?;
    Ok(Some((place, value)))
}

fn parse_header(cur: &mut Cursor) -> Result<(String, Vec<String>), IrError> {
    let name = cur.ident()?;
    let params = cur.args()?;
    cur.expect('{')?;
    Ok((name, params))
}

/// Parses the textual IR into a [`Program`].
///
/// ```text
/// proc main() {
///   a = 3
///   b = a + 1   // expect b = 4
/// }
/// ```
pub fn parse_program(text: &str) -> Result<Program, IrError> {
    let mut procedures = Vec::new();
    let mut open: Option<OpenProc> = None;
    // Expectations wait for the next statement (or the closing brace) to learn their node.
    let mut pending: Vec<(Place, LatticeValue, usize)> = Vec::new();

    for (line_idx, raw) in text.lines().enumerate() {
        let line = line_idx + 1;
        let (code, comment) = match raw.find("//") {
            Some(i) => (&raw[..i], Some((&raw[i + 2..], i + 3))),
            None => (raw, None),
        };
        let tokens = lex(code, line, 0)?;
        let mut cur = Cursor {
            tokens: &tokens,
            pos: 0,
            line,
            end_col: code.len() + 1,
        };

        if !tokens.is_empty() {
            match open.as_mut() {
                None => {
                    if !cur.eat_keyword("proc") {
                        return Err(cur.err("expected `proc`"));
                    }
                    let (name, params) = parse_header(&mut cur)?;
                    let closed = cur.eat('}');
                    cur.done()?;
                    let p = OpenProc {
                        name,
                        params,
                        body: Vec::new(),
                        expectations: Vec::new(),
                        line,
                    };
                    if closed {
                        procedures.push(finish(p, &mut pending)?);
                    } else {
                        open = Some(p);
                    }
                }
                Some(p) => {
                    if cur.eat('}') {
                        cur.done()?;
                        let p = open.take().expect("open procedure");
                        procedures.push(finish(p, &mut pending)?);
                    } else {
                        // `L:` optionally followed by a statement on the same line.
                        if matches!(cur.peek(), Some(Tok::Ident(_))) && cur.peek_at(1) == Some(&Tok::Punct(':')) {
                            let name = cur.ident()?;
                            cur.pos += 1;
                            push_stmt(p, &mut pending, StmtKind::Label { name }, line);
                        }
                        if cur.peek().is_some() {
                            let kind = parse_statement(&mut cur)?;
                            cur.done()?;
                            push_stmt(p, &mut pending, kind, line);
                        }
                    }
                }
            }
        }

        if let Some((comment, col)) = comment {
            if let Some((place, value)) = parse_expectation(comment, line, col)? {
                if open.is_none() {
                    return Err(syntax(line, col, "expectation outside a procedure"));
                }
                pending.push((place, value, line));
            }
        }
    }
    if let Some(p) = open {
        return Err(syntax(p.line, 1, format!("procedure `{}` is not closed", p.name)));
    }
    Program::new(procedures)
}

fn push_stmt(p: &mut OpenProc, pending: &mut Vec<(Place, LatticeValue, usize)>, kind: StmtKind, line: usize) {
    let node = p.body.len() as u32 + 1;
    flush(p, pending, node);
    p.body.push(Statement { kind, line });
}

fn flush(p: &mut OpenProc, pending: &mut Vec<(Place, LatticeValue, usize)>, node: u32) {
    for (place, value, line) in pending.drain(..) {
        p.expectations.push(Expectation {
            node,
            place,
            value,
            line,
        });
    }
}

fn finish(mut p: OpenProc, pending: &mut Vec<(Place, LatticeValue, usize)>) -> Result<Procedure, IrError> {
    let needs_return = !matches!(
        p.body.last().map(|s| &s.kind),
        Some(StmtKind::Return { .. } | StmtKind::Goto { .. })
    );
    if needs_return {
        p.body.push(Statement {
            kind: StmtKind::Return { value: None },
            line: 0,
        });
    }
    let exit = p.body.len() as u32 + 1;
    // Trailing expectations describe the point after the last written statement.
    let node = if needs_return { exit - 1 } else { exit };
    flush(&mut p, pending, node);
    Procedure::new(p.name, p.params, p.body, p.expectations, p.line)
}
