use std::fmt;

use thiserror::Error;

use super::ast::{BinOp, Cmd, Expr};
use crate::model::{Lock, Value, Var};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(String),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(s) => write!(f, "`{s}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

const KEYWORDS: [&str; 11] = [
    "skip", "if", "then", "else", "fi", "while", "do", "od", "acquire", "release", "stop",
];

const SYMBOLS: [&str; 13] = [":=", "==", "!=", "<=", "&&", "||", "<", "+", "-", "*", ";", "(", ")"];

struct Lexer;

impl Lexer {
    fn tokenize(src: &str) -> Result<Vec<(Tok, usize, usize)>, ParseError> {
        let mut out = Vec::new();
        let chars: Vec<char> = src.chars().collect();
        let (mut i, mut line, mut col) = (0, 1, 1);
        while i < chars.len() {
            let c = chars[i];
            if c == '\n' {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            if c.is_whitespace() {
                i += 1;
                col += 1;
                continue;
            }
            if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            let (start_line, start_col) = (line, col);
            if c.is_ascii_alphabetic() || c == '_' {
                let mut s = String::new();
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    s.push(chars[i]);
                    i += 1;
                    col += 1;
                }
                out.push((Tok::Ident(s), start_line, start_col));
                continue;
            }
            if c.is_ascii_digit() {
                let mut s = String::new();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    s.push(chars[i]);
                    i += 1;
                    col += 1;
                }
                out.push((Tok::Int(s), start_line, start_col));
                continue;
            }
            let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
            let sym = SYMBOLS.iter().find(|s| rest.starts_with(**s));
            match sym {
                Some(s) => {
                    i += s.len();
                    col += s.len();
                    out.push((Tok::Sym(s), start_line, start_col));
                }
                None => {
                    return Err(ParseError {
                        line,
                        col,
                        message: format!("unexpected character `{c}`"),
                    })
                }
            }
        }
        out.push((Tok::Eof, line, col));
        Ok(out)
    }
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Self {
            toks: Lexer::tokenize(src)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let (_, line, col) = self.toks[self.pos];
        Err(ParseError {
            line,
            col,
            message: message.into(),
        })
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn is_sym(&self, sym: &str) -> bool {
        matches!(self.peek(), Tok::Sym(s) if *s == sym)
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.is_kw(kw) {
            self.advance();
            Ok(())
        } else {
            self.err(format!("expected `{kw}`, found {}", self.peek()))
        }
    }

    fn expect_sym(&mut self, sym: &str) -> Result<(), ParseError> {
        if self.is_sym(sym) {
            self.advance();
            Ok(())
        } else {
            self.err(format!("expected `{sym}`, found {}", self.peek()))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.advance();
                Ok(s)
            }
            t => self.err(format!("expected identifier, found {t}")),
        }
    }

    fn at_terminator(&self) -> bool {
        matches!(self.peek(), Tok::Eof) || self.is_kw("else") || self.is_kw("fi") || self.is_kw("od")
    }

    fn cmd(&mut self) -> Result<Cmd, ParseError> {
        let mut stmts = vec![self.stmt()?];
        while self.is_sym(";") {
            self.advance();
            if self.at_terminator() {
                break;
            }
            stmts.push(self.stmt()?);
        }
        Ok(Cmd::seq_all(stmts))
    }

    fn stmt(&mut self) -> Result<Cmd, ParseError> {
        let Tok::Ident(word) = self.peek().clone() else {
            return self.err(format!("expected a command, found {}", self.peek()));
        };
        match word.as_str() {
            "skip" => {
                self.advance();
                Ok(Cmd::Skip)
            }
            "if" => {
                self.advance();
                let e = self.expr()?;
                self.expect_kw("then")?;
                let a = self.cmd()?;
                self.expect_kw("else")?;
                let b = self.cmd()?;
                self.expect_kw("fi")?;
                Ok(Cmd::if_(e, a, b))
            }
            "while" => {
                self.advance();
                let e = self.expr()?;
                self.expect_kw("do")?;
                let body = self.cmd()?;
                self.expect_kw("od")?;
                Ok(Cmd::while_(e, body))
            }
            "acquire" | "release" => {
                self.advance();
                self.expect_sym("(")?;
                let k = Lock::new(&self.ident()?);
                self.expect_sym(")")?;
                Ok(if word == "acquire" {
                    Cmd::LockAcq(k)
                } else {
                    Cmd::LockRel(k)
                })
            }
            "stop" => self.err("`stop` cannot appear in source programs"),
            _ if KEYWORDS.contains(&word.as_str()) => self.err(format!("expected a command, found `{word}`")),
            _ => {
                let v = Var::new(&self.ident()?);
                self.expect_sym(":=")?;
                let e = self.expr()?;
                Ok(Cmd::Assign(v, e))
            }
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.binary(1)
    }

    fn peek_op(&self) -> Option<BinOp> {
        match self.peek() {
            Tok::Sym(s) => BinOp::from_symbol(s),
            _ => None,
        }
    }

    fn binary(&mut self, min_prec: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.primary()?;
        while let Some(op) = self.peek_op() {
            if op.precedence() < min_prec {
                break;
            }
            self.advance();
            let rhs = self.binary(op.precedence() + 1)?;
            lhs = Expr::bin(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Int(digits) => {
                self.advance();
                self.literal(&digits)
            }
            Tok::Sym("-") => {
                self.advance();
                match self.peek().clone() {
                    Tok::Int(digits) => {
                        self.advance();
                        self.literal(&format!("-{digits}"))
                    }
                    t => self.err(format!("expected a number after `-`, found {t}")),
                }
            }
            Tok::Sym("(") => {
                self.advance();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(_) => Ok(Expr::Var(Var::new(&self.ident()?))),
            t => self.err(format!("expected an expression, found {t}")),
        }
    }

    fn literal(&self, text: &str) -> Result<Expr, ParseError> {
        match text.parse::<Value>() {
            Ok(n) => Ok(Expr::Const(n)),
            Err(_) => {
                let (_, line, col) = self.toks[self.pos.saturating_sub(1)];
                Err(ParseError {
                    line,
                    col,
                    message: format!("integer literal `{text}` out of range"),
                })
            }
        }
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        if matches!(self.peek(), Tok::Eof) {
            Ok(())
        } else {
            self.err(format!("unexpected {}", self.peek()))
        }
    }
}

/// Parses a complete command. Sequences nest to the right.
pub fn parse_cmd(src: &str) -> Result<Cmd, ParseError> {
    let mut p = Parser::new(src)?;
    let c = p.cmd()?;
    p.finish()?;
    Ok(c)
}

pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(src)?;
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}
