use std::fmt;

use super::{ParseError, SourcePos};
use crate::ast::is_symbol_char;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    /// Lower-case or `_`-prefixed identifier: variables and functions.
    Ident(String),
    /// Upper-case or numeric identifier: constructors and type names.
    Upper(String),
    /// `(op)` optionally followed by a suffix, e.g. `(++)_inv`.
    Section(String),
    Op(String),
    Cons,
    Equals,
    Bar,
    DColon,
    Arrow,
    StrictEq,
    NonStrictEq,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Semi,
    /// A token starting in column 1 begins a new declaration.
    Newline,
    Data,
    Case,
    Of,
    Where,
    Free,
    Failed,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Upper(s) => write!(f, "constructor `{s}`"),
            Tok::Section(s) => write!(f, "operator section `{s}`"),
            Tok::Op(s) => write!(f, "operator `{s}`"),
            Tok::Cons => f.write_str("`:`"),
            Tok::Equals => f.write_str("`=`"),
            Tok::Bar => f.write_str("`|`"),
            Tok::DColon => f.write_str("`::`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::StrictEq => f.write_str("`=:=`"),
            Tok::NonStrictEq => f.write_str("`=:<=`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Newline => f.write_str("new declaration"),
            Tok::Data => f.write_str("`data`"),
            Tok::Case => f.write_str("`case`"),
            Tok::Of => f.write_str("`of`"),
            Tok::Where => f.write_str("`where`"),
            Tok::Free => f.write_str("`free`"),
            Tok::Failed => f.write_str("`failed`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub pos: SourcePos,
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn pos(&self) -> SourcePos {
        SourcePos { line: self.line, column: self.column }
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if !pred(c) {
                break;
            }
            s.push(c);
            self.bump();
        }
        s
    }
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut cur = Cursor { chars: text.chars().peekable(), line: 1, column: 1 };
    let mut out: Vec<Token> = Vec::new();
    loop {
        cur.take_while(|c| c.is_whitespace());
        let pos = cur.pos();
        let Some(c) = cur.peek() else {
            out.push(Token { tok: Tok::Eof, pos });
            return Ok(out);
        };
        let tok = if c.is_lowercase() || c == '_' {
            let s = cur.take_while(is_ident_char);
            match s.as_str() {
                "data" => Tok::Data,
                "case" => Tok::Case,
                "of" => Tok::Of,
                "where" => Tok::Where,
                "free" => Tok::Free,
                "failed" => Tok::Failed,
                _ => Tok::Ident(s),
            }
        } else if c.is_uppercase() || c.is_ascii_digit() {
            Tok::Upper(cur.take_while(is_ident_char))
        } else if is_symbol_char(c) {
            let s = cur.take_while(is_symbol_char);
            if s.len() >= 2 && s.chars().all(|c| c == '-') {
                cur.take_while(|c| c != '\n');
                continue;
            }
            match s.as_str() {
                ":" => Tok::Cons,
                "=" => Tok::Equals,
                "|" => Tok::Bar,
                "::" => Tok::DColon,
                "->" => Tok::Arrow,
                "=:=" => Tok::StrictEq,
                "=:<=" => Tok::NonStrictEq,
                _ => Tok::Op(s),
            }
        } else {
            cur.bump();
            match c {
                '(' => match section(&mut cur) {
                    Some(s) => Tok::Section(s),
                    None => Tok::LParen,
                },
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                ',' => Tok::Comma,
                ';' => Tok::Semi,
                other => {
                    return Err(ParseError::new(pos, ["token"], format!("character `{other}`")));
                }
            }
        };
        if pos.column == 1 && !out.is_empty() {
            out.push(Token { tok: Tok::Newline, pos });
        }
        out.push(Token { tok, pos });
    }
}

/// After `(`: recognizes `op)` plus an optional `_suffix`, consuming it.
/// Leaves the cursor untouched when the input is not a section.
fn section(cur: &mut Cursor<'_>) -> Option<String> {
    let mut look = cur.chars.clone();
    let mut op = String::new();
    while let Some(&c) = look.peek() {
        if !is_symbol_char(c) {
            break;
        }
        op.push(c);
        look.next();
    }
    if op.is_empty() || look.peek() != Some(&')') || matches!(op.as_str(), ":" | "=" | "|" | "::" | "->") {
        return None;
    }
    if op.len() >= 2 && op.chars().all(|c| c == '-') {
        return None;
    }
    for _ in 0..=op.chars().count() {
        cur.bump();
    }
    if cur.peek() == Some('_') {
        op.push_str(&cur.take_while(is_ident_char));
    }
    Some(op)
}
