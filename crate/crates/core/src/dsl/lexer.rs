//! Tokenizer for `.mt` documents.

use serde::{Deserialize, Serialize};

/// A positioned message. Everything the front end reports (lexical,
/// syntactic, or semantic) is one of these.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub source: Option<String>,
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl Diagnostic {
    pub fn at(pos: Pos, message: impl Into<String>) -> Self {
        Diagnostic {
            source: None,
            line: pos.line,
            col: pos.col,
            message: message.into(),
        }
    }

    pub fn unpositioned(message: impl Into<String>) -> Self {
        Diagnostic {
            source: None,
            line: 0,
            col: 0,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if let Some(source) = &self.source {
            write!(f, "{source}:")?;
        }
        if self.line > 0 {
            write!(f, "{}:{}: ", self.line, self.col)?;
        }
        write!(f, "{}", self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Nat(u64),
    // Keywords.
    Metamodel,
    Instance,
    Transform,
    Class,
    Flag,
    Rel,
    Root,
    One,
    Many,
    Rung,
    Pre,
    Post,
    Map,
    Emit,
    First,
    Last,
    Ladder,
    Base,
    Step,
    Join,
    Via,
    Src,
    Tgt,
    True,
    False,
    Not,
    Succ,
    // Punctuation.
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Colon,
    Semi,
    Comma,
    Hash,
    Dot,
    Slash,
    Equals,
    Arrow,       // ->
    AssignArrow, // <-
    AndOp,       // /\
    OrOp,        // \/
    Eof,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier {s}"),
            Tok::Nat(n) => write!(f, "number {n}"),
            Tok::Metamodel => write!(f, "metamodel"),
            Tok::Instance => write!(f, "instance"),
            Tok::Transform => write!(f, "transform"),
            Tok::Class => write!(f, "class"),
            Tok::Flag => write!(f, "flag"),
            Tok::Rel => write!(f, "rel"),
            Tok::Root => write!(f, "root"),
            Tok::One => write!(f, "one"),
            Tok::Many => write!(f, "many"),
            Tok::Rung => write!(f, "rung"),
            Tok::Pre => write!(f, "pre"),
            Tok::Post => write!(f, "post"),
            Tok::Map => write!(f, "map"),
            Tok::Emit => write!(f, "emit"),
            Tok::First => write!(f, "first"),
            Tok::Last => write!(f, "last"),
            Tok::Ladder => write!(f, "ladder"),
            Tok::Base => write!(f, "base"),
            Tok::Step => write!(f, "step"),
            Tok::Join => write!(f, "join"),
            Tok::Via => write!(f, "via"),
            Tok::Src => write!(f, "src"),
            Tok::Tgt => write!(f, "tgt"),
            Tok::True => write!(f, "true"),
            Tok::False => write!(f, "false"),
            Tok::Not => write!(f, "not"),
            Tok::Succ => write!(f, "succ"),
            Tok::LBrace => write!(f, "'{{'"),
            Tok::RBrace => write!(f, "'}}'"),
            Tok::LParen => write!(f, "'('"),
            Tok::RParen => write!(f, "')'"),
            Tok::LBracket => write!(f, "'['"),
            Tok::RBracket => write!(f, "']'"),
            Tok::Colon => write!(f, "':'"),
            Tok::Semi => write!(f, "';'"),
            Tok::Comma => write!(f, "','"),
            Tok::Hash => write!(f, "'#'"),
            Tok::Dot => write!(f, "'.'"),
            Tok::Slash => write!(f, "'/'"),
            Tok::Equals => write!(f, "'='"),
            Tok::Arrow => write!(f, "'->'"),
            Tok::AssignArrow => write!(f, "'<-'"),
            Tok::AndOp => write!(f, "'/\\'"),
            Tok::OrOp => write!(f, "'\\/'"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

fn keyword(word: &str) -> Option<Tok> {
    Some(match word {
        "metamodel" => Tok::Metamodel,
        "instance" => Tok::Instance,
        "transform" => Tok::Transform,
        "class" => Tok::Class,
        "flag" => Tok::Flag,
        "rel" => Tok::Rel,
        "root" => Tok::Root,
        "one" => Tok::One,
        "many" => Tok::Many,
        "rung" => Tok::Rung,
        "pre" => Tok::Pre,
        "post" => Tok::Post,
        "map" => Tok::Map,
        "emit" => Tok::Emit,
        "first" => Tok::First,
        "last" => Tok::Last,
        "ladder" => Tok::Ladder,
        "base" => Tok::Base,
        "step" => Tok::Step,
        "join" => Tok::Join,
        "via" => Tok::Via,
        "src" => Tok::Src,
        "tgt" => Tok::Tgt,
        "true" => Tok::True,
        "false" => Tok::False,
        "not" => Tok::Not,
        "succ" => Tok::Succ,
        _ => return None,
    })
}

/// Tokenizes a document. `//` starts a line comment.
pub fn tokenize(text: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line = 1u32;
    let mut col = 1u32;

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else if c.is_some() {
                col += 1;
            }
            c
        }};
    }

    loop {
        let pos = Pos { line, col };
        let Some(&c) = chars.peek() else {
            tokens.push(Token { tok: Tok::Eof, pos });
            return Ok(tokens);
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                bump!();
            }
            '{' | '}' | '(' | ')' | '[' | ']' | ':' | ';' | ',' | '#' | '.' | '=' => {
                bump!();
                let tok = match c {
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    ':' => Tok::Colon,
                    ';' => Tok::Semi,
                    ',' => Tok::Comma,
                    '#' => Tok::Hash,
                    '.' => Tok::Dot,
                    _ => Tok::Equals,
                };
                tokens.push(Token { tok, pos });
            }
            '/' => {
                bump!();
                match chars.peek() {
                    Some('\\') => {
                        bump!();
                        tokens.push(Token {
                            tok: Tok::AndOp,
                            pos,
                        });
                    }
                    Some('/') => {
                        // Line comment.
                        while let Some(&c2) = chars.peek() {
                            if c2 == '\n' {
                                break;
                            }
                            bump!();
                        }
                    }
                    _ => tokens.push(Token {
                        tok: Tok::Slash,
                        pos,
                    }),
                }
            }
            '\\' => {
                bump!();
                if chars.peek() == Some(&'/') {
                    bump!();
                    tokens.push(Token {
                        tok: Tok::OrOp,
                        pos,
                    });
                } else {
                    return Err(Diagnostic::at(pos, "expected '/' after '\\'"));
                }
            }
            '-' => {
                bump!();
                if chars.peek() == Some(&'>') {
                    bump!();
                    tokens.push(Token {
                        tok: Tok::Arrow,
                        pos,
                    });
                } else {
                    return Err(Diagnostic::at(pos, "expected '>' after '-'"));
                }
            }
            '<' => {
                bump!();
                if chars.peek() == Some(&'-') {
                    bump!();
                    tokens.push(Token {
                        tok: Tok::AssignArrow,
                        pos,
                    });
                } else {
                    return Err(Diagnostic::at(pos, "expected '-' after '<'"));
                }
            }
            '0'..='9' => {
                let mut value: u64 = 0;
                while let Some(&d) = chars.peek() {
                    let Some(digit) = d.to_digit(10) else { break };
                    bump!();
                    value = value
                        .checked_mul(10)
                        .and_then(|v| v.checked_add(digit as u64))
                        .ok_or_else(|| {
                            Diagnostic::at(pos, "number literal does not fit in 64 bits")
                        })?;
                }
                tokens.push(Token {
                    tok: Tok::Nat(value),
                    pos,
                });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut word = String::new();
                while let Some(&c2) = chars.peek() {
                    if c2.is_ascii_alphanumeric() || c2 == '_' {
                        word.push(c2);
                        bump!();
                    } else {
                        break;
                    }
                }
                let tok = keyword(&word).unwrap_or(Tok::Ident(word));
                tokens.push(Token { tok, pos });
            }
            other => {
                return Err(Diagnostic::at(
                    pos,
                    format!("unexpected character {other:?}"),
                ));
            }
        }
    }
}
