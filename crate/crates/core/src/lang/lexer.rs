use super::ast::Span;
use super::LangError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Float(f64),
    Str(String),
    Kw(&'static str),
    Punct(&'static str),
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(name) => format!("identifier `{name}`"),
            Tok::Int(v) => format!("integer `{v}`"),
            Tok::Float(v) => format!("float `{v}`"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Kw(k) => format!("keyword `{k}`"),
            Tok::Punct(p) => format!("`{p}`"),
            Tok::Eof => "end of file".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

const KEYWORDS: &[&str] = &[
    "fn", "test", "let", "if", "else", "while", "return", "assert", "spawn", "true", "false", "null",
    "box", "void", "bool", "int", "float", "str", "arr", "ref",
];

// Longest first so that `->` wins over `-`.
const PUNCTS: &[&str] = &[
    "->", "==", "!=", "<=", ">=", "&&", "||", "(", ")", "{", "}", "[", "]", ",", ";", "=", "+", "-",
    "*", "/", "%", "<", ">", "!", ":",
];

pub fn tokenize(file: &str, src: &str) -> Result<Vec<Token>, LangError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut pos = 0;
    let mut line = 1u32;
    let mut line_start = 0usize;

    let err = |line: u32, col: u32, message: String| LangError::Syntax {
        file: file.to_string(),
        line,
        col,
        message,
    };

    while pos < bytes.len() {
        let c = bytes[pos];
        if c == b'\n' {
            pos += 1;
            line += 1;
            line_start = pos;
            continue;
        }
        if c.is_ascii_whitespace() {
            pos += 1;
            continue;
        }
        if c == b'/' && bytes.get(pos + 1) == Some(&b'/') {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }

        let start = pos;
        let col = (src[line_start..start].chars().count() + 1) as u32;
        let tok = if c.is_ascii_alphabetic() || c == b'_' {
            while pos < bytes.len() && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_') {
                pos += 1;
            }
            let word = &src[start..pos];
            match KEYWORDS.iter().find(|k| **k == word) {
                Some(kw) => Tok::Kw(kw),
                None => Tok::Ident(word.to_string()),
            }
        } else if c.is_ascii_digit() {
            while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                pos += 1;
            }
            let mut is_float = false;
            if bytes.get(pos) == Some(&b'.') && bytes.get(pos + 1).is_some_and(u8::is_ascii_digit) {
                is_float = true;
                pos += 1;
                while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                    pos += 1;
                }
            }
            if matches!(bytes.get(pos), Some(b'e') | Some(b'E')) {
                let mut look = pos + 1;
                if matches!(bytes.get(look), Some(b'+') | Some(b'-')) {
                    look += 1;
                }
                if bytes.get(look).is_some_and(u8::is_ascii_digit) {
                    is_float = true;
                    pos = look;
                    while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                        pos += 1;
                    }
                }
            }
            let text = &src[start..pos];
            if is_float {
                Tok::Float(
                    text.parse()
                        .map_err(|_| err(line, col, format!("malformed float literal `{text}`")))?,
                )
            } else {
                Tok::Int(
                    text.parse()
                        .map_err(|_| err(line, col, format!("integer literal `{text}` out of range")))?,
                )
            }
        } else if c == b'"' {
            pos += 1;
            let mut value = String::new();
            loop {
                let Some(ch) = src[pos..].chars().next() else {
                    return Err(err(line, col, "unterminated string literal".into()));
                };
                pos += ch.len_utf8();
                match ch {
                    '"' => break,
                    '\n' => return Err(err(line, col, "newline in string literal".into())),
                    '\\' => {
                        let esc = src[pos..].chars().next();
                        pos += esc.map_or(0, char::len_utf8);
                        value.push(match esc {
                            Some('n') => '\n',
                            Some('t') => '\t',
                            Some('"') => '"',
                            Some('\\') => '\\',
                            other => {
                                return Err(err(
                                    line,
                                    col,
                                    format!("unknown escape `\\{}`", other.unwrap_or(' ')),
                                ))
                            }
                        });
                    }
                    _ => value.push(ch),
                }
            }
            Tok::Str(value)
        } else if let Some(p) = PUNCTS.iter().find(|p| src[pos..].starts_with(**p)) {
            pos += p.len();
            Tok::Punct(p)
        } else {
            let ch = src[pos..].chars().next().unwrap_or('?');
            return Err(err(line, col, format!("unexpected character `{ch}`")));
        };
        out.push(Token { tok, span: Span { line, col, start, end: pos } });
    }

    let col = (src[line_start..].chars().count() + 1) as u32;
    out.push(Token { tok: Tok::Eof, span: Span { line, col, start: src.len(), end: src.len() } });
    Ok(out)
}
