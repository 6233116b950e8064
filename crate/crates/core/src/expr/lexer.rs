use serde::Serialize;

use super::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenKind {
    Number,
    Identifier,
    /// `+ - * / ^ ,`
    Operator,
    Paren,
}

/// A lexeme with its 1-based character position in the source.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub position: usize,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let kind = if c.is_ascii_digit() || c == '.' {
            i = scan_number(&chars, i)?;
            TokenKind::Number
        } else if c.is_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            TokenKind::Identifier
        } else if "+-*/^,".contains(c) {
            i += 1;
            TokenKind::Operator
        } else if c == '(' || c == ')' {
            i += 1;
            TokenKind::Paren
        } else {
            return Err(ParseError::new(start + 1, format!("unexpected character '{c}'")));
        };
        tokens.push(Token {
            kind,
            text: chars[start..i].iter().collect(),
            position: start + 1,
        });
    }
    Ok(tokens)
}

/// Returns the index one past the literal starting at `i`.
fn scan_number(chars: &[char], mut i: usize) -> Result<usize, ParseError> {
    let start = i;
    let digits = |i: &mut usize| {
        let from = *i;
        while *i < chars.len() && chars[*i].is_ascii_digit() {
            *i += 1;
        }
        *i - from
    };
    let mut mantissa = digits(&mut i);
    if i < chars.len() && chars[i] == '.' {
        i += 1;
        mantissa += digits(&mut i);
    }
    if mantissa == 0 {
        return Err(ParseError::new(start + 1, "malformed number"));
    }
    if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
        let mut j = i + 1;
        if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
            j += 1;
        }
        if digits(&mut j) == 0 {
            return Err(ParseError::new(i + 1, "malformed exponent"));
        }
        i = j;
    }
    Ok(i)
}
