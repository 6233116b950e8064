//! Recursive descent over the token stream:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' exponent)*
//! exponent:= '-'? primary            (must fold to a constant)
//! primary := number | name | name '(' args ')' | '(' sum ')'
//! ```

use super::lexer::{tokenize, Token, TokenKind};
use super::{BinaryOp, Expr, ParseError, UnaryOp};

pub fn parse_with_var(src: &str, var: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(src)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        var,
        end: src.chars().count() + 1,
    };
    if p.tokens.is_empty() {
        return Err(ParseError::new(1, "empty expression"));
    }
    let e = p.sum()?;
    match p.peek() {
        None => Ok(e),
        Some(t) => Err(ParseError::new(t.position, format!("unexpected '{}'", t.text))),
    }
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    var: &'a str,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn at(&self, kind: TokenKind, text: &str) -> bool {
        self.peek().is_some_and(|t| t.kind == kind && t.text == text)
    }

    fn here(&self) -> usize {
        self.peek().map_or(self.end, |t| t.position)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, kind: TokenKind, text: &str) -> Result<(), ParseError> {
        if self.at(kind, text) {
            self.pos += 1;
            Ok(())
        } else {
            let found = self
                .peek()
                .map_or("end of input".to_string(), |t| format!("'{}'", t.text));
            Err(ParseError::new(
                self.here(),
                format!("expected '{text}', found {found}"),
            ))
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        loop {
            let op = if self.at(TokenKind::Operator, "+") {
                BinaryOp::Add
            } else if self.at(TokenKind::Operator, "-") {
                BinaryOp::Sub
            } else {
                return Ok(lhs);
            };
            self.pos += 1;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(self.product()?));
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.at(TokenKind::Operator, "*") {
                BinaryOp::Mul
            } else if self.at(TokenKind::Operator, "/") {
                BinaryOp::Div
            } else {
                return Ok(lhs);
            };
            self.pos += 1;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.at(TokenKind::Operator, "-") {
            self.pos += 1;
            return Ok(Expr::Unary(UnaryOp::Neg, Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let mut base = self.primary()?;
        while self.at(TokenKind::Operator, "^") {
            self.pos += 1;
            let position = self.here();
            let negate = self.at(TokenKind::Operator, "-");
            if negate {
                self.pos += 1;
            }
            let exponent = self.primary()?;
            let value = exponent
                .constant_value()
                .ok_or_else(|| ParseError::new(position, "exponent must be a constant expression"))?;
            base = Expr::Pow(Box::new(base), if negate { -value } else { value });
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let position = self.here();
        let Some(tok) = self.next() else {
            return Err(ParseError::new(position, "unexpected end of input"));
        };
        match tok.kind {
            TokenKind::Number => tok
                .text
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(Expr::Const)
                .ok_or_else(|| ParseError::new(position, format!("number '{}' out of range", tok.text))),
            TokenKind::Paren if tok.text == "(" => {
                let e = self.sum()?;
                self.expect(TokenKind::Paren, ")")?;
                Ok(e)
            }
            TokenKind::Identifier => self.name(&tok),
            _ => Err(ParseError::new(position, format!("unexpected '{}'", tok.text))),
        }
    }

    fn name(&mut self, tok: &Token) -> Result<Expr, ParseError> {
        let name = tok.text.as_str();
        if name == self.var {
            return Ok(Expr::Var);
        }
        if !self.at(TokenKind::Paren, "(") {
            return match name {
                "pi" => Ok(Expr::Const(std::f64::consts::PI)),
                "e" => Ok(Expr::Const(std::f64::consts::E)),
                _ => Err(ParseError::new(
                    tok.position,
                    format!("unknown identifier '{name}' (the variable is '{}')", self.var),
                )),
            };
        }
        let unary = match name {
            "exp" => Some(UnaryOp::Exp),
            "log" | "ln" => Some(UnaryOp::Log),
            "abs" => Some(UnaryOp::Abs),
            "sqrt" => Some(UnaryOp::Sqrt),
            "max" => None,
            _ => return Err(ParseError::new(tok.position, format!("unknown function '{name}'"))),
        };
        self.pos += 1;
        let first = self.sum()?;
        let e = match unary {
            Some(op) => Expr::Unary(op, Box::new(first)),
            None => {
                self.expect(TokenKind::Operator, ",")?;
                let second = self.sum()?;
                Expr::Max(Box::new(first), Box::new(second))
            }
        };
        self.expect(TokenKind::Paren, ")")?;
        Ok(e)
    }
}
