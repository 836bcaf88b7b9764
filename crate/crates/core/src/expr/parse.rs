//! Recursive-descent parser.
//!
//! Precedence, loosest first: `+ -`, `* /`, unary `-`, `^` (right
//! associative; its right operand may itself carry a unary sign).

use super::{BinOp, Expr, Func, Node, ParseError, Span};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(x) => format!("number {x}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn next(&mut self) -> Result<(Tok, Span), ParseError> {
        self.skip_ws();
        let bytes = self.src.as_bytes();
        let start = self.pos;
        let Some(&c) = bytes.get(start) else {
            return Ok((Tok::End, Span::new(start, start)));
        };
        let single = |t: Tok, this: &mut Self| {
            this.pos += 1;
            Ok((t, Span::new(start, start + 1)))
        };
        match c {
            b'+' => single(Tok::Plus, self),
            b'-' => single(Tok::Minus, self),
            b'*' => single(Tok::Star, self),
            b'/' => single(Tok::Slash, self),
            b'^' => single(Tok::Caret, self),
            b'(' => single(Tok::LParen, self),
            b')' => single(Tok::RParen, self),
            b'0'..=b'9' | b'.' => self.number(start),
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while self.pos < bytes.len() && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_') {
                    self.pos += 1;
                }
                Ok((Tok::Ident(self.src[start..self.pos].to_string()), Span::new(start, self.pos)))
            }
            _ => {
                let ch = self.src[start..].chars().next().unwrap_or('?');
                Err(ParseError::Syntax {
                    offset: start,
                    expected: vec!["number", "identifier", "operator", "parenthesis"],
                    found: format!("character `{ch}`"),
                })
            }
        }
    }

    fn number(&mut self, start: usize) -> Result<(Tok, Span), ParseError> {
        let bytes = self.src.as_bytes();
        let digits = |this: &mut Self| {
            let s = this.pos;
            while this.pos < bytes.len() && bytes[this.pos].is_ascii_digit() {
                this.pos += 1;
            }
            this.pos - s
        };
        let mut n = digits(self);
        if bytes.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            return Err(ParseError::Syntax { offset: start, expected: vec!["digit"], found: "`.`".into() });
        }
        if matches!(bytes.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(bytes.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                // `2e` is a number followed by an identifier; let the parser reject it.
                self.pos = save;
            }
        }
        let text = &self.src[start..self.pos];
        let value: f64 = text.parse().map_err(|_| ParseError::InvalidNumber { offset: start, text: text.to_string() })?;
        Ok((Tok::Num(value), Span::new(start, self.pos)))
    }
}

pub(super) struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    span: Span,
}

impl<'a> Parser<'a> {
    pub(super) fn new(src: &'a str) -> Result<Self, ParseError> {
        let mut lexer = Lexer { src, pos: 0 };
        let (tok, span) = lexer.next()?;
        Ok(Self { lexer, tok, span })
    }

    fn bump(&mut self) -> Result<(Tok, Span), ParseError> {
        let (tok, span) = self.lexer.next()?;
        Ok((std::mem::replace(&mut self.tok, tok), std::mem::replace(&mut self.span, span)))
    }

    fn unexpected(&self, expected: Vec<&'static str>) -> ParseError {
        ParseError::Syntax { offset: self.span.start, expected, found: self.tok.describe() }
    }

    pub(super) fn parse_all(mut self) -> Result<Expr, ParseError> {
        let e = self.expr()?;
        if self.tok != Tok::End {
            return Err(self.unexpected(vec!["operator", "end of input"]));
        }
        Ok(e)
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump()?;
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump()?;
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.tok {
            Tok::Minus => {
                let (_, span) = self.bump()?;
                let inner = self.unary()?;
                let span = Span::new(span.start, inner.span.end);
                Ok(Expr { node: Node::Neg(Box::new(inner)), span })
            }
            Tok::Plus => {
                self.bump()?;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.tok == Tok::Caret {
            self.bump()?;
            let exponent = self.unary()?;
            return Ok(Expr::binary(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.tok.clone() {
            Tok::Num(x) => {
                let (_, span) = self.bump()?;
                Ok(Expr { node: Node::Num(x), span })
            }
            Tok::Ident(name) => {
                let (_, span) = self.bump()?;
                match Func::from_name(&name) {
                    Some(func) => {
                        if self.tok != Tok::LParen {
                            return Err(self.unexpected(vec!["`(`"]));
                        }
                        self.bump()?;
                        let arg = self.expr()?;
                        if self.tok != Tok::RParen {
                            return Err(self.unexpected(vec!["`)`", "operator"]));
                        }
                        let (_, close) = self.bump()?;
                        Ok(Expr { node: Node::Call(func, Box::new(arg)), span: Span::new(span.start, close.end) })
                    }
                    None if self.tok == Tok::LParen => Err(ParseError::UnknownFunction { name, offset: span.start }),
                    None => Ok(Expr { node: Node::Var(name), span }),
                }
            }
            Tok::LParen => {
                let (_, open) = self.bump()?;
                let mut inner = self.expr()?;
                if self.tok != Tok::RParen {
                    return Err(self.unexpected(vec!["`)`", "operator"]));
                }
                let (_, close) = self.bump()?;
                inner.span = Span::new(open.start, close.end);
                Ok(inner)
            }
            _ => Err(self.unexpected(vec!["number", "identifier", "`(`", "`-`"])),
        }
    }
}
