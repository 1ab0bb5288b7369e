//! Recursive-descent parser for drift expressions in the variable `x`.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?          exponent must not contain x
//! primary := number | 'x' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'
//! func    := sin | cos | exp | tanh
//! ```

use super::{BinOp, DriftError, Expr, Func};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

/// Functions commonly written in drift formulas that this language does not
/// provide. Reported as unsupported rather than unknown.
const KNOWN_UNSUPPORTED: &[&str] = &[
    "tan", "log", "ln", "sqrt", "abs", "sinh", "cosh", "atan", "asin", "acos", "min", "max",
    "pow", "sign", "floor", "ceil",
];

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokenize(src: &'a str) -> Result<Vec<(Tok, usize)>, DriftError> {
        let mut lx = Lexer { src: src.as_bytes(), pos: 0 };
        let mut out = Vec::new();
        loop {
            lx.skip_ws();
            let start = lx.pos;
            let Some(&c) = lx.src.get(lx.pos) else {
                out.push((Tok::End, start));
                return Ok(out);
            };
            let tok = match c {
                b'0'..=b'9' | b'.' => lx.number()?,
                b'a'..=b'z' | b'A'..=b'Z' | b'_' => lx.ident(),
                b'+' | b'-' | b'*' | b'/' | b'^' => {
                    lx.pos += 1;
                    Tok::Op(c as char)
                }
                b'(' => {
                    lx.pos += 1;
                    Tok::LParen
                }
                b')' => {
                    lx.pos += 1;
                    Tok::RParen
                }
                _ => {
                    let ch = src[start..].chars().next().unwrap_or('?');
                    return Err(DriftError::Syntax {
                        pos: start,
                        msg: format!("unexpected character `{ch}`"),
                    });
                }
            };
            out.push((tok, start));
        }
    }

    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn number(&mut self) -> Result<Tok, DriftError> {
        let start = self.pos;
        let digits = |lx: &mut Self| {
            while lx.src.get(lx.pos).is_some_and(u8::is_ascii_digit) {
                lx.pos += 1;
            }
        };
        digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            // Only treat `e` as an exponent marker when digits follow; `2e` alone
            // is a syntax error rather than `2 * e`.
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
                digits(self);
            } else {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
        text.parse::<f64>().map(Tok::Num).map_err(|_| DriftError::Syntax {
            pos: start,
            msg: format!("malformed number `{text}`"),
        })
    }

    fn ident(&mut self) -> Tok {
        let start = self.pos;
        while self
            .src
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_')
        {
            self.pos += 1;
        }
        Tok::Ident(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }
}

pub(super) struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    pub(super) fn parse(src: &str) -> Result<Expr, DriftError> {
        let toks = Lexer::tokenize(src)?;
        let mut p = Parser { toks, at: 0 };
        let e = p.expr()?;
        match p.peek() {
            Tok::End => Ok(e),
            t => Err(DriftError::Syntax {
                pos: p.pos(),
                msg: format!("unexpected {} after expression", describe(t)),
            }),
        }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), DriftError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(DriftError::Syntax {
                pos: self.pos(),
                msg: format!("expected {}, found {}", describe(&want), describe(self.peek())),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr, DriftError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, DriftError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, DriftError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, DriftError> {
        let base = self.primary()?;
        if *self.peek() != Tok::Op('^') {
            return Ok(base);
        }
        self.bump();
        let exp_pos = self.pos();
        let exponent = self.unary()?;
        match exponent.constant_value() {
            Some(p) if p.is_finite() => Ok(Expr::Pow(Box::new(base), p)),
            Some(_) => Err(DriftError::Syntax {
                pos: exp_pos,
                msg: "exponent is not a finite constant".into(),
            }),
            None => Err(DriftError::Syntax {
                pos: exp_pos,
                msg: "exponent must not depend on x".into(),
            }),
        }
    }

    fn primary(&mut self) -> Result<Expr, DriftError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    let func = match name.as_str() {
                        "sin" => Func::Sin,
                        "cos" => Func::Cos,
                        "exp" => Func::Exp,
                        "tanh" => Func::Tanh,
                        other if KNOWN_UNSUPPORTED.contains(&other) => {
                            return Err(DriftError::UnsupportedFunction { name, pos })
                        }
                        _ => return Err(DriftError::UnknownIdentifier { name, pos }),
                    };
                    self.bump();
                    let arg = self.expr()?;
                    self.expect(Tok::RParen)?;
                    return Ok(Expr::Func(func, Box::new(arg)));
                }
                match name.as_str() {
                    "x" => Ok(Expr::X),
                    "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                    "e" => Ok(Expr::Num(std::f64::consts::E)),
                    "sin" | "cos" | "exp" | "tanh" => Err(DriftError::Syntax {
                        pos: self.pos(),
                        msg: format!("expected `(` after `{name}`"),
                    }),
                    _ => Err(DriftError::UnknownIdentifier { name, pos }),
                }
            }
            t => Err(DriftError::Syntax { pos, msg: format!("unexpected {}", describe(&t)) }),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Op(c) => format!("`{c}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::End => "end of input".into(),
    }
}
