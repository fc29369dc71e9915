use super::{BinaryOp, DslError, Expr, ExprKind, SourceSpan, UnaryOp};

/// Function names accepted in call position.
pub const FUNCTIONS: [(&str, UnaryOp); 8] = [
    ("sin", UnaryOp::Sin),
    ("cos", UnaryOp::Cos),
    ("tan", UnaryOp::Tan),
    ("atan", UnaryOp::Atan),
    ("sqrt", UnaryOp::Sqrt),
    ("exp", UnaryOp::Exp),
    ("log", UnaryOp::Log),
    ("abs", UnaryOp::Abs),
];

const MAX_DEPTH: usize = 200;

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
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn perr(span: SourceSpan, message: impl Into<String>) -> DslError {
    DslError::Parse { span, message: message.into() }
}

fn lex(input: &str) -> Result<Vec<(Tok, SourceSpan)>, DslError> {
    let bytes = input.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let single = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            out.push((tok, SourceSpan::new(i, i + 1)));
            i += 1;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == b'.' {
            let mut j = i;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            let int_digits = j - i;
            let mut frac_digits = 0;
            if j < bytes.len() && bytes[j] == b'.' {
                j += 1;
                let f0 = j;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                frac_digits = j - f0;
            }
            if int_digits == 0 && frac_digits == 0 {
                return Err(perr(SourceSpan::new(i, j), "malformed number"));
            }
            if j < bytes.len() && (bytes[j] == b'e' || bytes[j] == b'E') {
                let mut k = j + 1;
                if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                    k += 1;
                }
                let e0 = k;
                while k < bytes.len() && bytes[k].is_ascii_digit() {
                    k += 1;
                }
                if k == e0 {
                    return Err(perr(SourceSpan::new(i, k), "malformed exponent in number"));
                }
                j = k;
            }
            // The slice is pure ASCII digits/./e/sign, so it is valid UTF-8 and parses.
            let text = &input[i..j];
            let value: f64 = text
                .parse()
                .map_err(|_| perr(SourceSpan::new(i, j), "malformed number"))?;
            out.push((Tok::Num(value), SourceSpan::new(i, j)));
            i = j;
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let mut j = i;
            while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                j += 1;
            }
            out.push((Tok::Ident(input[i..j].to_string()), SourceSpan::new(i, j)));
            i = j;
            continue;
        }
        // Report the whole (possibly multi-byte) character.
        let ch_len = input[start..].chars().next().map_or(1, char::len_utf8);
        return Err(perr(
            SourceSpan::new(start, start + ch_len),
            format!("unexpected character `{}`", &input[start..start + ch_len]),
        ));
    }
    out.push((Tok::Eof, SourceSpan::new(input.len(), input.len())));
    Ok(out)
}

struct Parser<'a, S> {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
    coords: &'a [S],
    depth: usize,
}

impl<'a, S: AsRef<str>> Parser<'a, S> {
    fn peek(&self) -> &(Tok, SourceSpan) {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> (Tok, SourceSpan) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn enter(&mut self, span: SourceSpan) -> Result<(), DslError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(perr(span, "expression nested too deeply"));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().0 {
                Tok::Plus => BinaryOp::Add,
                Tok::Minus => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().0 {
                Tok::Star => BinaryOp::Mul,
                Tok::Slash => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, DslError> {
        let span = self.peek().1;
        self.enter(span)?;
        let result = if self.peek().0 == Tok::Minus {
            self.bump();
            let operand = self.unary()?;
            Ok(Expr {
                span: span.join(operand.span),
                kind: ExprKind::Unary(UnaryOp::Neg, Box::new(operand)),
            })
        } else {
            self.power()
        };
        self.depth -= 1;
        result
    }

    // '^' is right-associative and binds tighter than a leading minus:
    // "-t^2" is -(t^2) and "a^b^c" is a^(b^c).
    fn power(&mut self) -> Result<Expr, DslError> {
        let base = self.atom()?;
        if self.peek().0 == Tok::Caret {
            self.bump();
            let exponent = self.unary()?;
            return Ok(binary(BinaryOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, DslError> {
        let (tok, span) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Expr { kind: ExprKind::Const(v), span }),
            Tok::LParen => {
                self.enter(span)?;
                let inner = self.expr()?;
                let close = self.expect_rparen(span)?;
                self.depth -= 1;
                Ok(Expr { kind: inner.kind, span: span.join(close) })
            }
            Tok::Ident(name) => {
                if let Some(index) = self.coords.iter().position(|c| c.as_ref() == name) {
                    return Ok(Expr { kind: ExprKind::Var { index, name: name.as_str().into() }, span });
                }
                if name == "pi" {
                    return Ok(Expr { kind: ExprKind::Const(std::f64::consts::PI), span });
                }
                if let Some((_, op)) = FUNCTIONS.iter().find(|(f, _)| *f == name) {
                    let (next, next_span) = self.bump();
                    if next != Tok::LParen {
                        return Err(perr(
                            next_span,
                            format!("expected `(` after function `{name}`, found {}", next.describe()),
                        ));
                    }
                    self.enter(next_span)?;
                    let arg = self.expr()?;
                    let close = self.expect_rparen(next_span)?;
                    self.depth -= 1;
                    return Ok(Expr { kind: ExprKind::Unary(*op, Box::new(arg)), span: span.join(close) });
                }
                Err(DslError::UnknownIdentifier { name, span })
            }
            Tok::Eof => Err(perr(span, "expected operand")),
            other => Err(perr(span, format!("expected operand, found {}", other.describe()))),
        }
    }

    fn expect_rparen(&mut self, open: SourceSpan) -> Result<SourceSpan, DslError> {
        let (tok, span) = self.bump();
        match tok {
            Tok::RParen => Ok(span),
            other => Err(perr(
                span,
                format!("expected `)` to close `(` at {}, found {}", open.start, other.describe()),
            )),
        }
    }
}

fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
    Expr { span: lhs.span.join(rhs.span), kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)) }
}

/// Parses `input` against the coordinate names `coords`.
///
/// Identifiers must be a coordinate, one of [`FUNCTIONS`] in call position, or
/// `pi`. There is no implicit multiplication.
pub fn parse<S: AsRef<str>>(input: &str, coords: &[S]) -> Result<Expr, DslError> {
    let toks = lex(input)?;
    let mut p = Parser { toks, pos: 0, coords, depth: 0 };
    let e = p.expr()?;
    let (tok, span) = p.peek().clone();
    if tok != Tok::Eof {
        return Err(perr(span, format!("expected operator or end of input, found {}", tok.describe())));
    }
    Ok(e)
}
