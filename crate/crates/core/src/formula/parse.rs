use num_bigint::BigInt;
use num_traits::Zero;

use super::Formula;
use crate::error::{Error, Result};
use crate::scalar::{format_rational, in_unit, Rational, Scalar, ScalarRegistry};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Var(usize),
    Int(BigInt),
    Name(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Slash,
    Arrow,
    DoubleArrow,
    Plus,
    Dot,
    Vee,
    Wedge,
    Tilde,
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax { line, column, message: message.into() }
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut column) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, column);
        let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line: start_line, column: start_col });
        if c == '\n' {
            i += 1;
            line += 1;
            column = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            column += 1;
            continue;
        }
        let peek = chars.get(i + 1).copied();
        let (tok, len) = match c {
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '[' => (Tok::LBracket, 1),
            ']' => (Tok::RBracket, 1),
            ',' => (Tok::Comma, 1),
            '+' => (Tok::Plus, 1),
            '.' => (Tok::Dot, 1),
            '~' => (Tok::Tilde, 1),
            '-' if peek == Some('>') => (Tok::Arrow, 2),
            '<' if peek == Some('-') && chars.get(i + 2) == Some(&'>') => (Tok::DoubleArrow, 3),
            '\\' if peek == Some('/') => (Tok::Vee, 2),
            '/' if peek == Some('\\') => (Tok::Wedge, 2),
            '/' => (Tok::Slash, 1),
            d if d.is_ascii_digit() => {
                let len = chars[i..].iter().take_while(|c| c.is_ascii_digit()).count();
                let digits: String = chars[i..i + len].iter().collect();
                (Tok::Int(digits.parse().expect("ascii digits parse")), len)
            }
            a if a.is_ascii_alphabetic() || a == '_' => {
                let len = chars[i..].iter().take_while(|c| c.is_ascii_alphanumeric() || **c == '_').count();
                let word: String = chars[i..i + len].iter().collect();
                let tok = match word.strip_prefix('v') {
                    Some(idx) if !idx.is_empty() && idx.chars().all(|c| c.is_ascii_digit()) => {
                        let n: usize = idx
                            .parse()
                            .map_err(|_| syntax(line, column, format!("variable index `{idx}` too large")))?;
                        if n == 0 {
                            return Err(syntax(line, column, "variable indices start at 1"));
                        }
                        Tok::Var(n)
                    }
                    _ => Tok::Name(word),
                };
                (tok, len)
            }
            other => return Err(syntax(line, column, format!("unexpected character `{other}`"))),
        };
        push(&mut out, tok);
        i += len;
        column += len;
    }
    out.push(Token { tok: Tok::End, line, column });
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    registry: &'a ScalarRegistry,
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn err_here(&self, message: impl Into<String>) -> Error {
        let t = self.peek();
        syntax(t.line, t.column, message)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek().tok == tok {
            self.next();
            Ok(())
        } else {
            Err(self.err_here(format!("expected {what}")))
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        let lhs = self.oplus()?;
        match self.peek().tok {
            Tok::Arrow => {
                self.next();
                Ok(Formula::imp(lhs, self.formula()?))
            }
            Tok::DoubleArrow => {
                self.next();
                Ok(Formula::equiv(lhs, self.formula()?))
            }
            _ => Ok(lhs),
        }
    }

    fn oplus(&mut self) -> Result<Formula> {
        let mut acc = self.unary()?;
        loop {
            let build: fn(Formula, Formula) -> Formula = match self.peek().tok {
                Tok::Plus => Formula::oplus,
                Tok::Dot => Formula::odot,
                Tok::Vee => Formula::vee,
                Tok::Wedge => Formula::wedge,
                _ => return Ok(acc),
            };
            self.next();
            acc = build(acc, self.unary()?);
        }
    }

    fn unary(&mut self) -> Result<Formula> {
        match &self.peek().tok {
            Tok::Tilde => {
                self.next();
                Ok(Formula::neg(self.unary()?))
            }
            Tok::Name(w) if w == "nabla" || w == "delta" => {
                let is_nabla = w == "nabla";
                self.next();
                let r = self.bracketed_scalar()?;
                let body = self.unary()?;
                Ok(if is_nabla { Formula::nabla(r, body) } else { Formula::delta(r, body) })
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula> {
        let t = self.next();
        match t.tok {
            Tok::Var(i) => Ok(Formula::Var(i)),
            Tok::Int(n) if n == BigInt::from(1) => Ok(Formula::One),
            Tok::Int(n) if n.is_zero() => Ok(Formula::zero()),
            Tok::Name(w) if w == "eta" => Ok(Formula::eta(self.bracketed_scalar()?)),
            Tok::Name(w) if w == "d" && self.peek().tok == Tok::LParen => {
                self.next();
                let a = self.formula()?;
                self.expect(Tok::Comma, "`,`")?;
                let b = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Formula::chang_dist(a, b))
            }
            Tok::LParen => {
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::End => Err(syntax(t.line, t.column, "unexpected end of input")),
            other => Err(syntax(t.line, t.column, format!("unexpected token {other:?}"))),
        }
    }

    fn bracketed_scalar(&mut self) -> Result<Scalar> {
        self.expect(Tok::LBracket, "`[`")?;
        let start = self.peek().clone();
        let value = match self.next().tok {
            Tok::Int(p) => {
                let q = if self.peek().tok == Tok::Slash {
                    self.next();
                    match self.next().tok {
                        Tok::Int(q) if !q.is_zero() => q,
                        _ => return Err(syntax(start.line, start.column, "expected nonzero denominator")),
                    }
                } else {
                    BigInt::from(1)
                };
                let r = Rational::new(p, q);
                if !in_unit(&r) {
                    return Err(Error::ScalarRange(format_rational(&r)));
                }
                Scalar::Rational(r)
            }
            Tok::Name(name) => self
                .registry
                .get(&name)
                .cloned()
                .ok_or(Error::UnknownScalar(name))?,
            _ => return Err(syntax(start.line, start.column, "expected a scalar")),
        };
        self.expect(Tok::RBracket, "`]`")?;
        Ok(value)
    }
}

/// Parses with the default scalar registry (which knows `sqrt2_over_2`).
pub fn parse(text: &str) -> Result<Formula> {
    parse_with(text, &ScalarRegistry::with_defaults())
}

pub fn parse_with(text: &str, registry: &ScalarRegistry) -> Result<Formula> {
    let mut p = Parser { toks: lex(text)?, pos: 0, registry };
    let f = p.formula()?;
    if p.peek().tok != Tok::End {
        return Err(p.err_here("trailing input"));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, CReal};

    #[test]
    fn grammar_examples() {
        assert_eq!(parse("~v1").unwrap(), Formula::neg(Formula::var(1)));
        assert_eq!(
            parse("nabla[1/2](v1 -> v2)").unwrap(),
            Formula::nabla(Scalar::Rational(rat(1, 2)), Formula::imp(Formula::var(1), Formula::var(2)))
        );
        assert_eq!(parse("eta[2/3]").unwrap(), Formula::delta(Scalar::Rational(rat(2, 3)), Formula::One));
        assert_eq!(parse("0").unwrap(), Formula::neg(Formula::One));
    }

    #[test]
    fn left_associative_binary_level() {
        let f = parse("v1 + v2 . v3").unwrap();
        assert_eq!(f, Formula::odot(Formula::oplus(Formula::var(1), Formula::var(2)), Formula::var(3)));
        let g = parse("v1 -> v2 -> v3").unwrap();
        assert_eq!(g, Formula::imp(Formula::var(1), Formula::imp(Formula::var(2), Formula::var(3))));
    }

    #[test]
    fn named_scalars() {
        let f = parse("delta[sqrt2_over_2] v1").unwrap();
        assert_eq!(f, Formula::delta(Scalar::Real(CReal::sqrt2_over_2()), Formula::var(1)));
        assert_eq!(parse("delta[nope] v1"), Err(Error::UnknownScalar("nope".into())));
    }

    #[test]
    fn errors_carry_positions() {
        match parse("v1 +\n  ?") {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 3)),
            other => panic!("unexpected {other:?}"),
        }
        match parse("(v1") {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (1, 4)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("nabla[3/2] v1"), Err(Error::ScalarRange(_))));
        assert!(matches!(parse("v0"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("v1 v2"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("2"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn chang_distance_and_equivalence() {
        let f = parse("d(v1, ~v1) <-> eta[1]").unwrap();
        assert_eq!(
            f,
            Formula::equiv(
                Formula::chang_dist(Formula::var(1), Formula::neg(Formula::var(1))),
                Formula::eta(Scalar::Rational(rat(1, 1)))
            )
        );
        assert_eq!(parse(&f.to_string()).unwrap(), f);
    }
}
