//! Polynomial expressions in `x` and `t` over `F_p`.
//!
//! Grammar (whitespace is ignored; `−` may be written as U+2212):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary ('*' unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' integer)?
//! atom   := integer | 'x' | 't' | '(' expr ')'
//! ```

use std::fmt;

use conddisc::corpus::Raw;
use conddisc::newton::ExactPoly;

/// Largest exponent accepted in either variable, to keep expansion bounded.
pub const MAX_DEGREE: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    /// 1-based character column.
    pub column: usize,
    pub message: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "syntax error at column {}: {}",
            self.column, self.message
        )
    }
}

impl std::error::Error for SyntaxError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    Syntax(SyntaxError),
    Poly(conddisc::Error),
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Syntax(e) => e.fmt(f),
            ParseError::Poly(e) => e.fmt(f),
        }
    }
}

impl std::error::Error for ParseError {}

impl From<SyntaxError> for ParseError {
    fn from(e: SyntaxError) -> Self {
        ParseError::Syntax(e)
    }
}

impl From<conddisc::Error> for ParseError {
    fn from(e: conddisc::Error) -> Self {
        ParseError::Poly(e)
    }
}

/// Dense bivariate polynomial mod `p`: `c[i][j]` is the coefficient of `x^i t^j`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Bi {
    c: Vec<Vec<u64>>,
}

impl Bi {
    fn zero() -> Bi {
        Bi { c: vec![] }
    }

    fn constant(v: u64) -> Bi {
        Bi { c: vec![vec![v]] }.trimmed()
    }

    fn monomial(i: usize, j: usize) -> Bi {
        let mut row = vec![0; j + 1];
        row[j] = 1;
        let mut c = vec![vec![]; i + 1];
        c[i] = row;
        Bi { c }
    }

    fn trimmed(mut self) -> Bi {
        for row in self.c.iter_mut() {
            while row.last() == Some(&0) {
                row.pop();
            }
        }
        while self.c.last().is_some_and(|r| r.is_empty()) {
            self.c.pop();
        }
        self
    }

    fn deg_x(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    fn deg_t(&self) -> usize {
        self.c
            .iter()
            .map(|r| r.len().saturating_sub(1))
            .max()
            .unwrap_or(0)
    }

    fn add(&self, o: &Bi, p: u64) -> Bi {
        let mut c = vec![vec![]; self.c.len().max(o.c.len())];
        for (i, row) in c.iter_mut().enumerate() {
            let a = self.c.get(i).map(|r| r.as_slice()).unwrap_or(&[]);
            let b = o.c.get(i).map(|r| r.as_slice()).unwrap_or(&[]);
            *row = (0..a.len().max(b.len()))
                .map(|j| (a.get(j).unwrap_or(&0) + b.get(j).unwrap_or(&0)) % p)
                .collect();
        }
        Bi { c }.trimmed()
    }

    fn neg(&self, p: u64) -> Bi {
        Bi {
            c: self
                .c
                .iter()
                .map(|r| r.iter().map(|&v| (p - v) % p).collect())
                .collect(),
        }
    }

    fn mul(&self, o: &Bi, p: u64) -> Bi {
        if self.c.is_empty() || o.c.is_empty() {
            return Bi::zero();
        }
        let mut c = vec![vec![0u64; self.deg_t() + o.deg_t() + 1]; self.c.len() + o.c.len() - 1];
        for (i, ra) in self.c.iter().enumerate() {
            for (j, &a) in ra.iter().enumerate() {
                if a == 0 {
                    continue;
                }
                for (k, rb) in o.c.iter().enumerate() {
                    for (l, &b) in rb.iter().enumerate() {
                        c[i + k][j + l] = (c[i + k][j + l] + a * b) % p;
                    }
                }
            }
        }
        Bi { c }.trimmed()
    }

    fn pow(&self, mut e: usize, p: u64) -> Bi {
        let mut acc = Bi::constant(1);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, p);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base, p);
            }
        }
        acc
    }
}

struct Parser<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    p: u64,
    _src: &'a str,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, p: u64) -> Self {
        let chars = src
            .chars()
            .enumerate()
            .filter(|(_, c)| !c.is_whitespace())
            .map(|(i, c)| (i + 1, if c == '\u{2212}' { '-' } else { c }))
            .collect();
        Parser {
            chars,
            pos: 0,
            p,
            _src: src,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn column(&self) -> usize {
        match self.chars.get(self.pos) {
            Some(&(i, _)) => i,
            None => self.chars.last().map_or(1, |&(i, _)| i + 1),
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, SyntaxError> {
        Err(SyntaxError {
            column: self.column(),
            message: msg.into(),
        })
    }

    fn check_size(&self, b: &Bi, column: usize) -> Result<(), SyntaxError> {
        if b.deg_x() > MAX_DEGREE || b.deg_t() > MAX_DEGREE {
            return Err(SyntaxError {
                column,
                message: format!("expansion exceeds degree {} in x or t", MAX_DEGREE),
            });
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Bi, SyntaxError> {
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                '+' => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?, self.p);
                }
                '-' => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?.neg(self.p), self.p);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Bi, SyntaxError> {
        let mut acc = self.unary()?;
        while self.peek() == Some('*') {
            self.pos += 1;
            let col = self.column();
            acc = acc.mul(&self.unary()?, self.p);
            self.check_size(&acc, col)?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Bi, SyntaxError> {
        if self.peek() == Some('-') {
            self.pos += 1;
            return Ok(self.unary()?.neg(self.p));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Bi, SyntaxError> {
        let base = self.atom()?;
        if self.peek() != Some('^') {
            return Ok(base);
        }
        self.pos += 1;
        let col = self.column();
        if !self.peek().is_some_and(|c| c.is_ascii_digit()) {
            return self.err("expected a non-negative integer exponent after '^'");
        }
        let mut e: usize = 0;
        while let Some(d) = self.peek().and_then(|c| c.to_digit(10)) {
            e = e.saturating_mul(10).saturating_add(d as usize);
            self.pos += 1;
        }
        let grows = base.deg_x().max(base.deg_t());
        if grows > 0 && e.saturating_mul(grows) > MAX_DEGREE {
            return Err(SyntaxError {
                column: col,
                message: format!("expansion exceeds degree {} in x or t", MAX_DEGREE),
            });
        }
        if self.peek() == Some('^') {
            return self.err("chained exponents are ambiguous; use parentheses");
        }
        Ok(base.pow(e, self.p))
    }

    fn atom(&mut self) -> Result<Bi, SyntaxError> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let mut v: u64 = 0;
                while let Some(d) = self.peek().and_then(|c| c.to_digit(10)) {
                    v = (v * 10 + d as u64) % self.p;
                    self.pos += 1;
                }
                if self
                    .peek()
                    .is_some_and(|c| c == 'x' || c == 't' || c == '(')
                {
                    return self.err("missing '*' between factors");
                }
                Ok(Bi::constant(v))
            }
            Some('x') => {
                self.pos += 1;
                self.no_juxtaposition()?;
                Ok(Bi::monomial(1, 0))
            }
            Some('t') => {
                self.pos += 1;
                self.no_juxtaposition()?;
                Ok(Bi::monomial(0, 1))
            }
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(')') {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                self.no_juxtaposition()?;
                Ok(e)
            }
            Some(')') => self.err("unexpected ')'"),
            Some(c) => self.err(format!("unexpected character '{}'", c)),
            None => self.err("unexpected end of input"),
        }
    }

    fn no_juxtaposition(&self) -> Result<(), SyntaxError> {
        match self.peek() {
            Some(c) if c == 'x' || c == 't' || c == '(' || c.is_ascii_digit() => {
                self.err("missing '*' between factors")
            }
            _ => Ok(()),
        }
    }
}

/// Expands an expression into raw coefficients `raw[i][j]` of `x^i t^j`, reduced mod `p`.
pub fn expand(src: &str, p: u64) -> Result<Raw, ParseError> {
    // validates p before any modular arithmetic happens
    ExactPoly::parse_and_normalize(p, &[vec![0], vec![1]])?;
    let mut parser = Parser::new(src, p);
    if parser.peek().is_none() {
        return Err(SyntaxError {
            column: 1,
            message: "empty expression".into(),
        }
        .into());
    }
    let b = parser.expr()?;
    if parser.peek().is_some() {
        return Err(parser
            .err::<()>(format!("unexpected '{}'", parser.peek().unwrap()))
            .unwrap_err()
            .into());
    }
    Ok(b.c
        .into_iter()
        .map(|r| r.into_iter().map(|v| v as i64).collect())
        .collect())
}

/// Parses, expands and normalizes an expression over `F_p`.
pub fn parse_expression(src: &str, p: u64) -> Result<ExactPoly, ParseError> {
    let raw = expand(src, p)?;
    Ok(ExactPoly::parse_and_normalize(p, &raw)?)
}

/// Renders raw coefficients as an expanded expression (`x` powers descending).
pub fn format_raw(raw: &Raw) -> String {
    let mut terms: Vec<(bool, String)> = vec![];
    for (i, row) in raw.iter().enumerate().rev() {
        for (j, &c) in row.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let mut factors = vec![];
            let a = c.unsigned_abs();
            if a != 1 || (i == 0 && j == 0) {
                factors.push(a.to_string());
            }
            match i {
                0 => {}
                1 => factors.push("x".into()),
                _ => factors.push(format!("x^{}", i)),
            }
            match j {
                0 => {}
                1 => factors.push("t".into()),
                _ => factors.push(format!("t^{}", j)),
            }
            terms.push((c < 0, factors.join("*")));
        }
    }
    if terms.is_empty() {
        return "0".into();
    }
    let mut s = String::new();
    for (k, (neg, body)) in terms.into_iter().enumerate() {
        match (k, neg) {
            (0, true) => s.push('-'),
            (0, false) => {}
            (_, true) => s.push_str(" - "),
            (_, false) => s.push_str(" + "),
        }
        s.push_str(&body);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expands_products() {
        // (x − 1)(x² − t) = x³ − x² − t x + t
        let raw = expand("(x-1)*(x^2-t)", 101).unwrap();
        assert_eq!(raw, vec![vec![0, 1], vec![0, 100], vec![100], vec![1]]);
        assert_eq!(format_raw(&raw), "x^3 + 100*x^2 + 100*x*t + t");
    }

    #[test]
    fn reduces_mod_p_and_handles_unary_minus() {
        assert_eq!(
            expand("-x^2 + 14", 13).unwrap(),
            vec![vec![1], vec![], vec![12]]
        );
        assert_eq!(expand("−(t) − −x", 7).unwrap(), vec![vec![0, 6], vec![1]]);
        assert_eq!(expand("x*0", 7).unwrap(), Vec::<Vec<i64>>::new());
    }

    #[test]
    fn reports_positions() {
        let e = |s: &str| match expand(s, 101) {
            Err(ParseError::Syntax(e)) => e.column,
            other => panic!("expected a syntax error for {s:?}, got {other:?}"),
        };
        assert_eq!(e("x^"), 3);
        assert_eq!(e("x + y"), 5);
        assert_eq!(e("(x - 1"), 7);
        assert_eq!(e("2x"), 2);
        assert_eq!(e("x^2^3"), 4);
        assert_eq!(e(""), 1);
        assert_eq!(e("x^100000"), 3);
    }

    #[test]
    fn normalization_errors_surface() {
        assert!(matches!(
            parse_expression("x^2", 101),
            Err(ParseError::Poly(conddisc::Error::NotSquarefree(_)))
        ));
        assert!(matches!(
            parse_expression("x^6 - t", 5),
            Err(ParseError::Poly(conddisc::Error::WildCharacteristic { .. }))
        ));
        assert!(matches!(
            parse_expression("x - t", 9),
            Err(ParseError::Poly(conddisc::Error::InvalidPrime(9)))
        ));
        assert_eq!(parse_expression("x^6 - t", 101).unwrap().degree(), 6);
    }
}
