//! Truncated Puiseux series `Σ c_k t^{k/e}` with an explicit precision bound.
//!
//! Terms are stored sparsely; products, inverses and compositions go through
//! dense truncated kernels. Every operation computes the exact precision its
//! result is guaranteed to, so a truncated value never claims more than it
//! knows.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};

use crate::error::{precision, Error, Result};
use crate::field::{Coords, ExtField, FieldElem, FieldTower};

pub type Q = Ratio<i64>;

/// A series in `t^{1/e}`.
///
/// `prec == None` means the series is exact (a finite sum); otherwise every
/// coefficient of `t^{k/e}` with `k < prec` is known and none beyond.
#[derive(Clone)]
pub struct PuiseuxSeries {
    field: Arc<ExtField>,
    e: i64,
    terms: Vec<(i64, Coords)>,
    prec: Option<i64>,
}

fn lcm(a: i64, b: i64) -> i64 {
    a.lcm(&b)
}

impl PuiseuxSeries {
    /// Builds and normalizes a series; zero coefficients and terms at or above `prec` are dropped.
    pub fn from_terms(
        field: Arc<ExtField>,
        e: i64,
        mut terms: Vec<(i64, Coords)>,
        prec: Option<i64>,
    ) -> Self {
        assert!(e >= 1, "ramification index must be positive");
        terms.sort_by_key(|(k, _)| *k);
        // merge duplicates
        let mut merged: Vec<(i64, Coords)> = Vec::with_capacity(terms.len());
        for (k, c) in terms {
            match merged.last_mut() {
                Some((k0, c0)) if *k0 == k => *c0 = field.add(c0, &c),
                _ => merged.push((k, c)),
            }
        }
        merged.retain(|(k, c)| !field.is_zero(c) && prec.is_none_or(|p| *k < p));
        let mut s = PuiseuxSeries {
            field,
            e,
            terms: merged,
            prec,
        };
        s.reduce_lattice();
        s
    }

    fn reduce_lattice(&mut self) {
        let mut g = self.e;
        for (k, _) in &self.terms {
            g = g.gcd(k);
        }
        if let Some(p) = self.prec {
            g = g.gcd(&p);
        }
        if g > 1 {
            self.e /= g;
            for (k, _) in self.terms.iter_mut() {
                *k /= g;
            }
            if let Some(p) = self.prec.as_mut() {
                *p /= g;
            }
        }
    }

    pub fn zero(field: Arc<ExtField>) -> Self {
        PuiseuxSeries {
            field,
            e: 1,
            terms: vec![],
            prec: None,
        }
    }

    /// The zero series known only up to `t^prec`.
    pub fn big_o(field: Arc<ExtField>, prec: Q) -> Self {
        let e = *prec.denom();
        Self::from_terms(field, e, vec![], Some(*prec.numer()))
    }

    pub fn constant(c: &FieldElem) -> Self {
        Self::from_terms(c.field().clone(), 1, vec![(0, c.coords().clone())], None)
    }

    pub fn one(field: Arc<ExtField>) -> Self {
        let c = field.one();
        Self::from_terms(field, 1, vec![(0, c)], None)
    }

    /// `c · t^q`, exact.
    pub fn monomial(c: &FieldElem, q: Q) -> Self {
        Self::from_terms(
            c.field().clone(),
            *q.denom(),
            vec![(*q.numer(), c.coords().clone())],
            None,
        )
    }

    /// The series `t`.
    pub fn t(field: Arc<ExtField>) -> Self {
        let c = field.one();
        Self::from_terms(field, 1, vec![(1, c)], None)
    }

    pub fn field(&self) -> &Arc<ExtField> {
        &self.field
    }

    /// Ramification index: the exponents live in `(1/e)Z`, with `e` minimal.
    pub fn e(&self) -> i64 {
        self.e
    }

    pub fn is_exact(&self) -> bool {
        self.prec.is_none()
    }

    /// Precision bound as a rational exponent; `None` for exact series.
    pub fn precision(&self) -> Option<Q> {
        self.prec.map(|p| Q::new(p, self.e))
    }

    /// Stored terms as `(exponent, coefficient)` pairs in increasing order.
    pub fn terms(&self) -> Vec<(Q, FieldElem)> {
        self.terms
            .iter()
            .map(|(k, c)| {
                (
                    Q::new(*k, self.e),
                    FieldElem::new(self.field.clone(), c.clone()),
                )
            })
            .collect()
    }

    pub(crate) fn raw_terms(&self) -> &[(i64, Coords)] {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when the series is exactly zero (not merely zero up to its precision).
    pub fn is_exact_zero(&self) -> bool {
        self.terms.is_empty() && self.prec.is_none()
    }

    /// Least exponent with a nonzero coefficient; `None` (the ∞ sentinel) if
    /// there is none below the precision bound.
    pub fn valuation(&self) -> Option<Q> {
        self.terms.first().map(|(k, _)| Q::new(*k, self.e))
    }

    /// Like [`valuation`](Self::valuation) but refuses to guess: a series that is
    /// zero only up to its precision is an error; an exact zero is `Ok(None)`.
    pub fn certified_valuation(&self) -> Result<Option<Q>> {
        match (self.valuation(), self.prec) {
            (Some(v), _) => Ok(Some(v)),
            (None, None) => Ok(None),
            (None, Some(p)) => Err(precision(format!(
                "series vanishes up to t^{}",
                Q::new(p, self.e)
            ))),
        }
    }

    pub fn leading(&self) -> Option<(Q, FieldElem)> {
        self.terms.first().map(|(k, c)| {
            (
                Q::new(*k, self.e),
                FieldElem::new(self.field.clone(), c.clone()),
            )
        })
    }

    /// Coefficient of `t^q` (zero if absent). Errors if `q` is at or beyond the precision.
    pub fn coeff(&self, q: Q) -> Result<FieldElem> {
        if let Some(p) = self.precision() {
            if q >= p {
                return Err(precision(format!(
                    "coefficient of t^{} beyond O(t^{})",
                    q, p
                )));
            }
        }
        let zero = FieldElem::new(self.field.clone(), self.field.zero());
        if (q * self.e).denom() != &1 {
            return Ok(zero);
        }
        let k = (q * self.e).to_integer();
        Ok(self
            .terms
            .binary_search_by_key(&k, |(j, _)| *j)
            .map(|i| FieldElem::new(self.field.clone(), self.terms[i].1.clone()))
            .unwrap_or(zero))
    }

    /// Constant term (zero when the valuation is positive).
    pub fn constant_term(&self) -> FieldElem {
        self.coeff(Q::zero())
            .unwrap_or_else(|_| FieldElem::new(self.field.clone(), self.field.zero()))
    }

    /// Moves the coefficients into a larger field of the same tower.
    pub fn embed(&self, target: &Arc<ExtField>) -> Self {
        if Arc::ptr_eq(&self.field, target) {
            return self.clone();
        }
        PuiseuxSeries {
            field: target.clone(),
            e: self.e,
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (*k, self.field.embed_into(c, target)))
                .collect(),
            prec: self.prec,
        }
    }

    /// Rewrites on the lattice `(1/e2)Z`; `e2` must be a multiple of `e`.
    /// The result is deliberately not re-normalized.
    fn on_lattice(&self, e2: i64) -> (Vec<(i64, Coords)>, Option<i64>) {
        debug_assert_eq!(e2 % self.e, 0);
        let m = e2 / self.e;
        (
            self.terms.iter().map(|(k, c)| (k * m, c.clone())).collect(),
            self.prec.map(|p| p * m),
        )
    }

    fn common(&self, other: &Self) -> (Arc<ExtField>, i64) {
        let k = if self.field.index() >= other.field.index() {
            self.field.clone()
        } else {
            other.field.clone()
        };
        (k, lcm(self.e, other.e))
    }

    /// Drops everything at or beyond `t^q`.
    pub fn truncate(&self, q: Q) -> Self {
        let e2 = lcm(self.e, *q.denom());
        let (terms, prec) = self.on_lattice(e2);
        let cut = (q * e2).to_integer();
        let p = prec.map_or(cut, |p| p.min(cut));
        Self::from_terms(self.field.clone(), e2, terms, Some(p))
    }

    pub fn neg(&self) -> Self {
        PuiseuxSeries {
            field: self.field.clone(),
            e: self.e,
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (*k, self.field.neg(c)))
                .collect(),
            prec: self.prec,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let (k, e) = self.common(other);
        let a = self.embed(&k);
        let b = other.embed(&k);
        let (mut ta, pa) = a.on_lattice(e);
        let (tb, pb) = b.on_lattice(e);
        ta.extend(tb);
        let prec = match (pa, pb) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, None) => x,
            (None, y) => y,
        };
        Self::from_terms(k, e, ta, prec)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Multiplication by a field constant.
    pub fn scale(&self, c: &FieldElem) -> Self {
        let k = if self.field.index() >= c.field().index() {
            self.field.clone()
        } else {
            c.field().clone()
        };
        let a = self.embed(&k);
        let cc = c.embed(&k);
        let terms = a
            .terms
            .iter()
            .map(|(j, x)| (*j, k.mul(x, cc.coords())))
            .collect();
        if c.is_zero() {
            return match self.prec {
                None => Self::zero(k),
                Some(_) => Self::from_terms(k, a.e, vec![], a.prec),
            };
        }
        Self::from_terms(k, a.e, terms, a.prec)
    }

    /// Multiplication by `t^q`.
    pub fn shift(&self, q: Q) -> Self {
        let e2 = lcm(self.e, *q.denom());
        let (terms, prec) = self.on_lattice(e2);
        let s = (q * e2).to_integer();
        Self::from_terms(
            self.field.clone(),
            e2,
            terms.into_iter().map(|(k, c)| (k + s, c)).collect(),
            prec.map(|p| p + s),
        )
    }

    /// Effective valuation in lattice units used by the precision rules:
    /// the first stored exponent, else the precision bound, else `None` for an exact zero.
    fn v_eff(terms: &[(i64, Coords)], prec: Option<i64>) -> Option<i64> {
        terms.first().map(|(k, _)| *k).or(prec)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (k, e) = self.common(other);
        let a = self.embed(&k);
        let b = other.embed(&k);
        let (ta, pa) = a.on_lattice(e);
        let (tb, pb) = b.on_lattice(e);
        let va = Self::v_eff(&ta, pa);
        let vb = Self::v_eff(&tb, pb);
        if va.is_none() || vb.is_none() {
            return Self::zero(k);
        }
        let (va, vb) = (va.unwrap(), vb.unwrap());
        let mut prec: Option<i64> = None;
        if let Some(p) = pa {
            prec = Some(p + vb);
        }
        if let Some(p) = pb {
            let q = p + va;
            prec = Some(prec.map_or(q, |x| x.min(q)));
        }
        if ta.is_empty() || tb.is_empty() {
            return Self::from_terms(k, e, vec![], prec);
        }
        let lo = va + vb;
        let hi = match prec {
            Some(p) => p,
            None => ta.last().unwrap().0 + tb.last().unwrap().0 + 1,
        };
        if hi <= lo {
            return Self::from_terms(k, e, vec![], prec);
        }
        let len = (hi - lo) as usize;
        // sparse x sparse into a dense window; supports are usually short
        let p = k.p() as u64;
        let d = k.degree();
        let mut acc: Vec<Vec<u64>> = vec![vec![]; len];
        for (i, x) in &ta {
            for (j, y) in &tb {
                let idx = i + j - lo;
                if idx < 0 || idx as usize >= len {
                    continue;
                }
                let prod = k.mul(x, y);
                let slot = &mut acc[idx as usize];
                if slot.is_empty() {
                    slot.resize(d, 0);
                }
                for (s, v) in slot.iter_mut().zip(prod.iter()) {
                    *s = (*s + *v as u64) % p;
                }
            }
        }
        let terms = acc
            .into_iter()
            .enumerate()
            .filter(|(_, s)| !s.is_empty())
            .map(|(i, s)| (i as i64 + lo, s.into_iter().map(|x| x as u32).collect()))
            .collect();
        Self::from_terms(k, e, terms, prec)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut r = Self::one(self.field.clone());
        let mut b = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                r = r.mul(&b);
            }
            n >>= 1;
            if n > 0 {
                b = b.mul(&b);
            }
        }
        r
    }

    /// Inverse of a series with valuation 0.
    pub fn unit_inverse(&self) -> Result<Self> {
        match self.valuation() {
            Some(v) if v.is_zero() => {}
            _ => return Err(Error::NotAUnit),
        }
        self.inverse(None)
    }

    /// Inverse of any nonzero series. Exact non-monomial inputs need `max_prec`.
    pub fn inverse(&self, max_prec: Option<Q>) -> Result<Self> {
        let v = self.certified_valuation()?.ok_or(Error::NotAUnit)?;
        let k = self.field.clone();
        let (_, c) = self.leading().unwrap();
        let cinv = c.inv().unwrap();
        // u = self / (c t^v), a unit with constant term 1
        let u = self.shift(-v).scale(&cinv);
        let target = match (u.precision(), max_prec) {
            (Some(p), Some(m)) => Some(p.min(m + v)),
            (Some(p), None) => Some(p),
            (None, Some(m)) => Some(m + v),
            (None, None) => None,
        };
        let out = match target {
            None => {
                if u.terms.len() == 1 {
                    Self::one(k.clone())
                } else {
                    return Err(Error::InvalidInput(
                        "inverse of an exact non-monomial series needs a precision bound".into(),
                    ));
                }
            }
            Some(p) => {
                let e = lcm(u.e, *p.denom());
                let n = (p * e).ceil().to_integer().max(0) as usize;
                let dense = u.to_dense(e, n);
                let inv = dense::inverse(&k, &dense);
                Self::from_dense(k.clone(), e, 0, inv, Some(n as i64))
            }
        };
        Ok(out.scale(&cinv).shift(-v))
    }

    /// Coefficients of `t^{i/e}` for `0 <= i < n` (the lattice must refine ours).
    pub(crate) fn to_dense(&self, e: i64, n: usize) -> Vec<Coords> {
        debug_assert_eq!(e % self.e, 0);
        let m = e / self.e;
        let mut out = vec![self.field.zero(); n];
        for (k, c) in &self.terms {
            let i = k * m;
            if i >= 0 && (i as usize) < n {
                out[i as usize] = c.clone();
            }
        }
        out
    }

    pub(crate) fn from_dense(
        field: Arc<ExtField>,
        e: i64,
        offset: i64,
        dense: Vec<Coords>,
        prec: Option<i64>,
    ) -> Self {
        let terms = dense
            .into_iter()
            .enumerate()
            .map(|(i, c)| (i as i64 + offset, c))
            .collect();
        Self::from_terms(field, e, terms, prec)
    }

    /// `t^{1/e} -> c · t^{1/e}`: the coefficient of `t^{k/e}` is multiplied by `c^k`.
    pub fn scale_uniformizer(&self, c: &FieldElem) -> Self {
        let k = if self.field.index() >= c.field().index() {
            self.field.clone()
        } else {
            c.field().clone()
        };
        let a = self.embed(&k);
        let cc = c.embed(&k);
        let cinv = cc.inv().expect("uniformizer scaled by zero");
        let terms = a
            .terms
            .iter()
            .map(|(j, x)| {
                let f = if *j >= 0 {
                    cc.pow(*j as u64)
                } else {
                    cinv.pow((-*j) as u64)
                };
                (*j, k.mul(x, f.coords()))
            })
            .collect();
        Self::from_terms(k, a.e, terms, a.prec)
    }

    /// The Galois conjugate under `t^{1/n} -> ζ t^{1/n}`; `e` must divide `n`.
    pub fn twist(&self, zeta: &FieldElem, n: i64) -> Self {
        assert_eq!(n % self.e, 0, "twist order must be a multiple of e");
        let m = n / self.e;
        self.scale_uniformizer(&zeta.pow(m as u64))
    }

    /// `g(t) -> g(t^q)` for rational `q > 0`.
    pub fn rescale_variable(&self, q: Q) -> Self {
        assert!(q.is_positive());
        // exponent k/e -> k q / e = (k * num) / (e * den)
        let num = *q.numer();
        let den = *q.denom();
        Self::from_terms(
            self.field.clone(),
            self.e * den,
            self.terms
                .iter()
                .map(|(k, c)| (k * num, c.clone()))
                .collect(),
            self.prec.map(|p| p * num),
        )
    }

    /// Composition `g(s)` for `ν(s) > 0`.
    ///
    /// A ramified `g` (in `t^{1/e}`) is evaluated at the designated `e`-th root of `s`.
    pub fn substitute(&self, s: &Self, tower: &FieldTower) -> Result<Self> {
        let vs = match s.valuation() {
            Some(v) if v.is_positive() => v,
            Some(v) => return Err(Error::DivergentSubstitution(v.to_string())),
            None => {
                return Err(Error::DivergentSubstitution(
                    "argument with unknown valuation".into(),
                ))
            }
        };
        if self.terms.first().is_some_and(|(k, _)| *k < 0) {
            return Err(Error::InvalidInput(
                "substitution into a series with negative exponents".into(),
            ));
        }
        let r = if self.e == 1 {
            s.clone()
        } else {
            s.nth_root(self.e as u64, None, tower, self.precision().map(|p| p * vs))?
        };
        let (k, _) = self.common(s);
        let g = self.embed(&k);
        let r = r.embed(&k);
        let mut acc = match g.prec {
            // the unknown tail t^{P} becomes O(r^{P e}) = O(t^{P ν(s)})
            Some(p) => Self::big_o(k.clone(), Q::new(p, g.e) * vs),
            None => Self::zero(k.clone()),
        };
        // Horner over the stored exponents
        let mut power = Self::one(k.clone());
        let mut last = 0i64;
        for (j, c) in &g.terms {
            let step = (*j - last) as u32;
            if step > 0 {
                power = power.mul(&r.pow(step));
            }
            last = *j;
            let term = power.scale(&FieldElem::new(k.clone(), c.clone()));
            acc = acc.add(&term);
            if let Some(p) = acc.prec {
                if power.valuation().is_some_and(|v| v >= Q::new(p, acc.e)) {
                    break;
                }
            }
        }
        Ok(acc)
    }

    /// The compositional inverse `τ` of `σ = c t + …`, with `σ(τ(t)) = t = τ(σ(t))`.
    ///
    /// `σ` must have valuation 1 in the integral lattice. The result is known up
    /// to `t^min(prec σ, max_prec)`.
    pub fn functional_inverse(&self, max_prec: i64) -> Result<Self> {
        match self.valuation() {
            Some(v) if v == Q::from_integer(1) => {}
            v => {
                return Err(Error::NotInvertible(
                    v.map_or("infinity".to_string(), |v| v.to_string()),
                ))
            }
        }
        if self.e != 1 {
            return Err(Error::NotInvertible(format!(
                "series ramified with e = {}",
                self.e
            )));
        }
        let k = self.field.clone();
        let (_, c) = self.leading().unwrap();
        let cinv = c.inv().unwrap();
        let n = match self.prec {
            None if self.terms.len() == 1 => {
                return Ok(Self::monomial(&cinv, Q::from_integer(1)));
            }
            None => max_prec,
            Some(p) => p.min(max_prec),
        };
        if n <= 1 {
            return Ok(Self::from_terms(k, 1, vec![], Some(n)));
        }
        let sigma = self.to_dense(1, n as usize);
        let tau = dense::functional_inverse(&k, &sigma, n as usize);
        Ok(Self::from_dense(k, 1, 0, tau, Some(n)))
    }

    /// An `n`-th root whose leading coefficient is `lead` (default: the designated
    /// root from the field tower). Exact non-monomial inputs need `max_prec`.
    pub fn nth_root(
        &self,
        n: u64,
        lead: Option<&FieldElem>,
        tower: &FieldTower,
        max_prec: Option<Q>,
    ) -> Result<Self> {
        if n.is_multiple_of(tower.p() as u64) {
            return Err(Error::WildRamification { n, p: tower.p() });
        }
        if n == 1 {
            return Ok(self.clone());
        }
        let v = self
            .certified_valuation()?
            .ok_or_else(|| Error::InvalidInput("root of the zero series".into()))?;
        let (_, c) = self.leading().unwrap();
        let r = match lead {
            Some(r) => {
                if r.pow(n) != c {
                    return Err(Error::InvalidInput(format!(
                        "{} is not an {}-th root of {}",
                        r, n, c
                    )));
                }
                r.clone()
            }
            None => tower.nth_root(&c, n)?,
        };
        let u = self.shift(-v).scale(&c.inv().unwrap());
        let vn = v / n as i64;
        let target = match (u.precision(), max_prec) {
            (Some(p), Some(m)) => Some(p.min(m - vn)),
            (Some(p), None) => Some(p),
            (None, Some(m)) => Some(m - vn),
            (None, None) => None,
        };
        let root_u = match target {
            None => {
                if u.terms.len() == 1 {
                    Self::one(u.field.clone())
                } else {
                    return Err(Error::InvalidInput(
                        "root of an exact non-monomial series needs a precision bound".into(),
                    ));
                }
            }
            Some(p) => {
                let e = lcm(u.e, *p.denom());
                let len = (p * e).ceil().to_integer().max(0) as usize;
                let dense = u.to_dense(e, len);
                let k = u.field.clone();
                let y = dense::nth_root_unit(&k, &dense, n);
                Self::from_dense(k, e, 0, y, Some(len as i64))
            }
        };
        Ok(root_u.scale(&r).shift(vn))
    }

    /// True if the two series agree up to the smaller of their precisions.
    pub fn agrees_with(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }
}

impl PartialEq for PuiseuxSeries {
    fn eq(&self, other: &Self) -> bool {
        let d = self.sub(other);
        d.is_zero() && self.precision() == other.precision()
    }
}

impl fmt::Debug for PuiseuxSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

fn fmt_exp(q: Q) -> String {
    if q.is_integer() {
        format!("{}", q.numer())
    } else {
        format!("({})", q)
    }
}

impl fmt::Display for PuiseuxSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (q, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match q.cmp(&Q::zero()) {
                Ordering::Equal => write!(f, "{}", c)?,
                _ if c.is_one() => write!(f, "t^{}", fmt_exp(q))?,
                _ => write!(f, "{}*t^{}", c, fmt_exp(q))?,
            }
        }
        if let Some(p) = self.precision() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "O(t^{})", fmt_exp(p))?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Dense truncated power series kernels: `a[i]` is the coefficient of `u^i`.
pub(crate) mod dense {
    use super::*;

    pub fn mul(k: &ExtField, a: &[Coords], b: &[Coords], n: usize) -> Vec<Coords> {
        let p = k.p() as u64;
        let d = k.degree();
        let mut acc = vec![vec![0u64; 2 * d - 1]; n];
        for (i, x) in a.iter().enumerate().take(n) {
            if k.is_zero(x) {
                continue;
            }
            for (j, y) in b.iter().enumerate().take(n - i) {
                if k.is_zero(y) {
                    continue;
                }
                let slot = &mut acc[i + j];
                for (s, &xv) in x.iter().enumerate() {
                    if xv == 0 {
                        continue;
                    }
                    for (t, &yv) in y.iter().enumerate() {
                        slot[s + t] = (slot[s + t] + xv as u64 * yv as u64) % p;
                    }
                }
            }
        }
        acc.into_iter()
            .map(|mut w| {
                if d == 1 {
                    smallvec::smallvec![w[0] as u32]
                } else {
                    k.reduce_wide(&mut w)
                }
            })
            .collect()
    }

    /// Inverse of a unit (nonzero constant term) modulo `u^n`.
    pub fn inverse(k: &ExtField, a: &[Coords]) -> Vec<Coords> {
        let n = a.len();
        if n == 0 {
            return vec![];
        }
        let c0 = k.inv(&a[0]).expect("dense inverse of a non-unit");
        let mut out: Vec<Coords> = Vec::with_capacity(n);
        out.push(c0.clone());
        for m in 1..n {
            let mut s = k.zero();
            for j in 1..=m {
                if k.is_zero(&a[j]) {
                    continue;
                }
                s = k.add(&s, &k.mul(&a[j], &out[m - j]));
            }
            out.push(k.neg(&k.mul(&s, &c0)));
        }
        out
    }

    /// `g(s)` modulo `u^n`, where `s` has zero constant term.
    pub fn compose(k: &ExtField, g: &[Coords], s: &[Coords], n: usize) -> Vec<Coords> {
        let mut acc: Vec<Coords> = vec![k.zero(); n];
        for c in g.iter().rev() {
            acc = mul(k, &acc, s, n);
            if n > 0 {
                acc[0] = k.add(&acc[0], c);
            }
        }
        acc
    }

    pub fn derivative(k: &ExtField, a: &[Coords]) -> Vec<Coords> {
        a.iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| k.scale(c, (i as u64 % k.p() as u64) as u32))
            .collect()
    }

    /// Compositional inverse of `σ` (valuation 1) modulo `u^n` by Newton's method.
    pub fn functional_inverse(k: &ExtField, sigma: &[Coords], n: usize) -> Vec<Coords> {
        let c_inv = k
            .inv(&sigma[1])
            .expect("σ must have a unit linear coefficient");
        let dsigma = derivative(k, sigma);
        let mut tau: Vec<Coords> = vec![k.zero(); n.min(2)];
        if n >= 2 {
            tau[1] = c_inv;
        }
        let mut m = 2usize;
        while m < n {
            m = (2 * m).min(n);
            tau.resize(m, k.zero());
            let st = compose(k, &sigma[..sigma.len().min(m)], &tau, m);
            let mut err = st;
            err[1] = k.sub(&err[1], &k.one());
            let dst = compose(k, &dsigma[..dsigma.len().min(m)], &tau, m);
            let corr = mul(k, &err, &inverse(k, &dst), m);
            for i in 0..m {
                tau[i] = k.sub(&tau[i], &corr[i]);
            }
        }
        tau.truncate(n);
        tau
    }

    /// The `n`-th root of a series with constant term 1 and constant term 1, modulo `u^len`.
    pub fn nth_root_unit(k: &ExtField, a: &[Coords], n: u64) -> Vec<Coords> {
        let len = a.len();
        if len == 0 {
            return vec![];
        }
        let n_inv = k.inv(&k.from_i64((n % k.p() as u64) as i64)).unwrap();
        let mut y: Vec<Coords> = vec![k.one()];
        let mut m = 1usize;
        while m < len {
            m = (2 * m).min(len);
            y.resize(m, k.zero());
            // y <- y - (y^n - a) / (n y^{n-1})
            let mut ypow = vec![k.one()];
            ypow.resize(m, k.zero());
            for _ in 0..n - 1 {
                ypow = mul(k, &ypow, &y, m);
            }
            let yn = mul(k, &ypow, &y, m);
            let diff: Vec<Coords> = (0..m).map(|i| k.sub(&yn[i], &a[i])).collect();
            let denom_inv = inverse(k, &ypow);
            let corr = mul(k, &diff, &denom_inv, m);
            for i in 0..m {
                y[i] = k.sub(&y[i], &k.mul(&corr[i], &n_inv));
            }
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tower(p: u64) -> Arc<FieldTower> {
        FieldTower::new(p, 24).unwrap()
    }

    fn q(a: i64, b: i64) -> Q {
        Q::new(a, b)
    }

    #[test]
    fn valuation_of_fig1_series() {
        let t = tower(7);
        let one = t.elem(1);
        let s = PuiseuxSeries::monomial(&one, q(2, 3)).add(&PuiseuxSeries::monomial(&one, q(5, 6)));
        assert_eq!(s.valuation(), Some(q(2, 3)));
        assert_eq!(s.e(), 6);
    }

    #[test]
    fn cancellation_gives_infinity() {
        let t = tower(7);
        let a = PuiseuxSeries::monomial(&t.elem(3), q(2, 1));
        assert_eq!(a.sub(&a).valuation(), None);
        let z = PuiseuxSeries::big_o(t.prime_field(), q(10, 1));
        assert_eq!(z.valuation(), None);
        assert!(z.certified_valuation().is_err());
    }

    #[test]
    fn product_of_ramified_monomials() {
        let t = tower(7);
        let one = t.elem(1);
        let a = PuiseuxSeries::monomial(&one, q(1, 2));
        let b = PuiseuxSeries::monomial(&one, q(1, 3));
        let c = a.mul(&b);
        assert_eq!(c.e(), 6);
        assert_eq!(c.valuation(), Some(q(5, 6)));
    }

    #[test]
    fn unit_inverse_of_one_plus_t() {
        let t = tower(7);
        let k = t.prime_field();
        let u = PuiseuxSeries::one(k.clone())
            .add(&PuiseuxSeries::t(k.clone()))
            .truncate(q(8, 1));
        let v = u.unit_inverse().unwrap();
        let prod = u.mul(&v);
        assert!(prod.agrees_with(&PuiseuxSeries::one(k)));
        assert_eq!(prod.precision(), Some(q(8, 1)));
        assert_eq!(v.coeff(q(3, 1)).unwrap(), t.elem(-1));
    }

    #[test]
    fn substitution_examples() {
        let t = tower(7);
        let k = t.prime_field();
        let tt = PuiseuxSeries::t(k.clone());
        let s = tt.add(&tt.pow(2));
        let g = tt.pow(2);
        let out = g.substitute(&s, &t).unwrap();
        let expect = tt.pow(2).add(&tt.pow(3).scale(&t.elem(2))).add(&tt.pow(4));
        assert_eq!(out, expect);
        let g = PuiseuxSeries::one(k.clone()).add(&tt);
        assert_eq!(
            g.substitute(&tt.pow(3), &t).unwrap(),
            PuiseuxSeries::one(k).add(&tt.pow(3))
        );
    }

    #[test]
    fn inverse_of_t_plus_t2() {
        let t = tower(101);
        let k = t.prime_field();
        let tt = PuiseuxSeries::t(k.clone());
        let sigma = tt.add(&tt.pow(2));
        let tau = sigma.functional_inverse(6).unwrap();
        let coeffs: Vec<FieldElem> = (1..6).map(|i| tau.coeff(q(i, 1)).unwrap()).collect();
        // Catalan numbers with alternating sign
        let expect = [1, -1, 2, -5, 14].map(|x| t.elem(x));
        assert_eq!(coeffs, expect.to_vec());
        let back = sigma.substitute(&tau, &t).unwrap();
        assert!(back.agrees_with(&tt));
    }

    #[test]
    fn square_root_in_f7() {
        let t = tower(7);
        let k = t.prime_field();
        let tt = PuiseuxSeries::t(k.clone());
        let s = tt.pow(2).mul(&PuiseuxSeries::one(k.clone()).add(&tt));
        let r = s.nth_root(2, Some(&t.elem(1)), &t, Some(q(6, 1))).unwrap();
        assert_eq!(r.coeff(q(2, 1)).unwrap(), t.elem(4));
        assert!(r.pow(2).agrees_with(&s));
    }

    #[test]
    fn exact_monomial_roots() {
        let t = tower(7);
        let k = t.prime_field();
        let tt = PuiseuxSeries::t(k.clone());
        assert_eq!(
            tt.pow(3).nth_root(3, Some(&t.elem(1)), &t, None).unwrap(),
            tt
        );
        assert_eq!(
            tt.pow(2).nth_root(2, Some(&t.elem(1)), &t, None).unwrap(),
            tt
        );
    }
}
