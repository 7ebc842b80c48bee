//! From an exact polynomial in `F_p[t][x]` to its roots over `k̄((t))`.
//!
//! The Newton–Puiseux recursion below keeps every intermediate polynomial
//! exact (finite support in the current uniformizer). Only when a branch is
//! isolated (a single root left under the current prefix) does it switch to a
//! truncated Newton iteration. Consequently all branch separations are exact
//! and root-difference valuations never depend on working precision.

use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{precision, Error, Result};
use crate::field::{Coords, ExtField, FieldElem, FieldTower};
use crate::puiseux::{dense, PuiseuxSeries, Q};

// ---------------------------------------------------------------------------
// Polynomials in t over F_p.

mod fpt {
    pub type P = Vec<u32>;

    pub fn trim(a: &mut P) {
        while a.last() == Some(&0) {
            a.pop();
        }
    }

    pub fn val(a: &P) -> Option<usize> {
        a.iter().position(|&c| c != 0)
    }

    pub fn sub(a: &P, b: &P, p: u32) -> P {
        let n = a.len().max(b.len());
        let mut out: P = (0..n)
            .map(|i| {
                let x = *a.get(i).unwrap_or(&0);
                let y = *b.get(i).unwrap_or(&0);
                (x + p - y) % p
            })
            .collect();
        trim(&mut out);
        out
    }

    pub fn mul(a: &P, b: &P, p: u32) -> P {
        if a.is_empty() || b.is_empty() {
            return vec![];
        }
        let p64 = p as u64;
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x as u64 * y as u64) % p64;
            }
        }
        let mut out: P = out.into_iter().map(|x| x as u32).collect();
        trim(&mut out);
        out
    }

    fn inv(a: u32, p: u32) -> u32 {
        let mut r = 1u64;
        let mut b = a as u64;
        let mut e = p - 2;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p as u64;
            }
            b = b * b % p as u64;
            e >>= 1;
        }
        r as u32
    }

    /// Exact division; panics (debug) if `b` does not divide `a`.
    pub fn div_exact(a: &P, b: &P, p: u32) -> P {
        let mut r = a.clone();
        trim(&mut r);
        if r.is_empty() {
            return vec![];
        }
        let lb = b.len();
        let il = inv(*b.last().unwrap(), p) as u64;
        let mut q = vec![0u32; r.len() + 1 - lb];
        for k in (0..q.len()).rev() {
            let c = (r[k + lb - 1] as u64 * il % p as u64) as u32;
            q[k] = c;
            if c != 0 {
                for (j, &y) in b.iter().enumerate() {
                    let t = (c as u64 * y as u64 % p as u64) as u32;
                    r[k + j] = (r[k + j] + p - t) % p;
                }
            }
        }
        debug_assert!(r.iter().all(|&x| x == 0), "inexact division in F_p[t]");
        trim(&mut q);
        q
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(mut m: Vec<Vec<P>>, p: u32) -> P {
        let n = m.len();
        if n == 0 {
            return vec![1];
        }
        let mut prev: P = vec![1];
        let mut sign_flip = false;
        for k in 0..n {
            if m[k][k].is_empty() {
                match (k + 1..n).find(|&r| !m[r][k].is_empty()) {
                    Some(r) => {
                        m.swap(k, r);
                        sign_flip = !sign_flip;
                    }
                    None => return vec![],
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let a = mul(&m[i][j], &m[k][k], p);
                    let b = mul(&m[i][k], &m[k][j], p);
                    m[i][j] = div_exact(&sub(&a, &b, p), &prev, p);
                }
                m[i][k] = vec![];
            }
            prev = m[k][k].clone();
        }
        let d = m[n - 1][n - 1].clone();
        if sign_flip {
            sub(&vec![], &d, p)
        } else {
            d
        }
    }

    /// Sylvester matrix of two polynomials with coefficients in F_p[t].
    pub fn sylvester(f: &[P], g: &[P]) -> Vec<Vec<P>> {
        let m = f.len() - 1;
        let n = g.len() - 1;
        let size = m + n;
        let mut rows = vec![vec![vec![]; size]; size];
        for r in 0..n {
            for (i, c) in f.iter().enumerate() {
                rows[r][r + m - i] = c.clone();
            }
        }
        for r in 0..m {
            for (i, c) in g.iter().enumerate() {
                rows[n + r][r + n - i] = c.clone();
            }
        }
        rows
    }
}

// ---------------------------------------------------------------------------

/// A normalized input polynomial `f = t^b · g` with `g ∈ F_p[t][x]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactPoly {
    p: u32,
    b: u32,
    // coeffs[i] = coefficient of x^i in g, as a polynomial in t
    coeffs: Vec<Vec<u32>>,
}

/// A Newton polygon slope: the common valuation of a group of roots.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slope {
    Finite(Q),
    /// The exact root `x = 0`.
    Infinite,
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slope::Finite(q) => write!(f, "{}", q),
            Slope::Infinite => write!(f, "inf"),
        }
    }
}

/// Lower convex hull of `(i, v_i)`; returns `(slope, length)` pairs with slope `(v_i - v_j)/(j - i)`.
fn lower_hull(points: &[(usize, i64)]) -> Vec<(usize, usize, Q)> {
    let mut segs = vec![];
    let mut cur = 0;
    while cur + 1 < points.len() {
        let (i0, v0) = points[cur];
        let mut best = cur + 1;
        let mut best_slope = Q::new(points[best].1 - v0, (points[best].0 - i0) as i64);
        for (idx, &(j, vj)) in points.iter().enumerate().skip(cur + 2) {
            let s = Q::new(vj - v0, (j - i0) as i64);
            if s <= best_slope {
                best = idx;
                best_slope = s;
            }
        }
        segs.push((cur, best, -best_slope));
        cur = best;
    }
    segs
}

impl ExactPoly {
    /// Normalizes `raw[i][j]` = coefficient of `x^i t^j` (integers, reduced mod `p`).
    pub fn parse_and_normalize(p: u64, raw: &[Vec<i64>]) -> Result<ExactPoly> {
        if !(3..65536).contains(&p)
            || !(2..)
                .take_while(|d| d * d <= p)
                .all(|d| !p.is_multiple_of(d))
        {
            return Err(Error::InvalidPrime(p));
        }
        let p32 = p as u32;
        let mut coeffs: Vec<Vec<u32>> = raw
            .iter()
            .map(|row| {
                let mut r: Vec<u32> = row.iter().map(|&c| c.rem_euclid(p as i64) as u32).collect();
                fpt::trim(&mut r);
                r
            })
            .collect();
        while coeffs.last().is_some_and(|c| c.is_empty()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("the zero polynomial".into()));
        }
        let deg = coeffs.len() - 1;
        if deg == 0 {
            return Err(Error::InvalidInput("polynomial has no x term".into()));
        }
        if p as usize <= deg {
            return Err(Error::WildCharacteristic {
                p: p32,
                degree: deg,
            });
        }
        let b = coeffs.iter().filter_map(fpt::val).min().unwrap();
        if b >= 2 {
            return Err(Error::NotSquarefree(format!("t^{} divides the content", b)));
        }
        for c in coeffs.iter_mut() {
            if !c.is_empty() {
                c.drain(..b);
            }
        }
        if fpt::val(coeffs.last().unwrap()) != Some(0) {
            return Err(Error::NonUnitLeadingCoefficient);
        }
        let f = ExactPoly {
            p: p32,
            b: b as u32,
            coeffs,
        };
        if f.resultant_with_derivative().is_empty() {
            return Err(Error::NotSquarefree("repeated factor".into()));
        }
        Ok(f)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Exponent of the extracted content `t^b`.
    pub fn b(&self) -> u32 {
        self.b
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Parity of the degree.
    pub fn d(&self) -> u32 {
        (self.degree() % 2) as u32
    }

    /// Coefficients of `g = f / t^b`: entry `i` is the `t`-polynomial multiplying `x^i`.
    pub fn coeffs(&self) -> &[Vec<u32>] {
        &self.coeffs
    }

    /// Coefficients of `f` itself (content included).
    pub fn full_coeffs(&self) -> Vec<Vec<u32>> {
        self.coeffs
            .iter()
            .map(|c| {
                if c.is_empty() {
                    vec![]
                } else {
                    let mut v = vec![0; self.b as usize];
                    v.extend(c);
                    v
                }
            })
            .collect()
    }

    fn derivative_coeffs(&self) -> Vec<Vec<u32>> {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| {
                let s = (i as u64 % self.p as u64) as u32;
                let mut v: Vec<u32> = c
                    .iter()
                    .map(|&x| (x as u64 * s as u64 % self.p as u64) as u32)
                    .collect();
                fpt::trim(&mut v);
                v
            })
            .collect()
    }

    /// `Res(g, g')` as an exact polynomial in `t`.
    pub fn resultant_with_derivative(&self) -> Vec<u32> {
        let m = fpt::sylvester(&self.coeffs, &self.derivative_coeffs());
        fpt::det(m, self.p)
    }

    /// `ν(Δ_f) = 2b(d + deg − 1) + ν(Res(g, g'))`, by exact determinant.
    pub fn discriminant_valuation_direct(&self) -> u64 {
        let r = self.resultant_with_derivative();
        let v = fpt::val(&r).expect("squarefree polynomial has nonzero discriminant") as u64;
        let b = self.b as u64;
        2 * b * (self.d() as u64 + self.degree() as u64 - 1) + v
    }

    /// Newton polygon of `g`: `(slope, length)` with slope the common root
    /// valuation; the exact root `0` appears as `(Infinite, ord_x)`.
    pub fn newton_polygon(&self) -> Vec<(Slope, usize)> {
        let pts: Vec<(usize, i64)> = self
            .coeffs
            .iter()
            .enumerate()
            .filter_map(|(i, c)| fpt::val(c).map(|v| (i, v as i64)))
            .collect();
        let mut out: Vec<(Slope, usize)> = lower_hull(&pts)
            .into_iter()
            .map(|(a, b, s)| (Slope::Finite(s), pts[b].0 - pts[a].0))
            .collect();
        out.sort();
        if pts[0].0 > 0 {
            out.push((Slope::Infinite, pts[0].0));
        }
        out
    }

    /// `g` with coefficients as exact series over the prime field of `tower`.
    pub fn to_series_poly(&self, tower: &FieldTower) -> SeriesPoly {
        let k = tower.prime_field();
        SeriesPoly {
            coeffs: self
                .coeffs
                .iter()
                .map(|c| {
                    PuiseuxSeries::from_terms(
                        k.clone(),
                        1,
                        c.iter()
                            .enumerate()
                            .map(|(j, &x)| (j as i64, k.from_i64(x as i64)))
                            .collect(),
                        None,
                    )
                })
                .collect(),
        }
    }

    /// `g(α)` for a series `α`.
    pub fn eval_series(&self, alpha: &PuiseuxSeries, tower: &FieldTower) -> PuiseuxSeries {
        self.to_series_poly(tower).eval(alpha)
    }

    /// Least total `(x − a, t)`-degree among the monomials of `f(x + a)`.
    pub fn multiplicity_at(&self, a: &FieldElem, tower: &FieldTower) -> Result<u64> {
        let g = self.to_series_poly(tower).shift_x(a);
        Ok(g.multiplicity_at_zero()? + self.b as u64)
    }

    fn field_poly(&self, k: &Arc<ExtField>, j: usize) -> Vec<Coords> {
        // coefficient of t^j of each x-coefficient, as a polynomial in x over k
        self.coeffs
            .iter()
            .map(|c| k.from_i64(*c.get(j).unwrap_or(&0) as i64))
            .collect()
    }
}

// ---------------------------------------------------------------------------

/// Polynomial in `x` with truncated-series coefficients.
#[derive(Clone, Debug)]
pub struct SeriesPoly {
    pub coeffs: Vec<PuiseuxSeries>,
}

impl SeriesPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn derivative(&self) -> SeriesPoly {
        SeriesPoly {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| {
                    let k = c.field().clone();
                    c.scale(&FieldElem::new(k.clone(), k.from_i64(i as i64)))
                })
                .collect(),
        }
    }

    pub fn eval(&self, alpha: &PuiseuxSeries) -> PuiseuxSeries {
        let mut acc = PuiseuxSeries::zero(alpha.field().clone());
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(alpha).add(c);
        }
        acc
    }

    /// `f(x + a)` for a constant `a`.
    pub fn shift_x(&self, a: &FieldElem) -> SeriesPoly {
        let n = self.coeffs.len();
        let k = self
            .coeffs
            .iter()
            .map(|c| c.field().clone())
            .chain(std::iter::once(a.field().clone()))
            .max_by_key(|k| k.index())
            .unwrap();
        let mut acc: Vec<PuiseuxSeries> = vec![];
        let ac = PuiseuxSeries::constant(&a.embed(&k));
        for c in self.coeffs.iter().rev() {
            // acc <- acc * (x + a) + c
            let mut next = vec![PuiseuxSeries::zero(k.clone()); acc.len() + 1];
            for (i, s) in acc.iter().enumerate() {
                next[i + 1] = next[i + 1].add(s);
                next[i] = next[i].add(&s.mul(&ac));
            }
            next[0] = next[0].add(&c.embed(&k));
            acc = next;
        }
        acc.truncate(n);
        SeriesPoly { coeffs: acc }
    }

    /// `min_i (i + ν(c_i))`, certified against the coefficient precisions.
    pub fn multiplicity_at_zero(&self) -> Result<u64> {
        let mut best: Option<Q> = None;
        for (i, c) in self.coeffs.iter().enumerate() {
            if let Some(v) = c.valuation() {
                let m = v + Q::from_integer(i as i64);
                best = Some(best.map_or(m, |b: Q| b.min(m)));
            }
        }
        let best = best.ok_or_else(|| precision("polynomial vanishes to working precision"))?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                if let Some(pr) = c.precision() {
                    if pr + Q::from_integer(i as i64) <= best {
                        return Err(precision("multiplicity not certified"));
                    }
                }
            }
        }
        if !best.is_integer() {
            return Err(Error::InvariantViolation(format!(
                "non-integral multiplicity {}",
                best
            )));
        }
        Ok(best.to_integer() as u64)
    }

    /// Least precision among the coefficients (`None` when all are exact).
    pub fn precision(&self) -> Option<Q> {
        self.coeffs.iter().filter_map(|c| c.precision()).min()
    }
}

/// `ν(Res(f, g))` by elimination over truncated series with valuation pivoting.
///
/// Every entry is known modulo `t^N` for a common absolute `N`; choosing the
/// pivot of least valuation keeps all updates integral, so the absolute
/// precision never drops. The result is certified when every pivot is nonzero
/// below its precision.
pub fn resultant_valuation(f: &SeriesPoly, g: &SeriesPoly) -> Result<Q> {
    if f.coeffs.is_empty() || g.coeffs.is_empty() {
        return Err(Error::InvalidInput(
            "resultant of the zero polynomial".into(),
        ));
    }
    let m = f.degree();
    let n = g.degree();
    let size = m + n;
    if size == 0 {
        return Ok(Q::zero());
    }
    let k = f
        .coeffs
        .iter()
        .chain(&g.coeffs)
        .map(|c| c.field().clone())
        .max_by_key(|k| k.index())
        .unwrap();
    let zero = PuiseuxSeries::zero(k.clone());
    let mut mat = vec![vec![zero.clone(); size]; size];
    for r in 0..n {
        for (i, c) in f.coeffs.iter().enumerate() {
            mat[r][r + m - i] = c.embed(&k);
        }
    }
    for r in 0..m {
        for (i, c) in g.coeffs.iter().enumerate() {
            mat[n + r][r + n - i] = c.embed(&k);
        }
    }
    let mut total = Q::zero();
    let mut rows: Vec<usize> = (0..size).collect();
    let mut cols: Vec<usize> = (0..size).collect();
    for _ in 0..size {
        // complete pivoting on valuation
        let mut best: Option<(Q, usize, usize)> = None;
        for (ri, &r) in rows.iter().enumerate() {
            for (ci, &c) in cols.iter().enumerate() {
                if let Some(v) = mat[r][c].valuation() {
                    if best.is_none_or(|(bv, _, _)| v < bv) {
                        best = Some((v, ri, ci));
                    }
                }
            }
        }
        let Some((v, ri, ci)) = best else {
            let exact = rows
                .iter()
                .all(|&r| cols.iter().all(|&c| mat[r][c].is_exact_zero()));
            return Err(if exact {
                Error::NotSquarefree("resultant vanishes".into())
            } else {
                precision("resultant not certified: remaining minor vanishes to working precision")
            });
        };
        let pr = rows.remove(ri);
        let pc = cols.remove(ci);
        // a pivot is certified only if no unknown entry of the minor could have smaller valuation
        for &r in rows.iter().chain(std::iter::once(&pr)) {
            for &c in cols.iter().chain(std::iter::once(&pc)) {
                if let Some(p) = mat[r][c].precision() {
                    if mat[r][c].is_zero() && p <= v {
                        return Err(precision("resultant pivot not certified"));
                    }
                }
            }
        }
        total += v;
        let piv = mat[pr][pc].clone();
        let pinv = piv.inverse(None).or_else(|_| {
            let cap = mat
                .iter()
                .flatten()
                .filter_map(|s| s.precision())
                .min()
                .unwrap_or(v + Q::from_integer(64));
            piv.inverse(Some(cap))
        })?;
        for &r in &rows {
            if mat[r][pc].is_zero() && mat[r][pc].is_exact() {
                continue;
            }
            let factor = mat[r][pc].mul(&pinv);
            for &c in &cols {
                if mat[pr][c].is_exact_zero() {
                    continue;
                }
                let upd = factor.mul(&mat[pr][c]);
                mat[r][c] = mat[r][c].sub(&upd);
            }
            mat[r][pc] = zero.clone();
        }
    }
    Ok(total)
}

// ---------------------------------------------------------------------------

/// `λ_i` of an orbit: `n_i · ν(α − a_P)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Lambda {
    Finite(u64),
    /// The factor is exactly `x − a_P`.
    Infinite,
    /// Only a lower bound is known (possible only for `n = 1`, where `λ` never
    /// enters any formula).
    AtLeast(u64),
}

impl Lambda {
    pub fn finite(&self) -> Option<u64> {
        match self {
            Lambda::Finite(l) => Some(*l),
            _ => None,
        }
    }

    /// `min(n, λ)`.
    pub fn min_with(&self, n: u64) -> u64 {
        match self {
            Lambda::Finite(l) => n.min(*l),
            Lambda::Infinite => n,
            Lambda::AtLeast(l) => {
                debug_assert!(*l >= n, "uncertified λ below n");
                n
            }
        }
    }

    /// Whether `λ/n ≥ 1`.
    pub fn at_least(&self, n: u64) -> bool {
        match self {
            Lambda::Finite(l) => *l >= n,
            Lambda::Infinite => true,
            Lambda::AtLeast(l) => *l >= n,
        }
    }
}

impl fmt::Display for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lambda::Finite(l) => write!(f, "{}", l),
            Lambda::Infinite => write!(f, "inf"),
            Lambda::AtLeast(l) => write!(f, ">={}", l),
        }
    }
}

/// One tame-Galois orbit of roots, i.e. one irreducible factor over `k̄((t))`.
#[derive(Clone, Debug)]
pub struct Orbit {
    /// Ramification index = orbit size = factor degree.
    pub n: u64,
    pub root: PuiseuxSeries,
    pub residue: FieldElem,
    pub lambda: Lambda,
}

impl Orbit {
    pub fn new(root: PuiseuxSeries) -> Result<Orbit> {
        let n = root.e() as u64;
        if root.precision().is_some_and(|p| !p.is_positive()) {
            return Err(precision("root known only to O(1)"));
        }
        let residue = root.constant_term();
        if root.valuation().is_some_and(|v| v.is_negative()) {
            return Err(crate::error::invariant("root with negative valuation"));
        }
        let diff = root.sub(&PuiseuxSeries::constant(&residue));
        let lambda = match diff.valuation() {
            Some(v) => Lambda::Finite((v * n as i64).to_integer() as u64),
            None => match diff.precision() {
                None => Lambda::Infinite,
                Some(p) => Lambda::AtLeast((p * n as i64).ceil().to_integer().max(0) as u64),
            },
        };
        if let Lambda::AtLeast(l) = lambda {
            if l < n {
                return Err(precision("λ of a ramified root not certified"));
            }
        }
        Ok(Orbit {
            n,
            root,
            residue,
            lambda,
        })
    }

    /// `λ/n < 1`.
    pub fn in_c_lt1(&self) -> bool {
        !self.lambda.at_least(self.n)
    }
}

/// `f = u t^b Π g_i`, carried as the content exponent and one root per orbit.
#[derive(Clone, Debug)]
pub struct RootSystem {
    pub tower: Arc<FieldTower>,
    pub b: u32,
    pub orbits: Vec<Orbit>,
}

impl RootSystem {
    pub fn degree(&self) -> usize {
        self.orbits.iter().map(|o| o.n as usize).sum()
    }

    pub fn d(&self) -> u32 {
        (self.degree() % 2) as u32
    }

    /// All `n` conjugates `t^{1/n} ↦ ζ^j t^{1/n}` of orbit `i`, `j = 0..n`.
    pub fn conjugates(&self, i: usize) -> Result<Vec<PuiseuxSeries>> {
        let o = &self.orbits[i];
        if o.n == 1 {
            return Ok(vec![o.root.clone()]);
        }
        let zs = self.tower.nth_roots_of_unity(o.n)?;
        Ok(zs.iter().map(|z| o.root.twist(z, o.n as i64)).collect())
    }

    /// Every root, tagged with its orbit index.
    pub fn all_roots(&self) -> Result<Vec<(usize, PuiseuxSeries)>> {
        let mut out = vec![];
        for i in 0..self.orbits.len() {
            for r in self.conjugates(i)? {
                out.push((i, r));
            }
        }
        Ok(out)
    }

    /// Least precision over the representatives (`None` if all are exact).
    pub fn precision(&self) -> Option<Q> {
        self.orbits.iter().filter_map(|o| o.root.precision()).min()
    }

    /// Distinct residues in order of first appearance.
    pub fn residues(&self) -> Vec<FieldElem> {
        let mut out: Vec<FieldElem> = vec![];
        for o in &self.orbits {
            if !out.contains(&o.residue) {
                out.push(o.residue.clone());
            }
        }
        out
    }

    /// `Σ_{α≠β} ν(α − β)` over ordered pairs of distinct roots.
    pub fn pair_valuation_sum(&self) -> Result<Q> {
        let roots = self.all_roots()?;
        let mut s = Q::zero();
        for i in 0..roots.len() {
            for j in i + 1..roots.len() {
                let d = roots[i].1.sub(&roots[j].1);
                let v = d
                    .certified_valuation()?
                    .ok_or_else(|| crate::error::invariant("two equal roots"))?;
                s += v * 2;
            }
        }
        Ok(s)
    }
}

/// Monic `Π (x − α)` over all roots, each coefficient known up to `t^prec`.
pub fn materialize(rs: &RootSystem, prec: Q) -> Result<SeriesPoly> {
    let roots = rs.all_roots()?;
    let k = roots
        .iter()
        .map(|(_, r)| r.field().clone())
        .max_by_key(|k| k.index())
        .unwrap_or_else(|| rs.tower.prime_field());
    let mut coeffs = vec![PuiseuxSeries::one(k.clone())];
    for (_, r) in roots {
        let r = r.embed(&k);
        let r = if r.precision().is_none_or(|p| p > prec) {
            r.truncate(prec)
        } else {
            r
        };
        let mut next = vec![PuiseuxSeries::zero(k.clone()); coeffs.len() + 1];
        for (i, c) in coeffs.iter().enumerate() {
            next[i + 1] = next[i + 1].add(c);
            next[i] = next[i].sub(&c.mul(&r));
        }
        coeffs = next;
    }
    let coeffs: Vec<PuiseuxSeries> = coeffs
        .into_iter()
        .map(|c| {
            if c.precision().is_none_or(|p| p > prec) && !c.is_exact() {
                c.truncate(prec)
            } else {
                c
            }
        })
        .collect();
    for c in &coeffs {
        if c.e() != 1 && c.raw_terms().iter().any(|(k, _)| k % c.e() != 0) {
            return Err(crate::error::invariant(
                "materialized coefficient is not invariant under the twisting action",
            ));
        }
    }
    Ok(SeriesPoly { coeffs })
}

/// `ν(Δ)` of a root system through the series resultant: `2b(d+deg−1) + ν(Res(F, F'))`.
pub fn discriminant_valuation_materialized(rs: &RootSystem, prec: Q) -> Result<Q> {
    let f = materialize(rs, prec)?;
    let deg = rs.degree() as i64;
    let b = rs.b as i64;
    let base = Q::from_integer(2 * b * (rs.d() as i64 + deg - 1));
    if deg <= 1 {
        return Ok(if deg == 0 { Q::zero() } else { base });
    }
    Ok(base + resultant_valuation(&f, &f.derivative())?)
}

// ---------------------------------------------------------------------------
// Newton–Puiseux.

/// Bivariate polynomial `Σ c[i][j] y^i s^j` over one field.
#[derive(Clone)]
struct Biv {
    k: Arc<ExtField>,
    c: Vec<Vec<Coords>>,
}

impl Biv {
    fn trim(&mut self) {
        for row in self.c.iter_mut() {
            while row.last().is_some_and(|x| self.k.is_zero(x)) {
                row.pop();
            }
        }
        while self.c.last().is_some_and(|r| r.is_empty()) {
            self.c.pop();
        }
    }

    fn val(&self, i: usize) -> Option<usize> {
        self.c.get(i)?.iter().position(|x| !self.k.is_zero(x))
    }

    fn embed(&self, k2: &Arc<ExtField>) -> Biv {
        if Arc::ptr_eq(&self.k, k2) {
            return self.clone();
        }
        Biv {
            k: k2.clone(),
            c: self
                .c
                .iter()
                .map(|r| r.iter().map(|x| self.k.embed_into(x, k2)).collect())
                .collect(),
        }
    }

    /// `G(y + a)` (Horner in `y`).
    fn shift_y(&self, a: &[u32]) -> Biv {
        let k = &self.k;
        let mut acc: Vec<Vec<Coords>> = vec![];
        for row in self.c.iter().rev() {
            let mut next: Vec<Vec<Coords>> = vec![vec![]; acc.len() + 1];
            for (i, r) in acc.iter().enumerate() {
                add_into(k, &mut next[i + 1], r);
                let scaled: Vec<Coords> = r.iter().map(|x| k.mul(x, a)).collect();
                add_into(k, &mut next[i], &scaled);
            }
            add_into(k, &mut next[0], row);
            acc = next;
        }
        let mut g = Biv {
            k: k.clone(),
            c: acc,
        };
        g.trim();
        g
    }

    /// `G(s'^q, s'^h (γ + y')) / s'^w` with `w` the least resulting `s'`-order.
    fn blow(&self, q: usize, h: usize, gamma: &[u32]) -> Biv {
        let k = &self.k;
        let z = k.zero();
        let c: Vec<Vec<Coords>> = self
            .c
            .iter()
            .enumerate()
            .map(|(i, row)| {
                if row.is_empty() {
                    return vec![];
                }
                let mut out = vec![z.clone(); (row.len() - 1) * q + 1 + h * i];
                for (j, x) in row.iter().enumerate() {
                    out[j * q + h * i] = x.clone();
                }
                out
            })
            .collect();
        let g = Biv { k: k.clone(), c }.shift_y(gamma);
        let w =
            g.c.iter()
                .filter_map(|r| r.iter().position(|x| !k.is_zero(x)))
                .min()
                .unwrap_or(0);
        let mut g = Biv {
            k: k.clone(),
            c: g.c
                .into_iter()
                .map(|r| if r.len() > w { r[w..].to_vec() } else { vec![] })
                .collect(),
        };
        g.trim();
        g
    }

    /// `G / y` (requires `G(s, 0) = 0`).
    fn div_y(&self) -> Biv {
        Biv {
            k: self.k.clone(),
            c: self.c[1..].to_vec(),
        }
    }

    /// Exact evaluation `G(s, y(s))` for a polynomial `y`.
    fn eval_exact(&self, y: &[Coords]) -> Vec<Coords> {
        let k = &self.k;
        let mut acc: Vec<Coords> = vec![];
        for row in self.c.iter().rev() {
            acc = poly_mul(k, &acc, y);
            add_into(k, &mut acc, row);
        }
        while acc.last().is_some_and(|x| k.is_zero(x)) {
            acc.pop();
        }
        acc
    }
}

fn add_into(k: &ExtField, acc: &mut Vec<Coords>, r: &[Coords]) {
    if acc.len() < r.len() {
        acc.resize(r.len(), k.zero());
    }
    for (a, x) in acc.iter_mut().zip(r) {
        *a = k.add(a, x);
    }
}

fn poly_mul(k: &ExtField, a: &[Coords], b: &[Coords]) -> Vec<Coords> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    dense::mul(k, a, b, a.len() + b.len() - 1)
}

struct Branch {
    g: Biv,
    // current uniformizer s = t^{1/e}
    e: i64,
    // α = prefix + t^m · y
    prefix: PuiseuxSeries,
    m: Q,
    r: usize,
}

/// Newton–Puiseux expansion: one representative per tame-Galois orbit, each
/// known at least up to `t^order` (or exactly).
pub fn puiseux_roots(f: &ExactPoly, order: Q, tower: &Arc<FieldTower>) -> Result<RootSystem> {
    if f.p() != tower.p() {
        return Err(Error::InvalidInput(
            "tower and polynomial disagree on p".into(),
        ));
    }
    let k0 = tower.prime_field();
    let reduction: Vec<FieldElem> = f
        .field_poly(&k0, 0)
        .into_iter()
        .map(|c| FieldElem::new(k0.clone(), c))
        .collect();
    let residues = tower.roots_of(&reduction)?;
    let mut orbits = vec![];
    let series = f.to_series_poly(tower);
    for (a, r) in residues {
        let k = a.field().clone();
        // λ ≤ ν(g(a)) for every root at a, so this much precision certifies all λ
        let ga = series.eval(&PuiseuxSeries::constant(&a));
        let need = ga.valuation().map_or(order, |v| order.max(v + 1));
        let g = Biv {
            k: k.clone(),
            c: f.coeffs
                .iter()
                .map(|c| c.iter().map(|&x| k.from_i64(x as i64)).collect())
                .collect(),
        };
        let mut g = g;
        g.trim();
        let branch = Branch {
            g: g.shift_y(a.coords()),
            e: 1,
            prefix: PuiseuxSeries::constant(&a),
            m: Q::zero(),
            r,
        };
        for root in expand(branch, need, tower)? {
            orbits.push(Orbit::new(root)?);
        }
    }
    let rs = RootSystem {
        tower: tower.clone(),
        b: f.b(),
        orbits,
    };
    if rs.degree() != f.degree() {
        return Err(crate::error::invariant(format!(
            "found {} roots for a polynomial of degree {}",
            rs.degree(),
            f.degree()
        )));
    }
    Ok(rs)
}

fn expand(mut br: Branch, order: Q, tower: &FieldTower) -> Result<Vec<PuiseuxSeries>> {
    let mut out = vec![];
    if br.r == 0 {
        return Ok(out);
    }
    if br.g.val(0).is_none() {
        // y = 0 is an exact root
        out.push(br.prefix.clone());
        br.g = br.g.div_y();
        br.r -= 1;
        if br.r == 0 {
            return Ok(out);
        }
    }
    if br.r == 1 {
        out.push(hensel(&br, order)?);
        return Ok(out);
    }
    let pts: Vec<(usize, i64)> = (0..=br.r)
        .filter_map(|i| br.g.val(i).map(|v| (i, v as i64)))
        .collect();
    debug_assert_eq!(pts.last().map(|p| p.1), Some(0));
    for (a, b, slope) in lower_hull(&pts) {
        let (i0, v0) = pts[a];
        let (i1, _) = pts[b];
        let q = *slope.denom() as usize;
        let h = *slope.numer() as usize;
        // residual polynomial φ(z) = Σ lc_i z^{(i − i0)/q} over points on the segment
        let mut phi = vec![FieldElem::new(br.g.k.clone(), br.g.k.zero()); (i1 - i0) / q + 1];
        for &(i, v) in &pts[a..=b] {
            if Q::from_integer(v0 - v) == slope * (i - i0) as i64 {
                phi[(i - i0) / q] = FieldElem::new(br.g.k.clone(), br.g.c[i][v as usize].clone());
            }
        }
        for (z0, mu) in tower.roots_of(&phi)? {
            let gamma = tower.nth_root(&z0, q as u64)?;
            let k = if gamma.field().index() > br.g.k.index() {
                gamma.field().clone()
            } else {
                br.g.k.clone()
            };
            let g = br.g.embed(&k);
            let gamma = gamma.embed(&k);
            let e2 = br.e * q as i64;
            let m2 = br.m + Q::new(h as i64, e2);
            let child = Branch {
                g: g.blow(q, h, gamma.coords()),
                e: e2,
                prefix: br
                    .prefix
                    .embed(&k)
                    .add(&PuiseuxSeries::monomial(&gamma, m2)),
                m: m2,
                r: mu,
            };
            out.extend(expand(child, order, tower)?);
        }
    }
    Ok(out)
}

/// The unique root `y ∈ k[[s]]` with `y(0) = 0` when `∂G/∂y(0,0) ≠ 0`.
fn hensel(br: &Branch, order: Q) -> Result<PuiseuxSeries> {
    let k = &br.g.k;
    if br.g.val(1) != Some(0) {
        return Err(crate::error::invariant("Hensel step without a simple root"));
    }
    let len = ((order - br.m) * br.e).ceil().to_i64().unwrap_or(1).max(1) as usize + 1;
    let rows: Vec<Vec<Coords>> =
        br.g.c
            .iter()
            .map(|r| {
                let mut v: Vec<Coords> = r.iter().take(len).cloned().collect();
                v.resize(len, k.zero());
                v
            })
            .collect();
    let drows: Vec<Vec<Coords>> = rows
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, r)| {
            r.iter()
                .map(|x| k.scale(x, (i as u64 % k.p() as u64) as u32))
                .collect()
        })
        .collect();
    let horner = |rs: &[Vec<Coords>], y: &[Coords], m: usize| -> Vec<Coords> {
        let mut acc = vec![k.zero(); m];
        for row in rs.iter().rev() {
            acc = dense::mul(k, &acc, y, m);
            for (a, x) in acc.iter_mut().zip(row.iter()) {
                *a = k.add(a, x);
            }
        }
        acc
    };
    let mut y: Vec<Coords> = vec![k.zero()];
    let mut m = 1usize;
    while m < len {
        m = (2 * m).min(len);
        y.resize(m, k.zero());
        let gy = horner(&rows, &y, m);
        let dgy = horner(&drows, &y, m);
        let corr = dense::mul(k, &gy, &dense::inverse(k, &dgy), m);
        for i in 0..m {
            y[i] = k.sub(&y[i], &corr[i]);
        }
    }
    let mut yp = y.clone();
    while yp.last().is_some_and(|x| k.is_zero(x)) {
        yp.pop();
    }
    let exact = br.g.eval_exact(&yp).is_empty();
    let ys = PuiseuxSeries::from_dense(
        k.clone(),
        br.e,
        0,
        y,
        if exact { None } else { Some(len as i64) },
    );
    Ok(br.prefix.embed(k).add(&ys.shift(br.m)))
}

/// Integral gcd helper used by tests and callers that need `lcm` of denominators.
pub fn lcm_denominators<I: IntoIterator<Item = Q>>(qs: I) -> i64 {
    qs.into_iter().fold(1i64, |acc, q| acc.lcm(q.denom()))
}
