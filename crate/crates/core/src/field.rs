//! Finite fields `F_{p^m}` arranged in a single divisibility chain.
//!
//! Every field in a [`FieldTower`] is cut out over `F_p` by the smallest monic
//! irreducible polynomial of its degree (coefficient vectors read as base-`p`
//! numbers, constant term least significant). Consecutive fields are linked by
//! sending the generator to the lexicographically smallest root of its
//! minimal polynomial in the next field, so every pair of registered fields
//! has exactly one embedding and all embedding diagrams commute.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smallvec::{smallvec, SmallVec};

use crate::error::{Error, Result};

/// Coordinates of a field element in the power basis of its field.
pub type Coords = SmallVec<[u32; 8]>;

static TOWER_IDS: AtomicU64 = AtomicU64::new(1);

/// One field `F_p[X]/(m(X))` of the chain.
pub struct ExtField {
    p: u32,
    degree: usize,
    index: usize,
    tower: u64,
    modulus: Vec<u32>,
    next: OnceLock<Link>,
}

struct Link {
    field: Arc<ExtField>,
    // images[i] = image of X^i in the next field
    images: Vec<Coords>,
}

impl fmt::Debug for ExtField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{}#{}", self.p, self.degree, self.index)
    }
}

#[inline]
fn addm(a: u32, b: u32, p: u32) -> u32 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
fn subm(a: u32, b: u32, p: u32) -> u32 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

fn inv_mod_p(a: u32, p: u32) -> u32 {
    debug_assert!(!a.is_multiple_of(p));
    let mut r = 1u64;
    let mut b = a as u64 % p as u64;
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

impl ExtField {
    pub fn p(&self) -> u32 {
        self.p
    }

    /// Degree over the prime field.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Position in the chain; stable for the lifetime of the tower.
    pub fn index(&self) -> usize {
        self.index
    }

    /// Defining polynomial over `F_p`, little endian, monic.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// Number of elements `p^degree`.
    pub fn order(&self) -> BigUint {
        BigUint::from(self.p).pow(self.degree as u32)
    }

    pub fn zero(&self) -> Coords {
        smallvec![0; self.degree]
    }

    pub fn one(&self) -> Coords {
        let mut c = self.zero();
        c[0] = 1;
        c
    }

    pub fn from_i64(&self, v: i64) -> Coords {
        let mut c = self.zero();
        c[0] = v.rem_euclid(self.p as i64) as u32;
        c
    }

    pub fn is_zero(&self, a: &[u32]) -> bool {
        a.iter().all(|&x| x == 0)
    }

    pub fn is_one(&self, a: &[u32]) -> bool {
        a[0] == 1 && a[1..].iter().all(|&x| x == 0)
    }

    pub fn add(&self, a: &[u32], b: &[u32]) -> Coords {
        a.iter().zip(b).map(|(&x, &y)| addm(x, y, self.p)).collect()
    }

    pub fn sub(&self, a: &[u32], b: &[u32]) -> Coords {
        a.iter().zip(b).map(|(&x, &y)| subm(x, y, self.p)).collect()
    }

    pub fn neg(&self, a: &[u32]) -> Coords {
        a.iter().map(|&x| subm(0, x, self.p)).collect()
    }

    pub fn scale(&self, a: &[u32], s: u32) -> Coords {
        let p = self.p as u64;
        a.iter()
            .map(|&x| (x as u64 * s as u64 % p) as u32)
            .collect()
    }

    pub fn mul(&self, a: &[u32], b: &[u32]) -> Coords {
        let p = self.p as u64;
        let d = self.degree;
        if d == 1 {
            return smallvec![(a[0] as u64 * b[0] as u64 % p) as u32];
        }
        let mut prod = [0u64; 64];
        let prod = &mut prod[..2 * d - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] += x as u64 * y as u64;
            }
        }
        self.reduce_wide(prod)
    }

    /// Reduces an unreduced product of length `2d-1` whose entries are below `2^63 / d`.
    pub(crate) fn reduce_wide(&self, prod: &mut [u64]) -> Coords {
        let p = self.p as u64;
        let d = self.degree;
        for k in (d..prod.len()).rev() {
            let c = prod[k] % p;
            if c == 0 {
                continue;
            }
            let nc = p - c;
            for i in 0..d {
                let m = self.modulus[i] as u64;
                if m != 0 {
                    prod[k - d + i] += nc * m;
                }
            }
        }
        prod[..d].iter().map(|&x| (x % p) as u32).collect()
    }

    pub fn inv(&self, a: &[u32]) -> Option<Coords> {
        if self.is_zero(a) {
            return None;
        }
        if self.degree == 1 {
            return Some(smallvec![inv_mod_p(a[0], self.p)]);
        }
        let p = self.p;
        let mut r0: Vec<u32> = self.modulus.clone();
        let mut r1: Vec<u32> = a.to_vec();
        fp_trim(&mut r1);
        let mut s0: Vec<u32> = vec![];
        let mut s1: Vec<u32> = vec![1];
        while !r1.is_empty() {
            let (q, r) = fp_divrem(&r0, &r1, p);
            let qs = fp_mul(&q, &s1, p);
            let ns = fp_sub(&s0, &qs, p);
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, ns);
        }
        debug_assert_eq!(r0.len(), 1);
        let c = inv_mod_p(r0[0], p);
        let mut out = self.zero();
        for (i, &x) in s0.iter().enumerate() {
            out[i] = (x as u64 * c as u64 % p as u64) as u32;
        }
        Some(out)
    }

    pub fn pow(&self, a: &[u32], mut e: u64) -> Coords {
        let mut r = self.one();
        let mut b: Coords = a.into();
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(&r, &b);
            }
            e >>= 1;
            if e > 0 {
                b = self.mul(&b, &b);
            }
        }
        r
    }

    pub fn pow_big(&self, a: &[u32], e: &BigUint) -> Coords {
        let mut r = self.one();
        let bits = e.bits();
        for i in (0..bits).rev() {
            r = self.mul(&r, &r);
            if e.bit(i) {
                r = self.mul(&r, a);
            }
        }
        r
    }

    /// The Frobenius `a -> a^p`.
    pub fn frobenius(&self, a: &[u32]) -> Coords {
        self.pow(a, self.p as u64)
    }

    fn link(&self) -> Option<&Link> {
        self.next.get()
    }

    /// Image of `a` in `target`, which must sit at or above this field in the chain.
    pub fn embed_into(&self, a: &[u32], target: &ExtField) -> Coords {
        assert_eq!(self.tower, target.tower, "elements from different towers");
        assert!(
            self.index <= target.index,
            "embedding goes up the chain only"
        );
        let mut val: Coords = a.into();
        let mut cur: &ExtField = self;
        while cur.index < target.index {
            let link = cur
                .link()
                .expect("chain link missing below a registered field");
            let nf = &link.field;
            let mut acc = [0u64; 64];
            let acc = &mut acc[..nf.degree];
            for (i, &x) in val.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                for (j, &y) in link.images[i].iter().enumerate() {
                    acc[j] += x as u64 * y as u64;
                }
            }
            let p = nf.p as u64;
            val = acc.iter().map(|&x| (x % p) as u32).collect();
            cur = nf;
        }
        val
    }

    /// Lexicographic comparison of coordinate vectors, constant coordinate first.
    pub fn cmp_coords(a: &[u32], b: &[u32]) -> Ordering {
        a.cmp(b)
    }
}

// ---------------------------------------------------------------------------
// Polynomials over F_p as plain coefficient vectors (used for field moduli).

fn fp_trim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn fp_sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let n = a.len().max(b.len());
    let mut out: Vec<u32> = (0..n)
        .map(|i| subm(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0), p))
        .collect();
    fp_trim(&mut out);
    out
}

fn fp_mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    let mut out: Vec<u32> = out.into_iter().map(|x| x as u32).collect();
    fp_trim(&mut out);
    out
}

fn fp_divrem(a: &[u32], b: &[u32], p: u32) -> (Vec<u32>, Vec<u32>) {
    let mut r = a.to_vec();
    fp_trim(&mut r);
    if r.len() < b.len() {
        return (vec![], r);
    }
    let inv = inv_mod_p(*b.last().unwrap(), p) as u64;
    let mut q = vec![0u32; r.len() - b.len() + 1];
    for k in (0..q.len()).rev() {
        let c = (r[k + b.len() - 1] as u64 * inv % p as u64) as u32;
        q[k] = c;
        if c != 0 {
            for (j, &y) in b.iter().enumerate() {
                let t = (c as u64 * y as u64 % p as u64) as u32;
                r[k + j] = subm(r[k + j], t, p);
            }
        }
    }
    fp_trim(&mut r);
    fp_trim(&mut q);
    (q, r)
}

// ---------------------------------------------------------------------------
// Dense univariate polynomials with coefficients in one `ExtField`.

pub(crate) mod upoly {
    use super::*;

    pub type P = Vec<Coords>;

    pub fn trim(k: &ExtField, f: &mut P) {
        while f.last().is_some_and(|c| k.is_zero(c)) {
            f.pop();
        }
    }

    pub fn deg(f: &P) -> isize {
        f.len() as isize - 1
    }

    pub fn sub(k: &ExtField, a: &P, b: &P) -> P {
        let n = a.len().max(b.len());
        let z = k.zero();
        let mut out: P = (0..n)
            .map(|i| k.sub(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z)))
            .collect();
        trim(k, &mut out);
        out
    }

    pub fn mul(k: &ExtField, a: &P, b: &P) -> P {
        if a.is_empty() || b.is_empty() {
            return vec![];
        }
        let mut out = vec![k.zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if k.is_zero(x) {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                let t = k.mul(x, y);
                out[i + j] = k.add(&out[i + j], &t);
            }
        }
        trim(k, &mut out);
        out
    }

    pub fn divrem(k: &ExtField, a: &P, b: &P) -> (P, P) {
        assert!(!b.is_empty(), "division by the zero polynomial");
        let mut r = a.clone();
        trim(k, &mut r);
        if r.len() < b.len() {
            return (vec![], r);
        }
        let inv = k.inv(b.last().unwrap()).unwrap();
        let mut q = vec![k.zero(); r.len() - b.len() + 1];
        for i in (0..q.len()).rev() {
            let c = k.mul(&r[i + b.len() - 1], &inv);
            if !k.is_zero(&c) {
                for (j, y) in b.iter().enumerate() {
                    let t = k.mul(&c, y);
                    r[i + j] = k.sub(&r[i + j], &t);
                }
            }
            q[i] = c;
        }
        trim(k, &mut r);
        trim(k, &mut q);
        (q, r)
    }

    pub fn rem(k: &ExtField, a: &P, b: &P) -> P {
        divrem(k, a, b).1
    }

    pub fn monic(k: &ExtField, a: &P) -> P {
        match a.last() {
            None => vec![],
            Some(l) => {
                let inv = k.inv(l).unwrap();
                a.iter().map(|c| k.mul(c, &inv)).collect()
            }
        }
    }

    pub fn gcd(k: &ExtField, a: &P, b: &P) -> P {
        let mut x = a.clone();
        let mut y = b.clone();
        trim(k, &mut x);
        trim(k, &mut y);
        while !y.is_empty() {
            let r = rem(k, &x, &y);
            x = std::mem::replace(&mut y, r);
        }
        monic(k, &x)
    }

    pub fn derivative(k: &ExtField, a: &P) -> P {
        let mut out: P = a
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| k.scale(c, (i as u64 % k.p() as u64) as u32))
            .collect();
        trim(k, &mut out);
        out
    }

    pub fn mulmod(k: &ExtField, a: &P, b: &P, m: &P) -> P {
        rem(k, &mul(k, a, b), m)
    }

    pub fn powmod(k: &ExtField, base: &P, e: &BigUint, m: &P) -> P {
        let mut r: P = vec![k.one()];
        r = rem(k, &r, m);
        let b = rem(k, base, m);
        for i in (0..e.bits()).rev() {
            r = mulmod(k, &r, &r, m);
            if e.bit(i) {
                r = mulmod(k, &r, &b, m);
            }
        }
        r
    }
}

// ---------------------------------------------------------------------------

/// An element of some field in a tower, tagged with that field.
#[derive(Clone)]
pub struct FieldElem {
    field: Arc<ExtField>,
    c: Coords,
}

impl FieldElem {
    pub fn new(field: Arc<ExtField>, c: Coords) -> Self {
        debug_assert_eq!(c.len(), field.degree);
        FieldElem { field, c }
    }

    pub fn field(&self) -> &Arc<ExtField> {
        &self.field
    }

    pub fn field_id(&self) -> usize {
        self.field.index
    }

    pub fn coords(&self) -> &Coords {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.field.is_zero(&self.c)
    }

    pub fn is_one(&self) -> bool {
        self.field.is_one(&self.c)
    }

    pub fn zero_like(&self) -> Self {
        FieldElem::new(self.field.clone(), self.field.zero())
    }

    pub fn one_like(&self) -> Self {
        FieldElem::new(self.field.clone(), self.field.one())
    }

    /// Image of `self` in `target` (which must contain its field).
    pub fn embed(&self, target: &Arc<ExtField>) -> FieldElem {
        if Arc::ptr_eq(&self.field, target) {
            return self.clone();
        }
        FieldElem::new(target.clone(), self.field.embed_into(&self.c, target))
    }

    fn lift2(&self, other: &FieldElem) -> (Arc<ExtField>, Coords, Coords) {
        if Arc::ptr_eq(&self.field, &other.field) {
            return (self.field.clone(), self.c.clone(), other.c.clone());
        }
        if self.field.index >= other.field.index {
            let b = other.field.embed_into(&other.c, &self.field);
            (self.field.clone(), self.c.clone(), b)
        } else {
            let a = self.field.embed_into(&self.c, &other.field);
            (other.field.clone(), a, other.c.clone())
        }
    }

    pub fn add(&self, other: &FieldElem) -> FieldElem {
        let (k, a, b) = self.lift2(other);
        let c = k.add(&a, &b);
        FieldElem::new(k, c)
    }

    pub fn sub(&self, other: &FieldElem) -> FieldElem {
        let (k, a, b) = self.lift2(other);
        let c = k.sub(&a, &b);
        FieldElem::new(k, c)
    }

    pub fn mul(&self, other: &FieldElem) -> FieldElem {
        let (k, a, b) = self.lift2(other);
        let c = k.mul(&a, &b);
        FieldElem::new(k, c)
    }

    pub fn neg(&self) -> FieldElem {
        FieldElem::new(self.field.clone(), self.field.neg(&self.c))
    }

    pub fn inv(&self) -> Option<FieldElem> {
        self.field
            .inv(&self.c)
            .map(|c| FieldElem::new(self.field.clone(), c))
    }

    pub fn pow(&self, e: u64) -> FieldElem {
        FieldElem::new(self.field.clone(), self.field.pow(&self.c, e))
    }

    /// Multiplication by an integer.
    pub fn scale(&self, s: i64) -> FieldElem {
        let s = s.rem_euclid(self.field.p as i64) as u32;
        FieldElem::new(self.field.clone(), self.field.scale(&self.c, s))
    }

    /// Deterministic total order: lexicographic coordinates in the larger of the two fields.
    pub fn cmp_lex(&self, other: &FieldElem) -> Ordering {
        let (_, a, b) = self.lift2(other);
        a.cmp(&b)
    }
}

impl PartialEq for FieldElem {
    fn eq(&self, other: &Self) -> bool {
        let (_, a, b) = self.lift2(other);
        a == b
    }
}

impl Eq for FieldElem {}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.c[1..].iter().all(|&x| x == 0) {
            write!(f, "{}", self.c[0])
        } else {
            write!(f, "[")?;
            for (i, x) in self.c.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", x)?;
            }
            write!(f, "]@{}", self.field.degree)
        }
    }
}

// ---------------------------------------------------------------------------

/// A lazily growing chain `F_p = K_0 ⊂ K_1 ⊂ ...` with `[K_i : F_p] | [K_{i+1} : F_p]`.
///
/// Reads are concurrent; growth is serialized and idempotent.
pub struct FieldTower {
    p: u32,
    max_degree: usize,
    id: u64,
    fields: RwLock<Vec<Arc<ExtField>>>,
    grow: Mutex<()>,
    unity: Mutex<HashMap<u64, FieldElem>>,
}

impl fmt::Debug for FieldTower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let degs: Vec<usize> = self.fields().iter().map(|k| k.degree).collect();
        write!(f, "FieldTower(p={}, chain={:?})", self.p, degs)
    }
}

pub const DEFAULT_MAX_EXTENSION: usize = 24;

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: usize) -> Vec<usize> {
    let mut out = vec![];
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

impl FieldTower {
    /// A tower over `F_p` whose fields may have degree at most `max_degree`.
    pub fn new(p: u64, max_degree: usize) -> Result<Arc<FieldTower>> {
        if !(3..65536).contains(&p) || !is_prime(p) {
            return Err(Error::InvalidPrime(p));
        }
        let id = TOWER_IDS.fetch_add(1, AtomicOrdering::Relaxed);
        let prime = Arc::new(ExtField {
            p: p as u32,
            degree: 1,
            index: 0,
            tower: id,
            modulus: vec![0, 1],
            next: OnceLock::new(),
        });
        Ok(Arc::new(FieldTower {
            p: p as u32,
            max_degree: max_degree.max(1),
            id,
            fields: RwLock::new(vec![prime]),
            grow: Mutex::new(()),
            unity: Mutex::new(HashMap::new()),
        }))
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn fields(&self) -> Vec<Arc<ExtField>> {
        self.fields.read().unwrap().clone()
    }

    pub fn field(&self, id: usize) -> Arc<ExtField> {
        self.fields.read().unwrap()[id].clone()
    }

    pub fn prime_field(&self) -> Arc<ExtField> {
        self.field(0)
    }

    /// Degrees of the registered fields, bottom to top.
    pub fn degrees(&self) -> Vec<usize> {
        self.fields().iter().map(|k| k.degree).collect()
    }

    pub fn elem(&self, v: i64) -> FieldElem {
        let k = self.prime_field();
        let c = k.from_i64(v);
        FieldElem::new(k, c)
    }

    fn owns(&self, k: &ExtField) -> bool {
        k.tower == self.id
    }

    /// The smallest registered field whose degree is a multiple of `m`, extending the chain if needed.
    pub fn field_with_degree_multiple(&self, m: usize) -> Result<Arc<ExtField>> {
        if let Some(k) = self.fields().into_iter().find(|k| k.degree % m == 0) {
            return Ok(k);
        }
        let _guard = self.grow.lock().unwrap();
        if let Some(k) = self.fields().into_iter().find(|k| k.degree % m == 0) {
            return Ok(k);
        }
        let top = self.fields().last().unwrap().clone();
        let new_degree = top.degree.lcm(&m);
        if new_degree > self.max_degree {
            return Err(Error::ExtensionDegreeExceeded {
                needed: new_degree,
                cap: self.max_degree,
            });
        }
        let modulus = smallest_irreducible(self.p, new_degree);
        let nf = Arc::new(ExtField {
            p: self.p,
            degree: new_degree,
            index: top.index + 1,
            tower: self.id,
            modulus,
            next: OnceLock::new(),
        });
        // generator image: smallest root of the old modulus inside the new field
        let lifted: upoly::P = top.modulus.iter().map(|&c| nf.from_i64(c as i64)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ new_degree as u64);
        let mut roots = split_linear(&nf, &lifted, &mut rng);
        roots.sort();
        let g = roots[0].clone();
        let mut images = Vec::with_capacity(top.degree);
        let mut acc = nf.one();
        for _ in 0..top.degree {
            images.push(acc.clone());
            acc = nf.mul(&acc, &g);
        }
        top.next
            .set(Link {
                field: nf.clone(),
                images,
            })
            .ok()
            .expect("chain link set twice");
        self.fields.write().unwrap().push(nf.clone());
        Ok(nf)
    }

    fn common_field(&self, poly: &[FieldElem]) -> Arc<ExtField> {
        let mut k = self.prime_field();
        for c in poly {
            assert!(self.owns(&c.field), "coefficient from a foreign tower");
            if c.field.index > k.index {
                k = c.field.clone();
            }
        }
        k
    }

    fn to_upoly(&self, poly: &[FieldElem]) -> (Arc<ExtField>, upoly::P) {
        let k = self.common_field(poly);
        let mut f: upoly::P = poly.iter().map(|c| c.embed(&k).c).collect();
        upoly::trim(&k, &mut f);
        (k, f)
    }

    /// Registry id of a field over which `poly` splits into linear factors.
    pub fn ensure_splitting_field(&self, poly: &[FieldElem]) -> Result<usize> {
        let (k, f) = self.to_upoly(poly);
        if f.is_empty() {
            return Err(Error::InvalidInput(
                "zero polynomial has no splitting field".into(),
            ));
        }
        if f.len() <= 2 {
            return Ok(k.index);
        }
        let sq = self.squarefree_part(&k, &f)?;
        let l = ddf(&k, &sq).iter().fold(1usize, |acc, (d, _)| acc.lcm(d));
        Ok(self.field_with_degree_multiple(k.degree * l)?.index)
    }

    fn squarefree_part(&self, k: &ExtField, f: &upoly::P) -> Result<upoly::P> {
        if (f.len() - 1) as u64 >= self.p as u64 {
            return Err(Error::InvalidInput(format!(
                "root finding needs degree below p = {}",
                self.p
            )));
        }
        let f = upoly::monic(k, f);
        let g = upoly::gcd(k, &f, &upoly::derivative(k, &f));
        Ok(upoly::divrem(k, &f, &g).0)
    }

    /// All roots with multiplicities, sorted lexicographically by their
    /// coordinates in the splitting field. Each root is returned in the
    /// smallest registered field containing it.
    pub fn roots_of(&self, poly: &[FieldElem]) -> Result<Vec<(FieldElem, usize)>> {
        let (k, f) = self.to_upoly(poly);
        if f.is_empty() {
            return Err(Error::InvalidInput("roots of the zero polynomial".into()));
        }
        if f.len() == 1 {
            return Ok(vec![]);
        }
        let f = upoly::monic(&k, &f);
        let sq = self.squarefree_part(&k, &f)?;
        let groups = ddf(&k, &sq);
        let l = groups.iter().fold(1usize, |acc, (d, _)| acc.lcm(d));
        let split = self.field_with_degree_multiple(k.degree * l)?;
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
        let mut roots: Vec<Coords> = vec![];
        for (d, g) in &groups {
            let kk = self.field_with_degree_multiple(k.degree * d)?;
            let ge: upoly::P = g.iter().map(|c| k.embed_into(c, &kk)).collect();
            for r in split_linear(&kk, &ge, &mut rng) {
                roots.push(kk.embed_into(&r, &split));
            }
        }
        roots.sort();
        let fs: upoly::P = f.iter().map(|c| k.embed_into(c, &split)).collect();
        let mut out = Vec::with_capacity(roots.len());
        for r in roots {
            let lin: upoly::P = vec![split.neg(&r), split.one()];
            let mut cur = fs.clone();
            let mut mult = 0;
            loop {
                let (q, rem) = upoly::divrem(&split, &cur, &lin);
                if !rem.is_empty() {
                    break;
                }
                mult += 1;
                cur = q;
            }
            debug_assert!(mult > 0);
            out.push((self.descend(&FieldElem::new(split.clone(), r)), mult));
        }
        Ok(out)
    }

    /// Rewrites `a` in the smallest registered field that contains it.
    pub fn descend(&self, a: &FieldElem) -> FieldElem {
        let kj = a.field.clone();
        for ki in self.fields() {
            if ki.index >= kj.index {
                break;
            }
            // a lies in K_i iff it is fixed by the |K_i|-power Frobenius
            let mut b = a.c.clone();
            for _ in 0..ki.degree {
                b = kj.frobenius(&b);
            }
            if b != a.c {
                continue;
            }
            if let Some(pre) = preimage(&ki, &kj, &a.c) {
                return FieldElem::new(ki, pre);
            }
        }
        a.clone()
    }

    /// The `n` distinct `n`-th roots of unity `1, ζ, ζ^2, ...` for the designated primitive `ζ`.
    pub fn nth_roots_of_unity(&self, n: u64) -> Result<Vec<FieldElem>> {
        let z = self.primitive_root_of_unity(n)?;
        let mut out = Vec::with_capacity(n as usize);
        let mut acc = z.one_like();
        for _ in 0..n {
            out.push(acc.clone());
            acc = acc.mul(&z);
        }
        Ok(out)
    }

    /// The designated primitive `n`-th root of unity: the first of order exactly `n`
    /// among the sorted roots of `x^n - 1`.
    pub fn primitive_root_of_unity(&self, n: u64) -> Result<FieldElem> {
        if n == 0 || n.is_multiple_of(self.p as u64) {
            return Err(Error::WildRamification { n, p: self.p });
        }
        if let Some(z) = self.unity.lock().unwrap().get(&n) {
            return Ok(z.clone());
        }
        let mut poly = vec![self.elem(0); n as usize + 1];
        poly[0] = self.elem(-1);
        poly[n as usize] = self.elem(1);
        let roots = self.roots_of(&poly)?;
        let primes = prime_factors(n as usize);
        let z = roots
            .into_iter()
            .map(|(r, _)| r)
            .find(|r| primes.iter().all(|&q| !r.pow(n / q as u64).is_one()))
            .ok_or_else(|| crate::error::invariant("no primitive root of unity found"))?;
        self.unity.lock().unwrap().insert(n, z.clone());
        Ok(z)
    }

    /// The designated `n`-th root of `c`: the first root of `x^n - c` in sorted order.
    pub fn nth_root(&self, c: &FieldElem, n: u64) -> Result<FieldElem> {
        if n.is_multiple_of(self.p as u64) {
            return Err(Error::WildRamification { n, p: self.p });
        }
        if n == 1 {
            return Ok(c.clone());
        }
        if c.is_zero() {
            return Ok(c.clone());
        }
        let mut poly = vec![c.zero_like(); n as usize + 1];
        poly[0] = c.neg();
        poly[n as usize] = c.one_like();
        let roots = self.roots_of(&poly)?;
        Ok(roots[0].0.clone())
    }
}

/// Distinct-degree factorization of a monic squarefree polynomial over `k`.
fn ddf(k: &ExtField, f: &upoly::P) -> Vec<(usize, upoly::P)> {
    let mut out = vec![];
    let mut g = f.clone();
    let x: upoly::P = vec![k.zero(), k.one()];
    let mut h = upoly::rem(k, &x, &g);
    let pe = BigUint::from(k.p());
    let mut d = 0;
    while upoly::deg(&g) >= 2 * (d as isize + 1) {
        d += 1;
        for _ in 0..k.degree() {
            h = upoly::powmod(k, &h, &pe, &g);
        }
        let c = upoly::gcd(k, &g, &upoly::sub(k, &h, &x));
        if upoly::deg(&c) > 0 {
            g = upoly::divrem(k, &g, &c).0;
            h = upoly::rem(k, &h, &g);
            out.push((d, c));
        }
    }
    if upoly::deg(&g) > 0 {
        out.push((upoly::deg(&g) as usize, g));
    }
    out
}

/// Roots of a monic squarefree polynomial that splits into linear factors over `k`.
fn split_linear(k: &ExtField, g: &upoly::P, rng: &mut ChaCha8Rng) -> Vec<Coords> {
    let g = upoly::monic(k, g);
    match upoly::deg(&g) {
        d if d <= 0 => return vec![],
        1 => return vec![k.neg(&g[0])],
        _ => {}
    }
    let e: BigUint = (k.order() - BigUint::one()) >> 1;
    loop {
        let a: Coords = (0..k.degree()).map(|_| rng.gen_range(0..k.p())).collect();
        let base: upoly::P = vec![a, k.one()];
        let mut h = upoly::powmod(k, &base, &e, &g);
        if h.is_empty() {
            continue;
        }
        h[0] = k.sub(&h[0], &k.one());
        upoly::trim(k, &mut h);
        let d = upoly::gcd(k, &g, &h);
        let dd = upoly::deg(&d);
        if dd > 0 && dd < upoly::deg(&g) {
            let rest = upoly::divrem(k, &g, &d).0;
            let mut out = split_linear(k, &d, rng);
            out.extend(split_linear(k, &rest, rng));
            return out;
        }
    }
}

/// Rabin's test for a monic polynomial over `F_p`.
fn is_irreducible_fp(p: u32, f: &[u32]) -> bool {
    let n = f.len() - 1;
    if n == 1 {
        return true;
    }
    if f[0] == 0 {
        return false;
    }
    let k = ExtField {
        p,
        degree: 1,
        index: 0,
        tower: 0,
        modulus: vec![0, 1],
        next: OnceLock::new(),
    };
    let fp: upoly::P = f.iter().map(|&c| smallvec![c]).collect();
    let x: upoly::P = vec![smallvec![0], smallvec![1]];
    let pe = BigUint::from(p);
    // x^(p^j) mod f for j = 1..n
    let mut pows = vec![];
    let mut h = x.clone();
    for _ in 0..n {
        h = upoly::powmod(&k, &h, &pe, &fp);
        pows.push(h.clone());
    }
    if !upoly::sub(&k, &pows[n - 1], &x).is_empty() {
        return false;
    }
    for r in prime_factors(n) {
        let hj = &pows[n / r - 1];
        let g = upoly::gcd(&k, &fp, &upoly::sub(&k, hj, &x));
        if upoly::deg(&g) != 0 {
            return false;
        }
    }
    true
}

/// Smallest monic irreducible polynomial of degree `n` over `F_p`.
pub fn smallest_irreducible(p: u32, n: usize) -> Vec<u32> {
    if n == 1 {
        return vec![0, 1];
    }
    let mut counter: u128 = 1;
    loop {
        let mut f = vec![0u32; n + 1];
        let mut c = counter;
        for slot in f.iter_mut().take(n) {
            *slot = (c % p as u128) as u32;
            c /= p as u128;
        }
        f[n] = 1;
        if is_irreducible_fp(p, &f) {
            return f;
        }
        counter += 1;
    }
}

fn preimage(ki: &ExtField, kj: &ExtField, target: &[u32]) -> Option<Coords> {
    // columns: images of the basis of K_i in K_j
    let p = ki.p as u64;
    let di = ki.degree;
    let dj = kj.degree;
    let cols: Vec<Coords> = (0..di)
        .map(|b| {
            let mut e = ki.zero();
            e[b] = 1;
            ki.embed_into(&e, kj)
        })
        .collect();
    // augmented matrix dj x (di+1)
    let mut m: Vec<Vec<u64>> = (0..dj)
        .map(|r| {
            let mut row: Vec<u64> = cols.iter().map(|c| c[r] as u64).collect();
            row.push(target[r] as u64);
            row
        })
        .collect();
    let mut piv_cols = vec![];
    let mut row = 0;
    for col in 0..di {
        let Some(pr) = (row..dj).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(row, pr);
        let inv = inv_mod_p(m[row][col] as u32, p as u32) as u64;
        for x in m[row].iter_mut() {
            *x = *x * inv % p;
        }
        for r in 0..dj {
            if r != row && m[r][col] != 0 {
                let f = m[r][col];
                for c in 0..=di {
                    m[r][c] = (m[r][c] + (p - f) * m[row][c]) % p;
                }
            }
        }
        piv_cols.push(col);
        row += 1;
    }
    if (row..dj).any(|r| m[r][di] != 0) {
        return None;
    }
    let mut out = ki.zero();
    for (r, &c) in piv_cols.iter().enumerate() {
        out[c] = m[r][di] as u32;
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_arithmetic() {
        let t = FieldTower::new(7, 24).unwrap();
        let a = t.elem(3);
        let b = t.elem(5);
        assert_eq!(a.mul(&b), t.elem(1));
        assert_eq!(a.inv().unwrap(), t.elem(5));
    }

    #[test]
    fn smallest_irreducibles() {
        // x^2 + 1 is irreducible over F_3; over F_7, x^2 + 1 is the first too
        assert_eq!(smallest_irreducible(3, 2), vec![1, 0, 1]);
        assert_eq!(smallest_irreducible(7, 2), vec![1, 0, 1]);
        // over F_5, x^2 + 2 is the first (x^2 + 1 splits since -1 = 2^2)
        assert_eq!(smallest_irreducible(5, 2), vec![2, 0, 1]);
    }

    #[test]
    fn cube_roots_of_unity_mod_7() {
        let t = FieldTower::new(7, 24).unwrap();
        let r = t.nth_roots_of_unity(3).unwrap();
        let v: Vec<u32> = r.iter().map(|x| x.coords()[0]).collect();
        assert_eq!(v, vec![1, 2, 4]);
    }

    #[test]
    fn extension_roots() {
        let t = FieldTower::new(5, 24).unwrap();
        // x^2 - 2 is irreducible over F_5
        let poly = vec![t.elem(-2), t.elem(0), t.elem(1)];
        let roots = t.roots_of(&poly).unwrap();
        assert_eq!(roots.len(), 2);
        for (r, m) in &roots {
            assert_eq!(*m, 1);
            assert_eq!(r.field().degree(), 2);
            assert_eq!(r.mul(r), t.elem(2));
        }
        // descending an element of the prime field
        let one = t.elem(1).embed(roots[0].0.field());
        assert_eq!(t.descend(&one).field_id(), 0);
    }

    #[test]
    fn chain_grows_by_lcm() {
        let t = FieldTower::new(7, 24).unwrap();
        t.field_with_degree_multiple(2).unwrap();
        t.field_with_degree_multiple(3).unwrap();
        assert_eq!(t.degrees(), vec![1, 2, 6]);
        assert!(matches!(
            t.field_with_degree_multiple(5),
            Err(Error::ExtensionDegreeExceeded {
                needed: 30,
                cap: 24
            })
        ));
    }

    #[test]
    fn multiplicities() {
        let t = FieldTower::new(11, 24).unwrap();
        // (x-1)^2 (x+2) = x^3 - 3x + 2
        let poly = vec![t.elem(2), t.elem(-3), t.elem(0), t.elem(1)];
        let roots = t.roots_of(&poly).unwrap();
        let v: Vec<(u32, usize)> = roots.iter().map(|(r, m)| (r.coords()[0], *m)).collect();
        assert_eq!(v, vec![(1, 2), (9, 1)]);
    }
}
