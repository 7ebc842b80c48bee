//! Seeded random inputs: products of small factors over `F_p[t]` with
//! deliberately colliding residues.
//!
//! Polynomials are returned in the raw integer layout accepted by
//! [`ExactPoly::parse_and_normalize`] (`raw[i][j]` = coefficient of `x^i t^j`).

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::newton::ExactPoly;

pub type Raw = Vec<Vec<i64>>;

pub fn mul(a: &Raw, b: &Raw) -> Raw {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let wa = a.iter().map(|r| r.len()).max().unwrap_or(0);
    let wb = b.iter().map(|r| r.len()).max().unwrap_or(0);
    let mut out = vec![vec![0i64; (wa + wb).max(1)]; a.len() + b.len() - 1];
    for (i, ra) in a.iter().enumerate() {
        for (j, &ca) in ra.iter().enumerate() {
            if ca == 0 {
                continue;
            }
            for (k, rb) in b.iter().enumerate() {
                for (l, &cb) in rb.iter().enumerate() {
                    out[i + k][j + l] += ca * cb;
                }
            }
        }
    }
    out
}

pub fn product(fs: &[Raw]) -> Raw {
    fs.iter().skip(1).fold(fs[0].clone(), |acc, f| mul(&acc, f))
}

fn reduce(mut f: Raw, p: i64) -> Raw {
    for row in f.iter_mut() {
        for c in row.iter_mut() {
            *c = c.rem_euclid(p);
        }
    }
    f
}

/// `x − c(t)` for a polynomial `c` given by its coefficients.
pub fn linear(c: &[i64]) -> Raw {
    vec![c.iter().map(|v| -v).collect(), vec![1]]
}

/// `(x − s(t))^n − c·t^k` — a branch of slope `k/n` around the curve `x = s(t)`.
pub fn branch(n: usize, s: &[i64], c: i64, k: usize) -> Raw {
    let mut f = vec![vec![1i64]];
    for _ in 0..n {
        f = mul(&f, &linear(s));
    }
    let mut m = vec![0i64; k + 1];
    m[k] = -c;
    if f[0].len() < k + 1 {
        f[0].resize(k + 1, 0);
    }
    for (j, v) in m.into_iter().enumerate() {
        f[0][j] += v;
    }
    f
}

/// Multiplies by `t`.
pub fn times_t(f: &Raw) -> Raw {
    f.iter()
        .map(|r| {
            let mut v = vec![0];
            v.extend_from_slice(r);
            v
        })
        .collect()
}

pub fn degree(f: &Raw) -> usize {
    f.len().saturating_sub(1)
}

/// A random centre curve `s(t) = a + Σ c_j t^j` with at most `support` nonzero terms.
fn centre(rng: &mut ChaCha8Rng, p: i64, a: i64, support: usize) -> Vec<i64> {
    let mut s = vec![a];
    let terms = rng.gen_range(0..support);
    for _ in 0..terms {
        let j = rng.gen_range(1..=3usize);
        if s.len() <= j {
            s.resize(j + 1, 0);
        }
        s[j] = rng.gen_range(1..p);
    }
    s
}

fn random_factor(rng: &mut ChaCha8Rng, p: i64, residues: &[i64], max_deg: usize) -> Raw {
    let a = *residues.choose(rng).unwrap();
    let n = rng.gen_range(1..=max_deg.min(4));
    let s = centre(rng, p, a, 3);
    if n == 1 {
        return linear(&s);
    }
    let k = rng.gen_range(1..=4usize);
    branch(n, &s, rng.gen_range(1..p), k)
}

/// A random squarefree input of degree `≤ max_deg` over `F_p`.
pub fn random_input(rng: &mut ChaCha8Rng, p: u64, max_deg: usize) -> (Raw, ExactPoly) {
    let pi = p as i64;
    loop {
        let k = rng.gen_range(1..=3usize);
        let residues: Vec<i64> = (0..k).map(|_| rng.gen_range(0..pi)).collect();
        let target = rng.gen_range(2..=max_deg);
        let mut fs = vec![];
        let mut deg = 0;
        while deg < target {
            let f = random_factor(rng, pi, &residues, target - deg);
            deg += degree(&f);
            fs.push(f);
        }
        let mut f = product(&fs);
        if rng.gen_bool(0.2) {
            f = times_t(&f);
        }
        let f = reduce(f, pi);
        match ExactPoly::parse_and_normalize(p, &f) {
            Ok(e) => return (f, e),
            Err(Error::NotSquarefree(_)) => continue,
            Err(e) => panic!("corpus generator produced an invalid input: {e}"),
        }
    }
}

/// Products of linear and Eisenstein-type factors at pairwise distinct residues.
pub fn random_base_case(rng: &mut ChaCha8Rng, p: u64, max_deg: usize) -> (Raw, ExactPoly, i64) {
    let pi = p as i64;
    loop {
        let mut residues: Vec<i64> = (0..pi).collect();
        residues.shuffle(rng);
        let mut fs = vec![];
        let mut deg = 0;
        let mut expect = 0i64;
        let target = rng.gen_range(1..=max_deg);
        for &a in &residues {
            if deg >= target {
                break;
            }
            let n = rng.gen_range(1..=(target - deg).min(5));
            let s = centre(rng, pi, a, 3);
            let f = if n == 1 {
                let mut s = s;
                // an exact root or a higher-order perturbation: either way weight 1
                if rng.gen_bool(0.5) {
                    s.truncate(1);
                }
                linear(&s)
            } else {
                branch(n, &s, rng.gen_range(1..pi), 1)
            };
            expect += n as i64 - 1;
            deg += n;
            fs.push(f);
        }
        let f = reduce(product(&fs), pi);
        match ExactPoly::parse_and_normalize(p, &f) {
            Ok(e) => return (f, e, expect),
            Err(Error::NotSquarefree(_)) => continue,
            Err(e) => panic!("corpus generator produced an invalid input: {e}"),
        }
    }
}

/// At least four distinct irreducible factors through one point, plus optional extras.
pub fn random_heavy_collision(rng: &mut ChaCha8Rng, p: u64, max_deg: usize) -> (Raw, ExactPoly) {
    let pi = p as i64;
    loop {
        let a = rng.gen_range(0..pi);
        let mut fs = vec![];
        let mut deg = 0;
        let count = rng.gen_range(4..=max_deg.min(6));
        let mut used: Vec<Vec<i64>> = vec![];
        while fs.len() < count {
            // linear factors through (a, 0) with distinct first-order terms, or small branches
            if deg + 2 <= max_deg && rng.gen_bool(0.25) && fs.len() + 1 < count {
                let k = [1usize, 3][rng.gen_range(0..2)];
                fs.push(branch(2, &[a], rng.gen_range(1..pi), k));
                deg += 2;
                continue;
            }
            let mut s = centre(rng, pi, a, 3);
            if s.len() < 2 {
                s.push(0);
            }
            if used.contains(&s) {
                continue;
            }
            used.push(s.clone());
            fs.push(linear(&s));
            deg += 1;
        }
        let f = reduce(product(&fs), pi);
        if degree(&f) > max_deg {
            continue;
        }
        match ExactPoly::parse_and_normalize(p, &f) {
            Ok(e) => return (f, e),
            Err(Error::NotSquarefree(_)) => continue,
            Err(e) => panic!("corpus generator produced an invalid input: {e}"),
        }
    }
}
