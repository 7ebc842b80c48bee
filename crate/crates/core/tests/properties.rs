//! Randomized invariants of the arithmetic kernels and of the root/tree layer.
//!
//! Each property draws a seed from proptest and expands it into structured
//! data with a seeded generator, so failures shrink to a single reproducible seed.

use std::sync::Arc;

use conddisc::corpus::random_input;
use conddisc::field::{Coords, ExtField, FieldElem, FieldTower};
use conddisc::newton::{puiseux_roots, ExactPoly, RootSystem, Slope};
use conddisc::puiseux::{PuiseuxSeries, Q};
use conddisc::tree::{characteristic_exponents, disc_from_tree, essential_exponents, RootTable};
use conddisc::Error;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PRIMES: [u64; 3] = [11, 13, 101];

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_elem(rng: &mut ChaCha8Rng, k: &Arc<ExtField>) -> FieldElem {
    let c: Coords = (0..k.degree()).map(|_| rng.gen_range(0..k.p())).collect();
    FieldElem::new(k.clone(), c)
}

fn random_unit(rng: &mut ChaCha8Rng, k: &Arc<ExtField>) -> FieldElem {
    loop {
        let a = random_elem(rng, k);
        if !a.is_zero() {
            return a;
        }
    }
}

/// An exact series in `t^{1/e}` with a few terms at exponents in `[lo, hi)`.
fn random_series(
    rng: &mut ChaCha8Rng,
    k: &Arc<ExtField>,
    e: i64,
    lo: i64,
    hi: i64,
) -> PuiseuxSeries {
    let n = rng.gen_range(1..=5);
    let mut exps: Vec<i64> = (0..n).map(|_| rng.gen_range(lo * e..hi * e)).collect();
    exps.sort();
    exps.dedup();
    let terms: Vec<(i64, Coords)> = exps
        .into_iter()
        .map(|j| (j, random_unit(rng, k).coords().clone()))
        .collect();
    PuiseuxSeries::from_terms(k.clone(), e, terms, None)
}

/// Roots of `f` at the first precision (doubling from `ν(Δ)/2 + 3`) that certifies.
fn roots(f: &ExactPoly) -> (RootSystem, Q) {
    let tower = FieldTower::new(f.p() as u64, 24).unwrap();
    let mut n = f.discriminant_valuation_direct() as i64 / 2 + 3;
    loop {
        let w = Q::from_integer(n);
        match puiseux_roots(f, w, &tower) {
            Ok(rs) => return (rs, w),
            Err(Error::PrecisionExhausted(_)) if n < 4096 => n *= 2,
            Err(e) => panic!("root computation failed: {e}"),
        }
    }
}

fn random_poly_input(seed: u64) -> (u64, ExactPoly) {
    let mut r = rng(seed);
    let p = PRIMES[(seed % 3) as usize];
    let (_, f) = random_input(&mut r, p, 8);
    (p, f)
}

/// Inputs whose splitting data fits the default extension cap.
fn within_caps(f: &ExactPoly) -> bool {
    let tower = FieldTower::new(f.p() as u64, 24).unwrap();
    !matches!(
        puiseux_roots(
            f,
            Q::from_integer(f.discriminant_valuation_direct() as i64 / 2 + 3),
            &tower
        ),
        Err(Error::ExtensionDegreeExceeded { .. })
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn field_axioms_and_frobenius(seed in any::<u64>(), pi in 0usize..3, m in prop::sample::select(vec![1usize, 2, 3, 4, 6])) {
        let p = PRIMES[pi];
        let tower = FieldTower::new(p, 24).unwrap();
        let k = tower.field_with_degree_multiple(m).unwrap();
        let mut r = rng(seed);
        let (a, b, c) = (random_elem(&mut r, &k), random_elem(&mut r, &k), random_elem(&mut r, &k));
        let zero = a.zero_like();
        let one = a.one_like();
        prop_assert_eq!(a.add(&b), b.add(&a));
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert_eq!(a.add(&zero), a.clone());
        prop_assert_eq!(a.mul(&one), a.clone());
        prop_assert!(a.add(&a.neg()).is_zero());
        if !a.is_zero() {
            prop_assert!(a.mul(&a.inv().unwrap()).is_one());
        } else {
            prop_assert!(a.inv().is_none());
        }
        let q = p.pow(k.degree() as u32);
        prop_assert_eq!(a.pow(q), a);
    }

    #[test]
    fn embeddings_commute(seed in any::<u64>(), pi in 0usize..3) {
        let p = PRIMES[pi];
        let tower = FieldTower::new(p, 24).unwrap();
        for m in [2usize, 6, 12] {
            tower.field_with_degree_multiple(m).unwrap();
        }
        let fields = tower.fields();
        let mut r = rng(seed);
        for i in 0..fields.len() {
            for j in i + 1..fields.len() {
                for l in j + 1..fields.len() {
                    for _ in 0..10 {
                        let a = random_elem(&mut r, &fields[i]);
                        let b = random_elem(&mut r, &fields[i]);
                        let via = a.embed(&fields[j]).embed(&fields[l]);
                        prop_assert_eq!(via, a.embed(&fields[l]));
                        // embeddings are ring homomorphisms
                        prop_assert_eq!(a.mul(&b).embed(&fields[l]), a.embed(&fields[l]).mul(&b.embed(&fields[l])));
                    }
                }
            }
        }
    }

    #[test]
    fn roots_of_account_for_the_degree(seed in any::<u64>(), pi in 0usize..3, deg in 1usize..6) {
        let p = PRIMES[pi];
        let tower = FieldTower::new(p, 24).unwrap();
        let k = tower.prime_field();
        let mut r = rng(seed);
        let mut poly: Vec<FieldElem> = (0..deg).map(|_| random_elem(&mut r, &k)).collect();
        poly.push(random_unit(&mut r, &k));
        let rs = tower.roots_of(&poly).unwrap();
        prop_assert_eq!(rs.iter().map(|(_, m)| m).sum::<usize>(), deg);
        for (x, _) in &rs {
            let v = poly.iter().rev().fold(x.zero_like(), |acc, c| acc.mul(x).add(c));
            prop_assert!(v.is_zero());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn valuation_is_ultrametric(seed in any::<u64>()) {
        let tower = FieldTower::new(PRIMES[(seed % 3) as usize], 24).unwrap();
        let k = tower.prime_field();
        let mut r = rng(seed);
        let ea = r.gen_range(1..=3);
        let eb = r.gen_range(1..=3);
        let a = random_series(&mut r, &k, ea, 0, 6);
        let b = random_series(&mut r, &k, eb, 0, 6);
        let (va, vb) = (a.valuation().unwrap(), b.valuation().unwrap());
        prop_assert_eq!(a.mul(&b).valuation(), Some(va + vb));
        match a.add(&b).valuation() {
            None => prop_assert!(va == vb),
            Some(v) => {
                prop_assert!(v >= va.min(vb));
                if va != vb {
                    prop_assert_eq!(v, va.min(vb));
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn functional_inverse_is_an_involution(seed in any::<u64>(), pi in 0usize..3, n in 2i64..10) {
        let p = PRIMES[pi];
        let tower = FieldTower::new(p, 24).unwrap();
        let k = tower.field_with_degree_multiple(1 + (seed % 2) as usize).unwrap();
        let mut r = rng(seed);
        let mut terms: Vec<(i64, Coords)> = vec![(1, random_unit(&mut r, &k).coords().clone())];
        for j in 2..n {
            terms.push((j, random_elem(&mut r, &k).coords().clone()));
        }
        let sigma = PuiseuxSeries::from_terms(k.clone(), 1, terms, Some(n));
        let tau = sigma.functional_inverse(n).unwrap();
        prop_assert_eq!(tau.precision(), Some(Q::from_integer(n)));
        let t = PuiseuxSeries::t(k.clone());
        let st = sigma.substitute(&tau, &tower).unwrap();
        let ts = tau.substitute(&sigma, &tower).unwrap();
        prop_assert!(st.agrees_with(&t) && st.precision() == Some(Q::from_integer(n)));
        prop_assert!(ts.agrees_with(&t) && ts.precision() == Some(Q::from_integer(n)));
        prop_assert!(tau.functional_inverse(n).unwrap().agrees_with(&sigma));
        // Lagrange inversion: [t^m] τ = (1/m) [s^{m−1}] (s/σ(s))^m
        let ratio = sigma.shift(-Q::one()).unit_inverse().unwrap();
        for m in 1..n {
            let lag = ratio.pow(m as u32).coeff(Q::from_integer(m - 1)).unwrap();
            let want = lag.mul(&tower.elem(m).inv().unwrap());
            prop_assert_eq!(tau.coeff(Q::from_integer(m)).unwrap(), want);
        }
    }

    #[test]
    fn nth_root_recovers_the_series(seed in any::<u64>(), pi in 0usize..3, n in prop::sample::select(vec![2u64, 3, 4, 5, 6])) {
        let p = PRIMES[pi];
        let tower = FieldTower::new(p, 24).unwrap();
        let k = tower.prime_field();
        let mut r = rng(seed);
        let e = r.gen_range(1..=4);
        let v = Q::new(r.gen_range(0..12), e);
        let lead = PuiseuxSeries::monomial(&random_unit(&mut r, &k), v);
        let tail = random_series(&mut r, &k, e, 1, 4);
        let prec = v + Q::from_integer(r.gen_range(2..6));
        let s = lead.add(&tail.shift(v)).add(&PuiseuxSeries::big_o(k.clone(), prec));
        let root = s.nth_root(n, None, &tower, None).unwrap();
        prop_assert_eq!(root.valuation(), Some(v / n as i64));
        let back = root.pow(n as u32);
        prop_assert!(back.agrees_with(&s));
        prop_assert!(back.precision().unwrap() >= prec);
    }

    #[test]
    fn characteristic_exponents_follow_essential_exponents(seed in any::<u64>()) {
        let tower = FieldTower::new(PRIMES[(seed % 3) as usize], 24).unwrap();
        let k = tower.prime_field();
        let mut r = rng(seed);
        let e = [1i64, 2, 3, 4, 6, 12][r.gen_range(0..6)];
        let s = random_series(&mut r, &k, e, 0, 5);
        let support: Vec<Q> = s.terms().into_iter().map(|(q, _)| q).filter(|q| !q.is_zero()).collect();
        prop_assume!(!support.is_empty());
        let s = s.sub(&PuiseuxSeries::constant(&s.constant_term()));
        let chars = characteristic_exponents(&s).unwrap();
        let ess = essential_exponents(&support, 1);
        let want: Vec<Q> = if ess[0].is_integer() { ess[1..].to_vec() } else { ess.clone() };
        prop_assert_eq!(chars, want);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn roots_satisfy_the_polynomial(seed in any::<u64>()) {
        let (_, f) = random_poly_input(seed);
        prop_assume!(within_caps(&f));
        let (rs, _) = roots(&f);
        for o in &rs.orbits {
            // tame irreducibility: orbit size is the ramification index
            prop_assert_eq!(o.n as i64, o.root.e());
            let v = f.eval_series(&o.root, &rs.tower);
            prop_assert!(v.is_zero(), "f(root) = {}", v);
        }
        prop_assert_eq!(rs.degree(), f.degree());
    }

    #[test]
    fn two_routes_to_the_discriminant(seed in any::<u64>()) {
        let (_, f) = random_poly_input(seed);
        prop_assume!(within_caps(&f));
        let (rs, _) = roots(&f);
        let deg = f.degree() as i64;
        let d = deg % 2;
        let pairs = rs.pair_valuation_sum().unwrap();
        let direct = f.discriminant_valuation_direct() as i64;
        prop_assert_eq!(Q::from_integer(direct), Q::from_integer(2 * f.b() as i64 * (d + deg - 1)) + pairs);
        let table = RootTable::new(&rs).unwrap();
        let tree = table.tree();
        prop_assert_eq!(disc_from_tree(&tree, rs.b, rs.d(), rs.degree()), Q::from_integer(direct));
        // every leaf pair meets at its root-difference valuation, and the hierarchy is ultrametric
        let l = table.roots.len();
        for a in 0..l {
            for b in 0..l {
                if a != b {
                    prop_assert_eq!(tree.lca_depth(a, b), Some(table.dist[a][b]));
                    for c in 0..l {
                        if c != a && c != b {
                            let m = table.dist[a][c].min(table.dist[b][c]);
                            prop_assert!(table.dist[a][b] >= m);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn newton_polygon_matches_root_valuations(seed in any::<u64>()) {
        let (_, f) = random_poly_input(seed);
        prop_assume!(within_caps(&f));
        let (rs, _) = roots(&f);
        let mut got: Vec<(Option<Q>, usize)> = vec![];
        for (_, root) in rs.all_roots().unwrap() {
            let v = root.certified_valuation().unwrap();
            match got.iter_mut().find(|(w, _)| *w == v) {
                Some((_, c)) => *c += 1,
                None => got.push((v, 1)),
            }
        }
        let mut want: Vec<(Option<Q>, usize)> = f
            .newton_polygon()
            .into_iter()
            .map(|(s, len)| (match s { Slope::Finite(q) => Some(q), Slope::Infinite => None }, len))
            .collect();
        got.sort();
        want.sort();
        prop_assert_eq!(got, want);
    }
}

#[test]
fn zero_series_has_no_valuation() {
    let tower = FieldTower::new(11, 24).unwrap();
    let k = tower.prime_field();
    assert_eq!(PuiseuxSeries::zero(k.clone()).valuation(), None);
    assert!(PuiseuxSeries::big_o(k, Q::from_integer(3))
        .certified_valuation()
        .is_err());
}
