//! Checks of the structural laws relating a root system to its replacements.
//!
//! Each check returns `Ok(())` when the law holds, an `InvariantViolation`
//! describing the mismatch when it does not, and propagates precision errors
//! unchanged so callers can retry at higher precision.

use num_traits::Zero;

use crate::error::{invariant, Result};
use crate::induct::{replace_infinity, replace_smooth, ClusterPoint, PointId};
use crate::newton::{materialize, Lambda, RootSystem};
use crate::puiseux::{PuiseuxSeries, Q};
use crate::tree::{
    amalgamate, components_at, contact_exponent, predicted_contact_multiset, rooted_isometric,
    series_essential_exponents, MetricTree, RootTable,
};

fn residue(pt: &ClusterPoint) -> Result<&crate::field::FieldElem> {
    match &pt.id {
        PointId::Finite(a) => Ok(a),
        PointId::Infinity => Err(invariant("law checked at the point at infinity")),
    }
}

/// Slopes `λ/n` of the factors with `λ/n < 1`, distinct and sorted.
fn slopes(rs: &RootSystem, pt: &ClusterPoint) -> Vec<Q> {
    let mut s: Vec<Q> = pt
        .lt1
        .iter()
        .map(|m| {
            Q::new(
                m.lambda.finite().unwrap() as i64,
                rs.orbits[m.orbit].n as i64,
            )
        })
        .collect();
    s.sort();
    s.dedup();
    s
}

/// The tree of `f_P^{≠∞}` is the part of the tree of `f` beyond depth 1 toward `P`.
pub fn smooth_tree_law(rs: &RootSystem, pt: &ClusterPoint) -> Result<()> {
    if pt.ge1.is_empty() {
        return Ok(());
    }
    let child = replace_smooth(rs, pt)?;
    let table = RootTable::new(rs)?;
    let leaves: Vec<usize> = pt
        .ge1
        .iter()
        .flat_map(|m| table.leaves_of(m.orbit))
        .collect();
    let cut = table.tree().cut(&leaves, Q::from_integer(1));
    let direct = RootTable::new(&child)?.tree();
    if !rooted_isometric(&cut, &direct) {
        return Err(invariant(format!(
            "smooth replacement tree {:?} differs from the cut {:?}",
            direct.signature(),
            cut.signature()
        )));
    }
    Ok(())
}

/// The multiset of scaled component trees whose amalgamation should give `T(f_P^∞)`.
pub fn infinity_tree_multiset(rs: &RootSystem, pt: &ClusterPoint) -> Result<Vec<(MetricTree, Q)>> {
    let a = residue(pt)?;
    let table = RootTable::new(rs)?;
    let mut parts = vec![];
    for s in slopes(rs, pt) {
        let (num, den) = (*s.numer(), *s.denom());
        let comps = components_at(rs, &table, a, s)?;
        let zetas = rs.tower.nth_roots_of_unity(den as u64)?;
        let mut seen = vec![false; comps.len()];
        for i in 0..comps.len() {
            if seen[i] {
                continue;
            }
            for z in &zetas {
                let v = comps[i].0.mul(z);
                if let Some(j) = comps.iter().position(|(u, _)| *u == v) {
                    seen[j] = true;
                }
            }
            let scaled = comps[i].1.scale(Q::new(den, num));
            for _ in 0..num {
                parts.push((scaled.clone(), Q::new(den, num) - 1));
            }
        }
    }
    Ok(parts)
}

/// The tree of `f_P^∞` (without its root at 0 when `b = 1`) is the amalgamation
/// of the rescaled component trees hanging at the depths `λ_i/n_i`.
pub fn infinity_tree_law(rs: &RootSystem, pt: &ClusterPoint, work: Q) -> Result<()> {
    if pt.lt1.is_empty() {
        return Ok(());
    }
    let child = replace_infinity(rs, pt, work)?;
    let table = RootTable::new(&child)?;
    let keep: Vec<usize> = (0..table.roots.len())
        .filter(|&l| !(rs.b == 1 && table.roots[l].0 == child.orbits.len() - 1))
        .collect();
    let d = |x: usize, y: usize| table.dist[x][y];
    let direct = MetricTree::from_ultrametric(&keep, &d, Q::zero());
    let glued = amalgamate(&infinity_tree_multiset(rs, pt)?)?;
    if !rooted_isometric(&glued, &direct) {
        return Err(invariant(format!(
            "infinity replacement tree {:?} differs from the amalgamation {:?}",
            direct.signature(),
            glued.signature()
        )));
    }
    Ok(())
}

/// Essential exponents of each swapped branch are `n/λ − 1` followed by
/// `(n/λ)(e + 1) − 2` for the later essential exponents `e` of the branch.
pub fn exponent_law(rs: &RootSystem, pt: &ClusterPoint, work: Q) -> Result<()> {
    if pt.lt1.is_empty() {
        return Ok(());
    }
    let a = PuiseuxSeries::constant(residue(pt)?);
    let child = replace_infinity(rs, pt, work)?;
    for (k, m) in pt.lt1.iter().enumerate() {
        let o = &rs.orbits[m.orbit];
        let eta = o.root.sub(&a);
        let ess = series_essential_exponents(&eta)?;
        let r = Q::new(o.n as i64, m.lambda.finite().unwrap() as i64);
        let mut want = vec![r - 1];
        want.extend(ess.iter().skip(1).map(|e| r * (*e + 1) - 2));
        let got = series_essential_exponents(&child.orbits[k].root)?;
        if got != want {
            return Err(invariant(format!(
                "essential exponents {:?} of a swapped branch, expected {:?}",
                got, want
            )));
        }
    }
    Ok(())
}

/// Contact exponents of swapped branches follow those of the original branches.
pub fn contact_law(rs: &RootSystem, pt: &ClusterPoint, work: Q) -> Result<()> {
    if pt.lt1.len() < 2 {
        return Ok(());
    }
    let child = replace_infinity(rs, pt, work)?;
    for (x, mi) in pt.lt1.iter().enumerate() {
        for (y, mj) in pt.lt1.iter().enumerate() {
            if x == y {
                continue;
            }
            let si = Q::new(mi.lambda.finite().unwrap() as i64, mi.n as i64);
            let sj = Q::new(mj.lambda.finite().unwrap() as i64, mj.n as i64);
            if si > sj {
                continue;
            }
            let kg = contact_exponent(rs, mi.orbit, mj.orbit)?;
            let kh = contact_exponent(&child, x, y)?;
            let want = if si < sj {
                if kg != si {
                    return Err(invariant(format!(
                        "contact {} of branches with slopes {} < {}",
                        kg, si, sj
                    )));
                }
                sj.recip() - 1
            } else {
                si.recip() * (kg + 1) - 2
            };
            if kh != want {
                return Err(invariant(format!(
                    "swapped contact {} (original {}), expected {}",
                    kh, kg, want
                )));
            }
        }
    }
    Ok(())
}

/// The components hanging at depth `a/b` toward `P` fall into orbits of size
/// exactly `b` under twisting, and components in one orbit are isometric.
pub fn orbit_size_law(rs: &RootSystem, pt: &ClusterPoint) -> Result<()> {
    let a = residue(pt)?;
    let table = RootTable::new(rs)?;
    for s in slopes(rs, pt) {
        let den = *s.denom() as u64;
        let comps = components_at(rs, &table, a, s)?;
        let zetas = rs.tower.nth_roots_of_unity(den)?;
        for (u, tr) in &comps {
            let mut orbit = vec![];
            for z in &zetas {
                let v = u.mul(z);
                let j = comps
                    .iter()
                    .position(|(w, _)| *w == v)
                    .ok_or_else(|| invariant("twisting leaves the set of components"))?;
                if !rooted_isometric(tr, &comps[j].1) {
                    return Err(invariant("components in one orbit are not isometric"));
                }
                if !orbit.contains(&j) {
                    orbit.push(j);
                }
            }
            if orbit.len() as u64 != den {
                return Err(invariant(format!(
                    "orbit of size {} at depth {}",
                    orbit.len(),
                    s
                )));
            }
        }
    }
    Ok(())
}

/// For distinct orbits at one point, the multiset of `ν(α − β)` over the
/// conjugates `α` against a fixed `β` is determined by the essential exponents
/// of `α − a_P` and the contact exponent.
pub fn contact_multiset_law(rs: &RootSystem, pt: &ClusterPoint) -> Result<()> {
    let a = PuiseuxSeries::constant(residue(pt)?);
    let members: Vec<usize> = pt.members().map(|m| m.orbit).collect();
    for &i in &members {
        if rs.orbits[i].lambda == Lambda::Infinite {
            continue;
        }
        let eta = rs.orbits[i].root.sub(&a);
        let ess = series_essential_exponents(&eta)?;
        for &j in &members {
            if i == j {
                continue;
            }
            let beta = &rs.orbits[j].root;
            let kappa = contact_exponent(rs, i, j)?;
            let mut got: Vec<(Q, i64)> = vec![];
            for c in rs.conjugates(i)? {
                let v = c
                    .sub(beta)
                    .certified_valuation()?
                    .ok_or_else(|| invariant("two orbits share a root"))?;
                match got.iter_mut().find(|(q, _)| *q == v) {
                    Some((_, k)) => *k += 1,
                    None => got.push((v, 1)),
                }
            }
            got.sort();
            let mut want = predicted_contact_multiset(&ess, kappa);
            want.sort();
            if got != want {
                return Err(invariant(format!(
                    "contact multiset {:?}, expected {:?}",
                    got, want
                )));
            }
        }
    }
    Ok(())
}

/// Every swapped branch `ρ` satisfies `g̃_i(T, T·ρ(T)) = 0` to the available precision.
pub fn strict_transform_law(rs: &RootSystem, pt: &ClusterPoint, work: Q) -> Result<()> {
    if pt.lt1.is_empty() {
        return Ok(());
    }
    let a = residue(pt)?;
    let child = replace_infinity(rs, pt, work)?;
    for (k, m) in pt.lt1.iter().enumerate() {
        let single = RootSystem {
            tower: rs.tower.clone(),
            b: 0,
            orbits: vec![rs.orbits[m.orbit].clone()],
        };
        let g = materialize(&single, work)?.shift_x(a);
        let rho = &child.orbits[k].root;
        let t_sub = rho.shift(Q::from_integer(1));
        let big_t = PuiseuxSeries::t(rho.field().clone());
        let mut acc = PuiseuxSeries::zero(rho.field().clone());
        for (i, c) in g.coeffs.iter().enumerate() {
            let ci = c.substitute(&t_sub, &rs.tower)?;
            acc = acc.add(&ci.mul(&big_t.pow(i as u32)));
        }
        if !acc.is_zero() {
            return Err(invariant(format!(
                "strict transform does not vanish: {}",
                acc
            )));
        }
        // the check must have been meaningful: beyond the order of the branch itself
        let lambda = m.lambda.finite().unwrap() as i64;
        if acc
            .precision()
            .is_some_and(|p| p <= Q::from_integer(lambda))
        {
            return Err(crate::error::precision(
                "strict-transform check below the branch order",
            ));
        }
    }
    Ok(())
}

/// Replacement roots are pairwise distinct and certified, and the degrees follow the law.
pub fn squarefree_and_degree_law(rs: &RootSystem, pt: &ClusterPoint, work: Q) -> Result<()> {
    let sm = replace_smooth(rs, pt)?;
    RootTable::new(&sm)?;
    if sm.degree() != pt.deg_smooth() {
        return Err(invariant("smooth replacement degree"));
    }
    let inf = replace_infinity(rs, pt, work)?;
    RootTable::new(&inf)?;
    if inf.degree() != pt.deg_infinity(rs.b) {
        return Err(invariant("infinity replacement degree"));
    }
    for (k, m) in pt.lt1.iter().enumerate() {
        let n = rs.orbits[m.orbit].n;
        let l = m.lambda.finite().unwrap();
        let o = &inf.orbits[k];
        if o.n != l || o.lambda != Lambda::Finite(n - l) {
            return Err(invariant(format!(
                "pair ({}, {}) became ({}, {}), expected ({}, {})",
                n,
                l,
                o.n,
                o.lambda,
                l,
                n - l
            )));
        }
    }
    Ok(())
}
