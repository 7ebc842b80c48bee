//! Metric trees (cluster pictures) of root systems.
//!
//! A tree is rooted at the Gauss point (depth 0); internal nodes carry the
//! depth at which their roots stop agreeing, leaves carry root ids and no
//! depth. For any two leaves the depth of their lowest common ancestor is the
//! valuation of the difference of the roots.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{invariant, precision, Error, Result};
use crate::field::FieldElem;
use crate::newton::RootSystem;
use crate::puiseux::{PuiseuxSeries, Q};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeNode {
    /// `None` for leaves.
    pub depth: Option<Q>,
    pub children: Vec<usize>,
    pub leaf: Option<usize>,
}

/// A rooted ultrametric hierarchy; node 0 is the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricTree {
    nodes: Vec<TreeNode>,
}

/// Canonical shape of a rooted metric tree; equal signatures ⇔ rooted isometry.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sig {
    Leaf,
    Node(Q, Vec<Sig>),
}

impl MetricTree {
    /// The tree with a bare root at depth 0.
    pub fn empty() -> MetricTree {
        MetricTree {
            nodes: vec![TreeNode {
                depth: Some(Q::zero()),
                children: vec![],
                leaf: None,
            }],
        }
    }

    /// Builds the hierarchy of `ids` under the ultrametric `dist`, rooted at
    /// depth `base` and re-based so that the root sits at depth 0.
    ///
    /// Every pairwise distance must be at least `base`.
    pub fn from_ultrametric(
        ids: &[usize],
        dist: &dyn Fn(usize, usize) -> Q,
        base: Q,
    ) -> MetricTree {
        let mut tree = MetricTree::empty();
        let members: Vec<usize> = (0..ids.len()).collect();
        tree.split(0, &members, ids, dist, base, base);
        tree
    }

    fn split(
        &mut self,
        node: usize,
        members: &[usize],
        ids: &[usize],
        dist: &dyn Fn(usize, usize) -> Q,
        level: Q,
        base: Q,
    ) {
        // classes of the relation "distance > level"
        let mut classes: Vec<Vec<usize>> = vec![];
        for &m in members {
            match classes.iter_mut().find(|c| dist(ids[c[0]], ids[m]) > level) {
                Some(c) => c.push(m),
                None => classes.push(vec![m]),
            }
        }
        for class in classes {
            let child = self.nodes.len();
            if class.len() == 1 {
                self.nodes.push(TreeNode {
                    depth: None,
                    children: vec![],
                    leaf: Some(ids[class[0]]),
                });
                self.nodes[node].children.push(child);
                continue;
            }
            let mut d: Option<Q> = None;
            for (x, &i) in class.iter().enumerate() {
                for &j in &class[x + 1..] {
                    let v = dist(ids[i], ids[j]);
                    d = Some(d.map_or(v, |d: Q| d.min(v)));
                }
            }
            let d = d.unwrap();
            self.nodes.push(TreeNode {
                depth: Some(d - base),
                children: vec![],
                leaf: None,
            });
            self.nodes[node].children.push(child);
            self.split(child, &class, ids, dist, d, base);
        }
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        0
    }

    /// Leaf ids in traversal order.
    pub fn leaves(&self) -> Vec<usize> {
        let mut out = vec![];
        self.walk(0, &mut |n: &TreeNode| {
            if let Some(l) = n.leaf {
                out.push(l);
            }
        });
        out
    }

    fn walk(&self, v: usize, f: &mut dyn FnMut(&TreeNode)) {
        f(&self.nodes[v]);
        for &c in &self.nodes[v].children {
            self.walk(c, f);
        }
    }

    fn leaf_count(&self, v: usize) -> usize {
        let n = &self.nodes[v];
        if n.leaf.is_some() {
            1
        } else {
            n.children.iter().map(|&c| self.leaf_count(c)).sum()
        }
    }

    /// Internal nodes as `(depth, number of children)`.
    pub fn internal_nodes(&self) -> Vec<(Q, usize)> {
        self.nodes
            .iter()
            .filter(|n| n.leaf.is_none())
            .map(|n| (n.depth.unwrap(), n.children.len()))
            .collect()
    }

    /// Ancestor chain (root first) of every leaf id.
    fn leaf_paths(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut out = BTreeMap::new();
        let mut stack = vec![(0usize, vec![0usize])];
        while let Some((v, path)) = stack.pop() {
            let n = &self.nodes[v];
            if let Some(l) = n.leaf {
                out.insert(l, path);
                continue;
            }
            for &c in &n.children {
                let mut p = path.clone();
                if self.nodes[c].leaf.is_none() {
                    p.push(c);
                }
                stack.push((c, p));
            }
        }
        out
    }

    /// Depth of the lowest common ancestor of two distinct leaves.
    pub fn lca_depth(&self, a: usize, b: usize) -> Option<Q> {
        let paths = self.leaf_paths();
        let pa = paths.get(&a)?;
        let pb = paths.get(&b)?;
        let common = pa.iter().zip(pb).take_while(|(x, y)| x == y).last()?.0;
        self.nodes[*common].depth
    }

    /// `2b(d + deg − 1) + Σ` over ordered pairs of distinct leaves of their LCA depth.
    pub fn disc(&self, b: u32, d: u32, deg: usize) -> Q {
        let mut s = Q::zero();
        for n in &self.nodes {
            if n.leaf.is_some() {
                continue;
            }
            let counts: Vec<i64> = n
                .children
                .iter()
                .map(|&c| self.leaf_count(c) as i64)
                .collect();
            let total: i64 = counts.iter().sum();
            let pairs: i64 = counts.iter().map(|c| c * (total - c)).sum();
            s += n.depth.unwrap() * pairs;
        }
        let base = if deg == 0 {
            0
        } else {
            2 * b as i64 * (d as i64 + deg as i64 - 1)
        };
        s + Q::from_integer(base)
    }

    fn sig_of(&self, v: usize) -> Sig {
        let n = &self.nodes[v];
        if n.leaf.is_some() {
            return Sig::Leaf;
        }
        let mut cs: Vec<Sig> = n.children.iter().map(|&c| self.sig_of(c)).collect();
        cs.sort();
        Sig::Node(n.depth.unwrap(), cs)
    }

    pub fn signature(&self) -> Sig {
        self.sig_of(0)
    }

    /// All depths multiplied by `alpha`.
    pub fn scale(&self, alpha: Q) -> MetricTree {
        assert!(alpha.is_positive(), "scale factor must be positive");
        MetricTree {
            nodes: self
                .nodes
                .iter()
                .map(|n| TreeNode {
                    depth: n.depth.map(|d| d * alpha),
                    ..n.clone()
                })
                .collect(),
        }
    }

    /// Hull of the point at depth `l` and the given leaves, re-rooted at that point.
    ///
    /// All pairwise LCA depths among `leaves` must be at least `l`.
    pub fn cut(&self, leaves: &[usize], l: Q) -> MetricTree {
        let paths = self.leaf_paths();
        let dist = |a: usize, b: usize| -> Q {
            let pa = &paths[&a];
            let pb = &paths[&b];
            let common = pa
                .iter()
                .zip(pb)
                .take_while(|(x, y)| x == y)
                .last()
                .unwrap()
                .0;
            self.nodes[*common].depth.unwrap()
        };
        MetricTree::from_ultrametric(leaves, &dist, l)
    }

    /// Removes unary internal nodes other than the root.
    fn compress(&mut self) {
        let mut changed = true;
        while changed {
            changed = false;
            for v in 0..self.nodes.len() {
                let children = self.nodes[v].children.clone();
                let mut new_children = vec![];
                for c in children {
                    let n = &self.nodes[c];
                    if n.leaf.is_none() && n.children.len() == 1 {
                        new_children.push(n.children[0]);
                        changed = true;
                    } else {
                        new_children.push(c);
                    }
                }
                self.nodes[v].children = new_children;
            }
        }
        self.reindex();
    }

    /// Drops unreachable nodes.
    fn reindex(&mut self) {
        let mut order = vec![];
        let mut stack = vec![0usize];
        while let Some(v) = stack.pop() {
            order.push(v);
            for &c in self.nodes[v].children.iter().rev() {
                stack.push(c);
            }
        }
        let mut map = vec![usize::MAX; self.nodes.len()];
        for (i, &v) in order.iter().enumerate() {
            map[v] = i;
        }
        self.nodes = order
            .iter()
            .map(|&v| {
                let n = &self.nodes[v];
                TreeNode {
                    depth: n.depth,
                    children: n.children.iter().map(|&c| map[c]).collect(),
                    leaf: n.leaf,
                }
            })
            .collect();
    }

    /// Appends the subtree rooted at `v` of `other`, shifted by `shift`, and returns its new index.
    fn graft(&mut self, other: &MetricTree, v: usize, shift: Q) -> usize {
        let n = &other.nodes[v];
        let idx = self.nodes.len();
        self.nodes.push(TreeNode {
            depth: n.depth.map(|d| d + shift),
            children: vec![],
            leaf: n.leaf,
        });
        for &c in &n.children {
            let ci = self.graft(other, c, shift);
            self.nodes[idx].children.push(ci);
        }
        idx
    }

    /// Emits the tree in Graphviz DOT, children in canonical order.
    pub fn to_dot(&self, name: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "digraph \"{}\" {{", name.replace('"', "'"));
        let _ = writeln!(s, "  node [shape=point];");
        let mut next = 0usize;
        self.dot_node(0, &mut s, &mut next);
        s.push_str("}\n");
        s
    }

    fn canonical_children(&self, v: usize) -> Vec<usize> {
        let mut cs = self.nodes[v].children.clone();
        cs.sort_by(|&a, &b| {
            self.sig_of(a)
                .cmp(&self.sig_of(b))
                .then(self.min_leaf(a).cmp(&self.min_leaf(b)))
        });
        cs
    }

    fn min_leaf(&self, v: usize) -> Option<usize> {
        let n = &self.nodes[v];
        if let Some(l) = n.leaf {
            return Some(l);
        }
        n.children.iter().filter_map(|&c| self.min_leaf(c)).min()
    }

    fn dot_node(&self, v: usize, s: &mut String, next: &mut usize) -> usize {
        let id = *next;
        *next += 1;
        let n = &self.nodes[v];
        match (n.leaf, n.depth) {
            (Some(l), _) => {
                let _ = writeln!(s, "  n{} [shape=circle, label=\"r{}\"];", id, l);
            }
            (None, Some(d)) => {
                let label = if v == 0 {
                    format!("zeta {}", d)
                } else {
                    d.to_string()
                };
                let _ = writeln!(s, "  n{} [shape=box, label=\"{}\"];", id, label);
            }
            _ => {}
        }
        for c in self.canonical_children(v) {
            let cid = self.dot_node(c, s, next);
            let _ = writeln!(s, "  n{} -> n{};", id, cid);
        }
        id
    }

    /// Indented text rendering, one node per line.
    pub fn to_ascii(&self) -> String {
        let mut s = String::new();
        self.ascii_node(0, 0, &mut s);
        s
    }

    fn ascii_node(&self, v: usize, indent: usize, s: &mut String) {
        let n = &self.nodes[v];
        let pad = "  ".repeat(indent);
        match (n.leaf, n.depth) {
            (Some(l), _) => {
                let _ = writeln!(s, "{}- root r{}", pad, l);
            }
            (None, Some(d)) => {
                let _ = writeln!(s, "{}+ depth {} ({} leaves)", pad, d, self.leaf_count(v));
            }
            _ => {}
        }
        for c in self.canonical_children(v) {
            self.ascii_node(c, indent + 1, s);
        }
    }

    /// Nested JSON: `{"depth": "p/q", "children": [...]}` and `{"leaf": id}`.
    pub fn to_json(&self) -> Value {
        self.json_node(0)
    }

    fn json_node(&self, v: usize) -> Value {
        let n = &self.nodes[v];
        if let Some(l) = n.leaf {
            return json!({ "leaf": l });
        }
        let children: Vec<Value> = self
            .canonical_children(v)
            .into_iter()
            .map(|c| self.json_node(c))
            .collect();
        json!({ "depth": fmt_q(n.depth.unwrap()), "children": children })
    }
}

/// Rationals as `"num/den"`, integers included (`"1/1"`).
pub fn fmt_q(q: Q) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Inverse of [`fmt_q`]; also accepts a bare integer.
pub fn parse_q(s: &str) -> Option<Q> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim().parse().ok()?, d.trim().parse().ok()?),
        None => (s.trim().parse().ok()?, 1),
    };
    if d == 0 {
        return None;
    }
    Some(Q::new(n, d))
}

/// True iff there is a root- and depth-preserving isomorphism.
pub fn rooted_isometric(a: &MetricTree, b: &MetricTree) -> bool {
    a.signature() == b.signature()
}

/// Glues each tree's root to the point at depth `γ` of a spine from a new root.
pub fn amalgamate(parts: &[(MetricTree, Q)]) -> Result<MetricTree> {
    if parts.is_empty() {
        return Err(Error::InvalidInput(
            "amalgamation of an empty multiset".into(),
        ));
    }
    let mut gammas: Vec<Q> = parts.iter().map(|(_, g)| *g).collect();
    if gammas.iter().any(|g| g.is_negative()) {
        return Err(Error::InvalidInput("negative gluing position".into()));
    }
    gammas.sort();
    gammas.dedup();
    let mut out = MetricTree::empty();
    // spine nodes at every gluing depth
    let mut spine: BTreeMap<Q, usize> = BTreeMap::new();
    spine.insert(Q::zero(), 0);
    let mut prev = 0usize;
    for g in gammas.iter().filter(|g| !g.is_zero()) {
        let idx = out.nodes.len();
        out.nodes.push(TreeNode {
            depth: Some(*g),
            children: vec![],
            leaf: None,
        });
        out.nodes[prev].children.push(idx);
        spine.insert(*g, idx);
        prev = idx;
    }
    for (tree, g) in parts {
        let at = spine[g];
        for &c in &tree.nodes[0].children {
            let ci = out.graft(tree, c, *g);
            out.nodes[at].children.push(ci);
        }
    }
    // a spine end with nothing glued beyond it is not a branch point
    out.compress();
    prune_empty(&mut out);
    Ok(out)
}

/// Removes internal non-root nodes without leaves below them.
fn prune_empty(t: &mut MetricTree) {
    loop {
        let dead: Vec<usize> = (1..t.nodes.len())
            .filter(|&v| t.nodes[v].leaf.is_none() && t.leaf_count(v) == 0)
            .collect();
        if dead.is_empty() {
            break;
        }
        for n in t.nodes.iter_mut() {
            n.children.retain(|c| !dead.contains(c));
        }
        t.reindex();
        t.compress();
    }
}

// ---------------------------------------------------------------------------

/// Every root of `rs` with its orbit index, plus the certified valuations of all differences.
pub struct RootTable {
    pub roots: Vec<(usize, PuiseuxSeries)>,
    pub dist: Vec<Vec<Q>>,
}

impl RootTable {
    pub fn new(rs: &RootSystem) -> Result<RootTable> {
        let roots = rs.all_roots()?;
        let n = roots.len();
        let mut dist = vec![vec![Q::zero(); n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let v = roots[i]
                    .1
                    .sub(&roots[j].1)
                    .certified_valuation()?
                    .ok_or_else(|| invariant("two equal roots"))?;
                dist[i][j] = v;
                dist[j][i] = v;
            }
        }
        Ok(RootTable { roots, dist })
    }

    pub fn tree(&self) -> MetricTree {
        let ids: Vec<usize> = (0..self.roots.len()).collect();
        let d = |a: usize, b: usize| self.dist[a][b];
        MetricTree::from_ultrametric(&ids, &d, Q::zero())
    }

    /// Leaves whose roots belong to orbit `i`.
    pub fn leaves_of(&self, orbit: usize) -> Vec<usize> {
        (0..self.roots.len())
            .filter(|&l| self.roots[l].0 == orbit)
            .collect()
    }
}

/// The metric tree of a root system; leaf ids index `RootSystem::all_roots`.
pub fn build_tree(rs: &RootSystem) -> Result<MetricTree> {
    let t = RootTable::new(rs)?.tree();
    check_ultrametric(&t, &RootTable::new(rs)?)?;
    Ok(t)
}

fn check_ultrametric(t: &MetricTree, table: &RootTable) -> Result<()> {
    let n = table.roots.len();
    for i in 0..n {
        for j in i + 1..n {
            if t.lca_depth(i, j) != Some(table.dist[i][j]) {
                return Err(invariant(format!(
                    "LCA depth of leaves {} and {} differs from ν(α − β)",
                    i, j
                )));
            }
        }
    }
    Ok(())
}

/// `ν(Δ)` read off the tree: `2b(d + deg − 1) + Σ (α|β)_ζ`.
pub fn disc_from_tree(tr: &MetricTree, b: u32, d: u32, deg: usize) -> Q {
    tr.disc(b, d, deg)
}

/// `κ = max ν(α − β)` over roots `α` of orbit `i`, `β` of orbit `j`.
pub fn contact_exponent(rs: &RootSystem, i: usize, j: usize) -> Result<Q> {
    if i == j {
        return Err(Error::InvalidInput(
            "contact exponent of an orbit with itself".into(),
        ));
    }
    let beta = &rs.orbits[j].root;
    let mut best: Option<Q> = None;
    for a in rs.conjugates(i)? {
        let v = a
            .sub(beta)
            .certified_valuation()?
            .ok_or_else(|| invariant("distinct orbits share a root"))?;
        best = Some(best.map_or(v, |b: Q| b.max(v)));
    }
    Ok(best.unwrap())
}

/// Support exponents `l` with `N_l · l ∉ Z`, `N_l` the common denominator of the earlier support.
pub fn characteristic_exponents(s: &PuiseuxSeries) -> Result<Vec<Q>> {
    let mut out = vec![];
    let mut n = 1i64;
    for (q, _) in s.terms() {
        if q.is_zero() {
            continue;
        }
        if !(q * n).is_integer() {
            out.push(q);
        }
        n = n.lcm(q.denom());
    }
    if n < s.e() {
        return Err(precision(
            "support truncated before the full ramification appears",
        ));
    }
    Ok(out)
}

fn gcd_q(a: Q, b: Q) -> Q {
    // gcd of the subgroup aZ + bZ of Q
    let den = a.denom().lcm(b.denom());
    let x = (a * den).to_integer();
    let y = (b * den).to_integer();
    Q::new(x.gcd(&y), den)
}

fn in_group(x: Q, g: Q) -> bool {
    (x / g).is_integer()
}

/// Essential elements of a finite set `E ⊂ Q_{>0}` relative to `q`.
pub fn essential_exponents(set: &[Q], q: i64) -> Vec<Q> {
    let mut e: Vec<Q> = set.to_vec();
    e.sort();
    e.dedup();
    let mut out = vec![];
    if e.is_empty() {
        return out;
    }
    out.push(e[0]);
    let mut g = gcd_q(Q::from_integer(q), e[0]);
    loop {
        match e.iter().find(|&&x| !in_group(x, g)) {
            Some(&x) => {
                out.push(x);
                g = gcd_q(g, x);
            }
            None => return out,
        }
    }
}

/// Essential exponents (relative to 1) of the support of a series without constant term.
///
/// Stops once the generated group contains `(1/e)Z`, after which no further
/// element can be essential.
pub fn series_essential_exponents(s: &PuiseuxSeries) -> Result<Vec<Q>> {
    let full = Q::new(1, s.e());
    let mut out: Vec<Q> = vec![];
    let mut g = Q::one();
    for (x, _) in s.terms() {
        if x.is_zero() {
            continue;
        }
        // the first exponent is essential even when it is an integer
        if out.is_empty() || !in_group(x, g) {
            out.push(x);
            g = gcd_q(g, x);
        }
        if in_group(full, g) {
            return Ok(out);
        }
    }
    if s.is_exact() {
        return Ok(out);
    }
    Err(precision(
        "support truncated before the essential exponents were exhausted",
    ))
}

/// The ratios `b_q = L_q / L_{q−1}` of the successive common denominators of an exponent sequence.
pub fn denominator_steps(ess: &[Q]) -> Vec<i64> {
    let mut prev = 1i64;
    ess.iter()
        .map(|x| {
            let l = prev.lcm(x.denom());
            let b = l / prev;
            prev = l;
            b
        })
        .collect()
}

/// The multiset `{ν(α − β)}` predicted for the conjugates `α` of a root with
/// essential exponents `ess` against a fixed `β` at contact `κ`.
pub fn predicted_contact_multiset(ess: &[Q], kappa: Q) -> Vec<(Q, i64)> {
    let b = denominator_steps(ess);
    let mut out = vec![];
    let tail = |from: usize| -> i64 { b[from..].iter().product() };
    for (qi, &e) in ess.iter().enumerate() {
        if e < kappa {
            let m = (b[qi] - 1) * tail(qi + 1);
            if m > 0 {
                out.push((e, m));
            }
        }
    }
    let r = ess.iter().take_while(|&&e| e < kappa).count();
    out.push((kappa, tail(r)));
    out
}

/// Components of the subtree hanging at depth `l` toward residue `a`:
/// roots `α` with `ν(α − a) = l` grouped by the coefficient of `t^l` in `α − a`,
/// each group as a tree re-rooted at that point.
pub fn components_at(
    rs: &RootSystem,
    table: &RootTable,
    residue: &FieldElem,
    l: Q,
) -> Result<Vec<(FieldElem, MetricTree)>> {
    let a = PuiseuxSeries::constant(residue);
    let mut groups: Vec<(FieldElem, Vec<usize>)> = vec![];
    for (idx, (orbit, root)) in table.roots.iter().enumerate() {
        if rs.orbits[*orbit].residue != *residue {
            continue;
        }
        let eta = root.sub(&a);
        if eta.valuation() != Some(l) {
            continue;
        }
        let u = eta.coeff(l)?;
        match groups.iter_mut().find(|(v, _)| *v == u) {
            Some((_, g)) => g.push(idx),
            None => groups.push((u, vec![idx])),
        }
    }
    let d = |x: usize, y: usize| table.dist[x][y];
    Ok(groups
        .into_iter()
        .map(|(u, ids)| (u, MetricTree::from_ultrametric(&ids, &d, l)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldTower;
    use crate::newton::{puiseux_roots, ExactPoly};

    fn q(a: i64, b: i64) -> Q {
        Q::new(a, b)
    }

    fn rs_of(p: u64, rows: &[&[i64]]) -> RootSystem {
        let raw: Vec<Vec<i64>> = rows.iter().map(|r| r.to_vec()).collect();
        let f = ExactPoly::parse_and_normalize(p, &raw).unwrap();
        let tower = FieldTower::new(p, 24).unwrap();
        puiseux_roots(&f, q(8, 1), &tower).unwrap()
    }

    #[test]
    fn tree_of_x2_minus_t() {
        let rs = rs_of(7, &[&[0, -1], &[], &[1]]);
        let t = build_tree(&rs).unwrap();
        assert_eq!(
            t.signature(),
            Sig::Node(
                q(0, 1),
                vec![Sig::Node(q(1, 2), vec![Sig::Leaf, Sig::Leaf])]
            )
        );
        assert_eq!(disc_from_tree(&t, 0, 0, 2), q(1, 1));
    }

    #[test]
    fn tree_of_fig1_curve() {
        // minimal polynomial of t^(2/3) + t^(5/6)
        let rs = rs_of(
            7,
            &[
                &[0, 0, 0, 0, 1, -1],
                &[0, 0, 0, 0, -6],
                &[0, 0, 0, -9],
                &[0, 0, -2],
                &[],
                &[],
                &[1],
            ],
        );
        let t = build_tree(&rs).unwrap();
        let pair = Sig::Node(q(5, 6), vec![Sig::Leaf, Sig::Leaf]);
        let trunk = Sig::Node(q(2, 3), vec![pair.clone(), pair.clone(), pair]);
        assert_eq!(t.signature(), Sig::Node(q(0, 1), vec![trunk]));
        assert_eq!(disc_from_tree(&t, 0, 0, 6), q(21, 1));
        let root = &rs.orbits[0].root;
        assert_eq!(
            characteristic_exponents(root).unwrap(),
            vec![q(2, 3), q(5, 6)]
        );
        assert_eq!(
            series_essential_exponents(root).unwrap(),
            vec![q(2, 3), q(5, 6)]
        );
    }

    #[test]
    fn contact_of_close_orbits() {
        // (x^2 - t)(x^2 - t(1 + t)^2): best pairing t^(1/2) against t^(1/2) + t^(3/2)
        let rs = rs_of(7, &[&[0, 0, 1, 2, 1], &[], &[0, -2, -2, -1], &[], &[1]]);
        assert_eq!(rs.orbits.len(), 2);
        assert_eq!(contact_exponent(&rs, 0, 1).unwrap(), q(3, 2));
    }

    #[test]
    fn tree_of_distinct_reductions() {
        // (x - 1)(x - 2)
        let rs = rs_of(7, &[&[2], &[-3], &[1]]);
        let t = build_tree(&rs).unwrap();
        assert_eq!(
            t.signature(),
            Sig::Node(q(0, 1), vec![Sig::Leaf, Sig::Leaf])
        );
    }

    #[test]
    fn exponent_examples() {
        assert_eq!(
            essential_exponents(&[q(5, 2), q(8, 3)], 1),
            vec![q(5, 2), q(8, 3)]
        );
        assert_eq!(
            essential_exponents(&[q(2, 1), q(5, 2)], 1),
            vec![q(2, 1), q(5, 2)]
        );
        assert_eq!(essential_exponents(&[q(3, 1)], 1), vec![q(3, 1)]);
        let tower = FieldTower::new(7, 24).unwrap();
        let one = tower.elem(1);
        let s = PuiseuxSeries::monomial(&one, q(5, 2)).add(&PuiseuxSeries::monomial(&one, q(8, 3)));
        assert_eq!(
            characteristic_exponents(&s).unwrap(),
            vec![q(5, 2), q(8, 3)]
        );
        let s2 = [(2, 1, 1), (-1, 5, 2), (1, 8, 3), (-3, 7, 2), (1, 23, 6)]
            .iter()
            .map(|&(c, a, b)| PuiseuxSeries::monomial(&tower.elem(c), q(a, b)))
            .fold(PuiseuxSeries::zero(tower.prime_field()), |acc, m| {
                acc.add(&m)
            });
        assert_eq!(
            characteristic_exponents(&s2).unwrap(),
            vec![q(5, 2), q(8, 3)]
        );
        let t2 = PuiseuxSeries::monomial(&one, q(2, 1));
        assert!(characteristic_exponents(&t2).unwrap().is_empty());
    }

    #[test]
    fn scaling_and_isometry() {
        let rs = rs_of(7, &[&[0, -1], &[], &[1]]);
        let t = build_tree(&rs).unwrap();
        assert!(rooted_isometric(&t, &t.scale(q(1, 1))));
        assert!(!rooted_isometric(&t, &t.scale(q(2, 1))));
        assert!(rooted_isometric(&t, &t.scale(q(3, 2)).scale(q(2, 3))));
    }

    #[test]
    fn amalgamation_basics() {
        let rs = rs_of(7, &[&[0, -1], &[], &[1]]);
        let t = build_tree(&rs).unwrap();
        let single = amalgamate(&[(t.clone(), q(0, 1))]).unwrap();
        assert!(rooted_isometric(&single, &t));
        let two = amalgamate(&[(t.clone(), q(1, 1)), (t.clone(), q(1, 1))]).unwrap();
        let inner = Sig::Node(q(3, 2), vec![Sig::Leaf, Sig::Leaf]);
        assert_eq!(
            two.signature(),
            Sig::Node(
                q(0, 1),
                vec![Sig::Node(q(1, 1), vec![inner.clone(), inner])]
            )
        );
    }

    #[test]
    fn contact_of_distinct_reductions() {
        // (x^2 - t)(x - 1)
        let rs = rs_of(7, &[&[0, 1], &[0, -1], &[-1], &[1]]);
        assert_eq!(contact_exponent(&rs, 0, 1).unwrap(), q(0, 1));
        assert!(contact_exponent(&rs, 0, 0).is_err());
    }

    #[test]
    fn contact_multiset_prediction() {
        // ess {1/2}, κ = 1/2 against a root of another orbit: both conjugates at 1/2
        assert_eq!(
            predicted_contact_multiset(&[q(1, 2)], q(1, 2)),
            vec![(q(1, 2), 2)]
        );
        // ess {2/3, 5/6}, κ = 1: 2 at 2/3, 1 at 5/6... times the tail
        assert_eq!(
            predicted_contact_multiset(&[q(2, 3), q(5, 6)], q(1, 1)),
            vec![(q(2, 3), 4), (q(5, 6), 1), (q(1, 1), 1)]
        );
    }
}
