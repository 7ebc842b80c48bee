//! Acceptance gate: one PASS/FAIL line per criterion.
//!
//! Every comparison is exact (integers, or rationals compared exactly), so the
//! pinned tolerance is zero throughout. Random corpora are seeded and the
//! inputs that would need a residue-field extension beyond the default cap are
//! skipped and reported; the corpora are regenerated until the required
//! number of analysed inputs is reached.

use std::process::ExitCode;
use std::time::Instant;

use conddisc::corpus::{random_base_case, random_heavy_collision, random_input};
use conddisc::field::FieldTower;
use conddisc::induct::{
    analyze, classify, discriminant_recursive, replace_infinity, Config, InductionReport,
    NodeReport,
};
use conddisc::laws::*;
use conddisc::newton::{puiseux_roots, ExactPoly, RootSystem};
use conddisc::puiseux::Q;
use conddisc::tree::{build_tree, disc_from_tree, MetricTree, Sig};
use conddisc::Error;
use conddisc_cli::app::{cmd_analyze, AnalyzeArgs, Caps, Format};
use conddisc_cli::families::{expression, Family};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const PRIMES: [u64; 3] = [11, 13, 101];
const MAX_DEG: usize = 8;

fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

struct Gate {
    failures: Vec<usize>,
}

impl Gate {
    fn report(&mut self, n: usize, ok: bool, what: &str) {
        println!(
            "{} criterion {:>2}: {}",
            if ok { "PASS" } else { "FAIL" },
            n,
            what
        );
        if !ok {
            self.failures.push(n);
        }
    }
}

/// One analysed member of the shared random corpus.
struct Case {
    raw: Vec<Vec<i64>>,
    p: u64,
    f: ExactPoly,
    report: InductionReport,
    rs: RootSystem,
}

fn strict_config() -> Config {
    Config {
        check_resultant: true,
        check_multiplicity: true,
        ..Config::default()
    }
}

/// The shared corpus: `count` analysed inputs, plus the number skipped at the extension cap.
fn corpus(seed: u64, count: usize) -> Result<(Vec<Case>, usize), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = vec![];
    let mut skipped = 0;
    let mut i = 0;
    while cases.len() < count {
        let p = PRIMES[i % 3];
        i += 1;
        let (raw, f) = random_input(&mut rng, p, MAX_DEG);
        let report = match analyze(&f, &strict_config()) {
            Ok(r) => r,
            Err(Error::ExtensionDegreeExceeded { .. }) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(format!("{raw:?} over F_{p}: {e}")),
        };
        let tower = FieldTower::new(p, conddisc::field::DEFAULT_MAX_EXTENSION)
            .map_err(|e| e.to_string())?;
        let rs =
            puiseux_roots(&f, report.precision, &tower).map_err(|e| format!("{raw:?}: {e}"))?;
        cases.push(Case {
            raw,
            p,
            f,
            report,
            rs,
        });
    }
    Ok((cases, skipped))
}

fn analyze_family(family: Family, g: u64) -> Result<InductionReport, String> {
    let p = 101;
    let poly = expression(family, g, p)?;
    let args = AnalyzeArgs {
        prime: p,
        poly: Some(poly),
        poly_file: None,
        json: None,
        format: Format::Json,
        trace: false,
        caps: Caps {
            max_precision: conddisc::induct::DEFAULT_MAX_PRECISION,
            max_extension: conddisc::field::DEFAULT_MAX_EXTENSION as u64,
        },
        max_depth: conddisc::induct::DEFAULT_MAX_DEPTH as u64,
    };
    cmd_analyze(&args)
        .map(|(_, r)| r)
        .map_err(|e| e.to_string())
}

fn criterion_1(gate: &mut Gate, cases: &[Case], skipped: usize) {
    let mut bad = vec![];
    for c in cases {
        let tree = build_tree(&c.rs).map(|t| disc_from_tree(&t, c.rs.b, c.rs.d(), c.rs.degree()));
        let direct = c.f.discriminant_valuation_direct() as i64;
        let recursive = discriminant_recursive(&c.rs, c.report.precision);
        match (tree, recursive) {
            (Ok(t), Ok(r))
                if t == Q::from_integer(direct) && r == direct && c.report.disc == direct => {}
            (t, r) => bad.push(format!(
                "{:?} over F_{}: tree {:?}, direct {}, recursion {:?}",
                c.raw, c.p, t, direct, r
            )),
        }
    }
    gate.report(
        1,
        bad.is_empty(),
        &format!(
            "tree, resultant and recursion agree on nu(Delta) for {}/{} random inputs (p in {:?}, deg <= {}; {} skipped at the extension cap; tolerance exact){}",
            cases.len() - bad.len(),
            cases.len(),
            PRIMES,
            MAX_DEG,
            skipped,
            bad.first().map(|s| format!("; first mismatch {}", s)).unwrap_or_default()
        ),
    );
}

fn criterion_2(gate: &mut Gate) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut ok = 0;
    let mut bad = vec![];
    for i in 0..120 {
        let p = PRIMES[i % 3];
        let (raw, f, expect) = random_base_case(&mut rng, p, MAX_DEG);
        match analyze(&f, &strict_config()) {
            Ok(r) if r.minus_art == expect && r.disc == expect && r.verdict.equal => ok += 1,
            Ok(r) => bad.push(format!(
                "{raw:?}: -Art {} nu {} expected {}",
                r.minus_art, r.disc, expect
            )),
            Err(e) => bad.push(format!("{raw:?}: {e}")),
        }
    }
    gate.report(
        2,
        bad.is_empty() && ok >= 100,
        &format!(
            "base cases: -Art = nu(Delta) = sum(n_i - 1) on {ok}/120 inputs (tolerance exact){}",
            bad.first()
                .map(|s| format!("; first mismatch {}", s))
                .unwrap_or_default()
        ),
    );
}

fn criterion_3(gate: &mut Gate, cases: &[Case]) {
    let mut nodes = 0;
    let mut steps = 0;
    let mut bad = vec![];
    for c in cases {
        c.report.root.walk(&mut |n: &NodeReport| {
            nodes += 1;
            if n.minus_art > n.disc || n.minus_art < 0 {
                bad.push(format!(
                    "{:?} node {}: -Art {} nu {}",
                    c.raw, n.path, n.minus_art, n.disc
                ));
            }
            if let Some(s) = &n.step {
                steps += 1;
                if !(0 <= s.lhs && s.lhs <= s.rhs) {
                    bad.push(format!(
                        "{:?} node {}: step {} vs {}",
                        c.raw, n.path, s.lhs, s.rhs
                    ));
                }
            }
        });
    }
    gate.report(
        3,
        bad.is_empty(),
        &format!(
            "0 <= -Art <= nu(Delta) at {nodes} recursion nodes and 0 <= step lhs <= rhs at {steps} steps (tolerance exact){}",
            bad.first().map(|s| format!("; first violation {}", s)).unwrap_or_default()
        ),
    );
}

fn family_criterion(gate: &mut Gate, n: usize, family: Family, gs: &[u64], expect: fn(u64) -> i64) {
    let mut lines = vec![];
    let mut ok = true;
    for &g in gs {
        match analyze_family(family, g) {
            Ok(r) => {
                let e = expect(g);
                let good = r.minus_art == e && r.disc == e && r.verdict.equal;
                ok &= good;
                lines.push(format!("g={g}: {}/{} (expected {e})", r.minus_art, r.disc));
            }
            Err(e) => {
                ok = false;
                lines.push(format!("g={g}: {e}"));
            }
        }
    }
    gate.report(
        n,
        ok,
        &format!(
            "{family} family, -Art = nu(Delta): {} (tolerance exact)",
            lines.join(", ")
        ),
    );
}

fn criterion_6(gate: &mut Gate) {
    // genus-one curves, checked by hand against Ogg's formula
    let p = 101;
    let inputs: [(&str, i64); 4] = [
        ("x^3 - t", 2),
        ("x^3 - t^2", 4),
        ("x*(x - t)*(x + t)", 6),
        ("x*(x - 1)*(x - t)", 2),
    ];
    let mut ok = true;
    let mut lines = vec![];
    for (poly, e) in inputs {
        let args = AnalyzeArgs {
            prime: p,
            poly: Some(poly.into()),
            poly_file: None,
            json: None,
            format: Format::Json,
            trace: false,
            caps: Caps {
                max_precision: conddisc::induct::DEFAULT_MAX_PRECISION,
                max_extension: conddisc::field::DEFAULT_MAX_EXTENSION as u64,
            },
            max_depth: conddisc::induct::DEFAULT_MAX_DEPTH as u64,
        };
        match cmd_analyze(&args) {
            Ok((doc, _)) => {
                let good = doc.minus_art == e && doc.disc_valuation == e && doc.equality.equal;
                ok &= good;
                lines.push(format!("{poly}: {}/{}", doc.minus_art, doc.disc_valuation));
            }
            Err(err) => {
                ok = false;
                lines.push(format!("{poly}: {err}"));
            }
        }
    }
    gate.report(
        6,
        ok,
        &format!(
            "genus-one examples 2/4/6/2: {} (tolerance exact)",
            lines.join(", ")
        ),
    );
}

fn criterion_7(gate: &mut Gate) {
    let (ok, what) = match analyze_family(Family::Collision, 0) {
        Ok(r) => {
            let w4 = r
                .verdict
                .witnesses
                .iter()
                .find(|w| w.weight >= 4 && w.path != "f")
                .map(|w| format!("{} at point {}", w.path, w.point));
            (
                r.disc == 12 && r.minus_art < 12 && !r.verdict.equal && w4.is_some(),
                format!(
                    "-Art = {} < nu(Delta) = {} (expected 12), weight-4 witness below the input: {}",
                    r.minus_art,
                    r.disc,
                    w4.unwrap_or_else(|| "none".into())
                ),
            )
        }
        Err(e) => (false, e),
    };
    gate.report(7, ok, &format!("collision example: {what}"));
}

fn criterion_8(gate: &mut Gate) {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut strict = 0;
    let mut bad = vec![];
    let mut skipped = 0;
    let mut i = 0;
    while strict + bad.len() < 60 {
        let p = PRIMES[i % 3];
        i += 1;
        let (raw, f) = random_heavy_collision(&mut rng, p, MAX_DEG);
        match analyze(&f, &Config::default()) {
            Ok(r) if r.minus_art < r.disc && !r.verdict.equal => strict += 1,
            Ok(r) => bad.push(format!(
                "{raw:?} over F_{p}: -Art {} nu {}",
                r.minus_art, r.disc
            )),
            Err(Error::ExtensionDegreeExceeded { .. }) => skipped += 1,
            Err(e) => bad.push(format!("{raw:?} over F_{p}: {e}")),
        }
    }
    gate.report(
        8,
        bad.is_empty() && strict >= 50,
        &format!(
            "inputs with four or more factors through one point are strict: {strict}/{} ({skipped} skipped at the extension cap){}",
            strict + bad.len(),
            bad.first().map(|s| format!("; first counterexample {}", s)).unwrap_or_default()
        ),
    );
}

/// Common valuation of the roots and depth of the deepest branching, relative to it.
fn trunk_and_inner(rs: &RootSystem, tree: &MetricTree) -> Option<(Q, Q)> {
    let vals: Vec<Q> = rs
        .orbits
        .iter()
        .map(|o| o.root.valuation())
        .collect::<Option<_>>()?;
    let trunk = *vals.first()?;
    if vals.iter().any(|v| *v != trunk) {
        return None;
    }
    let deepest = tree
        .internal_nodes()
        .into_iter()
        .filter(|(_, k)| *k >= 2)
        .map(|(d, _)| d)
        .max()?;
    Some((trunk, deepest - trunk))
}

fn criterion_9(gate: &mut Gate) {
    // minimal polynomial of t^(2/3) + t^(5/6); its integer coefficients work for any p = 1 mod 6
    let raw: Vec<Vec<i64>> = vec![
        vec![0, 0, 0, 0, 1, -1],
        vec![0, 0, 0, 0, -6],
        vec![0, 0, 0, -9],
        vec![0, 0, -2],
        vec![],
        vec![],
        vec![1],
    ];
    let mut notes = vec![];
    let mut ok = true;
    for p in [7u64, 13] {
        let run = || -> Result<(bool, String), Error> {
            let f = ExactPoly::parse_and_normalize(p, &raw)?;
            let r = analyze(&f, &Config::default())?;
            let tower = FieldTower::new(p, conddisc::field::DEFAULT_MAX_EXTENSION)?;
            let rs = puiseux_roots(&f, r.precision, &tower)?;
            let tree = build_tree(&rs)?;
            let pair = Sig::Node(q(5, 6), vec![Sig::Leaf, Sig::Leaf]);
            let trunk = Sig::Node(q(2, 3), vec![pair.clone(), pair.clone(), pair]);
            let shape = tree.signature() == Sig::Node(q(0, 1), vec![trunk]);
            let disc = disc_from_tree(&tree, rs.b, rs.d(), rs.degree());
            let mut good = shape && disc == q(21, 1) && r.disc == 21;
            // follow the replacement at infinity of the point 0 down the chain
            let mut chain = vec![];
            let mut cur = rs;
            let mut cur_tree = tree;
            for _ in 0..3 {
                chain.push(trunk_and_inner(&cur, &cur_tree));
                let pt = classify(&cur)
                    .into_iter()
                    .find(|pt| pt.bad && !pt.is_infinity() && !pt.lt1.is_empty());
                match pt {
                    Some(pt) => {
                        cur = replace_infinity(&cur, &pt, r.precision)?;
                        cur_tree = build_tree(&cur)?;
                    }
                    None => break,
                }
            }
            let expect = vec![
                Some((q(2, 3), q(1, 6))),
                Some((q(1, 2), q(1, 4))),
                Some((q(1, 1), q(1, 2))),
            ];
            let single = cur_tree.signature()
                == Sig::Node(
                    q(0, 1),
                    vec![Sig::Node(q(3, 2), vec![Sig::Leaf, Sig::Leaf])],
                )
                || cur_tree.signature() == Sig::Node(q(3, 2), vec![Sig::Leaf, Sig::Leaf]);
            good &= chain == expect && single;
            let shown: Vec<String> = chain
                .iter()
                .map(|c| match c {
                    Some((a, b)) => format!("{a}+{b}"),
                    None => "?".into(),
                })
                .collect();
            Ok((
                good,
                format!(
                    "p={p}: six leaves in three pairs at 5/6 over a trunk at 2/3: {shape}, nu(Delta) {}, trunk+inner chain {}, last tree a single node at 3/2: {single}",
                    r.disc,
                    shown.join(" -> ")
                ),
            ))
        };
        match run() {
            Ok((g, s)) => {
                ok &= g;
                notes.push(s);
            }
            Err(e) => {
                ok = false;
                notes.push(format!("p={p}: {e}"));
            }
        }
    }
    gate.report(
        9,
        ok,
        &format!(
            "worked tree example: {} (tolerance exact)",
            notes.join("; ")
        ),
    );
}

/// Runs `check` at every bad finite point of the corpus where `applies` holds.
fn law_instances(
    cases: &[Case],
    applies: &dyn Fn(&conddisc::induct::ClusterPoint, &RootSystem) -> bool,
    check: &dyn Fn(&RootSystem, &conddisc::induct::ClusterPoint, Q) -> Result<(), Error>,
) -> (usize, Vec<String>) {
    let mut n = 0;
    let mut bad = vec![];
    for c in cases {
        for pt in classify(&c.rs).iter().filter(|p| p.bad && !p.is_infinity()) {
            if !applies(pt, &c.rs) {
                continue;
            }
            n += 1;
            if let Err(e) = check(&c.rs, pt, c.report.precision) {
                bad.push(format!("{:?} over F_{} at {}: {e}", c.raw, c.p, pt.id));
            }
        }
    }
    (n, bad)
}

fn law_line(name: &str, need: usize, (n, bad): (usize, Vec<String>)) -> (bool, String) {
    (
        bad.is_empty() && n >= need,
        format!(
            "{name} {}/{n}{}",
            n - bad.len(),
            bad.first()
                .map(|s| format!(" (first failure {s})"))
                .unwrap_or_default()
        ),
    )
}

fn criterion_10(gate: &mut Gate, cases: &[Case]) {
    let has_ge1 = |pt: &conddisc::induct::ClusterPoint, _: &RootSystem| !pt.ge1.is_empty();
    let has_lt1 = |pt: &conddisc::induct::ClusterPoint, _: &RootSystem| !pt.lt1.is_empty();
    let parts = [
        law_line(
            "cut tree",
            200,
            law_instances(cases, &has_ge1, &|rs, pt, _| smooth_tree_law(rs, pt)),
        ),
        law_line(
            "amalgamated tree",
            200,
            law_instances(cases, &has_lt1, &infinity_tree_law),
        ),
        law_line(
            "essential exponents",
            200,
            law_instances(cases, &has_lt1, &exponent_law),
        ),
    ];
    let ok = parts.iter().all(|(o, _)| *o);
    let text: Vec<String> = parts.into_iter().map(|(_, s)| s).collect();
    gate.report(
        10,
        ok,
        &format!(
            "tree and exponent laws, >= 200 instances each: {}",
            text.join(", ")
        ),
    );
}

fn criterion_11(gate: &mut Gate, cases: &[Case]) {
    let any = |_: &conddisc::induct::ClusterPoint, _: &RootSystem| true;
    let has_lt1 = |pt: &conddisc::induct::ClusterPoint, _: &RootSystem| !pt.lt1.is_empty();
    let two_lt1 = |pt: &conddisc::induct::ClusterPoint, _: &RootSystem| pt.lt1.len() >= 2;
    let parts = [
        law_line(
            "squarefree, degree and pair",
            100,
            law_instances(cases, &any, &squarefree_and_degree_law),
        ),
        law_line(
            "strict transform",
            100,
            law_instances(cases, &has_lt1, &strict_transform_law),
        ),
        law_line(
            "contact exponents",
            100,
            law_instances(cases, &two_lt1, &contact_law),
        ),
        law_line(
            "orbit sizes",
            100,
            law_instances(cases, &has_lt1, &|rs, pt, _| orbit_size_law(rs, pt)),
        ),
        law_line(
            "contact multiset",
            100,
            law_instances(cases, &two_lt1, &|rs, pt, _| contact_multiset_law(rs, pt)),
        ),
    ];
    let ok = parts.iter().all(|(o, _)| *o);
    let text: Vec<String> = parts.into_iter().map(|(_, s)| s).collect();
    gate.report(
        11,
        ok,
        &format!(
            "structural laws, >= 100 instances each: {}",
            text.join(", ")
        ),
    );
}

fn criterion_12(gate: &mut Gate, cases: &[Case]) {
    let mut bad = vec![];
    let mut edges = 0;
    let mut deepest = 0;
    for c in cases {
        let nu = c.report.disc;
        let depth = c.report.root.max_depth();
        deepest = deepest.max(depth);
        if depth as i64 > 2 * nu + 2 {
            bad.push(format!("{:?}: depth {depth} > 2*{nu}+2", c.raw));
        }
        c.report.root.walk(&mut |n: &NodeReport| {
            for ch in &n.children {
                edges += 1;
                if ch.measure() > n.measure() {
                    bad.push(format!("{:?}: {} grows to {}", c.raw, n.path, ch.path));
                }
                for gc in &ch.children {
                    if gc.measure() >= n.measure() {
                        bad.push(format!(
                            "{:?}: no decrease from {} to {}",
                            c.raw, n.path, gc.path
                        ));
                    }
                }
            }
        });
    }
    gate.report(
        12,
        bad.is_empty(),
        &format!(
            "termination: depth <= 2 nu(Delta) + 2 on {} inputs (deepest {deepest}), (degree, nu) never grows and strictly drops within two steps on {edges} edges{}",
            cases.len(),
            bad.first().map(|s| format!("; first violation {}", s)).unwrap_or_default()
        ),
    );
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut gate = Gate { failures: vec![] };
    let (cases, skipped) = match corpus(1, 1000) {
        Ok(c) => c,
        Err(e) => {
            println!("FAIL corpus: {e}");
            return ExitCode::FAILURE;
        }
    };
    criterion_1(&mut gate, &cases, skipped);
    criterion_2(&mut gate);
    criterion_3(&mut gate, &cases);
    family_criterion(&mut gate, 4, Family::Eisenstein, &[1, 2, 3, 4, 5], |g| {
        2 * g as i64 + 1
    });
    family_criterion(&mut gate, 5, Family::Pairs, &[2, 3, 4, 5], |g| 2 * g as i64);
    criterion_6(&mut gate);
    criterion_7(&mut gate);
    criterion_8(&mut gate);
    criterion_9(&mut gate);
    criterion_10(&mut gate, &cases);
    criterion_11(&mut gate, &cases);
    criterion_12(&mut gate, &cases);
    println!(
        "acceptance: {}/12 criteria passed in {:.1} s",
        12 - gate.failures.len(),
        start.elapsed().as_secs_f64()
    );
    if gate.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
