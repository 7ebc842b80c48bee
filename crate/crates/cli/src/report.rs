//! The report document: a serializable view of an induction run, plus text
//! and DOT renderings.
//!
//! Rationals are written as `"num/den"` strings and the point at infinity as
//! `"inf"`. Field order is fixed by the struct definitions, so identical runs
//! produce byte-identical JSON.

use std::fmt::Write as _;

use conddisc::induct::{ClusterPoint, InductionReport, NodeKind, NodeReport};
use conddisc::tree::{fmt_q, parse_q};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputEcho {
    /// The expression as given.
    pub poly: String,
    pub prime: u64,
    /// The expanded polynomial, coefficients reduced mod `p`.
    pub expanded: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorDoc {
    pub n: u64,
    /// `λ` as an integer string, `"inf"` for an exact linear factor, or `">=k"`.
    pub lambda: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointDoc {
    pub residue: String,
    pub weight: u64,
    pub weight_tilde: u64,
    pub bad: bool,
    pub b_p: u32,
    pub factors: Vec<FactorDoc>,
    /// Which good weight-3 configuration applies, if any.
    pub good_type3: Option<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointStepDoc {
    pub point: String,
    pub weight: u64,
    pub b_p: u32,
    pub deg_infinity: usize,
    pub deg_smooth: usize,
    pub d_nod: Option<u32>,
    pub d_sm: Option<u32>,
    pub equality: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepDoc {
    pub path: String,
    /// `"input"`, `"smooth"` or `"infinity"`.
    pub kind: String,
    /// The point blown up to produce this polynomial (absent for the input).
    pub from_point: Option<String>,
    pub depth: usize,
    pub degree: usize,
    pub b: u32,
    pub d: u32,
    pub minus_art: i64,
    pub disc: i64,
    /// Conductor and discriminant differences of this node's step (absent in the base case).
    pub lhs: Option<i64>,
    pub rhs: Option<i64>,
    pub equal: Option<bool>,
    pub points: Vec<PointStepDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessDoc {
    pub path: String,
    pub point: String,
    pub weight: u64,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EqualityDoc {
    pub equal: bool,
    pub witnesses: Vec<WitnessDoc>,
    pub flags: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timings {
    pub parse_us: u64,
    pub analyze_us: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub input: InputEcho,
    pub degree: usize,
    pub genus: usize,
    pub b: u32,
    pub d: u32,
    pub minus_art: i64,
    pub disc_valuation: i64,
    pub inequality_holds: bool,
    pub equality: EqualityDoc,
    pub points: Vec<PointDoc>,
    pub steps: Vec<StepDoc>,
    pub recursion_depth: usize,
    pub precision: String,
    pub field_extensions: Vec<usize>,
    /// Wall-clock timings; only recorded on request, since they break byte-identical output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

/// Genus of `y² = f(x)` for `deg f ∈ {2g+1, 2g+2}`.
pub fn genus(degree: usize) -> usize {
    degree.saturating_sub(1) / 2
}

fn point_doc(p: &ClusterPoint) -> PointDoc {
    PointDoc {
        residue: p.id.to_string(),
        weight: p.wt,
        weight_tilde: p.wt_tilde,
        bad: p.bad,
        b_p: p.b_p,
        factors: p
            .members()
            .map(|m| FactorDoc {
                n: m.n,
                lambda: m.lambda.to_string(),
            })
            .collect(),
        good_type3: p.good_type3,
    }
}

fn step_doc(n: &NodeReport) -> StepDoc {
    let (kind, from) = match &n.kind {
        NodeKind::Input => ("input", None),
        NodeKind::Smooth(p) => ("smooth", Some(p.clone())),
        NodeKind::Infinity(p) => ("infinity", Some(p.clone())),
    };
    StepDoc {
        path: n.path.clone(),
        kind: kind.into(),
        from_point: from,
        depth: n.depth,
        degree: n.degree,
        b: n.b,
        d: n.d,
        minus_art: n.minus_art,
        disc: n.disc,
        lhs: n.step.as_ref().map(|s| s.lhs),
        rhs: n.step.as_ref().map(|s| s.rhs),
        equal: n.step.as_ref().map(|s| s.equal),
        points: n
            .step
            .as_ref()
            .map(|s| {
                s.points
                    .iter()
                    .map(|p| PointStepDoc {
                        point: p.point.clone(),
                        weight: p.wt,
                        b_p: p.b_p,
                        deg_infinity: p.deg_infinity,
                        deg_smooth: p.deg_smooth,
                        d_nod: p.d_nod,
                        d_sm: p.d_sm,
                        equality: p.equality,
                    })
                    .collect()
            })
            .unwrap_or_default(),
    }
}

impl ReportDocument {
    pub fn new(input: InputEcho, r: &InductionReport) -> ReportDocument {
        let mut steps = vec![];
        r.root.walk(&mut |n| steps.push(step_doc(n)));
        ReportDocument {
            input,
            degree: r.root.degree,
            genus: genus(r.root.degree),
            b: r.root.b,
            d: r.root.d,
            minus_art: r.minus_art,
            disc_valuation: r.disc,
            inequality_holds: r.minus_art <= r.disc,
            equality: EqualityDoc {
                equal: r.verdict.equal,
                witnesses: r
                    .verdict
                    .witnesses
                    .iter()
                    .map(|w| WitnessDoc {
                        path: w.path.clone(),
                        point: w.point.clone(),
                        weight: w.weight,
                        note: w.note.clone(),
                    })
                    .collect(),
                flags: r.verdict.flags.clone(),
            },
            points: r.root.points.iter().map(point_doc).collect(),
            steps,
            recursion_depth: r.max_depth,
            precision: fmt_q(r.precision),
            field_extensions: r.extension_degrees.clone(),
            timings: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> serde_json::Result<ReportDocument> {
        serde_json::from_str(s)
    }

    /// Human-readable summary.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "f = {}  over F_{}",
            self.input.expanded, self.input.prime
        );
        let _ = writeln!(
            s,
            "degree {}, genus {}, b = {}, d = {}",
            self.degree, self.genus, self.b, self.d
        );
        let _ = writeln!(s, "-Art(X^f)  = {}", self.minus_art);
        let _ = writeln!(s, "nu(Delta_f) = {}", self.disc_valuation);
        let rel = if self.equality.equal { "=" } else { "<" };
        let _ = writeln!(
            s,
            "conductor-discriminant: -Art {} nu(Delta)  (inequality holds: {})",
            rel, self.inequality_holds
        );
        for w in &self.equality.witnesses {
            let _ = writeln!(
                s,
                "  witness: {} at point {} (weight {}): {}",
                w.path, w.point, w.weight, w.note
            );
        }
        for f in &self.equality.flags {
            let _ = writeln!(s, "  note: {}", f);
        }
        let _ = writeln!(s, "points:");
        for p in &self.points {
            let fs: Vec<String> = p
                .factors
                .iter()
                .map(|f| format!("(n={}, lambda={})", f.n, f.lambda))
                .collect();
            let _ = writeln!(
                s,
                "  {:>8}  weight {}{}  b_P = {}  {}",
                p.residue,
                p.weight,
                if p.bad { " bad" } else { "    " },
                p.b_p,
                fs.join(" ")
            );
        }
        let _ = writeln!(s, "replacement steps:");
        for st in &self.steps {
            let step = match (st.lhs, st.rhs) {
                (Some(l), Some(r)) => format!("step {} <= {}", l, r),
                _ => "base case".into(),
            };
            let _ = writeln!(
                s,
                "  {}{}  deg {}  -Art {}  nu {}  {}",
                "  ".repeat(st.depth),
                st.path,
                st.degree,
                st.minus_art,
                st.disc,
                step
            );
        }
        let _ = writeln!(
            s,
            "recursion depth {}, precision t^{}, fields of degree {:?}",
            self.recursion_depth,
            parse_q(&self.precision).map_or(self.precision.clone(), |q| q.to_string()),
            self.field_extensions
        );
        if let Some(t) = &self.timings {
            let _ = writeln!(
                s,
                "timings: parse {} us, analysis {} us",
                t.parse_us, t.analyze_us
            );
        }
        s
    }

    /// The replacement recursion as a Graphviz digraph.
    pub fn to_dot(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "digraph \"replacements\" {{");
        let _ = writeln!(s, "  node [shape=box];");
        for (i, st) in self.steps.iter().enumerate() {
            let step = match (st.lhs, st.rhs) {
                (Some(l), Some(r)) => format!("\\nstep {} <= {}", l, r),
                _ => String::new(),
            };
            let _ = writeln!(
                s,
                "  n{} [label=\"{}\\ndeg {}  -Art {}  nu {}{}\"];",
                i, st.path, st.degree, st.minus_art, st.disc, step
            );
        }
        for (i, st) in self.steps.iter().enumerate() {
            if let Some(parent) = self.steps.iter().position(|q| {
                st.path
                    .rsplit_once('/')
                    .is_some_and(|(pre, _)| pre == q.path)
            }) {
                let _ = writeln!(s, "  n{} -> n{};", parent, i);
            }
        }
        s.push_str("}\n");
        s
    }
}
