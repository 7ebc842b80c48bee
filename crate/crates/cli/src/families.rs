//! Generators for the standard example families, as factored expressions.

use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// `x^{2g+2} − t`.
    Eisenstein,
    /// `Π_{i=1}^{g} (x − a_i)(x − a_i + t)`.
    Pairs,
    /// `(x − a_1)(x − a_1 + t)(x − a_1 − t)(x − a_2)⋯(x − a_{2g−1})`.
    Triple,
    /// `(x − 1)(x − 2)(x − 3)(x − t²)(x − 2t²)(x − 3t²)`; `g` is ignored.
    Collision,
    /// `x(x + 1)(x − t a_1)⋯(x − t a_g)(x − 1 − t a_1)⋯(x − 1 − t a_g)`, `g` even.
    Chain,
}

pub const FAMILIES: [&str; 5] = ["eisenstein", "pairs", "triple", "collision", "chain"];

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "eisenstein" => Ok(Family::Eisenstein),
            "pairs" => Ok(Family::Pairs),
            "triple" => Ok(Family::Triple),
            "collision" => Ok(Family::Collision),
            "chain" => Ok(Family::Chain),
            _ => Err(format!(
                "unknown family '{}' (expected one of {})",
                s,
                FAMILIES.join(", ")
            )),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::Eisenstein => "eisenstein",
            Family::Pairs => "pairs",
            Family::Triple => "triple",
            Family::Collision => "collision",
            Family::Chain => "chain",
        };
        f.write_str(s)
    }
}

fn linear(c: &str) -> String {
    format!("(x{})", c)
}

/// `−a` as a signed summand.
fn minus(a: u64) -> String {
    format!(" - {}", a)
}

/// The family member for genus parameter `g` over `F_p`, as an expression.
///
/// Residues are `1, 2, …` reduced mod `p`; families whose residues must avoid
/// `0` and `±1` start at `2`. Parameters that cannot give pairwise distinct
/// residues below `p` are rejected.
pub fn expression(family: Family, g: u64, p: u64) -> Result<String, String> {
    let need = |k: u64, first: u64| -> Result<(), String> {
        if first + k > p - 1 {
            return Err(format!(
                "{} distinct residues starting at {} do not fit in F_{}",
                k, first, p
            ));
        }
        Ok(())
    };
    match family {
        Family::Eisenstein => {
            if g == 0 {
                return Err("genus must be at least 1".into());
            }
            Ok(format!("x^{} - t", 2 * g + 2))
        }
        Family::Pairs => {
            if g == 0 {
                return Err("need at least one pair".into());
            }
            need(g, 1)?;
            let fs: Vec<String> = (1..=g)
                .flat_map(|a| [linear(&minus(a)), linear(&format!("{} + t", minus(a)))])
                .collect();
            Ok(fs.join("*"))
        }
        Family::Triple => {
            if g == 0 {
                return Err("genus must be at least 1".into());
            }
            need(2 * g - 1, 1)?;
            let mut fs = vec![linear(" - 1"), linear(" - 1 + t"), linear(" - 1 - t")];
            fs.extend((2..=2 * g - 1).map(|a| linear(&minus(a))));
            Ok(fs.join("*"))
        }
        Family::Collision => {
            need(3, 1)?;
            Ok("(x - 1)*(x - 2)*(x - 3)*(x - t^2)*(x - 2*t^2)*(x - 3*t^2)".into())
        }
        Family::Chain => {
            if g < 2 || !g.is_multiple_of(2) {
                return Err("the chain family needs an even g ≥ 2".into());
            }
            need(g, 2)?;
            let mut fs = vec!["x".to_string(), "(x + 1)".to_string()];
            fs.extend((2..g + 2).map(|a| format!("(x - {}*t)", a)));
            fs.extend((2..g + 2).map(|a| format!("(x - 1 - {}*t)", a)));
            Ok(fs.join("*"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::expand;

    #[test]
    fn family_members() {
        assert_eq!(expression(Family::Eisenstein, 2, 101).unwrap(), "x^6 - t");
        assert_eq!(
            expression(Family::Pairs, 2, 101).unwrap(),
            "(x - 1)*(x - 1 + t)*(x - 2)*(x - 2 + t)"
        );
        assert_eq!(
            expression(Family::Triple, 2, 101).unwrap(),
            "(x - 1)*(x - 1 + t)*(x - 1 - t)*(x - 2)*(x - 3)"
        );
        assert_eq!(
            expression(Family::Chain, 2, 101).unwrap(),
            "x*(x + 1)*(x - 2*t)*(x - 3*t)*(x - 1 - 2*t)*(x - 1 - 3*t)"
        );
    }

    #[test]
    fn collision_matches_the_expanded_product() {
        let e = expand(&expression(Family::Collision, 0, 101).unwrap(), 101).unwrap();
        let direct = expand("(x-1)*(x-2)*(x-3)*(x-t^2)*(x-2*t^2)*(x-3*t^2)", 101).unwrap();
        assert_eq!(e, direct);
    }

    #[test]
    fn rejects_impossible_parameters() {
        assert!(expression(Family::Pairs, 20, 11).is_err());
        assert!(expression(Family::Chain, 3, 101).is_err());
        assert!("trefoil".parse::<Family>().is_err());
        for name in FAMILIES {
            assert_eq!(name.parse::<Family>().unwrap().to_string(), name);
        }
    }
}
