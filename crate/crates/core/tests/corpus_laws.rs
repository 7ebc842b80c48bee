//! Every structural law on a seeded random corpus, at the precision the full
//! analysis settled on.

use conddisc::corpus::random_input;
use conddisc::field::FieldTower;
use conddisc::induct::{analyze, classify, Config};
use conddisc::laws::*;
use conddisc::newton::puiseux_roots;
use conddisc::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn laws_hold_on_a_random_corpus() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0;
    for i in 0..300 {
        let p = [11u64, 13, 101][i % 3];
        let (raw, f) = random_input(&mut rng, p, 8);
        let r = match analyze(&f, &Config::default()) {
            Ok(r) => r,
            Err(Error::ExtensionDegreeExceeded { .. }) => continue,
            Err(e) => panic!("input {i} {raw:?} over F_{p}: {e}"),
        };
        assert!(r.minus_art <= r.disc);
        let tower = FieldTower::new(p, 24).unwrap();
        let w = r.precision;
        let rs = puiseux_roots(&f, w, &tower).unwrap();
        for pt in classify(&rs).iter().filter(|p| p.bad && !p.is_infinity()) {
            let checks = [
                ("cut tree", smooth_tree_law(&rs, pt)),
                ("amalgamated tree", infinity_tree_law(&rs, pt, w)),
                ("essential exponents", exponent_law(&rs, pt, w)),
                ("contact exponents", contact_law(&rs, pt, w)),
                ("orbit sizes", orbit_size_law(&rs, pt)),
                ("contact multiset", contact_multiset_law(&rs, pt)),
                ("strict transform", strict_transform_law(&rs, pt, w)),
                (
                    "squarefree and degree",
                    squarefree_and_degree_law(&rs, pt, w),
                ),
            ];
            for (name, c) in checks {
                if let Err(e) = c {
                    panic!("input {i} {raw:?} over F_{p}, point {}: {name}: {e}", pt.id);
                }
            }
            checked += 1;
        }
    }
    assert!(checked >= 200, "only {checked} bad points exercised");
}
