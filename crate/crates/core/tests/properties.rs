//! Randomized structural laws: order axioms, orbit normal forms, hull
//! containment of coefficient supports, reflection-difference recomposition,
//! commutativity of the deformed derivatives, and probability normalization
//! of the eigencoefficients.

use proptest::prelude::*;

use opdam_core::algebra::{divided_difference, MultiPoly};
use opdam_core::cherednik::{apply_cherednik, compute_e};
use opdam_core::dunkl::apply_dunkl;
use opdam_core::rat::{qi, qr, Q};
use opdam_core::rootsys::{Multiplicity, Point, RootSystem, Weight, DEFAULT_DOWNSET_LIMIT};

use num_traits::{One, Signed, Zero};

fn weight(rank: usize, bound: i64) -> impl Strategy<Value = Weight> {
    prop::collection::vec(-bound..=bound, rank).prop_map(Weight)
}

fn small_multipoly(rank: usize) -> impl Strategy<Value = MultiPoly> {
    prop::collection::vec(
        (prop::collection::vec(0u32..=2, rank), -3i64..=3),
        1..=4,
    )
    .prop_map(move |terms| {
        let mut p = MultiPoly::zero();
        for (e, c) in terms {
            if c != 0 {
                p = p.add(&MultiPoly::monomial(e, qi(c)));
            }
        }
        p
    })
}

fn multiplicities(rs: &RootSystem, pick: usize) -> Multiplicity {
    let table = [qr(1, 2), qi(1), qr(5, 2), qr(1, 3)];
    let k = table[pick % table.len()].clone();
    Multiplicity::uniform(rs, k).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dominance_order_is_a_partial_order(
        a in weight(2, 3),
        b in weight(2, 3),
        c in weight(2, 3),
    ) {
        let rs = RootSystem::from_code("B2").unwrap();
        // Reflexive.
        prop_assert!(rs.tri_leq(&a, &a));
        // Antisymmetric.
        if rs.tri_leq(&a, &b) && rs.tri_leq(&b, &a) {
            prop_assert_eq!(&a, &b);
        }
        // Transitive.
        if rs.tri_leq(&a, &b) && rs.tri_leq(&b, &c) {
            prop_assert!(rs.tri_leq(&a, &c));
        }
    }

    #[test]
    fn dominant_rep_is_a_normal_form(lam in weight(2, 4)) {
        let rs = RootSystem::from_code("A2").unwrap();
        let (dom, w) = rs.dominant_rep(&lam);
        prop_assert!(rs.is_dominant(&dom));
        prop_assert_eq!(w.apply_weight(&lam), dom.clone());
        // Every orbit member normalizes to the same representative.
        for v in rs.orbit_weights(&lam) {
            prop_assert_eq!(rs.dominant_rep(&v).0, dom.clone());
        }
    }

    #[test]
    fn downsets_lie_in_the_orbit_hull(lam in weight(2, 2)) {
        let rs = RootSystem::from_code("B2").unwrap();
        for nu in rs.downset(&lam, DEFAULT_DOWNSET_LIMIT).unwrap() {
            let p = rs.weight_point(&nu);
            prop_assert!(rs.hull_contains(&lam, &p).unwrap());
        }
    }

    #[test]
    fn reflection_differences_recompose(p in small_multipoly(2), ridx in 0usize..3) {
        let rs = RootSystem::from_code("A2").unwrap();
        let root = &rs.positive_roots[ridx % rs.positive_roots.len()];
        let d = divided_difference(&rs, root, &p).unwrap();
        let sigma = p.reflect(&rs, root);
        let coords: Vec<Q> = root.coords.iter().map(|&c| qi(c)).collect();
        let ell = MultiPoly::linear_form(&rs, &coords);
        prop_assert_eq!(sigma.add(&ell.mul(&d)), p);
    }

    #[test]
    fn deformed_derivatives_commute(p in small_multipoly(2), pick in 0usize..4) {
        let rs = RootSystem::from_code("B2").unwrap();
        let k = multiplicities(&rs, pick);
        let xi = Point(vec![Q::one(), Q::zero()]);
        let eta = Point(vec![Q::zero(), Q::one()]);
        let a = apply_dunkl(&rs, &k, &eta, &apply_dunkl(&rs, &k, &xi, &p).unwrap()).unwrap();
        let b = apply_dunkl(&rs, &k, &xi, &apply_dunkl(&rs, &k, &eta, &p).unwrap()).unwrap();
        prop_assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn zero_multiplicity_is_undeformed(lam in weight(2, 3)) {
        let rs = RootSystem::from_code("A2").unwrap();
        let k = Multiplicity::uniform(&rs, Q::zero()).unwrap();
        let ep = compute_e(&rs, &k, &lam, DEFAULT_DOWNSET_LIMIT, 0).unwrap();
        prop_assert_eq!(ep.poly.len(), 1);
        prop_assert_eq!(ep.c, Q::one());
        prop_assert_eq!(ep.spectral.0, rs.weight_point(&lam));
    }

    #[test]
    fn eigencoefficients_are_probabilities(lam in weight(2, 2), pick in 0usize..4) {
        let rs = RootSystem::from_code("A2").unwrap();
        let k = multiplicities(&rs, pick);
        let ep = compute_e(&rs, &k, &lam, DEFAULT_DOWNSET_LIMIT, 1).unwrap();
        prop_assert_eq!(ep.coeff(&lam), Q::one());
        let mut mass = Q::zero();
        for (_, b) in ep.prob_coeffs() {
            prop_assert!(!b.is_negative());
            mass = mass + b;
        }
        prop_assert_eq!(mass, Q::one());

        // The defining eigen-equations hold in every simple direction.
        for i in 0..rs.rank {
            let mut dir = vec![Q::zero(); rs.rank];
            dir[i] = Q::one();
            let xi = Point(dir);
            let lhs = apply_cherednik(&rs, &k, &xi, &ep.poly);
            let s = rs.ip(&ep.spectral.0 .0, &xi.0);
            prop_assert_eq!(lhs, ep.poly.scale(&s));
        }
    }
}
