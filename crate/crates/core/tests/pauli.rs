mod common;

use clinr_lab::gse;
use clinr_lab::pauli::{CliffordMap, Direction, Letter, PauliString, Prim};
use common::{random_pauli, random_prims};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn p(s: &str) -> PauliString {
    s.parse().unwrap()
}

#[test]
fn y_squared_is_identity_with_zero_phase() {
    let y = p("Y");
    let yy = y.multiply(&y).unwrap();
    assert!(yy.is_identity());
    assert_eq!(yy.phase(), 0);
}

#[test]
fn x_times_z() {
    assert_eq!(p("X").multiply(&p("Z")).unwrap(), p("-iY"));
}

#[test]
fn four_code_stabilizers_multiply_to_plus_all_z() {
    let prod = gse::STABILIZERS
        .iter()
        .map(|s| p(s))
        .reduce(|a, b| a.multiply(&b).unwrap())
        .unwrap();
    assert_eq!(prod, p("ZZZZZZ"));
}

#[test]
fn commutation_examples() {
    assert!(!p("X").commutes(&p("Z")).unwrap());
    assert!(p("YZYYZY").commutes(&p("ZZZZZZ")).unwrap());
    assert!(p("XYIIII").commutes(&p("ZZIIII")).unwrap());
    assert!(p("XY").commutes(&p("ZZZ")).is_err());
}

#[test]
fn conjugation_examples() {
    let h = CliffordMap::from_prims(1, [Prim::H(0)]);
    assert_eq!(h.conjugate(&p("X"), Direction::Forward).unwrap(), p("Z"));
    let s = CliffordMap::from_prims(1, [Prim::S(0)]);
    assert_eq!(s.conjugate(&p("X"), Direction::Forward).unwrap(), p("Y"));
    let cx = CliffordMap::from_prims(2, [Prim::Cx(0, 1)]);
    assert_eq!(cx.conjugate(&p("XI"), Direction::Forward).unwrap(), p("XX"));
    assert_eq!(cx.conjugate(&p("IZ"), Direction::Forward).unwrap(), p("ZZ"));
}

#[test]
fn weight_and_inverse() {
    let q = p("-iXIYZ");
    assert_eq!(q.weight(), 3);
    let e = q.multiply(&q.inverse()).unwrap();
    assert!(e.is_identity());
    assert_eq!(e.phase(), 0);
}

#[test]
fn sparse_text_matches_dense() {
    let dense = p("IZXIIZ");
    assert_eq!(PauliString::parse_sparse("Z1 X2 Z5", 6, 0).unwrap(), dense);
    assert_eq!(dense.to_sparse(6), "Z7 X8 Z11");
    assert_eq!(PauliString::single(3, 1, Letter::Y), p("IYI"));
}

proptest! {
    #[test]
    fn multiplication_is_associative(seed in any::<u64>(), n in 1usize..=16) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c) = (random_pauli(n, &mut rng), random_pauli(n, &mut rng), random_pauli(n, &mut rng));
        let left = a.multiply(&b).unwrap().multiply(&c).unwrap();
        let right = a.multiply(&b.multiply(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn swapped_product_differs_by_commutation_sign(seed in any::<u64>(), n in 1usize..=16) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (random_pauli(n, &mut rng), random_pauli(n, &mut rng));
        let ab = a.multiply(&b).unwrap();
        let ba = b.multiply(&a).unwrap();
        let flip = if a.anticommutes(&b).unwrap() { 2 } else { 0 };
        prop_assert_eq!(ab.unsigned(), ba.unsigned());
        prop_assert_eq!((ba.phase() + flip) % 4, ab.phase());
    }

    #[test]
    fn conjugation_is_a_homomorphism(seed in any::<u64>(), n in 1usize..=8, len in 0usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = CliffordMap::from_prims(n, random_prims(n, len, &mut rng));
        prop_assert!(c.is_symplectic());
        let (a, b) = (random_pauli(n, &mut rng), random_pauli(n, &mut rng));
        for dir in [Direction::Forward, Direction::Inverse] {
            let lhs = c.conjugate(&a.multiply(&b).unwrap(), dir).unwrap();
            let rhs = c.conjugate(&a, dir).unwrap().multiply(&c.conjugate(&b, dir).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn forward_then_inverse_is_identity(seed in any::<u64>(), n in 1usize..=8, len in 0usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = CliffordMap::from_prims(n, random_prims(n, len, &mut rng));
        let a = random_pauli(n, &mut rng);
        let f = c.conjugate(&a, Direction::Forward).unwrap();
        prop_assert_eq!(c.conjugate(&f, Direction::Inverse).unwrap(), a.clone());
        prop_assert_eq!(c.inverse().conjugate(&f, Direction::Forward).unwrap(), a);
    }

    #[test]
    fn text_round_trip(seed in any::<u64>(), n in 1usize..=16) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_pauli(n, &mut rng);
        prop_assert_eq!(a.to_string().parse::<PauliString>().unwrap(), a.clone());
        if a.is_hermitian() && !a.is_identity() {
            prop_assert_eq!(PauliString::parse_sparse(&a.to_sparse(0), n, 0).unwrap(), a);
        }
    }
}
