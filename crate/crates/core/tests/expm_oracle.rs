//! The eigenbasis exponential against a scaling-and-squaring Taylor oracle,
//! plus structural properties of tensor products.

use proptest::prelude::*;
use qutrit_dd::linalg::{expm_propagator, hermitian_eigen, kron, Operator, C64};

/// `exp(−i h t)` by scaling and squaring a truncated Taylor series.
fn oracle(h: &Operator, t: f64) -> Operator {
    let a = h.scale(C64::new(0.0, -t));
    let norm = a.matrix().norm();
    let mut squarings = 0;
    while norm / 2f64.powi(squarings) > 0.25 {
        squarings += 1;
    }
    let small = a.scale_re(1.0 / 2f64.powi(squarings));
    let mut sum = Operator::identity(h.dims());
    let mut term = Operator::identity(h.dims());
    for n in 1..=24 {
        term = (&term * &small).scale_re(1.0 / n as f64);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

fn hermitian(dim: usize) -> impl Strategy<Value = Operator> {
    prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), dim * dim).prop_map(move |v| {
        let raw = Operator::from_fn(&[dim], |r, c| C64::new(v[r * dim + c].0, v[r * dim + c].1));
        (&raw + &raw.adjoint()).scale_re(0.5)
    })
}

fn complex(dim: usize) -> impl Strategy<Value = Operator> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), dim * dim)
        .prop_map(move |v| Operator::from_fn(&[dim], |r, c| C64::new(v[r * dim + c].0, v[r * dim + c].1)))
}

#[test]
fn oracle_reproduces_known_rotation() {
    // exp(−i θ σx) on the |0>,|e> pair.
    let mut h = Operator::zeros(&[3]);
    h.set(0, 2, C64::new(1.0, 0.0));
    h.set(2, 0, C64::new(1.0, 0.0));
    let theta = 0.7f64;
    let u = oracle(&h, theta);
    assert!((u.get(0, 0) - C64::new(theta.cos(), 0.0)).norm() < 1e-14);
    assert!((u.get(0, 2) - C64::new(0.0, -theta.sin())).norm() < 1e-14);
    assert!((u.get(1, 1) - C64::new(1.0, 0.0)).norm() < 1e-14);
}

proptest! {
    #[test]
    fn eigen_route_matches_oracle(h in hermitian(9), t in 0.0..3.0f64) {
        let u = expm_propagator(&h, t).unwrap();
        let v = oracle(&h, t);
        prop_assert!((&u - &v).max_abs() < 1e-9 * (1.0 + h.matrix().norm() * t));
    }

    #[test]
    fn propagators_are_unitary(h in hermitian(6), t in -50.0..50.0f64) {
        let u = expm_propagator(&h, t).unwrap();
        prop_assert!(u.unitarity_deviation() < 1e-9);
    }

    #[test]
    fn propagator_eigenvalues_have_unit_modulus(h in hermitian(4), t in 0.0..10.0f64) {
        let u = expm_propagator(&h, t).unwrap();
        // U is normal, so its eigenvalues are those of the Hermitian part's spectrum mapped;
        // check through U†U = I and |det U| = 1.
        let det = u.matrix().determinant();
        prop_assert!((det.norm() - 1.0).abs() < 1e-9);
        let eig = hermitian_eigen(&h).unwrap();
        let phases: C64 = eig.values.iter().map(|w| C64::from_polar(1.0, -w * t)).product();
        prop_assert!((phases - det).norm() < 1e-8);
    }

    #[test]
    fn kron_is_associative(a in complex(2), b in complex(3), c in complex(2)) {
        let left = kron(&kron(&a, &b), &c);
        let right = kron(&a, &kron(&b, &c));
        prop_assert_eq!(left.dims(), right.dims());
        prop_assert!((&left - &right).max_abs() < 1e-15);
    }

    #[test]
    fn kron_adjoint_distributes(a in complex(3), b in complex(2)) {
        let lhs = kron(&a, &b).adjoint();
        let rhs = kron(&a.adjoint(), &b.adjoint());
        prop_assert!((&lhs - &rhs).max_abs() < 1e-15);
    }
}
