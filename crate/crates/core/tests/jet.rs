use bifkit::jet::{compose, conjugate, invert, PlanarJet, Poly2, UnitMultiplier};
use bifkit::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn arb_jet(degree: usize) -> impl Strategy<Value = PlanarJet> {
    let n = bifkit::jet::poly::len_for(degree);
    (
        0.5f64..1.5,
        -0.4f64..0.4,
        -0.15f64..0.15,
        -0.15f64..0.15,
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n),
    )
        .prop_map(move |(r, th, br, bi, hi)| {
            let mut terms = vec![((1, 0), Complex64::from_polar(r, th)), ((0, 1), c(br, bi))];
            for (p, q) in bifkit::jet::poly::monomials(degree).filter(|(p, q)| p + q >= 2) {
                let (re, im) = hi[bifkit::jet::poly::index(p, q)];
                terms.push(((p, q), c(re, im)));
            }
            PlanarJet::from_terms(degree, &terms).unwrap()
        })
}

fn max_diff(a: &PlanarJet, b: &PlanarJet) -> f64 {
    a.poly()
        .coeffs()
        .iter()
        .zip(b.poly().coeffs())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

proptest! {
    #[test]
    fn inverse_round_trips(f in arb_jet(3)) {
        let g = invert(&f).unwrap();
        let id = PlanarJet::identity(3).unwrap();
        prop_assert!(max_diff(&compose(&f, &g).unwrap(), &id) < 1e-9);
        prop_assert!(max_diff(&compose(&g, &f).unwrap(), &id) < 1e-9);
    }

    #[test]
    fn composition_is_associative(f in arb_jet(4), g in arb_jet(4), h in arb_jet(4)) {
        let left = compose(&compose(&f, &g).unwrap(), &h).unwrap();
        let right = compose(&f, &compose(&g, &h).unwrap()).unwrap();
        prop_assert!(max_diff(&left, &right) < 1e-9);
    }

    #[test]
    fn json_round_trip(f in arb_jet(4)) {
        let back = PlanarJet::from_json(&f.to_json()).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn evaluation_matches_composition(f in arb_jet(3), g in arb_jet(3), re in -0.01f64..0.01, im in -0.01f64..0.01) {
        // agreement up to the truncation order
        let z = c(re, im);
        let h = compose(&f, &g).unwrap();
        let err = (h.eval(z) - f.eval(g.eval(z))).norm();
        prop_assert!(err < 1e4 * z.norm().powi(4) + 1e-13);
    }
}

#[test]
fn identity_is_neutral() {
    let f = PlanarJet::from_terms(3, &[((1, 0), c(0.6, 0.8)), ((2, 1), c(0.1, -0.2)), ((0, 2), c(0.3, 0.0))]).unwrap();
    let id = PlanarJet::identity(3).unwrap();
    assert_eq!(compose(&f, &id).unwrap(), f);
    assert_eq!(compose(&id, &f).unwrap(), f);
}

#[test]
fn conjugation_by_identity() {
    let f = PlanarJet::from_terms(3, &[((1, 0), c(0.6, 0.8)), ((1, 1), c(0.5, 0.5))]).unwrap();
    let id = PlanarJet::identity(3).unwrap();
    assert!(max_diff(&conjugate(&f, &id).unwrap(), &f) < 1e-15);
}

#[test]
fn conj_swaps_indices() {
    let f = PlanarJet::from_terms(3, &[((1, 0), c(0.6, 0.8)), ((2, 0), c(1.0, 2.0))]).unwrap();
    assert_eq!(f.conj().coeff(0, 2), c(1.0, -2.0));
    assert_eq!(f.conj().conj(), f);
}

#[test]
fn degenerate_linear_part_is_rejected() {
    let f = PlanarJet::from_terms(3, &[((1, 0), c(1.0, 0.0)), ((0, 1), c(1.0, 0.0))]).unwrap();
    assert!(matches!(invert(&f), Err(Error::SingularLinearPart(_))));
}

#[test]
fn unsupported_degrees() {
    assert!(PlanarJet::zero(2).is_err());
    assert!(PlanarJet::zero(5).is_err());
    let a = PlanarJet::identity(3).unwrap();
    let b = PlanarJet::identity(4).unwrap();
    assert!(compose(&a, &b).is_err());
}

#[test]
fn json_missing_keys_are_zero() {
    let v = serde_json::json!({"degree": 3, "1,0": [0.0, 1.0]});
    let f = PlanarJet::from_json(&v).unwrap();
    assert_eq!(f.nu(), c(0.0, 1.0));
    assert_eq!(f.coeff(2, 1), c(0.0, 0.0));
}

#[test]
fn unit_multiplier_resonances() {
    let quarter = UnitMultiplier::new(std::f64::consts::FRAC_PI_2).unwrap();
    assert_eq!(quarter.resonance(), Some("pi/2"));
    assert!(quarter.require_regular().is_err());
    let third = UnitMultiplier::new(2.0 * std::f64::consts::PI / 3.0).unwrap();
    assert_eq!(third.resonance(), Some("2pi/3"));
    assert!(UnitMultiplier::new(0.0).is_err());
    let m = UnitMultiplier::new(1.0).unwrap();
    assert!(m.regular());
    assert!((m.nu().norm() - 1.0).abs() < 1e-15);
}

#[test]
fn real_polynomial_substitution() {
    // (x + y)^2 at x = 1 + s, y = t
    let x = Poly2::<f64>::var_first(3);
    let y = Poly2::<f64>::var_second(3);
    let p = (x.clone() + y.clone()).mul_trunc(&(x + y));
    let s = Poly2::var_first(3) + 1.0;
    let t = Poly2::var_second(3);
    let q = p.substitute(&s, &t);
    assert_eq!(q.get(0, 0), 1.0);
    assert_eq!(q.get(1, 0), 2.0);
    assert_eq!(q.get(1, 1), 2.0);
}
