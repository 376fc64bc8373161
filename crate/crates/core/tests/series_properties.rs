use procchain_core::lattice::TwistSpec;
use procchain_core::observables::{dlog_exponent, DensityCurve, DensityKind};
use procchain_core::series::{landau_from_sources, minimize_sextic, TruncatedSeries};
use procchain_core::Complex64;
use proptest::prelude::*;

fn coeffs(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, len)
}

fn close(a: &TruncatedSeries, b: &TruncatedSeries, tol: f64) -> bool {
    a.coefficients().iter().zip(b.coefficients()).all(|(x, y)| (x - y).norm() <= tol * (1.0 + x.norm().max(y.norm())))
}

proptest! {
    #[test]
    fn reciprocal_is_inverse(mut c in coeffs(8), lead in 0.5f64..4.0, sign in prop::bool::ANY) {
        c[0] = if sign { lead } else { -lead };
        let s = TruncatedSeries::from_real(&c).unwrap();
        let prod = s.multiply(&s.reciprocal().unwrap()).unwrap();
        prop_assert!(close(&prod, &TruncatedSeries::one(7), 1e-9));
    }

    #[test]
    fn multiplication_associates(a in coeffs(7), b in coeffs(7), c in coeffs(7)) {
        let (a, b, c) = (
            TruncatedSeries::from_real(&a).unwrap(),
            TruncatedSeries::from_real(&b).unwrap(),
            TruncatedSeries::from_real(&c).unwrap(),
        );
        let left = a.multiply(&b).unwrap().multiply(&c).unwrap();
        let right = a.multiply(&b.multiply(&c).unwrap()).unwrap();
        prop_assert!(close(&left, &right, 1e-10));
    }

    #[test]
    fn landau_inverts_sources(mut c2 in coeffs(6), c4 in coeffs(6), c6 in coeffs(6), lead in 0.5f64..3.0) {
        c2[0] = -lead;
        let s2 = TruncatedSeries::from_real(&c2).unwrap();
        let s4 = TruncatedSeries::from_real(&c4).unwrap();
        let s6 = TruncatedSeries::from_real(&c6).unwrap();
        let l = landau_from_sources(&s2, &s4, &s6, 0.4, TwistSpec::NONE).unwrap();
        // a2 c2 = -1, a4 c2^4 = c4, a6 c2^7 = c6 c2 - 4 c4^2
        let one = TruncatedSeries::one(5);
        prop_assert!(close(&l.a2.multiply(&s2).unwrap(), &-&one, 1e-9));
        prop_assert!(close(&l.a4.multiply(&s2.powi(4)).unwrap(), &s4, 1e-8));
        let rhs = &s6.multiply(&s2).unwrap() - &s4.multiply(&s4).unwrap().scale(Complex64::new(4.0, 0.0));
        prop_assert!(close(&l.a6.multiply(&s2.powi(7)).unwrap(), &rhs, 1e-7));
    }

    #[test]
    fn sextic_minimum_is_global(a2 in -2.0f64..2.0, a4 in -2.0f64..2.0, a6 in 0.1f64..2.0) {
        let m = minimize_sextic(a2, a4, a6).unwrap();
        let f = |x: f64| x * (a2 + x * (a4 + x * a6));
        prop_assert!((f(m.psi_squared) - m.value).abs() < 1e-12);
        for i in 0..=4000 {
            let x = i as f64 * 1e-3;
            prop_assert!(f(x) >= m.value - 1e-12);
        }
    }

    #[test]
    fn dlog_ignores_amplitude(beta in 0.3f64..1.5, amp in 0.01f64..100.0) {
        let j_c = 0.06;
        let j: Vec<f64> = (1..=60).map(|i| j_c + i as f64 * 5e-4).collect();
        let curve = |a: f64| DensityCurve {
            kind: DensityKind::Condensate,
            j_over_u: j.clone(),
            values: j.iter().map(|x| a * (x - j_c).powf(beta)).collect(),
            nu_m: 4,
            twist: TwistSpec::NONE,
            anomalies: Vec::new(),
        };
        let base = dlog_exponent(&curve(1.0), j_c, None).unwrap();
        let scaled = dlog_exponent(&curve(amp), j_c, None).unwrap();
        prop_assert!((base.exponent - beta).abs() < 1e-6);
        prop_assert!((base.exponent - scaled.exponent).abs() < 1e-9);
    }
}
