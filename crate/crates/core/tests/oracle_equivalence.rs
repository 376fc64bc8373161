use procchain_core::chains::{enumerate_diagrams_with, gamma_coefficient, gamma_histograms, KernelConfig, MottState};
use procchain_core::lattice::{enumerate_animals, Symmetry, TwistSpec};
use procchain_core::oracle::{cluster_gamma, cluster_series, extract_source_coefficients, ClusterModel, Geometry};
use procchain_core::Complex64;

fn close(a: Complex64, b: Complex64, rel: f64) -> bool {
    (a - b).norm() <= rel * b.norm().max(1e-12)
}

#[test]
fn rings_match_kernel_through_sixth_order() {
    for mu in [0.373, 0.62] {
        let st = MottState::new(1, mu).unwrap();
        for theta in [0.0, 0.3] {
            let twist = TwistSpec::new(theta, 0);
            for n in 1..=6 {
                for k in 0..=n / 2 {
                    let nu = n - 2 * k;
                    let len = (2 * nu + 2).max(3);
                    let mut model = ClusterModel::new(Geometry::Ring(len), 1 + n as u32, st);
                    model.twist = twist;
                    let oracle = cluster_gamma(&model, k, nu).unwrap();
                    let kernel = gamma_coefficient(k, nu, &st, 1, &twist).unwrap();
                    assert!(close(kernel, oracle, 1e-7), "mu={mu} theta={theta} k={k} nu={nu}: {kernel} vs {oracle}");
                }
            }
        }
    }
}

#[test]
fn torus_matches_kernel_at_low_order() {
    let st = MottState::new(1, 0.41).unwrap();
    let model = ClusterModel::new(Geometry::Torus(6, 6), 5, st);
    let table = cluster_series(&model, 4).unwrap();
    for (k, nu) in [(1, 0), (1, 1), (1, 2), (2, 0), (0, 2), (0, 4)] {
        let oracle = table[nu][2 * k] / 36.0;
        let kernel = gamma_coefficient(k, nu, &st, 2, &TwistSpec::NONE).unwrap();
        assert!(close(kernel, oracle, 1e-9), "k={k} nu={nu}: {kernel} vs {oracle}");
    }
}

#[test]
fn ring_size_independence() {
    let st = MottState::new(1, 0.45).unwrap();
    let a = cluster_gamma(&ClusterModel::new(Geometry::Ring(8), 6, st), 1, 3).unwrap();
    let b = cluster_gamma(&ClusterModel::new(Geometry::Ring(10), 6, st), 1, 3).unwrap();
    assert!(close(a, b, 1e-12));
}

#[test]
fn fitted_ring_coefficients_follow_kernel() {
    // Finite differences in J of the fitted c2 on an 8-site ring.
    let st = MottState::new(1, 0.373).unwrap();
    let etas: Vec<f64> = (1..=10).map(|i| 0.004 * i as f64).collect();
    let js = [0.0, 0.002, 0.004];
    let c2: Vec<f64> = js
        .iter()
        .map(|&j| {
            let mut m = ClusterModel::new(Geometry::Ring(8), 3, st);
            m.j_over_u = j;
            extract_source_coefficients(&m, &etas, 2, 3).unwrap().coefficients[1]
        })
        .collect();
    let g0 = gamma_coefficient(1, 0, &st, 1, &TwistSpec::NONE).unwrap().re;
    let g1 = gamma_coefficient(1, 1, &st, 1, &TwistSpec::NONE).unwrap().re;
    assert!((c2[0] - g0).abs() < 1e-6 * g0.abs());
    let slope = (-3.0 * c2[0] + 4.0 * c2[1] - c2[2]) / (2.0 * 0.002);
    assert!((slope - g1).abs() < 2e-2 * g1.abs(), "{slope} vs {g1}");
}

#[test]
fn symmetry_reduction_matches_plain_enumeration() {
    let st = MottState::new(1, 0.39).unwrap();
    for d in [2, 3] {
        for n in 1..=6 {
            for k in 0..=n / 2 {
                let nu = n - 2 * k;
                let weight =
                    |sym| -> u64 { enumerate_diagrams_with(k, nu, d, sym).unwrap().iter().map(|x| x.multiplicity()).sum() };
                let plain = weight(Symmetry::Translations);
                assert_eq!(weight(Symmetry::Cubic), plain, "d={d} k={k} nu={nu}");
                assert_eq!(weight(Symmetry::FixingAxis(0)), plain, "d={d} k={k} nu={nu}");
                let value = |sym| {
                    let cfg = KernelConfig { symmetry: sym, ..KernelConfig::new(d) };
                    let animals = enumerate_animals(d, nu, sym).unwrap();
                    gamma_histograms(k, nu, &[st], &cfg, &animals).unwrap()[0].value_at(0.07)
                };
                let reference = value(Symmetry::Translations);
                for sym in [Symmetry::Cubic, Symmetry::FixingAxis(0)] {
                    assert!(close(value(sym), reference, 1e-12), "d={d} k={k} nu={nu} {sym:?}");
                }
            }
        }
    }
}

#[test]
fn twist_properties() {
    let st = MottState::new(1, 0.373).unwrap();
    for (k, nu) in [(1, 2), (1, 4), (2, 3), (0, 4)] {
        let g = |t: f64| gamma_coefficient(k, nu, &st, 2, &TwistSpec::new(t, 0)).unwrap();
        let g0 = g(0.0);
        assert!(g0.im.abs() <= 1e-10 * g0.re.abs() + 1e-14);
        assert!(close(g(0.01), g(-0.01), 1e-12));
        let dev: Vec<f64> = [1e-2, 1e-3, 1e-4].iter().map(|&t| (g(t) - g0).norm()).collect();
        if k == 0 {
            // Closed hop loops carry no net displacement.
            assert!(dev.iter().all(|&d| d <= 1e-12 * g0.norm()));
            continue;
        }
        let slope = (dev[0].ln() - dev[2].ln()) / (1e-2f64.ln() - 1e-4f64.ln());
        assert!((slope - 2.0).abs() < 0.1, "k={k} nu={nu}: exponent {slope}");
    }
}
