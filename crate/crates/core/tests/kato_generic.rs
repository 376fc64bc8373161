use procchain_core::kato::{binomial, enumerate_alpha_sequences, reduce_to_kato_terms, DenseProblem};
use procchain_core::oracle::rayleigh_schrodinger;
use procchain_core::Complex64;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

fn random_problem(rng: &mut StdRng, n: usize, complex: bool) -> (Vec<f64>, Vec<Complex64>) {
    let mut h0: Vec<f64> = (0..n).map(|i| i as f64 + rng.random_range(-0.3..0.3)).collect();
    h0[0] = -0.5;
    let mut v = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in i..n {
            let re = rng.random_range(-1.0..1.0);
            let im = if complex && i != j { rng.random_range(-1.0..1.0) } else { 0.0 };
            v[i * n + j] = Complex64::new(re, im);
            v[j * n + i] = Complex64::new(re, -im);
        }
    }
    (h0, v)
}

#[test]
fn reduced_terms_match_recursive_series() {
    let mut rng = StdRng::seed_from_u64(7);
    let lists: Vec<_> = (2..=6).map(|n| reduce_to_kato_terms(n).unwrap()).collect();
    for trial in 0..6 {
        let (h0, v) = random_problem(&mut rng, 8, trial % 2 == 1);
        let reference = rayleigh_schrodinger(&h0, &v, 0, 6).unwrap();
        let p = DenseProblem { h0: &h0, v: &v, m: 0 };
        for (n, terms) in (2..=6).zip(&lists) {
            let got = p.evaluate(terms);
            let want = reference[n - 1];
            assert!((got - want).norm() <= 1e-10 * want.norm().max(1e-300), "trial {trial} order {n}: {got} vs {want}");
        }
    }
}

#[test]
fn term_counts() {
    let counts: Vec<usize> = (2..=10).map(|n| reduce_to_kato_terms(n).unwrap().len()).collect();
    assert_eq!(counts[3], 10);
    assert_eq!(counts[8], 627);
    for w in counts.windows(2) {
        assert!(w[1] > w[0]);
    }
    for (i, w) in counts.windows(2).enumerate().skip(2) {
        assert!(w[1] > 2 * w[0], "orders {} -> {}", i + 2, i + 3);
    }
}

#[test]
fn alpha_cardinalities() {
    for n in 1..=12u64 {
        assert_eq!(enumerate_alpha_sequences(n as usize).unwrap().len() as u64, binomial(2 * n - 1, n));
    }
}
