//! Series and Landau approximants assembled from cached kernel output.

use crate::driver::Driver;
use crate::error::AppResult;
use procchain_core::chains::{MottState, TwistHistogram};
use procchain_core::lattice::TwistSpec;
use procchain_core::series::{landau_from_sources, LandauApproximant, TruncatedSeries};
use procchain_core::Complex64;

pub struct Engine {
    pub driver: Driver,
    pub d: usize,
    pub g: u32,
    keys: Vec<String>,
}

impl Engine {
    pub fn new(driver: Driver, d: usize, g: u32) -> Self {
        Engine { driver, d, g, keys: Vec::new() }
    }

    pub fn record_key(&mut self, key: String) {
        self.keys.push(key);
    }

    /// Cache keys of every kernel value used so far.
    pub fn cache_keys(&self) -> Vec<String> {
        self.keys.clone()
    }

    /// Histograms of `gamma_{2k}^{(nu)}` for `nu = 0..=nu_m`, one vector per
    /// chemical potential.
    pub fn histograms(&mut self, k: usize, nu_m: usize, mus: &[f64]) -> AppResult<Vec<Vec<TwistHistogram>>> {
        let mut out: Vec<Vec<TwistHistogram>> = mus.iter().map(|_| Vec::with_capacity(nu_m + 1)).collect();
        for nu in 0..=nu_m {
            if k == 0 && nu == 0 {
                for (o, &mu) in out.iter_mut().zip(mus) {
                    let e = MottState::new(self.g, mu)?.site_energy(self.g);
                    o.push(TwistHistogram::from_raw(0, &[e])?);
                }
                continue;
            }
            let version = self.driver.cache().version().to_string();
            for (o, r) in out.iter_mut().zip(self.driver.gamma(self.d, self.g, k, nu, mus)?) {
                self.keys.push(r.entry.key.label(&version));
                o.push(r.histogram);
            }
        }
        Ok(out)
    }

    /// `c_{2k}(J/U)` truncated at `nu_m`, at twist `theta_over_ell`.
    pub fn source_series(&mut self, k: usize, nu_m: usize, mu: f64, theta_over_ell: f64) -> AppResult<TruncatedSeries> {
        let h = self.histograms(k, nu_m, &[mu])?.remove(0);
        series_at(&h, theta_over_ell)
    }

    /// Landau approximant of order `nu_m` at twist `theta_over_ell`, with the
    /// free-energy series `f0` attached when `with_f0` is set.
    pub fn landau(&mut self, mu: f64, nu_m: usize, theta_over_ell: f64, with_f0: bool) -> AppResult<LandauApproximant> {
        let c2 = self.source_series(1, nu_m, mu, theta_over_ell)?;
        let c4 = self.source_series(2, nu_m, mu, theta_over_ell)?;
        let c6 = self.source_series(3, nu_m, mu, theta_over_ell)?;
        let l = landau_from_sources(&c2, &c4, &c6, mu, TwistSpec::new(theta_over_ell, 0))?;
        if with_f0 {
            let f0 = self.source_series(0, nu_m, mu, theta_over_ell)?;
            return Ok(l.with_f0(f0)?);
        }
        Ok(l)
    }
}

pub fn series_at(h: &[TwistHistogram], theta_over_ell: f64) -> AppResult<TruncatedSeries> {
    let c: Vec<Complex64> = h.iter().map(|x| x.value_at(theta_over_ell)).collect();
    Ok(TruncatedSeries::new(c)?)
}
