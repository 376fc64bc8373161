//! Parallel kernel driver with caching and checkpoints.
//!
//! Work units are bond animals. Each worker evaluates all diagrams of one
//! animal; the per-animal histograms are merged sequentially in animal
//! order, so results are bit-identical for any worker count and any chunking.

use crate::cache::{Cache, Checkpoint, GammaEntry, GammaKey};
use crate::error::{AppError, AppResult};
use procchain_core::chains::{animal_contribution, Evaluator, KernelConfig, MottState, TwistHistogram, DEFAULT_MAX_ORDER};
use procchain_core::lattice::{enumerate_animals, Animal, Symmetry};
use procchain_core::sum::CompensatedSum;
use procchain_core::Error as CoreError;
use rayon::prelude::*;
use std::collections::HashMap;
use std::time::Instant;

/// Rough single-core wall time of one `(k, nu)` kernel run, from timings of
/// this implementation; good to an order of magnitude.
pub fn cost_estimate_seconds(d: usize, k: usize, nu: usize) -> f64 {
    let n = (2 * k + nu) as f64;
    let per_dim = ((2 * d - 1) as f64 / 3.0).powf(nu as f64 / 2.0);
    0.7 * 10f64.powf(n - 10.0) * per_dim
}

fn human_seconds(s: f64) -> String {
    if s < 120.0 {
        format!("{s:.1e} s")
    } else if s < 7200.0 {
        format!("{:.0} min", s / 60.0)
    } else if s < 172800.0 {
        format!("{:.0} h", s / 3600.0)
    } else {
        format!("{:.0} days", s / 86400.0)
    }
}

/// Outcome of one kernel request at one chemical potential.
#[derive(Clone, Debug)]
pub struct KernelResult {
    pub entry: GammaEntry,
    pub histogram: TwistHistogram,
    pub cache_hit: bool,
}

pub struct Driver {
    cache: Cache,
    pool: rayon::ThreadPool,
    max_order: usize,
    checkpoint_every: usize,
    animals: HashMap<usize, Vec<Vec<Animal>>>,
    quiet: bool,
}

impl Driver {
    pub fn new(cache: Cache, workers: usize, max_order: usize, checkpoint_every: usize) -> AppResult<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| AppError::Usage(format!("cannot start {workers} workers: {e}")))?;
        Ok(Driver { cache, pool, max_order, checkpoint_every, animals: HashMap::new(), quiet: false })
    }

    pub fn quiet(mut self, quiet: bool) -> Self {
        self.quiet = quiet;
        self
    }

    pub fn cache(&self) -> &Cache {
        &self.cache
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }

    fn check(&self, d: usize, k: usize, nu: usize) -> AppResult<()> {
        let config = KernelConfig { max_order: self.max_order, ..KernelConfig::new(d) };
        match config.check(k, nu) {
            Err(CoreError::Capacity { order, max }) => Err(AppError::Capacity(format!(
                "order 2k + nu = {order} (k = {k}, nu = {nu}, d = {d}) exceeds the configured maximum {max} \
                 (hard limit {DEFAULT_MAX_ORDER}); estimated single-core cost {}",
                human_seconds(cost_estimate_seconds(d, k, nu))
            ))),
            other => other.map_err(AppError::from),
        }
    }

    fn animals(&mut self, d: usize, nu: usize) -> AppResult<&[Vec<Animal>]> {
        let have = self.animals.get(&d).map_or(0, |a| a.len());
        if have < nu {
            let table = enumerate_animals(d, nu, Symmetry::Cubic)?;
            self.animals.insert(d, table);
        }
        Ok(&self.animals[&d][..nu])
    }

    /// Twist histograms of `gamma_{2k}^{(nu)}` at every chemical potential in
    /// `mus`, from the cache where possible.
    pub fn gamma(&mut self, d: usize, g: u32, k: usize, nu: usize, mus: &[f64]) -> AppResult<Vec<KernelResult>> {
        self.check(d, k, nu)?;
        let keys: Vec<GammaKey> = mus.iter().map(|&mu| GammaKey { d, g, mu_over_u: mu, k, nu }).collect();
        let mut out: Vec<Option<KernelResult>> = keys
            .iter()
            .map(|key| {
                self.cache.load_gamma(key).and_then(|entry| {
                    let histogram = entry.histogram().ok()?;
                    Some(KernelResult { entry, histogram, cache_hit: true })
                })
            })
            .collect();
        let missing: Vec<usize> = (0..keys.len()).filter(|&i| out[i].is_none()).collect();
        if !missing.is_empty() {
            let miss_keys: Vec<GammaKey> = missing.iter().map(|&i| keys[i]).collect();
            for (i, r) in missing.into_iter().zip(self.compute(&miss_keys)?) {
                out[i] = Some(r);
            }
        }
        Ok(out.into_iter().map(|r| r.expect("every key resolved")).collect())
    }

    fn compute(&mut self, keys: &[GammaKey]) -> AppResult<Vec<KernelResult>> {
        let GammaKey { d, g, k, nu, .. } = keys[0];
        let states = keys.iter().map(|key| MottState::new(g, key.mu_over_u)).collect::<Result<Vec<_>, _>>()?;
        let units: Vec<Animal> =
            if nu == 0 { vec![Animal::single_site(d)?] } else { self.animals(d, nu)?.iter().flatten().cloned().collect() };
        let kato_terms = if (2..=10).contains(&(2 * k + nu)) { Some(self.cache.kato_terms(2 * k + nu)?.len()) } else { None };
        let start = Instant::now();
        let mut acc: Vec<TwistHistogram> = states.iter().map(|_| TwistHistogram::new(nu)).collect();
        let mut diagrams = 0u64;
        let mut next = 0usize;
        let mut elapsed_before = 0.0;
        let checkpointing = units.len() > self.checkpoint_every;
        if checkpointing {
            if let Some(cp) = self.cache.load_checkpoint(keys, units.len()) {
                for (h, parts) in acc.iter_mut().zip(&cp.parts) {
                    for (b, &(s, c)) in h.bins.iter_mut().zip(parts) {
                        *b = CompensatedSum::from_parts(s, c);
                    }
                }
                diagrams = cp.diagrams;
                next = cp.next_unit;
                elapsed_before = cp.elapsed_seconds;
            }
        }
        if !self.quiet {
            eprintln!(
                "kernel d={d} g={g} k={k} nu={nu}: {} animals, {} chemical potential(s), {} workers",
                units.len(),
                states.len(),
                self.workers()
            );
        }
        while next < units.len() {
            let end = (next + self.checkpoint_every).min(units.len());
            let chunk = &units[next..end];
            let parts: Vec<(Vec<TwistHistogram>, usize)> = self.pool.install(|| {
                chunk
                    .par_iter()
                    .map_init(Evaluator::new, |ev, animal| animal_contribution(ev, animal, k, nu, &states, d, Symmetry::Cubic, 0))
                    .collect()
            });
            for (h, count) in &parts {
                for (a, b) in acc.iter_mut().zip(h) {
                    a.merge(b);
                }
                diagrams += *count as u64;
            }
            next = end;
            if checkpointing && next < units.len() {
                self.cache.store_checkpoint(&Checkpoint {
                    code_version: self.cache.version().to_string(),
                    keys: keys.to_vec(),
                    total_units: units.len(),
                    next_unit: next,
                    diagrams,
                    elapsed_seconds: elapsed_before + start.elapsed().as_secs_f64(),
                    parts: acc.iter().map(|h| h.bins.iter().map(|b| b.parts()).collect()).collect(),
                })?;
                if !self.quiet {
                    eprintln!("  checkpoint at {next}/{}", units.len());
                }
            }
        }
        let wall = elapsed_before + start.elapsed().as_secs_f64();
        let mut results = Vec::with_capacity(keys.len());
        for (key, h) in keys.iter().zip(acc) {
            let bins = h.raw_bins();
            // Normalise to the representation a cache hit reproduces.
            let histogram = TwistHistogram::from_raw(nu, &bins)?;
            let g0 = histogram.value_at(0.0);
            let entry = GammaEntry {
                key: *key,
                code_version: self.cache.version().to_string(),
                gamma: [g0.re, g0.im],
                bins,
                diagrams,
                animals: units.len() as u64,
                kato_terms,
                wall_seconds: wall,
            };
            self.cache.store_gamma(&entry)?;
            results.push(KernelResult { entry, histogram, cache_hit: false });
        }
        self.cache.clear_checkpoint(keys);
        Ok(results)
    }
}
