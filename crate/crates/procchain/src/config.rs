//! Run configuration: a plain `key = value` file plus flag overrides.

use crate::error::{AppError, AppResult};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Environment variable naming the cache root.
pub const CACHE_ENV: &str = "PROCCHAIN_CACHE";
pub const DEFAULT_CACHE_DIR: &str = ".procchain-cache";

/// `(key, default, description)` for every configuration key.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("d", "2", "lattice dimension (1-4)"),
    ("g", "1", "filling factor of the Mott state"),
    ("mu", "auto", "chemical potential mu/U; auto = lobe tip (0.373 for d=2, 0.393 for d=3, 0.4 otherwise)"),
    ("mu_grid", "0.30:0.46:0.01", "lobe scan: start:stop:step (inclusive) or comma list"),
    ("k_min", "1", "coefficients: smallest source order k"),
    ("k_max", "3", "coefficients: largest source order k"),
    ("nu_min", "0", "coefficients: smallest hopping order"),
    ("nu_max", "4", "coefficients and lobe: largest hopping order"),
    ("orders", "4", "exponents and potential: truncation orders nu_m (comma list or a:b)"),
    ("observable", "both", "exponents: beta_c, zeta or both"),
    ("twists", "0.001,0.01", "twist values theta/ell (comma list, may be empty)"),
    ("jc_source", "order", "exponents: critical point from the same-order a2 zero (order) or the ratio test (ratio)"),
    ("ratio_order", "8", "hopping order of the c2 series used when jc_source = ratio"),
    ("j_grid", "auto", "exponents: J/U grid; auto = J_c + i*j_step for i = 1..=j_points"),
    ("j_step", "0.001", "spacing of the automatic J/U grid"),
    ("j_points", "60", "number of points of the automatic J/U grid"),
    ("fit_window", "auto", "Dlog fit window lo,hi in t = J/U - (J/U)_c; auto = best R^2 with t <= 0.04"),
    ("j_values", "0.055,0.059", "potential: J/U values"),
    ("psi_max", "0.6", "potential: largest |psi|"),
    ("psi_points", "61", "potential: number of |psi| points from 0 to psi_max"),
    ("search_max", "auto", "upper end of the a2 root search; auto = 0.4, 0.2, 0.1 for d = 1, 2, >= 3"),
    ("min_fit_order", "4", "lowest nu_m in the odd/even zero fits"),
    ("ratio_first", "2", "lowest nu in the ratio test"),
    ("max_order", "12", "largest perturbative order 2k + nu the kernel may run (hard limit 14)"),
    ("oracle_order", "4", "oracle: largest order checked"),
    ("oracle_tol", "1e-7", "oracle: relative tolerance of kernel versus cluster series"),
    ("kato_tol", "1e-10", "oracle: relative tolerance of the generic Kato check"),
    ("oracle_sites", "6", "oracle: ring length of the Lanczos check"),
    ("oracle_nmax", "3", "oracle: occupation cutoff of the Lanczos check"),
    ("oracle_budget", "4000000", "oracle: largest Hilbert-space dimension"),
    ("inject_fault", "none", "oracle: perturb the weight of Kato term ORDER:INDEX"),
    ("seed", "1", "oracle: seed of the random test problems"),
    ("cache_dir", "", "cache root; empty = $PROCCHAIN_CACHE, else .procchain-cache"),
    ("out_dir", "procchain-out", "directory for CSV and JSON output"),
    ("workers", "0", "worker threads; 0 = all cores"),
    ("checkpoint_every", "4096", "animals per checkpointed chunk of a kernel run"),
];

pub fn keys_help() -> String {
    let mut s = String::from("Configuration keys (config file `key = value`, or --set key=value):\n");
    for (k, d, text) in KEYS {
        let shown = if d.is_empty() { "\"\"" } else { d };
        s.push_str(&format!("  {k:<17} {text} [default: {shown}]\n"));
    }
    s.push_str(&format!("\nEnvironment: {CACHE_ENV} sets the cache root.\n"));
    s.push_str("Exit codes: 0 success, 2 usage, 3 computation failure, 4 capacity or budget refusal.\n");
    s
}

/// Raw key/value layers; later layers win.
#[derive(Clone, Debug)]
pub struct ConfigLayers {
    values: BTreeMap<String, String>,
}

impl Default for ConfigLayers {
    fn default() -> Self {
        ConfigLayers { values: KEYS.iter().map(|(k, d, _)| (k.to_string(), d.to_string())).collect() }
    }
}

impl ConfigLayers {
    pub fn set(&mut self, key: &str, value: &str) -> AppResult<()> {
        if !KEYS.iter().any(|(k, _, _)| *k == key) {
            return Err(AppError::Usage(format!("unknown configuration key `{key}`")));
        }
        self.values.insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    pub fn set_pair(&mut self, pair: &str) -> AppResult<()> {
        let (k, v) = pair.split_once('=').ok_or_else(|| AppError::Usage(format!("expected key=value, got `{pair}`")))?;
        self.set(k.trim(), v)
    }

    pub fn load_file(&mut self, path: &Path) -> AppResult<()> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        self.load_str(&text).map_err(|e| AppError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn load_str(&mut self, text: &str) -> AppResult<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| AppError::Usage(format!("line {}: expected key = value", i + 1)))?;
            self.set(k.trim(), v).map_err(|e| AppError::Usage(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    fn get(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Observable {
    BetaC,
    Zeta,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JcSource {
    SameOrder,
    Ratio,
}

/// Validated configuration of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub d: usize,
    pub g: u32,
    pub mu: f64,
    pub mu_grid: Vec<f64>,
    pub k_min: usize,
    pub k_max: usize,
    pub nu_min: usize,
    pub nu_max: usize,
    pub orders: Vec<usize>,
    pub observable: Observable,
    pub twists: Vec<f64>,
    pub jc_source: JcSource,
    pub ratio_order: usize,
    pub j_grid: Option<Vec<f64>>,
    pub j_step: f64,
    pub j_points: usize,
    pub fit_window: Option<(f64, f64)>,
    pub j_values: Vec<f64>,
    pub psi_max: f64,
    pub psi_points: usize,
    pub search_max: f64,
    pub min_fit_order: usize,
    pub ratio_first: usize,
    pub max_order: usize,
    pub oracle_order: usize,
    pub oracle_tol: f64,
    pub kato_tol: f64,
    pub oracle_sites: usize,
    pub oracle_nmax: u32,
    pub oracle_budget: usize,
    pub inject_fault: Option<(usize, usize)>,
    pub seed: u64,
    pub cache_dir: PathBuf,
    pub out_dir: PathBuf,
    pub workers: usize,
    pub checkpoint_every: usize,
    /// Resolved values of every key, echoed into output metadata.
    pub echo: BTreeMap<String, String>,
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> AppResult<T> {
    v.parse().map_err(|_| AppError::Usage(format!("invalid value `{v}` for `{key}`")))
}

fn round12(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

/// `a:b:step` (inclusive) or a comma list; empty text gives an empty list.
pub fn parse_real_list(key: &str, v: &str) -> AppResult<Vec<f64>> {
    let v = v.trim();
    if v.is_empty() {
        return Ok(Vec::new());
    }
    let parts: Vec<&str> = v.split(':').collect();
    if parts.len() == 3 {
        let (a, b, s): (f64, f64, f64) = (parse(key, parts[0])?, parse(key, parts[1])?, parse(key, parts[2])?);
        if !(s > 0.0) || b < a {
            return Err(AppError::Usage(format!("invalid range `{v}` for `{key}`")));
        }
        let n = ((b - a) / s + 1e-9).floor() as usize;
        return Ok((0..=n).map(|i| round12(a + i as f64 * s)).collect());
    }
    v.split(',').map(|x| parse(key, x.trim())).collect()
}

fn parse_order_list(key: &str, v: &str) -> AppResult<Vec<usize>> {
    let v = v.trim();
    if let Some((a, b)) = v.split_once(':') {
        let (a, b): (usize, usize) = (parse(key, a)?, parse(key, b)?);
        if b < a {
            return Err(AppError::Usage(format!("invalid range `{v}` for `{key}`")));
        }
        return Ok((a..=b).collect());
    }
    v.split(',').filter(|x| !x.trim().is_empty()).map(|x| parse(key, x.trim())).collect()
}

fn auto_or<T: std::str::FromStr>(key: &str, v: &str) -> AppResult<Option<T>> {
    if v == "auto" {
        Ok(None)
    } else {
        parse(key, v).map(Some)
    }
}

pub fn default_mu(d: usize) -> f64 {
    match d {
        2 => 0.373,
        3 => 0.393,
        _ => 0.4,
    }
}

impl RunConfig {
    pub fn from_layers(layers: &ConfigLayers) -> AppResult<Self> {
        let get = |k: &str| layers.get(k);
        let d: usize = parse("d", get("d"))?;
        if d == 0 || d > procchain_core::lattice::MAX_DIM {
            return Err(AppError::Usage(format!("d must lie in 1..={}", procchain_core::lattice::MAX_DIM)));
        }
        let g: u32 = parse("g", get("g"))?;
        if g == 0 {
            return Err(AppError::Usage("g must be positive".into()));
        }
        let mu = auto_or("mu", get("mu"))?.unwrap_or(default_mu(d) + (g - 1) as f64);
        let observable = match get("observable") {
            "beta_c" => Observable::BetaC,
            "zeta" => Observable::Zeta,
            "both" => Observable::Both,
            v => return Err(AppError::Usage(format!("invalid value `{v}` for `observable`"))),
        };
        let jc_source = match get("jc_source") {
            "order" => JcSource::SameOrder,
            "ratio" => JcSource::Ratio,
            v => return Err(AppError::Usage(format!("invalid value `{v}` for `jc_source`"))),
        };
        let j_grid = match get("j_grid") {
            "auto" => None,
            v => Some(parse_real_list("j_grid", v)?),
        };
        let fit_window = match get("fit_window") {
            "auto" => None,
            v => {
                let w = parse_real_list("fit_window", v)?;
                if w.len() != 2 || !(w[0] > 0.0 && w[1] > w[0]) {
                    return Err(AppError::Usage(format!("fit_window must be lo,hi with 0 < lo < hi, got `{v}`")));
                }
                Some((w[0], w[1]))
            }
        };
        let inject_fault = match get("inject_fault") {
            "none" | "" => None,
            v => {
                let (a, b) =
                    v.split_once(':').ok_or_else(|| AppError::Usage(format!("inject_fault must be ORDER:INDEX, got `{v}`")))?;
                Some((parse("inject_fault", a)?, parse("inject_fault", b)?))
            }
        };
        let cache_dir = match get("cache_dir") {
            "" => std::env::var_os(CACHE_ENV)
                .filter(|v| !v.is_empty())
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR)),
            v => PathBuf::from(v),
        };
        let search_max = auto_or("search_max", get("search_max"))?.unwrap_or(procchain_core::observables::default_search_max(d));
        let cfg = RunConfig {
            d,
            g,
            mu,
            mu_grid: parse_real_list("mu_grid", get("mu_grid"))?,
            k_min: parse("k_min", get("k_min"))?,
            k_max: parse("k_max", get("k_max"))?,
            nu_min: parse("nu_min", get("nu_min"))?,
            nu_max: parse("nu_max", get("nu_max"))?,
            orders: parse_order_list("orders", get("orders"))?,
            observable,
            twists: parse_real_list("twists", get("twists"))?,
            jc_source,
            ratio_order: parse("ratio_order", get("ratio_order"))?,
            j_grid,
            j_step: parse("j_step", get("j_step"))?,
            j_points: parse("j_points", get("j_points"))?,
            fit_window,
            j_values: parse_real_list("j_values", get("j_values"))?,
            psi_max: parse("psi_max", get("psi_max"))?,
            psi_points: parse("psi_points", get("psi_points"))?,
            search_max,
            min_fit_order: parse("min_fit_order", get("min_fit_order"))?,
            ratio_first: parse("ratio_first", get("ratio_first"))?,
            max_order: parse("max_order", get("max_order"))?,
            oracle_order: parse("oracle_order", get("oracle_order"))?,
            oracle_tol: parse("oracle_tol", get("oracle_tol"))?,
            kato_tol: parse("kato_tol", get("kato_tol"))?,
            oracle_sites: parse("oracle_sites", get("oracle_sites"))?,
            oracle_nmax: parse("oracle_nmax", get("oracle_nmax"))?,
            oracle_budget: parse("oracle_budget", get("oracle_budget"))?,
            inject_fault,
            seed: parse("seed", get("seed"))?,
            out_dir: PathBuf::from(get("out_dir")),
            workers: parse("workers", get("workers"))?,
            checkpoint_every: parse("checkpoint_every", get("checkpoint_every"))?,
            echo: BTreeMap::new(),
            cache_dir,
        };
        cfg.validate()?;
        let mut echo: BTreeMap<String, String> = layers.values.clone();
        echo.insert("mu".into(), format!("{}", cfg.mu));
        echo.insert("search_max".into(), format!("{}", cfg.search_max));
        echo.insert("cache_dir".into(), cfg.cache_dir.display().to_string());
        Ok(RunConfig { echo, ..cfg })
    }

    fn validate(&self) -> AppResult<()> {
        let usage = |m: String| Err(AppError::Usage(m));
        let g = self.g as f64;
        if !(self.mu > g - 1.0 && self.mu < g) {
            return usage(format!("mu = {} lies outside the Mott window ({}, {})", self.mu, g - 1.0, g));
        }
        if self.k_min > self.k_max || self.nu_min > self.nu_max {
            return usage("empty k or nu range".into());
        }
        if self.orders.is_empty() || self.orders.contains(&0) {
            return usage("orders must list positive truncation orders".into());
        }
        if self.twists.iter().any(|t| !(t.is_finite() && *t != 0.0)) {
            return usage("twists must be finite and nonzero".into());
        }
        if !(self.j_step > 0.0) || self.j_points == 0 {
            return usage("j_step must be positive and j_points nonzero".into());
        }
        if !(self.psi_max > 0.0) || self.psi_points < 2 {
            return usage("psi_max must be positive and psi_points at least 2".into());
        }
        if !(self.search_max > 0.0) {
            return usage("search_max must be positive".into());
        }
        if self.checkpoint_every == 0 {
            return usage("checkpoint_every must be positive".into());
        }
        if self.max_order == 0 {
            return usage("max_order must be positive".into());
        }
        if !(self.oracle_tol > 0.0 && self.kato_tol > 0.0) {
            return usage("tolerances must be positive".into());
        }
        if self.mu_grid.iter().any(|&m| !(m > g - 1.0 && m < g)) {
            return usage(format!("mu_grid leaves the Mott window ({}, {})", g - 1.0, g));
        }
        Ok(())
    }

    /// Echoed configuration as `key = value` lines.
    pub fn echo_lines(&self) -> Vec<String> {
        self.echo.iter().map(|(k, v)| format!("{k} = {v}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_overrides() {
        let mut l = ConfigLayers::default();
        l.load_str("# comment\nd = 3\nnu_max = 6 # trailing\n").unwrap();
        l.set_pair("nu_max=5").unwrap();
        let c = RunConfig::from_layers(&l).unwrap();
        assert_eq!(c.d, 3);
        assert_eq!(c.nu_max, 5);
        assert_eq!(c.mu, 0.393);
        assert_eq!(c.echo["nu_max"], "5");
    }

    #[test]
    fn rejects_bad_input() {
        let mut l = ConfigLayers::default();
        assert!(l.set("nonsense", "1").is_err());
        assert!(l.load_str("d 3").is_err());
        l.set("mu", "1.2").unwrap();
        assert!(RunConfig::from_layers(&l).is_err());
    }

    #[test]
    fn ranges() {
        let v = parse_real_list("x", "0.30:0.33:0.01").unwrap();
        assert_eq!(v, vec![0.3, 0.31, 0.32, 0.33]);
        assert_eq!(parse_order_list("o", "2:4").unwrap(), vec![2, 3, 4]);
        assert!(parse_real_list("x", "").unwrap().is_empty());
    }
}
