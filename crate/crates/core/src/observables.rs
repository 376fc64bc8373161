//! Phase boundaries, densities and critical exponents.

use alloc::vec::Vec;

use crate::fit::{line_fit, LineFit};
use crate::lattice::TwistSpec;
use crate::series::{LandauApproximant, TruncatedSeries};
use crate::{Error, Result};

/// Default upper end of the `a2` root search.
pub fn default_search_max(d: usize) -> f64 {
    match d {
        0 | 1 => 0.4,
        2 => 0.2,
        _ => 0.1,
    }
}

const SCAN_STEPS: usize = 4000;
const ROOT_TOL: f64 = 1e-13;

/// Smallest positive zero of a real polynomial in `(0, search_max]`.
pub fn first_positive_root(poly: &TruncatedSeries, search_max: f64) -> Result<f64> {
    if !(search_max > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!("search interval end {search_max} is not positive")));
    }
    let f = |x: f64| poly.evaluate_real(x);
    let mut lo = 0.0;
    let mut flo = f(lo);
    for i in 1..=SCAN_STEPS {
        let hi = search_max * i as f64 / SCAN_STEPS as f64;
        let fhi = f(hi);
        if fhi == 0.0 {
            return Ok(hi);
        }
        if flo != 0.0 && (flo < 0.0) != (fhi < 0.0) {
            return Ok(bisect(f, lo, hi, flo));
        }
        lo = hi;
        flo = fhi;
    }
    Err(Error::NoRoot)
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, flo: f64) -> f64 {
    let neg = flo < 0.0;
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == neg {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Boundary estimate `(J/U)_0`: the smallest positive zero of the truncated
/// `a2` polynomial.
pub fn a2_zero(landau: &LandauApproximant, search_max: f64) -> Result<f64> {
    first_positive_root(&landau.a2, search_max)
}

/// Lowest hop order whose ratio enters the default ratio test.
pub const DEFAULT_RATIO_FIRST: usize = 2;

/// Radius of convergence of the `c2` series from the ratios
/// `r_nu = |gamma^(nu-1) / gamma^(nu)|`, `nu >= 2`, extrapolated linearly in
/// `1/nu` to `1/nu = 0`.
pub fn ratio_test(c2: &TruncatedSeries) -> Result<f64> {
    ratio_test_from(c2, DEFAULT_RATIO_FIRST)
}

/// As [`ratio_test`], using ratios from order `first` on.
pub fn ratio_test_from(c2: &TruncatedSeries, first: usize) -> Result<f64> {
    let first = first.max(1);
    let coeffs = c2.real_parts();
    let needed = (first + 2).max(4);
    if coeffs.len() < needed {
        return Err(Error::InsufficientData { needed, got: coeffs.len() });
    }
    let mut x = Vec::new();
    let mut y = Vec::new();
    for nu in first..coeffs.len() {
        if coeffs[nu] == 0.0 || coeffs[nu - 1] == 0.0 {
            return Err(Error::IllConditioned(alloc::format!("coefficient of order {} vanishes", nu)));
        }
        x.push(1.0 / nu as f64);
        y.push((coeffs[nu - 1] / coeffs[nu]).abs());
    }
    Ok(line_fit(&x, &y)?.intercept)
}

/// Boundary analysis options.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryOptions {
    pub search_max: f64,
    /// Lowest `nu_m` entering the odd and even line fits.
    pub min_fit_order: usize,
    pub ratio_first: usize,
}

impl BoundaryOptions {
    pub fn for_dimension(d: usize) -> Self {
        BoundaryOptions { search_max: default_search_max(d), min_fit_order: 4, ratio_first: DEFAULT_RATIO_FIRST }
    }
}

/// Boundary estimates at one chemical potential.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryEstimate {
    pub mu_over_u: f64,
    /// `(nu_m, (J/U)_0)` for every order whose `a2` has a root.
    pub zeros_by_order: Vec<(usize, f64)>,
    /// Orders whose `a2` approximant has no root in the search interval.
    pub missing_orders: Vec<usize>,
    /// Line fits of the zeros over `1/nu_m`.
    pub odd_fit: Option<LineFit>,
    pub even_fit: Option<LineFit>,
    pub ratio_estimate: Option<f64>,
}

impl BoundaryEstimate {
    pub fn odd_bound(&self) -> Option<f64> {
        self.odd_fit.map(|f| f.intercept)
    }

    pub fn even_bound(&self) -> Option<f64> {
        self.even_fit.map(|f| f.intercept)
    }

    pub fn zero_at(&self, nu_m: usize) -> Option<f64> {
        self.zeros_by_order.iter().find(|(n, _)| *n == nu_m).map(|p| p.1)
    }
}

/// All boundary estimates derivable from one `c2` series.
pub fn boundary_estimate(c2: &TruncatedSeries, mu_over_u: f64, options: &BoundaryOptions) -> Result<BoundaryEstimate> {
    let inv = c2.reciprocal()?;
    let mut zeros = Vec::new();
    let mut missing = Vec::new();
    for nu_m in 1..=c2.max_order() {
        let a2 = -&inv.truncate(nu_m)?;
        match first_positive_root(&a2, options.search_max) {
            Ok(z) => zeros.push((nu_m, z)),
            Err(Error::NoRoot) => missing.push(nu_m),
            Err(e) => return Err(e),
        }
    }
    let parity_fit = |parity: usize| {
        let pts: Vec<&(usize, f64)> = zeros.iter().filter(|(n, _)| n % 2 == parity && *n >= options.min_fit_order).collect();
        let x: Vec<f64> = pts.iter().map(|(n, _)| 1.0 / *n as f64).collect();
        let y: Vec<f64> = pts.iter().map(|(_, z)| *z).collect();
        line_fit(&x, &y).ok()
    };
    Ok(BoundaryEstimate {
        mu_over_u,
        odd_fit: parity_fit(1),
        even_fit: parity_fit(0),
        ratio_estimate: ratio_test_from(c2, options.ratio_first).ok(),
        zeros_by_order: zeros,
        missing_orders: missing,
    })
}

/// Lobe scan result.
#[derive(Clone, Debug, PartialEq)]
pub struct MottLobe {
    pub points: Vec<BoundaryEstimate>,
    /// `(mu/U, (J/U)_c)` at the maximum of the ratio-test boundary.
    pub tip: Option<(f64, f64)>,
}

/// Boundary estimates per chemical potential plus the lobe tip, located as
/// the vertex of a parabola through the largest ratio estimate and its grid
/// neighbours.
pub fn mott_lobe(points: Vec<BoundaryEstimate>) -> MottLobe {
    let tip = lobe_tip(&points);
    MottLobe { points, tip }
}

fn lobe_tip(points: &[BoundaryEstimate]) -> Option<(f64, f64)> {
    let usable: Vec<(f64, f64)> = points.iter().filter_map(|p| p.ratio_estimate.map(|r| (p.mu_over_u, r))).collect();
    let (imax, &(mu, jc)) = usable.iter().enumerate().max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))?;
    if imax == 0 || imax + 1 == usable.len() {
        return Some((mu, jc));
    }
    let (x0, y0) = usable[imax - 1];
    let (x1, y1) = usable[imax];
    let (x2, y2) = usable[imax + 1];
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curv = (d12 - d01) / (x2 - x0);
    if !(curv < 0.0) {
        return Some((mu, jc));
    }
    // y = y1 + d01 (x - x1) + curv (x - x0)(x - x1)
    let xv = 0.5 * (x0 + x1) - d01 / (2.0 * curv);
    let yv = y1 + d01 * (xv - x1) + curv * (xv - x0) * (xv - x1);
    Some((xv, yv))
}

/// Condensate density `|psi_0|^2` at the global minimum of the sixth-order
/// potential; zero in the Mott phase.
pub fn condensate_density(landau: &LandauApproximant, j_over_u: f64) -> Result<f64> {
    Ok(landau.minimum(j_over_u)?.psi_squared)
}

fn check_pair(a: &LandauApproximant, b: &LandauApproximant) -> Result<()> {
    if a.nu_m != b.nu_m {
        return Err(Error::SeriesLength { left: a.nu_m, right: b.nu_m });
    }
    if a.mu_over_u != b.mu_over_u {
        return Err(Error::InvalidArgument(alloc::format!(
            "approximants at different chemical potentials ({} vs {})",
            a.mu_over_u,
            b.mu_over_u
        )));
    }
    Ok(())
}

/// Superfluid density from the twist response of the minimized potential,
/// `[Gamma(theta) - Gamma(0)] / (J/U (theta/ell)^2)` per site.
pub fn superfluid_density(
    twisted: &LandauApproximant,
    untwisted: &LandauApproximant,
    j_over_u: f64,
    theta_over_ell: f64,
) -> Result<f64> {
    check_pair(twisted, untwisted)?;
    if theta_over_ell == 0.0 || j_over_u <= 0.0 {
        return Err(Error::InvalidArgument(alloc::string::String::from(
            "superfluid density needs nonzero twist and positive J/U",
        )));
    }
    let mut delta = twisted.minimum(j_over_u)?.value - untwisted.minimum(j_over_u)?.value;
    if let (Some(ft), Some(f0)) = (twisted.f0_at(j_over_u), untwisted.f0_at(j_over_u)) {
        delta += ft - f0;
    }
    Ok(delta / (j_over_u * theta_over_ell * theta_over_ell))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DensityKind {
    Condensate,
    Superfluid,
}

/// A density sampled on an ascending `J/U` grid above the boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityCurve {
    pub kind: DensityKind,
    pub j_over_u: Vec<f64>,
    pub values: Vec<f64>,
    pub nu_m: usize,
    pub twist: TwistSpec,
    /// Grid indices where a superfluid density came out negative.
    pub anomalies: Vec<usize>,
}

/// Relative size of a negative superfluid density tolerated as roundoff.
const NEGATIVE_TOLERANCE: f64 = 1e-9;

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument(alloc::string::String::from("J/U grid must be strictly ascending")));
    }
    Ok(())
}

pub fn condensate_curve(landau: &LandauApproximant, grid: &[f64]) -> Result<DensityCurve> {
    check_grid(grid)?;
    let values = grid.iter().map(|&j| condensate_density(landau, j)).collect::<Result<Vec<_>>>()?;
    Ok(DensityCurve {
        kind: DensityKind::Condensate,
        j_over_u: grid.to_vec(),
        values,
        nu_m: landau.nu_m,
        twist: TwistSpec::NONE,
        anomalies: Vec::new(),
    })
}

pub fn superfluid_curve(twisted: &LandauApproximant, untwisted: &LandauApproximant, grid: &[f64]) -> Result<DensityCurve> {
    check_grid(grid)?;
    let theta = twisted.twist.theta_over_ell;
    let mut values = Vec::with_capacity(grid.len());
    let mut anomalies = Vec::new();
    for (i, &j) in grid.iter().enumerate() {
        let v = superfluid_density(twisted, untwisted, j, theta)?;
        let scale = untwisted.minimum(j)?.psi_squared.max(1e-300);
        if v < -NEGATIVE_TOLERANCE * scale {
            anomalies.push(i);
        }
        values.push(v.max(0.0));
    }
    Ok(DensityCurve {
        kind: DensityKind::Superfluid,
        j_over_u: grid.to_vec(),
        values,
        nu_m: twisted.nu_m,
        twist: twisted.twist,
        anomalies,
    })
}

/// Largest `t = J/U - (J/U)_c` admitted by the default window search.
pub const DEFAULT_WINDOW_TMAX: f64 = 0.04;
/// Fewest points in a fit window.
pub const MIN_WINDOW_POINTS: usize = 10;

/// Result of a logarithmic-derivative fit.
#[derive(Clone, Debug, PartialEq)]
pub struct DlogFit {
    /// Intercept of the fitted line at `t = 0`.
    pub exponent: f64,
    pub slope: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub points: usize,
    /// `(t, Dlog)` samples on the whole curve.
    pub samples: Vec<(f64, f64)>,
}

/// `d log rho / d log t` by centred differences at interior grid points with
/// `t > 0`.
pub fn dlog_samples(curve: &DensityCurve, j_c: f64) -> Result<Vec<(f64, f64)>> {
    let pts: Vec<(f64, f64)> =
        curve.j_over_u.iter().zip(&curve.values).filter(|(&j, _)| j > j_c).map(|(&j, &v)| (j - j_c, v)).collect();
    let mut out = Vec::new();
    for w in pts.windows(3) {
        let (t0, r0) = w[0];
        let t1 = w[1].0;
        let (t2, r2) = w[2];
        if !(r0 > 0.0 && r2 > 0.0) {
            continue;
        }
        let d = (libm::log(r2) - libm::log(r0)) / (libm::log(t2) - libm::log(t0));
        out.push((t1, d));
    }
    Ok(out)
}

/// Critical exponent from the logarithmic derivative of `curve`, fitted
/// linearly in `t` over `window` (or the default window search) and
/// extrapolated to `t = 0`.
pub fn dlog_exponent(curve: &DensityCurve, j_c: f64, window: Option<(f64, f64)>) -> Result<DlogFit> {
    let samples = dlog_samples(curve, j_c)?;
    let in_window =
        |lo: f64, hi: f64| -> Vec<(f64, f64)> { samples.iter().copied().filter(|&(t, _)| t >= lo && t <= hi).collect() };
    let check_positive = |lo: f64, hi: f64| -> Result<()> {
        for (&j, &v) in curve.j_over_u.iter().zip(&curve.values) {
            let t = j - j_c;
            if t >= lo && t <= hi && !(v > 0.0) {
                return Err(Error::NonPositiveDensity { t, value: v });
            }
        }
        Ok(())
    };
    let fit = |pts: &[(f64, f64)]| -> Result<LineFit> {
        let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
        line_fit(&x, &y)
    };
    let (lo, hi, line, used) = match window {
        Some((lo, hi)) => {
            if !(lo > 0.0 && hi > lo) {
                return Err(Error::InvalidArgument(alloc::format!("invalid fit window ({lo}, {hi})")));
            }
            check_positive(lo, hi)?;
            let pts = in_window(lo, hi);
            if pts.len() < 2 {
                return Err(Error::InsufficientData { needed: 2, got: pts.len() });
            }
            (lo, hi, fit(&pts)?, pts.len())
        }
        None => {
            let usable: Vec<(f64, f64)> = samples.iter().copied().filter(|&(t, _)| t <= DEFAULT_WINDOW_TMAX).collect();
            if usable.len() < MIN_WINDOW_POINTS {
                for (&j, &v) in curve.j_over_u.iter().zip(&curve.values) {
                    if j > j_c && j - j_c <= DEFAULT_WINDOW_TMAX && !(v > 0.0) {
                        return Err(Error::NonPositiveDensity { t: j - j_c, value: v });
                    }
                }
                return Err(Error::InsufficientData { needed: MIN_WINDOW_POINTS, got: usable.len() });
            }
            let mut best: Option<(usize, usize, LineFit)> = None;
            for a in 0..usable.len() {
                for b in a + MIN_WINDOW_POINTS - 1..usable.len() {
                    let Ok(f) = fit(&usable[a..=b]) else { continue };
                    let better = match &best {
                        None => true,
                        Some((ba, bb, bf)) => f.r_squared > bf.r_squared || (f.r_squared == bf.r_squared && b - a > bb - ba),
                    };
                    if better {
                        best = Some((a, b, f));
                    }
                }
            }
            let (a, b, f) = best.ok_or(Error::InsufficientData { needed: MIN_WINDOW_POINTS, got: 0 })?;
            (usable[a].0, usable[b].0, f, b - a + 1)
        }
    };
    Ok(DlogFit {
        exponent: line.intercept,
        slope: line.slope,
        r_squared: line.r_squared,
        window: (lo, hi),
        points: used,
        samples,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExponentKind {
    BetaC,
    Zeta,
}

/// Finite-order exponent values and their extrapolation.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentEstimate {
    pub kind: ExponentKind,
    /// `(theta/ell, [(nu_m, value)])`; a single entry with zero twist for
    /// the condensate exponent.
    pub finite_order: Vec<(f64, Vec<(usize, f64)>)>,
    /// Per-twist extrapolation to `1/nu_m = 0`.
    pub per_twist: Vec<(f64, Option<f64>)>,
    /// Final estimate, if enough orders (and twists) were supplied.
    pub extrapolated: Option<f64>,
    /// Fit windows used for the finite-order values, by `(theta/ell, nu_m)`.
    pub windows: Vec<(f64, usize, (f64, f64))>,
}

impl ExponentEstimate {
    /// Order-parameter exponent `beta = beta_c / 2`.
    pub fn beta(&self) -> Option<f64> {
        match self.kind {
            ExponentKind::BetaC => self.extrapolated.map(|b| 0.5 * b),
            ExponentKind::Zeta => None,
        }
    }
}

/// Linear extrapolation of even-order values in `1/nu_m` to `1/nu_m = 0`.
pub fn extrapolate_in_order(entries: &[(usize, f64)]) -> Result<f64> {
    if let Some((n, _)) = entries.iter().find(|(n, _)| n % 2 == 1 || *n == 0) {
        return Err(Error::InvalidArgument(alloc::format!("only even positive orders enter the extrapolation (got {n})")));
    }
    if entries.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: entries.len() });
    }
    let x: Vec<f64> = entries.iter().map(|(n, _)| 1.0 / *n as f64).collect();
    let y: Vec<f64> = entries.iter().map(|(_, v)| *v).collect();
    Ok(line_fit(&x, &y)?.intercept)
}

/// Extrapolates finite-order values: linearly in `1/nu_m` per twist, then,
/// for `zeta`, linearly in `theta/ell` to zero twist.
pub fn extrapolate_exponents(kind: ExponentKind, finite_order: Vec<(f64, Vec<(usize, f64)>)>) -> Result<ExponentEstimate> {
    if finite_order.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    if kind == ExponentKind::BetaC && finite_order.len() != 1 {
        return Err(Error::InvalidArgument(alloc::string::String::from(
            "the condensate exponent takes a single untwisted entry set",
        )));
    }
    let mut per_twist = Vec::new();
    for (theta, entries) in &finite_order {
        let v = match extrapolate_in_order(entries) {
            Ok(v) => Some(v),
            Err(Error::InsufficientData { .. }) => None,
            Err(e) => return Err(e),
        };
        per_twist.push((*theta, v));
    }
    let extrapolated = match kind {
        ExponentKind::BetaC => per_twist[0].1,
        ExponentKind::Zeta => {
            let pts: Vec<(f64, f64)> = per_twist.iter().filter_map(|(t, v)| v.map(|v| (*t, v))).collect();
            if pts.len() == per_twist.len() && pts.len() >= 2 {
                let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
                let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
                Some(line_fit(&x, &y)?.intercept)
            } else {
                None
            }
        }
    };
    Ok(ExponentEstimate { kind, finite_order, per_twist, extrapolated, windows: Vec::new() })
}
