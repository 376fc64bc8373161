//! Least-squares helpers shared by the boundary, exponent and oracle code.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Straight line `y = intercept + slope * x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

impl LineFit {
    pub fn at(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Ordinary least-squares line through `(x, y)`.
pub fn line_fit(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(alloc::format!("abscissa and ordinate lengths differ ({} vs {})", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: x.len() });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
        syy += (yi - my) * (yi - my);
    }
    if sxx <= f64::EPSILON * mx.abs().max(1.0) * n {
        return Err(Error::IllConditioned(alloc::string::String::from("abscissae coincide")));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(LineFit { slope, intercept, r_squared, points: x.len() })
}

/// Polynomial least squares.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialFit {
    /// Coefficients in ascending powers.
    pub coefficients: Vec<f64>,
    /// Root-mean-square residual.
    pub residual: f64,
    /// Ratio of extreme singular values of the scaled design matrix.
    pub condition: f64,
}

/// Fits `y = sum_j p_j x^j` for `j = 0..=degree` by SVD on a column-scaled
/// Vandermonde matrix.
pub fn polynomial_fit(x: &[f64], y: &[f64], degree: usize) -> Result<PolynomialFit> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(alloc::format!("abscissa and ordinate lengths differ ({} vs {})", x.len(), y.len())));
    }
    let cols = degree + 1;
    if x.len() < cols {
        return Err(Error::InsufficientData { needed: cols, got: x.len() });
    }
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 && degree > 0 {
        return Err(Error::IllConditioned(alloc::string::String::from("all abscissae are zero")));
    }
    let scale = if scale == 0.0 { 1.0 } else { scale };
    let a = DMatrix::from_fn(x.len(), cols, |i, j| libm::pow(x[i] / scale, j as f64));
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition < 1e13) {
        return Err(Error::IllConditioned(alloc::format!(
            "design matrix condition number {condition:e}; widen or shift the grid"
        )));
    }
    let p = svd.solve(&b, 0.0).map_err(|e| Error::IllConditioned(alloc::string::String::from(e)))?;
    let r = &a * &p - &b;
    let residual = libm::sqrt(r.norm_squared() / x.len() as f64);
    let coefficients = (0..cols).map(|j| p[j] / libm::pow(scale, j as f64)).collect();
    Ok(PolynomialFit { coefficients, residual, condition })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let f = line_fit(&[0.25, 1.0 / 6.0], &[0.5715, 0.6153]).unwrap();
        assert!((f.intercept - 0.7029).abs() < 1e-4);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn line_errors() {
        assert!(matches!(line_fit(&[1.0], &[1.0]), Err(Error::InsufficientData { .. })));
        assert!(matches!(line_fit(&[1.0, 1.0], &[1.0, 2.0]), Err(Error::IllConditioned(_))));
    }

    #[test]
    fn recovers_cubic() {
        let x: Vec<f64> = (0..9).map(|i| 1e-3 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|t| 2.0 - 3.0 * t + 5.0 * t * t - 7.0 * t * t * t).collect();
        let f = polynomial_fit(&x, &y, 3).unwrap();
        for (c, w) in f.coefficients.iter().zip([2.0, -3.0, 5.0, -7.0]) {
            assert!((c - w).abs() < 1e-6 * w.abs(), "{c} vs {w}");
        }
    }
}
