//! Truncated power series in `J/U` and the Landau assembly.

use alloc::vec::Vec;
use core::ops::{Add, Neg, Sub};

use num_complex::Complex64;

use crate::chains::HoppingSeries;
use crate::lattice::TwistSpec;
use crate::{Error, Result};

/// Power series `sum_{i <= max_order} c_i x^i`; everything beyond
/// `max_order` is unknown and never reported.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries {
    coefficients: Vec<Complex64>,
}

impl TruncatedSeries {
    pub fn new(coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidArgument(alloc::string::String::from("a series needs at least its constant term")));
        }
        Ok(TruncatedSeries { coefficients })
    }

    pub fn from_real(coefficients: &[f64]) -> Result<Self> {
        Self::new(coefficients.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero(max_order: usize) -> Self {
        TruncatedSeries { coefficients: alloc::vec![Complex64::new(0.0, 0.0); max_order + 1] }
    }

    pub fn constant(c: Complex64, max_order: usize) -> Self {
        let mut s = Self::zero(max_order);
        s.coefficients[0] = c;
        s
    }

    pub fn one(max_order: usize) -> Self {
        Self::constant(Complex64::new(1.0, 0.0), max_order)
    }

    pub fn max_order(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn coefficient(&self, i: usize) -> Complex64 {
        self.coefficients[i]
    }

    /// Drops every coefficient above `max_order`.
    pub fn truncate(&self, max_order: usize) -> Result<Self> {
        if max_order > self.max_order() {
            return Err(Error::SeriesLength { left: self.max_order(), right: max_order });
        }
        Ok(TruncatedSeries { coefficients: self.coefficients[..=max_order].to_vec() })
    }

    fn same_order(&self, other: &Self) -> Result<()> {
        if self.max_order() != other.max_order() {
            return Err(Error::SeriesLength { left: self.max_order(), right: other.max_order() });
        }
        Ok(())
    }

    /// Cauchy product truncated at the common order.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.same_order(other)?;
        let n = self.coefficients.len();
        let mut out = alloc::vec![Complex64::new(0.0, 0.0); n];
        for (i, &a) in self.coefficients.iter().enumerate() {
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (j, &b) in other.coefficients[..n - i].iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Ok(TruncatedSeries { coefficients: out })
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        TruncatedSeries { coefficients: self.coefficients.iter().map(|c| c * factor).collect() }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.same_order(other)?;
        Ok(TruncatedSeries { coefficients: self.coefficients.iter().zip(&other.coefficients).map(|(a, b)| a + b).collect() })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&-other)
    }

    /// Series `r` with `self * r = 1 + O(x^{max_order + 1})`.
    pub fn reciprocal(&self) -> Result<Self> {
        let c0 = self.coefficients[0];
        if c0 == Complex64::new(0.0, 0.0) {
            return Err(Error::SingularSeries);
        }
        let n = self.coefficients.len();
        let mut r = alloc::vec![Complex64::new(0.0, 0.0); n];
        r[0] = c0.inv();
        for i in 1..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 1..=i {
                acc += self.coefficients[j] * r[i - j];
            }
            r[i] = -acc * r[0];
        }
        Ok(TruncatedSeries { coefficients: r })
    }

    /// Nonnegative integer power.
    pub fn powi(&self, p: u32) -> Self {
        let mut out = Self::one(self.max_order());
        for _ in 0..p {
            out = out.multiply(self).expect("equal orders");
        }
        out
    }

    pub fn evaluate(&self, x: f64) -> Complex64 {
        self.coefficients.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    /// Real part of [`evaluate`](Self::evaluate).
    pub fn evaluate_real(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c.re)
    }

    /// Whether every imaginary part is below `rel * |re| + abs`.
    pub fn is_real(&self, rel: f64, abs: f64) -> bool {
        self.coefficients.iter().all(|c| c.im.abs() <= rel * c.re.abs() + abs)
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.re).collect()
    }
}

impl From<&HoppingSeries> for TruncatedSeries {
    fn from(h: &HoppingSeries) -> Self {
        TruncatedSeries { coefficients: h.coefficients.clone() }
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn neg(self) -> TruncatedSeries {
        TruncatedSeries { coefficients: self.coefficients.iter().map(|c| -c).collect() }
    }
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;

    /// Panics on mismatched orders; see [`TruncatedSeries::try_add`].
    fn add(self, other: &TruncatedSeries) -> TruncatedSeries {
        self.try_add(other).expect("series orders differ")
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn sub(self, other: &TruncatedSeries) -> TruncatedSeries {
        self.try_sub(other).expect("series orders differ")
    }
}

/// Landau coefficients of the effective potential
/// `Gamma/M = f0 + a2 |psi|^2 + a4 |psi|^4 + a6 |psi|^6`, each re-expanded as
/// a truncated series in `J/U`.
#[derive(Clone, Debug, PartialEq)]
pub struct LandauApproximant {
    pub a2: TruncatedSeries,
    pub a4: TruncatedSeries,
    pub a6: TruncatedSeries,
    pub f0: Option<TruncatedSeries>,
    pub mu_over_u: f64,
    pub twist: TwistSpec,
    pub nu_m: usize,
}

/// Landau coefficients from the source-response series:
/// `a2 = -1/c2`, `a4 = c4/c2^4`, `a6 = c6/c2^6 - 4 c4^2/c2^7`.
pub fn landau_from_sources(
    c2: &TruncatedSeries,
    c4: &TruncatedSeries,
    c6: &TruncatedSeries,
    mu_over_u: f64,
    twist: TwistSpec,
) -> Result<LandauApproximant> {
    c2.same_order(c4)?;
    c2.same_order(c6)?;
    let inv = c2.reciprocal()?;
    let inv4 = inv.powi(4);
    let inv6 = inv4.multiply(&inv.powi(2))?;
    let inv7 = inv6.multiply(&inv)?;
    let a2 = -&inv;
    let a4 = c4.multiply(&inv4)?;
    let c4sq = c4.multiply(c4)?;
    let a6 = &c6.multiply(&inv6)? - &c4sq.multiply(&inv7)?.scale(Complex64::new(4.0, 0.0));
    Ok(LandauApproximant { a2, a4, a6, f0: None, mu_over_u, twist, nu_m: c2.max_order() })
}

/// Minimum of the sixth-order potential over `|psi|^2 >= 0`, excluding `f0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialMinimum {
    pub psi_squared: f64,
    pub value: f64,
}

impl LandauApproximant {
    pub fn with_f0(mut self, f0: TruncatedSeries) -> Result<Self> {
        if f0.max_order() != self.nu_m {
            return Err(Error::SeriesLength { left: self.nu_m, right: f0.max_order() });
        }
        self.f0 = Some(f0);
        Ok(self)
    }

    /// `(a2, a4, a6)` at `J/U`, real parts.
    pub fn coefficients_at(&self, j_over_u: f64) -> (f64, f64, f64) {
        (self.a2.evaluate_real(j_over_u), self.a4.evaluate_real(j_over_u), self.a6.evaluate_real(j_over_u))
    }

    /// `f0(J/U)` when the free-energy series is attached.
    pub fn f0_at(&self, j_over_u: f64) -> Option<f64> {
        self.f0.as_ref().map(|f| f.evaluate_real(j_over_u))
    }

    /// Global minimum of `a2 x + a4 x^2 + a6 x^3` over `x = |psi|^2 >= 0`.
    pub fn minimum(&self, j_over_u: f64) -> Result<PotentialMinimum> {
        let (a2, a4, a6) = self.coefficients_at(j_over_u);
        minimize_sextic(a2, a4, a6)
    }
}

/// Global minimum of `a2 x + a4 x^2 + a6 x^3` on `x >= 0`, requiring `a6 > 0`.
pub fn minimize_sextic(a2: f64, a4: f64, a6: f64) -> Result<PotentialMinimum> {
    if !(a6 > 0.0) {
        return Err(Error::UnstablePotential { a6 });
    }
    let disc = a4 * a4 - 3.0 * a2 * a6;
    let mut best = PotentialMinimum { psi_squared: 0.0, value: 0.0 };
    if disc >= 0.0 {
        let x = (-a4 + libm::sqrt(disc)) / (3.0 * a6);
        if x > 0.0 {
            let value = x * (a2 + x * (a4 + x * a6));
            if value < best.value {
                best = PotentialMinimum { psi_squared: x, value };
            }
        }
    }
    Ok(best)
}

/// `a2 |psi|^2 + a4 |psi|^4 + a6 |psi|^6` at `J/U`; `f0` is not included.
pub fn effective_potential(landau: &LandauApproximant, j_over_u: f64, psi_abs: f64) -> f64 {
    let (a2, a4, a6) = landau.coefficients_at(j_over_u);
    let x = psi_abs * psi_abs;
    x * (a2 + x * (a4 + x * a6))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(c: &[f64]) -> TruncatedSeries {
        TruncatedSeries::from_real(c).unwrap()
    }

    #[test]
    fn multiply_examples() {
        assert_eq!(s(&[1.0, 1.0, 0.0]).multiply(&s(&[1.0, -1.0, 0.0])).unwrap(), s(&[1.0, 0.0, -1.0]));
        let x = s(&[0.3, -2.0, 5.0]);
        assert_eq!(x.multiply(&TruncatedSeries::one(2)).unwrap(), x);
        assert_eq!(s(&[0.0, 1.0]).multiply(&s(&[0.0, 1.0])).unwrap(), s(&[0.0, 0.0]));
        assert!(matches!(s(&[1.0]).multiply(&s(&[1.0, 2.0])), Err(Error::SeriesLength { .. })));
    }

    #[test]
    fn reciprocal_examples() {
        assert_eq!(s(&[4.0, 0.0]).reciprocal().unwrap(), s(&[0.25, 0.0]));
        assert_eq!(s(&[1.0, 1.0, 0.0, 0.0]).reciprocal().unwrap(), s(&[1.0, -1.0, 1.0, -1.0]));
        assert_eq!(s(&[0.0, 1.0]).reciprocal(), Err(Error::SingularSeries));
    }

    #[test]
    fn landau_constant_case() {
        let l = landau_from_sources(&s(&[-6.0]), &s(&[0.0]), &s(&[0.0]), 0.5, TwistSpec::NONE).unwrap();
        assert!((l.a2.coefficient(0).re - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(l.a4.coefficient(0).re, 0.0);
        assert_eq!(l.a6.coefficient(0).re, 0.0);
    }

    #[test]
    fn potential_examples() {
        let l = landau_from_sources(&s(&[1.0]), &s(&[1.0]), &s(&[5.0]), 0.5, TwistSpec::NONE).unwrap();
        // a2 = -1, a4 = 1, a6 = 1
        assert_eq!(effective_potential(&l, 0.0, 0.0), 0.0);
        assert!((effective_potential(&l, 0.0, 1.0) - 1.0).abs() < 1e-15);
        let m = l.minimum(0.0).unwrap();
        assert!((m.psi_squared - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn unstable_potential() {
        assert_eq!(minimize_sextic(-1.0, 1.0, -0.5), Err(Error::UnstablePotential { a6: -0.5 }));
        assert_eq!(minimize_sextic(1.0, 1.0, 1.0).unwrap().psi_squared, 0.0);
    }
}
