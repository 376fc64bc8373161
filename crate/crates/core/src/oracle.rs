//! Brute-force references on small periodic clusters.
//!
//! Three independent routes check the kernel:
//!
//! - [`ground_energy`]: Lanczos on the full truncated Fock space of
//!   `H = H0 - J T - eta S`, followed by [`extract_source_coefficients`], a
//!   polynomial fit in `eta^2`.
//! - [`cluster_series`]: Rayleigh-Schrodinger perturbation theory in both `J`
//!   and `eta` on the cluster Hamiltonian, exact to the requested order.
//! - [`rayleigh_schrodinger`]: the plain recursive series for a dense
//!   Hermitian matrix, used to validate the Kato reduction.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::chains::MottState;
use crate::fit::polynomial_fit;
use crate::lattice::TwistSpec;
use crate::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Default cap on the Fock-space dimension.
pub const DEFAULT_BUDGET: usize = 4_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Geometry {
    /// Open chain of `L` sites.
    Chain(usize),
    /// Periodic ring of `L` sites.
    Ring(usize),
    /// Periodic `Lx x Ly` torus; the twist runs along `x`.
    Torus(usize, usize),
}

impl Geometry {
    pub fn sites(&self) -> usize {
        match *self {
            Geometry::Chain(l) | Geometry::Ring(l) => l,
            Geometry::Torus(a, b) => a * b,
        }
    }

    /// Directed bonds `(a, b, phase)`: a particle moving `a -> b` picks up
    /// `phase`, the reverse move its conjugate.
    pub fn bonds(&self, twist: &TwistSpec) -> Vec<(usize, usize, Complex64)> {
        let fwd = Complex64::from_polar(1.0, twist.theta_over_ell);
        let one = Complex64::new(1.0, 0.0);
        let mut out = Vec::new();
        match *self {
            Geometry::Chain(l) => {
                for i in 0..l.saturating_sub(1) {
                    out.push((i, i + 1, fwd));
                }
            }
            Geometry::Ring(l) => {
                if l >= 2 {
                    for i in 0..l {
                        out.push((i, (i + 1) % l, fwd));
                    }
                }
            }
            Geometry::Torus(lx, ly) => {
                let idx = |x: usize, y: usize| y * lx + x;
                for y in 0..ly {
                    for x in 0..lx {
                        if lx >= 2 {
                            let p = if twist.axis == 0 { fwd } else { one };
                            out.push((idx(x, y), idx((x + 1) % lx, y), p));
                        }
                        if ly >= 2 {
                            let p = if twist.axis == 1 { fwd } else { one };
                            out.push((idx(x, y), idx(x, (y + 1) % ly), p));
                        }
                    }
                }
            }
        }
        out
    }
}

/// Extended Bose-Hubbard Hamiltonian on a small cluster, energies in units
/// of `U`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterModel {
    pub geometry: Geometry,
    pub n_max: u32,
    pub state: MottState,
    pub j_over_u: f64,
    pub eta: f64,
    pub twist: TwistSpec,
    pub budget: usize,
}

impl ClusterModel {
    pub fn new(geometry: Geometry, n_max: u32, state: MottState) -> Self {
        ClusterModel { geometry, n_max, state, j_over_u: 0.0, eta: 0.0, twist: TwistSpec::NONE, budget: DEFAULT_BUDGET }
    }

    pub fn dimension(&self) -> Option<usize> {
        (self.n_max as usize + 1).checked_pow(self.geometry.sites() as u32)
    }

    fn validate(&self) -> Result<usize> {
        if self.geometry.sites() == 0 {
            return Err(Error::InvalidArgument(alloc::string::String::from("cluster has no sites")));
        }
        if self.n_max < self.state.g() {
            return Err(Error::InvalidArgument(alloc::format!(
                "occupation cutoff {} below the filling {}",
                self.n_max,
                self.state.g()
            )));
        }
        match self.dimension() {
            Some(dim) if dim <= self.budget => Ok(dim),
            dim => Err(Error::Budget { dimension: dim.unwrap_or(usize::MAX), budget: self.budget }),
        }
    }
}

/// Matrix-free Hamiltonian on the full truncated Fock space; state index
/// digits in base `n_max + 1` are the site occupations.
struct FockOperator {
    sites: usize,
    base: usize,
    dim: usize,
    diag: Vec<f64>,
    bonds: Vec<(usize, usize, Complex64)>,
    j: f64,
    eta: f64,
    sqrt: Vec<f64>,
    powers: Vec<usize>,
}

impl FockOperator {
    fn new(model: &ClusterModel, dim: usize) -> Self {
        let sites = model.geometry.sites();
        let base = model.n_max as usize + 1;
        let powers: Vec<usize> = (0..sites).map(|s| base.pow(s as u32)).collect();
        let site_e: Vec<f64> = (0..base).map(|n| model.state.site_energy(n as u32)).collect();
        let diag = (0..dim)
            .map(|i| {
                let mut e = 0.0;
                let mut r = i;
                for _ in 0..sites {
                    e += site_e[r % base];
                    r /= base;
                }
                e
            })
            .collect();
        FockOperator {
            sites,
            base,
            dim,
            diag,
            bonds: model.geometry.bonds(&model.twist),
            j: model.j_over_u,
            eta: model.eta,
            sqrt: (0..=base).map(|n| libm::sqrt(n as f64)).collect(),
            powers,
        }
    }

    fn occ(&self, i: usize, s: usize) -> usize {
        (i / self.powers[s]) % self.base
    }

    /// `y = H x`.
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (yi, (&xi, &d)) in y.iter_mut().zip(x.iter().zip(&self.diag)) {
            *yi = xi * d;
        }
        for i in 0..self.dim {
            let xi = x[i];
            if xi == ZERO {
                continue;
            }
            if self.eta != 0.0 {
                for s in 0..self.sites {
                    let n = self.occ(i, s);
                    if n + 1 < self.base {
                        y[i + self.powers[s]] -= xi * (self.eta * self.sqrt[n + 1]);
                    }
                    if n > 0 {
                        y[i - self.powers[s]] -= xi * (self.eta * self.sqrt[n]);
                    }
                }
            }
            if self.j != 0.0 {
                for &(a, b, p) in &self.bonds {
                    let (na, nb) = (self.occ(i, a), self.occ(i, b));
                    if na > 0 && nb + 1 < self.base {
                        let t = i - self.powers[a] + self.powers[b];
                        y[t] -= xi * p * (self.j * self.sqrt[na] * self.sqrt[nb + 1]);
                    }
                    if nb > 0 && na + 1 < self.base {
                        let t = i - self.powers[b] + self.powers[a];
                        y[t] -= xi * p.conj() * (self.j * self.sqrt[nb] * self.sqrt[na + 1]);
                    }
                }
            }
        }
    }

    fn mott_index(&self, g: usize) -> usize {
        self.powers.iter().map(|p| p * g).sum()
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    libm::sqrt(a.iter().map(|x| x.norm_sqr()).sum())
}

/// Lanczos iteration limit.
pub const MAX_LANCZOS: usize = 400;

/// Lowest eigenvalue of the cluster Hamiltonian by Lanczos with full
/// reorthogonalisation, to relative tolerance `1e-12`.
pub fn ground_energy(model: &ClusterModel) -> Result<f64> {
    let dim = model.validate()?;
    let op = FockOperator::new(model, dim);
    let mut q0 = alloc::vec![ZERO; dim];
    // Start from the Mott state plus a deterministic spread so that no
    // symmetry sector is missed.
    for (i, v) in q0.iter_mut().enumerate() {
        *v = Complex64::new(1e-3 / (1.0 + (i % 97) as f64), 0.0);
    }
    q0[op.mott_index(model.state.g() as usize)] += Complex64::new(1.0, 0.0);
    let n0 = norm(&q0);
    q0.iter_mut().for_each(|v| *v /= n0);
    let max_iter = MAX_LANCZOS.min(dim);
    let mut basis: Vec<Vec<Complex64>> = alloc::vec![q0];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = alloc::vec![ZERO; dim];
    let mut last = f64::NAN;
    let mut residual = f64::INFINITY;
    for it in 0..max_iter {
        op.apply(&basis[it], &mut w);
        let a = dot(&basis[it], &w).re;
        alpha.push(a);
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
            }
        }
        let b = norm(&w);
        let (theta, tail) = tridiagonal_lowest(&alpha, &beta);
        residual = (b * tail).abs();
        let tol = 1e-12 * theta.abs().max(1e-300);
        if residual <= tol || b <= 1e-14 * theta.abs().max(1.0) || it + 1 == dim {
            return Ok(theta);
        }
        if (theta - last).abs() <= 1e-15 * theta.abs() && residual <= 1e-9 * theta.abs() {
            return Ok(theta);
        }
        last = theta;
        beta.push(b);
        basis.push(w.iter().map(|v| v / b).collect());
    }
    Err(Error::NoConvergence { iterations: max_iter, residual })
}

/// Lowest Ritz value and the last component of its eigenvector.
fn tridiagonal_lowest(alpha: &[f64], beta: &[f64]) -> (f64, f64) {
    let k = alpha.len();
    let t = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let (imin, &emin) = eig.eigenvalues.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty");
    (emin, eig.eigenvectors[(k - 1, imin)])
}

/// Per-site source coefficients from a fit of `E(eta)/M` in `eta^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceFit {
    /// `[f0, c2, c4, ..]`.
    pub coefficients: Vec<f64>,
    pub residual: f64,
}

/// Fits `E(eta)/M = f0 + c2 eta^2 + .. + c_{2 k_max} eta^{2 k_max}` over
/// `etas`, using `extra` additional powers to absorb the remainder.
pub fn extract_source_coefficients(model: &ClusterModel, etas: &[f64], k_max: usize, extra: usize) -> Result<SourceFit> {
    let sites = model.geometry.sites() as f64;
    let mut x = Vec::with_capacity(etas.len());
    let mut y = Vec::with_capacity(etas.len());
    for &eta in etas {
        let mut m = model.clone();
        m.eta = eta;
        x.push(eta * eta);
        y.push(ground_energy(&m)? / sites);
    }
    let fit = polynomial_fit(&x, &y, k_max + extra)?;
    Ok(SourceFit { coefficients: fit.coefficients[..=k_max].to_vec(), residual: fit.residual })
}

/// Sparse Fock states reachable from the Mott state within a fixed number
/// of single events, with hop and source matrix elements.
struct TruncatedSpace {
    energies: Vec<f64>,
    /// Per state: `(target, amplitude)` of the hop operator `-T`.
    hops: Vec<Vec<(usize, Complex64)>>,
    /// Per state: `(target, amplitude)` of the source operator `-S`.
    sources: Vec<Vec<(usize, Complex64)>>,
}

impl TruncatedSpace {
    fn build(model: &ClusterModel, depth: usize) -> Result<Self> {
        let sites = model.geometry.sites();
        let bonds = model.geometry.bonds(&model.twist);
        let g = model.state.g() as u8;
        let start: Vec<u8> = alloc::vec![g; sites];
        let mut index: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
        let mut states: Vec<Vec<u8>> = alloc::vec![start.clone()];
        index.insert(start, 0);
        let mut frontier = alloc::vec![0usize];
        let neighbours = |s: &[u8]| -> (Vec<(Vec<u8>, Complex64)>, Vec<(Vec<u8>, Complex64)>) {
            let mut hops = Vec::new();
            let mut srcs = Vec::new();
            for &(a, b, p) in &bonds {
                for (from, to, ph) in [(a, b, p), (b, a, p.conj())] {
                    if s[from] > 0 {
                        let amp = libm::sqrt(s[from] as f64) * libm::sqrt(s[to] as f64 + 1.0);
                        let mut t = s.to_vec();
                        t[from] -= 1;
                        t[to] += 1;
                        hops.push((t, -ph * amp));
                    }
                }
            }
            for i in 0..sites {
                let mut t = s.to_vec();
                t[i] += 1;
                srcs.push((t, Complex64::new(-libm::sqrt(s[i] as f64 + 1.0), 0.0)));
                if s[i] > 0 {
                    let mut t = s.to_vec();
                    t[i] -= 1;
                    srcs.push((t, Complex64::new(-libm::sqrt(s[i] as f64), 0.0)));
                }
            }
            (hops, srcs)
        };
        for _ in 0..depth {
            let mut next = Vec::new();
            for &i in &frontier {
                let (h, s) = neighbours(&states[i]);
                for (t, _) in h.into_iter().chain(s) {
                    if !index.contains_key(&t) {
                        if states.len() >= model.budget {
                            return Err(Error::Budget { dimension: states.len() + 1, budget: model.budget });
                        }
                        index.insert(t.clone(), states.len());
                        next.push(states.len());
                        states.push(t);
                    }
                }
            }
            frontier = next;
        }
        let mut hops = Vec::with_capacity(states.len());
        let mut sources = Vec::with_capacity(states.len());
        for s in &states {
            let (h, src) = neighbours(s);
            let keep = |v: Vec<(Vec<u8>, Complex64)>| -> Vec<(usize, Complex64)> {
                v.into_iter().filter_map(|(t, a)| index.get(&t).map(|&j| (j, a))).collect()
            };
            hops.push(keep(h));
            sources.push(keep(src));
        }
        let energies = states.iter().map(|s| s.iter().map(|&n| model.state.site_energy(n as u32)).sum()).collect();
        Ok(TruncatedSpace { energies, hops, sources })
    }

    fn apply(ops: &[Vec<(usize, Complex64)>], x: &[Complex64], y: &mut [Complex64]) {
        for (i, row) in ops.iter().enumerate() {
            let xi = x[i];
            if xi == ZERO {
                continue;
            }
            for &(j, a) in row {
                y[j] += a * xi;
            }
        }
    }
}

/// Ground-state energy coefficients of `J^p eta^q` on a cluster, from
/// two-parameter Rayleigh-Schrodinger theory about the Mott state.
///
/// Components of the order-`j` wave-function correction matter only within
/// `order - j` events of the Mott state, so the Fock space is cut at
/// `order / 2` events without error. `energies[p][q]` holds the total
/// cluster energy coefficient for `p + q <= order`.
pub fn cluster_series(model: &ClusterModel, order: usize) -> Result<Vec<Vec<Complex64>>> {
    if model.geometry.sites() == 0 {
        return Err(Error::InvalidArgument(alloc::string::String::from("cluster has no sites")));
    }
    let space = TruncatedSpace::build(model, order / 2)?;
    let dim = space.energies.len();
    let e0 = space.energies[0];
    let mut psi: Vec<Vec<Option<Vec<Complex64>>>> = alloc::vec![alloc::vec![None; order + 1]; order + 1];
    let mut energy = alloc::vec![alloc::vec![ZERO; order + 1]; order + 1];
    let mut unit = alloc::vec![ZERO; dim];
    unit[0] = Complex64::new(1.0, 0.0);
    psi[0][0] = Some(unit);
    energy[0][0] = Complex64::new(e0, 0.0);
    for total in 1..=order {
        for p in 0..=total {
            let q = total - p;
            let mut rhs = alloc::vec![ZERO; dim];
            if p > 0 {
                if let Some(prev) = &psi[p - 1][q] {
                    TruncatedSpace::apply(&space.hops, prev, &mut rhs);
                }
            }
            if q > 0 {
                if let Some(prev) = &psi[p][q - 1] {
                    TruncatedSpace::apply(&space.sources, prev, &mut rhs);
                }
            }
            let e = rhs[0];
            energy[p][q] = e;
            if total == order {
                continue;
            }
            for a in 0..=p {
                for b in 0..=q {
                    if (a, b) == (0, 0) || (a, b) == (p, q) {
                        continue;
                    }
                    let eab = energy[a][b];
                    if eab == ZERO {
                        continue;
                    }
                    if let Some(v) = &psi[p - a][q - b] {
                        rhs.iter_mut().zip(v).for_each(|(r, x)| *r -= eab * x);
                    }
                }
            }
            rhs[0] = ZERO;
            for (r, &ei) in rhs.iter_mut().zip(&space.energies).skip(1) {
                *r /= e0 - ei;
            }
            psi[p][q] = Some(rhs);
        }
    }
    Ok(energy)
}

/// Per-site `gamma_{2k}^{(nu)}` of a cluster from [`cluster_series`].
pub fn cluster_gamma(model: &ClusterModel, k: usize, nu: usize) -> Result<Complex64> {
    let table = cluster_series(model, 2 * k + nu)?;
    Ok(table[nu][2 * k] / model.geometry.sites() as f64)
}

/// Energy corrections `E_1..E_order` of the lowest-order reference level
/// `m` of `diag(h0) + lambda V` by the recursive Rayleigh-Schrodinger
/// formulas; `v` is Hermitian, row-major.
pub fn rayleigh_schrodinger(h0: &[f64], v: &[Complex64], m: usize, order: usize) -> Result<Vec<Complex64>> {
    let n = h0.len();
    if v.len() != n * n || m >= n {
        return Err(Error::InvalidArgument(alloc::string::String::from("dense problem dimensions do not match")));
    }
    let mut psi: Vec<Vec<Complex64>> = Vec::with_capacity(order + 1);
    let mut unit = alloc::vec![ZERO; n];
    unit[m] = Complex64::new(1.0, 0.0);
    psi.push(unit);
    let mut e = alloc::vec![ZERO; order + 1];
    for k in 1..=order {
        let vpsi: Vec<Complex64> = (0..n).map(|i| (0..n).map(|j| v[i * n + j] * psi[k - 1][j]).sum()).collect();
        e[k] = vpsi[m];
        if k == order {
            break;
        }
        let mut next = vpsi;
        for l in 1..=k {
            for (x, y) in next.iter_mut().zip(&psi[k - l]) {
                *x -= e[l] * y;
            }
        }
        for (i, x) in next.iter_mut().enumerate() {
            if i == m {
                *x = ZERO;
            } else {
                *x /= h0[m] - h0[i];
            }
        }
        psi.push(next);
    }
    Ok(e[1..].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(mu: f64) -> MottState {
        MottState::new(1, mu).unwrap()
    }

    #[test]
    fn decoupled_sites() {
        let m = ClusterModel::new(Geometry::Ring(4), 3, st(0.4));
        let e = ground_energy(&m).unwrap();
        assert!((e + 4.0 * 0.4).abs() < 1e-12);
    }

    #[test]
    fn two_site_hopping() {
        let mut m = ClusterModel::new(Geometry::Chain(2), 4, st(0.37));
        m.j_over_u = 1e-3;
        let e = ground_energy(&m).unwrap();
        let want = -2.0 * 0.37 - 4.0 * 1e-6;
        assert!((e - want).abs() < 1e-10, "{e} vs {want}");
        let table = cluster_series(&m, 4).unwrap();
        assert!((table[2][0].re + 4.0).abs() < 1e-12);
    }

    #[test]
    fn single_site_source_matches_dense() {
        let mut m = ClusterModel::new(Geometry::Chain(1), 6, st(0.5));
        m.eta = 0.2;
        let e = ground_energy(&m).unwrap();
        let dense = DMatrix::from_fn(7, 7, |i, j| {
            if i == j {
                st(0.5).site_energy(i as u32)
            } else if i + 1 == j {
                -0.2 * libm::sqrt(j as f64)
            } else if j + 1 == i {
                -0.2 * libm::sqrt(i as f64)
            } else {
                0.0
            }
        });
        let emin = SymmetricEigen::new(dense).eigenvalues.min();
        assert!((e - emin).abs() < 1e-12 * emin.abs());
    }

    #[test]
    fn single_site_source_coefficients() {
        let m = ClusterModel::new(Geometry::Chain(1), 8, st(0.5));
        let etas: Vec<f64> = (1..=12).map(|i| 0.005 * i as f64).collect();
        let fit = extract_source_coefficients(&m, &etas, 2, 3).unwrap();
        assert!((fit.coefficients[0] + 0.5).abs() < 1e-10);
        assert!((fit.coefficients[1] + 6.0).abs() < 1e-6, "{:?}", fit.coefficients);
        let exact = cluster_series(&m, 4).unwrap();
        assert!((exact[0][2].re + 6.0).abs() < 1e-12);
        assert!((fit.coefficients[2] - exact[0][4].re).abs() < 1e-3 * exact[0][4].re.abs());
    }

    #[test]
    fn budget_refusal() {
        let mut m = ClusterModel::new(Geometry::Ring(12), 4, st(0.5));
        m.budget = 1000;
        assert!(matches!(ground_energy(&m), Err(Error::Budget { .. })));
    }

    #[test]
    fn twisted_ring_is_even() {
        let mut m = ClusterModel::new(Geometry::Ring(4), 3, st(0.4));
        m.j_over_u = 0.05;
        m.twist = TwistSpec::new(0.1, 0);
        let plus = ground_energy(&m).unwrap();
        m.twist = TwistSpec::new(-0.1, 0);
        let minus = ground_energy(&m).unwrap();
        assert!((plus - minus).abs() < 1e-12);
    }
}
