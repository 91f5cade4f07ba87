//! Exact diagonalization of the chain Hamiltonian
//! `H = sum_j w0 a_j^+ a_j - J sum_j (a_j^+ a_{j+1} + h.c.) + W |e><e| + V (a_c^+ s^- + s^+ a_c)`
//! on `N` sites with the emitter at the central site `c = N / 2`.
//!
//! The one-excitation sector is small enough for dense diagonalization. The
//! two-excitation sector uses a symmetric (bosonic) pair basis and Lanczos
//! iteration for its extremal levels, which is where the three-body bound
//! states sit.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::band_model::ModelParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    OneExcitation,
    TwoExcitation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

/// A basis state: emitter excited with one photon at `site`, or no emitter
/// excitation with photons at `sites` (sorted; `None` for an empty slot).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisState {
    Emitter { site: Option<usize> },
    Photons { first: usize, second: Option<usize> },
}

/// Index map of a sector on `n` sites.
///
/// One excitation: photon at `j` for `j < n`, then the bare emitter at `n`.
/// Two excitations: pairs `i <= j` in lexicographic order, then emitter plus
/// photon at `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SectorBasis {
    pub n: usize,
    pub sector: Sector,
}

impl SectorBasis {
    pub fn new(n: usize, sector: Sector) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParams(format!(
                "chain needs at least 3 sites, got {n}"
            )));
        }
        Ok(Self { n, sector })
    }

    pub fn dimension(&self) -> usize {
        match self.sector {
            Sector::OneExcitation => self.n + 1,
            Sector::TwoExcitation => self.n * (self.n + 1) / 2 + self.n,
        }
    }

    pub fn emitter_site(&self) -> usize {
        self.n / 2
    }

    fn pair_offset(&self, i: usize) -> usize {
        // Number of pairs (a, b) with a < i.
        i * self.n - i * (i.saturating_sub(1)) / 2
    }

    pub fn index(&self, state: BasisState) -> usize {
        match (self.sector, state) {
            (
                Sector::OneExcitation,
                BasisState::Photons {
                    first,
                    second: None,
                },
            ) => first,
            (Sector::OneExcitation, BasisState::Emitter { site: None }) => self.n,
            (
                Sector::TwoExcitation,
                BasisState::Photons {
                    first,
                    second: Some(second),
                },
            ) => {
                let (i, j) = if first <= second {
                    (first, second)
                } else {
                    (second, first)
                };
                self.pair_offset(i) + (j - i)
            }
            (Sector::TwoExcitation, BasisState::Emitter { site: Some(j) }) => {
                self.n * (self.n + 1) / 2 + j
            }
            _ => panic!("basis state {state:?} does not belong to {:?}", self.sector),
        }
    }

    pub fn state(&self, index: usize) -> BasisState {
        match self.sector {
            Sector::OneExcitation if index < self.n => BasisState::Photons {
                first: index,
                second: None,
            },
            Sector::OneExcitation => BasisState::Emitter { site: None },
            Sector::TwoExcitation => {
                let pairs = self.n * (self.n + 1) / 2;
                if index >= pairs {
                    return BasisState::Emitter {
                        site: Some(index - pairs),
                    };
                }
                let mut i = 0;
                while self.pair_offset(i + 1) <= index {
                    i += 1;
                }
                BasisState::Photons {
                    first: i,
                    second: Some(i + index - self.pair_offset(i)),
                }
            }
        }
    }
}

/// Compressed sparse row matrix; only what the eigensolvers need.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub dim: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let dim = rows.len();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for (c, v) in row {
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 += v,
                    _ => merged.push((c, v)),
                }
            }
            for (c, v) in merged {
                if v != 0.0 {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[row.clone()]
            .binary_search(&j)
            .map(|k| self.vals[row.start + k])
            .unwrap_or(0.0)
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let row = self.row_ptr[i]..self.row_ptr[i + 1];
            *yi = self.cols[row.clone()]
                .iter()
                .zip(&self.vals[row])
                .map(|(&c, &v)| v * x[c])
                .sum();
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.cols[k])] = self.vals[k];
            }
        }
        m
    }

    /// `max |H_ij - H_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                worst = worst.max((self.vals[k] - self.get(self.cols[k], i)).abs());
            }
        }
        worst
    }
}

fn neighbors(j: usize, n: usize, boundary: Boundary) -> impl Iterator<Item = usize> {
    let left = match (j, boundary) {
        (0, Boundary::Open) => None,
        (0, Boundary::Periodic) => Some(n - 1),
        _ => Some(j - 1),
    };
    let right = match (j + 1 == n, boundary) {
        (true, Boundary::Open) => None,
        (true, Boundary::Periodic) => Some(0),
        _ => Some(j + 1),
    };
    left.into_iter().chain(right)
}

/// Hamiltonian of `basis` as a sparse symmetric matrix. Hermiticity holds
/// exactly because every off-diagonal element is generated by the same
/// bosonic matrix-element rule in both directions.
pub fn build_hamiltonian(
    basis: SectorBasis,
    params: &ModelParams,
    boundary: Boundary,
) -> CsrMatrix {
    let n = basis.n;
    let c = basis.emitter_site();
    let (w0, j, v, om) = (
        params.omega0,
        params.hopping,
        params.coupling,
        params.omega_tls,
    );
    let rows = (0..basis.dimension())
        .map(|row| {
            let mut out = Vec::new();
            match basis.state(row) {
                BasisState::Photons {
                    first,
                    second: None,
                } => {
                    out.push((row, w0));
                    for m in neighbors(first, n, boundary) {
                        out.push((m, -j));
                    }
                    if first == c {
                        out.push((n, v));
                    }
                }
                BasisState::Emitter { site: None } => {
                    out.push((row, om));
                    out.push((c, v));
                }
                BasisState::Photons {
                    first,
                    second: Some(second),
                } => {
                    out.push((row, 2.0 * w0));
                    // a_m^+ a_p on a Fock state: sqrt(n_p) sqrt(n_m + 1).
                    let sites: &[usize] = if first == second {
                        &[first]
                    } else {
                        &[first, second]
                    };
                    for &p in sites {
                        let occ = if first == second { 2.0_f64 } else { 1.0 };
                        let rest = if p == first { second } else { first };
                        for m in neighbors(p, n, boundary) {
                            let after = if m == rest { 2.0_f64 } else { 1.0 };
                            let target = basis.index(BasisState::Photons {
                                first: m,
                                second: Some(rest),
                            });
                            out.push((target, -j * (occ * after).sqrt()));
                        }
                    }
                    // s^+ a_c annihilates a photon at c.
                    if first == c || second == c {
                        let rest = if first == c { second } else { first };
                        let count = (first == c) as usize + (second == c) as usize;
                        let target = basis.index(BasisState::Emitter { site: Some(rest) });
                        out.push((target, v * (count as f64).sqrt()));
                    }
                }
                BasisState::Emitter { site: Some(p) } => {
                    out.push((row, om + w0));
                    for m in neighbors(p, n, boundary) {
                        out.push((basis.index(BasisState::Emitter { site: Some(m) }), -j));
                    }
                    let count = if p == c { 2.0_f64 } else { 1.0 };
                    let target = basis.index(BasisState::Photons {
                        first: c,
                        second: Some(p),
                    });
                    out.push((target, v * count.sqrt()));
                }
            }
            out
        })
        .collect();
    CsrMatrix::from_rows(rows)
}

/// Discrete level with its weight near the emitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub energy: f64,
    /// Probability within [`LOCAL_RADIUS`] sites of the emitter (all photons
    /// inside the window). Close to 1 for bound states, `O(radius / N)` for
    /// scattering states.
    pub localization: f64,
}

/// Window half-width used for [`Level::localization`].
pub const LOCAL_RADIUS: usize = 20;

fn local_weight(basis: SectorBasis, vec: &[f64]) -> f64 {
    let c = basis.emitter_site() as i64;
    let near = |j: usize| (j as i64 - c).unsigned_abs() as usize <= LOCAL_RADIUS;
    vec.iter()
        .enumerate()
        .filter(|(i, _)| match basis.state(*i) {
            BasisState::Photons { first, second } => near(first) && second.is_none_or(near),
            BasisState::Emitter { site } => site.is_none_or(near),
        })
        .map(|(_, x)| x * x)
        .sum()
}

/// Full spectrum of the one-excitation sector with eigenvectors as columns.
pub fn one_excitation_eigen(
    n: usize,
    params: &ModelParams,
    boundary: Boundary,
) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    let basis = SectorBasis::new(n, Sector::OneExcitation)?;
    Ok(SymmetricEigen::new(
        build_hamiltonian(basis, params, boundary).to_dense(),
    ))
}

/// Extremal eigenpair found by Lanczos.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extreme {
    Lowest,
    Highest,
}

const LANCZOS_MAX_ITER: usize = 3000;

/// Lanczos iteration without reorthogonalization for the lowest or highest
/// eigenpair. Loss of orthogonality only produces spurious copies of
/// converged Ritz values, which does not affect the extremal one. The
/// eigenvector is assembled in a second pass that regenerates the Krylov
/// basis instead of storing it.
pub fn lanczos_extremal(h: &CsrMatrix, which: Extreme, tol: f64) -> Result<Eigenpair> {
    let dim = h.dim;
    // Deterministic start vector with weight on every basis state.
    let start: Vec<f64> = (0..dim)
        .map(|i| 1.0 + 0.5 * ((i as f64) * 0.7548776662466927).fract())
        .collect();
    let norm0 = start.iter().map(|x| x * x).sum::<f64>().sqrt();
    let start: Vec<f64> = start.iter().map(|x| x / norm0).collect();

    let mut alphas = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut prev = vec![0.0; dim];
    let mut cur = start.clone();
    let mut w = vec![0.0; dim];
    let mut last = f64::NAN;
    let mut ritz = (f64::NAN, DVector::<f64>::zeros(0), f64::INFINITY);
    for it in 0..LANCZOS_MAX_ITER.min(dim) {
        h.mul_vec(&cur, &mut w);
        let alpha: f64 = w.iter().zip(&cur).map(|(a, b)| a * b).sum();
        let beta_prev = betas.last().copied().unwrap_or(0.0);
        for i in 0..dim {
            w[i] -= alpha * cur[i] + beta_prev * prev[i];
        }
        let beta = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        alphas.push(alpha);

        let check = it >= 10 && (it % 10 == 0 || beta < 1e-14);
        if check || it + 1 == dim {
            let m = alphas.len();
            let t = DMatrix::from_fn(m, m, |i, j| {
                if i == j {
                    alphas[i]
                } else if i == j + 1 {
                    betas[j]
                } else if j == i + 1 {
                    betas[i]
                } else {
                    0.0
                }
            });
            let eig = SymmetricEigen::new(t);
            let idx = (0..m)
                .max_by(|&a, &b| {
                    let (x, y) = (eig.eigenvalues[a], eig.eigenvalues[b]);
                    match which {
                        Extreme::Lowest => y.total_cmp(&x),
                        Extreme::Highest => x.total_cmp(&y),
                    }
                })
                .unwrap_or(0);
            let value = eig.eigenvalues[idx];
            let y = eig.eigenvectors.column(idx).into_owned();
            let residual = (beta * y[m - 1]).abs();
            let scale = value.abs().max(1.0);
            ritz = (value, y, residual);
            if (residual < tol * scale && (value - last).abs() < tol * scale) || beta < 1e-14 {
                return Ok(finish_lanczos(h, &start, &alphas, &betas, ritz, it + 1));
            }
            last = value;
        }
        if beta < 1e-14 {
            break;
        }
        betas.push(beta);
        for i in 0..dim {
            prev[i] = cur[i];
            cur[i] = w[i] / beta;
        }
    }
    if ritz.2.is_finite() && ritz.2 < tol * ritz.0.abs().max(1.0) {
        let iters = alphas.len();
        return Ok(finish_lanczos(h, &start, &alphas, &betas, ritz, iters));
    }
    Err(Error::ConvergenceFailure {
        iterations: alphas.len(),
        residual: ritz.2,
    })
}

fn finish_lanczos(
    h: &CsrMatrix,
    start: &[f64],
    alphas: &[f64],
    betas: &[f64],
    (value, y, _): (f64, DVector<f64>, f64),
    iterations: usize,
) -> Eigenpair {
    let dim = h.dim;
    let m = y.len();
    let mut vector = vec![0.0; dim];
    let mut prev = vec![0.0; dim];
    let mut cur = start.to_vec();
    let mut w = vec![0.0; dim];
    for k in 0..m {
        for i in 0..dim {
            vector[i] += y[k] * cur[i];
        }
        if k + 1 == m {
            break;
        }
        h.mul_vec(&cur, &mut w);
        let beta_prev = if k == 0 { 0.0 } else { betas[k - 1] };
        for i in 0..dim {
            w[i] = (w[i] - alphas[k] * cur[i] - beta_prev * prev[i]) / betas[k];
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut w);
    }
    let norm = vector.iter().map(|x| x * x).sum::<f64>().sqrt();
    vector.iter_mut().for_each(|x| *x /= norm);
    let mut hv = vec![0.0; dim];
    h.mul_vec(&vector, &mut hv);
    let residual = hv
        .iter()
        .zip(&vector)
        .map(|(a, b)| (a - value * b).powi(2))
        .sum::<f64>()
        .sqrt();
    Eigenpair {
        value,
        vector,
        iterations,
        residual,
    }
}

/// Isolated levels outside the continua, with their localization.
///
/// One excitation: every eigenvalue outside the chain's free-photon band.
/// Two excitations: the extremal eigenvalues when they lie outside the
/// lowest/highest scattering thresholds, which are the one-excitation
/// extremes plus a free photon at the opposite band edge of the same chain.
pub fn discrete_spectrum(n: usize, sector: Sector, params: &ModelParams) -> Result<Vec<Level>> {
    discrete_spectrum_with(n, sector, params, Boundary::Open)
}

pub fn discrete_spectrum_with(
    n: usize,
    sector: Sector,
    params: &ModelParams,
    boundary: Boundary,
) -> Result<Vec<Level>> {
    let basis = SectorBasis::new(n, sector)?;
    let tol = 1e-8 * params.hopping;
    let free = free_band(n, params, boundary);
    match sector {
        Sector::OneExcitation => {
            let eig = one_excitation_eigen(n, params, boundary)?;
            let mut levels: Vec<Level> = (0..basis.dimension())
                .filter(|&i| {
                    let e = eig.eigenvalues[i];
                    e < free.0 - tol || e > free.1 + tol
                })
                .map(|i| {
                    let v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
                    Level {
                        energy: eig.eigenvalues[i],
                        localization: local_weight(basis, &v),
                    }
                })
                .collect();
            levels.sort_by(|a, b| a.energy.total_cmp(&b.energy));
            Ok(levels)
        }
        Sector::TwoExcitation => {
            let one = one_excitation_eigen(n, params, boundary)?;
            let e_lo = one.eigenvalues.min();
            let e_hi = one.eigenvalues.max();
            let (lo_thr, hi_thr) = (e_lo + free.0, e_hi + free.1);
            let h = build_hamiltonian(basis, params, boundary);
            let mut levels = Vec::new();
            for (which, outside) in [(Extreme::Lowest, -1.0), (Extreme::Highest, 1.0)] {
                let pair = lanczos_extremal(&h, which, 1e-12)?;
                let thr = if outside < 0.0 { lo_thr } else { hi_thr };
                if outside * (pair.value - thr) > tol {
                    levels.push(Level {
                        energy: pair.value,
                        localization: local_weight(basis, &pair.vector),
                    });
                }
            }
            Ok(levels)
        }
    }
}

/// Lowest and highest free-photon energies of the chain.
pub fn free_band(n: usize, params: &ModelParams, boundary: Boundary) -> (f64, f64) {
    let (w0, j) = (params.omega0, params.hopping);
    match boundary {
        Boundary::Open => {
            let c = (std::f64::consts::PI / (n as f64 + 1.0)).cos();
            (w0 - 2.0 * j * c, w0 + 2.0 * j * c)
        }
        Boundary::Periodic => {
            let top = (0..n)
                .map(|m| w0 - 2.0 * j * (2.0 * std::f64::consts::PI * m as f64 / n as f64).cos())
                .fold(f64::NEG_INFINITY, f64::max);
            (w0 - 2.0 * j, top)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(v: f64) -> ModelParams {
        ModelParams::new(4.0, 1.0, v, 3.0).unwrap()
    }

    #[test]
    fn basis_roundtrip() {
        for sector in [Sector::OneExcitation, Sector::TwoExcitation] {
            let b = SectorBasis::new(7, sector).unwrap();
            for i in 0..b.dimension() {
                assert_eq!(b.index(b.state(i)), i);
            }
        }
        assert_eq!(
            SectorBasis::new(7, Sector::TwoExcitation)
                .unwrap()
                .dimension(),
            28 + 7
        );
    }

    #[test]
    fn three_site_matrix_by_hand() {
        let p = ModelParams::new(4.0, 1.0, 0.5, 3.0).unwrap();
        let h = build_hamiltonian(
            SectorBasis::new(3, Sector::OneExcitation).unwrap(),
            &p,
            Boundary::Open,
        )
        .to_dense();
        #[rustfmt::skip]
        let expect = DMatrix::from_row_slice(4, 4, &[
            4.0, -1.0, 0.0, 0.0,
            -1.0, 4.0, -1.0, 0.5,
            0.0, -1.0, 4.0, 0.0,
            0.0, 0.5, 0.0, 3.0,
        ]);
        assert_eq!(h, expect);
    }

    #[test]
    fn hamiltonians_exactly_symmetric() {
        for boundary in [Boundary::Open, Boundary::Periodic] {
            for sector in [Sector::OneExcitation, Sector::TwoExcitation] {
                let h =
                    build_hamiltonian(SectorBasis::new(9, sector).unwrap(), &params(2.0), boundary);
                assert_eq!(h.max_asymmetry(), 0.0);
            }
        }
    }

    #[test]
    fn free_periodic_chain_is_cosine_band() {
        let n = 12;
        let eig = one_excitation_eigen(n, &params(0.0), Boundary::Periodic).unwrap();
        let mut got: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        got.sort_by(f64::total_cmp);
        let mut want: Vec<f64> = (0..n)
            .map(|m| 4.0 - 2.0 * (2.0 * std::f64::consts::PI * m as f64 / n as f64).cos())
            .chain([3.0])
            .collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in got.iter().zip(&want) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn two_excitation_matches_dense_and_bosonic_counting() {
        // Dense check of the pair basis: with V = 0 the spectrum is all sums
        // of one-photon and emitter energies with bosonic multiplicity.
        let n = 6;
        let p = params(0.0);
        let h = build_hamiltonian(
            SectorBasis::new(n, Sector::TwoExcitation).unwrap(),
            &p,
            Boundary::Open,
        );
        let mut got: Vec<f64> = SymmetricEigen::new(h.to_dense())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        got.sort_by(f64::total_cmp);
        let single: Vec<f64> = (1..=n)
            .map(|m| 4.0 - 2.0 * (std::f64::consts::PI * m as f64 / (n as f64 + 1.0)).cos())
            .collect();
        let mut want = Vec::new();
        for a in 0..n {
            for b in a..n {
                want.push(single[a] + single[b]);
            }
            want.push(3.0 + single[a]);
        }
        want.sort_by(f64::total_cmp);
        for (a, b) in got.iter().zip(&want) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }

        let hv = build_hamiltonian(
            SectorBasis::new(n, Sector::TwoExcitation).unwrap(),
            &params(2.0),
            Boundary::Open,
        );
        let dense = SymmetricEigen::new(hv.to_dense()).eigenvalues;
        let low = lanczos_extremal(&hv, Extreme::Lowest, 1e-12).unwrap();
        let high = lanczos_extremal(&hv, Extreme::Highest, 1e-12).unwrap();
        assert_relative_eq!(low.value, dense.min(), epsilon = 1e-10);
        assert_relative_eq!(high.value, dense.max(), epsilon = 1e-10);
    }

    #[test]
    fn decoupled_chain_has_no_isolated_pair_levels() {
        let levels = discrete_spectrum(40, Sector::TwoExcitation, &params(0.0)).unwrap();
        assert!(levels.is_empty(), "{levels:?}");
    }
}
