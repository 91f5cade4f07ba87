//! Coordinate-space fields: the breakup wavefunction `Phi_s(x1, x2)`, the
//! two-photon outgoing wavefunction `g(x1, x2)` with its correlation
//! `G = |g|^2`, and the lattice profiles of three-body bound states.
//!
//! Energy-shell integrals use `eps1 = mid - half cos(phi)` so that the
//! inverse group velocities at the shell ends are absorbed, followed by
//! composite Gauss–Legendre in `phi`. The cosine tables turn a whole grid into
//! two real matrix products.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::band_integrals::{two_photon_constants_at, TwoPhotonConstants};
use crate::bound3::{eta2_grid, predicted_decay, BoundState3};
use crate::error::{Error, Result};
use crate::greens::Model;
use crate::quad::composite_gauss_legendre;
use crate::smatrix::{
    breakup_reduced, fluorescence_reduced, shell_window, single_photon_rt_at_energy,
    DENOMINATOR_TOLERANCE,
};

/// Default number of shell nodes; doubled until the peak settles.
pub const DEFAULT_SHELL_NODES: usize = 4096;
/// Relative change of the peak value accepted as converged.
pub const SHELL_CONVERGENCE: f64 = 1e-6;
const MAX_SHELL_NODES: usize = 1 << 17;
const GL_ORDER: usize = 16;

/// Uniform square grid `x_min..=x_max` with `n` points per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            x_min: -30.0,
            x_max: 30.0,
            n: 241,
        }
    }
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if n < 2 || !x_min.is_finite() || !x_max.is_finite() || x_max <= x_min {
            return Err(Error::InvalidParams(format!(
                "grid needs n >= 2 and x_max > x_min, got n={n}, [{x_min}, {x_max}]"
            )));
        }
        Ok(Self { x_min, x_max, n })
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        if self.n == 1 {
            return self.x_min;
        }
        self.x_min + (self.x_max - self.x_min) * i as f64 / (self.n - 1) as f64
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.coordinate(i)).collect()
    }
}

/// Complex field sampled on a [`GridSpec`], stored row-major with
/// `values[i * n + j] = f(x_i, x_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    pub values: Vec<Complex64>,
}

impl Grid2D {
    pub fn zeros(spec: GridSpec) -> Self {
        Self {
            x_min: spec.x_min,
            x_max: spec.x_max,
            n: spec.n,
            values: vec![Complex64::new(0.0, 0.0); spec.n * spec.n],
        }
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            x_min: self.x_min,
            x_max: self.x_max,
            n: self.n,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.n + j]
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        self.spec().coordinate(i)
    }

    /// `max |f(x_i, x_j) - f(x_j, x_i)|`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..i {
                worst = worst.max((self.get(i, j) - self.get(j, i)).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `|f|^2` on the grid.
    pub fn intensity(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }
}

/// Shell-integral field together with how it was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellField {
    pub grid: Grid2D,
    /// False when the channel is closed and the field is identically zero.
    pub channel_open: bool,
    pub nodes: usize,
}

/// Node energies and weights of one shell integral; the weights include the
/// `phi` Jacobian.
struct ShellRule {
    e: f64,
    nodes: Vec<(f64, f64)>,
}

impl ShellRule {
    fn new(e: f64, lo: f64, hi: f64, count: usize) -> Self {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let panels = (count / GL_ORDER).max(1);
        let nodes = composite_gauss_legendre(0.0, PI, panels, GL_ORDER)
            .into_iter()
            .map(|(phi, w)| (mid - half * phi.cos(), w * half * phi.sin()))
            .collect();
        Self { e, nodes }
    }
}

/// `(1/pi) int d eps1 F(eps1) / (v1 v2) [cos k1 x1 cos k2 x2 + cos k1 x2 cos k2 x1]`
/// on the full grid, where `amp` gives `F`.
fn shell_transform<F>(model: &Model, rule: &ShellRule, spec: GridSpec, amp: F) -> Grid2D
where
    F: Fn(f64) -> Complex64 + Sync,
{
    let p = &model.params;
    let xs = spec.coordinates();
    let q = rule.nodes.len();
    let n = spec.n;
    let mut c1 = DMatrix::<f64>::zeros(q, n);
    let mut c2 = DMatrix::<f64>::zeros(q, n);
    let mut cre = vec![0.0; q];
    let mut cim = vec![0.0; q];
    for (row, &(eps1, w)) in rule.nodes.iter().enumerate() {
        let eps2 = rule.e - eps1;
        let v12 = p.group_velocity(eps1) * p.group_velocity(eps2);
        if v12 == 0.0 {
            continue;
        }
        let k1 = p.angle_at_energy(eps1);
        let k2 = p.angle_at_energy(eps2);
        let c = amp(eps1) * (w / (PI * v12));
        cre[row] = c.re;
        cim[row] = c.im;
        for (col, &x) in xs.iter().enumerate() {
            c1[(row, col)] = (k1 * x).cos();
            c2[(row, col)] = (k2 * x).cos();
        }
    }
    let scaled = |coef: &[f64]| {
        let mut m = c2.clone();
        for (row, &c) in coef.iter().enumerate() {
            m.row_mut(row).scale_mut(c);
        }
        let a = c1.transpose() * m;
        let at = a.transpose();
        a + at
    };
    let re = scaled(&cre);
    let im = scaled(&cim);
    let mut grid = Grid2D::zeros(spec);
    for i in 0..n {
        for j in 0..n {
            grid.values[i * n + j] = Complex64::new(re[(i, j)], im[(i, j)]);
        }
    }
    grid
}

/// Same transform at scattered points `(x1, x2)`.
fn shell_transform_points<F>(
    model: &Model,
    rule: &ShellRule,
    points: &[(f64, f64)],
    amp: F,
) -> Vec<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    let p = &model.params;
    let terms: Vec<(f64, f64, Complex64)> = rule
        .nodes
        .iter()
        .filter_map(|&(eps1, w)| {
            let eps2 = rule.e - eps1;
            let v12 = p.group_velocity(eps1) * p.group_velocity(eps2);
            (v12 > 0.0).then(|| {
                (
                    p.angle_at_energy(eps1),
                    p.angle_at_energy(eps2),
                    amp(eps1) * (w / (PI * v12)),
                )
            })
        })
        .collect();
    points
        .par_iter()
        .map(|&(x1, x2)| {
            terms
                .iter()
                .map(|&(k1, k2, c)| {
                    c * ((k1 * x1).cos() * (k2 * x2).cos() + (k1 * x2).cos() * (k2 * x1).cos())
                })
                .sum()
        })
        .collect()
}

/// Double the node count until the largest grid value changes by less than
/// [`SHELL_CONVERGENCE`] relative.
fn converged_transform<F>(
    model: &Model,
    e: f64,
    lo: f64,
    hi: f64,
    spec: GridSpec,
    amp: F,
) -> (Grid2D, usize)
where
    F: Fn(f64) -> Complex64 + Sync,
{
    let mut nodes = DEFAULT_SHELL_NODES;
    let mut grid = shell_transform(model, &ShellRule::new(e, lo, hi, nodes), spec, &amp);
    while nodes < MAX_SHELL_NODES {
        let finer = shell_transform(model, &ShellRule::new(e, lo, hi, 2 * nodes), spec, &amp);
        let peak = finer.max_abs();
        let change = grid
            .values
            .iter()
            .zip(&finer.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        grid = finer;
        nodes *= 2;
        if change <= SHELL_CONVERGENCE * peak {
            break;
        }
    }
    (grid, nodes)
}

/// Breakup wavefunction `Phi_s(x1, x2)` for a photon of energy `eps0` on bound
/// state `s`. Zero, with `channel_open = false`, below the breakup threshold.
pub fn breakup_wavefunction(
    model: &Model,
    eps0: f64,
    s: usize,
    spec: GridSpec,
) -> Result<ShellField> {
    let p = &model.params;
    let e = model.bound_state(s)?.energy + eps0;
    let Some((lo, hi)) = shell_window(e, p) else {
        return Ok(ShellField {
            grid: Grid2D::zeros(spec),
            channel_open: false,
            nodes: 0,
        });
    };
    let bs = model.bound_state(s)?;
    let zg = bs.z * model.g_plus(eps0);
    let d = zg - crate::band_integrals::a_s(model, eps0, eps0, s)?;
    if d.norm() < DENOMINATOR_TOLERANCE * zg.norm() {
        return Err(Error::DenominatorVanishing {
            eps0,
            magnitude: d.norm(),
        });
    }
    let amp = |eps1: f64| breakup_reduced(model, eps0, eps1, s, d).unwrap_or_default();
    let (grid, nodes) = converged_transform(model, e, lo, hi, spec, amp);
    Ok(ShellField {
        grid,
        channel_open: true,
        nodes,
    })
}

/// Single-photon scattered wave `t e^{ikx} + r e^{-ikx}` for a photon of
/// energy `eps` incident from the left.
fn scattered_wave(eps: f64, model: &Model) -> Result<impl Fn(f64) -> Complex64> {
    let (t, r) = single_photon_rt_at_energy(eps, &model.params)?;
    let k = model.params.angle_at_energy(eps);
    Ok(
        move |x: f64| {
            t * Complex64::from_polar(1.0, k * x) + r * Complex64::from_polar(1.0, -k * x)
        },
    )
}

/// Outgoing two-photon wavefunction for incident energies `eps1`, `eps2`.
pub struct Correlation<'a> {
    model: &'a Model,
    eps: [f64; 2],
    consts: Option<TwoPhotonConstants>,
    nodes: usize,
}

impl<'a> Correlation<'a> {
    pub fn new(model: &'a Model, eps1: f64, eps2: f64) -> Result<Self> {
        let p = &model.params;
        for e in [eps1, eps2] {
            single_photon_rt_at_energy(e, p)?;
        }
        let consts = if p.coupling > 0.0 {
            Some(two_photon_constants_at(model, eps1 + eps2)?)
        } else {
            None
        };
        Ok(Self {
            model,
            eps: [eps1, eps2],
            consts,
            nodes: DEFAULT_SHELL_NODES,
        })
    }

    pub fn with_nodes(mut self, nodes: usize) -> Self {
        self.nodes = nodes;
        self
    }

    pub fn constants(&self) -> Option<&TwoPhotonConstants> {
        self.consts.as_ref()
    }

    fn fluorescence_amp(&self) -> impl Fn(f64) -> Complex64 + Sync + '_ {
        let e3 = self.eps[0] + self.eps[1];
        move |eps1: f64| match &self.consts {
            Some(c) => fluorescence_reduced(self.model, self.eps, [eps1, e3 - eps1], c),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Factorized part `(1/2 pi) [f1(x1) f2(x2) + f1(x2) f2(x1)]`.
    pub fn factorized_at(&self, x1: f64, x2: f64) -> Result<Complex64> {
        let f1 = scattered_wave(self.eps[0], self.model)?;
        let f2 = scattered_wave(self.eps[1], self.model)?;
        Ok((f1(x1) * f2(x2) + f1(x2) * f2(x1)) / (2.0 * PI))
    }

    /// `g` at scattered points.
    pub fn at_points(&self, points: &[(f64, f64)]) -> Result<Vec<Complex64>> {
        let f1 = scattered_wave(self.eps[0], self.model)?;
        let f2 = scattered_wave(self.eps[1], self.model)?;
        let e3 = self.eps[0] + self.eps[1];
        let mut out: Vec<Complex64> = points
            .iter()
            .map(|&(x1, x2)| (f1(x1) * f2(x2) + f1(x2) * f2(x1)) / (2.0 * PI))
            .collect();
        if let Some((lo, hi)) = shell_window(e3, &self.model.params) {
            let rule = ShellRule::new(e3, lo, hi, self.nodes);
            let r = shell_transform_points(self.model, &rule, points, self.fluorescence_amp());
            for (o, r) in out.iter_mut().zip(r) {
                *o += r;
            }
        }
        Ok(out)
    }

    /// `g(x1, x2)` on the full grid.
    pub fn grid(&self, spec: GridSpec) -> Result<Grid2D> {
        let f1 = scattered_wave(self.eps[0], self.model)?;
        let f2 = scattered_wave(self.eps[1], self.model)?;
        let xs = spec.coordinates();
        let e3 = self.eps[0] + self.eps[1];
        let mut grid = match shell_window(e3, &self.model.params) {
            Some((lo, hi)) => {
                converged_transform(self.model, e3, lo, hi, spec, self.fluorescence_amp()).0
            }
            None => Grid2D::zeros(spec),
        };
        for (i, &x1) in xs.iter().enumerate() {
            for (j, &x2) in xs.iter().enumerate() {
                grid.values[i * spec.n + j] += (f1(x1) * f2(x2) + f1(x2) * f2(x1)) / (2.0 * PI);
            }
        }
        Ok(grid)
    }

    /// `G(x_c - x_r/2, x_c + x_r/2)` along a relative-coordinate slice.
    pub fn slice(&self, x_c: f64, x_r: &[f64]) -> Result<Vec<f64>> {
        let points: Vec<(f64, f64)> = x_r
            .iter()
            .map(|&r| (x_c - 0.5 * r, x_c + 0.5 * r))
            .collect();
        Ok(self
            .at_points(&points)?
            .into_iter()
            .map(|g| g.norm_sqr())
            .collect())
    }
}

/// `g(x1, x2)` on a grid for incident energies `eps1`, `eps2`.
pub fn correlation_wavefunction(
    model: &Model,
    eps1: f64,
    eps2: f64,
    spec: GridSpec,
) -> Result<Grid2D> {
    Correlation::new(model, eps1, eps2)?.grid(spec)
}

/// Real-space amplitudes of a three-body bound state on lattice sites.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundProfile {
    /// Integer sites `x` and normalized `eta_e(x)`.
    pub sites: Vec<i64>,
    pub eta_e: Vec<Complex64>,
    /// Normalized `eta(x1, x2)` on the same sites.
    pub eta2: Grid2D,
}

impl BoundProfile {
    pub fn eta_e_sq(&self) -> Vec<f64> {
        self.eta_e.iter().map(|v| v.norm_sqr()).collect()
    }
}

/// Fourier transform of the normalized amplitudes to integer sites
/// `-half_width..=half_width`:
/// `eta_e(x) = (2 pi)^{-1/2} int dk eta_e(k) e^{ikx}` and the two-dimensional
/// analogue for `eta(x1, x2)`.
pub fn bound_profile(model: &Model, bs3: &BoundState3, half_width: i64) -> Result<BoundProfile> {
    let n = bs3.grid_len();
    let h = 2.0 * PI / n as f64;
    let sites: Vec<i64> = (-half_width..=half_width).collect();
    let m = sites.len();
    let phase = DMatrix::<Complex64>::from_fn(m, n, |i, j| {
        Complex64::from_polar(1.0, bs3.momentum(j) * sites[i] as f64)
    });
    let eta_k = nalgebra::DVector::from_iterator(n, bs3.eta_e.iter().map(|v| v * bs3.norm));
    let eta_e = (&phase * eta_k) * Complex64::new(h / (2.0 * PI).sqrt(), 0.0);

    let pairs = eta2_grid(model, bs3)?;
    let eta_kk = DMatrix::<Complex64>::from_fn(n, n, |i, j| pairs[i][j] * bs3.norm);
    let eta_xx = &phase * eta_kk * phase.transpose() * Complex64::new(h * h / (2.0 * PI), 0.0);

    let mut eta2 = Grid2D::zeros(GridSpec {
        x_min: -half_width as f64,
        x_max: half_width as f64,
        n: m,
    });
    for i in 0..m {
        for j in 0..m {
            eta2.values[i * m + j] = eta_xx[(i, j)];
        }
    }
    Ok(BoundProfile {
        sites,
        eta_e: eta_e.iter().copied().collect(),
        eta2,
    })
}

/// Bound-state profile on the real-space window of `spec`, rejecting windows
/// too small to capture the decay (boundary value above `1e-3` of the peak).
pub fn bound3_realspace(model: &Model, bs3: &BoundState3, spec: GridSpec) -> Result<BoundProfile> {
    let half_width = spec.x_max.abs().max(spec.x_min.abs()).floor() as i64;
    let profile = bound_profile(model, bs3, half_width)?;
    let sq = profile.eta_e_sq();
    let peak = sq.iter().copied().fold(0.0, f64::max);
    let boundary = sq[0].max(sq[sq.len() - 1]);
    if peak == 0.0 || boundary > 1e-3 * peak {
        return Err(Error::GridTooSmall(if peak > 0.0 {
            boundary / peak
        } else {
            f64::INFINITY
        }));
    }
    Ok(profile)
}

/// Relative residual `||(H - B) psi|| / ||psi||` of a bound-state profile on
/// the infinite chain, with the state
/// `sum_x eta_e(x) |e, x> + sum_{x1, x2} eta(x1, x2) a_{x1}^+ a_{x2}^+ |0>`
/// truncated to the profile window (amplitudes outside it taken as zero).
pub fn bound_lattice_residual(model: &Model, bs3: &BoundState3, profile: &BoundProfile) -> f64 {
    let p = &model.params;
    let m = profile.sites.len();
    let c = m / 2;
    let zero = Complex64::new(0.0, 0.0);
    let phi = |i: i64| -> Complex64 {
        if (0..m as i64).contains(&i) {
            profile.eta_e[i as usize]
        } else {
            zero
        }
    };
    let psi = |i: i64, j: i64| -> Complex64 {
        if (0..m as i64).contains(&i) && (0..m as i64).contains(&j) {
            profile.eta2.get(i as usize, j as usize)
        } else {
            zero
        }
    };
    let (w0, jh, v, om) = (p.omega0, p.hopping, p.coupling, p.omega_tls);
    let c = c as i64;
    let mut res = 0.0;
    let mut norm = 0.0;
    for x in 0..m as i64 {
        let h = (om + w0) * phi(x) - jh * (phi(x - 1) + phi(x + 1)) + 2.0 * v * psi(c, x);
        res += (h - bs3.b * phi(x)).norm_sqr();
        norm += phi(x).norm_sqr();
    }
    for x1 in 0..m as i64 {
        for x2 in 0..m as i64 {
            let hop = psi(x1 - 1, x2) + psi(x1 + 1, x2) + psi(x1, x2 - 1) + psi(x1, x2 + 1);
            let mut h = 2.0 * w0 * psi(x1, x2) - jh * hop;
            if x1 == c {
                h += 0.5 * v * phi(x2);
            }
            if x2 == c {
                h += 0.5 * v * phi(x1);
            }
            res += 2.0 * (h - bs3.b * psi(x1, x2)).norm_sqr();
            norm += 2.0 * psi(x1, x2).norm_sqr();
        }
    }
    (res / norm).sqrt()
}

/// Least-squares slope of `ln y` against `x` over the points with
/// `x_lo <= x <= x_hi` and `y > 0`.
pub fn log_slope(x: &[f64], y: &[f64], x_lo: f64, x_hi: f64) -> f64 {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(&xi, &yi)| xi >= x_lo && xi <= x_hi && yi > 0.0)
        .map(|(&xi, &yi)| (xi, yi.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Fitted decay constant `kappa` of `|eta_e(x)|^2 ~ exp(-2 kappa |x|)` over
/// `x_lo <= |x| <= x_hi`, and the value predicted from the momentum pole.
pub fn decay_constants(
    profile: &BoundProfile,
    bs3: &BoundState3,
    model: &Model,
    x_lo: f64,
    x_hi: f64,
) -> (f64, f64) {
    let sq = profile.eta_e_sq();
    let x: Vec<f64> = profile.sites.iter().map(|&s| s as f64).collect();
    let slope = log_slope(&x, &sq, x_lo, x_hi);
    (-0.5 * slope, predicted_decay(bs3, &model.params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::band_model::ModelParams;
    use crate::bound3::solve_beta;
    use approx::assert_relative_eq;

    fn small_grid() -> GridSpec {
        GridSpec::new(-10.0, 10.0, 41).unwrap()
    }

    #[test]
    fn closed_breakup_channel_is_zero() {
        let m = Model::new(ModelParams::new(4.0, 1.0, 1.0, 2.5).unwrap()).unwrap();
        let f = breakup_wavefunction(&m, 2.2, 1, small_grid()).unwrap();
        assert!(!f.channel_open);
        assert!(f.grid.values.iter().all(|v| *v == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn breakup_is_symmetric_and_localized() {
        let m = Model::new(ModelParams::new(4.0, 1.0, 1.0, 2.5).unwrap()).unwrap();
        let f = breakup_wavefunction(&m, 4.65, 1, GridSpec::new(-30.0, 30.0, 61).unwrap()).unwrap();
        assert!(f.channel_open);
        assert!(f.grid.max_asymmetry() <= 1e-12 * f.grid.max_abs());
        let center = f.grid.get(30, 30).norm_sqr();
        let corner = f.grid.get(0, 60).norm_sqr();
        assert!(center > corner);
    }

    #[test]
    fn decoupled_correlation_is_plane_waves() {
        let m = Model::new(ModelParams::new(4.0, 1.0, 0.0, 4.0).unwrap()).unwrap();
        let c = Correlation::new(&m, 3.0, 5.0).unwrap();
        let g = c.at_points(&[(1.0, 2.0), (4.0, 5.0)]).unwrap();
        // With t = 1 only the translation phase changes.
        assert_relative_eq!(g[0].norm(), g[1].norm(), epsilon = 1e-14);
    }

    #[test]
    fn grid_and_points_agree() {
        let m = Model::new(ModelParams::new(4.0, 1.0, 1.0, 2.5).unwrap()).unwrap();
        let c = Correlation::new(&m, 3.1, 4.4).unwrap();
        let spec = small_grid();
        let grid = c.grid(spec).unwrap();
        let pts = [
            (spec.coordinate(3), spec.coordinate(17)),
            (spec.coordinate(20), spec.coordinate(20)),
        ];
        let g = c.with_nodes(16384).at_points(&pts).unwrap();
        assert!((g[0] - grid.get(3, 17)).norm() < 1e-6 * grid.max_abs());
        assert!((g[1] - grid.get(20, 20)).norm() < 1e-6 * grid.max_abs());
        assert!(grid.max_asymmetry() <= 1e-12 * grid.max_abs());
    }

    #[test]
    fn bound_profile_symmetric_and_decaying() {
        let m = Model::new(ModelParams::new(4.0, 1.0, 2.0, 3.0).unwrap()).unwrap();
        let b = solve_beta(&m, 1).unwrap();
        let p = bound3_realspace(&m, &b, GridSpec::default()).unwrap();
        assert!(p.eta2.max_asymmetry() <= 1e-12 * p.eta2.max_abs());
        let (fit, pred) = decay_constants(&p, &b, &m, 10.0, 30.0);
        assert_relative_eq!(fit, pred, max_relative = 0.02);
        assert!(matches!(
            bound3_realspace(&m, &b, GridSpec::new(-3.0, 3.0, 7).unwrap()),
            Err(Error::GridTooSmall(_))
        ));
    }

    #[test]
    fn log_slope_of_exponential() {
        let x: Vec<f64> = (0..20).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * (-0.7 * v).exp()).collect();
        assert_relative_eq!(log_slope(&x, &y, 0.0, 19.0), -0.7, epsilon = 1e-12);
    }
}
