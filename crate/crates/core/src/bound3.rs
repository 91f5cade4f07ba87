//! Three-body bound states: two photons trapped together with the emitter.
//!
//! The energy is `B_s = E_s + beta_s` where `beta_s` solves
//! `Z_s G(beta) = A_s(beta, beta)` on the real axis outside the band. The
//! momentum-space amplitudes are
//! `eta_e(k) = V^2 A_s(eps_k, beta) / (2 pi (beta - eps_k))` for the excited
//! emitter plus one photon and
//! `eta(k, k') = V (eta_e(k) + eta_e(k')) / (2 sqrt(2 pi) (B - eps_k - eps_k'))`
//! for two photons.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::band_integrals::a_s;
use crate::band_model::{dispersion, ModelParams};
use crate::error::{Error, Result};
use crate::greens::Model;
use crate::roots::all_roots;

/// Points per axis of the periodic momentum grid.
pub const MOMENTUM_GRID: usize = 512;

/// `|B - eps - eps'|` below `SHELL_GAP_TOLERANCE * J` means the state touches
/// the two-photon continuum.
pub const SHELL_GAP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct BoundState3 {
    pub s: usize,
    pub beta: f64,
    pub b: f64,
    /// `|Z_s G(beta) - A_s(beta, beta)|` at the returned root.
    pub residual: f64,
    /// Normalization constant multiplying the raw amplitudes.
    pub norm: f64,
    /// Raw `eta_e(k_j)` on the grid `k_j = -pi + 2 pi j / n`.
    pub eta_e: Vec<Complex64>,
}

impl BoundState3 {
    pub fn grid_len(&self) -> usize {
        self.eta_e.len()
    }

    pub fn momentum(&self, j: usize) -> f64 {
        grid_momentum(j, self.eta_e.len())
    }
}

pub fn grid_momentum(j: usize, n: usize) -> f64 {
    -PI + 2.0 * PI * j as f64 / n as f64
}

/// `Z_s G(beta) - A_s(beta, beta)` with `E = E_s + beta`.
pub fn beta_residual(model: &Model, s: usize, beta: f64) -> Result<Complex64> {
    let bs = model.bound_state(s)?;
    Ok(bs.z * model.g_plus(beta) - a_s(model, beta, beta, s)?)
}

/// All sign changes of the real residual on the admissible side of the band
/// (below it for `s = 1`, above it for `s = 2`), skipping the pole at `E_s`.
pub fn beta_candidates(model: &Model, s: usize) -> Result<Vec<f64>> {
    let p = &model.params;
    let bs = model.bound_state(s)?;
    let reach = 8.0 * (2.0 * p.hopping + p.coupling + (p.omega_tls - p.omega0).abs());
    let gap = 1e-8 * p.hopping;
    let f = |beta: f64| {
        beta_residual(model, s, beta)
            .map(|r| r.re)
            .unwrap_or(f64::NAN)
    };
    let (edge, far, sign) = if s == 1 {
        (p.band_min(), p.band_min() - reach, -1.0)
    } else {
        (p.band_max(), p.band_max() + reach, 1.0)
    };
    let pole = bs.energy;
    // Segments ordered from the band edge outward, split at E_s.
    let segments = [
        (edge + sign * gap, pole - sign * gap),
        (pole + sign * gap, far),
    ];
    let mut roots = Vec::new();
    for (a, b) in segments {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        if hi - lo <= 0.0 {
            continue;
        }
        roots.extend(all_roots(f, lo, hi, 400, 1e-14 * p.hopping.max(1.0)));
    }
    roots.sort_by(|x, y| x.total_cmp(y));
    Ok(roots)
}

/// Three-body bound state `s`: the outermost root (lowest for `s = 1`,
/// highest for `s = 2`) together with its normalized amplitudes.
pub fn solve_beta(model: &Model, s: usize) -> Result<BoundState3> {
    let p = &model.params;
    if p.coupling <= 0.0 {
        return Err(Error::InvalidParams(
            "three-body states need V > 0".to_string(),
        ));
    }
    let roots = beta_candidates(model, s)?;
    let beta = if s == 1 { roots.first() } else { roots.last() };
    let Some(&beta) = beta else {
        let (lo, hi) = if s == 1 {
            (f64::NEG_INFINITY, p.band_min())
        } else {
            (p.band_max(), f64::INFINITY)
        };
        return Err(Error::RootNotBracketed { lo, hi });
    };
    build_state(model, s, beta, MOMENTUM_GRID)
}

/// Assemble the state at a known `beta` on an `n`-point momentum grid.
pub fn build_state(model: &Model, s: usize, beta: f64, n: usize) -> Result<BoundState3> {
    let bs = model.bound_state(s)?;
    let residual = beta_residual(model, s, beta)?.norm();
    let mut state = BoundState3 {
        s,
        beta,
        b: bs.energy + beta,
        residual,
        norm: 1.0,
        eta_e: Vec::new(),
    };
    // eta_e depends on k only through eps_k, so evaluate once per |k|.
    let half: Vec<Complex64> = (0..=n / 2)
        .map(|j| eta_e_momentum(model, grid_momentum(j, n), &state))
        .collect::<Result<_>>()?;
    state.eta_e = (0..n).map(|j| half[j.min(n - j)]).collect();
    state.norm = normalization(model, &state)?;
    Ok(state)
}

/// Raw `eta_e(k) = V^2 A_s(eps_k, beta) / (2 pi (beta - eps_k))`.
pub fn eta_e_momentum(model: &Model, k: f64, bs3: &BoundState3) -> Result<Complex64> {
    let v = model.params.coupling;
    let eps = dispersion(k, &model.params);
    let a = a_s(model, eps, bs3.beta, bs3.s)?;
    Ok(v * v * a / (2.0 * PI * (bs3.beta - eps)))
}

fn eta2_from(
    eta_k: Complex64,
    eta_kp: Complex64,
    gap: f64,
    params: &ModelParams,
) -> Result<Complex64> {
    if gap.abs() < SHELL_GAP_TOLERANCE * params.hopping {
        return Err(Error::ShellTouching(gap.abs()));
    }
    Ok(params.coupling * (eta_k + eta_kp) / (2.0 * (2.0 * PI).sqrt() * gap))
}

/// Raw two-photon amplitude `eta(k, k')`.
pub fn eta2_momentum(model: &Model, k: f64, kp: f64, bs3: &BoundState3) -> Result<Complex64> {
    let p = &model.params;
    let gap = bs3.b - dispersion(k, p) - dispersion(kp, p);
    let a = eta_e_momentum(model, k, bs3)?;
    let b = eta_e_momentum(model, kp, bs3)?;
    eta2_from(a, b, gap, p)
}

/// Raw `eta(k_i, k_j)` on the stored momentum grid.
pub fn eta2_grid(model: &Model, bs3: &BoundState3) -> Result<Vec<Vec<Complex64>>> {
    let p = &model.params;
    let n = bs3.grid_len();
    let eps: Vec<f64> = (0..n).map(|j| dispersion(bs3.momentum(j), p)).collect();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| eta2_from(bs3.eta_e[i], bs3.eta_e[j], bs3.b - eps[i] - eps[j], p))
                .collect()
        })
        .collect()
}

/// `N = [int |eta_e|^2 dk + 2 int int |eta|^2 dk dk']^{-1/2}` by the periodic
/// trapezoid rule, which converges geometrically for these analytic
/// integrands.
pub fn normalization(model: &Model, bs3: &BoundState3) -> Result<f64> {
    let n = bs3.grid_len();
    let h = 2.0 * PI / n as f64;
    let one: f64 = bs3.eta_e.iter().map(|e| e.norm_sqr()).sum::<f64>() * h;
    let grid = eta2_grid(model, bs3)?;
    let two: f64 = grid.iter().flatten().map(|e| e.norm_sqr()).sum::<f64>() * h * h;
    Ok(1.0 / (one + 2.0 * two).sqrt())
}

/// Decay constant of `|eta_e(x)|` predicted by the pole of `(beta - eps_k)^{-1}`
/// continued to complex momentum.
pub fn predicted_decay(bs3: &BoundState3, params: &ModelParams) -> f64 {
    ((bs3.beta - params.omega0).abs() / (2.0 * params.hopping)).acosh()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn strong() -> Model {
        Model::new(ModelParams::new(4.0, 1.0, 2.0, 3.0).unwrap()).unwrap()
    }

    #[test]
    fn three_body_energies() {
        let m = strong();
        let b1 = solve_beta(&m, 1).unwrap();
        let b2 = solve_beta(&m, 2).unwrap();
        assert_relative_eq!(b1.b, 2.818542927308467, epsilon = 1e-9);
        assert_relative_eq!(b2.b, 12.544058517699666, epsilon = 1e-9);
        assert!(b1.beta < 2.0 && b2.beta > 6.0);
        assert!(b1.residual < 1e-10 && b2.residual < 1e-10);
        let e = m.bound_states().unwrap();
        assert_relative_eq!(b1.b - e[0].energy, b1.beta, epsilon = 1e-12);
    }

    #[test]
    fn eta_e_even_and_smooth() {
        let m = strong();
        let b = solve_beta(&m, 1).unwrap();
        for k in [0.3, 1.2, 2.9] {
            let a = eta_e_momentum(&m, k, &b).unwrap();
            let c = eta_e_momentum(&m, -k, &b).unwrap();
            assert_eq!(a, c);
            assert!(a.norm() > 0.0 && a.is_finite());
        }
    }

    #[test]
    fn eta2_symmetric_and_normalized() {
        let m = strong();
        let b = solve_beta(&m, 2).unwrap();
        let x = eta2_momentum(&m, 0.4, -1.7, &b).unwrap();
        let y = eta2_momentum(&m, -1.7, 0.4, &b).unwrap();
        assert_eq!(x, y);

        let n = b.grid_len();
        let h = 2.0 * PI / n as f64;
        let grid = eta2_grid(&m, &b).unwrap();
        let one: f64 = b.eta_e.iter().map(|e| e.norm_sqr()).sum::<f64>() * h;
        let two: f64 = grid.iter().flatten().map(|e| e.norm_sqr()).sum::<f64>() * h * h;
        assert_relative_eq!(b.norm * b.norm * (one + 2.0 * two), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn normalization_grid_converged() {
        let m = strong();
        let b = solve_beta(&m, 1).unwrap();
        let coarse = build_state(&m, 1, b.beta, 256).unwrap();
        assert_relative_eq!(coarse.norm, b.norm, max_relative = 1e-10);
    }

    #[test]
    fn eta_e_scales_as_v_squared() {
        // At fixed beta the prefactor is V^2 and A_s stays finite as V -> 0.
        let mk = |v: f64| Model::new(ModelParams::new(4.0, 1.0, v, 3.0).unwrap()).unwrap();
        let (m1, m2) = (mk(1e-3), mk(2e-3));
        let probe = |m: &Model| {
            let b = BoundState3 {
                s: 1,
                beta: 1.0,
                b: m.bound_state(1).unwrap().energy + 1.0,
                residual: 0.0,
                norm: 1.0,
                eta_e: Vec::new(),
            };
            eta_e_momentum(m, 0.7, &b).unwrap().norm()
        };
        assert_relative_eq!(probe(&m2) / probe(&m1), 4.0, max_relative = 1e-3);
    }
}
