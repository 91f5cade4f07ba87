//! Photon self-energy, the dressed emitter propagator and the two
//! single-photon bound states that sit outside the band.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::band_model::{dispersion, ModelParams};
use crate::error::{Error, Result};
use crate::quad::{integrate, QuadTolerance};
use crate::roots::brent;

/// `|G^{-1}|` below `POLE_TOLERANCE * J` counts as sitting on a pole.
pub const POLE_TOLERANCE: f64 = 1e-10;

/// A point in the complex energy plane. `im == 0` means the boundary value
/// approached from the upper half plane (the `+i0` prescription).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexEnergy {
    pub re: f64,
    pub im: f64,
}

impl ComplexEnergy {
    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    /// Boundary value `x + i0`.
    pub fn plus(re: f64) -> Self {
        Self { re, im: 0.0 }
    }

    pub fn boundary(&self) -> bool {
        self.im == 0.0
    }

    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Single-photon bound state `s` with energy `E_s` and residue `Z_s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundState1 {
    pub s: usize,
    pub energy: f64,
    pub z: f64,
}

/// Self-energy on the real axis outside the band, written in terms of the
/// distance to the nearer edge so that near-edge values keep full precision.
fn sigma_outside(dist: f64, above: bool, p: &ModelParams) -> f64 {
    let v2 = p.coupling * p.coupling;
    let mag = v2 / (dist * (dist + 4.0 * p.hopping)).sqrt();
    if above {
        mag
    } else {
        -mag
    }
}

/// Retarded self-energy `Sigma(w)`.
pub fn self_energy(w: ComplexEnergy, params: &ModelParams) -> Result<Complex64> {
    let v2 = params.coupling * params.coupling;
    if w.boundary() {
        let x = w.re;
        let (lo, hi) = (params.band_min(), params.band_max());
        let tol = params.edge_tolerance();
        if (x - lo).abs() <= tol || (x - hi).abs() <= tol {
            return Err(Error::BandEdgeSingularity(x));
        }
        if x < lo {
            return Ok(Complex64::new(sigma_outside(lo - x, false, params), 0.0));
        }
        if x > hi {
            return Ok(Complex64::new(sigma_outside(x - hi, true, params), 0.0));
        }
        return Ok(Complex64::new(0.0, -v2 / ((x - lo) * (hi - x)).sqrt()));
    }
    Ok(sigma_complex(w.as_complex(), params))
}

/// Analytic self-energy off the real axis. Principal square roots put the
/// cut on the band and satisfy `Sigma(conj z) = conj Sigma(z)`.
pub fn sigma_complex(z: Complex64, params: &ModelParams) -> Complex64 {
    let v2 = params.coupling * params.coupling;
    let a = (z - params.band_max()).sqrt();
    let b = (z - params.band_min()).sqrt();
    v2 / (a * b)
}

/// Inverse propagator `w - Omega - Sigma(w)`.
pub fn inverse_greens(w: ComplexEnergy, params: &ModelParams) -> Result<Complex64> {
    Ok(w.as_complex() - params.omega_tls - self_energy(w, params)?)
}

/// Dressed propagator `G(w) = [w - Omega - Sigma(w)]^{-1}`.
pub fn greens_fn(w: ComplexEnergy, params: &ModelParams) -> Result<Complex64> {
    let inv = inverse_greens(w, params)?;
    if inv.norm() < POLE_TOLERANCE * params.hopping {
        return Err(Error::PoleHit(w.re));
    }
    Ok(inv.inv())
}

/// `d Sigma / d w` on the real axis outside the band.
pub fn self_energy_derivative(x: f64, params: &ModelParams) -> f64 {
    let v2 = params.coupling * params.coupling;
    let d = (x - params.omega0).abs();
    let two_j = 2.0 * params.hopping;
    let q = (d - two_j) * (d + two_j);
    -v2 * d / (q * q.sqrt())
}

/// `d^2 Sigma / d w^2` on the real axis outside the band.
pub fn self_energy_second_derivative(x: f64, params: &ModelParams) -> f64 {
    let v2 = params.coupling * params.coupling;
    let d = x - params.omega0;
    let two_j = 2.0 * params.hopping;
    let q = (d.abs() - two_j) * (d.abs() + two_j);
    d.signum() * v2 * (2.0 * d * d + two_j * two_j) / (q * q * q.sqrt())
}

/// Residue from the derivative form `Z = 1 / (1 - Sigma'(E))`.
pub fn residue(energy: f64, params: &ModelParams) -> f64 {
    1.0 / (1.0 - self_energy_derivative(energy, params))
}

/// Residue from the defining momentum integral
/// `Z^{-1} = 1 + V^2/(2 pi) * int dk (E - eps_k)^{-2}`.
pub fn residue_by_quadrature(energy: f64, params: &ModelParams) -> Result<f64> {
    let r = integrate(
        |k| {
            let d = energy - dispersion(k, params);
            Complex64::new(1.0 / (d * d), 0.0)
        },
        &[-PI, 0.0, PI],
        QuadTolerance::new(1e-14, 1e-13),
    )?;
    let v2 = params.coupling * params.coupling;
    Ok(1.0 / (1.0 + v2 * r.value.re / (2.0 * PI)))
}

/// Self-energy from direct quadrature of `V^2/(2 pi) int dk (w - eps_k)^{-1}`
/// at `Im w > 0`. Used to validate the closed form.
pub fn self_energy_by_quadrature(w: Complex64, params: &ModelParams) -> Result<Complex64> {
    let v2 = params.coupling * params.coupling;
    let mut breaks = vec![-PI, 0.0, PI];
    let theta = params.angle_at_energy(w.re);
    breaks.extend([theta, -theta]);
    let r = integrate(
        |k| (w - dispersion(k, params)).inv(),
        &breaks,
        QuadTolerance {
            abs: 1e-13,
            rel: 1e-12,
            max_panels: 50_000,
        },
    )?;
    Ok(v2 * r.value / (2.0 * PI))
}

/// Both roots of `G^{-1}(E) = 0` on the real axis, `E_1` below the band and
/// `E_2` above it, with their residues.
pub fn solve_single_bound_states(params: &ModelParams) -> Result<(BoundState1, BoundState1)> {
    if params.coupling <= 0.0 {
        return Err(Error::InvalidParams(
            "bound states need a nonzero coupling".to_string(),
        ));
    }
    let lo = params.band_min();
    let hi = params.band_max();
    // In terms of the distance `d` to the edge, the inverse propagator runs
    // from -inf (d -> 0) to +inf (d -> inf) above the band, and mirrored below.
    let below = |d: f64| -((lo - d) - params.omega_tls - sigma_outside(d, false, params));
    let above = |d: f64| (hi + d) - params.omega_tls - sigma_outside(d, true, params);
    let d1 = edge_root(below, params)?;
    let d2 = edge_root(above, params)?;
    let e1 = lo - d1;
    let e2 = hi + d2;
    Ok((
        BoundState1 {
            s: 1,
            energy: e1,
            z: residue(e1, params),
        },
        BoundState1 {
            s: 2,
            energy: e2,
            z: residue(e2, params),
        },
    ))
}

/// Root in the edge distance of a function that is negative next to the edge
/// and positive far away.
fn edge_root<F: Fn(f64) -> f64>(f: F, params: &ModelParams) -> Result<f64> {
    let scale = params.hopping.max(params.coupling).max(1.0);
    let near = f64::MIN_POSITIVE;
    let mut far = scale;
    let limit = 1e12 * scale;
    while f(far) <= 0.0 {
        far *= 2.0;
        if far > limit {
            return Err(Error::RootNotBracketed { lo: near, hi: far });
        }
    }
    if f(near) >= 0.0 {
        return Err(Error::RootNotBracketed { lo: near, hi: far });
    }
    // Work in log-distance so that extremely shallow bound states are
    // resolved to full relative precision.
    let t = brent(|t: f64| f(t.exp()), near.ln(), far.ln(), 1e-15)?;
    let d = t.exp();
    // Polish in linear distance.
    let lo = d * (1.0 - 1e-12);
    let hi = d * (1.0 + 1e-12);
    if f(lo) < 0.0 && f(hi) > 0.0 {
        brent(&f, lo, hi, d * 1e-16)
    } else {
        Ok(d)
    }
}

/// Model parameters together with the cached bound states; the object that
/// every scattering formula is evaluated against.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub params: ModelParams,
    pub bound: Option<[BoundState1; 2]>,
    pub quad: QuadTolerance,
}

impl Model {
    pub fn new(params: ModelParams) -> Result<Self> {
        params.validate()?;
        let bound = if params.coupling > 0.0 {
            let (b1, b2) = solve_single_bound_states(&params)?;
            Some([b1, b2])
        } else {
            None
        };
        Ok(Self {
            params,
            bound,
            quad: QuadTolerance::default(),
        })
    }

    pub fn with_tolerance(mut self, quad: QuadTolerance) -> Self {
        self.quad = quad;
        self
    }

    pub fn bound_state(&self, s: usize) -> Result<BoundState1> {
        if s != 1 && s != 2 {
            return Err(Error::InvalidParams(format!(
                "bound-state index must be 1 or 2, got {s}"
            )));
        }
        self.bound
            .map(|b| b[s - 1])
            .ok_or_else(|| Error::InvalidParams("no bound states at zero coupling".to_string()))
    }

    pub fn bound_states(&self) -> Result<[BoundState1; 2]> {
        self.bound
            .ok_or_else(|| Error::InvalidParams("no bound states at zero coupling".to_string()))
    }

    /// `G^{-1}(x + i0)` on the real axis without edge checks. Band edges map
    /// to the limiting value `x - Omega` since `|Sigma| -> inf` there only
    /// as an integrable singularity of `G`, which itself tends to zero.
    pub fn inv_g_plus(&self, x: f64) -> Complex64 {
        let p = &self.params;
        let (lo, hi) = (p.band_min(), p.band_max());
        let v2 = p.coupling * p.coupling;
        let base = x - p.omega_tls;
        if x < lo {
            Complex64::new(base - sigma_outside(lo - x, false, p), 0.0)
        } else if x > hi {
            Complex64::new(base - sigma_outside(x - hi, true, p), 0.0)
        } else {
            let q = (x - lo) * (hi - x);
            if q == 0.0 {
                Complex64::new(f64::INFINITY, 0.0)
            } else {
                Complex64::new(base, v2 / q.sqrt())
            }
        }
    }

    /// `G(x + i0)` with no pole or edge checks; `0` at band edges and
    /// non-finite only exactly on `E_s`.
    pub fn g_plus(&self, x: f64) -> Complex64 {
        let inv = self.inv_g_plus(x);
        if inv.re.is_infinite() {
            Complex64::new(0.0, 0.0)
        } else {
            inv.inv()
        }
    }

    /// `Im G(x + i0)` on the band, written with the half-width
    /// `Gamma = V^2 / v(x)` as `-Gamma / ((x - Omega)^2 + Gamma^2)`, which
    /// stays accurate right up to the edges.
    pub fn im_g_plus(&self, x: f64) -> f64 {
        let p = &self.params;
        let v = p.group_velocity(x);
        if v == 0.0 {
            return 0.0;
        }
        let v2 = p.coupling * p.coupling;
        let d = x - p.omega_tls;
        -v2 * v / (d * d * v * v + v2 * v2)
    }

    /// `G(z)` at a general complex point on the physical sheet.
    pub fn g_complex(&self, z: Complex64) -> Complex64 {
        if z.im == 0.0 {
            return self.g_plus(z.re);
        }
        (z - self.params.omega_tls - sigma_complex(z, &self.params)).inv()
    }
}
