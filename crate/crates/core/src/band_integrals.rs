//! Band integrals of the two-photon problem: `A_s(eps, eps0)`, `C`, `A` and
//! `I(eps)`.
//!
//! Every integral runs over the band `eps' in [eps_min, eps_max]` and is
//! carried out in the band angle `theta` (`eps' = omega0 - 2J cos theta`),
//! which turns the square-root edge behaviour of `Im G(eps' + i0)` into a
//! smooth integrand. Two independent routes are provided. The Plemelj route
//! subtracts each in-band simple pole and adds back its principal value plus
//! `i pi` times the residue. The regularized route shifts every `+i0` to a
//! finite `+i eta` and Richardson-extrapolates `eta -> 0`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::band_model::{momenta_at_energy, ModelParams};
use crate::error::{Error, Result};
use crate::greens::Model;
use crate::quad::{integrate, QuadTolerance};

/// Which boundary value a simple pole `1/(eps' - p -+ i0)` takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoleSign {
    /// `1/(eps' - p - i0) = PV + i pi delta`.
    Minus,
    /// `1/(eps' - p + i0) = PV - i pi delta`.
    Plus,
}

/// A simple pole of a band integrand: near `location` the integrand behaves
/// as `residue / (eps' - location)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplePole {
    pub location: f64,
    pub residue: Complex64,
    pub sign: PoleSign,
}

/// Evaluation strategy for the `+i0` limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Plemelj,
    EtaExtrapolated,
}

/// Regularization widths of the extrapolated route.
pub const ETA_LADDER: [f64; 3] = [1e-4, 1e-5, 1e-6];

/// `int_{band} f(eps') d eps'` where `f` carries the listed simple poles.
///
/// In-band poles are removed by subtracting `c/(eps' - p)` and restored
/// analytically as `c [ln((eps_max - p)/(p - eps_min)) +- i pi]`. Poles
/// outside the band need no treatment and are ignored. `breaks` are extra
/// energies (kinks, branch points) that become panel boundaries.
pub fn pv_band_integral<F>(
    f: F,
    poles: &[SimplePole],
    breaks: &[f64],
    params: &ModelParams,
    tol: QuadTolerance,
) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    let (lo, hi) = (params.band_min(), params.band_max());
    let edge = params.edge_tolerance();
    let mut inside = Vec::with_capacity(poles.len());
    for pole in poles {
        let p = pole.location;
        if (p - lo).abs() <= edge || (p - hi).abs() <= edge {
            return Err(Error::PoleAtEdge(p));
        }
        if p > lo && p < hi {
            inside.push(*pole);
        }
    }

    let mut theta_breaks = vec![0.0, PI];
    for &x in breaks.iter().chain(inside.iter().map(|p| &p.location)) {
        if x > lo && x < hi {
            theta_breaks.push(params.angle_at_energy(x));
        }
    }

    let two_j = 2.0 * params.hopping;
    let integrand = |theta: f64| {
        let e = params.energy_at_angle(theta);
        let jac = two_j * theta.sin();
        let mut value = f(e) * jac;
        for pole in &inside {
            value -= pole.residue * (jac / (e - pole.location));
        }
        value
    };
    let mut total = integrate(integrand, &theta_breaks, tol)?.value;

    for pole in &inside {
        let p = pole.location;
        let pv = ((hi - p) / (p - lo)).ln();
        let delta = match pole.sign {
            PoleSign::Minus => PI,
            PoleSign::Plus => -PI,
        };
        total += pole.residue * Complex64::new(pv, delta);
    }
    Ok(total)
}

/// Extrapolate `F(eta) -> F(0)` from `F` at the three widths of
/// [`ETA_LADDER`], assuming `F(eta) = F0 + a eta + b eta^2 + ...`.
pub fn eta_extrapolate<F>(f: F) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let a = f(ETA_LADDER[0])?;
    let b = f(ETA_LADDER[1])?;
    let c = f(ETA_LADDER[2])?;
    let r1a = (10.0 * b - a) / 9.0;
    let r1b = (10.0 * c - b) / 9.0;
    Ok((100.0 * r1b - r1a) / 99.0)
}

/// Which weight multiplies the band density in a kernel integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    /// Photon scattering off bound state `s`: weight `(eps' - E_s)`.
    Bound(usize),
    /// Two photons off the ground-state emitter: weight 1.
    Ground,
}

/// Descriptor of a kernel integral
/// `(1/pi) int d eps' G(E - eps' + i0) w(eps') Im G(eps' + i0) / (eps' - (E - eps) - i0)`,
/// the last factor present only when a probe energy is given.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PVIntegrand {
    pub total_energy: f64,
    pub probe_energy: Option<f64>,
    pub channel: Channel,
}

impl PVIntegrand {
    fn weight(&self, model: &Model, x: f64) -> Result<f64> {
        match self.channel {
            Channel::Ground => Ok(1.0),
            Channel::Bound(s) => Ok(x - model.bound_state(s)?.energy),
        }
    }

    fn j_pole(&self) -> Option<f64> {
        self.probe_energy.map(|eps| self.total_energy - eps)
    }

    /// Branch points of `G(E - eps')`, where `E - eps'` meets a band edge.
    fn branch_points(&self, params: &ModelParams) -> [f64; 2] {
        [
            self.total_energy - params.band_min(),
            self.total_energy - params.band_max(),
        ]
    }
}

/// Evaluate a kernel integral by the selected route.
pub fn kernel_integral(model: &Model, spec: &PVIntegrand, route: Route) -> Result<Complex64> {
    match route {
        Route::Plemelj => kernel_plemelj(model, spec),
        Route::EtaExtrapolated => eta_extrapolate(|eta| kernel_eta(model, spec, eta)),
    }
}

fn kernel_plemelj(model: &Model, spec: &PVIntegrand) -> Result<Complex64> {
    let params = &model.params;
    let e = spec.total_energy;
    let jp = spec.j_pole();
    let bound = model.bound_states()?;
    let inv_pi = 1.0 / PI;

    let mut poles = Vec::with_capacity(3);
    if let (Some(p), Some(eps)) = (jp, spec.probe_energy) {
        let c = inv_pi * model.g_plus(eps) * spec.weight(model, p)? * model.im_g_plus(p);
        poles.push(SimplePole {
            location: p,
            residue: c,
            sign: PoleSign::Minus,
        });
    }
    for b in bound {
        let p = e - b.energy;
        let mut c = -b.z * inv_pi * spec.weight(model, p)? * model.im_g_plus(p);
        if let Some(pj) = jp {
            c /= p - pj;
        }
        poles.push(SimplePole {
            location: p,
            residue: Complex64::new(c, 0.0),
            sign: PoleSign::Minus,
        });
    }

    let weight_offset = match spec.channel {
        Channel::Ground => None,
        Channel::Bound(s) => Some(model.bound_state(s)?.energy),
    };
    let f = |x: f64| {
        let w = weight_offset.map_or(1.0, |es| x - es);
        let mut v = model.g_plus(e - x) * (inv_pi * w * model.im_g_plus(x));
        if let Some(pj) = jp {
            v /= x - pj;
        }
        v
    };
    pv_band_integral(f, &poles, &spec.branch_points(params), params, model.quad)
}

fn kernel_eta(model: &Model, spec: &PVIntegrand, eta: f64) -> Result<Complex64> {
    let params = &model.params;
    let e = spec.total_energy;
    let jp = spec.j_pole();
    let bound = model.bound_states()?;
    let (lo, hi) = (params.band_min(), params.band_max());

    let mut breaks = vec![0.0, PI];
    let mut energies: Vec<f64> = spec.branch_points(params).to_vec();
    energies.extend(bound.iter().map(|b| e - b.energy));
    energies.extend(jp);
    for x in energies {
        // Graded breaks resolve the width-eta Lorentzian around each pole.
        for off in [0.0, -1.0, 1.0, -10.0, 10.0, -100.0, 100.0, -1e3, 1e3] {
            let y = x + off * eta;
            if y > lo && y < hi {
                breaks.push(params.angle_at_energy(y));
            }
        }
    }

    let weight_offset = match spec.channel {
        Channel::Ground => None,
        Channel::Bound(s) => Some(model.bound_state(s)?.energy),
    };
    let two_j = 2.0 * params.hopping;
    let integrand = |theta: f64| {
        let x = params.energy_at_angle(theta);
        let jac = two_j * theta.sin();
        let w = weight_offset.map_or(1.0, |es| x - es);
        let g = model.g_complex(Complex64::new(e - x, eta));
        let mut v = g * (w * model.im_g_plus(x) * jac / PI);
        if let Some(pj) = jp {
            v /= Complex64::new(x - pj, -eta);
        }
        v
    };
    // Richardson weights are O(1), so 1e-11 per width keeps the
    // extrapolated value well inside a 1e-8 comparison.
    let tol = QuadTolerance {
        abs: 1e-12,
        rel: 1e-11,
        max_panels: 50_000,
    };
    Ok(integrate(integrand, &breaks, tol)?.value)
}

/// `G(x + i eta)` for the regularized route and `G(x + i0)` for Plemelj.
fn propagator(model: &Model, x: f64, route_eta: Option<f64>) -> Complex64 {
    match route_eta {
        None => model.g_plus(x),
        Some(eta) => model.g_complex(Complex64::new(x, eta)),
    }
}

fn check_threshold(params: &ModelParams, x: f64) -> Result<()> {
    let tol = params.edge_tolerance();
    if (x - params.band_min()).abs() <= tol || (x - params.band_max()).abs() <= tol {
        return Err(Error::ThresholdDegenerate(x));
    }
    Ok(())
}

/// `A_s(eps, eps0)` with `E = E_s + eps0`: the contribution of the other bound
/// state `sbar` plus the band integral with the `J` kernel.
pub fn a_s(model: &Model, eps: f64, eps0: f64, s: usize) -> Result<Complex64> {
    a_s_with(model, eps, eps0, s, Route::Plemelj)
}

pub fn a_s_with(model: &Model, eps: f64, eps0: f64, s: usize, route: Route) -> Result<Complex64> {
    let bs = model.bound_state(s)?;
    let other = model.bound_state(3 - s)?;
    let e = bs.energy + eps0;
    check_threshold(&model.params, e - other.energy)?;
    check_threshold(&model.params, e - bs.energy)?;

    // On the diagonal the J pole sits on E_s and cancels the weight exactly,
    // leaving the pole-free kernel of C(E).
    let spec = if eps == eps0 {
        PVIntegrand {
            total_energy: e,
            probe_energy: None,
            channel: Channel::Ground,
        }
    } else {
        PVIntegrand {
            total_energy: e,
            probe_energy: Some(eps),
            channel: Channel::Bound(s),
        }
    };
    let integral = kernel_integral(model, &spec, route)?;

    let denom = e - other.energy - eps;
    let discrete = |eta: Option<f64>| {
        propagator(model, e - other.energy, eta) * (other.z * (other.energy - bs.energy) / denom)
    };
    let discrete = match route {
        Route::Plemelj => discrete(None),
        Route::EtaExtrapolated => eta_extrapolate(|eta| Ok(discrete(Some(eta))))?,
    };
    let total = discrete + integral;
    if !total.is_finite() {
        return Err(Error::PoleHit(e - other.energy));
    }
    Ok(total)
}

/// `C(E) = (1/pi) int d eps' G(E - eps' + i0) Im G(eps' + i0)`.
pub fn c_fun(model: &Model, e3: f64) -> Result<Complex64> {
    c_fun_with(model, e3, Route::Plemelj)
}

pub fn c_fun_with(model: &Model, e3: f64, route: Route) -> Result<Complex64> {
    let spec = PVIntegrand {
        total_energy: e3,
        probe_energy: None,
        channel: Channel::Ground,
    };
    kernel_integral(model, &spec, route)
}

/// Constants of the two-photon problem at total energy `E3 = eps1 + eps2`.
///
/// `A = C - sum_s Z_s G(E3 - E_s + i0)` is infinite when `E3 - E_s` hits the
/// other bound-state energy, so its reciprocal is stored separately in a form
/// that stays finite there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPhotonConstants {
    pub e3: f64,
    pub c: Complex64,
    pub a: Complex64,
    pub inv_a: Complex64,
    /// `G^{-1}(E3 - E_s + i0)` for `s = 1, 2`.
    pub g_inv: [Complex64; 2],
    /// Common factor `d` with `g_inv = d * g_reduced`. Equals
    /// `E3 - E_1 - E_2` near the pole of `A` and 1 elsewhere.
    pub pole_offset: f64,
    pub g_reduced: [Complex64; 2],
}

/// Distance from `E_1 + E_2` below which the propagators in `A` are expanded
/// about their poles.
const POLE_EXPANSION_WINDOW: f64 = 1e-6;

/// Constants for an incident pair with momenta `k1`, `k2`.
pub fn two_photon_constants(model: &Model, k1: f64, k2: f64) -> Result<TwoPhotonConstants> {
    let p = &model.params;
    let e1 = crate::band_model::dispersion(k1, p);
    let e2 = crate::band_model::dispersion(k2, p);
    momenta_at_energy(e1, p)?;
    momenta_at_energy(e2, p)?;
    two_photon_constants_at(model, e1 + e2)
}

pub fn two_photon_constants_at(model: &Model, e3: f64) -> Result<TwoPhotonConstants> {
    two_photon_constants_with(model, e3, Route::Plemelj)
}

pub fn two_photon_constants_with(
    model: &Model,
    e3: f64,
    route: Route,
) -> Result<TwoPhotonConstants> {
    let bound = model.bound_states()?;
    for b in bound {
        check_threshold(&model.params, e3 - b.energy)?;
    }
    let c = c_fun_with(model, e3, route)?;
    let (z1, z2) = (bound[0].z, bound[1].z);
    let offset = e3 - bound[0].energy - bound[1].energy;
    let near_pole =
        route == Route::Plemelj && offset.abs() < POLE_EXPANSION_WINDOW * model.params.hopping;
    let (pole_offset, h1, h2) = if near_pole {
        // E3 - E_1 = E_2 + d and E3 - E_2 = E_1 + d; expand G^{-1} to second
        // order so that both terms share the exact same offset `d`.
        let reduced = |b: &crate::greens::BoundState1| {
            let s2 = crate::greens::self_energy_second_derivative(b.energy, &model.params);
            Complex64::new(1.0 / b.z - 0.5 * offset * s2, 0.0)
        };
        (offset, reduced(&bound[1]), reduced(&bound[0]))
    } else {
        let g_inv_at = |x: f64| match route {
            Route::Plemelj => Ok(model.inv_g_plus(x)),
            Route::EtaExtrapolated => {
                eta_extrapolate(|eta| Ok(model.g_complex(Complex64::new(x, eta)).inv()))
            }
        };
        (
            1.0,
            g_inv_at(e3 - bound[0].energy)?,
            g_inv_at(e3 - bound[1].energy)?,
        )
    };
    let (g1, g2) = (pole_offset * h1, pole_offset * h2);
    let denominator = c * pole_offset * h1 * h2 - z1 * h2 - z2 * h1;
    let inv_a = pole_offset * h1 * h2 / denominator;
    let a = c - z1 / g1 - z2 / g2;
    Ok(TwoPhotonConstants {
        e3,
        c,
        a,
        inv_a,
        g_inv: [g1, g2],
        pole_offset,
        g_reduced: [h1, h2],
    })
}

/// `I(eps) = sum_s Z_s G(E3 - E_s + i0)/(E3 - E_s - eps) + (1/pi) int ...`.
///
/// Diverges together with `A` when `E3 - E_s` is a bound-state energy; use
/// [`i_over_a`] there.
pub fn i_fun(model: &Model, eps: f64, consts: &TwoPhotonConstants) -> Result<Complex64> {
    i_fun_with(model, eps, consts, Route::Plemelj)
}

pub fn i_fun_with(
    model: &Model,
    eps: f64,
    consts: &TwoPhotonConstants,
    route: Route,
) -> Result<Complex64> {
    let (k, poles) = i_parts(model, eps, consts, route)?;
    let bound = model.bound_states()?;
    let mut total = k;
    for (b, (g_inv, denom)) in bound.iter().zip(consts.g_inv.iter().zip(poles)) {
        total += b.z / (g_inv * denom);
    }
    if !total.is_finite() {
        return Err(Error::PoleHit(consts.e3));
    }
    Ok(total)
}

/// `I(eps) / A`, finite also where `A` and `I` both diverge.
pub fn i_over_a(model: &Model, eps: f64, consts: &TwoPhotonConstants) -> Result<Complex64> {
    let (k, d) = i_parts(model, eps, consts, Route::Plemelj)?;
    let bound = model.bound_states()?;
    let [h1, h2] = consts.g_reduced;
    let s = consts.pole_offset;
    let num = bound[0].z * h2 / d[0] + bound[1].z * h1 / d[1] + k * s * h1 * h2;
    let den = consts.c * s * h1 * h2 - bound[0].z * h2 - bound[1].z * h1;
    Ok(num / den)
}

/// `phi(eps) = 2 I(eps)/A - sum_i 1/(eps - eps_i)` for the incident energies.
pub fn phi_fun(
    model: &Model,
    eps: f64,
    eps_in: [f64; 2],
    consts: &TwoPhotonConstants,
) -> Result<Complex64> {
    let ia = i_over_a(model, eps, consts)?;
    Ok(2.0 * ia - 1.0 / (eps - eps_in[0]) - 1.0 / (eps - eps_in[1]))
}

/// Band-integral part of `I(eps)` and the two discrete denominators.
fn i_parts(
    model: &Model,
    eps: f64,
    consts: &TwoPhotonConstants,
    route: Route,
) -> Result<(Complex64, [f64; 2])> {
    let bound = model.bound_states()?;
    let spec = PVIntegrand {
        total_energy: consts.e3,
        probe_energy: Some(eps),
        channel: Channel::Ground,
    };
    let k = kernel_integral(model, &spec, route)?;
    let d = [
        consts.e3 - bound[0].energy - eps,
        consts.e3 - bound[1].energy - eps,
    ];
    Ok((k, d))
}
