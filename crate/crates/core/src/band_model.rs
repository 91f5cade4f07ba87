//! Photon band of the coupled-resonator array: cosine dispersion, band edges,
//! and the inversion from energy to the two on-shell momenta.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Energies closer than `EDGE_TOLERANCE * J` to a band edge are classified as
/// edge energies.
pub const EDGE_TOLERANCE: f64 = 1e-9;

/// Physical constants of the hybrid system, in units where the inter-cavity
/// distance and hbar are 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Cavity eigenfrequency (band center).
    pub omega0: f64,
    /// Inter-cavity hopping J.
    pub hopping: f64,
    /// Emitter–photon coupling V.
    pub coupling: f64,
    /// Emitter level spacing.
    pub omega_tls: f64,
}

impl ModelParams {
    pub fn new(omega0: f64, hopping: f64, coupling: f64, omega_tls: f64) -> Result<Self> {
        let p = Self {
            omega0,
            hopping,
            coupling,
            omega_tls,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hopping > 0.0 && self.hopping.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "hopping J must be positive and finite, got {}",
                self.hopping
            )));
        }
        if !(self.coupling >= 0.0 && self.coupling.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "coupling V must be non-negative and finite, got {}",
                self.coupling
            )));
        }
        if !self.omega0.is_finite() || !self.omega_tls.is_finite() {
            return Err(Error::InvalidParams(
                "omega0 and omega_tls must be finite".to_string(),
            ));
        }
        Ok(())
    }

    pub fn band_min(&self) -> f64 {
        self.omega0 - 2.0 * self.hopping
    }

    pub fn band_max(&self) -> f64 {
        self.omega0 + 2.0 * self.hopping
    }

    pub fn edge_tolerance(&self) -> f64 {
        EDGE_TOLERANCE * self.hopping
    }

    /// Group velocity magnitude `|d eps / dk|` at energy `eps`, zero outside
    /// the band.
    pub fn group_velocity(&self, eps: f64) -> f64 {
        let d = eps - self.omega0;
        let four_j2 = 4.0 * self.hopping * self.hopping;
        if d * d >= four_j2 {
            0.0
        } else {
            (four_j2 - d * d).sqrt()
        }
    }

    /// Energy at band angle `theta in [0, pi]`, `eps = omega0 - 2J cos(theta)`.
    pub fn energy_at_angle(&self, theta: f64) -> f64 {
        self.omega0 - 2.0 * self.hopping * theta.cos()
    }

    /// Inverse of [`Self::energy_at_angle`], clamped to `[0, pi]`.
    pub fn angle_at_energy(&self, eps: f64) -> f64 {
        ((self.omega0 - eps) / (2.0 * self.hopping))
            .clamp(-1.0, 1.0)
            .acos()
    }

    pub fn classify(&self, value: f64) -> BandEnergy {
        let tol = self.edge_tolerance();
        let (lo, hi) = (self.band_min(), self.band_max());
        let classification = if (value - lo).abs() <= tol || (value - hi).abs() <= tol {
            EnergyClass::AtEdge
        } else if value < lo {
            EnergyClass::BelowBand
        } else if value > hi {
            EnergyClass::AboveBand
        } else {
            EnergyClass::InBand
        };
        BandEnergy {
            value,
            classification,
        }
    }

    /// True for energies strictly inside the band, away from the edges.
    pub fn in_band(&self, eps: f64) -> bool {
        self.classify(eps).classification == EnergyClass::InBand
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyClass {
    BelowBand,
    InBand,
    AboveBand,
    AtEdge,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandEnergy {
    pub value: f64,
    pub classification: EnergyClass,
}

/// The on-shell momenta `{+k, -k}` for an energy, with the shell Jacobian
/// `2J|sin k|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellMomenta {
    /// Non-negative momentum `k in [0, pi]`.
    pub k: f64,
    pub jacobian: f64,
    /// Set when the energy lies on a band edge (single momentum, zero Jacobian).
    pub at_edge: bool,
}

impl ShellMomenta {
    pub fn momenta(&self) -> Vec<f64> {
        if self.at_edge || self.k == 0.0 || self.k == PI {
            vec![self.k]
        } else {
            vec![self.k, -self.k]
        }
    }
}

/// `eps_k = omega0 - 2J cos k`.
pub fn dispersion(k: f64, params: &ModelParams) -> f64 {
    params.omega0 - 2.0 * params.hopping * k.cos()
}

pub fn band_edges(params: &ModelParams) -> (f64, f64) {
    (params.band_min(), params.band_max())
}

pub fn momenta_at_energy(eps: f64, params: &ModelParams) -> Result<ShellMomenta> {
    let class = params.classify(eps).classification;
    match class {
        EnergyClass::BelowBand | EnergyClass::AboveBand => Err(Error::EnergyOutsideBand {
            energy: eps,
            band_min: params.band_min(),
            band_max: params.band_max(),
        }),
        EnergyClass::AtEdge => {
            let k = if eps < params.omega0 { 0.0 } else { PI };
            Ok(ShellMomenta {
                k,
                jacobian: 0.0,
                at_edge: true,
            })
        }
        EnergyClass::InBand => {
            let k = params.angle_at_energy(eps);
            Ok(ShellMomenta {
                k,
                jacobian: 2.0 * params.hopping * k.sin().abs(),
                at_edge: false,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn reference() -> ModelParams {
        ModelParams::new(4.0, 1.0, 1.0, 2.5).unwrap()
    }

    #[test]
    fn dispersion_band_points() {
        let p = reference();
        assert_relative_eq!(dispersion(0.0, &p), 2.0);
        assert_relative_eq!(dispersion(PI / 2.0, &p), 4.0, epsilon = 1e-15);
        assert_relative_eq!(dispersion(PI, &p), 6.0);
    }

    #[test]
    fn edges() {
        assert_eq!(band_edges(&reference()), (2.0, 6.0));
        assert_eq!(
            band_edges(&ModelParams::new(0.0, 1.0, 1.0, 0.0).unwrap()),
            (-2.0, 2.0)
        );
        assert_eq!(
            band_edges(&ModelParams::new(4.0, 0.5, 1.0, 0.0).unwrap()),
            (3.0, 5.0)
        );
    }

    #[test]
    fn inversion_examples() {
        let p = reference();
        let c = momenta_at_energy(4.0, &p).unwrap();
        assert_relative_eq!(c.k, PI / 2.0, epsilon = 1e-15);
        assert_relative_eq!(c.jacobian, 2.0, epsilon = 1e-15);
        assert_eq!(c.momenta().len(), 2);

        let edge = momenta_at_energy(2.0, &p).unwrap();
        assert!(edge.at_edge);
        assert_eq!(edge.jacobian, 0.0);
        assert_eq!(edge.momenta(), vec![0.0]);

        let s = momenta_at_energy(4.65, &p).unwrap();
        assert_relative_eq!(s.k, (-0.325f64).acos(), epsilon = 1e-15);
        assert_relative_eq!(
            s.jacobian,
            2.0 * (1.0 - 0.325f64 * 0.325).sqrt(),
            epsilon = 1e-14
        );
        assert_relative_eq!(dispersion(s.k, &p), 4.65, epsilon = 1e-14);
    }

    #[test]
    fn outside_band_is_rejected() {
        let p = reference();
        assert!(matches!(
            momenta_at_energy(6.5, &p),
            Err(Error::EnergyOutsideBand { .. })
        ));
        assert!(momenta_at_energy(2.0 - 1e-12, &p).unwrap().at_edge);
    }

    #[test]
    fn invalid_params() {
        assert!(ModelParams::new(4.0, 0.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(4.0, 1.0, -1.0, 1.0).is_err());
        assert!(ModelParams::new(f64::NAN, 1.0, 1.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn dispersion_is_even(k in -PI..PI, w0 in -5.0..5.0f64, j in 0.1..3.0f64) {
            let p = ModelParams::new(w0, j, 1.0, 0.0).unwrap();
            prop_assert_eq!(dispersion(-k, &p), dispersion(k, &p));
        }

        #[test]
        fn inversion_round_trips(frac in 0.001..0.999f64, w0 in -5.0..5.0f64, j in 0.1..3.0f64) {
            let p = ModelParams::new(w0, j, 1.0, 0.0).unwrap();
            let eps = p.band_min() + frac * 4.0 * j;
            let m = momenta_at_energy(eps, &p).unwrap();
            for k in m.momenta() {
                let back = dispersion(k, &p);
                prop_assert!((back - eps).abs() <= 1e-12 * eps.abs().max(j));
            }
            let dedk = 2.0 * j * m.k.sin();
            prop_assert!((m.jacobian - dedk).abs() <= 1e-12 * j);
            prop_assert!((m.jacobian - p.group_velocity(eps)).abs() <= 1e-12 * j);
        }
    }
}
