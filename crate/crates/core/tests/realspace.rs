//! Coordinate-space fields on the reference parameter sets.

use cra_photon::bound3::solve_beta;
use cra_photon::realspace::{
    bound3_realspace, breakup_wavefunction, Correlation, GridSpec, DEFAULT_SHELL_NODES,
};
use cra_photon::smatrix::single_photon_rt_at_energy;
use cra_photon::{Model, ModelParams};

fn model(v: f64, om: f64) -> Model {
    Model::new(ModelParams::new(4.0, 1.0, v, om).unwrap()).unwrap()
}

#[test]
fn breakup_photons_sit_around_the_emitter() {
    let m = model(1.0, 2.5);
    let spec = GridSpec::new(-30.0, 30.0, 61).unwrap();
    let f = breakup_wavefunction(&m, 4.65, 1, spec).unwrap();
    assert!(f.channel_open);
    assert!(f.nodes >= DEFAULT_SHELL_NODES);
    assert!(f.grid.max_asymmetry() <= 1e-12 * f.grid.max_abs());
    let sq = f.grid.intensity();
    let (imax, _) = sq
        .iter()
        .enumerate()
        .fold((0, 0.0), |a, (i, &v)| if v > a.1 { (i, v) } else { a });
    let (x1, x2) = (f.grid.coordinate(imax / 61), f.grid.coordinate(imax % 61));
    assert!(x1.abs() <= 3.0 && x2.abs() <= 3.0, "peak at ({x1}, {x2})");
}

#[test]
fn decoupled_correlation_depends_on_relative_coordinate_only() {
    let m = model(0.0, 4.0);
    let c = Correlation::new(&m, 3.0, 5.0).unwrap();
    let x_r: Vec<f64> = (0..41).map(|i| -10.0 + 0.5 * i as f64).collect();
    let a = c.slice(0.0, &x_r).unwrap();
    let b = c.slice(2.7, &x_r).unwrap();
    // Scale by the slice maximum: G has exact interference zeros.
    let peak = a.iter().copied().fold(0.0, f64::max);
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() <= 1e-12 * peak);
    }
}

#[test]
fn factorized_part_carries_single_photon_transmission() {
    // Project the factorized part on e^{i(k1 x1 + k2 x2)} over one period
    // of each phase: the coefficient is t1 t2 / (2 pi).
    let m = model(1.0, 4.0);
    let p = m.params;
    let (e1, e2) = (3.0, 5.0);
    let c = Correlation::new(&m, e1, e2).unwrap();
    let (k1, k2) = (p.angle_at_energy(e1), p.angle_at_energy(e2));
    let (t1, _) = single_photon_rt_at_energy(e1, &p).unwrap();
    let (t2, _) = single_photon_rt_at_energy(e2, &p).unwrap();
    // k1 = pi/3 and k2 = 2 pi/3 here, so six lattice sites cover full periods.
    let mut acc = num_complex::Complex64::new(0.0, 0.0);
    for a in 0..6 {
        for b in 0..6 {
            let (x1, x2) = (40.0 + a as f64, 90.0 + b as f64);
            let phase = num_complex::Complex64::from_polar(1.0, -(k1 * x1 + k2 * x2));
            acc += c.factorized_at(x1, x2).unwrap() * phase;
        }
    }
    acc /= 36.0;
    let want = t1 * t2 / (2.0 * std::f64::consts::PI);
    assert!(
        (acc - want).norm() <= 1e-8 * want.norm().max(1e-3),
        "{acc} vs {want}"
    );
}

#[test]
fn three_body_profiles_decay_and_are_symmetric() {
    let m = model(2.0, 3.0);
    for s in [1, 2] {
        let b = solve_beta(&m, s).unwrap();
        let p = bound3_realspace(&m, &b, GridSpec::default()).unwrap();
        assert!(p.eta2.max_asymmetry() <= 1e-12 * p.eta2.max_abs());
        let sq = p.eta_e_sq();
        let c = sq.len() / 2;
        assert!(sq[c + 10] < sq[c + 1] && sq[c - 10] < sq[c - 1]);
    }
}
