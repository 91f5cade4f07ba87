//! Plemelj-split and eta-extrapolated band integrals on random parameters.

use cra_photon::band_integrals::{
    a_s_with, c_fun_with, i_fun_with, two_photon_constants_with, Route,
};
use cra_photon::{Model, ModelParams};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Interior energy of the band, kept `margin * J` away from both edges.
fn interior(rng: &mut ChaCha8Rng, p: &ModelParams, margin: f64) -> f64 {
    let m = margin * p.hopping;
    rng.random_range(p.band_min() + m..p.band_max() - m)
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(1.0)
}

#[test]
fn routes_agree_on_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(20261016);
    let mut checked = 0;
    while checked < 100 {
        let j = rng.random_range(0.5..1.5);
        let p = ModelParams::new(
            rng.random_range(2.0..6.0),
            j,
            rng.random_range(0.4..1.5) * j,
            0.0,
        )
        .unwrap();
        let p = ModelParams::new(
            p.omega0,
            j,
            p.coupling,
            p.omega0 + rng.random_range(-2.5..2.5) * j,
        )
        .unwrap();
        let model = Model::new(p).unwrap();
        let e = model.bound_states().unwrap();
        let s = rng.random_range(1..=2);
        let eps0 = interior(&mut rng, &p, 0.2);
        let eps = interior(&mut rng, &p, 0.2);
        let (e1, e2) = (interior(&mut rng, &p, 0.2), interior(&mut rng, &p, 0.2));
        let e3 = e1 + e2;
        // Skip draws near the thresholds where the kernels have edge
        // singularities or where A has its pole.
        let es = e[s - 1].energy + eps0;
        let near_edge =
            |x: f64| (x - p.band_min()).abs() < 0.05 * j || (x - p.band_max()).abs() < 0.05 * j;
        if near_edge(es - e[0].energy)
            || near_edge(es - e[1].energy)
            || near_edge(e3 - e[0].energy)
            || near_edge(e3 - e[1].energy)
            || (e3 - e[0].energy - e[1].energy).abs() < 0.05 * j
            || near_edge(es - eps)
            || near_edge(e3 - eps)
            || (es - e[2 - s].energy - eps).abs() < 0.05 * j
        {
            continue;
        }
        let a1 = a_s_with(&model, eps, eps0, s, Route::Plemelj).unwrap();
        let a2 = a_s_with(&model, eps, eps0, s, Route::EtaExtrapolated).unwrap();
        assert!(
            close(a1, a2, 1e-8),
            "A_s {p:?} eps={eps} eps0={eps0}: {a1} vs {a2}"
        );
        let c1 = c_fun_with(&model, e3, Route::Plemelj).unwrap();
        let c2 = c_fun_with(&model, e3, Route::EtaExtrapolated).unwrap();
        assert!(close(c1, c2, 1e-8), "C {p:?} e3={e3}: {c1} vs {c2}");
        let k1 = two_photon_constants_with(&model, e3, Route::Plemelj).unwrap();
        let k2 = two_photon_constants_with(&model, e3, Route::EtaExtrapolated).unwrap();
        let i1 = i_fun_with(&model, eps, &k1, Route::Plemelj).unwrap();
        let i2 = i_fun_with(&model, eps, &k2, Route::EtaExtrapolated).unwrap();
        assert!(
            close(i1, i2, 1e-8),
            "I {p:?} e3={e3} eps={eps}: {i1} vs {i2}"
        );
        checked += 1;
    }
}
