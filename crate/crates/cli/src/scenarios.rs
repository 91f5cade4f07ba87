//! Scenario drivers. Each one turns a config into named tables; [`run_scenario`]
//! writes them together with `metadata.json`.

use std::path::{Path, PathBuf};

use cra_photon::band_integrals::{
    a_s_with, c_fun_with, i_fun_with, two_photon_constants_with, Route, ETA_LADDER,
};
use cra_photon::bound3::{solve_beta, BoundState3, MOMENTUM_GRID};
use cra_photon::lattice_oracle::{discrete_spectrum, Sector};
use cra_photon::realspace::{
    bound3_realspace, breakup_wavefunction, Correlation, Grid2D, DEFAULT_SHELL_NODES,
    SHELL_CONVERGENCE,
};
use cra_photon::smatrix::{bound_channel_rt_at_energy, SHELL_MEASURE};
use cra_photon::{Model, ModelParams};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{ScenarioConfig, ScenarioKind};
use crate::error::{CliError, CliResult, Context};
use crate::output::{emit_csv, fmt_f64, write_metadata, Metadata, OutputFile, Table, Tolerances};

pub const DEFAULT_SWEEP_POINTS: usize = 200;
pub const DEFAULT_CHAIN_SITES: usize = 400;
pub const DEFAULT_ROUTE_SAMPLES: usize = 100;
const DEFAULT_X_R_MAX: f64 = 20.0;
const DEFAULT_X_R_POINTS: usize = 401;

pub type NamedTables = Vec<(String, Table)>;

/// Run `kind` and write its CSV files and `metadata.json` into `out`.
/// Returns the written paths, metadata last.
pub fn run_scenario(
    kind: ScenarioKind,
    config: &ScenarioConfig,
    out: &Path,
) -> CliResult<Vec<PathBuf>> {
    config.check_scenario(kind)?;
    let tables = build_tables(kind, config)?;
    std::fs::create_dir_all(out)?;
    let hash = config.hash();
    let mut written = Vec::with_capacity(tables.len() + 1);
    let mut outputs = Vec::with_capacity(tables.len());
    for (name, table) in &tables {
        let path = out.join(name);
        emit_csv(&path, table)?;
        log::info!("wrote {}", path.display());
        outputs.push(OutputFile {
            file: name.clone(),
            config_sha256: hash.clone(),
        });
        written.push(path);
    }
    let quad = config.quad_tolerance();
    let meta = Metadata {
        scenario: kind.name().to_string(),
        cli_version: env!("CARGO_PKG_VERSION").to_string(),
        core_version: cra_photon::VERSION.to_string(),
        config_sha256: hash,
        config,
        tolerances: Tolerances {
            quad_abs: quad.abs,
            quad_rel: quad.rel,
            quad_max_panels: quad.max_panels,
            eta_ladder: ETA_LADDER,
            shell_nodes: DEFAULT_SHELL_NODES,
            shell_convergence: SHELL_CONVERGENCE,
            shell_measure: SHELL_MEASURE,
            momentum_grid: MOMENTUM_GRID,
        },
        outputs,
    };
    let meta_path = out.join("metadata.json");
    write_metadata(&meta_path, &meta)?;
    written.push(meta_path);
    Ok(written)
}

/// Run `f` on a pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match threads {
        Some(n) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()?
            .install(f)),
        None => Ok(f()),
    }
}

pub fn build_tables(kind: ScenarioKind, config: &ScenarioConfig) -> CliResult<NamedTables> {
    match kind {
        ScenarioKind::BoundStates => bound_states(config),
        ScenarioKind::BoundRtSweep => bound_rt_sweep(config),
        ScenarioKind::BreakupMap => breakup_map(config),
        ScenarioKind::TwoPhotonCorr => two_photon_corr(config),
        ScenarioKind::ThreeBody => three_body(config),
        ScenarioKind::OracleCheck => oracle_check(config),
    }
}

fn require_coupling(model: &Model) -> CliResult<()> {
    if model.bound.is_none() {
        return Err(CliError::ConfigInvalid {
            field: "coupling".into(),
            message: "this scenario needs V > 0".into(),
        });
    }
    Ok(())
}

pub fn bound_states(config: &ScenarioConfig) -> CliResult<NamedTables> {
    let model = config.model()?;
    require_coupling(&model)?;
    let mut t = Table::new(&["s", "energy", "residue"]);
    for b in model.bound_states().context(|| "bound states".into())? {
        t.push(vec![b.s.to_string(), fmt_f64(b.energy), fmt_f64(b.z)]);
    }
    Ok(vec![("bound_states.csv".into(), t)])
}

/// Incident energies of a sweep: cell midpoints of `[lo, hi]`, which keeps
/// the band edges themselves out of the sweep.
pub fn sweep_energies(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / points as f64)
        .collect()
}

pub fn bound_rt_sweep(config: &ScenarioConfig) -> CliResult<NamedTables> {
    let model = config.model()?;
    require_coupling(&model)?;
    let s = config.bound_index()?;
    let p = &model.params;
    let lo = config.eps0_min.unwrap_or(p.band_min());
    let hi = config.eps0_max.unwrap_or(p.band_max());
    if !(lo >= p.band_min() && hi <= p.band_max() && lo < hi) {
        return Err(CliError::ConfigInvalid {
            field: "eps0_min".into(),
            message: format!("sweep range [{lo}, {hi}] must lie inside the band"),
        });
    }
    let energies = sweep_energies(lo, hi, config.points.unwrap_or(DEFAULT_SWEEP_POINTS));
    let rows: Vec<[f64; 4]> = energies
        .par_iter()
        .map(|&eps0| {
            let (t, r) = bound_channel_rt_at_energy(&model, eps0, s)
                .context(|| format!("bound channel s={s} at eps0={eps0}"))?;
            let (rp, tp) = (r.norm_sqr(), t.norm_sqr());
            Ok([eps0, rp, tp, rp + tp])
        })
        .collect::<CliResult<_>>()?;
    let mut t = Table::new(&["eps0", "refl_prob", "trans_prob", "total_prob"]);
    for row in rows {
        t.push_f64(&row);
    }
    Ok(vec![("bound_rt_sweep.csv".into(), t)])
}

fn grid_table(grid: &Grid2D, header: &[&str; 5]) -> Table {
    let mut t = Table::new(header);
    for i in 0..grid.n {
        for j in 0..grid.n {
            let v = grid.get(i, j);
            t.push_f64(&[
                grid.coordinate(i),
                grid.coordinate(j),
                v.re,
                v.im,
                v.norm_sqr(),
            ]);
        }
    }
    t
}

pub fn breakup_map(config: &ScenarioConfig) -> CliResult<NamedTables> {
    let model = config.model()?;
    require_coupling(&model)?;
    let s = config.bound_index()?;
    let eps0 = config.in_band("eps0", config.eps0)?;
    let field = breakup_wavefunction(&model, eps0, s, config.grid()?)
        .context(|| format!("breakup channel s={s} at eps0={eps0}"))?;
    if !field.channel_open {
        log::warn!("breakup channel s={s} is closed at eps0={eps0}; writing the zero field");
    }
    let t = grid_table(&field.grid, &["x1", "x2", "re_phi", "im_phi", "phi_sq"]);
    Ok(vec![("breakup_map.csv".into(), t)])
}

pub fn two_photon_corr(config: &ScenarioConfig) -> CliResult<NamedTables> {
    let model = config.model()?;
    let eps1 = config.in_band("eps1", config.eps1)?;
    let eps2 = config.in_band("eps2", config.eps2)?;
    let corr = Correlation::new(&model, eps1, eps2)
        .context(|| format!("two-photon elastic channel at eps1={eps1}, eps2={eps2}"))?;
    let grid = corr
        .grid(config.grid()?)
        .context(|| "two-photon grid".into())?;
    let mut tables = vec![(
        "two_photon_corr.csv".to_string(),
        grid_table(&grid, &["x1", "x2", "re_g", "im_g", "G"]),
    )];

    let x_r_max = config.x_r_max.unwrap_or(DEFAULT_X_R_MAX);
    let n = config.x_r_points.unwrap_or(DEFAULT_X_R_POINTS).max(2);
    let x_r: Vec<f64> = (0..n)
        .map(|i| -x_r_max + 2.0 * x_r_max * i as f64 / (n - 1) as f64)
        .collect();
    let mut slices = Table::new(&["x_c", "x_r", "G"]);
    for &x_c in config.x_c.as_deref().unwrap_or(&[0.0]) {
        let g = corr
            .slice(x_c, &x_r)
            .context(|| format!("correlation slice x_c={x_c}"))?;
        for (&r, &v) in x_r.iter().zip(&g) {
            slices.push_f64(&[x_c, r, v]);
        }
    }
    tables.push(("two_photon_slices.csv".into(), slices));
    Ok(tables)
}

pub fn three_body_states(model: &Model) -> CliResult<[BoundState3; 2]> {
    let (b1, b2) = rayon::join(|| solve_beta(model, 1), || solve_beta(model, 2));
    Ok([
        b1.context(|| "three-body bound state s=1".into())?,
        b2.context(|| "three-body bound state s=2".into())?,
    ])
}

pub fn three_body(config: &ScenarioConfig) -> CliResult<NamedTables> {
    let model = config.model()?;
    require_coupling(&model)?;
    let states = three_body_states(&model)?;
    let grid = config.grid()?;
    let mut summary = Table::new(&["s", "beta", "B", "residual"]);
    let mut tables = Vec::new();
    for b in &states {
        summary.push(vec![
            b.s.to_string(),
            fmt_f64(b.beta),
            fmt_f64(b.b),
            fmt_f64(b.residual),
        ]);
        let profile = bound3_realspace(&model, b, grid)
            .context(|| format!("three-body profile s={}", b.s))?;
        let mut t = Table::new(&["x", "eta_e_sq"]);
        for (&x, v) in profile.sites.iter().zip(profile.eta_e_sq()) {
            t.push(vec![x.to_string(), fmt_f64(v)]);
        }
        tables.push((format!("eta_e_sq_s{}.csv", b.s), t));
        let mut t2 = Table::new(&["x1", "x2", "re_eta", "im_eta"]);
        for i in 0..profile.eta2.n {
            for j in 0..profile.eta2.n {
                let v = profile.eta2.get(i, j);
                t2.push(vec![
                    profile.sites[i].to_string(),
                    profile.sites[j].to_string(),
                    fmt_f64(v.re),
                    fmt_f64(v.im),
                ]);
            }
        }
        tables.push((format!("eta2_s{}.csv", b.s), t2));
    }
    tables.insert(0, ("three_body.csv".into(), summary));
    Ok(tables)
}

/// One analytic-versus-lattice comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelCheck {
    pub sector: Sector,
    pub s: usize,
    pub analytic: f64,
    pub lattice: f64,
    pub localization: f64,
}

impl LevelCheck {
    pub fn abs_diff(&self) -> f64 {
        (self.analytic - self.lattice).abs()
    }
}

/// Bound levels of an `n`-site chain next to the analytic `E_s` and `B_s`.
pub fn lattice_checks(model: &Model, n: usize) -> CliResult<Vec<LevelCheck>> {
    require_coupling(model)?;
    let p = model.params;
    let ((one, two), states) = rayon::join(
        || {
            rayon::join(
                || discrete_spectrum(n, Sector::OneExcitation, &p),
                || discrete_spectrum(n, Sector::TwoExcitation, &p),
            )
        },
        || three_body_states(model),
    );
    let one = one.context(|| format!("one-excitation chain N={n}"))?;
    let two = two.context(|| format!("two-excitation chain N={n}"))?;
    let states = states?;
    let bound = model.bound_states().context(|| "bound states".into())?;
    let pick = |levels: &[cra_photon::lattice_oracle::Level], s: usize, sector: &str| {
        let level = if s == 1 {
            levels.first()
        } else {
            levels.last()
        };
        level.copied().ok_or_else(|| {
            CliError::physics(
                format!("{sector} chain N={n} has no isolated level for s={s}"),
                cra_photon::Error::ConvergenceFailure {
                    iterations: 0,
                    residual: f64::NAN,
                },
            )
        })
    };
    let mut out = Vec::with_capacity(4);
    for s in [1, 2] {
        let l = pick(&one, s, "one-excitation")?;
        out.push(LevelCheck {
            sector: Sector::OneExcitation,
            s,
            analytic: bound[s - 1].energy,
            lattice: l.energy,
            localization: l.localization,
        });
    }
    for s in [1, 2] {
        let l = pick(&two, s, "two-excitation")?;
        out.push(LevelCheck {
            sector: Sector::TwoExcitation,
            s,
            analytic: states[s - 1].b,
            lattice: l.energy,
            localization: l.localization,
        });
    }
    Ok(out)
}

/// A band integral evaluated by both routes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouteComparison {
    pub sample: usize,
    pub quantity: &'static str,
    pub draw: RouteDraw,
    pub plemelj: Complex64,
    pub eta: Complex64,
}

impl RouteComparison {
    /// `|plemelj - eta| / max(|plemelj|, 1)`.
    pub fn rel_diff(&self) -> f64 {
        (self.plemelj - self.eta).norm() / self.plemelj.norm().max(1.0)
    }
}

/// One random evaluation point: `A_s(eps, eps0)`, `C(e3)` and `I(eps)` at `e3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouteDraw {
    pub params: ModelParams,
    pub s: usize,
    pub eps: f64,
    pub eps0: f64,
    pub e3: f64,
}

/// Random admissible draws: band interior energies kept `0.05 J` away from
/// every threshold of the kernels, including the probe poles `E - eps`, and
/// from the pole of `A`. Near a threshold the regularized integrals are not
/// analytic in the width, so extrapolation in it is not meaningful there.
fn route_draws(seed: u64, count: usize) -> Vec<RouteDraw> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws = Vec::with_capacity(count);
    while draws.len() < count {
        let j = rng.random_range(0.5..1.5);
        let omega0 = rng.random_range(2.0..6.0);
        let v = rng.random_range(0.4..1.5) * j;
        let omega_tls = omega0 + rng.random_range(-2.5..2.5) * j;
        let Ok(params) = ModelParams::new(omega0, j, v, omega_tls) else {
            continue;
        };
        let Ok(model) = Model::new(params) else {
            continue;
        };
        let Ok(e) = model.bound_states() else {
            continue;
        };
        let margin = 0.2 * j;
        let mut interior =
            || rng.random_range(params.band_min() + margin..params.band_max() - margin);
        let s = if interior() < omega0 { 1 } else { 2 };
        let (eps0, eps, e1, e2) = (interior(), interior(), interior(), interior());
        let e3 = e1 + e2;
        let es = e[s - 1].energy + eps0;
        let near_edge = |x: f64| {
            (x - params.band_min()).abs() < 0.05 * j || (x - params.band_max()).abs() < 0.05 * j
        };
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
        draws.push(RouteDraw {
            params,
            s,
            eps,
            eps0,
            e3,
        });
    }
    draws
}

/// `A_s`, `C` and `I` by both routes on `count` random parameter points.
pub fn dual_route_comparisons(seed: u64, count: usize) -> CliResult<Vec<RouteComparison>> {
    let per_draw: Vec<Vec<RouteComparison>> = route_draws(seed, count)
        .into_par_iter()
        .enumerate()
        .map(|(sample, d)| {
            let ctx = || format!("dual-route sample {sample} ({:?})", d.params);
            let model = Model::new(d.params).context(ctx)?;
            let a = [Route::Plemelj, Route::EtaExtrapolated]
                .map(|r| a_s_with(&model, d.eps, d.eps0, d.s, r));
            let c = [Route::Plemelj, Route::EtaExtrapolated].map(|r| c_fun_with(&model, d.e3, r));
            let i = [Route::Plemelj, Route::EtaExtrapolated].map(|r| {
                two_photon_constants_with(&model, d.e3, r)
                    .and_then(|k| i_fun_with(&model, d.eps, &k, r))
            });
            let mut out = Vec::with_capacity(3);
            for (quantity, [pl, eta]) in [("A_s", a), ("C", c), ("I", i)] {
                out.push(RouteComparison {
                    sample,
                    quantity,
                    draw: d,
                    plemelj: pl.context(ctx)?,
                    eta: eta.context(ctx)?,
                });
            }
            Ok(out)
        })
        .collect::<CliResult<_>>()?;
    Ok(per_draw.into_iter().flatten().collect())
}

pub fn oracle_check(config: &ScenarioConfig) -> CliResult<NamedTables> {
    let model = config.model()?;
    let n = config.chain_sites.unwrap_or(DEFAULT_CHAIN_SITES);
    if n < 3 {
        return Err(CliError::ConfigInvalid {
            field: "chain_sites".into(),
            message: format!("need at least 3 sites, got {n}"),
        });
    }
    let levels = lattice_checks(&model, n)?;
    let mut t = Table::new(&[
        "sector",
        "s",
        "analytic",
        "lattice",
        "abs_diff",
        "localization",
    ]);
    for l in &levels {
        let sector = match l.sector {
            Sector::OneExcitation => "one_excitation",
            Sector::TwoExcitation => "two_excitation",
        };
        t.push(vec![
            sector.to_string(),
            l.s.to_string(),
            fmt_f64(l.analytic),
            fmt_f64(l.lattice),
            fmt_f64(l.abs_diff()),
            fmt_f64(l.localization),
        ]);
    }
    let samples = config.samples.unwrap_or(DEFAULT_ROUTE_SAMPLES);
    let routes = dual_route_comparisons(config.seed, samples)?;
    let mut r = Table::new(&[
        "sample",
        "quantity",
        "plemelj_re",
        "plemelj_im",
        "eta_re",
        "eta_im",
        "rel_diff",
    ]);
    for c in &routes {
        r.push(vec![
            c.sample.to_string(),
            c.quantity.to_string(),
            fmt_f64(c.plemelj.re),
            fmt_f64(c.plemelj.im),
            fmt_f64(c.eta.re),
            fmt_f64(c.eta.im),
            fmt_f64(c.rel_diff()),
        ]);
    }
    Ok(vec![
        ("oracle_levels.csv".into(), t),
        ("dual_route.csv".into(), r),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_energies_stay_inside() {
        let e = sweep_energies(2.0, 6.0, 4);
        assert_eq!(e, vec![2.5, 3.5, 4.5, 5.5]);
    }

    #[test]
    fn scenario_mismatch_rejected() {
        let mut c = ScenarioConfig::with_params(4.0, 1.0, 1.0, 2.5);
        c.scenario = Some(ScenarioKind::ThreeBody);
        let dir = tempfile::tempdir().unwrap();
        let err = run_scenario(ScenarioKind::BoundStates, &c, dir.path()).unwrap_err();
        assert!(matches!(err, CliError::ConfigInvalid { field, .. } if field == "scenario"));
    }

    #[test]
    fn decoupled_model_rejected_where_bound_states_needed() {
        let c = ScenarioConfig::with_params(4.0, 1.0, 0.0, 2.5);
        assert!(
            matches!(bound_states(&c), Err(CliError::ConfigInvalid { field, .. }) if field == "coupling")
        );
    }

    #[test]
    fn route_draws_are_reproducible() {
        let a = route_draws(3, 5);
        let b = route_draws(3, 5);
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }
}
