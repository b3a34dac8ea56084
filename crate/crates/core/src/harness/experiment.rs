use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, GkgConfig, Setting, Solver};
use super::curves::curve_outputs;
use super::output::{Cell, Csv, OutputSet};
use super::report::{Comparison, ComparisonReport, Conventions};
use crate::dispersion::Dispersion;
use crate::error::{Error, Result};
use crate::field::{compute_stats, FieldSnapshot, PacketStats};
use crate::gkg::{
    build_initial_data, energy, evolve_spectral, fd_energy, gkg_dispersion_sq, stability_bound, Branch, GkgBranch,
    GkgParams, GkgState, Leapfrog,
};
use crate::grid::{KGrid, XGrid};
use crate::packet::gup_width_exact;
use crate::spectral::{
    evolve_spectrum, fit_line, measure_broadening, measure_group_velocity, sample_spectrum, synthesize, EvolutionSeries,
    GridPlan, DEFAULT_N_SIGMA,
};

const DERIVATIVE_SAMPLES: usize = 32;

/// Everything computed for one config, before anything is written.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub config: ExperimentConfig,
    pub report: ComparisonReport,
    pub series: EvolutionSeries,
    pub predicted_widths: Vec<f64>,
    pub gkg: Option<GkgOutcome>,
}

#[derive(Debug, Clone)]
pub struct GkgOutcome {
    pub params: GkgParams,
    pub solver: Solver,
    /// Leapfrog step actually used per interval, for the FD solver.
    pub dt: Option<f64>,
    pub states: Vec<GkgState>,
    pub stats: Vec<PacketStats>,
    pub energies: Vec<f64>,
    pub comparisons: Vec<Comparison>,
}

fn in_context<T>(id: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::ConfigInvalid { .. } | Error::Experiment { .. } => e,
        other => Error::Experiment {
            id: id.to_string(),
            source: Box::new(other),
        },
    })
}

/// Run every comparison the config declares without touching the disk.
pub fn execute(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    in_context(&cfg.id, execute_inner(cfg))
}

fn execute_inner(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let (spec, m, tol) = (&cfg.packet, &cfg.model, &cfg.tolerances);
    let times = cfg.times()?;
    let plan = GridPlan::for_packet(spec, m, &times, &cfg.grid.options())?;
    let spectrum = sample_spectrum(spec, &plan.k, cfg.grid.n_sigma)?;
    let series = evolve_spectrum(&spectrum, m, &times, &plan.x)?;

    let predicted_widths = times
        .iter()
        .map(|&t| gup_width_exact(t, spec, m))
        .collect::<Result<Vec<_>>>()?;
    let broadening = measure_broadening(&series, &predicted_widths)?;
    let mut comparisons: Vec<Comparison> = broadening
        .rows
        .iter()
        .map(|r| Comparison::new(format!("rms_width@t={:?}", r.t), r.predicted, r.measured, tol.width_rel))
        .collect();

    if series.len() >= 3 {
        let fit = measure_group_velocity(&series)?;
        comparisons.push(Comparison::new(
            "group_velocity",
            m.group_velocity_exact(spec.k0())?,
            fit.v_g,
            tol.group_velocity_rel,
        ));
    }

    if let Some(first) = series.stats.first() {
        let worst = series
            .stats
            .iter()
            .max_by(|a, b| (a.norm - first.norm).abs().total_cmp(&(b.norm - first.norm).abs()))
            .expect("non-empty");
        comparisons.push(Comparison::new("norm_drift", first.norm, worst.norm, tol.norm_drift));
    }

    comparisons.push(derivative_check(cfg, &plan.k)?);

    let gkg = match &cfg.gkg {
        Some(g) => Some(simulate_gkg(cfg, g, &times, &plan.x)?),
        None => None,
    };
    if let Some(g) = &gkg {
        comparisons.extend(g.comparisons.iter().cloned());
    }

    let report = ComparisonReport::new(&cfg.id, cfg.seed, comparisons, conventions(cfg), cfg.tolerances);
    Ok(ExperimentOutcome {
        config: cfg.clone(),
        report,
        series,
        predicted_widths,
        gkg,
    })
}

fn conventions(cfg: &ExperimentConfig) -> Conventions {
    let g = cfg.gkg.unwrap_or_default();
    Conventions {
        sign_convention: g.sign_convention,
        instability_policy: g.instability_policy,
        gkg_solver: cfg.gkg.map(|g| g.solver),
        sigma_k: "1/sqrt(2 alpha)",
        width_prediction: "exact_beta",
    }
}

/// Central differences of ω at seeded random wavenumbers inside the
/// spectral window against the closed-form group velocity. The deviation
/// is the largest difference in units of `c`.
fn derivative_check(cfg: &ExperimentConfig, k_grid: &KGrid) -> Result<Comparison> {
    let (spec, m) = (&cfg.packet, &cfg.model);
    let half = cfg.grid.n_sigma * spec.sigma_k();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..DERIVATIVE_SAMPLES {
        let k = spec.k0() + rng.random_range(-half..=half);
        let mut h = 1e-4 * k.abs().max(1.0);
        if let Some(pole) = m.pole() {
            let gap = (k.abs() - pole).abs();
            if gap < 10.0 * k_grid.dk() {
                continue;
            }
            h = h.min(0.01 * gap);
        }
        let fd = (m.omega_exact(k + h)? - m.omega_exact(k - h)?) / (2.0 * h);
        let exact = m.group_velocity_exact(k)?;
        let dev = (fd - exact).abs() / m.c();
        if dev >= worst.0 {
            worst = (dev, exact, fd);
        }
    }
    Ok(Comparison::with_deviation(
        "group_velocity_derivative",
        worst.1,
        worst.2,
        worst.0,
        cfg.tolerances.derivative_rel,
    ))
}

/// Phase error allowed to the leapfrog scheme at the edge of the spectral
/// window over the whole run, split between space and time.
const FD_PHASE_BUDGET: f64 = 1e-3;

/// Largest `|k|` with `ω² ≥ 0` when the quartic term is negative.
fn stable_cutoff(p: &GkgParams) -> Option<f64> {
    let q = p.quartic();
    (q < 0.0).then(|| p.c() / (-q).sqrt())
}

/// Periodic grid for the GKG run: the spectral-evolve window (mirrored for
/// standing waves, which also travel left) with `dx` small enough to
/// resolve the carrier twice over, or to meet the leapfrog phase budget.
/// The automatic size never puts grid modes past the stable cutoff.
fn gkg_grid(cfg: &ExperimentConfig, g: &GkgConfig, p: &GkgParams, window: &XGrid, t_span: f64) -> Result<XGrid> {
    let spec = &cfg.packet;
    let standing = g.branch == Branch::Standing;
    let (x0, length) = match (g.length, standing) {
        (Setting::Value(l), true) => (-0.5 * l, l),
        (Setting::Value(l), false) => (window.x0, l),
        (Setting::Auto, true) => {
            let hi = (window.x0 + window.length()).max(-window.x0);
            (-hi, 2.0 * hi)
        }
        (Setting::Auto, false) => (window.x0, window.length()),
    };
    let n = match g.n {
        Setting::Value(n) => n,
        Setting::Auto => {
            let k_need = spec.k0().abs() + cfg.grid.n_sigma * spec.sigma_k();
            let mut dx = (cfg.grid.max_dx_fraction * spec.initial_width()).min(PI / (2.0 * k_need));
            if g.solver == Solver::Fd && t_span > 0.0 {
                // 3-point Laplacian: ω error ≈ c k (k dx)² / 24
                dx = dx.min((24.0 * FD_PHASE_BUDGET / (p.c() * k_need.powi(3) * t_span)).sqrt());
            }
            let mut n = ((length / dx).ceil() as usize).max(cfg.grid.min_n).next_power_of_two();
            if let Some(kc) = stable_cutoff(p) {
                // highest represented wavenumber: π/dx spectrally, 2/dx for the stencil
                let reach = if g.solver == Solver::Fd { 2.0 } else { PI };
                let n_max = (kc * length / reach * (1.0 - 1e-9)).floor() as usize;
                if n_max >= 2 {
                    n = n.min(1 << n_max.ilog2());
                }
            }
            n
        }
    };
    XGrid::periodic(x0, length, n)
}

/// Leapfrog step: half the stability bound, or smaller to keep the
/// temporal phase error `ω³ dt² t / 24` within budget.
fn fd_step(cfg: &ExperimentConfig, p: &GkgParams, grid: &XGrid, t_span: f64) -> f64 {
    let spec = &cfg.packet;
    let k_need = spec.k0().abs() + cfg.grid.n_sigma * spec.sigma_k();
    let w = gkg_dispersion_sq(k_need, p).max(0.0).sqrt();
    let half_bound = 0.5 * stability_bound(grid, p);
    if w > 0.0 && t_span > 0.0 {
        half_bound.min((24.0 * FD_PHASE_BUDGET / (w.powi(3) * t_span)).sqrt())
    } else {
        half_bound
    }
}

fn gkg_group_velocity(k: f64, p: &GkgParams) -> f64 {
    let w = gkg_dispersion_sq(k, p).sqrt();
    (p.c() * p.c() * k + 2.0 * p.quartic() * k.powi(3)) / w
}

fn simulate_gkg(cfg: &ExperimentConfig, g: &GkgConfig, times: &[f64], window: &XGrid) -> Result<GkgOutcome> {
    let p = g.params(&cfg.model)?;
    let tol = &cfg.tolerances;
    let t_span = times.iter().fold(0.0f64, |a, t| a.max(t.abs()));
    let grid = gkg_grid(cfg, g, &p, window, t_span)?;
    let init = build_initial_data(&cfg.packet, &p, g.branch, &grid)?;
    let t0 = init.t();

    let (states, dt) = match g.solver {
        Solver::Spectral => {
            let states = times
                .par_iter()
                .map(|&t| evolve_spectral(&init, &p, t - t0))
                .collect::<Result<Vec<_>>>()?;
            (states, None)
        }
        Solver::Fd => {
            let target = match g.dt {
                Setting::Value(dt) => dt,
                Setting::Auto => fd_step(cfg, &p, &grid, t_span),
            };
            let mut state = init.clone();
            let mut states = Vec::with_capacity(times.len());
            let mut used = target;
            for &t in times {
                let span = t - state.t();
                if span < 0.0 {
                    return Err(Error::invalid("times", "the fd solver needs times >= 0"));
                }
                if span > 0.0 {
                    let steps = (span / target).ceil() as usize;
                    let dt = span / steps as f64;
                    used = used.min(dt);
                    let mut lf = Leapfrog::new(&state, &p, dt)?;
                    lf.advance(steps);
                    state = lf.state()?;
                    state.psi.t = t;
                    state.psi_dot.t = t;
                }
                states.push(state.clone());
            }
            (states, Some(used))
        }
    };

    let stats = states.iter().map(|s| compute_stats(&s.psi)).collect::<Result<Vec<_>>>()?;
    let energies: Vec<f64> = states
        .iter()
        .map(|s| match g.solver {
            Solver::Spectral => energy(s, &p),
            Solver::Fd => fd_energy(s, &p),
        })
        .collect();

    let mut comparisons = Vec::new();
    let stable = states.iter().all(|s| s.unstable_band.is_none());
    if let (Some(e0), true) = (energies.first(), stable) {
        let worst = energies
            .iter()
            .copied()
            .max_by(|a, b| (a - e0).abs().total_cmp(&(b - e0).abs()))
            .expect("non-empty");
        let tolerance = match g.solver {
            Solver::Spectral => tol.energy_drift,
            Solver::Fd => tol.fd_rel,
        };
        comparisons.push(Comparison::new("gkg_energy_drift", *e0, worst, tolerance));
    }

    if g.branch == Branch::PositiveFrequency && stable {
        if g.solver == Solver::Spectral {
            let n0 = stats[0].norm;
            let worst = stats
                .iter()
                .map(|s| s.norm)
                .max_by(|a, b| (a - n0).abs().total_cmp(&(b - n0).abs()))
                .expect("non-empty");
            comparisons.push(Comparison::new("gkg_norm_drift", n0, worst, tol.norm_drift));
        }

        let modes = KGrid::periodic_modes(&grid)?;
        let half = DEFAULT_N_SIGMA * cfg.packet.sigma_k();
        let spectrum = sample_spectrum(&cfg.packet, &modes, DEFAULT_N_SIGMA)?;
        let branch = SupportedBranch {
            branch: GkgBranch(p),
            lo: cfg.packet.k0() - half,
            hi: cfg.packet.k0() + half,
        };
        let oracle = times
            .par_iter()
            .map(|&t| synthesize(&spectrum, &branch, t, &grid))
            .collect::<Result<Vec<FieldSnapshot>>>()?;
        let (err, scale) = states.iter().zip(&oracle).fold((0.0f64, 0.0f64), |(e, s), (st, o)| {
            let peak = o.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
            (e.max(st.psi.max_abs_diff(o)), s.max(peak))
        });
        match g.solver {
            Solver::Spectral => {
                comparisons.push(Comparison::with_deviation("gkg_vs_synthesis", 0.0, err, err, tol.gkg_oracle_abs))
            }
            Solver::Fd => {
                let rel = states
                    .iter()
                    .zip(&oracle)
                    .map(|(st, o)| st.psi.relative_l2_diff(o))
                    .fold(0.0, f64::max);
                comparisons.push(Comparison::with_deviation("gkg_fd_vs_exact", scale, err, rel, tol.fd_rel));
            }
        }

        if times.len() >= 3 {
            let centroids: Vec<f64> = stats.iter().map(|s| s.centroid).collect();
            let fit = fit_line(times, &centroids)?;
            comparisons.push(Comparison::new(
                "gkg_group_velocity",
                gkg_group_velocity(cfg.packet.k0(), &p),
                fit.v_g,
                tol.group_velocity_rel,
            ));
        }
    }

    Ok(GkgOutcome {
        params: p,
        solver: g.solver,
        dt,
        states,
        stats,
        energies,
        comparisons,
    })
}

/// The GKG branch, checked for ω² ≥ 0 only on the spectral support;
/// elsewhere the amplitude underflows and unstable modes are frozen.
struct SupportedBranch {
    branch: GkgBranch,
    lo: f64,
    hi: f64,
}

impl Dispersion for SupportedBranch {
    fn omega(&self, k: f64) -> Result<f64> {
        if (self.lo..=self.hi).contains(&k) {
            self.branch.omega(k)
        } else {
            Ok(gkg_dispersion_sq(k, &self.branch.0).max(0.0).sqrt())
        }
    }
}

fn field_csv(f: &FieldSnapshot) -> String {
    let mut csv = Csv::new(&["x", "re", "im", "abs2"]);
    for (m, v) in f.values.iter().enumerate() {
        csv.row([f.x(m).into(), v.re.into(), v.im.into(), v.norm_sqr().into()]);
    }
    csv.into_string()
}

pub const STATS_HEADER: [&str; 6] = ["t", "norm", "centroid", "rms_width", "predicted_width", "rel_dev"];
pub const GKG_STATS_HEADER: [&str; 5] = ["t", "norm", "centroid", "rms_width", "energy"];

fn gkg_outputs(dir: &Path, g: &GkgOutcome, emit_fields: bool, set: &mut OutputSet) {
    let mut csv = Csv::new(&GKG_STATS_HEADER);
    for ((st, s), e) in g.states.iter().zip(&g.stats).zip(&g.energies) {
        csv.row([st.t().into(), s.norm.into(), s.centroid.into(), s.rms_width.into(), (*e).into()]);
    }
    set.add(dir.join("gkg_stats.csv"), csv.into_string());
    if emit_fields {
        for (i, st) in g.states.iter().enumerate() {
            set.add(dir.join(format!("gkg_field_t{i}.csv")), field_csv(&st.psi));
        }
    }
}

impl ExperimentOutcome {
    /// The files [`run_experiment`] writes, in memory.
    pub fn outputs(&self) -> OutputSet {
        let cfg = &self.config;
        let dir = &cfg.output.dir;
        let mut set = OutputSet::new();
        let mut csv = Csv::new(&STATS_HEADER);
        for ((snap, s), &w) in self.series.snapshots.iter().zip(&self.series.stats).zip(&self.predicted_widths) {
            csv.row([
                snap.t.into(),
                s.norm.into(),
                s.centroid.into(),
                s.rms_width.into(),
                w.into(),
                ((s.rms_width - w) / w).abs().into(),
            ]);
        }
        set.add(dir.join("stats.csv"), csv.into_string());
        if cfg.output.emit_fields {
            for (i, snap) in self.series.snapshots.iter().enumerate() {
                set.add(dir.join(format!("field_t{i}.csv")), field_csv(snap));
            }
        }
        if cfg.curves.is_some() {
            curve_outputs(cfg, &mut set);
        }
        if let Some(g) = &self.gkg {
            gkg_outputs(dir, g, cfg.output.emit_fields, &mut set);
        }
        set.add(dir.join("report.json"), self.report.to_json());
        set
    }
}

/// Run the experiment and write `stats.csv`, `report.json` and whatever
/// else the config declares. Either every file is written or none is.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ComparisonReport> {
    let outcome = execute(cfg)?;
    in_context(&cfg.id, outcome.outputs().commit())?;
    Ok(outcome.report)
}

/// Only the GKG part of an experiment: needs a `[gkg]` section and writes
/// `gkg_stats.csv`, `gkg_report.json` and optional `gkg_field_t<i>.csv`.
pub fn run_gkg(cfg: &ExperimentConfig) -> Result<ComparisonReport> {
    cfg.validate()?;
    let g = cfg.gkg.ok_or_else(|| Error::config("gkg", "section required"))?;
    in_context(&cfg.id, {
        let times = cfg.times()?;
        let window = GridPlan::for_packet(&cfg.packet, &cfg.model, &times, &cfg.grid.options())?.x;
        simulate_gkg(cfg, &g, &times, &window).and_then(|out| {
            let report = ComparisonReport::new(
                &cfg.id,
                cfg.seed,
                out.comparisons.clone(),
                conventions(cfg),
                cfg.tolerances,
            );
            let mut set = OutputSet::new();
            gkg_outputs(&cfg.output.dir, &out, cfg.output.emit_fields, &mut set);
            set.add(cfg.output.dir.join("gkg_report.json"), report.to_json());
            set.commit()?;
            Ok(report)
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanParameter {
    AlphaPrime,
    K0,
    Alpha,
    M0,
}

impl ScanParameter {
    pub fn as_str(self) -> &'static str {
        match self {
            ScanParameter::AlphaPrime => "alpha_prime",
            ScanParameter::K0 => "k0",
            ScanParameter::Alpha => "alpha",
            ScanParameter::M0 => "m0",
        }
    }

    fn apply(self, cfg: &ExperimentConfig, v: f64) -> Result<ExperimentConfig> {
        let mut out = cfg.clone();
        let key = format!("scan.{}", self.as_str());
        let bad = |e: Error| Error::config(key.clone(), e.to_string());
        match self {
            ScanParameter::AlphaPrime => out.model = cfg.model.with_alpha_prime(v).map_err(bad)?,
            ScanParameter::K0 => out.packet = cfg.packet.with_k0(v).map_err(bad)?,
            ScanParameter::Alpha => out.packet = cfg.packet.with_alpha(v).map_err(bad)?,
            ScanParameter::M0 => match &mut out.gkg {
                Some(g) => {
                    g.m0 = v;
                    g.params(&out.model).map_err(bad)?;
                }
                None => return Err(Error::config("gkg", "scanning m0 needs a gkg section")),
            },
        }
        Ok(out)
    }
}

impl FromStr for ScanParameter {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha_prime" => Ok(ScanParameter::AlphaPrime),
            "k0" => Ok(ScanParameter::K0),
            "alpha" => Ok(ScanParameter::Alpha),
            "m0" => Ok(ScanParameter::M0),
            _ => Err(Error::config(
                "scan.parameter",
                format!("unknown parameter {s:?}; expected alpha_prime, k0, alpha or m0"),
            )),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScanPoint {
    pub value: f64,
    pub report: ComparisonReport,
}

#[derive(Debug, Clone)]
pub struct ScanOutcome {
    pub parameter: ScanParameter,
    pub points: Vec<ScanPoint>,
    pub summary: PathBuf,
}

impl ScanOutcome {
    pub fn all_pass(&self) -> bool {
        self.points.iter().all(|p| p.report.all_pass())
    }
}

pub const SUMMARY_HEADER: [&str; 7] = [
    "value",
    "experiment_id",
    "group_velocity_predicted",
    "group_velocity_measured",
    "width_max_rel_dev",
    "norm_drift",
    "all_pass",
];

/// One experiment per value, run concurrently, each writing into
/// `<dir>/<parameter>_<index>`; then `<dir>/scan_<parameter>.csv`. Points are
/// sorted by value, so the output does not depend on scheduling.
pub fn scan(cfg: &ExperimentConfig, parameter: ScanParameter, values: &[f64]) -> Result<ScanOutcome> {
    cfg.validate()?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::config("scan.values", "must be finite"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::config("scan.values", "must be distinct"));
    }
    let configs = sorted
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut c = parameter.apply(cfg, v)?;
            let tag = format!("{}_{i:03}", parameter.as_str());
            c.id = format!("{}.{tag}", cfg.id);
            c.output.dir = cfg.output.dir.join(tag);
            c.validate()?;
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    let outcomes = configs.par_iter().map(execute).collect::<Result<Vec<_>>>()?;

    let mut set = OutputSet::new();
    let mut summary = Csv::new(&SUMMARY_HEADER);
    for (o, &v) in outcomes.iter().zip(&sorted) {
        for (path, bytes) in o.outputs().into_files() {
            set.add(path, bytes);
        }
        let r = &o.report;
        let gv = r.get("group_velocity");
        let width = r
            .comparisons()
            .iter()
            .filter(|c| c.quantity().starts_with("rms_width@"))
            .map(|c| c.rel_dev())
            .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.max(d))));
        summary.row([
            v.into(),
            Cell::Text(r.experiment_id.clone()),
            gv.map(|c| c.predicted()).into(),
            gv.map(|c| c.measured()).into(),
            width.into(),
            r.get("norm_drift").map(|c| c.rel_dev()).into(),
            r.all_pass().into(),
        ]);
    }
    let summary_path = cfg.output.dir.join(format!("scan_{}.csv", parameter.as_str()));
    set.add(&summary_path, summary.into_string());
    set.commit()?;
    Ok(ScanOutcome {
        parameter,
        points: sorted
            .into_iter()
            .zip(outcomes)
            .map(|(value, o)| ScanPoint { value, report: o.report })
            .collect(),
        summary: summary_path,
    })
}
