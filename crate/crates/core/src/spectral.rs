//! Fourier synthesis of wave packets under an arbitrary real dispersion.
//!
//! The field `f(x,t) = ∫ dk g(k) e^{i(kx − ω(k)t)}` is evaluated by a
//! midpoint Riemann sum on a uniform [`KGrid`]. On a conjugate position grid
//! the sum is one inverse FFT; on any other grid it is summed directly. The
//! direct sum is slow but shares nothing with the FFT path, which makes it
//! the natural reference for it.
//!
//! Since `|g(k) e^{−iωt}| = |g(k)|` for real ω, the discrete norm is
//! conserved to rounding by construction.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::dispersion::{Dispersion, DispersionModel};
use crate::error::{Error, Result};
use crate::field::{compute_stats, FieldSnapshot, PacketStats};
use crate::fourier::Fourier;
use crate::grid::{KGrid, XGrid};
use crate::packet::{gup_width_exact, GaussianPacketSpec};

/// Spectrum truncation, in units of `σ_k`.
pub const DEFAULT_N_SIGMA: f64 = 6.0;
/// Pole exclusion half-width, in units of `dk`.
pub const POLE_GUARD_CELLS: f64 = 10.0;
/// Position margin on either side of the packet path, in packet widths.
pub const MARGIN_WIDTHS: f64 = 12.0;
/// Third-order phase budget (rad) that bounds the quadratic-oracle window.
pub const THIRD_ORDER_PHASE_BUDGET: f64 = 0.01;

/// Complex spectral amplitudes on the nodes of a [`KGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub grid: KGrid,
    pub amplitudes: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: KGrid, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.n() {
            return Err(Error::LengthMismatch {
                expected: grid.n(),
                got: amplitudes.len(),
            });
        }
        Ok(Spectrum { grid, amplitudes })
    }

    /// Sample an arbitrary amplitude function on the grid nodes.
    pub fn from_fn(grid: KGrid, g: impl Fn(f64) -> Complex64) -> Self {
        Spectrum {
            amplitudes: grid.nodes().map(g).collect(),
            grid,
        }
    }
}

/// Sample `g(k) = exp(−α(k − k₀)²)`, requiring the grid to contain
/// `k₀ ± n_σ σ_k`.
pub fn sample_spectrum(spec: &GaussianPacketSpec, grid: &KGrid, n_sigma: f64) -> Result<Spectrum> {
    let half = n_sigma * spec.sigma_k();
    let (need_min, need_max) = (spec.k0() - half, spec.k0() + half);
    if need_min < grid.k_min() || need_max > grid.k_max() {
        return Err(Error::GridCoverage {
            k_min: grid.k_min(),
            k_max: grid.k_max(),
            need_min,
            need_max,
        });
    }
    Ok(Spectrum::from_fn(*grid, |k| Complex64::new(spec.amplitude(k), 0.0)))
}

/// Reject grids with a node within [`POLE_GUARD_CELLS`]`·dk` of `±k_pole`.
pub fn check_pole_guard(grid: &KGrid, m: &DispersionModel) -> Result<()> {
    let Some(pole) = m.pole() else { return Ok(()) };
    let guard = POLE_GUARD_CELLS * grid.dk();
    match grid.nodes().find(|k| (k.abs() - pole).abs() < guard) {
        Some(k) => Err(Error::PoleGuard { k, pole }),
        None => Ok(()),
    }
}

fn phases<D: Dispersion + ?Sized>(spectrum: &Spectrum, disp: &D, t: f64) -> Result<Vec<Complex64>> {
    spectrum
        .grid
        .nodes()
        .zip(&spectrum.amplitudes)
        .map(|(k, a)| {
            let w = disp.omega(k)?;
            if !w.is_finite() {
                return Err(Error::DispersionSingularity { k, denominator: f64::NAN });
            }
            Ok(if t == 0.0 { *a } else { a * Complex64::from_polar(1.0, -w * t) })
        })
        .collect()
}

/// `f(x_m, t) = dk Σ_j g_j e^{i(k_j x_m − ω(k_j) t)}`, by FFT when `x_grid`
/// is conjugate to the spectrum's grid and by direct summation otherwise.
pub fn synthesize<D: Dispersion + ?Sized>(
    spectrum: &Spectrum,
    disp: &D,
    t: f64,
    x_grid: &XGrid,
) -> Result<FieldSnapshot> {
    if x_grid.is_conjugate_to(&spectrum.grid) {
        synthesize_fft(spectrum, disp, t, x_grid, &Fourier::new(x_grid.n))
    } else {
        synthesize_direct(spectrum, disp, t, x_grid)
    }
}

fn synthesize_fft<D: Dispersion + ?Sized>(
    spectrum: &Spectrum,
    disp: &D,
    t: f64,
    x_grid: &XGrid,
    fourier: &Fourier,
) -> Result<FieldSnapshot> {
    let g = &spectrum.grid;
    let dk = g.dk();
    let mut h = phases(spectrum, disp, t)?;
    for (j, v) in h.iter_mut().enumerate() {
        *v *= Complex64::from_polar(1.0, j as f64 * dk * x_grid.x0);
    }
    fourier.inverse_unnormalized(&mut h);
    let first = g.node(0);
    for (m, v) in h.iter_mut().enumerate() {
        *v *= Complex64::from_polar(dk, first * x_grid.x(m));
    }
    FieldSnapshot::new(*x_grid, t, h)
}

/// Plain `O(n·m)` quadrature of the Fourier integral on any position grid.
pub fn synthesize_direct<D: Dispersion + ?Sized>(
    spectrum: &Spectrum,
    disp: &D,
    t: f64,
    x_grid: &XGrid,
) -> Result<FieldSnapshot> {
    let h = phases(spectrum, disp, t)?;
    let nodes: Vec<f64> = spectrum.grid.nodes().collect();
    let dk = spectrum.grid.dk();
    let values = (0..x_grid.n)
        .into_par_iter()
        .map(|m| {
            let x = x_grid.x(m);
            let sum: Complex64 = nodes
                .iter()
                .zip(&h)
                .map(|(k, a)| a * Complex64::from_polar(1.0, k * x))
                .sum();
            sum * dk
        })
        .collect();
    FieldSnapshot::new(*x_grid, t, values)
}

/// Snapshots at strictly increasing times on one shared grid, with their
/// intensity moments.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionSeries {
    pub snapshots: Vec<FieldSnapshot>,
    pub stats: Vec<PacketStats>,
}

impl EvolutionSeries {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }
}

pub(crate) fn check_increasing(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::invalid("times", "must be finite"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("times", "must be strictly increasing"));
    }
    Ok(())
}

/// Synthesize and measure every time. Snapshots are independent and are
/// computed in parallel; the result order follows `times`.
pub fn evolve_spectrum<D: Dispersion + ?Sized>(
    spectrum: &Spectrum,
    disp: &D,
    times: &[f64],
    x_grid: &XGrid,
) -> Result<EvolutionSeries> {
    check_increasing(times)?;
    let fft = x_grid
        .is_conjugate_to(&spectrum.grid)
        .then(|| Fourier::new(x_grid.n));
    let snapshots = times
        .par_iter()
        .map(|&t| match &fft {
            Some(f) => synthesize_fft(spectrum, disp, t, x_grid, f),
            None => synthesize_direct(spectrum, disp, t, x_grid),
        })
        .collect::<Result<Vec<_>>>()?;
    let stats = snapshots.iter().map(compute_stats).collect::<Result<Vec<_>>>()?;
    Ok(EvolutionSeries { snapshots, stats })
}

/// Knobs for [`GridPlan::for_packet`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridOptions {
    pub n_sigma: f64,
    pub margin_widths: f64,
    /// Fixed grid size; chosen automatically when `None`.
    pub n: Option<usize>,
    pub min_n: usize,
    /// Upper bound on `dx` as a fraction of the initial RMS width.
    pub max_dx_fraction: f64,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            n_sigma: DEFAULT_N_SIGMA,
            margin_widths: MARGIN_WIDTHS,
            n: None,
            min_n: 256,
            max_dx_fraction: 0.5,
        }
    }
}

/// A conjugate `(k, x)` grid pair sized for one packet and time schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPlan {
    pub k: KGrid,
    pub x: XGrid,
}

impl GridPlan {
    /// The position window spans the centroid path `v_g t` over all times
    /// (and `t = 0`) plus `margin_widths` of the largest predicted width on
    /// each side. The spectral window is at least `k₀ ± n_σ σ_k`.
    pub fn for_packet(
        spec: &GaussianPacketSpec,
        m: &DispersionModel,
        times: &[f64],
        opts: &GridOptions,
    ) -> Result<Self> {
        let v = m.group_velocity_exact(spec.k0())?;
        let mut w_max = spec.initial_width();
        let (mut c_lo, mut c_hi) = (0.0f64, 0.0f64);
        for &t in times {
            w_max = w_max.max(gup_width_exact(t, spec, m)?);
            c_lo = c_lo.min(v * t);
            c_hi = c_hi.max(v * t);
        }
        let lo = c_lo - opts.margin_widths * w_max;
        let span = c_hi - lo + opts.margin_widths * w_max;
        let k_window = 2.0 * opts.n_sigma * spec.sigma_k();
        let dk = 2.0 * PI / span;
        let n = match opts.n {
            Some(n) => {
                if (n as f64) * dk < k_window {
                    return Err(Error::GridCoverage {
                        k_min: spec.k0() - 0.5 * n as f64 * dk,
                        k_max: spec.k0() + 0.5 * n as f64 * dk,
                        need_min: spec.k0() - 0.5 * k_window,
                        need_max: spec.k0() + 0.5 * k_window,
                    });
                }
                n
            }
            None => {
                let dx_max = opts.max_dx_fraction * spec.initial_width();
                let need = (k_window / dk).max(span / dx_max).ceil() as usize;
                need.max(opts.min_n).next_power_of_two()
            }
        };
        let k = KGrid::centered(spec.k0(), dk, n)?;
        check_pole_guard(&k, m)?;
        Ok(GridPlan {
            k,
            x: k.conjugate_x_grid(lo),
        })
    }
}

/// Evolve a Gaussian packet under the exact dispersion with default grids.
pub fn evolve_series(spec: &GaussianPacketSpec, m: &DispersionModel, times: &[f64]) -> Result<EvolutionSeries> {
    if times.is_empty() {
        return Ok(EvolutionSeries {
            snapshots: Vec::new(),
            stats: Vec::new(),
        });
    }
    let plan = GridPlan::for_packet(spec, m, times, &GridOptions::default())?;
    let spectrum = sample_spectrum(spec, &plan.k, DEFAULT_N_SIGMA)?;
    evolve_spectrum(&spectrum, m, times, &plan.x)
}

/// Longest time for which the cubic Taylor phase `|ω'''|/6 (3σ_k)³ t`
/// stays below [`THIRD_ORDER_PHASE_BUDGET`]. Infinite when `ω''' = 0`.
pub fn validated_time_window(spec: &GaussianPacketSpec, m: &DispersionModel) -> Result<f64> {
    let w3 = m.omega_third_derivative(spec.k0())?.abs();
    let reach = 3.0 * spec.sigma_k();
    Ok(THIRD_ORDER_PHASE_BUDGET / (w3 / 6.0 * reach.powi(3)))
}

/// Least-squares line through `(t, centroid)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VelocityFit {
    pub v_g: f64,
    pub intercept: f64,
    /// RMS residual of the centroids about the fitted line.
    pub residual: f64,
}

pub fn measure_group_velocity(series: &EvolutionSeries) -> Result<VelocityFit> {
    let times = series.times();
    if times.len() < 3 {
        return Err(Error::DegenerateFit(format!("need >= 3 snapshots, got {}", times.len())));
    }
    let centroids: Vec<f64> = series.stats.iter().map(|s| s.centroid).collect();
    fit_line(&times, &centroids)
}

pub(crate) fn fit_line(t: &[f64], y: &[f64]) -> Result<VelocityFit> {
    let n = t.len() as f64;
    let t_mean = t.iter().sum::<f64>() / n;
    let y_mean = y.iter().sum::<f64>() / n;
    let stt: f64 = t.iter().map(|ti| (ti - t_mean).powi(2)).sum();
    if !(stt > 0.0) {
        return Err(Error::DegenerateFit("times are not distinct".into()));
    }
    let sty: f64 = t.iter().zip(y).map(|(ti, yi)| (ti - t_mean) * (yi - y_mean)).sum();
    let slope = sty / stt;
    let intercept = y_mean - slope * t_mean;
    let ss: f64 = t
        .iter()
        .zip(y)
        .map(|(ti, yi)| (yi - intercept - slope * ti).powi(2))
        .sum();
    Ok(VelocityFit {
        v_g: slope,
        intercept,
        residual: (ss / n).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BroadeningRow {
    pub t: f64,
    pub measured: f64,
    pub predicted: f64,
    pub rel_dev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BroadeningReport {
    pub rows: Vec<BroadeningRow>,
    pub max_rel_dev: f64,
    pub mean_rel_dev: f64,
}

/// Compare measured RMS widths against one predicted width per snapshot.
pub fn measure_broadening(series: &EvolutionSeries, predicted: &[f64]) -> Result<BroadeningReport> {
    if predicted.len() != series.len() {
        return Err(Error::LengthMismatch {
            expected: series.len(),
            got: predicted.len(),
        });
    }
    let rows: Vec<BroadeningRow> = series
        .snapshots
        .iter()
        .zip(&series.stats)
        .zip(predicted)
        .map(|((snap, s), &p)| BroadeningRow {
            t: snap.t,
            measured: s.rms_width,
            predicted: p,
            rel_dev: ((s.rms_width - p) / p).abs(),
        })
        .collect();
    let max_rel_dev = rows.iter().map(|r| r.rel_dev).fold(0.0, f64::max);
    let mean_rel_dev = if rows.is_empty() {
        0.0
    } else {
        rows.iter().map(|r| r.rel_dev).sum::<f64>() / rows.len() as f64
    };
    Ok(BroadeningReport {
        rows,
        max_rel_dev,
        mean_rel_dev,
    })
}
