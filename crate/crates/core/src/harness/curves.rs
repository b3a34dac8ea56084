//! Tabulated dispersion curves and closed-form width tables.

use std::path::PathBuf;

use super::config::{CurveConfig, ExperimentConfig};
use super::output::{Cell, Csv, OutputSet};
use crate::dispersion::{DispersionModel, DispersionSample};
use crate::error::{Error, Result};
use crate::packet::{gup_width_exact, gup_width_printed_first_order, width_ratio, GaussianPacketSpec, QuadraticPropagator};

pub const SAMPLE_HEADER: [&str; 5] = ["k", "omega", "v_g", "beta", "hbar_eff"];
pub const CURVE_HEADER: [&str; 6] = ["k", "omega", "v_g", "beta", "hbar_eff", "status"];
pub const WIDTH_HEADER: [&str; 4] = ["t", "width_exact", "width_ratio", "width_paper_eq17"];

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let h = (b - a) / (n - 1) as f64;
            (0..n).map(|i| if i + 1 == n { b } else { a + i as f64 * h }).collect()
        }
    }
}

fn sample_cells(k: f64, s: Option<DispersionSample>, hbar_eff: f64) -> Vec<Cell> {
    match s {
        Some(s) => vec![k.into(), s.omega.into(), s.v_g.into(), s.beta.into(), hbar_eff.into()],
        None => vec![k.into(), Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty],
    }
}

/// `k,omega,v_g,beta,hbar_eff` on `n` points; rows where the exact relation
/// is singular have empty value fields.
pub fn dispersion_table(m: &DispersionModel, k_min: f64, k_max: f64, n: usize, first_order: bool) -> Result<Csv> {
    if !(k_max > k_min) || n < 1 {
        return Err(Error::invalid("k range", format!("need k_max > k_min and n >= 1, got [{k_min}, {k_max}], n = {n}")));
    }
    let mut csv = Csv::new(&SAMPLE_HEADER);
    for k in linspace(k_min, k_max, n) {
        let s = if first_order {
            Some(m.sample_first_order(k))
        } else {
            m.sample_exact(k).ok()
        };
        csv.row(sample_cells(k, s, m.effective_planck(k)));
    }
    Ok(csv)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Curve {
    Exact,
    FirstOrder,
    Free,
}

fn curve_table(m: &DispersionModel, c: &CurveConfig, which: Curve) -> Csv {
    let ks = linspace(c.k_min, c.k_max, c.n);
    let guard = c.pole_guard_cells * (c.k_max - c.k_min) / (c.n - 1) as f64;
    let free = m.free();
    let mut csv = Csv::new(&CURVE_HEADER);
    for k in ks {
        let (sample, status) = match which {
            Curve::Free => (free.sample_exact(k).ok(), "ok"),
            Curve::FirstOrder => (Some(m.sample_first_order(k)), "ok"),
            Curve::Exact => match m.pole() {
                Some(pole) if (k.abs() - pole).abs() <= guard => (None, "pole_guard"),
                Some(pole) if k.abs() > pole => (m.sample_exact(k).ok(), "beyond_pole"),
                _ => (m.sample_exact(k).ok(), "ok"),
            },
        };
        let hbar_eff = if which == Curve::Free { m.hbar() } else { m.effective_planck(k) };
        let mut cells = sample_cells(k, sample, hbar_eff);
        cells.push(status.into());
        csv.row(cells);
    }
    csv
}

pub(crate) fn curve_outputs(cfg: &ExperimentConfig, set: &mut OutputSet) {
    let c = cfg.curves.unwrap_or_default();
    let dir = &cfg.output.dir;
    for (name, which) in [
        ("dispersion_exact.csv", Curve::Exact),
        ("dispersion_first_order.csv", Curve::FirstOrder),
        ("dispersion_free.csv", Curve::Free),
    ] {
        set.add(dir.join(name), curve_table(&cfg.model, &c, which).into_string());
    }
}

/// Write `dispersion_exact.csv`, `dispersion_first_order.csv` and
/// `dispersion_free.csv` under the output directory. Exact rows within the
/// guard band of the pole carry no values and the status `pole_guard`.
pub fn emit_dispersion_curves(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let mut set = OutputSet::new();
    curve_outputs(cfg, &mut set);
    set.commit()
}

/// Closed-form widths on `n_t` times over `[0, t_max]`. The printed
/// first-order column is empty where its radicand is negative.
pub fn packet_width_table(spec: &GaussianPacketSpec, m: &DispersionModel, t_max: f64, n_t: usize) -> Result<Csv> {
    if !(t_max >= 0.0 && t_max.is_finite()) {
        return Err(Error::invalid("t_max", format!("must be finite and >= 0, got {t_max}")));
    }
    let prop = QuadraticPropagator::exact(spec.k0(), m)?;
    let mut csv = Csv::new(&WIDTH_HEADER);
    for t in linspace(0.0, t_max, n_t) {
        let printed = gup_width_printed_first_order(t, spec, m).ok().map(|p| p.width);
        csv.row([
            t.into(),
            gup_width_exact(t, spec, m)?.into(),
            width_ratio(t, spec, &prop).into(),
            printed.into(),
        ]);
    }
    Ok(csv)
}
