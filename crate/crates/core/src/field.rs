//! Sampled complex fields and their intensity moments.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::XGrid;

/// Boundary intensity above this fraction of the peak means the packet
/// is no longer contained in the window.
pub const TAIL_THRESHOLD: f64 = 1e-10;

/// Complex samples of a field on a uniform grid at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSnapshot {
    pub x0: f64,
    pub dx: f64,
    pub t: f64,
    pub values: Vec<Complex64>,
}

impl FieldSnapshot {
    pub fn new(grid: XGrid, t: f64, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::LengthMismatch {
                expected: grid.n,
                got: values.len(),
            });
        }
        Ok(FieldSnapshot {
            x0: grid.x0,
            dx: grid.dx,
            t,
            values,
        })
    }

    /// Sample `f(x)` at every grid point.
    pub fn from_fn(grid: XGrid, t: f64, f: impl Fn(f64) -> Complex64) -> Self {
        FieldSnapshot {
            x0: grid.x0,
            dx: grid.dx,
            t,
            values: (0..grid.n).map(|m| f(grid.x(m))).collect(),
        }
    }

    pub fn grid(&self) -> XGrid {
        XGrid {
            x0: self.x0,
            dx: self.dx,
            n: self.values.len(),
        }
    }

    pub fn x(&self, m: usize) -> f64 {
        self.x0 + m as f64 * self.dx
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    pub fn max_abs_diff(&self, other: &FieldSnapshot) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `‖self − other‖₂ / ‖other‖₂` on the shared grid.
    pub fn relative_l2_diff(&self, other: &FieldSnapshot) -> f64 {
        let (num, den) = self
            .values
            .iter()
            .zip(&other.values)
            .fold((0.0, 0.0), |(n, d), (a, b)| (n + (a - b).norm_sqr(), d + b.norm_sqr()));
        (num / den).sqrt()
    }
}

/// Trapezoid moments of `|f|²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PacketStats {
    pub norm: f64,
    pub centroid: f64,
    pub rms_width: f64,
}

pub fn compute_stats(f: &FieldSnapshot) -> Result<PacketStats> {
    compute_stats_with_threshold(f, TAIL_THRESHOLD)
}

pub fn compute_stats_with_threshold(f: &FieldSnapshot, tail_threshold: f64) -> Result<PacketStats> {
    let rho = f.intensity();
    let n = rho.len();
    let peak = rho.iter().copied().fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(Error::invalid("field", "intensity vanishes everywhere"));
    }
    let edge = rho[0].max(rho[n - 1]) / peak;
    if edge > tail_threshold {
        return Err(Error::TailLeak {
            t: f.t,
            ratio: edge,
            threshold: tail_threshold,
        });
    }
    let weight = |m: usize| if m == 0 || m == n - 1 { 0.5 } else { 1.0 };
    let mass: f64 = (0..n).map(|m| weight(m) * rho[m]).sum();
    // Moments about the grid centre keep the sums well conditioned when the
    // packet sits far from the origin.
    let mid = f.x(n / 2);
    let first: f64 = (0..n).map(|m| weight(m) * rho[m] * (f.x(m) - mid)).sum();
    let shift = first / mass;
    let second: f64 = (0..n)
        .map(|m| {
            let d = f.x(m) - mid - shift;
            weight(m) * rho[m] * d * d
        })
        .sum();
    Ok(PacketStats {
        norm: mass * f.dx,
        centroid: mid + shift,
        rms_width: (second / mass).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gaussian(center: f64, sigma: f64) -> impl Fn(f64) -> Complex64 {
        // |f|² has variance σ²
        move |x| Complex64::from_polar((-(x - center).powi(2) / (4.0 * sigma * sigma)).exp(), 3.0 * x)
    }

    #[test]
    fn unit_gaussian_moments() {
        let grid = XGrid::new(-15.0, 0.05, 601).unwrap();
        let s = compute_stats(&FieldSnapshot::from_fn(grid, 0.0, gaussian(0.0, 1.0))).unwrap();
        assert!(s.centroid.abs() < 1e-12);
        assert!((s.rms_width - 1.0).abs() < 1e-6);
        assert_relative_eq!(s.norm, (2.0 * std::f64::consts::PI).sqrt(), max_relative = 1e-10);
    }

    #[test]
    fn symmetric_field_centroid() {
        let a = 4.25;
        let grid = XGrid::new(a - 20.0, 0.1, 401).unwrap();
        let f = FieldSnapshot::from_fn(grid, 0.0, |x| {
            let d = x - a;
            Complex64::new((-d * d / 8.0).exp() * (1.0 + 0.5 * (d * d).cos()), 0.0)
        });
        assert!((compute_stats(&f).unwrap().centroid - a).abs() < 1e-10);
    }

    #[test]
    fn drifted_packet_leaks() {
        let grid = XGrid::new(-10.0, 0.05, 401).unwrap();
        let f = FieldSnapshot::from_fn(grid, 3.0, gaussian(9.0, 1.0));
        assert!(matches!(compute_stats(&f), Err(Error::TailLeak { .. })));
    }

    #[test]
    fn length_mismatch() {
        let grid = XGrid::new(0.0, 1.0, 4).unwrap();
        assert!(FieldSnapshot::new(grid, 0.0, vec![Complex64::new(1.0, 0.0); 3]).is_err());
    }
}
