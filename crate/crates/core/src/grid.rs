//! Uniform grids in wave number and position.
//!
//! A [`KGrid`] with `n` nodes of spacing `dk` is conjugate to any [`XGrid`]
//! with the same `n` and `dx = 2π/(n dk)`; on such a pair the Fourier sum
//! `Σ_j g_j e^{i k_j x_m}` is a single length-`n` inverse DFT.

use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// `n` uniformly spaced wave numbers `k_j = first + j·dk`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KGrid {
    k_min: f64,
    dk: f64,
    n: usize,
    first: f64,
}

impl KGrid {
    /// Midpoint nodes of `n` equal cells covering `[k_min, k_max]`.
    pub fn midpoint(k_min: f64, k_max: f64, n: usize) -> Result<Self> {
        check_n(n)?;
        if !(k_max > k_min) || !k_min.is_finite() || !k_max.is_finite() {
            return Err(Error::invalid("k_max", format!("need k_max > k_min, got [{k_min}, {k_max}]")));
        }
        let dk = (k_max - k_min) / n as f64;
        Ok(KGrid {
            k_min,
            dk,
            n,
            first: k_min + 0.5 * dk,
        })
    }

    /// Midpoint grid of `n` cells of width `dk` centred on `center`.
    pub fn centered(center: f64, dk: f64, n: usize) -> Result<Self> {
        let half = 0.5 * dk * n as f64;
        Self::midpoint(center - half, center + half, n)
    }

    /// The Fourier modes `2π j/(n dx)`, `j = −n/2 … n/2−1`, of a periodic
    /// position grid, in ascending order.
    pub fn periodic_modes(x: &XGrid) -> Result<Self> {
        check_n(x.n)?;
        let dk = 2.0 * PI / (x.n as f64 * x.dx);
        let first = -((x.n / 2) as f64) * dk;
        Ok(KGrid {
            k_min: first,
            dk,
            n: x.n,
            first,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dk(&self) -> f64 {
        self.dk
    }

    pub fn k_min(&self) -> f64 {
        self.k_min
    }

    pub fn k_max(&self) -> f64 {
        self.k_min + self.dk * self.n as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        self.first + j as f64 * self.dk
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n).map(|j| self.node(j))
    }

    /// Position grid starting at `x0` on which this grid's sum is an FFT.
    pub fn conjugate_x_grid(&self, x0: f64) -> XGrid {
        XGrid {
            x0,
            dx: 2.0 * PI / (self.n as f64 * self.dk),
            n: self.n,
        }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::invalid("n", format!("grid size must be a power of two >= 2, got {n}")));
    }
    Ok(())
}

/// `n` positions `x_m = x0 + m·dx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XGrid {
    pub x0: f64,
    pub dx: f64,
    pub n: usize,
}

impl XGrid {
    pub fn new(x0: f64, dx: f64, n: usize) -> Result<Self> {
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::invalid("dx", format!("must be > 0, got {dx}")));
        }
        if n < 2 {
            return Err(Error::invalid("n", "need at least two points"));
        }
        Ok(XGrid { x0, dx, n })
    }

    /// `n` points covering the periodic interval `[x0, x0 + length)`.
    pub fn periodic(x0: f64, length: f64, n: usize) -> Result<Self> {
        check_n(n)?;
        Self::new(x0, length / n as f64, n)
    }

    pub fn x(&self, m: usize) -> f64 {
        self.x0 + m as f64 * self.dx
    }

    pub fn length(&self) -> f64 {
        self.dx * self.n as f64
    }

    pub fn is_conjugate_to(&self, k: &KGrid) -> bool {
        self.n == k.n() && (self.dx * k.dk() * self.n as f64 - 2.0 * PI).abs() < 1e-12 * 2.0 * PI
    }

    pub(crate) fn same_as(&self, other: &XGrid) -> bool {
        self.n == other.n
            && (self.x0 - other.x0).abs() <= 1e-12 * self.length()
            && (self.dx - other.dx).abs() <= 1e-12 * self.dx
    }
}
