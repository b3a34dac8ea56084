//! The generalized momentum operator `p = (ħ/i)(1 + β′((ħ/i)∂ₓ)²)∂ₓ` and
//! its square `−ħ²∂ₓ² + 2β′ħ⁴∂ₓ⁴`, both applied spectrally.
//!
//! Plane waves `e^{ikx}` are eigenfunctions with eigenvalues
//! `ħk(1 + β′ħ²k²)` and `ħ²k²(1 + 2β′ħ²k²)`. Squaring the first eigenvalue
//! exceeds the second by `β′²ħ⁶k⁶`: the square operator is only the
//! first-order truncation of applying `p` twice.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use super::GkgParams;
use crate::error::Result;
use crate::field::FieldSnapshot;
use crate::fourier::{fft_wavenumbers, Fourier};
use crate::grid::XGrid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentumOperator {
    pub beta_prime: f64,
    pub hbar: f64,
}

impl MomentumOperator {
    pub fn from_params(p: &GkgParams) -> Self {
        MomentumOperator {
            beta_prime: p.beta_prime(),
            hbar: p.hbar(),
        }
    }

    pub fn eigenvalue(&self, k: f64) -> f64 {
        let hk = self.hbar * k;
        hk * (1.0 + self.beta_prime * hk * hk)
    }

    pub fn eigenvalue_sq(&self, k: f64) -> f64 {
        let hk2 = (self.hbar * k).powi(2);
        hk2 * (1.0 + 2.0 * self.beta_prime * hk2)
    }

    /// `eigenvalue(k)² − eigenvalue_sq(k) = β′²ħ⁶k⁶`.
    pub fn composition_discrepancy(&self, k: f64) -> f64 {
        self.eigenvalue(k).powi(2) - self.eigenvalue_sq(k)
    }

    fn apply_symbol(&self, f: &FieldSnapshot, symbol: impl Fn(f64) -> f64) -> FieldSnapshot {
        let n = f.values.len();
        let fourier = Fourier::new(n);
        let mut v = f.values.clone();
        fourier.forward(&mut v);
        for (x, k) in v.iter_mut().zip(fft_wavenumbers(n, f.dx)) {
            *x *= symbol(k);
        }
        fourier.inverse(&mut v);
        FieldSnapshot { values: v, ..f.clone() }
    }

    pub fn apply(&self, f: &FieldSnapshot) -> FieldSnapshot {
        self.apply_symbol(f, |k| self.eigenvalue(k))
    }

    pub fn apply_sq(&self, f: &FieldSnapshot) -> FieldSnapshot {
        self.apply_symbol(f, |k| self.eigenvalue_sq(k))
    }
}

pub fn apply_momentum_op(f: &FieldSnapshot, p: &GkgParams) -> FieldSnapshot {
    MomentumOperator::from_params(p).apply(f)
}

pub fn apply_momentum_op_sq(f: &FieldSnapshot, p: &GkgParams) -> FieldSnapshot {
    MomentumOperator::from_params(p).apply_sq(f)
}

/// Eigenvalues at `k` and the worst relative deviation measured by applying
/// both operators to a grid plane wave `e^{ikx}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OpCheck {
    pub eigenvalue_p: f64,
    pub eigenvalue_p_sq: f64,
    pub relative_error: f64,
    pub composition_discrepancy: f64,
}

pub fn opcheck(beta_prime: f64, k: f64, hbar: f64) -> Result<OpCheck> {
    let op = MomentumOperator { beta_prime, hbar };
    // a periodic grid on which k is the fifth Fourier mode
    const N: usize = 64;
    const MODE: f64 = 5.0;
    let length = if k == 0.0 { 2.0 * PI } else { 2.0 * PI * MODE / k.abs() };
    let grid = XGrid::periodic(0.0, length, N)?;
    let wave = FieldSnapshot::from_fn(grid, 0.0, |x| Complex64::from_polar(1.0, k * x));
    let relative_error = [
        (op.apply(&wave), op.eigenvalue(k)),
        (op.apply_sq(&wave), op.eigenvalue_sq(k)),
    ]
    .iter()
    .flat_map(|(out, lambda)| {
        out.values.iter().zip(&wave.values).map(move |(o, w)| {
            let err = (o - w * lambda).norm();
            if *lambda == 0.0 {
                err
            } else {
                err / lambda.abs()
            }
        })
    })
    .fold(0.0, f64::max);
    Ok(OpCheck {
        eigenvalue_p: op.eigenvalue(k),
        eigenvalue_p_sq: op.eigenvalue_sq(k),
        relative_error,
        composition_discrepancy: op.composition_discrepancy(k),
    })
}
