//! Explicit leapfrog with second-order central stencils, periodic in x.
//!
//! `u^{n+1} = 2u^n − u^{n−1} + dt² L u^n`, where
//! `L = c² D₂ − σ·2α′ l_p² c² D₄ − m₀²c⁴/ħ²` with the 3-point `D₂` and
//! 5-point `D₄ = D₂²`. Every Fourier mode is an independent oscillator with
//! `Ω²(k) = c²κ² + σ·2α′ l_p² c² κ⁴ + m₀²c⁴/ħ²`, `κ = (2/dx) sin(k dx/2)`,
//! so leapfrog is stable iff `dt·max Ω ≤ 2` and every `Ω² ≥ 0`.

use num_complex::Complex64;

use super::spectral::mode_energies_with;
use super::{unstable_band, GkgParams, GkgState, InstabilityPolicy};
use crate::error::{Error, Result};
use crate::field::FieldSnapshot;
use crate::fourier::fft_wavenumbers;
use crate::grid::XGrid;

/// Safety factor on the leapfrog limit `2/Ω_max`.
pub const STABILITY_FACTOR: f64 = 0.9;

/// `Ω²(k)` of the discrete operator.
pub fn fd_dispersion_sq(k: f64, dx: f64, p: &GkgParams) -> f64 {
    let s = (0.5 * k * dx).sin();
    let kappa2 = 4.0 * s * s / (dx * dx);
    p.c() * p.c() * kappa2 + p.quartic() * kappa2 * kappa2 + p.mass_term()
}

/// `0.9 · 2/Ω_max` over the grid's modes.
pub fn stability_bound(grid: &XGrid, p: &GkgParams) -> f64 {
    let w_max = fft_wavenumbers(grid.n, grid.dx)
        .into_iter()
        .map(|k| fd_dispersion_sq(k, grid.dx, p).max(0.0).sqrt())
        .fold(0.0, f64::max);
    if w_max == 0.0 {
        f64::INFINITY
    } else {
        STABILITY_FACTOR * 2.0 / w_max
    }
}

/// Discrete energy `Σ (|ψ̂̇|² + Ω²|ψ̂|²)` under the stencil's own symbol.
pub fn fd_energy(state: &GkgState, p: &GkgParams) -> f64 {
    let dx = state.grid().dx;
    mode_energies_with(state, |k| fd_dispersion_sq(k, dx, p)).iter().sum()
}

struct Stencil {
    c2: f64,
    quartic: f64,
    mass: f64,
    inv_dx2: f64,
    inv_dx4: f64,
}

impl Stencil {
    fn new(p: &GkgParams, dx: f64) -> Self {
        Stencil {
            c2: p.c() * p.c(),
            // ψ_tt carries −σ·2α′l²c² in front of ∂⁴
            quartic: -p.quartic(),
            mass: p.mass_term(),
            inv_dx2: 1.0 / (dx * dx),
            inv_dx4: 1.0 / (dx * dx * dx * dx),
        }
    }

    fn apply(&self, u: &[Complex64], out: &mut [Complex64]) {
        let n = u.len();
        for i in 0..n {
            let um2 = u[(i + n - 2) % n];
            let um1 = u[(i + n - 1) % n];
            let u0 = u[i];
            let up1 = u[(i + 1) % n];
            let up2 = u[(i + 2) % n];
            let d2 = (up1 - 2.0 * u0 + um1) * self.inv_dx2;
            let d4 = (up2 - 4.0 * up1 + 6.0 * u0 - 4.0 * um1 + um2) * self.inv_dx4;
            out[i] = self.c2 * d2 + self.quartic * d4 - self.mass * u0;
        }
    }
}

/// Leapfrog integrator holding `u^{n−1}` and `u^n`.
pub struct Leapfrog {
    stencil: Stencil,
    grid: XGrid,
    dt: f64,
    t0: f64,
    steps: usize,
    prev: Vec<Complex64>,
    curr: Vec<Complex64>,
    rate0: Vec<Complex64>,
    scratch: Vec<Complex64>,
    band: Option<(f64, f64)>,
}

impl Leapfrog {
    pub fn new(state: &GkgState, p: &GkgParams, dt: f64) -> Result<Self> {
        let grid = state.grid();
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid("dt", format!("must be > 0, got {dt}")));
        }
        let ks = fft_wavenumbers(grid.n, grid.dx);
        let band = unstable_band(&ks, |k| fd_dispersion_sq(k, grid.dx, p));
        if let (Some((k_lo, k_hi)), InstabilityPolicy::Error) = (band, p.instability_policy()) {
            return Err(Error::UnstableModes { k_lo, k_hi });
        }
        let bound = stability_bound(&grid, p);
        if dt > bound {
            return Err(Error::StabilityViolation { dt, bound });
        }
        Ok(Leapfrog {
            stencil: Stencil::new(p, grid.dx),
            grid,
            dt,
            t0: state.t(),
            steps: 0,
            prev: state.psi.values.clone(),
            curr: state.psi.values.clone(),
            rate0: state.psi_dot.values.clone(),
            scratch: vec![Complex64::new(0.0, 0.0); grid.n],
            band,
        })
    }

    pub fn t(&self) -> f64 {
        self.t0 + self.steps as f64 * self.dt
    }

    fn next(&self, lu: &[Complex64]) -> Vec<Complex64> {
        let dt2 = self.dt * self.dt;
        if self.steps == 0 {
            // Taylor start: u¹ = u⁰ + dt v⁰ + dt²/2 L u⁰
            (0..self.grid.n)
                .map(|i| self.curr[i] + self.dt * self.rate0[i] + 0.5 * dt2 * lu[i])
                .collect()
        } else {
            (0..self.grid.n)
                .map(|i| 2.0 * self.curr[i] - self.prev[i] + dt2 * lu[i])
                .collect()
        }
    }

    pub fn advance(&mut self, n_steps: usize) {
        for _ in 0..n_steps {
            self.stencil.apply(&self.curr, &mut self.scratch);
            let next = self.next(&self.scratch);
            self.prev = std::mem::replace(&mut self.curr, next);
            self.steps += 1;
        }
    }

    /// Current field with `ψ̇ = (u^{n+1} − u^{n−1}) / 2dt`.
    pub fn state(&mut self) -> Result<GkgState> {
        let t = self.t();
        let rate = if self.steps == 0 {
            self.rate0.clone()
        } else {
            self.stencil.apply(&self.curr, &mut self.scratch);
            let ahead = self.next(&self.scratch);
            let inv = 0.5 / self.dt;
            ahead.iter().zip(&self.prev).map(|(a, b)| (a - b) * inv).collect()
        };
        Ok(GkgState {
            psi: FieldSnapshot::new(self.grid, t, self.curr.clone())?,
            psi_dot: FieldSnapshot::new(self.grid, t, rate)?,
            unstable_band: self.band,
        })
    }
}

/// Take `n_steps` leapfrog steps of size `dt`.
pub fn evolve_fd(state: &GkgState, p: &GkgParams, dt: f64, n_steps: usize) -> Result<GkgState> {
    let mut lf = Leapfrog::new(state, p, dt)?;
    lf.advance(n_steps);
    lf.state()
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use crate::packet::GaussianPacketSpec;

    fn setup(n: usize) -> (GkgState, GkgParams, XGrid) {
        let grid = XGrid::periodic(-20.0, 40.0, n).unwrap();
        let spec = GaussianPacketSpec::new(1.0, 2.0).unwrap();
        let p = GkgParams::new(0.0).unwrap();
        (build_initial_data(&spec, &p, Branch::PositiveFrequency, &grid).unwrap(), p, grid)
    }

    #[test]
    fn zero_steps_is_identity() {
        let (s, p, g) = setup(128);
        let out = evolve_fd(&s, &p, 0.5 * stability_bound(&g, &p), 0).unwrap();
        assert_eq!(out.psi, s.psi);
        assert_eq!(out.psi_dot, s.psi_dot);
    }

    #[test]
    fn rejects_steps_above_bound() {
        let (s, p, g) = setup(128);
        let bound = stability_bound(&g, &p);
        // wave-equation check: Ω_max = 2c/dx
        approx::assert_relative_eq!(bound, 0.9 * g.dx, max_relative = 1e-12);
        assert!(matches!(
            evolve_fd(&s, &p, 2.0 * bound, 10),
            Err(Error::StabilityViolation { .. })
        ));
        assert!(evolve_fd(&s, &p, bound, 10).is_ok());
    }

    #[test]
    fn second_order_convergence_wave_equation() {
        let t_end = 2.0;
        let mut errors = Vec::new();
        for n in [128usize, 256, 512] {
            let (s, p, g) = setup(n);
            let steps = (t_end / (0.25 * g.dx)).round() as usize;
            let fd = evolve_fd(&s, &p, t_end / steps as f64, steps).unwrap();
            let exact = evolve_spectral(&s, &p, t_end).unwrap();
            errors.push(fd.psi.relative_l2_diff(&exact.psi));
        }
        for w in errors.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order > 1.8, "{errors:?}");
        }
    }

    #[test]
    fn oversized_step_actually_blows_up() {
        let (s, p, g) = setup(128);
        let limit = 2.0 / (2.0 / g.dx);
        let mut lf = Leapfrog { ..Leapfrog::new(&s, &p, 0.5 * limit).unwrap() };
        lf.dt = 1.05 * limit;
        lf.advance(400);
        let blown = lf.state().unwrap();
        let peak = blown.psi.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(peak > 1e3);
    }
}
