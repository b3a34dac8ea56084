//! Exact per-mode propagation of the linear GKG equation.

use num_complex::Complex64;

use super::{gkg_dispersion_sq, unstable_band, GkgParams, GkgState, InstabilityPolicy};
use crate::error::{Error, Result};
use crate::field::FieldSnapshot;
use crate::fourier::{fft_wavenumbers, Fourier};

pub(super) fn transform(state: &GkgState) -> (Fourier, Vec<Complex64>, Vec<Complex64>) {
    let fourier = Fourier::new(state.psi.values.len());
    let mut a = state.psi.values.clone();
    let mut b = state.psi_dot.values.clone();
    fourier.forward(&mut a);
    fourier.forward(&mut b);
    (fourier, a, b)
}

/// Advance by `t` with each Fourier mode solved in closed form:
/// `ψ̂(t) = ψ̂₀ cos ωt + (ψ̂̇₀/ω) sin ωt`, `ψ̂₀ + ψ̂̇₀ t` at `ω = 0`, and
/// `cosh`/`sinh` growth for `ω² < 0` when the policy allows it.
pub fn evolve_spectral(state: &GkgState, p: &GkgParams, t: f64) -> Result<GkgState> {
    let grid = state.grid();
    let ks = fft_wavenumbers(grid.n, grid.dx);
    let band = unstable_band(&ks, |k| gkg_dispersion_sq(k, p));
    if let (Some((k_lo, k_hi)), InstabilityPolicy::Error) = (band, p.instability_policy()) {
        return Err(Error::UnstableModes { k_lo, k_hi });
    }
    if t == 0.0 {
        return Ok(state.clone());
    }
    let (fourier, mut a, mut b) = transform(state);
    for ((k, a), b) in ks.iter().zip(a.iter_mut()).zip(b.iter_mut()) {
        let w2 = gkg_dispersion_sq(*k, p);
        let (a0, b0) = (*a, *b);
        if w2 > 0.0 {
            let w = w2.sqrt();
            let (s, c) = (w * t).sin_cos();
            *a = a0 * c + b0 * (s / w);
            *b = -a0 * (w * s) + b0 * c;
        } else if w2 == 0.0 {
            *a = a0 + b0 * t;
        } else {
            let g = (-w2).sqrt();
            let (s, c) = ((g * t).sinh(), (g * t).cosh());
            *a = a0 * c + b0 * (s / g);
            *b = a0 * (g * s) + b0 * c;
        }
    }
    fourier.inverse(&mut a);
    fourier.inverse(&mut b);
    let t_new = state.t() + t;
    Ok(GkgState {
        psi: FieldSnapshot::new(grid, t_new, a)?,
        psi_dot: FieldSnapshot::new(grid, t_new, b)?,
        unstable_band: band,
    })
}

/// Per-mode `(dx/n)(|ψ̂̇|² + ω²|ψ̂|²)` in FFT order, under `w2`.
pub(super) fn mode_energies_with(state: &GkgState, w2: impl Fn(f64) -> f64) -> Vec<f64> {
    let grid = state.grid();
    let ks = fft_wavenumbers(grid.n, grid.dx);
    let (_, a, b) = transform(state);
    let scale = grid.dx / grid.n as f64;
    ks.iter()
        .zip(a.iter().zip(&b))
        .map(|(k, (a, b))| scale * (b.norm_sqr() + w2(*k) * a.norm_sqr()))
        .collect()
}

/// Per-mode energy under the continuous relation; by Parseval the sum is
/// `∫ (|ψ_t|² + |c ψ_x|² + …) dx`.
pub fn mode_energies(state: &GkgState, p: &GkgParams) -> Vec<f64> {
    mode_energies_with(state, |k| gkg_dispersion_sq(k, p))
}

pub fn energy(state: &GkgState, p: &GkgParams) -> f64 {
    mode_energies(state, p).iter().sum()
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use crate::grid::XGrid;
    use crate::packet::GaussianPacketSpec;
    use crate::spectral::synthesize;

    // Nyquist ≈ 13.4, below the α′ = 1e-3 instability threshold 22.4
    fn grid() -> XGrid {
        XGrid::periodic(-30.0, 60.0, 256).unwrap()
    }

    #[test]
    fn zero_time_is_identity() {
        let spec = GaussianPacketSpec::new(1.0, 2.0).unwrap();
        let p = GkgParams::new(1e-3).unwrap();
        let s = build_initial_data(&spec, &p, Branch::PositiveFrequency, &grid()).unwrap();
        assert_eq!(evolve_spectral(&s, &p, 0.0).unwrap(), s);
    }

    #[test]
    fn massless_free_limit_matches_synthesis() {
        // negligible weight at k <= 0, where c|k| and ck differ
        let spec = GaussianPacketSpec::new(1.0, 6.0).unwrap();
        let p = GkgParams::new(0.0).unwrap();
        let g = grid();
        let s = build_initial_data(&spec, &p, Branch::PositiveFrequency, &g).unwrap();
        let modes = crate::grid::KGrid::periodic_modes(&g).unwrap();
        let spectrum = crate::spectral::sample_spectrum(&spec, &modes, 6.0).unwrap();
        let free = crate::dispersion::DispersionModel::new(0.0).unwrap();
        for t in [0.5, 3.0, 10.0] {
            let evolved = evolve_spectral(&s, &p, t).unwrap();
            // ω = ck and ω = c|k| agree on the (k > 0) support
            let reference = synthesize(&spectrum, &free, t, &g).unwrap();
            assert!(evolved.psi.max_abs_diff(&reference) < 1e-10);
        }
    }

    #[test]
    fn unstable_modes_rejected_or_flagged() {
        // consistent sign, α′ = 0.02: ω² < 0 above |k| = 5; grid Nyquist ≈ 13.4
        let spec = GaussianPacketSpec::new(2.0, 1.0).unwrap();
        let p = GkgParams::new(0.02).unwrap();
        let s = build_initial_data(&spec, &p, Branch::PositiveFrequency, &grid()).unwrap();
        match evolve_spectral(&s, &p, 1.0) {
            Err(Error::UnstableModes { k_lo, k_hi }) => {
                assert!(k_lo > 5.0 && k_lo < 5.2, "{k_lo}");
                assert!(k_hi > 13.0);
            }
            other => panic!("expected UnstableModes, got {other:?}"),
        }
        let lenient = p.with_policy(InstabilityPolicy::AllowFlagged);
        let out = evolve_spectral(&s, &lenient, 1.0).unwrap();
        assert!(out.unstable_band.is_some());
    }

    #[test]
    fn energy_conserved_per_mode() {
        let spec = GaussianPacketSpec::new(0.7, 2.0).unwrap();
        let p = GkgParams::with_units(1e-3, 1.0, 1.0, 1.0, 0.8).unwrap();
        let s = build_initial_data(&spec, &p, Branch::Standing, &grid()).unwrap();
        let e0 = mode_energies(&s, &p);
        let total: f64 = e0.iter().sum();
        for t in [0.3, 7.0, 55.5] {
            let e = mode_energies(&evolve_spectral(&s, &p, t).unwrap(), &p);
            for (a, b) in e.iter().zip(&e0) {
                assert!((a - b).abs() < 1e-12 * total);
                if *b > 1e-6 * total {
                    assert!(((a - b) / b).abs() < 1e-12, "{a} vs {b}");
                }
            }
        }
    }
}
