//! Closed-form Gaussian packets under a quadratic expansion of ω(k).
//!
//! With `g(k) = exp(−α (k−k₀)²)` and `ω(k) ≈ ω₀ + v_g k′ + β k′²`, the
//! superposition `f(x,t) = ∫ dk g(k) e^{i(kx − ωt)}` integrates exactly to
//!
//! ```text
//! f(x,t) = e^{i(k₀x − ω₀t)} (π/(α + iβt))^{1/2} exp(−(x − v_g t)² / (4(α + iβt)))
//! ```
//!
//! whose intensity is a Gaussian of variance `(α² + β²t²)/α`. The RMS width
//! therefore grows as `√α (1 + β²t²/α²)^{1/2}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::dispersion::DispersionModel;
use crate::error::{Error, Result};

/// Spectral Gaussian `g(k) = exp(−α (k − k₀)²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct GaussianPacketSpec {
    alpha: f64,
    k0: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    alpha: f64,
    k0: f64,
}

impl TryFrom<RawSpec> for GaussianPacketSpec {
    type Error = Error;
    fn try_from(raw: RawSpec) -> Result<Self> {
        GaussianPacketSpec::new(raw.alpha, raw.k0)
    }
}

impl From<GaussianPacketSpec> for RawSpec {
    fn from(s: GaussianPacketSpec) -> Self {
        RawSpec {
            alpha: s.alpha,
            k0: s.k0,
        }
    }
}

impl GaussianPacketSpec {
    pub fn new(alpha: f64, k0: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::invalid("alpha", format!("must be finite and > 0, got {alpha}")));
        }
        if !k0.is_finite() {
            return Err(Error::invalid("k0", "must be finite"));
        }
        Ok(GaussianPacketSpec { alpha, k0 })
    }

    /// Build from the standard deviation of `g` itself, `σ_k = 1/√(2α)`.
    pub fn from_sigma_k(sigma_k: f64, k0: f64) -> Result<Self> {
        if !(sigma_k > 0.0) {
            return Err(Error::invalid("sigma_k", "must be > 0"));
        }
        Self::new(1.0 / (2.0 * sigma_k * sigma_k), k0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn k0(&self) -> f64 {
        self.k0
    }

    /// Standard deviation of `g(k)` read as a Gaussian in `k`.
    pub fn sigma_k(&self) -> f64 {
        (2.0 * self.alpha).sqrt().recip()
    }

    /// RMS width of the `t = 0` intensity, `(Δx)₀ = √α`.
    pub fn initial_width(&self) -> f64 {
        self.alpha.sqrt()
    }

    pub fn amplitude(&self, k: f64) -> f64 {
        let d = k - self.k0;
        (-self.alpha * d * d).exp()
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(alpha, self.k0)
    }

    pub fn with_k0(&self, k0: f64) -> Result<Self> {
        Self::new(self.alpha, k0)
    }
}

/// Taylor data of ω(k) at the carrier: `(ω₀, v_g, β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticPropagator {
    pub omega0: f64,
    pub v_g: f64,
    pub beta: f64,
}

impl QuadraticPropagator {
    pub fn exact(k0: f64, m: &DispersionModel) -> Result<Self> {
        Ok(QuadraticPropagator {
            omega0: m.omega_exact(k0)?,
            v_g: m.group_velocity_exact(k0)?,
            beta: m.gvd_beta_exact(k0)?,
        })
    }

    pub fn first_order(k0: f64, m: &DispersionModel) -> Self {
        QuadraticPropagator {
            omega0: m.omega_first_order(k0),
            v_g: m.group_velocity_first_order(k0),
            beta: m.gvd_beta_first_order(k0),
        }
    }
}

/// Closed-form complex field on the principal branch of the square root.
pub fn analytic_field(x: f64, t: f64, spec: &GaussianPacketSpec, prop: &QuadraticPropagator) -> Complex64 {
    let q = Complex64::new(spec.alpha, prop.beta * t);
    let carrier = Complex64::from_polar(1.0, spec.k0 * x - prop.omega0 * t);
    let xi = x - prop.v_g * t;
    let envelope = (-(xi * xi) / (4.0 * q)).exp();
    carrier * (PI / q).sqrt() * envelope
}

/// `|f|² = (π² / (α² + β²t²))^{1/2} exp(−α (x − v_g t)² / (2(α² + β²t²)))`.
pub fn analytic_intensity(x: f64, t: f64, spec: &GaussianPacketSpec, prop: &QuadraticPropagator) -> f64 {
    let a = spec.alpha;
    let s = a * a + prop.beta * prop.beta * t * t;
    let xi = x - prop.v_g * t;
    (PI * PI / s).sqrt() * (-a * xi * xi / (2.0 * s)).exp()
}

/// `(Δx)_t / (Δx)₀ = (1 + β²t²/α²)^{1/2}`.
pub fn width_ratio(t: f64, spec: &GaussianPacketSpec, prop: &QuadraticPropagator) -> f64 {
    let r = prop.beta * t / spec.alpha;
    (1.0 + r * r).sqrt()
}

/// RMS width at time `t` with β taken from the full rational expression.
pub fn gup_width_exact(t: f64, spec: &GaussianPacketSpec, m: &DispersionModel) -> Result<f64> {
    let prop = QuadraticPropagator::exact(spec.k0, m)?;
    Ok(spec.initial_width() * width_ratio(t, spec, &prop))
}

/// RMS width at time `t` with the first-order β inserted into the broadening law.
pub fn gup_width_first_order(t: f64, spec: &GaussianPacketSpec, m: &DispersionModel) -> f64 {
    let prop = QuadraticPropagator::first_order(spec.k0, m);
    spec.initial_width() * width_ratio(t, spec, &prop)
}

/// Result of the printed first-order width formula; always tagged as literal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrintedWidth {
    pub width: f64,
    pub paper_literal: bool,
}

/// `(Δx)₀ (1 − 3α′ l_p² c k₀ t²/α²)^{1/2}`, evaluated exactly as printed.
///
/// This is not the first-order limit of [`gup_width_exact`]: the correction
/// is linear in α′ where the broadening law gives a β² ∝ α′² term. It is kept
/// only as a diagnostic; use [`gup_width_first_order`] for the approximation.
pub fn gup_width_printed_first_order(
    t: f64,
    spec: &GaussianPacketSpec,
    m: &DispersionModel,
) -> Result<PrintedWidth> {
    let radicand = 1.0 - 3.0 * m.coupling() * m.c() * spec.k0 * t * t / (spec.alpha * spec.alpha);
    if radicand < 0.0 {
        return Err(Error::NegativeRadicand { value: radicand });
    }
    Ok(PrintedWidth {
        width: spec.initial_width() * radicand.sqrt(),
        paper_literal: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec(alpha: f64, k0: f64) -> GaussianPacketSpec {
        GaussianPacketSpec::new(alpha, k0).unwrap()
    }

    #[test]
    fn field_examples() {
        let prop = QuadraticPropagator {
            omega0: 3.0,
            v_g: 0.8,
            beta: -0.2,
        };
        let f = analytic_field(0.0, 0.0, &spec(1.0, 0.0), &prop);
        assert_relative_eq!(f.re, PI.sqrt(), max_relative = 1e-15);
        assert_eq!(f.im, 0.0);

        let still = QuadraticPropagator { omega0: 0.0, ..prop };
        let t = 2.5;
        let f = analytic_field(still.v_g * t, t, &spec(1.0, 0.0), &still);
        let expect = (Complex64::new(PI, 0.0) / Complex64::new(1.0, still.beta * t)).sqrt();
        assert_relative_eq!((f - expect).norm(), 0.0, epsilon = 1e-15);

        let f = analytic_field(1.0, 0.0, &spec(1.0, 2.0), &prop);
        let expect = Complex64::from_polar(PI.sqrt() * (-0.25f64).exp(), 2.0);
        assert_relative_eq!((f - expect).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn intensity_at_origin_and_width() {
        let prop = QuadraticPropagator {
            omega0: 0.0,
            v_g: 1.0,
            beta: 0.3,
        };
        assert_relative_eq!(analytic_intensity(0.0, 0.0, &spec(1.0, 0.0), &prop), PI, max_relative = 1e-15);

        // second moment by trapezoid quadrature over ±12 widths
        for alpha in [0.5, 1.0, 4.0] {
            let s = spec(alpha, 1.0);
            let (mut m0, mut m2) = (0.0, 0.0);
            let n = 4001;
            let half = 12.0 * alpha.sqrt();
            let dx = 2.0 * half / (n - 1) as f64;
            for i in 0..n {
                let x = -half + i as f64 * dx;
                let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                let p = analytic_intensity(x, 0.0, &s, &prop);
                m0 += w * p;
                m2 += w * p * x * x;
            }
            assert_relative_eq!((m2 / m0).sqrt(), alpha.sqrt(), max_relative = 1e-10);
        }
    }

    #[test]
    fn intensity_is_field_modulus_squared() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let s = spec(rng.random_range(0.1..5.0), rng.random_range(-3.0..3.0));
            let prop = QuadraticPropagator {
                omega0: rng.random_range(-2.0..2.0),
                v_g: rng.random_range(-1.5..1.5),
                beta: rng.random_range(-0.5..0.5),
            };
            let t = rng.random_range(-10.0..10.0);
            let x = prop.v_g * t + rng.random_range(-3.0..3.0) * s.initial_width();
            let a = analytic_intensity(x, t, &s, &prop);
            let b = analytic_field(x, t, &s, &prop).norm_sqr();
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn norm_is_time_independent() {
        let s = spec(1.5, 2.0);
        let prop = QuadraticPropagator {
            omega0: 1.0,
            v_g: 0.9,
            beta: 0.4,
        };
        let norm = |t: f64| {
            let width = s.initial_width() * width_ratio(t, &s, &prop);
            let (lo, hi) = (prop.v_g * t - 12.0 * width, prop.v_g * t + 12.0 * width);
            let n = 6001;
            let dx = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| {
                    let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                    w * analytic_intensity(lo + i as f64 * dx, t, &s, &prop)
                })
                .sum::<f64>()
                * dx
        };
        let n0 = norm(0.0);
        for t in [1.0, 5.0, 20.0, 100.0] {
            assert!(((norm(t) - n0) / n0).abs() < 1e-8);
        }
    }

    #[test]
    fn width_ratio_examples() {
        let s = spec(1.0, 0.0);
        let prop = QuadraticPropagator {
            omega0: 0.0,
            v_g: 1.0,
            beta: 0.5,
        };
        assert_eq!(width_ratio(0.0, &s, &prop), 1.0);
        assert_eq!(width_ratio(3.0, &s, &QuadraticPropagator { beta: 0.0, ..prop }), 1.0);
        assert_relative_eq!(width_ratio(2.0, &s, &prop), 2f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn gup_width_examples() {
        let s = spec(1.0, 1.0);
        let free = DispersionModel::new(0.0).unwrap();
        assert_eq!(gup_width_exact(123.0, &s, &free).unwrap(), 1.0);
        let m = DispersionModel::new(0.001).unwrap();
        // β = −0.0029900209640549221 (independent high-precision evaluation)
        assert_relative_eq!(gup_width_exact(10.0, &s, &m).unwrap(), 1.000_446_911_403_373_2, max_relative = 1e-13);
        assert!((gup_width_exact(10.0, &s, &m).unwrap() - 1.000447).abs() < 1e-6);
        assert!(matches!(
            gup_width_exact(1.0, &s, &DispersionModel::new(-1.0).unwrap()),
            Err(Error::DispersionSingularity { .. })
        ));
    }

    #[test]
    fn printed_first_order_examples() {
        let s = spec(1.0, 1.0);
        let m = DispersionModel::new(0.01).unwrap();
        let w = gup_width_printed_first_order(0.0, &s, &m).unwrap();
        assert_eq!(w.width, 1.0);
        assert!(w.paper_literal);
        assert_eq!(
            gup_width_printed_first_order(9.0, &s, &DispersionModel::new(0.0).unwrap()).unwrap().width,
            1.0
        );
        assert_relative_eq!(gup_width_printed_first_order(5.0, &s, &m).unwrap().width, 0.5, max_relative = 1e-14);
        assert!(matches!(
            gup_width_printed_first_order(6.0, &s, &m),
            Err(Error::NegativeRadicand { .. })
        ));
    }

    #[test]
    fn rejects_non_normalizable_spec() {
        assert!(GaussianPacketSpec::new(0.0, 1.0).is_err());
        assert!(GaussianPacketSpec::new(-1.0, 1.0).is_err());
        assert_relative_eq!(GaussianPacketSpec::from_sigma_k(0.02, 1.0).unwrap().alpha(), 1250.0, max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn broadening_is_monotone_and_even(alpha in 0.1f64..10.0, beta in -1.0f64..1.0, t1 in 0.0f64..50.0, dt in 0.0f64..50.0) {
            let s = spec(alpha, 0.0);
            let prop = QuadraticPropagator { omega0: 0.0, v_g: 1.0, beta };
            prop_assert!(width_ratio(t1 + dt, &s, &prop) >= width_ratio(t1, &s, &prop));
            prop_assert_eq!(width_ratio(-t1, &s, &prop), width_ratio(t1, &s, &prop));
        }

        #[test]
        fn gup_width_exceeds_free_width(ap in -0.3f64..0.3, t in -100.0f64..100.0, k0 in 0.1f64..1.5) {
            let s = spec(2.0, k0);
            let m = DispersionModel::new(ap).unwrap();
            prop_assume!(m.epsilon(k0) > -0.5);
            // below these the broadening is under one ulp of the width
            prop_assume!(ap.abs() > 1e-4 && t.abs() > 1.0);
            prop_assert!(gup_width_exact(t, &s, &m).unwrap() > s.initial_width());
            prop_assert_eq!(gup_width_exact(0.0, &s, &m).unwrap(), s.initial_width());
            prop_assert_eq!(gup_width_exact(t, &s, &m.free()).unwrap(), s.initial_width());
        }
    }
}
