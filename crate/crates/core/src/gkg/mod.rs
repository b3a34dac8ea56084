//! The generalized (fourth-order) Klein-Gordon equation
//!
//! ```text
//! ψ_tt = c² ψ_xx − σ·2α′ l_p² c² ψ_xxxx − (m₀² c⁴/ħ²) ψ
//! ```
//!
//! on a periodic 1-D domain, with plane-wave relation
//! `ω² = c²k² + σ·2α′ l_p² c² k⁴ + m₀²c⁴/ħ²`.
//!
//! The sign `σ` is selectable. [`SignConvention::Consistent`] (`σ = −1`) is
//! the sign that reproduces the first-order expansion
//! `ω ≈ ck(1 − α′ l_p² k²)` of the exact relation; [`SignConvention::Literal`]
//! (`σ = +1`) is the ∂⁴ sign as printed. For `σ = −1, α′ > 0` modes with
//! `k > 1/(l_p √(2α′))` have `ω² < 0` and grow exponentially, which is what
//! [`InstabilityPolicy`] governs.

mod fd;
mod momentum;
mod spectral;

pub use fd::{evolve_fd, fd_dispersion_sq, fd_energy, stability_bound, Leapfrog};
pub use momentum::{apply_momentum_op, apply_momentum_op_sq, opcheck, MomentumOperator, OpCheck};
pub use spectral::{energy, evolve_spectral, mode_energies};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dispersion::Dispersion;
use crate::error::{Error, Result};
use crate::field::FieldSnapshot;
use crate::grid::{KGrid, XGrid};
use crate::packet::GaussianPacketSpec;
use crate::spectral::{sample_spectrum, synthesize, Spectrum, DEFAULT_N_SIGMA};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SignConvention {
    #[default]
    #[serde(rename = "derivation_consistent")]
    Consistent,
    #[serde(rename = "paper_literal")]
    Literal,
}

impl SignConvention {
    /// Sign of the `k⁴` term in ω².
    fn sigma(self) -> f64 {
        match self {
            SignConvention::Consistent => -1.0,
            SignConvention::Literal => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SignConvention::Consistent => "derivation_consistent",
            SignConvention::Literal => "paper_literal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstabilityPolicy {
    #[default]
    Error,
    AllowFlagged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `ψ̇̂ = −iω ψ̂` per mode: a single forward-rotating branch.
    PositiveFrequency,
    /// `ψ̇ = 0`: equal superposition of both branches.
    Standing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct GkgParams {
    alpha_prime: f64,
    l_p: f64,
    c: f64,
    hbar: f64,
    m0: f64,
    sign_convention: SignConvention,
    instability_policy: InstabilityPolicy,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    alpha_prime: f64,
    #[serde(default = "one")]
    l_p: f64,
    #[serde(default = "one")]
    c: f64,
    #[serde(default = "one")]
    hbar: f64,
    #[serde(default)]
    m0: f64,
    #[serde(default)]
    sign_convention: SignConvention,
    #[serde(default)]
    instability_policy: InstabilityPolicy,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<RawParams> for GkgParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        GkgParams::with_units(r.alpha_prime, r.l_p, r.c, r.hbar, r.m0).map(|p| {
            p.with_convention(r.sign_convention)
                .with_policy(r.instability_policy)
        })
    }
}

impl From<GkgParams> for RawParams {
    fn from(p: GkgParams) -> Self {
        RawParams {
            alpha_prime: p.alpha_prime,
            l_p: p.l_p,
            c: p.c,
            hbar: p.hbar,
            m0: p.m0,
            sign_convention: p.sign_convention,
            instability_policy: p.instability_policy,
        }
    }
}

impl GkgParams {
    /// Natural units, massless, consistent sign, unstable modes rejected.
    pub fn new(alpha_prime: f64) -> Result<Self> {
        Self::with_units(alpha_prime, 1.0, 1.0, 1.0, 0.0)
    }

    pub fn with_units(alpha_prime: f64, l_p: f64, c: f64, hbar: f64, m0: f64) -> Result<Self> {
        if !alpha_prime.is_finite() {
            return Err(Error::invalid("alpha_prime", "must be finite"));
        }
        for (name, v) in [("l_p", l_p), ("c", c), ("hbar", hbar)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        if !(m0.is_finite() && m0 >= 0.0) {
            return Err(Error::invalid("m0", format!("must be finite and >= 0, got {m0}")));
        }
        Ok(GkgParams {
            alpha_prime,
            l_p,
            c,
            hbar,
            m0,
            sign_convention: SignConvention::default(),
            instability_policy: InstabilityPolicy::default(),
        })
    }

    pub fn with_convention(mut self, sign_convention: SignConvention) -> Self {
        self.sign_convention = sign_convention;
        self
    }

    pub fn with_policy(mut self, instability_policy: InstabilityPolicy) -> Self {
        self.instability_policy = instability_policy;
        self
    }

    pub fn with_mass(self, m0: f64) -> Result<Self> {
        Self::with_units(self.alpha_prime, self.l_p, self.c, self.hbar, m0).map(|p| {
            p.with_convention(self.sign_convention)
                .with_policy(self.instability_policy)
        })
    }

    pub fn alpha_prime(&self) -> f64 {
        self.alpha_prime
    }
    pub fn l_p(&self) -> f64 {
        self.l_p
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn hbar(&self) -> f64 {
        self.hbar
    }
    pub fn m0(&self) -> f64 {
        self.m0
    }
    pub fn sign_convention(&self) -> SignConvention {
        self.sign_convention
    }
    pub fn instability_policy(&self) -> InstabilityPolicy {
        self.instability_policy
    }

    /// `β′ = α′ l_p² / ħ²`, the momentum-operator coefficient.
    pub fn beta_prime(&self) -> f64 {
        self.alpha_prime * self.l_p * self.l_p / (self.hbar * self.hbar)
    }

    /// `m₀² c⁴ / ħ²`.
    pub fn mass_term(&self) -> f64 {
        let mc2 = self.m0 * self.c * self.c / self.hbar;
        mc2 * mc2
    }

    /// Coefficient of `k⁴` in ω² under the selected convention.
    pub(crate) fn quartic(&self) -> f64 {
        self.sign_convention.sigma() * 2.0 * self.alpha_prime * self.l_p * self.l_p * self.c * self.c
    }
}

/// `ω²(k)` implied by the PDE; negative values mean exponential growth.
pub fn gkg_dispersion_sq(k: f64, p: &GkgParams) -> f64 {
    let k2 = k * k;
    p.c * p.c * k2 + p.quartic() * k2 * k2 + p.mass_term()
}

/// The non-negative root `ω = √ω²(k)`, usable wherever a [`Dispersion`] is.
#[derive(Debug, Clone, Copy)]
pub struct GkgBranch(pub GkgParams);

impl Dispersion for GkgBranch {
    fn omega(&self, k: f64) -> Result<f64> {
        let w2 = gkg_dispersion_sq(k, &self.0);
        if w2 < 0.0 {
            return Err(Error::UnstableModes { k_lo: k.abs(), k_hi: k.abs() });
        }
        Ok(w2.sqrt())
    }
}

/// Field and its time derivative at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct GkgState {
    pub psi: FieldSnapshot,
    pub psi_dot: FieldSnapshot,
    /// `|k|` range of modes that grew exponentially during the last
    /// evolution, when the policy allowed it.
    pub unstable_band: Option<(f64, f64)>,
}

impl GkgState {
    pub fn new(psi: FieldSnapshot, psi_dot: FieldSnapshot) -> Result<Self> {
        if !psi.grid().same_as(&psi_dot.grid()) || psi.t != psi_dot.t {
            return Err(Error::GridMismatch("psi and psi_dot must share grid and time".into()));
        }
        Ok(GkgState {
            psi,
            psi_dot,
            unstable_band: None,
        })
    }

    pub fn t(&self) -> f64 {
        self.psi.t
    }

    pub fn grid(&self) -> XGrid {
        self.psi.grid()
    }
}

/// Range of `|k|` over `ks` where `w2` is negative.
pub(crate) fn unstable_band(ks: &[f64], w2: impl Fn(f64) -> f64) -> Option<(f64, f64)> {
    ks.iter()
        .filter(|&&k| w2(k) < 0.0)
        .map(|k| k.abs())
        .fold(None, |acc, k| match acc {
            None => Some((k, k)),
            Some((lo, hi)) => Some((f64::min(lo, k), f64::max(hi, k))),
        })
}

/// Initial data from the Gaussian spectrum sampled on the Fourier modes of
/// a periodic grid: `ψ(x,0) = Σ dk g(k) e^{ikx}`, and `ψ̇` per `branch`.
pub fn build_initial_data(
    spec: &GaussianPacketSpec,
    p: &GkgParams,
    branch: Branch,
    grid: &XGrid,
) -> Result<GkgState> {
    let modes = KGrid::periodic_modes(grid)?;
    let spectrum = sample_spectrum(spec, &modes, DEFAULT_N_SIGMA)?;
    let free = |_: f64| Ok(0.0);
    let psi = synthesize(&spectrum, &FnDispersion(free), 0.0, grid)?;
    let psi_dot = match branch {
        Branch::Standing => FieldSnapshot::new(*grid, 0.0, vec![Complex64::new(0.0, 0.0); grid.n])?,
        Branch::PositiveFrequency => {
            let half = DEFAULT_N_SIGMA * spec.sigma_k();
            let support: Vec<f64> = modes.nodes().filter(|k| (k - spec.k0()).abs() <= half).collect();
            if let Some((k_lo, k_hi)) = unstable_band(&support, |k| gkg_dispersion_sq(k, p)) {
                return Err(Error::UnstableModes { k_lo, k_hi });
            }
            let rate = Spectrum::from_fn(modes, |k| {
                let w = gkg_dispersion_sq(k, p).max(0.0).sqrt();
                Complex64::new(0.0, -w) * spec.amplitude(k)
            });
            synthesize(&rate, &FnDispersion(free), 0.0, grid)?
        }
    };
    GkgState::new(psi, psi_dot)
}

struct FnDispersion<F>(F);

impl<F: Fn(f64) -> Result<f64> + Sync> Dispersion for FnDispersion<F> {
    fn omega(&self, k: f64) -> Result<f64> {
        (self.0)(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn dispersion_sq_examples() {
        assert_eq!(gkg_dispersion_sq(2.0, &GkgParams::new(0.0).unwrap()), 4.0);
        let p = GkgParams::new(0.01).unwrap();
        assert_relative_eq!(gkg_dispersion_sq(1.0, &p), 0.98, epsilon = 1e-15);
        let lit = p.with_convention(SignConvention::Literal);
        assert_relative_eq!(gkg_dispersion_sq(1.0, &lit), 1.02, epsilon = 1e-15);
        let massive = GkgParams::with_units(0.0, 1.0, 2.0, 0.5, 0.25).unwrap();
        // m₀²c⁴/ħ² = 0.0625·16/0.25 = 4
        assert_relative_eq!(gkg_dispersion_sq(0.0, &massive), 4.0, epsilon = 1e-15);
    }

    #[test]
    fn params_validation() {
        assert!(GkgParams::with_units(0.0, 1.0, 1.0, 1.0, -1.0).is_err());
        assert!(GkgParams::with_units(0.0, 1.0, 1.0, 0.0, 0.0).is_err());
        let p = GkgParams::with_units(0.02, 2.0, 1.0, 0.5, 0.0).unwrap();
        assert_relative_eq!(p.beta_prime(), 0.02 * 4.0 / 0.25, max_relative = 1e-15);
    }

    #[test]
    fn config_names() {
        let p: GkgParams = serde_json::from_str(
            r#"{"alpha_prime": 0.1, "sign_convention": "paper_literal", "instability_policy": "allow_flagged"}"#,
        )
        .unwrap();
        assert_eq!(p.sign_convention(), SignConvention::Literal);
        assert_eq!(p.instability_policy(), InstabilityPolicy::AllowFlagged);
        assert!(serde_json::from_str::<GkgParams>(r#"{"alpha_prime": 0.1, "m0": -2}"#).is_err());
    }

    #[test]
    fn standing_data_has_zero_rate() {
        let spec = GaussianPacketSpec::new(1.0, 2.0).unwrap();
        let grid = XGrid::periodic(-20.0, 40.0, 256).unwrap();
        let s = build_initial_data(&spec, &GkgParams::new(0.0).unwrap(), Branch::Standing, &grid).unwrap();
        assert!(s.psi_dot.values.iter().all(|v| v.norm() == 0.0));
        assert!(s.psi.values.iter().any(|v| v.norm() > 1.0));
    }

    #[test]
    fn positive_frequency_rejects_unstable_support() {
        // k_crit = 1/√(2α′) = 5 sits inside the spectrum around k₀ = 5
        let spec = GaussianPacketSpec::new(1.0, 5.0).unwrap();
        let grid = XGrid::periodic(-20.0, 40.0, 256).unwrap();
        let p = GkgParams::new(0.02).unwrap();
        assert!(matches!(
            build_initial_data(&spec, &p, Branch::PositiveFrequency, &grid),
            Err(Error::UnstableModes { .. })
        ));
    }

    proptest! {
        #[test]
        fn convention_gap_is_quartic(ap in -0.1f64..0.1, k in -20.0f64..20.0, m0 in 0.0f64..3.0) {
            let p = GkgParams::with_units(ap, 1.3, 0.9, 1.1, m0).unwrap();
            let lit = p.with_convention(SignConvention::Literal);
            let gap = gkg_dispersion_sq(k, &lit) - gkg_dispersion_sq(k, &p);
            let expect = 4.0 * ap * 1.3f64.powi(2) * 0.81 * k.powi(4);
            let scale = gkg_dispersion_sq(k, &lit).abs().max(gkg_dispersion_sq(k, &p).abs()).max(expect.abs());
            prop_assert!((gap - expect).abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE));
        }
    }
}
