//! GUP-modified dispersion relation and the quantities derived from it.
//!
//! Treating the reduced wavelength as the position uncertainty and `ħk` as
//! the momentum uncertainty in `Δx ≥ ħ/Δp + α′ l_p² Δp/ħ` gives
//!
//! ```text
//! λ̄(k) = 1/k + α′ l_p² k,        ω(k) = c/λ̄ = kc / (1 + α′ l_p² k²)
//! ```
//!
//! Everything here is a pure function of `k` and a [`DispersionModel`]. The
//! dimensionless combination `ε = α′ l_p² k²` controls every correction; with
//! `α′ = 0` all quantities reduce exactly to `ω = ck`, `v_g = c`, `β = 0`.
//!
//! For `α′ < 0` the denominator `1 + ε` vanishes at `k = 1/(l_p √|α′|)`.
//! Evaluations closer than [`SINGULARITY_TOL`] to that pole return
//! [`Error::DispersionSingularity`] rather than a huge number.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `|1 + α′ l_p² k²|` below this is treated as the pole.
pub const SINGULARITY_TOL: f64 = 1e-12;

/// Parameters of the modified dispersion relation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub struct DispersionModel {
    alpha_prime: f64,
    l_p: f64,
    c: f64,
    hbar: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    alpha_prime: f64,
    #[serde(default = "one")]
    l_p: f64,
    #[serde(default = "one")]
    c: f64,
    #[serde(default = "one")]
    hbar: f64,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<RawModel> for DispersionModel {
    type Error = Error;

    fn try_from(raw: RawModel) -> Result<Self> {
        DispersionModel::with_units(raw.alpha_prime, raw.l_p, raw.c, raw.hbar)
    }
}

impl From<DispersionModel> for RawModel {
    fn from(m: DispersionModel) -> Self {
        RawModel {
            alpha_prime: m.alpha_prime,
            l_p: m.l_p,
            c: m.c,
            hbar: m.hbar,
        }
    }
}

/// ω, v_g and β evaluated together at one wave number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersionSample {
    pub k: f64,
    pub omega: f64,
    pub v_g: f64,
    pub beta: f64,
}

/// Anything that maps a wave number to a real angular frequency.
///
/// The Fourier synthesizer is generic over this so that the exact GUP
/// relation, its first-order truncation, and the generalized Klein-Gordon
/// branch can all be propagated by the same code.
pub trait Dispersion: Sync {
    fn omega(&self, k: f64) -> Result<f64>;
}

impl DispersionModel {
    /// Natural units: `l_p = c = ħ = 1`.
    pub fn new(alpha_prime: f64) -> Result<Self> {
        Self::with_units(alpha_prime, 1.0, 1.0, 1.0)
    }

    pub fn with_units(alpha_prime: f64, l_p: f64, c: f64, hbar: f64) -> Result<Self> {
        if !alpha_prime.is_finite() {
            return Err(Error::invalid("alpha_prime", "must be finite"));
        }
        for (name, v) in [("l_p", l_p), ("c", c), ("hbar", hbar)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        Ok(DispersionModel {
            alpha_prime,
            l_p,
            c,
            hbar,
        })
    }

    /// The dispersionless reference with the same units.
    pub fn free(&self) -> Self {
        DispersionModel {
            alpha_prime: 0.0,
            ..*self
        }
    }

    /// Same units, different `α′`.
    pub fn with_alpha_prime(&self, alpha_prime: f64) -> Result<Self> {
        Self::with_units(alpha_prime, self.l_p, self.c, self.hbar)
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

    /// `α′ l_p²`, the coefficient of `k²` in every denominator.
    pub fn coupling(&self) -> f64 {
        self.alpha_prime * self.l_p * self.l_p
    }

    /// `ε = α′ l_p² k²`.
    pub fn epsilon(&self, k: f64) -> f64 {
        self.coupling() * k * k
    }

    /// Location of the pole `k = 1/(l_p √|α′|)`; only exists for `α′ < 0`.
    pub fn pole(&self) -> Option<f64> {
        (self.alpha_prime < 0.0).then(|| 1.0 / (self.l_p * (-self.alpha_prime).sqrt()))
    }

    fn denominator(&self, k: f64) -> Result<f64> {
        let d = 1.0 + self.epsilon(k);
        if d.abs() < SINGULARITY_TOL {
            Err(Error::DispersionSingularity { k, denominator: d })
        } else {
            Ok(d)
        }
    }

    /// Reduced wavelength `λ̄ = 1/k + α′ l_p² k`.
    pub fn gen_wavelength(&self, k: f64) -> Result<f64> {
        if !(k > 0.0) {
            return Err(Error::invalid("k", format!("wave number must be > 0, got {k}")));
        }
        let value = 1.0 / k + self.coupling() * k;
        if value <= 0.0 {
            return Err(Error::NonPositiveWavelength { k, value });
        }
        Ok(value)
    }

    /// `ω(k) = kc / (1 + α′ l_p² k²)`.
    pub fn omega_exact(&self, k: f64) -> Result<f64> {
        let d = self.denominator(k)?;
        Ok(k * self.c / d)
    }

    /// `ω ≈ kc (1 − α′ l_p² k²)`.
    pub fn omega_first_order(&self, k: f64) -> f64 {
        k * self.c * (1.0 - self.epsilon(k))
    }

    /// `v_g = dω/dk = c (1 − ε) / (1 + ε)²`.
    pub fn group_velocity_exact(&self, k0: f64) -> Result<f64> {
        let d = self.denominator(k0)?;
        Ok(self.c * (1.0 - self.epsilon(k0)) / (d * d))
    }

    /// `v_g ≈ c (1 − 3ε)`.
    pub fn group_velocity_first_order(&self, k0: f64) -> f64 {
        self.c * (1.0 - 3.0 * self.epsilon(k0))
    }

    /// `β = ½ d²ω/dk²`, evaluated from the full rational expression
    /// `[−3a c k (1+ε)² + 4a² c k³ (1+ε)] / (1+ε)⁴` with `a = α′ l_p²`.
    pub fn gvd_beta_exact(&self, k0: f64) -> Result<f64> {
        let d = self.denominator(k0)?;
        let a = self.coupling();
        let c = self.c;
        let num = -3.0 * a * c * k0 * d * d + 4.0 * a * a * c * k0.powi(3) * d;
        Ok(num / d.powi(4))
    }

    /// `β ≈ −3 α′ l_p² c k₀`.
    pub fn gvd_beta_first_order(&self, k0: f64) -> f64 {
        -3.0 * self.coupling() * self.c * k0
    }

    /// `d³ω/dk³ = −6ac (ε² − 6ε + 1) / (1+ε)⁴`. Used to bound the time window
    /// over which the quadratic expansion of ω stays accurate.
    pub fn omega_third_derivative(&self, k0: f64) -> Result<f64> {
        let d = self.denominator(k0)?;
        let e = self.epsilon(k0);
        Ok(-6.0 * self.coupling() * self.c * (e * e - 6.0 * e + 1.0) / d.powi(4))
    }

    /// Wave-number dependent Planck constant `ħ′ = ħ (1 − α′ l_p² k²)`.
    pub fn effective_planck(&self, k: f64) -> f64 {
        self.hbar * (1.0 - self.epsilon(k))
    }

    /// `E′(p) = pc / (1 + α′ (l_p p / ħ)²)`.
    pub fn energy_of_momentum(&self, p: f64) -> Result<f64> {
        let k = p / self.hbar;
        let d = 1.0 + self.epsilon(k);
        if d.abs() < SINGULARITY_TOL {
            return Err(Error::DispersionSingularity { k, denominator: d });
        }
        Ok(p * self.c / d)
    }

    pub fn sample_exact(&self, k: f64) -> Result<DispersionSample> {
        Ok(DispersionSample {
            k,
            omega: self.omega_exact(k)?,
            v_g: self.group_velocity_exact(k)?,
            beta: self.gvd_beta_exact(k)?,
        })
    }

    pub fn sample_first_order(&self, k: f64) -> DispersionSample {
        DispersionSample {
            k,
            omega: self.omega_first_order(k),
            v_g: self.group_velocity_first_order(k),
            beta: self.gvd_beta_first_order(k),
        }
    }
}

impl Dispersion for DispersionModel {
    fn omega(&self, k: f64) -> Result<f64> {
        self.omega_exact(k)
    }
}

/// The first-order truncation `ω ≈ kc(1 − α′ l_p² k²)` as a propagating
/// dispersion relation.
#[derive(Debug, Clone, Copy)]
pub struct FirstOrder(pub DispersionModel);

impl Dispersion for FirstOrder {
    fn omega(&self, k: f64) -> Result<f64> {
        Ok(self.0.omega_first_order(k))
    }
}
