//! Model parameters of the feedback master equation.
//!
//! All rates are in units of the cavity decay rate, so `gamma == 1`
//! and time is measured in `1/gamma`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Independent switches for each term of the generator. Everything is
/// on by default; they exist so individual terms can be checked in
/// isolation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TermToggles {
    /// Detuning term `delta * n`.
    pub hamiltonian: bool,
    pub pump: bool,
    pub kerr: bool,
    /// Cavity photon loss.
    pub lindblad: bool,
    /// Measurement-induced number dephasing, `lam^2 / 2 eta`.
    pub dephasing: bool,
    pub feedback_drift: bool,
}

impl Default for TermToggles {
    fn default() -> Self {
        Self::all()
    }
}

impl TermToggles {
    pub fn all() -> Self {
        TermToggles {
            hamiltonian: true,
            pump: true,
            kerr: true,
            lindblad: true,
            dephasing: true,
            feedback_drift: true,
        }
    }

    pub fn none() -> Self {
        TermToggles {
            hamiltonian: false,
            pump: false,
            kerr: false,
            lindblad: false,
            dephasing: false,
            feedback_drift: false,
        }
    }

    /// All 64 on/off combinations.
    pub fn every_subset() -> impl Iterator<Item = TermToggles> {
        (0u8..64).map(|bits| TermToggles {
            hamiltonian: bits & 1 != 0,
            pump: bits & 2 != 0,
            kerr: bits & 4 != 0,
            lindblad: bits & 8 != 0,
            dephasing: bits & 16 != 0,
            feedback_drift: bits & 32 != 0,
        })
    }
}

/// Physical parameters, dimensionless in units of `gamma`.
///
/// In JSON the pump phase is given in degrees as `theta_deg`; in memory
/// `theta` is in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Kerr strength `U / (hbar gamma)`.
    #[serde(default)]
    pub u: f64,
    /// Pump-cavity detuning `Delta / gamma`.
    #[serde(default)]
    pub delta: f64,
    /// Pump amplitude `A / gamma`.
    #[serde(default)]
    pub amp: f64,
    #[serde(rename = "theta_deg", with = "degrees", default)]
    pub theta: f64,
    /// Feedback coefficient `lambda / gamma`.
    #[serde(default)]
    pub lam: f64,
    /// Effective detection efficiency.
    #[serde(default = "one")]
    pub eta: f64,
    pub n_cut: usize,
    #[serde(default)]
    pub toggles: TermToggles,
}

fn one() -> f64 {
    1.0
}

mod degrees {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(rad: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(rad.to_degrees())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        f64::deserialize(d).map(f64::to_radians)
    }
}

/// Names accepted by [`ModelParams::set`] and sweep axes.
pub const SWEEPABLE: &[&str] = &["u", "delta", "amp", "theta_deg", "lam", "eta", "n_cut"];

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            u: 0.0,
            delta: 0.0,
            amp: 0.0,
            theta: 0.0,
            lam: 0.0,
            eta: 1.0,
            n_cut: 100,
            toggles: TermToggles::all(),
        }
    }
}

impl ModelParams {
    pub fn new(n_cut: usize) -> Self {
        ModelParams {
            n_cut,
            ..Default::default()
        }
    }

    pub fn with_kerr(mut self, u: f64) -> Self {
        self.u = u;
        self
    }

    pub fn with_detuning(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_pump(mut self, amp: f64, theta_deg: f64) -> Self {
        self.amp = amp;
        self.theta = theta_deg.to_radians();
        self
    }

    pub fn with_feedback(mut self, lam: f64, eta: f64) -> Self {
        self.lam = lam;
        self.eta = eta;
        self
    }

    pub fn with_toggles(mut self, toggles: TermToggles) -> Self {
        self.toggles = toggles;
        self
    }

    pub fn theta_deg(&self) -> f64 {
        self.theta.to_degrees()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_cut < 2 {
            return Err(Error::InvalidDimension(self.n_cut));
        }
        for (name, v) in [
            ("u", self.u),
            ("delta", self.delta),
            ("amp", self.amp),
            ("theta", self.theta),
            ("lam", self.lam),
            ("eta", self.eta),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite, got {v}"),
                });
            }
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "eta",
                reason: format!("must lie in (0, 1], got {}", self.eta),
            });
        }
        Ok(())
    }

    /// Measurement dephasing rate `lam^2 / (2 eta)`, zero when switched off.
    pub fn dephasing_rate(&self) -> f64 {
        if self.toggles.dephasing && self.lam != 0.0 {
            self.lam * self.lam / (2.0 * self.eta)
        } else {
            0.0
        }
    }

    /// Set a scalar field by its config name. `theta_deg` takes degrees.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        match name {
            "u" => self.u = value,
            "delta" => self.delta = value,
            "amp" => self.amp = value,
            "theta_deg" => self.theta = value.to_radians(),
            "lam" => self.lam = value,
            "eta" => self.eta = value,
            "n_cut" => {
                if value < 0.0 || value.fract() != 0.0 {
                    return Err(Error::InvalidParameter {
                        name: "n_cut",
                        reason: format!("must be a non-negative integer, got {value}"),
                    });
                }
                self.n_cut = value as usize;
            }
            _ => {
                return Err(Error::InvalidParameter {
                    name: "axis",
                    reason: format!("unknown parameter `{name}`, expected one of {SWEEPABLE:?}"),
                })
            }
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        Some(match name {
            "u" => self.u,
            "delta" => self.delta,
            "amp" => self.amp,
            "theta_deg" => self.theta.to_degrees(),
            "lam" => self.lam,
            "eta" => self.eta,
            "n_cut" => self.n_cut as f64,
            _ => return None,
        })
    }
}
