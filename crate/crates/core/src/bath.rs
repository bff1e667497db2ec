//! Bath spectral densities `γ(ω)`.
//!
//! Frequencies are angular (rad/time), rates are 1/time. The phonon model
//! uses `e^{−|ω|/ω_cut}` so that `γ(−ω) = e^{−βω} γ(ω)` holds for all `ω`.

use alloc::format;
use alloc::vec::Vec;

use libm::{exp, expm1};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum SpectralDensity {
    /// `(2/T2) / (1 + τ_c² ω²)`: exponentially decaying bath correlations
    /// in the high-temperature limit.
    Lorentzian { t2: f64, tau_c: f64 },
    /// `A ω³ e^{−|ω|/ω_cut} / (1 − e^{−βω})`; `beta = +∞` is zero temperature.
    PhononCutoff { a: f64, omega_cut: f64, beta: f64 },
    /// Piecewise-linear interpolation of samples, no extrapolation.
    Tabulated { grid: Vec<f64>, values: Vec<f64> },
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: format!("must be positive and finite, got {v}") })
    }
}

/// `sup_{ω ≥ lo} ω^k e^{−ω/c}`
fn sup_power_exp(k: f64, c: f64, lo: f64) -> f64 {
    let w = lo.max(k * c);
    libm::pow(w, k) * exp(-w / c)
}

impl SpectralDensity {
    pub fn lorentzian(t2: f64, tau_c: f64) -> Result<Self> {
        positive("T2", t2)?;
        positive("tau_c", tau_c)?;
        Ok(Self::Lorentzian { t2, tau_c })
    }

    /// `beta` may be `f64::INFINITY`. `beta = 0` is rejected because the
    /// density diverges at infinite temperature.
    pub fn phonon(a: f64, omega_cut: f64, beta: f64) -> Result<Self> {
        positive("A", a)?;
        positive("omega_cut", omega_cut)?;
        if !(beta > 0.0) {
            return Err(Error::InvalidParameter { name: "beta", reason: format!("must be positive (or inf), got {beta}") });
        }
        Ok(Self::PhononCutoff { a, omega_cut, beta })
    }

    pub fn tabulated(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != values.len() {
            return Err(Error::InvalidParameter {
                name: "grid",
                reason: format!("need at least two (omega, gamma) pairs of equal length, got {} and {}", grid.len(), values.len()),
            });
        }
        if grid.iter().any(|w| !w.is_finite()) || grid.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::InvalidParameter { name: "grid", reason: "frequencies must be finite and strictly increasing".into() });
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter { name: "values", reason: format!("rates must be finite and nonnegative, got {v}") });
        }
        Ok(Self::Tabulated { grid, values })
    }

    pub fn evaluate(&self, omega: f64) -> Result<f64> {
        if !omega.is_finite() {
            return Err(Error::Domain { name: "omega", value: omega });
        }
        match *self {
            Self::Lorentzian { t2, tau_c } => Ok((2.0 / t2) / (1.0 + tau_c * tau_c * omega * omega)),
            Self::PhononCutoff { a, omega_cut, beta } => {
                if omega == 0.0 {
                    return Ok(0.0);
                }
                let u = omega.abs();
                let base = a * u * u * u * exp(-u / omega_cut);
                if beta.is_infinite() {
                    return Ok(if omega > 0.0 { base } else { 0.0 });
                }
                if omega > 0.0 {
                    Ok(base / -expm1(-beta * u))
                } else {
                    Ok(base / expm1(beta * u))
                }
            }
            Self::Tabulated { ref grid, ref values } => {
                let (lo, hi) = (grid[0], grid[grid.len() - 1]);
                if omega < lo || omega > hi {
                    return Err(Error::Extrapolation { omega, lo, hi });
                }
                let j = grid.partition_point(|&w| w <= omega).clamp(1, grid.len() - 1);
                let (w0, w1) = (grid[j - 1], grid[j]);
                let s = (omega - w0) / (w1 - w0);
                Ok(values[j - 1] + s * (values[j] - values[j - 1]))
            }
        }
    }

    /// `γ(−ω)/γ(ω)`; equals 1 at `ω = 0` by symmetry.
    pub fn kms_ratio(&self, omega: f64) -> Result<f64> {
        if omega == 0.0 {
            return Ok(1.0);
        }
        let g = self.evaluate(omega)?;
        if g == 0.0 {
            return Err(Error::UndefinedRatio(omega));
        }
        Ok(self.evaluate(-omega)? / g)
    }

    /// Upper bound on `γ(ω)` over `|ω| ≥ lo`. Tabulated densities have no
    /// bound outside their grid and return an error.
    pub fn sup_beyond(&self, lo: f64) -> Result<f64> {
        let lo = lo.max(0.0);
        match *self {
            Self::Lorentzian { t2, tau_c } => Ok((2.0 / t2) / (1.0 + tau_c * tau_c * lo * lo)),
            Self::PhononCutoff { a, omega_cut, beta } => {
                // ω/(1 − e^{−βω}) ≤ ω + 1/β, and the negative side is smaller by e^{−β|ω|}
                let cubic = sup_power_exp(3.0, omega_cut, lo);
                if beta.is_infinite() {
                    Ok(a * cubic)
                } else {
                    Ok(a * (cubic + sup_power_exp(2.0, omega_cut, lo) / beta))
                }
            }
            Self::Tabulated { ref grid, .. } => Err(Error::Extrapolation { omega: f64::INFINITY, lo: grid[0], hi: grid[grid.len() - 1] }),
        }
    }
}
