//! Detuning ensembles, spin-echo signals and bath-time extraction.

use alloc::format;
use alloc::vec::Vec;

use libm::{cos, exp, log, sin};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};

use crate::dynamics::{centered_sawtooth, TlsParams};
use crate::error::{Error, Result};
use crate::floquet::sawtooth;
use crate::lindblad::suppression;
use crate::operators::BlochVector;

/// Distribution of detuning offsets `δ` around the nominal detuning.
#[derive(Debug, Clone, PartialEq)]
pub enum EnsembleKind {
    Gaussian { sigma: f64 },
    Uniform { halfwidth: f64 },
    /// `(δ, weight)` pairs; weights are normalized on construction.
    Discrete { samples: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetuningEnsemble {
    kind: EnsembleKind,
    seed: u64,
}

impl DetuningEnsemble {
    pub fn gaussian(sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter { name: "sigma", reason: format!("must be nonnegative, got {sigma}") });
        }
        Ok(Self { kind: EnsembleKind::Gaussian { sigma }, seed })
    }

    pub fn uniform(halfwidth: f64, seed: u64) -> Result<Self> {
        if !(halfwidth >= 0.0) || !halfwidth.is_finite() {
            return Err(Error::InvalidParameter { name: "halfwidth", reason: format!("must be nonnegative, got {halfwidth}") });
        }
        Ok(Self { kind: EnsembleKind::Uniform { halfwidth }, seed })
    }

    pub fn discrete(samples: Vec<(f64, f64)>, seed: u64) -> Result<Self> {
        if samples.iter().any(|&(d, w)| !d.is_finite() || !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParameter { name: "samples", reason: "detunings must be finite and weights nonnegative".into() });
        }
        let total: f64 = samples.iter().map(|s| s.1).sum();
        if !(total > 0.0) {
            return Err(Error::InvalidParameter { name: "samples", reason: "weights sum to zero".into() });
        }
        let samples = samples.into_iter().map(|(d, w)| (d, w / total)).collect();
        Ok(Self { kind: EnsembleKind::Discrete { samples }, seed })
    }

    pub fn kind(&self) -> &EnsembleKind {
        &self.kind
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `(⟨cos δx⟩, ⟨sin δx⟩)`, analytic for the continuous kinds.
    pub fn phase_average(&self, x: f64) -> (f64, f64) {
        match self.kind {
            EnsembleKind::Gaussian { sigma } => (exp(-0.5 * sigma * sigma * x * x), 0.0),
            EnsembleKind::Uniform { halfwidth } => {
                let y = halfwidth * x;
                if y.abs() < 1e-4 {
                    (1.0 - y * y / 6.0, 0.0)
                } else {
                    (sin(y) / y, 0.0)
                }
            }
            EnsembleKind::Discrete { ref samples } => samples.iter().fold((0.0, 0.0), |(cs, ss), &(d, w)| (cs + w * cos(d * x), ss + w * sin(d * x))),
        }
    }

    /// Equal-weight ensemble of `n` draws from this distribution, seeded by
    /// [`DetuningEnsemble::seed`]. Discrete ensembles are resampled by weight.
    pub fn sampled(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter { name: "n", reason: "need at least one sample".into() });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let draws: Vec<f64> = match self.kind {
            EnsembleKind::Gaussian { sigma } => {
                let dist = Normal::new(0.0, sigma).map_err(|e| Error::InvalidParameter { name: "sigma", reason: format!("{e}") })?;
                (0..n).map(|_| dist.sample(&mut rng)).collect()
            }
            EnsembleKind::Uniform { halfwidth } => {
                let dist = Uniform::new_inclusive(-halfwidth, halfwidth).map_err(|e| Error::InvalidParameter { name: "halfwidth", reason: format!("{e}") })?;
                (0..n).map(|_| dist.sample(&mut rng)).collect()
            }
            EnsembleKind::Discrete { ref samples } => {
                let unit = Uniform::new(0.0, 1.0).map_err(|e| Error::InvalidParameter { name: "samples", reason: format!("{e}") })?;
                (0..n)
                    .map(|_| {
                        let mut u: f64 = unit.sample(&mut rng);
                        for &(d, w) in samples {
                            if u < w {
                                return d;
                            }
                            u -= w;
                        }
                        samples[samples.len() - 1].0
                    })
                    .collect()
            }
        };
        let w = 1.0 / n as f64;
        Self::discrete(draws.into_iter().map(|d| (d, w)).collect(), self.seed)
    }
}

/// `(⟨cos φ(t)⟩, ⟨sin φ(t)⟩)` with `φ(t) = ω_ext t + (Δ + δ) T {t/T}_c`.
pub fn averaged_phase(e: &DetuningEnsemble, p: &TlsParams, t: f64) -> (f64, f64) {
    let x = p.period * centered_sawtooth(t, p.period);
    let (c0, s0) = e.phase_average(x);
    let base = p.omega_ext * t + p.delta * x;
    let (cb, sb) = (cos(base), sin(base));
    (cb * c0 - sb * s0, sb * c0 + cb * s0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EchoSignal {
    pub times: Vec<f64>,
    pub avg_cos: Vec<f64>,
    pub avg_sin: Vec<f64>,
    /// Ensemble-averaged `(x1, x2)`.
    pub transverse: Vec<[f64; 2]>,
}

/// Ensemble-averaged transverse Bloch components under longitudinal noise.
///
/// `x0` is given in the frame co-moving with `φ(0)`: its transverse part is
/// `(x1(0), x2(0))` rotated by `−φ(0)`, which makes it common to all spins.
/// For `Δ + δ = 0` it coincides with the lab vector.
pub fn echo_signal(e: &DetuningEnsemble, p: &TlsParams, x0: &BlochVector, times: &[f64]) -> Result<EchoSignal> {
    let mut out = EchoSignal { times: times.to_vec(), avg_cos: Vec::new(), avg_sin: Vec::new(), transverse: Vec::new() };
    for &t in times {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::Domain { name: "t", value: t });
        }
        let (ac, as_) = averaged_phase(e, p, t);
        let n = sawtooth(t, p.period).0;
        let sign = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let fast = exp(-2.0 * p.eta * t) * x0.x[0];
        let slow = sign * exp(-p.eta * t) * x0.x[1];
        out.avg_cos.push(ac);
        out.avg_sin.push(as_);
        out.transverse.push([fast * ac - slow * as_, fast * as_ + slow * ac]);
    }
    Ok(out)
}

/// Result of [`extract_tau_c`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauCEstimate {
    pub t2: f64,
    pub tau_c: f64,
    /// `|g(τ_c) − η_fast T2|` at the returned root.
    pub residual: f64,
    /// The fast-drive rate shows no resolvable suppression (`τ_c < 1e-6 T`).
    pub degenerate: bool,
}

/// Upper end of the `τ_c` search bracket in units of `T_fast`.
pub const TAU_C_BRACKET: f64 = 1e3;

/// Recover `(T2, τ_c)` from a slow-drive rate (`T ≫ τ_c`, giving `1/T2`) and
/// a rate at period `t_fast`, by bisection in `log τ_c` on
/// `η_fast T2 = 1 − (2τ_c/T) tanh(T/2τ_c)`.
pub fn extract_tau_c(eta_slow: f64, eta_fast: f64, t_fast: f64) -> Result<TauCEstimate> {
    if !(t_fast > 0.0) || !t_fast.is_finite() {
        return Err(Error::InvalidParameter { name: "T_fast", reason: format!("must be positive, got {t_fast}") });
    }
    if !(eta_fast > 0.0) || !(eta_slow > eta_fast) || !eta_slow.is_finite() {
        return Err(Error::InconsistentData(format!("need eta_slow > eta_fast > 0, got {eta_slow} and {eta_fast}")));
    }
    let t2 = 1.0 / eta_slow;
    let target = eta_fast * t2;
    let g = |tau: f64| suppression(t_fast / (2.0 * tau));
    let mut hi = TAU_C_BRACKET * t_fast;
    if target < g(hi) {
        return Err(Error::OutOfRange(format!("tau_c above {TAU_C_BRACKET} T_fast (target {target:e} < {:e})", g(hi))));
    }
    let mut lo = 1e-18 * t_fast;
    // g decreases in τ: g(lo) ≥ target ≥ g(hi)
    for _ in 0..400 {
        let mid = exp(0.5 * (log(lo) + log(hi)));
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tau_c = if (g(lo) - target).abs() < (g(hi) - target).abs() { lo } else { hi };
    Ok(TauCEstimate { t2, tau_c, residual: (g(tau_c) - target).abs(), degenerate: tau_c < 1e-6 * t_fast })
}
