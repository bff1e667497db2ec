//! State evolution `ρ(t) = 𝓤(t) e^{t𝓛} ρ0` and the closed-form two-level
//! trajectories.

use alloc::format;
use alloc::vec::Vec;

use libm::{cos, exp, sin};

use crate::bath::SpectralDensity;
use crate::error::{Error, Result};
use crate::floquet::{sawtooth, FloquetSystem, KickedModel};
use crate::lindblad::{semigroup, LindbladGenerator};
use crate::operators::{bloch_from_density, c, density_from_bloch, BlochVector, CMatrix, DensityMatrix, ZERO};

/// Two-level parameters. `delta = omega0 − omega_ext` is derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TlsParams {
    pub omega0: f64,
    pub omega_ext: f64,
    pub delta: f64,
    pub period: f64,
    pub eta: f64,
}

impl TlsParams {
    pub fn new(omega0: f64, omega_ext: f64, period: f64, eta: f64) -> Result<Self> {
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::InvalidParameter { name: "T", reason: format!("period must be positive, got {period}") });
        }
        if !(eta >= 0.0) || !eta.is_finite() {
            return Err(Error::InvalidParameter { name: "eta", reason: format!("rate must be nonnegative, got {eta}") });
        }
        if !omega0.is_finite() || !omega_ext.is_finite() {
            return Err(Error::InvalidParameter { name: "omega", reason: "frequencies must be finite".into() });
        }
        Ok(Self { omega0, omega_ext, delta: omega0 - omega_ext, period, eta })
    }

    /// `φ(t) = ω_ext t + ΔT({t/T} − ½)`
    pub fn phase(&self, t: f64) -> f64 {
        self.omega_ext * t + self.delta * self.period * centered_sawtooth(t, self.period)
    }
}

/// `{t/T} − ½` with the kick-time snapping of [`sawtooth`].
pub fn centered_sawtooth(t: f64, period: f64) -> f64 {
    sawtooth(t, period).1 - 0.5
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Frame {
    Interaction,
    Rotating,
    /// Rotating frame composed with the carrier rotation
    /// `e^{−iω_ext t σ³/2}`; two-level systems only.
    Lab { omega_ext: f64 },
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub frame: Frame,
}

impl Trajectory {
    pub fn bloch(&self) -> Result<Vec<BlochVector>> {
        self.states.iter().map(bloch_from_density).collect()
    }
}

fn carrier(omega_ext: f64, t: f64) -> CMatrix {
    let h = 0.5 * omega_ext * t;
    CMatrix::from_row_slice(2, 2, &[c(cos(h), -sin(h)), ZERO, ZERO, c(cos(h), sin(h))])
}

fn to_frame(sys: &FloquetSystem, rho_int: CMatrix, t: f64, frame: Frame, before_kick: bool) -> Result<CMatrix> {
    let u = match frame {
        Frame::Interaction => return Ok(rho_int),
        Frame::Rotating | Frame::Lab { .. } => {
            if before_kick {
                let (n, _) = sawtooth(t, sys.model().period());
                sys.propagator_before_kick(n as u64)?
            } else {
                sys.propagator(t)?
            }
        }
    };
    let mut rho = &u * rho_int * u.adjoint();
    if let Frame::Lab { omega_ext } = frame {
        let u0 = carrier(omega_ext, t);
        rho = &u0 * rho * u0.adjoint();
    }
    Ok(rho)
}

fn check_frame(m: &KickedModel, frame: Frame) -> Result<()> {
    if matches!(frame, Frame::Lab { .. }) && m.dim() != 2 {
        return Err(Error::UnsupportedFrame(format!("lab frame needs a two-level system, got d = {}", m.dim())));
    }
    Ok(())
}

/// Sample `𝓤(t) e^{t𝓛} ρ0` at increasing, nonnegative `times`. At kick times
/// the state just after the kick is returned.
pub fn evolve(m: &KickedModel, g: &LindbladGenerator, rho0: &DensityMatrix, times: &[f64], frame: Frame) -> Result<Trajectory> {
    check_frame(m, frame)?;
    if g.dim() != m.dim() || rho0.dim() != m.dim() {
        return Err(Error::Dimension { expected: m.dim(), got: if g.dim() != m.dim() { g.dim() } else { rho0.dim() } });
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter { name: "times", reason: "sample times must be strictly increasing".into() });
    }
    let sys = FloquetSystem::new(m.clone())?;
    let mut states = Vec::with_capacity(times.len());
    for &t in times {
        let rho_int = semigroup(g, t)?.apply(rho0.matrix());
        states.push(DensityMatrix::new(to_frame(&sys, rho_int, t, frame, false)?)?);
    }
    Ok(Trajectory { times: times.to_vec(), states, frame })
}

/// States just before and just after the `n`-th kick (`n ≥ 1`).
pub fn kick_limits(m: &KickedModel, g: &LindbladGenerator, rho0: &DensityMatrix, n: u64, frame: Frame) -> Result<(DensityMatrix, DensityMatrix)> {
    check_frame(m, frame)?;
    if n == 0 {
        return Err(Error::Domain { name: "n", value: 0.0 });
    }
    let sys = FloquetSystem::new(m.clone())?;
    let t = n as f64 * m.period();
    let rho_int = semigroup(g, t)?.apply(rho0.matrix());
    let before = to_frame(&sys, rho_int.clone(), t, frame, true)?;
    let after = to_frame(&sys, rho_int, t, frame, false)?;
    Ok((DensityMatrix::new(before)?, DensityMatrix::new(after)?))
}

fn parity(n: i64) -> f64 {
    if n.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Lab-frame Bloch vector of the magic-angle model for either closed-form
/// generator:
///
/// ```text
/// x1 = e^{−2ηt} c1 cos φ(t) − (−1)^n e^{−ηt} c2 sin φ(t)
/// x2 = e^{−2ηt} c1 sin φ(t) + (−1)^n e^{−ηt} c2 cos φ(t)
/// x3 = (−1)^n e^{−ηt} x3(0)
/// ```
///
/// where `(c1, c2)` is `(x1(0), x2(0))` rotated by `−φ(0)` and `n = ⌊t/T⌋`.
pub fn closed_form_bloch(p: &TlsParams, x0: &BlochVector, t: f64) -> Result<BlochVector> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain { name: "t", value: t });
    }
    let (n, _) = sawtooth(t, p.period);
    let sign = parity(n);
    let phi0 = p.phase(0.0);
    let c1 = x0.x[0] * cos(phi0) + x0.x[1] * sin(phi0);
    let c2 = -x0.x[0] * sin(phi0) + x0.x[1] * cos(phi0);
    let fast = exp(-2.0 * p.eta * t);
    let slow = sign * exp(-p.eta * t);
    let phi = p.phase(t);
    let (cp, sp) = (cos(phi), sin(phi));
    let x = [fast * c1 * cp - slow * c2 * sp, fast * c1 * sp + slow * c2 * cp, slow * x0.x[2]];
    // closed forms are contractions; clamp rounding above the unit sphere
    let norm = libm::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    let s = if norm > 1.0 { 1.0 / norm } else { 1.0 };
    BlochVector::new(x[0] * s, x[1] * s, x[2] * s)
}

/// Longitudinal coupling, magic-angle kicks, any detuning; `p.eta = η_∥`.
pub fn closed_form_parallel(p: &TlsParams, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    let x0 = bloch_from_density(rho0)?;
    density_from_bloch(&closed_form_bloch(p, &x0, t)?)
}

/// Transverse coupling at resonance and zero temperature; `p.eta = η_⊥`.
pub fn closed_form_perp(p: &TlsParams, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    if p.delta.abs() > 1e-12 * p.omega0.abs().max(1.0) {
        return Err(Error::UnsupportedRegime(format!("transverse closed form needs Δ = 0, got {}", p.delta)));
    }
    closed_form_parallel(p, rho0, t)
}

/// `T1 = [(1 + e^{−βω0}) γ(ω0)]^{−1}`; `+∞` when `γ(ω0) = 0`.
pub fn t1_time(sd: &SpectralDensity, omega0: f64, beta: f64) -> Result<f64> {
    if !(beta >= 0.0) {
        return Err(Error::InvalidParameter { name: "beta", reason: format!("must be nonnegative, got {beta}") });
    }
    let g = sd.evaluate(omega0)?;
    if g == 0.0 {
        return Ok(f64::INFINITY);
    }
    let boltzmann = if beta.is_infinite() { 0.0 } else { exp(-beta * omega0) };
    Ok(1.0 / ((1.0 + boltzmann) * g))
}

/// `1/T2′ = 1/T2 + 1/(2 T1)`
pub fn t2_prime(t1: f64, t2: f64) -> f64 {
    1.0 / (1.0 / t2 + 0.5 / t1)
}
