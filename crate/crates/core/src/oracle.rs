//! Slow, simple reference computations used to validate the closed forms.
//!
//! None of these share code paths with the routines they check beyond the
//! primitives in [`crate::operators`].

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{ceil, cos, sin};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::floquet::{cluster_frequencies, decompose, sawtooth, HarmonicDecomposition, KickedModel};
use crate::lindblad::LindbladGenerator;
use crate::operators::{c, frobenius_sq, unvec, vec_of, CMatrix, DensityMatrix, HermitianOperator};

/// Rectangular-pulse regularization of the kicks: each `δ` becomes a pulse
/// of width `ε` and height `λ/ε` ending at the period boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizationSpec {
    pub pulse_width: f64,
    pub steps_per_pulse: usize,
    pub steps_per_free_segment: usize,
}

impl RegularizationSpec {
    pub fn new(pulse_width: f64, steps_per_pulse: usize, steps_per_free_segment: usize, period: f64) -> Result<Self> {
        if !(pulse_width > 0.0) || pulse_width > period / 100.0 {
            return Err(Error::InvalidParameter { name: "pulse_width", reason: format!("need 0 < ε ≤ T/100, got {pulse_width}") });
        }
        if steps_per_pulse < 10 || steps_per_free_segment < 100 {
            return Err(Error::InvalidParameter {
                name: "steps",
                reason: format!("need ≥ 10 pulse steps and ≥ 100 free steps, got {steps_per_pulse} and {steps_per_free_segment}"),
            });
        }
        Ok(Self { pulse_width, steps_per_pulse, steps_per_free_segment })
    }
}

struct Stepper {
    free: HermitianOperator,
    pulse: HermitianOperator,
}

impl Stepper {
    /// Evolve `u` through `[a, b)` of a single period, `0 ≤ a ≤ b ≤ T`.
    fn advance(&self, u: CMatrix, a: f64, b: f64, period: f64, r: &RegularizationSpec) -> CMatrix {
        let edge = period - r.pulse_width;
        let mut u = u;
        let free_end = b.min(edge);
        if free_end > a {
            u = self.segment(&self.free, u, free_end - a, edge, r.steps_per_free_segment);
        }
        let pulse_start = a.max(edge);
        if b > pulse_start {
            u = self.segment(&self.pulse, u, b - pulse_start, r.pulse_width, r.steps_per_pulse);
        }
        u
    }

    fn segment(&self, h: &HermitianOperator, u: CMatrix, len: f64, full: f64, steps: usize) -> CMatrix {
        let n = (ceil(steps as f64 * len / full) as usize).max(1);
        let step = h.spectrum().exp_i(-len / n as f64);
        let mut u = u;
        for _ in 0..n {
            u = &step * u;
        }
        u
    }
}

/// Propagator of the regularized (finite-width pulse) Hamiltonian.
pub fn regularized_propagator(m: &KickedModel, t: f64, r: &RegularizationSpec) -> Result<CMatrix> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain { name: "t", value: t });
    }
    let period = m.period();
    if r.pulse_width > period / 100.0 {
        return Err(Error::InvalidParameter { name: "pulse_width", reason: "pulse wider than T/100".into() });
    }
    let pulse = HermitianOperator::new(m.h0().matrix() + m.kick().matrix().scale(m.strength() / r.pulse_width))?;
    let stepper = Stepper { free: m.h0().clone(), pulse };
    let d = m.dim();
    let one_period = stepper.advance(CMatrix::identity(d, d), 0.0, period, period, r);
    let (n, frac) = sawtooth(t, period);
    let mut u = CMatrix::identity(d, d);
    for _ in 0..n {
        u = &one_period * u;
    }
    if frac > 0.0 {
        u = stepper.advance(u, 0.0, frac * period, period, r);
    }
    Ok(u)
}

/// Fourier coefficients of `⟨φ_k|P(t)† S P(t)|φ_l⟩` by the midpoint rule on
/// `n_samples` points per period, which avoids the jump at the boundary.
pub fn quadrature_harmonics(m: &KickedModel, couplings: &[HermitianOperator], q_max: usize, n_samples: usize) -> Result<HarmonicDecomposition> {
    if q_max < 1 || n_samples < 8 * q_max {
        return Err(Error::InvalidParameter { name: "n_samples", reason: format!("need q_max ≥ 1 and n_samples ≥ 8 q_max, got {q_max}, {n_samples}") });
    }
    let fd = decompose(m)?;
    let d = m.dim();
    let period = m.period();
    let h0 = m.h0().spectrum();
    let hbar = fd.hbar.spectrum();
    let qn = 2 * q_max + 1;
    // coeffs[alpha][q][(k, l)]
    let mut coeffs: Vec<Vec<CMatrix>> = (0..couplings.len()).map(|_| (0..qn).map(|_| CMatrix::zeros(d, d)).collect()).collect();
    let sandwiched: Vec<CMatrix> = couplings.iter().map(|s| s.matrix().clone()).collect();
    for j in 0..n_samples {
        let s = (j as f64 + 0.5) / n_samples as f64;
        let p = h0.exp_i(-period * s) * hbar.exp_i(period * s);
        let pv = &p * &fd.basis;
        let base = c(cos(2.0 * PI * s), -sin(2.0 * PI * s));
        for (alpha, sm) in sandwiched.iter().enumerate() {
            let x = pv.adjoint() * sm * &pv;
            // e^{−2πiqs} for q = −q_max..=q_max
            let mut ph = Complex64::new(1.0, 0.0);
            let inv = base.conj();
            for _ in 0..q_max {
                ph *= inv;
            }
            for qi in 0..qn {
                coeffs[alpha][qi] += &x * ph;
                ph *= base;
            }
        }
    }
    let norm = 1.0 / n_samples as f64;
    let (frequencies, pairs) = cluster_frequencies(&fd.quasienergies, m.omega());
    let components = coeffs
        .iter()
        .map(|per_q| {
            pairs
                .iter()
                .map(|members| {
                    per_q
                        .iter()
                        .map(|cq| {
                            let mut out = CMatrix::zeros(d, d);
                            for &(k, l) in members {
                                out[(k, l)] = cq[(k, l)] * norm;
                            }
                            out
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(HarmonicDecomposition::from_components(
        m.omega(),
        q_max,
        fd.quasienergies.clone(),
        fd.basis.clone(),
        couplings.iter().map(|s| frobenius_sq(s.matrix())).collect(),
        frequencies,
        pairs,
        components,
    ))
}

/// Classical fourth-order Runge-Kutta integration of `dρ/dt = 𝓛ρ`.
pub fn integrate_master_equation(g: &LindbladGenerator, rho0: &DensityMatrix, t: f64, dt: f64) -> Result<DensityMatrix> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain { name: "t", value: t });
    }
    if !(dt > 0.0) {
        return Err(Error::Domain { name: "dt", value: dt });
    }
    if rho0.dim() != g.dim() {
        return Err(Error::Dimension { expected: g.dim(), got: rho0.dim() });
    }
    let scale = g.norm();
    if scale > 0.0 && dt > 0.01 / scale {
        return Err(Error::StepTooLarge { dt, limit: 0.01 / scale });
    }
    let l = g.superop().matrix();
    let mut y = vec_of(rho0.matrix());
    let steps = ceil(t / dt) as usize;
    if steps > 0 {
        let h = t / steps as f64;
        let hc = c(h, 0.0);
        let half = c(0.5 * h, 0.0);
        for _ in 0..steps {
            let k1 = l * &y;
            let k2 = l * (&y + &k1 * half);
            let k3 = l * (&y + &k2 * half);
            let k4 = l * (&y + &k3 * hc);
            y += (k1 + k2 * c(2.0, 0.0) + k3 * c(2.0, 0.0) + k4) * (hc / 6.0);
        }
    }
    DensityMatrix::new(unvec(&y, g.dim()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRate {
    pub eta: f64,
    /// Upper estimate of the omitted terms.
    pub tail_estimate: f64,
    pub q_max: usize,
}

fn lorentzian(t2: f64, tau_c: f64, omega: f64) -> f64 {
    (2.0 / t2) / (1.0 + tau_c * tau_c * omega * omega)
}

/// Coherence decay coefficient of the longitudinal TLS generator summed
/// harmonic by harmonic:
/// `(2/π²) Σ_{q=0}^{q_max} [γ((q+½)Ω) + γ(−(q+½)Ω)] / (2q+1)²`
/// with the Lorentzian `γ`. `tau_c = 0` gives a flat density.
pub fn series_rate_parallel(period: f64, t2: f64, tau_c: f64, q_max: usize) -> Result<SeriesRate> {
    if !(period > 0.0) || !(t2 > 0.0) || !(tau_c >= 0.0) {
        return Err(Error::InvalidParameter { name: "T, T2, tau_c", reason: format!("got {period}, {t2}, {tau_c}") });
    }
    let omega = 2.0 * PI / period;
    let mut sum = 0.0;
    for q in (0..=q_max).rev() {
        let n = (2 * q + 1) as f64;
        let nu = 0.5 * n * omega;
        sum += (lorentzian(t2, tau_c, nu) + lorentzian(t2, tau_c, -nu)) / (n * n);
    }
    let pref = 2.0 / (PI * PI);
    // remaining odd n ≥ N on both sides: Σ 1/n² ≤ 1/(2(N−2)), Σ 1/n⁴ ≤ 1/(6(N−2)³)
    let gap = (2 * q_max + 1) as f64;
    let a = 0.5 * tau_c * omega;
    let flat = 1.0 / (2.0 * gap);
    let tail_sum = if a > 0.0 { flat.min(1.0 / (6.0 * a * a * gap * gap * gap)) } else { flat };
    Ok(SeriesRate { eta: pref * sum, tail_estimate: pref * 2.0 * (2.0 / t2) * tail_sum, q_max })
}

/// [`series_rate_parallel`] with `q_max` doubled until the tail estimate is
/// below `rel_tol · η`.
pub fn series_rate_parallel_adaptive(period: f64, t2: f64, tau_c: f64, rel_tol: f64) -> Result<SeriesRate> {
    let mut q = 16;
    loop {
        let r = series_rate_parallel(period, t2, tau_c, q)?;
        if r.tail_estimate <= rel_tol * r.eta {
            return Ok(r);
        }
        if q >= 1 << 26 {
            return Err(Error::Truncation(format!("series tail {:e} above tolerance at q_max = {q}", r.tail_estimate)));
        }
        q *= 2;
    }
}

/// Transverse coherence decay coefficient at resonance and zero temperature,
/// `(4/π²) Σ_{q≥0} γ⊥((q+½)Ω) / (2q+1)²` with `γ⊥(ν) = A ν³ e^{−ν/ω_cut}`,
/// summed until the geometric tail bound drops below `rel_tol · η`.
pub fn series_rate_perp(omega: f64, a: f64, omega_cut: f64, rel_tol: f64) -> Result<SeriesRate> {
    if !(omega > 0.0) || !(a > 0.0) || !(omega_cut > 0.0) || !(rel_tol > 0.0) {
        return Err(Error::InvalidParameter { name: "Omega, A, omega_cut", reason: format!("got {omega}, {a}, {omega_cut}") });
    }
    let term = |q: usize| {
        let n = (2 * q + 1) as f64;
        let nu = 0.5 * n * omega;
        a * nu * nu * nu * libm::exp(-nu / omega_cut) / (n * n)
    };
    let pref = 4.0 / (PI * PI);
    let mut sum = 0.0;
    let mut q = 0usize;
    loop {
        let t = term(q);
        sum += t;
        q += 1;
        // consecutive odd-n terms shrink by at most r once past the peak of n e^{−nΩ/2ω_c}
        let n = (2 * q + 1) as f64;
        let r = (n + 2.0) / n * libm::exp(-omega / omega_cut);
        if r < 1.0 && n * omega > 2.0 * omega_cut {
            let tail = term(q) / (1.0 - r);
            if tail <= rel_tol * sum {
                return Ok(SeriesRate { eta: pref * sum, tail_estimate: pref * tail, q_max: q - 1 });
            }
        }
        if q > 1 << 26 {
            return Err(Error::Truncation(format!("series tail above tolerance at q_max = {q}")));
        }
    }
}
