//! Floquet analysis of kicked Hamiltonians `H(t) = H0 + λ W Σ_k δ(t − kT)`.
//!
//! Kick convention: the evolution starts just after the kick at `t = 0`, and
//! `U(nT)` includes the kicks at `T, 2T, ..., nT`. `U(t)` is therefore
//! right-continuous at kick times.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{atan2, cos, floor, round, sin};
use nalgebra::linalg::Schur;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operators::{c, frobenius_sq, CMatrix, HermitianOperator, Spectrum, ZERO};

/// Relative tolerance used to snap `t/T` onto an integer.
pub const KICK_SNAP: f64 = 1e-12;

/// Quasifrequencies closer than `FREQ_CLUSTER_TOL * Ω` share a label.
pub const FREQ_CLUSTER_TOL: f64 = 1e-9;

/// Periodically kicked Hamiltonian. Units: `ħ = 1`, `H0` in angular
/// frequency, `W` dimensionless, `λ` in radians, `T` in time.
#[derive(Debug, Clone, PartialEq)]
pub struct KickedModel {
    h0: HermitianOperator,
    kick: HermitianOperator,
    strength: f64,
    period: f64,
}

impl KickedModel {
    pub fn new(h0: HermitianOperator, kick: HermitianOperator, strength: f64, period: f64) -> Result<Self> {
        if h0.dim() != kick.dim() {
            return Err(Error::Dimension { expected: h0.dim(), got: kick.dim() });
        }
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::InvalidParameter { name: "T", reason: format!("period must be positive, got {period}") });
        }
        if !strength.is_finite() {
            return Err(Error::InvalidParameter { name: "lambda", reason: "kick strength must be finite".into() });
        }
        Ok(Self { h0, kick, strength, period })
    }

    pub fn dim(&self) -> usize {
        self.h0.dim()
    }

    pub fn h0(&self) -> &HermitianOperator {
        &self.h0
    }

    pub fn kick(&self) -> &HermitianOperator {
        &self.kick
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Drive angular frequency `Ω = 2π/T`.
    pub fn omega(&self) -> f64 {
        2.0 * PI / self.period
    }
}

/// `(⌊t/T⌋, {t/T})`, with values within [`KICK_SNAP`] of an integer snapped
/// onto it so that kick times land on the "just after" branch.
pub fn sawtooth(t: f64, period: f64) -> (i64, f64) {
    let x = t / period;
    let r = round(x);
    if (x - r).abs() <= KICK_SNAP * x.abs().max(1.0) {
        return (r as i64, 0.0);
    }
    let n = floor(x);
    (n as i64, x - n)
}

/// `U(T) = e^{−iλW} e^{−iH0 T}`.
pub fn floquet_operator(m: &KickedModel) -> CMatrix {
    m.kick.spectrum().exp_i(-m.strength) * m.h0.spectrum().exp_i(-m.period)
}

/// Diagonalized Floquet operator.
#[derive(Debug, Clone)]
pub struct FloquetDecomposition {
    pub floquet_operator: CMatrix,
    pub hbar: HermitianOperator,
    /// Sorted in decreasing order, each in `(−Ω/2, Ω/2]`.
    pub quasienergies: Vec<f64>,
    /// Floquet basis `φ_k` as columns, ordered like `quasienergies`.
    pub basis: CMatrix,
}

impl FloquetDecomposition {
    pub fn dim(&self) -> usize {
        self.quasienergies.len()
    }

    /// `e^{i s H̄}` from the stored spectrum.
    pub fn hbar_exp_i(&self, s: f64) -> CMatrix {
        Spectrum { values: self.quasienergies.clone(), vectors: self.basis.clone() }.exp_i(s)
    }
}

/// Rotate `v` so that its largest component (ties resolved towards the last
/// index) is real and positive.
fn fix_phase(v: &mut nalgebra::DVectorViewMut<'_, Complex64>) {
    let mags: Vec<f64> = v.iter().map(|z| z.norm()).collect();
    let top = mags.iter().cloned().fold(0.0, f64::max);
    let pick = (0..mags.len()).rev().find(|&i| mags[i] >= top * (1.0 - 1e-9)).unwrap_or(0);
    let z = v[pick];
    if z.norm() > 0.0 {
        let ph = z.conj() / z.norm();
        for e in v.iter_mut() {
            *e *= ph;
        }
    }
}

pub fn decompose(m: &KickedModel) -> Result<FloquetDecomposition> {
    let u = floquet_operator(m);
    let d = m.dim();
    let period = m.period;
    let half_zone = PI / period;
    let schur = Schur::try_new(u.clone(), f64::EPSILON, 100_000).ok_or(Error::NoConvergence)?;
    let (q, t) = schur.unpack();
    let mut eps: Vec<(f64, usize)> = (0..d)
        .map(|k| {
            let z = t[(k, k)];
            let mut theta = -atan2(z.im, z.re);
            if theta <= -PI {
                theta += 2.0 * PI;
            }
            let mut e = theta / period;
            if e > half_zone {
                e = half_zone;
            }
            (e, k)
        })
        .collect();
    eps.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut basis = CMatrix::zeros(d, d);
    for (new, &(_, old)) in eps.iter().enumerate() {
        basis.set_column(new, &q.column(old));
        fix_phase(&mut basis.column_mut(new));
    }
    let quasienergies: Vec<f64> = eps.iter().map(|e| e.0).collect();
    let hbar = Spectrum { values: quasienergies.clone(), vectors: basis.clone() };
    let diag = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(d, quasienergies.iter().map(|&e| c(e, 0.0))));
    let hbar_m = &hbar.vectors * diag * hbar.vectors.adjoint();
    Ok(FloquetDecomposition { floquet_operator: u, hbar: HermitianOperator::new(hbar_m)?, quasienergies, basis })
}

/// A kicked model together with the spectral data needed to evaluate
/// propagators repeatedly.
#[derive(Debug, Clone)]
pub struct FloquetSystem {
    model: KickedModel,
    decomposition: FloquetDecomposition,
    h0: Spectrum,
}

impl FloquetSystem {
    pub fn new(model: KickedModel) -> Result<Self> {
        let decomposition = decompose(&model)?;
        let h0 = model.h0.spectrum();
        Ok(Self { model, decomposition, h0 })
    }

    pub fn model(&self) -> &KickedModel {
        &self.model
    }

    pub fn decomposition(&self) -> &FloquetDecomposition {
        &self.decomposition
    }

    /// `U(t) = e^{−iH0 T{t/T}} e^{iH̄T{t/T}} e^{−iH̄t}`, evaluated as
    /// `e^{−iH0 T{t/T}} e^{−iH̄ T⌊t/T⌋}`.
    pub fn propagator(&self, t: f64) -> Result<CMatrix> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::Domain { name: "t", value: t });
        }
        let period = self.model.period;
        let (n, frac) = sawtooth(t, period);
        Ok(self.h0.exp_i(-period * frac) * self.decomposition.hbar_exp_i(-period * n as f64))
    }

    /// Limit of `U(t)` as `t → nT` from below (kick `n` not yet applied).
    pub fn propagator_before_kick(&self, n: u64) -> Result<CMatrix> {
        if n == 0 {
            return Err(Error::Domain { name: "n", value: 0.0 });
        }
        let period = self.model.period;
        Ok(self.h0.exp_i(-period) * self.decomposition.hbar_exp_i(-period * (n - 1) as f64))
    }

    /// Heisenberg-picture operator `U(t)† S U(t)`.
    pub fn heisenberg(&self, s: &HermitianOperator, t: f64) -> Result<CMatrix> {
        let u = self.propagator(t)?;
        Ok(u.adjoint() * s.matrix() * u)
    }
}

/// Exact propagator; see [`FloquetSystem::propagator`].
pub fn propagator(m: &KickedModel, t: f64) -> Result<CMatrix> {
    FloquetSystem::new(m.clone())?.propagator(t)
}

/// `∫_0^1 e^{ixs} ds`
fn unit_interval_exp(x: f64) -> Complex64 {
    if x.abs() < 1e-8 {
        return c(1.0, 0.5 * x);
    }
    let h = sin(0.5 * x);
    c(sin(x) / x, 2.0 * h * h / x)
}

/// Operator Fourier components `S_α(ω, q)` of the interaction-picture
/// couplings, stored in the Floquet basis.
///
/// `U(t)† S_α U(t) = Σ_{ω,q} S_α(ω,q) e^{i(ω + qΩ)t}` where `ω` runs over the
/// clustered Bohr-Floquet quasifrequencies `ε_k − ε_l`.
#[derive(Debug, Clone)]
pub struct HarmonicDecomposition {
    drive_frequency: f64,
    q_max: usize,
    quasienergies: Vec<f64>,
    frequencies: Vec<f64>,
    pairs: Vec<Vec<(usize, usize)>>,
    basis: CMatrix,
    coupling_norms_sq: Vec<f64>,
    // [alpha][freq][q + q_max]
    components: Vec<Vec<Vec<CMatrix>>>,
    // [alpha][k * d + l] -> (amplitude, phase rate in units of 1/period)
    expansions: Option<Vec<Vec<Vec<(Complex64, f64)>>>>,
}

/// Group `ε_k − ε_l` into shared labels. Returns labels and member pairs.
pub(crate) fn cluster_frequencies(quasienergies: &[f64], drive_frequency: f64) -> (Vec<f64>, Vec<Vec<(usize, usize)>>) {
    let d = quasienergies.len();
    let tol = FREQ_CLUSTER_TOL * drive_frequency;
    let mut diffs: Vec<(f64, usize, usize)> = Vec::with_capacity(d * d);
    for k in 0..d {
        for l in 0..d {
            diffs.push((quasienergies[k] - quasienergies[l], k, l));
        }
    }
    diffs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut labels = Vec::new();
    let mut pairs: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut start = f64::NEG_INFINITY;
    for (w, k, l) in diffs {
        if pairs.is_empty() || w - start > tol {
            start = w;
            pairs.push(Vec::new());
            labels.push(0.0);
        }
        pairs.last_mut().unwrap().push((k, l));
    }
    for (label, members) in labels.iter_mut().zip(&pairs) {
        let sum: f64 = members.iter().map(|&(k, l)| quasienergies[k] - quasienergies[l]).sum();
        *label = sum / members.len() as f64;
    }
    (labels, pairs)
}

impl HarmonicDecomposition {
    /// Assemble from precomputed components (used by the quadrature oracle).
    pub(crate) fn from_components(
        drive_frequency: f64,
        q_max: usize,
        quasienergies: Vec<f64>,
        basis: CMatrix,
        coupling_norms_sq: Vec<f64>,
        frequencies: Vec<f64>,
        pairs: Vec<Vec<(usize, usize)>>,
        components: Vec<Vec<Vec<CMatrix>>>,
    ) -> Self {
        Self {
            drive_frequency,
            q_max,
            quasienergies,
            frequencies,
            pairs,
            basis,
            coupling_norms_sq,
            components,
            expansions: None,
        }
    }

    pub fn drive_frequency(&self) -> f64 {
        self.drive_frequency
    }

    pub fn q_max(&self) -> usize {
        self.q_max
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn num_couplings(&self) -> usize {
        self.coupling_norms_sq.len()
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn quasienergies(&self) -> &[f64] {
        &self.quasienergies
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    /// `‖S_α‖²_F`, the Parseval total over all `(ω, q)`.
    pub fn coupling_norm_sq(&self, alpha: usize) -> f64 {
        self.coupling_norms_sq[alpha]
    }

    /// Whether components beyond `q_max` can be generated.
    pub fn is_extendable(&self) -> bool {
        self.expansions.is_some()
    }

    /// Index of the label within `FREQ_CLUSTER_TOL * Ω` of `omega`.
    pub fn frequency_index(&self, omega: f64) -> Option<usize> {
        let tol = 2.0 * FREQ_CLUSTER_TOL * self.drive_frequency;
        self.frequencies.iter().position(|&w| (w - omega).abs() <= tol)
    }

    fn coefficient(&self, alpha: usize, k: usize, l: usize, q: i64) -> Complex64 {
        let d = self.dim();
        let terms = &self.expansions.as_ref().expect("closed-form expansion")[alpha][k * d + l];
        let shift = 2.0 * PI * q as f64;
        terms.iter().fold(ZERO, |acc, &(amp, rate)| acc + amp * unit_interval_exp(rate - shift))
    }

    fn compute_component(&self, alpha: usize, freq: usize, q: i64) -> CMatrix {
        let d = self.dim();
        let mut m = CMatrix::zeros(d, d);
        for &(k, l) in &self.pairs[freq] {
            m[(k, l)] = self.coefficient(alpha, k, l, q);
        }
        m
    }

    /// `S_α(ω_freq, q)` in the Floquet basis. `None` when `|q| > q_max` and
    /// no closed-form expansion is available.
    pub fn component(&self, alpha: usize, freq: usize, q: i64) -> Option<CMatrix> {
        if q.unsigned_abs() as usize <= self.q_max {
            return Some(self.components[alpha][freq][(q + self.q_max as i64) as usize].clone());
        }
        self.expansions.as_ref()?;
        Some(self.compute_component(alpha, freq, q))
    }

    /// `S_α(ω_freq, q)` in the computational basis.
    pub fn component_standard(&self, alpha: usize, freq: usize, q: i64) -> Option<CMatrix> {
        self.component(alpha, freq, q).map(|m| &self.basis * m * self.basis.adjoint())
    }

    /// Truncated Fourier sum `Σ_{ω,|q|≤q_max} S_α(ω,q) e^{i(ω+qΩ)t}` in the
    /// computational basis.
    pub fn reconstruct_heisenberg(&self, alpha: usize, t: f64) -> CMatrix {
        let d = self.dim();
        let mut acc = CMatrix::zeros(d, d);
        let q_max = self.q_max as i64;
        for (f, &w) in self.frequencies.iter().enumerate() {
            for q in -q_max..=q_max {
                let phase = (w + q as f64 * self.drive_frequency) * t;
                let comp = &self.components[alpha][f][(q + q_max) as usize];
                acc += comp * c(cos(phase), sin(phase));
            }
        }
        &self.basis * acc * self.basis.adjoint()
    }
}

/// Closed-form harmonic decomposition of the coupling operators.
///
/// With `P(t) = e^{−iH0T{t/T}} e^{iH̄T{t/T}}`, the Floquet-basis matrix element
/// `⟨φ_k|P†SP|φ_l⟩` expands in the `H0` eigenbasis `{|a⟩}` into pure
/// exponentials `e^{iμTs}`, `μ = E_a − E_b − (ε_k − ε_l)`, whose Fourier
/// coefficients over one period are evaluated analytically.
pub fn harmonic_decomposition(m: &KickedModel, couplings: &[HermitianOperator], q_max: usize) -> Result<HarmonicDecomposition> {
    if q_max < 1 {
        return Err(Error::InvalidParameter { name: "q_max", reason: "must be at least 1".into() });
    }
    let d = m.dim();
    for s in couplings {
        if s.dim() != d {
            return Err(Error::Dimension { expected: d, got: s.dim() });
        }
    }
    let fd = decompose(m)?;
    let h0 = m.h0.spectrum();
    let period = m.period;
    let drive = m.omega();
    // overlaps[a, k] = ⟨a|φ_k⟩
    let overlaps = h0.vectors.adjoint() * &fd.basis;
    let (frequencies, pairs) = cluster_frequencies(&fd.quasienergies, drive);

    let mut expansions = Vec::with_capacity(couplings.len());
    for s in couplings {
        let s0 = h0.vectors.adjoint() * s.matrix() * &h0.vectors;
        let mut per_pair = vec![Vec::new(); d * d];
        for k in 0..d {
            for l in 0..d {
                let w_kl = fd.quasienergies[k] - fd.quasienergies[l];
                let terms = &mut per_pair[k * d + l];
                for a in 0..d {
                    for b in 0..d {
                        let amp = overlaps[(a, k)].conj() * s0[(a, b)] * overlaps[(b, l)];
                        if amp == ZERO {
                            continue;
                        }
                        let rate = (h0.values[a] - h0.values[b] - w_kl) * period;
                        terms.push((amp, rate));
                    }
                }
            }
        }
        expansions.push(per_pair);
    }

    let mut h = HarmonicDecomposition {
        drive_frequency: drive,
        q_max,
        quasienergies: fd.quasienergies.clone(),
        frequencies,
        pairs,
        basis: fd.basis.clone(),
        coupling_norms_sq: couplings.iter().map(|s| frobenius_sq(s.matrix())).collect(),
        components: Vec::new(),
        expansions: Some(expansions),
    };
    let q = q_max as i64;
    let components = (0..couplings.len())
        .map(|alpha| {
            (0..h.frequencies.len())
                .map(|f| (-q..=q).map(|qq| h.compute_component(alpha, f, qq)).collect())
                .collect()
        })
        .collect();
    h.components = components;
    Ok(h)
}
