//! Interaction-picture Lindblad generator and the closed-form TLS rates.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{exp, expm1, tanh};

use crate::bath::SpectralDensity;
use crate::error::{Error, Result};
use crate::floquet::HarmonicDecomposition;
use crate::operators::{expm_general, frobenius_sq, norm_one, CMatrix, Superoperator};

pub use crate::operators::{verify_cptp, CptpReport};

/// Hard cap on the harmonic order explored by the adaptive truncation.
pub const MAX_HARMONIC: usize = 1 << 20;

/// One `γ_α(ω + qΩ) D[S_α(ω, q)]` term of the generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contribution {
    pub coupling: usize,
    pub omega: f64,
    pub harmonic: i64,
    pub rate: f64,
    /// `‖S_α(ω, q)‖²_F`
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    pub q_max_used: usize,
    /// Rigorous bound on the Frobenius-weighted rate mass left out.
    pub tail_bound: f64,
    /// `Σ γ ‖S‖²_F` over the retained terms.
    pub rate_scale: f64,
}

/// Population/coherence decay coefficients of a two-level generator in the
/// Floquet basis: `d(ρ11 − ρ22)/dt = −population · (ρ11 − ρ22) + …` and
/// `dρ12/dt = −coherence · ρ12`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TlsRates {
    pub population: f64,
    pub coherence: f64,
}

#[derive(Debug, Clone)]
pub struct LindbladGenerator {
    superop: Superoperator,
    floquet: Superoperator,
    basis: CMatrix,
    contributions: Vec<Contribution>,
    truncation: Truncation,
}

impl LindbladGenerator {
    /// A generator given directly by its matrix in the computational basis.
    pub fn from_superoperator(superop: Superoperator) -> Self {
        let d = superop.dim();
        Self {
            floquet: superop.clone(),
            superop,
            basis: CMatrix::identity(d, d),
            contributions: Vec::new(),
            truncation: Truncation { q_max_used: 0, tail_bound: 0.0, rate_scale: 0.0 },
        }
    }

    pub fn dim(&self) -> usize {
        self.superop.dim()
    }

    /// Generator acting on density matrices in the computational basis.
    pub fn superop(&self) -> &Superoperator {
        &self.superop
    }

    /// Generator acting on density matrices written in the Floquet basis.
    pub fn floquet_superop(&self) -> &Superoperator {
        &self.floquet
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn contributions(&self) -> &[Contribution] {
        &self.contributions
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    /// Larger of the induced 1- and ∞-norms; the step-size scale for
    /// explicit integrators.
    pub fn norm(&self) -> f64 {
        norm_one(self.superop.matrix()).max(norm_one(&self.superop.matrix().adjoint()))
    }

    /// Largest Floquet-basis matrix element linking populations `|k⟩⟨k|` to
    /// coherences `|k⟩⟨l|`, `k ≠ l`.
    pub fn population_coherence_coupling(&self) -> f64 {
        let d = self.dim();
        let m = self.floquet.matrix();
        let is_pop = |idx: usize| idx % d == idx / d;
        let mut worst: f64 = 0.0;
        for r in 0..d * d {
            for c in 0..d * d {
                if is_pop(r) != is_pop(c) {
                    worst = worst.max(m[(r, c)].norm());
                }
            }
        }
        worst
    }

    pub fn tls_rates(&self) -> Result<TlsRates> {
        if self.dim() != 2 {
            return Err(Error::Dimension { expected: 2, got: self.dim() });
        }
        let m = self.floquet.matrix();
        Ok(TlsRates { population: -(m[(0, 0)].re + m[(3, 3)].re), coherence: -m[(2, 2)].re })
    }
}

/// `Σ_{α,ω,q} γ_α(ω + qΩ) D[S_α(ω, q)]`, no cross-correlations between
/// different `α`.
///
/// All stored harmonics are included; further orders are added until
/// `sup_{|ν| ≥ QΩ} γ_α · (‖S_α‖²_F − Σ_{|q| ≤ Q} ‖S_α(ω,q)‖²_F)`, summed over
/// `α`, drops below `rel_tol` times the retained rate mass.
pub fn build_generator(h: &HarmonicDecomposition, sds: &[SpectralDensity], rel_tol: f64) -> Result<LindbladGenerator> {
    if sds.len() != h.num_couplings() {
        return Err(Error::Dimension { expected: h.num_couplings(), got: sds.len() });
    }
    if !(rel_tol > 0.0) {
        return Err(Error::InvalidParameter { name: "rel_tol", reason: format!("must be positive, got {rel_tol}") });
    }
    let d = h.dim();
    let drive = h.drive_frequency();
    let mut floquet = Superoperator::zero(d);
    let mut contributions = Vec::new();
    let mut partial = vec![0.0; h.num_couplings()];
    let mut scale = 0.0;

    let mut add_order = |q: i64, floquet: &mut Superoperator, partial: &mut [f64], scale: &mut f64| -> Result<()> {
        for (alpha, sd) in sds.iter().enumerate() {
            for (f, &w) in h.frequencies().iter().enumerate() {
                let s = h
                    .component(alpha, f, q)
                    .ok_or_else(|| Error::Truncation(format!("harmonic {q} not available beyond q_max = {}", h.q_max())))?;
                let weight = frobenius_sq(&s);
                partial[alpha] += weight;
                if weight == 0.0 {
                    continue;
                }
                let nu = w + q as f64 * drive;
                let rate = sd.evaluate(nu).map_err(|e| Error::Truncation(format!("coupling {alpha}: {e}")))?;
                if rate == 0.0 {
                    continue;
                }
                floquet.add_scaled(&Superoperator::dissipator(&s), rate);
                *scale += rate * weight;
                contributions.push(Contribution { coupling: alpha, omega: w, harmonic: q, rate, weight });
            }
        }
        Ok(())
    };

    add_order(0, &mut floquet, &mut partial, &mut scale)?;
    let mut q = 0usize;
    let tail_bound = loop {
        if q >= h.q_max() {
            let mut bound = 0.0;
            let mut exhausted = true;
            for (alpha, sd) in sds.iter().enumerate() {
                let total = h.coupling_norm_sq(alpha);
                let rest = (total - partial[alpha]).max(0.0);
                if rest <= 64.0 * f64::EPSILON * total {
                    continue;
                }
                exhausted = false;
                let sup = sd.sup_beyond(q as f64 * drive).map_err(|e| Error::Truncation(format!("coupling {alpha}: {e}")))?;
                bound += sup * rest;
            }
            if exhausted || bound <= rel_tol * scale {
                break bound;
            }
        }
        q += 1;
        if q > MAX_HARMONIC {
            return Err(Error::Truncation(format!("tail bound not reached below harmonic {MAX_HARMONIC}")));
        }
        let qi = q as i64;
        add_order(qi, &mut floquet, &mut partial, &mut scale)?;
        add_order(-qi, &mut floquet, &mut partial, &mut scale)?;
    };

    let superop = floquet.from_basis(h.basis());
    Ok(LindbladGenerator {
        superop,
        floquet,
        basis: h.basis().clone(),
        contributions,
        truncation: Truncation { q_max_used: q, tail_bound, rate_scale: scale },
    })
}

/// Parameters a rate was computed from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateMeta {
    Parallel { period: f64, t2: f64, tau_c: f64 },
    Perpendicular { omega: f64, a: f64, omega_cut: f64 },
    Combined { count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateResult {
    pub eta: f64,
    pub meta: RateMeta,
}

fn require_positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: format!("must be positive and finite, got {v}") })
    }
}

/// `1 − tanh(x)/x`
pub(crate) fn suppression(x: f64) -> f64 {
    if x < 1e-2 {
        let x2 = x * x;
        x2 * (1.0 / 3.0 - x2 * (2.0 / 15.0 - x2 * (17.0 / 315.0 - x2 * 62.0 / 2835.0)))
    } else {
        1.0 - tanh(x) / x
    }
}

/// `η_∥ = (1/T2)(1 − (2τ_c/T) tanh(T/2τ_c))`
pub fn rate_parallel_closed(period: f64, t2: f64, tau_c: f64) -> Result<RateResult> {
    require_positive("T", period)?;
    require_positive("T2", t2)?;
    require_positive("tau_c", tau_c)?;
    Ok(RateResult { eta: suppression(period / (2.0 * tau_c)) / t2, meta: RateMeta::Parallel { period, t2, tau_c } })
}

/// `η_⊥ = (AΩ³/2π²) z(1 + z²)/(1 − z²)²`, `z = e^{−Ω/2ω_cut}`: resonant drive,
/// zero temperature.
pub fn rate_perp_closed(omega: f64, a: f64, omega_cut: f64) -> Result<RateResult> {
    require_positive("Omega", omega)?;
    require_positive("A", a)?;
    require_positive("omega_cut", omega_cut)?;
    let x = omega / (2.0 * omega_cut);
    let z = exp(-x);
    let one_minus_z2 = -expm1(-2.0 * x);
    let eta = a * omega * omega * omega / (2.0 * PI * PI) * z * (1.0 + z * z) / (one_minus_z2 * one_minus_z2);
    Ok(RateResult { eta, meta: RateMeta::Perpendicular { omega, a, omega_cut } })
}

/// Total rate of statistically independent channels.
pub fn combine_rates(etas: &[RateResult]) -> RateResult {
    RateResult { eta: etas.iter().map(|r| r.eta).sum(), meta: RateMeta::Combined { count: etas.len() } }
}

/// `e^{t𝓛}` in the computational basis.
pub fn semigroup(g: &LindbladGenerator, t: f64) -> Result<Superoperator> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain { name: "t", value: t });
    }
    Superoperator::new(g.dim(), expm_general(g.superop.matrix(), t)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::harmonic_decomposition;
    use crate::operators::{c, matrix_unit, max_abs, pauli, HermitianOperator};
    use crate::tls;
    use proptest::prelude::*;

    fn parallel_generator(period: f64, t2: f64, tau_c: f64, rel_tol: f64) -> LindbladGenerator {
        let m = tls::magic_angle_model(0.3, period).unwrap();
        let h = harmonic_decomposition(&m, &[tls::longitudinal_coupling()], 4).unwrap();
        build_generator(&h, &[SpectralDensity::lorentzian(t2, tau_c).unwrap()], rel_tol).unwrap()
    }

    #[test]
    fn closed_parallel_reference_points() {
        let r = rate_parallel_closed(2.0, 1.0, 1.0).unwrap();
        assert!((r.eta - (1.0 - tanh(1.0))).abs() < 1e-15);
        assert!((r.eta - 0.238_405_844_044_234).abs() < 1e-12);
        let long = rate_parallel_closed(1000.0, 2.0, 1.0).unwrap().eta;
        assert!((long - (1.0 - 1.0 / 500.0) / 2.0).abs() < 1e-12);
        let short = rate_parallel_closed(0.01, 1.0, 1.0).unwrap().eta;
        let taylor = 0.01f64.powi(2) / 12.0;
        assert!((short - taylor).abs() < 1e-4 * taylor);
        assert!(rate_parallel_closed(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn suppression_branches_meet() {
        let x = 1e-2;
        let direct = 1.0 - tanh(x) / x;
        assert!((suppression(x * (1.0 - 1e-12)) - direct).abs() < 1e-11 * direct);
    }

    #[test]
    fn closed_perp_forms_agree() {
        let (omega, a, wc) = (3.0, 0.4, 2.0);
        let x = omega / (2.0 * wc);
        let coth_over_sinh = libm::cosh(x) / (libm::sinh(x) * libm::sinh(x));
        let want = a * omega.powi(3) / (4.0 * PI * PI) * coth_over_sinh;
        let got = rate_perp_closed(omega, a, wc).unwrap().eta;
        assert!((got - want).abs() < 1e-12 * want);
        // far above the cutoff
        let got = rate_perp_closed(40.0, 1.0, 1.0).unwrap().eta;
        let z = exp(-20.0);
        let asym = 40.0f64.powi(3) / (2.0 * PI * PI) * z * (1.0 + z * z) / ((1.0 - z * z) * (1.0 - z * z));
        assert!((got - asym).abs() < 1e-8 * asym);
    }

    #[test]
    fn combine_adds() {
        let a = rate_parallel_closed(1.0, 1.0, 1.0).unwrap();
        let b = rate_perp_closed(1.0, 1.0, 1.0).unwrap();
        assert_eq!(combine_rates(&[a]).eta, a.eta);
        assert_eq!(combine_rates(&[a, b]).eta, a.eta + b.eta);
        assert_eq!(combine_rates(&[]).eta, 0.0);
    }

    #[test]
    fn longitudinal_generator_has_closed_form_structure() {
        for &(period, tau_c) in &[(0.5, 1.0), (2.0, 0.3)] {
            let g = parallel_generator(period, 1.3, tau_c, 1e-10);
            let eta = rate_parallel_closed(period, 1.3, tau_c).unwrap().eta;
            let rates = g.tls_rates().unwrap();
            assert!((rates.coherence - eta).abs() < 1e-8 * eta, "{} vs {eta}", rates.coherence);
            assert!((rates.population - 2.0 * eta).abs() < 1e-8 * eta);
            assert!(g.population_coherence_coupling() < 1e-12);
            // 𝓛ρ = −η [[ρ11 − ρ22, ρ12], [ρ21, ρ22 − ρ11]] in the Floquet basis
            let rho = CMatrix::from_row_slice(2, 2, &[c(0.7, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.3, 0.0)]);
            let want = CMatrix::from_row_slice(2, 2, &[c(0.4, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(-0.4, 0.0)]) * c(-eta, 0.0);
            assert!(max_abs(&(g.floquet_superop().apply(&rho) - want)) < 1e-8 * eta);
        }
    }

    #[test]
    fn transverse_generator_matches_closed_rate() {
        let m = tls::magic_angle_model(0.0, 2.0 * PI / 1.5).unwrap();
        let h = harmonic_decomposition(&m, &tls::transverse_couplings(), 4).unwrap();
        let sd = SpectralDensity::phonon(0.8, 1.5, f64::INFINITY).unwrap();
        let g = build_generator(&h, &[sd.clone(), sd], 1e-12).unwrap();
        let eta = rate_perp_closed(1.5, 0.8, 1.5).unwrap().eta;
        let rates = g.tls_rates().unwrap();
        assert!((rates.coherence - eta).abs() < 1e-9 * eta);
        assert!((rates.population - 2.0 * eta).abs() < 1e-9 * eta);
        // σ¹ commutes with the Floquet operator at zero detuning
        assert!(g.contributions().iter().all(|c| c.coupling == 1 || c.weight < 1e-24));
    }

    #[test]
    fn empty_coupling_list_gives_zero() {
        let m = tls::magic_angle_model(0.0, 1.0).unwrap();
        let h = harmonic_decomposition(&m, &[], 2).unwrap();
        let g = build_generator(&h, &[], 1e-8).unwrap();
        assert_eq!(max_abs(g.superop().matrix()), 0.0);
    }

    #[test]
    fn mismatched_density_count_rejected() {
        let m = tls::magic_angle_model(0.0, 1.0).unwrap();
        let h = harmonic_decomposition(&m, &[HermitianOperator::pauli(3)], 2).unwrap();
        assert!(build_generator(&h, &[], 1e-8).is_err());
    }

    #[test]
    fn tabulated_density_fails_truncation() {
        let m = tls::magic_angle_model(0.0, 1.0).unwrap();
        let h = harmonic_decomposition(&m, &[HermitianOperator::pauli(3)], 2).unwrap();
        let sd = SpectralDensity::tabulated(alloc::vec![-100.0, 100.0], alloc::vec![1.0, 1.0]).unwrap();
        assert!(matches!(build_generator(&h, &[sd], 1e-8), Err(Error::Truncation(_))));
    }

    #[test]
    fn tail_bound_shrinks_with_tolerance() {
        let loose = parallel_generator(1.0, 1.0, 0.5, 1e-4).truncation();
        let tight = parallel_generator(1.0, 1.0, 0.5, 1e-9).truncation();
        assert!(tight.q_max_used > loose.q_max_used);
        assert!(tight.tail_bound < loose.tail_bound);
        assert!(tight.tail_bound <= 1e-9 * tight.rate_scale);
    }

    #[test]
    fn semigroup_identity_and_contraction() {
        let g = parallel_generator(1.0, 1.0, 0.5, 1e-10);
        let eta = g.tls_rates().unwrap().coherence;
        let id = semigroup(&g, 0.0).unwrap();
        assert!(max_abs(&(id.matrix() - CMatrix::identity(4, 4))) < 1e-15);
        assert!(semigroup(&g, -1.0).is_err());
        // Floquet-basis action at t = 1/η
        let map = semigroup(&g, 1.0 / eta).unwrap().in_basis(g.basis());
        let z = map.apply(&pauli(3));
        assert!(max_abs(&(z - pauli(3).scale(exp(-2.0)))) < 1e-10);
        let x = map.apply(&pauli(1));
        assert!(max_abs(&(x - pauli(1).scale(exp(-1.0)))) < 1e-10);
        let late = semigroup(&g, 60.0 / eta).unwrap();
        let out = late.apply(&matrix_unit(2, 0, 0));
        assert!(max_abs(&(out - CMatrix::identity(2, 2).scale(0.5))) < 1e-12);
    }

    #[test]
    fn transposition_is_not_completely_positive() {
        let t = crate::operators::vectorize(2, |m| m.transpose());
        let report = verify_cptp(&t);
        assert!(report.trace_defect < 1e-15);
        assert!((report.choi_min_eig + 1.0).abs() < 1e-12);
        assert!(!report.passes());
        assert!(verify_cptp(&Superoperator::identity(2)).passes());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn semigroup_is_cptp(t in 0.0..20.0f64, period in 0.2..4.0f64, tau_c in 0.1..3.0f64) {
            let g = parallel_generator(period, 1.0, tau_c, 1e-8);
            let r = verify_cptp(&semigroup(&g, t).unwrap());
            prop_assert!(r.passes(), "{r:?}");
        }

        #[test]
        fn generator_preserves_trace_and_hermiticity(period in 0.2..4.0f64, tau_c in 0.1..3.0f64) {
            let g = parallel_generator(period, 1.0, tau_c, 1e-8);
            for i in 0..2 {
                for j in 0..2 {
                    let e = matrix_unit(2, i, j);
                    let img = g.superop().apply(&e);
                    prop_assert!(img.trace().norm() < 1e-12);
                    let adj = g.superop().apply(&e.adjoint());
                    prop_assert!(max_abs(&(img.adjoint() - adj)) < 1e-12);
                }
            }
        }

        #[test]
        fn closed_rates_nonnegative(period in 1e-3..1e3f64, t2 in 1e-3..1e3f64, tau_c in 1e-3..1e3f64) {
            prop_assert!(rate_parallel_closed(period, t2, tau_c).unwrap().eta >= 0.0);
            prop_assert!(rate_perp_closed(period, t2, tau_c).unwrap().eta >= 0.0);
        }
    }
}
