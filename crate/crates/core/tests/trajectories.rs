use bangbang_core::bath::SpectralDensity;
use bangbang_core::dynamics::{closed_form_bloch, closed_form_perp, evolve, Frame, TlsParams};
use bangbang_core::floquet::{harmonic_decomposition, KickedModel};
use bangbang_core::lindblad::{build_generator, LindbladGenerator};
use bangbang_core::operators::{bloch_from_density, c, density_from_bloch, max_abs, BlochVector, DensityMatrix};
use bangbang_core::oracle::integrate_master_equation;
use bangbang_core::tls;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn longitudinal(delta: f64, period: f64, t2: f64, tau_c: f64) -> (KickedModel, LindbladGenerator) {
    let m = tls::magic_angle_model(delta, period).unwrap();
    let h = harmonic_decomposition(&m, &[tls::longitudinal_coupling()], 8).unwrap();
    let g = build_generator(&h, &[SpectralDensity::lorentzian(t2, tau_c).unwrap()], 1e-12).unwrap();
    (m, g)
}

fn transverse(period: f64, a: f64, omega_cut: f64) -> (KickedModel, LindbladGenerator) {
    let m = tls::magic_angle_model(0.0, period).unwrap();
    let h = harmonic_decomposition(&m, &tls::transverse_couplings(), 8).unwrap();
    let sd = SpectralDensity::phonon(a, omega_cut, f64::INFINITY).unwrap();
    let g = build_generator(&h, &[sd.clone(), sd], 1e-12).unwrap();
    (m, g)
}

fn parity(t: f64, period: f64) -> (f64, f64) {
    let n = (t / period).floor();
    (n, if n as i64 % 2 == 0 { 1.0 } else { -1.0 })
}

/// Lab-frame populations and coherence for longitudinal noise, written out
/// element by element.
fn lab_elements(rho0: &DensityMatrix, omega0: f64, delta: f64, period: f64, eta: f64, t: f64) -> (f64, Complex64) {
    let r = rho0.matrix();
    let (r11, r22, r12, r21) = (r[(0, 0)].re, r[(1, 1)].re, r[(0, 1)], r[(1, 0)]);
    let (n, sign) = parity(t, period);
    let e = |x: f64| Complex64::from_polar(1.0, x);
    let dt = delta * period;
    let p11 = 0.5 * (1.0 + sign * (-eta * t).exp() * (r11 - r22));
    let p21 = 0.5 * (-2.0 * eta * t).exp() * e(-(dt * n - omega0 * t)) * (e(-dt) * r12 + r21)
        - 0.5 * sign * (-eta * t).exp() * e(-(dt * (1.0 + n) - omega0 * t)) * (r12 - e(dt) * r21);
    (p11, p21)
}

/// Resonant transverse coherence.
fn lab_coherence_resonant(rho0: &DensityMatrix, omega0: f64, period: f64, eta: f64, t: f64) -> Complex64 {
    let r = rho0.matrix();
    let (r12, r21) = (r[(0, 1)], r[(1, 0)]);
    let (_, sign) = parity(t, period);
    0.5 * Complex64::from_polar(1.0, omega0 * t) * ((-2.0 * eta * t).exp() * (r12 + r21) - sign * (-eta * t).exp() * (r12 - r21))
}

fn random_state(rng: &mut ChaCha8Rng) -> DensityMatrix {
    let v: [f64; 3] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt().max(1.0);
    density_from_bloch(&BlochVector::new(v[0] / n, v[1] / n, v[2] / n).unwrap()).unwrap()
}

fn random_times(rng: &mut ChaCha8Rng, n: usize, t_max: f64) -> Vec<f64> {
    let mut t: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..t_max)).collect();
    t.sort_by(f64::total_cmp);
    t.dedup();
    t
}

#[test]
fn longitudinal_elements_match_engine() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for &(delta, period) in &[(0.0, 1.5), (0.45, 0.8), (-1.2, 2.1)] {
        let omega_ext = 9.0;
        let omega0 = omega_ext + delta;
        let (m, g) = longitudinal(delta, period, 3.0, 0.7);
        let eta = g.tls_rates().unwrap().coherence;
        let rho0 = random_state(&mut rng);
        let times = random_times(&mut rng, 200, 4.0 / eta);
        let traj = evolve(&m, &g, &rho0, &times, Frame::Lab { omega_ext }).unwrap();
        for (&t, s) in times.iter().zip(&traj.states) {
            let (p11, p21) = lab_elements(&rho0, omega0, delta, period, eta, t);
            let got = s.matrix();
            assert!((got[(0, 0)] - c(p11, 0.0)).norm() < 1e-10, "Δ = {delta}, t = {t}");
            assert!((got[(1, 0)] - p21).norm() < 1e-10, "Δ = {delta}, t = {t}: {} vs {p21}", got[(1, 0)]);
        }
    }
}

#[test]
fn transverse_coherence_matches_engine() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let omega0 = 6.0;
    let (m, g) = transverse(2.0 * PI / 3.0, 0.05, 2.0);
    let eta = g.tls_rates().unwrap().coherence;
    let p = TlsParams::new(omega0, omega0, m.period(), eta).unwrap();
    let rho0 = random_state(&mut rng);
    let times = random_times(&mut rng, 200, 4.0 / eta);
    let traj = evolve(&m, &g, &rho0, &times, Frame::Lab { omega_ext: omega0 }).unwrap();
    for (&t, s) in times.iter().zip(&traj.states) {
        let want = lab_coherence_resonant(&rho0, omega0, m.period(), eta, t);
        assert!((s.matrix()[(1, 0)] - want).norm() < 1e-10, "t = {t}");
        let closed = closed_form_perp(&p, &rho0, t).unwrap();
        assert!(max_abs(&(s.matrix() - closed.matrix())) < 1e-10);
    }
}

#[test]
fn engine_matches_integrator_over_five_lifetimes() {
    let (m, g) = longitudinal(0.3, 1.0, 1.0, 0.5);
    let eta = g.tls_rates().unwrap().coherence;
    let rho0 = density_from_bloch(&BlochVector::new(0.6, 0.0, 0.8).unwrap()).unwrap();
    let t_end = 5.0 / eta;
    let dt = 0.01 / g.norm();
    let steps = (t_end / dt).ceil();
    let rk = integrate_master_equation(&g, &rho0, t_end, t_end / steps).unwrap();
    let engine = evolve(&m, &g, &rho0, &[t_end], Frame::Interaction).unwrap();
    assert!(max_abs(&(rk.matrix() - engine.states[0].matrix())) < 1e-6);
}

#[test]
fn fast_kicking_freezes_the_bloch_vector() {
    let (t2, tau_c) = (1.0, 1.0);
    let x0 = BlochVector::new(0.3, 0.5, 0.7).unwrap();
    let r0 = x0.norm();

    let (m, g) = longitudinal(0.0, tau_c / 50.0, t2, tau_c);
    let rho0 = density_from_bloch(&x0).unwrap();
    let times: Vec<f64> = (1..=50).map(|k| k as f64 * t2 / 50.0).collect();
    let traj = evolve(&m, &g, &rho0, &times, Frame::Rotating).unwrap();
    for s in &traj.states {
        assert!(bloch_from_density(s).unwrap().norm() >= 0.99 * r0);
    }

    let (_, g_slow) = longitudinal(0.0, 50.0 * tau_c, t2, tau_c);
    let eta = g_slow.tls_rates().unwrap().coherence;
    assert!((eta * t2 - 1.0).abs() < 0.05);
    let p = TlsParams::new(0.0, 0.0, 50.0 * tau_c, eta).unwrap();
    let x = closed_form_bloch(&p, &x0, t2).unwrap();
    assert!((x.x[2].abs() - (-eta * t2).exp() * x0.x[2]).abs() < 1e-12);
}
