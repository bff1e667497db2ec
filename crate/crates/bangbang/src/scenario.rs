//! Scenario dispatch: each run produces one [`Table`].

use std::f64::consts::PI;

use rayon::prelude::*;

use bangbang_core::bath::SpectralDensity;
use bangbang_core::dynamics::{closed_form_bloch, evolve, Frame, TlsParams};
use bangbang_core::echo::{echo_signal, extract_tau_c, DetuningEnsemble};
use bangbang_core::floquet::{harmonic_decomposition, KickedModel};
use bangbang_core::lindblad::{build_generator, rate_parallel_closed, rate_perp_closed, semigroup, verify_cptp, LindbladGenerator};
use bangbang_core::operators::{density_from_bloch, BlochVector, HermitianOperator};
use bangbang_core::oracle::{series_rate_parallel_adaptive, series_rate_perp};
use bangbang_core::tls;

use crate::config::{Coupling, EnsembleName, FrameName, Method, Model, Resolved, Scenario, SweepParameter};
use crate::io::{col, load_spectral_density, read_pairs, Column, Table};
use crate::RunError;

/// Harmonics computed up front; the generator extends them as needed.
const Q_INITIAL: usize = 8;

struct Ctx<'a> {
    r: &'a Resolved,
    scenario: Scenario,
}

impl Ctx<'_> {
    fn numeric(&self, context: impl Into<String>) -> impl FnOnce(bangbang_core::Error) -> RunError {
        let scenario = self.scenario.name();
        let context = context.into();
        move |source| RunError::Numeric { scenario, context, source }
    }

    fn model(&self) -> &Model {
        &self.r.model
    }

    fn table(&self, columns: Vec<Column>, rows: Vec<Vec<f64>>, notes: Vec<String>) -> Table {
        Table { scenario: self.scenario.name(), config_toml: self.r.to_toml(), columns, rows, notes }
    }

    fn sweep_points(&self) -> Vec<(f64, f64)> {
        let s = self.r.config.sweep.as_ref().expect("validated");
        s.values()
            .into_iter()
            .map(|v| match s.parameter {
                SweepParameter::Omega => (v, 2.0 * PI / v),
                SweepParameter::T => (2.0 * PI / v, v),
            })
            .collect()
    }

    fn bath(&self) -> Result<Vec<SpectralDensity>, RunError> {
        let m = self.model();
        let sd = if let Some(p) = &m.spectral_file {
            load_spectral_density(&self.r.path(p))?
        } else {
            match m.coupling {
                Coupling::Longitudinal => SpectralDensity::lorentzian(m.t2.unwrap(), m.tau_c.unwrap()),
                Coupling::Transverse => SpectralDensity::phonon(m.a.unwrap(), m.omega_cut.unwrap(), m.beta),
            }
            .map_err(self.numeric("spectral density"))?
        };
        Ok(match m.coupling {
            Coupling::Longitudinal => vec![sd],
            Coupling::Transverse => vec![sd.clone(), sd],
        })
    }

    fn couplings(&self) -> Vec<HermitianOperator> {
        match self.model().coupling {
            Coupling::Longitudinal => vec![tls::longitudinal_coupling()],
            Coupling::Transverse => tls::transverse_couplings(),
        }
    }

    fn kicked_model(&self, period: f64) -> Result<KickedModel, RunError> {
        let m = self.model();
        tls::kicked_model(m.delta, m.lambda, period).map_err(self.numeric(format!("model at T = {period:e}")))
    }

    fn generator(&self, period: f64, sds: &[SpectralDensity]) -> Result<LindbladGenerator, RunError> {
        let km = self.kicked_model(period)?;
        let h = harmonic_decomposition(&km, &self.couplings(), Q_INITIAL).map_err(self.numeric(format!("harmonics at T = {period:e}")))?;
        build_generator(&h, sds, self.model().rel_tol).map_err(self.numeric(format!("generator at T = {period:e}")))
    }

    fn closed_rate(&self, omega: f64, period: f64) -> Result<f64, RunError> {
        let m = self.model();
        let r = match m.coupling {
            Coupling::Longitudinal => rate_parallel_closed(period, m.t2.unwrap(), m.tau_c.unwrap()),
            Coupling::Transverse => rate_perp_closed(omega, m.a.unwrap(), m.omega_cut.unwrap()),
        };
        r.map(|r| r.eta).map_err(self.numeric(format!("closed-form rate at T = {period:e}")))
    }

    fn times(&self, t_end: f64, points: usize) -> Vec<f64> {
        if points == 1 {
            return vec![t_end];
        }
        (0..points).map(|k| t_end * k as f64 / (points - 1) as f64).collect()
    }
}

fn rates(ctx: &Ctx) -> Result<Table, RunError> {
    let sds = ctx.bath()?;
    let rows = ctx
        .sweep_points()
        .into_par_iter()
        .map(|(omega, period)| {
            let gamma = sds[0].evaluate(omega).map_err(ctx.numeric("spectral density"))?;
            let eta = ctx.closed_rate(omega, period)?;
            let g = ctx.generator(period, &sds)?;
            let eta_gen = g.tls_rates().map_err(ctx.numeric("rates"))?.coherence;
            Ok(vec![omega, period, gamma, eta, eta_gen])
        })
        .collect::<Result<Vec<_>, RunError>>()?;
    let (g, e, eg) = match ctx.scenario {
        Scenario::RatesParallel => ("gamma_par", "eta_par", "eta_par_generator"),
        _ => ("gamma_perp", "eta_perp", "eta_perp_generator"),
    };
    let cols = vec![col("Omega", "rad/time"), col("T", "time"), col(g, "1/time"), col(e, "1/time"), col(eg, "1/time")];
    Ok(ctx.table(cols, rows, vec![]))
}

fn audit(ctx: &Ctx) -> Result<Table, RunError> {
    let sds = ctx.bath()?;
    let m = ctx.model();
    let rows = ctx
        .sweep_points()
        .into_par_iter()
        .map(|(omega, period)| {
            let eta = ctx.closed_rate(omega, period)?;
            let g = ctx.generator(period, &sds)?;
            let eta_gen = g.tls_rates().map_err(ctx.numeric("rates"))?.coherence;
            let series = match m.coupling {
                Coupling::Longitudinal => series_rate_parallel_adaptive(period, m.t2.unwrap(), m.tau_c.unwrap(), 1e-12),
                Coupling::Transverse => series_rate_perp(omega, m.a.unwrap(), m.omega_cut.unwrap(), 1e-13),
            }
            .map_err(ctx.numeric(format!("series at T = {period:e}")))?;
            let mut trace_defect: f64 = 0.0;
            let mut choi_min: f64 = f64::INFINITY;
            let scale = if eta_gen > 0.0 { 1.0 / eta_gen } else { 1.0 };
            for t in [0.1 * scale, scale, 10.0 * scale] {
                let rep = verify_cptp(&semigroup(&g, t).map_err(ctx.numeric("semigroup"))?);
                trace_defect = trace_defect.max(rep.trace_defect);
                choi_min = choi_min.min(rep.choi_min_eig);
            }
            let tr = g.truncation();
            Ok(vec![
                omega,
                period,
                eta,
                eta_gen,
                (eta_gen - eta).abs() / eta,
                series.eta,
                (series.eta - eta).abs() / eta,
                trace_defect,
                choi_min,
                g.population_coherence_coupling(),
                tr.q_max_used as f64,
                tr.tail_bound,
            ])
        })
        .collect::<Result<Vec<_>, RunError>>()?;
    let cols = vec![
        col("Omega", "rad/time"),
        col("T", "time"),
        col("eta_closed", "1/time"),
        col("eta_generator", "1/time"),
        col("generator_rel_residual", "1"),
        col("eta_series", "1/time"),
        col("series_rel_residual", "1"),
        col("trace_defect", "1"),
        col("choi_min_eig", "1"),
        col("block_coupling", "1/time"),
        col("q_max_used", "1"),
        col("tail_bound", "1/time"),
    ];
    Ok(ctx.table(cols, rows, vec![]))
}

fn bloch0(x: [f64; 3]) -> Result<BlochVector, bangbang_core::Error> {
    BlochVector::new(x[0], x[1], x[2])
}

fn trajectory(ctx: &Ctx) -> Result<Table, RunError> {
    let t = ctx.r.config.trajectory.as_ref().expect("validated");
    let m = ctx.model();
    let period = m.period.unwrap();
    let times = ctx.times(t.t_end, t.points);
    let x0 = bloch0(t.x0).map_err(ctx.numeric("x0"))?;
    let mut notes = Vec::new();
    let states: Vec<[f64; 3]> = match t.method {
        Method::Engine => {
            let sds = ctx.bath()?;
            let g = ctx.generator(period, &sds)?;
            let tr = g.truncation();
            notes.push(format!("generator: q_max_used = {}, tail_bound = {:.3e}", tr.q_max_used, tr.tail_bound));
            let km = ctx.kicked_model(period)?;
            let rho0 = density_from_bloch(&x0).map_err(ctx.numeric("x0"))?;
            let frame = match t.frame {
                FrameName::Lab => Frame::Lab { omega_ext: m.omega_ext },
                FrameName::Rotating => Frame::Rotating,
                FrameName::Interaction => Frame::Interaction,
            };
            let traj = evolve(&km, &g, &rho0, &times, frame).map_err(ctx.numeric("evolution"))?;
            traj.bloch().map_err(ctx.numeric("Bloch vector"))?.into_iter().map(|b| b.x).collect()
        }
        Method::ClosedForm => {
            let eta = ctx.closed_rate(2.0 * PI / period, period)?;
            let p = TlsParams::new(m.omega0, m.omega_ext, period, eta).map_err(ctx.numeric("parameters"))?;
            times
                .par_iter()
                .map(|&s| closed_form_bloch(&p, &x0, s).map(|b| b.x).map_err(ctx.numeric(format!("closed form at t = {s:e}"))))
                .collect::<Result<Vec<_>, RunError>>()?
        }
    };
    let rows = times
        .iter()
        .zip(&states)
        .map(|(&s, x)| vec![s, x[0], x[1], x[2], (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()])
        .collect();
    let cols = vec![col("t", "time"), col("x1", "1"), col("x2", "1"), col("x3", "1"), col("norm", "1")];
    Ok(ctx.table(cols, rows, notes))
}

fn echo(ctx: &Ctx) -> Result<Table, RunError> {
    let e = ctx.r.config.echo.as_ref().expect("validated");
    let m = ctx.model();
    let period = m.period.unwrap();
    let seed = ctx.r.config.seed;
    let ensemble = match e.ensemble {
        EnsembleName::Gaussian => DetuningEnsemble::gaussian(e.width.unwrap(), seed),
        EnsembleName::Uniform => DetuningEnsemble::uniform(e.width.unwrap(), seed),
        EnsembleName::Discrete => DetuningEnsemble::discrete(e.samples.as_ref().unwrap().iter().map(|s| (s[0], s[1])).collect(), seed),
    }
    .map_err(ctx.numeric("ensemble"))?;
    let ensemble = if e.monte_carlo > 0 { ensemble.sampled(e.monte_carlo).map_err(ctx.numeric("sampling"))? } else { ensemble };
    let eta = ctx.closed_rate(2.0 * PI / period, period)?;
    let p = TlsParams::new(m.omega0, m.omega_ext, period, eta).map_err(ctx.numeric("parameters"))?;
    let x0 = bloch0(e.x0).map_err(ctx.numeric("x0"))?;
    let times = ctx.times(e.t_end, e.points);
    let sig = echo_signal(&ensemble, &p, &x0, &times).map_err(ctx.numeric("echo signal"))?;
    let rows = (0..times.len())
        .map(|k| {
            let [x1, x2] = sig.transverse[k];
            vec![times[k], sig.avg_cos[k], sig.avg_sin[k], x1, x2, x1.hypot(x2)]
        })
        .collect();
    let cols = vec![
        col("t", "time"),
        col("avg_cos", "1"),
        col("avg_sin", "1"),
        col("x1", "1"),
        col("x2", "1"),
        col("transverse", "1"),
    ];
    Ok(ctx.table(cols, rows, vec![format!("eta_par = {eta:.12e} 1/time")]))
}

fn extract(ctx: &Ctx) -> Result<Table, RunError> {
    let x = ctx.r.config.extract.as_ref().expect("validated");
    let mut data = read_pairs(&ctx.r.path(&x.measurements))?;
    if data.len() < 2 {
        return Err(RunError::Numeric {
            scenario: ctx.scenario.name(),
            context: "measurements".into(),
            source: bangbang_core::Error::InconsistentData("need at least two (T, eta) rows".into()),
        });
    }
    data.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (t_slow, eta_slow) = *data.last().unwrap();
    let rows = data[..data.len() - 1]
        .iter()
        .map(|&(t_fast, eta_fast)| {
            let est = extract_tau_c(eta_slow, eta_fast, t_fast).map_err(ctx.numeric(format!("extraction at T = {t_fast:e}")))?;
            Ok(vec![t_fast, eta_fast, est.t2, est.tau_c, est.residual, if est.degenerate { 1.0 } else { 0.0 }])
        })
        .collect::<Result<Vec<_>, RunError>>()?;
    let cols = vec![
        col("T_fast", "time"),
        col("eta_fast", "1/time"),
        col("T2", "time"),
        col("tau_c", "time"),
        col("residual", "1"),
        col("degenerate", "1"),
    ];
    Ok(ctx.table(cols, rows, vec![format!("slow measurement: T = {t_slow:.12e} time, eta = {eta_slow:.12e} 1/time")]))
}

pub fn run(r: &Resolved) -> Result<Table, RunError> {
    let ctx = Ctx { r, scenario: r.config.scenario };
    match ctx.scenario {
        Scenario::RatesParallel | Scenario::RatesPerp => rates(&ctx),
        Scenario::GeneratorAudit => audit(&ctx),
        Scenario::Trajectory => trajectory(&ctx),
        Scenario::Echo => echo(&ctx),
        Scenario::ExtractTauc => extract(&ctx),
    }
}
