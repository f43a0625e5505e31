//! One function per subcommand. Each writes its outputs through [`Run`] and
//! returns a property violation, if any, only after everything is on disk.

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use dnls_core::analysis::{
    gn_scan, gn_violations, interpolate, seminorm_distance, GnConstant, GnScanConfig, Profile, SolitonProfile,
};
use dnls_core::elliptic::{measured_branch_threshold, soliton_params, SolitonParams};
use dnls_core::hypo::rank_sweep;
use dnls_core::lattice::{mass, GibbsSpec, LatticeField, Nonlinearity};
use dnls_core::rng::{self, stream_id};
use dnls_core::sampling::{
    concentration_experiment, integrated_autocorrelation_time, ld_prob_grad, mcmc_chain, uniform_sphere_sample,
    ConcentrationConfig, McmcConfig, McmcResult,
};
use dnls_core::sde::{energy_curvature_scale, integrate, Integrator, Observables, Record, SdeParams};
use dnls_core::variational::{minimize_energy, MinimizeOptions};

use crate::config::{
    ConcentrateConfig, DistanceConfig, GncheckConfig, HeadlineConfig, InitSource, LdtestConfig, Method,
    RankcheckConfig, SampleConfig, SimulateConfig, SolitonConfig, SolitonDiscreteConfig, Source, StartKind,
};
use crate::error::{CliError, CliResult};
use crate::output::{Run, Table};

/// Largest relative mass drift tolerated before a run is flagged.
const MASS_TOLERANCE: f64 = 1e-10;

fn field_table(field: &LatticeField) -> Table {
    let mut t = Table::new(&["site", "re", "im", "modulus"]);
    for (i, z) in field.values().iter().enumerate() {
        t.push(vec![(i + 1).into(), z.re.into(), z.im.into(), z.norm().into()]);
    }
    t
}

// ---- soliton ----------------------------------------------------------------

#[derive(Serialize)]
struct SolitonReport {
    params: SolitonParams,
    energy: f64,
    energy_virial: f64,
    energy_quadrature: f64,
    constant_branch_energy: f64,
    measured_threshold: f64,
    reference_threshold: f64,
}

pub fn soliton(run: &mut Run, cfg: &SolitonConfig) -> CliResult<()> {
    let p = soliton_params(cfg.m, cfg.length)?;
    let report = SolitonReport {
        params: p,
        energy: p.energy()?,
        energy_virial: p.energy_virial(),
        energy_quadrature: p.energy_quadrature(),
        constant_branch_energy: -cfg.m * cfg.m / (4.0 * cfg.length),
        measured_threshold: measured_branch_threshold(cfg.length)?,
        reference_threshold: std::f64::consts::PI.powi(2) / cfg.length,
    };
    run.write_json("soliton.json", &report)?;
    let mut t = Table::new(&["x", "q"]);
    for i in 0..cfg.grid {
        let x = i as f64 * cfg.length / cfg.grid as f64;
        t.push(vec![x.into(), p.value(x).into()]);
    }
    run.write_table("profile", &t)
}

// ---- soliton-discrete ---------------------------------------------------------

#[derive(Serialize)]
struct MinimizeReport {
    n: usize,
    m: f64,
    energy: f64,
    mass: f64,
    iterations: usize,
    restarts_used: usize,
    grad_norm: f64,
}

pub fn soliton_discrete(run: &mut Run, cfg: &SolitonDiscreteConfig, seed: u64) -> CliResult<()> {
    let opts = MinimizeOptions {
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        restarts: cfg.restarts,
        seed,
        ..MinimizeOptions::default()
    };
    run.seed("restarts", seed, 0);
    let r = match minimize_energy(cfg.n, cfg.m, &opts) {
        Ok(r) => r,
        Err(dnls_core::Error::NotConverged {
            iterations,
            best_energy,
            grad_norm,
            best,
        }) => {
            run.write_bytes("best.bin", &best.to_bytes())?;
            return Err(CliError::NonConvergence(format!(
                "no restart reached tol {} in {iterations} iterations (best energy {best_energy:.12e}, \
                 grad norm {grad_norm:.3e}); best-so-far field written to best.bin",
                cfg.tol
            )));
        }
        Err(e) => return Err(e.into()),
    };
    run.write_json(
        "result.json",
        &MinimizeReport {
            n: cfg.n,
            m: cfg.m,
            energy: r.energy,
            mass: mass(&r.field),
            iterations: r.iterations,
            restarts_used: r.restarts_used,
            grad_norm: r.grad_norm,
        },
    )?;
    run.write_bytes("field.bin", &r.field.to_bytes())?;
    run.write_table("field", &field_table(&r.field))
}

// ---- simulate -----------------------------------------------------------------

fn perturbed(field: &LatticeField, amplitude: f64, m: f64, seed: u64) -> CliResult<LatticeField> {
    let mut r = rng::stream(seed, stream_id("simulate-noise", 0));
    let scale = amplitude * m.sqrt();
    let noisy = LatticeField::from_sites(field.n(), |site| {
        let (a, b): (f64, f64) = (StandardNormal.sample(&mut r), StandardNormal.sample(&mut r));
        field.values()[site - 1] + scale * Complex64::new(a, b)
    })?;
    Ok(noisy.with_mass(m)?)
}

fn initial_state(init: &InitSource, n: usize, m: f64, seed: u64) -> CliResult<LatticeField> {
    let soliton = || {
        minimize_energy(
            n,
            m,
            &MinimizeOptions {
                seed,
                ..MinimizeOptions::default()
            },
        )
    };
    let f = match init {
        InitSource::RandomSphere => uniform_sphere_sample(n, m, &mut rng::stream(seed, stream_id("simulate-init", 0))),
        InitSource::Soliton => soliton()?.field,
        InitSource::SolitonPlusNoise(a) => perturbed(&soliton()?.field, *a, m, seed)?,
        InitSource::File(path) => {
            let f = LatticeField::load(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            if f.n() != n {
                return Err(CliError::Config(format!(
                    "{} holds n = {} but sde.n = {n}",
                    path.display(),
                    f.n()
                )));
            }
            let mu = mass(&f);
            if (mu - m).abs() > 1e-9 * m {
                return Err(CliError::Config(format!(
                    "{} has mass {mu}, sde.m = {m}; rescale the field or change m",
                    path.display()
                )));
            }
            f
        }
    };
    Ok(f)
}

#[derive(Serialize)]
struct SimulateSummary {
    steps: u64,
    dt: f64,
    t_final: f64,
    max_mass_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_energy_increase: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    energy_increase_tolerance: Option<f64>,
    final_energy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    final_distance: Option<f64>,
}

fn observable_table(records: &[Record]) -> Table {
    let mut t = Table::new(&[
        "step",
        "t",
        "mass",
        "energy",
        "kinetic",
        "potential",
        "phase_grad_norm",
        "distance",
    ]);
    for r in records {
        t.push(vec![
            r.step.into(),
            r.t.into(),
            r.mass.into(),
            r.energy.into(),
            r.kinetic.into(),
            r.potential.into(),
            r.phase_grad_norm.into(),
            r.distance.into(),
        ]);
    }
    t
}

pub fn simulate(run: &mut Run, cfg: &SimulateConfig, seed: u64) -> CliResult<()> {
    let params: SdeParams = cfg.sde;
    let psi0 = initial_state(&cfg.init, params.n, params.m, seed)?;
    let dt = params.time_step();
    let segments = cfg.snapshots.max(1);
    let total = (cfg.t_final / dt).round() as u64;
    let obs = Observables {
        distance: cfg.distance,
        monotonicity: cfg.monotonicity,
    };
    let mut records: Vec<Record> = Vec::new();
    let mut state = psi0.clone();
    let mut done = 0u64;
    let mut max_mass_error = 0.0f64;
    let mut max_increase: Option<f64> = None;
    for seg in 1..=segments as u64 {
        // segment boundaries fall on whole steps so the total matches t_final / dt
        let end = total * seg / segments as u64;
        let steps = end - done;
        let stream = stream_id("simulate", seg);
        run.seed(format!("segment {seg}"), seed, stream);
        let tr = integrate(&state, &params, steps as f64 * dt, obs, rng::stream(seed, stream))?;
        let skip = usize::from(seg > 1);
        records.extend(tr.records.iter().skip(skip).map(|r| Record {
            step: r.step + done,
            t: (r.step + done) as f64 * dt,
            ..*r
        }));
        max_mass_error = max_mass_error.max(tr.max_mass_error);
        if let Some(inc) = tr.max_energy_increase {
            max_increase = Some(max_increase.map_or(inc, |x: f64| x.max(inc)));
        }
        done = end;
        state = tr.final_state;
        if cfg.snapshots > 0 {
            run.write_bytes(&format!("state_{seg:04}.bin"), &state.to_bytes())?;
        }
    }
    run.write_table("observables", &observable_table(&records))?;
    run.write_bytes("final.bin", &state.to_bytes())?;
    let tolerance = max_increase.map(|_| 1e-9 * dt * dt * energy_curvature_scale(&psi0, &params.nonlinearity()));
    let last = records.last().expect("at least the initial record");
    run.write_json(
        "summary.json",
        &SimulateSummary {
            steps: total,
            dt,
            t_final: total as f64 * dt,
            max_mass_error,
            max_energy_increase: max_increase,
            energy_increase_tolerance: tolerance,
            final_energy: last.energy,
            final_distance: last.distance,
        },
    )?;
    if max_mass_error > MASS_TOLERANCE {
        return Err(CliError::Violation(format!(
            "relative mass drift {max_mass_error:.3e} exceeds {MASS_TOLERANCE:e}"
        )));
    }
    if params.beta.is_infinite() {
        if let (Some(inc), Some(tol)) = (max_increase, tolerance) {
            if inc > tol {
                return Err(CliError::Violation(format!(
                    "zero-temperature energy rose by {inc:.3e} in one step (tolerance {tol:.3e})"
                )));
            }
        }
    }
    Ok(())
}

// ---- sample -------------------------------------------------------------------

fn chain_config(mcmc: &McmcConfig, seed: u64) -> McmcConfig {
    McmcConfig { seed, ..*mcmc }
}

pub fn sample(run: &mut Run, cfg: &SampleConfig, seed: u64) -> CliResult<()> {
    let nl = Nonlinearity::new(cfg.p, cfg.kappa)?;
    let spec = GibbsSpec::with_nonlinearity(cfg.n, cfg.m, cfg.beta, nl)?;
    let mc = chain_config(&cfg.mcmc, seed);
    for c in 0..cfg.chains as u64 {
        run.seed(format!("chain {c}"), seed, stream_id("mcmc", c));
    }
    let results: Vec<McmcResult> = (0..cfg.chains as u64)
        .into_par_iter()
        .map(|c| mcmc_chain(&spec, &mc, None, c))
        .collect::<Result<_, _>>()?;
    let mut chains = Table::new(&[
        "chain",
        "samples",
        "mean_energy",
        "se_energy",
        "tau_int",
        "ess",
        "pair_acceptance",
        "phase_acceptance",
        "delta_pair",
        "delta_phase",
        "max_mass_error",
    ]);
    let mut energies = Table::new(&["chain", "index", "energy"]);
    let mut worst_mass = 0.0f64;
    for (c, r) in results.iter().enumerate() {
        chains.push(vec![
            c.into(),
            r.energies.len().into(),
            r.mean_energy.into(),
            r.se_energy.into(),
            r.tau_int.into(),
            r.ess.into(),
            r.pair_acceptance.into(),
            r.phase_acceptance.into(),
            r.delta_pair.into(),
            r.delta_phase.into(),
            r.max_mass_error.into(),
        ]);
        for (i, &e) in r.energies.iter().enumerate() {
            energies.push(vec![c.into(), i.into(), e.into()]);
        }
        worst_mass = worst_mass.max(r.max_mass_error / cfg.m);
        if cfg.save_last {
            if let Some(f) = r.samples.last() {
                run.write_bytes(&format!("last_{c:03}.bin"), &f.to_bytes())?;
            }
        }
    }
    run.write_table("chains", &chains)?;
    run.write_table("energies", &energies)?;
    if worst_mass > MASS_TOLERANCE {
        return Err(CliError::Violation(format!(
            "sampler mass drift {worst_mass:.3e} exceeds {MASS_TOLERANCE:e}"
        )));
    }
    Ok(())
}

// ---- ldtest -------------------------------------------------------------------

pub fn ldtest(run: &mut Run, cfg: &LdtestConfig, seed: u64) -> CliResult<()> {
    let mut t = Table::new(&[
        "g",
        "g_o",
        "samples",
        "hits",
        "mc_estimate",
        "ci_low",
        "ci_high",
        "product_bound",
        "lambda_opt",
        "chernoff_bound",
        "delta_opt",
        "chernoff_half",
        "ordered",
    ]);
    let mut broken = Vec::new();
    for (i, &g) in cfg.thresholds.iter().enumerate() {
        let s = seed.wrapping_add(i as u64);
        run.seed(format!("threshold {g}"), s, 0);
        let r = ld_prob_grad(cfg.n, cfg.m, g, cfg.samples, s)?;
        // the estimate may exceed a bound only by sampling noise
        let ordered = r.ci_low <= r.product_upper && r.product_upper <= r.chernoff_opt * (1.0 + 1e-12);
        if !ordered {
            broken.push(g);
        }
        t.push(vec![
            g.into(),
            r.g_o.into(),
            r.samples.into(),
            r.hits.into(),
            r.mc_estimate.into(),
            r.ci_low.into(),
            r.ci_high.into(),
            r.product_upper.into(),
            r.lambda_opt.into(),
            r.chernoff_opt.into(),
            r.delta_opt.into(),
            r.chernoff_half.into(),
            ordered.into(),
        ]);
        run.write_table("ldtest", &t)?;
    }
    if !broken.is_empty() {
        return Err(CliError::Violation(format!(
            "estimate <= product bound <= Chernoff bound fails at g = {broken:?}"
        )));
    }
    Ok(())
}

// ---- concentrate ----------------------------------------------------------------

pub fn concentrate(run: &mut Run, cfg: &ConcentrateConfig, seed: u64) -> CliResult<()> {
    let (beta, scaling) = cfg.beta_scaling()?;
    let mut t = Table::new(&[
        "n",
        "beta_n",
        "e0n",
        "probability",
        "se",
        "ess",
        "mean_energy",
        "pair_acceptance",
        "phase_acceptance",
    ]);
    for &n in &cfg.n_list {
        let one = ConcentrationConfig {
            m: cfg.m,
            beta,
            scaling,
            n_list: vec![n],
            eps: cfg.eps,
            chains: cfg.chains,
            mcmc: chain_config(&cfg.mcmc, seed),
        };
        for r in concentration_experiment(&one)? {
            for &id in &r.chain_seeds {
                run.seed(format!("n {n} chain {}", id & 0xffff_ffff), seed, stream_id("mcmc", id));
            }
            t.push(vec![
                r.n.into(),
                r.beta_n.into(),
                r.e0n.into(),
                r.probability.into(),
                r.se.into(),
                r.ess.into(),
                r.mean_energy.into(),
                r.pair_acceptance.into(),
                r.phase_acceptance.into(),
            ]);
        }
        run.write_table("concentration", &t)?;
    }
    Ok(())
}

// ---- gncheck --------------------------------------------------------------------

#[derive(Serialize)]
struct GnReport {
    supremum: f64,
    c_hat: f64,
    argmax_n: usize,
    random_samples: usize,
    constant_probes: usize,
    scan: GnScanConfig,
    stored_c_hat: f64,
    reproduces_stored: bool,
    tested_c: f64,
    violations: usize,
}

pub fn gncheck(run: &mut Run, cfg: &GncheckConfig) -> CliResult<()> {
    let scan = GnScanConfig {
        samples: cfg.samples,
        n_min: cfg.n_min,
        n_max: cfg.n_max,
        seed: cfg.scan_seed.unwrap_or(GnScanConfig::default().seed),
    };
    run.seed("scan", scan.seed, 0);
    let report = gn_scan(&scan)?;
    let stored = GnConstant::persisted();
    let c = cfg.c.unwrap_or(stored.c_hat);
    let violations = gn_violations(&scan, c);
    run.write_json(
        "gncheck.json",
        &GnReport {
            supremum: report.supremum,
            c_hat: report.c_hat,
            argmax_n: report.argmax_n,
            random_samples: report.random_samples,
            constant_probes: report.constant_probes,
            scan,
            stored_c_hat: stored.c_hat,
            reproduces_stored: report.c_hat == stored.c_hat,
            tested_c: c,
            violations,
        },
    )?;
    if violations > 0 {
        return Err(CliError::Violation(format!(
            "{violations} samples exceed the ratio bound C = {c}"
        )));
    }
    Ok(())
}

// ---- rankcheck ------------------------------------------------------------------

pub fn rankcheck(run: &mut Run, cfg: &RankcheckConfig, seed: u64) -> CliResult<()> {
    let mut t = Table::new(&[
        "n",
        "points",
        "explicit_failures",
        "nested_failures",
        "mode_disagreements",
        "max_depth_needed",
        "pass",
    ]);
    let mut failed = Vec::new();
    for n in cfg.n_min..=cfg.n_max {
        let s = rank_sweep(n, cfg.points, seed)?;
        let pass = s.explicit_failures == 0 && s.nested_failures == 0 && s.mode_disagreements == 0;
        if !pass {
            failed.push(n);
        }
        t.push(vec![
            n.into(),
            s.points.into(),
            s.explicit_failures.into(),
            s.nested_failures.into(),
            s.mode_disagreements.into(),
            s.max_depth_needed.into(),
            pass.into(),
        ]);
    }
    run.seed("points", seed, 0);
    run.write_table("rankcheck", &t)?;
    if !failed.is_empty() {
        return Err(CliError::Violation(format!(
            "rank below 2n - 1 found for n = {failed:?}"
        )));
    }
    Ok(())
}

// ---- distance -------------------------------------------------------------------

fn load_profile(src: &Source) -> CliResult<Box<dyn Profile>> {
    Ok(match src {
        Source::File(path) => Box::new(interpolate(
            &LatticeField::load(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?,
        )),
        Source::Soliton(m) => Box::new(SolitonProfile::new(soliton_params(*m, 1.0)?)?),
    })
}

pub fn distance(run: &mut Run, cfg: &DistanceConfig) -> CliResult<()> {
    let a = load_profile(&cfg.a)?;
    let b = load_profile(&cfg.b)?;
    let d = seminorm_distance(a.as_ref(), b.as_ref());
    run.write_json("distance.json", &d)
}

// ---- headline -------------------------------------------------------------------

/// Fraction of ones in per-chain indicator series with a standard error
/// from each chain's integrated autocorrelation time.
fn pooled_fraction(series: &[Vec<f64>]) -> (f64, f64, f64) {
    let total: usize = series.iter().map(Vec::len).sum();
    if total == 0 {
        return (f64::NAN, f64::NAN, 0.0);
    }
    let mut hits = 0.0;
    let mut var_sum = 0.0;
    let mut ess = 0.0;
    for s in series {
        if s.is_empty() {
            continue;
        }
        let len = s.len() as f64;
        let tau = integrated_autocorrelation_time(s).max(1.0);
        let p: f64 = s.iter().sum::<f64>() / len;
        hits += p * len;
        ess += len / tau;
        var_sum += p * (1.0 - p) * tau * len;
    }
    (hits / total as f64, var_sum.sqrt() / total as f64, ess)
}

struct ChainDraws {
    fields: Vec<LatticeField>,
    energies: Vec<f64>,
    pair_acceptance: Option<f64>,
    phase_acceptance: Option<f64>,
}

fn sde_draws(cfg: &HeadlineConfig, spec: &GibbsSpec, init: LatticeField, seed: u64, id: u64) -> CliResult<ChainDraws> {
    let mut params = SdeParams::new(spec.n, spec.m, cfg.sde.gamma, spec.beta);
    params.dt = cfg.sde.dt;
    let mut it = Integrator::new(params, rng::stream(seed, stream_id("headline-sde", id)))?;
    let dt = it.dt();
    let burn = (cfg.sde.t_burn / dt).round() as u64;
    let every = ((cfg.sde.sample_every / dt).round() as u64).max(1);
    let count = ((cfg.sde.t_sample / dt).round() as u64 / every).max(1);
    let nl = params.nonlinearity();
    let mut psi = init.into_values();
    it.advance(&mut psi, burn, None);
    let mut fields = Vec::with_capacity(count as usize);
    let mut energies = Vec::with_capacity(count as usize);
    for _ in 0..count {
        it.advance(&mut psi, every, None);
        let f = LatticeField::new(psi.clone())?;
        energies.push(nl.energy(&f).total);
        fields.push(f);
    }
    Ok(ChainDraws {
        fields,
        energies,
        pair_acceptance: None,
        phase_acceptance: None,
    })
}

pub fn headline(run: &mut Run, cfg: &HeadlineConfig, seed: u64) -> CliResult<()> {
    let (beta, scaling) = cfg.beta_scaling()?;
    let q = SolitonProfile::new(soliton_params(cfg.m, 1.0)?)?;
    let mut t = Table::new(&[
        "n",
        "beta_n",
        "e0n",
        "soliton_distance",
        "samples",
        "ess",
        "probability",
        "se",
        "mean_distance",
        "min_distance",
        "energy_probability",
        "energy_se",
        "pair_acceptance",
        "phase_acceptance",
    ]);
    for &n in &cfg.n_list {
        let beta_n = beta * scaling.theta(n);
        let spec = GibbsSpec::new(n, cfg.m, beta_n)?;
        let soliton = minimize_energy(
            n,
            cfg.m,
            &MinimizeOptions {
                seed,
                ..MinimizeOptions::default()
            },
        )?;
        let floor = seminorm_distance(&interpolate(&soliton.field), &q).distance;
        let ids: Vec<u64> = (0..cfg.chains as u64).map(|c| ((n as u64) << 32) | c).collect();
        let starts: Vec<LatticeField> = ids
            .iter()
            .map(|&id| match cfg.start {
                StartKind::Soliton => soliton.field.clone(),
                StartKind::RandomSphere => {
                    uniform_sphere_sample(n, cfg.m, &mut rng::stream(seed, stream_id("headline-start", id)))
                }
            })
            .collect();
        let mc = chain_config(&cfg.mcmc, seed);
        for &id in &ids {
            let stream = match cfg.method {
                Method::Mcmc => stream_id("mcmc", id),
                Method::Sde => stream_id("headline-sde", id),
            };
            run.seed(format!("n {n} chain {}", id & 0xffff_ffff), seed, stream);
        }
        let draws: Vec<ChainDraws> = ids
            .par_iter()
            .zip(starts)
            .map(|(&id, start)| match cfg.method {
                Method::Mcmc => {
                    let r = mcmc_chain(&spec, &mc, Some(start), id)?;
                    Ok(ChainDraws {
                        fields: r.samples,
                        energies: r.energies,
                        pair_acceptance: Some(r.pair_acceptance),
                        phase_acceptance: Some(r.phase_acceptance),
                    })
                }
                Method::Sde => sde_draws(cfg, &spec, start, seed, id),
            })
            .collect::<CliResult<_>>()?;
        let distances: Vec<Vec<f64>> = draws
            .iter()
            .map(|d| {
                d.fields
                    .par_iter()
                    .map(|f| seminorm_distance(&interpolate(f), &q).distance)
                    .collect()
            })
            .collect();
        let near: Vec<Vec<f64>> = distances
            .iter()
            .map(|ds| ds.iter().map(|&d| f64::from(u8::from(d < cfg.eps))).collect())
            .collect();
        let low: Vec<Vec<f64>> = draws
            .iter()
            .map(|d| {
                d.energies
                    .iter()
                    .map(|&h| f64::from(u8::from(h <= soliton.energy + cfg.energy_eps)))
                    .collect()
            })
            .collect();
        let (p, se, ess) = pooled_fraction(&near);
        let (pe, see, _) = pooled_fraction(&low);
        let all: Vec<f64> = distances.iter().flatten().copied().collect();
        let mean_d = all.iter().sum::<f64>() / all.len().max(1) as f64;
        let min_d = all.iter().copied().fold(f64::INFINITY, f64::min);
        let avg = |f: fn(&ChainDraws) -> Option<f64>| -> Option<f64> {
            let v: Vec<f64> = draws.iter().filter_map(f).collect();
            (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
        };
        t.push(vec![
            n.into(),
            beta_n.into(),
            soliton.energy.into(),
            floor.into(),
            all.len().into(),
            ess.into(),
            p.into(),
            se.into(),
            mean_d.into(),
            min_d.into(),
            pe.into(),
            see.into(),
            avg(|d| d.pair_acceptance).into(),
            avg(|d| d.phase_acceptance).into(),
        ]);
        run.write_table("headline", &t)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pooled_fraction_of_constant_series() {
        let (p, se, ess) = pooled_fraction(&[vec![1.0; 50], vec![1.0; 50]]);
        assert_eq!(p, 1.0);
        assert_eq!(se, 0.0);
        assert!(ess > 0.0);
    }

    #[test]
    fn pooled_fraction_of_iid_series() {
        let mut r = rng::stream(3, 0);
        let s: Vec<f64> = (0..20_000)
            .map(|_| f64::from(u8::from(rand::Rng::random::<f64>(&mut r) < 0.3)))
            .collect();
        let (p, se, _) = pooled_fraction(&[s]);
        assert!((p - 0.3).abs() < 5.0 * se, "p {p} se {se}");
        let binomial = (0.3f64 * 0.7 / 20_000.0).sqrt();
        assert!((se / binomial - 1.0).abs() < 0.3, "se {se} vs {binomial}");
    }

    #[test]
    fn noise_start_keeps_mass() {
        let f = uniform_sphere_sample(16, 4.0, &mut rng::stream(1, 1));
        let g = perturbed(&f, 0.3, 4.0, 5).unwrap();
        assert!((mass(&g) - 4.0).abs() < 1e-12);
        assert!(g != f);
    }
}
