//! Sampling on the mass sphere `S_m^n`: exact uniform draws, a Metropolis
//! sampler for `e^{−βH_n} dμ_m^n`, small-gradient large-deviation estimators
//! with their analytic upper bounds, and the box-volume lower bound.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{mass, omega, GibbsSpec, LatticeField, Nonlinearity};
use crate::rng::{self, StreamRng};
use crate::sum::ksum;
use crate::variational::{minimize_energy, MinimizeOptions};

/// `ψ(j) = √(mn) Z_j / ‖Z‖` with i.i.d. standard complex normals `Z_j`.
pub fn uniform_sphere_sample<R: Rng + ?Sized>(n: usize, m: f64, rng: &mut R) -> LatticeField {
    assert!(n >= 2, "lattice size must be >= 2");
    loop {
        let z: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = ksum(z.iter().map(|c| c.norm_sqr())).sqrt();
        if norm > 0.0 {
            let s = (m * n as f64).sqrt() / norm;
            return LatticeField::from_vec_unchecked(z.into_iter().map(|c| c * s).collect());
        }
    }
}

// ---- Metropolis sampler --------------------------------------------------

/// Settings of the Metropolis sampler.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McmcConfig {
    /// Proposals after burn-in.
    pub steps: usize,
    pub burn_in: usize,
    /// Probability of a pair (Givens) rotation proposal.
    pub pair_weight: f64,
    /// Probability of a single-site phase proposal.
    pub phase_weight: f64,
    /// Initial rotation-angle scale, in `(0, π]`.
    pub delta_rot: f64,
    /// Keep one sample every `thin` proposals.
    pub thin: usize,
    pub seed: u64,
    /// Adapt the angle scales during burn-in towards acceptance 0.3–0.5.
    pub tune: bool,
    /// Full energy recomputation and mass re-projection cadence.
    pub reproject_every: usize,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            steps: 200_000,
            burn_in: 50_000,
            pair_weight: 0.7,
            phase_weight: 0.3,
            delta_rot: 0.5,
            thin: 100,
            seed: 0,
            tune: true,
            reproject_every: 10_000,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.pair_weight >= 0.0 && self.phase_weight >= 0.0) {
            return Err(Error::param("pair_weight", "proposal weights must be nonnegative"));
        }
        if (self.pair_weight + self.phase_weight - 1.0).abs() > 1e-12 {
            return Err(Error::param(
                "pair_weight",
                format!(
                    "proposal weights must sum to 1, got {} + {}",
                    self.pair_weight, self.phase_weight
                ),
            ));
        }
        if !(self.delta_rot > 0.0 && self.delta_rot <= PI) {
            return Err(Error::param(
                "delta_rot",
                format!("must lie in (0, π], got {}", self.delta_rot),
            ));
        }
        if self.thin == 0 {
            return Err(Error::param("thin", "must be >= 1"));
        }
        if self.reproject_every == 0 {
            return Err(Error::param("reproject_every", "must be >= 1"));
        }
        Ok(())
    }
}

fn validate_target(spec: &GibbsSpec) -> Result<()> {
    // β = 0 (the uniform measure) is a valid sampling target.
    let mut probe = *spec;
    if probe.beta == 0.0 {
        probe.beta = 1.0;
    }
    if !probe.beta.is_finite() {
        return Err(Error::param("beta", "sampling needs a finite inverse temperature"));
    }
    probe.validate()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProposalStats {
    pub proposed: u64,
    pub accepted: u64,
}

impl ProposalStats {
    pub fn rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

/// A single Metropolis chain on `S_m^n` with incremental energy updates.
#[derive(Clone, Debug)]
pub struct GibbsChain {
    spec: GibbsSpec,
    nl: Nonlinearity,
    values: Vec<Complex64>,
    energy: f64,
    rng: StreamRng,
    pair_weight: f64,
    delta_pair: f64,
    delta_phase: f64,
    reproject_every: usize,
    since_resync: usize,
    pub pair_stats: ProposalStats,
    pub phase_stats: ProposalStats,
}

impl GibbsChain {
    pub fn new(spec: GibbsSpec, init: LatticeField, cfg: &McmcConfig, rng: StreamRng) -> Result<Self> {
        validate_target(&spec)?;
        cfg.validate()?;
        if init.n() != spec.n {
            return Err(Error::DimensionMismatch {
                expected: spec.n,
                got: init.n(),
            });
        }
        let init = init.with_mass(spec.m)?;
        let nl = spec.nonlinearity();
        let energy = nl.energy(&init).total;
        Ok(Self {
            spec,
            nl,
            values: init.into_values(),
            energy,
            rng,
            pair_weight: cfg.pair_weight,
            delta_pair: cfg.delta_rot,
            delta_phase: cfg.delta_rot,
            reproject_every: cfg.reproject_every,
            since_resync: 0,
            pair_stats: ProposalStats::default(),
            phase_stats: ProposalStats::default(),
        })
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn field(&self) -> LatticeField {
        LatticeField::from_vec_unchecked(self.values.clone())
    }

    pub fn angle_scales(&self) -> (f64, f64) {
        (self.delta_pair, self.delta_phase)
    }

    /// Energy carried by the sites in `sites` and their bonds.
    fn local_energy(&self, sites: &[usize]) -> f64 {
        let n = self.values.len();
        let nf = n as f64;
        let mut bonds = [usize::MAX; 4];
        let mut nb = 0;
        for &s in sites {
            for b in [(s + n - 1) % n, s] {
                if !bonds[..nb].contains(&b) {
                    bonds[nb] = b;
                    nb += 1;
                }
            }
        }
        let mut e = 0.0;
        for &b in &bonds[..nb] {
            e += 0.5 * nf * (self.values[(b + 1) % n] - self.values[b]).norm_sqr();
        }
        let pot = self.nl.kappa / ((self.nl.p + 1.0) * nf);
        let mut last = usize::MAX;
        for &s in sites {
            if s != last {
                e += pot * self.nl.site_power(self.values[s].norm_sqr());
            }
            last = s;
        }
        e
    }

    fn accept(&mut self, delta_h: f64) -> bool {
        let x = self.spec.beta * delta_h;
        x <= 0.0 || self.rng.random::<f64>() < (-x).exp()
    }

    /// One Metropolis proposal; returns whether it was accepted.
    pub fn step(&mut self) -> bool {
        let n = self.values.len();
        let accepted = if self.rng.random::<f64>() < self.pair_weight {
            let a = self.rng.random_range(0..2 * n);
            let mut b = self.rng.random_range(0..2 * n - 1);
            if b >= a {
                b += 1;
            }
            let (sa, sb) = (a / 2, b / 2);
            let sites = if sa <= sb { [sa, sb] } else { [sb, sa] };
            let sites: &[usize] = if sa == sb { &sites[..1] } else { &sites };
            let t = self.rng.random_range(-self.delta_pair..self.delta_pair);
            let before = self.local_energy(sites);
            let saved = [self.values[sa], self.values[sb]];
            let (s, c) = t.sin_cos();
            let u = coord(&self.values, a);
            let v = coord(&self.values, b);
            set_coord(&mut self.values, a, u * c - v * s);
            set_coord(&mut self.values, b, u * s + v * c);
            let dh = self.local_energy(sites) - before;
            self.pair_stats.proposed += 1;
            if self.accept(dh) {
                self.energy += dh;
                self.pair_stats.accepted += 1;
                true
            } else {
                self.values[sa] = saved[0];
                self.values[sb] = saved[1];
                false
            }
        } else {
            let s = self.rng.random_range(0..n);
            let t = self.rng.random_range(-self.delta_phase..self.delta_phase);
            let before = self.local_energy(&[s]);
            let saved = self.values[s];
            self.values[s] *= Complex64::from_polar(1.0, t);
            let dh = self.local_energy(&[s]) - before;
            self.phase_stats.proposed += 1;
            if self.accept(dh) {
                self.energy += dh;
                self.phase_stats.accepted += 1;
                true
            } else {
                self.values[s] = saved;
                false
            }
        };
        self.since_resync += 1;
        if self.since_resync >= self.reproject_every {
            self.resync();
        }
        accepted
    }

    /// Exact re-projection to the sphere and full energy recomputation.
    pub fn resync(&mut self) {
        let n = self.values.len() as f64;
        let norm2 = ksum(self.values.iter().map(|z| z.norm_sqr()));
        let s = (self.spec.m * n / norm2).sqrt();
        for z in &mut self.values {
            *z *= s;
        }
        self.energy = self
            .nl
            .energy(&LatticeField::from_vec_unchecked(self.values.clone()))
            .total;
        self.since_resync = 0;
    }

    /// Run `steps` proposals, adapting both angle scales every 500
    /// proposals of their kind towards acceptance in `[0.3, 0.5]`.
    pub fn tune(&mut self, steps: usize) {
        const BLOCK: u64 = 500;
        let mut pair0 = self.pair_stats;
        let mut phase0 = self.phase_stats;
        for _ in 0..steps {
            self.step();
            if self.pair_stats.proposed - pair0.proposed >= BLOCK {
                let r = (self.pair_stats.accepted - pair0.accepted) as f64 / BLOCK as f64;
                self.delta_pair = adapt(self.delta_pair, r);
                pair0 = self.pair_stats;
            }
            if self.phase_stats.proposed - phase0.proposed >= BLOCK {
                let r = (self.phase_stats.accepted - phase0.accepted) as f64 / BLOCK as f64;
                self.delta_phase = adapt(self.delta_phase, r);
                phase0 = self.phase_stats;
            }
        }
        self.pair_stats = ProposalStats::default();
        self.phase_stats = ProposalStats::default();
    }
}

fn adapt(delta: f64, rate: f64) -> f64 {
    let d = if rate < 0.3 {
        delta * 0.7
    } else if rate > 0.5 {
        delta * 1.3
    } else {
        delta
    };
    d.clamp(1e-7, PI)
}

#[inline]
fn coord(v: &[Complex64], i: usize) -> f64 {
    if i.is_multiple_of(2) {
        v[i / 2].re
    } else {
        v[i / 2].im
    }
}

#[inline]
fn set_coord(v: &mut [Complex64], i: usize, x: f64) {
    if i.is_multiple_of(2) {
        v[i / 2].re = x;
    } else {
        v[i / 2].im = x;
    }
}

/// Output of [`mcmc_gibbs`].
#[derive(Clone, Debug)]
pub struct McmcResult {
    pub samples: Vec<LatticeField>,
    /// `H_n` at each retained sample.
    pub energies: Vec<f64>,
    pub pair_acceptance: f64,
    pub phase_acceptance: f64,
    pub delta_pair: f64,
    pub delta_phase: f64,
    pub tau_int: f64,
    pub ess: f64,
    pub mean_energy: f64,
    pub se_energy: f64,
    /// Largest `|mass − m|` seen at the retained samples.
    pub max_mass_error: f64,
}

/// Metropolis sampling of `μ^n_{β,m}`; `β = 0` gives the uniform measure.
///
/// Starts from `init` or, if absent, a uniform draw.
pub fn mcmc_gibbs(spec: &GibbsSpec, cfg: &McmcConfig, init: Option<LatticeField>) -> Result<McmcResult> {
    mcmc_chain(spec, cfg, init, 0)
}

/// As [`mcmc_gibbs`] with an explicit chain id for the RNG stream.
pub fn mcmc_chain(spec: &GibbsSpec, cfg: &McmcConfig, init: Option<LatticeField>, chain: u64) -> Result<McmcResult> {
    validate_target(spec)?;
    cfg.validate()?;
    let mut r = rng::stream(cfg.seed, rng::stream_id("mcmc", chain));
    let init = match init {
        Some(f) => f,
        None => uniform_sphere_sample(spec.n, spec.m, &mut r),
    };
    let mut chain = GibbsChain::new(*spec, init, cfg, r)?;
    if cfg.tune {
        chain.tune(cfg.burn_in);
    } else {
        for _ in 0..cfg.burn_in {
            chain.step();
        }
        chain.pair_stats = ProposalStats::default();
        chain.phase_stats = ProposalStats::default();
    }
    let keep = cfg.steps / cfg.thin;
    let mut samples = Vec::with_capacity(keep);
    let mut energies = Vec::with_capacity(keep);
    let mut max_mass_error = 0.0f64;
    for i in 1..=cfg.steps {
        chain.step();
        if i % cfg.thin == 0 {
            let f = chain.field();
            max_mass_error = max_mass_error.max((mass(&f) - spec.m).abs());
            energies.push(chain.energy());
            samples.push(f);
        }
    }
    let tau = integrated_autocorrelation_time(&energies);
    let ess = energies.len() as f64 / tau;
    let mean = ksum(energies.iter().copied()) / energies.len().max(1) as f64;
    let var = sample_variance(&energies);
    let (dp, dph) = chain.angle_scales();
    Ok(McmcResult {
        samples,
        pair_acceptance: chain.pair_stats.rate(),
        phase_acceptance: chain.phase_stats.rate(),
        delta_pair: dp,
        delta_phase: dph,
        tau_int: tau,
        ess,
        mean_energy: mean,
        se_energy: (var / ess).sqrt(),
        energies,
        max_mass_error,
    })
}

/// Unbiased sample variance.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mean = ksum(xs.iter().copied()) / xs.len() as f64;
    ksum(xs.iter().map(|x| (x - mean).powi(2))) / (xs.len() - 1) as f64
}

/// Integrated autocorrelation time `τ = 1 + 2Σρ(t)` with Sokal's adaptive
/// window (smallest `W` with `W ≥ 5τ(W)`). Returns 1 for constant series.
pub fn integrated_autocorrelation_time(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 4 {
        return 1.0;
    }
    let mean = ksum(xs.iter().copied()) / n as f64;
    let c0 = ksum(xs.iter().map(|x| (x - mean).powi(2))) / n as f64;
    if c0 <= 0.0 {
        return 1.0;
    }
    let mut tau = 1.0;
    for t in 1..n / 2 {
        let ct = ksum((0..n - t).map(|i| (xs[i] - mean) * (xs[i + t] - mean))) / n as f64;
        tau += 2.0 * ct / c0;
        if t as f64 >= 5.0 * tau {
            break;
        }
    }
    tau.max(1.0)
}

/// Effective sample size `N/τ`.
pub fn effective_sample_size(xs: &[f64]) -> f64 {
    xs.len() as f64 / integrated_autocorrelation_time(xs)
}

// ---- large deviations of the lattice gradient ----------------------------

/// Two-sided Wilson score interval at normal quantile `z`.
pub fn wilson_interval(hits: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let nt = trials as f64;
    let p = hits as f64 / nt;
    let z2 = z * z;
    let denom = 1.0 + z2 / nt;
    let centre = (p + z2 / (2.0 * nt)) / denom;
    let half = z * (p * (1.0 - p) / nt + z2 / (4.0 * nt * nt)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Normal quantile for a two-sided 99% interval.
pub const Z99: f64 = 2.575_829_303_548_901;

/// `ln` of `(1/(δ(1−δ)^{n−1})) (2g/m)^{n−1} e^{−2n ln n}`.
pub fn chernoff_log_bound(n: usize, m: f64, g: f64, delta: f64) -> f64 {
    let nf = n as f64;
    -delta.ln() - (nf - 1.0) * (-delta).ln_1p() + (nf - 1.0) * (2.0 * g / m).ln() - 2.0 * nf * nf.ln()
}

/// `ln ∏_{k=1}^{n} 1/(λ(ω_k² − g_o) + 1)`, or `+∞` outside the admissible range.
pub fn product_log_bound(n: usize, g_o: f64, lambda: f64) -> f64 {
    let mut s = 0.0;
    for k in 1..=n {
        let f = lambda * (omega(k, n).powi(2) - g_o) + 1.0;
        if f <= 0.0 {
            return f64::INFINITY;
        }
        s -= f.ln();
    }
    s
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol * (1.0 + a.abs().max(b.abs())) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Large-deviation summary for `μ_m^n(G_n ≤ g)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdReport {
    pub n: usize,
    pub m: f64,
    pub g: f64,
    /// `g_o = 2g/(n²m)`.
    pub g_o: f64,
    pub samples: u64,
    pub hits: u64,
    /// `None` when no sample hit the event; the CI still bounds it.
    pub mc_estimate: Option<f64>,
    pub ci_low: f64,
    pub ci_high: f64,
    pub chernoff_half: f64,
    pub chernoff_opt: f64,
    pub delta_opt: f64,
    pub product_upper: f64,
    pub lambda_opt: f64,
}

/// One draw of `n²m Σ|Z_j − Z_{j−1}|² / Σ|Z_j|²`.
fn gaussian_gradient_ratio<R: Rng + ?Sized>(n: usize, m: f64, z: &mut [Complex64], rng: &mut R) -> f64 {
    for c in z.iter_mut() {
        *c = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..n {
        num += (z[j] - z[(j + n - 1) % n]).norm_sqr();
        den += z[j].norm_sqr();
    }
    (n * n) as f64 * m * num / den
}

/// Estimate `μ_m^n(G_n ≤ g)` by the Gaussian-ratio representation and
/// evaluate the Chernoff-type and product upper bounds.
pub fn ld_prob_grad(n: usize, m: f64, g: f64, n_samples: u64, seed: u64) -> Result<LdReport> {
    if n < 2 {
        return Err(Error::param("n", format!("must be >= 2, got {n}")));
    }
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::param("m", format!("must be positive, got {m}")));
    }
    if !(g > 0.0 && g.is_finite()) {
        return Err(Error::param("g", format!("must be positive, got {g}")));
    }
    const CHUNK: u64 = 1 << 16;
    let chunks = n_samples.div_ceil(CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng::stream(seed, rng::stream_id("ld-grad", c));
            let mut z = vec![Complex64::new(0.0, 0.0); n];
            let count = CHUNK.min(n_samples - c * CHUNK);
            (0..count)
                .filter(|_| gaussian_gradient_ratio(n, m, &mut z, &mut r) <= 2.0 * g)
                .count() as u64
        })
        .sum();
    let (ci_low, ci_high) = wilson_interval(hits, n_samples, Z99);
    let mc_estimate = (hits > 0).then(|| hits as f64 / n_samples as f64);

    let chernoff_half = chernoff_log_bound(n, m, g, 0.5).exp();
    let (delta_opt, log_opt) = golden_min(|d| chernoff_log_bound(n, m, g, d), 1e-12, 1.0 - 1e-12, 1e-12);

    let g_o = 2.0 * g / ((n * n) as f64 * m);
    let (lambda_opt, log_prod) = golden_min(|l| product_log_bound(n, g_o, l), 0.0, 1.0 / g_o, 1e-13);
    Ok(LdReport {
        n,
        m,
        g,
        g_o,
        samples: n_samples,
        hits,
        mc_estimate,
        ci_low,
        ci_high,
        chernoff_half,
        chernoff_opt: log_opt.exp(),
        delta_opt,
        product_upper: log_prod.exp().min(1.0),
        lambda_opt,
    })
}

/// `∏_{k=1}^{n−1} sin(πk/n)` evaluated in log space.
pub fn sine_product(n: usize) -> f64 {
    ksum((1..n).map(|k| (PI * k as f64 / n as f64).sin().ln())).exp()
}

// ---- box volume near the soliton ------------------------------------------

/// Monte Carlo estimate of a volume fraction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub fraction: f64,
    /// Binomial standard error.
    pub se: f64,
    pub samples: u64,
}

/// Moduli of the `2n` real components of `field`, sorted ascending, so that
/// the last entry dominates all others.
pub fn box_weights(field: &LatticeField) -> Vec<f64> {
    let mut q: Vec<f64> = field.components().into_iter().map(f64::abs).collect();
    q.sort_by(|a, b| a.partial_cmp(b).expect("finite components"));
    q
}

/// Fraction of the box `[−δ/2n, δ/2n]^{2n−1}` where
/// `|Σ_{j<2n} ξ_j q_j| ≤ q_{2n} δ / (2√n)`.
pub fn lower_bound_volume(n: usize, delta: f64, q: &[f64], n_samples: u64, seed: u64) -> Result<VolumeEstimate> {
    if q.len() != 2 * n {
        return Err(Error::DimensionMismatch {
            expected: 2 * n,
            got: q.len(),
        });
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::param("delta", format!("must be positive, got {delta}")));
    }
    let top = q[2 * n - 1];
    if let Some(j) = q.iter().position(|&x| !(x >= 0.0 && x <= top)) {
        return Err(Error::param(
            "q",
            format!(
                "need q_2n >= q_j >= 0 for all j; component {} = {} violates it",
                j + 1,
                q[j]
            ),
        ));
    }
    if n_samples == 0 {
        return Err(Error::param("n_samples", "must be >= 1"));
    }
    let half = delta / (2.0 * n as f64);
    let bound = top * delta / (2.0 * (n as f64).sqrt());
    const CHUNK: u64 = 1 << 14;
    let chunks = n_samples.div_ceil(CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng::stream(seed, rng::stream_id("box-volume", c));
            let count = CHUNK.min(n_samples - c * CHUNK);
            (0..count)
                .filter(|_| {
                    let s: f64 = q[..2 * n - 1].iter().map(|qj| r.random_range(-half..=half) * qj).sum();
                    s.abs() <= bound
                })
                .count() as u64
        })
        .sum();
    let p = hits as f64 / n_samples as f64;
    Ok(VolumeEstimate {
        fraction: p,
        se: (p * (1.0 - p) / n_samples as f64).sqrt(),
        samples: n_samples,
    })
}

// ---- concentration of the Gibbs measure ----------------------------------

/// Growth `ϑ(n)` of the inverse temperature, `β_n = β ϑ(n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "a")]
pub enum BetaScaling {
    /// `ϑ(n) = n^a`.
    Power(f64),
    /// `ϑ(n) = n (ln n)²`.
    NLogSquared,
}

impl BetaScaling {
    pub fn theta(&self, n: usize) -> f64 {
        let nf = n as f64;
        match *self {
            BetaScaling::Power(a) => nf.powf(a),
            BetaScaling::NLogSquared => nf * nf.ln().powi(2),
        }
    }
}

/// Settings of a concentration run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationConfig {
    pub m: f64,
    pub beta: f64,
    pub scaling: BetaScaling,
    pub n_list: Vec<usize>,
    pub eps: f64,
    pub chains: usize,
    pub mcmc: McmcConfig,
}

/// One row of the concentration table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRow {
    pub n: usize,
    pub beta_n: f64,
    pub e0n: f64,
    pub probability: f64,
    pub se: f64,
    pub ess: f64,
    pub mean_energy: f64,
    pub pair_acceptance: f64,
    pub phase_acceptance: f64,
    pub chain_seeds: Vec<u64>,
}

/// Empirical `μ^n_{β_n,m}(H_n ≤ E₀ⁿ + ε)` for each `n`, with chains started
/// at the discrete soliton.
pub fn concentration_experiment(cfg: &ConcentrationConfig) -> Result<Vec<ConcentrationRow>> {
    if !(cfg.eps > 0.0) {
        return Err(Error::param("eps", format!("must be positive, got {}", cfg.eps)));
    }
    if cfg.chains == 0 {
        return Err(Error::param("chains", "must be >= 1"));
    }
    let mut rows = Vec::with_capacity(cfg.n_list.len());
    for &n in &cfg.n_list {
        let beta_n = cfg.beta * cfg.scaling.theta(n);
        let spec = GibbsSpec::new(n, cfg.m, beta_n)?;
        let soliton = minimize_energy(n, cfg.m, &MinimizeOptions::default())?;
        let e0n = soliton.energy;
        let chain_ids: Vec<u64> = (0..cfg.chains as u64).map(|c| ((n as u64) << 32) | c).collect();
        let runs: Vec<McmcResult> = chain_ids
            .par_iter()
            .map(|&id| mcmc_chain(&spec, &cfg.mcmc, Some(soliton.field.clone()), id))
            .collect::<Result<_>>()?;
        let mut indicators = Vec::new();
        let mut ess = 0.0;
        let mut var_sum = 0.0;
        let mut pair = 0.0;
        let mut phase = 0.0;
        let mut energy_sum = 0.0;
        for r in &runs {
            let ind: Vec<f64> = r
                .energies
                .iter()
                .map(|&h| if h <= e0n + cfg.eps { 1.0 } else { 0.0 })
                .collect();
            let tau = integrated_autocorrelation_time(&ind).max(r.tau_int);
            let e = ind.len() as f64 / tau;
            let p = ksum(ind.iter().copied()) / ind.len().max(1) as f64;
            ess += e;
            var_sum += p * (1.0 - p) / e * (ind.len() as f64).powi(2);
            indicators.extend(ind);
            pair += r.pair_acceptance;
            phase += r.phase_acceptance;
            energy_sum += r.mean_energy;
        }
        let total = indicators.len() as f64;
        let p = ksum(indicators.iter().copied()) / total;
        let k = runs.len() as f64;
        rows.push(ConcentrationRow {
            n,
            beta_n,
            e0n,
            probability: p,
            se: var_sum.sqrt() / total,
            ess,
            mean_energy: energy_sum / k,
            pair_acceptance: pair / k,
            phase_acceptance: phase / k,
            chain_seeds: chain_ids,
        });
    }
    Ok(rows)
}
