//! Mass-conserving splitting integrator for the stochastically perturbed DNLS
//!
//! `dψ = i[Δψ − κ|ψ|^{p−1}ψ]dt − γψ(β⁻¹ + i∂_θH_n)dt − i√(2γ/β) ψ dw`.
//!
//! Every sub-flow is unitary or a per-site phase rotation:
//! * `A(τ)`: Fourier multiplier `e^{−i n²ω_k² τ}`;
//! * `N(τ)`: `ψ(x) e^{−iκ|ψ(x)|^{p−1}τ}`;
//! * `D(τ)`: `ψ(x) exp(−i[γ ∂_θ(x)H_n τ + √(2γτ/β) ξ_x])` with `∂_θH_n`
//!   frozen at the sub-step's input. The Itô correction of the phase noise
//!   reproduces the `−γβ⁻¹ψ dt` drift, so it is not added separately.
//!
//! The Strang step is `A(dt/2) N(dt/2) D(dt) N(dt/2) A(dt/2)`. Consecutive
//! linear half-steps are fused when several steps are taken at once.

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::analysis::{interpolate, seminorm_distance, SolitonProfile};
use crate::elliptic::soliton_params;
use crate::error::{Error, Result};
use crate::lattice::{mass, omega, phase_gradient_into, GibbsSpec, LatticeField, Nonlinearity, Spectral};
use crate::rng::StreamRng;
use crate::sum::ksum;

/// Composition of the sub-flows.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// `A(dt/2) N(dt/2) D(dt) N(dt/2) A(dt/2)`.
    #[default]
    Strang,
    /// `D(dt) N(dt) A(dt)`, first order.
    Lie,
    /// Strang with `∂_θH` taken at a half-step predictor of `D`.
    Midpoint,
}

/// Parameters of the stochastic integrator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SdeParams {
    pub n: usize,
    pub m: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    /// Inverse temperature; `inf` switches the noise off.
    #[serde(serialize_with = "ser_beta", deserialize_with = "de_beta")]
    pub beta: f64,
    /// Time step; `None` selects [`SdeParams::default_dt`].
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default)]
    pub scheme: Scheme,
    /// Observable cadence in steps.
    #[serde(default = "default_record_every")]
    pub record_every: u64,
}

fn default_gamma() -> f64 {
    1.0
}
fn default_p() -> f64 {
    3.0
}
fn default_kappa() -> f64 {
    -1.0
}
fn default_record_every() -> u64 {
    1000
}

fn ser_beta<S: Serializer>(b: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if b.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*b)
    }
}

fn de_beta<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }
    match Raw::deserialize(d)? {
        Raw::Num(x) => Ok(x),
        Raw::Text(t) => match t.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
            other => other
                .parse::<f64>()
                .map_err(|_| serde::de::Error::custom(format!("beta must be a number or \"inf\", got {t:?}"))),
        },
    }
}

impl SdeParams {
    pub fn new(n: usize, m: f64, gamma: f64, beta: f64) -> Self {
        Self {
            n,
            m,
            gamma,
            beta,
            dt: None,
            p: 3.0,
            kappa: -1.0,
            scheme: Scheme::Strang,
            record_every: 1000,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn nonlinearity(&self) -> Nonlinearity {
        Nonlinearity {
            p: self.p,
            kappa: self.kappa,
        }
    }

    pub fn gibbs_spec(&self) -> Result<GibbsSpec> {
        GibbsSpec::with_nonlinearity(self.n, self.m, self.beta, self.nonlinearity())
    }

    /// `min(1e−3 (32/n)², 1/(4γ n q²))`, where `q²` estimates the largest
    /// site intensity (the soliton crest for cubic focusing, else `m`). The
    /// second term keeps the explicit phase-drift step inside its stability
    /// region `γ dt ‖∂²_θH‖ < 2`, with `‖∂²_θH‖ ≤ 4n max|ψ|²`.
    pub fn default_dt(&self) -> f64 {
        let base = 1e-3 * (32.0 / self.n as f64).powi(2);
        if self.gamma == 0.0 {
            return base;
        }
        let mut peak2 = self.m;
        if self.p == 3.0 && self.kappa == -1.0 {
            if let Ok(q) = soliton_params(self.m, 1.0) {
                peak2 = peak2.max(q.alpha * q.alpha);
            }
        }
        base.min(1.0 / (4.0 * self.gamma * self.n as f64 * peak2))
    }

    pub fn time_step(&self) -> f64 {
        self.dt.unwrap_or_else(|| self.default_dt())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::param("n", format!("lattice size must be >= 2, got {}", self.n)));
        }
        if !(self.m > 0.0 && self.m.is_finite()) {
            return Err(Error::param("m", format!("mass must be positive, got {}", self.m)));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::param("gamma", format!("must be >= 0, got {}", self.gamma)));
        }
        if !(self.beta > 0.0) {
            return Err(Error::param(
                "beta",
                format!("must be positive or inf, got {}", self.beta),
            ));
        }
        let dt = self.time_step();
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::param("dt", format!("must be positive, got {dt}")));
        }
        if self.record_every == 0 {
            return Err(Error::param("record_every", "must be >= 1"));
        }
        self.nonlinearity().validate()
    }

    /// Noise amplitude `√(2γ dt/β)` of one `D(dt)` sub-step.
    pub fn noise_scale(&self) -> f64 {
        if self.beta.is_infinite() {
            0.0
        } else {
            (2.0 * self.gamma * self.time_step() / self.beta).sqrt()
        }
    }
}

/// Stateful integrator: plans, multipliers and the noise stream.
pub struct Integrator {
    params: SdeParams,
    nl: Nonlinearity,
    dt: f64,
    sigma: f64,
    spectral: Spectral,
    /// Fourier multipliers with the `1/n` of the unnormalized transform pair
    /// folded in, so each linear sub-step rounds its scale only once.
    half: Vec<Complex64>,
    full: Vec<Complex64>,
    dth: Vec<f64>,
    work: Vec<Complex64>,
    rng: StreamRng,
    steps: u64,
}

impl std::fmt::Debug for Integrator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Integrator")
            .field("params", &self.params)
            .field("steps", &self.steps)
            .finish()
    }
}

/// Steps between exact renormalizations of the mass. Transform roundoff
/// biases the norm by about 1e−16 per step.
pub const REPROJECT_EVERY: u64 = 1_000;

impl Integrator {
    pub fn new(params: SdeParams, rng: StreamRng) -> Result<Self> {
        params.validate()?;
        Ok(Self::build(params, params.time_step(), rng))
    }

    fn build(params: SdeParams, dt: f64, rng: StreamRng) -> Self {
        let n = params.n;
        let nf = n as f64;
        let mult = |tau: f64| -> Vec<Complex64> {
            (0..n)
                .map(|k| Complex64::cis(-nf * nf * omega(k, n).powi(2) * tau) / nf)
                .collect()
        };
        let sigma = if params.beta.is_infinite() {
            0.0
        } else {
            (2.0 * params.gamma * dt.abs() / params.beta).sqrt()
        };
        Self {
            params,
            nl: params.nonlinearity(),
            dt,
            sigma,
            spectral: Spectral::new(n),
            half: mult(0.5 * dt),
            full: mult(dt),
            dth: vec![0.0; n],
            work: vec![Complex64::new(0.0, 0.0); n],
            rng,
            steps: 0,
        }
    }

    pub fn params(&self) -> &SdeParams {
        &self.params
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps_taken(&self) -> u64 {
        self.steps
    }

    fn linear(&mut self, psi: &mut [Complex64], mult: Multiplier) {
        self.spectral.forward_raw(psi);
        let m = match mult {
            Multiplier::Half => &self.half,
            Multiplier::Full => &self.full,
        };
        for (z, a) in psi.iter_mut().zip(m) {
            *z *= a;
        }
        self.spectral.inverse_raw(psi);
    }

    /// Nonlinear phases of `N(τ)`: `e^{−iκ|ψ|^{p−1}τ}` per site.
    fn nonlinear_factor(&self, z: Complex64, tau: f64) -> Complex64 {
        Complex64::cis(-self.nl.kappa * self.nl.site_rate(z.norm_sqr()) * tau)
    }

    /// `D(τ)` in place, with the phase gradient taken at `psi`.
    fn dissipate(&mut self, psi: &mut [Complex64], tau: f64, sigma: f64) {
        let gamma = self.params.gamma;
        if gamma == 0.0 {
            return;
        }
        phase_gradient_into(psi, &mut self.dth);
        for (z, g) in psi.iter_mut().zip(&self.dth) {
            let mut phase = gamma * g * tau;
            if sigma > 0.0 {
                let xi: f64 = StandardNormal.sample(&mut self.rng);
                phase += sigma * xi;
            }
            *z *= Complex64::cis(-phase);
        }
    }

    /// `N(dt/2) D(dt) N(dt/2)` fused into one rotation per site.
    fn middle(&mut self, psi: &mut [Complex64]) {
        let dt = self.dt;
        let gamma = self.params.gamma;
        if gamma == 0.0 {
            for z in psi.iter_mut() {
                *z *= self.nonlinear_factor(*z, dt);
            }
            return;
        }
        let n = psi.len();
        let mut h = std::mem::take(&mut self.work);
        for i in 0..n {
            h[i] = self.nonlinear_factor(psi[i], 0.5 * dt);
            psi[i] *= h[i];
        }
        match self.params.scheme {
            Scheme::Midpoint => {
                phase_gradient_into(psi, &mut self.dth);
                let mut pred = psi.to_vec();
                for (z, g) in pred.iter_mut().zip(&self.dth) {
                    *z *= Complex64::cis(-0.5 * gamma * g * dt);
                }
                phase_gradient_into(&pred, &mut self.dth);
            }
            _ => phase_gradient_into(psi, &mut self.dth),
        }
        for i in 0..n {
            let mut phase = gamma * self.dth[i] * dt;
            if self.sigma > 0.0 {
                let xi: f64 = StandardNormal.sample(&mut self.rng);
                phase += self.sigma * xi;
            }
            psi[i] *= h[i] * Complex64::cis(-phase);
        }
        self.work = h;
    }

    fn lie_step(&mut self, psi: &mut [Complex64]) {
        let (dt, sigma) = (self.dt, self.sigma);
        self.dissipate(psi, dt, sigma);
        for z in psi.iter_mut() {
            *z *= self.nonlinear_factor(*z, dt);
        }
        self.linear(psi, Multiplier::Full);
    }

    fn after_step(&mut self, psi: &mut [Complex64]) {
        self.steps += 1;
        if self.steps.is_multiple_of(REPROJECT_EVERY) {
            reproject(psi, self.params.m);
        }
    }

    /// Advance `psi` by `steps` steps of the configured scheme.
    ///
    /// When `energies` is given, `H_n` after every step is pushed to it.
    pub fn advance(&mut self, psi: &mut [Complex64], steps: u64, mut energies: Option<&mut Vec<f64>>) {
        assert_eq!(psi.len(), self.params.n, "field size must match the integrator");
        if steps == 0 {
            return;
        }
        if self.params.scheme == Scheme::Lie {
            for _ in 0..steps {
                self.lie_step(psi);
                self.after_step(psi);
                if let Some(e) = energies.as_deref_mut() {
                    e.push(self.nl.energy(&LatticeField::from_vec_unchecked(psi.to_vec())).total);
                }
            }
            return;
        }
        // A(dt/2) [M A(dt)]^{steps−1} M A(dt/2), with M = N(dt/2) D(dt) N(dt/2)
        self.linear(psi, Multiplier::Half);
        for s in 0..steps {
            self.middle(psi);
            self.spectral.forward_raw(psi);
            if let Some(e) = energies.as_deref_mut() {
                let mut state: Vec<Complex64> = psi.iter().zip(&self.half).map(|(z, a)| z * a).collect();
                self.spectral.inverse_raw(&mut state);
                e.push(self.nl.energy(&LatticeField::from_vec_unchecked(state)).total);
            }
            let last = s + 1 == steps;
            let mult = if last { &self.half } else { &self.full };
            for (z, a) in psi.iter_mut().zip(mult) {
                *z *= a;
            }
            self.spectral.inverse_raw(psi);
            self.steps += 1;
            if self.steps.is_multiple_of(REPROJECT_EVERY) {
                reproject(psi, self.params.m);
            }
        }
    }

    /// One step on a field.
    pub fn step(&mut self, state: &LatticeField) -> LatticeField {
        let mut v = state.values().to_vec();
        self.advance(&mut v, 1, None);
        LatticeField::from_vec_unchecked(v)
    }
}

#[derive(Clone, Copy)]
enum Multiplier {
    Half,
    Full,
}

fn reproject(psi: &mut [Complex64], m: f64) {
    let cur = ksum(psi.iter().map(|z| z.norm_sqr())) / psi.len() as f64;
    let s = (m / cur).sqrt();
    for z in psi.iter_mut() {
        *z *= s;
    }
}

/// One step of the configured scheme from `state`.
pub fn step(state: &LatticeField, params: &SdeParams, rng: StreamRng) -> Result<(LatticeField, StreamRng)> {
    if state.n() != params.n {
        return Err(Error::DimensionMismatch {
            expected: params.n,
            got: state.n(),
        });
    }
    let mut it = Integrator::new(*params, rng)?;
    let next = it.step(state);
    Ok((next, it.rng))
}

/// Which optional observables to record.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observables {
    /// `H̃¹` distance of the interpolant to `Q_m` (needs cubic focusing).
    pub distance: bool,
    /// Track `H_n` after every step and report the largest increase.
    pub monotonicity: bool,
}

/// One recorded sample of a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub step: u64,
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub kinetic: f64,
    pub potential: f64,
    /// `(Σ_x (∂_θ(x)H_n)²)^{1/2}`.
    pub phase_grad_norm: f64,
    pub distance: Option<f64>,
}

/// Output of [`integrate`].
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub records: Vec<Record>,
    pub final_state: LatticeField,
    pub steps: u64,
    pub dt: f64,
    /// Largest `|mass − m|/m` seen at any record.
    pub max_mass_error: f64,
    /// Largest one-step increase of `H_n` (only with `monotonicity`).
    pub max_energy_increase: Option<f64>,
}

fn observe(field: &LatticeField, nl: &Nonlinearity, step: u64, t: f64, profile: Option<&SolitonProfile>) -> Record {
    let e = nl.energy(field);
    let mut dth = vec![0.0; field.n()];
    phase_gradient_into(field.values(), &mut dth);
    Record {
        step,
        t,
        mass: mass(field),
        energy: e.total,
        kinetic: e.kinetic,
        potential: e.potential,
        phase_grad_norm: ksum(dth.iter().map(|g| g * g)).sqrt(),
        distance: profile.map(|q| seminorm_distance(&interpolate(field), q).distance),
    }
}

/// Integrate from `psi0` up to time `t_final`, recording observables every
/// `record_every` steps (and at the end).
pub fn integrate(
    psi0: &LatticeField,
    params: &SdeParams,
    t_final: f64,
    observables: Observables,
    rng: StreamRng,
) -> Result<Trajectory> {
    params.validate()?;
    if psi0.n() != params.n {
        return Err(Error::DimensionMismatch {
            expected: params.n,
            got: psi0.n(),
        });
    }
    let m0 = mass(psi0);
    if (m0 - params.m).abs() > 1e-9 * params.m {
        return Err(Error::param(
            "psi0",
            format!("initial mass {m0} differs from m = {}", params.m),
        ));
    }
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::param(
            "t_final",
            format!("must be finite and >= 0, got {t_final}"),
        ));
    }
    let nl = params.nonlinearity();
    let profile = if observables.distance {
        if !nl.is_cubic() || nl.kappa != -1.0 {
            return Err(Error::param(
                "observables",
                "distance to Q_m needs the cubic focusing case",
            ));
        }
        Some(SolitonProfile::new(soliton_params(params.m, 1.0)?)?)
    } else {
        None
    };
    let mut it = Integrator::new(*params, rng)?;
    let dt = it.dt();
    let total = (t_final / dt).round() as u64;
    let mut psi = psi0.values().to_vec();
    let mut records = vec![observe(psi0, &nl, 0, 0.0, profile.as_ref())];
    let mut energies = observables
        .monotonicity
        .then(|| Vec::with_capacity(params.record_every.min(total) as usize));
    let mut last_energy = records[0].energy;
    let mut max_increase = f64::NEG_INFINITY;
    let mut done = 0;
    while done < total {
        let chunk = params.record_every.min(total - done);
        if let Some(e) = energies.as_mut() {
            e.clear();
        }
        it.advance(&mut psi, chunk, energies.as_mut());
        if let Some(e) = energies.as_ref() {
            for &h in e {
                max_increase = max_increase.max(h - last_energy);
                last_energy = h;
            }
        }
        done += chunk;
        let f = LatticeField::from_vec_unchecked(psi.clone());
        records.push(observe(&f, &nl, done, done as f64 * dt, profile.as_ref()));
    }
    let max_mass_error = records
        .iter()
        .map(|r| (r.mass - params.m).abs() / params.m)
        .fold(0.0, f64::max);
    Ok(Trajectory {
        records,
        final_state: LatticeField::from_vec_unchecked(psi),
        steps: total,
        dt,
        max_mass_error,
        max_energy_increase: observables.monotonicity.then_some(max_increase.max(0.0)),
    })
}

/// Scale of the second time derivative of `H_n` along the flow from
/// `field`: `‖∂²H_n‖ · |ψ̇|²`, with the Hessian bounded by
/// `4n + p|κ| max|ψ|^{p−1}/n` and `ψ̇` the Hamiltonian velocity.
pub fn energy_curvature_scale(field: &LatticeField, nl: &Nonlinearity) -> f64 {
    let n = field.n() as f64;
    let peak = field.max_modulus();
    let hess = 4.0 * n + nl.p * nl.kappa.abs() * nl.site_rate(peak * peak) / n;
    let lap = crate::lattice::laplacian_values(field.values());
    let vel2 = ksum(
        field
            .values()
            .iter()
            .zip(&lap)
            .map(|(z, l)| (l - z * (nl.kappa * nl.site_rate(z.norm_sqr()))).norm_sqr()),
    );
    hess * vel2
}
