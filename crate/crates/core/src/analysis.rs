//! Piecewise-linear interpolation of lattice fields, exact `L^p`/`H¹`
//! evaluation, the symmetry-reduced `H̃¹` distance, and the discrete
//! Gagliardo–Nirenberg machinery.
//!
//! The interpolant of a field on `T_n` lives on the unit torus with
//! `ψ̄(x/n) = ψ(x)`; on `[s/n, (s+1)/n)` it runs linearly from site `s` to
//! site `s + 1` (site 0 ≡ site n).

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::elliptic::SolitonParams;
use crate::error::{Error, Result};
use crate::lattice::{gradient_sum_squares, mass, LatticeField, Spectral};
use crate::quad::GaussLegendre;
use crate::rng;
use crate::sum::{ksum, KahanSum};

/// Piecewise-linear periodic interpolant `ψ̄_n` of a lattice field.
#[derive(Clone, Debug, PartialEq)]
pub struct InterpolatedField {
    knots: Vec<Complex64>,
}

/// Build `ψ̄_n` from `ψ_n`.
pub fn interpolate(field: &LatticeField) -> InterpolatedField {
    InterpolatedField {
        knots: field.values().to_vec(),
    }
}

/// How [`InterpolatedField::lp_norm`] integrates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpMode {
    /// Exact per-segment Gauss–Legendre; `p ∈ {2, 4}` only.
    Exact,
    /// 8-point Gauss–Legendre per segment; any `p ≥ 1`.
    Quadrature,
}

impl InterpolatedField {
    pub fn n(&self) -> usize {
        self.knots.len()
    }

    pub fn knots(&self) -> &[Complex64] {
        &self.knots
    }

    /// Endpoints `(ψ(s), ψ(s+1))` of segment `s ∈ 0..n`.
    #[inline]
    fn segment(&self, s: usize) -> (Complex64, Complex64) {
        let n = self.n();
        (self.knots[(s + n - 1) % n], self.knots[s % n])
    }

    #[inline]
    fn locate(&self, y: f64) -> (usize, f64) {
        let n = self.n();
        let t = y.rem_euclid(1.0) * n as f64;
        let s = (t.floor() as usize).min(n - 1);
        (s, t - s as f64)
    }

    /// `ψ̄(y)` for any real `y` (periodic).
    pub fn eval(&self, y: f64) -> Complex64 {
        let (s, frac) = self.locate(y);
        let (a, b) = self.segment(s);
        a + (b - a) * frac
    }

    /// Weak derivative, `n(ψ(s+1) − ψ(s))` on segment `s`.
    pub fn eval_derivative(&self, y: f64) -> Complex64 {
        let (s, _) = self.locate(y);
        let (a, b) = self.segment(s);
        (b - a) * self.n() as f64
    }

    /// `∫₀¹ |ψ̄|²`, exact.
    pub fn l2_norm_sqr(&self) -> f64 {
        let n = self.n();
        ksum((0..n).map(|s| {
            let (a, b) = self.segment(s);
            (a.norm_sqr() + b.norm_sqr() + (a * b.conj()).re) / 3.0
        })) / n as f64
    }

    /// `∫₀¹ |ψ̄|⁴`, exact (3-point Gauss–Legendre on a quartic).
    pub fn l4_norm_pow4(&self) -> f64 {
        self.segment_integral(&GaussLegendre::new(3), |z| z.norm_sqr().powi(2))
    }

    fn segment_integral<F: Fn(Complex64) -> f64>(&self, gl: &GaussLegendre, f: F) -> f64 {
        let n = self.n();
        let mut acc = KahanSum::new();
        for s in 0..n {
            let (a, b) = self.segment(s);
            acc.add(gl.integrate(0.0, 1.0, |t| f(a + (b - a) * t)));
        }
        acc.value() / n as f64
    }

    /// `‖ψ̄‖_{L^p} = (∫₀¹ |ψ̄|^p)^{1/p}`.
    pub fn lp_norm(&self, p: f64, mode: LpMode) -> Result<f64> {
        Ok(self.lp_norm_pow(p, mode)?.powf(1.0 / p))
    }

    /// `∫₀¹ |ψ̄|^p`.
    pub fn lp_norm_pow(&self, p: f64, mode: LpMode) -> Result<f64> {
        match mode {
            LpMode::Exact if p == 2.0 => Ok(self.l2_norm_sqr()),
            LpMode::Exact if p == 4.0 => Ok(self.l4_norm_pow4()),
            LpMode::Exact => Err(Error::param("p", format!("exact mode supports p ∈ {{2, 4}}, got {p}"))),
            LpMode::Quadrature => {
                if !(p >= 1.0 && p.is_finite()) {
                    return Err(Error::param("p", format!("must be >= 1, got {p}")));
                }
                Ok(self.segment_integral(&GaussLegendre::new(8), |z| z.norm().powf(p)))
            }
        }
    }

    /// `½∫₀¹ |∂ψ̄|²`, evaluated segment by segment.
    pub fn kinetic(&self) -> f64 {
        let n = self.n() as f64;
        // each segment has length 1/n and slope n(b − a)
        0.5 * ksum((0..self.n()).map(|s| {
            let (a, b) = self.segment(s);
            ((b - a) * n).norm_sqr() / n
        }))
    }

    /// `‖ψ̄‖²_{H¹} = ∫|ψ̄|² + ∫|∂ψ̄|²`.
    pub fn h1_norm_sqr(&self) -> f64 {
        self.l2_norm_sqr() + 2.0 * self.kinetic()
    }
}

/// Discrete `ℓ^p` quantity `(1/n) Σ |ψ(x)|^p`.
pub fn lattice_lp_pow(field: &LatticeField, p: f64) -> f64 {
    ksum(field.values().iter().map(|z| z.norm().powf(p))) / field.n() as f64
}

/// `H(ψ̄) = ½∫|∂ψ̄|² − ¼∫|ψ̄|⁴` with both integrals exact.
pub fn continuous_energy(interp: &InterpolatedField) -> f64 {
    interp.kinetic() - 0.25 * interp.l4_norm_pow4()
}

/// Right-hand side of the interpolation bound
/// `|‖ψ̄‖^p_{L^p} − ‖ψ‖^p_{ℓ^p}| ≤ p (2G)^{1/2} (m^{1/2} + G^{1/2})^{p−1} / n`.
pub fn interpolation_lp_bound(field: &LatticeField, p: f64) -> f64 {
    let n = field.n() as f64;
    let g = 0.5 * n * gradient_sum_squares(field);
    let m = mass(field);
    p * (2.0 * g).sqrt() * (m.sqrt() + g.sqrt()).powf(p - 1.0) / n
}

// ---- profiles and the H̃¹ distance ---------------------------------------

/// A complex function on the unit torus with a weak derivative.
pub trait Profile: Sync {
    fn value(&self, y: f64) -> Complex64;
    fn derivative(&self, y: f64) -> Complex64;
    fn value_and_derivative(&self, y: f64) -> (Complex64, Complex64) {
        (self.value(y), self.derivative(y))
    }
    /// Sorted points of `[0, 1)` between which the profile is smooth, at a
    /// spacing fine enough for 8-point quadrature.
    fn breakpoints(&self) -> Vec<f64>;
    /// `Some(n)` for piecewise-linear profiles with `n` knots.
    fn knot_count(&self) -> Option<usize>;
}

impl Profile for InterpolatedField {
    fn value(&self, y: f64) -> Complex64 {
        self.eval(y)
    }

    fn derivative(&self, y: f64) -> Complex64 {
        self.eval_derivative(y)
    }

    fn breakpoints(&self) -> Vec<f64> {
        let n = self.n();
        (0..n).map(|s| s as f64 / n as f64).collect()
    }

    fn knot_count(&self) -> Option<usize> {
        Some(self.n())
    }
}

/// The continuous soliton as a profile on the unit torus.
#[derive(Clone, Copy, Debug)]
pub struct SolitonProfile {
    params: SolitonParams,
    panels: usize,
}

impl SolitonProfile {
    pub fn new(params: SolitonParams) -> Result<Self> {
        if (params.length - 1.0).abs() > 1e-15 {
            return Err(Error::param(
                "L",
                format!("H̃¹ distances are taken on the unit torus, got L = {}", params.length),
            ));
        }
        Ok(Self { params, panels: 128 })
    }

    pub fn params(&self) -> &SolitonParams {
        &self.params
    }
}

impl Profile for SolitonProfile {
    fn value(&self, y: f64) -> Complex64 {
        Complex64::new(self.params.value(y), 0.0)
    }

    fn derivative(&self, y: f64) -> Complex64 {
        Complex64::new(self.params.derivative(y), 0.0)
    }

    fn value_and_derivative(&self, y: f64) -> (Complex64, Complex64) {
        let (v, d) = self.params.value_and_derivative(y);
        (Complex64::new(v, 0.0), Complex64::new(d, 0.0))
    }

    fn breakpoints(&self) -> Vec<f64> {
        (0..self.panels).map(|i| i as f64 / self.panels as f64).collect()
    }

    fn knot_count(&self) -> Option<usize> {
        None
    }
}

/// Merged partition of `[0, 1]` for `τ_x f` against `g`.
fn merged_partition(fb: &[f64], gb: &[f64], x: f64) -> Vec<f64> {
    let mut pts: Vec<f64> = Vec::with_capacity(fb.len() + gb.len() + 2);
    pts.push(0.0);
    pts.extend(fb.iter().map(|b| (b + x).rem_euclid(1.0)));
    pts.extend_from_slice(gb);
    pts.push(1.0);
    pts.retain(|p| (0.0..=1.0).contains(p));
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    pts
}

struct Pairing<'a, F: Profile + ?Sized, G: Profile + ?Sized> {
    f: &'a F,
    g: &'a G,
    fb: Vec<f64>,
    gb: Vec<f64>,
    gl: GaussLegendre,
}

impl<'a, F: Profile + ?Sized, G: Profile + ?Sized> Pairing<'a, F, G> {
    fn new(f: &'a F, g: &'a G) -> Self {
        let both_linear = f.knot_count().is_some() && g.knot_count().is_some();
        Self {
            f,
            g,
            fb: f.breakpoints(),
            gb: g.breakpoints(),
            // products of two linear pieces are quadratic
            gl: GaussLegendre::new(if both_linear { 2 } else { 8 }),
        }
    }

    /// `⟨τ_x f, g⟩_{H¹}` with `τ_x f(y) = f(y − x)`.
    fn inner(&self, x: f64) -> Complex64 {
        let pts = merged_partition(&self.fb, &self.gb, x);
        let (mut re, mut im) = (KahanSum::new(), KahanSum::new());
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (t, wt) in self.gl.nodes.iter().zip(&self.gl.weights) {
                let y = mid + half * t;
                let (fv, fd) = self.f.value_and_derivative(y - x);
                let (gv, gd) = self.g.value_and_derivative(y);
                let v = fv * gv.conj() + fd * gd.conj();
                re.add(wt * half * v.re);
                im.add(wt * half * v.im);
            }
        }
        Complex64::new(re.value(), im.value())
    }

    /// `‖e^{iγ} τ_x f − g‖²_{H¹}` integrated directly, free of cancellation.
    fn direct_sqr(&self, x: f64, gamma: f64) -> f64 {
        let rot = Complex64::from_polar(1.0, gamma);
        let pts = merged_partition(&self.fb, &self.gb, x);
        let mut acc = KahanSum::new();
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (t, wt) in self.gl.nodes.iter().zip(&self.gl.weights) {
                let y = mid + half * t;
                let (fv, fd) = self.f.value_and_derivative(y - x);
                let (gv, gd) = self.g.value_and_derivative(y);
                let dv = rot * fv - gv;
                let dd = rot * fd - gd;
                acc.add(wt * half * (dv.norm_sqr() + dd.norm_sqr()));
            }
        }
        acc.value()
    }

    /// Optimal phase and squared distance at a fixed shift.
    fn at_shift(&self, x: f64) -> (f64, f64) {
        let c = self.inner(x);
        let gamma = -c.arg();
        (self.direct_sqr(x, gamma), gamma)
    }
}

/// `‖f‖²_{H¹}` of any profile.
pub fn h1_norm_sqr<F: Profile + ?Sized>(f: &F) -> f64 {
    Pairing::new(f, f).inner(0.0).re
}

/// Result of a symmetry-reduced distance computation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeminormDistance {
    pub distance: f64,
    /// Optimal global phase `γ*`.
    pub phase: f64,
    /// Optimal shift `x*` applied to `f`: `e^{iγ*} f(· − x*) ≈ g`.
    pub shift: f64,
}

const SHIFT_TOL: f64 = 1e-10;
const POLISH_WIDTH: f64 = 1e-5;
const INV_PHI: f64 = 0.618_033_988_749_894_8;

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
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

/// `inf_{γ, x} ‖e^{iγ} τ_x f − g‖_{H¹}` on the unit torus.
///
/// The phase is optimal in closed form for each shift; the shift is located
/// on a grid of spacing `1/(4 max n)`, extended by all relative knot offsets
/// when both profiles are piecewise linear, then refined by golden-section
/// search on each side of the best candidates.
pub fn seminorm_distance<F: Profile + ?Sized, G: Profile + ?Sized>(f: &F, g: &G) -> SeminormDistance {
    let pair = Pairing::new(f, g);
    let nmax = f.knot_count().unwrap_or(0).max(g.knot_count().unwrap_or(0)).max(64);
    let h = 1.0 / (4 * nmax) as f64;
    let mut candidates: Vec<f64> = (0..4 * nmax).map(|i| i as f64 * h).collect();
    if let (Some(nf), Some(ng)) = (f.knot_count(), g.knot_count()) {
        if nf != ng && nf * ng <= 1 << 16 {
            for i in 0..nf {
                for j in 0..ng {
                    candidates.push((j as f64 / ng as f64 - i as f64 / nf as f64).rem_euclid(1.0));
                }
            }
        }
    }
    let scored: Vec<(f64, f64)> = candidates.par_iter().map(|&x| (x, pair.inner(x).norm())).collect();
    let mut order: Vec<usize> = (0..scored.len()).collect();
    order.sort_by(|&i, &j| scored[j].1.partial_cmp(&scored[i].1).expect("finite correlation"));

    let mut best = (f64::INFINITY, 0.0, 0.0);
    for &i in order.iter().take(3) {
        let x0 = scored[i].0;
        let (d0, g0) = pair.at_shift(x0);
        if d0 < best.0 {
            best = (d0, g0, x0);
        }
        for (a, b) in [(x0 - h, x0), (x0, x0 + h)] {
            // maximizing |⟨τ_x f, g⟩| minimizes the distance but is flat to
            // roundoff near the top; the last stage below fixes that
            let (x, _) = golden_min(|x| -pair.inner(x).norm(), a, b, SHIFT_TOL);
            let (d, g) = pair.at_shift(x);
            if d < best.0 {
                best = (d, g, x);
            }
        }
    }
    let x1 = best.2;
    let (x, d) = golden_min(|x| pair.at_shift(x).0, x1 - POLISH_WIDTH, x1 + POLISH_WIDTH, SHIFT_TOL);
    if d < best.0 {
        best = (d, pair.at_shift(x).1, x);
    }
    SeminormDistance {
        distance: best.0.max(0.0).sqrt(),
        phase: best.1,
        shift: best.2.rem_euclid(1.0),
    }
}

// ---- discrete Gagliardo–Nirenberg ----------------------------------------

/// `((1/n) Σ|f|⁴) / (m^{3/2} G_n^{1/2} + m²)` with `m` the mass of `f`.
pub fn gn_ratio(field: &LatticeField) -> Result<f64> {
    let m = mass(field);
    if m == 0.0 {
        return Err(Error::Domain("GN ratio of the zero field is undefined".into()));
    }
    let n = field.n() as f64;
    let g = 0.5 * n * gradient_sum_squares(field);
    let quartic = ksum(field.values().iter().map(|z| z.norm_sqr().powi(2))) / n;
    Ok(quartic / (m.powf(1.5) * g.sqrt() + m * m))
}

/// Settings of the empirical GN-constant scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GnScanConfig {
    pub samples: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub seed: u64,
}

impl Default for GnScanConfig {
    fn default() -> Self {
        Self {
            samples: 100_000,
            n_min: 4,
            n_max: 256,
            seed: 0x6E5C_A11E,
        }
    }
}

/// Which generator produced a scan sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GnSampleKind {
    Uniform,
    Smooth,
    ConstantProbe,
}

/// Outcome of a GN scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GnScanReport {
    pub config: GnScanConfig,
    pub supremum: f64,
    /// `supremum × (1 + 1e−9)`.
    pub c_hat: f64,
    pub argmax_n: usize,
    pub argmax_kind: GnSampleKind,
    pub random_samples: usize,
    pub constant_probes: usize,
}

/// Random field whose Fourier modes are confined to `|k| ≤ K`, with a
/// randomly weighted mean mode; normalized to mass `m`.
pub fn smooth_sphere_sample<R: Rng + ?Sized>(n: usize, m: f64, rng: &mut R) -> LatticeField {
    let kmax = rng.random_range(1..=(n / 2).clamp(1, 6));
    let mut modes = vec![Complex64::new(0.0, 0.0); n];
    let z = |rng: &mut R| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    let w0 = rng.random_range(0.0..4.0) * ((2 * kmax + 1) as f64).sqrt();
    modes[0] = z(rng) * w0;
    for k in 1..=kmax {
        let damp = (-((k * k) as f64) / (kmax * kmax) as f64).exp();
        modes[k] += z(rng) * damp;
        modes[n - k] += z(rng) * damp;
    }
    Spectral::new(n).inverse(&mut modes);
    let field = LatticeField::from_vec_unchecked(modes);
    match field.with_mass(m) {
        Ok(f) => f,
        Err(_) => LatticeField::from_vec_unchecked(vec![Complex64::new(m.sqrt(), 0.0); n]),
    }
}

fn scan_sample(cfg: &GnScanConfig, i: usize) -> (f64, usize, GnSampleKind) {
    let mut r = rng::stream(cfg.seed, rng::stream_id("gn-scan", i as u64));
    let n = r.random_range(cfg.n_min..=cfg.n_max);
    let (field, kind) = if i.is_multiple_of(2) {
        (
            crate::sampling::uniform_sphere_sample(n, 1.0, &mut r),
            GnSampleKind::Uniform,
        )
    } else {
        (smooth_sphere_sample(n, 1.0, &mut r), GnSampleKind::Smooth)
    };
    (gn_ratio(&field).expect("nonzero sample"), n, kind)
}

/// Supremum of [`gn_ratio`] over random sphere samples (half uniform,
/// half smooth) plus the constant field at every `n`, whose ratio is 1.
pub fn gn_scan(cfg: &GnScanConfig) -> Result<GnScanReport> {
    if cfg.n_min < 2 || cfg.n_max < cfg.n_min {
        return Err(Error::param(
            "n_min",
            format!("need 2 <= n_min <= n_max, got {}..{}", cfg.n_min, cfg.n_max),
        ));
    }
    let mut best: (f64, usize, GnSampleKind) = (f64::NEG_INFINITY, 0, GnSampleKind::ConstantProbe);
    for n in cfg.n_min..=cfg.n_max {
        let c = LatticeField::constant(n, Complex64::new(1.0, 0.0))?;
        let r = gn_ratio(&c)?;
        if r > best.0 {
            best = (r, n, GnSampleKind::ConstantProbe);
        }
    }
    let results: Vec<(f64, usize, GnSampleKind)> =
        (0..cfg.samples).into_par_iter().map(|i| scan_sample(cfg, i)).collect();
    for r in results {
        if r.0 > best.0 {
            best = r;
        }
    }
    Ok(GnScanReport {
        config: *cfg,
        supremum: best.0,
        c_hat: best.0 * (1.0 + 1e-9),
        argmax_n: best.1,
        argmax_kind: best.2,
        random_samples: cfg.samples,
        constant_probes: cfg.n_max - cfg.n_min + 1,
    })
}

/// Number of scan samples whose ratio exceeds `c`.
pub fn gn_violations(cfg: &GnScanConfig, c: f64) -> usize {
    (0..cfg.samples)
        .into_par_iter()
        .filter(|&i| scan_sample(cfg, i).0 > c)
        .count()
}

/// The empirical GN constant shipped with the crate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GnConstant {
    pub version: u32,
    pub c_hat: f64,
    pub supremum: f64,
    pub scan: GnScanConfig,
    pub ensemble: String,
}

const GN_CONSTANT_JSON: &str = include_str!("../data/gn_constant.json");

impl GnConstant {
    pub fn persisted() -> Self {
        serde_json::from_str(GN_CONSTANT_JSON).expect("bundled GN constant file is valid")
    }

    pub fn from_report(report: &GnScanReport) -> Self {
        Self {
            version: 1,
            c_hat: report.c_hat,
            supremum: report.supremum,
            scan: report.config,
            ensemble: "uniform sphere (even indices) + smooth low-mode fields (odd indices) \
                       + constant field at every n"
                .into(),
        }
    }
}

/// `θ(m) = C²m³/64 + Cm²/4`, the lower-bound scale `E₀ⁿ(m) ≥ −θ(m)`.
pub fn theta(c: f64, m: f64) -> f64 {
    c * c * m.powi(3) / 64.0 + c * m * m / 4.0
}

/// `H_n ≥ G_n − (C/4)(m^{3/2} G_n^{1/2} + m²)`: returns the right side.
pub fn gn_energy_floor(c: f64, m: f64, kinetic: f64) -> f64 {
    kinetic - 0.25 * c * (m.powf(1.5) * kinetic.sqrt() + m * m)
}

// ---- padding to the whole line ------------------------------------------

/// Finite-support sequence on `ℤ` built from a torus field; support `[−n, 2n]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PaddedLineField {
    n: usize,
    /// Values at `x = −n, …, 2n`.
    values: Vec<Complex64>,
    /// Rotation applied so that `|f|` is minimal at site `n`.
    shift: usize,
}

/// Rotate `f` so `|f|` is minimal at site `n`, then extend by linear ramps:
/// `f̃ = f` on `1..n`, `f(n)(2 − x/n)` on `n+1..2n`, `f(n)(1 + x/n)` on
/// `−n..−1`, `f(n)` at 0, zero elsewhere.
pub fn pad_to_line(field: &LatticeField) -> PaddedLineField {
    let n = field.n();
    let v = field.values();
    let imin = (0..n)
        .min_by(|&a, &b| v[a].norm_sqr().partial_cmp(&v[b].norm_sqr()).expect("finite"))
        .expect("n >= 2");
    // index n−1 holds site n
    let shift = (imin + 1) % n;
    let rotated = field.shift(shift as isize);
    let f = rotated.values();
    let fn_ = f[n - 1];
    let nf = n as f64;
    let mut values = Vec::with_capacity(3 * n + 1);
    for x in -(n as isize)..=(2 * n as isize) {
        let val = match x {
            0 => fn_,
            x if x < 0 => fn_ * (1.0 + x as f64 / nf),
            x if x as usize <= n => f[x as usize - 1],
            x => fn_ * (2.0 - x as f64 / nf),
        };
        values.push(val);
    }
    PaddedLineField { n, values, shift }
}

impl PaddedLineField {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `f̃(x)` for any integer `x`.
    pub fn at(&self, x: isize) -> Complex64 {
        let n = self.n as isize;
        if x < -n || x > 2 * n {
            Complex64::new(0.0, 0.0)
        } else {
            self.values[(x + n) as usize]
        }
    }

    /// The value `f(n)` of the rotated field (its minimal modulus).
    pub fn anchor(&self) -> Complex64 {
        self.at(0)
    }

    pub fn rotation(&self) -> usize {
        self.shift
    }

    /// `G(f̃) = ½ Σ_{x∈ℤ} |f̃(x) − f̃(x−1)|²`.
    pub fn gradient(&self) -> f64 {
        let n = self.n as isize;
        0.5 * ksum((-n..=2 * n + 1).map(|x| (self.at(x) - self.at(x - 1)).norm_sqr()))
    }

    /// `‖f̃‖^p_{ℓ^p(ℤ)}`.
    pub fn lp_pow(&self, p: f64) -> f64 {
        ksum(self.values.iter().map(|z| z.norm().powf(p)))
    }

    /// `‖f̃‖⁴_{ℓ⁴} / (‖f̃‖³_{ℓ²} G(f̃)^{1/2})`, the whole-line GN ratio.
    pub fn line_gn_ratio(&self) -> f64 {
        let l2 = self.lp_pow(2.0).sqrt();
        self.lp_pow(4.0) / (l2.powi(3) * self.gradient().sqrt())
    }
}

/// Constants `(c₁, c₂) = (1/(p+1), 1 + 2/(p+1))` of the sandwich
/// `‖f‖^p + c₁|f(n)|^p ≤ (1/n)‖f̃‖^p ≤ ‖f‖^p + c₂|f(n)|^p`.
pub fn padding_constants(p: f64) -> (f64, f64) {
    (1.0 / (p + 1.0), 1.0 + 2.0 / (p + 1.0))
}
