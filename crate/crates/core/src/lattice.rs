//! Fields on the discrete one-dimensional torus `T_n = {1, …, n}` with mesh
//! `1/n`, together with the mass, the Hamiltonian
//!
//! ```text
//! H_n(ψ) = (1/n) Σ (n²/2)|ψ(x) − ψ(x−1)|²  +  κ/((p+1) n) Σ |ψ(x)|^{p+1}
//!        =        G_n(ψ)                  +  κ · V_n(ψ)
//! ```
//!
//! and the discrete Laplacian `Δψ(x) = n²(ψ(x+1) − 2ψ(x) + ψ(x−1))`.
//!
//! Storage: index `i` holds site `i + 1`; site `n` (≡ site 0) is index `n − 1`.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::{ksum, KahanSum};

/// Nonlinearity `κ/(p+1) |ψ|^{p+1}` of the Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Nonlinearity {
    /// Exponent `p > 1`.
    pub p: f64,
    /// Sign: −1 focusing, +1 defocusing.
    pub kappa: f64,
}

impl Default for Nonlinearity {
    fn default() -> Self {
        Self::CUBIC_FOCUSING
    }
}

impl Nonlinearity {
    pub const CUBIC_FOCUSING: Nonlinearity = Nonlinearity { p: 3.0, kappa: -1.0 };

    pub fn new(p: f64, kappa: f64) -> Result<Self> {
        let nl = Self { p, kappa };
        nl.validate()?;
        Ok(nl)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p.is_finite() && self.p > 1.0) {
            return Err(Error::param("p", format!("must be a finite real > 1, got {}", self.p)));
        }
        if self.kappa != -1.0 && self.kappa != 1.0 {
            return Err(Error::param("kappa", format!("must be -1 or +1, got {}", self.kappa)));
        }
        Ok(())
    }

    pub fn is_cubic(&self) -> bool {
        self.p == 3.0
    }

    /// `|z|^{p+1}` evaluated from `|z|²`.
    #[inline]
    pub fn site_power(&self, norm_sqr: f64) -> f64 {
        if self.is_cubic() {
            norm_sqr * norm_sqr
        } else {
            norm_sqr.powf(0.5 * (self.p + 1.0))
        }
    }

    /// `|z|^{p−1}` evaluated from `|z|²`.
    #[inline]
    pub fn site_rate(&self, norm_sqr: f64) -> f64 {
        if self.is_cubic() {
            norm_sqr
        } else {
            norm_sqr.powf(0.5 * (self.p - 1.0))
        }
    }

    pub fn energy(&self, field: &LatticeField) -> EnergyBreakdown {
        let n = field.n() as f64;
        let kinetic = 0.5 * n * gradient_sum_squares(field);
        let potential = ksum(field.values().iter().map(|z| self.site_power(z.norm_sqr()))) / ((self.p + 1.0) * n);
        EnergyBreakdown {
            kinetic,
            potential,
            total: kinetic + self.kappa * potential,
        }
    }
}

/// Parameters `(n, m, β, p, κ)` of the canonical Gibbs measure
/// `dμ^n_{β,m} = Z⁻¹ e^{−β H_n} dμ^n_m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GibbsSpec {
    pub n: usize,
    pub m: f64,
    pub beta: f64,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
}

fn default_p() -> f64 {
    3.0
}

fn default_kappa() -> f64 {
    -1.0
}

impl GibbsSpec {
    pub fn new(n: usize, m: f64, beta: f64) -> Result<Self> {
        Self::with_nonlinearity(n, m, beta, Nonlinearity::default())
    }

    pub fn with_nonlinearity(n: usize, m: f64, beta: f64, nl: Nonlinearity) -> Result<Self> {
        let spec = Self {
            n,
            m,
            beta,
            p: nl.p,
            kappa: nl.kappa,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::param("n", format!("lattice size must be >= 2, got {}", self.n)));
        }
        if !(self.m.is_finite() && self.m > 0.0) {
            return Err(Error::param("m", format!("mass must be positive, got {}", self.m)));
        }
        if !(self.beta > 0.0) {
            return Err(Error::param("beta", format!("must be > 0, got {}", self.beta)));
        }
        self.nonlinearity().validate()
    }

    pub fn nonlinearity(&self) -> Nonlinearity {
        Nonlinearity {
            p: self.p,
            kappa: self.kappa,
        }
    }
}

/// `G_n`, `V_n` and `H_n = G_n + κ V_n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub kinetic: f64,
    pub potential: f64,
    pub total: f64,
}

/// A complex configuration on the discrete torus of size `n ≥ 2`.
#[derive(Clone, PartialEq)]
pub struct LatticeField {
    values: Vec<Complex64>,
}

impl fmt::Debug for LatticeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LatticeField")
            .field("n", &self.n())
            .field("values", &self.values)
            .finish()
    }
}

impl LatticeField {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::param(
                "n",
                format!("lattice size must be >= 2, got {}", values.len()),
            ));
        }
        if let Some(i) = values.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::param("values", format!("non-finite value at site {}", i + 1)));
        }
        Ok(Self { values })
    }

    /// Construct without validation; callers guarantee the invariants.
    pub(crate) fn from_vec_unchecked(values: Vec<Complex64>) -> Self {
        debug_assert!(values.len() >= 2);
        Self { values }
    }

    pub fn constant(n: usize, value: Complex64) -> Result<Self> {
        Self::new(vec![value; n])
    }

    /// Field with `ψ(site) = f(site)`, sites numbered `1..=n`.
    pub fn from_sites<F: FnMut(usize) -> Complex64>(n: usize, mut f: F) -> Result<Self> {
        Self::new((1..=n).map(&mut f).collect())
    }

    /// Build from interleaved `(re, im)` components in site order.
    pub fn from_components(components: &[f64]) -> Result<Self> {
        if !components.len().is_multiple_of(2) {
            return Err(Error::Format(format!(
                "odd number of real components ({})",
                components.len()
            )));
        }
        Self::new(components.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect())
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// `ψ(site)` with periodic site numbering (site 0 ≡ site n).
    pub fn site(&self, site: isize) -> Complex64 {
        let n = self.n() as isize;
        self.values[((site - 1).rem_euclid(n)) as usize]
    }

    /// Interleaved `(re, im)` components in site order.
    pub fn components(&self) -> Vec<f64> {
        self.values.iter().flat_map(|z| [z.re, z.im]).collect()
    }

    /// `Σ |ψ(x)|²` (unnormalized).
    pub fn norm_sqr(&self) -> f64 {
        ksum(self.values.iter().map(|z| z.norm_sqr()))
    }

    /// Multiply by the global phase `e^{iγ}`.
    pub fn rotate_phase(&self, gamma: f64) -> Self {
        let w = Complex64::from_polar(1.0, gamma);
        Self::from_vec_unchecked(self.values.iter().map(|z| z * w).collect())
    }

    /// Circular shift: the result satisfies `out(x) = ψ(x + shift)`.
    pub fn shift(&self, shift: isize) -> Self {
        let n = self.n() as isize;
        let s = shift.rem_euclid(n) as usize;
        let mut v = self.values.clone();
        v.rotate_left(s);
        Self::from_vec_unchecked(v)
    }

    /// Rescale so that the mass is exactly `m` (up to rounding).
    pub fn with_mass(&self, m: f64) -> Result<Self> {
        let cur = mass(self);
        if cur == 0.0 {
            return Err(Error::Domain("cannot rescale the zero field to positive mass".into()));
        }
        let s = (m / cur).sqrt();
        Ok(Self::from_vec_unchecked(self.values.iter().map(|z| z * s).collect()))
    }

    /// Largest modulus over the sites.
    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    // ---- serialization -------------------------------------------------

    /// Binary form: 8-byte magic, `n` as little-endian u64, then the `2n`
    /// real components as little-endian IEEE-754 doubles in site order.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 16 * self.n());
        out.extend_from_slice(FIELD_MAGIC);
        out.extend_from_slice(&(self.n() as u64).to_le_bytes());
        for z in &self.values {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 16 || &bytes[..8] != FIELD_MAGIC {
            return Err(Error::Format("missing field magic header".into()));
        }
        let n = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
        let body = &bytes[16..];
        if body.len() != 16 * n {
            return Err(Error::Format(format!(
                "header says n = {n} but payload holds {} bytes",
                body.len()
            )));
        }
        let comps: Vec<f64> = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Self::from_components(&comps)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&FieldJson {
            n: self.n(),
            components: self.components(),
        })
        .expect("field JSON serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: FieldJson = serde_json::from_str(s)?;
        if raw.components.len() != 2 * raw.n {
            return Err(Error::Format(format!(
                "n = {} but {} components given",
                raw.n,
                raw.components.len()
            )));
        }
        Self::from_components(&raw.components)
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        Self::from_bytes(&buf)
    }

    /// Load a field file, JSON if the extension is `.json`, binary otherwise.
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(std::str::from_utf8(&bytes).map_err(|e| Error::Format(e.to_string()))?)
        } else {
            Self::from_bytes(&bytes)
        }
    }
}

const FIELD_MAGIC: &[u8; 8] = b"DNLSFLD1";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldJson {
    n: usize,
    components: Vec<f64>,
}

/// `M_n(ψ) = (1/n) Σ |ψ(x)|²`.
pub fn mass(field: &LatticeField) -> f64 {
    field.norm_sqr() / field.n() as f64
}

/// `Σ_x |ψ(x) − ψ(x−1)|²` over the periodic lattice.
pub fn gradient_sum_squares(field: &LatticeField) -> f64 {
    let v = field.values();
    let n = v.len();
    let mut acc = KahanSum::new();
    for i in 0..n {
        let prev = v[(i + n - 1) % n];
        acc.add((v[i] - prev).norm_sqr());
    }
    acc.value()
}

/// Energy breakdown of `field` under `spec`; `field.n()` must equal `spec.n`.
pub fn energy(field: &LatticeField, spec: &GibbsSpec) -> Result<EnergyBreakdown> {
    if field.n() != spec.n {
        return Err(Error::DimensionMismatch {
            expected: spec.n,
            got: field.n(),
        });
    }
    Ok(spec.nonlinearity().energy(field))
}

/// `Δψ(x) = n²(ψ(x+1) − 2ψ(x) + ψ(x−1))`.
pub fn laplacian(field: &LatticeField) -> LatticeField {
    LatticeField::from_vec_unchecked(laplacian_values(field.values()))
}

pub(crate) fn laplacian_values(v: &[Complex64]) -> Vec<Complex64> {
    let n = v.len();
    let n2 = (n * n) as f64;
    (0..n)
        .map(|i| {
            let next = v[(i + 1) % n];
            let prev = v[(i + n - 1) % n];
            ((next - v[i]) + (prev - v[i])) * n2
        })
        .collect()
}

/// `∂_{θ(x)} H_n(ψ) = (1/n) Im[ψ(x) · conj(Δψ(x))]`.
///
/// The phase-invariant potential contributes nothing.
pub fn phase_gradient(field: &LatticeField) -> Vec<f64> {
    let mut out = vec![0.0; field.n()];
    phase_gradient_into(field.values(), &mut out);
    out
}

pub(crate) fn phase_gradient_into(v: &[Complex64], out: &mut [f64]) {
    let n = v.len();
    let nf = n as f64;
    for i in 0..n {
        let next = v[(i + 1) % n];
        let prev = v[(i + n - 1) % n];
        // Im[ψ conj(n²(ψ₊ + ψ₋ − 2ψ))] = n² Im[ψ conj(ψ₊ + ψ₋)]
        let s = next + prev;
        out[i] = nf * (v[i].im * s.re - v[i].re * s.im);
    }
}

/// Cached unitary FFT plans for a fixed lattice size.
#[derive(Clone)]
pub struct Spectral {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    scale: f64,
}

impl fmt::Debug for Spectral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Spectral").field("n", &self.n).finish()
    }
}

impl Spectral {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        Self {
            n,
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); len],
            scale: 1.0 / (n as f64).sqrt(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `ψ̂(k) = n^{-1/2} Σ_j e^{−2πi jk/n} ψ(j)`, in place.
    pub fn forward(&mut self, buf: &mut [Complex64]) {
        self.forward.process_with_scratch(buf, &mut self.scratch);
        for z in buf.iter_mut() {
            *z *= self.scale;
        }
    }

    /// Unnormalized forward transform `Σ_j e^{−2πi jk/n} ψ(j)`, in place.
    pub fn forward_raw(&mut self, buf: &mut [Complex64]) {
        self.forward.process_with_scratch(buf, &mut self.scratch);
    }

    /// Unnormalized inverse transform, in place.
    pub fn inverse_raw(&mut self, buf: &mut [Complex64]) {
        self.inverse.process_with_scratch(buf, &mut self.scratch);
    }

    /// Inverse of [`Spectral::forward`], in place.
    pub fn inverse(&mut self, buf: &mut [Complex64]) {
        self.inverse.process_with_scratch(buf, &mut self.scratch);
        for z in buf.iter_mut() {
            *z *= self.scale;
        }
    }
}

/// `ω_k = 2|sin(πk/n)|`, the modulus of the Fourier symbol of the backward
/// difference.
pub fn omega(k: usize, n: usize) -> f64 {
    2.0 * (std::f64::consts::PI * k as f64 / n as f64).sin().abs()
}

/// Unitary discrete Fourier transform of the field (modes `k = 0..n`).
pub fn fourier(field: &LatticeField) -> Vec<Complex64> {
    let mut buf = field.values().to_vec();
    Spectral::new(field.n()).forward(&mut buf);
    buf
}

/// Inverse of [`fourier`].
pub fn inverse_fourier(modes: &[Complex64]) -> Result<LatticeField> {
    let mut buf = modes.to_vec();
    Spectral::new(modes.len()).inverse(&mut buf);
    LatticeField::new(buf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;
    use rand_distr::StandardNormal;
    use std::f64::consts::PI;

    fn random_field(n: usize, seed: u64) -> LatticeField {
        let mut r = rng::stream(seed, 0);
        LatticeField::from_sites(n, |_| {
            Complex64::new(r.sample(StandardNormal), r.sample(StandardNormal))
        })
        .unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_invalid_fields() {
        assert!(LatticeField::new(vec![c(1.0, 0.0)]).is_err());
        assert!(LatticeField::new(vec![c(1.0, 0.0), c(f64::NAN, 0.0)]).is_err());
        assert!(LatticeField::new(vec![c(1.0, 0.0), c(0.0, f64::INFINITY)]).is_err());
    }

    #[test]
    fn gibbs_spec_validation() {
        assert!(GibbsSpec::new(1, 1.0, 1.0).is_err());
        assert!(GibbsSpec::new(4, 0.0, 1.0).is_err());
        assert!(GibbsSpec::new(4, 1.0, -1.0).is_err());
        assert!(GibbsSpec::with_nonlinearity(4, 1.0, 1.0, Nonlinearity { p: 1.0, kappa: -1.0 }).is_err());
        assert!(GibbsSpec::with_nonlinearity(4, 1.0, 1.0, Nonlinearity { p: 3.0, kappa: 0.5 }).is_err());
        assert!(GibbsSpec::new(4, 1.0, 2.0).is_ok());
    }

    #[test]
    fn mass_of_constant_and_zero_fields() {
        let m = 2.5f64;
        let f = LatticeField::constant(7, c(m.sqrt(), 0.0)).unwrap();
        assert!((mass(&f) - m).abs() < 1e-15);
        let z = LatticeField::constant(5, c(0.0, 0.0)).unwrap();
        assert_eq!(mass(&z), 0.0);
    }

    #[test]
    fn mass_matches_scalar_loop() {
        let f = random_field(8, 11);
        let mut s = 0.0;
        for z in f.values() {
            s += z.re * z.re + z.im * z.im;
        }
        let want = s / 8.0;
        assert!((mass(&f) - want).abs() <= 1e-14 * want);
    }

    #[test]
    fn constant_field_energy() {
        let m = 3.0f64;
        let spec = GibbsSpec::new(6, m, 1.0).unwrap();
        let f = LatticeField::constant(6, c(m.sqrt(), 0.0)).unwrap();
        let e = energy(&f, &spec).unwrap();
        assert_eq!(e.kinetic, 0.0);
        assert!((e.potential - m * m / 4.0).abs() < 1e-14);
        assert!((e.total + m * m / 4.0).abs() < 1e-14);
    }

    #[test]
    fn plane_wave_energy() {
        let (n, m) = (12usize, 1.7f64);
        let spec = GibbsSpec::new(n, m, 1.0).unwrap();
        let f =
            LatticeField::from_sites(n, |x| Complex64::from_polar(m.sqrt(), 2.0 * PI * x as f64 / n as f64)).unwrap();
        let e = energy(&f, &spec).unwrap();
        let nf = n as f64;
        let g = nf * nf * m / 2.0 * 4.0 * (PI / nf).sin().powi(2);
        assert!((e.kinetic - g).abs() < 1e-12 * g);
        assert!((e.potential - m * m / 4.0).abs() < 1e-13);
    }

    #[test]
    fn energy_matches_naive_double_loop() {
        let n = 16;
        let f = random_field(n, 3);
        let spec = GibbsSpec::new(n, mass(&f), 1.0).unwrap();
        let e = energy(&f, &spec).unwrap();
        let nf = n as f64;
        let (mut g, mut v) = (0.0, 0.0);
        for x in 1..=n as isize {
            for y in 1..=n as isize {
                // naive: pick the neighbour pairs out of all pairs
                if (x - 1 - y).rem_euclid(n as isize) == 0 {
                    g += (f.site(x) - f.site(y)).norm_sqr();
                }
            }
            v += f.site(x).norm_sqr().powi(2);
        }
        let g = nf * nf / 2.0 * g / nf;
        let v = v / (4.0 * nf);
        assert!((e.kinetic - g).abs() <= 1e-13 * g);
        assert!((e.potential - v).abs() <= 1e-13 * v);
        assert!((e.total - (g - v)).abs() <= 1e-13 * (g + v));
    }

    #[test]
    fn energy_dimension_mismatch() {
        let f = random_field(8, 1);
        let spec = GibbsSpec::new(9, 1.0, 1.0).unwrap();
        assert!(matches!(
            energy(&f, &spec),
            Err(Error::DimensionMismatch { expected: 9, got: 8 })
        ));
    }

    #[test]
    fn general_exponent_energy() {
        let nl = Nonlinearity::new(2.5, 1.0).unwrap();
        let f = random_field(9, 5);
        let e = nl.energy(&f);
        let v: f64 = f.values().iter().map(|z| z.norm().powf(3.5)).sum::<f64>() / (3.5 * 9.0);
        assert!((e.potential - v).abs() < 1e-12 * v);
        assert!((e.total - (e.kinetic + v)).abs() < 1e-12 * e.total.abs());
    }

    #[test]
    fn laplacian_of_constant_vanishes() {
        let f = LatticeField::constant(9, c(0.3, -1.2)).unwrap();
        assert!(laplacian(&f).values().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn laplacian_fourier_eigenvectors() {
        let n = 10;
        for k in 0..n {
            let f = LatticeField::from_sites(n, |x| Complex64::from_polar(1.0, 2.0 * PI * (k * x) as f64 / n as f64))
                .unwrap();
            let lam = -((n * n) as f64) * omega(k, n).powi(2);
            let lap = laplacian(&f);
            for (a, b) in lap.values().iter().zip(f.values()) {
                assert!((a - b * lam).norm() < 1e-10 * (1.0 + lam.abs()));
            }
        }
    }

    #[test]
    fn laplacian_matches_stencil() {
        let f = random_field(7, 9);
        let lap = laplacian(&f);
        let n2 = 49.0;
        for x in 1..=7isize {
            let want = (f.site(x + 1) - f.site(x) * 2.0 + f.site(x - 1)) * n2;
            let got = lap.site(x);
            assert!((want - got).norm() <= 1e-12 * want.norm().max(1.0));
        }
    }

    #[test]
    fn phase_gradient_vanishes_for_real_and_constant_fields() {
        let mut r = rng::stream(2, 0);
        let real = LatticeField::from_sites(8, |_| c(r.sample(StandardNormal), 0.0)).unwrap();
        assert!(phase_gradient(&real).iter().all(|g| g.abs() < 1e-12));
        let cst = LatticeField::constant(8, c(0.4, 0.9)).unwrap();
        assert!(phase_gradient(&cst).iter().all(|g| g.abs() < 1e-12));
    }

    #[test]
    fn phase_gradient_matches_finite_difference() {
        let n = 8;
        let f = random_field(n, 21);
        let nl = Nonlinearity::default();
        let grad = phase_gradient(&f);
        let h = 1e-6;
        for x in 0..n {
            let rot = |t: f64| {
                let mut v = f.values().to_vec();
                v[x] *= Complex64::from_polar(1.0, t);
                nl.energy(&LatticeField::new(v).unwrap()).total
            };
            let fd = (rot(h) - rot(-h)) / (2.0 * h);
            assert!(
                (fd - grad[x]).abs() <= 1e-7 * (1.0 + grad[x].abs()),
                "site {x}: fd {fd} vs {}",
                grad[x]
            );
        }
    }

    #[test]
    fn delta_field_has_flat_spectrum() {
        let n = 8;
        let m = 0.7f64;
        let mut v = vec![c(0.0, 0.0); n];
        v[0] = c((n as f64).sqrt() * m.sqrt(), 0.0);
        let f = LatticeField::new(v).unwrap();
        let modes = fourier(&f);
        for z in &modes {
            assert!((z.norm() - m.sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn fourier_round_trip_and_parseval() {
        for n in [2usize, 3, 5, 16, 17, 64] {
            let f = random_field(n, n as u64);
            let modes = fourier(&f);
            let back = inverse_fourier(&modes).unwrap();
            for (a, b) in back.values().iter().zip(f.values()) {
                assert!((a - b).norm() < 1e-13);
            }
            let ps = ksum(modes.iter().map(|z| z.norm_sqr()));
            assert!((ps - f.norm_sqr()).abs() < 1e-12 * f.norm_sqr());
        }
    }

    #[test]
    fn fourier_gradient_identity() {
        let n = 16;
        let f = random_field(n, 8);
        let modes = fourier(&f);
        let lhs = gradient_sum_squares(&f);
        let rhs = ksum(
            modes
                .iter()
                .enumerate()
                .map(|(k, z)| omega(k, n).powi(2) * z.norm_sqr()),
        );
        assert!((lhs - rhs).abs() < 1e-12 * lhs);
    }

    #[test]
    fn binary_round_trip_is_bit_exact() {
        let f = random_field(13, 4);
        let back = LatticeField::from_bytes(&f.to_bytes()).unwrap();
        for (a, b) in back.values().iter().zip(f.values()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        let j = LatticeField::from_json(&f.to_json()).unwrap();
        assert_eq!(j, f);
    }

    #[test]
    fn malformed_binary_is_rejected() {
        let f = random_field(4, 4);
        let mut bytes = f.to_bytes();
        bytes.pop();
        assert!(LatticeField::from_bytes(&bytes).is_err());
        assert!(LatticeField::from_bytes(b"nope").is_err());
        assert!(LatticeField::from_json(r#"{"n":3,"components":[1,2]}"#).is_err());
    }

    #[test]
    fn site_indexing_is_periodic() {
        let f = random_field(5, 6);
        assert_eq!(f.site(0), f.site(5));
        assert_eq!(f.site(6), f.site(1));
        assert_eq!(f.shift(2).site(1), f.site(3));
    }
}
