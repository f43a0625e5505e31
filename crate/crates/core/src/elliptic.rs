//! Jacobi elliptic functions, elliptic integrals and the continuous soliton
//! of the focusing cubic NLS on a torus of length `L`.
//!
//! The minimizer of `H(u) = ½∫|u'|² − ¼∫|u|⁴` at fixed mass `∫|u|² = m` is
//! either the constant `√(m/L)` or the dnoidal wave `α dn(λx, k)` with
//!
//! ```text
//! λ = 2K(k)/L,   α² = 2λ²,   ω = λ²(2 − k²),   m = 8K(k)E(k)/L.
//! ```
//!
//! The dnoidal family only exists for `m > 2π²/L`. Which branch is returned
//! is decided by comparing energies, never by a hardcoded threshold.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::GaussLegendre;

const AGM_MAX_ITER: usize = 64;

fn complementary(k: f64) -> f64 {
    // (1−k)(1+k) keeps the relative accuracy of k' when k is close to 1.
    ((1.0 - k) * (1.0 + k)).sqrt()
}

fn check_modulus(k: f64, allow_one: bool) -> Result<()> {
    let ok = k.is_finite() && k >= 0.0 && (if allow_one { k <= 1.0 } else { k < 1.0 });
    if ok {
        Ok(())
    } else {
        let range = if allow_one { "[0, 1]" } else { "[0, 1)" };
        Err(Error::Domain(format!("elliptic modulus k = {k} outside {range}")))
    }
}

/// Arithmetic–geometric mean of two nonnegative numbers.
pub fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..AGM_MAX_ITER {
        if (a - b).abs() <= f64::EPSILON * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    0.5 * (a + b)
}

/// Complete elliptic integral of the first kind `K(k) = F(π/2; k)`.
pub fn complete_k(k: f64) -> Result<f64> {
    check_modulus(k, false)?;
    Ok(FRAC_PI_2 / agm(1.0, complementary(k)))
}

/// Complete elliptic integral of the second kind
/// `E(k) = ∫₀^{π/2} √(1 − k² sin²θ) dθ`.
pub fn complete_e(k: f64) -> Result<f64> {
    check_modulus(k, true)?;
    if k == 1.0 {
        return Ok(1.0);
    }
    let (mut a, mut b) = (1.0f64, complementary(k));
    // E/K = 1 − Σ_j 2^{j−1} c_j², c₀ = k
    let mut sum = 0.5 * k * k;
    let mut pow = 0.5;
    for _ in 0..AGM_MAX_ITER {
        let c = 0.5 * (a - b);
        pow *= 2.0;
        sum += pow * c * c;
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
        if c.abs() <= f64::EPSILON * a {
            break;
        }
    }
    Ok(FRAC_PI_2 / a * (1.0 - sum))
}

/// Carlson's symmetric integral `R_F(x, y, z)`.
pub fn carlson_rf(x: f64, y: f64, z: f64) -> f64 {
    let (mut x, mut y, mut z) = (x, y, z);
    for _ in 0..100 {
        let mu = (x + y + z) / 3.0;
        let dx = 1.0 - x / mu;
        let dy = 1.0 - y / mu;
        let dz = 1.0 - z / mu;
        if dx.abs().max(dy.abs()).max(dz.abs()) < 1e-4 {
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            return (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / mu.sqrt();
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let l = sx * sy + sy * sz + sz * sx;
        x = 0.25 * (x + l);
        y = 0.25 * (y + l);
        z = 0.25 * (z + l);
    }
    let mu = (x + y + z) / 3.0;
    1.0 / mu.sqrt()
}

/// Carlson's symmetric integral `R_D(x, y, z)`.
pub fn carlson_rd(x: f64, y: f64, z: f64) -> f64 {
    let (mut x, mut y, mut z) = (x, y, z);
    let mut sum = 0.0;
    let mut fac = 1.0;
    for _ in 0..100 {
        let mu = (x + y + 3.0 * z) / 5.0;
        let dx = 1.0 - x / mu;
        let dy = 1.0 - y / mu;
        let dz = 1.0 - z / mu;
        if dx.abs().max(dy.abs()).max(dz.abs()) < 1e-4 {
            let ea = dx * dy;
            let eb = dz * dz;
            let ec = ea - eb;
            let ed = ea - 6.0 * eb;
            let ee = ed + ec + ec;
            let s = 1.0
                + ed * (-3.0 / 14.0 + 9.0 / 88.0 * ed - 4.5 / 26.0 * dz * ee)
                + dz * (1.0 / 6.0 * ee + dz * (-9.0 / 22.0 * ec + dz * 3.0 / 26.0 * ea));
            return 3.0 * sum + fac * s / (mu * mu.sqrt());
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let l = sx * sy + sy * sz + sz * sx;
        sum += fac / (sz * (z + l));
        fac *= 0.25;
        x = 0.25 * (x + l);
        y = 0.25 * (y + l);
        z = 0.25 * (z + l);
    }
    let mu = (x + y + 3.0 * z) / 5.0;
    3.0 * sum + fac / (mu * mu.sqrt())
}

/// Incomplete elliptic integral of the first kind
/// `F(φ; k) = ∫₀^φ dθ / √(1 − k² sin²θ)`, for `|φ| ≤ π/2`.
pub fn incomplete_f(phi: f64, k: f64) -> Result<f64> {
    check_modulus(k, true)?;
    if !(phi.abs() <= FRAC_PI_2) {
        return Err(Error::Domain(format!("amplitude φ = {phi} outside [−π/2, π/2]")));
    }
    if k == 1.0 && phi.abs() == FRAC_PI_2 {
        return Err(Error::Domain("F(π/2; 1) diverges".into()));
    }
    let (s, c) = phi.sin_cos();
    let ks = k * s;
    Ok(s * carlson_rf(c * c, (1.0 - ks) * (1.0 + ks), 1.0))
}

/// Incomplete elliptic integral of the second kind
/// `E(φ; k) = ∫₀^φ √(1 − k² sin²θ) dθ`, for `|φ| ≤ π/2`.
pub fn incomplete_e(phi: f64, k: f64) -> Result<f64> {
    check_modulus(k, true)?;
    if !(phi.abs() <= FRAC_PI_2) {
        return Err(Error::Domain(format!("amplitude φ = {phi} outside [−π/2, π/2]")));
    }
    let (s, c) = phi.sin_cos();
    let ks = k * s;
    let y = (1.0 - ks) * (1.0 + ks);
    let s3 = s * s * s;
    Ok(s * carlson_rf(c * c, y, 1.0) - k * k * s3 * carlson_rd(c * c, y, 1.0) / 3.0)
}

/// Values of the three Jacobi elliptic functions at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jacobi {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

/// `(sn, cn, dn)(u, k)` by the descending Landen / AGM scheme.
pub fn jacobi(u: f64, k: f64) -> Result<Jacobi> {
    check_modulus(k, true)?;
    if !u.is_finite() {
        return Err(Error::Domain(format!("argument u = {u} is not finite")));
    }
    if k == 1.0 {
        let sech = 1.0 / u.cosh();
        return Ok(Jacobi {
            sn: u.tanh(),
            cn: sech,
            dn: sech,
        });
    }
    if k == 0.0 {
        let (s, c) = u.sin_cos();
        return Ok(Jacobi { sn: s, cn: c, dn: 1.0 });
    }
    let mut a = [0.0f64; AGM_MAX_ITER + 1];
    let mut c = [0.0f64; AGM_MAX_ITER + 1];
    a[0] = 1.0;
    c[0] = k;
    let mut b = complementary(k);
    let mut steps = 0;
    while steps < AGM_MAX_ITER && c[steps].abs() > f64::EPSILON * a[steps] {
        let (ai, bi) = (a[steps], b);
        a[steps + 1] = 0.5 * (ai + bi);
        c[steps + 1] = 0.5 * (ai - bi);
        b = (ai * bi).sqrt();
        steps += 1;
    }
    let mut phi = (1u64 << steps) as f64 * a[steps] * u;
    for j in (1..=steps).rev() {
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    // 1 − k² sn² = cn² + k'² sn², free of cancellation when k → 1.
    let kp = complementary(k);
    let dn = (cn * cn + kp * kp * sn * sn).sqrt();
    Ok(Jacobi { sn, cn, dn })
}

/// Which minimizer family a soliton belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Constant,
    Dnoidal,
}

/// Parameters of the continuous soliton `Q_{m,L}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolitonParams {
    pub branch: Branch,
    pub m: f64,
    #[serde(rename = "L")]
    pub length: f64,
    pub alpha: f64,
    /// Spatial scale; absent on the constant branch.
    pub lambda: Option<f64>,
    /// Elliptic modulus; absent on the constant branch.
    pub k: Option<f64>,
    pub omega: f64,
}

/// Smallest mass reached by the dnoidal family, `2π²/L`.
pub fn dnoidal_onset(length: f64) -> f64 {
    2.0 * PI * PI / length
}

/// Mass of `α dn(λx, k)` over one torus of length `L` with `λL = 2K(k)`.
pub fn dnoidal_mass(k: f64, length: f64) -> Result<f64> {
    Ok(8.0 * complete_k(k)? * complete_e(k)? / length)
}

const K_LO: f64 = 1e-9;
const K_HI: f64 = 1.0 - 1e-12;
const K_TOL: f64 = 1e-13;

fn solve_modulus(m: f64, length: f64) -> Result<f64> {
    let f = |k: f64| dnoidal_mass(k, length).map(|mk| mk - m);
    let (mut lo, mut hi) = (K_LO, K_HI);
    let (flo, fhi) = (f(lo)?, f(hi)?);
    if !(flo < 0.0 && fhi > 0.0) {
        return Err(Error::RootFind(format!(
            "mass equation not bracketed for m = {m}, L = {length}: \
             residual {flo:.6e} at k = {lo:e}, {fhi:.6e} at k = 1 − 1e−12 \
             (dnoidal masses span ({:.6}, {:.6}))",
            flo + m,
            fhi + m
        )));
    }
    let mut iters = 0;
    while hi - lo > K_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iters += 1;
        if iters > 200 {
            return Err(Error::RootFind(format!(
                "bisection stalled at k ∈ [{lo}, {hi}] for m = {m}"
            )));
        }
    }
    Ok(0.5 * (lo + hi))
}

impl SolitonParams {
    pub fn constant(m: f64, length: f64) -> Result<Self> {
        check_mass_length(m, length)?;
        Ok(Self {
            branch: Branch::Constant,
            m,
            length,
            alpha: (m / length).sqrt(),
            lambda: None,
            k: None,
            omega: m / length,
        })
    }

    /// The dnoidal wave of mass `m`, which exists only above `2π²/L`.
    pub fn dnoidal(m: f64, length: f64) -> Result<Self> {
        check_mass_length(m, length)?;
        let k = solve_modulus(m, length)?;
        let lambda = 2.0 * complete_k(k)? / length;
        Ok(Self {
            branch: Branch::Dnoidal,
            m,
            length,
            alpha: std::f64::consts::SQRT_2 * lambda,
            lambda: Some(lambda),
            k: Some(k),
            omega: lambda * lambda * (2.0 - k * k),
        })
    }

    /// `Q(x)`, periodic in `x` with period `L`.
    pub fn value(&self, x: f64) -> f64 {
        match (self.lambda, self.k) {
            (Some(lambda), Some(k)) => {
                let x = x.rem_euclid(self.length);
                self.alpha * jacobi(lambda * x, k).expect("valid modulus").dn
            }
            _ => self.alpha,
        }
    }

    /// `(Q(x), Q'(x))` from one Jacobi evaluation.
    pub fn value_and_derivative(&self, x: f64) -> (f64, f64) {
        match (self.lambda, self.k) {
            (Some(lambda), Some(k)) => {
                let x = x.rem_euclid(self.length);
                let j = jacobi(lambda * x, k).expect("valid modulus");
                (self.alpha * j.dn, -self.alpha * lambda * k * k * j.sn * j.cn)
            }
            _ => (self.alpha, 0.0),
        }
    }

    /// `Q'(x) = −αλk² sn cn`.
    pub fn derivative(&self, x: f64) -> f64 {
        match (self.lambda, self.k) {
            (Some(lambda), Some(k)) => {
                let x = x.rem_euclid(self.length);
                let j = jacobi(lambda * x, k).expect("valid modulus");
                -self.alpha * lambda * k * k * j.sn * j.cn
            }
            _ => 0.0,
        }
    }

    /// `∫₀^L Q⁴` in closed form.
    pub fn quartic_integral(&self) -> f64 {
        match (self.lambda, self.k) {
            (Some(lambda), Some(k)) => {
                let kk = complete_k(k).expect("valid modulus");
                let ee = complete_e(k).expect("valid modulus");
                let k2 = k * k;
                let quarter = (2.0 * (2.0 - k2) * ee - (1.0 - k2) * kk) / 3.0;
                self.alpha.powi(4) / lambda * 2.0 * quarter
            }
            _ => self.m * self.m / self.length,
        }
    }

    /// Energy from the virial relation `¼∫Q⁴ − ωm/2`.
    pub fn energy_virial(&self) -> f64 {
        0.25 * self.quartic_integral() - 0.5 * self.omega * self.m
    }

    /// Energy `½∫Q'² − ¼∫Q⁴` by composite Gauss–Legendre quadrature.
    pub fn energy_quadrature(&self) -> f64 {
        if self.branch == Branch::Constant {
            return -0.25 * self.m * self.m / self.length;
        }
        let gl = GaussLegendre::new(16);
        gl.integrate_composite(0.0, self.length, 64, |x| {
            let q = self.value(x);
            let dq = self.derivative(x);
            0.5 * dq * dq - 0.25 * q.powi(4)
        })
    }

    /// `E₀(m, L) = H(Q)`, cross-validated between the two evaluation routes.
    pub fn energy(&self) -> Result<f64> {
        let v = self.energy_virial();
        let q = self.energy_quadrature();
        if (v - q).abs() > 1e-8 * v.abs().max(1.0) {
            return Err(Error::Consistency(format!(
                "soliton energy routes disagree: virial {v:.15e} vs quadrature {q:.15e}"
            )));
        }
        Ok(v)
    }
}

fn check_mass_length(m: f64, length: f64) -> Result<()> {
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::param("m", format!("mass must be positive, got {m}")));
    }
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::param(
            "L",
            format!("torus length must be positive, got {length}"),
        ));
    }
    Ok(())
}

/// The energy minimizer at mass `m` on a torus of length `L`.
///
/// The dnoidal branch is returned only when it exists and has strictly lower
/// energy than the constant function.
pub fn soliton_params(m: f64, length: f64) -> Result<SolitonParams> {
    let constant = SolitonParams::constant(m, length)?;
    if m <= dnoidal_mass(K_LO, length)? {
        return Ok(constant);
    }
    let dn = SolitonParams::dnoidal(m, length)?;
    if dn.energy_virial() < constant.energy_virial() {
        Ok(dn)
    } else {
        Ok(constant)
    }
}

/// Evaluate `Q_{m,L}(x)`.
pub fn soliton_eval(params: &SolitonParams, x: f64) -> f64 {
    params.value(x)
}

/// `E₀(m, L)`.
pub fn soliton_energy(params: &SolitonParams) -> Result<f64> {
    params.energy()
}

/// Smallest mass at which [`soliton_params`] switches to the dnoidal
/// branch, located by bisection on the branch decision itself.
pub fn measured_branch_threshold(length: f64) -> Result<f64> {
    let (mut lo, mut hi) = (0.25 * dnoidal_onset(length), 4.0 * dnoidal_onset(length));
    if soliton_params(hi, length)?.branch != Branch::Dnoidal {
        return Err(Error::RootFind(format!(
            "dnoidal branch never wins below m = {hi} at L = {length}"
        )));
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if soliton_params(mid, length)?.branch == Branch::Dnoidal {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Adaptive Simpson on the defining integrals, independent of the AGM.
    fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
        #[allow(clippy::too_many_arguments)]
        fn rec<F: Fn(f64) -> f64>(
            f: &F,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let lm = 0.5 * (a + m);
            let rm = 0.5 * (m + b);
            let flm = f(lm);
            let frm = f(rm);
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                    + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
            }
        }
        let fa = f(a);
        let fb = f(b);
        let fm = f(0.5 * (a + b));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        rec(f, a, b, fa, fm, fb, whole, tol, 50)
    }

    #[test]
    fn k_at_zero_and_quadrature() {
        assert!((complete_k(0.0).unwrap() - FRAC_PI_2).abs() < 1e-15);
        let k = 0.99f64;
        let oracle = adaptive_simpson(
            &|t: f64| 1.0 / (1.0 - k * k * t.sin().powi(2)).sqrt(),
            0.0,
            FRAC_PI_2,
            1e-14,
        );
        assert!(
            (complete_k(k).unwrap() - oracle).abs() < 1e-10,
            "{} vs {oracle}",
            complete_k(k).unwrap()
        );
        assert!(complete_k(1.0).is_err());
        assert!(complete_k(-0.1).is_err());
    }

    #[test]
    fn k_is_increasing() {
        let a = complete_k(0.3).unwrap();
        let b = complete_k(0.6).unwrap();
        let c = complete_k(0.9).unwrap();
        assert!(a < b && b < c);
    }

    #[test]
    fn e_special_values_and_quadrature() {
        assert!((complete_e(0.0).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(complete_e(1.0).unwrap(), 1.0);
        let k = 0.7f64;
        let oracle = adaptive_simpson(&|t: f64| (1.0 - k * k * t.sin().powi(2)).sqrt(), 0.0, FRAC_PI_2, 1e-14);
        assert!((complete_e(k).unwrap() - oracle).abs() < 1e-10);
        // Legendre relation E K' + E' K − K K' = π/2
        let kp = complementary(k);
        let lhs = complete_e(k).unwrap() * complete_k(kp).unwrap() + complete_e(kp).unwrap() * complete_k(k).unwrap()
            - complete_k(k).unwrap() * complete_k(kp).unwrap();
        assert!((lhs - FRAC_PI_2).abs() < 1e-13);
    }

    #[test]
    fn incomplete_integrals_match_quadrature_and_complete_values() {
        for &k in &[0.0, 0.3, 0.8, 0.99] {
            for &phi in &[0.1, 0.7, 1.3] {
                let f_oracle =
                    adaptive_simpson(&|t: f64| 1.0 / (1.0 - k * k * t.sin().powi(2)).sqrt(), 0.0, phi, 1e-14);
                let e_oracle = adaptive_simpson(&|t: f64| (1.0 - k * k * t.sin().powi(2)).sqrt(), 0.0, phi, 1e-14);
                assert!((incomplete_f(phi, k).unwrap() - f_oracle).abs() < 1e-12);
                assert!((incomplete_e(phi, k).unwrap() - e_oracle).abs() < 1e-12);
            }
            if k < 1.0 {
                assert!((incomplete_f(FRAC_PI_2, k).unwrap() - complete_k(k).unwrap()).abs() < 1e-12);
                assert!((incomplete_e(FRAC_PI_2, k).unwrap() - complete_e(k).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn jacobi_inverts_incomplete_f() {
        for &k in &[0.2, 0.6, 0.95] {
            for &phi in &[0.2, 0.9, 1.5] {
                let u = incomplete_f(phi, k).unwrap();
                let j = jacobi(u, k).unwrap();
                assert!((j.sn - phi.sin()).abs() < 1e-13);
                assert!((j.cn - phi.cos()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn jacobi_limits() {
        for i in 0..50 {
            let u = -5.0 + 0.2 * i as f64;
            let j0 = jacobi(u, 0.0).unwrap();
            assert!((j0.sn - u.sin()).abs() < 1e-12);
            assert!((j0.cn - u.cos()).abs() < 1e-12);
            assert!((j0.dn - 1.0).abs() < 1e-12);
            let j1 = jacobi(u, 1.0).unwrap();
            assert!((j1.sn - u.tanh()).abs() < 1e-12);
            assert!((j1.cn - 1.0 / u.cosh()).abs() < 1e-12);
            assert!((j1.dn - 1.0 / u.cosh()).abs() < 1e-12);
        }
        // nearly degenerate moduli approach the limits continuously
        let j = jacobi(0.8, 1e-9).unwrap();
        assert!((j.sn - 0.8f64.sin()).abs() < 1e-12);
        let j = jacobi(0.8, 1.0 - 1e-15).unwrap();
        assert!((j.sn - 0.8f64.tanh()).abs() < 1e-12);
    }

    #[test]
    fn dn_derivative_matches_finite_difference() {
        let (u, k, h) = (0.7, 0.6, 1e-5);
        let d = (jacobi(u + h, k).unwrap().dn - jacobi(u - h, k).unwrap().dn) / (2.0 * h);
        let j = jacobi(u, k).unwrap();
        assert!((d + k * k * j.cn * j.sn).abs() < 1e-7);
    }

    #[test]
    fn jacobi_special_points() {
        let k = 0.8;
        let kk = complete_k(k).unwrap();
        let j = jacobi(kk, k).unwrap();
        assert!((j.sn - 1.0).abs() < 1e-13);
        assert!(j.cn.abs() < 1e-13);
        assert!((j.dn - complementary(k)).abs() < 1e-13);
    }

    proptest! {
        #[test]
        fn pythagorean_identities(u in -30.0f64..30.0, k in 0.0f64..1.0) {
            let j = jacobi(u, k).unwrap();
            prop_assert!((j.sn * j.sn + j.cn * j.cn - 1.0).abs() < 1e-12);
            prop_assert!((k * k * j.sn * j.sn + j.dn * j.dn - 1.0).abs() < 1e-12);
        }

        #[test]
        fn dn_has_period_2k(u in -10.0f64..10.0, i in 1usize..10) {
            let k = 0.1 * i as f64;
            let p = 2.0 * complete_k(k).unwrap();
            let a = jacobi(u, k).unwrap().dn;
            let b = jacobi(u + p, k).unwrap().dn;
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_branch_small_mass() {
        let p = soliton_params(0.5, 1.0).unwrap();
        assert_eq!(p.branch, Branch::Constant);
        assert!((p.alpha - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((p.omega - 0.5).abs() < 1e-15);
        assert!((soliton_eval(&p, 0.37) - 0.5f64.sqrt()).abs() < 1e-15);
        let e = soliton_energy(&p).unwrap();
        assert!((e + 0.0625).abs() < 1e-15);
        assert!((p.energy_virial() + 0.0625).abs() < 1e-15);
    }

    #[test]
    fn dnoidal_branch_at_m25() {
        let p = soliton_params(25.0, 1.0).unwrap();
        assert_eq!(p.branch, Branch::Dnoidal);
        let (k, lambda) = (p.k.unwrap(), p.lambda.unwrap());
        assert!((lambda - 2.0 * complete_k(k).unwrap()).abs() < 1e-12);
        assert!((p.alpha * p.alpha - 2.0 * lambda * lambda).abs() < 1e-10);
        assert!(p.omega > 0.0);
        // mass by quadrature of α² dn²
        let gl = GaussLegendre::new(16);
        let mass = gl.integrate_composite(0.0, 1.0, 64, |x| p.value(x).powi(2));
        assert!((mass - 25.0).abs() < 1e-9);
        let e = soliton_energy(&p).unwrap();
        assert!(e < -156.25);
        assert!((p.energy_virial() - p.energy_quadrature()).abs() < 1e-8);
        // crest and trough
        assert!((soliton_eval(&p, 0.0) - p.alpha).abs() < 1e-13);
        let trough = p.alpha * jacobi(complete_k(k).unwrap(), k).unwrap().dn;
        assert!((soliton_eval(&p, 0.5) - trough).abs() < 1e-12);
        assert!((soliton_eval(&p, 0.5) - p.alpha * complementary(k)).abs() < 1e-10);
    }

    #[test]
    fn soliton_is_even_periodic_and_positive() {
        let p = soliton_params(25.0, 1.0).unwrap();
        for i in 0..40 {
            let x = 0.025 * i as f64;
            assert!(soliton_eval(&p, x) > 0.0);
            assert!((soliton_eval(&p, x) - soliton_eval(&p, -x)).abs() < 1e-12);
            assert!((soliton_eval(&p, x) - soliton_eval(&p, x + 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn dnoidal_solves_the_standing_wave_ode() {
        for &m in &[20.0, 25.0, 60.0] {
            let p = soliton_params(m, 1.0).unwrap();
            let h = 1e-3;
            let mut worst = 0.0f64;
            for i in 0..1000 {
                let x = i as f64 / 1000.0;
                let u = |t: f64| p.value(t);
                // sixth-order centered second difference
                let d2 = (2.0 * u(x - 3.0 * h) - 27.0 * u(x - 2.0 * h) + 270.0 * u(x - h) - 490.0 * u(x)
                    + 270.0 * u(x + h)
                    - 27.0 * u(x + 2.0 * h)
                    + 2.0 * u(x + 3.0 * h))
                    / (180.0 * h * h);
                let r = d2 - p.omega * u(x) + u(x).powi(3);
                worst = worst.max(r.abs());
            }
            assert!(worst <= 1e-6 * p.alpha.powi(3), "m = {m}: residual {worst}");
        }
    }

    #[test]
    fn frequency_lower_bound() {
        for &m in &[0.5, 5.0, 25.0, 80.0] {
            let p = soliton_params(m, 1.0).unwrap();
            let bound = p.quartic_integral() / (2.0 * m) + m / 2.0;
            assert!(p.omega >= bound - 1e-10 * bound, "m = {m}");
        }
    }

    #[test]
    fn branch_decided_by_energy() {
        let thr = measured_branch_threshold(1.0).unwrap();
        assert!((thr - dnoidal_onset(1.0)).abs() < 1e-6 * thr);
        // between the two candidate thresholds the constant still wins
        assert_eq!(soliton_params(PI * PI * 1.5, 1.0).unwrap().branch, Branch::Constant);
        assert_eq!(
            soliton_params(2.0 * PI * PI * 1.01, 1.0).unwrap().branch,
            Branch::Dnoidal
        );
        let p = soliton_params(30.0, 2.0).unwrap();
        assert_eq!(p.branch, Branch::Dnoidal);
        assert!((p.lambda.unwrap() * 2.0 - 2.0 * complete_k(p.k.unwrap()).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn root_find_failure_is_reported() {
        match SolitonParams::dnoidal(500.0, 1.0) {
            Err(Error::RootFind(msg)) => assert!(msg.contains("not bracketed")),
            other => panic!("expected root-find error, got {other:?}"),
        }
        assert!(soliton_params(-1.0, 1.0).is_err());
        assert!(soliton_params(1.0, 0.0).is_err());
    }
}
