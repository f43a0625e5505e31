//! Numerical Hörmander rank checks for the phase-noise generator.
//!
//! Real coordinates are interleaved: `2x` is `Re ψ(x)` and `2x+1` is
//! `Im ψ(x)` for sites `x = 0..n`. The rotation field
//! `R_{a,b} = ψ_a ∂_b − ψ_b ∂_a` is the linear field with matrix entries
//! `M[b][a] = 1`, `M[a][b] = −1`. Brackets follow the operator convention
//! `[X, Y] = DY·X − DX·Y`, so for linear fields `[A, B] = BA − AB`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Nonlinearity;

/// Real or imaginary part.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Part {
    Re,
    Im,
}

/// One real coordinate `ψ_part(site)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Coord {
    pub site: usize,
    pub part: Part,
}

impl Coord {
    pub fn re(site: usize) -> Self {
        Self { site, part: Part::Re }
    }

    pub fn im(site: usize) -> Self {
        Self { site, part: Part::Im }
    }

    pub fn index(&self) -> usize {
        2 * self.site + usize::from(self.part == Part::Im)
    }
}

/// Vector fields on `ℝ^{2n}` built from rotations and the Hamiltonian field.
#[derive(Clone, Debug, PartialEq)]
pub enum PolyVectorField {
    /// `ψ ↦ Mψ`.
    Linear(DMatrix<f64>),
    /// `ψ̇ = i(Δ₁ψ − κ|ψ|^{p−1}ψ)` with the unscaled lattice Laplacian `Δ₁`.
    Hamiltonian { n: usize, nl: Nonlinearity },
}

/// Interleaved real coordinates of a complex field.
pub fn to_real(psi: &[Complex64]) -> DVector<f64> {
    DVector::from_iterator(2 * psi.len(), psi.iter().flat_map(|z| [z.re, z.im]))
}

/// `R_{a,b}` on `n` sites.
pub fn rotation(n: usize, a: Coord, b: Coord) -> PolyVectorField {
    PolyVectorField::Linear(rotation_matrix(n, a, b))
}

fn rotation_matrix(n: usize, a: Coord, b: Coord) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    if a != b {
        m[(b.index(), a.index())] += 1.0;
        m[(a.index(), b.index())] -= 1.0;
    }
    m
}

/// `∂_θ(x) = R_{x^r, x^i}`.
pub fn phase_field(n: usize, x: usize) -> PolyVectorField {
    rotation(n, Coord::re(x), Coord::im(x))
}

/// The Hamiltonian field `A_n`.
pub fn hamiltonian_field(n: usize, nl: Nonlinearity) -> PolyVectorField {
    PolyVectorField::Hamiltonian { n, nl }
}

/// Matrix of `ψ ↦ iΔ₁ψ`.
fn hamiltonian_linear_part(n: usize) -> DMatrix<f64> {
    let mut l = DMatrix::zeros(2 * n, 2 * n);
    // i·c·ψ(y) contributes to site x: d Re ψ(x) = −c Im ψ(y), d Im ψ(x) = c Re ψ(y)
    let mut couple = |x: usize, y: usize, c: f64| {
        l[(2 * x, 2 * y + 1)] -= c;
        l[(2 * x + 1, 2 * y)] += c;
    };
    for x in 0..n {
        couple(x, (x + 1) % n, 1.0);
        couple(x, (x + n - 1) % n, 1.0);
        couple(x, x, -2.0);
    }
    l
}

impl PolyVectorField {
    /// Dimension `2n` of the ambient space.
    pub fn dim(&self) -> usize {
        match self {
            PolyVectorField::Linear(m) => m.nrows(),
            PolyVectorField::Hamiltonian { n, .. } => 2 * n,
        }
    }

    pub fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            PolyVectorField::Linear(m) => m * x,
            PolyVectorField::Hamiltonian { n, nl } => {
                let mut v = hamiltonian_linear_part(*n) * x;
                for s in 0..*n {
                    let (a, b) = (x[2 * s], x[2 * s + 1]);
                    let r = nl.site_rate(a * a + b * b);
                    // −iκ r ψ
                    v[2 * s] += nl.kappa * r * b;
                    v[2 * s + 1] -= nl.kappa * r * a;
                }
                v
            }
        }
    }

    /// Exact Jacobian at `x`.
    pub fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        match self {
            PolyVectorField::Linear(m) => m.clone(),
            PolyVectorField::Hamiltonian { n, nl } => {
                let mut j = hamiltonian_linear_part(*n);
                for s in 0..*n {
                    let (a, b) = (x[2 * s], x[2 * s + 1]);
                    let q = a * a + b * b;
                    let r = nl.site_rate(q);
                    // d r / d(a, b) = (p−1) q^{(p−3)/2} (a, b)
                    let dr = if nl.p == 3.0 {
                        2.0
                    } else if q > 0.0 {
                        (nl.p - 1.0) * q.powf(0.5 * (nl.p - 3.0))
                    } else {
                        0.0
                    };
                    let (ia, ib) = (2 * s, 2 * s + 1);
                    // v_a = κ r b, v_b = −κ r a
                    j[(ia, ia)] += nl.kappa * dr * a * b;
                    j[(ia, ib)] += nl.kappa * (dr * b * b + r);
                    j[(ib, ia)] -= nl.kappa * (dr * a * a + r);
                    j[(ib, ib)] -= nl.kappa * dr * a * b;
                }
                j
            }
        }
    }

    fn as_linear(&self) -> Option<&DMatrix<f64>> {
        match self {
            PolyVectorField::Linear(m) => Some(m),
            _ => None,
        }
    }
}

/// `[X, Y](p) = DY(p)X(p) − DX(p)Y(p)`.
pub fn commutator(x: &PolyVectorField, y: &PolyVectorField, point: &DVector<f64>) -> DVector<f64> {
    y.jacobian(point) * x.eval(point) - x.jacobian(point) * y.eval(point)
}

/// Whether `m` is a combination of the site phase rotations `R_{x^r,x^i}`.
fn is_phase_combination(m: &DMatrix<f64>) -> bool {
    let n = m.nrows() / 2;
    for i in 0..2 * n {
        for j in 0..2 * n {
            let same_site = i / 2 == j / 2;
            let v = m[(i, j)];
            if !same_site && v != 0.0 {
                return false;
            }
        }
    }
    (0..n).all(|s| {
        m[(2 * s, 2 * s)] == 0.0 && m[(2 * s + 1, 2 * s + 1)] == 0.0 && m[(2 * s, 2 * s + 1)] == -m[(2 * s + 1, 2 * s)]
    })
}

/// Symbolic bracket where it stays in closed form: two linear fields, or
/// `A_n` against a combination of site phase rotations. In the latter case
/// the nonlinear part drops out because it commutes with every site
/// rotation, leaving the bracket of the linear part.
pub fn bracket_field(x: &PolyVectorField, y: &PolyVectorField) -> Result<PolyVectorField> {
    match (x, y) {
        (PolyVectorField::Linear(a), PolyVectorField::Linear(b)) => Ok(PolyVectorField::Linear(b * a - a * b)),
        (PolyVectorField::Hamiltonian { n, .. }, PolyVectorField::Linear(b)) if is_phase_combination(b) => {
            let a = hamiltonian_linear_part(*n);
            Ok(PolyVectorField::Linear(b * &a - &a * b))
        }
        (PolyVectorField::Linear(b), PolyVectorField::Hamiltonian { .. }) if is_phase_combination(b) => {
            Ok(match bracket_field(y, x)? {
                PolyVectorField::Linear(m) => PolyVectorField::Linear(-m),
                other => other,
            })
        }
        _ => Err(Error::param(
            "bracket",
            "no closed form for this pair; evaluate pointwise with `commutator`",
        )),
    }
}

/// Matrices of the family `𝒢ₙᵒ`: `R_{x^r,x^i}`, `R_{x^r,y^i} − R_{x^i,y^r}`
/// and `R_{x^r,y^r} + R_{x^i,y^i}` for `x < y`.
pub fn explicit_family(n: usize) -> Vec<DMatrix<f64>> {
    let r = |a, b| rotation_matrix(n, a, b);
    let mut out = Vec::with_capacity(n * n);
    for x in 0..n {
        out.push(r(Coord::re(x), Coord::im(x)));
    }
    for x in 0..n {
        for y in (x + 1)..n {
            out.push(r(Coord::re(x), Coord::im(y)) - r(Coord::im(x), Coord::re(y)));
            out.push(r(Coord::re(x), Coord::re(y)) + r(Coord::im(x), Coord::im(y)));
        }
    }
    out
}

/// Numerical rank of a set of vectors: singular values above
/// `1e−10 · σ_max`.
pub fn numerical_rank(vectors: &[DVector<f64>]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let m = DMatrix::from_columns(vectors);
    let sv = m.singular_values();
    let smax = sv.max();
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > 1e-10 * smax).count()
}

/// Point-independent basis of the linear part of the bracket closure of
/// `{∂_θ(x)} ∪ {A_n}`, grown level by level.
#[derive(Clone, Debug)]
pub struct NestedClosure {
    pub n: usize,
    pub nl: Nonlinearity,
    /// Orthonormal (Frobenius) basis of the linear fields found so far.
    pub basis: Vec<DMatrix<f64>>,
    /// Bracket depth at which each basis element first appeared.
    pub depth: Vec<usize>,
}

fn orthogonalize(basis: &[DMatrix<f64>], mut m: DMatrix<f64>) -> Option<DMatrix<f64>> {
    let scale = m.norm();
    if scale == 0.0 {
        return None;
    }
    for _ in 0..2 {
        for b in basis {
            let c = b.dot(&m);
            m -= b * c;
        }
    }
    let r = m.norm();
    (r > 1e-9 * scale).then(|| m / r)
}

impl NestedClosure {
    /// Depth 0: the site rotations. Depth 1: `𝒜_x = [A_n, ∂_θ(x)]`. Depth
    /// `k ≥ 2`: brackets of depth-`(k−1)` elements with the whole basis.
    pub fn build(n: usize, nl: Nonlinearity, max_depth: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n", "need at least one site"));
        }
        let mut c = Self {
            n,
            nl,
            basis: Vec::new(),
            depth: Vec::new(),
        };
        let phases: Vec<PolyVectorField> = (0..n).map(|x| phase_field(n, x)).collect();
        for f in &phases {
            c.push(f.as_linear().expect("linear").clone(), 0);
        }
        if max_depth == 0 {
            return Ok(c);
        }
        let ham = hamiltonian_field(n, nl);
        for f in &phases {
            if let PolyVectorField::Linear(m) = bracket_field(&ham, f)? {
                c.push(m, 1);
            }
        }
        let mut frontier_start = n;
        for d in 2..=max_depth {
            let frontier: Vec<DMatrix<f64>> = c.basis[frontier_start..].to_vec();
            frontier_start = c.basis.len();
            let all = c.basis.clone();
            for a in &frontier {
                for b in &all {
                    c.push(b * a - a * b, d);
                }
            }
            if c.basis.len() == frontier_start {
                break;
            }
        }
        Ok(c)
    }

    fn push(&mut self, m: DMatrix<f64>, depth: usize) {
        if let Some(q) = orthogonalize(&self.basis, m) {
            self.basis.push(q);
            self.depth.push(depth);
        }
    }

    /// Rank of the closure at `psi`, together with the smallest depth whose
    /// fields (plus `A_n`) already reach that rank.
    pub fn rank_at(&self, psi: &[Complex64]) -> Result<(usize, usize)> {
        check_point(psi, self.n)?;
        let x = to_real(psi);
        let mut vectors = vec![hamiltonian_field(self.n, self.nl).eval(&x)];
        let max_depth = self.depth.iter().copied().max().unwrap_or(0);
        let mut reached = (0, 0);
        for d in 0..=max_depth {
            vectors.extend(
                self.basis
                    .iter()
                    .zip(&self.depth)
                    .filter(|(_, &k)| k == d)
                    .map(|(m, _)| m * &x),
            );
            let r = numerical_rank(&vectors);
            if r > reached.0 {
                reached = (r, d);
            }
        }
        Ok(reached)
    }
}

fn check_point(psi: &[Complex64], n: usize) -> Result<()> {
    if psi.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: psi.len(),
        });
    }
    if psi.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        return Err(Error::Domain("the zero field is not on any mass sphere".into()));
    }
    Ok(())
}

/// How the Lie span is assembled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankMode {
    /// The family `𝒢ₙᵒ` evaluated at the point.
    #[default]
    ExplicitFamily,
    /// Bracket closure of `{∂_θ(x)} ∪ {A_n}` to depth 4.
    NestedBrackets,
}

/// Default closure depth of [`RankMode::NestedBrackets`].
pub const NESTED_DEPTH: usize = 4;

/// Tangent rank of the Lie span at `psi` (cubic focusing Hamiltonian).
pub fn lie_rank(psi: &[Complex64], mode: RankMode) -> Result<usize> {
    let n = psi.len();
    check_point(psi, n)?;
    match mode {
        RankMode::ExplicitFamily => {
            let x = to_real(psi);
            let vs: Vec<DVector<f64>> = explicit_family(n).iter().map(|m| m * &x).collect();
            Ok(numerical_rank(&vs))
        }
        RankMode::NestedBrackets => {
            let c = NestedClosure::build(n, Nonlinearity::default(), NESTED_DEPTH)?;
            Ok(c.rank_at(psi)?.0)
        }
    }
}

/// Summary of a rank sweep at one `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankSweep {
    pub n: usize,
    pub points: usize,
    pub explicit_failures: usize,
    pub nested_failures: usize,
    pub mode_disagreements: usize,
    /// Largest depth the nested closure needed.
    pub max_depth_needed: usize,
}

/// Check rank `2n − 1` in both modes at random points; every tenth point
/// has one vanishing site.
pub fn rank_sweep(n: usize, points: usize, seed: u64) -> Result<RankSweep> {
    use rand_distr::{Distribution, StandardNormal};
    let closure = NestedClosure::build(n, Nonlinearity::default(), NESTED_DEPTH)?;
    let target = 2 * n - 1;
    let results: Vec<Result<(usize, usize, usize)>> = (0..points)
        .into_par_iter()
        .map(|i| {
            let mut r = crate::rng::stream(seed, crate::rng::stream_id("rank", (n as u64) << 32 | i as u64));
            let mut psi: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(StandardNormal.sample(&mut r), StandardNormal.sample(&mut r)))
                .collect();
            if i % 10 == 9 && n > 1 {
                psi[i % n] = Complex64::new(0.0, 0.0);
            }
            let e = lie_rank(&psi, RankMode::ExplicitFamily)?;
            let (k, d) = closure.rank_at(&psi)?;
            Ok((e, k, d))
        })
        .collect();
    let mut s = RankSweep {
        n,
        points,
        explicit_failures: 0,
        nested_failures: 0,
        mode_disagreements: 0,
        max_depth_needed: 0,
    };
    for r in results {
        let (e, k, d) = r?;
        s.explicit_failures += usize::from(e != target);
        s.nested_failures += usize::from(k != target);
        s.mode_disagreements += usize::from(e != k);
        s.max_depth_needed = s.max_depth_needed.max(d);
    }
    Ok(s)
}
