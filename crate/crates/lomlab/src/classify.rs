//! Classification of transitive algebras: type, density degree with an
//! obstruction witness, and the enveloping algebra.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{
    self, commutant, commutant_of, greedy_division_independent, is_transitive, min_rank, strict_interpolate,
    MatrixAlgebra, DEFAULT_PROBES, DEFAULT_SEED,
};
use crate::division::{frobenius_recognize, AlgebraType, DivisionStructure};
use crate::error::{Error, Result};
use crate::numeric::{RealMatrix, Tolerance, Vector};

pub const DEFAULT_TRIALS: usize = 25;

fn require_transitive(a: &MatrixAlgebra, tol: &Tolerance) -> Result<()> {
    let report = is_transitive(a, tol, DEFAULT_PROBES, DEFAULT_SEED)?;
    if report.transitive {
        return Ok(());
    }
    let dim = report.witness.map(|w| w.basis.len()).unwrap_or(0);
    Err(Error::NotTransitive(format!("found an invariant subspace of dimension {dim}")))
}

/// Commutant of a transitive algebra, recognized as R, C or H.
pub fn division_structure(a: &MatrixAlgebra, tol: &Tolerance) -> Result<DivisionStructure> {
    require_transitive(a, tol)?;
    frobenius_recognize(&commutant(a, tol), tol)
}

pub fn classify_type(a: &MatrixAlgebra, tol: &Tolerance) -> Result<AlgebraType> {
    Ok(division_structure(a, tol)?.algebra_type)
}

/// A pair `(x, W x)` that no element of the algebra can send to `(0, y)`
/// with `y` a unit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityWitness {
    pub x: Vector,
    pub wx: Vector,
    /// Index into the structure units of the `W` used.
    pub unit: usize,
    /// Smallest residual of `T x = 0, T W x = y` over all `T` in the algebra
    /// and unit `y`.
    pub margin: f64,
    /// `margin * sqrt((1 + ||W||^2) / 2)`. Scale-free: at least `1/sqrt 2`
    /// for every similarity, equal to `margin` when `W` is orthogonal.
    pub normalized_margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityReport {
    pub degree: usize,
    pub witness: Option<DensityWitness>,
    /// Largest count of random vectors that random targets could be
    /// interpolated on; the degree is `n / this`.
    pub max_interpolable: usize,
    /// Largest interpolation residual over the verification trials.
    pub max_residual: f64,
    pub trials: usize,
    pub seed: u64,
}

fn random_vector<R: Rng>(rng: &mut R, n: usize) -> Vector {
    DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
}

/// Largest `m` for which `m` random vectors can be sent to `m` random
/// targets. For an algebra dense over D this is `n / dim D`.
fn max_interpolable<R: Rng>(a: &MatrixAlgebra, tol: &Tolerance, rng: &mut R) -> Result<usize> {
    let n = a.ambient_dim();
    let mut best = 0;
    for m in 1..=n {
        let pairs: Vec<(Vector, Vector)> = (0..m).map(|_| (random_vector(rng, n), random_vector(rng, n))).collect();
        match strict_interpolate(a, &pairs, tol) {
            Ok(_) => best = m,
            Err(Error::NoSolution { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(best)
}

/// Density degree `k` with verification: random D-independent families
/// are interpolated exactly, and for `k > 1` a pair `(x, Wx)` is shown to
/// be non-separable.
pub fn density_degree(
    a: &MatrixAlgebra,
    d: &DivisionStructure,
    trials: usize,
    seed: u64,
    tol: &Tolerance,
) -> Result<DensityReport> {
    require_transitive(a, tol)?;
    let n = a.ambient_dim();
    let k = d.commutant_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let m_max = max_interpolable(a, tol, &mut rng)?;
    if m_max == 0 || !n.is_multiple_of(m_max) || n / m_max != k {
        return Err(Error::Inconsistent(format!(
            "{m_max} random points are interpolable in dimension {n}, commutant dimension is {k}"
        )));
    }

    let d_rank = n / k;
    let mut max_residual = 0.0f64;
    for _ in 0..trials {
        let m = rng.random_range(1..=d_rank);
        let family: Vec<Vector> = (0..k * m).map(|_| random_vector(&mut rng, n)).collect();
        let mut chosen = greedy_division_independent(d, &family, tol);
        if chosen.len() < m {
            return Err(Error::Inconsistent(format!(
                "{} real-independent vectors contain only {} D-independent ones, expected {m}",
                k * m,
                chosen.len()
            )));
        }
        chosen.truncate(m);
        let pairs: Vec<(Vector, Vector)> =
            chosen.iter().map(|&i| (family[i].clone(), random_vector(&mut rng, n))).collect();
        let sol = strict_interpolate(a, &pairs, tol)?;
        max_residual = max_residual.max(sol.residual);
    }

    let witness = if k > 1 { Some(obstruction(a, d, tol)?) } else { None };
    Ok(DensityReport { degree: k, witness, max_interpolable: m_max, max_residual, trials, seed })
}

fn obstruction(a: &MatrixAlgebra, d: &DivisionStructure, tol: &Tolerance) -> Result<DensityWitness> {
    let n = a.ambient_dim();
    let w = &d.units[0];
    let x = DVector::from_fn(n, |i, _| if i == 0 { 1.0 } else { 0.0 });
    let wx = w.apply(&x);
    let margin = algebra::min_residual_over_unit_targets(a, &[x.clone(), wx.clone()], 1, tol)?;
    let wnorm = w.spectral_norm();
    let normalized_margin = margin * ((1.0 + wnorm * wnorm) / 2.0).sqrt();
    if normalized_margin <= tol.identity_bound(1.0) {
        return Err(Error::Inconsistent(format!("obstruction margin {margin:.3e} is not positive")));
    }
    Ok(DensityWitness { x, wx, unit: 0, margin, normalized_margin })
}

/// Commutant of the structure units: the largest algebra with the same
/// commutant type. For real type this is all of M_n(R), which is an error
/// unless `allow_real` is set.
pub fn envelope(a: &MatrixAlgebra, d: &DivisionStructure, allow_real: bool, tol: &Tolerance) -> Result<MatrixAlgebra> {
    require_transitive(a, tol)?;
    let n = a.ambient_dim();
    if d.algebra_type == AlgebraType::Real {
        if allow_real {
            return Ok(MatrixAlgebra::full(n));
        }
        return Err(Error::RealTypeInput);
    }
    let basis = commutant_of(&d.units, n, tol)?;
    let env = MatrixAlgebra::from_spanning_set(n, &basis, tol)?;
    let residual = env.containment_residual(a);
    if residual > tol.identity_bound(1.0) {
        return Err(Error::Inconsistent(format!("envelope misses the input (residual {residual:.3e})")));
    }
    Ok(env)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport {
    pub algebra_type: AlgebraType,
    pub commutant_dim: usize,
    pub min_rank: usize,
    pub density: DensityReport,
    pub envelope_dim: usize,
    pub envelope_contains_input: bool,
    pub envelope_residual: f64,
    pub structure: DivisionStructure,
}

impl ClassificationReport {
    pub fn density_degree(&self) -> usize {
        self.density.degree
    }
}

/// Full classification of a transitive algebra.
pub fn classify(a: &MatrixAlgebra, trials: usize, seed: u64, tol: &Tolerance) -> Result<ClassificationReport> {
    let d = division_structure(a, tol)?;
    let r = min_rank(a, &d, tol)?;
    let density = density_degree(a, &d, trials, seed, tol)?;
    let env = envelope(a, &d, true, tol)?;
    let envelope_residual = env.containment_residual(a);
    if r != d.commutant_dim() || density.degree != d.commutant_dim() {
        return Err(Error::Inconsistent(format!(
            "commutant dimension {}, minimal rank {r}, density degree {}",
            d.commutant_dim(),
            density.degree
        )));
    }
    Ok(ClassificationReport {
        algebra_type: d.algebra_type,
        commutant_dim: d.commutant_dim(),
        min_rank: r,
        density,
        envelope_dim: env.dim(),
        envelope_contains_input: envelope_residual <= tol.identity_bound(1.0),
        envelope_residual,
        structure: d,
    })
}

/// Applies `x -> P x P^-1` to every element of a family.
pub fn conjugate_all(mats: &[RealMatrix], p: &RealMatrix) -> Result<Vec<RealMatrix>> {
    let p_inv = p.inverse().ok_or_else(|| Error::Precondition("similarity is singular".into()))?;
    Ok(mats.iter().map(|m| &(p * m) * &p_inv).collect())
}
