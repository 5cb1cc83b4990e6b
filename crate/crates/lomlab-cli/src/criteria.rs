//! The ten acceptance criteria, shared by `lomlab suite` and the
//! `acceptance` test target.

use std::time::Instant;

use lomlab::algebra::{commutant, commutant_of, is_transitive, lift_idempotent, riesz_projection, MatrixAlgebra};
use lomlab::classify::{classify, classify_type, density_degree, division_structure, envelope, DEFAULT_TRIALS};
use lomlab::construct::{
    build_pcs, generic_pair_pcs, group_mean, mean_tensor, pcs_commutant_algebra, rep_commutant_algebra, solve_popolam,
    t_vf, GenericPair, GroupElement, Pcs,
};
use lomlab::division::{embed_complex, embed_quaternion, AlgebraType, Quaternion, QuaternionMatrix};
use lomlab::instance::{InstanceFile, Payload};
use lomlab::numeric::{block_diag, rank_of};
use lomlab::ranges::{check_isomorphism, power_family, Dim, IsoVerdict};
use lomlab::{Error, RealMatrix, Tolerance, Vector};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ops::{build_algebra, build_rep, naive_sum};

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    /// One line: `[PASS] 3 rank divisibility: ...`.
    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        format!("[{tag}] {:>2} {} ({:.2}s): {}", self.id, self.name, self.seconds, self.detail)
    }
}

pub struct Context<'a> {
    pub corpus: &'a [InstanceFile],
    pub seed: u64,
    pub tol: Tolerance,
}

type Outcome = Result<String, String>;

pub const NAMES: [&str; 10] = [
    "type classification",
    "rank consistency",
    "rank divisibility",
    "density obstruction",
    "mean and popolam pipeline",
    "envelope",
    "spectral projection",
    "operator ranges",
    "idempotent lifting",
    "double commutant and similarity invariance",
];

pub fn run(id: u32, ctx: &Context) -> CriterionResult {
    let start = Instant::now();
    let outcome = match id {
        1 => type_classification(ctx),
        2 => rank_consistency(ctx),
        3 => rank_divisibility(ctx),
        4 => density_obstruction(ctx),
        5 => mean_pipeline(ctx),
        6 => envelopes(ctx),
        7 => spectral_projection(ctx),
        8 => operator_ranges(ctx),
        9 => idempotent_lifting(ctx),
        10 => double_commutant(ctx),
        _ => Err(format!("no criterion {id}")),
    };
    let seconds = start.elapsed().as_secs_f64();
    let name = NAMES.get(id.wrapping_sub(1) as usize).copied().unwrap_or("unknown");
    let (passed, mut detail) = match outcome {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    if id == 1 && passed && seconds > 60.0 {
        return CriterionResult { id, name, passed: false, detail: format!("{detail}; took {seconds:.1}s > 60s"), seconds };
    }
    if id == 8 && passed && seconds > 10.0 {
        detail = format!("{detail}; took {seconds:.1}s > 10s");
        return CriterionResult { id, name, passed: false, detail, seconds };
    }
    CriterionResult { id, name, passed, detail, seconds }
}

pub fn run_all(ctx: &Context) -> Vec<CriterionResult> {
    (1..=10).map(|id| run(id, ctx)).collect()
}

fn err(e: Error) -> String {
    format!("{}: {e}", e.kind())
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// `U diag(s) V^T` with `s` geometric from 1 to a log-uniform draw in
/// `[1, max_cond]`.
pub fn random_similarity<R: Rng>(n: usize, max_cond: f64, rng: &mut R) -> RealMatrix {
    let mut orth = || DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0)).qr().q();
    let (u, v) = (orth(), orth());
    let c = max_cond.powf(rng.random_range(0.0..1.0));
    let s = DVector::from_fn(n, |i, _| if n == 1 { 1.0 } else { c.powf(i as f64 / (n - 1) as f64) });
    RealMatrix::new(u * DMatrix::from_diagonal(&s) * v.transpose()).expect("finite similarity")
}

fn unit(n: usize, i: usize, j: usize) -> RealMatrix {
    RealMatrix::new(DMatrix::from_fn(n, n, |r, c| if r == i && c == j { 1.0 } else { 0.0 })).expect("finite")
}

/// A real basis of the embedded `M_n(D)`.
pub fn embedded_basis(ty: AlgebraType, n: usize) -> Vec<RealMatrix> {
    let cells = (0..n).flat_map(|i| (0..n).map(move |j| (i, j)));
    match ty {
        AlgebraType::Real => cells.map(|(i, j)| unit(n, i, j)).collect(),
        AlgebraType::Complex => {
            let zero = RealMatrix::zeros(n, n);
            cells
                .flat_map(|(i, j)| {
                    let e = unit(n, i, j);
                    [embed_complex(&e, &zero), embed_complex(&zero, &e)]
                })
                .collect::<Result<_, _>>()
                .expect("square parts")
        }
        AlgebraType::Quaternion => cells
            .flat_map(|(i, j)| {
                [Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K].map(|q| {
                    let mut entries = vec![Quaternion::ZERO; n * n];
                    entries[i * n + j] = q;
                    embed_quaternion(&QuaternionMatrix::new(n, entries).expect("n > 0"))
                })
            })
            .collect(),
    }
}

pub struct CorpusAlgebra {
    pub name: String,
    pub algebra: MatrixAlgebra,
    pub expected: Option<AlgebraType>,
    pub seed: u64,
    pub tol: Tolerance,
}

fn pcs_of(inst: &InstanceFile, tol: &Tolerance) -> Result<Option<Pcs>, Error> {
    match &inst.payload {
        Payload::Pcs(spec) => Ok(Some(build_pcs(&spec.schedule)?)),
        Payload::Pair(spec) => {
            let pair = GenericPair::new(spec.m_basis.to_matrix()?, spec.n_basis.to_matrix()?)?;
            Ok(Some(generic_pair_pcs(&pair, &spec.unit.to_matrix()?, tol)?.pcs))
        }
        _ => Ok(None),
    }
}

fn expects_success(inst: &InstanceFile) -> bool {
    inst.expect.as_ref().is_none_or(|e| e.error.is_none() && e.transitive != Some(false))
}

/// Transitive algebras of the corpus: the algebra instances plus the
/// commutants of every construction.
pub fn corpus_algebras(corpus: &[InstanceFile]) -> Result<Vec<CorpusAlgebra>, String> {
    let mut out = Vec::new();
    for inst in corpus.iter().filter(|i| expects_success(i)) {
        let tol = inst.tolerance();
        let wrap = |e: Error| format!("{}: {}", inst.name, err(e));
        let algebra = match &inst.payload {
            Payload::Algebra(spec) => build_algebra(spec, &tol).map_err(wrap)?,
            Payload::Pcs(_) | Payload::Pair(_) => {
                let s = pcs_of(inst, &tol).map_err(wrap)?.expect("pcs payload");
                pcs_commutant_algebra(&s, &tol).map_err(wrap)?
            }
            Payload::Rep(_) => rep_commutant_algebra(&build_rep(inst, &tol).map_err(wrap)?, &tol).map_err(wrap)?,
            Payload::Ranges(_) => continue,
        };
        let expected = match &inst.payload {
            Payload::Pair(_) => Some(AlgebraType::Complex),
            _ => inst.expect.as_ref().and_then(|e| e.algebra_type),
        };
        out.push(CorpusAlgebra { name: inst.name.clone(), algebra, expected, seed: inst.seed(), tol });
    }
    Ok(out)
}

fn typed(corpus: &[InstanceFile], types: &[AlgebraType]) -> Result<Vec<CorpusAlgebra>, String> {
    Ok(corpus_algebras(corpus)?
        .into_iter()
        .filter(|c| c.expected.is_some_and(|t| types.contains(&t)))
        .collect())
}

fn type_classification(ctx: &Context) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let plan = [
        (AlgebraType::Real, 2..=10usize),
        (AlgebraType::Complex, 1..=6),
        (AlgebraType::Quaternion, 1..=4),
    ];
    let mut correct = 0;
    let mut total = 0;
    for (ty, sizes) in plan {
        for trial in 0..50 {
            total += 1;
            let n = rng.random_range(sizes.clone());
            let basis = embedded_basis(ty, n);
            let dim = basis[0].rows();
            let p = random_similarity(dim, 1e3, &mut rng);
            let conj = lomlab::classify::conjugate_all(&basis, &p).map_err(err)?;
            let a = MatrixAlgebra::from_spanning_set(dim, &conj, &ctx.tol).map_err(err)?;
            let got = classify_type(&a, &ctx.tol).map_err(|e| format!("{ty} n={n} trial {trial}: {}", err(e)))?;
            let k = commutant(&a, &ctx.tol).len();
            check(got == ty && k == ty.commutant_dim(), || {
                format!("{ty} n={n} trial {trial}: classified {got}, commutant dimension {k}")
            })?;
            correct += 1;
        }
    }
    Ok(format!("{correct}/{total} planted types recovered"))
}

fn rank_consistency(ctx: &Context) -> Outcome {
    let algebras = corpus_algebras(ctx.corpus)?;
    let mut lines = Vec::new();
    for c in &algebras {
        let r = classify(&c.algebra, DEFAULT_TRIALS, ctx.seed, &c.tol).map_err(|e| format!("{}: {}", c.name, err(e)))?;
        let ints = (r.min_rank, r.commutant_dim, r.density_degree());
        check(ints.0 == ints.1 && ints.1 == ints.2, || format!("{}: (min_rank, commutant, density) = {ints:?}", c.name))?;
        if let Some(t) = c.expected {
            check(t == r.algebra_type, || format!("{}: expected {t}, got {}", c.name, r.algebra_type))?;
        }
        lines.push(format!("{}={}", c.name, ints.0));
    }
    Ok(format!("{} algebras agree: {}", algebras.len(), lines.join(" ")))
}

/// `X^2 - 2 Re(mu) X + |mu|^2 I` for an eigenvalue `mu` of `X`: an element
/// of the algebra with a nontrivial kernel.
fn singular_element(x: &RealMatrix) -> RealMatrix {
    let eig = x.as_matrix().complex_eigenvalues();
    let mu = eig.iter().copied().fold(Complex64::new(0.0, 0.0), |best, z| if z.im > best.im { z } else { best });
    let n = x.rows();
    let x2 = x * x;
    &(&x2 - &x.scale(2.0 * mu.re)) + &RealMatrix::identity(n).scale(mu.norm_sqr())
}

fn rank_divisibility(ctx: &Context) -> Outcome {
    let algebras = typed(ctx.corpus, &[AlgebraType::Complex, AlgebraType::Quaternion])?;
    check(!algebras.is_empty(), || "no complex or quaternion corpus algebras".into())?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut samples = 0;
    let mut deficient = 0;
    for c in &algebras {
        let tol = Tolerance::new(1e-9, c.tol.abs_eps).map_err(err)?;
        let k = c.expected.expect("typed").commutant_dim();
        for i in 0..200 {
            let x = c.algebra.random_element(&mut rng);
            let x = if i % 2 == 1 { singular_element(&x) } else { x };
            let r = rank_of(&x, &tol).map_err(err)?;
            check(r % k == 0, || format!("{}: element {i} has rank {r}, not divisible by {k}", c.name))?;
            samples += 1;
            if r < c.algebra.ambient_dim() {
                deficient += 1;
            }
        }
    }
    Ok(format!(
        "{samples} elements over {} algebras, {deficient} rank-deficient, no violations",
        algebras.len()
    ))
}

fn density_obstruction(ctx: &Context) -> Outcome {
    let algebras = typed(ctx.corpus, &[AlgebraType::Complex])?;
    check(!algebras.is_empty(), || "no complex corpus algebras".into())?;
    let mut worst_margin = f64::INFINITY;
    let mut worst_residual = 0.0f64;
    for c in &algebras {
        let wrap = |e: Error| format!("{}: {}", c.name, err(e));
        let d = division_structure(&c.algebra, &c.tol).map_err(wrap)?;
        let rep = density_degree(&c.algebra, &d, 25, ctx.seed, &c.tol).map_err(wrap)?;
        let w = rep.witness.as_ref().ok_or_else(|| format!("{}: no witness", c.name))?;
        check(rep.degree == 2, || format!("{}: density degree {}", c.name, rep.degree))?;
        check(w.normalized_margin >= 0.1, || format!("{}: normalized margin {:.3e}", c.name, w.normalized_margin))?;
        check(rep.max_residual <= 1e-9, || format!("{}: trial residual {:.3e}", c.name, rep.max_residual))?;
        worst_margin = worst_margin.min(w.normalized_margin);
        worst_residual = worst_residual.max(rep.max_residual);
    }
    Ok(format!(
        "{} algebras, min normalized margin {worst_margin:.3}, max trial residual {worst_residual:.2e}",
        algebras.len()
    ))
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
}

fn commutator_norm(a: &RealMatrix, b: &RealMatrix) -> f64 {
    (&(a * b) - &(b * a)).frobenius_norm()
}

fn mean_pipeline(ctx: &Context) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let (mut reps, mut pcss) = (0, 0);
    let (mut worst_interp, mut worst_mean, mut worst_tvf) = (0.0f64, 0.0f64, 0.0f64);
    for inst in ctx.corpus.iter().filter(|i| expects_success(i)) {
        let tol = inst.tolerance();
        let wrap = |e: Error| format!("{}: {}", inst.name, err(e));
        if let Payload::Rep(_) = inst.payload {
            reps += 1;
            let rep = build_rep(inst, &tol).map_err(wrap)?;
            let n = rep.dim();
            for _ in 0..50 {
                let x = random_vector(&mut rng, n);
                let y = random_vector(&mut rng, n);
                let f = solve_popolam(&x, &rep, &tol).map_err(wrap)?;
                let t = mean_tensor(&y, &f, &rep).map_err(wrap)?;
                let r = (t.apply(&x) - &y).norm();
                check(r <= 1e-9, || format!("{}: |T x - y| = {r:.3e}", inst.name))?;
                worst_interp = worst_interp.max(r);
            }
            let k = RealMatrix::new(DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0))).map_err(err)?;
            let mean = group_mean(&k, &rep).map_err(wrap)?;
            for g in GroupElement::ALL {
                let r = commutator_norm(rep.get(g), &mean);
                check(r <= 1e-10, || format!("{}: mean fails to commute with {g:?} ({r:.3e})", inst.name))?;
                worst_mean = worst_mean.max(r);
            }
        }
        if let Some(s) = pcs_of(inst, &tol).map_err(wrap)? {
            pcss += 1;
            for _ in 0..10 {
                let v = random_vector(&mut rng, s.dim());
                let f = random_vector(&mut rng, s.dim());
                let t = t_vf(&v, &f, &s).map_err(wrap)?;
                let rank = rank_of(&t, &tol).map_err(wrap)?;
                let r = commutator_norm(&t, s.matrix());
                check(rank == 2, || format!("{}: t_vf has rank {rank}", inst.name))?;
                check(r <= 1e-10, || format!("{}: t_vf commutation residual {r:.3e}", inst.name))?;
                worst_tvf = worst_tvf.max(r);
            }
        }
    }
    check(reps > 0 && pcss > 0, || "corpus lacks representations or partial complex structures".into())?;
    Ok(format!(
        "{reps} reps, {pcss} structures; max |Tx-y| {worst_interp:.2e}, mean commutation {worst_mean:.2e}, t_vf commutation {worst_tvf:.2e}"
    ))
}

fn envelopes(ctx: &Context) -> Outcome {
    let algebras = typed(ctx.corpus, &[AlgebraType::Complex, AlgebraType::Quaternion])?;
    check(!algebras.is_empty(), || "no complex or quaternion corpus algebras".into())?;
    let mut worst = 0.0f64;
    for c in &algebras {
        let wrap = |e: Error| format!("{}: {}", c.name, err(e));
        let ty = c.expected.expect("typed");
        let n = c.algebra.ambient_dim();
        let d = division_structure(&c.algebra, &c.tol).map_err(wrap)?;
        let env = envelope(&c.algebra, &d, false, &c.tol).map_err(wrap)?;
        let r = env.containment_residual(&c.algebra);
        check(r <= 1e-8, || format!("{}: envelope misses the input by {r:.3e}", c.name))?;
        let want = n * n / ty.commutant_dim();
        check(env.dim() == want, || format!("{}: envelope dimension {}, expected {want}", c.name, env.dim()))?;
        let got = classify_type(&env, &c.tol).map_err(wrap)?;
        check(got == ty, || format!("{}: envelope classifies as {got}", c.name))?;
        worst = worst.max(r);
    }
    Ok(format!("{} algebras, max containment residual {worst:.2e}", algebras.len()))
}

/// `V B V^-1` with `B` block upper triangular: the cluster block first,
/// eigenvalues of modulus at most 1.2 after it.
fn planted_matrix(rng: &mut ChaCha8Rng) -> (RealMatrix, Complex64, usize) {
    let sign = |rng: &mut ChaCha8Rng| if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let mut blocks = Vec::new();
    let cluster = if rng.random_bool(0.5) {
        let l = sign(rng) * rng.random_range(2.0..3.0);
        blocks.push(RealMatrix::from_rows(&[&[l]]).expect("finite"));
        Complex64::new(l, 0.0)
    } else {
        let a = sign(rng) * rng.random_range(2.0..3.0);
        let b = rng.random_range(0.5..1.5);
        blocks.push(RealMatrix::from_rows(&[&[a, -b], &[b, a]]).expect("finite"));
        Complex64::new(a, b)
    };
    let cluster_size = blocks[0].rows();
    let mut used = cluster_size;
    while used < 6 {
        if used + 2 <= 6 && rng.random_bool(0.5) {
            let r = rng.random_range(0.3..1.2);
            let th = rng.random_range(0.2..3.0);
            let (a, b) = (r * f64::cos(th), r * f64::sin(th));
            blocks.push(RealMatrix::from_rows(&[&[a, -b], &[b, a]]).expect("finite"));
            used += 2;
        } else {
            let l = sign(rng) * rng.random_range(0.3..1.2);
            blocks.push(RealMatrix::from_rows(&[&[l]]).expect("finite"));
            used += 1;
        }
    }
    let mut b = block_diag(&blocks).into_matrix();
    let mut start = 0;
    for blk in &blocks {
        let end = start + blk.rows();
        for i in start..end {
            for j in end..6 {
                b[(i, j)] = 0.3 * rng.random_range(-1.0..1.0);
            }
        }
        start = end;
    }
    let v = random_similarity(6, 10.0, rng);
    let v_inv = v.inverse().expect("well conditioned");
    let t = &(&v * &RealMatrix::new(b).expect("finite")) * &v_inv;
    (t, cluster, cluster_size)
}

fn spectral_projection(ctx: &Context) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let (mut idem, mut comm, mut kry) = (0.0f64, 0.0f64, 0.0f64);
    for trial in 0..20 {
        let (t, cluster, size) = planted_matrix(&mut rng);
        let r = riesz_projection(&t, &[cluster], &ctx.tol).map_err(|e| format!("trial {trial}: {}", err(e)))?;
        let p = &r.projection;
        let i = (&(p * p) - p).frobenius_norm();
        let c = commutator_norm(p, &t);
        let rank = rank_of(p, &ctx.tol).map_err(err)?;
        check(i <= 1e-8, || format!("trial {trial}: |P^2 - P| = {i:.3e}"))?;
        check(c <= 1e-8, || format!("trial {trial}: |PT - TP| = {c:.3e}"))?;
        check(r.in_algebra_residual <= 1e-6, || format!("trial {trial}: Krylov residual {:.3e}", r.in_algebra_residual))?;
        check(rank == size, || format!("trial {trial}: projection rank {rank}, cluster size {size}"))?;
        idem = idem.max(i);
        comm = comm.max(c);
        kry = kry.max(r.in_algebra_residual);
    }
    Ok(format!("20 matrices; max |P^2-P| {idem:.2e}, |PT-TP| {comm:.2e}, Krylov residual {kry:.2e}"))
}

fn operator_ranges(ctx: &Context) -> Outcome {
    let wrap = |e: Error| err(e);
    let squares = power_family(2.0, 2100).map_err(wrap)?;
    let cubes = power_family(3.0, 2100).map_err(wrap)?;
    let verdict = check_isomorphism(&squares, &cubes, 20, 2000);
    let IsoVerdict::NonIsomorphic { witness: w, p_max, .. } = verdict else {
        return Err(format!("[k^2] vs [k^3]: {verdict:?}"));
    };
    let (a, b) = match w.direction {
        lomlab::ranges::Direction::HIntoK => (&squares, &cubes),
        lomlab::ranges::Direction::KIntoH => (&cubes, &squares),
    };
    let (n, m, p) = (w.n as i64, w.m as i64, p_max as i64);
    let lhs = naive_sum(a, n, m);
    let rhs = naive_sum(b, n - p, m + p);
    let verified = matches!((lhs, rhs), (Some(l), Some(r)) if l > r);
    check(verified, || format!("witness {w:?} fails independent summation ({lhs:?} vs {rhs:?})"))?;

    let base = power_family(2.0, 600).map_err(wrap)?.with_head(Dim::Finite(0));
    let shifted = base.shifted(3).map_err(wrap)?;
    let v = check_isomorphism(&base, &shifted, 10, 500);
    check(matches!(v, IsoVerdict::Isomorphic { p: 3, .. }), || format!("shift by 3: {v:?}"))?;
    let v = check_isomorphism(&squares, &squares, 10, 2000);
    check(matches!(v, IsoVerdict::Isomorphic { p: 0, .. }), || format!("identical: {v:?}"))?;

    let mut corpus_checked = 0;
    for inst in ctx.corpus {
        let Payload::Ranges(spec) = &inst.payload else { continue };
        let h = spec.h.materialize().map_err(wrap)?;
        let k = spec.k.materialize().map_err(wrap)?;
        let v = check_isomorphism(&h, &k, spec.p_max, spec.horizon);
        if let Some(e) = &inst.expect {
            let name = match v {
                IsoVerdict::Isomorphic { .. } => "Isomorphic",
                IsoVerdict::NonIsomorphic { .. } => "NonIsomorphic",
                IsoVerdict::Undecided { .. } => "Undecided",
            };
            check(e.verdict.as_deref().is_none_or(|x| x == name), || format!("{}: {v:?}", inst.name))?;
            if let (Some(p), IsoVerdict::Isomorphic { p: got, .. }) = (e.p, v) {
                check(p == got, || format!("{}: p = {got}, expected {p}", inst.name))?;
            }
        }
        corpus_checked += 1;
    }
    Ok(format!(
        "witness (n={}, m={}, {:?}) verified: {} > {}; shift gives p=3; identical gives p=0; {corpus_checked} corpus pairs",
        w.n,
        w.m,
        w.direction,
        lhs.expect("finite"),
        rhs.expect("finite")
    ))
}

/// Direct sum of nilpotent Jordan blocks of size at most 3, one of them of
/// size exactly `min(3, n)`.
fn random_nilpotent(rng: &mut ChaCha8Rng, n: usize) -> RealMatrix {
    let mut sizes = vec![n.min(3)];
    let mut used = sizes[0];
    while used < n {
        let s = rng.random_range(1..=3).min(n - used);
        sizes.push(s);
        used += s;
    }
    let blocks: Vec<RealMatrix> = sizes
        .iter()
        .map(|&s| RealMatrix::new(DMatrix::from_fn(s, s, |i, j| if j == i + 1 { 1.0 } else { 0.0 })).expect("finite"))
        .collect();
    block_diag(&blocks)
}

fn idempotent_lifting(ctx: &Context) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut worst = 0.0f64;
    let mut max_iters = 0;
    for trial in 0..20 {
        let n = rng.random_range(2..=8usize);
        let p = random_similarity(n, 10.0, &mut rng);
        let p_inv = p.inverse().expect("well conditioned");
        let n0 = random_nilpotent(&mut rng, n);
        let nil = &(&p * &n0) * &p_inv;
        let nil2 = &(&p * &(&n0 * &n0)) * &p_inv;
        let id = RealMatrix::identity(n);
        let c = MatrixAlgebra::from_spanning_set(n, &[id.clone(), nil.clone(), nil2.clone()], &ctx.tol).map_err(err)?;
        let ideal = [nil.clone(), nil2.clone()];
        let (a, b) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let lifts_to_identity = rng.random_bool(0.5);
        let mut w = &nil.scale(a) + &nil2.scale(b);
        if lifts_to_identity {
            w = &w + &id;
        }
        let lifted = lift_idempotent(&c, &ideal, &w, &ctx.tol).map_err(|e| format!("trial {trial}: {}", err(e)))?;
        let q = &lifted.projection;
        let defect = (&(q * q) - q).frobenius_norm();
        let bound = (n as f64).log2().ceil() as usize + 2;
        check(lifted.iterations <= bound, || format!("trial {trial}: {} iterations > {bound}", lifted.iterations))?;
        check(defect <= 1e-9, || format!("trial {trial}: |P^2 - P| = {defect:.3e}"))?;
        let ideal_span = MatrixAlgebra::from_spanning_set(n, &ideal, &ctx.tol).map_err(err)?;
        let drift = ideal_span.expansion_residual(&(q - &w));
        check(drift <= 1e-8, || format!("trial {trial}: P - W leaves the ideal by {drift:.3e}"))?;
        let target = if lifts_to_identity { id } else { RealMatrix::zeros(n, n) };
        let miss = (q - &target).frobenius_norm();
        check(miss <= 1e-8, || format!("trial {trial}: lift misses the expected idempotent by {miss:.3e}"))?;
        worst = worst.max(defect);
        max_iters = max_iters.max(lifted.iterations);
    }
    Ok(format!("20 algebras; max |P^2-P| {worst:.2e}, at most {max_iters} iterations"))
}

fn classification_integers(a: &MatrixAlgebra, seed: u64, tol: &Tolerance) -> Result<[usize; 5], Error> {
    let tr = is_transitive(a, tol, lomlab::algebra::DEFAULT_PROBES, seed)?;
    let r = classify(a, DEFAULT_TRIALS, seed, tol)?;
    Ok([usize::from(tr.transitive), a.dim(), r.commutant_dim, r.min_rank, r.density_degree()])
}

fn double_commutant(ctx: &Context) -> Outcome {
    let algebras = corpus_algebras(ctx.corpus)?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let span_tol = Tolerance::new(1e-8, 0.0).map_err(err)?;
    let mut worst = 0.0f64;
    for c in &algebras {
        let wrap = |e: Error| format!("{}: {}", c.name, err(e));
        let n = c.algebra.ambient_dim();
        let comm = commutant(&c.algebra, &c.tol);
        let dc = commutant_of(&comm, n, &c.tol).map_err(wrap)?;
        let dc = MatrixAlgebra::from_spanning_set(n, &dc, &c.tol).map_err(wrap)?;
        let r = c.algebra.containment_residual(&dc).max(dc.containment_residual(&c.algebra));
        check(dc.dim() == c.algebra.dim(), || format!("{}: A'' has dimension {}, A has {}", c.name, dc.dim(), c.algebra.dim()))?;
        check(r <= 1e-8 && dc.same_span(&c.algebra, &span_tol), || format!("{}: span residual {r:.3e}", c.name))?;
        worst = worst.max(r);

        let p = random_similarity(n, 1e3, &mut rng);
        let conj = c.algebra.conjugate(&p, &c.tol).map_err(wrap)?;
        let before = classification_integers(&c.algebra, c.seed, &c.tol).map_err(wrap)?;
        let after = classification_integers(&conj, c.seed, &c.tol).map_err(wrap)?;
        check(before == after, || format!("{}: integers {before:?} become {after:?} under similarity", c.name))?;
    }
    Ok(format!("{} algebras; max span residual {worst:.2e}; integers similarity invariant", algebras.len()))
}
