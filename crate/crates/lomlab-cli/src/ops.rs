//! The three single-file operations and the report envelope around them.

use std::time::Instant;

use lomlab::algebra::{self, commutant, commutant_of, generate_algebra, is_transitive, MatrixAlgebra};
use lomlab::classify::{self, classify_type, conjugate_all, DEFAULT_TRIALS};
use lomlab::construct::{
    self, build_pcs, build_quaternion_rep, generic_pair_pcs, group_mean, mean_tensor, pcs_commutant_algebra,
    rep_commutant_algebra, solve_popolam, t_vf, GenericPair, GroupElement, GroupRep, Pcs,
};
use lomlab::instance::{AlgebraSpec, Expectation, InstanceFile, MatrixSpec, Payload, RangesSpec};
use lomlab::numeric::rank_of;
use lomlab::ranges::{check_isomorphism, Dim, DimSequence, Direction, IsoVerdict, Sum};
use lomlab::{Error, RealMatrix, Tolerance, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::report;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operation {
    Classify,
    Construct,
    Ranges,
}

impl Operation {
    pub fn name(self) -> &'static str {
        match self {
            Operation::Classify => "classify",
            Operation::Construct => "construct",
            Operation::Ranges => "ranges",
        }
    }

    /// The operation the suite runs on an instance of this kind.
    pub fn for_kind(kind: &str) -> Operation {
        match kind {
            "algebra" => Operation::Classify,
            "ranges" => Operation::Ranges,
            _ => Operation::Construct,
        }
    }

    fn accepts(self, kind: &str) -> bool {
        match self {
            Operation::Classify => kind == "algebra",
            Operation::Construct => matches!(kind, "pcs" | "rep" | "pair"),
            Operation::Ranges => kind == "ranges",
        }
    }
}

/// A library error plus whatever partial data explains it.
#[derive(Debug, Clone)]
pub struct Failure {
    pub error: Error,
    pub details: Option<Value>,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure { error, details: None }
    }
}

impl Failure {
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("kind".into(), json!(self.error.kind()));
        m.insert("message".into(), json!(self.error.to_string()));
        if let Some(d) = &self.details {
            m.insert("details".into(), d.clone());
        }
        Value::Object(m)
    }

    pub fn exit_code(&self) -> i32 {
        crate::exit::for_error(&self.error)
    }
}

/// Runs `op` on a parsed instance.
pub fn run(op: Operation, inst: &InstanceFile) -> Result<Value, Failure> {
    let kind = inst.payload.kind();
    if !op.accepts(kind) {
        return Err(Error::Parse(format!("{} does not accept instances of kind {kind}", op.name())).into());
    }
    inst.validate()?;
    let tol = inst.tolerance();
    let seed = inst.seed();
    match &inst.payload {
        Payload::Algebra(spec) => run_classify(spec, seed, &tol),
        Payload::Pcs(spec) => run_pcs(&spec.schedule, seed, &tol),
        Payload::Rep(_) => run_rep(inst, seed, &tol),
        Payload::Pair(spec) => {
            let pair = GenericPair::new(spec.m_basis.to_matrix()?, spec.n_basis.to_matrix()?)?;
            run_pair(&pair, &spec.unit.to_matrix()?, seed, &tol)
        }
        Payload::Ranges(spec) => run_ranges(spec),
    }
}

/// A full report: identity, inputs, outcome and timing.
pub struct Report {
    pub value: Value,
    pub exit_code: i32,
}

/// Parses `bytes` and runs `op`, always producing a report.
pub fn report(op: Operation, bytes: &[u8]) -> Report {
    let start = Instant::now();
    let hash = report::sha256_hex(bytes);
    let parsed = std::str::from_utf8(bytes)
        .map_err(|e| Error::Parse(format!("input is not UTF-8: {e}")))
        .and_then(lomlab::instance::parse_instance);
    let mut out = Map::new();
    out.insert("operation".into(), json!(op.name()));
    let (outcome, exit_code) = match parsed {
        Err(e) => {
            out.insert("instance".into(), json!({ "sha256": hash }));
            let f = Failure::from(e);
            let code = f.exit_code();
            (Err(f), code)
        }
        Ok(inst) => {
            let inst = inst.with_defaults();
            out.insert(
                "instance".into(),
                json!({ "name": inst.name, "kind": inst.payload.kind(), "sha256": hash }),
            );
            out.insert("seed".into(), json!(inst.seed()));
            out.insert("tolerance".into(), serde_json::to_value(inst.tolerance()).expect("tolerance"));
            out.insert("input".into(), serde_json::to_value(&inst).expect("instance is serializable"));
            let outcome = run(op, &inst);
            let code = match &outcome {
                Ok(_) => crate::exit::OK,
                Err(f) => f.exit_code(),
            };
            (outcome, code)
        }
    };
    let body = match outcome {
        Ok(result) => {
            out.insert("status".into(), json!("ok"));
            result
        }
        Err(f) => {
            out.insert("status".into(), json!("error"));
            f.to_json()
        }
    };
    out.insert("result_sha256".into(), json!(report::value_hash(&body)));
    let key = if exit_code == crate::exit::OK { "result" } else { "error" };
    out.insert(key.into(), body);
    out.insert("wall_time_ms".into(), json!(start.elapsed().as_secs_f64() * 1e3));
    Report { value: Value::Object(out), exit_code }
}

pub fn build_algebra(spec: &AlgebraSpec, tol: &Tolerance) -> Result<MatrixAlgebra, Error> {
    let mut gens = spec.generators.iter().map(MatrixSpec::to_matrix).collect::<Result<Vec<_>, _>>()?;
    if let Some(p) = &spec.similarity {
        gens = conjugate_all(&gens, &p.to_matrix()?)?;
    }
    generate_algebra(&gens, spec.include_identity, tol)
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> RealMatrix {
    let data: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
    RealMatrix::from_row_major(n, n, &data).expect("finite entries")
}

fn commutator_norm(a: &RealMatrix, b: &RealMatrix) -> f64 {
    (&(a * b) - &(b * a)).frobenius_norm()
}

fn run_classify(spec: &AlgebraSpec, seed: u64, tol: &Tolerance) -> Result<Value, Failure> {
    let a = build_algebra(spec, tol)?;
    let tr = is_transitive(&a, tol, algebra::DEFAULT_PROBES, seed)?;
    if !tr.transitive {
        let details = tr.witness.as_ref().map(|w| {
            json!({
                "certificate": tr.certificate,
                "algebra_dim": a.dim(),
                "vector": report::vector(&w.vector),
                "subspace_dim": w.basis.len(),
                "subspace_basis": w.basis.iter().map(report::vector).collect::<Vec<_>>(),
                "invariance_residual": algebra::invariance_residual(&a, &w.basis),
            })
        });
        let dim = tr.witness.as_ref().map_or(0, |w| w.basis.len());
        return Err(Failure {
            error: Error::NotTransitive(format!("invariant subspace of dimension {dim}")),
            details,
        });
    }
    let c = classify::classify(&a, DEFAULT_TRIALS, seed, tol)?;
    let comm = commutant(&a, tol);
    let double = MatrixAlgebra::from_spanning_set(a.ambient_dim(), &commutant_of(&comm, a.ambient_dim(), tol)?, tol)?;
    let witness = c.density.witness.as_ref().map(|w| {
        json!({
            "x": report::vector(&w.x),
            "wx": report::vector(&w.wx),
            "unit": w.unit,
            "margin": w.margin,
            "normalized_margin": w.normalized_margin,
        })
    });
    Ok(json!({
        "ambient_dim": a.ambient_dim(),
        "algebra_dim": a.dim(),
        "unital": a.is_unital(),
        "closure_defect": a.closure_defect(),
        "transitivity": { "transitive": true, "certificate": tr.certificate, "probes": tr.probes },
        "algebra_type": c.algebra_type,
        "commutant_dim": c.commutant_dim,
        "min_rank": c.min_rank,
        "density_degree": c.density_degree(),
        "density": {
            "max_interpolable": c.density.max_interpolable,
            "max_residual": c.density.max_residual,
            "trials": c.density.trials,
            "witness": witness,
        },
        "structure": {
            "units": report::matrices(&c.structure.units),
            "relation_residual": c.structure.relation_residual(),
        },
        "envelope": {
            "dim": c.envelope_dim,
            "contains_input": c.envelope_contains_input,
            "residual": c.envelope_residual,
        },
        "double_commutant": {
            "dim": double.dim(),
            "same_span": double.same_span(&a, tol),
        },
    }))
}

fn commutant_summary(c: &MatrixAlgebra, tol: &Tolerance) -> Result<Value, Error> {
    let ty = classify_type(c, tol)?;
    Ok(json!({ "dim": c.dim(), "algebra_type": ty }))
}

fn pcs_checks(s: &Pcs, seed: u64, tol: &Tolerance) -> Result<Value, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = s.dim();
    let v = random_vector(&mut rng, n);
    let f = random_vector(&mut rng, n);
    let t = t_vf(&v, &f, s)?;
    Ok(json!({
        "rank": rank_of(&t, tol)?,
        "commutation_residual": commutator_norm(&t, s.matrix()),
    }))
}

fn run_pcs(schedule: &[f64], seed: u64, tol: &Tolerance) -> Result<Value, Failure> {
    let s = build_pcs(schedule)?;
    let comm = pcs_commutant_algebra(&s, tol)?;
    let n = s.dim();
    Ok(json!({
        "construction": "pcs",
        "dim": n,
        "block_dims": s.block_dims(),
        "schedule": s.schedule(),
        "s": report::matrix(s.matrix()),
        "s_norm": s.matrix().spectral_norm(),
        "anti_involution_residual": s.anti_involution_residual(),
        "commutant": commutant_summary(&comm, tol)?,
        "expected_commutant_dim": n * n / 2,
        "t_vf": pcs_checks(&s, seed, tol)?,
    }))
}

fn run_pair(pair: &GenericPair, unit: &RealMatrix, seed: u64, tol: &Tolerance) -> Result<Value, Failure> {
    let built = generic_pair_pcs(pair, unit, tol)?;
    let swapped = generic_pair_pcs(&pair.swapped(), unit, tol)?;
    let s = &built.pcs;
    let comm = pcs_commutant_algebra(s, tol)?;
    let n = s.dim();
    Ok(json!({
        "construction": "pair",
        "dim": n,
        "s": report::matrix(s.matrix()),
        "condition": built.condition,
        "anti_involution_residual": s.anti_involution_residual(),
        "swap_residual": (s.matrix() + swapped.pcs.matrix()).frobenius_norm(),
        "commutant": commutant_summary(&comm, tol)?,
        "expected_commutant_dim": n * n / 2,
        "t_vf": pcs_checks(s, seed, tol)?,
    }))
}

pub fn build_rep(inst: &InstanceFile, tol: &Tolerance) -> Result<GroupRep, Error> {
    let Payload::Rep(spec) = &inst.payload else {
        return Err(Error::Parse("not a representation instance".into()));
    };
    let twists = spec.twists.iter().map(MatrixSpec::to_matrix).collect::<Result<Vec<_>, _>>()?;
    let tau = build_quaternion_rep(&twists, tol)?;
    match &spec.twisted {
        None => Ok(tau),
        Some(tw) => {
            let pair = GenericPair::new(tw.m_basis.to_matrix()?, tw.n_basis.to_matrix()?)?;
            construct::twisted_rep(&pair, &tau, tw.twist_by, tol)
        }
    }
}

fn element_name(g: GroupElement) -> String {
    serde_json::to_value(g)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .expect("group elements serialize as strings")
}

fn run_rep(inst: &InstanceFile, seed: u64, tol: &Tolerance) -> Result<Value, Failure> {
    let rep = build_rep(inst, tol)?;
    let n = rep.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mats = Map::new();
    for g in GroupElement::ALL {
        mats.insert(element_name(g), report::matrix(rep.get(g)));
    }

    let x = random_vector(&mut rng, n);
    let y = random_vector(&mut rng, n);
    let f = solve_popolam(&x, &rep, tol)?;
    let t = mean_tensor(&y, &f, &rep)?;
    let k = random_matrix(&mut rng, n);
    let mean = group_mean(&k, &rep)?;
    let mean_commutation =
        GroupElement::ALL.iter().map(|&g| commutator_norm(rep.get(g), &mean)).fold(0.0, f64::max);

    let comm = rep_commutant_algebra(&rep, tol)?;
    Ok(json!({
        "construction": "rep",
        "dim": n,
        "matrices": mats,
        "homomorphism_residual": rep.homomorphism_residual(),
        "max_norm": rep.max_norm(),
        "commutant": commutant_summary(&comm, tol)?,
        "popolam": {
            "x": report::vector(&x),
            "y": report::vector(&y),
            "f": report::vector(&f),
            "interpolation_residual": (t.apply(&x) - &y).norm(),
        },
        "mean_commutation_residual": mean_commutation,
    }))
}

/// `sum_{lo}^{hi} seq`, summed term by term; `None` if a term is infinite.
/// Indices below zero contribute nothing.
pub fn naive_sum(seq: &DimSequence, lo: i64, hi: i64) -> Option<u128> {
    let mut total: u128 = 0;
    for k in lo.max(0)..=hi {
        match seq.dims()[k as usize] {
            Dim::Finite(v) => total += u128::from(v),
            Dim::Infinite => return None,
        }
    }
    Some(total)
}

fn sum_json(s: Sum) -> Value {
    match s {
        Sum::Finite(v) => json!(v.to_string()),
        Sum::Infinite => json!("inf"),
    }
}

fn run_ranges(spec: &RangesSpec) -> Result<Value, Failure> {
    let h = spec.h.materialize()?;
    let k = spec.k.materialize()?;
    let verdict = check_isomorphism(&h, &k, spec.p_max, spec.horizon);
    let mut out = json!({
        "verdict": verdict,
        "h_len": h.dims().len(),
        "k_len": k.dims().len(),
    });
    if let IsoVerdict::NonIsomorphic { witness: w, p_max, .. } = verdict {
        let (a, b) = match w.direction {
            Direction::HIntoK => (&h, &k),
            Direction::KIntoH => (&k, &h),
        };
        let (n, m, p) = (w.n as i64, w.m as i64, p_max as i64);
        let lhs = naive_sum(a, n, m);
        let rhs = naive_sum(b, n - p, m + p);
        let verified = match (lhs, rhs) {
            (Some(l), Some(r)) => l > r && w.lhs == Sum::Finite(l) && w.rhs == Sum::Finite(r),
            _ => false,
        };
        out["witness_check"] = json!({
            "lhs": sum_json(w.lhs),
            "rhs": sum_json(w.rhs),
            "independently_verified": verified,
        });
    }
    Ok(out)
}

/// Instance file for the commutant of a constructed object, so it can be
/// fed back to `classify`.
pub fn commutant_instance(inst: &InstanceFile) -> Result<InstanceFile, Failure> {
    let tol = inst.tolerance();
    let comm = match &inst.payload {
        Payload::Pcs(spec) => pcs_commutant_algebra(&build_pcs(&spec.schedule)?, &tol)?,
        Payload::Pair(spec) => {
            let pair = GenericPair::new(spec.m_basis.to_matrix()?, spec.n_basis.to_matrix()?)?;
            pcs_commutant_algebra(&generic_pair_pcs(&pair, &spec.unit.to_matrix()?, &tol)?.pcs, &tol)?
        }
        Payload::Rep(_) => rep_commutant_algebra(&build_rep(inst, &tol)?, &tol)?,
        _ => return Err(Error::Parse("only pcs, rep and pair instances have a commutant to emit".into()).into()),
    };
    let ty = classify_type(&comm, &tol)?;
    Ok(InstanceFile {
        name: format!("{}_commutant", inst.name),
        description: Some(format!("commutant of {}", inst.name)),
        seed: Some(inst.seed()),
        tolerance: Some(tol),
        payload: Payload::Algebra(AlgebraSpec {
            generators: comm.basis().iter().map(MatrixSpec::from_matrix).collect(),
            include_identity: false,
            similarity: None,
        }),
        expect: Some(Expectation {
            algebra_type: Some(ty),
            transitive: Some(true),
            dim: Some(comm.dim()),
            ..Expectation::default()
        }),
    })
}
