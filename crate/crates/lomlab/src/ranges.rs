//! Dimension sequences of diagonal operator ranges and the isomorphism
//! criterion between them.
//!
//! A sequence `(H_k)` describes the range of `sum_k 2^-k P_{H_k}`. Two such
//! ranges are isomorphic iff for some `p`
//! `sum_{k=n}^{m} dim H_k <= sum_{k=n-p}^{m+p} dim K_k` for all `n < m`,
//! together with the same inequality with `H` and `K` exchanged. Indices
//! below zero carry dimension zero. All sums are exact integers.

use std::fmt;

use num_bigint::BigUint;
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Dimension of one block: a count, or infinite (index 0 only).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    Finite(u64),
    Infinite,
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dim::Finite(d) => write!(f, "{d}"),
            Dim::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Dim {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Dim::Finite(d) => s.serialize_u64(*d),
            Dim::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Dim {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct DimVisitor;
        impl Visitor<'_> for DimVisitor {
            type Value = Dim;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a nonnegative integer or \"inf\"")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Dim, E> {
                Ok(Dim::Finite(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Dim, E> {
                u64::try_from(v).map(Dim::Finite).map_err(|_| E::custom("dimension must be nonnegative"))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Dim, E> {
                if v == "inf" {
                    Ok(Dim::Infinite)
                } else {
                    Err(E::custom(format!("unknown dimension {v:?}")))
                }
            }
        }
        d.deserialize_any(DimVisitor)
    }
}

/// Exact partial sum of dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sum {
    Finite(u128),
    Infinite,
}

impl Sum {
    fn le(self, other: Sum) -> bool {
        match (self, other) {
            (_, Sum::Infinite) => true,
            (Sum::Infinite, Sum::Finite(_)) => false,
            (Sum::Finite(a), Sum::Finite(b)) => a <= b,
        }
    }
}

/// `(dim H_0, dim H_1, ..., dim H_horizon)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimSequence {
    dims: Vec<Dim>,
}

impl DimSequence {
    pub fn new(dims: Vec<Dim>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::ShapeMismatch("a dimension sequence needs at least one entry".into()));
        }
        if let Some(k) = dims.iter().skip(1).position(|d| *d == Dim::Infinite) {
            return Err(Error::ShapeMismatch(format!("only index 0 may be infinite, found inf at {}", k + 1)));
        }
        Ok(DimSequence { dims })
    }

    pub fn from_counts(counts: &[u64]) -> Self {
        DimSequence { dims: counts.iter().map(|&c| Dim::Finite(c)).collect() }
    }

    pub fn dims(&self) -> &[Dim] {
        &self.dims
    }

    /// Largest materialized index.
    pub fn horizon(&self) -> usize {
        self.dims.len() - 1
    }

    /// `dim H_k`, zero for negative `k`.
    pub fn get(&self, k: i64) -> Option<Dim> {
        if k < 0 {
            return Some(Dim::Finite(0));
        }
        self.dims.get(k as usize).copied()
    }

    pub fn with_head(mut self, head: Dim) -> Self {
        self.dims[0] = head;
        self
    }

    /// `K_k = H_{k-s}`: `s` empty blocks prepended. Fails if the head is
    /// infinite, since it would move off index 0.
    pub fn shifted(&self, s: usize) -> Result<Self> {
        if s > 0 && self.dims[0] == Dim::Infinite {
            return Err(Error::ShapeMismatch("cannot shift a sequence with an infinite head".into()));
        }
        let mut dims = vec![Dim::Finite(0); s];
        dims.extend_from_slice(&self.dims);
        Ok(DimSequence { dims })
    }

    /// Exact `sum_{k=lo}^{hi} dim H_k` (requires `hi` materialized).
    pub fn sum(&self, lo: i64, hi: i64) -> Sum {
        let mut total: u128 = 0;
        for k in lo.max(0)..=hi {
            match self.get(k).expect("index within horizon") {
                Dim::Infinite => return Sum::Infinite,
                Dim::Finite(d) => total += d as u128,
            }
        }
        Sum::Finite(total)
    }
}

/// Prefix sums over the finite parts, with the head flag kept aside.
struct Prefix {
    head_infinite: bool,
    cum: Vec<i128>,
}

impl Prefix {
    fn new(seq: &DimSequence) -> Self {
        let mut cum = Vec::with_capacity(seq.dims.len() + 1);
        cum.push(0i128);
        for d in &seq.dims {
            let v = match d {
                Dim::Finite(x) => *x as i128,
                Dim::Infinite => 0,
            };
            cum.push(cum.last().unwrap() + v);
        }
        Prefix { head_infinite: seq.dims[0] == Dim::Infinite, cum }
    }

    fn infinite(&self, lo: i64) -> bool {
        self.head_infinite && lo <= 0
    }
}

/// Which of the two inequalities is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    /// Sums of `H` bounded by widened sums of `K`.
    #[serde(rename = "H<=K")]
    HIntoK,
    /// Sums of `K` bounded by widened sums of `H`.
    #[serde(rename = "K<=H")]
    KIntoH,
}

impl Direction {
    pub fn flipped(self) -> Self {
        match self {
            Direction::HIntoK => Direction::KIntoH,
            Direction::KIntoH => Direction::HIntoK,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub n: u64,
    pub m: u64,
    pub direction: Direction,
    /// Left side at this `(n, m)`.
    pub lhs: Sum,
    /// Right side at `p = p_max`; smaller `p` only shrink it.
    pub rhs: Sum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict")]
pub enum IsoVerdict {
    Isomorphic { p: u64, horizon: u64 },
    NonIsomorphic { witness: Witness, p_max: u64, horizon: u64 },
    Undecided { p_max: u64, horizon: u64 },
}

enum Check {
    Holds { vacuous: bool },
    Violated { n: usize, m: usize },
}

/// Checks `sum_{n}^{m} A <= sum_{n-p}^{m+p} B` for all `0 <= n < m <= h`.
/// For fixed `n` the gap `LHS - RHS` is `D(m) - a(n) + b(n)` with
/// `D(m) = A[..=m] - B[..=m+p]`, so a suffix maximum of `D` finds the worst
/// `m` in linear time overall.
fn check_direction(a: &Prefix, b: &Prefix, p: usize, h: usize) -> Check {
    let d: Vec<i128> = (0..=h).map(|m| a.cum[m + 1] - b.cum[m + p + 1]).collect();
    let mut best_from = vec![(i128::MIN, 0usize); h + 2];
    for m in (0..=h).rev() {
        best_from[m] = if d[m] >= best_from[m + 1].0 { (d[m], m) } else { best_from[m + 1] };
    }
    let mut vacuous = true;
    for n in 0..h {
        let lo = n as i64 - p as i64;
        if b.infinite(lo) {
            continue;
        }
        vacuous = false;
        if a.infinite(n as i64) {
            return Check::Violated { n, m: n + 1 };
        }
        let (gap, m) = best_from[n + 1];
        if gap - a.cum[n] + b.cum[lo.max(0) as usize] > 0 {
            return Check::Violated { n, m };
        }
    }
    Check::Holds { vacuous }
}

/// Searches `p = 0..=p_max` over `0 <= n < m <= horizon`. The horizon is cut
/// back so that every index read (up to `m + p_max`) is materialized.
///
/// Returns the smallest `p` satisfying both inequalities; otherwise a pair
/// violating one of them at `p_max`, hence at every smaller `p` since the
/// right side grows with `p`. When the only admissible `p` satisfies an
/// inequality only because every right side is infinite, the verdict is
/// undecided.
pub fn check_isomorphism(h_seq: &DimSequence, k_seq: &DimSequence, p_max: usize, horizon: usize) -> IsoVerdict {
    let avail = h_seq.horizon().min(k_seq.horizon());
    let h = horizon.min(avail.saturating_sub(p_max));
    let undecided = IsoVerdict::Undecided { p_max: p_max as u64, horizon: h as u64 };
    if h < 1 || avail < p_max {
        return undecided;
    }
    let ph = Prefix::new(h_seq);
    let pk = Prefix::new(k_seq);
    let both = |p: usize| (check_direction(&ph, &pk, p, h), check_direction(&pk, &ph, p, h));

    let witness = |n: usize, m: usize, direction: Direction| {
        let (lhs_seq, rhs_seq) = match direction {
            Direction::HIntoK => (h_seq, k_seq),
            Direction::KIntoH => (k_seq, h_seq),
        };
        let (n, m) = (n as i64, m as i64);
        Witness {
            n: n as u64,
            m: m as u64,
            direction,
            lhs: lhs_seq.sum(n, m),
            rhs: rhs_seq.sum(n - p_max as i64, m + p_max as i64),
        }
    };
    match both(p_max) {
        (Check::Violated { n, m }, _) => {
            return IsoVerdict::NonIsomorphic { witness: witness(n, m, Direction::HIntoK), p_max: p_max as u64, horizon: h as u64 }
        }
        (_, Check::Violated { n, m }) => {
            return IsoVerdict::NonIsomorphic { witness: witness(n, m, Direction::KIntoH), p_max: p_max as u64, horizon: h as u64 }
        }
        _ => {}
    }
    for p in 0..=p_max {
        if let (Check::Holds { vacuous: v1 }, Check::Holds { vacuous: v2 }) = both(p) {
            if v1 || v2 {
                return undecided;
            }
            return IsoVerdict::Isomorphic { p: p as u64, horizon: h as u64 };
        }
    }
    unreachable!("p_max satisfies both inequalities")
}

/// Re-checks a witness by direct summation for every `p <= p_max`.
pub fn witness_holds(h_seq: &DimSequence, k_seq: &DimSequence, w: &Witness, p_max: usize) -> bool {
    let (a, b) = match w.direction {
        Direction::HIntoK => (h_seq, k_seq),
        Direction::KIntoH => (k_seq, h_seq),
    };
    let (n, m) = (w.n as i64, w.m as i64);
    if n >= m || m as usize > a.horizon() || m as usize + p_max > b.horizon() {
        return false;
    }
    (0..=p_max as i64).all(|p| !a.sum(n, m).le(b.sum(n - p, m + p)))
}

/// `[(2^-k, dim H_k)]`: the diagonal of the operator whose range is modeled.
pub fn range_weights(seq: &DimSequence) -> Vec<(f64, Dim)> {
    seq.dims.iter().enumerate().map(|(k, d)| (0.5f64.powi(k as i32), *d)).collect()
}

/// `t = e / q` with `q <= 64`, when `t` is that rational up to roundoff.
fn rational_exponent(t: f64) -> Option<(u32, u32)> {
    (1..=64u32).find_map(|q| {
        let e = (t * q as f64).round();
        ((e / q as f64 - t).abs() <= 1e-12 * t && e <= u32::MAX as f64).then_some((e as u32, q))
    })
}

/// Exact `floor(k^t)`. For rational `t = e/q` this is the largest `c` with
/// `c^q <= k^e`, settled in big integers near the floating estimate.
pub fn floor_power(k: u64, t: f64) -> Result<u64> {
    if k == 0 {
        return Ok(0);
    }
    let x = (k as f64).powf(t);
    if x.is_nan() || x >= (1u64 << 53) as f64 {
        return Err(Error::ValueTooLarge(format!("{k}^{t}")));
    }
    let est = x.floor() as u64;
    let Some((e, q)) = rational_exponent(t) else { return Ok(est) };
    let target = BigUint::from(k).pow(e);
    let fits = |c: u64| BigUint::from(c).pow(q) <= target;
    let mut c = est.saturating_sub(1);
    while fits(c + 1) {
        c += 1;
    }
    while c > 0 && !fits(c) {
        c -= 1;
    }
    Ok(c)
}

/// `dim H_0 = inf`, `dim H_k = floor(k^t)` for `1 <= k <= horizon`.
pub fn power_family(t: f64, horizon: usize) -> Result<DimSequence> {
    if !(t.is_finite() && t > 1.0) {
        return Err(Error::BadExponent(format!("exponent must exceed 1, got {t}")));
    }
    let mut dims = vec![Dim::Infinite];
    for k in 1..=horizon as u64 {
        dims.push(Dim::Finite(floor_power(k, t)?));
    }
    Ok(DimSequence { dims })
}

/// Smallest `m <= horizon` with
/// `sum_{k=p+1}^{m} [k^t] > sum_{k=1}^{m+p} [k^r]`, if any.
pub fn asymptotic_certificate(t: f64, r: f64, p: usize, horizon: usize) -> Result<Option<usize>> {
    if !(r.is_finite() && r > 1.0) {
        return Err(Error::BadExponent(format!("exponent must exceed 1, got {r}")));
    }
    if !(t.is_finite() && t > r) {
        return Err(Error::BadExponent(format!("need t > r, got t = {t}, r = {r}")));
    }
    let mut lhs: u128 = 0;
    let mut rhs: u128 = (1..=p as u64).map(|k| floor_power(k, r).map(u128::from)).sum::<Result<u128>>()?;
    for m in 1..=horizon {
        rhs += floor_power((m + p) as u64, r)? as u128;
        if m > p {
            lhs += floor_power(m as u64, t)? as u128;
        }
        if lhs > rhs {
            return Ok(Some(m));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn squares(horizon: usize) -> DimSequence {
        power_family(2.0, horizon).unwrap().with_head(Dim::Finite(0))
    }

    /// Independent oracle: quadratic scan with direct summation.
    fn brute_holds(a: &DimSequence, b: &DimSequence, p: usize, h: usize) -> bool {
        (0..h as i64).all(|n| (n + 1..=h as i64).all(|m| a.sum(n, m).le(b.sum(n - p as i64, m + p as i64))))
    }

    #[test]
    fn weights_examples() {
        let w = range_weights(&DimSequence::from_counts(&[1, 1]));
        assert_eq!(w, vec![(1.0, Dim::Finite(1)), (0.5, Dim::Finite(1))]);
        let w = range_weights(&DimSequence::from_counts(&[0, 3]));
        assert_eq!(w, vec![(1.0, Dim::Finite(0)), (0.5, Dim::Finite(3))]);
        let seq = DimSequence::new(vec![Dim::Infinite, Dim::Finite(1), Dim::Finite(4)]).unwrap();
        assert_eq!(range_weights(&seq)[0], (1.0, Dim::Infinite));
        assert_eq!(range_weights(&seq)[2], (0.25, Dim::Finite(4)));
        assert!(DimSequence::new(vec![Dim::Finite(1), Dim::Infinite]).is_err());
    }

    #[test]
    fn power_examples() {
        assert_eq!(floor_power(3, 2.0).unwrap(), 9);
        assert_eq!(floor_power(4, 2.5).unwrap(), 32);
        assert_eq!(floor_power(10, 3.0).unwrap(), 1000);
        assert_eq!(floor_power(8, 1.0 / 3.0 + 1.0).unwrap(), 16);
        assert_eq!(floor_power(2, 1.5).unwrap(), 2);
        let fam = power_family(2.0, 5).unwrap();
        assert_eq!(fam.dims()[0], Dim::Infinite);
        assert_eq!(fam.dims()[5], Dim::Finite(25));
        assert!(matches!(power_family(1.0, 5), Err(Error::BadExponent(_))));
        assert!(matches!(floor_power(1 << 20, 3.0), Err(Error::ValueTooLarge(_))));
    }

    #[test]
    fn iso_examples() {
        let h = squares(60);
        assert_eq!(check_isomorphism(&h, &h, 5, 50), IsoVerdict::Isomorphic { p: 0, horizon: 50 });
        let k = h.shifted(3).unwrap();
        assert!(matches!(check_isomorphism(&h, &k, 5, 50), IsoVerdict::Isomorphic { p: 3, .. }));

        let a = power_family(2.0, 2020).unwrap();
        let b = power_family(3.0, 2020).unwrap();
        match check_isomorphism(&a, &b, 20, 2000) {
            IsoVerdict::NonIsomorphic { witness, p_max, .. } => {
                assert_eq!(p_max, 20);
                assert!(witness_holds(&a, &b, &witness, 20));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(check_isomorphism(&a, &b, 20, 3), IsoVerdict::Undecided { .. }));
    }

    #[test]
    fn fast_check_matches_brute_force() {
        let seqs = [
            squares(40),
            squares(40).shifted(2).unwrap(),
            power_family(3.0, 40).unwrap(),
            power_family(1.5, 40).unwrap(),
            DimSequence::from_counts(&[3; 41]),
        ];
        for a in &seqs {
            for b in &seqs {
                for p in 0..4 {
                    let fast = matches!(check_direction(&Prefix::new(a), &Prefix::new(b), p, 30), Check::Holds { .. });
                    assert_eq!(fast, brute_holds(a, b, p, 30));
                }
            }
        }
    }

    #[test]
    fn shift_law_on_squares() {
        let h = squares(520);
        for s in 0..6 {
            let k = h.shifted(s).unwrap();
            assert_eq!(check_isomorphism(&h, &k, 10, 500), IsoVerdict::Isomorphic { p: s as u64, horizon: 500 });
        }
    }

    #[test]
    fn asymptotic_examples() {
        let m0 = asymptotic_certificate(3.0, 2.0, 1, 1000).unwrap().unwrap();
        // oracle: direct partial sums
        let lhs = |m: u64| (2..=m).map(|k| k * k * k).sum::<u64>();
        let rhs = |m: u64| (1..=m + 1).map(|k| k * k).sum::<u64>();
        assert!(lhs(m0 as u64) > rhs(m0 as u64));
        assert!((2..m0 as u64).all(|m| lhs(m) <= rhs(m)));
        assert!(matches!(asymptotic_certificate(2.0, 2.0, 1, 10), Err(Error::BadExponent(_))));
        assert_eq!(asymptotic_certificate(2.2, 2.0, 5, 10).unwrap(), None);
    }

    #[test]
    fn asymptotic_monotone_in_p() {
        let mut last = 0;
        for p in 0..=20 {
            let m0 = asymptotic_certificate(3.0, 2.0, p, 5000).unwrap().expect("violation exists");
            assert!(m0 >= last);
            last = m0;
        }
    }

    #[test]
    fn dim_json() {
        let d: Vec<Dim> = serde_json::from_str(r#"["inf", 3, 0]"#).unwrap();
        assert_eq!(d, vec![Dim::Infinite, Dim::Finite(3), Dim::Finite(0)]);
        assert_eq!(serde_json::to_string(&d).unwrap(), r#"["inf",3,0]"#);
        assert!(serde_json::from_str::<Dim>("-1").is_err());
        assert!(serde_json::from_str::<Dim>(r#""infinity""#).is_err());
    }

    fn arb_seq(len: usize) -> impl Strategy<Value = DimSequence> {
        (proptest::bool::ANY, proptest::collection::vec(0u64..50, len)).prop_map(|(inf, mut v)| {
            let mut dims: Vec<Dim> = v.drain(..).map(Dim::Finite).collect();
            if inf {
                dims[0] = Dim::Infinite;
            }
            DimSequence::new(dims).unwrap()
        })
    }

    proptest! {
        #[test]
        fn verdict_is_symmetric(a in arb_seq(30), b in arb_seq(30)) {
            let ab = check_isomorphism(&a, &b, 4, 25);
            let ba = check_isomorphism(&b, &a, 4, 25);
            match (ab, ba) {
                (IsoVerdict::Isomorphic { p: p1, .. }, IsoVerdict::Isomorphic { p: p2, .. }) => prop_assert_eq!(p1, p2),
                (IsoVerdict::NonIsomorphic { witness: w1, .. }, IsoVerdict::NonIsomorphic { witness: w2, .. }) => {
                    prop_assert!(witness_holds(&a, &b, &w1, 4));
                    prop_assert!(witness_holds(&b, &a, &w2, 4));
                }
                (IsoVerdict::Undecided { .. }, IsoVerdict::Undecided { .. }) => {}
                (x, y) => prop_assert!(false, "asymmetric verdicts {:?} / {:?}", x, y),
            }
        }

        #[test]
        fn reflexive(a in arb_seq(30)) {
            let v = check_isomorphism(&a, &a, 4, 25);
            let ok = matches!(v, IsoVerdict::Isomorphic { p: 0, .. } | IsoVerdict::Undecided { .. });
            prop_assert!(ok, "{:?}", v);
        }

        #[test]
        fn witnesses_are_sound(a in arb_seq(30), b in arb_seq(30), p_max in 0usize..5) {
            if let IsoVerdict::NonIsomorphic { witness, .. } = check_isomorphism(&a, &b, p_max, 25) {
                let (x, y) = match witness.direction { Direction::HIntoK => (&a, &b), Direction::KIntoH => (&b, &a) };
                for p in 0..=p_max {
                    prop_assert!(!brute_holds(x, y, p, 25) || !x.sum(witness.n as i64, witness.m as i64).le(y.sum(witness.n as i64 - p as i64, witness.m as i64 + p as i64)));
                }
                prop_assert!(witness_holds(&a, &b, &witness, p_max));
            }
        }
    }
}
