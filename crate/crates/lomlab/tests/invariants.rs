use lomlab::algebra::{generate_algebra, is_transitive, MatrixAlgebra};
use lomlab::classify::{classify, conjugate_all};
use lomlab::division::{embed_complex, embed_quaternion, quat_mul, AlgebraType, Quaternion, QuaternionMatrix};
use lomlab::numeric::rank_of;
use lomlab::{RealMatrix, Tolerance};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit(n: usize, i: usize, j: usize) -> RealMatrix {
    RealMatrix::new(DMatrix::from_fn(n, n, |r, c| if (r, c) == (i, j) { 1.0 } else { 0.0 })).unwrap()
}

fn basis(ty: AlgebraType, n: usize) -> Vec<RealMatrix> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            match ty {
                AlgebraType::Real => out.push(unit(n, i, j)),
                AlgebraType::Complex => {
                    let (e, z) = (unit(n, i, j), RealMatrix::zeros(n, n));
                    out.push(embed_complex(&e, &z).unwrap());
                    out.push(embed_complex(&z, &e).unwrap());
                }
                AlgebraType::Quaternion => {
                    for q in [Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K] {
                        let mut entries = vec![Quaternion::ZERO; n * n];
                        entries[i * n + j] = q;
                        out.push(embed_quaternion(&QuaternionMatrix::new(n, entries).unwrap()));
                    }
                }
            }
        }
    }
    out
}

fn similarity(rng: &mut ChaCha8Rng, n: usize) -> RealMatrix {
    loop {
        let m = DMatrix::from_fn(n, n, |i, j| rng.random_range(-1.0..1.0) + if i == j { 2.0 } else { 0.0 });
        let p = RealMatrix::new(m).unwrap();
        if p.inverse().is_some() {
            return p;
        }
    }
}

fn arb_type() -> impl Strategy<Value = AlgebraType> {
    prop_oneof![Just(AlgebraType::Real), Just(AlgebraType::Complex), Just(AlgebraType::Quaternion)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn classification_survives_similarity(ty in arb_type(), n in 1usize..3, seed in any::<u64>()) {
        let tol = Tolerance::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = basis(ty, n);
        let real_n = b[0].rows();
        let p = similarity(&mut rng, real_n);
        let a = MatrixAlgebra::from_spanning_set(real_n, &conjugate_all(&b, &p).unwrap(), &tol).unwrap();
        prop_assert!(is_transitive(&a, &tol, 4, seed).unwrap().transitive);
        let r = classify(&a, 8, seed, &tol).unwrap();
        prop_assert_eq!(r.algebra_type, ty);
        prop_assert_eq!(r.min_rank, ty.commutant_dim());
        prop_assert_eq!(r.density_degree(), ty.commutant_dim());
    }

    #[test]
    fn ranks_are_multiples_of_commutant_dim(ty in arb_type(), n in 1usize..4, seed in any::<u64>()) {
        let tol = Tolerance::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = basis(ty, n);
        let a = MatrixAlgebra::from_spanning_set(b[0].rows(), &b, &tol).unwrap();
        let x = a.random_element(&mut rng);
        let r = rank_of(&x, &tol).unwrap();
        prop_assert_eq!(r % ty.commutant_dim(), 0);
        // a product with a rank-one real unit keeps the divisibility
        let y = &x * &b[0];
        prop_assert_eq!(rank_of(&y, &tol).unwrap() % ty.commutant_dim(), 0);
    }

    #[test]
    fn quaternion_embedding_is_multiplicative(a in prop::array::uniform4(-3.0f64..3.0), b in prop::array::uniform4(-3.0f64..3.0)) {
        let p = Quaternion::new(a[0], a[1], a[2], a[3]);
        let q = Quaternion::new(b[0], b[1], b[2], b[3]);
        let lhs = embed_quaternion(&QuaternionMatrix::scalar(quat_mul(p, q)));
        let rhs = &embed_quaternion(&QuaternionMatrix::scalar(p)) * &embed_quaternion(&QuaternionMatrix::scalar(q));
        prop_assert!((&lhs - &rhs).frobenius_norm() <= 1e-12 * (1.0 + lhs.frobenius_norm()));
    }

    #[test]
    fn generated_algebra_is_closed(n in 2usize..5, seed in any::<u64>()) {
        let tol = Tolerance::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = RealMatrix::new(DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0))).unwrap();
        let a = generate_algebra(&[g], true, &tol).unwrap();
        prop_assert!(a.dim() <= n);
        prop_assert!(a.closure_defect() <= 1e-8);
        prop_assert!(a.is_unital());
    }
}
