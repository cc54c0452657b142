mod rng {
    use apdg_core::rng::*;

    use rand::RngCore;

    #[test]
    fn streams_are_distinct_and_reproducible() {
        let s = SeedStreams::new(7);
        let a = s.stream(StreamId::new(0, Variable::X, 0)).next_u64();
        let b = s.stream(StreamId::new(0, Variable::Y, 0)).next_u64();
        let c = s.stream(StreamId::new(1, Variable::X, 0)).next_u64();
        let d = s.stream(StreamId::new(0, Variable::X, 1)).next_u64();
        let again = s.stream(StreamId::new(0, Variable::X, 0)).next_u64();
        assert_eq!(a, again);
        assert!(a != b && a != c && a != d && b != c && c != d);
    }

    #[test]
    fn packing_is_injective_on_small_grid() {
        let mut seen = std::collections::HashSet::new();
        for node in 0..8 {
            for iteration in 0..8 {
                for variable in [Variable::X, Variable::Y] {
                    assert!(seen.insert(StreamId::new(node, variable, iteration).packed()));
                }
            }
        }
    }
}

mod scalar {
    use apdg_core::Scalar;

    #[test]
    fn literal_round_trip() {
        assert_eq!(<f64 as Scalar>::lit(0.25), 0.25);
        assert_eq!(<f32 as Scalar>::lit(0.25), 0.25f32);
        assert_eq!(<f64 as Scalar>::tol(1e-12), 1e-12);
        assert!(<f32 as Scalar>::tol(1e-12) >= 1e-5);
    }
}

mod linalg {
    use apdg_core::linalg::*;

    use nalgebra::{DMatrix, DVector};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mean_two_ways_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: DMatrix<f64> = DMatrix::from_fn(4, 3, |_, _| rng.random::<f64>());
        let a = column_mean(&x);
        let b = &x * DVector::from_element(3, 1.0 / 3.0);
        assert!((a - b).amax() < 1e-14);
    }

    #[test]
    fn consensus_error_vanishes_on_equal_columns() {
        let v = DVector::from_vec(vec![1.0, -2.0]);
        assert_eq!(consensus_error(&replicate(&v, 5)), 0.0);
    }

    #[test]
    fn orthogonal_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q: DMatrix<f64> = random_orthogonal(6, &mut rng);
        let err = (&q.transpose() * &q - DMatrix::identity(6, 6)).amax();
        assert!(err < 1e-12);
    }

    #[test]
    fn projector_onto_rank_one_range() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let p = range_projector(&m);
        assert!((p - DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])).amax() < 1e-15);
    }

    #[test]
    fn eigenvalues_sorted() {
        let m = DMatrix::<f64>::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let ev = symmetric_eigenvalues(&m);
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
    }
}
