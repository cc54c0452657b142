mod network_core {
    use apdg_core::network::*;

    use nalgebra::DMatrix;

    #[test]
    fn complete_two_nodes() {
        let w: DMatrix<f64> = metropolis_weights(&Graph::complete(2).unwrap());
        assert_eq!(w, DMatrix::from_element(2, 2, 0.5));
    }

    #[test]
    fn edgeless_is_identity() {
        let w: DMatrix<f64> = metropolis_weights(&Graph::edgeless(4).unwrap());
        assert_eq!(w, DMatrix::identity(4, 4));
    }

    #[test]
    fn path_of_three() {
        let w: DMatrix<f64> = metropolis_weights(&Graph::path(3).unwrap());
        let third = 1.0 / 3.0;
        assert!((w[(0, 1)] - third).abs() < 1e-15 && (w[(1, 2)] - third).abs() < 1e-15);
        assert_eq!(w[(0, 2)], 0.0);
        assert!((w[(0, 0)] - 2.0 / 3.0).abs() < 1e-15);
        assert!((w[(1, 1)] - third).abs() < 1e-15);
        assert!((w[(2, 2)] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn graph_validation() {
        assert!(Graph::new(3, [(0, 3)]).is_err());
        assert!(Graph::new(3, [(1, 1)]).is_err());
        let g = Graph::new(3, [(1, 0), (0, 1), (2, 1)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert!(g.is_connected());
        assert!(!Graph::edgeless(2).unwrap().is_connected());
        assert_eq!(Graph::ring(5).unwrap().edges().len(), 5);
    }
}

mod schedule {
    use apdg_core::network::*;

    use nalgebra::DMatrix;

    #[test]
    fn random_switching_is_connected_and_reproducible() {
        let base = Graph::complete(6).unwrap();
        let s = MixingSchedule::<f64>::random_switching(base.clone(), 0.3, 4).unwrap();
        for k in 0..20 {
            let g = s.graph(k);
            assert!(g.is_connected());
            assert!(g.edges().iter().all(|&(a, b)| base.has_edge(a, b)));
            assert_eq!(g, s.graph(k));
            let w = s.matrix(k);
            assert!(stochasticity_defect(&w) < 1e-12);
            for i in 0..6 {
                for j in 0..6 {
                    if i != j {
                        assert_eq!(w[(i, j)] != 0.0, g.has_edge(i, j));
                    }
                }
            }
        }
        assert_ne!(s.graph(0), s.graph(1));
    }

    #[test]
    fn static_matrix_validation() {
        assert!(MixingSchedule::static_matrix(DMatrix::<f64>::identity(3, 3)).is_ok());
        let bad = DMatrix::from_row_slice(2, 2, &[0.7, 0.3, 0.2, 0.8]);
        assert!(MixingSchedule::<f64>::static_matrix(bad).is_err());
    }

    #[test]
    fn file_round_trip() {
        let file = ScheduleFile::ring(5);
        let back = ScheduleFile::from_json(&file.to_json()).unwrap();
        assert_eq!(back, file);
        let s: MixingSchedule<f64> = back.to_schedule().unwrap();
        assert_eq!(s.graph(3), Graph::ring(5).unwrap());
        let mut bad = file.clone();
        bad.format = "x".into();
        assert!(bad.to_schedule::<f64>().is_err());
    }

    #[test]
    fn periodic_cycles() {
        let s = MixingSchedule::<f64>::periodic(vec![
            Graph::path(3).unwrap(),
            Graph::complete(3).unwrap(),
        ])
        .unwrap();
        assert_eq!(s.matrix(0), s.matrix(2));
        assert_eq!(s.matrix(1), s.matrix(5));
        assert_ne!(s.matrix(0), s.matrix(1));
    }
}

mod certify {
    use apdg_core::linalg::*;
    use apdg_core::network::*;

    use apdg_core::Error;
    use nalgebra::DMatrix;

    #[test]
    fn exact_averaging_has_unit_lambda() {
        let w = DMatrix::from_element(4, 4, 0.25);
        let s = MixingSchedule::<f64>::static_matrix(w).unwrap();
        let c = certify_contraction(&s, 1, 1).unwrap();
        assert_eq!(c.lambda, 1.0);
        assert!(c.analytic);
    }

    #[test]
    fn identity_is_rejected() {
        let s = MixingSchedule::<f64>::static_matrix(DMatrix::identity(3, 3)).unwrap();
        assert!(matches!(
            certify_contraction(&s, 1, 10),
            Err(Error::NoContraction { .. })
        ));
    }

    #[test]
    fn ring_of_four_matches_spectrum() {
        let g = Graph::ring(4).unwrap();
        let w: DMatrix<f64> = metropolis_weights(&g);
        // eigenvalues of the circulant (1/3)(I + S + Sᵀ): 1, 1/3, 1/3, −1/3
        let ev = symmetric_eigenvalues(&w);
        assert!((ev[0] + 1.0 / 3.0).abs() < 1e-12);
        assert!((ev[3] - 1.0).abs() < 1e-12);
        let c = certify_contraction(&MixingSchedule::<f64>::static_graph(g), 1, 1).unwrap();
        assert!((c.lambda - 2.0 / 3.0).abs() < 1e-12);
        let c2 = certify_contraction(
            &MixingSchedule::<f64>::static_graph(Graph::ring(4).unwrap()),
            2,
            1,
        )
        .unwrap();
        assert!((c2.lambda - 8.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn periodic_schedule_with_disconnected_rounds() {
        // neither round alone is connected; every pair of rounds is
        let a = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        let b = Graph::new(4, [(1, 2), (3, 0)]).unwrap();
        let s = MixingSchedule::<f64>::periodic(vec![a, b]).unwrap();
        assert!(certify_contraction(&s, 1, 5).is_err());
        let c = certify_contraction(&s, 2, 5).unwrap();
        assert!(c.lambda > 0.0 && !c.analytic && c.exhaustive);
    }
}

mod consensus {
    use apdg_core::linalg::*;
    use apdg_core::network::*;

    use nalgebra::DMatrix;

    #[test]
    fn rounds_examples() {
        assert_eq!(consensus_rounds_needed(1.0, 2.0, 1, 0.5).unwrap(), 0);
        assert_eq!(consensus_rounds_needed(100.0, 1.0, 1, 0.5).unwrap(), 10);
        assert_eq!(consensus_rounds_needed(100.0, 1.0, 2, 0.5).unwrap(), 19);
        assert!(consensus_rounds_needed(100.0, 1.0, 1, 0.0).is_err());
    }

    #[test]
    fn zero_rounds_and_consensual_input() {
        let s = MixingSchedule::<f64>::static_graph(Graph::ring(4).unwrap());
        let x = DMatrix::from_fn(2, 4, |i, j| (i * 4 + j) as f64);
        assert_eq!(consensus(&x, &s, 3, 0).unwrap(), x);
        let flat = DMatrix::from_fn(2, 4, |i, _| i as f64 + 0.5);
        let out = consensus(&flat, &s, 0, 7).unwrap();
        assert!((out - flat).norm() < 1e-14);
    }

    #[test]
    fn exact_averaging_in_one_round() {
        let s =
            MixingSchedule::<f64>::static_matrix(DMatrix::from_element(3, 3, 1.0 / 3.0)).unwrap();
        let x = DMatrix::from_row_slice(1, 3, &[3.0, 0.0, 6.0]);
        let out = consensus(&x, &s, 0, 1).unwrap();
        for j in 0..3 {
            assert!((out[(0, j)] - 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn chebyshev_low_degrees() {
        let w: DMatrix<f64> = apdg_core::network::metropolis_weights(&Graph::ring(6).unwrap());
        let x = DMatrix::from_fn(2, 6, |i, j| ((i + 1) * (j * j + 1)) as f64);
        assert_eq!(chebyshev_consensus(&x, &w, 0).unwrap(), x);
        assert_eq!(chebyshev_consensus(&x, &w, 1).unwrap(), &x * &w);
        let out = chebyshev_consensus(&x, &w, 9).unwrap();
        assert!((column_mean(&out) - column_mean(&x)).norm() < 1e-12);
        let asym = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.4, 0.6]);
        assert!(chebyshev_consensus(&DMatrix::zeros(1, 2), &asym, 2).is_err());
    }
}

mod properties {
    use apdg_core::linalg::{column_mean, consensus_error, replicate, spectral_norm};
    use apdg_core::network::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn schedules() -> Vec<MixingSchedule<f64>> {
        let ring = MixingSchedule::static_graph(Graph::ring(6).unwrap());
        let periodic = MixingSchedule::periodic(vec![
            Graph::new(6, [(0, 1), (2, 3), (4, 5)]).unwrap(),
            Graph::new(6, [(1, 2), (3, 4)]).unwrap(),
            Graph::new(6, [(5, 0), (2, 5)]).unwrap(),
        ])
        .unwrap();
        let switching =
            MixingSchedule::random_switching(Graph::complete(6).unwrap(), 0.3, 17).unwrap();
        vec![ring, periodic, switching]
    }

    fn random_x(rng: &mut ChaCha8Rng, d: usize, n: usize) -> DMatrix<f64> {
        DMatrix::from_fn(d, n, |_, _| rng.random_range(-5.0..5.0))
    }

    #[test]
    fn products_stay_doubly_stochastic() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for s in schedules() {
            for _ in 0..50 {
                let start = rng.random_range(0..200);
                let len = rng.random_range(1..12);
                let p = s.window_product(start, len);
                for i in 0..6 {
                    assert!((p.row(i).sum() - 1.0).abs() < 1e-10);
                    assert!((p.column(i).sum() - 1.0).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn zero_pattern_matches_edges() {
        for s in schedules() {
            for k in 0..30 {
                let w = s.matrix(k);
                let g = s.graph(k);
                for i in 0..6 {
                    for j in 0..6 {
                        if i != j {
                            assert_eq!(
                                w[(i, j)] != 0.0,
                                g.has_edge(i, j),
                                "round {k} entry ({i}, {j})"
                            );
                        }
                    }
                }
                assert!(stochasticity_defect(&w) < 1e-12);
            }
        }
    }

    #[test]
    fn certified_contraction_is_honored() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (s, tau) in schedules().into_iter().zip([1usize, 3, 4]) {
            let trials = 64;
            let c = certify_contraction(&s, tau, trials).unwrap();
            let windows = if s.is_static() {
                1
            } else {
                s.period().unwrap_or(trials)
            };
            for probe in 0..1000 {
                let start = probe % windows;
                let x = random_x(&mut rng, 3, 6);
                let out = consensus(&x, &s, start, tau).unwrap();
                assert!(
                    consensus_error(&out) <= (1.0 - c.lambda) * consensus_error(&x) * (1.0 + 1e-12)
                );
            }
        }
    }

    #[test]
    fn chebyshev_dominates_gossip_on_a_ring() {
        let w: DMatrix<f64> = metropolis_weights(&Graph::ring(16).unwrap());
        let avg = DMatrix::from_element(16, 16, 1.0 / 16.0);
        let eye = DMatrix::identity(16, 16);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random_x(&mut rng, 4, 16);
        for t in [5, 10, 20] {
            let cheb = chebyshev_consensus(&eye, &w, t).unwrap();
            let plain = consensus(
                &eye,
                &MixingSchedule::static_matrix(w.clone()).unwrap(),
                0,
                t,
            )
            .unwrap();
            let cheb_norm = spectral_norm(&(cheb - &avg));
            let plain_norm = spectral_norm(&(plain - &avg));
            assert!(
                cheb_norm <= plain_norm,
                "T = {t}: {cheb_norm} > {plain_norm}"
            );
            let out = chebyshev_consensus(&x, &w, t).unwrap();
            assert!((column_mean(&out) - column_mean(&x)).amax() < 1e-12);
        }
    }

    #[test]
    fn chebyshev_rounds_scale_like_the_square_root() {
        let target = 1e-6;
        let mut points = Vec::new();
        for n in [8usize, 12, 16, 24, 32] {
            let w: DMatrix<f64> = metropolis_weights(&Graph::ring(n).unwrap());
            let avg = DMatrix::from_element(n, n, 1.0 / n as f64);
            let eye = DMatrix::<f64>::identity(n, n);
            let mut power = eye.clone();
            let plain = (1..)
                .find(|_| {
                    power = &power * &w;
                    spectral_norm(&(&power - &avg)) <= target
                })
                .unwrap();
            let cheb = (1..)
                .find(|&t| {
                    spectral_norm(&(chebyshev_consensus(&eye, &w, t).unwrap() - &avg)) <= target
                })
                .unwrap();
            points.push(((plain as f64).ln(), (cheb as f64).ln()));
        }
        let m = points.len() as f64;
        let (sx, sy) = points
            .iter()
            .fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        let (mx, my) = (sx / m, sy / m);
        let cov: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let var: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let slope = cov / var;
        assert!((slope - 0.5).abs() <= 0.1, "slope {slope}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn consensus_preserves_the_mean(seed in any::<u64>(), which in 0usize..3, start in 0usize..100, rounds in 0usize..40) {
            let s = &schedules()[which];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_x(&mut rng, 3, 6);
            let out = consensus(&x, s, start, rounds).unwrap();
            prop_assert!((column_mean(&out) - column_mean(&x)).amax() < 1e-12);
        }

        #[test]
        fn consensual_input_is_fixed(seed in any::<u64>(), rounds in 0usize..20) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v = nalgebra::DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0));
            let x = replicate(&v, 6);
            let out = consensus(&x, &schedules()[2], 0, rounds).unwrap();
            prop_assert!((out - x).amax() < 1e-14);
        }
    }
}
