use std::collections::BTreeSet;

use proptest::prelude::*;

use rqmc_core::digital_nets::{
    generate_net, locate_cell, radical_inverse, verify_net, DirectionTable, NetSpec,
};
use rqmc_core::experiment::fit_rate;
use rqmc_core::experiment::ErrorRecord;
use rqmc_core::finance::{
    covariance, generate_path, inv_norm_cdf, norm_cdf, FactorKind, GbmModel, PathFactor,
    PayoffKind, PayoffSpec,
};
use rqmc_core::scrambling::{scramble, ScrambleSeed, SCRAMBLE_DEPTH};
use rqmc_core::singularity::{
    extension_1d, extension_nd_oracle, sup_extension_1d, AvoidanceRegion, ProductSingularFunction,
};

fn model_strategy(max_steps: usize) -> impl Strategy<Value = GbmModel> {
    (
        0.5..2.0f64,
        -0.05..0.1f64,
        0.05..0.6f64,
        0.25..3.0f64,
        1..=max_steps,
        0.0..2.0f64,
    )
        .prop_map(|(s0, r, sigma, t, d, k)| GbmModel::new(s0, r, sigma, t, d, k).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn consecutive_blocks_of_the_sequence_are_nets(k in 0u64..256, m in 0u32..=10, d in 1usize..=4) {
        let gen = DirectionTable::bundled().generator(d).unwrap();
        let block = gen.points(k << m, 1 << m).unwrap();
        let t = NetSpec::sobol(m, d).unwrap().t;
        prop_assert!(verify_net(&block, 2, t, m, d).unwrap().passed());
    }

    #[test]
    fn radical_inverse_is_a_bijection_onto_the_grid(m in 0u32..=16) {
        let n = 1u64 << m;
        let cells: BTreeSet<u64> = (0..n)
            .map(|i| {
                let scaled = radical_inverse(i, 2) * n as f64;
                assert_eq!(scaled, scaled.trunc());
                scaled as u64
            })
            .collect();
        prop_assert_eq!(cells.len() as u64, n);
        prop_assert!(cells.iter().all(|&c| c < n));
    }

    #[test]
    fn cell_location_is_a_partition(u in prop::collection::vec(0.0..1.0f64, 1..5), k in prop::collection::vec(0u32..12, 5)) {
        let shape = &k[..u.len()];
        let cell = locate_cell(&u, shape, 2);
        for ((&x, &kk), &c) in u.iter().zip(shape).zip(&cell) {
            let w = 2f64.powi(-(kk as i32));
            prop_assert!(c < 1 << kk);
            prop_assert!(c as f64 * w <= x && x < (c + 1) as f64 * w);
        }
    }

    #[test]
    fn scrambling_preserves_nets(master in any::<u64>(), rep in any::<u64>(), m in 0u32..=10, d in 1usize..=4) {
        let spec = NetSpec::sobol(m, d).unwrap();
        let net = generate_net(&spec).unwrap();
        let a = scramble(&net, ScrambleSeed::new(master, rep), SCRAMBLE_DEPTH).unwrap();
        prop_assert!(verify_net(&a, 2, spec.t, m, d).unwrap().passed());
        prop_assert!(a.coords().iter().all(|&x| x > 0.0 && x < 1.0));
        let b = scramble(&net, ScrambleSeed::new(master, rep), SCRAMBLE_DEPTH).unwrap();
        prop_assert_eq!(a.coords(), b.coords());
    }

    #[test]
    fn extension_agrees_on_region_and_grows_as_eps_shrinks(
        a in 0.05..0.95f64,
        u in 0.0..=1.0f64,
        e1 in 1e-6..0.5f64,
        e2 in 1e-6..0.5f64,
    ) {
        let (small, large) = (e1.min(e2), e1.max(e2));
        let g_small = extension_1d(a, u, small).unwrap();
        let g_large = extension_1d(a, u, large).unwrap();
        if u <= 0.5 {
            prop_assert!(g_small >= g_large);
        }
        prop_assert!(g_small <= sup_extension_1d(a, small).unwrap());
        if (large..=1.0 - large).contains(&u) {
            prop_assert_eq!(g_large, u.powf(-a));
        }
    }

    #[test]
    fn avoidance_regions_are_nested(u in prop::collection::vec(0.0..=1.0f64, 1..4), e1 in 0.0..1.0f64, e2 in 0.0..1.0f64) {
        let d = u.len();
        let cap = 0.5f64.powi(d as i32);
        let (small, large) = ((e1.min(e2) * cap).max(1e-12), (e1.max(e2) * cap).max(1e-12));
        let inner = AvoidanceRegion::new(large, d).unwrap();
        let outer = AvoidanceRegion::new(small, d).unwrap();
        prop_assert!(!inner.contains(&u) || outer.contains(&u));
    }

    #[test]
    fn factorizations_reproduce_the_covariance(model in model_strategy(64)) {
        let sigma = covariance(&model);
        for kind in [FactorKind::Cholesky, FactorKind::Ot] {
            let f = PathFactor::for_model(&model, kind).unwrap();
            let err = f.matrix().gram().max_abs_diff(&sigma);
            prop_assert!(err <= 1e-12 * sigma.max_abs(), "{kind}: {err}");
        }
    }

    #[test]
    fn ot_factor_concentrates_the_weights(
        model in model_strategy(64),
        raw in prop::collection::vec(-1.0..1.0f64, 64),
    ) {
        let d = model.steps;
        let w: Vec<f64> = raw[..d].iter().map(|x| x + 0.01).collect();
        let sigma = covariance(&model);
        let f = PathFactor::ot(&sigma, &w).unwrap();
        prop_assert!(f.matrix().gram().max_abs_diff(&sigma) <= 1e-12 * sigma.max_abs());
        let wa = f.matrix().transpose_mul_vec(&w);
        let scale = wa.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        prop_assert!(wa[0] > 0.0);
        for x in &wa[1..] {
            prop_assert!(x.abs() <= 1e-12 * scale, "{wa:?}");
        }
    }

    #[test]
    fn inverse_normal_is_monotone_and_antisymmetric(k1 in 1u32..60, k2 in 1u32..60, j1 in 1u64..1024, j2 in 1u64..1024) {
        let p = j1 as f64 / 1024.0 * 2f64.powi(-(k1 as i32) + 1) ;
        let q = j2 as f64 / 1024.0 * 2f64.powi(-(k2 as i32) + 1);
        prop_assume!(p < 1.0 && q < 1.0);
        let (lo, hi) = (p.min(q), p.max(q));
        prop_assert!(inv_norm_cdf(lo).unwrap() <= inv_norm_cdf(hi).unwrap());
        if p >= 2f64.powi(-40) {
            let sum = inv_norm_cdf(p).unwrap() + inv_norm_cdf(1.0 - p).unwrap();
            prop_assert!(sum.abs() <= 1e-12 * inv_norm_cdf(p).unwrap().abs().max(1.0), "{p}: {sum}");
        }
        let x = inv_norm_cdf(p).unwrap();
        prop_assert!((norm_cdf(x) - p).abs() <= 1e-13 * p.max(1e-3));
    }

    #[test]
    fn asian_call_is_bounded_by_discounted_average(
        model in model_strategy(16),
        raw in prop::collection::vec(1e-9..1.0f64, 16),
        ot in any::<bool>(),
    ) {
        let kind = if ot { FactorKind::Ot } else { FactorKind::Cholesky };
        let f = PathFactor::for_model(&model, kind).unwrap();
        let s = generate_path(&raw[..model.steps], &model, &f).unwrap();
        let value = PayoffSpec::new(PayoffKind::AsianCall, model).unwrap().eval(&s);
        let s_a = s.iter().sum::<f64>() / s.len() as f64;
        prop_assert!(value >= 0.0);
        prop_assert!(value <= model.discount() * s_a * (1.0 + 1e-15));
    }

    #[test]
    fn fit_recovers_power_laws(alpha in 0.1..2.0f64, c in 1e-6..1e3f64, lo in 2u32..8, span in 3u32..10) {
        let records: Vec<ErrorRecord> = (lo..=lo + span)
            .map(|k| {
                let n = 1usize << k;
                ErrorRecord { n, replicates: 8, mean_abs_error: c * (n as f64).powf(-alpha), std_error: 0.0, estimates: vec![] }
            })
            .collect();
        let fit = fit_rate(&records, 0).unwrap();
        prop_assert!((fit.slope + alpha).abs() < 1e-9);
        prop_assert!(fit.r_squared > 1.0 - 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn nd_extension_equals_function_on_region(
        a1 in 0.1..0.8f64,
        a2 in 0.1..0.8f64,
        u1 in 0.2..0.8f64,
        u2 in 0.2..0.8f64,
    ) {
        let g = ProductSingularFunction::new(vec![a1, a2]).unwrap();
        let eps = 0.01;
        let u = [u1, u2];
        prop_assume!(AvoidanceRegion::new(eps, 2).unwrap().contains(&u));
        let oracle = extension_nd_oracle(&g, &u, eps, 1e-11).unwrap();
        let exact = g.eval(&u);
        prop_assert!((oracle - exact).abs() <= 1e-7 * exact, "{oracle} vs {exact}");
    }
}
