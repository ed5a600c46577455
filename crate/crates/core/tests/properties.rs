mod common;

use aoi_core::distribution::common_grid;
use aoi_core::sim::{simulate, Horizon, SimConfig};
use aoi_core::{analyze, build_mfq, validate_mfq, AoiDistribution, ObserverChain, Policy, SourceParams};
use proptest::prelude::*;

fn rates(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.2f64..3.0, n)
}

fn scenario(max_n: usize) -> impl Strategy<Value = SourceParams> {
    (1..=max_n).prop_flat_map(|n| (rates(n), rates(n))).prop_map(|(l, m)| SourceParams::new(l, m).unwrap())
}

fn policy() -> impl Strategy<Value = Policy> {
    prop::sample::select(Policy::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn models_are_valid_subgenerators(p in scenario(3), policy in policy(), pick in 0usize..3) {
        let chain = ObserverChain::solved(policy, &p).unwrap();
        let tagged = 1 + pick % p.n();
        let m = build_mfq(policy, &p, tagged, &chain).unwrap();
        let report = validate_mfq(&m);
        prop_assert!(report.is_valid(), "{:?}", report.violations);
        for (r, s) in m.w().row_sums().iter().enumerate() {
            prop_assert!((s + m.h()[r]).abs() < 1e-12);
        }
    }

    #[test]
    fn stationary_vector_balances(p in scenario(3), policy in policy()) {
        let chain = ObserverChain::solved(policy, &p).unwrap();
        let pi = chain.stationary().unwrap();
        let residual = chain.generator().left_mul(pi).iter().fold(0.0f64, |m, x| m.max(x.abs()));
        prop_assert!(residual < 1e-10);
        prop_assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(pi.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn renumbering_is_consistent(p in scenario(3), policy in policy(), pick in 0usize..3) {
        let tagged = 1 + pick % p.n();
        let a = build_mfq(policy, &p, tagged, &ObserverChain::solved(policy, &p).unwrap()).unwrap();
        let q = p.swapped(1, tagged as u16);
        let b = build_mfq(policy, &q, 1, &ObserverChain::solved(policy, &q).unwrap()).unwrap();
        prop_assert_eq!(a.w(), b.w());
        prop_assert_eq!(a.h(), b.h());
        for (x, y) in a.alpha().iter().zip(b.alpha()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn distributions_are_proper(p in scenario(3), policy in policy()) {
        let dists = analyze(policy, &p).unwrap();
        let grid = common_grid(&dists, 60).unwrap();
        for d in &dists {
            prop_assert!(d.normalization_residual() <= 1e-12);
            prop_assert!((d.epsilon() * common::normalizer_by_left_solve(d) - 1.0).abs() <= 1e-12);
            let (pdf, cdf) = d.curves(&grid).unwrap();
            prop_assert_eq!(cdf[0], 0.0);
            prop_assert!(pdf.iter().all(|&f| f >= 0.0));
            prop_assert!(cdf.windows(2).all(|w| w[0] <= w[1] + 1e-14));
            prop_assert!(cdf.iter().all(|f| (0.0..=1.0).contains(f)));
            prop_assert_eq!(d.violation_probability(0.0).unwrap(), 1.0);
            let (m1, m2) = (d.moment(1).unwrap(), d.moment(2).unwrap());
            prop_assert!(m2 >= m1 * m1);
        }
    }

    #[test]
    fn simulation_is_deterministic(p in scenario(3), policy in policy(), seed in any::<u64>()) {
        let config = SimConfig::new(policy, p, Horizon::Events(20_000), seed)
            .with_grid(vec![0.5, 1.0, 2.0])
            .with_observer(true);
        let a = simulate(&config).unwrap();
        let b = simulate(&config).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!((a.observer_occupancy.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let other = simulate(&SimConfig { seed: seed.wrapping_add(1), ..config }).unwrap();
        prop_assert_ne!(a.per_source_mean, other.per_source_mean);
    }
}

#[test]
fn raw_blocks_need_matching_sizes() {
    let w = aoi_core::linalg::SparseMatrix::from_triplets(2, vec![(0, 0, -1.0), (1, 1, -1.0)]);
    assert!(AoiDistribution::new(Policy::Sbr, 1, vec![1.0], w, vec![0.0, 1.0]).is_err());
}
