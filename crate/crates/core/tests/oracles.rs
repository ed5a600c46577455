//! Checks of the analytic engine against independent routes: series
//! evaluation of the exponential, quadrature, and simulation.

mod common;

use aoi_core::linalg::expm_left_action;
use aoi_core::sim::{replicate, simulate, Horizon, SimConfig};
use aoi_core::{analyze, build_mfq, ObserverChain, Policy, SourceParams};
use common::*;

/// `α e^{Wx}` as a plain Taylor series on the dense matrix, summed until the
/// terms fall below `1e-16` of the partial sum.
fn taylor(alpha: &[f64], w: &[Vec<f64>], x: f64) -> Vec<f64> {
    let n = alpha.len();
    let mut sum = alpha.to_vec();
    let mut term = alpha.to_vec();
    for k in 1..400 {
        let mut next = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                next[j] += term[i] * w[i][j];
            }
        }
        term = next.into_iter().map(|v| v * x / k as f64).collect();
        sum.iter_mut().zip(&term).for_each(|(s, t)| *s += t);
        let size: f64 = term.iter().map(|t| t.abs()).sum();
        if size < 1e-16 * sum.iter().map(|s| s.abs()).sum::<f64>() {
            break;
        }
    }
    sum
}

#[test]
fn exponential_action_matches_series_on_single_source_model() {
    let p = SourceParams::new(vec![1.0], vec![1.0]).unwrap();
    let chain = ObserverChain::solved(Policy::Sbr, &p).unwrap();
    let m = build_mfq(Policy::Sbr, &p, 1, &chain).unwrap();
    assert_eq!(m.order(), 5);
    let got = expm_left_action(m.alpha(), m.w(), 0.5).unwrap();
    let want = taylor(m.alpha(), &m.w().to_dense(), 0.5);
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() <= 1e-12 * w.abs().max(1e-3), "{g} vs {w}");
    }
    assert_eq!(expm_left_action(m.alpha(), m.w(), 0.0).unwrap(), m.alpha());
}

#[test]
fn quadrature_oracle_is_sound() {
    let v = integrate(|x| x * (-x).exp(), 0.0, 60.0, 1e-13);
    assert!((v - 1.0).abs() < 1e-12);
    let v = integrate(|x| x.sin(), 0.0, std::f64::consts::PI, 1e-13);
    assert!((v - 2.0).abs() < 1e-12);
}

#[test]
fn pdf_integrates_to_cdf() {
    let p = four_source_scenario();
    let d = &analyze(Policy::Fsfs, &p).unwrap()[0];
    let top = d.quantile(1.0 - 1e-6).unwrap();
    let quad = integrate(|x| d.pdf_at(x).unwrap(), 0.0, top, 1e-11);
    assert!((quad - d.cdf_at(top).unwrap()).abs() < 1e-8);
    assert_eq!(d.pdf_at(0.0).unwrap(), 0.0);
    let far = 40.0 * d.mean().unwrap();
    assert!(d.propagate(far).unwrap().iter().map(|v| v.abs()).sum::<f64>() < 1e-12);
    assert!((d.cdf_at(far).unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn single_source_mean_matches_simulation() {
    let p = SourceParams::new(vec![1.0], vec![1.0]).unwrap();
    let exact = analyze(Policy::Sbr, &p).unwrap()[0].mean().unwrap();
    for policy in Policy::ALL {
        let sim = simulate(&SimConfig::new(policy, p.clone(), Horizon::Events(10_000_000), 3)).unwrap();
        let rel = (sim.per_source_mean[0] - exact).abs() / exact;
        assert!(rel < 0.005, "{policy}: simulated {} vs {exact}", sim.per_source_mean[0]);
    }
}

#[test]
fn all_policies_match_simulation_at_small_n() {
    let mut rng = rng(17);
    for n in [2, 3] {
        let p = random_params(&mut rng, n);
        for policy in Policy::ALL {
            let dists = analyze(policy, &p).unwrap();
            let grid = aoi_core::distribution::common_grid(&dists, 200).unwrap();
            let config = SimConfig::new(policy, p.clone(), Horizon::Events(10_000_000), 5).with_grid(grid.clone());
            let sim = simulate(&config).unwrap();
            for d in &dists {
                let sup = sup_distance(&d.cdf_curve(&grid).unwrap(), &sim.per_source_cdf[d.source() - 1]);
                assert!(sup < 0.01, "{policy} N={n} source {}: {sup}", d.source());
            }
        }
    }
}

#[test]
fn replications_have_small_standard_error() {
    let p = SourceParams::new(vec![1.0, 2.0], vec![3.0, 1.0]).unwrap();
    let config = SimConfig::new(Policy::Esfs, p, Horizon::Time(1e6), 21);
    let rep = replicate(&config, 10).unwrap();
    assert!(rep.mean_aoi.std_error < 0.01 * rep.mean_aoi.mean);
    let again = replicate(&config, 10).unwrap();
    assert_eq!(rep, again);
}

#[test]
fn aggregate_mean_is_average_of_sources() {
    let p = four_source_scenario();
    let dists = analyze(Policy::Esfs, &p).unwrap();
    let m = aoi_core::aggregate_metrics(&dists, &[0.0, 1.0, 2.0]).unwrap();
    let avg = m.per_source_mean.iter().sum::<f64>() / 4.0;
    assert!((m.mean_aoi - avg).abs() < 1e-15);
    assert_eq!(m.violation[0], 1.0);
    assert!(m.violation.windows(2).all(|w| w[1] <= w[0]));
}
