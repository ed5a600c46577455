use std::path::Path;

use aoi_core::distribution::{average_violation, common_grid, uniform_grid};
use aoi_core::mfq::enumerate_phase_states;
use aoi_core::sim::{replicate, Replication, SimConfig};
use aoi_core::{analyze, AoiDistribution, Policy, SimResult, SourceParams};
use rayon::prelude::*;

use crate::output::{self, Entry, SIM_ORIGIN};
use crate::*;

pub fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Analyze(a) => run_analyze(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Compare(a) => run_compare(a),
        Command::Statecount(a) => run_statecount(a),
        Command::Sweep(a) => run_sweep(a),
    }
}

fn resolve_grid(spec: GridSpec, dists: &[AoiDistribution]) -> Result<Vec<f64>, CliError> {
    Ok(match spec {
        GridSpec::Points(k) => common_grid(dists, k)?,
        GridSpec::Range { lo, hi, points } => {
            (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect()
        }
    })
}

fn cdf_columns(dists: &[AoiDistribution], grid: &[f64]) -> Result<Vec<(Vec<f64>, Vec<f64>)>, CliError> {
    Ok(dists.par_iter().map(|d| d.curves(grid)).collect::<aoi_core::Result<Vec<_>>>()?)
}

fn run_analyze(a: AnalyzeArgs) -> Result<(), CliError> {
    let params = a.scenario.params()?;
    output::prepare(&a.output.out)?;
    for &policy in &a.policy.policies {
        let dists = analyze(policy, &params)?;
        let grid = resolve_grid(a.grid.grid, &dists)?;
        let curves = cdf_columns(&dists, &grid)?;
        let (pdf, cdf): (Vec<_>, Vec<_>) = curves.into_iter().unzip();
        let name = policy.name();
        output::write_grid(&output::path(&a.output.out, &format!("{name}_cdf.csv")), &grid, &cdf, None)?;
        output::write_grid(&output::path(&a.output.out, &format!("{name}_pdf.csv")), &grid, &pdf, None)?;

        let mut entries = Vec::new();
        let mut total = 0.0;
        for d in &dists {
            let (m1, m2) = (d.moment(1)?, d.moment(2)?);
            total += m1;
            let k = d.source();
            entries.push(Entry::new("states", k, d.order() as f64));
            entries.push(Entry::new("mean", k, m1));
            entries.push(Entry::new("second_moment", k, m2));
            entries.push(Entry::new("variance", k, m2 - m1 * m1));
            entries.push(Entry::new("median", k, d.quantile(0.5)?));
            for &g in &a.gammas {
                entries.push(Entry::new(format!("violation@{g}"), k, d.violation_probability(g)?));
            }
        }
        let mean_aoi = total / dists.len() as f64;
        entries.push(Entry::new("mean", "all", mean_aoi));
        for &g in &a.gammas {
            entries.push(Entry::new(format!("violation@{g}"), "all", average_violation(&dists, g)?));
        }
        output::write_summary(&output::path(&a.output.out, &format!("{name}_summary.csv")), &entries, None)?;
        println!("{policy}: E[age] = {mean_aoi}");
    }
    Ok(())
}

fn sim_config(policy: Policy, params: &SourceParams, sim: &SimArgs, grid: Vec<f64>) -> SimConfig {
    SimConfig::new(policy, params.clone(), sim.horizon, sim.seed).with_grid(grid).with_warmup(sim.warmup)
}

fn write_observer(path: &Path, r: &SimResult) -> Result<(), CliError> {
    let mut header = vec!["state".to_string(), "occupancy".into()];
    header.extend((1..=r.n()).map(|k| format!("seen_source_{k}")));
    header.push("origin".into());
    let rows: Vec<Vec<String>> = r
        .observer_states
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut row = vec![s.to_string(), r.observer_occupancy[i].to_string()];
            row.extend(r.arrival_seen.iter().map(|seen| seen[i].to_string()));
            row.push(SIM_ORIGIN.into());
            row
        })
        .collect();
    output::write_rows(path, &header, &rows)
}

fn run_simulate(a: SimulateArgs) -> Result<(), CliError> {
    let params = a.scenario.params()?;
    if a.runs == 0 {
        return Err(CliError::Usage("--runs must be at least 1".into()));
    }
    output::prepare(&a.output.out)?;
    for &policy in &a.policy.policies {
        let grid = match a.grid.grid {
            GridSpec::Points(_) => resolve_grid(a.grid.grid, &analyze(policy, &params)?)?,
            range => resolve_grid(range, &[])?,
        };
        let config = sim_config(policy, &params, &a.sim, grid.clone()).with_observer(true);
        let Replication { runs, per_source_mean, mean_aoi, per_source_cdf } = replicate(&config, a.runs)?;
        let name = policy.name();

        let cdf: Vec<Vec<f64>> = per_source_cdf.iter().map(|c| c.iter().map(|s| s.mean).collect()).collect();
        output::write_grid(&output::path(&a.output.out, &format!("{name}_sim_cdf.csv")), &grid, &cdf, Some(SIM_ORIGIN))?;

        let mut entries = vec![
            Entry::new("seed", "all", a.sim.seed as f64),
            Entry::new("runs", "all", a.runs as f64),
            Entry::new("events", "all", runs.iter().map(|r| r.event_count as f64).sum()),
            Entry::new("measured_time", "all", runs.iter().map(|r| r.measured_time).sum()),
        ];
        for (k, s) in per_source_mean.iter().enumerate() {
            entries.push(Entry::new("mean", k + 1, s.mean));
            entries.push(Entry::new("mean_std_error", k + 1, s.std_error));
        }
        entries.push(Entry::new("mean", "all", mean_aoi.mean));
        entries.push(Entry::new("mean_std_error", "all", mean_aoi.std_error));
        output::write_summary(
            &output::path(&a.output.out, &format!("{name}_sim_summary.csv")),
            &entries,
            Some(SIM_ORIGIN),
        )?;
        write_observer(&output::path(&a.output.out, &format!("{name}_sim_observer.csv")), &runs[0])?;
        println!("{policy}: simulated E[age] = {} ± {}", mean_aoi.mean, mean_aoi.std_error);
    }
    Ok(())
}

fn run_compare(a: CompareArgs) -> Result<(), CliError> {
    let params = a.scenario.params()?;
    if !(a.threshold > 0.0) {
        return Err(CliError::Usage("--threshold must be positive".into()));
    }
    output::prepare(&a.output.out)?;
    let mut failures = Vec::new();
    for &policy in &a.policy.policies {
        let dists = analyze(policy, &params)?;
        let grid = resolve_grid(a.grid.grid, &dists)?;
        let analytic: Vec<Vec<f64>> = cdf_columns(&dists, &grid)?.into_iter().map(|c| c.1).collect();
        let sim = aoi_core::simulate(&sim_config(policy, &params, &a.sim, grid.clone()))?;

        let mut entries = Vec::new();
        for (k, d) in dists.iter().enumerate() {
            let sup = analytic[k].iter().zip(&sim.per_source_cdf[k]).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            entries.push(Entry::new("sup_distance", k + 1, sup));
            entries.push(Entry::new("analytic_mean", k + 1, d.mean()?));
            entries.push(Entry::new("sim_mean", k + 1, sim.per_source_mean[k]));
            let verdict = if sup < a.threshold { "ok" } else { "FAIL" };
            println!("{policy} source {}: sup-distance {sup:.5} [{verdict}]", k + 1);
            if sup >= a.threshold {
                failures.push(format!("{policy} source {} ({sup:.5})", k + 1));
            }
        }
        entries.push(Entry::new("seed", "all", a.sim.seed as f64));
        entries.push(Entry::new("events", "all", sim.event_count as f64));
        output::write_summary(&output::path(&a.output.out, &format!("{}_compare.csv", policy.name())), &entries, None)?;
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Threshold(format!("threshold {} exceeded by {}", a.threshold, failures.join(", "))))
    }
}

fn parse_counts(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Usage(format!("--n `{s}` must be N or LO..HI with 1 ≤ LO ≤ HI"));
    let (lo, hi) = match s.split_once("..") {
        Some((lo, hi)) => (lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?),
        None => {
            let n = s.trim().parse().map_err(|_| bad())?;
            (n, n)
        }
    };
    if lo == 0 || hi < lo {
        return Err(bad());
    }
    Ok((lo..=hi).collect())
}

/// Order `L` of the fluid-queue subgenerator per policy (SBR, FSFS, ESFS) and `N`.
pub fn state_counts(counts: &[usize]) -> Result<Vec<(Policy, Vec<usize>)>, CliError> {
    [Policy::Sbr, Policy::Fsfs, Policy::Esfs]
        .into_iter()
        .map(|p| {
            let row = counts
                .iter()
                .map(|&n| Ok(enumerate_phase_states(p, n, 1)?.order()))
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok((p, row))
        })
        .collect()
}

fn run_statecount(a: StatecountArgs) -> Result<(), CliError> {
    let counts = parse_counts(&a.n)?;
    let table = state_counts(&counts)?;
    let mut header = vec!["policy".to_string()];
    header.extend(counts.iter().map(|n| format!("N={n}")));
    let rows: Vec<Vec<String>> = table
        .iter()
        .map(|(p, row)| std::iter::once(p.name().to_string()).chain(row.iter().map(|l| l.to_string())).collect())
        .collect();
    println!("{}", header.join(","));
    for r in &rows {
        println!("{}", r.join(","));
    }
    if let Some(dir) = &a.out {
        output::prepare(dir)?;
        output::write_rows(&output::path(dir, "statecount.csv"), &header, &rows)?;
    }
    Ok(())
}

fn metric_value(policy: Policy, params: &SourceParams, metric: Metric, gamma: Option<f64>) -> Result<f64, CliError> {
    let dists = analyze(policy, params)?;
    match metric {
        Metric::Mean => {
            let mut total = 0.0;
            for d in &dists {
                total += d.mean()?;
            }
            Ok(total / dists.len() as f64)
        }
        Metric::Violation => {
            let g = gamma.ok_or_else(|| CliError::Usage("--metric violation needs --gamma".into()))?;
            Ok(average_violation(&dists, g)?)
        }
    }
}

fn run_sweep(a: SweepArgs) -> Result<(), CliError> {
    if a.points < 2 {
        return Err(CliError::Usage("--points must be at least 2".into()));
    }
    let xs: Vec<f64> = uniform_grid(a.range.hi - a.range.lo, a.points).iter().map(|d| a.range.lo + d).collect();
    let policies = &a.policy.policies;
    let columns: Vec<Vec<f64>> = match a.axis {
        Axis::Rho | Axis::Rho1 => {
            let scenario = |x: f64| -> Result<SourceParams, CliError> {
                match a.axis {
                    Axis::Rho => {
                        let n = a.scenario.n.ok_or_else(|| CliError::Usage("--axis rho needs --n".into()))?;
                        Ok(SourceParams::balanced(n, x, a.scenario.mu)?)
                    }
                    _ => {
                        let rho = a.scenario.rho.ok_or_else(|| CliError::Usage("--axis rho1 needs --rho".into()))?;
                        if x >= 1.0 {
                            return Err(CliError::Usage("--axis rho1 takes shares ρ1/ρ below 1".into()));
                        }
                        let mus = a.scenario.mus.clone().unwrap_or_else(|| vec![a.scenario.mu; 2]);
                        if mus.len() != 2 {
                            return Err(CliError::Usage("--axis rho1 needs two service rates".into()));
                        }
                        Ok(SourceParams::new(vec![x * rho * mus[0], (1.0 - x) * rho * mus[1]], mus)?)
                    }
                }
            };
            let rows = xs
                .par_iter()
                .map(|&x| {
                    let p = scenario(x)?;
                    policies.iter().map(|&pol| metric_value(pol, &p, a.metric, a.gamma)).collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            (0..policies.len()).map(|j| rows.iter().map(|r| r[j]).collect()).collect()
        }
        Axis::Gamma => {
            let params = a.scenario.params()?;
            policies
                .par_iter()
                .map(|&pol| {
                    let dists = analyze(pol, &params)?;
                    let mut theta = vec![0.0; xs.len()];
                    for d in &dists {
                        for (t, f) in theta.iter_mut().zip(d.cdf_curve(&xs)?) {
                            *t += (1.0 - f) / dists.len() as f64;
                        }
                    }
                    Ok(theta)
                })
                .collect::<Result<Vec<_>, CliError>>()?
        }
    };

    output::prepare(&a.output.out)?;
    let axis = match a.axis {
        Axis::Rho => "rho",
        Axis::Rho1 => "rho1",
        Axis::Gamma => "gamma",
    };
    let mut header = vec!["x".to_string()];
    header.extend(policies.iter().map(|p| p.name().to_string()));
    let rows: Vec<Vec<String>> = xs
        .iter()
        .enumerate()
        .map(|(i, x)| std::iter::once(x.to_string()).chain(columns.iter().map(|c| c[i].to_string())).collect())
        .collect();
    output::write_rows(&output::path(&a.output.out, &format!("sweep_{axis}.csv")), &header, &rows)?;
    for r in &rows {
        println!("{}", r.join(","));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(parse_counts("2..5").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(parse_counts("3").unwrap(), vec![3]);
        assert!(parse_counts("5..2").is_err());
        assert!(parse_counts("0..2").is_err());
    }

    #[test]
    fn small_state_table() {
        let t = state_counts(&[2, 3]).unwrap();
        assert_eq!(t[0], (Policy::Sbr, vec![10, 17]));
        assert_eq!(t[1], (Policy::Fsfs, vec![16, 65]));
        assert_eq!(t[2], (Policy::Esfs, vec![15, 80]));
    }
}
