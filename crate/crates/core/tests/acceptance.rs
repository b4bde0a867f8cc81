//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. `BLSE_CRITERIA=1,2,5` restricts the run to the listed criteria.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use blse::acquisition::{AcquisitionKind, ReferenceSet};
use blse::harness::{edge_sample_rate, run_replications, ExperimentConfig, RunTrace, Stream, Summary};
use blse::optim::{select_next, OptimizerBudget, SobolStream};
use blse::oracle::{
    check_composition, check_monte_carlo, check_special_functions, check_tower, check_zero_information, Check,
};
use blse::problems::problem_by_name;
use blse::surrogate::{fit, Dataset, SurrogateConfig};

struct Outcome {
    passed: bool,
    detail: String,
}

fn from_checks(checks: Vec<Check>, elapsed: Duration, budget: Duration) -> Outcome {
    let mut passed = elapsed <= budget;
    let mut lines = Vec::new();
    for c in &checks {
        passed &= c.passed;
        lines.push(format!(
            "    {} {}: {}",
            if c.passed { "ok  " } else { "FAIL" },
            c.name,
            c.detail
        ));
    }
    lines.push(format!(
        "    runtime {:.1}s (budget {}s)",
        elapsed.as_secs_f64(),
        budget.as_secs()
    ));
    Outcome {
        passed,
        detail: lines.join("\n"),
    }
}

fn timed(budget_secs: u64, f: impl FnOnce() -> Vec<Check>) -> Outcome {
    let start = Instant::now();
    let checks = f();
    from_checks(checks, start.elapsed(), Duration::from_secs(budget_secs))
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn final_briers(traces: &[RunTrace]) -> Vec<f64> {
    traces
        .iter()
        .filter(|t| t.is_complete())
        .filter_map(|t| t.final_metrics().and_then(|r| r.brier))
        .collect()
}

fn run_all(config: &ExperimentConfig, reps: usize) -> (Vec<RunTrace>, usize) {
    let results = run_replications(config, reps, workers()).expect("valid config");
    let mut traces = Vec::new();
    let mut failed = 0;
    for r in results {
        match r {
            Ok(t) if t.is_complete() => traces.push(t),
            Ok(t) => {
                eprintln!("    replication {} failed: {:?}", t.replication, t.failure);
                failed += 1;
            }
            Err(e) => {
                eprintln!("    replication error: {e}");
                failed += 1;
            }
        }
    }
    (traces, failed)
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let reps = 20;
    let mut lines = Vec::new();
    let mut passed = true;
    let run = |name: &str| {
        let t = Instant::now();
        let (traces, failed) = run_all(&ExperimentConfig::new("discrim_lowdim", name, 150), reps);
        (traces, failed, t.elapsed())
    };
    let (qr_traces, qr_failed, qr_time) = run("QuasiRandom");
    let qr = Summary::of(&final_briers(&qr_traces)).expect("quasi-random results");
    passed &= qr_failed == 0;
    lines.push(format!(
        "    QuasiRandom: final Brier {:.5} ± {:.5} (n={}, {qr_failed} failed, {:.0}s)",
        qr.mean,
        qr.two_sem,
        qr.n,
        qr_time.as_secs_f64()
    ));
    for name in ["GlobalMI", "EAVC", "GlobalSUR", "LocalMI", "StraddleZ"] {
        let (traces, failed, time) = run(name);
        let Some(s) = Summary::of(&final_briers(&traces)) else {
            passed = false;
            lines.push(format!("    {name}: no completed replications"));
            continue;
        };
        let below = s.mean < qr.mean;
        let needs_interval = matches!(name, "GlobalMI" | "EAVC");
        let excludes = s.mean + s.two_sem < qr.mean || s.mean - s.two_sem > qr.mean;
        let ok = below && failed == 0 && (!needs_interval || excludes);
        passed &= ok;
        lines.push(format!(
            "    {} {name}: final Brier {:.5} ± {:.5} (n={}, {failed} failed, {:.0}s){}",
            if ok { "ok  " } else { "FAIL" },
            s.mean,
            s.two_sem,
            s.n,
            time.as_secs_f64(),
            if needs_interval {
                format!(
                    "; ±2SEM interval {} the quasi-random mean",
                    if excludes { "excludes" } else { "contains" }
                )
            } else {
                String::new()
            }
        ));
        if name == "GlobalMI" {
            // Learning progress: final Brier below the Brier after the initial design.
            let improved = traces
                .iter()
                .filter(|t| {
                    let first = t.records.iter().find_map(|r| r.brier);
                    let last = t.final_metrics().and_then(|r| r.brier);
                    matches!((first, last), (Some(a), Some(b)) if b < a)
                })
                .count();
            lines.push(format!(
                "    (info) GlobalMI final Brier below iteration-10 Brier in {improved}/{} replications",
                traces.len()
            ));
        }
    }
    let elapsed = start.elapsed();
    passed &= elapsed <= Duration::from_secs(2 * 3600);
    lines.push(format!("    runtime {:.0}s (budget 7200s)", elapsed.as_secs_f64()));
    Outcome {
        passed,
        detail: lines.join("\n"),
    }
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let bounds = problem_by_name("discrim_highdim").unwrap().bounds();
    let mut rates = Vec::new();
    let mut lines = Vec::new();
    let mut all_ok = true;
    for name in ["LocalMI", "EAVC"] {
        let (traces, failed) = run_all(&ExperimentConfig::new("discrim_highdim", name, 150), 10);
        all_ok &= failed == 0 && !traces.is_empty();
        let r: Vec<f64> = traces.iter().map(|t| edge_sample_rate(t, &bounds)).collect();
        let s = Summary::of(&r).unwrap_or(Summary {
            n: 0,
            mean: f64::NAN,
            two_sem: f64::NAN,
        });
        lines.push(format!(
            "    {name}: edge rate {:.3} ± {:.3} (n={}, {failed} failed)",
            s.mean, s.two_sem, s.n
        ));
        rates.push(s.mean);
    }
    let margin = rates[0] - rates[1];
    let elapsed = start.elapsed();
    let passed = all_ok && margin >= 0.15 && elapsed <= Duration::from_secs(2 * 3600);
    lines.push(format!(
        "    LocalMI − EAVC = {margin:.3} (required ≥ 0.15); runtime {:.0}s (budget 7200s)",
        elapsed.as_secs_f64()
    ));
    Outcome {
        passed,
        detail: lines.join("\n"),
    }
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut passed = true;
    for problem_name in ["discrim_lowdim", "discrim_highdim"] {
        let problem = problem_by_name(problem_name).unwrap();
        let bounds = problem.bounds();
        let mut outcomes = blse::harness::stream_rng(8, 0, Stream::Outcomes);
        let mut design = SobolStream::scrambled(bounds.dim(), 8).unwrap();
        let mut data = Dataset::new(bounds.clone());
        for _ in 0..250 {
            let x = bounds.from_unit(&design.next_point());
            let y = problem.sample(&x, &mut outcomes).unwrap();
            data.push(x, y).unwrap();
        }
        let mut fit_rng = blse::harness::stream_rng(8, 0, Stream::Fit);
        let model = fit(&data, &SurrogateConfig::default(), None, &mut fit_rng).expect("fit");
        let unit = SobolStream::scrambled(bounds.dim(), 9).unwrap().draw(500);
        let refset = ReferenceSet::from_unit(&unit, &bounds).unwrap();
        let mut quasi = SobolStream::new(bounds.dim()).unwrap();
        for kind in [
            AcquisitionKind::GlobalSUR,
            AcquisitionKind::GlobalMI,
            AcquisitionKind::EAVC,
        ] {
            let t = Instant::now();
            let result = select_next(
                kind,
                &model,
                Some(&refset),
                problem.theta(),
                &OptimizerBudget::default(),
                1,
                &mut quasi,
            );
            let secs = t.elapsed().as_secs_f64();
            let ok = result.is_ok() && secs < 5.0;
            passed &= ok;
            lines.push(format!(
                "    {} {problem_name} {kind}: {secs:.2}s{}",
                if ok { "ok  " } else { "FAIL" },
                result.err().map(|e| format!(" ({e})")).unwrap_or_default()
            ));
        }
    }
    let elapsed = start.elapsed();
    passed &= elapsed <= Duration::from_secs(60);
    lines.push(format!("    runtime {:.1}s (budget 60s)", elapsed.as_secs_f64()));
    Outcome {
        passed,
        detail: lines.join("\n"),
    }
}

fn main() -> ExitCode {
    let selected: Option<Vec<u32>> = std::env::var("BLSE_CRITERIA")
        .ok()
        .map(|s| s.split(',').filter_map(|v| v.trim().parse().ok()).collect());
    type Criterion = (u32, &'static str, fn() -> Outcome);
    let criteria: [Criterion; 8] = [
        (1, "special functions", || {
            timed(60, || check_special_functions(1000, 101))
        }),
        (2, "tower property", || timed(60, || vec![check_tower(10_000, 102)])),
        (3, "Monte Carlo oracles", || {
            timed(300, || check_monte_carlo(20, 10_000_000, 103))
        }),
        (4, "acquisition composition", || {
            timed(60, || check_composition(2000, 104))
        }),
        (5, "zero-information null", || {
            timed(60, || vec![check_zero_information(1000, 105)])
        }),
        (6, "2-d benchmark ordering", criterion_6),
        (7, "8-d edge sampling", criterion_7),
        (8, "acquisition latency", criterion_8),
    ];
    let mut failures = 0;
    for (id, name, run) in criteria {
        if selected.as_ref().is_some_and(|s| !s.contains(&id)) {
            continue;
        }
        let outcome = run();
        println!(
            "{} criterion {id} ({name})\n{}",
            if outcome.passed { "PASS" } else { "FAIL" },
            outcome.detail
        );
        failures += usize::from(!outcome.passed);
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
