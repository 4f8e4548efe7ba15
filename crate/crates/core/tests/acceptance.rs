//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qchain::exactnum::{rational, QuadraticNumber};
use qchain::format::{trajectory_csv, write_trajectory};
use qchain::markov::{
    build_distribution, compose, conditional_moment_residual, empirical_conditional_moment,
    empirical_moment_against, exact_setup, k_step_distribution, simulate, simulate_batch,
    ChainConfig, MassPolicy,
};
use qchain::spectra::{
    hermite_limit_identity, rational_grid, verify_addition_formula, verify_chi_properties,
    verify_factorization,
};
use qchain::{QParams, Rational, Report, Result};

type Outcome = std::result::Result<String, String>;

fn exact_qs() -> [Rational; 2] {
    [rational(4, 1), rational(9, 4)]
}

fn exact_ys() -> [Rational; 3] {
    [rational(0, 1), rational(1, 1), rational(-3, 7)]
}

fn checked(report: Result<Report>) -> std::result::Result<Report, String> {
    match report {
        Ok(r) => Ok(r),
        Err(qchain::Error::VerificationFailed(r)) => Err(r.to_json()),
        Err(e) => Err(e.to_string()),
    }
}

fn factorization() -> Outcome {
    let grid = rational_grid(10);
    let mut points = 0;
    for q in exact_qs() {
        let params = QParams::new(q).map_err(|e| e.to_string())?;
        for m in 1..=8 {
            points += checked(verify_factorization(m, &params, &grid, 0.0))?.points_checked;
        }
    }
    Ok(format!("{points} grid evaluations, all identical"))
}

fn chapman_kolmogorov() -> Outcome {
    let mut pairs = 0;
    for q in exact_qs() {
        for y in exact_ys() {
            let (params, y) = exact_setup(&q, &y).map_err(|e| e.to_string())?;
            for m in 2..=4 {
                let outer = build_distribution(m, &y, &params, MassPolicy::Strict).map_err(|e| e.to_string())?;
                for n in 2..=4 {
                    let composed = compose(&outer, n, MassPolicy::Strict).map_err(|e| e.to_string())?;
                    let direct = build_distribution(m + n - 1, &y, &params, MassPolicy::Strict)
                        .map_err(|e| e.to_string())?;
                    if composed != direct {
                        return Err(format!("m={m} n={n} q={} y={y}", params.q()));
                    }
                    pairs += 1;
                }
            }
        }
    }
    Ok(format!("{pairs} compositions equal the direct build atom for atom"))
}

fn moment_law() -> Outcome {
    let mut rows = 0;
    for q in exact_qs() {
        for y in exact_ys() {
            let (params, y) = exact_setup(&q, &y).map_err(|e| e.to_string())?;
            for m in 2..=6 {
                let dist = build_distribution(m, &y, &params, MassPolicy::Strict).map_err(|e| e.to_string())?;
                for j in 1..m {
                    let residual = conditional_moment_residual(&dist, j).map_err(|e| e.to_string())?;
                    if residual != QuadraticNumber::from_rational(rational(0, 1)) {
                        return Err(format!("m={m} j={j} q={q} y={y}: residual {residual}"));
                    }
                    rows += 1;
                }
            }
        }
    }
    Ok(format!("{rows} moment equations hold exactly"))
}

fn chi_identities() -> Outcome {
    let mut points = 0;
    for y in exact_ys() {
        let (params, y) = exact_setup(&rational(4, 1), &y).map_err(|e| e.to_string())?;
        for m in -5..=5 {
            for n in -5..=5 {
                points += checked(verify_chi_properties(m, n, &y, &params, 0.0))?.points_checked;
            }
        }
    }
    Ok(format!("{points} exact checks"))
}

fn addition_formula() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let angles: Vec<(f64, f64)> = (0..50)
        .map(|_| (rng.gen_range(0.0..std::f64::consts::TAU), rng.gen_range(0.0..std::f64::consts::TAU)))
        .collect();
    let mut worst = 0.0f64;
    let mut count = 0;
    for q in [0.3, 0.7, 2.5] {
        for n in 0..=10 {
            for &(theta, phi) in &angles {
                let report = checked(verify_addition_formula(n, theta, phi, q, 1e-8, 1e-10))?;
                worst = worst.max(report.max_residual);
                count += 1;
            }
        }
    }
    Ok(format!("{count} cases, max relative deviation {worst:.1e}"))
}

fn hermite_limit() -> Outcome {
    let grid = rational_grid(6);
    let mut count = 0;
    for m in 0..=10 {
        for (x, y) in &grid {
            checked(hermite_limit_identity(m, x, y))?;
            count += 1;
        }
    }
    Ok(format!("{count} exact checks against (x - y)^m"))
}

fn monte_carlo() -> Outcome {
    const N: usize = 100_000;
    let config = ChainConfig::new(4.0, 2, 1.0, 2).with_seed(20_240);
    let trajs = simulate_batch(&config, N).map_err(|e| e.to_string())?;
    let params = QParams::new(4.0).map_err(|e| e.to_string())?;
    let dist = build_distribution(2, &1.0, &params, MassPolicy::Strict).map_err(|e| e.to_string())?;

    let mut lines = Vec::new();
    for (k, atom) in dist.atoms() {
        let hits = trajs.iter().filter(|t| t.jumps[0] == *k).count();
        let freq = hits as f64 / N as f64;
        let se = (atom.mass * (1.0 - atom.mass) / N as f64).sqrt();
        let z = (freq - atom.mass) / se;
        if z.abs() > 4.0 {
            return Err(format!("atom {k}: frequency {freq} vs mass {} (z = {z:.2})", atom.mass));
        }
        lines.push(format!("freq[{k}] z={z:.2}"));
    }

    let lag1 = empirical_conditional_moment(&trajs, 1, 1).map_err(|e| e.to_string())?;
    let g1 = lag1.group("1").ok_or("no lag-1 group at y = 1")?;
    if g1.count != N || g1.expected != 0.5 || g1.z.abs() > 4.0 {
        return Err(format!("lag 1: {g1:?}"));
    }
    lines.push(format!("lag1 mean {:.4} z={:.2}", g1.mean, g1.z));

    let two_step = k_step_distribution(2, 2, &1.0, &params, MassPolicy::Strict).map_err(|e| e.to_string())?;
    if two_step.order() != 3 || (two_step.mean() - 0.25).abs() > 1e-12 {
        return Err(format!("Lambda(3, 1, 4) mean {}", two_step.mean()));
    }
    let lag2 = empirical_moment_against(&trajs, 1, 2, |y| {
        Ok(k_step_distribution(2, 2, y, &params, MassPolicy::Strict)?.mean())
    })
    .map_err(|e| e.to_string())?;
    let g2 = lag2.group("1").ok_or("no lag-2 group at y = 1")?;
    if g2.count != N || g2.z.abs() > 4.0 {
        return Err(format!("lag 2: {g2:?}"));
    }
    lines.push(format!("lag2 mean {:.4} z={:.2}", g2.mean, g2.z));
    Ok(lines.join(", "))
}

fn determinism() -> Outcome {
    let config = ChainConfig::new(2.25, 3, -0.4, 200).with_seed(42);
    let a = trajectory_csv(&simulate(&config).map_err(|e| e.to_string())?);
    let b = trajectory_csv(&simulate(&config).map_err(|e| e.to_string())?);
    if a != b {
        return Err("in-process CSVs differ".into());
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut files = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let path = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_qchain"))
            .args(["simulate", "--m", "3", "--y", "-0.4", "--q", "9/4", "--steps", "200", "--seed", "42", "--out"])
            .arg(&path)
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("simulate exited with {status}"));
        }
        files.push(std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    if files[0] != files[1] {
        return Err("CLI CSVs differ".into());
    }
    if files[0] != a.as_bytes() {
        return Err("CLI and library CSVs differ".into());
    }

    let (params, y) = exact_setup(&rational(4, 1), &rational(1, 1)).map_err(|e| e.to_string())?;
    let exact = ChainConfig::new(params.q().clone(), 2, y, 6).with_seed(42);
    let p1 = dir.path().join("e1.csv");
    let p2 = dir.path().join("e2.csv");
    write_trajectory(&p1, &simulate(&exact).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    write_trajectory(&p2, &simulate(&exact).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    if std::fs::read(&p1).ok() != std::fs::read(&p2).ok() {
        return Err("exact CSVs differ".into());
    }
    Ok(format!("{} bytes identical across runs (library, CLI, exact mode)", files[0].len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Option<Duration>); 8] = [
        ("1 exact factorization", factorization, Some(Duration::from_secs(10))),
        ("2 exact Chapman-Kolmogorov", chapman_kolmogorov, Some(Duration::from_secs(30))),
        ("3 moment law", moment_law, None),
        ("4 root/composition identities", chi_identities, None),
        ("5 addition formula", addition_formula, Some(Duration::from_secs(5))),
        ("6 q -> 1 limit identity", hermite_limit, None),
        ("7 Monte Carlo kernel consistency", monte_carlo, Some(Duration::from_secs(10))),
        ("8 determinism", determinism, None),
    ];
    let mut failures = 0;
    for (name, check, budget) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let over = budget.filter(|b| elapsed > *b);
        let (status, detail) = match (&outcome, over) {
            (Ok(detail), None) => ("PASS", detail.clone()),
            (Ok(detail), Some(b)) => ("FAIL", format!("{detail}; over the {b:?} budget")),
            (Err(detail), _) => ("FAIL", detail.clone()),
        };
        if status == "FAIL" {
            failures += 1;
        }
        println!("criterion {name}: {status} ({:.2}s) {detail}", elapsed.as_secs_f64());
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
