//! One line per acceptance criterion at the default settings.
//!
//! `RISNOMA_ACCEPTANCE_TRIALS` and `RISNOMA_ACCEPTANCE_SEED` override the
//! simulation size and master seed.

use std::process::ExitCode;

use risnoma::harness::{validate, CheckStatus, Config, Profile};

const CRITERIA: [(u8, &str); 10] = [
    (1, "typical-user coverage, analytic vs simulated, |gap| <= 0.05"),
    (2, "connected-user coverage, analytic vs simulated, |gap| <= 0.03"),
    (3, "ergodic rates, analytic vs simulated, |gap| <= 0.1 BPCU"),
    (4, "kernel functions against independent quadrature"),
    (5, "closed-form special cases against the general expressions"),
    (6, "large-L coverage limit and high-SNR rate slope"),
    (7, "geometry distributions, KS at the 1% level"),
    (8, "interference Laplace transforms vs Monte Carlo, 2%"),
    (9, "qualitative trends and scenario orderings"),
    (10, "bit-identical output across thread counts"),
];

fn env_u64(key: &str) -> Option<u64> {
    std::env::var(key).ok().and_then(|v| v.parse().ok())
}

fn main() -> ExitCode {
    let mut cfg = Config::paper_defaults();
    if let Some(n) = env_u64("RISNOMA_ACCEPTANCE_TRIALS") {
        cfg.validate.n_trials = n;
    }
    if let Some(s) = env_u64("RISNOMA_ACCEPTANCE_SEED") {
        cfg.validate.master_seed = s;
    }
    let started = std::time::Instant::now();
    let report = validate(&cfg, Profile::Default);
    println!(
        "acceptance: n_trials={} master_seed={} ({:.1?})",
        cfg.validate.n_trials,
        cfg.validate.master_seed,
        started.elapsed()
    );

    let mut failed = 0;
    for (k, title) in CRITERIA {
        let checks: Vec<_> = report.criterion(k).collect();
        let ok = !checks.is_empty() && checks.iter().all(|c| c.status != CheckStatus::Fail);
        let verdict = if ok { "pass" } else { "FAIL" };
        if !ok {
            failed += 1;
        }
        println!("criterion {k:>2} {verdict}  {title}");
        for c in &checks {
            println!(
                "    {:<12} {:<40} {:.4e} (tol {:.4e})  {}",
                c.status, c.name, c.measured, c.tolerance, c.detail
            );
        }
    }
    println!(
        "acceptance: {} of {} criteria pass",
        CRITERIA.len() - failed,
        CRITERIA.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
