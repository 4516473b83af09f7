use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use qlab::harness::config::RunConfig;
use qlab::harness::report::Summary;
use qlab::harness::Harness;

const CRITERIA: [(&str, &str); 12] = [
    ("c01-star-algebra", "exact star algebra on 100 random symbols"),
    ("c02-star-witnesses", "witness products"),
    ("c03-laplace", "Laplace expansion and remainder orders"),
    ("c04-dimension", "rank of the projector"),
    ("c05-spectral-gap", "spectral gap and quasi-idempotency scaling"),
    ("c06-projector-laws", "projector laws and chi iteration orders"),
    ("c07-covariant-diagonal", "covariant diagonal of the projector"),
    ("c08-norm-law", "Toeplitz norm law"),
    ("c09-commutator", "commutator law, literal target"),
    ("c10-symbol-product", "flat patch symbol products"),
    ("c11-locality", "locality of disjoint supports"),
    ("c12-robustness", "independence of the section E"),
];

const STAR_BUDGET: Duration = Duration::from_secs(10);

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn assertion<'a>(s: &'a Summary, id: &str) -> Option<&'a qlab::harness::report::Assertion> {
    s.suites.iter().flat_map(|r| &r.assertions).find(|a| a.id.starts_with(id))
}

fn main() -> ExitCode {
    let harness = Harness::new();
    let mut bad = Vec::new();
    for (n, (file, label)) in CRITERIA.iter().enumerate() {
        let n = n + 1;
        let cfg = match RunConfig::load(&configs().join(format!("{file}.json"))) {
            Ok(c) => c,
            Err(e) => {
                println!("criterion {n:>2}: ERROR {label}: {e}");
                bad.push(n);
                continue;
            }
        };
        let start = Instant::now();
        let summary = match harness.run(&cfg) {
            Ok(s) => s,
            Err(e) => {
                println!("criterion {n:>2}: ERROR {label}: {e}");
                bad.push(n);
                continue;
            }
        };
        let elapsed = start.elapsed();
        let mut passed = summary.passed;
        let mut extra = String::new();
        if n == 1 {
            passed &= elapsed < STAR_BUDGET;
            extra = format!(" in {:.2}s (budget {}s)", elapsed.as_secs_f64(), STAR_BUDGET.as_secs());
        }
        let failing: Vec<&str> = summary.suites.iter().flat_map(|r| r.failures()).map(|a| a.id.as_str()).collect();
        println!(
            "criterion {n:>2}: {} {label}{extra} [{:.1}s]{}",
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            if failing.is_empty() { String::new() } else { format!(" failing: {}", failing.join(", ")) }
        );
        for a in summary.suites.iter().flat_map(|r| &r.assertions) {
            let v = a.value.map(|v| format!("{v:.4e}")).unwrap_or_else(|| "-".into());
            println!("    {} {} value={v} ({})", if a.passed { "ok  " } else { "FAIL" }, a.id, a.requirement);
        }
        if n == 9 {
            // The literal target has the opposite sign of the bracket the operators converge to.
            // The failure is expected; the Poisson-convention target must converge.
            let literal = assertion(&summary, "commutator-order");
            let poisson = assertion(&summary, "commutator-poisson-order");
            let reproduced = matches!((literal, poisson), (Some(l), Some(p)) if !l.passed && p.passed);
            println!(
                "    expected failure: ik[T_f, T_g] converges to T of +2π sin 2πx sin 2πy, so the target with \
                 the minus sign leaves a defect of size about twice the bracket; the same-sign target decays. {}",
                if reproduced { "reproduced" } else { "NOT reproduced" }
            );
            if !reproduced {
                bad.push(n);
            }
            continue;
        }
        if !passed {
            bad.push(n);
        }
    }
    if bad.is_empty() {
        println!("acceptance: all criteria behave as recorded (criterion 9 is an expected literal failure)");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected outcome for criteria {bad:?}");
        ExitCode::FAILURE
    }
}
