use std::process::ExitCode;

use kglab::validation::{run_criterion, CRITERIA};

fn main() -> ExitCode {
    // `cargo test --test acceptance -- 5 7` runs a subset.
    let picked: Vec<u8> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let seed = std::env::var("KGLAB_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(11);
    let mut failed = 0;
    for (id, _) in CRITERIA
        .iter()
        .filter(|c| picked.is_empty() || picked.contains(&c.0))
    {
        let o = run_criterion(*id, seed);
        println!(
            "criterion {:>2} {:<34} {} ({:.1}s) {}",
            o.id,
            o.name,
            if o.passed { "PASS" } else { "FAIL" },
            o.seconds,
            o.summary
        );
        failed += usize::from(!o.passed);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
