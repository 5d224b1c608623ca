//! Acceptance suite: prints one PASS/FAIL line per criterion and fails the
//! run if any criterion fails.

use bichrome::battery;

fn main() {
    let jobs = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(8);
    let (mut total, mut failed) = (0, 0);
    battery::run_each(jobs, |o| {
        println!("{}  ({:.2}s)", o.line(), o.elapsed.as_secs_f64());
        total += 1;
        if !o.pass {
            failed += 1;
        }
    });
    println!("acceptance: {} of {total} criteria pass", total - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
