//! Acceptance suite: one line per criterion, nonzero exit on any failure.

use pennyfrac::validation::acceptance;

fn main() {
    let verdicts = acceptance::run_all(|v| println!("{}", v.line()));
    let failed: Vec<_> = verdicts.iter().filter(|v| !v.passed).map(|v| v.id).collect();
    println!("{} of {} criteria passed", verdicts.len() - failed.len(), verdicts.len());
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
