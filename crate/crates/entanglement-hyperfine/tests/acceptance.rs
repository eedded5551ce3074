//! Runs all twelve acceptance criteria, one line each. Exits nonzero only
//! when a criterion outside `KNOWN_FAILURES` fails.

use ehf::acceptance;

fn main() {
    let results = acceptance::run_all();
    for r in &results {
        println!("{}", r.line());
    }
    let passed = results.iter().filter(|r| r.passed).count();
    println!("{passed}/{} criteria passed", results.len());
    if !acceptance::suite_ok(&results) {
        std::process::exit(1);
    }
}
