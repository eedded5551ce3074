//! Run one of the sample configurations through the library pipeline.
//!
//! cargo run --release --example run_config -- examples/configs/chain.toml

use std::path::PathBuf;
use std::process::ExitCode;

fn main() -> ExitCode {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/chain.toml")));
    let outcome = ehf::io::run(&path);
    println!("{}", outcome.message);
    if let Some(s) = outcome.summary {
        for (name, value) in &s.entropies {
            println!("{name:>12} = {value:.10}");
        }
        for (name, r) in &s.residuals {
            println!(
                "{name:>28}: {:.2e} (limit {:.0e}) {}",
                r.value,
                r.limit,
                if r.pass { "ok" } else { "FAIL" }
            );
        }
        println!("artifacts: {}", s.artifacts.join(", "));
    }
    ExitCode::from(outcome.code as u8)
}
