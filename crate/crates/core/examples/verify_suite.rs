//! Runs a small suite and writes reports plus CSV summaries.
//!
//! cargo run --release --example verify_suite [out-dir]

use strongmax::verify::{RunConfig, Theorem};

fn main() -> strongmax::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| std::env::temp_dir().join("strongmax-example-out").display().to_string());
    let mut cfg = RunConfig::default_suite();
    cfg.theorems = vec![Theorem::Tm2, Theorem::Jmz, Theorem::WeightedJmz, Theorem::ThmA];
    cfg.dims_ladder = vec![8, 16];
    println!("config:\n{}", cfg.to_json()?);

    let outcome = strongmax::verify::suite_sweep(&cfg)?;
    for s in &outcome.summary {
        println!("{:<14} {:>3} cases  max ratio {:.4e}  flagged {}", s.theorem.name(), s.cases, s.max_ratio, s.flagged);
    }
    for (family, growth) in outcome.refinement_growth(Theorem::Tm2) {
        println!("  {family:<36} N=8 → 16 growth {growth:.3}");
    }
    outcome.write(std::path::Path::new(&out))?;
    println!("wrote {out}/summary.csv and {} reports", outcome.reports.len());
    Ok(())
}
