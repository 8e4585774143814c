//! Endpoint ratio of stacked corner spikes with Φ_2 versus Φ_2∘Φ_2 along a
//! refinement ladder. Under-iterating should grow; the full iterate should not.
//!
//! cargo run --release --example sharpness_probe

use strongmax::verify::sharpness_probe;

fn main() -> strongmax::Result<()> {
    let report = sharpness_probe(2, 2, 1, &[8, 16, 32, 64])?;
    println!("{:>4} {:>10} {:>10}", "N", "Φ_2", "Φ_2∘Φ_2");
    for r in &report.rows {
        println!("{:>4} {:>10.5} {:>10.5}", r.side, r.ratio_k, r.ratio_m);
    }
    println!("growth: {:.4} vs {:.4}; signature holds: {}", report.growth_k(), report.growth_m(), report.signature_holds());
    Ok(())
}
