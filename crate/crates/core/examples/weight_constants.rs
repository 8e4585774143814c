//! Rectangle A_p / A_1 constants and the sampled Condition (A) estimate.
//!
//! cargo run --release --example weight_constants

use strongmax::weights::{
    a1_constant, ap_constant, condition_a_estimate, multilinear_ap_constant, nu_weight, WeightSuite,
};
use strongmax::RectBasis;

fn main() -> strongmax::Result<()> {
    let dims = [16, 16];
    let suite = WeightSuite::catalog(&dims, 3)?;
    println!("{:<28} {:>12} {:>12} {:>10}", "weight", "A_2", "A_1", "cond (A)");
    for e in suite.entries() {
        // the constants need a positive weight
        if e.weight.min_value() <= 0.0 {
            println!("{:<28} (vanishes somewhere, skipped)", e.label);
            continue;
        }
        let a2 = ap_constant(&e.weight, 2.0, RectBasis::AllRects)?;
        let a1 = a1_constant(&e.weight, RectBasis::AllRects)?;
        let ca = condition_a_estimate(&e.weight, 0.5, 100, 1)?;
        println!("{:<28} {:>12.4} {:>12.4} {:>10.4}", e.label, a2.constant, a1.constant, ca.c_hat);
    }

    let ws = [suite.entries()[0].weight.clone(), suite.entries()[1].weight.clone()];
    let ps = [2.0, 3.0];
    let nu = nu_weight(&ws, &ps)?;
    let multi = multilinear_ap_constant(&ws, &ps, RectBasis::AllRects)?;
    println!("ν over [{}, {}] has mass {:.4}; multilinear A_p constant {:.4} at {}",
        suite.entries()[0].label, suite.entries()[1].label, nu.integral(), multi.constant, multi.argmax);
    Ok(())
}
