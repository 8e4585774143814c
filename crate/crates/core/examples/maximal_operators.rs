//! Every maximal operator on one 2D input, checked against brute force.
//!
//! cargo run --release --example maximal_operators

use strongmax::maximal::{
    brute_force_maximal, evaluate, hl_maximal, iterated_weight, maximizing_rect, MaximalRequest,
};
use strongmax::profiles::Profile;
use strongmax::{RectBasis, YoungFunction};

fn main() -> strongmax::Result<()> {
    let dims = [16, 16];
    let f = Profile::Indicator(0.25, 0.5).generate(&dims, 0)?;
    let g = Profile::Ramp.generate(&dims, 0)?;

    let requests = [
        ("strong", MaximalRequest::new(vec![f.clone()], RectBasis::AllRects)),
        ("dyadic", MaximalRequest::new(vec![f.clone()], RectBasis::Dyadic)),
        ("cubes", MaximalRequest::new(vec![f.clone()], RectBasis::Cubes)),
        ("bilinear", MaximalRequest::new(vec![f.clone(), g.clone()], RectBasis::AllRects)),
        (
            "bilinear L log L",
            MaximalRequest::orlicz(
                vec![f.clone(), g.clone()],
                vec![YoungFunction::LLogK(1.0); 2],
                RectBasis::AllRects,
                1e-12,
            ),
        ),
    ];
    for (name, req) in &requests {
        let fast = evaluate(req)?;
        let slow = brute_force_maximal(req)?;
        let diff = fast.values().iter().zip(slow.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!("{name:<17} max {:.6}  at corner {:.6}  |fast - brute| {diff:.1e}", fast.max_value(), fast.get(&[15, 15]));
    }

    let (rect, value) = maximizing_rect(&requests[0].1, &[15, 15])?;
    println!("best rectangle for (15, 15): {rect} with average {value:.6}");

    // Strong maximal dominates the cube version; iterating enlarges weights.
    let hl = hl_maximal(&f)?;
    println!("cube maximal at (15, 15): {:.6}", hl.get(&[15, 15]));
    let w = iterated_weight(&Profile::DeltaSpike(64.0).generate(&dims, 0)?)?;
    println!("iterated weight of a spike: min {:.6}, max {:.6}", w.min_value(), w.max_value());
    Ok(())
}
