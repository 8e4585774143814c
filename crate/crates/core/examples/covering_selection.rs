//! Greedy half-overlap selection, its audit, the covering check and the
//! λ-scattered selection on a random dyadic family.
//!
//! cargo run --release --example covering_selection

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use strongmax::covering::{
    audit_selection, greedy_half_selection, scattered_max_ratio, random_dyadic_rect,
    scattered_selection, verify_covering_claim,
};
use strongmax::profiles::Profile;
use strongmax::Rect;

fn main() -> strongmax::Result<()> {
    let dims = [32, 32];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let rects: Vec<Rect> = (0..30).map(|_| random_dyadic_rect(&dims, 16, &mut rng)).collect();

    let sel = greedy_half_selection(&rects, &dims)?;
    println!("selected {} of {} rectangles; union covers {} cells", sel.selected.len(), rects.len(), sel.union.count());
    for (i, ratio) in sel.overlap_ratios().iter().enumerate().take(5) {
        println!("  {}  prior overlap {:.3}", sel.selected_rect(i), ratio);
    }
    println!("audit clean: {}", audit_selection(&sel).is_clean());

    let claim = verify_covering_claim(&sel, &rects, 1)?;
    println!("bilinear maximal of the union on the family: min {:.4} (strict > 1/4: {}, >= 1/4: {})",
        claim.min_value, claim.holds, claim.holds_non_strict);

    let w = Profile::Power(-0.5).generate(&dims, 0)?;
    for lambda in [0.3, 0.5, 0.7] {
        let kept = scattered_selection(&rects, lambda, &dims)?;
        let r = scattered_max_ratio(&w, &rects, lambda)?;
        println!("λ = {lambda}: kept {:>2}, worst union ratio {:.4} over {} cuts", kept.len(), r.max_ratio, r.cuts);
    }
    Ok(())
}
