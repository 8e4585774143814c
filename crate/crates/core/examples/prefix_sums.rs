//! Summed-area tables: O(2^n) rectangle sums after one O(N) pass.
//!
//! cargo run --example prefix_sums

use strongmax::grid::{count_rects, enumerate_rects};
use strongmax::{GridFunction, PrefixSum, Rect, RectBasis};

fn main() -> strongmax::Result<()> {
    // 4x6 grid holding x + 10 y; unit cells.
    let g = GridFunction::from_fn(&[4, 8], 1.0, |p| (p[0] + 10 * p[1]) as f64)?;
    let ps = PrefixSum::build(&g);

    let r = Rect::from_bounds(&[1, 2], &[3, 5])?;
    let direct: f64 = r.points().map(|p| g.get(&p)).sum();
    println!("rect {r}: sum {} (direct {direct}), average {}", ps.rect_sum(&r)?, ps.rect_average(&r)?);

    for basis in [RectBasis::AllRects, RectBasis::Dyadic, RectBasis::ComplexityC(1), RectBasis::Cubes] {
        let n = count_rects(g.dims(), basis)?;
        let listed = enumerate_rects(g.dims(), basis)?.len();
        println!("{:>14}: {n} rectangles ({listed} enumerated)", basis.to_string());
    }
    Ok(())
}
