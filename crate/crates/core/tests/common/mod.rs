//! Naive reference implementations shared by the integration tests.
//! Nothing here calls the library's maximal engines.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use strongmax::GridFunction;

/// Every box `[lo, hi)` in `dims` as `(lo, hi)` pairs, by nested counting.
pub fn all_boxes(dims: &[usize]) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut out = vec![(Vec::new(), Vec::new())];
    for &n in dims {
        let mut next = Vec::new();
        for (lo, hi) in &out {
            for a in 0..n {
                for b in a + 1..=n {
                    let mut l = lo.clone();
                    let mut h = hi.clone();
                    l.push(a);
                    h.push(b);
                    next.push((l, h));
                }
            }
        }
        out = next;
    }
    out
}

/// Cells of a box, row-major.
pub fn cells(lo: &[usize], hi: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for (a, b) in lo.iter().zip(hi) {
        out = out
            .into_iter()
            .flat_map(|p| {
                (*a..*b).map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}

pub fn flat(dims: &[usize], p: &[usize]) -> usize {
    p.iter().zip(dims).fold(0, |acc, (x, n)| acc * n + x)
}

pub fn distinct_sides(lo: &[usize], hi: &[usize]) -> usize {
    let mut s: Vec<usize> = lo.iter().zip(hi).map(|(a, b)| b - a).collect();
    s.sort_unstable();
    s.dedup();
    s.len()
}

/// `sup` over admissible boxes containing each cell of `value(lo, hi)`.
pub fn naive_sup(
    dims: &[usize],
    admit: impl Fn(&[usize], &[usize]) -> bool,
    value: impl Fn(&[usize], &[usize]) -> f64,
) -> Vec<f64> {
    let total: usize = dims.iter().product();
    let mut out = vec![0.0f64; total];
    for (lo, hi) in all_boxes(dims) {
        if !admit(&lo, &hi) {
            continue;
        }
        let v = value(&lo, &hi);
        for c in cells(&lo, &hi) {
            let i = flat(dims, &c);
            out[i] = out[i].max(v);
        }
    }
    out
}

/// Plain average of `g` over a box.
pub fn naive_avg(g: &GridFunction, lo: &[usize], hi: &[usize]) -> f64 {
    let cs = cells(lo, hi);
    cs.iter().map(|c| g.get(c)).sum::<f64>() / cs.len() as f64
}

/// Multilinear maximal function by direct summation.
pub fn naive_multilinear(fs: &[GridFunction], admit: impl Fn(&[usize], &[usize]) -> bool) -> Vec<f64> {
    naive_sup(fs[0].dims(), admit, |lo, hi| fs.iter().map(|f| naive_avg(f, lo, hi)).product())
}

/// Luxemburg norm by three nested log-scans of 10⁴ points, each refining
/// the bracket of the previous one.
pub fn scan_luxemburg(values: &[f64], psi: impl Fn(f64) -> f64) -> f64 {
    let peak = values.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    let mean = |lam: f64| values.iter().map(|&v| psi(v / lam)).sum::<f64>() / values.len() as f64;
    let (mut lo, mut hi) = (peak * 1e-6, peak * 1e6);
    for _ in 0..3 {
        let steps = 10_000;
        let ratio = (hi / lo).powf(1.0 / steps as f64);
        let mut lam = lo;
        let mut found = hi;
        for _ in 0..=steps {
            if mean(lam) <= 1.0 {
                found = lam;
                break;
            }
            lam *= ratio;
        }
        hi = found;
        lo = found / ratio;
    }
    hi
}

pub fn random_grid(dims: &[usize], seed: u64, scale: f64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells: usize = dims.iter().product();
    GridFunction::new(
        dims.to_vec(),
        (0..cells).map(|_| rng.random::<f64>() * scale).collect(),
        1.0 / cells as f64,
    )
    .unwrap()
}

pub fn assert_close(a: &[f64], b: &[f64], tol: f64) {
    assert_eq!(a.len(), b.len());
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        let scale = x.abs().max(y.abs()).max(f64::MIN_POSITIVE);
        assert!((x - y).abs() <= tol * scale, "index {i}: {x} vs {y}");
    }
}
