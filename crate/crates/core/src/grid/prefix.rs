use super::{GridFunction, Odometer, Rect};
use crate::error::{domain, Result};

/// Error-free transformation: `a + b = s + e` exactly.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Unevaluated sum `hi + lo` carrying roughly twice the f64 precision.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    #[inline]
    fn add(self, other: DoubleDouble) -> DoubleDouble {
        let (s, e) = two_sum(self.hi, other.hi);
        let e = e + self.lo + other.lo;
        let (hi, lo) = two_sum(s, e);
        DoubleDouble { hi, lo }
    }

    #[inline]
    fn neg(self) -> DoubleDouble {
        DoubleDouble { hi: -self.hi, lo: -self.lo }
    }

    #[inline]
    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// n-dimensional summed-area table.
///
/// Entry `T[y]` holds the sum of values over the box `[0, y_1) x ... x [0, y_n)`,
/// so the table has `(N_1 + 1) ... (N_n + 1)` entries. Partial sums are kept in
/// double-double form: the `2^n`-corner inclusion-exclusion cancels large
/// partial sums against each other, and the extra word keeps that
/// cancellation from eating the digits of small rectangle sums.
#[derive(Clone, Debug)]
pub struct PrefixSum {
    dims: Vec<usize>,
    padded_strides: Vec<usize>,
    cell_measure: f64,
    table: Vec<DoubleDouble>,
}

impl PrefixSum {
    pub fn build(g: &GridFunction) -> Self {
        let dims = g.dims().to_vec();
        let padded: Vec<usize> = dims.iter().map(|n| n + 1).collect();
        let padded_strides = super::strides(&padded).to_vec();
        let mut table = vec![DoubleDouble::default(); padded.iter().product()];
        for (p, &v) in Odometer::full(&dims).zip(g.values()) {
            let idx: usize = p.iter().zip(&padded_strides).map(|(x, s)| (x + 1) * s).sum();
            table[idx] = DoubleDouble { hi: v, lo: 0.0 };
        }
        // cumulative sum along each axis in turn
        for (axis, &stride) in padded_strides.iter().enumerate() {
            let n = padded[axis];
            for start in 0..table.len() {
                // visit each fiber once, from its first element
                if (start / stride) % n != 0 {
                    continue;
                }
                let mut acc = DoubleDouble::default();
                for k in 0..n {
                    let i = start + k * stride;
                    acc = acc.add(table[i]);
                    table[i] = acc;
                }
            }
        }
        PrefixSum { dims, padded_strides, cell_measure: g.cell_measure(), table }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn cell_measure(&self) -> f64 {
        self.cell_measure
    }

    /// Cumulative sum of the values over `[0, y)`; `y` indexes the padded table.
    pub fn corner(&self, y: &[usize]) -> f64 {
        let idx: usize = y.iter().zip(&self.padded_strides).map(|(a, s)| a * s).sum();
        self.table[idx].value()
    }

    /// Sum of raw values over the box `lo..hi` (no cell measure); bounds unchecked.
    #[inline]
    pub(crate) fn raw_sum_bounds(&self, lo: &[usize], hi: &[usize]) -> f64 {
        let n = lo.len();
        let mut acc = DoubleDouble::default();
        for mask in 0u32..(1u32 << n) {
            let mut idx = 0;
            let mut lows = 0;
            for l in 0..n {
                let y = if mask & (1 << l) != 0 { hi[l] } else {
                    lows += 1;
                    lo[l]
                };
                idx += y * self.padded_strides[l];
            }
            let term = self.table[idx];
            acc = acc.add(if lows % 2 == 1 { term.neg() } else { term });
        }
        // exact result is nonnegative; clamp stray negative round-off
        acc.value().max(0.0)
    }

    fn check(&self, r: &Rect) -> Result<()> {
        if r.fits_in(&self.dims) {
            Ok(())
        } else {
            Err(domain(format!("rectangle {r} is outside the lattice {:?}", self.dims)))
        }
    }

    /// Sum of the raw values over `r`, without the cell measure.
    pub fn raw_sum(&self, r: &Rect) -> Result<f64> {
        self.check(r)?;
        Ok(self.raw_sum_bounds(&r.lows(), &r.highs()))
    }

    /// Integral over `r`: sum of values times the cell measure.
    pub fn rect_sum(&self, r: &Rect) -> Result<f64> {
        Ok(self.raw_sum(r)? * self.cell_measure)
    }

    /// Mean value over `r`.
    pub fn rect_average(&self, r: &Rect) -> Result<f64> {
        Ok(self.raw_sum(r)? / r.cell_count() as f64)
    }
}
