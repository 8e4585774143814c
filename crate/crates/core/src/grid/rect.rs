use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use super::{Odometer, Point};
use crate::error::{config, domain, Error, Result};

/// Axis-parallel half-open integer box `[lo_1, hi_1) x ... x [lo_n, hi_n)`.
///
/// Serialized as a list of per-axis `[lo, hi]` pairs.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<[usize; 2]>", into = "Vec<[usize; 2]>")]
pub struct Rect {
    sides: SmallVec<[[usize; 2]; 4]>,
}

impl TryFrom<Vec<[usize; 2]>> for Rect {
    type Error = Error;

    fn try_from(sides: Vec<[usize; 2]>) -> Result<Self> {
        Rect::new(sides)
    }
}

impl From<Rect> for Vec<[usize; 2]> {
    fn from(r: Rect) -> Self {
        r.sides.into_vec()
    }
}

impl Rect {
    pub fn new(sides: impl IntoIterator<Item = [usize; 2]>) -> Result<Self> {
        let sides: SmallVec<[[usize; 2]; 4]> = sides.into_iter().collect();
        if sides.is_empty() {
            return Err(domain("a rectangle needs at least one axis"));
        }
        if let Some([lo, hi]) = sides.iter().find(|[lo, hi]| lo >= hi) {
            return Err(domain(format!("empty interval [{lo}, {hi}) in rectangle")));
        }
        Ok(Rect { sides })
    }

    pub fn from_bounds(lo: &[usize], hi: &[usize]) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(domain("lower and upper corners differ in rank"));
        }
        Self::new(lo.iter().zip(hi).map(|(&a, &b)| [a, b]))
    }

    /// The single-cell box at `point`.
    pub fn cell(point: &[usize]) -> Self {
        Rect { sides: point.iter().map(|&x| [x, x + 1]).collect() }
    }

    pub fn rank(&self) -> usize {
        self.sides.len()
    }

    pub fn lo(&self, axis: usize) -> usize {
        self.sides[axis][0]
    }

    pub fn hi(&self, axis: usize) -> usize {
        self.sides[axis][1]
    }

    pub fn lows(&self) -> Point {
        self.sides.iter().map(|s| s[0]).collect()
    }

    pub fn highs(&self) -> Point {
        self.sides.iter().map(|s| s[1]).collect()
    }

    pub fn intervals(&self) -> &[[usize; 2]] {
        &self.sides
    }

    /// Length of the projection onto `axis`.
    pub fn side(&self, axis: usize) -> usize {
        self.sides[axis][1] - self.sides[axis][0]
    }

    pub fn side_lengths(&self) -> Point {
        self.sides.iter().map(|[lo, hi]| hi - lo).collect()
    }

    pub fn longest_side(&self) -> usize {
        self.sides.iter().map(|[lo, hi]| hi - lo).max().unwrap_or(0)
    }

    /// Number of distinct side lengths.
    pub fn complexity(&self) -> usize {
        distinct(&self.side_lengths())
    }

    pub fn cell_count(&self) -> usize {
        self.sides.iter().map(|[lo, hi]| hi - lo).product()
    }

    pub fn contains(&self, point: &[usize]) -> bool {
        point.len() == self.sides.len()
            && self.sides.iter().zip(point).all(|([lo, hi], x)| lo <= x && x < hi)
    }

    pub fn fits_in(&self, dims: &[usize]) -> bool {
        dims.len() == self.sides.len() && self.sides.iter().zip(dims).all(|([_, hi], n)| hi <= n)
    }

    pub fn intersection(&self, other: &Rect) -> Option<Rect> {
        if self.rank() != other.rank() {
            return None;
        }
        let mut sides = SmallVec::new();
        for ([a, b], [c, d]) in self.sides.iter().zip(&other.sides) {
            let lo = *a.max(c);
            let hi = *b.min(d);
            if lo >= hi {
                return None;
            }
            sides.push([lo, hi]);
        }
        Some(Rect { sides })
    }

    /// Lattice points of the box in row-major order.
    pub fn points(&self) -> impl Iterator<Item = Point> {
        Odometer::new(&self.lows(), &self.highs())
    }

    /// Row-major flat indices (with respect to `dims`) of the cells of the box.
    pub fn flat_indices<'a>(&self, dims: &'a [usize]) -> impl Iterator<Item = usize> + 'a {
        let strides = super::strides(dims);
        self.points()
            .map(move |p| p.iter().zip(strides.iter()).map(|(x, s)| x * s).sum())
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, [lo, hi]) in self.sides.iter().enumerate() {
            if i > 0 {
                write!(f, "x")?;
            }
            write!(f, "[{lo},{hi})")?;
        }
        Ok(())
    }
}

fn distinct(values: &[usize]) -> usize {
    let mut s: Point = values.iter().copied().collect();
    s.sort_unstable();
    s.dedup();
    s.len()
}

/// The rectangle family a maximal function or weight constant ranges over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum RectBasis {
    /// Every in-domain rectangle.
    AllRects,
    /// Products of dyadic intervals `[k 2^j, (k+1) 2^j)` anchored at 0.
    Dyadic,
    /// Rectangles with at most `c` distinct side lengths.
    ComplexityC(usize),
    /// Cubes (one side length).
    Cubes,
}

impl RectBasis {
    pub fn admits(&self, r: &Rect) -> bool {
        match *self {
            RectBasis::AllRects => true,
            RectBasis::Dyadic => r.intervals().iter().all(|[lo, hi]| {
                let s = hi - lo;
                s.is_power_of_two() && lo % s == 0
            }),
            RectBasis::ComplexityC(c) => r.complexity() <= c,
            RectBasis::Cubes => r.complexity() == 1,
        }
    }

    /// Whether the family is invariant under lattice translations (up to the
    /// domain boundary), i.e. determined by its admissible side vectors.
    pub fn is_translation_invariant(&self) -> bool {
        !matches!(self, RectBasis::Dyadic)
    }

    pub fn admits_sides(&self, sides: &[usize]) -> bool {
        match *self {
            RectBasis::AllRects => true,
            RectBasis::Dyadic => sides.iter().all(|s| s.is_power_of_two()),
            RectBasis::ComplexityC(c) => distinct(sides) <= c,
            RectBasis::Cubes => distinct(sides) == 1,
        }
    }

    /// Checks the basis against a lattice shape.
    pub fn validate(&self, dims: &[usize]) -> Result<()> {
        match *self {
            RectBasis::Dyadic => {
                if let Some(n) = dims.iter().find(|n| !n.is_power_of_two()) {
                    return Err(config(format!(
                        "dyadic basis needs power-of-two sides, got {n} in {dims:?}"
                    )));
                }
            }
            RectBasis::ComplexityC(c) => {
                if c == 0 || c > dims.len() {
                    return Err(config(format!(
                        "complexity must lie in 1..={}, got {c}",
                        dims.len()
                    )));
                }
            }
            RectBasis::AllRects | RectBasis::Cubes => {}
        }
        Ok(())
    }
}

impl fmt::Display for RectBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RectBasis::AllRects => write!(f, "all"),
            RectBasis::Dyadic => write!(f, "dyadic"),
            RectBasis::ComplexityC(c) => write!(f, "complexity:{c}"),
            RectBasis::Cubes => write!(f, "cubes"),
        }
    }
}

impl FromStr for RectBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "all" | "rects" => Ok(RectBasis::AllRects),
            "dyadic" => Ok(RectBasis::Dyadic),
            "cubes" => Ok(RectBasis::Cubes),
            other => {
                let c = other
                    .strip_prefix("complexity:")
                    .and_then(|c| c.parse::<usize>().ok())
                    .ok_or_else(|| config(format!("unknown rectangle basis {other:?}")))?;
                if c == 0 {
                    return Err(config("complexity must be at least 1"));
                }
                Ok(RectBasis::ComplexityC(c))
            }
        }
    }
}

impl TryFrom<String> for RectBasis {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<RectBasis> for String {
    fn from(b: RectBasis) -> Self {
        b.to_string()
    }
}

fn axis_intervals(n: usize, dyadic: bool) -> Vec<[usize; 2]> {
    let mut out = Vec::new();
    if dyadic {
        let mut len = 1;
        while len <= n {
            for k in 0..n / len {
                out.push([k * len, (k + 1) * len]);
            }
            len *= 2;
        }
        out.sort_unstable();
    } else {
        for lo in 0..n {
            for hi in lo + 1..=n {
                out.push([lo, hi]);
            }
        }
    }
    out
}

fn axis_intervals_containing(n: usize, x: usize, dyadic: bool) -> Vec<[usize; 2]> {
    let mut out = Vec::new();
    if dyadic {
        let mut len = 1;
        while len <= n {
            let k = x / len;
            out.push([k * len, (k + 1) * len]);
            len *= 2;
        }
        out.sort_unstable();
    } else {
        for lo in 0..=x {
            for hi in x + 1..=n {
                out.push([lo, hi]);
            }
        }
    }
    out
}

fn product_filtered(per_axis: &[Vec<[usize; 2]>], basis: RectBasis) -> Vec<Rect> {
    let counts: Point = per_axis.iter().map(|v| v.len()).collect();
    let zeros: Point = SmallVec::from_elem(0, counts.len());
    Odometer::new(&zeros, &counts)
        .map(|idx| Rect {
            sides: idx.iter().zip(per_axis).map(|(&i, v)| v[i]).collect(),
        })
        .filter(|r| basis.admits(r))
        .collect()
}

/// Every rectangle of `basis` inside the lattice `dims`.
///
/// Order is lexicographic in `(lo_1, hi_1, lo_2, hi_2, ...)`, axis 0 outermost;
/// two calls return identical sequences.
pub fn enumerate_rects(dims: &[usize], basis: RectBasis) -> Result<Vec<Rect>> {
    super::validate_dims(dims, usize::MAX)?;
    basis.validate(dims)?;
    let dyadic = basis == RectBasis::Dyadic;
    let per_axis: Vec<_> = dims.iter().map(|&n| axis_intervals(n, dyadic)).collect();
    Ok(product_filtered(&per_axis, basis))
}

/// The rectangles of `basis` that contain the lattice point `x`, in the same
/// order as [`enumerate_rects`].
pub fn rects_containing(x: &[usize], dims: &[usize], basis: RectBasis) -> Result<Vec<Rect>> {
    super::validate_dims(dims, usize::MAX)?;
    basis.validate(dims)?;
    if x.len() != dims.len() || x.iter().zip(dims).any(|(a, n)| a >= n) {
        return Err(domain(format!("point {x:?} is outside the lattice {dims:?}")));
    }
    let dyadic = basis == RectBasis::Dyadic;
    let per_axis: Vec<_> = dims
        .iter()
        .zip(x)
        .map(|(&n, &xi)| axis_intervals_containing(n, xi, dyadic))
        .collect();
    Ok(product_filtered(&per_axis, basis))
}

/// Admissible side-length vectors of `basis` on `dims`, lexicographic order.
pub fn side_vectors(dims: &[usize], basis: RectBasis) -> Vec<Point> {
    let ones: Point = SmallVec::from_elem(1, dims.len());
    let ends: Point = dims.iter().map(|n| n + 1).collect();
    Odometer::new(&ones, &ends)
        .filter(|s| basis.admits_sides(s))
        .filter(|s| basis != RectBasis::Dyadic || s.iter().zip(dims).all(|(a, n)| n % a == 0))
        .collect()
}

/// Size of the rectangle family without materialising it.
pub fn count_rects(dims: &[usize], basis: RectBasis) -> Result<u128> {
    super::validate_dims(dims, usize::MAX)?;
    basis.validate(dims)?;
    Ok(match basis {
        RectBasis::AllRects => dims
            .iter()
            .map(|&n| (n as u128) * (n as u128 + 1) / 2)
            .product(),
        RectBasis::Dyadic => dims.iter().map(|&n| 2 * n as u128 - 1).product(),
        _ => side_vectors(dims, basis)
            .iter()
            .map(|s| {
                s.iter()
                    .zip(dims)
                    .map(|(a, n)| (n - a + 1) as u128)
                    .product::<u128>()
            })
            .sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_counts() {
        assert_eq!(enumerate_rects(&[4], RectBasis::AllRects).unwrap().len(), 10);
        assert_eq!(enumerate_rects(&[4, 4], RectBasis::Dyadic).unwrap().len(), 49);
        assert_eq!(count_rects(&[4, 4], RectBasis::Dyadic).unwrap(), 49);
        assert_eq!(count_rects(&[8, 8], RectBasis::AllRects).unwrap(), 1296);
    }

    #[test]
    fn dyadic_needs_powers_of_two() {
        assert!(matches!(
            enumerate_rects(&[6, 4], RectBasis::Dyadic),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn complexity_out_of_range() {
        assert!(enumerate_rects(&[4, 4], RectBasis::ComplexityC(3)).is_err());
        assert!("complexity:0".parse::<RectBasis>().is_err());
    }

    #[test]
    fn dyadic_containing_origin() {
        let got = rects_containing(&[0], &[4], RectBasis::Dyadic).unwrap();
        let want: Vec<Rect> = [[0, 1], [0, 2], [0, 4]]
            .iter()
            .map(|s| Rect::new([*s]).unwrap())
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn cubes_match_complexity_one() {
        let a = enumerate_rects(&[8, 8], RectBasis::Cubes).unwrap();
        let b = enumerate_rects(&[8, 8], RectBasis::ComplexityC(1)).unwrap();
        assert_eq!(a, b);
        // brute force: all rectangles with equal sides, deduplicated
        let mut brute = Vec::new();
        for x0 in 0..8 {
            for x1 in x0 + 1..=8 {
                for y0 in 0..8 {
                    for y1 in y0 + 1..=8 {
                        if x1 - x0 == y1 - y0 {
                            brute.push((x0, x1, y0, y1));
                        }
                    }
                }
            }
        }
        brute.sort();
        brute.dedup();
        assert_eq!(a.len(), brute.len());
        assert_eq!(count_rects(&[8, 8], RectBasis::Cubes).unwrap(), brute.len() as u128);
    }

    #[test]
    fn basis_nesting_by_complexity() {
        let dims = [4, 3, 4];
        for c in 1..3 {
            let small = enumerate_rects(&dims, RectBasis::ComplexityC(c)).unwrap();
            let big: std::collections::HashSet<_> = enumerate_rects(&dims, RectBasis::ComplexityC(c + 1))
                .unwrap()
                .into_iter()
                .collect();
            assert!(small.iter().all(|r| big.contains(r)));
        }
        let full = enumerate_rects(&dims, RectBasis::ComplexityC(3)).unwrap();
        assert_eq!(full, enumerate_rects(&dims, RectBasis::AllRects).unwrap());
    }

    #[test]
    fn containing_equals_filtered_enumeration() {
        for basis in [RectBasis::AllRects, RectBasis::Dyadic, RectBasis::Cubes, RectBasis::ComplexityC(1)] {
            let dims = [4, 8];
            let all = enumerate_rects(&dims, basis).unwrap();
            for x in [[0, 0], [3, 5], [2, 7]] {
                let filtered: Vec<_> = all.iter().filter(|r| r.contains(&x)).cloned().collect();
                assert_eq!(rects_containing(&x, &dims, basis).unwrap(), filtered);
            }
        }
    }

    #[test]
    fn rect_json_shape() {
        let r = Rect::new([[0, 2], [1, 4]]).unwrap();
        assert_eq!(serde_json::to_string(&r).unwrap(), "[[0,2],[1,4]]");
        assert!(serde_json::from_str::<Rect>("[[2,2]]").is_err());
        assert_eq!(r.to_string(), "[0,2)x[1,4)");
    }
}
