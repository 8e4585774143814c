//! Discrete domain model: nonnegative functions on an n-dimensional lattice,
//! axis-parallel half-open boxes, rectangle families, and prefix-sum tables
//! that answer rectangle sums in O(2^n).
//!
//! Lattice points are addressed row-major: the last axis varies fastest.
//! Only rectangles lying completely inside the lattice exist; a rectangle
//! that would stick out of the domain is never enumerated.

mod prefix;
mod rect;

pub use prefix::PrefixSum;
pub use rect::{count_rects, enumerate_rects, rects_containing, side_vectors, Rect, RectBasis};

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{config, domain, Error, Result};

/// Rank ceiling applied by [`GridFunction::new`]. Larger ranks are possible
/// through [`GridFunction::with_max_rank`], at the caller's risk of blowing up
/// the rectangle counts.
pub const DEFAULT_MAX_RANK: usize = 4;

/// A lattice point, one coordinate per axis.
pub type Point = SmallVec<[usize; 4]>;

/// Row-major strides for `dims`.
pub fn strides(dims: &[usize]) -> Point {
    let mut s: Point = SmallVec::from_elem(1, dims.len());
    for l in (0..dims.len().saturating_sub(1)).rev() {
        s[l] = s[l + 1] * dims[l + 1];
    }
    s
}

/// Checks that `dims` describes a nonempty lattice of rank `1..=max_rank`.
pub fn validate_dims(dims: &[usize], max_rank: usize) -> Result<()> {
    if dims.is_empty() || dims.len() > max_rank {
        return Err(domain(format!(
            "grid rank must be in 1..={max_rank}, got {}",
            dims.len()
        )));
    }
    if dims.iter().any(|&d| d == 0) {
        return Err(domain(format!("every axis needs at least one cell, got {dims:?}")));
    }
    Ok(())
}

/// Iterates the lattice points of the box `lo..hi` in row-major order.
pub(crate) struct Odometer {
    lo: Point,
    hi: Point,
    cur: Point,
    done: bool,
}

impl Odometer {
    pub(crate) fn new(lo: &[usize], hi: &[usize]) -> Self {
        let done = lo.iter().zip(hi).any(|(a, b)| a >= b);
        Odometer {
            lo: lo.iter().copied().collect(),
            hi: hi.iter().copied().collect(),
            cur: lo.iter().copied().collect(),
            done,
        }
    }

    pub(crate) fn full(dims: &[usize]) -> Self {
        let zeros: Point = SmallVec::from_elem(0, dims.len());
        Self::new(&zeros, dims)
    }
}

impl Iterator for Odometer {
    type Item = Point;

    fn next(&mut self) -> Option<Point> {
        if self.done {
            return None;
        }
        let out = self.cur.clone();
        let mut l = self.cur.len();
        loop {
            if l == 0 {
                self.done = true;
                break;
            }
            l -= 1;
            self.cur[l] += 1;
            if self.cur[l] < self.hi[l] {
                break;
            }
            self.cur[l] = self.lo[l];
        }
        Some(out)
    }
}

/// Nonnegative real values on a finite n-dimensional lattice together with
/// the measure of a single cell.
///
/// Stands in for functions and weights alike. The Lebesgue measure of a set
/// of cells is its cell count times `cell_measure`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridFile")]
pub struct GridFunction {
    dims: Vec<usize>,
    cell_measure: f64,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct GridFile {
    dims: Vec<usize>,
    #[serde(default = "one")]
    cell_measure: f64,
    values: Vec<f64>,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<GridFile> for GridFunction {
    type Error = Error;

    fn try_from(raw: GridFile) -> Result<Self> {
        GridFunction::new(raw.dims, raw.values, raw.cell_measure)
    }
}

impl GridFunction {
    pub fn new(dims: Vec<usize>, values: Vec<f64>, cell_measure: f64) -> Result<Self> {
        Self::with_max_rank(dims, values, cell_measure, DEFAULT_MAX_RANK)
    }

    pub fn with_max_rank(
        dims: Vec<usize>,
        values: Vec<f64>,
        cell_measure: f64,
        max_rank: usize,
    ) -> Result<Self> {
        validate_dims(&dims, max_rank)?;
        let len: usize = dims.iter().product();
        if values.len() != len {
            return Err(domain(format!(
                "dims {dims:?} need {len} values, got {}",
                values.len()
            )));
        }
        if !(cell_measure.is_finite() && cell_measure > 0.0) {
            return Err(domain(format!("cell measure must be positive, got {cell_measure}")));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(domain(format!("value {v} at flat index {i} is not a finite nonnegative real")));
        }
        Ok(GridFunction { dims, cell_measure, values })
    }

    /// Builds a grid from possibly signed data by taking absolute values.
    pub fn from_abs(dims: Vec<usize>, values: Vec<f64>, cell_measure: f64) -> Result<Self> {
        let values = values.into_iter().map(f64::abs).collect();
        Self::new(dims, values, cell_measure)
    }

    pub fn from_fn(
        dims: &[usize],
        cell_measure: f64,
        mut f: impl FnMut(&[usize]) -> f64,
    ) -> Result<Self> {
        validate_dims(dims, DEFAULT_MAX_RANK)?;
        let values = Odometer::full(dims).map(|p| f(&p)).collect();
        Self::new(dims.to_vec(), values, cell_measure)
    }

    pub fn constant(dims: &[usize], value: f64) -> Result<Self> {
        Self::from_fn(dims, 1.0, |_| value)
    }

    pub fn zeros(dims: &[usize]) -> Result<Self> {
        Self::constant(dims, 0.0)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn cell_measure(&self) -> f64 {
        self.cell_measure
    }

    /// Same values, different cell measure.
    pub fn with_cell_measure(mut self, cell_measure: f64) -> Result<Self> {
        if !(cell_measure.is_finite() && cell_measure > 0.0) {
            return Err(domain(format!("cell measure must be positive, got {cell_measure}")));
        }
        self.cell_measure = cell_measure;
        Ok(self)
    }

    pub fn flat_index(&self, point: &[usize]) -> usize {
        let mut idx = 0;
        for (x, n) in point.iter().zip(&self.dims) {
            idx = idx * n + x;
        }
        idx
    }

    pub fn point_of(&self, mut flat: usize) -> Point {
        let mut p: Point = SmallVec::from_elem(0, self.dims.len());
        for l in (0..self.dims.len()).rev() {
            p[l] = flat % self.dims[l];
            flat /= self.dims[l];
        }
        p
    }

    pub fn get(&self, point: &[usize]) -> f64 {
        self.values[self.flat_index(point)]
    }

    pub fn contains_point(&self, point: &[usize]) -> bool {
        point.len() == self.dims.len() && point.iter().zip(&self.dims).all(|(x, n)| x < n)
    }

    /// Applies `f` to every value; the result must stay finite and nonnegative.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = self.values.iter().map(|&v| f(v)).collect();
        Self::with_max_rank(self.dims.clone(), values, self.cell_measure, usize::MAX)
    }

    /// Pointwise combination of two grids of identical shape.
    pub fn zip_map(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_shape(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::with_max_rank(self.dims.clone(), values, self.cell_measure, usize::MAX)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        self.map(|v| v * factor)
    }

    pub fn check_same_shape(&self, other: &GridFunction) -> Result<()> {
        if self.dims != other.dims {
            return Err(domain(format!(
                "shape mismatch: {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        if self.cell_measure != other.cell_measure {
            return Err(domain(format!(
                "cell measure mismatch: {} vs {}",
                self.cell_measure, other.cell_measure
            )));
        }
        Ok(())
    }

    /// Measure of the whole lattice.
    pub fn domain_measure(&self) -> f64 {
        self.values.len() as f64 * self.cell_measure
    }

    /// Riemann cell sum of the values.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_measure
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Reads a two-dimensional grid from CSV, one line per grid row, no header.
    pub fn from_csv_reader(reader: impl Read, cell_measure: f64) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut values = Vec::new();
        let mut rows = 0usize;
        let mut cols = None;
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            let width = record.len();
            match cols {
                None => cols = Some(width),
                Some(c) if c != width => {
                    return Err(domain(format!(
                        "csv line {}: expected {c} columns, found {width}",
                        line + 1
                    )))
                }
                _ => {}
            }
            for field in record.iter() {
                let v: f64 = field.parse().map_err(|_| {
                    domain(format!("csv line {}: cannot parse {field:?} as a number", line + 1))
                })?;
                values.push(v);
            }
            rows += 1;
        }
        let cols = cols.ok_or_else(|| domain("csv grid is empty"))?;
        Self::new(vec![rows, cols], values, cell_measure)
    }

    /// Loads a grid from a `.json` or `.csv` file.
    pub fn read_path(path: &Path) -> Result<Self> {
        let is_csv = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        let file = std::fs::File::open(path)?;
        if is_csv {
            Self::from_csv_reader(file, 1.0)
        } else {
            Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
        }
    }
}

/// Boolean lattice mask, used for unions of rectangles and level sets.
///
/// Serialized as `{"dims": [...], "runs": [...]}` with [`Mask::run_lengths`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MaskFile", into = "MaskFile")]
pub struct Mask {
    dims: Vec<usize>,
    bits: Vec<bool>,
}

impl Mask {
    pub fn empty(dims: &[usize]) -> Self {
        Mask { dims: dims.to_vec(), bits: vec![false; dims.iter().product()] }
    }

    pub fn from_rect(dims: &[usize], r: &Rect) -> Self {
        let mut m = Self::empty(dims);
        m.insert_rect(r);
        m
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn get(&self, flat: usize) -> bool {
        self.bits[flat]
    }

    pub fn insert_rect(&mut self, r: &Rect) {
        for i in r.flat_indices(&self.dims) {
            self.bits[i] = true;
        }
    }

    pub fn remove(&mut self, flat: usize) {
        self.bits[flat] = false;
    }

    /// Number of cells of `r` already in the mask.
    pub fn count_in_rect(&self, r: &Rect) -> usize {
        r.flat_indices(&self.dims).filter(|&i| self.bits[i]).count()
    }

    pub fn is_disjoint(&self, other: &Mask) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| !(*a && *b))
    }

    pub fn union_with(&mut self, other: &Mask) {
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= *b;
        }
    }

    /// Indicator function of the mask with the given cell measure.
    pub fn indicator(&self, cell_measure: f64) -> GridFunction {
        let values = self.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        GridFunction::with_max_rank(self.dims.clone(), values, cell_measure, usize::MAX)
            .expect("indicator values are valid")
    }

    /// Inverse of [`Mask::run_lengths`].
    pub fn from_run_lengths(dims: &[usize], runs: &[usize]) -> Result<Self> {
        let mut bits = Vec::with_capacity(dims.iter().product());
        let mut current = false;
        for &r in runs {
            bits.extend(std::iter::repeat_n(current, r));
            current = !current;
        }
        if bits.len() != dims.iter().product::<usize>() {
            return Err(config(format!(
                "run lengths cover {} cells, lattice {dims:?} has {}",
                bits.len(),
                dims.iter().product::<usize>()
            )));
        }
        Ok(Mask { dims: dims.to_vec(), bits })
    }

    /// Run-length encoding in row-major order: alternating run lengths,
    /// starting with a run of `false` cells (possibly of length zero).
    pub fn run_lengths(&self) -> Vec<usize> {
        let mut runs = Vec::new();
        let mut current = false;
        let mut len = 0usize;
        for &b in &self.bits {
            if b == current {
                len += 1;
            } else {
                runs.push(len);
                current = b;
                len = 1;
            }
        }
        runs.push(len);
        runs
    }
}

#[derive(Serialize, Deserialize)]
struct MaskFile {
    dims: Vec<usize>,
    runs: Vec<usize>,
}

impl TryFrom<MaskFile> for Mask {
    type Error = Error;

    fn try_from(m: MaskFile) -> Result<Self> {
        Mask::from_run_lengths(&m.dims, &m.runs)
    }
}

impl From<Mask> for MaskFile {
    fn from(m: Mask) -> Self {
        MaskFile { runs: m.run_lengths(), dims: m.dims }
    }
}
