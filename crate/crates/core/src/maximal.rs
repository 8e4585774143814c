//! Maximal operators as grid-to-grid transforms.
//!
//! Every operator is an instance of one kernel: for each lattice point `x`,
//! the maximum over the basis rectangles `R ∋ x` of `∏_j A_j(R)`, where
//! `A_j(R)` is either the mean of `f_j` over `R` or a Luxemburg average.
//! [`evaluate`] is the fast path; [`brute_force_maximal`] is the reference
//! implementation with direct loops.
//!
//! The fast path never visits a rectangle twice. For translation-invariant
//! bases it groups rectangles by side vector `s`: the factor product is
//! computed once at every admissible position, and the maximum over the
//! positions whose rectangle covers `x` is a box-shaped sliding maximum,
//! taken one axis at a time. Dyadic rectangles of a fixed size tile the
//! lattice, so there each point reads its own tile directly.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Error, Result};
use crate::grid::{
    count_rects, enumerate_rects, rects_containing, side_vectors, strides, GridFunction, Odometer,
    Point, PrefixSum, Rect, RectBasis,
};
use crate::young::{luxemburg_norm_values, YoungFunction};

/// Rectangle count above which [`brute_force_maximal`] refuses to run.
pub const BRUTE_FORCE_LIMIT: u128 = 1_000_000;

/// Inputs of a (multilinear, possibly Orlicz) maximal function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaximalRequest {
    pub inputs: Vec<GridFunction>,
    pub basis: RectBasis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub young: Option<Vec<YoungFunction>>,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    1e-9
}

impl MaximalRequest {
    pub fn new(inputs: Vec<GridFunction>, basis: RectBasis) -> Self {
        MaximalRequest { inputs, basis, young: None, tol: default_tol() }
    }

    pub fn orlicz(
        inputs: Vec<GridFunction>,
        young: Vec<YoungFunction>,
        basis: RectBasis,
        tol: f64,
    ) -> Self {
        MaximalRequest { inputs, basis, young: Some(young), tol }
    }

    pub fn dims(&self) -> &[usize] {
        self.inputs[0].dims()
    }

    pub fn validate(&self) -> Result<()> {
        let first = self
            .inputs
            .first()
            .ok_or_else(|| config("a maximal request needs at least one input"))?;
        for g in &self.inputs[1..] {
            first.check_same_shape(g)?;
        }
        self.basis.validate(first.dims())?;
        if let Some(ys) = &self.young {
            if ys.len() != self.inputs.len() {
                return Err(config(format!(
                    "{} Young functions for {} inputs",
                    ys.len(),
                    self.inputs.len()
                )));
            }
            if !(self.tol.is_finite() && self.tol > 0.0) {
                return Err(config(format!("tolerance must be positive, got {}", self.tol)));
            }
        }
        Ok(())
    }
}

/// Per-rectangle factor product, in the two flavours the engine needs.
enum Factors<'a> {
    Means(Vec<PrefixSum>),
    Orlicz { inputs: &'a [GridFunction], young: &'a [YoungFunction], tol: f64 },
}

impl<'a> Factors<'a> {
    fn new(req: &'a MaximalRequest) -> Self {
        match &req.young {
            None => Factors::Means(req.inputs.iter().map(PrefixSum::build).collect()),
            Some(young) => Factors::Orlicz { inputs: &req.inputs, young, tol: req.tol },
        }
    }

    fn value(&self, lo: &[usize], hi: &[usize], buf: &mut Vec<f64>) -> Result<f64> {
        let count: usize = lo.iter().zip(hi).map(|(a, b)| b - a).product();
        let mut prod = 1.0;
        match self {
            Factors::Means(sums) => {
                for ps in sums {
                    prod *= ps.raw_sum_bounds(lo, hi) / count as f64;
                    if prod == 0.0 {
                        break;
                    }
                }
            }
            Factors::Orlicz { inputs, young, tol } => {
                for (g, psi) in inputs.iter().zip(young.iter()) {
                    gather(g, lo, hi, buf);
                    prod *= luxemburg_norm_values(buf, psi, *tol)?;
                    if prod == 0.0 {
                        break;
                    }
                }
            }
        }
        Ok(prod)
    }
}

fn gather(g: &GridFunction, lo: &[usize], hi: &[usize], buf: &mut Vec<f64>) {
    buf.clear();
    let st = strides(g.dims());
    let vals = g.values();
    for p in Odometer::new(lo, hi) {
        let idx: usize = p.iter().zip(&st).map(|(a, s)| a * s).sum();
        buf.push(vals[idx]);
    }
}

/// Fast evaluation of the maximal function described by `req`.
pub fn evaluate(req: &MaximalRequest) -> Result<GridFunction> {
    req.validate()?;
    let dims = req.dims().to_vec();
    let len: usize = dims.iter().product();
    let factors = Factors::new(req);
    let sides = side_vectors(&dims, req.basis);
    let dyadic = req.basis == RectBasis::Dyadic;
    let out = sides
        .par_iter()
        .try_fold(
            || vec![0.0; len],
            |mut acc, s| {
                if dyadic {
                    accumulate_tiles(&factors, &dims, s, &mut acc)?;
                } else {
                    accumulate_sliding(&factors, &dims, s, &mut acc)?;
                }
                Ok::<_, Error>(acc)
            },
        )
        .try_reduce(|| vec![0.0; len], |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x = x.max(y);
            }
            Ok(a)
        })?;
    GridFunction::new(dims, out, req.inputs[0].cell_measure())
}

/// Values of every rectangle with side vector `s`, indexed by lower corner.
fn position_values(factors: &Factors, dims: &[usize], s: &[usize]) -> Result<(Point, Vec<f64>)> {
    let positions: Point = dims.iter().zip(s).map(|(n, a)| n - a + 1).collect();
    let mut vals = Vec::with_capacity(positions.iter().product());
    let mut buf = Vec::new();
    let zeros: Point = positions.iter().map(|_| 0).collect();
    let mut hi: Point = s.iter().copied().collect();
    for lo in Odometer::new(&zeros, &positions) {
        for l in 0..lo.len() {
            hi[l] = lo[l] + s[l];
        }
        vals.push(factors.value(&lo, &hi, &mut buf)?);
    }
    Ok((positions, vals))
}

fn accumulate_sliding(factors: &Factors, dims: &[usize], s: &[usize], acc: &mut [f64]) -> Result<()> {
    let (mut shape, mut data) = position_values(factors, dims, s)?;
    for axis in 0..dims.len() {
        data = sliding_max_axis(&data, &shape, axis, dims[axis], s[axis]);
        shape[axis] = dims[axis];
    }
    for (a, v) in acc.iter_mut().zip(data) {
        *a = a.max(v);
    }
    Ok(())
}

/// Along `axis`, maps a fiber of position values (length `n - w + 1`) to a
/// fiber of length `n`: entry `x` is the max over positions
/// `max(0, x - w + 1) ..= min(x, n - w)`.
fn sliding_max_axis(data: &[f64], shape: &[usize], axis: usize, n: usize, w: usize) -> Vec<f64> {
    let p = shape[axis];
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let mut out = vec![0.0; outer * n * inner];
    let mut deque: VecDeque<usize> = VecDeque::with_capacity(w);
    for o in 0..outer {
        for i in 0..inner {
            let src = |j: usize| data[(o * p + j) * inner + i];
            deque.clear();
            for x in 0..n {
                if x < p {
                    let v = src(x);
                    while deque.back().is_some_and(|&b| src(b) <= v) {
                        deque.pop_back();
                    }
                    deque.push_back(x);
                }
                while deque.front().is_some_and(|&f| f + w <= x) {
                    deque.pop_front();
                }
                out[(o * n + x) * inner + i] = src(*deque.front().expect("window is never empty"));
            }
        }
    }
    out
}

fn accumulate_tiles(factors: &Factors, dims: &[usize], s: &[usize], acc: &mut [f64]) -> Result<()> {
    let tiles: Point = dims.iter().zip(s).map(|(n, a)| n / a).collect();
    let zeros: Point = tiles.iter().map(|_| 0).collect();
    let mut buf = Vec::new();
    let mut vals = Vec::with_capacity(tiles.iter().product());
    let (mut lo, mut hi): (Point, Point) = (zeros.clone(), zeros.clone());
    for k in Odometer::new(&zeros, &tiles) {
        for l in 0..k.len() {
            lo[l] = k[l] * s[l];
            hi[l] = lo[l] + s[l];
        }
        vals.push(factors.value(&lo, &hi, &mut buf)?);
    }
    let tile_strides = strides(&tiles);
    for (x, a) in Odometer::full(dims).zip(acc.iter_mut()) {
        let t: usize = x.iter().zip(s).zip(&tile_strides).map(|((xi, si), st)| (xi / si) * st).sum();
        *a = a.max(vals[t]);
    }
    Ok(())
}

/// Reference implementation: enumerates the basis, evaluates each rectangle
/// by direct summation (or a Luxemburg norm of the gathered values) and
/// scatters the maximum over the rectangle's cells.
///
/// Refuses with [`Error::GuardExceeded`] above [`BRUTE_FORCE_LIMIT`] rectangles.
pub fn brute_force_maximal(req: &MaximalRequest) -> Result<GridFunction> {
    req.validate()?;
    let dims = req.dims().to_vec();
    let count = count_rects(&dims, req.basis)?;
    if count > BRUTE_FORCE_LIMIT {
        return Err(Error::GuardExceeded { count, limit: BRUTE_FORCE_LIMIT });
    }
    let mut out = vec![0.0; dims.iter().product()];
    let mut buf = Vec::new();
    for r in enumerate_rects(&dims, req.basis)? {
        let v = direct_value(req, &r, &mut buf)?;
        for idx in r.flat_indices(&dims) {
            if v > out[idx] {
                out[idx] = v;
            }
        }
    }
    GridFunction::new(dims, out, req.inputs[0].cell_measure())
}

fn direct_value(req: &MaximalRequest, r: &Rect, buf: &mut Vec<f64>) -> Result<f64> {
    let dims = req.dims();
    let mut prod = 1.0;
    for (j, g) in req.inputs.iter().enumerate() {
        buf.clear();
        buf.extend(r.flat_indices(dims).map(|i| g.values()[i]));
        prod *= match &req.young {
            None => buf.iter().sum::<f64>() / buf.len() as f64,
            Some(ys) => luxemburg_norm_values(buf, &ys[j], req.tol)?,
        };
    }
    Ok(prod)
}

/// A rectangle attaining the maximum at `x`, with its value. Ties go to the
/// first rectangle in enumeration order.
pub fn maximizing_rect(req: &MaximalRequest, x: &[usize]) -> Result<(Rect, f64)> {
    req.validate()?;
    let mut buf = Vec::new();
    let mut best: Option<(Rect, f64)> = None;
    for r in rects_containing(x, req.dims(), req.basis)? {
        let v = direct_value(req, &r, &mut buf)?;
        if best.as_ref().is_none_or(|(_, b)| v > *b) {
            best = Some((r, v));
        }
    }
    best.ok_or_else(|| domain(format!("no rectangle contains {x:?}")))
}

/// Hardy-Littlewood maximal function over cubes.
pub fn hl_maximal(f: &GridFunction) -> Result<GridFunction> {
    evaluate(&MaximalRequest::new(vec![f.clone()], RectBasis::Cubes))
}

/// Strong maximal function over `basis` (normally [`RectBasis::AllRects`]).
pub fn strong_maximal(f: &GridFunction, basis: RectBasis) -> Result<GridFunction> {
    evaluate(&MaximalRequest::new(vec![f.clone()], basis))
}

/// Strong maximal function over rectangles with at most `c` side lengths.
pub fn complexity_maximal(f: &GridFunction, c: usize) -> Result<GridFunction> {
    strong_maximal(f, RectBasis::ComplexityC(c))
}

/// `sup_{R ∋ x} ∏_j ⟨f_j⟩_R`, one rectangle shared by all factors.
pub fn multilinear_strong(fs: &[GridFunction], basis: RectBasis) -> Result<GridFunction> {
    evaluate(&MaximalRequest::new(fs.to_vec(), basis))
}

/// `sup_{R ∋ x} ∏_j ‖f_j‖_{Ψ_j,R}`.
pub fn multilinear_orlicz(
    fs: &[GridFunction],
    young: &[YoungFunction],
    basis: RectBasis,
    tol: f64,
) -> Result<GridFunction> {
    evaluate(&MaximalRequest::orlicz(fs.to_vec(), young.to_vec(), basis, tol))
}

/// [`multilinear_strong`] over rectangles with at most `c` side lengths.
pub fn multilinear_complexity(fs: &[GridFunction], c: usize) -> Result<GridFunction> {
    multilinear_strong(fs, RectBasis::ComplexityC(c))
}

/// `W = M_R M_R^{n-1} ... M_R^1 ω`: complexity operators in increasing order,
/// the full strong maximal function last. On a line this is `M ω`.
pub fn iterated_weight(omega: &GridFunction) -> Result<GridFunction> {
    let n = omega.rank();
    if n == 1 {
        return hl_maximal(omega);
    }
    let mut w = omega.clone();
    for c in 1..n {
        w = complexity_maximal(&w, c)?;
    }
    strong_maximal(&w, RectBasis::AllRects)
}

/// Maximal operator selectors accepted by the `compute` subcommand.
#[derive(Clone, Debug, PartialEq)]
pub enum Operator {
    Hl,
    Strong,
    Complexity(usize),
    Multi,
    MultiOrlicz,
    IteratedWeight,
}

impl std::str::FromStr for Operator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "hl" => Operator::Hl,
            "strong" => Operator::Strong,
            "multi" => Operator::Multi,
            "multi-orlicz" => Operator::MultiOrlicz,
            "iterated-weight" => Operator::IteratedWeight,
            _ => match s.strip_prefix("complexity:") {
                Some(c) => Operator::Complexity(
                    c.parse().map_err(|_| config(format!("bad complexity in {s:?}")))?,
                ),
                None => return Err(config(format!("unknown operator {s:?}"))),
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(dims: &[usize], vals: &[f64]) -> GridFunction {
        GridFunction::new(dims.to_vec(), vals.to_vec(), 1.0).unwrap()
    }

    #[test]
    fn one_dimensional_spike() {
        let f = grid(&[4], &[1.0, 0.0, 0.0, 0.0]);
        let m = hl_maximal(&f).unwrap();
        assert_eq!(m.values()[3], 0.25);
        assert_eq!(m.values()[0], 1.0);
        assert_eq!(m.values()[1], 0.5);
    }

    #[test]
    fn corner_spike_reaches_far_corner() {
        let mut v = vec![0.0; 16];
        v[0] = 16.0;
        let f = grid(&[4, 4], &v);
        let m = strong_maximal(&f, RectBasis::AllRects).unwrap();
        assert_eq!(m.get(&[3, 3]), 1.0);
        let b = brute_force_maximal(&MaximalRequest::new(vec![f], RectBasis::AllRects)).unwrap();
        assert_eq!(m.values(), b.values());
    }

    #[test]
    fn sliding_max_window_edges() {
        // positions 0..=2 for n = 4, w = 2
        let out = sliding_max_axis(&[3.0, 1.0, 2.0], &[3], 0, 4, 2);
        assert_eq!(out, vec![3.0, 3.0, 2.0, 2.0]);
    }

    #[test]
    fn dyadic_uses_tiles() {
        let f = grid(&[4], &[4.0, 0.0, 0.0, 0.0]);
        let m = strong_maximal(&f, RectBasis::Dyadic).unwrap();
        assert_eq!(m.values(), &[4.0, 2.0, 1.0, 1.0]);
        let all = strong_maximal(&f, RectBasis::AllRects).unwrap();
        assert!(m.values().iter().zip(all.values()).all(|(d, a)| d <= a));
    }

    #[test]
    fn bad_requests() {
        let f = grid(&[2, 2], &[1.0; 4]);
        let g = grid(&[4], &[1.0; 4]);
        assert!(multilinear_strong(&[f.clone(), g], RectBasis::AllRects).is_err());
        assert!(matches!(complexity_maximal(&f, 3), Err(Error::Config(_))));
        let req = MaximalRequest::orlicz(vec![f], vec![], RectBasis::AllRects, 1e-9);
        assert!(evaluate(&req).is_err());
    }

    #[test]
    fn guard_refuses_large_families() {
        let f = GridFunction::zeros(&[64, 64]).unwrap();
        let req = MaximalRequest::new(vec![f], RectBasis::AllRects);
        assert!(matches!(brute_force_maximal(&req), Err(Error::GuardExceeded { .. })));
    }

    #[test]
    fn witness_attains_value() {
        let f = grid(&[3, 3], &[0.0, 9.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let req = MaximalRequest::new(vec![f], RectBasis::AllRects);
        let m = evaluate(&req).unwrap();
        let (r, v) = maximizing_rect(&req, &[2, 1]).unwrap();
        assert_eq!(v, m.get(&[2, 1]));
        assert!(r.contains(&[2, 1]));
    }

    #[test]
    fn operator_names() {
        assert_eq!("complexity:2".parse::<Operator>().unwrap(), Operator::Complexity(2));
        assert!("complexity:x".parse::<Operator>().is_err());
        assert!("max".parse::<Operator>().is_err());
    }
}
