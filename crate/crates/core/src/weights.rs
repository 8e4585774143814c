//! Weight constants over rectangle bases and a catalog of test weights.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Result};
use crate::grid::{
    count_rects, enumerate_rects, side_vectors, GridFunction, Mask, Odometer, Point, PrefixSum, Rect,
    RectBasis,
};
use crate::maximal::strong_maximal;
use crate::profiles::Profile;

/// `p' = p / (p - 1)`.
pub fn conjugate_exponent(p: f64) -> f64 {
    p / (p - 1.0)
}

/// `p` with `1/p = Σ 1/p_j`.
pub fn harmonic_exponent(ps: &[f64]) -> f64 {
    1.0 / ps.iter().map(|p| 1.0 / p).sum::<f64>()
}

fn check_exponents(ps: &[f64], allow_one: bool) -> Result<()> {
    for &p in ps {
        let ok = p.is_finite() && if allow_one { p >= 1.0 } else { p > 1.0 };
        if !ok {
            let bound = if allow_one { ">= 1" } else { "> 1" };
            return Err(config(format!("exponents must be {bound}, got {p}")));
        }
    }
    if ps.is_empty() {
        return Err(config("at least one exponent is required"));
    }
    Ok(())
}

fn check_positive(w: &GridFunction) -> Result<()> {
    if let Some(idx) = w.values().iter().position(|&v| v <= 0.0) {
        return Err(domain(format!(
            "weight must be strictly positive, found {} at {:?}",
            w.values()[idx],
            w.point_of(idx).as_slice()
        )));
    }
    Ok(())
}

/// `ν = ∏_j ω_j^{p/p_j}` with `1/p = Σ 1/p_j`.
pub fn nu_weight(ws: &[GridFunction], ps: &[f64]) -> Result<GridFunction> {
    check_exponents(ps, true)?;
    if ws.len() != ps.len() {
        return Err(config(format!("{} weights for {} exponents", ws.len(), ps.len())));
    }
    for w in &ws[1..] {
        ws[0].check_same_shape(w)?;
    }
    let p = harmonic_exponent(ps);
    let mut values = vec![1.0; ws[0].len()];
    for (w, pj) in ws.iter().zip(ps) {
        let e = p / pj;
        for (v, &x) in values.iter_mut().zip(w.values()) {
            *v *= if e == 1.0 { x } else { x.powf(e) };
        }
    }
    GridFunction::new(ws[0].dims().to_vec(), values, ws[0].cell_measure())
}

/// A weight constant together with a rectangle attaining it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantReport {
    pub constant: f64,
    pub argmax: Rect,
}

/// Maximum of `value(lo, hi)` over the basis; ties go to the first rectangle
/// in (side vector, position) order.
fn scan_basis<F>(dims: &[usize], basis: RectBasis, value: F) -> Result<ConstantReport>
where
    F: Fn(&[usize], &[usize]) -> f64 + Sync,
{
    basis.validate(dims)?;
    let sides = side_vectors(dims, basis);
    let dyadic = basis == RectBasis::Dyadic;
    let best = sides
        .par_iter()
        .enumerate()
        .map(|(si, s)| {
            let counts: Point = if dyadic {
                dims.iter().zip(s.iter()).map(|(n, a)| n / a).collect()
            } else {
                dims.iter().zip(s.iter()).map(|(n, a)| n - a + 1).collect()
            };
            let zeros: Point = counts.iter().map(|_| 0).collect();
            let mut hi = s.clone();
            let mut best: Option<(f64, usize, Point)> = None;
            for k in Odometer::new(&zeros, &counts) {
                let lo: Point = if dyadic {
                    k.iter().zip(s.iter()).map(|(a, b)| a * b).collect()
                } else {
                    k
                };
                for l in 0..lo.len() {
                    hi[l] = lo[l] + s[l];
                }
                let v = value(&lo, &hi);
                if best.as_ref().is_none_or(|(b, _, _)| v > *b) {
                    best = Some((v, si, lo));
                }
            }
            best
        })
        .reduce(
            || None,
            |a, b| match (a, b) {
                (Some(x), Some(y)) => Some(if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) { y } else { x }),
                (x, None) => x,
                (None, y) => y,
            },
        )
        .expect("every basis contains the single cells");
    let (constant, si, lo) = best;
    let hi: Point = lo.iter().zip(sides[si].iter()).map(|(a, b)| a + b).collect();
    Ok(ConstantReport { constant, argmax: Rect::from_bounds(&lo, &hi)? })
}

/// `sup_R ⟨ω⟩_R ⟨ω^{1-p'}⟩_R^{p-1}` over the basis.
pub fn ap_constant(w: &GridFunction, p: f64, basis: RectBasis) -> Result<ConstantReport> {
    check_exponents(&[p], false)?;
    multilinear_ap_constant(std::slice::from_ref(w), &[p], basis)
}

/// `max_x M ω(x) / ω(x)`, with the point attaining it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct A1Report {
    pub constant: f64,
    pub argmax: Vec<usize>,
}

pub fn a1_constant(w: &GridFunction, basis: RectBasis) -> Result<A1Report> {
    check_positive(w)?;
    let m = strong_maximal(w, basis)?;
    let (idx, constant) = m
        .values()
        .iter()
        .zip(w.values())
        .map(|(a, b)| a / b)
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, v)| if v > bv { (i, v) } else { (bi, bv) });
    Ok(A1Report { constant, argmax: w.point_of(idx).to_vec() })
}

/// `sup_R ⟨ν⟩_R ∏_j ⟨ω_j^{1-p_j'}⟩_R^{p/p_j'}`, `ν = ∏ ω_j^{p/p_j}`.
///
/// A factor with `p_j = 1` is read as `(inf_R ω_j)^{-p}`.
pub fn multilinear_ap_constant(
    ws: &[GridFunction],
    ps: &[f64],
    basis: RectBasis,
) -> Result<ConstantReport> {
    check_exponents(ps, true)?;
    if ws.len() != ps.len() {
        return Err(config(format!("{} weights for {} exponents", ws.len(), ps.len())));
    }
    for w in ws {
        check_positive(w)?;
    }
    let nu = nu_weight(ws, ps)?;
    let p = harmonic_exponent(ps);
    let nu_sums = PrefixSum::build(&nu);
    // (prefix sums of ω^{1-p'}, exponent p/p') or the raw weight for p_j = 1
    enum Dual<'a> {
        Mean(PrefixSum, f64),
        Inf(&'a GridFunction),
    }
    let duals: Vec<Dual> = ws
        .iter()
        .zip(ps)
        .map(|(w, &pj)| {
            if pj == 1.0 {
                Ok(Dual::Inf(w))
            } else {
                let pc = conjugate_exponent(pj);
                let sigma = w.map(|v| v.powf(1.0 - pc))?;
                Ok(Dual::Mean(PrefixSum::build(&sigma), p / pc))
            }
        })
        .collect::<Result<_>>()?;
    let dims = ws[0].dims().to_vec();
    scan_basis(&dims, basis, |lo, hi| {
        let count = lo.iter().zip(hi).map(|(a, b)| b - a).product::<usize>() as f64;
        let mut v = nu_sums.raw_sum_bounds(lo, hi) / count;
        for d in &duals {
            v *= match d {
                Dual::Mean(ps, e) => (ps.raw_sum_bounds(lo, hi) / count).powf(*e),
                Dual::Inf(w) => {
                    let inf = Odometer::new(lo, hi).map(|x| w.get(&x)).fold(f64::INFINITY, f64::min);
                    inf.powf(-p)
                }
            };
        }
        v
    })
}

/// Sampling plan for [`condition_a_estimate_with`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionASampler {
    pub n_sets: usize,
    pub seed: u64,
    /// Largest number of rectangles in a sampled union.
    pub max_union: usize,
    /// Every single rectangle is tried when the lattice has at most this many.
    pub singles_limit: u128,
}

impl ConditionASampler {
    pub fn new(n_sets: usize, seed: u64) -> Self {
        ConditionASampler { n_sets, seed, max_union: 5, singles_limit: 2000 }
    }
}

/// Lower bound for the Condition (A) constant at one level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionAReport {
    /// `max_E ω({M χ_E > λ}) / ω(E)` over the sampled sets; a lower bound.
    pub c_hat: f64,
    /// The rectangles whose union attains `c_hat`.
    pub worst_set: Vec<Rect>,
    pub sets_tried: usize,
    /// Sets with `ω(E) = 0`, left out of the quotient.
    pub skipped_zero_weight: usize,
}

/// Uniformly random rectangle in the lattice.
pub fn random_rect(dims: &[usize], rng: &mut impl Rng) -> Rect {
    let sides = dims.iter().map(|&n| {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        [lo, hi + 1]
    });
    Rect::new(sides).expect("sampled rectangles are nonempty")
}

/// [`condition_a_estimate_with`] with the default sampler.
pub fn condition_a_estimate(
    w: &GridFunction,
    lambda: f64,
    n_sets: usize,
    seed: u64,
) -> Result<ConditionAReport> {
    condition_a_estimate_with(w, lambda, &ConditionASampler::new(n_sets, seed))
}

/// `ω(E) = Σ_{x∈E} ω(x)` cell measure included.
pub fn weighted_measure(w: &GridFunction, mask: &Mask) -> f64 {
    w.values()
        .iter()
        .zip(mask.bits())
        .filter(|(_, &b)| b)
        .map(|(v, _)| v)
        .sum::<f64>()
        * w.cell_measure()
}

/// `ω({M_R χ_E > λ}) / ω(E)`, or `None` when `ω(E) = 0`.
pub fn condition_a_ratio(w: &GridFunction, set: &Mask, lambda: f64) -> Result<Option<f64>> {
    let we = weighted_measure(w, set);
    if we == 0.0 {
        return Ok(None);
    }
    let m = strong_maximal(&set.indicator(w.cell_measure()), RectBasis::AllRects)?;
    let level: f64 = m
        .values()
        .iter()
        .zip(w.values())
        .filter(|(mv, _)| **mv > lambda)
        .map(|(_, wv)| wv)
        .sum::<f64>()
        * w.cell_measure();
    Ok(Some(level / we))
}

/// Estimates the Condition (A) constant `c(λ)` from below.
///
/// Sampled sets are unions of 1 to `max_union` uniformly random rectangles;
/// on small lattices every single rectangle is tried as well. The sampled
/// family depends on the seed only, so estimates for different `λ` share it.
pub fn condition_a_estimate_with(
    w: &GridFunction,
    lambda: f64,
    sampler: &ConditionASampler,
) -> Result<ConditionAReport> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(config(format!("λ must lie in (0, 1), got {lambda}")));
    }
    if sampler.max_union == 0 {
        return Err(config("max_union must be at least 1"));
    }
    if w.values().iter().all(|&v| v == 0.0) {
        return Err(domain("Condition (A) needs a weight that is not identically zero"));
    }
    let dims = w.dims().to_vec();
    let mut sets: Vec<Vec<Rect>> = Vec::new();
    if count_rects(&dims, RectBasis::AllRects)? <= sampler.singles_limit {
        sets.extend(enumerate_rects(&dims, RectBasis::AllRects)?.into_iter().map(|r| vec![r]));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sampler.seed);
    for _ in 0..sampler.n_sets {
        let k = rng.random_range(1..=sampler.max_union);
        sets.push((0..k).map(|_| random_rect(&dims, &mut rng)).collect());
    }
    let ratios: Vec<Option<f64>> = sets
        .par_iter()
        .map(|rs| {
            let mut mask = Mask::empty(&dims);
            for r in rs {
                mask.insert_rect(r);
            }
            condition_a_ratio(w, &mask, lambda)
        })
        .collect::<Result<_>>()?;
    let skipped_zero_weight = ratios.iter().filter(|r| r.is_none()).count();
    let mut best: Option<(f64, usize)> = None;
    for (i, r) in ratios.iter().enumerate() {
        if let Some(v) = *r {
            if best.is_none_or(|(b, _)| v > b) {
                best = Some((v, i));
            }
        }
    }
    let (c_hat, worst_set) = match best {
        Some((v, i)) => (v, sets[i].clone()),
        None => (0.0, Vec::new()),
    };
    Ok(ConditionAReport { c_hat, worst_set, sets_tried: sets.len(), skipped_zero_weight })
}

/// Seeded weight from the catalog kinds `constant`, `power:α`,
/// `checkerboard`, `lognormal:σ` and `delta-spike:h`.
pub fn weight_catalog(dims: &[usize], kind: &str, seed: u64) -> Result<GridFunction> {
    let p: Profile = kind.parse()?;
    if !p.is_weight() {
        return Err(config(format!("{kind:?} is not a weight kind")));
    }
    p.generate(dims, seed)
}

/// Class a suite weight is claimed to belong to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "class", content = "p")]
pub enum WeightClass {
    A1,
    Ap(f64),
    Ainfty,
    Arbitrary,
}

impl WeightClass {
    /// Catalog default for a profile.
    pub fn claimed_for(p: &Profile) -> WeightClass {
        match p {
            Profile::Constant(c) if *c > 0.0 => WeightClass::A1,
            Profile::Checkerboard { low, .. } if *low > 0.0 => WeightClass::A1,
            Profile::SmoothCheckerboard { mean, amp, .. } if amp < mean => WeightClass::A1,
            Profile::Power(_) | Profile::Lognormal(_) => WeightClass::Ainfty,
            _ => WeightClass::Arbitrary,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteWeight {
    pub label: String,
    pub weight: GridFunction,
    pub claimed: WeightClass,
}

/// Labelled weights with their claimed classes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WeightSuite {
    entries: Vec<SuiteWeight>,
}

impl WeightSuite {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a weight; anything but an arbitrary weight must be positive.
    pub fn push(&mut self, label: impl Into<String>, weight: GridFunction, claimed: WeightClass) -> Result<()> {
        if claimed != WeightClass::Arbitrary {
            check_positive(&weight)?;
        }
        self.entries.push(SuiteWeight { label: label.into(), weight, claimed });
        Ok(())
    }

    pub fn entries(&self) -> &[SuiteWeight] {
        &self.entries
    }

    /// One weight of each catalog kind on `dims`.
    pub fn catalog(dims: &[usize], seed: u64) -> Result<Self> {
        let mut suite = WeightSuite::new();
        for kind in ["constant", "power:-0.5", "checkerboard", "lognormal:1", "delta-spike:4"] {
            let p: Profile = kind.parse()?;
            suite.push(kind, p.generate(dims, seed)?, WeightClass::claimed_for(&p))?;
        }
        Ok(suite)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(dims: &[usize], vals: Vec<f64>) -> GridFunction {
        GridFunction::new(dims.to_vec(), vals, 1.0).unwrap()
    }

    #[test]
    fn constants_of_constant_weights() {
        let one = GridFunction::constant(&[4, 4], 1.0).unwrap();
        let c = GridFunction::constant(&[4, 4], 7.5).unwrap();
        for basis in [RectBasis::AllRects, RectBasis::Dyadic, RectBasis::Cubes] {
            for p in [1.5, 2.0, 4.0] {
                assert_eq!(ap_constant(&one, p, basis).unwrap().constant, 1.0);
                assert!((ap_constant(&c, p, basis).unwrap().constant - 1.0).abs() < 1e-12);
            }
            assert_eq!(a1_constant(&one, basis).unwrap().constant, 1.0);
        }
        let rep = multilinear_ap_constant(&[one.clone(), one], &[2.0, 3.0], RectBasis::AllRects).unwrap();
        assert_eq!(rep.constant, 1.0);
    }

    #[test]
    fn step_weight_against_enumeration() {
        let mut v = vec![2.0; 4];
        v.extend([1.0; 4]);
        let w = grid(&[8], v);
        let rep = ap_constant(&w, 2.0, RectBasis::AllRects).unwrap();
        let mut want: f64 = 0.0;
        for lo in 0..8 {
            for hi in lo + 1..=8 {
                let s = &w.values()[lo..hi];
                let n = s.len() as f64;
                let a = s.iter().sum::<f64>() / n;
                let b = s.iter().map(|x| 1.0 / x).sum::<f64>() / n;
                want = want.max(a * b);
            }
        }
        assert!((rep.constant - want).abs() <= 1e-12 * want);
        assert!(rep.constant > 1.0);
        let r = &rep.argmax;
        assert!(r.lo(0) < 4 && r.hi(0) > 4);
    }

    #[test]
    fn nonpositive_weights_rejected() {
        let w = grid(&[2], vec![1.0, 0.0]);
        assert!(ap_constant(&w, 2.0, RectBasis::AllRects).is_err());
        assert!(a1_constant(&w, RectBasis::AllRects).is_err());
        assert!(ap_constant(&grid(&[2], vec![1.0, 1.0]), 1.0, RectBasis::AllRects).is_err());
    }

    #[test]
    fn nu_weight_collapses() {
        let w = grid(&[3], vec![1.0, 4.0, 9.0]);
        assert_eq!(nu_weight(std::slice::from_ref(&w), &[3.0]).unwrap(), w);
        let nu = nu_weight(&[w.clone(), w.clone()], &[2.0, 2.0]).unwrap();
        assert_eq!(nu.values(), w.values());
    }

    #[test]
    fn inf_branch() {
        // p_1 = 1 alone: sup_R ⟨ω⟩_R / inf_R ω
        let w = grid(&[3], vec![1.0, 2.0, 4.0]);
        let rep = multilinear_ap_constant(&[w], &[1.0], RectBasis::AllRects).unwrap();
        assert!((rep.constant - 7.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn condition_a_basics() {
        let one = GridFunction::constant(&[6, 6], 1.0).unwrap();
        let hi = condition_a_estimate(&one, 0.99, 50, 3).unwrap();
        let lo = condition_a_estimate(&one, 0.01, 50, 3).unwrap();
        assert!(hi.c_hat >= 1.0);
        assert!(lo.c_hat >= hi.c_hat);
        assert_eq!(hi.sets_tried, 441 + 50);
        let spike = weight_catalog(&[6, 6], "delta-spike:1", 0).unwrap();
        let rep = condition_a_estimate(&spike, 0.5, 20, 3).unwrap();
        assert!(rep.skipped_zero_weight > 0);
        assert!(condition_a_estimate(&GridFunction::zeros(&[4]).unwrap(), 0.5, 5, 0).is_err());
    }

    #[test]
    fn catalog_kinds() {
        assert!(weight_catalog(&[4, 4], "ramp", 0).is_err());
        assert!(weight_catalog(&[4, 4], "power:-2", 0).is_err());
        let suite = WeightSuite::catalog(&[8, 8], 1).unwrap();
        assert_eq!(suite.entries().len(), 5);
        let mut s = WeightSuite::new();
        assert!(s.push("z", GridFunction::zeros(&[2]).unwrap(), WeightClass::A1).is_err());
        assert!(s.push("z", GridFunction::zeros(&[2]).unwrap(), WeightClass::Arbitrary).is_ok());
    }
}
