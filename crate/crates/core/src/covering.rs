//! Greedy rectangle selections and checks of their covering properties.
//!
//! Overlaps are counted cell by cell on boolean masks, so every threshold
//! comparison is exact integer arithmetic.

use std::cmp::Reverse;

use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Result};
use crate::grid::{GridFunction, Mask, Rect};
use crate::maximal::multilinear_complexity;

/// Stable permutation sorting `rects` by longest side, decreasing.
/// Entry `k` is the input index of the `k`-th rectangle in the new order.
pub fn order_by_longest_side(rects: &[Rect]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..rects.len()).collect();
    idx.sort_by_key(|&i| Reverse(rects[i].longest_side()));
    idx
}

fn check_family(rects: &[Rect], dims: &[usize]) -> Result<()> {
    for (i, r) in rects.iter().enumerate() {
        if r.rank() != dims.len() || !r.fits_in(dims) {
            return Err(domain(format!("rectangle {i} ({r}) is outside the lattice {dims:?}")));
        }
    }
    Ok(())
}

/// Output of [`greedy_half_selection`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub dims: Vec<usize>,
    /// The input rectangles, in input order.
    pub rects: Vec<Rect>,
    /// Longest-side order: `order[k]` is the input index of the `k`-th rectangle.
    pub order: Vec<usize>,
    /// Positions in `order` of the selected rectangles, increasing.
    pub selected: Vec<usize>,
    /// Cells of each selected rectangle already covered when it was selected.
    pub prior_overlap: Vec<usize>,
    /// Union of the selected rectangles.
    pub union: Mask,
    /// `E_i`: the part of the `i`-th selected rectangle not covered by earlier ones.
    pub exhaustion: Vec<Mask>,
}

impl SelectionResult {
    /// The `i`-th selected rectangle.
    pub fn selected_rect(&self, i: usize) -> &Rect {
        &self.rects[self.order[self.selected[i]]]
    }

    /// Input indices of the selected rectangles, in selection order.
    pub fn selected_input_indices(&self) -> Vec<usize> {
        self.selected.iter().map(|&k| self.order[k]).collect()
    }

    /// `|∪_{j<i} R̃_j ∩ R̃_i| / |R̃_i|` for each selected rectangle.
    pub fn overlap_ratios(&self) -> Vec<f64> {
        (0..self.selected.len())
            .map(|i| self.prior_overlap[i] as f64 / self.selected_rect(i).cell_count() as f64)
            .collect()
    }
}

/// Scans the rectangles by decreasing longest side and keeps `R_k` iff the
/// union of those already kept covers less than half of it.
pub fn greedy_half_selection(rects: &[Rect], dims: &[usize]) -> Result<SelectionResult> {
    check_family(rects, dims)?;
    let order = order_by_longest_side(rects);
    let mut union = Mask::empty(dims);
    let (mut selected, mut prior_overlap, mut exhaustion) = (Vec::new(), Vec::new(), Vec::new());
    for (k, &i) in order.iter().enumerate() {
        let r = &rects[i];
        let overlap = union.count_in_rect(r);
        if 2 * overlap < r.cell_count() {
            let mut e = Mask::from_rect(dims, r);
            for idx in r.flat_indices(dims) {
                if union.get(idx) {
                    e.remove(idx);
                }
            }
            union.insert_rect(r);
            selected.push(k);
            prior_overlap.push(overlap);
            exhaustion.push(e);
        }
    }
    Ok(SelectionResult {
        dims: dims.to_vec(),
        rects: rects.to_vec(),
        order,
        selected,
        prior_overlap,
        union,
        exhaustion,
    })
}

/// Independent recount of the selection invariants.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionAudit {
    /// Selected rectangles covered at least half by their predecessors.
    pub half_overlap_violations: usize,
    /// Exhaustion sets smaller than half their rectangle.
    pub exhaustion_violations: usize,
    /// Pairs of exhaustion sets that intersect.
    pub overlapping_exhaustion_pairs: usize,
    pub union_matches: bool,
    pub selected_increasing: bool,
}

impl SelectionAudit {
    pub fn is_clean(&self) -> bool {
        self.half_overlap_violations == 0
            && self.exhaustion_violations == 0
            && self.overlapping_exhaustion_pairs == 0
            && self.union_matches
            && self.selected_increasing
    }
}

/// Recomputes every selection invariant from scratch with fresh masks.
pub fn audit_selection(sel: &SelectionResult) -> SelectionAudit {
    let dims = &sel.dims;
    let mut audit = SelectionAudit {
        selected_increasing: sel.selected.windows(2).all(|w| w[0] < w[1]),
        ..Default::default()
    };
    let mut before = Mask::empty(dims);
    for i in 0..sel.selected.len() {
        let r = sel.selected_rect(i);
        let size = r.cell_count();
        let overlap = r.flat_indices(dims).filter(|&c| before.get(c)).count();
        if 2 * overlap >= size {
            audit.half_overlap_violations += 1;
        }
        if 2 * sel.exhaustion[i].count() < size {
            audit.exhaustion_violations += 1;
        }
        before.insert_rect(r);
    }
    for a in 0..sel.exhaustion.len() {
        for b in a + 1..sel.exhaustion.len() {
            if !sel.exhaustion[a].is_disjoint(&sel.exhaustion[b]) {
                audit.overlapping_exhaustion_pairs += 1;
            }
        }
    }
    let mut from_e = Mask::empty(dims);
    for e in &sel.exhaustion {
        from_e.union_with(e);
    }
    audit.union_matches = from_e == before && before == sel.union;
    audit
}

/// Keeps `R_i` iff `|R_i ∩ ∪ kept earlier| <= λ |R_i|`, scanning in input
/// order. Returns the kept input indices.
pub fn scattered_selection(rects: &[Rect], lambda: f64, dims: &[usize]) -> Result<Vec<usize>> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(config(format!("λ must lie in (0, 1), got {lambda}")));
    }
    check_family(rects, dims)?;
    let mut union = Mask::empty(dims);
    let mut kept = Vec::new();
    for (i, r) in rects.iter().enumerate() {
        let overlap = union.count_in_rect(r);
        if overlap as f64 <= lambda * r.cell_count() as f64 {
            union.insert_rect(r);
            kept.push(i);
        }
    }
    Ok(kept)
}

/// Number of kept rectangles violating `|R_i ∩ ∪_{kept j<i} R_j| <= λ|R_i|`.
pub fn scattered_violations(rects: &[Rect], kept: &[usize], lambda: f64, dims: &[usize]) -> usize {
    let mut union = Mask::empty(dims);
    let mut bad = 0;
    for &i in kept {
        let r = &rects[i];
        let overlap = r.flat_indices(dims).filter(|&c| union.get(c)).count();
        if overlap as f64 > lambda * r.cell_count() as f64 {
            bad += 1;
        }
        union.insert_rect(r);
    }
    bad
}

/// Point of an original rectangle where the covering claim is weakest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringWitness {
    pub rect_index: usize,
    pub point: Vec<usize>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringReport {
    /// The bilinear maximal function of `(1_Ω, 1_Ω)` exceeds 1/4 on every
    /// original rectangle.
    pub holds: bool,
    /// Same with `>= 1/4`.
    pub holds_non_strict: bool,
    pub min_value: f64,
    /// Where the minimum is attained; first in rectangle and row-major order.
    pub argmin: CoveringWitness,
    /// Set when the strict claim fails.
    pub witness: Option<CoveringWitness>,
}

/// Checks that the bilinear complexity-`c` maximal function of `(1_Ω, 1_Ω)`
/// is above `1/4` at every point of every original rectangle.
///
/// The guarantee is only expected for dyadic families; other inputs are
/// exploratory.
pub fn verify_covering_claim(
    sel: &SelectionResult,
    original: &[Rect],
    c: usize,
) -> Result<CoveringReport> {
    if original.is_empty() {
        return Err(config("covering claim needs at least one rectangle"));
    }
    check_family(original, &sel.dims)?;
    let ind = sel.union.indicator(1.0);
    let m = multilinear_complexity(&[ind.clone(), ind], c)?;
    let mut argmin: Option<CoveringWitness> = None;
    for (ri, r) in original.iter().enumerate() {
        for p in r.points() {
            let v = m.get(&p);
            if argmin.as_ref().is_none_or(|w| v < w.value) {
                argmin = Some(CoveringWitness { rect_index: ri, point: p.to_vec(), value: v });
            }
        }
    }
    let argmin = argmin.expect("rectangles are nonempty");
    let holds = argmin.value > 0.25;
    Ok(CoveringReport {
        holds,
        holds_non_strict: argmin.value >= 0.25,
        min_value: argmin.value,
        witness: (!holds).then(|| argmin.clone()),
        argmin,
    })
}

fn weighted_union(w: &GridFunction, rects: impl Iterator<Item = Rect>) -> f64 {
    let mut mask = Mask::empty(w.dims());
    for r in rects {
        mask.insert_rect(&r);
    }
    crate::weights::weighted_measure(w, &mask)
}

/// `ω(∪_{s<j} A_s) / [ω(∪_{s<i} A_s) + ω(∪_{i<=s<j, s kept} A_s)]` for one cut
/// `i <= j`; `None` when the denominator vanishes.
pub fn verify_lemma32_prop3(
    w: &GridFunction,
    rects: &[Rect],
    kept: &[usize],
    i: usize,
    j: usize,
) -> Result<Option<f64>> {
    if i > j || j > rects.len() {
        return Err(config(format!("need i <= j <= {}, got ({i}, {j})", rects.len())));
    }
    check_family(rects, w.dims())?;
    let num = weighted_union(w, rects[..j].iter().cloned());
    let head = weighted_union(w, rects[..i].iter().cloned());
    let tail = weighted_union(
        w,
        kept.iter().filter(|&&s| s >= i && s < j).map(|&s| rects[s].clone()),
    );
    let den = head + tail;
    Ok((den > 0.0).then(|| num / den))
}

/// Largest [`verify_lemma32_prop3`] ratio over all cuts, an empirical `c(λ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatteredRatioReport {
    pub lambda: f64,
    pub kept: Vec<usize>,
    pub max_ratio: f64,
    pub worst_cut: Option<(usize, usize)>,
    pub cuts: usize,
    pub skipped_zero_denominator: usize,
}

pub fn scattered_max_ratio(w: &GridFunction, rects: &[Rect], lambda: f64) -> Result<ScatteredRatioReport> {
    let kept = scattered_selection(rects, lambda, w.dims())?;
    let mut report = ScatteredRatioReport {
        lambda,
        kept: kept.clone(),
        max_ratio: 0.0,
        worst_cut: None,
        cuts: 0,
        skipped_zero_denominator: 0,
    };
    for i in 0..=rects.len() {
        for j in i..=rects.len() {
            report.cuts += 1;
            match verify_lemma32_prop3(w, rects, &kept, i, j)? {
                Some(r) => {
                    if report.worst_cut.is_none() || r > report.max_ratio {
                        report.max_ratio = r;
                        report.worst_cut = Some((i, j));
                    }
                }
                None => report.skipped_zero_denominator += 1,
            }
        }
    }
    Ok(report)
}

/// Random dyadic rectangle with every side at most `max_side`.
pub fn random_dyadic_rect(dims: &[usize], max_side: usize, rng: &mut impl rand::Rng) -> Rect {
    let sides = dims.iter().map(|&n| {
        let top = n.min(max_side).max(1).ilog2();
        let len = 1usize << rng.random_range(0..=top);
        let k = rng.random_range(0..n / len);
        [k * len, (k + 1) * len]
    });
    Rect::new(sides).expect("dyadic intervals are nonempty")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &[[usize; 2]]) -> Rect {
        Rect::new(s.iter().copied()).unwrap()
    }

    #[test]
    fn ordering_is_stable() {
        let rects = vec![r(&[[0, 2], [0, 1]]), r(&[[0, 4], [0, 1]]), r(&[[0, 1], [0, 2]])];
        assert_eq!(order_by_longest_side(&rects), vec![1, 0, 2]);
        let sorted = vec![rects[1].clone(), rects[0].clone()];
        assert_eq!(order_by_longest_side(&sorted), vec![0, 1]);
    }

    #[test]
    fn identical_and_disjoint_families() {
        let dims = [8, 8];
        let same = vec![r(&[[0, 4], [2, 6]]); 5];
        let sel = greedy_half_selection(&same, &dims).unwrap();
        assert_eq!(sel.selected, vec![0]);
        let disjoint: Vec<Rect> = (0..4).map(|k| r(&[[2 * k, 2 * k + 2], [0, 8]])).collect();
        let sel = greedy_half_selection(&disjoint, &dims).unwrap();
        assert_eq!(sel.selected.len(), 4);
        assert!(audit_selection(&sel).is_clean());
        assert_eq!(scattered_selection(&disjoint, 0.1, &dims).unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn half_overlap_is_rejected() {
        // second rectangle is exactly half covered
        let rects = vec![r(&[[0, 4], [0, 2]]), r(&[[0, 4], [1, 3]])];
        let sel = greedy_half_selection(&rects, &[4, 4]).unwrap();
        assert_eq!(sel.selected, vec![0]);
        assert_eq!(scattered_selection(&rects, 0.5, &[4, 4]).unwrap(), vec![0, 1]);
        assert_eq!(scattered_selection(&rects, 0.3, &[4, 4]).unwrap(), vec![0]);
        assert!(scattered_selection(&rects, 1.0, &[4, 4]).is_err());
    }

    #[test]
    fn exact_half_case_touches_quarter() {
        let rects = vec![r(&[[0, 4], [0, 1]]), r(&[[0, 4], [0, 2]])];
        // longest sides tie, input order kept: [0,4)x[0,1) first
        let sel = greedy_half_selection(&rects, &[4, 4]).unwrap();
        assert_eq!(sel.selected, vec![0]);
        let rep = verify_covering_claim(&sel, &rects, 1).unwrap();
        assert_eq!(rep.min_value, 0.25);
        assert!(!rep.holds && rep.holds_non_strict);
        assert_eq!(rep.witness.unwrap().rect_index, 1);
    }

    #[test]
    fn scattered_degenerate_cuts() {
        let w = GridFunction::constant(&[4, 4], 1.0).unwrap();
        let rects = vec![r(&[[0, 2], [0, 2]]), r(&[[1, 3], [1, 3]]), r(&[[2, 4], [0, 4]])];
        let all: Vec<usize> = (0..3).collect();
        assert_eq!(verify_lemma32_prop3(&w, &rects, &all, 2, 2).unwrap(), Some(1.0));
        assert_eq!(verify_lemma32_prop3(&w, &rects, &all, 0, 0).unwrap(), None);
        for i in 0..=3 {
            for j in i..=3 {
                if let Some(v) = verify_lemma32_prop3(&w, &rects, &all, i, j).unwrap() {
                    assert!(v <= 1.0);
                }
            }
        }
        let rep = scattered_max_ratio(&w, &rects, 0.5).unwrap();
        assert_eq!(rep.cuts, 10);
        assert_eq!(rep.skipped_zero_denominator, 1);
    }

    #[test]
    fn selection_json_round_trip() {
        let rects = vec![r(&[[0, 2], [0, 2]]), r(&[[1, 3], [1, 3]])];
        let sel = greedy_half_selection(&rects, &[4, 4]).unwrap();
        let text = serde_json::to_string(&sel).unwrap();
        let back: SelectionResult = serde_json::from_str(&text).unwrap();
        assert_eq!(back, sel);
    }
}
