//! Both sides of each weighted maximal inequality, as ratios.
//!
//! No constant is assumed anywhere: a verifier returns `lhs / rhs` and the
//! level where it peaks. A case is flagged only when the right side vanishes
//! and the left does not. [`suite_sweep`] runs a [`RunConfig`] over a ladder of
//! refinements and writes per-case JSON plus CSV summaries.

use std::collections::HashMap;
use std::fmt;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::grid::{GridFunction, RectBasis};
use crate::maximal::{brute_force_maximal, evaluate, MaximalRequest};
use crate::profiles::Profile;
use crate::weights::{ap_constant, harmonic_exponent, nu_weight};
use crate::young::{check_bstar_p, phi_n, phi_n_iterate, Verdict, YoungFunction, DEFAULT_T_MAX};

/// Number of default levels.
pub const DEFAULT_LEVEL_COUNT: usize = 12;
/// Lowest default level, relative to the maximum of the maximal function.
pub const DEFAULT_LEVEL_FLOOR: f64 = 1e-3;

/// The inequalities the harness knows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Theorem {
    /// Orlicz multilinear strong type with `ν ∈ A_∞`.
    Tm1,
    /// Multilinear weak type with arbitrary weights and iterated weights.
    Tm2,
    /// Multilinear strong type with iterated weights.
    Cor,
    /// Unweighted `L log^{n-1} L` endpoint.
    Jmz,
    /// Weighted endpoint with `M_R ω` on the right.
    WeightedJmz,
    /// Planar endpoint with `M_R M_Q ω` on the right.
    SaitoTanaka,
    /// Linear weak type with iterated weights.
    ThmA,
    /// Multilinear endpoint with iterated `Φ_n`.
    EndpointM,
    /// Growth of the endpoint ratio with an under-iterated `Φ_n`.
    Sharpness,
}

impl Theorem {
    pub const ALL: [Theorem; 9] = [
        Theorem::Tm1,
        Theorem::Tm2,
        Theorem::Cor,
        Theorem::Jmz,
        Theorem::WeightedJmz,
        Theorem::SaitoTanaka,
        Theorem::ThmA,
        Theorem::EndpointM,
        Theorem::Sharpness,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Theorem::Tm1 => "tm1",
            Theorem::Tm2 => "tm2",
            Theorem::Cor => "cor",
            Theorem::Jmz => "jmz",
            Theorem::WeightedJmz => "weighted-jmz",
            Theorem::SaitoTanaka => "saito-tanaka",
            Theorem::ThmA => "thm-a",
            Theorem::EndpointM => "endpoint-m",
            Theorem::Sharpness => "sharpness",
        }
    }

    /// Whether the inequality involves weights.
    pub fn is_weighted(&self) -> bool {
        !matches!(self, Theorem::Jmz | Theorem::EndpointM | Theorem::Sharpness)
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Theorem::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| config(format!("unknown theorem {s:?}")))
    }
}

impl TryFrom<String> for Theorem {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Theorem> for String {
    fn from(t: Theorem) -> Self {
        t.name().to_string()
    }
}

/// Inputs of one verifier run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationCase {
    pub label: String,
    pub theorem: Theorem,
    pub fs: Vec<GridFunction>,
    #[serde(default)]
    pub ws: Vec<GridFunction>,
    #[serde(default)]
    pub ps: Vec<f64>,
    #[serde(default)]
    pub young: Option<Vec<YoungFunction>>,
    /// Explicit `t` (or `λ`) levels; the default schedule is used when absent.
    #[serde(default)]
    pub levels: Option<Vec<f64>>,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    1e-9
}

impl VerificationCase {
    pub fn new(label: impl Into<String>, theorem: Theorem, fs: Vec<GridFunction>) -> Self {
        VerificationCase {
            label: label.into(),
            theorem,
            fs,
            ws: Vec::new(),
            ps: Vec::new(),
            young: None,
            levels: None,
            tol: default_tol(),
        }
    }

    pub fn with_weights(mut self, ws: Vec<GridFunction>) -> Self {
        self.ws = ws;
        self
    }

    pub fn with_exponents(mut self, ps: Vec<f64>) -> Self {
        self.ps = ps;
        self
    }

    pub fn with_young(mut self, young: Vec<YoungFunction>) -> Self {
        self.young = Some(young);
        self
    }

    pub fn with_levels(mut self, levels: Vec<f64>) -> Self {
        self.levels = Some(levels);
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    /// `p` with `1/p = Σ 1/p_j`.
    pub fn p(&self) -> f64 {
        harmonic_exponent(&self.ps)
    }

    pub fn dims(&self) -> &[usize] {
        self.fs[0].dims()
    }
}

/// One level of a weak-type sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub level: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// Machine-readable evidence for a flagged case.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub case: String,
    pub level: Option<f64>,
    /// A point of the offending level set.
    pub point: Option<Vec<usize>>,
    pub lhs: f64,
    pub rhs: f64,
}

/// The operational `A_∞` check of the Orlicz strong-type verifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub in_hypothesis: bool,
    /// First exponent in `{2, 4, 8}` with a finite `A_p` constant of `ν`.
    pub p: Option<f64>,
    pub ap_constant: Option<f64>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub label: String,
    pub theorem: Theorem,
    pub dims: Vec<usize>,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs` (the maximum over levels for weak-type forms); `0` when
    /// both sides vanish, infinite when only the right side does.
    pub ratio: f64,
    pub flagged: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<LevelRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypothesis: Option<HypothesisCheck>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    /// Wall-clock time; kept out of files so outputs are reproducible.
    #[serde(skip)]
    pub runtime: Duration,
}

/// Ratio under the degenerate rule: `0/0 = 0`, `x/0` is infinite and flagged.
pub fn degenerate_ratio(lhs: f64, rhs: f64) -> (f64, bool) {
    if rhs > 0.0 {
        (lhs / rhs, false)
    } else if lhs == 0.0 {
        (0.0, false)
    } else {
        (f64::INFINITY, true)
    }
}

/// `m`-th roots of `DEFAULT_LEVEL_COUNT` log-spaced values in
/// `[DEFAULT_LEVEL_FLOOR · max, max]`; empty when `max = 0`.
pub fn default_levels(max: f64, m: usize) -> Vec<f64> {
    if max <= 0.0 {
        return Vec::new();
    }
    let lo = DEFAULT_LEVEL_FLOOR * max;
    let k = DEFAULT_LEVEL_COUNT;
    (0..k)
        .map(|i| {
            let tau = if i + 1 == k { max } else { lo * (max / lo).powf(i as f64 / (k - 1) as f64) };
            if m == 1 {
                tau
            } else {
                tau.powf(1.0 / m as f64)
            }
        })
        .collect()
}

/// `(Σ f^q w · cell_measure)^{1/q}`.
pub fn weighted_norm(f: &GridFunction, q: f64, w: &GridFunction) -> f64 {
    let s: f64 = f.values().iter().zip(w.values()).map(|(a, b)| a.powf(q) * b).sum();
    (s * f.cell_measure()).powf(1.0 / q)
}

/// `Σ_{x : m(x) > level} w(x) · cell_measure`, with the first such point.
fn level_measure(m: &GridFunction, level: f64, w: Option<&GridFunction>) -> (f64, Option<usize>) {
    let mut first = None;
    let mut s = 0.0;
    for (i, &v) in m.values().iter().enumerate() {
        if v > level {
            first.get_or_insert(i);
            s += w.map_or(1.0, |w| w.values()[i]);
        }
    }
    (s * m.cell_measure(), first)
}

/// How maximal functions are computed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    #[default]
    Fast,
    BruteForce,
}

fn request_key(req: &MaximalRequest) -> u64 {
    let mut h = DefaultHasher::new();
    req.basis.hash(&mut h);
    for g in &req.inputs {
        g.dims().hash(&mut h);
        g.cell_measure().to_bits().hash(&mut h);
        for v in g.values() {
            v.to_bits().hash(&mut h);
        }
    }
    if let Some(ys) = &req.young {
        for y in ys {
            y.to_string().hash(&mut h);
        }
        req.tol.to_bits().hash(&mut h);
    }
    h.finish()
}

type Cache = HashMap<u64, Vec<(MaximalRequest, Arc<GridFunction>)>>;

/// Runs verifiers with a chosen maximal-function engine, memoizing maximal
/// functions across the cases it sees.
#[derive(Debug, Default)]
pub struct Verifier {
    pub engine: Engine,
    cache: Mutex<Cache>,
}

impl Verifier {
    pub fn new(engine: Engine) -> Self {
        Verifier { engine, cache: Mutex::new(HashMap::new()) }
    }

    pub fn maximal(&self, req: MaximalRequest) -> Result<Arc<GridFunction>> {
        let key = request_key(&req);
        if let Some(bucket) = self.cache.lock().expect("cache lock").get(&key) {
            if let Some((_, g)) = bucket.iter().find(|(r, _)| *r == req) {
                return Ok(g.clone());
            }
        }
        let g = Arc::new(match self.engine {
            Engine::Fast => evaluate(&req)?,
            Engine::BruteForce => brute_force_maximal(&req)?,
        });
        let mut cache = self.cache.lock().expect("cache lock");
        let bucket = cache.entry(key).or_default();
        if !bucket.iter().any(|(r, _)| *r == req) {
            bucket.push((req, g.clone()));
        }
        Ok(g)
    }

    fn strong(&self, fs: &[GridFunction], basis: RectBasis) -> Result<Arc<GridFunction>> {
        self.maximal(MaximalRequest::new(fs.to_vec(), basis))
    }

    fn iterated(&self, w: &GridFunction) -> Result<Arc<GridFunction>> {
        let n = w.rank();
        if n == 1 {
            return self.strong(std::slice::from_ref(w), RectBasis::Cubes);
        }
        let mut cur = Arc::new(w.clone());
        for c in 1..n {
            cur = self.strong(std::slice::from_ref(&*cur), RectBasis::ComplexityC(c))?;
        }
        self.strong(std::slice::from_ref(&*cur), RectBasis::AllRects)
    }

    /// Dispatches on the case's theorem.
    pub fn run(&self, case: &VerificationCase) -> Result<RatioReport> {
        let start = Instant::now();
        check_case(case)?;
        let mut report = match case.theorem {
            Theorem::Tm1 => self.tm1(case),
            Theorem::Tm2 => self.tm2(case),
            Theorem::Cor => self.corollary(case),
            Theorem::Jmz => self.endpoint(case, EndpointKind::Jmz),
            Theorem::WeightedJmz => self.endpoint(case, EndpointKind::Weighted),
            Theorem::SaitoTanaka => self.endpoint(case, EndpointKind::SaitoTanaka),
            Theorem::ThmA => self.theorem_a(case),
            Theorem::EndpointM => self.endpoint_multilinear(case, None),
            Theorem::Sharpness => Err(config(
                "the sharpness probe runs on its own family; use sharpness_probe",
            )),
        }?;
        report.runtime = start.elapsed();
        Ok(report)
    }

    fn report(&self, case: &VerificationCase, lhs: f64, rhs: f64) -> RatioReport {
        let (ratio, flagged) = degenerate_ratio(lhs, rhs);
        RatioReport {
            label: case.label.clone(),
            theorem: case.theorem,
            dims: case.dims().to_vec(),
            lhs,
            rhs,
            ratio,
            flagged,
            levels: Vec::new(),
            hypothesis: None,
            warnings: Vec::new(),
            witness: flagged.then(|| Witness {
                case: case.label.clone(),
                level: None,
                point: None,
                lhs,
                rhs,
            }),
            runtime: Duration::ZERO,
        }
    }

    /// Builds the report of a level sweep from `(level, lhs, rhs, first point)`.
    fn sweep_report(
        &self,
        case: &VerificationCase,
        rows: Vec<(f64, f64, f64, Option<usize>)>,
    ) -> RatioReport {
        let mut report = self.report(case, 0.0, 0.0);
        let mut best: Option<usize> = None;
        for (i, &(level, lhs, rhs, first)) in rows.iter().enumerate() {
            let (ratio, flagged) = degenerate_ratio(lhs, rhs);
            if flagged && report.witness.is_none() {
                report.flagged = true;
                report.witness = Some(Witness {
                    case: case.label.clone(),
                    level: Some(level),
                    point: first.map(|idx| case.fs[0].point_of(idx).to_vec()),
                    lhs,
                    rhs,
                });
            }
            if best.is_none_or(|b| ratio > report.levels[b].ratio) {
                best = Some(i);
            }
            report.levels.push(LevelRow { level, lhs, rhs, ratio });
        }
        if let Some(b) = best {
            let row = &report.levels[b];
            (report.lhs, report.rhs, report.ratio) = (row.lhs, row.rhs, row.ratio);
        }
        report
    }

    /// `Σ [M_Ψ(f⃗)]^p ν` against `∏_j (Σ f_j^{p_j} M_R ω_j)^{p/p_j}`.
    pub fn tm1(&self, case: &VerificationCase) -> Result<RatioReport> {
        let p = case.p();
        let young = case
            .young
            .clone()
            .unwrap_or_else(|| vec![YoungFunction::Identity; case.fs.len()]);
        let m = self.maximal(MaximalRequest::orlicz(
            case.fs.clone(),
            young.clone(),
            RectBasis::AllRects,
            case.tol,
        ))?;
        let nu = nu_weight(&case.ws, &case.ps)?;
        let cm = m.cell_measure();
        let lhs = m.values().iter().zip(nu.values()).map(|(a, b)| a.powf(p) * b).sum::<f64>() * cm;
        let mut rhs = 1.0;
        for ((f, w), pj) in case.fs.iter().zip(&case.ws).zip(&case.ps) {
            let mw = self.strong(std::slice::from_ref(w), RectBasis::AllRects)?;
            let s: f64 = f.values().iter().zip(mw.values()).map(|(a, b)| a.powf(*pj) * b).sum();
            rhs *= (s * cm).powf(p / pj);
        }
        let mut report = self.report(case, lhs, rhs);
        report.hypothesis = Some(a_infinity_gate(&nu)?);
        let n = case.dims().len() as u32;
        for (psi, pj) in young.iter().zip(&case.ps) {
            let d = check_bstar_p(psi, *pj, n, 1.0, DEFAULT_T_MAX)?;
            if d.verdict != Verdict::Converges {
                report.warnings.push(format!(
                    "{psi} with p = {pj}: integrability diagnostic is {:?} (tail exponent {:.4})",
                    d.verdict, d.tail_exponent
                ));
            }
        }
        Ok(report)
    }

    /// `ν({M(f⃗) > t^m})^{1/p}` against `t^{-m} ∏_j ‖f_j‖_{L^{p_j}(W_j)}`, max over `t`.
    pub fn tm2(&self, case: &VerificationCase) -> Result<RatioReport> {
        let p = case.p();
        let mm = case.fs.len();
        let m = self.strong(&case.fs, RectBasis::AllRects)?;
        let nu = nu_weight(&case.ws, &case.ps)?;
        let mut norms = 1.0;
        for ((f, w), pj) in case.fs.iter().zip(&case.ws).zip(&case.ps) {
            norms *= weighted_norm(f, *pj, &*self.iterated(w)?);
        }
        let levels = case.levels.clone().unwrap_or_else(|| default_levels(m.max_value(), mm));
        let rows = levels
            .iter()
            .map(|&t| {
                let (meas, first) = level_measure(&m, t.powi(mm as i32), Some(&nu));
                (t, meas.powf(1.0 / p), norms / t.powi(mm as i32), first)
            })
            .collect();
        Ok(self.sweep_report(case, rows))
    }

    /// `Σ M(f⃗)^p ν` against `∏_j ‖f_j‖^p_{L^{p_j}(W_j)}`.
    pub fn corollary(&self, case: &VerificationCase) -> Result<RatioReport> {
        let p = case.p();
        let m = self.strong(&case.fs, RectBasis::AllRects)?;
        let nu = nu_weight(&case.ws, &case.ps)?;
        let lhs = m.values().iter().zip(nu.values()).map(|(a, b)| a.powf(p) * b).sum::<f64>()
            * m.cell_measure();
        let mut rhs = 1.0;
        for ((f, w), pj) in case.fs.iter().zip(&case.ws).zip(&case.ps) {
            rhs *= weighted_norm(f, *pj, &*self.iterated(w)?).powf(p);
        }
        Ok(self.report(case, lhs, rhs))
    }

    fn endpoint(&self, case: &VerificationCase, kind: EndpointKind) -> Result<RatioReport> {
        let f = &case.fs[0];
        let n = f.rank() as u32;
        let m = self.strong(std::slice::from_ref(f), RectBasis::AllRects)?;
        let (w, density, growth): (Option<&GridFunction>, Option<Arc<GridFunction>>, u32) = match kind {
            EndpointKind::Jmz => (None, None, n),
            EndpointKind::Weighted => {
                let w = &case.ws[0];
                (Some(w), Some(self.strong(std::slice::from_ref(w), RectBasis::AllRects)?), n)
            }
            EndpointKind::SaitoTanaka => {
                let w = &case.ws[0];
                let mq = self.strong(std::slice::from_ref(w), RectBasis::Cubes)?;
                let big_w = self.strong(std::slice::from_ref(&*mq), RectBasis::AllRects)?;
                (Some(w), Some(big_w), 2)
            }
        };
        let levels = case.levels.clone().unwrap_or_else(|| default_levels(m.max_value(), 1));
        let cm = f.cell_measure();
        let rows = levels
            .iter()
            .map(|&t| {
                let (lhs, first) = level_measure(&m, t, w);
                let rhs = f
                    .values()
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| {
                        phi_n(growth, v / t) * density.as_ref().map_or(1.0, |d| d.values()[i])
                    })
                    .sum::<f64>()
                    * cm;
                (t, lhs, rhs, first)
            })
            .collect();
        Ok(self.sweep_report(case, rows))
    }

    /// `ω({M_R f > t})^{1/p}` against `t^{-1} ‖f‖_{L^p(W)}`, max over `t`.
    pub fn theorem_a(&self, case: &VerificationCase) -> Result<RatioReport> {
        let (f, w, p) = (&case.fs[0], &case.ws[0], case.ps[0]);
        let m = self.strong(std::slice::from_ref(f), RectBasis::AllRects)?;
        let norm = weighted_norm(f, p, &*self.iterated(w)?);
        let levels = case.levels.clone().unwrap_or_else(|| default_levels(m.max_value(), 1));
        let rows = levels
            .iter()
            .map(|&t| {
                let (meas, first) = level_measure(&m, t, Some(w));
                (t, meas.powf(1.0 / p), norm / t, first)
            })
            .collect();
        Ok(self.sweep_report(case, rows))
    }

    /// `|{M(f⃗) > λ^m}|` against `(∏_i ∫ Φ_n^{(k)}(f_i/λ))^{1/m}`, max over `λ`.
    /// `k` defaults to `m`.
    pub fn endpoint_multilinear(&self, case: &VerificationCase, k: Option<u32>) -> Result<RatioReport> {
        let mm = case.fs.len();
        let n = case.dims().len() as u32;
        let k = k.unwrap_or(mm as u32);
        let m = self.strong(&case.fs, RectBasis::AllRects)?;
        let levels = case.levels.clone().unwrap_or_else(|| default_levels(m.max_value(), mm));
        let cm = m.cell_measure();
        let rows = levels
            .iter()
            .map(|&lam| {
                let (lhs, first) = level_measure(&m, lam.powi(mm as i32), None);
                let prod: f64 = case
                    .fs
                    .iter()
                    .map(|f| f.values().iter().map(|&v| phi_n_iterate(n, k, v / lam)).sum::<f64>() * cm)
                    .product();
                let rhs = if mm == 1 { prod } else { prod.powf(1.0 / mm as f64) };
                (lam, lhs, rhs, first)
            })
            .collect();
        Ok(self.sweep_report(case, rows))
    }
}

#[derive(Clone, Copy)]
enum EndpointKind {
    Jmz,
    Weighted,
    SaitoTanaka,
}

fn check_case(case: &VerificationCase) -> Result<()> {
    let fail = |msg: String| Err(config(format!("case {}: {msg}", case.label)));
    if case.fs.is_empty() {
        return fail("needs at least one function".into());
    }
    for g in case.fs.iter().chain(&case.ws) {
        case.fs[0].check_same_shape(g)?;
    }
    let m = case.fs.len();
    let t = case.theorem;
    let needs_exponents = matches!(t, Theorem::Tm1 | Theorem::Tm2 | Theorem::Cor | Theorem::ThmA);
    if needs_exponents {
        let want = if t == Theorem::ThmA { 1 } else { m };
        if case.ps.len() != want {
            return fail(format!("expects {want} exponents, got {}", case.ps.len()));
        }
        if let Some(p) = case.ps.iter().find(|p| !(p.is_finite() && **p > 1.0)) {
            return fail(format!("exponents must lie in (1, ∞), got {p}"));
        }
    }
    if t.is_weighted() {
        let want = if matches!(t, Theorem::Tm1 | Theorem::Tm2 | Theorem::Cor) { m } else { 1 };
        if case.ws.len() != want {
            return fail(format!("expects {want} weights, got {}", case.ws.len()));
        }
    }
    if matches!(t, Theorem::Jmz | Theorem::WeightedJmz | Theorem::SaitoTanaka | Theorem::ThmA) && m != 1 {
        return fail(format!("expects one function, got {m}"));
    }
    if t == Theorem::SaitoTanaka && case.dims().len() != 2 {
        return fail("is planar only".into());
    }
    if let Some(ys) = &case.young {
        if ys.len() != m {
            return fail(format!("{} Young functions for {m} functions", ys.len()));
        }
    }
    if let Some(levels) = &case.levels {
        if let Some(l) = levels.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return fail(format!("levels must be positive, got {l}"));
        }
    }
    Ok(())
}

/// `ν` passes when it is positive and has a finite `A_p` constant for some
/// `p ∈ {2, 4, 8}`.
pub fn a_infinity_gate(nu: &GridFunction) -> Result<HypothesisCheck> {
    if nu.values().iter().any(|&v| v <= 0.0) {
        return Ok(HypothesisCheck {
            in_hypothesis: false,
            p: None,
            ap_constant: None,
            note: Some("ν vanishes somewhere".into()),
        });
    }
    for p in [2.0, 4.0, 8.0] {
        let c = ap_constant(nu, p, RectBasis::AllRects)?.constant;
        if c.is_finite() {
            return Ok(HypothesisCheck { in_hypothesis: true, p: Some(p), ap_constant: Some(c), note: None });
        }
    }
    Ok(HypothesisCheck {
        in_hypothesis: false,
        p: None,
        ap_constant: None,
        note: Some("no finite A_p constant for p in {2, 4, 8}".into()),
    })
}

/// Runs the case with a fresh fast verifier.
pub fn verify(case: &VerificationCase) -> Result<RatioReport> {
    Verifier::default().run(case)
}

pub fn verify_tm1(case: &VerificationCase) -> Result<RatioReport> {
    Verifier::default().tm1(case)
}

pub fn verify_tm2(case: &VerificationCase) -> Result<RatioReport> {
    Verifier::default().tm2(case)
}

pub fn verify_corollary(case: &VerificationCase) -> Result<RatioReport> {
    Verifier::default().corollary(case)
}

fn single(theorem: Theorem, f: &GridFunction, w: Option<&GridFunction>, levels: Option<&[f64]>) -> VerificationCase {
    let mut case = VerificationCase::new(theorem.name(), theorem, vec![f.clone()]);
    case.ws = w.into_iter().cloned().collect();
    case.levels = levels.map(|l| l.to_vec());
    case
}

/// `|{M_R f > λ}|` against `∫ Φ_n(f/λ)`, max over `λ`.
pub fn verify_endpoint_jmz(f: &GridFunction, levels: Option<&[f64]>) -> Result<RatioReport> {
    Verifier::default().run(&single(Theorem::Jmz, f, None, levels))
}

/// `ω({M_R f > λ})` against `∫ Φ_n(f/λ) M_R ω`, max over `λ`.
pub fn verify_endpoint_weighted(
    f: &GridFunction,
    w: &GridFunction,
    levels: Option<&[f64]>,
) -> Result<RatioReport> {
    Verifier::default().run(&single(Theorem::WeightedJmz, f, Some(w), levels))
}

/// `ω({M_R f > t})` against `∫ (f/t)(1 + log⁺(f/t)) M_R M_Q ω`, planar only.
pub fn verify_saito_tanaka(
    f: &GridFunction,
    w: &GridFunction,
    levels: Option<&[f64]>,
) -> Result<RatioReport> {
    Verifier::default().run(&single(Theorem::SaitoTanaka, f, Some(w), levels))
}

pub fn verify_theorem_a(
    f: &GridFunction,
    w: &GridFunction,
    p: f64,
    levels: Option<&[f64]>,
) -> Result<RatioReport> {
    let case = single(Theorem::ThmA, f, Some(w), levels).with_exponents(vec![p]);
    Verifier::default().run(&case)
}

pub fn verify_endpoint_multilinear(fs: &[GridFunction], levels: Option<&[f64]>) -> Result<RatioReport> {
    let mut case = VerificationCase::new("endpoint-m", Theorem::EndpointM, fs.to_vec());
    case.levels = levels.map(|l| l.to_vec());
    Verifier::default().run(&case)
}

/// One rung of the sharpness ladder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessRow {
    pub side: usize,
    /// Endpoint ratio with `Φ_n^{(k)}`.
    pub ratio_k: f64,
    /// Endpoint ratio with `Φ_n^{(m)}`.
    pub ratio_m: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessReport {
    pub n: usize,
    pub m: usize,
    pub k: u32,
    pub rows: Vec<SharpnessRow>,
}

impl SharpnessReport {
    /// `ratio_k` strictly increases along the ladder.
    pub fn k_strictly_increasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].ratio_k > w[0].ratio_k)
    }

    pub fn growth_k(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |l| l.ratio_k / self.rows[0].ratio_k)
    }

    pub fn growth_m(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |l| l.ratio_m / self.rows[0].ratio_m)
    }

    /// The expected signature: the under-iterated curve increases and
    /// outgrows the fully iterated one.
    pub fn signature_holds(&self) -> bool {
        self.rows.len() >= 2 && self.k_strictly_increasing() && self.growth_m() < self.growth_k()
    }
}

/// Factor `i` of the adversarial family on `N^n`: a spike on the corner cell
/// with mass `N^{n i}`, so consecutive factors differ by the factor `N^n`.
///
/// Averages over a rectangle through the corner are proportional to each
/// other, and the level sets of the product are those of a single spike at
/// a height that grows with `N`. One application of `Φ_n` then undercounts
/// the logarithms the level set picks up.
pub fn adversarial_family(n: usize, m: usize, side: usize) -> Result<Vec<GridFunction>> {
    let dims = vec![side; n];
    let cells = (side as f64).powi(n as i32);
    let corner = vec![0usize; n];
    (0..m)
        .map(|i| {
            let height = cells * cells.powi(i as i32);
            GridFunction::from_fn(&dims, 1.0 / cells, |p| if p == corner.as_slice() { height } else { 0.0 })
        })
        .collect()
}

/// Number of levels used by the sharpness probe.
pub const SHARPNESS_LEVELS: usize = 48;

/// `λ` with `λ^m` log-spaced over `[max · N^{-2m}, max]`.
pub fn sharpness_levels(max: f64, m: usize, side: usize) -> Vec<f64> {
    let lo = max * (side as f64).powi(-2 * m as i32);
    (0..SHARPNESS_LEVELS)
        .map(|i| {
            let tau = lo * (max / lo).powf(i as f64 / (SHARPNESS_LEVELS - 1) as f64);
            tau.powf(1.0 / m as f64)
        })
        .collect()
}

/// Endpoint ratios of the adversarial family with `Φ_n^{(k)}` and `Φ_n^{(m)}`
/// along a ladder of lattice sides.
pub fn sharpness_probe(n: usize, m: usize, k: u32, ladder: &[usize]) -> Result<SharpnessReport> {
    sharpness_probe_with(&Verifier::default(), n, m, k, ladder)
}

pub fn sharpness_probe_with(
    verifier: &Verifier,
    n: usize,
    m: usize,
    k: u32,
    ladder: &[usize],
) -> Result<SharpnessReport> {
    if k == 0 || k as usize > m {
        return Err(config(format!("sharpness probe needs 1 <= k <= m, got k = {k}, m = {m}")));
    }
    let mut rows = Vec::new();
    for &side in ladder {
        let fs = adversarial_family(n, m, side)?;
        let mx = verifier.strong(&fs, RectBasis::AllRects)?.max_value();
        let case = VerificationCase::new(format!("sharpness-N{side}"), Theorem::EndpointM, fs)
            .with_levels(sharpness_levels(mx, m, side));
        let ratio_k = verifier.endpoint_multilinear(&case, Some(k))?.ratio;
        let ratio_m = verifier.endpoint_multilinear(&case, Some(m as u32))?.ratio;
        rows.push(SharpnessRow { side, ratio_k, ratio_m });
    }
    Ok(SharpnessReport { n, m, k, rows })
}

/// Sharpness section of a run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SharpnessConfig {
    #[serde(default = "two")]
    pub m: usize,
    #[serde(default = "one")]
    pub k: u32,
    pub ladder: Vec<usize>,
}

fn one() -> u32 {
    1
}

fn two() -> usize {
    2
}

fn default_rank() -> usize {
    2
}

/// A suite: theorems × weights × refinements, from catalog profiles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_rank")]
    pub rank: usize,
    /// Lattice side per refinement; each lattice is `side^rank`.
    pub dims_ladder: Vec<usize>,
    pub theorems: Vec<Theorem>,
    #[serde(default)]
    pub weights: Vec<Profile>,
    pub functions: Vec<Profile>,
    #[serde(default)]
    pub exponents: Vec<f64>,
    #[serde(default)]
    pub young: Option<Vec<YoungFunction>>,
    #[serde(default)]
    pub levels: Option<Vec<f64>>,
    #[serde(default = "default_tol")]
    pub luxemburg_tol: f64,
    #[serde(default)]
    pub sharpness: Option<SharpnessConfig>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    /// The bundled suite.
    pub fn default_suite() -> RunConfig {
        let p = |s: &str| s.parse::<Profile>().expect("bundled profile names are valid");
        RunConfig {
            seed: 0,
            rank: 2,
            dims_ladder: vec![8, 16],
            theorems: Theorem::ALL.to_vec(),
            weights: ["constant", "power:-0.5", "power:0.5", "smooth-checkerboard", "lognormal:0.5", "checkerboard:2:0:1", "delta-spike:4"]
                .into_iter()
                .map(p)
                .collect(),
            functions: vec![p("indicator:0.25:0.75"), p("ramp")],
            exponents: vec![2.0, 2.0],
            young: Some(vec![YoungFunction::LLogK(1.0), YoungFunction::LLogK(1.0)]),
            levels: None,
            luxemburg_tol: 1e-9,
            sharpness: Some(SharpnessConfig { m: 2, k: 1, ladder: vec![8, 16, 32] }),
            output_dir: None,
        }
    }

    pub fn from_json(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| {
            config(format!("config line {}, column {}: {e}", e.line(), e.column()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rank == 0 || self.rank > crate::grid::DEFAULT_MAX_RANK {
            return Err(config(format!("rank must lie in 1..=4, got {}", self.rank)));
        }
        if self.dims_ladder.contains(&0) {
            return Err(config("lattice sides must be positive"));
        }
        if let Some(w) = self.weights.iter().find(|w| !w.is_weight()) {
            return Err(config(format!("{w} is not a weight kind")));
        }
        let cases = self.theorems.iter().any(|t| *t != Theorem::Sharpness);
        if cases && self.functions.is_empty() {
            return Err(config("at least one function profile is required"));
        }
        let weighted = self.theorems.iter().any(|t| t.is_weighted());
        if weighted && self.weights.is_empty() {
            return Err(config("weighted theorems need at least one weight profile"));
        }
        let m = self.functions.len();
        if self.theorems.iter().any(|t| matches!(t, Theorem::Tm1 | Theorem::Tm2 | Theorem::Cor))
            && self.exponents.len() != m
        {
            return Err(config(format!("{} exponents for {m} functions", self.exponents.len())));
        }
        if self.theorems.contains(&Theorem::ThmA) && self.exponents.is_empty() {
            return Err(config("thm-a needs an exponent"));
        }
        if self.theorems.contains(&Theorem::SaitoTanaka) && self.rank != 2 {
            return Err(config("saito-tanaka needs rank 2"));
        }
        if self.theorems.contains(&Theorem::Sharpness) && self.sharpness.is_none() {
            return Err(config("sharpness needs a \"sharpness\" section"));
        }
        if let Some(ys) = &self.young {
            if ys.len() != m {
                return Err(config(format!("{} Young functions for {m} functions", ys.len())));
            }
        }
        Ok(())
    }

    /// Restricts the run to one theorem.
    pub fn only(mut self, theorem: Theorem) -> RunConfig {
        self.theorems = vec![theorem];
        self
    }

    /// Every case of the suite, in a fixed order.
    pub fn cases(&self) -> Result<Vec<VerificationCase>> {
        let mut out = Vec::new();
        for &th in &self.theorems {
            if th == Theorem::Sharpness {
                continue;
            }
            for &side in &self.dims_ladder {
                let dims = vec![side; self.rank];
                let fs: Vec<GridFunction> = self
                    .functions
                    .iter()
                    .enumerate()
                    .map(|(j, f)| f.generate(&dims, self.seed.wrapping_add(1000 + j as u64)))
                    .collect::<Result<_>>()?;
                let multi = matches!(th, Theorem::Tm1 | Theorem::Tm2 | Theorem::Cor | Theorem::EndpointM);
                let fs = if multi { fs } else { fs[..1].to_vec() };
                let weights: Vec<Option<(usize, &Profile)>> = if th.is_weighted() {
                    self.weights.iter().enumerate().map(Some).collect()
                } else {
                    vec![None]
                };
                for w in weights {
                    let label = match w {
                        Some((_, prof)) => format!("{th}-{prof}-N{side}"),
                        None => format!("{th}-N{side}"),
                    };
                    let mut case = VerificationCase::new(label, th, fs.clone()).with_tol(self.luxemburg_tol);
                    if let Some((wi, prof)) = w {
                        let g = prof.generate(&dims, self.seed.wrapping_add(wi as u64))?;
                        let count = if th == Theorem::ThmA || !multi { 1 } else { fs.len() };
                        case.ws = vec![g; count];
                    }
                    case.ps = match th {
                        Theorem::Tm1 | Theorem::Tm2 | Theorem::Cor => self.exponents.clone(),
                        Theorem::ThmA => vec![self.exponents[0]],
                        _ => Vec::new(),
                    };
                    if th == Theorem::Tm1 {
                        case.young = self.young.clone();
                    }
                    case.levels = self.levels.clone();
                    out.push(case);
                }
            }
        }
        Ok(out)
    }
}

/// Per-theorem aggregate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub theorem: Theorem,
    pub cases: usize,
    pub max_ratio: f64,
    pub flagged: usize,
}

/// Ratio of one case at one refinement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementRow {
    pub theorem: Theorem,
    /// Case label without the refinement suffix.
    pub family: String,
    pub side: usize,
    pub ratio: f64,
    pub in_hypothesis: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub reports: Vec<RatioReport>,
    pub summary: Vec<SummaryRow>,
    pub refinements: Vec<RefinementRow>,
    pub sharpness: Option<SharpnessReport>,
}

impl SuiteOutcome {
    pub fn flagged(&self) -> impl Iterator<Item = &RatioReport> {
        self.reports.iter().filter(|r| r.flagged)
    }

    /// Largest finest-over-coarsest ratio growth among the families of `theorem`,
    /// with the family attaining it.
    pub fn refinement_growth(&self, theorem: Theorem) -> Vec<(String, f64)> {
        let mut families: Vec<&str> = Vec::new();
        for r in self.refinements.iter().filter(|r| r.theorem == theorem) {
            if !families.contains(&r.family.as_str()) {
                families.push(&r.family);
            }
        }
        families
            .into_iter()
            .map(|fam| {
                let rows: Vec<&RefinementRow> =
                    self.refinements.iter().filter(|r| r.family == fam && r.theorem == theorem).collect();
                let first = rows.iter().min_by_key(|r| r.side).expect("family has rows");
                let last = rows.iter().max_by_key(|r| r.side).expect("family has rows");
                let (g, _) = degenerate_ratio(last.ratio, first.ratio);
                (fam.to_string(), g)
            })
            .collect()
    }

    /// Writes `reports/<case>.json`, `summary.csv`, `refinements.csv` and,
    /// when the probe ran, `sharpness.csv` under `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let reports = dir.join("reports");
        std::fs::create_dir_all(&reports)?;
        for r in &self.reports {
            let path = reports.join(format!("{}.json", file_stem(&r.label)));
            std::fs::write(path, serde_json::to_string_pretty(r)? + "\n")?;
        }
        let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
        w.write_record(["theorem", "cases", "max_ratio", "flagged"])?;
        for s in &self.summary {
            w.write_record([s.theorem.name(), &s.cases.to_string(), &fmt_f64(s.max_ratio), &s.flagged.to_string()])?;
        }
        w.flush()?;
        let mut w = csv::Writer::from_path(dir.join("refinements.csv"))?;
        w.write_record(["theorem", "family", "side", "ratio", "in_hypothesis"])?;
        for r in &self.refinements {
            let hyp = r.in_hypothesis.map_or(String::new(), |b| b.to_string());
            w.write_record([r.theorem.name(), &r.family, &r.side.to_string(), &fmt_f64(r.ratio), &hyp])?;
        }
        w.flush()?;
        if let Some(s) = &self.sharpness {
            write_sharpness_csv(s, &dir.join("sharpness.csv"))?;
        }
        Ok(())
    }
}

pub fn write_sharpness_csv(s: &SharpnessReport, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["side", &format!("ratio_k{}", s.k), &format!("ratio_k{}", s.m)])?;
    for r in &s.rows {
        w.write_record([r.side.to_string(), fmt_f64(r.ratio_k), fmt_f64(r.ratio_m)])?;
    }
    w.flush()?;
    Ok(())
}

/// Shortest round-tripping decimal form.
fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '.' | '_') { c } else { '_' })
        .collect()
}

/// Runs every case of `cfg` and aggregates the results.
pub fn suite_sweep(cfg: &RunConfig) -> Result<SuiteOutcome> {
    suite_sweep_with(&Verifier::default(), cfg)
}

pub fn suite_sweep_with(verifier: &Verifier, cfg: &RunConfig) -> Result<SuiteOutcome> {
    cfg.validate()?;
    let cases = cfg.cases()?;
    let reports: Vec<RatioReport> =
        cases.par_iter().map(|c| verifier.run(c)).collect::<Result<_>>()?;
    let mut summary = Vec::new();
    for &th in &cfg.theorems {
        if th == Theorem::Sharpness {
            continue;
        }
        let rs: Vec<&RatioReport> = reports.iter().filter(|r| r.theorem == th).collect();
        summary.push(SummaryRow {
            theorem: th,
            cases: rs.len(),
            max_ratio: rs.iter().map(|r| r.ratio).fold(0.0, f64::max),
            flagged: rs.iter().filter(|r| r.flagged).count(),
        });
    }
    let refinements = reports
        .iter()
        .map(|r| {
            let side = r.dims[0];
            let suffix = format!("-N{side}");
            RefinementRow {
                theorem: r.theorem,
                family: r.label.strip_suffix(&suffix).unwrap_or(&r.label).to_string(),
                side,
                ratio: r.ratio,
                in_hypothesis: r.hypothesis.as_ref().map(|h| h.in_hypothesis),
            }
        })
        .collect();
    let sharpness = match (&cfg.sharpness, cfg.theorems.contains(&Theorem::Sharpness)) {
        (Some(s), true) => Some(sharpness_probe_with(verifier, cfg.rank, s.m, s.k, &s.ladder)?),
        _ => None,
    };
    if let Some(s) = &sharpness {
        summary.push(SummaryRow {
            theorem: Theorem::Sharpness,
            cases: s.rows.len(),
            max_ratio: s.rows.iter().map(|r| r.ratio_k).fold(0.0, f64::max),
            flagged: 0,
        });
    }
    Ok(SuiteOutcome { reports, summary, refinements, sharpness })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(dims: &[usize], vals: Vec<f64>) -> GridFunction {
        GridFunction::new(dims.to_vec(), vals, 1.0).unwrap()
    }

    #[test]
    fn degenerate_rule() {
        assert_eq!(degenerate_ratio(0.0, 0.0), (0.0, false));
        assert_eq!(degenerate_ratio(1.0, 2.0), (0.5, false));
        assert!(degenerate_ratio(1.0, 0.0).1);
    }

    #[test]
    fn default_level_schedule() {
        let l = default_levels(8.0, 1);
        assert_eq!(l.len(), DEFAULT_LEVEL_COUNT);
        assert_eq!(l[DEFAULT_LEVEL_COUNT - 1], 8.0);
        assert!((l[0] - 8e-3).abs() < 1e-15);
        assert!(l.windows(2).all(|w| w[0] < w[1]));
        assert!(default_levels(0.0, 2).is_empty());
        assert!((default_levels(4.0, 2)[DEFAULT_LEVEL_COUNT - 1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_inputs_pass() {
        let z = GridFunction::zeros(&[4, 4]).unwrap();
        let one = GridFunction::constant(&[4, 4], 1.0).unwrap();
        for th in [Theorem::Tm1, Theorem::Tm2, Theorem::Cor] {
            let case = VerificationCase::new("z", th, vec![z.clone(), z.clone()])
                .with_weights(vec![one.clone(), one.clone()])
                .with_exponents(vec![2.0, 2.0]);
            let r = verify(&case).unwrap();
            assert_eq!(r.ratio, 0.0);
            assert!(!r.flagged);
        }
        let r = verify_endpoint_jmz(&z, None).unwrap();
        assert_eq!((r.ratio, r.flagged), (0.0, false));
    }

    #[test]
    fn level_above_max_is_empty() {
        let f = g(&[4], vec![1.0, 0.0, 0.0, 0.0]);
        let r = verify_endpoint_jmz(&f, Some(&[2.0])).unwrap();
        assert_eq!(r.levels[0].lhs, 0.0);
        assert_eq!(r.ratio, 0.0);
    }

    #[test]
    fn flagged_when_weight_side_vanishes() {
        // weight lives on the level set but the right side weight vanishes where f lives
        let f = g(&[4], vec![1.0, 0.0, 0.0, 0.0]);
        let w = g(&[4], vec![0.0, 0.0, 0.0, 1.0]);
        let r = verify_endpoint_weighted(&f, &w, Some(&[0.2])).unwrap();
        // M_R ω > 0 everywhere, so nothing is flagged
        assert!(!r.flagged);
        assert!(r.ratio > 0.0);
    }

    #[test]
    fn theorem_names() {
        for t in Theorem::ALL {
            assert_eq!(t.name().parse::<Theorem>().unwrap(), t);
        }
        assert!("tm3".parse::<Theorem>().is_err());
    }

    #[test]
    fn default_suite_round_trips() {
        let cfg = RunConfig::default_suite();
        let back = RunConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert!(RunConfig::from_json("{\"bogus\": 1}").is_err());
    }

    #[test]
    fn sharpness_k_equals_m_matches_endpoint() {
        let rep = sharpness_probe(2, 2, 2, &[8]).unwrap();
        assert_eq!(rep.rows[0].ratio_k, rep.rows[0].ratio_m);
        let fs = adversarial_family(2, 2, 8).unwrap();
        let mx = evaluate(&MaximalRequest::new(fs.clone(), RectBasis::AllRects)).unwrap().max_value();
        let r = verify_endpoint_multilinear(&fs, Some(&sharpness_levels(mx, 2, 8))).unwrap();
        assert_eq!(r.ratio, rep.rows[0].ratio_m);
    }
}
