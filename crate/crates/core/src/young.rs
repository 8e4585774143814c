//! Young functions and the Orlicz averages they generate.
//!
//! A [`YoungFunction`] is evaluated pointwise; [`luxemburg_norm`] turns it into
//! the Luxemburg average of a grid over a rectangle, [`complementary`] gives the
//! numeric Legendre-type conjugate, and [`check_bstar_p`] is a numerical
//! diagnostic for the integrability condition that makes the associated Orlicz
//! maximal operator bounded on `L^p`.

use std::f64::consts::E;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Error, Result};
use crate::grid::{GridFunction, Rect};

/// Upper search limit used when a complementary function is built without an
/// explicit one.
pub const DEFAULT_T_MAX: f64 = 1e12;

/// Convex increasing map `[0, inf) -> [0, inf)` with `Φ(0) = 0`.
///
/// Names used on the command line and in configuration files:
/// `identity`, `power:p`, `llogk:k`, `phi_n:n`, and
/// `complementary:<inner>` for the numeric conjugate of another function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum YoungFunction {
    /// `t`
    Identity,
    /// `t^p`, `p >= 1`
    Power(f64),
    /// `t [log(e + t)]^k`, `k >= 0`
    LLogK(f64),
    /// `t [1 + (log⁺ t)^(n-1)]`, see [`phi_n`]
    PhiN(u32),
    /// Numeric complementary function of `base`, searched over `[0, t_max]`.
    Complementary { base: Box<YoungFunction>, t_max: f64 },
}

impl YoungFunction {
    pub fn power(p: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(config(format!("power Young function needs p >= 1, got {p}")));
        }
        Ok(YoungFunction::Power(p))
    }

    pub fn llogk(k: f64) -> Result<Self> {
        if !(k.is_finite() && k >= 0.0) {
            return Err(config(format!("llogk Young function needs k >= 0, got {k}")));
        }
        Ok(YoungFunction::LLogK(k))
    }

    pub fn phi(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(config("phi_n needs n >= 1"));
        }
        Ok(YoungFunction::PhiN(n))
    }

    pub fn complementary_of(base: YoungFunction, t_max: f64) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(config(format!("t_max must be positive, got {t_max}")));
        }
        Ok(YoungFunction::Complementary { base: Box::new(base), t_max })
    }

    /// Φ(t) for `t >= 0`.
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            YoungFunction::Identity => t,
            YoungFunction::Power(p) => {
                if *p == 2.0 {
                    t * t
                } else {
                    t.powf(*p)
                }
            }
            YoungFunction::LLogK(k) => {
                if *k == 0.0 {
                    t
                } else if *k == 1.0 {
                    t * (E + t).ln()
                } else {
                    t * (E + t).ln().powf(*k)
                }
            }
            YoungFunction::PhiN(n) => phi_n(*n, t),
            YoungFunction::Complementary { base, t_max } => conjugate(base, t, *t_max),
        }
    }

    /// The named functions exercised by the ladder checks.
    pub fn named_catalog() -> Vec<YoungFunction> {
        vec![
            YoungFunction::Identity,
            YoungFunction::Power(1.5),
            YoungFunction::Power(2.0),
            YoungFunction::Power(3.0),
            YoungFunction::LLogK(1.0),
            YoungFunction::LLogK(2.0),
            YoungFunction::PhiN(1),
            YoungFunction::PhiN(2),
            YoungFunction::PhiN(3),
        ]
    }
}

impl fmt::Display for YoungFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            YoungFunction::Identity => write!(f, "identity"),
            YoungFunction::Power(p) => write!(f, "power:{p}"),
            YoungFunction::LLogK(k) => write!(f, "llogk:{k}"),
            YoungFunction::PhiN(n) => write!(f, "phi_n:{n}"),
            YoungFunction::Complementary { base, t_max } => {
                if *t_max == DEFAULT_T_MAX {
                    write!(f, "complementary:{base}")
                } else {
                    write!(f, "complementary@{t_max}:{base}")
                }
            }
        }
    }
}

impl FromStr for YoungFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "identity" {
            return Ok(YoungFunction::Identity);
        }
        if let Some(rest) = s.strip_prefix("complementary") {
            let (t_max, inner) = match rest.strip_prefix('@') {
                Some(r) => {
                    let (num, inner) = r
                        .split_once(':')
                        .ok_or_else(|| config(format!("malformed Young function {s:?}")))?;
                    let t: f64 = num
                        .parse()
                        .map_err(|_| config(format!("bad t_max in {s:?}")))?;
                    (t, inner)
                }
                None => (
                    DEFAULT_T_MAX,
                    rest.strip_prefix(':')
                        .ok_or_else(|| config(format!("malformed Young function {s:?}")))?,
                ),
            };
            return YoungFunction::complementary_of(inner.parse()?, t_max);
        }
        let (name, arg) = s
            .split_once(':')
            .ok_or_else(|| config(format!("unknown Young function {s:?}")))?;
        let num = |a: &str| -> Result<f64> {
            a.parse::<f64>()
                .map_err(|_| config(format!("bad parameter {a:?} in Young function {s:?}")))
        };
        match name {
            "power" => YoungFunction::power(num(arg)?),
            "llogk" => YoungFunction::llogk(num(arg)?),
            "phi_n" => {
                let n: u32 = arg
                    .parse()
                    .map_err(|_| config(format!("bad n in Young function {s:?}")))?;
                YoungFunction::phi(n)
            }
            _ => Err(config(format!("unknown Young function {s:?}"))),
        }
    }
}

impl TryFrom<String> for YoungFunction {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<YoungFunction> for String {
    fn from(y: YoungFunction) -> Self {
        y.to_string()
    }
}

/// `Φ_n(t) = t [1 + (log⁺ t)^(n-1)]`, with `Φ_1(t) = t`.
pub fn phi_n(n: u32, t: f64) -> f64 {
    if n <= 1 {
        return t;
    }
    let lp = if t > 1.0 { t.ln() } else { 0.0 };
    t * (1.0 + lp.powi(n as i32 - 1))
}

/// `Φ_n` composed with itself `m` times.
pub fn phi_n_iterate(n: u32, m: u32, t: f64) -> f64 {
    (0..m).fold(t, |acc, _| phi_n(n, acc))
}

/// The variant `t [log(e + t)]^(n-1)` used by the integrability condition.
pub fn phi_n_log_e(n: u32, t: f64) -> f64 {
    if n <= 1 {
        return t;
    }
    t * (E + t).ln().powi(n as i32 - 1)
}

/// Luxemburg norm of `g` over `r`:
/// `inf { λ > 0 : |r|⁻¹ Σ_{x∈r} Ψ(|g(x)|/λ) · cell_measure <= 1 }`.
pub fn luxemburg_norm(g: &GridFunction, r: &Rect, psi: &YoungFunction, tol: f64) -> Result<f64> {
    if !r.fits_in(g.dims()) {
        return Err(domain(format!("rectangle {r} is outside the lattice {:?}", g.dims())));
    }
    let values: Vec<f64> = r.points().map(|p| g.get(&p)).collect();
    luxemburg_norm_values(&values, psi, tol)
}

/// Luxemburg norm of a finite sample with uniform cell weights.
///
/// Works on the sample rescaled by its maximum, which makes the result
/// equivariant under scaling of the input: only the final multiplication
/// differs between `g` and `a g`. The bracket around the root is widened by
/// factors of two until the mean constraint straddles 1, then narrowed by
/// geometric bisection until `hi / lo - 1 <= tol`. The returned value is the
/// feasible end of the final bracket.
pub fn luxemburg_norm_values(values: &[f64], psi: &YoungFunction, tol: f64) -> Result<f64> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(config(format!("Luxemburg tolerance must be positive, got {tol}")));
    }
    if values.is_empty() {
        return Err(domain("Luxemburg norm over an empty set"));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(domain(format!("non-finite value {v} in Luxemburg norm")));
    }
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Ok(0.0);
    }
    if *psi == YoungFunction::Identity {
        // the infimum solves mean(|g|)/λ = 1
        let mean = values.iter().map(|v| v.abs()).sum::<f64>() / values.len() as f64;
        return Ok(mean);
    }
    let scaled: Vec<f64> = values.iter().map(|v| v.abs() / peak).collect();
    let count = scaled.len() as f64;
    let mean_at = |lambda: f64| scaled.iter().map(|&u| psi.eval(u / lambda)).sum::<f64>() / count;

    const MAX_STEPS: usize = 2100;
    let (mut lo, mut hi) = (1.0f64, 1.0f64);
    if mean_at(1.0) > 1.0 {
        let mut steps = 0;
        while mean_at(hi) > 1.0 {
            lo = hi;
            hi *= 2.0;
            steps += 1;
            if steps > MAX_STEPS {
                return Err(domain(format!("no feasible λ found for {psi}")));
            }
        }
    } else {
        let mut steps = 0;
        while mean_at(lo) <= 1.0 {
            hi = lo;
            lo *= 0.5;
            steps += 1;
            if steps > MAX_STEPS {
                return Err(domain(format!("{psi} does not grow enough to bracket the norm")));
            }
        }
    }
    while hi / lo - 1.0 > tol {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if mean_at(mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(peak * hi)
}

fn conjugate(base: &YoungFunction, s: f64, t_max: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let objective = |t: f64| s * t - base.eval(t);
    // unimodal in t (concave), hence unimodal in log t as well
    let phi = |u: f64| objective(u.exp());
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = t_max.ln() - 80.0;
    let mut b = t_max.ln();
    let mut c = b - golden * (b - a);
    let mut d = a + golden * (b - a);
    let (mut fc, mut fd) = (phi(c), phi(d));
    while b - a > 1e-12 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - golden * (b - a);
            fc = phi(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + golden * (b - a);
            fd = phi(d);
        }
    }
    let interior = phi(0.5 * (a + b));
    [0.0, interior, fc, fd, objective(t_max)]
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Numeric complementary function `sup_{0 <= t <= t_max} (s t - Ψ(t))`.
///
/// The supremum is located by golden-section search in `log t`, which is
/// valid because the objective is concave in `t`. When the true maximiser
/// lies beyond `t_max` the result is a lower bound for the untruncated
/// conjugate.
pub fn complementary(psi: &YoungFunction, s: f64, t_max: f64) -> Result<f64> {
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(config(format!("t_max must be positive, got {t_max}")));
    }
    if !(s.is_finite() && s >= 0.0) {
        return Err(domain(format!("complementary function needs s >= 0, got {s}")));
    }
    Ok(conjugate(psi, s, t_max))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Converges,
    Diverges,
    Inconclusive,
}

/// Outcome of [`check_bstar_p`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BStarDiagnostic {
    pub verdict: Verdict,
    /// Trapezoid value of the integral over `[c_lo, t_max]`.
    pub partial_integral: f64,
    /// Fitted power `β` in `integrand(t) ≈ C t^β (log t)^κ` on the tail.
    pub tail_exponent: f64,
    /// Fitted logarithmic power `κ`.
    pub log_power: f64,
}

/// Dead band around the critical exponent `-1`.
pub const BSTAR_DEAD_BAND: f64 = 0.05;
/// Fitted exponents this close to `-1` are treated as exactly critical, and the
/// logarithmic power decides.
pub const BSTAR_CRITICAL_BAND: f64 = 1e-3;

/// Numerical test of `∫_{c_lo}^{∞} Φ_n(Ψ(t)) / t^p dt/t < ∞`, with
/// `Φ_n(u) = u [log(e + u)]^(n-1)`.
///
/// The integral is evaluated on `[c_lo, t_max]` by the trapezoid rule in
/// `log t`. On the upper half of the log range the integrand is fitted to
/// `C t^β (log t)^κ` by least squares. Verdict: converges if
/// `β < -1 - 0.05`, diverges if `β > -1 + 0.05`; in between, a critical fit
/// (`|β + 1| <= 1e-3`) diverges iff `κ >= -1`, anything else is inconclusive.
pub fn check_bstar_p(
    psi: &YoungFunction,
    p: f64,
    n: u32,
    c_lo: f64,
    t_max: f64,
) -> Result<BStarDiagnostic> {
    if !(p.is_finite() && p > 1.0) {
        return Err(config(format!("B*_p check needs p > 1, got {p}")));
    }
    if !(c_lo > 0.0 && t_max.is_finite() && t_max > c_lo) {
        return Err(config(format!("need 0 < c_lo < t_max, got [{c_lo}, {t_max}]")));
    }
    const POINTS: usize = 4001;
    let (u_lo, u_hi) = (c_lo.ln(), t_max.ln());
    let du = (u_hi - u_lo) / (POINTS - 1) as f64;
    let us: Vec<f64> = (0..POINTS).map(|k| u_lo + k as f64 * du).collect();
    // integrand against du = dt/t, i.e. Φ_n(Ψ(t)) / t^p
    let g: Vec<f64> = us
        .iter()
        .map(|&u| {
            let t = u.exp();
            phi_n_log_e(n, psi.eval(t)) / t.powf(p)
        })
        .collect();
    let partial_integral = g.windows(2).map(|w| 0.5 * (w[0] + w[1]) * du).sum();

    let u_mid = 0.5 * (u_lo + u_hi);
    let tail: Vec<(f64, f64)> = us
        .iter()
        .zip(&g)
        .filter(|(u, v)| **u >= u_mid.max(1.0) && **v > 0.0)
        .map(|(u, v)| (*u, v.ln()))
        .collect();
    let (gamma, kappa) = fit_tail(&tail)?;
    let tail_exponent = gamma - 1.0;
    let verdict = if tail_exponent < -1.0 - BSTAR_DEAD_BAND {
        Verdict::Converges
    } else if tail_exponent > -1.0 + BSTAR_DEAD_BAND {
        Verdict::Diverges
    } else if (tail_exponent + 1.0).abs() <= BSTAR_CRITICAL_BAND {
        if kappa >= -1.0 {
            Verdict::Diverges
        } else {
            Verdict::Converges
        }
    } else {
        Verdict::Inconclusive
    };
    Ok(BStarDiagnostic { verdict, partial_integral, tail_exponent, log_power: kappa })
}

/// Least squares `y ≈ a + γ u + κ ln u`; returns `(γ, κ)`. Falls back to a
/// straight line when the tail is too short to separate the two terms.
fn fit_tail(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 3 {
        return Err(config("t_max too small to fit the integrand tail"));
    }
    let rows: Vec<[f64; 3]> = points.iter().map(|&(u, _)| [1.0, u, u.ln()]).collect();
    let mut ata = [[0.0; 3]; 3];
    let mut aty = [0.0; 3];
    for (row, &(_, y)) in rows.iter().zip(points) {
        for i in 0..3 {
            aty[i] += row[i] * y;
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    let det3 = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let det = det3(&ata);
    let (u_first, u_last) = (points[0].0, points[points.len() - 1].0);
    if points.len() >= 10 && det.abs() > 1e-9 && u_last / u_first > 1.2 {
        let solve = |col: usize| {
            let mut m = ata;
            for i in 0..3 {
                m[i][col] = aty[i];
            }
            det3(&m) / det
        };
        return Ok((solve(1), solve(2)));
    }
    // straight line through the tail
    let n = points.len() as f64;
    let (su, sy) = points.iter().fold((0.0, 0.0), |(a, b), &(u, y)| (a + u, b + y));
    let (mu, my) = (su / n, sy / n);
    let (num, den) = points.iter().fold((0.0, 0.0), |(a, b), &(u, y)| {
        (a + (u - mu) * (y - my), b + (u - mu) * (u - mu))
    });
    Ok((num / den, 0.0))
}

/// Result of [`generalized_holder_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    pub mean_product: f64,
    pub norm_f: f64,
    pub norm_g_conjugate: f64,
    pub ratio: f64,
    /// Nonzero left side against a vanishing product of norms.
    pub violation: bool,
}

/// `|r|⁻¹ Σ |f g| / (‖f‖_{Ψ,r} ‖g‖_{Ψ̄,r})`, where `Ψ̄` is the numeric
/// complementary function truncated at `t_max`. The generalized Hölder
/// inequality bounds this ratio by 2.
pub fn generalized_holder_check(
    f: &GridFunction,
    g: &GridFunction,
    r: &Rect,
    psi: &YoungFunction,
    tol: f64,
    t_max: f64,
) -> Result<HolderReport> {
    f.check_same_shape(g)?;
    if !r.fits_in(f.dims()) {
        return Err(domain(format!("rectangle {r} is outside the lattice {:?}", f.dims())));
    }
    let mean_product =
        r.points().map(|p| f.get(&p) * g.get(&p)).sum::<f64>() / r.cell_count() as f64;
    let norm_f = luxemburg_norm(f, r, psi, tol)?;
    let conj = YoungFunction::complementary_of(psi.clone(), t_max)?;
    let norm_g_conjugate = luxemburg_norm(g, r, &conj, tol)?;
    let denom = norm_f * norm_g_conjugate;
    let (ratio, violation) = if mean_product == 0.0 {
        (0.0, false)
    } else if denom == 0.0 {
        (f64::INFINITY, true)
    } else {
        (mean_product / denom, false)
    };
    Ok(HolderReport { mean_product, norm_f, norm_g_conjugate, ratio, violation })
}

/// Violation counts of the sampled monotonicity, convexity and scaling checks.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LadderReport {
    pub zero_at_origin: bool,
    pub monotonicity: usize,
    pub convexity: usize,
    pub scaling: usize,
}

impl LadderReport {
    pub fn is_clean(&self) -> bool {
        self.zero_at_origin && self.monotonicity == 0 && self.convexity == 0 && self.scaling == 0
    }
}

/// Geometric ladder `2^-20, ..., 2^20`.
pub fn ladder() -> Vec<f64> {
    (-20..=20).map(|k| 2f64.powi(k)).collect()
}

/// Checks `Φ(0) = 0`, monotonicity, midpoint convexity on every ladder pair,
/// and `Φ(εt) <= εΦ(t)` for a set of `ε` in `(0, 1)`.
///
/// Comparisons allow a relative slack of a few units in the last place,
/// since the two sides are rounded independently.
pub fn check_ladder(psi: &YoungFunction) -> LadderReport {
    const SLACK: f64 = 4.0 * f64::EPSILON;
    let le = |a: f64, b: f64| a <= b + SLACK * b.abs();
    let ts = ladder();
    let vals: Vec<f64> = ts.iter().map(|&t| psi.eval(t)).collect();
    let mut report = LadderReport { zero_at_origin: psi.eval(0.0) == 0.0, ..Default::default() };
    report.monotonicity = vals.windows(2).filter(|w| !le(w[0], w[1])).count();
    for i in 0..ts.len() {
        for j in i + 1..ts.len() {
            let mid = psi.eval(0.5 * (ts[i] + ts[j]));
            if !le(mid, 0.5 * (vals[i] + vals[j])) {
                report.convexity += 1;
            }
        }
    }
    for &eps in &[0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99] {
        for (&t, &v) in ts.iter().zip(&vals) {
            if !le(psi.eval(eps * t), eps * v) {
                report.scaling += 1;
            }
        }
    }
    report
}
