//! Seeded test grids on the unit cube.
//!
//! Each lattice cell `i` has center `((i_1 + 0.5)/N_1, ..., (i_n + 0.5)/N_n)`
//! and measure `1/∏N_l`. Profiles are named by short strings such as
//! `power:-0.5` or `checkerboard:4:0:1`; see [`Profile`].

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::grid::{validate_dims, GridFunction, DEFAULT_MAX_RANK};

/// A named, parametrised grid generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Profile {
    /// `constant[:c]`, default `c = 1`.
    Constant(f64),
    /// `power:α`, `|x - x₀|^α` with `x₀` the lattice corner nearest the center.
    Power(f64),
    /// `checkerboard[:blocks:low:high]`, default `2:1:3`.
    Checkerboard { blocks: usize, low: f64, high: f64 },
    /// `smooth-checkerboard[:blocks:mean:amp]`, `mean + amp ∏ sin(π blocks x_l)`,
    /// default `2:2:1`.
    SmoothCheckerboard { blocks: usize, mean: f64, amp: f64 },
    /// `lognormal:σ`, independent `exp(σ Z)` per cell.
    Lognormal(f64),
    /// `delta-spike:h`, `h` at the middle cell and 0 elsewhere.
    DeltaSpike(f64),
    /// `uniform[:hi]`, independent uniform values on `[0, hi)`.
    Uniform(f64),
    /// `ramp`, the coordinate sum of the cell center.
    Ramp,
    /// `indicator:a:b`, the indicator of the cube `[a, b)^n`.
    Indicator(f64, f64),
    /// `zero`
    Zero,
}

impl Profile {
    /// Kinds accepted as weights by the weight catalog.
    pub fn is_weight(&self) -> bool {
        matches!(
            self,
            Profile::Constant(_)
                | Profile::Power(_)
                | Profile::Checkerboard { .. }
                | Profile::SmoothCheckerboard { .. }
                | Profile::Lognormal(_)
                | Profile::DeltaSpike(_)
        )
    }

    /// Whether generated values can vanish.
    pub fn may_vanish(&self) -> bool {
        match self {
            Profile::Constant(c) => *c == 0.0,
            Profile::Checkerboard { low, .. } => *low == 0.0,
            Profile::SmoothCheckerboard { mean, amp, .. } => amp >= mean,
            Profile::DeltaSpike(_)
            | Profile::Uniform(_)
            | Profile::Ramp
            | Profile::Indicator(..)
            | Profile::Zero => true,
            Profile::Power(_) | Profile::Lognormal(_) => false,
        }
    }

    fn check(&self, rank: usize) -> Result<()> {
        let nonneg = |v: f64, what: &str| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(config(format!("{what} must be finite and >= 0, got {v}")))
            }
        };
        match *self {
            Profile::Constant(c) => nonneg(c, "constant"),
            Profile::Power(a) => {
                if !a.is_finite() || a <= -(rank as f64) {
                    Err(config(format!("power weight needs α > -{rank}, got {a}")))
                } else {
                    Ok(())
                }
            }
            Profile::Checkerboard { blocks, low, high } => {
                if blocks == 0 {
                    return Err(config("checkerboard needs at least one block"));
                }
                nonneg(low, "checkerboard low")?;
                nonneg(high, "checkerboard high")
            }
            Profile::SmoothCheckerboard { blocks, mean, amp } => {
                if blocks == 0 {
                    return Err(config("checkerboard needs at least one block"));
                }
                nonneg(amp, "checkerboard amplitude")?;
                nonneg(mean - amp, "checkerboard mean minus amplitude")
            }
            Profile::Lognormal(s) => nonneg(s, "lognormal σ"),
            Profile::DeltaSpike(h) => nonneg(h, "spike height"),
            Profile::Uniform(h) => nonneg(h, "uniform bound"),
            Profile::Indicator(a, b) => {
                if (0.0..b).contains(&a) && b <= 1.0 {
                    Ok(())
                } else {
                    Err(config(format!("indicator needs 0 <= a < b <= 1, got {a}, {b}")))
                }
            }
            Profile::Ramp | Profile::Zero => Ok(()),
        }
    }

    /// Samples the profile on `dims` with cell measure `1/∏N_l`.
    pub fn generate(&self, dims: &[usize], seed: u64) -> Result<GridFunction> {
        validate_dims(dims, DEFAULT_MAX_RANK)?;
        self.check(dims.len())?;
        let cm = 1.0 / dims.iter().map(|&n| n as f64).product::<f64>();
        let center = |p: &[usize], l: usize| (p[l] as f64 + 0.5) / dims[l] as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = match *self {
            Profile::Constant(c) => GridFunction::from_fn(dims, cm, |_| c)?,
            Profile::Power(a) => GridFunction::from_fn(dims, cm, |p| {
                let d2: f64 = (0..p.len())
                    .map(|l| {
                        let x0 = (dims[l] / 2) as f64 / dims[l] as f64;
                        (center(p, l) - x0).powi(2)
                    })
                    .sum();
                d2.sqrt().powf(a)
            })?,
            Profile::Checkerboard { blocks, low, high } => GridFunction::from_fn(dims, cm, |p| {
                let parity: usize = (0..p.len())
                    .map(|l| (center(p, l) * blocks as f64).floor() as usize)
                    .sum();
                if parity % 2 == 0 {
                    low
                } else {
                    high
                }
            })?,
            Profile::SmoothCheckerboard { blocks, mean, amp } => {
                GridFunction::from_fn(dims, cm, |p| {
                    let wave: f64 = (0..p.len())
                        .map(|l| (std::f64::consts::PI * blocks as f64 * center(p, l)).sin())
                        .product();
                    (mean + amp * wave).max(0.0)
                })?
            }
            Profile::Lognormal(s) => GridFunction::from_fn(dims, cm, |_| {
                let z: f64 = rng.sample(StandardNormal);
                (s * z).exp()
            })?,
            Profile::DeltaSpike(h) => GridFunction::from_fn(dims, cm, |p| {
                if p.iter().zip(dims).all(|(&i, &n)| i == n / 2) {
                    h
                } else {
                    0.0
                }
            })?,
            Profile::Uniform(h) => GridFunction::from_fn(dims, cm, |_| h * rng.random::<f64>())?,
            Profile::Ramp => {
                GridFunction::from_fn(dims, cm, |p| (0..p.len()).map(|l| center(p, l)).sum())?
            }
            Profile::Indicator(a, b) => GridFunction::from_fn(dims, cm, |p| {
                if (0..p.len()).all(|l| (a..b).contains(&center(p, l))) {
                    1.0
                } else {
                    0.0
                }
            })?,
            Profile::Zero => GridFunction::from_fn(dims, cm, |_| 0.0)?,
        };
        Ok(g)
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Constant(c) => write!(f, "constant:{c}"),
            Profile::Power(a) => write!(f, "power:{a}"),
            Profile::Checkerboard { blocks, low, high } => {
                write!(f, "checkerboard:{blocks}:{low}:{high}")
            }
            Profile::SmoothCheckerboard { blocks, mean, amp } => {
                write!(f, "smooth-checkerboard:{blocks}:{mean}:{amp}")
            }
            Profile::Lognormal(s) => write!(f, "lognormal:{s}"),
            Profile::DeltaSpike(h) => write!(f, "delta-spike:{h}"),
            Profile::Uniform(h) => write!(f, "uniform:{h}"),
            Profile::Ramp => write!(f, "ramp"),
            Profile::Indicator(a, b) => write!(f, "indicator:{a}:{b}"),
            Profile::Zero => write!(f, "zero"),
        }
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let name = parts.next().unwrap_or_default();
        let args: Vec<&str> = parts.collect();
        let num = |i: usize| -> Result<f64> {
            args.get(i)
                .ok_or_else(|| config(format!("profile {s:?} is missing a parameter")))?
                .parse()
                .map_err(|_| config(format!("bad parameter in profile {s:?}")))
        };
        let arity = |k: &[usize]| {
            if k.contains(&args.len()) {
                Ok(())
            } else {
                Err(config(format!("wrong number of parameters in profile {s:?}")))
            }
        };
        let p = match name {
            "constant" => {
                arity(&[0, 1])?;
                Profile::Constant(if args.is_empty() { 1.0 } else { num(0)? })
            }
            "power" => {
                arity(&[1])?;
                Profile::Power(num(0)?)
            }
            "checkerboard" => {
                arity(&[0, 3])?;
                if args.is_empty() {
                    Profile::Checkerboard { blocks: 2, low: 1.0, high: 3.0 }
                } else {
                    let blocks = args[0]
                        .parse()
                        .map_err(|_| config(format!("bad block count in {s:?}")))?;
                    Profile::Checkerboard { blocks, low: num(1)?, high: num(2)? }
                }
            }
            "smooth-checkerboard" => {
                arity(&[0, 3])?;
                if args.is_empty() {
                    Profile::SmoothCheckerboard { blocks: 2, mean: 2.0, amp: 1.0 }
                } else {
                    let blocks = args[0]
                        .parse()
                        .map_err(|_| config(format!("bad block count in {s:?}")))?;
                    Profile::SmoothCheckerboard { blocks, mean: num(1)?, amp: num(2)? }
                }
            }
            "lognormal" => {
                arity(&[1])?;
                Profile::Lognormal(num(0)?)
            }
            "delta-spike" => {
                arity(&[1])?;
                Profile::DeltaSpike(num(0)?)
            }
            "uniform" => {
                arity(&[0, 1])?;
                Profile::Uniform(if args.is_empty() { 1.0 } else { num(0)? })
            }
            "ramp" => {
                arity(&[0])?;
                Profile::Ramp
            }
            "indicator" => {
                arity(&[2])?;
                Profile::Indicator(num(0)?, num(1)?)
            }
            "zero" => {
                arity(&[0])?;
                Profile::Zero
            }
            _ => return Err(config(format!("unknown profile {s:?}"))),
        };
        p.check(1)?;
        Ok(p)
    }
}

impl TryFrom<String> for Profile {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Profile> for String {
    fn from(p: Profile) -> Self {
        p.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in [
            "constant:2",
            "power:-0.5",
            "checkerboard:4:0:1",
            "smooth-checkerboard:2:2:1",
            "lognormal:1",
            "delta-spike:16",
            "uniform:1",
            "ramp",
            "indicator:0:0.5",
            "zero",
        ] {
            let p: Profile = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
        assert!("power".parse::<Profile>().is_err());
        assert!("wave:1".parse::<Profile>().is_err());
    }

    #[test]
    fn power_rank_bound() {
        let p = Profile::Power(-2.0);
        assert!(matches!(p.generate(&[8, 8], 0), Err(Error::Config(_))));
        assert!(p.generate(&[8, 8, 8], 0).is_ok());
        let flat = Profile::Power(0.0).generate(&[5, 6], 0).unwrap();
        assert!(flat.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn seeded_generation_is_deterministic() {
        let a = Profile::Lognormal(1.0).generate(&[6, 6], 9).unwrap();
        let b = Profile::Lognormal(1.0).generate(&[6, 6], 9).unwrap();
        let c = Profile::Lognormal(1.0).generate(&[6, 6], 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn shapes() {
        let cb = Profile::Checkerboard { blocks: 2, low: 0.0, high: 1.0 }.generate(&[4, 4], 0).unwrap();
        assert_eq!(cb.get(&[0, 0]), 0.0);
        assert_eq!(cb.get(&[0, 2]), 1.0);
        assert_eq!(cb.get(&[2, 2]), 0.0);
        let spike = Profile::DeltaSpike(5.0).generate(&[4, 5], 0).unwrap();
        assert_eq!(spike.get(&[2, 2]), 5.0);
        assert_eq!(spike.integral(), 5.0 / 20.0);
        let ind = Profile::Indicator(0.0, 0.5).generate(&[4], 0).unwrap();
        assert_eq!(ind.values(), &[1.0, 1.0, 0.0, 0.0]);
    }
}
