//! Distributions entering the noise: inter-arrival times of the renewal
//! process, the marks `Y_i` of the semi-Markov component, and the jump sizes
//! of the compound Poisson part of the Lévy process.

use std::f64::consts::SQRT_2;

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Exp, Gamma, Normal, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{Error, Result};

/// Law `eta` of the inter-arrival times `tau_l`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum InterarrivalLaw {
    Exponential { rate: f64 },
    Gamma { shape: f64, scale: f64 },
    ChiSquared { df: f64 },
    /// `tau = value` almost surely. Testing hook only: it has no density, so
    /// it is rejected wherever the renewal density or estimation is needed.
    #[serde(skip)]
    Deterministic { value: f64 },
}

impl Default for InterarrivalLaw {
    fn default() -> Self {
        InterarrivalLaw::ChiSquared { df: 3.0 }
    }
}

impl InterarrivalLaw {
    pub fn degenerate_for_testing(value: f64) -> Self {
        InterarrivalLaw::Deterministic { value }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            InterarrivalLaw::Exponential { rate } => rate > 0.0 && rate.is_finite(),
            InterarrivalLaw::Gamma { shape, scale } => {
                shape > 0.0 && scale > 0.0 && shape.is_finite() && scale.is_finite()
            }
            InterarrivalLaw::ChiSquared { df } => df > 0.0 && df.is_finite(),
            InterarrivalLaw::Deterministic { value } => value > 0.0 && value.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::NoiseConfig(format!("invalid inter-arrival law {self:?}")))
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, InterarrivalLaw::Deterministic { .. })
    }

    /// `(shape, scale)` when the law belongs to the gamma family.
    pub fn as_gamma(&self) -> Option<(f64, f64)> {
        match *self {
            InterarrivalLaw::Exponential { rate } => Some((1.0, 1.0 / rate)),
            InterarrivalLaw::Gamma { shape, scale } => Some((shape, scale)),
            InterarrivalLaw::ChiSquared { df } => Some((0.5 * df, 2.0)),
            InterarrivalLaw::Deterministic { .. } => None,
        }
    }

    /// Mean inter-arrival time `tau_check`.
    pub fn mean(&self) -> f64 {
        match *self {
            InterarrivalLaw::Deterministic { value } => value,
            _ => {
                let (shape, scale) = self.as_gamma().expect("gamma family");
                shape * scale
            }
        }
    }

    pub fn variance(&self) -> f64 {
        match self.as_gamma() {
            Some((shape, scale)) => shape * scale * scale,
            None => 0.0,
        }
    }

    pub fn pdf(&self, x: f64) -> Option<f64> {
        let (shape, scale) = self.as_gamma()?;
        Some(gamma_pdf(shape, scale, x))
    }

    pub fn cdf(&self, x: f64) -> Option<f64> {
        let (shape, scale) = self.as_gamma()?;
        Some(gamma_cdf(shape, scale, x))
    }

    pub fn sampler(&self) -> Result<InterarrivalSampler> {
        self.validate()?;
        Ok(match *self {
            InterarrivalLaw::Exponential { rate } => {
                InterarrivalSampler::Exp(Exp::new(rate).expect("validated"))
            }
            InterarrivalLaw::Gamma { shape, scale } => {
                InterarrivalSampler::Gamma(Gamma::new(shape, scale).expect("validated"))
            }
            InterarrivalLaw::ChiSquared { df } => {
                InterarrivalSampler::ChiSquared(ChiSquared::new(df).expect("validated"))
            }
            InterarrivalLaw::Deterministic { value } => InterarrivalSampler::Fixed(value),
        })
    }
}

pub(crate) fn gamma_pdf(shape: f64, scale: f64, x: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    if x == 0.0 {
        return match shape.partial_cmp(&1.0) {
            Some(std::cmp::Ordering::Less) => f64::INFINITY,
            Some(std::cmp::Ordering::Equal) => 1.0 / scale,
            _ => 0.0,
        };
    }
    let z = x / scale;
    ((shape - 1.0) * z.ln() - z - ln_gamma(shape)).exp() / scale
}

pub(crate) fn gamma_cdf(shape: f64, scale: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        gamma_lr(shape, x / scale)
    }
}

#[derive(Clone, Debug)]
pub enum InterarrivalSampler {
    Exp(Exp<f64>),
    Gamma(Gamma<f64>),
    ChiSquared(ChiSquared<f64>),
    Fixed(f64),
}

impl Distribution<f64> for InterarrivalSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            InterarrivalSampler::Exp(d) => d.sample(rng),
            InterarrivalSampler::Gamma(d) => d.sample(rng),
            InterarrivalSampler::ChiSquared(d) => d.sample(rng),
            InterarrivalSampler::Fixed(v) => *v,
        }
    }
}

/// Law of the marks `Y_i`; every admissible law is standardized (mean 0,
/// variance 1).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum MarkLaw {
    #[default]
    StandardNormal,
    /// `+1` or `-1` with probability 1/2.
    Rademacher,
    /// Uniform on `[-sqrt 3, sqrt 3]`.
    Uniform,
    /// `Y = value` almost surely; testing hook that breaks `E Y = 0`.
    #[serde(skip)]
    Constant { value: f64 },
}

impl MarkLaw {
    pub fn is_degenerate(&self) -> bool {
        matches!(self, MarkLaw::Constant { .. })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            MarkLaw::StandardNormal => StandardNormal.sample(rng),
            MarkLaw::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            MarkLaw::Uniform => rng.random_range(-3f64.sqrt()..3f64.sqrt()),
            MarkLaw::Constant { value } => value,
        }
    }
}

/// Jump-size law `J` of the compound Poisson part.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum JumpLaw {
    /// `+size` or `-size` with probability 1/2.
    TwoPoint { size: f64 },
    Normal { mean: f64, sd: f64 },
}

impl JumpLaw {
    pub fn mean(&self) -> f64 {
        match *self {
            JumpLaw::TwoPoint { .. } => 0.0,
            JumpLaw::Normal { mean, .. } => mean,
        }
    }

    pub fn second_moment(&self) -> f64 {
        match *self {
            JumpLaw::TwoPoint { size } => size * size,
            JumpLaw::Normal { mean, sd } => mean * mean + sd * sd,
        }
    }

    fn scaled(&self, factor: f64) -> Self {
        match *self {
            JumpLaw::TwoPoint { size } => JumpLaw::TwoPoint {
                size: size * factor,
            },
            JumpLaw::Normal { mean, sd } => JumpLaw::Normal {
                mean: mean * factor,
                sd: sd * factor,
            },
        }
    }

    pub(crate) fn sampler(&self) -> Result<JumpSampler> {
        match *self {
            JumpLaw::TwoPoint { size } if size.is_finite() => Ok(JumpSampler::TwoPoint(size)),
            JumpLaw::Normal { mean, sd } => Normal::new(mean, sd)
                .map(JumpSampler::Normal)
                .map_err(|e| Error::NoiseConfig(format!("jump law: {e}"))),
            _ => Err(Error::NoiseConfig(format!("invalid jump law {self:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) enum JumpSampler {
    TwoPoint(f64),
    Normal(Normal<f64>),
}

impl Distribution<f64> for JumpSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            JumpSampler::TwoPoint(a) => {
                if rng.random::<bool>() {
                    *a
                } else {
                    -*a
                }
            }
            JumpSampler::Normal(d) => d.sample(rng),
        }
    }
}

/// Compound Poisson jump part with Lévy measure `Pi = intensity * law(J)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevyJumps {
    pub intensity: f64,
    pub jump_law: JumpLaw,
}

impl LevyJumps {
    /// Rescales `shape` so that `Pi(x^2) = intensity * E[J^2] = 1`.
    pub fn normalized(intensity: f64, shape: JumpLaw) -> Self {
        let m2 = shape.second_moment();
        let factor = (1.0 / (intensity * m2)).sqrt();
        Self {
            intensity,
            jump_law: shape.scaled(factor),
        }
    }

    /// Symmetric `+-1/sqrt(intensity)` jumps.
    pub fn symmetric(intensity: f64) -> Self {
        Self::normalized(intensity, JumpLaw::TwoPoint { size: SQRT_2 })
    }

    /// `Pi(x^2)`.
    pub fn second_moment_rate(&self) -> f64 {
        self.intensity * self.jump_law.second_moment()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.intensity > 0.0 && self.intensity.is_finite()) {
            return Err(Error::NoiseConfig(format!(
                "jump intensity must be positive, got {}",
                self.intensity
            )));
        }
        self.jump_law.sampler()?;
        let m = self.second_moment_rate();
        if (m - 1.0).abs() > 1e-9 {
            return Err(Error::NoiseConfig(format!(
                "Levy measure must satisfy Pi(x^2) = 1, got {m}"
            )));
        }
        Ok(())
    }
}
