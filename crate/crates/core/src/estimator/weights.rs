use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which candidate a weight vector came from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightLabel {
    Pinsker { beta: u32, l: f64 },
    Custom,
}

/// Weights `lambda(j)`, `j = 1..p-1`, stored up to the last nonzero entry.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector {
    pub alpha: WeightLabel,
    pub p: usize,
    /// `values[j - 1] = lambda(j)`; entries past the end are zero.
    values: Vec<f64>,
    /// `L(lambda) = sum_j lambda(j)`.
    pub l_sum: f64,
    /// `|lambda|^2 = sum_j lambda(j)^2`.
    pub norm_sq: f64,
}

impl WeightVector {
    /// Builds a custom weight vector; `values[j - 1] = lambda(j)` must lie in
    /// `[0, 1]` and vanish for `j >= p`.
    pub fn custom(p: usize, values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParameter(format!("weight {v} outside [0, 1]")));
        }
        if values.iter().skip(p.saturating_sub(1)).any(|v| *v != 0.0) {
            return Err(Error::InvalidParameter(format!("weights must vanish for j >= p = {p}")));
        }
        Ok(Self::from_values(WeightLabel::Custom, p, values))
    }

    fn from_values(alpha: WeightLabel, p: usize, mut values: Vec<f64>) -> Self {
        values.truncate(p.saturating_sub(1));
        while values.last() == Some(&0.0) {
            values.pop();
        }
        let l_sum = values.iter().sum();
        let norm_sq = values.iter().map(|v| v * v).sum();
        Self {
            alpha,
            p,
            values,
            l_sum,
            norm_sq,
        }
    }

    /// `lambda(j)`; zero for `j = 0` and past the support.
    pub fn get(&self, j: usize) -> f64 {
        if j == 0 {
            0.0
        } else {
            self.values.get(j - 1).copied().unwrap_or(0.0)
        }
    }

    /// Largest `j` with `lambda(j) > 0`, or zero.
    pub fn support(&self) -> usize {
        self.values.len()
    }

    /// Nonzero prefix: `lambda(1), ..., lambda(support)`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// All `p - 1` weights.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = self.values.clone();
        out.resize(self.p - 1, 0.0);
        out
    }
}

/// `d_beta = (beta + 1)(2 beta + 1) / (pi^{2 beta} beta)`, in logs.
fn ln_d(beta: u32) -> f64 {
    let b = beta as f64;
    ((b + 1.0) * (2.0 * b + 1.0) / b).ln() - 2.0 * b * PI.ln()
}

/// `j_* = 1 + floor(ln upsilon)`.
pub fn j_star(upsilon: f64) -> usize {
    1 + upsilon.ln().floor().max(0.0) as usize
}

/// `omega_alpha = (d_beta l upsilon)^{1/(2 beta + 1)}`.
pub fn omega(beta: u32, l: f64, upsilon: f64) -> f64 {
    ((ln_d(beta) + l.ln() + upsilon.ln()) / (2.0 * beta as f64 + 1.0)).exp()
}

/// Pinsker weights: `1` for `j < j_*`, `1 - (j/omega)^beta` for
/// `j_* <= j <= omega`, zero beyond and for `j >= p`.
pub fn pinsker_weights(beta: u32, l: f64, upsilon: f64, p: usize) -> Result<WeightVector> {
    if beta == 0 || !(l > 0.0 && l.is_finite()) || !(upsilon > 1.0 && upsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "Pinsker weights need beta >= 1, l > 0, upsilon > 1; got ({beta}, {l}, {upsilon})"
        )));
    }
    if p < 2 {
        return Err(Error::InvalidParameter(format!("p = {p} must be at least 2")));
    }
    let js = j_star(upsilon);
    let w = omega(beta, l, upsilon);
    let top = (w.floor() as usize).max(js - 1).min(p - 1);
    let values = (1..=top)
        .map(|j| {
            if j < js {
                1.0
            } else {
                (1.0 - (j as f64 / w).powi(beta as i32)).max(0.0)
            }
        })
        .collect();
    Ok(WeightVector::from_values(WeightLabel::Pinsker { beta, l }, p, values))
}

/// Candidate weights indexed by `alpha = (beta, l)` with `beta = 1..=k*`
/// (outer) and `l = eps, 2 eps, ..., m eps` (inner), `m = floor(1/eps^2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightFamily {
    pub weights: Vec<WeightVector>,
    pub nu: usize,
    /// `|Lambda|_* = max L(lambda)`.
    pub lambda_star: f64,
    pub k_star: usize,
    pub eps: f64,
    pub m: usize,
    pub upsilon: f64,
}

impl WeightFamily {
    /// Wraps an explicit candidate list.
    pub fn from_weights(weights: Vec<WeightVector>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyFamily);
        }
        let lambda_star = weights.iter().map(|w| w.l_sum).fold(0.0, f64::max);
        Ok(Self {
            nu: weights.len(),
            lambda_star,
            k_star: 0,
            eps: f64::NAN,
            m: 0,
            upsilon: f64::NAN,
            weights,
        })
    }

    /// `1 + (upsilon / eps)^{1/3}`.
    pub fn lambda_star_bound(&self) -> f64 {
        1.0 + (self.upsilon / self.eps).cbrt()
    }
}

/// `m = floor(1/eps^2)`, tolerant to `1/eps^2` landing just below an integer.
pub fn grid_size(eps: f64) -> usize {
    let x = 1.0 / (eps * eps);
    (x * (1.0 + 1e-12)).floor() as usize
}

pub fn build_weight_family(k_star: usize, eps: f64, upsilon: f64, p: usize) -> Result<WeightFamily> {
    if k_star == 0 {
        return Err(Error::InvalidParameter("k* must be at least 1".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps = {eps} must lie in (0, 1)")));
    }
    let m = grid_size(eps);
    let mut weights = Vec::with_capacity(k_star * m);
    for beta in 1..=k_star {
        for i in 1..=m {
            weights.push(pinsker_weights(beta as u32, i as f64 * eps, upsilon, p)?);
        }
    }
    let mut family = WeightFamily::from_weights(weights)?;
    family.k_star = k_star;
    family.eps = eps;
    family.m = m;
    family.upsilon = upsilon;
    if family.lambda_star > family.lambda_star_bound() {
        log::warn!(
            "|Lambda|_* = {} exceeds 1 + (upsilon/eps)^(1/3) = {}",
            family.lambda_star,
            family.lambda_star_bound()
        );
    }
    Ok(family)
}

/// `eps = 1 / ln n`; requires `n >= 3`.
pub fn default_eps(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("default eps = 1/ln n needs n >= 3, got {n}")));
    }
    Ok(1.0 / (n as f64).ln())
}

/// `k* = floor(k0 + sqrt(ln n))`.
pub fn default_k_star(k0: usize, n: usize) -> usize {
    (k0 as f64 + (n as f64).ln().max(0.0).sqrt()).floor() as usize
}
