//! Raw coefficient estimates, the proxy-variance estimate, Pinsker weight
//! families and the penalized selection among weighted least squares
//! estimators.

pub mod selection;
pub mod weights;

use crate::error::{Error, Result};
use crate::noise::ObservationPath;
use crate::signal::TrigTransform;

pub use selection::{cost, penalty, select, select_model, weighted_coefficients, Selection, SelectionResult};
pub use weights::{
    build_weight_family, pinsker_weights, WeightFamily, WeightLabel, WeightVector,
};

/// `theta_hat[j - 1] = (1/n) int Psi_{j,p} dy` for `j = 1..=p-1`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientEstimates {
    pub n: usize,
    pub p: usize,
    pub theta_hat: Vec<f64>,
}

impl CoefficientEstimates {
    pub fn new(n: usize, p: usize, theta_hat: Vec<f64>) -> Result<Self> {
        if n == 0 || p < 3 {
            return Err(Error::InvalidParameter(format!("need n >= 1 and p >= 3, got n = {n}, p = {p}")));
        }
        if theta_hat.len() != p - 1 {
            return Err(Error::LengthMismatch {
                left: theta_hat.len(),
                right: p - 1,
            });
        }
        Ok(Self { n, p, theta_hat })
    }

    /// `theta_hat_{j,p}`; zero outside `1..p`.
    pub fn get(&self, j: usize) -> f64 {
        if j == 0 || j >= self.p {
            0.0
        } else {
            self.theta_hat[j - 1]
        }
    }

    /// Largest coefficient index entering any sum: `min(n, p - 1)`.
    pub fn cap(&self) -> usize {
        self.n.min(self.p - 1)
    }
}

/// Computes coefficient estimates for many paths sharing one frequency.
#[derive(Clone, Debug)]
pub struct CoefficientEstimator {
    transform: TrigTransform,
}

impl CoefficientEstimator {
    pub fn new(p: usize) -> Result<Self> {
        if p < 3 {
            return Err(Error::InvalidParameter(format!("p = {p} must be at least 3")));
        }
        Ok(Self {
            transform: TrigTransform::new(p),
        })
    }

    pub fn p(&self) -> usize {
        self.transform.p()
    }

    pub fn transform(&self) -> &TrigTransform {
        &self.transform
    }

    pub fn estimate(&self, obs: &ObservationPath) -> Result<CoefficientEstimates> {
        if obs.p != self.p() {
            return Err(Error::InvalidParameter(format!("path has p = {}, estimator p = {}", obs.p, self.p())));
        }
        obs.validate()?;
        let increments: Vec<f64> = obs.increments().collect();
        self.estimate_increments(obs.n, &increments)
    }

    /// Same as [`CoefficientEstimator::estimate`] from the `np` increments.
    pub fn estimate_increments(&self, n: usize, increments: &[f64]) -> Result<CoefficientEstimates> {
        let p = self.p();
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if increments.len() != n * p {
            return Err(Error::PathLength {
                got: increments.len() + 1,
                expected: n * p + 1,
            });
        }
        // phi_j(t_l) only depends on l mod p
        let mut folded = vec![0.0; p];
        for chunk in increments.chunks_exact(p) {
            for (f, d) in folded.iter_mut().zip(chunk) {
                *f += d;
            }
        }
        let scale = p as f64 / n as f64;
        let mut theta_hat = self.transform.project(&folded);
        theta_hat.truncate(p - 1);
        theta_hat.iter_mut().for_each(|v| *v *= scale);
        CoefficientEstimates::new(n, p, theta_hat)
    }
}

/// `theta_hat_{j,p} = (1/n) sum_{l=1}^{np} phi_j(t_l) (y_{t_l} - y_{t_{l-1}})`.
pub fn theta_hat(obs: &ObservationPath) -> Result<CoefficientEstimates> {
    CoefficientEstimator::new(obs.p)?.estimate(obs)
}

/// `sigma_hat = (n / p_check) sum_{j = l}^{p_check} theta_hat_j^2` with
/// `l = floor(sqrt n)`, `p_check = min(p, n)`; zero when `l > p_check`.
/// Indices past `p - 1` carry no estimate and are skipped.
pub fn sigma_hat(est: &CoefficientEstimates) -> f64 {
    let n = est.n;
    let p_check = est.p.min(n);
    let l = (n as f64).sqrt().floor() as usize;
    // guard against sqrt rounding just below a perfect square
    let l = if (l + 1) * (l + 1) <= n { l + 1 } else { l };
    if l > p_check {
        return 0.0;
    }
    let upper = p_check.min(est.p - 1);
    let sum: f64 = (l..=upper).map(|j| est.theta_hat[j - 1].powi(2)).sum();
    n as f64 / p_check as f64 * sum
}
