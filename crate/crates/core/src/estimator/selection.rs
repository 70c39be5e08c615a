use crate::error::{Error, Result};
use crate::estimator::{sigma_hat, CoefficientEstimates, WeightFamily, WeightVector};
use crate::signal::TrigTransform;

/// `P_n(lambda) = sigma_hat |lambda|^2 / n`.
pub fn penalty(lambda: &WeightVector, sigma_hat: f64, n: usize) -> f64 {
    sigma_hat * lambda.norm_sq / n as f64
}

/// `J_n(lambda) = sum lambda^2 theta_hat^2 - 2 sum lambda theta_tilde
/// + delta P_n(lambda)`, `theta_tilde = theta_hat^2 - sigma_hat / n`, over
/// `1 <= j <= min(n, p - 1)`.
pub fn cost(lambda: &WeightVector, est: &CoefficientEstimates, sigma_hat: f64, delta: f64) -> f64 {
    let n = est.n as f64;
    let top = lambda.support().min(est.cap());
    let shift = sigma_hat / n;
    let mut fit = 0.0;
    let mut norm_sq = 0.0;
    for (w, t) in lambda.values()[..top].iter().zip(&est.theta_hat) {
        let t2 = t * t;
        fit += w * w * t2 - 2.0 * w * (t2 - shift);
        norm_sq += w * w;
    }
    fit + delta * sigma_hat * norm_sq / n
}

fn check_delta(delta: f64) {
    if !(delta > 0.0 && delta <= 1.0 / 6.0) {
        log::warn!("delta = {delta} is outside (0, 1/6]");
    }
}

/// Index of the minimizing candidate and the recorded costs.
#[derive(Clone, Debug, PartialEq)]
pub struct Selection {
    pub index: usize,
    pub sigma_hat: f64,
    pub costs: Vec<f64>,
}

impl Selection {
    /// `lambda_hat(j) theta_hat_j` for `j = 1..=min(n, p-1)`, zero-padded to
    /// `p - 1` entries.
    pub fn coefficients(&self, est: &CoefficientEstimates, family: &WeightFamily) -> Vec<f64> {
        weighted_coefficients(&family.weights[self.index], est)
    }
}

pub fn weighted_coefficients(lambda: &WeightVector, est: &CoefficientEstimates) -> Vec<f64> {
    let top = lambda.support().min(est.cap());
    let mut out = vec![0.0; est.p - 1];
    for (j, o) in out.iter_mut().enumerate().take(top) {
        *o = lambda.values()[j] * est.theta_hat[j];
    }
    out
}

/// Minimizes `J_n` over the family; ties go to the lowest index.
pub fn select(est: &CoefficientEstimates, family: &WeightFamily, delta: f64) -> Result<Selection> {
    if family.weights.is_empty() {
        return Err(Error::EmptyFamily);
    }
    check_delta(delta);
    let s = sigma_hat(est);
    let costs: Vec<f64> = family.weights.iter().map(|w| cost(w, est, s, delta)).collect();
    let mut index = 0;
    for (i, c) in costs.iter().enumerate().skip(1) {
        if *c < costs[index] {
            index = i;
        }
    }
    Ok(Selection {
        index,
        sigma_hat: s,
        costs,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelectionResult {
    pub index: usize,
    pub lambda_hat: WeightVector,
    pub sigma_hat: f64,
    pub costs: Vec<f64>,
    /// `lambda_hat(j) theta_hat_j`, `j = 1..=p-1`.
    pub coefficients: Vec<f64>,
    /// `S_hat(t_i)`, `t_i = i/p`, `i = 1..=p`.
    pub estimate: Vec<f64>,
}

/// Selects `lambda_hat` and evaluates `S_hat = sum lambda_hat theta_hat Psi`
/// on the observation grid.
pub fn select_model(est: &CoefficientEstimates, family: &WeightFamily, delta: f64) -> Result<SelectionResult> {
    let sel = select(est, family, delta)?;
    let coefficients = sel.coefficients(est, family);
    let estimate = TrigTransform::new(est.p).synthesize(&coefficients);
    Ok(SelectionResult {
        index: sel.index,
        lambda_hat: family.weights[sel.index].clone(),
        sigma_hat: sel.sigma_hat,
        costs: sel.costs,
        coefficients,
        estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::build_weight_family;
    use approx::assert_abs_diff_eq;

    fn estimates(theta: &[f64], n: usize) -> CoefficientEstimates {
        CoefficientEstimates::new(n, theta.len() + 1, theta.to_vec()).unwrap()
    }

    #[test]
    fn penalty_examples() {
        let w = WeightVector::custom(5, vec![1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(penalty(&w, 1.0, 100), 0.02, epsilon = 1e-15);
        assert_eq!(penalty(&w, 0.0, 100), 0.0);
        assert_eq!(penalty(&WeightVector::custom(5, vec![]).unwrap(), 1.0, 100), 0.0);
    }

    #[test]
    fn zero_coefficients_cost_nothing() {
        let est = estimates(&[0.0; 9], 20);
        let family = build_weight_family(2, 0.5, 20.0, 10).unwrap();
        let sel = select(&est, &family, 0.1).unwrap();
        assert_eq!(sel.sigma_hat, 0.0);
        assert!(sel.costs.iter().all(|c| *c == 0.0));
        assert_eq!(sel.index, 0);
    }

    #[test]
    fn single_coefficient_parabola() {
        let est = estimates(&[1.0, 0.0, 0.0], 100);
        for w in [0.0, 0.25, 0.5, 1.0] {
            let lambda = WeightVector::custom(4, vec![w]).unwrap();
            assert_abs_diff_eq!(cost(&lambda, &est, 0.0, 0.3), w * w - 2.0 * w, epsilon = 1e-15);
        }
        let family = WeightFamily::from_weights(
            [0.0, 0.5, 1.0, 0.75].iter().map(|w| WeightVector::custom(4, vec![*w]).unwrap()).collect(),
        )
        .unwrap();
        assert_eq!(select(&est, &family, 0.1).unwrap().index, 2);
    }

    #[test]
    fn ties_go_to_first() {
        let est = estimates(&[1.0, 0.0, 0.0], 100);
        let w = WeightVector::custom(4, vec![1.0]).unwrap();
        let family = WeightFamily::from_weights(vec![w.clone(), w]).unwrap();
        assert_eq!(select(&est, &family, 0.1).unwrap().index, 0);
    }

    #[test]
    fn empty_family_rejected() {
        let est = estimates(&[1.0, 0.0], 3);
        let family = WeightFamily {
            weights: vec![],
            nu: 0,
            lambda_star: 0.0,
            k_star: 0,
            eps: 0.5,
            m: 0,
            upsilon: 3.0,
        };
        assert_eq!(select(&est, &family, 0.1), Err(Error::EmptyFamily));
    }

    #[test]
    fn estimate_synthesizes_coefficients() {
        let est = estimates(&[0.5, 0.25, 0.0, 0.0], 10);
        let family = WeightFamily::from_weights(vec![WeightVector::custom(5, vec![1.0, 1.0]).unwrap()]).unwrap();
        let res = select_model(&est, &family, 0.1).unwrap();
        for (i, v) in res.estimate.iter().enumerate() {
            let t = (i + 1) as f64 / 5.0;
            let expected = 0.5 + 0.25 * std::f64::consts::SQRT_2 * (2.0 * std::f64::consts::PI * t).cos();
            assert_abs_diff_eq!(*v, expected, epsilon = 1e-12);
        }
    }
}
