//! Monte Carlo risk of the selected estimator, the oracle risk over the
//! candidate family on common random numbers, and the Pinsker constant.

use std::f64::consts::PI;
use std::io::{self, Write};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::weights::{default_eps, default_k_star};
use crate::estimator::{
    build_weight_family, select, CoefficientEstimates, CoefficientEstimator, Selection, WeightFamily, WeightVector,
};
use crate::noise::{observation_grid, NoiseSpec, ObservationSampler, RngStream};
use crate::signal::{discrete_norm_sq, SignalSpec, TrigTransform};

/// Replications per work unit. Fixed so the reduction tree, and hence every
/// floating-point sum, does not depend on the thread count.
const CHUNK: usize = 16;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaRule {
    /// `(3 + ln n)^{-2}`
    #[default]
    SquaredLog,
    /// `(6 + ln n)^{-1}`
    InverseLog,
}

impl DeltaRule {
    pub fn eval(self, n: usize) -> f64 {
        let ln = (n as f64).ln();
        match self {
            DeltaRule::SquaredLog => (3.0 + ln).powi(-2),
            DeltaRule::InverseLog => 1.0 / (6.0 + ln),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorParams {
    /// `k* = floor(k0 + sqrt(ln n))` unless `k_star` is set.
    pub k0: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_star: Option<usize>,
    /// Grid step; `1 / ln n` when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    pub delta_rule: DeltaRule,
    /// Fixed `delta`, overriding the rule.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// `upsilon_n = n / varsigma_star`.
    pub varsigma_star: f64,
}

impl Default for EstimatorParams {
    fn default() -> Self {
        Self {
            k0: 100,
            k_star: None,
            eps: None,
            delta_rule: DeltaRule::default(),
            delta: None,
            varsigma_star: 1.0,
        }
    }
}

/// Parameters of the procedure once `n` is known.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResolvedParams {
    pub k_star: usize,
    pub eps: f64,
    pub delta: f64,
    pub upsilon: f64,
}

impl EstimatorParams {
    pub fn resolve(&self, n: usize) -> Result<ResolvedParams> {
        if !(self.varsigma_star > 0.0 && self.varsigma_star.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "varsigma_star = {} must be positive",
                self.varsigma_star
            )));
        }
        let eps = match self.eps {
            Some(e) => e,
            None => default_eps(n)?,
        };
        Ok(ResolvedParams {
            k_star: self.k_star.unwrap_or_else(|| default_k_star(self.k0, n)),
            eps,
            delta: self.delta.unwrap_or_else(|| self.delta_rule.eval(n)),
            upsilon: n as f64 / self.varsigma_star,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_values: Vec<usize>,
    /// Fixed frequency; otherwise `max(p_min, ceil(n^{5/6}))`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    pub p_min: usize,
    pub replications: usize,
    pub base_seed: u64,
    /// Reject configurations with `p < n^{5/6}` instead of warning.
    pub strict_h5: bool,
    pub signal: SignalSpec,
    pub noise: NoiseSpec,
    pub estimator: EstimatorParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_values: vec![20, 100, 200, 1000],
            p: Some(100_001),
            p_min: 3,
            replications: 10_000,
            base_seed: 1,
            strict_h5: false,
            signal: SignalSpec::Benchmark,
            noise: NoiseSpec::default(),
            estimator: EstimatorParams::default(),
        }
    }
}

/// `n^{5/6}`.
pub fn h5_bound(n: usize) -> f64 {
    (n as f64).powf(5.0 / 6.0)
}

impl ExperimentConfig {
    pub fn frequency(&self, n: usize) -> usize {
        self.p
            .unwrap_or_else(|| self.p_min.max((h5_bound(n) - 1e-9).ceil() as usize))
    }

    /// `p >= n^{5/6}`: an error when `strict_h5`, otherwise a warning.
    pub fn check_h5(&self, n: usize, p: usize) -> Result<()> {
        let bound = h5_bound(n);
        if (p as f64) < bound {
            if self.strict_h5 {
                return Err(Error::FrequencyCondition { n, p, bound });
            }
            log::warn!("p = {p} is below n^(5/6) = {bound:.3} for n = {n}");
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() {
            return Err(Error::InvalidParameter("n_values is empty".into()));
        }
        if self.replications < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 replications, got {}",
                self.replications
            )));
        }
        self.signal.validate()?;
        self.noise.validate_for_estimation()?;
        for &n in &self.n_values {
            let p = self.frequency(n);
            if p < 3 {
                return Err(Error::InvalidParameter(format!("p = {p} must be at least 3")));
            }
            self.check_h5(n, p)?;
            self.estimator.resolve(n)?;
        }
        Ok(())
    }
}

/// One simulated dataset and the procedure's output on it.
#[derive(Clone, Debug)]
pub struct Replication {
    pub estimates: CoefficientEstimates,
    pub selection: Selection,
}

/// Everything that stays fixed across replications at one `n`.
#[derive(Clone, Debug)]
pub struct RiskHarness {
    pub n: usize,
    pub p: usize,
    pub params: ResolvedParams,
    pub family: WeightFamily,
    /// `theta_{j,p}`, `j = 1..=p-1`.
    pub theta: Vec<f64>,
    /// `||S||_p^2`.
    pub norm_sq: f64,
    /// `tail[k] = sum_{k < j < p} theta_j^2 + (||S||_p^2 - sum_{j<p} theta_j^2)`.
    tail: Vec<f64>,
    noise: NoiseSpec,
    sampler: ObservationSampler,
    estimator: CoefficientEstimator,
    grid: Vec<f64>,
    base_seed: u64,
}

impl RiskHarness {
    pub fn new(config: &ExperimentConfig, n: usize) -> Result<Self> {
        config.signal.validate()?;
        config.noise.validate_for_estimation()?;
        let p = config.frequency(n);
        config.check_h5(n, p)?;
        let params = config.estimator.resolve(n)?;
        let family = build_weight_family(params.k_star, params.eps, params.upsilon, p)?;
        Self::with_family(config, n, params, family)
    }

    /// Uses an explicit candidate family in place of the Pinsker grid.
    pub fn with_family(config: &ExperimentConfig, n: usize, params: ResolvedParams, family: WeightFamily) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        let p = config.frequency(n);
        let estimator = CoefficientEstimator::new(p)?;
        let values = config.signal.grid_values(p);
        let mut theta = estimator.transform().project(&values);
        theta.truncate(p - 1);
        let norm_sq = discrete_norm_sq(&values);
        let in_span: f64 = theta.iter().map(|t| t * t).sum();
        let mut tail = vec![0.0; p];
        tail[p - 1] = (norm_sq - in_span).max(0.0);
        for k in (0..p - 1).rev() {
            tail[k] = tail[k + 1] + theta[k] * theta[k];
        }
        Ok(Self {
            n,
            p,
            params,
            family,
            theta,
            norm_sq,
            tail,
            noise: config.noise.clone(),
            sampler: ObservationSampler::new(config.signal.clone(), p)?,
            estimator,
            grid: observation_grid(n, p),
            base_seed: config.base_seed,
        })
    }

    pub fn transform(&self) -> &TrigTransform {
        self.estimator.transform()
    }

    /// Replication `r` draws from stream `(base_seed, r)`.
    pub fn replicate(&self, r: u64) -> Result<Replication> {
        let increments = self.sampler.sample_increments_on_grid(
            &self.grid,
            self.n,
            &self.noise,
            &RngStream::new(self.base_seed, r),
        )?;
        let estimates = self.estimator.estimate_increments(self.n, &increments)?;
        let selection = select(&estimates, &self.family, self.params.delta)?;
        Ok(Replication { estimates, selection })
    }

    /// `||S_hat - S||_p^2` for `S_hat = sum_{j<p} c_j Psi_{j,p}`.
    pub fn loss(&self, coeffs: &[f64]) -> f64 {
        let top = coeffs.len().min(self.p - 1);
        let body: f64 = coeffs[..top].iter().zip(&self.theta).map(|(c, t)| (c - t).powi(2)).sum();
        body + self.tail[top]
    }

    /// Loss of the weighted estimator `lambda(j) theta_hat_j`.
    pub fn candidate_loss(&self, lambda: &WeightVector, est: &CoefficientEstimates) -> f64 {
        let top = lambda.support().min(est.cap());
        let body: f64 = lambda.values()[..top]
            .iter()
            .zip(&est.theta_hat)
            .zip(&self.theta)
            .map(|((w, e), t)| (w * e - t).powi(2))
            .sum();
        body + self.tail[top]
    }

    /// Risk of the selection procedure and of every candidate on the same
    /// replications `0..replications`.
    pub fn run(&self, replications: usize) -> Result<RiskSummary> {
        let nu = self.family.weights.len();
        let acc = self.reduce(replications, nu + 1, |rep, out| {
            for (o, w) in out[1..].iter_mut().zip(&self.family.weights) {
                *o = self.candidate_loss(w, &rep.estimates);
            }
            out[0] = out[1 + rep.selection.index];
            out[0]
        })?;
        Ok(acc.summary(replications))
    }

    /// Risk of an arbitrary coefficient rule applied to each replication.
    pub fn run_with<F>(&self, replications: usize, rule: F) -> Result<(f64, f64)>
    where
        F: Fn(&Replication) -> Vec<f64> + Sync,
    {
        let acc = self.reduce(replications, 1, |rep, out| {
            out[0] = self.loss(&rule(rep));
            out[0]
        })?;
        let s = acc.summary(replications);
        Ok((s.mean, s.se))
    }

    fn reduce<F>(&self, replications: usize, width: usize, per_rep: F) -> Result<Accumulator>
    where
        F: Fn(&Replication, &mut [f64]) -> f64 + Sync,
    {
        if replications < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 replications, got {replications}"
            )));
        }
        let chunks = replications.div_ceil(CHUNK);
        let partial: Vec<Accumulator> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut acc = Accumulator::new(width);
                let mut row = vec![0.0; width];
                for r in c * CHUNK..((c + 1) * CHUNK).min(replications) {
                    let rep = self.replicate(r as u64)?;
                    let x = per_rep(&rep, &mut row);
                    acc.push(x, &row, rep.selection.sigma_hat);
                }
                Ok(acc)
            })
            .collect::<Result<_>>()?;
        Ok(pairwise(partial))
    }
}

#[derive(Clone, Debug)]
struct Accumulator {
    sum: f64,
    sum_sq: f64,
    sigma_sum: f64,
    columns: Vec<f64>,
}

impl Accumulator {
    fn new(width: usize) -> Self {
        Self {
            sum: 0.0,
            sum_sq: 0.0,
            sigma_sum: 0.0,
            columns: vec![0.0; width],
        }
    }

    fn push(&mut self, x: f64, row: &[f64], sigma: f64) {
        self.sum += x;
        self.sum_sq += x * x;
        self.sigma_sum += sigma;
        for (c, v) in self.columns.iter_mut().zip(row) {
            *c += v;
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.sigma_sum += other.sigma_sum;
        for (c, v) in self.columns.iter_mut().zip(&other.columns) {
            *c += v;
        }
        self
    }

    fn summary(&self, count: usize) -> RiskSummary {
        let n = count as f64;
        let mean = self.sum / n;
        let var = ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        let candidate: Vec<f64> = self.columns.iter().skip(1).map(|c| c / n).collect();
        let (oracle_index, oracle) = candidate
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (i, v)| if *v < best.1 { (i, *v) } else { best });
        RiskSummary {
            mean,
            se: (var / n).sqrt(),
            sigma_hat_mean: self.sigma_sum / n,
            candidate_risk: candidate,
            oracle,
            oracle_index,
        }
    }
}

/// Balanced pairwise merge in index order.
fn pairwise(mut parts: Vec<Accumulator>) -> Accumulator {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(a) = it.next() {
            next.push(match it.next() {
                Some(b) => a.merge(b),
                None => a,
            });
        }
        parts = next;
    }
    parts.pop().expect("at least one chunk")
}

#[derive(Clone, Debug, PartialEq)]
pub struct RiskSummary {
    /// Empirical risk `R_bar`.
    pub mean: f64,
    pub se: f64,
    pub sigma_hat_mean: f64,
    /// Mean loss of each fixed candidate.
    pub candidate_risk: Vec<f64>,
    pub oracle: f64,
    pub oracle_index: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RiskRow {
    pub n: usize,
    pub p: usize,
    pub replications: usize,
    pub r_bar: f64,
    pub r_bar_se: f64,
    /// `R_bar / ||S||_p^2`.
    pub r_rel: f64,
    pub oracle: f64,
    pub norm_sq: f64,
    pub sigma_hat_mean: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RiskReport {
    pub rows: Vec<RiskRow>,
}

impl RiskReport {
    /// Columns `n,p,N,R_bar,R_bar_se,R_rel,oracle,seconds`. Wall-clock time
    /// is left blank unless requested, so reruns compare bitwise.
    pub fn write_csv<W: Write>(&self, mut out: W, with_timing: bool) -> io::Result<()> {
        writeln!(out, "n,p,N,R_bar,R_bar_se,R_rel,oracle,seconds")?;
        for r in &self.rows {
            let seconds = if with_timing { format!("{:.3}", r.seconds) } else { String::new() };
            writeln!(
                out,
                "{},{},{},{:e},{:e},{:e},{:e},{}",
                r.n, r.p, r.replications, r.r_bar, r.r_bar_se, r.r_rel, r.oracle, seconds
            )?;
        }
        Ok(())
    }
}

/// Runs the risk harness for every `n` on a pool with `threads` workers
/// (rayon's default when `None`).
pub fn empirical_risk(config: &ExperimentConfig, threads: Option<usize>) -> Result<RiskReport> {
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let mut rows = Vec::with_capacity(config.n_values.len());
    for &n in &config.n_values {
        let start = Instant::now();
        let harness = RiskHarness::new(config, n)?;
        let summary = pool.install(|| harness.run(config.replications))?;
        log::info!(
            "n = {n}: R_bar = {:.6} (se {:.6}), oracle {:.6}",
            summary.mean,
            summary.se,
            summary.oracle
        );
        rows.push(RiskRow {
            n,
            p: harness.p,
            replications: config.replications,
            r_bar: summary.mean,
            r_bar_se: summary.se,
            r_rel: relative_to(summary.mean, harness.norm_sq)?,
            oracle: summary.oracle,
            norm_sq: harness.norm_sq,
            sigma_hat_mean: summary.sigma_hat_mean,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok(RiskReport { rows })
}

/// Oracle risk `min_lambda R(S_lambda)` per `n`, on the replications used
/// by [`empirical_risk`].
pub fn oracle_risk(config: &ExperimentConfig, threads: Option<usize>) -> Result<Vec<f64>> {
    Ok(empirical_risk(config, threads)?.rows.iter().map(|r| r.oracle).collect())
}

fn relative_to(r_bar: f64, norm_sq: f64) -> Result<f64> {
    if !(norm_sq > 0.0) {
        return Err(Error::ZeroNorm);
    }
    Ok(r_bar / norm_sq)
}

/// `R_bar / ||S||_p^2`.
pub fn relative_risk(r_bar: f64, signal: &SignalSpec, p: usize) -> Result<f64> {
    relative_to(r_bar, discrete_norm_sq(&signal.grid_values(p)))
}

/// `r*_k = ((2k+1) r)^{1/(2k+1)} (k / ((k+1) pi))^{2k/(2k+1)}`.
pub fn pinsker_constant(k: u32, r: f64) -> Result<f64> {
    if k == 0 || !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("need k >= 1 and r > 0, got k = {k}, r = {r}")));
    }
    let k = k as f64;
    let e = 2.0 * k + 1.0;
    Ok(((e * r).ln() / e + 2.0 * k / e * (k / ((k + 1.0) * PI)).ln()).exp())
}
