//! Noise `xi_t = rho1 L_t + rho2 z_t`: a Brownian motion mixed with a
//! compensated compound Poisson process, plus a semi-Markov jump process
//! driven by a renewal counting process with general inter-arrival law.

pub mod laws;
pub mod path;
pub mod rng;

use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use laws::{InterarrivalLaw, JumpLaw, LevyJumps, MarkLaw};
pub use path::{observation_grid, sample_observations, ObservationPath, ObservationSampler};
pub use rng::{RngStream, Substream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSpec {
    /// Weight of the Lévy component.
    pub rho1: f64,
    /// Weight of the semi-Markov component.
    pub rho2: f64,
    /// Brownian share of the Lévy component.
    pub rho_check: f64,
    pub levy_jumps: Option<LevyJumps>,
    pub interarrival: InterarrivalLaw,
    pub marks: MarkLaw,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            rho1: 0.5,
            rho2: 0.5,
            rho_check: 1.0,
            levy_jumps: None,
            interarrival: InterarrivalLaw::default(),
            marks: MarkLaw::default(),
        }
    }
}

impl NoiseSpec {
    pub fn silent() -> Self {
        Self {
            rho1: 0.0,
            rho2: 0.0,
            ..Self::default()
        }
    }

    /// Checks parameter ranges and the Lévy normalization. Degenerate
    /// testing laws pass here; see [`NoiseSpec::validate_for_estimation`].
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("rho1", self.rho1), ("rho2", self.rho2)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::NoiseConfig(format!("{name} must be >= 0, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.rho_check) {
            return Err(Error::NoiseConfig(format!(
                "rho_check must lie in [0, 1], got {}",
                self.rho_check
            )));
        }
        match &self.levy_jumps {
            Some(l) => l.validate()?,
            None if self.rho_check < 1.0 => {
                return Err(Error::NoiseConfig(
                    "rho_check < 1 requires a Levy jump specification".into(),
                ))
            }
            None => {}
        }
        self.interarrival.validate()
    }

    pub fn validate_for_estimation(&self) -> Result<()> {
        self.validate()?;
        if self.interarrival.is_degenerate() || self.marks.is_degenerate() {
            return Err(Error::NoiseConfig(
                "degenerate testing laws cannot be used for estimation".into(),
            ));
        }
        Ok(())
    }

    /// `sigma_Q = rho1^2 + rho2^2 / tau_check`.
    pub fn proxy_variance(&self) -> f64 {
        crate::renewal::proxy_variance(self.rho1, self.rho2, self.interarrival.mean())
    }
}

/// Renewal epochs `T_k = tau_1 + ... + tau_k <= horizon`.
pub fn sample_renewal_times(
    law: &InterarrivalLaw,
    horizon: f64,
    stream: &RngStream,
) -> Result<Vec<f64>> {
    let sampler = law.sampler()?;
    let mut rng = stream.substream(Substream::Renewal);
    let mut epochs = Vec::new();
    if !(horizon > 0.0) {
        return Ok(epochs);
    }
    let mut t = 0.0;
    loop {
        t += sampler.sample(&mut rng);
        if t > horizon {
            break;
        }
        epochs.push(t);
    }
    Ok(epochs)
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::InvalidParameter("grid needs at least two points".into()));
    }
    if !(grid[0] >= 0.0) || grid.windows(2).any(|w| !(w[1] >= w[0])) || !grid[grid.len() - 1].is_finite() {
        return Err(Error::InvalidParameter(
            "grid must start at a non-negative time and be non-decreasing".into(),
        ));
    }
    Ok(())
}

/// Adds `value` to the increment of the cell `(s_{m-1}, s_m]` containing each
/// event; events must be sorted and lie in `(s_0, s_M]`.
fn bin_events(grid: &[f64], events: impl Iterator<Item = (f64, f64)>, out: &mut [f64]) {
    let mut m = 1;
    for (t, value) in events {
        while grid[m] < t {
            m += 1;
        }
        out[m - 1] += value;
    }
}

/// Increments of `z_t = sum_{i <= N_t} Y_i` over the cells of `grid`.
pub fn sample_semimarkov_increments(
    grid: &[f64],
    spec: &NoiseSpec,
    stream: &RngStream,
) -> Result<Vec<f64>> {
    check_grid(grid)?;
    let start = grid[0];
    let horizon = grid[grid.len() - 1];
    let epochs = sample_renewal_times(&spec.interarrival, horizon, stream)?;
    let mut marks = stream.substream(Substream::Marks);
    let mut out = vec![0.0; grid.len() - 1];
    // marks are drawn for every epoch, so the k-th epoch always carries Y_k
    let events = epochs
        .iter()
        .map(|&t| (t, spec.marks.sample(&mut marks)))
        .filter(|&(t, _)| t > start);
    bin_events(grid, events, &mut out);
    Ok(out)
}

/// Increments of `L = rho_check w + sqrt(1 - rho_check^2) L_check` over the
/// cells of `grid`, with `L_check` a compensated compound Poisson process.
pub fn sample_levy_increments(
    grid: &[f64],
    spec: &NoiseSpec,
    stream: &RngStream,
) -> Result<Vec<f64>> {
    check_grid(grid)?;
    let mut out = vec![0.0; grid.len() - 1];
    let rc = spec.rho_check;
    if rc > 0.0 {
        let mut rng = stream.substream(Substream::Brownian);
        for (dx, w) in out.iter_mut().zip(grid.windows(2)) {
            let z: f64 = StandardNormal.sample(&mut rng);
            *dx = rc * (w[1] - w[0]).sqrt() * z;
        }
    }
    let jump_weight = (1.0 - rc * rc).max(0.0).sqrt();
    if jump_weight > 0.0 {
        let levy = spec.levy_jumps.as_ref().ok_or_else(|| {
            Error::NoiseConfig("rho_check < 1 requires a Levy jump specification".into())
        })?;
        levy.validate()?;
        let jumps = compensated_poisson_increments(grid, levy, &mut stream.substream(Substream::LevyJumps))?;
        for (dx, j) in out.iter_mut().zip(jumps) {
            *dx += jump_weight * j;
        }
    }
    Ok(out)
}

fn compensated_poisson_increments<R: Rng>(grid: &[f64], levy: &LevyJumps, rng: &mut R) -> Result<Vec<f64>> {
    let start = grid[0];
    let horizon = grid[grid.len() - 1];
    let gaps = Exp::new(levy.intensity).map_err(|e| Error::NoiseConfig(e.to_string()))?;
    let sizes = levy.jump_law.sampler()?;
    let mut out = vec![0.0; grid.len() - 1];
    let mut t = start;
    let mut events = Vec::new();
    loop {
        t += gaps.sample(rng);
        if t > horizon {
            break;
        }
        events.push((t, sizes.sample(rng)));
    }
    bin_events(grid, events.into_iter(), &mut out);
    let drift = levy.intensity * levy.jump_law.mean();
    if drift != 0.0 {
        for (dx, w) in out.iter_mut().zip(grid.windows(2)) {
            *dx -= drift * (w[1] - w[0]);
        }
    }
    Ok(out)
}

/// Increments of `xi = rho1 L + rho2 z` over the cells of `grid`.
pub fn sample_noise_increments(grid: &[f64], spec: &NoiseSpec, stream: &RngStream) -> Result<Vec<f64>> {
    spec.validate()?;
    let mut out = vec![0.0; grid.len().saturating_sub(1)];
    if spec.rho1 > 0.0 {
        for (dx, l) in out.iter_mut().zip(sample_levy_increments(grid, spec, stream)?) {
            *dx += spec.rho1 * l;
        }
    }
    if spec.rho2 > 0.0 {
        for (dx, z) in out.iter_mut().zip(sample_semimarkov_increments(grid, spec, stream)?) {
            *dx += spec.rho2 * z;
        }
    }
    if spec.rho1 == 0.0 && spec.rho2 == 0.0 {
        check_grid(grid)?;
    }
    Ok(out)
}
