use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::noise::{sample_noise_increments, NoiseSpec, RngStream};
use crate::signal::SignalSpec;

/// Observations `y_{t_j}`, `t_j = j/p`, `j = 0..=n*p`, with `y_0 = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservationPath {
    pub n: usize,
    pub p: usize,
    pub y: Vec<f64>,
}

impl ObservationPath {
    pub fn new(n: usize, p: usize, y: Vec<f64>) -> Result<Self> {
        let expected = n * p + 1;
        if y.len() != expected {
            return Err(Error::PathLength {
                got: y.len(),
                expected,
            });
        }
        Ok(Self { n, p, y })
    }

    pub fn from_increments(n: usize, p: usize, increments: &[f64]) -> Result<Self> {
        let mut y = Vec::with_capacity(increments.len() + 1);
        y.push(0.0);
        let mut acc = 0.0;
        for d in increments {
            acc += d;
            y.push(acc);
        }
        Self::new(n, p, y)
    }

    pub fn validate(&self) -> Result<()> {
        let expected = self.n * self.p + 1;
        if self.y.len() != expected {
            return Err(Error::PathLength {
                got: self.y.len(),
                expected,
            });
        }
        Ok(())
    }

    pub fn increments(&self) -> impl Iterator<Item = f64> + '_ {
        self.y.windows(2).map(|w| w[1] - w[0])
    }

    pub fn time(&self, j: usize) -> f64 {
        j as f64 / self.p as f64
    }

    /// CSV with header `j,t_j,y_j`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "j,t_j,y_j")?;
        for (j, y) in self.y.iter().enumerate() {
            writeln!(out, "{},{},{}", j, self.time(j), y)?;
        }
        Ok(())
    }
}

/// `t_j = j/p`, `j = 0..=n*p`.
pub fn observation_grid(n: usize, p: usize) -> Vec<f64> {
    (0..=n * p).map(|j| j as f64 / p as f64).collect()
}

/// Draws observation paths of `dy = S dt + d xi` for a fixed signal and
/// frequency, reusing the cellwise signal integrals across paths.
#[derive(Clone, Debug)]
pub struct ObservationSampler {
    signal: SignalSpec,
    p: usize,
    cell_integrals: Vec<f64>,
}

impl ObservationSampler {
    pub fn new(signal: SignalSpec, p: usize) -> Result<Self> {
        if p < 3 {
            return Err(Error::InvalidParameter(format!("p = {p} must be at least 3")));
        }
        signal.validate()?;
        let cell_integrals = signal.cell_integrals(p);
        Ok(Self {
            signal,
            p,
            cell_integrals,
        })
    }

    pub fn signal(&self) -> &SignalSpec {
        &self.signal
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Samples a path on the supplied grid, which must equal
    /// `observation_grid(n, p)`; callers drawing many paths keep one grid.
    pub fn sample_on_grid(
        &self,
        grid: &[f64],
        n: usize,
        noise: &NoiseSpec,
        stream: &RngStream,
    ) -> Result<ObservationPath> {
        let increments = self.sample_increments_on_grid(grid, n, noise, stream)?;
        ObservationPath::from_increments(n, self.p, &increments)
    }

    /// Increments `y_{t_l} - y_{t_{l-1}}`, `l = 1..=np`, without the path.
    pub fn sample_increments_on_grid(
        &self,
        grid: &[f64],
        n: usize,
        noise: &NoiseSpec,
        stream: &RngStream,
    ) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if grid.len() != n * self.p + 1 {
            return Err(Error::LengthMismatch {
                left: grid.len(),
                right: n * self.p + 1,
            });
        }
        let mut increments = sample_noise_increments(grid, noise, stream)?;
        for (l, d) in increments.iter_mut().enumerate() {
            *d += self.cell_integrals[l % self.p];
        }
        Ok(increments)
    }

    pub fn sample(&self, n: usize, noise: &NoiseSpec, stream: &RngStream) -> Result<ObservationPath> {
        self.sample_on_grid(&observation_grid(n, self.p), n, noise, stream)
    }
}

pub fn sample_observations(
    signal: &SignalSpec,
    noise: &NoiseSpec,
    n: usize,
    p: usize,
    stream: &RngStream,
) -> Result<ObservationPath> {
    ObservationSampler::new(signal.clone(), p)?.sample(n, noise, stream)
}
