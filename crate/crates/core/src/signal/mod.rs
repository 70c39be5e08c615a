//! Periodic target signals, their discrete Fourier coefficients with respect
//! to the trigonometric basis, and the cellwise correction terms linking the
//! discrete coefficients to those of the step-function basis.

pub mod basis;
pub mod transform;

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use basis::{frequency, grid_cell, psi_basis, trig_basis, trig_basis_on_grid};
pub use transform::TrigTransform;

/// 4-point Gauss-Legendre rule on `[-1, 1]`.
const GAUSS_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GAUSS_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_8,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_8,
];

/// User-supplied signal on one period `(0, 1]`.
#[derive(Clone)]
pub struct CustomSignal {
    pub name: String,
    func: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    breakpoints: Vec<f64>,
}

impl CustomSignal {
    pub fn new<F>(name: impl Into<String>, func: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            func: Arc::new(func),
            breakpoints: Vec::new(),
        }
    }

    /// Points in `(0, 1)` where the function or its derivative jumps; cell
    /// quadrature splits there.
    pub fn with_breakpoints(mut self, mut points: Vec<f64>) -> Self {
        points.retain(|x| *x > 0.0 && *x < 1.0);
        points.sort_by(f64::total_cmp);
        self.breakpoints = points;
        self
    }
}

/// Two custom signals are equal when they share the same function object.
impl PartialEq for CustomSignal {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.func, &other.func) && self.name == other.name && self.breakpoints == other.breakpoints
    }
}

impl fmt::Debug for CustomSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomSignal").field("name", &self.name).finish()
    }
}

/// A 1-periodic signal `S`. Every variant is evaluated through its values on
/// the period `(0, 1]`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalSpec {
    /// `|t - 1/2|` on `[1/4, 3/4]`, `1/4` elsewhere.
    #[default]
    Benchmark,
    /// `sum_j coefficients[j-1] phi_j(t)`.
    TrigPolynomial { coefficients: Vec<f64> },
    /// Values at `k/m`, `k = 0..m`, linearly interpolated and wrapped.
    Tabulated { values: Vec<f64> },
    #[serde(skip)]
    Custom(CustomSignal),
}

impl SignalSpec {
    pub fn constant(c: f64) -> Self {
        SignalSpec::TrigPolynomial {
            coefficients: vec![c],
        }
    }

    pub fn basis_element(j: usize) -> Self {
        assert!(j >= 1);
        let mut coefficients = vec![0.0; j];
        coefficients[j - 1] = 1.0;
        SignalSpec::TrigPolynomial { coefficients }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SignalSpec::TrigPolynomial { coefficients } if coefficients.is_empty() => Err(
                Error::InvalidParameter("trig polynomial needs at least one coefficient".into()),
            ),
            SignalSpec::Tabulated { values } if values.is_empty() => Err(Error::InvalidParameter(
                "tabulated signal needs at least one value".into(),
            )),
            SignalSpec::TrigPolynomial { coefficients: v } | SignalSpec::Tabulated { values: v }
                if v.iter().any(|x| !x.is_finite()) =>
            {
                Err(Error::InvalidParameter("signal values must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let u = if t > 0.0 && t <= 1.0 {
            t
        } else {
            t - t.ceil() + 1.0
        };
        self.eval_period(u)
    }

    fn eval_period(&self, u: f64) -> f64 {
        match self {
            SignalSpec::Benchmark => {
                if (0.25..=0.75).contains(&u) {
                    (u - 0.5).abs()
                } else {
                    0.25
                }
            }
            SignalSpec::TrigPolynomial { coefficients } => coefficients
                .iter()
                .enumerate()
                .map(|(idx, c)| c * trig_basis(idx + 1, u))
                .sum(),
            SignalSpec::Tabulated { values } => {
                let m = values.len();
                let x = u * m as f64;
                let k = (x.floor() as usize).min(m);
                let frac = x - k as f64;
                let left = values[k % m];
                let right = values[(k + 1) % m];
                left + frac * (right - left)
            }
            SignalSpec::Custom(c) => (c.func)(u),
        }
    }

    /// Kinks and jumps inside `(0, 1)`.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            SignalSpec::Benchmark => vec![0.25, 0.5, 0.75],
            SignalSpec::TrigPolynomial { .. } => Vec::new(),
            SignalSpec::Tabulated { values } => {
                let m = values.len();
                (1..m).map(|k| k as f64 / m as f64).collect()
            }
            SignalSpec::Custom(c) => c.breakpoints.clone(),
        }
    }

    /// `S(t_i)` for `t_i = i/p`, `i = 1..=p`.
    pub fn grid_values(&self, p: usize) -> Vec<f64> {
        (1..=p).map(|i| self.eval(i as f64 / p as f64)).collect()
    }

    /// `int_{t_{l-1}}^{t_l} S(t) dt` for `l = 1..=p`, by a 4-point Gauss rule
    /// on each piece of the cell between breakpoints.
    pub fn cell_integrals(&self, p: usize) -> Vec<f64> {
        let breaks = self.breakpoints();
        let width = 1.0 / p as f64;
        let mut out = Vec::with_capacity(p);
        let mut next_break = 0;
        for l in 1..=p {
            let a = (l - 1) as f64 * width;
            let b = l as f64 * width;
            let mut lo = a;
            let mut total = 0.0;
            while next_break < breaks.len() && breaks[next_break] <= a {
                next_break += 1;
            }
            let mut k = next_break;
            while k < breaks.len() && breaks[k] < b {
                total += self.gauss(lo, breaks[k]);
                lo = breaks[k];
                k += 1;
            }
            total += self.gauss(lo, b);
            out.push(total);
        }
        out
    }

    fn gauss(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        GAUSS_NODES
            .iter()
            .zip(GAUSS_WEIGHTS)
            .map(|(x, w)| w * self.eval_period(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Exact `theta_j = int_0^1 S phi_j` where a closed form is available.
    pub fn exact_fourier_coeff(&self, j: usize) -> Option<f64> {
        assert!(j >= 1);
        match self {
            SignalSpec::Benchmark => Some(benchmark_fourier_coeff(j)),
            SignalSpec::TrigPolynomial { coefficients } => {
                Some(coefficients.get(j - 1).copied().unwrap_or(0.0))
            }
            _ => None,
        }
    }

    /// `sum_j a_j theta_j^2` with `a_j = sum_{i=0}^{k} (2 pi [j/2])^{2i}`,
    /// i.e. `sum_{i<=k} ||S^{(i)}||^2`, for trigonometric polynomials.
    pub fn sobolev_radius(&self, k: u32) -> Option<f64> {
        match self {
            SignalSpec::TrigPolynomial { coefficients } => Some(
                coefficients
                    .iter()
                    .enumerate()
                    .map(|(idx, c)| {
                        let w = 2.0 * PI * frequency(idx + 1) as f64;
                        let a: f64 = (0..=k).map(|i| w.powi(2 * i as i32)).sum();
                        a * c * c
                    })
                    .sum(),
            ),
            _ => None,
        }
    }
}

/// Closed-form coefficients of the benchmark. The signal is symmetric about
/// `1/2`, so every sine coefficient vanishes.
fn benchmark_fourier_coeff(j: usize) -> f64 {
    if j == 1 {
        return 3.0 / 16.0;
    }
    if j % 2 == 1 {
        return 0.0;
    }
    let k = frequency(j) as f64;
    let sign = if frequency(j) % 2 == 0 { 1.0 } else { -1.0 };
    -SQRT_2 * sign * (1.0 - (0.5 * PI * k).cos()) / (2.0 * PI * PI * k * k)
}

/// Discrete coefficients `theta_{j,p}` together with the step-basis
/// coefficients `theta_bar_{j,p} = theta_{j,p} + h_{j,p}`, for `j = 1..=p`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierCoefficients {
    pub p: usize,
    pub theta: Vec<f64>,
    pub theta_bar: Vec<f64>,
    pub h: Vec<f64>,
}

impl FourierCoefficients {
    pub fn compute(signal: &SignalSpec, p: usize) -> Result<Self> {
        let transform = TrigTransform::new(check_frequency(p)?);
        let values = signal.grid_values(p);
        let theta = transform.project(&values);
        let h = correction_from_values(&transform, signal, &values);
        let theta_bar = theta.iter().zip(&h).map(|(a, b)| a + b).collect();
        Ok(Self {
            p,
            theta,
            theta_bar,
            h,
        })
    }
}

fn check_frequency(p: usize) -> Result<usize> {
    if p < 3 {
        return Err(Error::InvalidParameter(format!(
            "observation frequency p = {p} must be at least 3"
        )));
    }
    Ok(p)
}

/// `theta_{j,p} = (1/p) sum_i S(t_i) phi_j(t_i)`, `j = 1..=p`.
pub fn discrete_fourier_coeffs(signal: &SignalSpec, p: usize) -> Result<Vec<f64>> {
    let transform = TrigTransform::new(check_frequency(p)?);
    Ok(transform.project(&signal.grid_values(p)))
}

/// `h_{j,p} = sum_l phi_j(t_l) int_{t_{l-1}}^{t_l} (S(t) - S(t_l)) dt`,
/// `j = 1..=p`.
pub fn correction_coeffs(signal: &SignalSpec, p: usize) -> Result<Vec<f64>> {
    let transform = TrigTransform::new(check_frequency(p)?);
    let values = signal.grid_values(p);
    Ok(correction_from_values(&transform, signal, &values))
}

fn correction_from_values(transform: &TrigTransform, signal: &SignalSpec, values: &[f64]) -> Vec<f64> {
    let p = transform.p();
    let scaled: Vec<f64> = signal
        .cell_integrals(p)
        .iter()
        .zip(values)
        .map(|(c, v)| p as f64 * c - v)
        .collect();
    transform.project(&scaled)
}

/// `(x, y)_p = (1/p) sum_i x_i y_i`.
pub fn discrete_inner(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.is_empty() {
        return Ok(0.0);
    }
    Ok(x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / x.len() as f64)
}

pub fn discrete_norm_sq(x: &[f64]) -> f64 {
    discrete_inner(x, x).expect("same slice")
}
