//! Renewal density `rho = sum_l g^{*l}` of the inter-arrival law, obtained
//! from the renewal equation `rho = g + g * rho`, together with the
//! deviation `Upsilon = rho - 1/tau_check` and the noise-level scalars that
//! depend on it.
//!
//! The Volterra equation is marched forward with product trapezoidal
//! weights: the unknown is interpolated linearly between grid nodes and
//! integrated exactly against `g`, so the discrete kernel keeps the exact
//! mass and mean of the law. For gamma laws the first few convolution powers
//! are known in closed form and are split off, which leaves a remainder that
//! vanishes to second order at the origin. The march is repeated at half
//! the step and the two are Richardson-combined.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::noise::InterarrivalLaw;
use crate::noise::laws::{gamma_cdf, gamma_pdf};

/// Default tolerance on `|rho(T) - 1/tau_check|`.
pub const TAIL_TOLERANCE: f64 = 1e-6;

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

/// Inter-arrival density as seen by the solver.
pub trait RenewalKernel {
    fn pdf(&self, x: f64) -> f64;

    /// Mean `tau_check`.
    fn mean(&self) -> f64;

    /// `int_a^b g(u) du`.
    fn mass(&self, a: f64, b: f64) -> f64 {
        gauss(|u| self.pdf(u), a, b)
    }

    /// `int_a^b u g(u) du`.
    fn first_moment(&self, a: f64, b: f64) -> f64 {
        gauss(|u| u * self.pdf(u), a, b)
    }

    /// `g^{*l}(x)` when known in closed form.
    fn convolution_power(&self, _l: usize, _x: f64) -> Option<f64> {
        None
    }

    /// Number of convolution powers the solver should take from
    /// [`RenewalKernel::convolution_power`] instead of solving for them.
    fn closed_form_powers(&self) -> usize {
        0
    }
}

fn gauss(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    GAUSS_NODES
        .iter()
        .zip(GAUSS_WEIGHTS)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Gamma density with closed-form CDF, partial moments and convolution
/// powers (`g^{*l}` is gamma with shape `l * shape`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaKernel {
    pub shape: f64,
    pub scale: f64,
}

impl RenewalKernel for GammaKernel {
    fn pdf(&self, x: f64) -> f64 {
        gamma_pdf(self.shape, self.scale, x)
    }

    fn mean(&self) -> f64 {
        self.shape * self.scale
    }

    fn mass(&self, a: f64, b: f64) -> f64 {
        gamma_cdf(self.shape, self.scale, b) - gamma_cdf(self.shape, self.scale, a)
    }

    fn first_moment(&self, a: f64, b: f64) -> f64 {
        // u g_{k,s}(u) = k s g_{k+1,s}(u)
        self.mean() * (gamma_cdf(self.shape + 1.0, self.scale, b) - gamma_cdf(self.shape + 1.0, self.scale, a))
    }

    fn convolution_power(&self, l: usize, x: f64) -> Option<f64> {
        Some(gamma_pdf(l as f64 * self.shape, self.scale, x))
    }

    fn closed_form_powers(&self) -> usize {
        // integer shapes are smooth at the origin; otherwise leave a
        // remainder forced by g^{*L} with L * shape >= 3
        if self.shape.fract() == 0.0 {
            0
        } else {
            (3.0 / self.shape).ceil().max(1.0) as usize - 1
        }
    }
}

/// Arbitrary density given as a closure; cell integrals use a 4-point Gauss
/// rule.
pub struct FnKernel<F> {
    pub density: F,
    pub mean: f64,
}

impl<F: Fn(f64) -> f64> RenewalKernel for FnKernel<F> {
    fn pdf(&self, x: f64) -> f64 {
        (self.density)(x)
    }

    fn mean(&self) -> f64 {
        self.mean
    }
}

impl InterarrivalLaw {
    pub fn renewal_kernel(&self) -> Result<GammaKernel> {
        self.validate()?;
        let (shape, scale) = self.as_gamma().ok_or_else(|| {
            Error::InvalidDensity(format!("{self:?} has no density"))
        })?;
        Ok(GammaKernel { shape, scale })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenewalSolution {
    pub step: f64,
    pub horizon: f64,
    /// `rho[i]` approximates `rho(i * step)`.
    pub rho: Vec<f64>,
    pub tau_bar: f64,
    /// `||Upsilon||_1`: trapezoid over `[0, T]` plus the extrapolated tail.
    pub upsilon_l1: f64,
    /// Extrapolated contribution of `(T, inf)` to `upsilon_l1`.
    pub upsilon_tail: f64,
    /// `|rho|_*`, the maximum over the grid.
    pub rho_sup: f64,
    /// `|rho(T) - 1/tau_check|`.
    pub tail_deviation: f64,
    pub tail_converged: bool,
}

impl RenewalSolution {
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.step
    }

    pub fn upsilon(&self, i: usize) -> f64 {
        self.rho[i] - 1.0 / self.tau_bar
    }

    /// CSV with header `x,rho,upsilon`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "x,rho,upsilon")?;
        for i in 0..self.rho.len() {
            writeln!(out, "{},{},{}", self.x(i), self.rho[i], self.upsilon(i))?;
        }
        Ok(())
    }
}

/// Solves `rho = g + g * rho` on `[0, horizon]` with grid step `step`.
pub fn solve_renewal_density<K: RenewalKernel + ?Sized>(
    kernel: &K,
    step: f64,
    horizon: f64,
) -> Result<RenewalSolution> {
    let tau = kernel.mean();
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidDensity(format!("mean must be positive, got {tau}")));
    }
    if !(step > 0.0 && step <= tau / 50.0 * (1.0 + 1e-12)) {
        return Err(Error::InvalidParameter(format!(
            "step {step} must lie in (0, tau/50 = {}]",
            tau / 50.0
        )));
    }
    if !(horizon >= 20.0 * tau * (1.0 - 1e-12)) || !horizon.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "horizon {horizon} must be at least 20 tau = {}",
            20.0 * tau
        )));
    }
    let cells = (horizon / step).round() as usize;
    let h = step;
    // Richardson extrapolation against the half step removes the O(h^2)
    // bias of the discrete limit.
    let coarse = march(kernel, h, cells)?;
    let fine = march(kernel, 0.5 * h, 2 * cells)?;
    let rho: Vec<f64> = coarse
        .iter()
        .enumerate()
        .map(|(i, c)| (4.0 * fine[2 * i] - c) / 3.0)
        .collect();

    let limit = 1.0 / tau;
    let dev: Vec<f64> = rho.iter().map(|r| (r - limit).abs()).collect();
    let body = h * (dev.iter().sum::<f64>() - 0.5 * (dev[0] + dev[cells]));

    let window = (cells / 10).max(1);
    let last = dev[cells + 1 - window..].iter().cloned().fold(0.0, f64::max);
    let prev = dev[cells + 1 - 2 * window..cells + 1 - window].iter().cloned().fold(0.0, f64::max);
    // Once |Upsilon| reaches the discretization plateau no decay rate can be
    // read off; below the tail tolerance that plateau counts as converged.
    let floor = 1e-12 * limit;
    let (tail, decaying) = if last <= floor {
        (0.0, true)
    } else {
        let rate = (prev / last).ln() / (window as f64 * h);
        if prev >= 2.0 * last && rate.is_finite() {
            (last / rate, true)
        } else if last <= TAIL_TOLERANCE {
            (0.0, true)
        } else {
            (f64::INFINITY, false)
        }
    };

    let tail_deviation = dev[cells];
    let rho_sup = rho.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(RenewalSolution {
        step: h,
        horizon: cells as f64 * h,
        rho,
        tau_bar: tau,
        upsilon_l1: body + tail,
        upsilon_tail: tail,
        rho_sup,
        tail_deviation,
        tail_converged: decaying && tail_deviation <= TAIL_TOLERANCE,
    })
}

/// Product-trapezoid march of `rho = g + g * rho` on `cells` steps of `h`.
fn march<K: RenewalKernel + ?Sized>(kernel: &K, h: f64, cells: usize) -> Result<Vec<f64>> {
    let horizon = cells as f64 * h;

    let pdf: Vec<f64> = (0..=cells).map(|i| kernel.pdf(i as f64 * h)).collect();
    if let Some(bad) = pdf.iter().skip(1).find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::InvalidDensity(format!("density value {bad} is negative or not finite")));
    }
    if !(pdf[0].is_finite() && pdf[0] >= 0.0) {
        return Err(Error::InvalidDensity(
            "density must be finite at the origin (bounded renewal density)".into(),
        ));
    }

    // cell masses C_m and split hat weights on cell m = 1..=cells
    let mut rise = vec![0.0; cells + 1];
    let mut fall = vec![0.0; cells + 2];
    let mut total_mass = 0.0;
    for m in 1..=cells {
        let a = (m - 1) as f64 * h;
        let b = m as f64 * h;
        let c = kernel.mass(a, b);
        let mom = kernel.first_moment(a, b);
        if !(c >= -1e-15) || !c.is_finite() || !mom.is_finite() {
            return Err(Error::InvalidDensity(format!("cell mass {c} on [{a}, {b}]")));
        }
        rise[m] = (mom - a * c) / h;
        fall[m] = (b * c - mom) / h;
        total_mass += c;
    }
    if (total_mass - 1.0).abs() > 1e-3 {
        return Err(Error::InvalidDensity(format!(
            "density integrates to {total_mass} on [0, {horizon}], expected 1"
        )));
    }
    // W_q: full hat centred at q h
    let weights: Vec<f64> = (0..cells).map(|q| if q == 0 { 0.0 } else { rise[q] + fall[q + 1] }).collect();

    let peeled = kernel.closed_form_powers();
    let mut known = vec![0.0; cells + 1];
    let mut forcing = pdf.clone();
    if peeled > 0 {
        for (i, k) in known.iter_mut().enumerate() {
            let x = i as f64 * h;
            let powers: Option<f64> = (1..=peeled).map(|l| kernel.convolution_power(l, x)).sum();
            *k = powers.expect("closed_form_powers > 0 implies convolution_power");
            forcing[i] = kernel.convolution_power(peeled + 1, x).expect("closed form");
        }
    }

    // remainder R = f + g * R
    let mut rem = vec![0.0; cells + 1];
    rem[0] = forcing[0];
    let diag = 1.0 - fall[1];
    for i in 1..=cells {
        let interior: f64 = weights[1..i]
            .iter()
            .rev()
            .zip(&rem[1..i])
            .map(|(w, r)| w * r)
            .sum();
        rem[i] = (forcing[i] + interior + rise[i] * rem[0]) / diag;
    }
    let rho: Vec<f64> = known.iter().zip(&rem).map(|(a, b)| a + b).collect();

    Ok(rho)
}

/// `sigma_Q = rho1^2 + rho2^2 / tau_check`.
pub fn proxy_variance(rho1: f64, rho2: f64, tau_bar: f64) -> f64 {
    rho1 * rho1 + rho2 * rho2 / tau_bar
}

/// `kappa_Q = rho1^2 + rho2^2 |rho|_*`.
pub fn kappa(rho1: f64, rho2: f64, rho_sup: f64) -> f64 {
    rho1 * rho1 + rho2 * rho2 * rho_sup
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseScalars {
    pub sigma_q: f64,
    pub kappa_q: f64,
    pub varsigma_star: f64,
}

impl NoiseScalars {
    pub fn new(rho1: f64, rho2: f64, solution: &RenewalSolution, varsigma_star: f64) -> Self {
        Self {
            sigma_q: proxy_variance(rho1, rho2, solution.tau_bar),
            kappa_q: kappa(rho1, rho2, solution.rho_sup),
            varsigma_star,
        }
    }

    /// `sigma_Q <= varsigma_star`.
    pub fn within_envelope(&self) -> bool {
        self.sigma_q <= self.varsigma_star
    }
}
