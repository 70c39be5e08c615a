use std::f64::consts::SQRT_2;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// FFT-backed discrete transform against the trigonometric basis on the
/// grid `t_i = i/p`, `i = 1..=p`.
///
/// `project` maps grid values `v_i` to `(1/p) sum_i v_i phi_j(t_i)` for
/// `j = 1..=p`; `synthesize` maps coefficients `c_j` back to
/// `sum_j c_j phi_j(t_i)`. Cloning shares the FFT plans.
#[derive(Clone)]
pub struct TrigTransform {
    p: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for TrigTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TrigTransform").field("p", &self.p).finish()
    }
}

impl TrigTransform {
    pub fn new(p: usize) -> Self {
        assert!(p >= 1, "grid needs at least one point");
        let mut planner = FftPlanner::new();
        Self {
            p,
            forward: planner.plan_fft_forward(p),
            inverse: planner.plan_fft_inverse(p),
        }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// `values[i - 1]` is the value at `t_i = i/p`.
    pub fn project(&self, values: &[f64]) -> Vec<f64> {
        let p = self.p;
        assert_eq!(values.len(), p, "expected one value per grid point");
        let mut buf = vec![Complex64::new(0.0, 0.0); p];
        for (i, &v) in values.iter().enumerate() {
            // t_{i+1}; t_p coincides with t_0 modulo the period
            buf[(i + 1) % p] = Complex64::new(v, 0.0);
        }
        self.forward.process(&mut buf);

        let scale = 1.0 / p as f64;
        (1..=p)
            .map(|j| {
                let k = j / 2;
                if j == 1 {
                    buf[0].re * scale
                } else if j % 2 == 0 {
                    SQRT_2 * buf[k % p].re * scale
                } else {
                    -SQRT_2 * buf[k % p].im * scale
                }
            })
            .collect()
    }

    /// Grid values `sum_j coeffs[j - 1] phi_j(t_i)` for `i = 1..=p`.
    /// `coeffs` may be shorter than `p`; missing entries are zero.
    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        let p = self.p;
        assert!(coeffs.len() <= p, "at most p coefficients on a p-point grid");
        let mut buf = vec![Complex64::new(0.0, 0.0); p];
        for (idx, &c) in coeffs.iter().enumerate() {
            let j = idx + 1;
            let k = (j / 2) % p;
            if j == 1 {
                buf[0].re += c;
            } else if j % 2 == 0 {
                buf[k].re += SQRT_2 * c;
            } else {
                buf[k].im -= SQRT_2 * c;
            }
        }
        self.inverse.process(&mut buf);
        (1..=p).map(|i| buf[i % p].re).collect()
    }
}
