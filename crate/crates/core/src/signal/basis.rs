//! Trigonometric basis on `[0, 1]` and its step-function counterpart on the
//! observation grid.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};

/// Relative tolerance used to snap a time onto the grid point it is meant to
/// hit (e.g. `0.3 * 10.0 = 3.0000000000000004`).
const GRID_SNAP: f64 = 1e-9;

/// Frequency `[j/2]` carried by the basis function `phi_j`.
#[inline]
pub fn frequency(j: usize) -> usize {
    j / 2
}

/// Evaluates `phi_j(x)`: `1` for `j = 1`, `sqrt(2) cos(2 pi [j/2] x)` for even
/// `j` and `sqrt(2) sin(2 pi [j/2] x)` for odd `j >= 3`.
///
/// Panics if `j == 0`.
pub fn trig_basis(j: usize, x: f64) -> f64 {
    assert!(j >= 1, "basis indices start at 1");
    if j == 1 {
        return 1.0;
    }
    let arg = 2.0 * PI * frequency(j) as f64 * x;
    if j % 2 == 0 {
        SQRT_2 * arg.cos()
    } else {
        SQRT_2 * arg.sin()
    }
}

/// `phi_j(i / p)` with the argument reduced modulo the period before the
/// multiplication, so large `i` keeps full precision.
pub fn trig_basis_on_grid(j: usize, i: usize, p: usize) -> f64 {
    assert!(j >= 1, "basis indices start at 1");
    if j == 1 {
        return 1.0;
    }
    let phase = (frequency(j) * (i % p)) % p;
    let arg = 2.0 * PI * phase as f64 / p as f64;
    if j % 2 == 0 {
        SQRT_2 * arg.cos()
    } else {
        SQRT_2 * arg.sin()
    }
}

/// Index `l >= 1` of the grid cell `(t_{l-1}, t_l]`, `t_l = l/p`, that
/// contains `t > 0`.
pub fn grid_cell(t: f64, p: usize) -> Result<usize> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidTime(t));
    }
    let x = t * p as f64;
    let nearest = x.round();
    let l = if (x - nearest).abs() <= GRID_SNAP * nearest.max(1.0) {
        nearest
    } else {
        x.ceil()
    };
    Ok((l as usize).max(1))
}

/// Evaluates the step function `Psi_{j,p}(t) = phi_j(t_l)` on the cell
/// `(t_{l-1}, t_l]` containing `t`.
pub fn psi_basis(j: usize, p: usize, t: f64) -> Result<f64> {
    if j == 0 || j >= p {
        return Err(Error::IndexOutOfRange {
            index: j,
            max: p.saturating_sub(1),
        });
    }
    let l = grid_cell(t, p)?;
    Ok(trig_basis_on_grid(j, l, p))
}
