//! Classical fixed-step fourth-order Runge–Kutta for measure-valued ODEs.
//!
//! This is the numerical reference the closed forms are checked against, so
//! it only ever evaluates the vector field; states are never clipped or
//! renormalized.

use super::trajectory::{Method, Trajectory};
use super::{require_time, vector_field, RateMap};
use crate::error::{Error, Result};
use crate::measure::{require_positive, Measure};
use crate::recombinator::POSITIVITY_TOL;

fn rk4_step<F>(x: &Measure, h: f64, field: &F) -> Measure
where
    F: Fn(&Measure) -> Measure,
{
    let k1 = field(x);
    let k2 = field(&x.lincomb(1.0, &k1, 0.5 * h));
    let k3 = field(&x.lincomb(1.0, &k2, 0.5 * h));
    let k4 = field(&x.lincomb(1.0, &k3, h));
    let mut next = x.clone();
    next.axpy(h / 6.0, &k1);
    next.axpy(h / 3.0, &k2);
    next.axpy(h / 3.0, &k3);
    next.axpy(h / 6.0, &k4);
    next
}

/// Integrates `x' = field(x)` and records the state at every time of `grid`
/// (which must start at 0 and increase strictly). Between grid points the
/// step is `h`, with the last step of each interval shortened to land on the
/// next grid point.
pub fn integrate_rk4<F>(x0: &Measure, field: F, grid: &[f64], h: f64) -> Result<Trajectory>
where
    F: Fn(&Measure) -> Measure,
{
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::domain(format!("step {h} must be positive")));
    }
    if grid.first() != Some(&0.0) {
        return Err(Error::domain("output grid must start at t = 0"));
    }
    let mut states = Vec::with_capacity(grid.len());
    states.push(x0.clone());
    let mut x = x0.clone();
    for w in grid.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        require_time(t1)?;
        if t1 <= t0 {
            return Err(Error::domain("output grid must increase strictly"));
        }
        let span = t1 - t0;
        // tolerate grids that are integer multiples of h up to rounding
        let full = (span / h + 1e-9).floor() as usize;
        let mut t = t0;
        for j in 1..=full {
            let target = (t0 + j as f64 * h).min(t1);
            x = rk4_step(&x, target - t, &field);
            t = target;
        }
        if t1 - t > 1e-12 * h {
            x = rk4_step(&x, t1 - t, &field);
        }
        states.push(x.clone());
    }
    Trajectory::new(grid.to_vec(), states, Method::Rk4)
}

/// Times `0, h, 2h, .., t_end`, the last spacing possibly shorter than `h`.
pub(crate) fn step_grid(t_end: f64, h: f64) -> Vec<f64> {
    let full = (t_end / h + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=full).map(|j| (j as f64 * h).min(t_end)).collect();
    if t_end - grid[full] > 1e-12 * h {
        grid.push(t_end);
    }
    grid.dedup();
    grid
}

/// Integrates the recombination equation for `rates` from the positive
/// measure `omega0`, storing every step.
pub fn rk4_integrate(omega0: &Measure, rates: &RateMap, t_end: f64, h: f64) -> Result<Trajectory> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::domain(format!("step {h} must be positive")));
    }
    require_time(t_end)?;
    require_positive(omega0, POSITIVITY_TOL)?;
    integrate_rk4(omega0, |x| vector_field(x, rates), &step_grid(t_end, h), h)
}

/// As [`rk4_integrate`] but storing states only at the times of `grid`.
pub fn rk4_on_grid(omega0: &Measure, rates: &RateMap, grid: &[f64], h: f64) -> Result<Trajectory> {
    require_positive(omega0, POSITIVITY_TOL)?;
    integrate_rk4(omega0, |x| vector_field(x, rates), grid, h)
}
