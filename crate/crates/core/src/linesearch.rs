//! Projected continuous search and discrete search.
//!
//! Both procedures take the merit function as a closure returning
//! `Result<f64>`; budget exhaustion inside the closure aborts the search and
//! propagates to the caller.

use serde::{Deserialize, Serialize};

use crate::directions::{ContinuousDirection, PrimitiveDirection};
use crate::error::{Error, Result};
use crate::model::Bounds;

/// Safety cap on expansion steps of the continuous search.
pub const MAX_EXPANSIONS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSearchParams {
    /// Sufficient-decrease coefficient, `> 0`.
    pub gamma: f64,
    /// Expansion divisor, in `(0, 1)`.
    pub delta: f64,
}

impl Default for LineSearchParams {
    fn default() -> Self {
        Self {
            gamma: 1e-6,
            delta: 0.5,
        }
    }
}

impl LineSearchParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) || !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!(
                "need gamma > 0 and 0 < delta < 1, got gamma = {}, delta = {}",
                self.gamma, self.delta
            )));
        }
        Ok(())
    }
}

/// Outcome of a continuous search. `alpha == 0` means failure.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousSearchResult {
    pub alpha: f64,
    /// `p` or `-p`, whichever side gave the decrease (`p` on failure).
    pub direction: ContinuousDirection,
    /// Accepted trial point and its merit value, present iff `alpha > 0`.
    pub accepted: Option<(Vec<f64>, f64)>,
}

/// Outcome of a discrete search. `alpha == 0` means failure.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSearchResult {
    pub alpha: u64,
    pub accepted: Option<(Vec<f64>, f64)>,
}

fn trial(w: &[f64], p: &[f64], t: f64, bounds: &Bounds) -> Vec<f64> {
    let mut y: Vec<f64> = w
        .iter()
        .zip(p)
        .map(|(&wi, &pi)| if pi == 0.0 { wi } else { wi + t * pi })
        .collect();
    bounds.project_in_place(&mut y);
    y
}

fn same_point(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

/// Shared body of the two continuous searches. `cap(sign)` bounds the step
/// along `sign * p`; `None` means unbounded (the projection handles the box).
#[allow(clippy::too_many_arguments)]
fn continuous_search<F, C>(
    alpha0: f64,
    w: &[f64],
    fw: f64,
    p: &ContinuousDirection,
    bounds: &Bounds,
    params: &LineSearchParams,
    cap: C,
    merit: &mut F,
) -> Result<ContinuousSearchResult>
where
    F: FnMut(&[f64]) -> Result<f64>,
    C: Fn(f64) -> Option<f64>,
{
    assert!(alpha0 > 0.0, "initial continuous step must be positive");
    let gamma = params.gamma;

    // probe: merit at the trial point, or None when it coincides with w
    let mut probe = |dir: &ContinuousDirection, t: f64| -> Result<Option<(Vec<f64>, f64)>> {
        let y = trial(w, dir.as_slice(), t, bounds);
        if same_point(&y, w) {
            return Ok(None);
        }
        let fy = merit(&y)?;
        Ok(Some((y, fy)))
    };

    let mut accepted = None;
    for sign in [1.0, -1.0] {
        let max = cap(sign);
        let alpha = max.map_or(alpha0, |m| alpha0.min(m));
        if !(alpha > 0.0) {
            continue;
        }
        let dir = if sign > 0.0 { p.clone() } else { p.negated() };
        if let Some((y, fy)) = probe(&dir, alpha)? {
            if fy <= fw - gamma * alpha * alpha {
                accepted = Some((dir, alpha, max, y, fy));
                break;
            }
        }
    }
    let Some((dir, mut alpha, max, mut y, mut fy)) = accepted else {
        return Ok(ContinuousSearchResult {
            alpha: 0.0,
            direction: p.clone(),
            accepted: None,
        });
    };

    for _ in 0..MAX_EXPANSIONS {
        let mut beta = alpha / params.delta;
        if let Some(m) = max {
            beta = beta.min(m);
        }
        if !(beta > alpha) || !beta.is_finite() {
            return Ok(ContinuousSearchResult {
                alpha,
                direction: dir,
                accepted: Some((y, fy)),
            });
        }
        match probe(&dir, beta)? {
            Some((yb, fb)) if fb <= fw - gamma * beta * beta => {
                alpha = beta;
                y = yb;
                fy = fb;
            }
            _ => {
                return Ok(ContinuousSearchResult {
                    alpha,
                    direction: dir,
                    accepted: Some((y, fy)),
                })
            }
        }
    }
    Err(Error::NonTerminatingExpansion(MAX_EXPANSIONS))
}

/// Bidirectional search along `p` with box projection and expansion by
/// `1/delta`.
///
/// On success the returned `alpha` satisfies
/// `f([w + alpha p̃]) <= f(w) - gamma alpha^2` while the next expansion
/// `alpha/delta` does not. Trial points whose projection equals `w` count as
/// failures and are not evaluated.
pub fn projected_continuous_search<F>(
    alpha0: f64,
    w: &[f64],
    fw: f64,
    p: &ContinuousDirection,
    bounds: &Bounds,
    params: &LineSearchParams,
    merit: &mut F,
) -> Result<ContinuousSearchResult>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    continuous_search(alpha0, w, fw, p, bounds, params, |_| None, merit)
}

/// Bidirectional search along `±e_i` whose steps never leave the box: each
/// trial step is capped at the distance to the bound, and the expansion stops
/// once the cap is reached.
pub fn coordinate_search<F>(
    alpha0: f64,
    w: &[f64],
    fw: f64,
    index: usize,
    bounds: &Bounds,
    params: &LineSearchParams,
    merit: &mut F,
) -> Result<ContinuousSearchResult>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let p = ContinuousDirection::coordinate(w.len(), index, 1.0);
    let (l, u, wi) = (bounds.lower()[index], bounds.upper()[index], w[index]);
    let cap = |sign: f64| Some(if sign > 0.0 { u - wi } else { wi - l });
    continuous_search(alpha0, w, fw, &p, bounds, params, cap, merit)
}

/// Largest `t >= 0` with `w + t p` inside the box, computed in integer
/// arithmetic over the support of `p`.
pub fn max_feasible_step(w: &[f64], p: &PrimitiveDirection, bounds: &Bounds) -> u64 {
    let mut best = u64::MAX;
    for (i, &pi) in p.as_slice().iter().enumerate() {
        if pi == 0 {
            continue;
        }
        let slack = if pi > 0 {
            bounds.upper()[i] - w[i]
        } else {
            w[i] - bounds.lower()[i]
        };
        let slack = slack.max(0.0) as u64;
        best = best.min(slack / pi.unsigned_abs());
    }
    if best == u64::MAX {
        0
    } else {
        best
    }
}

fn lattice_trial(w: &[f64], p: &PrimitiveDirection, t: u64) -> Vec<f64> {
    w.iter()
        .zip(p.as_slice())
        .map(|(&wi, &pi)| {
            if pi == 0 {
                wi
            } else {
                wi + (t as f64) * (pi as f64)
            }
        })
        .collect()
}

/// Integer-step search along `p` with sufficient decrease `xi` and step
/// doubling capped at the largest feasible step.
///
/// The expansion stops as soon as the step saturates at the cap, so the
/// procedure always terminates.
pub fn discrete_search<F>(
    alpha0: u64,
    w: &[f64],
    fw: f64,
    p: &PrimitiveDirection,
    xi: f64,
    bounds: &Bounds,
    merit: &mut F,
) -> Result<DiscreteSearchResult>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    assert!(alpha0 >= 1, "initial discrete step must be at least 1");
    let failure = DiscreteSearchResult {
        alpha: 0,
        accepted: None,
    };
    let max_step = max_feasible_step(w, p, bounds);
    let mut alpha = max_step.min(alpha0);
    if alpha == 0 {
        return Ok(failure);
    }
    let y = lattice_trial(w, p, alpha);
    let fy = merit(&y)?;
    if !(fy <= fw - xi) {
        return Ok(failure);
    }
    let mut best = (y, fy);
    loop {
        let beta = max_step.min(alpha.saturating_mul(2));
        if beta == alpha {
            break;
        }
        let yb = lattice_trial(w, p, beta);
        let fb = merit(&yb)?;
        if !(fb <= fw - xi) {
            break;
        }
        alpha = beta;
        best = (yb, fb);
    }
    Ok(DiscreteSearchResult {
        alpha,
        accepted: Some(best),
    })
}
