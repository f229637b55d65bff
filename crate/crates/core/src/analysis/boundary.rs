//! Correctability phase boundary in the `(p_loss, p_comp)` plane.
//!
//! The small-loss estimate matches the stabiliser error rate of a lossy
//! lattice, where a plaquette either keeps its four qubits or (after one
//! loss) becomes a six-qubit superplaquette, to that of a lossless lattice at
//! its threshold.

use serde::Serialize;

use crate::degrade::edge_flip_probability;
use crate::error::{check_probability, Error, Result};

use super::fit::polynomial_fit;

/// Lossless threshold used by the small-loss estimate.
pub const P_C0: f64 = 0.103;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearizedBoundary {
    /// Root of the implicit stabiliser-rate equation.
    pub p_thr: f64,
    /// Closed-form slope at `p_loss = 0`.
    pub alpha: f64,
    /// `P_C0 + alpha * p_loss`.
    pub linear: f64,
}

/// Stabiliser error rate with four-qubit plaquettes that become six-qubit
/// superplaquettes after a loss.
pub fn stabilizer_error_rate(p_loss: f64, p_comp: f64) -> f64 {
    let intact = (1.0 - p_loss).powi(4);
    let f4 = edge_flip_probability(4, p_comp).unwrap();
    let f6 = edge_flip_probability(6, p_comp).unwrap();
    intact * f4 + (1.0 - intact) * f6
}

/// `-2 p (1 - p) (1 - 2 p)` at `p = P_C0`.
pub fn linear_slope() -> f64 {
    -2.0 * P_C0 * (1.0 - P_C0) * (1.0 - 2.0 * P_C0)
}

pub fn linearized_boundary(p_loss: f64) -> Result<LinearizedBoundary> {
    check_probability("p_loss", p_loss)?;
    let target = edge_flip_probability(4, P_C0)?;
    let g = |p: f64| stabilizer_error_rate(p_loss, p) - target;
    let (mut lo, mut hi) = (0.0, 0.5);
    if g(lo) > 0.0 || g(hi) < 0.0 {
        return Err(Error::NoRoot("stabiliser rate never reaches the lossless threshold rate".into()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let alpha = linear_slope();
    Ok(LinearizedBoundary {
        p_thr: 0.5 * (lo + hi),
        alpha,
        linear: P_C0 + alpha * p_loss,
    })
}

/// Quadratic `c₀ + c₁ p_loss + c₂ p_loss²` through threshold estimates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseBoundaryFit {
    pub coefficients: [f64; 3],
    pub errors: [f64; 3],
    /// Smallest positive `p_loss` where the quadratic reaches `p_comp = 0`.
    pub zero_crossing: Option<f64>,
}

impl PhaseBoundaryFit {
    /// Slope at `p_loss = 0`.
    pub fn slope(&self) -> f64 {
        self.coefficients[1]
    }

    pub fn slope_err(&self) -> f64 {
        self.errors[1]
    }

    pub fn eval(&self, p_loss: f64) -> f64 {
        let [c0, c1, c2] = self.coefficients;
        c0 + p_loss * (c1 + p_loss * c2)
    }
}

/// Weighted quadratic fit to `(p_loss, p_thr, σ)` triples.
pub fn fit_phase_boundary(points: &[(f64, f64, f64)]) -> Result<PhaseBoundaryFit> {
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let sig: Vec<f64> = points
        .iter()
        .map(|p| if p.2 > 0.0 && p.2.is_finite() { p.2 } else { 1.0 })
        .collect();
    let (c, e) = polynomial_fit(&xs, &ys, &sig, 2)?;
    let coefficients = [c[0], c[1], c[2]];
    let [c0, c1, c2] = coefficients;
    let zero_crossing = if c2.abs() < 1e-300 {
        (c1 != 0.0).then(|| -c0 / c1).filter(|&x| x > 0.0)
    } else {
        let disc = c1 * c1 - 4.0 * c2 * c0;
        if disc < 0.0 {
            None
        } else {
            let s = disc.sqrt();
            [(-c1 - s) / (2.0 * c2), (-c1 + s) / (2.0 * c2)]
                .into_iter()
                .filter(|&x| x > 0.0)
                .min_by(f64::total_cmp)
        }
    };
    Ok(PhaseBoundaryFit {
        coefficients,
        errors: [e[0], e[1], e[2]],
        zero_crossing,
    })
}
