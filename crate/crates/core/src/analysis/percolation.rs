//! Size of the largest superplaquette under loss and its scaling form.
//!
//! Scaling variables use `s_p = |p - 1/2|^{-νD}` with `ν = 4/3`, `D = 91/48`
//! and `d = 2`: `μ_L / s_p = Φ(L² / s_p^{d/D})` with
//! `Φ(x) = χ ln(ξ x^{D/d} + 1)`.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::Serialize;

use crate::degrade::{apply_losses, form_superplaquettes, LossPattern};
use crate::error::{check_probability, Error, Result};
use crate::lattice::ToricLattice;

use super::fit::nelder_mead;
use super::{trial_rng, LOSS_STREAM};

pub const NU: f64 = 4.0 / 3.0;
pub const FRACTAL_DIMENSION: f64 = 91.0 / 48.0;
pub const DIMENSION: f64 = 2.0;

/// Plaquettes in the largest superplaquette after absorbing islands: every
/// component of the remaining plaquettes except the largest is enclosed by it.
pub fn largest_superplaquette(lattice: &ToricLattice, loss: &LossPattern) -> usize {
    let partition = form_superplaquettes(lattice, loss);
    let n = lattice.num_plaquettes();
    let mut sizes = vec![0usize; n];
    for p in 0..n {
        sizes[partition.superplaquette(p)] += 1;
    }
    // Ties go to the smallest label.
    let (label, &size) = sizes
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .unwrap();
    if size == n {
        return n;
    }
    let mut seen: Vec<bool> = (0..n).map(|p| partition.superplaquette(p) == label).collect();
    let mut components = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut count = 0;
        while let Some(p) = queue.pop_front() {
            count += 1;
            for (q, _) in lattice.plaquette_neighbors(p) {
                if !seen[q] {
                    seen[q] = true;
                    queue.push_back(q);
                }
            }
        }
        components.push(count);
    }
    let remainder: usize = components.iter().sum();
    let outside = components.iter().copied().max().unwrap_or(0);
    size + remainder - outside
}

/// Mean of [`largest_superplaquette`] over trials `0..n_trials`.
pub fn mean_largest_superplaquette(size: usize, p_loss: f64, n_trials: u64, master: u64) -> Result<f64> {
    check_probability("p_loss", p_loss)?;
    let lattice = ToricLattice::new(size)?;
    let total: usize = (0..n_trials)
        .into_par_iter()
        .map(|i| {
            let loss = apply_losses(&lattice, p_loss, &mut trial_rng(master, i, LOSS_STREAM))
                .expect("p_loss checked");
            largest_superplaquette(&lattice, &loss)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    Ok(total as f64 / n_trials as f64)
}

#[inline]
pub fn s_p(p_loss: f64) -> f64 {
    (p_loss - 0.5).abs().powf(-NU * FRACTAL_DIMENSION)
}

/// `(x, y) = (L² / s_p^{d/D}, μ_L / s_p)`.
pub fn scaled_point(size: usize, p_loss: f64, mu: f64) -> (f64, f64) {
    let s = s_p(p_loss);
    let l2 = (size * size) as f64;
    (l2 / s.powf(DIMENSION / FRACTAL_DIMENSION), mu / s)
}

#[inline]
pub fn phi(x: f64, chi: f64, xi: f64) -> f64 {
    chi * (xi * x.powf(FRACTAL_DIMENSION / DIMENSION)).ln_1p()
}

/// Inverse of the scaling form: `μ_L` predicted at `(L, p_loss)`.
pub fn predicted_mu(size: usize, p_loss: f64, chi: f64, xi: f64) -> f64 {
    let (x, _) = scaled_point(size, p_loss, 0.0);
    s_p(p_loss) * phi(x, chi, xi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PercolationSample {
    pub size: usize,
    pub p_loss: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PercolationFit {
    pub chi: f64,
    pub xi: f64,
    /// Sum of squared log residuals.
    pub resid: f64,
    /// `ln y - ln Φ(x)` per sample, in input order.
    pub residuals: Vec<f64>,
}

/// Fit `(χ, ξ)` by least squares on `ln y` against `ln Φ(x)`, so points
/// spanning decades of `x` count equally.
pub fn percolation_fit(samples: &[PercolationSample]) -> Result<PercolationFit> {
    let usable: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.p_loss < 0.5 && s.mu > 0.0)
        .map(|s| scaled_point(s.size, s.p_loss, s.mu))
        .collect();
    let mut sizes: Vec<usize> = samples.iter().map(|s| s.size).collect();
    sizes.sort_unstable();
    sizes.dedup();
    if usable.len() < 3 || sizes.len() < 2 {
        return Err(Error::Fit("need samples below 1/2 on at least two sizes".into()));
    }
    let objective = |q: &[f64]| -> f64 {
        let (chi, xi) = (q[0].exp(), q[1].exp());
        usable
            .iter()
            .map(|&(x, y)| (y.ln() - phi(x, chi, xi).ln()).powi(2))
            .sum()
    };
    let mut best: Option<super::fit::Minimum> = None;
    for (c0, x0) in [(0.1f64, 5.0f64), (0.3, 1.0), (0.03, 30.0), (1.0, 0.3), (0.01, 100.0)] {
        let m = nelder_mead(objective, &[c0.ln(), x0.ln()], &[0.5, 0.5], 1e-14, 20_000);
        if best.as_ref().is_none_or(|b| m.value < b.value) {
            best = Some(m);
        }
    }
    let best = best.unwrap();
    let (chi, xi) = (best.x[0].exp(), best.x[1].exp());
    let residuals = samples
        .iter()
        .map(|s| {
            let (x, y) = scaled_point(s.size, s.p_loss, s.mu);
            y.ln() - phi(x, chi, xi).ln()
        })
        .collect();
    Ok(PercolationFit {
        chi,
        xi,
        resid: best.value,
        residuals,
    })
}

/// Collapse diagnostic: spread of the per-size mean residuals divided by the
/// mean within-size standard deviation of residuals.
pub fn collapse_ratio(samples: &[PercolationSample], fit: &PercolationFit) -> f64 {
    let mut sizes: Vec<usize> = samples.iter().map(|s| s.size).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let mut means = Vec::new();
    let mut spreads = Vec::new();
    for &l in &sizes {
        let r: Vec<f64> = samples
            .iter()
            .zip(&fit.residuals)
            .filter(|(s, _)| s.size == l && s.p_loss < 0.5)
            .map(|(_, &r)| r)
            .collect();
        if r.len() < 2 {
            continue;
        }
        let m = r.iter().sum::<f64>() / r.len() as f64;
        let sd = (r.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (r.len() - 1) as f64).sqrt();
        means.push(m);
        spreads.push(sd);
    }
    if means.len() < 2 {
        return f64::NAN;
    }
    let hi = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = means.iter().copied().fold(f64::INFINITY, f64::min);
    (hi - lo) / (spreads.iter().sum::<f64>() / spreads.len() as f64)
}

/// Pool-adjacent-violators: the non-decreasing sequence closest to `ys` in
/// least squares.
pub fn isotonic_increasing(ys: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::new();
    for &y in ys {
        blocks.push((y, 1));
        while blocks.len() > 1 {
            let (b, nb) = blocks[blocks.len() - 1];
            let (a, na) = blocks[blocks.len() - 2];
            if a <= b {
                break;
            }
            blocks.pop();
            let n = na + nb;
            *blocks.last_mut().unwrap() = ((a * na as f64 + b * nb as f64) / n as f64, n);
        }
    }
    blocks
        .into_iter()
        .flat_map(|(v, n)| std::iter::repeat(v).take(n))
        .collect()
}

/// Loss rate at which the isotonic-smoothed `μ_L` curve reaches `L²/2`, by
/// bisection on its linear interpolant over `(0, 1/2]`.
pub fn solve_p_scale(size: usize, curve: &[(f64, f64)]) -> Result<f64> {
    let mut pts: Vec<(f64, f64)> = curve.iter().copied().filter(|&(p, _)| p > 0.0 && p <= 0.5).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if pts.len() < 2 {
        return Err(Error::NoRoot("need at least two loss rates in (0, 1/2]".into()));
    }
    let smooth = isotonic_increasing(&pts.iter().map(|p| p.1).collect::<Vec<_>>());
    let half = (size * size) as f64 / 2.0;
    let interp = |p: f64| -> f64 {
        let k = pts.partition_point(|q| q.0 <= p).clamp(1, pts.len() - 1);
        let (p0, p1) = (pts[k - 1].0, pts[k].0);
        let (y0, y1) = (smooth[k - 1], smooth[k]);
        y0 + (y1 - y0) * (p - p0) / (p1 - p0)
    };
    let (mut lo, mut hi) = (pts[0].0, pts[pts.len() - 1].0);
    if interp(lo) > half || interp(hi) < half {
        return Err(Error::NoRoot(format!(
            "largest superplaquette does not cross L²/2 = {half} in the sampled range"
        )));
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if interp(mid) < half {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
