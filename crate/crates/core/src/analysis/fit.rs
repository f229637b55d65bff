//! Finite-size scaling collapse, crossing points and a small Nelder-Mead.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::error::{Error, Result};

/// Result of [`nelder_mead`].
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

/// Downhill simplex minimisation from `x0` with initial edge lengths `step`.
/// Stops when both the spread of function values and the simplex diameter
/// fall below `tol`, or after `max_iter` iterations.
pub fn nelder_mead<F>(f: F, x0: &[f64], step: &[f64], tol: f64, max_iter: usize) -> Minimum
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), eval(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step[i];
        let v = eval(&x);
        simplex.push((x, v));
    }
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        let diameter = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if (worst - best).abs() <= tol * (1.0 + best.abs()) && diameter <= tol {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let xr = along(-1.0);
        let fr = eval(&xr);
        if fr < best {
            let xe = along(-2.0);
            let fe = eval(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst {
                let xc = along(-0.5);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = along(0.5);
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < worst.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let x_best = simplex[0].0.clone();
                for (x, v) in simplex.iter_mut().skip(1) {
                    for (xi, bi) in x.iter_mut().zip(&x_best) {
                        *xi = bi + 0.5 * (*xi - bi);
                    }
                    *v = eval(x);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    Minimum {
        x,
        value,
        iterations,
    }
}

/// One `p_fail` estimate entering a collapse fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub size: usize,
    pub p: f64,
    pub p_fail: f64,
    pub n_trials: u64,
}

impl ScalingPoint {
    /// Binomial standard deviation with the add-one (Laplace) estimate of the
    /// rate, so that points with zero failures still get a finite weight.
    pub fn sigma(&self) -> f64 {
        let n = self.n_trials as f64;
        let k = self.p_fail * n;
        let p = (k + 1.0) / (n + 2.0);
        (p * (1.0 - p) / n).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Weighting {
    /// Each point weighted by `1 / σ²`.
    InverseVariance,
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdFit {
    pub p_thr: f64,
    pub nu0: f64,
    pub a: f64,
    pub b: f64,
    /// Standard errors of `(p_thr, nu0, a, b)`.
    pub p_thr_err: f64,
    pub nu0_err: f64,
    pub a_err: f64,
    pub b_err: f64,
    /// Weighted sum of squared residuals.
    pub resid: f64,
    /// Per-point residual `p_fail - model`, in input order.
    pub residuals: Vec<f64>,
    pub weighting: Weighting,
}

impl ThresholdFit {
    pub fn model(&self, size: usize, p: f64) -> f64 {
        self.a + self.b * scaling_variable(size, p, self.p_thr, self.nu0)
    }
}

#[inline]
pub fn scaling_variable(size: usize, p: f64, p_thr: f64, nu0: f64) -> f64 {
    (p - p_thr) * (size as f64).powf(1.0 / nu0)
}

/// Weighted linear least squares for `a`, `b` at fixed `(p_thr, ν₀)`;
/// returns `(a, b, weighted SSR)`.
fn project(points: &[ScalingPoint], w: &[f64], p_thr: f64, nu0: f64) -> (f64, f64, f64) {
    let (mut s, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (pt, &wi) in points.iter().zip(w) {
        let x = scaling_variable(pt.size, pt.p, p_thr, nu0);
        s += wi;
        sx += wi * x;
        sy += wi * pt.p_fail;
        sxx += wi * x * x;
        sxy += wi * x * pt.p_fail;
    }
    let det = s * sxx - sx * sx;
    if det.abs() < 1e-300 {
        return (sy / s, 0.0, f64::INFINITY);
    }
    let b = (s * sxy - sx * sy) / det;
    let a = (sy - b * sx) / s;
    let ssr = points
        .iter()
        .zip(w)
        .map(|(pt, wi)| {
            let r = pt.p_fail - a - b * scaling_variable(pt.size, pt.p, p_thr, nu0);
            wi * r * r
        })
        .sum();
    (a, b, ssr)
}

/// `p` at which the curves of different sizes are closest, over the `p`
/// values sampled for every size.
fn closest_approach(points: &[ScalingPoint], sizes: &[usize]) -> Option<f64> {
    let mut ps: Vec<f64> = points.iter().map(|p| p.p).collect();
    ps.sort_by(f64::total_cmp);
    ps.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    ps.into_iter()
        .filter_map(|p| {
            let ys: Vec<f64> = sizes
                .iter()
                .filter_map(|&l| {
                    points
                        .iter()
                        .find(|q| q.size == l && (q.p - p).abs() < 1e-12)
                        .map(|q| q.p_fail)
                })
                .collect();
            (ys.len() == sizes.len()).then(|| {
                let lo = ys.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                (p, hi - lo)
            })
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(p, _)| p)
}

/// Least-squares fit of `p_fail = a + b (p - p_thr) L^{1/ν₀}`.
///
/// `(p_thr, ν₀)` are found by Nelder-Mead from five starting points around
/// the closest approach of the curves; `a` and `b` are solved exactly at each
/// step. Standard errors come from the Jacobian at the optimum, scaled by the
/// residual variance.
pub fn fit_scaling(points: &[ScalingPoint], weighting: Weighting) -> Result<ThresholdFit> {
    let mut sizes: Vec<usize> = points.iter().map(|p| p.size).collect();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 2 {
        return Err(Error::Fit("need at least two lattice sizes".into()));
    }
    if points.len() < 5 {
        return Err(Error::Fit("need at least five points".into()));
    }
    let w: Vec<f64> = points
        .iter()
        .map(|p| match weighting {
            Weighting::InverseVariance => 1.0 / p.sigma().powi(2),
            Weighting::Uniform => 1.0,
        })
        .collect();
    let p_min = points.iter().map(|p| p.p).fold(f64::INFINITY, f64::min);
    let p_max = points.iter().map(|p| p.p).fold(f64::NEG_INFINITY, f64::max);
    let p_start = closest_approach(points, &sizes).unwrap_or(0.5 * (p_min + p_max));
    let span = (p_max - p_min).max(1e-3);
    let objective = |x: &[f64]| {
        if x[1] <= 0.05 || x[1] > 20.0 {
            return f64::INFINITY;
        }
        project(points, &w, x[0], x[1]).2
    };
    let jitter = [(0.0, 0.0), (0.25, 0.2), (-0.25, -0.2), (0.25, -0.2), (-0.25, 0.2)];
    let mut best: Option<Minimum> = None;
    for (dp, dnu) in jitter {
        let x0 = [p_start + dp * span, 1.5 + dnu];
        let m = nelder_mead(objective, &x0, &[0.1 * span, 0.1], 1e-13, 20_000);
        if best.as_ref().is_none_or(|b| m.value < b.value) {
            best = Some(m);
        }
    }
    let best = best.unwrap();
    let (p_thr, nu0) = (best.x[0], best.x[1]);
    if !best.value.is_finite() {
        return Err(Error::Fit("collapse objective did not converge".into()));
    }
    let (a, b, ssr) = project(points, &w, p_thr, nu0);
    let residuals: Vec<f64> = points
        .iter()
        .map(|pt| pt.p_fail - a - b * scaling_variable(pt.size, pt.p, p_thr, nu0))
        .collect();

    // Covariance from the weighted Jacobian of the four-parameter model.
    let params = [p_thr, nu0, a, b];
    let model = |q: &[f64], pt: &ScalingPoint| q[2] + q[3] * scaling_variable(pt.size, pt.p, q[0], q[1]);
    let mut jac = DMatrix::<f64>::zeros(points.len(), 4);
    for k in 0..4 {
        let h = 1e-6 * params[k].abs().max(1e-3);
        let mut up = params;
        let mut down = params;
        up[k] += h;
        down[k] -= h;
        for (i, pt) in points.iter().enumerate() {
            jac[(i, k)] = w[i].sqrt() * (model(&up, pt) - model(&down, pt)) / (2.0 * h);
        }
    }
    let dof = points.len().saturating_sub(4).max(1) as f64;
    let errors = (jac.transpose() * &jac)
        .try_inverse()
        .map(|cov| {
            let s2 = ssr / dof;
            [0, 1, 2, 3].map(|k| (cov[(k, k)] * s2).max(0.0).sqrt())
        })
        .unwrap_or([f64::NAN; 4]);

    Ok(ThresholdFit {
        p_thr,
        nu0,
        a,
        b,
        p_thr_err: errors[0],
        nu0_err: errors[1],
        a_err: errors[2],
        b_err: errors[3],
        resid: ssr,
        residuals,
        weighting,
    })
}

/// Where two sampled curves cross, by linear interpolation of their
/// difference on the shared `p` values. The first sign change wins.
pub fn crossing_point(curve_a: &[(f64, f64)], curve_b: &[(f64, f64)]) -> Result<f64> {
    let mut diff: Vec<(f64, f64)> = curve_a
        .iter()
        .filter_map(|&(p, ya)| {
            curve_b
                .iter()
                .find(|&&(q, _)| (p - q).abs() < 1e-12)
                .map(|&(_, yb)| (p, ya - yb))
        })
        .collect();
    diff.sort_by(|a, b| a.0.total_cmp(&b.0));
    for k in 0..diff.len().saturating_sub(1) {
        let (p0, d0) = diff[k];
        let (p1, d1) = diff[k + 1];
        if d0 == 0.0 && k > 0 && diff[k - 1].1 * d1 < 0.0 {
            return Ok(p0);
        }
        if d0 * d1 < 0.0 {
            return Ok(p0 + (p1 - p0) * d0 / (d0 - d1));
        }
    }
    Err(Error::NoCrossing)
}

/// Failure counts at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountPoint {
    pub p: f64,
    pub n_fail: u64,
    pub n_trials: u64,
}

impl CountPoint {
    pub fn rate(&self) -> f64 {
        self.n_fail as f64 / self.n_trials as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossingEstimate {
    pub p: f64,
    pub stderr: f64,
    /// Bootstrap replicates that produced a crossing.
    pub replicates: usize,
}

/// Crossing point with a parametric bootstrap error: every count is redrawn
/// from a binomial at its observed rate.
pub fn crossing_point_bootstrap<R: Rng + ?Sized>(
    curve_a: &[CountPoint],
    curve_b: &[CountPoint],
    resamples: usize,
    rng: &mut R,
) -> Result<CrossingEstimate> {
    let as_rates = |c: &[CountPoint]| c.iter().map(|q| (q.p, q.rate())).collect::<Vec<_>>();
    let p = crossing_point(&as_rates(curve_a), &as_rates(curve_b))?;
    let redraw = |c: &[CountPoint], rng: &mut R| -> Vec<(f64, f64)> {
        c.iter()
            .map(|q| {
                let k = Binomial::new(q.n_trials, q.rate())
                    .expect("rate is a probability")
                    .sample(rng);
                (q.p, k as f64 / q.n_trials as f64)
            })
            .collect()
    };
    let mut samples = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let a = redraw(curve_a, rng);
        let b = redraw(curve_b, rng);
        if let Ok(x) = crossing_point(&a, &b) {
            samples.push(x);
        }
    }
    let stderr = if samples.len() > 1 {
        let m = samples.iter().sum::<f64>() / samples.len() as f64;
        (samples.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (samples.len() - 1) as f64).sqrt()
    } else {
        f64::NAN
    };
    Ok(CrossingEstimate {
        p,
        stderr,
        replicates: samples.len(),
    })
}

/// Weighted least-squares polynomial `c₀ + c₁x + … ` with coefficient
/// standard errors (scaled by the residual variance).
pub fn polynomial_fit(xs: &[f64], ys: &[f64], sigmas: &[f64], degree: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = xs.len();
    if n <= degree || ys.len() != n || sigmas.len() != n {
        return Err(Error::Fit("not enough points for polynomial fit".into()));
    }
    let a = DMatrix::from_fn(n, degree + 1, |i, k| xs[i].powi(k as i32) / sigmas[i]);
    let y = DVector::from_fn(n, |i, _| ys[i] / sigmas[i]);
    let svd = a.clone().svd(true, true);
    let coef = svd
        .solve(&y, 1e-14)
        .map_err(|e| Error::Fit(e.to_string()))?;
    let resid = &y - &a * &coef;
    let dof = (n - degree - 1).max(1) as f64;
    let s2 = if n > degree + 1 {
        resid.norm_squared() / dof
    } else {
        1.0
    };
    let cov = (a.transpose() * &a)
        .try_inverse()
        .ok_or_else(|| Error::Fit("singular design matrix".into()))?;
    let errs = (0..=degree).map(|k| (cov[(k, k)] * s2).sqrt()).collect();
    Ok((coef.iter().copied().collect(), errs))
}
