//! Empirical check that an objective is affine inside one cell of an arrangement.

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::arrangement::{Arrangement, Cell};
use crate::error::{domain, Error, Result};
use crate::mechanisms::ProfitModel;
use crate::rng::rng;
use crate::valuations::ValuationProfile;

/// Relative residual allowed between an objective value and its affine fit.
pub const TAU_AFFINE: f64 = 1e-7;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AffineCheck {
    pub affine: bool,
    /// Largest `|f − fit| / (1 + |f|)` over the probe points.
    pub max_residual: f64,
    pub coeffs: Vec<f64>,
    pub intercept: f64,
    pub points: usize,
}

/// Feasible step range `[t0, t1]` from `x` along `u` while staying in the closed cell.
fn chord(arr: &Arrangement, signs: &[i8], x: &[f64], u: &[f64]) -> (f64, f64) {
    let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
    let mut clip = |slack: f64, rate: f64| {
        // Constraint: slack + t·rate ≥ 0.
        if rate > 1e-15 {
            t0 = t0.max(-slack / rate);
        } else if rate < -1e-15 {
            t1 = t1.min(-slack / rate);
        }
    };
    for i in 0..x.len() {
        clip(x[i] - arr.lo[i], u[i]);
        clip(arr.hi[i] - x[i], -u[i]);
    }
    for (h, &s) in arr.hyperplanes.iter().zip(signs) {
        let s = s as f64;
        let rate: f64 = h.normal.iter().zip(u).map(|(a, b)| a * b).sum();
        clip(s * h.eval(x), s * rate);
    }
    (t0, t1)
}

/// Points spread through the cell by hit-and-run from its witness.
pub fn cell_points(arr: &Arrangement, cell: &Cell, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let d = arr.dim();
    let mut r = rng(seed);
    let mut x = cell.witness.clone();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut u: Vec<f64> = (0..d).map(|_| r.random_range(-1.0..1.0)).collect();
        let norm = u.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm < 1e-6 {
            continue;
        }
        u.iter_mut().for_each(|a| *a /= norm);
        let (t0, t1) = chord(arr, &cell.sign_vector, &x, &u);
        if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
            continue;
        }
        // Stay off the faces: the objective may jump on them.
        let t = t0 + (t1 - t0) * r.random_range(0.05..0.95);
        x = x.iter().zip(&u).map(|(a, b)| a + t * b).collect();
        out.push(x.clone());
    }
    out
}

/// Least-squares affine fit `f(p) ≈ c·p + b`; a geometry error when the points do not
/// span the parameter space.
pub fn fit_affine(points: &[Vec<f64>], values: &[f64]) -> Result<(Vec<f64>, f64)> {
    let d = points.first().map_or(0, |p| p.len());
    if points.len() < d + 1 {
        return domain(format!("affine fit: {} points cannot determine {} coefficients", points.len(), d + 1));
    }
    // Centering keeps thin, far-from-origin cells well conditioned. Householder QR: the
    // library's SVD loses accuracy on such slivers.
    let k = points.len() as f64;
    let pm: Vec<f64> = (0..d).map(|i| points.iter().map(|p| p[i]).sum::<f64>() / k).collect();
    let vm = values.iter().sum::<f64>() / k;
    let a = DMatrix::from_fn(points.len(), d + 1, |i, c| if c < d { points[i][c] - pm[c] } else { 1.0 });
    let y = DVector::from_iterator(values.len(), values.iter().map(|v| v - vm));
    let scale = a.column_iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    let qr = a.qr();
    let r = qr.r();
    if r.diagonal().iter().any(|x| x.abs() <= 1e-10 * scale.max(1.0)) {
        return Err(Error::Geometry("affine fit: probe points are degenerate (cell too thin)".into()));
    }
    let qty = qr.q().transpose() * y;
    let sol = r.solve_upper_triangular(&qty).ok_or_else(|| Error::Geometry("affine fit: singular system".into()))?;
    let coef: Vec<f64> = sol.rows(0, d).iter().copied().collect();
    let b = vm + sol[d] - coef.iter().zip(&pm).map(|(c, m)| c * m).sum::<f64>();
    Ok((coef, b))
}

/// Evaluates `f` at `trials` (at least `2(d+1)`) points of the cell and checks that an
/// affine function reproduces every value within [`TAU_AFFINE`].
pub fn verify_affine<F>(f: F, arr: &Arrangement, cell: &Cell, trials: usize, seed: u64) -> Result<AffineCheck>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let d = arr.dim();
    let pts = cell_points(arr, cell, trials.max(2 * (d + 1)), seed);
    let vals = pts.iter().map(|p| f(p)).collect::<Result<Vec<f64>>>()?;
    let (coeffs, intercept) = fit_affine(&pts, &vals)?;
    let max_residual = pts
        .iter()
        .zip(&vals)
        .map(|(p, &v)| {
            let fit: f64 = coeffs.iter().zip(p).map(|(c, x)| c * x).sum::<f64>() + intercept;
            (v - fit).abs() / (1.0 + v.abs())
        })
        .fold(0.0, f64::max);
    Ok(AffineCheck { affine: max_residual <= TAU_AFFINE, max_residual, coeffs, intercept, points: pts.len() })
}

/// [`verify_affine`] applied to a mechanism's profit on one profile.
pub fn verify_affine_in_cell(
    model: &ProfitModel,
    profile: &ValuationProfile,
    arr: &Arrangement,
    cell: &Cell,
    trials: usize,
    seed: u64,
) -> Result<AffineCheck> {
    verify_affine(|p| model.profit(p, profile), arr, cell, trials, seed)
}
