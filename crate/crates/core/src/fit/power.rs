use crate::accumulation::AccumulationCurve;
use crate::error::{Error, Result};

use super::{FitResult, ModelKind};

/// Fits `C n^α` by ordinary least squares on `(ln n, ln value)`.
///
/// Closed form, so the result is always `converged`. The residual is the
/// RMS error in log space.
pub fn fit_power_law(curve: &AccumulationCurve) -> Result<FitResult> {
    let pts = curve.points();
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "power-law fit needs at least 3 points, got {}",
            pts.len()
        )));
    }
    if let Some(p) = pts.iter().find(|p| p.n == 0 || p.value <= 0.0) {
        return Err(Error::Domain(format!(
            "log-log fit needs positive n and value, got ({}, {})",
            p.n, p.value
        )));
    }
    let xs: Vec<f64> = pts.iter().map(|p| (p.n as f64).ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.value.ln()).collect();
    let m = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / m;
    let mean_y = ys.iter().sum::<f64>() / m;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    Ok(FitResult {
        kind: ModelKind::PowerLaw,
        params: vec![intercept.exp(), slope],
        residual: (sse / m).sqrt(),
        n_points: pts.len(),
        converged: true,
        iterations: 0,
    })
}
