
use serde::Serialize;

use crate::accumulation::AccumulationCurve;
use crate::error::{Error, Result};
use crate::par::Execution;

use super::{fit_model, FitResult, ModelKind};

#[derive(Debug, Clone, Serialize)]
pub struct RankedModel {
    pub kind: ModelKind,
    pub holdout_rmse: f64,
    pub fit: FitResult,
}

/// Fits M1..M4 on the points with `n ≤ train_limit` and ranks them by RMS
/// prediction error on the points beyond it. Non-converged fits go last.
pub fn compare_models(
    curve: &AccumulationCurve,
    train_limit: u64,
    exec: Execution,
) -> Result<Vec<RankedModel>> {
    let train = curve.prefix(train_limit);
    let holdout = curve.suffix(train_limit);
    if holdout.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no checkpoints beyond the training limit {train_limit}"
        )));
    }
    let fits = exec.map(&ModelKind::SATURATING, |&kind| fit_model(&train, kind));
    let mut ranked = Vec::with_capacity(fits.len());
    for fit in fits {
        let fit = fit?;
        let sse: f64 = holdout
            .points()
            .iter()
            .map(|p| {
                let r = p.value - fit.predict(p.n as f64);
                r * r
            })
            .sum();
        ranked.push(RankedModel {
            kind: fit.kind,
            holdout_rmse: (sse / holdout.len() as f64).sqrt(),
            fit,
        });
    }
    ranked.sort_by(|a, b| {
        b.fit
            .converged
            .cmp(&a.fit.converged)
            .then_with(|| {
                a.holdout_rmse
                    .partial_cmp(&b.holdout_rmse)
                    .unwrap_or_else(|| a.holdout_rmse.is_nan().cmp(&b.holdout_rmse.is_nan()))
            })
            .then_with(|| a.kind.cmp(&b.kind))
    });
    Ok(ranked)
}

impl RankedModel {
    pub fn position_of(ranking: &[RankedModel], kind: ModelKind) -> Option<usize> {
        ranking.iter().position(|r| r.kind == kind)
    }
}

