//! Damped Gauss-Newton (Levenberg-Marquardt) least squares for the
//! saturating models.
//!
//! Each iteration solves `(JᵀJ + λ diag(JᵀJ)) δ = Jᵀr` with analytic
//! Jacobians, projects the candidate onto the feasible box and accepts it
//! only if the sum of squares drops. `λ` shrinks on acceptance and grows
//! on rejection.

use crate::accumulation::AccumulationCurve;
use crate::error::{Error, Result};

use super::{FitResult, ModelKind, MIN_POSITIVE};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub max_iterations: u32,
    /// Stop when `max_j |Δp_j| / |p_j|` falls below this.
    pub param_tolerance: f64,
    /// Stop when the relative drop of the sum of squares falls below this.
    pub residual_tolerance: f64,
    pub initial_damping: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iterations: 500,
            param_tolerance: 1e-8,
            residual_tolerance: 1e-10,
            initial_damping: 1e-3,
        }
    }
}

/// Convergence tests only apply once the damping is this small, i.e. the
/// accepted step was close to a Gauss-Newton step.
const CONVERGENCE_DAMPING: f64 = 1.0;
const MAX_DAMPING: f64 = 1e16;
const MIN_DAMPING: f64 = 1e-12;

/// Least-squares fit of a saturating model with the default solver options.
pub fn fit_model(curve: &AccumulationCurve, kind: ModelKind) -> Result<FitResult> {
    fit_model_with(curve, kind, &SolverOptions::default())
}

pub fn fit_model_with(
    curve: &AccumulationCurve,
    kind: ModelKind,
    opts: &SolverOptions,
) -> Result<FitResult> {
    if !kind.is_saturating() {
        return Err(Error::Validation(
            "the power law is fitted in log space, use fit_power_law".into(),
        ));
    }
    let pts = curve.points();
    if pts.len() < kind.arity() + 1 {
        return Err(Error::InsufficientData(format!(
            "{kind} needs at least {} points, got {}",
            kind.arity() + 1,
            pts.len()
        )));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.n as f64).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.value).collect();
    let start = initial_guess(kind, &xs, &ys)?;
    let run = solve(kind, &xs, &ys, start, opts);
    Ok(FitResult {
        kind,
        residual: (run.sse / xs.len() as f64).sqrt(),
        params: run.params,
        n_points: xs.len(),
        converged: run.converged,
        iterations: run.iterations,
    })
}

/// `D₀ = 1.2 × last value`, `c₀` where the curve crosses `D₀/2` (linear
/// interpolation, from the origin if the first point is already above),
/// `α₀ = 1` for M4 and `1/c₀` for M1, `b₀ = 0`.
pub(crate) fn initial_guess(kind: ModelKind, xs: &[f64], ys: &[f64]) -> Result<Vec<f64>> {
    let last = *ys.last().expect("caller checked length");
    if !(last > 0.0) {
        return Err(Error::Domain(format!(
            "saturating fit needs a positive final value, got {last}"
        )));
    }
    let d0 = 1.2 * last;
    let half = d0 / 2.0;
    let i = ys.iter().position(|&y| y >= half).unwrap_or(ys.len() - 1);
    let (x0, y0) = if i == 0 { (0.0, 0.0) } else { (xs[i - 1], ys[i - 1]) };
    let (x1, y1) = (xs[i], ys[i]);
    let c0 = if y1 > y0 { x0 + (half - y0) * (x1 - x0) / (y1 - y0) } else { x1 };
    let c0 = c0.max(MIN_POSITIVE);
    let mut p = match kind {
        ModelKind::M1 => vec![d0, 1.0 / c0],
        ModelKind::M2 => vec![d0, c0],
        ModelKind::M3 => vec![d0, 0.0, c0],
        ModelKind::M4 => vec![d0, c0, 1.0],
        ModelKind::PowerLaw => unreachable!(),
    };
    kind.project(&mut p);
    Ok(p)
}

pub(crate) struct Run {
    pub params: Vec<f64>,
    pub sse: f64,
    pub converged: bool,
    pub iterations: u32,
}

fn sum_of_squares(kind: ModelKind, p: &[f64], xs: &[f64], ys: &[f64]) -> f64 {
    xs.iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = y - kind.value(p, x);
            r * r
        })
        .sum()
}

pub(crate) fn solve(
    kind: ModelKind,
    xs: &[f64],
    ys: &[f64],
    mut p: Vec<f64>,
    opts: &SolverOptions,
) -> Run {
    let k = kind.arity();
    let mut sse = sum_of_squares(kind, &p, xs, ys);
    let mut lambda = opts.initial_damping;
    let mut iterations = 0;
    let mut grad = vec![0.0; k];
    let mut candidate = vec![0.0; k];

    if sse == 0.0 {
        return Run { params: p, sse, converged: true, iterations };
    }

    while iterations < opts.max_iterations {
        iterations += 1;

        // Normal equations JᵀJ and Jᵀr.
        let mut jtj = [[0.0f64; 3]; 3];
        let mut jtr = [0.0f64; 3];
        for (&x, &y) in xs.iter().zip(ys) {
            let r = y - kind.value(&p, x);
            kind.gradient(&p, x, &mut grad);
            for a in 0..k {
                jtr[a] += grad[a] * r;
                for b in 0..=a {
                    jtj[a][b] += grad[a] * grad[b];
                }
            }
        }
        for a in 0..k {
            for b in 0..a {
                jtj[b][a] = jtj[a][b];
            }
        }
        // Jacobi scaling keeps D, c and α on comparable footing.
        let scale: Vec<f64> = (0..k).map(|a| jtj[a][a].sqrt().max(1e-150)).collect();

        loop {
            let mut m = [[0.0f64; 3]; 3];
            let mut rhs = [0.0f64; 3];
            for a in 0..k {
                for b in 0..k {
                    m[a][b] = jtj[a][b] / (scale[a] * scale[b]);
                }
                m[a][a] += lambda;
                rhs[a] = jtr[a] / scale[a];
            }
            let step = solve_dense(&mut m, &mut rhs, k);

            let mut accepted = false;
            if let Some(step) = step {
                for a in 0..k {
                    candidate[a] = p[a] + step[a] / scale[a];
                }
                kind.project(&mut candidate);
                let new_sse = sum_of_squares(kind, &candidate, xs, ys);
                if new_sse.is_finite() && new_sse < sse {
                    let rel_param = (0..k)
                        .map(|a| (candidate[a] - p[a]).abs() / p[a].abs().max(MIN_POSITIVE))
                        .fold(0.0, f64::max);
                    let rel_res = (sse - new_sse) / sse;
                    let near_gauss_newton = lambda <= CONVERGENCE_DAMPING;
                    p.copy_from_slice(&candidate);
                    sse = new_sse;
                    lambda = (lambda / 10.0).max(MIN_DAMPING);
                    if sse == 0.0
                        || (near_gauss_newton
                            && (rel_param < opts.param_tolerance
                                || rel_res < opts.residual_tolerance))
                    {
                        return Run { params: p, sse, converged: true, iterations };
                    }
                    accepted = true;
                }
            }
            if accepted {
                break;
            }
            lambda *= 10.0;
            if lambda > MAX_DAMPING {
                // No step, however short, lowers the sum of squares: a
                // stationary point of the projected problem.
                return Run { params: p, sse, converged: true, iterations };
            }
        }
    }
    Run { params: p, sse, converged: false, iterations }
}

/// Gaussian elimination with partial pivoting on the leading `k × k` block.
fn solve_dense(m: &mut [[f64; 3]; 3], rhs: &mut [f64; 3], k: usize) -> Option<[f64; 3]> {
    for col in 0..k {
        let pivot = (col..k).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if !(m[pivot][col].abs() > 1e-300) {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..k {
            let f = m[row][col] / m[col][col];
            for c in col..k {
                m[row][c] -= f * m[col][c];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut out = [0.0; 3];
    for row in (0..k).rev() {
        let mut s = rhs[row];
        for c in row + 1..k {
            s -= m[row][c] * out[c];
        }
        out[row] = s / m[row][row];
    }
    out[..k].iter().all(|v| v.is_finite()).then_some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::accumulation::Statistic;
    use crate::fit::eval_model;

    fn log_spaced(count: usize, max: f64) -> Vec<u64> {
        let mut ns: Vec<u64> = (0..count)
            .map(|i| max.powf(i as f64 / (count - 1) as f64).round() as u64)
            .collect();
        ns.dedup();
        ns
    }

    fn synthetic(kind: ModelKind, params: &[f64]) -> AccumulationCurve {
        let pairs: Vec<(u64, f64)> = log_spaced(50, 1e5)
            .into_iter()
            .map(|n| (n, eval_model(kind, params, n as f64).unwrap()))
            .collect();
        AccumulationCurve::from_pairs(Statistic::Diversity, &pairs).unwrap()
    }

    fn assert_recovers(kind: ModelKind, truth: &[f64], tol: f64) {
        let fit = fit_model(&synthetic(kind, truth), kind).unwrap();
        assert!(fit.converged, "{kind} did not converge: {fit:?}");
        for (got, want) in fit.params.iter().zip(truth) {
            assert!(
                (got - want).abs() <= tol * want.abs(),
                "{kind}: got {:?}, want {truth:?}",
                fit.params
            );
        }
    }

    #[test]
    fn recovers_m4() {
        assert_recovers(ModelKind::M4, &[100.0, 5000.0, 0.8], 1e-4);
    }

    #[test]
    fn recovers_m2() {
        assert_recovers(ModelKind::M2, &[50.0, 1000.0], 1e-6);
    }

    #[test]
    fn recovers_m1_and_m3() {
        assert_recovers(ModelKind::M1, &[80.0, 2e-4], 1e-6);
        assert_recovers(ModelKind::M3, &[60.0, 200.0, 3000.0], 1e-6);
    }

    #[test]
    fn too_few_points() {
        let two = AccumulationCurve::from_pairs(Statistic::Diversity, &[(1, 1.0), (2, 1.5)]).unwrap();
        assert!(matches!(fit_model(&two, ModelKind::M4), Err(Error::InsufficientData(_))));
        assert!(fit_model(&two, ModelKind::M2).is_err());
        let three =
            AccumulationCurve::from_pairs(Statistic::Diversity, &[(1, 1.0), (2, 1.5), (4, 1.8)])
                .unwrap();
        assert!(fit_model(&three, ModelKind::M2).is_ok());
    }

    #[test]
    fn power_law_is_rejected() {
        let c = synthetic(ModelKind::M2, &[10.0, 10.0]);
        assert!(matches!(fit_model(&c, ModelKind::PowerLaw), Err(Error::Validation(_))));
    }

    #[test]
    fn constant_curve_fits_its_level() {
        let pairs: Vec<(u64, f64)> = (1..=10).map(|i| (i * 100, 1.0)).collect();
        let c = AccumulationCurve::from_pairs(Statistic::Diversity, &pairs).unwrap();
        let fit = fit_model(&c, ModelKind::M4).unwrap();
        assert!(fit.converged);
        assert!((fit.params[0] - 1.0).abs() < 1e-6, "{fit:?}");
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let c = synthetic(ModelKind::M4, &[100.0, 5000.0, 0.8]);
        let opts = SolverOptions { max_iterations: 1, ..SolverOptions::default() };
        let fit = fit_model_with(&c, ModelKind::M4, &opts).unwrap();
        assert!(!fit.converged);
        assert_eq!(fit.iterations, 1);
    }

    #[test]
    fn dense_solver() {
        let mut m = [[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]];
        let mut rhs = [3.0, 5.0, 5.0];
        let x = solve_dense(&mut m, &mut rhs, 3).unwrap();
        for (got, want) in x.iter().zip([1.0, 1.0, 1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        let mut singular = [[1.0, 2.0, 0.0], [2.0, 4.0, 0.0], [0.0; 3]];
        assert!(solve_dense(&mut singular, &mut [1.0, 2.0, 0.0], 2).is_none());
    }
}
