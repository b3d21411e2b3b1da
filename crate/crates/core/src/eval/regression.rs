//! Five-parameter logistic mapping from raw metric scores to DMOS.
//!
//! Fitted by Levenberg–Marquardt with Marquardt's diagonal scaling, which
//! makes the damping insensitive to the very different ranges of raw scores
//! (PSNR in tens of dB, PCDM in `(0, 1)`). Several deterministic starts are
//! tried and the lowest sum of squares wins:
//!
//! 1. the documented initialization `β = (range(dmos), 1/std(raw), mean(raw), 0, mean(dmos))`;
//! 2. the same with `β2` negated, for metrics that fall as DMOS rises;
//! 3. five perturbations of (1) drawn from a fixed-seed generator;
//! 4. the least-squares straight line (`β1 = 0`), so the result is never
//!    worse than an affine fit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::EvalError;

pub const MAX_ITERATIONS: usize = 10_000;
/// Convergence threshold on the relative decrease of the sum of squares.
pub const RELATIVE_TOLERANCE: f64 = 1e-10;
const PERTURBED_STARTS: usize = 5;
const START_SEED: u64 = 0x5EED_0003;
const LAMBDA_INIT: f64 = 1e-3;
const LAMBDA_MAX: f64 = 1e16;

/// Which logistic core to use.
///
/// `Standard` is `β1·(1/2 − 1/(1 + e^{β2(S0−β3)})) + β4·S0 + β5`.
/// `AsPrinted` is `β1·(1 − 1/(2 + e^{β2(S0−β3)})) + β4·S0 + β5`, kept
/// selectable for comparison.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LogisticForm {
    #[default]
    Standard,
    AsPrinted,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegressionParams {
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub beta4: f64,
    pub beta5: f64,
    pub form: LogisticForm,
}

/// Logistic core and its derivative with respect to its argument, computed
/// without overflow for large `|z|`.
fn core(form: LogisticForm, z: f64) -> (f64, f64) {
    match form {
        LogisticForm::Standard => {
            // s = 1/(1+e^z)
            let s = if z > 0.0 {
                let t = (-z).exp();
                t / (1.0 + t)
            } else {
                1.0 / (1.0 + z.exp())
            };
            (0.5 - s, s * (1.0 - s))
        }
        LogisticForm::AsPrinted => {
            // q = 1/(2+e^z), derivative e^z q²
            if z > 0.0 {
                let t = (-z).exp();
                let q = t / (2.0 * t + 1.0);
                (1.0 - q, t / ((2.0 * t + 1.0) * (2.0 * t + 1.0)))
            } else {
                let e = z.exp();
                let q = 1.0 / (2.0 + e);
                (1.0 - q, e * q * q)
            }
        }
    }
}

impl RegressionParams {
    fn from_array(b: [f64; 5], form: LogisticForm) -> Self {
        Self { beta1: b[0], beta2: b[1], beta3: b[2], beta4: b[3], beta5: b[4], form }
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.beta1, self.beta2, self.beta3, self.beta4, self.beta5]
    }

    pub fn predict(&self, s0: f64) -> f64 {
        let (c, _) = core(self.form, self.beta2 * (s0 - self.beta3));
        self.beta1 * c + self.beta4 * s0 + self.beta5
    }

    pub fn predict_all(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter().map(|&s| self.predict(s)).collect()
    }

    /// Prediction and its gradient with respect to `β1..β5`.
    fn predict_with_gradient(&self, s0: f64) -> (f64, [f64; 5]) {
        let d = s0 - self.beta3;
        let (c, dc) = core(self.form, self.beta2 * d);
        let value = self.beta1 * c + self.beta4 * s0 + self.beta5;
        (value, [c, self.beta1 * dc * d, -self.beta1 * dc * self.beta2, s0, 1.0])
    }
}

fn sse(p: &RegressionParams, raw: &[f64], dmos: &[f64]) -> f64 {
    raw.iter().zip(dmos).map(|(&x, &y)| (p.predict(x) - y).powi(2)).sum()
}

/// Ordinary least-squares line `dmos ≈ slope·raw + intercept`.
pub fn linear_fit(raw: &[f64], dmos: &[f64]) -> (f64, f64) {
    let n = raw.len() as f64;
    let mx = raw.iter().sum::<f64>() / n;
    let my = dmos.iter().sum::<f64>() / n;
    let sxx: f64 = raw.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = raw.iter().zip(dmos).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// Solves the 5×5 system `a·x = b` by Gaussian elimination with partial
/// pivoting. `None` when the matrix is numerically singular.
fn solve5(mut a: [[f64; 5]; 5], mut b: [f64; 5]) -> Option<[f64; 5]> {
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return None;
    }
    for col in 0..5 {
        let pivot = (col..5).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() <= scale * 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..5 {
            let f = a[row][col] / a[col][col];
            for k in col..5 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 5];
    for row in (0..5).rev() {
        let s: f64 = (row + 1..5).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

struct Outcome {
    params: RegressionParams,
    cost: f64,
    converged: bool,
}

fn levenberg_marquardt(start: RegressionParams, raw: &[f64], dmos: &[f64]) -> Outcome {
    let mut p = start;
    let mut cost = sse(&p, raw, dmos);
    if !cost.is_finite() {
        return Outcome { params: p, cost, converged: false };
    }
    let mut lambda = LAMBDA_INIT;

    for _ in 0..MAX_ITERATIONS {
        if cost == 0.0 {
            return Outcome { params: p, cost, converged: true };
        }
        let mut jtj = [[0.0; 5]; 5];
        let mut jtr = [0.0; 5];
        for (&x, &y) in raw.iter().zip(dmos) {
            let (v, g) = p.predict_with_gradient(x);
            let r = v - y;
            for i in 0..5 {
                jtr[i] += g[i] * r;
                for j in 0..5 {
                    jtj[i][j] += g[i] * g[j];
                }
            }
        }
        let diag_floor = jtj.iter().enumerate().map(|(i, row)| row[i]).fold(0.0f64, f64::max) * 1e-12;

        let mut accepted = None;
        while lambda <= LAMBDA_MAX {
            let mut a = jtj;
            for (i, row) in a.iter_mut().enumerate() {
                row[i] += lambda * row[i].max(diag_floor);
            }
            let step = solve5(a, jtr.map(|v| -v));
            if let Some(step) = step {
                let b = p.as_array();
                let cand = RegressionParams::from_array(std::array::from_fn(|i| b[i] + step[i]), p.form);
                let c = sse(&cand, raw, dmos);
                if c.is_finite() && c < cost {
                    accepted = Some((cand, c));
                    lambda = (lambda / 10.0).max(1e-15);
                    break;
                }
            }
            lambda *= 10.0;
        }
        match accepted {
            // No damping level improves the objective: a stationary point.
            None => return Outcome { params: p, cost, converged: true },
            Some((cand, c)) => {
                let decrease = cost - c;
                p = cand;
                cost = c;
                if decrease <= RELATIVE_TOLERANCE * (cost + decrease) {
                    return Outcome { params: p, cost, converged: true };
                }
            }
        }
    }
    Outcome { params: p, cost, converged: false }
}

/// Fits the standard logistic form.
pub fn fit_regression(raw: &[f64], dmos: &[f64]) -> Result<RegressionParams, EvalError> {
    fit_regression_with(raw, dmos, LogisticForm::Standard)
}

/// Fits the chosen logistic form, minimizing `Σ (S(S0ᵢ) − dmosᵢ)²`.
pub fn fit_regression_with(raw: &[f64], dmos: &[f64], form: LogisticForm) -> Result<RegressionParams, EvalError> {
    if raw.len() != dmos.len() {
        return Err(EvalError::DegenerateInput(format!("length mismatch: {} vs {}", raw.len(), dmos.len())));
    }
    if raw.len() < 5 {
        return Err(EvalError::DegenerateInput(format!("need at least 5 points, got {}", raw.len())));
    }
    if raw.iter().chain(dmos).any(|v| !v.is_finite()) {
        return Err(EvalError::DegenerateInput("non-finite value".into()));
    }
    let n = raw.len() as f64;
    let mean_raw = raw.iter().sum::<f64>() / n;
    let std_raw = (raw.iter().map(|x| (x - mean_raw).powi(2)).sum::<f64>() / n).sqrt();
    if std_raw == 0.0 || raw.iter().all(|&x| x == raw[0]) {
        return Err(EvalError::DegenerateInput("raw scores are all equal".into()));
    }
    let mean_dmos = dmos.iter().sum::<f64>() / n;
    let (lo, hi) = dmos.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let range = (hi - lo).max(f64::MIN_POSITIVE);

    let base = [range, 1.0 / std_raw, mean_raw, 0.0, mean_dmos];
    let mut starts = vec![base, [base[0], -base[1], base[2], base[3], base[4]]];
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    for k in 0..PERTURBED_STARTS {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        starts.push([
            base[0] * rng.random_range(0.5..2.0),
            sign * base[1] * rng.random_range(0.25..4.0),
            base[2] + std_raw * rng.random_range(-1.0..1.0),
            0.0,
            base[4] + range * rng.random_range(-0.25..0.25),
        ]);
    }
    let (slope, intercept) = linear_fit(raw, dmos);
    // With β1 = 0 the logistic term vanishes; β2, β3 only seed its shape.
    // The standard core is zero at S0 = β3, the printed one is not, which is
    // harmless because β1 = 0 either way.
    starts.push([0.0, base[1], base[2], slope, intercept]);

    let mut best: Option<Outcome> = None;
    for s in starts {
        let out = levenberg_marquardt(RegressionParams::from_array(s, form), raw, dmos);
        if !out.converged {
            log::debug!("regression start did not converge (cost {})", out.cost);
            continue;
        }
        if best.as_ref().map_or(true, |b| out.cost < b.cost) {
            best = Some(out);
        }
    }
    best.map(|b| b.params)
        .ok_or(EvalError::NonConvergence { iterations: MAX_ITERATIONS })
}
