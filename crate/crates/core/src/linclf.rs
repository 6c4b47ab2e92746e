//! L2-regularized squared-hinge linear classifier.
//!
//! Minimizes `½‖w‖² + C Σ_j max(0, 1 − y_j(wᵀx_j + b))²` with an
//! unregularized bias. The solver is a truncated Newton method: each
//! iteration solves the generalized Newton system on the current margin
//! violators with diagonally preconditioned conjugate gradients, then takes
//! an exact line search along that direction. The line search makes the
//! objective non-increasing from one iteration to the next.

use std::path::Path;

use ndarray::{ArrayView1, ArrayView2, CowArray, Ix2};
use serde::{Deserialize, Serialize};

use crate::par::{self, Execution};
use crate::{Error, Result};

const POINT_CHUNK: usize = 256;
const CG_RELATIVE_TOL: f64 = 0.1;
const MAX_CG_ITERS: usize = 500;

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Features with one point per column, and ±1 labels.
#[derive(Debug, Clone)]
pub struct LabeledFeatures<'a> {
    // N × M with contiguous rows
    rows: CowArray<'a, f64, Ix2>,
    labels: Vec<f64>,
}

impl<'a> LabeledFeatures<'a> {
    /// `features` is `M × N`. Column-major input is borrowed as is; anything
    /// else is copied once.
    pub fn new(features: ArrayView2<'a, f64>, labels: &[i8]) -> Result<Self> {
        if features.ncols() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: features.ncols(),
                actual: labels.len(),
            });
        }
        if let Some(bad) = labels.iter().find(|&&y| y != 1 && y != -1) {
            return Err(Error::InvalidData(format!("label {bad} is not ±1")));
        }
        let t = features.reversed_axes();
        let rows = if t.is_standard_layout() {
            CowArray::from(t)
        } else {
            CowArray::from(t.as_standard_layout().into_owned())
        };
        Ok(LabeledFeatures {
            rows,
            labels: labels.iter().map(|&y| y as f64).collect(),
        })
    }

    pub fn point_count(&self) -> usize {
        self.rows.nrows()
    }

    pub fn feature_count(&self) -> usize {
        self.rows.ncols()
    }

    fn validate_for_training(&self) -> Result<()> {
        if self.point_count() < 2 {
            return Err(Error::InvalidData("need at least two points".into()));
        }
        let pos = self.labels.iter().filter(|&&y| y > 0.0).count();
        if pos == 0 || pos == self.labels.len() {
            return Err(Error::InvalidData("both classes must be present".into()));
        }
        if self.rows.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidData("non-finite feature value".into()));
        }
        Ok(())
    }

    fn row(&self, i: usize) -> &[f64] {
        let m = self.feature_count();
        &self.rows.as_slice().expect("standard layout")[i * m..(i + 1) * m]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainParams {
    pub reg_c: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub execution: Execution,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            reg_c: 1.0,
            tol: 1e-4,
            max_iters: 1000,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub version: u32,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub reg_c: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub training_iters: usize,
    pub final_objective: f64,
    pub converged: bool,
    /// Objective before the first iteration and after each one.
    pub objective_trace: Vec<f64>,
}

impl LinearModel {
    pub fn decision(&self, x: ArrayView1<'_, f64>) -> f64 {
        x.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>() + self.bias
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_vec_pretty(self)?;
        std::fs::write(path, json).map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        let model: LinearModel = serde_json::from_slice(&bytes)?;
        if model.version != MODEL_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "model version {}, expected {MODEL_FORMAT_VERSION}",
                model.version
            )));
        }
        Ok(model)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Problem<'d, 'a> {
    data: &'d LabeledFeatures<'a>,
    c: f64,
    exec: Execution,
}

impl Problem<'_, '_> {
    fn n(&self) -> usize {
        self.data.point_count()
    }

    fn m(&self) -> usize {
        self.data.feature_count()
    }

    /// `X v_w + v_b` for every point.
    fn apply(&self, vw: &[f64], vb: f64) -> Vec<f64> {
        self.apply_masked(vw, vb, None)
    }

    /// Like [`Self::apply`], leaving zeros outside `mask`.
    fn apply_masked(&self, vw: &[f64], vb: f64, mask: Option<&[bool]>) -> Vec<f64> {
        let mut out = vec![0.0; self.n()];
        par::for_each_chunk_mut(self.exec, &mut out, POINT_CHUNK, |c, o| {
            for (k, x) in o.iter_mut().enumerate() {
                let i = c * POINT_CHUNK + k;
                if mask.is_none_or(|m| m[i]) {
                    *x = dot(self.data.row(i), vw) + vb;
                }
            }
        });
        out
    }

    /// `(Σ_i coef_i x_i, Σ_i coef_i)` over points with nonzero coefficient.
    fn apply_t(&self, coef: &[f64]) -> (Vec<f64>, f64) {
        let m = self.m();
        let mut acc = par::chunked_sum(self.exec, self.n(), POINT_CHUNK, m + 1, |range, acc| {
            for i in range {
                let ci = coef[i];
                if ci != 0.0 {
                    for (a, x) in acc[..m].iter_mut().zip(self.data.row(i)) {
                        *a += ci * x;
                    }
                    acc[m] += ci;
                }
            }
        });
        let b = acc.pop().unwrap();
        (acc, b)
    }

    fn objective(&self, w: &[f64], outputs: &[f64]) -> f64 {
        let loss: f64 = outputs
            .iter()
            .zip(&self.data.labels)
            .map(|(o, y)| {
                let v = 1.0 - y * o;
                if v > 0.0 {
                    v * v
                } else {
                    0.0
                }
            })
            .sum();
        0.5 * dot(w, w) + self.c * loss
    }

    fn active(&self, outputs: &[f64]) -> Vec<bool> {
        outputs
            .iter()
            .zip(&self.data.labels)
            .map(|(o, y)| y * o < 1.0)
            .collect()
    }

    /// Gradient `(g_w, g_b)`.
    fn gradient(&self, w: &[f64], outputs: &[f64], active: &[bool]) -> (Vec<f64>, f64) {
        let coef: Vec<f64> = (0..self.n())
            .map(|i| {
                if active[i] {
                    2.0 * self.c * (outputs[i] - self.data.labels[i])
                } else {
                    0.0
                }
            })
            .collect();
        let (mut gw, gb) = self.apply_t(&coef);
        for (g, x) in gw.iter_mut().zip(w) {
            *g += x;
        }
        (gw, gb)
    }

    /// Generalized Hessian-vector product on the active set.
    fn hess_vec(&self, active: &[bool], vw: &[f64], vb: f64) -> (Vec<f64>, f64) {
        let coef: Vec<f64> = self
            .apply_masked(vw, vb, Some(active))
            .into_iter()
            .map(|x| 2.0 * self.c * x)
            .collect();
        let (mut hw, hb) = self.apply_t(&coef);
        for (h, v) in hw.iter_mut().zip(vw) {
            *h += v;
        }
        (hw, hb)
    }

    fn preconditioner(&self, active: &[bool]) -> (Vec<f64>, f64) {
        let m = self.m();
        let mut acc = par::chunked_sum(self.exec, self.n(), POINT_CHUNK, m + 1, |range, acc| {
            for i in range {
                if active[i] {
                    for (a, x) in acc[..m].iter_mut().zip(self.data.row(i)) {
                        *a += x * x;
                    }
                    acc[m] += 1.0;
                }
            }
        });
        let count = acc.pop().unwrap();
        let pw = acc.into_iter().map(|s| 1.0 + 2.0 * self.c * s).collect();
        let pb = if count > 0.0 { 2.0 * self.c * count } else { 1.0 };
        (pw, pb)
    }

    /// Preconditioned CG for `H d = −g`; returns the direction and the
    /// number of iterations used.
    fn newton_direction(&self, active: &[bool], gw: &[f64], gb: f64) -> (Vec<f64>, f64, usize) {
        let m = self.m();
        let (pw, pb) = self.preconditioner(active);
        let mut dw = vec![0.0; m];
        let mut db = 0.0;
        let mut rw: Vec<f64> = gw.iter().map(|g| -g).collect();
        let mut rb = -gb;
        let g_norm = (dot(gw, gw) + gb * gb).sqrt();
        let mut zw: Vec<f64> = rw.iter().zip(&pw).map(|(r, p)| r / p).collect();
        let mut zb = rb / pb;
        let mut sw = zw.clone();
        let mut sb = zb;
        let mut rz = dot(&rw, &zw) + rb * zb;
        let mut iters = 0;
        while iters < MAX_CG_ITERS {
            if (dot(&rw, &rw) + rb * rb).sqrt() <= CG_RELATIVE_TOL * g_norm {
                break;
            }
            iters += 1;
            let (hw, hb) = self.hess_vec(active, &sw, sb);
            let curvature = dot(&sw, &hw) + sb * hb;
            if curvature <= 0.0 {
                break;
            }
            let alpha = rz / curvature;
            for ((d, r), (s, h)) in dw.iter_mut().zip(rw.iter_mut()).zip(sw.iter().zip(&hw)) {
                *d += alpha * s;
                *r -= alpha * h;
            }
            db += alpha * sb;
            rb -= alpha * hb;
            for ((z, r), p) in zw.iter_mut().zip(&rw).zip(&pw) {
                *z = r / p;
            }
            zb = rb / pb;
            let rz_new = dot(&rw, &zw) + rb * zb;
            let beta = rz_new / rz;
            rz = rz_new;
            for (s, z) in sw.iter_mut().zip(&zw) {
                *s = z + beta * *s;
            }
            sb = zb + beta * sb;
        }
        if iters == 0 && dw.iter().all(|&x| x == 0.0) {
            // residual already small: fall back to the preconditioned gradient step
            return (zw, zb, 0);
        }
        (dw, db, iters)
    }
}

/// Exact minimizer over `t ≥ 0` of the objective along a direction.
///
/// `margins[i] = 1 − y_i o_i`, `slopes[i] = y_i e_i` with `e = X d_w + d_b`.
fn line_search(w_dot_d: f64, d_norm2: f64, c: f64, margins: &[f64], slopes: &[f64]) -> f64 {
    let mut alpha = w_dot_d;
    let mut beta = d_norm2;
    let mut breaks = Vec::new();
    for (&a, &s) in margins.iter().zip(slopes) {
        let active = a > 0.0 || (a == 0.0 && s < 0.0);
        if active {
            alpha -= 2.0 * c * s * a;
            beta += 2.0 * c * s * s;
        }
        if s != 0.0 {
            let t = a / s;
            if t > 0.0 {
                breaks.push((t, a, s));
            }
        }
    }
    breaks.sort_by(|x, y| x.0.total_cmp(&y.0));
    for (t, a, s) in breaks {
        if beta > 0.0 && -alpha / beta <= t {
            return (-alpha / beta).max(0.0);
        }
        if s > 0.0 {
            // leaves the violator set
            alpha += 2.0 * c * s * a;
            beta -= 2.0 * c * s * s;
        } else {
            alpha -= 2.0 * c * s * a;
            beta += 2.0 * c * s * s;
        }
    }
    if beta > 0.0 {
        (-alpha / beta).max(0.0)
    } else {
        0.0
    }
}

pub fn train(data: &LabeledFeatures<'_>, params: &TrainParams) -> Result<LinearModel> {
    if !(params.reg_c > 0.0 && params.reg_c.is_finite()) {
        return Err(Error::InvalidParameter(format!("C = {} must be positive", params.reg_c)));
    }
    if params.tol.is_nan() || params.tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tol = {} must be positive", params.tol)));
    }
    data.validate_for_training()?;
    let problem = Problem {
        data,
        c: params.reg_c,
        exec: params.execution,
    };
    let m = problem.m();
    let mut w = vec![0.0; m];
    let mut b = 0.0;
    let mut outputs = vec![0.0; problem.n()];
    let mut objective = problem.objective(&w, &outputs);
    let mut trace = vec![objective];
    let mut converged = false;
    let mut iters = 0;

    while iters < params.max_iters {
        let active = problem.active(&outputs);
        let (gw, gb) = problem.gradient(&w, &outputs, &active);
        if (dot(&gw, &gw) + gb * gb).sqrt() <= 1e-12 * (1.0 + objective) {
            converged = true;
            break;
        }
        let (dw, db, cg_iters) = problem.newton_direction(&active, &gw, gb);
        let e = problem.apply(&dw, db);
        let margins: Vec<f64> = outputs.iter().zip(&data.labels).map(|(o, y)| 1.0 - y * o).collect();
        let slopes: Vec<f64> = e.iter().zip(&data.labels).map(|(x, y)| y * x).collect();
        let step = line_search(dot(&w, &dw), dot(&dw, &dw), problem.c, &margins, &slopes);
        iters += 1;
        let new_w: Vec<f64> = w.iter().zip(&dw).map(|(x, d)| x + step * d).collect();
        let new_b = b + step * db;
        let new_outputs: Vec<f64> = outputs.iter().zip(&e).map(|(o, x)| o + step * x).collect();
        let new_objective = problem.objective(&new_w, &new_outputs);
        log::debug!("newton iter {iters}: objective {new_objective:.6e}, step {step:.3e}, cg {cg_iters}");
        if new_objective.is_nan() || new_objective > objective {
            // rounding-level increase; keep the current iterate
            trace.push(objective);
            converged = true;
            break;
        }
        let decrease = (objective - new_objective) / objective.max(f64::MIN_POSITIVE);
        w = new_w;
        b = new_b;
        outputs = new_outputs;
        objective = new_objective;
        trace.push(objective);
        if decrease < params.tol {
            converged = true;
            break;
        }
    }

    Ok(LinearModel {
        version: MODEL_FORMAT_VERSION,
        weights: w,
        bias: b,
        reg_c: params.reg_c,
        tol: params.tol,
        max_iters: params.max_iters,
        training_iters: iters,
        final_objective: objective,
        converged,
        objective_trace: trace,
    })
}

/// Labels for the columns of an `M × N` matrix; ties go to +1.
pub fn predict(model: &LinearModel, features: ArrayView2<'_, f64>) -> Result<Vec<i8>> {
    if features.nrows() != model.weights.len() {
        return Err(Error::DimensionMismatch {
            expected: model.weights.len(),
            actual: features.nrows(),
        });
    }
    Ok(features
        .columns()
        .into_iter()
        .map(|x| if model.decision(x) >= 0.0 { 1 } else { -1 })
        .collect())
}

pub fn accuracy(predicted: &[i8], actual: &[i8]) -> Result<f64> {
    if predicted.len() != actual.len() {
        return Err(Error::DimensionMismatch {
            expected: actual.len(),
            actual: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Err(Error::InvalidData("accuracy of an empty set".into()));
    }
    let hits = predicted.iter().zip(actual).filter(|(p, a)| p == a).count();
    Ok(hits as f64 / actual.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{arr2, Array2};
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn fit(x: &Array2<f64>, y: &[i8], c: f64) -> LinearModel {
        let data = LabeledFeatures::new(x.view(), y).unwrap();
        train(
            &data,
            &TrainParams {
                reg_c: c,
                tol: 1e-10,
                ..TrainParams::default()
            },
        )
        .unwrap()
    }

    fn blobs(n: usize, sep: f64, seed: u64) -> (Array2<f64>, Vec<i8>) {
        let mut r = crate::rng::stream(seed);
        let mut x = Array2::zeros((2, n));
        let mut y = Vec::with_capacity(n);
        for j in 0..n {
            let label = if j % 2 == 0 { 1 } else { -1 };
            let centre = label as f64 * sep / 2.0;
            x[[0, j]] = centre + r.sample::<f64, _>(StandardNormal);
            x[[1, j]] = r.sample::<f64, _>(StandardNormal);
            y.push(label);
        }
        (x, y)
    }

    #[test]
    fn two_point_problem() {
        let x = arr2(&[[1.0, -1.0]]);
        let y = [1, -1];
        let m = fit(&x, &y, 1.0);
        let pred = predict(&m, x.view()).unwrap();
        assert_eq!(accuracy(&pred, &y).unwrap(), 1.0);
        // boundary −b/w strictly between the points
        let boundary = -m.bias / m.weights[0];
        assert!(boundary > -1.0 && boundary < 1.0);
        // by symmetry b = 0; minimizing ½w² + 2C(1 − w)² gives w = 4C/(1 + 4C)
        assert!(m.bias.abs() < 1e-9);
        assert!((m.weights[0] - 0.8).abs() < 1e-9, "{}", m.weights[0]);
    }

    #[test]
    fn duplicating_points_is_doubling_c() {
        let (x, y) = blobs(60, 2.0, 4);
        let mut x2 = Array2::zeros((2, 120));
        let mut y2 = Vec::new();
        for (j, &label) in y.iter().enumerate() {
            x2.column_mut(2 * j).assign(&x.column(j));
            x2.column_mut(2 * j + 1).assign(&x.column(j));
            y2.extend([label, label]);
        }
        let a = fit(&x, &y, 1.0);
        let b = fit(&x2, &y2, 0.5);
        for (p, q) in a.weights.iter().zip(&b.weights) {
            assert!((p - q).abs() < 1e-6);
        }
        assert!((a.bias - b.bias).abs() < 1e-6);
        // same C on duplicated data still gives the same labels here
        let c = fit(&x2, &y2, 1.0);
        assert_eq!(predict(&a, x.view()).unwrap(), predict(&c, x.view()).unwrap());
    }

    #[test]
    fn separated_blobs() {
        let (x, y) = blobs(200, 6.0, 1);
        let m = fit(&x, &y, 1.0);
        let pred = predict(&m, x.view()).unwrap();
        assert!(accuracy(&pred, &y).unwrap() >= 0.99);
    }

    #[test]
    fn objective_is_monotone() {
        let (x, y) = blobs(300, 1.0, 2);
        let m = fit(&x, &y, 50.0);
        for w in m.objective_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{:?}", m.objective_trace);
        }
        assert!(m.final_objective.is_finite() && m.final_objective >= 0.0);
        assert!(m.converged);
    }

    #[test]
    fn gradient_vanishes_at_solution() {
        let (x, y) = blobs(100, 1.5, 3);
        let m = fit(&x, &y, 2.0);
        let data = LabeledFeatures::new(x.view(), &y).unwrap();
        let p = Problem {
            data: &data,
            c: 2.0,
            exec: Execution::Sequential,
        };
        let norm = |w: &[f64], b: f64| {
            let o = p.apply(w, b);
            let (gw, gb) = p.gradient(w, &o, &p.active(&o));
            (dot(&gw, &gw) + gb * gb).sqrt()
        };
        let start = norm(&[0.0, 0.0], 0.0);
        let end = norm(&m.weights, m.bias);
        assert!(end < 1e-6 * start, "{end} vs {start}");
    }

    #[test]
    fn deterministic_and_execution_independent() {
        let (x, y) = blobs(700, 1.0, 5);
        let data = LabeledFeatures::new(x.view(), &y).unwrap();
        let seq = TrainParams {
            execution: Execution::Sequential,
            ..TrainParams::default()
        };
        let par = TrainParams {
            execution: Execution::Parallel,
            ..TrainParams::default()
        };
        let a = train(&data, &seq).unwrap();
        assert_eq!(a, train(&data, &seq).unwrap());
        assert_eq!(a, train(&data, &par).unwrap());
    }

    #[test]
    fn training_errors() {
        let x = arr2(&[[1.0, 2.0]]);
        let single = LabeledFeatures::new(x.view(), &[1, 1]).unwrap();
        assert!(matches!(
            train(&single, &TrainParams::default()),
            Err(Error::InvalidData(_))
        ));
        let x = arr2(&[[1.0, f64::NAN]]);
        let nan = LabeledFeatures::new(x.view(), &[1, -1]).unwrap();
        assert!(train(&nan, &TrainParams::default()).is_err());
        assert!(LabeledFeatures::new(x.view(), &[1]).is_err());
        assert!(LabeledFeatures::new(x.view(), &[1, 0]).is_err());
    }

    fn model(weights: Vec<f64>, bias: f64) -> LinearModel {
        LinearModel {
            version: MODEL_FORMAT_VERSION,
            weights,
            bias,
            reg_c: 1.0,
            tol: 1e-4,
            max_iters: 10,
            training_iters: 0,
            final_objective: 0.0,
            converged: true,
            objective_trace: vec![],
        }
    }

    #[test]
    fn prediction_rules() {
        let m = model(vec![1.0, 0.0], 0.0);
        assert_eq!(predict(&m, arr2(&[[2.0], [5.0]]).view()).unwrap(), vec![1]);
        // tie goes to +1
        assert_eq!(predict(&m, arr2(&[[0.0], [5.0]]).view()).unwrap(), vec![1]);
        let m = model(vec![1.0, 0.0], -1.0);
        assert_eq!(predict(&m, arr2(&[[0.0], [0.0]]).view()).unwrap(), vec![-1]);
        assert!(predict(&m, arr2(&[[0.0]]).view()).is_err());
    }

    #[test]
    fn batch_equals_pointwise_and_scale_invariant() {
        let (x, _) = blobs(50, 1.0, 8);
        let m = model(vec![0.7, -0.4], 0.1);
        let batch = predict(&m, x.view()).unwrap();
        for (j, p) in batch.iter().enumerate() {
            let single = predict(&m, x.slice(ndarray::s![.., j..j + 1])).unwrap();
            assert_eq!(single[0], *p);
        }
        let scaled = model(vec![7.0, -4.0], 1.0);
        assert_eq!(predict(&scaled, x.view()).unwrap(), batch);
    }

    #[test]
    fn accuracy_values() {
        assert_eq!(accuracy(&[1, -1, 1], &[1, -1, 1]).unwrap(), 1.0);
        assert_eq!(accuracy(&[1, -1], &[-1, 1]).unwrap(), 0.0);
        assert_eq!(accuracy(&[1, 1, 1, -1], &[1, 1, 1, 1]).unwrap(), 0.75);
        assert!(accuracy(&[1], &[1, 1]).is_err());
        assert!(accuracy(&[], &[]).is_err());
    }

    #[test]
    fn line_search_on_one_dimensional_quadratic() {
        // ½(w + t)² with no violators: minimizer t = −w
        let t = line_search(-3.0, 1.0, 1.0, &[-1.0], &[0.0]);
        assert!((t - 3.0).abs() < 1e-12);
        // brute force check on a random instance
        let mut r = crate::rng::stream(4);
        let margins: Vec<f64> = (0..40).map(|_| r.random_range(-2.0..2.0)).collect();
        let slopes: Vec<f64> = (0..40).map(|_| r.random_range(-1.0..1.0)).collect();
        let (wd, dd, c) = (-0.7, 0.3, 0.8);
        let phi = |t: f64| {
            wd * t + 0.5 * dd * t * t
                + c * margins
                    .iter()
                    .zip(&slopes)
                    .map(|(a, s)| (a - t * s).max(0.0).powi(2))
                    .sum::<f64>()
        };
        let t = line_search(wd, dd, c, &margins, &slopes);
        let best = (0..200_000)
            .map(|i| i as f64 * 1e-4)
            .min_by(|a, b| phi(*a).total_cmp(&phi(*b)))
            .unwrap();
        assert!((t - best).abs() < 2e-4, "{t} vs {best}");
    }

    #[test]
    fn model_file_round_trip() {
        let (x, y) = blobs(40, 3.0, 9);
        let m = fit(&x, &y, 1.0);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("model.json");
        m.save(&p).unwrap();
        assert_eq!(LinearModel::load(&p).unwrap(), m);
    }
}
