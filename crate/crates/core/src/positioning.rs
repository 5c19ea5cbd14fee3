//! Range-based multilateration.
//!
//! [`linear_init`] linearises the squared-range equations by differencing against the
//! first anchor and solves the resulting least-squares system in closed form.
//! [`ml_position`] then minimises the weighted range residual
//! `Σ_i w_i (d̂_i − ‖x − x_i‖)²` by Gauss-Newton with step halving.

use nalgebra::{DMatrix, DVector};

use crate::estimation::RangeMeasurement;
use crate::geometry::Vec3;
use crate::{Error, Result};

pub const DEFAULT_MAX_ITERS: usize = 50;
pub const DEFAULT_TOL: f64 = 1e-9;
const ANCHOR_NUDGE: f64 = 1e-6;
const ANCHOR_COLLISION: f64 = 1e-9;
const RANK_TOL: f64 = 1e-10;

/// Reference node with a known position.
#[derive(Debug, Clone, PartialEq)]
pub struct Anchor {
    pub id: String,
    pub position: Vec3,
}

impl Anchor {
    pub fn new(id: impl Into<String>, position: Vec3) -> Self {
        Self {
            id: id.into(),
            position,
        }
    }
}

/// Solve space. `Planar` estimates `(x, y)` with the device height fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dim {
    Planar { height: f64 },
    Spatial,
}

impl Dim {
    pub fn count(self) -> usize {
        match self {
            Dim::Planar { .. } => 2,
            Dim::Spatial => 3,
        }
    }

    fn embed(self, v: &DVector<f64>) -> Vec3 {
        match self {
            Dim::Planar { height } => Vec3::new(v[0], v[1], height),
            Dim::Spatial => Vec3::new(v[0], v[1], v[2]),
        }
    }

    fn project(self, p: Vec3) -> DVector<f64> {
        DVector::from_iterator(self.count(), (0..self.count()).map(|i| p[i]))
    }
}

/// Outcome of the iterative solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionEstimate {
    pub position: Vec3,
    /// Final weighted residual cost.
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Closed-form initial position from squared-range differences.
pub fn linear_init(measurements: &[(RangeMeasurement, Anchor)], dim: Dim) -> Result<Vec3> {
    let d = dim.count();
    if measurements.len() < d + 1 {
        return Err(Error::RankDeficient);
    }
    // In the planar case the known height difference is removed from each range first.
    let horiz_sq = |(m, a): &(RangeMeasurement, Anchor)| match dim {
        Dim::Planar { height } => m.distance.powi(2) - (height - a.position.z).powi(2),
        Dim::Spatial => m.distance.powi(2),
    };
    let (ref0, a0) = (&measurements[0], measurements[0].1.position);
    let r0 = horiz_sq(ref0);
    let sq = |p: Vec3| (0..d).map(|i| p[i] * p[i]).sum::<f64>();

    let rows = measurements.len() - 1;
    let mut a = DMatrix::<f64>::zeros(rows, d);
    let mut b = DVector::<f64>::zeros(rows);
    for (k, m) in measurements[1..].iter().enumerate() {
        let ai = m.1.position;
        for j in 0..d {
            a[(k, j)] = 2.0 * (ai[j] - a0[j]);
        }
        b[k] = r0 - horiz_sq(m) + sq(ai) - sq(a0);
    }

    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smax > 0.0) || smin / smax < RANK_TOL {
        return Err(Error::RankDeficient);
    }
    let x = svd
        .solve(&b, RANK_TOL * smax)
        .map_err(|_| Error::RankDeficient)?;
    Ok(dim.embed(&x))
}

/// Stopping rules and solve space for [`ml_position`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub dim: Dim,
    pub max_iters: usize,
    /// Threshold on the gradient norm of the weight-normalised cost.
    pub tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            dim: Dim::Spatial,
            max_iters: DEFAULT_MAX_ITERS,
            tol: DEFAULT_TOL,
        }
    }
}

/// Inverse-variance weights `1/σ_i²`.
pub fn inverse_variance_weights(measurements: &[(RangeMeasurement, Anchor)]) -> Vec<f64> {
    measurements
        .iter()
        .map(|(m, _)| 1.0 / (m.sigma * m.sigma))
        .collect()
}

fn cost(measurements: &[(RangeMeasurement, Anchor)], weights: &[f64], x: Vec3) -> f64 {
    measurements
        .iter()
        .zip(weights)
        .map(|((m, a), w)| w * (m.distance - x.distance(a.position)).powi(2))
        .sum()
}

/// Weighted Gauss-Newton refinement of the maximum-likelihood position.
///
/// Weights are normalised to unit sum internally, so scaling all of them by a common
/// factor leaves the iterate sequence unchanged. Non-convergence is reported through
/// `converged = false`.
pub fn ml_position(
    measurements: &[(RangeMeasurement, Anchor)],
    weights: &[f64],
    init: Vec3,
    opts: &SolverOptions,
) -> Result<PositionEstimate> {
    let d = opts.dim.count();
    if measurements.len() < d {
        return Err(Error::RankDeficient);
    }
    if weights.len() != measurements.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} measurements",
            weights.len(),
            measurements.len()
        )));
    }
    if !init.is_finite() || weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
        return Err(Error::InvalidConfig(
            "initial point and weights must be finite, weights positive".into(),
        ));
    }
    let wsum: f64 = weights.iter().sum();
    let w: Vec<f64> = weights.iter().map(|x| x / wsum).collect();

    let mut x = match opts.dim {
        Dim::Planar { height } => Vec3::new(init.x, init.y, height),
        Dim::Spatial => init,
    };
    let mut c = cost(measurements, &w, x);
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iters {
        // Jacobian of the predicted ranges and residuals
        if measurements
            .iter()
            .any(|(_, a)| x.distance(a.position) < ANCHOR_COLLISION)
        {
            // the range Jacobian is undefined on an anchor
            x.x += ANCHOR_NUDGE;
            c = cost(measurements, &w, x);
        }
        let n = measurements.len();
        let mut jac = DMatrix::<f64>::zeros(n, d);
        let mut res = DVector::<f64>::zeros(n);
        for (i, (m, a)) in measurements.iter().enumerate() {
            let diff = x - a.position;
            let r = diff.norm();
            for j in 0..d {
                jac[(i, j)] = diff[j] / r;
            }
            res[i] = m.distance - r;
        }
        let wj = DMatrix::from_fn(n, d, |i, j| w[i] * jac[(i, j)]);
        let jtwj = jac.transpose() * &wj;
        let jtwr = wj.transpose() * &res;
        // gradient of the normalised cost is −2 Jᵀ W r
        if 2.0 * jtwr.norm() < opts.tol {
            converged = true;
            break;
        }
        let Some(step) = jtwj.clone().cholesky().map(|ch| ch.solve(&jtwr)) else {
            break;
        };
        iterations += 1;

        let base = opts.dim.project(x);
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let candidate = opts.dim.embed(&(&base + &step * scale));
            let cc = cost(measurements, &w, candidate);
            if cc <= c {
                accepted = Some((candidate, cc));
                break;
            }
            scale *= 0.5;
        }
        let Some((next, next_cost)) = accepted else {
            break;
        };
        let moved = next.distance(x);
        x = next;
        c = next_cost;
        if moved <= 1e-15 * (1.0 + x.norm()) {
            break;
        }
    }

    if !converged {
        // final gradient check after the last accepted step
        converged = gradient_norm(measurements, &w, x, opts.dim) < opts.tol;
    }
    Ok(PositionEstimate {
        position: x,
        cost: cost(measurements, weights, x),
        iterations,
        converged,
    })
}

fn gradient_norm(measurements: &[(RangeMeasurement, Anchor)], w: &[f64], x: Vec3, dim: Dim) -> f64 {
    let d = dim.count();
    let mut g = vec![0.0; d];
    for ((m, a), wi) in measurements.iter().zip(w) {
        let diff = x - a.position;
        let r = diff.norm();
        if r == 0.0 {
            continue;
        }
        for j in 0..d {
            g[j] += -2.0 * wi * (m.distance - r) * diff[j] / r;
        }
    }
    g.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Range-only position CRB: `FIM = Σ_i (1/σ_i²) u_i u_iᵀ` over unit vectors from the
/// anchors to `point`. Returns `√trace(FIM⁻¹)`, or `+∞` when the FIM is singular.
pub fn position_crb(anchors: &[Anchor], sigmas: &[f64], point: Vec3, dim: Dim) -> f64 {
    let d = dim.count();
    let mut fim = DMatrix::<f64>::zeros(d, d);
    for (a, s) in anchors.iter().zip(sigmas) {
        let Some(u) = (point - a.position).normalized() else {
            continue;
        };
        for i in 0..d {
            for j in 0..d {
                fim[(i, j)] += u[i] * u[j] / (s * s);
            }
        }
    }
    match fim.try_inverse() {
        Some(inv) => inv.trace().max(0.0).sqrt(),
        None => f64::INFINITY,
    }
}
