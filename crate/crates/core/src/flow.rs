//! ODE integration of a symmetrized field: forward and inverse plane
//! diffeomorphisms, log-density transport, and reverse-mode gradients through
//! the unrolled fixed-step RK4 scheme.
//!
//! The reverse pass differentiates the *discrete* integrator (checkpointed
//! states, stages recomputed), so gradient checks hold to finite-difference
//! tolerance at the discrete level independent of step size.

use crate::field::{FieldGrad, SymmetrizedField};
use crate::geom::{Point2, Vec2};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("state left the finite range at step {step} ({x}, {y})")]
    NonFiniteState { step: usize, x: f64, y: f64 },
    #[error("trajectory has {got} states but config wants {want}")]
    ShapeMismatch { got: usize, want: usize },
}

/// Integration scheme. Fixed-step RK4 only; the enum leaves room for more.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
    pub scheme: Scheme,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            t0: 0.0,
            t1: 1.0,
            steps: 32,
            scheme: Scheme::Rk4,
        }
    }
}

impl IntegratorConfig {
    pub fn new(steps: usize) -> Self {
        IntegratorConfig {
            steps,
            ..Default::default()
        }
    }

    fn step_forward(&self) -> f64 {
        (self.t1 - self.t0) / self.steps as f64
    }
}

/// Anything the integrator can flow along.
pub trait Flowable {
    fn velocity(&self, p: Point2) -> Vec2;
    fn velocity_divergence(&self, p: Point2) -> f64;
}

impl Flowable for SymmetrizedField {
    fn velocity(&self, p: Point2) -> Vec2 {
        self.eval(p)
    }
    fn velocity_divergence(&self, p: Point2) -> f64 {
        self.divergence(p)
    }
}

const STATE_LIMIT: f64 = 1e6;

fn check_state(p: Point2, step: usize) -> Result<(), FlowError> {
    if !p.is_finite() || p.x.abs() > STATE_LIMIT || p.y.abs() > STATE_LIMIT {
        Err(FlowError::NonFiniteState {
            step,
            x: p.x,
            y: p.y,
        })
    } else {
        Ok(())
    }
}

/// Checkpointed integration states. `states[0]` is the initial condition;
/// `logdet`, when tracked, holds the accumulated log-density change at every
/// step boundary (so `logdet[0] = 0`).
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<Point2>,
    pub logdet: Option<Vec<f64>>,
    h: f64,
}

impl Trajectory {
    pub fn end(&self) -> Point2 {
        *self.states.last().unwrap()
    }

    pub fn logdet_end(&self) -> f64 {
        self.logdet.as_ref().map(|l| *l.last().unwrap()).unwrap_or(0.0)
    }

    pub fn signed_step(&self) -> f64 {
        self.h
    }
}

fn rk4_run<F: Flowable>(
    field: &F,
    q: Point2,
    h: f64,
    steps: usize,
    with_logdet: bool,
) -> Result<Trajectory, FlowError> {
    check_state(q, 0)?;
    let mut states = Vec::with_capacity(steps + 1);
    states.push(q);
    let mut logdet = if with_logdet {
        let mut v = Vec::with_capacity(steps + 1);
        v.push(0.0);
        Some(v)
    } else {
        None
    };
    let mut y = q;
    let mut ell = 0.0;
    for n in 0..steps {
        let k1 = field.velocity(y);
        let z2 = y + k1 * (h / 2.0);
        let k2 = field.velocity(z2);
        let z3 = y + k2 * (h / 2.0);
        let k3 = field.velocity(z3);
        let z4 = y + k3 * h;
        let k4 = field.velocity(z4);
        if let Some(l) = logdet.as_mut() {
            let d1 = -field.velocity_divergence(y);
            let d2 = -field.velocity_divergence(z2);
            let d3 = -field.velocity_divergence(z3);
            let d4 = -field.velocity_divergence(z4);
            ell += h / 6.0 * (d1 + 2.0 * d2 + 2.0 * d3 + d4);
            l.push(ell);
        }
        y = y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        check_state(y, n + 1)?;
        states.push(y);
    }
    Ok(Trajectory { states, logdet, h })
}

/// Forward diffeomorphism `D(q)`.
pub fn integrate_forward<F: Flowable>(
    field: &F,
    q: Point2,
    cfg: &IntegratorConfig,
) -> Result<Point2, FlowError> {
    Ok(rk4_run(field, q, cfg.step_forward(), cfg.steps, false)?.end())
}

/// Inverse diffeomorphism `D⁻¹(q)`: integrates with reversed time.
pub fn integrate_inverse<F: Flowable>(
    field: &F,
    q: Point2,
    cfg: &IntegratorConfig,
) -> Result<Point2, FlowError> {
    Ok(rk4_run(field, q, -cfg.step_forward(), cfg.steps, false)?.end())
}

/// Forward map together with the log-density change
/// `Δlogp = -∫ tr(dV/dz) dt` along the trajectory.
pub fn integrate_with_logdensity<F: Flowable>(
    field: &F,
    q: Point2,
    cfg: &IntegratorConfig,
) -> Result<(Point2, f64), FlowError> {
    let t = rk4_run(field, q, cfg.step_forward(), cfg.steps, true)?;
    Ok((t.end(), t.logdet_end()))
}

/// Forward trajectory with checkpointed states for a later reverse pass.
pub fn forward_trajectory<F: Flowable>(
    field: &F,
    q: Point2,
    cfg: &IntegratorConfig,
    with_logdet: bool,
) -> Result<Trajectory, FlowError> {
    rk4_run(field, q, cfg.step_forward(), cfg.steps, with_logdet)
}

/// Inverse-direction trajectory (for losses built on `D⁻¹`).
pub fn inverse_trajectory<F: Flowable>(
    field: &F,
    q: Point2,
    cfg: &IntegratorConfig,
    with_logdet: bool,
) -> Result<Trajectory, FlowError> {
    rk4_run(field, q, -cfg.step_forward(), cfg.steps, with_logdet)
}

/// Exact reverse-mode sweep through a checkpointed RK4 trajectory.
///
/// `output_cotangent` is the loss gradient at the final state,
/// `logdet_cotangent` the loss gradient of the accumulated `Δlogp` (ignored
/// when the trajectory carries no log-density). Returns the cotangent at the
/// initial point and accumulates parameter gradients into `grad`.
pub fn backprop_trajectory(
    field: &SymmetrizedField,
    traj: &Trajectory,
    output_cotangent: Vec2,
    logdet_cotangent: f64,
    cfg: &IntegratorConfig,
    grad: &mut FieldGrad,
) -> Result<Vec2, FlowError> {
    if traj.states.len() != cfg.steps + 1 {
        return Err(FlowError::ShapeMismatch {
            got: traj.states.len(),
            want: cfg.steps + 1,
        });
    }
    let h = traj.h;
    let track_logdet = traj.logdet.is_some();
    let rho = if track_logdet { logdet_cotangent } else { 0.0 };
    let mut lambda = output_cotangent;

    for n in (0..cfg.steps).rev() {
        let y = traj.states[n];
        // Recompute the stages exactly as in the forward pass.
        let k1 = field.eval(y);
        let z2 = y + k1 * (h / 2.0);
        let k2 = field.eval(z2);
        let z3 = y + k2 * (h / 2.0);
        let k3 = field.eval(z3);
        let z4 = y + k3 * h;

        let c = [h / 6.0, h / 3.0, h / 3.0, h / 6.0];
        let mut dl_dy = lambda;

        // Stage 4.
        let dk4 = lambda * c[3];
        let mut dz4 = field.jacobian(z4).transpose().mul_vec(dk4);
        field.accum_vjp_eval(z4, dk4, grad);
        if rho != 0.0 {
            let e4 = rho * c[3];
            dz4 += field.divergence_gradient(z4) * (-e4);
            field.accum_vjp_divergence(z4, -e4, grad);
        }
        dl_dy += dz4;

        // Stage 3.
        let dk3 = lambda * c[2] + dz4 * h;
        let mut dz3 = field.jacobian(z3).transpose().mul_vec(dk3);
        field.accum_vjp_eval(z3, dk3, grad);
        if rho != 0.0 {
            let e3 = rho * c[2];
            dz3 += field.divergence_gradient(z3) * (-e3);
            field.accum_vjp_divergence(z3, -e3, grad);
        }
        dl_dy += dz3;

        // Stage 2.
        let dk2 = lambda * c[1] + dz3 * (h / 2.0);
        let mut dz2 = field.jacobian(z2).transpose().mul_vec(dk2);
        field.accum_vjp_eval(z2, dk2, grad);
        if rho != 0.0 {
            let e2 = rho * c[1];
            dz2 += field.divergence_gradient(z2) * (-e2);
            field.accum_vjp_divergence(z2, -e2, grad);
        }
        dl_dy += dz2;

        // Stage 1 (at y itself).
        let dk1 = lambda * c[0] + dz2 * (h / 2.0);
        let mut dz1 = field.jacobian(y).transpose().mul_vec(dk1);
        field.accum_vjp_eval(y, dk1, grad);
        if rho != 0.0 {
            let e1 = rho * c[0];
            dz1 += field.divergence_gradient(y) * (-e1);
            field.accum_vjp_divergence(y, -e1, grad);
        }
        dl_dy += dz1;

        lambda = dl_dy;
    }
    Ok(lambda)
}
