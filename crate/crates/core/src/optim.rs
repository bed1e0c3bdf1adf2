//! First-order optimization shared by the tile and density pipelines: Adam
//! with bias correction, plus simple learning-rate schedules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum OptimError {
    #[error("gradient length {got} does not match parameter length {want}")]
    ShapeMismatch { got: usize, want: usize },
}

#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(dim: usize, lr: f64) -> Self {
        AdamState {
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            t: 0,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    /// One Adam update, in place. Deterministic given state and gradient.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) -> Result<(), OptimError> {
        if grad.len() != self.m.len() || params.len() != self.m.len() {
            return Err(OptimError::ShapeMismatch {
                got: grad.len(),
                want: self.m.len(),
            });
        }
        self.t += 1;
        let b1t = 1.0 - self.beta1.powi(self.t as i32);
        let b2t = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            let mhat = self.m[i] / b1t;
            let vhat = self.v[i] / b2t;
            params[i] -= self.lr * mhat / (vhat.sqrt() + self.eps);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LrSchedule {
    Constant(f64),
    /// Linear interpolation from `from` to `to` over `horizon` steps,
    /// clamped at the final value afterwards.
    LinearRamp { from: f64, to: f64, horizon: u64 },
}

impl LrSchedule {
    pub fn at(&self, step: u64) -> f64 {
        match *self {
            LrSchedule::Constant(lr) => lr,
            LrSchedule::LinearRamp { from, to, horizon } => {
                if horizon == 0 || step >= horizon {
                    to
                } else {
                    from + (to - from) * step as f64 / horizon as f64
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params() {
        let mut adam = AdamState::new(3, 0.1);
        let mut p = vec![1.0, -2.0, 0.5];
        adam.step(&mut p, &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(p, vec![1.0, -2.0, 0.5]);
    }

    #[test]
    fn first_step_is_signed_lr() {
        let mut adam = AdamState::new(2, 0.01);
        let mut p = vec![0.0, 0.0];
        adam.step(&mut p, &[3.0, -0.004]).unwrap();
        // Bias-corrected first step approaches -lr * sign(g).
        assert!((p[0] + 0.01).abs() < 1e-6);
        assert!((p[1] - 0.01).abs() < 1e-6);
    }

    #[test]
    fn quadratic_converges() {
        // Minimize f(x) = x² from x = 1 with lr 0.1: |x| <= 0.05 after 100 steps.
        let mut adam = AdamState::new(1, 0.1);
        let mut p = vec![1.0];
        for _ in 0..100 {
            let g = vec![2.0 * p[0]];
            adam.step(&mut p, &g).unwrap();
        }
        assert!(p[0].abs() <= 0.05, "{}", p[0]);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let mut adam = AdamState::new(2, 0.1);
        let mut p = vec![0.0, 0.0];
        assert!(adam.step(&mut p, &[1.0]).is_err());
    }

    #[test]
    fn gradient_scaling_invariance_first_step() {
        // With eps -> 0, scaling the gradient leaves the first update unchanged.
        let update = |g: f64| {
            let mut adam = AdamState::new(1, 0.05);
            adam.eps = 1e-16;
            let mut p = vec![0.0];
            adam.step(&mut p, &[g]).unwrap();
            p[0]
        };
        let u1 = update(1e-3);
        let u2 = update(10.0);
        assert!((u1 - u2).abs() < 1e-9);
    }

    #[test]
    fn schedules() {
        assert_eq!(LrSchedule::Constant(1e-2).at(12345), 1e-2);
        let ramp = LrSchedule::LinearRamp {
            from: 0.0,
            to: 1.0,
            horizon: 10,
        };
        assert!((ramp.at(5) - 0.5).abs() < 1e-15);
        assert_eq!(ramp.at(10), 1.0);
        assert_eq!(ramp.at(99), 1.0);
    }

    #[test]
    fn determinism() {
        let run = || {
            let mut adam = AdamState::new(2, 0.02);
            let mut p = vec![0.3, -0.4];
            for i in 0..50 {
                let g = vec![p[0] * 2.0 + i as f64 * 1e-3, p[1].sin()];
                adam.step(&mut p, &g).unwrap();
            }
            p
        };
        assert_eq!(run(), run());
    }
}
