//! Adam and step schedules.

use crate::error::{Error, Result};

/// Bias-corrected Adam over a flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub params: Vec<f64>,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    /// Default moments `β1 = 0.5`, `β2 = 0.95`, `eps = 1e-8`.
    pub fn new(params: Vec<f64>, lr: f64) -> Self {
        let n = params.len();
        Self {
            params,
            m: vec![0.0; n],
            v: vec![0.0; n],
            step: 0,
            lr,
            beta1: 0.5,
            beta2: 0.95,
            eps: 1e-8,
        }
    }

    pub fn with_betas(mut self, beta1: f64, beta2: f64) -> Self {
        self.beta1 = beta1;
        self.beta2 = beta2;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0) || !self.lr.is_finite() {
            return Err(Error::config(format!(
                "learning rate must be > 0, got {}",
                self.lr
            )));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::config(format!("{name} must be in [0, 1), got {b}")));
            }
        }
        if !(self.eps > 0.0) {
            return Err(Error::config(format!("eps must be > 0, got {}", self.eps)));
        }
        Ok(())
    }

    /// One update. The state is untouched when an error is returned.
    pub fn step(&mut self, grads: &[f64]) -> Result<()> {
        if grads.len() != self.params.len() {
            return Err(Error::config(format!(
                "{} gradients for {} parameters",
                grads.len(),
                self.params.len()
            )));
        }
        if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient { index: i });
        }
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for i in 0..grads.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let mh = self.m[i] / c1;
            let vh = self.v[i] / c2;
            self.params[i] -= self.lr * mh / (vh.sqrt() + self.eps);
        }
        Ok(())
    }
}

/// Functional form of [`AdamState::step`].
pub fn adam_step(mut state: AdamState, grads: &[f64]) -> Result<AdamState> {
    state.step(grads)?;
    Ok(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    Constant,
    LogInterpolate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub kind: ScheduleKind,
    pub start: f64,
    pub end: f64,
    pub total_steps: u64,
}

impl Schedule {
    pub fn constant(value: f64, total_steps: u64) -> Self {
        Self {
            kind: ScheduleKind::Constant,
            start: value,
            end: value,
            total_steps,
        }
    }

    pub fn log(start: f64, end: f64, total_steps: u64) -> Self {
        Self {
            kind: ScheduleKind::LogInterpolate,
            start,
            end,
            total_steps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start > 0.0 && self.end > 0.0) {
            return Err(Error::config("schedule endpoints must be > 0"));
        }
        Ok(())
    }

    /// Value at `step`; log-linear between the endpoints.
    pub fn value(&self, step: u64) -> Result<f64> {
        self.validate()?;
        if step > self.total_steps {
            return Err(Error::config(format!(
                "step {step} beyond schedule length {}",
                self.total_steps
            )));
        }
        Ok(match self.kind {
            ScheduleKind::Constant => self.start,
            ScheduleKind::LogInterpolate => {
                if self.total_steps == 0 {
                    return Ok(self.start);
                }
                let f = step as f64 / self.total_steps as f64;
                if step == 0 {
                    self.start
                } else if step == self.total_steps {
                    self.end
                } else {
                    (self.start.ln() + f * (self.end.ln() - self.start.ln())).exp()
                }
            }
        })
    }
}

pub fn schedule_value(s: &Schedule, step: u64) -> Result<f64> {
    s.value(step)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params() {
        let mut s = AdamState::new(vec![1.0, -2.0], 0.1);
        s.step(&[0.0, 0.0]).unwrap();
        assert_eq!(s.params, vec![1.0, -2.0]);
        assert_eq!(s.step, 1);
    }

    #[test]
    fn first_steps_move_by_lr() {
        for g in [3.0, -0.01, 1e4] {
            let mut s = AdamState::new(vec![0.0], 0.1);
            s.step(&[g]).unwrap();
            let d = s.params[0];
            assert!((d + 0.1 * f64::signum(g)).abs() < 0.1 * 1e-6, "{g}: {d}");
            s.step(&[g]).unwrap();
            let d2 = s.params[0] - d;
            assert!((d2 + 0.1 * f64::signum(g)).abs() < 0.1 * 1e-6);
        }
    }

    #[test]
    fn non_finite_gradient_names_index() {
        let mut s = AdamState::new(vec![0.0; 3], 0.1);
        let before = s.clone();
        match s.step(&[0.0, 1.0, f64::NAN]) {
            Err(Error::NonFiniteGradient { index }) => assert_eq!(index, 2),
            other => panic!("{other:?}"),
        }
        assert_eq!(s, before);
    }

    #[test]
    fn log_schedule_endpoints_and_midpoint() {
        let s = Schedule::log(1e-1, 1e-7, 1000);
        assert_eq!(s.value(0).unwrap(), 1e-1);
        assert_eq!(s.value(1000).unwrap(), 1e-7);
        assert!((s.value(500).unwrap() / 1e-4 - 1.0).abs() < 1e-12);
        assert!(s.value(1001).is_err());
        let c = Schedule::constant(0.3, 10);
        assert!((0..=10).all(|k| c.value(k).unwrap() == 0.3));
    }
}
