use super::C64;
use crate::error::{Error, Result};

/// Uniform integration grid. `stride` controls how often samples are kept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub step: f64,
    pub stride: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, step: f64, stride: usize) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite() && step.is_finite()) {
            return Err(Error::InvalidInput("time grid bounds must be finite".into()));
        }
        if t_end < t_start || step <= 0.0 || stride == 0 {
            return Err(Error::InvalidInput(format!(
                "invalid time grid [{t_start}, {t_end}] step {step} stride {stride}"
            )));
        }
        let n = (t_end - t_start) / step;
        if (n - n.round()).abs() > 1e-6 * n.max(1.0) {
            return Err(Error::InvalidInput(format!(
                "time span {} is not a whole number of steps of {step}",
                t_end - t_start
            )));
        }
        Ok(Self { t_start, t_end, step, stride })
    }

    /// Grid over `[t_start, t_end]` whose step is the largest value not above
    /// `max_step` that divides the span exactly.
    pub fn covering(t_start: f64, t_end: f64, max_step: f64, stride: usize) -> Result<Self> {
        if max_step <= 0.0 || !max_step.is_finite() {
            return Err(Error::InvalidInput(format!("step must be positive, got {max_step}")));
        }
        let span = t_end - t_start;
        let n = (span / max_step).ceil().max(1.0);
        let step = if span > 0.0 { span / n } else { max_step };
        Self::new(t_start, t_end, step, stride)
    }

    pub fn n_steps(&self) -> usize {
        ((self.t_end - self.t_start) / self.step).round() as usize
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.n_steps() {
            self.t_end
        } else {
            self.t_start + k as f64 * self.step
        }
    }

    /// Step indices at which samples are recorded (always includes both ends).
    pub fn is_sample(&self, k: usize) -> bool {
        k % self.stride == 0 || k == self.n_steps()
    }
}

/// Classical fourth-order Runge-Kutta stepper for linear complex systems
/// `dy/dt = f(t, y)`, with reusable stage buffers.
#[derive(Debug, Clone)]
pub struct OdeState {
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
}

impl OdeState {
    pub fn new(len: usize) -> Self {
        let z = vec![C64::default(); len];
        Self { k1: z.clone(), k2: z.clone(), k3: z.clone(), k4: z.clone(), tmp: z }
    }

    /// Advances `y` from `t` to `t + dt`. `f(t, y, out)` must overwrite `out`.
    pub fn step<F>(&mut self, f: &mut F, t: f64, dt: f64, y: &mut [C64]) -> Result<()>
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        let n = y.len();
        debug_assert_eq!(n, self.k1.len());
        let h = C64::new(dt, 0.0);
        let half = C64::new(0.5 * dt, 0.0);

        f(t, y, &mut self.k1);
        for i in 0..n {
            self.tmp[i] = y[i] + half * self.k1[i];
        }
        f(t + 0.5 * dt, &self.tmp, &mut self.k2);
        for i in 0..n {
            self.tmp[i] = y[i] + half * self.k2[i];
        }
        f(t + 0.5 * dt, &self.tmp, &mut self.k3);
        for i in 0..n {
            self.tmp[i] = y[i] + h * self.k3[i];
        }
        f(t + dt, &self.tmp, &mut self.k4);

        let sixth = h / 6.0;
        let mut finite = true;
        for i in 0..n {
            y[i] += sixth * (self.k1[i] + 2.0 * (self.k2[i] + self.k3[i]) + self.k4[i]);
            finite &= y[i].re.is_finite() && y[i].im.is_finite();
        }
        if !finite {
            return Err(Error::NumericalBlowup { t: t + dt });
        }
        Ok(())
    }
}

/// Single RK4 step with freshly allocated stage buffers.
pub fn rk4_step<F>(mut generator: F, state: &mut [C64], t: f64, dt: f64) -> Result<()>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    if dt <= 0.0 {
        return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    OdeState::new(state.len()).step(&mut generator, t, dt, state)
}
