//! Adaptive Dormand–Prince 5(4) integrator with event location.
//!
//! Events are detected on accepted steps and located by bisecting the step
//! size from the last accepted state, so the reported event state is an
//! ordinary RK step and needs no dense output.

use crate::error::{GeoError, Result};

/// Step-size control for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OdeOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub initial_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_step: f64::INFINITY,
            min_step: 1e-14,
            initial_step: None,
            max_steps: 2_000_000,
        }
    }
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            abs_tol: tol,
            rel_tol: tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.abs_tol > 0.0
            && self.rel_tol > 0.0
            && self.max_step > 0.0
            && self.min_step > 0.0
            && self.min_step < self.max_step
            && self.initial_step.is_none_or(|h| h > 0.0)
            && self.max_steps > 0;
        if ok {
            Ok(())
        } else {
            Err(GeoError::InvalidParameter(format!(
                "invalid integrator options {self:?}"
            )))
        }
    }
}

/// Why the integration stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stop<E> {
    /// Reached the requested end of the interval.
    Completed,
    /// An event fired; the last sample is the located event state.
    Event(E),
    /// The step size fell below `min_step` (typically a singularity).
    StepCollapse,
    /// Exceeded `max_steps`.
    StepLimit,
}

#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize, E> {
    pub xs: Vec<f64>,
    pub ys: Vec<[f64; N]>,
    pub stop: Stop<E>,
    pub rejected: usize,
}

impl<const N: usize, E> Trajectory<N, E> {
    pub fn last(&self) -> (f64, [f64; N]) {
        let i = self.xs.len() - 1;
        (self.xs[i], self.ys[i])
    }
}

/// A first-order system `y' = f(x, y)`.
///
/// `rhs` returns `None` when `y` lies where the field is undefined; the
/// integrator then retries with a smaller step.
pub trait OdeSystem<const N: usize> {
    fn rhs(&self, x: f64, y: &[f64; N]) -> Option<[f64; N]>;

    /// Optional projection applied to every accepted state.
    fn project(&self, _y: &mut [f64; N]) {}
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combine<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

/// One Dormand–Prince step; returns the 5th-order state and the scaled error norm.
fn dopri_step<const N: usize, S: OdeSystem<N>>(
    sys: &S,
    x: f64,
    y: &[f64; N],
    h: f64,
    opts: &OdeOptions,
) -> Option<([f64; N], f64)> {
    let k1 = sys.rhs(x, y)?;
    let k2 = sys.rhs(x + C2 * h, &combine(y, h, &[(A21, &k1)]))?;
    let k3 = sys.rhs(x + C3 * h, &combine(y, h, &[(A31, &k1), (A32, &k2)]))?;
    let k4 = sys.rhs(x + C4 * h, &combine(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
    let k5 = sys.rhs(
        x + C5 * h,
        &combine(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    )?;
    let k6 = sys.rhs(
        x + h,
        &combine(y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    )?;
    let y_new = combine(y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = sys.rhs(x + h, &y_new)?;
    let mut err = 0.0f64;
    for i in 0..N {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let scale = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
        err = err.max((e / scale).abs());
    }
    if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some((y_new, err))
}

fn initial_step<const N: usize, S: OdeSystem<N>>(sys: &S, x: f64, y: &[f64; N], span: f64, opts: &OdeOptions) -> f64 {
    if let Some(h) = opts.initial_step {
        return h.min(span);
    }
    let scale = |i: usize| opts.abs_tol + opts.rel_tol * y[i].abs();
    let f0 = sys.rhs(x, y).unwrap_or([0.0; N]);
    let d0 = (0..N).map(|i| (y[i] / scale(i)).abs()).fold(0.0, f64::max);
    let d1 = (0..N).map(|i| (f0[i] / scale(i)).abs()).fold(0.0, f64::max);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0.min(span).min(opts.max_step).max(opts.min_step * 10.0)
}

/// Integrates from `x0` towards `x_end` (either direction).
///
/// `check` is called on every accepted state; returning `Some(event)` stops
/// the integration after locating the first state where it fires.
pub fn integrate<const N: usize, S, C, E>(
    sys: &S,
    x0: f64,
    y0: [f64; N],
    x_end: f64,
    opts: &OdeOptions,
    mut check: C,
) -> Result<Trajectory<N, E>>
where
    S: OdeSystem<N>,
    C: FnMut(f64, &[f64; N]) -> Option<E>,
{
    opts.validate()?;
    let mut traj = Trajectory {
        xs: vec![x0],
        ys: vec![y0],
        stop: Stop::Completed,
        rejected: 0,
    };
    if let Some(e) = check(x0, &y0) {
        traj.stop = Stop::Event(e);
        return Ok(traj);
    }
    let dir = if x_end >= x0 { 1.0 } else { -1.0 };
    let mut x = x0;
    let mut y = y0;
    let mut h = initial_step(sys, x, &y, (x_end - x0).abs(), opts);
    let mut accepted = 0usize;

    loop {
        let remaining = (x_end - x) * dir;
        if remaining <= 0.0 {
            traj.stop = Stop::Completed;
            return Ok(traj);
        }
        if accepted >= opts.max_steps {
            traj.stop = Stop::StepLimit;
            return Ok(traj);
        }
        let mut hs = h.min(opts.max_step);
        let last = hs >= remaining * (1.0 - 1e-12);
        if last {
            hs = remaining;
        }
        let Some((mut y_new, err)) = dopri_step(sys, x, &y, dir * hs, opts) else {
            traj.rejected += 1;
            h = hs * 0.5;
            if h < opts.min_step {
                traj.stop = Stop::StepCollapse;
                return Ok(traj);
            }
            continue;
        };
        if err > 1.0 {
            traj.rejected += 1;
            h = hs * (0.9 * err.powf(-0.2)).max(0.2);
            if h < opts.min_step {
                traj.stop = Stop::StepCollapse;
                return Ok(traj);
            }
            continue;
        }
        sys.project(&mut y_new);
        let x_new = if last { x_end } else { x + dir * hs };
        if let Some(first) = check(x_new, &y_new) {
            let event = locate_event(sys, x, &y, hs, dir, opts, &mut check, first, &mut traj);
            traj.stop = Stop::Event(event);
            return Ok(traj);
        }
        x = x_new;
        y = y_new;
        traj.xs.push(x);
        traj.ys.push(y);
        accepted += 1;
        let grow = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h = hs * grow;
    }
}

/// Bisects the step size in `(0, hs)` for the last state before the event
/// fires and appends it to the trajectory.
#[allow(clippy::too_many_arguments)]
fn locate_event<const N: usize, S, C, E>(
    sys: &S,
    x: f64,
    y: &[f64; N],
    hs: f64,
    dir: f64,
    opts: &OdeOptions,
    check: &mut C,
    first: E,
    traj: &mut Trajectory<N, E>,
) -> E
where
    S: OdeSystem<N>,
    C: FnMut(f64, &[f64; N]) -> Option<E>,
{
    let mut lo = 0.0;
    let mut hi = hs;
    let mut best: Option<(f64, [f64; N])> = None;
    let mut event = first;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match dopri_step(sys, x, y, dir * mid, opts) {
            Some((mut ym, _)) => {
                sys.project(&mut ym);
                let xm = x + dir * mid;
                match check(xm, &ym) {
                    None => {
                        lo = mid;
                        best = Some((xm, ym));
                    }
                    Some(e) => {
                        hi = mid;
                        event = e;
                    }
                }
            }
            None => hi = mid,
        }
    }
    if let Some((xb, yb)) = best {
        traj.xs.push(xb);
        traj.ys.push(yb);
    }
    event
}
