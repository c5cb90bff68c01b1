//! Geodesics of `dr² + dt²/h²`: numeric integration, the closed forms for
//! `h = 1/r` and `h = r`, lengths and boundary escape.
//!
//! A unit-speed geodesic is tracked as `(r, t, f, g)` where `(f, g)` is its
//! velocity in the orthonormal frame `(∂r, h∂t)`. The system is
//!
//! ```text
//! r' = f,  t' = h g,  f' = -g² H,  g' = f g H,    H = h'/h
//! ```
//!
//! which keeps `f² + g²` and `g/h` constant.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::ode::{integrate as integrate_ode, OdeOptions, OdeSystem, Stop};
use crate::warp::{Point, WarpFunction};

/// How close to the domain boundary a geodesic may get before it counts as escaped.
pub const ESCAPE_EPS: f64 = 1e-10;
/// Largest accepted `|f² + g² - 1|` for an initial state.
pub const UNIT_SPEED_TOL: f64 = 1e-6;

/// Orientation of a geodesic branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn of(x: f64) -> Self {
        if x < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// Position plus unit velocity in the orthonormal frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicState {
    pub r: f64,
    pub t: f64,
    /// Velocity along `∂r`.
    pub f: f64,
    /// Velocity along `h∂t`.
    pub g: f64,
}

impl GeodesicState {
    pub fn new(r: f64, t: f64, f: f64, g: f64) -> Self {
        Self { r, t, f, g }
    }

    /// Unit velocity at angle `angle` from `∂r` towards `h∂t`.
    ///
    /// Components below 1e-15 are snapped to zero, so `angle = π` is exactly
    /// the inward ray.
    pub fn from_angle(p: Point, angle: f64) -> Self {
        let snap = |x: f64| if x.abs() < 1e-15 { 0.0 } else { x };
        Self::new(p.r(), p.t(), snap(angle.cos()), snap(angle.sin()))
    }

    pub fn point(&self) -> Result<Point> {
        Point::new(self.r, self.t)
    }

    pub fn speed_defect(&self) -> f64 {
        (self.f * self.f + self.g * self.g - 1.0).abs()
    }

    fn to_array(self) -> [f64; 4] {
        [self.r, self.t, self.f, self.g]
    }

    fn from_array(y: [f64; 4]) -> Self {
        Self::new(y[0], y[1], y[2], y[3])
    }
}

/// `(r', t', f', g')` at `state`.
pub fn geodesic_field(warp: &WarpFunction, state: &GeodesicState) -> Result<[f64; 4]> {
    let jet = warp.jet(state.r)?;
    Ok(field_from(jet.h, jet.log_d, state))
}

fn field_from(h: f64, log_d: f64, s: &GeodesicState) -> [f64; 4] {
    [s.f, h * s.g, -s.g * s.g * log_d, s.f * s.g * log_d]
}

/// A sampled geodesic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicPath {
    /// `(s, state)` with `s` strictly increasing from 0.
    pub samples: Vec<(f64, GeodesicState)>,
    /// Integration stopped at the domain boundary.
    pub escaped: bool,
    /// Arc length covered. For escaped paths this is extrapolated from the
    /// last sample to the boundary itself.
    pub total_length: f64,
}

impl GeodesicPath {
    pub fn start(&self) -> &GeodesicState {
        &self.samples[0].1
    }

    pub fn end(&self) -> &GeodesicState {
        &self.samples.last().expect("paths are nonempty").1
    }

    pub fn end_point(&self) -> Result<Point> {
        self.end().point()
    }

    pub fn max_speed_defect(&self) -> f64 {
        self.samples.iter().map(|(_, st)| st.speed_defect()).fold(0.0, f64::max)
    }

    /// CSV with header `s,r,t,f,g`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,r,t,f,g\n");
        for (s, st) in &self.samples {
            let _ = writeln!(out, "{s:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", st.r, st.t, st.f, st.g);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicOptions {
    pub ode: OdeOptions,
    /// Project `(f, g)` back onto the unit circle after every step.
    pub renormalize: bool,
    pub escape_eps: f64,
}

impl Default for GeodesicOptions {
    fn default() -> Self {
        Self {
            ode: OdeOptions::default(),
            renormalize: false,
            escape_eps: ESCAPE_EPS,
        }
    }
}

impl GeodesicOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            ode: OdeOptions::with_tol(tol),
            ..Self::default()
        }
    }
}

struct Flow<'a> {
    warp: &'a WarpFunction,
    renormalize: bool,
}

impl OdeSystem<4> for Flow<'_> {
    fn rhs(&self, _s: f64, y: &[f64; 4]) -> Option<[f64; 4]> {
        if !self.warp.contains(y[0]) {
            return None;
        }
        let (h, log_d) = (self.warp.h_unchecked(y[0]), self.warp.log_d_unchecked(y[0]));
        let d = field_from(h, log_d, &GeodesicState::from_array(*y));
        d.iter().all(|v| v.is_finite()).then_some(d)
    }

    fn project(&self, y: &mut [f64; 4]) {
        if self.renormalize {
            let n = y[2].hypot(y[3]);
            y[2] /= n;
            y[3] /= n;
        }
    }
}

enum Halt {
    Boundary,
    Target,
}

/// Integrates a unit-speed geodesic from `init` for arc length `s_max`.
///
/// The initial velocity is normalized after checking it is within
/// [`UNIT_SPEED_TOL`] of unit length.
pub fn integrate(warp: &WarpFunction, init: GeodesicState, s_max: f64, opts: &GeodesicOptions) -> Result<GeodesicPath> {
    integrate_until(warp, init, s_max, opts, |_| false).map(|(path, _)| path)
}

/// Like [`integrate`], but also stops just before `target` first returns
/// true. The flag reports whether that happened.
pub fn integrate_until<F>(
    warp: &WarpFunction,
    init: GeodesicState,
    s_max: f64,
    opts: &GeodesicOptions,
    mut target: F,
) -> Result<(GeodesicPath, bool)>
where
    F: FnMut(&GeodesicState) -> bool,
{
    if !(s_max > 0.0) || !s_max.is_finite() {
        return Err(GeoError::InvalidParameter(format!("s_max = {s_max} must be positive")));
    }
    warp.domain().check(init.r)?;
    Point::new(init.r, init.t)?;
    let defect = init.speed_defect();
    if !(defect <= UNIT_SPEED_TOL) {
        return Err(GeoError::NonUnitSpeed(init.f.hypot(init.g)));
    }
    let n = init.f.hypot(init.g);
    let init = GeodesicState {
        f: init.f / n,
        g: init.g / n,
        ..init
    };

    let dom = warp.domain();
    let (lo, hi) = (dom.lo + opts.escape_eps, dom.hi - opts.escape_eps);
    let sys = Flow {
        warp,
        renormalize: opts.renormalize,
    };
    let traj = integrate_ode(&sys, 0.0, init.to_array(), s_max, &opts.ode, |_, y: &[f64; 4]| {
        if y[0] <= lo || y[0] >= hi {
            Some(Halt::Boundary)
        } else if target(&GeodesicState::from_array(*y)) {
            Some(Halt::Target)
        } else {
            None
        }
    })?;

    let samples: Vec<(f64, GeodesicState)> = traj
        .xs
        .iter()
        .zip(&traj.ys)
        .map(|(&s, &y)| (s, GeodesicState::from_array(y)))
        .collect();
    let (s_last, last) = *samples.last().expect("trajectory starts with the initial state");
    let (escaped, hit, total_length) = match traj.stop {
        Stop::Event(Halt::Boundary) | Stop::StepCollapse => {
            let gap = if last.f < 0.0 { last.r - dom.lo } else { dom.hi - last.r };
            let extra = if last.f != 0.0 && gap.is_finite() {
                gap / last.f.abs()
            } else {
                0.0
            };
            (true, false, s_last + extra)
        }
        Stop::Event(Halt::Target) => (false, true, s_last),
        Stop::Completed => (false, false, s_last),
        Stop::StepLimit => {
            return Err(GeoError::InvalidParameter(format!(
                "integrator step limit reached at s = {s_last}"
            )))
        }
    };
    Ok((
        GeodesicPath {
            samples,
            escaped,
            total_length,
        },
        hit,
    ))
}

/// Arc length of a unit-speed path.
pub fn path_length(path: &GeodesicPath) -> f64 {
    path.total_length
}

/// Trapezoidal `∫ |γ'| ds` over the samples, `|γ'|² = f² + g²`.
pub fn quadrature_length(path: &GeodesicPath) -> f64 {
    path.samples
        .windows(2)
        .map(|w| {
            let (s0, a) = w[0];
            let (s1, b) = w[1];
            0.5 * (s1 - s0) * (a.f.hypot(a.g) + b.f.hypot(b.g))
        })
        .sum()
}

/// Length of a geodesic before it leaves the domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EscapeLength {
    Finite(f64),
    ExceedsCap,
}

/// Follows `init` until it leaves the domain or reaches arc length `cap`.
pub fn escape_length(warp: &WarpFunction, init: GeodesicState, cap: f64) -> Result<EscapeLength> {
    let path = integrate(warp, init, cap, &GeodesicOptions::with_tol(1e-12))?;
    Ok(if path.escaped {
        EscapeLength::Finite(path.total_length)
    } else {
        EscapeLength::ExceedsCap
    })
}

/// Residual of the coordinate geodesic equations
/// `r'' = -H t'²/h²`, `t'' = 2 H r' t'` for a parametrized curve, using
/// central differences with spacing `step`.
pub fn coordinate_residual<C>(warp: &WarpFunction, curve: C, s: f64, step: f64) -> Result<f64>
where
    C: Fn(f64) -> Result<Point>,
{
    let (m, c, p) = (curve(s - step)?, curve(s)?, curve(s + step)?);
    let d1 = |a: f64, b: f64| (b - a) / (2.0 * step);
    let d2 = |a: f64, o: f64, b: f64| (a - 2.0 * o + b) / (step * step);
    let (rd, td) = (d1(m.r(), p.r()), d1(m.t(), p.t()));
    let (rdd, tdd) = (d2(m.r(), c.r(), p.r()), d2(m.t(), c.t(), p.t()));
    let jet = warp.jet(c.r())?;
    let res_r = rdd + jet.log_d * td * td / (jet.h * jet.h);
    let res_t = tdd - 2.0 * jet.log_d * rd * td;
    Ok(res_r.abs().max(res_t.abs()))
}

/// Closed-form geodesic of `dr² + r²dt²` (`h = 1/r`) through `(r0, t0)`:
/// `r = √(s² + 2as + r0²)`, `t = t0 ± θ(s)` with `θ` the continuous angle of
/// `(r0² + as, s√(r0² - a²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticGeodesicDS1 {
    r0: f64,
    t0: f64,
    a: f64,
    sign: Sign,
}

impl AnalyticGeodesicDS1 {
    pub fn new(r0: f64, t0: f64, a: f64, sign: Sign) -> Result<Self> {
        Point::new(r0, t0)?;
        if !(a.abs() < r0) {
            return Err(GeoError::InvalidParameter(format!(
                "shift a = {a} must lie in (-{r0}, {r0})"
            )));
        }
        Ok(Self { r0, t0, a, sign })
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    /// `r0² - a²`, the squared closest approach to the origin.
    pub fn beta(&self) -> f64 {
        (self.r0 - self.a) * (self.r0 + self.a)
    }

    pub fn initial_state(&self) -> GeodesicState {
        GeodesicState::new(
            self.r0,
            self.t0,
            self.a / self.r0,
            self.sign.value() * self.beta().sqrt() / self.r0,
        )
    }

    pub fn angle(&self, s: f64) -> f64 {
        (s * self.beta().sqrt()).atan2(self.r0 * self.r0 + self.a * s)
    }

    pub fn radius(&self, s: f64) -> f64 {
        (s * s + 2.0 * self.a * s + self.r0 * self.r0).sqrt()
    }

    pub fn eval(&self, s: f64) -> Point {
        Point::new(self.radius(s), self.t0 + self.sign.value() * self.angle(s))
            .expect("radius stays positive on the family")
    }

    /// Supremum of `|t - t0|` over `s ≥ 0`.
    pub fn angle_limit(&self) -> f64 {
        self.beta().sqrt().atan2(self.a)
    }
}

pub fn ds1_eval(geo: &AnalyticGeodesicDS1, s: f64) -> Point {
    geo.eval(s)
}

/// Closed-form geodesic of `dr² + dt²/r²` (`h = r`) through `(r0, t0)`:
/// `r = sin(θ)/b` with `θ = ±bs + arcsin(b r0)`, and `t` the exact
/// antiderivative of `t' = sin²(θ)/b`.
///
/// `radial_sign` picks whether `r` first grows or shrinks; `sign` is the
/// direction of travel in `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticGeodesicDS2 {
    r0: f64,
    t0: f64,
    b: f64,
    radial_sign: Sign,
    sign: Sign,
}

impl AnalyticGeodesicDS2 {
    pub fn new(r0: f64, t0: f64, b: f64, radial_sign: Sign, sign: Sign) -> Result<Self> {
        Point::new(r0, t0)?;
        if !(b > 0.0 && b * r0 <= 1.0) {
            return Err(GeoError::InvalidParameter(format!("b = {b} must lie in (0, 1/{r0}]")));
        }
        Ok(Self {
            r0,
            t0,
            b,
            radial_sign,
            sign,
        })
    }

    /// The member of the family leaving `(r0, t0)` at `angle` from `∂r`.
    /// Radial directions are not part of the family.
    pub fn from_angle(r0: f64, t0: f64, angle: f64) -> Result<Self> {
        let (g, f) = angle.sin_cos();
        if g == 0.0 {
            return Err(GeoError::InvalidParameter("radial directions have b = 0".into()));
        }
        let b = (g.abs() / r0).min(1.0 / r0);
        Self::new(r0, t0, b, Sign::of(f), Sign::of(g))
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn radial_sign(&self) -> Sign {
        self.radial_sign
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    fn phase0(&self) -> f64 {
        (self.b * self.r0).min(1.0).asin()
    }

    fn phase(&self, s: f64) -> f64 {
        self.radial_sign.value() * self.b * s + self.phase0()
    }

    /// Open interval of `s` on which `r(s) > 0`.
    pub fn arch(&self) -> (f64, f64) {
        let pi = std::f64::consts::PI;
        let (p0, b) = (self.phase0(), self.b);
        match self.radial_sign {
            Sign::Plus => (-p0 / b, (pi - p0) / b),
            Sign::Minus => ((p0 - pi) / b, p0 / b),
        }
    }

    pub fn initial_state(&self) -> GeodesicState {
        let p0 = self.phase0();
        GeodesicState::new(
            self.r0,
            self.t0,
            self.radial_sign.value() * p0.cos(),
            self.sign.value() * p0.sin(),
        )
    }

    pub fn radius(&self, s: f64) -> f64 {
        self.phase(s).sin() / self.b
    }

    pub fn time(&self, s: f64) -> f64 {
        let (b, sr) = (self.b, self.radial_sign.value());
        let (th, p0) = (self.phase(s), self.phase0());
        let swing = ((2.0 * th).sin() - (2.0 * p0).sin()) / (2.0 * b);
        self.t0 + self.sign.value() / (2.0 * b) * (s - sr * swing)
    }

    pub fn eval(&self, s: f64) -> Result<Point> {
        let (lo, hi) = self.arch();
        if !(lo < s && s < hi) {
            return Err(GeoError::InvalidParameter(format!(
                "s = {s} is outside the arch ({lo}, {hi})"
            )));
        }
        Point::new(self.radius(s), self.time(s))
    }
}

pub fn ds2_eval(geo: &AnalyticGeodesicDS2, s: f64) -> Result<Point> {
    geo.eval(s)
}
