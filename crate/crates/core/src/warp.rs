//! Warp functions and the Kähler geometry of `ds² = dr² + dt²/h²(r)` on the
//! right half plane.
//!
//! A [`WarpFunction`] is the only object needed to define a geometry. It
//! evaluates `h`, its first two derivatives and the logarithmic derivative
//! `H = h'/h` together with `H'` and `H²`, and it owns the open interval of
//! radii on which `h > 0`. All other operations in the crate go through it.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};

/// Default margin used when testing membership of the open domain.
pub const DOMAIN_MARGIN: f64 = 1e-12;

/// A point `(r, t)` of the half plane, `r > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPoint")]
pub struct Point {
    r: f64,
    t: f64,
}

#[derive(Deserialize)]
struct RawPoint {
    r: f64,
    t: f64,
}

impl TryFrom<RawPoint> for Point {
    type Error = GeoError;

    fn try_from(raw: RawPoint) -> Result<Self> {
        Point::new(raw.r, raw.t)
    }
}

impl Point {
    pub fn new(r: f64, t: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() || !t.is_finite() {
            return Err(GeoError::InvalidPoint(r));
        }
        Ok(Self { r, t })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Same radius, transverse coordinate shifted by `dt`.
    pub fn shifted(&self, dt: f64) -> Self {
        Self {
            r: self.r,
            t: self.t + dt,
        }
    }
}

/// A tangent vector in coordinate components `dr ∂_r + dt ∂_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangentVector {
    pub base: Point,
    pub dr: f64,
    pub dt: f64,
}

impl TangentVector {
    pub fn new(base: Point, dr: f64, dt: f64) -> Self {
        Self { base, dr, dt }
    }

    /// Builds a vector from its components in the orthonormal frame `(∂_r, T_h)`.
    pub fn from_frame(warp: &WarpFunction, base: Point, f: f64, g: f64) -> Result<Self> {
        let h = warp.h(base.r)?;
        Ok(Self::new(base, f, h * g))
    }

    /// Components `(f, g)` relative to the frame `(∂_r, T_h)`.
    pub fn frame(&self, warp: &WarpFunction) -> Result<(f64, f64)> {
        let h = warp.h(self.base.r)?;
        Ok((self.dr, self.dt / h))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::new(self.base, c * self.dr, c * self.dt)
    }
}

/// Components of a vector in the orthonormal frame: `radial ∂_r + transverse T_h`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FrameVector {
    pub radial: f64,
    pub transverse: f64,
}

impl FrameVector {
    pub const ZERO: FrameVector = FrameVector {
        radial: 0.0,
        transverse: 0.0,
    };

    pub fn new(radial: f64, transverse: f64) -> Self {
        Self { radial, transverse }
    }

    /// Inner product; the frame is orthonormal.
    pub fn dot(&self, other: &FrameVector) -> f64 {
        self.radial * other.radial + self.transverse * other.transverse
    }
}

/// Levi-Civita covariant derivatives of the frame fields at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConnectionCoeffs {
    /// `∇_{∂r} ∂r`
    pub radial_radial: FrameVector,
    /// `∇_{T} ∂r`
    pub frame_radial: FrameVector,
    /// `∇_{∂r} T`
    pub radial_frame: FrameVector,
    /// `∇_{T} T`
    pub frame_frame: FrameVector,
}

impl ConnectionCoeffs {
    /// `∇_X Y` for frame indices (0 = ∂r, 1 = T).
    pub fn covariant(&self, x: usize, y: usize) -> FrameVector {
        match (x, y) {
            (0, 0) => self.radial_radial,
            (1, 0) => self.frame_radial,
            (0, 1) => self.radial_frame,
            _ => self.frame_frame,
        }
    }
}

/// Open interval of admissible radii.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
    pub margin: f64,
}

impl Domain {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo < 0.0 || !(hi > lo) {
            return Err(GeoError::EmptyDomain(format!("({lo}, {hi})")));
        }
        Ok(Self {
            lo,
            hi,
            margin: DOMAIN_MARGIN,
        })
    }

    pub fn contains(&self, r: f64) -> bool {
        r > self.lo + self.margin && r < self.hi - self.margin
    }

    pub fn check(&self, r: f64) -> Result<()> {
        if self.contains(r) {
            Ok(())
        } else {
            Err(GeoError::OutsideDomain {
                r,
                lo: self.lo,
                hi: self.hi,
            })
        }
    }
}

/// Serializable description of a named warp function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WarpSpec {
    /// `h = 1/r`, the flat metric `dr² + r² dt²`.
    OneOverR,
    /// `h = r`, the metric `dr² + dt²/r²` of curvature `-2/r²`.
    R,
    /// `h = a0 / (a1 - r)`.
    Flat { a0: f64, a1: f64 },
    /// `h = c0 r / (c1 + c2 r³)`.
    Neg2 { c0: f64, c1: f64, c2: f64 },
    /// `h = e^r`, constant curvature `-1`.
    Exp,
}

impl fmt::Display for WarpSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WarpSpec::OneOverR => write!(f, "one_over_r"),
            WarpSpec::R => write!(f, "r"),
            WarpSpec::Flat { a0, a1 } => write!(f, "flat:{a0},{a1}"),
            WarpSpec::Neg2 { c0, c1, c2 } => write!(f, "neg2:{c0},{c1},{c2}"),
            WarpSpec::Exp => write!(f, "exp"),
        }
    }
}

impl FromStr for WarpSpec {
    type Err = GeoError;

    /// Parses `one_over_r`, `r`, `exp`, `flat:a0,a1` or `neg2:c0,c1,c2`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = match s.split_once(':') {
            Some((n, p)) => (n.trim(), Some(p)),
            None => (s.trim(), None),
        };
        let nums = |expected: usize| -> Result<Vec<f64>> {
            let p = params
                .ok_or_else(|| GeoError::InvalidParameter(format!("warp `{name}` needs {expected} parameters")))?;
            let v = p
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| GeoError::InvalidParameter(format!("warp parameters `{p}`: {e}")))?;
            if v.len() != expected {
                return Err(GeoError::InvalidParameter(format!(
                    "warp `{name}` needs {expected} parameters, got {}",
                    v.len()
                )));
            }
            Ok(v)
        };
        let bare = |spec: WarpSpec| {
            if params.is_some() {
                Err(GeoError::InvalidParameter(format!("warp `{name}` takes no parameters")))
            } else {
                Ok(spec)
            }
        };
        match name.to_ascii_lowercase().as_str() {
            "one_over_r" | "1/r" => bare(WarpSpec::OneOverR),
            "r" => bare(WarpSpec::R),
            "exp" => bare(WarpSpec::Exp),
            "flat" => {
                let v = nums(2)?;
                Ok(WarpSpec::Flat { a0: v[0], a1: v[1] })
            }
            "neg2" => {
                let v = nums(3)?;
                Ok(WarpSpec::Neg2 {
                    c0: v[0],
                    c1: v[1],
                    c2: v[2],
                })
            }
            other => Err(GeoError::InvalidParameter(format!("unknown warp `{other}`"))),
        }
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    OneOverR,
    R,
    Flat { a0: f64, a1: f64 },
    Neg2 { c0: f64, c1: f64, c2: f64 },
    Exp,
    Custom { h: ScalarFn, dh: ScalarFn, d2h: ScalarFn },
}

/// Values of `h` and its logarithmic derivative at one radius.
///
/// `log_d_sq` is `H²` evaluated in closed form alongside `H`, so that
/// `K = H' - H²` cancels exactly where the algebra says it should.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpJet {
    pub h: f64,
    pub dh: f64,
    pub d2h: f64,
    pub log_d: f64,
    pub log_d_prime: f64,
    pub log_d_sq: f64,
}

/// A positive warp function together with its domain.
#[derive(Clone)]
pub struct WarpFunction {
    kind: Kind,
    domain: Domain,
    spec: Option<WarpSpec>,
}

impl fmt::Debug for WarpFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WarpFunction")
            .field("name", &self.name())
            .field("domain", &self.domain)
            .finish()
    }
}

/// Builds the warp function named by `spec` on its maximal positive domain.
pub fn make_warp(spec: &WarpSpec) -> Result<WarpFunction> {
    let (kind, domain) = match *spec {
        WarpSpec::OneOverR => (Kind::OneOverR, Domain::new(0.0, f64::INFINITY)?),
        WarpSpec::R => (Kind::R, Domain::new(0.0, f64::INFINITY)?),
        WarpSpec::Exp => (Kind::Exp, Domain::new(0.0, f64::INFINITY)?),
        WarpSpec::Flat { a0, a1 } => (Kind::Flat { a0, a1 }, flat_domain(a0, a1)?),
        WarpSpec::Neg2 { c0, c1, c2 } => (Kind::Neg2 { c0, c1, c2 }, neg2_domain(c0, c1, c2)?),
    };
    Ok(WarpFunction {
        kind,
        domain,
        spec: Some(*spec),
    })
}

fn require_finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(GeoError::InvalidParameter(format!(
            "non-finite warp parameters {values:?}"
        )))
    }
}

/// `a0/(a1 - r) > 0` holds on one side of the pole `r = a1`.
fn flat_domain(a0: f64, a1: f64) -> Result<Domain> {
    require_finite(&[a0, a1])?;
    if a0 == 0.0 {
        return Err(GeoError::EmptyDomain("a0 = 0 gives h ≡ 0".into()));
    }
    if a0 > 0.0 {
        if a1 <= 0.0 {
            return Err(GeoError::EmptyDomain(format!(
                "a0 > 0 needs r < a1 = {a1}, which misses r > 0"
            )));
        }
        Domain::new(0.0, a1)
    } else {
        Domain::new(a1.max(0.0), f64::INFINITY)
    }
}

/// `c0 r/(c1 + c2 r³) > 0`: the denominator changes sign at most once on `r > 0`.
fn neg2_domain(c0: f64, c1: f64, c2: f64) -> Result<Domain> {
    require_finite(&[c0, c1, c2])?;
    if c0 == 0.0 {
        return Err(GeoError::EmptyDomain("c0 = 0 gives h ≡ 0".into()));
    }
    if c2 == 0.0 {
        if c1 == 0.0 || c0.signum() != c1.signum() {
            return Err(GeoError::EmptyDomain(format!("h = ({c0}/{c1}) r is not positive")));
        }
        return Domain::new(0.0, f64::INFINITY);
    }
    let root = (-c1 / c2).cbrt();
    let same = c0.signum() == c2.signum();
    if root <= 0.0 {
        if same {
            Domain::new(0.0, f64::INFINITY)
        } else {
            Err(GeoError::EmptyDomain(format!(
                "neg2:{c0},{c1},{c2} is negative for all r > 0"
            )))
        }
    } else if same {
        Domain::new(root, f64::INFINITY)
    } else {
        Domain::new(0.0, root)
    }
}

impl WarpFunction {
    /// A warp function from caller-supplied `h`, `h'`, `h''` on `(lo, hi)`.
    ///
    /// Positivity is checked on a sample of the interval.
    pub fn custom<H, D, D2>(h: H, dh: D, d2h: D2, lo: f64, hi: f64) -> Result<Self>
    where
        H: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
        D2: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let domain = Domain::new(lo, hi)?;
        for r in probe_radii(&domain) {
            let v = h(r);
            if !(v > 0.0) || !v.is_finite() {
                return Err(GeoError::NonPositiveWarp(r));
            }
        }
        Ok(Self {
            kind: Kind::Custom {
                h: Arc::new(h),
                dh: Arc::new(dh),
                d2h: Arc::new(d2h),
            },
            domain,
            spec: None,
        })
    }

    /// A custom warp whose derivatives come from central differences.
    ///
    /// `step` defaults to `1e-6·max(1, r)` for `h'`; `h''` uses `1e-4·max(1, r)`
    /// unless a step is given, in which case both use it.
    pub fn custom_fd<H>(h: H, step: Option<f64>, lo: f64, hi: f64) -> Result<Self>
    where
        H: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if let Some(s) = step {
            if !(s > 0.0) {
                return Err(GeoError::InvalidParameter(format!("step {s} must be positive")));
            }
        }
        let h = Arc::new(h);
        let h1 = Arc::clone(&h);
        let h2 = Arc::clone(&h);
        let dh = move |r: f64| {
            let d = step.unwrap_or(1e-6) * r.abs().max(1.0);
            (h1(r + d) - h1(r - d)) / (2.0 * d)
        };
        let d2h = move |r: f64| {
            let d = step.unwrap_or(1e-4) * r.abs().max(1.0);
            (h2(r + d) - 2.0 * h2(r) + h2(r - d)) / (d * d)
        };
        Self::custom(move |r| h(r), dh, d2h, lo, hi)
    }

    /// Restricts to a subinterval of the current domain.
    pub fn restrict(&self, lo: f64, hi: f64) -> Result<Self> {
        let sub = Domain::new(lo, hi)?;
        if lo < self.domain.lo || hi > self.domain.hi {
            return Err(GeoError::EmptyDomain(format!(
                "({lo}, {hi}) is not inside ({}, {})",
                self.domain.lo, self.domain.hi
            )));
        }
        let mut out = self.clone();
        out.domain = Domain {
            margin: self.domain.margin,
            ..sub
        };
        Ok(out)
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.domain.margin = margin;
        self
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn spec(&self) -> Option<WarpSpec> {
        self.spec
    }

    pub fn name(&self) -> String {
        match self.spec {
            Some(s) => s.to_string(),
            None => "custom".to_string(),
        }
    }

    pub fn contains(&self, r: f64) -> bool {
        self.domain.contains(r)
    }

    /// Full jet at `r`, checked against the domain.
    pub fn jet(&self, r: f64) -> Result<WarpJet> {
        self.domain.check(r)?;
        Ok(self.jet_unchecked(r))
    }

    /// Jet without the domain check; callers guarantee `r` is admissible.
    pub(crate) fn jet_unchecked(&self, r: f64) -> WarpJet {
        match &self.kind {
            Kind::OneOverR => {
                let inv = 1.0 / r;
                let inv2 = 1.0 / (r * r);
                WarpJet {
                    h: inv,
                    dh: -inv2,
                    d2h: 2.0 * inv2 * inv,
                    log_d: -inv,
                    log_d_prime: inv2,
                    log_d_sq: inv2,
                }
            }
            Kind::R => {
                let inv2 = 1.0 / (r * r);
                WarpJet {
                    h: r,
                    dh: 1.0,
                    d2h: 0.0,
                    log_d: 1.0 / r,
                    log_d_prime: -inv2,
                    log_d_sq: inv2,
                }
            }
            Kind::Flat { a0, a1 } => {
                let q = 1.0 / (a1 - r);
                let q2 = q * q;
                WarpJet {
                    h: a0 * q,
                    dh: a0 * q2,
                    d2h: 2.0 * a0 * q2 * q,
                    log_d: q,
                    log_d_prime: q2,
                    log_d_sq: q2,
                }
            }
            Kind::Neg2 { c0, c1, c2 } => {
                let r3 = r * r * r;
                let den = c1 + c2 * r3;
                let inv = 1.0 / r;
                let inv2 = 1.0 / (r * r);
                // H = 1/r - 3w with w = c2 r²/den
                let w = c2 * r * r / den;
                let shared = 9.0 * w * w - 6.0 * w * inv;
                WarpJet {
                    h: c0 * r / den,
                    dh: c0 * (c1 - 2.0 * c2 * r3) / (den * den),
                    d2h: -6.0 * c0 * c2 * r * r * (2.0 * c1 - c2 * r3) / (den * den * den),
                    log_d: inv - 3.0 * w,
                    log_d_prime: -inv2 + shared,
                    log_d_sq: inv2 + shared,
                }
            }
            Kind::Exp => {
                let e = r.exp();
                WarpJet {
                    h: e,
                    dh: e,
                    d2h: e,
                    log_d: 1.0,
                    log_d_prime: 0.0,
                    log_d_sq: 1.0,
                }
            }
            Kind::Custom { h, dh, d2h } => {
                let (h, dh, d2h) = (h(r), dh(r), d2h(r));
                let big_h = dh / h;
                let sq = big_h * big_h;
                WarpJet {
                    h,
                    dh,
                    d2h,
                    log_d: big_h,
                    log_d_prime: d2h / h - sq,
                    log_d_sq: sq,
                }
            }
        }
    }

    pub(crate) fn h_unchecked(&self, r: f64) -> f64 {
        match &self.kind {
            Kind::OneOverR => 1.0 / r,
            Kind::R => r,
            Kind::Flat { a0, a1 } => a0 / (a1 - r),
            Kind::Neg2 { c0, c1, c2 } => c0 * r / (c1 + c2 * r * r * r),
            Kind::Exp => r.exp(),
            Kind::Custom { h, .. } => h(r),
        }
    }

    pub(crate) fn log_d_unchecked(&self, r: f64) -> f64 {
        match &self.kind {
            Kind::OneOverR => -1.0 / r,
            Kind::R => 1.0 / r,
            Kind::Flat { a1, .. } => 1.0 / (a1 - r),
            Kind::Exp => 1.0,
            _ => self.jet_unchecked(r).log_d,
        }
    }

    pub fn h(&self, r: f64) -> Result<f64> {
        self.domain.check(r)?;
        Ok(self.h_unchecked(r))
    }

    /// `H(r) = h'(r)/h(r)`.
    pub fn log_derivative(&self, r: f64) -> Result<f64> {
        self.domain.check(r)?;
        Ok(self.log_d_unchecked(r))
    }

    fn same_base(&self, u: &TangentVector, v: &TangentVector) -> Result<f64> {
        if u.base != v.base {
            return Err(GeoError::BaseMismatch);
        }
        self.h(u.base.r)
    }

    /// `g_h(u, v) = u.dr v.dr + u.dt v.dt / h²`.
    pub fn metric(&self, u: &TangentVector, v: &TangentVector) -> Result<f64> {
        let h = self.same_base(u, v)?;
        Ok(u.dr * v.dr + u.dt * v.dt / (h * h))
    }

    pub fn norm(&self, u: &TangentVector) -> Result<f64> {
        Ok(self.metric(u, u)?.sqrt())
    }

    /// Complex structure: `J ∂_r = T_h`, `J T_h = -∂_r`.
    pub fn apply_j(&self, u: &TangentVector) -> Result<TangentVector> {
        let h = self.h(u.base.r)?;
        Ok(TangentVector::new(u.base, -u.dt / h, h * u.dr))
    }

    /// Kähler form `ω_h = (1/h) dr ∧ dt`.
    pub fn kahler_form(&self, u: &TangentVector, v: &TangentVector) -> Result<f64> {
        let h = self.same_base(u, v)?;
        Ok((u.dr * v.dt - u.dt * v.dr) / h)
    }

    /// The frame vector fields `(∂_r, T_h)` at `p`.
    pub fn frame_at(&self, p: Point) -> Result<(TangentVector, TangentVector)> {
        let h = self.h(p.r)?;
        Ok((TangentVector::new(p, 1.0, 0.0), TangentVector::new(p, 0.0, h)))
    }

    /// Covariant derivatives of the orthonormal frame at `p`.
    pub fn connection(&self, p: Point) -> Result<ConnectionCoeffs> {
        let big_h = self.log_derivative(p.r)?;
        Ok(ConnectionCoeffs {
            radial_radial: FrameVector::ZERO,
            frame_radial: FrameVector::new(0.0, -big_h),
            radial_frame: FrameVector::ZERO,
            frame_frame: FrameVector::new(big_h, 0.0),
        })
    }

    /// `R(∂_r, T_h) ∂_r` with the ordering
    /// `R(U,V)W = ∇_V ∇_U W - ∇_U ∇_V W + ∇_{[U,V]} W`, assembled from the
    /// connection coefficients, their radial derivative and `[∂_r, T_h] = H T_h`.
    pub fn curvature_operator(&self, r: f64) -> Result<FrameVector> {
        let jet = self.jet(r)?;
        let conn = self.connection(Point::new(r, 0.0)?)?;
        // ∇_T ∂r = c T with c = -H, so ∇_{∂r}(c T) = c' T + c ∇_{∂r} T.
        let c = conn.frame_radial.transverse;
        let dc = -jet.log_d_prime;
        let nabla_r_nabla_t = FrameVector::new(c * conn.radial_frame.radial, dc + c * conn.radial_frame.transverse);
        // ∇_T ∇_{∂r} ∂r = ∇_T 0 = 0
        let nabla_t_nabla_r = FrameVector::ZERO;
        // [∂r, T] = H T, so ∇_{[∂r,T]} ∂r = H ∇_T ∂r
        let bracket_term = FrameVector::new(
            jet.log_d * conn.frame_radial.radial,
            jet.log_d * conn.frame_radial.transverse,
        );
        Ok(FrameVector::new(
            nabla_t_nabla_r.radial - nabla_r_nabla_t.radial + bracket_term.radial,
            nabla_t_nabla_r.transverse - nabla_r_nabla_t.transverse + bracket_term.transverse,
        ))
    }

    /// Sectional curvature `K = H' - H²`.
    pub fn sectional_curvature(&self, r: f64) -> Result<f64> {
        let jet = self.jet(r)?;
        Ok(jet.log_d_prime - jet.log_d_sq)
    }

    /// `(h''h - 2h'²)/h²` straight from the derivatives of `h`.
    pub fn curvature_from_derivatives(&self, r: f64) -> Result<f64> {
        let WarpJet { h, dh, d2h, .. } = self.jet(r)?;
        Ok((d2h * h - 2.0 * dh * dh) / (h * h))
    }

    /// Gauss curvature of the orthogonal metric `E = 1, G = 1/h²` by finite
    /// differences of `G` alone: `K = -(1/(2√G)) ∂_r (G_r/√G)`, extrapolated
    /// from spacings `step, step/2, step/4, step/8`. Samples stay in
    /// `[r - step, r + step]`.
    pub fn curvature_oracle(&self, r: f64, step: f64) -> Result<f64> {
        if !(step > 0.0) {
            return Err(GeoError::InvalidParameter(format!("step {step} must be positive")));
        }
        self.domain.check(r - step)?;
        self.domain.check(r + step)?;
        let g = |x: f64| {
            let h = self.h_unchecked(x);
            1.0 / (h * h)
        };
        // Compact second-order stencil: G_r at half steps, √G sampled there too.
        let second_order = |d: f64| {
            let g0 = g(r);
            let phi_plus = (g(r + d) - g0) / d / g(r + 0.5 * d).sqrt();
            let phi_minus = (g0 - g(r - d)) / d / g(r - 0.5 * d).sqrt();
            -(phi_plus - phi_minus) / d / (2.0 * g0.sqrt())
        };
        // Romberg table over step, step/2, ...; the stencil error is even in d.
        let mut row = [0.0; ORACLE_LEVELS];
        for j in 0..ORACLE_LEVELS {
            let mut cur = second_order(step / (1u32 << j) as f64);
            let mut scale = 1.0;
            for slot in row.iter_mut().take(j) {
                scale *= 4.0;
                let prev = *slot;
                *slot = cur;
                cur = (scale * cur - prev) / (scale - 1.0);
            }
            row[j] = cur;
        }
        Ok(row[ORACLE_LEVELS - 1])
    }
}

const ORACLE_LEVELS: usize = 4;

/// Sample radii spread over the domain, mapping an infinite upper end.
fn probe_radii(domain: &Domain) -> Vec<f64> {
    let n = 257;
    let lo = domain.lo;
    (1..n)
        .map(|i| {
            let u = i as f64 / n as f64;
            if domain.hi.is_finite() {
                lo + u * (domain.hi - lo)
            } else {
                lo + u / (1.0 - u) * lo.max(1.0)
            }
        })
        .filter(|&r| domain.contains(r))
        .collect()
}
