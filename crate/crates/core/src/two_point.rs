//! Two-point geodesic problem for `h = 1/r` (the flat cone metric
//! `dr² + r²dt²`) and `h = r` (`dr² + dt²/r²`).

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::geodesic::{
    integrate, integrate_until, AnalyticGeodesicDS1, AnalyticGeodesicDS2, GeodesicOptions, GeodesicPath, GeodesicState,
    Sign,
};
use crate::warp::{make_warp, Point, WarpSpec};

/// Default endpoint tolerance for connections.
pub const CONNECT_TOL: f64 = 1e-9;
/// Integrator tolerance used when replaying a solution.
const REPLAY_TOL: f64 = 1e-12;
/// Number of seeds in a shooting scan.
const SHOOTING_SEEDS: usize = 64;
/// Cap on the candidates enumerated by [`same_r_candidates`].
pub const MAX_SAME_R_CANDIDATES: usize = 10_000;

/// The two metrics with a two-point solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// `h = 1/r`.
    Ds1,
    /// `h = r`.
    Ds2,
}

impl Metric {
    pub fn spec(self) -> WarpSpec {
        match self {
            Metric::Ds1 => WarpSpec::OneOverR,
            Metric::Ds2 => WarpSpec::R,
        }
    }
}

impl TryFrom<&WarpSpec> for Metric {
    type Error = GeoError;

    fn try_from(spec: &WarpSpec) -> Result<Self> {
        match spec {
            WarpSpec::OneOverR => Ok(Metric::Ds1),
            WarpSpec::R => Ok(Metric::Ds2),
            other => Err(GeoError::InvalidParameter(format!(
                "no two-point solver for warp `{other}` (use one_over_r or r)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoGeodesicReason {
    /// The points violate a necessary condition for a connection.
    ThresholdViolated,
    /// The search found nothing. Not a proof of nonexistence.
    SearchExhausted,
}

/// Which closed-form family a connection belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Ds1 {
        a: f64,
    },
    /// `b = |g/h|` is the conserved quantity; `angle` is the initial
    /// direction measured from `∂r`.
    Ds2 {
        b: f64,
        angle: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Alternative {
    pub s: f64,
    pub family: Family,
    pub sign: Sign,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Connection {
    /// Arc length from `p0` to `p1` along the geodesic.
    pub s: f64,
    pub family: Family,
    pub sign: Sign,
    pub length: f64,
    /// Max coordinate distance between the replayed endpoint and the target.
    pub replay_miss: f64,
    pub iterations: usize,
    pub path: GeodesicPath,
    /// Longer geodesics that also hit the target.
    #[serde(default)]
    pub alternatives: Vec<Alternative>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum ConnectResult {
    Horizontal { length: f64 },
    Found(Connection),
    NoGeodesic { reason: NoGeodesicReason },
}

impl ConnectResult {
    pub fn length(&self) -> Option<f64> {
        match self {
            ConnectResult::Horizontal { length } => Some(*length),
            ConnectResult::Found(c) => Some(c.length),
            ConnectResult::NoGeodesic { .. } => None,
        }
    }

    pub fn exists(&self) -> bool {
        self.length().is_some()
    }

    pub fn iterations(&self) -> usize {
        match self {
            ConnectResult::Found(c) => c.iterations,
            _ => 0,
        }
    }
}

fn check_distinct(p0: Point, p1: Point) -> Result<()> {
    if p0 == p1 {
        Err(GeoError::IdenticalPoints)
    } else {
        Ok(())
    }
}

fn miss(st: &GeodesicState, p: Point) -> f64 {
    (st.r - p.r()).abs().max((st.t - p.t()).abs())
}

/// Bisects a decreasing residual on `(lo, hi)` where `res(lo) > 0 >= res(hi)`.
fn bisect<F: FnMut(f64) -> f64>(mut lo: f64, mut hi: f64, mut res: F) -> (f64, usize) {
    let mut iterations = 0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        let v = res(mid);
        if v == 0.0 {
            return (mid, iterations);
        }
        if v > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi), iterations)
}

/// Connects two points of the cone `dr² + r²dt²` by a geodesic.
///
/// The family through `p0` is parametrized by the angle `φ ∈ (|Δt|, π)`
/// between the initial direction and `∂r` (`a = r0 cos φ`). For each `φ`
/// the arc length at which the family reaches `t1` is explicit, and the
/// radius there, `r0 sin φ / sin(φ - |Δt|)`, decreases strictly in `φ`, so
/// the shot is bracketed by a seed scan and bisected.
pub fn connect_ds1(p0: Point, p1: Point, tol: f64) -> Result<ConnectResult> {
    check_distinct(p0, p1)?;
    let (r0, r1) = (p0.r(), p1.r());
    let delta = p1.t() - p0.t();
    if delta == 0.0 {
        return Ok(ConnectResult::Horizontal {
            length: (r1 - r0).abs(),
        });
    }
    let gap = delta.abs();
    if gap >= PI {
        return Ok(ConnectResult::NoGeodesic {
            reason: NoGeodesicReason::ThresholdViolated,
        });
    }
    let sign = Sign::of(delta);
    // u = φ - |Δt| avoids cancellation when the root is close to |Δt|.
    let span = PI - gap;
    let res = |u: f64| r0 * (u + gap).sin() / u.sin() - r1;

    let s_seed = (r0 * r0 + r1 * r1 - 2.0 * r0 * r1 * gap.cos()).sqrt();
    let a_seed = (r1 * r1 - r0 * r0 - s_seed * s_seed) / (2.0 * s_seed);
    let u_seed = (a_seed / r0).clamp(-1.0, 1.0).acos() - gap;
    let mut seeds: Vec<f64> = (0..SHOOTING_SEEDS)
        .map(|i| span * (i as f64 + 0.5) / SHOOTING_SEEDS as f64)
        .collect();
    if u_seed > 0.0 && u_seed < span {
        seeds.push(u_seed);
    }
    seeds.sort_by(f64::total_cmp);
    let (mut lo, mut hi) = (0.0, span);
    for &u in &seeds {
        if res(u) > 0.0 {
            lo = u;
        } else {
            hi = u;
            break;
        }
    }
    let (u, iterations) = bisect(lo, hi, res);
    let a = r0 * (u + gap).cos();
    let s = r0 * gap.sin() / u.sin();

    let geo = AnalyticGeodesicDS1::new(r0, p0.t(), a, sign)?;
    let warp = make_warp(&WarpSpec::OneOverR)?;
    let path = integrate(&warp, geo.initial_state(), s, &GeodesicOptions::with_tol(REPLAY_TOL))?;
    let replay_miss = miss(path.end(), p1);
    if path.escaped || !(replay_miss <= tol) {
        return Ok(ConnectResult::NoGeodesic {
            reason: NoGeodesicReason::SearchExhausted,
        });
    }
    Ok(ConnectResult::Found(Connection {
        s,
        family: Family::Ds1 { a },
        sign,
        length: s,
        replay_miss,
        iterations,
        path,
        alternatives: Vec::new(),
    }))
}

/// Which of the two printed forms of the arc-length formula a candidate
/// comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaVariant {
    /// `s² = r0² + r1² ± 2 r0² r1² cos²Δt`.
    SquaredCosine,
    /// `s² = r0² + r1² ± 2 r0 r1 cos Δt`.
    LawOfCosines,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormCandidate {
    pub variant: FormulaVariant,
    /// Sign inside the square root.
    pub inner: Sign,
    /// Sign of `s`.
    pub outer: Sign,
    pub s: f64,
    /// `(r1² - r0² - s²) / 2s`.
    pub a: f64,
    /// Set by [`reconcile`].
    pub confirmed: bool,
}

/// Every `(s, a)` candidate from both printed arc-length formulas.
pub fn closed_form_candidates(p0: Point, p1: Point) -> Result<Vec<ClosedFormCandidate>> {
    check_distinct(p0, p1)?;
    let delta = p1.t() - p0.t();
    if delta == 0.0 || delta.abs() >= PI {
        return Err(GeoError::ThresholdViolated(format!(
            "closed forms need 0 < |t1 - t0| < π, got {delta}"
        )));
    }
    let (r0, r1) = (p0.r(), p1.r());
    let base = r0 * r0 + r1 * r1;
    let mut out = Vec::new();
    for (variant, cross) in [
        (
            FormulaVariant::SquaredCosine,
            2.0 * r0 * r0 * r1 * r1 * delta.cos().powi(2),
        ),
        (FormulaVariant::LawOfCosines, 2.0 * r0 * r1 * delta.cos()),
    ] {
        for inner in [Sign::Plus, Sign::Minus] {
            let s2 = base + inner.value() * cross;
            if !(s2 > 0.0) {
                continue;
            }
            for outer in [Sign::Plus, Sign::Minus] {
                let s = outer.value() * s2.sqrt();
                out.push(ClosedFormCandidate {
                    variant,
                    inner,
                    outer,
                    s,
                    a: (r1 * r1 - r0 * r0 - s * s) / (2.0 * s),
                    confirmed: false,
                });
            }
        }
    }
    Ok(out)
}

/// Marks the candidates whose geodesic (either orientation) actually reaches
/// `p1` at parameter `s`.
pub fn reconcile(candidates: &mut [ClosedFormCandidate], p0: Point, p1: Point, tol: f64) {
    for c in candidates.iter_mut() {
        c.confirmed = [Sign::Plus, Sign::Minus].iter().any(|&sign| {
            AnalyticGeodesicDS1::new(p0.r(), p0.t(), c.a, sign)
                .map(|g| {
                    let q = g.eval(c.s);
                    (q.r() - p1.r()).abs().max((q.t() - p1.t()).abs()) <= tol
                })
                .unwrap_or(false)
        });
    }
}

/// Geodesic distance for `h = 1/r`, or `None` when no geodesic joins the points.
pub fn distance_ds1(p0: Point, p1: Point) -> Option<f64> {
    if p0 == p1 {
        return Some(0.0);
    }
    connect_ds1(p0, p1, CONNECT_TOL).ok()?.length()
}

/// Angle `α` for which the line `r cos(t + α) = const` passes through both points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChordParam {
    pub alpha: f64,
}

/// `α` with `r0 cos(t0 + α) = r1 cos(t1 + α)`, normalized so both cosines
/// are positive.
pub fn chord_alpha(p0: Point, p1: Point) -> Result<ChordParam> {
    let delta = p1.t() - p0.t();
    if delta == 0.0 || delta.abs() >= PI {
        return Err(GeoError::ThresholdViolated(format!(
            "chord needs 0 < |t1 - t0| < π, got {delta}"
        )));
    }
    let (s0, c0) = p0.t().sin_cos();
    let (s1, c1) = p1.t().sin_cos();
    let mut alpha = (p0.r() * c0 - p1.r() * c1).atan2(p0.r() * s0 - p1.r() * s1);
    if (p0.t() + alpha).cos() < 0.0 {
        alpha -= PI.copysign(alpha);
    }
    Ok(ChordParam { alpha })
}

/// `|r1 sin(t1 + α) - r0 sin(t0 + α)|`.
pub fn chord_distance(p0: Point, p1: Point, chord: ChordParam) -> f64 {
    let a = chord.alpha;
    (p1.r() * (p1.t() + a).sin() - p0.r() * (p0.t() + a).sin()).abs()
}

/// Supremum of `|t - t0|` over the `h = 1/r` geodesics leaving `(r0, t0)`,
/// sampled on an `n_dir × n_len` grid: directions uniform in angle, arc
/// lengths geometric on `[1e-3, s_max]`.
pub fn family_angle_sup(r0: f64, n_dir: usize, n_len: usize, s_max: f64) -> Result<f64> {
    if n_dir == 0 || n_len < 2 || !(s_max > 1e-3) {
        return Err(GeoError::InvalidParameter("empty sweep grid".into()));
    }
    let ratio = (s_max / 1e-3).powf(1.0 / (n_len - 1) as f64);
    (0..n_dir)
        .into_par_iter()
        .map(|i| {
            let a = r0 * (PI * (i as f64 + 0.5) / n_dir as f64).cos();
            let g = AnalyticGeodesicDS1::new(r0, 0.0, a, Sign::Plus)?;
            Ok((0..n_len)
                .map(|j| g.angle(1e-3 * ratio.powi(j as i32)).abs())
                .fold(0.0, f64::max))
        })
        .try_reduce(|| 0.0, |x, y| Ok(x.max(y)))
}

/// Candidate same-radius connection for `h = r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SameRCandidate {
    pub k: u32,
    pub b: f64,
    pub s: f64,
}

/// `b = kπ/|dt|` for `k = 1, 2, …` while `b ≤ 1/r0`, each with `s = 2|dt|`.
pub fn same_r_candidates(r0: f64, dt: f64) -> Vec<SameRCandidate> {
    let gap = dt.abs();
    (1..=MAX_SAME_R_CANDIDATES as u32)
        .map(|k| SameRCandidate {
            k,
            b: k as f64 * PI / gap,
            s: 2.0 * gap,
        })
        .take_while(|c| c.b * r0 <= 1.0)
        .collect()
}

/// Same-radius connection test for `h = r` over the candidate family of
/// [`same_r_candidates`]: below `|dt| = π r0` the family is empty, otherwise
/// each candidate is replayed numerically in both radial directions.
pub fn connect_ds2_same_r(r0: f64, dt: f64, tol: f64) -> Result<ConnectResult> {
    Point::new(r0, 0.0)?;
    if dt == 0.0 {
        return Err(GeoError::IdenticalPoints);
    }
    if PI * r0 > dt.abs() {
        return Ok(ConnectResult::NoGeodesic {
            reason: NoGeodesicReason::ThresholdViolated,
        });
    }
    let target = Point::new(r0, dt)?;
    let warp = make_warp(&WarpSpec::R)?;
    let opts = GeodesicOptions::with_tol(REPLAY_TOL);
    let mut hits = Vec::new();
    for c in same_r_candidates(r0, dt) {
        for radial in [Sign::Plus, Sign::Minus] {
            let geo = AnalyticGeodesicDS2::new(r0, 0.0, c.b, radial, Sign::of(dt))?;
            let path = integrate(&warp, geo.initial_state(), c.s, &opts)?;
            let m = miss(path.end(), target);
            if !path.escaped && m <= tol {
                let angle = geo.initial_state().g.atan2(geo.initial_state().f);
                hits.push((c, radial, angle, m, path));
            }
        }
    }
    let Some((c, _, angle, m, path)) = hits.first().cloned() else {
        return Ok(ConnectResult::NoGeodesic {
            reason: NoGeodesicReason::SearchExhausted,
        });
    };
    Ok(ConnectResult::Found(Connection {
        s: c.s,
        family: Family::Ds2 { b: c.b, angle },
        sign: Sign::of(dt),
        length: c.s,
        replay_miss: m,
        iterations: 0,
        path,
        alternatives: hits[1..]
            .iter()
            .map(|(c, _, angle, _, _)| Alternative {
                s: c.s,
                family: Family::Ds2 { b: c.b, angle: *angle },
                sign: Sign::of(dt),
            })
            .collect(),
    }))
}

/// Result of one shot for `h = r`: the geodesic reached `t1` at radius `r`
/// after arc length `s`, or left the domain first.
struct Ds2Shot {
    residual: f64,
    hit: Option<(f64, GeodesicPath)>,
}

fn ds2_shot(p0: Point, p1: Point, angle: f64) -> Result<Ds2Shot> {
    let warp = make_warp(&WarpSpec::R)?;
    let init = GeodesicState::from_angle(p0, angle);
    let b = init.g.abs() / p0.r();
    // The whole arch has length π/b.
    let s_max = (PI / b + 1.0).min(1e7);
    let t1 = p1.t();
    let forward = p1.t() > p0.t();
    let (path, hit) = integrate_until(&warp, init, s_max, &GeodesicOptions::with_tol(REPLAY_TOL), |st| {
        if forward {
            st.t >= t1
        } else {
            st.t <= t1
        }
    })?;
    if !hit {
        return Ok(Ds2Shot {
            residual: -p1.r(),
            hit: None,
        });
    }
    let (s, end) = *path.samples.last().expect("nonempty");
    Ok(Ds2Shot {
        residual: end.r - p1.r(),
        hit: Some((s, path)),
    })
}

/// Connects two points under `h = r` by shooting over the initial
/// direction, bisecting on the radius at which the geodesic reaches `t1`
/// (taken as 0 when it leaves the domain first). Every bracketed root is
/// refined; the shortest hit is returned.
pub fn connect_ds2(p0: Point, p1: Point, tol: f64) -> Result<ConnectResult> {
    check_distinct(p0, p1)?;
    let delta = p1.t() - p0.t();
    if delta == 0.0 {
        return Ok(ConnectResult::Horizontal {
            length: (p1.r() - p0.r()).abs(),
        });
    }
    let sign = Sign::of(delta);
    // Directions with g of the same sign as Δt, angle ψ ∈ (0, π) from ∂r.
    let to_angle = |psi: f64| sign.value() * psi;
    let seeds: Vec<f64> = (0..SHOOTING_SEEDS)
        .map(|i| PI * (i as f64 + 0.5) / SHOOTING_SEEDS as f64)
        .collect();
    let values = seeds
        .par_iter()
        .map(|&psi| ds2_shot(p0, p1, to_angle(psi)).map(|s| s.residual))
        .collect::<Result<Vec<f64>>>()?;

    let mut hits = Vec::new();
    for i in 0..seeds.len() - 1 {
        let (v0, v1) = (values[i], values[i + 1]);
        if v0 == 0.0 || v0.signum() == v1.signum() {
            continue;
        }
        let decreasing = v0 > 0.0;
        let mut failed = None;
        let (psi, iterations) = bisect(seeds[i], seeds[i + 1], |psi| match ds2_shot(p0, p1, to_angle(psi)) {
            Ok(s) if decreasing => s.residual,
            Ok(s) => -s.residual,
            Err(e) => {
                failed = Some(e);
                0.0
            }
        });
        if let Some(e) = failed {
            return Err(e);
        }
        let shot = ds2_shot(p0, p1, to_angle(psi))?;
        if let Some((s, path)) = shot.hit {
            let m = miss(path.end(), p1);
            if m <= tol {
                let angle = to_angle(psi);
                let b = angle.sin().abs() / p0.r();
                hits.push((s, b, angle, m, iterations, path));
            }
        }
    }
    hits.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut rest = hits.into_iter();
    let Some((s, b, angle, m, iterations, path)) = rest.next() else {
        return Ok(ConnectResult::NoGeodesic {
            reason: NoGeodesicReason::SearchExhausted,
        });
    };
    Ok(ConnectResult::Found(Connection {
        s,
        family: Family::Ds2 { b, angle },
        sign,
        length: s,
        replay_miss: m,
        iterations,
        path,
        alternatives: rest
            .map(|(s, b, angle, ..)| Alternative {
                s,
                family: Family::Ds2 { b, angle },
                sign,
            })
            .collect(),
    }))
}

/// Dispatches to the solver for `metric`.
pub fn connect(metric: Metric, p0: Point, p1: Point, tol: f64) -> Result<ConnectResult> {
    match metric {
        Metric::Ds1 => connect_ds1(p0, p1, tol),
        Metric::Ds2 => connect_ds2(p0, p1, tol),
    }
}

/// One row of a connectivity atlas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub r0: f64,
    pub t0: f64,
    pub r1: f64,
    pub t1: f64,
    pub exists: bool,
    pub length: Option<f64>,
    pub iterations: usize,
}

/// Connects every pair in parallel; rows come back in input order.
/// Coincident points get length 0.
pub fn sweep(metric: Metric, pairs: &[(Point, Point)], tol: f64) -> Result<Vec<SweepRow>> {
    pairs
        .par_iter()
        .map(|&(p0, p1)| {
            if p0 == p1 {
                return Ok(SweepRow {
                    r0: p0.r(),
                    t0: p0.t(),
                    r1: p1.r(),
                    t1: p1.t(),
                    exists: true,
                    length: Some(0.0),
                    iterations: 0,
                });
            }
            let res = connect(metric, p0, p1, tol)?;
            Ok(SweepRow {
                r0: p0.r(),
                t0: p0.t(),
                r1: p1.r(),
                t1: p1.t(),
                exists: res.exists(),
                length: res.length(),
                iterations: res.iterations(),
            })
        })
        .collect()
}

/// Same-radius atlas for `h = r`: one row per `dt`, all starting at `(r0, 0)`.
pub fn sweep_same_r(r0: f64, dts: &[f64], tol: f64) -> Result<Vec<SweepRow>> {
    dts.par_iter()
        .map(|&dt| {
            let res = if dt == 0.0 {
                ConnectResult::Horizontal { length: 0.0 }
            } else {
                connect_ds2_same_r(r0, dt, tol)?
            };
            Ok(SweepRow {
                r0,
                t0: 0.0,
                r1: r0,
                t1: dt,
                exists: res.exists(),
                length: res.length(),
                iterations: res.iterations(),
            })
        })
        .collect()
}
