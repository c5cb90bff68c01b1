//! Affine maps `(r, t) ↦ (kr, kt + l)` and numerical tests of whether they
//! are holomorphic, isometric, or geodesic preserving for a warp.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::geodesic::GeodesicState;
use crate::warp::{Point, TangentVector, WarpFunction};

pub const ISOMETRY_TOL: f64 = 1e-9;

/// `(r, t) ↦ (k r, k t + l)` with `k > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    k: f64,
    l: f64,
}

impl AffineMap {
    pub const IDENTITY: AffineMap = AffineMap { k: 1.0, l: 0.0 };

    pub fn new(k: f64, l: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite() && l.is_finite()) {
            return Err(GeoError::InvalidParameter(format!(
                "affine map needs k > 0 and finite l, got k = {k}, l = {l}"
            )));
        }
        Ok(Self { k, l })
    }

    pub fn translation(l: f64) -> Result<Self> {
        Self::new(1.0, l)
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn act(&self, p: Point) -> Point {
        Point::new(self.k * p.r(), self.k * p.t() + self.l).expect("k > 0 keeps r positive")
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &AffineMap) -> AffineMap {
        AffineMap {
            k: self.k * inner.k,
            l: self.k * inner.l + self.l,
        }
    }

    pub fn inverse(&self) -> AffineMap {
        AffineMap {
            k: 1.0 / self.k,
            l: -self.l / self.k,
        }
    }

    /// Differential applied to a tangent vector; lands at the image point.
    pub fn push(&self, u: &TangentVector) -> TangentVector {
        TangentVector::new(self.act(u.base), self.k * u.dr, self.k * u.dt)
    }
}

pub fn affine_act(m: &AffineMap, p: Point) -> Point {
    m.act(p)
}

/// The map sending `p` to `(1, 0)`.
pub fn transitivity_witness(p: Point) -> AffineMap {
    AffineMap {
        k: 1.0 / p.r(),
        l: -p.t() / p.r(),
    }
}

fn image_warp(warp: &WarpFunction, m: &AffineMap, p: Point) -> Result<(f64, f64)> {
    Ok((warp.h(p.r())?, warp.h(m.k * p.r())?))
}

/// Cauchy–Riemann defect `|u_r h(r) - v_t h(u)| + |u_t + h(r) h(u) v_r|`
/// of `(u, v) = (kr, kt + l)` at `p`.
pub fn cr_residual(warp: &WarpFunction, m: &AffineMap, p: Point) -> Result<f64> {
    let (h_p, h_q) = image_warp(warp, m, p)?;
    let (u_r, u_t, v_r, v_t) = (m.k, 0.0, 0.0, m.k);
    Ok((u_r * h_p - v_t * h_q).abs() + (u_t + h_p * h_q * v_r).abs())
}

/// Max entry of `DG·J(p) - J(G(p))·DG`, with `J` in coordinates
/// `[[0, -1/h], [h, 0]]`.
pub fn holomorphy_residual(warp: &WarpFunction, m: &AffineMap, p: Point) -> Result<f64> {
    let (h_p, h_q) = image_warp(warp, m, p)?;
    Ok(m.k * (1.0 / h_p - 1.0 / h_q).abs().max((h_p - h_q).abs()))
}

/// Max of `|g(DG u, DG v) - g(u, v)|` over pairs of vectors based at the
/// same point.
pub fn pullback_residual(warp: &WarpFunction, m: &AffineMap, pairs: &[(TangentVector, TangentVector)]) -> Result<f64> {
    let mut worst = 0.0f64;
    for (u, v) in pairs {
        if u.base != v.base {
            return Err(GeoError::BaseMismatch);
        }
        let before = warp.metric(u, v)?;
        let after = warp.metric(&m.push(u), &m.push(v))?;
        worst = worst.max((after - before).abs());
    }
    Ok(worst)
}

/// Geodesic curvature of the image under `m` of the geodesic through
/// `state`, at the image point. Zero iff the image is (a reparametrization
/// of) a geodesic there.
pub fn pushed_geodesic_curvature(warp: &WarpFunction, m: &AffineMap, state: &GeodesicState) -> Result<f64> {
    let src = warp.jet(state.r)?;
    let k = m.k;
    let (rd, td) = (state.f, src.h * state.g);
    let rdd = -state.g * state.g * src.log_d;
    let tdd = 2.0 * src.log_d * rd * td;

    let q = m.act(Point::new(state.r, state.t)?);
    let dst = warp.jet(q.r())?;
    let vel = TangentVector::new(q, k * rd, k * td);
    let acc = TangentVector::new(
        q,
        k * rdd + dst.log_d / (dst.h * dst.h) * vel.dt * vel.dt,
        k * tdd - 2.0 * dst.log_d * vel.dr * vel.dt,
    );
    let speed = warp.norm(&vel)?;
    Ok(warp.metric(&acc, &warp.apply_j(&vel)?)? / speed.powi(3))
}

/// Rectangular sample grid in `(r, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub nr: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub nt: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            r_min: 0.1,
            r_max: 5.0,
            nr: 20,
            t_min: -3.0,
            t_max: 3.0,
            nt: 20,
        }
    }
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<Point>> {
        if self.nr < 2 || self.nt < 2 || !(self.r_min < self.r_max) || !(self.t_min < self.t_max) {
            return Err(GeoError::InvalidParameter(format!("degenerate grid {self:?}")));
        }
        let lerp = |a: f64, b: f64, i: usize, n: usize| a + (b - a) * i as f64 / (n - 1) as f64;
        let mut out = Vec::with_capacity(self.nr * self.nt);
        for i in 0..self.nr {
            for j in 0..self.nt {
                out.push(Point::new(
                    lerp(self.r_min, self.r_max, i, self.nr),
                    lerp(self.t_min, self.t_max, j, self.nt),
                )?);
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsometryOptions {
    pub tol: f64,
    pub grid: GridSpec,
    pub seed: u64,
}

impl Default for IsometryOptions {
    fn default() -> Self {
        Self {
            tol: ISOMETRY_TOL,
            grid: GridSpec::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    HolomorphicIsometry,
    IsometryOnly,
    HolomorphicOnly,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsometryReport {
    pub warp: String,
    pub k: f64,
    pub l: f64,
    /// Max over the grid of the Cauchy–Riemann and `DG·J - J·DG` defects.
    pub holomorphy_residual: f64,
    pub isometry_residual: f64,
    pub verdict: Verdict,
    pub tol: f64,
    pub grid: GridSpec,
    pub seed: u64,
}

/// Evaluates both residuals of `m` over the grid.
///
/// At each grid point the pullback is tested on all pairs from the frame
/// `∂r`, `h∂t` and one random vector drawn from `seed`.
pub fn classify(warp: &WarpFunction, m: &AffineMap, opts: &IsometryOptions) -> Result<IsometryReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut holo = 0.0f64;
    let mut iso = 0.0f64;
    for p in opts.grid.points()? {
        holo = holo.max(cr_residual(warp, m, p)?).max(holomorphy_residual(warp, m, p)?);
        let (e_r, e_t) = warp.frame_at(p)?;
        let rand = TangentVector::new(p, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let vs = [e_r, e_t, rand];
        let mut pairs = Vec::with_capacity(6);
        for i in 0..3 {
            for j in i..3 {
                pairs.push((vs[i], vs[j]));
            }
        }
        iso = iso.max(pullback_residual(warp, m, &pairs)?);
    }
    let verdict = match (holo < opts.tol, iso < opts.tol) {
        (true, true) => Verdict::HolomorphicIsometry,
        (false, true) => Verdict::IsometryOnly,
        (true, false) => Verdict::HolomorphicOnly,
        (false, false) => Verdict::Neither,
    };
    Ok(IsometryReport {
        warp: warp.name(),
        k: m.k,
        l: m.l,
        holomorphy_residual: holo,
        isometry_residual: iso,
        verdict,
        tol: opts.tol,
        grid: opts.grid,
        seed: opts.seed,
    })
}
