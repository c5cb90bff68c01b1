//! Prescribing curvature: the Riccati equation `H' - H² = f(r)`.
//!
//! `H = (log h)'`, so a solution `H` on an interval determines the warp
//! function up to a positive constant factor. Solutions may blow up at a
//! finite radius, which is detected and reported.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::ode::{integrate, OdeOptions, OdeSystem, Stop};
use crate::warp::{make_warp, Domain, WarpFunction, WarpSpec};

/// Default `|H|` above which a solution is declared to have blown up.
pub const BLOWUP_CAP: f64 = 1e8;

/// A target curvature `f(r)` on an open interval of radii.
#[derive(Clone)]
pub struct CurvatureProfile {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    domain: Domain,
    name: String,
}

impl fmt::Debug for CurvatureProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CurvatureProfile")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .finish()
    }
}

impl CurvatureProfile {
    pub fn new<F>(name: impl Into<String>, f: F, lo: f64, hi: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Ok(Self {
            f: Arc::new(f),
            domain: Domain::new(lo, hi)?,
            name: name.into(),
        })
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("const:{c}"), move |_| c, 0.0, f64::INFINITY).expect("valid domain")
    }

    pub fn zero() -> Self {
        let mut p = Self::constant(0.0);
        p.name = "zero".into();
        p
    }

    /// `f(r) = c / r²`.
    pub fn inverse_square(c: f64) -> Self {
        Self::new(format!("inv_sq:{c}"), move |r| c / (r * r), 0.0, f64::INFINITY).expect("valid domain")
    }

    /// `f(r) = -2/r²`.
    pub fn neg2() -> Self {
        let mut p = Self::inverse_square(-2.0);
        p.name = "neg2".into();
        p
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        self.domain.check(r)?;
        Ok((self.f)(r))
    }
}

impl FromStr for CurvatureProfile {
    type Err = GeoError;

    /// Parses `zero`, `neg2`, `const:c` or `inv_sq:c`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, param) = match s.split_once(':') {
            Some((n, p)) => (n.trim(), Some(p.trim())),
            None => (s.trim(), None),
        };
        let value = || -> Result<f64> {
            param
                .ok_or_else(|| GeoError::InvalidParameter(format!("profile `{name}` needs a value")))?
                .parse::<f64>()
                .map_err(|e| GeoError::InvalidParameter(format!("profile `{s}`: {e}")))
        };
        match (name, param) {
            ("zero", None) => Ok(Self::zero()),
            ("neg2", None) => Ok(Self::neg2()),
            ("const", Some(_)) => Ok(Self::constant(value()?)),
            ("inv_sq", Some(_)) => Ok(Self::inverse_square(value()?)),
            _ => Err(GeoError::InvalidParameter(format!("unknown curvature profile `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiccatiOptions {
    pub ode: OdeOptions,
    pub blowup_cap: f64,
}

impl Default for RiccatiOptions {
    fn default() -> Self {
        Self {
            ode: OdeOptions::default(),
            blowup_cap: BLOWUP_CAP,
        }
    }
}

/// Sampled solution of the Riccati equation and the reconstructed warp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HField {
    /// Strictly increasing radii.
    pub grid: Vec<f64>,
    /// `H` at each radius.
    #[serde(rename = "H")]
    pub log_d: Vec<f64>,
    /// `h = exp(∫H)` normalized so that `h(r0) = 1`.
    pub h: Vec<f64>,
    pub r0: f64,
    /// First radius above `r0` where `|H|` passed the cap.
    pub blowup: Option<f64>,
    /// Same, below `r0`.
    pub blowup_below: Option<f64>,
}

struct Riccati<'a> {
    profile: &'a CurvatureProfile,
}

impl OdeSystem<1> for Riccati<'_> {
    fn rhs(&self, r: f64, y: &[f64; 1]) -> Option<[f64; 1]> {
        if !self.profile.domain.contains(r) {
            return None;
        }
        Some([y[0] * y[0] + (self.profile.f)(r)])
    }
}

/// Integrates `H' = H² + f` from `H(r0) = h0` across `range`.
pub fn solve_prescribed(
    profile: &CurvatureProfile,
    r0: f64,
    h0: f64,
    range: (f64, f64),
    opts: &RiccatiOptions,
) -> Result<HField> {
    let (lo, hi) = range;
    if !(lo <= r0 && r0 <= hi) || !(lo < hi) {
        return Err(GeoError::InvalidParameter(format!(
            "r0 = {r0} is not inside the range [{lo}, {hi}]"
        )));
    }
    if !profile.domain.contains(lo) || !profile.domain.contains(hi) {
        return Err(GeoError::OutsideDomain {
            r: if profile.domain.contains(lo) { hi } else { lo },
            lo: profile.domain.lo,
            hi: profile.domain.hi,
        });
    }
    if !(opts.blowup_cap > 0.0) || !h0.is_finite() {
        return Err(GeoError::InvalidParameter(format!(
            "blow-up cap {} and H0 = {h0} must be positive and finite",
            opts.blowup_cap
        )));
    }
    let sys = Riccati { profile };
    let cap = opts.blowup_cap;
    let run = |end: f64| -> Result<(Vec<f64>, Vec<f64>, Option<f64>)> {
        let tr = integrate(&sys, r0, [h0], end, &opts.ode, |_, y: &[f64; 1]| {
            (!y[0].is_finite() || y[0].abs() > cap).then_some(())
        })?;
        let blow = match tr.stop {
            Stop::Event(()) | Stop::StepCollapse => Some(tr.last().0),
            Stop::Completed | Stop::StepLimit => None,
        };
        Ok((tr.xs, tr.ys.into_iter().map(|y| y[0]).collect(), blow))
    };
    let (mut grid, mut vals, blowup_below) = if r0 > lo { run(lo)? } else { (vec![r0], vec![h0], None) };
    grid.reverse();
    vals.reverse();
    let (fg, fv, blowup) = if r0 < hi { run(hi)? } else { (vec![r0], vec![h0], None) };
    grid.extend_from_slice(&fg[1..]);
    vals.extend_from_slice(&fv[1..]);

    let i0 = grid.iter().position(|&r| r == r0).expect("r0 is on the grid");
    let mut log_h = vec![0.0; grid.len()];
    for i in i0 + 1..grid.len() {
        log_h[i] = log_h[i - 1] + 0.5 * (grid[i] - grid[i - 1]) * (vals[i] + vals[i - 1]);
    }
    for i in (0..i0).rev() {
        log_h[i] = log_h[i + 1] - 0.5 * (grid[i + 1] - grid[i]) * (vals[i] + vals[i + 1]);
    }
    Ok(HField {
        h: log_h.iter().map(|l| l.exp()).collect(),
        grid,
        log_d: vals,
        r0,
        blowup,
        blowup_below,
    })
}

/// `h = a0/(a1 - r)`, the flat family.
pub fn analytic_flat(a0: f64, a1: f64) -> Result<WarpFunction> {
    make_warp(&WarpSpec::Flat { a0, a1 })
}

/// `h = c0 r/(c1 + c2 r³)`, the family of curvature `-2/r²`.
pub fn analytic_neg2(c0: f64, c1: f64, c2: f64) -> Result<WarpFunction> {
    make_warp(&WarpSpec::Neg2 { c0, c1, c2 })
}

/// Outcome of checking a warp (or sampled field) against a curvature profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiccatiReport {
    pub max_residual: f64,
    pub grid_size: usize,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blowup_location: Option<f64>,
    /// Grid points that fell outside either domain.
    #[serde(default)]
    pub outside_domain: usize,
}

/// Max over `grid` of `|K_W(r) - f(r)|`.
pub fn verify_riccati(warp: &WarpFunction, profile: &CurvatureProfile, grid: &[f64], tol: f64) -> RiccatiReport {
    let mut max_residual = 0.0f64;
    let mut outside = 0;
    for &r in grid {
        match (warp.sectional_curvature(r), profile.eval(r)) {
            (Ok(k), Ok(f)) => max_residual = max_residual.max((k - f).abs()),
            _ => outside += 1,
        }
    }
    if max_residual.is_nan() {
        max_residual = f64::INFINITY;
    }
    RiccatiReport {
        max_residual,
        grid_size: grid.len(),
        pass: outside == 0 && max_residual <= tol,
        blowup_location: None,
        outside_domain: outside,
    }
}

/// Checks a sampled solution: `H'` from 5-point finite differences on the
/// (non-uniform) grid against `H² + f`, scaled by `1 + H² + |f|`.
pub fn verify_hfield(field: &HField, profile: &CurvatureProfile, tol: f64) -> RiccatiReport {
    let n = field.grid.len();
    let mut max_residual = 0.0f64;
    let mut outside = 0;
    if n >= 5 {
        for i in 0..n {
            let start = i.saturating_sub(2).min(n - 5);
            let nodes = &field.grid[start..start + 5];
            let w = fd_weights(field.grid[i], nodes, 1);
            let d: f64 = (0..5).map(|j| w[j] * field.log_d[start + j]).sum();
            let Ok(f) = profile.eval(field.grid[i]) else {
                outside += 1;
                continue;
            };
            let hh = field.log_d[i] * field.log_d[i];
            let res = (d - hh - f).abs() / (1.0 + hh + f.abs());
            max_residual = max_residual.max(res);
        }
    }
    RiccatiReport {
        max_residual,
        grid_size: n,
        pass: n >= 5 && outside == 0 && max_residual <= tol,
        blowup_location: field.blowup.or(field.blowup_below),
        outside_domain: outside,
    }
}

/// Finite-difference weights for the `m`-th derivative at `z` on arbitrary
/// nodes (Fornberg's recursion).
pub fn fd_weights(z: f64, nodes: &[f64], m: usize) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}
