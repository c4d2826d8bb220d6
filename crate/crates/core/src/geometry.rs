//! Sphere-valued radial profiles, the symmetry action `(s, α)`, the harmonic
//! family and the stereographic coordinate.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{RadialField, RadialGrid};
use crate::vec3::Vec3;

/// Default tolerance for the boundary flags of the class Σ_m.
pub const TOL_BC: f64 = 1e-3;
pub const POLE_GUARD: f64 = 1e-10;

/// `u = e^{mθR} v(r)` sampled at the grid nodes.
#[derive(Clone, Debug)]
pub struct SphereProfile {
    grid: Arc<RadialGrid>,
    v: Vec<Vec3>,
}

impl SphereProfile {
    /// Rejects samples that are not unit vectors to 1e-10.
    pub fn new(grid: Arc<RadialGrid>, v: Vec<Vec3>) -> Result<Self> {
        grid.check_len(v.len())?;
        if let Some((j, x)) = v.iter().enumerate().find(|(_, x)| !((x.norm() - 1.0).abs() <= 1e-10)) {
            return Err(Error::InvalidParameter(format!("|v| = {} at node {j}", x.norm())));
        }
        Ok(SphereProfile { grid, v })
    }

    /// Projects every sample radially onto the sphere.
    pub fn normalized(grid: Arc<RadialGrid>, v: Vec<Vec3>) -> Result<Self> {
        grid.check_len(v.len())?;
        let mut out = Vec::with_capacity(v.len());
        for (j, x) in v.into_iter().enumerate() {
            let n = x.norm();
            if !(n > 0.0 && n.is_finite()) {
                return Err(Error::InvalidParameter(format!("cannot normalise node {j}")));
            }
            out.push(x * (1.0 / n));
        }
        Ok(SphereProfile { grid, v: out })
    }

    pub(crate) fn from_raw(grid: Arc<RadialGrid>, v: Vec<Vec3>) -> Self {
        debug_assert_eq!(grid.n(), v.len());
        SphereProfile { grid, v }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }
    pub fn m(&self) -> u32 {
        self.grid.m()
    }
    pub fn values(&self) -> &[Vec3] {
        &self.v
    }
    pub fn into_values(self) -> Vec<Vec3> {
        self.v
    }
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.v.iter().map(|x| x[i]).collect()
    }

    /// `v3(r_min) ≤ -1 + tol` and `v3(r_max) ≥ 1 - tol`.
    pub fn in_class(&self, tol: f64) -> bool {
        self.v[0][2] <= -1.0 + tol && self.v[self.v.len() - 1][2] >= 1.0 - tol
    }

    pub fn require_class(&self, tol: f64) -> Result<()> {
        if self.in_class(tol) {
            Ok(())
        } else {
            Err(Error::NotInClass(format!(
                "v3(r_min) = {}, v3(r_max) = {}",
                self.v[0][2],
                self.v[self.v.len() - 1][2]
            )))
        }
    }

    /// The grid is already uniform in `y = m log r`; this is the identity view.
    pub fn log_view(&self) -> (&[f64], &[Vec3]) {
        (self.grid.y(), &self.v)
    }

    pub fn max_unit_defect(&self) -> f64 {
        self.v.iter().fold(0.0f64, |a, x| a.max((x.norm() - 1.0).abs()))
    }
}

/// Scale and phase of `h^{s,α} = e^{αR} h(r/s)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicParams {
    pub s: f64,
    pub alpha: f64,
}

impl HarmonicParams {
    pub fn new(s: f64, alpha: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("need s > 0 and finite α, got ({s}, {alpha})")));
        }
        Ok(HarmonicParams { s, alpha: wrap_angle(alpha) })
    }

    pub const IDENTITY: HarmonicParams = HarmonicParams { s: 1.0, alpha: 0.0 };

    pub fn log_s(&self) -> f64 {
        self.s.ln()
    }

    pub fn compose(&self, other: &HarmonicParams) -> HarmonicParams {
        HarmonicParams { s: self.s * other.s, alpha: wrap_angle(self.alpha + other.alpha) }
    }
}

/// Maps an angle into `[-π, π)`.
pub fn wrap_angle(a: f64) -> f64 {
    if (-PI..PI).contains(&a) {
        return a;
    }
    let t = (a + PI).rem_euclid(2.0 * PI) - PI;
    if t >= PI {
        t - 2.0 * PI
    } else {
        t
    }
}

/// `h̃(y) = (sech y, 0, tanh y)`.
#[inline]
pub fn reference_value(y: f64) -> Vec3 {
    Vec3::new(1.0 / y.cosh(), 0.0, y.tanh())
}

/// `h^{s,α}` at log-coordinate `y` for index `m`.
#[inline]
pub fn harmonic_value(m: u32, y: f64, p: HarmonicParams) -> Vec3 {
    reference_value(y - m as f64 * p.s.ln()).rotate_k(p.alpha)
}

/// `d/d(log s)` of `h^{s,α}` at `y`.
#[inline]
pub fn harmonic_dlogs(m: u32, y: f64, p: HarmonicParams) -> Vec3 {
    let mf = m as f64;
    let t = y - mf * p.s.ln();
    let sech = 1.0 / t.cosh();
    Vec3::new(mf * sech * t.tanh(), 0.0, -mf * sech * sech).rotate_k(p.alpha)
}

pub fn harmonic_profile(grid: Arc<RadialGrid>, p: HarmonicParams) -> SphereProfile {
    let m = grid.m();
    let v = grid.y().iter().map(|&y| harmonic_value(m, y, p)).collect();
    SphereProfile::from_raw(grid, v)
}

pub fn reference_harmonic(grid: Arc<RadialGrid>) -> SphereProfile {
    harmonic_profile(grid, HarmonicParams::IDENTITY)
}

/// `J^h e = h × (0, 1, 0) = (-h3, 0, h1)` for `h` with `h2 = 0`.
#[inline]
pub fn jhe(h: Vec3) -> Vec3 {
    h.cross(Vec3::E)
}

/// Node `j` carries `e^{αR} v(r_j / s)`; values beyond the grid are the
/// limits `-k̂` and `+k̂`.
pub fn apply_symmetry(profile: &SphereProfile, p: HarmonicParams) -> SphereProfile {
    let grid = profile.grid().clone();
    let shift = -grid.mf() * p.s.ln();
    let moved = grid.shift(profile.values(), shift, -Vec3::K, Vec3::K);
    let v = moved.into_iter().map(|x| x.normalized().rotate_k(p.alpha)).collect();
    SphereProfile::from_raw(grid, v)
}

/// Pointwise `v_r - (m/r) J^v R v`.
pub fn bogomolny_field(profile: &SphereProfile) -> Vec<Vec3> {
    let g = profile.grid();
    let mf = g.mf();
    let vy = g.deriv_y(profile.values());
    profile
        .values()
        .iter()
        .zip(&vy)
        .zip(g.r())
        .map(|((v, d), r)| (*d - v.cross(v.rot())) * (mf / r))
        .collect()
}

/// `‖v_r - (m/r) J^v R v‖` in `L²(r dr)`.
pub fn bogomolny_residual(profile: &SphereProfile) -> f64 {
    let f: Vec<f64> = bogomolny_field(profile).iter().map(|b| b.norm2()).collect();
    profile.grid().integrate_rdr(&f).max(0.0).sqrt()
}

/// `w = (v1 + i v2) / (1 + v3)` at θ = 0.
pub fn stereographic(profile: &SphereProfile) -> Result<RadialField<Complex64>> {
    let mut w = Vec::with_capacity(profile.values().len());
    for (j, v) in profile.values().iter().enumerate() {
        if v[2] <= -1.0 + POLE_GUARD {
            return Err(Error::PoleProximity { node: j, v3: v[2] });
        }
        w.push(Complex64::new(v[0], v[1]) / (1.0 + v[2]));
    }
    RadialField::new(profile.grid().clone(), w)
}

pub fn inverse_stereographic(w: &RadialField<Complex64>) -> SphereProfile {
    let v = w
        .values()
        .iter()
        .map(|w| {
            let a = w.norm_sqr();
            Vec3::new(2.0 * w.re, 2.0 * w.im, 1.0 - a) * (1.0 / (1.0 + a))
        })
        .collect();
    SphereProfile::from_raw(w.grid().clone(), v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(m: u32) -> Arc<RadialGrid> {
        RadialGrid::standard(m).unwrap().shared()
    }

    #[test]
    fn closed_form_nodes() {
        let g = grid(1);
        let h = reference_harmonic(g.clone());
        let mid = h.values()[1024];
        assert!((mid - Vec3::new(1.0, 0.0, 0.0)).max_abs() < 1e-15);
        // m = 2, r = √2: y = 2 log √2 = log 2
        let v = harmonic_value(2, 2.0f64.ln(), HarmonicParams::IDENTITY);
        assert!((v - Vec3::new(0.8, 0.0, 0.6)).max_abs() < 1e-15);
        assert!((h.values()[0] + Vec3::K).max_abs() < 1e-4);
    }

    #[test]
    fn symmetry_examples() {
        let g = grid(1);
        let h = reference_harmonic(g.clone());
        let same = apply_symmetry(&h, HarmonicParams::IDENTITY);
        for (a, b) in same.values().iter().zip(h.values()) {
            assert!((*a - *b).max_abs() < 1e-15);
        }
        let flip = apply_symmetry(&h, HarmonicParams::new(1.0, PI).unwrap());
        for (a, b) in flip.values().iter().zip(h.values()) {
            assert!((a[0] + b[0]).abs() < 1e-15 && a[1].abs() < 1e-15 && (a[2] - b[2]).abs() < 1e-15);
        }
        // h(r/2) against the closed form; the first nodes read the -k̂ ghost values
        let s2 = apply_symmetry(&h, HarmonicParams::new(2.0, 0.0).unwrap());
        for (j, y) in g.y().iter().enumerate().skip(100) {
            let exact = reference_value(y - 2.0f64.ln());
            assert!((s2.values()[j] - exact).max_abs() < 1e-10, "node {j}");
        }
    }

    #[test]
    fn wrap() {
        assert_eq!(wrap_angle(PI), -PI);
        assert_eq!(wrap_angle(-PI), -PI);
        assert!((wrap_angle(3.0 * PI + 0.5) - (-PI + 0.5)).abs() < 1e-12);
        assert!((wrap_angle(0.4) - 0.4).abs() < 1e-16);
    }

    #[test]
    fn bogomolny_vanishes_on_family() {
        for m in 1..=3 {
            let g = grid(m);
            let h = harmonic_profile(g, HarmonicParams::new(1.3, 0.7).unwrap());
            assert!(bogomolny_residual(&h) < 1e-6, "m = {m}");
        }
    }

    #[test]
    fn twisted_profile_is_not_harmonic() {
        // -h(-y) = e^{πR} h is harmonic again, so twist the phase along y instead
        let g = grid(1);
        let h = reference_harmonic(g.clone());
        let v: Vec<Vec3> = h.values().iter().zip(g.y()).map(|(x, y)| x.rotate_k(2.0 * y.tanh())).collect();
        let a = SphereProfile::new(g, v).unwrap();
        assert!(bogomolny_residual(&a) > 0.5, "{}", bogomolny_residual(&a));
    }

    #[test]
    fn stereographic_of_family() {
        let g = RadialGrid::new(2, -10.0, 10.0, 1001).unwrap().shared();
        let p = HarmonicParams::new(1.5, 0.3).unwrap();
        let h = harmonic_profile(g.clone(), p);
        let w = stereographic(&h).unwrap();
        for (j, r) in g.r().iter().enumerate() {
            let exact = Complex64::from_polar((r / 1.5).powi(-2), 0.3);
            assert!((w.values()[j] - exact).norm() <= 1e-6 * exact.norm(), "node {j}");
        }
        let back = inverse_stereographic(&w);
        for (a, b) in back.values().iter().zip(h.values()) {
            assert!((*a - *b).max_abs() < 1e-10);
        }
        let full = harmonic_profile(grid(1), p);
        assert!(matches!(stereographic(&full), Err(Error::PoleProximity { node: 0, .. })));
    }
}
