//! Parallel frame along the profile, the complex fields `q` and `ν`, the
//! nonlocal term `N(q)` and residual checks of the equation satisfied by `q`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SphereProfile;
use crate::grid::RadialGrid;
use crate::projection::HarmonicFit;
use crate::vec3::Vec3;

#[derive(Clone, Debug)]
pub struct GaugeField {
    pub grid: Arc<RadialGrid>,
    pub frame: Vec<Vec3>,
    pub q: Vec<Complex64>,
    pub nu: Vec<Complex64>,
    /// Rotation applied to the anchor `normalise(P^v(0,1,0))` at `r_min`.
    pub anchor_angle: f64,
}

/// Frame with `D_r ê = 0`, anchored at `r_min` by `normalise(P^v (0, 1, 0))`.
pub fn parallel_frame(profile: &SphereProfile) -> Result<Vec<Vec3>> {
    let g = profile.grid();
    let v = profile.values();
    let n = g.n();
    let dv = g.deriv_y(v);
    let h = g.dy();
    let vm = g.shift(v, 0.5 * h, -Vec3::K, Vec3::K);
    let dvm = g.shift(&dv, 0.5 * h, Vec3::ZERO, Vec3::ZERO);
    let anchor = Vec3::E.tangent_at(v[0]);
    if anchor.norm() < 1e-6 {
        return Err(Error::DegenerateAnchor(anchor.norm()));
    }
    let mut e = Vec::with_capacity(n);
    let mut cur = anchor.normalized();
    e.push(cur);
    for j in 0..n - 1 {
        // ê_y = (v × v_y) × ê
        let w0 = v[j].cross(dv[j]);
        let wm = vm[j].cross(dvm[j]);
        let w1 = v[j + 1].cross(dv[j + 1]);
        let k1 = w0.cross(cur);
        let k2 = wm.cross(cur + k1 * (0.5 * h));
        let k3 = wm.cross(cur + k2 * (0.5 * h));
        let k4 = w1.cross(cur + k3 * h);
        let next = cur + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        cur = next.tangent_at(v[j + 1]).normalized();
        e.push(cur);
    }
    Ok(e)
}

/// Rotates a frame within each tangent plane: `ê ↦ cos χ ê + sin χ J^v ê`.
pub fn rotate_frame(profile: &SphereProfile, frame: &[Vec3], chi: f64) -> Vec<Vec3> {
    let (s, c) = chi.sin_cos();
    frame.iter().zip(profile.values()).map(|(e, v)| *e * c + v.cross(*e) * s).collect()
}

fn coordinates(profile: &SphereProfile, frame: &[Vec3], x: &[Vec3]) -> Vec<Complex64> {
    x.iter()
        .zip(frame)
        .zip(profile.values())
        .map(|((x, e), v)| Complex64::new(x.dot(*e), x.dot(v.cross(*e))))
        .collect()
}

/// Coordinates of `v_r - (m/r) J^v R v` in `(ê, J^v ê)`.
pub fn compute_q(profile: &SphereProfile, frame: &[Vec3]) -> Vec<Complex64> {
    coordinates(profile, frame, &crate::geometry::bogomolny_field(profile))
}

/// Coordinates of `J^v R v` in `(ê, J^v ê)`.
pub fn compute_nu(profile: &SphereProfile, frame: &[Vec3]) -> Vec<Complex64> {
    let w: Vec<Vec3> = profile.values().iter().map(|v| v.cross(v.rot())).collect();
    coordinates(profile, frame, &w)
}

pub fn gauge_field(profile: &SphereProfile) -> Result<GaugeField> {
    gauge_field_anchored(profile, 0.0)
}

pub fn gauge_field_anchored(profile: &SphereProfile, chi: f64) -> Result<GaugeField> {
    let mut frame = parallel_frame(profile)?;
    if chi != 0.0 {
        frame = rotate_frame(profile, &frame, chi);
    }
    Ok(GaugeField {
        grid: profile.grid().clone(),
        q: compute_q(profile, &frame),
        nu: compute_nu(profile, &frame),
        frame,
        anchor_angle: chi,
    })
}

/// `∫ |q|² r dr`.
pub fn q_norm2_rdr(grid: &RadialGrid, q: &[Complex64]) -> f64 {
    grid.integrate_rdr(&q.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>())
}

/// `N(r) = Re ∫_r^∞ (q̄ + (m/r) ν̄)(q_r + ((1 - m v3)/r) q) dr`.
pub fn nonlocal_n(grid: &RadialGrid, q: &[Complex64], nu: &[Complex64], v3: &[f64]) -> Vec<f64> {
    let mf = grid.mf();
    let qr = grid.deriv_r(q);
    let f: Vec<f64> = (0..grid.n())
        .map(|j| {
            let r = grid.r()[j];
            let a = q[j].conj() + nu[j].conj() * (mf / r);
            let b = qr[j] + q[j] * ((1.0 - mf * v3[j]) / r);
            (a * b).re
        })
        .collect();
    grid.tail_integral_dr(&f)
}

/// The same quantity after integrating `Re q̄ q_r` by parts:
/// `-|q|²/2 + R1 + R2 + R3`.
pub fn nonlocal_n_split(grid: &RadialGrid, q: &[Complex64], nu: &[Complex64], v3: &[f64]) -> Vec<f64> {
    let mf = grid.mf();
    let qr = grid.deriv_r(q);
    let f: Vec<f64> = (0..grid.n())
        .map(|j| {
            let r = grid.r()[j];
            let c = 1.0 - mf * v3[j];
            let r1 = c / r * q[j].norm_sqr();
            let r2 = (nu[j].conj() * qr[j]).re * mf / r;
            let r3 = (nu[j].conj() * q[j]).re * mf * c / (r * r);
            r1 + r2 + r3
        })
        .collect();
    let tail = grid.tail_integral_dr(&f);
    (0..grid.n()).map(|j| -0.5 * q[j].norm_sqr() + tail[j]).collect()
}

/// `‖ν̄_r + v3 q̄ + (m/r) v3 ν̄‖_{L²(r dr)}`.
pub fn nu_derivative_identity(profile: &SphereProfile, frame: &[Vec3]) -> f64 {
    let g = profile.grid();
    let mf = g.mf();
    let q = compute_q(profile, frame);
    let nu = compute_nu(profile, frame);
    let nur = g.deriv_r(&nu);
    let dens: Vec<f64> = (0..g.n())
        .map(|j| {
            let v3 = profile.values()[j][2];
            (nur[j] + q[j] * v3 + nu[j] * (mf * v3 / g.r()[j])).norm_sqr()
        })
        .collect();
    g.integrate_rdr(&dens).sqrt()
}

/// `Δu` profile `a = (m²/r²)(v_yy + R²v)` with `R²v = (-v1, -v2, 0)`.
pub fn laplacian_profile(profile: &SphereProfile) -> Vec<Vec3> {
    let g = profile.grid();
    let mf = g.mf();
    let d2 = g.deriv_yy(profile.values());
    (0..g.n())
        .map(|j| {
            let v = profile.values()[j];
            let r = g.r()[j];
            (d2[j] + Vec3::new(-v[0], -v[1], 0.0)) * (mf * mf / (r * r))
        })
        .collect()
}

/// `‖Δu‖_{L²(ℝ²)}`.
pub fn h2_norm(profile: &SphereProfile) -> f64 {
    let a = laplacian_profile(profile);
    let g = profile.grid();
    (2.0 * PI * g.integrate_rdr(&a.iter().map(|x| x.norm2()).collect::<Vec<_>>())).sqrt()
}

/// `‖f‖_{L^p(ℝ²)}` with measure `2π r dr`, optionally restricted to `y ≥ y_from`.
pub fn lp_norm_2d<T: Copy>(grid: &RadialGrid, f: &[T], abs: impl Fn(T) -> f64, p: f64) -> f64 {
    let v: Vec<f64> = f.iter().map(|x| abs(*x).powf(p)).collect();
    (2.0 * PI * grid.integrate_rdr(&v)).powf(1.0 / p)
}

fn lp_c(grid: &RadialGrid, f: &[Complex64], p: f64) -> f64 {
    lp_norm_2d(grid, f, |z| z.norm(), p)
}

/// A profile at a time instant.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub t: f64,
    pub profile: SphereProfile,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualWindow {
    /// Lower end of the spatial window in y. Below `r ≈ 0.1` the local
    /// frequencies `~ m²/r²` are far beyond any practical time step and the
    /// field there is dominated by amplified roundoff.
    pub y_from: f64,
    pub y_to: f64,
    pub t_from: f64,
    pub t_to: f64,
}

impl ResidualWindow {
    pub fn default_for(grid: &RadialGrid) -> Self {
        ResidualWindow {
            y_from: (grid.mf() * 0.1f64.ln()).max(grid.y()[0]),
            y_to: grid.y()[grid.n() - 1],
            t_from: f64::NEG_INFINITY,
            t_to: f64::INFINITY,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualSample {
    pub t: f64,
    pub lambda: f64,
    pub residual: f64,
    pub rhs_norm: f64,
}

fn check_equispaced(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(Error::InvalidParameter("need at least two snapshots".into()));
    }
    let tau = times[1] - times[0];
    if !(tau > 0.0) {
        return Err(Error::NotEquispaced);
    }
    for w in times.windows(2) {
        if ((w[1] - w[0]) - tau).abs() > 1e-9 * tau.max(1.0) {
            return Err(Error::NotEquispaced);
        }
    }
    Ok(tau)
}

/// Right-hand side `-Δ_r q + ((1 - m v3)²/r²) q + (m (v3)_r / r) q + q N(q)`.
pub fn q_equation_rhs(profile: &SphereProfile, gauge: &GaugeField) -> Vec<Complex64> {
    let g = profile.grid();
    let mf = g.mf();
    let v3 = profile.component(2);
    let q = &gauge.q;
    let qyy = g.deriv_yy(q);
    let v3y = g.deriv_y(&v3);
    let n = nonlocal_n(g, q, &gauge.nu, &v3);
    (0..g.n())
        .map(|j| {
            let r = g.r()[j];
            let c = 1.0 - mf * v3[j];
            let lap = qyy[j] * (mf * mf / (r * r));
            -lap + q[j] * (c * c / (r * r) + mf * mf / (r * r) * v3y[j] + n[j])
        })
        .collect()
}

/// λ-corrected residual of `i q_t = RHS` with centred time differences.
pub fn nls_residual(history: &[Snapshot], window: &ResidualWindow) -> Result<Vec<ResidualSample>> {
    if history.len() < 3 {
        return Err(Error::InvalidParameter("need at least three snapshots".into()));
    }
    let times: Vec<f64> = history.iter().map(|s| s.t).collect();
    let tau = check_equispaced(&times)?;
    let g = history[0].profile.grid().clone();
    for s in history {
        if s.profile.grid().spec() != g.spec() {
            return Err(Error::GridMismatch("snapshots on different grids".into()));
        }
    }
    let gauges: Vec<GaugeField> = history.iter().map(|s| gauge_field(&s.profile)).collect::<Result<_>>()?;
    let mask: Vec<f64> = g
        .y()
        .iter()
        .map(|&y| if y >= window.y_from && y <= window.y_to { 1.0 } else { 0.0 })
        .collect();
    let mut out = Vec::new();
    for k in 1..history.len() - 1 {
        let t = times[k];
        if t < window.t_from || t > window.t_to {
            continue;
        }
        let rhs = q_equation_rhs(&history[k].profile, &gauges[k]);
        let q = &gauges[k].q;
        let a: Vec<Complex64> = (0..g.n())
            .map(|j| {
                let qt = (gauges[k + 1].q[j] - gauges[k - 1].q[j]) / (2.0 * tau);
                Complex64::i() * qt - rhs[j]
            })
            .collect();
        let wq: Vec<f64> = (0..g.n()).map(|j| mask[j] * q[j].norm_sqr()).collect();
        let wqa: Vec<f64> = (0..g.n()).map(|j| mask[j] * (q[j].conj() * a[j]).re).collect();
        let qq = g.integrate_rdr(&wq);
        let lambda = if qq > 0.0 { -g.integrate_rdr(&wqa) / qq } else { 0.0 };
        let res: Vec<f64> = (0..g.n()).map(|j| mask[j] * (a[j] + q[j] * lambda).norm_sqr()).collect();
        let rn: Vec<f64> = (0..g.n()).map(|j| mask[j] * rhs[j].norm_sqr()).collect();
        out.push(ResidualSample {
            t,
            lambda,
            residual: g.integrate_rdr(&res).sqrt(),
            rhs_norm: g.integrate_rdr(&rn).sqrt(),
        });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpacetimeNorms {
    pub l4_l4: f64,
    pub linf_l2: f64,
    pub l83_l8: f64,
}

/// Mixed norms of `q` over `[t_from, t_to]` (trapezoid in t, `2π r dr` in x).
pub fn spacetime_norms(grid: &RadialGrid, times: &[f64], q: &[Vec<Complex64>], t_from: f64, t_to: f64) -> SpacetimeNorms {
    let idx: Vec<usize> = (0..times.len()).filter(|&k| times[k] >= t_from && times[k] <= t_to).collect();
    if idx.is_empty() {
        return SpacetimeNorms::default();
    }
    let l4: Vec<f64> = idx.iter().map(|&k| lp_c(grid, &q[k], 4.0).powi(4)).collect();
    let l8: Vec<f64> = idx.iter().map(|&k| lp_c(grid, &q[k], 8.0).powf(8.0 / 3.0)).collect();
    let linf_l2 = idx.iter().map(|&k| lp_c(grid, &q[k], 2.0)).fold(0.0, f64::max);
    let trap = |v: &[f64]| -> f64 {
        (1..idx.len()).map(|i| 0.5 * (times[idx[i]] - times[idx[i - 1]]) * (v[i] + v[i - 1])).sum()
    };
    SpacetimeNorms { l4_l4: trap(&l4).powf(0.25), linf_l2, l83_l8: trap(&l8).powf(3.0 / 8.0) }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZControl {
    /// `(‖z_r‖_p + ‖z/r‖_p) / (s^{1-2/p} ‖q‖_p + ‖q‖_2)` for p = 2, 4, 8.
    pub lp: [f64; 3],
    /// `‖z_rr‖_2 / (s‖q_r‖_2 + s‖q/r‖_2 + s‖q‖²_4 + ‖q‖_2)`.
    pub zrr: f64,
    /// `‖u‖_{Ḣ²} / (1/s + ‖q_r‖ + ‖q/r‖ + ‖q‖²_4 + ‖q‖_2/s)`.
    pub h2: f64,
}

/// Ratios bounding `z` by `q` for a fitted profile.
pub fn z_control(profile: &SphereProfile, fit: &HarmonicFit, gauge: &GaugeField) -> ZControl {
    let g = profile.grid();
    let s = fit.params.s;
    let z = &fit.decomposition.z;
    let zr = g.deriv_r(z);
    let zrr = g.deriv_r(&zr);
    let z_over_r: Vec<Complex64> = z.iter().zip(g.r()).map(|(z, r)| z / r).collect();
    let q = &gauge.q;
    let qr = g.deriv_r(q);
    let q_over_r: Vec<Complex64> = q.iter().zip(g.r()).map(|(q, r)| q / r).collect();
    let q2 = lp_c(g, q, 2.0);
    let guard = |num: f64, den: f64| if num == 0.0 { 0.0 } else { num / den };
    let mut lp = [0.0; 3];
    for (i, p) in [2.0, 4.0, 8.0].into_iter().enumerate() {
        let num = lp_c(g, &zr, p) + lp_c(g, &z_over_r, p);
        let den = s.powf(1.0 - 2.0 / p) * lp_c(g, q, p) + q2;
        lp[i] = guard(num, den);
    }
    let q4 = lp_c(g, q, 4.0);
    let (qr2, qor2) = (lp_c(g, &qr, 2.0), lp_c(g, &q_over_r, 2.0));
    let zrr_ratio = guard(lp_c(g, &zrr, 2.0), s * qr2 + s * qor2 + s * q4 * q4 + q2);
    let h2 = h2_norm(profile) / (1.0 / s + qr2 + qor2 + q4 * q4 + q2 / s);
    ZControl { lp, zrr: zrr_ratio, h2 }
}
