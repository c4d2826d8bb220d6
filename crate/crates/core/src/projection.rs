//! Nearest harmonic map in `Ḣ¹`: the modulation parameters `(s, α)`, the
//! distance to the family and the decomposition `ξ = z1 e + z2 J^h e + γ h`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::energy::energy_split_with;
use crate::error::{Error, Result};
use crate::geometry::{harmonic_value, jhe, reference_value, HarmonicParams, SphereProfile, TOL_BC};
use crate::grid::RadialGrid;
use crate::linops::x_inner;
use crate::vec3::Vec3;

/// Default projection gate `δ = 0.3`, applied to the excess as `δ²`.
pub const DEFAULT_GATE_DELTA: f64 = 0.3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionOptions {
    pub centre_log_s: f64,
    pub half_width: f64,
    pub scan_points: usize,
    pub tol_log_s: f64,
    pub gate_delta: f64,
    pub tol_bc: f64,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        ProjectionOptions {
            centre_log_s: 0.0,
            half_width: 2.0,
            scan_points: 81,
            tol_log_s: 1e-10,
            gate_delta: DEFAULT_GATE_DELTA,
            tol_bc: TOL_BC,
        }
    }
}

/// Perturbation relative to `h` at given parameters, on the reference scale.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub xi: Vec<Vec3>,
    pub z: Vec<Complex64>,
    pub gamma: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct HarmonicFit {
    pub grid: Arc<RadialGrid>,
    pub params: HarmonicParams,
    pub dist: f64,
    pub excess: f64,
    pub decomposition: Decomposition,
    pub orth1: f64,
    pub orth2_residual: f64,
    /// `‖z‖_X`, the scale for the certificates.
    pub z_norm: f64,
    pub certified: bool,
}

/// JSON form of a fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub s: f64,
    pub alpha: f64,
    pub dist: f64,
    pub orth1: f64,
    pub orth2_residual: f64,
    pub certified: bool,
}

impl HarmonicFit {
    pub fn summary(&self) -> FitSummary {
        FitSummary {
            s: self.params.s,
            alpha: self.params.alpha,
            dist: self.dist,
            orth1: self.orth1,
            orth2_residual: self.orth2_residual,
            certified: self.certified,
        }
    }

    pub fn require_certified(self, gate_delta: f64) -> Result<Self> {
        if self.certified {
            Ok(self)
        } else {
            Err(Error::OutsideProjectionRegime { excess: self.excess, gate: gate_delta * gate_delta })
        }
    }
}

/// `2πm ∫ (a'·b' + Ra·Rb) dy` on raw samples.
pub fn h1dot_inner_raw(grid: &RadialGrid, a: &[Vec3], b: &[Vec3]) -> f64 {
    let da = grid.deriv_y(a);
    let db = grid.deriv_y(b);
    let dens: Vec<f64> =
        (0..grid.n()).map(|j| da[j].dot(db[j]) + a[j][0] * b[j][0] + a[j][1] * b[j][1]).collect();
    2.0 * PI * grid.mf() * grid.integrate_dy(&dens)
}

pub fn h1dot_norm_raw(grid: &RadialGrid, a: &[Vec3]) -> f64 {
    h1dot_inner_raw(grid, a, a).max(0.0).sqrt()
}

pub fn h1dot_inner(p: &SphereProfile, q: &SphereProfile) -> Result<f64> {
    if p.grid().spec() != q.grid().spec() {
        return Err(Error::GridMismatch("profiles live on different grids".into()));
    }
    Ok(h1dot_inner_raw(p.grid(), p.values(), q.values()))
}

fn family_samples(grid: &RadialGrid, p: HarmonicParams) -> Vec<Vec3> {
    let m = grid.m();
    grid.y().iter().map(|&y| harmonic_value(m, y, p)).collect()
}

/// Minimisation of `F(s, α) = ‖u - h^{s,α}‖²` with α eliminated in closed form.
pub struct Objective<'a> {
    grid: &'a RadialGrid,
    u: &'a [Vec3],
    du: Vec<Vec3>,
}

impl<'a> Objective<'a> {
    pub fn new(profile: &'a SphereProfile) -> Self {
        let grid = profile.grid();
        Objective { grid, u: profile.values(), du: grid.deriv_y(profile.values()) }
    }

    /// `α*(s) = atan2(Q, P)` with `P = ⟨u, (g1, 0, 0)⟩`, `Q = ⟨u, (0, g1, 0)⟩`.
    pub fn best_alpha(&self, log_s: f64) -> f64 {
        let g = self.grid;
        let mf = g.mf();
        let g1: Vec<f64> = g.y().iter().map(|y| 1.0 / (y - mf * log_s).cosh()).collect();
        let dg1 = g.deriv_y(&g1);
        let (mut p, mut q) = (0.0, 0.0);
        for j in 0..g.n() {
            let w = g.w_dy()[j];
            p += w * (self.du[j][0] * dg1[j] + self.u[j][0] * g1[j]);
            q += w * (self.du[j][1] * dg1[j] + self.u[j][1] * g1[j]);
        }
        if p == 0.0 && q == 0.0 {
            0.0
        } else {
            q.atan2(p)
        }
    }

    pub fn params_at(&self, log_s: f64) -> HarmonicParams {
        HarmonicParams { s: log_s.exp(), alpha: crate::geometry::wrap_angle(self.best_alpha(log_s)) }
    }

    /// `F(s, α)` evaluated as the norm of the difference.
    pub fn value(&self, p: HarmonicParams) -> f64 {
        let h = family_samples(self.grid, p);
        let diff: Vec<Vec3> = self.u.iter().zip(&h).map(|(a, b)| *a - *b).collect();
        h1dot_inner_raw(self.grid, &diff, &diff)
    }

    /// `min_α F(s, α)`.
    pub fn reduced(&self, log_s: f64) -> f64 {
        self.value(self.params_at(log_s))
    }

    /// Coarse scan then golden section. Returns `(log s, F)`.
    pub fn minimise(&self, opts: &ProjectionOptions) -> Result<(f64, f64)> {
        let k = opts.scan_points.max(3);
        let lo = opts.centre_log_s - opts.half_width;
        let step = 2.0 * opts.half_width / (k - 1) as f64;
        let values: Vec<f64> = (0..k).map(|i| self.reduced(lo + i as f64 * step)).collect();
        let mut best = 0;
        for (i, v) in values.iter().enumerate() {
            if *v < values[best] - 1e-12 {
                best = i;
            }
        }
        if best == 0 || best == k - 1 {
            return Err(Error::ScaleOutOfRange { log_s: lo + best as f64 * step });
        }
        let invphi = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (lo + (best - 1) as f64 * step, lo + (best + 1) as f64 * step);
        let mut c = b - invphi * (b - a);
        let mut d = a + invphi * (b - a);
        let (mut fc, mut fd) = (self.reduced(c), self.reduced(d));
        while b - a > opts.tol_log_s {
            if fc <= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - invphi * (b - a);
                fc = self.reduced(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + invphi * (b - a);
                fd = self.reduced(d);
            }
        }
        let x = if fc <= fd { c } else { d };
        Ok((x, fc.min(fd)))
    }
}

pub fn project(profile: &SphereProfile) -> Result<HarmonicFit> {
    project_with(profile, &ProjectionOptions::default())
}

pub fn project_with(profile: &SphereProfile, opts: &ProjectionOptions) -> Result<HarmonicFit> {
    let report = energy_split_with(profile, opts.tol_bc)?;
    let obj = Objective::new(profile);
    let (log_s, _) = obj.minimise(opts)?;
    let params = obj.params_at(log_s);
    let dist = obj.value(params).max(0.0).sqrt();
    let grid = profile.grid().clone();
    let decomposition = decompose(profile, params);
    let (orth1, orth2_residual) = certificates(&grid, &decomposition);
    let z1: Vec<f64> = decomposition.z.iter().map(|z| z.re).collect();
    let z2: Vec<f64> = decomposition.z.iter().map(|z| z.im).collect();
    let z_norm = (x_inner(&grid, &z1, &z1) + x_inner(&grid, &z2, &z2)).max(0.0).sqrt();
    let gate = opts.gate_delta * opts.gate_delta;
    Ok(HarmonicFit {
        grid,
        params,
        dist,
        excess: report.excess,
        decomposition,
        orth1,
        orth2_residual,
        z_norm,
        certified: report.excess < gate,
    })
}

/// `ξ(r) = e^{-αR} v(s r) - h(r)` and its coordinates in `(e, J^h e, h)`.
pub fn decompose(profile: &SphereProfile, p: HarmonicParams) -> Decomposition {
    let g = profile.grid();
    let moved = g.shift(profile.values(), g.mf() * p.s.ln(), -Vec3::K, Vec3::K);
    let mut xi = Vec::with_capacity(g.n());
    let mut z = Vec::with_capacity(g.n());
    let mut gamma = Vec::with_capacity(g.n());
    for (j, v) in moved.into_iter().enumerate() {
        let h = reference_value(g.y()[j]);
        let x = v.normalized().rotate_k(-p.alpha) - h;
        z.push(Complex64::new(x.dot(Vec3::E), x.dot(jhe(h))));
        gamma.push(x.dot(h));
        xi.push(x);
    }
    Decomposition { xi, z, gamma }
}

/// `(⟨z1, h1⟩_X, ⟨z2, h1⟩_X - ∫ (4m²/r²) h1² h3 γ r dr)`.
pub fn certificates(grid: &RadialGrid, d: &Decomposition) -> (f64, f64) {
    let h1: Vec<f64> = grid.y().iter().map(|y| 1.0 / y.cosh()).collect();
    let z1: Vec<f64> = d.z.iter().map(|z| z.re).collect();
    let z2: Vec<f64> = d.z.iter().map(|z| z.im).collect();
    let mf = grid.mf();
    let src: Vec<f64> = (0..grid.n())
        .map(|j| {
            let y = grid.y()[j];
            let r = grid.r()[j];
            4.0 * mf * mf / (r * r) * h1[j] * h1[j] * y.tanh() * d.gamma[j]
        })
        .collect();
    (x_inner(grid, &z1, &h1), x_inner(grid, &z2, &h1) - grid.integrate_rdr(&src))
}

pub fn orthogonality_certificates(fit: &HarmonicFit) -> (f64, f64) {
    (fit.orth1, fit.orth2_residual)
}

/// `‖ξ‖_∞ / dist`, with 0/0 read as 0.
pub fn pointwise_smallness(fit: &HarmonicFit) -> f64 {
    let sup = fit.decomposition.xi.iter().fold(0.0f64, |a, x| a.max(x.norm()));
    if fit.dist == 0.0 {
        return if sup == 0.0 { 0.0 } else { f64::INFINITY };
    }
    sup / fit.dist
}

/// `‖h^{p1} - h^{p2}‖_{Ḣ¹}` from closed-form samples.
pub fn family_gap(grid: &RadialGrid, p1: HarmonicParams, p2: HarmonicParams) -> f64 {
    let a = family_samples(grid, p1);
    let b = family_samples(grid, p2);
    let d: Vec<Vec3> = a.iter().zip(&b).map(|(x, y)| *x - *y).collect();
    h1dot_norm_raw(grid, &d)
}

/// `(|α| + |s - 1|) / ‖h - h^{s,α}‖_{Ḣ¹}`.
pub fn param_closeness_ratio(grid: &RadialGrid, p: HarmonicParams) -> f64 {
    let gap = family_gap(grid, HarmonicParams::IDENTITY, p);
    (p.alpha.abs() + (p.s - 1.0).abs()) / gap
}

/// `‖(h^{p1} + h^{p2})/2 - h^{s̄,ᾱ}‖_{Ḣ¹}` with arithmetic means of the parameters.
pub fn midpoint_defect(grid: &RadialGrid, p1: HarmonicParams, p2: HarmonicParams) -> f64 {
    let a = family_samples(grid, p1);
    let b = family_samples(grid, p2);
    let mid = HarmonicParams { s: 0.5 * (p1.s + p2.s), alpha: 0.5 * (p1.alpha + p2.alpha) };
    let c = family_samples(grid, mid);
    let d: Vec<Vec3> = (0..grid.n()).map(|j| (a[j] + b[j]) * 0.5 - c[j]).collect();
    h1dot_norm_raw(grid, &d)
}
