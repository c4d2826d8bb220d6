//! Time integration of `v_t = v × a`, `a = (m²/r²)(v_yy + R²v)`, with
//! per-snapshot diagnostics.
//!
//! Each step solves the implicit midpoint equation
//! `w = v + (dt/2) w × A(w)` by Newton's method on the block-banded Jacobian
//! and sets `v ← 2w - v`. At the solution this is the per-node Cayley rotation
//! of `v` generated by `A(w)`, so `|v|` is kept; the result is renormalised to
//! remove the Newton residual. The two end nodes keep their initial values.
//! `A` uses one symmetric 5-point stencil, with fixed ghost values past the
//! ends, so the scheme conserves
//! [`Stepper::discrete_energy`] up to the Newton tolerance.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::banded::BandMatrix;
use crate::energy::energy_split_with;
use crate::error::{Error, Result};
use crate::families::{bump_profile, bump_with_excess, random_bump, scale_mismatch_profile, Bump};
use crate::gauge::{gauge_field, h2_norm, q_norm2_rdr, Snapshot};
use crate::geometry::{harmonic_profile, wrap_angle, HarmonicParams, SphereProfile, TOL_BC};
use crate::grid::{GridSpec, RadialGrid};
use crate::projection::{project_with, ProjectionOptions, DEFAULT_GATE_DELTA};
use crate::vec3::Vec3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BumpSize {
    /// `Ḣ¹` norm of the perturbation before renormalisation.
    H1(f64),
    /// Target excess energy `δ₁²`.
    Excess(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum InitialData {
    Harmonic {
        s: f64,
        alpha: f64,
    },
    /// Gaussian bump along `cos φ e + sin φ J^h e`; `φ = π/2` is a pure `z2` bump.
    Bump {
        s: f64,
        alpha: f64,
        centre: f64,
        width: f64,
        #[serde(default = "half_pi")]
        direction: f64,
        size: BumpSize,
    },
    /// Bump parameters drawn from the master seed, scaled to the given excess.
    RandomBump {
        excess: f64,
    },
    /// `h̃(y - A sech(y/L))`: a scale that varies slowly in r.
    ScaleMismatch {
        s: f64,
        alpha: f64,
        amplitude: f64,
        length: f64,
    },
}

fn half_pi() -> f64 {
    PI / 2.0
}

impl InitialData {
    pub fn build(&self, grid: Arc<RadialGrid>, seed: u64) -> Result<SphereProfile> {
        match *self {
            InitialData::Harmonic { s, alpha } => Ok(harmonic_profile(grid, HarmonicParams::new(s, alpha)?)),
            InitialData::Bump { s, alpha, centre, width, direction, size } => {
                let p = HarmonicParams::new(s, alpha)?;
                if !(width > 0.0) {
                    return Err(Error::InvalidParameter(format!("bump width must be positive, got {width}")));
                }
                let shape = Bump { centre, width, a: direction.cos(), b: direction.sin() };
                match size {
                    BumpSize::H1(eps) => {
                        let k = eps / crate::families::bump_size(&grid, &shape);
                        Ok(bump_profile(grid, p, &shape.scaled(k)))
                    }
                    BumpSize::Excess(e) => Ok(bump_with_excess(grid, p, &shape, e)?.0),
                }
            }
            InitialData::RandomBump { excess } => {
                let (p, shape) = random_bump(seed);
                Ok(bump_with_excess(grid, p, &shape, excess)?.0)
            }
            InitialData::ScaleMismatch { s, alpha, amplitude, length } => {
                if !(length > 0.0) {
                    return Err(Error::InvalidParameter(format!("length must be positive, got {length}")));
                }
                Ok(scale_mismatch_profile(grid, HarmonicParams::new(s, alpha)?, amplitude, length))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Diagnostics {
    pub gauge: bool,
    pub projection: bool,
}

impl Default for Diagnostics {
    fn default() -> Self {
        Diagnostics { gauge: true, projection: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub grid: GridSpec,
    pub initial: InitialData,
    pub t_end: f64,
    pub dt: f64,
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
    #[serde(default = "default_gate")]
    pub projection_gate: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub diagnostics: Diagnostics,
    #[serde(default = "default_newton_tol")]
    pub newton_tol: f64,
}

fn default_stride() -> usize {
    10
}
fn default_gate() -> f64 {
    DEFAULT_GATE_DELTA
}
fn default_newton_tol() -> f64 {
    1e-12
}

impl FlowConfig {
    pub fn new(grid: GridSpec, initial: InitialData, t_end: f64, dt: f64) -> Self {
        FlowConfig {
            grid,
            initial,
            t_end,
            dt,
            snapshot_stride: default_stride(),
            projection_gate: default_gate(),
            seed: 0,
            diagnostics: Diagnostics::default(),
            newton_tol: default_newton_tol(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter(format!("t_end must be >= 0, got {}", self.t_end)));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::InvalidParameter("snapshot_stride must be >= 1".into()));
        }
        if !(self.projection_gate > 0.0) {
            return Err(Error::InvalidParameter("projection_gate must be positive".into()));
        }
        if !(self.newton_tol > 0.0) {
            return Err(Error::InvalidParameter("newton_tol must be positive".into()));
        }
        RadialGrid::from_spec(self.grid)?;
        Ok(())
    }

    /// Number of steps and the step actually used (`t_end / steps`).
    pub fn steps(&self) -> (usize, f64) {
        let k = (self.t_end / self.dt - 1e-9).ceil().max(0.0) as usize;
        if k == 0 {
            (0, self.dt)
        } else {
            (k, self.t_end / k as f64)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowRecord {
    pub t: f64,
    pub energy: f64,
    pub excess: f64,
    pub s: f64,
    /// Unwrapped continuously along the run.
    pub alpha: f64,
    pub dist: f64,
    pub h2: f64,
    pub s_h2: f64,
    /// `‖q‖_{L²(r dr)}`.
    pub q_l2: f64,
    pub bogomolny_term: f64,
    /// `max_j ||v_j| - 1|`.
    pub norm_drift: f64,
    /// Largest Newton iteration count since the previous record.
    pub newton_iters: usize,
    /// Last Newton update norm.
    pub newton_update: f64,
    pub certified: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepInfo {
    pub iterations: usize,
    pub update: f64,
}

/// Implicit-midpoint stepper on a fixed grid.
pub struct Stepper {
    grid: Arc<RadialGrid>,
    coef: Vec<f64>,
    /// Values at `y_min - dy` and `y_max + dy`, extrapolated once from the
    /// initial data and held fixed like the end nodes.
    ghost: [Vec3; 2],
    pub dt: f64,
    pub tol: f64,
    pub max_iter: usize,
}

const D2: [f64; 5] = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];

impl Stepper {
    /// `v0` supplies the pinned end values and the ghost extrapolation.
    pub fn new(grid: Arc<RadialGrid>, dt: f64, tol: f64, v0: &[Vec3]) -> Self {
        let mf = grid.mf();
        let coef = grid.r().iter().map(|r| mf * mf / (r * r)).collect();
        let n = v0.len();
        // cubic extrapolation; a constant ghost would leave node 1 O(dy) inconsistent,
        // which the m²/r² factor turns into a node flipping every step
        let cubic = |a: Vec3, b: Vec3, c: Vec3, d: Vec3| a * 4.0 - b * 6.0 + c * 4.0 - d;
        let ghost = [cubic(v0[0], v0[1], v0[2], v0[3]), cubic(v0[n - 1], v0[n - 2], v0[n - 3], v0[n - 4])];
        Stepper { grid, coef, ghost, dt, tol, max_iter: 30 }
    }

    /// Index read by stencil tap `k` at interior node `j`, in `-1..=n`.
    #[inline]
    fn tap(j: usize, k: usize) -> isize {
        j as isize + k as isize - 2
    }

    #[inline]
    fn value(&self, v: &[Vec3], i: isize) -> Vec3 {
        if i < 0 {
            self.ghost[0]
        } else if i as usize >= v.len() {
            self.ghost[1]
        } else {
            v[i as usize]
        }
    }

    /// Whether tap index `i` is held fixed (end node or ghost).
    #[inline]
    fn pinned(&self, i: isize) -> bool {
        i <= 0 || i as usize >= self.grid.n() - 1
    }

    /// `A(v)` at interior nodes (zero at the two ends).
    pub fn operator(&self, v: &[Vec3]) -> Vec<Vec3> {
        let n = self.grid.n();
        let ih2 = 1.0 / (self.grid.dy() * self.grid.dy());
        let mut out = vec![Vec3::ZERO; n];
        for j in 1..n - 1 {
            let mut acc = Vec3::ZERO;
            for (k, c) in D2.iter().enumerate() {
                acc += self.value(v, Self::tap(j, k)) * *c;
            }
            let x = v[j];
            out[j] = (acc * ih2 + Vec3::new(-x[0], -x[1], 0.0)) * self.coef[j];
        }
        out
    }

    /// `-½ Σ v·(D2 v + R²v) dy` over interior nodes, plus the coupling to the
    /// pinned ends; the invariant of the discrete flow.
    pub fn discrete_energy(&self, v: &[Vec3]) -> f64 {
        let a = self.operator(v);
        let n = self.grid.n();
        let ih2 = 1.0 / (self.grid.dy() * self.grid.dy());
        let mut e = 0.0;
        for j in 1..n - 1 {
            let g = a[j] * (1.0 / self.coef[j]);
            // linear part counted once: the boundary taps contribute b·v, not ½ b·v
            let mut b = Vec3::ZERO;
            for (k, c) in D2.iter().enumerate() {
                let i = Self::tap(j, k);
                if self.pinned(i) {
                    b += self.value(v, i) * (*c * ih2);
                }
            }
            e -= 0.5 * (v[j].dot(g) + v[j].dot(b));
        }
        e * self.grid.dy()
    }

    /// `v × A(v)` with zero at the pinned ends.
    pub fn rhs(&self, v: &[Vec3]) -> Vec<Vec3> {
        let a = self.operator(v);
        v.iter().zip(&a).map(|(v, a)| v.cross(*a)).collect()
    }

    pub fn step(&self, v: &mut [Vec3], t: f64) -> Result<StepInfo> {
        let n = self.grid.n();
        let ni = n - 2;
        let h = 0.5 * self.dt;
        let ih2 = 1.0 / (self.grid.dy() * self.grid.dy());
        let mut w = v.to_vec();
        let mut info = StepInfo::default();
        let mut converged = false;
        for it in 1..=self.max_iter {
            let a = self.operator(&w);
            let mut rhs = vec![0.0; 3 * ni];
            for j in 1..n - 1 {
                let g = w[j] - v[j] - w[j].cross(a[j]) * h;
                for c in 0..3 {
                    rhs[3 * (j - 1) + c] = -g[c];
                }
            }
            let mut jac = BandMatrix::zeros(3 * ni, 8, 8);
            for j in 1..n - 1 {
                let row = 3 * (j - 1);
                let wx = skew(w[j]);
                let ax = skew(a[j]);
                let cj = self.coef[j];
                for (k, c) in D2.iter().enumerate() {
                    let i = Self::tap(j, k);
                    if self.pinned(i) {
                        continue;
                    }
                    let node = i as usize;
                    let col = 3 * (node - 1);
                    let s = -h * cj * c * ih2;
                    for r in 0..3 {
                        for q in 0..3 {
                            let mut val = s * wx[r][q];
                            if node == j {
                                // diagonal block: I + h[a]× - h c [w]× R²
                                if r == q {
                                    val += 1.0;
                                }
                                val += h * ax[r][q];
                                if q < 2 {
                                    val += h * cj * wx[r][q];
                                }
                            }
                            if val != 0.0 {
                                jac.add(row + r, col + q, val);
                            }
                        }
                    }
                }
            }
            jac.solve(&mut rhs).map_err(|_| Error::NumericalAbort {
                t,
                reason: "singular Newton matrix".into(),
            })?;
            let mut upd = 0.0f64;
            for j in 1..n - 1 {
                let d = Vec3::new(rhs[3 * (j - 1)], rhs[3 * (j - 1) + 1], rhs[3 * (j - 1) + 2]);
                upd = upd.max(d.max_abs());
                w[j] += d;
            }
            info = StepInfo { iterations: it, update: upd };
            if !upd.is_finite() {
                return Err(Error::NumericalAbort { t, reason: "non-finite Newton update".into() });
            }
            if upd <= self.tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence { t, update: info.update });
        }
        // At the stiff inner end `dt m²/(r dy)²` is ~1e12, so rebuilding the
        // Cayley rotation from A(w) would amplify the Newton residual. The
        // reflection through the midpoint is the same map and is well conditioned.
        for j in 1..n - 1 {
            v[j] = (w[j] * 2.0 - v[j]).normalized();
        }
        Ok(info)
    }
}

fn skew(x: Vec3) -> [[f64; 3]; 3] {
    [[0.0, -x[2], x[1]], [x[2], 0.0, -x[0]], [-x[1], x[0], 0.0]]
}

/// `v × a` for a profile (pinned ends are zero).
pub fn rhs(profile: &SphereProfile) -> Vec<Vec3> {
    Stepper::new(profile.grid().clone(), 1.0, 1e-12, profile.values()).rhs(profile.values())
}

/// One step of size `dt`.
pub fn step(profile: &SphereProfile, dt: f64) -> Result<SphereProfile> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let st = Stepper::new(profile.grid().clone(), dt, 1e-12, profile.values());
    let mut v = profile.values().to_vec();
    st.step(&mut v, 0.0)?;
    Ok(SphereProfile::from_raw(profile.grid().clone(), v))
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub history: Vec<Snapshot>,
    pub records: Vec<FlowRecord>,
    /// Set when the run stopped early; `history` ends at the last valid state.
    pub abort: Option<String>,
}

struct Tracker {
    log_s: f64,
    alpha: f64,
    gate: f64,
}

fn diagnose(
    profile: &SphereProfile,
    t: f64,
    cfg: &FlowConfig,
    tracker: &mut Option<Tracker>,
    info: StepInfo,
) -> Result<FlowRecord> {
    let rep = energy_split_with(profile, TOL_BC)?;
    let h2 = h2_norm(profile);
    let q_l2 = if cfg.diagnostics.gauge {
        q_norm2_rdr(profile.grid(), &gauge_field(profile)?.q).sqrt()
    } else {
        f64::NAN
    };
    let (mut s, mut alpha, mut dist, mut certified) = (f64::NAN, f64::NAN, f64::NAN, false);
    if cfg.diagnostics.projection {
        let gate = cfg.projection_gate;
        let mut opts = ProjectionOptions { gate_delta: gate, ..ProjectionOptions::default() };
        if let Some(tr) = tracker.as_ref() {
            opts.centre_log_s = tr.log_s;
            opts.half_width = 0.5;
        }
        let fit = match project_with(profile, &opts) {
            Err(Error::ScaleOutOfRange { .. }) if tracker.is_some() => {
                project_with(profile, &ProjectionOptions { half_width: 2.0, ..opts })
            }
            r => r,
        };
        match fit {
            Ok(fit) => {
                s = fit.params.s;
                alpha = match tracker.as_ref() {
                    Some(tr) => tr.alpha + wrap_angle(fit.params.alpha - tr.alpha),
                    None => fit.params.alpha,
                };
                dist = fit.dist;
                certified = fit.certified;
                *tracker = Some(Tracker { log_s: s.ln(), alpha, gate });
            }
            Err(Error::ScaleOutOfRange { .. }) => {
                if let Some(tr) = tracker.as_ref() {
                    s = tr.log_s.exp();
                    alpha = tr.alpha;
                    let _ = tr.gate;
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(FlowRecord {
        t,
        energy: rep.energy,
        excess: rep.excess,
        s,
        alpha,
        dist,
        h2,
        s_h2: s * h2,
        q_l2,
        bogomolny_term: rep.bogomolny_term,
        norm_drift: profile.max_unit_defect(),
        newton_iters: info.iterations,
        newton_update: info.update,
        certified,
    })
}

pub fn initial_profile(cfg: &FlowConfig) -> Result<SphereProfile> {
    cfg.validate()?;
    let grid = RadialGrid::from_spec(cfg.grid)?.shared();
    cfg.initial.build(grid, cfg.seed)
}

pub fn run(cfg: &FlowConfig) -> Result<RunOutput> {
    let v0 = initial_profile(cfg)?;
    run_from(cfg, v0)
}

/// Runs the configured schedule from a given initial profile.
pub fn run_from(cfg: &FlowConfig, v0: SphereProfile) -> Result<RunOutput> {
    cfg.validate()?;
    let grid = v0.grid().clone();
    let (steps, dt) = cfg.steps();
    let stepper = Stepper::new(grid.clone(), dt, cfg.newton_tol, v0.values());
    let mut tracker = None;
    let mut records = vec![diagnose(&v0, 0.0, cfg, &mut tracker, StepInfo::default())?];
    let mut history = vec![Snapshot { t: 0.0, profile: v0.clone() }];
    let mut v = v0.into_values();
    let mut worst = StepInfo::default();
    let mut abort = None;
    for k in 1..=steps {
        let t = k as f64 * dt;
        let mut next = v.clone();
        match stepper.step(&mut next, t) {
            Ok(info) => {
                worst.iterations = worst.iterations.max(info.iterations);
                worst.update = info.update;
            }
            Err(e) => {
                abort = Some(e.to_string());
                break;
            }
        }
        if next.iter().any(|x| !(x.norm2().is_finite())) {
            abort = Some(format!("non-finite state at t = {t}"));
            break;
        }
        v = next;
        if k % cfg.snapshot_stride == 0 || k == steps {
            let p = SphereProfile::from_raw(grid.clone(), v.clone());
            match diagnose(&p, t, cfg, &mut tracker, worst) {
                Ok(r) => records.push(r),
                Err(e) => {
                    abort = Some(e.to_string());
                    break;
                }
            }
            history.push(Snapshot { t, profile: p });
            worst = StepInfo::default();
        }
    }
    Ok(RunOutput { history, records, abort })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Stable,
    ScaleCollapsing,
    ResolutionExhausted,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorOptions {
    /// Number of trailing records examined.
    pub window: usize,
    /// Cells between `y_min` and the core `m log s` below which the scale is unresolved.
    pub min_cells: f64,
    /// Collapse is also declared once `s` fell below this fraction of `s(0)`.
    pub collapse_ratio: f64,
}

impl Default for MonitorOptions {
    fn default() -> Self {
        MonitorOptions { window: 5, min_cells: 20.0, collapse_ratio: 0.25 }
    }
}

pub fn blowup_monitor(records: &[FlowRecord], grid: &GridSpec, opts: &MonitorOptions) -> Verdict {
    let k = opts.window.max(3);
    if records.len() < k {
        return Verdict::Stable;
    }
    let tail = &records[records.len() - k..];
    let growing = tail.windows(2).all(|w| w[1].h2 > w[0].h2) && tail[k - 1].h2 > tail[0].h2 * (1.0 + 1e-3);
    if !growing {
        return Verdict::Stable;
    }
    let shrinking = tail.windows(2).all(|w| w[1].s < w[0].s);
    if !shrinking {
        return Verdict::ResolutionExhausted;
    }
    let s_last = tail[k - 1].s;
    let dy = (grid.y_max - grid.y_min) / (grid.n - 1) as f64;
    let cells = (grid.m as f64 * s_last.ln() - grid.y_min) / dy;
    if cells < opts.min_cells || s_last < opts.collapse_ratio * records[0].s {
        Verdict::ScaleCollapsing
    } else {
        Verdict::Stable
    }
}
