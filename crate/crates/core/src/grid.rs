//! Logarithmic radial grid `y = m log r` with 4th-order finite differences
//! and trapezoid quadrature.

use std::ops::{Add, AddAssign, Mul, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vec3::Vec3;

/// Values that can be sampled on the grid: reals, complex numbers, vectors.
pub trait Sample:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + AddAssign
{
}

impl Sample for f64 {}
impl Sample for Complex64 {}
impl Sample for Vec3 {}

/// Serialisable description of a grid; the sidecar of every profile file.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub m: u32,
    pub y_min: f64,
    pub y_max: f64,
    pub n: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { m: 1, y_min: -12.0, y_max: 12.0, n: 2049 }
    }
}

#[derive(Clone, Debug)]
pub struct RadialGrid {
    spec: GridSpec,
    dy: f64,
    y: Vec<f64>,
    r: Vec<f64>,
    w_dy: Vec<f64>,
    w_rdr: Vec<f64>,
}

pub const MIN_NODES: usize = 8;

const D1_INNER: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
/// Antisymmetric half of the 6th-order centred stencil, offsets 1, 2, 3, over 60 dy.
const D1_INNER6: [f64; 3] = [45.0, -9.0, 1.0];
const D1_EDGE0: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
const D1_EDGE1: [f64; 5] = [-3.0, -10.0, 18.0, -6.0, 1.0];
const D2_INNER: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];
const D2_EDGE0: [f64; 6] = [45.0, -154.0, 214.0, -156.0, 61.0, -10.0];
const D2_EDGE1: [f64; 6] = [10.0, -15.0, -4.0, 14.0, -6.0, 1.0];

impl RadialGrid {
    pub fn new(m: u32, y_min: f64, y_max: f64, n: usize) -> Result<Self> {
        Self::from_spec(GridSpec { m, y_min, y_max, n })
    }

    pub fn from_spec(spec: GridSpec) -> Result<Self> {
        let GridSpec { m, y_min, y_max, n } = spec;
        if m < 1 {
            return Err(Error::InvalidParameter(format!("m must be >= 1, got {m}")));
        }
        if !(y_min.is_finite() && y_max.is_finite()) || y_min >= y_max {
            return Err(Error::InvalidParameter(format!(
                "need finite y_min < y_max, got [{y_min}, {y_max}]"
            )));
        }
        if n < MIN_NODES {
            return Err(Error::InvalidParameter(format!("need n >= {MIN_NODES}, got {n}")));
        }
        let dy = (y_max - y_min) / (n - 1) as f64;
        let mf = m as f64;
        let y: Vec<f64> = (0..n)
            .map(|j| if j == n - 1 { y_max } else { y_min + j as f64 * dy })
            .collect();
        let r: Vec<f64> = y.iter().map(|&y| (y / mf).exp()).collect();
        let w_dy: Vec<f64> = (0..n)
            .map(|j| if j == 0 || j == n - 1 { 0.5 * dy } else { dy })
            .collect();
        let w_rdr = w_dy.iter().zip(&r).map(|(w, r)| w * r * r / mf).collect();
        Ok(RadialGrid { spec, dy, y, r, w_dy, w_rdr })
    }

    /// `[-12, 12]` with 2049 nodes.
    pub fn standard(m: u32) -> Result<Self> {
        Self::from_spec(GridSpec { m, ..GridSpec::default() })
    }

    pub fn shared(self) -> Arc<Self> {
        Arc::new(self)
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }
    pub fn m(&self) -> u32 {
        self.spec.m
    }
    pub fn mf(&self) -> f64 {
        self.spec.m as f64
    }
    pub fn n(&self) -> usize {
        self.spec.n
    }
    pub fn dy(&self) -> f64 {
        self.dy
    }
    pub fn y(&self) -> &[f64] {
        &self.y
    }
    pub fn r(&self) -> &[f64] {
        &self.r
    }
    pub fn w_dy(&self) -> &[f64] {
        &self.w_dy
    }
    pub fn w_rdr(&self) -> &[f64] {
        &self.w_rdr
    }

    /// Same box and degree with `2n - 1` nodes (every old node is kept).
    pub fn refined(&self) -> RadialGrid {
        let s = self.spec;
        Self::from_spec(GridSpec { n: 2 * s.n - 1, ..s }).expect("refinement of a valid grid")
    }

    pub fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n() {
            return Err(Error::GridMismatch(format!("{len} samples on a {}-node grid", self.n())));
        }
        Ok(())
    }

    /// First derivative in y.
    pub fn deriv_y<T: Sample>(&self, f: &[T]) -> Vec<T> {
        let n = self.n();
        assert_eq!(f.len(), n, "sample count does not match grid");
        let s = 1.0 / (12.0 * self.dy);
        let s6 = 1.0 / (60.0 * self.dy);
        let mut out = vec![T::default(); n];
        for j in 3..n - 3 {
            let mut acc = T::default();
            for (k, c) in D1_INNER6.iter().enumerate() {
                acc += (f[j + k + 1] - f[j - k - 1]) * *c;
            }
            out[j] = acc * s6;
        }
        for j in [2, n - 3] {
            let mut acc = T::default();
            for (k, c) in D1_INNER.iter().enumerate() {
                if *c != 0.0 {
                    acc += f[j + k - 2] * *c;
                }
            }
            out[j] = acc * s;
        }
        for (j, tab) in [(0usize, &D1_EDGE0), (1, &D1_EDGE1)] {
            let mut lo = T::default();
            let mut hi = T::default();
            for (k, c) in tab.iter().enumerate() {
                lo += f[k] * *c;
                hi += f[n - 1 - k] * -*c;
            }
            out[j] = lo * s;
            out[n - 1 - j] = hi * s;
        }
        out
    }

    /// Second derivative in y.
    pub fn deriv_yy<T: Sample>(&self, f: &[T]) -> Vec<T> {
        let n = self.n();
        assert_eq!(f.len(), n, "sample count does not match grid");
        let s = 1.0 / (12.0 * self.dy * self.dy);
        let mut out = vec![T::default(); n];
        for j in 2..n - 2 {
            let mut acc = T::default();
            for (k, c) in D2_INNER.iter().enumerate() {
                acc += f[j + k - 2] * *c;
            }
            out[j] = acc * s;
        }
        for (j, tab) in [(0usize, &D2_EDGE0), (1, &D2_EDGE1)] {
            let mut lo = T::default();
            let mut hi = T::default();
            for (k, c) in tab.iter().enumerate() {
                lo += f[k] * *c;
                hi += f[n - 1 - k] * *c;
            }
            out[j] = lo * s;
            out[n - 1 - j] = hi * s;
        }
        out
    }

    /// `d/dr = (m/r) d/dy`.
    pub fn deriv_r<T: Sample>(&self, f: &[T]) -> Vec<T> {
        let mf = self.mf();
        self.deriv_y(f).into_iter().zip(&self.r).map(|(d, r)| d * (mf / r)).collect()
    }

    pub fn integrate_dy<T: Sample>(&self, f: &[T]) -> T {
        assert_eq!(f.len(), self.n(), "sample count does not match grid");
        let mut acc = T::default();
        for (v, w) in f.iter().zip(&self.w_dy) {
            acc += *v * *w;
        }
        acc
    }

    pub fn integrate_rdr<T: Sample>(&self, f: &[T]) -> T {
        assert_eq!(f.len(), self.n(), "sample count does not match grid");
        let mut acc = T::default();
        for (v, w) in f.iter().zip(&self.w_rdr) {
            acc += *v * *w;
        }
        acc
    }

    /// `T_j = ∫_{r_j}^{r_max} f dr`, trapezoid in y with the Euler–Maclaurin
    /// end correction (4th order).
    pub fn tail_integral_dr<T: Sample>(&self, f: &[T]) -> Vec<T> {
        let n = self.n();
        let mf = self.mf();
        let g: Vec<T> = f.iter().zip(&self.r).map(|(v, r)| *v * (r / mf)).collect();
        let dg = self.deriv_y(&g);
        let h = self.dy;
        let mut out = vec![T::default(); n];
        let mut acc = T::default();
        for j in (0..n - 1).rev() {
            acc += (g[j] + g[j + 1]) * (0.5 * h);
            out[j] = acc - (dg[n - 1] - dg[j]) * (h * h / 12.0);
        }
        out
    }

    /// Samples `g_j = f(y_j + shift)` by 6-point Lagrange interpolation.
    /// Stencil points beyond the grid take the constant values `left`/`right`.
    pub fn shift<T: Sample>(&self, f: &[T], shift: f64, left: T, right: T) -> Vec<T> {
        let n = self.n() as i64;
        assert_eq!(f.len() as i64, n, "sample count does not match grid");
        let p = shift / self.dy;
        let k = p.floor();
        let theta = p - k;
        let k = k as i64;
        let w = lagrange6(theta);
        let at = |i: i64| -> T {
            if i < 0 {
                left
            } else if i >= n {
                right
            } else {
                f[i as usize]
            }
        };
        (0..n)
            .map(|j| {
                let base = j + k;
                if theta == 0.0 {
                    return at(base);
                }
                let mut acc = T::default();
                for (o, c) in w.iter().enumerate() {
                    acc += at(base + o as i64 - 2) * *c;
                }
                acc
            })
            .collect()
    }
}

/// Lagrange weights at offsets -2..=3 evaluated at `theta` in [0, 1).
fn lagrange6(theta: f64) -> [f64; 6] {
    let mut w = [0.0; 6];
    for (i, wi) in w.iter_mut().enumerate() {
        let oi = i as f64 - 2.0;
        let mut acc = 1.0;
        for q in 0..6 {
            if q != i {
                let oq = q as f64 - 2.0;
                acc *= (theta - oq) / (oi - oq);
            }
        }
        *wi = acc;
    }
    w
}

/// Samples of a field on a shared grid.
#[derive(Clone, Debug)]
pub struct RadialField<T> {
    grid: Arc<RadialGrid>,
    values: Vec<T>,
}

impl<T: Sample> RadialField<T> {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<T>) -> Result<Self> {
        grid.check_len(values.len())?;
        Ok(RadialField { grid, values })
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> T) -> Self {
        let values = grid.y().iter().map(|&y| f(y)).collect();
        RadialField { grid, values }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }
    pub fn values(&self) -> &[T] {
        &self.values
    }
    pub fn into_values(self) -> Vec<T> {
        self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_and_weights() {
        let g = RadialGrid::new(1, 0.0, 1.0, 9).unwrap();
        assert_eq!(g.r()[0], 1.0);
        assert!((g.r()[8] - std::f64::consts::E).abs() < 1e-15);
        let total: f64 = g.w_dy().iter().sum();
        assert!((total - 1.0).abs() < 1e-15);
        assert!(RadialGrid::new(1, 0.0, 1.0, 7).is_err());
        assert!(RadialGrid::new(0, 0.0, 1.0, 9).is_err());
        assert!(RadialGrid::new(1, 1.0, 1.0, 9).is_err());
    }

    #[test]
    fn rdr_of_gaussian() {
        // ∫ e^{-r^2} r dr = 1/2
        for m in 1..=3 {
            let g = RadialGrid::new(m, -12.0 * m as f64, 4.0 * m as f64, 4001).unwrap();
            let f: Vec<f64> = g.r().iter().map(|r| (-r * r).exp()).collect();
            assert!((g.integrate_rdr(&f) - 0.5).abs() < 1e-10, "m = {m}");
        }
    }

    #[test]
    fn derivatives_fourth_order() {
        let err = |n: usize| {
            let g = RadialGrid::new(1, -2.0, 3.0, n).unwrap();
            let f: Vec<f64> = g.y().iter().map(|y| y.sin()).collect();
            let d1 = g.deriv_y(&f);
            let d2 = g.deriv_yy(&f);
            let e1 = g.y().iter().zip(&d1).map(|(y, d)| (d - y.cos()).abs()).fold(0.0, f64::max);
            let e2 = g.y().iter().zip(&d2).map(|(y, d)| (d + y.sin()).abs()).fold(0.0, f64::max);
            (e1, e2)
        };
        let (a1, a2) = err(101);
        let (b1, b2) = err(201);
        assert!(a1 / b1 > 12.0, "{a1} {b1}");
        assert!(a2 / b2 > 6.0, "{a2} {b2}");
        assert!(b1 < 1e-7 && b2 < 1e-5);
    }

    #[test]
    fn tail_integral() {
        let g = RadialGrid::new(2, -16.0, 8.0, 1201).unwrap();
        let f: Vec<f64> = g.r().iter().map(|r| (-r).exp()).collect();
        let t = g.tail_integral_dr(&f);
        let rmax = *g.r().last().unwrap();
        for (j, r) in g.r().iter().enumerate() {
            let exact = (-r).exp() - (-rmax).exp();
            assert!((t[j] - exact).abs() < 1e-9, "{j}: {} vs {exact}", t[j]);
        }
    }

    #[test]
    fn shift_integer_and_fractional() {
        let g = RadialGrid::new(1, -5.0, 5.0, 401).unwrap();
        let f: Vec<f64> = g.y().iter().map(|y| y.tanh()).collect();
        let s = g.shift(&f, 3.0 * g.dy(), -1.0, 1.0);
        assert_eq!(s[10], f[13]);
        assert_eq!(s[400], 1.0);
        let sh = 0.37;
        let s = g.shift(&f, sh, -1.0, 1.0);
        // 0.37 is ~15 cells, so nodes past 380 read the +1 ghost values
        for j in 10..380 {
            assert!((s[j] - (g.y()[j] + sh).tanh()).abs() < 1e-9);
        }
    }
}
