//! Linearised operators about the harmonic map, the operator
//! `H = -d²/dy² + 1 - 2 sech² y`, the X inner product and the radial
//! inequalities evaluated as ratios.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::banded::{count_below, BandMatrix};
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::vec3::Vec3;

/// `⟨f, g⟩_X = ∫ (f_r g_r + (m²/r²) f g) r dr`.
pub fn x_inner(grid: &RadialGrid, f: &[f64], g: &[f64]) -> f64 {
    let mf = grid.mf();
    let fr = grid.deriv_r(f);
    let gr = grid.deriv_r(g);
    let dens: Vec<f64> = (0..grid.n())
        .map(|j| {
            let r = grid.r()[j];
            fr[j] * gr[j] + mf * mf / (r * r) * f[j] * g[j]
        })
        .collect();
    grid.integrate_rdr(&dens)
}

/// `⟨f̃, g̃⟩_{H¹(ℝ)}` in the variable y.
pub fn h1_inner_y(grid: &RadialGrid, f: &[f64], g: &[f64]) -> f64 {
    let fy = grid.deriv_y(f);
    let gy = grid.deriv_y(g);
    let dens: Vec<f64> = (0..grid.n()).map(|j| fy[j] * gy[j] + f[j] * g[j]).collect();
    grid.integrate_dy(&dens)
}

pub fn x_norm(grid: &RadialGrid, f: &[f64]) -> f64 {
    x_inner(grid, f, f).max(0.0).sqrt()
}

/// `h1 = sech y` on the grid.
pub fn h1(grid: &RadialGrid) -> Vec<f64> {
    grid.y().iter().map(|y| 1.0 / y.cosh()).collect()
}

/// `Lξ = ξ_r + (m/r)(ξ3 h + h3 ξ)` about the reference harmonic map.
pub fn apply_l(grid: &RadialGrid, xi: &[Vec3]) -> Vec<Vec3> {
    let mf = grid.mf();
    let d = grid.deriv_r(xi);
    (0..grid.n())
        .map(|j| {
            let y = grid.y()[j];
            let h = Vec3::new(1.0 / y.cosh(), 0.0, y.tanh());
            d[j] + (h * xi[j][2] + xi[j] * h[2]) * (mf / grid.r()[j])
        })
        .collect()
}

/// `L0 f = f_r + (m/r) h3 f`.
pub fn apply_l0(grid: &RadialGrid, f: &[f64]) -> Vec<f64> {
    let mf = grid.mf();
    let d = grid.deriv_r(f);
    (0..grid.n()).map(|j| d[j] + mf / grid.r()[j] * grid.y()[j].tanh() * f[j]).collect()
}

/// `L̃0 f = f' + tanh(y) f`.
pub fn apply_l0_tilde(grid: &RadialGrid, f: &[f64]) -> Vec<f64> {
    let d = grid.deriv_y(f);
    (0..grid.n()).map(|j| d[j] + grid.y()[j].tanh() * f[j]).collect()
}

/// `H f = -f'' + f - 2 sech²(y) f`.
pub fn apply_h(grid: &RadialGrid, f: &[f64]) -> Vec<f64> {
    let d2 = grid.deriv_yy(f);
    (0..grid.n())
        .map(|j| {
            let s = 1.0 / grid.y()[j].cosh();
            -d2[j] + f[j] - 2.0 * s * s * f[j]
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Eigenpair {
    pub lambda: f64,
    /// Full-grid samples (zero at the two Dirichlet ends), normalised in `L²(dy)`
    /// with a positive maximum.
    pub vector: Vec<f64>,
}

/// Diagonals of the Dirichlet discretisation of `H` on the interior nodes.
fn h_diagonals(grid: &RadialGrid) -> Vec<Vec<f64>> {
    let n = grid.n() - 2;
    let c = 1.0 / (12.0 * grid.dy() * grid.dy());
    let d0 = (1..=n)
        .map(|j| {
            let s = 1.0 / grid.y()[j].cosh();
            30.0 * c + 1.0 - 2.0 * s * s
        })
        .collect();
    vec![d0, vec![-16.0 * c; n], vec![c; n]]
}

/// The `k` smallest eigenpairs of `H` with Dirichlet ends, ascending.
pub fn spectrum_h(grid: &RadialGrid, k: usize) -> Result<Vec<Eigenpair>> {
    if k == 0 || k > 8 {
        return Err(Error::InvalidParameter(format!("k must be in 1..=8, got {k}")));
    }
    let diags = h_diagonals(grid);
    let n = diags[0].len();
    let off: f64 = diags[1..].iter().map(|d| 2.0 * d[0].abs()).sum();
    let lo0 = diags[0].iter().cloned().fold(f64::INFINITY, f64::min) - off;
    let hi0 = diags[0].iter().cloned().fold(f64::NEG_INFINITY, f64::max) + off;
    let mut out: Vec<Eigenpair> = Vec::with_capacity(k);
    for i in 0..k {
        let (mut lo, mut hi) = (lo0, hi0);
        while hi - lo > 4.0 * f64::EPSILON * (1.0 + lo.abs().max(hi.abs())) {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if count_below(&diags, mid) > i {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let lambda = 0.5 * (lo + hi);
        let mut x: Vec<f64> = (0..n).map(|j| 1.0 + 0.1 * ((j * 37 % 101) as f64 / 101.0)).collect();
        let shift = lambda - 1e-11 * (1.0 + lambda.abs());
        for _ in 0..4 {
            for prev in &out {
                let dot: f64 = (0..n).map(|j| prev.vector[j + 1] * x[j]).sum();
                let nn: f64 = (0..n).map(|j| prev.vector[j + 1].powi(2)).sum();
                for j in 0..n {
                    x[j] -= dot / nn * prev.vector[j + 1];
                }
            }
            let mut a = BandMatrix::zeros(n, 2, 2);
            for j in 0..n {
                a.add(j, j, diags[0][j] - shift);
                for (d, diag) in diags.iter().enumerate().skip(1) {
                    if j + d < n {
                        a.add(j, j + d, diag[j]);
                        a.add(j + d, j, diag[j]);
                    }
                }
            }
            a.solve(&mut x)?;
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.iter_mut().for_each(|v| *v /= norm);
        }
        let mut full = vec![0.0; n + 2];
        full[1..=n].copy_from_slice(&x);
        let peak = full.iter().cloned().fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
        let l2 = grid.integrate_dy(&full.iter().map(|v| v * v).collect::<Vec<_>>()).sqrt();
        let sign = if peak < 0.0 { -1.0 } else { 1.0 };
        full.iter_mut().for_each(|v| *v *= sign / l2);
        out.push(Eigenpair { lambda, vector: full });
    }
    Ok(out)
}

/// Cosine similarity in `L²(dy)`.
pub fn cosine_dy(grid: &RadialGrid, a: &[f64], b: &[f64]) -> f64 {
    let ab: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
    let aa: Vec<f64> = a.iter().map(|x| x * x).collect();
    let bb: Vec<f64> = b.iter().map(|x| x * x).collect();
    grid.integrate_dy(&ab) / (grid.integrate_dy(&aa) * grid.integrate_dy(&bb)).sqrt()
}

/// `f - (⟨f,h1⟩_X / ‖h1‖²_X) h1`.
pub fn project_off_h1(grid: &RadialGrid, f: &[f64]) -> Vec<f64> {
    let h = h1(grid);
    let c = x_inner(grid, f, &h) / x_inner(grid, &h, &h);
    f.iter().zip(&h).map(|(a, b)| a - c * b).collect()
}

/// `(‖f‖²_X / ∫|L0 f|² r dr, |⟨f, ĥ1⟩_X| / ‖f‖_X)` with `ĥ1` the X-unit
/// vector along `h1`. The ratio is `+∞` when `L0 f` vanishes to roundoff.
pub fn coercivity_ratio(grid: &RadialGrid, f: &[f64]) -> (f64, f64) {
    let h = h1(grid);
    let xf = x_inner(grid, f, f);
    if xf == 0.0 {
        return (0.0, 0.0);
    }
    let l0 = apply_l0(grid, f);
    let den = grid.integrate_rdr(&l0.iter().map(|v| v * v).collect::<Vec<_>>());
    let ratio = if den <= 1e-14 * xf { f64::INFINITY } else { xf / den };
    let defect = x_inner(grid, f, &h).abs() / (xf * x_inner(grid, &h, &h)).sqrt();
    (ratio, defect)
}

/// `∫ f² r^{1-2σ} dr / [(∫ f² r dr)^{1-σ} (∫ f_r² r dr)^σ]`.
pub fn hardy_ratio(grid: &RadialGrid, f: &[f64], sigma: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&sigma) {
        return Err(Error::InvalidParameter(format!("σ must lie in [0, 1), got {sigma}")));
    }
    let fr = grid.deriv_r(f);
    let num: Vec<f64> = f.iter().zip(grid.r()).map(|(v, r)| v * v * r.powf(-2.0 * sigma)).collect();
    let l2: Vec<f64> = f.iter().map(|v| v * v).collect();
    let grad: Vec<f64> = fr.iter().map(|v| v * v).collect();
    let num = grid.integrate_rdr(&num);
    let a = grid.integrate_rdr(&l2);
    if a == 0.0 {
        return Ok(0.0);
    }
    if sigma == 0.0 {
        return Ok(num / a);
    }
    let b = grid.integrate_rdr(&grad);
    Ok(num / (a.powf(1.0 - sigma) * b.powf(sigma)))
}

/// Smooth non-decreasing step: 0 on `x ≤ 1/2`, 1 on `x ≥ 3/2`.
pub fn smooth_step(x: f64) -> f64 {
    let t = x - 0.5;
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

/// `f_δ(r) = η(r/δ) - η(r)`.
pub fn hardy_counterexample(grid: &RadialGrid, delta: f64) -> Vec<f64> {
    grid.r().iter().map(|&r| smooth_step(r / delta) - smooth_step(r)).collect()
}

/// `‖g/r‖_{L^p(ℝ²)} / ‖(∂_r - m/r) g‖_{L^p(ℝ²)}`.
pub fn radial_lp_ratio(grid: &RadialGrid, g: &[f64], p: f64) -> Result<f64> {
    if !(p > 2.0) {
        return Err(Error::InvalidParameter(format!("need p > 2, got {p}")));
    }
    let mf = grid.mf();
    let gy = grid.deriv_y(g);
    let lp = |f: &dyn Fn(usize) -> f64| -> f64 {
        let v: Vec<f64> = (0..grid.n()).map(|j| f(j).abs().powf(p)).collect();
        (2.0 * PI * grid.integrate_rdr(&v)).powf(1.0 / p)
    };
    let num = lp(&|j| g[j] / grid.r()[j]);
    let den = lp(&|j| mf / grid.r()[j] * (gy[j] - g[j]));
    if num == 0.0 {
        return Ok(0.0);
    }
    Ok(num / den)
}

/// `‖f‖_∞ / ‖f̃‖_{H¹(ℝ)}`.
pub fn linf_x_ratio(grid: &RadialGrid, f: &[f64]) -> f64 {
    let sup = f.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if sup == 0.0 {
        return 0.0;
    }
    sup / h1_inner_y(grid, f, f).sqrt()
}

/// Seed of trial `i` derived from a master seed.
pub fn trial_seed(master: u64, i: u64) -> u64 {
    master ^ (i.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Smooth random Fourier sum in y under a Gaussian envelope, tapered so it
/// vanishes (with all derivatives) before the ends of the box.
pub fn random_field(grid: &RadialGrid, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (y0, y1) = (grid.y()[0], grid.y()[grid.n() - 1]);
    let mid = 0.5 * (y0 + y1);
    let half = 0.5 * (y1 - y0);
    let centre = mid + rng.gen_range(-0.35..0.35) * half;
    let width = rng.gen_range(0.05..0.25) * half;
    let modes: Vec<(f64, f64, f64)> = (0..6)
        .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..3.0), rng.gen_range(0.0..2.0 * PI)))
        .collect();
    let offset: f64 = rng.gen_range(-1.0..1.0);
    grid.y()
        .iter()
        .map(|&y| {
            let u = (y - mid) / (0.9 * half);
            if u.abs() >= 1.0 {
                return 0.0;
            }
            let taper = (1.0 - 1.0 / (1.0 - u * u)).exp();
            let env = (-0.5 * ((y - centre) / width).powi(2)).exp();
            let wave: f64 = offset + modes.iter().map(|(a, w, ph)| a * (w * y + ph).sin()).sum::<f64>();
            taper * env * wave
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> RadialGrid {
        RadialGrid::standard(1).unwrap()
    }

    #[test]
    fn l0_annihilates_h1() {
        for m in 1..=3 {
            let g = RadialGrid::standard(m).unwrap();
            let h = h1(&g);
            let l = apply_l0_tilde(&g, &h);
            assert!(l.iter().skip(2).take(g.n() - 4).all(|v| v.abs() < 1e-8));
            let (ratio, defect) = coercivity_ratio(&g, &h);
            assert!(ratio.is_infinite());
            assert!((defect - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn l0_tilde_of_tanh() {
        let g = grid();
        let f: Vec<f64> = g.y().iter().map(|y| y.tanh()).collect();
        let l = apply_l0_tilde(&g, &f);
        for j in 2..g.n() - 2 {
            assert!((l[j] - 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn l_on_frame_vectors() {
        let g = RadialGrid::standard(2).unwrap();
        let n = g.n();
        let e = vec![Vec3::E; n];
        let le = apply_l(&g, &e);
        for j in 0..n {
            let expect = Vec3::E * (2.0 / g.r()[j] * g.y()[j].tanh());
            assert!((le[j] - expect).max_abs() <= 1e-12 * expect.norm().max(1.0));
        }
    }

    #[test]
    fn h_of_constant_one() {
        let g = RadialGrid::new(1, -30.0, 30.0, 3001).unwrap();
        let f = vec![1.0; g.n()];
        let hf = apply_h(&g, &f);
        for j in 0..g.n() {
            let s = 1.0 / g.y()[j].cosh();
            assert!((hf[j] - (1.0 - 2.0 * s * s)).abs() < 1e-9);
        }
    }

    #[test]
    fn ground_state() {
        let g = grid();
        let sp = spectrum_h(&g, 2).unwrap();
        assert!(sp[0].lambda.abs() < 1e-6, "{}", sp[0].lambda);
        assert!(1.0 - cosine_dy(&g, &sp[0].vector, &h1(&g)) < 1e-8);
        assert!(sp[1].lambda >= 0.9);
        assert!(spectrum_h(&g, 9).is_err());
    }

    #[test]
    fn hardy_sigma_zero_is_one() {
        let g = grid();
        let f = random_field(&g, 7);
        assert_eq!(hardy_ratio(&g, &f, 0.0).unwrap(), 1.0);
        assert!(hardy_ratio(&g, &f, 1.0).is_err());
    }

    #[test]
    fn linf_of_sech() {
        let g = grid();
        let r = linf_x_ratio(&g, &h1(&g));
        assert!((r - (3.0f64 / 8.0).sqrt()).abs() < 1e-6, "{r}");
        assert_eq!(linf_x_ratio(&g, &vec![0.0; g.n()]), 0.0);
    }

    #[test]
    fn lp_zero_is_zero() {
        let g = grid();
        assert_eq!(radial_lp_ratio(&g, &vec![0.0; g.n()], 4.0).unwrap(), 0.0);
        assert!(radial_lp_ratio(&g, &vec![0.0; g.n()], 2.0).is_err());
    }
}
