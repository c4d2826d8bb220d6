//! Test and initial-data families near the harmonic map.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::energy::energy_split;
use crate::error::{Error, Result};
use crate::geometry::{jhe, reference_value, HarmonicParams, SphereProfile};
use crate::grid::RadialGrid;
use crate::projection::h1dot_norm_raw;
use crate::vec3::Vec3;

/// Gaussian bump `g(y) = exp(-(y - c)² / (2w²))` along `a e + b J^h e`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub centre: f64,
    pub width: f64,
    pub a: f64,
    pub b: f64,
}

impl Bump {
    fn envelope(&self, y: f64) -> f64 {
        (-0.5 * ((y - self.centre) / self.width).powi(2)).exp()
    }

    /// Unnormalised perturbation at reference coordinate `y`.
    pub fn perturbation(&self, y: f64) -> Vec3 {
        let h = reference_value(y);
        (Vec3::E * self.a + jhe(h) * self.b) * self.envelope(y)
    }

    pub fn scaled(&self, k: f64) -> Bump {
        Bump { a: self.a * k, b: self.b * k, ..*self }
    }
}

/// `e^{αR} normalise(h̃ + bump)(y - m log s)`, evaluated in closed form.
pub fn bump_profile(grid: Arc<RadialGrid>, p: HarmonicParams, bump: &Bump) -> SphereProfile {
    let mf = grid.mf();
    let ls = p.s.ln();
    let v = grid
        .y()
        .iter()
        .map(|&y| {
            let t = y - mf * ls;
            (reference_value(t) + bump.perturbation(t)).normalized().rotate_k(p.alpha)
        })
        .collect();
    SphereProfile::from_raw(grid, v)
}

/// `Ḣ¹` size of the perturbation before renormalisation.
pub fn bump_size(grid: &RadialGrid, bump: &Bump) -> f64 {
    let v: Vec<Vec3> = grid.y().iter().map(|&y| bump.perturbation(y)).collect();
    h1dot_norm_raw(grid, &v)
}

/// Rescales `bump` so that the profile has the given excess energy.
pub fn bump_with_excess(
    grid: Arc<RadialGrid>,
    p: HarmonicParams,
    shape: &Bump,
    excess: f64,
) -> Result<(SphereProfile, Bump)> {
    if !(excess > 0.0) {
        return Err(Error::InvalidParameter(format!("target excess must be positive, got {excess}")));
    }
    let f = |k: f64| -> Result<f64> {
        Ok(energy_split(&bump_profile(grid.clone(), p, &shape.scaled(k)))?.excess)
    };
    let (mut lo, mut hi) = (1e-8f64, 1e-8f64);
    while f(hi)? < excess {
        lo = hi;
        hi *= 2.0;
        if hi > 1e3 {
            return Err(Error::InvalidParameter(format!("excess {excess} not reachable with this shape")));
        }
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if f(mid)? < excess {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 1e-13 {
            break;
        }
    }
    let k = (lo * hi).sqrt();
    let b = shape.scaled(k);
    Ok((bump_profile(grid, p, &b), b))
}

/// Profile `h̃(y - φ(y))` with `φ(y) = A sech(y / L)`: a slowly varying scale.
pub fn scale_mismatch_profile(grid: Arc<RadialGrid>, p: HarmonicParams, amplitude: f64, length: f64) -> SphereProfile {
    let mf = grid.mf();
    let ls = p.s.ln();
    let v = grid
        .y()
        .iter()
        .map(|&y| {
            let t = y - mf * ls;
            reference_value(t - amplitude / (t / length).cosh()).rotate_k(p.alpha)
        })
        .collect();
    SphereProfile::from_raw(grid, v)
}

/// Randomly drawn parameters and bump for trial `seed`.
pub fn random_bump(seed: u64) -> (HarmonicParams, Bump) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = HarmonicParams::new(
        rng.gen_range(0.6f64..1.6),
        rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
    )
    .expect("valid parameters");
    let bump = Bump {
        centre: rng.gen_range(-2.0..2.0),
        width: rng.gen_range(0.5..2.0),
        a: rng.gen_range(-0.2..0.2),
        b: rng.gen_range(-0.2..0.2),
    };
    (p, bump)
}

pub fn random_perturbed(grid: Arc<RadialGrid>, seed: u64) -> SphereProfile {
    let (p, bump) = random_bump(seed);
    bump_profile(grid, p, &bump)
}
