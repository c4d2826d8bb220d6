//! Dirichlet energy, the Bogomolny split and related functionals.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{bogomolny_residual, SphereProfile, TOL_BC};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    #[serde(rename = "E")]
    pub energy: f64,
    /// `2πm [v3(r_max) + 1]`, evaluated from the boundary data.
    #[serde(rename = "E_min")]
    pub e_min: f64,
    /// `δ₁² = E - 4πm`.
    pub excess: f64,
    pub bogomolny_term: f64,
    #[serde(rename = "E_tilde")]
    pub e_tilde: f64,
    pub tv3: f64,
}

/// `π ∫ (|v_r|² + (m²/r²)(v1² + v2²)) r dr`, evaluated in y.
pub fn energy(profile: &SphereProfile) -> f64 {
    2.0 * PI * profile.grid().mf() * reduced_energy(profile)
}

/// `Ẽ = ½ ∫ (|ṽ'|² + ṽ1² + ṽ2²) dy`.
pub fn reduced_energy(profile: &SphereProfile) -> f64 {
    let g = profile.grid();
    let d = g.deriv_y(profile.values());
    let dens: Vec<f64> = profile
        .values()
        .iter()
        .zip(&d)
        .map(|(v, dv)| dv.norm2() + v[0] * v[0] + v[1] * v[1])
        .collect();
    0.5 * g.integrate_dy(&dens)
}

/// Energy density in `r dr` form, used as a cross-check of the y form.
pub fn energy_rdr(profile: &SphereProfile) -> f64 {
    let g = profile.grid();
    let mf = g.mf();
    let vr = g.deriv_r(profile.values());
    let dens: Vec<f64> = profile
        .values()
        .iter()
        .zip(&vr)
        .zip(g.r())
        .map(|((v, d), r)| d.norm2() + mf * mf / (r * r) * (v[0] * v[0] + v[1] * v[1]))
        .collect();
    PI * g.integrate_rdr(&dens)
}

pub fn total_variation_v3(profile: &SphereProfile) -> f64 {
    profile.values().windows(2).map(|w| (w[1][2] - w[0][2]).abs()).sum()
}

pub fn energy_split(profile: &SphereProfile) -> Result<EnergyReport> {
    energy_split_with(profile, TOL_BC)
}

pub fn energy_split_with(profile: &SphereProfile, tol_bc: f64) -> Result<EnergyReport> {
    profile.require_class(tol_bc)?;
    let mf = profile.grid().mf();
    let v = profile.values();
    let e_min = 2.0 * PI * mf * (v[v.len() - 1][2] + 1.0);
    let four_pi_m = 4.0 * PI * mf;
    if (e_min - four_pi_m).abs() > 2.0 * PI * mf * tol_bc {
        return Err(Error::NotInClass(format!("boundary minimum {e_min} differs from 4πm")));
    }
    let e_tilde = reduced_energy(profile);
    let energy = 2.0 * PI * mf * e_tilde;
    let b = bogomolny_residual(profile);
    Ok(EnergyReport {
        energy,
        e_min,
        excess: energy - four_pi_m,
        bogomolny_term: PI * b * b,
        e_tilde,
        tv3: total_variation_v3(profile),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{harmonic_profile, HarmonicParams};
    use crate::grid::RadialGrid;
    use crate::vec3::Vec3;

    #[test]
    fn harmonic_energy_and_split() {
        for m in 1..=3 {
            let g = RadialGrid::standard(m).unwrap().shared();
            let h = harmonic_profile(g, HarmonicParams::new(0.7, 2.0).unwrap());
            let rep = energy_split(&h).unwrap();
            let e = 4.0 * PI * m as f64;
            assert!((rep.energy - e).abs() < 1e-6 * e);
            assert!((energy_rdr(&h) - rep.energy).abs() < 1e-12 * e);
            assert!((rep.e_tilde - 2.0).abs() < 1e-6);
            assert!(rep.bogomolny_term < 1e-10);
            assert!((rep.tv3 - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_south_pole() {
        let g = RadialGrid::standard(1).unwrap().shared();
        let p = SphereProfile::new(g.clone(), vec![-Vec3::K; g.n()]).unwrap();
        assert_eq!(energy(&p), 0.0);
        assert!(energy_split(&p).is_err());
    }

    #[test]
    fn overshoot_variation() {
        let g = RadialGrid::new(1, -1.0, 1.0, 9).unwrap().shared();
        let z = [-1.0, -0.5, 0.0, 0.5, 1.0, 1.0, 1.0, 1.0, 1.0];
        let a = 0.25;
        let v: Vec<Vec3> = z
            .iter()
            .enumerate()
            .map(|(j, &z)| if j == 5 { Vec3::new(0.0, 0.0, 1.0 + a) } else { Vec3::new(0.0, 0.0, z) })
            .collect();
        let p = SphereProfile::from_raw(g, v);
        assert!((total_variation_v3(&p) - (2.0 + 2.0 * a)).abs() < 1e-15);
    }
}
