//! Conversion of the dimensionless cavity parameters to laboratory units.
//!
//! The vacuum coupling wavenumber κ is fixed by ħg₁ = ħ²κ²/2m, i.e.
//! κ = √(2mg₁/ħ). A cavity of dimensionless length κL is then L = κL/κ long,
//! and an atom with momentum k/κ carries kinetic energy (k/κ)²ħg₁.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Atomic mass constant, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// Mass of ⁸⁵Rb in atomic mass units.
pub const RB85_MASS_U: f64 = 84.911_789_738;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalScale {
    pub g1_rad_per_s: f64,
    pub atom_mass_kg: f64,
}

impl PhysicalScale {
    pub fn new(g1_rad_per_s: f64, atom_mass_kg: f64) -> Result<Self> {
        for (name, x) in [("g1", g1_rad_per_s), ("atom mass", atom_mass_kg)] {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be finite and > 0, got {x}")));
            }
        }
        Ok(Self { g1_rad_per_s, atom_mass_kg })
    }

    /// ⁸⁵Rb with g₁ = 2π × 10 MHz.
    pub fn rubidium85() -> Self {
        Self {
            g1_rad_per_s: 2.0 * PI * 1e7,
            atom_mass_kg: RB85_MASS_U * ATOMIC_MASS_UNIT,
        }
    }

    pub fn kappa_per_m(&self) -> f64 {
        (2.0 * self.atom_mass_kg * self.g1_rad_per_s / HBAR).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalValues {
    pub cavity_length_m: f64,
    pub temperature_k: f64,
    pub kappa_per_m: f64,
}

pub fn physical_scale(ps: &PhysicalScale, kappa_l: f64, k_ratio: f64) -> Result<PhysicalValues> {
    let ps = PhysicalScale::new(ps.g1_rad_per_s, ps.atom_mass_kg)?;
    if !(kappa_l.is_finite() && kappa_l >= 0.0 && k_ratio.is_finite() && k_ratio >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "kappa_L and k_ratio must be finite and >= 0, got {kappa_l}, {k_ratio}"
        )));
    }
    let kappa = ps.kappa_per_m();
    Ok(PhysicalValues {
        cavity_length_m: kappa_l / kappa,
        temperature_k: k_ratio * k_ratio * HBAR * ps.g1_rad_per_s / BOLTZMANN,
        kappa_per_m: kappa,
    })
}
