//! Jaynes–Cummings emission probabilities with a classical center of mass.
//!
//! An atom crossing the cavity at speed ħk/m spends τ = Lm/(ħk) inside.
//! With ħg₁ = ħ²κ²/2m this is g₁τ = κ²L/(2k) = (κL)/(2·k/κ), which is how the
//! fast-atom limit of the quantized-motion model maps onto this one.

use crate::error::{Error, Result};
use crate::scattering::GainProbabilities;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JcInput {
    pub gamma: f64,
    pub n1: u32,
    pub n2: u32,
    /// Dimensionless interaction time g₁τ.
    pub g1_tau: f64,
}

impl JcInput {
    pub fn new(gamma: f64, n1: u32, n2: u32, g1_tau: f64) -> Result<Self> {
        let inp = Self { gamma, n1, n2, g1_tau };
        inp.validate()?;
        Ok(inp)
    }

    /// Interaction time of a classical atom with momentum k/κ crossing κL.
    pub fn from_transit(gamma: f64, n1: u32, n2: u32, kappa_l: f64, k_ratio: f64) -> Result<Self> {
        if !(k_ratio.is_finite() && k_ratio > 0.0) {
            return Err(Error::InvalidInput(format!("k_ratio must be > 0, got {k_ratio}")));
        }
        Self::new(gamma, n1, n2, transit_time(kappa_l, k_ratio))
    }

    fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::InvalidInput(format!("gamma must be >= 0, got {}", self.gamma)));
        }
        if !(self.g1_tau.is_finite() && self.g1_tau >= 0.0) {
            return Err(Error::InvalidInput(format!("g1_tau must be >= 0, got {}", self.g1_tau)));
        }
        Ok(())
    }
}

/// g₁τ for a classical transit of length κL at momentum k/κ.
pub fn transit_time(kappa_l: f64, k_ratio: f64) -> f64 {
    kappa_l / (2.0 * k_ratio)
}

pub fn jc_gain(inp: &JcInput) -> Result<GainProbabilities> {
    inp.validate()?;
    let a = f64::from(inp.n1) + 1.0;
    let b = inp.gamma * inp.gamma * (f64::from(inp.n2) + 1.0);
    let omega2 = a + b;
    let omega_tau = inp.g1_tau * omega2.sqrt();
    let s1 = omega_tau.sin();
    let s2 = (0.5 * omega_tau).sin();
    Ok(GainProbabilities {
        p_one: a / omega2 * s1 * s1,
        p_two: 4.0 * a * b / (omega2 * omega2) * s2.powi(4),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn at_rabi_angle(gamma: f64, n1: u32, n2: u32, omega_tau: f64) -> GainProbabilities {
        let omega = ((n1 as f64 + 1.0) + gamma * gamma * (n2 as f64 + 1.0)).sqrt();
        jc_gain(&JcInput::new(gamma, n1, n2, omega_tau / omega).unwrap()).unwrap()
    }

    #[test]
    fn odd_multiple_of_pi_forbids_one_photon() {
        let g = at_rabi_angle(2.0, 0, 0, PI);
        assert!(g.p_one < 1e-30);
        assert!((g.p_two - 0.64).abs() < 1e-14);
    }

    #[test]
    fn full_rabi_cycle_returns_to_excited_state() {
        let g = at_rabi_angle(2.0, 0, 0, 2.0 * PI);
        assert!(g.p_one < 1e-30);
        assert!(g.p_two < 1e-30);
    }

    #[test]
    fn zero_time_means_no_emission() {
        let g = jc_gain(&JcInput::new(1.5, 4, 2, 0.0).unwrap()).unwrap();
        assert_eq!((g.p_one, g.p_two), (0.0, 0.0));
    }

    #[test]
    fn transit_mapping() {
        let inp = JcInput::from_transit(2.0, 0, 0, 2000.0 * PI, 100.0).unwrap();
        assert!((inp.g1_tau - 10.0 * PI).abs() < 1e-12);
        assert!(JcInput::from_transit(2.0, 0, 0, 1.0, 0.0).is_err());
        assert!(JcInput::new(-1.0, 0, 0, 1.0).is_err());
    }
}
