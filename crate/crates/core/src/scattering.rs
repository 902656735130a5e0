//! Quantized-motion scattering of an excited cascade atom off a bimodal
//! mesa-mode cavity.
//!
//! Everything here is dimensionless: wavenumbers are in units of the vacuum
//! coupling wavenumber κ (defined by ħg₁ = ħ²κ²/2m), lengths in 1/κ and
//! couplings in units of g₁. In these units the dressed-state potential
//! height ħΩ corresponds to a wavenumber shift (k^±)² = k² ∓ Ω/g₁.
//!
//! The atom enters in |a, n₁, n₂⟩, which splits into the two dressed
//! branches |φ^±⟩ (barrier and well) and the dark state |φ⁰⟩. The dark part
//! propagates freely; the dressed parts pick up the square barrier/well
//! amplitudes ρ^±, τ^±.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Beam and cavity geometry without the photon numbers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CavityGeometry {
    /// Incident momentum k/κ.
    pub k_ratio: f64,
    /// Cavity length κL.
    pub kappa_l: f64,
    /// Coupling ratio g₂/g₁.
    pub gamma: f64,
}

impl CavityGeometry {
    pub fn new(k_ratio: f64, kappa_l: f64, gamma: f64) -> Result<Self> {
        let geo = Self { k_ratio, kappa_l, gamma };
        geo.validate()?;
        Ok(geo)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k_ratio.is_finite() && self.k_ratio > 0.0) {
            return Err(Error::InvalidInput(format!(
                "k_ratio must be finite and > 0, got {}",
                self.k_ratio
            )));
        }
        if !(self.kappa_l.is_finite() && self.kappa_l >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "kappa_L must be finite and >= 0, got {}",
                self.kappa_l
            )));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "gamma must be finite and >= 0, got {}",
                self.gamma
            )));
        }
        Ok(())
    }

    pub fn at(&self, n1: u32, n2: u32) -> ScatterInput {
        ScatterInput {
            k_ratio: self.k_ratio,
            kappa_l: self.kappa_l,
            gamma: self.gamma,
            n1,
            n2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatterInput {
    pub k_ratio: f64,
    pub kappa_l: f64,
    pub gamma: f64,
    pub n1: u32,
    pub n2: u32,
}

impl ScatterInput {
    pub fn new(k_ratio: f64, kappa_l: f64, gamma: f64, n1: u32, n2: u32) -> Result<Self> {
        let inp = Self { k_ratio, kappa_l, gamma, n1, n2 };
        inp.validate()?;
        Ok(inp)
    }

    pub fn geometry(&self) -> CavityGeometry {
        CavityGeometry {
            k_ratio: self.k_ratio,
            kappa_l: self.kappa_l,
            gamma: self.gamma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry().validate()
    }
}

/// Expansion of |a, n₁, n₂⟩ over the dressed pair (weight `u`) and the dark
/// state (weight `v`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DressedCoefficients {
    pub u: f64,
    pub v: f64,
    /// Ω/g₁ = √((n₁+1) + γ²(n₂+1)).
    pub omega_scaled: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchAmplitudes {
    pub rho_plus: C64,
    pub tau_plus: C64,
    pub rho_minus: C64,
    pub tau_minus: C64,
}

/// Reflection/transmission amplitudes for the three exit states
/// |a, n₁, n₂⟩, |b₁, n₁+1, n₂⟩ and |b₂, n₁+1, n₂+1⟩.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScatterChannels {
    pub r_a: C64,
    pub t_a: C64,
    pub r_b1: C64,
    pub t_b1: C64,
    pub r_b2: C64,
    pub t_b2: C64,
}

impl ScatterChannels {
    pub fn total_probability(&self) -> f64 {
        [self.r_a, self.t_a, self.r_b1, self.t_b1, self.r_b2, self.t_b2]
            .iter()
            .map(|a| a.norm_sqr())
            .sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainProbabilities {
    /// Probability of a→b₁ (one photon into mode 1).
    pub p_one: f64,
    /// Probability of a→b₁→b₂ (one photon into each mode).
    pub p_two: f64,
}

pub fn dressed_coefficients(inp: &ScatterInput) -> Result<DressedCoefficients> {
    inp.validate()?;
    Ok(dressed_unchecked(inp.gamma, inp.n1, inp.n2))
}

fn dressed_unchecked(gamma: f64, n1: u32, n2: u32) -> DressedCoefficients {
    let a = f64::from(n1) + 1.0;
    let b = gamma * gamma * (f64::from(n2) + 1.0);
    let omega_scaled = (a + b).sqrt();
    let mut u = a.sqrt() / omega_scaled;
    let mut v = b.sqrt() / omega_scaled;
    // Snap the weights so that u² + v² = 1 holds to the last bit; the larger
    // one absorbs the rounding.
    if u >= v {
        u = (1.0 - v * v).sqrt();
    } else {
        v = (1.0 - u * u).sqrt();
    }
    DressedCoefficients { u, v, omega_scaled }
}

/// (k^±/κ)² = (k/κ)² ∓ Ω/g₁, real for both branches.
fn branch_ksq(inp: &ScatterInput) -> (f64, f64) {
    let omega = dressed_unchecked(inp.gamma, inp.n1, inp.n2).omega_scaled;
    let k2 = inp.k_ratio * inp.k_ratio;
    (k2 - omega, k2 + omega)
}

fn principal_sqrt(ksq: f64) -> C64 {
    if ksq >= 0.0 {
        C64::new(ksq.sqrt(), 0.0)
    } else {
        C64::new(0.0, (-ksq).sqrt())
    }
}

/// Interior wavenumbers (k⁺, k⁻) in units of κ. k⁺ is purely imaginary
/// (positive imaginary part) below the barrier top.
pub fn branch_wavenumbers(inp: &ScatterInput) -> Result<(C64, C64)> {
    inp.validate()?;
    let (kp2, km2) = branch_ksq(inp);
    Ok((principal_sqrt(kp2), principal_sqrt(km2)))
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

fn tanhc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 3.0
    } else {
        x.tanh() / x
    }
}

/// 1/cosh(x) that decays to exactly zero instead of overflowing.
fn sech(x: f64) -> f64 {
    let e = (-x.abs()).exp();
    2.0 * e / (1.0 + e * e)
}

/// Square barrier/well of length `l` with interior (k')² = `ksq` for an
/// exterior wavenumber `k`.
///
/// Written in terms of cos(k'L), k' sin(k'L) and sin(k'L)/k', which are even
/// in k' and therefore insensitive to the branch of the square root. Below
/// the barrier top every term is divided by cosh(qL), leaving only tanh and
/// sech, so arbitrarily long cavities stay finite.
fn slab_amplitudes(k: f64, ksq: f64, l: f64) -> (C64, C64) {
    let (c, s_times_k, s_over_k, scale) = if ksq >= 0.0 {
        let kp = ksq.sqrt();
        let x = kp * l;
        (x.cos(), kp * x.sin(), l * sinc(x), 1.0)
    } else {
        let q = (-ksq).sqrt();
        let x = q * l;
        (1.0, -q * x.tanh(), l * tanhc(x), sech(x))
    };
    // Δ sin(k'L) and Σ sin(k'L) (divided by cosh(qL) in the tunneling case).
    let delta_sin = 0.5 * (s_times_k / k - k * s_over_k);
    let sigma_sin = 0.5 * (s_times_k / k + k * s_over_k);
    let denom = C64::new(c, -sigma_sin);
    let rho = C64::new(0.0, delta_sin) / denom;
    let tau = if scale == 0.0 {
        C64::new(0.0, 0.0)
    } else {
        C64::from_polar(scale, -k * l) / denom
    };
    (rho, tau)
}

/// ρ^±, τ^± for the barrier (+) and well (−) branches.
pub fn branch_amplitudes(inp: &ScatterInput) -> Result<BranchAmplitudes> {
    inp.validate()?;
    Ok(branch_unchecked(inp))
}

fn branch_unchecked(inp: &ScatterInput) -> BranchAmplitudes {
    let (kp2, km2) = branch_ksq(inp);
    let (rho_plus, tau_plus) = slab_amplitudes(inp.k_ratio, kp2, inp.kappa_l);
    let (rho_minus, tau_minus) = slab_amplitudes(inp.k_ratio, km2, inp.kappa_l);
    BranchAmplitudes {
        rho_plus,
        tau_plus,
        rho_minus,
        tau_minus,
    }
}

/// Direct complex evaluation of ρ^± and τ^± with hyperbolic functions left
/// unnormalized. Diagnostic only: it fails once cosh(qL) overflows.
pub fn branch_amplitudes_direct(inp: &ScatterInput, k_plus: C64) -> Result<BranchAmplitudes> {
    inp.validate()?;
    let (_, km2) = branch_ksq(inp);
    let k = inp.k_ratio;
    let l = inp.kappa_l;
    let eval = |kb: C64| -> Result<(C64, C64)> {
        let i = C64::i();
        let x = kb * l;
        let (s, c) = (x.sin(), x.cos());
        if !(s.is_finite() && c.is_finite()) {
            return Err(Error::Overflow {
                what: "cosh(k+ L)",
                exponent: x.im.abs(),
            });
        }
        let delta = 0.5 * (kb / k - k / kb);
        let sigma = 0.5 * (kb / k + k / kb);
        let tau = C64::from_polar(1.0, -k * l) / (c - i * sigma * s);
        let rho = i * delta * s * C64::from_polar(1.0, k * l) * tau;
        Ok((rho, tau))
    };
    let (rho_plus, tau_plus) = eval(k_plus)?;
    let (rho_minus, tau_minus) = eval(C64::new(km2.sqrt(), 0.0))?;
    Ok(BranchAmplitudes {
        rho_plus,
        tau_plus,
        rho_minus,
        tau_minus,
    })
}

pub fn scatter_channels(inp: &ScatterInput) -> Result<ScatterChannels> {
    inp.validate()?;
    Ok(channels_unchecked(inp))
}

fn channels_unchecked(inp: &ScatterInput) -> ScatterChannels {
    let DressedCoefficients { u, v, .. } = dressed_unchecked(inp.gamma, inp.n1, inp.n2);
    let b = branch_unchecked(inp);
    let rho_sum = b.rho_plus + b.rho_minus;
    let tau_sum = b.tau_plus + b.tau_minus;
    let half_u2 = 0.5 * u * u;
    let half_uv = 0.5 * u * v;
    ScatterChannels {
        r_a: rho_sum * half_u2,
        t_a: tau_sum * half_u2 + v * v,
        r_b1: (b.rho_plus - b.rho_minus) * (0.5 * u),
        t_b1: (b.tau_plus - b.tau_minus) * (0.5 * u),
        r_b2: rho_sum * half_uv,
        t_b2: tau_sum * half_uv - u * v,
    }
}

pub fn gain_probabilities(inp: &ScatterInput) -> Result<GainProbabilities> {
    inp.validate()?;
    Ok(gain_unchecked(inp))
}

pub(crate) fn gain_unchecked(inp: &ScatterInput) -> GainProbabilities {
    let ch = channels_unchecked(inp);
    GainProbabilities {
        p_one: ch.r_b1.norm_sqr() + ch.t_b1.norm_sqr(),
        p_two: ch.r_b2.norm_sqr() + ch.t_b2.norm_sqr(),
    }
}

/// Ultracold limit where ρ^± ≈ −1 and τ^± ≈ 0: one-photon emission is
/// suppressed and P(a→b₂) = 2u²v².
pub fn ultracold_approx(gamma: f64, n1: u32, n2: u32) -> Result<GainProbabilities> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "gamma must be finite and >= 0, got {gamma}"
        )));
    }
    let a = f64::from(n1) + 1.0;
    let b = gamma * gamma * (f64::from(n2) + 1.0);
    let s = a + b;
    Ok(GainProbabilities {
        p_one: 0.0,
        p_two: 2.0 * a * b / (s * s),
    })
}
