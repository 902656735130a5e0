//! Per-mode marginals and normalized variances σ² = (⟨n²⟩ − ⟨n⟩²)/⟨n⟩.

use serde::{Deserialize, Serialize};

use crate::master::JointDistribution;

/// σ² within this distance of 1 is reported as Poissonian.
pub const POISSON_DEAD_BAND: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub mean1: f64,
    pub mean2: f64,
    pub var1_norm: f64,
    pub var2_norm: f64,
    /// Set when a mode has zero mean and its σ² is reported as 0.
    pub zero_mean1: bool,
    pub zero_mean2: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhotonStatistics {
    SubPoissonian,
    Poissonian,
    SuperPoissonian,
}

impl PhotonStatistics {
    pub fn classify(var_norm: f64) -> Self {
        if var_norm < 1.0 - POISSON_DEAD_BAND {
            Self::SubPoissonian
        } else if var_norm > 1.0 + POISSON_DEAD_BAND {
            Self::SuperPoissonian
        } else {
            Self::Poissonian
        }
    }
}

pub fn marginals(p: &JointDistribution) -> (Vec<f64>, Vec<f64>) {
    let g = p.grid;
    let mut p1 = vec![0.0; g.n1];
    let mut p2 = vec![0.0; g.n2];
    for (n1, row) in p.p.chunks(g.n2).enumerate() {
        for (n2, &x) in row.iter().enumerate() {
            p1[n1] += x;
            p2[n2] += x;
        }
    }
    (p1, p2)
}

/// (mean, normalized variance, zero-mean flag) of a single-mode distribution.
pub fn marginal_moments(p: &[f64]) -> (f64, f64, bool) {
    let mass: f64 = p.iter().sum();
    if mass <= 0.0 {
        return (0.0, 0.0, true);
    }
    let (s1, s2) = p.iter().enumerate().fold((0.0, 0.0), |(a, b), (n, &x)| {
        let m = n as f64;
        (a + m * x, b + m * m * x)
    });
    let mean = s1 / mass;
    if mean <= 0.0 {
        return (0.0, 0.0, true);
    }
    let var = (s2 / mass - mean * mean).max(0.0);
    (mean, var / mean, false)
}

pub fn moments(p: &JointDistribution) -> MomentSummary {
    let (p1, p2) = marginals(p);
    let (mean1, var1_norm, zero_mean1) = marginal_moments(&p1);
    let (mean2, var2_norm, zero_mean2) = marginal_moments(&p2);
    MomentSummary {
        mean1,
        mean2,
        var1_norm,
        var2_norm,
        zero_mean1,
        zero_mean2,
    }
}

pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| (a.get(i).copied().unwrap_or(0.0) - b.get(i).copied().unwrap_or(0.0)).abs())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::master::{thermal_distribution, Grid};

    fn poisson(lambda: f64, len: usize) -> Vec<f64> {
        let mut p = vec![(-lambda).exp(); len];
        for n in 1..len {
            p[n] = p[n - 1] * lambda / n as f64;
        }
        p
    }

    #[test]
    fn delta_marginals_and_moments() {
        let g = Grid::new(6, 8).unwrap();
        let d = JointDistribution::delta(g, 2, 5).unwrap();
        let (p1, p2) = marginals(&d);
        assert_eq!(p1, vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(p2[5], 1.0);
        assert_eq!(p2.iter().sum::<f64>(), 1.0);
        let m = moments(&d);
        assert_eq!((m.mean1, m.mean2), (2.0, 5.0));
        assert_eq!((m.var1_norm, m.var2_norm), (0.0, 0.0));
        assert!(!m.zero_mean1);

        let m = moments(&JointDistribution::vacuum(g));
        assert!(m.zero_mean1 && m.zero_mean2);
        assert_eq!(m.var1_norm, 0.0);
    }

    #[test]
    fn product_distribution_marginals_are_factors() {
        let f = poisson(3.0, 30);
        let h = thermal_distribution(2.0, 40);
        let g = Grid::new(30, 40).unwrap();
        let d = JointDistribution::from_fn(g, |a, b| f[a] * h[b]);
        let (p1, p2) = marginals(&d);
        let fs: f64 = f.iter().sum();
        let hs: f64 = h.iter().sum();
        assert!(p1.iter().zip(&f).all(|(a, b)| (a - b * hs).abs() < 1e-15));
        assert!(p2.iter().zip(&h).all(|(a, b)| (a - b * fs).abs() < 1e-15));
    }

    #[test]
    fn poisson_and_thermal_variances() {
        let (mean, var, _) = marginal_moments(&poisson(9.0, 80));
        assert!((mean - 9.0).abs() < 1e-10);
        assert!((var - 1.0).abs() < 1e-10);
        let (mean, var, _) = marginal_moments(&thermal_distribution(1.5, 200));
        assert!((mean - 1.5).abs() < 1e-10);
        assert!((var - 2.5).abs() < 1e-10);
    }

    #[test]
    fn classification_uses_dead_band() {
        assert_eq!(PhotonStatistics::classify(1.0005), PhotonStatistics::Poissonian);
        assert_eq!(PhotonStatistics::classify(0.9995), PhotonStatistics::Poissonian);
        assert_eq!(PhotonStatistics::classify(1.002), PhotonStatistics::SuperPoissonian);
        assert_eq!(PhotonStatistics::classify(0.99), PhotonStatistics::SubPoissonian);
    }
}
