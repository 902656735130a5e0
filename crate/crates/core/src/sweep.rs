//! Parameter sweeps and the named presets.

use std::f64::consts::PI;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jc::{jc_gain, transit_time, JcInput};
use crate::master::{
    direct_steady_state, rk4_steady_state, twolevel_detailed_balance, Grid, JointDistribution, MazerConfig,
    Method, Rk4Options, SteadyState,
};
use crate::scattering::{gain_unchecked, scatter_channels, CavityGeometry, ScatterInput};
use crate::statistics::{marginals, moments, MomentSummary};
use crate::table::{fmt_f64, Convergence, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParam {
    KappaL,
    KRatio,
}

impl SweepParam {
    pub fn column_name(self) -> &'static str {
        match self {
            Self::KappaL => "kappa_l",
            Self::KRatio => "k_ratio",
        }
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('_', "-").as_str() {
            "kappa-l" => Ok(Self::KappaL),
            "k-ratio" => Ok(Self::KRatio),
            _ => Err(Error::Parse(format!("cannot sweep '{s}' (expected kappa-l or k-ratio)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub start: f64,
    pub end: f64,
    pub steps: usize,
    /// Fixed values; the swept field is overwritten point by point.
    pub base: ScatterInput,
    /// Adds the γ = 0 one-photon probability as an extra column.
    pub twolevel_column: bool,
}

impl SweepSpec {
    pub fn new(param: SweepParam, start: f64, end: f64, steps: usize, base: ScatterInput) -> Result<Self> {
        let spec = Self {
            param,
            start,
            end,
            steps,
            base,
            twolevel_column: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::InvalidInput(format!("sweep needs at least 2 steps, got {}", self.steps)));
        }
        if !(self.start.is_finite() && self.end.is_finite() && self.start < self.end) {
            return Err(Error::InvalidInput(format!(
                "sweep range must satisfy start < end, got [{}, {}]",
                self.start, self.end
            )));
        }
        self.point(0).validate()?;
        self.point(self.steps - 1).validate()
    }

    /// Uniform grid including both endpoints.
    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.steps {
            return self.end;
        }
        self.start + (self.end - self.start) * i as f64 / (self.steps - 1) as f64
    }

    fn point(&self, i: usize) -> ScatterInput {
        let x = self.value(i);
        let mut inp = self.base;
        match self.param {
            SweepParam::KappaL => inp.kappa_l = x,
            SweepParam::KRatio => inp.k_ratio = x,
        }
        inp
    }
}

fn geometry_config(table: &mut Table, inp: &ScatterInput) {
    table.set_config("k_ratio", fmt_f64(inp.k_ratio));
    table.set_config("kappa_l", fmt_f64(inp.kappa_l));
    table.set_config("gamma", fmt_f64(inp.gamma));
    table.set_config("n1", inp.n1);
    table.set_config("n2", inp.n2);
}

/// Emission probabilities along the sweep, quantized model next to the
/// classical-transit Jaynes–Cummings result with g₁τ = κL/(2k/κ).
pub fn emission_sweep(spec: &SweepSpec) -> Result<Table> {
    spec.validate()?;
    let rows = (0..spec.steps)
        .into_par_iter()
        .map(|i| {
            let inp = spec.point(i);
            let ch = scatter_channels(&inp)?;
            let jc = jc_gain(&JcInput::new(
                inp.gamma,
                inp.n1,
                inp.n2,
                transit_time(inp.kappa_l, inp.k_ratio),
            )?)?;
            let mut row = vec![
                spec.value(i),
                ch.r_b1.norm_sqr() + ch.t_b1.norm_sqr(),
                ch.r_b2.norm_sqr() + ch.t_b2.norm_sqr(),
                ch.r_a.norm_sqr(),
                ch.t_a.norm_sqr(),
                jc.p_one,
                jc.p_two,
            ];
            if spec.twolevel_column {
                row.push(gain_unchecked(&ScatterInput { gamma: 0.0, ..inp }).p_one);
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut columns = vec![
        spec.param.column_name(),
        "p_one",
        "p_two",
        "abs_r_a_sq",
        "abs_t_a_sq",
        "jc_p_one",
        "jc_p_two",
    ];
    if spec.twolevel_column {
        columns.push("p_one_twolevel");
    }
    let mut table = Table::new(&columns);
    geometry_config(&mut table, &spec.base);
    table.config.remove(spec.param.column_name());
    table.set_config("sweep", spec.param.column_name());
    table.set_config("from", fmt_f64(spec.start));
    table.set_config("to", fmt_f64(spec.end));
    table.set_config("steps", spec.steps);
    table.rows = rows;
    Ok(table)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SteadyRequest {
    pub cfg: MazerConfig,
    pub method: Method,
    pub rk4: Rk4Options,
    /// Adds the γ = 0 detailed-balance distribution of mode 1.
    pub twolevel_column: bool,
}

impl SteadyRequest {
    pub fn new(cfg: MazerConfig) -> Self {
        Self {
            cfg,
            method: Method::Rk4,
            rk4: Rk4Options::default(),
            twolevel_column: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SteadyReport {
    pub table: Table,
    pub state: SteadyState,
    pub moments: MomentSummary,
}

pub fn solve_steady(req: &SteadyRequest) -> Result<SteadyState> {
    match req.method {
        Method::Rk4 => rk4_steady_state(&req.cfg, &JointDistribution::vacuum(req.cfg.grid), &req.rk4),
        Method::Direct => direct_steady_state(&req.cfg),
    }
}

/// Steady-state marginals P₁(n), P₂(n) with their moments.
pub fn steady_sweep(req: &SteadyRequest) -> Result<SteadyReport> {
    let state = solve_steady(req)?;
    let (p1, p2) = marginals(&state.dist);
    let m = moments(&state.dist);
    let twolevel = if req.twolevel_column {
        let mut cfg = req.cfg;
        cfg.geometry.gamma = 0.0;
        Some(twolevel_detailed_balance(&cfg)?.0)
    } else {
        None
    };

    let mut columns = vec!["n", "p1", "p2"];
    if twolevel.is_some() {
        columns.push("p1_twolevel");
    }
    let mut table = Table::new(&columns);
    let len = p1.len().max(p2.len());
    for n in 0..len {
        let mut row = vec![n as f64, p1.get(n).copied().unwrap_or(0.0), p2.get(n).copied().unwrap_or(0.0)];
        if let Some(t) = &twolevel {
            row.push(t.get(n).copied().unwrap_or(0.0));
        }
        table.rows.push(row);
    }

    let c = &req.cfg;
    let g = c.geometry;
    table.set_config("k_ratio", fmt_f64(g.k_ratio));
    table.set_config("kappa_l", fmt_f64(g.kappa_l));
    table.set_config("gamma", fmt_f64(g.gamma));
    table.set_config("r_over_c", fmt_f64(c.r_over_c));
    table.set_config("nb1", fmt_f64(c.nb1));
    table.set_config("nb2", fmt_f64(c.nb2));
    table.set_config("c1", fmt_f64(c.c1_over_c));
    table.set_config("c2", fmt_f64(c.c2_over_c));
    table.set_config("grid", c.grid);
    table.set_config("method", if req.method == Method::Rk4 { "rk4" } else { "direct" });
    if req.method == Method::Rk4 {
        if let Some(dt) = req.rk4.dt {
            table.set_config("dt", fmt_f64(dt));
        }
        table.set_config("tol", fmt_f64(req.rk4.tol));
        table.set_config("t_max", fmt_f64(req.rk4.t_max));
    }

    table.summary.insert("mean1".into(), m.mean1);
    table.summary.insert("mean2".into(), m.mean2);
    table.summary.insert("var1_norm".into(), m.var1_norm);
    table.summary.insert("var2_norm".into(), m.var2_norm);
    table.summary.insert("zero_mean1".into(), f64::from(u8::from(m.zero_mean1)));
    table.summary.insert("zero_mean2".into(), f64::from(u8::from(m.zero_mean2)));
    table.convergence = Some(Convergence::from(&state));

    Ok(SteadyReport {
        table,
        state,
        moments: m,
    })
}

/// Named parameter sets. Emitted data is never rescaled, so the two-level
/// columns hold actual probabilities even where a plot would magnify them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Fig3a,
    Fig3b,
    Fig4a,
    Fig4b,
    Fig5,
    Fig6,
    Fig7,
    Fig7Inset,
}

pub enum PresetRun {
    Emission(SweepSpec),
    Steady(SteadyRequest),
}

impl Preset {
    pub const ALL: [Preset; 8] = [
        Self::Fig3a,
        Self::Fig3b,
        Self::Fig4a,
        Self::Fig4b,
        Self::Fig5,
        Self::Fig6,
        Self::Fig7,
        Self::Fig7Inset,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Fig3a => "fig3a",
            Self::Fig3b => "fig3b",
            Self::Fig4a => "fig4a",
            Self::Fig4b => "fig4b",
            Self::Fig5 => "fig5",
            Self::Fig6 => "fig6",
            Self::Fig7 => "fig7",
            Self::Fig7Inset => "fig7-inset",
        }
    }

    /// Steady-state presets share r/C = 50, C₁ = C₂ = C and a 128×128 grid.
    fn steady(k_ratio: f64, kappa_l: f64, gamma: f64, nb: f64) -> SteadyRequest {
        let geo = CavityGeometry {
            k_ratio,
            kappa_l,
            gamma,
        };
        SteadyRequest::new(MazerConfig::symmetric(geo, 50.0, nb, Grid { n1: 128, n2: 128 }))
    }

    fn emission(k_ratio: f64, gamma: f64, start: f64, end: f64) -> SweepSpec {
        SweepSpec {
            param: SweepParam::KappaL,
            start,
            end,
            steps: crate::config::DEFAULT_SWEEP_STEPS,
            base: ScatterInput {
                k_ratio,
                kappa_l: start,
                gamma,
                n1: 0,
                n2: 0,
            },
            twolevel_column: false,
        }
    }

    pub fn run(self) -> PresetRun {
        let kl = 20000.0 * PI;
        match self {
            // Window of ±5 around the κL of the steady-state presets.
            Self::Fig3a => {
                let mut s = Self::emission(0.01, 2.0, kl - 5.0, kl + 5.0);
                s.twolevel_column = true;
                PresetRun::Emission(s)
            }
            Self::Fig3b => PresetRun::Emission(Self::emission(100.0, 2.0, 0.0, 2000.0 * PI)),
            Self::Fig7Inset => PresetRun::Emission(Self::emission(1.1, 2.0, 0.0, 50.0)),
            Self::Fig4a => PresetRun::Steady(Self::steady(0.01, kl, 2.0, 0.0)),
            Self::Fig4b => PresetRun::Steady(Self::steady(0.01, kl, 1.0, 0.0)),
            Self::Fig5 => PresetRun::Steady(Self::steady(100.0, kl, 2.0, 0.0)),
            Self::Fig6 => {
                let mut r = Self::steady(0.01, 40000.0 * PI / 2f64.sqrt(), 2.0, 1.0);
                r.twolevel_column = true;
                PresetRun::Steady(r)
            }
            Self::Fig7 => PresetRun::Steady(Self::steady(1.1, kl, 2.0, 0.0)),
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|p| p.name()).collect();
                Error::Parse(format!("unknown preset '{s}' (expected one of {})", names.join(", ")))
            })
    }
}
