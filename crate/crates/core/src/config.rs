//! Run configuration from plain-text `key = value` files and command-line
//! overrides.
//!
//! Keys match the long flag names without the leading dashes (`k-ratio`,
//! `g-ratio`, `kappa-l`, `grid`, ...); underscores are accepted in place of
//! dashes. Blank lines and lines starting with `#` are ignored.

use std::f64::consts::PI;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::master::{Grid, MazerConfig, Method, Rk4Options};
use crate::scattering::{CavityGeometry, ScatterInput};
use crate::sweep::{SweepParam, SweepSpec};
use crate::table::Format;

pub const DEFAULT_K_RATIO: f64 = 0.01;
pub const DEFAULT_GAMMA: f64 = 2.0;
pub const DEFAULT_KAPPA_L: f64 = 20000.0 * PI;
pub const DEFAULT_R_OVER_C: f64 = 50.0;
pub const DEFAULT_GRID: usize = 128;
pub const DEFAULT_SWEEP_STEPS: usize = 2000;

/// Every field is optional so that a file and the flags can be layered.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub k_ratio: Option<f64>,
    pub g_ratio: Option<f64>,
    pub kappa_l: Option<f64>,
    pub n1: Option<u32>,
    pub n2: Option<u32>,
    pub r_over_c: Option<f64>,
    pub nb: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub grid: Option<Grid>,
    pub dt: Option<f64>,
    pub tol: Option<f64>,
    pub t_max: Option<f64>,
    pub method: Option<Method>,
    pub out: Option<String>,
    pub format: Option<Format>,
    pub sweep: Option<SweepParam>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub steps: Option<usize>,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4" => Ok(Self::Rk4),
            "direct" => Ok(Self::Direct),
            _ => Err(Error::Parse(format!("unknown method '{s}' (expected rk4 or direct)"))),
        }
    }
}

/// Parses `N1xN2`, e.g. `128x128`.
pub fn parse_grid(s: &str) -> Result<Grid> {
    let (a, b) = s
        .trim()
        .split_once(['x', 'X'])
        .ok_or_else(|| Error::Parse(format!("grid must look like N1xN2, got '{s}'")))?;
    let n1: usize = a.trim().parse().map_err(|_| Error::Parse(format!("bad grid size '{a}'")))?;
    let n2: usize = b.trim().parse().map_err(|_| Error::Parse(format!("bad grid size '{b}'")))?;
    if n1.checked_mul(n2).is_none() {
        return Err(Error::Parse(format!("grid {n1}x{n2} is too large")));
    }
    Grid::new(n1, n2)
}

fn value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Parse(format!("bad value for '{key}': '{v}'")))
}

impl RunConfig {
    /// Applies one `key`, `value` pair.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let norm = key.trim().replace('_', "-");
        let v = v.trim();
        match norm.as_str() {
            "k-ratio" => self.k_ratio = Some(value(key, v)?),
            "g-ratio" | "gamma" => self.g_ratio = Some(value(key, v)?),
            "kappa-l" => self.kappa_l = Some(value(key, v)?),
            "n1" => self.n1 = Some(value(key, v)?),
            "n2" => self.n2 = Some(value(key, v)?),
            "r-over-c" => self.r_over_c = Some(value(key, v)?),
            "nb" => self.nb = Some(value(key, v)?),
            "c1" => self.c1 = Some(value(key, v)?),
            "c2" => self.c2 = Some(value(key, v)?),
            "grid" => self.grid = Some(parse_grid(v)?),
            "dt" => self.dt = Some(value(key, v)?),
            "tol" => self.tol = Some(value(key, v)?),
            "t-max" => self.t_max = Some(value(key, v)?),
            "method" => self.method = Some(v.parse()?),
            "out" => self.out = Some(v.to_string()),
            "format" => self.format = Some(v.parse()?),
            "sweep" => self.sweep = Some(v.parse()?),
            "from" => self.from = Some(value(key, v)?),
            "to" => self.to = Some(value(key, v)?),
            "steps" => self.steps = Some(value(key, v)?),
            _ => return Err(Error::Parse(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Fields set in `other` replace those in `self`.
    pub fn overridden_by(self, other: RunConfig) -> RunConfig {
        RunConfig {
            k_ratio: other.k_ratio.or(self.k_ratio),
            g_ratio: other.g_ratio.or(self.g_ratio),
            kappa_l: other.kappa_l.or(self.kappa_l),
            n1: other.n1.or(self.n1),
            n2: other.n2.or(self.n2),
            r_over_c: other.r_over_c.or(self.r_over_c),
            nb: other.nb.or(self.nb),
            c1: other.c1.or(self.c1),
            c2: other.c2.or(self.c2),
            grid: other.grid.or(self.grid),
            dt: other.dt.or(self.dt),
            tol: other.tol.or(self.tol),
            t_max: other.t_max.or(self.t_max),
            method: other.method.or(self.method),
            out: other.out.or(self.out),
            format: other.format.or(self.format),
            sweep: other.sweep.or(self.sweep),
            from: other.from.or(self.from),
            to: other.to.or(self.to),
            steps: other.steps.or(self.steps),
        }
    }

    pub fn geometry(&self) -> Result<CavityGeometry> {
        CavityGeometry::new(
            self.k_ratio.unwrap_or(DEFAULT_K_RATIO),
            self.kappa_l.unwrap_or(DEFAULT_KAPPA_L),
            self.g_ratio.unwrap_or(DEFAULT_GAMMA),
        )
    }

    pub fn scatter_input(&self) -> Result<ScatterInput> {
        let g = self.geometry()?;
        Ok(g.at(self.n1.unwrap_or(0), self.n2.unwrap_or(0)))
    }

    pub fn mazer_config(&self) -> Result<MazerConfig> {
        let nb = self.nb.unwrap_or(0.0);
        let cfg = MazerConfig {
            geometry: self.geometry()?,
            r_over_c: self.r_over_c.unwrap_or(DEFAULT_R_OVER_C),
            nb1: nb,
            nb2: nb,
            c1_over_c: self.c1.unwrap_or(1.0),
            c2_over_c: self.c2.unwrap_or(1.0),
            grid: self.grid.unwrap_or(Grid {
                n1: DEFAULT_GRID,
                n2: DEFAULT_GRID,
            }),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn rk4_options(&self) -> Rk4Options {
        let d = Rk4Options::default();
        Rk4Options {
            dt: self.dt.or(d.dt),
            t_max: self.t_max.unwrap_or(d.t_max),
            tol: self.tol.unwrap_or(d.tol),
        }
    }

    /// Sweep over κL (default) or k/κ. Without an explicit range κL runs
    /// over [0, 2000π].
    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        let param = self.sweep.unwrap_or(SweepParam::KappaL);
        let (start, end) = match (self.from, self.to) {
            (Some(a), Some(b)) => (a, b),
            (None, None) => match param {
                SweepParam::KappaL => (0.0, 2000.0 * PI),
                SweepParam::KRatio => (0.01, 10.0),
            },
            _ => return Err(Error::InvalidInput("sweep needs both 'from' and 'to'".into())),
        };
        SweepSpec::new(param, start, end, self.steps.unwrap_or(DEFAULT_SWEEP_STEPS), self.scatter_input()?)
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", lineno + 1)))?;
        cfg.set(k, v)
            .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_file_with_comments() {
        let cfg = parse_config(
            "# fig 4(b)\n\
             k-ratio = 0.01\n\
             g_ratio=1\n\
             \n\
             grid = 64x32\n\
             method = direct\n\
             format = json\n\
             sweep = k-ratio\n",
        )
        .unwrap();
        assert_eq!(cfg.k_ratio, Some(0.01));
        assert_eq!(cfg.g_ratio, Some(1.0));
        assert_eq!(cfg.grid, Some(Grid { n1: 64, n2: 32 }));
        assert_eq!(cfg.method, Some(Method::Direct));
        assert_eq!(cfg.format, Some(Format::Json));
        assert_eq!(cfg.sweep, Some(SweepParam::KRatio));
    }

    #[test]
    fn flags_override_file() {
        let file = parse_config("nb = 1\nr-over-c = 20\n").unwrap();
        let mut flags = RunConfig::default();
        flags.set("nb", "0.5").unwrap();
        let merged = file.overridden_by(flags);
        assert_eq!(merged.nb, Some(0.5));
        assert_eq!(merged.r_over_c, Some(20.0));
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(parse_config("k-ratio 0.01").is_err());
        assert!(parse_config("colour = blue").is_err());
        assert!(parse_config("n1 = -3").is_err());
        assert!(parse_config("grid = 1x100").is_err());
        assert!(parse_config("method = euler").is_err());
    }

    #[test]
    fn grid_syntax() {
        assert_eq!(parse_grid("128x128").unwrap(), Grid { n1: 128, n2: 128 });
        assert_eq!(parse_grid(" 4 X 9 ").unwrap(), Grid { n1: 4, n2: 9 });
        assert!(parse_grid("128").is_err());
        assert!(parse_grid("x5").is_err());
        assert!(parse_grid("99999999999x99999999999").is_err());
    }

    #[test]
    fn defaults_reproduce_fig4a() {
        let cfg = RunConfig::default().mazer_config().unwrap();
        assert_eq!(cfg.geometry.gamma, 2.0);
        assert_eq!(cfg.r_over_c, 50.0);
        assert_eq!(cfg.grid, Grid { n1: 128, n2: 128 });
    }
}
