//! Rate equation for the joint photon distribution P(n₁, n₂) of the two
//! cavity modes, and its steady state.
//!
//! Time is measured in units of 1/C, where C is a reference damping rate;
//! every rate below is divided by C. Per cell the generator has
//!
//! * one-photon gain  (n₁, n₂) → (n₁+1, n₂)    at G_{b₁}(n₁, n₂)
//! * two-photon gain  (n₁, n₂) → (n₁+1, n₂+1)  at G_{b₂}(n₁, n₂)
//! * damping          nᵅ → nᵅ−1               at Cᵅ(n_bᵅ+1)nᵅ
//! * thermal pumping  nᵅ → nᵅ+1               at Cᵅ n_bᵅ(nᵅ+1)
//!
//! Flows that would leave the truncated grid are removed from the grid and
//! counted as leak.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scattering::{gain_unchecked, ultracold_approx, CavityGeometry};

/// Largest grid accepted by the direct solver.
pub const DIRECT_MAX_CELLS: usize = 1 << 16;

/// Steady states whose outermost two shells carry more mass than this are
/// flagged as under-resolved.
pub const TAIL_MASS_LIMIT: f64 = 1e-6;

/// Cumulative probability allowed to leave the grid during integration.
pub const TAIL_LEAK_LIMIT: f64 = 1e-6;

/// Integration aborts below this probability.
pub const NEGATIVITY_LIMIT: f64 = -1e-9;

/// dt times the largest total outflow rate must not exceed this.
pub const STABILITY_LIMIT: f64 = 2.5;

/// Truncated Fock grid 0 ≤ n₁ < `n1`, 0 ≤ n₂ < `n2`, stored row-major in n₁.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub n1: usize,
    pub n2: usize,
}

impl Grid {
    pub fn new(n1: usize, n2: usize) -> Result<Self> {
        if n1 < 2 || n2 < 2 {
            return Err(Error::InvalidInput(format!(
                "grid must be at least 2x2, got {n1}x{n2}"
            )));
        }
        Ok(Self { n1, n2 })
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, n1: usize, n2: usize) -> usize {
        n1 * self.n2 + n2
    }

    fn check(&self, other: Grid) -> Result<()> {
        if *self != other {
            return Err(Error::GridMismatch {
                expected: (self.n1, self.n2),
                got: (other.n1, other.n2),
            });
        }
        Ok(())
    }
}

impl std::fmt::Display for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.n1, self.n2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MazerConfig {
    pub geometry: CavityGeometry,
    /// Pump rate r/C.
    pub r_over_c: f64,
    pub nb1: f64,
    pub nb2: f64,
    pub c1_over_c: f64,
    pub c2_over_c: f64,
    pub grid: Grid,
}

impl MazerConfig {
    /// Equal damping C₁ = C₂ = C and equal thermal occupation in both modes.
    pub fn symmetric(geometry: CavityGeometry, r_over_c: f64, nb: f64, grid: Grid) -> Self {
        Self {
            geometry,
            r_over_c,
            nb1: nb,
            nb2: nb,
            c1_over_c: 1.0,
            c2_over_c: 1.0,
            grid,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        Grid::new(self.grid.n1, self.grid.n2)?;
        let positive = [("r/C", self.r_over_c), ("C1/C", self.c1_over_c), ("C2/C", self.c2_over_c)];
        for (name, x) in positive {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be finite and > 0, got {x}")));
            }
        }
        for (name, x) in [("nb1", self.nb1), ("nb2", self.nb2)] {
            if !(x.is_finite() && x >= 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be finite and >= 0, got {x}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    pub grid: Grid,
    pub p: Vec<f64>,
    /// Probability that has left the grid (cumulative for integrated runs).
    pub tail_leak: f64,
}

impl JointDistribution {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            p: vec![0.0; grid.len()],
            tail_leak: 0.0,
        }
    }

    pub fn delta(grid: Grid, n1: usize, n2: usize) -> Result<Self> {
        if n1 >= grid.n1 || n2 >= grid.n2 {
            return Err(Error::InvalidInput(format!("({n1}, {n2}) lies outside the {grid} grid")));
        }
        let mut d = Self::zeros(grid);
        d.p[grid.index(n1, n2)] = 1.0;
        Ok(d)
    }

    pub fn vacuum(grid: Grid) -> Self {
        Self::delta(grid, 0, 0).expect("grid is nonempty")
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut d = Self::zeros(grid);
        for n1 in 0..grid.n1 {
            for n2 in 0..grid.n2 {
                d.p[grid.index(n1, n2)] = f(n1, n2);
            }
        }
        d
    }

    pub fn get(&self, n1: usize, n2: usize) -> f64 {
        self.p[self.grid.index(n1, n2)]
    }

    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }

    pub fn normalize(&mut self) {
        let s = self.total();
        if s > 0.0 {
            self.p.iter_mut().for_each(|x| *x /= s);
        }
    }

    /// Mass in the cells with n₁ ≥ N₁−2 or n₂ ≥ N₂−2.
    pub fn tail_mass(&self) -> f64 {
        let g = self.grid;
        let mut s = 0.0;
        for n1 in 0..g.n1 {
            for n2 in 0..g.n2 {
                if n1 + 2 >= g.n1 || n2 + 2 >= g.n2 {
                    s += self.get(n1, n2);
                }
            }
        }
        s
    }

    pub fn l1_distance(&self, other: &JointDistribution) -> Result<f64> {
        self.grid.check(other.grid)?;
        Ok(self.p.iter().zip(&other.p).map(|(a, b)| (a - b).abs()).sum())
    }
}

/// Gain coefficients G_{b₁} = (r/C)P(a→b₁), G_{b₂} = (r/C)P(a→b₂).
#[derive(Clone, Debug, PartialEq)]
pub struct GainTable {
    pub grid: Grid,
    pub g_b1: Vec<f64>,
    pub g_b2: Vec<f64>,
}

impl GainTable {
    pub fn from_fn(grid: Grid, f: impl Fn(usize, usize) -> (f64, f64) + Sync) -> Self {
        let cells: Vec<(f64, f64)> = (0..grid.len())
            .into_par_iter()
            .map(|i| f(i / grid.n2, i % grid.n2))
            .collect();
        let (g_b1, g_b2) = cells.into_iter().unzip();
        Self { grid, g_b1, g_b2 }
    }

    pub fn get(&self, n1: usize, n2: usize) -> (f64, f64) {
        let i = self.grid.index(n1, n2);
        (self.g_b1[i], self.g_b2[i])
    }

    /// Gains from the ultracold closed form (no one-photon channel).
    pub fn ultracold(cfg: &MazerConfig) -> Result<Self> {
        cfg.validate()?;
        let (r, gamma) = (cfg.r_over_c, cfg.geometry.gamma);
        Ok(Self::from_fn(cfg.grid, |n1, n2| {
            let g = ultracold_approx(gamma, n1 as u32, n2 as u32).expect("gamma validated");
            (0.0, r * g.p_two)
        }))
    }
}

pub fn build_gain_table(cfg: &MazerConfig) -> Result<GainTable> {
    cfg.validate()?;
    let geo = cfg.geometry;
    let r = cfg.r_over_c;
    Ok(GainTable::from_fn(cfg.grid, |n1, n2| {
        let g = gain_unchecked(&geo.at(n1 as u32, n2 as u32));
        (r * g.p_one, r * g.p_two)
    }))
}

/// Per-cell transition rates of the truncated rate equation.
#[derive(Clone, Debug)]
pub struct Generator {
    grid: Grid,
    /// Total outflow, including flows that leave the grid.
    out: Vec<f64>,
    /// n₁ → n₁+1 (one-photon gain plus thermal), zero on the last n₁ row.
    up1: Vec<f64>,
    /// (n₁, n₂) → (n₁+1, n₂+1), zero where the target is off-grid.
    up12: Vec<f64>,
    down1: Vec<f64>,
    up2: Vec<f64>,
    down2: Vec<f64>,
    /// Outflow with no in-grid destination.
    leak: Vec<f64>,
}

impl Generator {
    pub fn new(cfg: &MazerConfig, gains: &GainTable) -> Result<Self> {
        cfg.validate()?;
        let g = cfg.grid;
        g.check(gains.grid)?;
        let n = g.len();
        let mut gen = Self {
            grid: g,
            out: vec![0.0; n],
            up1: vec![0.0; n],
            up12: vec![0.0; n],
            down1: vec![0.0; n],
            up2: vec![0.0; n],
            down2: vec![0.0; n],
            leak: vec![0.0; n],
        };
        let (c1, c2) = (cfg.c1_over_c, cfg.c2_over_c);
        for n1 in 0..g.n1 {
            for n2 in 0..g.n2 {
                let i = g.index(n1, n2);
                let (gb1, gb2) = (gains.g_b1[i], gains.g_b2[i]);
                let (m1, m2) = (n1 as f64, n2 as f64);
                let thermal1 = c1 * cfg.nb1 * (m1 + 1.0);
                let thermal2 = c2 * cfg.nb2 * (m2 + 1.0);
                let top1 = n1 + 1 == g.n1;
                let top2 = n2 + 1 == g.n2;

                let up1 = gb1 + thermal1;
                if top1 {
                    gen.leak[i] += up1;
                } else {
                    gen.up1[i] = up1;
                }
                if top1 || top2 {
                    gen.leak[i] += gb2;
                } else {
                    gen.up12[i] = gb2;
                }
                if top2 {
                    gen.leak[i] += thermal2;
                } else {
                    gen.up2[i] = thermal2;
                }
                gen.down1[i] = c1 * (cfg.nb1 + 1.0) * m1;
                gen.down2[i] = c2 * (cfg.nb2 + 1.0) * m2;
                gen.out[i] = up1 + gb2 + thermal2 + gen.down1[i] + gen.down2[i];
            }
        }
        Ok(gen)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Largest total outflow rate over the grid.
    pub fn max_outflow(&self) -> f64 {
        self.out.iter().copied().fold(0.0, f64::max)
    }

    /// Writes dP/dt into `dp` and returns the rate at which probability
    /// leaves the grid.
    pub fn apply_into(&self, p: &[f64], dp: &mut [f64]) -> f64 {
        let n2 = self.grid.n2;
        let rows = self.grid.n1;
        dp.par_chunks_mut(n2).enumerate().for_each(|(r, row)| {
            let base = r * n2;
            for (c, d) in row.iter_mut().enumerate() {
                let i = base + c;
                let mut v = -self.out[i] * p[i];
                if r > 0 {
                    let j = i - n2;
                    v += self.up1[j] * p[j];
                    if c > 0 {
                        v += self.up12[j - 1] * p[j - 1];
                    }
                }
                if r + 1 < rows {
                    let j = i + n2;
                    v += self.down1[j] * p[j];
                }
                if c > 0 {
                    v += self.up2[i - 1] * p[i - 1];
                }
                if c + 1 < n2 {
                    v += self.down2[i + 1] * p[i + 1];
                }
                *d = v;
            }
        });
        self.leak.iter().zip(p).map(|(l, x)| l * x).sum()
    }

    /// In-grid transitions out of `state` as (target, rate) pairs.
    fn transitions(&self, n1: usize, n2: usize) -> [(usize, usize, f64); 5] {
        let i = self.grid.index(n1, n2);
        [
            (n1 + 1, n2, self.up1[i]),
            (n1 + 1, n2 + 1, self.up12[i]),
            (n1.wrapping_sub(1), n2, self.down1[i]),
            (n1, n2 + 1, self.up2[i]),
            (n1, n2.wrapping_sub(1), self.down2[i]),
        ]
    }
}

/// dP/dt in units of C together with the instantaneous leak rate.
#[derive(Clone, Debug, PartialEq)]
pub struct Derivative {
    pub grid: Grid,
    pub dp: Vec<f64>,
    pub leak_rate: f64,
}

pub fn apply_generator(cfg: &MazerConfig, gains: &GainTable, p: &JointDistribution) -> Result<Derivative> {
    cfg.grid.check(p.grid)?;
    let gen = Generator::new(cfg, gains)?;
    let mut dp = vec![0.0; p.grid.len()];
    let leak_rate = gen.apply_into(&p.p, &mut dp);
    Ok(Derivative {
        grid: p.grid,
        dp,
        leak_rate,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rk4Options {
    /// Time step; `None` picks min(2e-3, 1/Λ) with Λ the largest outflow.
    pub dt: Option<f64>,
    pub t_max: f64,
    pub tol: f64,
}

impl Default for Rk4Options {
    fn default() -> Self {
        Self {
            dt: None,
            t_max: 500.0,
            tol: 1e-12,
        }
    }
}

/// Default RK4 step for a generator whose largest outflow rate is `max_outflow`.
///
/// The guard dt·Λ ≤ 2.5 keeps the scheme stable, but transient undershoot in
/// the far tail exceeds the negativity limit above dt·Λ ≈ 1.5 (thermal runs
/// on a 128×128 grid), so the automatic step stays at dt·Λ ≤ 1.
pub fn default_dt(max_outflow: f64) -> f64 {
    if max_outflow > 0.0 {
        DEFAULT_DT.min(1.0 / max_outflow)
    } else {
        DEFAULT_DT
    }
}

pub const DEFAULT_DT: f64 = 2e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rk4,
    Direct,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SteadyState {
    /// Normalized distribution; `dist.tail_leak` is the probability lost
    /// off the grid.
    pub dist: JointDistribution,
    pub method: Method,
    /// RK4 steps taken (0 for the direct solver).
    pub iterations: usize,
    pub time: f64,
    /// Step used by RK4 (0 for the direct solver).
    pub dt: f64,
    /// ‖dP/dt + λP‖₁ with λ the leak rate per unit mass.
    pub residual: f64,
    pub tail_mass: f64,
}

impl SteadyState {
    pub fn accepted(&self) -> bool {
        self.tail_mass < TAIL_MASS_LIMIT
    }
}

/// ‖dp + λp‖₁ where λ rescales the leak so that the sum vanishes; this is
/// zero for the quasi-stationary shape of a slowly leaking grid.
fn residual(p: &[f64], dp: &[f64], leak_rate: f64) -> f64 {
    let mass: f64 = p.iter().sum();
    let lambda = if mass > 0.0 { leak_rate / mass } else { 0.0 };
    p.iter().zip(dp).map(|(x, d)| (d + lambda * x).abs()).sum()
}

pub fn rk4_steady_state(cfg: &MazerConfig, p0: &JointDistribution, opts: &Rk4Options) -> Result<SteadyState> {
    let gains = build_gain_table(cfg)?;
    rk4_steady_state_with_gains(cfg, &gains, p0, opts)
}

/// Classic fourth-order Runge–Kutta in time until the derivative vanishes.
pub fn rk4_steady_state_with_gains(
    cfg: &MazerConfig,
    gains: &GainTable,
    p0: &JointDistribution,
    opts: &Rk4Options,
) -> Result<SteadyState> {
    cfg.grid.check(p0.grid)?;
    let gen = Generator::new(cfg, gains)?;
    let dt = opts.dt.unwrap_or_else(|| default_dt(gen.max_outflow()));
    if !(dt.is_finite() && dt > 0.0 && opts.t_max > 0.0 && opts.tol > 0.0) {
        return Err(Error::InvalidInput(format!("bad integration options {opts:?}")));
    }
    let guard = dt * gen.max_outflow();
    if guard > STABILITY_LIMIT {
        return Err(Error::StabilityGuard(guard));
    }

    let grid = cfg.grid;
    let n = grid.len();
    let mut p = p0.p.clone();
    let mut leaked = p0.tail_leak;
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut stage = vec![0.0; n];
    let max_steps = (opts.t_max / dt).ceil() as usize;

    let mut step = 0;
    loop {
        let l1 = gen.apply_into(&p, &mut k1);
        let res = residual(&p, &k1, l1);
        let (min_i, min_p) = p
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &x)| if x < acc.1 { (i, x) } else { acc });
        if min_p < NEGATIVITY_LIMIT {
            return Err(Error::NegativeProbability {
                n1: min_i / grid.n2,
                n2: min_i % grid.n2,
                value: min_p,
            });
        }
        if leaked > TAIL_LEAK_LIMIT {
            return Err(Error::TailLeak(leaked));
        }
        if res < opts.tol {
            let mut dist = JointDistribution {
                grid,
                p,
                tail_leak: leaked,
            };
            dist.normalize();
            let tail_mass = dist.tail_mass();
            return Ok(SteadyState {
                dist,
                method: Method::Rk4,
                iterations: step,
                time: step as f64 * dt,
                dt,
                residual: res,
                tail_mass,
            });
        }
        if step >= max_steps {
            return Err(Error::NotConverged {
                t: step as f64 * dt,
                residual: res,
                tol: opts.tol,
            });
        }

        axpy_into(&mut stage, &p, 0.5 * dt, &k1);
        let l2 = gen.apply_into(&stage, &mut k2);
        axpy_into(&mut stage, &p, 0.5 * dt, &k2);
        let l3 = gen.apply_into(&stage, &mut k3);
        axpy_into(&mut stage, &p, dt, &k3);
        let l4 = gen.apply_into(&stage, &mut k4);
        let w = dt / 6.0;
        p.par_iter_mut()
            .zip(k1.par_iter().zip(k2.par_iter()).zip(k3.par_iter().zip(k4.par_iter())))
            .for_each(|(x, ((a, b), (c, d)))| *x += w * (a + 2.0 * b + 2.0 * c + d));
        leaked += w * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
        step += 1;
    }
}

fn axpy_into(out: &mut [f64], x: &[f64], a: f64, y: &[f64]) {
    out.par_iter_mut()
        .zip(x.par_iter().zip(y.par_iter()))
        .for_each(|(o, (x, y))| *o = x + a * y);
}

pub fn direct_steady_state(cfg: &MazerConfig) -> Result<SteadyState> {
    let gains = build_gain_table(cfg)?;
    direct_steady_state_with_gains(cfg, &gains)
}

/// Stationary distribution of the in-grid chain by banded state reduction
/// (Grassmann–Taksar–Heyman elimination).
///
/// Cells are numbered along the longer grid axis so the bandwidth is the
/// shorter side plus one. The elimination only adds nonnegative terms, so no
/// cancellation occurs. Flows leaving the grid are not part of the reduced
/// chain; the reported residual is taken against the full leaky generator.
pub fn direct_steady_state_with_gains(cfg: &MazerConfig, gains: &GainTable) -> Result<SteadyState> {
    let gen = Generator::new(cfg, gains)?;
    let grid = cfg.grid;
    let n = grid.len();
    if n > DIRECT_MAX_CELLS {
        return Err(Error::InvalidInput(format!(
            "direct solve limited to {DIRECT_MAX_CELLS} cells, grid {grid} has {n}"
        )));
    }

    // Linear order with the short axis fastest.
    let transpose = grid.n2 > grid.n1;
    let short = grid.n1.min(grid.n2);
    let order = |n1: usize, n2: usize| if transpose { n2 * short + n1 } else { n1 * short + n2 };
    let band = short + 1;
    let width = 2 * band + 1;
    let mut q = vec![0.0f64; n * width];
    let at = |i: usize, j: usize| i * width + (j + band - i);

    for n1 in 0..grid.n1 {
        for n2 in 0..grid.n2 {
            let i = order(n1, n2);
            for (t1, t2, rate) in gen.transitions(n1, n2) {
                if rate > 0.0 && t1 < grid.n1 && t2 < grid.n2 {
                    q[at(i, order(t1, t2))] += rate;
                }
            }
        }
    }

    for k in (1..n).rev() {
        let lo = k.saturating_sub(band);
        let s: f64 = (lo..k).map(|j| q[at(k, j)]).sum();
        if s <= 0.0 {
            return Err(Error::Singular(format!(
                "state {k} of the reduced chain has no path to lower states"
            )));
        }
        for i in lo..k {
            q[at(i, k)] /= s;
        }
        for i in lo..k {
            let a = q[at(i, k)];
            if a == 0.0 {
                continue;
            }
            for j in lo..k {
                if j != i {
                    let b = q[at(k, j)];
                    q[at(i, j)] += a * b;
                }
            }
        }
    }

    let mut pi = vec![0.0f64; n];
    pi[0] = 1.0;
    for j in 1..n {
        let lo = j.saturating_sub(band);
        pi[j] = (lo..j).map(|i| pi[i] * q[at(i, j)]).sum();
    }
    let total: f64 = pi.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::Singular(format!("normalization is {total}")));
    }

    let mut dist = JointDistribution::zeros(grid);
    for n1 in 0..grid.n1 {
        for n2 in 0..grid.n2 {
            dist.p[grid.index(n1, n2)] = pi[order(n1, n2)] / total;
        }
    }
    let mut dp = vec![0.0; n];
    let leak_rate = gen.apply_into(&dist.p, &mut dp);
    let res = residual(&dist.p, &dp, leak_rate);
    dist.tail_leak = 0.0;
    let tail_mass = dist.tail_mass();
    Ok(SteadyState {
        dist,
        method: Method::Direct,
        iterations: 0,
        time: 0.0,
        dt: 0.0,
        residual: res,
        tail_mass,
    })
}

/// Geometric (thermal) distribution with mean `nb` on 0..len, normalized on
/// the truncated range.
pub fn thermal_distribution(nb: f64, len: usize) -> Vec<f64> {
    let mut p = vec![0.0; len];
    if len == 0 {
        return p;
    }
    let ratio = nb / (nb + 1.0);
    p[0] = 1.0;
    for n in 1..len {
        p[n] = p[n - 1] * ratio;
    }
    normalize_vec(&mut p);
    p
}

/// One-step detailed balance for a single mode with gain `gain[n]` out of n:
/// P(n)/P(n−1) = [c·nb·n + G(n−1)] / [c·(nb+1)·n].
pub fn detailed_balance_distribution(gain: &[f64], c: f64, nb: f64) -> Vec<f64> {
    let len = gain.len();
    let mut p = vec![0.0; len];
    if len == 0 {
        return p;
    }
    p[0] = 1.0;
    for n in 1..len {
        let m = n as f64;
        p[n] = p[n - 1] * (c * nb * m + gain[n - 1]) / (c * (nb + 1.0) * m);
    }
    normalize_vec(&mut p);
    p
}

fn normalize_vec(p: &mut [f64]) {
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= s);
}

/// Analytic steady state for γ = 0: mode 1 follows the two-level detailed
/// balance recursion, mode 2 stays thermal.
pub fn twolevel_detailed_balance(cfg: &MazerConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    cfg.validate()?;
    if cfg.geometry.gamma != 0.0 {
        return Err(Error::InvalidInput(format!(
            "detailed balance holds only without the second coupling, got gamma = {}",
            cfg.geometry.gamma
        )));
    }
    let gain: Vec<f64> = (0..cfg.grid.n1)
        .map(|n| cfg.r_over_c * gain_unchecked(&cfg.geometry.at(n as u32, 0)).p_one)
        .collect();
    let p1 = detailed_balance_distribution(&gain, cfg.c1_over_c, cfg.nb1);
    let p2 = thermal_distribution(cfg.nb2, cfg.grid.n2);
    Ok((p1, p2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(gamma: f64, nb: f64, n: usize) -> MazerConfig {
        let geo = CavityGeometry::new(0.01, 20000.0 * std::f64::consts::PI, gamma).unwrap();
        MazerConfig::symmetric(geo, 50.0, nb, Grid::new(n, n).unwrap())
    }

    fn zero_gains(grid: Grid) -> GainTable {
        GainTable::from_fn(grid, |_, _| (0.0, 0.0))
    }

    #[test]
    fn grid_must_be_at_least_two_by_two() {
        assert!(Grid::new(1, 5).is_err());
        assert!(Grid::new(2, 2).is_ok());
    }

    #[test]
    fn vacuum_is_a_fixed_point_without_gain() {
        let c = cfg(2.0, 0.0, 6);
        let d = apply_generator(&c, &zero_gains(c.grid), &JointDistribution::vacuum(c.grid)).unwrap();
        assert!(d.dp.iter().all(|&x| x == 0.0));
        assert_eq!(d.leak_rate, 0.0);
    }

    #[test]
    fn single_photon_decays_to_vacuum() {
        let c = cfg(2.0, 0.0, 6);
        let p = JointDistribution::delta(c.grid, 1, 0).unwrap();
        let d = apply_generator(&c, &zero_gains(c.grid), &p).unwrap();
        let g = c.grid;
        assert_eq!(d.dp[g.index(1, 0)], -1.0);
        assert_eq!(d.dp[g.index(0, 0)], 1.0);
        assert_eq!(d.dp.iter().filter(|&&x| x != 0.0).count(), 2);
    }

    #[test]
    fn two_photon_gain_moves_diagonally() {
        let c = cfg(2.0, 0.0, 6);
        let g = c.grid;
        let gains = GainTable::from_fn(g, |n1, n2| if (n1, n2) == (0, 0) { (0.0, 50.0 * 0.32) } else { (0.0, 0.0) });
        let d = apply_generator(&c, &gains, &JointDistribution::vacuum(g)).unwrap();
        assert!((d.dp[g.index(0, 0)] + 16.0).abs() < 1e-12);
        assert!((d.dp[g.index(1, 1)] - 16.0).abs() < 1e-12);
        assert_eq!(d.dp.iter().filter(|&&x| x != 0.0).count(), 2);
    }

    #[test]
    fn boundary_gain_is_counted_as_leak() {
        let c = cfg(2.0, 0.0, 4);
        let g = c.grid;
        let gains = GainTable::from_fn(g, |_, _| (3.0, 5.0));
        let p = JointDistribution::delta(g, 3, 1).unwrap();
        let d = apply_generator(&c, &gains, &p).unwrap();
        // one- and two-photon gain both leave through n₁ = N₁.
        assert!((d.leak_rate - 8.0).abs() < 1e-12);
        let sum: f64 = d.dp.iter().sum();
        assert!((sum + d.leak_rate).abs() < 1e-12);
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let c = cfg(2.0, 0.0, 4);
        let other = Grid::new(5, 4).unwrap();
        assert!(matches!(
            apply_generator(&c, &zero_gains(c.grid), &JointDistribution::vacuum(other)),
            Err(Error::GridMismatch { .. })
        ));
        assert!(Generator::new(&c, &zero_gains(other)).is_err());
    }

    #[test]
    fn gain_tables_for_limiting_cases() {
        let mut c = cfg(0.0, 0.0, 8);
        let t = build_gain_table(&c).unwrap();
        assert!(t.g_b2.iter().all(|&x| x == 0.0));
        c.geometry.gamma = 2.0;
        c.geometry.kappa_l = 0.0;
        let t = build_gain_table(&c).unwrap();
        assert!(t.g_b1.iter().chain(&t.g_b2).all(|&x| x.abs() < 1e-28));
    }

    #[test]
    fn stability_guard_is_enforced() {
        let c = cfg(2.0, 0.0, 16);
        let opts = Rk4Options { dt: Some(1.0), ..Default::default() };
        assert!(matches!(
            rk4_steady_state(&c, &JointDistribution::vacuum(c.grid), &opts),
            Err(Error::StabilityGuard(_))
        ));
    }

    #[test]
    fn damped_empty_cavity_relaxes_to_vacuum() {
        let c = cfg(2.0, 0.0, 8);
        let p0 = JointDistribution::from_fn(c.grid, |a, b| if a + b < 5 { 1.0 } else { 0.0 });
        let mut p0 = p0;
        p0.normalize();
        let ss = rk4_steady_state_with_gains(&c, &zero_gains(c.grid), &p0, &Rk4Options::default()).unwrap();
        assert!((ss.dist.get(0, 0) - 1.0).abs() < 1e-10);
        let direct = direct_steady_state_with_gains(&c, &zero_gains(c.grid)).unwrap();
        assert!((direct.dist.get(0, 0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn thermal_only_steady_state_is_product_of_geometrics() {
        let c = cfg(2.0, 1.0, 48);
        let want1 = thermal_distribution(1.0, 48);
        let direct = direct_steady_state_with_gains(&c, &zero_gains(c.grid)).unwrap();
        let err: f64 = (0..48)
            .flat_map(|a| (0..48).map(move |b| (a, b)))
            .map(|(a, b)| (direct.dist.get(a, b) - want1[a] * want1[b]).abs())
            .sum();
        assert!(err < 1e-12, "err {err}");
    }

    #[test]
    fn detailed_balance_closed_forms() {
        let p = detailed_balance_distribution(&[0.0; 10], 1.0, 1.0);
        let t = thermal_distribution(1.0, 10);
        for (a, b) in p.iter().zip(&t) {
            assert!((a - b).abs() < 1e-15);
        }
        // Constant gain without thermal photons: P(n)/P(n−1) = G/n.
        let p = detailed_balance_distribution(&[7.0; 12], 1.0, 0.0);
        for n in 1..12 {
            assert!((p[n] / p[n - 1] - 7.0 / n as f64).abs() < 1e-13);
        }
        assert!(twolevel_detailed_balance(&cfg(2.0, 0.0, 8)).is_err());
    }
}
