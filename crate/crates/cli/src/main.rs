use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use mazer_core::config::{parse_config, RunConfig};
use mazer_core::jc::{jc_gain, transit_time, JcInput};
use mazer_core::master::{direct_steady_state, rk4_steady_state, Grid, JointDistribution, Method, TAIL_MASS_LIMIT};
use mazer_core::scattering::gain_probabilities;
use mazer_core::statistics::{l1_distance, marginals};
use mazer_core::sweep::{emission_sweep, steady_sweep, Preset, PresetRun, SteadyRequest, SweepParam};
use mazer_core::table::{fmt_f64, serialize, Convergence, Format, Table};
use mazer_core::units::{physical_scale, PhysicalScale, ATOMIC_MASS_UNIT};

/// Mode-1 tolerance of the two-level oracle comparison (1-norm).
const ORACLE_MODE1_TOL: f64 = 1e-6;
/// Mode-2 tolerance against the thermal distribution (1-norm).
const ORACLE_MODE2_TOL: f64 = 1e-10;

#[derive(Parser)]
#[command(name = "mazer", version, about = "Two-mode cascade mazer simulator")]
struct Cli {
    /// key = value file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emission probabilities swept over κL or k/κ.
    Emission(Params),
    /// Steady-state photon distributions of both modes.
    Steady(Params),
    /// Quantized vs Jaynes–Cummings emission at one point.
    Jc(Params),
    /// γ = 0 steady state checked against detailed balance.
    OracleTwolevel(Params),
    /// Cavity length and atom temperature in laboratory units.
    Units(UnitParams),
    /// Run a named parameter preset (fig3a, fig3b, fig4a, fig4b, fig5, fig6, fig7, fig7-inset).
    Preset(PresetParams),
}

#[derive(Args, Clone, Default)]
struct Output {
    /// Output file (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<Format>,
}

#[derive(Args, Clone, Default)]
struct Solver {
    /// Fock grid, e.g. 128x128.
    #[arg(long, value_parser = mazer_core::config::parse_grid)]
    grid: Option<Grid>,
    /// RK4 step (default min(2e-3, 1/max outflow)).
    #[arg(long)]
    dt: Option<f64>,
    /// RK4 residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// RK4 time limit in units of 1/C.
    #[arg(long)]
    t_max: Option<f64>,
    /// rk4 or direct.
    #[arg(long)]
    method: Option<Method>,
}

#[derive(Args, Clone, Default)]
struct Params {
    /// Atom momentum k/κ.
    #[arg(long)]
    k_ratio: Option<f64>,
    /// Coupling ratio γ = g₂/g₁.
    #[arg(long)]
    g_ratio: Option<f64>,
    /// Cavity length κL.
    #[arg(long)]
    kappa_l: Option<f64>,
    #[arg(long)]
    n1: Option<u32>,
    #[arg(long)]
    n2: Option<u32>,
    /// Pump rate over cavity loss rate.
    #[arg(long)]
    r_over_c: Option<f64>,
    /// Thermal photon number of both modes.
    #[arg(long)]
    nb: Option<f64>,
    /// Loss rate of mode 1 relative to C.
    #[arg(long)]
    c1: Option<f64>,
    /// Loss rate of mode 2 relative to C.
    #[arg(long)]
    c2: Option<f64>,
    /// Swept parameter: kappa-l or k-ratio.
    #[arg(long)]
    sweep: Option<SweepParam>,
    #[arg(long, allow_negative_numbers = true)]
    from: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    to: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[command(flatten)]
    solver: Solver,
    #[command(flatten)]
    output: Output,
}

impl Params {
    fn run_config(&self) -> RunConfig {
        RunConfig {
            k_ratio: self.k_ratio,
            g_ratio: self.g_ratio,
            kappa_l: self.kappa_l,
            n1: self.n1,
            n2: self.n2,
            r_over_c: self.r_over_c,
            nb: self.nb,
            c1: self.c1,
            c2: self.c2,
            sweep: self.sweep,
            from: self.from,
            to: self.to,
            steps: self.steps,
            ..solver_config(&self.solver, &self.output)
        }
    }
}

fn solver_config(s: &Solver, o: &Output) -> RunConfig {
    RunConfig {
        grid: s.grid,
        dt: s.dt,
        tol: s.tol,
        t_max: s.t_max,
        method: s.method,
        out: o.out.as_ref().map(|p| p.display().to_string()),
        format: o.format,
        ..Default::default()
    }
}

#[derive(Args)]
struct UnitParams {
    #[arg(long)]
    k_ratio: Option<f64>,
    #[arg(long)]
    kappa_l: Option<f64>,
    /// Vacuum coupling g₁ in rad/s (default 2π × 10 MHz).
    #[arg(long)]
    g1: Option<f64>,
    /// Atom mass in atomic mass units (default ⁸⁵Rb).
    #[arg(long)]
    mass_u: Option<f64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct PresetParams {
    name: Preset,
    /// Points of an emission preset.
    #[arg(long)]
    steps: Option<usize>,
    #[command(flatten)]
    solver: Solver,
    #[command(flatten)]
    output: Output,
}

fn load(cli_config: &Option<PathBuf>, flags: RunConfig) -> Result<RunConfig> {
    let file = match cli_config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_config(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => RunConfig::default(),
    };
    Ok(file.overridden_by(flags))
}

fn emit(table: &Table, rc: &RunConfig) -> Result<()> {
    let format = rc.format.unwrap_or(Format::Csv);
    let text = serialize(table, format)?;
    match &rc.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {path}"))?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn steady_request(rc: &RunConfig) -> Result<SteadyRequest> {
    let mut req = SteadyRequest::new(rc.mazer_config()?);
    req.method = rc.method.unwrap_or(Method::Rk4);
    req.rk4 = rc.rk4_options();
    Ok(req)
}

fn apply_solver(req: &mut SteadyRequest, rc: &RunConfig) -> Result<()> {
    if let Some(grid) = rc.grid {
        req.cfg.grid = grid;
    }
    if let Some(m) = rc.method {
        req.method = m;
    }
    req.rk4 = rc.rk4_options();
    req.cfg.validate()?;
    Ok(())
}

/// Writes the table, then fails if the steady state was not acceptable.
fn run_steady(req: &SteadyRequest, rc: &RunConfig) -> Result<()> {
    let report = steady_sweep(req)?;
    emit(&report.table, rc)?;
    let c = Convergence::from(&report.state);
    eprintln!(
        "method={:?} iterations={} residual={:e} tail_leak={:e} tail_mass={:e}",
        c.method, c.iterations, c.residual, c.tail_leak, c.tail_mass
    );
    if !c.accepted {
        bail!(
            "steady state rejected: mass {:e} within two cells of the grid edge exceeds {:e}; enlarge --grid",
            c.tail_mass,
            TAIL_MASS_LIMIT
        );
    }
    Ok(())
}

fn jc_point(rc: &RunConfig) -> Result<Table> {
    let inp = rc.scatter_input()?;
    let g1_tau = transit_time(inp.kappa_l, inp.k_ratio);
    let q = gain_probabilities(&inp)?;
    let jc = jc_gain(&JcInput::new(inp.gamma, inp.n1, inp.n2, g1_tau)?)?;
    let mut t = Table::new(&["g1_tau", "p_one", "p_two", "jc_p_one", "jc_p_two"]);
    t.set_config("k_ratio", fmt_f64(inp.k_ratio));
    t.set_config("kappa_l", fmt_f64(inp.kappa_l));
    t.set_config("gamma", fmt_f64(inp.gamma));
    t.set_config("n1", inp.n1);
    t.set_config("n2", inp.n2);
    t.rows.push(vec![g1_tau, q.p_one, q.p_two, jc.p_one, jc.p_two]);
    Ok(t)
}

fn oracle_twolevel(rc: &RunConfig) -> Result<()> {
    let mut cfg = rc.mazer_config()?;
    cfg.geometry.gamma = 0.0;
    let (o1, o2) = mazer_core::master::twolevel_detailed_balance(&cfg)?;
    let state = match rc.method.unwrap_or(Method::Rk4) {
        Method::Rk4 => rk4_steady_state(&cfg, &JointDistribution::vacuum(cfg.grid), &rc.rk4_options())?,
        Method::Direct => direct_steady_state(&cfg)?,
    };
    let (p1, p2) = marginals(&state.dist);
    let d1 = l1_distance(&p1, &o1);
    let d2 = l1_distance(&p2, &o2);

    let mut t = Table::new(&["n", "p1", "p1_oracle", "p2", "p2_thermal"]);
    for n in 0..p1.len().max(p2.len()) {
        let at = |v: &[f64]| v.get(n).copied().unwrap_or(0.0);
        t.rows.push(vec![n as f64, at(&p1), at(&o1), at(&p2), at(&o2)]);
    }
    t.set_config("k_ratio", fmt_f64(cfg.geometry.k_ratio));
    t.set_config("kappa_l", fmt_f64(cfg.geometry.kappa_l));
    t.set_config("gamma", "0");
    t.set_config("r_over_c", fmt_f64(cfg.r_over_c));
    t.set_config("nb1", fmt_f64(cfg.nb1));
    t.set_config("nb2", fmt_f64(cfg.nb2));
    t.set_config("c1", fmt_f64(cfg.c1_over_c));
    t.set_config("c2", fmt_f64(cfg.c2_over_c));
    t.set_config("grid", cfg.grid);
    t.summary.insert("l1_mode1".into(), d1);
    t.summary.insert("l1_mode2".into(), d2);
    t.convergence = Some(Convergence::from(&state));
    emit(&t, rc)?;
    eprintln!("mode 1 vs detailed balance: {d1:e}; mode 2 vs thermal: {d2:e}");
    if !state.accepted() {
        bail!("steady state rejected: tail mass {:e}", state.tail_mass);
    }
    if d1 > ORACLE_MODE1_TOL || d2 > ORACLE_MODE2_TOL {
        bail!("oracle mismatch: mode 1 {d1:e} (limit {ORACLE_MODE1_TOL:e}), mode 2 {d2:e} (limit {ORACLE_MODE2_TOL:e})");
    }
    Ok(())
}

fn units(p: &UnitParams, rc: &RunConfig) -> Result<()> {
    let rb = PhysicalScale::rubidium85();
    let ps = PhysicalScale::new(
        p.g1.unwrap_or(rb.g1_rad_per_s),
        p.mass_u.map_or(rb.atom_mass_kg, |m| m * ATOMIC_MASS_UNIT),
    )?;
    let kappa_l = rc.kappa_l.unwrap_or(mazer_core::config::DEFAULT_KAPPA_L);
    let k_ratio = rc.k_ratio.unwrap_or(mazer_core::config::DEFAULT_K_RATIO);
    let v = physical_scale(&ps, kappa_l, k_ratio)?;
    let mut t = Table::new(&["kappa_per_m", "cavity_length_m", "temperature_k"]);
    t.set_config("g1_rad_per_s", fmt_f64(ps.g1_rad_per_s));
    t.set_config("atom_mass_kg", fmt_f64(ps.atom_mass_kg));
    t.set_config("kappa_l", fmt_f64(kappa_l));
    t.set_config("k_ratio", fmt_f64(k_ratio));
    t.rows.push(vec![v.kappa_per_m, v.cavity_length_m, v.temperature_k]);
    emit(&t, rc)
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Emission(p) => {
            let rc = load(&cli.config, p.run_config())?;
            emit(&emission_sweep(&rc.sweep_spec()?)?, &rc)
        }
        Command::Steady(p) => {
            let rc = load(&cli.config, p.run_config())?;
            run_steady(&steady_request(&rc)?, &rc)
        }
        Command::Jc(p) => {
            let rc = load(&cli.config, p.run_config())?;
            emit(&jc_point(&rc)?, &rc)
        }
        Command::OracleTwolevel(p) => oracle_twolevel(&load(&cli.config, p.run_config())?),
        Command::Units(p) => {
            let flags = RunConfig {
                kappa_l: p.kappa_l,
                k_ratio: p.k_ratio,
                ..solver_config(&Solver::default(), &p.output)
            };
            units(p, &load(&cli.config, flags)?)
        }
        Command::Preset(p) => {
            // Only solver and output settings apply; physics is fixed by the preset.
            let rc = RunConfig {
                steps: p.steps,
                ..solver_config(&p.solver, &p.output)
            };
            match p.name.run() {
                PresetRun::Emission(mut spec) => {
                    if let Some(n) = rc.steps {
                        spec.steps = n;
                    }
                    spec.validate()?;
                    emit(&emission_sweep(&spec)?, &rc)
                }
                PresetRun::Steady(mut req) => {
                    apply_solver(&mut req, &rc)?;
                    run_steady(&req, &rc)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
