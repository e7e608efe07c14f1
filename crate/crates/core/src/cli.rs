//! Command-line front end. [`dispatch`] runs one invocation and returns its exit code.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure,
//! 3 failed assertion.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cycles::{
    continue_family, count_distribution_with, default_sections, ContinuationConfig, ContinuationError, CycleFamily,
    LimitCycle, ParamFamily, ScanConfig,
};
use crate::integrate::{integrate, IntegratorConfig};
use crate::portrait::{render, Bounds, Detections, PortraitSpec};
use crate::rotation::{random_inputs, sampled_direction_check, RotationParamId};
use crate::scenarios::{
    run_monotone_family_check, run_sweep, run_theorem31, run_uniqueness_experiment, MonotoneConfig, SweepConfig,
    Theorem31Config, UniquenessConfig,
};
use crate::systems::{
    compile_21, compile_24, compile_26, equilibria, CanonicalParams, EquilibriumKind, GeneralQuadraticField, Params21,
    Params24, Params25, Params26, Point,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_ASSERTION: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemFamily {
    Canonical24,
    Canonical25,
    Canonical21,
    Canonical26,
    General,
}

/// Settings read from `--config`; flags given on the command line take precedence.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub system: Option<SystemFamily>,
    pub params: Option<Value>,
    pub integrator: Option<IntegratorConfig>,
    pub scan: Option<ScanConfig>,
    pub continuation: Option<ContinuationConfig>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    /// Config object of the scenario being run.
    pub scenario: Option<Value>,
    pub sweep: Option<SweepConfig>,
    pub portrait: Option<PortraitSpec>,
}

#[derive(Debug, Parser)]
#[command(name = "quadcycle", about = "Limit cycles of planar quadratic vector fields", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Parameter family of --params.
    #[arg(long, global = true, value_enum)]
    system: Option<SystemFamily>,
    /// Parameters as a JSON object.
    #[arg(long, global = true)]
    params: Option<String>,
    /// JSON config, either a file path or an inline object.
    #[arg(long, global = true)]
    config: Option<String>,
    /// Output file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate one orbit, CSV t,x,y.
    Simulate {
        #[arg(long, allow_hyphen_values = true)]
        start: String,
        #[arg(long)]
        tmax: Option<f64>,
        #[arg(long)]
        rtol: Option<f64>,
    },
    /// Finite equilibria with their classification, JSON.
    Equilibria,
    /// Compare the closed-form and numeric rotation determinants and check the rotation sense, CSV.
    RotationCheck {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1e-5)]
        dmu: f64,
        /// Only this parameter; all four by default.
        #[arg(long)]
        id: Option<RotationParamId>,
    },
    /// Cycles around every anti-saddle, JSON.
    Cycles,
    /// Continue one cycle in a rotation parameter, CSV mu,s_star,period,d_prime.
    Continue {
        #[arg(long)]
        param: RotationParamId,
        /// Final parameter value.
        #[arg(long, allow_hyphen_values = true)]
        to: f64,
        /// Anti-saddle whose cycle is continued; the first one found by default.
        #[arg(long, allow_hyphen_values = true)]
        focus: Option<String>,
        /// Seed with the outermost cycle instead of the innermost.
        #[arg(long)]
        outer: bool,
    },
    /// Staged experiments.
    Scenario {
        #[command(subcommand)]
        action: ScenarioAction,
    },
    /// Grid search for the two-to-one configuration, JSON.
    Sweep,
    /// Phase portrait, SVG.
    Portrait {
        /// x_min,x_max,y_min,y_max
        #[arg(long, allow_hyphen_values = true)]
        bounds: Option<String>,
        /// Seed grid nx,ny.
        #[arg(long)]
        seeds: Option<String>,
        /// Skip cycle detection.
        #[arg(long)]
        no_cycles: bool,
    },
}

#[derive(Debug, Subcommand)]
enum ScenarioAction {
    Run { name: ScenarioName },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScenarioName {
    Theorem31,
    Uniqueness,
    Monotone,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    msg: String,
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, msg: msg.into() }
}

fn numerical(e: impl std::fmt::Display) -> Failure {
    Failure { code: EXIT_NUMERICAL, msg: e.to_string() }
}

type Outcome = Result<i32, Failure>;

fn parse_list(s: &str, n: usize, what: &str) -> Result<Vec<f64>, Failure> {
    let v: Result<Vec<f64>, _> = s.split(',').map(|t| t.trim().parse::<f64>()).collect();
    match v {
        Ok(v) if v.len() == n && v.iter().all(|x| x.is_finite()) => Ok(v),
        _ => Err(usage(format!("{what}: expected {n} comma-separated numbers, got {s:?}"))),
    }
}

fn parse_point(s: &str, what: &str) -> Result<Point, Failure> {
    let v = parse_list(s, 2, what)?;
    Ok(Point::new(v[0], v[1]))
}

fn read_config(arg: &str) -> Result<RunConfig, Failure> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| usage(format!("--config {arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| usage(format!("--config: {e}")))
}

fn from_value<T: serde::de::DeserializeOwned>(v: Value, what: &str) -> Result<T, Failure> {
    serde_json::from_value(v).map_err(|e| usage(format!("{what}: {e}")))
}

/// Command-line flags merged over the config file.
struct Resolved {
    cfg: RunConfig,
    out: Option<PathBuf>,
}

impl Resolved {
    fn new(common: &Common) -> Result<Self, Failure> {
        let mut cfg = match &common.config {
            Some(c) => read_config(c)?,
            None => RunConfig::default(),
        };
        if let Some(s) = common.system {
            cfg.system = Some(s);
        }
        if let Some(p) = &common.params {
            cfg.params = Some(serde_json::from_str(p).map_err(|e| usage(format!("--params: {e}")))?);
        }
        let out = common.out.clone().or_else(|| cfg.out.clone());
        Ok(Self { cfg, out })
    }

    fn family(&self) -> SystemFamily {
        self.cfg.system.unwrap_or(SystemFamily::Canonical24)
    }

    fn params24(&self) -> Result<Option<Params24>, Failure> {
        self.cfg.params.clone().map(|v| from_value(v, "--params")).transpose()
    }

    fn canonical(&self) -> Result<CanonicalParams, Failure> {
        let v = self.cfg.params.clone().ok_or_else(|| usage("--params is required"))?;
        match self.family() {
            SystemFamily::Canonical24 => Ok(CanonicalParams::Canonical24(from_value(v, "--params")?)),
            SystemFamily::Canonical25 => Ok(CanonicalParams::Canonical25(from_value::<Params25>(v, "--params")?)),
            other => Err(usage(format!("{other:?} has no rotation-parameter continuation; use canonical24 or canonical25"))),
        }
    }

    fn field(&self) -> Result<GeneralQuadraticField, Failure> {
        let v = self.cfg.params.clone().ok_or_else(|| usage("--params is required"))?;
        let invalid = |e: crate::systems::SystemError| usage(format!("--params: {e}"));
        let f = match self.family() {
            SystemFamily::Canonical24 => compile_24(&from_value::<Params24>(v, "--params")?),
            SystemFamily::Canonical25 => CanonicalParams::Canonical25(from_value(v, "--params")?).compile().map_err(invalid)?,
            SystemFamily::Canonical21 => compile_21(&from_value::<Params21>(v, "--params")?),
            SystemFamily::Canonical26 => compile_26(&from_value::<Params26>(v, "--params")?).map_err(invalid)?,
            SystemFamily::General => from_value::<GeneralQuadraticField>(v, "--params")?,
        };
        if !f.is_finite() {
            return Err(usage("--params: non-finite coefficient"));
        }
        Ok(f)
    }

    fn integrator(&self) -> IntegratorConfig {
        self.cfg.integrator.unwrap_or_default()
    }

    fn scan(&self) -> ScanConfig {
        self.cfg.scan.unwrap_or_default()
    }

    fn scenario<T: serde::de::DeserializeOwned + Default>(&self) -> Result<T, Failure> {
        self.cfg.scenario.clone().map_or(Ok(T::default()), |v| from_value(v, "scenario config"))
    }
}

fn emit(out: &Option<PathBuf>, stdout: &mut dyn Write, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => write_file(p, text),
        None => stdout.write_all(text.as_bytes()).map_err(|e| Failure { code: EXIT_NUMERICAL, msg: e.to_string() }),
    }
}

fn write_file(p: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(p, text).map_err(|e| usage(format!("{}: {e}", p.display())))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report types serialize");
    s.push('\n');
    s
}

fn e16(v: f64) -> String {
    format!("{v:.16e}")
}

fn simulate(r: &Resolved, start: &str, tmax: Option<f64>, rtol: Option<f64>, stdout: &mut dyn Write) -> Outcome {
    let f = r.field()?;
    let start = parse_point(start, "--start")?;
    let mut cfg = r.integrator();
    if let Some(t) = tmax {
        cfg.t_max = t;
    }
    if let Some(t) = rtol {
        cfg.rtol = t;
    }
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let seg = integrate(&f, start, &cfg, None).map_err(numerical)?;
    let mut s = String::from("t,x,y\n");
    for (t, p) in seg.times.iter().zip(&seg.states) {
        s += &format!("{},{},{}\n", e16(*t), e16(p.x), e16(p.y));
    }
    emit(&r.out, stdout, &s)?;
    Ok(EXIT_OK)
}

fn rotation_check(r: &Resolved, n: usize, seed: Option<u64>, dmu: f64, id: Option<RotationParamId>, stdout: &mut dyn Write) -> Outcome {
    if !matches!(r.family(), SystemFamily::Canonical24) {
        return Err(usage("rotation-check works on canonical24"));
    }
    let seed = seed.or(r.cfg.seed).unwrap_or(0);
    let mut inputs = random_inputs(n, seed);
    if let Some(p) = r.params24()? {
        for s in &mut inputs {
            s.0 = p;
        }
    }
    let ids: Vec<RotationParamId> = id.map_or(RotationParamId::ALL.to_vec(), |i| vec![i]);
    let mut csv = String::from("point,id,delta_closed,delta_numeric,cross_sign,pass\n");
    let mut ok = true;
    for id in ids {
        let rep = sampled_direction_check(id, &inputs, dmu).map_err(numerical)?;
        for (k, s) in rep.samples.iter().enumerate() {
            let agree = (s.delta_closed - s.delta_numeric).abs() <= 1e-10 * (1.0 + s.delta_closed.abs());
            ok &= agree;
            let pass = match s.pass {
                Some(p) => (p && agree).to_string(),
                None if agree => "degenerate".into(),
                None => "false".into(),
            };
            csv += &format!("{k},{id},{},{},{},{pass}\n", e16(s.delta_closed), e16(s.delta_numeric), s.cross_sign());
        }
        ok &= rep.pass_rate() >= 0.99;
    }
    emit(&r.out, stdout, &csv)?;
    Ok(if ok { EXIT_OK } else { EXIT_ASSERTION })
}

#[derive(Serialize)]
struct FocusReport {
    focus: Point,
    kind: EquilibriumKind,
    trace: f64,
    cycles: Vec<LimitCycle>,
}

#[derive(Serialize)]
struct CyclesReport {
    label: String,
    foci: Vec<FocusReport>,
}

fn cycles(r: &Resolved, stdout: &mut dyn Write) -> Outcome {
    let f = r.field()?;
    let d = count_distribution_with(&f, &r.scan()).map_err(numerical)?;
    let rep = CyclesReport {
        label: d.label.clone(),
        foci: d
            .foci
            .into_iter()
            .map(|c| FocusReport { focus: c.focus, kind: c.kind, trace: c.trace, cycles: c.scan.cycles })
            .collect(),
    };
    emit(&r.out, stdout, &to_json(&rep))?;
    Ok(EXIT_OK)
}

fn family_csv(fam: &CycleFamily, note: Option<&str>) -> String {
    let mut s = String::from("mu,s_star,period,d_prime\n");
    for x in &fam.samples {
        s += &format!("{},{},{},{}\n", e16(x.mu), e16(x.s_star), e16(x.period), e16(x.d_prime));
    }
    let term = serde_json::to_value(fam.termination).expect("termination serializes");
    s += &format!("# termination,{}\n", term.as_str().unwrap_or_default());
    for f in &fam.folds {
        s += &format!("# fold,{},{},{}\n", e16(f.mu_fold), e16(f.s_fold), e16(f.d_prime));
    }
    if let Some(n) = note {
        s += &format!("# stall,{n}\n");
    }
    s
}

fn continue_cmd(r: &Resolved, param: RotationParamId, to: f64, focus: Option<&str>, outer: bool, stdout: &mut dyn Write) -> Outcome {
    let base = r.canonical()?;
    let fam = ParamFamily::new(base, param).map_err(|e| usage(e.to_string()))?;
    let mut cfg = r.cfg.continuation.unwrap_or_default();
    if let Some(s) = r.cfg.scan {
        cfg.scan = s;
    }
    let f = base.compile().map_err(|e| usage(e.to_string()))?;
    let want = focus.map(|s| parse_point(s, "--focus")).transpose()?;
    let secs = default_sections(&f, cfg.scan.s_max).map_err(numerical)?;
    let (_, sec) = match want {
        Some(p) => secs.into_iter().find(|(e, _)| e.location.dist(p) < 1e-6),
        None => secs.into_iter().next(),
    }
    .ok_or_else(|| numerical("no anti-saddle at the requested focus"))?;
    let found = crate::cycles::scan_with(&f, &sec, &cfg.scan).map_err(numerical)?.cycles;
    let seed = if outer { found.last() } else { found.first() }.ok_or_else(|| numerical("no cycle to continue"))?;
    let mu0 = param.value(&base).map_err(|e| usage(e.to_string()))?;
    match continue_family(&fam, (mu0, to), seed, &cfg) {
        Ok(fam) => {
            emit(&r.out, stdout, &family_csv(&fam, None))?;
            Ok(EXIT_OK)
        }
        Err(ContinuationError::Stall { mu, dmu, partial }) => {
            emit(&r.out, stdout, &family_csv(&partial, Some(&format!("{},{}", e16(mu), e16(dmu)))))?;
            Ok(EXIT_NUMERICAL)
        }
        Err(e) => Err(numerical(e)),
    }
}

fn scenario(r: &Resolved, name: ScenarioName, stdout: &mut dyn Write) -> Outcome {
    let rep = match name {
        ScenarioName::Theorem31 => run_theorem31(&r.scenario::<Theorem31Config>()?),
        ScenarioName::Uniqueness => run_uniqueness_experiment(&r.scenario::<UniquenessConfig>()?),
        ScenarioName::Monotone => run_monotone_family_check(&r.scenario::<MonotoneConfig>()?),
    }
    .map_err(numerical)?;
    emit(&r.out, stdout, &to_json(&rep))?;
    Ok(if rep.passed { EXIT_OK } else { EXIT_ASSERTION })
}

fn sweep(r: &Resolved, stdout: &mut dyn Write) -> Outcome {
    let cfg = r.cfg.sweep.clone().unwrap_or_default();
    let rep = run_sweep(&cfg).map_err(numerical)?;
    emit(&r.out, stdout, &to_json(&rep))?;
    Ok(if rep.hits.iter().any(|h| h.pass) { EXIT_OK } else { EXIT_ASSERTION })
}

fn portrait(r: &Resolved, bounds: Option<&str>, seeds: Option<&str>, no_cycles: bool, stdout: &mut dyn Write) -> Outcome {
    let f = r.field()?;
    let mut spec = r.cfg.portrait.clone().unwrap_or_default();
    if let Some(b) = bounds {
        let v = parse_list(b, 4, "--bounds")?;
        spec.bounds = Bounds::new(v[0], v[1], v[2], v[3]);
    }
    if let Some(s) = seeds {
        let v = parse_list(s, 2, "--seeds")?;
        if v.iter().any(|x| *x < 0.0 || x.fract() != 0.0) {
            return Err(usage("--seeds: expected two non-negative integers"));
        }
        spec.seed_grid = (v[0] as usize, v[1] as usize);
    }
    if !spec.bounds.is_valid() {
        return Err(usage(format!("invalid bounds {:?}", spec.bounds)));
    }
    let mut det = Detections { equilibria: equilibria(&f).map_err(numerical)?, ..Default::default() };
    if !no_cycles {
        let d = count_distribution_with(&f, &r.scan()).map_err(numerical)?;
        det.cycles = d.foci.into_iter().flat_map(|c| c.scan.cycles).collect();
        det.sections = default_sections(&f, r.scan().s_max).map_err(numerical)?.into_iter().map(|(_, s)| s).collect();
    }
    let p = render(&f, &det, &spec).map_err(|e| usage(e.to_string()))?;
    emit(&r.out, stdout, &p.svg)?;
    Ok(EXIT_OK)
}

fn set_threads() {
    if let Some(n) = std::env::var("QUADCYCLE_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // A pool built earlier in this process stays in place.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Runs one invocation, writing results to `stdout` and diagnostics to `stderr`.
pub fn dispatch_with<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    set_threads();
    let res = Resolved::new(&cli.common).and_then(|r| match &cli.cmd {
        Command::Simulate { start, tmax, rtol } => simulate(&r, start, *tmax, *rtol, stdout),
        Command::Equilibria => {
            let eq = equilibria(&r.field()?).map_err(numerical)?;
            emit(&r.out, stdout, &to_json(&eq))?;
            Ok(EXIT_OK)
        }
        Command::RotationCheck { n, seed, dmu, id } => rotation_check(&r, *n, *seed, *dmu, *id, stdout),
        Command::Cycles => cycles(&r, stdout),
        Command::Continue { param, to, focus, outer } => continue_cmd(&r, *param, *to, focus.as_deref(), *outer, stdout),
        Command::Scenario { action: ScenarioAction::Run { name } } => scenario(&r, *name, stdout),
        Command::Sweep => sweep(&r, stdout),
        Command::Portrait { bounds, seeds, no_cycles } => portrait(&r, bounds.as_deref(), seeds.as_deref(), *no_cycles, stdout),
    });
    match res {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.msg);
            if f.code == EXIT_USAGE {
                let _ = writeln!(stderr, "run `quadcycle --help` for usage");
            }
            f.code
        }
    }
}

pub fn dispatch<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    dispatch_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
