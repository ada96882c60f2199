//! Command-line front end with reproducible run manifests.
//!
//! Seven subcommands cover the crate's capabilities: `constants`, `maximal`,
//! `transform`, `verify`, `decompose`, `fuzz`, and `scan`. Every run writes
//! a [`RunManifest`] beside its outputs recording the tool version, the
//! effective flat configuration, the master seed, and a SHA-256 of each
//! input file; feeding that configuration back (see [`RunManifest::config`])
//! reproduces the artifacts byte for byte, at any worker count.
//!
//! Exit codes: 0 success, 2 configuration error, 3 degenerate input,
//! 64 usage error.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::decomposition::{
    build_forest, measure_decay, verify_sparse, DecayRow, DecompositionConfig, SparseReport,
};
use crate::grid::{DyadicGrid, Mode, StepFunction};
use crate::inequalities::TheoremId;
use crate::instance::{run_instance, FunctionSpec, InstanceSpec, WeightSpec};
use crate::io::{
    format_float, hash_file, read_step_csv, read_weight_csv, write_json,
    write_step_csv,
};
use crate::norms::lp_norm;
use crate::operators::{multilinear_maximal, multilinear_riesz, PVConfig};
use crate::search::{self, SearchSpace};
use crate::weights::{ConstantsReport, Weight, WeightVector};
use crate::{Error, Result};

/// Everything needed to rerun one invocation. The `timestamp` field is
/// informational; all other fields are a pure function of the invocation,
/// and replaying `config` through the same subcommand reproduces the
/// artifacts bit for bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub subcommand: String,
    /// The effective flat `key = value` configuration after merging
    /// defaults, the `--config` file, `--set` pairs, and dedicated flags.
    pub config: BTreeMap<String, String>,
    pub master_seed: u64,
    /// Input files with content hashes, so a replay can prove it read the
    /// same bytes.
    pub inputs: Vec<InputRef>,
    /// Unix seconds at the time of the run; excluded from reproducibility.
    pub timestamp: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputRef {
    pub path: String,
    pub sha256: String,
}

/// Manifest path for a given primary output: `r.json` → `r.json.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_os_string();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Render a manifest's configuration as a flat `key = value` file that can
/// be passed back through `--config`.
pub fn config_text(config: &BTreeMap<String, String>) -> String {
    let mut out = String::new();
    for (k, v) in config {
        out.push_str(&format!("{k} = {v}\n"));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Dyadic,
    Intervals,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Grid depth (the grid has 2^depth cells).
    #[arg(long)]
    depth: Option<u32>,
    /// Number of function/weight slots.
    #[arg(long)]
    m: Option<usize>,
    /// Supremum family: dyadic cubes only, or all grid-aligned intervals.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Flat `key = value` configuration file; dedicated flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed for all randomness in the run.
    #[arg(long)]
    seed: Option<u64>,
    /// Primary output path; the run manifest lands beside it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Artifact encoding; both encode identical values.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Allow singular-integral evaluations past the desk-scale depth cap.
    #[arg(long, action = ArgAction::SetTrue)]
    override_cost_cap: bool,
    /// Input file; repeat for multilinear slots.
    #[arg(long = "in", value_name = "FILE", action = ArgAction::Append)]
    inputs: Vec<PathBuf>,
    /// Inequality identifier, e.g. MAIN_1_4.
    #[arg(long)]
    theorem: Option<String>,
    /// Cap the worker threads; never changes results. Falls back to the
    /// MWL_THREADS environment variable.
    #[arg(long)]
    threads: Option<usize>,
    /// Extra configuration entry; repeatable.
    #[arg(long, value_name = "KEY=VALUE", action = ArgAction::Append)]
    set: Vec<String>,
}

#[derive(Parser, Debug)]
#[command(
    name = "mwl",
    version,
    about = "Numerical laboratory for mixed weak-type inequalities on dyadic grids"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Muckenhoupt-type constants of a CSV weight.
    Constants(CommonArgs),
    /// Multilinear maximal function of one or more CSV functions.
    Maximal(CommonArgs),
    /// Truncated multilinear singular integral of CSV functions.
    Transform(CommonArgs),
    /// Evaluate one inequality instance and report both sides.
    Verify(CommonArgs),
    /// Stopping-cube forest, sparseness audit, and band decay of an instance.
    Decompose(CommonArgs),
    /// Randomized ratio search over the generator parameter space.
    Fuzz(CommonArgs),
    /// Re-evaluate one instance across grid depths.
    Scan(CommonArgs),
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::Constants(_) => "constants",
            Cmd::Maximal(_) => "maximal",
            Cmd::Transform(_) => "transform",
            Cmd::Verify(_) => "verify",
            Cmd::Decompose(_) => "decompose",
            Cmd::Fuzz(_) => "fuzz",
            Cmd::Scan(_) => "scan",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Cmd::Constants(a)
            | Cmd::Maximal(a)
            | Cmd::Transform(a)
            | Cmd::Verify(a)
            | Cmd::Decompose(a)
            | Cmd::Fuzz(a)
            | Cmd::Scan(a) => a,
        }
    }
}

/// Parse argv and run. Returns the process exit code; artifacts and the run
/// manifest are written as side effects.
pub fn run<I: IntoIterator<Item = String>>(args: I) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            // Help/version go to stdout, usage errors to stderr.
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli.cmd) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(Error::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            64
        }
        Err(Error::Degenerate(msg)) => {
            eprintln!("degenerate input: {msg}");
            3
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn dispatch(cmd: &Cmd) -> Result<String> {
    let sub = cmd.name();
    let cfg = effective_config(sub, cmd.args())?;
    init_threads(&cfg)?;
    match cmd {
        Cmd::Constants(_) => cmd_constants(&cfg),
        Cmd::Maximal(_) => cmd_maximal(&cfg),
        Cmd::Transform(_) => cmd_transform(&cfg),
        Cmd::Verify(_) => cmd_verify(&cfg),
        Cmd::Decompose(_) => cmd_decompose(&cfg),
        Cmd::Fuzz(_) => cmd_fuzz(&cfg),
        Cmd::Scan(_) => cmd_scan(&cfg),
    }
}

// ---------------------------------------------------------------------------
// Configuration plumbing
// ---------------------------------------------------------------------------

/// Keys every subcommand accepts.
const COMMON_KEYS: &[&str] = &[
    "depth", "m", "mode", "seed", "out", "format", "override_cost_cap", "threads", "in",
    "theorem",
];

fn allowed_keys(sub: &str) -> &'static [&'static str] {
    match sub {
        "constants" => &["ps"],
        "maximal" => &[],
        "transform" => &["component_j", "exclusion_radius"],
        "verify" => &["instance", "r", "normalize"],
        "decompose" => &["instance", "a", "cubes_out"],
        "fuzz" => &[
            "budget",
            "depth_schedule",
            "exponent_lo",
            "exponent_hi",
            "beta_lo",
            "beta_hi",
            "max_cascade_levels",
            "allow_products",
            "coeff_lo",
            "coeff_hi",
            "max_terms",
            "max_level",
            "r",
            "trials_out",
        ],
        "scan" => &["depths"],
        _ => &[],
    }
}

fn defaults(sub: &str) -> Vec<(&'static str, String)> {
    let mut d: Vec<(&'static str, String)> = vec![
        ("mode", "dyadic".into()),
        ("seed", "0".into()),
        ("override_cost_cap", "false".into()),
    ];
    match sub {
        "constants" => {
            d.push(("format", "json".into()));
            d.push(("out", "constants_out.json".into()));
            d.push(("ps", "1.5,2,3".into()));
        }
        "maximal" => {
            d.push(("format", "csv".into()));
            d.push(("out", "maximal_out.csv".into()));
        }
        "transform" => {
            d.push(("format", "csv".into()));
            d.push(("out", "transform_out.csv".into()));
            d.push(("component_j", "1".into()));
        }
        "verify" => {
            d.push(("format", "json".into()));
            d.push(("out", "verify_out.json".into()));
            d.push(("m", "2".into()));
            d.push(("normalize", "true".into()));
        }
        "decompose" => {
            d.push(("format", "json".into()));
            d.push(("out", "decompose_out.json".into()));
            d.push(("a", "3".into()));
        }
        "fuzz" => {
            d.push(("format", "json".into()));
            d.push(("out", "fuzz_out.json".into()));
            d.push(("m", "2".into()));
            d.push(("depth", "7".into()));
            d.push(("budget", "64".into()));
            d.push(("depth_schedule", "5,6,7".into()));
            d.push(("exponent_lo", "-0.8".into()));
            d.push(("exponent_hi", "0".into()));
            d.push(("beta_lo", "0".into()));
            d.push(("beta_hi", "0.5".into()));
            d.push(("max_cascade_levels", "4".into()));
            d.push(("allow_products", "true".into()));
            d.push(("coeff_lo", "0.25".into()));
            d.push(("coeff_hi", "4".into()));
            d.push(("max_terms", "2".into()));
            d.push(("max_level", "4".into()));
        }
        "scan" => {
            d.push(("format", "json".into()));
            d.push(("out", "scan_out.json".into()));
        }
        _ => {}
    }
    d
}

/// Parse a flat `key = value` file: one pair per line, `#` comments.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("config line {}: expected 'key = value'", lineno + 1))
        })?;
        let key = k.trim();
        if key.is_empty() {
            return Err(Error::Config(format!("config line {}: empty key", lineno + 1)));
        }
        map.insert(key.to_string(), v.trim().to_string());
    }
    Ok(map)
}

/// Merge defaults < config file < `--set` pairs < dedicated flags, then
/// reject keys the subcommand does not know.
fn effective_config(sub: &str, args: &CommonArgs) -> Result<BTreeMap<String, String>> {
    let mut cfg: BTreeMap<String, String> =
        defaults(sub).into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        for (k, v) in parse_config_text(&text)? {
            cfg.insert(k, v);
        }
    }
    for pair in &args.set {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("--set needs KEY=VALUE, got '{pair}'")))?;
        cfg.insert(k.trim().to_string(), v.trim().to_string());
    }
    if let Some(d) = args.depth {
        cfg.insert("depth".into(), d.to_string());
    }
    if let Some(m) = args.m {
        cfg.insert("m".into(), m.to_string());
    }
    if let Some(mode) = args.mode {
        let name = match mode {
            ModeArg::Dyadic => "dyadic",
            ModeArg::Intervals => "intervals",
        };
        cfg.insert("mode".into(), name.into());
    }
    if let Some(s) = args.seed {
        cfg.insert("seed".into(), s.to_string());
    }
    if let Some(out) = &args.out {
        cfg.insert("out".into(), out.display().to_string());
    }
    if let Some(f) = args.format {
        let name = match f {
            FormatArg::Json => "json",
            FormatArg::Csv => "csv",
        };
        cfg.insert("format".into(), name.into());
    }
    if args.override_cost_cap {
        cfg.insert("override_cost_cap".into(), "true".into());
    }
    if !args.inputs.is_empty() {
        let joined: Vec<String> = args.inputs.iter().map(|p| p.display().to_string()).collect();
        cfg.insert("in".into(), joined.join(","));
    }
    if let Some(t) = &args.theorem {
        cfg.insert("theorem".into(), t.clone());
    }
    if let Some(t) = args.threads {
        cfg.insert("threads".into(), t.to_string());
    }

    let extras = allowed_keys(sub);
    for key in cfg.keys() {
        if !COMMON_KEYS.contains(&key.as_str()) && !extras.contains(&key.as_str()) {
            return Err(Error::Config(format!("unknown configuration key '{key}' for {sub}")));
        }
    }
    Ok(cfg)
}

fn init_threads(cfg: &BTreeMap<String, String>) -> Result<()> {
    let n = match cfg.get("threads") {
        Some(t) => Some(parse_num::<usize>("threads", t)?),
        None => match std::env::var("MWL_THREADS") {
            Ok(t) => Some(parse_num::<usize>("MWL_THREADS", &t)?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        // A failure here means a pool already exists (e.g. library callers);
        // results do not depend on the worker count, so that is benign.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::Config(format!("bad value '{value}' for {key}: {e}")))
}

fn get_num<T: std::str::FromStr>(cfg: &BTreeMap<String, String>, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    cfg.get(key).map(|v| parse_num(key, v)).transpose()
}

fn require_num<T: std::str::FromStr>(cfg: &BTreeMap<String, String>, key: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    get_num(cfg, key)?.ok_or_else(|| Error::Config(format!("missing required key '{key}'")))
}

fn get_bool(cfg: &BTreeMap<String, String>, key: &str) -> Result<bool> {
    match cfg.get(key).map(String::as_str) {
        None | Some("false") => Ok(false),
        Some("true") => Ok(true),
        Some(v) => Err(Error::Config(format!("bad value '{v}' for {key}: want true or false"))),
    }
}

fn get_mode(cfg: &BTreeMap<String, String>) -> Result<Mode> {
    match cfg.get("mode").map(String::as_str) {
        None | Some("dyadic") => Ok(Mode::Dyadic),
        Some("intervals") => Ok(Mode::Intervals),
        Some(v) => Err(Error::Config(format!("bad mode '{v}': want dyadic or intervals"))),
    }
}

fn get_format(cfg: &BTreeMap<String, String>) -> Result<FormatArg> {
    match cfg.get("format").map(String::as_str) {
        None | Some("json") => Ok(FormatArg::Json),
        Some("csv") => Ok(FormatArg::Csv),
        Some(v) => Err(Error::Config(format!("bad format '{v}': want json or csv"))),
    }
}

fn out_path(cfg: &BTreeMap<String, String>) -> PathBuf {
    PathBuf::from(cfg.get("out").expect("out always has a default"))
}

fn input_paths(cfg: &BTreeMap<String, String>) -> Result<Vec<PathBuf>> {
    let joined = cfg
        .get("in")
        .ok_or_else(|| Error::Config("missing required input (--in <file>)".into()))?;
    let paths: Vec<PathBuf> =
        joined.split(',').filter(|s| !s.is_empty()).map(PathBuf::from).collect();
    if paths.is_empty() {
        return Err(Error::Config("missing required input (--in <file>)".into()));
    }
    Ok(paths)
}

fn parse_f64_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_num::<f64>(key, s.trim()))
        .collect()
}

fn parse_u32_list(key: &str, value: &str) -> Result<Vec<u32>> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_num::<u32>(key, s.trim()))
        .collect()
}

fn parse_theorem(name: &str) -> Result<TheoremId> {
    TheoremId::ALL
        .iter()
        .copied()
        .find(|t| t.as_str() == name)
        .ok_or_else(|| {
            let all: Vec<&str> = TheoremId::ALL.iter().map(|t| t.as_str()).collect();
            Error::Config(format!("unknown theorem '{name}'; one of {}", all.join(", ")))
        })
}

fn write_manifest(
    cfg: &BTreeMap<String, String>,
    sub: &str,
    out: &Path,
    inputs: &[PathBuf],
) -> Result<()> {
    let mut refs = Vec::with_capacity(inputs.len());
    for p in inputs {
        refs.push(InputRef { path: p.display().to_string(), sha256: hash_file(p)? });
    }
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        subcommand: sub.to_string(),
        config: cfg.clone(),
        master_seed: get_num::<u64>(cfg, "seed")?.unwrap_or(0),
        inputs: refs,
        timestamp: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    };
    write_json(&manifest_path(out), &manifest)
}

// ---------------------------------------------------------------------------
// Shared artifact shapes
// ---------------------------------------------------------------------------

/// JSON rendering of a step function, the `--format json` counterpart of the
/// `cell_index,value` CSV.
#[derive(Serialize, Deserialize)]
struct StepPayload {
    depth: u32,
    values: Vec<f64>,
}

fn write_step_artifact(out: &Path, f: &StepFunction, format: FormatArg) -> Result<()> {
    match format {
        FormatArg::Csv => write_step_csv(out, f),
        FormatArg::Json => write_json(
            out,
            &StepPayload { depth: f.grid().depth(), values: f.values().to_vec() },
        ),
    }
}

fn read_functions(paths: &[PathBuf]) -> Result<Vec<StepFunction>> {
    let fs: Vec<StepFunction> = paths.iter().map(|p| read_step_csv(p)).collect::<Result<_>>()?;
    for f in &fs[1..] {
        if f.grid() != fs[0].grid() {
            return Err(Error::Config(format!(
                "input depths disagree: {} vs {}",
                fs[0].grid().depth(),
                f.grid().depth()
            )));
        }
    }
    Ok(fs)
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn cmd_constants(cfg: &BTreeMap<String, String>) -> Result<String> {
    let paths = input_paths(cfg)?;
    if paths.len() != 1 {
        return Err(Error::Config(format!("constants takes one input, got {}", paths.len())));
    }
    let w = read_weight_csv(&paths[0])?;
    let mode = get_mode(cfg)?;
    let ps = parse_f64_list("ps", cfg.get("ps").map(String::as_str).unwrap_or("1.5,2,3"))?;
    let label = paths[0].display().to_string();
    let report = ConstantsReport::compute(&w, mode, &ps, &label)?;
    let out = out_path(cfg);
    match get_format(cfg)? {
        FormatArg::Json => write_json(&out, &report)?,
        FormatArg::Csv => {
            let mut text = String::from("constant,value\n");
            text.push_str(&format!("a1,{}\n", format_float(report.a1.value)));
            text.push_str(&format!("ainf,{}\n", format_float(report.ainf.value)));
            text.push_str(&format!("rhinf,{}\n", format_float(report.rhinf.value)));
            for entry in &report.ap {
                text.push_str(&format!(
                    "ap@{},{}\n",
                    entry.p,
                    format_float(entry.constant.value)
                ));
            }
            fs::write(&out, text)?;
        }
    }
    write_manifest(cfg, "constants", &out, &paths)?;
    Ok(format!(
        "a1 = {:.6}, ainf = {:.6}, rhinf = {:.6} ({} mode) -> {}",
        report.a1.value,
        report.ainf.value,
        report.rhinf.value,
        mode,
        out.display()
    ))
}

fn cmd_maximal(cfg: &BTreeMap<String, String>) -> Result<String> {
    let paths = input_paths(cfg)?;
    let fs = read_functions(&paths)?;
    let mode = get_mode(cfg)?;
    let mf = multilinear_maximal(&fs, mode)?;
    let out = out_path(cfg);
    write_step_artifact(&out, &mf, get_format(cfg)?)?;
    write_manifest(cfg, "maximal", &out, &paths)?;
    let peak = mf.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(format!(
        "maximal of {} function(s), depth {}, peak {:.6} -> {}",
        fs.len(),
        mf.grid().depth(),
        peak,
        out.display()
    ))
}

fn cmd_transform(cfg: &BTreeMap<String, String>) -> Result<String> {
    let paths = input_paths(cfg)?;
    let fs = read_functions(&paths)?;
    let depth = fs[0].grid().depth();
    let default_radius = 1.0 / (1u64 << depth) as f64;
    let pv = PVConfig {
        component_j: require_num(cfg, "component_j")?,
        exclusion_radius: get_num(cfg, "exclusion_radius")?.unwrap_or(default_radius),
        override_cost_cap: get_bool(cfg, "override_cost_cap")?,
    };
    let t = multilinear_riesz(&fs, &pv)?;
    let out = out_path(cfg);
    write_step_artifact(&out, &t, get_format(cfg)?)?;
    write_manifest(cfg, "transform", &out, &paths)?;
    let peak = t.values().iter().map(|v| v.abs()).fold(f64::NEG_INFINITY, f64::max);
    Ok(format!(
        "singular integral of {} function(s), depth {depth}, sup |T| {:.6} -> {}",
        fs.len(),
        peak,
        out.display()
    ))
}

/// The `verify` instance when no instance file is given: all-ones functions
/// and weights, whose ratio is exactly 1 for every inequality.
fn all_ones_instance(theorem: TheoremId, m: usize, r: Option<f64>) -> InstanceSpec {
    let mut spec = InstanceSpec::new(
        theorem,
        (0..m).map(|_| FunctionSpec::cube(0, 0)).collect(),
        (0..m).map(|_| WeightSpec::Const { value: 1.0 }).collect(),
        WeightSpec::Const { value: 1.0 },
    );
    spec.r = r;
    spec
}

fn load_instance(cfg: &BTreeMap<String, String>, key: &str) -> Result<Option<(InstanceSpec, PathBuf)>> {
    match cfg.get(key) {
        None => Ok(None),
        Some(p) => {
            let path = PathBuf::from(p);
            let text = fs::read_to_string(&path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            Ok(Some((serde_json::from_str(&text)?, path)))
        }
    }
}

fn report_to_flat_csv(report: &crate::inequalities::InequalityReport) -> String {
    let mut text = String::from("key,value\n");
    text.push_str(&format!("theorem,{}\n", report.theorem.as_str()));
    text.push_str(&format!("lhs,{}\n", format_float(report.lhs)));
    text.push_str(&format!("rhs,{}\n", format_float(report.rhs)));
    text.push_str(&format!("ratio,{}\n", format_float(report.ratio)));
    text.push_str(&format!("witness_t,{}\n", format_float(report.witness_t)));
    text.push_str(&format!("degenerate,{}\n", report.degenerate));
    text.push_str(&format!("grid_depth,{}\n", report.grid_depth));
    text.push_str(&format!("mode,{}\n", report.mode));
    if let Some(ml) = &report.multilinear_a1 {
        text.push_str(&format!("vector.a1,{}\n", format_float(ml.value)));
    }
    for (name, cr) in &report.hypothesis_constants {
        text.push_str(&format!("{name}.a1,{}\n", format_float(cr.a1.value)));
        text.push_str(&format!("{name}.ainf,{}\n", format_float(cr.ainf.value)));
        text.push_str(&format!("{name}.rhinf,{}\n", format_float(cr.rhinf.value)));
    }
    text
}

fn cmd_verify(cfg: &BTreeMap<String, String>) -> Result<String> {
    let mode = get_mode(cfg)?;
    let depth: u32 = require_num(cfg, "depth")?;
    let occ = get_bool(cfg, "override_cost_cap")?;
    let mut inputs = Vec::new();
    let spec = match load_instance(cfg, "instance")? {
        Some((spec, path)) => {
            inputs.push(path);
            spec
        }
        None => {
            let theorem = parse_theorem(
                cfg.get("theorem")
                    .ok_or_else(|| Error::Config("verify needs --theorem or instance".into()))?,
            )?;
            let m: usize = require_num(cfg, "m")?;
            let r = get_num::<f64>(cfg, "r")?
                .or(if theorem == TheoremId::Vv42 { Some(2.0) } else { None });
            let mut spec = all_ones_instance(theorem, m, r);
            spec.normalize = get_bool_default(cfg, "normalize", true)?;
            spec
        }
    };
    let report = run_instance(&spec, depth, mode, occ)?;
    if report.degenerate {
        return Err(Error::Degenerate(
            "both sides of the inequality vanished; the ratio carries no information".into(),
        ));
    }
    let out = out_path(cfg);
    match get_format(cfg)? {
        FormatArg::Json => write_json(&out, &report)?,
        FormatArg::Csv => fs::write(&out, report_to_flat_csv(&report))?,
    }
    write_manifest(cfg, "verify", &out, &inputs)?;
    Ok(format!(
        "{} depth {} {}: ratio = {:.6} (lhs {:.6e}, rhs {:.6e}) -> {}",
        report.theorem.as_str(),
        depth,
        mode,
        report.ratio,
        report.lhs,
        report.rhs,
        out.display()
    ))
}

fn get_bool_default(cfg: &BTreeMap<String, String>, key: &str, default: bool) -> Result<bool> {
    match cfg.get(key).map(String::as_str) {
        None => Ok(default),
        Some("true") => Ok(true),
        Some("false") => Ok(false),
        Some(v) => Err(Error::Config(format!("bad value '{v}' for {key}: want true or false"))),
    }
}

#[derive(Serialize)]
struct BandCount {
    k: i64,
    l: i64,
    cubes: usize,
}

#[derive(Serialize)]
struct DecomposeSummary {
    a: f64,
    m: usize,
    depth: u32,
    level_set_cells: usize,
    stopping_cubes: usize,
    gamma_cubes: usize,
    counts: Vec<BandCount>,
    sparse: SparseReport,
    lambda_bound: f64,
    decay_rows: Vec<DecayRow>,
    decay_c1: Option<f64>,
    decay_c2: Option<f64>,
    decay_c1_neg: Option<f64>,
    audit: Vec<String>,
}

fn cmd_decompose(cfg: &BTreeMap<String, String>) -> Result<String> {
    let depth: u32 = require_num(cfg, "depth")?;
    let a: f64 = require_num(cfg, "a")?;
    let (spec, instance_path) = load_instance(cfg, "instance")?
        .ok_or_else(|| Error::Config("decompose needs instance = <spec.json>".into()))?;
    let grid = DyadicGrid::new(depth)?;

    let weights: Vec<Weight> =
        spec.weights.iter().map(|w| w.realize(grid)).collect::<Result<_>>()?;
    let mut fs: Vec<StepFunction> =
        spec.fs.iter().map(|f| f.realize(grid)).collect::<Result<_>>()?;
    if spec.normalize {
        for (f, w) in fs.iter_mut().zip(&weights) {
            let norm = lp_norm(f, w, 1.0)?;
            if norm == 0.0 {
                return Err(Error::Degenerate(
                    "cannot normalize an identically zero function".into(),
                ));
            }
            *f = f.map(|x| x / norm)?;
        }
    }
    let v = spec.v.realize(grid)?;
    let nu = WeightVector::new(weights)?.nu().clone();

    let forest = build_forest(&fs, &v, &DecompositionConfig { a, k_range: None })?;
    let audit = forest.audit(&fs, &v, &nu)?;
    let gamma = forest.gamma_cubes();
    let lambda_bound = 1.0 + (grid.cell_count() as f64).log2();
    let sparse = verify_sparse(&gamma, lambda_bound);
    let decay = measure_decay(&forest, &nu)?;

    let mut counts = Vec::new();
    for level in &forest.levels {
        let mut by_l: BTreeMap<i64, usize> = BTreeMap::new();
        for cube in &level.cubes {
            *by_l.entry(cube.l).or_insert(0) += 1;
        }
        for (l, cubes) in by_l {
            counts.push(BandCount { k: level.k, l, cubes });
        }
    }
    let stopping_cubes = forest.levels.iter().map(|kl| kl.cubes.len()).sum();

    let summary = DecomposeSummary {
        a,
        m: forest.m,
        depth,
        level_set_cells: forest.level_set.len(),
        stopping_cubes,
        gamma_cubes: gamma.len(),
        counts,
        sparse,
        lambda_bound,
        decay_rows: decay.rows.clone(),
        decay_c1: decay.c1,
        decay_c2: decay.c2,
        decay_c1_neg: decay.c1_neg,
        audit,
    };

    let out = out_path(cfg);
    write_json(&out, &summary)?;

    let decay_path = out.with_extension("decay.csv");
    let mut decay_csv = String::from("l,max_ratio\n");
    for row in &decay.rows {
        decay_csv.push_str(&format!("{},{}\n", row.l, format_float(row.max_ratio)));
    }
    fs::write(&decay_path, decay_csv)?;

    if let Some(cubes_out) = cfg.get("cubes_out") {
        let mut text = String::from("k,l,level,index\n");
        for level in &forest.levels {
            for cube in &level.cubes {
                text.push_str(&format!(
                    "{},{},{},{}\n",
                    level.k, cube.l, cube.cube.level, cube.cube.index
                ));
            }
        }
        fs::write(cubes_out, text)?;
    }

    write_manifest(cfg, "decompose", &out, &[instance_path])?;
    Ok(format!(
        "forest a = {a}, depth {depth}: {} stopping cube(s), {} in the distinguished band, packing {:.4} (cap {:.4}) -> {}",
        stopping_cubes,
        summary.gamma_cubes,
        sparse.lambda,
        lambda_bound,
        out.display()
    ))
}

fn cmd_fuzz(cfg: &BTreeMap<String, String>) -> Result<String> {
    let theorem = parse_theorem(
        cfg.get("theorem").ok_or_else(|| Error::Config("fuzz needs --theorem".into()))?,
    )?;
    let space = SearchSpace {
        theorem,
        m: require_num(cfg, "m")?,
        depth: require_num(cfg, "depth")?,
        depth_schedule: parse_u32_list(
            "depth_schedule",
            cfg.get("depth_schedule").map(String::as_str).unwrap_or(""),
        )?,
        mode: get_mode(cfg)?,
        exponent_range: (require_num(cfg, "exponent_lo")?, require_num(cfg, "exponent_hi")?),
        beta_range: (require_num(cfg, "beta_lo")?, require_num(cfg, "beta_hi")?),
        max_cascade_levels: require_num(cfg, "max_cascade_levels")?,
        allow_products: get_bool(cfg, "allow_products")?,
        coeff_range: (require_num(cfg, "coeff_lo")?, require_num(cfg, "coeff_hi")?),
        max_terms: require_num(cfg, "max_terms")?,
        max_level: require_num(cfg, "max_level")?,
        r: get_num(cfg, "r")?,
        budget: require_num(cfg, "budget")?,
        master_seed: require_num(cfg, "seed")?,
    };
    let result = search::fuzz(&space)?;
    let out = out_path(cfg);
    write_json(&out, &result)?;
    let trials_path = match cfg.get("trials_out") {
        Some(p) => PathBuf::from(p),
        None => out.with_extension("trials.csv"),
    };
    fs::write(&trials_path, result.trial_csv())?;
    write_manifest(cfg, "fuzz", &out, &[])?;
    Ok(format!(
        "{} trials ({} degenerate), best {} ratio = {:.6} at depth {} -> {}",
        result.trials_run,
        result.degenerate_trials,
        result.best.report.theorem.as_str(),
        result.best.report.ratio,
        space.depth,
        out.display()
    ))
}

fn cmd_scan(cfg: &BTreeMap<String, String>) -> Result<String> {
    let paths = input_paths(cfg)?;
    if paths.len() != 1 {
        return Err(Error::Config(format!(
            "scan takes one instance file, got {}",
            paths.len()
        )));
    }
    let text = fs::read_to_string(&paths[0])
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", paths[0].display())))?;
    let spec: InstanceSpec = serde_json::from_str(&text)?;
    let depths = match cfg.get("depths") {
        Some(list) => parse_u32_list("depths", list)?,
        None => vec![require_num(cfg, "depth")?],
    };
    let mode = get_mode(cfg)?;
    let occ = get_bool(cfg, "override_cost_cap")?;
    let rows = search::refinement_scan(&spec, &depths, mode, occ)?;

    let out = out_path(cfg);
    write_json(&out, &rows)?;

    // Flat CSV companion: fixed columns, then the constant keys in sorted
    // order (identical for every row of one instance).
    let mut keys: Vec<String> = Vec::new();
    for row in &rows {
        for k in row.constants.keys() {
            if !keys.contains(k) {
                keys.push(k.clone());
            }
        }
    }
    keys.sort();
    let mut csv = String::from("depth,ratio,lhs,rhs,degenerate");
    for k in &keys {
        csv.push(',');
        csv.push_str(k);
    }
    csv.push('\n');
    for row in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{}",
            row.depth,
            format_float(row.ratio),
            format_float(row.lhs),
            format_float(row.rhs),
            row.degenerate
        ));
        for k in &keys {
            csv.push(',');
            if let Some(v) = row.constants.get(k) {
                csv.push_str(&format_float(*v));
            }
        }
        csv.push('\n');
    }
    fs::write(out.with_extension("csv"), csv)?;

    write_manifest(cfg, "scan", &out, &paths)?;
    let first = rows.first().map(|r| r.ratio).unwrap_or(0.0);
    let last = rows.last().map(|r| r.ratio).unwrap_or(0.0);
    Ok(format!(
        "scan over {} depth(s): ratio {:.6} -> {:.6} ({}) -> {}",
        rows.len(),
        first,
        last,
        spec.theorem.as_str(),
        out.display()
    ))
}
