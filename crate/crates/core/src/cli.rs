//! The `hcube` command line.
//!
//! Exit codes: 0 success, 1 a checked inequality or identity failed,
//! 2 usage or input error, 3 a size cap was exceeded.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cube::{CubeSpec, ENUMERATION_CAP};
use crate::energy;
use crate::error::{Error, Result};
use crate::experiments::{self, verify, CampaignConfig, GenDistribution, ResultsLog};
use crate::incidence::{self, Instance2d, Instance3d};
use crate::numeric::{AmbientRing, Mode, DEFAULT_CAP_BITS};
use crate::set::FiniteSet;
use crate::setops::{self, PairOp};
use crate::structure::Verdict;

/// Environment variable naming the default log directory.
pub const LOG_DIR_ENV: &str = "HCUBE_LOG_DIR";

/// Log file used when neither `--log` nor the environment names one.
const DEFAULT_LOG_DIR: &str = "hcube-logs";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAP: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "hcube", version, about = "Exact workbench for combinatorial cubes, energies and growth experiments")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Seed for every random choice; drawn and echoed to stderr when omitted
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output format
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads for campaigns
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Write output here instead of stdout
    #[arg(long, short = 'o', global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Tsv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build and inspect cubes
    #[command(subcommand)]
    Cube(CubeCommand),
    /// Pairwise and iterated set operations
    #[command(subcommand)]
    Setop(SetopCommand),
    /// Additive or multiplicative energies of sets read from files
    Energy(EnergyArgs),
    /// Seeded verification batteries
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Point-line and point-plane incidence counts over F_p
    #[command(subcommand)]
    Incidence(IncidenceCommand),
    /// Parameter sweeps logged as JSON lines
    #[command(subcommand)]
    Campaign(CampaignCommand),
    /// Smallest n with |Q^n| ≥ |Q|^m for a multiplicative cube
    Conjecture(ConjectureArgs),
}

#[derive(Debug, Args)]
pub struct RingArgs {
    /// Work in F_p instead of the integers
    #[arg(long)]
    pub p: Option<u64>,
    /// Bit cap on integer magnitudes
    #[arg(long, default_value_t = DEFAULT_CAP_BITS)]
    pub cap_bits: u32,
}

impl RingArgs {
    fn ring(&self) -> Result<AmbientRing> {
        match self.p {
            Some(p) => AmbientRing::prime_field(p),
            None => Ok(AmbientRing::integers_with_cap(self.cap_bits)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Additive,
    Multiplicative,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Additive => Mode::Additive,
            ModeArg::Multiplicative => Mode::Multiplicative,
        }
    }
}

#[derive(Debug, Args)]
pub struct CubeArgs {
    #[command(flatten)]
    pub ring: RingArgs,
    #[arg(long, value_enum, default_value = "additive")]
    pub mode: ModeArg,
    /// Base point; defaults to 0 (additive) or 1 (multiplicative)
    #[arg(long, allow_hyphen_values = true)]
    pub a0: Option<String>,
    /// Comma-separated generators
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with_all = ["random", "spec_file"])]
    pub gens: Vec<String>,
    /// Comma-separated digit set containing 0
    #[arg(long, value_delimiter = ',', conflicts_with = "height")]
    pub digits: Vec<u64>,
    /// Digits {0,…,h}
    #[arg(long)]
    pub height: Option<u64>,
    /// Draw this many generators instead of listing them
    #[arg(long, conflicts_with = "spec_file")]
    pub random: Option<usize>,
    /// Distribution for --random: uniform(LO..HI), powers(B) or signed(N)
    #[arg(long, default_value = "uniform(1..1099511627776)")]
    pub dist: GenDistribution,
    /// Read a JSON cube spec
    #[arg(long)]
    pub spec_file: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum CubeCommand {
    /// Enumerate the cube
    Gen(CubeArgs),
    /// A split [d] = X ⊔ Y with |Q(X)| ≤ |Q(Y)| ≤ |D|·|Q(X)|
    Split(CubeArgs),
    /// Check Q = (U + 2a0) − Q for an additive interval-digit cube
    Symmetry(CubeArgs),
}

#[derive(Debug, Args)]
pub struct PairArgs {
    #[command(flatten)]
    pub ring: RingArgs,
    /// Left operand: one element per line, `-` for stdin
    #[arg(long)]
    pub a: PathBuf,
    /// Right operand; defaults to the left one
    #[arg(long)]
    pub b: Option<PathBuf>,
    /// Print the representation function instead of the set
    #[arg(long)]
    pub reps: bool,
}

#[derive(Debug, Args)]
pub struct IterArgs {
    #[command(flatten)]
    pub ring: RingArgs,
    #[arg(long)]
    pub a: PathBuf,
    /// Number of summands or factors
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum, default_value = "additive")]
    pub mode: ModeArg,
    /// Largest support allowed at any step
    #[arg(long, default_value_t = ENUMERATION_CAP)]
    pub cap: u128,
    #[arg(long)]
    pub reps: bool,
}

#[derive(Debug, Subcommand)]
pub enum SetopCommand {
    /// A + B
    Sum(PairArgs),
    /// A − B
    Diff(PairArgs),
    /// A · B
    Prod(PairArgs),
    /// A / B (zeros in B skipped)
    Ratio(PairArgs),
    /// kA or A^k
    Iter(IterArgs),
}

#[derive(Debug, Args)]
pub struct EnergyArgs {
    #[command(flatten)]
    pub ring: RingArgs,
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long)]
    pub set_file: PathBuf,
    /// Second set for eplus/etimes
    #[arg(long)]
    pub b_file: Option<PathBuf>,
    /// Order for ek/tk
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    /// Group for ek/tk
    #[arg(long, value_enum, default_value = "additive")]
    pub mode: ModeArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Eplus,
    Etimes,
    Ek,
    Tk,
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// Popular sums and differences of h = 1 cubes, and E^+(B,Q) ≥ |B|²√|Q|
    Sd {
        #[arg(long, default_value_t = 10)]
        d_max: usize,
        #[arg(long, default_value_t = 100)]
        random: usize,
        #[arg(long, default_value_t = 100)]
        energy: usize,
    },
    /// Both sides of the Olmezov inequality on fuzzed instances
    Olmezov {
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// The projection inequality for sumsets on fuzzed instances
    Gmr {
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// |kQ_h| ≤ |Q_h|^{log_{h+1}(kh+1)} on power cubes
    QkBounds {
        #[arg(long, default_value_t = 8)]
        d_max: usize,
        #[arg(long, default_value_t = 3)]
        k_max: u32,
        #[arg(long, default_value_t = 2)]
        h_max: u64,
    },
    /// Energy identity chain and closed forms
    Identities {
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 40)]
        max_size: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum IncidenceCommand {
    /// Points against lines in F_p²
    #[command(name = "2d")]
    TwoD {
        #[arg(long)]
        p: u64,
        /// JSON instance {"p", "points", "lines"}
        #[arg(long, conflicts_with_all = ["full_grid", "a_size"])]
        file: Option<PathBuf>,
        /// All of F_p² against all p² + p lines
        #[arg(long)]
        full_grid: bool,
        /// Random grid A × B with |A| = a_size
        #[arg(long, default_value_t = 8)]
        a_size: usize,
        #[arg(long, default_value_t = 8)]
        b_size: usize,
        #[arg(long, default_value_t = 64)]
        lines: usize,
    },
    /// Points against planes in F_p³
    #[command(name = "3d")]
    ThreeD {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        points: usize,
        #[arg(long, default_value_t = 64)]
        planes: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum CampaignCommand {
    /// Run the sweep in a config file, skipping records already logged
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Results log; defaults to $HCUBE_LOG_DIR/results.jsonl
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Print logged growth records as q_size,qq_size,exponent
    Export {
        #[arg(long)]
        log: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct ConjectureArgs {
    #[command(flatten)]
    pub ring: RingArgs,
    /// Comma-separated generators of Q = {∏ a_j^{ε_j}}
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub gens: Vec<String>,
    /// Draw this many generators
    #[arg(long, conflicts_with = "gens")]
    pub random: Option<usize>,
    #[arg(long, default_value = "uniform(2..1000)")]
    pub dist: GenDistribution,
    #[arg(long, default_value_t = 2)]
    pub m: u32,
    #[arg(long, default_value_t = 6)]
    pub n_max: usize,
    #[arg(long, default_value_t = 1 << 22)]
    pub cap: u128,
}

/// What a command produced, before formatting.
enum Output {
    /// A set: `meta` plus its elements in JSON, one element per row otherwise.
    Set(Value, FiniteSet),
    /// A single record.
    Record(Value),
    /// Homogeneous records.
    Rows(Vec<Value>),
    /// Preformatted text.
    Text(String),
}

struct Ctx {
    seed: Option<u64>,
    format: Option<Format>,
}

impl Ctx {
    /// The `--seed` value, or a fresh one echoed to stderr.
    fn seed(&mut self) -> u64 {
        *self.seed.get_or_insert_with(|| {
            let s = rand::random::<u64>();
            eprintln!("seed: {s}");
            s
        })
    }

    fn rng(&mut self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed())
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let mut ctx = Ctx { seed: cli.global.seed, format: cli.global.format };
    let jobs = cli.global.jobs.unwrap_or(1).max(1);
    let result = dispatch(cli.command, &mut ctx, jobs).and_then(|(out, code)| {
        let text = render(out, ctx.format.unwrap_or(Format::Json))?;
        match &cli.global.out {
            Some(path) => std::fs::write(path, text)?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
        Ok(code)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        e if e.is_cap() => EXIT_CAP,
        Error::CrossCheck(_) => EXIT_CHECK,
        _ => EXIT_USAGE,
    }
}

fn dispatch(cmd: Command, ctx: &mut Ctx, jobs: usize) -> Result<(Output, i32)> {
    match cmd {
        Command::Cube(c) => cube(c, ctx),
        Command::Setop(c) => setop(c),
        Command::Energy(a) => energy_cmd(a),
        Command::Verify(c) => verify_cmd(c, ctx),
        Command::Incidence(c) => incidence_cmd(c, ctx),
        Command::Campaign(c) => campaign(c, ctx, jobs),
        Command::Conjecture(a) => conjecture(a, ctx),
    }
}

fn read_text(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        Ok(std::io::read_to_string(std::io::stdin())?)
    } else {
        Ok(std::fs::read_to_string(path)?)
    }
}

fn read_set(ring: AmbientRing, path: &Path) -> Result<FiniteSet> {
    FiniteSet::parse_lines(ring, &read_text(path)?)
}

fn build_cube(a: &CubeArgs, ctx: &mut Ctx) -> Result<CubeSpec> {
    if let Some(path) = &a.spec_file {
        return Ok(serde_json::from_str(&read_text(path)?)?);
    }
    let ring = a.ring.ring()?;
    let mode = Mode::from(a.mode);
    let digits = match (a.height, mode) {
        (_, Mode::Multiplicative) => vec![0, 1],
        (Some(h), _) => (0..=h).collect(),
        (None, _) if a.digits.is_empty() => vec![0, 1],
        (None, _) => a.digits.clone(),
    };
    if let Some(d) = a.random {
        let mut rng = ctx.rng();
        let mut spec = experiments::random_cube_with(ring, d, &digits, mode, &a.dist, &mut rng)?;
        if let Some(a0) = &a.a0 {
            spec = CubeSpec::new(ring, mode, ring.parse(a0)?, spec.generators, spec.digits)?;
        }
        return Ok(spec);
    }
    let a0 = match (&a.a0, mode) {
        (Some(s), _) => ring.parse(s)?,
        (None, Mode::Additive) => ring.elem(0),
        (None, Mode::Multiplicative) => ring.elem(1),
    };
    let gens = a.gens.iter().map(|g| ring.parse(g)).collect::<Result<Vec<_>>>()?;
    CubeSpec::new(ring, mode, a0, gens, digits)
}

fn cube(c: CubeCommand, ctx: &mut Ctx) -> Result<(Output, i32)> {
    match c {
        CubeCommand::Gen(a) => {
            let spec = build_cube(&a, ctx)?;
            let q = spec.enumerate()?;
            let proper = q.len() as u128 == spec.digit_vectors();
            let meta = json!({"cube": spec, "size": q.len(), "proper": proper, "set": q.to_string(), "seed": ctx.seed});
            Ok((Output::Set(meta, q), EXIT_OK))
        }
        CubeCommand::Split(a) => {
            let spec = build_cube(&a, ctx)?;
            let split = spec.split_hp()?;
            let holds = spec.sandwich_holds(split.x_size, split.y_size);
            let mut rec = serde_json::to_value(&split)?;
            rec["sandwich_holds"] = json!(holds);
            Ok((Output::Record(rec), if holds { EXIT_OK } else { EXIT_CHECK }))
        }
        CubeCommand::Symmetry(a) => {
            let spec = build_cube(&a, ctx)?;
            let witness = spec.symmetry_witness()?;
            let pass = spec.check_symmetry()?;
            let v = Verdict::new("symmetry", json!({"d": spec.dim(), "h": spec.height()}), &witness, &witness, pass);
            verdicts(vec![v])
        }
    }
}

fn pair_output(op: PairOp, a: &PairArgs) -> Result<(Output, i32)> {
    let ring = a.ring.ring()?;
    let left = read_set(ring, &a.a)?;
    let right = match &a.b {
        Some(b) => read_set(ring, b)?,
        None => left.clone(),
    };
    if a.reps {
        let (_, map) = setops::pairwise(op, &left, &right)?;
        return Ok((Output::Rows(map_rows(&map)), EXIT_OK));
    }
    let set = setops::pairwise_set(op, &left, &right)?;
    let meta = json!({"op": op, "a_size": left.len(), "b_size": right.len(), "size": set.len()});
    Ok((Output::Set(meta, set), EXIT_OK))
}

fn map_rows(map: &setops::MultiplicityMap) -> Vec<Value> {
    map.entries().iter().map(|(e, c)| json!({"element": e, "count": c})).collect()
}

fn setop(c: SetopCommand) -> Result<(Output, i32)> {
    match c {
        SetopCommand::Sum(a) => pair_output(PairOp::Sum, &a),
        SetopCommand::Diff(a) => pair_output(PairOp::Diff, &a),
        SetopCommand::Prod(a) => pair_output(PairOp::Prod, &a),
        SetopCommand::Ratio(a) => pair_output(PairOp::Ratio, &a),
        SetopCommand::Iter(a) => {
            let ring = a.ring.ring()?;
            let set = read_set(ring, &a.a)?;
            let map = setops::k_fold(a.mode.into(), &set, a.k, a.cap)?;
            if a.reps {
                return Ok((Output::Rows(map_rows(&map)), EXIT_OK));
            }
            let support = map.support();
            let meta = json!({"k": a.k, "mode": Mode::from(a.mode), "a_size": set.len(), "size": support.len()});
            Ok((Output::Set(meta, support), EXIT_OK))
        }
    }
}

fn energy_cmd(a: EnergyArgs) -> Result<(Output, i32)> {
    let ring = a.ring.ring()?;
    let set = read_set(ring, &a.set_file)?;
    let report = match a.kind {
        KindArg::Eplus | KindArg::Etimes => {
            let b = match &a.b_file {
                Some(p) => read_set(ring, p)?,
                None => set.clone(),
            };
            let mode = if a.kind == KindArg::Eplus { Mode::Additive } else { Mode::Multiplicative };
            energy::energy_pair(mode, &set, &b)?
        }
        KindArg::Ek => energy::energy_k(a.mode.into(), &set, a.k)?,
        KindArg::Tk => energy::energy_tk(a.mode.into(), &set, a.k)?,
    };
    Ok((Output::Record(serde_json::to_value(&report)?), EXIT_OK))
}

fn verdicts(vs: Vec<Verdict>) -> Result<(Output, i32)> {
    let failed = vs.iter().filter(|v| !v.pass).count();
    eprintln!("{} instances, {} failed", vs.len(), failed);
    let rows = vs.iter().map(serde_json::to_value).collect::<serde_json::Result<Vec<_>>>()?;
    Ok((Output::Rows(rows), if failed == 0 { EXIT_OK } else { EXIT_CHECK }))
}

fn verify_cmd(c: VerifyCommand, ctx: &mut Ctx) -> Result<(Output, i32)> {
    let vs = match c {
        VerifyCommand::Sd { d_max, random, energy } => verify::sd_battery(d_max, random, energy, ctx.seed())?,
        VerifyCommand::Olmezov { trials } => verify::olmezov_battery(trials, ctx.seed())?,
        VerifyCommand::Gmr { trials } => verify::gmr_battery(trials, ctx.seed())?,
        VerifyCommand::QkBounds { d_max, k_max, h_max } => verify::qk_battery(d_max, k_max, h_max)?,
        VerifyCommand::Identities { trials, max_size } => verify::identity_battery(trials, max_size, ctx.seed())?,
    };
    verdicts(vs)
}

fn incidence_cmd(c: IncidenceCommand, ctx: &mut Ctx) -> Result<(Output, i32)> {
    let report = match c {
        IncidenceCommand::TwoD { p, file, full_grid, a_size, b_size, lines } => {
            if let Some(path) = file {
                let raw: Instance2d = serde_json::from_str(&read_text(&path)?)?;
                if raw.p != p {
                    return Err(Error::Domain(format!("instance is over F_{} but --p is {p}", raw.p)));
                }
                incidence::report_2d(&Instance2d::new(raw.p, raw.points, raw.lines)?, None)?
            } else if full_grid {
                incidence::report_2d(&Instance2d::full_grid(p)?, None)?
            } else {
                let a: Vec<u64> = (0..a_size as u64).map(|x| x % p).collect();
                let b: Vec<u64> = (0..b_size as u64).map(|y| y % p).collect();
                let inst = Instance2d::random_grid(p, &a, &b, lines, &mut ctx.rng())?;
                incidence::report_2d(&inst, Some((a_size.min(p as usize) as u64, b_size.min(p as usize) as u64)))?
            }
        }
        IncidenceCommand::ThreeD { p, file, points, planes } => {
            if let Some(path) = file {
                let raw: Instance3d = serde_json::from_str(&read_text(&path)?)?;
                if raw.p != p {
                    return Err(Error::Domain(format!("instance is over F_{} but --p is {p}", raw.p)));
                }
                incidence::report_3d(&Instance3d::new(raw.p, raw.points, raw.planes)?)?
            } else {
                incidence::report_3d(&Instance3d::random(p, points, planes, &mut ctx.rng())?)?
            }
        }
    };
    let code = if report.count.consistent() { EXIT_OK } else { EXIT_CHECK };
    Ok((Output::Record(serde_json::to_value(&report)?), code))
}

/// `--log`, else `$HCUBE_LOG_DIR/results.jsonl`, else `hcube-logs/results.jsonl`.
pub fn default_log(explicit: Option<PathBuf>) -> PathBuf {
    explicit.unwrap_or_else(|| {
        let dir = std::env::var_os(LOG_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_LOG_DIR));
        dir.join("results.jsonl")
    })
}

fn campaign(c: CampaignCommand, ctx: &mut Ctx, jobs: usize) -> Result<(Output, i32)> {
    match c {
        CampaignCommand::Run { config, log } => {
            let cfg = CampaignConfig::from_json(&read_text(&config)?)?;
            let log = ResultsLog::new(default_log(log));
            let outcome = experiments::run_campaign(&cfg, &log, jobs)?;
            let (failures, caps) = (outcome.failures(), outcome.cap_errors());
            eprintln!(
                "{} new records, {} skipped, {} failed, {} over cap",
                outcome.new_records.len(),
                outcome.skipped,
                failures,
                caps
            );
            let rec = json!({
                "log": log.path(),
                "new_records": outcome.new_records.len(),
                "skipped": outcome.skipped,
                "failures": failures,
                "cap_errors": caps,
            });
            let code = if failures > 0 {
                EXIT_CHECK
            } else if caps > 0 {
                EXIT_CAP
            } else {
                EXIT_OK
            };
            Ok((Output::Record(rec), code))
        }
        CampaignCommand::Export { log } => {
            let records = ResultsLog::new(default_log(log)).read()?;
            match ctx.format {
                None | Some(Format::Csv) => Ok((Output::Text(experiments::export_csv(&records)), EXIT_OK)),
                Some(_) => {
                    let rows = records.iter().map(serde_json::to_value).collect::<serde_json::Result<Vec<_>>>()?;
                    Ok((Output::Rows(rows), EXIT_OK))
                }
            }
        }
    }
}

fn conjecture(a: ConjectureArgs, ctx: &mut Ctx) -> Result<(Output, i32)> {
    let ring = a.ring.ring()?;
    let seed = ctx.seed();
    let spec = match a.random {
        Some(d) => experiments::random_cube_with(ring, d, &[0, 1], Mode::Multiplicative, &a.dist, &mut ctx.rng())?,
        None => {
            let gens = a.gens.iter().map(|g| ring.parse(g)).collect::<Result<Vec<_>>>()?;
            CubeSpec::new(ring, Mode::Multiplicative, ring.elem(1), gens, vec![0, 1])?
        }
    };
    let q = spec.enumerate()?;
    let mut rec = experiments::conjecture_probe(&q, a.m, a.n_max, a.cap, seed)?;
    rec.cube = Some(spec);
    let code = if rec.flag == experiments::Flag::Fail { EXIT_CHECK } else { EXIT_OK };
    Ok((Output::Record(serde_json::to_value(&rec)?), code))
}

fn render(out: Output, format: Format) -> Result<String> {
    match (out, format) {
        (Output::Text(t), _) => Ok(t),
        (Output::Set(mut meta, set), Format::Json) => {
            meta["elements"] = serde_json::to_value(set.elements())?;
            json_text(&meta)
        }
        (Output::Set(_, set), f) => table(&["element".to_string()], set.iter().map(|e| vec![e.to_string()]), f),
        (Output::Record(v), Format::Json) => json_text(&v),
        (Output::Rows(rows), Format::Json) => json_text(&Value::Array(rows)),
        (Output::Record(v), f) => rows_table(&[v], f),
        (Output::Rows(rows), f) => rows_table(&rows, f),
    }
}

fn json_text(v: &impl Serialize) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Columns placed before the remaining fields, which stay alphabetical.
const LEAD_COLUMNS: [&str; 3] = ["name", "element", "count"];

/// Objects become rows keyed by the first object's fields; nested values
/// are written as JSON.
fn rows_table(rows: &[Value], f: Format) -> Result<String> {
    let header: Vec<String> = match rows.first() {
        Some(Value::Object(m)) => {
            let lead = LEAD_COLUMNS.iter().filter(|k| m.contains_key(**k)).map(|k| k.to_string());
            lead.chain(m.keys().filter(|k| !LEAD_COLUMNS.contains(&k.as_str())).cloned()).collect()
        }
        Some(_) => vec!["value".into()],
        None => Vec::new(),
    };
    let body = rows.iter().map(|r| match r {
        Value::Object(m) => header.iter().map(|k| m.get(k).map(cell).unwrap_or_default()).collect(),
        other => vec![cell(other)],
    });
    table(&header, body, f)
}

fn table(header: &[String], rows: impl Iterator<Item = Vec<String>>, f: Format) -> Result<String> {
    let delimiter = if f == Format::Tsv { b'\t' } else { b',' };
    let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Parse(e.to_string());
    if !header.is_empty() {
        w.write_record(header).map_err(csv_err)?;
    }
    for r in rows {
        w.write_record(&r).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}
