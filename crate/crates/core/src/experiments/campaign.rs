use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::trials::{conjecture_probe, energy_bound_trial, growth_trial, Target};
use super::{random_cube_with, spec_hash, trial_rng, ExperimentRecord, Flag, Floors, GenDistribution};
use crate::cube::ENUMERATION_CAP;
use crate::error::{Error, Result};
use crate::numeric::{AmbientRing, Mode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// `|QQ|`, `|Q/Q|` of additive cubes.
    Growth,
    /// `|Q+Q|`, `|Q−Q|` of multiplicative cubes.
    GrowthMultiplicative,
    /// `E^×` of additive cubes.
    Energy,
    /// `E^+` of multiplicative cubes.
    EnergyMultiplicative,
    /// `|Qⁿ|` trajectory of additive cubes.
    Conjecture,
}

impl ExperimentKind {
    fn name(self) -> &'static str {
        match self {
            ExperimentKind::Growth => "growth",
            ExperimentKind::GrowthMultiplicative => "growth_multiplicative",
            ExperimentKind::Energy => "energy",
            ExperimentKind::EnergyMultiplicative => "energy_multiplicative",
            ExperimentKind::Conjecture => "conjecture",
        }
    }

    fn mode(self) -> Mode {
        match self {
            ExperimentKind::GrowthMultiplicative | ExperimentKind::EnergyMultiplicative => Mode::Multiplicative,
            _ => Mode::Additive,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Caps {
    /// Largest digit-vector count enumerated.
    pub enumeration: u64,
    /// Largest product set kept by the growth probe.
    pub product: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { enumeration: ENUMERATION_CAP as u64, product: 1 << 22 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "camelCase")]
pub struct ConjectureParams {
    pub m: u32,
    pub n_max: usize,
}

impl Default for ConjectureParams {
    fn default() -> Self {
        ConjectureParams { m: 2, n_max: 6 }
    }
}

fn one_one() -> [u64; 2] {
    [1, 1]
}

fn integers_only() -> Vec<Option<u64>> {
    vec![None]
}

/// A sweep over `experiments × d × h × p × seeds`. Multiplicative
/// experiments only use `h = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct CampaignConfig {
    pub experiments: Vec<ExperimentKind>,
    /// Inclusive.
    pub d_range: [usize; 2],
    #[serde(default = "one_one")]
    pub h_range: [u64; 2],
    /// `null` selects the integers.
    #[serde(default = "integers_only")]
    pub p_list: Vec<Option<u64>>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub caps: Caps,
    #[serde(default)]
    pub floors: Floors,
    #[serde(default)]
    pub generators: GenDistribution,
    #[serde(default)]
    pub conjecture: ConjectureParams,
}

impl CampaignConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: CampaignConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d_range[0] > self.d_range[1] || self.h_range[0] > self.h_range[1] || self.h_range[0] == 0 {
            return Err(Error::Domain("dRange and hRange must be [lo, hi] with lo ≤ hi and h ≥ 1".into()));
        }
        for p in self.p_list.iter().flatten() {
            AmbientRing::prime_field(*p)?;
        }
        Ok(())
    }

    /// Every trial of the sweep, in a fixed order.
    pub fn trials(&self) -> Vec<TrialSpec> {
        let mut out = Vec::new();
        for &kind in &self.experiments {
            for d in self.d_range[0]..=self.d_range[1] {
                for h in self.h_range[0]..=self.h_range[1] {
                    if kind.mode() == Mode::Multiplicative && h != 1 {
                        continue;
                    }
                    for &p in &self.p_list {
                        for &seed in &self.seeds {
                            out.push(TrialSpec {
                                experiment: kind,
                                d,
                                h,
                                p,
                                generators: self.generators.clone(),
                                caps: self.caps.clone(),
                                floors: matches!(kind, ExperimentKind::Growth | ExperimentKind::GrowthMultiplicative)
                                    .then(|| self.floors.clone()),
                                conjecture: (kind == ExperimentKind::Conjecture).then(|| self.conjecture.clone()),
                                seed,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

/// One point of a sweep. Everything except `seed` is hashed into the
/// record key.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialSpec {
    pub experiment: ExperimentKind,
    pub d: usize,
    pub h: u64,
    pub p: Option<u64>,
    pub generators: GenDistribution,
    pub caps: Caps,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub floors: Option<Floors>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conjecture: Option<ConjectureParams>,
    #[serde(skip)]
    pub seed: u64,
}

impl TrialSpec {
    fn json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("trial spec serializes")
    }

    pub fn key(&self) -> (String, String, u64) {
        (self.experiment.name().into(), spec_hash(&self.json()), self.seed)
    }

    /// Runs the trial; failures become `error` records so a sweep continues.
    pub fn run(&self) -> ExperimentRecord {
        let started = Instant::now();
        let (name, hash, seed) = self.key();
        let mut rec = match self.execute(&hash) {
            Ok(rec) => rec,
            Err(e) => {
                let mut rec = ExperimentRecord::new(&name, serde_json::Value::Null, seed);
                rec.flag = Flag::Error;
                rec.notes.push(e.to_string());
                if e.is_cap() {
                    rec.notes.push("cap".into());
                }
                rec
            }
        };
        // records are keyed by the sweep spec, not the per-trial payload
        rec.name = name;
        rec.spec = self.json();
        rec.spec_hash = hash;
        rec.seed = seed;
        rec.stamp(started);
        rec
    }

    fn execute(&self, hash: &str) -> Result<ExperimentRecord> {
        let ring = match self.p {
            None => AmbientRing::integers(),
            Some(p) => AmbientRing::prime_field(p)?,
        };
        let mode = self.experiment.mode();
        let digits: Vec<u64> = (0..=self.h).collect();
        let requested = u128::from(self.h + 1).saturating_pow(self.d as u32);
        if requested > u128::from(self.caps.enumeration) {
            return Err(Error::CapExceeded {
                what: "cube digit vectors",
                requested,
                cap: u128::from(self.caps.enumeration),
            });
        }
        let mut rng = trial_rng(hash, self.seed);
        let spec = random_cube_with(ring, self.d, &digits, mode, &self.generators, &mut rng)?;
        match self.experiment {
            ExperimentKind::Growth | ExperimentKind::GrowthMultiplicative => {
                // floors apply to the generic distribution only
                let floors = match self.generators {
                    GenDistribution::Uniform { .. } => self.floors.as_ref(),
                    _ => None,
                };
                growth_trial(&spec, &Target::for_mode(mode), floors, self.seed)
            }
            ExperimentKind::Energy | ExperimentKind::EnergyMultiplicative => energy_bound_trial(&spec, self.seed),
            ExperimentKind::Conjecture => {
                let params = self.conjecture.clone().unwrap_or_default();
                let q = spec.enumerate()?;
                let mut rec = conjecture_probe(&q, params.m, params.n_max, u128::from(self.caps.product), self.seed)?;
                rec.cube = Some(spec);
                Ok(rec)
            }
        }
    }
}

/// Append-only JSON-lines log of experiment records.
#[derive(Clone, Debug)]
pub struct ResultsLog {
    path: PathBuf,
}

impl ResultsLog {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        ResultsLog { path: path.into() }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// All records; a missing file is an empty log.
    pub fn read(&self) -> Result<Vec<ExperimentRecord>> {
        let file = match File::open(&self.path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(e.into()),
        };
        let mut out = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            out.push(
                serde_json::from_str(&line)
                    .map_err(|e| Error::Parse(format!("{}:{}: {e}", self.path.display(), i + 1)))?,
            );
        }
        Ok(out)
    }

    pub fn keys(&self) -> Result<HashSet<(String, String, u64)>> {
        Ok(self.read()?.iter().map(ExperimentRecord::key).collect())
    }

    pub fn append(&self, records: &[ExperimentRecord]) -> Result<()> {
        if let Some(dir) = self.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let mut file = OpenOptions::new().create(true).append(true).open(&self.path)?;
        let mut buf = String::new();
        for r in records {
            buf.push_str(&serde_json::to_string(r)?);
            buf.push('\n');
        }
        file.write_all(buf.as_bytes())?;
        file.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, Default)]
pub struct CampaignOutcome {
    pub new_records: Vec<ExperimentRecord>,
    pub skipped: usize,
}

impl CampaignOutcome {
    pub fn failures(&self) -> usize {
        self.new_records.iter().filter(|r| r.flag == Flag::Fail).count()
    }

    pub fn cap_errors(&self) -> usize {
        self.new_records.iter().filter(|r| r.flag == Flag::Error && r.notes.iter().any(|n| n == "cap")).count()
    }
}

/// Runs every trial not already in the log, `jobs` at a time, appending
/// each finished batch in sweep order.
pub fn run_campaign(config: &CampaignConfig, log: &ResultsLog, jobs: usize) -> Result<CampaignOutcome> {
    config.validate()?;
    let done = log.keys()?;
    let mut seen = HashSet::new();
    let pending: Vec<TrialSpec> = config
        .trials()
        .into_iter()
        .filter(|t| {
            let k = t.key();
            !done.contains(&k) && seen.insert(k)
        })
        .collect();
    let skipped = config.trials().len() - pending.len();
    let jobs = jobs.max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Domain(format!("worker pool: {e}")))?;
    let mut outcome = CampaignOutcome { new_records: Vec::with_capacity(pending.len()), skipped };
    for batch in pending.chunks(jobs) {
        let records: Vec<ExperimentRecord> = pool.install(|| batch.par_iter().map(TrialSpec::run).collect());
        log.append(&records)?;
        outcome.new_records.extend(records);
    }
    Ok(outcome)
}

/// `q_size,qq_size,exponent` rows for every record measuring `|QQ|`.
pub fn export_csv(records: &[ExperimentRecord]) -> String {
    let mut out = String::from("q_size,qq_size,exponent\n");
    for r in records {
        if let (Some(q), Some(qq), Some(e)) = (r.measured.get("Q"), r.measured.get("QQ"), r.exponents.get("QQ")) {
            out.push_str(&format!("{q},{qq},{e}\n"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(json: &str) -> CampaignConfig {
        CampaignConfig::from_json(json).unwrap()
    }

    #[test]
    fn sweep_cardinality_and_idempotence() {
        let dir = tempfile::tempdir().unwrap();
        let log = ResultsLog::new(dir.path().join("runs/log.jsonl"));
        let cfg = config(r#"{"experiments":["growth"],"dRange":[4,10],"seeds":[1,2,3,4,5]}"#);
        let first = run_campaign(&cfg, &log, 2).unwrap();
        assert_eq!(first.new_records.len(), 35);
        assert_eq!(log.read().unwrap().len(), 35);
        let again = run_campaign(&cfg, &log, 1).unwrap();
        assert_eq!((again.new_records.len(), again.skipped), (0, 35));
        assert_eq!(log.read().unwrap().len(), 35);
    }

    #[test]
    fn empty_sweep() {
        let dir = tempfile::tempdir().unwrap();
        let log = ResultsLog::new(dir.path().join("log.jsonl"));
        let out = run_campaign(&config(r#"{"experiments":[],"dRange":[1,3],"seeds":[1]}"#), &log, 1).unwrap();
        assert!(out.new_records.is_empty());
        assert!(log.read().unwrap().is_empty());
    }

    #[test]
    fn records_are_reproducible() {
        let cfg = config(
            r#"{"experiments":["growth","energy","conjecture","growth_multiplicative"],"dRange":[2,4],"hRange":[1,2],
                "pList":[null,101],"seeds":[7,8]}"#,
        );
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (ResultsLog::new(dir.path().join("a")), ResultsLog::new(dir.path().join("b")));
        let ra = run_campaign(&cfg, &a, 1).unwrap().new_records;
        let rb = run_campaign(&cfg, &b, 3).unwrap().new_records;
        assert_eq!(ra.len(), rb.len());
        for (x, y) in ra.iter().zip(&rb) {
            assert_eq!(x.without_timing(), y.without_timing());
        }
        assert!(ra.iter().all(|r| r.flag != Flag::Error), "{:?}", ra.iter().find(|r| r.flag == Flag::Error));
    }

    #[test]
    fn csv_export_rows() {
        let cfg = config(r#"{"experiments":["growth","energy"],"dRange":[3,3],"seeds":[1]}"#);
        let dir = tempfile::tempdir().unwrap();
        let log = ResultsLog::new(dir.path().join("log"));
        run_campaign(&cfg, &log, 1).unwrap();
        let csv = export_csv(&log.read().unwrap());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "q_size,qq_size,exponent");
        assert_eq!(lines.len(), 2);
        assert!(lines[1].starts_with("8,"));
    }

    #[test]
    fn bad_config() {
        assert!(CampaignConfig::from_json(r#"{"experiments":["growth"],"dRange":[5,3],"seeds":[]}"#).is_err());
        assert!(
            CampaignConfig::from_json(r#"{"experiments":["growth"],"dRange":[1,3],"seeds":[],"pList":[9]}"#).is_err()
        );
        assert!(CampaignConfig::from_json(r#"{"experiments":["nope"],"dRange":[1,3],"seeds":[]}"#).is_err());
    }
}
