//! Seeded experiments: random cubes, growth and energy trials, the
//! product-set growth probe, and campaigns persisted as JSON lines.

mod campaign;
mod trials;
pub mod verify;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cube::CubeSpec;
use crate::error::{Error, Result};
use crate::numeric::{AmbientRing, Elem, Mode};

pub use campaign::{
    export_csv, run_campaign, CampaignConfig, CampaignOutcome, Caps, ConjectureParams, ExperimentKind, ResultsLog,
};
pub use trials::{conjecture_probe, energy_bound_trial, growth_trial, ksum_bound_holds, Target};

/// Exponent floors asserted by growth trials on proper integer cubes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Floors {
    /// Floor for `|QQ|` and `|Q/Q|` of additive cubes.
    pub product: f64,
    /// Floor for `|Q+Q|` and `|Q−Q|` of multiplicative cubes.
    pub sum: f64,
    pub d_min: usize,
    pub d_max: usize,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub calibration: String,
}

/// The frozen floors shipped in `config/floors.json`.
pub const FLOORS_JSON: &str = include_str!("../../config/floors.json");

impl Default for Floors {
    fn default() -> Self {
        serde_json::from_str(FLOORS_JSON).expect("bundled floors parse")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    Pass,
    Fail,
    Report,
    Degenerate,
    Error,
}

/// One trial: inputs, seed, exact measurements, bound values and exponents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub name: String,
    pub spec: serde_json::Value,
    pub spec_hash: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cube: Option<CubeSpec>,
    /// Exact integers as decimal strings.
    pub measured: BTreeMap<String, String>,
    pub bounds: BTreeMap<String, f64>,
    pub exponents: BTreeMap<String, f64>,
    pub flag: Flag,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub wall_ms: u64,
    pub timestamp: u64,
}

impl ExperimentRecord {
    pub(crate) fn new(name: &str, spec: serde_json::Value, seed: u64) -> Self {
        ExperimentRecord {
            name: name.into(),
            spec_hash: spec_hash(&spec),
            spec,
            seed,
            cube: None,
            measured: BTreeMap::new(),
            bounds: BTreeMap::new(),
            exponents: BTreeMap::new(),
            flag: Flag::Report,
            notes: Vec::new(),
            wall_ms: 0,
            timestamp: 0,
        }
    }

    /// The record with timing fields cleared, for reproducibility checks.
    pub fn without_timing(&self) -> Self {
        ExperimentRecord { wall_ms: 0, timestamp: 0, ..self.clone() }
    }

    pub fn key(&self) -> (String, String, u64) {
        (self.name.clone(), self.spec_hash.clone(), self.seed)
    }

    pub(crate) fn measure(&mut self, key: &str, v: impl ToString) {
        self.measured.insert(key.into(), v.to_string());
    }

    pub(crate) fn stamp(&mut self, started: std::time::Instant) {
        self.wall_ms = started.elapsed().as_millis() as u64;
        self.timestamp =
            std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    }
}

/// SHA-256 of the compact JSON encoding, hex.
pub fn spec_hash(spec: &serde_json::Value) -> String {
    hex::encode(Sha256::digest(spec.to_string().as_bytes()))
}

/// A per-trial RNG derived from a spec hash and a campaign seed.
pub fn trial_rng(spec_hash: &str, seed: u64) -> ChaCha8Rng {
    let digest = Sha256::digest(format!("{spec_hash}:{seed}").as_bytes());
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    ChaCha8Rng::seed_from_u64(u64::from_le_bytes(bytes))
}

/// How cube generators are drawn.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GenDistribution {
    /// Uniform on `[lo, hi]`; over `F_p` residues `≡ 0` are redrawn.
    Uniform { lo: u64, hi: u64 },
    /// `a_j = base^{j−1}`.
    Powers { base: u64 },
    /// Uniform on `[−bound, bound] ∖ {0}`.
    Signed { bound: u64 },
}

impl Default for GenDistribution {
    fn default() -> Self {
        GenDistribution::Uniform { lo: 1, hi: 1 << 40 }
    }
}

impl fmt::Display for GenDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenDistribution::Uniform { lo, hi } => write!(f, "uniform({lo}..{hi})"),
            GenDistribution::Powers { base } => write!(f, "powers({base})"),
            GenDistribution::Signed { bound } => write!(f, "signed({bound})"),
        }
    }
}

impl FromStr for GenDistribution {
    type Err = Error;

    /// `uniform(LO..HI)`, `powers(B)` or `signed(N)`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unknown generator distribution `{s}`"));
        let (name, rest) = s.trim().split_once('(').ok_or_else(bad)?;
        let args = rest.strip_suffix(')').ok_or_else(bad)?;
        let num = |t: &str| t.trim().parse::<u64>().map_err(|_| bad());
        match name {
            "uniform" => {
                let (lo, hi) = args.split_once("..").ok_or_else(bad)?;
                let (lo, hi) = (num(lo)?, num(hi)?);
                if lo == 0 || lo > hi {
                    return Err(bad());
                }
                Ok(GenDistribution::Uniform { lo, hi })
            }
            "powers" => Ok(GenDistribution::Powers { base: num(args)? }),
            "signed" => Ok(GenDistribution::Signed { bound: num(args)? }),
            _ => Err(bad()),
        }
    }
}

impl GenDistribution {
    fn draw(&self, ring: &AmbientRing, j: usize, rng: &mut ChaCha8Rng) -> Result<Elem> {
        loop {
            let v = match *self {
                GenDistribution::Uniform { lo, hi } => Elem::from_i128(i128::from(rng.gen_range(lo..=hi))),
                GenDistribution::Powers { base } => ring.pow(&Elem::from_i128(i128::from(base)), j as u64)?,
                GenDistribution::Signed { bound } => {
                    let b = i128::from(bound);
                    Elem::from_i128(rng.gen_range(-b..=b))
                }
            };
            let v = ring.reduce(v)?;
            if !v.is_zero() {
                return Ok(v);
            }
            if matches!(self, GenDistribution::Powers { .. }) {
                return Err(Error::InvalidSpec(format!("{self} vanishes in {ring}")));
            }
        }
    }
}

/// A deterministic cube from `seed`. Additive cubes draw `a_0` from the same
/// distribution; multiplicative cubes over `Z` use `a_0 = 1` so products stay
/// below the magnitude cap.
pub fn random_cube(
    ring: AmbientRing,
    d: usize,
    digits: &[u64],
    mode: Mode,
    dist: &GenDistribution,
    seed: u64,
) -> Result<CubeSpec> {
    random_cube_with(ring, d, digits, mode, dist, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn random_cube_with(
    ring: AmbientRing,
    d: usize,
    digits: &[u64],
    mode: Mode,
    dist: &GenDistribution,
    rng: &mut ChaCha8Rng,
) -> Result<CubeSpec> {
    if let GenDistribution::Uniform { lo, hi } = dist {
        if *lo == 0 || lo > hi {
            return Err(Error::InvalidSpec(format!("{dist} is empty or contains 0")));
        }
    }
    let generators = (0..d).map(|j| dist.draw(&ring, j, rng)).collect::<Result<Vec<_>>>()?;
    let a0 = match (mode, ring) {
        (Mode::Multiplicative, AmbientRing::Integers { .. }) => Elem::one(),
        (Mode::Multiplicative, AmbientRing::PrimeField { p }) => Elem::from_i128(i128::from(rng.gen_range(1..p))),
        (Mode::Additive, _) => match dist {
            GenDistribution::Powers { .. } => Elem::zero(),
            _ => dist.draw(&ring, 0, rng)?,
        },
    };
    let digits = match mode {
        Mode::Multiplicative => vec![0, 1],
        Mode::Additive => digits.to_vec(),
    };
    CubeSpec::new(ring, mode, a0, generators, digits)
}
