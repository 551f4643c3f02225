//! Additive and multiplicative energies, the higher energies `E_k` and
//! `T_k`, bounded partition counts `p_{k,h}`, and the closed forms and
//! explicit lower bounds for cube energies.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::cube::{CubeSpec, ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::numeric::{decimal, Elem, Mode};
use crate::set::FiniteSet;
use crate::setops::{self, MultiplicityMap, PairOp};

/// Pairwise mass up to which energies are recomputed by direct counting.
pub const BRUTE_FORCE_THRESHOLD: u128 = 10_000;

/// Relative slack applied to float bound values, away from the measurement.
pub const BOUND_SLACK: f64 = 1e-12;

/// `x` rounded down for use as a lower bound.
pub fn lower_bound(x: f64) -> f64 {
    x * (1.0 - BOUND_SLACK)
}

/// `x` rounded up for use as an upper bound.
pub fn upper_bound(x: f64) -> f64 {
    x * (1.0 + BOUND_SLACK)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyKind {
    Eplus,
    Etimes,
    Ek,
    Tk,
}

impl std::str::FromStr for EnergyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eplus" => Ok(EnergyKind::Eplus),
            "etimes" => Ok(EnergyKind::Etimes),
            "ek" => Ok(EnergyKind::Ek),
            "tk" => Ok(EnergyKind::Tk),
            other => Err(Error::Parse(format!("unknown energy kind `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Convolution,
    BruteForce,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub kind: EnergyKind,
    pub k: u32,
    #[serde(with = "decimal")]
    pub value: u128,
    pub inputs: Vec<String>,
    pub sizes: Vec<usize>,
    pub method: Method,
    /// Whether an independent recomputation agreed (absent when skipped).
    pub cross_checked: bool,
}

impl EnergyReport {
    pub fn with_inputs(mut self, names: &[&str]) -> Self {
        self.inputs = names.iter().map(|s| s.to_string()).collect();
        self
    }
}

fn hash_counts(a: &FiniteSet, b: &FiniteSet, f: impl Fn(&Elem, &Elem) -> Result<Option<Elem>>) -> Result<u128> {
    let mut counts: HashMap<Elem, u128> = HashMap::new();
    for x in a {
        for y in b {
            if let Some(v) = f(x, y)? {
                *counts.entry(v).or_insert(0) += 1;
            }
        }
    }
    Ok(counts.values().map(|c| c * c).sum())
}

fn agree(what: &str, primary: u128, check: u128) -> Result<()> {
    if primary == check {
        Ok(())
    } else {
        Err(Error::CrossCheck(format!("{what}: {primary} != {check}")))
    }
}

/// `E^+(A,B)` or `E^×(A,B)`: the number of solutions of `a_1 ∘ b_1 = a_2 ∘ b_2`.
///
/// Additive energy is `Σ r_{A+B}²` and is recomputed as `Σ r_{A−B}²`.
/// Multiplicative energy is `Σ r_{AB}²`, so zeros are counted literally.
/// Small inputs are also recounted with a hash table.
pub fn energy_pair(mode: Mode, a: &FiniteSet, b: &FiniteSet) -> Result<EnergyReport> {
    let ring = a.ring();
    let (kind, value) = match mode {
        Mode::Additive => {
            let sum = setops::representation_power_sum(PairOp::Sum, a, b, 2)?;
            agree("E+ via A+B and A-B", sum, setops::representation_power_sum(PairOp::Diff, a, b, 2)?)?;
            (EnergyKind::Eplus, sum)
        }
        Mode::Multiplicative => (EnergyKind::Etimes, setops::representation_power_sum(PairOp::Prod, a, b, 2)?),
    };
    let mass = a.len() as u128 * b.len() as u128;
    let cross_checked = mass <= BRUTE_FORCE_THRESHOLD;
    if cross_checked {
        let direct = hash_counts(a, b, |x, y| ring.combine(mode, x, y).map(Some))?;
        agree("energy vs direct count", value, direct)?;
    }
    Ok(EnergyReport {
        kind,
        k: 2,
        value,
        inputs: vec!["A".into(), "B".into()],
        sizes: vec![a.len(), b.len()],
        method: Method::Convolution,
        cross_checked,
    })
}

/// `E_k(A) = Σ_x r_{A−A}(x)^k`, or `Σ_x r_{A/A}(x)^k` over `A ∖ {0}`.
pub fn energy_k(mode: Mode, a: &FiniteSet, k: u32) -> Result<EnergyReport> {
    if k < 2 {
        return Err(Error::Domain("E_k needs k ≥ 2".into()));
    }
    let (base, op) = match mode {
        Mode::Additive => (a.clone(), PairOp::Diff),
        Mode::Multiplicative => (a.nonzero(), PairOp::Ratio),
    };
    let value = setops::representation_power_sum(op, &base, &base, k)?;
    let mass = base.len() as u128 * base.len() as u128;
    let cross_checked = mass <= BRUTE_FORCE_THRESHOLD;
    if cross_checked {
        let ring = a.ring();
        let mut counts: HashMap<Elem, u128> = HashMap::new();
        for x in &base {
            for y in &base {
                *counts.entry(ring.quotient(mode, x, y)?).or_insert(0) += 1;
            }
        }
        let direct = counts
            .values()
            .try_fold(0u128, |acc, c| c.checked_pow(k).and_then(|v| acc.checked_add(v)))
            .ok_or(Error::Overflow("E_k"))?;
        agree("E_k vs direct count", value, direct)?;
    }
    Ok(EnergyReport {
        kind: EnergyKind::Ek,
        k,
        value,
        inputs: vec!["A".into()],
        sizes: vec![a.len()],
        method: Method::Convolution,
        cross_checked,
    })
}

/// `T_k(A) = Σ_x r_{kA}(x)²` (or with `k`-fold products).
pub fn energy_tk(mode: Mode, a: &FiniteSet, k: u32) -> Result<EnergyReport> {
    if k < 1 {
        return Err(Error::Domain("T_k needs k ≥ 1".into()));
    }
    let map = setops::k_fold(mode, a, k as usize, ENUMERATION_CAP)?;
    Ok(EnergyReport {
        kind: EnergyKind::Tk,
        k,
        value: map.power_sum(2)?,
        inputs: vec!["A".into()],
        sizes: vec![a.len()],
        method: Method::Convolution,
        cross_checked: false,
    })
}

/// `T_k` of an additive cube from the multiplicities of `kQ`.
pub fn cube_tk(spec: &CubeSpec, k: u32) -> Result<u128> {
    let (_, map): (FiniteSet, MultiplicityMap) = setops::iterate_sum(spec, k as usize)?;
    map.power_sum(2)
}

fn binomial(n: i128, r: i128) -> Result<i128> {
    if r < 0 || n < 0 || r > n {
        return Ok(0);
    }
    let r = r.min(n - r);
    let mut acc: i128 = 1;
    for i in 0..r {
        // acc·(n−i) is divisible by (i+1) at every step
        acc = acc.checked_mul(n - i).ok_or(Error::Overflow("binomial"))? / (i + 1);
    }
    Ok(acc)
}

/// `p_{k,h}(m)`: ordered solutions of `c_1 + ⋯ + c_k = m` with `0 ≤ c_i ≤ h`.
pub fn partition_count(k: u32, h: u32, m: u64) -> Result<u128> {
    if k == 0 || h == 0 {
        return Err(Error::Domain("p_{k,h} needs k, h ≥ 1".into()));
    }
    let (k, h, m) = (i128::from(k), i128::from(h), i128::from(m));
    if m > k * h {
        return Ok(0);
    }
    let mut total: i128 = 0;
    for j in 0..=k {
        let rest = m - j * (h + 1);
        if rest < 0 {
            break;
        }
        let term =
            binomial(k, j)?.checked_mul(binomial(rest + k - 1, k - 1)?).ok_or(Error::Overflow("partition count"))?;
        total = if j % 2 == 0 { total.checked_add(term) } else { total.checked_sub(term) }
            .ok_or(Error::Overflow("partition count"))?;
    }
    u128::try_from(total).map_err(|_| Error::Overflow("partition count"))
}

/// `(Σ_j p_{k,h}(j)²)^d`, the value of `T_k` on a proper cube whose
/// generators admit no carries among `k`-fold digit sums.
pub fn tk_closed_form(k: u32, h: u32, d: u32) -> Result<u128> {
    let mut base = 0u128;
    for j in 0..=u64::from(k) * u64::from(h) {
        let p = partition_count(k, h, j)?;
        base = base
            .checked_add(p.checked_mul(p).ok_or(Error::Overflow("T_k closed form"))?)
            .ok_or(Error::Overflow("T_k closed form"))?;
    }
    base.checked_pow(d).ok_or(Error::Overflow("T_k closed form"))
}

/// `((h+1)^k + 2 Σ_{m=1}^h m^k)^d`, the value of `E_k` on such a cube.
pub fn ek_closed_form(k: u32, h: u32, d: u32) -> Result<u128> {
    let ov = || Error::Overflow("E_k closed form");
    let mut base = u128::from(h + 1).checked_pow(k).ok_or_else(ov)?;
    for m in 1..=u128::from(h) {
        base = base.checked_add(2 * m.checked_pow(k).ok_or_else(ov)?).ok_or_else(ov)?;
    }
    base.checked_pow(d).ok_or_else(ov)
}

/// Explicit lower bounds on cube energies and the upper bound on `|kQ_h|`,
/// already rounded outward.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeEnergyBounds {
    pub k: u32,
    pub h: u64,
    pub d: usize,
    pub q_size: usize,
    pub proper: bool,
    /// `|Q|^{2k−1−(log₂ k)/2}`, stated for `h = 1`.
    pub tk_lower: Option<f64>,
    /// `|Q|^{k+2^{−k}}`, stated for `h = 1`.
    pub ek_lower: Option<f64>,
    /// `k + h^{k+1} / ((k+1)(h+1)^k ln(h+1))`.
    pub general_exponent: f64,
    /// `|Q_h|` to the general exponent, read as a bound on `E_k`.
    pub ek_general_lower: f64,
    /// The general exponent at `k = 2`, read as a bound on `E^+`.
    pub eplus_general_lower: f64,
    /// `|Q_h|^{log_{h+1}(kh+1)}`.
    pub ksum_upper: f64,
}

/// `k + h^{k+1} / ((k+1)(h+1)^k ln(h+1))`.
pub fn general_energy_exponent(k: u32, h: u64) -> f64 {
    let (kf, hf) = (f64::from(k), h as f64);
    kf + hf.powf(kf + 1.0) / ((kf + 1.0) * (hf + 1.0).powf(kf) * (hf + 1.0).ln())
}

/// `log_{h+1}(kh+1)`.
pub fn ksum_exponent(k: u32, h: u64) -> f64 {
    ((f64::from(k) * h as f64 + 1.0).ln()) / ((h as f64 + 1.0).ln())
}

pub fn cube_energy_bounds(spec: &CubeSpec, k: u32) -> Result<CubeEnergyBounds> {
    if spec.mode != Mode::Additive {
        return Err(Error::ModeMismatch { expected: "additive" });
    }
    let h = spec.height().ok_or(Error::NonIntervalDigits)?;
    if k < 2 {
        return Err(Error::Domain("cube energy bounds are stated for k ≥ 2".into()));
    }
    let q = spec.enumerate()?;
    let n = q.len() as f64;
    let kf = f64::from(k);
    let general_exponent = general_energy_exponent(k, h);
    Ok(CubeEnergyBounds {
        k,
        h,
        d: spec.dim(),
        q_size: q.len(),
        proper: q.len() as u128 == spec.digit_vectors(),
        tk_lower: (h == 1).then(|| lower_bound(n.powf(2.0 * kf - 1.0 - kf.log2() / 2.0))),
        ek_lower: (h == 1).then(|| lower_bound(n.powf(kf + 2f64.powf(-kf)))),
        general_exponent,
        ek_general_lower: lower_bound(n.powf(general_exponent)),
        eplus_general_lower: lower_bound(n.powf(general_energy_exponent(2, h))),
        ksum_upper: upper_bound(n.powf(ksum_exponent(k, h))),
    })
}
