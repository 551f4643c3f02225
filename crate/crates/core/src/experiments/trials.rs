use std::time::Instant;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::{ExperimentRecord, Flag, Floors};
use crate::cube::CubeSpec;
use crate::energy::{self, ksum_exponent};
use crate::error::{Error, Result};
use crate::numeric::{Elem, Mode};
use crate::set::FiniteSet;
use crate::setops::{self, PairOp};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Target {
    #[serde(rename = "QQ")]
    Product,
    #[serde(rename = "Q/Q")]
    Ratio,
    #[serde(rename = "Q+Q")]
    Sum,
    #[serde(rename = "Q-Q")]
    Difference,
}

impl Target {
    pub fn label(self) -> &'static str {
        match self {
            Target::Product => "QQ",
            Target::Ratio => "Q/Q",
            Target::Sum => "Q+Q",
            Target::Difference => "Q-Q",
        }
    }

    fn op(self) -> PairOp {
        match self {
            Target::Product => PairOp::Prod,
            Target::Ratio => PairOp::Ratio,
            Target::Sum => PairOp::Sum,
            Target::Difference => PairOp::Diff,
        }
    }

    /// The growth targets natural for a cube of the given mode.
    pub fn for_mode(mode: Mode) -> Vec<Target> {
        match mode {
            Mode::Additive => vec![Target::Product, Target::Ratio],
            Mode::Multiplicative => vec![Target::Sum, Target::Difference],
        }
    }
}

fn ln_ratio(num: f64, n: f64) -> f64 {
    num.ln() / n.ln()
}

/// The known lower bound for `target`,
/// or `None` when no statement covers the combination.
fn reference_bound(spec: &CubeSpec, target: Target, n: f64) -> Option<(f64, Option<f64>)> {
    let interval = spec.height().is_some();
    let p = spec.ring.modulus().map(|p| p as f64);
    match (spec.mode, target, p) {
        (Mode::Additive, Target::Product | Target::Ratio, _) if !interval => {
            let main = n.powf(1.0 + 1.0 / 25.0);
            Some((p.map_or(main, |p| main.min(n.powf(0.4) * p.sqrt())), None))
        }
        (Mode::Additive, Target::Product, None) => Some((n.powf(100.0 / 79.0), Some(100.0 / 79.0))),
        (Mode::Additive, Target::Ratio, None) => Some((n.powf(14.0 / 11.0), Some(14.0 / 11.0))),
        (Mode::Additive, Target::Product | Target::Ratio, Some(p)) => {
            let base = n.powf(1.2).min((n * p).sqrt());
            let small = n <= p.powf(36.0 / 67.0);
            Some((if small { base.max(n.powf(11.0 / 9.0)) } else { base }, None))
        }
        (Mode::Multiplicative, Target::Sum, None) => Some((n.powf(100.0 / 79.0), Some(100.0 / 79.0))),
        (Mode::Multiplicative, Target::Difference, None) => Some((n.powf(14.0 / 11.0), Some(14.0 / 11.0))),
        (Mode::Multiplicative, Target::Sum | Target::Difference, Some(p)) => {
            Some((n.powf(31.0 / 30.0).min((n * p).sqrt()), None))
        }
        _ => None,
    }
}

/// Measures `|Q ∘ Q|` for each target against the reference bound values.
///
/// With `floors`, proper integer cubes of dimension in `[d_min, d_max]`
/// are asserted: product-type targets of additive cubes against
/// `floors.product`, sum-type targets of multiplicative cubes against
/// `floors.sum`. Everything else is reported only.
pub fn growth_trial(
    spec: &CubeSpec,
    targets: &[Target],
    floors: Option<&Floors>,
    seed: u64,
) -> Result<ExperimentRecord> {
    let started = Instant::now();
    let mut rec = ExperimentRecord::new("growth", serde_json::json!({"cube": spec, "targets": targets}), seed);
    rec.cube = Some(spec.clone());
    let q = spec.enumerate()?;
    let n = q.len();
    let proper = n as u128 == spec.digit_vectors();
    rec.measure("Q", n);
    rec.measure("proper", proper);
    let mut sizes = Vec::new();
    for &t in targets {
        let size = setops::pairwise_size(t.op(), &q, &q)?;
        rec.measure(t.label(), size);
        sizes.push((t, size));
    }
    if n <= 1 {
        rec.flag = Flag::Degenerate;
        rec.notes.push("exponent undefined for |Q| ≤ 1".into());
        rec.stamp(started);
        return Ok(rec);
    }
    let nf = n as f64;
    let asserted = floors.filter(|f| !spec.ring.is_field() && proper && (f.d_min..=f.d_max).contains(&spec.dim()));
    let mut failed = false;
    for (t, size) in sizes {
        let e = ln_ratio(size as f64, nf);
        rec.exponents.insert(t.label().into(), e);
        if let Some((value, exponent)) = reference_bound(spec, t, nf) {
            rec.bounds.insert(t.label().into(), value);
            if let Some(x) = exponent {
                rec.bounds.insert(format!("{}_exponent", t.label()), x);
            }
        }
        if let Some(f) = asserted {
            let floor = match (spec.mode, t) {
                (Mode::Additive, Target::Product | Target::Ratio) => Some(f.product),
                (Mode::Multiplicative, Target::Sum | Target::Difference) => Some(f.sum),
                _ => None,
            };
            if let Some(floor) = floor {
                rec.bounds.insert(format!("{}_floor", t.label()), floor);
                failed |= e < floor;
            }
        }
    }
    rec.flag = match (asserted.is_some(), failed) {
        (true, false) => Flag::Pass,
        (true, true) => Flag::Fail,
        (false, _) => Flag::Report,
    };
    rec.stamp(started);
    Ok(rec)
}

/// `E^×(Q)` of an additive cube, or `E^+(Q)` of a multiplicative one,
/// against the explicit energy bounds. Always report-only.
pub fn energy_bound_trial(spec: &CubeSpec, seed: u64) -> Result<ExperimentRecord> {
    let started = Instant::now();
    let mut rec = ExperimentRecord::new("energy_bound", serde_json::json!({"cube": spec}), seed);
    rec.cube = Some(spec.clone());
    let q = spec.enumerate()?;
    let n = q.len();
    rec.measure("Q", n);
    let (label, value) = match spec.mode {
        Mode::Additive => ("E_times", energy::energy_pair(Mode::Multiplicative, &q, &q)?.value),
        Mode::Multiplicative => ("E_plus", energy::energy_pair(Mode::Additive, &q, &q)?.value),
    };
    rec.measure(label, value);
    let nf = n as f64;
    rec.bounds.insert("trivial".into(), nf.powi(3));
    if n <= 1 {
        rec.flag = Flag::Degenerate;
        rec.exponents.insert("deficiency".into(), 0.0);
        rec.stamp(started);
        return Ok(rec);
    }
    let e = ln_ratio(value as f64, nf);
    rec.exponents.insert(label.into(), e);
    rec.exponents.insert("deficiency".into(), 3.0 - e);
    if let (Mode::Additive, Some(h)) = (spec.mode, spec.height()) {
        let l = ksum_exponent(2, h);
        match spec.ring.modulus() {
            None => {
                rec.bounds.insert("real".into(), nf.powf(1.5 + l));
            }
            Some(p) => {
                let main = nf.powf(3.0 + l) / p as f64;
                let tail = nf.powf(2.0 + 2.0 * l / 3.0).min(nf.powf(1.0 + 1.5 * l));
                rec.bounds.insert("field_main".into(), main);
                rec.bounds.insert("field_min".into(), tail);
                rec.bounds.insert("field_total".into(), main + tail);
            }
        }
    }
    rec.flag = Flag::Report;
    rec.stamp(started);
    Ok(rec)
}

/// Smallest `n ≤ n_max` with `|Qⁿ| ≥ |Q|^m`, with the size trajectory.
///
/// Hitting a cap ends the trajectory early and is noted in the record.
/// When `1 ∈ Q` the trajectory must be nondecreasing; a violation fails
/// the record.
pub fn conjecture_probe(q: &FiniteSet, m: u32, n_max: usize, cap: u128, seed: u64) -> Result<ExperimentRecord> {
    let started = Instant::now();
    if n_max == 0 {
        return Err(Error::Domain("n_max ≥ 1".into()));
    }
    let mut rec = ExperimentRecord::new(
        "conjecture",
        serde_json::json!({"set": q.elements(), "ring": q.ring(), "m": m, "n_max": n_max}),
        seed,
    );
    let target = BigUint::from(q.len()).pow(m);
    let mut trajectory: Vec<usize> = Vec::new();
    let mut found = None;
    let outcome = setops::product_trajectory(q, n_max, cap, |power| {
        trajectory.push(power.len());
        if BigUint::from(power.len()) >= target {
            found = Some(trajectory.len());
            return false;
        }
        true
    });
    match outcome {
        Ok(()) => {}
        Err(e) if e.is_cap() => rec.notes.push(format!("stopped after n = {}: {e}", trajectory.len())),
        Err(e) => return Err(e),
    }
    rec.measure("Q", q.len());
    rec.measure("target", &target);
    rec.measured.insert("trajectory".into(), trajectory.iter().map(usize::to_string).collect::<Vec<_>>().join(","));
    match found {
        Some(n) => rec.measure("n", n),
        None => rec.notes.push(format!("not reached within n ≤ {}", trajectory.len())),
    }
    if q.len() > 1 {
        if let Some(&last) = trajectory.last() {
            rec.exponents.insert("last".into(), ln_ratio(last as f64, q.len() as f64));
        }
    }
    let one = Elem::one();
    let monotone = trajectory.windows(2).all(|w| w[0] <= w[1]);
    rec.flag = if q.contains(&one) && !monotone { Flag::Fail } else { Flag::Report };
    if q.len() <= 1 {
        rec.flag = Flag::Degenerate;
    }
    rec.stamp(started);
    Ok(rec)
}

/// `|kQ|` against `|Q|^{log_{h+1}(kh+1)}` for a proper interval-digit cube.
pub fn ksum_bound_holds(spec: &CubeSpec, k: u32) -> Result<(usize, f64, bool)> {
    let h = spec.height().ok_or(Error::NonIntervalDigits)?;
    let (sum, _) = setops::iterate_sum(spec, k as usize)?;
    let n = spec.enumerate()?.len() as f64;
    let bound = energy::upper_bound(n.powf(ksum_exponent(k, h)));
    Ok((sum.len(), bound, sum.len() as f64 <= bound))
}
