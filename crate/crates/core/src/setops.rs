//! Sumsets, difference sets, product and ratio sets with their full
//! representation functions, iterated sums `kQ` and products `Q^n`, and the
//! correlation functions `C_{k+1}`.
//!
//! Every pairwise operation reduces to a weighted `Sum` or `Prod` of two
//! multiplicity lists (`A − B = A + (−B)`, `A / B = A · B⁻¹`). Over the
//! integers each row `a ∘ B` is monotone in `b`, so the output is produced
//! in ascending order by a k-way heap merge of the rows; nothing of size
//! `|A||B|` is ever materialized. Over `F_p` the rows are not monotone and
//! residues are counted in a dense table (small `p`) or by sort-merge.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::cube::{CubeSpec, ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::numeric::{AmbientRing, Elem, Mode};
use crate::set::FiniteSet;

mod kernel;

use kernel::{stream, Sink};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairOp {
    Sum,
    Diff,
    Prod,
    Ratio,
}

impl std::str::FromStr for PairOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum" => Ok(PairOp::Sum),
            "diff" => Ok(PairOp::Diff),
            "prod" => Ok(PairOp::Prod),
            "ratio" => Ok(PairOp::Ratio),
            other => Err(Error::Parse(format!("unknown set operation `{other}`"))),
        }
    }
}

/// A representation function: element → positive count, ascending by element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiplicityMap {
    ring: AmbientRing,
    entries: Vec<(Elem, u64)>,
}

impl MultiplicityMap {
    /// The indicator function of a set.
    pub fn indicator(set: &FiniteSet) -> Self {
        MultiplicityMap { ring: set.ring(), entries: set.iter().map(|e| (e.clone(), 1)).collect() }
    }

    pub fn ring(&self) -> AmbientRing {
        self.ring
    }

    pub fn entries(&self) -> &[(Elem, u64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `r(x)`, zero off the support.
    pub fn get(&self, x: &Elem) -> u64 {
        self.entries.binary_search_by(|(e, _)| e.cmp(x)).map(|i| self.entries[i].1).unwrap_or(0)
    }

    pub fn total_mass(&self) -> u128 {
        self.entries.iter().map(|&(_, c)| u128::from(c)).sum()
    }

    pub fn support(&self) -> FiniteSet {
        FiniteSet::from_sorted(self.ring, self.entries.iter().map(|(e, _)| e.clone()).collect())
    }

    /// `Σ_x r(x)^k`, checked.
    pub fn power_sum(&self, k: u32) -> Result<u128> {
        self.entries.iter().try_fold(0u128, |acc, &(_, c)| {
            u128::from(c).checked_pow(k).and_then(|v| acc.checked_add(v)).ok_or(Error::Overflow("power sum"))
        })
    }

    /// `element,count` lines in canonical element order, with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("element,count\n");
        for (e, c) in &self.entries {
            out.push_str(&format!("{e},{c}\n"));
        }
        out
    }

    pub fn from_csv(ring: AmbientRing, text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
            let (e, c) = line.split_once(',').ok_or_else(|| Error::Parse(format!("bad csv line `{line}`")))?;
            let c: u64 = c.trim().parse().map_err(|_| Error::Parse(format!("bad count `{c}`")))?;
            entries.push((ring.parse(e)?, c));
        }
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(MultiplicityMap { ring, entries })
    }
}

fn check_rings(a: AmbientRing, b: AmbientRing) -> Result<()> {
    if a.same_kind(&b) {
        Ok(())
    } else {
        Err(Error::RingMismatch)
    }
}

/// Weighted pairwise operation on two representation functions.
pub fn convolve(op: PairOp, f: &MultiplicityMap, g: &MultiplicityMap) -> Result<MultiplicityMap> {
    check_rings(f.ring, g.ring)?;
    let mut entries = Vec::new();
    stream(
        &f.ring,
        op,
        &f.entries,
        &g.entries,
        &mut Sink::Full(&mut |e, c| {
            entries.push((e, c));
            Ok(())
        }),
    )?;
    Ok(MultiplicityMap { ring: f.ring, entries })
}

/// `A ∘ B` together with its full representation function `r_{A∘B}`.
/// `Ratio` skips `b = 0`; over `Z` it yields exact rationals.
pub fn pairwise(op: PairOp, a: &FiniteSet, b: &FiniteSet) -> Result<(FiniteSet, MultiplicityMap)> {
    let map = convolve(op, &MultiplicityMap::indicator(a), &MultiplicityMap::indicator(b))?;
    Ok((map.support(), map))
}

pub fn pairwise_set(op: PairOp, a: &FiniteSet, b: &FiniteSet) -> Result<FiniteSet> {
    pairwise_set_capped(op, a, b, u128::MAX)
}

/// [`pairwise_set`], abandoned as soon as more than `cap` elements appear.
pub fn pairwise_set_capped(op: PairOp, a: &FiniteSet, b: &FiniteSet, cap: u128) -> Result<FiniteSet> {
    check_rings(a.ring(), b.ring())?;
    let mut out = Vec::new();
    let (fa, fb) = (MultiplicityMap::indicator(a), MultiplicityMap::indicator(b));
    stream(
        &a.ring(),
        op,
        &fa.entries,
        &fb.entries,
        &mut Sink::Full(&mut |e, _| {
            if out.len() as u128 >= cap {
                return Err(Error::CapExceeded { what: "pairwise set", requested: out.len() as u128 + 1, cap });
            }
            out.push(e);
            Ok(())
        }),
    )?;
    Ok(FiniteSet::from_sorted(a.ring(), out))
}

/// `|A ∘ B|` without materializing the set.
pub fn pairwise_size(op: PairOp, a: &FiniteSet, b: &FiniteSet) -> Result<u64> {
    check_rings(a.ring(), b.ring())?;
    if std::ptr::eq(a, b) || a == b {
        if let Some(n) = kernel::self_size(&a.ring(), op, a.elements()) {
            return Ok(n);
        }
    }
    let mut n = 0u64;
    for_each_weight(op, a, b, &mut |_| {
        n += 1;
        Ok(())
    })?;
    Ok(n)
}

/// Visits `(x, r_{A∘B}(x))` for every `x` in the support.
pub fn for_each_representation(
    op: PairOp,
    a: &FiniteSet,
    b: &FiniteSet,
    mut f: impl FnMut(&Elem, u64) -> Result<()>,
) -> Result<()> {
    check_rings(a.ring(), b.ring())?;
    let (fa, fb) = (MultiplicityMap::indicator(a), MultiplicityMap::indicator(b));
    stream(&a.ring(), op, &fa.entries, &fb.entries, &mut Sink::Full(&mut |e, c| f(&e, c)))
}

fn for_each_weight(op: PairOp, a: &FiniteSet, b: &FiniteSet, f: &mut dyn FnMut(u64) -> Result<()>) -> Result<()> {
    check_rings(a.ring(), b.ring())?;
    let (fa, fb) = (MultiplicityMap::indicator(a), MultiplicityMap::indicator(b));
    stream(&a.ring(), op, &fa.entries, &fb.entries, &mut Sink::Counts(f))
}

/// `Σ_x r_{A∘B}(x)^k`, streamed.
pub fn representation_power_sum(op: PairOp, a: &FiniteSet, b: &FiniteSet, k: u32) -> Result<u128> {
    let mut acc = 0u128;
    for_each_weight(op, a, b, &mut |c| {
        let term = u128::from(c).checked_pow(k).ok_or(Error::Overflow("power sum"))?;
        acc = acc.checked_add(term).ok_or(Error::Overflow("power sum"))?;
        Ok(())
    })?;
    Ok(acc)
}

/// `r_{kA}` (additive) or `r_{A^k}` (multiplicative) by `k − 1` convolutions.
pub fn k_fold(mode: Mode, a: &FiniteSet, k: usize, cap: u128) -> Result<MultiplicityMap> {
    if k == 0 {
        return Err(Error::Domain("k-fold operation needs k ≥ 1".into()));
    }
    let op = match mode {
        Mode::Additive => PairOp::Sum,
        Mode::Multiplicative => PairOp::Prod,
    };
    let base = MultiplicityMap::indicator(a);
    let mut acc = base.clone();
    for _ in 1..k {
        acc = convolve(op, &acc, &base)?;
        if acc.len() as u128 > cap {
            return Err(Error::CapExceeded { what: "k-fold support", requested: acc.len() as u128, cap });
        }
    }
    Ok(acc)
}

/// `kQ_D` with multiplicities `r_{kQ_D}`. Built generator by generator from
/// the digit counts of `kD`, so the work is linear in the number of digit
/// vectors of `kQ_D` rather than in `|Q|^k`.
pub fn iterate_sum(spec: &CubeSpec, k: usize) -> Result<(FiniteSet, MultiplicityMap)> {
    if spec.mode != Mode::Additive {
        return Err(Error::ModeMismatch { expected: "additive" });
    }
    if k == 0 {
        return Err(Error::Domain("k ≥ 1".into()));
    }
    let top = (k as u128) * u128::from(*spec.digits.last().unwrap_or(&0)) + 1;
    let requested = top.saturating_pow(spec.dim() as u32);
    if requested > ENUMERATION_CAP {
        return Err(Error::CapExceeded { what: "k-fold cube digit vectors", requested, cap: ENUMERATION_CAP });
    }
    // ways[e] = #{(δ_1..δ_k) ∈ D^k : Σδ = e}
    let mut ways = vec![1u64];
    for _ in 0..k {
        let mut next = vec![0u64; ways.len() + *spec.digits.last().unwrap_or(&0) as usize];
        for (e, &w) in ways.iter().enumerate() {
            for &dg in &spec.digits {
                next[e + dg as usize] += w;
            }
        }
        ways = next;
    }
    let ring = spec.ring;
    let start = ring.scale(&spec.a0, k as u64)?;
    let mut acc = MultiplicityMap { ring, entries: vec![(start, 1)] };
    for g in &spec.generators {
        let mut steps = Vec::new();
        for (e, &w) in ways.iter().enumerate().filter(|(_, &w)| w > 0) {
            steps.push((ring.scale(g, e as u64)?, w));
        }
        steps.sort_by(|x, y| x.0.cmp(&y.0));
        let mut merged: Vec<(Elem, u64)> = Vec::with_capacity(steps.len());
        for (e, w) in steps {
            match merged.last_mut() {
                Some((le, lw)) if *le == e => *lw += w,
                _ => merged.push((e, w)),
            }
        }
        acc = convolve(PairOp::Sum, &MultiplicityMap { ring, entries: merged }, &acc)?;
    }
    Ok((acc.support(), acc))
}

/// `Q^n`, the n-fold product set.
pub fn iterate_prod(q: &FiniteSet, n: usize) -> Result<FiniteSet> {
    iterate_prod_with_cap(q, n, ENUMERATION_CAP)
}

pub fn iterate_prod_with_cap(q: &FiniteSet, n: usize, cap: u128) -> Result<FiniteSet> {
    let mut last = None;
    product_trajectory(q, n, cap, |s| {
        last = Some(s.clone());
        true
    })?;
    last.ok_or_else(|| Error::Domain("n ≥ 1".into()))
}

/// Calls `visit(Q^j)` for `j = 1, 2, …, n` until it returns `false`.
/// Exceeding `cap` reports the largest completed power.
pub fn product_trajectory(q: &FiniteSet, n: usize, cap: u128, mut visit: impl FnMut(&FiniteSet) -> bool) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("n ≥ 1".into()));
    }
    let mut power = q.clone();
    if !visit(&power) {
        return Ok(());
    }
    for j in 2..=n {
        power = pairwise_set_capped(PairOp::Prod, &power, q, cap).map_err(|e| {
            if e.is_cap() {
                Error::IterationCapExceeded { reached: j - 1, cap }
            } else {
                e
            }
        })?;
        if !visit(&power) {
            break;
        }
    }
    Ok(())
}

/// Shift tuples for which a correlation is evaluated.
#[derive(Clone, Debug)]
pub enum Shifts {
    /// Every tuple with a nonzero value.
    All,
    List(Vec<Vec<Elem>>),
}

/// `C_{k+1}(f_1, …, f_{k+1})(x_1, …, x_k) = Σ_z f_1(z) f_2(z∘x_1) ⋯ f_{k+1}(z∘x_k)`
/// for indicator functions, listed by shift tuple.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CorrelationTable {
    pub mode: Mode,
    pub k: usize,
    pub entries: Vec<(Vec<Elem>, u64)>,
}

impl CorrelationTable {
    pub fn get(&self, shifts: &[Elem]) -> u64 {
        self.entries.binary_search_by(|(s, _)| s.as_slice().cmp(shifts)).map(|i| self.entries[i].1).unwrap_or(0)
    }
}

/// Correlation of `k + 1` sets. In multiplicative mode sets are taken inside
/// the multiplicative group (zero is dropped).
pub fn correlation(mode: Mode, sets: &[FiniteSet], shifts: Shifts, cap: u128) -> Result<CorrelationTable> {
    if sets.len() < 2 {
        return Err(Error::Domain("correlation needs k + 1 ≥ 2 sets".into()));
    }
    let ring = sets[0].ring();
    for s in sets {
        check_rings(ring, s.ring())?;
    }
    let sets: Vec<FiniteSet> = match mode {
        Mode::Additive => sets.to_vec(),
        Mode::Multiplicative => sets.iter().map(FiniteSet::nonzero).collect(),
    };
    let k = sets.len() - 1;
    let mut entries = match shifts {
        Shifts::List(list) => {
            let mut out = Vec::with_capacity(list.len());
            for xs in list {
                if xs.len() != k {
                    return Err(Error::Domain(format!("shift tuple of length {} for k = {k}", xs.len())));
                }
                let mut count = 0u64;
                'z: for z in &sets[0] {
                    for (x, target) in xs.iter().zip(&sets[1..]) {
                        if !target.contains(&ring.combine(mode, z, x)?) {
                            continue 'z;
                        }
                    }
                    count += 1;
                }
                out.push((xs, count));
            }
            out
        }
        Shifts::All => {
            let requested = sets.iter().fold(1u128, |acc, s| acc.saturating_mul(s.len() as u128));
            if requested > cap {
                return Err(Error::CapExceeded { what: "correlation grid", requested, cap });
            }
            let mut counts: HashMap<Vec<Elem>, u64> = HashMap::new();
            let mut tuple = vec![Elem::zero(); k];
            for z in &sets[0] {
                all_shifts(&ring, mode, z, &sets[1..], 0, &mut tuple, &mut counts)?;
            }
            counts.into_iter().collect()
        }
    };
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(CorrelationTable { mode, k, entries })
}

fn all_shifts(
    ring: &AmbientRing,
    mode: Mode,
    z: &Elem,
    rest: &[FiniteSet],
    i: usize,
    tuple: &mut Vec<Elem>,
    counts: &mut HashMap<Vec<Elem>, u64>,
) -> Result<()> {
    if i == rest.len() {
        *counts.entry(tuple.clone()).or_insert(0) += 1;
        return Ok(());
    }
    for a in &rest[i] {
        tuple[i] = ring.quotient(mode, a, z)?;
        all_shifts(ring, mode, z, rest, i + 1, tuple, counts)?;
    }
    Ok(())
}
