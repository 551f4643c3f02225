//! The streaming pair kernel.
//!
//! Integer inputs are merged row by row with a binary heap. When every input
//! fits a machine key (`i128`, a small fraction, or a fixed 576-bit integer)
//! the merge runs on that key and converts back to [`Elem`] only when the
//! caller wants elements.

use std::cmp::{Ordering, Reverse};
use std::collections::binary_heap::{BinaryHeap, PeekMut};

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::ToPrimitive;

use super::PairOp;
use crate::error::{Error, Result};
use crate::numeric::{AmbientRing, Elem};

/// Largest modulus counted with a dense residue table.
const DENSE_FIELD_LIMIT: u64 = 1 << 22;

/// Cap on materialized pair lists for large-modulus fields.
const FIELD_PAIR_CAP: u128 = 1 << 28;

/// Magnitude limit for the fraction key, so cross products fit `i128`.
const FRAC_BITS: u64 = 62;

/// Magnitude limit for the wide key.
const WIDE_BITS: u64 = 570;
const LIMBS: usize = 9;

/// Receives `(element, weight)` pairs, or only weights.
pub(crate) enum Sink<'a> {
    Full(&'a mut dyn FnMut(Elem, u64) -> Result<()>),
    Counts(&'a mut dyn FnMut(u64) -> Result<()>),
}

impl Sink<'_> {
    fn emit<K: Key>(&mut self, k: &K, c: u64) -> Result<()> {
        match self {
            Sink::Full(f) => f(k.to_elem(), c),
            Sink::Counts(f) => f(c),
        }
    }
}

trait Key: Ord + Clone {
    fn to_elem(&self) -> Elem;
}

impl Key for Elem {
    fn to_elem(&self) -> Elem {
        self.clone()
    }
}

impl Key for i128 {
    fn to_elem(&self) -> Elem {
        Elem::from_i128(*self)
    }
}

/// `n / d` with `d > 0`, not necessarily reduced.
#[derive(Clone, Copy, Debug)]
struct Frac {
    n: i128,
    d: i128,
}

impl Ord for Frac {
    fn cmp(&self, o: &Self) -> Ordering {
        (self.n * o.d).cmp(&(o.n * self.d))
    }
}

impl PartialOrd for Frac {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl PartialEq for Frac {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}

impl Eq for Frac {}

impl Key for Frac {
    fn to_elem(&self) -> Elem {
        Elem::frac_i128(self.n, self.d)
    }
}

/// Exact product of two `i128` values as a signed 256-bit integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Prod256 {
    hi: i128,
    lo: u128,
}

impl Prod256 {
    fn mul(x: i128, y: i128) -> Prod256 {
        const MASK: u128 = u64::MAX as u128;
        let (a, b) = (x.unsigned_abs(), y.unsigned_abs());
        let (a1, a0, b1, b0) = (a >> 64, a & MASK, b >> 64, b & MASK);
        let (p00, p01, p10, p11) = (a0 * b0, a0 * b1, a1 * b0, a1 * b1);
        let mid = (p00 >> 64) + (p01 & MASK) + (p10 & MASK);
        let lo = (p00 & MASK) | (mid << 64);
        let hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);
        if (x < 0) != (y < 0) {
            Prod256 { hi: (!hi).wrapping_add(u128::from(lo == 0)) as i128, lo: (!lo).wrapping_add(1) }
        } else {
            Prod256 { hi: hi as i128, lo }
        }
    }
}

impl Key for Prod256 {
    fn to_elem(&self) -> Elem {
        Elem::from_bigint((BigInt::from(self.hi) << 128) + BigInt::from(self.lo))
    }
}

/// `x + 2^575 mod 2^576`, big-endian limbs; unsigned order equals signed order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Wide([u64; LIMBS]);

const TOP: u64 = 1 << 63;

impl Wide {
    fn from_bigint(v: &BigInt) -> Wide {
        let (sign, mag) = v.to_u64_digits();
        let mut limbs = [0u64; LIMBS];
        for (i, m) in mag.iter().enumerate() {
            limbs[LIMBS - 1 - i] = *m;
        }
        let w = Wide(limbs);
        let w = if sign == Sign::Minus { w.neg() } else { w };
        let mut out = w.0;
        out[0] ^= TOP;
        Wide(out)
    }

    fn add(&self, o: &Wide) -> Wide {
        let mut out = [0u64; LIMBS];
        let mut carry = false;
        for i in (0..LIMBS).rev() {
            let (s, c1) = self.0[i].overflowing_add(o.0[i]);
            let (s, c2) = s.overflowing_add(u64::from(carry));
            out[i] = s;
            carry = c1 || c2;
        }
        out[0] ^= TOP;
        Wide(out)
    }

    /// Two's complement negation mod `2^576`; maps the encoding of `x` to that of `−x`.
    fn neg(&self) -> Wide {
        let mut out = [0u64; LIMBS];
        let mut carry = true;
        for i in (0..LIMBS).rev() {
            let (s, c) = (!self.0[i]).overflowing_add(u64::from(carry));
            out[i] = s;
            carry = c;
        }
        Wide(out)
    }
}

impl Key for Wide {
    fn to_elem(&self) -> Elem {
        let mut limbs = self.0;
        limbs[0] ^= TOP;
        let negative = limbs[0] & TOP != 0;
        let bytes: Vec<u8> = limbs.iter().flat_map(|l| l.to_be_bytes()).collect();
        let mut v = BigInt::from_biguint(Sign::Plus, BigUint::from_bytes_be(&bytes));
        if negative {
            v -= BigInt::from(1u8) << (64 * LIMBS);
        }
        Elem::from_bigint(v)
    }
}

fn overflow() -> Error {
    Error::Overflow("multiplicity")
}

fn mass(mut ws: impl Iterator<Item = u64>) -> Result<u64> {
    ws.try_fold(0u64, |acc, w| acc.checked_add(w).ok_or_else(overflow))
}

/// A k-way merge of `rows` ascending rows of length `n` plus an optional
/// constant row, emitting each distinct key once with its summed weight.
fn merge<K: Key>(
    rows: usize,
    n: usize,
    value: impl Fn(usize, usize) -> K,
    weight: impl Fn(usize, usize) -> Result<u64>,
    constant: Option<(K, u64)>,
    sink: &mut Sink,
) -> Result<()> {
    let mut heap = BinaryHeap::with_capacity(rows + 1);
    if n > 0 {
        for row in 0..rows {
            heap.push(Reverse((value(row, 0), row as u32, 0u32)));
        }
    }
    let const_weight = match constant {
        Some((k, w)) if w > 0 => {
            heap.push(Reverse((k, u32::MAX, 0)));
            w
        }
        _ => 0,
    };
    let mut current: Option<(K, u64)> = None;
    while let Some(mut top) = heap.peek_mut() {
        let Reverse((v, row, pos)) = &*top;
        let (v, row, pos) = (v.clone(), *row, *pos);
        let w = if row == u32::MAX {
            PeekMut::pop(top);
            const_weight
        } else {
            let (r, p) = (row as usize, pos as usize);
            if p + 1 < n {
                *top = Reverse((value(r, p + 1), row, pos + 1));
            } else {
                PeekMut::pop(top);
            }
            weight(r, p)?
        };
        match &mut current {
            Some((cv, cw)) if *cv == v => *cw = cw.checked_add(w).ok_or_else(overflow)?,
            _ => {
                if let Some((cv, cw)) = current.take() {
                    sink.emit(&cv, cw)?;
                }
                current = Some((v, w));
            }
        }
    }
    if let Some((cv, cw)) = current {
        sink.emit(&cv, cw)?;
    }
    Ok(())
}

/// Distinct values of a triangular family: row `r` holds `value(r, 0..len(r))`,
/// each ascending.
fn count_triangle<K: Ord + Clone>(rows: usize, len: impl Fn(usize) -> usize, value: impl Fn(usize, usize) -> K) -> u64 {
    let mut heap: BinaryHeap<Reverse<(K, u32, u32)>> =
        (0..rows).filter(|&r| len(r) > 0).map(|r| Reverse((value(r, 0), r as u32, 0))).collect();
    let mut count = 0u64;
    let mut last: Option<K> = None;
    while let Some(mut top) = heap.peek_mut() {
        let Reverse((v, row, pos)) = &*top;
        let (row, pos) = (*row as usize, *pos as usize);
        if last.as_ref() != Some(v) {
            count += 1;
            last = Some(v.clone());
        }
        if pos + 1 < len(row) {
            *top = Reverse((value(row, pos + 1), row as u32, pos as u32 + 1));
        } else {
            PeekMut::pop(top);
        }
    }
    count
}

/// `|A ∘ A|` over the integers from half of the pairs: `i ≤ j` for sums
/// and products, the positive half for differences and ratios. `None` when
/// no shortcut applies.
pub(crate) fn self_size(ring: &AmbientRing, op: PairOp, a: &[Elem]) -> Option<u64> {
    let AmbientRing::Integers { cap_bits } = ring else {
        return None;
    };
    let n = a.len();
    if n == 0 {
        return Some(0);
    }
    let small: Option<Vec<i128>> = a.iter().map(|e| e.as_i64().map(i128::from)).collect();
    let positive = small.as_ref().is_some_and(|v| v[0] > 0);
    match (op, small) {
        (PairOp::Sum, Some(v)) => Some(count_triangle(n, |r| n - r, |r, p| v[r] + v[r + p])),
        (PairOp::Prod, Some(v)) if positive => Some(count_triangle(n, |r| n - r, |r, p| v[r] * v[r + p])),
        (PairOp::Diff, Some(v)) => Some(2 * count_triangle(n, |r| r, |r, p| v[r] - v[r - 1 - p]) + 1),
        (PairOp::Ratio, Some(v)) if positive && v[n - 1] < 1 << FRAC_BITS => {
            Some(2 * count_triangle(n, |r| r, |r, p| Frac { n: v[r], d: v[r - 1 - p] }) + 1)
        }
        (PairOp::Sum | PairOp::Diff, None) => {
            let limit = WIDE_BITS.min(u64::from(*cap_bits).saturating_sub(1));
            if !a.iter().all(|e| e.is_integer() && e.bits() <= limit) {
                return None;
            }
            let w: Vec<Wide> = a.iter().map(|e| Wide::from_bigint(&e.to_bigint().expect("integer"))).collect();
            if op == PairOp::Sum {
                Some(count_triangle(n, |r| n - r, |r, p| w[r].add(&w[r + p])))
            } else {
                let neg: Vec<Wide> = w.iter().map(Wide::neg).collect();
                Some(2 * count_triangle(n, |r| r, |r, p| w[r].add(&neg[r - 1 - p])) + 1)
            }
        }
        _ => None,
    }
}

/// Emits every distinct `a ∘ b` with its total weight `Σ w_a w_b`, in
/// ascending element order for integer rings.
pub(crate) fn stream(
    ring: &AmbientRing,
    op: PairOp,
    a: &[(Elem, u64)],
    b: &[(Elem, u64)],
    sink: &mut Sink,
) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Ok(());
    }
    match ring {
        AmbientRing::PrimeField { p } => {
            let (is_prod, rhs) = lower(ring, op, b)?;
            stream_field(*p, is_prod, a, &rhs, sink)
        }
        AmbientRing::Integers { cap_bits } => {
            let small =
                |s: &[(Elem, u64)]| s.iter().map(|(e, w)| e.as_i64().map(|v| (v, *w))).collect::<Option<Vec<_>>>();
            if let (Some(sa), Some(sb)) = (small(a), small(b)) {
                let fits = |s: &[(i64, u64)]| s.iter().all(|(v, _)| v.unsigned_abs() < 1 << FRAC_BITS);
                if op != PairOp::Ratio {
                    return stream_i128(op, &sa, &sb, sink);
                }
                if fits(&sa) && fits(&sb) {
                    return stream_ratio(&sa, &sb, sink);
                }
            }
            let wide = |s: &[(Elem, u64)]| {
                s.iter()
                    .map(|(e, w)| e.to_bigint().and_then(|v| v.to_i128()).map(|v| (v, *w)))
                    .collect::<Option<Vec<_>>>()
            };
            let max_bits = |s: &[(Elem, u64)]| s.iter().map(|(e, _)| e.bits()).max().unwrap_or(0);
            if op == PairOp::Prod && max_bits(a) + max_bits(b) <= u64::from(*cap_bits) {
                if let (Some(wa), Some(wb)) = (wide(a), wide(b)) {
                    return stream_prod256(&wa, &wb, sink);
                }
            }
            // one bit of headroom keeps every sum within the ring's cap
            let limit = WIDE_BITS.min(u64::from(*cap_bits).saturating_sub(1));
            let wide_ok = |s: &[(Elem, u64)]| s.iter().all(|(e, _)| e.is_integer() && e.bits() <= limit);
            if matches!(op, PairOp::Sum | PairOp::Diff) && wide_ok(a) && wide_ok(b) {
                return stream_wide(op, a, b, sink);
            }
            let (is_prod, rhs) = lower(ring, op, b)?;
            if rhs.is_empty() {
                return Ok(());
            }
            stream_elems(ring, is_prod, a, &rhs, sink)
        }
    }
}

/// Lowers `op` to `Sum`/`Prod` by transforming the right operand.
fn lower(ring: &AmbientRing, op: PairOp, b: &[(Elem, u64)]) -> Result<(bool, Vec<(Elem, u64)>)> {
    let (is_prod, mut rhs) = match op {
        PairOp::Sum => (false, b.to_vec()),
        PairOp::Prod => (true, b.to_vec()),
        PairOp::Diff => (false, b.iter().map(|(e, w)| Ok((ring.neg(e)?, *w))).collect::<Result<Vec<_>>>()?),
        PairOp::Ratio => (
            true,
            b.iter()
                .filter(|(e, _)| !e.is_zero())
                .map(|(e, w)| Ok((ring.recip(e)?, *w)))
                .collect::<Result<Vec<_>>>()?,
        ),
    };
    rhs.sort_by(|x, y| x.0.cmp(&y.0));
    Ok((is_prod, rhs))
}

fn stream_i128(op: PairOp, a: &[(i64, u64)], b: &[(i64, u64)], sink: &mut Sink) -> Result<()> {
    let mut rhs: Vec<(i128, u64)> = b.iter().map(|&(v, w)| (i128::from(v), w)).collect();
    if op == PairOp::Diff {
        rhs.iter_mut().for_each(|e| e.0 = -e.0);
    }
    rhs.sort_unstable_by_key(|e| e.0);
    let n = rhs.len();
    let is_prod = op == PairOp::Prod;
    let rows: Vec<(i128, u64)> =
        a.iter().filter(|(v, _)| !(is_prod && *v == 0)).map(|&(v, w)| (i128::from(v), w)).collect();
    let constant = if is_prod {
        let zero_rows = mass(a.iter().filter(|(v, _)| *v == 0).map(|e| e.1))?;
        Some((0i128, zero_rows.checked_mul(mass(rhs.iter().map(|e| e.1))?).ok_or_else(overflow)?))
    } else {
        None
    };
    let at = |r: usize, p: usize| if is_prod && rows[r].0 < 0 { n - 1 - p } else { p };
    merge(
        rows.len(),
        n,
        |r, p| if is_prod { rows[r].0 * rhs[at(r, p)].0 } else { rows[r].0 + rhs[at(r, p)].0 },
        |r, p| rows[r].1.checked_mul(rhs[at(r, p)].1).ok_or_else(overflow),
        constant,
        sink,
    )
}

fn stream_prod256(a: &[(i128, u64)], b: &[(i128, u64)], sink: &mut Sink) -> Result<()> {
    let mut rhs = b.to_vec();
    rhs.sort_unstable_by_key(|e| e.0);
    let n = rhs.len();
    let rows: Vec<(i128, u64)> = a.iter().copied().filter(|(v, _)| *v != 0).collect();
    let zero_rows = mass(a.iter().filter(|(v, _)| *v == 0).map(|e| e.1))?;
    let constant =
        Some((Prod256::mul(0, 0), zero_rows.checked_mul(mass(rhs.iter().map(|e| e.1))?).ok_or_else(overflow)?));
    let at = |r: usize, p: usize| if rows[r].0 < 0 { n - 1 - p } else { p };
    merge(
        rows.len(),
        n,
        |r, p| Prod256::mul(rows[r].0, rhs[at(r, p)].0),
        |r, p| rows[r].1.checked_mul(rhs[at(r, p)].1).ok_or_else(overflow),
        constant,
        sink,
    )
}

fn stream_ratio(a: &[(i64, u64)], b: &[(i64, u64)], sink: &mut Sink) -> Result<()> {
    let mut rhs: Vec<(Frac, u64)> = b
        .iter()
        .filter(|(v, _)| *v != 0)
        .map(|&(v, w)| (Frac { n: i128::from(v.signum()), d: i128::from(v.unsigned_abs()) }, w))
        .collect();
    if rhs.is_empty() {
        return Ok(());
    }
    rhs.sort_unstable_by_key(|x| x.0);
    let n = rhs.len();
    let rows: Vec<(i128, u64)> = a.iter().filter(|(v, _)| *v != 0).map(|&(v, w)| (i128::from(v), w)).collect();
    let zero_rows = mass(a.iter().filter(|(v, _)| *v == 0).map(|e| e.1))?;
    let constant =
        Some((Frac { n: 0, d: 1 }, zero_rows.checked_mul(mass(rhs.iter().map(|e| e.1))?).ok_or_else(overflow)?));
    let at = |r: usize, p: usize| if rows[r].0 < 0 { n - 1 - p } else { p };
    merge(
        rows.len(),
        n,
        |r, p| {
            let f = rhs[at(r, p)].0;
            Frac { n: rows[r].0 * f.n, d: f.d }
        },
        |r, p| rows[r].1.checked_mul(rhs[at(r, p)].1).ok_or_else(overflow),
        constant,
        sink,
    )
}

fn stream_wide(op: PairOp, a: &[(Elem, u64)], b: &[(Elem, u64)], sink: &mut Sink) -> Result<()> {
    let enc = |e: &Elem| Wide::from_bigint(&e.to_bigint().expect("integer"));
    let rows: Vec<(Wide, u64)> = a.iter().map(|(e, w)| (enc(e), *w)).collect();
    let mut rhs: Vec<(Wide, u64)> = b.iter().map(|(e, w)| (enc(e), *w)).collect();
    if op == PairOp::Diff {
        rhs.iter_mut().for_each(|e| e.0 = e.0.neg());
    }
    rhs.sort_unstable_by_key(|e| e.0);
    merge(
        rows.len(),
        rhs.len(),
        |r, p| rows[r].0.add(&rhs[p].0),
        |r, p| rows[r].1.checked_mul(rhs[p].1).ok_or_else(overflow),
        None,
        sink,
    )
}

fn stream_elems(
    ring: &AmbientRing,
    is_prod: bool,
    a: &[(Elem, u64)],
    rhs: &[(Elem, u64)],
    sink: &mut Sink,
) -> Result<()> {
    let n = rhs.len();
    let rows: Vec<&(Elem, u64)> = a.iter().filter(|(x, _)| !(is_prod && x.is_zero())).collect();
    let constant = if is_prod {
        let zero_rows = mass(a.iter().filter(|(x, _)| x.is_zero()).map(|e| e.1))?;
        Some((Elem::zero(), zero_rows.checked_mul(mass(rhs.iter().map(|e| e.1))?).ok_or_else(overflow)?))
    } else {
        None
    };
    // rows with a negative multiplier walk `rhs` from the top
    let at = |r: usize, p: usize| if is_prod && rows[r].0.signum() < 0 { n - 1 - p } else { p };
    merge(
        rows.len(),
        n,
        |r, p| {
            let (x, y) = (&rows[r].0, &rhs[at(r, p)].0);
            let v = if is_prod { ring.mul(x, y) } else { ring.add(x, y) };
            v.expect("integer arithmetic")
        },
        |r, p| rows[r].1.checked_mul(rhs[at(r, p)].1).ok_or_else(overflow),
        constant,
        sink,
    )
}

fn stream_field(p: u64, is_prod: bool, a: &[(Elem, u64)], rhs: &[(Elem, u64)], sink: &mut Sink) -> Result<()> {
    let res = |e: &Elem| e.as_i64().expect("field residue") as u64;
    let combine = |x: u64, y: u64| -> u64 {
        if is_prod {
            ((u128::from(x) * u128::from(y)) % u128::from(p)) as u64
        } else {
            let s = x + y;
            if s >= p {
                s - p
            } else {
                s
            }
        }
    };
    let lhs: Vec<(u64, u64)> = a.iter().map(|(e, w)| (res(e), *w)).collect();
    let rhs: Vec<(u64, u64)> = rhs.iter().map(|(e, w)| (res(e), *w)).collect();
    if p <= DENSE_FIELD_LIMIT {
        let mut table = vec![0u64; p as usize];
        for &(x, wx) in &lhs {
            for &(y, wy) in &rhs {
                let slot = &mut table[combine(x, y) as usize];
                *slot = slot.checked_add(wx.checked_mul(wy).ok_or_else(overflow)?).ok_or_else(overflow)?;
            }
        }
        for (v, &c) in table.iter().enumerate() {
            if c > 0 {
                sink.emit(&(v as i128), c)?;
            }
        }
        return Ok(());
    }
    let requested = lhs.len() as u128 * rhs.len() as u128;
    if requested > FIELD_PAIR_CAP {
        return Err(Error::CapExceeded { what: "field pair list", requested, cap: FIELD_PAIR_CAP });
    }
    let mut pairs = Vec::with_capacity(requested as usize);
    for &(x, wx) in &lhs {
        for &(y, wy) in &rhs {
            pairs.push((combine(x, y), wx.checked_mul(wy).ok_or_else(overflow)?));
        }
    }
    pairs.sort_unstable_by_key(|&(v, _)| v);
    let mut i = 0;
    while i < pairs.len() {
        let v = pairs[i].0;
        let mut c = 0u64;
        while i < pairs.len() && pairs[i].0 == v {
            c = c.checked_add(pairs[i].1).ok_or_else(overflow)?;
            i += 1;
        }
        sink.emit(&(v as i128), c)?;
    }
    Ok(())
}
