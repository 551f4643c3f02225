//! Exact arithmetic over the integers (with exact rationals where division
//! appears) and over prime fields `F_p`.
//!
//! Elements are stored in a small-value-optimized form: anything that fits
//! an `i64` (including every `F_p` residue) is held inline, larger integers
//! and rationals spill to arbitrary precision. Integer arithmetic never
//! wraps; results whose magnitude exceeds the ring's configured bit cap are
//! reported as [`Error::MagnitudeCap`].

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default magnitude cap for integer elements, in bits.
pub const DEFAULT_CAP_BITS: u32 = 512;

/// Group operation used by cubes, correlations and energies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Additive,
    Multiplicative,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Additive => "additive",
            Mode::Multiplicative => "multiplicative",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "additive" | "add" | "+" => Ok(Mode::Additive),
            "multiplicative" | "mul" | "mult" | "*" => Ok(Mode::Multiplicative),
            other => Err(Error::Parse(format!("unknown mode `{other}`"))),
        }
    }
}

/// An exact ring element.
///
/// Canonical form: `Int` iff the value is an integer fitting `i64`; `Big`
/// for other integers; `Frac` for non-integers whose reduced numerator and
/// denominator fit `i64` (denominator ≥ 2); `BigFrac` otherwise. Because the
/// form is canonical, derived equality and hashing are value equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Elem {
    Int(i64),
    Big(Arc<BigInt>),
    Frac(i64, i64),
    BigFrac(Arc<BigRational>),
}

impl Elem {
    pub fn zero() -> Self {
        Elem::Int(0)
    }

    pub fn one() -> Self {
        Elem::Int(1)
    }

    pub fn from_i128(v: i128) -> Self {
        match i64::try_from(v) {
            Ok(v) => Elem::Int(v),
            Err(_) => Elem::Big(Arc::new(BigInt::from(v))),
        }
    }

    pub fn from_bigint(v: BigInt) -> Self {
        match v.to_i64() {
            Some(v) => Elem::Int(v),
            None => Elem::Big(Arc::new(v)),
        }
    }

    pub fn from_ratio(v: BigRational) -> Self {
        if v.is_integer() {
            return Elem::from_bigint(v.to_integer());
        }
        match (v.numer().to_i64(), v.denom().to_i64()) {
            (Some(n), Some(d)) => Elem::Frac(n, d),
            _ => Elem::BigFrac(Arc::new(v)),
        }
    }

    /// Exact `num / den` in lowest terms. Panics if `den == 0`.
    pub fn frac_i128(num: i128, den: i128) -> Self {
        assert!(den != 0, "zero denominator");
        if num == 0 {
            return Elem::Int(0);
        }
        let g = num.gcd(&den);
        let (mut n, mut d) = (num / g, den / g);
        if d < 0 {
            // |n|, |d| < 2^127 after reduction unless the input was i128::MIN
            match (n.checked_neg(), d.checked_neg()) {
                (Some(nn), Some(dd)) => {
                    n = nn;
                    d = dd;
                }
                _ => return Elem::from_ratio(BigRational::new(BigInt::from(num), BigInt::from(den))),
            }
        }
        if d == 1 {
            return Elem::from_i128(n);
        }
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(n), Ok(d)) => Elem::Frac(n, d),
            _ => Elem::BigFrac(Arc::new(BigRational::new_raw(BigInt::from(n), BigInt::from(d)))),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Elem::Int(0))
    }

    pub fn is_integer(&self) -> bool {
        matches!(self, Elem::Int(_) | Elem::Big(_))
    }

    pub fn signum(&self) -> i32 {
        match self {
            Elem::Int(v) => v.signum() as i32,
            Elem::Big(v) => sign_of(v),
            Elem::Frac(n, _) => n.signum() as i32,
            Elem::BigFrac(v) => sign_of(v.numer()),
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Elem::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn to_bigint(&self) -> Option<BigInt> {
        match self {
            Elem::Int(v) => Some(BigInt::from(*v)),
            Elem::Big(v) => Some((**v).clone()),
            _ => None,
        }
    }

    pub fn to_ratio(&self) -> BigRational {
        match self {
            Elem::Int(v) => BigRational::from_integer(BigInt::from(*v)),
            Elem::Big(v) => BigRational::from_integer((**v).clone()),
            Elem::Frac(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Elem::BigFrac(v) => (**v).clone(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Elem::Int(v) => *v as f64,
            Elem::Frac(n, d) => *n as f64 / *d as f64,
            other => other.to_ratio().to_f64().unwrap_or(f64::NAN),
        }
    }

    /// Bit length of the largest of numerator and denominator magnitudes.
    pub fn bits(&self) -> u64 {
        fn small(v: i64) -> u64 {
            64 - u64::from(v.unsigned_abs().leading_zeros())
        }
        match self {
            Elem::Int(v) => small(*v),
            Elem::Big(v) => v.bits(),
            Elem::Frac(n, d) => small(*n).max(small(*d)),
            Elem::BigFrac(v) => v.numer().bits().max(v.denom().bits()),
        }
    }

    /// Numerator/denominator pair when both fit `i64`.
    fn small_parts(&self) -> Option<(i64, i64)> {
        match self {
            Elem::Int(v) => Some((*v, 1)),
            Elem::Frac(n, d) => Some((*n, *d)),
            _ => None,
        }
    }
}

fn sign_of(v: &BigInt) -> i32 {
    if v.is_positive() {
        1
    } else if v.is_negative() {
        -1
    } else {
        0
    }
}

impl Ord for Elem {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Elem::Int(a), Elem::Int(b)) => a.cmp(b),
            (Elem::Big(a), Elem::Big(b)) => a.cmp(b),
            // a `Big` never fits i64, so its sign decides
            (Elem::Int(_), Elem::Big(b)) => 0.cmp(&sign_of(b)),
            (Elem::Big(a), Elem::Int(_)) => sign_of(a).cmp(&0),
            _ => match (self.small_parts(), other.small_parts()) {
                (Some((n1, d1)), Some((n2, d2))) => {
                    (i128::from(n1) * i128::from(d2)).cmp(&(i128::from(n2) * i128::from(d1)))
                }
                _ => self.to_ratio().cmp(&other.to_ratio()),
            },
        }
    }
}

impl PartialOrd for Elem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<i64> for Elem {
    fn from(v: i64) -> Self {
        Elem::Int(v)
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Elem::Int(v) => write!(f, "{v}"),
            Elem::Big(v) => write!(f, "{v}"),
            Elem::Frac(n, d) => write!(f, "{n}/{d}"),
            Elem::BigFrac(v) => write!(f, "{}/{}", v.numer(), v.denom()),
        }
    }
}

impl fmt::Debug for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Elem {
    type Err = Error;

    /// Parses a decimal integer or an exact fraction `num/den`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse_int = |t: &str| -> Result<BigInt> {
            BigInt::from_str(t.trim()).map_err(|_| Error::Parse(format!("not an integer: `{t}`")))
        };
        match s.split_once('/') {
            None => Ok(Elem::from_bigint(parse_int(s)?)),
            Some((n, d)) => {
                let (n, d) = (parse_int(n)?, parse_int(d)?);
                if d.is_zero() {
                    return Err(Error::ZeroDivisor);
                }
                Ok(Elem::from_ratio(BigRational::new(n, d)))
            }
        }
    }
}

impl Serialize for Elem {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Elem {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(Elem::Int(v)),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Deterministic Miller–Rabin, exact for every `u64`.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &q in &SMALL {
        if n.is_multiple_of(q) {
            return n == q;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        r += 1;
    }
    'witness: for &a in &SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((u128::from(a) * u128::from(b)) % u128::from(m)) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// The ambient structure all element arithmetic flows through.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", try_from = "RingRepr")]
pub enum AmbientRing {
    Integers {
        #[serde(skip_serializing_if = "is_default_cap")]
        cap_bits: u32,
    },
    PrimeField {
        p: u64,
    },
}

fn is_default_cap(bits: &u32) -> bool {
    *bits == DEFAULT_CAP_BITS
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum RingRepr {
    Integers {
        #[serde(default = "default_cap")]
        cap_bits: u32,
    },
    PrimeField {
        p: u64,
    },
}

fn default_cap() -> u32 {
    DEFAULT_CAP_BITS
}

impl TryFrom<RingRepr> for AmbientRing {
    type Error = Error;

    fn try_from(r: RingRepr) -> Result<Self> {
        match r {
            RingRepr::Integers { cap_bits } => Ok(AmbientRing::Integers { cap_bits }),
            RingRepr::PrimeField { p } => AmbientRing::prime_field(p),
        }
    }
}

impl Default for AmbientRing {
    fn default() -> Self {
        AmbientRing::integers()
    }
}

impl fmt::Display for AmbientRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AmbientRing::Integers { .. } => write!(f, "Z"),
            AmbientRing::PrimeField { p } => write!(f, "F_{p}"),
        }
    }
}

impl AmbientRing {
    pub fn integers() -> Self {
        AmbientRing::Integers { cap_bits: DEFAULT_CAP_BITS }
    }

    pub fn integers_with_cap(cap_bits: u32) -> Self {
        AmbientRing::Integers { cap_bits }
    }

    /// `F_p` for an odd prime `p < 2^63`.
    pub fn prime_field(p: u64) -> Result<Self> {
        if !(3..1 << 63).contains(&p) || !is_prime_u64(p) {
            return Err(Error::InvalidModulus(p));
        }
        Ok(AmbientRing::PrimeField { p })
    }

    pub fn modulus(&self) -> Option<u64> {
        match self {
            AmbientRing::PrimeField { p } => Some(*p),
            AmbientRing::Integers { .. } => None,
        }
    }

    pub fn is_field(&self) -> bool {
        matches!(self, AmbientRing::PrimeField { .. })
    }

    /// Same structure, ignoring the integer magnitude cap.
    pub fn same_kind(&self, other: &AmbientRing) -> bool {
        match (self, other) {
            (AmbientRing::Integers { .. }, AmbientRing::Integers { .. }) => true,
            (AmbientRing::PrimeField { p }, AmbientRing::PrimeField { p: q }) => p == q,
            _ => false,
        }
    }

    pub fn elem(&self, v: i64) -> Elem {
        match self {
            AmbientRing::Integers { .. } => Elem::Int(v),
            AmbientRing::PrimeField { p } => Elem::Int(v.rem_euclid(*p as i64)),
        }
    }

    /// Brings an arbitrary exact value into the ring: `F_p` values are
    /// reduced (fractions map to `num · den⁻¹`), integer values are cap-checked.
    pub fn reduce(&self, e: Elem) -> Result<Elem> {
        match self {
            AmbientRing::Integers { .. } => self.capped(e),
            AmbientRing::PrimeField { p } => {
                let p = *p;
                let residue = |v: &BigInt| -> u64 { v.mod_floor(&BigInt::from(p)).to_u64().expect("residue below p") };
                match e {
                    Elem::Int(v) => Ok(Elem::Int(v.rem_euclid(p as i64))),
                    Elem::Big(v) => Ok(Elem::Int(residue(&v) as i64)),
                    frac => {
                        let r = frac.to_ratio();
                        let n = residue(r.numer());
                        let d = residue(r.denom());
                        if d == 0 {
                            return Err(Error::ZeroDivisor);
                        }
                        Ok(Elem::Int(mul_mod(n, pow_mod(d, p - 2, p), p) as i64))
                    }
                }
            }
        }
    }

    pub fn parse(&self, s: &str) -> Result<Elem> {
        self.reduce(s.parse()?)
    }

    /// Checks that `e` is a canonical element of this ring.
    pub fn validate(&self, e: &Elem) -> Result<()> {
        match self {
            AmbientRing::Integers { .. } => self.capped(e.clone()).map(|_| ()),
            AmbientRing::PrimeField { p } => match e {
                Elem::Int(v) if *v >= 0 && (*v as u64) < *p => Ok(()),
                _ => Err(Error::RingMismatch),
            },
        }
    }

    fn capped(&self, e: Elem) -> Result<Elem> {
        if let AmbientRing::Integers { cap_bits } = self {
            let small = matches!(e, Elem::Int(_) | Elem::Frac(..));
            if !small || *cap_bits < 64 {
                let bits = e.bits();
                if bits > u64::from(*cap_bits) {
                    return Err(Error::MagnitudeCap { bits, cap_bits: *cap_bits });
                }
            }
        }
        Ok(e)
    }

    fn residue(e: &Elem) -> u64 {
        match e {
            Elem::Int(v) => *v as u64,
            other => panic!("non-canonical field element {other}"),
        }
    }

    pub fn add(&self, x: &Elem, y: &Elem) -> Result<Elem> {
        match self {
            AmbientRing::PrimeField { p } => {
                let s = (u128::from(Self::residue(x)) + u128::from(Self::residue(y))) % u128::from(*p);
                Ok(Elem::Int(s as i64))
            }
            AmbientRing::Integers { .. } => {
                if let (Elem::Int(a), Elem::Int(b)) = (x, y) {
                    return Ok(match a.checked_add(*b) {
                        Some(s) => Elem::Int(s),
                        None => Elem::from_i128(i128::from(*a) + i128::from(*b)),
                    });
                }
                let r = match (x.small_parts(), y.small_parts()) {
                    (Some((n1, d1)), Some((n2, d2))) => {
                        let (n1, d1, n2, d2) = (i128::from(n1), i128::from(d1), i128::from(n2), i128::from(d2));
                        match (n1 * d2).checked_add(n2 * d1) {
                            Some(n) => Elem::frac_i128(n, d1 * d2),
                            None => Elem::from_ratio(x.to_ratio() + y.to_ratio()),
                        }
                    }
                    _ => Elem::from_ratio(x.to_ratio() + y.to_ratio()),
                };
                self.capped(r)
            }
        }
    }

    pub fn neg(&self, x: &Elem) -> Result<Elem> {
        match self {
            AmbientRing::PrimeField { p } => {
                let v = Self::residue(x);
                Ok(Elem::Int(if v == 0 { 0 } else { (*p - v) as i64 }))
            }
            AmbientRing::Integers { .. } => Ok(match x {
                Elem::Int(v) => Elem::from_i128(-i128::from(*v)),
                Elem::Frac(n, d) => Elem::frac_i128(-i128::from(*n), i128::from(*d)),
                other => Elem::from_ratio(-other.to_ratio()),
            }),
        }
    }

    pub fn sub(&self, x: &Elem, y: &Elem) -> Result<Elem> {
        self.add(x, &self.neg(y)?)
    }

    pub fn mul(&self, x: &Elem, y: &Elem) -> Result<Elem> {
        match self {
            AmbientRing::PrimeField { p } => Ok(Elem::Int(mul_mod(Self::residue(x), Self::residue(y), *p) as i64)),
            AmbientRing::Integers { .. } => {
                let r = match (x.small_parts(), y.small_parts()) {
                    (Some((n1, 1)), Some((n2, 1))) => Elem::from_i128(i128::from(n1) * i128::from(n2)),
                    (Some((n1, d1)), Some((n2, d2))) => {
                        // cross-cancel first so both products fit i128
                        let g1 = i128::from(n1).gcd(&i128::from(d2)).max(1);
                        let g2 = i128::from(n2).gcd(&i128::from(d1)).max(1);
                        let n = (i128::from(n1) / g1) * (i128::from(n2) / g2);
                        let d = (i128::from(d1) / g2) * (i128::from(d2) / g1);
                        Elem::frac_i128(n, d)
                    }
                    _ => match (x, y) {
                        (Elem::Int(_) | Elem::Big(_), Elem::Int(_) | Elem::Big(_)) => {
                            Elem::from_bigint(x.to_bigint().unwrap() * y.to_bigint().unwrap())
                        }
                        _ => Elem::from_ratio(x.to_ratio() * y.to_ratio()),
                    },
                };
                self.capped(r)
            }
        }
    }

    /// Multiplicative inverse. Over the integers only `±1` are invertible.
    pub fn inv(&self, x: &Elem) -> Result<Elem> {
        if x.is_zero() {
            return Err(Error::InverseOfZero);
        }
        match self {
            AmbientRing::PrimeField { p } => Ok(Elem::Int(pow_mod(Self::residue(x), *p - 2, *p) as i64)),
            AmbientRing::Integers { .. } => match x {
                Elem::Int(1) | Elem::Int(-1) => Ok(x.clone()),
                other => Err(Error::NonUnit(other.to_string())),
            },
        }
    }

    /// Exact quotient: a field quotient in `F_p`, an exact rational over `Z`.
    pub fn div(&self, x: &Elem, y: &Elem) -> Result<Elem> {
        if y.is_zero() {
            return Err(Error::ZeroDivisor);
        }
        match self {
            AmbientRing::PrimeField { .. } => self.mul(x, &self.inv(y)?),
            AmbientRing::Integers { .. } => {
                let r = match (x.small_parts(), y.small_parts()) {
                    (Some((n1, d1)), Some((n2, d2))) => {
                        // (n1/d1) / (n2/d2) = (n1 d2) / (d1 n2), each factor < 2^63
                        Elem::frac_i128(i128::from(n1) * i128::from(d2), i128::from(d1) * i128::from(n2))
                    }
                    _ => Elem::from_ratio(x.to_ratio() / y.to_ratio()),
                };
                self.capped(r)
            }
        }
    }

    /// Reciprocal as a ring-or-rational value: `1/x`, exact over `Z`.
    pub fn recip(&self, x: &Elem) -> Result<Elem> {
        self.div(&Elem::one(), x)
    }

    /// `x ∘ y` for the group operation of `mode`.
    pub fn combine(&self, mode: Mode, x: &Elem, y: &Elem) -> Result<Elem> {
        match mode {
            Mode::Additive => self.add(x, y),
            Mode::Multiplicative => self.mul(x, y),
        }
    }

    /// `x ∘ y⁻¹`: `x − y` or `x / y`.
    pub fn quotient(&self, mode: Mode, x: &Elem, y: &Elem) -> Result<Elem> {
        match mode {
            Mode::Additive => self.sub(x, y),
            Mode::Multiplicative => self.div(x, y),
        }
    }

    /// `x^e` by repeated squaring.
    pub fn pow(&self, x: &Elem, mut e: u64) -> Result<Elem> {
        let mut acc = self.elem(1);
        let mut base = x.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base)?;
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base)?;
            }
        }
        Ok(acc)
    }

    pub fn scale(&self, x: &Elem, k: u64) -> Result<Elem> {
        let k = self.reduce(Elem::from_i128(i128::from(k)))?;
        self.mul(x, &k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn z() -> AmbientRing {
        AmbientRing::integers()
    }

    #[test]
    fn integer_examples() {
        let r = z();
        assert_eq!(r.add(&3.into(), &5.into()).unwrap(), Elem::Int(8));
        assert_eq!(r.add(&Elem::Int(17), &Elem::zero()).unwrap(), Elem::Int(17));
        assert_eq!(r.mul(&4.into(), &5.into()).unwrap(), Elem::Int(20));
        assert!(matches!(r.inv(&Elem::Int(2)), Err(Error::NonUnit(_))));
        assert_eq!(r.inv(&Elem::Int(-1)).unwrap(), Elem::Int(-1));
    }

    #[test]
    fn field_examples() {
        let f = AmbientRing::prime_field(7).unwrap();
        assert_eq!(f.add(&5.into(), &4.into()).unwrap(), Elem::Int(2));
        assert_eq!(f.inv(&3.into()).unwrap(), Elem::Int(5));
        assert!(matches!(f.inv(&Elem::zero()), Err(Error::InverseOfZero)));
        assert_eq!(f.elem(-1), Elem::Int(6));
        assert_eq!(f.parse("1/3").unwrap(), Elem::Int(5));
    }

    #[test]
    fn modulus_validation() {
        assert!(AmbientRing::prime_field(2).is_err());
        assert!(AmbientRing::prime_field(9).is_err());
        assert!(AmbientRing::prime_field(10007).is_ok());
        assert!(AmbientRing::prime_field((1 << 61) - 1).is_ok());
        assert!(is_prime_u64(18446744073709551557));
        assert!(!is_prime_u64(3215031751));
    }

    #[test]
    fn primality_matches_trial_division() {
        let trial = |n: u64| n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d));
        for n in 0..5000 {
            assert_eq!(is_prime_u64(n), trial(n), "n = {n}");
        }
    }

    #[test]
    fn inverse_exhaustive_small_primes() {
        for p in (3..=101u64).filter(|&p| is_prime_u64(p)) {
            let f = AmbientRing::prime_field(p).unwrap();
            for x in 1..p as i64 {
                let x = Elem::Int(x);
                assert_eq!(f.mul(&f.inv(&x).unwrap(), &x).unwrap(), Elem::one());
            }
        }
    }

    #[test]
    fn overflow_grows_precision_then_hits_cap() {
        let r = z();
        let big = r.mul(&Elem::Int(i64::MAX), &Elem::Int(i64::MAX)).unwrap();
        assert!(matches!(big, Elem::Big(_)));
        assert_eq!(big.bits(), 126);
        let two = Elem::Int(2);
        assert!(r.pow(&two, 512).is_err());
        assert_eq!(r.pow(&two, 511).unwrap().bits(), 512);
        let small = AmbientRing::integers_with_cap(10);
        assert!(small.mul(&Elem::Int(40), &Elem::Int(40)).is_err());
    }

    #[test]
    fn rationals_are_canonical() {
        let r = z();
        let a = r.div(&Elem::Int(4), &Elem::Int(6)).unwrap();
        assert_eq!(a, Elem::Frac(2, 3));
        assert_eq!(r.div(&Elem::Int(-4), &Elem::Int(-2)).unwrap(), Elem::Int(2));
        assert_eq!(r.div(&Elem::Int(3), &Elem::Int(-6)).unwrap(), Elem::Frac(-1, 2));
        assert_eq!(r.mul(&a, &Elem::Frac(3, 2)).unwrap(), Elem::one());
        assert_eq!(r.add(&Elem::Frac(1, 2), &Elem::Frac(1, 2)).unwrap(), Elem::one());
        assert!(Elem::Frac(-1, 2) < Elem::zero());
        assert!(Elem::Frac(5, 2) > Elem::Int(2));
        assert_eq!("7/-14".parse::<Elem>().unwrap(), Elem::Frac(-1, 2));
        assert_eq!(Elem::Frac(-1, 2).to_string(), "-1/2");
        assert!(matches!(r.div(&Elem::one(), &Elem::zero()), Err(Error::ZeroDivisor)));
    }

    #[test]
    fn serde_as_decimal_strings() {
        let e = Elem::from_bigint(BigInt::from(10).pow(30));
        let s = serde_json::to_string(&e).unwrap();
        assert_eq!(s, "\"1000000000000000000000000000000\"");
        assert_eq!(serde_json::from_str::<Elem>(&s).unwrap(), e);
        assert_eq!(serde_json::from_str::<Elem>("-3").unwrap(), Elem::Int(-3));
        let ring: AmbientRing = serde_json::from_str(r#"{"kind":"prime_field","p":7}"#).unwrap();
        assert_eq!(ring.modulus(), Some(7));
        assert!(serde_json::from_str::<AmbientRing>(r#"{"kind":"prime_field","p":8}"#).is_err());
        assert_eq!(serde_json::to_string(&z()).unwrap(), r#"{"kind":"integers"}"#);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn field_ops_match_bigint_reference(x in 0u64..1_000_000_007, y in 0u64..1_000_000_007) {
            let p = 1_000_000_007u64;
            let f = AmbientRing::prime_field(p).unwrap();
            let (bx, by, bp) = (BigInt::from(x), BigInt::from(y), BigInt::from(p));
            let (ex, ey) = (Elem::Int(x as i64), Elem::Int(y as i64));
            prop_assert_eq!(f.add(&ex, &ey).unwrap(), Elem::from_bigint((&bx + &by) % &bp));
            prop_assert_eq!(f.mul(&ex, &ey).unwrap(), Elem::from_bigint((&bx * &by) % &bp));
            prop_assert_eq!(f.sub(&ex, &ey).unwrap(), Elem::from_bigint((&bx - &by).mod_floor(&bp)));
        }
    }

    proptest! {
        #[test]
        fn integer_ops_match_bigint(x in any::<i64>(), y in any::<i64>()) {
            let r = z();
            let (bx, by) = (BigInt::from(x), BigInt::from(y));
            prop_assert_eq!(r.add(&x.into(), &y.into()).unwrap(), Elem::from_bigint(&bx + &by));
            prop_assert_eq!(r.sub(&x.into(), &y.into()).unwrap(), Elem::from_bigint(&bx - &by));
            prop_assert_eq!(r.mul(&x.into(), &y.into()).unwrap(), Elem::from_bigint(&bx * &by));
        }

        #[test]
        fn order_matches_rational_order(a in -1000i64..1000, b in 1i64..1000, c in -1000i64..1000, d in 1i64..1000) {
            let r = z();
            let x = r.div(&a.into(), &b.into()).unwrap();
            let y = r.div(&c.into(), &d.into()).unwrap();
            prop_assert_eq!(x.cmp(&y), x.to_ratio().cmp(&y.to_ratio()));
            prop_assert_eq!(x == y, x.to_ratio() == y.to_ratio());
        }
    }
}

/// Serde adapter writing `u128` as a decimal string.
pub mod decimal {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u128, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<u128, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// Serializes any `Display` value as a string.
pub fn serialize_display<T: fmt::Display, S: serde::Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}
