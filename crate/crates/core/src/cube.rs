//! Combinatorial (Hilbert) cubes.
//!
//! An additive cube is `{a0 + Σ ε_j a_j : ε ∈ D^d}` for a digit set `D ∋ 0`;
//! with `D = {0, …, h}` this is the height-`h` cube `Q_h`, and an arbitrary
//! `D` gives the missing-digit cube `Q_D`. A multiplicative cube is
//! `{a0 · Π a_j^{ε_j} : ε ∈ {0,1}^d}`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{AmbientRing, Elem, Mode};
use crate::set::FiniteSet;

/// Default cap on the number of digit vectors `|D|^d` a cube may enumerate.
pub const ENUMERATION_CAP: u128 = 1 << 24;

/// Largest dimension for which the exhaustive bipartition search runs.
pub const EXHAUSTIVE_SPLIT_MAX_DIM: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CubeSpecRepr")]
pub struct CubeSpec {
    pub mode: Mode,
    pub a0: Elem,
    pub generators: Vec<Elem>,
    pub digits: Vec<u64>,
    pub ring: AmbientRing,
}

#[derive(Deserialize)]
struct CubeSpecRepr {
    mode: Mode,
    a0: Elem,
    generators: Vec<Elem>,
    digits: Vec<u64>,
    ring: AmbientRing,
}

impl TryFrom<CubeSpecRepr> for CubeSpec {
    type Error = Error;

    fn try_from(r: CubeSpecRepr) -> Result<Self> {
        CubeSpec::new(r.ring, r.mode, r.a0, r.generators, r.digits)
    }
}

/// A bipartition `[d] = X ⊔ Y` with `|Q(X)| ≤ |Q(Y)| ≤ |D|·|Q(X)|`.
/// Indices are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HpSplit {
    pub x: Vec<usize>,
    pub y: Vec<usize>,
    pub x_size: usize,
    pub y_size: usize,
}

impl CubeSpec {
    /// Validates and canonicalizes: values are reduced into `ring`, digits
    /// sorted and deduplicated.
    pub fn new(ring: AmbientRing, mode: Mode, a0: Elem, generators: Vec<Elem>, mut digits: Vec<u64>) -> Result<Self> {
        digits.sort_unstable();
        digits.dedup();
        let a0 = ring.reduce(a0)?;
        let generators = generators.into_iter().map(|g| ring.reduce(g)).collect::<Result<Vec<_>>>()?;
        if !a0.is_integer() || generators.iter().any(|g| !g.is_integer()) {
            return Err(Error::InvalidSpec("cube values must be integers".into()));
        }
        if digits.first() != Some(&0) {
            return Err(Error::InvalidSpec("digit set must contain 0".into()));
        }
        if digits.len() < 2 {
            return Err(Error::InvalidSpec("digit set needs at least two digits".into()));
        }
        if let Some(j) = generators.iter().position(Elem::is_zero) {
            return Err(Error::InvalidSpec(format!("generator a_{} is zero", j + 1)));
        }
        if mode == Mode::Multiplicative {
            if digits != [0, 1] {
                return Err(Error::InvalidSpec("multiplicative cubes use exponents {0,1}".into()));
            }
            if a0.is_zero() {
                return Err(Error::InvalidSpec("multiplicative cube needs a0 ≠ 0".into()));
            }
        }
        Ok(CubeSpec { mode, a0, generators, digits, ring })
    }

    pub fn additive(ring: AmbientRing, a0: i64, generators: &[i64], digits: &[u64]) -> Result<Self> {
        CubeSpec::new(
            ring,
            Mode::Additive,
            Elem::Int(a0),
            generators.iter().map(|&g| Elem::Int(g)).collect(),
            digits.to_vec(),
        )
    }

    /// Height-`h` additive cube, digits `{0, …, h}`.
    pub fn with_height(ring: AmbientRing, a0: i64, generators: &[i64], h: u64) -> Result<Self> {
        Self::additive(ring, a0, generators, &(0..=h).collect::<Vec<_>>())
    }

    pub fn multiplicative(ring: AmbientRing, a0: i64, generators: &[i64]) -> Result<Self> {
        CubeSpec::new(
            ring,
            Mode::Multiplicative,
            Elem::Int(a0),
            generators.iter().map(|&g| Elem::Int(g)).collect(),
            vec![0, 1],
        )
    }

    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    /// `h` when the digit set is the interval `{0, …, h}`.
    pub fn height(&self) -> Option<u64> {
        let h = *self.digits.last()?;
        (self.digits.len() as u64 == h + 1).then_some(h)
    }

    /// `|D|^d`, saturating.
    pub fn digit_vectors(&self) -> u128 {
        (self.digits.len() as u128).saturating_pow(self.dim() as u32)
    }

    /// Value of the cube point with digit vector `eps`.
    pub fn point(&self, eps: &[u64]) -> Result<Elem> {
        assert_eq!(eps.len(), self.dim(), "digit vector length");
        let r = &self.ring;
        let mut acc = self.a0.clone();
        for (g, &e) in self.generators.iter().zip(eps) {
            acc = match self.mode {
                Mode::Additive => r.add(&acc, &r.scale(g, e)?)?,
                Mode::Multiplicative => r.mul(&acc, &r.pow(g, e)?)?,
            };
        }
        Ok(acc)
    }

    pub fn enumerate(&self) -> Result<FiniteSet> {
        self.enumerate_with_cap(ENUMERATION_CAP)
    }

    /// The deduplicated cube. Built one generator at a time, so intermediate
    /// collisions are merged early.
    pub fn enumerate_with_cap(&self, cap: u128) -> Result<FiniteSet> {
        let requested = self.digit_vectors();
        if requested > cap {
            return Err(Error::CapExceeded { what: "cube digit vectors", requested, cap });
        }
        let mut set = FiniteSet::singleton(self.ring, self.a0.clone());
        for g in &self.generators {
            set = self.extend(&set, g)?;
        }
        Ok(set)
    }

    /// `S ∘ {g^δ : δ ∈ D}` in the cube's mode.
    fn extend(&self, set: &FiniteSet, g: &Elem) -> Result<FiniteSet> {
        let r = &self.ring;
        let steps = self
            .digits
            .iter()
            .map(|&d| match self.mode {
                Mode::Additive => r.scale(g, d),
                Mode::Multiplicative => r.pow(g, d),
            })
            .collect::<Result<Vec<_>>>()?;
        let mut out = Vec::with_capacity(set.len() * steps.len());
        for s in set {
            for step in &steps {
                out.push(r.combine(self.mode, s, step)?);
            }
        }
        Ok(FiniteSet::from_unsorted(self.ring, out))
    }

    /// `|Q| = |D|^d`.
    pub fn is_proper(&self) -> Result<bool> {
        Ok(self.enumerate()?.len() as u128 == self.digit_vectors())
    }

    /// The subcube `Q(X)`: only generators indexed by `X` (1-based) may carry
    /// a nonzero digit.
    pub fn subcube(&self, x: &[usize]) -> Result<CubeSpec> {
        let mut idx = x.to_vec();
        idx.sort_unstable();
        idx.dedup();
        for &i in &idx {
            if i == 0 || i > self.dim() {
                return Err(Error::IndexOutOfRange { index: i, dim: self.dim() });
            }
        }
        Ok(CubeSpec { generators: idx.iter().map(|&i| self.generators[i - 1].clone()).collect(), ..self.clone() })
    }

    /// The centre `U + 2a0`, `U = h Σ a_j`, about which an interval-digit
    /// additive cube is symmetric: `Q_h = (U + 2a0) − Q_h`.
    pub fn symmetry_witness(&self) -> Result<Elem> {
        if self.mode != Mode::Additive {
            return Err(Error::ModeMismatch { expected: "additive" });
        }
        let h = self.height().ok_or(Error::NonIntervalDigits)?;
        let r = &self.ring;
        let mut u = r.elem(0);
        for g in &self.generators {
            u = r.add(&u, g)?;
        }
        let u = r.scale(&u, h)?;
        r.add(&u, &r.scale(&self.a0, 2)?)
    }

    /// Reflects the enumerated cube about its witness and compares.
    pub fn check_symmetry(&self) -> Result<bool> {
        let c = self.symmetry_witness()?;
        let q = self.enumerate()?;
        if let AmbientRing::Integers { .. } = self.ring {
            // sorted integers: symmetric about c iff x_i + x_{n−1−i} = c
            let xs = q.elements();
            for (x, y) in xs.iter().zip(xs.iter().rev()) {
                if self.ring.add(x, y)? != c {
                    return Ok(false);
                }
            }
            return Ok(true);
        }
        Ok(q.reflect(&c)? == q)
    }

    /// A split `X ⊔ Y = [d]` with `|Q(X)| ≤ |Q(Y)| ≤ |D|·|Q(X)|`.
    ///
    /// Greedy: each generator joins the side whose current subcube is
    /// smaller (ties go to `X`). If that ever fails the sandwich, an
    /// exhaustive search over bipartitions runs (`d ≤ 20`).
    pub fn split_hp(&self) -> Result<HpSplit> {
        let base = FiniteSet::singleton(self.ring, self.a0.clone());
        let (mut sx, mut sy) = (base.clone(), base);
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for (j, g) in self.generators.iter().enumerate() {
            if sx.len() <= sy.len() {
                sx = self.extend(&sx, g)?;
                x.push(j + 1);
            } else {
                sy = self.extend(&sy, g)?;
                y.push(j + 1);
            }
        }
        let mut split = HpSplit { x, y, x_size: sx.len(), y_size: sy.len() };
        if split.x_size > split.y_size {
            split = HpSplit { x: split.y, y: split.x, x_size: split.y_size, y_size: split.x_size };
        }
        if self.sandwich_holds(split.x_size, split.y_size) {
            return Ok(split);
        }
        self.split_exhaustive()
    }

    pub fn sandwich_holds(&self, x_size: usize, y_size: usize) -> bool {
        x_size <= y_size && y_size as u128 <= self.digits.len() as u128 * x_size as u128
    }

    fn split_exhaustive(&self) -> Result<HpSplit> {
        let d = self.dim();
        if d > EXHAUSTIVE_SPLIT_MAX_DIM {
            return Err(Error::CapExceeded {
                what: "exhaustive split dimension",
                requested: d as u128,
                cap: EXHAUSTIVE_SPLIT_MAX_DIM as u128,
            });
        }
        for mask in 0u32..(1 << d) {
            let x: Vec<usize> = (0..d).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect();
            let y: Vec<usize> = (0..d).filter(|i| mask >> i & 1 == 0).map(|i| i + 1).collect();
            let x_size = self.subcube(&x)?.enumerate()?.len();
            let y_size = self.subcube(&y)?.enumerate()?.len();
            if self.sandwich_holds(x_size, y_size) {
                return Ok(HpSplit { x, y, x_size, y_size });
            }
        }
        Err(Error::Domain("no bipartition satisfies the sandwich".into()))
    }

    /// Map from each value of `{a0 + Σ c_j a_j : 0 ≤ c_j ≤ max_digit}` to its
    /// digit vector, or `None` when two digit vectors collide (the digit
    /// representation is then not unique).
    pub fn digit_table(&self, max_digit: u64) -> Result<Option<HashMap<Elem, Vec<u64>>>> {
        let d = self.dim();
        let base = max_digit + 1;
        let requested = (base as u128).saturating_pow(d as u32);
        if requested > ENUMERATION_CAP {
            return Err(Error::CapExceeded { what: "digit table", requested, cap: ENUMERATION_CAP });
        }
        let wide = CubeSpec { digits: (0..=max_digit).collect(), mode: Mode::Additive, ..self.clone() };
        let mut table = HashMap::with_capacity(requested as usize);
        let mut eps = vec![0u64; d];
        loop {
            if table.insert(wide.point(&eps)?, eps.clone()).is_some() {
                return Ok(None);
            }
            let mut i = 0;
            while i < d && eps[i] == max_digit {
                eps[i] = 0;
                i += 1;
            }
            if i == d {
                break;
            }
            eps[i] += 1;
        }
        Ok(Some(table))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn z() -> AmbientRing {
        AmbientRing::integers()
    }

    fn brute(spec: &CubeSpec) -> FiniteSet {
        // every digit vector, no incremental dedup
        let d = spec.dim();
        let mut out = Vec::new();
        let n = spec.digits.len();
        for idx in 0..n.pow(d as u32) {
            let mut rest = idx;
            let eps: Vec<u64> = (0..d)
                .map(|_| {
                    let e = spec.digits[rest % n];
                    rest /= n;
                    e
                })
                .collect();
            out.push(spec.point(&eps).unwrap());
        }
        FiniteSet::new(spec.ring, out).unwrap()
    }

    #[test]
    fn enumerate_examples() {
        let q = CubeSpec::additive(z(), 0, &[1, 4], &[0, 1]).unwrap();
        assert_eq!(q.enumerate().unwrap().to_string(), "{0,1,4,5}");
        let m = CubeSpec::multiplicative(z(), 1, &[2, 3]).unwrap();
        assert_eq!(m.enumerate().unwrap().to_string(), "{1,2,3,6}");
        let c = CubeSpec::additive(z(), 0, &[1, 1], &[0, 1]).unwrap();
        assert_eq!(c.enumerate().unwrap().to_string(), "{0,1,2}");
        assert!(!c.is_proper().unwrap());
        assert!(q.is_proper().unwrap());
        // 16 distinct subset sums of {1,2,4,8}, checked against the brute expansion
        let b = CubeSpec::additive(z(), 0, &[1, 2, 4, 8], &[0, 1]).unwrap();
        assert_eq!(brute(&b).len(), 16);
        assert!(b.is_proper().unwrap());
    }

    #[test]
    fn invalid_specs() {
        assert!(CubeSpec::additive(z(), 0, &[1, 0], &[0, 1]).is_err());
        assert!(CubeSpec::additive(z(), 0, &[1], &[1, 2]).is_err());
        assert!(CubeSpec::additive(z(), 0, &[1], &[0]).is_err());
        assert!(CubeSpec::multiplicative(z(), 0, &[2]).is_err());
        let f7 = AmbientRing::prime_field(7).unwrap();
        assert!(CubeSpec::multiplicative(f7, 1, &[14]).is_err());
        assert!(CubeSpec::new(z(), Mode::Multiplicative, 1.into(), vec![2.into()], vec![0, 2]).is_err());
    }

    #[test]
    fn enumeration_cap() {
        let q = CubeSpec::additive(z(), 0, &[1; 30], &[0, 1]).unwrap();
        assert!(matches!(q.enumerate(), Err(Error::CapExceeded { .. })));
        assert_eq!(q.enumerate_with_cap(1 << 31).unwrap().len(), 31);
    }

    #[test]
    fn subcube_examples() {
        let q = CubeSpec::additive(z(), 3, &[1, 10, 100], &[0, 1]).unwrap();
        assert_eq!(q.subcube(&[1, 2, 3]).unwrap().enumerate().unwrap(), q.enumerate().unwrap());
        assert_eq!(q.subcube(&[]).unwrap().enumerate().unwrap().to_string(), "{3}");
        assert!(matches!(q.subcube(&[4]), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(q.subcube(&[0]), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn symmetry_examples() {
        let q = CubeSpec::additive(z(), 0, &[1, 4], &[0, 1]).unwrap();
        assert_eq!(q.symmetry_witness().unwrap(), Elem::Int(5));
        assert!(q.check_symmetry().unwrap());
        let h = CubeSpec::with_height(z(), 3, &[1], 2).unwrap();
        assert_eq!(h.symmetry_witness().unwrap(), Elem::Int(8));
        assert_eq!(h.enumerate().unwrap().to_string(), "{3,4,5}");
        assert!(h.check_symmetry().unwrap());
        let gap = CubeSpec::additive(z(), 0, &[1], &[0, 2]).unwrap();
        assert!(matches!(gap.symmetry_witness(), Err(Error::NonIntervalDigits)));
        let m = CubeSpec::multiplicative(z(), 1, &[2]).unwrap();
        assert!(matches!(m.symmetry_witness(), Err(Error::ModeMismatch { .. })));
    }

    #[test]
    fn split_examples() {
        let q = CubeSpec::additive(z(), 0, &[1, 4], &[0, 1]).unwrap();
        let s = q.split_hp().unwrap();
        assert_eq!((s.x.as_slice(), s.y.as_slice(), s.x_size, s.y_size), (&[1][..], &[2][..], 2, 2));
        let one = CubeSpec::additive(z(), 0, &[7], &[0, 1, 2]).unwrap();
        let s = one.split_hp().unwrap();
        assert_eq!((s.x.as_slice(), s.y.as_slice(), s.x_size, s.y_size), (&[][..], &[1][..], 1, 3));
        // every 1/2 bipartition of (1,10,100) satisfies 2 ≤ 4 ≤ 4
        let t = CubeSpec::additive(z(), 0, &[1, 10, 100], &[0, 1]).unwrap();
        let s = t.split_hp().unwrap();
        assert_eq!((s.x_size, s.y_size), (2, 4));
        for mask in 0u32..8 {
            let x: Vec<usize> = (0..3).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect();
            let y: Vec<usize> = (0..3).filter(|i| mask >> i & 1 == 0).map(|i| i + 1).collect();
            let (sx, sy) =
                (t.subcube(&x).unwrap().enumerate().unwrap().len(), t.subcube(&y).unwrap().enumerate().unwrap().len());
            if x.len() == 1 {
                assert!(t.sandwich_holds(sx, sy));
            }
        }
        assert!(t.split_exhaustive().is_ok());
    }

    #[test]
    fn multiplicative_field_cube() {
        let f = AmbientRing::prime_field(13).unwrap();
        let m = CubeSpec::multiplicative(f, 2, &[3, 9]).unwrap();
        assert_eq!(m.enumerate().unwrap(), brute(&m));
        // 2·3·9 = 54 ≡ 2 collides with a0
        assert_eq!(m.enumerate().unwrap().to_string(), "{2,5,6}");
    }

    #[test]
    fn json_round_trip_and_field_order() {
        let q = CubeSpec::additive(AmbientRing::prime_field(101).unwrap(), 3, &[1, 4], &[0, 1]).unwrap();
        let s = serde_json::to_string(&q).unwrap();
        assert_eq!(
            s,
            r#"{"mode":"additive","a0":"3","generators":["1","4"],"digits":[0,1],"ring":{"kind":"prime_field","p":101}}"#
        );
        assert_eq!(serde_json::from_str::<CubeSpec>(&s).unwrap(), q);
        let bad = r#"{"mode":"additive","a0":0,"generators":[0],"digits":[0,1],"ring":{"kind":"integers"}}"#;
        assert!(serde_json::from_str::<CubeSpec>(bad).is_err());
    }

    #[test]
    fn digit_table_detects_collisions() {
        // 2·1 + 0·2 = 0·1 + 1·2
        let q = CubeSpec::additive(z(), 0, &[1, 2], &[0, 1]).unwrap();
        assert!(q.digit_table(1).unwrap().is_some());
        assert!(q.digit_table(2).unwrap().is_none());
        let t = q.digit_table(1).unwrap().unwrap();
        assert_eq!(t[&Elem::Int(3)], vec![1, 1]);
    }

    proptest! {
        #[test]
        fn enumerate_matches_brute_force(
            gens in prop::collection::vec(prop_oneof![-20i64..-1, 1i64..20], 0..6),
            a0 in -10i64..10,
            h in 1u64..3,
        ) {
            let q = CubeSpec::with_height(z(), a0, &gens, h).unwrap();
            let set = q.enumerate().unwrap();
            prop_assert_eq!(&set, &brute(&q));
            prop_assert!(!set.is_empty() && set.len() as u128 <= q.digit_vectors());
            prop_assert_eq!(q.is_proper().unwrap(), set.len() as u128 == q.digit_vectors());
        }

        #[test]
        fn split_satisfies_sandwich(
            gens in prop::collection::vec(prop_oneof![-50i64..-1, 1i64..50], 0..14),
            digits in prop::sample::subsequence(vec![1u64, 2, 3, 5], 1..4),
        ) {
            let mut ds = vec![0];
            ds.extend(digits);
            let q = CubeSpec::additive(z(), 0, &gens, &ds).unwrap();
            let s = q.split_hp().unwrap();
            prop_assert!(q.sandwich_holds(s.x_size, s.y_size));
            prop_assert_eq!(s.x_size, q.subcube(&s.x).unwrap().enumerate().unwrap().len());
            prop_assert_eq!(s.y_size, q.subcube(&s.y).unwrap().enumerate().unwrap().len());
            let mut all: Vec<usize> = s.x.iter().chain(&s.y).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (1..=q.dim()).collect::<Vec<_>>());
        }

        #[test]
        fn subcube_sum_identity(gens in prop::collection::vec(1i64..30, 1..8), a0 in -5i64..5, cut in 0usize..8) {
            // Q(X) + Q(Y) − a0 = Q for X ⊔ Y = [d]
            let q = CubeSpec::with_height(z(), a0, &gens, 2).unwrap();
            let d = q.dim();
            let cut = cut.min(d);
            let x: Vec<usize> = (1..=cut).collect();
            let y: Vec<usize> = (cut + 1..=d).collect();
            let qx = q.subcube(&x).unwrap().enumerate().unwrap();
            let qy = q.subcube(&y).unwrap().enumerate().unwrap();
            let r = q.ring;
            let mut sums = Vec::new();
            for a in &qx {
                for b in &qy {
                    sums.push(r.sub(&r.add(a, b).unwrap(), &q.a0).unwrap());
                }
            }
            prop_assert_eq!(FiniteSet::new(r, sums).unwrap(), q.enumerate().unwrap());
        }
    }
}
