use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{AmbientRing, Elem};

/// A deduplicated, strictly increasing set of ring elements.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteSet {
    ring: AmbientRing,
    elements: Vec<Elem>,
}

impl FiniteSet {
    /// Reduces every value into `ring`, then sorts and deduplicates.
    pub fn new(ring: AmbientRing, elements: impl IntoIterator<Item = Elem>) -> Result<Self> {
        let elements = elements.into_iter().map(|e| ring.reduce(e)).collect::<Result<Vec<_>>>()?;
        Ok(Self::from_unsorted(ring, elements))
    }

    pub fn from_i64s(ring: AmbientRing, values: impl IntoIterator<Item = i64>) -> Self {
        Self::from_unsorted(ring, values.into_iter().map(|v| ring.elem(v)).collect())
    }

    pub fn empty(ring: AmbientRing) -> Self {
        FiniteSet { ring, elements: Vec::new() }
    }

    pub fn singleton(ring: AmbientRing, e: Elem) -> Self {
        FiniteSet { ring, elements: vec![e] }
    }

    /// Elements must already be canonical members of `ring`.
    pub(crate) fn from_unsorted(ring: AmbientRing, mut elements: Vec<Elem>) -> Self {
        elements.sort_unstable();
        elements.dedup();
        FiniteSet { ring, elements }
    }

    /// Elements must be canonical, strictly increasing.
    pub(crate) fn from_sorted(ring: AmbientRing, elements: Vec<Elem>) -> Self {
        debug_assert!(elements.windows(2).all(|w| w[0] < w[1]));
        FiniteSet { ring, elements }
    }

    pub fn ring(&self) -> AmbientRing {
        self.ring
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Elem] {
        &self.elements
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Elem> {
        self.elements.iter()
    }

    pub fn contains(&self, e: &Elem) -> bool {
        self.elements.binary_search(e).is_ok()
    }

    pub fn is_subset(&self, other: &FiniteSet) -> bool {
        self.elements.iter().all(|e| other.contains(e))
    }

    pub fn intersection(&self, other: &FiniteSet) -> FiniteSet {
        let elements = self.elements.iter().filter(|e| other.contains(e)).cloned().collect();
        FiniteSet::from_sorted(self.ring, elements)
    }

    pub fn union(&self, other: &FiniteSet) -> FiniteSet {
        let mut all = self.elements.clone();
        all.extend(other.elements.iter().cloned());
        FiniteSet::from_unsorted(self.ring, all)
    }

    /// The set with `0` removed (the multiplicative-group part).
    pub fn nonzero(&self) -> FiniteSet {
        let elements = self.elements.iter().filter(|e| !e.is_zero()).cloned().collect();
        FiniteSet::from_sorted(self.ring, elements)
    }

    /// `{f(a) : a ∈ A}`.
    pub fn map(&self, mut f: impl FnMut(&Elem) -> Result<Elem>) -> Result<FiniteSet> {
        let elements = self.elements.iter().map(&mut f).collect::<Result<Vec<_>>>()?;
        Ok(FiniteSet::from_unsorted(self.ring, elements))
    }

    /// `A + x`.
    pub fn translate(&self, x: &Elem) -> Result<FiniteSet> {
        self.map(|a| self.ring.add(a, x))
    }

    /// `c − A`.
    pub fn reflect(&self, c: &Elem) -> Result<FiniteSet> {
        self.map(|a| self.ring.sub(c, a))
    }

    /// Parses one element per line; blank lines and `#` comments are skipped.
    /// Field elements are reduced on read.
    pub fn parse_lines(ring: AmbientRing, text: &str) -> Result<FiniteSet> {
        let mut elements = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let e = ring.parse(line).map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            elements.push(e);
        }
        Ok(FiniteSet::from_unsorted(ring, elements))
    }

    /// One element per line, canonical order.
    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for e in &self.elements {
            out.push_str(&e.to_string());
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for FiniteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.elements.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for FiniteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} in {}", self.ring)
    }
}

impl<'a> IntoIterator for &'a FiniteSet {
    type Item = &'a Elem;
    type IntoIter = std::slice::Iter<'a, Elem>;

    fn into_iter(self) -> Self::IntoIter {
        self.elements.iter()
    }
}
