//! Checkable structural inequalities: popular sums and differences of an
//! `h = 1` cube, the Olmezov correlation inequality, the projection
//! (GMR) inequality for sumsets, and a shifted-intersection count.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::cube::CubeSpec;
use crate::energy;
use crate::error::{Error, Result};
use crate::numeric::{serialize_display, AmbientRing, Elem, Mode};
use crate::set::FiniteSet;
use crate::setops::{self, MultiplicityMap, PairOp};

/// Nested-sum grid size refused by [`olmezov_sides`].
pub const OLMEZOV_GRID_CAP: u128 = 1_000_000_000;

/// A pass/fail record for one inequality instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub params: serde_json::Value,
    pub lhs: String,
    pub rhs: String,
    pub pass: bool,
    pub seed: Option<u64>,
}

impl Verdict {
    pub fn new(name: &str, params: serde_json::Value, lhs: impl ToString, rhs: impl ToString, pass: bool) -> Self {
        Verdict { name: name.into(), params, lhs: lhs.to_string(), rhs: rhs.to_string(), pass, seed: None }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

/// Popular sums `S` and popular differences `D` of a cube.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SdDecomposition {
    pub q: FiniteSet,
    pub s: FiniteSet,
    pub d: FiniteSet,
    #[serde(skip)]
    pub sums: MultiplicityMap,
    #[serde(skip)]
    pub diffs: MultiplicityMap,
}

fn popular(map: &MultiplicityMap, n: u128) -> FiniteSet {
    let ring = map.ring();
    let keep = map.entries().iter().filter(|&&(_, c)| u128::from(c) * u128::from(c) >= n);
    FiniteSet::from_sorted(ring, keep.map(|(e, _)| e.clone()).collect())
}

/// `S = {x : r_{Q+Q}(x) ≥ √|Q|}` and `D = {x : r_{Q−Q}(x) ≥ √|Q|}`.
pub fn sd_decompose(spec: &CubeSpec) -> Result<SdDecomposition> {
    if spec.mode != Mode::Additive {
        return Err(Error::ModeMismatch { expected: "additive" });
    }
    if spec.height() != Some(1) {
        return Err(Error::Domain("popular sum/difference sets need digits {0,1}".into()));
    }
    let q = spec.enumerate()?;
    sd_of_set(&q)
}

/// The same decomposition for an arbitrary set.
pub fn sd_of_set(q: &FiniteSet) -> Result<SdDecomposition> {
    let n = q.len() as u128;
    let (_, sums) = setops::pairwise(PairOp::Sum, q, q)?;
    let (_, diffs) = setops::pairwise(PairOp::Diff, q, q)?;
    Ok(SdDecomposition { q: q.clone(), s: popular(&sums, n), d: popular(&diffs, n), sums, diffs })
}

/// Pair statistics of an S/D decomposition.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairScan {
    pub pairs: u64,
    /// Pairs with `q_1+q_2 ∉ S` and `q_1−q_2 ∉ D`.
    pub uncovered: u64,
    /// Pairs with `r_{Q+Q}(q_1+q_2) + r_{Q−Q}(q_1−q_2) < 2√|Q|`.
    pub pointwise_failures: u64,
}

impl SdDecomposition {
    /// `|S|, |D| ≤ |Q|^{3/2}`, compared as `|S|² ≤ |Q|³`.
    pub fn sizes_hold(&self) -> bool {
        let n = self.q.len() as u128;
        let cube = n * n * n;
        let (s, d) = (self.s.len() as u128, self.d.len() as u128);
        s * s <= cube && d * d <= cube
    }

    /// Visits every ordered pair of `Q` once.
    pub fn scan_pairs(&self) -> Result<PairScan> {
        let ring = self.q.ring();
        let n = self.q.len() as u128;
        let mut scan = PairScan::default();
        for a in &self.q {
            for b in &self.q {
                let (plus, minus) = (ring.add(a, b)?, ring.sub(a, b)?);
                let (rp, rm) = (u128::from(self.sums.get(&plus)), u128::from(self.diffs.get(&minus)));
                scan.pairs += 1;
                if rp * rp < n && rm * rm < n {
                    scan.uncovered += 1;
                }
                if (rp + rm) * (rp + rm) < 4 * n {
                    scan.pointwise_failures += 1;
                }
            }
        }
        Ok(scan)
    }

    pub fn verdict(&self) -> Result<Verdict> {
        let scan = self.scan_pairs()?;
        let params = serde_json::json!({
            "q_size": self.q.len(), "s_size": self.s.len(), "d_size": self.d.len(), "pairs": scan.pairs,
        });
        let pass = scan.uncovered == 0 && self.sizes_hold();
        Ok(Verdict::new(
            "sd_decomposition",
            params,
            format!("uncovered={} max(|S|,|D|)={}", scan.uncovered, self.s.len().max(self.d.len())),
            format!("uncovered=0 bound={:.6}", (self.q.len() as f64).powf(1.5)),
            pass,
        ))
    }
}

/// `E^+(B,Q) ≥ |B|² √|Q|` for `B ⊆ Q`, compared after squaring.
pub fn energy_lower_check(b: &FiniteSet, spec: &CubeSpec) -> Result<Verdict> {
    if spec.height() != Some(1) || spec.mode != Mode::Additive {
        return Err(Error::Domain("energy lower check needs an additive cube with digits {0,1}".into()));
    }
    let q = spec.enumerate()?;
    if !b.is_subset(&q) {
        return Err(Error::NotSubset("B is not contained in Q".into()));
    }
    let lhs = energy::energy_pair(Mode::Additive, b, &q)?.value;
    let (nb, nq) = (b.len() as u128, q.len() as u128);
    let pass = BigUint::from(lhs).pow(2) >= BigUint::from(nb).pow(4) * BigUint::from(nq);
    let rhs = (nb * nb) as f64 * (nq as f64).sqrt();
    Ok(Verdict::new(
        "energy_lower",
        serde_json::json!({"b_size": b.len(), "q_size": q.len()}),
        lhs,
        format!("{rhs:.6}"),
        pass,
    ))
}

/// Both sides of the Olmezov inequality, evaluated exactly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OlmezovSides {
    pub n: u32,
    pub s: u32,
    pub m: u32,
    pub mode: Mode,
    /// `Σ_{x∈A} Σ_y B(y) D(y∘x⁻¹)`.
    pub sigma: u128,
    #[serde(serialize_with = "serialize_display")]
    pub lhs: BigUint,
    #[serde(serialize_with = "serialize_display")]
    pub prefactor: BigUint,
    #[serde(serialize_with = "serialize_display")]
    pub correlation_sum: BigUint,
    #[serde(serialize_with = "serialize_display")]
    pub rhs: BigUint,
}

impl OlmezovSides {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }

    pub fn verdict(&self) -> Verdict {
        Verdict::new(
            "olmezov",
            serde_json::json!({"n": self.n, "s": self.s, "m": self.m, "mode": self.mode, "sigma": self.sigma.to_string()}),
            &self.lhs,
            &self.rhs,
            self.holds(),
        )
    }
}

struct OlmezovCtx<'a> {
    ring: AmbientRing,
    mode: Mode,
    a: &'a FiniteSet,
    b: &'a FiniteSet,
    d: &'a FiniteSet,
    x_candidates: Vec<Elem>,
    y_candidates: Vec<Elem>,
    m: u32,
    power_b: u32,
    s: u32,
}

impl OlmezovCtx<'_> {
    fn shift(&self, z: &Elem, x: &Elem) -> Result<Elem> {
        self.ring.combine(self.mode, z, x)
    }

    /// Recurses over `x_2, …, x_m`; `za` and `zb` are the base points still
    /// alive in the `A`- and `B`-correlations.
    fn walk(&self, xs: &mut Vec<Elem>, za: &[Elem], zb: &[Elem], acc: &mut BigUint) -> Result<()> {
        if xs.len() + 1 == self.m as usize {
            return self.leaf(xs, za, zb.len(), acc);
        }
        for x in &self.x_candidates {
            let na: Vec<Elem> =
                za.iter().filter(|z| self.shift(z, x).map(|v| self.a.contains(&v)).unwrap_or(false)).cloned().collect();
            if na.is_empty() {
                continue;
            }
            let nb: Vec<Elem> =
                zb.iter().filter(|z| self.shift(z, x).map(|v| self.b.contains(&v)).unwrap_or(false)).cloned().collect();
            if nb.is_empty() {
                continue;
            }
            xs.push(x.clone());
            self.walk(xs, &na, &nb, acc)?;
            xs.pop();
        }
        Ok(())
    }

    fn leaf(&self, xs: &[Elem], za: &[Elem], cb: usize, acc: &mut BigUint) -> Result<()> {
        // y must satisfy D(y ∘ x_j⁻¹) for x_1 = identity and every chosen x_j
        let mut ys = Vec::new();
        'y: for y in &self.y_candidates {
            for x in xs {
                if !self.d.contains(&self.ring.quotient(self.mode, y, x)?) {
                    continue 'y;
                }
            }
            ys.push(y);
        }
        if ys.is_empty() {
            return Ok(());
        }
        // Σ_{ȳ} C_{m+s}(x̄, ȳ) = Σ_z (#{y : z∘y ∈ B})^s
        let mut inner = BigUint::zero();
        for z in za {
            let mut c = 0u64;
            for y in &ys {
                if self.b.contains(&self.shift(z, y)?) {
                    c += 1;
                }
            }
            inner += BigUint::from(c).pow(self.s);
        }
        *acc += BigUint::from(cb).pow(self.power_b) * inner;
        Ok(())
    }
}

/// Evaluates `σ^{mn}` and
/// `|A|^{(n−1)m} |B|^{s(m−1)} |D|^{(n−s)(m−1)} Σ_{x̄,ȳ} C_m(B)(x̄)^{n−s} C_{m+s}(A,…,A,B,…,B)(x̄,ȳ) ∏ D(y_i − x_j)`
/// with `x_1 = 0` (the identity in multiplicative mode, where zeros are dropped).
pub fn olmezov_sides(
    a: &FiniteSet,
    b: &FiniteSet,
    d: &FiniteSet,
    n: u32,
    s: u32,
    m: u32,
    mode: Mode,
) -> Result<OlmezovSides> {
    if !(1 <= s && s < n && m >= 1) {
        return Err(Error::Domain(format!("need 1 ≤ s < n and m ≥ 1, got n={n} s={s} m={m}")));
    }
    let ring = a.ring();
    for x in [b, d] {
        if !ring.same_kind(&x.ring()) {
            return Err(Error::RingMismatch);
        }
    }
    let (a, b, d) = match mode {
        Mode::Additive => (a.clone(), b.clone(), d.clone()),
        Mode::Multiplicative => (a.nonzero(), b.nonzero(), d.nonzero()),
    };
    let quot = match mode {
        Mode::Additive => PairOp::Diff,
        Mode::Multiplicative => PairOp::Ratio,
    };

    let mut sigma = 0u128;
    for x in &a {
        for y in &b {
            if d.contains(&ring.quotient(mode, y, x)?) {
                sigma += 1;
            }
        }
    }
    let lhs = BigUint::from(sigma).pow(m * n);

    let x_candidates = setops::pairwise_set(quot, &a, &a)?.intersection(&setops::pairwise_set(quot, &b, &b)?);
    let y_candidates = d.intersection(&setops::pairwise_set(quot, &b, &a)?);
    let grid = (x_candidates.len() as u128)
        .saturating_pow(m - 1)
        .saturating_mul((y_candidates.len() as u128).saturating_pow(s))
        .saturating_mul(a.len().max(1) as u128);
    if grid > OLMEZOV_GRID_CAP {
        return Err(Error::CapExceeded { what: "olmezov nested sum", requested: grid, cap: OLMEZOV_GRID_CAP });
    }

    let prefactor = BigUint::from(a.len()).pow((n - 1) * m)
        * BigUint::from(b.len()).pow(s * (m - 1))
        * BigUint::from(d.len()).pow((n - s) * (m - 1));

    let ctx = OlmezovCtx {
        ring,
        mode,
        a: &a,
        b: &b,
        d: &d,
        x_candidates: x_candidates.elements().to_vec(),
        y_candidates: y_candidates.elements().to_vec(),
        m,
        power_b: n - s,
        s,
    };
    let mut correlation_sum = BigUint::zero();
    ctx.walk(&mut Vec::new(), a.elements(), b.elements(), &mut correlation_sum)?;
    let rhs = &prefactor * &correlation_sum;
    Ok(OlmezovSides { n, s, m, mode, sigma, lhs, prefactor, correlation_sum, rhs })
}

/// `(|A_1+⋯+A_k|^{k−1}, ∏_j |S_j|)` where `S_j` omits `A_j`.
pub fn gmr_check(sets: &[FiniteSet]) -> Result<(BigUint, BigUint)> {
    let k = sets.len();
    if k < 2 {
        return Err(Error::Domain("GMR needs k ≥ 2 sets".into()));
    }
    if sets.iter().any(FiniteSet::is_empty) {
        return Err(Error::Domain("GMR needs nonempty sets".into()));
    }
    let sum_of = |skip: Option<usize>| -> Result<FiniteSet> {
        let mut parts = sets.iter().enumerate().filter(|&(i, _)| Some(i) != skip).map(|(_, s)| s);
        let first = parts.next().expect("k ≥ 2").clone();
        parts.try_fold(first, |acc, s| setops::pairwise_set(PairOp::Sum, &acc, s))
    };
    let lhs = BigUint::from(sum_of(None)?.len()).pow(k as u32 - 1);
    let mut rhs = BigUint::one();
    for j in 0..k {
        rhs *= BigUint::from(sum_of(Some(j))?.len());
    }
    Ok((lhs, rhs))
}

pub fn gmr_verdict(sets: &[FiniteSet]) -> Result<Verdict> {
    let (lhs, rhs) = gmr_check(sets)?;
    let sizes: Vec<usize> = sets.iter().map(FiniteSet::len).collect();
    let pass = lhs <= rhs;
    Ok(Verdict::new("gmr", serde_json::json!({"k": sets.len(), "sizes": sizes}), lhs, rhs, pass))
}

/// `|{(π_1,π_2,q_1,q_2) ∈ Π² × S² : π_1/q_1 − π_2/q_2 = x}|`.
pub fn shifted_intersection_count(s: &FiniteSet, x: &Elem, pi: &FiniteSet) -> Result<u128> {
    if s.iter().any(Elem::is_zero) {
        return Err(Error::ZeroDivisor);
    }
    let ring = s.ring();
    let (_, r) = setops::pairwise(PairOp::Ratio, pi, s)?;
    let mut count = 0u128;
    for (v, c) in r.entries() {
        let other = r.get(&ring.sub(v, x)?);
        count += u128::from(*c) * u128::from(other);
    }
    Ok(count)
}

/// `|S ∩ (S−x)| · |S|² ≤ count` with `Π = SS`.
pub fn shifted_intersection_verdict(s: &FiniteSet, x: &Elem) -> Result<Verdict> {
    let pi = setops::pairwise_set(PairOp::Prod, s, s)?;
    let count = shifted_intersection_count(s, x, &pi)?;
    let shifted = s.map(|e| s.ring().sub(e, x))?;
    let overlap = s.intersection(&shifted).len() as u128;
    let n = s.len() as u128;
    Ok(Verdict::new(
        "shifted_intersection",
        serde_json::json!({"s_size": s.len(), "x": x.to_string(), "pi_size": pi.len()}),
        overlap * n * n,
        count,
        overlap * n * n <= count,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn z() -> AmbientRing {
        AmbientRing::integers()
    }

    fn set(v: &[i64]) -> FiniteSet {
        FiniteSet::from_i64s(z(), v.iter().copied())
    }

    /// Every `x̄ ∈ G^{m−1}`, `ȳ ∈ G^s` over a window `G`, correlations summed
    /// over `z` directly.
    fn olmezov_oracle(a: &[i64], b: &[i64], d: &[i64], n: u32, s: u32, m: u32) -> (u128, u128) {
        let has = |v: &[i64], x: i64| v.contains(&x);
        let mut sigma = 0u128;
        for &x in a {
            for &y in b {
                if has(d, y - x) {
                    sigma += 1;
                }
            }
        }
        let window: Vec<i64> = (-40..=40).collect();
        let mut total = 0u128;
        let (mm, ss) = ((m - 1) as usize, s as usize);
        let count = window.len().pow((mm + ss) as u32);
        for code in 0..count {
            let mut c = code;
            let mut v = Vec::with_capacity(mm + ss);
            for _ in 0..mm + ss {
                v.push(window[c % window.len()]);
                c /= window.len();
            }
            let (xs, ys) = v.split_at(mm);
            let mut xs_full = vec![0];
            xs_full.extend_from_slice(xs);
            if !ys.iter().all(|&y| xs_full.iter().all(|&x| has(d, y - x))) {
                continue;
            }
            let cb = b.iter().filter(|&&z| xs.iter().all(|&x| has(b, z + x))).count() as u128;
            let cab =
                a.iter().filter(|&&z| xs.iter().all(|&x| has(a, z + x)) && ys.iter().all(|&y| has(b, z + y))).count()
                    as u128;
            total += cb.pow(n - s) * cab;
        }
        let pre = (a.len() as u128).pow((n - 1) * m)
            * (b.len() as u128).pow(s * (m - 1))
            * (d.len() as u128).pow((n - s) * (m - 1));
        (sigma.pow(m * n), pre * total)
    }

    #[test]
    fn sd_examples() {
        let q = CubeSpec::additive(z(), 0, &[1, 4], &[0, 1]).unwrap();
        let sd = sd_decompose(&q).unwrap();
        // r_{Q+Q}: 0,2,8,10 ↦ 1; 1,4,6,9 ↦ 2; 5 ↦ 4
        assert_eq!(sd.s.to_string(), "{1,4,5,6,9}");
        assert_eq!(sd.d.to_string(), "{-4,-1,0,1,4}");
        let scan = sd.scan_pairs().unwrap();
        assert_eq!((scan.pairs, scan.uncovered, scan.pointwise_failures), (16, 0, 0));
        assert!(sd.sizes_hold() && sd.verdict().unwrap().pass);

        let point = CubeSpec::additive(z(), 7, &[], &[0, 1]).unwrap();
        let sd = sd_decompose(&point).unwrap();
        assert_eq!(sd.s.to_string(), "{14}");
        assert_eq!(sd.d.to_string(), "{0}");

        let gens: Vec<i64> = (0..4).map(|j| 3i64.pow(j)).collect();
        let sd = sd_decompose(&CubeSpec::additive(z(), 0, &gens, &[0, 1]).unwrap()).unwrap();
        assert!(sd.s.len() <= 64 && sd.d.len() <= 64);
        assert!(sd_decompose(&CubeSpec::with_height(z(), 0, &[1], 2).unwrap()).is_err());
    }

    #[test]
    fn energy_lower_examples() {
        let q = CubeSpec::additive(z(), 0, &[1, 4], &[0, 1]).unwrap();
        let v = energy_lower_check(&q.enumerate().unwrap(), &q).unwrap();
        assert!(v.pass);
        assert_eq!(v.lhs, "36");
        assert_eq!(v.rhs, "32.000000");
        let single = energy_lower_check(&set(&[0]), &q).unwrap();
        assert_eq!(single.lhs, "4");
        assert!(single.pass);
        assert!(matches!(energy_lower_check(&set(&[2]), &q), Err(Error::NotSubset(_))));
    }

    #[test]
    fn olmezov_small_instance_matches_oracle() {
        let ab = set(&[0, 1]);
        let sides = olmezov_sides(&ab, &ab, &ab, 2, 1, 2, Mode::Additive).unwrap();
        let (lhs, rhs) = olmezov_oracle(&[0, 1], &[0, 1], &[0, 1], 2, 1, 2);
        assert_eq!(sides.lhs, BigUint::from(lhs));
        assert_eq!(sides.rhs, BigUint::from(rhs));
        assert!(sides.holds());
    }

    #[test]
    fn olmezov_disjoint_support() {
        let sides = olmezov_sides(&set(&[0]), &set(&[100]), &set(&[1]), 2, 1, 1, Mode::Additive).unwrap();
        assert_eq!(sides.sigma, 0);
        assert!(sides.lhs.is_zero() && sides.holds());
    }

    #[test]
    fn olmezov_multiplicative_field_shape() {
        // A = B⁻¹, D = BB inside F_13
        let f = AmbientRing::prime_field(13).unwrap();
        let b = FiniteSet::from_i64s(f, [2, 3, 5]);
        let a = b.map(|x| f.inv(x)).unwrap();
        let d = setops::pairwise_set(PairOp::Prod, &b, &b).unwrap();
        let sides = olmezov_sides(&a, &b, &d, 2, 1, 2, Mode::Multiplicative).unwrap();
        assert!(sides.holds(), "{} > {}", sides.lhs, sides.rhs);
        // direct: σ = Σ_{x∈A} Σ_{y∈B} D(y/x) = Σ |B ∩ xD|
        let mut sigma = 0;
        for x in &a {
            for y in &b {
                if d.contains(&f.div(y, x).unwrap()) {
                    sigma += 1;
                }
            }
        }
        assert_eq!(sides.sigma, sigma);
    }

    #[test]
    fn gmr_examples() {
        let (l, r) = gmr_check(&[set(&[0, 1]), set(&[0, 1]), set(&[0, 1])]).unwrap();
        assert_eq!((l, r), (BigUint::from(16u32), BigUint::from(27u32)));
        let (l, r) = gmr_check(&[set(&[0, 5, 9]), set(&[1, 2])]).unwrap();
        assert!(l <= r);
        assert!(gmr_check(&[set(&[1])]).is_err());
        assert!(gmr_check(&[set(&[1]), FiniteSet::empty(z())]).is_err());
    }

    #[test]
    fn shifted_intersection_examples() {
        let f = AmbientRing::prime_field(11).unwrap();
        let s = FiniteSet::from_i64s(f, [1, 2, 5]);
        let pi = setops::pairwise_set(PairOp::Prod, &s, &s).unwrap();
        let x = f.elem(1);
        let mut oracle = 0u128;
        for p1 in &pi {
            for p2 in &pi {
                for q1 in &s {
                    for q2 in &s {
                        let v = f.sub(&f.div(p1, q1).unwrap(), &f.div(p2, q2).unwrap()).unwrap();
                        if v == x {
                            oracle += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(shifted_intersection_count(&s, &x, &pi).unwrap(), oracle);
        let zero = shifted_intersection_count(&s, &Elem::zero(), &pi).unwrap();
        assert!(zero >= (s.len() as u128).pow(3));
        assert!(shifted_intersection_verdict(&s, &x).unwrap().pass);
        let with_zero = FiniteSet::from_i64s(f, [0, 1]);
        assert!(matches!(shifted_intersection_count(&with_zero, &x, &pi), Err(Error::ZeroDivisor)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(60))]

        #[test]
        fn olmezov_matches_oracle(
            a in prop::collection::vec(-6i64..6, 1..4),
            b in prop::collection::vec(-6i64..6, 1..4),
            d in prop::collection::vec(-6i64..6, 1..4),
            (n, s) in prop_oneof![Just((2u32, 1u32)), Just((3, 1)), Just((3, 2))],
            m in 1u32..3,
        ) {
            let (sa, sb, sd) = (set(&a), set(&b), set(&d));
            let sides = olmezov_sides(&sa, &sb, &sd, n, s, m, Mode::Additive).unwrap();
            let raw = |x: &FiniteSet| x.iter().map(|e| e.as_i64().unwrap()).collect::<Vec<_>>();
            let (lhs, rhs) = olmezov_oracle(&raw(&sa), &raw(&sb), &raw(&sd), n, s, m);
            prop_assert_eq!(&sides.lhs, &BigUint::from(lhs));
            prop_assert_eq!(&sides.rhs, &BigUint::from(rhs));
            prop_assert!(sides.holds());
        }
    }
}
