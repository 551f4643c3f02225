//! Seeded verification batteries. Each returns one [`Verdict`] per instance.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::cube::CubeSpec;
use crate::energy::{self, EnergyKind};
use crate::error::Result;
use crate::numeric::{AmbientRing, Elem, Mode};
use crate::set::FiniteSet;
use crate::setops::{self, PairOp};
use crate::structure::{self, Verdict};

/// Fields used by the fuzzers.
const SMALL_PRIMES: [u64; 4] = [7, 11, 13, 31];

/// Up to `max_size` distinct values drawn from `[lo, hi]`, at least one.
pub fn random_set(ring: AmbientRing, max_size: usize, lo: i64, hi: i64, rng: &mut impl Rng) -> FiniteSet {
    let size = rng.gen_range(1..=max_size);
    let values: Vec<Elem> = (0..size).map(|_| ring.elem(rng.gen_range(lo..=hi))).collect();
    FiniteSet::from_unsorted(ring, values)
}

fn nonzero_set(ring: AmbientRing, max_size: usize, bound: i64, rng: &mut impl Rng) -> FiniteSet {
    loop {
        let s = random_set(ring, max_size, -bound, bound, rng).nonzero();
        if !s.is_empty() {
            return s;
        }
    }
}

fn pow2(d: usize, base: i64) -> Vec<i64> {
    (0..d).map(|j| base.pow(j as u32)).collect()
}

/// Reflection symmetry of interval-digit additive cubes for every
/// `d ≤ d_max`, `h ≤ h_max`: power generators, small random generators
/// (usually improper) and signed generators.
pub fn symmetry_battery(d_max: usize, h_max: u64, seed: u64) -> Result<Vec<Verdict>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = AmbientRing::integers();
    let mut out = Vec::new();
    for h in 1..=h_max {
        for d in 0..=d_max {
            let families: [(&str, Vec<i64>, i64); 3] = [
                ("powers", pow2(d, h as i64 + 1), 0),
                ("small", (0..d).map(|_| rng.gen_range(1..=4)).collect(), rng.gen_range(-9..=9)),
                (
                    "signed",
                    (0..d).map(|_| rng.gen_range(1..=1000) * if rng.gen() { 1 } else { -1 }).collect(),
                    rng.gen_range(-9..=9),
                ),
            ];
            for (family, gens, a0) in families {
                let q = CubeSpec::with_height(z, a0, &gens, h)?;
                let pass = q.check_symmetry()?;
                let witness = q.symmetry_witness()?;
                out.push(
                    Verdict::new("symmetry", json!({"family": family, "d": d, "h": h}), &witness, &witness, pass)
                        .with_seed(seed),
                );
            }
        }
    }
    Ok(out)
}

/// S/D coverage and size bounds for power cubes (bases 2, 3, 5) and
/// `random` small-generator cubes, then `energy` checks of
/// `E^+(B, Q) ≥ |B|²√|Q|` on random subsets of power cubes.
pub fn sd_battery(d_max: usize, random: usize, energy: usize, seed: u64) -> Result<Vec<Verdict>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = AmbientRing::integers();
    let mut out = Vec::new();
    for base in [2, 3, 5] {
        for d in 0..=d_max {
            let q = CubeSpec::additive(z, 0, &pow2(d, base), &[0, 1])?;
            let mut v = structure::sd_decompose(&q)?.verdict()?;
            v.params["family"] = json!(format!("powers({base})"));
            out.push(v.with_seed(seed));
        }
    }
    for _ in 0..random {
        let d = rng.gen_range(1..=d_max.max(1));
        let gens: Vec<i64> = (0..d).map(|_| rng.gen_range(1..=3)).collect();
        let q = CubeSpec::additive(z, rng.gen_range(-5..=5), &gens, &[0, 1])?;
        let mut v = structure::sd_decompose(&q)?.verdict()?;
        v.params["family"] = json!("random");
        out.push(v.with_seed(seed));
    }
    for _ in 0..energy {
        let d = rng.gen_range(1..=d_max.max(1));
        let q = CubeSpec::additive(z, 0, &pow2(d, 3), &[0, 1])?;
        let mut elems = q.enumerate()?.elements().to_vec();
        elems.shuffle(&mut rng);
        elems.truncate(rng.gen_range(1..=elems.len()));
        let b = FiniteSet::from_unsorted(z, elems);
        out.push(structure::energy_lower_check(&b, &q)?.with_seed(seed));
    }
    Ok(out)
}

/// Olmezov instances cycling through additive `Z`, additive `F_p`,
/// multiplicative `Z` and multiplicative `F_p`; every other multiplicative
/// field instance uses `A = B⁻¹`, `D = BB`.
pub fn olmezov_battery(trials: usize, seed: u64) -> Result<Vec<Verdict>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(trials);
    for i in 0..trials {
        let n = rng.gen_range(2..=3u32);
        let s = rng.gen_range(1..n);
        let m = rng.gen_range(1..=3u32);
        let p = *SMALL_PRIMES[..3].choose(&mut rng).expect("nonempty");
        let f = AmbientRing::prime_field(p)?;
        let z = AmbientRing::integers();
        let (shape, mode, a, b, d) = match i % 4 {
            0 => (
                "additive_z",
                Mode::Additive,
                random_set(z, 8, -8, 8, &mut rng),
                random_set(z, 8, -8, 8, &mut rng),
                random_set(z, 8, -8, 8, &mut rng),
            ),
            1 => (
                "additive_fp",
                Mode::Additive,
                random_set(f, 8, 0, 30, &mut rng),
                random_set(f, 8, 0, 30, &mut rng),
                random_set(f, 8, 0, 30, &mut rng),
            ),
            2 => (
                "multiplicative_z",
                Mode::Multiplicative,
                nonzero_set(z, 8, 6, &mut rng),
                nonzero_set(z, 8, 6, &mut rng),
                nonzero_set(z, 8, 6, &mut rng),
            ),
            _ if i % 8 == 3 => {
                let b = nonzero_set(f, 3, 30, &mut rng);
                let a = b.map(|x| f.inv(x))?;
                let d = setops::pairwise_set(PairOp::Prod, &b, &b)?;
                ("inverse_product", Mode::Multiplicative, a, b, d)
            }
            _ => (
                "multiplicative_fp",
                Mode::Multiplicative,
                nonzero_set(f, 8, 30, &mut rng),
                nonzero_set(f, 8, 30, &mut rng),
                nonzero_set(f, 8, 30, &mut rng),
            ),
        };
        let mut v = structure::olmezov_sides(&a, &b, &d, n, s, m, mode)?.verdict();
        v.params["shape"] = json!(shape);
        v.params["ring"] = json!(a.ring().to_string());
        v.params["trial"] = json!(i);
        out.push(v.with_seed(seed));
    }
    Ok(out)
}

/// `|A_1+⋯+A_k|^{k−1} ≤ ∏|S_j|` for `2 ≤ k ≤ 5` over `Z` and `F_31`.
pub fn gmr_battery(trials: usize, seed: u64) -> Result<Vec<Verdict>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(trials);
    for i in 0..trials {
        let k = rng.gen_range(2..=5);
        let ring = if i % 3 == 2 { AmbientRing::prime_field(31)? } else { AmbientRing::integers() };
        let sets: Vec<FiniteSet> = (0..k).map(|_| random_set(ring, 6, -15, 15, &mut rng)).collect();
        let mut v = structure::gmr_verdict(&sets)?;
        v.params["ring"] = json!(ring.to_string());
        v.params["trial"] = json!(i);
        out.push(v.with_seed(seed));
    }
    Ok(out)
}

/// `|kQ_h| ≤ |Q_h|^{log_{h+1}(kh+1)}` for power cubes of base `h+1`
/// (tight cube) and `k_max·h+1` (generic `kQ`).
pub fn qk_battery(d_max: usize, k_max: u32, h_max: u64) -> Result<Vec<Verdict>> {
    let z = AmbientRing::integers();
    let mut out = Vec::new();
    for h in 1..=h_max {
        for k in 1..=k_max {
            for d in 0..=d_max {
                for base in [h as i64 + 1, i64::from(k_max) * h as i64 + 1] {
                    let q = CubeSpec::with_height(z, 0, &pow2(d, base), h)?;
                    let (size, bound, ok) = crate::experiments::ksum_bound_holds(&q, k)?;
                    out.push(Verdict::new(
                        "ksum_bound",
                        json!({"d": d, "k": k, "h": h, "base": base}),
                        size,
                        format!("{bound:.6}"),
                        ok,
                    ));
                }
            }
        }
    }
    Ok(out)
}

/// The energy identity chain `Σr²_{A+A} = Σr²_{A−A} = E^+(A)` on random
/// sets, and the closed forms for `T_k`, `E_k` on generic power cubes.
pub fn identity_battery(trials: usize, max_size: usize, seed: u64) -> Result<Vec<Verdict>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = AmbientRing::integers();
    let mut out = Vec::new();
    for i in 0..trials {
        let a = random_set(z, max_size, -200, 200, &mut rng);
        let sums = setops::representation_power_sum(PairOp::Sum, &a, &a, 2)?;
        let diffs = setops::representation_power_sum(PairOp::Diff, &a, &a, 2)?;
        let report = energy::energy_pair(Mode::Additive, &a, &a)?;
        let pass = sums == diffs && diffs == report.value;
        out.push(
            Verdict::new(
                "energy_identity",
                json!({"size": a.len(), "trial": i, "method": report.method}),
                sums,
                diffs,
                pass,
            )
            .with_seed(seed),
        );
    }
    for h in 1..=2u32 {
        for k in 2..=3u32 {
            for d in 0..=4u32 {
                // digit-independent: base exceeds the digit range of kQ and of Q − Q
                let base = 2 * i64::from(k * h) + 1;
                let q = CubeSpec::with_height(z, 0, &pow2(d as usize, base), u64::from(h))?;
                let tk = energy::cube_tk(&q, k)?;
                let tk_closed = energy::tk_closed_form(k, h, d)?;
                let params = json!({"kind": EnergyKind::Tk, "k": k, "h": h, "d": d});
                out.push(Verdict::new("closed_form", params, tk, tk_closed, tk == tk_closed));
                let ek = energy::energy_k(Mode::Additive, &q.enumerate()?, k)?.value;
                let ek_closed = energy::ek_closed_form(k, h, d)?;
                let params = json!({"kind": EnergyKind::Ek, "k": k, "h": h, "d": d});
                out.push(Verdict::new("closed_form", params, ek, ek_closed, ek == ek_closed));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batteries_pass_small() {
        for v in symmetry_battery(5, 2, 1).unwrap() {
            assert!(v.pass, "{v:?}");
        }
        for v in sd_battery(5, 10, 10, 2).unwrap() {
            assert!(v.pass, "{v:?}");
        }
        for v in olmezov_battery(24, 3).unwrap() {
            assert!(v.pass, "{v:?}");
        }
        for v in gmr_battery(30, 4).unwrap() {
            assert!(v.pass, "{v:?}");
        }
        for v in qk_battery(3, 3, 2).unwrap() {
            assert!(v.pass, "{v:?}");
        }
        for v in identity_battery(10, 20, 5).unwrap() {
            assert!(v.pass, "{v:?}");
        }
    }

    #[test]
    fn batteries_are_seeded() {
        assert_eq!(olmezov_battery(8, 9).unwrap(), olmezov_battery(8, 9).unwrap());
        assert_eq!(gmr_battery(8, 9).unwrap(), gmr_battery(8, 9).unwrap());
    }
}
