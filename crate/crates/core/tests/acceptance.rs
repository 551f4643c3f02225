//! Acceptance criteria 1–11. Each criterion prints one PASS/FAIL line with
//! its runtime and limit; the test fails if any criterion fails.

use std::collections::{HashMap, HashSet};
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use hcube::energy;
use hcube::experiments::{self, verify, CampaignConfig, ExperimentRecord, Flag, ResultsLog};
use hcube::incidence::{self, Instance2d, Instance3d};
use hcube::setops::{self, PairOp};
use hcube::structure;
use hcube::{AmbientRing, CubeSpec, FiniteSet, Mode};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn z() -> AmbientRing {
    AmbientRing::integers()
}

fn ints(set: &FiniteSet) -> Vec<i64> {
    set.iter().map(|e| e.as_i64().expect("small integer")).collect()
}

fn powers(d: usize, base: i64) -> Vec<i64> {
    (0..d).map(|j| base.pow(j as u32)).collect()
}

struct Harness {
    failed: Vec<usize>,
}

impl Harness {
    fn run(&mut self, id: usize, title: &str, limit: Duration, f: impl FnOnce() -> Outcome) {
        let started = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panic: {}", msg.unwrap_or_default()))
        });
        let elapsed = started.elapsed();
        let (ok, detail) = match result {
            Ok(d) if elapsed <= limit => (true, d),
            Ok(d) => (false, format!("{d}; over time limit")),
            Err(e) => (false, e),
        };
        if !ok {
            self.failed.push(id);
        }
        // written to the raw handle so the line survives output capture
        let _ = writeln!(
            std::io::stdout().lock(),
            "AC{id:<2} {} {title} [{:.2}s / limit {}s] {detail}",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs(),
        );
    }
}

/// Ordered k-tuples over `[0, h]` tallied by sum.
fn partition_oracle(k: u32, h: u32) -> Vec<u128> {
    let mut counts = vec![0u128; (k * h) as usize + 1];
    let mut digits = vec![0u32; k as usize];
    loop {
        counts[digits.iter().sum::<u32>() as usize] += 1;
        let mut i = 0;
        loop {
            if i == digits.len() {
                return counts;
            }
            if digits[i] < h {
                digits[i] += 1;
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

fn binomial(n: u32, r: u32) -> u128 {
    (0..r).fold(1u128, |acc, i| acc * u128::from(n - i) / u128::from(i + 1))
}

fn ac1() -> Outcome {
    let mut checked = 0;
    for k in 1..=6u32 {
        for h in 1..=4u32 {
            let oracle = partition_oracle(k, h);
            for m in 0..=k * h {
                let got = energy::partition_count(k, h, u64::from(m)).map_err(|e| e.to_string())?;
                ensure(got == oracle[m as usize], || {
                    format!("p_{{{k},{h}}}({m}) = {got}, enumeration {}", oracle[m as usize])
                })?;
                checked += 1;
            }
        }
        for m in 0..=k {
            let got = energy::partition_count(k, 1, u64::from(m)).map_err(|e| e.to_string())?;
            ensure(got == binomial(k, m), || format!("p_{{{k},1}}({m}) ≠ C({k},{m})"))?;
        }
    }
    Ok(format!("{checked} values match enumeration; p_{{k,1}} = binomial"))
}

fn ac2() -> Outcome {
    let anchor = energy::energy_pair(
        Mode::Additive,
        &FiniteSet::from_i64s(z(), [0, 1, 4, 5]),
        &FiniteSet::from_i64s(z(), [0, 1, 4, 5]),
    )
    .map_err(|e| e.to_string())?;
    ensure(anchor.value == 36, || format!("E+({{0,1,4,5}}) = {}", anchor.value))?;
    let mut checked = 0;
    for h in 1..=2u32 {
        for k in 2..=3u32 {
            for d in 0..=6u32 {
                let base = 2 * i64::from(k * h) + 1;
                let q = CubeSpec::with_height(z(), 0, &powers(d as usize, base), u64::from(h))
                    .map_err(|e| e.to_string())?;
                let set = q.enumerate().map_err(|e| e.to_string())?;
                let sq: u128 = (0..=k * h).map(|j| energy::partition_count(k, h, u64::from(j)).unwrap().pow(2)).sum();
                let tk_expected = sq.pow(d);
                let tk = energy::cube_tk(&q, k).map_err(|e| e.to_string())?;
                ensure(tk == tk_expected, || format!("T_{k}(Q_{h}) d={d}: {tk} vs {tk_expected}"))?;
                if set.len() <= 729 {
                    // independent route: k-fold convolution of the enumerated set
                    let direct = energy::energy_tk(Mode::Additive, &set, k).map_err(|e| e.to_string())?.value;
                    ensure(direct == tk, || format!("T_{k} convolution {direct} vs digit route {tk}"))?;
                }
                let ek = energy::energy_k(Mode::Additive, &set, k).map_err(|e| e.to_string())?.value;
                let ek_expected = energy::ek_closed_form(k, h, d).map_err(|e| e.to_string())?;
                ensure(ek == ek_expected, || format!("E_{k}(Q_{h}) d={d}: {ek} vs {ek_expected}"))?;
                if h == 1 {
                    ensure(ek == (2u128.pow(k) + 2).pow(d), || format!("E_{k} ≠ (2^k+2)^d at d={d}"))?;
                }
                checked += 1;
            }
        }
    }
    Ok(format!("E+({{0,1,4,5}}) = 36; {checked} cubes match T_k and E_k closed forms"))
}

fn quadruples(a: &[i64]) -> u128 {
    let set: HashSet<i64> = a.iter().copied().collect();
    let mut n = 0u128;
    for &x in a {
        for &y in a {
            for &u in a {
                if set.contains(&(x + y - u)) {
                    n += 1;
                }
            }
        }
    }
    n
}

fn ac3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..200 {
        let size = rng.gen_range(1..=40);
        let a = FiniteSet::from_i64s(z(), (0..size).map(|_| rng.gen_range(-500..=500)));
        let plus = setops::representation_power_sum(PairOp::Sum, &a, &a, 2).map_err(|e| e.to_string())?;
        let minus = setops::representation_power_sum(PairOp::Diff, &a, &a, 2).map_err(|e| e.to_string())?;
        let report = energy::energy_pair(Mode::Additive, &a, &a).map_err(|e| e.to_string())?;
        let brute = quadruples(&ints(&a));
        ensure(plus == minus && minus == brute && report.value == brute, || {
            format!("set {i}: Σr²(A+A)={plus} Σr²(A−A)={minus} E+={} brute={brute}", report.value)
        })?;
    }
    Ok("200 random sets, |A| ≤ 40: sums, differences and quadruple count agree".into())
}

fn ac4() -> Outcome {
    let verdicts = verify::symmetry_battery(12, 3, 4).map_err(|e| e.to_string())?;
    if let Some(v) = verdicts.iter().find(|v| !v.pass) {
        return Err(format!("symmetry fails: {}", v.params));
    }
    // independent reflection on small cubes
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    for _ in 0..50 {
        let d = rng.gen_range(0..=6);
        let h = rng.gen_range(1..=3u64);
        let gens: Vec<i64> = (0..d).map(|_| rng.gen_range(-20..=20)).filter(|g| *g != 0).collect();
        let q = CubeSpec::with_height(z(), rng.gen_range(-5..=5), &gens, h).map_err(|e| e.to_string())?;
        let set: HashSet<i64> = ints(&q.enumerate().map_err(|e| e.to_string())?).into_iter().collect();
        let c = 2 * q.a0.as_i64().unwrap() + h as i64 * gens.iter().sum::<i64>();
        ensure(set.iter().all(|x| set.contains(&(c - x))), || format!("reflection fails for {gens:?} h={h}"))?;
    }
    Ok(format!("{} cubes (d ≤ 12, h ≤ 3, three generator families) symmetric", verdicts.len()))
}

fn ac5() -> Outcome {
    let verdicts = verify::sd_battery(10, 100, 100, 5).map_err(|e| e.to_string())?;
    if let Some(v) = verdicts.iter().find(|v| !v.pass) {
        return Err(format!("{} fails: {} lhs={} rhs={}", v.name, v.params, v.lhs, v.rhs));
    }
    // brute-force coverage on small cubes
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    for _ in 0..40 {
        let d = rng.gen_range(1..=6);
        let gens: Vec<i64> = (0..d).map(|_| rng.gen_range(1..=9)).collect();
        let q = ints(
            &CubeSpec::additive(z(), 0, &gens, &[0, 1])
                .map_err(|e| e.to_string())?
                .enumerate()
                .map_err(|e| e.to_string())?,
        );
        let (mut plus, mut minus) = (HashMap::new(), HashMap::new());
        for &x in &q {
            for &y in &q {
                *plus.entry(x + y).or_insert(0u64) += 1;
                *minus.entry(x - y).or_insert(0u64) += 1;
            }
        }
        let n = q.len() as u64;
        for &x in &q {
            for &y in &q {
                let (rp, rm) = (plus[&(x + y)], minus[&(x - y)]);
                ensure(rp * rp >= n || rm * rm >= n, || format!("pair ({x},{y}) uncovered in cube {gens:?}"))?;
            }
        }
    }
    let sd = verdicts.iter().filter(|v| v.name == "sd_decomposition").count();
    let en = verdicts.iter().filter(|v| v.name == "energy_lower").count();
    Ok(format!("{sd} cubes covered with |S|,|D| ≤ |Q|^{{3/2}}; {en} subsets satisfy E+(B,Q) ≥ |B|²√|Q|"))
}

/// Direct evaluation: x̄ over (A−A)^{m−1}, ȳ over (B−A)^s, correlations
/// summed over z.
fn olmezov_oracle(a: &[i64], b: &[i64], d: &[i64], n: u32, s: u32, m: u32) -> (BigUint, BigUint) {
    let (sa, sb, sd): (HashSet<i64>, HashSet<i64>, HashSet<i64>) =
        (a.iter().copied().collect(), b.iter().copied().collect(), d.iter().copied().collect());
    let sigma = a.iter().flat_map(|x| b.iter().map(move |y| y - x)).filter(|v| sd.contains(v)).count();
    let diffs = |u: &[i64], v: &[i64]| -> Vec<i64> {
        let mut out: Vec<i64> = u.iter().flat_map(|x| v.iter().map(move |y| x - y)).collect();
        out.sort_unstable();
        out.dedup();
        out
    };
    let (xs, ys) = (diffs(a, a), diffs(b, a));
    let tuples = |pool: &[i64], len: u32| -> Vec<Vec<i64>> {
        let mut out = vec![Vec::new()];
        for _ in 0..len {
            out = out.into_iter().flat_map(|t| pool.iter().map(move |&v| [t.clone(), vec![v]].concat())).collect();
        }
        out
    };
    let mut total = BigUint::from(0u8);
    for xt in tuples(&xs, m - 1) {
        let xbar: Vec<i64> = std::iter::once(0).chain(xt).collect();
        let cb = b.iter().filter(|&&zz| xbar.iter().all(|x| sb.contains(&(zz + x)))).count();
        for ybar in tuples(&ys, s) {
            if !ybar.iter().all(|y| xbar.iter().all(|x| sd.contains(&(y - x)))) {
                continue;
            }
            let cab = a
                .iter()
                .filter(|&&zz| {
                    xbar.iter().all(|x| sa.contains(&(zz + x))) && ybar.iter().all(|y| sb.contains(&(zz + y)))
                })
                .count();
            total += BigUint::from(cb).pow(n - s) * BigUint::from(cab);
        }
    }
    let pre = BigUint::from(a.len()).pow((n - 1) * m)
        * BigUint::from(b.len()).pow(s * (m - 1))
        * BigUint::from(d.len()).pow((n - s) * (m - 1));
    (BigUint::from(sigma).pow(m * n), pre * total)
}

fn ac6() -> Outcome {
    let verdicts = verify::olmezov_battery(500, 6).map_err(|e| e.to_string())?;
    if let Some(v) = verdicts.iter().find(|v| !v.pass) {
        return Err(format!("lhs > rhs at {}", v.params));
    }
    let shaped = verdicts.iter().filter(|v| v.params["shape"] == "inverse_product").count();
    ensure(shaped > 0, || "no A = B⁻¹, D = BB instance".into())?;
    let modes: HashSet<String> = verdicts.iter().map(|v| v.params["mode"].to_string()).collect();
    ensure(modes.len() == 2, || "both modes must be fuzzed".into())?;
    let mut rng = ChaCha8Rng::seed_from_u64(60);
    for _ in 0..60 {
        let mut draw =
            || FiniteSet::from_i64s(z(), (0..rng.gen_range(1..=5)).map(|_| rng.gen_range(-6..=6)).collect::<Vec<_>>());
        let (a, b, d) = (draw(), draw(), draw());
        let n = rng.gen_range(2..=3u32);
        let s = rng.gen_range(1..n);
        let m = rng.gen_range(1..=2u32);
        let sides = structure::olmezov_sides(&a, &b, &d, n, s, m, Mode::Additive).map_err(|e| e.to_string())?;
        let (lhs, rhs) = olmezov_oracle(&ints(&a), &ints(&b), &ints(&d), n, s, m);
        ensure(sides.lhs == lhs && sides.rhs == rhs, || format!("oracle mismatch n={n} s={s} m={m}"))?;
    }
    Ok(format!("500 instances hold exactly ({shaped} of the inverse/product shape); 60 match the direct oracle"))
}

fn ac7() -> Outcome {
    let verdicts = verify::gmr_battery(500, 7).map_err(|e| e.to_string())?;
    if let Some(v) = verdicts.iter().find(|v| !v.pass) {
        return Err(format!("GMR fails at {}: {} > {}", v.params, v.lhs, v.rhs));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(70);
    for _ in 0..100 {
        let k = rng.gen_range(2..=5usize);
        let raw: Vec<Vec<i64>> =
            (0..k).map(|_| (0..rng.gen_range(1..=5)).map(|_| rng.gen_range(-12..=12)).collect()).collect();
        let sets: Vec<FiniteSet> = raw.iter().map(|v| FiniteSet::from_i64s(z(), v.iter().copied())).collect();
        let sumset = |skip: Option<usize>| -> usize {
            let mut acc: HashSet<i64> = [0].into();
            for (_, s) in raw.iter().enumerate().filter(|(i, _)| Some(*i) != skip) {
                acc = acc.iter().flat_map(|x| s.iter().map(move |y| x + y)).collect();
            }
            acc.len()
        };
        let lhs = BigUint::from(sumset(None)).pow(k as u32 - 1);
        let rhs = (0..k).fold(BigUint::from(1u8), |acc, j| acc * BigUint::from(sumset(Some(j))));
        let got = structure::gmr_check(&sets).map_err(|e| e.to_string())?;
        ensure(got == (lhs.clone(), rhs.clone()), || format!("GMR sides differ from oracle for k={k}"))?;
        ensure(lhs <= rhs, || "oracle instance violates GMR".into())?;
    }
    Ok("500 fuzzed instances hold; 100 match brute-force sumsets".into())
}

fn ac8() -> Outcome {
    let verdicts = verify::qk_battery(8, 3, 2).map_err(|e| e.to_string())?;
    if let Some(v) = verdicts.iter().find(|v| !v.pass) {
        return Err(format!("|kQ| bound fails at {}: {} > {}", v.params, v.lhs, v.rhs));
    }
    for h in 1..=2u64 {
        for k in 1..=3u32 {
            for d in 0..=4 {
                let q = CubeSpec::with_height(z(), 0, &powers(d, 7), h).map_err(|e| e.to_string())?;
                let base = ints(&q.enumerate().map_err(|e| e.to_string())?);
                let mut acc: HashSet<i64> = [0].into();
                for _ in 0..k {
                    acc = acc.iter().flat_map(|x| base.iter().map(move |y| x + y)).collect();
                }
                let (size, _, ok) = experiments::ksum_bound_holds(&q, k).map_err(|e| e.to_string())?;
                ensure(size == acc.len() && ok, || format!("|{k}Q| mismatch at d={d} h={h}"))?;
            }
        }
    }
    Ok(format!("{} cubes satisfy |kQ| ≤ |Q|^{{log_{{h+1}}(kh+1)}}; small cases match brute force", verdicts.len()))
}

fn ac9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut ratios = Vec::new();
    for p in [3u64, 5, 7, 11, 13] {
        let grid = Instance2d::full_grid(p).map_err(|e| e.to_string())?;
        let c = incidence::count_incidences_2d(&grid).map_err(|e| e.to_string())?;
        ensure(c.consistent() && c.incidences() == grid.lines.len() as u64 * p, || format!("full grid p={p}: {c:?}"))?;
    }
    for p in [5u64, 7, 11, 13, 101, 8191, 10007] {
        for _ in 0..4 {
            let a: Vec<u64> = (0..rng.gen_range(1..=12)).map(|_| rng.gen_range(0..p)).collect();
            let b: Vec<u64> = (0..rng.gen_range(1..=12)).map(|_| rng.gen_range(0..p)).collect();
            let inst =
                Instance2d::random_grid(p, &a, &b, rng.gen_range(1..=80), &mut rng).map_err(|e| e.to_string())?;
            let report = incidence::report_2d(&inst, None).map_err(|e| e.to_string())?;
            let brute = inst
                .lines
                .iter()
                .map(|l| inst.points.iter().filter(|&&pt| l.contains(p, pt)).count() as u64)
                .sum::<u64>();
            ensure(report.count.consistent() && report.count.incidences() == brute, || {
                format!("2d p={p}: {:?} brute {brute}", report.count)
            })?;
            ratios.extend(report.comparisons.iter().map(|c| c.ratio));
            let inst = Instance3d::random(p, rng.gen_range(1..=60), rng.gen_range(1..=60), &mut rng)
                .map_err(|e| e.to_string())?;
            let report = incidence::report_3d(&inst).map_err(|e| e.to_string())?;
            let brute = inst
                .planes
                .iter()
                .map(|pl| inst.points.iter().filter(|&&pt| pl.contains(p, pt)).count() as u64)
                .sum::<u64>();
            ensure(report.count.consistent() && report.count.incidences() == brute, || {
                format!("3d p={p}: {:?} brute {brute}", report.count)
            })?;
            ratios.extend(report.comparisons.iter().map(|c| c.ratio));
        }
    }
    let max = ratios.iter().copied().fold(0.0f64, f64::max);
    Ok(format!(
        "double counts agree on 56 random instances; full grids give |L|·p; max RHS ratio {max:.3} (report only)"
    ))
}

fn growth_config(d: [usize; 2], p: Option<u64>) -> CampaignConfig {
    let text = serde_json::json!({
        "experiments": ["growth", "growth_multiplicative"],
        "dRange": d,
        "pList": [p],
        "seeds": (0..10).collect::<Vec<u64>>(),
    });
    CampaignConfig::from_json(&text.to_string()).expect("config")
}

fn ac10() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let floors = experiments::Floors::default();
    let log = ResultsLog::new(dir.path().join("z.jsonl"));
    let outcome = experiments::run_campaign(&growth_config([4, 12], None), &log, 1).map_err(|e| e.to_string())?;
    let records = &outcome.new_records;
    let asserted: Vec<&ExperimentRecord> =
        records.iter().filter(|r| matches!(r.flag, Flag::Pass | Flag::Fail)).collect();
    let improper = records.iter().filter(|r| r.measured.get("proper").map(String::as_str) == Some("false")).count();
    ensure(asserted.len() + improper == 180, || {
        format!("{} asserted, {improper} improper of {}", asserted.len(), records.len())
    })?;
    let min_of = |keys: &[&str]| -> f64 {
        asserted
            .iter()
            .flat_map(|r| keys.iter().filter_map(|k| r.exponents.get(*k).copied()))
            .fold(f64::INFINITY, f64::min)
    };
    let (prod, sum) = (min_of(&["QQ", "Q/Q"]), min_of(&["Q+Q", "Q-Q"]));
    if let Some(r) = records.iter().find(|r| r.flag != Flag::Pass && r.flag != Flag::Report) {
        return Err(format!("record {:?} flagged {:?}: {:?}", r.spec, r.flag, r.exponents));
    }
    let flog = ResultsLog::new(dir.path().join("fp.jsonl"));
    let field = experiments::run_campaign(&growth_config([4, 10], Some(10007)), &flog, 1).map_err(|e| e.to_string())?;
    ensure(field.new_records.iter().all(|r| r.flag == Flag::Report), || "F_p trials must be report-only".into())?;
    let below = field
        .new_records
        .iter()
        .filter(|r| {
            r.name == "growth"
                && r.measured
                    .get("QQ")
                    .and_then(|v| v.parse::<f64>().ok())
                    .zip(r.bounds.get("QQ"))
                    .is_some_and(|(m, b)| m < *b)
        })
        .count();
    Ok(format!(
        "min exponents: QQ,Q/Q {prod:.4} ≥ {}, Q+Q,Q−Q {sum:.4} ≥ {}; F_p 10007: {} reports, {below} below min{{|Q|^{{6/5}}, √(|Q|p)}}",
        floors.product,
        floors.sum,
        field.new_records.len()
    ))
}

fn ac11() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let text = serde_json::json!({
        "experiments": ["growth", "growth_multiplicative", "energy", "energy_multiplicative", "conjecture"],
        "dRange": [2, 6],
        "hRange": [1, 2],
        "pList": [null, 101],
        "seeds": [1, 2],
    });
    let cfg = CampaignConfig::from_json(&text.to_string()).map_err(|e| e.to_string())?;
    let run = |name: &str, jobs: usize| -> Result<Vec<ExperimentRecord>, String> {
        let log = ResultsLog::new(dir.path().join(name));
        experiments::run_campaign(&cfg, &log, jobs).map_err(|e| e.to_string())?;
        Ok(log.read().map_err(|e| e.to_string())?.iter().map(ExperimentRecord::without_timing).collect())
    };
    let (first, second, parallel) = (run("a.jsonl", 1)?, run("b.jsonl", 1)?, run("c.jsonl", 2)?);
    ensure(!first.is_empty() && first == second && first == parallel, || "records differ between runs".into())?;
    let log = ResultsLog::new(dir.path().join("a.jsonl"));
    let again = experiments::run_campaign(&cfg, &log, 1).map_err(|e| e.to_string())?;
    ensure(again.new_records.is_empty(), || "rerun appended records".into())?;
    Ok(format!("{} records identical across reruns and worker counts", first.len()))
}

#[test]
fn acceptance() {
    let mut h = Harness { failed: Vec::new() };
    let secs = Duration::from_secs;
    h.run(1, "partition counts", secs(1), ac1);
    h.run(2, "closed-form energies", secs(10), ac2);
    h.run(3, "energy identities", secs(30), ac3);
    h.run(4, "cube symmetry", secs(30), ac4);
    h.run(5, "S/D decomposition", secs(120), ac5);
    h.run(6, "Olmezov inequality", secs(120), ac6);
    h.run(7, "GMR inequality", secs(60), ac7);
    h.run(8, "kQ size bound", secs(60), ac8);
    h.run(9, "incidence double counting", secs(60), ac9);
    h.run(10, "growth floors", secs(300), ac10);
    h.run(11, "campaign determinism", secs(300), ac11);
    assert!(h.failed.is_empty(), "failed criteria: {:?}", h.failed);
}
