//! Sumsets, difference, product and ratio sets with their representation
//! functions, iterated sums and products, and correlations.

use hcube::setops::{self, PairOp, Shifts};
use hcube::{AmbientRing, CubeSpec, FiniteSet, Mode, Result};

fn main() -> Result<()> {
    let z = AmbientRing::integers();
    let a = FiniteSet::from_i64s(z, [0, 1, 4, 5]);

    for op in [PairOp::Sum, PairOp::Diff, PairOp::Prod, PairOp::Ratio] {
        let (set, reps) = setops::pairwise(op, &a, &a)?;
        println!("{op:?}: {set}");
        print!("{}", reps.to_csv());
    }

    let big = CubeSpec::additive(z, 0, &[1, 1000, 1_000_000, 1_000_000_000], &[0, 1])?.enumerate()?;
    println!("|QQ| = {} without building it", setops::pairwise_size(PairOp::Prod, &big, &big)?);

    let q = CubeSpec::additive(z, 0, &[1, 3], &[0, 1])?;
    let (two_q, r) = setops::iterate_sum(&q, 2)?;
    println!("2Q = {two_q}, r(4) = {}", r.get(&z.elem(4)));

    let powers = CubeSpec::multiplicative(z, 1, &[2, 3])?.enumerate()?;
    setops::product_trajectory(&powers, 4, 1 << 20, |p| {
        println!("  |Q^n| = {}", p.len());
        true
    })?;

    let table = setops::correlation(Mode::Additive, &[a.clone(), a.clone(), a.clone()], Shifts::All, 1 << 20)?;
    for (shift, c) in table.entries.iter().take(5) {
        let s: Vec<String> = shift.iter().map(|e| e.to_string()).collect();
        println!("  C_3({}) = {c}", s.join(","));
    }

    let f = AmbientRing::prime_field(7)?;
    let b = FiniteSet::from_i64s(f, [1, 2, 4]);
    println!("in {f}: B/B = {}", setops::pairwise_set(PairOp::Ratio, &b, &b)?);
    Ok(())
}
