//! Popular sums and differences, the Olmezov inequality, the projection
//! inequality for sumsets, and shifted intersections.

use hcube::setops::{self, PairOp};
use hcube::structure;
use hcube::{AmbientRing, CubeSpec, FiniteSet, Mode, Result};

fn main() -> Result<()> {
    let z = AmbientRing::integers();
    let q = CubeSpec::additive(z, 0, &[1, 4], &[0, 1])?;
    let sd = structure::sd_decompose(&q)?;
    println!("S = {}, D = {}", sd.s, sd.d);
    println!("{:?}", sd.scan_pairs()?);

    let sub = FiniteSet::from_i64s(z, [0, 5]);
    let v = structure::energy_lower_check(&sub, &q)?;
    println!("E+(B,Q) = {} vs {} : {}", v.lhs, v.rhs, v.pass);

    let a = FiniteSet::from_i64s(z, [0, 1, 3]);
    let sides = structure::olmezov_sides(&a, &a, &a, 3, 1, 2, Mode::Additive)?;
    println!("olmezov sigma={} lhs={} rhs={}", sides.sigma, sides.lhs, sides.rhs);

    let f = AmbientRing::prime_field(13)?;
    let b = FiniteSet::from_i64s(f, [2, 3, 5]);
    let inv = b.map(|x| f.inv(x))?;
    let bb = setops::pairwise_set(PairOp::Prod, &b, &b)?;
    let sides = structure::olmezov_sides(&inv, &b, &bb, 2, 1, 2, Mode::Multiplicative)?;
    println!("F_13, A = B^-1, D = BB: {} <= {}", sides.lhs, sides.rhs);

    let sets = [FiniteSet::from_i64s(z, [0, 1]), FiniteSet::from_i64s(z, [0, 2]), FiniteSet::from_i64s(z, [0, 5, 9])];
    let (lhs, rhs) = structure::gmr_check(&sets)?;
    println!("GMR {lhs} <= {rhs}");

    let s = FiniteSet::from_i64s(AmbientRing::prime_field(11)?, [1, 2, 5]);
    let v = structure::shifted_intersection_verdict(&s, &f.elem(1))?;
    println!("shifted: {} <= {}", v.lhs, v.rhs);
    Ok(())
}
