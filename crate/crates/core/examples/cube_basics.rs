//! Building cubes, checking properness, subcubes, the reflection symmetry and
//! the size-balanced split.

use hcube::{AmbientRing, CubeSpec, Result};

fn main() -> Result<()> {
    let z = AmbientRing::integers();

    let q = CubeSpec::additive(z, 0, &[1, 4], &[0, 1])?;
    println!("Q = {} (proper: {})", q.enumerate()?, q.is_proper()?);

    // height 2, negative generator
    let q2 = CubeSpec::with_height(z, 3, &[-2, 7, 11], 2)?;
    let set = q2.enumerate()?;
    println!("|Q_2| = {} of {} digit vectors", set.len(), q2.digit_vectors());

    let x = q2.subcube(&[1])?;
    let y = q2.subcube(&[2, 3])?;
    println!("Q(X) = {}, |Q(Y)| = {}", x.enumerate()?, y.enumerate()?.len());

    let c = q2.symmetry_witness()?;
    println!("reflection about U + 2a0 = {c}: {}", q2.check_symmetry()?);

    let split = q2.split_hp()?;
    println!("split X = {:?}, Y = {:?}, sizes {} ≤ {}", split.x, split.y, split.x_size, split.y_size);

    // missing digits
    let qd = CubeSpec::additive(z, 0, &[1, 10, 100], &[0, 2, 5])?;
    println!("Q_D = {}", qd.enumerate()?);

    let mult = CubeSpec::multiplicative(z, 1, &[2, 3, 5])?;
    println!("Q^x = {}", mult.enumerate()?);

    let f = AmbientRing::prime_field(13)?;
    let qf = CubeSpec::additive(f, 0, &[1, 3, 9], &[0, 1])?;
    println!("over {f}: {} (proper: {})", qf.enumerate()?, qf.is_proper()?);

    if let Some(table) = q.digit_table(1)? {
        let mut rows: Vec<_> = table.into_iter().collect();
        rows.sort();
        for (v, eps) in rows {
            println!("  {v} <- {eps:?}");
        }
    }
    Ok(())
}
