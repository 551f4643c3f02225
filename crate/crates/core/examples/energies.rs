//! Additive and multiplicative energies, higher energies E_k and T_k, their
//! closed forms on digit-independent cubes, and the explicit bounds.

use hcube::energy::{self, cube_energy_bounds};
use hcube::{AmbientRing, CubeSpec, FiniteSet, Mode, Result};

fn main() -> Result<()> {
    let z = AmbientRing::integers();
    let a = FiniteSet::from_i64s(z, [0, 1, 4, 5]);

    let e = energy::energy_pair(Mode::Additive, &a, &a)?.with_inputs(&["A", "A"]);
    println!("{}", serde_json::to_string(&e)?);
    println!("E_3 = {}", energy::energy_k(Mode::Additive, &a, 3)?.value);
    println!("T_2 = {}", energy::energy_tk(Mode::Additive, &a, 2)?.value);

    let m = FiniteSet::from_i64s(z, [0, 1, 2, 3, 4, 6]);
    println!("E^x with a zero = {}", energy::energy_pair(Mode::Multiplicative, &m, &m)?.value);

    // b = 2kh + 1 keeps every digit sum below the base
    let (k, h, d) = (3u32, 2u32, 4u32);
    let gens: Vec<i64> = (0..d).map(|j| 13i64.pow(j)).collect();
    let q = CubeSpec::with_height(z, 0, &gens, u64::from(h))?;
    println!("T_{k}: measured {} closed {}", energy::cube_tk(&q, k)?, energy::tk_closed_form(k, h, d)?);
    let ek = energy::energy_k(Mode::Additive, &q.enumerate()?, k)?.value;
    println!("E_{k}: measured {ek} closed {}", energy::ek_closed_form(k, h, d)?);

    let row: Vec<String> =
        (0..=k * h).map(|m| energy::partition_count(k, h, u64::from(m)).unwrap().to_string()).collect();
    println!("p_{{{k},{h}}} = [{}]", row.join(", "));

    let bounds = cube_energy_bounds(&q, 2)?;
    println!("{}", serde_json::to_string_pretty(&bounds)?);
    Ok(())
}
