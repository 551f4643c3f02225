//! How fast |Q^n| reaches |Q|^m for additive cubes.

use hcube::experiments;
use hcube::{AmbientRing, CubeSpec, Result};

fn main() -> Result<()> {
    let z = AmbientRing::integers();
    for gens in [vec![1, 2], vec![1, 3, 9], vec![2, 7, 30, 101]] {
        let q = CubeSpec::additive(z, 1, &gens, &[0, 1])?.enumerate()?;
        let rec = experiments::conjecture_probe(&q, 2, 6, 1 << 20, 0)?;
        println!("Q = {q}: n = {:?}, trajectory {}", rec.measured.get("n"), rec.measured["trajectory"]);
    }
    Ok(())
}
