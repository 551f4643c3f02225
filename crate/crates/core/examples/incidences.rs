//! Incidence counts over F_p, each computed twice, with the reference
//! right-hand sides reported alongside.

use hcube::incidence::{self, Instance2d, Instance3d, Line};
use hcube::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<()> {
    let grid = Instance2d::full_grid(7)?;
    let c = incidence::count_incidences_2d(&grid)?;
    println!("full F_7 grid: I = {} = |L|·p = {}", c.incidences(), grid.lines.len() * 7);

    let tiny = Instance2d::new(
        5,
        vec![[0, 1], [1, 2], [2, 3]],
        vec![Line::Sloped { slope: 1, intercept: 1 }, Line::Vertical { x: 0 }],
    )?;
    println!("{}", serde_json::to_string(&incidence::count_incidences_2d(&tiny)?)?);

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let a: Vec<u64> = (0..20).collect();
    let inst = Instance2d::random_grid(101, &a, &a, 200, &mut rng)?;
    let report = incidence::report_2d(&inst, Some((20, 20)))?;
    for cmp in &report.comparisons {
        println!("{}: {:.1} vs {:.1} (ratio {:.3})", cmp.name, cmp.measured, cmp.rhs, cmp.ratio);
    }

    let inst = Instance3d::random(31, 300, 100, &mut rng)?;
    let report = incidence::report_3d(&inst)?;
    println!("3d: I = {}, max collinear {:?}", report.count.incidences(), report.count.max_collinear);
    for cmp in &report.comparisons {
        println!("{}: {:.1} vs {:.1}", cmp.name, cmp.measured, cmp.rhs);
    }
    Ok(())
}
