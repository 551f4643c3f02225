//! The seeded verification batteries behind `hcube verify`.

use hcube::experiments::verify;
use hcube::structure::Verdict;
use hcube::Result;

fn summary(name: &str, vs: &[Verdict]) {
    let failed = vs.iter().filter(|v| !v.pass).count();
    println!("{name:<12} {:>4} instances, {failed} failed", vs.len());
}

fn main() -> Result<()> {
    let seed = 2024;
    summary("symmetry", &verify::symmetry_battery(8, 3, seed)?);
    summary("sd", &verify::sd_battery(8, 20, 20, seed)?);
    summary("olmezov", &verify::olmezov_battery(100, seed)?);
    summary("gmr", &verify::gmr_battery(100, seed)?);
    summary("qk-bounds", &verify::qk_battery(6, 3, 2)?);
    summary("identities", &verify::identity_battery(50, 40, seed)?);
    Ok(())
}
