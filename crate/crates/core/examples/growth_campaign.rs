//! A small growth campaign logged as JSON lines, rerun to show that logged
//! trials are skipped, then exported as CSV.
//!
//! The log goes to `$HCUBE_LOG_DIR/example-campaign.jsonl`, or a temporary
//! directory.

use hcube::experiments::{self, CampaignConfig, ResultsLog};
use hcube::Result;

fn main() -> Result<()> {
    let config = CampaignConfig::from_json(
        r#"{
            "experiments": ["growth", "growth_multiplicative", "energy"],
            "dRange": [3, 7],
            "pList": [null, 10007],
            "seeds": [1, 2, 3]
        }"#,
    )?;
    let tmp = std::env::temp_dir().join(format!("hcube-example-{}", std::process::id()));
    let dir = std::env::var_os("HCUBE_LOG_DIR").map(Into::into).unwrap_or(tmp);
    let log = ResultsLog::new(dir.join("example-campaign.jsonl"));

    let first = experiments::run_campaign(&config, &log, 1)?;
    println!("{} new, {} skipped, {} failed", first.new_records.len(), first.skipped, first.failures());
    let again = experiments::run_campaign(&config, &log, 1)?;
    println!("rerun: {} new, {} skipped", again.new_records.len(), again.skipped);

    for r in first.new_records.iter().filter(|r| r.seed == 1) {
        println!("{} d={} p={} {:?} {:?}", r.name, r.spec["d"], r.spec["p"], r.flag, r.exponents);
    }
    let csv = experiments::export_csv(&log.read()?);
    println!("exported {} csv rows", csv.lines().count() - 1);
    println!("log: {}", log.path().display());
    Ok(())
}
