//! Full → simple → weak moduli for every registered instance, checked on
//! certified sequences sampled from their flows.

use accretive_flows::harness::{check_conversion_chain, registry};

fn main() -> accretive_flows::Result<()> {
    for inst in registry()? {
        let report = check_conversion_chain(&inst, 3, 20, 0.25, 400, 1e-9)?;
        println!(
            "{:<24} {:<32} {} ({} cells)",
            inst.name,
            inst.full.label(),
            if report.passed() { "PASS" } else { "FAIL" },
            report.rows.len()
        );
    }
    Ok(())
}
