//! Single-fault check of the readout orderings on a distance-D layout.
//!
//! ```text
//! cargo run --example ordering_check -- [D]
//! ```

use rydqec::surface::{analyze_ordering, CodeLayout, GateOrdering, Pairing};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let d: usize = std::env::args().nth(1).map_or(Ok(3), |s| s.parse())?;
    let layout = CodeLayout::new(d)?;
    println!(
        "D={d}: {} data, {} ancillas, {} stabilizers",
        layout.num_data(),
        layout.num_ancillas(),
        layout.stabilizers.len()
    );
    for ordering in [
        GateOrdering::two_cz2(Pairing::Ft),
        GateOrdering::two_cz2(Pairing::NonFt),
        GateOrdering::four_cz(),
    ] {
        let report = analyze_ordering(&layout, &ordering);
        println!(
            "{ordering:<14} fault tolerant: {:<5} ({} faults, {} aligned)",
            report.fault_tolerant,
            report.faults.len(),
            report.offending.len()
        );
        for &i in report.offending.iter().take(3) {
            let f = &report.faults[i];
            println!(
                "    stabilizer {} after window {}: fault {:?} leaves {:?}",
                f.stabilizer, f.window, f.fault, f.residual
            );
        }
    }
    Ok(())
}
