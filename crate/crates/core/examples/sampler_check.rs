//! Frame sampler against exact enumeration on a distance-3 repetition code.
//!
//! ```text
//! cargo run --release --example sampler_check -- [p] [shots]
//! ```

use rydqec::frame_sim::{exact_distribution, sample_circuit};
use rydqec::pauli::{Letter, PauliString};
use rydqec::surface::{Circuit, Instruction};
use rydqec::twirl::PauliChannelTable;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let p: f64 = args.next().map_or(Ok(0.05), |s| s.parse())?;
    let shots: usize = args.next().map_or(Ok(100_000), |s| s.parse())?;

    let flip = PauliChannelTable::new(
        1,
        "x_flip",
        0.0,
        [
            (PauliString::identity(1), 1.0 - p),
            (PauliString::from_letters(&[Letter::X]), p),
        ],
    )?;
    // Data 0..3, ancillas 3 and 4 reading Z0Z1 and Z1Z2.
    let mut c = Circuit::new(5);
    let ch = c.add_channel(flip);
    c.push(Instruction::Reset(vec![0, 1, 2]));
    for q in 0..3 {
        c.push(Instruction::Noise { channel: ch, qubits: vec![q] });
    }
    c.push(Instruction::ResetPlus(vec![3, 4]));
    c.push(Instruction::Cz(vec![(3, 0), (4, 1)]));
    c.push(Instruction::Cz(vec![(3, 1), (4, 2)]));
    c.push(Instruction::MeasureX(vec![3, 4]));
    c.push(Instruction::Detector(vec![0]));
    c.push(Instruction::Detector(vec![1]));
    c.push(Instruction::MeasureZ(vec![0, 1, 2]));
    c.push(Instruction::Observable { index: 0, records: vec![2] });
    c.validate()?;
    print!("{}", c.to_text());

    let exact = exact_distribution(&c)?;
    let batch = sample_circuit(&c, shots, 1)?;
    let sampled = batch.detector_marginals();
    println!("\ndetector  exact      sampled    z");
    for (d, (e, s)) in exact.detector_marginals().iter().zip(&sampled).enumerate() {
        let sigma = (e * (1.0 - e) / shots as f64).sqrt();
        println!("D{d}        {e:.6}   {s:.6}   {:+.2}", (s - e) / sigma);
    }
    let obs = (0..shots).filter(|&s| batch.observables(s) & 1 == 1).count() as f64 / shots as f64;
    println!("L0        {:.6}   {obs:.6}", exact.observable_marginal(0));
    Ok(())
}
