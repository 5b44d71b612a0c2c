//! Sampled soundness checks of full moduli, and a deliberately wrong modulus
//! that the check refutes.

use accretive_flows::moduli::{
    check_full_modulus, full_quartic, full_strongly_accretive, FullModulus, GraphSampling,
};
use accretive_flows::operators::{make_quartic, make_scaled_identity};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> accretive_flows::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    let op = make_scaled_identity(1.0, 4)?;
    let full = full_strongly_accretive(1)?;
    let random = GraphSampling::Random { samples: 10_000 };
    let r = check_full_modulus(&op, &full, 10, 10, &random, &mut rng, 1e-9)?;
    println!("{} / {}: {} pairs, {} violations", r.operator, r.modulus, r.pairs_checked, r.violations.len());

    let quartic = make_quartic();
    let grid = GraphSampling::Grid { lo: -6.0, hi: 6.0, step: 1e-3 };
    for full in [full_quartic(), FullModulus::from_fn("k", |_, k| k)] {
        let r = check_full_modulus(&quartic, &full, 1000, 5, &grid, &mut rng, 1e-9)?;
        println!("{} / {}: {} pairs, {} violations", r.operator, r.modulus, r.pairs_checked, r.violations.len());
        for (k, count, worst) in &r.per_k {
            println!("  k={k}: {count} points meet the premise, max |x-Px| = {worst:.4}");
        }
        if let Some(v) = r.violations.first() {
            println!("  first counterexample: k={} x={:?} |x-Px|={:.4}", v.k, v.x, v.distance);
        }
    }
    Ok(())
}
