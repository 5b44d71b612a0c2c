//! Metastability bounds for a perturbed orbit `u(t) = S(t)x + e/(1+t)`,
//! with a witnessing window found for each counterfunction.

use std::sync::Arc;

use accretive_flows::harness::verify_metastability;
use accretive_flows::moduli::{full_strongly_accretive, weak_from_full, RateFn};
use accretive_flows::operators::{make_scaled_identity, AccretiveOperator};
use accretive_flows::rates::{gamma, omega_hilbert_exact, XuInputs};
use accretive_flows::semigroup::{make_almost_orbit, FlowEvaluator};
use accretive_flows::Point;

fn main() -> accretive_flows::Result<()> {
    let op: Arc<dyn AccretiveOperator> = Arc::new(make_scaled_identity(1.0, 1)?);
    let u = make_almost_orbit(op, &Point::scalar(2.0), 1.0, &Point::scalar(1.0), FlowEvaluator::Oracle)?;
    let weak = weak_from_full(full_strongly_accretive(1)?);
    let inputs = XuInputs::for_almost_orbit(&u, weak, omega_hilbert_exact())?;
    for p in &inputs.audit {
        println!("{} = {}  ({})", p.name, p.value, p.certifies);
    }
    let bound = |k: u64, f: &RateFn| gamma(&inputs, k, &|n| f.at(n));
    let fs = [RateFn::id(), RateFn::affine(2, 0), RateFn::pow(2), RateFn::affine(1, 1)];
    let report = verify_metastability(&u, &bound, (0, 3), &fs, 0.25, 1e-9)?;
    print!("{}", report.summary());
    for row in &report.rows {
        println!(
            "k={} f={}: window starts at n={} (bound {})",
            row.k,
            row.counterfunction.as_deref().unwrap_or("-"),
            row.witness.unwrap_or(f64::NAN),
            row.certified_bound
        );
    }
    Ok(())
}
