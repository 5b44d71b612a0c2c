//! Rate of convergence for an almost-orbit with a plain rate `Φ`, plus a
//! check of the almost-orbit hypothesis itself.

use std::sync::Arc;

use accretive_flows::harness::{verify_almost_orbit_rate, verify_almost_orbit_tail};
use accretive_flows::moduli::{full_strongly_accretive, weak_from_full};
use accretive_flows::operators::{make_scaled_identity, AccretiveOperator};
use accretive_flows::rates::{omega_hilbert_exact, xu_rate_of_convergence, CertifiedThreshold, XuInputs};
use accretive_flows::semigroup::{make_almost_orbit, FlowEvaluator};
use accretive_flows::Point;

fn main() -> accretive_flows::Result<()> {
    let op: Arc<dyn AccretiveOperator> = Arc::new(make_scaled_identity(1.0, 1)?);
    let u = make_almost_orbit(op, &Point::scalar(2.0), 1.0, &Point::scalar(1.0), FlowEvaluator::Oracle)?;
    print!("{}", verify_almost_orbit_rate(&u, 4, 15.0, 0.05, 1e-9)?.summary());

    let weak = weak_from_full(full_strongly_accretive(1)?);
    let inputs = XuInputs::for_almost_orbit(&u, weak, omega_hilbert_exact())?;
    for k in 0..=3 {
        println!("k={k}: converged to within 1/(k+1) after t = {}", xu_rate_of_convergence(&inputs, k)?);
    }
    let threshold = CertifiedThreshold::from_fn("rate-of-convergence", move |k| {
        xu_rate_of_convergence(&inputs, k).unwrap_or(u64::MAX)
    });
    print!("{}", verify_almost_orbit_tail(&u, &threshold, (0, 3), 0.25, 50.0, 1e-9)?.summary());
    Ok(())
}
