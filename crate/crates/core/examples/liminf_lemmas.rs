//! Windowed liminf-rates: for an integrable integrand, and for the
//! accretivity pairing along an orbit.

use accretive_flows::harness::{verify_liminf_lemma, verify_nr_liminf};
use accretive_flows::operators::{make_quartic, make_scaled_identity};
use accretive_flows::semigroup::FlowEvaluator;
use accretive_flows::Point;

fn main() -> accretive_flows::Result<()> {
    let f = |t: f64| 1.0 / ((1.0 + t) * (1.0 + t));
    let r = verify_liminf_lemma(&f, 1.0, 5, 20, 0.01, 1e-9)?;
    print!("{}", r.summary());

    let si = make_scaled_identity(1.0, 1)?;
    let r = verify_nr_liminf(&si, &Point::scalar(2.0), 2, 5, 10, 0.01, FlowEvaluator::Oracle, 1e-9)?;
    print!("{}", r.summary());

    let q = make_quartic();
    let r = verify_nr_liminf(&q, &Point::scalar(3.0), 2, 5, 10, 0.01, FlowEvaluator::Oracle, 1e-9)?;
    print!("{}", r.summary());
    Ok(())
}
