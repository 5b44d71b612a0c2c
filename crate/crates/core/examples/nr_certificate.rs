//! Certified Cauchy thresholds for orbits, checked against closed-form flows.

use accretive_flows::harness::verify_cauchy_rate;
use accretive_flows::moduli::{full_quartic, full_strongly_accretive, weak_from_full};
use accretive_flows::operators::{make_quartic, make_scaled_identity, AccretiveOperator};
use accretive_flows::rates::{nr_threshold, NrInputs};
use accretive_flows::semigroup::FlowEvaluator;
use accretive_flows::Point;

fn main() -> accretive_flows::Result<()> {
    let cases: Vec<(Box<dyn AccretiveOperator>, _, Point)> = vec![
        (Box::new(make_scaled_identity(1.0, 1)?), full_strongly_accretive(1)?, Point::scalar(2.0)),
        (Box::new(make_quartic()), full_quartic(), Point::scalar(3.0)),
    ];
    for (op, full, x) in cases {
        let inputs = NrInputs::from_witnesses(op.as_ref(), weak_from_full(full), &x)?;
        for p in &inputs.audit {
            println!("{} = {}  ({})", p.name, p.value, p.certifies);
        }
        let threshold = nr_threshold(&inputs);
        let report = verify_cauchy_rate(
            op.as_ref(),
            &x,
            &threshold,
            (0, 5),
            0.25,
            50.0,
            FlowEvaluator::Oracle,
            1e-9,
        )?;
        print!("{}", report.summary());
    }
    Ok(())
}
