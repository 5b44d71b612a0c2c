//! The exponential formula `J_{t/n}^n x` against the closed-form flow, next
//! to its a-priori certificate `2t‖Ax‖/√n`.

use accretive_flows::operators::{dirichlet_laplacian, make_scaled_identity, make_spd_linear, AccretiveOperator};
use accretive_flows::semigroup::{cl_certificate, evaluate_oracle, evaluate_semigroup, exponential_formula};
use accretive_flows::Point;

fn main() -> accretive_flows::Result<()> {
    let cases: Vec<(Box<dyn AccretiveOperator>, Point)> = vec![
        (Box::new(make_scaled_identity(1.0, 1)?), Point::scalar(2.0)),
        (
            Box::new(make_spd_linear(dirichlet_laplacian(4))?),
            Point::new(vec![1.0, -2.0, 0.5, 3.0])?,
        ),
    ];
    for (op, x) in &cases {
        let v = op.value(x).expect("single-valued").norm();
        println!("{} from {x:?}", op.name());
        println!("  {:>6} {:>5} {:>12} {:>12}", "n", "t", "error", "certificate");
        for t in [0.5, 1.0, 2.0] {
            let exact = evaluate_oracle(op.as_ref(), x, t)?;
            for n in [4u64, 16, 64, 256, 1024] {
                let err = exponential_formula(op.as_ref(), x, t, n).dist(&exact);
                println!("  {n:>6} {t:>5} {err:>12.3e} {:>12.3e}", cl_certificate(t, v, n));
            }
        }
        let e = evaluate_semigroup(op.as_ref(), x, 1.0, 1e-3)?;
        println!("  adaptive: S(1)x ~ {:?} with {} steps, bound {:.1e}", e.point, e.steps, e.err_bound);
    }
    Ok(())
}
