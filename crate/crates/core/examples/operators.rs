//! Resolvents, zero projections and a sampled accretivity check, including
//! an operator that is not accretive.

use accretive_flows::operators::{
    check_accretive, dirichlet_laplacian, make_anti_monotone, make_quartic, make_scaled_identity,
    make_spd_linear, AccretiveOperator,
};
use accretive_flows::Point;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> accretive_flows::Result<()> {
    let ops: Vec<Box<dyn AccretiveOperator>> = vec![
        Box::new(make_scaled_identity(1.0, 1)?),
        Box::new(make_spd_linear(dirichlet_laplacian(4))?),
        Box::new(make_quartic()),
        Box::new(make_anti_monotone(1)),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for op in &ops {
        let mut x = Point::zeros(op.dim());
        x = x.map(|_| 3.0);
        let j = op.resolvent(0.5, &x);
        let p = op.zero_projection(&x);
        let report = check_accretive(op.as_ref(), &mut rng, 2_000, 5.0, 1e-12)?;
        println!("{}", op.name());
        println!("  J_0.5({x:?}) = {j:?}");
        println!("  P({x:?})   = {p:?}");
        println!(
            "  accretivity on 2000 sampled pairs: {} ({} violations)",
            if report.passed() { "ok" } else { "VIOLATED" },
            report.violations.len()
        );
    }
    Ok(())
}
