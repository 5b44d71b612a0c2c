//! Registered instances and certified graph sequences drawn from their flows.

use std::sync::Arc;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::moduli::{
    check_simple_modulus, check_weak_modulus, full_from_theta, full_laplacian, full_quartic,
    full_strongly_accretive, laplacian_index, simple_from_full, weak_from_simple, FullModulus,
    RateFn, SequenceVerdict, ThetaModulus,
};
use crate::operators::{
    dirichlet_laplacian, make_quartic, make_scaled_identity, make_spd_linear, sample_ball,
    AccretiveOperator, GraphPair,
};
use crate::semigroup::evaluate_oracle;
use crate::space::{dot, Point};

use super::report::{finite, Report, ReportRow, Status};

/// An operator paired with a full modulus known to be valid for it.
#[derive(Clone)]
pub struct Instance {
    pub name: &'static str,
    pub description: String,
    pub operator: Arc<dyn AccretiveOperator>,
    pub full: FullModulus,
    /// Starting points for certified flow sequences.
    pub starts: Vec<Point>,
}

impl std::fmt::Debug for Instance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Instance")
            .field("name", &self.name)
            .field("operator", &self.operator.name())
            .field("full", &self.full.label())
            .finish()
    }
}

fn scalars(values: &[f64]) -> Vec<Point> {
    values.iter().map(|&v| Point::scalar(v)).collect()
}

/// Every (operator, full modulus) pair the library ships.
pub fn registry() -> Result<Vec<Instance>> {
    let laplacian = make_spd_linear(dirichlet_laplacian(4))?;
    let lambda = laplacian_index(laplacian.lambda_min())?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let spd_starts = (0..5).map(|_| sample_ball(&mut rng, 4, 3.0)).collect();
    let diag = make_spd_linear(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0])))?;
    Ok(vec![
        Instance {
            name: "scaled-identity",
            description: "A = x, a = 1".into(),
            operator: Arc::new(make_scaled_identity(1.0, 1)?),
            full: full_strongly_accretive(1)?,
            starts: scalars(&[2.0, -3.0, 0.5, 5.0, 0.0]),
        },
        Instance {
            name: "scaled-identity-half",
            description: "A = x/2, a = 2".into(),
            operator: Arc::new(make_scaled_identity(0.5, 1)?),
            full: full_strongly_accretive(2)?,
            starts: scalars(&[2.0, -3.0, 1.0, 4.0, -0.25]),
        },
        Instance {
            name: "spd-diagonal",
            description: "A = diag(1, 2), a = 1".into(),
            operator: Arc::new(diag),
            full: full_strongly_accretive(1)?,
            starts: vec![
                Point::new(vec![1.0, -1.0])?,
                Point::new(vec![2.0, 0.5])?,
                Point::new(vec![0.0, 3.0])?,
                Point::new(vec![-2.0, -2.0])?,
                Point::new(vec![0.1, 0.0])?,
            ],
        },
        Instance {
            name: "dirichlet-laplacian-4",
            description: format!(
                "tridiag(-1, 2, -1) of size 4, lambda_min = {:.6}, Lambda = {lambda}",
                laplacian.lambda_min()
            ),
            operator: Arc::new(laplacian),
            full: full_laplacian(lambda)?,
            starts: spd_starts,
        },
        Instance {
            name: "quartic",
            description: "subdifferential of (|x|-1)_+^4, zero set [-1, 1]".into(),
            operator: Arc::new(make_quartic()),
            full: full_quartic(),
            starts: scalars(&[3.0, -2.5, 1.5, 0.5, -4.0]),
        },
        Instance {
            name: "scaled-identity-theta",
            description: "A = x with dyadic modulus Theta(K, k) = 2k, Z = 0".into(),
            operator: Arc::new(make_scaled_identity(1.0, 1)?),
            full: full_from_theta(ThetaModulus::from_fn("2k", |_, k| 2 * k), 0),
            starts: scalars(&[2.0, -1.0, 0.75, 3.0, -6.0]),
        },
    ])
}

/// Looks up a registered instance by name.
pub fn instance(name: &str) -> Result<Instance> {
    registry()?
        .into_iter()
        .find(|i| i.name == name)
        .ok_or_else(|| Error::config("instance", format!("unknown instance {name:?}")))
}

/// A graph sequence with a bound `K` and a rate `φ` for its premise
/// `|⟨y_n, x_n − Px_n⟩| → 0`, both checked on the whole sequence.
#[derive(Clone, Debug)]
pub struct CertifiedSequence {
    pub label: String,
    pub pairs: Vec<GraphPair>,
    pub bound: u64,
    /// `φ(k)` is the first index after which the premise stays at most
    /// `1/(k+1)`, or the sequence length if that never happens in range.
    pub phi: RateFn,
}

/// `(S(nh)x, A S(nh)x)` for `n < len`, evaluated with the closed-form flow.
pub fn flow_sequence(op: &dyn AccretiveOperator, x: &Point, step: f64, len: usize) -> Result<CertifiedSequence> {
    let mut pairs = Vec::with_capacity(len);
    for n in 0..len {
        let point = evaluate_oracle(op, x, n as f64 * step)?;
        let y = op
            .value(&point)
            .ok_or_else(|| Error::Unsupported(format!("{} has no value map", op.name())))?;
        pairs.push(GraphPair { x: point, y });
    }
    let bound = pairs
        .iter()
        .map(|p| p.x.norm().max(p.y.norm()))
        .fold(0.0, f64::max)
        .ceil() as u64;
    let premise: Vec<f64> = pairs
        .iter()
        .map(|p| dot(&p.y, &(&p.x - &op.zero_projection(&p.x))).abs())
        .collect();
    let mut tail = premise;
    for i in (0..tail.len().saturating_sub(1)).rev() {
        tail[i] = tail[i].max(tail[i + 1]);
    }
    let len64 = len as u64;
    let phi = RateFn::from_fn(format!("premise-rate(h={step})"), move |k| {
        let target = 1.0 / (k as f64 + 1.0);
        tail.partition_point(|&v| v > target) as u64
    });
    debug_assert!(phi.at(0) <= len64);
    Ok(CertifiedSequence {
        label: format!("flow from {x:?}, h={step}"),
        pairs,
        bound,
        phi,
    })
}

/// Runs the full → simple → weak conversion chain on one instance: each
/// certified flow sequence must pass both the simple-modulus check
/// (windows `m ≤ m_max`) and the weak-modulus check, for `k ≤ k_max`.
pub fn check_conversion_chain(
    inst: &Instance,
    k_max: u64,
    m_max: u64,
    step: f64,
    len: usize,
    tol: f64,
) -> Result<Report> {
    let start = Instant::now();
    let op = inst.operator.as_ref();
    let simple = simple_from_full(inst.full.clone());
    let weak = weak_from_simple(simple.clone());
    let mut report = Report::new("conversion-chain", format!("{} with {}", inst.name, inst.full.label()), tol);
    for x in &inst.starts {
        let seq = flow_sequence(op, x, step, len)?;
        let simple_verdict =
            check_simple_modulus(op, &simple, &seq.pairs, &seq.phi, seq.bound, k_max, m_max, tol)?;
        let weak_verdict = check_weak_modulus(op, &weak, &seq.pairs, &seq.phi, seq.bound, k_max, tol)?;
        let rate = weak.apply(seq.bound, &seq.phi);
        for k in 0..=k_max {
            let target = 1.0 / (k as f64 + 1.0);
            let end = rate.at(k);
            let best = seq.pairs[..=end as usize]
                .iter()
                .map(|p| p.x.dist(&op.zero_projection(&p.x)))
                .fold(f64::INFINITY, f64::min);
            let failed_here = |v: &SequenceVerdict| match v {
                SequenceVerdict::Passed => false,
                SequenceVerdict::PremiseNotCertified { .. } => true,
                SequenceVerdict::Violations { cells } => cells.iter().any(|c| c.0 == k),
            };
            let status = if failed_here(&simple_verdict) || failed_here(&weak_verdict) {
                Status::Fail
            } else {
                Status::classify(best, target, tol)
            };
            let row = ReportRow {
                k,
                counterfunction: Some(seq.label.clone()),
                certified_bound: end,
                target,
                worst_observed: finite(best),
                slack: finite(target + tol - best),
                status,
                witness: None,
            };
            report.push_row(row, || format!("simple: {simple_verdict:?}; weak: {weak_verdict:?}"));
        }
        report.provenance.push(crate::rates::Provenance::new(
            "K",
            seq.bound,
            format!("K >= max |x_n|, |y_n| along {}", seq.label),
        ));
    }
    report.runtime = start.elapsed();
    Ok(report)
}
