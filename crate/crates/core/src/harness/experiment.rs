//! JSON experiment configurations and the scenario pipelines behind them.

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moduli::{
    check_full_modulus, full_from_theta, full_laplacian, full_quartic, full_strongly_accretive,
    laplacian_index, weak_from_full, FullModulus, GraphSampling, RateExpr, RateFn, ThetaModulus,
};
use crate::operators::{
    dirichlet_laplacian, make_anti_monotone, make_quartic, make_scaled_identity, make_spd_linear,
    AccretiveOperator,
};
use crate::rates::{
    gamma, nr_threshold, nr_threshold_closure, omega_from_eta, omega_hilbert_exact,
    xu_rate_of_convergence, CertifiedThreshold, Metastability, NrInputs, ProjectionModulus,
    Provenance, XuInputs,
};
use crate::semigroup::{make_almost_orbit, AlmostOrbit, FlowEvaluator};
use crate::space::{eta_hilbert, Point};

use super::report::{Report, ReportRow, Status};
use super::verify::{
    verify_almost_orbit_tail, verify_cauchy_rate, verify_liminf_lemma, verify_metastability,
    verify_nr_liminf,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OperatorSpec {
    ScaledIdentity {
        alpha: f64,
        #[serde(default = "one")]
        dim: usize,
    },
    SpdLinear {
        matrix: Vec<Vec<f64>>,
    },
    DirichletLaplacian {
        size: usize,
    },
    Quartic,
    AntiMonotone {
        #[serde(default = "one")]
        dim: usize,
    },
}

fn one() -> usize {
    1
}

/// A built operator, keeping the linear variant's smallest eigenvalue.
struct BuiltOperator {
    op: Arc<dyn AccretiveOperator>,
    lambda_min: Option<f64>,
}

impl OperatorSpec {
    fn build(&self) -> Result<BuiltOperator> {
        let field = |e: Error| Error::config("operator", e.to_string());
        Ok(match self {
            OperatorSpec::ScaledIdentity { alpha, dim } => BuiltOperator {
                op: Arc::new(make_scaled_identity(*alpha, *dim).map_err(field)?),
                lambda_min: None,
            },
            OperatorSpec::SpdLinear { matrix } => {
                let n = matrix.len();
                if n == 0 || matrix.iter().any(|r| r.len() != n) {
                    return Err(Error::config("operator.matrix", "must be a nonempty square matrix"));
                }
                let m = DMatrix::from_fn(n, n, |i, j| matrix[i][j]);
                let op = make_spd_linear(m).map_err(field)?;
                BuiltOperator {
                    lambda_min: Some(op.lambda_min()),
                    op: Arc::new(op),
                }
            }
            OperatorSpec::DirichletLaplacian { size } => {
                if *size == 0 {
                    return Err(Error::config("operator.size", "must be positive"));
                }
                let op = make_spd_linear(dirichlet_laplacian(*size)).map_err(field)?;
                BuiltOperator {
                    lambda_min: Some(op.lambda_min()),
                    op: Arc::new(op),
                }
            }
            OperatorSpec::Quartic => BuiltOperator {
                op: Arc::new(make_quartic()),
                lambda_min: None,
            },
            OperatorSpec::AntiMonotone { dim } => {
                if *dim == 0 {
                    return Err(Error::config("operator.dim", "must be positive"));
                }
                BuiltOperator {
                    op: Arc::new(make_anti_monotone(*dim)),
                    lambda_min: None,
                }
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModulusSpec {
    StronglyAccretive {
        a: u64,
    },
    /// `Λ` defaults to `⌈1/λ_min⌉` of the configured linear operator.
    Laplacian {
        #[serde(default)]
        lambda: Option<u64>,
    },
    Quartic,
    /// Dyadic modulus `Θ(K, k) = theta(k)`, independent of `K`.
    Theta {
        theta: RateExpr,
        #[serde(default)]
        zero_norm_bound: u64,
    },
    /// `Ω^f(K, k) = rate(k)`; used for deliberately wrong moduli.
    Rate {
        rate: RateExpr,
    },
}

impl ModulusSpec {
    fn build(&self, lambda_min: Option<f64>) -> Result<FullModulus> {
        let field = |e: Error| Error::config("modulus", e.to_string());
        match self {
            ModulusSpec::StronglyAccretive { a } => full_strongly_accretive(*a).map_err(field),
            ModulusSpec::Laplacian { lambda } => {
                let lambda = match (lambda, lambda_min) {
                    (Some(l), _) => *l,
                    (None, Some(m)) => laplacian_index(m).map_err(field)?,
                    (None, None) => {
                        return Err(Error::config(
                            "modulus.lambda",
                            "needed unless the operator is linear",
                        ))
                    }
                };
                full_laplacian(lambda).map_err(field)
            }
            ModulusSpec::Quartic => Ok(full_quartic()),
            ModulusSpec::Theta {
                theta,
                zero_norm_bound,
            } => {
                let rate = theta.to_rate();
                Ok(full_from_theta(
                    ThetaModulus::from_fn(theta.describe(), move |_, k| rate.at(k)),
                    *zero_norm_bound,
                ))
            }
            ModulusSpec::Rate { rate } => {
                let r = rate.to_rate();
                Ok(FullModulus::from_fn(format!("rate({})", rate.describe()), move |_, k| r.at(k)))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Nr,
    NrClosure,
    XuMeta,
    XuRoc,
    ModulusCheck,
    LiminfCheck,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Nr => "nr",
            Scenario::NrClosure => "nr-closure",
            Scenario::XuMeta => "xu-meta",
            Scenario::XuRoc => "xu-roc",
            Scenario::ModulusCheck => "modulus-check",
            Scenario::LiminfCheck => "liminf-check",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlmostOrbitSpec {
    /// Perturbation size in `u(t) = S(t)x + c/(1+t)·e`.
    pub c: f64,
    /// Unit vector `e`; defaults to the first basis vector.
    #[serde(default)]
    pub direction: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OmegaSpec {
    #[default]
    HilbertExact,
    FromEta,
}

impl OmegaSpec {
    fn build(self) -> ProjectionModulus {
        match self {
            OmegaSpec::HilbertExact => omega_hilbert_exact(),
            OmegaSpec::FromEta => omega_from_eta(Arc::new(|e| eta_hilbert(e).unwrap_or(f64::NAN))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClosureSpec {
    /// Nondecreasing bound on the approximating graph points.
    pub f: RateExpr,
    pub p_norm: u64,
    pub x_norm_bound: u64,
    pub dist_bound: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum MetastabilitySpec {
    FromRate(RateExpr),
    Constant(u64),
}

impl MetastabilitySpec {
    fn build(&self) -> Metastability {
        match self {
            MetastabilitySpec::FromRate(expr) => Metastability::FromRate(expr.to_rate()),
            MetastabilitySpec::Constant(c) => Metastability::constant(*c),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrand {
    /// `1/(1+t)²`, integral 1.
    InverseSquare,
    /// `e^{−t}`, integral 1.
    ExpDecay,
    Zero,
}

impl Integrand {
    fn eval(self, t: f64) -> f64 {
        match self {
            Integrand::InverseSquare => 1.0 / ((1.0 + t) * (1.0 + t)),
            Integrand::ExpDecay => (-t).exp(),
            Integrand::Zero => 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LiminfSpec {
    /// Integrand `⟨Aw(t), w(t) − Pw(t)⟩` along the configured orbit.
    Nr {
        #[serde(default)]
        n_max: Option<u64>,
    },
    /// A named integrand with `∫₀^∞ f ≤ integral_bound`.
    Integral {
        integrand: Integrand,
        integral_bound: f64,
        #[serde(default)]
        n_max: Option<u64>,
    },
}

/// One experiment. See the repository README for the schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub operator: OperatorSpec,
    #[serde(default)]
    pub initial_point: Option<Vec<f64>>,
    #[serde(default)]
    pub modulus: Option<ModulusSpec>,
    #[serde(default)]
    pub scenario: Option<Scenario>,
    pub k_range: [u64; 2],
    #[serde(default)]
    pub counterfunctions: Vec<RateExpr>,
    #[serde(default = "default_grid_step")]
    pub grid_step: f64,
    #[serde(default)]
    pub horizon_pad: f64,
    #[serde(default)]
    pub tolerance: f64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_evaluator")]
    pub evaluator: FlowEvaluator,
    #[serde(default)]
    pub sampling: Option<GraphSampling>,
    /// Norm bound `K` on graph points.
    #[serde(default, rename = "K")]
    pub bound_k: Option<u64>,
    /// Bound `b ≥ ‖x − Px‖`.
    #[serde(default)]
    pub b: Option<u64>,
    #[serde(default)]
    pub almost_orbit: Option<AlmostOrbitSpec>,
    #[serde(default)]
    pub omega: OmegaSpec,
    #[serde(default)]
    pub closure: Option<ClosureSpec>,
    #[serde(default)]
    pub metastability: Option<MetastabilitySpec>,
    #[serde(default)]
    pub liminf: Option<LiminfSpec>,
}

fn default_grid_step() -> f64 {
    0.25
}

fn default_evaluator() -> FlowEvaluator {
    FlowEvaluator::Oracle
}

const DEFAULT_SAMPLES: usize = 10_000;

impl ExperimentConfig {
    /// Parses JSON; errors name the offending field path.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." { "<root>".to_string() } else { path };
            Error::Config {
                field,
                message: e.into_inner().to_string(),
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs serialize")
    }

    fn k_bounds(&self) -> Result<(u64, u64)> {
        let [lo, hi] = self.k_range;
        if lo > hi {
            return Err(Error::config("k_range", format!("empty range [{lo}, {hi}]")));
        }
        Ok((lo, hi))
    }

    fn initial(&self, dim: usize) -> Result<Point> {
        let coords = self
            .initial_point
            .clone()
            .ok_or_else(|| Error::config("initial_point", "required for this scenario"))?;
        if coords.len() != dim {
            return Err(Error::config(
                "initial_point",
                format!("expected {dim} coordinates, got {}", coords.len()),
            ));
        }
        Point::new(coords).map_err(|e| Error::config("initial_point", e.to_string()))
    }

    fn full_modulus(&self, built: &BuiltOperator) -> Result<FullModulus> {
        self.modulus
            .as_ref()
            .ok_or_else(|| Error::config("modulus", "required for this scenario"))?
            .build(built.lambda_min)
    }

    /// Checks field ranges that serde cannot express.
    pub fn validate(&self) -> Result<()> {
        self.k_bounds()?;
        if !(self.grid_step > 0.0 && self.grid_step.is_finite()) {
            return Err(Error::config("grid_step", format!("must be positive, got {}", self.grid_step)));
        }
        if !(self.horizon_pad >= 0.0 && self.horizon_pad.is_finite()) {
            return Err(Error::config("horizon_pad", "must be finite and nonnegative"));
        }
        if !(self.tolerance >= 0.0 && self.tolerance.is_finite()) {
            return Err(Error::config("tolerance", "must be finite and nonnegative"));
        }
        if let FlowEvaluator::CrandallLiggett { tol } = self.evaluator {
            if !(tol > 0.0) {
                return Err(Error::config("evaluator", "Crandall-Liggett tolerance must be positive"));
            }
        }
        Ok(())
    }
}

/// Builds and runs the configured scenario. `scenario` overrides the
/// config's own field; one of the two must be present.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    run_scenario(cfg, None)
}

pub fn run_scenario(cfg: &ExperimentConfig, scenario: Option<Scenario>) -> Result<Report> {
    let start = Instant::now();
    cfg.validate()?;
    let scenario = match (scenario, cfg.scenario) {
        (Some(a), Some(b)) if a != b => {
            return Err(Error::config(
                "scenario",
                format!("config says {} but {} was requested", b.as_str(), a.as_str()),
            ))
        }
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => return Err(Error::config("scenario", "missing")),
    };
    let built = cfg.operator.build()?;
    let mut report = match scenario {
        Scenario::ModulusCheck => run_modulus_check(cfg, &built)?,
        Scenario::Nr => run_nr(cfg, &built)?,
        Scenario::NrClosure => run_nr_closure(cfg, &built)?,
        Scenario::XuMeta => run_xu(cfg, &built, false)?,
        Scenario::XuRoc => run_xu(cfg, &built, true)?,
        Scenario::LiminfCheck => run_liminf(cfg, &built)?,
    };
    report.scenario = scenario.as_str().to_string();
    report.seed = cfg.seed;
    report.runtime = start.elapsed();
    Ok(report)
}

fn run_modulus_check(cfg: &ExperimentConfig, built: &BuiltOperator) -> Result<Report> {
    let (lo, hi) = cfg.k_bounds()?;
    let full = cfg.full_modulus(built)?;
    let bound = cfg
        .bound_k
        .ok_or_else(|| Error::config("K", "graph-point bound K is required for modulus checks"))?;
    let sampling = cfg.sampling.clone().unwrap_or(GraphSampling::Random {
        samples: DEFAULT_SAMPLES,
    });
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(0));
    let op = built.op.as_ref();
    let checked = check_full_modulus(op, &full, bound, hi, &sampling, &mut rng, cfg.tolerance)?;
    let mut report = Report::new("modulus-check", format!("{} with {}", op.name(), full.label()), cfg.tolerance);
    for &(k, count, worst) in checked.per_k.iter().filter(|e| e.0 >= lo) {
        let target = 1.0 / (k as f64 + 1.0);
        let bad: Vec<_> = checked.violations.iter().filter(|v| v.k == k).collect();
        let status = if bad.is_empty() {
            Status::classify(worst, target, cfg.tolerance)
        } else {
            Status::Fail
        };
        let row = ReportRow {
            k,
            counterfunction: None,
            certified_bound: full.checked_at(bound, k)?,
            target,
            worst_observed: worst,
            slack: target + cfg.tolerance - worst,
            status,
            witness: Some(count as f64),
        };
        report.push_row(row, || {
            let v = bad[0];
            format!(
                "{} graph points meet the premise but stay far from the zero set, e.g. x = {:?}, y = {:?}: |<y, x-Px>| = {:e}, |x-Px| = {:e}",
                bad.len(),
                v.x,
                v.y,
                v.premise,
                v.distance
            )
        });
    }
    report.notes.push(format!(
        "{} graph points sampled by {:?}; witness column counts points meeting the premise",
        checked.pairs_checked, sampling
    ));
    report
        .provenance
        .push(Provenance::new("K", bound, "caller-supplied norm bound on sampled graph points"));
    Ok(report)
}

fn nr_inputs(cfg: &ExperimentConfig, built: &BuiltOperator, x: &Point) -> Result<NrInputs> {
    let weak = weak_from_full(cfg.full_modulus(built)?);
    let mut inp = NrInputs::from_witnesses(built.op.as_ref(), weak, x)?;
    if let Some(k) = cfg.bound_k {
        if k < inp.bound_k {
            return Err(Error::config("K", format!("K = {k} is below the witnessed bound {}", inp.bound_k)));
        }
        inp.bound_k = k;
        inp.audit[0] = Provenance::new("K", k, format!("caller-supplied, dominates {}", inp.audit[0].certifies));
    }
    if let Some(b) = cfg.b {
        if b < inp.b {
            return Err(Error::config("b", format!("b = {b} is below |x-Px| (needs {})", inp.b)));
        }
        inp.b = b;
        inp.audit[1] = Provenance::new("b", b, format!("caller-supplied, dominates {}", inp.audit[1].certifies));
    }
    Ok(inp)
}

fn run_nr(cfg: &ExperimentConfig, built: &BuiltOperator) -> Result<Report> {
    let op = built.op.as_ref();
    let x = cfg.initial(op.dim())?;
    let inp = nr_inputs(cfg, built, &x)?;
    let threshold = nr_threshold(&inp);
    let mut report = verify_cauchy_rate(
        op,
        &x,
        &threshold,
        cfg.k_bounds()?,
        cfg.grid_step,
        cfg.horizon_pad,
        cfg.evaluator,
        cfg.tolerance,
    )?;
    report.provenance = inp.audit;
    Ok(report)
}

fn run_nr_closure(cfg: &ExperimentConfig, built: &BuiltOperator) -> Result<Report> {
    let op = built.op.as_ref();
    let x = cfg.initial(op.dim())?;
    let spec = cfg
        .closure
        .as_ref()
        .ok_or_else(|| Error::config("closure", "required for nr-closure"))?;
    let p = op.zero_projection(&x);
    let checks = [
        ("closure.dist_bound", spec.dist_bound as f64, x.dist(&p)),
        ("closure.x_norm_bound", spec.x_norm_bound as f64, x.norm()),
        ("closure.p_norm", spec.p_norm as f64, p.norm()),
    ];
    for (field, given, actual) in checks {
        if given < actual {
            return Err(Error::config(field, format!("{given} is below the actual value {actual}")));
        }
    }
    let weak = weak_from_full(cfg.full_modulus(built)?);
    let f = spec.f.to_rate();
    let threshold = nr_threshold_closure(weak, f, spec.p_norm, spec.x_norm_bound, spec.dist_bound);
    let mut report = verify_cauchy_rate(
        op,
        &x,
        &threshold,
        cfg.k_bounds()?,
        cfg.grid_step,
        cfg.horizon_pad,
        cfg.evaluator,
        cfg.tolerance,
    )?;
    report.provenance = vec![
        Provenance::new("|x-Px|", spec.dist_bound, format!("|x-Px| = {}", x.dist(&p))),
        Provenance::new("|x|", spec.x_norm_bound, format!("|x| = {}", x.norm())),
        Provenance::new("|p|", spec.p_norm, format!("|p| = {} for p = Px", p.norm())),
        Provenance::new(
            "f",
            0,
            format!("caller-supplied nondecreasing bound {} on approximating graph points", spec.f.describe()),
        ),
    ];
    Ok(report)
}

fn build_almost_orbit(cfg: &ExperimentConfig, built: &BuiltOperator) -> Result<AlmostOrbit> {
    let op = Arc::clone(&built.op);
    let x = cfg.initial(op.dim())?;
    let spec = cfg
        .almost_orbit
        .as_ref()
        .ok_or_else(|| Error::config("almost_orbit", "required for this scenario"))?;
    let direction = match &spec.direction {
        Some(d) => Point::new(d.clone()).map_err(|e| Error::config("almost_orbit.direction", e.to_string()))?,
        None => {
            let mut e = vec![0.0; op.dim()];
            e[0] = 1.0;
            Point::from_vec(e)
        }
    };
    make_almost_orbit(op, &x, spec.c, &direction, cfg.evaluator)
        .map_err(|e| Error::config("almost_orbit", e.to_string()))
}

fn run_xu(cfg: &ExperimentConfig, built: &BuiltOperator, rate_of_convergence: bool) -> Result<Report> {
    let (lo, hi) = cfg.k_bounds()?;
    let u = build_almost_orbit(cfg, built)?;
    let weak = weak_from_full(cfg.full_modulus(built)?);
    let mut inp = XuInputs::for_almost_orbit(&u, weak, cfg.omega.build())?;
    if let Some(spec) = &cfg.metastability {
        inp.phi = spec.build();
        inp.audit.push(Provenance::new(
            "Phi",
            0,
            format!("caller-supplied {}", inp.phi.label()),
        ));
    }
    let mut report = if rate_of_convergence {
        let table = (lo..=hi)
            .map(|k| xu_rate_of_convergence(&inp, k))
            .collect::<Result<Vec<_>>>()?;
        let rate = RateFn::table(table);
        let threshold = CertifiedThreshold::from_fn("rate-of-convergence", move |k| rate.at(k - lo));
        verify_almost_orbit_tail(&u, &threshold, (lo, hi), cfg.grid_step, cfg.horizon_pad, cfg.tolerance)?
    } else {
        if cfg.counterfunctions.is_empty() {
            return Err(Error::config("counterfunctions", "at least one is required for xu-meta"));
        }
        let fs: Vec<RateFn> = cfg.counterfunctions.iter().map(RateExpr::to_rate).collect();
        let bound = |k: u64, f: &RateFn| gamma(&inp, k, &|n| f.at(n));
        verify_metastability(&u, &bound, (lo, hi), &fs, cfg.grid_step, cfg.tolerance)?
    };
    report.provenance = inp.audit.clone();
    report.notes.push(format!("omega: {}, Phi: {}", inp.omega.label(), inp.phi.label()));
    Ok(report)
}

fn run_liminf(cfg: &ExperimentConfig, built: &BuiltOperator) -> Result<Report> {
    let (lo, hi) = cfg.k_bounds()?;
    let spec = cfg.liminf.clone().unwrap_or(LiminfSpec::Nr { n_max: None });
    let mut report = match spec {
        LiminfSpec::Nr { n_max } => {
            let op = built.op.as_ref();
            let x = cfg.initial(op.dim())?;
            let dist = x.dist(&op.zero_projection(&x));
            let b = match cfg.b {
                Some(b) => b,
                None => dist.ceil() as u64,
            };
            verify_nr_liminf(op, &x, b, hi, n_max.unwrap_or(hi), cfg.grid_step, cfg.evaluator, cfg.tolerance)?
        }
        LiminfSpec::Integral {
            integrand,
            integral_bound,
            n_max,
        } => verify_liminf_lemma(
            &|t| integrand.eval(t),
            integral_bound,
            hi,
            n_max.unwrap_or(hi),
            cfg.grid_step,
            cfg.tolerance,
        )?,
    };
    report.rows.retain(|r| r.k >= lo);
    report.violations.retain(|v| v.k >= lo);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    const NR: &str = r#"{
        "operator": {"kind": "scaled-identity", "alpha": 1.0},
        "initial_point": [2.0],
        "modulus": {"kind": "strongly-accretive", "a": 1},
        "scenario": "nr",
        "k_range": [0, 5],
        "grid_step": 0.25,
        "horizon_pad": 10.0,
        "tolerance": 1e-9,
        "seed": 7
    }"#;

    #[test]
    fn nr_dispatch() {
        let cfg = ExperimentConfig::from_json(NR).unwrap();
        let r = run_experiment(&cfg).unwrap();
        assert!(r.passed());
        assert_eq!(r.scenario, "nr");
        assert_eq!(r.seed, Some(7));
        let bounds: Vec<u64> = r.rows.iter().map(|row| row.certified_bound).collect();
        assert_eq!(bounds, vec![12, 48, 108, 192, 300, 432]);
        assert_eq!(r.provenance.len(), 2);
    }

    #[test]
    fn config_round_trips() {
        let cfg = ExperimentConfig::from_json(NR).unwrap();
        assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn config_errors_name_the_field() {
        let bad = NR.replace("\"alpha\": 1.0", "\"alpha\": \"one\"");
        match ExperimentConfig::from_json(&bad).unwrap_err() {
            // tagged variants are buffered, so the path stops at the variant
            Error::Config { field, .. } => assert_eq!(field, "operator"),
            e => panic!("unexpected {e:?}"),
        }
        let step_type = NR.replace("\"grid_step\": 0.25", "\"grid_step\": \"fine\"");
        match ExperimentConfig::from_json(&step_type).unwrap_err() {
            Error::Config { field, .. } => assert_eq!(field, "grid_step"),
            e => panic!("unexpected {e:?}"),
        }
        let unknown = NR.replace("\"seed\": 7", "\"sede\": 7");
        match ExperimentConfig::from_json(&unknown).unwrap_err() {
            Error::Config { message, .. } => assert!(message.contains("sede")),
            e => panic!("unexpected {e:?}"),
        }
        let step = NR.replace("\"grid_step\": 0.25", "\"grid_step\": 0.0");
        let cfg = ExperimentConfig::from_json(&step).unwrap();
        assert!(matches!(run_experiment(&cfg), Err(Error::Config { field, .. }) if field == "grid_step"));
        let range = NR.replace("[0, 5]", "[3, 1]");
        let cfg = ExperimentConfig::from_json(&range).unwrap();
        assert!(matches!(run_experiment(&cfg), Err(Error::Config { field, .. }) if field == "k_range"));
        let dims = NR.replace("[2.0]", "[2.0, 1.0]");
        let cfg = ExperimentConfig::from_json(&dims).unwrap();
        assert!(matches!(run_experiment(&cfg), Err(Error::Config { field, .. }) if field == "initial_point"));
    }

    #[test]
    fn scenario_override_conflict() {
        let cfg = ExperimentConfig::from_json(NR).unwrap();
        assert!(run_scenario(&cfg, Some(Scenario::XuMeta)).is_err());
        assert!(run_scenario(&cfg, Some(Scenario::Nr)).is_ok());
    }

    #[test]
    fn modulus_check_dispatch() {
        let text = r#"{
            "operator": {"kind": "quartic"},
            "modulus": {"kind": "rate", "rate": "id"},
            "scenario": "modulus-check",
            "k_range": [0, 5],
            "sampling": {"grid": {"lo": -6.0, "hi": 6.0, "step": 0.001}},
            "K": 1000,
            "tolerance": 1e-9
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        let r = run_experiment(&cfg).unwrap();
        assert!(!r.passed());
        let good = text.replace(r#"{"kind": "rate", "rate": "id"}"#, r#"{"kind": "quartic"}"#);
        let r = run_experiment(&ExperimentConfig::from_json(&good).unwrap()).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn laplacian_lambda_from_operator() {
        let text = r#"{
            "operator": {"kind": "dirichlet-laplacian", "size": 4},
            "modulus": {"kind": "laplacian"},
            "scenario": "modulus-check",
            "k_range": [0, 3],
            "sampling": {"random": {"samples": 500}},
            "K": 5,
            "seed": 3,
            "tolerance": 1e-9
        }"#;
        let r = run_experiment(&ExperimentConfig::from_json(text).unwrap()).unwrap();
        assert!(r.passed());
        assert_eq!(r.rows[1].certified_bound, 11);
    }

    #[test]
    fn xu_meta_dispatch() {
        let text = r#"{
            "operator": {"kind": "scaled-identity", "alpha": 1.0},
            "initial_point": [2.0],
            "modulus": {"kind": "strongly-accretive", "a": 1},
            "scenario": "xu-meta",
            "almost_orbit": {"c": 1.0},
            "k_range": [0, 1],
            "counterfunctions": ["id", {"affine": [1, 1]}],
            "grid_step": 0.25,
            "tolerance": 1e-9
        }"#;
        let r = run_experiment(&ExperimentConfig::from_json(text).unwrap()).unwrap();
        assert!(r.passed());
        assert_eq!(r.rows[0].certified_bound, 46_703);
        assert!(r.provenance.iter().any(|p| p.name == "B" && p.value == 3));
    }

    #[test]
    fn xu_roc_and_liminf_dispatch() {
        let text = r#"{
            "operator": {"kind": "scaled-identity", "alpha": 1.0},
            "initial_point": [2.0],
            "modulus": {"kind": "strongly-accretive", "a": 1},
            "scenario": "xu-roc",
            "almost_orbit": {"c": 1.0},
            "k_range": [0, 1],
            "grid_step": 0.5,
            "horizon_pad": 5.0,
            "tolerance": 1e-9
        }"#;
        let r = run_experiment(&ExperimentConfig::from_json(text).unwrap()).unwrap();
        assert!(r.passed());
        assert_eq!(r.rows[0].certified_bound, 734);
        let liminf = text.replace("\"xu-roc\"", "\"liminf-check\"");
        let r = run_experiment(&ExperimentConfig::from_json(&liminf).unwrap()).unwrap();
        assert!(r.passed());
        assert_eq!(r.rows[0].certified_bound, 3);
        let integral = r#"{
            "operator": {"kind": "quartic"},
            "scenario": "liminf-check",
            "liminf": {"kind": "integral", "integrand": "inverse-square", "integral_bound": 1.0},
            "k_range": [0, 4],
            "grid_step": 0.01,
            "tolerance": 1e-9
        }"#;
        let r = run_experiment(&ExperimentConfig::from_json(integral).unwrap()).unwrap();
        assert!(r.passed());
        assert_eq!(r.rows.len(), 5);
    }

    #[test]
    fn nr_closure_dispatch() {
        let text = r#"{
            "operator": {"kind": "scaled-identity", "alpha": 1.0},
            "initial_point": [2.0],
            "modulus": {"kind": "strongly-accretive", "a": 1},
            "scenario": "nr-closure",
            "closure": {"f": "id", "p_norm": 0, "x_norm_bound": 2, "dist_bound": 2},
            "k_range": [0, 2],
            "grid_step": 1.0,
            "horizon_pad": 5.0,
            "tolerance": 1e-9
        }"#;
        let r = run_experiment(&ExperimentConfig::from_json(text).unwrap()).unwrap();
        assert!(r.passed());
        assert_eq!(r.rows[0].certified_bound, 19 * 36);
        let low = text.replace("\"dist_bound\": 2", "\"dist_bound\": 1");
        assert!(matches!(
            run_experiment(&ExperimentConfig::from_json(&low).unwrap()),
            Err(Error::Config { field, .. }) if field == "closure.dist_bound"
        ));
    }
}
