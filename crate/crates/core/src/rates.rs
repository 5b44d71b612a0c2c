//! Certified rate calculators for orbits and almost-orbits.
//!
//! Everything here is integer arithmetic on rate functions; the outputs are
//! times (in the semigroup's time unit) beyond which, or windows within
//! which, the trajectory is `1/(k+1)`-Cauchy.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moduli::{RateFn, WeakModulus};
use crate::operators::AccretiveOperator;
use crate::semigroup::AlmostOrbit;
use crate::space::{ConvexityModulus, Point};

/// Largest intermediate index the metastability combinators will enumerate.
pub const INDEX_LIMIT: u64 = 1 << 32;

/// Records which inequality a constant was chosen to satisfy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub name: String,
    pub value: u64,
    pub certifies: String,
}

impl Provenance {
    pub fn new(name: &str, value: u64, certifies: impl Into<String>) -> Self {
        Provenance {
            name: name.to_string(),
            value,
            certifies: certifies.into(),
        }
    }
}

fn ceil_u64(x: f64) -> u64 {
    if x <= 0.0 {
        0
    } else if x >= u64::MAX as f64 {
        u64::MAX
    } else {
        x.ceil() as u64
    }
}

/// `k ↦ ⌈b²/2 + 1⌉·(k+1)`.
pub fn chi(b: u64) -> RateFn {
    // ⌈b²/2⌉ + 1 in integer arithmetic
    let factor = b.saturating_mul(b).saturating_add(1) / 2 + 1;
    RateFn::from_fn(format!("chi(b={b})"), move |k| {
        factor.saturating_mul(k.saturating_add(1))
    })
}

/// `k ↦` time from which the trajectory is `1/(k+1)`-Cauchy.
#[derive(Clone)]
pub struct CertifiedThreshold {
    label: String,
    f: Arc<dyn Fn(u64) -> u64 + Send + Sync>,
}

impl CertifiedThreshold {
    pub fn from_fn(label: impl Into<String>, f: impl Fn(u64) -> u64 + Send + Sync + 'static) -> Self {
        CertifiedThreshold {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn at(&self, k: u64) -> u64 {
        (self.f)(k)
    }

    pub fn checked_at(&self, k: u64) -> Result<u64> {
        match self.at(k) {
            u64::MAX => Err(Error::Resource(format!("{} overflowed at k={k}", self.label))),
            v => Ok(v),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for CertifiedThreshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CertifiedThreshold({})", self.label)
    }
}

/// Inputs for the orbit convergence rate: `K ≥ max{‖v‖, ‖x−p‖+‖p‖}` with
/// `v ∈ Ax`, and `b ≥ ‖x − Px‖`.
#[derive(Clone, Debug)]
pub struct NrInputs {
    pub weak: WeakModulus,
    pub bound_k: u64,
    pub b: u64,
    pub audit: Vec<Provenance>,
}

impl NrInputs {
    pub fn new(weak: WeakModulus, bound_k: u64, b: u64) -> Self {
        NrInputs {
            weak,
            bound_k,
            b,
            audit: vec![
                Provenance::new("K", bound_k, "caller-supplied: K >= max{|v|, |x-p|+|p|}"),
                Provenance::new("b", b, "caller-supplied: b >= |x-Px|"),
            ],
        }
    }

    /// Derives `K` and `b` from `v = Ax` and `p = Px`.
    pub fn from_witnesses(op: &dyn AccretiveOperator, weak: WeakModulus, x: &Point) -> Result<Self> {
        let v = op
            .value(x)
            .ok_or_else(|| Error::Unsupported(format!("{} has no value map", op.name())))?;
        let p = op.zero_projection(x);
        let v_norm = v.norm();
        let orbit_radius = x.dist(&p) + p.norm();
        let bound_k = ceil_u64(v_norm.max(orbit_radius));
        let dist = x.dist(&p);
        let b = ceil_u64(dist);
        Ok(NrInputs {
            weak,
            bound_k,
            b,
            audit: vec![
                Provenance::new(
                    "K",
                    bound_k,
                    format!("K >= max{{|v| = {v_norm}, |x-p|+|p| = {orbit_radius}}} with v = Ax, p = Px"),
                ),
                Provenance::new("b", b, format!("b >= |x-Px| = {dist}")),
            ],
        })
    }
}

/// `k ↦ χ_b(Ω^w(K, id)(2k+1))`.
pub fn nr_threshold(inp: &NrInputs) -> CertifiedThreshold {
    let chi = chi(inp.b);
    let rate = inp.weak.apply(inp.bound_k, &RateFn::id());
    CertifiedThreshold::from_fn(
        format!("nr(b={}, K={}, {})", inp.b, inp.bound_k, inp.weak.label()),
        move |k| chi.at(rate.at(k.saturating_mul(2).saturating_add(1))),
    )
}

/// Closure-point variant: `x` is approximated by graph points bounded by
/// the nondecreasing `f`, and
/// `k ↦ χ_{b_k}(Ω^w(K_k, id)(6k+5))` with `b_k = ‖x−Px‖ + ‖x‖ + f(3k+2)`
/// and `K_k = f(3k+2) + 2‖p‖`.
pub fn nr_threshold_closure(
    weak: WeakModulus,
    f: RateFn,
    p_norm: u64,
    x_norm_bound: u64,
    dist_bound: u64,
) -> CertifiedThreshold {
    let label = format!(
        "nr-closure(f={}, |p|<={p_norm}, |x|<={x_norm_bound}, |x-Px|<={dist_bound}, {})",
        f.label(),
        weak.label()
    );
    CertifiedThreshold::from_fn(label, move |k| {
        let fk = f.at(k.saturating_mul(3).saturating_add(2));
        let b_k = dist_bound.saturating_add(x_norm_bound).saturating_add(fk);
        let k_k = fk.saturating_add(p_norm.saturating_mul(2));
        let inner = weak
            .apply(k_k, &RateFn::id())
            .at(k.saturating_mul(6).saturating_add(5));
        chi(b_k).at(inner)
    })
}

/// Modulus of uniform continuity `ω(r, k)` for the zero-set projection on
/// `B_r(p)`, lifted so that `ω(r, k) ≥ k`.
#[derive(Clone)]
pub struct ProjectionModulus {
    label: String,
    f: Arc<dyn Fn(u64, u64) -> u64 + Send + Sync>,
}

impl ProjectionModulus {
    pub fn from_fn(label: impl Into<String>, f: impl Fn(u64, u64) -> u64 + Send + Sync + 'static) -> Self {
        ProjectionModulus {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn at(&self, r: u64, k: u64) -> u64 {
        (self.f)(r, k).max(k)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for ProjectionModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ProjectionModulus({})", self.label)
    }
}

/// `ω(r, k)` from a modulus of uniform convexity `η`: the least `ω` with
/// `1/(ω+1) ≤ ½·α(ε/(1+r))`, `ε = 1/(k+1)`, where
/// `α(ε) = min{1, ε/4, εη(ε)/(4(1−η(ε)))}`.
pub fn omega_from_eta(eta: ConvexityModulus) -> ProjectionModulus {
    ProjectionModulus::from_fn("from-eta", move |r, k| {
        let eps = 1.0 / ((k as f64 + 1.0) * (1.0 + r as f64));
        let e = eta(eps);
        let alpha = 1f64.min(eps / 4.0).min(eps * e / (4.0 * (1.0 - e)));
        ceil_u64(2.0 / alpha - 1.0)
    })
}

/// `ω(r, k) = k`; the Hilbert projection onto a convex set is nonexpansive.
pub fn omega_hilbert_exact() -> ProjectionModulus {
    ProjectionModulus::from_fn("hilbert-exact", |_, k| k)
}

type Functional = Arc<dyn Fn(u64, &dyn Fn(u64) -> u64) -> u64 + Send + Sync>;

/// Rate of metastability `Φ(k, f)` on the almost-orbit condition.
#[derive(Clone)]
pub enum Metastability {
    /// `Φ(k, f) = Φ₀(k)` for a rate of convergence `Φ₀`.
    FromRate(RateFn),
    Functional { label: String, f: Functional },
}

impl Metastability {
    pub fn constant(c: u64) -> Self {
        Metastability::FromRate(RateFn::constant(c))
    }

    pub fn functional(
        label: impl Into<String>,
        f: impl Fn(u64, &dyn Fn(u64) -> u64) -> u64 + Send + Sync + 'static,
    ) -> Self {
        Metastability::Functional {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn at(&self, k: u64, f: &dyn Fn(u64) -> u64) -> u64 {
        match self {
            Metastability::FromRate(rate) => rate.at(k),
            Metastability::Functional { f: phi, .. } => phi(k, f),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Metastability::FromRate(rate) => format!("from-rate({})", rate.label()),
            Metastability::Functional { label, .. } => label.clone(),
        }
    }
}

impl fmt::Debug for Metastability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Metastability({})", self.label())
    }
}

/// `(s, n) ↦ f_s(n)`: bound on graph points within `1/(n+1)` of `u(s)`.
pub type GraphBoundFamily = Arc<dyn Fn(u64, u64) -> u64 + Send + Sync>;

/// Inputs for the almost-orbit rates.
#[derive(Clone)]
pub struct XuInputs {
    pub weak: WeakModulus,
    pub phi: Metastability,
    pub omega: ProjectionModulus,
    pub bound_b: u64,
    pub f_s: GraphBoundFamily,
    pub p_norm: u64,
    pub audit: Vec<Provenance>,
}

impl fmt::Debug for XuInputs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("XuInputs")
            .field("weak", &self.weak)
            .field("phi", &self.phi)
            .field("omega", &self.omega)
            .field("bound_b", &self.bound_b)
            .field("p_norm", &self.p_norm)
            .finish()
    }
}

impl XuInputs {
    pub fn new(
        weak: WeakModulus,
        phi: Metastability,
        omega: ProjectionModulus,
        bound_b: u64,
        f_s: GraphBoundFamily,
        p_norm: u64,
    ) -> Result<Self> {
        if bound_b == 0 {
            return Err(Error::OutOfRange {
                what: "B",
                value: 0.0,
            });
        }
        let audit = vec![
            Provenance::new("B", bound_b, "caller-supplied: |u(t)-p| <= B for all t"),
            Provenance::new("|p|", p_norm, "caller-supplied: |p| bound"),
        ];
        Ok(XuInputs {
            weak,
            phi,
            omega,
            bound_b,
            f_s,
            p_norm,
            audit,
        })
    }

    /// Assembles inputs for an almost-orbit: `Φ` from its rate, `B` from its
    /// audited bound, `p` its base point, and `f_s(n) = ⌈max{‖u(s)‖, ‖Au(s)‖}⌉`
    /// (each `u(s)` lies in `dom A`, so it is its own approximant).
    pub fn for_almost_orbit(
        u: &AlmostOrbit,
        weak: WeakModulus,
        omega: ProjectionModulus,
    ) -> Result<Self> {
        let op = u.operator_arc();
        if op.value(u.base()).is_none() {
            return Err(Error::Unsupported(format!("{} has no value map", op.name())));
        }
        let path = u.clone();
        let f_s: GraphBoundFamily = Arc::new(move |s, _n| {
            let Ok(e) = path.evaluate(s as f64) else {
                return u64::MAX;
            };
            let y = op.value(&e.point).map(|y| y.norm()).unwrap_or(f64::INFINITY);
            ceil_u64(e.point.norm().max(y))
        });
        let p_norm = ceil_u64(u.base().norm());
        let mut inputs = XuInputs::new(
            weak,
            Metastability::FromRate(u.rate_phi().clone()),
            omega,
            u.bound_b(),
            f_s,
            p_norm,
        )?;
        inputs.audit = vec![
            Provenance::new(
                "B",
                u.bound_b(),
                format!(
                    "|u(t)-p| <= B: grid maximum and tail bound beyond s* = Phi(0) = {}",
                    u.rate_phi().at(0)
                ),
            ),
            Provenance::new("|p|", p_norm, format!("|p| = {} for p = Px", u.base().norm())),
            Provenance::new(
                "f_s",
                0,
                "f_s(n) >= max{|u(s)|, |Au(s)|}, with u(s) itself as graph approximant",
            ),
        ];
        Ok(inputs)
    }
}

fn check_index(what: &str, value: u64) -> Result<u64> {
    if value > INDEX_LIMIT {
        Err(Error::Resource(format!(
            "{what} = {value} exceeds the enumeration limit 2^32"
        )))
    } else {
        Ok(value)
    }
}

/// `Ω_s(k) = χ(Ω^w(K_{s,k}, id)(3k+2))` with `χ(j) = ⌈(B+1)²/2 + 1⌉(j+1)` and
/// `K_{s,k} = max{f_s(ω(B+1, 3k+2)), B+1+‖p‖}`.
pub fn omega_s(inp: &XuInputs, s: u64, k: u64) -> u64 {
    let b1 = inp.bound_b.saturating_add(1);
    let k3 = k.saturating_mul(3).saturating_add(2);
    let graph_bound = (inp.f_s)(s, inp.omega.at(b1, k3));
    let bound_k = graph_bound.max(b1.saturating_add(inp.p_norm));
    chi(b1).at(inp.weak.at_id(bound_k, k3))
}

/// `Γ′(k, f) = Φ(ω(B, 3k+2), g) + max{Ω_m(3k+2) | m ≤ Φ(ω(B, 3k+2), g)}`
/// with `g(m) = Ω_m(3k+2) + f(m + Ω_m(3k+2))`.
pub fn gamma_prime(inp: &XuInputs, k: u64, f: &dyn Fn(u64) -> u64) -> Result<u64> {
    let k3 = k.saturating_mul(3).saturating_add(2);
    let g = |m: u64| {
        let om = omega_s(inp, m, k3);
        om.saturating_add(f(m.saturating_add(om)))
    };
    let top = check_index("Phi(omega(B,3k+2), g)", inp.phi.at(inp.omega.at(inp.bound_b, k3), &g))?;
    let worst = (0..=top).map(|m| omega_s(inp, m, k3)).max().unwrap_or(0);
    let value = top.saturating_add(worst);
    if value == u64::MAX {
        return Err(Error::Resource("Gamma' overflowed u64".into()));
    }
    Ok(value)
}

/// `Γ(k, f) = max{Γ′(8k+7, j), Φ(8k+7, h_N) | N ≤ Γ′(8k+7, j)}` with
/// `h_N(n) = f(max{N,n}) + max{N,n} − n` and `j(n) = max{n, Φ(8k+7, h_n)} − n`.
///
/// There is an `n ≤ Γ(k, f)` such that `‖u(t) − u(t′)‖ ≤ 1/(k+1)` for all
/// `t, t′ ∈ [n, n + f(n)]`.
pub fn gamma(inp: &XuInputs, k: u64, f: &dyn Fn(u64) -> u64) -> Result<u64> {
    let k8 = check_index("8k+7", k.saturating_mul(8).saturating_add(7))?;
    let h = |big_n: u64, n: u64| {
        let top = big_n.max(n);
        f(top).saturating_add(top - n)
    };
    let j = |n: u64| {
        let phi = inp.phi.at(k8, &|m| h(n, m));
        n.max(phi) - n
    };
    let gp = check_index("Gamma'(8k+7, j)", gamma_prime(inp, k8, &j)?)?;
    let tail = match &inp.phi {
        // Φ ignores its counterfunction, so every h_N gives the same value
        Metastability::FromRate(rate) => rate.at(k8),
        Metastability::Functional { .. } => (0..=gp)
            .map(|big_n| inp.phi.at(k8, &|m| h(big_n, m)))
            .max()
            .unwrap_or(0),
    };
    Ok(gp.max(tail))
}

/// `max{Φ(8k+7), s* + Ω_{s*}(3k+2)}` with `s* = Φ(ω(B, 3k+2))`, for a plain
/// rate of convergence `Φ` on the almost-orbit condition.
pub fn xu_rate_of_convergence(inp: &XuInputs, k: u64) -> Result<u64> {
    let Metastability::FromRate(rate) = &inp.phi else {
        return Err(Error::Unsupported(
            "rate of convergence needs a plain rate Phi, not a metastability functional".into(),
        ));
    };
    let k3 = k.saturating_mul(3).saturating_add(2);
    let s_star = rate.checked_at(inp.omega.at(inp.bound_b, k3))?;
    let value = rate
        .checked_at(k.saturating_mul(8).saturating_add(7))?
        .max(s_star.saturating_add(omega_s(inp, s_star, k3)));
    if value == u64::MAX {
        return Err(Error::Resource("rate of convergence overflowed u64".into()));
    }
    Ok(value)
}

/// `Φ(k) = φ(2k+1)`: turns a bound on the first good `s` into a full rate.
pub fn full_rate_from_approx(phi: RateFn) -> RateFn {
    let label = format!("full<{}>", phi.label());
    RateFn::from_fn(label, move |k| phi.at(k.saturating_mul(2).saturating_add(1)))
}
