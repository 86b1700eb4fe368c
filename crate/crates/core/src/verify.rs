//! Seeded verification suites producing machine-readable reports.
//!
//! Every check draws its samples from its own stream derived from the seed
//! and the check id, evaluates a defect per sample and records the maximum.
//! A check passes iff its max defect is at most its tolerance; an error
//! raised while sampling makes the defect infinite.
//!
//! For the trivial model every tolerance is capped at `1e-14`: the model is
//! the null control of the whole harness.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{is_subalgebra, DoubleVector};
use crate::dressing::{self, FlowConfig, Termination};
use crate::error::{Error, Result};
use crate::fd::FD_STEP;
use crate::groupoid::{self, Element};
use crate::groups::{max_diff, FrameTag, FrameVector, GroupPoint, PoissonDouble, C64};
use crate::models::{Model, Su11Model};
use crate::reduction::{self, ReductionModel};
use crate::sampling::{self, DEFAULT_MIN_MARGIN};
use crate::tensors;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SAMPLES: usize = 100;
/// Tolerance cap applied to every check of the null-control model.
pub const NULL_CONTROL_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    All,
    Algebra,
    Dressing,
    Tensors,
    Groupoid,
    Reduction,
}

impl Suite {
    pub const NAMES: [&'static str; 6] = ["all", "algebra", "dressing", "tensors", "groupoid", "reduction"];

    fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "all" => Suite::All,
            "algebra" => Suite::Algebra,
            "dressing" => Suite::Dressing,
            "tensors" => Suite::Tensors,
            "groupoid" => Suite::Groupoid,
            "reduction" => Suite::Reduction,
            _ => return Err(Error::Unknown { kind: "suite", name: s.to_string() }),
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = [Suite::All, Suite::Algebra, Suite::Dressing, Suite::Tensors, Suite::Groupoid, Suite::Reduction]
            .iter()
            .position(|s| s == self)
            .unwrap_or(0);
        f.write_str(Suite::NAMES[i])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub id: String,
    pub samples: usize,
    pub max_defect: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Environment {
    pub precision: &'static str,
    pub seed: u64,
    pub fd_step: f64,
    pub version: &'static str,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub model: String,
    pub suite: Suite,
    pub samples: usize,
    pub environment: Environment,
    pub checks: Vec<CheckRecord>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn check(&self, id: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.id == id)
    }
}

/// Runs a suite on a registered model.
pub fn run(model: &Model, suite: Suite, seed: u64, samples: usize) -> VerificationReport {
    let mut ctx = Ctx { seed, samples: samples.max(1), cap: f64::INFINITY, checks: Vec::new() };
    let name = match model {
        Model::Su11(m) => {
            generic(&mut ctx, m, suite);
            su11_specific(&mut ctx, m, suite);
            m.name().to_string()
        }
        Model::Trivial(m) => {
            ctx.cap = NULL_CONTROL_TOL;
            generic(&mut ctx, m, suite);
            m.name().to_string()
        }
    };
    ctx.checks.sort_by(|a, b| a.id.cmp(&b.id));
    let pass = ctx.checks.iter().all(|c| c.pass);
    VerificationReport {
        schema: SCHEMA_VERSION,
        model: name,
        suite,
        samples: ctx.samples,
        environment: Environment { precision: "f64", seed, fd_step: FD_STEP, version: env!("CARGO_PKG_VERSION") },
        checks: ctx.checks,
        pass,
    }
}

struct Ctx {
    seed: u64,
    samples: usize,
    cap: f64,
    checks: Vec<CheckRecord>,
}

impl Ctx {
    /// Runs `f` once with a fresh stream; `f` returns `(samples, max defect)`.
    fn record(&mut self, id: &str, tolerance: f64, f: impl FnOnce(&mut ChaCha8Rng) -> Result<(usize, f64)>) {
        let mut rng = sampling::stream(self.seed, id);
        let tolerance = tolerance.min(self.cap);
        let (samples, max_defect, note) = match f(&mut rng) {
            Ok((n, d)) if d.is_nan() => (n, f64::INFINITY, Some("defect is NaN".to_string())),
            Ok((n, d)) => (n, d, None),
            Err(e) => (0, f64::INFINITY, Some(e.to_string())),
        };
        self.checks.push(CheckRecord {
            id: id.to_string(),
            samples,
            max_defect,
            tolerance,
            pass: max_defect <= tolerance,
            note,
        });
    }

    /// Maximum of `f` over `self.samples` draws.
    fn sampled(&mut self, id: &str, tolerance: f64, mut f: impl FnMut(&mut ChaCha8Rng) -> Result<f64>) {
        let n = self.samples;
        self.record(id, tolerance, |rng| {
            let mut worst = 0.0f64;
            for _ in 0..n {
                let d = f(rng)?;
                worst = if d.is_nan() { f64::NAN } else { worst.max(d) };
                if worst.is_nan() {
                    break;
                }
            }
            Ok((n, worst))
        });
    }

    fn note(&mut self, text: String) {
        if let Some(c) = self.checks.last_mut() {
            c.note = Some(c.note.take().map_or(text.clone(), |n| format!("{n}; {text}")));
        }
    }
}

fn params_scale(p: &[f64]) -> f64 {
    1.0 + p.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

fn rel_g<M: PoissonDouble>(m: &M, a: &M::G, b: &M::G) -> f64 {
    m.g_distance(a, b) / params_scale(&m.g_params(a))
}

fn rel_gstar<M: PoissonDouble>(m: &M, a: &M::GStar, b: &M::GStar) -> f64 {
    m.gstar_distance(a, b) / params_scale(&m.gstar_params(a))
}

fn rel_element<M: PoissonDouble>(m: &M, a: &Element<M>, b: &Element<M>) -> f64 {
    rel_g(m, &a.g1, &b.g1)
        .max(rel_gstar(m, &a.gamma1, &b.gamma1))
        .max(rel_gstar(m, &a.gamma2, &b.gamma2))
        .max(rel_g(m, &a.g2, &b.g2))
}

fn random_vec<R: Rng + ?Sized>(rng: &mut R, n: usize, r: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-r..r)).collect()
}

/// Dyadic vector, so that the null control sees no rounding.
fn dyadic_vec<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-256i32..=256) as f64 / 128.0).collect()
}

fn generic<M: ReductionModel>(ctx: &mut Ctx, m: &M, suite: Suite) {
    if suite.includes(Suite::Algebra) {
        algebra_checks(ctx, m);
    }
    if suite.includes(Suite::Dressing) {
        dressing_checks(ctx, m);
    }
    if suite.includes(Suite::Tensors) {
        tensor_checks(ctx, m);
    }
    if suite.includes(Suite::Groupoid) {
        groupoid_checks(ctx, m);
    }
    if suite.includes(Suite::Reduction) {
        reduction_checks(ctx, m);
    }
}

fn algebra_checks<M: ReductionModel>(ctx: &mut Ctx, m: &M) {
    let b = m.bialgebra();
    let n = b.dim();
    ctx.record("algebra.antisymmetry", 1e-12, |_| {
        Ok((1, b.g.antisymmetry_defect().max(b.g_star.antisymmetry_defect())))
    });
    ctx.record("algebra.jacobi_g", 1e-12, |_| Ok((n * n * n, b.g.jacobi_defect())));
    ctx.record("algebra.jacobi_gstar", 1e-12, |_| Ok((n * n * n, b.g_star.jacobi_defect())));
    ctx.record("algebra.cocycle", 1e-12, |_| Ok((n * n, b.cocycle_defect())));
    ctx.record("algebra.pairing_invariance", 1e-12, |_| Ok((8 * n * n * n, b.pairing_invariance_defect())));
    ctx.record("algebra.double_jacobi", 1e-12, |_| Ok((8 * n * n * n, b.double_jacobi_defect())));
    ctx.sampled("algebra.double_jacobi_random", 1e-9, |rng| {
        let u = DoubleVector::from_coords(&dyadic_vec(rng, 2 * n));
        let v = DoubleVector::from_coords(&dyadic_vec(rng, 2 * n));
        let w = DoubleVector::from_coords(&dyadic_vec(rng, 2 * n));
        Ok(b.jacobi_triple(&u, &v, &w))
    });
    let sub = m.subgroup().clone();
    ctx.record("algebra.coisotropy_criterion", 1e-12, |_| {
        let (_, r_h) = is_subalgebra(&b.g, &sub.h, 1e-12)?;
        let (_, r_p) = is_subalgebra(&b.g_star, &sub.h_perp, 1e-12)?;
        Ok((2, r_h.max(r_p)))
    });
    // (h^perp)^perp = h, and the complementary dimensions add up
    ctx.record("algebra.annihilator_involution", 1e-12, |_| {
        let back = sub.h_perp.annihilator();
        let dims = (sub.h.dim() + sub.h_perp.dim()) as f64 - n as f64;
        let span = sub.h.basis_vectors().iter().map(|v| back.residual(v)).fold(dims.abs(), f64::max);
        Ok((1, if back.dim() == sub.h.dim() { span } else { f64::INFINITY }))
    });
}

fn dressing_checks<M: ReductionModel>(ctx: &mut Ctx, m: &M) {
    let n = m.dim();
    let total = ctx.samples * 10;
    ctx.record("dressing.factorization_roundtrip", 1e-10, |rng| {
        let mut worst = 0.0f64;
        let mut used = 0;
        while used < total {
            let d = m.d_exp(&DoubleVector::from_coords(&random_vec(rng, 2 * n, 1.5)));
            for order in [crate::groups::FactorOrder::GGstar, crate::groups::FactorOrder::GstarG] {
                if m.margin(&d, order) <= 1e-3 {
                    continue;
                }
                let f = m.factorize(&d, order)?;
                let (a, b) = (m.embed_g(&f.g), m.embed_gstar(&f.gamma));
                let back = match order {
                    crate::groups::FactorOrder::GGstar => m.d_mul(&a, &b),
                    crate::groups::FactorOrder::GstarG => m.d_mul(&b, &a),
                };
                worst = worst.max(m.d_distance(&back, &d) / (1.0 + m.d_coords(&d).max_abs()));
                used += 1;
            }
        }
        Ok((used, worst))
    });
    ctx.record("dressing.not_factorizable_iff_nonpositive_margin", 0.0, |rng| {
        let mut mismatches = 0usize;
        for _ in 0..total {
            let d = m.d_exp(&DoubleVector::from_coords(&random_vec(rng, 2 * n, 2.0)));
            for order in [crate::groups::FactorOrder::GGstar, crate::groups::FactorOrder::GstarG] {
                let margin = m.margin(&d, order);
                let refused = matches!(m.factorize(&d, order), Err(Error::NotFactorizable { .. }));
                if refused != (margin <= 0.0) {
                    mismatches += 1;
                }
            }
        }
        Ok((2 * total, mismatches as f64))
    });
    let dress = |g: &M::G, s: &M::GStar| dressing::dress(m, g, s);
    ctx.sampled("dressing.eq6_right_action", 1e-9, |rng| {
        let (g1, s) = sampling::factorizable_pair(m, rng, DEFAULT_MIN_MARGIN)?;
        let g2 = m.g_sample(rng);
        let Ok((s2, g2s)) = dress(&g2, &s) else { return Ok(0.0) };
        let Ok((_, lhs)) = dress(&m.g_mul(&g1, &g2), &s) else { return Ok(0.0) };
        let Ok((_, g1s)) = dress(&g1, &s2) else { return Ok(0.0) };
        Ok(rel_g(m, &lhs, &m.g_mul(&g1s, &g2s)))
    });
    ctx.sampled("dressing.eq6_left_action", 1e-9, |rng| {
        let (g, s1) = sampling::factorizable_pair(m, rng, DEFAULT_MIN_MARGIN)?;
        let s2 = m.gstar_sample(rng);
        let Ok((gs1, gg)) = dress(&g, &s1) else { return Ok(0.0) };
        let Ok((lhs, _)) = dress(&g, &m.gstar_mul(&s1, &s2)) else { return Ok(0.0) };
        let Ok((gs2, _)) = dress(&gg, &s2) else { return Ok(0.0) };
        Ok(rel_gstar(m, &lhs, &m.gstar_mul(&gs1, &gs2)))
    });
    ctx.sampled("dressing.left_action_law", 1e-9, |rng| {
        let (g2, s) = sampling::factorizable_pair(m, rng, DEFAULT_MIN_MARGIN)?;
        let g1 = m.g_sample(rng);
        let Ok(lhs) = dressing::dress_left(m, &m.g_mul(&g1, &g2), &s) else { return Ok(0.0) };
        let Ok(inner) = dressing::dress_left(m, &g2, &s) else { return Ok(0.0) };
        let Ok(rhs) = dressing::dress_left(m, &g1, &inner) else { return Ok(0.0) };
        Ok(rel_gstar(m, &lhs, &rhs))
    });
    ctx.sampled("dressing.sharp_form_gstar", 1e-9, |rng| {
        let s = m.gstar_sample(rng);
        dressing::sharp_form_check(m, &random_vec(rng, n, 1.0), &s)
    });
    ctx.sampled("dressing.sharp_form_g", 1e-9, |rng| {
        let g = m.g_sample(rng);
        dressing::sharp_form_check_g(m, &random_vec(rng, n, 1.0), &g)
    });
    ctx.sampled("dressing.field_fd_gstar", 1e-5, |rng| {
        let s = m.gstar_sample(rng);
        let x = dyadic_vec(rng, n);
        let a = dressing::dressing_field_on_gstar(m, &x, &s)?;
        let b = dressing::dressing_field_on_gstar_fd(m, &x, &s, FD_STEP)?;
        Ok(max_diff(&a.coords, &b.coords))
    });
    ctx.sampled("dressing.field_fd_g", 1e-5, |rng| {
        let g = m.g_sample(rng);
        let xi = dyadic_vec(rng, n);
        let a = dressing::dressing_field_on_g(m, &xi, &g)?;
        let b = dressing::dressing_field_on_g_fd(m, &xi, &g, FD_STEP)?;
        Ok(max_diff(&a.coords, &b.coords))
    });
    ctx.sampled("dressing.h_perp_invariance", 1e-10, |rng| {
        let h = m.h_sample(rng);
        let s = m.perp_sample(rng);
        let d = dressing::dress_left(m, &h, &s)?;
        Ok(max_diff(&m.coset_label(&d), &m.unit_coset_label()))
    });
    ctx.sampled("dressing.h_perp_acts_trivially_on_h", 1e-10, |rng| {
        let h = m.h_sample(rng);
        let s = m.perp_sample(rng);
        Ok(rel_g(m, &h, &dressing::dress_right(m, &h, &s)?))
    });
    if m.subgroup().is_poisson_subgroup {
        ctx.sampled("dressing.h_automorphism", 1e-9, |rng| {
            let h = m.h_sample(rng);
            let (s1, s2) = (m.gstar_sample(rng), m.gstar_sample(rng));
            let lhs = dressing::dress_left(m, &h, &m.gstar_mul(&s1, &s2))?;
            let rhs = m.gstar_mul(&dressing::dress_left(m, &h, &s1)?, &dressing::dress_left(m, &h, &s2)?);
            Ok(rel_gstar(m, &lhs, &rhs))
        });
    }
    let cfg = FlowConfig::default();
    let flows = (ctx.samples / 10).max(1);
    ctx.record("dressing.flow_h_restricted_complete", 1e-10, |rng| {
        let mut worst = 0.0f64;
        for _ in 0..flows {
            let h = m.h_sample(rng);
            let xi = m.perp_log(&m.perp_sample(rng))?;
            let t_end = if rng.gen::<bool>() { 2.0 } else { -2.0 };
            let trace = dressing::flow(m, &h, &xi, t_end, &FlowConfig { dt: 1e-2, ..cfg })?;
            if trace.termination != Termination::Completed {
                return Ok((flows, f64::INFINITY));
            }
            for p in &trace.points {
                worst = worst.max(rel_g(m, &h, p));
            }
            worst = worst.max(trace.rk_deviation);
        }
        Ok((flows, worst))
    });
    ctx.record("dressing.flow_rk_vs_exact", 1e-6, |rng| {
        let mut worst = 0.0f64;
        for _ in 0..flows {
            let g = m.g_sample(rng);
            let xi = random_vec(rng, n, 1.0);
            let trace = dressing::flow(m, &g, &xi, 0.5, &cfg)?;
            worst = worst.max(trace.rk_deviation);
        }
        Ok((flows, worst))
    });
    ctx.note(format!("RKMK4 dt={}, compared where margin >= {}", cfg.dt, dressing::COMMON_DOMAIN_MARGIN));
}

fn tensor_checks<M: ReductionModel>(ctx: &mut Ctx, m: &M) {
    let n = m.dim();
    ctx.record("tensors.pi_vanish_at_identity", 1e-14, |_| {
        let a = tensors::pi_g(m, &m.g_identity())?.max_abs();
        let b = tensors::pi_gstar(m, &m.gstar_identity())?.max_abs();
        Ok((2, a.max(b)))
    });
    ctx.record("tensors.pi_plus_canonical_at_identity", 1e-14, |_| {
        let p = tensors::pi_plus(m, &m.g_identity(), &m.gstar_identity())?;
        let canonical = DMatrix::from_fn(2 * n, 2 * n, |i, j| {
            if i < n && j == i + n {
                -1.0
            } else if i >= n && j + n == i {
                1.0
            } else {
                0.0
            }
        });
        Ok((1, (&p.mat - canonical).amax()))
    });
    ctx.sampled("tensors.pi_plus_expansion_agreement", 1e-10, |rng| {
        let (g, s) = (m.g_sample(rng), m.gstar_sample(rng));
        let e = tensors::pi_plus_expansions(m, &g, &s)?;
        Ok(e.agreement_defect() / (1.0 + e.closed.amax()))
    });
    let mut min_det = f64::INFINITY;
    ctx.sampled("tensors.pi_plus_nondegenerate", 0.0, |rng| {
        let (g, s) = (m.g_sample(rng), m.gstar_sample(rng));
        let det = tensors::pi_plus(m, &g, &s)?.determinant().abs();
        min_det = min_det.min(det);
        Ok((1e-6 - det).max(0.0))
    });
    let mut note = format!("min |det pi_+| = {min_det:.6e}; defect is the shortfall below 1e-6");
    if min_det < 1e-6 {
        note.push_str("; det vanishes where g gamma leaves G* G, which crosses the sampling box");
    }
    ctx.note(note);
    ctx.sampled("tensors.antisymmetry", 1e-12, |rng| {
        let (g, s) = (m.g_sample(rng), m.gstar_sample(rng));
        let a = tensors::pi_g(m, &g)?;
        let b = tensors::pi_gstar(m, &s)?;
        let p = tensors::pi_plus_expansions(m, &g, &s)?;
        let c = (&p.closed + p.closed.transpose()).amax() / (1.0 + p.scale);
        Ok((a.antisymmetry_defect() / (1.0 + a.max_abs())).max(b.antisymmetry_defect() / (1.0 + b.max_abs())).max(c))
    });
    ctx.sampled("tensors.sharp_antisymmetry", 1e-12, |rng| {
        let (g, s) = (m.g_sample(rng), m.gstar_sample(rng));
        let p = tensors::pi_plus(m, &g, &s)?;
        let w = FrameVector::new(dyadic_vec(rng, 2 * n), FrameTag::MixedLgRgamma);
        let v = FrameVector::new(dyadic_vec(rng, 2 * n), FrameTag::MixedLgRgamma);
        let sw = tensors::sharp(&p, &w)?;
        let sv = tensors::sharp(&p, &v)?;
        let lhs = crate::algebra::dot(&sw.coords, &v.coords);
        let rhs = crate::algebra::dot(&sv.coords, &w.coords);
        let self_pair = crate::algebra::dot(&sw.coords, &w.coords);
        Ok((lhs + rhs).abs().max(self_pair.abs()) / (1.0 + p.max_abs()))
    });
    ctx.sampled("tensors.multiplicativity_g", 1e-9, |rng| {
        let (g, h) = (m.g_sample(rng), m.g_sample(rng));
        let scale = 1.0 + tensors::pi_g(m, &m.g_mul(&g, &h))?.max_abs();
        Ok(tensors::multiplicativity_defect_g(m, &g, &h)? / scale)
    });
    ctx.sampled("tensors.multiplicativity_gstar", 1e-9, |rng| {
        let (s, t) = (m.gstar_sample(rng), m.gstar_sample(rng));
        let scale = 1.0 + tensors::pi_gstar(m, &m.gstar_mul(&s, &t))?.max_abs();
        Ok(tensors::multiplicativity_defect_gstar(m, &s, &t)? / scale)
    });
    ctx.sampled("tensors.h_is_poisson_subgroup", 1e-12, |rng| {
        // pi_G(h) lies in the bivectors of h (zero when dim h = 1)
        let h = m.h_sample(rng);
        let p = tensors::pi_g(m, &h)?;
        let ann = m.subgroup().h_perp.clone();
        let mut worst = 0.0f64;
        for w in ann.basis_vectors() {
            let v = &p.mat * DMatrix::from_column_slice(n, 1, w);
            let v: Vec<f64> = v.iter().copied().collect();
            worst = worst.max(m.subgroup().h.residual(&v));
        }
        Ok(worst)
    });
    ctx.sampled("tensors.h_perp_coisotropic", 1e-10, |rng| {
        let s = m.perp_sample(rng);
        let p = tensors::pi_gstar(m, &s)?;
        let mut worst = 0.0f64;
        for x in m.subgroup().h.basis_vectors() {
            let v = tensors::sharp(&p, &FrameVector::new(x.clone(), FrameTag::RightTrivialized))?;
            worst = worst.max(m.subgroup().h_perp.residual(&v.coords));
        }
        Ok(worst)
    });
    ctx.sampled("tensors.anchor_anti_poisson", 1e-6, |rng| {
        let x = sampling::omega_point(m, rng, DEFAULT_MIN_MARGIN)?;
        let scale = 1.0 + tensors::pi_gstar(m, &x.gamma2)?.max_abs();
        Ok(groupoid::anchor_anti_poisson_defect(m, &x, FD_STEP)? / scale)
    });
    ctx.note("finite differences; defect relative to 1 + |pi_G*(J(x))|".into());
}

fn groupoid_checks<M: ReductionModel>(ctx: &mut Ctx, m: &M) {
    let n = m.dim();
    let mm = DEFAULT_MIN_MARGIN;
    ctx.sampled("groupoid.omega_invariant", 1e-10, |rng| {
        let x = sampling::omega_point(m, rng, mm)?;
        let y = groupoid::make_from_right(m, &x.gamma2, &x.g2)?;
        Ok(groupoid::omega_residual(m, &x).max(rel_element(m, &x, &y)))
    });
    ctx.sampled("groupoid.complete_case_structure_maps", 1e-10, |rng| {
        let (g, s) = sampling::factorizable_pair(m, rng, mm)?;
        let x = groupoid::make(m, &g, &s)?;
        let (ds, dg) = dressing::dress(m, &g, &s)?;
        Ok(rel_g(m, &groupoid::source_g(m, &x), &g)
            .max(rel_g(m, &groupoid::target_g(m, &x), &dg))
            .max(rel_gstar(m, &groupoid::source_gstar(m, &x), &ds))
            .max(rel_gstar(m, &groupoid::target_gstar(m, &x), &s)))
    });
    ctx.sampled("groupoid.g_units", 1e-9, |rng| {
        let x = sampling::omega_point(m, rng, mm)?;
        let l = groupoid::mult_g(m, &groupoid::unit_g(m, &x.g1), &x)?;
        let r = groupoid::mult_g(m, &x, &groupoid::unit_g(m, &x.g2))?;
        let u = groupoid::unit_g(m, &x.g1);
        Ok(rel_element(m, &x, &l).max(rel_element(m, &x, &r)).max(groupoid::omega_residual(m, &u)))
    });
    ctx.sampled("groupoid.g_inverse", 1e-9, |rng| {
        let x = sampling::omega_point(m, rng, mm)?;
        let xi = groupoid::inverse_g(m, &x);
        let a = groupoid::mult_g(m, &x, &xi)?;
        let b = groupoid::mult_g(m, &xi, &x)?;
        Ok(rel_element(m, &a, &groupoid::unit_g(m, &x.g1))
            .max(rel_element(m, &b, &groupoid::unit_g(m, &x.g2)))
            .max(groupoid::omega_residual(m, &xi)))
    });
    ctx.sampled("groupoid.g_associativity", 1e-9, |rng| {
        let c = sampling::composable_g(m, rng, 3, mm)?;
        let l = groupoid::mult_g(m, &groupoid::mult_g(m, &c[0], &c[1])?, &c[2])?;
        let r = groupoid::mult_g(m, &c[0], &groupoid::mult_g(m, &c[1], &c[2])?)?;
        let st = rel_g(m, &l.g1, &c[0].g1).max(rel_g(m, &l.g2, &c[2].g2));
        Ok(rel_element(m, &l, &r).max(st).max(groupoid::omega_residual(m, &l)))
    });
    ctx.sampled("groupoid.gstar_units", 1e-9, |rng| {
        let x = sampling::omega_point(m, rng, mm)?;
        let l = groupoid::mult_gstar(m, &groupoid::unit_gstar(m, &x.gamma2), &x)?;
        let r = groupoid::mult_gstar(m, &x, &groupoid::unit_gstar(m, &x.gamma1))?;
        Ok(rel_element(m, &x, &l).max(rel_element(m, &x, &r)))
    });
    ctx.sampled("groupoid.gstar_inverse", 1e-9, |rng| {
        let x = sampling::omega_point(m, rng, mm)?;
        let xi = groupoid::inverse_gstar(m, &x);
        let a = groupoid::mult_gstar(m, &x, &xi)?;
        let b = groupoid::mult_gstar(m, &xi, &x)?;
        Ok(rel_element(m, &a, &groupoid::unit_gstar(m, &x.gamma2))
            .max(rel_element(m, &b, &groupoid::unit_gstar(m, &x.gamma1)))
            .max(groupoid::omega_residual(m, &xi)))
    });
    ctx.sampled("groupoid.gstar_associativity", 1e-9, |rng| {
        let c = sampling::composable_gstar(m, rng, 3, mm)?;
        let l = groupoid::mult_gstar(m, &groupoid::mult_gstar(m, &c[0], &c[1])?, &c[2])?;
        let r = groupoid::mult_gstar(m, &c[0], &groupoid::mult_gstar(m, &c[1], &c[2])?)?;
        let st = rel_gstar(m, &l.gamma2, &c[0].gamma2).max(rel_gstar(m, &l.gamma1, &c[2].gamma1));
        Ok(rel_element(m, &l, &r).max(st).max(groupoid::omega_residual(m, &l)))
    });
    ctx.sampled("groupoid.anchor_multiplicative", 0.0, |rng| {
        let c = sampling::composable_g(m, rng, 2, mm)?;
        let p = groupoid::mult_g(m, &c[0], &c[1])?;
        let j = m.gstar_mul(&groupoid::anchor(m, &c[0]), &groupoid::anchor(m, &c[1]));
        Ok(m.gstar_distance(&groupoid::anchor(m, &p), &j))
    });
    ctx.sampled("groupoid.action_axioms", 1e-10, |rng| {
        // x1, x2 composable over G*, y over G with J(y) = beta_G*(x2)
        let c = sampling::composable_gstar(m, rng, 2, mm)?;
        let (x1, x2) = (&c[0], &c[1]);
        let y = loop {
            let g = m.g_sample(rng);
            if let Ok(y) = groupoid::make_from_right(m, &x2.gamma1, &g) {
                break y;
            }
        };
        let lhs = groupoid::act(m, &groupoid::mult_gstar(m, x1, x2)?, &y)?;
        let rhs = groupoid::act(m, x1, &groupoid::act(m, x2, &y)?)?;
        let unit = groupoid::act(m, &groupoid::unit_gstar(m, &y.gamma2), &y)?;
        let anchor = rel_gstar(m, &groupoid::anchor(m, &lhs), &groupoid::source_gstar(m, x1));
        Ok(rel_element(m, &lhs, &rhs)
            .max(rel_element(m, &unit, &y))
            .max(anchor)
            .max(groupoid::omega_residual(m, &lhs)))
    });
    ctx.sampled("groupoid.source_poisson", 1e-5, |rng| {
        let x = sampling::omega_point(m, rng, mm)?;
        let scale = 1.0 + tensors::pi_g_left(m, &x.g1)?.max_abs();
        Ok(groupoid::source_poisson_defect(m, &x, FD_STEP)? / scale)
    });
    ctx.sampled("groupoid.target_anti_poisson", 1e-5, |rng| {
        let x = sampling::omega_point(m, rng, mm)?;
        let scale = 1.0 + tensors::pi_g(m, &x.g2)?.max_abs();
        Ok(groupoid::target_anti_poisson_defect(m, &x, FD_STEP)? / scale)
    });
    ctx.note("finite differences; defects relative to 1 + |target bivector|".into());
    ctx.sampled("groupoid.momentum_identity", 1e-4, |rng| {
        let x = sampling::omega_point(m, rng, mm)?;
        let xv = dyadic_vec(rng, n);
        groupoid::momentum_identity_defect(m, &x, &xv, FD_STEP)
    });
}

fn reduction_checks<M: ReductionModel>(ctx: &mut Ctx, m: &M) {
    let mm = DEFAULT_MIN_MARGIN;
    let sub = m.subgroup().clone();
    ctx.record("reduction.relative_completeness_condition", 0.0, |_| {
        Ok((1, if sub.relatively_complete() { 0.0 } else { 1.0 }))
    });
    ctx.note(format!(
        "H Poisson subgroup: {}; H^perp simply connected: {}",
        sub.is_poisson_subgroup, sub.perp_simply_connected
    ));
    ctx.sampled("reduction.level_set_closure", 1e-9, |rng| {
        let c = sampling::level_chain(m, rng, 2, mm)?;
        let p = groupoid::mult_g(m, &c[0], &c[1])?;
        Ok(reduction::level_residual(m, &p))
    });
    ctx.sampled("reduction.h_action_law", 1e-10, |rng| {
        let x = sampling::level_point(m, rng, mm)?;
        let (h1, h2) = (m.h_sample(rng), m.h_sample(rng));
        let lhs = reduction::h_act(m, &m.g_mul(&h1, &h2), &x)?;
        let rhs = reduction::h_act(m, &h1, &reduction::h_act(m, &h2, &x)?)?;
        let unit = reduction::h_act(m, &m.g_identity(), &x)?;
        Ok(rel_element(m, &lhs, &rhs).max(rel_element(m, &unit, &x)))
    });
    ctx.sampled("reduction.canonical_orbit_invariance", 1e-9, |rng| {
        let x = sampling::level_point(m, rng, mm)?;
        let h = m.h_sample(rng);
        let a = reduction::canonicalize(m, &x)?;
        let b = reduction::canonicalize(m, &reduction::h_act(m, &h, &x)?)?;
        let again = reduction::canonicalize(m, &a.rep)?;
        Ok(reduction::reduced_distance(m, &a, &b).max(reduction::reduced_distance(m, &a, &again)))
    });
    ctx.sampled("reduction.target_well_defined", 1e-8, |rng| {
        let x = sampling::level_point(m, rng, mm)?;
        let h = m.h_sample(rng);
        let y = reduction::h_act(m, &h, &x)?;
        Ok(max_diff(&m.quotient_coords(&x.g2), &m.quotient_coords(&y.g2))
            .max(max_diff(&m.quotient_coords(&x.g1), &m.quotient_coords(&y.g1))))
    });
    ctx.record("reduction.coisotropy_at_units", 1e-5, |rng| {
        let k = 10;
        let mut worst = 0.0f64;
        for _ in 0..k {
            let g = m.g_sample(rng);
            worst = worst.max(reduction::coisotropy_defect(m, &groupoid::unit_g(m, &g), FD_STEP)?);
        }
        Ok((k, worst))
    });
    ctx.sampled("reduction.coisotropy", 1e-4, |rng| {
        let x = sampling::level_point(m, rng, mm)?;
        reduction::coisotropy_defect(m, &x, FD_STEP)
    });
    ctx.sampled("reduction.reduced_axioms", 1e-8, |rng| {
        let c = sampling::level_chain(m, rng, 3, mm)?;
        let r: Vec<_> = c.iter().map(|x| reduction::canonicalize(m, x)).collect::<Result<_>>()?;
        let ab = reduction::reduced_mult(m, &r[0], &r[1])?;
        let l = reduction::reduced_mult(m, &ab, &r[2])?;
        let rr = reduction::reduced_mult(m, &r[0], &reduction::reduced_mult(m, &r[1], &r[2])?)?;
        let mut worst = reduction::reduced_distance(m, &l, &rr);
        worst = worst.max(max_diff(&reduction::reduced_source(m, &ab), &reduction::reduced_source(m, &r[0])));
        worst = worst.max(max_diff(&reduction::reduced_target(m, &ab), &reduction::reduced_target(m, &r[1])));
        let a = &r[0];
        let src = reduction::reduced_source(m, a);
        let tgt = reduction::reduced_target(m, a);
        let ul = reduction::reduced_mult(m, &reduction::reduced_unit(m, &src)?, a)?;
        let ur = reduction::reduced_mult(m, a, &reduction::reduced_unit(m, &tgt)?)?;
        worst = worst.max(reduction::reduced_distance(m, &ul, a)).max(reduction::reduced_distance(m, &ur, a));
        let inv = reduction::reduced_inverse(m, a)?;
        let li = reduction::reduced_mult(m, a, &inv)?;
        let ri = reduction::reduced_mult(m, &inv, a)?;
        worst = worst.max(reduction::reduced_distance(m, &li, &reduction::reduced_unit(m, &src)?));
        worst = worst.max(reduction::reduced_distance(m, &ri, &reduction::reduced_unit(m, &tgt)?));
        Ok(worst)
    });
    ctx.sampled("reduction.representative_independence", 1e-8, |rng| {
        let c = sampling::level_chain(m, rng, 2, mm)?;
        let base = reduction::reduced_mult_reps(m, &c[0], &c[1])?;
        let a = reduction::h_act(m, &m.h_sample(rng), &c[0])?;
        let b = reduction::h_act(m, &m.h_sample(rng), &c[1])?;
        let shifted = reduction::reduced_mult_reps(m, &a, &b)?;
        Ok(reduction::reduced_distance(m, &base, &shifted))
    });
    ctx.record("reduction.coinduced_vanishes_at_unit", 1e-10, |_| {
        let z = m.quotient_coords(&m.g_identity());
        Ok((1, reduction::disc_bivector(m, &z, FD_STEP)?.max_abs()))
    });
    let orbits = ((ctx.samples as f64).sqrt().ceil() as usize).max(2);
    ctx.record("reduction.coinduced_orbit_independence", 1e-8, |rng| {
        let mut worst = 0.0f64;
        for _ in 0..orbits {
            let z = m.quotient_sample(rng);
            let g = m.section(&z)?;
            let base = reduction::coinduced_bivector_at(m, &g, FD_STEP)?;
            for _ in 0..orbits {
                let p = reduction::coinduced_bivector_at(m, &m.g_mul(&m.h_sample(rng), &g), FD_STEP)?;
                worst = worst.max((&p.mat - &base.mat).amax());
            }
        }
        Ok((orbits * orbits, worst))
    });
    ctx.sampled("reduction.reduced_source_target_poisson", 1e-4, |rng| {
        let x = sampling::level_point(m, rng, mm)?;
        reduction::reduced_poisson_defect(m, &x, FD_STEP)
    });
    ctx.sampled("reduction.cotangent_section_independence", 1e-8, |rng| {
        let x = sampling::level_point(m, rng, mm)?;
        let a = reduction::canonicalize(m, &x)?;
        let c1 = reduction::cotangent_chart(m, &a, FD_STEP)?;
        let hd = m.subgroup().h.dim();
        let c2 = reduction::cotangent_chart_with_section(m, &a, FD_STEP, |z| {
            let theta: Vec<f64> = (0..hd).map(|i| phase(z, i)).collect();
            Ok(m.g_mul(&m.h_element(&theta)?, &m.section(z)?))
        })?;
        Ok(max_diff(&c1.coords, &c2.coords) / params_scale(&c1.coords))
    });
    ctx.sampled("reduction.cotangent_unit_is_zero", 1e-12, |rng| {
        let z = m.quotient_sample(rng);
        let a = reduction::reduced_unit(m, &z)?;
        let c = reduction::cotangent_chart(m, &a, FD_STEP)?;
        Ok(c.coords.iter().fold(0.0f64, |acc, v| acc.max(v.abs())))
    });
    ctx.sampled("reduction.cotangent_intertwining", 1e-9, |rng| {
        let h = m.h_sample(rng);
        let xi = m.perp_log(&m.perp_sample(rng))?;
        reduction::intertwining_defect(m, &h, &xi)
    });
    let k = ctx.samples.min(40);
    ctx.record("reduction.cotangent_injective", 0.0, |rng| {
        let mut pts = Vec::with_capacity(k);
        for _ in 0..k {
            let a = reduction::canonicalize(m, &sampling::level_point(m, rng, mm)?)?;
            let c = reduction::cotangent_chart(m, &a, FD_STEP)?;
            pts.push((a, c));
        }
        let mut collisions = 0usize;
        for i in 0..k {
            for j in i + 1..k {
                let same_image = max_diff(&pts[i].1.z, &pts[j].1.z).max(max_diff(&pts[i].1.coords, &pts[j].1.coords)) < 1e-9;
                let same_class = reduction::reduced_distance(m, &pts[i].0, &pts[j].0) < 1e-6;
                if same_image && !same_class {
                    collisions += 1;
                }
            }
        }
        Ok((k * (k - 1) / 2, collisions as f64))
    });
}

/// A smooth function of the chart coordinates used as a phase.
fn phase(z: &[f64], i: usize) -> f64 {
    let s: f64 = z.iter().enumerate().map(|(j, v)| (j + i + 1) as f64 * v).sum();
    0.7 * s + 0.3 * s * s
}

/// Start point `(sqrt 2, 1)` and the nilpotent direction `[[0, 1], [0, 0]]`.
pub fn escape_witness() -> (GroupPoint, [f64; 3]) {
    let start = GroupPoint { alpha: C64::new(2f64.sqrt(), 0.0), beta: C64::new(1.0, 0.0) };
    (start, [0.0, 0.0, -1.0])
}

/// Root of the margin `(t + sqrt 2)^2 - 1` reached toward negative times.
pub fn escape_witness_time() -> f64 {
    1.0 - 2f64.sqrt()
}

fn su11_specific(ctx: &mut Ctx, m: &Su11Model, suite: Suite) {
    if !suite.includes(Suite::Dressing) {
        return;
    }
    let (start, xi) = escape_witness();
    let run = |dt: f64| -> Result<f64> {
        let t = dressing::flow(m, &start, &xi, -1.0, &FlowConfig { dt, ..FlowConfig::default() })?;
        match t.termination {
            Termination::Escaped { t_escape } => Ok(t_escape),
            other => Err(Error::Domain(format!("witness flow did not escape: {other}"))),
        }
    };
    ctx.record("dressing.escape_time", 1e-6, |_| Ok((1, (run(1e-3)? - escape_witness_time()).abs())));
    ctx.record("dressing.escape_dt_halving", 1e-6, |_| Ok((2, (run(1e-3)? - run(5e-4)?).abs())));
    ctx.sampled("dressing.h_dressing_closed_form", 1e-12, |rng| {
        // ^h (1, N) = (1, e^{2 i theta} N) for h = diag(e^{i theta}, e^{-i theta})
        let theta = rng.gen_range(-3.0..3.0);
        let n = C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let h = GroupPoint::rotation(theta);
        let s = crate::groups::DualGroupPoint { a: 1.0, n };
        let (d, hs) = dressing::dress(m, &h, &s)?;
        let expected = C64::from_polar(1.0, 2.0 * theta) * n;
        Ok((d.a - 1.0).abs().max((d.n - expected).norm()).max((hs.alpha - h.alpha).norm()).max(hs.beta.norm()))
    });
}
