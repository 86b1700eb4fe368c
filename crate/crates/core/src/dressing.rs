//! Factorization in the double, dressing actions, dressing vector fields and
//! dressing flows.
//!
//! For `g` in `G` and `gamma` in `G*` the product `g gamma` refactorizes as
//! `(^g gamma)(g^gamma)`; the two factors define the left dressing action of
//! `G` on `G*` and the right dressing action of `G*` on `G`. Neither needs to
//! exist globally, and [`flow`] detects the escape.

use std::fmt::Write as _;

use crate::algebra::DoubleVector;
use crate::error::{Error, Result};
use crate::fd;
use crate::groups::{project, FactorOrder, Factorization, FrameTag, FrameVector, Part, PoissonDouble};
use crate::tensors::{self, BivectorMatrix};

/// Factorization margin below which a flow is declared escaped.
pub const ESCAPE_MARGIN: f64 = 1e-8;
/// Width of the final bisection bracket around the escape time.
pub const ESCAPE_TOL: f64 = 1e-12;
/// RK and exact flows are compared only while the margin stays above this.
pub const COMMON_DOMAIN_MARGIN: f64 = 1e-2;

pub fn factorize<M: PoissonDouble>(m: &M, d: &M::D, order: FactorOrder) -> Result<Factorization<M::G, M::GStar>> {
    m.factorize(d, order)
}

/// Both dressing factors: `g gamma = (^g gamma)(g^gamma)`.
pub fn dress<M: PoissonDouble>(m: &M, g: &M::G, s: &M::GStar) -> Result<(M::GStar, M::G)> {
    let f = m.factorize(&m.d_mul(&m.embed_g(g), &m.embed_gstar(s)), FactorOrder::GstarG)?;
    Ok((f.gamma, f.g))
}

/// `^g gamma`.
pub fn dress_left<M: PoissonDouble>(m: &M, g: &M::G, s: &M::GStar) -> Result<M::GStar> {
    dress(m, g, s).map(|(s, _)| s)
}

/// `g^gamma`.
pub fn dress_right<M: PoissonDouble>(m: &M, g: &M::G, s: &M::GStar) -> Result<M::G> {
    dress(m, g, s).map(|(_, g)| g)
}

/// Fundamental field of the left dressing action at `gamma`, left-trivialized:
/// `p_g*(Ad_{gamma^{-1}} X)`.
pub fn dressing_field_on_gstar<M: PoissonDouble>(m: &M, x: &[f64], s: &M::GStar) -> Result<FrameVector> {
    crate::error::check_dim(m.dim(), x.len())?;
    let v = m.ad(&m.embed_gstar(&m.gstar_inv(s)), &DoubleVector::from_g(x))?;
    Ok(FrameVector::new(project(&v, Part::GStar).xi, FrameTag::LeftTrivialized))
}

/// Fundamental field of the right dressing action at `g`, right-trivialized:
/// `p_g(Ad_g xi)`.
pub fn dressing_field_on_g<M: PoissonDouble>(m: &M, xi: &[f64], g: &M::G) -> Result<FrameVector> {
    crate::error::check_dim(m.dim(), xi.len())?;
    let v = m.ad(&m.embed_g(g), &DoubleVector::from_gstar(xi))?;
    Ok(FrameVector::new(project(&v, Part::G).x, FrameTag::RightTrivialized))
}

/// Central difference of `t -> ^{exp(tX)} gamma`, left-trivialized.
pub fn dressing_field_on_gstar_fd<M: PoissonDouble>(m: &M, x: &[f64], s: &M::GStar, h: f64) -> Result<FrameVector> {
    let v = fd::central(
        |t| {
            let tx: Vec<f64> = x.iter().map(|a| a * t).collect();
            Ok(fd::gstar_left(m, s, &dress_left(m, &m.g_exp(&tx)?, s)?))
        },
        h,
    )?;
    Ok(FrameVector::new(v, FrameTag::LeftTrivialized))
}

/// Central difference of `t -> g^{exp(t xi)}`, right-trivialized.
pub fn dressing_field_on_g_fd<M: PoissonDouble>(m: &M, xi: &[f64], g: &M::G, h: f64) -> Result<FrameVector> {
    let v = fd::central(
        |t| {
            let txi: Vec<f64> = xi.iter().map(|a| a * t).collect();
            Ok(fd::g_right(m, g, &dress_right(m, g, &m.gstar_exp(&txi)?)?))
        },
        h,
    )?;
    Ok(FrameVector::new(v, FrameTag::RightTrivialized))
}

/// Converts a left-trivialized tangent vector at `gamma` to the right
/// trivialization: `Ad_gamma`.
pub fn gstar_left_to_right<M: PoissonDouble>(m: &M, s: &M::GStar, v: &FrameVector) -> Result<FrameVector> {
    let xi = v.require(FrameTag::LeftTrivialized)?;
    let w = m.ad(&m.embed_gstar(s), &DoubleVector::from_gstar(xi))?;
    Ok(FrameVector::new(w.xi, FrameTag::RightTrivialized))
}

/// Distance between the dressing field on `G*` and `pi^sharp` of the
/// right-invariant covector `X`, with an explicit bivector (right-trivialized).
pub fn sharp_form_residual<M: PoissonDouble>(m: &M, x: &[f64], s: &M::GStar, pi: &BivectorMatrix) -> Result<f64> {
    let field = gstar_left_to_right(m, s, &dressing_field_on_gstar(m, x, s)?)?;
    let sharp = tensors::sharp(pi, &FrameVector::new(x.to_vec(), FrameTag::RightTrivialized))?;
    Ok(fd_max_diff(&field.coords, &sharp.coords))
}

/// Dressing field on `G*` against `pi_{G*}^sharp(r*_{gamma^{-1}} X)`.
pub fn sharp_form_check<M: PoissonDouble>(m: &M, x: &[f64], s: &M::GStar) -> Result<f64> {
    sharp_form_residual(m, x, s, &tensors::pi_gstar(m, s)?)
}

/// Mirror on `G`: the dressing field `S_xi(g)` against
/// `-pi_G^sharp(l*_{g^{-1}} xi)`, both right-trivialized.
pub fn sharp_form_check_g<M: PoissonDouble>(m: &M, xi: &[f64], g: &M::G) -> Result<f64> {
    let field = dressing_field_on_g(m, xi, g)?;
    // the left-invariant covector xi seen in the right trivialization
    let omega = m.ad(&m.embed_g(g), &DoubleVector::from_gstar(xi))?.xi;
    let sharp = tensors::sharp(&tensors::pi_g(m, g)?, &FrameVector::new(omega, FrameTag::RightTrivialized))?;
    let neg: Vec<f64> = sharp.coords.iter().map(|v| -v).collect();
    Ok(fd_max_diff(&field.coords, &neg))
}

fn fd_max_diff(a: &[f64], b: &[f64]) -> f64 {
    crate::groups::max_diff(a, b)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowConfig {
    pub dt: f64,
    pub max_steps: usize,
    pub escape_margin: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self { dt: 1e-3, max_steps: 1_000_000, escape_margin: ESCAPE_MARGIN }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Termination {
    Completed,
    Escaped { t_escape: f64 },
    StepLimit,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Termination::Completed => f.write_str("completed"),
            Termination::Escaped { t_escape } => write!(f, "escaped(t={t_escape:.9})"),
            Termination::StepLimit => f.write_str("step_limit"),
        }
    }
}

/// A sampled dressing orbit `t -> start^{exp(t xi)}`.
///
/// `times` is monotone in the direction of integration (decreasing for a
/// negative `t_end`). `points` and `margins` come from refactorizing the exact
/// curve; `rk_deviation` is the largest gap to the RKMK4 integrator over the
/// samples whose margin is at least [`COMMON_DOMAIN_MARGIN`].
#[derive(Clone, Debug)]
pub struct FlowTrace<G> {
    pub times: Vec<f64>,
    pub points: Vec<G>,
    pub margins: Vec<f64>,
    pub termination: Termination,
    pub rk_deviation: f64,
}

impl<G> FlowTrace<G> {
    /// CSV with one row per sample and a trailing `# termination=` line.
    pub fn to_csv<M: PoissonDouble<G = G>>(&self, m: &M) -> String {
        let mut out = String::from("t");
        for name in m.g_param_names() {
            out.push(',');
            out.push_str(&name);
        }
        out.push_str(",margin\n");
        for ((t, g), margin) in self.times.iter().zip(&self.points).zip(&self.margins) {
            let _ = write!(out, "{t:.12e}");
            for p in m.g_params(g) {
                let _ = write!(out, ",{p:.12e}");
            }
            let _ = writeln!(out, ",{margin:.12e}");
        }
        let _ = writeln!(out, "# termination={}", self.termination);
        out
    }
}

/// Integrates the dressing orbit of `start` under `exp(t xi)` up to `t_end`
/// (either sign), sampling the exact curve every `cfg.dt`.
///
/// The exact curve `start * exp(t xi)` is refactorized at every step; in
/// parallel an RKMK4 integrator solves `g' = p_g(Ad_g xi) g`. When the
/// margin drops below `cfg.escape_margin` the crossing is bisected and the
/// trace ends with [`Termination::Escaped`].
pub fn flow<M: PoissonDouble>(m: &M, start: &M::G, xi: &[f64], t_end: f64, cfg: &FlowConfig) -> Result<FlowTrace<M::G>> {
    crate::error::check_dim(m.dim(), xi.len())?;
    if !(cfg.dt > 0.0) || !cfg.dt.is_finite() {
        return Err(Error::Domain(format!("flow step must be positive, got {}", cfg.dt)));
    }
    if !t_end.is_finite() {
        return Err(Error::Domain("flow end time must be finite".into()));
    }
    let base = m.embed_g(start);
    let exact = |t: f64| {
        let txi: Vec<f64> = xi.iter().map(|a| a * t).collect();
        m.d_mul(&base, &m.d_exp(&DoubleVector::from_gstar(&txi)))
    };
    let margin_at = |t: f64| m.margin(&exact(t), FactorOrder::GstarG);

    let sign = if t_end < 0.0 { -1.0 } else { 1.0 };
    let mut trace = FlowTrace {
        times: vec![0.0],
        points: vec![start.clone()],
        margins: vec![margin_at(0.0)],
        termination: Termination::Completed,
        rk_deviation: 0.0,
    };
    let mut rk = start.clone();
    let mut t = 0.0f64;
    let mut steps = 0usize;
    while sign * (t_end - t) > 0.0 {
        if steps >= cfg.max_steps {
            trace.termination = Termination::StepLimit;
            return Ok(trace);
        }
        // k dt rather than a running sum, so a t_end that is a multiple of dt
        // is not followed by a roundoff-sized extra step
        let k_dt = sign * (steps + 1) as f64 * cfg.dt;
        let t_next = if sign * (t_end - k_dt) <= 1e-9 * cfg.dt { t_end } else { k_dt };
        let margin = margin_at(t_next);
        if margin < cfg.escape_margin {
            let t_escape = bisect_escape(&margin_at, t, t_next, cfg.escape_margin);
            trace.termination = Termination::Escaped { t_escape };
            return Ok(trace);
        }
        rk = rk_advance(m, &rk, xi, t_next - t, 0)?;
        let f = m.factorize(&exact(t_next), FactorOrder::GstarG)?;
        if margin >= COMMON_DOMAIN_MARGIN {
            let scale = 1.0 + m.g_params(&f.g).iter().fold(0.0f64, |a, p| a.max(p.abs()));
            trace.rk_deviation = trace.rk_deviation.max(m.g_distance(&rk, &f.g) / scale);
        }
        trace.times.push(t_next);
        trace.points.push(f.g);
        trace.margins.push(margin);
        t = t_next;
        steps += 1;
    }
    Ok(trace)
}

/// Shrinks `[good, bad]` (margin above / below `threshold`) and returns the
/// endpoint on the escaped side.
fn bisect_escape(margin_at: &impl Fn(f64) -> f64, mut good: f64, mut bad: f64, threshold: f64) -> f64 {
    while (bad - good).abs() > ESCAPE_TOL {
        let mid = 0.5 * (good + bad);
        if mid == good || mid == bad {
            break;
        }
        if margin_at(mid) < threshold {
            bad = mid;
        } else {
            good = mid;
        }
    }
    bad
}

/// Local error bound of [`rk_advance`], relative to the size of the point.
pub const RK_LOCAL_TOL: f64 = 1e-10;
const RK_MAX_DEPTH: u32 = 10;

/// Advances by `h` with step doubling: one step of `h` is compared against two
/// of `h / 2`, and each half is refined again while they differ by more than
/// [`RK_LOCAL_TOL`]. The field blows up at the escape locus, so fixed steps
/// lose accuracy there.
fn rk_advance<M: PoissonDouble>(m: &M, y: &M::G, xi: &[f64], h: f64, depth: u32) -> Result<M::G> {
    let full = rkmk4_step(m, y, xi, h)?;
    let mid = rkmk4_step(m, y, xi, 0.5 * h)?;
    let two = rkmk4_step(m, &mid, xi, 0.5 * h)?;
    let scale = 1.0 + m.g_params(&two).iter().fold(0.0f64, |a, p| a.max(p.abs()));
    if depth >= RK_MAX_DEPTH || m.g_distance(&full, &two) <= RK_LOCAL_TOL * scale {
        return Ok(two);
    }
    let mid = rk_advance(m, y, xi, 0.5 * h, depth + 1)?;
    rk_advance(m, &mid, xi, 0.5 * h, depth + 1)
}

/// One Runge-Kutta-Munthe-Kaas step of order 4 for the right-trivialized
/// field, with `dexp^{-1}` truncated after the `ad^2` term.
fn rkmk4_step<M: PoissonDouble>(m: &M, y: &M::G, xi: &[f64], h: f64) -> Result<M::G> {
    let alg = &m.bialgebra().g;
    let field = |g: &M::G| -> Result<Vec<f64>> { Ok(dressing_field_on_g(m, xi, g)?.coords) };
    let dexpinv = |u: &[f64], f: &[f64]| -> Vec<f64> {
        let uf = alg.bracket_unchecked(u, f);
        let uuf = alg.bracket_unchecked(u, &uf);
        f.iter().zip(&uf).zip(&uuf).map(|((a, b), c)| a - 0.5 * b + c / 12.0).collect()
    };
    let scaled = |v: &[f64], s: f64| -> Vec<f64> { v.iter().map(|a| a * s).collect() };
    let shifted = |u: &[f64]| -> Result<M::G> { Ok(m.g_mul(&m.g_exp(u)?, y)) };

    let k1 = field(y)?;
    let u2 = scaled(&k1, 0.5 * h);
    let k2 = dexpinv(&u2, &field(&shifted(&u2)?)?);
    let u3 = scaled(&k2, 0.5 * h);
    let k3 = dexpinv(&u3, &field(&shifted(&u3)?)?);
    let u4 = scaled(&k3, h);
    let k4 = dexpinv(&u4, &field(&shifted(&u4)?)?);
    let v: Vec<f64> = (0..k1.len()).map(|i| h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect();
    Ok(m.g_renormalize(&m.g_mul(&m.g_exp(&v)?, y)))
}
