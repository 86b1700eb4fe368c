//! The manifold `Omega = {(g1, gamma1, gamma2, g2) : g1 gamma1 = gamma2 g2}`,
//! its two groupoid structures over `G` and over `G*`, the action of the
//! second on the first, and pointwise checks of the Poisson properties of
//! the structure maps.
//!
//! Tangent vectors at `x` are written in the mixed frame at `d = g1 gamma1`:
//! `v = l_{g1^{-1}} r_{gamma1^{-1}} d'`, a vector of the double.

use nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::algebra::DoubleVector;
use crate::error::{Error, Result};
use crate::fd;
use crate::groups::{FactorOrder, PoissonDouble};
use crate::tensors::{self, BivectorMatrix};

/// Relative tolerance of the defining relation of `Omega`.
pub const OMEGA_TOL: f64 = 1e-10;
/// Parameter tolerance for composability and anchor matching.
pub const COMPOSE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct GroupoidElement<G, S> {
    pub g1: G,
    pub gamma1: S,
    pub gamma2: S,
    pub g2: G,
}

pub type Element<M> = GroupoidElement<<M as PoissonDouble>::G, <M as PoissonDouble>::GStar>;

/// Gap between `g1 gamma1` and `gamma2 g2`, relative to their size.
pub fn omega_residual<M: PoissonDouble>(m: &M, x: &Element<M>) -> f64 {
    let lhs = m.d_mul(&m.embed_g(&x.g1), &m.embed_gstar(&x.gamma1));
    let rhs = m.d_mul(&m.embed_gstar(&x.gamma2), &m.embed_g(&x.g2));
    let scale = 1.0 + m.d_coords(&lhs).max_abs().max(m.d_coords(&rhs).max_abs());
    m.d_distance(&lhs, &rhs) / scale
}

/// Builds an element from all four components, checking the relation.
pub fn from_parts<M: PoissonDouble>(m: &M, g1: M::G, gamma1: M::GStar, gamma2: M::GStar, g2: M::G) -> Result<Element<M>> {
    let x = GroupoidElement { g1, gamma1, gamma2, g2 };
    let r = omega_residual(m, &x);
    if r > OMEGA_TOL {
        return Err(Error::Membership { what: "Omega element", residual: r });
    }
    Ok(x)
}

/// The element over `(g1, gamma1)`: `(gamma2, g2)` refactorize `g1 gamma1`.
pub fn make<M: PoissonDouble>(m: &M, g1: &M::G, gamma1: &M::GStar) -> Result<Element<M>> {
    let f = m.factorize(&m.d_mul(&m.embed_g(g1), &m.embed_gstar(gamma1)), FactorOrder::GstarG)?;
    from_parts(m, g1.clone(), gamma1.clone(), f.gamma, f.g)
}

/// The element with prescribed `(gamma2, g2)`.
pub fn make_from_right<M: PoissonDouble>(m: &M, gamma2: &M::GStar, g2: &M::G) -> Result<Element<M>> {
    let f = m.factorize(&m.d_mul(&m.embed_gstar(gamma2), &m.embed_g(g2)), FactorOrder::GGstar)?;
    from_parts(m, f.g, f.gamma, gamma2.clone(), g2.clone())
}

/// The element with prescribed `(g1, gamma2)`, from
/// `gamma2^{-1} g1 = g2 gamma1^{-1}`.
pub fn make_from_g1_gamma2<M: PoissonDouble>(m: &M, g1: &M::G, gamma2: &M::GStar) -> Result<Element<M>> {
    let d = m.d_mul(&m.embed_gstar(&m.gstar_inv(gamma2)), &m.embed_g(g1));
    let f = m.factorize(&d, FactorOrder::GGstar)?;
    from_parts(m, g1.clone(), m.gstar_inv(&f.gamma), gamma2.clone(), f.g)
}

/// Max parameter gap between two elements.
pub fn element_distance<M: PoissonDouble>(m: &M, a: &Element<M>, b: &Element<M>) -> f64 {
    m.g_distance(&a.g1, &b.g1)
        .max(m.gstar_distance(&a.gamma1, &b.gamma1))
        .max(m.gstar_distance(&a.gamma2, &b.gamma2))
        .max(m.g_distance(&a.g2, &b.g2))
}

fn g_gap<M: PoissonDouble>(m: &M, a: &M::G, b: &M::G) -> f64 {
    m.g_distance(&m.g_renormalize(a), &m.g_renormalize(b))
}

// groupoid over G

pub fn source_g<M: PoissonDouble>(_m: &M, x: &Element<M>) -> M::G {
    x.g1.clone()
}

pub fn target_g<M: PoissonDouble>(_m: &M, x: &Element<M>) -> M::G {
    x.g2.clone()
}

pub fn unit_g<M: PoissonDouble>(m: &M, g: &M::G) -> Element<M> {
    GroupoidElement { g1: g.clone(), gamma1: m.gstar_identity(), gamma2: m.gstar_identity(), g2: g.clone() }
}

pub fn inverse_g<M: PoissonDouble>(m: &M, x: &Element<M>) -> Element<M> {
    GroupoidElement {
        g1: x.g2.clone(),
        gamma1: m.gstar_inv(&x.gamma1),
        gamma2: m.gstar_inv(&x.gamma2),
        g2: x.g1.clone(),
    }
}

/// `(g1, gamma1, gamma2, g2)(g2, lambda1, lambda2, k2) =
/// (g1, gamma1 lambda1, gamma2 lambda2, k2)`.
pub fn mult_g<M: PoissonDouble>(m: &M, x: &Element<M>, y: &Element<M>) -> Result<Element<M>> {
    mult_g_with_tol(m, x, y, COMPOSE_TOL)
}

pub fn mult_g_with_tol<M: PoissonDouble>(m: &M, x: &Element<M>, y: &Element<M>, tol: f64) -> Result<Element<M>> {
    let gap = g_gap(m, &x.g2, &y.g1);
    if gap > tol {
        return Err(Error::NotComposable { residual: gap });
    }
    Ok(GroupoidElement {
        g1: x.g1.clone(),
        gamma1: m.gstar_mul(&x.gamma1, &y.gamma1),
        gamma2: m.gstar_mul(&x.gamma2, &y.gamma2),
        g2: y.g2.clone(),
    })
}

// groupoid over G*

pub fn source_gstar<M: PoissonDouble>(_m: &M, x: &Element<M>) -> M::GStar {
    x.gamma2.clone()
}

pub fn target_gstar<M: PoissonDouble>(_m: &M, x: &Element<M>) -> M::GStar {
    x.gamma1.clone()
}

pub fn unit_gstar<M: PoissonDouble>(m: &M, s: &M::GStar) -> Element<M> {
    GroupoidElement { g1: m.g_identity(), gamma1: s.clone(), gamma2: s.clone(), g2: m.g_identity() }
}

pub fn inverse_gstar<M: PoissonDouble>(m: &M, x: &Element<M>) -> Element<M> {
    GroupoidElement {
        g1: m.g_inv(&x.g1),
        gamma1: x.gamma2.clone(),
        gamma2: x.gamma1.clone(),
        g2: m.g_inv(&x.g2),
    }
}

/// `(g1, gamma1, gamma2, g2)(k1, lambda1, gamma1, k2) =
/// (g1 k1, lambda1, gamma2, g2 k2)`.
pub fn mult_gstar<M: PoissonDouble>(m: &M, x: &Element<M>, y: &Element<M>) -> Result<Element<M>> {
    let gap = m.gstar_distance(&x.gamma1, &y.gamma2);
    if gap > COMPOSE_TOL {
        return Err(Error::NotComposable { residual: gap });
    }
    Ok(GroupoidElement {
        g1: m.g_mul(&x.g1, &y.g1),
        gamma1: y.gamma1.clone(),
        gamma2: x.gamma2.clone(),
        g2: m.g_mul(&x.g2, &y.g2),
    })
}

/// The anchor `J(x) = gamma2`.
pub fn anchor<M: PoissonDouble>(_m: &M, x: &Element<M>) -> M::GStar {
    x.gamma2.clone()
}

/// Action of `x` in the groupoid over `G*` on `y` in the groupoid over `G`,
/// defined when `J(y) = beta_{G*}(x)`:
/// `(k1, l1, l2, k2)(g1, gamma1, l1, g2) = (k1 g1, gamma1, l2, k2 g2)`.
pub fn act<M: PoissonDouble>(m: &M, x: &Element<M>, y: &Element<M>) -> Result<Element<M>> {
    let gap = m.gstar_distance(&y.gamma2, &x.gamma1);
    if gap > COMPOSE_TOL {
        return Err(Error::AnchorMismatch { residual: gap });
    }
    Ok(GroupoidElement {
        g1: m.g_mul(&x.g1, &y.g1),
        gamma1: y.gamma1.clone(),
        gamma2: x.gamma2.clone(),
        g2: m.g_mul(&x.g2, &y.g2),
    })
}

/// The point of `Omega` over `g1 exp(t u) gamma1`, refactorized in both orders.
pub fn omega_curve<M: PoissonDouble>(m: &M, x: &Element<M>, u: &DoubleVector, t: f64) -> Result<Element<M>> {
    let d = m.d_mul(&m.d_mul(&m.embed_g(&x.g1), &m.d_exp(&u.scale(t))), &m.embed_gstar(&x.gamma1));
    let left = m.factorize(&d, FactorOrder::GGstar)?;
    let right = m.factorize(&d, FactorOrder::GstarG)?;
    Ok(GroupoidElement { g1: left.g, gamma1: left.gamma, gamma2: right.gamma, g2: right.g })
}

/// Mixed-frame coordinates of `y` relative to the base `x`:
/// `coords(g1(x)^{-1} g1(y) gamma1(y) gamma1(x)^{-1})`.
pub fn mixed_coords<M: PoissonDouble>(m: &M, x: &Element<M>, y: &Element<M>) -> Vec<f64> {
    let d = m.d_mul(&m.embed_g(&y.g1), &m.embed_gstar(&y.gamma1));
    let d = m.d_mul(&m.d_inv(&m.embed_g(&x.g1)), &d);
    let d = m.d_mul(&d, &m.d_inv(&m.embed_gstar(&x.gamma1)));
    m.d_coords(&d).coords()
}

/// Finite-difference Jacobian at `x` of `f` along the mixed-frame basis curves.
pub fn jacobian_along_omega<M: PoissonDouble>(
    m: &M,
    x: &Element<M>,
    h: f64,
    f: impl Fn(&Element<M>) -> Result<Vec<f64>>,
) -> Result<DMatrix<f64>> {
    let n = m.dim();
    fd::jacobian(2 * n, |a, t| f(&omega_curve(m, x, &DoubleVector::basis(n, a), t)?), h)
}

/// Jacobian of `J` at `x`, right-trivialized on `G*`.
pub fn anchor_jacobian<M: PoissonDouble>(m: &M, x: &Element<M>, h: f64) -> Result<DMatrix<f64>> {
    jacobian_along_omega(m, x, h, |y| Ok(fd::gstar_right(m, &x.gamma2, &y.gamma2)))
}

/// `pi_+` at `x`.
pub fn pi_plus_at<M: PoissonDouble>(m: &M, x: &Element<M>) -> Result<BivectorMatrix> {
    tensors::pi_plus(m, &x.g1, &x.gamma1)
}

/// Source of the groupoid over `G` is Poisson (left-trivialized on `G`).
pub fn source_poisson_defect<M: PoissonDouble>(m: &M, x: &Element<M>, h: f64) -> Result<f64> {
    let jac = jacobian_along_omega(m, x, h, |y| Ok(fd::g_left(m, &x.g1, &y.g1)))?;
    tensors::pushforward_defect(&jac, &pi_plus_at(m, x)?, &tensors::pi_g_left(m, &x.g1)?, 1.0)
}

/// Target of the groupoid over `G` is anti-Poisson (right-trivialized on `G`).
pub fn target_anti_poisson_defect<M: PoissonDouble>(m: &M, x: &Element<M>, h: f64) -> Result<f64> {
    let jac = jacobian_along_omega(m, x, h, |y| Ok(fd::g_right(m, &x.g2, &y.g2)))?;
    tensors::pushforward_defect(&jac, &pi_plus_at(m, x)?, &tensors::pi_g(m, &x.g2)?, -1.0)
}

/// The anchor `J` is anti-Poisson (right-trivialized on `G*`).
pub fn anchor_anti_poisson_defect<M: PoissonDouble>(m: &M, x: &Element<M>, h: f64) -> Result<f64> {
    let jac = anchor_jacobian(m, x, h)?;
    tensors::pushforward_defect(&jac, &pi_plus_at(m, x)?, &tensors::pi_gstar(m, &x.gamma2)?, -1.0)
}

/// Fundamental field of left multiplication `x -> make(exp(tX) g1, gamma1)`,
/// by finite differences in the mixed frame.
pub fn fundamental_field_fd<M: PoissonDouble>(m: &M, x: &Element<M>, xv: &[f64], h: f64) -> Result<Vec<f64>> {
    fd::central(
        |t| {
            let tx: Vec<f64> = xv.iter().map(|a| a * t).collect();
            let y = make(m, &m.g_mul(&m.g_exp(&tx)?, &x.g1), &x.gamma1)?;
            Ok(mixed_coords(m, x, &y))
        },
        h,
    )
}

/// `|sigma_X + pi_+^sharp [T J]^* X^r|` with `sigma_X` by finite differences.
pub fn momentum_identity_defect<M: PoissonDouble>(m: &M, x: &Element<M>, xv: &[f64], h: f64) -> Result<f64> {
    let sigma = fundamental_field_fd(m, x, xv, h)?;
    let jac = anchor_jacobian(m, x, h)?;
    let p = pi_plus_at(m, x)?;
    let omega = jac.transpose() * DMatrix::from_column_slice(xv.len(), 1, xv);
    let v = &p.mat * omega;
    Ok(sigma.iter().zip(v.iter()).fold(0.0f64, |a, (s, w)| a.max((s + w).abs())))
}

/// JSON view: every parameter list plus the `Omega` residual.
pub fn to_json<M: PoissonDouble>(m: &M, x: &Element<M>) -> Value {
    json!({
        "g1": m.g_params(&x.g1),
        "gamma1": m.gstar_params(&x.gamma1),
        "gamma2": m.gstar_params(&x.gamma2),
        "g2": m.g_params(&x.g2),
        "omega_residual": omega_residual(m, x),
    })
}
