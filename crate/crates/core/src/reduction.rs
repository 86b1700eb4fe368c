//! Reduction of the groupoid over `G` by a coisotropic subgroup `H`.
//!
//! `J_H` composes the anchor with `G* -> G*/H^perp`. Its unit level set is
//! `{x : gamma2 in H^perp}`, on which `H` acts by
//! `h(g1, gamma1, gamma2, g2) = (h g1, gamma1, ^h gamma2, h^{gamma2} g2)`.
//! The quotient is a groupoid over `H\G`; classes are stored through a
//! canonical representative chosen by [`ReductionModel::canonical_h`].

use nalgebra::DMatrix;
use rand::Rng;
use serde_json::{json, Value};

use crate::algebra::{is_subalgebra, LieBialgebraData, SubspaceData};
use crate::dressing;
use crate::error::{check_dim, Error, Result};
use crate::fd;
use crate::groupoid::{self, Element};
use crate::groups::{max_diff, FrameTag, PoissonDouble};
use crate::tensors::{self, BivectorMatrix};

/// Tolerance on the `J_H` label for level-set membership.
pub const LEVEL_TOL: f64 = 1e-9;
/// Tolerance on disc points when composing reduced elements.
pub const REDUCED_COMPOSE_TOL: f64 = 1e-8;
/// Subalgebra tolerance used when validating subgroup data.
pub const SUBALGEBRA_TOL: f64 = 1e-12;

/// `h` in `g` and its annihilator `h^perp` in `g*`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoisotropicSubgroupData {
    pub h: SubspaceData,
    pub h_perp: SubspaceData,
    /// `h^perp` is an ideal of `g*`, i.e. `H` is a Poisson subgroup.
    pub is_poisson_subgroup: bool,
    /// Declared by the model: `H^perp` is simply connected.
    pub perp_simply_connected: bool,
}

impl CoisotropicSubgroupData {
    /// Validates coisotropy: `h` and `h^perp` must both be subalgebras.
    pub fn new(b: &LieBialgebraData, h: SubspaceData, perp_simply_connected: bool) -> Result<Self> {
        check_dim(b.dim(), h.parent_dim())?;
        let h_perp = h.annihilator();
        let (ok_h, r_h) = is_subalgebra(&b.g, &h, SUBALGEBRA_TOL)?;
        if !ok_h {
            return Err(Error::Residual { what: "h is not a subalgebra", residual: r_h });
        }
        let (ok_p, r_p) = is_subalgebra(&b.g_star, &h_perp, SUBALGEBRA_TOL)?;
        if !ok_p {
            return Err(Error::Residual { what: "h^perp is not a subalgebra (H not coisotropic)", residual: r_p });
        }
        let is_poisson_subgroup = ideal_defect(&b.g_star, &h_perp) <= SUBALGEBRA_TOL;
        Ok(Self { h, h_perp, is_poisson_subgroup, perp_simply_connected })
    }

    /// Sufficient condition for `(H, H^perp)` to be a matched pair.
    pub fn relatively_complete(&self) -> bool {
        self.is_poisson_subgroup && self.perp_simply_connected
    }
}

/// Distance of `[a, s]` from `s` over basis vectors of the algebra and of `s`.
pub fn ideal_defect(a: &crate::algebra::LieAlgebraData, s: &SubspaceData) -> f64 {
    let n = a.dim();
    let mut worst = 0.0f64;
    for k in 0..n {
        let ek: Vec<f64> = (0..n).map(|j| if j == k { 1.0 } else { 0.0 }).collect();
        for v in s.basis_vectors() {
            worst = worst.max(s.residual(&a.bracket_unchecked(&ek, v)));
        }
    }
    worst
}

/// A double together with a coisotropic subgroup and a chart of `H\G`.
pub trait ReductionModel: PoissonDouble {
    fn subgroup(&self) -> &CoisotropicSubgroupData;

    /// Label of the class of `gamma` in `G*/H^perp`.
    fn coset_label(&self, s: &Self::GStar) -> Vec<f64>;
    fn unit_coset_label(&self) -> Vec<f64>;

    /// Coordinates of `H g` in `H\G`.
    fn quotient_coords(&self, g: &Self::G) -> Vec<f64>;
    fn quotient_dim(&self) -> usize;
    /// A section of `G -> H\G` in the quotient chart.
    fn section(&self, coords: &[f64]) -> Result<Self::G>;
    fn quotient_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64>;

    /// The `h` in `H` moving `g` to the canonical representative `h g`.
    fn canonical_h(&self, g: &Self::G) -> Self::G;

    /// `exp^{-1}` on `H^perp`, in `g*` coordinates.
    fn perp_log(&self, s: &Self::GStar) -> Result<Vec<f64>>;

    /// A random point of `H^perp`.
    fn perp_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::GStar {
        let dim = self.subgroup().h_perp.dim();
        let coeffs: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.5..1.5)).collect();
        self.gstar_exp(&combine(self.subgroup().h_perp.basis_vectors(), &coeffs, self.dim()))
            .expect("exponential of h^perp lies in G*")
    }

    /// `exp(sum_a theta_a h_a)` for the stored basis of `h`.
    fn h_element(&self, theta: &[f64]) -> Result<Self::G> {
        check_dim(self.subgroup().h.dim(), theta.len())?;
        self.g_exp(&combine(self.subgroup().h.basis_vectors(), theta, self.dim()))
    }

    fn h_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::G {
        let theta: Vec<f64> = (0..self.subgroup().h.dim()).map(|_| rng.gen_range(-3.0..3.0)).collect();
        self.h_element(&theta).expect("exponential of h lies in G")
    }

    fn gstar_json(&self, s: &Self::GStar) -> Value {
        named(&self.gstar_param_names(), &self.gstar_params(s))
    }

    fn perp_json(&self, s: &Self::GStar) -> Value {
        self.gstar_json(s)
    }
}

fn combine(basis: &[Vec<f64>], coeffs: &[f64], n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    for (b, c) in basis.iter().zip(coeffs) {
        v.iter_mut().zip(b).for_each(|(vi, bi)| *vi += c * bi);
    }
    v
}

fn named(names: &[String], values: &[f64]) -> Value {
    Value::Object(names.iter().cloned().zip(values.iter().map(|v| json!(v))).collect())
}

/// `J_H(x)`: the label of `gamma2` in `G*/H^perp`.
pub fn j_h<M: ReductionModel>(m: &M, x: &Element<M>) -> Vec<f64> {
    m.coset_label(&x.gamma2)
}

pub fn level_residual<M: ReductionModel>(m: &M, x: &Element<M>) -> f64 {
    max_diff(&j_h(m, x), &m.unit_coset_label())
}

pub fn level_set_contains<M: ReductionModel>(m: &M, x: &Element<M>) -> bool {
    level_residual(m, x) <= LEVEL_TOL
}

fn require_level<M: ReductionModel>(m: &M, x: &Element<M>) -> Result<()> {
    let r = level_residual(m, x);
    if r > LEVEL_TOL {
        return Err(Error::LevelSet { residual: r });
    }
    Ok(())
}

/// Distance of `g` from `H`, measured in the quotient chart.
pub fn subgroup_residual<M: ReductionModel>(m: &M, g: &M::G) -> f64 {
    max_diff(&m.quotient_coords(g), &m.quotient_coords(&m.g_identity()))
}

/// `h(g1, gamma1, gamma2, g2) = (h g1, gamma1, ^h gamma2, h^{gamma2} g2)`.
pub fn h_act<M: ReductionModel>(m: &M, h: &M::G, x: &Element<M>) -> Result<Element<M>> {
    let r = subgroup_residual(m, h);
    if r > LEVEL_TOL {
        return Err(Error::Membership { what: "element of H", residual: r });
    }
    require_level(m, x)?;
    let (s, hs) = dressing::dress(m, h, &x.gamma2)?;
    let y = groupoid::from_parts(m, m.g_mul(h, &x.g1), x.gamma1.clone(), s, m.g_mul(&hs, &x.g2))?;
    require_level(m, &y)?;
    Ok(y)
}

/// A class of the reduced groupoid, stored through its canonical representative.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedElement<G, S> {
    pub rep: groupoid::GroupoidElement<G, S>,
    pub disc_point: Vec<f64>,
}

pub type Reduced<M> = ReducedElement<<M as PoissonDouble>::G, <M as PoissonDouble>::GStar>;

/// Canonical representative of the `H`-orbit of a level-set point.
pub fn canonicalize<M: ReductionModel>(m: &M, x: &Element<M>) -> Result<Reduced<M>> {
    let h = m.canonical_h(&x.g1);
    let rep = h_act(m, &h, x)?;
    let disc_point = m.quotient_coords(&rep.g1);
    Ok(ReducedElement { rep, disc_point })
}

pub fn reduced_source<M: ReductionModel>(_m: &M, a: &Reduced<M>) -> Vec<f64> {
    a.disc_point.clone()
}

pub fn reduced_target<M: ReductionModel>(m: &M, a: &Reduced<M>) -> Vec<f64> {
    m.quotient_coords(&a.rep.g2)
}

pub fn reduced_unit<M: ReductionModel>(m: &M, z: &[f64]) -> Result<Reduced<M>> {
    canonicalize(m, &groupoid::unit_g(m, &m.section(z)?))
}

pub fn reduced_inverse<M: ReductionModel>(m: &M, a: &Reduced<M>) -> Result<Reduced<M>> {
    canonicalize(m, &groupoid::inverse_g(m, &a.rep))
}

/// Product of two classes given by arbitrary level-set representatives.
///
/// `b` is shifted by `h = c(g2(a))^{-1} c(g1(b))`, where `c` is the canonical
/// map, so that `h g1(b) = g2(a)`; the shifted pair composes in `Omega`.
pub fn reduced_mult_reps<M: ReductionModel>(m: &M, a: &Element<M>, b: &Element<M>) -> Result<Reduced<M>> {
    let gap = max_diff(&m.quotient_coords(&a.g2), &m.quotient_coords(&b.g1));
    if gap > REDUCED_COMPOSE_TOL {
        return Err(Error::NotComposable { residual: gap });
    }
    let h = m.g_mul(&m.g_inv(&m.canonical_h(&a.g2)), &m.canonical_h(&b.g1));
    let shifted = h_act(m, &h, b)?;
    let product = groupoid::mult_g_with_tol(m, a, &shifted, REDUCED_COMPOSE_TOL)?;
    canonicalize(m, &product)
}

pub fn reduced_mult<M: ReductionModel>(m: &M, a: &Reduced<M>, b: &Reduced<M>) -> Result<Reduced<M>> {
    reduced_mult_reps(m, &a.rep, &b.rep)
}

pub fn reduced_distance<M: ReductionModel>(m: &M, a: &Reduced<M>, b: &Reduced<M>) -> f64 {
    groupoid::element_distance(m, &a.rep, &b.rep).max(max_diff(&a.disc_point, &b.disc_point))
}

/// Jacobian of the quotient map at `g`, right-trivialized on `G`.
pub fn quotient_jacobian<M: ReductionModel>(m: &M, g: &M::G, h: f64) -> Result<DMatrix<f64>> {
    let n = m.dim();
    fd::jacobian(
        n,
        |a, t| {
            let mut x = vec![0.0; n];
            x[a] = t;
            Ok(m.quotient_coords(&m.g_mul(&m.g_exp(&x)?, g)))
        },
        h,
    )
}

/// Pushforward of `pi_G` at `g` through the quotient map.
pub fn coinduced_bivector_at<M: ReductionModel>(m: &M, g: &M::G, h: f64) -> Result<BivectorMatrix> {
    let jac = quotient_jacobian(m, g, h)?;
    let z = m.quotient_coords(g);
    tensors::pushforward(&jac, &tensors::pi_g(m, g)?, FrameTag::Coordinates, format!("{z:?}"))
}

/// The coinduced bivector of `H\G` at `z`, pushed from the section.
pub fn disc_bivector<M: ReductionModel>(m: &M, z: &[f64], h: f64) -> Result<BivectorMatrix> {
    coinduced_bivector_at(m, &m.section(z)?, h)
}

/// Reduced source and target against the coinduced bivector, at a
/// level-set point: `max(|Ja P Ja^T - pi(z1)|, |Jb P Jb^T + pi(z2)|)`.
pub fn reduced_poisson_defect<M: ReductionModel>(m: &M, x: &Element<M>, h: f64) -> Result<f64> {
    require_level(m, x)?;
    let p = groupoid::pi_plus_at(m, x)?;
    let ja = groupoid::jacobian_along_omega(m, x, h, |y| Ok(m.quotient_coords(&y.g1)))?;
    let jb = groupoid::jacobian_along_omega(m, x, h, |y| Ok(m.quotient_coords(&y.g2)))?;
    let qa = disc_bivector(m, &m.quotient_coords(&x.g1), h)?;
    let qb = disc_bivector(m, &m.quotient_coords(&x.g2), h)?;
    Ok(tensors::pushforward_defect(&ja, &p, &qa, 1.0)?.max(tensors::pushforward_defect(&jb, &p, &qb, -1.0)?))
}

/// Combined residual of the conormal computation at a point `x`:
///
/// * distance of `J_H(x)` from the unit label;
/// * for each basis `X` of `h`, the derivative of `J_H` along
///   `pi_+^sharp([T J]^* X)`, which vanishes when the level set is coisotropic;
/// * the gap between `-pi_+^sharp([T J]^* X)` and the finite-difference
///   fundamental field of the `H`-action.
pub fn coisotropy_defect<M: ReductionModel>(m: &M, x: &Element<M>, h: f64) -> Result<f64> {
    let mut worst = level_residual(m, x);
    let p = groupoid::pi_plus_at(m, x)?;
    let jac = groupoid::anchor_jacobian(m, x, h)?;
    let label = groupoid::jacobian_along_omega(m, x, h, |y| Ok(m.coset_label(&y.gamma2)))?;
    let hdim = m.subgroup().h.dim();
    for a in 0..hdim {
        let xa = &m.subgroup().h.basis_vectors()[a];
        let omega = jac.transpose() * DMatrix::from_column_slice(xa.len(), 1, xa);
        let v = &p.mat * omega;
        worst = worst.max((&label * &v).amax());
        // the action moves g1 only, so only the level of x is needed here
        let sigma = fd::central(
            |t| {
                let mut theta = vec![0.0; hdim];
                theta[a] = t;
                let g1 = m.g_mul(&m.h_element(&theta)?, &x.g1);
                let y = groupoid::GroupoidElement { g1, ..x.clone() };
                Ok(groupoid::mixed_coords(m, x, &y))
            },
            h,
        )?;
        worst = worst.max(sigma.iter().zip(v.iter()).fold(0.0f64, |acc, (s, w)| acc.max((s + w).abs())));
    }
    Ok(worst)
}

/// The covector assigned to a reduced class over `z`, in the left
/// trivialization at the section point `g(z)`:
/// `Ad*_{g(z)^{-1}} exp^{-1}(^{g(z)} gamma1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CotangentPoint {
    pub z: Vec<f64>,
    /// `g*` coordinates of the left-trivialized covector.
    pub covector: Vec<f64>,
    /// Pairing with the coordinate tangent vectors of the chart.
    pub coords: Vec<f64>,
}

pub fn cotangent_chart<M: ReductionModel>(m: &M, a: &Reduced<M>, h: f64) -> Result<CotangentPoint> {
    cotangent_chart_with_section(m, a, h, |z| m.section(z))
}

/// [`cotangent_chart`] with an arbitrary section of `G -> H\G`.
pub fn cotangent_chart_with_section<M: ReductionModel>(
    m: &M,
    a: &Reduced<M>,
    h: f64,
    section: impl Fn(&[f64]) -> Result<M::G>,
) -> Result<CotangentPoint> {
    let z = a.disc_point.clone();
    let gz = section(&z)?;
    // gamma1 is unchanged by the H-action, and ^{g(z)} gamma1 lies in H^perp
    // because g(z) is in the orbit of g1
    let sigma = dressing::dress_left(m, &gz, &a.rep.gamma1)?;
    let r = max_diff(&m.coset_label(&sigma), &m.unit_coset_label());
    if r > LEVEL_TOL {
        return Err(Error::LevelSet { residual: r });
    }
    let xi = m.perp_log(&sigma)?;
    // <Ad*_{g^{-1}} xi, Y> = <xi, Ad_g Y>
    let ad = tensors::ad_on_g(m, &m.embed_g(&gz))?;
    let covector: Vec<f64> = (ad.transpose() * DMatrix::from_column_slice(xi.len(), 1, &xi)).iter().copied().collect();
    let q = m.quotient_dim();
    let mut coords = Vec::with_capacity(q);
    for k in 0..q {
        let w = fd::central(
            |t| {
                let mut zt = z.clone();
                zt[k] += t;
                Ok(fd::g_left(m, &gz, &section(&zt)?))
            },
            h,
        )?;
        coords.push(crate::algebra::dot(&covector, &w));
    }
    Ok(CotangentPoint { z, covector, coords })
}

/// `|s_H(Ad*_h xi) - ^h s_H(xi)|` for `xi` in `h^perp` and `h` in `H`.
pub fn intertwining_defect<M: ReductionModel>(m: &M, h: &M::G, xi: &[f64]) -> Result<f64> {
    let ad = tensors::ad_on_g(m, &m.embed_g(&m.g_inv(h)))?;
    let coad: Vec<f64> = (ad.transpose() * DMatrix::from_column_slice(xi.len(), 1, xi)).iter().copied().collect();
    let lhs = m.gstar_exp(&coad)?;
    let rhs = dressing::dress_left(m, h, &m.gstar_exp(xi)?)?;
    Ok(m.gstar_distance(&lhs, &rhs))
}

/// JSON view of a reduced element.
pub fn reduced_to_json<M: ReductionModel>(m: &M, a: &Reduced<M>) -> Value {
    json!({
        "z": a.disc_point,
        "gamma1": m.gstar_json(&a.rep.gamma1),
        "gamma2": m.perp_json(&a.rep.gamma2),
        "residuals": {
            "omega": groupoid::omega_residual(m, &a.rep),
            "level": level_residual(m, &a.rep),
        },
    })
}

/// A level-set point with prescribed `g1` and `gamma2 = lambda` in `H^perp`.
pub fn level_point<M: ReductionModel>(m: &M, g1: &M::G, lambda: &M::GStar) -> Result<Element<M>> {
    groupoid::make_from_g1_gamma2(m, g1, lambda)
}
