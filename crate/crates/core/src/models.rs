//! Registered doubles.
//!
//! * [`Su11Model`]: `SU(1,1)` and `SB(2,C)` inside `SL(2,C)`, with the
//!   diagonal `U(1)` as coisotropic subgroup; the quotient is the Poisson disc.
//! * [`TrivialModel`]: `R^n` with the zero Poisson structure, dual `R^n`,
//!   double `R^n x R^n` abelian. Reduction by the first `k` coordinates gives
//!   the cotangent bundle of `R^(n-k)`.
//!
//! Structure constants are always read off the explicit matrices.

use rand::Rng;
use serde_json::{json, Value};

use crate::algebra::{DoubleVector, LieAlgebraData, LieBialgebraData, SubspaceData};
use crate::error::{check_dim, Error, Result};
use crate::groups::{
    coords_of, expand, realize, sb2_basis, su11_basis, DoublePoint, DualGroupPoint, FactorOrder, Factorization,
    GroupPoint, Mat2, PoissonDouble, C64,
};
use crate::reduction::{CoisotropicSubgroupData, ReductionModel, LEVEL_TOL};

/// Largest algebra defect accepted at registration.
pub const REGISTRATION_TOL: f64 = 1e-12;
/// Reconstruction tolerance of a factorization, relative to the entries.
pub const FACTORIZATION_TOL: f64 = 1e-10;

pub const MODEL_NAMES: [&str; 2] = ["su11", "trivial"];

#[derive(Clone, Debug)]
pub struct Su11Model {
    bialgebra: LieBialgebraData,
    subgroup: CoisotropicSubgroupData,
}

fn labels(prefix: &str) -> Vec<String> {
    (0..3).map(|i| format!("{prefix}{i}")).collect()
}

/// Largest deviation of `<e_i, f^j>` from `delta_ij` and of the pairing from
/// vanishing on each half.
pub fn su11_duality_defect() -> f64 {
    let e = su11_basis();
    let f = sb2_basis();
    let mut worst = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            let delta = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((e[i].im_trace_pairing(&f[j]) - delta).abs());
            worst = worst.max(e[i].im_trace_pairing(&e[j]).abs());
            worst = worst.max(f[i].im_trace_pairing(&f[j]).abs());
        }
    }
    worst
}

/// Structure constants of a basis read off its matrix commutators; `on_g`
/// selects which half of the double the brackets must land in.
fn constants_from(basis: &[Mat2; 3], on_g: bool, prefix: &str) -> Result<LieAlgebraData> {
    let mut c = vec![0.0; 27];
    for i in 0..3 {
        for j in 0..3 {
            let (u, residual) = expand(&basis[i].commutator(&basis[j]));
            let (inside, outside) = if on_g { (&u.x, &u.xi) } else { (&u.xi, &u.x) };
            let leak = outside.iter().fold(residual, |a, v| a.max(v.abs()));
            if leak > REGISTRATION_TOL {
                return Err(Error::Residual { what: "bracket leaves its subalgebra", residual: leak });
            }
            for k in 0..3 {
                c[9 * i + 3 * j + k] = inside[k];
            }
        }
    }
    LieAlgebraData::new(labels(prefix), c)
}

/// Builds the `SU(1,1)` double and validates it.
pub fn build_su11() -> Result<Su11Model> {
    let d = su11_duality_defect();
    if d > REGISTRATION_TOL {
        return Err(Error::Residual { what: "duality of the su(1,1) and sb(2,C) bases", residual: d });
    }
    let g = constants_from(&su11_basis(), true, "e")?;
    let g_star = constants_from(&sb2_basis(), false, "f")?;
    let bialgebra = LieBialgebraData::new(g, g_star)?;
    check_registration(&bialgebra)?;
    let h = SubspaceData::coordinate(3, &[0])?;
    // H^perp = {A = 1} is a copy of C
    let subgroup = CoisotropicSubgroupData::new(&bialgebra, h, true)?;
    Ok(Su11Model { bialgebra, subgroup })
}

fn check_registration(b: &LieBialgebraData) -> Result<()> {
    let checks = [
        ("Jacobi identity of g", b.g.jacobi_defect()),
        ("Jacobi identity of g*", b.g_star.jacobi_defect()),
        ("cocycle condition", b.cocycle_defect()),
        ("invariance of the pairing", b.pairing_invariance_defect()),
    ];
    for (what, residual) in checks {
        if residual > REGISTRATION_TOL {
            return Err(Error::Residual { what, residual });
        }
    }
    Ok(())
}

fn uniform_disc<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> C64 {
    let r = radius * rng.gen::<f64>().sqrt();
    C64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
}

impl Su11Model {
    fn reconstruct(&self, f: &Factorization<GroupPoint, DualGroupPoint>) -> Mat2 {
        match f.order {
            FactorOrder::GGstar => f.g.matrix() * f.gamma.matrix(),
            FactorOrder::GstarG => f.gamma.matrix() * f.g.matrix(),
        }
    }
}

impl PoissonDouble for Su11Model {
    type G = GroupPoint;
    type GStar = DualGroupPoint;
    type D = DoublePoint;

    fn name(&self) -> &str {
        "su11"
    }

    fn bialgebra(&self) -> &LieBialgebraData {
        &self.bialgebra
    }

    fn g_identity(&self) -> GroupPoint {
        GroupPoint::IDENTITY
    }

    fn g_mul(&self, a: &GroupPoint, b: &GroupPoint) -> GroupPoint {
        a.mul(b)
    }

    fn g_inv(&self, a: &GroupPoint) -> GroupPoint {
        a.inverse()
    }

    fn g_exp(&self, x: &[f64]) -> Result<GroupPoint> {
        GroupPoint::exp(x)
    }

    fn g_renormalize(&self, g: &GroupPoint) -> GroupPoint {
        g.renormalize()
    }

    fn g_params(&self, g: &GroupPoint) -> Vec<f64> {
        g.params().to_vec()
    }

    fn g_param_names(&self) -> Vec<String> {
        ["re_alpha", "im_alpha", "re_beta", "im_beta"].map(String::from).to_vec()
    }

    /// `|beta| <= 2`, phase of `alpha` uniform.
    fn g_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> GroupPoint {
        let beta = uniform_disc(rng, 2.0);
        let alpha = C64::from_polar((1.0 + beta.norm_sqr()).sqrt(), rng.gen_range(0.0..std::f64::consts::TAU));
        GroupPoint { alpha, beta }
    }

    fn gstar_identity(&self) -> DualGroupPoint {
        DualGroupPoint::IDENTITY
    }

    fn gstar_mul(&self, a: &DualGroupPoint, b: &DualGroupPoint) -> DualGroupPoint {
        a.mul(b)
    }

    fn gstar_inv(&self, a: &DualGroupPoint) -> DualGroupPoint {
        a.inverse()
    }

    fn gstar_exp(&self, xi: &[f64]) -> Result<DualGroupPoint> {
        DualGroupPoint::exp(xi)
    }

    fn gstar_params(&self, s: &DualGroupPoint) -> Vec<f64> {
        s.params().to_vec()
    }

    fn gstar_param_names(&self) -> Vec<String> {
        ["a", "re_n", "im_n"].map(String::from).to_vec()
    }

    /// `A` log-uniform in `[1/2, 2]`, `|N| <= 2`.
    fn gstar_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DualGroupPoint {
        let ln2 = std::f64::consts::LN_2;
        DualGroupPoint { a: rng.gen_range(-ln2..ln2).exp(), n: uniform_disc(rng, 2.0) }
    }

    fn embed_g(&self, g: &GroupPoint) -> DoublePoint {
        g.embed()
    }

    fn embed_gstar(&self, s: &DualGroupPoint) -> DoublePoint {
        s.embed()
    }

    fn d_mul(&self, a: &DoublePoint, b: &DoublePoint) -> DoublePoint {
        a.mul(b)
    }

    fn d_inv(&self, a: &DoublePoint) -> DoublePoint {
        a.inverse()
    }

    fn d_exp(&self, u: &DoubleVector) -> DoublePoint {
        DoublePoint { m: realize(u).exp() }
    }

    fn d_coords(&self, d: &DoublePoint) -> DoubleVector {
        coords_of(&d.m)
    }

    fn d_distance(&self, a: &DoublePoint, b: &DoublePoint) -> f64 {
        (a.m - b.m).max_abs()
    }

    fn ad(&self, d: &DoublePoint, u: &DoubleVector) -> Result<DoubleVector> {
        check_dim(3, u.half_dim())?;
        d.ad(u)
    }

    fn margin(&self, d: &DoublePoint, order: FactorOrder) -> f64 {
        let m = &d.m;
        match order {
            FactorOrder::GGstar => m.at(0, 0).norm_sqr() - m.at(1, 0).norm_sqr(),
            FactorOrder::GstarG => m.at(1, 1).norm_sqr() - m.at(1, 0).norm_sqr(),
        }
    }

    /// Closed-form factorization. `N` is always recovered from the equation
    /// divided by `alpha` (or its conjugate), which is safe because
    /// `|alpha| >= 1` on `SU(1,1)`.
    fn factorize(&self, d: &DoublePoint, order: FactorOrder) -> Result<Factorization<GroupPoint, DualGroupPoint>> {
        let margin = self.margin(d, order);
        if !(margin > 0.0) {
            return Err(Error::NotFactorizable { margin });
        }
        let m = &d.m;
        let (g, gamma) = match order {
            FactorOrder::GGstar => {
                let a = margin.sqrt();
                let alpha = m.at(0, 0) / a;
                let beta = (m.at(1, 0) / a).conj();
                debug_assert!(alpha.norm() >= 1.0 - 1e-9);
                let n = (m.at(0, 1) - beta / a) / alpha;
                (GroupPoint { alpha, beta }, DualGroupPoint { a, n })
            }
            FactorOrder::GstarG => {
                let a = 1.0 / margin.sqrt();
                let alpha = (m.at(1, 1) * a).conj();
                let beta = (m.at(1, 0) * a).conj();
                debug_assert!(alpha.norm() >= 1.0 - 1e-9);
                let n = (m.at(0, 1) - beta * a) / alpha.conj();
                (GroupPoint { alpha, beta }, DualGroupPoint { a, n })
            }
        };
        let f = Factorization { g, gamma, order, margin };
        let residual = (self.reconstruct(&f) - *m).max_abs();
        if residual > FACTORIZATION_TOL * (1.0 + m.max_abs()) {
            return Err(Error::Residual { what: "factorization reconstruction", residual });
        }
        Ok(f)
    }
}

impl ReductionModel for Su11Model {
    fn subgroup(&self) -> &CoisotropicSubgroupData {
        &self.subgroup
    }

    /// `G*/H^perp` is labelled by `A`.
    fn coset_label(&self, s: &DualGroupPoint) -> Vec<f64> {
        vec![s.a]
    }

    fn unit_coset_label(&self) -> Vec<f64> {
        vec![1.0]
    }

    /// `z = beta / alpha` as `[re, im]`.
    fn quotient_coords(&self, g: &GroupPoint) -> Vec<f64> {
        let z = g.disc_point();
        vec![z.re, z.im]
    }

    fn quotient_dim(&self) -> usize {
        2
    }

    /// `g(z) = (1 - |z|^2)^{-1/2} (1, z)`.
    fn section(&self, coords: &[f64]) -> Result<GroupPoint> {
        check_dim(2, coords.len())?;
        let z = C64::new(coords[0], coords[1]);
        let q = 1.0 - z.norm_sqr();
        if !(q > 0.0) {
            return Err(Error::Domain(format!("disc point {z} is not inside the unit disc")));
        }
        let s = q.sqrt().recip();
        Ok(GroupPoint { alpha: C64::new(s, 0.0), beta: z * s })
    }

    fn quotient_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let z = uniform_disc(rng, 0.8);
        vec![z.re, z.im]
    }

    /// `diag(conj(alpha)/|alpha|, alpha/|alpha|)`, making `alpha` real positive.
    fn canonical_h(&self, g: &GroupPoint) -> GroupPoint {
        GroupPoint { alpha: g.alpha.conj() / g.alpha.norm(), beta: C64::new(0.0, 0.0) }
    }

    /// `exp(a f^1 + b f^2) = (1, -b + i a)`.
    fn perp_log(&self, s: &DualGroupPoint) -> Result<Vec<f64>> {
        if (s.a - 1.0).abs() > LEVEL_TOL {
            return Err(Error::Domain(format!("A = {} is not on H^perp", s.a)));
        }
        Ok(vec![0.0, s.n.im, -s.n.re])
    }

    fn gstar_json(&self, s: &DualGroupPoint) -> Value {
        json!({ "A": s.a, "N": [s.n.re, s.n.im] })
    }

    fn perp_json(&self, s: &DualGroupPoint) -> Value {
        json!({ "N": [s.n.re, s.n.im] })
    }
}

/// `R^n` with the zero Poisson structure, reduced by its first `k` coordinates.
#[derive(Clone, Debug)]
pub struct TrivialModel {
    n: usize,
    k: usize,
    bialgebra: LieBialgebraData,
    subgroup: CoisotropicSubgroupData,
}

/// Dyadic samples in `[-2, 2]`: finite differences with a power-of-two step
/// are then exact.
fn dyadic<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.gen_range(-512i32..=512) as f64 / 256.0
}

pub fn build_trivial(n: usize, k: usize) -> Result<TrivialModel> {
    if n == 0 || k > n {
        return Err(Error::Domain(format!("trivial model needs 1 <= n and k <= n, got n={n}, k={k}")));
    }
    let bialgebra = LieBialgebraData::new(LieAlgebraData::abelian(n, "e"), LieAlgebraData::abelian(n, "f"))?;
    check_registration(&bialgebra)?;
    let axes: Vec<usize> = (0..k).collect();
    let subgroup = CoisotropicSubgroupData::new(&bialgebra, SubspaceData::coordinate(n, &axes)?, true)?;
    Ok(TrivialModel { n, k, bialgebra, subgroup })
}

impl TrivialModel {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

fn vadd(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

impl PoissonDouble for TrivialModel {
    type G = Vec<f64>;
    type GStar = Vec<f64>;
    type D = DoubleVector;

    fn name(&self) -> &str {
        "trivial"
    }

    fn bialgebra(&self) -> &LieBialgebraData {
        &self.bialgebra
    }

    fn g_identity(&self) -> Vec<f64> {
        vec![0.0; self.n]
    }

    fn g_mul(&self, a: &Vec<f64>, b: &Vec<f64>) -> Vec<f64> {
        vadd(a, b)
    }

    fn g_inv(&self, a: &Vec<f64>) -> Vec<f64> {
        a.iter().map(|v| -v).collect()
    }

    fn g_exp(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n, x.len())?;
        Ok(x.to_vec())
    }

    fn g_renormalize(&self, g: &Vec<f64>) -> Vec<f64> {
        g.clone()
    }

    fn g_params(&self, g: &Vec<f64>) -> Vec<f64> {
        g.clone()
    }

    fn g_param_names(&self) -> Vec<String> {
        (0..self.n).map(|i| format!("x{i}")).collect()
    }

    fn g_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.n).map(|_| dyadic(rng)).collect()
    }

    fn gstar_identity(&self) -> Vec<f64> {
        vec![0.0; self.n]
    }

    fn gstar_mul(&self, a: &Vec<f64>, b: &Vec<f64>) -> Vec<f64> {
        vadd(a, b)
    }

    fn gstar_inv(&self, a: &Vec<f64>) -> Vec<f64> {
        a.iter().map(|v| -v).collect()
    }

    fn gstar_exp(&self, xi: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n, xi.len())?;
        Ok(xi.to_vec())
    }

    fn gstar_params(&self, s: &Vec<f64>) -> Vec<f64> {
        s.clone()
    }

    fn gstar_param_names(&self) -> Vec<String> {
        (0..self.n).map(|i| format!("y{i}")).collect()
    }

    fn gstar_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.n).map(|_| dyadic(rng)).collect()
    }

    fn embed_g(&self, g: &Vec<f64>) -> DoubleVector {
        DoubleVector::from_g(g)
    }

    fn embed_gstar(&self, s: &Vec<f64>) -> DoubleVector {
        DoubleVector::from_gstar(s)
    }

    fn d_mul(&self, a: &DoubleVector, b: &DoubleVector) -> DoubleVector {
        a.add(b)
    }

    fn d_inv(&self, a: &DoubleVector) -> DoubleVector {
        DoubleVector::new(self.g_inv(&a.x), self.gstar_inv(&a.xi))
    }

    fn d_exp(&self, u: &DoubleVector) -> DoubleVector {
        u.clone()
    }

    fn d_coords(&self, d: &DoubleVector) -> DoubleVector {
        d.clone()
    }

    fn d_distance(&self, a: &DoubleVector, b: &DoubleVector) -> f64 {
        a.sub(b).max_abs()
    }

    fn ad(&self, _d: &DoubleVector, u: &DoubleVector) -> Result<DoubleVector> {
        check_dim(self.n, u.half_dim())?;
        Ok(u.clone())
    }

    /// Every element factorizes.
    fn margin(&self, _d: &DoubleVector, _order: FactorOrder) -> f64 {
        1.0
    }

    fn factorize(&self, d: &DoubleVector, order: FactorOrder) -> Result<Factorization<Vec<f64>, Vec<f64>>> {
        check_dim(self.n, d.half_dim())?;
        Ok(Factorization { g: d.x.clone(), gamma: d.xi.clone(), order, margin: 1.0 })
    }
}

impl ReductionModel for TrivialModel {
    fn subgroup(&self) -> &CoisotropicSubgroupData {
        &self.subgroup
    }

    fn coset_label(&self, s: &Vec<f64>) -> Vec<f64> {
        s[..self.k].to_vec()
    }

    fn unit_coset_label(&self) -> Vec<f64> {
        vec![0.0; self.k]
    }

    fn quotient_coords(&self, g: &Vec<f64>) -> Vec<f64> {
        g[self.k..].to_vec()
    }

    fn quotient_dim(&self) -> usize {
        self.n - self.k
    }

    fn section(&self, coords: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n - self.k, coords.len())?;
        let mut g = vec![0.0; self.k];
        g.extend_from_slice(coords);
        Ok(g)
    }

    fn quotient_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        (self.k..self.n).map(|_| dyadic(rng)).collect()
    }

    fn canonical_h(&self, g: &Vec<f64>) -> Vec<f64> {
        let mut h = self.g_inv(g);
        h[self.k..].iter_mut().for_each(|v| *v = 0.0);
        h
    }

    fn perp_log(&self, s: &Vec<f64>) -> Result<Vec<f64>> {
        let r = s[..self.k].iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if r > LEVEL_TOL {
            return Err(Error::Domain(format!("point is off H^perp by {r:e}")));
        }
        Ok(s.clone())
    }

    fn perp_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.n).map(|i| if i < self.k { 0.0 } else { dyadic(rng) }).collect()
    }

    fn h_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.n).map(|i| if i < self.k { dyadic(rng) } else { 0.0 }).collect()
    }
}

/// A registered model, selected by name.
#[derive(Clone, Debug)]
pub enum Model {
    Su11(Su11Model),
    Trivial(TrivialModel),
}

/// Looks a model up by name. `trivial` is `R^3` reduced by one coordinate;
/// `trivial:<n>:<k>` picks the dimensions.
pub fn build(name: &str) -> Result<Model> {
    let unknown = || Error::Unknown { kind: "model", name: name.to_string() };
    match name {
        "su11" => Ok(Model::Su11(build_su11()?)),
        "trivial" => Ok(Model::Trivial(build_trivial(3, 1)?)),
        _ => {
            let rest = name.strip_prefix("trivial:").ok_or_else(unknown)?;
            let (n, k) = rest.split_once(':').ok_or_else(unknown)?;
            let n = n.parse().map_err(|_| unknown())?;
            let k = k.parse().map_err(|_| unknown())?;
            Ok(Model::Trivial(build_trivial(n, k)?))
        }
    }
}
