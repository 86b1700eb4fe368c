//! Matrix models of `G`, `G*` and the double `D`, plus the abstract-double
//! interface every model implements.
//!
//! The concrete types cover the `SU(1,1) / SB(2,C) / SL(2,C)` double:
//! [`GroupPoint`] is `[[alpha, beta], [conj(beta), conj(alpha)]]`,
//! [`DualGroupPoint`] is `[[A, N], [0, 1/A]]` and [`DoublePoint`] is any
//! unimodular complex 2x2 matrix. The double Lie algebra `sl(2,C)` carries the
//! pairing `<A, B> = Im Tr(AB)`.

use std::fmt::{self, Debug};
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{DoubleVector, LieBialgebraData};
use crate::error::{Error, Result};

pub type C64 = Complex64;

const I: C64 = C64::new(0.0, 1.0);
const ONE: C64 = C64::new(1.0, 0.0);
const ZERO: C64 = C64::new(0.0, 0.0);

/// Membership tolerance for parametrized group elements.
pub const MEMBERSHIP_TOL: f64 = 1e-10;
/// Residual allowed when re-expanding a matrix in the double basis.
pub const EXPANSION_TOL: f64 = 1e-9;

/// A complex 2x2 matrix, row-major.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Debug for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.0;
        write!(f, "[[{}, {}], [{}, {}]]", m[0][0], m[0][1], m[1][0], m[1][1])
    }
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);
    pub const ZERO: Mat2 = Mat2([[ZERO, ZERO], [ZERO, ZERO]]);

    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.0[i][j]
    }

    pub fn det(&self) -> C64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        if det.norm() < 1e-300 {
            return Err(Error::Domain("singular 2x2 matrix".into()));
        }
        let m = &self.0;
        Ok(Mat2([[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]]).scale(det.inv()))
    }

    /// Inverse of a unimodular matrix (the adjugate).
    pub fn sl_inverse(&self) -> Self {
        let m = &self.0;
        Mat2([[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]])
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    /// `Im Tr(self * other)`.
    pub fn im_trace_pairing(&self, other: &Self) -> f64 {
        (*self * *other).trace().im
    }

    pub fn one_norm(&self) -> f64 {
        let m = &self.0;
        (m[0][0].norm() + m[1][0].norm()).max(m[0][1].norm() + m[1][1].norm())
    }

    /// Matrix exponential by scaling and squaring with a diagonal [6/6] Pade
    /// approximant.
    pub fn exp(&self) -> Self {
        const P: usize = 6;
        let norm = self.one_norm();
        let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
        let a = self.scale(C64::new(0.5f64.powi(squarings), 0.0));
        let mut coeff = 1.0;
        let mut power = Mat2::IDENTITY;
        let mut num = Mat2::IDENTITY;
        let mut den = Mat2::IDENTITY;
        for k in 1..=P {
            coeff *= (P - k + 1) as f64 / (k * (2 * P - k + 1)) as f64;
            power = power * a;
            let term = power.scale(C64::new(coeff, 0.0));
            num = num + term;
            den = if k % 2 == 0 { den + term } else { den - term };
        }
        // den is close to the identity, so the general inverse is safe here
        let mut r = den.inverse().expect("Pade denominator is invertible") * num;
        for _ in 0..squarings {
            r = r * r;
        }
        r
    }

    /// Closed-form exponential of a traceless matrix:
    /// `exp(M) = cosh(s) I + sinh(s)/s M` with `s^2 = -det M`.
    pub fn exp_traceless(&self) -> Self {
        let s2 = -self.det();
        let s = s2.sqrt();
        let (c, sinc) = if s.norm() < 1e-4 {
            (ONE + s2 / 2.0 + s2 * s2 / 24.0, ONE + s2 / 6.0 + s2 * s2 / 120.0)
        } else {
            (s.cosh(), s.sinh() / s)
        };
        Mat2::IDENTITY.scale(c) + self.scale(sinc)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2([
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ])
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2([[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        self + rhs.scale(C64::new(-1.0, 0.0))
    }
}

/// Basis `e_0, e_1, e_2` of `su(1,1)`.
pub fn su11_basis() -> [Mat2; 3] {
    [
        Mat2::new(I, ZERO, ZERO, -I),
        Mat2::new(ZERO, ONE, ONE, ZERO),
        Mat2::new(ZERO, I, -I, ZERO),
    ]
}

/// Basis `f^0, f^1, f^2` of `sb(2,C)`, dual to [`su11_basis`] under `Im Tr`.
pub fn sb2_basis() -> [Mat2; 3] {
    [
        Mat2::new(C64::new(0.5, 0.0), ZERO, ZERO, C64::new(-0.5, 0.0)),
        Mat2::new(ZERO, I, ZERO, ZERO),
        Mat2::new(ZERO, -ONE, ZERO, ZERO),
    ]
}

/// Matrix realization of a double vector in `sl(2,C)`.
pub fn realize(u: &DoubleVector) -> Mat2 {
    let e = su11_basis();
    let f = sb2_basis();
    let mut m = Mat2::ZERO;
    for k in 0..3 {
        m = m + e[k].scale(C64::new(u.x[k], 0.0)) + f[k].scale(C64::new(u.xi[k], 0.0));
    }
    m
}

/// Coordinates of a matrix in the double basis, read off through the pairing:
/// `x_i = <M, f^i>`, `xi_i = <M, e_i>`. Linear in `M`; the identity maps to 0.
pub fn coords_of(m: &Mat2) -> DoubleVector {
    let e = su11_basis();
    let f = sb2_basis();
    DoubleVector {
        x: f.iter().map(|fi| m.im_trace_pairing(fi)).collect(),
        xi: e.iter().map(|ei| m.im_trace_pairing(ei)).collect(),
    }
}

/// Re-expands a matrix of `sl(2,C)` and reports the reconstruction residual.
pub fn expand(m: &Mat2) -> (DoubleVector, f64) {
    let u = coords_of(m);
    let residual = (realize(&u) - *m).max_abs();
    (u, residual)
}

/// A point of `SU(1,1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupPoint {
    pub alpha: C64,
    pub beta: C64,
}

impl GroupPoint {
    pub const IDENTITY: GroupPoint = GroupPoint { alpha: ONE, beta: ZERO };

    pub fn new(alpha: C64, beta: C64) -> Result<Self> {
        let p = Self { alpha, beta };
        let r = p.membership_residual();
        if r > MEMBERSHIP_TOL * (1.0 + alpha.norm_sqr()) {
            return Err(Error::Membership { what: "SU(1,1) point", residual: r });
        }
        Ok(p)
    }

    /// `|alpha|^2 - |beta|^2 - 1`.
    pub fn membership_residual(&self) -> f64 {
        (self.alpha.norm_sqr() - self.beta.norm_sqr() - 1.0).abs()
    }

    /// The diagonal `U(1)` element `diag(e^{i theta}, e^{-i theta})`.
    pub fn rotation(theta: f64) -> Self {
        Self { alpha: C64::from_polar(1.0, theta), beta: ZERO }
    }

    pub fn matrix(&self) -> Mat2 {
        Mat2::new(self.alpha, self.beta, self.beta.conj(), self.alpha.conj())
    }

    pub fn embed(&self) -> DoublePoint {
        DoublePoint { m: self.matrix() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            alpha: self.alpha * other.alpha + self.beta * other.beta.conj(),
            beta: self.alpha * other.beta + self.beta * other.alpha.conj(),
        }
    }

    pub fn inverse(&self) -> Self {
        Self { alpha: self.alpha.conj(), beta: -self.beta }
    }

    /// Rescales so that `|alpha|^2 - |beta|^2 = 1` holds to roundoff.
    pub fn renormalize(&self) -> Self {
        let q = self.alpha.norm_sqr() - self.beta.norm_sqr();
        if q <= 0.0 {
            return *self;
        }
        let s = q.sqrt();
        Self { alpha: self.alpha / s, beta: self.beta / s }
    }

    /// Reads the parameters off a matrix that should lie in `SU(1,1)`.
    pub fn from_matrix(m: &Mat2) -> Result<Self> {
        let p = Self { alpha: m.at(0, 0), beta: m.at(0, 1) };
        let shape = (m.at(1, 0) - p.beta.conj()).norm().max((m.at(1, 1) - p.alpha.conj()).norm());
        let scale = 1.0 + m.max_abs().powi(2);
        let r = shape.max(p.membership_residual());
        if r > MEMBERSHIP_TOL * scale {
            return Err(Error::Membership { what: "SU(1,1) point", residual: r });
        }
        Ok(p)
    }

    /// `exp(sum_i x_i e_i)`.
    pub fn exp(x: &[f64]) -> Result<Self> {
        crate::error::check_dim(3, x.len())?;
        Self::from_matrix(&realize(&DoubleVector::from_g(x)).exp()).map(|g| g.renormalize())
    }

    pub fn params(&self) -> [f64; 4] {
        [self.alpha.re, self.alpha.im, self.beta.re, self.beta.im]
    }

    /// Disc coordinate `beta / alpha` of the coset `U(1) g`.
    pub fn disc_point(&self) -> C64 {
        self.beta / self.alpha
    }
}

/// A point of `SB(2,C)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualGroupPoint {
    pub a: f64,
    pub n: C64,
}

impl DualGroupPoint {
    pub const IDENTITY: DualGroupPoint = DualGroupPoint { a: 1.0, n: ZERO };

    pub fn new(a: f64, n: C64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::Membership { what: "SB(2,C) point", residual: a });
        }
        Ok(Self { a, n })
    }

    pub fn matrix(&self) -> Mat2 {
        Mat2::new(C64::new(self.a, 0.0), self.n, ZERO, C64::new(1.0 / self.a, 0.0))
    }

    pub fn embed(&self) -> DoublePoint {
        DoublePoint { m: self.matrix() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self { a: self.a * other.a, n: other.n * self.a + self.n / other.a }
    }

    pub fn inverse(&self) -> Self {
        Self { a: 1.0 / self.a, n: -self.n }
    }

    pub fn from_matrix(m: &Mat2) -> Result<Self> {
        let a = m.at(0, 0);
        let scale = 1.0 + m.max_abs();
        let r = a.im.abs().max(m.at(1, 0).norm()).max((m.at(1, 1) - a.inv()).norm());
        if !(a.re > 0.0) || r > MEMBERSHIP_TOL * scale {
            return Err(Error::Membership { what: "SB(2,C) point", residual: r });
        }
        Ok(Self { a: a.re, n: m.at(0, 1) })
    }

    /// `exp(sum_i xi_i f^i)`.
    pub fn exp(xi: &[f64]) -> Result<Self> {
        crate::error::check_dim(3, xi.len())?;
        Self::from_matrix(&realize(&DoubleVector::from_gstar(xi)).exp())
    }

    pub fn params(&self) -> [f64; 3] {
        [self.a, self.n.re, self.n.im]
    }
}

/// A point of `SL(2,C)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublePoint {
    pub m: Mat2,
}

impl DoublePoint {
    pub fn new(m: Mat2) -> Result<Self> {
        let r = (m.det() - ONE).norm();
        if r > MEMBERSHIP_TOL * (1.0 + m.max_abs().powi(2)) {
            return Err(Error::Membership { what: "SL(2,C) point", residual: r });
        }
        Ok(Self { m })
    }

    pub fn identity() -> Self {
        Self { m: Mat2::IDENTITY }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self { m: self.m * other.m }
    }

    pub fn inverse(&self) -> Self {
        Self { m: self.m.sl_inverse() }
    }

    /// `Ad_d u = d U d^{-1}`, re-expanded in the double basis.
    pub fn ad(&self, u: &DoubleVector) -> Result<DoubleVector> {
        let conj = self.m * realize(u) * self.m.sl_inverse();
        let (v, residual) = expand(&conj);
        if residual > EXPANSION_TOL * (1.0 + conj.max_abs()) {
            return Err(Error::Residual { what: "re-expansion in the double basis", residual });
        }
        Ok(v)
    }
}

/// Which half of the double a projection keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    G,
    GStar,
}

/// `p_g` or `p_g*`.
pub fn project(u: &DoubleVector, part: Part) -> DoubleVector {
    let n = u.half_dim();
    match part {
        Part::G => DoubleVector::new(u.x.clone(), vec![0.0; n]),
        Part::GStar => DoubleVector::new(vec![0.0; n], u.xi.clone()),
    }
}

/// Order of the factors in a factorization of a double element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FactorOrder {
    /// `d = g * gamma`
    GGstar,
    /// `d = gamma * g`
    GstarG,
}

/// Trivialization in which tangent/cotangent coordinates are expressed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrameTag {
    LeftTrivialized,
    RightTrivialized,
    /// `l_{g^{-1}} r_{gamma^{-1}}` at `d = g gamma`.
    MixedLgRgamma,
    /// Plain chart coordinates (quotient spaces).
    Coordinates,
}

impl fmt::Display for FrameTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FrameTag::LeftTrivialized => "left_trivialized",
            FrameTag::RightTrivialized => "right_trivialized",
            FrameTag::MixedLgRgamma => "mixed_lg_rgamma",
            FrameTag::Coordinates => "coordinates",
        };
        f.write_str(s)
    }
}

/// Coordinates of a (co)tangent vector tagged with their frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameVector {
    pub coords: Vec<f64>,
    pub frame: FrameTag,
}

impl FrameVector {
    pub fn new(coords: Vec<f64>, frame: FrameTag) -> Self {
        Self { coords, frame }
    }

    pub fn require(&self, frame: FrameTag) -> Result<&[f64]> {
        if self.frame != frame {
            return Err(Error::FrameMismatch { expected: frame.to_string(), found: self.frame.to_string() });
        }
        Ok(&self.coords)
    }
}

/// A factorization `d = g gamma` or `d = gamma g`. `margin > 0` measures the
/// distance from the locus where the factorization ceases to exist.
#[derive(Clone, Debug, PartialEq)]
pub struct Factorization<G, S> {
    pub g: G,
    pub gamma: S,
    pub order: FactorOrder,
    pub margin: f64,
}

/// The abstract double: a Poisson-Lie group `G`, its dual `G*`, both
/// embedded in a matrix double `D` whose Lie algebra is `g + g*`.
///
/// Everything downstream (dressing, Poisson tensors, groupoids, reduction)
/// is written against this trait.
pub trait PoissonDouble: Send + Sync {
    type G: Clone + Debug + Send + Sync;
    type GStar: Clone + Debug + Send + Sync;
    type D: Clone + Debug + Send + Sync;

    fn name(&self) -> &str;
    fn bialgebra(&self) -> &LieBialgebraData;
    fn dim(&self) -> usize {
        self.bialgebra().dim()
    }

    fn g_identity(&self) -> Self::G;
    fn g_mul(&self, a: &Self::G, b: &Self::G) -> Self::G;
    fn g_inv(&self, a: &Self::G) -> Self::G;
    fn g_exp(&self, x: &[f64]) -> Result<Self::G>;
    fn g_renormalize(&self, g: &Self::G) -> Self::G;
    fn g_params(&self, g: &Self::G) -> Vec<f64>;
    fn g_param_names(&self) -> Vec<String>;
    fn g_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::G;

    fn gstar_identity(&self) -> Self::GStar;
    fn gstar_mul(&self, a: &Self::GStar, b: &Self::GStar) -> Self::GStar;
    fn gstar_inv(&self, a: &Self::GStar) -> Self::GStar;
    fn gstar_exp(&self, xi: &[f64]) -> Result<Self::GStar>;
    fn gstar_params(&self, s: &Self::GStar) -> Vec<f64>;
    fn gstar_param_names(&self) -> Vec<String>;
    fn gstar_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::GStar;

    fn embed_g(&self, g: &Self::G) -> Self::D;
    fn embed_gstar(&self, s: &Self::GStar) -> Self::D;
    fn d_mul(&self, a: &Self::D, b: &Self::D) -> Self::D;
    fn d_inv(&self, a: &Self::D) -> Self::D;
    fn d_exp(&self, u: &DoubleVector) -> Self::D;
    /// A linear chart of `D` whose differential at the identity is the
    /// coordinate map of `g + g*`. Used for finite differences.
    fn d_coords(&self, d: &Self::D) -> DoubleVector;
    fn d_distance(&self, a: &Self::D, b: &Self::D) -> f64;
    /// Adjoint action of `D` on its Lie algebra.
    fn ad(&self, d: &Self::D, u: &DoubleVector) -> Result<DoubleVector>;
    /// Scalar whose positivity is equivalent to existence of the factorization.
    fn margin(&self, d: &Self::D, order: FactorOrder) -> f64;
    fn factorize(&self, d: &Self::D, order: FactorOrder) -> Result<Factorization<Self::G, Self::GStar>>;

    fn g_distance(&self, a: &Self::G, b: &Self::G) -> f64 {
        max_diff(&self.g_params(a), &self.g_params(b))
    }

    fn gstar_distance(&self, a: &Self::GStar, b: &Self::GStar) -> f64 {
        max_diff(&self.gstar_params(a), &self.gstar_params(b))
    }
}

pub(crate) fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}
