//! Poisson bivectors of `G`, `G*` and the double, evaluated pointwise as
//! matrices in tagged frames, plus defect functionals built on them.
//!
//! Covector coordinates are dual to the tangent coordinates of the frame.
//! On the double the tangent order is `(e_1..e_n, f^1..f^n)`, so a covector
//! is stored as `(xi, X)`: first its `g*` block, then its `g` block.
//!
//! `sharp` follows `<pi^sharp(w), v> = pi(v, w)`, i.e. `pi^sharp(w) = P w`.

use nalgebra::DMatrix;

use crate::algebra::DoubleVector;
use crate::error::{check_dim, Error, Result};
use crate::groups::{FrameTag, FrameVector, PoissonDouble};

/// Antisymmetry tolerance for evaluated bivectors, relative to the size of
/// the terms they are assembled from.
pub const ANTISYMMETRY_TOL: f64 = 1e-12;
/// Allowed gap between the two expansions of `pi_+`, relative to its size.
pub const EXPANSION_AGREEMENT_TOL: f64 = 1e-10;

/// Matrix of a bivector in a declared frame.
#[derive(Clone, Debug, PartialEq)]
pub struct BivectorMatrix {
    pub mat: DMatrix<f64>,
    pub frame: FrameTag,
    pub base_point: String,
}

impl BivectorMatrix {
    pub fn new(mat: DMatrix<f64>, frame: FrameTag, base_point: impl Into<String>) -> Result<Self> {
        let scale = mat.amax();
        Self::with_scale(mat, frame, base_point, scale)
    }

    /// Like [`BivectorMatrix::new`], with the antisymmetry tolerance measured
    /// against `scale`, the magnitude of the products summed into each entry.
    /// Entries that are small differences of large terms carry roundoff of
    /// the size of the terms, not of the result.
    pub fn with_scale(mat: DMatrix<f64>, frame: FrameTag, base_point: impl Into<String>, scale: f64) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::DimensionMismatch { expected: mat.nrows(), found: mat.ncols() });
        }
        let b = Self { mat, frame, base_point: base_point.into() };
        let defect = b.antisymmetry_defect();
        if defect > ANTISYMMETRY_TOL * (1.0 + scale.max(b.max_abs())) {
            return Err(Error::Residual { what: "bivector antisymmetry", residual: defect });
        }
        Ok(b)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn antisymmetry_defect(&self) -> f64 {
        (&self.mat + self.mat.transpose()).amax()
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.amax()
    }

    /// `pi(a, b)`.
    pub fn eval(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        check_dim(self.dim(), a.len())?;
        check_dim(self.dim(), b.len())?;
        let a = DMatrix::from_column_slice(a.len(), 1, a);
        let b = DMatrix::from_column_slice(b.len(), 1, b);
        Ok((a.transpose() * &self.mat * b)[(0, 0)])
    }

    pub fn determinant(&self) -> f64 {
        self.mat.determinant()
    }
}

/// `pi^sharp(w)`; the covector must be in the bivector's frame.
pub fn sharp(b: &BivectorMatrix, covector: &FrameVector) -> Result<FrameVector> {
    let w = covector.require(b.frame)?;
    check_dim(b.dim(), w.len())?;
    let v = &b.mat * DMatrix::from_column_slice(w.len(), 1, w);
    Ok(FrameVector::new(v.iter().copied().collect(), b.frame))
}

/// Columns `Ad_d e_j`, restricted to `g` (valid when `d` normalizes `g`,
/// e.g. `d` in `G`).
pub fn ad_on_g<M: PoissonDouble>(m: &M, d: &M::D) -> Result<DMatrix<f64>> {
    let n = m.dim();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        cols.push(m.ad(d, &DoubleVector::basis(n, j))?.x);
    }
    Ok(DMatrix::from_fn(n, n, |i, j| cols[j][i]))
}

/// Columns `Ad_d f^j`, restricted to `g*`.
pub fn ad_on_gstar<M: PoissonDouble>(m: &M, d: &M::D) -> Result<DMatrix<f64>> {
    let n = m.dim();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        cols.push(m.ad(d, &DoubleVector::basis(n, n + j))?.xi);
    }
    Ok(DMatrix::from_fn(n, n, |i, j| cols[j][i]))
}

/// Full `Ad_d` on the double in the basis `(e, f)`.
pub fn ad_on_double<M: PoissonDouble>(m: &M, d: &M::D) -> Result<DMatrix<f64>> {
    let n = m.dim();
    let mut cols = Vec::with_capacity(2 * n);
    for j in 0..2 * n {
        cols.push(m.ad(d, &DoubleVector::basis(n, j))?.coords());
    }
    Ok(DMatrix::from_fn(2 * n, 2 * n, |i, j| cols[j][i]))
}

/// `pi_G(g)`, right-trivialized:
/// `P_ij = -<p_g Ad_{g^{-1}} f^i, p_g* Ad_{g^{-1}} f^j>`.
pub fn pi_g<M: PoissonDouble>(m: &M, g: &M::G) -> Result<BivectorMatrix> {
    let n = m.dim();
    let d = m.embed_g(&m.g_inv(g));
    let images: Vec<DoubleVector> =
        (0..n).map(|i| m.ad(&d, &DoubleVector::basis(n, n + i))).collect::<Result<_>>()?;
    let mat = DMatrix::from_fn(n, n, |i, j| -crate::algebra::dot(&images[i].x, &images[j].xi));
    let s = images_scale(&images);
    BivectorMatrix::with_scale(mat, FrameTag::RightTrivialized, format!("{:?}", m.g_params(g)), s * s)
}

/// `pi_G(g)` in the left trivialization.
pub fn pi_g_left<M: PoissonDouble>(m: &M, g: &M::G) -> Result<BivectorMatrix> {
    let r = pi_g(m, g)?;
    let a = ad_on_g(m, &m.embed_g(&m.g_inv(g)))?;
    let mat = &a * &r.mat * a.transpose();
    let scale = a.amax().powi(2) * r.mat.amax().max(1.0);
    BivectorMatrix::with_scale(mat, FrameTag::LeftTrivialized, r.base_point, scale)
}

/// `pi_{G*}(gamma)`, right-trivialized:
/// `P_ij = <p_g Ad_{gamma^{-1}} e_i, p_g* Ad_{gamma^{-1}} e_j>`.
pub fn pi_gstar<M: PoissonDouble>(m: &M, s: &M::GStar) -> Result<BivectorMatrix> {
    let n = m.dim();
    let d = m.embed_gstar(&m.gstar_inv(s));
    let images: Vec<DoubleVector> = (0..n).map(|i| m.ad(&d, &DoubleVector::basis(n, i))).collect::<Result<_>>()?;
    let mat = DMatrix::from_fn(n, n, |i, j| crate::algebra::dot(&images[i].x, &images[j].xi));
    let sc = images_scale(&images);
    BivectorMatrix::with_scale(mat, FrameTag::RightTrivialized, format!("{:?}", m.gstar_params(s)), sc * sc)
}

fn images_scale(images: &[DoubleVector]) -> f64 {
    images.iter().fold(0.0f64, |a, v| a.max(v.max_abs()))
}

/// The three evaluations of `pi_+` at `g gamma` in the mixed frame.
#[derive(Clone, Debug)]
pub struct PiPlusExpansions {
    /// `pi_0 + pi_G + pi_G*` block form.
    pub blocks: DMatrix<f64>,
    /// Closed formula in terms of projections and adjoint actions.
    pub closed: DMatrix<f64>,
    /// `(Ad_{g^{-1}} pi_0 Ad^T + Ad_gamma pi_0 Ad^T) / 2`, from the
    /// definition as half the sum of the left- and right-invariant extensions
    /// of the canonical `r`-matrix.
    pub definitional: DMatrix<f64>,
    /// Magnitude of the terms entering the entries, `max |Ad|^4`.
    pub scale: f64,
}

impl PiPlusExpansions {
    /// Largest pairwise gap between the three evaluations.
    pub fn agreement_defect(&self) -> f64 {
        (&self.blocks - &self.closed)
            .amax()
            .max((&self.blocks - &self.definitional).amax())
            .max((&self.closed - &self.definitional).amax())
    }
}

fn canonical_block(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        if i < n && j == i + n {
            -1.0
        } else if i >= n && j + n == i {
            1.0
        } else {
            0.0
        }
    })
}

pub fn pi_plus_expansions<M: PoissonDouble>(m: &M, g: &M::G, s: &M::GStar) -> Result<PiPlusExpansions> {
    let n = m.dim();
    let gbar = m.embed_g(g);
    let ginv = m.embed_g(&m.g_inv(g));
    let sbar = m.embed_gstar(s);
    let sinv = m.embed_gstar(&m.gstar_inv(s));

    let mut blocks = canonical_block(n);
    let pl = pi_g_left(m, g)?;
    let ps = pi_gstar(m, s)?;
    for i in 0..n {
        for j in 0..n {
            blocks[(i, j)] = pl.mat[(i, j)];
            blocks[(n + i, n + j)] = ps.mat[(i, j)];
        }
    }

    // images of the basis covectors under the two correction terms
    let mut t_gstar = Vec::with_capacity(n); // Ad_gamma p_g* Ad_{gamma^{-1}} e_j
    let mut t_g = Vec::with_capacity(n); // Ad_{g^{-1}} p_g Ad_g f^j
    for j in 0..n {
        let a = m.ad(&sinv, &DoubleVector::basis(n, j))?;
        t_gstar.push(m.ad(&sbar, &DoubleVector::from_gstar(&a.xi))?.xi);
        let b = m.ad(&gbar, &DoubleVector::basis(n, n + j))?;
        t_g.push(m.ad(&ginv, &DoubleVector::from_g(&b.x))?.x);
    }
    let val = |a: usize, b: usize| -> f64 {
        // covector a = (xi_1, X_1), b = (xi_2, X_2)
        let (xi1, x1) = if a < n { (Some(a), None) } else { (None, Some(a - n)) };
        let (xi2, x2) = if b < n { (Some(b), None) } else { (None, Some(b - n)) };
        let mut v = 0.0;
        if let Some(i) = x1 {
            if let Some(j) = xi2 {
                v += if i == j { 1.0 } else { 0.0 };
            }
            if let Some(j) = x2 {
                v += t_gstar[j][i];
            }
        }
        if let Some(i) = xi1 {
            if let Some(j) = x2 {
                v -= if i == j { 1.0 } else { 0.0 };
            }
            if let Some(j) = xi2 {
                v -= t_g[j][i];
            }
        }
        v
    };
    let closed = DMatrix::from_fn(2 * n, 2 * n, val);

    let p0 = canonical_block(n);
    let a = ad_on_double(m, &ginv)?;
    let b = ad_on_double(m, &sbar)?;
    let definitional = (&a * &p0 * a.transpose() + &b * &p0 * b.transpose()) * 0.5;
    let scale = a.amax().max(b.amax()).powi(4);

    Ok(PiPlusExpansions { blocks, closed, definitional, scale })
}

/// `pi_+` at `g gamma` in the mixed frame `l_{g^{-1}} r_{gamma^{-1}}`.
///
/// All three expansions are evaluated and must agree; a gap signals a frame
/// inconsistency and is reported as an error.
pub fn pi_plus<M: PoissonDouble>(m: &M, g: &M::G, s: &M::GStar) -> Result<BivectorMatrix> {
    let e = pi_plus_expansions(m, g, s)?;
    let gap = e.agreement_defect();
    if gap > EXPANSION_AGREEMENT_TOL * (1.0 + e.scale) {
        return Err(Error::Residual { what: "pi_+ expansion agreement", residual: gap });
    }
    BivectorMatrix::with_scale(
        e.closed,
        FrameTag::MixedLgRgamma,
        format!("g={:?} gamma={:?}", m.g_params(g), m.gstar_params(s)),
        e.scale,
    )
}

/// `|pi_G(gh) - pi_G(g) - Ad_g pi_G(h) Ad_g^T|`, right-trivialized.
pub fn multiplicativity_defect_g<M: PoissonDouble>(m: &M, g: &M::G, h: &M::G) -> Result<f64> {
    let a = ad_on_g(m, &m.embed_g(g))?;
    let lhs = pi_g(m, &m.g_mul(g, h))?.mat;
    let rhs = pi_g(m, g)?.mat + &a * pi_g(m, h)?.mat * a.transpose();
    Ok((lhs - rhs).amax())
}

/// Mirror of [`multiplicativity_defect_g`] on `G*`.
pub fn multiplicativity_defect_gstar<M: PoissonDouble>(m: &M, s: &M::GStar, t: &M::GStar) -> Result<f64> {
    let a = ad_on_gstar(m, &m.embed_gstar(s))?;
    let lhs = pi_gstar(m, &m.gstar_mul(s, t))?.mat;
    let rhs = pi_gstar(m, s)?.mat + &a * pi_gstar(m, t)?.mat * a.transpose();
    Ok((lhs - rhs).amax())
}

/// `|J P J^T - sign * Q|` for a map with Jacobian `J` (rows: target
/// coordinates, columns: source coordinates) relating source bivector `P` to
/// target bivector `Q`. `sign = -1` tests anti-Poisson maps.
pub fn pushforward_defect(jac: &DMatrix<f64>, source: &BivectorMatrix, target: &BivectorMatrix, sign: f64) -> Result<f64> {
    check_dim(source.dim(), jac.ncols())?;
    check_dim(target.dim(), jac.nrows())?;
    Ok((jac * &source.mat * jac.transpose() - &target.mat * sign).amax())
}

/// The pushforward `J P J^T` itself.
pub fn pushforward(jac: &DMatrix<f64>, source: &BivectorMatrix, frame: FrameTag, base_point: impl Into<String>) -> Result<BivectorMatrix> {
    check_dim(source.dim(), jac.ncols())?;
    let mat = jac * &source.mat * jac.transpose();
    // finite-difference Jacobians keep the product antisymmetric only up to
    // rounding, so symmetrize before tagging
    let mat = (&mat - mat.transpose()) * 0.5;
    BivectorMatrix::new(mat, frame, base_point)
}
