//! Central finite differences in trivialized frames.

use nalgebra::DMatrix;

use crate::error::Result;
use crate::groups::PoissonDouble;

/// Central-difference step, `2^-17 ~ 7.6e-6`. A power of two keeps
/// differences of dyadic sample points exact.
pub const FD_STEP: f64 = 1.0 / 131_072.0;

/// Fourth-order central difference
/// `(8 (f(h) - f(-h)) - (f(2h) - f(-2h))) / 12h`.
///
/// The second-order stencil loses about four digits near the factorization
/// boundary, where third derivatives of the structure maps grow like the
/// inverse cube of the margin.
pub fn central(f: impl Fn(f64) -> Result<Vec<f64>>, h: f64) -> Result<Vec<f64>> {
    let (p1, m1) = (f(h)?, f(-h)?);
    let (p2, m2) = (f(2.0 * h)?, f(-2.0 * h)?);
    Ok((0..p1.len())
        .map(|i| (8.0 * (p1[i] - m1[i]) - (p2[i] - m2[i])) / (12.0 * h))
        .collect())
}

/// Jacobian whose column `a` is the central difference of `f(a, t)` at `t = 0`.
pub fn jacobian(n_in: usize, f: impl Fn(usize, f64) -> Result<Vec<f64>>, h: f64) -> Result<DMatrix<f64>> {
    let mut cols = Vec::with_capacity(n_in);
    for a in 0..n_in {
        cols.push(central(|t| f(a, t), h)?);
    }
    let n_out = cols.first().map_or(0, Vec::len);
    Ok(DMatrix::from_fn(n_out, n_in, |i, j| cols[j][i]))
}

/// Left-trivialized chart of `G` at `base`: `g -> coords(base^{-1} g)`.
pub fn g_left<M: PoissonDouble>(m: &M, base: &M::G, g: &M::G) -> Vec<f64> {
    m.d_coords(&m.d_mul(&m.d_inv(&m.embed_g(base)), &m.embed_g(g))).x
}

/// Right-trivialized chart of `G` at `base`: `g -> coords(g base^{-1})`.
pub fn g_right<M: PoissonDouble>(m: &M, base: &M::G, g: &M::G) -> Vec<f64> {
    m.d_coords(&m.d_mul(&m.embed_g(g), &m.d_inv(&m.embed_g(base)))).x
}

pub fn gstar_left<M: PoissonDouble>(m: &M, base: &M::GStar, s: &M::GStar) -> Vec<f64> {
    m.d_coords(&m.d_mul(&m.d_inv(&m.embed_gstar(base)), &m.embed_gstar(s))).xi
}

pub fn gstar_right<M: PoissonDouble>(m: &M, base: &M::GStar, s: &M::GStar) -> Vec<f64> {
    m.d_coords(&m.d_mul(&m.embed_gstar(s), &m.d_inv(&m.embed_gstar(base)))).xi
}
