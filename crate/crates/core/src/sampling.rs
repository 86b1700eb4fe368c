//! Seeded generators of random points of `Omega`, composable tuples and
//! level-set points. Rejection sampling keeps every factorization margin
//! above `min_margin`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::groupoid::{self, Element};
use crate::groups::{FactorOrder, PoissonDouble};
use crate::reduction::ReductionModel;

const MAX_ATTEMPTS: usize = 10_000;

/// Default lower bound on factorization margins of sampled points.
pub const DEFAULT_MIN_MARGIN: f64 = 1e-2;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for a named consumer, so that adding checks does not
/// perturb the samples of others.
pub fn stream(seed: u64, label: &str) -> ChaCha8Rng {
    // FNV-1a over the label
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

fn retry<T>(mut f: impl FnMut() -> Option<T>) -> Result<T> {
    for _ in 0..MAX_ATTEMPTS {
        if let Some(v) = f() {
            return Ok(v);
        }
    }
    Err(Error::Domain("rejection sampling exhausted its attempts".into()))
}

fn margins_ok<M: PoissonDouble>(m: &M, x: &Element<M>, min_margin: f64) -> bool {
    let d = m.d_mul(&m.embed_g(&x.g1), &m.embed_gstar(&x.gamma1));
    m.margin(&d, FactorOrder::GGstar) >= min_margin && m.margin(&d, FactorOrder::GstarG) >= min_margin
}

fn accept<M: PoissonDouble>(m: &M, x: Result<Element<M>>, min_margin: f64) -> Option<Element<M>> {
    x.ok().filter(|x| margins_ok(m, x, min_margin))
}

/// A random `(g, gamma)` whose product factorizes in both orders.
pub fn factorizable_pair<M: PoissonDouble, R: Rng + ?Sized>(m: &M, rng: &mut R, min_margin: f64) -> Result<(M::G, M::GStar)> {
    retry(|| {
        let (g, s) = (m.g_sample(rng), m.gstar_sample(rng));
        let d = m.d_mul(&m.embed_g(&g), &m.embed_gstar(&s));
        (m.margin(&d, FactorOrder::GstarG) >= min_margin).then_some((g, s))
    })
}

/// A random point of `Omega`.
pub fn omega_point<M: PoissonDouble, R: Rng + ?Sized>(m: &M, rng: &mut R, min_margin: f64) -> Result<Element<M>> {
    retry(|| {
        let (g, s) = (m.g_sample(rng), m.gstar_sample(rng));
        accept(m, groupoid::make(m, &g, &s), min_margin)
    })
}

/// `count` elements with `g2(x_i) = g1(x_{i+1})`.
pub fn composable_g<M: PoissonDouble, R: Rng + ?Sized>(m: &M, rng: &mut R, count: usize, min_margin: f64) -> Result<Vec<Element<M>>> {
    let mut out = vec![omega_point(m, rng, min_margin)?];
    while out.len() < count {
        let g = out[out.len() - 1].g2.clone();
        out.push(retry(|| {
            let s = m.gstar_sample(rng);
            accept(m, groupoid::make(m, &g, &s), min_margin)
        })?);
    }
    Ok(out)
}

/// `count` elements with `gamma1(x_i) = gamma2(x_{i+1})`.
pub fn composable_gstar<M: PoissonDouble, R: Rng + ?Sized>(m: &M, rng: &mut R, count: usize, min_margin: f64) -> Result<Vec<Element<M>>> {
    let mut out = vec![omega_point(m, rng, min_margin)?];
    while out.len() < count {
        let s = out[out.len() - 1].gamma1.clone();
        out.push(retry(|| {
            let g = m.g_sample(rng);
            accept(m, groupoid::make_from_right(m, &s, &g), min_margin)
        })?);
    }
    Ok(out)
}

/// A random point of the unit level set of `J_H`.
pub fn level_point<M: ReductionModel, R: Rng + ?Sized>(m: &M, rng: &mut R, min_margin: f64) -> Result<Element<M>> {
    retry(|| {
        let lambda = m.perp_sample(rng);
        let g = m.g_sample(rng);
        accept(m, groupoid::make_from_right(m, &lambda, &g), min_margin)
    })
}

/// `count` composable level-set points.
pub fn level_chain<M: ReductionModel, R: Rng + ?Sized>(m: &M, rng: &mut R, count: usize, min_margin: f64) -> Result<Vec<Element<M>>> {
    let mut out = vec![level_point(m, rng, min_margin)?];
    while out.len() < count {
        let g = out[out.len() - 1].g2.clone();
        out.push(retry(|| {
            let lambda = m.perp_sample(rng);
            accept(m, groupoid::make_from_g1_gamma2(m, &g, &lambda), min_margin)
        })?);
    }
    Ok(out)
}
