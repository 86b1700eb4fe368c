//! Finite-dimensional real Lie algebras and Lie bialgebras given by
//! structure constants.
//!
//! A [`LieAlgebraData`] stores the dense tensor `c[i][j][k]` with
//! `[e_i, e_j] = sum_k c[i][j][k] e_k`. A [`LieBialgebraData`] pairs an
//! algebra on the basis `e_i` with one on the dual basis `f^i`
//! (`<e_i, f^j> = delta_ij`). Elements of the double `g + g*` are
//! [`DoubleVector`]s, always ordered `(e_1..e_n, f^1..f^n)`.
//!
//! Every consistency check returns a max-norm defect rather than a boolean;
//! callers pick the threshold.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Tolerance used for rank and span decisions.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LieAlgebraData {
    dim: usize,
    basis_labels: Vec<String>,
    c: Vec<f64>,
}

impl LieAlgebraData {
    /// Builds an algebra from a flat `n^3` tensor in `(i, j, k)` row-major order.
    pub fn new(basis_labels: Vec<String>, c: Vec<f64>) -> Result<Self> {
        let dim = basis_labels.len();
        if dim == 0 {
            return Err(Error::Domain("Lie algebra dimension must be positive".into()));
        }
        check_dim(dim * dim * dim, c.len())?;
        Ok(Self { dim, basis_labels, c })
    }

    pub fn abelian(dim: usize, prefix: &str) -> Self {
        let labels = (0..dim).map(|i| format!("{prefix}{i}")).collect();
        Self { dim, basis_labels: labels, c: vec![0.0; dim * dim * dim] }
    }

    pub fn from_fn(basis_labels: Vec<String>, f: impl Fn(usize, usize, usize) -> f64) -> Self {
        let dim = basis_labels.len();
        let mut c = Vec::with_capacity(dim * dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    c.push(f(i, j, k));
                }
            }
        }
        Self { dim, basis_labels, c }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis_labels(&self) -> &[String] {
        &self.basis_labels
    }

    #[inline]
    pub fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[(i * self.dim + j) * self.dim + k]
    }

    pub fn set_c(&mut self, i: usize, j: usize, k: usize, value: f64) {
        let n = self.dim;
        self.c[(i * n + j) * n + k] = value;
    }

    /// `[X, Y]` in basis coordinates.
    pub fn bracket(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        check_dim(self.dim, y.len())?;
        Ok(self.bracket_unchecked(x, y))
    }

    pub(crate) fn bracket_unchecked(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n];
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                let w = x[i] * y[j];
                if w == 0.0 {
                    continue;
                }
                for (k, o) in out.iter_mut().enumerate() {
                    *o += self.c(i, j, k) * w;
                }
            }
        }
        out
    }

    /// Matrix of `ad_X`: column `j` holds the coordinates of `[X, e_j]`.
    pub fn ad_matrix(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.dim;
        DMatrix::from_fn(n, n, |k, j| (0..n).map(|i| x[i] * self.c(i, j, k)).sum())
    }

    pub fn antisymmetry_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    worst = worst.max((self.c(i, j, k) + self.c(j, i, k)).abs());
                }
            }
        }
        worst
    }

    /// Max-norm of the cyclic Jacobi sum over all basis triples.
    pub fn jacobi_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let s: f64 = (0..n)
                            .map(|m| {
                                self.c(i, j, m) * self.c(m, k, l)
                                    + self.c(j, k, m) * self.c(m, i, l)
                                    + self.c(k, i, m) * self.c(m, j, l)
                            })
                            .sum();
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    /// Parses a structure-constant file: one `i j k value` entry per line,
    /// 0-based indices, `#` comments and blank lines ignored. Missing entries
    /// are zero. When `dim` is `None` it is inferred from the largest index.
    pub fn parse_tensor_file(text: &str, dim: Option<usize>) -> Result<Self> {
        let mut entries = Vec::new();
        let mut max_index = 0usize;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("expected `i j k value`, got {} fields", fields.len()),
                });
            }
            let idx = |s: &str| {
                s.parse::<usize>().map_err(|e| Error::Parse { line: lineno + 1, msg: e.to_string() })
            };
            let (i, j, k) = (idx(fields[0])?, idx(fields[1])?, idx(fields[2])?);
            let value: f64 = fields[3]
                .parse()
                .map_err(|e: std::num::ParseFloatError| Error::Parse { line: lineno + 1, msg: e.to_string() })?;
            max_index = max_index.max(i).max(j).max(k);
            entries.push((lineno + 1, i, j, k, value));
        }
        let dim = match dim {
            Some(d) => d,
            None if entries.is_empty() => {
                return Err(Error::Parse { line: 0, msg: "empty tensor file and no dimension given".into() })
            }
            None => max_index + 1,
        };
        let mut algebra = Self::abelian(dim, "e");
        for (line, i, j, k, value) in entries {
            if i >= dim || j >= dim || k >= dim {
                return Err(Error::Parse { line, msg: format!("index out of range for dimension {dim}") });
            }
            algebra.set_c(i, j, k, value);
        }
        Ok(algebra)
    }

    /// Inverse of [`parse_tensor_file`](Self::parse_tensor_file); zero entries are omitted.
    pub fn to_tensor_file(&self) -> String {
        let n = self.dim;
        let mut out = format!("# structure constants, dim {n}: i j k c[i][j][k]\n");
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let v = self.c(i, j, k);
                    if v != 0.0 {
                        let _ = writeln!(out, "{i} {j} {k} {v:e}");
                    }
                }
            }
        }
        out
    }
}

/// An element `X + xi` of the double `g + g*`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoubleVector {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
}

impl DoubleVector {
    pub fn new(x: Vec<f64>, xi: Vec<f64>) -> Self {
        Self { x, xi }
    }

    pub fn zero(n: usize) -> Self {
        Self { x: vec![0.0; n], xi: vec![0.0; n] }
    }

    pub fn from_g(x: &[f64]) -> Self {
        Self { x: x.to_vec(), xi: vec![0.0; x.len()] }
    }

    pub fn from_gstar(xi: &[f64]) -> Self {
        Self { x: vec![0.0; xi.len()], xi: xi.to_vec() }
    }

    /// `k`-th vector of the double basis `(e_1..e_n, f^1..f^n)`.
    pub fn basis(n: usize, k: usize) -> Self {
        let mut v = Self::zero(n);
        if k < n {
            v.x[k] = 1.0;
        } else {
            v.xi[k - n] = 1.0;
        }
        v
    }

    pub fn from_coords(coords: &[f64]) -> Self {
        let n = coords.len() / 2;
        Self { x: coords[..n].to_vec(), xi: coords[n..].to_vec() }
    }

    pub fn coords(&self) -> Vec<f64> {
        self.x.iter().chain(self.xi.iter()).copied().collect()
    }

    pub fn half_dim(&self) -> usize {
        self.x.len()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            x: self.x.iter().zip(&other.x).map(|(a, b)| a + b).collect(),
            xi: self.xi.iter().zip(&other.xi).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { x: self.x.iter().map(|a| a * s).collect(), xi: self.xi.iter().map(|a| a * s).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.x.iter().chain(&self.xi).fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// The invariant pairing `<X + xi, Y + eta> = xi(Y) + eta(X)`.
    pub fn pairing(&self, other: &Self) -> f64 {
        dot(&self.xi, &other.x) + dot(&other.xi, &self.x)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A pair of algebras on dual bases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LieBialgebraData {
    pub g: LieAlgebraData,
    pub g_star: LieAlgebraData,
}

impl LieBialgebraData {
    pub fn new(g: LieAlgebraData, g_star: LieAlgebraData) -> Result<Self> {
        check_dim(g.dim(), g_star.dim())?;
        Ok(Self { g, g_star })
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    /// Coadjoint action of `g` on `g*`: `<ad*_X eta, Y> = -<eta, [X, Y]>`.
    pub fn coad_g_on_gstar(&self, x: &[f64], eta: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|k| {
                let mut s = 0.0;
                for i in 0..n {
                    for m in 0..n {
                        s += x[i] * eta[m] * self.g.c(i, k, m);
                    }
                }
                -s
            })
            .collect()
    }

    /// Coadjoint action of `g*` on `g`: `<ad*_xi Y, eta> = -<Y, [xi, eta]>`.
    pub fn coad_gstar_on_g(&self, xi: &[f64], y: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|k| {
                let mut s = 0.0;
                for i in 0..n {
                    for m in 0..n {
                        s += xi[i] * y[m] * self.g_star.c(i, k, m);
                    }
                }
                -s
            })
            .collect()
    }

    /// Bracket of the double:
    /// `[X+xi, Y+eta] = [X,Y] - ad*_eta X + ad*_xi Y + [xi,eta] + ad*_X eta - ad*_Y xi`.
    pub fn double_bracket(&self, u: &DoubleVector, v: &DoubleVector) -> Result<DoubleVector> {
        let n = self.dim();
        for part in [&u.x, &u.xi, &v.x, &v.xi] {
            check_dim(n, part.len())?;
        }
        Ok(self.double_bracket_unchecked(u, v))
    }

    pub(crate) fn double_bracket_unchecked(&self, u: &DoubleVector, v: &DoubleVector) -> DoubleVector {
        let n = self.dim();
        let xy = self.g.bracket_unchecked(&u.x, &v.x);
        let a = self.coad_gstar_on_g(&v.xi, &u.x);
        let b = self.coad_gstar_on_g(&u.xi, &v.x);
        let xe = self.g_star.bracket_unchecked(&u.xi, &v.xi);
        let c = self.coad_g_on_gstar(&u.x, &v.xi);
        let d = self.coad_g_on_gstar(&v.x, &u.xi);
        DoubleVector {
            x: (0..n).map(|k| xy[k] - a[k] + b[k]).collect(),
            xi: (0..n).map(|k| xe[k] + c[k] - d[k]).collect(),
        }
    }

    /// Max-norm of `delta([e_a, e_b]) - ad_{e_a} delta(e_b) + ad_{e_b} delta(e_a)`
    /// where `delta` is the transpose of the `g*` bracket.
    pub fn cocycle_defect(&self) -> f64 {
        let n = self.dim();
        // delta(e_k) has components T^{ij} = c*[i][j][k]
        let delta = |x: &[f64]| -> DMatrix<f64> {
            DMatrix::from_fn(n, n, |i, j| (0..n).map(|k| self.g_star.c(i, j, k) * x[k]).sum())
        };
        let ad_on_tensor = |x: &[f64], t: &DMatrix<f64>| -> DMatrix<f64> {
            let ad = self.g.ad_matrix(x);
            &ad * t + t * ad.transpose()
        };
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                let mut ea = vec![0.0; n];
                ea[a] = 1.0;
                let mut eb = vec![0.0; n];
                eb[b] = 1.0;
                let lhs = delta(&self.g.bracket_unchecked(&ea, &eb));
                let r = ad_on_tensor(&ea, &delta(&eb)) - ad_on_tensor(&eb, &delta(&ea));
                worst = worst.max((lhs - r).amax());
            }
        }
        worst
    }

    /// Jacobi defect of the double bracket over all basis triples of `g + g*`.
    pub fn double_jacobi_defect(&self) -> f64 {
        let n = self.dim();
        let basis: Vec<DoubleVector> = (0..2 * n).map(|k| DoubleVector::basis(n, k)).collect();
        let mut worst = 0.0f64;
        for u in &basis {
            for v in &basis {
                for w in &basis {
                    worst = worst.max(self.jacobi_triple(u, v, w));
                }
            }
        }
        worst
    }

    /// `|[[u,v],w] + [[v,w],u] + [[w,u],v]|_inf`.
    pub fn jacobi_triple(&self, u: &DoubleVector, v: &DoubleVector, w: &DoubleVector) -> f64 {
        let br = |a: &DoubleVector, b: &DoubleVector| self.double_bracket_unchecked(a, b);
        br(&br(u, v), w).add(&br(&br(v, w), u)).add(&br(&br(w, u), v)).max_abs()
    }

    /// Max over basis triples of `|<[u,v], w> + <v, [u,w]>|`.
    pub fn pairing_invariance_defect(&self) -> f64 {
        let n = self.dim();
        let basis: Vec<DoubleVector> = (0..2 * n).map(|k| DoubleVector::basis(n, k)).collect();
        let mut worst = 0.0f64;
        for u in &basis {
            for v in &basis {
                let uv = self.double_bracket_unchecked(u, v);
                for w in &basis {
                    let uw = self.double_bracket_unchecked(u, w);
                    worst = worst.max((uv.pairing(w) + v.pairing(&uw)).abs());
                }
            }
        }
        worst
    }

    /// The reversed bialgebra `(g*, g)`.
    pub fn dual(&self) -> Self {
        Self { g: self.g_star.clone(), g_star: self.g.clone() }
    }
}

/// A linear subspace of `R^n` given by a linearly independent spanning list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubspaceData {
    parent_dim: usize,
    basis_vectors: Vec<Vec<f64>>,
}

impl SubspaceData {
    pub fn new(parent_dim: usize, basis_vectors: Vec<Vec<f64>>) -> Result<Self> {
        for v in &basis_vectors {
            check_dim(parent_dim, v.len())?;
        }
        let rank = rank_of(parent_dim, &basis_vectors);
        if rank != basis_vectors.len() {
            return Err(Error::RankDeficient { rank, count: basis_vectors.len() });
        }
        Ok(Self { parent_dim, basis_vectors })
    }

    pub fn zero(parent_dim: usize) -> Self {
        Self { parent_dim, basis_vectors: Vec::new() }
    }

    pub fn full(parent_dim: usize) -> Self {
        let basis_vectors = (0..parent_dim)
            .map(|i| (0..parent_dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self { parent_dim, basis_vectors }
    }

    /// Span of the listed coordinate axes.
    pub fn coordinate(parent_dim: usize, axes: &[usize]) -> Result<Self> {
        let vs = axes
            .iter()
            .map(|&a| (0..parent_dim).map(|j| if j == a { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::new(parent_dim, vs)
    }

    pub fn parent_dim(&self) -> usize {
        self.parent_dim
    }

    pub fn dim(&self) -> usize {
        self.basis_vectors.len()
    }

    pub fn basis_vectors(&self) -> &[Vec<f64>] {
        &self.basis_vectors
    }

    /// Annihilator in the dual coordinates: `{ xi : <xi, v> = 0 for all v }`.
    pub fn annihilator(&self) -> SubspaceData {
        let q = orthonormal_basis(self.parent_dim, &self.basis_vectors);
        let mut complement: Vec<Vec<f64>> = Vec::new();
        for axis in 0..self.parent_dim {
            let mut v: Vec<f64> = (0..self.parent_dim).map(|j| if j == axis { 1.0 } else { 0.0 }).collect();
            for b in q.iter().chain(complement.iter()) {
                let p = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= p * bi);
            }
            let norm = dot(&v, &v).sqrt();
            if norm > 1e-6 {
                v.iter_mut().for_each(|vi| *vi /= norm);
                complement.push(v);
            }
            if q.len() + complement.len() == self.parent_dim {
                break;
            }
        }
        SubspaceData { parent_dim: self.parent_dim, basis_vectors: complement }
    }

    /// Distance from `v` to the span.
    pub fn residual(&self, v: &[f64]) -> f64 {
        let q = orthonormal_basis(self.parent_dim, &self.basis_vectors);
        let mut r = v.to_vec();
        for b in &q {
            let p = dot(&r, b);
            r.iter_mut().zip(b).for_each(|(ri, bi)| *ri -= p * bi);
        }
        dot(&r, &r).sqrt()
    }

    /// Equality of spans via a rank test.
    pub fn same_span(&self, other: &SubspaceData) -> bool {
        if self.parent_dim != other.parent_dim || self.dim() != other.dim() {
            return false;
        }
        let mut all = self.basis_vectors.clone();
        all.extend(other.basis_vectors.iter().cloned());
        rank_of(self.parent_dim, &all) == self.dim()
    }
}

/// Whether `s` is closed under the bracket; returns the flag and the worst
/// distance of a basis bracket from `span(s)`.
pub fn is_subalgebra(a: &LieAlgebraData, s: &SubspaceData, tol: f64) -> Result<(bool, f64)> {
    check_dim(a.dim(), s.parent_dim())?;
    let mut worst = 0.0f64;
    for u in s.basis_vectors() {
        for v in s.basis_vectors() {
            worst = worst.max(s.residual(&a.bracket_unchecked(u, v)));
        }
    }
    Ok((worst <= tol, worst))
}

fn rank_of(n: usize, vs: &[Vec<f64>]) -> usize {
    if vs.is_empty() {
        return 0;
    }
    let m = DMatrix::from_fn(vs.len(), n, |i, j| vs[i][j]);
    m.rank(RANK_TOL)
}

fn orthonormal_basis(n: usize, vs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(vs.len());
    for v in vs {
        let mut w = v.clone();
        // two passes of Gram-Schmidt keep orthogonality at roundoff level
        for _ in 0..2 {
            for b in &q {
                let p = dot(&w, b);
                w.iter_mut().zip(b).for_each(|(wi, bi)| *wi -= p * bi);
            }
        }
        let norm = dot(&w, &w).sqrt();
        if norm > RANK_TOL {
            w.iter_mut().for_each(|wi| *wi /= norm);
            q.push(w);
        }
    }
    debug_assert!(q.iter().all(|b| b.len() == n));
    q
}
