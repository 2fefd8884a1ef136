//! q-semilinear operators `x -> A x^[q]` on `GF(p^g)^r`, where `q = p^t`, `t | g`.
//!
//! Besides twisted products this module provides the Fitting splitting
//! `V = V_s + V_eta` (bijective part plus nilpotent part) and the fixed space of
//! the operator after base change to the extension over which the bijective
//! part becomes trivial.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ff::linalg::{self, Matrix, PrimeField};
use crate::ff::{make_field, FieldCtx, FieldElem, FieldError, TowerEmbedding};

pub const DEFAULT_M_CAP: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SemilinearError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("twist degree {twist} must be positive and divide the field degree {degree}")]
    BadTwist { twist: usize, degree: usize },
    #[error("vector of length {got} for an operator of rank {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("the vector does not span an invariant line")]
    NotInvariant,
    #[error("zero vector")]
    ZeroVector,
    #[error("fixed vectors need extension degree {required:?}, above the cap {cap}")]
    CapExceeded {
        required: Option<u128>,
        cap: usize,
        partial: Box<FixedSpace>,
    },
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "OpRepr", into = "OpRepr")]
pub struct SemilinearOp {
    ctx: FieldCtx,
    twist_degree: usize,
    matrix: Matrix<FieldElem>,
}

/// JSON form `{ctx, twist_degree, rows}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OpRepr {
    pub ctx: FieldCtx,
    pub twist_degree: usize,
    pub rows: Vec<Vec<FieldElem>>,
}

impl TryFrom<OpRepr> for SemilinearOp {
    type Error = SemilinearError;
    fn try_from(r: OpRepr) -> Result<Self, Self::Error> {
        let n = r.rows.len();
        if let Some(bad) = r.rows.iter().find(|row| row.len() != n) {
            return Err(SemilinearError::NotSquare { rows: n, cols: bad.len() });
        }
        let m = if n == 0 { Matrix::filled(0, 0, r.ctx.zero()) } else { Matrix::from_rows(r.rows) };
        SemilinearOp::new(&r.ctx, r.twist_degree, m)
    }
}

impl From<SemilinearOp> for OpRepr {
    fn from(op: SemilinearOp) -> Self {
        OpRepr { rows: op.matrix.to_rows(), ctx: op.ctx, twist_degree: op.twist_degree }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FittingDecomp {
    pub stable_basis: Vec<Vec<FieldElem>>,
    pub nilpotent_basis: Vec<Vec<FieldElem>>,
    pub nilpotency_index: usize,
}

/// How the basis of a fixed space is written down.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FixedBasis {
    /// Vectors with coordinates in the extension field `field`.
    Explicit { field: FieldCtx, vectors: Vec<Vec<FieldElem>> },
    /// Only for operators whose matrix lies over the twist field GF(q). The
    /// vector with seed `u` is `sum_i theta^(q^i) A^i u` for a normal basis
    /// `theta^(q^i)` of GF(q^degree)/GF(q); it is fixed because `A^degree u = u`.
    NormalCoordinates { degree: u128, seeds: Vec<Vec<FieldElem>> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FixedSpace {
    /// Dimension of the bijective part.
    pub stable_dim: usize,
    /// Least `m` such that fixed vectors over `GF(p^(g m))` span the bijective part.
    pub required_degree: Option<u128>,
    /// The `m` actually used for `basis`.
    pub extension_degree_used: u128,
    pub basis: FixedBasis,
}

impl FixedSpace {
    /// GF(q)-dimension of the computed fixed vectors.
    pub fn dim(&self) -> usize {
        match &self.basis {
            FixedBasis::Explicit { vectors, .. } => vectors.len(),
            FixedBasis::NormalCoordinates { seeds, .. } => seeds.len(),
        }
    }

    pub fn is_complete(&self) -> bool {
        self.dim() == self.stable_dim
    }
}

fn twist_vec(ctx: &FieldCtx, v: &[FieldElem], i: usize) -> Vec<FieldElem> {
    v.iter().map(|x| ctx.frobenius(x, i)).collect()
}

impl SemilinearOp {
    pub fn new(ctx: &FieldCtx, twist_degree: usize, matrix: Matrix<FieldElem>) -> Result<Self, SemilinearError> {
        if !matrix.is_square() {
            return Err(SemilinearError::NotSquare { rows: matrix.rows(), cols: matrix.cols() });
        }
        if twist_degree == 0 || !ctx.degree().is_multiple_of(twist_degree) {
            return Err(SemilinearError::BadTwist { twist: twist_degree, degree: ctx.degree() });
        }
        for i in 0..matrix.rows() {
            for x in matrix.row(i) {
                ctx.validate(x)?;
            }
        }
        Ok(SemilinearOp { ctx: ctx.clone(), twist_degree, matrix })
    }

    pub fn from_rows(ctx: &FieldCtx, twist_degree: usize, rows: Vec<Vec<FieldElem>>) -> Result<Self, SemilinearError> {
        OpRepr { ctx: ctx.clone(), twist_degree, rows }.try_into()
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn twist_degree(&self) -> usize {
        self.twist_degree
    }

    pub fn q(&self) -> u64 {
        self.ctx.p().pow(self.twist_degree as u32)
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &Matrix<FieldElem> {
        &self.matrix
    }

    /// Entrywise `x -> x^(q^k)`.
    pub fn twist_matrix(&self, m: &Matrix<FieldElem>, k: usize) -> Matrix<FieldElem> {
        let i = (self.twist_degree * k) % self.ctx.degree();
        m.map(|x| self.ctx.frobenius(x, i))
    }

    fn check_len(&self, v: &[FieldElem]) -> Result<(), SemilinearError> {
        if v.len() != self.dim() {
            return Err(SemilinearError::DimensionMismatch { expected: self.dim(), got: v.len() });
        }
        Ok(())
    }

    pub fn apply(&self, v: &[FieldElem]) -> Result<Vec<FieldElem>, SemilinearError> {
        self.check_len(v)?;
        Ok(self.apply_unchecked(v))
    }

    fn apply_unchecked(&self, v: &[FieldElem]) -> Vec<FieldElem> {
        let tv = twist_vec(&self.ctx, v, self.twist_degree);
        linalg::mat_vec(&self.ctx, &self.matrix, &tv)
    }

    /// Matrix of `self` after `other`: `A_self * A_other^[q]`. The composite
    /// is `q^2`-semilinear: `self(other(x)) = M x^[q^2]`.
    pub fn compose(&self, other: &Self) -> Result<Matrix<FieldElem>, SemilinearError> {
        if self.ctx != other.ctx || self.twist_degree != other.twist_degree {
            return Err(FieldError::ContextMismatch("operators over different fields".into()).into());
        }
        if other.dim() != self.dim() {
            return Err(SemilinearError::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(linalg::mat_mul(&self.ctx, &self.matrix, &self.twist_matrix(&other.matrix, 1)))
    }

    /// `M_e = A A^[q] ... A^[q^(e-1)]`, the matrix of the e-th iterate.
    pub fn twisted_power(&self, e: usize) -> Matrix<FieldElem> {
        let mut m = linalg::identity(&self.ctx, self.dim());
        for _ in 0..e {
            m = linalg::mat_mul(&self.ctx, &self.matrix, &self.twist_matrix(&m, 1));
        }
        m
    }

    /// Same operator over a larger field, keeping `q`.
    pub fn base_change(&self, emb: &TowerEmbedding) -> Result<Self, SemilinearError> {
        if emb.sub() != &self.ctx {
            return Err(FieldError::ContextMismatch("embedding source differs from operator field".into()).into());
        }
        let m = self.matrix.map(|x| emb.embed_unchecked(x));
        SemilinearOp::new(emb.sup(), self.twist_degree, m)
    }

    pub fn fitting_decomposition(&self) -> FittingDecomp {
        let ctx = &self.ctx;
        let r = self.dim();
        let mr = self.twisted_power(r);
        let stable_basis = linalg::column_space(ctx, &mr);
        // phi^r(x) = M_r x^[q^r]; its kernel is the q^r-root of ker M_r.
        let g = ctx.degree();
        let back = (g - (self.twist_degree * r) % g) % g;
        let nilpotent_basis: Vec<Vec<FieldElem>> =
            linalg::kernel(ctx, &mr).iter().map(|v| twist_vec(ctx, v, back)).collect();
        let mut nilpotency_index = 0;
        let mut cur = nilpotent_basis.clone();
        while cur.iter().any(|v| !linalg::is_zero_vec(ctx, v)) {
            cur = cur.iter().map(|v| self.apply_unchecked(v)).collect();
            nilpotency_index += 1;
        }
        FittingDecomp { stable_basis, nilpotent_basis, nilpotency_index }
    }

    /// `phi^s` restricted to the bijective part, with `s = g / t`, written in
    /// the coordinates of `stable`. It is linear over the coefficient field.
    fn stable_linear_part(&self, stable: &[Vec<FieldElem>]) -> Matrix<FieldElem> {
        let ctx = &self.ctx;
        let s = ctx.degree() / self.twist_degree;
        let k = self.twisted_power(s);
        let cols: Vec<Vec<FieldElem>> = stable
            .iter()
            .map(|b| {
                let img = linalg::mat_vec(ctx, &k, b);
                linalg::coordinates(ctx, stable, &img).expect("the bijective part is invariant")
            })
            .collect();
        Matrix::from_columns(stable.len(), &cols)
    }

    /// Least `m` with fixed vectors over `GF(p^(g m))` spanning the bijective part.
    pub fn required_extension_degree(&self) -> Option<u128> {
        let fd = self.fitting_decomposition();
        let k = self.stable_linear_part(&fd.stable_basis);
        matrix_order(&self.ctx, &k)
    }

    /// Fixed vectors of the operator after base change.
    ///
    /// The bijective part is trivialized over `GF(p^(g m))` exactly when `m`
    /// is a multiple of the multiplicative order `m*` of `phi^s` on `V_s`.
    /// For `m* <= m_cap` the vectors are built in that field by averaging
    /// `w -> sum_{i < s m*} phi^i(w)` over `theta^j b` (theta the field
    /// generator, b in V_s) and keeping a GF(q)-independent subset. Beyond the
    /// cap, operators over their own twist field are answered in normal-basis
    /// coordinates; anything else reports `CapExceeded` with the fixed vectors
    /// rational over the coefficient field.
    pub fn fixed_space(&self, m_cap: usize) -> Result<FixedSpace, SemilinearError> {
        let fd = self.fitting_decomposition();
        let stable_dim = fd.stable_basis.len();
        let k = self.stable_linear_part(&fd.stable_basis);
        let required = matrix_order(&self.ctx, &k);
        match required {
            Some(m) if m <= m_cap.max(1) as u128 => {
                let (field, vectors) = self.averaged_fixed_vectors(&fd.stable_basis, m as usize)?;
                Ok(FixedSpace {
                    stable_dim,
                    required_degree: required,
                    extension_degree_used: m,
                    basis: FixedBasis::Explicit { field, vectors },
                })
            }
            Some(m) if self.twist_degree == self.ctx.degree() => {
                let kernel = linalg::kernel(
                    &self.ctx,
                    &linalg::mat_sub(
                        &self.ctx,
                        &mat_pow_u128(&self.ctx, &self.matrix, m),
                        &linalg::identity(&self.ctx, self.dim()),
                    ),
                );
                Ok(FixedSpace {
                    stable_dim,
                    required_degree: required,
                    extension_degree_used: m,
                    basis: FixedBasis::NormalCoordinates { degree: m, seeds: kernel },
                })
            }
            _ => {
                let (field, vectors) = self.linearized_fixed_vectors(1)?;
                let partial = FixedSpace {
                    stable_dim,
                    required_degree: required,
                    extension_degree_used: 1,
                    basis: FixedBasis::Explicit { field, vectors },
                };
                if partial.is_complete() {
                    return Ok(partial);
                }
                Err(SemilinearError::CapExceeded { required, cap: m_cap, partial: Box::new(partial) })
            }
        }
    }

    fn averaged_fixed_vectors(
        &self,
        stable: &[Vec<FieldElem>],
        m: usize,
    ) -> Result<(FieldCtx, Vec<Vec<FieldElem>>), SemilinearError> {
        let ctx = &self.ctx;
        let (p, g, t) = (ctx.p(), ctx.degree(), self.twist_degree);
        let big = make_field(p, g * m)?;
        let emb = TowerEmbedding::new(ctx, &big)?;
        let n_iter = (g / t) * m;
        let scalars = twist_scalars(p, t, &big)?;
        let theta = big.generator();
        let mut found: Vec<Vec<FieldElem>> = Vec::new();
        let mut spanned: Vec<Vec<u64>> = Vec::new();
        'outer: for b in stable {
            // phi^i(b) over the small field, then pushed up once.
            let mut orbit = Vec::with_capacity(n_iter);
            let mut cur = b.clone();
            for _ in 0..n_iter {
                orbit.push(cur.iter().map(|x| emb.embed_unchecked(x)).collect::<Vec<_>>());
                cur = self.apply_unchecked(&cur);
            }
            let mut c = big.one();
            for _ in 0..g * m {
                // sum_i c^(q^i) phi^i(b)
                let mut acc = vec![big.zero(); self.dim()];
                let mut ci = c.clone();
                for term in &orbit {
                    for (a, x) in acc.iter_mut().zip(term) {
                        *a = big.add(a, &big.mul(&ci, x));
                    }
                    ci = big.frobenius(&ci, t);
                }
                if try_extend(&big, &scalars, &mut spanned, &acc) {
                    found.push(acc);
                    if found.len() == stable.len() {
                        break 'outer;
                    }
                }
                c = big.mul(&c, &theta);
            }
        }
        Ok((big, found))
    }

    /// Fixed vectors over `GF(p^(g m))` by restriction of scalars: the map
    /// `x -> A x^[q]` is GF(p)-linear on `GF(p)^(r g m)` (coordinate `i` of the
    /// vector and coordinate `j` of the field element at index `i (g m) + j`),
    /// and the fixed vectors are the kernel of that map minus the identity.
    /// Returns a GF(q)-basis.
    pub fn linearized_fixed_vectors(&self, m: usize) -> Result<(FieldCtx, Vec<Vec<FieldElem>>), SemilinearError> {
        let ctx = &self.ctx;
        let (p, g, t, r) = (ctx.p(), ctx.degree(), self.twist_degree, self.dim());
        let big = make_field(p, g * m)?;
        let emb = TowerEmbedding::new(ctx, &big)?;
        let lin = self.base_change(&emb)?.linearized_minus_identity();
        let n = g * m;
        let gfp = PrimeField { p };
        let kernel = linalg::kernel(&gfp, &lin);
        let scalars = twist_scalars(p, t, &big)?;
        let mut spanned = Vec::new();
        let mut found = Vec::new();
        for kv in kernel {
            let v: Vec<FieldElem> =
                (0..r).map(|i| big.from_coords(&kv[i * n..(i + 1) * n]).expect("slice has field length")).collect();
            if try_extend(&big, &scalars, &mut spanned, &v) {
                found.push(v);
            }
        }
        Ok((big, found))
    }

    /// The GF(p)-matrix of `x -> A x^[q] - x` on `GF(p)^(r g)`, coordinate `i`
    /// of the vector and `j` of the field element at index `i g + j`.
    pub fn linearized_minus_identity(&self) -> Matrix<u64> {
        let (p, n, r) = (self.ctx.p(), self.ctx.degree(), self.dim());
        let mut lin = Matrix::filled(r * n, r * n, 0u64);
        for i in 0..r {
            for j in 0..n {
                let mut v = vec![self.ctx.zero(); r];
                v[i].0[j] = 1;
                let img = self.apply_unchecked(&v);
                for (i2, x) in img.iter().enumerate() {
                    for (j2, &c) in x.0.iter().enumerate() {
                        lin.set(i2 * n + j2, i * n + j, c);
                    }
                }
                let d = i * n + j;
                lin.set(d, d, (lin.get(d, d) + p - 1) % p);
            }
        }
        lin
    }

    /// `lambda` with `phi(v) = lambda v`.
    pub fn rank_one_eigenvalue(&self, v: &[FieldElem]) -> Result<FieldElem, SemilinearError> {
        self.check_len(v)?;
        let ctx = &self.ctx;
        let Some(i) = v.iter().position(|x| !ctx.is_zero(x)) else {
            return Err(SemilinearError::ZeroVector);
        };
        let w = self.apply_unchecked(v);
        let lambda = ctx.div(&w[i], &v[i]).expect("pivot is nonzero");
        if linalg::scale_vec(ctx, &lambda, v) != w {
            return Err(SemilinearError::NotInvariant);
        }
        Ok(lambda)
    }
}

/// GF(p)-basis of the copy of GF(p^t) inside `big`.
fn twist_scalars(p: u64, t: usize, big: &FieldCtx) -> Result<Vec<FieldElem>, FieldError> {
    let small = make_field(p, t)?;
    let emb = TowerEmbedding::new(&small, big)?;
    let gen = emb.generator_image().clone();
    let mut out = Vec::with_capacity(t);
    let mut cur = big.one();
    for _ in 0..t {
        out.push(cur.clone());
        cur = big.mul(&cur, &gen);
    }
    Ok(out)
}

fn flatten(v: &[FieldElem]) -> Vec<u64> {
    v.iter().flat_map(|x| x.0.iter().copied()).collect()
}

/// Adds `v` when it is GF(q)-independent of the vectors already spanned, i.e.
/// when its GF(q)-multiples raise the GF(p)-rank.
fn try_extend(big: &FieldCtx, scalars: &[FieldElem], spanned: &mut Vec<Vec<u64>>, v: &[FieldElem]) -> bool {
    let gfp = PrimeField { p: big.p() };
    let flat = flatten(v);
    if flat.iter().all(|&x| x == 0) || linalg::in_span(&gfp, spanned, &flat) {
        return false;
    }
    for a in scalars {
        let av: Vec<FieldElem> = v.iter().map(|x| big.mul(a, x)).collect();
        spanned.push(flatten(&av));
    }
    true
}

fn mat_pow_u128(ctx: &FieldCtx, m: &Matrix<FieldElem>, mut e: u128) -> Matrix<FieldElem> {
    let mut acc = linalg::identity(ctx, m.rows());
    let mut base = m.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc = linalg::mat_mul(ctx, &acc, &base);
        }
        e >>= 1;
        if e > 0 {
            base = linalg::mat_mul(ctx, &base, &base);
        }
    }
    acc
}

fn factor_into(mut n: u128, out: &mut std::collections::BTreeMap<u128, u32>) {
    let mut d = 2u128;
    while d * d <= n {
        let mut k = 0;
        while n.is_multiple_of(d) {
            n /= d;
            k += 1;
        }
        if k > 0 {
            let e = out.entry(d).or_insert(0);
            *e = (*e).max(k);
        }
        d += 1;
    }
    if n > 1 {
        let e = out.entry(n).or_insert(0);
        *e = (*e).max(1);
    }
}

/// Multiplicative order of an invertible matrix over GF(Q).
///
/// The unit group of `GF(Q)[x]/(minpoly)` has exponent dividing
/// `lcm_{d <= n}(Q^d - 1) * p^ceil(log_p n)`; start there and strip prime
/// factors while the power stays the identity. `None` if that bound does not
/// fit in 128 bits or trial division would be too slow.
pub fn matrix_order(ctx: &FieldCtx, k: &Matrix<FieldElem>) -> Option<u128> {
    let n = k.rows();
    if n == 0 {
        return Some(1);
    }
    let q = ctx.order()? as u128;
    let p = ctx.p() as u128;
    let mut primes = std::collections::BTreeMap::new();
    for d in 1..=n as u32 {
        let qd = q.checked_pow(d)?;
        if qd - 1 > 1 << 80 {
            return None;
        }
        factor_into(qd - 1, &mut primes);
    }
    let mut pk = 0u32;
    while p.pow(pk) < n as u128 {
        pk += 1;
    }
    if pk > 0 {
        let e = primes.entry(p).or_insert(0);
        *e = (*e).max(pk);
    }
    let mut exponent: u128 = 1;
    for (&l, &e) in &primes {
        exponent = exponent.checked_mul(l.checked_pow(e)?)?;
    }
    let id = linalg::identity(ctx, n);
    if mat_pow_u128(ctx, k, exponent) != id {
        return None;
    }
    for (&l, &e) in &primes {
        for _ in 0..e {
            if exponent.is_multiple_of(l) && mat_pow_u128(ctx, k, exponent / l) == id {
                exponent /= l;
            } else {
                break;
            }
        }
    }
    Some(exponent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn op_from(p: u64, g: usize, t: usize, rows: &[&[u64]]) -> SemilinearOp {
        let ctx = make_field(p, g).unwrap();
        let rows = rows.iter().map(|r| r.iter().map(|&c| ctx.from_u64(c)).collect()).collect();
        SemilinearOp::from_rows(&ctx, t, rows).unwrap()
    }

    fn random_op(rng: &mut ChaCha8Rng, p: u64, g: usize, t: usize, r: usize) -> SemilinearOp {
        let ctx = make_field(p, g).unwrap();
        let m = Matrix::from_fn(r, r, |_, _| ctx.random(rng));
        SemilinearOp::new(&ctx, t, m).unwrap()
    }

    fn assert_fixed(op: &SemilinearOp, fs: &FixedSpace) {
        match &fs.basis {
            FixedBasis::Explicit { field, vectors } => {
                let emb = TowerEmbedding::new(op.ctx(), field).unwrap();
                let big = op.base_change(&emb).unwrap();
                for v in vectors {
                    assert_eq!(&big.apply(v).unwrap(), v);
                }
            }
            FixedBasis::NormalCoordinates { degree, seeds } => {
                let am = mat_pow_u128(op.ctx(), op.matrix(), *degree);
                for u in seeds {
                    assert_eq!(&linalg::mat_vec(op.ctx(), &am, u), u);
                }
            }
        }
    }

    #[test]
    fn twisted_power_examples() {
        let id = op_from(3, 2, 2, &[&[1, 0], &[0, 1]]);
        for e in 1..5 {
            assert_eq!(id.twisted_power(e), linalg::identity(id.ctx(), 2));
        }
        // r = 1, A = (c), q = p: M_e = c^(1 + p + ... + p^(e-1))
        let ctx = make_field(5, 3).unwrap();
        let c = ctx.from_coords(&[2, 1, 3]).unwrap();
        let op = SemilinearOp::from_rows(&ctx, 1, vec![vec![c.clone()]]).unwrap();
        let mut expo = 0u128;
        for e in 1..6 {
            expo += 5u128.pow(e as u32 - 1);
            assert_eq!(op.twisted_power(e).get(0, 0), &ctx.pow(&c, expo));
        }
        let strict = op_from(3, 1, 1, &[&[0, 1, 2], &[0, 0, 1], &[0, 0, 0]]);
        assert!(linalg::is_zero_matrix(strict.ctx(), &strict.twisted_power(3)));
    }

    #[test]
    fn composition_matches_probes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (p, g, t) in [(3, 2, 1), (5, 2, 2), (3, 4, 2)] {
            let a = random_op(&mut rng, p, g, t, 3);
            let b = random_op(&mut rng, p, g, t, 3);
            let ab = a.compose(&b).unwrap();
            for _ in 0..10 {
                let v: Vec<FieldElem> = (0..3).map(|_| a.ctx().random(&mut rng)).collect();
                let direct = linalg::mat_vec(a.ctx(), &ab, &twist_vec(a.ctx(), &v, 2 * t));
                assert_eq!(direct, a.apply(&b.apply(&v).unwrap()).unwrap());
            }
        }
    }

    #[test]
    fn twisted_power_splits() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for (p, g, t) in [(3, 2, 1), (5, 2, 1), (3, 3, 1), (3, 4, 2)] {
            let op = random_op(&mut rng, p, g, t, 3);
            for a in 1..=4 {
                for b in 1..=4 {
                    let lhs = op.twisted_power(a + b);
                    let rhs = linalg::mat_mul(op.ctx(), &op.twisted_power(a), &op.twist_matrix(&op.twisted_power(b), a));
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn fitting_examples() {
        let zero = op_from(3, 1, 1, &[&[0, 0], &[0, 0]]);
        let fd = zero.fitting_decomposition();
        assert!(fd.stable_basis.is_empty());
        assert_eq!(fd.nilpotent_basis.len(), 2);
        assert_eq!(fd.nilpotency_index, 1);
        let inv = op_from(5, 1, 1, &[&[1, 2], &[3, 4]]);
        let fd = inv.fitting_decomposition();
        assert_eq!((fd.stable_basis.len(), fd.nilpotent_basis.len()), (2, 0));
        let jordan = op_from(3, 1, 1, &[&[0, 1], &[0, 0]]);
        let fd = jordan.fitting_decomposition();
        assert_eq!((fd.stable_basis.len(), fd.nilpotent_basis.len(), fd.nilpotency_index), (0, 2, 2));
    }

    #[test]
    fn nilpotent_part_uses_twisted_kernel() {
        // A = [[0, 1], [0, t]] over GF(9), q = 3: the kernel of phi^2 is not ker M_2.
        let ctx = make_field(3, 2).unwrap();
        let t = ctx.generator();
        let op = SemilinearOp::from_rows(&ctx, 1, vec![vec![ctx.zero(), t.clone()], vec![ctx.zero(), ctx.one()]])
            .unwrap();
        let fd = op.fitting_decomposition();
        assert_eq!((fd.stable_basis.len(), fd.nilpotent_basis.len()), (1, 1));
        for v in &fd.nilpotent_basis {
            let mut w = v.clone();
            for _ in 0..fd.nilpotency_index {
                w = op.apply(&w).unwrap();
            }
            assert!(linalg::is_zero_vec(&ctx, &w));
        }
    }

    #[test]
    fn fixed_space_examples() {
        // A = (1): the fixed vectors are the copy of GF(q).
        let one = op_from(3, 2, 2, &[&[1]]);
        let fs = one.fixed_space(DEFAULT_M_CAP).unwrap();
        assert_eq!((fs.dim(), fs.extension_degree_used), (1, 1));
        assert_fixed(&one, &fs);
        // c = 2 is not a square in GF(3)... but it is not a (q-1)-th power
        // issue here: 2 has order 2, so the solution of 2 x^2 = 1 lives in GF(9).
        let two = op_from(3, 1, 1, &[&[2]]);
        let fs = two.fixed_space(DEFAULT_M_CAP).unwrap();
        assert_eq!((fs.dim(), fs.extension_degree_used), (1, 2));
        assert_fixed(&two, &fs);
        // Oracle: enumerate x in GF(3^m) with 2 x^3 = x.
        for m in 1..=4 {
            let f = make_field(3, m).unwrap();
            let sols = f.elements().filter(|x| f.mul(&f.from_u64(2), &f.frobenius(x, 1)) == *x).count();
            assert_eq!(sols, if m % 2 == 0 { 3 } else { 1 });
        }
        let nil = op_from(5, 1, 1, &[&[0, 3], &[0, 0]]);
        let fs = nil.fixed_space(DEFAULT_M_CAP).unwrap();
        assert_eq!((fs.dim(), fs.stable_dim), (0, 0));
    }

    #[test]
    fn odd_extension_degree_is_found() {
        // 2 has order 3 in GF(7)^*, so fixed vectors of x -> 2 x^7 live in GF(7^3).
        let op = op_from(7, 1, 1, &[&[2]]);
        let fs = op.fixed_space(DEFAULT_M_CAP).unwrap();
        assert_eq!((fs.dim(), fs.extension_degree_used), (1, 3));
        assert_fixed(&op, &fs);
    }

    #[test]
    fn averaged_and_linearized_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut checked = 0;
        for (p, g, t) in [(3, 1, 1), (3, 2, 2), (5, 1, 1), (3, 2, 1), (2, 2, 1)] {
            for r in 1..=3 {
                for _ in 0..6 {
                    let op = random_op(&mut rng, p, g, t, r);
                    let Some(m) = op.required_extension_degree() else { continue };
                    if (m as usize) * g * r > 48 {
                        continue;
                    }
                    let fs = op.fixed_space(DEFAULT_M_CAP).unwrap();
                    assert!(fs.is_complete());
                    assert_fixed(&op, &fs);
                    let (_, lin) = op.linearized_fixed_vectors(m as usize).unwrap();
                    assert_eq!(lin.len(), fs.dim());
                    // Below the required degree the fixed vectors do not span.
                    if m > 1 {
                        let (_, low) = op.linearized_fixed_vectors(1).unwrap();
                        assert!(low.len() < fs.stable_dim || fs.stable_dim == 0);
                    }
                    checked += 1;
                }
            }
        }
        assert!(checked > 40);
    }

    #[test]
    fn normal_coordinates_beyond_cap() {
        let op = op_from(7, 1, 1, &[&[2]]);
        let fs = op.fixed_space(2).unwrap();
        assert!(matches!(fs.basis, FixedBasis::NormalCoordinates { degree: 3, .. }));
        assert_eq!(fs.dim(), 1);
        assert_fixed(&op, &fs);
        // Coefficients outside the twist field cannot use that model.
        let ctx = make_field(7, 2).unwrap();
        // (1 + t)^8 = 2 for t^2 = -1, so phi^2 = 2 on GF(49) and m* = 3.
        let c = ctx.from_coords(&[1, 1]).unwrap();
        let op = SemilinearOp::from_rows(&ctx, 1, vec![vec![c]]).unwrap();
        let m = op.required_extension_degree().unwrap();
        assert_eq!(m, 3);
        match op.fixed_space(1) {
            Err(SemilinearError::CapExceeded { required, partial, .. }) => {
                assert_eq!(required, Some(m));
                assert!(!partial.is_complete());
            }
            other => panic!("expected CapExceeded, got {other:?}"),
        }
    }

    #[test]
    fn matrix_order_matches_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for (p, g) in [(3, 1), (5, 1), (3, 2), (2, 3)] {
            let ctx = make_field(p, g).unwrap();
            for r in 1..=3 {
                for _ in 0..10 {
                    let k = Matrix::from_fn(r, r, |_, _| ctx.random(&mut rng));
                    if linalg::inverse(&ctx, &k).is_none() {
                        assert_eq!(matrix_order(&ctx, &k), None);
                        continue;
                    }
                    let id = linalg::identity(&ctx, r);
                    let mut cur = k.clone();
                    let mut n = 1u128;
                    while cur != id {
                        cur = linalg::mat_mul(&ctx, &cur, &k);
                        n += 1;
                    }
                    assert_eq!(matrix_order(&ctx, &k), Some(n));
                }
            }
        }
    }

    #[test]
    fn eigenvalue_examples() {
        let id = op_from(3, 2, 2, &[&[1, 0], &[0, 1]]);
        let ctx = id.ctx().clone();
        let v = vec![ctx.from_u64(2), ctx.generator()];
        assert_eq!(id.rank_one_eigenvalue(&v).unwrap(), ctx.one());
        let two = op_from(5, 1, 1, &[&[2]]);
        assert_eq!(two.rank_one_eigenvalue(&[two.ctx().one()]).unwrap(), two.ctx().from_u64(2));
        assert_eq!(
            id.rank_one_eigenvalue(&[ctx.zero(), ctx.zero()]).unwrap_err(),
            SemilinearError::ZeroVector
        );
        let swap = op_from(5, 1, 1, &[&[0, 1], &[1, 0]]);
        let f = swap.ctx().clone();
        assert_eq!(swap.rank_one_eigenvalue(&[f.one(), f.zero()]).unwrap_err(), SemilinearError::NotInvariant);
    }

    #[test]
    fn json_roundtrip() {
        let op = op_from(3, 2, 1, &[&[1, 2], &[0, 1]]);
        let s = serde_json::to_string(&op).unwrap();
        assert!(s.contains("\"twist_degree\":1"));
        let back: SemilinearOp = serde_json::from_str(&s).unwrap();
        assert_eq!(back, op);
        let bad = s.replace("\"twist_degree\":1", "\"twist_degree\":3");
        assert!(serde_json::from_str::<SemilinearOp>(&bad).is_err());
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn arb_op() -> impl Strategy<Value = SemilinearOp> {
        (prop::sample::select(vec![(3u64, 1usize, 1usize), (3, 2, 2), (3, 2, 1), (5, 1, 1), (2, 2, 1)]), 0usize..5)
            .prop_flat_map(|((p, g, t), r)| {
                let order = p.pow(g as u32);
                prop::collection::vec(0..order, r * r).prop_map(move |cells| {
                    let ctx = make_field(p, g).unwrap();
                    let m = Matrix::from_fn(r, r, |i, j| ctx.elem_from_index(cells[i * r + j]));
                    SemilinearOp::new(&ctx, t, m).unwrap()
                })
            })
    }

    proptest! {
        #[test]
        fn fitting_splits_the_space(op in arb_op()) {
            let ctx = op.ctx();
            let fd = op.fitting_decomposition();
            let r = op.dim();
            prop_assert_eq!(fd.stable_basis.len() + fd.nilpotent_basis.len(), r);
            let mut all = fd.stable_basis.clone();
            all.extend(fd.nilpotent_basis.iter().cloned());
            prop_assert_eq!(linalg::span_rank(ctx, &all), r);
            // phi is onto V_s and keeps V_eta.
            let images: Vec<_> = fd.stable_basis.iter().map(|v| op.apply(v).unwrap()).collect();
            prop_assert_eq!(linalg::span_rank(ctx, &images), fd.stable_basis.len());
            for w in &images {
                prop_assert!(linalg::in_span(ctx, &fd.stable_basis, w));
            }
            for v in &fd.nilpotent_basis {
                prop_assert!(linalg::in_span(ctx, &fd.nilpotent_basis, &op.apply(v).unwrap()));
            }
            prop_assert!(fd.nilpotency_index <= r);
            if !fd.nilpotent_basis.is_empty() {
                let mut cur = fd.nilpotent_basis.clone();
                for _ in 0..fd.nilpotency_index - 1 {
                    cur = cur.iter().map(|v| op.apply(v).unwrap()).collect();
                }
                prop_assert!(cur.iter().any(|v| !linalg::is_zero_vec(ctx, v)));
                let last: Vec<_> = cur.iter().map(|v| op.apply(v).unwrap()).collect();
                prop_assert!(last.iter().all(|v| linalg::is_zero_vec(ctx, v)));
            }
        }

        #[test]
        fn fixed_dimension_equals_stable_dimension(op in arb_op()) {
            let fs = match op.fixed_space(DEFAULT_M_CAP) {
                Ok(fs) => fs,
                Err(SemilinearError::CapExceeded { required, partial, .. }) => {
                    // Only coefficient fields larger than GF(q) lack the normal-basis fallback.
                    prop_assert!(op.twist_degree() < op.ctx().degree());
                    prop_assert!(required.is_none_or(|m| m > DEFAULT_M_CAP as u128));
                    prop_assert!(partial.dim() < partial.stable_dim);
                    return Ok(());
                }
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            };
            prop_assert_eq!(fs.dim(), fs.stable_dim);
            if let FixedBasis::Explicit { field, vectors } = &fs.basis {
                let emb = TowerEmbedding::new(op.ctx(), field).unwrap();
                let big = op.base_change(&emb).unwrap();
                for v in vectors {
                    prop_assert_eq!(&big.apply(v).unwrap(), v);
                }
            }
        }

        #[test]
        fn phi_minus_one_is_onto_after_extension(op in arb_op()) {
            // Over L = GF(p^(g m*)) the image of phi - 1 on V_s misses the
            // fixed-space dimension; after a further degree-p extension every
            // vector of V_s over L is hit.
            let Some(m) = op.required_extension_degree() else { return Ok(()) };
            let (p, g, r) = (op.ctx().p(), op.ctx().degree(), op.dim());
            let n = g * m as usize;
            prop_assume!(r * n * p as usize <= 60 && r > 0);
            let gfp = PrimeField { p };
            let l = make_field(p, n).unwrap();
            let big = make_field(p, n * p as usize).unwrap();
            let up = TowerEmbedding::new(&l, &big).unwrap();
            let op_big = op.base_change(&TowerEmbedding::new(op.ctx(), &big).unwrap()).unwrap();
            let lin = op_big.linearized_minus_identity();
            let fd = op.fitting_decomposition();
            let to_l = TowerEmbedding::new(op.ctx(), &l).unwrap();
            for b in &fd.stable_basis {
                for j in 0..n {
                    let mut c = l.zero();
                    c.0[j] = 1;
                    let target: Vec<u64> = b
                        .iter()
                        .flat_map(|x| up.embed_unchecked(&l.mul(&c, &to_l.embed_unchecked(x))).0.to_vec())
                        .collect();
                    prop_assert!(linalg::solve_linear_system(&gfp, &lin, &target).is_consistent());
                }
            }
            let op_l = op.base_change(&to_l).unwrap();
            let rank_l = linalg::rank(&gfp, &op_l.linearized_minus_identity());
            let t = op.twist_degree();
            prop_assert_eq!(rank_l, r * n - fd.stable_basis.len() * t);
        }
    }
}
