//! Modules over `k[C]` for `C = Z/p` and `k` of characteristic `p`.
//!
//! A module is a vector space with the matrix `sigma` of a generator. In the
//! regular module the basis is `1, sigma, ..., sigma^(p-1)` and `Tr_C` is the
//! all-ones matrix, equal to `(sigma - 1)^(p-1)`.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::ff::linalg::{self, Matrix};
use crate::ff::{FieldCtx, FieldElem};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModrepError {
    #[error("sigma is not square")]
    NotSquare,
    #[error("sigma^p is not the identity")]
    NotOrderP,
    #[error("subspace is not sigma-stable")]
    NotStable,
    #[error("complex is not exact: {0}")]
    NotExact(String),
    #[error("module {0} of the complex is not free")]
    NotFree(usize),
    #[error("boundary {0} does not commute with sigma")]
    NotEquivariant(usize),
    #[error("Jordan type {0:?} is not a single parity block plus free blocks")]
    DecompositionMismatch(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CyclicModule {
    #[serde(skip)]
    ctx: FieldCtx,
    sigma: Matrix<FieldElem>,
}

fn mat_eq_identity(ctx: &FieldCtx, m: &Matrix<FieldElem>) -> bool {
    *m == linalg::identity(ctx, m.rows())
}

fn span_of_columns(ctx: &FieldCtx, m: &Matrix<FieldElem>) -> Vec<Vec<FieldElem>> {
    linalg::column_space(ctx, m)
}

fn std_basis(ctx: &FieldCtx, n: usize) -> Vec<Vec<FieldElem>> {
    (0..n).map(|i| linalg::identity(ctx, n).column(i)).collect()
}

/// Basis vectors of `sub` modulo `base`, as a list.
fn quotient_dim(ctx: &FieldCtx, base: &[Vec<FieldElem>], sub: &[Vec<FieldElem>]) -> (usize, Vec<Vec<FieldElem>>) {
    let reps = linalg::complement_in(ctx, base, sub);
    (reps.len(), reps)
}

impl CyclicModule {
    pub fn new(ctx: &FieldCtx, sigma: Matrix<FieldElem>) -> Result<Self, ModrepError> {
        if !sigma.is_square() {
            return Err(ModrepError::NotSquare);
        }
        if !mat_eq_identity(ctx, &linalg::mat_pow(ctx, &sigma, ctx.p())) {
            return Err(ModrepError::NotOrderP);
        }
        Ok(CyclicModule { ctx: ctx.clone(), sigma })
    }

    /// `k[C]` with `sigma` permuting the basis cyclically.
    pub fn regular(ctx: &FieldCtx) -> Self {
        let p = ctx.p() as usize;
        let sigma = Matrix::from_fn(p, p, |i, j| if i == (j + 1) % p { ctx.one() } else { ctx.zero() });
        CyclicModule { ctx: ctx.clone(), sigma }
    }

    pub fn trivial(ctx: &FieldCtx) -> Self {
        CyclicModule { ctx: ctx.clone(), sigma: linalg::identity(ctx, 1) }
    }

    pub fn zero(ctx: &FieldCtx) -> Self {
        CyclicModule { ctx: ctx.clone(), sigma: Matrix::from_fn(0, 0, |_, _| ctx.zero()) }
    }

    /// `sigma = 1 + N` with `N` a single nilpotent Jordan block.
    pub fn jordan_block(ctx: &FieldCtx, size: usize) -> Result<Self, ModrepError> {
        let sigma = Matrix::from_fn(size, size, |i, j| {
            if i == j || i == j + 1 {
                ctx.one()
            } else {
                ctx.zero()
            }
        });
        Self::new(ctx, sigma)
    }

    pub fn from_jordan_type(ctx: &FieldCtx, sizes: &[usize]) -> Result<Self, ModrepError> {
        let mut m = Self::zero(ctx);
        for &s in sizes {
            m = m.direct_sum(&Self::jordan_block(ctx, s)?);
        }
        Ok(m)
    }

    /// `M(n) = k[C] / (Tr_C)`.
    pub fn m_n(ctx: &FieldCtx) -> Self {
        let reg = Self::regular(ctx);
        let tr = reg.trace_matrix();
        reg.quotient(&span_of_columns(ctx, &tr)).expect("the trace image is an ideal")
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn dim(&self) -> usize {
        self.sigma.rows()
    }

    pub fn sigma(&self) -> &Matrix<FieldElem> {
        &self.sigma
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let (a, b) = (self.dim(), other.dim());
        let sigma = Matrix::from_fn(a + b, a + b, |i, j| match (i < a, j < a) {
            (true, true) => self.sigma.get(i, j).clone(),
            (false, false) => other.sigma.get(i - a, j - a).clone(),
            _ => self.ctx.zero(),
        });
        CyclicModule { ctx: self.ctx.clone(), sigma }
    }

    /// `Hom_k(M, k)` with `(sigma f)(m) = f(sigma^-1 m)`, i.e. the inverse transpose.
    pub fn dual(&self) -> Self {
        let inv = linalg::inverse(&self.ctx, &self.sigma).expect("sigma has finite order");
        CyclicModule { ctx: self.ctx.clone(), sigma: inv.transpose() }
    }

    /// The same module in the basis given by the columns of `change`.
    pub fn conjugate(&self, change: &Matrix<FieldElem>) -> Option<Self> {
        let inv = linalg::inverse(&self.ctx, change)?;
        let sigma = linalg::mat_mul(&self.ctx, &inv, &linalg::mat_mul(&self.ctx, &self.sigma, change));
        Some(CyclicModule { ctx: self.ctx.clone(), sigma })
    }

    fn minus_one(&self) -> Matrix<FieldElem> {
        linalg::mat_sub(&self.ctx, &self.sigma, &linalg::identity(&self.ctx, self.dim()))
    }

    /// `Tr_C = sum_i sigma^i`.
    pub fn trace_matrix(&self) -> Matrix<FieldElem> {
        let ctx = &self.ctx;
        let mut acc = linalg::zeros(ctx, self.dim(), self.dim());
        let mut pw = linalg::identity(ctx, self.dim());
        for _ in 0..ctx.p() {
            acc = linalg::mat_add(ctx, &acc, &pw);
            pw = linalg::mat_mul(ctx, &pw, &self.sigma);
        }
        acc
    }

    pub fn invariants(&self) -> Vec<Vec<FieldElem>> {
        linalg::kernel(&self.ctx, &self.minus_one())
    }

    pub fn is_free(&self) -> bool {
        let p = self.ctx.p() as usize;
        self.jordan_type().iter().all(|&s| s == p)
    }

    /// Block sizes of `sigma - 1`, largest first, from the ranks of its powers.
    pub fn jordan_type(&self) -> Vec<usize> {
        let ctx = &self.ctx;
        let p = ctx.p() as usize;
        let n = self.minus_one();
        let mut ranks = vec![self.dim()];
        let mut pw = linalg::identity(ctx, self.dim());
        for _ in 0..=p {
            pw = linalg::mat_mul(ctx, &pw, &n);
            ranks.push(linalg::rank(ctx, &pw));
        }
        let mut sizes = Vec::new();
        for s in (1..=p).rev() {
            let at_least = |j: usize| ranks[j - 1] - ranks[j];
            let count = at_least(s) - at_least(s + 1);
            sizes.extend(std::iter::repeat_n(s, count));
        }
        sizes
    }

    /// The submodule spanned by `basis`, in those coordinates.
    pub fn submodule(&self, basis: &[Vec<FieldElem>]) -> Result<Self, ModrepError> {
        let ctx = &self.ctx;
        let cols = basis
            .iter()
            .map(|b| linalg::coordinates(ctx, basis, &linalg::mat_vec(ctx, &self.sigma, b)).ok_or(ModrepError::NotStable))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CyclicModule { ctx: ctx.clone(), sigma: Matrix::from_columns(basis.len(), &cols) })
    }

    /// `M / S` for a sigma-stable `S`, on a basis of coset representatives
    /// chosen among the standard vectors.
    pub fn quotient(&self, sub: &[Vec<FieldElem>]) -> Result<Self, ModrepError> {
        let ctx = &self.ctx;
        let sub = linalg::independent_subset(ctx, sub);
        let reps = linalg::complement_in(ctx, &sub, &std_basis(ctx, self.dim()));
        let mut full = reps.clone();
        full.extend(sub.iter().cloned());
        let k = reps.len();
        let mut cols = Vec::with_capacity(k);
        for r in &reps {
            let c = linalg::coordinates(ctx, &full, &linalg::mat_vec(ctx, &self.sigma, r)).expect("full basis");
            cols.push(c[..k].to_vec());
        }
        for s in &sub {
            if !linalg::in_span(ctx, &sub, &linalg::mat_vec(ctx, &self.sigma, s)) {
                return Err(ModrepError::NotStable);
            }
        }
        Ok(CyclicModule { ctx: ctx.clone(), sigma: Matrix::from_columns(k, &cols) })
    }

    /// Tate cohomology: `M^C / Tr M` in even degree, `ker Tr / (sigma - 1) M` in odd degree.
    pub fn tate_cohomology(&self, i: i64) -> TateGroup {
        let ctx = &self.ctx;
        let tr = self.trace_matrix();
        let (top, bottom) = if i.rem_euclid(2) == 0 {
            (self.invariants(), span_of_columns(ctx, &tr))
        } else {
            (linalg::kernel(ctx, &tr), span_of_columns(ctx, &self.minus_one()))
        };
        let (dim, representatives) = quotient_dim(ctx, &bottom, &top);
        TateGroup { degree: i, dim, representatives }
    }

    /// `dim Ext^m_{k[C]}(M, k)` for `m >= 1`, as Tate cohomology of the dual.
    pub fn ext_dim(&self, m: usize) -> usize {
        assert!(m >= 1, "Ext is computed for positive degrees");
        self.dual().tate_cohomology(m as i64).dim
    }

    /// Generators of `M` as a module: lifts of a basis of `M / (sigma - 1) M`.
    fn generators(&self) -> Vec<Vec<FieldElem>> {
        let rad = span_of_columns(&self.ctx, &self.minus_one());
        linalg::complement_in(&self.ctx, &rad, &std_basis(&self.ctx, self.dim()))
    }

    /// The map `k[C]^t -> M` sending the `j`-th copy's basis vector `sigma^i` to `sigma^i g_j`.
    fn free_cover(&self) -> (usize, Matrix<FieldElem>) {
        let p = self.ctx.p() as usize;
        let gens = self.generators();
        let mut cols = Vec::with_capacity(gens.len() * p);
        for g in &gens {
            let mut v = g.clone();
            for _ in 0..p {
                cols.push(v.clone());
                v = linalg::mat_vec(&self.ctx, &self.sigma, &v);
            }
        }
        (gens.len(), Matrix::from_columns(self.dim(), &cols))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TateGroup {
    pub degree: i64,
    pub dim: usize,
    pub representatives: Vec<Vec<FieldElem>>,
}

fn free_module(ctx: &FieldCtx, t: usize) -> CyclicModule {
    let reg = CyclicModule::regular(ctx);
    (0..t).fold(CyclicModule::zero(ctx), |acc, _| acc.direct_sum(&reg))
}

/// `dim Ext^m(M, k)` from an explicit free resolution `P_. -> M` and the cochain
/// complex `Hom_{k[C]}(P_., k)`, where a map from `k[C]^t` is its values on the
/// `t` generators.
pub fn ext_dim_by_resolution(module: &CyclicModule, m: usize) -> usize {
    let ctx = module.ctx();
    let p = ctx.p() as usize;
    // ranks[i] = t_i; aug[i] is the t_{i+1} x t_i matrix of Hom(d_{i+1}, k).
    let mut ranks = Vec::new();
    let mut aug: Vec<Matrix<FieldElem>> = Vec::new();
    let mut current = module.clone();
    let mut embed: Option<Matrix<FieldElem>> = None;
    let mut prev_t = 0;
    for level in 0..=m + 1 {
        let (t, cover) = current.free_cover();
        if let Some(b) = &embed {
            let d = linalg::mat_mul(ctx, b, &cover);
            aug.push(Matrix::from_fn(t, prev_t, |jn, jo| {
                (0..p).fold(ctx.zero(), |acc, i| ctx.add(&acc, d.get(jo * p + i, jn * p)))
            }));
        }
        ranks.push(t);
        prev_t = t;
        if level == m + 1 {
            break;
        }
        let ker = linalg::kernel(ctx, &cover);
        let free = free_module(ctx, t);
        let next = free.submodule(&ker).expect("kernels of module maps are submodules");
        embed = Some(Matrix::from_columns(p * t, &ker));
        current = next;
    }
    let rank = |a: &Matrix<FieldElem>| if a.rows() == 0 || a.cols() == 0 { 0 } else { linalg::rank(ctx, a) };
    ranks[m] - rank(&aug[m]) - rank(&aug[m - 1])
}

/// `0 -> k -> P_0 -> ... -> P_n -> M -> 0` with every `P_i` free.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainComplexKC {
    pub modules: Vec<CyclicModule>,
    /// `boundaries[i]: P_i -> P_(i+1)`.
    pub boundaries: Vec<Matrix<FieldElem>>,
}

fn image(ctx: &FieldCtx, m: &Matrix<FieldElem>) -> Vec<Vec<FieldElem>> {
    if m.rows() == 0 || m.cols() == 0 {
        Vec::new()
    } else {
        span_of_columns(ctx, m)
    }
}

fn image_of(ctx: &FieldCtx, m: &Matrix<FieldElem>, vs: &[Vec<FieldElem>]) -> Vec<Vec<FieldElem>> {
    let imgs: Vec<_> = vs
        .iter()
        .map(|v| linalg::mat_vec(ctx, m, v))
        .filter(|v| !linalg::is_zero_vec(ctx, v))
        .collect();
    linalg::independent_subset(ctx, &imgs)
}

fn kernel_of(ctx: &FieldCtx, m: &Matrix<FieldElem>) -> Vec<Vec<FieldElem>> {
    if m.cols() == 0 {
        Vec::new()
    } else if m.rows() == 0 {
        std_basis(ctx, m.cols())
    } else {
        linalg::kernel(ctx, m)
    }
}

/// The spliced complex with boundaries alternating `sigma - 1` and `Tr_C`,
/// with `n + 1` copies of `k[C]`. The left kernel is `k Tr_C`; the right
/// cokernel is `k` for odd `n` and `M(n)` for even `n`.
pub fn build_periodic_complex(ctx: &FieldCtx, n: usize) -> ChainComplexKC {
    assert!(n >= 1, "complex length must be positive");
    let reg = CyclicModule::regular(ctx);
    let a = reg.minus_one();
    let tr = reg.trace_matrix();
    let boundaries = (0..n).map(|i| if i % 2 == 0 { a.clone() } else { tr.clone() }).collect();
    ChainComplexKC { modules: vec![reg; n + 1], boundaries }
}

impl ChainComplexKC {
    pub fn ctx(&self) -> &FieldCtx {
        self.modules[0].ctx()
    }

    /// Index of the last module.
    pub fn length(&self) -> usize {
        self.modules.len() - 1
    }

    /// Adds the exact summand `0 -> k[C] -id-> k[C] -> 0` at positions `i`, `i + 1`.
    pub fn with_free_summand(&self, i: usize) -> Self {
        assert!(i < self.length(), "summand position out of range");
        let ctx = self.ctx().clone();
        let reg = CyclicModule::regular(&ctx);
        let p = reg.dim();
        let modules: Vec<_> = self
            .modules
            .iter()
            .enumerate()
            .map(|(j, m)| if j == i || j == i + 1 { m.direct_sum(&reg) } else { m.clone() })
            .collect();
        let boundaries = self
            .boundaries
            .iter()
            .enumerate()
            .map(|(j, d)| {
                let (r0, c0) = (self.modules[j + 1].dim(), self.modules[j].dim());
                let (rows, cols) = (modules[j + 1].dim(), modules[j].dim());
                Matrix::from_fn(rows, cols, |r, c| {
                    if r < r0 && c < c0 {
                        d.get(r, c).clone()
                    } else if j == i && r >= r0 && c >= c0 && r - r0 == c - c0 && r - r0 < p {
                        ctx.one()
                    } else {
                        ctx.zero()
                    }
                })
            })
            .collect();
        ChainComplexKC { modules, boundaries }
    }

    /// The left kernel `ker d_0` as a module.
    pub fn left_end(&self) -> CyclicModule {
        let k = kernel_of(self.ctx(), &self.boundaries[0]);
        self.modules[0].submodule(&k).expect("kernel of an equivariant map")
    }

    /// The right cokernel `P_n / im d_(n-1)`.
    pub fn right_end(&self) -> CyclicModule {
        let n = self.length();
        self.modules[n].quotient(&image(self.ctx(), &self.boundaries[n - 1])).expect("image of an equivariant map")
    }

    /// Checks freeness, equivariance, `d d = 0`, interior exactness and a
    /// one-dimensional trivial left kernel.
    pub fn validate(&self) -> Result<(), ModrepError> {
        let ctx = self.ctx();
        for (i, m) in self.modules.iter().enumerate() {
            if !m.is_free() {
                return Err(ModrepError::NotFree(i));
            }
        }
        for (i, d) in self.boundaries.iter().enumerate() {
            let lhs = linalg::mat_mul(ctx, d, self.modules[i].sigma());
            let rhs = linalg::mat_mul(ctx, self.modules[i + 1].sigma(), d);
            if lhs != rhs {
                return Err(ModrepError::NotEquivariant(i));
            }
        }
        for i in 1..self.boundaries.len() {
            let dd = linalg::mat_mul(ctx, &self.boundaries[i], &self.boundaries[i - 1]);
            if !linalg::is_zero_matrix(ctx, &dd) {
                return Err(ModrepError::NotExact(format!("d_{i} d_{} != 0", i - 1)));
            }
            let rk_in = linalg::rank(ctx, &self.boundaries[i - 1]);
            let rk_out = linalg::rank(ctx, &self.boundaries[i]);
            if rk_in + rk_out != self.modules[i].dim() {
                return Err(ModrepError::NotExact(format!("homology at P_{i}")));
            }
        }
        if self.left_end().jordan_type() != vec![1] {
            return Err(ModrepError::NotExact("left kernel is not k".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LReport {
    pub l_dim: usize,
    pub lprime_dim: usize,
    pub l_basis: Vec<Vec<FieldElem>>,
    pub lprime_basis: Vec<Vec<FieldElem>>,
}

/// `L = (d P_(n-1) ∩ P_n^C) / d(P_(n-1)^C)` and
/// `L' = (d P_n ∩ P_(n+1)^C) / d(P_n^C)`, where `P_n -> P_(n+1)` is the
/// cokernel map followed by an embedding of `M` into a free module.
///
/// The embedding sends `m` to `sum_i lambda(sigma^-i m) sigma^i` in one copy
/// of `k[C]` per coordinate functional `lambda` of `M`.
pub fn compute_l_lprime(cx: &ChainComplexKC) -> Result<LReport, ModrepError> {
    cx.validate()?;
    let ctx = cx.ctx();
    let n = cx.length();
    let d_last = &cx.boundaries[n - 1];
    let pn = &cx.modules[n];
    let pn1 = &cx.modules[n - 1];
    let img = image(ctx, d_last);
    let inter = linalg::intersect(ctx, pn.dim(), &img, &pn.invariants());
    let low = image_of(ctx, d_last, &pn1.invariants());
    let (l_dim, l_basis) = quotient_dim(ctx, &low, &inter);

    let ext = extension_map(cx);
    let next = free_module(ctx, cx.right_end().dim());
    let img2 = image(ctx, &ext);
    let inter2 = linalg::intersect(ctx, next.dim(), &img2, &next.invariants());
    let low2 = image_of(ctx, &ext, &pn.invariants());
    let (lprime_dim, lprime_basis) = quotient_dim(ctx, &low2, &inter2);
    Ok(LReport { l_dim, lprime_dim, l_basis, lprime_basis })
}

/// `P_n -> M -> k[C]^(dim M)`.
fn extension_map(cx: &ChainComplexKC) -> Matrix<FieldElem> {
    let ctx = cx.ctx();
    let n = cx.length();
    let pn = &cx.modules[n];
    let p = ctx.p() as usize;
    let img = linalg::independent_subset(ctx, &image(ctx, &cx.boundaries[n - 1]));
    let reps = linalg::complement_in(ctx, &img, &std_basis(ctx, pn.dim()));
    let m = cx.right_end();
    let sinv = linalg::inverse(ctx, m.sigma()).expect("sigma has finite order");
    let mut full = reps.clone();
    full.extend(img.iter().cloned());
    let k = reps.len();
    let cols: Vec<Vec<FieldElem>> = (0..pn.dim())
        .map(|c| {
            let e = linalg::identity(ctx, pn.dim()).column(c);
            let coords = linalg::coordinates(ctx, &full, &e).expect("full basis");
            let mut v: Vec<FieldElem> = coords[..k].to_vec();
            let mut out = vec![ctx.zero(); p * k];
            for i in 0..p {
                for (lam, slot) in v.iter().enumerate() {
                    out[lam * p + i] = slot.clone();
                }
                v = linalg::mat_vec(ctx, &sinv, &v);
            }
            out
        })
        .collect();
    Matrix::from_columns(p * k, &cols)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: usize,
    pub actual: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParityReport {
    pub odd: bool,
    pub jordan_type: Vec<usize>,
    pub checks: Vec<Check>,
}

impl ParityReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Module-level dimension bookkeeping for `H = M(n) ⊕ free`, where the
/// non-free block has size 1 for odd `n` and `p - 1` for even `n`.
pub fn verify_parity_module(module: &CyclicModule, odd: bool) -> Result<ParityReport, ModrepError> {
    let ctx = module.ctx();
    let p = ctx.p() as usize;
    let jt = module.jordan_type();
    let nonfree: Vec<usize> = jt.iter().copied().filter(|&s| s != p).collect();
    let block = if odd { 1 } else { p - 1 };
    let expected = match nonfree.as_slice() {
        [] => 0,
        [s] if *s == block => 1,
        _ => return Err(ModrepError::DecompositionMismatch(jt)),
    };
    let mut checks = Vec::new();
    let mut push = |name: &str, want: usize, got: usize| {
        checks.push(Check { name: name.into(), expected: want, actual: got, pass: want == got })
    };
    let dual = module.dual();
    let h0 = dual.tate_cohomology(0).dim;
    push("dual_invariants_mod_trace", expected, h0);
    push("ext_odd_degree", expected, module.ext_dim(1));
    push("ext_even_degree", expected, module.ext_dim(2));
    push("tate_even", expected, module.tate_cohomology(0).dim);
    push("tate_odd", expected, module.tate_cohomology(1).dim);
    let minus_one = module.minus_one();
    let coinv = module.dim() - if module.dim() == 0 { 0 } else { linalg::rank(ctx, &minus_one) };
    let free_blocks = jt.len() - nonfree.len();
    push("coinvariants_beyond_free", expected, coinv - free_blocks);
    let tr_img = image(ctx, &module.trace_matrix());
    let inter = linalg::intersect(ctx, module.dim(), &module.invariants(), &tr_img);
    push("trace_image_inside_invariants", tr_img.len(), inter.len());
    let reg = CyclicModule::regular(ctx);
    push("trace_line", 1, linalg::rank(ctx, &reg.trace_matrix()));
    Ok(ParityReport { odd, jordan_type: jt, checks })
}

/// A random module: blocks of random sizes in `1..=p`, then a random change of basis.
pub fn random_module<R: Rng + ?Sized>(ctx: &FieldCtx, max_blocks: usize, rng: &mut R) -> CyclicModule {
    let p = ctx.p() as usize;
    let blocks = rng.gen_range(1..=max_blocks);
    let sizes: Vec<usize> = (0..blocks).map(|_| rng.gen_range(1..=p)).collect();
    let m = CyclicModule::from_jordan_type(ctx, &sizes).expect("blocks of size at most p");
    loop {
        let change = Matrix::from_fn(m.dim(), m.dim(), |_, _| ctx.random(rng));
        if let Some(c) = m.conjugate(&change) {
            return c;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::make_field;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gf(p: u64) -> FieldCtx {
        make_field(p, 1).unwrap()
    }

    #[test]
    fn jordan_types() {
        let k = gf(3);
        assert_eq!(CyclicModule::regular(&k).jordan_type(), vec![3]);
        assert_eq!(CyclicModule::trivial(&k).jordan_type(), vec![1]);
        assert_eq!(CyclicModule::m_n(&k).jordan_type(), vec![2]);
        assert_eq!(CyclicModule::m_n(&gf(5)).jordan_type(), vec![4]);
        let m = CyclicModule::from_jordan_type(&k, &[1, 3, 2, 2]).unwrap();
        assert_eq!(m.jordan_type(), vec![3, 2, 2, 1]);
        let bad = Matrix::from_rows(vec![vec![k.from_u64(2)]]);
        assert_eq!(CyclicModule::new(&k, bad), Err(ModrepError::NotOrderP));
    }

    #[test]
    fn trace_is_a_power_of_sigma_minus_one() {
        for p in [3, 5, 7] {
            let k = gf(p);
            let reg = CyclicModule::regular(&k);
            let pw = linalg::mat_pow(&k, &reg.minus_one(), p - 1);
            assert_eq!(reg.trace_matrix(), pw);
        }
    }

    #[test]
    fn tate_examples() {
        let k = gf(3);
        for i in -3..4 {
            assert_eq!(CyclicModule::regular(&k).tate_cohomology(i).dim, 0);
            assert_eq!(CyclicModule::trivial(&k).tate_cohomology(i).dim, 1);
            assert_eq!(CyclicModule::m_n(&k).tate_cohomology(i).dim, 1);
        }
    }

    #[test]
    fn ext_examples() {
        let k = gf(3);
        let reg = CyclicModule::regular(&k);
        let m = CyclicModule::trivial(&k).direct_sum(&reg).direct_sum(&reg);
        for deg in 1..5 {
            assert_eq!(m.ext_dim(deg), 1);
            assert_eq!(reg.ext_dim(deg), 0);
            assert_eq!(CyclicModule::m_n(&k).ext_dim(deg), 1);
        }
        assert_eq!(CyclicModule::m_n(&k).dual().jordan_type(), vec![2]);
    }

    #[test]
    fn resolution_matches_tate() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for p in [3, 5] {
            let k = gf(p);
            for _ in 0..10 {
                let m = random_module(&k, 3, &mut rng);
                for deg in 1..4 {
                    assert_eq!(ext_dim_by_resolution(&m, deg), m.ext_dim(deg), "{:?}", m.jordan_type());
                }
            }
        }
    }

    #[test]
    fn periodic_complexes() {
        let k = gf(3);
        let c1 = build_periodic_complex(&k, 1);
        c1.validate().unwrap();
        assert_eq!(c1.right_end().jordan_type(), vec![1]);
        let c2 = build_periodic_complex(&k, 2);
        assert_eq!(c2.boundaries[1], CyclicModule::regular(&k).trace_matrix());
        assert_eq!(c2.right_end().jordan_type(), vec![2]);
        for n in 1..5 {
            let c = build_periodic_complex(&k, n);
            for i in 1..n {
                let r = linalg::rank(&k, &c.boundaries[i - 1]) + linalg::rank(&k, &c.boundaries[i]);
                assert_eq!(r, 3);
            }
        }
    }

    #[test]
    fn l_and_lprime() {
        for p in [3, 5] {
            let k = gf(p);
            for n in 1..5 {
                let c = build_periodic_complex(&k, n);
                let r = compute_l_lprime(&c).unwrap();
                assert_eq!((r.l_dim, r.lprime_dim), (1, 1));
                for i in 0..n {
                    let s = c.with_free_summand(i);
                    s.validate().unwrap();
                    let r = compute_l_lprime(&s).unwrap();
                    assert_eq!((r.l_dim, r.lprime_dim), (1, 1));
                }
            }
        }
    }

    #[test]
    fn broken_complexes_are_rejected() {
        let k = gf(3);
        let mut c = build_periodic_complex(&k, 2);
        c.boundaries[1] = linalg::zeros(&k, 3, 3);
        assert!(matches!(compute_l_lprime(&c), Err(ModrepError::NotExact(_))));
        let mut c = build_periodic_complex(&k, 1);
        c.modules[1] = CyclicModule::from_jordan_type(&k, &[2, 1]).unwrap();
        assert!(matches!(c.validate(), Err(ModrepError::NotFree(1))));
    }

    #[test]
    fn parity_reports() {
        let k = gf(3);
        let reg = CyclicModule::regular(&k);
        let odd = CyclicModule::trivial(&k).direct_sum(&reg).direct_sum(&reg);
        let r = verify_parity_module(&odd, true).unwrap();
        assert!(r.all_pass());
        assert_eq!(r.checks[0].actual, 1);
        let even = CyclicModule::m_n(&k).direct_sum(&reg);
        assert!(verify_parity_module(&even, false).unwrap().all_pass());
        let free = reg.direct_sum(&reg);
        let r = verify_parity_module(&free, true).unwrap();
        assert!(r.all_pass());
        assert!(r.checks.iter().take(6).all(|c| c.actual == 0));
        assert!(matches!(verify_parity_module(&even, true), Err(ModrepError::DecompositionMismatch(_))));
    }

    #[test]
    fn works_over_extension_fields() {
        let k = make_field(3, 2).unwrap();
        let c = build_periodic_complex(&k, 3);
        let r = compute_l_lprime(&c).unwrap();
        assert_eq!((r.l_dim, r.lprime_dim), (1, 1));
        assert_eq!(CyclicModule::m_n(&k).ext_dim(3), 1);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn jordan_type_is_conjugation_invariant(seed in any::<u64>(), p in prop::sample::select(vec![3u64, 5])) {
                let k = gf(p);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let m = random_module(&k, 3, &mut rng);
                let n = m.dim();
                let change = Matrix::from_fn(n, n, |_, _| k.random(&mut rng));
                if let Some(c) = m.conjugate(&change) {
                    prop_assert_eq!(c.jordan_type(), m.jordan_type());
                }
            }

            #[test]
            fn tate_is_two_periodic(seed in any::<u64>(), p in prop::sample::select(vec![3u64, 5])) {
                let k = gf(p);
                let m = random_module(&k, 3, &mut ChaCha8Rng::seed_from_u64(seed));
                for i in -2..3 {
                    prop_assert_eq!(m.tate_cohomology(i).dim, m.tate_cohomology(i + 2).dim);
                }
                let nonfree = m.jordan_type().iter().filter(|&&s| s != p as usize).count();
                prop_assert_eq!(m.tate_cohomology(0).dim, nonfree);
            }
        }
    }
}
