//! Projective hypersurfaces `{f = 0}` in `P^N` over GF(q).
//!
//! Points of `P^N(GF(q^e))` are enumerated through normalized representatives
//! (first nonzero coordinate equal to 1) in lexicographic order of the
//! coordinate index tuples, so `(0:...:0:1)` comes first and `(1:q-1:...)`
//! last. Every enumeration is checked against an evaluation budget before it
//! starts.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::ff::linalg;
use crate::ff::{make_field, FieldCtx, FieldElem, FieldError, TowerEmbedding};
use crate::poly::{MultiPoly, PolyError};

pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// `FROBWITT_BUDGET` if set and parseable, else [`DEFAULT_BUDGET`].
pub fn budget_from_env() -> u64 {
    std::env::var("FROBWITT_BUDGET")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .filter(|&b| b > 0)
        .unwrap_or(DEFAULT_BUDGET)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VarietyError {
    #[error("the defining polynomial is zero")]
    ZeroPolynomial,
    #[error("the defining polynomial is not homogeneous")]
    NotHomogeneous,
    #[error("a hypersurface needs at least two homogeneous coordinates")]
    TooFewVariables,
    #[error("enumeration needs {required} evaluations, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u64 },
    #[error("the polynomial is not invariant under the cyclic shift")]
    NotInvariant,
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypersurface {
    f: MultiPoly,
    degree: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PointCount {
    pub e: usize,
    pub count: u64,
}

/// The coordinate rotation `(x_0 : x_1 : ... : x_N) -> (x_1 : ... : x_N : x_0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CyclicAction {
    pub order: usize,
}

impl CyclicAction {
    pub fn new(order: usize) -> Self {
        CyclicAction { order }
    }

    pub fn apply(&self, x: &[FieldElem]) -> Vec<FieldElem> {
        let n = x.len();
        (0..n).map(|i| x[(i + 1) % n].clone()).collect()
    }

    /// `f(sigma x) = f(x)` identically.
    pub fn preserves(&self, f: &MultiPoly) -> bool {
        f.nvars() == self.order && f.cyclic_shift() == *f
    }
}

/// A point over `GF(q^e)`, coordinates in `field`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RationalPoint {
    pub e: usize,
    pub coords: Vec<FieldElem>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SmoothnessReport {
    pub e_max: usize,
    pub points_checked: u64,
    /// Lexicographically first singular point at the least degree where one exists.
    pub witness: Option<RationalPoint>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FixedPointsAtDegree {
    pub e: usize,
    pub ambient: Vec<Vec<FieldElem>>,
    pub on_variety: Vec<Vec<FieldElem>>,
}

fn binomial(n: i64, k: i64) -> u128 {
    if k < 0 || n < k || n < 0 {
        return 0;
    }
    let k = k.min(n - k) as u128;
    let n = n as u128;
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// `dim H^j(P^N, O(m))`.
fn h_projective(n: usize, j: usize, m: i64) -> u128 {
    let n = n as i64;
    if j == 0 {
        binomial(m + n, n)
    } else if j as i64 == n {
        binomial(-m - 1, n)
    } else {
        0
    }
}

/// Enumeration of normalized representatives of `P^N(L)`, `|L| = order`.
struct ProjectiveSpace<'a> {
    field: &'a FieldCtx,
    nvars: usize,
    order: u64,
    /// Block for leading position `k` covers `order^(N-k)` points; blocks are
    /// stored in enumeration order (`k = N` first).
    blocks: Vec<(usize, u64, u64)>,
}

impl<'a> ProjectiveSpace<'a> {
    fn new(field: &'a FieldCtx, nvars: usize) -> Option<Self> {
        let order = field.order()?;
        let mut blocks = Vec::with_capacity(nvars);
        let mut start = 0u64;
        for k in (0..nvars).rev() {
            let size = order.checked_pow((nvars - 1 - k) as u32)?;
            blocks.push((k, start, size));
            start = start.checked_add(size)?;
        }
        Some(ProjectiveSpace { field, nvars, order, blocks })
    }

    fn len(&self) -> u64 {
        self.blocks.last().map_or(0, |&(_, s, n)| s + n)
    }

    fn point(&self, idx: u64) -> Vec<FieldElem> {
        let &(k, start, _) = self
            .blocks
            .iter()
            .find(|&&(_, s, n)| idx >= s && idx < s + n)
            .expect("index in range");
        let mut rest = idx - start;
        let mut coords = vec![self.field.zero(); self.nvars];
        coords[k] = self.field.one();
        for c in coords[k + 1..].iter_mut().rev() {
            *c = self.field.elem_from_index(rest % self.order);
            rest /= self.order;
        }
        coords
    }
}

/// Evaluations needed to visit `P^N(GF(Q))`.
fn projective_size(order: u128, nvars: usize) -> Option<u128> {
    let mut total = 0u128;
    for k in 0..nvars {
        total = total.checked_add(order.checked_pow(k as u32)?)?;
    }
    Some(total)
}

fn check_budget(required: Option<u128>, budget: u64) -> Result<(), VarietyError> {
    match required {
        Some(r) if r <= budget as u128 => Ok(()),
        Some(r) => Err(VarietyError::BudgetExceeded { required: r, budget }),
        None => Err(VarietyError::BudgetExceeded { required: u128::MAX, budget }),
    }
}

const CHUNK: u64 = 4096;

impl Hypersurface {
    pub fn new(f: MultiPoly) -> Result<Self, VarietyError> {
        if f.is_zero() {
            return Err(VarietyError::ZeroPolynomial);
        }
        if f.nvars() < 2 {
            return Err(VarietyError::TooFewVariables);
        }
        let degree = f.homogeneous_degree().ok_or(VarietyError::NotHomogeneous)?;
        Ok(Hypersurface { f, degree })
    }

    pub fn poly(&self) -> &MultiPoly {
        &self.f
    }

    pub fn ctx(&self) -> &FieldCtx {
        self.f.ctx()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `N`, the dimension of the ambient projective space.
    pub fn ambient_dim(&self) -> usize {
        self.f.nvars() - 1
    }

    /// `GF(q^e)` together with the polynomial and its partials moved there.
    fn over_extension(&self, e: usize) -> Result<(FieldCtx, MultiPoly), VarietyError> {
        let base = self.ctx();
        let big = make_field(base.p(), base.degree() * e)?;
        let emb = TowerEmbedding::new(base, &big)?;
        Ok((big, self.f.base_change(&emb)?))
    }

    fn enumeration_size(&self, e: usize) -> Option<u128> {
        let q = self.ctx().order()? as u128;
        projective_size(q.checked_pow(e as u32)?, self.f.nvars())
    }

    /// `#X(GF(q^e))`.
    pub fn count_points(&self, e: usize, budget: u64) -> Result<PointCount, VarietyError> {
        check_budget(self.enumeration_size(e), budget)?;
        let (big, g) = self.over_extension(e)?;
        let space = ProjectiveSpace::new(&big, g.nvars()).expect("size checked against budget");
        let n = space.len();
        let chunks: Vec<u64> = (0..n.div_ceil(CHUNK)).collect();
        let count = chunks
            .par_iter()
            .map(|&c| {
                (c * CHUNK..((c + 1) * CHUNK).min(n))
                    .filter(|&i| big.is_zero(&g.eval_unchecked(&space.point(i))))
                    .count() as u64
            })
            .sum();
        Ok(PointCount { e, count })
    }

    /// The rational points over `GF(q^e)` in enumeration order.
    pub fn points(&self, e: usize, budget: u64) -> Result<(FieldCtx, Vec<Vec<FieldElem>>), VarietyError> {
        check_budget(self.enumeration_size(e), budget)?;
        let (big, g) = self.over_extension(e)?;
        let space = ProjectiveSpace::new(&big, g.nvars()).expect("size checked against budget");
        let pts = (0..space.len())
            .map(|i| space.point(i))
            .filter(|x| big.is_zero(&g.eval_unchecked(x)))
            .collect();
        Ok((big, pts))
    }

    /// Second strategy: nonzero zeros of `f` in `GF(q^e)^(N+1)`, divided by `q^e - 1`.
    pub fn count_points_via_cone(&self, e: usize, budget: u64) -> Result<PointCount, VarietyError> {
        let q = self.ctx().order().map(|q| q as u128);
        let required = q.and_then(|q| q.checked_pow(e as u32)?.checked_pow(self.f.nvars() as u32));
        check_budget(required, budget)?;
        let (big, g) = self.over_extension(e)?;
        let order = big.order().expect("budget bounds the field size");
        let total = required.expect("checked") as u64;
        let nv = g.nvars();
        let zeros = (1..total)
            .filter(|&idx| {
                let mut rest = idx;
                let x: Vec<FieldElem> = (0..nv)
                    .map(|_| {
                        let c = big.elem_from_index(rest % order);
                        rest /= order;
                        c
                    })
                    .collect();
                big.is_zero(&g.eval_unchecked(&x))
            })
            .count() as u64;
        Ok(PointCount { e, count: zeros / (order - 1) })
    }

    /// Searches `P^N(GF(q^e))`, `e <= e_max`, for a common zero of `f` and all
    /// its partial derivatives. Finding none is bounded evidence, not a proof.
    pub fn smoothness_probe(&self, e_max: usize, budget: u64) -> Result<SmoothnessReport, VarietyError> {
        let mut required = Some(0u128);
        for e in 1..=e_max {
            required = required.and_then(|r| r.checked_add(self.enumeration_size(e)?));
        }
        check_budget(required, budget)?;
        let mut checked = 0u64;
        for e in 1..=e_max {
            let (big, g) = self.over_extension(e)?;
            let partials: Vec<MultiPoly> =
                (0..g.nvars()).map(|i| g.partial_derivative(i)).collect::<Result<_, _>>()?;
            let space = ProjectiveSpace::new(&big, g.nvars()).expect("size checked against budget");
            let n = space.len();
            let chunks: Vec<u64> = (0..n.div_ceil(CHUNK)).collect();
            let singular = |x: &[FieldElem]| {
                big.is_zero(&g.eval_unchecked(x)) && partials.iter().all(|d| big.is_zero(&d.eval_unchecked(x)))
            };
            let first = chunks
                .par_iter()
                .filter_map(|&c| (c * CHUNK..((c + 1) * CHUNK).min(n)).find(|&i| singular(&space.point(i))))
                .min();
            checked += n;
            if let Some(i) = first {
                return Ok(SmoothnessReport {
                    e_max,
                    points_checked: checked,
                    witness: Some(RationalPoint { e, coords: space.point(i) }),
                });
            }
        }
        Ok(SmoothnessReport { e_max, points_checked: checked, witness: None })
    }

    /// Exact smoothness over the algebraic closure, when the linear algebra is
    /// small enough (`None` otherwise).
    ///
    /// The ideal `I = (f, x_j df/dx_i)` is generated in degree `d` and has the
    /// singular locus as zero set. If that set is empty, `I` contains a regular
    /// sequence of `N + 1` forms of degree `d` over the algebraic closure, so it
    /// contains every form of degree `D = (N + 1)(d - 1) + 1`; if it is not
    /// empty, no power of a coordinate nonvanishing at a singular point lies in
    /// `I`. The dimension of `I_D` does not change under field extension.
    pub fn is_smooth_exact(&self, max_columns: usize) -> Option<bool> {
        let nv = self.f.nvars();
        let d = self.degree;
        if d <= 1 {
            return Some(true);
        }
        let big_d = nv * (d - 1) + 1;
        let target = monomials(nv, big_d);
        if target.len() > max_columns {
            return None;
        }
        let mut gens = vec![self.f.clone()];
        for i in 0..nv {
            let di = self.f.partial_derivative(i).ok()?;
            for j in 0..nv {
                let g = MultiPoly::variable(self.ctx(), nv, j).mul(&di).ok()?;
                if !g.is_zero() {
                    gens.push(g);
                }
            }
        }
        let index: std::collections::HashMap<Vec<u16>, usize> =
            target.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let ctx = self.ctx();
        let mut rows = Vec::new();
        for m in monomials(nv, big_d - d) {
            let mono = MultiPoly::monomial(ctx, &m, ctx.one());
            for g in &gens {
                let prod = mono.mul(g).ok()?;
                let mut row = vec![ctx.zero(); target.len()];
                for (e, c) in prod.terms() {
                    row[index[e]] = c.clone();
                }
                rows.push(row);
            }
        }
        let rank = linalg::span_rank(ctx, &rows);
        Some(rank == target.len())
    }

    /// Fixed points of the rotation in `P^N(GF(q^e))` for each `e <= e_max`,
    /// and those lying on the hypersurface.
    pub fn sigma_fixed_points(
        &self,
        act: &CyclicAction,
        e_max: usize,
        budget: u64,
    ) -> Result<Vec<FixedPointsAtDegree>, VarietyError> {
        if !act.preserves(&self.f) {
            return Err(VarietyError::NotInvariant);
        }
        let mut required = Some(0u128);
        for e in 1..=e_max {
            required = required.and_then(|r| r.checked_add(self.enumeration_size(e)?));
        }
        check_budget(required, budget)?;
        let mut out = Vec::with_capacity(e_max);
        for e in 1..=e_max {
            let (big, g) = self.over_extension(e)?;
            let space = ProjectiveSpace::new(&big, g.nvars()).expect("size checked against budget");
            let ambient: Vec<Vec<FieldElem>> = (0..space.len())
                .map(|i| space.point(i))
                .filter(|x| proportional(&big, &act.apply(x), x))
                .collect();
            let on_variety = ambient.iter().filter(|x| big.is_zero(&g.eval_unchecked(x))).cloned().collect();
            out.push(FixedPointsAtDegree { e, ambient, on_variety });
        }
        Ok(out)
    }

    /// `(h^0, ..., h^(N-1))` of `O_X`, read off the long exact sequence of
    /// `0 -> O(-d) -> O -> O_X -> 0` on `P^N`.
    pub fn cohomology_dims(&self) -> Vec<u128> {
        cohomology_dims(self.ambient_dim(), self.degree)
    }
}

/// `(h^0, ..., h^(N-1))` of `O_X` for a degree-`d` hypersurface in `P^N`.
///
/// In the sequence `H^j(O(-d)) -> H^j(O) -> H^j(O_X) -> H^(j+1)(O(-d)) -> H^(j+1)(O)`
/// the outer maps are multiplication by `f`; for `d >= 1` each of them has zero
/// source or zero target, so `h^j(O_X) = coker + ker` splits into the two
/// neighbouring dimensions.
pub fn cohomology_dims(n: usize, d: usize) -> Vec<u128> {
    let d = d as i64;
    let mult_rank = |j: usize| -> u128 {
        let (src, dst) = (h_projective(n, j, -d), h_projective(n, j, 0));
        assert!(src == 0 || dst == 0, "multiplication by f between nonzero groups");
        0
    };
    (0..n)
        .map(|j| {
            let coker = h_projective(n, j, 0) - mult_rank(j);
            let ker = h_projective(n, j + 1, -d) - mult_rank(j + 1);
            coker + ker
        })
        .collect()
}

/// Exponent vectors of degree `d` in `n` variables, lexicographic.
pub fn monomials(n: usize, d: usize) -> Vec<Vec<u16>> {
    fn rec(n: usize, d: usize, prefix: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
        if prefix.len() + 1 == n {
            prefix.push(d as u16);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in 0..=d {
            prefix.push(k as u16);
            rec(n, d - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(n, d, &mut Vec::with_capacity(n), &mut out);
    }
    out
}

fn proportional(field: &FieldCtx, a: &[FieldElem], b: &[FieldElem]) -> bool {
    let Some(i) = b.iter().position(|x| !field.is_zero(x)) else {
        return false;
    };
    let Some(lambda) = field.div(&a[i], &b[i]) else {
        return false;
    };
    a.iter().zip(b).all(|(x, y)| *x == field.mul(&lambda, y))
}

/// Whether every coordinate of a normalized point lies in `GF(p^k)`.
pub fn rational_over(field: &FieldCtx, x: &[FieldElem], k: usize) -> bool {
    x.iter().all(|c| field.frobenius(c, k) == *c)
}
