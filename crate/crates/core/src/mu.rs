//! Elliptic curves `y^2 = x^3 + a2 x^2 + a4 x + a6` in odd characteristic:
//! Hasse invariant, trace of Frobenius, and the invariant `mu`.
//!
//! For an ordinary curve `mu` is the Hasse invariant of the q-power Frobenius,
//! `1 - a_q T` reduces to `1 - mu T` mod p, and `mu^-1` is the zero of `zeta1`.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::ff::linalg::Matrix;
use crate::ff::{upoly, FieldCtx, FieldElem};
use crate::hassewitt::{self, HasseWittError};
use crate::poly::{MultiPoly, PolyError};
use crate::semilinear::{SemilinearError, SemilinearOp};
use crate::variety::{Hypersurface, VarietyError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MuError {
    #[error("characteristic 2 is not supported")]
    EvenCharacteristic,
    #[error("the curve is singular")]
    Singular,
    #[error("enumeration needs {required} points, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u64 },
    #[error(transparent)]
    HasseWitt(#[from] HasseWittError),
    #[error(transparent)]
    Semilinear(#[from] SemilinearError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Variety(#[from] VarietyError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EllipticCurve {
    #[serde(skip)]
    ctx: FieldCtx,
    pub a2: FieldElem,
    pub a4: FieldElem,
    pub a6: FieldElem,
}

impl EllipticCurve {
    pub fn new(ctx: &FieldCtx, a2: FieldElem, a4: FieldElem, a6: FieldElem) -> Result<Self, MuError> {
        if ctx.p() == 2 {
            return Err(MuError::EvenCharacteristic);
        }
        let e = EllipticCurve { ctx: ctx.clone(), a2, a4, a6 };
        if ctx.is_zero(&e.discriminant()) {
            return Err(MuError::Singular);
        }
        Ok(e)
    }

    /// `y^2 = x^3 + a x + b`.
    pub fn short(ctx: &FieldCtx, a: FieldElem, b: FieldElem) -> Result<Self, MuError> {
        Self::new(ctx, ctx.zero(), a, b)
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    /// `-b2^2 b8 - 8 b4^3 - 27 b6^2 + 9 b2 b4 b6` with `a1 = a3 = 0`.
    pub fn discriminant(&self) -> FieldElem {
        let k = &self.ctx;
        let c = |n: i64| k.from_i64(n);
        let b2 = k.mul(&c(4), &self.a2);
        let b4 = k.mul(&c(2), &self.a4);
        let b6 = k.mul(&c(4), &self.a6);
        let b8 = k.sub(&k.mul(&c(4), &k.mul(&self.a2, &self.a6)), &k.square(&self.a4));
        let t1 = k.neg(&k.mul(&k.square(&b2), &b8));
        let t2 = k.mul(&c(8), &k.mul(&b4, &k.square(&b4)));
        let t3 = k.mul(&c(27), &k.square(&b6));
        let t4 = k.mul(&c(9), &k.mul(&b2, &k.mul(&b4, &b6)));
        k.add(&k.sub(&k.sub(&t1, &t2), &t3), &t4)
    }

    /// `g(x) = x^3 + a2 x^2 + a4 x + a6`, constant term first.
    pub fn rhs(&self) -> Vec<FieldElem> {
        vec![self.a6.clone(), self.a4.clone(), self.a2.clone(), self.ctx.one()]
    }

    /// Coefficient of `x^(p-1)` in `g^((p-1)/2)`: the p-power Hasse-Witt entry.
    pub fn hasse_p(&self) -> FieldElem {
        let p = self.ctx.p();
        let g = upoly::pow(&self.ctx, &self.rhs(), (p - 1) / 2);
        upoly::coeff(&self.ctx, &g, (p - 1) as usize)
    }

    /// Eigenvalue of the q-power Frobenius on `H^1(O_E)`: `c c^p ... c^(p^(f-1))`.
    pub fn hasse_invariant(&self) -> FieldElem {
        self.ctx.twisted_norm(&self.hasse_p(), self.ctx.degree())
    }

    pub fn is_ordinary(&self) -> bool {
        !self.ctx.is_zero(&self.hasse_p())
    }

    /// `#E(GF(q))` by counting square roots of `g(x)`, plus the point at infinity.
    pub fn point_count(&self, budget: u64) -> Result<u64, MuError> {
        let k = &self.ctx;
        let q = match k.order() {
            Some(q) if q <= budget => q,
            _ => {
                let q = (k.p() as u128).pow(k.degree() as u32);
                return Err(MuError::BudgetExceeded { required: q, budget });
            }
        };
        let mut roots = vec![0u64; q as usize];
        for y in k.elements() {
            roots[k.elem_index(&k.square(&y)) as usize] += 1;
        }
        let g = self.rhs();
        let affine: u64 = k.elements().map(|x| roots[k.elem_index(&upoly::eval(k, &g, &x)) as usize]).sum();
        Ok(affine + 1)
    }

    /// `a_q = q + 1 - #E(GF(q))`; asserts the Weil bound.
    pub fn trace_of_frobenius(&self, budget: u64) -> Result<i64, MuError> {
        let n = self.point_count(budget)?;
        let q = self.ctx.order().expect("counted fields have a u64 order");
        let a = q as i64 + 1 - n as i64;
        assert!((a as i128).pow(2) <= 4 * q as i128, "Weil bound violated: a = {a}, q = {q}");
        Ok(a)
    }

    /// `y^2 z - x^3 - a2 x^2 z - a4 x z^2 - a6 z^3` in variables `(x, y, z)`.
    pub fn projectivize(&self) -> Hypersurface {
        let k = &self.ctx;
        let terms = vec![
            (vec![0, 2, 1], k.one()),
            (vec![3, 0, 0], k.neg(&k.one())),
            (vec![2, 0, 1], k.neg(&self.a2)),
            (vec![1, 0, 2], k.neg(&self.a4)),
            (vec![0, 0, 3], k.neg(&self.a6)),
        ];
        let f = MultiPoly::from_terms(k, 3, terms).expect("three variables");
        Hypersurface::new(f).expect("nonzero cubic")
    }

    /// Dimension of the Frobenius-fixed part of `H^1(O_E)`: the fixed space of
    /// `x -> c x^p`.
    pub fn etale_h1_dim(&self, m_cap: usize) -> Result<usize, MuError> {
        let op = SemilinearOp::new(&self.ctx, 1, Matrix::from_rows(vec![vec![self.hasse_p()]]))?;
        let fixed = op.fixed_space(m_cap)?;
        Ok(fixed.dim())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MuReport {
    pub p: u64,
    pub q: u64,
    /// Hasse invariant of the q-power Frobenius.
    pub c_p: FieldElem,
    pub point_count: u64,
    pub a_trace: i64,
    pub ordinary: bool,
    /// `c_p` when ordinary; absent for supersingular curves.
    pub mu: Option<FieldElem>,
    /// `a_q mod p` equals `c_p`.
    pub trace_matches_hasse: bool,
    /// Constant term first.
    pub zeta1: Vec<FieldElem>,
    /// Ordinary: `zeta1(mu^-1) = 0`. Supersingular: `zeta1 = 1`.
    pub zeta1_zero_check: bool,
    pub etale_h1_dim: usize,
    /// Set for supersingular curves, which cannot be the base of an etale `Z/p`-cover.
    pub inapplicable: Option<String>,
}

impl MuReport {
    /// All legs agree: ordinarity, etale dimension, `zeta1` and the trace congruence.
    pub fn consistent(&self) -> bool {
        let dim_ok = self.etale_h1_dim == usize::from(self.ordinary);
        let zeta_ok = (self.zeta1.len() > 1) == self.ordinary;
        self.trace_matches_hasse && self.zeta1_zero_check && dim_ok && zeta_ok
    }
}

pub fn mu_elliptic(e: &EllipticCurve, budget: u64, m_cap: usize) -> Result<MuReport, MuError> {
    let k = e.ctx();
    let p = k.p();
    let c = e.hasse_invariant();
    let a_trace = e.trace_of_frobenius(budget)?;
    let q = k.order().expect("counted fields have a u64 order");
    let point_count = (q as i64 + 1 - a_trace) as u64;
    let a_mod_p = a_trace.rem_euclid(p as i64) as u64;
    let trace_matches_hasse = k.as_prime_field(&c) == Some(a_mod_p);
    let ordinary = !k.is_zero(&c);
    let zeta = hassewitt::zeta_mod_p(&e.projectivize())?;
    let etale_h1_dim = e.etale_h1_dim(m_cap)?;
    let (mu, zeta1_zero_check, inapplicable) = if ordinary {
        let inv = k.inv(&c).expect("nonzero");
        let zero = k.is_zero(&upoly::eval(k, &zeta.zeta1, &inv));
        (Some(c.clone()), zero, None)
    } else {
        let trivial = zeta.zeta1 == vec![k.one()];
        (None, trivial, Some("supersingular curve: no etale Z/p-cover, mu undefined".to_string()))
    };
    Ok(MuReport {
        p,
        q,
        c_p: c,
        point_count,
        a_trace,
        ordinary,
        mu,
        trace_matches_hasse,
        zeta1: zeta.zeta1,
        zeta1_zero_check,
        etale_h1_dim,
        inapplicable,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepEntry {
    /// `(a, b)` for short models, `(a2, a4, a6)` when `p = 3`.
    pub coeffs: Vec<u64>,
    pub c_p: u64,
    pub a_trace: i64,
    pub ordinary: bool,
    pub hw_entry_matches: bool,
    pub consistent: bool,
}

impl SweepEntry {
    pub fn pass(&self) -> bool {
        self.hw_entry_matches && self.consistent
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepReport {
    pub p: u64,
    pub curves: usize,
    pub ordinary: usize,
    pub supersingular: usize,
    pub singular_skipped: usize,
    pub entries: Vec<SweepEntry>,
}

impl SweepReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(SweepEntry::pass)
    }
}

/// Every coefficient choice over GF(p): short models for `p >= 5`, the
/// `a2`-form for `p = 3`.
pub fn mu_sweep(p: u64, budget: u64, m_cap: usize) -> Result<SweepReport, MuError> {
    let k = crate::ff::make_field(p, 1).map_err(|_| MuError::Poly(PolyError::BadPrime(p)))?;
    if p == 2 {
        return Err(MuError::EvenCharacteristic);
    }
    let grid: Vec<Vec<u64>> = if p == 3 {
        (0..27).map(|i| vec![i / 9, (i / 3) % 3, i % 3]).collect()
    } else {
        (0..p * p).map(|i| vec![i / p, i % p]).collect()
    };
    let results: Vec<Result<Option<SweepEntry>, MuError>> = grid
        .par_iter()
        .map(|c| {
            let f = |i: usize| k.from_u64(c[i]);
            let curve = if c.len() == 3 {
                EllipticCurve::new(&k, f(0), f(1), f(2))
            } else {
                EllipticCurve::short(&k, f(0), f(1))
            };
            let curve = match curve {
                Ok(e) => e,
                Err(MuError::Singular) => return Ok(None),
                Err(e) => return Err(e),
            };
            let report = mu_elliptic(&curve, budget, m_cap)?;
            let hw = hassewitt::hw_matrix(&curve.projectivize())?;
            Ok(Some(SweepEntry {
                coeffs: c.clone(),
                c_p: k.as_prime_field(&report.c_p).expect("prime field"),
                a_trace: report.a_trace,
                ordinary: report.ordinary,
                hw_entry_matches: hw.a_q.get(0, 0) == &report.c_p,
                consistent: report.consistent(),
            }))
        })
        .collect();
    let mut entries = Vec::new();
    let mut singular_skipped = 0;
    for r in results {
        match r? {
            Some(e) => entries.push(e),
            None => singular_skipped += 1,
        }
    }
    let ordinary = entries.iter().filter(|e| e.ordinary).count();
    Ok(SweepReport { p, curves: entries.len(), ordinary, supersingular: entries.len() - ordinary, singular_skipped, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::make_field;
    use crate::semilinear::DEFAULT_M_CAP;
    use crate::variety::DEFAULT_BUDGET;

    fn short(p: u64, f: usize, a: u64, b: u64) -> EllipticCurve {
        let k = make_field(p, f).unwrap();
        EllipticCurve::short(&k, k.from_u64(a), k.from_u64(b)).unwrap()
    }

    #[test]
    fn hasse_examples() {
        let k = make_field(5, 1).unwrap();
        assert_eq!(short(5, 1, 1, 0).hasse_invariant(), k.from_u64(2));
        assert!(!short(5, 1, 0, 1).is_ordinary());
        let k25 = make_field(5, 2).unwrap();
        assert_eq!(short(5, 2, 1, 0).hasse_invariant(), k25.from_u64(4));
    }

    #[test]
    fn discriminant_matches_short_formula() {
        let k = make_field(7, 1).unwrap();
        for a in 0..7 {
            for b in 0..7 {
                let e = EllipticCurve { ctx: k.clone(), a2: k.zero(), a4: k.from_u64(a), a6: k.from_u64(b) };
                let want = k.from_i64(-16 * (4 * (a * a * a) as i64 + 27 * (b * b) as i64));
                assert_eq!(e.discriminant(), want);
            }
        }
        assert_eq!(EllipticCurve::short(&k, k.zero(), k.zero()), Err(MuError::Singular));
    }

    #[test]
    fn counts() {
        assert_eq!(short(5, 1, 1, 0).point_count(DEFAULT_BUDGET).unwrap(), 4);
        assert_eq!(short(5, 1, 1, 0).trace_of_frobenius(DEFAULT_BUDGET).unwrap(), 2);
        assert_eq!(short(5, 1, 0, 1).point_count(DEFAULT_BUDGET).unwrap(), 6);
        assert_eq!(short(5, 1, 0, 1).trace_of_frobenius(DEFAULT_BUDGET).unwrap(), 0);
        assert!(matches!(short(5, 1, 1, 0).point_count(3), Err(MuError::BudgetExceeded { .. })));
    }

    #[test]
    fn count_agrees_with_projective_enumeration() {
        for (p, f, a, b) in [(5, 1, 1, 0), (7, 1, 3, 2), (5, 2, 1, 0), (3, 2, 1, 1)] {
            let e = short(p, f, a, b);
            let n = e.projectivize().count_points(1, DEFAULT_BUDGET).unwrap().count;
            assert_eq!(e.point_count(DEFAULT_BUDGET).unwrap(), n);
        }
    }

    #[test]
    fn reports() {
        let k = make_field(5, 1).unwrap();
        let r = mu_elliptic(&short(5, 1, 1, 0), DEFAULT_BUDGET, DEFAULT_M_CAP).unwrap();
        assert_eq!(r.mu, Some(k.from_u64(2)));
        assert_eq!(r.a_trace, 2);
        assert_eq!(r.zeta1, vec![k.one(), k.from_u64(3)]);
        assert!(r.zeta1_zero_check && r.trace_matches_hasse && r.consistent());
        assert_eq!(r.etale_h1_dim, 1);
        let s = mu_elliptic(&short(5, 1, 0, 1), DEFAULT_BUDGET, DEFAULT_M_CAP).unwrap();
        assert!(!s.ordinary && s.mu.is_none() && s.inapplicable.is_some());
        assert_eq!(s.etale_h1_dim, 0);
        assert!(s.consistent());
        let q = mu_elliptic(&short(5, 2, 1, 0), DEFAULT_BUDGET, DEFAULT_M_CAP).unwrap();
        assert!(q.consistent());
        assert_eq!(q.mu, Some(make_field(5, 2).unwrap().from_u64(4)));
    }

    #[test]
    fn hasse_one_is_fixed_without_extension() {
        let k = make_field(5, 1).unwrap();
        let found = (0..5)
            .flat_map(|a| (0..5).map(move |b| (a, b)))
            .filter_map(|(a, b)| EllipticCurve::short(&k, k.from_u64(a), k.from_u64(b)).ok())
            .find(|e| k.is_one(&e.hasse_p()))
            .unwrap();
        let op = SemilinearOp::new(&k, 1, Matrix::from_rows(vec![vec![found.hasse_p()]])).unwrap();
        let fixed = op.fixed_space(DEFAULT_M_CAP).unwrap();
        assert_eq!(fixed.extension_degree_used, 1);
        assert_eq!(fixed.dim(), 1);
    }

    #[test]
    fn sweeps() {
        for p in [3, 5] {
            let r = mu_sweep(p, DEFAULT_BUDGET, DEFAULT_M_CAP).unwrap();
            assert!(r.all_pass(), "p = {p}");
            assert!(r.supersingular > 0 && r.ordinary > 0);
        }
    }
}
