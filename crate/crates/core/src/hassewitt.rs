//! Frobenius on the top cohomology `H^(N-1)(X, O_X)` of a hypersurface.
//!
//! `H^(N-1)(O_X)` is identified with `H^N(P^N, O(-d))`, whose basis is the
//! Cech classes `x^(-w)` with all `w_i >= 1`, `|w| = d`. Frobenius sends
//! `x^(-w)` to `f^(p-1) x^(-p w)`, so on column vectors
//!
//! `F(e_w) = sum_u coeff(f^(p-1), p w - u) e_u`,  i.e.  `A_p[u][w] = coeff(f^(p-1), p w - u)`,
//!
//! and `F(x) = A_p x^[p]`. The q-power Frobenius is then `A_q = A_p A_p^[p] ... A_p^[p^(f-1)]`,
//! which agrees with extracting `coeff(f^(q-1), q w - u)` directly.

use serde::Serialize;
use thiserror::Error;

use crate::ff::linalg::{self, Matrix};
use crate::ff::{upoly, FieldCtx, FieldElem};
use crate::poly::{MultiPoly, PolyError};
use crate::semilinear::SemilinearOp;
use crate::variety::{cohomology_dims, monomials, Hypersurface, VarietyError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HasseWittError {
    #[error("cohomology of O_X is not concentrated in degrees 0 and N-1: {0:?}")]
    UnsupportedCohomologyProfile(Vec<u128>),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Variety(#[from] VarietyError),
}

/// Exponent vectors with positive entries summing to `d` in `nvars` variables, lexicographic.
pub fn hw_basis(d: usize, nvars: usize) -> Vec<Vec<u16>> {
    if d < nvars {
        return Vec::new();
    }
    monomials(nvars, d - nvars)
        .into_iter()
        .map(|e| e.into_iter().map(|x| x + 1).collect())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HwMatrix {
    pub basis: Vec<Vec<u16>>,
    /// p-power Frobenius: `F(x) = a_p x^[p]`.
    pub a_p: Matrix<FieldElem>,
    /// q-power Frobenius over GF(q); linear on GF(q)-coordinates.
    pub a_q: Matrix<FieldElem>,
}

/// Matrix `[coeff(g, k w - u)]_{u, w}` on the basis.
fn extract(g: &MultiPoly, basis: &[Vec<u16>], k: i64) -> Matrix<FieldElem> {
    Matrix::from_fn(basis.len(), basis.len(), |u, w| {
        let exp: Vec<i64> = basis[w].iter().zip(&basis[u]).map(|(&bw, &bu)| k * bw as i64 - bu as i64).collect();
        g.coeff_signed(&exp)
    })
}

/// `A_p`, and `A_q` as the `f`-fold twisted product of `A_p`.
pub fn hw_matrix(x: &Hypersurface) -> Result<HwMatrix, HasseWittError> {
    let ctx = x.ctx();
    let p = ctx.p();
    let basis = hw_basis(x.degree(), x.poly().nvars());
    let fp1 = x.poly().pow(p - 1)?;
    let a_p = extract(&fp1, &basis, p as i64);
    let op = SemilinearOp::new(ctx, 1, a_p.clone()).expect("square matrix, twist 1 divides any degree");
    let a_q = op.twisted_power(ctx.degree());
    Ok(HwMatrix { basis, a_p, a_q })
}

/// `A_q` read directly off `f^(q-1)`.
pub fn hw_matrix_direct(x: &Hypersurface) -> Result<Matrix<FieldElem>, HasseWittError> {
    let q = x.ctx().order().expect("field order fits in u64");
    let basis = hw_basis(x.degree(), x.poly().nvars());
    let g = x.poly().pow(q - 1)?;
    Ok(extract(&g, &basis, q as i64))
}

/// `zeta0`, `zeta1` as coefficient lists (constant term first) over GF(q).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ZetaModP {
    pub zeta0: Vec<FieldElem>,
    pub zeta1: Vec<FieldElem>,
    pub hw: HwMatrix,
}

fn ensure_profile(x: &Hypersurface) -> Result<Vec<u128>, HasseWittError> {
    let h = cohomology_dims(x.ambient_dim(), x.degree());
    let n = h.len();
    let ok = n >= 2 && h[0] == 1 && h[1..n - 1].iter().all(|&v| v == 0);
    if !ok {
        return Err(HasseWittError::UnsupportedCohomologyProfile(h));
    }
    Ok(h)
}

/// The mod-p zeta factors: `H^0` gives `1 - T` in `zeta0`, `H^n` (`n = N - 1`)
/// gives `det(1 - A_q T)` in `zeta1` for odd `n` and in `zeta0` for even `n`.
pub fn zeta_mod_p(x: &Hypersurface) -> Result<ZetaModP, HasseWittError> {
    ensure_profile(x)?;
    let ctx = x.ctx();
    let hw = hw_matrix(x)?;
    let top = upoly::reverse_char_poly(ctx, &hw.a_q);
    let h0 = vec![ctx.one(), ctx.neg(&ctx.one())];
    let n = x.ambient_dim() - 1;
    let (zeta0, zeta1) = if n % 2 == 1 {
        (h0, top)
    } else {
        (upoly::mul(ctx, &h0, &top), vec![ctx.one()])
    };
    Ok(ZetaModP { zeta0, zeta1, hw })
}

/// Coefficients as residues mod p, when they all lie in the prime field.
pub fn prime_coefficients(ctx: &FieldCtx, poly: &[FieldElem]) -> Option<Vec<u64>> {
    poly.iter().map(|c| ctx.as_prime_field(c)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KatzRow {
    pub e: usize,
    pub count: u64,
    /// `1 + (-1)^(N-1) Tr(A_q^e)` when the trace lies in GF(p).
    pub trace_side: Option<u64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KatzReport {
    pub p: u64,
    pub rows: Vec<KatzRow>,
}

impl KatzReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// `N_e = 1 + (-1)^(N-1) Tr(A_q^e) (mod p)` for `e = 1..=e_max`.
pub fn katz_check(x: &Hypersurface, e_max: usize, budget: u64) -> Result<KatzReport, HasseWittError> {
    ensure_profile(x)?;
    let ctx = x.ctx();
    let p = ctx.p();
    let hw = hw_matrix(x)?;
    let sign_odd = (x.ambient_dim() - 1) % 2 == 1;
    let mut rows = Vec::with_capacity(e_max);
    let mut power = linalg::identity(ctx, hw.basis.len());
    for e in 1..=e_max {
        power = linalg::mat_mul(ctx, &power, &hw.a_q);
        let tr = (0..hw.basis.len()).fold(ctx.zero(), |acc, i| ctx.add(&acc, power.get(i, i)));
        let trace_side = ctx.as_prime_field(&tr).map(|t| {
            let signed = if sign_odd { (p - t) % p } else { t };
            (1 + signed) % p
        });
        let count = x.count_points(e, budget)?.count;
        let pass = trace_side == Some(count % p);
        rows.push(KatzRow { e, count, trace_side, pass });
    }
    Ok(KatzReport { p, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::make_field;
    use crate::poly::{build_fp, parse_poly};
    use crate::variety::DEFAULT_BUDGET;

    fn hyp(p: u64, f: usize, text: &str) -> Hypersurface {
        let ctx = make_field(p, f).unwrap();
        Hypersurface::new(parse_poly(&ctx, text, None).unwrap()).unwrap()
    }

    #[test]
    fn basis_examples() {
        assert_eq!(hw_basis(3, 3), vec![vec![1, 1, 1]]);
        assert_eq!(hw_basis(5, 5), vec![vec![1; 5]]);
        assert_eq!(hw_basis(4, 3), vec![vec![1, 1, 2], vec![1, 2, 1], vec![2, 1, 1]]);
        assert!(hw_basis(2, 4).is_empty());
        for (d, n) in [(4, 3), (6, 3), (5, 4), (7, 4)] {
            let h = cohomology_dims(n - 1, d);
            assert_eq!(hw_basis(d, n).len() as u128, *h.last().unwrap());
        }
    }

    #[test]
    fn matrix_examples() {
        // y^2 z = x^3 + x z^2 over GF(5), variables (x, y, z)
        let e = hyp(5, 1, "X1^2*X2 + 4*X0^3 + 4*X0*X2^2");
        let hw = hw_matrix(&e).unwrap();
        assert_eq!(hw.a_p.get(0, 0), &e.ctx().from_u64(2));
        let f3 = Hypersurface::new(build_fp(3).unwrap()).unwrap();
        assert_eq!(hw_matrix(&f3).unwrap().a_p.get(0, 0), &f3.ctx().one());
        let ss = hyp(5, 1, "X1^2*X2 + 4*X0^3 + 4*X2^3");
        assert!(hw_matrix(&ss).unwrap().a_p.get(0, 0) == &ss.ctx().zero());
    }

    #[test]
    fn zeta_examples() {
        let e = hyp(5, 1, "X1^2*X2 + 4*X0^3 + 4*X0*X2^2");
        let z = zeta_mod_p(&e).unwrap();
        let ctx = e.ctx();
        assert_eq!(prime_coefficients(ctx, &z.zeta1), Some(vec![1, 3]));
        assert_eq!(prime_coefficients(ctx, &z.zeta0), Some(vec![1, 4]));
        let ss = hyp(5, 1, "X1^2*X2 + 4*X0^3 + 4*X2^3");
        let z = zeta_mod_p(&ss).unwrap();
        assert_eq!(prime_coefficients(ctx, &z.zeta1), Some(vec![1]));
        let f5 = Hypersurface::new(build_fp(5).unwrap()).unwrap();
        let z = zeta_mod_p(&f5).unwrap();
        let c = f5.poly().pow(4).unwrap().coeff(&[4, 4, 4, 4, 4]);
        let c = f5.ctx().as_prime_field(&c).unwrap();
        assert_eq!(prime_coefficients(f5.ctx(), &z.zeta1), Some(if c == 0 { vec![1] } else { vec![1, (5 - c) % 5] }));
        assert_eq!(prime_coefficients(f5.ctx(), &z.zeta0), Some(vec![1, 4]));
    }

    #[test]
    fn even_dimensional_top_goes_to_zeta0() {
        // A quartic surface in P^3: n = 2, H^2 of dimension 1.
        let k3 = hyp(3, 1, "X0^4 + X1^4 + X2^4 + X3^4 + X0*X1*X2*X3");
        let z = zeta_mod_p(&k3).unwrap();
        assert_eq!(z.zeta1, vec![k3.ctx().one()]);
        assert!(z.zeta0.len() <= 3);
    }

    #[test]
    fn unsupported_profiles() {
        let pts = hyp(5, 1, "X0^2 + X1^2");
        assert!(matches!(zeta_mod_p(&pts), Err(HasseWittError::UnsupportedCohomologyProfile(_))));
    }

    #[test]
    fn katz_examples() {
        let e = hyp(5, 1, "X1^2*X2 + 4*X0^3 + 4*X0*X2^2");
        let r = katz_check(&e, 2, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.rows[0].count, 4);
        assert_eq!(r.rows[0].trace_side, Some(4));
        assert!(r.all_pass());
        let f3 = Hypersurface::new(build_fp(3).unwrap()).unwrap();
        assert!(katz_check(&f3, 3, DEFAULT_BUDGET).unwrap().all_pass());
    }

    #[test]
    fn twisted_product_matches_direct_over_gf9() {
        let ctx = make_field(3, 2).unwrap();
        let t = ctx.generator();
        let f = MultiPoly::from_terms(
            &ctx,
            3,
            vec![
                (vec![3, 0, 0], ctx.one()),
                (vec![0, 3, 0], t.clone()),
                (vec![0, 0, 3], ctx.from_u64(2)),
                (vec![1, 1, 1], ctx.add(&t, &ctx.one())),
                (vec![2, 1, 0], ctx.mul(&t, &t)),
            ],
        )
        .unwrap();
        let x = Hypersurface::new(f).unwrap();
        assert_eq!(hw_matrix(&x).unwrap().a_q, hw_matrix_direct(&x).unwrap());
        // A quartic, where the matrix is 3x3 and the index convention matters.
        let g = MultiPoly::from_terms(
            &ctx,
            3,
            vec![
                (vec![4, 0, 0], ctx.one()),
                (vec![0, 4, 0], t.clone()),
                (vec![0, 0, 4], ctx.one()),
                (vec![2, 1, 1], t.clone()),
                (vec![1, 3, 0], ctx.from_u64(2)),
                (vec![0, 1, 3], ctx.add(&t, &ctx.one())),
            ],
        )
        .unwrap();
        let y = Hypersurface::new(g).unwrap();
        let hw = hw_matrix(&y).unwrap();
        let direct = hw_matrix_direct(&y).unwrap();
        assert_eq!(hw.a_q, direct);
        // The transposed rule gives A^T (A^T)^[p] = (A^[p] A)^T, which differs here.
        let at = hw.a_p.transpose();
        let alt = linalg::mat_mul(&ctx, &at, &at.map(|c| ctx.frobenius(c, 1)));
        assert_ne!(alt, direct.transpose());
    }
}
