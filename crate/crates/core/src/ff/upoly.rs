//! Dense univariate polynomials over a [`FieldOps`] field, constant term first.

use super::linalg::{FieldOps, Matrix};

pub fn trim<F: FieldOps>(field: &F, a: &mut Vec<F::Elem>) {
    while a.last().is_some_and(|c| field.is_zero(c)) {
        a.pop();
    }
}

pub fn mul<F: FieldOps>(field: &F, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![field.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if field.is_zero(x) {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = field.add(&out[i + j], &field.mul(x, y));
        }
    }
    trim(field, &mut out);
    out
}

pub fn sub<F: FieldOps>(field: &F, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
    let n = a.len().max(b.len());
    let mut out: Vec<F::Elem> = (0..n)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_else(|| field.zero());
            let y = b.get(i).cloned().unwrap_or_else(|| field.zero());
            field.sub(&x, &y)
        })
        .collect();
    trim(field, &mut out);
    out
}

pub fn eval<F: FieldOps>(field: &F, a: &[F::Elem], x: &F::Elem) -> F::Elem {
    a.iter().rev().fold(field.zero(), |acc, c| field.add(&field.mul(&acc, x), c))
}

pub fn coeff<F: FieldOps>(field: &F, a: &[F::Elem], i: usize) -> F::Elem {
    a.get(i).cloned().unwrap_or_else(|| field.zero())
}

pub fn pow<F: FieldOps>(field: &F, a: &[F::Elem], e: u64) -> Vec<F::Elem> {
    let mut acc = vec![field.one()];
    for _ in 0..e {
        acc = mul(field, &acc, a);
    }
    acc
}

/// Quotient and remainder; `b` must be nonzero after trimming.
pub fn divrem<F: FieldOps>(field: &F, a: &[F::Elem], b: &[F::Elem]) -> (Vec<F::Elem>, Vec<F::Elem>) {
    let mut b = b.to_vec();
    trim(field, &mut b);
    let lead_inv = field.inv(b.last().expect("division by the zero polynomial")).expect("nonzero lead");
    let mut r = a.to_vec();
    trim(field, &mut r);
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let mut q = vec![field.zero(); r.len() - b.len() + 1];
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let c = field.mul(r.last().expect("nonempty"), &lead_inv);
        for (i, y) in b.iter().enumerate() {
            r[shift + i] = field.sub(&r[shift + i], &field.mul(&c, y));
        }
        q[shift] = c;
        r.pop();
        trim(field, &mut r);
    }
    trim(field, &mut q);
    (q, r)
}

pub fn rem<F: FieldOps>(field: &F, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
    divrem(field, a, b).1
}

pub fn monic<F: FieldOps>(field: &F, a: &[F::Elem]) -> Vec<F::Elem> {
    let mut a = a.to_vec();
    trim(field, &mut a);
    match a.last() {
        None => a,
        Some(l) => {
            let inv = field.inv(l).expect("nonzero lead");
            a.iter().map(|x| field.mul(x, &inv)).collect()
        }
    }
}

/// Monic greatest common divisor.
pub fn gcd<F: FieldOps>(field: &F, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
    let mut a = monic(field, a);
    let mut b = monic(field, b);
    while !b.is_empty() {
        let r = rem(field, &a, &b);
        a = b;
        b = monic(field, &r);
    }
    a
}

pub fn mulmod<F: FieldOps>(field: &F, a: &[F::Elem], b: &[F::Elem], m: &[F::Elem]) -> Vec<F::Elem> {
    rem(field, &mul(field, a, b), m)
}

pub fn powmod<F: FieldOps>(field: &F, a: &[F::Elem], mut e: u128, m: &[F::Elem]) -> Vec<F::Elem> {
    let mut acc = rem(field, &[field.one()], m);
    let mut base = rem(field, a, m);
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(field, &acc, &base, m);
        }
        e >>= 1;
        if e > 0 {
            base = mulmod(field, &base, &base, m);
        }
    }
    acc
}

pub fn determinant<F: FieldOps>(field: &F, m: &Matrix<F::Elem>) -> F::Elem {
    assert!(m.is_square());
    let n = m.rows();
    let mut a = m.to_rows();
    let mut det = field.one();
    for c in 0..n {
        let Some(pr) = (c..n).find(|&i| !field.is_zero(&a[i][c])) else {
            return field.zero();
        };
        if pr != c {
            a.swap(pr, c);
            det = field.neg(&det);
        }
        det = field.mul(&det, &a[c][c]);
        let inv = field.inv(&a[c][c]).expect("pivot is nonzero");
        for i in c + 1..n {
            if field.is_zero(&a[i][c]) {
                continue;
            }
            let factor = field.mul(&a[i][c], &inv);
            for j in c..n {
                let v = field.sub(&a[i][j], &field.mul(&factor, &a[c][j]));
                a[i][j] = v;
            }
        }
    }
    det
}

/// `det(x I - m)`, monic, via reduction to upper Hessenberg form.
pub fn char_poly<F: FieldOps>(field: &F, m: &Matrix<F::Elem>) -> Vec<F::Elem> {
    assert!(m.is_square());
    let n = m.rows();
    let mut h = m.to_rows();
    for j in 0..n.saturating_sub(2) {
        let Some(i) = (j + 1..n).find(|&i| !field.is_zero(&h[i][j])) else {
            continue;
        };
        if i != j + 1 {
            h.swap(i, j + 1);
            for row in h.iter_mut() {
                row.swap(i, j + 1);
            }
        }
        let inv = field.inv(&h[j + 1][j]).expect("pivot is nonzero");
        for k in j + 2..n {
            if field.is_zero(&h[k][j]) {
                continue;
            }
            let u = field.mul(&h[k][j], &inv);
            for c in 0..n {
                let v = field.sub(&h[k][c], &field.mul(&u, &h[j + 1][c]));
                h[k][c] = v;
            }
            for row in h.iter_mut() {
                let v = field.add(&row[j + 1], &field.mul(&u, &row[k]));
                row[j + 1] = v;
            }
        }
    }
    // p_m = (x - h_mm) p_{m-1} - sum_i h_im (prod_{l=i+1..m} h_{l,l-1}) p_{i-1}
    let mut polys: Vec<Vec<F::Elem>> = vec![vec![field.one()]];
    for k in 0..n {
        let lin = vec![field.neg(&h[k][k]), field.one()];
        let mut next = mul(field, &lin, &polys[k]);
        let mut prod = field.one();
        for i in (0..k).rev() {
            prod = field.mul(&prod, &h[i + 1][i]);
            let c = field.mul(&h[i][k], &prod);
            if field.is_zero(&c) {
                continue;
            }
            let term: Vec<F::Elem> = polys[i].iter().map(|x| field.mul(&c, x)).collect();
            next = sub(field, &next, &term);
        }
        polys.push(next);
    }
    polys.pop().expect("at least the constant polynomial")
}

/// `det(1 - m T)`: the reversed characteristic polynomial.
pub fn reverse_char_poly<F: FieldOps>(field: &F, m: &Matrix<F::Elem>) -> Vec<F::Elem> {
    let mut cp = char_poly(field, m);
    let n = m.rows();
    cp.resize(n + 1, field.zero());
    let mut out: Vec<F::Elem> = cp.into_iter().rev().collect();
    trim(field, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::linalg::{identity, mat_mul, mat_sub, PrimeField};
    use crate::ff::make_field;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_by_two_char_poly() {
        let f = PrimeField { p: 7 };
        let m = Matrix::from_rows(vec![vec![1, 2], vec![3, 4]]);
        // x^2 - 5x + (4 - 6) = x^2 + 2x + 5
        assert_eq!(char_poly(&f, &m), vec![5, 2, 1]);
        assert_eq!(reverse_char_poly(&f, &m), vec![1, 2, 5]);
    }

    #[test]
    fn division_and_gcd() {
        let f = PrimeField { p: 5 };
        // (x + 1)(x + 2) and (x + 1)(x + 3)
        let a = mul(&f, &[1, 1], &[2, 1]);
        let b = mul(&f, &[1, 1], &[3, 1]);
        assert_eq!(gcd(&f, &a, &b), vec![1, 1]);
        let (q, r) = divrem(&f, &a, &[1, 1]);
        assert_eq!((q, r), (vec![2, 1], vec![]));
        let (q, r) = divrem(&f, &[1, 0, 1], &[1, 1]);
        assert_eq!(sub(&f, &[1, 0, 1], &mul(&f, &q, &[1, 1])), r);
        // x^5 = x mod (x^2 + 2) since every element of GF(25) satisfies x^25 = x
        let m = vec![2, 0, 1];
        assert_eq!(powmod(&f, &[0, 1], 25, &m), vec![0, 1]);
    }

    #[test]
    fn char_poly_matches_pointwise_determinants() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ctx = make_field(3, 2).unwrap();
        for n in 0..6 {
            for _ in 0..10 {
                let m = Matrix::from_fn(n, n, |_, _| ctx.random(&mut rng));
                let cp = char_poly(&ctx, &m);
                assert_eq!(cp.len(), n + 1);
                for c in ctx.elements() {
                    let shifted = mat_sub(
                        &ctx,
                        &Matrix::from_fn(n, n, |i, j| if i == j { c.clone() } else { ctx.zero() }),
                        &m,
                    );
                    assert_eq!(eval(&ctx, &cp, &c), determinant(&ctx, &shifted));
                }
                // Cayley-Hamilton
                let mut acc = Matrix::filled(n, n, ctx.zero());
                for coeff in cp.iter().rev() {
                    acc = mat_mul(&ctx, &acc, &m);
                    let scaled = identity(&ctx, n).map(|x| ctx.mul(x, coeff));
                    acc = crate::ff::linalg::mat_add(&ctx, &acc, &scaled);
                }
                assert!(crate::ff::linalg::is_zero_matrix(&ctx, &acc));
            }
        }
    }
}
