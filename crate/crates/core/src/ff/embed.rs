use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::linalg::{self, FieldOps, Matrix, PrimeField};
use super::upoly;
use super::{FieldCtx, FieldElem, FieldError};

/// Embedding GF(p^f) -> GF(p^(f m)) determined by the image of the generator.
#[derive(Clone, Debug)]
pub struct TowerEmbedding {
    sub: FieldCtx,
    sup: FieldCtx,
    image: FieldElem,
    /// `image^i` for `i < sub.degree()`.
    powers: Vec<FieldElem>,
}

impl TowerEmbedding {
    /// Deterministic embedding: the image of the generator is the root of the
    /// sub-field modulus with the smallest element index.
    pub fn new(sub: &FieldCtx, sup: &FieldCtx) -> Result<Self, FieldError> {
        let (f, n) = (sub.degree(), sup.degree());
        if sub.p() != sup.p() || n % f != 0 {
            return Err(FieldError::NoEmbedding { p: sub.p(), sub: f, sup: n });
        }
        let image = if f == 1 {
            sup.zero()
        } else {
            find_root(sub, sup).ok_or(FieldError::NoEmbedding { p: sub.p(), sub: f, sup: n })?
        };
        let mut powers = Vec::with_capacity(f);
        let mut cur = sup.one();
        for _ in 0..f {
            powers.push(cur.clone());
            cur = sup.mul(&cur, &image);
        }
        Ok(TowerEmbedding { sub: sub.clone(), sup: sup.clone(), image, powers })
    }

    pub fn sub(&self) -> &FieldCtx {
        &self.sub
    }

    pub fn sup(&self) -> &FieldCtx {
        &self.sup
    }

    pub fn generator_image(&self) -> &FieldElem {
        &self.image
    }

    pub fn embed(&self, x: &FieldElem) -> Result<FieldElem, FieldError> {
        self.sub
            .validate(x)
            .map_err(|e| FieldError::ContextMismatch(e.to_string()))?;
        Ok(self.embed_unchecked(x))
    }

    pub(crate) fn embed_unchecked(&self, x: &FieldElem) -> FieldElem {
        let p = self.sup.p();
        let mut out = self.sup.zero();
        for (c, pw) in x.0.iter().zip(&self.powers) {
            if *c == 0 {
                continue;
            }
            for (o, y) in out.0.iter_mut().zip(pw.0.iter()) {
                *o = (*o + c * y) % p;
            }
        }
        out
    }

    /// Preimage of `y` when it lies in the embedded subfield.
    pub fn preimage(&self, y: &FieldElem) -> Option<FieldElem> {
        let gfp = PrimeField { p: self.sup.p() };
        let m = Matrix::from_fn(self.sup.degree(), self.sub.degree(), |i, j| self.powers[j].0[i]);
        let sol = linalg::solve_linear_system(&gfp, &m, &y.0)
            .particular?;
        self.sub.from_coords(&sol).ok()
    }
}

/// Embedding of the prime field GF(p) into `sup`.
pub fn prime_subfield_embedding(sup: &FieldCtx) -> TowerEmbedding {
    let gfp = super::make_field(sup.p(), 1).expect("characteristic of a valid field is prime");
    TowerEmbedding::new(&gfp, sup).expect("prime field embeds everywhere")
}

/// GF(p)-basis of `{x in sup : x^(p^f) = x}`.
#[cfg(test)]
fn fixed_subfield_basis(sup: &FieldCtx, f: usize) -> Vec<FieldElem> {
    let gfp = PrimeField { p: sup.p() };
    let n = sup.degree();
    let m = Matrix::from_fn(n, n, |_, _| 0u64);
    let mut m = m;
    for j in 0..n {
        let mut tj = sup.zero();
        tj.0[j] = 1;
        let img = sup.sub(&sup.frobenius(&tj, f), &tj);
        for i in 0..n {
            m.set(i, j, img.0[i]);
        }
    }
    linalg::kernel(&gfp, &m)
        .into_iter()
        .map(|v| sup.from_coords(&v).expect("kernel vector has field length"))
        .collect()
}

/// A root of the sub-field modulus in `sup`. The modulus splits into linear
/// factors there; random absolute-trace splittings (fixed seed) isolate one
/// root, and the answer is made canonical by taking the conjugate with the
/// smallest element index.
fn find_root(sub: &FieldCtx, sup: &FieldCtx) -> Option<FieldElem> {
    let p = sup.p();
    let n = sup.degree();
    let mut poly: Vec<FieldElem> = sub.modulus().iter().map(|&c| sup.from_u64(c)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut tries = 0;
    while poly.len() > 2 {
        tries += 1;
        if tries > 200 {
            return None;
        }
        let delta = sup.random(&mut rng);
        // T = sum_i (delta x)^(p^i) mod poly takes values in GF(p) at the roots.
        let y = upoly::rem(sup, &[sup.zero(), delta], &poly);
        let mut term = y.clone();
        let mut trace = y;
        for _ in 1..n {
            term = upoly::powmod(sup, &term, p as u128, &poly);
            trace = add_poly(sup, &trace, &term);
        }
        let best = (0..p)
            .filter_map(|c| {
                let shifted = upoly::sub(sup, &trace, &[sup.from_u64(c)]);
                let g = upoly::gcd(sup, &poly, &shifted);
                (g.len() > 1 && g.len() < poly.len()).then_some(g)
            })
            .min_by_key(|g| g.len());
        if let Some(g) = best {
            poly = g;
        }
    }
    let lead_inv = sup.inv(&poly[1])?;
    let root = sup.neg(&sup.mul(&poly[0], &lead_inv));
    let f = sub.degree();
    // Index order: compare coordinates from the top degree down.
    (0..f).map(|i| sup.frobenius(&root, i)).min_by(|a, b| a.0.iter().rev().cmp(b.0.iter().rev()))
}

fn add_poly(field: &FieldCtx, a: &[FieldElem], b: &[FieldElem]) -> Vec<FieldElem> {
    let neg: Vec<FieldElem> = b.iter().map(|x| field.neg(x)).collect();
    upoly::sub(field, a, &neg)
}

impl FieldOps for TowerEmbedding {
    type Elem = FieldElem;
    fn zero(&self) -> FieldElem {
        self.sup.zero()
    }
    fn one(&self) -> FieldElem {
        self.sup.one()
    }
    fn is_zero(&self, a: &FieldElem) -> bool {
        self.sup.is_zero(a)
    }
    fn add(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        self.sup.add(a, b)
    }
    fn sub(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        self.sup.sub(a, b)
    }
    fn neg(&self, a: &FieldElem) -> FieldElem {
        self.sup.neg(a)
    }
    fn mul(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        self.sup.mul(a, b)
    }
    fn inv(&self, a: &FieldElem) -> Option<FieldElem> {
        self.sup.inv(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::make_field;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn trivial_images() {
        let f3 = make_field(3, 1).unwrap();
        let f9 = make_field(3, 2).unwrap();
        let e = TowerEmbedding::new(&f3, &f9).unwrap();
        assert_eq!(e.embed(&f3.zero()).unwrap(), f9.zero());
        assert_eq!(e.embed(&f3.one()).unwrap(), f9.one());
        assert_eq!(e.embed(&f3.from_u64(2)).unwrap(), f9.from_u64(2));
    }

    #[test]
    fn rejects_non_subfields_and_bad_elements() {
        let f9 = make_field(3, 2).unwrap();
        let f27 = make_field(3, 3).unwrap();
        assert!(TowerEmbedding::new(&f9, &f27).is_err());
        let f3 = make_field(3, 1).unwrap();
        let e = TowerEmbedding::new(&f3, &f27).unwrap();
        assert!(matches!(e.embed(&f9.one()), Err(FieldError::ContextMismatch(_))));
    }

    #[test]
    fn embedding_is_a_ring_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (p, f, m) in [(3, 2, 3), (5, 2, 2), (2, 3, 2), (3, 3, 2)] {
            let sub = make_field(p, f).unwrap();
            let sup = make_field(p, f * m).unwrap();
            let e = TowerEmbedding::new(&sub, &sup).unwrap();
            let root = sub.modulus().iter().rev().fold(sup.zero(), |acc, &c| {
                sup.add(&sup.mul(&acc, e.generator_image()), &sup.from_u64(c))
            });
            assert!(sup.is_zero(&root));
            for _ in 0..200 {
                let x = sub.random(&mut rng);
                let y = sub.random(&mut rng);
                let ex = e.embed(&x).unwrap();
                let ey = e.embed(&y).unwrap();
                assert_eq!(e.embed(&sub.add(&x, &y)).unwrap(), sup.add(&ex, &ey));
                assert_eq!(e.embed(&sub.mul(&x, &y)).unwrap(), sup.mul(&ex, &ey));
                // Frobenius compatibility
                assert_eq!(e.embed(&sub.frobenius(&x, 1)).unwrap(), sup.frobenius(&ex, 1));
                assert_eq!(e.preimage(&ex), Some(x));
            }
        }
    }

    #[test]
    fn image_is_the_smallest_root() {
        for (p, f, m) in [(3, 2, 2), (2, 3, 2), (5, 2, 3), (3, 3, 2)] {
            let sub = make_field(p, f).unwrap();
            let sup = make_field(p, f * m).unwrap();
            let e = TowerEmbedding::new(&sub, &sup).unwrap();
            let is_root = |x: &FieldElem| {
                let v = sub.modulus().iter().rev().fold(sup.zero(), |acc, &c| sup.add(&sup.mul(&acc, x), &sup.from_u64(c)));
                sup.is_zero(&v)
            };
            let first = sup.elements().find(|x| is_root(x)).unwrap();
            assert_eq!(e.generator_image(), &first);
        }
    }

    #[test]
    fn large_subfields_embed_quickly() {
        let sub = make_field(3, 20).unwrap();
        let sup = make_field(3, 40).unwrap();
        let e = TowerEmbedding::new(&sub, &sup).unwrap();
        let x = sub.generator();
        assert_eq!(e.preimage(&e.embed(&x).unwrap()), Some(x));
    }

    #[test]
    fn fixed_field_dimensions() {
        // x -> x^(p^f) on GF(p^(f m)) fixes exactly a copy of GF(p^f).
        for (p, f, m) in [(3, 1, 4), (3, 2, 2), (5, 2, 3), (2, 2, 3)] {
            let sup = make_field(p, f * m).unwrap();
            assert_eq!(fixed_subfield_basis(&sup, f).len(), f);
            assert_eq!(fixed_subfield_basis(&sup, f * m).len(), f * m);
        }
    }
}
