//! Aggregate checks: the `f_p` verification, random generators, and the seeded self-test.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ff::linalg::Matrix;
use crate::ff::{make_field, FieldCtx};
use crate::hassewitt::{self, HasseWittError};
use crate::modrep::{self, CyclicModule};
use crate::mu;
use crate::poly::{build_fp, MultiPoly, PolyError};
use crate::semilinear::{SemilinearError, SemilinearOp, DEFAULT_M_CAP};
use crate::variety::{monomials, CyclicAction, Hypersurface, VarietyError};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Claim {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FpReport {
    pub p: u64,
    pub e_max: usize,
    /// Smoothness is only probed up to `e_max` unless the exact certificate ran.
    pub bounded: bool,
    pub claims: Vec<Claim>,
}

impl FpReport {
    pub fn all_pass(&self) -> bool {
        self.claims.iter().all(|c| c.pass)
    }
}

fn claim(name: &str, pass: bool, detail: String) -> Claim {
    Claim { name: name.into(), pass, detail }
}

/// Largest exact smoothness certificate attempted by [`verify_fp`].
const EXACT_SMOOTH_COLUMNS: usize = 4000;

/// Smoothness, fixed points of the rotation, `f_p(1, ..., 1)`, cohomology of
/// `O_X`, and the Katz congruence for `f_p` over GF(p).
pub fn verify_fp(p: u64, e_max: usize, budget: u64) -> Result<FpReport, HasseWittError> {
    let f = build_fp(p)?;
    let x = Hypersurface::new(f).map_err(HasseWittError::from)?;
    let ctx = x.ctx().clone();
    let mut claims = Vec::new();

    let probe = x.smoothness_probe(e_max, budget)?;
    claims.push(claim(
        "no_singular_points",
        probe.witness.is_none(),
        format!("{} points checked over GF({p}^e), e <= {e_max}", probe.points_checked),
    ));
    let exact = x.is_smooth_exact(EXACT_SMOOTH_COLUMNS);
    if let Some(s) = exact {
        claims.push(claim("smooth_certificate", s, "degree-D part of the Jacobian ideal is full".into()));
    }

    let fixed = x.sigma_fixed_points(&CyclicAction::new(p as usize), e_max, budget)?;
    let on_x: usize = fixed.iter().map(|d| d.on_variety.len()).sum();
    let ambient: usize = fixed.iter().map(|d| d.ambient.len()).sum();
    claims.push(claim(
        "rotation_has_no_fixed_points_on_x",
        on_x == 0,
        format!("{ambient} fixed points in projective space, {on_x} on X"),
    ));

    let ones = vec![ctx.one(); p as usize];
    let v = x.poly().evaluate(&ones, None)?;
    claims.push(claim("value_at_all_ones_is_one", ctx.is_one(&v), format!("f(1, ..., 1) = {v:?}")));

    let h = x.cohomology_dims();
    let n = h.len();
    let shape = h[0] == 1 && h[n - 1] == 1 && h[1..n - 1].iter().all(|&d| d == 0);
    claims.push(claim("cohomology_of_structure_sheaf", shape, format!("{h:?}")));

    let katz = hassewitt::katz_check(&x, e_max, budget)?;
    let rows: Vec<String> = katz.rows.iter().map(|r| format!("N_{} = {}", r.e, r.count)).collect();
    claims.push(claim("katz_congruence", katz.all_pass(), rows.join(", ")));

    Ok(FpReport { p, e_max, bounded: exact != Some(true), claims })
}

/// `x -> A x^[p^t]` over GF(p^g) with uniformly random `A`.
pub fn random_semilinear_op<R: Rng + ?Sized>(ctx: &FieldCtx, t: usize, r: usize, rng: &mut R) -> SemilinearOp {
    let m = Matrix::from_fn(r, r, |_, _| ctx.random(rng));
    SemilinearOp::new(ctx, t, m).expect("square matrix and admissible twist")
}

/// A random plane curve of degree `d` with an exact smoothness certificate.
pub fn random_smooth_plane_curve<R: Rng + ?Sized>(ctx: &FieldCtx, d: usize, rng: &mut R) -> Hypersurface {
    let mons = monomials(3, d);
    loop {
        let terms = mons.iter().map(|e| (e.clone(), ctx.random(rng)));
        let Ok(f) = MultiPoly::from_terms(ctx, 3, terms) else { continue };
        let Ok(x) = Hypersurface::new(f) else { continue };
        if x.is_smooth_exact(EXACT_SMOOTH_COLUMNS) == Some(true) {
            return x;
        }
    }
}

/// A random plane curve of degree `d`, smooth or not.
pub fn random_plane_curve<R: Rng + ?Sized>(ctx: &FieldCtx, d: usize, rng: &mut R) -> Result<Hypersurface, PolyError> {
    let mons = monomials(3, d);
    loop {
        let terms = mons.iter().map(|e| (e.clone(), ctx.random(rng)));
        let f = MultiPoly::from_terms(ctx, 3, terms)?;
        if let Ok(x) = Hypersurface::new(f) {
            return Ok(x);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Section {
    pub name: String,
    pub cases: usize,
    pub passed: usize,
    /// Per-case data, so that runs can be compared value by value.
    pub digest: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub sections: Vec<Section>,
}

impl SelftestReport {
    pub fn all_pass(&self) -> bool {
        self.sections.iter().all(|s| s.passed == s.cases)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SelftestError {
    #[error(transparent)]
    HasseWitt(#[from] HasseWittError),
    #[error(transparent)]
    Variety(#[from] VarietyError),
    #[error(transparent)]
    Semilinear(#[from] SemilinearError),
    #[error(transparent)]
    Mu(#[from] mu::MuError),
    #[error(transparent)]
    Modrep(#[from] modrep::ModrepError),
}

fn section(name: &str) -> Section {
    Section { name: name.into(), cases: 0, passed: 0, digest: Vec::new() }
}

impl Section {
    fn record(&mut self, pass: bool, digest: String) {
        self.cases += 1;
        self.passed += usize::from(pass);
        self.digest.push(digest);
    }
}

/// A small randomized run over every module, reproducible from `seed`.
pub fn selftest(seed: u64, budget: u64) -> Result<SelftestReport, SelftestError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fields: Vec<FieldCtx> = [(3, 1), (3, 2), (5, 1)].iter().map(|&(p, f)| make_field(p, f).expect("small field")).collect();

    let mut semi = section("semilinear");
    for i in 0..30 {
        let ctx = &fields[i % fields.len()];
        let r = rng.gen_range(1..=4);
        let op = random_semilinear_op(ctx, ctx.degree(), r, &mut rng);
        let fit = op.fitting_decomposition();
        let fixed = op.fixed_space(DEFAULT_M_CAP)?;
        let pass = fit.stable_basis.len() + fit.nilpotent_basis.len() == r && fixed.dim() == fit.stable_basis.len();
        semi.record(
            pass,
            format!("q={} r={r} stable={} m*={:?}", op.q(), fit.stable_basis.len(), fixed.required_degree),
        );
    }

    let mut rep = section("modrep");
    for i in 0..30 {
        let ctx = &fields[if i % 2 == 0 { 0 } else { 2 }];
        let m = modrep::random_module(ctx, 3, &mut rng);
        let periodic = (-1..2).all(|j| m.tate_cohomology(j).dim == m.tate_cohomology(j + 2).dim);
        let ext: Vec<usize> = (1..=3).map(|d| m.ext_dim(d)).collect();
        let brute: Vec<usize> = (1..=3).map(|d| modrep::ext_dim_by_resolution(&m, d)).collect();
        rep.record(periodic && ext == brute, format!("p={} jordan={:?} ext={ext:?}", ctx.p(), m.jordan_type()));
    }
    for ctx in [&fields[0], &fields[2]] {
        for n in 1..=3 {
            let l = modrep::compute_l_lprime(&modrep::build_periodic_complex(ctx, n))?;
            rep.record((l.l_dim, l.lprime_dim) == (1, 1), format!("p={} n={n} L={} L'={}", ctx.p(), l.l_dim, l.lprime_dim));
        }
    }
    let free = CyclicModule::regular(&fields[0]);
    rep.record((0..4).all(|j| free.tate_cohomology(j).dim == 0), "free module acyclic".into());

    let mut hw = section("hassewitt");
    let f3 = Hypersurface::new(build_fp(3).map_err(HasseWittError::from)?)?;
    let katz = hassewitt::katz_check(&f3, 3, budget)?;
    let counts: Vec<u64> = katz.rows.iter().map(|r| r.count).collect();
    hw.record(katz.all_pass(), format!("f_3 counts={counts:?}"));
    for i in 0..6 {
        let ctx = &fields[if i % 2 == 0 { 0 } else { 2 }];
        let x = random_smooth_plane_curve(ctx, 3 + i % 2, &mut rng);
        let k = hassewitt::katz_check(&x, 2, budget)?;
        let counts: Vec<u64> = k.rows.iter().map(|r| r.count).collect();
        hw.record(k.all_pass(), format!("p={} d={} counts={counts:?}", ctx.p(), x.degree()));
    }
    for _ in 0..3 {
        let x = random_plane_curve(&fields[1], 3, &mut rng).map_err(HasseWittError::from)?;
        let twisted = hassewitt::hw_matrix(&x)?.a_q;
        let direct = hassewitt::hw_matrix_direct(&x)?;
        hw.record(twisted == direct, format!("GF(9) cubic A_q={:?}", direct.get(0, 0)));
    }

    let mut ell = section("mu");
    let sweep = mu::mu_sweep(5, budget, DEFAULT_M_CAP)?;
    for e in &sweep.entries {
        ell.record(e.pass(), format!("{:?} c={} a={}", e.coeffs, e.c_p, e.a_trace));
    }

    Ok(SelftestReport { seed, sections: vec![semi, rep, hw, ell] })
}
