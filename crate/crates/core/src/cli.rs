//! Command-line front end.
//!
//! Exit codes: 0 all checks pass, 1 a verification failed, 2 usage or parse
//! error, 3 enumeration budget exceeded.

use std::fmt;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::ff::{make_field, FieldCtx, FieldError, TowerEmbedding};
use crate::hassewitt::{self, HasseWittError};
use crate::modrep::{self, CyclicModule, ModrepError};
use crate::mu::{self, EllipticCurve, MuError};
use crate::poly::{build_fp, parse_poly, MultiPoly, PolyError};
use crate::semilinear::{SemilinearError, DEFAULT_M_CAP};
use crate::variety::{budget_from_env, cohomology_dims, CyclicAction, Hypersurface, VarietyError};
use crate::verify::{self, SelftestError};

pub const SCHEMA: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "frobwitt", version, about = "Frobenius on coherent cohomology over finite fields")]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Enumeration cap (points times evaluations); defaults to FROBWITT_BUDGET or 1e8.
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    /// Largest extension degree for explicit fixed vectors.
    #[arg(long, default_value_t = DEFAULT_M_CAP, global = true)]
    pub m_cap: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct HypArgs {
    /// `p` or `p,f` for GF(p^f).
    #[arg(long)]
    pub field: Option<String>,
    /// Homogeneous polynomial, e.g. `X0^3 + 2*X1*X2^2`.
    #[arg(long, conflicts_with_all = ["fp", "curve"])]
    pub poly: Option<String>,
    /// The rotation-invariant degree-p hypersurface f_p.
    #[arg(long, conflicts_with = "curve")]
    pub fp: Option<u64>,
    /// Weierstrass curve, `a=..,b=..` or `a2=..,a4=..,a6=..`.
    #[arg(long)]
    pub curve: Option<String>,
    /// Skip the smoothness precondition.
    #[arg(long)]
    pub assume_smooth: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Mod-p zeta factors and the Hasse-Witt matrix.
    Zeta(HypArgs),
    /// Point counts against Frobenius traces on H^(N-1)(O_X).
    Katz {
        #[command(flatten)]
        hyp: HypArgs,
        #[arg(long, default_value_t = 2)]
        emax: usize,
    },
    /// Number of points over GF(q^e).
    Count {
        #[command(flatten)]
        hyp: HypArgs,
        #[arg(long, default_value_t = 1)]
        e: usize,
    },
    /// Singular point search and exact smoothness certificate.
    Smooth {
        #[command(flatten)]
        hyp: HypArgs,
        #[arg(long, default_value_t = 1)]
        emax: usize,
    },
    /// Fixed points of the coordinate rotation.
    FixedPoints {
        #[command(flatten)]
        hyp: HypArgs,
        #[arg(long, default_value_t = 1)]
        emax: usize,
    },
    /// Dimensions of H^i(O_X) for a degree-d hypersurface in P^n.
    Cohdims {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
    },
    /// Modules over k[Z/p]: Jordan type, Tate cohomology, Ext, L and L'.
    Modrep {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        f: usize,
        /// Block sizes, e.g. `2,3`.
        #[arg(long, value_delimiter = ',')]
        jordan: Option<Vec<usize>>,
        /// Any of tate, ext, llprime, parity.
        #[arg(long, value_delimiter = ',')]
        report: Option<Vec<String>>,
        /// Length of the periodic complex.
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Report L and L' of the periodic complex.
        #[arg(long)]
        ll: bool,
    },
    /// The invariant mu of an elliptic curve.
    Mu {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        f: usize,
        #[arg(long)]
        curve: String,
    },
    /// Hasse invariant against trace of Frobenius for every curve over GF(p).
    MuSweep {
        #[arg(long)]
        p: u64,
    },
    /// Bounded verification of the claims about f_p.
    VerifyFp {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        emax: usize,
    },
    /// Seeded run over every module.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Budget(String),
    Failure(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Budget(m) | CliError::Failure(m) => f.write_str(m),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Failure(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Budget(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Failure(_) => "failure",
            CliError::Usage(_) => "usage",
            CliError::Budget(_) => "budget",
        }
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<PolyError> for CliError {
    fn from(e: PolyError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<VarietyError> for CliError {
    fn from(e: VarietyError) -> Self {
        match e {
            VarietyError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            VarietyError::Poly(p) => p.into(),
            VarietyError::Field(f) => f.into(),
            VarietyError::ZeroPolynomial | VarietyError::NotHomogeneous | VarietyError::TooFewVariables => {
                CliError::Usage(e.to_string())
            }
            VarietyError::NotInvariant => CliError::Failure(e.to_string()),
        }
    }
}

impl From<HasseWittError> for CliError {
    fn from(e: HasseWittError) -> Self {
        match e {
            HasseWittError::Poly(p) => p.into(),
            HasseWittError::Variety(v) => v.into(),
            HasseWittError::UnsupportedCohomologyProfile(_) => CliError::Usage(e.to_string()),
        }
    }
}

impl From<SemilinearError> for CliError {
    fn from(e: SemilinearError) -> Self {
        CliError::Failure(e.to_string())
    }
}

impl From<ModrepError> for CliError {
    fn from(e: ModrepError) -> Self {
        match e {
            ModrepError::NotOrderP | ModrepError::NotSquare => CliError::Usage(e.to_string()),
            _ => CliError::Failure(e.to_string()),
        }
    }
}

impl From<MuError> for CliError {
    fn from(e: MuError) -> Self {
        match e {
            MuError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            MuError::Singular | MuError::EvenCharacteristic => CliError::Usage(e.to_string()),
            MuError::HasseWitt(h) => h.into(),
            MuError::Semilinear(s) => s.into(),
            MuError::Poly(p) => p.into(),
            MuError::Variety(v) => v.into(),
        }
    }
}

impl From<SelftestError> for CliError {
    fn from(e: SelftestError) -> Self {
        match e {
            SelftestError::HasseWitt(h) => h.into(),
            SelftestError::Variety(v) => v.into(),
            SelftestError::Semilinear(s) => s.into(),
            SelftestError::Mu(m) => m.into(),
            SelftestError::Modrep(m) => m.into(),
        }
    }
}

/// A finished command: its report and whether every check in it passed.
pub struct Outcome {
    pub report: Value,
    pub pass: bool,
}

fn outcome<T: Serialize>(report: &T, pass: bool) -> Result<Outcome, CliError> {
    let report = serde_json::to_value(report).map_err(|e| CliError::Failure(e.to_string()))?;
    Ok(Outcome { report, pass })
}

fn parse_field(text: &str) -> Result<FieldCtx, CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let num = |s: &str| s.parse::<u64>().map_err(|_| CliError::Usage(format!("bad field component {s:?}")));
    let (p, f) = match parts.as_slice() {
        [p] => (num(p)?, 1),
        [p, f] => (num(p)?, num(f)? as usize),
        _ => return Err(CliError::Usage(format!("bad field {text:?}, expected p or p,f"))),
    };
    Ok(make_field(p, f)?)
}

/// `a=1,b=0` or `a2=..,a4=..,a6=..`; values are integers reduced mod p.
fn parse_curve(ctx: &FieldCtx, text: &str) -> Result<EllipticCurve, CliError> {
    let (mut a2, mut a4, mut a6) = (ctx.zero(), ctx.zero(), ctx.zero());
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (key, val) = item.split_once('=').ok_or_else(|| CliError::Usage(format!("bad curve item {item:?}")))?;
        let v: i64 = val.trim().parse().map_err(|_| CliError::Usage(format!("bad coefficient {val:?}")))?;
        let v = ctx.from_i64(v);
        match key.trim() {
            "a2" => a2 = v,
            "a" | "a4" => a4 = v,
            "b" | "a6" => a6 = v,
            k => return Err(CliError::Usage(format!("unknown curve coefficient {k:?}"))),
        }
    }
    Ok(EllipticCurve::new(ctx, a2, a4, a6)?)
}

fn hypersurface(args: &HypArgs) -> Result<Hypersurface, CliError> {
    let field = args.field.as_deref().map(parse_field).transpose()?;
    let poly: MultiPoly = if let Some(text) = &args.poly {
        let ctx = field.ok_or_else(|| CliError::Usage("--poly needs --field".into()))?;
        parse_poly(&ctx, text, None)?
    } else if let Some(p) = args.fp {
        let f = build_fp(p)?;
        match field {
            None => f,
            Some(ctx) if ctx == *f.ctx() => f,
            Some(ctx) => {
                let emb = TowerEmbedding::new(f.ctx(), &ctx)?;
                f.base_change(&emb)?
            }
        }
    } else if let Some(c) = &args.curve {
        let ctx = field.ok_or_else(|| CliError::Usage("--curve needs --field".into()))?;
        return Ok(parse_curve(&ctx, c)?.projectivize());
    } else {
        return Err(CliError::Usage("one of --poly, --fp, --curve is required".into()));
    };
    Ok(Hypersurface::new(poly)?)
}

const SMOOTH_COLUMNS: usize = 4000;

fn require_smooth(x: &Hypersurface, args: &HypArgs, budget: u64) -> Result<Value, CliError> {
    if args.assume_smooth {
        return Ok(json!("assumed"));
    }
    match x.is_smooth_exact(SMOOTH_COLUMNS) {
        Some(true) => Ok(json!("certified")),
        Some(false) => Err(CliError::Failure("hypersurface is singular".into())),
        None => {
            let probe = x.smoothness_probe(1, budget)?;
            match probe.witness {
                Some(w) => Err(CliError::Failure(format!("singular point found: {:?}", w.coords))),
                None => Ok(json!("probed at e = 1")),
            }
        }
    }
}

fn run_command(cli: &Cli) -> Result<Outcome, CliError> {
    let budget = cli.budget.unwrap_or_else(budget_from_env);
    match &cli.command {
        Command::Zeta(args) => {
            let x = hypersurface(args)?;
            let smooth = require_smooth(&x, args, budget)?;
            let z = hassewitt::zeta_mod_p(&x)?;
            let ctx = x.ctx();
            let report = json!({
                "smoothness": smooth,
                "zeta0": z.zeta0,
                "zeta1": z.zeta1,
                "zeta0_mod_p": hassewitt::prime_coefficients(ctx, &z.zeta0),
                "zeta1_mod_p": hassewitt::prime_coefficients(ctx, &z.zeta1),
                "hw_basis": z.hw.basis,
                "a_p": z.hw.a_p.to_rows(),
                "a_q": z.hw.a_q.to_rows(),
            });
            outcome(&report, true)
        }
        Command::Katz { hyp, emax } => {
            let x = hypersurface(hyp)?;
            let smooth = require_smooth(&x, hyp, budget)?;
            let r = hassewitt::katz_check(&x, *emax, budget)?;
            outcome(&json!({"smoothness": smooth, "katz": r}), r.all_pass())
        }
        Command::Count { hyp, e } => {
            let x = hypersurface(hyp)?;
            let c = x.count_points(*e, budget)?;
            outcome(&c, true)
        }
        Command::Smooth { hyp, emax } => {
            let x = hypersurface(hyp)?;
            let probe = x.smoothness_probe(*emax, budget)?;
            let exact = x.is_smooth_exact(SMOOTH_COLUMNS);
            let pass = probe.witness.is_none() && exact != Some(false);
            outcome(&json!({"probe": probe, "exact": exact}), pass)
        }
        Command::FixedPoints { hyp, emax } => {
            let x = hypersurface(hyp)?;
            let act = CyclicAction::new(x.poly().nvars());
            let r = x.sigma_fixed_points(&act, *emax, budget)?;
            let pass = r.iter().all(|d| d.on_variety.is_empty());
            outcome(&r, pass)
        }
        Command::Cohdims { n, d } => {
            if *n == 0 {
                return Err(CliError::Usage("n must be positive".into()));
            }
            outcome(&cohomology_dims(*n, *d), true)
        }
        Command::Modrep { p, f, jordan, report, n, ll } => {
            let ctx = make_field(*p, *f)?;
            cmd_modrep(&ctx, jordan.as_deref(), report.as_deref(), *n, *ll)
        }
        Command::Mu { p, f, curve } => {
            let ctx = make_field(*p, *f)?;
            let e = parse_curve(&ctx, curve)?;
            let r = mu::mu_elliptic(&e, budget, cli.m_cap)?;
            let pass = r.consistent();
            outcome(&r, pass)
        }
        Command::MuSweep { p } => {
            let r = mu::mu_sweep(*p, budget, cli.m_cap)?;
            let pass = r.all_pass();
            outcome(&r, pass)
        }
        Command::VerifyFp { p, emax } => {
            let r = verify::verify_fp(*p, *emax, budget)?;
            let pass = r.all_pass();
            outcome(&r, pass)
        }
        Command::Selftest { seed } => {
            let r = verify::selftest(*seed, budget)?;
            let pass = r.all_pass();
            outcome(&r, pass)
        }
    }
}

fn cmd_modrep(
    ctx: &FieldCtx,
    jordan: Option<&[usize]>,
    report: Option<&[String]>,
    n: usize,
    ll: bool,
) -> Result<Outcome, CliError> {
    let p = ctx.p() as usize;
    let mut wants: Vec<String> = report.map(|r| r.iter().map(|s| s.to_ascii_lowercase()).collect()).unwrap_or_default();
    if ll {
        wants.push("llprime".into());
    }
    if wants.is_empty() {
        wants = vec!["tate".into(), "ext".into()];
    }
    if n == 0 {
        return Err(CliError::Usage("complex length must be positive".into()));
    }
    let module = match jordan {
        Some(sizes) => {
            if let Some(&s) = sizes.iter().find(|&&s| s == 0 || s > p) {
                return Err(CliError::Usage(format!("block size {s} outside 1..={p}")));
            }
            CyclicModule::from_jordan_type(ctx, sizes)?
        }
        None => CyclicModule::trivial(ctx),
    };
    let mut out = serde_json::Map::new();
    out.insert("jordan_type".into(), json!(module.jordan_type()));
    let mut pass = true;
    for w in &wants {
        match w.as_str() {
            "tate" => {
                let dims: Vec<usize> = (-2..=2).map(|i| module.tate_cohomology(i).dim).collect();
                out.insert("tate_degrees".into(), json!([-2, -1, 0, 1, 2]));
                out.insert("tate_dims".into(), json!(dims));
            }
            "ext" => {
                let dims: Vec<usize> = (1..=4).map(|m| module.ext_dim(m)).collect();
                let brute: Vec<usize> = (1..=4).map(|m| modrep::ext_dim_by_resolution(&module, m)).collect();
                pass &= dims == brute;
                out.insert("ext_degrees".into(), json!([1, 2, 3, 4]));
                out.insert("ext_dims".into(), json!(dims));
                out.insert("ext_dims_by_resolution".into(), json!(brute));
            }
            "llprime" => {
                let r = modrep::compute_l_lprime(&modrep::build_periodic_complex(ctx, n))?;
                pass &= (r.l_dim, r.lprime_dim) == (1, 1);
                out.insert("complex_length".into(), json!(n));
                out.insert("l_dim".into(), json!(r.l_dim));
                out.insert("lprime_dim".into(), json!(r.lprime_dim));
            }
            "parity" => {
                let odd = n % 2 == 1;
                let r = modrep::verify_parity_module(&module, odd)?;
                pass &= r.all_pass();
                out.insert("parity".into(), serde_json::to_value(&r).map_err(|e| CliError::Failure(e.to_string()))?);
            }
            other => return Err(CliError::Usage(format!("unknown report {other:?}"))),
        }
    }
    Ok(Outcome { report: Value::Object(out), pass })
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Zeta(_) => "zeta",
        Command::Katz { .. } => "katz",
        Command::Count { .. } => "count",
        Command::Smooth { .. } => "smooth",
        Command::FixedPoints { .. } => "fixed-points",
        Command::Cohdims { .. } => "cohdims",
        Command::Modrep { .. } => "modrep",
        Command::Mu { .. } => "mu",
        Command::MuSweep { .. } => "mu-sweep",
        Command::VerifyFp { .. } => "verify-fp",
        Command::Selftest { .. } => "selftest",
    }
}

fn render_text(name: &str, report: &Value, pass: bool) -> String {
    let mut s = format!("{name}: {}\n", if pass { "PASS" } else { "FAIL" });
    match report {
        Value::Object(map) => {
            for (k, v) in map {
                s.push_str(&format!("  {k}: {v}\n"));
            }
        }
        Value::Array(items) => {
            for v in items {
                s.push_str(&format!("  {v}\n"));
            }
        }
        v => s.push_str(&format!("  {v}\n")),
    }
    s
}

/// Runs a parsed command line; returns the text to print and the exit code.
pub fn execute(cli: &Cli) -> (String, u8) {
    let name = command_name(&cli.command);
    match run_command(cli) {
        Ok(o) => {
            let code = if o.pass { 0 } else { 1 };
            let text = match cli.format {
                Format::Json => {
                    let doc = json!({"schema": SCHEMA, "command": name, "pass": o.pass, "report": o.report});
                    serde_json::to_string_pretty(&doc).expect("values serialize") + "\n"
                }
                Format::Text => render_text(name, &o.report, o.pass),
            };
            (text, code)
        }
        Err(e) => {
            let text = match cli.format {
                Format::Json => {
                    let doc = json!({"schema": SCHEMA, "command": name, "error": {"kind": e.kind(), "message": e.to_string()}});
                    serde_json::to_string_pretty(&doc).expect("values serialize") + "\n"
                }
                Format::Text => format!("{name}: error: {e}\n"),
            };
            (text, e.code())
        }
    }
}

pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (text, code) = execute(&cli);
    if code >= 2 && cli.format == Format::Text {
        eprint!("{text}");
    } else {
        print!("{text}");
    }
    ExitCode::from(code)
}
