//! Command-line front end: JSON in, JSON out.
//!
//! Exit codes: 0 on success, 1 on a mathematical failure (a JSON witness is
//! written to stdout), 2 on usage or input errors.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::acceptance;
use crate::algebra::{self, WienerSeries};
use crate::blaschke::{self, check_weighted_unitary, BlaschkeFactor, Realization};
use crate::cara::{self, HerglotzData};
use crate::error::Error;
use crate::interp::{self, InterpolationData};
use crate::mps::MatrixPowerSeries;
use crate::numkit::{self, CMat, CMatJson, Tolerance};
use crate::schur::{self, Verdict};
use crate::spaces::{self, FockGrid, WeightSequence};
use crate::symm::{self, Symmetry};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const DEFAULT_ORDER: usize = 32;
const MIN_ORDER: usize = 4;

#[derive(Debug, Parser)]
#[command(name = "mhk", version, about = "Schur analysis for power series in a matrix variable")]
pub struct Cli {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(subcommand)]
    pub cmd: Command,
}

/// Settings shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Truncation order N (at least 4).
    #[arg(long, global = true)]
    pub order: Option<usize>,
    #[arg(long = "tol-abs", global = true, default_value_t = 1e-10)]
    pub tol_abs: f64,
    #[arg(long = "tol-rel", global = true, default_value_t = 1e-8)]
    pub tol_rel: f64,
    /// Seed for sampled points and random tests.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Star products, inverses and evaluation of series.
    #[command(subcommand)]
    Series(SeriesCmd),
    /// Hardy and Fock inner products, kernels, quadrature.
    #[command(subcommand)]
    Space(SpaceCmd),
    /// Blaschke factors at a matrix node.
    #[command(subcommand)]
    Blaschke(BlaschkeCmd),
    /// Interpolation at matrix nodes.
    #[command(subcommand)]
    Interp(InterpCmd),
    /// Schur multipliers: checks, realizations, factorization, extraction.
    #[command(subcommand)]
    Schur(SchurCmd),
    /// Carathéodory functions.
    #[command(subcommand)]
    Cara(CaraCmd),
    /// Wiener algebra inversion and rational realization.
    #[command(subcommand)]
    Algebra(AlgebraCmd),
    /// Quaternionic and split symmetries.
    #[command(subcommand)]
    Symm(SymmCmd),
    /// Run the acceptance battery.
    VerifyAll {
        /// Run only these criteria (1-based ids).
        #[arg(long)]
        only: Vec<usize>,
    },
}

#[derive(Debug, Subcommand)]
pub enum SeriesCmd {
    /// F ⋆ G, truncated at --order when given.
    Mul {
        #[arg(long)]
        f: Option<PathBuf>,
        #[arg(long)]
        g: PathBuf,
    },
    /// Star inverse through --order (default: the order of F).
    Inv {
        #[arg(long)]
        f: Option<PathBuf>,
    },
    /// F(A) with its tail bound.
    Eval {
        #[arg(long)]
        f: Option<PathBuf>,
        #[arg(long = "A")]
        a: PathBuf,
    },
    /// F(A) by the trapezoid rule on |z| = r.
    Contour {
        #[arg(long)]
        f: Option<PathBuf>,
        #[arg(long = "A")]
        a: PathBuf,
        #[arg(long)]
        r: f64,
        /// Number of nodes (default 2(N+1) + 64).
        #[arg(long)]
        m: Option<usize>,
    },
    /// R_A F.
    Resolvent {
        #[arg(long)]
        f: Option<PathBuf>,
        #[arg(long = "A")]
        a: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Weights {
    Hardy,
    Fock,
    Dirichlet,
}

#[derive(Debug, Subcommand)]
pub enum SpaceCmd {
    /// Matrix inner product [F, G] and its trace.
    Inner {
        #[arg(long)]
        f: Option<PathBuf>,
        /// Defaults to F.
        #[arg(long)]
        g: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Weights::Hardy)]
        weights: Weights,
    },
    /// Reproducing kernel K(·, W) through --order.
    Kernel {
        #[arg(long = "W")]
        w: Option<PathBuf>,
    },
    /// Fock norm by polar Gauss quadrature, next to the exact weighted form.
    Quadrature {
        #[arg(long)]
        f: Option<PathBuf>,
        #[arg(long, default_value_t = 400)]
        radial: usize,
        #[arg(long, default_value_t = 64)]
        angular: usize,
        #[arg(long, default_value_t = 6.0)]
        cutoff: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum BlaschkeCmd {
    Build {
        #[arg(long = "A")]
        a: Option<PathBuf>,
    },
    Realize {
        #[arg(long = "A")]
        a: Option<PathBuf>,
    },
    /// Solve U_A ⋆ G = H.
    Divide {
        #[arg(long = "A")]
        a: PathBuf,
        #[arg(long = "H")]
        h: Option<PathBuf>,
        #[arg(long)]
        buffer: Option<usize>,
    },
}

#[derive(Debug, Subcommand)]
pub enum InterpCmd {
    /// Minimal-norm solution, Θ, and optionally F_min + Θ ⋆ G.
    Solve {
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        param: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum SchurCmd {
    /// Toeplitz and kernel tests.
    Check {
        #[arg(long = "S")]
        s: Option<PathBuf>,
        /// JSON array of matrices (default: scalar circles plus seeded normal matrices).
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// Series of a contractive colligation {a, b, c, d}.
    Realize {
        #[arg(long = "R")]
        r: Option<PathBuf>,
    },
    /// Find S with Q = P ⋆ S.
    Leech {
        #[arg(long = "P")]
        p: PathBuf,
        #[arg(long = "Q")]
        q: PathBuf,
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// Coisometric colligation on the model space.
    Extract {
        #[arg(long = "S")]
        s: Option<PathBuf>,
    },
    /// Isometric multiplier that fails the pointwise kernel test.
    Counterexample,
}

#[derive(Debug, Subcommand)]
pub enum CaraCmd {
    /// Series of iX + Σ atoms.
    Synth {
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Moment and kernel tests.
    Check {
        #[arg(long)]
        phi: Option<PathBuf>,
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// Recover (C_0, R_0) and report both index conventions.
    Recover {
        #[arg(long)]
        phi: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum AlgebraCmd {
    Invert {
        #[arg(long)]
        f: Option<PathBuf>,
        #[arg(long, default_value_t = algebra::DEFAULT_GRID)]
        grid: usize,
    },
    /// Ho–Kalman realization; --tol-abs is the relative rank cut.
    Realize {
        #[arg(long)]
        f: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Kind {
    Quaternionic,
    Split,
}

#[derive(Debug, Subcommand)]
pub enum SymmCmd {
    /// Admissibility of the symmetry, and symmetry of U_A when --A is given.
    Check {
        #[arg(long, value_enum, conflicts_with = "j")]
        kind: Option<Kind>,
        /// Half dimension for the standard kinds.
        #[arg(long, default_value_t = 1)]
        h: usize,
        /// Custom J (acts by A ↦ J Ā J^{-1}).
        #[arg(long = "J")]
        j: Option<PathBuf>,
        #[arg(long = "A")]
        a: Option<PathBuf>,
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
    /// Block embedding of (a₁, a₂).
    Embed {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        a1: PathBuf,
        #[arg(long)]
        a2: PathBuf,
    },
}

/// Failure of a command, with its exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Fail(Value),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let witness = match &e {
            Error::KernelNotPsd { min_eig, witness } => json!({ "lambda_min": min_eig, "witness": witness }),
            Error::NotContraction { norm } | Error::NotMultiplier { norm } => json!({ "norm": norm }),
            Error::NotCaraMultiplier { min_eig } => json!({ "lambda_min": min_eig }),
            Error::DeterminantVanishes { z } => json!({ "z": [z.re, z.im] }),
            Error::NotFixed { residual } | Error::NotInRange { residual } => json!({ "residual": residual }),
            Error::NoRankPlateau => json!({}),
            _ => return CliError::Usage(e.to_string()),
        };
        CliError::Fail(json!({ "verdict": "Fail", "error": e.to_string(), "witness": witness }))
    }
}

type CliResult = std::result::Result<Outcome, CliError>;

/// A report and whether it records a mathematical failure.
pub struct Outcome {
    report: Value,
    fail: bool,
}

impl Outcome {
    fn ok(report: Value) -> Self {
        Outcome { report, fail: false }
    }

    fn verdict(report: Value, pass: bool) -> Self {
        Outcome { report, fail: !pass }
    }
}

struct Ctx<'a> {
    run: RunArgs,
    stdin: &'a mut dyn Read,
    stdin_used: bool,
}

impl Ctx<'_> {
    fn tol(&self) -> Tolerance {
        Tolerance::new(self.run.tol_abs, self.run.tol_rel)
    }

    fn order_or(&self, default: usize) -> usize {
        self.run.order.unwrap_or(default)
    }

    fn text(&mut self, path: Option<&Path>) -> std::result::Result<(String, String), CliError> {
        match path {
            Some(p) if p != Path::new("-") => std::fs::read_to_string(p)
                .map(|t| (t, p.display().to_string()))
                .map_err(|e| CliError::Usage(format!("{}: {e}", p.display()))),
            _ => {
                if self.stdin_used {
                    return Err(CliError::Usage("only one input can come from stdin".into()));
                }
                self.stdin_used = true;
                let mut t = String::new();
                self.stdin.read_to_string(&mut t).map_err(|e| CliError::Usage(format!("stdin: {e}")))?;
                Ok((t, "stdin".into()))
            }
        }
    }

    fn load<T: DeserializeOwned>(&mut self, path: Option<&Path>) -> std::result::Result<T, CliError> {
        let (text, name) = self.text(path)?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{name}: malformed JSON: {e}")))
    }

    fn matrix(&mut self, path: Option<&Path>) -> std::result::Result<CMat, CliError> {
        let j: CMatJson = self.load(path)?;
        Ok(CMat::try_from(j)?)
    }

    fn matrices(&mut self, path: Option<&Path>) -> std::result::Result<Vec<CMat>, CliError> {
        let js: Vec<CMatJson> = self.load(path)?;
        Ok(js.into_iter().map(CMat::try_from).collect::<crate::Result<_>>()?)
    }

    fn series(&mut self, path: Option<&Path>) -> std::result::Result<MatrixPowerSeries, CliError> {
        self.load(path)
    }
}

fn m(x: &CMat) -> Value {
    serde_json::to_value(CMatJson::from(x)).expect("matrix serializes")
}

fn v<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report serializes")
}

/// Parse `argv`, run the command and write the report. Returns the exit code.
pub fn dispatch<I, T>(argv: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    if let Some(n) = cli.run.order {
        if n < MIN_ORDER {
            let _ = writeln!(stderr, "error: --order must be at least {MIN_ORDER}, got {n}");
            return EXIT_USAGE;
        }
    }
    if !(cli.run.tol_abs >= 0.0 && cli.run.tol_rel >= 0.0) {
        let _ = writeln!(stderr, "error: tolerances must be non-negative");
        return EXIT_USAGE;
    }
    let out = cli.run.out.clone();
    let mut ctx = Ctx { run: cli.run, stdin, stdin_used: false };
    let result = run(&mut ctx, &cli.cmd, stderr);
    let (report, code) = match result {
        Ok(o) => {
            let code = if o.fail { EXIT_FAIL } else { EXIT_OK };
            (o.report, code)
        }
        Err(CliError::Fail(w)) => (w, EXIT_FAIL),
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_USAGE;
        }
    };
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    if let Some(path) = out {
        if let Err(e) = std::fs::write(&path, &text) {
            let _ = writeln!(stderr, "error: {}: {e}", path.display());
            return EXIT_USAGE;
        }
        if code != EXIT_FAIL {
            return code;
        }
    }
    let _ = stdout.write_all(text.as_bytes());
    code
}

fn run(ctx: &mut Ctx, cmd: &Command, stderr: &mut dyn Write) -> CliResult {
    match cmd {
        Command::Series(c) => series(ctx, c),
        Command::Space(c) => space(ctx, c),
        Command::Blaschke(c) => blaschke_cmd(ctx, c),
        Command::Interp(c) => interp_cmd(ctx, c),
        Command::Schur(c) => schur_cmd(ctx, c),
        Command::Cara(c) => cara_cmd(ctx, c),
        Command::Algebra(c) => algebra_cmd(ctx, c),
        Command::Symm(c) => symm_cmd(ctx, c),
        Command::VerifyAll { only } => verify_all(ctx, only, stderr),
    }
}

fn series(ctx: &mut Ctx, cmd: &SeriesCmd) -> CliResult {
    Ok(Outcome::ok(match cmd {
        SeriesCmd::Mul { f, g } => {
            let (f, g) = (ctx.series(f.as_deref())?, ctx.series(Some(g))?);
            let prod = match ctx.run.order {
                Some(n) => f.star_mul_trunc(&g, n)?,
                None => f.star_mul(&g)?,
            };
            v(&prod)
        }
        SeriesCmd::Inv { f } => {
            let f = ctx.series(f.as_deref())?;
            v(&f.star_inverse(ctx.order_or(f.order()))?)
        }
        SeriesCmd::Eval { f, a } => {
            let (f, a) = (ctx.series(f.as_deref())?, ctx.matrix(Some(a))?);
            let e = f.eval_with_tail(&a)?;
            json!({ "value": m(&e.value), "tail_bound": e.tail_bound })
        }
        SeriesCmd::Contour { f, a, r, m: nodes } => {
            let (f, a) = (ctx.series(f.as_deref())?, ctx.matrix(Some(a))?);
            let nodes = nodes.unwrap_or(2 * (f.order() + 1) + 64);
            json!({ "value": m(&f.contour_eval(&a, *r, nodes)?), "nodes": nodes, "r": r })
        }
        SeriesCmd::Resolvent { f, a } => {
            let (f, a) = (ctx.series(f.as_deref())?, ctx.matrix(Some(a))?);
            v(&f.resolvent(&a)?)
        }
    }))
}

fn space(ctx: &mut Ctx, cmd: &SpaceCmd) -> CliResult {
    Ok(Outcome::ok(match cmd {
        SpaceCmd::Inner { f, g, weights } => {
            let f = ctx.series(f.as_deref())?;
            let g = match g {
                Some(path) => ctx.series(Some(path))?,
                None => f.clone(),
            };
            let n = f.order().max(g.order());
            let ip = match weights {
                Weights::Hardy => spaces::hardy_inner(&f, &g)?,
                Weights::Fock => spaces::weighted_inner(&f, &g, &WeightSequence::fock(n))?,
                Weights::Dirichlet => spaces::weighted_inner(&f, &g, &WeightSequence::dirichlet(n))?,
            };
            let tr = ip.trace();
            json!({ "matrix": m(&ip), "trace": [tr.re, tr.im] })
        }
        SpaceCmd::Kernel { w } => {
            let w = ctx.matrix(w.as_deref())?;
            let k = spaces::szego_kernel(&w, ctx.order_or(DEFAULT_ORDER))?;
            json!({ "series": v(&k.series), "tail_bound": k.tail_bound })
        }
        SpaceCmd::Quadrature { f, radial, angular, cutoff } => {
            let f = ctx.series(f.as_deref())?;
            let grid = FockGrid { radial: *radial, angular: *angular, cutoff: *cutoff };
            let q = spaces::gaussian_quadrature_fock(&f, grid)?;
            let exact = spaces::weighted_inner(&f, &f, &WeightSequence::fock(f.order()))?;
            json!({ "quadrature": m(&q), "weighted_form": m(&exact), "difference": (&q - &exact).norm() })
        }
    }))
}

fn blaschke_report(bf: &BlaschkeFactor) -> Value {
    let (stein, l) = bf.invariant_residuals();
    let at_node = bf.series.eval(&bf.a).map(|x| x.norm()).ok();
    json!({
        "a": m(&bf.a),
        "gamma": m(&bf.gamma),
        "l": m(&bf.l),
        "l_sqrt": m(&bf.l_sqrt),
        "series": v(&bf.series),
        "residuals": { "stein": stein, "l_identity": l, "at_node": at_node },
    })
}

fn blaschke_cmd(ctx: &mut Ctx, cmd: &BlaschkeCmd) -> CliResult {
    let n = ctx.order_or(DEFAULT_ORDER);
    Ok(Outcome::ok(match cmd {
        BlaschkeCmd::Build { a } => blaschke_report(&BlaschkeFactor::build(&ctx.matrix(a.as_deref())?, n)?),
        BlaschkeCmd::Realize { a } => {
            let r = BlaschkeFactor::build(&ctx.matrix(a.as_deref())?, n)?.realization();
            json!({ "realization": v(&r), "weighted_unitary_residual": check_weighted_unitary(&r) })
        }
        BlaschkeCmd::Divide { a, h, buffer } => {
            let a = ctx.matrix(Some(a))?;
            let h = ctx.series(h.as_deref())?;
            let bf = BlaschkeFactor::build(&a, h.order())?;
            let d = blaschke::divide_blaschke(&h, &bf, *buffer)?;
            json!({ "quotient": v(&d.quotient), "residual": d.residual, "retained": d.retained })
        }
    }))
}

fn interp_cmd(ctx: &mut Ctx, cmd: &InterpCmd) -> CliResult {
    let InterpCmd::Solve { data, param } = cmd;
    let data: InterpolationData = ctx.load(data.as_deref())?;
    data.validate()?;
    let n = ctx.order_or(DEFAULT_ORDER);
    let sol = interp::solve_min(&data, n)?;
    let theta_at_nodes = match &sol.theta {
        Some(t) => Some(data.nodes.iter().map(|a| t.eval(a).map(|x| x.norm())).try_fold(0.0f64, |acc, r| r.map(|x| acc.max(x)))?),
        None => None,
    };
    let mut report = json!({
        "gram": m(&sol.gram),
        "lambda_min": sol.lambda_min,
        "fmin": v(&sol.fmin),
        "theta": sol.theta.as_ref().map(v),
        "residuals": {
            "fmin": interp::interpolation_residual(&sol.fmin, &data)?,
            "theta_at_nodes": theta_at_nodes,
            "tail_bound": interp::tail_bound(&data.nodes, n),
        },
    });
    if let Some(path) = param {
        let g = ctx.series(Some(path))?;
        let f = interp::parametrize(&sol, &g)?;
        report["param"] = json!({ "series": v(&f), "residual": interp::interpolation_residual(&f, &data)? });
    }
    Ok(Outcome::ok(report))
}

#[derive(Deserialize)]
struct ColligationInput {
    #[serde(with = "numkit::cmat_serde")]
    a: CMat,
    #[serde(with = "numkit::cmat_serde")]
    b: CMat,
    #[serde(with = "numkit::cmat_serde")]
    c: CMat,
    #[serde(with = "numkit::cmat_serde")]
    d: CMat,
}

fn points_or_default(ctx: &mut Ctx, path: Option<&Path>, p: usize) -> std::result::Result<Vec<CMat>, CliError> {
    match path {
        Some(path) => ctx.matrices(Some(path)),
        None => Ok(schur::leech::default_samples(p, ctx.run.seed)),
    }
}

fn schur_cmd(ctx: &mut Ctx, cmd: &SchurCmd) -> CliResult {
    let tol = ctx.tol();
    match cmd {
        SchurCmd::Check { s, points } => {
            let s = ctx.series(s.as_deref())?;
            let pts = points_or_default(ctx, points.as_deref(), s.p())?;
            let rep = schur::check_multiplier(&s, ctx.order_or(s.order()), &pts, &tol)?;
            let fail = rep.verdict == Verdict::Fail;
            Ok(Outcome::verdict(v(&rep), !fail))
        }
        SchurCmd::Realize { r } => {
            let col: ColligationInput = ctx.load(r.as_deref())?;
            let p = col.d.nrows();
            let r = Realization::unweighted(col.a, col.b, col.c, col.d)?;
            let s = schur::realization_to_series(&r, p, ctx.order_or(DEFAULT_ORDER))?;
            let norm = numkit::max_singular_value(&r.colligation());
            Ok(Outcome::ok(json!({ "series": v(&s), "colligation_norm": norm })))
        }
        SchurCmd::Leech { p, q, points } => {
            let (p, q) = (ctx.series(Some(p))?, ctx.series(Some(q))?);
            let pts = points_or_default(ctx, points.as_deref(), p.p())?;
            let n = ctx.order_or(p.order().max(q.order()));
            let sol = schur::leech_solve(&p, &q, &pts, n, &tol)?;
            Ok(Outcome::ok(json!({
                "summary": v(&sol.summary()),
                "toeplitz_pass": sol.toeplitz.pass,
                "s": v(&sol.s),
                "realization": v(&sol.realization),
            })))
        }
        SchurCmd::Extract { s } => {
            let s = ctx.series(s.as_deref())?;
            Ok(Outcome::ok(v(&schur::coisometric_extract(&s, ctx.order_or(s.order()))?)))
        }
        SchurCmd::Counterexample => {
            let rep = schur::counterexample::counterexample_suite_with(ctx.run.seed, ctx.order_or(20), 5)?;
            Ok(Outcome::ok(v(&rep)))
        }
    }
}

fn cara_cmd(ctx: &mut Ctx, cmd: &CaraCmd) -> CliResult {
    let tol = ctx.tol();
    match cmd {
        CaraCmd::Synth { data } => {
            let d: HerglotzData = ctx.load(data.as_deref())?;
            d.validate()?;
            Ok(Outcome::ok(v(&cara::herglotz_series(&d, ctx.order_or(DEFAULT_ORDER))?)))
        }
        CaraCmd::Check { phi, points } => {
            let phi = ctx.series(phi.as_deref())?;
            let pts = points_or_default(ctx, points.as_deref(), phi.p())?;
            let moments = cara::moment_check(&phi, ctx.order_or(phi.order()).min(phi.order()), &tol)?;
            let kernel = cara::cara_kernel_gram(&phi, &pts, &tol)?;
            let pass = moments.pass && kernel.verdict == Verdict::Pass;
            Ok(Outcome::verdict(
                json!({
                    "verdict": if pass { "Pass" } else { "Fail" },
                    "moments": v(&moments),
                    "kernel": { "lambda_min": kernel.lambda_min, "verdict": kernel.verdict, "witness": kernel.witness },
                }),
                pass,
            ))
        }
        CaraCmd::Recover { phi } => {
            let phi = ctx.series(phi.as_deref())?;
            let n = ctx.order_or(phi.order());
            Ok(Outcome::ok(v(&cara::realization_recovery(&phi, n, &tol)?)))
        }
    }
}

fn algebra_cmd(ctx: &mut Ctx, cmd: &AlgebraCmd) -> CliResult {
    match cmd {
        AlgebraCmd::Invert { f, grid } => {
            let f = WienerSeries::new(ctx.series(f.as_deref())?)?;
            let n = ctx.order_or(f.series.order().max(DEFAULT_ORDER));
            let inv = algebra::wplus_invert(&f, n, *grid)?;
            Ok(Outcome::ok(json!({ "inverse": v(&inv.g), "summary": v(&inv.summary()) })))
        }
        AlgebraCmd::Realize { f } => {
            let f = ctx.series(f.as_deref())?;
            let h = algebra::hankel_realize(&f, ctx.run.tol_abs)?;
            Ok(Outcome::ok(json!({
                "realization": v(&h.realization),
                "rank": h.rank,
                "singular_values": h.singular_values,
                "residual": h.residual,
            })))
        }
    }
}

fn symm_cmd(ctx: &mut Ctx, cmd: &SymmCmd) -> CliResult {
    match cmd {
        SymmCmd::Check { kind, h, j, a, samples } => {
            let phi = match (kind, j) {
                (_, Some(path)) => Symmetry::custom(ctx.matrix(Some(path))?)?,
                (Some(Kind::Split), None) => Symmetry::split(*h),
                _ => Symmetry::quaternionic(*h),
            };
            let pairs = symm::sample_pairs(phi.dim(), *samples, ctx.run.seed);
            let rep = symm::admissible_check(&phi, &pairs, ctx.run.tol_abs)?;
            let mut pass = rep.pass;
            let mut report = json!({ "kind": phi.kind, "admissible": v(&rep) });
            if let Some(path) = a {
                let a = ctx.matrix(Some(path))?;
                let residual = symm::blaschke_symmetry_check(&phi, &a, ctx.order_or(DEFAULT_ORDER))?;
                let ok = residual <= ctx.tol().scaled(1.0);
                pass &= ok;
                report["blaschke"] = json!({ "residual": residual, "pass": ok });
            }
            report["verdict"] = json!(if pass { "Pass" } else { "Fail" });
            Ok(Outcome::verdict(report, pass))
        }
        SymmCmd::Embed { kind, a1, a2 } => {
            let (a1, a2) = (ctx.matrix(Some(a1))?, ctx.matrix(Some(a2))?);
            let e = match kind {
                Kind::Quaternionic => symm::embed_quaternion(&a1, &a2)?,
                Kind::Split => symm::embed_split(&a1, &a2)?,
            };
            Ok(Outcome::ok(m(&e)))
        }
    }
}

fn verify_all(ctx: &mut Ctx, only: &[usize], stderr: &mut dyn Write) -> CliResult {
    let ids: Vec<usize> = if only.is_empty() { (1..=acceptance::count()).collect() } else { only.to_vec() };
    let mut results = Vec::with_capacity(ids.len());
    for id in ids {
        let r = acceptance::run_one(id, ctx.run.seed)
            .ok_or_else(|| CliError::Usage(format!("no criterion {id}; ids run from 1 to {}", acceptance::count())))?;
        let _ = writeln!(stderr, "{}", r.line());
        results.push(r);
    }
    let pass = results.iter().all(|r| r.pass);
    Ok(Outcome::verdict(json!({ "seed": ctx.run.seed, "pass": pass, "criteria": v(&results) }), pass))
}

/// Cap the global rayon pool at `MHK_THREADS` when set.
pub fn init_threads() -> std::result::Result<(), String> {
    let Ok(raw) = std::env::var("MHK_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| format!("MHK_THREADS must be a positive integer, got {raw:?}"))?;
    if n == 0 {
        return Err("MHK_THREADS must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}
