//! Subcommands. Each verb maps onto one library operation and yields a [`RunReport`].

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Value};

use plk_core::geometry::{HullRelation, Point};
use plk_core::lift::examples::{
    barycentric_failure, example_absval, example_absval_literal, example_square_cover, random_instance, InstanceKind,
};
use plk_core::lift::{
    homotopy_certificate, perturbation_stability, plify, sample_double_points, stability_radius, triangulate_lift,
    verify_certificate, verify_embedding_exact, CubeHomotopy, HomotopyReport, LiftConfig, LiftFunction,
    LiftTriangulation,
};
use plk_core::morin::{
    chebyshev, classify_lift_sign, connect_to_tau, delta_product_forward, delta_product_inverse, delta_sample_fr,
    delta_solve_fr, morin_eval, morin_lift_eval, mr_membership, roots, tau, DoublePoint, MapContext, MorinSpec,
    MrPath, MrPolynomial, Sign, StageKind,
};
use plk_core::morin::forms::random_payload;
use plk_core::rational::{from_f64_exact, rat, to_f64, Rational};
use plk_core::simplicial::{validate_complex, Complex, SimplicialMap};

use crate::dto::{
    parse_rat, rat_str, rational_list, rational_strings, ComplexDoc, Envelope, InstanceDto, MapDoc, PairDto,
    PayloadDto, TriangulationDto,
};
use crate::error::CliError;
use crate::io::{parse_json, read_json, read_text, write_json};
use crate::plot::{self, Series};
use crate::report::RunReport;

/// Default numeric threshold for root-dependent checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(name = "plk", version, about = "Exact PL embedded lifts and Morin normal-form laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the run report here instead of stdout.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    /// Threshold for floating-point checks. Exact checks ignore it.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// CSV series to emit: g-graph, delta or roots.
    #[arg(long, global = true, requires = "plot_out")]
    pub plot: Option<String>,
    #[arg(long, global = true, requires = "plot")]
    pub plot_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MorinArgs {
    #[arg(long)]
    pub r: usize,
    /// Source dimension; defaults to `r`.
    #[arg(long)]
    pub n: Option<usize>,
    /// Target dimension; defaults to `n`.
    #[arg(long)]
    pub m: Option<usize>,
}

impl MorinArgs {
    fn spec(&self) -> Result<MorinSpec, CliError> {
        let n = self.n.unwrap_or(self.r.max(1));
        Ok(MorinSpec::new(self.r, n, self.m.unwrap_or(n))?)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a document and check its structural invariants.
    Validate { input: PathBuf },
    /// Subdivide, derive and certify an instance.
    TriangulateLift {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        safety: Option<f64>,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        osc_resolution: Option<usize>,
        #[arg(long)]
        cert_resolution: Option<usize>,
        #[arg(long)]
        max_rounds: Option<usize>,
    },
    /// PL-ify a certified triangulation into a table on `K'`.
    Plify {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check a triangulation certificate or a PL instance exactly.
    Verify { input: PathBuf },
    /// Certify the cube homotopy of a triangulation at given or random `t`.
    Homotopy {
        input: PathBuf,
        /// Comma-separated rationals in `[0, 1]`.
        #[arg(long, conflicts_with = "random")]
        t: Option<String>,
        #[arg(long, requires = "seed")]
        random: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 2)]
        resolution: usize,
    },
    /// Random PL perturbations of the PL-ified lift.
    Stability {
        input: PathBuf,
        /// Defaults to half the minimum certified hull distance.
        #[arg(long)]
        delta: Option<String>,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        /// Also search for the failure radius.
        #[arg(long)]
        radius: bool,
        #[arg(long, default_value_t = 6)]
        steps: usize,
    },
    /// Emit a builtin instance.
    Example {
        /// absval, absval-literal, square-cover, zigzag, fold or fold-planar.
        name: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hull intersection of plain barycentric cells of the absval example.
    BarycentricFailure {
        #[arg(long)]
        eps: String,
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
    /// Coefficients of `T_r`.
    Chebyshev { r: usize },
    /// Coefficients of `τ_r`.
    Tau { r: usize },
    /// Evaluate `F_r` or its lift at a rational point.
    Morin {
        #[command(flatten)]
        spec: MorinArgs,
        /// Comma-separated coordinates `t_1, …, t_{n−1}, x`.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Evaluate the lift with this sign (+ or -).
        #[arg(long, allow_hyphen_values = true)]
        sign: Option<String>,
    },
    /// Double points of `f_r`, solved from `x₁, x₂` or sampled.
    Delta {
        r: usize,
        #[arg(long, allow_hyphen_values = true, requires = "x2")]
        x1: Option<String>,
        #[arg(long, allow_hyphen_values = true, requires = "x1")]
        x2: Option<String>,
        /// `t_2, …, t_{r−1}`.
        #[arg(long, allow_hyphen_values = true, default_value = "")]
        free: String,
        #[arg(long, conflicts_with = "x1", requires = "seed")]
        count: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Product coordinates of `Δ_{F_r}`, forward from random payloads or inverse of a pair.
    ProductCoords {
        #[command(flatten)]
        spec: MorinArgs,
        #[arg(long, allow_hyphen_values = true, requires = "second", conflicts_with = "seed")]
        first: Option<String>,
        #[arg(long, allow_hyphen_values = true, requires = "first")]
        second: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Path in `M_r` from a polynomial with a double point to `τ_r`.
    ConnectTau {
        r: usize,
        #[arg(long, allow_hyphen_values = true, requires = "x2")]
        x1: Option<String>,
        #[arg(long, allow_hyphen_values = true, requires = "x1")]
        x2: Option<String>,
        /// `t_2, …, t_{r−1}` of the starting polynomial.
        #[arg(long, allow_hyphen_values = true, default_value = "")]
        free: String,
        #[arg(long, conflicts_with = "x1")]
        seed: Option<u64>,
        #[arg(long, default_value_t = 32)]
        steps: usize,
    },
    /// Sign of the lift `x ↦ εx + a sin(ωx)` of `T_r`.
    Classify {
        r: usize,
        #[arg(long, allow_hyphen_values = true)]
        sign: String,
        #[arg(long, default_value_t = 0.0)]
        amp: f64,
        #[arg(long, default_value_t = 1.0)]
        freq: f64,
    },
    /// Straight-line isotopy from `ψ = ε'x + b t_1` to `Φ_r^ε`.
    IsotopyCheck {
        #[command(flatten)]
        spec: MorinArgs,
        /// Target sign `ε`.
        #[arg(long, allow_hyphen_values = true)]
        sign: String,
        /// Sign `ε'` of the lift being tested; defaults to `ε`.
        #[arg(long, allow_hyphen_values = true)]
        lift_sign: Option<String>,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        shear: f64,
        #[arg(long, default_value_t = 40)]
        samples: usize,
        #[arg(long)]
        seed: u64,
    },
}

impl Command {
    /// CSV series this verb can emit.
    pub fn series(&self) -> &'static [&'static str] {
        match self {
            Command::TriangulateLift { .. } | Command::Example { .. } => &["g-graph"],
            Command::Delta { .. } => &["delta"],
            Command::ConnectTau { .. } => &["roots"],
            _ => &[],
        }
    }

    pub fn verb(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::TriangulateLift { .. } => "triangulate-lift",
            Command::Plify { .. } => "plify",
            Command::Verify { .. } => "verify",
            Command::Homotopy { .. } => "homotopy",
            Command::Stability { .. } => "stability",
            Command::Example { .. } => "example",
            Command::BarycentricFailure { .. } => "barycentric-failure",
            Command::Chebyshev { .. } => "chebyshev",
            Command::Tau { .. } => "tau",
            Command::Morin { .. } => "morin",
            Command::Delta { .. } => "delta",
            Command::ProductCoords { .. } => "product-coords",
            Command::ConnectTau { .. } => "connect-tau",
            Command::Classify { .. } => "classify",
            Command::IsotopyCheck { .. } => "isotopy-check",
        }
    }
}

struct Ctx {
    tolerance: f64,
    plot: Option<(String, PathBuf)>,
}

impl Ctx {
    /// Writes the requested series if this verb offers it.
    fn emit(&self, report: &mut RunReport, make: impl FnOnce() -> Result<Series, CliError>) -> Result<(), CliError> {
        let Some((_, path)) = &self.plot else { return Ok(()) };
        let series = make()?;
        plot::emit(&series, path)?;
        report.artifacts.push(path.display().to_string());
        Ok(())
    }
}

fn write_artifact<T: serde::Serialize>(report: &mut RunReport, out: &Option<PathBuf>, value: &T) -> Result<(), CliError> {
    if let Some(path) = out {
        write_json(path, value)?;
        report.artifacts.push(path.display().to_string());
    }
    Ok(())
}

fn pt(p: &Point) -> Vec<String> {
    rational_strings(&p.coords)
}

fn parse_sign(s: &str) -> Result<Sign, CliError> {
    Sign::parse(s).ok_or_else(|| CliError::Usage(format!("sign must be + or -, got {s:?}")))
}

fn need_seed(seed: Option<u64>, what: &str) -> Result<u64, CliError> {
    seed.ok_or_else(|| CliError::Usage(format!("{what} is random and needs --seed")))
}

fn load_triangulation(path: &Path) -> Result<(TriangulationDto, LiftTriangulation, LiftFunction), CliError> {
    let dto: TriangulationDto = read_json(path)?;
    let (t, g) = dto.to_core()?;
    Ok((dto, t, g))
}

/// Runs `cli` and returns its report, with the error that ended it early if any.
pub fn run(cli: &Cli) -> (RunReport, Option<CliError>) {
    let verb = cli.command.verb();
    let ctx = Ctx {
        tolerance: cli.tolerance.unwrap_or(DEFAULT_TOLERANCE),
        plot: cli.plot.clone().zip(cli.plot_out.clone()),
    };
    let mut report = RunReport::new(verb);
    let outcome = if !(ctx.tolerance > 0.0 && ctx.tolerance.is_finite()) {
        Err(CliError::Usage("--tolerance must be positive".into()))
    } else if let Some((name, _)) = &ctx.plot {
        plot::check_series(name, cli.command.series()).and_then(|()| dispatch(&cli.command, &ctx, &mut report))
    } else {
        dispatch(&cli.command, &ctx, &mut report)
    };
    match outcome {
        Ok(()) => (report, None),
        Err(e) => {
            let mut r = RunReport::error(verb, &e);
            r.timing = report.timing;
            r.artifacts = report.artifacts;
            (r, Some(e))
        }
    }
}

fn dispatch(cmd: &Command, ctx: &Ctx, report: &mut RunReport) -> Result<(), CliError> {
    match cmd {
        Command::Validate { input } => validate(input, report),
        Command::TriangulateLift { input, out, safety, eta, osc_resolution, cert_resolution, max_rounds } => {
            let mut cfg = LiftConfig::default();
            cfg.safety = safety.unwrap_or(cfg.safety);
            cfg.eta = eta.unwrap_or(cfg.eta);
            cfg.osc_resolution = osc_resolution.unwrap_or(cfg.osc_resolution);
            cfg.cert_resolution = cert_resolution.unwrap_or(cfg.cert_resolution);
            cfg.max_rounds = max_rounds.unwrap_or(cfg.max_rounds);
            triangulate(input, out, &cfg, ctx, report)
        }
        Command::Plify { input, out } => plify_cmd(input, out, report),
        Command::Verify { input } => verify(input, report),
        Command::Homotopy { input, t, random, seed, resolution } => homotopy(input, t, *random, *seed, *resolution, report),
        Command::Stability { input, delta, trials, seed, radius, steps } => {
            stability(input, delta, *trials, *seed, *radius, *steps, report)
        }
        Command::Example { name, seed, out } => example(name, *seed, out, ctx, report),
        Command::BarycentricFailure { eps, samples } => barycentric(eps, *samples, report),
        Command::Chebyshev { r } => {
            report.result = json!({ "r": r, "coefficients": rational_strings(chebyshev(*r).coeffs()) });
            Ok(())
        }
        Command::Tau { r } => {
            let p = tau(*r)?.to_poly();
            let member = mr_membership(&p, *r);
            report.result = json!({ "r": r, "coefficients": rational_strings(p.coeffs()), "in_mr": member });
            report.require(member, "tau left M_r");
            Ok(())
        }
        Command::Morin { spec, point, sign } => {
            let spec = spec.spec()?;
            let p = rational_list(point)?;
            let value = match sign {
                Some(s) => morin_lift_eval(&spec, parse_sign(s)?, &p)?,
                None => morin_eval(&spec, &p)?,
            };
            report.result = json!({ "r": spec.r(), "n": spec.n(), "m": spec.m(), "point": rational_strings(&p), "value": rational_strings(&value) });
            Ok(())
        }
        Command::Delta { r, x1, x2, free, count, seed } => delta(*r, x1, x2, free, *count, *seed, ctx, report),
        Command::ProductCoords { spec, first, second, seed, count } => {
            product_coords(&spec.spec()?, first, second, *seed, *count, report)
        }
        Command::ConnectTau { r, x1, x2, free, seed, steps } => connect(*r, x1, x2, free, *seed, *steps, ctx, report),
        Command::Classify { r, sign, amp, freq } => classify(*r, parse_sign(sign)?, *amp, *freq, report),
        Command::IsotopyCheck { spec, sign, lift_sign, shear, samples, seed } => {
            let eps = parse_sign(sign)?;
            let lift = lift_sign.as_deref().map(parse_sign).transpose()?.unwrap_or(eps);
            isotopy(&spec.spec()?, eps, lift, *shear, *samples, *seed, report)
        }
    }
}

fn complex_problems(name: &str, c: &Complex) -> Vec<String> {
    validate_complex(c).messages().into_iter().map(|m| format!("{name}: {m}")).collect()
}

fn map_problems(name: &str, f: &SimplicialMap) -> Vec<String> {
    let mut out = complex_problems(&format!("{name} source"), &f.source);
    out.extend(complex_problems(&format!("{name} target"), &f.target));
    if let Err(e) = f.require_nondegenerate() {
        out.push(format!("{name}: {e}"));
    }
    out
}

fn validate(input: &Path, report: &mut RunReport) -> Result<(), CliError> {
    let text = read_text(input)?;
    let env: Envelope = parse_json(&text, input)?;
    let kind = env.kind()?.to_string();
    let problems = match kind.as_str() {
        InstanceDto::KIND => {
            let (f, g) = parse_json::<InstanceDto>(&text, input)?.to_core()?;
            report.result = json!({ "kind": kind, "source_simplices": f.source.len(), "codim": g.codim() });
            map_problems("map", &f)
        }
        TriangulationDto::KIND => {
            let (t, _) = parse_json::<TriangulationDto>(&text, input)?.to_core()?;
            let mut p = map_problems("base", &t.base);
            p.extend(map_problems("subdivided", &t.map));
            p.extend(map_problems("derived", &t.derived_map));
            report.result = json!({ "kind": kind, "certificate_entries": t.certificate.len() });
            p
        }
        "complex" => {
            let c = parse_json::<ComplexDoc>(&text, input)?.complex.to_core()?;
            report.result = json!({ "kind": kind, "simplices": c.len() });
            complex_problems("complex", &c)
        }
        "map" => {
            let f = parse_json::<MapDoc>(&text, input)?.map.to_core()?;
            report.result = json!({ "kind": kind, "source_simplices": f.source.len() });
            map_problems("map", &f)
        }
        RunReport::KIND => {
            parse_json::<RunReport>(&text, input)?;
            report.result = json!({ "kind": kind });
            Vec::new()
        }
        other => return Err(CliError::Schema(format!("unknown document kind {other:?}"))),
    };
    if !problems.is_empty() {
        report.fail(problems[0].clone());
        report.witnesses = problems.into_iter().map(Value::from).collect();
    }
    Ok(())
}

fn lift_graph(f: &SimplicialMap, g: &LiftFunction) -> Result<Series, CliError> {
    if f.source.ambient_dim() != 1 || g.codim() != 1 {
        return Err(CliError::Usage("g-graph needs a lift of a map on an interval".into()));
    }
    let xs: Vec<f64> = f.source.vertices().iter().map(|p| to_f64(&p.coords[0])).collect();
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let eval = |x: f64| g.eval_f64(&[x]).map(|v| v[0]).unwrap_or(f64::NAN);
    Ok(plot::graph(&eval, lo, hi, 10_000))
}

fn triangulate(input: &Path, out: &Option<PathBuf>, cfg: &LiftConfig, ctx: &Ctx, report: &mut RunReport) -> Result<(), CliError> {
    let inst: InstanceDto = read_json(input)?;
    let (f, g) = inst.to_core()?;
    let t = report.timed("triangulate", || triangulate_lift(&f, &g, cfg))?;
    let dto = TriangulationDto::new(inst, &t, cfg);
    write_artifact(report, out, &dto)?;
    report.result = json!({
        "k_vertices": t.map.source.num_vertices(),
        "k_prime_simplices": t.k_derived.result.len(),
        "certificate_entries": t.certificate.len(),
    });
    report.numeric = json!({
        "min_certified_distance": t.min_certified_distance(),
        "constants": { "d_i": t.audit.d, "r_i": t.audit.r },
        "rounds": t.audit.rounds,
        "attempts": t.audit.attempts,
    });
    ctx.emit(report, || lift_graph(&f, &g))
}

fn verdict_json(v: &plk_core::lift::EmbeddingVerdict) -> Value {
    json!({ "injective": v.injective, "pairs_checked": v.pairs_checked, "colliding_pairs": v.colliding_pairs })
}

fn collision_witness(w: &(Point, Point)) -> Value {
    json!(PairDto::new(&w.0, &w.1))
}

fn plify_cmd(input: &Path, out: &Option<PathBuf>, report: &mut RunReport) -> Result<(), CliError> {
    let (dto, t, g) = load_triangulation(input)?;
    let table = report.timed("plify", || plify(&t, &g))?;
    let verdict = report.timed("verify", || verify_embedding_exact(&t.derived_map, &table))?;
    let pl = InstanceDto::new(&format!("{}-pl", dto.instance.name), &t.derived_map, &LiftFunction::PlTable(table))?;
    write_artifact(report, out, &pl)?;
    report.result = verdict_json(&verdict);
    if let Some(w) = &verdict.witness {
        report.witnesses.push(collision_witness(w));
    }
    report.require(verdict.injective, "PL-ification is not injective");
    Ok(())
}

fn verify(input: &Path, report: &mut RunReport) -> Result<(), CliError> {
    let text = read_text(input)?;
    let env: Envelope = parse_json(&text, input)?;
    match env.kind()? {
        TriangulationDto::KIND => {
            let dto: TriangulationDto = parse_json(&text, input)?;
            let (t, g) = dto.to_core()?;
            let res = dto.numeric.config.cert_resolution;
            let bad = report.timed("verify-certificate", || verify_certificate(&t, &g, res))?;
            report.result = json!({ "certificate_entries": t.certificate.len(), "failed_entries": bad.len() });
            report.witnesses = bad.iter().map(|(u, v)| json!({ "u": u, "v": v })).collect();
            report.require(bad.is_empty(), format!("{} separators fail re-verification", bad.len()));
        }
        InstanceDto::KIND => {
            let (f, g) = parse_json::<InstanceDto>(&text, input)?.to_core()?;
            let LiftFunction::PlTable(table) = g else {
                return Err(CliError::Usage("exact verification of an instance needs a pl_table lift".into()));
            };
            let verdict = report.timed("verify-embedding", || verify_embedding_exact(&f, &table))?;
            report.result = verdict_json(&verdict);
            if let Some(w) = &verdict.witness {
                report.witnesses.push(collision_witness(w));
            }
            report.require(verdict.injective, "f x g identifies two points");
        }
        other => return Err(CliError::Schema(format!("cannot verify a document of kind {other:?}"))),
    }
    Ok(())
}

fn homotopy_json(r: &HomotopyReport) -> Value {
    json!({
        "t": rational_strings(&r.t),
        "containment_checked": r.containment_checked,
        "containment_violations": r.containment_violations,
        "injectivity_checked": r.injectivity_checked,
        "injectivity_violations": r.injectivity_violations,
    })
}

/// `count` points of `[0, 1]^n` on the grid of step `1/64`.
pub fn random_cube_points(n: usize, count: usize, seed: u64) -> Vec<Vec<Rational>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (0..n).map(|_| rat(rng.gen_range(0..=64), 64)).collect()).collect()
}

fn homotopy(
    input: &Path,
    t: &Option<String>,
    random: Option<usize>,
    seed: Option<u64>,
    resolution: usize,
    report: &mut RunReport,
) -> Result<(), CliError> {
    let (_, tri, g) = load_triangulation(input)?;
    let h = CubeHomotopy::new(&tri, &g)?;
    let n = h.cube_dim();
    let ts = match (t, random) {
        (Some(s), _) => vec![rational_list(s)?],
        (None, Some(count)) => random_cube_points(n, count, need_seed(seed, "--random")?),
        (None, None) => vec![vec![Rational::from_integer(0.into()); n], vec![Rational::from_integer(1.into()); n]],
    };
    let delta = sample_double_points(&tri.derived_map, resolution)?;
    let reports: Vec<HomotopyReport> = report.timed("certify", || {
        ts.par_iter().map(|t| homotopy_certificate(&h, t, &delta, resolution)).collect::<Result<_, _>>()
    })?;
    let failed = reports.iter().filter(|r| !r.passed()).count();
    for r in reports.iter().filter(|r| !r.passed()) {
        let mut w = homotopy_json(r);
        if let Some(p) = &r.first_violation {
            w["pair"] = collision_witness(p);
        }
        report.witnesses.push(w);
    }
    report.result = json!({ "cube_dim": n, "double_points": delta.len(), "runs": reports.iter().map(homotopy_json).collect::<Vec<_>>() });
    report.require(failed == 0, format!("{failed} of {} parameter values violate the certificate", reports.len()));
    Ok(())
}

fn stability(
    input: &Path,
    delta: &Option<String>,
    trials: usize,
    seed: u64,
    radius: bool,
    steps: usize,
    report: &mut RunReport,
) -> Result<(), CliError> {
    let (_, t, g) = load_triangulation(input)?;
    let gstar = plify(&t, &g)?;
    let bound = t.min_certified_distance().map(|d| d / 2.0);
    let delta = match (delta, bound) {
        (Some(s), _) => parse_rat(s).map_err(|_| CliError::Usage(format!("bad --delta {s:?}")))?,
        (None, Some(b)) => from_f64_exact(b).ok_or_else(|| CliError::Usage("non-finite bound".into()))?,
        (None, None) => return Err(CliError::Usage("no certified distance; give --delta".into())),
    };
    let rep = report.timed("perturb", || perturbation_stability(&t.derived_map, &gstar, &delta, trials, seed))?;
    report.result = json!({ "delta": rat_str(&rep.delta), "trials": rep.trials, "passed": rep.passed });
    report.witnesses = rep.failures.iter().map(|f| json!({ "trial": f.trial, "pair": collision_witness(&f.witness) })).collect();
    report.require(rep.all_passed(), format!("{} of {} perturbations collide", rep.trials - rep.passed, rep.trials));
    let mut numeric = json!({ "bound": bound, "delta": to_f64(&delta) });
    if radius {
        let start = to_f64(&delta).max(f64::MIN_POSITIVE);
        let rad = report.timed("radius", || stability_radius(&t.derived_map, &gstar, start, trials, seed, steps))?;
        numeric["radius"] = json!(rad.radius);
        numeric["failing"] = json!(rad.failing);
        numeric["evaluations"] = json!(rad.evaluations);
        if let Some(b) = bound {
            let ratio = rad.radius / b;
            numeric["ratio"] = json!(ratio);
            report.require((0.25..=4.0).contains(&ratio), format!("radius {} is off the bound {b} by more than 4x", rad.radius));
        }
    }
    report.numeric = numeric;
    Ok(())
}

pub fn builtin_instance(name: &str, seed: Option<u64>) -> Result<(String, SimplicialMap, LiftFunction), CliError> {
    let norm = name.replace('-', "_");
    let (f, g) = match norm.as_str() {
        "absval" => example_absval(),
        "absval_literal" => example_absval_literal(),
        "square_cover" => example_square_cover(),
        other => {
            let kind = InstanceKind::parse(other).ok_or_else(|| CliError::UnknownBuiltin(format!("example {name:?}")))?;
            let inst = random_instance(kind, need_seed(seed, "this example")?);
            return Ok((inst.name, inst.f, inst.g));
        }
    };
    Ok((norm, f, g))
}

fn example(name: &str, seed: Option<u64>, out: &Option<PathBuf>, ctx: &Ctx, report: &mut RunReport) -> Result<(), CliError> {
    let (name, f, g) = builtin_instance(name, seed)?;
    let dto = InstanceDto::new(&name, &f, &g)?;
    write_artifact(report, out, &dto)?;
    report.result = json!({ "name": name, "source_simplices": f.source.len(), "codim": g.codim() });
    ctx.emit(report, || lift_graph(&f, &g))
}

fn barycentric(eps: &str, samples: usize, report: &mut RunReport) -> Result<(), CliError> {
    let eps = parse_rat(eps).map_err(|_| CliError::Usage(format!("bad --eps {eps:?}")))?;
    let bf = barycentric_failure(&eps, samples)?;
    let certified = bf.certified(&LiftFunction::absval_example())?;
    report.result = json!({
        "eps": rat_str(&bf.eps),
        "k": bf.k,
        "pair": [rat_str(&bf.pair.0), rat_str(&bf.pair.1)],
        "positive_zero": rat_str(&bf.positive_zero),
        "negative_zero": rat_str(&bf.negative_zero),
        "hulls_intersect": !bf.relation.is_disjoint(),
        "certified": certified,
    });
    if let HullRelation::Intersect(w) = &bf.relation {
        report.witnesses.push(json!({ "point": pt(&w.point) }));
    }
    report.require(certified, "hull intersection not certified");
    Ok(())
}

fn pair_json(dp: &DoublePoint) -> Value {
    json!(PairDto::new(&dp.first, &dp.second))
}

#[allow(clippy::too_many_arguments)]
fn delta(
    r: usize,
    x1: &Option<String>,
    x2: &Option<String>,
    free: &str,
    count: Option<usize>,
    seed: Option<u64>,
    ctx: &Ctx,
    report: &mut RunReport,
) -> Result<(), CliError> {
    let points = match (x1, x2) {
        (Some(a), Some(b)) => vec![delta_solve_fr(r, &parse_rat(a)?, &parse_rat(b)?, &rational_list(free)?)?],
        _ => delta_sample_fr(r, count.unwrap_or(1), need_seed(seed, "sampling")?)?,
    };
    let bad = points.iter().map(DoublePoint::verify).collect::<Result<Vec<_>, _>>()?.iter().filter(|ok| !**ok).count();
    report.result = json!({ "r": r, "pairs": points.iter().map(pair_json).collect::<Vec<_>>(), "unverified": bad });
    report.require(bad == 0, "a pair is not a double point");
    ctx.emit(report, || {
        let mut header = vec!["x1".to_string(), "x2".to_string()];
        match r {
            0 | 1 => {}
            2 => header.push("t".into()),
            _ => header.extend((1..r).map(|i| format!("t{i}"))),
        }
        let refs: Vec<&str> = header.iter().map(String::as_str).collect();
        let mut s = Series::new("delta", &refs);
        for dp in &points {
            let a = dp.first.to_f64();
            let b = dp.second.to_f64();
            let mut row = vec![a[a.len() - 1], b[b.len() - 1]];
            row.extend_from_slice(&a[..a.len() - 1]);
            s.push(row);
        }
        Ok(s)
    })
}

fn product_coords(
    spec: &MorinSpec,
    first: &Option<String>,
    second: &Option<String>,
    seed: Option<u64>,
    count: usize,
    report: &mut RunReport,
) -> Result<(), CliError> {
    let mut entries = Vec::new();
    let mut failures = 0;
    let mut check = |dp: &DoublePoint, payload: &plk_core::morin::ProductPayload| -> Result<(), CliError> {
        let verified = dp.verify()?;
        let back = delta_product_inverse(spec, dp)?;
        let again = delta_product_forward(spec, &back)?;
        let ok = verified && &back == payload && &again == dp;
        failures += usize::from(!ok);
        entries.push(json!({ "pair": pair_json(dp), "payload": PayloadDto::from_core(payload), "verified": verified, "round_trip": ok }));
        Ok(())
    };
    match (first, second) {
        (Some(a), Some(b)) => {
            let dp = DoublePoint {
                first: Point::new(rational_list(a)?),
                second: Point::new(rational_list(b)?),
                context: MapContext::Morin(*spec),
            };
            let payload = delta_product_inverse(spec, &dp)?;
            check(&dp, &payload)?;
        }
        _ => {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(need_seed(seed, "product-coords")?);
            for _ in 0..count {
                let payload = random_payload(spec, &mut rng)?;
                let dp = delta_product_forward(spec, &payload)?;
                check(&dp, &payload)?;
            }
        }
    }
    report.result = json!({ "r": spec.r(), "n": spec.n(), "m": spec.m(), "entries": entries });
    report.require(failures == 0, format!("{failures} entries fail verification or round trip"));
    Ok(())
}

/// Path samples as `{stages: [{family, t_grid, polys, carried_pairs}]}`.
pub fn path_json(path: &MrPath) -> Value {
    let stages: Vec<Value> = path
        .stages
        .iter()
        .map(|s| {
            json!({
                "family": s.kind.name(),
                "t_grid": s.samples.iter().map(|p| p.t).collect::<Vec<_>>(),
                "polys": s.samples.iter().map(|p| p.poly.coeffs.clone()).collect::<Vec<_>>(),
                "carried_pairs": s.samples.iter().map(|p| [p.pair.0, p.pair.1]).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({ "r": path.r, "stages": stages })
}

fn root_series(path: &MrPath) -> Result<Series, CliError> {
    let r = path.r;
    let header: Vec<String> =
        ["stage".to_string(), "t".to_string()].into_iter().chain((0..=r).map(|i| format!("root{i}"))).collect();
    let refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut s = Series::new("roots", &refs);
    for (k, stage) in path.stages.iter().enumerate().filter(|(_, s)| s.kind == StageKind::Interpolate) {
        for sample in &stage.samples {
            let mut re: Vec<f64> = roots(&sample.poly)?.iter().map(|z| z.re).collect();
            re.sort_by(f64::total_cmp);
            let mut row = vec![k as f64, sample.t];
            row.extend(re);
            s.push(row);
        }
    }
    Ok(s)
}

#[allow(clippy::too_many_arguments)]
fn connect(
    r: usize,
    x1: &Option<String>,
    x2: &Option<String>,
    free: &str,
    seed: Option<u64>,
    steps: usize,
    ctx: &Ctx,
    report: &mut RunReport,
) -> Result<(), CliError> {
    if r < 2 {
        return Err(CliError::Usage("connect-tau needs r >= 2".into()));
    }
    let dp = match (x1, x2) {
        (Some(a), Some(b)) => delta_solve_fr(r, &parse_rat(a)?, &parse_rat(b)?, &rational_list(free)?)?,
        _ => {
            let s = need_seed(seed, "connect-tau without --x1/--x2")?;
            delta_sample_fr(r, 1, s)?.remove(0)
        }
    };
    let a = dp.first.coords[..r - 1].to_vec();
    let (x1, x2) = (&dp.first.coords[r - 1], &dp.second.coords[r - 1]);
    let p = MrPolynomial::new(r, a)?;
    let path = report.timed("path", || connect_to_tau(&p, x1, x2, steps))?;
    let check = path.check(ctx.tolerance)?;
    report.result = json!({
        "start": { "coefficients": rational_strings(p.to_poly().coeffs()), "pair": [rat_str(x1), rat_str(x2)] },
        "samples": check.samples,
        "membership_failures": check.membership_failures,
        "end_in_delta": check.end_in_delta,
    });
    report.numeric = json!({
        "tolerance": ctx.tolerance,
        "max_residual": check.max_residual,
        "end_error": check.end_error,
        "end_pair": [check.end_pair.0, check.end_pair.1],
        "path": path_json(&path),
    });
    report.require(check.passed(ctx.tolerance), "path check failed");
    ctx.emit(report, || root_series(&path))
}

fn classify(r: usize, eps: Sign, amp: f64, freq: f64, report: &mut RunReport) -> Result<(), CliError> {
    let g = move |x: f64| eps.value() * x + amp * (freq * x).sin();
    match classify_lift_sign(r, &g) {
        Ok(c) => {
            let summary: Vec<Value> = c
                .clusters
                .iter()
                .map(|((i, j), s)| json!({ "cluster": [i, j], "plus": s.plus, "minus": s.minus, "zero": s.zero }))
                .collect();
            report.result = json!({
                "r": r,
                "epsilon": c.epsilon.to_string(),
                "evidence": {
                    "orderings": {
                        "maxima": c.maxima_order.map(|s| s.to_string()),
                        "minima": c.minima_order.map(|s| s.to_string()),
                    },
                    "sign_map_summary": summary,
                    "pairs_checked": c.pairs_checked,
                },
            });
            Ok(())
        }
        Err(e @ (plk_core::Error::NotEmbedded { .. } | plk_core::Error::Inconsistent(_))) => {
            report.fail(format!("not classifiable: {e}"));
            Ok(())
        }
        Err(e) => Err(e.into()),
    }
}

#[allow(clippy::too_many_arguments)]
fn isotopy(spec: &MorinSpec, eps: Sign, lift: Sign, shear: f64, samples: usize, seed: u64, report: &mut RunReport) -> Result<(), CliError> {
    let n = spec.n();
    let psi = move |p: &[f64]| lift.value() * p[n - 1] + if n > 1 { shear * p[0] } else { 0.0 };
    let rep = report.timed("isotopy", || plk_core::morin::lift_isotopy_check(spec, &psi, eps, samples, seed))?;
    report.result = json!({
        "requested": eps.to_string(),
        "classified": rep.classified.to_string(),
        "pairs": rep.pairs,
        "t_values": rep.t_values,
        "violations": rep.violations,
    });
    if let Some(w) = &rep.witness {
        report.witnesses.push(json!({ "numeric": { "t": w.t, "first": w.first, "second": w.second } }));
    }
    report.require(rep.passed(), format!("{} violations; first at t = {:?}", rep.violations, rep.witness.as_ref().map(|w| w.t)));
    Ok(())
}
