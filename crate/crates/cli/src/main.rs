//! `chf`: build, verify and analyse complex hyperbolic surface group
//! representations.
//!
//! Exit codes: 0 success, 1 mathematical violation found, 2 input error,
//! 3 numerical failure.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chf_core::detector::{self, Budget, GeneratorSet, Verdict, VerdictCheck};
use chf_core::json::GeneratorFile;
use chf_core::pentagon::{self, ConfigFile, PentagonConfig, RelationCertificate};
use chf_core::words::{self, Alphabet};
use chf_core::{plot, sample, Error, HermitianSpace, Tolerances};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(
    name = "chf",
    version,
    about = "Complex hyperbolic surface group toolkit"
)]
struct Cli {
    #[command(flatten)]
    run: RunArgs,
    #[command(subcommand)]
    cmd: Command,
}

/// Overrides for [`RunConfig`]. A settings file supplies defaults; flags
/// win over it, and `CHF_SEED` wins over the file's seed.
#[derive(Args)]
struct RunArgs {
    /// JSON file with any of: tolerances, max_len, jobs, seed.
    #[arg(long, global = true)]
    settings: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for random audits.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Membership residual for SU(2,1) and SU(1,1).
    #[arg(long, global = true)]
    tol_su: Option<f64>,
    /// Margin on |λ| - 1 for loxodromic classification.
    #[arg(long, global = true)]
    tol_class: Option<f64>,
    /// Relative tolerance for cube-root trace types and Im tr.
    #[arg(long, global = true)]
    tol_trace: Option<f64>,
    /// Sine bound for stable complex lines.
    #[arg(long, global = true)]
    tol_line: Option<f64>,
    /// Imaginary-part bound for totally real bases.
    #[arg(long, global = true)]
    tol_real: Option<f64>,
    /// Angular tolerance on geodesic endpoints.
    #[arg(long, global = true)]
    tol_geo: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the four-pentagon configuration and certify its relations.
    BuildCounterexample {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        phase: f64,
        /// Tolerance for relation and membership certificates.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Re-check a configuration file, or a verdict against its generators.
    Verify {
        #[arg(long, conflicts_with_all = ["generators", "verdict"])]
        config: Option<PathBuf>,
        #[arg(long, requires = "verdict")]
        generators: Option<PathBuf>,
        #[arg(long, requires = "generators")]
        verdict: Option<PathBuf>,
    },
    /// Spectral scan of all even words of the involutions up to a length.
    Scan {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        max_len: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Optional CSV with one row per distinct element.
        #[arg(long)]
        traces: Option<PathBuf>,
    },
    /// Stable complex line, stable totally real subspace, or a witness.
    Decide {
        #[command(flatten)]
        input: GroupInput,
        #[arg(long)]
        out: PathBuf,
    },
    /// Real dimension of the span of the group in 3×3 complex matrices.
    Burnside {
        #[command(flatten)]
        input: GroupInput,
        #[arg(long)]
        max_len: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// SVG of a configuration.
    Plot {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the shipped fixture files into a directory.
    Fixtures {
        #[arg(long)]
        dir: PathBuf,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct GroupInput {
    /// Generator file.
    #[arg(long)]
    generators: Option<PathBuf>,
    /// Configuration file; its even generators `Q1·Qj` are used.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct RunConfig {
    tolerances: Tolerances,
    max_len: usize,
    jobs: usize,
    seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            tolerances: Tolerances::default(),
            max_len: 8,
            jobs: 1,
            seed: Budget::default().seed,
        }
    }
}

#[derive(Debug)]
enum Failure {
    Violation(String),
    Input(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Violation(_) => 1,
            Failure::Input(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Violation(m) | Failure::Input(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let m = e.to_string();
        match e {
            Error::RelationFailed { .. } => Failure::Violation(m),
            Error::IllConditioned { .. }
            | Error::NotLoxodromic
            | Error::NonRealTrace(_)
            | Error::SingularChange => Failure::Numerical(m),
            _ => Failure::Input(m),
        }
    }
}

type Outcome = Result<(), Failure>;

fn input_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Input(format!("{}: {e}", path.display()))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| input_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| input_err(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Outcome {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| Failure::Numerical(e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}

fn write_text(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| input_err(path, e))
}

fn resolve(args: &RunArgs) -> Result<RunConfig, Failure> {
    let mut cfg: RunConfig = match &args.settings {
        Some(p) => read_json(p)?,
        None => RunConfig::default(),
    };
    if let Ok(s) = std::env::var("CHF_SEED") {
        cfg.seed = s
            .trim()
            .parse()
            .map_err(|_| Failure::Input(format!("CHF_SEED is not an unsigned integer: {s:?}")))?;
    }
    let t = &mut cfg.tolerances;
    for (slot, flag) in [
        (&mut t.su, args.tol_su),
        (&mut t.class, args.tol_class),
        (&mut t.trace, args.tol_trace),
        (&mut t.line, args.tol_line),
        (&mut t.real, args.tol_real),
        (&mut t.geo, args.tol_geo),
    ] {
        if let Some(v) = flag {
            *slot = v;
        }
    }
    if let Some(j) = args.jobs {
        cfg.jobs = j;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg.tolerances.validate()?;
    if cfg.jobs == 0 {
        return Err(Failure::Input("--jobs must be at least 1".into()));
    }
    Ok(cfg)
}

fn load_config(path: &Path, tol: &Tolerances) -> Result<PentagonConfig, Failure> {
    let file: ConfigFile = read_json(path)?;
    Ok(PentagonConfig::from_file(&file, tol)?)
}

fn load_group(input: &GroupInput, tol: &Tolerances) -> Result<GeneratorSet, Failure> {
    if let Some(p) = &input.generators {
        let file: GeneratorFile = read_json(p)?;
        return GeneratorSet::from_file(&file, tol.su).map_err(|e| input_err(p, e));
    }
    let p = input.config.as_ref().expect("clap enforces one input");
    let cfg = load_config(p, tol)?;
    let names = (2..=8).map(|j| format!("Q1Q{j}")).collect();
    Ok(GeneratorSet::new(
        HermitianSpace::ball(),
        cfg.even_generators(),
        Some(names),
    )?)
}

fn report_certificates(certs: &[RelationCertificate]) -> usize {
    let mut failed = 0;
    for c in certs {
        let mark = if c.passed { "ok  " } else { "FAIL" };
        if !c.passed {
            failed += 1;
        }
        println!(
            "{mark} {:<48} residual {:.3e} (tol {:.0e})",
            c.name, c.residual, c.tolerance
        );
    }
    failed
}

fn report_config(file: &ConfigFile) -> Outcome {
    let failed = report_certificates(&file.certificates);
    let mut separated = true;
    for s in &file.separation {
        let what = match &s.outcome {
            Ok(p) => format!("{:?} (margin {:.3e} rad)", p.relation, p.margin),
            Err(e) => e.clone(),
        };
        let tag = if s.required { "required" } else { "recorded" };
        println!(
            "geodesic q{}q{} vs q{}q{} [{tag}]: {what}",
            s.first[0], s.first[1], s.second[0], s.second[1]
        );
        separated &= !s.required || s.is_ultraparallel();
    }
    println!("min pairwise distance {:.6}", file.min_pairwise_distance);
    if failed > 0 {
        return Err(Failure::Violation(format!(
            "{failed} certificate(s) failed"
        )));
    }
    if !separated {
        return Err(Failure::Violation(
            "separating geodesics are not ultraparallel".into(),
        ));
    }
    if file.min_pairwise_distance <= 1e-6 {
        return Err(Failure::Violation("midpoints are not distinct".into()));
    }
    Ok(())
}

fn cmd_build(run: &RunConfig, out: &Path, phase: f64, tol: Option<f64>) -> Outcome {
    if !phase.is_finite() {
        return Err(Failure::Input(format!(
            "--phase must be finite, got {phase}"
        )));
    }
    let mut t = run.tolerances;
    if let Some(v) = tol {
        t.relation = v;
        t.su = v;
        t.validate()?;
    }
    let cfg = PentagonConfig::build(phase)?;
    let file = cfg.to_file(&t);
    write_json(out, &file)?;
    report_config(&file)
}

fn cmd_verify_config(run: &RunConfig, path: &Path) -> Outcome {
    let stored: ConfigFile = read_json(path)?;
    let cfg = PentagonConfig::from_file(&stored, &run.tolerances)?;
    report_config(&cfg.to_file(&run.tolerances))
}

fn cmd_verify_verdict(run: &RunConfig, generators: &Path, verdict: &Path) -> Outcome {
    let file: GeneratorFile = read_json(generators)?;
    let set =
        GeneratorSet::from_file(&file, run.tolerances.su).map_err(|e| input_err(generators, e))?;
    let stored: VerdictFile = read_json(verdict)?;
    let check = detector::verify_verdict(&set, &stored.certificate, &run.tolerances);
    println!(
        "{} {}: {} (residual {:.3e})",
        stored.verdict,
        if check.ok { "ok" } else { "FAIL" },
        check.detail,
        check.residual
    );
    if check.ok {
        Ok(())
    } else {
        Err(Failure::Violation(
            "verdict certificate does not reproduce".into(),
        ))
    }
}

fn involution_alphabet(cfg: &PentagonConfig) -> Result<Alphabet, Failure> {
    let names: Vec<String> = (1..=8).map(|i| format!("Q{i}")).collect();
    Ok(Alphabet::involutions(&names, &cfg.generators())?)
}

fn cmd_scan(
    run: &RunConfig,
    config: &Path,
    max_len: usize,
    out: &Path,
    traces: Option<&Path>,
) -> Outcome {
    if !max_len.is_multiple_of(2) {
        return Err(Failure::Input(format!(
            "--max-len must be even, got {max_len}"
        )));
    }
    let cfg = load_config(config, &run.tolerances)?;
    let alphabet = involution_alphabet(&cfg)?;
    let mut csv = match traces {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p).map_err(|e| input_err(p, e))?);
            writeln!(w, "word,length,trace_re,trace_im,kind,alpha_sign,passed")
                .map_err(|e| input_err(p, e))?;
            Some((p, w))
        }
        None => None,
    };
    let mut io_error = None;
    let report = words::scan(
        &alphabet,
        max_len,
        run.jobs,
        run.tolerances.trace,
        run.tolerances.class,
        |rec, check| {
            let Some((_, w)) = csv.as_mut() else { return };
            let kind = match rec.classification() {
                Some(c) => format!("{:?}", c.kind),
                None => "Unclassified".into(),
            };
            let alpha = check.alpha_sign.map(|s| s.to_string()).unwrap_or_default();
            let r = writeln!(
                w,
                "{},{},{},{},{kind},{alpha},{}",
                alphabet.format(&rec.word),
                rec.len(),
                check.trace.re,
                check.trace.im,
                check.passed()
            );
            if let Err(e) = r {
                io_error.get_or_insert(e);
            }
        },
    )?;
    if let Some((p, mut w)) = csv {
        if let Some(e) = io_error {
            return Err(input_err(p, e));
        }
        w.flush().map_err(|e| input_err(p, e))?;
    }
    write_json(out, &report)?;
    println!(
        "{} distinct even elements up to length {max_len}: {} loxodromic (alpha=+1: {}, alpha=-1: {}), {} violation(s)",
        report.elements, report.kinds.loxodromic, report.alpha_plus, report.alpha_minus, report.violation_count
    );
    match &report.alpha_minus_witness {
        Some(w) => println!("alpha=-1 witness at length {}: {}", w.length, w.word),
        None => println!("no alpha=-1 element up to length {max_len}"),
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Violation(format!(
            "{} word(s) violate the spectral form",
            report.violation_count
        )))
    }
}

/// `verdict.json`.
#[derive(Serialize, Deserialize)]
struct VerdictFile {
    verdict: String,
    certificate: Verdict,
    residuals: VerdictCheck,
    #[serde(flatten)]
    decision: serde_json::Value,
}

fn cmd_decide(run: &RunConfig, input: &GroupInput, out: &Path) -> Outcome {
    let set = load_group(input, &run.tolerances)?;
    let budget = Budget {
        seed: run.seed,
        jobs: run.jobs,
        ..Budget::default()
    };
    let decision = detector::decide(&set, &budget, &run.tolerances)?;
    let check = detector::verify_verdict(&set, &decision.verdict, &run.tolerances);
    let mut rest =
        serde_json::to_value(&decision).map_err(|e| Failure::Numerical(e.to_string()))?;
    if let Some(m) = rest.as_object_mut() {
        m.remove("verdict");
    }
    let file = VerdictFile {
        verdict: decision.verdict.kind().into(),
        certificate: decision.verdict.clone(),
        residuals: check.clone(),
        decision: rest,
    };
    write_json(out, &file)?;
    println!(
        "verdict: {} ({}, residual {:.3e})",
        file.verdict, check.detail, check.residual
    );
    println!("burnside dimension: {}", decision.burnside_dim);
    match &decision.verdict {
        Verdict::HypothesisViolated(w) => Err(Failure::Violation(format!(
            "loxodromic {} has trace off every line R·δ",
            w.word
        ))),
        Verdict::Inconclusive { reason, .. } => Err(Failure::Numerical(reason.clone())),
        _ if !check.ok => Err(Failure::Numerical("certificate does not reproduce".into())),
        _ => Ok(()),
    }
}

fn cmd_burnside(
    run: &RunConfig,
    input: &GroupInput,
    max_len: usize,
    out: Option<&Path>,
) -> Outcome {
    let set = load_group(input, &run.tolerances)?;
    let b = detector::burnside_dimension(&set, max_len, run.jobs)?;
    println!(
        "real span dimension {} (ranks by length {:?})",
        b.dimension, b.by_length
    );
    if let Some(p) = out {
        write_json(p, &b)?;
    }
    Ok(())
}

fn cmd_plot(run: &RunConfig, config: &Path, out: &Path) -> Outcome {
    let cfg = load_config(config, &run.tolerances)?;
    write_text(out, &plot::svg(&cfg, run.tolerances.geo))
}

fn cmd_fixtures(run: &RunConfig, dir: &Path) -> Outcome {
    fs::create_dir_all(dir).map_err(|e| input_err(dir, e))?;
    let ball = HermitianSpace::ball();
    let t = &run.tolerances;
    let cfg = pentagon::build_configuration(0.0, t)?;
    write_json(&dir.join("config.json"), &cfg.to_file(t))?;
    let even_names = (2..=8).map(|j| format!("Q1Q{j}")).collect();
    let even = GeneratorSet::new(ball, cfg.even_generators(), Some(even_names))?;
    let sets = [
        (
            "counterexample.json",
            even,
            "even generators Q1·Qj of the pentagon configuration",
        ),
        (
            "rfuchsian.json",
            GeneratorSet::from_matrices(
                ball,
                &sample::planted_real_group(run.seed, 3).0,
                None,
                t.su,
            )?,
            "three real SO(2,1) elements conjugated by one SU(2,1) element",
        ),
        (
            "violator.json",
            GeneratorSet::from_matrices(ball, &sample::planted_violator(run.seed), None, t.su)?,
            "real-trace loxodromic and a loxodromic with trace 1+i",
        ),
        (
            "generic_pair.json",
            GeneratorSet::from_matrices(ball, &sample::generic_pair(run.seed), None, t.su)?,
            "two loxodromics with non-real traces in general position",
        ),
    ];
    for (name, set, what) in sets {
        write_json(&dir.join(name), &set.to_file(Some(what.into())))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    let run = resolve(&cli.run)?;
    match cli.cmd {
        Command::BuildCounterexample { out, phase, tol } => cmd_build(&run, &out, phase, tol),
        Command::Verify {
            config: Some(c), ..
        } => cmd_verify_config(&run, &c),
        Command::Verify {
            generators: Some(g),
            verdict: Some(v),
            ..
        } => cmd_verify_verdict(&run, &g, &v),
        Command::Verify { .. } => Err(Failure::Input(
            "verify needs --config, or --generators with --verdict".into(),
        )),
        Command::Scan {
            config,
            max_len,
            out,
            traces,
        } => cmd_scan(
            &run,
            &config,
            max_len.unwrap_or(run.max_len),
            &out,
            traces.as_deref(),
        ),
        Command::Decide { input, out } => cmd_decide(&run, &input, &out),
        Command::Burnside {
            input,
            max_len,
            out,
        } => cmd_burnside(
            &run,
            &input,
            max_len.unwrap_or(Budget::default().burnside_len),
            out.as_deref(),
        ),
        Command::Plot { config, out } => cmd_plot(&run, &config, &out),
        Command::Fixtures { dir } => cmd_fixtures(&run, &dir),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("chf: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
