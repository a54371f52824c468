use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use benenson::automaton::{parse_ben, parse_bits, write_ben, Alphabet, AutomatonError};
use benenson::barrington::{barrington_compile, BarringtonError};
use benenson::compiler::{
    compile_fixed_width, compile_fixed_width_constd, compile_general, compile_permutation,
    compile_sparse1, CompileError, Compiled, Construction, SkipRules,
};
use benenson::extractor::{extract_circuit, ExtractError};
use benenson::machines::{parse_bp, parse_circuit, write_circuit, AnyBp, MachineError};
use benenson::verify::{
    equivalence_exhaustive, equivalence_random, Evaluator, VerifyError, DEFAULT_EXHAUSTIVE_LIMIT,
};
use benenson::wetlab::{
    emit_molecules, plausibility_check, stem_margin, BaseMap, EnzymeProfile, WetlabError,
};
use clap::{Parser, Subcommand, ValueEnum};

const TRACE_CAP: usize = 10_000;

#[derive(Parser)]
#[command(name = "benenson", version, about = "Benenson automaton toolchain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum CircuitConstruction {
    Perm,
    Sparse1,
}

#[derive(Clone, Copy, ValueEnum)]
enum BpConstruction {
    General,
    Fixed,
    FixedConstd,
    Perm,
    Sparse1,
}

#[derive(Clone, Copy, ValueEnum, Default)]
enum Skip {
    #[default]
    Occurring,
    Exhaustive,
}

#[derive(Subcommand)]
enum Command {
    /// Circuit to width-5 permutation program to automaton.
    CompileCircuit {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "perm")]
        construction: CircuitConstruction,
        #[arg(long, default_value = "ACGT")]
        sigma: String,
        #[arg(long, value_enum, default_value = "occurring")]
        skip_rules: Skip,
        /// Also list every segment's offset.
        #[arg(long)]
        segment_map: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Branching program to automaton.
    CompileBp {
        input: PathBuf,
        #[arg(long, value_enum)]
        construction: BpConstruction,
        #[arg(long, default_value = "ACGT")]
        sigma: String,
        #[arg(long, value_enum, default_value = "occurring")]
        skip_rules: Skip,
        #[arg(long)]
        segment_map: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run an automaton on one input.
    Simulate {
        input: PathBuf,
        /// Input bits, x_1 first.
        #[arg(long = "input", value_name = "BITS")]
        bits: String,
        #[arg(long)]
        trace: bool,
    },
    /// Automaton back to a circuit.
    Extract {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compare two machines of any supported format.
    Verify {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, conflicts_with = "random")]
        exhaustive: bool,
        #[arg(long, value_name = "N")]
        random: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_LIMIT)]
        limit: usize,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// DNA molecules for an enzyme profile.
    Emit {
        input: PathBuf,
        /// Profile file, or `FokI` for the built-in profile.
        #[arg(long)]
        enzyme: String,
        /// Bases for the alphabet symbols in order.
        #[arg(long, default_value = "ACGT")]
        base_map: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Parameters, determinism, sparseness and stem margin.
    Stats {
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

enum CliError {
    Failed(String),
    Malformed(String),
    Precondition(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Malformed(_) => 2,
            CliError::Precondition(_) => 3,
        }
    }
}

impl From<CompileError> for CliError {
    fn from(e: CompileError) -> Self {
        match e {
            CompileError::Machine(
                MachineError::MalformedCircuit(_) | MachineError::MalformedProgram(_),
            ) => CliError::Malformed(e.to_string()),
            _ => CliError::Precondition(e.to_string()),
        }
    }
}

impl From<BarringtonError> for CliError {
    fn from(e: BarringtonError) -> Self {
        CliError::Precondition(e.to_string())
    }
}

impl From<ExtractError> for CliError {
    fn from(e: ExtractError) -> Self {
        CliError::Precondition(e.to_string())
    }
}

impl From<AutomatonError> for CliError {
    fn from(e: AutomatonError) -> Self {
        match e {
            AutomatonError::Nondeterministic { .. } => CliError::Precondition(e.to_string()),
            _ => CliError::Malformed(e.to_string()),
        }
    }
}

impl From<WetlabError> for CliError {
    fn from(e: WetlabError) -> Self {
        match e {
            WetlabError::BadProfile(_) | WetlabError::Parse(_) => {
                CliError::Malformed(e.to_string())
            }
            _ => CliError::Precondition(e.to_string()),
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Eval { .. } => CliError::Malformed(e.to_string()),
            _ => CliError::Precondition(e.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Malformed(format!("{}: {e}", path.display())))
}

fn malformed(path: &Path) -> impl Fn(benenson::text::ParseError) -> CliError + '_ {
    move |e| CliError::Malformed(format!("{}: {e}", path.display()))
}

fn load_ben(path: &Path) -> Result<benenson::automaton::BenensonAutomaton, CliError> {
    parse_ben(&read(path)?).map_err(malformed(path))
}

fn load_any(path: &Path) -> Result<Evaluator, CliError> {
    let text = read(path)?;
    let head = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .unwrap_or("");
    if head.starts_with("circuit") {
        Ok(parse_circuit(&text).map_err(malformed(path))?.into())
    } else if head.starts_with("bp") {
        Ok(parse_bp(&text).map_err(malformed(path))?.into())
    } else if head.starts_with("benenson") {
        Ok(parse_ben(&text).map_err(malformed(path))?.into())
    } else {
        Err(CliError::Malformed(format!(
            "{}: unrecognised format",
            path.display()
        )))
    }
}

fn alphabet(sigma: &str) -> Result<Alphabet, CliError> {
    Alphabet::new(sigma).map_err(|e| CliError::Malformed(format!("--sigma: {e}")))
}

/// Write `content` to `output`, or to stdout when absent; the report goes
/// to stdout in the first case and stderr in the second.
fn deliver(output: Option<&Path>, content: &str, report: &str) -> Result<(), CliError> {
    match output {
        Some(path) => {
            fs::write(path, content)
                .map_err(|e| CliError::Malformed(format!("{}: {e}", path.display())))?;
            print!("{report}");
        }
        None => {
            print!("{content}");
            eprint!("{report}");
        }
    }
    Ok(())
}

fn finish_compile(
    compiled: Compiled,
    source: &Path,
    with_map: bool,
    output: Option<&Path>,
) -> Result<(), CliError> {
    let report = compiled.report.to_text(with_map);
    let header = format!(
        "compiled from {}\n{}",
        source
            .file_name()
            .map_or(String::new(), |f| f.to_string_lossy().into_owned()),
        compiled.report.to_text(false)
    );
    deliver(output, &write_ben(&compiled.automaton, &header), &report)
}

fn skip(s: Skip) -> SkipRules {
    match s {
        Skip::Occurring => SkipRules::Occurring,
        Skip::Exhaustive => SkipRules::Exhaustive,
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::CompileCircuit {
            input,
            construction,
            sigma,
            skip_rules,
            segment_map,
            output,
        } => {
            let c = parse_circuit(&read(&input)?).map_err(malformed(&input))?;
            let sigma = alphabet(&sigma)?;
            let pbp = barrington_compile(&c)?.normalize_goto0_identity();
            let compiled = match construction {
                CircuitConstruction::Perm => compile_permutation(&pbp, &sigma, skip(skip_rules))?,
                CircuitConstruction::Sparse1 => compile_sparse1(&pbp, &sigma, skip(skip_rules))?,
            };
            finish_compile(compiled, &input, segment_map, output.as_deref())
        }
        Command::CompileBp {
            input,
            construction,
            sigma,
            skip_rules,
            segment_map,
            output,
        } => {
            let bp = parse_bp(&read(&input)?).map_err(malformed(&input))?;
            let sigma = alphabet(&sigma)?;
            let wrong = |c: Construction| {
                CliError::Precondition(format!("construction {c} cannot take this program kind"))
            };
            let compiled = match (construction, &bp) {
                (BpConstruction::General, AnyBp::General(g)) => compile_general(g, &sigma)?,
                (BpConstruction::General, _) => return Err(wrong(Construction::General)),
                (BpConstruction::Fixed | BpConstruction::FixedConstd, AnyBp::General(_)) => {
                    return Err(wrong(Construction::FixedWidth))
                }
                (BpConstruction::Fixed, AnyBp::Layered(l)) => compile_fixed_width(l, &sigma)?,
                (BpConstruction::Fixed, AnyBp::Permutation(p)) => {
                    compile_fixed_width(p.as_layered(), &sigma)?
                }
                (BpConstruction::FixedConstd, AnyBp::Layered(l)) => {
                    compile_fixed_width_constd(l, &sigma, skip(skip_rules))?
                }
                (BpConstruction::FixedConstd, AnyBp::Permutation(p)) => {
                    compile_fixed_width_constd(p.as_layered(), &sigma, skip(skip_rules))?
                }
                (BpConstruction::Perm | BpConstruction::Sparse1, AnyBp::Permutation(p)) => {
                    let p = p.normalize_goto0_identity();
                    if matches!(construction, BpConstruction::Perm) {
                        compile_permutation(&p, &sigma, skip(skip_rules))?
                    } else {
                        compile_sparse1(&p, &sigma, skip(skip_rules))?
                    }
                }
                (BpConstruction::Perm, _) => return Err(wrong(Construction::Permutation)),
                (BpConstruction::Sparse1, _) => return Err(wrong(Construction::Sparse1)),
            };
            finish_compile(compiled, &input, segment_map, output.as_deref())
        }
        Command::Simulate { input, bits, trace } => {
            let aut = load_ben(&input)?;
            let x = parse_bits(&bits).ok_or_else(|| {
                CliError::Malformed(format!("--input {bits:?} is not a bit string"))
            })?;
            let run = aut.run(&x)?;
            let offsets: Vec<String> = run.offsets.iter().map(|o| o.to_string()).collect();
            println!(
                "{} offsets={}",
                if run.accepted { "ACCEPTED" } else { "REJECTED" },
                offsets.join(",")
            );
            if trace {
                let sigma = aut.alphabet();
                for (k, r) in run.applied.iter().enumerate().take(TRACE_CAP) {
                    println!(
                        "step {} offset {} rule {} {} {} {} -> {}",
                        k + 1,
                        run.offsets[k],
                        r.var,
                        r.bit as u8,
                        sigma.decode(&r.sticky),
                        r.dist,
                        run.offsets[k + 1]
                    );
                }
                if run.applied.len() > TRACE_CAP {
                    println!(
                        "... trace truncated after {TRACE_CAP} of {} steps",
                        run.applied.len()
                    );
                }
            }
            Ok(())
        }
        Command::Extract { input, output } => {
            let aut = load_ben(&input)?;
            let (circuit, rep) = extract_circuit(&aut)?;
            let mut report = String::new();
            let _ = writeln!(
                report,
                "segments {} q_star {} j_star {} padded {} b_levels {}",
                rep.segments, rep.q_star, rep.j_star, rep.padded, rep.b_levels
            );
            let _ = writeln!(
                report,
                "size {} depth {} max_relevant {}",
                rep.size, rep.depth, rep.max_relevant
            );
            for (q, k) in &rep.over_budget {
                let _ = writeln!(
                    report,
                    "warning segment {q} reads {k} variables, more than D = {}",
                    rep.range
                );
            }
            deliver(output.as_deref(), &write_circuit(&circuit), &report)
        }
        Command::Verify {
            a,
            b,
            exhaustive: _,
            random,
            seed,
            limit,
            jobs,
        } => {
            let ea = load_any(&a)?;
            let eb = load_any(&b)?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| CliError::Precondition(e.to_string()))?;
            let result = pool.install(|| match random {
                Some(trials) => equivalence_random(&ea, &eb, trials, seed),
                None => equivalence_exhaustive(&ea, &eb, limit),
            })?;
            println!("{result}");
            if result.is_equal() {
                Ok(())
            } else {
                Err(CliError::Failed(String::new()))
            }
        }
        Command::Emit {
            input,
            enzyme,
            base_map,
            output,
        } => {
            let aut = load_ben(&input)?;
            let profile = if Path::new(&enzyme).exists() {
                EnzymeProfile::parse(&read(Path::new(&enzyme))?)?
            } else if enzyme.eq_ignore_ascii_case("foki") {
                EnzymeProfile::foki()
            } else {
                return Err(CliError::Malformed(format!("{enzyme}: no such profile")));
            };
            let map = BaseMap::new(aut.alphabet(), &base_map)?;
            let bundle = emit_molecules(&aut, &profile, &map)?;
            let report = plausibility_check(&aut, &profile, Some(&map)).to_string();
            deliver(output.as_deref(), &bundle, &report)
        }
        Command::Stats { input, seed } => {
            let aut = load_ben(&input)?;
            let deterministic = aut.is_deterministic();
            println!("n {}", aut.n());
            println!("S {}", aut.sticky_size());
            println!("D {}", aut.range());
            println!("L {}", aut.len());
            println!("p {}", aut.accept_pos());
            println!("rules {}", aut.rules().len());
            println!("deterministic {}", if deterministic { "yes" } else { "no" });
            println!("sparseness {}", aut.sparseness());
            if deterministic {
                println!("stem_margin {}", stem_margin(&aut, seed)?);
            } else {
                let conflicts = aut.check_determinism();
                let (r1, r2) = &conflicts[0];
                println!(
                    "stem_margin n/a (conflict {} {} {} {} vs {} {} {} {})",
                    r1.var,
                    r1.bit as u8,
                    aut.alphabet().decode(&r1.sticky),
                    r1.dist,
                    r2.var,
                    r2.bit as u8,
                    aut.alphabet().decode(&r2.sticky),
                    r2.dist
                );
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Failed(m) | CliError::Malformed(m) | CliError::Precondition(m) => {
                    if !m.is_empty() {
                        eprintln!("error: {m}");
                    }
                }
            }
            ExitCode::from(e.code())
        }
    }
}
