use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cellprobe::brackets::{
    catalan_count, empirical_alpha, enumerate_bal, match_index, unmatched_close_prob, unmatched_open_prob, walk_reduction,
};
use cellprobe::entropy_sum::{entropy_sum_analysis, entropy_sum_witness, BitSource};
use cellprobe::format::{parse_distribution, parse_indices, parse_scheme, write_scheme};
use cellprobe::info::{
    check_high_entropy_uniform, conditional_entropy, entropy, good_blocks, good_cells, tv_to_uniform, BlockStructure,
};
use cellprobe::pipeline::{run_bracket_pipeline, run_prefix_pipeline};
use cellprobe::reference::{SchemeSpecParams, Variant};
use cellprobe::report::{
    bracket_separator_report, entropy_sum_report, good_set_report, list, ratio, real, separator_report,
    stretcher_report, Format, Report,
};
use cellprobe::scheme::{verify_scheme, Coverage, Scheme};
use cellprobe::separator::{bracket_separator_stages, find_separator, find_separator_brackets};
use cellprobe::stretcher::find_stretcher;
use cellprobe::BitVector;
use clap::{Args, Parser, Subcommand, ValueEnum};

const OUT_DIR_VAR: &str = "CELLPROBE_OUT_DIR";

#[derive(Parser)]
#[command(name = "cellprobe", version, about = "Cell-probe schemes and lower-bound machinery")]
struct Cli {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: OutputFormat,
    /// Write the report here instead of stdout. Relative paths resolve
    /// against $CELLPROBE_OUT_DIR when it is set.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Text,
    Machine,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Text => Format::Text,
            OutputFormat::Machine => Format::Machine,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check every query answer of a scheme against ground truth.
    Verify {
        #[arg(long)]
        scheme: PathBuf,
        /// Check this many sampled inputs instead of the whole domain.
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Stored bits minus the information-theoretic minimum.
    Redundancy {
        #[arg(long)]
        scheme: PathBuf,
    },
    /// Find a blocker B and a family of queries with disjoint probes outside B.
    Separator(SeparatorArgs),
    /// Extract a stretched subsequence from ascending indices.
    Stretcher {
        /// File of ascending 1-indexed positions.
        #[arg(long)]
        indices: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        c: f64,
    },
    /// Entropy of a distribution file, optionally conditional.
    Entropy(EntropyArgs),
    /// Good blocks or good cells of a distribution.
    Goodset(GoodsetArgs),
    /// Threshold t and the three tail probabilities for a block of bits.
    EntropySum(EntropySumArgs),
    /// Bracket counting, walks and matching.
    Brackets {
        #[command(subcommand)]
        command: BracketsCommand,
    },
    /// Run the full adversary against a scheme.
    Pipeline {
        #[command(subcommand)]
        command: PipelineCommand,
    },
    /// Emit a reference scheme as a scheme file.
    BuildScheme(BuildArgs),
}

#[derive(Args)]
struct SeparatorArgs {
    #[arg(long)]
    scheme: PathBuf,
    /// Gap g for the staged separator.
    #[arg(long, required_unless_present = "bracket", conflicts_with = "bracket")]
    gap: Option<f64>,
    /// Use the exponent-ladder separator instead.
    #[arg(long, requires = "c")]
    bracket: bool,
    #[arg(long)]
    c: Option<u64>,
    /// Run the bracket schedule even when q exceeds (lg lg n)/c.
    #[arg(long, requires = "bracket")]
    force: bool,
    /// Probe bound; defaults to the scheme's q.
    #[arg(long)]
    q: Option<usize>,
}

#[derive(Args)]
struct EntropyArgs {
    #[arg(long)]
    dist: PathBuf,
    /// 1-indexed coordinates of the target; defaults to all.
    #[arg(long, value_delimiter = ',')]
    target: Vec<usize>,
    /// 1-indexed coordinates conditioned on.
    #[arg(long, value_delimiter = ',')]
    given: Vec<usize>,
    /// Alphabet size per coordinate for the distance to uniform.
    #[arg(long)]
    alphabet: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum GoodsetMode {
    Blocks,
    Cells,
}

#[derive(Args)]
struct GoodsetArgs {
    #[arg(long, value_enum)]
    mode: GoodsetMode,
    #[arg(long)]
    dist: PathBuf,
    /// Block sizes, comma-separated (blocks mode).
    #[arg(long, value_delimiter = ',')]
    blocks: Vec<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Cell alphabet (cells mode).
    #[arg(long)]
    m: Option<u64>,
    /// Subset size (cells mode).
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
}

#[derive(Args)]
struct EntropySumArgs {
    #[arg(long, conflicts_with = "uniform", required_unless_present = "uniform")]
    dist: Option<PathBuf>,
    /// Use the uniform distribution on n bits.
    #[arg(long)]
    uniform: Option<usize>,
    #[arg(long)]
    p: usize,
    #[arg(long)]
    i: usize,
    #[arg(long)]
    j: usize,
    #[arg(long)]
    c: f64,
    /// Fail instead of falling back when the hypotheses do not hold.
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand)]
enum BracketsCommand {
    /// Number of balanced strings of length n.
    Count {
        #[arg(long)]
        n: usize,
        /// Also enumerate and compare.
        #[arg(long)]
        enumerate: bool,
    },
    /// Unmatched-bracket probabilities over windows of length d.
    Walk {
        #[arg(long)]
        d: usize,
    },
    /// Partner of position i in x.
    Match {
        #[arg(long)]
        x: String,
        #[arg(long)]
        i: usize,
    },
}

#[derive(Subcommand)]
enum PipelineCommand {
    Prefix {
        #[arg(long)]
        scheme: PathBuf,
        #[arg(long)]
        c: f64,
        /// Separator gap; defaults to lg^c n.
        #[arg(long)]
        gap: Option<f64>,
        /// Exit 1 when any stage guarantee fails.
        #[arg(long)]
        strict: bool,
    },
    Brackets {
        #[arg(long)]
        scheme: PathBuf,
        #[arg(long)]
        c: u64,
        #[arg(long)]
        strict: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    PrecomputedSums,
    TwoLevelRank,
    RawIdentity,
    BracketTable,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::PrecomputedSums => Variant::PrecomputedSums,
            VariantArg::TwoLevelRank => Variant::TwoLevelRank,
            VariantArg::RawIdentity => Variant::RawIdentity,
            VariantArg::BracketTable => Variant::BracketTable,
        }
    }
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long, value_enum)]
    variant: VariantArg,
    #[arg(long)]
    n: usize,
    /// Defaults to n + 1.
    #[arg(long)]
    cell_alphabet: Option<u64>,
    #[arg(long, default_value_t = 4)]
    block: usize,
    #[arg(long, default_value_t = 16)]
    superblock: usize,
    /// Write explicit encoder and decoder tables.
    #[arg(long)]
    table: bool,
}

/// A finished command: its output and whether every reported guarantee held.
struct Outcome {
    text: String,
    ok: bool,
}

impl Outcome {
    fn report(r: &Report, format: Format, ok: bool) -> Self {
        Outcome {
            text: r.render(format),
            ok,
        }
    }
}

type CliResult<T> = std::result::Result<T, String>;

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn load_scheme(path: &Path) -> CliResult<Scheme> {
    parse_scheme(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn core<T>(r: cellprobe::Result<T>) -> CliResult<T> {
    r.map_err(|e| e.to_string())
}

fn resolve_output(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_VAR) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn to_zero_based(coords: &[usize], arity: usize) -> CliResult<Vec<usize>> {
    coords
        .iter()
        .map(|&c| {
            if c >= 1 && c <= arity {
                Ok(c - 1)
            } else {
                Err(format!("coordinate {c} outside 1..={arity}"))
            }
        })
        .collect()
}

fn run(cli: &Cli) -> CliResult<Outcome> {
    let format: Format = cli.format.into();
    match &cli.command {
        Command::Verify { scheme, sample, seed } => {
            let s = load_scheme(scheme)?;
            let coverage = match sample {
                Some(count) => Coverage::Sample {
                    count: *count,
                    seed: *seed,
                },
                None => Coverage::Exhaustive,
            };
            let v = core(verify_scheme(&s, coverage))?;
            let mut r = Report::new();
            r.field("status", if v.passed() { "pass" } else { "fail" });
            r.field("checked", v.checked);
            match &v.counterexample {
                None => r.field("counterexample", "none"),
                Some(c) => r.field(
                    "counterexample",
                    format!("x={} i={} expected={} got={}", c.x, c.i, c.expected, c.got),
                ),
            };
            Ok(Outcome::report(&r, format, v.passed()))
        }
        Command::Redundancy { scheme } => {
            let s = load_scheme(scheme)?;
            let mut r = Report::new();
            r.field("n", s.n()).field("u", s.u()).field("cell_alphabet", s.cell_alphabet());
            r.field("domain", s.domain().name());
            r.field("|domain|", s.domain_size());
            r.field("redundancy", real(core(s.redundancy())?));
            Ok(Outcome::report(&r, format, true))
        }
        Command::Separator(args) => {
            let s = load_scheme(&args.scheme)?;
            let family = s.probes().sets().to_vec();
            let q = args.q.unwrap_or(s.q());
            if args.bracket {
                let c = args.c.ok_or("--bracket needs --c")?;
                let res = if args.force {
                    core(bracket_separator_stages(&family, q, c))?
                } else {
                    core(find_separator_brackets(&family, q, c))?
                };
                let ok = res.exponents_hold()
                    && res.blocker_bound_holds()
                    && res.scale_bound_holds()
                    && res.disjoint_bound_holds()
                    && cellprobe::separator::reduced_disjoint(&family, &res.blocker, &res.disjoint);
                Ok(Outcome::report(&bracket_separator_report(&res, &family), format, ok))
            } else {
                let gap = args.gap.ok_or("separator needs --gap or --bracket")?;
                let res = core(find_separator(&family, q, gap))?;
                let ok = res.all_guarantees_hold(&family);
                Ok(Outcome::report(&separator_report(&res, &family), format, ok))
            }
        }
        Command::Stretcher { indices, n, c } => {
            let idx = core(parse_indices(&read(indices)?))?;
            let res = core(find_stretcher(&idx, *n, *c))?;
            let guaranteed = cellprobe::stretcher::StretcherResult::guaranteed_len(idx.len(), *n, *c);
            let ok = res.gaps_hold() && res.w_prime() >= guaranteed;
            Ok(Outcome::report(&stretcher_report(&res, idx.len()), format, ok))
        }
        Command::Entropy(args) => {
            let dist = core(parse_distribution(&read(&args.dist)?))?;
            let arity = dist.arity();
            let target = if args.target.is_empty() {
                (0..arity).collect()
            } else {
                to_zero_based(&args.target, arity)?
            };
            let given = to_zero_based(&args.given, arity)?;
            let mut r = Report::new();
            r.field("arity", arity).field("support", dist.support_len());
            r.field("H", real(entropy(&dist)));
            if !args.target.is_empty() || !given.is_empty() {
                r.field("H(target | given)", real(conditional_entropy(&dist, &target, &given)));
            }
            let alphabet = args.alphabet.unwrap_or(dist.value_bound().max(2) as u64);
            let universe = (alphabet as u128)
                .checked_pow(arity as u32)
                .ok_or("alphabet^arity overflows")?;
            let tv = core(tv_to_uniform(&dist, universe))?;
            r.field("alphabet", alphabet);
            r.field("TV to uniform", real(tv));
            let deficiency = (universe as f64).log2() - entropy(&dist);
            r.field("entropy deficiency", real(deficiency));
            let mut ok = true;
            if deficiency > 0.0 && deficiency < 1.0 / 64.0 {
                let check = core(check_high_entropy_uniform(&dist, universe, deficiency))?;
                r.field("TV bound 4 sqrt(alpha)", real(check.bound));
                r.check("TV <= 4 sqrt(alpha)", check.holds);
                ok = check.holds;
            }
            Ok(Outcome::report(&r, format, ok))
        }
        Command::Goodset(args) => {
            let dist = core(parse_distribution(&read(&args.dist)?))?;
            let report = match args.mode {
                GoodsetMode::Blocks => {
                    let eps = args.epsilon.ok_or("blocks mode needs --epsilon")?;
                    let blocks = if args.blocks.is_empty() {
                        core(BlockStructure::new(vec![1; dist.arity()]))?
                    } else {
                        core(BlockStructure::new(args.blocks.clone()))?
                    };
                    core(good_blocks(&dist, &blocks, eps))?
                }
                GoodsetMode::Cells => {
                    let m = args.m.ok_or("cells mode needs --m")?;
                    let q = args.q.ok_or("cells mode needs --q")?;
                    let eta = args.eta.ok_or("cells mode needs --eta")?;
                    core(good_cells(&dist, m, q, eta))?
                }
            };
            Ok(Outcome::report(&good_set_report(&report), format, report.size_bound_satisfied))
        }
        Command::EntropySum(args) => {
            let dist = match &args.dist {
                Some(path) => Some(core(parse_distribution(&read(path)?))?),
                None => None,
            };
            let source = match (&dist, args.uniform) {
                (Some(d), _) => BitSource::Explicit(d),
                (None, Some(n)) => BitSource::Uniform(n),
                (None, None) => return Err("entropy-sum needs --dist or --uniform".into()),
            };
            let w = if args.strict {
                core(entropy_sum_analysis(source, args.p, args.i, args.j, args.c))?
            } else {
                core(entropy_sum_witness(source, args.p, args.i, args.j, args.c))?
            };
            Ok(Outcome::report(&entropy_sum_report(&w), format, w.holds()))
        }
        Command::Brackets { command } => brackets(command, format),
        Command::Pipeline { command } => {
            let (report, strict) = match command {
                PipelineCommand::Prefix { scheme, c, gap, strict } => {
                    let s = load_scheme(scheme)?;
                    (core(run_prefix_pipeline(&s, *c, *gap))?, *strict)
                }
                PipelineCommand::Brackets { scheme, c, strict } => {
                    let s = load_scheme(scheme)?;
                    (core(run_bracket_pipeline(&s, *c))?, *strict)
                }
            };
            let held = report.completed() && report.stages.iter().all(|s| s.held());
            Ok(Outcome {
                text: report.render(format),
                ok: held || !strict,
            })
        }
        Command::BuildScheme(args) => {
            let params = SchemeSpecParams {
                n: args.n,
                block: args.block,
                superblock: args.superblock,
                cell_alphabet: args.cell_alphabet.unwrap_or(args.n as u64 + 1),
                variant: args.variant.into(),
            };
            let mut scheme = core(params.build())?;
            if args.table {
                scheme = core(scheme.to_table())?;
            }
            Ok(Outcome {
                text: write_scheme(&scheme),
                ok: true,
            })
        }
    }
}

fn brackets(command: &BracketsCommand, format: Format) -> CliResult<Outcome> {
    let mut r = Report::new();
    let mut ok = true;
    match command {
        BracketsCommand::Count { n, enumerate } => {
            let count = core(catalan_count(*n))?;
            if !enumerate {
                return Ok(Outcome {
                    text: match format {
                        Format::Text => format!("{count}\n"),
                        Format::Machine => format!("count={count}\n"),
                    },
                    ok,
                });
            }
            let listed = core(enumerate_bal(*n))?.len();
            r.field("count", &count).field("enumerated", listed);
            ok = count == listed.into();
            r.check("agree", ok);
        }
        BracketsCommand::Walk { d } => {
            let open = core(unmatched_open_prob(*d))?;
            let close = core(unmatched_close_prob(*d))?;
            let walk = core(walk_reduction(*d))?;
            r.field("d", d);
            r.field("unmatched open", ratio(&open));
            r.field("unmatched close", ratio(&close));
            r.field("half walk", ratio(&walk));
            ok = open == close && open == walk;
            r.check("open = close = walk/2", ok);
            let (_, scaled) = core(empirical_alpha(*d..=*d))?;
            r.field("sqrt(d) * unmatched open", real(scaled));
        }
        BracketsCommand::Match { x, i } => {
            let x: BitVector = core(x.parse())?;
            let m = core(match_index(&x, *i))?;
            r.field("x", &x).field("i", i).field("match", m);
            let partners: Vec<usize> = (1..=x.len()).filter_map(|k| match_index(&x, k).ok()).collect();
            r.field("all", list(&partners));
        }
    }
    Ok(Outcome::report(&r, format, ok))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(message) => {
            eprintln!("error: {message}");
            return ExitCode::from(2);
        }
    };
    let destination = match (&cli.output, &cli.command) {
        (Some(p), _) => Some(resolve_output(p)),
        (None, Command::BuildScheme(args)) => std::env::var_os(OUT_DIR_VAR).map(|dir| {
            let name = format!("{}_n{}.scm", Variant::from(args.variant).name(), args.n);
            Path::new(&dir).join(name)
        }),
        (None, _) => None,
    };
    match destination {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, &outcome.text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{}", outcome.text),
    }
    if outcome.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
