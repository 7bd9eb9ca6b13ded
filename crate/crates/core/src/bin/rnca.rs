use std::collections::BTreeMap;
use std::error::Error;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use rnca::analysis::{
    check_conservation_window, decompose, enumerate_rnca_with_budget, verify_small_triviality_with_budget, SweepMode, Verdict,
    DEFAULT_SEARCH_BUDGET, DEFAULT_SWEEP_BUDGET,
};
use rnca::circuit::{compile, evaluate, parse_netlist, PlacedCircuit};
use rnca::render::{render_ppm, RenderSpec};
use rnca::rulefile::{load_rule, save_certificate, save_rule_table};
use rnca::simulate::{detect_cycle, run_with, Checks, CycleLimits, RunOptions, SimError};
use rnca::widgets::{
    branch, gate_and, gate_andnot, green_wire, load_pattern, pattern_rule, red_wire, save_pattern, validate_widget, Catalog, Pattern, Widget,
};
use rnca::{canonical_rule, mirror_rule, BBox, FlowSpec, Rule, StateSet};

type Res<T> = Result<T, Box<dyn Error>>;

/// Exit statuses: pass, verified negative, operational error.
const PASS: u8 = 0;
const NEGATIVE: u8 = 1;
const FAILURE: u8 = 2;

#[derive(Parser)]
#[command(name = "rnca", version, about = "Rotation-symmetric number-conserving cellular automata")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// The five-state rules.
    Rules {
        #[command(subcommand)]
        what: RulesCmd,
    },
    /// Decide number conservation of a rule file and print its certificate.
    Decompose { rule: PathBuf },
    /// Step every (or randomly drawn) window content once and compare sums.
    Verify {
        /// A rule file, `beta=<b>` or `identity`.
        rule: String,
        #[arg(long, default_value = "3x3")]
        window: String,
        #[arg(long, value_enum, default_value_t = Mode::Exhaustive)]
        mode: Mode,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        quiescent: i64,
    },
    /// Classify the rules of an alphabet, or check that small alphabets are trivial.
    Enumerate {
        /// Enumerate over {0, ..., N-1}.
        #[arg(long, conflicts_with = "verify_small", required_unless_present = "verify_small")]
        states: Option<usize>,
        /// Every normalized alphabet of at most four states inside {0, ..., R}.
        #[arg(long)]
        verify_small: Option<i64>,
    },
    /// Run a pattern under its rule with every invariant checked.
    Sim {
        pattern: PathBuf,
        #[arg(long, default_value_t = 100)]
        steps: u64,
        #[arg(long)]
        detect_cycle: bool,
        /// Print the configuration every K steps.
        #[arg(long, value_name = "K")]
        render: Option<u64>,
    },
    /// Draw a pattern, optionally after some steps.
    Render {
        pattern: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Ascii)]
        format: Format,
        #[arg(long, default_value_t = 1)]
        cell_size: u32,
        #[arg(long, default_value_t = 0)]
        steps: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Catalog widgets.
    Widget {
        #[command(subcommand)]
        what: WidgetCmd,
    },
    /// Compile netlists and evaluate compiled circuits.
    Circuit {
        #[command(subcommand)]
        what: CircuitCmd,
    },
}

#[derive(Subcommand)]
enum RulesCmd {
    List,
    /// The full table in canonical tuple order.
    Show {
        #[arg(allow_negative_numbers = true)]
        beta: i64,
        #[arg(long, default_value_t = 0)]
        quiescent: i64,
    },
}

#[derive(Subcommand)]
enum WidgetCmd {
    /// Check a widget file against the functions declared in its notes.
    Validate {
        file: PathBuf,
        #[arg(long, default_value_t = 400)]
        horizon: u64,
    },
    /// Print a catalog widget as a pattern file: and, andnot, branch, wire-N, green-N.
    Show { name: String },
}

#[derive(Subcommand)]
enum CircuitCmd {
    /// Lay out a netlist as a pattern with a fixed output schedule
    Compile {
        netlist: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Target rule; -1 mirrors the layout.
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        beta: i64,
    },
    /// Run a compiled pattern on one input assignment and print each output
    Eval {
        pattern: PathBuf,
        /// Comma-separated `NAME=0|1` pairs.
        #[arg(long, default_value = "")]
        inputs: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exhaustive,
    Sampled,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Ascii,
    Ppm,
}

fn budget(default: u64) -> Res<u64> {
    match std::env::var("RNCA_BUDGET") {
        Ok(v) => Ok(v.trim().parse().map_err(|_| format!("RNCA_BUDGET must be an integer, got `{v}`"))?),
        Err(_) => Ok(default),
    }
}

fn read(path: &Path) -> Res<String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn resolve_rule(spec: &str, quiescent: i64) -> Res<Rule> {
    if let Some(b) = spec.strip_prefix("beta=") {
        return Ok(canonical_rule(b.parse()?, quiescent)?);
    }
    if spec == "identity" {
        return Ok(Rule::identity(StateSet::range(5), quiescent)?);
    }
    Ok(load_rule(&read(Path::new(spec))?)?)
}

fn rules(what: RulesCmd) -> Res<u8> {
    match what {
        RulesCmd::List => {
            let trivial = FlowSpec::zero(StateSet::range(5));
            println!("{}", summary("trivial", &trivial));
            for beta in [-1, 0, 1] {
                println!("{}", summary(&format!("beta={beta}"), &FlowSpec::canonical(beta)));
            }
        }
        RulesCmd::Show { beta, quiescent } => {
            if !(-1..=1).contains(&beta) {
                return Err(format!("UnknownRule: no canonical rule with beta={beta}").into());
            }
            print!("{}", save_rule_table(&canonical_rule(beta, quiescent)?));
        }
    }
    Ok(PASS)
}

fn summary(name: &str, flow: &FlowSpec) -> String {
    let mut parts: Vec<String> = flow.direct_entries().iter().map(|(x, y, v)| format!("g({x},{y})={v}")).collect();
    parts.extend(flow.triple_entries().iter().map(|(x, y, z, v)| format!("T({x},{y},{z})={v}")));
    if parts.is_empty() {
        parts.push("g=0 T=0".into());
    }
    format!("{name:<8} {}", parts.join(" "))
}

fn decompose_cmd(path: &Path) -> Res<u8> {
    let rule = load_rule(&read(path)?)?;
    match decompose(&rule).verdict {
        Verdict::Ncca(flow) => {
            print!("{}", save_certificate(rule.name(), &flow, rule.quiescent()));
            println!("# verdict: NCCA");
            Ok(PASS)
        }
        Verdict::NotNcca(v) => {
            println!("NotNCCA: {v}");
            Ok(NEGATIVE)
        }
    }
}

fn verify(rule: &str, window: &str, mode: Mode, samples: u64, seed: u64, quiescent: i64) -> Res<u8> {
    let rule = resolve_rule(rule, quiescent)?;
    let (w, h) = window.split_once('x').ok_or("window must look like WxH")?;
    let mode = match mode {
        Mode::Exhaustive => SweepMode::Exhaustive { budget: budget(DEFAULT_SWEEP_BUDGET)? },
        Mode::Sampled => SweepMode::Sampled { count: samples, seed },
    };
    let report = check_conservation_window(&rule, w.parse()?, h.parse()?, mode)?;
    println!("{} checked, {} violations", report.checked, report.violation_count);
    for v in report.violations.iter().take(5) {
        let cells: Vec<String> = v.config.cells().map(|(c, s)| format!("{c}={s}")).collect();
        println!("  sum {} -> {}: {}", v.sum_before, v.sum_after, cells.join(" "));
    }
    Ok(if report.is_clean() { PASS } else { NEGATIVE })
}

fn enumerate(states: Option<usize>, verify_small: Option<i64>) -> Res<u8> {
    let budget = budget(DEFAULT_SEARCH_BUDGET)?;
    if let Some(n) = states {
        let q = StateSet::range(n);
        let flows = enumerate_rnca_with_budget(&q, budget)?;
        let nontrivial = flows.iter().filter(|f| !f.is_zero()).count();
        println!("{} rules over {q}: {} trivial, {nontrivial} non-trivial", flows.len(), flows.len() - nontrivial);
        for f in &flows {
            let name = if f.is_zero() {
                "trivial".to_string()
            } else {
                [-1, 0, 1].into_iter().find(|&b| n == 5 && *f == FlowSpec::canonical(b)).map_or("other".into(), |b| format!("beta={b}"))
            };
            println!("{}", summary(&name, f));
        }
        return Ok(PASS);
    }
    let r = verify_small.expect("clap requires one of the two");
    let report = verify_small_triviality_with_budget(r, budget)?;
    println!("{} normalized alphabets of at most 4 states inside {{0..{r}}}", report.sets_checked);
    if report.nontrivial.is_empty() {
        println!("none non-trivial");
        Ok(PASS)
    } else {
        for (q, f) in &report.nontrivial {
            println!("{}", summary(&q.to_string(), f));
        }
        Ok(NEGATIVE)
    }
}

fn load_pattern_file(path: &Path) -> Res<Pattern> {
    Ok(load_pattern(&read(path)?)?)
}

fn sim(path: &Path, steps: u64, cycle: bool, render: Option<u64>) -> Res<u8> {
    let pattern = load_pattern_file(path)?;
    let rule = pattern_rule(&pattern)?;
    let opts = RunOptions { checks: Checks::ALL, ..RunOptions::new(steps) };
    let mut frames = vec![];
    let record = run_with(&rule, &pattern.grid, opts, |t, c| {
        if render.is_some_and(|k| k > 0 && t % k == 0) {
            let frame = c.bbox().unwrap_or(pattern.frame());
            frames.push(format!("# step {t}\n{}", rnca::widgets::render_rows(c, frame)));
        }
    });
    let record = match record {
        Ok(r) => r,
        Err(e @ SimError::InvariantViolation { .. }) => {
            println!("{e}");
            return Ok(NEGATIVE);
        }
        Err(e) => return Err(e.into()),
    };
    print!("{}", record.stats_text());
    for f in frames {
        print!("{f}");
    }
    if cycle {
        let limits = CycleLimits { max_steps: steps.max(1), ..CycleLimits::default() };
        match detect_cycle(&rule, &pattern.grid, limits) {
            Ok(c) => println!("{c}"),
            Err(SimError::LimitExceeded { steps, .. }) => {
                println!("no cycle within {steps} steps");
                return Ok(FAILURE);
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(PASS)
}

fn render(path: &Path, format: Format, cell_size: u32, steps: u64, output: Option<PathBuf>) -> Res<u8> {
    let mut pattern = load_pattern_file(path)?;
    if steps > 0 {
        let rule = pattern_rule(&pattern)?;
        let mut last = pattern.grid.clone();
        run_with(&rule, &pattern.grid, RunOptions { checks: Checks::ALL, ..RunOptions::new(steps) }, |_, c| last = c.clone())?;
        let frame = last.bbox().map_or(pattern.frame(), |b| union(b, pattern.frame()));
        pattern.grid = last;
        pattern.origin = rnca::Cell::new(frame.min_x, frame.min_y);
        pattern.width = frame.width();
        pattern.height = frame.height();
    }
    let bytes = match format {
        Format::Ascii => save_pattern(&pattern).into_bytes(),
        Format::Ppm => render_ppm(&pattern.grid, pattern.frame(), &RenderSpec::with_cell_size(cell_size))?,
    };
    match output {
        Some(p) => std::fs::write(&p, bytes).map_err(|e| format!("{}: {e}", p.display()))?,
        None => std::io::stdout().write_all(&bytes)?,
    }
    Ok(PASS)
}

fn union(a: BBox, b: BBox) -> BBox {
    BBox { min_x: a.min_x.min(b.min_x), min_y: a.min_y.min(b.min_y), max_x: a.max_x.max(b.max_x), max_y: a.max_y.max(b.max_y) }
}

fn catalog_widget(name: &str) -> Res<Widget> {
    let length = |prefix: &str| name.strip_prefix(prefix).and_then(|n| n.parse::<u32>().ok()).filter(|n| n % 2 == 0);
    Ok(match name {
        "and" => gate_and(),
        "andnot" => gate_andnot(),
        "branch" => branch(),
        _ => match (length("wire-"), length("green-")) {
            (Some(n), _) => red_wire(n),
            (_, Some(n)) => green_wire(n),
            _ => return Err(format!("no catalog widget named {name}").into()),
        },
    })
}

fn widget(what: WidgetCmd) -> Res<u8> {
    match what {
        WidgetCmd::Validate { file, horizon } => {
            let pattern = load_pattern_file(&file)?;
            let rule = pattern_rule(&pattern)?;
            let report = validate_widget(&rule, &Widget::from_notes(pattern)?, horizon)?;
            println!("{report}");
            Ok(if report.verdict { PASS } else { NEGATIVE })
        }
        WidgetCmd::Show { name } => {
            print!("{}", save_pattern(&catalog_widget(&name)?.pattern));
            Ok(PASS)
        }
    }
}

fn parse_inputs(text: &str) -> Res<BTreeMap<String, bool>> {
    let mut out = BTreeMap::new();
    for pair in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, value) = pair.split_once('=').ok_or_else(|| format!("expected NAME=0|1, got `{pair}`"))?;
        let value = match value.trim() {
            "0" => false,
            "1" => true,
            v => return Err(format!("input value must be 0 or 1, got `{v}`").into()),
        };
        out.insert(name.trim().to_string(), value);
    }
    Ok(out)
}

fn circuit(what: CircuitCmd) -> Res<u8> {
    match what {
        CircuitCmd::Compile { netlist, output, beta } => {
            let net = parse_netlist(&read(&netlist)?)?;
            let catalog = Catalog::standard();
            let base = canonical_rule(catalog.beta, 0)?;
            let rule = match beta {
                1 => base,
                -1 => mirror_rule(&base),
                b => return Err(format!("the catalog serves beta=1 and its mirror beta=-1, not beta={b}").into()),
            };
            let placed = compile(&net, &catalog, &rule)?;
            std::fs::write(&output, save_pattern(&placed.pattern)).map_err(|e| format!("{}: {e}", output.display()))?;
            let frame = placed.pattern.frame();
            println!("pattern {}x{}, {} cells", frame.width(), frame.height(), placed.pattern.grid.len());
            println!("inputs {}", placed.inputs.join(" "));
            if !placed.constants.is_empty() {
                println!("constants {}", placed.constants.join(" "));
            }
            for (o, t) in &placed.outputs {
                println!("output {o} at step {t}");
            }
            Ok(PASS)
        }
        CircuitCmd::Eval { pattern, inputs } => {
            let pattern = load_pattern_file(&pattern)?;
            let rule = pattern_rule(&pattern)?;
            let placed = PlacedCircuit::from_pattern(pattern);
            let outputs = evaluate(&rule, &placed, &parse_inputs(&inputs)?)?;
            for (name, value) in outputs {
                println!("{name}={}", u8::from(value));
            }
            Ok(PASS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Rules { what } => rules(what),
        Command::Decompose { rule } => decompose_cmd(&rule),
        Command::Verify { rule, window, mode, samples, seed, quiescent } => verify(&rule, &window, mode, samples, seed, quiescent),
        Command::Enumerate { states, verify_small } => enumerate(states, verify_small),
        Command::Sim { pattern, steps, detect_cycle, render } => sim(&pattern, steps, detect_cycle, render),
        Command::Render { pattern, format, cell_size, steps, output } => render(&pattern, format, cell_size, steps, output),
        Command::Widget { what } => widget(what),
        Command::Circuit { what } => circuit(what),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(FAILURE)
        }
    }
}
