use std::fmt::{self, Write as _};
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context as _, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use reducedkey::bbn::{Model, TrainOptions};
use reducedkey::compile::{compile_table, verify_table, CompileReport};
use reducedkey::corpus::{extract_samples, normalize, Sample};
use reducedkey::keypad::GREEK_CAPS;
use reducedkey::klm::{self, published, KlmParams};
use reducedkey::sim::{evaluate, read_phrases};
use reducedkey::{builtin_layout, Key, KeypadLayout, ReorderingTable};
use serde_json::json;

// Output is collected in a String and written once at exit.
macro_rules! outln {
    ($out:expr, $($arg:tt)*) => {
        writeln!($out, $($arg)*).expect("formatting into a String")
    };
}

macro_rules! outw {
    ($out:expr, $($arg:tt)*) => {
        write!($out, $($arg)*).expect("formatting into a String")
    };
}

const SAMPLE_CORPUS: &str = "greek-sample-corpus.txt";
const SAMPLE_PHRASES: &str = "greek-sms-phrases.txt";

#[derive(Parser)]
#[command(name = "reducedkey", version, about = "Train, compile and evaluate keypad reordering tables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a model from one or more text corpora.
    Train(TrainArgs),
    /// Bake a model into a binary table plus its JSON export.
    Compile(CompileArgs),
    /// Check every row of a table decodes to a valid ordering.
    Verify(TableArgs),
    /// Replay phrases against a table and compare with multi-tap.
    Simulate(SimulateArgs),
    /// Evaluate the keystroke-level timing model.
    Klm(KlmArgs),
    /// Convert a binary table to the JSON interchange format.
    Export(ExportArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Args)]
struct TrainArgs {
    /// Builtin keypad layout.
    #[arg(long, default_value = GREEK_CAPS)]
    layout: String,
    /// Corpus files; defaults to the bundled Greek sample corpus.
    #[arg(long, num_args = 1..)]
    corpus: Vec<PathBuf>,
    /// Number of preceding symbols used as context.
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Equivalent sample size; defaults to half the mean variable cardinality.
    #[arg(long)]
    xi: Option<f64>,
    /// Fix the parent set of State instead of searching, e.g. `L1,Key`.
    #[arg(long, value_delimiter = ',')]
    parents: Option<Vec<String>>,
    /// Where to write the model document.
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct CompileArgs {
    #[arg(long)]
    model: PathBuf,
    /// Binary table output.
    #[arg(long)]
    table: PathBuf,
    /// JSON export output; defaults to the table path with a `.json` extension.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Fail unless the model was trained for this layout.
    #[arg(long)]
    layout: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct TableArgs {
    /// Binary table, or a JSON export (which carries its own layout).
    #[arg(long)]
    table: PathBuf,
    /// Layout for a binary table.
    #[arg(long, default_value = GREEK_CAPS)]
    layout: String,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    table: TableArgs,
    /// One phrase per line; defaults to the bundled SMS phrases.
    #[arg(long)]
    phrases: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    table: PathBuf,
    #[arg(long, default_value = GREEK_CAPS)]
    layout: String,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct KlmArgs {
    /// Word length in letters.
    #[arg(long, default_value_t = published::WORD_LENGTH)]
    x: f64,
    #[arg(long)]
    n_avg: Option<f64>,
    #[arg(long)]
    t_p: Option<f64>,
    #[arg(long)]
    t_per: Option<f64>,
    #[arg(long)]
    p_ck: Option<f64>,
    #[arg(long)]
    t_wait: Option<f64>,
    #[arg(long)]
    t_ck: Option<f64>,
    #[arg(long)]
    p_error1: Option<f64>,
    #[arg(long)]
    p_error2: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

/// Bad invocation rather than bad data; exits with status 2 like clap does.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(message: impl Into<String>) -> anyhow::Error {
    UsageError(message.into()).into()
}

fn data_dir() -> PathBuf {
    match std::env::var_os("REDUCEDKEY_DATA_DIR") {
        Some(dir) => PathBuf::from(dir),
        None => Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data"),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))
}

fn layout(name: &str) -> Result<KeypadLayout> {
    builtin_layout(name).map_err(|e| usage(e.to_string()))
}

fn pretty(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("JSON values always serialize")
}

fn parse_parents(names: &[String], model_vars: &[String]) -> Result<Vec<usize>> {
    let mut parents = Vec::new();
    for name in names {
        let name = name.trim();
        let i = model_vars[..model_vars.len() - 1]
            .iter()
            .position(|v| v.eq_ignore_ascii_case(name))
            .ok_or_else(|| {
                usage(format!(
                    "unknown parent {name:?}; choose from {}",
                    model_vars[..model_vars.len() - 1].join(", ")
                ))
            })?;
        if !parents.contains(&i) {
            parents.push(i);
        }
    }
    parents.sort_unstable();
    Ok(parents)
}

fn train(args: TrainArgs, out: &mut String) -> Result<()> {
    if args.n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let layout = layout(&args.layout)?;
    let corpora = if args.corpus.is_empty() {
        if layout.name() != GREEK_CAPS {
            return Err(usage("--corpus is required for layouts other than greek-caps"));
        }
        vec![data_dir().join(SAMPLE_CORPUS)]
    } else {
        args.corpus.clone()
    };
    let mut samples: Vec<Sample> = Vec::new();
    for path in &corpora {
        let stream = normalize(&read(path)?, layout.alphabet());
        samples.extend(extract_samples(&stream, &layout, args.n)?);
    }
    if samples.is_empty() {
        bail!("no letters of {} left after normalizing the corpus", layout.alphabet().id());
    }
    let names: Vec<String> = reducedkey::bbn::letter_variables(&layout, args.n)
        .into_iter()
        .map(|v| v.name)
        .collect();
    let options = TrainOptions {
        xi: args.xi,
        parents: args.parents.as_deref().map(|p| parse_parents(p, &names)).transpose()?,
    };
    let (model, search) = Model::train(&samples, &layout, args.n, &options)?;
    let accuracy = model.holdout_accuracy(&samples)?;
    write(&args.model, model.to_json()?)?;

    let set_names = |set: &[usize]| set.iter().map(|&i| names[i].as_str()).collect::<Vec<_>>();
    match args.format {
        Format::Json => {
            let candidates: Vec<_> = search
                .iter()
                .flat_map(|s| &s.candidates)
                .map(|c| json!({ "parents": set_names(&c.parents), "log_score": c.log_score }))
                .collect();
            outln!(out, 
                "{}",
                pretty(&json!({
                    "layout": layout.name(),
                    "n": args.n,
                    "samples": model.sample_count(),
                    "xi": model.xi().value(),
                    "parents": model.parent_names(),
                    "training_accuracy": accuracy,
                    "candidates": candidates,
                    "model": args.model,
                }))
            );
        }
        Format::Text | Format::Csv => {
            outln!(out, "layout     {}", layout.name());
            outln!(out, "samples    {}", model.sample_count());
            outln!(out, "xi         {}", model.xi().value());
            outln!(out, "structure  State <- {}", describe_parents(&model.parent_names()));
            outln!(out, "accuracy   {accuracy:.4} (first guess, training data)");
            if let Some(search) = &search {
                outln!(out, "\n  log P(D|B)  parents");
                for (i, c) in search.candidates.iter().enumerate() {
                    let mark = if i == search.best { "*" } else { " " };
                    outln!(out, "{mark} {:>10.2}  {}", c.log_score, describe_parents(&set_names(&c.parents)));
                }
            }
            outln!(out, "\nwrote {}", args.model.display());
        }
    }
    Ok(())
}

fn describe_parents(names: &[&str]) -> String {
    if names.is_empty() {
        "(none)".into()
    } else {
        names.join(", ")
    }
}

fn load_model(path: &Path) -> Result<Model> {
    Model::from_json(&read(path)?).with_context(|| format!("{} is not a model document", path.display()))
}

fn compile(args: CompileArgs, out: &mut String) -> Result<()> {
    let model = load_model(&args.model)?;
    let layout = match &args.layout {
        Some(name) => layout(name)?,
        None => model.layout().clone(),
    };
    let (table, report) = compile_table(&model, &layout, model.context_len())?;
    let json_path = args.json.clone().unwrap_or_else(|| args.table.with_extension("json"));
    write(&args.table, table.write_binary())?;
    write(&json_path, table.export_json(&layout)?)?;
    match args.format {
        Format::Json => outln!(out, "{}", pretty(&serde_json::to_value(&report)?)),
        Format::Text | Format::Csv => {
            print_compile_report(&report, &layout, out);
            outln!(out, "wrote {} and {}", args.table.display(), json_path.display());
        }
    }
    Ok(())
}

fn print_compile_report(report: &CompileReport, layout: &KeypadLayout, out: &mut String) {
    outln!(out, "rows written       {}", report.rows_written);
    outln!(out, "rows with fallback {}", report.contexts_fallback);
    outln!(out, "codes per key:");
    for key in Key::all() {
        let counts: Vec<String> = report.code_histogram[key.index()].iter().map(u64::to_string).collect();
        let group: String = layout.group(key).iter().collect();
        outln!(out, "  {key} {group:<4} {}", counts.join(" "));
    }
}

/// Reads a binary table, or a JSON export with its embedded keypad.
fn load_table(path: &Path, layout_name: &str) -> Result<(ReorderingTable, KeypadLayout)> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    if bytes.first() == Some(&b'{') {
        let text = String::from_utf8(bytes).context("table JSON is not UTF-8")?;
        return ReorderingTable::import_json(&text).with_context(|| format!("cannot load {}", path.display()));
    }
    let table = ReorderingTable::read_binary(&bytes).with_context(|| format!("cannot load {}", path.display()))?;
    Ok((table, layout(layout_name)?))
}

fn verify(args: TableArgs, out: &mut String) -> Result<bool> {
    let (table, layout) = load_table(&args.table, &args.layout)?;
    let report = verify_table(&table, &layout);
    match args.format {
        Format::Json => outln!(out, "{}", pretty(&serde_json::to_value(&report)?)),
        Format::Text | Format::Csv => {
            outln!(out, "rows checked {}", report.rows_checked);
            outln!(out, "violations   {}", report.violations.len());
            for v in &report.violations {
                outln!(out, "  {v}");
            }
        }
    }
    Ok(report.is_ok())
}

fn simulate(args: SimulateArgs, out: &mut String) -> Result<()> {
    let (table, layout) = load_table(&args.table.table, &args.table.layout)?;
    let path = args.phrases.unwrap_or_else(|| data_dir().join(SAMPLE_PHRASES));
    let phrases = read_phrases(&read(&path)?);
    if phrases.is_empty() {
        return Err(usage(format!("{} contains no phrases", path.display())));
    }
    let report = evaluate(&phrases, &table, &layout)?;
    match args.table.format {
        Format::Text => outw!(out, "{}", report.to_text()),
        Format::Csv => outw!(out, "{}", report.to_csv()),
        Format::Json => outln!(out, "{}", pretty(&serde_json::to_value(&report)?)),
    }
    Ok(())
}

fn export(args: ExportArgs, out: &mut String) -> Result<()> {
    let (table, layout) = load_table(&args.table, &args.layout)?;
    let text = table.export_json(&layout)?;
    match &args.out {
        Some(path) => write(path, text),
        None => {
            outln!(out, "{text}");
            Ok(())
        }
    }
}

fn klm_params(args: &KlmArgs) -> KlmParams {
    let d = KlmParams::default();
    KlmParams {
        n: args.n_avg.unwrap_or(d.n),
        t_p: args.t_p.unwrap_or(d.t_p),
        t_per: args.t_per.unwrap_or(d.t_per),
        p_ck: args.p_ck.unwrap_or(d.p_ck),
        t_wait: args.t_wait.unwrap_or(d.t_wait),
        t_ck: args.t_ck.unwrap_or(d.t_ck),
        p_error1: args.p_error1.unwrap_or(d.p_error1),
        p_error2: args.p_error2.unwrap_or(d.p_error2),
    }
}

const KLM_NOTE: &str = "the published times are not what the formulas give for the published \
parameters (6949.4 and 5053.9 ms at X = 6); both are shown";

fn klm_report(args: KlmArgs, out: &mut String) -> Result<()> {
    let params = klm_params(&args);
    params.validate().map_err(|e| usage(e.to_string()))?;
    let imp = klm::improvement(&params, args.x).map_err(|e| usage(e.to_string()))?;
    let reference = json!({
        "x": published::WORD_LENGTH,
        "t_stem": published::T_STEM_MS,
        "t_ipreti": published::T_IPRETI_MS,
        "time_pct": published::TIME_IMPROVEMENT,
        "keystrokes_stem": published::KEYSTROKES_STEM,
        "keystrokes_ipreti": published::KEYSTROKES_IPRETI,
        "keystroke_pct": published::KEYSTROKE_IMPROVEMENT,
    });
    match args.format {
        Format::Json => outln!(out, 
            "{}",
            pretty(&json!({
                "params": params,
                "computed": imp,
                "published": reference,
                "note": KLM_NOTE,
            }))
        ),
        Format::Csv => {
            outln!(out, "quantity,computed,published");
            for (name, c, p) in klm_rows(&imp) {
                outln!(out, "{name},{c},{p}");
            }
        }
        Format::Text => {
            outln!(out, "X = {}  (published figures are for X = {})", imp.x, published::WORD_LENGTH);
            outln!(out, "{:<22}{:>12}{:>12}", "", "computed", "published");
            for (name, c, p) in klm_rows(&imp) {
                if name.ends_with("pct") {
                    outln!(out, "{name:<22}{:>11.2}%{:>11.2}%", c * 100.0, p * 100.0);
                } else {
                    outln!(out, "{name:<22}{c:>12.4}{p:>12.4}");
                }
            }
            outln!(out, "\nnote: {KLM_NOTE}");
        }
    }
    Ok(())
}

fn klm_rows(imp: &klm::Improvement) -> [(&'static str, f64, f64); 6] {
    [
        ("t_stem_ms", imp.t_stem, published::T_STEM_MS),
        ("t_ipreti_ms", imp.t_ipreti, published::T_IPRETI_MS),
        ("time_pct", imp.time_pct, published::TIME_IMPROVEMENT),
        ("keystrokes_stem", imp.keystrokes_stem, published::KEYSTROKES_STEM),
        ("keystrokes_ipreti", imp.keystrokes_ipreti, published::KEYSTROKES_IPRETI),
        ("keystroke_pct", imp.keystroke_pct, published::KEYSTROKE_IMPROVEMENT),
    ]
}

fn run(cli: Cli, out: &mut String) -> Result<bool> {
    match cli.command {
        Command::Train(a) => train(a, out).map(|()| true),
        Command::Compile(a) => compile(a, out).map(|()| true),
        Command::Verify(a) => verify(a, out),
        Command::Simulate(a) => simulate(a, out).map(|()| true),
        Command::Klm(a) => klm_report(a, out).map(|()| true),
        Command::Export(a) => export(a, out).map(|()| true),
    }
}

fn main() -> ExitCode {
    let mut out = String::new();
    let result = run(Cli::parse(), &mut out);
    // A closed pipe (e.g. `| head`) is not worth a diagnostic.
    let _ = io::stdout().write_all(out.as_bytes());
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
