// SPDX-License-Identifier: Apache-2.0
//! The `unary-topk` command line.
//!
//! Every subcommand prints its primary result on stdout. With `--out DIR` the
//! result files are also written to `DIR` together with `manifest.json`,
//! which records the command, its parameters, the SHA-256 of every input and
//! output file, the seed and the tool version.
//!
//! Exit codes: `0` success, `1` a checked property failed, `2` bad usage or
//! unparsable input.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::cost::{dendrite_gates, plot_rows, rank_designs, reports_csv, CellWeights, GateReport};
use crate::emit::{emit_dendrite, emit_selector};
use crate::neuron::{
    compare_designs, compare_designs_with_source, default_source, parse_volley_set, DendriteKind,
    Neuron, NeuronConfig, SpikeVolley, TimeDistribution, VolleyGenerator,
};
use crate::sortnet::{
    gen_bitonic, load_network, validate_sorter, SortingNetwork, ValidationBudget,
};
use crate::topk::{load_selector, prune_topk};

#[derive(Debug, Parser)]
#[command(
    name = "unary-topk",
    version,
    about = "Unary top-k selectors and bit-serial neuron experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Write a sorting network.
    Gen(GenArgs),
    /// Prune a sorting network to a top-k selector.
    Prune(PruneArgs),
    /// Check that a network sorts every zero-one input.
    Validate(ValidateArgs),
    /// Simulate one neuron over one or more volleys.
    Simulate(SimulateArgs),
    /// Compare two dendrite designs over the same volleys.
    Compare(CompareArgs),
    /// Gate-equivalent cost table for every dendrite design.
    Cost(CostArgs),
    /// Emit a structural netlist.
    Emit(EmitArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenKind {
    Bitonic,
    Optimal,
}

#[derive(Debug, Args, Serialize)]
pub struct GenArgs {
    /// Number of wires.
    #[arg(
        value_name = "N",
        required_unless_present = "n_flag",
        conflicts_with = "n_flag"
    )]
    pub n: Option<usize>,
    #[arg(value_enum, default_value = "bitonic")]
    pub kind: GenKind,
    #[arg(long = "n", value_name = "N")]
    pub n_flag: Option<usize>,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct PruneArgs {
    #[arg(long, value_name = "FILE")]
    pub net: PathBuf,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ValidateArgs {
    #[arg(long, value_name = "FILE")]
    pub net: PathBuf,
    /// Random vectors for networks too wide to check exhaustively.
    #[arg(long, default_value_t = 65536)]
    pub random: u64,
    #[arg(long, default_value_t = 0x5eed)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

/// Where volleys come from: a file, or the seeded generator.
#[derive(Debug, Args, Serialize)]
pub struct VolleySource {
    /// JSON `[{"input":i,"t":t}]` or CSV `input,t`; a JSON array of such
    /// arrays or CSV `volley,input,t` holds several volleys.
    #[arg(long, value_name = "FILE", conflicts_with = "gen_volleys")]
    pub volleys: Option<PathBuf>,
    #[arg(long, value_name = "COUNT", requires = "seed")]
    pub gen_volleys: Option<usize>,
    /// Per-input spike probability.
    #[arg(long, default_value_t = 0.1)]
    pub density: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `uniform` or `geometric:P`.
    #[arg(long, default_value = "uniform")]
    pub times: String,
    /// Drop generated spikes that would make more than this many synapses
    /// pulse in one cycle.
    #[arg(long)]
    pub max_active: Option<u32>,
}

/// The neuron: a JSON config file, or inline parameters with uniform weights.
#[derive(Debug, Args, Serialize)]
pub struct NeuronArgs {
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long, required_unless_present = "config")]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 7)]
    pub weight: u32,
    #[arg(long, required_unless_present = "config")]
    pub threshold: Option<u32>,
    /// Source sorter for sorting and top-k dendrites.
    #[arg(long, value_name = "FILE")]
    pub net: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub neuron: NeuronArgs,
    #[arg(long, value_parser = parse_kind)]
    pub kind: Option<DendriteKind>,
    #[arg(long)]
    pub k: Option<usize>,
    #[command(flatten)]
    pub volleys: VolleySource,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    #[command(flatten)]
    pub neuron: NeuronArgs,
    #[arg(long, value_parser = parse_kind, default_value = "pc-compact")]
    pub base: DendriteKind,
    #[arg(long, value_parser = parse_kind, default_value = "topk-pc")]
    pub alt: DendriteKind,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[command(flatten)]
    pub volleys: VolleySource,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CostArgs {
    /// Input counts; repeat for a sweep.
    #[arg(long, required = true)]
    pub n: Vec<usize>,
    #[arg(long, required = true)]
    pub k: Vec<usize>,
    /// Extra source networks, labelled by file stem.
    #[arg(long, value_name = "FILE")]
    pub net: Vec<PathBuf>,
    /// Print `n,k,design,ge` rows instead of the full table.
    #[arg(long)]
    pub plot_data: bool,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EmitArgs {
    #[arg(long, value_parser = parse_kind, required_unless_present = "selector")]
    pub kind: Option<DendriteKind>,
    #[arg(long, required_unless_present = "selector")]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_name = "FILE")]
    pub net: Option<PathBuf>,
    /// Emit a selector file on its own instead of a dendrite.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["kind", "n"])]
    pub selector: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

fn parse_kind(s: &str) -> Result<DendriteKind, String> {
    s.parse()
        .map_err(|e: crate::neuron::NeuronError| e.to_string())
}

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or unreadable input (exit 2).
    Usage(String),
    /// A checked property failed (exit 1).
    Violation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Violation(_) => 1,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: serde_json::Value,
    pub inputs: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub outputs: BTreeMap<String, String>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects inputs read and files to write during one run.
struct Run {
    inputs: BTreeMap<String, String>,
    files: BTreeMap<String, String>,
    seed: Option<u64>,
}

impl Run {
    fn read(&mut self, path: &Path) -> Result<String, CliError> {
        let text =
            fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        self.inputs
            .insert(path.display().to_string(), sha256_hex(text.as_bytes()));
        Ok(text)
    }

    fn network(&mut self, path: &Path) -> Result<SortingNetwork, CliError> {
        let text = self.read(path)?;
        load_network(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
    }

    fn file(&mut self, name: &str, contents: String) {
        self.files.insert(name.to_string(), contents);
    }

    fn finish(self, out: Option<&Path>, command: &Command) -> Result<(), CliError> {
        let Some(dir) = out else { return Ok(()) };
        fs::create_dir_all(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
        let (name, parameters) = match serde_json::to_value(command).expect("arguments serialize") {
            serde_json::Value::Object(m) => m.into_iter().next().expect("one subcommand"),
            other => (String::new(), other),
        };
        let manifest = RunManifest {
            command: name,
            parameters,
            inputs: self.inputs,
            seed: self.seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: self
                .files
                .iter()
                .map(|(k, v)| (k.clone(), sha256_hex(v.as_bytes())))
                .collect(),
        };
        let mut files = self.files;
        files.insert(
            "manifest.json".into(),
            serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n",
        );
        for (name, contents) in files {
            let path = dir.join(name);
            fs::write(&path, contents).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        }
        Ok(())
    }
}

/// Parse `args` (program name first) and run; returns the exit code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match run(&cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let (CliError::Usage(m) | CliError::Violation(m)) = &e;
            let _ = writeln!(stderr, "error: {m}");
            e.exit_code()
        }
    }
}

pub fn run(command: &Command, stdout: &mut dyn Write) -> Result<(), CliError> {
    let mut r = Run {
        inputs: BTreeMap::new(),
        files: BTreeMap::new(),
        seed: None,
    };
    let mut say = |s: &str| stdout.write_all(s.as_bytes()).map_err(usage);
    let (out, verdict) = match command {
        Command::Gen(a) => (a.out.as_deref(), cmd_gen(a, &mut r, &mut say)?),
        Command::Prune(a) => (a.out.as_deref(), cmd_prune(a, &mut r, &mut say)?),
        Command::Validate(a) => (a.out.as_deref(), cmd_validate(a, &mut r, &mut say)?),
        Command::Simulate(a) => (a.out.as_deref(), cmd_simulate(a, &mut r, &mut say)?),
        Command::Compare(a) => (a.out.as_deref(), cmd_compare(a, &mut r, &mut say)?),
        Command::Cost(a) => (a.out.as_deref(), cmd_cost(a, &mut r, &mut say)?),
        Command::Emit(a) => (a.out.as_deref(), cmd_emit(a, &mut r, &mut say)?),
    };
    r.finish(out, command)?;
    verdict.map_or(Ok(()), |m| Err(CliError::Violation(m)))
}

/// `Ok(Some(msg))` reports a property violation after outputs are written.
type Verdict = Result<Option<String>, CliError>;
type Say<'a> = dyn FnMut(&str) -> Result<(), CliError> + 'a;

fn cmd_gen(a: &GenArgs, r: &mut Run, say: &mut Say) -> Verdict {
    let n = a.n.or(a.n_flag).expect("clap requires one of the two");
    let net = match a.kind {
        GenKind::Bitonic => gen_bitonic(n),
        GenKind::Optimal => SortingNetwork::bundled_optimal(n),
    }
    .map_err(usage)?;
    let name = format!(
        "{}-{n}.net",
        match a.kind {
            GenKind::Bitonic => "bitonic",
            GenKind::Optimal => "optimal",
        }
    );
    if a.out.is_some() {
        say(&format!("{name}: {} units\n", net.len()))?;
    } else {
        say(&net.to_text())?;
    }
    r.file(&name, net.to_text());
    Ok(None)
}

fn cmd_prune(a: &PruneArgs, r: &mut Run, say: &mut Say) -> Verdict {
    let net = r.network(&a.net)?;
    let sel = prune_topk(&net, a.k).map_err(usage)?;
    let json = sel.counts_json() + "\n";
    say(&json)?;
    r.file("selector.sel", sel.to_text());
    r.file("counts.json", json);
    Ok(sel.warnings().first().cloned())
}

fn cmd_validate(a: &ValidateArgs, r: &mut Run, say: &mut Say) -> Verdict {
    let net = r.network(&a.net)?;
    r.seed = Some(a.seed);
    let report = validate_sorter(
        &net,
        ValidationBudget {
            random_vectors: a.random,
            seed: a.seed,
        },
    );
    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    say(&json)?;
    r.file("validation.json", json);
    Ok((!report.passed).then(|| format!("{} is not a sorter: {report}", a.net.display())))
}

fn neuron_config(a: &NeuronArgs, r: &mut Run) -> Result<NeuronConfig, CliError> {
    match &a.config {
        Some(path) => {
            let text = r.read(path)?;
            serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
        }
        None => {
            let n = a.n.expect("clap requires n without a config");
            Ok(NeuronConfig::new(
                vec![a.weight; n],
                a.threshold.expect("clap requires threshold"),
                DendriteKind::PcCompact,
                None,
            ))
        }
    }
}

fn volleys(
    src: &VolleySource,
    cfg: &NeuronConfig,
    r: &mut Run,
) -> Result<Vec<SpikeVolley>, CliError> {
    if let Some(path) = &src.volleys {
        let text = r.read(path)?;
        return parse_volley_set(&text, cfg.n)
            .map_err(|e| usage(format!("{}: {e}", path.display())));
    }
    let (Some(count), Some(seed)) = (src.gen_volleys, src.seed) else {
        return Err(usage("give --volleys FILE or --gen-volleys COUNT --seed S"));
    };
    r.seed = Some(seed);
    let times: TimeDistribution = src.times.parse().map_err(usage)?;
    let mut g = VolleyGenerator::new(cfg.n, src.density, seed)
        .map_err(usage)?
        .with_times(times)
        .with_window(cfg.window);
    Ok((0..count)
        .map(|_| match src.max_active {
            Some(m) => g.next_bounded(&cfg.weights, m),
            None => g.next_volley(),
        })
        .collect())
}

fn source(path: Option<&Path>, r: &mut Run) -> Result<Option<SortingNetwork>, CliError> {
    path.map(|p| r.network(p)).transpose()
}

fn cmd_simulate(a: &SimulateArgs, r: &mut Run, say: &mut Say) -> Verdict {
    let mut cfg = neuron_config(&a.neuron, r)?;
    if let Some(kind) = a.kind {
        cfg = cfg.with_dendrite(kind, a.k.or(cfg.k));
    } else if a.k.is_some() {
        cfg.k = a.k;
    }
    let net = source(a.neuron.net.as_deref(), r)?;
    let neuron = Neuron::with_source(cfg.clone(), net.as_ref()).map_err(usage)?;
    let vs = volleys(&a.volleys, &cfg, r)?;
    let results = vs
        .iter()
        .map(|v| neuron.simulate(v))
        .collect::<Result<Vec<_>, _>>()
        .map_err(usage)?;
    let json = if results.len() == 1 {
        results[0].to_json()
    } else {
        serde_json::to_string_pretty(&results).expect("results serialize")
    } + "\n";
    say(&json)?;
    r.file("results.json", json);
    Ok(None)
}

fn cmd_compare(a: &CompareArgs, r: &mut Run, say: &mut Say) -> Verdict {
    let cfg = neuron_config(&a.neuron, r)?;
    let k_for = |kind: DendriteKind| kind.needs_k().then_some(a.k);
    let base = cfg.with_dendrite(a.base, k_for(a.base));
    let alt = cfg.with_dendrite(a.alt, k_for(a.alt));
    let net = source(a.neuron.net.as_deref(), r)?;
    let vs = volleys(&a.volleys, &cfg, r)?;
    let report = match &net {
        None => compare_designs(&base, &alt, &vs),
        Some(net) => compare_designs_with_source(&base, &alt, &vs, net),
    }
    .map_err(usage)?;

    let mut summary = serde_json::to_value(&report).expect("report serializes");
    summary.as_object_mut().expect("object").remove("records");
    let summary = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
    say(&summary)?;

    let w = CellWeights::default();
    let cost: Vec<GateReport> = [&base, &alt]
        .into_iter()
        .map(|c| {
            let src = match (&net, c.dendrite.needs_k()) {
                (Some(n), true) => Some(n.clone()),
                (None, true) => Some(default_source(c.dendrite, c.n).map_err(usage)?),
                _ => None,
            };
            dendrite_gates(c.dendrite, c.n, c.k, src.as_ref(), &w).map_err(usage)
        })
        .collect::<Result<_, _>>()?;
    r.file("equivalence.json", summary);
    r.file("records.csv", report.records_csv());
    r.file("cost.csv", reports_csv(&cost));
    Ok((!report.implication_holds)
        .then(|| "a volley within k active inputs changed the result".to_string()))
}

fn cmd_cost(a: &CostArgs, r: &mut Run, say: &mut Say) -> Verdict {
    let w = CellWeights::default();
    let mut extra = Vec::new();
    for p in &a.net {
        let label = p.file_stem().map_or_else(
            || p.display().to_string(),
            |s| s.to_string_lossy().into_owned(),
        );
        extra.push((label, r.network(p)?));
    }
    let mut rows = Vec::new();
    for &n in &a.n {
        let width = n.max(2).next_power_of_two();
        let mut nets: Vec<(String, SortingNetwork)> = Vec::new();
        if let Ok(opt) = SortingNetwork::bundled_optimal(width) {
            nets.push(("optimal".into(), opt));
        }
        nets.push(("bitonic".into(), gen_bitonic(width).map_err(usage)?));
        nets.extend(extra.iter().filter(|(_, net)| net.width() >= n).cloned());
        let named: Vec<(&str, &SortingNetwork)> =
            nets.iter().map(|(l, n)| (l.as_str(), n)).collect();
        for &k in &a.k {
            if k == 0 || k > n {
                return Err(usage(format!("k = {k} out of range for n = {n}")));
            }
            rows.extend(rank_designs(n, k, &named, &w).map_err(usage)?);
        }
    }
    let table = reports_csv(&rows);
    let plot = plot_rows(&rows);
    say(if a.plot_data { &plot } else { &table })?;
    r.file("cost.csv", table);
    r.file("cost.json", crate::cost::reports_json(&rows) + "\n");
    if a.plot_data {
        r.file("plot.csv", plot);
    }
    Ok(None)
}

fn cmd_emit(a: &EmitArgs, r: &mut Run, say: &mut Say) -> Verdict {
    let nl = if let Some(path) = &a.selector {
        let text = r.read(path)?;
        emit_selector(&load_selector(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?)
    } else {
        let kind = a.kind.expect("clap requires kind");
        let n = a.n.expect("clap requires n");
        let net = match source(a.net.as_deref(), r)? {
            Some(net) => Some(net),
            None if kind.needs_k() => Some(default_source(kind, n).map_err(usage)?),
            None => None,
        };
        emit_dendrite(kind, n, a.k, net.as_ref()).map_err(usage)?
    };
    let text = nl.to_text();
    say(&text)?;
    r.file("netlist.txt", text);
    Ok(None)
}
