use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use conecell::cointerval::{build_hom_complex, homcone_resolution, is_cointerval_ideal, DGraph};
use conecell::corpus::{gen_corpus, CorpusSpec};
use conecell::decomp::{rule_family, DEFAULT_RULE_BOUND};
use conecell::ek::{build_ek_cw, cellular_chain_complex, check_boundary_formula};
use conecell::linalg::RankConfig;
use conecell::verify::{check_cellular_resolution, multigraded_betti, taylor_complex, BettiTable, DEFAULT_TAYLOR_BOUND};
use conecell::{check_dd_zero, check_minimal, find_linear_quotient_order, ht_resolution, parse_ideal, OrderedIdeal};

#[derive(Parser)]
#[command(name = "conecell", version, about = "Cellular mapping-cone resolutions of monomial ideals")]
struct Cli {
    /// Prime for the GF(p) rank pre-filter (overrides RESOLVE_PRIME).
    #[arg(long, global = true)]
    prime: Option<u64>,
    /// Compute every rank over the rationals.
    #[arg(long, global = true)]
    no_prefilter: bool,
    /// Largest ideal for which the Taylor complex is built.
    #[arg(long, global = true, default_value_t = DEFAULT_TAYLOR_BOUND, value_parser = clap::value_parser!(usize))]
    taylor_bound: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report linear quotients, regularity and the cointerval property.
    Check {
        input: String,
        /// Replace the given order by the first order with linear quotients.
        #[arg(long)]
        find_order: bool,
        /// Also require the cointerval property for a zero exit code.
        #[arg(long)]
        require_cointerval: bool,
    },
    /// Build a resolution and write it as JSON.
    Resolve {
        input: String,
        #[arg(long, value_enum, default_value_t = ResolveMethod::Ht)]
        method: ResolveMethod,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write the multigraded ranks as CSV here.
        #[arg(long)]
        betti: Option<PathBuf>,
    },
    /// Build the supporting cell complex, check it, and export it.
    Complex {
        input: String,
        #[arg(long, value_enum, default_value_t = ComplexMethod::Ek)]
        method: ComplexMethod,
        #[arg(long, value_enum, default_value_t = GeometryFormat::Json)]
        format: GeometryFormat,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Multigraded Betti numbers from the Taylor complex.
    Betti {
        input: String,
        #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
        format: TableFormat,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Enumerate decomposition rules and their combinatorial types.
    EnumerateRules {
        input: String,
        /// Largest number of candidate tables to search.
        #[arg(long, default_value_t = DEFAULT_RULE_BOUND as u64)]
        bound: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run every applicable check and print one line per check.
    Verify { input: String },
    /// Write the test corpus as JSON lines.
    GenCorpus {
        #[arg(long, default_value_t = CorpusSpec::default().seed)]
        seed: u64,
        /// Number of random ideals.
        #[arg(long, default_value_t = CorpusSpec::default().random_count)]
        random: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ResolveMethod {
    Ht,
    Hom,
    Taylor,
}

#[derive(Clone, Copy, ValueEnum)]
enum ComplexMethod {
    Ek,
    Hom,
}

#[derive(Clone, Copy, ValueEnum)]
enum GeometryFormat {
    Json,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

/// A verified property does not hold; maps to exit code 1.
#[derive(Debug)]
struct PropertyFailure(String);

impl std::fmt::Display for PropertyFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for PropertyFailure {}

fn fail(msg: impl Into<String>) -> anyhow::Error {
    PropertyFailure(msg.into()).into()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<PropertyFailure>().is_some() {
        return 1;
    }
    match err.downcast_ref::<conecell::Error>() {
        Some(e) if !e.is_input_error() => 1,
        _ => 2,
    }
}

/// Reads a file if `input` names one, otherwise treats it as inline text.
/// Text with only integers is a d-graph, anything else a list of monomials
/// or a JSON ideal.
fn load_ideal(input: &str) -> anyhow::Result<OrderedIdeal> {
    let text = if Path::new(input).is_file() {
        fs::read_to_string(input).with_context(|| format!("reading {input}"))?
    } else {
        input.to_string()
    };
    let is_graph = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .all(|l| l.chars().all(|c| c.is_ascii_digit() || c.is_whitespace()));
    if is_graph && !text.trim().is_empty() {
        return Ok(DGraph::parse(&text)?.edge_ideal()?);
    }
    Ok(parse_ideal(&text)?)
}

fn write_out(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                out.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

fn rank_config(cli: &Cli) -> anyhow::Result<RankConfig> {
    if cli.no_prefilter {
        return Ok(RankConfig::rational_only());
    }
    Ok(match cli.prime {
        Some(p) => RankConfig::with_prime(p)?,
        None => RankConfig::from_env()?,
    })
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn cmd_check(ideal: OrderedIdeal, find_order: bool, require_cointerval: bool) -> anyhow::Result<()> {
    let ideal = if find_order && ideal.linear_quotients().is_err() {
        match find_linear_quotient_order(ideal.nvars(), ideal.gens()) {
            Some(order) => {
                let reordered = ideal.reordered(&order);
                let gens: Vec<String> = reordered.gens().iter().map(|g| g.to_string()).collect();
                println!("order: {}", gens.join(", "));
                reordered
            }
            None => ideal,
        }
    } else {
        ideal
    };
    if let Err(f) = ideal.linear_quotients() {
        println!("linear quotients: no (witness j={})", f.j + 1);
        return Err(fail("no linear quotients"));
    }
    let regular = ideal.check_regularity()?.regular;
    let cointerval = is_cointerval_ideal(&ideal);
    println!("linear quotients: yes; regular: {}; cointerval: {}", yes_no(regular), yes_no(cointerval));
    if !regular || (require_cointerval && !cointerval) {
        return Err(fail("a required property does not hold"));
    }
    Ok(())
}

fn cmd_resolve(ideal: OrderedIdeal, method: ResolveMethod, bound: usize, output: Option<&Path>, betti: Option<&Path>) -> anyhow::Result<()> {
    let res = match method {
        ResolveMethod::Ht => ht_resolution(&ideal)?,
        ResolveMethod::Hom => homcone_resolution(&ideal)?,
        ResolveMethod::Taylor => taylor_complex(&ideal, bound)?,
    };
    let dd = check_dd_zero(&res);
    if !dd.zero {
        return Err(fail(format!("d∘d ≠ 0 in degree {:?}", dd.witness)));
    }
    let table = BettiTable::from_minimal_complex(&res);
    let totals: Vec<String> = table.totals()[1..].iter().map(usize::to_string).collect();
    eprintln!("betti totals: {}", totals.join(","));
    if let Some(p) = betti {
        write_out(Some(p), &table.to_csv())?;
    }
    write_out(output, &serde_json::to_string_pretty(&res.to_json())?)
}

fn cmd_complex(ideal: OrderedIdeal, method: ComplexMethod, format: GeometryFormat, cfg: RankConfig, output: Option<&Path>) -> anyhow::Result<()> {
    let (chain, json, off) = match method {
        ComplexMethod::Ek => {
            let x = build_ek_cw(&ideal)?;
            (cellular_chain_complex(&x), x.to_json(), x.to_off())
        }
        ComplexMethod::Hom => {
            if !is_cointerval_ideal(&ideal) {
                return Err(conecell::Error::NotCointerval.into());
            }
            let x = build_hom_complex(&DGraph::from_ideal(&ideal)?);
            (x.chain_complex(), x.to_json(), x.to_off())
        }
    };
    let report = check_cellular_resolution(&chain, &ideal, cfg)?;
    if !report.resolution {
        return Err(fail(format!("not a resolution: homology at {:?}", report.witness.map(|m| m.to_string()))));
    }
    let fv: Vec<String> = chain.ranks()[1..].iter().map(usize::to_string).collect();
    eprintln!("f-vector: {}", fv.join(","));
    match format {
        GeometryFormat::Json => write_out(output, &serde_json::to_string_pretty(&json)?),
        GeometryFormat::Off => write_out(output, &off),
    }
}

fn cmd_enumerate(ideal: OrderedIdeal, bound: u64, output: Option<&Path>) -> anyhow::Result<()> {
    let (members, stats) = rule_family(&ideal, bound as u128)?;
    let types: std::collections::BTreeSet<&String> = members.iter().map(|m| &m.fingerprint).collect();
    eprintln!("{} rules, {} combinatorial types", members.len(), types.len());
    let rules: Vec<_> = members
        .iter()
        .map(|m| {
            json!({
                "policies": m.rule.policies(),
                "table": m.rule.entries_one_based(),
                "f_vector": m.complex.f_vector(),
                "fingerprint": m.fingerprint,
            })
        })
        .collect();
    let doc = json!({
        "ideal": ideal.to_json(),
        "search_space": stats.search_space.to_string(),
        "failed_dd": stats.failed_dd,
        "failed_geometry": stats.failed_geometry,
        "duplicates": stats.duplicates,
        "types": types.len(),
        "rules": rules,
    });
    write_out(output, &serde_json::to_string_pretty(&doc)?)
}

#[derive(Default)]
struct Report {
    ok: bool,
    lines: Vec<String>,
}

impl Report {
    fn line(&mut self, name: &str, pass: bool, detail: String) {
        self.ok &= pass;
        let detail = if detail.is_empty() { String::new() } else { format!(" {detail}") };
        self.lines.push(format!("{name}: {}{detail}", if pass { "ok" } else { "FAILED" }));
    }

    fn resolution(&mut self, name: &str, res: &conecell::LabeledChainComplex, taylor: Option<&BettiTable>) {
        self.line(&format!("{name} d∘d = 0"), check_dd_zero(res).zero, String::new());
        self.line(&format!("{name} minimal"), check_minimal(res), String::new());
        if let Some(b) = taylor {
            self.line(&format!("{name} Betti numbers match Taylor"), &BettiTable::from_minimal_complex(res) == b, String::new());
        }
    }
}

fn cmd_verify(ideal: OrderedIdeal, cfg: RankConfig, bound: usize) -> anyhow::Result<()> {
    let mut r = Report { ok: true, ..Default::default() };
    match ideal.linear_quotients() {
        Err(f) => r.line("linear quotients", false, format!("(witness j={})", f.j + 1)),
        Ok(_) => {
            r.line("linear quotients", true, String::new());
            let taylor = (ideal.len() <= bound).then(|| multigraded_betti(&ideal, bound, cfg)).transpose()?;
            let regular = ideal.check_regularity()?.regular;
            r.line("regular decomposition function", regular, String::new());
            if regular {
                r.resolution("ht", &ht_resolution(&ideal)?, taylor.as_ref());
                let x = build_ek_cw(&ideal)?;
                let boundary = check_boundary_formula(&ideal, &x);
                r.line("ek boundary formula", boundary.is_ok(), boundary.err().map(|e| e.to_string()).unwrap_or_default());
                let rep = check_cellular_resolution(&cellular_chain_complex(&x), &ideal, cfg)?;
                r.line("ek acyclic strands", rep.resolution, rep.witness.map(|m| format!("(homology at {m})")).unwrap_or_default());
            }
            if is_cointerval_ideal(&ideal) {
                r.resolution("hom", &homcone_resolution(&ideal)?, taylor.as_ref());
                let x = build_hom_complex(&DGraph::from_ideal(&ideal)?);
                let rep = check_cellular_resolution(&x.chain_complex(), &ideal, cfg)?;
                r.line("hom acyclic strands", rep.resolution, rep.witness.map(|m| format!("(homology at {m})")).unwrap_or_default());
            }
        }
    }
    for l in &r.lines {
        println!("{l}");
    }
    if r.ok {
        Ok(())
    } else {
        Err(fail("verification failed"))
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if cli.taylor_bound == 0 {
        bail!("--taylor-bound must be positive");
    }
    let cfg = rank_config(&cli)?;
    match cli.command {
        Command::Check { input, find_order, require_cointerval } => cmd_check(load_ideal(&input)?, find_order, require_cointerval),
        Command::Resolve { input, method, output, betti } => {
            cmd_resolve(load_ideal(&input)?, method, cli.taylor_bound, output.as_deref(), betti.as_deref())
        }
        Command::Complex { input, method, format, output } => cmd_complex(load_ideal(&input)?, method, format, cfg, output.as_deref()),
        Command::Betti { input, format, output } => {
            let table = multigraded_betti(&load_ideal(&input)?, cli.taylor_bound, cfg)?;
            let text = match format {
                TableFormat::Csv => table.to_csv(),
                TableFormat::Json => serde_json::to_string_pretty(&table.to_json())?,
            };
            write_out(output.as_deref(), &text)
        }
        Command::EnumerateRules { input, bound, output } => {
            if bound == 0 {
                bail!("--bound must be positive");
            }
            cmd_enumerate(load_ideal(&input)?, bound, output.as_deref())
        }
        Command::Verify { input } => cmd_verify(load_ideal(&input)?, cfg, cli.taylor_bound),
        Command::GenCorpus { seed, random, output } => {
            let spec = CorpusSpec { seed, random_count: random, ..Default::default() };
            let mut text = String::new();
            for e in gen_corpus(&spec) {
                text.push_str(&serde_json::to_string(&e.to_json())?);
                text.push('\n');
            }
            write_out(output.as_deref(), &text)
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
