use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pbrepair::driver::{
    annotated_listing, bench, format_table, pbrepair_traced, render_stmts, RepairConfig, TraceEvent, DEFAULT_MAX_ITERS,
};
use pbrepair::lang::{parse, Program};
use pbrepair::synth::relation_dot;
use pbrepair::transform::Formula;

/// Repairs a fault region of a program against its pre/postcondition.
#[derive(Parser, Debug)]
#[command(name = "pbrepair", version, args_conflicts_with_subcommands = true, subcommand_negates_reqs = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    /// Program to repair.
    #[arg(required = true)]
    file: Option<PathBuf>,
    /// Statement ordinals of the fault region, `L` or `L1..L2`.
    #[arg(long, required = true, value_parser = parse_region)]
    region: Option<(usize, usize)>,
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    max_iters: usize,
    /// Write the run report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write the repaired program.
    #[arg(long)]
    emit: Option<PathBuf>,
    /// Print every counterexample with its annotations and every candidate.
    #[arg(long)]
    trace: bool,
    /// Write the last repair circuit in ASCII AIGER format.
    #[arg(long)]
    dump_aig: Option<PathBuf>,
    /// Write the last specification BDD in dot format.
    #[arg(long)]
    dump_bdd: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Copy)]
struct Common {
    /// Bit width of every variable.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..=32))]
    width: u32,
    /// Times a loop body may be taken on one path.
    #[arg(long, default_value_t = pbrepair::paths::DEFAULT_UNROLL)]
    unroll: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Seeds single-statement faults and repairs each at its own line.
    Bench {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Run every mutant instead of the first one per line.
        #[arg(long)]
        all: bool,
        /// Write the benchmark report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn parse_region(s: &str) -> Result<(usize, usize), String> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("`{t}` is not a line number"));
    match s.split_once("..") {
        Some((a, b)) => Ok((num(a)?, num(b)?)),
        None => num(s).map(|l| (l, l)),
    }
}

fn load(file: &Path, width: u32) -> Result<Program, String> {
    let src = std::fs::read_to_string(file).map_err(|e| format!("{}: {e}", file.display()))?;
    parse(&src, width).map_err(|e| format!("{}: {e}", file.display()))
}

fn write(path: &Path, contents: &str) -> Result<(), String> {
    std::fs::write(path, contents).map_err(|e| format!("{}: {e}", path.display()))
}

fn run(cli: Cli) -> Result<i32, String> {
    if let Some(Command::Bench { file, common, all, report }) = cli.command {
        let p = load(&file, common.width)?;
        let config = RepairConfig { unroll: common.unroll, ..RepairConfig::default() };
        let r = bench(&p, config, all);
        print!("{}", format_table(&r));
        if let Some(path) = report {
            write(&path, &r.to_json())?;
        }
        let failed = r.rows.iter().any(|row| row.error.is_some());
        return Ok(i32::from(failed));
    }

    let file = cli.file.expect("required by clap");
    let (start, end) = cli.region.expect("required by clap");
    let p = load(&file, cli.common.width)?;
    let config = RepairConfig { unroll: cli.common.unroll, max_iters: cli.max_iters, ..RepairConfig::default() };
    let pre = Formula::atom(p.pre.clone());
    let post = Formula::atom(p.post.clone());
    let trace = cli.trace;
    let report = pbrepair_traced(&p, start, end, config, &mut |ev| {
        if !trace {
            return;
        }
        match ev {
            TraceEvent::Counterexample { iteration, path } => {
                println!("-- iteration {iteration}: counterexample {}", path.guard_bits);
                print!("{}", annotated_listing(path, &pre, &post));
            }
            TraceEvent::Specification { conjunct } => println!("-- new conjunct: {conjunct}"),
            TraceEvent::Candidate { stmts, gates } => {
                println!("-- candidate ({gates} gates):");
                print!("{}", render_stmts(stmts));
            }
            TraceEvent::Unrealizable { .. } => println!("-- specification is unrealizable"),
        }
    })
    .map_err(|e| e.to_string())?;

    println!("outcome: {:?} after {} iteration(s)", report.outcome, report.iterations.len());
    if let Some(w) = &report.witness {
        let ctx: Vec<String> = w.iter().map(|(k, v)| format!("{k} = {v}")).collect();
        println!("no repair exists for region entry state: {}", ctx.join(", "));
    }
    if let Some(bits) = &report.failing_path {
        println!("failing path: {bits}");
    }
    if let Some(d) = &report.detail {
        println!("detail: {d}");
    }
    if let Some(q) = &report.repaired {
        print!("{}", pbrepair::lang::emit(q));
        if let Some(path) = &cli.emit {
            write(path, &pbrepair::lang::emit(q))?;
        }
    }
    if let Some(path) = &cli.report {
        write(path, &report.to_json())?;
    }
    if let Some(path) = &cli.dump_aig {
        match &report.artifacts.netlist {
            Some(n) => write(path, &n.aig.to_aag())?,
            None => eprintln!("no repair circuit to dump"),
        }
    }
    if let Some(path) = &cli.dump_bdd {
        match &report.artifacts.problem {
            Some(problem) => write(path, &relation_dot(problem).map_err(|e| e.to_string())?)?,
            None => eprintln!("no specification to dump"),
        }
    }
    Ok(report.outcome.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
