use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fieldrank_cli::{parse, run, Mode, Options};

/// Replays an update stream through one of the dynamic maintainers.
#[derive(Parser, Debug)]
#[command(name = "fieldrank", version)]
struct Args {
    /// rank | rank-exact | basis | submatrix | match-general |
    /// match-bipartite | match-weighted | vset | combi
    #[arg(long)]
    mode: Mode,
    /// Stream file; stdin when absent or `-`.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Field modulus, overriding the stream header.
    #[arg(long)]
    prime: Option<u64>,
    /// Random seed, overriding the stream header.
    #[arg(long)]
    seed: Option<u64>,
    /// Sketch copies per rank level.
    #[arg(long)]
    copies: Option<usize>,
    /// Check every output against a brute-force oracle.
    #[arg(long)]
    verify: bool,
    /// Print operation counters as JSON after the output.
    #[arg(long)]
    stats: bool,
    /// Spread level activation over many updates.
    #[arg(long)]
    worst_case_spread: bool,
    /// Keep the basis columns in the sketched rank structure.
    #[arg(long)]
    low_rank: bool,
    /// Write the final gadget forest as Graphviz.
    #[arg(long, value_name = "PATH")]
    dump_gadget_dot: Option<PathBuf>,
}

fn read_input(path: &Option<PathBuf>) -> std::io::Result<String> {
    match path {
        Some(p) if p.as_os_str() != "-" => std::fs::read_to_string(p),
        _ => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            Ok(s)
        }
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let text = match read_input(&args.input) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: reading input: {e}");
            return ExitCode::from(1);
        }
    };
    let stream = match parse(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let opts = Options {
        prime: args.prime,
        seed: args.seed,
        copies: args.copies,
        verify: args.verify,
        stats: args.stats,
        worst_case_spread: args.worst_case_spread,
        low_rank: args.low_rank,
        dump_gadget_dot: args.dump_gadget_dot,
    };
    match run(&stream, args.mode, &opts) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(out.render().as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
