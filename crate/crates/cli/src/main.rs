use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use constraint_games::oracle::DEFAULT_CELL_CAP;
use constraint_games_cli::{
    bench, bench_exit_code, desk_suite, export_nfg, generate, parse_suite, parse_timeout, render_table,
    resolve_game_id, solve, GameSource, OutputFormat, RunConfig, Solver, DEFAULT_TIMEOUT,
};

#[derive(Parser)]
#[command(name = "cgames", version, about = "Pure Nash equilibria of constraint games")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Enumerate the equilibria of one game.
    Solve {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long, default_value = "conga", value_parser = parse_solver)]
        solver: Solver,
        /// Seconds, fractions allowed.
        #[arg(long, value_parser = parse_timeout)]
        timeout: Option<Duration>,
        /// Stop at the first equilibrium.
        #[arg(long)]
        first: bool,
        #[arg(long, default_value = "human", value_parser = parse_format)]
        format: OutputFormat,
    },
    /// Run a suite of (game, solvers) rows; the desk suite by default.
    Bench {
        /// Suite file, one `<game> <solver>[,<solver>]` per line.
        #[arg(long)]
        suite: Option<PathBuf>,
        /// Per-run timeout in seconds.
        #[arg(long, value_parser = parse_timeout)]
        timeout: Option<Duration>,
        #[arg(long, default_value = "human", value_parser = parse_format)]
        format: OutputFormat,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write a builtin game in the textual game format.
    Gen {
        #[arg(long)]
        game: String,
        #[arg(long)]
        players: Option<u64>,
        #[arg(long)]
        domain: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output file; stdout when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Export the normal form as a Gambit `.nfg` file.
    ExportNfg {
        #[command(flatten)]
        game: GameArgs,
        #[arg(short, long)]
        output: PathBuf,
        /// Refuse games with more cells than this.
        #[arg(long, default_value_t = DEFAULT_CELL_CAP)]
        max_cells: u128,
    },
}

#[derive(Args)]
struct GameArgs {
    /// Builtin id such as GTTA.3.100, or a family name with --players/--domain.
    #[arg(long, conflicts_with = "file", required_unless_present = "file")]
    game: Option<String>,
    #[arg(long)]
    players: Option<u64>,
    #[arg(long)]
    domain: Option<u64>,
    /// Game file in the textual format.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Replaces the seed of seeded builtin families.
    #[arg(long)]
    seed: Option<u64>,
}

impl GameArgs {
    fn source(&self) -> Result<GameSource> {
        match (&self.game, &self.file) {
            (Some(g), None) => Ok(GameSource::Builtin(resolve_game_id(g, self.players, self.domain)?)),
            (None, Some(f)) => {
                if self.players.is_some() || self.domain.is_some() {
                    bail!("--players/--domain need --game");
                }
                Ok(GameSource::File(f.clone()))
            }
            _ => bail!("give exactly one of --game and --file"),
        }
    }
}

fn parse_solver(s: &str) -> Result<Solver> {
    s.parse()
}

fn parse_format(s: &str) -> Result<OutputFormat> {
    s.parse()
}

fn main() -> ExitCode {
    // clap's own usage code is 2, which is reserved for timeouts here
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
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    let mut stdout = std::io::stdout().lock();
    match cli.cmd {
        Cmd::Solve { game, solver, timeout, first, format } => {
            let cfg = RunConfig {
                solver,
                source: game.source()?,
                timeout: timeout.unwrap_or(DEFAULT_TIMEOUT),
                first,
                format,
                seed: game.seed,
            };
            let report = solve(&cfg);
            match format {
                OutputFormat::Human => write!(stdout, "{}", report.render_human())?,
                OutputFormat::Jsonl => writeln!(stdout, "{}", report.to_json_line())?,
            }
            if let Some(e) = &report.error {
                eprintln!("error: {e}");
            }
            Ok(report.exit_code())
        }
        Cmd::Bench { suite, timeout, format, seed } => {
            let entries = match &suite {
                Some(path) => {
                    let src = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                    let base = path.parent().map(PathBuf::from).unwrap_or_default();
                    parse_suite(&src, &base)?
                }
                None => desk_suite(),
            };
            let rows = bench(&entries, timeout.unwrap_or(DEFAULT_TIMEOUT), seed);
            match format {
                OutputFormat::Human => write!(stdout, "{}", render_table(&rows))?,
                OutputFormat::Jsonl => {
                    for r in &rows {
                        writeln!(stdout, "{}", r.to_json_line())?;
                    }
                }
            }
            Ok(bench_exit_code(&rows))
        }
        Cmd::Gen { game, players, domain, seed, output } => {
            let id = resolve_game_id(&game, players, domain)?;
            let text = generate(&id, seed)?;
            match output {
                Some(p) => std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?,
                None => write!(stdout, "{text}")?,
            }
            Ok(0)
        }
        Cmd::ExportNfg { game, output, max_cells } => {
            export_nfg(&game.source()?, game.seed, &output, max_cells)?;
            Ok(0)
        }
    }
}
