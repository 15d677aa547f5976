//! Run configuration, reports and the benchmark harness behind `cgames`.
//!
//! Reports serialize to one JSON object per line; the field set is the
//! stable schema documented in the README.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::mpsc;
use std::time::{Duration, Instant};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use constraint_games::conga::{conga_parallel, conga_with, CongaOptions, NoMonitor};
use constraint_games::enum1::{enum1_with, Enum1Options};
use constraint_games::games::{parse_game, serialize_game, GameId};
use constraint_games::oracle;
use constraint_games::{Game, SolveResult, SolveStats, Value};

/// Default limit when none is given; long enough to mean "no limit".
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(20_000);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    Enum1,
    Conga,
    CongaPar,
    Oracle,
}

impl Solver {
    pub fn name(self) -> &'static str {
        match self {
            Solver::Enum1 => "enum1",
            Solver::Conga => "conga",
            Solver::CongaPar => "conga-par",
            Solver::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Solver {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "enum1" => Ok(Solver::Enum1),
            "conga" => Ok(Solver::Conga),
            "conga-par" => Ok(Solver::CongaPar),
            "oracle" => Ok(Solver::Oracle),
            _ => bail!("unknown solver `{s}` (expected enum1, conga, conga-par or oracle)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GameSource {
    Builtin(GameId),
    File(PathBuf),
}

impl GameSource {
    /// Builtin id with the seed override applied, or the file parsed.
    pub fn load(&self, seed: Option<u64>) -> Result<(String, Game)> {
        match self {
            GameSource::Builtin(id) => {
                let id = match seed {
                    Some(s) => id.with_seed(s),
                    None => id.clone(),
                };
                let game = id.build().with_context(|| format!("building {id}"))?;
                Ok((id.to_string(), game))
            }
            GameSource::File(path) => {
                let src = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let game = parse_game(&src).map_err(|e| anyhow!("{}:{e}", path.display()))?;
                Ok((path.display().to_string(), game))
            }
        }
    }
}

/// Builder id from either a full id (`GTTA.3.100`) or a family name plus
/// `--players`/`--domain`.
pub fn resolve_game_id(game: &str, players: Option<u64>, domain: Option<u64>) -> Result<GameId> {
    let text = if game.contains('.') || (players.is_none() && domain.is_none()) {
        if players.is_some() || domain.is_some() {
            bail!("--players/--domain only apply to a bare family name, got `{game}`");
        }
        game.to_string()
    } else {
        let n = players.ok_or_else(|| anyhow!("family `{game}` needs --players"))?;
        let m = domain.ok_or_else(|| anyhow!("family `{game}` needs --domain"))?;
        format!("{game}.{n}.{m}")
    };
    Ok(GameId::parse(&text)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Human,
    Jsonl,
}

impl FromStr for OutputFormat {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "human" => Ok(OutputFormat::Human),
            "jsonl" => Ok(OutputFormat::Jsonl),
            _ => bail!("unknown format `{s}` (expected human or jsonl)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub solver: Solver,
    pub source: GameSource,
    pub timeout: Duration,
    pub first: bool,
    pub format: OutputFormat,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn new(solver: Solver, source: GameSource) -> Self {
        RunConfig { solver, source, timeout: DEFAULT_TIMEOUT, first: false, format: OutputFormat::Human, seed: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.timeout.is_zero() {
            bail!("timeout must be positive");
        }
        Ok(())
    }
}

/// Seconds from the command line; must be finite and positive.
pub fn parse_timeout(s: &str) -> Result<Duration> {
    let secs: f64 = s.parse().map_err(|_| anyhow!("timeout `{s}` is not a number"))?;
    if !(secs.is_finite() && secs > 0.0) {
        bail!("timeout must be positive, got `{s}`");
    }
    Ok(Duration::from_secs_f64(secs))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub game: String,
    pub solver: Solver,
    pub elapsed_ms: u64,
    pub candidates: u64,
    pub deviation_calls: u64,
    pub pne_count: u64,
    /// Controlled variable names, the column order of `pne`.
    pub variables: Vec<String>,
    pub pne: Vec<Vec<Value>>,
    pub timed_out: bool,
    /// `pne` may be missing equilibria: timeout or stop-after-first.
    pub partial: bool,
    pub error: Option<String>,
}

impl RunReport {
    pub fn failed(game: impl Into<String>, solver: Solver, err: impl fmt::Display) -> Self {
        RunReport {
            game: game.into(),
            solver,
            elapsed_ms: 0,
            candidates: 0,
            deviation_calls: 0,
            pne_count: 0,
            variables: Vec::new(),
            pne: Vec::new(),
            timed_out: false,
            partial: true,
            error: Some(err.to_string()),
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.error.is_some() {
            1
        } else if self.timed_out {
            2
        } else {
            0
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("reports always serialize")
    }

    pub fn from_json_line(line: &str) -> Result<Self> {
        Ok(serde_json::from_str(line)?)
    }

    pub fn render_human(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "game      {}", self.game);
        let _ = writeln!(out, "solver    {}", self.solver);
        if let Some(e) = &self.error {
            let _ = writeln!(out, "error     {e}");
            return out;
        }
        let _ = writeln!(out, "time      {}", format_ms(self.elapsed_ms));
        let _ = writeln!(out, "#Cand     {}", self.candidates);
        let _ = writeln!(out, "#Dev      {}", self.deviation_calls);
        let mut count = self.pne_count.to_string();
        if self.timed_out {
            count.push_str(" (timed out, partial)");
        } else if self.partial {
            count.push_str(" (partial)");
        }
        let _ = writeln!(out, "#PNE      {count}");
        for p in &self.pne {
            let cells: Vec<String> = self.variables.iter().zip(p).map(|(v, x)| format!("{v}={x}")).collect();
            let _ = writeln!(out, "  ({})", cells.join(", "));
        }
        out
    }
}

fn format_ms(ms: u64) -> String {
    format!("{}.{:03}s", ms / 1000, ms % 1000)
}

/// Runs one solver on an already built game.
pub fn run_solver(id: &str, game: &Game, solver: Solver, timeout: Duration, first: bool) -> RunReport {
    let start = Instant::now();
    let deadline = start.checked_add(timeout);
    let outcome = match solver {
        Solver::Enum1 => Ok(enum1_with(game, Enum1Options { deadline, stop_after_first: first })),
        Solver::Conga => {
            let opts = CongaOptions { deadline, stop_after_first: first, ..CongaOptions::default() };
            Ok(conga_with(game, opts, &mut NoMonitor))
        }
        Solver::CongaPar => {
            let opts = CongaOptions { deadline, stop_after_first: first, ..CongaOptions::default() };
            Ok(conga_parallel(game, opts))
        }
        Solver::Oracle => run_oracle(game, timeout, first),
    };
    let elapsed_ms = start.elapsed().as_millis() as u64;
    let variables = game.controlled().iter().map(|&v| game.var_name(v).to_string()).collect();
    match outcome {
        Ok(r) => RunReport {
            game: id.to_string(),
            solver,
            elapsed_ms,
            candidates: r.stats.candidates,
            deviation_calls: r.stats.deviation_calls,
            pne_count: r.pne.len() as u64,
            variables,
            pne: r.pne.into_iter().map(|p| p.0).collect(),
            timed_out: r.timed_out,
            partial: r.timed_out || first,
            error: None,
        },
        Err(e) => {
            let mut rep = RunReport::failed(id, solver, e);
            rep.elapsed_ms = elapsed_ms;
            rep
        }
    }
}

/// The oracle has no deadline of its own, so it runs on a worker thread
/// that is abandoned if it overruns.
fn run_oracle(game: &Game, timeout: Duration, first: bool) -> Result<SolveResult> {
    let (tx, rx) = mpsc::channel();
    let g = game.clone();
    std::thread::spawn(move || {
        let _ = tx.send(oracle::brute_force_profiles(&g));
    });
    match rx.recv_timeout(timeout) {
        Ok(Ok(mut pne)) => {
            if first {
                pne.truncate(1);
            }
            let stats =
                SolveStats { candidates: game.profile_count(), deviation_calls: 0, pne_found: pne.len() as u64 };
            Ok(SolveResult { pne, stats, timed_out: false })
        }
        Ok(Err(e)) => Err(e.into()),
        Err(mpsc::RecvTimeoutError::Timeout) => {
            Ok(SolveResult { pne: Vec::new(), stats: SolveStats::default(), timed_out: true })
        }
        Err(mpsc::RecvTimeoutError::Disconnected) => Err(anyhow!("oracle worker panicked")),
    }
}

pub fn solve(cfg: &RunConfig) -> RunReport {
    let label = match &cfg.source {
        GameSource::Builtin(id) => id.to_string(),
        GameSource::File(p) => p.display().to_string(),
    };
    if let Err(e) = cfg.validate() {
        return RunReport::failed(label, cfg.solver, e);
    }
    match cfg.source.load(cfg.seed) {
        Ok((id, game)) => run_solver(&id, &game, cfg.solver, cfg.timeout, cfg.first),
        Err(e) => RunReport::failed(label, cfg.solver, format!("{e:#}")),
    }
}

/// One suite line: a game and the solvers to run on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteEntry {
    pub source: GameSource,
    pub solvers: Vec<Solver>,
}

/// GTTA, MEG and TD at three players, each under enum1 and conga.
pub fn desk_suite() -> Vec<SuiteEntry> {
    ["GTTA.3.100", "MEG.3.100", "TD.3.99"]
        .iter()
        .map(|id| SuiteEntry {
            source: GameSource::Builtin(GameId::parse(id).expect("valid builtin id")),
            solvers: vec![Solver::Enum1, Solver::Conga],
        })
        .collect()
}

/// Lines of `<game> <solver>[,<solver>...]`; `#` starts a comment. A game
/// is a builtin id or `file:<path>`, relative paths resolved against `base`.
pub fn parse_suite(src: &str, base: &Path) -> Result<Vec<SuiteEntry>> {
    let mut out = Vec::new();
    for (k, raw) in src.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let ctx = || format!("suite line {}", k + 1);
        let mut words = line.split_whitespace();
        let game = words.next().expect("non-empty line");
        let solvers = words.next().ok_or_else(|| anyhow!("missing solver list")).with_context(ctx)?;
        if words.next().is_some() {
            return Err(anyhow!("trailing text")).with_context(ctx);
        }
        let source = match game.strip_prefix("file:") {
            Some(p) => GameSource::File(base.join(p)),
            None => GameSource::Builtin(GameId::parse(game).with_context(ctx)?),
        };
        let solvers = solvers.split(',').map(Solver::from_str).collect::<Result<Vec<_>>>().with_context(ctx)?;
        out.push(SuiteEntry { source, solvers });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowStatus {
    Ok,
    Timeout,
    Mismatch,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchRow {
    pub game: String,
    pub status: RowStatus,
    pub message: Option<String>,
    pub runs: Vec<RunReport>,
}

impl BenchRow {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("rows always serialize")
    }

    pub fn from_json_line(line: &str) -> Result<Self> {
        Ok(serde_json::from_str(line)?)
    }
}

/// Runs every entry in order. A row fails on its own; the suite goes on.
pub fn bench(suite: &[SuiteEntry], timeout: Duration, seed: Option<u64>) -> Vec<BenchRow> {
    suite.iter().map(|e| bench_row(e, timeout, seed)).collect()
}

fn bench_row(entry: &SuiteEntry, timeout: Duration, seed: Option<u64>) -> BenchRow {
    let (id, game) = match entry.source.load(seed) {
        Ok(x) => x,
        Err(e) => {
            let label = match &entry.source {
                GameSource::Builtin(id) => id.to_string(),
                GameSource::File(p) => p.display().to_string(),
            };
            return BenchRow {
                game: label,
                status: RowStatus::Error,
                message: Some(format!("{e:#}")),
                runs: Vec::new(),
            };
        }
    };
    let runs: Vec<RunReport> = entry.solvers.iter().map(|&s| run_solver(&id, &game, s, timeout, false)).collect();
    let (status, message) = row_status(&runs);
    BenchRow { game: id, status, message, runs }
}

fn row_status(runs: &[RunReport]) -> (RowStatus, Option<String>) {
    if let Some(r) = runs.iter().find(|r| r.error.is_some()) {
        return (RowStatus::Error, Some(format!("{}: {}", r.solver, r.error.as_deref().unwrap_or_default())));
    }
    if runs.iter().any(|r| r.timed_out) {
        let which: Vec<&str> = runs.iter().filter(|r| r.timed_out).map(|r| r.solver.name()).collect();
        return (RowStatus::Timeout, Some(format!("timed out: {}", which.join(", "))));
    }
    let mut sets = runs.iter().map(|r| {
        let mut s = r.pne.clone();
        s.sort();
        (r.solver, s)
    });
    if let Some((first, reference)) = sets.next() {
        for (other, s) in sets {
            if s != reference {
                return (
                    RowStatus::Mismatch,
                    Some(format!("{first} found {} PNE, {other} found {}", reference.len(), s.len())),
                );
            }
        }
    }
    (RowStatus::Ok, None)
}

/// 0 when every row is ok, 2 when the worst is a timeout, 1 otherwise.
pub fn bench_exit_code(rows: &[BenchRow]) -> i32 {
    if rows.iter().any(|r| matches!(r.status, RowStatus::Error | RowStatus::Mismatch)) {
        1
    } else if rows.iter().any(|r| r.status == RowStatus::Timeout) {
        2
    } else {
        0
    }
}

/// Aligned table: one row per game, one Time/#Cand/#Dev group per solver
/// in first-seen order, then #PNE and the row status.
pub fn render_table(rows: &[BenchRow]) -> String {
    let mut solvers: Vec<Solver> = Vec::new();
    for r in rows {
        for run in &r.runs {
            if !solvers.contains(&run.solver) {
                solvers.push(run.solver);
            }
        }
    }
    let mut header = vec!["Game".to_string()];
    for s in &solvers {
        header.push(format!("{s} Time"));
        header.push(format!("{s} #Cand"));
        header.push(format!("{s} #Dev"));
    }
    header.push("#PNE".into());
    header.push("Status".into());

    let mut lines = vec![header];
    for r in rows {
        let mut cells = vec![r.game.clone()];
        for s in &solvers {
            match r.runs.iter().find(|run| run.solver == *s) {
                Some(run) if run.error.is_none() => {
                    let t = format_ms(run.elapsed_ms);
                    cells.push(if run.timed_out { format!(">{t}") } else { t });
                    cells.push(run.candidates.to_string());
                    cells.push(run.deviation_calls.to_string());
                }
                Some(_) => cells.extend(["err".into(), "-".into(), "-".into()]),
                None => cells.extend(["-".into(), "-".into(), "-".into()]),
            }
        }
        let pne = r
            .runs
            .iter()
            .find(|run| run.error.is_none() && !run.timed_out)
            .map(|run| run.pne_count.to_string())
            .unwrap_or_else(|| "-".into());
        cells.push(pne);
        let status = match (&r.status, &r.message) {
            (RowStatus::Ok, _) => "ok".to_string(),
            (s, Some(m)) => format!("{}: {m}", status_name(*s)),
            (s, None) => status_name(*s).to_string(),
        };
        cells.push(status);
        lines.push(cells);
    }

    let cols = lines[0].len();
    let widths: Vec<usize> = (0..cols).map(|c| lines.iter().map(|l| l[c].len()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for (k, l) in lines.iter().enumerate() {
        let row: Vec<String> = l
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                // names and status left, numbers right
                if c == 0 || c == cols - 1 {
                    format!("{cell:<w$}", w = widths[c])
                } else {
                    format!("{cell:>w$}", w = widths[c])
                }
            })
            .collect();
        out.push_str(row.join("  ").trim_end());
        out.push('\n');
        if k == 0 {
            let total = widths.iter().sum::<usize>() + 2 * (cols - 1);
            out.push_str(&"-".repeat(total));
            out.push('\n');
        }
    }
    out
}

fn status_name(s: RowStatus) -> &'static str {
    match s {
        RowStatus::Ok => "ok",
        RowStatus::Timeout => "timeout",
        RowStatus::Mismatch => "MISMATCH",
        RowStatus::Error => "error",
    }
}

/// Game file text for a builtin id.
pub fn generate(id: &GameId, seed: Option<u64>) -> Result<String> {
    let (_, game) = GameSource::Builtin(id.clone()).load(seed)?;
    Ok(serialize_game(&game))
}

/// Writes the normal form of the game to `path`.
pub fn export_nfg(source: &GameSource, seed: Option<u64>, path: &Path, cap: u128) -> Result<()> {
    let (id, game) = source.load(seed)?;
    oracle::write_nfg(&game, path, cap).with_context(|| format!("exporting {id}"))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solver_names_round_trip() {
        for s in [Solver::Enum1, Solver::Conga, Solver::CongaPar, Solver::Oracle] {
            assert_eq!(s.name().parse::<Solver>().unwrap(), s);
            assert_eq!(serde_json::to_string(&s).unwrap(), format!("\"{}\"", s.name()));
        }
        assert!("gambit".parse::<Solver>().is_err());
    }

    #[test]
    fn timeouts_must_be_positive() {
        assert!(parse_timeout("0").is_err());
        assert!(parse_timeout("-1").is_err());
        assert!(parse_timeout("nan").is_err());
        assert!(parse_timeout("inf").is_err());
        assert_eq!(parse_timeout("0.5").unwrap(), Duration::from_millis(500));
        let mut cfg = RunConfig::new(Solver::Conga, GameSource::Builtin(GameId::Worked));
        cfg.timeout = Duration::ZERO;
        assert_eq!(solve(&cfg).exit_code(), 1);
    }

    #[test]
    fn family_and_params() {
        assert_eq!(resolve_game_id("gtta", Some(3), Some(100)).unwrap(), GameId::Gtta { n: 3, m: 100 });
        assert_eq!(resolve_game_id("TD.2.9", None, None).unwrap(), GameId::Td { n: 2, m: 9, r: 2 });
        assert!(resolve_game_id("gtta", Some(3), None).is_err());
        assert!(resolve_game_id("TD.2.9", Some(3), None).is_err());
        assert!(resolve_game_id("nope", Some(3), Some(3)).is_err());
    }

    #[test]
    fn worked_example_report() {
        let cfg = RunConfig::new(Solver::Conga, GameSource::Builtin(GameId::Worked));
        let rep = solve(&cfg);
        assert_eq!(rep.exit_code(), 0);
        assert_eq!(rep.pne, vec![vec![3, 2]]);
        assert_eq!(rep.variables, vec!["x", "y"]);
        assert!(!rep.partial);
        assert_eq!(RunReport::from_json_line(&rep.to_json_line()).unwrap(), rep);
        assert!(rep.render_human().contains("(x=3, y=2)"));
    }

    #[test]
    fn first_marks_partial() {
        let mut cfg = RunConfig::new(Solver::Enum1, GameSource::Builtin(GameId::parse("MEG.2.5").unwrap()));
        cfg.first = true;
        let rep = solve(&cfg);
        assert_eq!(rep.pne_count, 1);
        assert!(rep.partial && !rep.timed_out);
    }

    #[test]
    fn suite_parsing() {
        let src = "# desk\nGTTA.2.5 conga,enum1\n\n  file:g.game oracle  # trailing\n";
        let s = parse_suite(src, Path::new("/tmp/x")).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].solvers, vec![Solver::Conga, Solver::Enum1]);
        assert_eq!(s[1].source, GameSource::File(PathBuf::from("/tmp/x/g.game")));
        let e = parse_suite("GTTA.2.5\n", Path::new(".")).unwrap_err();
        assert!(format!("{e:#}").contains("line 1"));
        assert!(parse_suite("GTTA.2.5 conga extra\n", Path::new(".")).is_err());
        assert!(parse_suite("GTTA.2.5 fast\n", Path::new(".")).is_err());
        assert!(parse_suite("", Path::new(".")).unwrap().is_empty());
    }

    #[test]
    fn mismatch_detected() {
        let mut a = run_solver("w", &constraint_games::games::worked_example(), Solver::Conga, DEFAULT_TIMEOUT, false);
        let mut b = a.clone();
        b.solver = Solver::Enum1;
        assert_eq!(row_status(&[a.clone(), b.clone()]).0, RowStatus::Ok);
        b.pne.clear();
        assert_eq!(row_status(&[a.clone(), b.clone()]).0, RowStatus::Mismatch);
        a.timed_out = true;
        assert_eq!(row_status(&[a, b]).0, RowStatus::Timeout);
    }

    #[test]
    fn table_alignment() {
        let suite = parse_suite("WORKED conga,enum1\nGTTA.2.3 conga\n", Path::new(".")).unwrap();
        let rows = bench(&suite, DEFAULT_TIMEOUT, None);
        let t = render_table(&rows);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("Game"));
        assert!(lines[2].starts_with("WORKED"));
        assert!(lines[3].contains(" - "));
        assert_eq!(bench_exit_code(&rows), 0);
        for r in &rows {
            assert_eq!(&BenchRow::from_json_line(&r.to_json_line()).unwrap(), r);
        }
    }
}
