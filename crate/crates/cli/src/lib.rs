//! Command-line driver: run configuration, config files and the three run modes.
//!
//! A run is described by a [`RunConfig`], assembled from an optional
//! `key=value` file and command-line flags (flags win).

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use dls_maxwell::solver::PreconditionerKind;
use dls_maxwell::study::assemble_on_mesh;
use dls_maxwell::{
    adaptive_solve, convergence_study, default_mesh, ConvergenceRecord, ManufacturedProblem,
    SimplicialMesh, SolverKind, SolverOptions, StudyOptions,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Process exit status: 1 for usage and i/o problems, 2 for numerical failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl From<dls_maxwell::Error> for CliError {
    fn from(e: dls_maxwell::Error) -> Self {
        use dls_maxwell::Error as E;
        match e {
            E::SolverFailed(_) | E::ZeroPivot { .. } | E::SingularPoint { .. } | E::BisectionDidNotTerminate { .. } => {
                CliError::Numerical(e.to_string())
            }
            E::Io(s) => CliError::Io(std::io::Error::other(s)),
            other => CliError::Usage(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Uniform refinement study over the given levels.
    Converge,
    /// Adaptive refinement from the first level's mesh.
    Adapt,
    /// A single solve on the first level's mesh.
    SolveOnce,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Converge => "converge",
            Command::Adapt => "adapt",
            Command::SolveOnce => "solve-once",
        })
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        <Command as ValueEnum>::from_str(s, false).map_err(|_| CliError::Usage(format!("unknown command `{s}`")))
    }
}

/// Reference problem names. `example5` is the adaptive run of `example3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemName {
    Example1,
    Example2,
    Example3,
    Example4,
}

impl FromStr for ProblemName {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "example1" => Ok(ProblemName::Example1),
            "example2" => Ok(ProblemName::Example2),
            "example3" | "example5" => Ok(ProblemName::Example3),
            "example4" => Ok(ProblemName::Example4),
            other => Err(CliError::Usage(format!("unknown problem `{other}` (example1..example5)"))),
        }
    }
}

impl fmt::Display for ProblemName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemName::Example1 => "example1",
            ProblemName::Example2 => "example2",
            ProblemName::Example3 => "example3",
            ProblemName::Example4 => "example4",
        })
    }
}

impl ProblemName {
    fn default_alpha(self) -> Option<f64> {
        match self {
            ProblemName::Example3 => Some(2.0 / 3.0),
            ProblemName::Example4 => Some(1.2),
            _ => None,
        }
    }

    fn default_levels(self) -> Vec<usize> {
        match self {
            ProblemName::Example1 => vec![10, 20, 40, 80],
            ProblemName::Example2 | ProblemName::Example4 => vec![2, 4, 8],
            ProblemName::Example3 => vec![5, 10, 20, 40],
        }
    }
}

/// Fully resolved run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub problem: ProblemName,
    pub k: f64,
    pub alpha: Option<f64>,
    pub degree: usize,
    pub levels: Vec<usize>,
    pub theta: f64,
    pub steps: usize,
    pub dof_budget: Option<usize>,
    pub mu: f64,
    pub solver: SolverKind,
    pub preconditioner: PreconditionerKind,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub dump_mesh: Option<PathBuf>,
    pub dump_matrix: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: Command, problem: ProblemName) -> Self {
        let solver = SolverOptions::default();
        RunConfig {
            command,
            problem,
            k: 1.0,
            alpha: problem.default_alpha(),
            degree: 1,
            levels: problem.default_levels(),
            theta: 0.25,
            steps: 10,
            dof_budget: None,
            mu: 1.0,
            solver: solver.kind,
            preconditioner: solver.preconditioner,
            tol: solver.tol,
            out: None,
            dump_mesh: None,
            dump_matrix: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.degree) {
            return Err(CliError::Usage(format!("degree must be 1, 2 or 3, got {}", self.degree)));
        }
        if self.levels.is_empty() || self.levels.contains(&0) {
            return Err(CliError::Usage("levels must be a nonempty list of positive integers".into()));
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(CliError::Usage(format!("theta must lie in (0, 1], got {}", self.theta)));
        }
        for (name, v) in [("k", self.k), ("mu", self.mu), ("tol", self.tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Usage(format!("{name} must be positive, got {v}")));
            }
        }
        self.build_problem().map(|_| ())
    }

    pub fn build_problem(&self) -> Result<ManufacturedProblem> {
        let alpha = self.alpha.or(self.problem.default_alpha());
        let p = match self.problem {
            ProblemName::Example1 => ManufacturedProblem::example1(self.k),
            ProblemName::Example2 => ManufacturedProblem::example2(self.k),
            ProblemName::Example3 => ManufacturedProblem::example3(self.k, alpha.unwrap_or(2.0 / 3.0)),
            ProblemName::Example4 => ManufacturedProblem::example4(alpha.unwrap_or(1.2)),
        };
        Ok(p?)
    }

    pub fn study_options(&self) -> StudyOptions {
        StudyOptions {
            degree: self.degree,
            mu: self.mu,
            solver: SolverOptions {
                kind: self.solver,
                preconditioner: self.preconditioner,
                tol: self.tol,
                max_iter: None,
            },
        }
    }

    /// Serializes to the `key=value` file format read by [`RunConfig::apply_text`].
    pub fn to_text(&self) -> String {
        let mut lines = vec![
            format!("command={}", self.command),
            format!("problem={}", self.problem),
            format!("k={}", self.k),
        ];
        if let Some(a) = self.alpha {
            lines.push(format!("alpha={a}"));
        }
        lines.push(format!("m={}", self.degree));
        let levels: Vec<String> = self.levels.iter().map(usize::to_string).collect();
        lines.push(format!("levels={}", levels.join(",")));
        lines.push(format!("theta={}", self.theta));
        lines.push(format!("steps={}", self.steps));
        if let Some(b) = self.dof_budget {
            lines.push(format!("dof_budget={b}"));
        }
        lines.push(format!("mu={}", self.mu));
        lines.push(format!("solver={}", self.solver));
        lines.push(format!("preconditioner={}", self.preconditioner));
        lines.push(format!("tol={}", self.tol));
        for (key, path) in [("out", &self.out), ("dump_mesh", &self.dump_mesh), ("dump_matrix", &self.dump_matrix)] {
            if let Some(p) = path {
                lines.push(format!("{key}={}", p.display()));
            }
        }
        let mut s = lines.join("\n");
        s.push('\n');
        s
    }

    /// Applies `key=value` lines on top of `self`. Blank lines and `#`
    /// comments are skipped; keys may use `-` or `_`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("line {}: expected key=value, got `{line}`", lineno + 1)))?;
            self.set(&key.trim().replace('-', "_"), value.trim())?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "command" => self.command = value.parse()?,
            "problem" => {
                let problem: ProblemName = value.parse()?;
                if self.alpha == self.problem.default_alpha() {
                    self.alpha = problem.default_alpha();
                }
                if self.levels == self.problem.default_levels() {
                    self.levels = problem.default_levels();
                }
                self.problem = problem;
            }
            "k" => self.k = parse_num(key, value)?,
            "alpha" => self.alpha = Some(parse_num(key, value)?),
            "m" | "degree" => self.degree = parse_num(key, value)?,
            "levels" => self.levels = parse_levels(value)?,
            "theta" => self.theta = parse_num(key, value)?,
            "steps" => self.steps = parse_num(key, value)?,
            "dof_budget" => self.dof_budget = Some(parse_num(key, value)?),
            "mu" => self.mu = parse_num(key, value)?,
            "solver" => self.solver = value.parse().map_err(|e: dls_maxwell::Error| CliError::Usage(e.to_string()))?,
            "preconditioner" => {
                self.preconditioner = value.parse().map_err(|e: dls_maxwell::Error| CliError::Usage(e.to_string()))?
            }
            "tol" => self.tol = parse_num(key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "dump_mesh" => self.dump_mesh = Some(PathBuf::from(value)),
            "dump_matrix" => self.dump_matrix = Some(PathBuf::from(value)),
            other => return Err(CliError::Usage(format!("unknown key `{other}`"))),
        }
        Ok(())
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| CliError::Usage(format!("bad value `{value}` for {key}")))
}

fn parse_levels(value: &str) -> Result<Vec<usize>> {
    value.split(',').map(|t| parse_num("levels", t.trim())).collect()
}

/// Command-line flags. Every flag is optional so that a config file can
/// supply it instead.
#[derive(Debug, Parser)]
#[command(
    name = "dls-maxwell",
    version,
    about = "Discontinuous least-squares solver for time-harmonic Maxwell problems",
    arg_required_else_help = true
)]
pub struct Cli {
    /// Run mode.
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// key=value file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// example1 | example2 | example3 | example4 | example5 (= example3).
    #[arg(long)]
    pub problem: Option<String>,
    /// Wave number.
    #[arg(long)]
    pub k: Option<f64>,
    /// Singularity exponent of example3/example4.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Polynomial degree (1, 2 or 3).
    #[arg(long)]
    pub m: Option<usize>,
    /// Comma-separated subdivision counts.
    #[arg(long)]
    pub levels: Option<String>,
    /// Bulk marking fraction.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Number of adaptive refinements.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Stop adapting once the system would exceed this many unknowns.
    #[arg(long)]
    pub dof_budget: Option<usize>,
    /// Penalty scaling of the face terms.
    #[arg(long)]
    pub mu: Option<f64>,
    /// bicgstab | cg
    #[arg(long)]
    pub solver: Option<String>,
    /// sgs | ilu0 | jacobi
    #[arg(long)]
    pub preconditioner: Option<String>,
    /// Relative residual tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// CSV destination (stdout if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the final mesh in text format.
    #[arg(long)]
    pub dump_mesh: Option<PathBuf>,
    /// Write the final system matrix in MatrixMarket format.
    #[arg(long)]
    pub dump_matrix: Option<PathBuf>,
}

impl Cli {
    /// Resolves file values and flags into a validated configuration.
    pub fn into_config(self) -> Result<RunConfig> {
        let mut config = RunConfig::new(Command::Converge, ProblemName::Example1);
        let mut has_command = false;
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
            has_command = text
                .lines()
                .any(|l| l.split('#').next().unwrap_or("").trim_start().starts_with("command"));
            config.apply_text(&text)?;
        }
        if let Some(c) = self.command {
            config.command = c;
        } else if !has_command {
            return Err(CliError::Usage("missing command (converge | adapt | solve-once)".into()));
        }
        let text_flags: [(&str, Option<String>); 3] =
            [("problem", self.problem), ("solver", self.solver), ("preconditioner", self.preconditioner)];
        for (key, value) in text_flags {
            if let Some(v) = value {
                config.set(key, &v)?;
            }
        }
        if let Some(v) = self.levels {
            config.levels = parse_levels(&v)?;
        }
        if let Some(v) = self.k {
            config.k = v;
        }
        if let Some(v) = self.alpha {
            config.alpha = Some(v);
        }
        if let Some(v) = self.m {
            config.degree = v;
        }
        if let Some(v) = self.theta {
            config.theta = v;
        }
        if let Some(v) = self.steps {
            config.steps = v;
        }
        if self.dof_budget.is_some() {
            config.dof_budget = self.dof_budget;
        }
        if let Some(v) = self.mu {
            config.mu = v;
        }
        if let Some(v) = self.tol {
            config.tol = v;
        }
        config.out = self.out.or(config.out);
        config.dump_mesh = self.dump_mesh.or(config.dump_mesh);
        config.dump_matrix = self.dump_matrix.or(config.dump_matrix);
        config.validate()?;
        Ok(config)
    }
}

/// Parses `argv` (including the program name). Help and version requests
/// come back as `Usage` errors carrying the rendered text.
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Usage(e.render().to_string()))?;
    cli.into_config()
}

/// Output of a run: the CSV table plus a failure, if the run stopped early.
#[derive(Debug)]
pub struct RunOutput {
    pub csv: String,
    pub failure: Option<CliError>,
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(contents)?;
    Ok(())
}

fn dump(config: &RunConfig, problem: &ManufacturedProblem, mesh: &SimplicialMesh) -> Result<()> {
    if let Some(path) = &config.dump_mesh {
        write_file(path, mesh.to_text().as_bytes())?;
    }
    if let Some(path) = &config.dump_matrix {
        let system = assemble_on_mesh(problem, mesh, &config.study_options())?;
        let mut buf = Vec::new();
        system.write_matrix_market(&mut buf)?;
        write_file(path, &buf)?;
    }
    Ok(())
}

fn run_converge(config: &RunConfig, problem: &ManufacturedProblem, levels: &[usize]) -> Result<RunOutput> {
    let record: ConvergenceRecord = convergence_study(problem, levels, &config.study_options())?;
    let finest = default_mesh(problem, *levels.last().expect("levels validated"));
    dump(config, problem, &finest)?;
    Ok(RunOutput {
        csv: record.to_csv(),
        failure: None,
    })
}

fn run_adapt(config: &RunConfig, problem: &ManufacturedProblem) -> Result<RunOutput> {
    let initial = default_mesh(problem, config.levels[0]);
    let opts = config.study_options();
    match adaptive_solve(problem, &initial, &opts, config.theta, config.steps, config.dof_budget) {
        Ok(history) => {
            dump(config, problem, &history.final_mesh)?;
            Ok(RunOutput {
                csv: history.to_csv(),
                failure: None,
            })
        }
        Err(failure) => {
            let partial = dls_maxwell::AdaptiveHistory {
                records: failure.history.clone(),
                initial_mesh: initial.clone(),
                final_mesh: initial,
            };
            Ok(RunOutput {
                csv: partial.to_csv(),
                failure: Some(failure.source.into()),
            })
        }
    }
}

/// Executes `config` and returns the CSV table.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let problem = config.build_problem()?;
    match config.command {
        Command::Converge => run_converge(config, &problem, &config.levels),
        Command::SolveOnce => run_converge(config, &problem, &config.levels[..1]),
        Command::Adapt => run_adapt(config, &problem),
    }
}

/// Runs and writes the CSV to `config.out` or `stdout`. Returns the exit status.
pub fn execute(config: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8 {
    let result = run(config).and_then(|out| {
        match &config.out {
            Some(path) => write_file(path, out.csv.as_bytes())?,
            None => stdout.write_all(out.csv.as_bytes())?,
        }
        Ok(out.failure)
    });
    match result {
        Ok(None) => 0,
        Ok(Some(e)) | Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

/// Full entry point over `argv`.
pub fn main_with_args<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(argv) {
        Ok(cli) => match cli.into_config() {
            Ok(config) => execute(&config, stdout, stderr),
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                e.exit_code()
            }
        },
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    1
                }
            }
        }
    }
}
