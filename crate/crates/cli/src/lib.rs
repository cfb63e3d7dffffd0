//! Command-line front end for calf programs.
//!
//! [`execute`] runs one parsed command line against arbitrary output
//! streams, which is how the binary and the integration tests share code.
//! Machine output goes to `out` as JSON lines or the law table. Diagnostics
//! and rewrite traces go to `err`.

pub mod laws;
pub mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use calf_core::check::check_file;
use calf_core::cost::{BaseModel, CostModel};
use calf_core::eval::{
    canonize, readback_beh, readback_cost, run_beh, run_cost, DEFAULT_STEP_LIMIT,
};
use calf_core::parse::{parse, SourceFile};
use calf_core::pretty;
use calf_core::rewrite::{prove_equal, Mutation, RewriteConfig, Verdict};
use calf_core::syntax::{as_numeral, CompType, ValType};
use calf_core::{CostMonoid, NatAdd, NatMax};
use clap::{Parser, Subcommand, ValueEnum};

use crate::laws::{run_laws, LawConfig};
use crate::report::{to_line, CanonReport, RunReport, Verified};

/// Process exit status. The four values are the only ones the binary uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    /// Type error, failed verification, or runtime failure.
    Failure = 1,
    Parse = 2,
    Io = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Parser, Debug, Clone)]
#[command(
    name = "calf",
    version,
    about = "Check, run and canonize cost-aware call-by-push-value programs"
)]
pub struct Cli {
    /// Cost monoid: nat, nat-max, or pair:M,M with M one of the first two.
    #[arg(long, global = true, env = "CALF_COST_MODEL", default_value = "nat")]
    pub cost_model: CostModel,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Parse and typecheck a program.
    Check { file: PathBuf },
    /// Evaluate `main` and print its cost and value.
    Run {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Phase::Cost)]
        phase: Phase,
        /// Add wall-clock time to the report.
        #[arg(long)]
        timing: bool,
    },
    /// Compute the canonical form `step{c} ret n` of `main : F nat`.
    Canonize {
        file: PathBuf,
        /// Prove the program equal to its canonical form by rewriting.
        #[arg(long)]
        verify: bool,
        /// Rewrite budget for --verify.
        #[arg(long, default_value_t = 100_000)]
        fuel: u64,
        /// Print the rewrite trace to standard error.
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        timing: bool,
    },
    /// Test the equational laws on random instances.
    Laws {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        count: usize,
        /// Size bound for generated subterms.
        #[arg(long, default_value_t = 20)]
        size: usize,
        #[arg(long, hide = true)]
        mutate: Option<Mutation>,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Cost,
    Beh,
}

/// Runs a command, writing results to `out` and diagnostics to `err`.
pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> ExitStatus {
    let mut job = Job { cli, out, err };
    match cli.cost_model {
        CostModel::Base(BaseModel::Nat) => job.go::<NatAdd<u64>>(),
        CostModel::Base(BaseModel::NatMax) => job.go::<NatMax<u64>>(),
        CostModel::Pair(BaseModel::Nat, BaseModel::Nat) => job.go::<(NatAdd<u64>, NatAdd<u64>)>(),
        CostModel::Pair(BaseModel::Nat, BaseModel::NatMax) => {
            job.go::<(NatAdd<u64>, NatMax<u64>)>()
        }
        CostModel::Pair(BaseModel::NatMax, BaseModel::Nat) => {
            job.go::<(NatMax<u64>, NatAdd<u64>)>()
        }
        CostModel::Pair(BaseModel::NatMax, BaseModel::NatMax) => {
            job.go::<(NatMax<u64>, NatMax<u64>)>()
        }
    }
}

/// Parses arguments and runs the command on the process streams.
pub fn main_with_args<I, T>(args: I) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitStatus::Parse
            } else {
                ExitStatus::Success
            };
        }
    };
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    execute(&cli, &mut stdout.lock(), &mut stderr.lock())
}

struct Job<'a> {
    cli: &'a Cli,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

struct Loaded<C> {
    file: SourceFile<C>,
}

fn elapsed_ms(start: Instant) -> u64 {
    start.elapsed().as_millis().try_into().unwrap_or(u64::MAX)
}

impl Job<'_> {
    fn go<C: CostMonoid>(&mut self) -> ExitStatus {
        let status = match &self.cli.command {
            Command::Check { file } => self.load::<C>(file).map(|_| ExitStatus::Success),
            Command::Run {
                file,
                phase,
                timing,
            } => self.run::<C>(file, *phase, *timing),
            Command::Canonize {
                file,
                verify,
                fuel,
                trace,
                timing,
            } => self.canonize::<C>(file, *verify, *fuel, *trace, *timing),
            Command::Laws {
                seed,
                count,
                size,
                mutate,
            } => Ok(self.laws::<C>(LawConfig {
                seed: *seed,
                count: *count,
                size: *size,
                mutation: *mutate,
            })),
        };
        let status = status.unwrap_or_else(|s| s);
        let _ = self.out.flush();
        status
    }

    fn say(&mut self, line: &str) {
        let _ = writeln!(self.out, "{line}");
    }

    fn complain(&mut self, line: &str) {
        let _ = writeln!(self.err, "{line}");
    }

    /// Reads, parses and checks a file, reporting any failure.
    fn load<C: CostMonoid>(&mut self, path: &Path) -> Result<Loaded<C>, ExitStatus> {
        let name = path.display().to_string();
        let source = std::fs::read_to_string(path).map_err(|e| {
            self.complain(&format!("calf: cannot read {name}: {e}"));
            ExitStatus::Io
        })?;
        let file = parse::<C>(&source).map_err(|diags| {
            for d in &diags {
                let _ = writeln!(self.err, "{}", d.render(&name, &source));
            }
            ExitStatus::Parse
        })?;
        if let Err(e) = check_file(&file, &RewriteConfig::default()) {
            let _ = writeln!(
                self.err,
                "{}",
                e.to_diagnostic(&file).render(&name, &source)
            );
            return Err(ExitStatus::Failure);
        }
        Ok(Loaded { file })
    }

    fn run<C: CostMonoid>(
        &mut self,
        path: &Path,
        phase: Phase,
        timing: bool,
    ) -> Result<ExitStatus, ExitStatus> {
        let loaded = self.load::<C>(path)?;
        let main = loaded.file.closed_main();
        let start = Instant::now();
        let (cost, value) = match phase {
            Phase::Cost => {
                let (c, v) = run_cost(&main, DEFAULT_STEP_LIMIT).map_err(|e| self.runtime(&e))?;
                (Some(c.render()), readback_cost(&v))
            }
            Phase::Beh => {
                let v = run_beh(&main, DEFAULT_STEP_LIMIT).map_err(|e| self.runtime(&e))?;
                (None, readback_beh(&v))
            }
        };
        let report = RunReport {
            cost,
            value: value
                .map(|t| pretty::term(&t))
                .unwrap_or_else(|| "<function>".to_owned()),
            elapsed_ms: timing.then(|| elapsed_ms(start)),
        };
        self.say(&to_line(&report));
        Ok(ExitStatus::Success)
    }

    fn runtime(&mut self, e: &calf_core::eval::EvalError) -> ExitStatus {
        self.complain(&format!("calf: {e}"));
        ExitStatus::Failure
    }

    fn canonize<C: CostMonoid>(
        &mut self,
        path: &Path,
        verify: bool,
        fuel: u64,
        trace: bool,
        timing: bool,
    ) -> Result<ExitStatus, ExitStatus> {
        let loaded = self.load::<C>(path)?;
        let expected = CompType::f(ValType::Nat);
        if *loaded.file.main_type() != expected {
            let shown = pretty::comp_type(loaded.file.main_type());
            self.complain(&format!(
                "calf: canonize needs `main : F nat`, but {} has `main : {shown}`",
                path.display()
            ));
            return Err(ExitStatus::Failure);
        }
        let main = loaded.file.closed_main();
        let start = Instant::now();
        let canon = canonize(&main, DEFAULT_STEP_LIMIT).map_err(|e| self.runtime(&e))?;
        let numeral = as_numeral(&canon.value).expect("an F nat program returns a numeral");
        let mut report = CanonReport {
            cost: canon.cost.render(),
            numeral,
            witness: pretty::term(&canon.witness),
            verified: None,
            trace_len: None,
            elapsed_ms: None,
        };
        let mut status = ExitStatus::Success;
        if verify {
            let config = RewriteConfig {
                fuel,
                mutation: None,
            };
            match prove_equal(&main, &canon.witness, false, &config) {
                Verdict::Equal(steps) => {
                    if trace {
                        for firing in &steps {
                            self.complain(&firing.to_string());
                        }
                    }
                    report.verified = Some(Verified::Decided(true));
                    report.trace_len = Some(steps.len());
                }
                Verdict::Undecided { reason } => {
                    if trace {
                        self.complain(&format!("undecided: {reason}"));
                    }
                    report.verified = Some(Verified::UNDECIDED);
                }
                Verdict::Distinct { lhs, rhs } => {
                    self.complain(&format!(
                        "calf: verification failed: normal forms {} and {} differ",
                        pretty::term(&lhs),
                        pretty::term(&rhs)
                    ));
                    report.verified = Some(Verified::Decided(false));
                    status = ExitStatus::Failure;
                }
            }
        }
        report.elapsed_ms = timing.then(|| elapsed_ms(start));
        self.say(&to_line(&report));
        Ok(status)
    }

    fn laws<C: CostMonoid>(&mut self, config: LawConfig) -> ExitStatus {
        let report = run_laws::<C>(&config);
        let text = report.render(&config, &C::model_name());
        let _ = write!(self.out, "{text}");
        if report.passed() {
            ExitStatus::Success
        } else {
            ExitStatus::Failure
        }
    }
}
