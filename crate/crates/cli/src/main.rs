use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use poisson_groupoid::verify::{Suite, DEFAULT_SAMPLES};

mod commands;
mod parse;

const VERIFY_HELP: &str = "\
Report (JSON, schema 1):
  { \"schema\": 1, \"model\": str, \"suite\": str, \"samples\": int,
    \"environment\": { \"precision\": \"f64\", \"seed\": int, \"fd_step\": float, \"version\": str },
    \"checks\": [ { \"id\": str, \"samples\": int, \"max_defect\": float,
                  \"tolerance\": float, \"pass\": bool, \"note\": str? } ],
    \"pass\": bool }
Checks are sorted by id. A check passes iff max_defect <= tolerance.
The report is identical for identical (model, suite, seed, samples).";

const ORBIT_HELP: &str = "\
CSV columns: t, then the parameters of G (su11: re_alpha, im_alpha, re_beta,
im_beta; trivial: x0..), then margin. One row per sample of the exact curve,
every dt, followed by a final line `# termination=completed`,
`# termination=escaped(t=<t_escape>)` or `# termination=step_limit`.
The summary line printed after the run also gives the largest gap between the
exact curve and the RKMK4 integrator where the margin is at least 1e-2; the
exit code is 1 if that gap exceeds 1e-6.

Example: --beta 1,0 --xi 0,0,-1 --t-end -1 escapes at t = 1 - sqrt 2.";

const FACTORIZE_HELP: &str = "\
Output (JSON, schema 1):
  { \"schema\": 1, \"model\": \"su11\", \"d\": [[re, im] x 4, row major],
    \"factorizations\": [ { \"order\": \"g_gstar\" | \"gstar_g\",
        \"status\": \"ok\", \"margin\": float,
        \"g\": { \"alpha\": [re, im], \"beta\": [re, im] },
        \"gamma\": { \"A\": float, \"N\": [re, im] }, \"residual\": float }
      | { \"order\": ..., \"status\": \"not_factorizable\", \"margin\": float } ],
    \"pass\": bool }
`residual` is the entrywise distance between d and the reassembled product;
pass is false (exit 1) if any residual exceeds 1e-10.";

const REDUCE_HELP: &str = "\
Builds a = [section(z1), gamma] and b = [section(z2), gamma] in the reduced
groupoid, where gamma = exp of the given g* coordinates must lie in H^perp,
and composes them. Without --z2, b starts where a ends.

Transcript (JSON, schema 1):
  { \"schema\": 1, \"model\": str, \"inputs\": { \"z1\", \"z2\", \"gamma\", \"seed\" },
    \"elements\": { \"a\", \"b\", \"inverse_a\" },
    \"steps\": [ { \"name\": str, \"status\": \"ok\", \"result\": element, \"residual\": float? }
               | { \"name\": str, \"status\": \"not_composable\", \"residual\": float } ],
    \"residuals\": { name: float }, \"tolerance\": float, \"pass\": bool }
An element is { \"z\", \"gamma1\", \"gamma2\", \"residuals\": { \"omega\", \"level\" } }.
Steps: a*b, unit(z1)*a, a*inverse(a) against unit(z1), and a replay of a*b
with both representatives moved by random H elements drawn from --seed.
A non-composable pair is reported in its step and does not fail the run.";

/// Symplectic groupoids of Poisson-Lie groups and their reductions.
#[derive(Parser)]
#[command(name = "pgroupoid", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and emit a JSON report.
    #[command(after_help = VERIFY_HELP)]
    Verify(VerifyArgs),
    /// Trace a dressing orbit on G and emit CSV.
    #[command(after_help = ORBIT_HELP)]
    Orbit(OrbitArgs),
    /// Factorize a point of the double in both orders.
    #[command(after_help = FACTORIZE_HELP)]
    Factorize(FactorizeArgs),
    /// Build, compose and invert elements of the reduced groupoid.
    #[command(name = "reduce-demo", after_help = REDUCE_HELP)]
    ReduceDemo(ReduceArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// su11, trivial or trivial:<n>:<k>
    #[arg(long, default_value = "su11")]
    model: String,
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    suite: SuiteArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    All,
    Algebra,
    Dressing,
    Tensors,
    Groupoid,
    Reduction,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::All => Suite::All,
            SuiteArg::Algebra => Suite::Algebra,
            SuiteArg::Dressing => Suite::Dressing,
            SuiteArg::Tensors => Suite::Tensors,
            SuiteArg::Groupoid => Suite::Groupoid,
            SuiteArg::Reduction => Suite::Reduction,
        }
    }
}

#[derive(Args)]
struct OrbitArgs {
    #[arg(long, default_value = "su11")]
    model: String,
    /// su11 start point alpha as `re,im`; defaults to the real positive root
    /// of |alpha|^2 = 1 + |beta|^2.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// su11 start point beta as `re,im`.
    #[arg(long, allow_hyphen_values = true, default_value = "0,0")]
    beta: String,
    /// Start point coordinates for trivial models, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    g: Option<String>,
    /// Generator in g* coordinates, comma separated (su11: f0, f1, f2).
    #[arg(long, allow_hyphen_values = true)]
    xi: String,
    #[arg(long, allow_hyphen_values = true)]
    t_end: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long, default_value_t = 1_000_000)]
    max_steps: usize,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FactorizeArgs {
    #[arg(long, default_value = "su11")]
    model: String,
    /// SL(2,C) matrix as 8 reals: a_re,a_im,b_re,b_im,c_re,c_im,d_re,d_im.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["g", "gamma"])]
    matrix: Option<String>,
    /// Build d = g gamma from g = alpha_re,alpha_im,beta_re,beta_im ...
    #[arg(long, allow_hyphen_values = true, requires = "gamma")]
    g: Option<String>,
    /// ... and gamma = A,N_re,N_im.
    #[arg(long, allow_hyphen_values = true, requires = "g")]
    gamma: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(long, default_value = "su11")]
    model: String,
    /// Source of the first element in quotient coordinates (su11: re,im of z).
    #[arg(long, allow_hyphen_values = true)]
    z1: String,
    /// Source of the second element; defaults to the target of the first.
    #[arg(long, allow_hyphen_values = true)]
    z2: Option<String>,
    /// g* coordinates of log gamma, which must lie in h^perp (su11: 0,a,b).
    #[arg(long, allow_hyphen_values = true)]
    gamma: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// How a command ended, mapped onto the exit code contract.
pub enum Failure {
    /// Bad input: exit 2.
    Usage(String),
    /// A check or residual exceeded its tolerance: exit 1.
    Check(String),
}

impl From<poisson_groupoid::Error> for Failure {
    fn from(e: poisson_groupoid::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Check(format!("io: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(a) => commands::verify(&a.model, a.suite.into(), a.seed, a.samples, a.out.as_deref()),
        Command::Orbit(a) => commands::orbit(&a),
        Command::Factorize(a) => commands::factorize(&a),
        Command::ReduceDemo(a) => commands::reduce_demo(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
