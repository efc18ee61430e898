//! spliteq: Nash equilibria of atomic splittable congestion games with
//! player-specific affine costs, solved exactly and parametrically in the
//! demand multiplier λ.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error,
//! 3 solver budget error.

use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::{One, Zero};

use spliteq_core::game::{ArithmeticMode, FlowProfile};
use spliteq_core::io::{
    self, emit_breakpoints, gen_example_8player, gen_gadget, gen_random, BimatrixGame, EmitFormat,
    NumberStyle, RandomGameParams,
};
use spliteq_core::oracle::{self, OracleConfig};
use spliteq_core::scalar::rational_to_f64;
use spliteq_core::{homotopy, ExactGame, Rational, SolveError};

const EXIT_VERIFY: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(name = "spliteq", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Float,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleModeArg {
    BestResponse,
    PotentialMin,
    Exhaustive,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the equilibrium at one demand multiplier.
    Solve {
        file: String,
        /// Demand multiplier λ ∈ [0, 1] (rational or decimal).
        #[arg(long, default_value = "1")]
        lambda: String,
        /// Arithmetic mode override (also via SPLITEQ_MODE).
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Compute the full parametric equilibrium f(λ), λ ∈ [0, 1].
    Trace {
        file: String,
        /// Write breakpoints as CSV to this path instead of stdout.
        #[arg(long)]
        out: Option<String>,
        /// Emit fixed-precision decimals instead of exact fractions.
        #[arg(long)]
        decimals: Option<usize>,
        /// Emit a JSON-like array instead of CSV.
        #[arg(long)]
        json: bool,
    },
    /// Verify that a flow file is an equilibrium for the given λ.
    Verify {
        file: String,
        flow_file: String,
        #[arg(long, default_value = "1")]
        lambda: String,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Generate instances.
    Gen {
        #[command(subcommand)]
        what: GenCommand,
    },
    /// Run the independent oracle on an instance.
    Oracle {
        file: String,
        #[arg(long, value_enum, default_value = "best-response")]
        mode: OracleModeArg,
        #[arg(long, default_value = "1")]
        lambda: String,
    },
    /// Compare the homotopy solution against the oracle at λ = 1.
    Compare { file: String },
}

#[derive(Subcommand)]
enum GenCommand {
    /// Seeded random instance.
    Random(RandomArgs),
    /// Hardness-reduction gadget built from a win-lose bimatrix game.
    Gadget(GadgetArgs),
    /// The 8-player ring instance with a continuum of equilibria.
    Example8 {
        #[arg(long)]
        out: Option<String>,
    },
}

#[derive(Args)]
struct RandomArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    vertices: usize,
    #[arg(long, default_value_t = 6)]
    edges: usize,
    #[arg(long, default_value_t = 2)]
    players: usize,
    /// Use identical costs for all players.
    #[arg(long)]
    player_independent: bool,
    /// Two-vertex parallel-link topology.
    #[arg(long)]
    parallel_links: bool,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct GadgetArgs {
    /// Rows of U as 0/1 strings, e.g. --u 10 --u 01
    #[arg(long, required = true)]
    u: Vec<String>,
    /// Rows of V as 0/1 strings.
    #[arg(long, required = true)]
    v: Vec<String>,
    /// Approximation exponent β > 0.
    #[arg(long, default_value = "1")]
    beta: String,
    /// Slope substitute δ > 0 for the construction's zero slopes.
    #[arg(long, default_value = "1/1000000")]
    delta: String,
    #[arg(long)]
    out: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(AppError { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}

struct AppError {
    code: u8,
    message: String,
}

fn input_err(message: impl Into<String>) -> AppError {
    AppError {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

fn solver_err(e: SolveError) -> AppError {
    let code = match e {
        SolveError::PivotBudgetExceeded { .. } => EXIT_BUDGET,
        _ => EXIT_BUDGET,
    };
    AppError {
        code,
        message: e.to_string(),
    }
}

fn load_game(path: &str, mode: Option<ModeArg>) -> Result<ExactGame, AppError> {
    let text =
        fs::read_to_string(path).map_err(|e| input_err(format!("cannot read '{path}': {e}")))?;
    let doc = io::parse(&text).map_err(|e| input_err(format!("{path}: {e}")))?;
    let mut game = doc
        .to_game()
        .map_err(|e| input_err(format!("{path}: {e}")))?;
    // mode precedence: flag > SPLITEQ_MODE > document
    let env_mode = std::env::var("SPLITEQ_MODE").ok();
    let chosen = mode.map(|m| match m {
        ModeArg::Exact => ArithmeticMode::Exact,
        ModeArg::Float => ArithmeticMode::Float {
            tolerance: ArithmeticMode::DEFAULT_FLOAT_TOLERANCE,
        },
    });
    let env_chosen = env_mode.as_deref().and_then(parse_mode_string);
    if let Some(m) = chosen.or(env_chosen) {
        game.mode = m;
    }
    Ok(game)
}

fn parse_mode_string(s: &str) -> Option<ArithmeticMode> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("exact") {
        return Some(ArithmeticMode::Exact);
    }
    if let Some(rest) = s.strip_prefix("float") {
        let tol = rest
            .trim_start_matches(':')
            .trim()
            .parse()
            .unwrap_or(ArithmeticMode::DEFAULT_FLOAT_TOLERANCE);
        return Some(ArithmeticMode::Float { tolerance: tol });
    }
    None
}

fn parse_lambda(s: &str) -> Result<Rational, AppError> {
    let q = io::parse_rational(s).ok_or_else(|| input_err(format!("invalid λ '{s}'")))?;
    if q < Rational::zero() || q > Rational::one() {
        return Err(input_err(format!("λ = {q} outside [0, 1]")));
    }
    Ok(q)
}

fn render_flow(game: &ExactGame, x: &FlowProfile<Rational>) {
    match game.mode {
        ArithmeticMode::Exact => {
            for i in 0..game.num_players() {
                let block: Vec<String> = x
                    .player_block(game.num_edges(), i)
                    .iter()
                    .map(|v| v.to_string())
                    .collect();
                println!("player {i}: {}", block.join(" "));
            }
        }
        ArithmeticMode::Float { .. } => {
            for i in 0..game.num_players() {
                let block: Vec<String> = x
                    .player_block(game.num_edges(), i)
                    .iter()
                    .map(|v| format!("{:.12}", rational_to_f64(v)))
                    .collect();
                println!("player {i}: {}", block.join(" "));
            }
        }
    }
}

fn write_or_print(out: &Option<String>, content: &str) -> Result<(), AppError> {
    match out {
        Some(path) => {
            fs::write(path, content).map_err(|e| input_err(format!("cannot write '{path}': {e}")))
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, AppError> {
    match cli.command {
        Command::Solve { file, lambda, mode } => {
            let game = load_game(&file, mode)?;
            let lam = parse_lambda(&lambda)?;
            let x = homotopy::solve_at(&game, &lam).map_err(solver_err)?;
            let report = spliteq_core::game::verify_equilibrium(&game, &x, &lam, &Rational::zero());
            render_flow(&game, &x);
            if !report.pass {
                eprintln!("solution failed verification");
                return Ok(ExitCode::from(EXIT_VERIFY));
            }
            println!("verified: equilibrium at lambda = {lam}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Trace {
            file,
            out,
            decimals,
            json,
        } => {
            let game = load_game(&file, None)?;
            let f = homotopy::trace(&game).map_err(solver_err)?;
            let style = match decimals {
                Some(p) => NumberStyle::Decimals(p),
                None => NumberStyle::Exact,
            };
            let format = if json {
                EmitFormat::JsonLike
            } else {
                EmitFormat::Csv
            };
            let content = emit_breakpoints(&game, &f, format, style);
            write_or_print(&out, &content)?;
            eprintln!(
                "{} breakpoints, {} pivots, {} degenerate traversals",
                f.breakpoints.len(),
                f.pivot_count,
                f.degenerate_count
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            file,
            flow_file,
            lambda,
            mode,
        } => {
            let game = load_game(&file, mode)?;
            let lam = parse_lambda(&lambda)?;
            let text = fs::read_to_string(&flow_file)
                .map_err(|e| input_err(format!("cannot read '{flow_file}': {e}")))?;
            let values =
                io::parse_flow_values(&text).map_err(|e| input_err(format!("{flow_file}: {e}")))?;
            let expect = game.num_edges() * game.num_players();
            if values.len() != expect {
                return Err(input_err(format!(
                    "flow file has {} values, instance needs {expect}",
                    values.len()
                )));
            }
            let x = FlowProfile::from_vec(values);
            let tol = match game.mode {
                ArithmeticMode::Exact => Rational::zero(),
                ArithmeticMode::Float { tolerance } => {
                    Rational::from_float(tolerance).unwrap_or_else(Rational::zero)
                }
            };
            let report = spliteq_core::game::verify_equilibrium(&game, &x, &lam, &tol);
            if report.pass {
                println!("PASS: equilibrium for lambda = {lam}");
                Ok(ExitCode::SUCCESS)
            } else {
                println!(
                    "FAIL: {} conservation, {} negativity, {} potential violations",
                    report.conservation.len(),
                    report.negativity.len(),
                    report.potential.len()
                );
                for (i, v, r) in report.conservation.iter().take(5) {
                    println!("  conservation: player {i} vertex {v} residual {r}");
                }
                for c in report.potential.iter().take(5) {
                    println!(
                        "  potential: edge {} player {} residual {}",
                        c.edge, c.player, c.residual
                    );
                }
                Ok(ExitCode::from(EXIT_VERIFY))
            }
        }
        Command::Gen { what } => {
            match what {
                GenCommand::Random(args) => {
                    let params = RandomGameParams {
                        vertices: args.vertices,
                        edges: args.edges,
                        players: args.players,
                        player_independent: args.player_independent,
                        parallel_links: args.parallel_links,
                        ..Default::default()
                    };
                    let doc =
                        gen_random(args.seed, &params).map_err(|e| input_err(e.to_string()))?;
                    write_or_print(&args.out, &io::serialize(&doc))?;
                }
                GenCommand::Gadget(args) => {
                    let parse_rows = |rows: &[String]| -> Result<Vec<Vec<u8>>, AppError> {
                        rows.iter()
                            .map(|r| {
                                r.bytes()
                                    .map(|b| match b {
                                        b'0' => Ok(0),
                                        b'1' => Ok(1),
                                        _ => Err(input_err("matrix rows are 0/1 strings")),
                                    })
                                    .collect()
                            })
                            .collect()
                    };
                    let u = parse_rows(&args.u)?;
                    let v = parse_rows(&args.v)?;
                    let n = u.len();
                    if v.len() != n || u.iter().chain(&v).any(|r| r.len() != n) {
                        return Err(input_err("U and V must be n×n with equal n"));
                    }
                    let beta =
                        io::parse_rational(&args.beta).ok_or_else(|| input_err("invalid beta"))?;
                    let delta = io::parse_rational(&args.delta)
                        .ok_or_else(|| input_err("invalid delta"))?;
                    let bm = BimatrixGame {
                        n,
                        u,
                        v,
                        beta,
                        delta,
                    };
                    let (doc, _) = gen_gadget(&bm).map_err(|e| input_err(e.to_string()))?;
                    write_or_print(&args.out, &io::serialize(&doc))?;
                }
                GenCommand::Example8 { out } => {
                    write_or_print(&out, &io::serialize(&gen_example_8player()))?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Oracle { file, mode, lambda } => {
            let game = load_game(&file, None)?;
            let lam = parse_lambda(&lambda)?;
            let config = OracleConfig::default();
            match mode {
                OracleModeArg::BestResponse => {
                    let fgame = game.to_float();
                    let x = oracle::oracle_equilibrium(&fgame, rational_to_f64(&lam), &config)
                        .map_err(|e| AppError {
                            code: EXIT_BUDGET,
                            message: e.to_string(),
                        })?;
                    for i in 0..fgame.num_players() {
                        let block: Vec<String> = x
                            .player_block(fgame.num_edges(), i)
                            .iter()
                            .map(|v| format!("{v:.12}"))
                            .collect();
                        println!("player {i}: {}", block.join(" "));
                    }
                }
                OracleModeArg::PotentialMin => {
                    let fgame = game.to_float();
                    let x = oracle::potential_minimizer(&fgame, rational_to_f64(&lam), &config)
                        .map_err(|e| AppError {
                            code: EXIT_INPUT,
                            message: e.to_string(),
                        })?;
                    for i in 0..fgame.num_players() {
                        let block: Vec<String> = x
                            .player_block(fgame.num_edges(), i)
                            .iter()
                            .map(|v| format!("{v:.12}"))
                            .collect();
                        println!("player {i}: {}", block.join(" "));
                    }
                }
                OracleModeArg::Exhaustive => {
                    let scan =
                        oracle::exhaustive_support_scan(&game, &lam).map_err(|e| AppError {
                            code: EXIT_BUDGET,
                            message: e.to_string(),
                        })?;
                    println!(
                        "{} equilibria, {} continuum supports{}",
                        scan.equilibria.len(),
                        scan.continuum_supports,
                        if scan.any_nonstrict {
                            " (non-strict boundary cases present)"
                        } else {
                            ""
                        }
                    );
                    for (idx, f) in scan.equilibria.iter().enumerate() {
                        let vals: Vec<String> = f.values.iter().map(|v| v.to_string()).collect();
                        println!("equilibrium {idx}: {}", vals.join(" "));
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare { file } => {
            let game = load_game(&file, None)?;
            let one = Rational::one();
            let exact = homotopy::solve_at(&game, &one).map_err(solver_err)?;
            let fgame = game.to_float();
            let oracle_x = oracle::oracle_equilibrium(&fgame, 1.0, &OracleConfig::default())
                .map_err(|e| AppError {
                    code: EXIT_BUDGET,
                    message: format!("oracle: {e}"),
                })?;
            let mut worst = 0.0f64;
            for (a, b) in exact.values.iter().zip(&oracle_x.values) {
                worst = worst.max((rational_to_f64(a) - b).abs());
            }
            let report =
                spliteq_core::game::verify_equilibrium(&game, &exact, &one, &Rational::zero());
            println!(
                "max flow deviation homotopy vs oracle: {worst:.3e}; exact verification: {}",
                if report.pass { "PASS" } else { "FAIL" }
            );
            if !report.pass || worst > 1e-8 {
                return Ok(ExitCode::from(EXIT_VERIFY));
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
