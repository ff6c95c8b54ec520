use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use pcmas::experiment::{
    self, blockpush, dif_sweep, run_experiment, write_csv, BlockPushConfig, ExperimentId, ExperimentSpec, PolicySource,
    ResultRow,
};
use pcmas::learner::{LearnerConfig, TemperatureSchedule, DEFAULT_ALPHA, DEFAULT_GAMMA};
use pcmas::population::{run_population_traced, PopulationConfig};
use pcmas::punishment::{deterrence_report, punishment_plan};
use pcmas::teaching::{run_session, Session, TeacherFlag, TeacherStrategy, TeachingGame};
use pcmas::tmdp::{bank_temperatures, Policy, QGrid, BANK_SIZE};
use pcmas::{fixtures, Error, JointAction, MatrixGame, Result};

#[derive(Parser)]
#[command(name = "pcmas", version, about = "Punishment design and embedded teaching experiments")]
struct Cli {
    /// Base seed for every random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (CSV for experiments, binary for policies).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Punishing strategies and deterrence thresholds.
    #[command(subcommand)]
    Punish(PunishCmd),
    /// Population simulation with punishers and deviators.
    #[command(subcommand)]
    Popsim(PopsimCmd),
    /// Solve the teacher's MDP.
    #[command(subcommand)]
    Tmdp(TmdpCmd),
    /// Teaching sessions and sweeps.
    #[command(subcommand)]
    Teach(TeachCmd),
    /// Reproduce one figure's experiment.
    Fig(FigArgs),
}

#[derive(Subcommand)]
enum PunishCmd {
    Plan {
        #[arg(long)]
        game: PathBuf,
    },
    Deter {
        #[arg(long)]
        game: PathBuf,
        /// One-based joint action, e.g. `1,1`.
        #[arg(long)]
        law: JointAction,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Subcommand)]
enum PopsimCmd {
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Per-encounter CSV trace.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum TmdpCmd {
    Solve(SolveArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Teaching game JSON; the teaching prisoner's dilemma when omitted.
    #[arg(long)]
    game: Option<PathBuf>,
    /// Student temperature the policy is solved for.
    #[arg(long, required_unless_present = "bank")]
    temp: Option<f64>,
    /// Solve every temperature used under decay; `--out` names a directory.
    #[arg(long)]
    bank: bool,
    #[arg(long, default_value_t = 200)]
    cells: usize,
    #[arg(long, default_value_t = 0.99)]
    gamma0: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Student learning rate.
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
}

#[derive(Args, Clone)]
struct StudentArgs {
    /// `bql` or `ql:M` for a Q-learner remembering M joint actions.
    #[arg(long, default_value = "bql")]
    student: String,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    /// Student discount (Q-learners only).
    #[arg(long, default_value_t = DEFAULT_GAMMA)]
    gamma: f64,
}

impl StudentArgs {
    fn config(&self) -> Result<LearnerConfig> {
        if self.student == "bql" {
            return Ok(LearnerConfig::blind(self.alpha));
        }
        let m = self
            .student
            .strip_prefix("ql:")
            .and_then(|m| m.parse().ok())
            .ok_or_else(|| Error::Config(format!("unknown student `{}`", self.student)))?;
        Ok(LearnerConfig::q(m, self.alpha, self.gamma))
    }
}

#[derive(Subcommand)]
enum TeachCmd {
    /// One or more sessions of one teacher and student.
    Run {
        #[arg(long)]
        game: Option<PathBuf>,
        /// tft | 2tft | fixed:I | fixed:II | learner | optimal | delayed:K
        #[arg(long, default_value = "tft")]
        teacher: TeacherFlag,
        #[command(flatten)]
        student: StudentArgs,
        /// Fixed temperature; the decay schedule when omitted.
        #[arg(long)]
        temp: Option<f64>,
        #[arg(long, default_value_t = 10_000)]
        iterations: usize,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        /// Policy file for `--teacher optimal` at a fixed temperature.
        #[arg(long)]
        policy: Option<PathBuf>,
        /// Policy directory for `--teacher optimal` under decay.
        #[arg(long, default_value = "policies")]
        policy_dir: PathBuf,
    },
    /// Coop rate of a tit-for-tat-taught Q-learner against DIF.
    DifSweep {
        /// JSON list of teaching games; the built-in set when omitted.
        #[arg(long)]
        matrices: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_values_t = fixtures::DIF_GAMMAS)]
        gammas: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        memory: usize,
        #[arg(long, default_value_t = 10_000)]
        iterations: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Delayed-switch teaching in the block-pushing game.
    Blockpush {
        #[arg(long, value_delimiter = ',')]
        k: Option<Vec<usize>>,
        #[arg(long, default_value_t = 250)]
        k_step: usize,
        #[arg(long, default_value_t = 1.0)]
        h: f64,
        #[arg(long, default_value_t = 2.0)]
        c: f64,
        #[arg(long, default_value_t = 10_000)]
        iterations: usize,
        #[arg(long, default_value_t = 0.001)]
        alpha: f64,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        /// Fixed temperature; the decay schedule when omitted.
        #[arg(long)]
        temp: Option<f64>,
    },
}

#[derive(Args)]
struct FigArgs {
    /// fig2-opt | fig2-twoql | fig3-tft | fig3-2tft | fig4-decay | fig5-ql |
    /// fig6-ql-decay | fig7-dif | fig8-blockpush | custom
    id: ExperimentId,
    /// Experiment spec JSON, required for `custom`.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    policy_dir: Option<PathBuf>,
    /// Solve missing policies in memory instead of failing.
    #[arg(long)]
    solve_missing: bool,
    /// Print the resolved spec as JSON and exit.
    #[arg(long)]
    print_spec: bool,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

fn teaching_game(path: Option<&Path>) -> Result<TeachingGame> {
    path.map_or_else(|| Ok(fixtures::teaching_pd()), read_json)
}

fn print_json(v: &impl Serialize) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn emit_rows(cli: &Cli, rows: &[ResultRow]) -> Result<()> {
    match &cli.out {
        Some(path) => {
            write_csv(rows, BufWriter::new(File::create(path)?))?;
            eprintln!("wrote {} rows to {}", rows.len(), path.display());
        }
        None if cli.json => print_json(&rows)?,
        None => write_csv(rows, io::stdout().lock())?,
    }
    Ok(())
}

fn punish(cli: &Cli, cmd: &PunishCmd) -> Result<()> {
    match cmd {
        PunishCmd::Plan { game } => {
            let game: MatrixGame = read_json(game)?;
            let plan = punishment_plan(&game);
            if cli.json {
                return print_json(&plan);
            }
            println!("punish as player 1: {:?}", plan.punish_as_p1.probs());
            println!("punish as player 2: {:?}", plan.punish_as_p2.probs());
            println!("v = {}, v' = {}", plan.v, plan.v_prime);
            println!("deviator payoff held to at most {}", plan.minimized_malicious_payoff());
        }
        PunishCmd::Deter { game, law, n } => {
            let game: MatrixGame = read_json(game)?;
            let r = deterrence_report(&game, *law, *n)?;
            if cli.json {
                return print_json(&r);
            }
            println!("law {} among {} agents", r.law, r.n);
            println!("law payoffs e = {}, e' = {}", r.e, r.e_prime);
            println!("best deviations b = {}, b' = {}", r.b, r.b_prime);
            println!("punishment values v = {}, v' = {}", r.v, r.v_prime);
            match r.p_min {
                Some(p) => println!("minimum punishers: {p}"),
                None => println!("minimum punishers: impossible (even {} punishers do not deter)", r.n - 1),
            }
        }
    }
    Ok(())
}

fn popsim(cli: &Cli, config: &Path, trace: Option<&Path>) -> Result<()> {
    let mut config: PopulationConfig = read_json(config)?;
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    let stats = match trace {
        Some(path) => {
            let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
            let mut err = None;
            let stats = run_population_traced(&config, |row| {
                if err.is_none() {
                    err = w.serialize(row).err();
                }
            })?;
            if let Some(e) = err {
                return Err(e.into());
            }
            w.flush()?;
            stats
        }
        None => run_population_traced(&config, |_| {})?,
    };
    if cli.json {
        return print_json(&stats);
    }
    for (name, s) in [("punisher", &stats.punisher), ("conformer", &stats.conformer), ("malicious", &stats.malicious)] {
        println!("{name:>9}: {} encounters, mean {:.4} (s.e. {:.4})", s.encounters, s.mean, s.standard_error());
    }
    println!("deviations {}, punishments {}, verdict {:?}", stats.deviations, stats.punishments, stats.verdict);
    Ok(())
}

fn tmdp_solve(cli: &Cli, a: &SolveArgs) -> Result<()> {
    let game = teaching_game(a.game.as_deref())?;
    let out = cli
        .out
        .clone()
        .ok_or_else(|| Error::Config("tmdp solve needs --out".into()))?;
    if a.bank {
        let source = PolicySource {
            dir: out,
            solve_missing: true,
            cells: a.cells,
            gamma0: a.gamma0,
            tol: a.tol,
        };
        for path in source.solve_all(&game, &bank_temperatures(75.0, 0.5, BANK_SIZE), a.alpha)? {
            eprintln!("wrote {}", path.display());
        }
        return Ok(());
    }
    let temp = a.temp.expect("clap requires --temp without --bank");
    let grid = QGrid::for_game(&game, a.cells)?;
    let policy = Policy::solve(&game, grid, temp, a.alpha, a.gamma0, a.tol)?;
    policy.save(&out)?;
    if cli.json {
        #[derive(Serialize)]
        struct Summary<'a> {
            path: &'a Path,
            states: usize,
            temperature: f64,
            gamma0: f64,
            value_at_origin: f64,
        }
        return print_json(&Summary {
            path: &out,
            states: grid.num_states(),
            temperature: temp,
            gamma0: a.gamma0,
            value_at_origin: policy.value_at([0.0, 0.0]),
        });
    }
    eprintln!(
        "wrote {} ({} states, T = {temp}); V(0, 0) = {:.4}",
        out.display(),
        grid.num_states(),
        policy.value_at([0.0, 0.0])
    );
    Ok(())
}

fn teach(cli: &Cli, cmd: &TeachCmd) -> Result<()> {
    let seed = cli.seed.unwrap_or(experiment::DEFAULT_SEED);
    match cmd {
        TeachCmd::Run {
            game,
            teacher,
            student,
            temp,
            iterations,
            trials,
            policy,
            policy_dir,
        } => {
            let game = teaching_game(game.as_deref())?;
            let student = student.config()?;
            let schedule = temp.map_or(TemperatureSchedule::standard_decay(), TemperatureSchedule::fixed);
            let strategy = teacher.resolve(&game, || {
                let source = PolicySource {
                    dir: policy_dir.clone(),
                    ..PolicySource::default()
                };
                match (temp, policy) {
                    (Some(_), Some(path)) => Ok(TeacherStrategy::Policy(Arc::new(Policy::load(path)?))),
                    (Some(t), None) => Ok(TeacherStrategy::Policy(Arc::new(source.load(&game, *t, student.alpha)?))),
                    (None, _) => Ok(TeacherStrategy::PolicyBank(Arc::new(source.load_bank(&game, student.alpha)?))),
                }
            })?;
            let session = Session {
                game: &game,
                student,
                teacher: &strategy,
                iterations: *iterations,
                schedule,
            };
            let x = temp.unwrap_or(0.0);
            let rates = experiment::run_trials(*trials, |trial| {
                Ok(run_session(&session, pcmas::rng::trial_seed(seed, x, trial))?.coop_rate())
            })?;
            let (mean, sd) = experiment::mean_sd(&rates);
            let rows = [ResultRow {
                experiment: format!("custom/{teacher}"),
                x,
                iterations: *iterations,
                mean,
                sd,
                trials: *trials,
                seed,
            }];
            if cli.out.is_some() || cli.json {
                return emit_rows(cli, &rows);
            }
            println!("teacher {teacher}: coop rate {mean:.4} (sd {sd:.4}) over {trials} x {iterations} iterations");
        }
        TeachCmd::DifSweep {
            matrices,
            gammas,
            memory,
            iterations,
            trials,
        } => {
            let matrices = match matrices {
                Some(path) => read_json(path)?,
                None => {
                    let mut m = fixtures::dif_matrices();
                    m.push(fixtures::flat_game(0.0));
                    m
                }
            };
            let points = dif_sweep(
                &matrices,
                gammas,
                LearnerConfig::q(*memory, DEFAULT_ALPHA, DEFAULT_GAMMA),
                &TeacherStrategy::Tft,
                TemperatureSchedule::standard_decay(),
                *iterations,
                *trials,
                seed,
            )?;
            if cli.json && cli.out.is_none() {
                return print_json(&points);
            }
            let rows: Vec<ResultRow> = points
                .iter()
                .map(|p| ResultRow {
                    experiment: "fig7-dif".into(),
                    x: p.dif,
                    iterations: *iterations,
                    mean: p.mean,
                    sd: p.sd,
                    trials: *trials,
                    seed,
                })
                .collect();
            emit_rows(cli, &rows)?;
        }
        TeachCmd::Blockpush {
            k,
            k_step,
            h,
            c,
            iterations,
            alpha,
            trials,
            temp,
        } => {
            let ks = match k {
                Some(ks) => ks.clone(),
                None => (0..=*iterations).step_by((*k_step).max(1)).collect(),
            };
            let config = BlockPushConfig {
                h: *h,
                c_factor: *c,
                iterations: *iterations,
                alpha: *alpha,
                schedule: temp.map_or(TemperatureSchedule::standard_decay(), TemperatureSchedule::fixed),
                trials: *trials,
                seed,
            };
            let result = blockpush(&fixtures::block_pushing(), &config, &ks)?;
            if cli.json && cli.out.is_none() {
                return print_json(&result);
            }
            emit_rows(cli, &result.rows("fig8-blockpush"))?;
        }
    }
    Ok(())
}

fn fig(cli: &Cli, a: &FigArgs) -> Result<()> {
    let mut spec = match (&a.spec, a.id) {
        (Some(path), _) => ExperimentSpec::from_json_file(path)?,
        (None, ExperimentId::Custom) => return Err(Error::Config("`fig custom` needs --spec <file>".into())),
        (None, id) => ExperimentSpec::preset(id)?,
    };
    if let Some(s) = cli.seed {
        spec.seed = s;
    }
    if let Some(t) = a.trials {
        spec.trials = t;
    }
    if let Some(dir) = &a.policy_dir {
        spec.policies.dir = dir.clone();
    }
    spec.policies.solve_missing |= a.solve_missing;
    if a.print_spec {
        return print_json(&spec);
    }
    let rows = run_experiment(&spec)?;
    emit_rows(cli, &rows)
}

fn run(cli: &Cli) -> Result<()> {
    experiment::configure_threads();
    match &cli.command {
        Command::Punish(cmd) => punish(cli, cmd),
        Command::Popsim(PopsimCmd::Run { config, trace }) => popsim(cli, config, trace.as_deref()),
        Command::Tmdp(TmdpCmd::Solve(a)) => tmdp_solve(cli, a),
        Command::Teach(cmd) => teach(cli, cmd),
        Command::Fig(a) => fig(cli, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
