use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use leftover::decode::decode_full;
use leftover::genealogy::dump_genealogy;
use leftover::harness::{run_experiment, sweep, sweep_csv, sweep_grid, ExperimentConfig, Method};
use leftover::instance::{generate_instance, parse_instance, serialize_instance, validate_instance, GenConfig, Instance, Severity};
use leftover::matheuristic::{run_forward_looking, run_myopic, SubproblemSolver, TrainingConfig};
use leftover::model::build_full_model;
use leftover::oracle::{exact_multi_period, validate_plan, OracleLimits};
use leftover::plan::Plan;
use leftover::solver::{export_lp, solve, Backend, SolverConfig};

#[derive(Parser)]
#[command(name = "leftover", version, about = "Multi-period 2D cutting with usable leftovers")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a random instance.
    Generate(GenerateArgs),
    /// Check an instance file.
    Validate { file: PathBuf },
    /// Solve an instance and print the plan totals.
    Solve(SolveArgs),
    /// Write the full model in LP format.
    ExportLp {
        file: PathBuf,
        #[arg(long)]
        xi: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve, then check the plan with the independent validator.
    Verify(SolveArgs),
    /// Run several methods over several instances.
    Compare(CompareArgs),
    /// Forward-looking runs over the δ_ini × σ grid.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Myopic,
    Flook,
    Exact,
    Oracle,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Myopic => Method::Myopic,
            MethodArg::Flook => Method::ForwardLooking,
            MethodArg::Exact => Method::Exact,
            MethodArg::Oracle => Method::Oracle,
        }
    }
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// `builtin`, `oracle` (exhaustive single-period search), or a shell
    /// command with {lp} and {sol} placeholders.
    #[arg(long, default_value = "builtin")]
    backend: String,
    /// Seconds per MILP solve.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    delta_ini: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    /// Override the instance's expiration horizon.
    #[arg(long)]
    xi: Option<usize>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    periods: usize,
    #[arg(long, default_value_t = 1)]
    xi: usize,
    /// Purchasable objects per period, `min,max`.
    #[arg(long, default_value = "1,5")]
    objects: String,
    #[arg(long, default_value = "30,100")]
    object_dim: String,
    #[arg(long, default_value = "2,15")]
    items: String,
    #[arg(long, default_value = "5,20")]
    item_dim: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value = "myopic")]
    method: MethodArg,
    #[command(flatten)]
    solver: SolverArgs,
    /// Training trace CSV (flook) written here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    dump_genealogy: bool,
}

#[derive(Args)]
struct CompareArgs {
    files: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "myopic,flook")]
    methods: Vec<MethodArg>,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    files: Vec<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn pair(s: &str) -> Result<(i64, i64)> {
    let (a, b) = s.split_once(',').with_context(|| format!("expected `min,max`, got `{s}`"))?;
    Ok((a.trim().parse()?, b.trim().parse()?))
}

fn load(path: &Path, xi: Option<usize>) -> Result<Instance> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut inst = parse_instance(&text).with_context(|| format!("parsing {}", path.display()))?;
    if let Some(xi) = xi {
        inst.xi = xi;
    }
    Ok(inst)
}

impl SolverArgs {
    fn milp(&self) -> SolverConfig {
        let backend = match self.backend.as_str() {
            "builtin" | "oracle" => Backend::Builtin,
            cmd => Backend::External(cmd.to_string()),
        };
        SolverConfig { backend, time_limit: self.time_limit.map(Duration::from_secs_f64), ..Default::default() }
    }

    fn experiment(&self, methods: Vec<Method>) -> ExperimentConfig {
        let mut training = TrainingConfig::default();
        if let Some(d) = self.delta_ini {
            training.delta_ini = d;
        }
        if let Some(s) = self.sigma {
            training.sigma = s;
        }
        if let Some(e) = self.eps {
            training.eps = e;
        }
        let solver = if self.backend == "oracle" {
            SubproblemSolver::Oracle(OracleLimits::default())
        } else {
            SubproblemSolver::Milp(self.milp())
        };
        let compare = (methods.contains(&Method::ForwardLooking) && methods.contains(&Method::Myopic))
            .then_some((Method::ForwardLooking, Method::Myopic));
        ExperimentConfig { methods, training, solver, exact: self.milp(), oracle: OracleLimits::default(), compare }
    }
}

fn write_or_print(w: &mut dyn Write, out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            write!(w, "{text}")?;
            Ok(())
        }
    }
}

fn solve_plan(w: &mut dyn Write, args: &SolveArgs) -> Result<(Instance, Plan)> {
    let inst = load(&args.file, args.solver.xi)?;
    let cfg = args.solver.experiment(vec![args.method.into()]);
    let plan = match Method::from(args.method) {
        Method::Myopic => run_myopic(&inst, &cfg.solver)?.0,
        Method::ForwardLooking => {
            let r = run_forward_looking(&inst, &cfg.training, &cfg.solver)?;
            writeln!(w, "cycles {} (best from cycle {})", r.trace.cycles.len(), r.best_cycle)?;
            if let Some(out) = &args.out {
                std::fs::write(out, r.trace.to_csv()?)?;
            }
            r.plan
        }
        Method::Exact => {
            let ms = build_full_model(&inst)?;
            let sol = solve(&ms, &cfg.exact)?;
            if !sol.has_values() {
                bail!("no solution found ({:?})", sol.status);
            }
            writeln!(w, "status {:?} bound {} nodes {}", sol.status, sol.bound, sol.nodes)?;
            decode_full(&ms, &inst, &sol.values)?
        }
        Method::Oracle => exact_multi_period(&inst, &cfg.oracle)?,
    };
    Ok((inst, plan))
}

fn print_plan(w: &mut dyn Write, plan: &Plan, genealogy: bool) -> Result<()> {
    let t = plan.totals;
    writeln!(w, "cost {}", t.cost)?;
    writeln!(w, "leftover_value {}", t.leftover_value)?;
    writeln!(w, "objective {}", t.objective)?;
    let left: Vec<String> = plan.final_leftovers().iter().map(|(w, h)| format!("{w}x{h}")).collect();
    writeln!(w, "final_leftovers {}", if left.is_empty() { "-".to_string() } else { left.join(" ") })?;
    for pp in &plan.periods {
        let used: Vec<String> = pp
            .decision
            .used_flags()
            .iter()
            .enumerate()
            .filter(|(_, &u)| u)
            .map(|(j, _)| {
                let o = pp.pool.objects[j];
                let c = pp.decision.cuts[j];
                let kind = if j < pp.pool.purchasable_count { "buy" } else { "reuse" };
                format!("{kind} {}x{} (t={} r={} eta={})", o.width, o.height, c.top, c.right, u8::from(c.vertical_first))
            })
            .collect();
        writeln!(w, "s={}: {}", pp.pool.instant, used.join(", "))?;
    }
    if genealogy {
        let mut pools: Vec<_> = plan.periods.iter().map(|p| p.pool.clone()).collect();
        pools.push(plan.final_pool.clone());
        write!(w, "{}", dump_genealogy(&pools))?;
    }
    Ok(())
}

fn run(cli: Cli, w: &mut dyn Write) -> Result<ExitCode> {
    match cli.command {
        Cmd::Generate(a) => {
            let cfg = GenConfig {
                periods: a.periods,
                xi: a.xi,
                objects_per_period: {
                    let (x, y) = pair(&a.objects)?;
                    (x as usize, y as usize)
                },
                object_dim: pair(&a.object_dim)?,
                items_per_period: {
                    let (x, y) = pair(&a.items)?;
                    (x as usize, y as usize)
                },
                item_dim: pair(&a.item_dim)?,
                seed: a.seed,
                ..Default::default()
            };
            let inst = generate_instance(&cfg)?;
            write_or_print(w, a.out.as_deref(), &serialize_instance(&inst))?;
        }
        Cmd::Validate { file } => {
            let inst = load(&file, None)?;
            let diags = validate_instance(&inst);
            for d in &diags {
                writeln!(w, "{:?}: {}", d.severity, d.message)?;
            }
            if diags.iter().any(|d| d.severity == Severity::Error) {
                return Ok(ExitCode::FAILURE);
            }
            writeln!(w, "ok")?;
        }
        Cmd::Solve(a) => {
            let (_, plan) = solve_plan(w, &a)?;
            print_plan(w, &plan, a.dump_genealogy)?;
        }
        Cmd::ExportLp { file, xi, out } => {
            let inst = load(&file, xi)?;
            write_or_print(w, out.as_deref(), &export_lp(&build_full_model(&inst)?))?;
        }
        Cmd::Verify(a) => {
            let (inst, plan) = solve_plan(w, &a)?;
            print_plan(w, &plan, a.dump_genealogy)?;
            let v = validate_plan(&inst, &plan);
            for x in &v {
                writeln!(w, "violation: {x}")?;
            }
            if !v.is_empty() {
                return Ok(ExitCode::FAILURE);
            }
            writeln!(w, "valid")?;
        }
        Cmd::Compare(a) => {
            let instances = a
                .files
                .iter()
                .map(|f| Ok((f.display().to_string(), load(f, a.solver.xi)?)))
                .collect::<Result<Vec<_>>>()?;
            let cfg = a.solver.experiment(a.methods.iter().map(|&m| m.into()).collect());
            let report = run_experiment(&instances, &cfg);
            write!(w, "{}", report.to_text())?;
            if let Some(out) = &a.out {
                std::fs::write(out, report.to_csv()?)?;
            }
        }
        Cmd::Sweep(a) => {
            let instances = a
                .files
                .iter()
                .map(|f| Ok((f.display().to_string(), load(f, a.solver.xi)?)))
                .collect::<Result<Vec<_>>>()?;
            let cfg = a.solver.experiment(vec![Method::Myopic, Method::ForwardLooking]);
            let points = sweep(&instances, &cfg, &sweep_grid());
            write_or_print(w, a.out.as_deref(), &sweep_csv(&points)?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let stdout = std::io::stdout();
    match run(Cli::parse(), &mut stdout.lock()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
