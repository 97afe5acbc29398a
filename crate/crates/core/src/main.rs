use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use asfm::harness::{
    default_betas, performance_profile, read_records, run_algorithm, run_suite, write_profile, write_records,
    Algorithm, RunSettings, Suite,
};
use asfm::instances::{
    ca_gamma_lower, ingest_ca, ratio_bounds_bruteforce, CaOptions, Instance, InstanceFile, InstanceKind, PerturbSpec,
    Problem, PERTURB_PER_K,
};
use asfm::oracle::{brute_force_opt, check_prop1, check_prop2, check_prop3, CHECK_MAX_N};
use asfm::{Limits, Status};

#[derive(Parser)]
#[command(name = "asfm", version, about = "Exact maximization of approximately submodular functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a LOC, COV or INF instance file.
    Generate {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a CA instance from a transaction CSV.
    IngestCa {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one algorithm on one instance.
    Solve {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value = "BC-ICG")]
        algo: Algorithm,
        #[command(flatten)]
        run: RunArgs,
        /// Records CSV (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-iteration (CG family) or per-node (BC-ICG) trace CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run a TOML suite.
    Suite {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the performance profile here.
        #[arg(long)]
        profile: Option<PathBuf>,
    },
    /// Performance profile of a records CSV.
    Profile {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check solver agreement with brute force and the ratio propositions.
    Verify {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long = "type")]
    kind: InstanceKind,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 1.0)]
    gamma_lower: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Overlay size; defaults to 1000·k when γ̲ < 1.
    #[arg(long)]
    perturb_count: Option<usize>,
}

impl GenArgs {
    fn problem(&self) -> anyhow::Result<Problem> {
        if !(self.gamma_lower > 0.0 && self.gamma_lower <= 1.0) {
            bail!("--gamma-lower must lie in (0, 1]");
        }
        let default = if self.gamma_lower < 1.0 { PERTURB_PER_K * self.k } else { 0 };
        let count = self.perturb_count.unwrap_or(default);
        let spec = (count > 0).then_some(PerturbSpec { count, gamma: self.gamma_lower });
        Ok(Problem::generate(self.kind, self.n, self.m, self.k, self.seed, spec)?)
    }
}

#[derive(Args)]
struct Source {
    /// Instance file; otherwise `--type` and friends generate one.
    #[arg(long, conflicts_with = "kind")]
    instance: Option<PathBuf>,
    #[arg(long = "type", requires_all = ["n", "k"])]
    kind: Option<InstanceKind>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    gamma_lower: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    perturb_count: Option<usize>,
}

impl Source {
    fn problem(&self) -> anyhow::Result<Problem> {
        if let Some(path) = &self.instance {
            let file = InstanceFile::read(BufReader::new(open(path)?))
                .with_context(|| format!("reading {}", path.display()))?;
            return Ok(file.to_problem()?);
        }
        let (Some(kind), Some(n), Some(k)) = (self.kind, self.n, self.k) else {
            bail!("give --instance or --type/--n/--k");
        };
        GenArgs {
            kind,
            n,
            m: self.m,
            k,
            gamma_lower: self.gamma_lower,
            seed: self.seed,
            perturb_count: self.perturb_count,
        }
        .problem()
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    lambda: Option<usize>,
    #[arg(long)]
    time_limit_s: Option<f64>,
    #[arg(long)]
    node_limit: Option<u64>,
}

impl RunArgs {
    fn settings(&self) -> RunSettings {
        RunSettings {
            lambda: self.lambda,
            limits: Limits { time: self.time_limit_s.map(Duration::from_secs_f64), nodes: self.node_limit },
        }
    }
}

fn open(path: &Path) -> anyhow::Result<File> {
    File::open(path).with_context(|| format!("opening {}", path.display()))
}

fn sink(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Generate { gen, out } => {
            let problem = gen.problem()?;
            InstanceFile::from_problem(&problem).write(sink(Some(&out))?)?;
            eprintln!("wrote {} to {}", problem.id, out.display());
        }
        Command::IngestCa { input, n, k, seed, out } => {
            let options = CaOptions { n, seed, ..CaOptions::default() };
            let ingest = ingest_ca(BufReader::new(open(&input)?), &options)?;
            let gamma = ca_gamma_lower(&ingest.instance, k)?;
            let instance = Instance::Ca(ingest.instance);
            let file = InstanceFile::new(&instance, k, gamma, seed, None, ingest.items);
            file.to_problem()?;
            file.write(sink(Some(&out))?)?;
            eprintln!("{} transactions, {} items, gamma_lower {gamma:.6}", ingest.transactions, file.n);
        }
        Command::Solve { source, algo, run, out, trace } => {
            let problem = source.problem()?;
            let output = run_algorithm(&problem, algo, &run.settings())?;
            write_records(sink(out.as_deref())?, std::slice::from_ref(&output.record))?;
            if let Some(path) = trace {
                let w = sink(Some(&path))?;
                match (&output.cg_trace, &output.bc_stats) {
                    (Some(t), _) => t.write_csv(w)?,
                    (_, Some(s)) => s.write_csv(w)?,
                    _ => bail!("{algo} produces no trace"),
                }
            }
            let elems: Vec<String> = output.best.iter().map(|i| (i + 1).to_string()).collect();
            eprintln!("{} {}: {:.9} {{{}}}", problem.id, algo, output.record.value, elems.join(","));
        }
        Command::Suite { config, out, profile } => {
            let text = std::fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let suite = Suite::parse(&text).with_context(|| config.display().to_string())?;
            let records = run_suite(&suite)?;
            write_records(sink(out.as_deref())?, &records)?;
            if let Some(path) = profile {
                write_profile(sink(Some(&path))?, &performance_profile(&records, &default_betas())?)?;
            }
        }
        Command::Profile { records, out } => {
            let recs = read_records(BufReader::new(open(&records)?))?;
            write_profile(sink(out.as_deref())?, &performance_profile(&recs, &default_betas())?)?;
        }
        Command::Verify { source, run } => return verify(&source.problem()?, &run.settings()),
    }
    Ok(true)
}

fn verify(problem: &Problem, settings: &RunSettings) -> anyhow::Result<bool> {
    let mut ok = true;
    let mut report = |name: &str, pass: bool, detail: String| {
        ok &= pass;
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    };
    let f = problem.function();
    let gs = problem.ground_set();
    let opt = brute_force_opt(&f, &gs)?.optimum;
    println!("{} OPT = {opt:.9}", problem.id);
    for algo in [Algorithm::AstarMod, Algorithm::Mcg, Algorithm::Icg, Algorithm::BcIcg] {
        let r = run_algorithm(problem, algo, settings)?.record;
        let pass = r.status == Status::Optimal && (r.value - opt).abs() <= 1e-9;
        report(algo.name(), pass, format!("{} {:.9}", r.status, r.value));
    }
    if problem.n() <= CHECK_MAX_N {
        let rb = ratio_bounds_bruteforce(&f)?;
        println!("gamma = {:.6}, gamma_bar = {:.6}, declared {:.6}", rb.gamma, rb.gamma_bar, problem.gamma_lower);
        report(
            "declared gamma",
            problem.gamma_lower <= rb.gamma + 1e-9,
            format!("{} <= {:.6}", problem.gamma_lower, rb.gamma),
        );
        let checks = [
            ("prop1", check_prop1(&f, rb.gamma, rb.gamma_bar)?),
            ("prop2", check_prop2(&f, rb.gamma, rb.gamma_bar)?),
            ("prop3", check_prop3(&f, &gs, rb.gamma, rb.gamma_bar)?),
        ];
        for (name, v) in checks {
            let detail =
                v.first().map_or_else(|| "no violations".to_string(), |x| format!("{} violations, first {x}", v.len()));
            report(name, v.is_empty(), detail);
        }
    } else {
        println!("skipping proposition checks above n = {CHECK_MAX_N}");
    }
    Ok(ok)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
