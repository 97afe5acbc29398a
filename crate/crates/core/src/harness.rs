//! Suite runs, result records and performance profiles.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::astar::astar_solve;
use crate::bc::{bc_icg_solve, BcStats};
use crate::bip::CutMode;
use crate::cg::{cg_solve, default_lambda, icg_solve, CgTrace};
use crate::error::{Error, Result};
use crate::greedy::greedy;
use crate::instances::{InstanceKind, PerturbSpec, Problem, PERTURB_PER_K};
use crate::oracle::brute_force_opt;
use crate::{Limits, Status};

pub const RECORDS_FORMAT: &str = "# asfm-records v1";
pub const PROFILE_FORMAT: &str = "# asfm-profile v1";

/// Times below this many milliseconds are raised to it in profiles.
pub const PROFILE_TIME_FLOOR_MS: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "GREEDY")]
    Greedy,
    #[serde(rename = "ASTAR-MOD")]
    AstarMod,
    #[serde(rename = "CG")]
    Cg,
    #[serde(rename = "MCG")]
    Mcg,
    #[serde(rename = "ICG")]
    Icg,
    #[serde(rename = "BC-ICG")]
    BcIcg,
    #[serde(rename = "BRUTE")]
    Brute,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::Greedy,
        Algorithm::AstarMod,
        Algorithm::Cg,
        Algorithm::Mcg,
        Algorithm::Icg,
        Algorithm::BcIcg,
        Algorithm::Brute,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Greedy => "GREEDY",
            Algorithm::AstarMod => "ASTAR-MOD",
            Algorithm::Cg => "CG",
            Algorithm::Mcg => "MCG",
            Algorithm::Icg => "ICG",
            Algorithm::BcIcg => "BC-ICG",
            Algorithm::Brute => "BRUTE",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_uppercase().replace('_', "-");
        let key = match key.as_str() {
            "ASTAR" | "A*" | "A*-MOD" => "ASTAR-MOD",
            "BC" | "BCICG" => "BC-ICG",
            other => other,
        };
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == key)
            .ok_or_else(|| Error::Parse(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub algorithm: Algorithm,
    pub status: Status,
    pub value: f64,
    pub bound: f64,
    pub nodes: u64,
    pub subsolver_calls: u64,
    pub oracle_calls: u64,
    pub millis: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSettings {
    /// SUB-ICG sample count; `None` means `10k`.
    pub lambda: Option<usize>,
    pub limits: Limits,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings { lambda: None, limits: Limits::none() }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub record: RunRecord,
    pub best: crate::Subset,
    pub cg_trace: Option<CgTrace>,
    pub bc_stats: Option<BcStats>,
}

/// Runs one algorithm on a fresh oracle over `problem`.
///
/// Searches (A*, BC-ICG) report extracted nodes; BRUTE reports enumerated
/// subsets; the other methods report zero nodes. Runs stopped by a limit
/// are charged the full time limit when one is set.
pub fn run_algorithm(problem: &Problem, algorithm: Algorithm, settings: &RunSettings) -> Result<RunOutput> {
    let f = problem.function();
    let gs = problem.ground_set();
    let lambda = settings.lambda.unwrap_or_else(|| default_lambda(gs.k()));
    let limits = &settings.limits;
    let start = std::time::Instant::now();
    let mut cg_trace = None;
    let mut bc_stats = None;
    let (best, status, value, bound, nodes, calls) = match algorithm {
        Algorithm::Greedy => {
            let chain = greedy(&f, &gs);
            (chain.solution(), Status::Heuristic, chain.value(), f64::INFINITY, 0, 0)
        }
        Algorithm::AstarMod => {
            let r = astar_solve(&f, &gs, limits);
            (r.best, r.status, r.value, r.bound, r.nodes, 0)
        }
        Algorithm::Cg | Algorithm::Mcg => {
            let mode = if algorithm == Algorithm::Cg { CutMode::Sfm } else { CutMode::Asfm };
            let r = cg_solve(&f, &gs, mode, limits)?;
            cg_trace = Some(r.trace);
            (r.best, r.status, r.value, r.bound, 0, r.subsolver_calls)
        }
        Algorithm::Icg => {
            let r = icg_solve(&f, &gs, lambda, limits, problem.seed)?;
            cg_trace = Some(r.trace);
            (r.best, r.status, r.value, r.bound, 0, r.subsolver_calls)
        }
        Algorithm::BcIcg => {
            let r = bc_icg_solve(&f, &gs, lambda, limits, problem.seed)?;
            let nodes = r.stats.nodes_processed;
            bc_stats = Some(r.stats);
            (r.best, r.status, r.value, r.bound, nodes, r.subsolver_calls)
        }
        Algorithm::Brute => {
            let r = brute_force_opt(&f, &gs)?;
            let best = r.optimizers[0];
            (best, Status::Optimal, r.optimum, r.optimum, r.subsets_enumerated, 0)
        }
    };
    let mut millis = start.elapsed().as_secs_f64() * 1e3;
    if status == Status::Limit {
        if let Some(t) = limits.time {
            millis = t.as_secs_f64() * 1e3;
        }
    }
    let record = RunRecord {
        instance: problem.id.clone(),
        algorithm,
        status,
        value,
        bound,
        nodes,
        subsolver_calls: calls,
        oracle_calls: f.oracle_calls(),
        millis,
        seed: problem.seed,
    };
    Ok(RunOutput { record, best, cg_trace, bc_stats })
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassConfig {
    #[serde(rename = "type")]
    pub kind: toml::Spanned<String>,
    pub n: usize,
    pub k: usize,
    pub m: Option<usize>,
    pub gamma_lower: Option<f64>,
    pub perturb_count: Option<usize>,
    /// Explicit seeds; defaults to `1..=instances`.
    pub seeds: Option<Vec<u64>>,
    pub instances: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default)]
    pub algorithms: Vec<toml::Spanned<String>>,
    pub time_limit_s: Option<f64>,
    pub node_limit: Option<u64>,
    pub lambda: Option<usize>,
    #[serde(default, rename = "class")]
    pub classes: Vec<toml::Spanned<ClassConfig>>,
}

/// A validated suite.
#[derive(Debug, Clone)]
pub struct Suite {
    pub algorithms: Vec<Algorithm>,
    pub settings: RunSettings,
    pub classes: Vec<ClassSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassSpec {
    pub kind: InstanceKind,
    pub n: usize,
    pub k: usize,
    pub m: Option<usize>,
    pub perturbation: Option<PerturbSpec>,
    pub seeds: Vec<u64>,
}

impl ClassSpec {
    pub fn problems(&self) -> Result<Vec<Problem>> {
        self.seeds
            .par_iter()
            .map(|&seed| Problem::generate(self.kind, self.n, self.m, self.k, seed, self.perturbation))
            .collect()
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl Suite {
    /// Parses and validates a TOML suite description; errors carry the line.
    pub fn parse(text: &str) -> Result<Self> {
        let raw: SuiteConfig = toml::from_str(text).map_err(|e| Error::Config {
            line: e.span().map_or(0, |s| line_of(text, s.start)),
            message: e.message().to_string(),
        })?;
        let at =
            |span: std::ops::Range<usize>, message: String| Error::Config { line: line_of(text, span.start), message };
        let mut algorithms = Vec::new();
        for a in &raw.algorithms {
            algorithms.push(a.get_ref().parse::<Algorithm>().map_err(|e| at(a.span(), e.to_string()))?);
        }
        let mut classes = Vec::new();
        for c in &raw.classes {
            let span = c.span();
            let c = c.get_ref();
            let kind = c.kind.get_ref().parse::<InstanceKind>().map_err(|e| at(c.kind.span(), e.to_string()))?;
            if kind == InstanceKind::Ca {
                return Err(at(c.kind.span(), "CA instances are ingested, not generated".into()));
            }
            crate::function::GroundSet::new(c.n, c.k).map_err(|e| at(span.clone(), e.to_string()))?;
            let gamma = c.gamma_lower.unwrap_or(1.0);
            if !(gamma > 0.0 && gamma <= 1.0) {
                return Err(at(span, format!("gamma_lower {gamma} outside (0, 1]")));
            }
            let count = c.perturb_count.unwrap_or(if gamma < 1.0 { PERTURB_PER_K * c.k } else { 0 });
            let perturbation = (count > 0).then_some(PerturbSpec { count, gamma });
            let seeds = match (&c.seeds, c.instances) {
                (Some(s), None) => s.clone(),
                (None, Some(m)) => (1..=m).collect(),
                (None, None) => (1..=5).collect(),
                (Some(_), Some(_)) => return Err(at(span, "give either seeds or instances, not both".into())),
            };
            classes.push(ClassSpec { kind, n: c.n, k: c.k, m: c.m, perturbation, seeds });
        }
        let limits = Limits { time: raw.time_limit_s.map(std::time::Duration::from_secs_f64), nodes: raw.node_limit };
        Ok(Suite { algorithms, settings: RunSettings { lambda: raw.lambda, limits }, classes })
    }
}

/// Runs every algorithm on every instance of the suite in parallel.
/// Records come back ordered by class, seed and algorithm list position.
pub fn run_suite(suite: &Suite) -> Result<Vec<RunRecord>> {
    if suite.algorithms.is_empty() {
        return Ok(Vec::new());
    }
    let mut problems = Vec::new();
    for (ci, class) in suite.classes.iter().enumerate() {
        for (si, p) in class.problems()?.into_iter().enumerate() {
            problems.push(((ci, si), p));
        }
    }
    let jobs: Vec<_> = problems
        .iter()
        .flat_map(|(key, p)| suite.algorithms.iter().enumerate().map(move |(ai, a)| ((*key, ai), p, *a)))
        .collect();
    let mut done: Vec<_> = jobs
        .par_iter()
        .map(|(key, p, a)| run_algorithm(p, *a, &suite.settings).map(|out| (*key, out.record)))
        .collect::<Result<_>>()?;
    done.sort_by_key(|a| a.0);
    Ok(done.into_iter().map(|(_, r)| r).collect())
}

pub fn write_records<W: Write>(mut w: W, records: &[RunRecord]) -> Result<()> {
    writeln!(w, "{RECORDS_FORMAT}")?;
    let mut out = csv::Writer::from_writer(w);
    if records.is_empty() {
        out.write_record([
            "instance",
            "algorithm",
            "status",
            "value",
            "bound",
            "nodes",
            "subsolver_calls",
            "oracle_calls",
            "millis",
            "seed",
        ])?;
    }
    for r in records {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(r: R) -> Result<Vec<RunRecord>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    let mut out = Vec::new();
    for rec in rdr.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub algorithm: Algorithm,
    pub beta: f64,
    pub rho: usize,
}

/// `β = 1.0, 1.1, …, 10.0`.
pub fn default_betas() -> Vec<f64> {
    (0..=90).map(|i| 1.0 + i as f64 / 10.0).collect()
}

/// `R(A, I) = T(A, I) / min_A' T(A', I)`, or `∞` for every algorithm when
/// none solved `I` to optimality. Unsolved runs keep their recorded time.
pub fn performance_ratios(records: &[RunRecord]) -> Result<BTreeMap<(Algorithm, String), f64>> {
    let algorithms: BTreeSet<Algorithm> = records.iter().map(|r| r.algorithm).collect();
    let instances: BTreeSet<&str> = records.iter().map(|r| r.instance.as_str()).collect();
    let mut cell: BTreeMap<(Algorithm, &str), &RunRecord> = BTreeMap::new();
    for r in records {
        if cell.insert((r.algorithm, r.instance.as_str()), r).is_some() {
            return Err(Error::InvalidArgument(format!("duplicate record for {} on {}", r.algorithm, r.instance)));
        }
    }
    let mut ratios = BTreeMap::new();
    for inst in &instances {
        let mut row = Vec::new();
        for a in &algorithms {
            let r = cell
                .get(&(*a, *inst))
                .ok_or_else(|| Error::InvalidArgument(format!("missing record for {a} on {inst}")))?;
            row.push((*a, r.millis.max(PROFILE_TIME_FLOOR_MS), r.status == Status::Optimal));
        }
        let any_solved = row.iter().any(|x| x.2);
        let best = row.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
        for (a, t, _) in row {
            let ratio = if any_solved { t / best } else { f64::INFINITY };
            ratios.insert((a, inst.to_string()), ratio);
        }
    }
    Ok(ratios)
}

/// `ρ_A(β) = |{I : R(A, I) <= β}|` for each algorithm and `β`.
pub fn performance_profile(records: &[RunRecord], betas: &[f64]) -> Result<Vec<ProfilePoint>> {
    let ratios = performance_ratios(records)?;
    let algorithms: BTreeSet<Algorithm> = records.iter().map(|r| r.algorithm).collect();
    let mut out = Vec::new();
    for a in algorithms {
        let mine: Vec<f64> = ratios.iter().filter(|((x, _), _)| *x == a).map(|(_, r)| *r).collect();
        for &beta in betas {
            out.push(ProfilePoint { algorithm: a, beta, rho: mine.iter().filter(|&&r| r <= beta).count() });
        }
    }
    Ok(out)
}

pub fn write_profile<W: Write>(mut w: W, points: &[ProfilePoint]) -> Result<()> {
    writeln!(w, "{PROFILE_FORMAT}")?;
    let mut out = csv::Writer::from_writer(w);
    if points.is_empty() {
        out.write_record(["algorithm", "beta", "rho"])?;
    }
    for p in points {
        out.serialize(p)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(instance: &str, algorithm: Algorithm, status: Status, millis: f64) -> RunRecord {
        RunRecord {
            instance: instance.into(),
            algorithm,
            status,
            value: 1.0,
            bound: 1.0,
            nodes: 0,
            subsolver_calls: 0,
            oracle_calls: 0,
            millis,
            seed: 0,
        }
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert_eq!("astar".parse::<Algorithm>().unwrap(), Algorithm::AstarMod);
        assert_eq!("bc_icg".parse::<Algorithm>().unwrap(), Algorithm::BcIcg);
        assert!("lp".parse::<Algorithm>().is_err());
    }

    #[test]
    fn single_algorithm_profile_is_flat() {
        let recs: Vec<_> =
            (0..3).map(|i| rec(&format!("I{i}"), Algorithm::Icg, Status::Optimal, 1.0 + i as f64)).collect();
        let prof = performance_profile(&recs, &[1.0, 5.0]).unwrap();
        assert!(prof.iter().all(|p| p.rho == 3));
    }

    #[test]
    fn two_times_slower_jumps_at_two() {
        let mut recs = Vec::new();
        for i in 0..4 {
            recs.push(rec(&format!("I{i}"), Algorithm::Icg, Status::Optimal, 10.0));
            recs.push(rec(&format!("I{i}"), Algorithm::Mcg, Status::Optimal, 20.0));
        }
        let prof = performance_profile(&recs, &[1.0, 1.9, 2.0, 3.0]).unwrap();
        let mcg: Vec<usize> = prof.iter().filter(|p| p.algorithm == Algorithm::Mcg).map(|p| p.rho).collect();
        assert_eq!(mcg, vec![0, 0, 4, 4]);
    }

    #[test]
    fn missing_cell_is_an_error() {
        let recs =
            vec![rec("I0", Algorithm::Icg, Status::Optimal, 1.0), rec("I1", Algorithm::Mcg, Status::Optimal, 1.0)];
        assert!(performance_profile(&recs, &[1.0]).is_err());
    }

    #[test]
    fn records_csv_round_trip() {
        let mut recs = vec![rec("LOC-n8-k3-s1", Algorithm::BcIcg, Status::Limit, 12.5)];
        recs[0].bound = f64::INFINITY;
        let mut buf = Vec::new();
        write_records(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(RECORDS_FORMAT));
        assert_eq!(read_records(buf.as_slice()).unwrap(), recs);
    }

    #[test]
    fn config_errors_report_lines() {
        let err =
            Suite::parse("algorithms = [\"ICG\"]\n\n[[class]]\ntype = \"loc\"\nn = \"ten\"\nk = 3\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 5, .. }), "{err}");
        let err = Suite::parse("algorithms = [\"ICG\",\n \"SIMPLEX\"]\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }), "{err}");
        let err = Suite::parse("[[class]]\ntype = \"loc\"\nn = 4\nk = 9\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 1, .. }), "{err}");
    }

    #[test]
    fn empty_algorithm_list_gives_no_records() {
        let suite = Suite::parse("[[class]]\ntype = \"cov\"\nn = 6\nk = 2\nseeds = [1]\n").unwrap();
        assert!(run_suite(&suite).unwrap().is_empty());
    }

    #[test]
    fn small_suite_agrees_with_brute_force() {
        let text = "algorithms = [\"BRUTE\", \"ASTAR-MOD\", \"MCG\", \"ICG\", \"BC-ICG\"]\n\
                    [[class]]\ntype = \"inf\"\nn = 8\nk = 3\ngamma_lower = 0.8\nperturb_count = 200\nseeds = [1, 2]\n";
        let suite = Suite::parse(text).unwrap();
        let recs = run_suite(&suite).unwrap();
        assert_eq!(recs.len(), 10);
        for chunk in recs.chunks(5) {
            assert_eq!(chunk[0].algorithm, Algorithm::Brute);
            for r in chunk {
                assert_eq!(r.status, Status::Optimal);
                assert!((r.value - chunk[0].value).abs() <= 1e-9, "{r:?}");
            }
        }
    }
}
