//! Experiment runner: method comparison, win/tie/loss metrics, reports and
//! the δ_ini × σ parameter sweep.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::instance::Instance;
use crate::matheuristic::{run_forward_looking, run_myopic, SubproblemSolver, TrainingConfig};
use crate::model::build_full_model;
use crate::oracle::{exact_multi_period, OracleLimits};
use crate::decode::decode_full;
use crate::solver::{solve, SolverConfig};

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("gap undefined for a zero reference objective")]
    ZeroReference,
}

/// 100·(F_a − F_b)/F_b rounded to 4 decimals.
pub fn gap_percent(f_a: f64, f_b: f64) -> Result<f64, MetricError> {
    if f_b == 0.0 {
        return Err(MetricError::ZeroReference);
    }
    Ok((100.0 * (f_a - f_b) / f_b * 1e4).round() / 1e4)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Win,
    Tie,
    Loss,
}

/// Result for A against B: lower cost wins, equal costs are decided by the
/// larger final leftover value.
pub fn classify(cost_a: i64, left_a: i64, cost_b: i64, left_b: i64) -> Outcome {
    use std::cmp::Ordering::*;
    match (cost_a.cmp(&cost_b), left_a.cmp(&left_b)) {
        (Less, _) | (Equal, Greater) => Outcome::Win,
        (Equal, Equal) => Outcome::Tie,
        _ => Outcome::Loss,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WinTieLoss {
    pub win: usize,
    pub tie: usize,
    pub loss: usize,
}

impl WinTieLoss {
    pub fn add(&mut self, o: Outcome) {
        match o {
            Outcome::Win => self.win += 1,
            Outcome::Tie => self.tie += 1,
            Outcome::Loss => self.loss += 1,
        }
    }

    pub fn from_outcomes(it: impl IntoIterator<Item = Outcome>) -> Self {
        let mut w = Self::default();
        for o in it {
            w.add(o);
        }
        w
    }
}

impl std::fmt::Display for WinTieLoss {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}/{}", self.win, self.tie, self.loss)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Myopic,
    ForwardLooking,
    /// Full multi-period model through the MILP backend.
    Exact,
    /// Exhaustive search; toy instances only.
    Oracle,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Myopic => "myopic",
            Method::ForwardLooking => "flook",
            Method::Exact => "exact",
            Method::Oracle => "oracle",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "myopic" => Some(Method::Myopic),
            "flook" | "forward-looking" => Some(Method::ForwardLooking),
            "exact" => Some(Method::Exact),
            "oracle" => Some(Method::Oracle),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub methods: Vec<Method>,
    pub training: TrainingConfig,
    pub solver: SubproblemSolver,
    /// Solver settings for [`Method::Exact`].
    pub exact: SolverConfig,
    pub oracle: OracleLimits,
    /// Methods compared in the outcome and gap columns, as (A, B).
    pub compare: Option<(Method, Method)>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            methods: vec![Method::Myopic, Method::ForwardLooking],
            training: TrainingConfig::default(),
            solver: SubproblemSolver::default(),
            exact: SolverConfig::default(),
            oracle: OracleLimits::default(),
            compare: Some((Method::ForwardLooking, Method::Myopic)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodResult {
    pub cost: i64,
    pub leftover_value: i64,
    pub objective: i64,
    pub wall_time: Duration,
    /// Training cycles run (forward-looking only).
    pub cycles: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceRow {
    pub name: String,
    pub periods: usize,
    pub xi: usize,
    pub results: Vec<Result<MethodResult, String>>,
    pub outcome: Option<Outcome>,
    pub gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub methods: Vec<Method>,
    pub rows: Vec<InstanceRow>,
}

/// Runs one method on one instance.
pub fn run_method(inst: &Instance, method: Method, cfg: &ExperimentConfig) -> Result<MethodResult, String> {
    let start = Instant::now();
    let (totals, cycles) = match method {
        Method::Myopic => (run_myopic(inst, &cfg.solver).map_err(|e| e.to_string())?.0.totals, None),
        Method::ForwardLooking => {
            let r = run_forward_looking(inst, &cfg.training, &cfg.solver).map_err(|e| e.to_string())?;
            (r.plan.totals, Some(r.trace.cycles.len()))
        }
        Method::Exact => {
            let ms = build_full_model(inst).map_err(|e| e.to_string())?;
            let sol = solve(&ms, &cfg.exact).map_err(|e| e.to_string())?;
            if !sol.has_values() {
                return Err(format!("no solution ({:?})", sol.status));
            }
            (decode_full(&ms, inst, &sol.values).map_err(|e| e.to_string())?.totals, None)
        }
        Method::Oracle => (exact_multi_period(inst, &cfg.oracle).map_err(|e| e.to_string())?.totals, None),
    };
    Ok(MethodResult {
        cost: totals.cost,
        leftover_value: totals.leftover_value,
        objective: totals.objective,
        wall_time: start.elapsed(),
        cycles,
    })
}

/// Runs every method on every instance, instances in parallel. Failures
/// are recorded per cell and do not stop the run.
pub fn run_experiment(instances: &[(String, Instance)], cfg: &ExperimentConfig) -> Report {
    let rows = instances
        .par_iter()
        .map(|(name, inst)| {
            let results: Vec<Result<MethodResult, String>> =
                cfg.methods.iter().map(|&m| run_method(inst, m, cfg)).collect();
            let (outcome, gap) = compare_row(&cfg.methods, &results, cfg.compare);
            InstanceRow { name: name.clone(), periods: inst.periods(), xi: inst.xi, results, outcome, gap }
        })
        .collect();
    Report { methods: cfg.methods.clone(), rows }
}

fn compare_row(
    methods: &[Method],
    results: &[Result<MethodResult, String>],
    compare: Option<(Method, Method)>,
) -> (Option<Outcome>, Option<f64>) {
    let Some((a, b)) = compare else { return (None, None) };
    let pick = |m: Method| methods.iter().position(|&x| x == m).and_then(|k| results[k].as_ref().ok());
    match (pick(a), pick(b)) {
        (Some(ra), Some(rb)) => (
            Some(classify(ra.cost, ra.leftover_value, rb.cost, rb.leftover_value)),
            gap_percent(ra.objective as f64, rb.objective as f64).ok(),
        ),
        _ => (None, None),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockSummary {
    pub periods: usize,
    pub xi: usize,
    pub instances: usize,
    /// Per method: mean cost and mean wall time over successful runs.
    pub mean_cost: Vec<Option<f64>>,
    pub mean_time: Vec<Option<f64>>,
    pub mean_gap: Option<f64>,
    pub wtl: WinTieLoss,
}

impl Report {
    /// Averages and W/T/L per (periods, ξ) block. Leftover values are not
    /// averaged: they are not comparable across different purchase costs.
    pub fn summary(&self) -> Vec<BlockSummary> {
        let mut blocks: BTreeMap<(usize, usize), Vec<&InstanceRow>> = BTreeMap::new();
        for r in &self.rows {
            blocks.entry((r.periods, r.xi)).or_default().push(r);
        }
        blocks
            .into_iter()
            .map(|((periods, xi), rows)| {
                let mean = |f: &dyn Fn(&MethodResult) -> f64, k: usize| {
                    let v: Vec<f64> = rows.iter().filter_map(|r| r.results[k].as_ref().ok()).map(f).collect();
                    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
                };
                let gaps: Vec<f64> = rows.iter().filter_map(|r| r.gap).collect();
                BlockSummary {
                    periods,
                    xi,
                    instances: rows.len(),
                    mean_cost: (0..self.methods.len()).map(|k| mean(&|r| r.cost as f64, k)).collect(),
                    mean_time: (0..self.methods.len()).map(|k| mean(&|r| r.wall_time.as_secs_f64(), k)).collect(),
                    mean_gap: (!gaps.is_empty()).then(|| gaps.iter().sum::<f64>() / gaps.len() as f64),
                    wtl: WinTieLoss::from_outcomes(rows.iter().filter_map(|r| r.outcome)),
                }
            })
            .collect()
    }

    fn header(&self) -> Vec<String> {
        let mut h = vec!["instance".to_string(), "periods".into(), "xi".into()];
        for m in &self.methods {
            for col in ["cost", "leftover", "objective", "time_s", "error"] {
                h.push(format!("{}_{col}", m.name()));
            }
        }
        h.push("gap_percent".into());
        h.push("outcome".into());
        h
    }

    fn cells(&self, r: &InstanceRow) -> Vec<String> {
        let mut c = vec![r.name.clone(), r.periods.to_string(), r.xi.to_string()];
        for res in &r.results {
            match res {
                Ok(m) => {
                    c.push(m.cost.to_string());
                    c.push(m.leftover_value.to_string());
                    c.push(m.objective.to_string());
                    c.push(format!("{:.4}", m.wall_time.as_secs_f64()));
                    c.push(String::new());
                }
                Err(e) => {
                    c.extend(std::iter::repeat(String::new()).take(4));
                    c.push(e.clone());
                }
            }
        }
        c.push(r.gap.map(|g| format!("{g:.4}")).unwrap_or_default());
        c.push(r.outcome.map(|o| format!("{o:?}")).unwrap_or_default());
        c
    }

    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.header())?;
        for r in &self.rows {
            w.write_record(self.cells(r))?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Reads a report written by [`Report::to_csv`]. Wall times come back at
    /// the written precision.
    pub fn from_csv(text: &str) -> Result<Report, String> {
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let header: Vec<String> = rd.headers().map_err(|e| e.to_string())?.iter().map(String::from).collect();
        let mut methods = Vec::new();
        for h in header.iter().skip(3) {
            if let Some(m) = h.strip_suffix("_cost").and_then(Method::parse) {
                methods.push(m);
            }
        }
        let num = |s: &str| s.parse::<i64>().map_err(|e| format!("{s:?}: {e}"));
        let mut rows = Vec::new();
        for rec in rd.records() {
            let rec = rec.map_err(|e| e.to_string())?;
            let f: Vec<&str> = rec.iter().collect();
            let mut results = Vec::new();
            for k in 0..methods.len() {
                let c = &f[3 + 5 * k..8 + 5 * k];
                if c[0].is_empty() {
                    results.push(Err(c[4].to_string()));
                } else {
                    let secs: f64 = c[3].parse().map_err(|e| format!("{:?}: {e}", c[3]))?;
                    results.push(Ok(MethodResult {
                        cost: num(c[0])?,
                        leftover_value: num(c[1])?,
                        objective: num(c[2])?,
                        wall_time: Duration::from_secs_f64(secs),
                        cycles: None,
                    }));
                }
            }
            let tail = 3 + 5 * methods.len();
            let gap = if f[tail].is_empty() { None } else { Some(f[tail].parse().map_err(|e| format!("{e}"))?) };
            let outcome = match f[tail + 1] {
                "Win" => Some(Outcome::Win),
                "Tie" => Some(Outcome::Tie),
                "Loss" => Some(Outcome::Loss),
                _ => None,
            };
            rows.push(InstanceRow {
                name: f[0].to_string(),
                periods: num(f[1])? as usize,
                xi: num(f[2])? as usize,
                results,
                outcome,
                gap,
            });
        }
        Ok(Report { methods, rows })
    }

    /// Aligned text table followed by the per-block summary.
    pub fn to_text(&self) -> String {
        let mut table: Vec<Vec<String>> = Vec::new();
        let mut head = vec!["instance".to_string(), "P".into(), "xi".into()];
        for m in &self.methods {
            head.push(format!("{} cost", m.name()));
            head.push(format!("{} left", m.name()));
            head.push(format!("{} time", m.name()));
        }
        head.push("gap %".into());
        head.push("A vs B".into());
        table.push(head);
        for r in &self.rows {
            let mut row = vec![r.name.clone(), r.periods.to_string(), r.xi.to_string()];
            for res in &r.results {
                match res {
                    Ok(m) => {
                        row.push(m.cost.to_string());
                        row.push(m.leftover_value.to_string());
                        row.push(format!("{:.2}", m.wall_time.as_secs_f64()));
                    }
                    Err(_) => row.extend(["error".to_string(), "-".into(), "-".into()]),
                }
            }
            row.push(r.gap.map(|g| format!("{g:.4}")).unwrap_or_else(|| "-".into()));
            row.push(r.outcome.map(|o| format!("{o:?}")).unwrap_or_else(|| "-".into()));
            table.push(row);
        }
        let widths: Vec<usize> =
            (0..table[0].len()).map(|k| table.iter().map(|r| r[k].len()).max().unwrap_or(0)).collect();
        let mut out = String::new();
        for row in &table {
            let line: Vec<String> = row.iter().zip(&widths).map(|(c, &w)| format!("{c:>w$}")).collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
        }
        for b in self.summary() {
            let _ = write!(out, "\nP={} xi={} n={}:", b.periods, b.xi, b.instances);
            for (k, m) in self.methods.iter().enumerate() {
                if let (Some(c), Some(t)) = (b.mean_cost[k], b.mean_time[k]) {
                    let _ = write!(out, " {} mean cost {c:.1} time {t:.2}s;", m.name());
                }
            }
            if let Some(g) = b.mean_gap {
                let _ = write!(out, " mean gap {g:.4}%;");
            }
            let _ = write!(out, " W/T/L {}", b.wtl);
        }
        if !self.rows.is_empty() {
            out.push('\n');
        }
        out
    }
}

/// Values 0.5, 0.55, …, 1.0.
pub fn sweep_grid() -> Vec<f64> {
    (0..=10).map(|k| 0.5 + 0.05 * k as f64).collect()
}

/// σ must stay below 1; the grid's σ = 1 is run as this value.
pub const SIGMA_CLAMP: f64 = 0.999;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub delta_ini: f64,
    /// Requested σ (the run uses it clamped below 1).
    pub sigma: f64,
    pub mean_gap: Option<f64>,
    pub mean_cycles: f64,
    pub mean_time_s: f64,
    pub failures: usize,
}

/// Forward-looking runs over the δ_ini × σ grid. Gaps are taken against the
/// myopic objective of each instance.
pub fn sweep(instances: &[(String, Instance)], base: &ExperimentConfig, grid: &[f64]) -> Vec<SweepPoint> {
    let myopic: Vec<Option<i64>> = instances
        .par_iter()
        .map(|(_, inst)| run_method(inst, Method::Myopic, base).ok().map(|r| r.objective))
        .collect();
    let points: Vec<(f64, f64)> = grid.iter().flat_map(|&d| grid.iter().map(move |&s| (d, s))).collect();
    points
        .par_iter()
        .map(|&(delta_ini, sigma)| {
            let mut cfg = base.clone();
            cfg.training.delta_ini = delta_ini;
            cfg.training.sigma = sigma.min(SIGMA_CLAMP);
            let mut gaps = Vec::new();
            let (mut cycles, mut time, mut ok, mut failures) = (0.0, 0.0, 0usize, 0usize);
            for ((_, inst), my) in instances.iter().zip(&myopic) {
                match run_method(inst, Method::ForwardLooking, &cfg) {
                    Ok(r) => {
                        ok += 1;
                        cycles += r.cycles.unwrap_or(0) as f64;
                        time += r.wall_time.as_secs_f64();
                        if let Some(g) = my.and_then(|m| gap_percent(r.objective as f64, m as f64).ok()) {
                            gaps.push(g);
                        }
                    }
                    Err(_) => failures += 1,
                }
            }
            let n = ok.max(1) as f64;
            SweepPoint {
                delta_ini,
                sigma,
                mean_gap: (!gaps.is_empty()).then(|| gaps.iter().sum::<f64>() / gaps.len() as f64),
                mean_cycles: cycles / n,
                mean_time_s: time / n,
                failures,
            }
        })
        .collect()
}

pub fn sweep_csv(points: &[SweepPoint]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["delta_ini", "sigma", "mean_gap_percent", "mean_cycles", "mean_time_s", "failures"])?;
    for p in points {
        w.write_record([
            format!("{:.2}", p.delta_ini),
            format!("{:.2}", p.sigma),
            p.mean_gap.map(|g| format!("{g:.4}")).unwrap_or_default(),
            format!("{:.2}", p.mean_cycles),
            format!("{:.4}", p.mean_time_s),
            p.failures.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_examples() {
        assert_eq!(gap_percent(182_258_424.0, 444_536_794.0), Ok(-59.0004));
        assert_eq!(gap_percent(400_703_843.0, 314_108_050.0), Ok(27.5688));
        assert_eq!(gap_percent(7.0, 7.0), Ok(0.0));
        assert_eq!(gap_percent(1.0, 0.0), Err(MetricError::ZeroReference));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(6715, 0, 6715, 0), Outcome::Tie);
        assert_eq!(classify(11679, 2647, 9155, 0), Outcome::Loss);
        assert_eq!(classify(5, 10, 5, 9), Outcome::Win);
    }

    #[test]
    fn grid_has_eleven_points() {
        let g = sweep_grid();
        assert_eq!(g.len(), 11);
        assert!((g[10] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_experiment() {
        let r = run_experiment(&[], &ExperimentConfig::default());
        assert!(r.rows.is_empty());
        assert!(r.summary().is_empty());
        assert_eq!(r.to_text().lines().count(), 1);
    }
}
