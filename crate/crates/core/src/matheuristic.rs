//! Rolling-horizon heuristics: the myopic sequence of single-period
//! problems and the forward-looking training loop over utilization
//! estimates δ.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::decode::{decode_stage, polish, DecodeError};
use crate::genealogy::{record_item_usage, spawn_pool, utilization_fractions, GenealogyError, ObjectPool, ObjectRef, UsageTracker};
use crate::instance::Instance;
use crate::model::{build_flook_subproblem, build_myopic_subproblem, ModelError, SubproblemState, UtilizationTable};
use crate::oracle::{exact_single_period, OracleError, OracleLimits, SingleObjective};
use crate::plan::{PeriodDecision, Plan, PlanTotals};
use crate::solver::{solve, SolverConfig, SolverError, Status};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub delta_ini: f64,
    pub sigma: f64,
    pub eps: f64,
    pub max_cycles: usize,
    pub no_improve_limit: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self { delta_ini: 0.9, sigma: 0.9, eps: 0.01, max_cycles: 100, no_improve_limit: 10 }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<(), MatheuristicError> {
        if !(0.0..=1.0).contains(&self.delta_ini) {
            return Err(MatheuristicError::Config(format!("delta_ini {} outside [0,1]", self.delta_ini)));
        }
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return Err(MatheuristicError::Config(format!("sigma {} outside (0,1)", self.sigma)));
        }
        if !(self.eps > 0.0) {
            return Err(MatheuristicError::Config(format!("eps {} must be positive", self.eps)));
        }
        if self.max_cycles == 0 {
            return Err(MatheuristicError::Config("cycle cap must be positive".into()));
        }
        Ok(())
    }
}

/// How each single-period problem is solved.
#[derive(Debug, Clone)]
pub enum SubproblemSolver {
    Milp(SolverConfig),
    Oracle(OracleLimits),
}

impl Default for SubproblemSolver {
    fn default() -> Self {
        SubproblemSolver::Milp(SolverConfig::default())
    }
}

#[derive(Debug, Error)]
pub enum MatheuristicError {
    #[error("single-period problem at instant {instant} is infeasible")]
    Infeasible { instant: usize },
    #[error("single-period problem at instant {instant} ended without a solution ({status:?})")]
    NoSolution { instant: usize, status: Status },
    #[error("no training cycle completed: {0}")]
    NoCompleteCycle(Box<MatheuristicError>),
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Oracle(OracleError),
    #[error(transparent)]
    Genealogy(#[from] GenealogyError),
}

impl From<OracleError> for MatheuristicError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Infeasible(instant) => MatheuristicError::Infeasible { instant },
            e => MatheuristicError::Oracle(e),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemStat {
    pub instant: usize,
    pub status: Status,
    pub objective: f64,
    pub nodes: u64,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub totals: PlanTotals,
    pub wall_time: Duration,
    pub subproblems: Vec<SubproblemStat>,
}

fn solve_period(
    st: &SubproblemState,
    delta: Option<&UtilizationTable>,
    solver: &SubproblemSolver,
) -> Result<(PeriodDecision, SubproblemStat), MatheuristicError> {
    let start = Instant::now();
    let objective = match delta {
        Some(d) => SingleObjective::ForwardLooking(d),
        None => SingleObjective::Myopic,
    };
    match solver {
        SubproblemSolver::Oracle(limits) => {
            let sol = exact_single_period(st, objective, limits)?;
            let stat = SubproblemStat {
                instant: st.instant,
                status: Status::Optimal,
                objective: sol.objective as f64,
                nodes: 0,
                wall_time: start.elapsed(),
            };
            Ok((sol.decision, stat))
        }
        SubproblemSolver::Milp(cfg) => {
            let ms = match delta {
                Some(d) => build_flook_subproblem(st, d)?,
                None => build_myopic_subproblem(st)?,
            };
            let sol = solve(&ms, cfg)?;
            if sol.status == Status::Infeasible {
                return Err(MatheuristicError::Infeasible { instant: st.instant });
            }
            if !sol.has_values() {
                return Err(MatheuristicError::NoSolution { instant: st.instant, status: sol.status });
            }
            let dec = decode_stage(&ms, &sol.values, &st.pool, &st.items)?;
            let dec = polish(st, &dec, objective)?;
            let stat = SubproblemStat {
                instant: st.instant,
                status: sol.status,
                objective: sol.objective,
                nodes: sol.nodes,
                wall_time: start.elapsed(),
            };
            Ok((dec, stat))
        }
    }
}

/// Solves the single-period problems κ = p, …, P−1 in turn, each with the
/// pool left by the previous one.
fn roll(
    inst: &Instance,
    delta: Option<&UtilizationTable>,
    solver: &SubproblemSolver,
) -> Result<(Plan, RunReport), MatheuristicError> {
    let start = Instant::now();
    let mut pool = ObjectPool::initial(inst);
    let mut decisions = Vec::with_capacity(inst.periods());
    let mut stats = Vec::with_capacity(inst.periods());
    while pool.instant < inst.big_p {
        let st = SubproblemState::new(inst, pool.clone());
        let (dec, stat) = solve_period(&st, delta, solver)?;
        pool = spawn_pool(&pool, &dec, inst.objects_at(pool.instant + 1))?;
        decisions.push(dec);
        stats.push(stat);
    }
    let plan = Plan::assemble(inst, decisions)?;
    let report = RunReport { totals: plan.totals, wall_time: start.elapsed(), subproblems: stats };
    Ok((plan, report))
}

pub fn run_myopic(inst: &Instance, solver: &SubproblemSolver) -> Result<(Plan, RunReport), MatheuristicError> {
    roll(inst, None, solver)
}

/// δ keys: both first-order leftover slots of every purchasable object that
/// can spawn leftovers.
pub fn initial_delta(inst: &Instance, delta_ini: f64) -> UtilizationTable {
    let mut out = UtilizationTable::new();
    if inst.xi == 0 {
        return out;
    }
    for s in inst.p..inst.big_p {
        let base = inst.objects_at(s + 1).len();
        for j in 0..inst.objects_at(s).len() {
            out.insert(ObjectRef::new(s + 1, base + 2 * j), delta_ini);
            out.insert(ObjectRef::new(s + 1, base + 2 * j + 1), delta_ini);
        }
    }
    out
}

/// Realized utilization f of every first-order leftover of the plan with a
/// positive usable area.
pub fn plan_utilization(inst: &Instance, plan: &Plan) -> Result<BTreeMap<ObjectRef, f64>, GenealogyError> {
    let mut tr = UsageTracker::new();
    for pp in &plan.periods {
        tr.register_first_order(&pp.pool, inst);
        let items = inst.items_at(pp.pool.instant);
        for pl in &pp.decision.placements {
            record_item_usage(&mut tr, &pp.pool, &items[pl.item], pl.object)?;
        }
    }
    tr.register_first_order(&plan.final_pool, inst);
    Ok(utilization_fractions(&tr))
}

/// δ' = (1 − σ^η)δ + σ^η f for the keys observed in f.
pub fn update_delta(delta: &UtilizationTable, f: &BTreeMap<ObjectRef, f64>, eta: usize, sigma: f64) -> UtilizationTable {
    let w = sigma.powi(eta as i32);
    let mut out = delta.clone();
    for (k, &fk) in f {
        if let Some(d) = out.get_mut(k) {
            *d = ((1.0 - w) * *d + w * fk).clamp(0.0, 1.0);
        }
    }
    out
}

pub fn max_delta_change(old: &UtilizationTable, new: &UtilizationTable) -> f64 {
    old.iter().map(|(k, &d)| (new.get(k).copied().unwrap_or(d) - d).abs()).fold(0.0, f64::max)
}

pub fn should_stop(old: &UtilizationTable, new: &UtilizationTable, eps: f64, no_improve: usize, limit: usize) -> bool {
    max_delta_change(old, new) <= eps || no_improve >= limit
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleRecord {
    pub cycle: usize,
    /// δ used by the cycle.
    pub delta: UtilizationTable,
    pub f: BTreeMap<ObjectRef, f64>,
    /// `None` when the cycle was aborted.
    pub totals: Option<PlanTotals>,
    pub max_delta_change: f64,
    pub improved: bool,
    /// Best (cost, −value) found up to and including this cycle.
    pub best_key: Option<(i64, i64)>,
    pub aborted: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingTrace {
    pub cycles: Vec<CycleRecord>,
}

impl TrainingTrace {
    /// `cycle,max_delta_change,cost,leftover_value,improved`; aborted cycles
    /// leave cost and value empty.
    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["cycle", "max_delta_change", "cost", "leftover_value", "improved"])?;
        for c in &self.cycles {
            let (cost, value) = c.totals.map_or((String::new(), String::new()), |t| {
                (t.cost.to_string(), t.leftover_value.to_string())
            });
            w.write_record([
                c.cycle.to_string(),
                format!("{:.6}", c.max_delta_change),
                cost,
                value,
                c.improved.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlookResult {
    pub plan: Plan,
    pub report: RunReport,
    pub trace: TrainingTrace,
    /// Cycle that produced the returned plan.
    pub best_cycle: usize,
}

pub fn run_forward_looking(
    inst: &Instance,
    cfg: &TrainingConfig,
    solver: &SubproblemSolver,
) -> Result<FlookResult, MatheuristicError> {
    cfg.validate()?;
    let start = Instant::now();
    let mut delta = initial_delta(inst, cfg.delta_ini);
    let mut best: Option<(Plan, RunReport, usize)> = None;
    let mut trace = TrainingTrace::default();
    let mut no_improve = 0;
    for eta in 0..cfg.max_cycles {
        match roll(inst, Some(&delta), solver) {
            Ok((plan, report)) => {
                let f = plan_utilization(inst, &plan)?;
                let improved = best.as_ref().map_or(true, |(b, _, _)| plan.totals.key() < b.totals.key());
                let totals = plan.totals;
                if improved {
                    best = Some((plan, report, eta));
                    no_improve = 0;
                } else {
                    no_improve += 1;
                }
                let next = update_delta(&delta, &f, eta, cfg.sigma);
                let change = max_delta_change(&delta, &next);
                let stop = should_stop(&delta, &next, cfg.eps, no_improve, cfg.no_improve_limit);
                trace.cycles.push(CycleRecord {
                    cycle: eta,
                    delta: std::mem::replace(&mut delta, next),
                    f,
                    totals: Some(totals),
                    max_delta_change: change,
                    improved,
                    best_key: best.as_ref().map(|(b, _, _)| b.totals.key()),
                    aborted: None,
                });
                if stop {
                    break;
                }
            }
            Err(e @ (MatheuristicError::Infeasible { .. } | MatheuristicError::NoSolution { .. })) => {
                if best.is_none() {
                    return Err(MatheuristicError::NoCompleteCycle(Box::new(e)));
                }
                no_improve += 1;
                trace.cycles.push(CycleRecord {
                    cycle: eta,
                    delta: delta.clone(),
                    f: BTreeMap::new(),
                    totals: None,
                    max_delta_change: 0.0,
                    improved: false,
                    best_key: best.as_ref().map(|(b, _, _)| b.totals.key()),
                    aborted: Some(e.to_string()),
                });
                if no_improve >= cfg.no_improve_limit {
                    break;
                }
            }
            Err(e) => return Err(e),
        }
    }
    let (plan, mut report, best_cycle) = best.expect("at least one cycle completed");
    report.wall_time = start.elapsed();
    Ok(FlookResult { plan, report, trace, best_cycle })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(v: &[(usize, usize, f64)]) -> UtilizationTable {
        v.iter().map(|&(s, j, d)| (ObjectRef::new(s, j), d)).collect()
    }

    #[test]
    fn first_update_replaces_delta() {
        let d = table(&[(1, 1, 0.9), (1, 2, 0.9)]);
        let f = table(&[(1, 1, 0.25)]);
        let n = update_delta(&d, &f, 0, 0.9);
        assert_eq!(n[&ObjectRef::new(1, 1)], 0.25);
        assert_eq!(n[&ObjectRef::new(1, 2)], 0.9);
    }

    #[test]
    fn update_is_a_convex_combination() {
        let d = table(&[(1, 1, 0.9)]);
        let f = table(&[(1, 1, 102.0 / 152.0)]);
        let n = update_delta(&d, &f, 1, 0.9);
        let want = 0.1 * 0.9 + 0.9 * (102.0 / 152.0);
        assert!((n[&ObjectRef::new(1, 1)] - want).abs() < 1e-12);
        assert!((want - 0.693_947).abs() < 1e-6);
    }

    #[test]
    fn stopping_rule() {
        let d = table(&[(1, 1, 0.5)]);
        assert!(should_stop(&d, &d, 0.01, 0, 10));
        let n = table(&[(1, 1, 0.55)]);
        assert!(!should_stop(&d, &n, 0.01, 3, 10));
        assert!(should_stop(&d, &n, 0.01, 10, 10));
    }

    #[test]
    fn config_checks() {
        assert!(TrainingConfig::default().validate().is_ok());
        assert!(TrainingConfig { sigma: 1.0, ..Default::default() }.validate().is_err());
        assert!(TrainingConfig { delta_ini: 1.5, ..Default::default() }.validate().is_err());
        assert!(TrainingConfig { eps: 0.0, ..Default::default() }.validate().is_err());
    }
}
