//! MILP solving: a built-in branch-and-bound over LP relaxations, LP-file
//! export, solution import and a bridge to external solvers.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::rc::Rc;
use std::fmt::Write as _;
use std::process::Command;
use std::time::{Duration, Instant};

use microlp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem, SolveOutcome};
use thiserror::Error;

use crate::model::{ModelSpec, Sense, VarKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Backend {
    Builtin,
    /// Shell command with `{lp}` and `{sol}` placeholders.
    External(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub backend: Backend,
    pub abs_gap: f64,
    pub rel_gap: f64,
    pub time_limit: Option<Duration>,
    pub node_limit: Option<u64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { backend: Backend::Builtin, abs_gap: 1.0 - 1e-6, rel_gap: 0.0, time_limit: None, node_limit: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Feasible,
    Infeasible,
    Unbounded,
    Limit,
}

impl Status {
    pub fn has_solution(self) -> bool {
        matches!(self, Status::Optimal | Status::Feasible)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpSolution {
    pub status: Status,
    /// Empty when no assignment is known.
    pub values: Vec<f64>,
    pub objective: f64,
    pub bound: f64,
    pub wall_time: Duration,
    pub nodes: u64,
}

impl MilpSolution {
    fn without_values(status: Status, bound: f64, start: Instant, nodes: u64) -> Self {
        Self { status, values: Vec::new(), objective: f64::NAN, bound, wall_time: start.elapsed(), nodes }
    }

    /// Assignment with `Limit` status downgraded when one was found.
    pub fn has_values(&self) -> bool {
        !self.values.is_empty()
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("LP engine failure: {0}")]
    Lp(String),
    #[error("external solver: {0}")]
    Bridge(String),
    #[error("solution line {line}: unknown variable `{name}`")]
    UnknownVariable { line: usize, name: String },
    #[error("solution line {line}: binary `{name}` has value {value}")]
    NotBinary { line: usize, name: String, value: f64 },
    #[error("solution line {line}: {message}")]
    Malformed { line: usize, message: String },
}

/// Relative gap |best − bound| / (1e−10 + |best|).
pub fn relative_gap(best: f64, bound: f64) -> f64 {
    (best - bound).abs() / (1e-10 + best.abs())
}

pub fn solve(ms: &ModelSpec, cfg: &SolverConfig) -> Result<MilpSolution, SolverError> {
    match &cfg.backend {
        Backend::Builtin => branch_and_bound(ms, cfg),
        Backend::External(cmd) => solve_external(ms, cmd, cfg),
    }
}

const INT_TOL: f64 = 1e-6;

/// Branching decision on the path from the root to a node.
struct Fix {
    var: usize,
    lower: f64,
    upper: f64,
    parent: Option<Rc<Fix>>,
}

struct Node {
    bound: f64,
    id: u64,
    path: Option<Rc<Fix>>,
    /// Warm LP state; dropped for queued nodes beyond [`WARM_NODES`].
    sol: Option<microlp::Solution>,
}

/// Queued nodes that keep their LP state. The rest are re-solved from the
/// root bounds when popped, which bounds memory on long searches.
const WARM_NODES: usize = 4096;

impl PartialEq for Node {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Node {
    // max-heap: the smallest bound, then the oldest node, comes first
    fn cmp(&self, o: &Self) -> Ordering {
        o.bound.total_cmp(&self.bound).then_with(|| o.id.cmp(&self.id))
    }
}

struct Lp {
    problem: Problem,
    vars: Vec<microlp::Variable>,
}

fn to_lp(ms: &ModelSpec, path: Option<&Rc<Fix>>) -> Result<Option<Lp>, SolverError> {
    let mut bounds: Vec<(f64, f64)> = ms.variables.iter().map(|v| (v.lower, v.upper)).collect();
    let mut at = path;
    while let Some(f) = at {
        let b = &mut bounds[f.var];
        b.0 = b.0.max(f.lower);
        b.1 = b.1.min(f.upper);
        at = f.parent.as_ref();
    }
    let mut obj = vec![0.0; ms.variables.len()];
    for &(j, c) in &ms.objective {
        obj[j] += c;
    }
    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let mut vars = Vec::with_capacity(ms.variables.len());
    for (&(lo, hi), &c) in bounds.iter().zip(&obj) {
        if lo > hi + 1e-9 {
            return Ok(None);
        }
        vars.push(problem.add_var(c, (lo, hi.max(lo))));
    }
    for con in &ms.constraints {
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(con.terms.len());
        for &(j, a) in &con.terms {
            match merged.iter_mut().find(|(k, _)| *k == j) {
                Some(e) => e.1 += a,
                None => merged.push((j, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        if merged.is_empty() {
            let ok = match con.sense {
                Sense::Le => 0.0 <= con.rhs + 1e-9,
                Sense::Ge => 0.0 >= con.rhs - 1e-9,
                Sense::Eq => con.rhs.abs() <= 1e-9,
            };
            if !ok {
                return Ok(None);
            }
            continue;
        }
        let mut expr = LinearExpr::empty();
        for (j, a) in merged {
            expr.add(vars[j], a);
        }
        let op = match con.sense {
            Sense::Le => ComparisonOp::Le,
            Sense::Ge => ComparisonOp::Ge,
            Sense::Eq => ComparisonOp::Eq,
        };
        problem.add_constraint(expr, op, con.rhs);
    }
    Ok(Some(Lp { problem, vars }))
}

enum LpResult {
    Solved(microlp::Solution),
    Infeasible,
    Unbounded,
}

fn lp_outcome(r: Result<SolveOutcome, microlp::Error>) -> Result<LpResult, SolverError> {
    match r {
        Ok(SolveOutcome::Solution(s)) => Ok(LpResult::Solved(s)),
        Ok(SolveOutcome::Interrupted(_)) => Err(SolverError::Lp("LP solve interrupted".into())),
        Err(microlp::Error::Infeasible) => Ok(LpResult::Infeasible),
        Err(microlp::Error::Unbounded) => Ok(LpResult::Unbounded),
        Err(e) => Err(SolverError::Lp(e.to_string())),
    }
}

/// Best-first branch-and-bound. After each branching the better child is
/// explored immediately (plunging) so that incumbents appear early; the
/// other child waits in the bound-ordered queue.
fn branch_and_bound(ms: &ModelSpec, cfg: &SolverConfig) -> Result<MilpSolution, SolverError> {
    let start = Instant::now();
    let Some(lp) = to_lp(ms, None)? else {
        return Ok(MilpSolution::without_values(Status::Infeasible, f64::INFINITY, start, 0));
    };
    let integral_obj = ms.meta.integral_objective;
    let konst = ms.objective_constant;
    let int_vars: Vec<usize> = (0..ms.variables.len()).filter(|&j| ms.variables[j].kind.is_integral()).collect();

    let root = match lp_outcome(lp.problem.solve())? {
        LpResult::Solved(s) => s,
        LpResult::Infeasible => return Ok(MilpSolution::without_values(Status::Infeasible, f64::INFINITY, start, 0)),
        LpResult::Unbounded => {
            return Ok(MilpSolution::without_values(Status::Unbounded, f64::NEG_INFINITY, start, 0))
        }
    };

    let effective = |b: f64| -> f64 {
        if integral_obj {
            (b - 1e-6 - 1e-9 * b.abs()).ceil()
        } else {
            b
        }
    };
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let prunable = |bound: f64, inc: &Option<(f64, Vec<f64>)>| -> bool {
        match inc {
            None => false,
            Some((best, _)) => {
                let eb = effective(bound);
                best - eb <= cfg.abs_gap || relative_gap(*best, eb) <= cfg.rel_gap
            }
        }
    };

    let mut heap: BinaryHeap<Node> = BinaryHeap::new();
    let mut next_id: u64 = 1;
    let mut nodes: u64 = 0;
    let mut current = Some(Node { bound: root.objective() + konst, id: 0, path: None, sol: Some(root) });
    let mut limited = false;
    // lowest bound among nodes discarded by the gap test
    let mut pruned_bound = f64::INFINITY;

    loop {
        let node = match current.take() {
            Some(n) => n,
            None => match heap.pop() {
                Some(n) => n,
                None => break,
            },
        };
        if prunable(node.bound, &incumbent) {
            pruned_bound = pruned_bound.min(node.bound);
            continue;
        }
        let over_time = cfg.time_limit.is_some_and(|t| start.elapsed() >= t);
        let over_nodes = cfg.node_limit.is_some_and(|n| nodes >= n);
        if over_time || over_nodes {
            heap.push(node);
            limited = true;
            break;
        }
        nodes += 1;

        let sol = match node.sol {
            Some(sol) => sol,
            None => {
                let Some(cold) = to_lp(ms, node.path.as_ref())? else { continue };
                match lp_outcome(cold.problem.solve())? {
                    LpResult::Solved(s) => s,
                    _ => continue,
                }
            }
        };
        let values: Vec<f64> = lp.vars.iter().map(|&v| sol.var_value_raw(v)).collect();
        let mut branch: Option<(usize, f64)> = None;
        let mut best_pri = usize::MAX;
        for &j in &int_vars {
            let x = values[j];
            let frac = (x - x.floor()).min(x.ceil() - x);
            let pri = priority(ms.variables[j].family);
            if frac > INT_TOL && (pri < best_pri || (pri == best_pri && branch.map_or(true, |(_, f)| frac > f + 1e-12))) {
                branch = Some((j, frac));
                best_pri = pri;
            }
        }
        let Some((j, _)) = branch else {
            let mut obj = sol.objective() + konst;
            if integral_obj {
                obj = obj.round();
            }
            if incumbent.as_ref().map_or(true, |(b, _)| obj < *b - 1e-9) {
                let vals = values
                    .iter()
                    .zip(&ms.variables)
                    .map(|(&x, v)| if v.kind.is_integral() { x.round() } else { x })
                    .collect();
                incumbent = Some((obj, vals));
            }
            continue;
        };

        let x = values[j];
        let (lo, hi) = (x.floor(), x.ceil());
        let var = lp.vars[j];
        let binary = ms.variables[j].kind == VarKind::Binary;
        let (var_lo, var_hi) = (ms.variables[j].lower, ms.variables[j].upper);
        let down = if binary {
            lp_outcome(sol.clone().fix_var(var, lo))?
        } else {
            lp_outcome(sol.clone().add_constraint(LinearExpr::from(vec![(var, 1.0)]), ComparisonOp::Le, lo))?
        };
        let up = if binary {
            lp_outcome(sol.fix_var(var, hi))?
        } else {
            lp_outcome(sol.add_constraint(LinearExpr::from(vec![(var, 1.0)]), ComparisonOp::Ge, hi))?
        };
        let down_fix = Fix { var: j, lower: var_lo, upper: lo, parent: node.path.clone() };
        let up_fix = Fix { var: j, lower: hi, upper: var_hi, parent: node.path.clone() };
        let mut kids = Vec::with_capacity(2);
        // nearer rounding direction first, so it wins ties
        let order = if x - lo <= hi - x { [(down, down_fix), (up, up_fix)] } else { [(up, up_fix), (down, down_fix)] };
        for (r, fix) in order {
            if let LpResult::Solved(s) = r {
                let bound = (s.objective() + konst).max(node.bound);
                if prunable(bound, &incumbent) {
                    pruned_bound = pruned_bound.min(bound);
                } else {
                    kids.push(Node { bound, id: next_id, path: Some(Rc::new(fix)), sol: Some(s) });
                    next_id += 1;
                }
            }
        }
        if kids.len() == 2 && kids[1].bound < kids[0].bound - 1e-9 {
            kids.swap(0, 1);
        }
        let mut it = kids.into_iter();
        current = it.next();
        for mut k in it {
            if heap.len() >= WARM_NODES {
                k.sol = None;
            }
            heap.push(k);
        }
    }

    let open_bound = heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    let wall_time = start.elapsed();
    Ok(match incumbent {
        Some((obj, values)) => {
            let bound = open_bound.min(pruned_bound).min(obj);
            let status = if limited && !prunable(open_bound, &Some((obj, Vec::new()))) {
                Status::Limit
            } else {
                Status::Optimal
            };
            MilpSolution { status, values, objective: obj, bound, wall_time, nodes }
        }
        None if limited => MilpSolution::without_values(Status::Limit, open_bound, start, nodes),
        None => MilpSolution::without_values(Status::Infeasible, f64::INFINITY, start, nodes),
    })
}

fn priority(family: &str) -> usize {
    match family {
        "u" => 0,
        "v" => 1,
        "pi" => 2,
        "tau" => 2,
        "eta" => 3,
        "lambda" => 3,
        "zeta" => 4,
        "theta" => 5,
        _ => 6,
    }
}

fn fmt_num(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

fn write_terms(out: &mut String, ms: &ModelSpec, terms: &[(usize, f64)]) {
    if terms.is_empty() {
        out.push_str(" 0 ");
        out.push_str(&ms.variables[0].name());
        return;
    }
    for (k, &(j, c)) in terms.iter().enumerate() {
        if k > 0 && k % 8 == 0 {
            out.push_str("\n   ");
        }
        let sign = if c < 0.0 { '-' } else { '+' };
        let _ = write!(out, " {sign} {} {}", fmt_num(c.abs()), ms.variables[j].name());
    }
}

/// Writes the model in CPLEX LP format.
pub fn export_lp(ms: &ModelSpec) -> String {
    let mut out = String::new();
    out.push_str("\\ leftover model\nMinimize\n obj:");
    let obj: Vec<(usize, f64)> = ms.objective.iter().copied().filter(|&(_, c)| c != 0.0).collect();
    if obj.is_empty() && !ms.variables.is_empty() {
        let _ = write!(out, " 0 {}", ms.variables[0].name());
    } else {
        write_terms(&mut out, ms, &obj);
    }
    if ms.objective_constant != 0.0 {
        let sign = if ms.objective_constant < 0.0 { '-' } else { '+' };
        let _ = write!(out, " {sign} {}", fmt_num(ms.objective_constant.abs()));
    }
    out.push_str("\nSubject To\n");
    for (k, c) in ms.constraints.iter().enumerate() {
        let _ = write!(out, " {}_{}:", c.family, k + 1);
        if c.terms.is_empty() && !ms.variables.is_empty() {
            let _ = write!(out, " 0 {}", ms.variables[0].name());
        } else {
            write_terms(&mut out, ms, &c.terms);
        }
        let op = match c.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", fmt_num(c.rhs));
    }
    out.push_str("Bounds\n");
    for v in &ms.variables {
        let name = v.name();
        if v.lower == v.upper {
            let _ = writeln!(out, " {name} = {}", fmt_num(v.lower));
        } else {
            let lo = if v.lower.is_finite() { fmt_num(v.lower) } else { "-inf".into() };
            let hi = if v.upper.is_finite() { fmt_num(v.upper) } else { "+inf".into() };
            let _ = writeln!(out, " {lo} <= {name} <= {hi}");
        }
    }
    for (title, kind) in [("Binaries", VarKind::Binary), ("Generals", VarKind::Integer)] {
        let names: Vec<String> = ms.variables.iter().filter(|v| v.kind == kind).map(|v| v.name()).collect();
        if names.is_empty() {
            continue;
        }
        let _ = writeln!(out, "{title}");
        for chunk in names.chunks(8) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    out
}

/// Reads `<name> <value>` lines and a `# objective <value>` header. An
/// optional `# status <word>` header reports infeasible or unbounded runs.
pub fn import_solution(text: &str, ms: &ModelSpec) -> Result<MilpSolution, SolverError> {
    let mut values = vec![0.0; ms.variables.len()];
    let mut objective = None;
    let mut status = Status::Optimal;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if let Some(comment) = raw.trim_start().strip_prefix('#') {
            let rest: Vec<&str> = comment.split_whitespace().collect();
            match rest.as_slice() {
                ["objective", v] => {
                    objective = Some(v.parse::<f64>().map_err(|_| SolverError::Malformed {
                        line,
                        message: format!("bad objective `{v}`"),
                    })?)
                }
                ["status", s] => {
                    status = match *s {
                        "optimal" => Status::Optimal,
                        "feasible" => Status::Feasible,
                        "infeasible" => Status::Infeasible,
                        "unbounded" => Status::Unbounded,
                        "limit" => Status::Limit,
                        other => {
                            return Err(SolverError::Malformed { line, message: format!("unknown status `{other}`") })
                        }
                    }
                }
                _ => {}
            }
            continue;
        }
        if toks.len() != 2 {
            return Err(SolverError::Malformed { line, message: "expected `<name> <value>`".into() });
        }
        let j = ms
            .var_index(toks[0])
            .ok_or_else(|| SolverError::UnknownVariable { line, name: toks[0].to_string() })?;
        let x: f64 = toks[1]
            .parse()
            .map_err(|_| SolverError::Malformed { line, message: format!("bad value `{}`", toks[1]) })?;
        let v = &ms.variables[j];
        values[j] = if v.kind.is_integral() {
            let r = x.round();
            if v.kind == VarKind::Binary && ((r - x).abs() > 1e-4 || !(r == 0.0 || r == 1.0)) {
                return Err(SolverError::NotBinary { line, name: toks[0].to_string(), value: x });
            }
            if (r - x).abs() <= 1e-6 {
                r
            } else {
                x
            }
        } else {
            x
        };
    }
    if !status.has_solution() {
        return Ok(MilpSolution {
            status,
            values: Vec::new(),
            objective: f64::NAN,
            bound: f64::NAN,
            wall_time: Duration::ZERO,
            nodes: 0,
        });
    }
    let objective = match objective {
        Some(o) => o,
        None => return Err(SolverError::Malformed { line: 0, message: "missing `# objective` header".into() }),
    };
    Ok(MilpSolution { status, values, objective, bound: objective, wall_time: Duration::ZERO, nodes: 0 })
}

fn solve_external(ms: &ModelSpec, template: &str, cfg: &SolverConfig) -> Result<MilpSolution, SolverError> {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| SolverError::Bridge(e.to_string()))?;
    let lp_path = dir.path().join("model.lp");
    let sol_path = dir.path().join("model.sol");
    std::fs::write(&lp_path, export_lp(ms)).map_err(|e| SolverError::Bridge(e.to_string()))?;
    let cmd = template
        .replace("{lp}", &lp_path.to_string_lossy())
        .replace("{sol}", &sol_path.to_string_lossy());
    let out = Command::new("sh")
        .arg("-c")
        .arg(&cmd)
        .output()
        .map_err(|e| SolverError::Bridge(format!("cannot run `{cmd}`: {e}")))?;
    if !out.status.success() {
        return Err(SolverError::Bridge(format!(
            "`{cmd}` exited with {}: {}",
            out.status,
            String::from_utf8_lossy(&out.stderr).trim()
        )));
    }
    let text = std::fs::read_to_string(&sol_path)
        .map_err(|e| SolverError::Bridge(format!("no solution file from `{cmd}`: {e}")))?;
    let mut sol = import_solution(&text, ms)?;
    sol.wall_time = start.elapsed();
    if sol.status.has_solution() {
        let recomputed = ms.evaluate(&sol.values);
        if (recomputed - sol.objective).abs() > cfg.abs_gap.max(1e-6) * (1.0 + 1e-9 * recomputed.abs()) {
            return Err(SolverError::Bridge(format!(
                "reported objective {} but the assignment evaluates to {recomputed}",
                sol.objective
            )));
        }
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Constraint, ModelKind, ModelMeta, Variable};

    fn meta() -> ModelMeta {
        ModelMeta {
            kind: ModelKind::Full,
            first_instant: 0,
            final_instant: 1,
            big_w: 1,
            big_h: 1,
            bits: 1,
            scale: 1,
            integral_objective: true,
            bound_rows: 0,
        }
    }

    fn var(family: &'static str, idx: usize, kind: VarKind, lo: f64, hi: f64) -> Variable {
        Variable { family, indices: vec![idx], kind, lower: lo, upper: hi }
    }

    #[test]
    fn forced_binary() {
        let ms = ModelSpec::from_parts(
            vec![var("u", 1, VarKind::Binary, 0.0, 1.0)],
            vec![Constraint { family: "c", terms: vec![(0, 1.0)], sense: Sense::Ge, rhs: 1.0 }],
            vec![(0, 1.0)],
            0.0,
            meta(),
        );
        let s = solve(&ms, &SolverConfig::default()).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert_eq!(s.objective, 1.0);
        let lp = export_lp(&ms);
        for section in ["Minimize", "Subject To", "Binaries", "End"] {
            assert!(lp.contains(section), "{lp}");
        }
    }

    #[test]
    fn small_knapsack() {
        // max 5a + 4b + 3c  s.t. 2a + 3b + c <= 5, 4a + b + 2c <= 11, 3a + 4b + 2c <= 8
        let vars = vec![
            var("a", 1, VarKind::Integer, 0.0, 10.0),
            var("b", 1, VarKind::Integer, 0.0, 10.0),
            var("c", 1, VarKind::Integer, 0.0, 10.0),
        ];
        let rows = vec![
            Constraint { family: "r", terms: vec![(0, 2.0), (1, 3.0), (2, 1.0)], sense: Sense::Le, rhs: 5.0 },
            Constraint { family: "r", terms: vec![(0, 4.0), (1, 1.0), (2, 2.0)], sense: Sense::Le, rhs: 11.0 },
            Constraint { family: "r", terms: vec![(0, 3.0), (1, 4.0), (2, 2.0)], sense: Sense::Le, rhs: 8.0 },
        ];
        let ms = ModelSpec::from_parts(vars, rows, vec![(0, -5.0), (1, -4.0), (2, -3.0)], 0.0, meta());
        let s = solve(&ms, &SolverConfig::default()).unwrap();
        // brute force
        let mut best = 0.0f64;
        for a in 0..=10 {
            for b in 0..=10 {
                for c in 0..=10 {
                    let (a, b, c) = (a as f64, b as f64, c as f64);
                    if 2.0 * a + 3.0 * b + c <= 5.0 && 4.0 * a + b + 2.0 * c <= 11.0 && 3.0 * a + 4.0 * b + 2.0 * c <= 8.0 {
                        best = best.min(-(5.0 * a + 4.0 * b + 3.0 * c));
                    }
                }
            }
        }
        assert_eq!(s.status, Status::Optimal);
        assert_eq!(s.objective, best);
        assert!((ms.evaluate(&s.values) - s.objective).abs() < 1e-6);
    }

    #[test]
    fn infeasible_model() {
        let ms = ModelSpec::from_parts(
            vec![var("u", 1, VarKind::Binary, 0.0, 1.0)],
            vec![Constraint { family: "c", terms: vec![(0, 1.0)], sense: Sense::Ge, rhs: 2.0 }],
            vec![(0, 1.0)],
            0.0,
            meta(),
        );
        assert_eq!(solve(&ms, &SolverConfig::default()).unwrap().status, Status::Infeasible);
    }

    #[test]
    fn import_rules() {
        let ms = ModelSpec::from_parts(
            vec![var("u", 1, VarKind::Binary, 0.0, 1.0), var("x", 1, VarKind::Continuous, 0.0, 4.0)],
            vec![],
            vec![(0, 1.0), (1, 1.0)],
            0.0,
            meta(),
        );
        let s = import_solution("# objective 0\n", &ms).unwrap();
        assert_eq!(s.values, vec![0.0, 0.0]);
        let s = import_solution("# objective 3.5\nu_1 0.9999999\nx_1 2.5\n", &ms).unwrap();
        assert_eq!(s.values, vec![1.0, 2.5]);
        let e = import_solution("# objective 1\nv_0_1_9 1\n", &ms).unwrap_err();
        assert!(e.to_string().contains("v_0_1_9"));
        assert!(import_solution("# objective 1\nu_1 0.5\n", &ms).is_err());
    }
}
