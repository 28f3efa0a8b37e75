//! Solver-agnostic MILP models: the full multi-period model and the
//! myopic and forward-looking single-period subproblems.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::genealogy::{leftover_generator_indices, slot_layout, ObjectPool, ObjectRef};
use crate::instance::{CatalogueItem, Instance, OrderedItem};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Integer,
    Continuous,
}

impl VarKind {
    pub fn is_integral(self) -> bool {
        !matches!(self, VarKind::Continuous)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub family: &'static str,
    /// 1-based object/item/bit indices; instants as they are.
    pub indices: Vec<usize>,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

impl Variable {
    /// Name usable in LP files, e.g. `v_0_1_2`.
    pub fn name(&self) -> String {
        let mut s = self.family.to_string();
        for i in &self.indices {
            s.push('_');
            s.push_str(&i.to_string());
        }
        s
    }

    /// Symbolic name, e.g. `v[0,1,2]`.
    pub fn symbol(&self) -> String {
        let idx: Vec<String> = self.indices.iter().map(ToString::to_string).collect();
        format!("{}[{}]", self.family, idx.join(","))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub family: &'static str,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Full,
    Myopic { instant: usize },
    ForwardLooking { instant: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelMeta {
    pub kind: ModelKind,
    pub first_instant: usize,
    pub final_instant: usize,
    pub big_w: i64,
    pub big_h: i64,
    pub bits: usize,
    /// C for the full model, C_κ for subproblems.
    pub scale: i64,
    /// Every feasible objective value is an integer.
    pub integral_objective: bool,
    /// Bound-type rows left out of `constraints` but included in published
    /// model sizes: one per object slot, two per item (centre lower bounds)
    /// and two per purchasable object (fixed dims).
    pub bound_rows: usize,
}

/// Minimization MILP.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub objective: Vec<(usize, f64)>,
    pub objective_constant: f64,
    pub meta: ModelMeta,
    names: HashMap<String, usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelStats {
    pub binary: usize,
    pub integer: usize,
    pub continuous: usize,
    /// Rows of the formulation, without the strengthening cuts.
    pub rows: usize,
    /// Rows plus [`ModelMeta::bound_rows`].
    pub rows_with_bounds: usize,
    /// Valid inequalities added to tighten the LP relaxation.
    pub cut_rows: usize,
}

/// Row families that only tighten the LP relaxation; integer solutions of
/// the formulation satisfy them.
pub const CUT_FAMILIES: [&str; 4] = ["area_cut", "fit_cut", "pair_cut", "twin_cut"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("objective coefficient overflows exact 64-bit arithmetic: {0}")]
    Overflow(String),
    #[error("delta value {value} for leftover {key:?} outside [0,1]")]
    DeltaOutOfRange { key: ObjectRef, value: String },
    #[error("no delta value for leftover {0:?}")]
    MissingDelta(ObjectRef),
    #[error("scale constant {scale} does not exceed the attainable leftover value {value}")]
    Scale { scale: i64, value: i64 },
}

/// Largest magnitude kept exactly in an f64 objective coefficient.
const EXACT_LIMIT: i64 = 1 << 53;

impl ModelSpec {
    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.names.get(name).copied()
    }

    /// Index of `family` with the given 1-based indices, as in the symbol map.
    pub fn find(&self, family: &str, indices: &[usize]) -> Option<usize> {
        let mut s = family.to_string();
        for i in indices {
            s.push('_');
            s.push_str(&i.to_string());
        }
        self.var_index(&s)
    }

    pub fn stats(&self) -> ModelStats {
        let count = |k: VarKind| self.variables.iter().filter(|v| v.kind == k).count();
        let cuts = self.constraints.iter().filter(|c| CUT_FAMILIES.contains(&c.family)).count();
        let rows = self.constraints.len() - cuts;
        ModelStats {
            binary: count(VarKind::Binary),
            integer: count(VarKind::Integer),
            continuous: count(VarKind::Continuous),
            rows,
            rows_with_bounds: rows + self.meta.bound_rows,
            cut_rows: cuts,
        }
    }

    pub fn evaluate(&self, values: &[f64]) -> f64 {
        self.objective_constant + self.objective.iter().map(|&(j, c)| c * values[j]).sum::<f64>()
    }

    /// Largest bound, row or integrality violation of an assignment.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, &x) in self.variables.iter().zip(values) {
            worst = worst.max(v.lower - x).max(x - v.upper);
            if v.kind.is_integral() {
                worst = worst.max((x - x.round()).abs());
            }
        }
        for c in &self.constraints {
            let lhs: f64 = c.terms.iter().map(|&(j, a)| a * values[j]).sum();
            let d = match c.sense {
                Sense::Le => lhs - c.rhs,
                Sense::Ge => c.rhs - lhs,
                Sense::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(d);
        }
        worst
    }

    /// Builds a model from raw parts; names must be unique.
    pub fn from_parts(
        variables: Vec<Variable>,
        constraints: Vec<Constraint>,
        objective: Vec<(usize, f64)>,
        objective_constant: f64,
        meta: ModelMeta,
    ) -> Self {
        let names = variables.iter().enumerate().map(|(k, v)| (v.name(), k)).collect();
        Self { variables, constraints, objective, objective_constant, meta, names }
    }
}

fn fmt_terms(f: &mut fmt::Formatter<'_>, ms: &ModelSpec, terms: &[(usize, f64)]) -> fmt::Result {
    if terms.is_empty() {
        return write!(f, "0");
    }
    for (k, &(j, c)) in terms.iter().enumerate() {
        let sym = ms.variables[j].symbol();
        let (sign, mag) = if c < 0.0 { ("-", -c) } else { ("+", c) };
        if k == 0 {
            if c < 0.0 {
                write!(f, "-")?;
            }
        } else {
            write!(f, " {sign} ")?;
        }
        if mag == 1.0 {
            write!(f, "{sym}")?;
        } else {
            write!(f, "{mag} {sym}")?;
        }
    }
    Ok(())
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "minimize ")?;
        fmt_terms(f, self, &self.objective)?;
        if self.objective_constant != 0.0 {
            write!(f, " + {}", self.objective_constant)?;
        }
        writeln!(f)?;
        writeln!(f, "subject to")?;
        for c in &self.constraints {
            write!(f, "  ({}) ", c.family)?;
            fmt_terms(f, self, &c.terms)?;
            let op = match c.sense {
                Sense::Le => "<=",
                Sense::Eq => "=",
                Sense::Ge => ">=",
            };
            writeln!(f, " {op} {}", c.rhs)?;
        }
        writeln!(f, "bounds")?;
        for v in &self.variables {
            let kind = match v.kind {
                VarKind::Binary => "binary",
                VarKind::Integer => "integer",
                VarKind::Continuous => "continuous",
            };
            writeln!(f, "  {} <= {} <= {} {kind}", v.lower, v.symbol(), v.upper)?;
        }
        Ok(())
    }
}

/// Data of one single-period subproblem M(κ, κ+1).
#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemState {
    pub instant: usize,
    pub pool: ObjectPool,
    pub items: Vec<OrderedItem>,
    pub catalogue: Vec<CatalogueItem>,
    /// m_{κ+1}: purchasable objects of the next instant, which come first in
    /// its pool.
    pub next_purchasable_count: usize,
    /// C_κ = Σ_{s=p..κ} Σ_j c W H.
    pub scale: i64,
}

impl SubproblemState {
    pub fn new(inst: &Instance, pool: ObjectPool) -> Self {
        let k = pool.instant;
        let scale = (inst.p..=k).flat_map(|s| inst.objects_at(s)).map(|o| o.cost()).sum();
        Self {
            instant: k,
            items: inst.items_at(k).to_vec(),
            catalogue: inst.catalogue.clone(),
            next_purchasable_count: inst.objects_at(k + 1).len(),
            scale,
            pool,
        }
    }

    /// Next-instant slots (top, right) of the leftovers spawned by pool
    /// object `j`, or `None` when `j` cannot spawn.
    pub fn child_slots(&self, j: usize) -> Option<(usize, usize)> {
        let k = leftover_generator_indices(&self.pool).iter().position(|&g| g == j)?;
        let top = self.next_purchasable_count + 2 * k;
        Some((top, top + 1))
    }

    pub fn is_usable(&self, w: i64, h: i64) -> bool {
        self.catalogue.iter().any(|c| c.width <= w && c.height <= h)
    }
}

/// δ estimates keyed by first-order leftover (instant, slot).
pub type UtilizationTable = std::collections::BTreeMap<ObjectRef, f64>;

/// c·W·H·used − ⌊c(δ₁γ₁ + δ₂γ₂)⌋.
pub fn amortized_cost(c: i64, w: i64, h: i64, used: bool, d1: f64, g1: i64, d2: f64, g2: i64) -> i64 {
    let credit = (c as f64 * (d1 * g1 as f64 + d2 * g2 as f64) + 1e-9).floor() as i64;
    c * w * h * i64::from(used) - credit
}

#[derive(Debug, Clone, Copy)]
struct SlotDef {
    known: Option<(i64, i64)>,
    expiration: usize,
    unit_cost: i64,
    purchasable: bool,
}

impl SlotDef {
    fn is_zero(&self) -> bool {
        matches!(self.known, Some((w, h)) if w <= 0 || h <= 0)
    }
}

struct Stage<'a> {
    instant: usize,
    slots: Vec<SlotDef>,
    items: &'a [OrderedItem],
}

struct Frame<'a> {
    stages: Vec<Stage<'a>>,
    final_instant: usize,
    final_slots: Vec<SlotDef>,
    final_purchasable: usize,
    catalogue: &'a [CatalogueItem],
    big_w: i64,
    big_h: i64,
}

fn bit_count(big_w: i64) -> usize {
    if big_w <= 0 {
        1
    } else {
        (64 - big_w.leading_zeros()) as usize
    }
}

struct Builder {
    vars: Vec<Variable>,
    rows: Vec<Constraint>,
    bound_rows: usize,
}

impl Builder {
    fn var(&mut self, family: &'static str, indices: Vec<usize>, kind: VarKind, lower: f64, upper: f64) -> usize {
        self.vars.push(Variable { family, indices, kind, lower, upper });
        self.vars.len() - 1
    }

    fn row(&mut self, family: &'static str, terms: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        self.rows.push(Constraint { family, terms, sense, rhs });
    }

}

struct StageVars {
    wbar: Vec<usize>,
    hbar: Vec<usize>,
    u: Vec<usize>,
    eta: Vec<usize>,
    t: Vec<usize>,
    r: Vec<usize>,
    v: Vec<Vec<Option<usize>>>,
}

struct FinalVars {
    /// Per final slot: (W̄, H̄) when the slot is a leftover.
    dims: Vec<Option<(usize, usize)>>,
    gamma: Vec<Option<usize>>,
}

/// Variables and constraints shared by every model variant.
fn build_core(fr: &Frame<'_>, b: &mut Builder) -> (Vec<StageVars>, FinalVars) {
    let (bw, bh) = (fr.big_w as f64, fr.big_h as f64);
    let bits = bit_count(fr.big_w);
    let mut stages = Vec::with_capacity(fr.stages.len());

    for st in &fr.stages {
        let s = st.instant;
        let mut wbar = Vec::new();
        let mut hbar = Vec::new();
        for (j, sl) in st.slots.iter().enumerate() {
            let (lw, uw, lh, uh) = match sl.known {
                Some((w, h)) => (w as f64, w as f64, h as f64, h as f64),
                None => (0.0, bw, 0.0, bh),
            };
            wbar.push(b.var("Wbar", vec![s, j + 1], VarKind::Continuous, lw, uw));
            hbar.push(b.var("Hbar", vec![s, j + 1], VarKind::Continuous, lh, uh));
            b.bound_rows += if sl.purchasable { 3 } else { 1 };
        }
        stages.push(StageVars { wbar, hbar, u: vec![], eta: vec![], t: vec![], r: vec![], v: vec![] });
    }
    let mut fin = FinalVars { dims: vec![None; fr.final_slots.len()], gamma: vec![None; fr.final_slots.len()] };
    for j in fr.final_purchasable..fr.final_slots.len() {
        let w = b.var("Wbar", vec![fr.final_instant, j + 1], VarKind::Continuous, 0.0, bw);
        let h = b.var("Hbar", vec![fr.final_instant, j + 1], VarKind::Continuous, 0.0, bh);
        fin.dims[j] = Some((w, h));
    }

    for (st, sv) in fr.stages.iter().zip(stages.iter_mut()) {
        let s = st.instant;
        let n = st.items.len();
        let m = st.slots.len();
        sv.v = vec![vec![None; m]; n];
        for (i, it) in st.items.iter().enumerate() {
            for (j, sl) in st.slots.iter().enumerate() {
                if sl.is_zero() {
                    continue;
                }
                let fits = match sl.known {
                    Some((w, h)) => it.width <= w && it.height <= h,
                    None => it.width as f64 <= bw && it.height as f64 <= bh,
                };
                let ub = if fits { 1.0 } else { 0.0 };
                sv.v[i][j] = Some(b.var("v", vec![s, i + 1, j + 1], VarKind::Binary, 0.0, ub));
            }
        }
        for (j, sl) in st.slots.iter().enumerate() {
            let ub = if sl.is_zero() { 0.0 } else { 1.0 };
            sv.u.push(b.var("u", vec![s, j + 1], VarKind::Binary, 0.0, ub));
        }
        for j in 0..m {
            sv.eta.push(b.var("eta", vec![s, j + 1], VarKind::Binary, 0.0, 1.0));
        }
        for j in 0..m {
            sv.t.push(b.var("t", vec![s, j + 1], VarKind::Continuous, 0.0, bh));
            sv.r.push(b.var("r", vec![s, j + 1], VarKind::Continuous, 0.0, bw));
        }
        let mut x = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for (i, it) in st.items.iter().enumerate() {
            let (hw, hh) = (it.width as f64 / 2.0, it.height as f64 / 2.0);
            x.push(b.var("x", vec![s, i + 1], VarKind::Continuous, hw, bw - hw));
            b.bound_rows += 2;
            y.push(b.var("y", vec![s, i + 1], VarKind::Continuous, hh, bh - hh));
        }
        let mut pairs = Vec::new();
        for i in 0..n {
            for i2 in i + 1..n {
                let pi = b.var("pi", vec![s, i + 1, i2 + 1], VarKind::Binary, 0.0, 1.0);
                let tau = b.var("tau", vec![s, i + 1, i2 + 1], VarKind::Binary, 0.0, 1.0);
                pairs.push((i, i2, pi, tau));
            }
        }

        // each item in exactly one object
        for i in 0..n {
            let terms: Vec<(usize, f64)> = sv.v[i].iter().flatten().map(|&k| (k, 1.0)).collect();
            b.row("assign", terms, Sense::Eq, 1.0);
        }
        // an object is used iff it receives an item
        for i in 0..n {
            for j in 0..m {
                if let Some(k) = sv.v[i][j] {
                    b.row("use_lb", vec![(sv.u[j], 1.0), (k, -1.0)], Sense::Ge, 0.0);
                }
            }
        }
        for j in 0..m {
            let mut terms = vec![(sv.u[j], 1.0)];
            terms.extend((0..n).filter_map(|i| sv.v[i][j]).map(|k| (k, -1.0)));
            b.row("use_ub", terms, Sense::Le, 0.0);
        }
        // pre-cuts inside the object
        for j in 0..m {
            b.row("precut", vec![(sv.t[j], 1.0), (sv.hbar[j], -1.0)], Sense::Le, 0.0);
            b.row("precut", vec![(sv.r[j], 1.0), (sv.wbar[j], -1.0)], Sense::Le, 0.0);
        }
        // items inside the cutting area
        for (i, it) in st.items.iter().enumerate() {
            for j in 0..m {
                if let Some(k) = sv.v[i][j] {
                    b.row(
                        "inside_x",
                        vec![(x[i], 1.0), (sv.wbar[j], -1.0), (sv.r[j], 1.0), (k, bw)],
                        Sense::Le,
                        bw - it.width as f64 / 2.0,
                    );
                    b.row(
                        "inside_y",
                        vec![(y[i], 1.0), (sv.hbar[j], -1.0), (sv.t[j], 1.0), (k, bh)],
                        Sense::Le,
                        bh - it.height as f64 / 2.0,
                    );
                }
            }
        }
        // identical items are interchangeable: order them by object, and
        // inside one object keep only the left/below relations
        for &(i, i2, _, tau) in &pairs {
            let (a, c) = (&st.items[i], &st.items[i2]);
            if (a.width, a.height) != (c.width, c.height) {
                continue;
            }
            b.vars[tau].lower = 1.0;
            let mut terms = Vec::new();
            for j in 0..m {
                if let Some(k) = sv.v[i][j] {
                    terms.push((k, j as f64));
                }
                if let Some(k) = sv.v[i2][j] {
                    terms.push((k, -(j as f64)));
                }
            }
            if !terms.is_empty() {
                b.row("twin_cut", terms, Sense::Le, 0.0);
            }
        }
        // no overlap between items of the same object
        for &(i, i2, pi, tau) in &pairs {
            let (a, c) = (&st.items[i], &st.items[i2]);
            let sw = (a.width + c.width) as f64 / 2.0;
            let sh = (a.height + c.height) as f64 / 2.0;
            for j in 0..m {
                let (Some(vi), Some(vk)) = (sv.v[i][j], sv.v[i2][j]) else { continue };
                b.row(
                    "overlap",
                    vec![(x[i], 1.0), (x[i2], -1.0), (vi, -bw), (vk, -bw), (pi, bw), (tau, bw)],
                    Sense::Ge,
                    sw - 2.0 * bw,
                );
                b.row(
                    "overlap",
                    vec![(x[i], -1.0), (x[i2], 1.0), (vi, -bw), (vk, -bw), (pi, bw), (tau, -bw)],
                    Sense::Ge,
                    sw - 3.0 * bw,
                );
                b.row(
                    "overlap",
                    vec![(y[i], 1.0), (y[i2], -1.0), (vi, -bh), (vk, -bh), (pi, -bh), (tau, bh)],
                    Sense::Ge,
                    sh - 3.0 * bh,
                );
                b.row(
                    "overlap",
                    vec![(y[i], -1.0), (y[i2], 1.0), (vi, -bh), (vk, -bh), (pi, -bh), (tau, -bh)],
                    Sense::Ge,
                    sh - 4.0 * bh,
                );
            }
        }
    }

    // leftover geometry
    for (k_stage, st) in fr.stages.iter().enumerate() {
        let (next_base, next_dims): (usize, Vec<Option<(usize, usize)>>) = if k_stage + 1 < fr.stages.len() {
            let nx = &fr.stages[k_stage + 1];
            let base = nx.slots.iter().filter(|s| s.purchasable).count();
            let sv = &stages[k_stage + 1];
            (base, sv.wbar.iter().zip(&sv.hbar).map(|(&w, &h)| Some((w, h))).collect())
        } else {
            (fr.final_purchasable, fin.dims.clone())
        };
        let sv = &stages[k_stage];
        let gens = st.slots.iter().enumerate().filter(|(_, s)| s.expiration > 0).map(|(j, _)| j);
        for (k, j) in gens.enumerate() {
            let (w1, h1) = next_dims[next_base + 2 * k].expect("leftover slot has dims");
            let (w2, h2) = next_dims[next_base + 2 * k + 1].expect("leftover slot has dims");
            let (u, eta, t, r, wb, hb) = (sv.u[j], sv.eta[j], sv.t[j], sv.r[j], sv.wbar[j], sv.hbar[j]);
            if st.slots[j].purchasable {
                // null children when unused
                b.row("child", vec![(h1, 1.0), (u, -bh)], Sense::Le, 0.0);
                b.row("child", vec![(w1, 1.0), (u, -bw)], Sense::Le, 0.0);
            } else {
                // an unused leftover survives as its own top leftover
                b.row("child", vec![(h1, 1.0), (hb, -1.0), (u, bh)], Sense::Ge, 0.0);
                b.row("child", vec![(h1, 1.0), (hb, -1.0), (u, -bh)], Sense::Le, 0.0);
                b.row("child", vec![(w1, 1.0), (wb, -1.0), (u, bw)], Sense::Ge, 0.0);
                b.row("child", vec![(w1, 1.0), (wb, -1.0), (u, -bw)], Sense::Le, 0.0);
            }
            // top height t
            b.row("child", vec![(h1, 1.0), (t, -1.0), (u, -bh)], Sense::Ge, -bh);
            b.row("child", vec![(h1, 1.0), (t, -1.0), (u, bh)], Sense::Le, bh);
            // top width: W̄ − r if vertical first, W̄ otherwise
            b.row("child", vec![(w1, 1.0), (wb, -1.0), (r, 1.0), (eta, -bw), (u, -bw)], Sense::Ge, -2.0 * bw);
            b.row("child", vec![(w1, 1.0), (wb, -1.0), (r, 1.0), (eta, bw), (u, bw)], Sense::Le, 2.0 * bw);
            b.row("child", vec![(w1, 1.0), (wb, -1.0), (eta, bw), (u, -bw)], Sense::Ge, -bw);
            b.row("child", vec![(w1, 1.0), (wb, -1.0), (eta, -bw), (u, bw)], Sense::Le, bw);
            // right leftover: width r, height H̄ if vertical first, H̄ − t otherwise
            b.row("child", vec![(w2, 1.0), (u, -bw)], Sense::Le, 0.0);
            b.row("child", vec![(w2, 1.0), (r, -1.0), (u, -bw)], Sense::Ge, -bw);
            b.row("child", vec![(w2, 1.0), (r, -1.0), (u, bw)], Sense::Le, bw);
            b.row("child", vec![(h2, 1.0), (u, -bh)], Sense::Le, 0.0);
            b.row("child", vec![(h2, 1.0), (hb, -1.0), (eta, -bh), (u, -bh)], Sense::Ge, -2.0 * bh);
            b.row("child", vec![(h2, 1.0), (hb, -1.0), (eta, bh), (u, bh)], Sense::Le, 2.0 * bh);
            b.row("child", vec![(h2, 1.0), (hb, -1.0), (t, 1.0), (eta, bh), (u, -bh)], Sense::Ge, -bh);
            b.row("child", vec![(h2, 1.0), (hb, -1.0), (t, 1.0), (eta, -bh), (u, bh)], Sense::Le, bh);
        }
    }

    // value of the final leftovers
    let l_bits: Vec<f64> = (0..bits).map(|l| (1u64 << l) as f64).collect();
    for j in fr.final_purchasable..fr.final_slots.len() {
        let (w, h) = fin.dims[j].expect("final leftover dims");
        let gamma = b.var("gamma", vec![j + 1], VarKind::Continuous, 0.0, bw * bh);
        fin.gamma[j] = Some(gamma);
        let theta: Vec<usize> =
            (0..bits).map(|l| b.var("theta", vec![j + 1, l + 1], VarKind::Binary, 0.0, 1.0)).collect();
        let omega: Vec<usize> =
            (0..bits).map(|l| b.var("omega", vec![j + 1, l + 1], VarKind::Continuous, 0.0, bh)).collect();
        let zeta: Vec<usize> = (0..fr.catalogue.len())
            .map(|i| b.var("zeta", vec![j + 1, i + 1], VarKind::Binary, 0.0, 1.0))
            .collect();
        for l in 0..bits {
            b.row("omega", vec![(omega[l], 1.0), (h, -1.0)], Sense::Le, 0.0);
            b.row("omega", vec![(omega[l], 1.0), (h, -1.0), (theta[l], -bh)], Sense::Ge, -bh);
            b.row("omega", vec![(omega[l], 1.0), (theta[l], -bh)], Sense::Le, 0.0);
        }
        for (i, c) in fr.catalogue.iter().enumerate() {
            b.row("fit", vec![(w, 1.0), (zeta[i], -bw)], Sense::Ge, c.width as f64 - bw);
            b.row("fit", vec![(h, 1.0), (zeta[i], -bh)], Sense::Ge, c.height as f64 - bh);
        }
        let mut terms = vec![(gamma, 1.0)];
        terms.extend(omega.iter().zip(&l_bits).map(|(&o, &p)| (o, -p)));
        b.row("value", terms, Sense::Le, 0.0);
        let mut terms = vec![(gamma, 1.0)];
        terms.extend(zeta.iter().map(|&z| (z, -bw * bh)));
        b.row("value", terms, Sense::Le, 0.0);
        let mut terms = vec![(w, 1.0)];
        terms.extend(theta.iter().zip(&l_bits).map(|(&t, &p)| (t, -p)));
        b.row("bits", terms, Sense::Eq, 0.0);
    }
    add_cuts(fr, &stages, &fin, b);
    (stages, fin)
}

/// Area and fit inequalities. Items cut from an object and from all of its
/// descendants, plus the valued final leftovers of that lineage, occupy
/// disjoint regions of the object, so their areas sum to at most its area
/// (zero when a purchasable object is not bought).
fn add_cuts(fr: &Frame<'_>, stages: &[StageVars], fin: &FinalVars, b: &mut Builder) {
    // dims and u of each lineage root
    let mut roots: Vec<((i64, i64), Option<usize>)> = Vec::new();
    // per root: (stage, item, v of the item in lineage slots)
    let mut members: Vec<BTreeMap<(usize, usize), Vec<usize>>> = Vec::new();
    let mut terms: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut prev: Vec<Option<usize>> = Vec::new();
    for (k, (st, sv)) in fr.stages.iter().zip(stages).enumerate() {
        let mut root_of: Vec<Option<usize>> = vec![None; st.slots.len()];
        if k == 0 {
            for (j, sl) in st.slots.iter().enumerate() {
                if let Some((w, h)) = sl.known.filter(|_| !sl.is_zero()) {
                    root_of[j] = Some(roots.len());
                    roots.push(((w, h), sl.purchasable.then_some(sv.u[j])));
                    terms.push(Vec::new());
                    members.push(BTreeMap::new());
                }
            }
        } else {
            let base = st.slots.iter().filter(|s| s.purchasable).count();
            for (j, sl) in st.slots.iter().enumerate().take(base) {
                if let Some((w, h)) = sl.known {
                    root_of[j] = Some(roots.len());
                    roots.push(((w, h), Some(sv.u[j])));
                    terms.push(Vec::new());
                    members.push(BTreeMap::new());
                }
            }
            for (j, r) in prev.iter().enumerate() {
                root_of[base + j] = *r;
            }
        }
        for (i, it) in st.items.iter().enumerate() {
            for (j, sl) in st.slots.iter().enumerate() {
                let Some(v) = sv.v[i][j] else { continue };
                if let Some(r) = root_of[j] {
                    let (rw, rh) = roots[r].0;
                    if it.width > rw || it.height > rh {
                        b.vars[v].upper = 0.0;
                    }
                    if sl.known.is_none() {
                        let wu = &mut b.vars[sv.wbar[j]].upper;
                        *wu = wu.min(rw as f64);
                        let hu = &mut b.vars[sv.hbar[j]].upper;
                        *hu = hu.min(rh as f64);
                    }
                    terms[r].push((v, it.area() as f64));
                    members[r].entry((k, i)).or_default().push(v);
                }
                if sl.known.is_none() {
                    b.row("fit_cut", vec![(v, it.width as f64), (sv.wbar[j], -1.0)], Sense::Le, 0.0);
                    b.row("fit_cut", vec![(v, it.height as f64), (sv.hbar[j], -1.0)], Sense::Le, 0.0);
                }
            }
        }
        // children inherit the root of their generator
        prev = st
            .slots
            .iter()
            .enumerate()
            .filter(|(_, s)| s.expiration > 0)
            .flat_map(|(j, _)| [root_of[j], root_of[j]])
            .collect();
    }
    for (k, r) in prev.iter().enumerate() {
        let j = fr.final_purchasable + k;
        if let (Some(r), Some(g)) = (r, fin.gamma.get(j).copied().flatten()) {
            terms[*r].push((g, 1.0));
            let (rw, rh) = roots[*r].0;
            let (w, h) = fin.dims[j].expect("final leftover dims");
            let wu = &mut b.vars[w].upper;
            *wu = wu.min(rw as f64);
            let hu = &mut b.vars[h].upper;
            *hu = hu.min(rh as f64);
            // γ ≤ W̄·H̄ with each side bounded by the root
            b.row("area_cut", vec![(g, 1.0), (h, -(rw as f64))], Sense::Le, 0.0);
            b.row("area_cut", vec![(g, 1.0), (w, -(rh as f64))], Sense::Le, 0.0);
        }
    }
    // two items that fit neither side by side nor stacked in the root
    for (r, m) in members.iter().enumerate() {
        let ((rw, rh), u) = roots[r];
        let list: Vec<(&(usize, usize), &Vec<usize>)> = m.iter().collect();
        for (a, &(&(ka, ia), va)) in list.iter().enumerate() {
            let x = &fr.stages[ka].items[ia];
            for &(&(kb, ib), vb) in &list[a + 1..] {
                let y = &fr.stages[kb].items[ib];
                if x.width + y.width <= rw || x.height + y.height <= rh {
                    continue;
                }
                let mut row: Vec<(usize, f64)> = va.iter().chain(vb).map(|&v| (v, 1.0)).collect();
                match u {
                    Some(u) => {
                        row.push((u, -1.0));
                        b.row("pair_cut", row, Sense::Le, 0.0);
                    }
                    None => b.row("pair_cut", row, Sense::Le, 1.0),
                }
            }
        }
    }
    for (((w, h), u), mut row) in roots.into_iter().zip(terms) {
        let cap = w * h;
        if row.is_empty() {
            continue;
        }
        match u {
            Some(u) => {
                row.push((u, -(cap as f64)));
                b.row("area_cut", row, Sense::Le, 0.0);
            }
            None => b.row("area_cut", row, Sense::Le, cap as f64),
        }
    }
}

fn checked_coeff(parts: &[i64]) -> Result<i64, ModelError> {
    let mut acc: i64 = 1;
    for &p in parts {
        acc = acc
            .checked_mul(p)
            .ok_or_else(|| ModelError::Overflow(format!("product of {parts:?}")))?;
    }
    if acc.abs() > EXACT_LIMIT {
        return Err(ModelError::Overflow(acc.to_string()));
    }
    Ok(acc)
}

fn full_frame(inst: &Instance) -> Frame<'_> {
    let layout = slot_layout(inst);
    let big_w = inst.purchasable.iter().flatten().map(|o| o.width).max().unwrap_or(0);
    let big_h = inst.purchasable.iter().flatten().map(|o| o.height).max().unwrap_or(0);
    let mut stages = Vec::new();
    for s in inst.p..inst.big_p {
        let objs = inst.objects_at(s);
        let slots = layout[s - inst.p]
            .iter()
            .enumerate()
            .map(|(j, sl)| SlotDef {
                known: objs.get(j).map(|o| (o.width, o.height)),
                expiration: sl.expiration,
                unit_cost: sl.unit_cost,
                purchasable: j < objs.len(),
            })
            .collect();
        stages.push(Stage { instant: s, slots, items: inst.items_at(s) });
    }
    let final_slots = layout[inst.periods()]
        .iter()
        .map(|sl| SlotDef { known: None, expiration: sl.expiration, unit_cost: sl.unit_cost, purchasable: false })
        .collect();
    Frame {
        stages,
        final_instant: inst.big_p,
        final_slots,
        final_purchasable: 0,
        catalogue: &inst.catalogue,
        big_w,
        big_h,
    }
}

/// Full multi-period model: minimize C·(purchase cost) − final leftover value.
pub fn build_full_model(inst: &Instance) -> Result<ModelSpec, ModelError> {
    let fr = full_frame(inst);
    let scale = inst
        .purchasable
        .iter()
        .flatten()
        .try_fold(0i64, |acc, o| checked_coeff(&[o.unit_cost, o.width, o.height]).map(|c| acc + c))?;
    let mut b = Builder { vars: Vec::new(), rows: Vec::new(), bound_rows: 0 };
    let (stages, fin) = build_core(&fr, &mut b);
    let mut obj = Vec::new();
    for (st, sv) in fr.stages.iter().zip(&stages) {
        for (j, o) in inst.objects_at(st.instant).iter().enumerate() {
            obj.push((sv.u[j], checked_coeff(&[scale, o.unit_cost, o.width, o.height])? as f64));
        }
    }
    for (j, g) in fin.gamma.iter().enumerate() {
        if let Some(g) = g {
            obj.push((*g, -(fr.final_slots[j].unit_cost as f64)));
        }
    }
    Ok(finish(b, obj, fr.big_w, fr.big_h, scale, ModelKind::Full, inst.p, inst.big_p))
}

#[allow(clippy::too_many_arguments)]
fn finish(
    b: Builder,
    obj: Vec<(usize, f64)>,
    big_w: i64,
    big_h: i64,
    scale: i64,
    kind: ModelKind,
    first: usize,
    last: usize,
) -> ModelSpec {
    let meta = ModelMeta {
        kind,
        first_instant: first,
        final_instant: last,
        big_w,
        big_h,
        bits: bit_count(big_w),
        scale,
        integral_objective: true,
        bound_rows: b.bound_rows,
    };
    ModelSpec::from_parts(b.vars, b.rows, obj, 0.0, meta)
}

fn single_frame(st: &SubproblemState) -> Frame<'_> {
    let live = st.pool.objects.iter().filter(|o| !o.is_empty());
    let big_w = live.clone().map(|o| o.width).max().unwrap_or(0).max(1);
    let big_h = live.map(|o| o.height).max().unwrap_or(0).max(1);
    let slots: Vec<SlotDef> = st
        .pool
        .objects
        .iter()
        .enumerate()
        .map(|(j, o)| SlotDef {
            known: Some((o.width, o.height)),
            expiration: o.expiration,
            unit_cost: o.unit_cost,
            purchasable: j < st.pool.purchasable_count,
        })
        .collect();
    let mut final_slots: Vec<SlotDef> = (0..st.next_purchasable_count)
        .map(|_| SlotDef { known: None, expiration: 0, unit_cost: 0, purchasable: true })
        .collect();
    for g in slots.iter().filter(|s| s.expiration > 0) {
        for _ in 0..2 {
            final_slots.push(SlotDef {
                known: None,
                expiration: g.expiration - 1,
                unit_cost: g.unit_cost,
                purchasable: false,
            });
        }
    }
    Frame {
        stages: vec![Stage { instant: st.instant, slots, items: &st.items }],
        final_instant: st.instant + 1,
        final_slots,
        final_purchasable: st.next_purchasable_count,
        catalogue: &st.catalogue,
        big_w,
        big_h,
    }
}

fn check_scale(st: &SubproblemState) -> Result<(), ModelError> {
    let value: i64 = st.pool.objects.iter().map(|o| o.unit_cost * o.area()).sum();
    if st.scale < value {
        return Err(ModelError::Scale { scale: st.scale, value });
    }
    Ok(())
}

fn single_period(
    st: &SubproblemState,
    delta: Option<&UtilizationTable>,
) -> Result<ModelSpec, ModelError> {
    check_scale(st)?;
    let fr = single_frame(st);
    let mut b = Builder { vars: Vec::new(), rows: Vec::new(), bound_rows: 0 };
    let (stages, fin) = build_core(&fr, &mut b);
    let sv = &stages[0];
    let mut obj = Vec::new();
    for j in 0..st.pool.purchasable_count {
        let o = &st.pool.objects[j];
        obj.push((sv.u[j], checked_coeff(&[st.scale, o.unit_cost, o.width, o.height])? as f64));
    }
    if let Some(delta) = delta {
        for j in 0..st.pool.purchasable_count {
            let o = st.pool.objects[j];
            let Some((top, right)) = st.child_slots(j) else { continue };
            let mut terms = Vec::new();
            for slot in [top, right] {
                let key = ObjectRef::new(st.instant + 1, slot);
                let d = *delta.get(&key).ok_or(ModelError::MissingDelta(key))?;
                if !(0.0..=1.0).contains(&d) {
                    return Err(ModelError::DeltaOutOfRange { key, value: d.to_string() });
                }
                let g = fin.gamma[slot].expect("leftover slot has gamma");
                terms.push((g, -(o.unit_cost as f64) * d));
            }
            let ub = checked_coeff(&[o.unit_cost, o.width, o.height])? as f64;
            let lam = b.var("lambda", vec![st.instant, j + 1], VarKind::Integer, 0.0, ub);
            let mut row = vec![(lam, 1.0)];
            row.extend(terms);
            b.row("amortize", row, Sense::Le, 0.0);
            obj.push((lam, -(st.scale as f64)));
        }
    }
    for (j, g) in fin.gamma.iter().enumerate() {
        if let Some(g) = g {
            obj.push((*g, -(fr.final_slots[j].unit_cost as f64)));
        }
    }
    let kind = if delta.is_some() {
        ModelKind::ForwardLooking { instant: st.instant }
    } else {
        ModelKind::Myopic { instant: st.instant }
    };
    Ok(finish(b, obj, fr.big_w, fr.big_h, st.scale, kind, st.instant, st.instant + 1))
}

/// Myopic subproblem: minimize C_κ·(cost of purchases at κ) − value of the
/// leftovers at κ+1.
pub fn build_myopic_subproblem(st: &SubproblemState) -> Result<ModelSpec, ModelError> {
    single_period(st, None)
}

/// Forward-looking subproblem: purchases are discounted by the estimated
/// use of their leftovers, λ_j ≤ c(δ_top γ_top + δ_right γ_right).
pub fn build_flook_subproblem(st: &SubproblemState, delta: &UtilizationTable) -> Result<ModelSpec, ModelError> {
    single_period(st, Some(delta))
}
