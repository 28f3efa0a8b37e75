//! Ground truth at toy scale: exhaustive exact solvers over integer
//! coordinates and a plan validator that recomputes everything from the
//! instance.

use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use thiserror::Error;

use crate::genealogy::{cut_children, spawn_pool, GenealogyError, ObjectPool, ObjectRef, ObjectState};
use crate::instance::{Instance, OrderedItem};
use crate::model::{amortized_cost, ModelError, SubproblemState, UtilizationTable};
use crate::plan::{ObjectCut, PeriodDecision, Placement, Plan};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_periods: usize,
    /// Ordered items per instant.
    pub max_items: usize,
    /// Purchasable objects per instant.
    pub max_objects: usize,
    /// Largest object width or height.
    pub max_dim: i64,
    /// Try every integer position instead of normal patterns only.
    pub full_grid: bool,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self { max_periods: 3, max_items: 6, max_objects: 6, max_dim: 30, full_grid: false }
    }
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("oracle limit exceeded: {0}")]
    Limit(String),
    #[error("no feasible decision at instant {0}")]
    Infeasible(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Genealogy(#[from] GenealogyError),
}

type Dims = (i64, i64);

fn usable(catalogue: &[crate::instance::CatalogueItem], (w, h): Dims) -> bool {
    w > 0 && h > 0 && catalogue.iter().any(|c| c.width <= w && c.height <= h)
}

/// Exact rectangle packing with memoized answers. Item lists are always
/// given sorted by [`sort_key`], largest first.
#[derive(Default)]
struct Packer {
    full_grid: bool,
    fits: HashMap<(Vec<Dims>, i64, i64), Option<Rc<Vec<Dims>>>>,
    heights: HashMap<(Vec<Dims>, i64), Rc<Vec<Option<i64>>>>,
}

fn sort_key(d: &Dims) -> (i64, i64, i64) {
    (-(d.0 * d.1), -d.0, -d.1)
}

/// Subset sums of `dims` other than index `skip`, capped at `cap`.
fn subset_sums(dims: &[i64], skip: usize, cap: i64) -> Vec<i64> {
    let others: Vec<i64> = dims.iter().enumerate().filter(|&(k, _)| k != skip).map(|(_, &d)| d).collect();
    let mut out = vec![0];
    for d in others {
        let extra: Vec<i64> = out.iter().map(|&s| s + d).filter(|&s| s <= cap).collect();
        out.extend(extra);
    }
    out.sort_unstable();
    out.dedup();
    out
}

impl Packer {
    fn new(full_grid: bool) -> Self {
        Self { full_grid, ..Default::default() }
    }

    /// Bottom-left corners packing `items` into an `a`×`b` box, if any.
    fn pack(&mut self, items: &[Dims], a: i64, b: i64) -> Option<Rc<Vec<Dims>>> {
        if items.is_empty() {
            return Some(Rc::new(Vec::new()));
        }
        let key = (items.to_vec(), a, b);
        if let Some(r) = self.fits.get(&key) {
            return r.clone();
        }
        let area: i64 = items.iter().map(|d| d.0 * d.1).sum();
        let fits_each = items.iter().all(|&(w, h)| w <= a && h <= b);
        let res = if !fits_each || area > a * b {
            None
        } else {
            let ws: Vec<i64> = items.iter().map(|d| d.0).collect();
            let hs: Vec<i64> = items.iter().map(|d| d.1).collect();
            let (xs, ys): (Vec<Vec<i64>>, Vec<Vec<i64>>) = (0..items.len())
                .map(|k| {
                    if self.full_grid {
                        ((0..=a - ws[k]).collect(), (0..=b - hs[k]).collect())
                    } else {
                        (subset_sums(&ws, k, a - ws[k]), subset_sums(&hs, k, b - hs[k]))
                    }
                })
                .unzip();
            let mut pos = Vec::with_capacity(items.len());
            if place(items, 0, &xs, &ys, &mut pos) {
                Some(Rc::new(pos))
            } else {
                None
            }
        };
        self.fits.insert(key, res.clone());
        res
    }

    /// Least packing height for every width `max_w..=wcap` (`None` below
    /// `max_w`).
    fn heights(&mut self, items: &[Dims], wcap: i64) -> Rc<Vec<Option<i64>>> {
        let key = (items.to_vec(), wcap);
        if let Some(r) = self.heights.get(&key) {
            return r.clone();
        }
        let max_w = items.iter().map(|d| d.0).max().unwrap_or(0);
        let max_h = items.iter().map(|d| d.1).max().unwrap_or(0);
        let sum_h: i64 = items.iter().map(|d| d.1).sum();
        let area: i64 = items.iter().map(|d| d.0 * d.1).sum();
        let mut out = vec![None; (wcap.max(0) + 1) as usize];
        let mut hi = sum_h;
        for a in max_w.max(1)..=wcap {
            let mut lo = max_h.max((area + a - 1) / a);
            if lo > hi {
                lo = hi;
            }
            let mut top = hi;
            while lo < top {
                let mid = (lo + top) / 2;
                if self.pack(items, a, mid).is_some() {
                    top = mid;
                } else {
                    lo = mid + 1;
                }
            }
            out[a as usize] = Some(top);
            hi = top;
        }
        let out = Rc::new(out);
        self.heights.insert(key, out.clone());
        out
    }

    /// Every non-dominated pre-cut for items `items` in a `w`×`h` object,
    /// with the bottom-left box (a, b) left for cutting.
    fn options(&mut self, items: &[Dims], w: i64, h: i64) -> Vec<CutOption> {
        let f = self.heights(items, w);
        let mut out = Vec::new();
        // vertical cut first: right strip spans the full height
        for a in 0..=w {
            if let Some(b) = f[a as usize].filter(|&b| b <= h) {
                out.push(CutOption::new(w, h, true, a, b));
            }
        }
        // horizontal cut first: for each height, the narrowest width
        for b in 0..=h {
            let first = (0..=w).find(|&a| f[a as usize].is_some_and(|fb| fb <= b));
            if let Some(a) = first {
                out.push(CutOption::new(w, h, false, a, b));
            }
        }
        out
    }
}

fn place(items: &[Dims], k: usize, xs: &[Vec<i64>], ys: &[Vec<i64>], pos: &mut Vec<Dims>) -> bool {
    if k == items.len() {
        return true;
    }
    let (w, h) = items[k];
    let twin = k > 0 && items[k - 1] == items[k];
    for &y in &ys[k] {
        for &x in &xs[k] {
            // interchangeable items are placed in increasing (y, x) order
            if twin && (y, x) <= (pos[k - 1].1, pos[k - 1].0) {
                continue;
            }
            let clash = pos.iter().zip(items).any(|(&(px, py), &(pw, ph))| {
                x < px + pw && px < x + w && y < py + ph && py < y + h
            });
            if clash {
                continue;
            }
            pos.push((x, y));
            if place(items, k + 1, xs, ys, pos) {
                return true;
            }
            pos.pop();
        }
    }
    false
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct CutOption {
    cut: ObjectCut,
    /// Cutting area (width, height).
    area: Dims,
    top: Dims,
    right: Dims,
}

impl CutOption {
    fn new(w: i64, h: i64, vertical_first: bool, a: i64, b: i64) -> Self {
        let (t, r) = (h - b, w - a);
        let (top, right) = cut_children(w, h, vertical_first, t, r);
        Self { cut: ObjectCut { vertical_first, top: t, right: r }, area: (a, b), top, right }
    }
}

/// Items grouped by object: sorted dims plus the original item indices in
/// the same order.
fn group(items: &[OrderedItem], idx: &[usize]) -> (Vec<Dims>, Vec<usize>) {
    let mut v: Vec<(Dims, usize)> = idx.iter().map(|&i| ((items[i].width, items[i].height), i)).collect();
    v.sort_by_key(|(d, i)| (sort_key(d), *i));
    v.into_iter().unzip()
}

fn placements_for(j: usize, order: &[usize], pos: &[Dims]) -> Vec<Placement> {
    order
        .iter()
        .zip(pos)
        .map(|(&i, &(x, y))| Placement { item: i, object: j, x: x as f64, y: y as f64 })
        .collect()
}

/// Enumerates item-to-object assignments: item i goes to one of the objects
/// in `allowed[i]`; interchangeable items take non-decreasing objects.
fn for_each_assignment(
    items: &[OrderedItem],
    allowed: &[Vec<usize>],
    f: &mut dyn FnMut(&[usize]) -> Result<bool, OracleError>,
) -> Result<(), OracleError> {
    fn rec(
        items: &[OrderedItem],
        allowed: &[Vec<usize>],
        cur: &mut Vec<usize>,
        f: &mut dyn FnMut(&[usize]) -> Result<bool, OracleError>,
    ) -> Result<bool, OracleError> {
        let i = cur.len();
        if i == items.len() {
            return f(cur);
        }
        let floor = (0..i).rev().find(|&k| items[k] == items[i]).map(|k| cur[k]);
        for &j in &allowed[i] {
            if floor.is_some_and(|fl| j < fl) {
                continue;
            }
            cur.push(j);
            let stop = rec(items, allowed, cur, f)?;
            cur.pop();
            if stop {
                return Ok(true);
            }
        }
        Ok(false)
    }
    rec(items, allowed, &mut Vec::with_capacity(items.len()), f)?;
    Ok(())
}

fn allowed_objects(pool: &ObjectPool, items: &[OrderedItem]) -> Vec<Vec<usize>> {
    items
        .iter()
        .map(|it| {
            pool.objects
                .iter()
                .enumerate()
                .filter(|(_, o)| !o.is_empty() && it.width <= o.width && it.height <= o.height)
                .map(|(j, _)| j)
                .collect()
        })
        .collect()
}

fn by_object(assign: &[usize], m: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); m];
    for (i, &j) in assign.iter().enumerate() {
        out[j].push(i);
    }
    out
}

/// Objective of the single-period problem being solved.
#[derive(Debug, Clone, Copy)]
pub enum SingleObjective<'a> {
    Myopic,
    ForwardLooking(&'a UtilizationTable),
}

/// Contribution of pool object `j` to the single-period objective when it
/// is used (`cut` applies) or not.
pub fn object_term(
    st: &SubproblemState,
    j: usize,
    used: bool,
    cut: ObjectCut,
    objective: SingleObjective<'_>,
) -> Result<i64, OracleError> {
    let o = &st.pool.objects[j];
    let purchasable = j < st.pool.purchasable_count;
    let children = if o.expiration == 0 {
        None
    } else if used {
        Some(cut_children(o.width, o.height, cut.vertical_first, cut.top, cut.right))
    } else if purchasable {
        Some(((0, 0), (0, 0)))
    } else {
        Some(((o.width, o.height), (0, 0)))
    };
    let gamma = |d: Dims| if usable(&st.catalogue, d) { d.0 * d.1 } else { 0 };
    let (g1, g2) = children.map_or((0, 0), |(t, r)| (gamma(t), gamma(r)));
    let mut term = -o.unit_cost * (g1 + g2);
    if purchasable {
        let (d1, d2) = match (objective, st.child_slots(j)) {
            (SingleObjective::ForwardLooking(delta), Some((top, right))) => {
                let get = |slot: usize| {
                    let key = ObjectRef::new(st.instant + 1, slot);
                    delta.get(&key).copied().ok_or(ModelError::MissingDelta(key))
                };
                (get(top)?, get(right)?)
            }
            _ => (0.0, 0.0),
        };
        let amortized = amortized_cost(o.unit_cost, o.width, o.height, used, d1, g1, d2, g2);
        term += st.scale * amortized;
    }
    Ok(term)
}

/// Objective value of a decision for M(κ, κ+1) or its forward-looking
/// variant.
pub fn single_period_objective(
    st: &SubproblemState,
    dec: &PeriodDecision,
    objective: SingleObjective<'_>,
) -> Result<i64, OracleError> {
    let used = dec.used_flags();
    let mut total = 0;
    for j in 0..st.pool.len() {
        total += object_term(st, j, used[j], dec.cuts[j], objective)?;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingleSolution {
    pub decision: PeriodDecision,
    pub objective: i64,
}

fn check_dims(objs: &[ObjectState], limits: &OracleLimits) -> Result<(), OracleError> {
    if let Some(o) = objs.iter().find(|o| o.width > limits.max_dim || o.height > limits.max_dim) {
        return Err(OracleError::Limit(format!(
            "object {}x{} exceeds {}",
            o.width, o.height, limits.max_dim
        )));
    }
    Ok(())
}

/// Provably optimal decision for a single-period problem by exhaustive
/// search over assignments and pre-cuts.
pub fn exact_single_period(
    st: &SubproblemState,
    objective: SingleObjective<'_>,
    limits: &OracleLimits,
) -> Result<SingleSolution, OracleError> {
    if st.items.len() > limits.max_items {
        return Err(OracleError::Limit(format!("{} items > {}", st.items.len(), limits.max_items)));
    }
    if st.pool.purchasable_count > limits.max_objects {
        return Err(OracleError::Limit(format!(
            "{} objects > {}",
            st.pool.purchasable_count, limits.max_objects
        )));
    }
    check_dims(&st.pool.objects, limits)?;
    let m = st.pool.len();
    let mut packer = Packer::new(limits.full_grid);
    let mut idle = Vec::with_capacity(m);
    for j in 0..m {
        idle.push(object_term(st, j, false, ObjectCut::default(), objective)?);
    }
    // best (term, option) per object and item subset
    let mut memo: HashMap<(usize, Vec<usize>), Option<(i64, CutOption)>> = HashMap::new();
    let mut best: Option<(i64, Vec<usize>)> = None;
    let allowed = allowed_objects(&st.pool, &st.items);
    for_each_assignment(&st.items, &allowed, &mut |assign| {
        let groups = by_object(assign, m);
        let mut total = 0;
        for (j, idx) in groups.iter().enumerate() {
            if idx.is_empty() {
                total += idle[j];
                continue;
            }
            let key = (j, idx.clone());
            let entry = match memo.get(&key) {
                Some(e) => *e,
                None => {
                    let o = st.pool.objects[j];
                    let (dims, _) = group(&st.items, idx);
                    let mut pick: Option<(i64, CutOption)> = None;
                    for opt in packer.options(&dims, o.width, o.height) {
                        let term = object_term(st, j, true, opt.cut, objective)?;
                        if pick.map_or(true, |(t, _)| term < t) {
                            pick = Some((term, opt));
                        }
                    }
                    memo.insert(key, pick);
                    pick
                }
            };
            match entry {
                Some((t, _)) => total += t,
                None => return Ok(false),
            }
        }
        if best.as_ref().map_or(true, |(b, _)| total < *b) {
            best = Some((total, assign.to_vec()));
        }
        Ok(false)
    })?;
    let (objective_value, assign) = best.ok_or(OracleError::Infeasible(st.instant))?;
    let mut dec = PeriodDecision::empty(st.instant, m);
    for (j, idx) in by_object(&assign, m).iter().enumerate() {
        if idx.is_empty() {
            continue;
        }
        let (_, opt) = memo[&(j, idx.clone())].expect("feasible group");
        let (dims, order) = group(&st.items, idx);
        let pos = packer.pack(&dims, opt.area.0, opt.area.1).expect("option packs");
        dec.cuts[j] = opt.cut;
        dec.placements.extend(placements_for(j, &order, &pos));
    }
    dec.placements.sort_by_key(|pl| pl.item);
    Ok(SingleSolution { decision: dec, objective: objective_value })
}

/// (cost, leftover value) of the best continuation from a state.
type Outcome = (i64, i64);

fn better(a: Outcome, b: Outcome) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 > b.1)
}

struct MultiSearch<'a> {
    inst: &'a Instance,
    packer: Packer,
    memo: HashMap<(usize, Vec<(i64, i64, i64, usize)>), Option<Outcome>>,
}

struct Chosen {
    decision: PeriodDecision,
    next: ObjectPool,
}

impl MultiSearch<'_> {
    /// Whether a leftover alive at `s` with expiration `e` can still cut an
    /// item or carry value at the last instant.
    fn useful(&self, s: usize, d: Dims, e: usize) -> bool {
        if d.0 <= 0 || d.1 <= 0 {
            return false;
        }
        let last = (s + e).min(self.inst.big_p);
        if last == self.inst.big_p && usable(&self.inst.catalogue, d) {
            return true;
        }
        (s..=last.min(self.inst.big_p - 1))
            .flat_map(|k| self.inst.items_at(k))
            .any(|it| it.width <= d.0 && it.height <= d.1)
    }

    fn key(&self, pool: &ObjectPool) -> (usize, Vec<(i64, i64, i64, usize)>) {
        let mut v: Vec<(i64, i64, i64, usize)> = pool.objects[pool.purchasable_count..]
            .iter()
            .filter(|o| self.useful(pool.instant, (o.width, o.height), o.expiration))
            .map(|o| (o.width, o.height, o.unit_cost, o.expiration))
            .collect();
        v.sort_unstable();
        (pool.instant, v)
    }

    fn final_value(&self, pool: &ObjectPool) -> i64 {
        pool.objects
            .iter()
            .filter(|o| usable(&self.inst.catalogue, (o.width, o.height)))
            .map(|o| o.unit_cost * o.area())
            .sum()
    }

    fn best(&mut self, pool: &ObjectPool) -> Result<Option<Outcome>, OracleError> {
        if pool.instant == self.inst.big_p {
            return Ok(Some((0, self.final_value(pool))));
        }
        let key = self.key(pool);
        if let Some(r) = self.memo.get(&key) {
            return Ok(*r);
        }
        let r = self.explore(pool, None)?.0;
        self.memo.insert(key, r);
        Ok(r)
    }

    /// Canonical form of a leftover pair for dominance checks.
    fn canon_pair(&self, s: usize, e: usize, a: Dims, b: Dims) -> [Dims; 2] {
        let f = |d: Dims| if e > 0 && self.useful(s + 1, d, e - 1) { d } else { (0, 0) };
        let (x, y) = (f(a), f(b));
        if x >= y {
            [x, y]
        } else {
            [y, x]
        }
    }

    /// Searches the decisions at `pool`. With `want` set, returns the first
    /// decision reaching that outcome.
    fn explore(
        &mut self,
        pool: &ObjectPool,
        want: Option<Outcome>,
    ) -> Result<(Option<Outcome>, Option<Chosen>), OracleError> {
        let inst = self.inst;
        let s = pool.instant;
        let items = inst.items_at(s);
        let m = pool.len();
        let last = s + 1 == inst.big_p;
        let next_purch = inst.objects_at(s + 1);
        let allowed = allowed_objects(pool, items);
        let mut best: Option<Outcome> = None;
        let mut chosen: Option<Chosen> = None;
        let mut group_memo: HashMap<(usize, Vec<usize>), Option<Rc<Vec<CutOption>>>> = HashMap::new();

        let mut visit = |this: &mut Self, assign: &[usize]| -> Result<bool, OracleError> {
            let groups = by_object(assign, m);
            let mut cost = 0;
            let mut opts: Vec<Option<Rc<Vec<CutOption>>>> = vec![None; m];
            for (j, idx) in groups.iter().enumerate() {
                if idx.is_empty() {
                    continue;
                }
                let o = pool.objects[j];
                if j < pool.purchasable_count {
                    cost += o.unit_cost * o.area();
                }
                let key = (j, idx.clone());
                let entry = match group_memo.get(&key) {
                    Some(e) => e.clone(),
                    None => {
                        let (dims, _) = group(items, idx);
                        let all = this.packer.options(&dims, o.width, o.height);
                        let e = if all.is_empty() { None } else { Some(Rc::new(this.prune(s, &o, all))) };
                        group_memo.insert(key, e.clone());
                        e
                    }
                };
                match entry {
                    Some(list) => opts[j] = Some(list),
                    None => return Ok(false),
                }
            }
            let cap = want.or(best);
            if cap.is_some_and(|c| cost > c.0) {
                return Ok(false);
            }
            // choices per generator: option index, or None when unused
            let gens: Vec<usize> = (0..m).filter(|&j| pool.objects[j].expiration > 0).collect();
            let mut choice: Vec<usize> = vec![0; m];
            let make = |choice: &[usize]| -> PeriodDecision {
                let mut dec = PeriodDecision::empty(s, m);
                for (j, idx) in groups.iter().enumerate() {
                    if let Some(list) = &opts[j] {
                        dec.cuts[j] = list[choice[j]].cut;
                        dec.placements.extend(idx.iter().map(|&i| Placement { item: i, object: j, x: 0.0, y: 0.0 }));
                    }
                }
                dec
            };
            if last {
                // final value is separable over objects
                for &j in &gens {
                    if let Some(list) = &opts[j] {
                        let o = pool.objects[j];
                        let val = |c: &CutOption| -> i64 {
                            [c.top, c.right]
                                .iter()
                                .filter(|d| usable(&inst.catalogue, **d))
                                .map(|d| o.unit_cost * d.0 * d.1)
                                .sum()
                        };
                        let mut k_best = 0;
                        for (k, c) in list.iter().enumerate() {
                            if val(c) > val(&list[k_best]) {
                                k_best = k;
                            }
                        }
                        choice[j] = k_best;
                    }
                }
                let dec = make(&choice);
                let next = spawn_pool(pool, &dec, next_purch)?;
                let out = (cost, this.final_value(&next));
                if want == Some(out) {
                    chosen = Some(Chosen { decision: dec, next });
                    best = Some(out);
                    return Ok(true);
                }
                if best.map_or(true, |b| better(out, b)) {
                    best = Some(out);
                }
                return Ok(false);
            }
            let varying: Vec<usize> = gens.iter().copied().filter(|&j| opts[j].is_some()).collect();
            loop {
                let dec = make(&choice);
                let next = spawn_pool(pool, &dec, next_purch)?;
                if let Some((c2, v2)) = this.best(&next)? {
                    let out = (cost + c2, v2);
                    if want == Some(out) {
                        chosen = Some(Chosen { decision: dec, next });
                        best = Some(out);
                        return Ok(true);
                    }
                    if best.map_or(true, |b| better(out, b)) {
                        best = Some(out);
                    }
                }
                // odometer over the option lists
                let mut k = 0;
                loop {
                    if k == varying.len() {
                        return Ok(false);
                    }
                    let j = varying[k];
                    choice[j] += 1;
                    if choice[j] < opts[j].as_ref().map_or(1, |l| l.len()) {
                        break;
                    }
                    choice[j] = 0;
                    k += 1;
                }
            }
        };
        for_each_assignment(items, &allowed, &mut |assign| visit(self, assign))?;
        Ok((best, chosen))
    }

    /// Drops options whose leftovers are dominated by another option's.
    fn prune(&self, s: usize, o: &ObjectState, all: Vec<CutOption>) -> Vec<CutOption> {
        if o.expiration == 0 {
            return all.into_iter().take(1).collect();
        }
        let canon: Vec<[Dims; 2]> =
            all.iter().map(|c| self.canon_pair(s, o.expiration, c.top, c.right)).collect();
        let covers = |a: &[Dims; 2], b: &[Dims; 2]| {
            let ge = |x: Dims, y: Dims| x.0 >= y.0 && x.1 >= y.1;
            (ge(a[0], b[0]) && ge(a[1], b[1])) || (ge(a[0], b[1]) && ge(a[1], b[0]))
        };
        let mut keep = Vec::new();
        for (k, c) in canon.iter().enumerate() {
            let dominated = canon.iter().enumerate().any(|(k2, c2)| {
                k2 != k && covers(c2, c) && (!covers(c, c2) || k2 < k)
            });
            if !dominated {
                keep.push(all[k]);
            }
        }
        keep
    }
}

/// Optimal plan under the lexicographic criterion (least purchase cost,
/// then most final leftover value) by exhaustive search over all period
/// decisions.
pub fn exact_multi_period(inst: &Instance, limits: &OracleLimits) -> Result<Plan, OracleError> {
    if inst.periods() > limits.max_periods {
        return Err(OracleError::Limit(format!("{} periods > {}", inst.periods(), limits.max_periods)));
    }
    for s in inst.p..inst.big_p {
        if inst.items_at(s).len() > limits.max_items {
            return Err(OracleError::Limit(format!("{} items at instant {s}", inst.items_at(s).len())));
        }
        if inst.objects_at(s).len() > limits.max_objects {
            return Err(OracleError::Limit(format!("{} objects at instant {s}", inst.objects_at(s).len())));
        }
        if let Some(o) = inst.objects_at(s).iter().find(|o| o.width > limits.max_dim || o.height > limits.max_dim) {
            return Err(OracleError::Limit(format!("object {}x{} exceeds {}", o.width, o.height, limits.max_dim)));
        }
    }
    let mut search = MultiSearch { inst, packer: Packer::new(limits.full_grid), memo: HashMap::new() };
    let mut pool = ObjectPool::initial(inst);
    let mut target = search.best(&pool)?.ok_or(OracleError::Infeasible(inst.p))?;
    let mut decisions = Vec::with_capacity(inst.periods());
    while pool.instant < inst.big_p {
        let (_, chosen) = search.explore(&pool, Some(target))?;
        let Chosen { mut decision, next } = chosen.ok_or(OracleError::Infeasible(pool.instant))?;
        // real positions for the chosen cuts
        let items = inst.items_at(pool.instant);
        let groups = by_object(&item_objects(&decision, items.len()), pool.len());
        decision.placements.clear();
        for (j, idx) in groups.iter().enumerate() {
            if idx.is_empty() {
                continue;
            }
            let o = pool.objects[j];
            let c = decision.cuts[j];
            let (dims, order) = group(items, idx);
            let pos = search
                .packer
                .pack(&dims, o.width - c.right, o.height - c.top)
                .expect("chosen cut packs");
            decision.placements.extend(placements_for(j, &order, &pos));
        }
        decision.placements.sort_by_key(|pl| pl.item);
        let spent: i64 = pool.objects[..pool.purchasable_count]
            .iter()
            .enumerate()
            .filter(|(j, _)| decision.used(*j))
            .map(|(_, o)| o.unit_cost * o.area())
            .sum();
        target = (target.0 - spent, target.1);
        decisions.push(decision);
        pool = next;
    }
    Ok(Plan::assemble(inst, decisions)?)
}

fn item_objects(dec: &PeriodDecision, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for pl in &dec.placements {
        out[pl.item] = pl.object;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    Overlap,
    OutOfCuttingArea,
    BadLeftoverGeometry,
    UnassignedItem,
    DoubleAssignment,
    ExpiredObjectUsed,
    ValueMismatch,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationKind::Overlap => "overlap",
            ViolationKind::OutOfCuttingArea => "out_of_cutting_area",
            ViolationKind::BadLeftoverGeometry => "bad_leftover_geometry",
            ViolationKind::UnassignedItem => "unassigned_item",
            ViolationKind::DoubleAssignment => "double_assignment",
            ViolationKind::ExpiredObjectUsed => "expired_object_used",
            ViolationKind::ValueMismatch => "value_mismatch",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub instant: usize,
    /// Item and/or object indices (0-based) the violation refers to.
    pub indices: Vec<usize>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at s={} {:?}: {}", self.kind, self.instant, self.indices, self.detail)
    }
}

const TOL: f64 = 1e-6;

/// Object as recomputed by the validator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Slot {
    w: i64,
    h: i64,
    c: i64,
    e: usize,
    purchasable: bool,
}

fn nonzero(w: i64, h: i64) -> (i64, i64) {
    if w > 0 && h > 0 {
        (w, h)
    } else {
        (0, 0)
    }
}

/// Checks a plan against every constraint family, recomputing pools,
/// leftovers and totals from the instance. Returns no violations iff the
/// plan is feasible and its totals are right.
pub fn validate_plan(inst: &Instance, plan: &Plan) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |kind, instant, indices: Vec<usize>, detail: String| {
        out.push(Violation { kind, instant, indices, detail });
    };
    let purch = |s: usize| -> Vec<Slot> {
        inst.objects_at(s)
            .iter()
            .map(|o| Slot { w: o.width, h: o.height, c: o.unit_cost, e: inst.xi, purchasable: true })
            .collect()
    };
    if plan.periods.len() != inst.periods() {
        push(
            ViolationKind::UnassignedItem,
            inst.p,
            vec![],
            format!("plan covers {} periods, instance has {}", plan.periods.len(), inst.periods()),
        );
        return out;
    }
    let mut pool = purch(inst.p);
    let mut cost = 0;
    for (k, pp) in plan.periods.iter().enumerate() {
        let s = inst.p + k;
        let stated: Vec<Slot> = pp
            .pool
            .objects
            .iter()
            .enumerate()
            .map(|(j, o)| Slot {
                w: o.width,
                h: o.height,
                c: o.unit_cost,
                e: o.expiration,
                purchasable: j < pp.pool.purchasable_count,
            })
            .collect();
        if stated != pool {
            push(ViolationKind::BadLeftoverGeometry, s, vec![], "object pool differs from the recomputed one".into());
        }
        let dec = &pp.decision;
        let items = inst.items_at(s);
        if dec.cuts.len() != pool.len() {
            push(
                ViolationKind::BadLeftoverGeometry,
                s,
                vec![],
                format!("{} cut entries for {} objects", dec.cuts.len(), pool.len()),
            );
            return out;
        }
        let mut seen = vec![0usize; items.len()];
        let mut used = vec![false; pool.len()];
        let mut by_obj: Vec<Vec<(usize, f64, f64)>> = vec![Vec::new(); pool.len()];
        for pl in &dec.placements {
            if pl.item >= items.len() {
                push(ViolationKind::DoubleAssignment, s, vec![pl.item], "placement of a nonexistent item".into());
                continue;
            }
            seen[pl.item] += 1;
            let live = pool.get(pl.object).is_some_and(|o| o.w > 0 && o.h > 0);
            if !live {
                push(
                    ViolationKind::ExpiredObjectUsed,
                    s,
                    vec![pl.item, pl.object],
                    "item cut from an object that is not available".into(),
                );
                continue;
            }
            used[pl.object] = true;
            by_obj[pl.object].push((pl.item, pl.x, pl.y));
        }
        for (i, &n) in seen.iter().enumerate() {
            if n == 0 {
                push(ViolationKind::UnassignedItem, s, vec![i], "item is not cut".into());
            } else if n > 1 {
                push(ViolationKind::DoubleAssignment, s, vec![i], format!("item is cut {n} times"));
            }
        }
        for (j, placed) in by_obj.iter().enumerate() {
            if placed.is_empty() {
                continue;
            }
            let o = pool[j];
            let c = dec.cuts[j];
            if c.top < 0 || c.top > o.h || c.right < 0 || c.right > o.w {
                push(
                    ViolationKind::BadLeftoverGeometry,
                    s,
                    vec![j],
                    format!("pre-cuts t={} r={} outside a {}x{} object", c.top, c.right, o.w, o.h),
                );
            }
            let (aw, ah) = ((o.w - c.right) as f64, (o.h - c.top) as f64);
            for &(i, x, y) in placed {
                let it = &items[i];
                if x < -TOL || y < -TOL || x + it.width as f64 > aw + TOL || y + it.height as f64 > ah + TOL {
                    push(
                        ViolationKind::OutOfCuttingArea,
                        s,
                        vec![i, j],
                        format!("item at ({x}, {y}) outside the {aw}x{ah} cutting area"),
                    );
                }
            }
            for (a, &(i, xi, yi)) in placed.iter().enumerate() {
                for &(k, xk, yk) in &placed[a + 1..] {
                    let (wi, hi) = (items[i].width as f64, items[i].height as f64);
                    let (wk, hk) = (items[k].width as f64, items[k].height as f64);
                    let dx = (xi + wi).min(xk + wk) - xi.max(xk);
                    let dy = (yi + hi).min(yk + hk) - yi.max(yk);
                    if dx > TOL && dy > TOL {
                        push(ViolationKind::Overlap, s, vec![i, k, j], format!("overlap {dx}x{dy}"));
                    }
                }
            }
        }
        for (j, o) in pool.iter().enumerate() {
            if o.purchasable && used[j] {
                cost += o.c * o.w * o.h;
            }
        }
        let mut next = purch(s + 1);
        for (j, o) in pool.iter().enumerate().filter(|(_, o)| o.e > 0) {
            let c = dec.cuts[j];
            let (top, right) = if used[j] {
                if c.vertical_first {
                    (nonzero(o.w - c.right, c.top), nonzero(c.right, o.h))
                } else {
                    (nonzero(o.w, c.top), nonzero(c.right, o.h - c.top))
                }
            } else if o.purchasable {
                ((0, 0), (0, 0))
            } else {
                ((o.w, o.h), (0, 0))
            };
            for d in [top, right] {
                next.push(Slot { w: d.0, h: d.1, c: o.c, e: o.e - 1, purchasable: false });
            }
        }
        pool = next;
    }
    let stated: Vec<Slot> = plan
        .final_pool
        .objects
        .iter()
        .map(|o| Slot { w: o.width, h: o.height, c: o.unit_cost, e: o.expiration, purchasable: false })
        .collect();
    if stated != pool {
        push(ViolationKind::BadLeftoverGeometry, inst.big_p, vec![], "final pool differs from the recomputed one".into());
    }
    let value: i64 = pool
        .iter()
        .filter(|o| o.w > 0 && o.h > 0 && inst.catalogue.iter().any(|c| c.width <= o.w && c.height <= o.h))
        .map(|o| o.c * o.w * o.h)
        .sum();
    let t = plan.totals;
    if t.cost != cost {
        push(ViolationKind::ValueMismatch, inst.big_p, vec![], format!("cost {} stated, {cost} recomputed", t.cost));
    }
    if t.leftover_value != value {
        push(
            ViolationKind::ValueMismatch,
            inst.big_p,
            vec![],
            format!("leftover value {} stated, {value} recomputed", t.leftover_value),
        );
    }
    let objective = inst.total_purchasable_cost() * cost - value;
    if t.objective != objective {
        push(
            ViolationKind::ValueMismatch,
            inst.big_p,
            vec![],
            format!("objective {} stated, {objective} recomputed", t.objective),
        );
    }
    out
}
