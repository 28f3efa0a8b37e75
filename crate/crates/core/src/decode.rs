//! Conversion between MILP solutions and cutting plans.

use thiserror::Error;

use crate::genealogy::{spawn_pool, GenealogyError, ObjectPool};
use crate::instance::{CatalogueItem, Instance, OrderedItem};
use crate::model::{amortized_cost, ModelSpec, SubproblemState, UtilizationTable};
use crate::oracle::{object_term, OracleError, SingleObjective};
use crate::plan::{ObjectCut, PeriodDecision, Placement, Plan};

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("model has no variable {0}")]
    MissingVariable(String),
    #[error("item {item} of instant {instant} is not assigned to any object")]
    Unassigned { instant: usize, item: usize },
    #[error("solution has {got} values for {want} variables")]
    Length { got: usize, want: usize },
    #[error(transparent)]
    Genealogy(#[from] GenealogyError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

const TOL: f64 = 1e-6;

fn value(ms: &ModelSpec, values: &[f64], family: &str, idx: &[usize]) -> Result<f64, DecodeError> {
    let k = ms.find(family, idx).ok_or_else(|| DecodeError::MissingVariable(format!("{family}{idx:?}")))?;
    Ok(values[k])
}

/// Pushes items down and left until none can move. The result is a packing
/// whose corners are sums of item dimensions.
fn compact(dims: &[(i64, i64)], pos: &mut [(f64, f64)]) {
    let n = dims.len();
    let overlap = |a0: f64, a1: f64, b0: f64, b1: f64| a1.min(b1) - a0.max(b0) > TOL;
    for _ in 0..10_000 {
        let mut moved = false;
        for i in 0..n {
            let (w, h) = (dims[i].0 as f64, dims[i].1 as f64);
            let (x, y) = pos[i];
            let floor = (0..n)
                .filter(|&k| k != i)
                .filter(|&k| overlap(x, x + w, pos[k].0, pos[k].0 + dims[k].0 as f64))
                .map(|k| pos[k].1 + dims[k].1 as f64)
                .filter(|&top| top <= y + TOL)
                .fold(0.0, f64::max);
            if floor < y - 1e-9 {
                pos[i].1 = floor;
                moved = true;
            }
            let y = pos[i].1;
            let wall = (0..n)
                .filter(|&k| k != i)
                .filter(|&k| overlap(y, y + h, pos[k].1, pos[k].1 + dims[k].1 as f64))
                .map(|k| pos[k].0 + dims[k].0 as f64)
                .filter(|&right| right <= x + TOL)
                .fold(0.0, f64::max);
            if wall < x - 1e-9 {
                pos[i].0 = wall;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    for p in pos.iter_mut() {
        *p = (p.0.round(), p.1.round());
    }
}

/// Reads the decision of instant `s` from a model solution whose stage at
/// `s` has the slots of `pool`. Corners are compacted to integers and the
/// pre-cuts rounded down.
pub fn decode_stage(
    ms: &ModelSpec,
    values: &[f64],
    pool: &ObjectPool,
    items: &[OrderedItem],
) -> Result<PeriodDecision, DecodeError> {
    if values.len() != ms.variables.len() {
        return Err(DecodeError::Length { got: values.len(), want: ms.variables.len() });
    }
    let s = pool.instant;
    let m = pool.len();
    let mut dec = PeriodDecision::empty(s, m);
    let mut assigned = Vec::with_capacity(items.len());
    for (i, it) in items.iter().enumerate() {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..m {
            if let Some(k) = ms.find("v", &[s, i + 1, j + 1]) {
                if values[k] > 0.5 && best.map_or(true, |(_, b)| values[k] > b) {
                    best = Some((j, values[k]));
                }
            }
        }
        let (j, _) = best.ok_or(DecodeError::Unassigned { instant: s, item: i })?;
        let x = value(ms, values, "x", &[s, i + 1])? - it.width as f64 / 2.0;
        let y = value(ms, values, "y", &[s, i + 1])? - it.height as f64 / 2.0;
        assigned.push((j, x, y));
    }
    for j in 0..m {
        let idx: Vec<usize> = (0..items.len()).filter(|&i| assigned[i].0 == j).collect();
        if idx.is_empty() {
            continue;
        }
        let dims: Vec<(i64, i64)> = idx.iter().map(|&i| (items[i].width, items[i].height)).collect();
        let mut pos: Vec<(f64, f64)> = idx.iter().map(|&i| (assigned[i].1.max(0.0), assigned[i].2.max(0.0))).collect();
        compact(&dims, &mut pos);
        let o = pool.objects[j];
        let max_x = dims.iter().zip(&pos).map(|(d, p)| p.0 as i64 + d.0).max().unwrap_or(0);
        let max_y = dims.iter().zip(&pos).map(|(d, p)| p.1 as i64 + d.1).max().unwrap_or(0);
        let t = value(ms, values, "t", &[s, j + 1])?;
        let r = value(ms, values, "r", &[s, j + 1])?;
        let eta = value(ms, values, "eta", &[s, j + 1])?;
        dec.cuts[j] = ObjectCut {
            vertical_first: eta > 0.5,
            top: ((t + TOL).floor() as i64).clamp(0, (o.height - max_y).max(0)),
            right: ((r + TOL).floor() as i64).clamp(0, (o.width - max_x).max(0)),
        };
        for (&i, p) in idx.iter().zip(&pos) {
            dec.placements.push(Placement { item: i, object: j, x: p.0, y: p.1 });
        }
    }
    dec.placements.sort_by_key(|pl| pl.item);
    Ok(dec)
}

/// Plan encoded by a solution of the full model.
pub fn decode_full(ms: &ModelSpec, inst: &Instance, values: &[f64]) -> Result<Plan, DecodeError> {
    let mut pool = ObjectPool::initial(inst);
    let mut decisions = Vec::with_capacity(inst.periods());
    while pool.instant < inst.big_p {
        let dec = decode_stage(ms, values, &pool, inst.items_at(pool.instant))?;
        pool = spawn_pool(&pool, &dec, inst.objects_at(pool.instant + 1))?;
        decisions.push(dec);
    }
    Ok(Plan::assemble(inst, decisions)?)
}

/// Re-chooses η, t and r of every used object to minimize the subproblem
/// objective with the placements fixed. Never makes the decision worse.
pub fn polish(
    st: &SubproblemState,
    dec: &PeriodDecision,
    objective: SingleObjective<'_>,
) -> Result<PeriodDecision, DecodeError> {
    let mut out = dec.clone();
    for j in 0..st.pool.len() {
        let placed: Vec<&Placement> = dec.placements.iter().filter(|pl| pl.object == j).collect();
        if placed.is_empty() {
            continue;
        }
        let o = st.pool.objects[j];
        if o.expiration == 0 {
            continue;
        }
        let max_x = placed.iter().map(|pl| pl.x.round() as i64 + st.items[pl.item].width).max().unwrap_or(0);
        let max_y = placed.iter().map(|pl| pl.y.round() as i64 + st.items[pl.item].height).max().unwrap_or(0);
        let mut best = (object_term(st, j, true, dec.cuts[j], objective)?, dec.cuts[j]);
        for vertical_first in [true, false] {
            for top in 0..=(o.height - max_y).max(0) {
                for right in 0..=(o.width - max_x).max(0) {
                    let cut = ObjectCut { vertical_first, top, right };
                    let term = object_term(st, j, true, cut, objective)?;
                    if term < best.0 {
                        best = (term, cut);
                    }
                }
            }
        }
        out.cuts[j] = best.1;
    }
    Ok(out)
}

/// Model geometry of an object: zero-area leftovers keep their nonzero side.
type Dims = (i64, i64);

struct Encoder<'a> {
    ms: &'a ModelSpec,
    values: Vec<f64>,
}

impl Encoder<'_> {
    fn set(&mut self, family: &str, idx: &[usize], v: f64) -> Result<(), DecodeError> {
        match self.ms.find(family, idx) {
            Some(k) => {
                self.values[k] = v;
                Ok(())
            }
            None if v == 0.0 => Ok(()),
            None => Err(DecodeError::MissingVariable(format!("{family}{idx:?}"))),
        }
    }

    /// Writes one stage and returns the model dims of the spawned leftovers,
    /// two per generator.
    fn stage(
        &mut self,
        s: usize,
        dims: &[Dims],
        pool: &ObjectPool,
        items: &[OrderedItem],
        dec: &PeriodDecision,
    ) -> Result<Vec<Dims>, DecodeError> {
        let used = dec.used_flags();
        for (j, &(w, h)) in dims.iter().enumerate() {
            self.set("Wbar", &[s, j + 1], w as f64)?;
            self.set("Hbar", &[s, j + 1], h as f64)?;
            self.set("u", &[s, j + 1], f64::from(u8::from(used[j])))?;
            if used[j] {
                let c = dec.cuts[j];
                self.set("eta", &[s, j + 1], f64::from(u8::from(c.vertical_first)))?;
                self.set("t", &[s, j + 1], c.top as f64)?;
                self.set("r", &[s, j + 1], c.right as f64)?;
            }
        }
        let placements = canonical_twins(items, &dec.placements);
        let mut centers = vec![(0.0, 0.0, usize::MAX); items.len()];
        for pl in &placements {
            let it = &items[pl.item];
            let (cx, cy) = PeriodDecision::center(pl, it.width, it.height);
            centers[pl.item] = (cx, cy, pl.object);
            self.set("v", &[s, pl.item + 1, pl.object + 1], 1.0)?;
            self.set("x", &[s, pl.item + 1], cx)?;
            self.set("y", &[s, pl.item + 1], cy)?;
        }
        for i in 0..items.len() {
            for k in i + 1..items.len() {
                let (xi, yi, ji) = centers[i];
                let (xk, yk, jk) = centers[k];
                // left/below first: identical pairs only allow those
                let (pi, tau) = if ji != jk {
                    (0.0, 1.0)
                } else {
                    let sw = (items[i].width + items[k].width) as f64 / 2.0;
                    let sh = (items[i].height + items[k].height) as f64 / 2.0;
                    if xk - xi >= sw - TOL {
                        (0.0, 1.0)
                    } else if yk - yi >= sh - TOL {
                        (1.0, 1.0)
                    } else if xi - xk >= sw - TOL {
                        (0.0, 0.0)
                    } else {
                        (1.0, 0.0)
                    }
                };
                self.set("pi", &[s, i + 1, k + 1], pi)?;
                self.set("tau", &[s, i + 1, k + 1], tau)?;
            }
        }
        let mut children = Vec::new();
        for (j, &(w, h)) in dims.iter().enumerate() {
            if pool.objects[j].expiration == 0 {
                continue;
            }
            let c = dec.cuts[j];
            let pair = if used[j] {
                if c.vertical_first {
                    ((w - c.right, c.top), (c.right, h))
                } else {
                    ((w, c.top), (c.right, h - c.top))
                }
            } else if j < pool.purchasable_count {
                ((0, 0), (0, 0))
            } else {
                ((w, h), (0, 0))
            };
            children.push(pair.0);
            children.push(pair.1);
        }
        Ok(children)
    }

    /// Writes dims, bits and value of the leftover slots of the last
    /// instant; returns γ per slot.
    fn last(
        &mut self,
        s: usize,
        base: usize,
        dims: &[Dims],
        catalogue: &[CatalogueItem],
    ) -> Result<Vec<i64>, DecodeError> {
        let bits = self.ms.meta.bits;
        let mut gammas = Vec::with_capacity(dims.len());
        for (k, &(w, h)) in dims.iter().enumerate() {
            let j = base + k + 1;
            self.set("Wbar", &[s, j], w as f64)?;
            self.set("Hbar", &[s, j], h as f64)?;
            for l in 0..bits {
                let bit = (w >> l) & 1;
                self.set("theta", &[j, l + 1], bit as f64)?;
                self.set("omega", &[j, l + 1], (bit * h) as f64)?;
            }
            let mut any = false;
            for (i, c) in catalogue.iter().enumerate() {
                let fits = c.width <= w && c.height <= h;
                any |= fits;
                self.set("zeta", &[j, i + 1], f64::from(u8::from(fits)))?;
            }
            let gamma = if any { w * h } else { 0 };
            self.set("gamma", &[j], gamma as f64)?;
            gammas.push(gamma);
        }
        Ok(gammas)
    }
}

/// Relabels identical items so that lower indices sit in lower objects and,
/// inside one object, left of or below every later twin.
fn canonical_twins(items: &[OrderedItem], placements: &[Placement]) -> Vec<Placement> {
    let mut out = placements.to_vec();
    let mut done = vec![false; items.len()];
    for i in 0..items.len() {
        if done[i] {
            continue;
        }
        let dims = (items[i].width, items[i].height);
        let group: Vec<usize> =
            (i..items.len()).filter(|&k| (items[k].width, items[k].height) == dims).collect();
        for &k in &group {
            done[k] = true;
        }
        if group.len() < 2 {
            continue;
        }
        let mut slots: Vec<usize> = out.iter().enumerate().filter(|(_, p)| group.contains(&p.item)).map(|(n, _)| n).collect();
        let mut rest: Vec<Placement> = slots.iter().map(|&n| out[n]).collect();
        let before = |a: &Placement, b: &Placement| {
            a.object < b.object
                || (a.object == b.object
                    && (b.x >= a.x + dims.0 as f64 - TOL || b.y >= a.y + dims.1 as f64 - TOL))
        };
        let mut ordered = Vec::with_capacity(rest.len());
        while !rest.is_empty() {
            let pick = (0..rest.len())
                .find(|&a| (0..rest.len()).all(|b| a == b || before(&rest[a], &rest[b])))
                .unwrap_or(0);
            ordered.push(rest.remove(pick));
        }
        slots.sort_by_key(|&n| out[n].item);
        let labels: Vec<usize> = slots.iter().map(|&n| out[n].item).collect();
        for ((n, mut pl), item) in slots.into_iter().zip(ordered).zip(labels) {
            pl.item = item;
            out[n] = pl;
        }
    }
    out
}

fn pool_dims(pool: &ObjectPool) -> Vec<Dims> {
    pool.objects.iter().map(|o| (o.width, o.height)).collect()
}

/// Full-model assignment realizing a plan; its objective is
/// C·cost − leftover value.
pub fn encode_plan(ms: &ModelSpec, inst: &Instance, plan: &Plan) -> Result<Vec<f64>, DecodeError> {
    let mut enc = Encoder { ms, values: vec![0.0; ms.variables.len()] };
    let mut dims = pool_dims(&plan.periods[0].pool);
    for pp in &plan.periods {
        let s = pp.pool.instant;
        let children = enc.stage(s, &dims, &pp.pool, inst.items_at(s), &pp.decision)?;
        let mut next: Vec<Dims> = inst.objects_at(s + 1).iter().map(|o| (o.width, o.height)).collect();
        next.extend(children);
        dims = next;
    }
    enc.last(inst.big_p, 0, &dims, &inst.catalogue)?;
    Ok(enc.values)
}

/// Subproblem assignment realizing a decision (with λ set to its largest
/// feasible value when δ is given).
pub fn encode_decision(
    ms: &ModelSpec,
    st: &SubproblemState,
    dec: &PeriodDecision,
    delta: Option<&UtilizationTable>,
) -> Result<Vec<f64>, DecodeError> {
    let mut enc = Encoder { ms, values: vec![0.0; ms.variables.len()] };
    let s = st.instant;
    let children = enc.stage(s, &pool_dims(&st.pool), &st.pool, &st.items, dec)?;
    let gammas = enc.last(s + 1, st.next_purchasable_count, &children, &st.catalogue)?;
    if let Some(delta) = delta {
        let used = dec.used_flags();
        for j in 0..st.pool.purchasable_count {
            let Some((top, right)) = st.child_slots(j) else { continue };
            let o = st.pool.objects[j];
            let base = st.next_purchasable_count;
            let d = |slot: usize| delta.get(&crate::genealogy::ObjectRef::new(s + 1, slot)).copied().unwrap_or(0.0);
            let (g1, g2) = (gammas[top - base], gammas[right - base]);
            let credit = o.unit_cost * o.area() * i64::from(used[j])
                - amortized_cost(o.unit_cost, o.width, o.height, used[j], d(top), g1, d(right), g2);
            enc.set("lambda", &[s, j + 1], credit.min(o.unit_cost * o.area()) as f64)?;
        }
    }
    Ok(enc.values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compaction_reaches_integer_corners() {
        let dims = [(3, 4), (3, 1)];
        let mut pos = [(0.25, 0.5), (0.5, 4.75)];
        compact(&dims, &mut pos);
        assert_eq!(pos, [(0.0, 0.0), (0.0, 4.0)]);
    }

    #[test]
    fn compaction_keeps_side_by_side_items_apart() {
        let dims = [(2, 2), (2, 2)];
        let mut pos = [(0.5, 0.5), (2.75, 1.5)];
        compact(&dims, &mut pos);
        assert_eq!(pos, [(0.0, 0.0), (2.0, 0.0)]);
    }
}
