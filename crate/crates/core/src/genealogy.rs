//! Object pools across instants: counts, expiration, leftover spawning,
//! first-order ancestry and used-area bookkeeping.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::instance::{Instance, OrderedItem, PurchasableObject};
use crate::plan::PeriodDecision;

/// (instant, 0-based slot) of an object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjectRef {
    pub instant: usize,
    pub slot: usize,
}

impl ObjectRef {
    pub fn new(instant: usize, slot: usize) -> Self {
        Self { instant, slot }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Origin {
    Purchasable,
    TopLeftoverOf(ObjectRef),
    RightLeftoverOf(ObjectRef),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ObjectState {
    pub width: i64,
    pub height: i64,
    pub unit_cost: i64,
    pub expiration: usize,
    pub origin: Origin,
    /// First-order leftover this object descends from; `None` for
    /// purchasable objects.
    pub ancestor: Option<ObjectRef>,
}

impl ObjectState {
    pub fn purchasable(o: &PurchasableObject, xi: usize) -> Self {
        Self {
            width: o.width,
            height: o.height,
            unit_cost: o.unit_cost,
            expiration: xi,
            origin: Origin::Purchasable,
            ancestor: None,
        }
    }

    pub fn is_purchasable(&self) -> bool {
        self.origin == Origin::Purchasable
    }

    pub fn is_empty(&self) -> bool {
        self.width <= 0 || self.height <= 0
    }

    pub fn area(&self) -> i64 {
        self.width.max(0) * self.height.max(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectPool {
    pub instant: usize,
    pub xi: usize,
    /// m_s; the first `purchasable_count` objects are purchasable.
    pub purchasable_count: usize,
    pub objects: Vec<ObjectState>,
}

impl ObjectPool {
    /// Pool at the first instant: purchasable objects only.
    pub fn initial(inst: &Instance) -> Self {
        Self::purchasables_only(inst.p, inst.xi, inst.objects_at(inst.p))
    }

    pub fn purchasables_only(instant: usize, xi: usize, objs: &[PurchasableObject]) -> Self {
        Self {
            instant,
            xi,
            purchasable_count: objs.len(),
            objects: objs.iter().map(|o| ObjectState::purchasable(o, xi)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    /// Value of the usable leftovers in this pool: area times unit cost of
    /// every leftover that hosts at least one catalogue item.
    pub fn leftover_value(&self, inst: &Instance) -> i64 {
        self.objects[self.purchasable_count..]
            .iter()
            .filter(|o| !o.is_empty() && inst.is_usable(o.width, o.height))
            .map(|o| o.unit_cost * o.area())
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenealogyError {
    #[error("xi out of range: {xi} not in [0, {max}]")]
    XiOutOfRange { xi: usize, max: usize },
    #[error("decision references object {index} but the pool has {len} objects")]
    BadObjectIndex { index: usize, len: usize },
    #[error("decision has {got} cut entries for a pool of {len} objects")]
    CutCount { got: usize, len: usize },
    #[error("object {0:?} has no first-order ancestor")]
    MissingAncestor(ObjectRef),
    #[error("ancestor {0:?} is not tracked")]
    UntrackedAncestor(ObjectRef),
}

/// m̂_s (objects able to spawn leftovers) for s = p..P-1 and m̄_s (pool
/// sizes) for s = p..P.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectCounts {
    pub hat: Vec<usize>,
    pub bar: Vec<usize>,
}

pub fn object_counts(m: &[usize], p: usize, big_p: usize, xi: usize) -> Result<ObjectCounts, GenealogyError> {
    let periods = big_p.saturating_sub(p);
    if xi > periods {
        return Err(GenealogyError::XiOutOfRange { xi, max: periods });
    }
    assert_eq!(m.len(), periods, "one purchasable count per instant");
    let mut hat = Vec::with_capacity(periods);
    for k in 0..periods {
        let mut sum = 0;
        if xi > 0 {
            for l in 0..=k.min(xi - 1) {
                sum += (1usize << l) * m[k - l];
            }
        }
        hat.push(sum);
    }
    let mut bar = Vec::with_capacity(periods + 1);
    for k in 0..=periods {
        let own = if k < periods { m[k] } else { 0 };
        let prev = if k == 0 { 0 } else { hat[k - 1] };
        bar.push(own + 2 * prev);
    }
    Ok(ObjectCounts { hat, bar })
}

/// Indices (0-based) of the objects with positive expiration, in order.
pub fn leftover_generator_indices(pool: &ObjectPool) -> Vec<usize> {
    pool.objects
        .iter()
        .enumerate()
        .filter(|(_, o)| o.expiration > 0)
        .map(|(j, _)| j)
        .collect()
}

/// Leftover dims produced by cutting a `w`×`h` object with pre-cuts
/// (`t`, `r`): (top, right), each as (width, height). Zero-area
/// rectangles are reported as 0×0.
pub fn cut_children(w: i64, h: i64, vertical_first: bool, t: i64, r: i64) -> ((i64, i64), (i64, i64)) {
    let (top, right) = if vertical_first {
        ((w - r, t), (r, h))
    } else {
        ((w, t), (r, h - t))
    };
    (squash(top), squash(right))
}

fn squash(d: (i64, i64)) -> (i64, i64) {
    if d.0 <= 0 || d.1 <= 0 {
        (0, 0)
    } else {
        d
    }
}

/// Builds the pool of instant s+1 from the pool of instant s and its
/// cutting decision.
pub fn spawn_pool(
    pool: &ObjectPool,
    dec: &PeriodDecision,
    next_purchasables: &[PurchasableObject],
) -> Result<ObjectPool, GenealogyError> {
    if dec.cuts.len() != pool.len() {
        return Err(GenealogyError::CutCount { got: dec.cuts.len(), len: pool.len() });
    }
    if let Some(pl) = dec.placements.iter().find(|pl| pl.object >= pool.len()) {
        return Err(GenealogyError::BadObjectIndex { index: pl.object, len: pool.len() });
    }
    let used = dec.used_flags();
    let next = pool.instant + 1;
    let mut objects: Vec<ObjectState> =
        next_purchasables.iter().map(|o| ObjectState::purchasable(o, pool.xi)).collect();
    let base = objects.len();
    for (k, j) in leftover_generator_indices(pool).into_iter().enumerate() {
        let parent = pool.objects[j];
        let pref = ObjectRef::new(pool.instant, j);
        let (top, right) = if used[j] {
            let c = dec.cuts[j];
            cut_children(parent.width, parent.height, c.vertical_first, c.top, c.right)
        } else if parent.is_purchasable() {
            ((0, 0), (0, 0))
        } else {
            (squash((parent.width, parent.height)), (0, 0))
        };
        let top_slot = base + 2 * k;
        let anc = |slot: usize| {
            if parent.is_purchasable() {
                Some(ObjectRef::new(next, slot))
            } else {
                parent.ancestor
            }
        };
        objects.push(ObjectState {
            width: top.0,
            height: top.1,
            unit_cost: parent.unit_cost,
            expiration: parent.expiration - 1,
            origin: Origin::TopLeftoverOf(pref),
            ancestor: anc(top_slot),
        });
        objects.push(ObjectState {
            width: right.0,
            height: right.1,
            unit_cost: parent.unit_cost,
            expiration: parent.expiration - 1,
            origin: Origin::RightLeftoverOf(pref),
            ancestor: anc(top_slot + 1),
        });
    }
    Ok(ObjectPool { instant: next, xi: pool.xi, purchasable_count: base, objects })
}

/// Static description of a pool slot, known before any decision is made.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotInfo {
    pub expiration: usize,
    pub unit_cost: i64,
    pub origin: Origin,
}

/// Slot layout of every instant s = p..P (expirations, unit costs and
/// parents), which does not depend on the cutting decisions.
pub fn slot_layout(inst: &Instance) -> Vec<Vec<SlotInfo>> {
    let mut out: Vec<Vec<SlotInfo>> = Vec::with_capacity(inst.periods() + 1);
    for s in inst.p..=inst.big_p {
        let mut slots: Vec<SlotInfo> = inst
            .objects_at(s)
            .iter()
            .map(|o| SlotInfo { expiration: inst.xi, unit_cost: o.unit_cost, origin: Origin::Purchasable })
            .collect();
        if let Some(prev) = out.last() {
            for (j, g) in prev.iter().enumerate().filter(|(_, g)| g.expiration > 0) {
                let pref = ObjectRef::new(s - 1, j);
                for origin in [Origin::TopLeftoverOf(pref), Origin::RightLeftoverOf(pref)] {
                    slots.push(SlotInfo { expiration: g.expiration - 1, unit_cost: g.unit_cost, origin });
                }
            }
        }
        out.push(slots);
    }
    out
}

/// Per first-order leftover: area of items cut from it or its descendants
/// (a) and its usable area (A, zero when no catalogue item fits).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UsageTracker {
    pub used: BTreeMap<ObjectRef, i64>,
    pub realized: BTreeMap<ObjectRef, i64>,
}

impl UsageTracker {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers the first-order leftovers of `pool` (children of
    /// purchasable objects) with their usable areas.
    pub fn register_first_order(&mut self, pool: &ObjectPool, inst: &Instance) {
        for (j, o) in pool.objects.iter().enumerate() {
            let key = ObjectRef::new(pool.instant, j);
            if o.ancestor == Some(key) {
                let a = if !o.is_empty() && inst.is_usable(o.width, o.height) { o.area() } else { 0 };
                self.realized.insert(key, a);
                self.used.entry(key).or_insert(0);
            }
        }
    }
}

/// Credits an item cut from object `j` to that object's first-order
/// ancestor. Items cut from purchasable objects leave the tracker as is.
pub fn record_item_usage(
    tr: &mut UsageTracker,
    pool: &ObjectPool,
    item: &OrderedItem,
    j: usize,
) -> Result<(), GenealogyError> {
    let o = pool
        .objects
        .get(j)
        .ok_or(GenealogyError::BadObjectIndex { index: j, len: pool.len() })?;
    if o.is_purchasable() {
        return Ok(());
    }
    let here = ObjectRef::new(pool.instant, j);
    let key = o.ancestor.ok_or(GenealogyError::MissingAncestor(here))?;
    let a = tr.used.get_mut(&key).ok_or(GenealogyError::UntrackedAncestor(key))?;
    *a += item.area();
    Ok(())
}

/// f = a / A for every first-order leftover with A > 0.
pub fn utilization_fractions(tr: &UsageTracker) -> BTreeMap<ObjectRef, f64> {
    tr.realized
        .iter()
        .filter(|(_, &area)| area > 0)
        .map(|(k, &area)| (*k, *tr.used.get(k).unwrap_or(&0) as f64 / area as f64))
        .collect()
}

/// Text tree of objects and their leftovers across the given pools.
pub fn dump_genealogy(pools: &[ObjectPool]) -> String {
    let mut children: BTreeMap<ObjectRef, Vec<ObjectRef>> = BTreeMap::new();
    let mut roots = Vec::new();
    let mut lookup = BTreeMap::new();
    for pool in pools {
        for (j, o) in pool.objects.iter().enumerate() {
            let me = ObjectRef::new(pool.instant, j);
            lookup.insert(me, *o);
            match o.origin {
                Origin::Purchasable => roots.push(me),
                Origin::TopLeftoverOf(p) | Origin::RightLeftoverOf(p) => children.entry(p).or_default().push(me),
            }
        }
    }
    fn walk(
        out: &mut String,
        node: ObjectRef,
        depth: usize,
        lookup: &BTreeMap<ObjectRef, ObjectState>,
        children: &BTreeMap<ObjectRef, Vec<ObjectRef>>,
    ) {
        let o = lookup[&node];
        let kind = match o.origin {
            Origin::Purchasable => "object",
            Origin::TopLeftoverOf(_) => "top",
            Origin::RightLeftoverOf(_) => "right",
        };
        let _ = write!(
            out,
            "{:indent$}{kind} s={} j={} {}x{} c={} e={}",
            "",
            node.instant,
            node.slot + 1,
            o.width,
            o.height,
            o.unit_cost,
            o.expiration,
            indent = 2 * depth
        );
        if let Some(a) = o.ancestor {
            let _ = write!(out, " ancestor=({},{})", a.instant, a.slot + 1);
        }
        out.push('\n');
        for c in children.get(&node).map(Vec::as_slice).unwrap_or(&[]) {
            walk(out, *c, depth + 1, lookup, children);
        }
    }
    let mut out = String::new();
    for r in roots {
        walk(&mut out, r, 0, &lookup, &children);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::{ObjectCut, Placement};

    #[test]
    fn counts_follow_the_recurrences() {
        let c = object_counts(&[2, 2, 2], 0, 3, 3).unwrap();
        assert_eq!(c.hat, vec![2, 6, 14]);
        assert_eq!(c.bar, vec![2, 6, 14, 28]);

        // ξ = 1 keeps only the ℓ = 0 term: m̄_3 = m_3 + 2·m_2 = 2 + 2 = 4
        let c = object_counts(&[3, 1, 1, 2], 0, 4, 1).unwrap();
        assert_eq!(c.hat, vec![3, 1, 1, 2]);
        assert_eq!(c.bar, vec![3, 7, 3, 4, 4]);

        let c = object_counts(&[4, 1, 3], 0, 3, 0).unwrap();
        assert_eq!(c.hat, vec![0, 0, 0]);
        assert_eq!(c.bar, vec![4, 1, 3, 0]);

        assert!(object_counts(&[1, 1], 0, 2, 3).is_err());
    }

    fn pool_with_exp(e: &[usize]) -> ObjectPool {
        ObjectPool {
            instant: 0,
            xi: 2,
            purchasable_count: e.len(),
            objects: e
                .iter()
                .map(|&x| ObjectState {
                    width: 5,
                    height: 5,
                    unit_cost: 1,
                    expiration: x,
                    origin: Origin::Purchasable,
                    ancestor: None,
                })
                .collect(),
        }
    }

    #[test]
    fn generators_are_positive_expirations() {
        assert_eq!(leftover_generator_indices(&pool_with_exp(&[2, 2, 2, 2])), vec![0, 1, 2, 3]);
        assert!(leftover_generator_indices(&pool_with_exp(&[0, 0, 0])).is_empty());
    }

    #[test]
    fn spawn_geometry_and_survival() {
        let objs = [PurchasableObject::new(21, 17, 1), PurchasableObject::new(10, 8, 1)];
        let pool = ObjectPool::purchasables_only(0, 2, &objs);
        let mut dec = PeriodDecision::empty(0, 2);
        dec.cuts[0] = ObjectCut { vertical_first: true, top: 6, right: 2 };
        dec.placements.push(Placement { item: 0, object: 0, x: 0.0, y: 0.0 });
        let next = spawn_pool(&pool, &dec, &[]).unwrap();
        assert_eq!(next.len(), 4);
        assert_eq!((next.objects[0].width, next.objects[0].height), (19, 6));
        assert_eq!((next.objects[1].width, next.objects[1].height), (2, 17));
        assert_eq!(next.objects[0].expiration, 1);
        assert_eq!(next.objects[0].ancestor, Some(ObjectRef::new(1, 0)));
        assert!(next.objects[2].is_empty() && next.objects[3].is_empty());

        dec.cuts[0].vertical_first = false;
        let next = spawn_pool(&pool, &dec, &[]).unwrap();
        assert_eq!((next.objects[0].width, next.objects[0].height), (21, 6));
        assert_eq!((next.objects[1].width, next.objects[1].height), (2, 11));

        // an unused leftover survives as its own top leftover
        let lone = ObjectPool {
            instant: 1,
            xi: 3,
            purchasable_count: 0,
            objects: vec![ObjectState {
                width: 19,
                height: 8,
                unit_cost: 1,
                expiration: 2,
                origin: Origin::TopLeftoverOf(ObjectRef::new(0, 1)),
                ancestor: Some(ObjectRef::new(1, 0)),
            }],
        };
        let next = spawn_pool(&lone, &PeriodDecision::empty(1, 1), &objs[..1]).unwrap();
        assert_eq!(next.purchasable_count, 1);
        let top = next.objects[1];
        assert_eq!((top.width, top.height, top.expiration), (19, 8, 1));
        assert_eq!(top.ancestor, Some(ObjectRef::new(1, 0)));
        assert!(next.objects[2].is_empty());
    }

    #[test]
    fn usage_goes_to_first_order_ancestor() {
        let text = "P 2 XI 2 D 1\nCAT 1 1\nPERIOD 0 M 1 N 1\nOBJ 10 10 1\nITEM 4 10\nPERIOD 1 M 0 N 1\nITEM 3 3\n";
        let inst = crate::instance::parse_instance(text).unwrap();
        let pool = ObjectPool::initial(&inst);
        let mut dec = PeriodDecision::empty(0, 1);
        dec.cuts[0] = ObjectCut { vertical_first: true, top: 0, right: 6 };
        dec.placements.push(Placement { item: 0, object: 0, x: 0.0, y: 0.0 });
        let mut tr = UsageTracker::new();
        record_item_usage(&mut tr, &pool, &inst.orders[0][0], 0).unwrap();
        assert!(tr.used.is_empty());
        let p1 = spawn_pool(&pool, &dec, &[]).unwrap();
        tr.register_first_order(&p1, &inst);
        record_item_usage(&mut tr, &p1, &inst.orders[1][0], 1).unwrap();
        let f = utilization_fractions(&tr);
        assert_eq!(f.len(), 1);
        assert!((f[&ObjectRef::new(1, 1)] - 9.0 / 60.0).abs() < 1e-12);
    }

    #[test]
    fn layout_matches_counts() {
        let text = "P 3 XI 3 D 1\nCAT 3 1\nPERIOD 0 M 2 N 0\nOBJ 10 8 1\nOBJ 6 6 1\nPERIOD 1 M 2 N 0\nOBJ 10 8 1\nOBJ 6 6 1\nPERIOD 2 M 2 N 0\nOBJ 10 8 1\nOBJ 6 6 1\n";
        let inst = crate::instance::parse_instance(text).unwrap();
        let lay = slot_layout(&inst);
        let sizes: Vec<usize> = lay.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![2, 6, 14, 28]);
        assert_eq!(lay[1].iter().filter(|s| s.expiration > 0).count(), 6);
    }
}
