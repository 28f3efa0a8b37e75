//! Cutting decisions for one instant and assembled multi-period plans.

use crate::genealogy::{spawn_pool, GenealogyError, ObjectPool};
use crate::instance::Instance;

/// Pre-cut choice for one object. `vertical_first` is η = 1: the vertical
/// cut is made first, so the right leftover spans the full object height.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct ObjectCut {
    pub vertical_first: bool,
    /// Height t of the top strip.
    pub top: i64,
    /// Width r of the right strip.
    pub right: i64,
}

/// Bottom-left corner of an item inside its object.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub item: usize,
    pub object: usize,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodDecision {
    pub instant: usize,
    /// One entry per pool slot; ignored for unused objects.
    pub cuts: Vec<ObjectCut>,
    /// One entry per ordered item of the instant, in item order.
    pub placements: Vec<Placement>,
}

impl PeriodDecision {
    pub fn empty(instant: usize, objects: usize) -> Self {
        Self { instant, cuts: vec![ObjectCut::default(); objects], placements: Vec::new() }
    }

    pub fn used(&self, j: usize) -> bool {
        self.placements.iter().any(|pl| pl.object == j)
    }

    pub fn used_flags(&self) -> Vec<bool> {
        let mut u = vec![false; self.cuts.len()];
        for pl in &self.placements {
            if pl.object < u.len() {
                u[pl.object] = true;
            }
        }
        u
    }

    /// Items cut from object `j`, by item index.
    pub fn items_in(&self, j: usize) -> Vec<usize> {
        self.placements.iter().filter(|pl| pl.object == j).map(|pl| pl.item).collect()
    }

    /// Item centre, the coordinate system of the MILP models.
    pub fn center(pl: &Placement, w: i64, h: i64) -> (f64, f64) {
        (pl.x + w as f64 / 2.0, pl.y + h as f64 / 2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PlanTotals {
    /// Σ c·W·H over used purchasable objects.
    pub cost: i64,
    /// Value of usable leftovers available at the last instant.
    pub leftover_value: i64,
    /// Full-model objective C·cost − leftover_value.
    pub objective: i64,
}

impl PlanTotals {
    pub fn new(cost: i64, leftover_value: i64, scale: i64) -> Self {
        Self { cost, leftover_value, objective: scale * cost - leftover_value }
    }

    /// Lexicographic key: lower cost first, then higher leftover value.
    pub fn key(&self) -> (i64, i64) {
        (self.cost, -self.leftover_value)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodPlan {
    /// Pool available at the instant, before cutting.
    pub pool: ObjectPool,
    pub decision: PeriodDecision,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub periods: Vec<PeriodPlan>,
    /// Pool at the last instant; its leftovers carry the final value.
    pub final_pool: ObjectPool,
    pub totals: PlanTotals,
}

impl Plan {
    /// Chains the decisions from the first pool of `inst` and computes the
    /// totals.
    pub fn assemble(inst: &Instance, decisions: Vec<PeriodDecision>) -> Result<Plan, GenealogyError> {
        let mut pool = ObjectPool::initial(inst);
        let mut periods = Vec::with_capacity(decisions.len());
        let mut cost = 0;
        for dec in decisions {
            let used = dec.used_flags();
            cost += pool.objects[..pool.purchasable_count]
                .iter()
                .zip(&used)
                .filter(|(_, &u)| u)
                .map(|(o, _)| o.unit_cost * o.area())
                .sum::<i64>();
            let next = spawn_pool(&pool, &dec, inst.objects_at(pool.instant + 1))?;
            periods.push(PeriodPlan { pool, decision: dec });
            pool = next;
        }
        let totals = PlanTotals::new(cost, pool.leftover_value(inst), inst.total_purchasable_cost());
        Ok(Plan { periods, final_pool: pool, totals })
    }

    pub fn final_leftovers(&self) -> Vec<(i64, i64)> {
        self.final_pool
            .objects
            .iter()
            .filter(|o| !o.is_empty())
            .map(|o| (o.width, o.height))
            .collect()
    }
}
