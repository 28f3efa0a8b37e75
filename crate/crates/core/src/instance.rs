//! Problem instances: data types, the line-oriented file format, validation
//! and a seeded random generator.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PurchasableObject {
    pub width: i64,
    pub height: i64,
    pub unit_cost: i64,
}

impl PurchasableObject {
    pub fn new(width: i64, height: i64, unit_cost: i64) -> Self {
        Self { width, height, unit_cost }
    }

    pub fn cost(&self) -> i64 {
        self.unit_cost * self.width * self.height
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OrderedItem {
    pub width: i64,
    pub height: i64,
}

impl OrderedItem {
    pub fn new(width: i64, height: i64) -> Self {
        Self { width, height }
    }

    pub fn area(&self) -> i64 {
        self.width * self.height
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CatalogueItem {
    pub width: i64,
    pub height: i64,
}

impl CatalogueItem {
    pub fn new(width: i64, height: i64) -> Self {
        Self { width, height }
    }
}

/// Immutable problem data. `purchasable[k]` and `orders[k]` belong to
/// instant `p + k`; there is nothing to buy or cut at instant `big_p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub p: usize,
    pub big_p: usize,
    pub xi: usize,
    pub purchasable: Vec<Vec<PurchasableObject>>,
    pub orders: Vec<Vec<OrderedItem>>,
    pub catalogue: Vec<CatalogueItem>,
}

impl Instance {
    pub fn periods(&self) -> usize {
        self.big_p - self.p
    }

    pub fn objects_at(&self, s: usize) -> &[PurchasableObject] {
        if s < self.p || s >= self.big_p {
            return &[];
        }
        &self.purchasable[s - self.p]
    }

    pub fn items_at(&self, s: usize) -> &[OrderedItem] {
        if s < self.p || s >= self.big_p {
            return &[];
        }
        &self.orders[s - self.p]
    }

    /// Purchasable counts m_s for s = p..P-1.
    pub fn m(&self) -> Vec<usize> {
        self.purchasable.iter().map(Vec::len).collect()
    }

    pub fn n(&self) -> Vec<usize> {
        self.orders.iter().map(Vec::len).collect()
    }

    /// Total cost of every purchasable object in the horizon.
    pub fn total_purchasable_cost(&self) -> i64 {
        self.purchasable.iter().flatten().map(PurchasableObject::cost).sum()
    }

    /// Whether a `w`×`h` rectangle can host at least one catalogue item.
    pub fn is_usable(&self, w: i64, h: i64) -> bool {
        self.catalogue.iter().any(|c| c.width <= w && c.height <= h)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {field}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub field: String,
    pub message: String,
}

fn perr(line: usize, field: &str, message: impl Into<String>) -> ParseError {
    ParseError { line, field: field.to_string(), message: message.into() }
}

struct Tokens<'a> {
    lineno: usize,
    toks: Vec<&'a str>,
}

impl<'a> Tokens<'a> {
    fn keyword(&self, kw: &str, arity: usize) -> Result<(), ParseError> {
        if self.toks.first() != Some(&kw) {
            return Err(perr(
                self.lineno,
                kw,
                format!("expected `{kw}`, found `{}`", self.toks.first().unwrap_or(&"")),
            ));
        }
        if self.toks.len() != 1 + arity {
            return Err(perr(self.lineno, kw, format!("expected {arity} values")));
        }
        Ok(())
    }

    fn int(&self, pos: usize, field: &str) -> Result<i64, ParseError> {
        self.toks[pos]
            .parse::<i64>()
            .map_err(|_| perr(self.lineno, field, format!("`{}` is not an integer", self.toks[pos])))
    }

    fn positive(&self, pos: usize, field: &str) -> Result<i64, ParseError> {
        let v = self.int(pos, field)?;
        if v <= 0 {
            return Err(perr(self.lineno, field, format!("non-positive dimension {v}")));
        }
        Ok(v)
    }

    fn count(&self, pos: usize, field: &str) -> Result<usize, ParseError> {
        let v = self.int(pos, field)?;
        usize::try_from(v).map_err(|_| perr(self.lineno, field, format!("negative value {v}")))
    }
}

fn significant_lines(text: &str) -> Vec<Tokens<'_>> {
    text.lines()
        .enumerate()
        .filter_map(|(k, raw)| {
            let body = raw.split('#').next().unwrap_or("");
            let toks: Vec<&str> = body.split_whitespace().collect();
            (!toks.is_empty()).then_some(Tokens { lineno: k + 1, toks })
        })
        .collect()
}

/// Parses an instance file.
pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let lines = significant_lines(text);
    let mut it = lines.iter().peekable();
    let head = it.next().ok_or_else(|| perr(1, "P", "malformed header: empty input"))?;
    if head.toks.len() != 6 || head.toks[0] != "P" || head.toks[2] != "XI" || head.toks[4] != "D" {
        return Err(perr(head.lineno, "header", "malformed header, expected `P <int> XI <int> D <int>`"));
    }
    let big_p = head.count(1, "P")?;
    let xi = head.count(3, "XI")?;
    let d = head.count(5, "D")?;
    if d == 0 {
        return Err(perr(head.lineno, "D", "catalogue must hold at least one item"));
    }

    let mut catalogue = Vec::with_capacity(d);
    for _ in 0..d {
        let t = it.next().ok_or_else(|| perr(head.lineno, "CAT", "missing catalogue lines"))?;
        t.keyword("CAT", 2)?;
        catalogue.push(CatalogueItem::new(t.positive(1, "CAT width")?, t.positive(2, "CAT height")?));
    }

    let mut p = None;
    let mut purchasable = Vec::new();
    let mut orders = Vec::new();
    let mut last_line = head.lineno;
    while let Some(t) = it.next() {
        t.keyword("PERIOD", 5)?;
        if t.toks[2] != "M" || t.toks[4] != "N" {
            return Err(perr(t.lineno, "PERIOD", "expected `PERIOD <s> M <m> N <n>`"));
        }
        let s = t.count(1, "PERIOD")?;
        let expected = p.map(|p0: usize| p0 + purchasable.len()).unwrap_or(s);
        if s != expected {
            return Err(perr(t.lineno, "PERIOD", format!("period {s} out of order, expected {expected}")));
        }
        if s >= big_p {
            return Err(perr(t.lineno, "PERIOD", format!("period count mismatch: period {s} is not below P={big_p}")));
        }
        p.get_or_insert(s);
        let m = t.count(3, "M")?;
        let n = t.count(5, "N")?;
        let mut objs = Vec::with_capacity(m);
        for _ in 0..m {
            let o = it.next().ok_or_else(|| perr(t.lineno, "OBJ", "missing object lines"))?;
            o.keyword("OBJ", 3)?;
            objs.push(PurchasableObject::new(
                o.positive(1, "OBJ width")?,
                o.positive(2, "OBJ height")?,
                o.positive(3, "OBJ cost")?,
            ));
        }
        let mut items = Vec::with_capacity(n);
        for _ in 0..n {
            let o = it.next().ok_or_else(|| perr(t.lineno, "ITEM", "missing item lines"))?;
            o.keyword("ITEM", 2)?;
            items.push(OrderedItem::new(o.positive(1, "ITEM width")?, o.positive(2, "ITEM height")?));
            last_line = o.lineno;
        }
        last_line = last_line.max(t.lineno);
        purchasable.push(objs);
        orders.push(items);
    }

    let p = p.ok_or_else(|| perr(last_line, "PERIOD", "period count mismatch: no periods"))?;
    if p + purchasable.len() != big_p {
        return Err(perr(
            last_line,
            "PERIOD",
            format!("period count mismatch: P={big_p} needs periods {p}..{} but found {}", big_p - 1, purchasable.len()),
        ));
    }
    if xi > big_p - p {
        return Err(perr(head.lineno, "XI", format!("xi out of range: {xi} > {}", big_p - p)));
    }
    Ok(Instance { p, big_p, xi, purchasable, orders, catalogue })
}

/// Canonical text of an instance; `parse_instance` is its inverse.
pub fn serialize_instance(inst: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "P {} XI {} D {}", inst.big_p, inst.xi, inst.catalogue.len());
    for c in &inst.catalogue {
        let _ = writeln!(out, "CAT {} {}", c.width, c.height);
    }
    for (k, (objs, items)) in inst.purchasable.iter().zip(&inst.orders).enumerate() {
        let _ = writeln!(out, "PERIOD {} M {} N {}", inst.p + k, objs.len(), items.len());
        for o in objs {
            let _ = writeln!(out, "OBJ {} {} {}", o.width, o.height, o.unit_cost);
        }
        for i in items {
            let _ = writeln!(out, "ITEM {} {}", i.width, i.height);
        }
    }
    out
}

/// Strips comments and blank lines and collapses whitespace, giving the
/// form produced by [`serialize_instance`].
pub fn normalize(text: &str) -> String {
    significant_lines(text)
        .iter()
        .map(|t| t.toks.join(" ") + "\n")
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    fn error(message: impl Into<String>) -> Self {
        Self { severity: Severity::Error, message: message.into() }
    }

    fn warning(message: impl Into<String>) -> Self {
        Self { severity: Severity::Warning, message: message.into() }
    }
}

/// Checks every instance invariant. Hard violations come back as errors,
/// items that no available object can hold as warnings.
pub fn validate_instance(inst: &Instance) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if inst.big_p <= inst.p {
        out.push(Diagnostic::error(format!("P={} must exceed p={}", inst.big_p, inst.p)));
        return out;
    }
    if inst.xi > inst.big_p - inst.p {
        out.push(Diagnostic::error(format!("xi out of range: {} > {}", inst.xi, inst.big_p - inst.p)));
    }
    if inst.purchasable.len() != inst.periods() || inst.orders.len() != inst.periods() {
        out.push(Diagnostic::error("period count mismatch"));
        return out;
    }
    if inst.catalogue.is_empty() {
        out.push(Diagnostic::error("catalogue is empty"));
    }
    for (k, c) in inst.catalogue.iter().enumerate() {
        if c.width < 1 || c.height < 1 {
            out.push(Diagnostic::error(format!("catalogue item {}: non-positive dimension", k + 1)));
        }
    }
    for (k, objs) in inst.purchasable.iter().enumerate() {
        for (j, o) in objs.iter().enumerate() {
            if o.width < 1 || o.height < 1 || o.unit_cost < 1 {
                out.push(Diagnostic::error(format!(
                    "object {} at instant {}: non-positive dimension or cost",
                    j + 1,
                    inst.p + k
                )));
            }
        }
    }
    for (k, items) in inst.orders.iter().enumerate() {
        for (i, it) in items.iter().enumerate() {
            if it.width < 1 || it.height < 1 {
                out.push(Diagnostic::error(format!(
                    "item {} at instant {}: non-positive dimension",
                    i + 1,
                    inst.p + k
                )));
                continue;
            }
            let fits = inst.purchasable[..=k]
                .iter()
                .flatten()
                .any(|o| it.width <= o.width && it.height <= o.height);
            if !fits {
                out.push(Diagnostic::warning(format!(
                    "item {} at instant {} ({}x{}) cannot fit any object",
                    i + 1,
                    inst.p + k,
                    it.width,
                    it.height
                )));
            }
        }
    }
    out
}

/// Parameters of the random instance generator. Ranges are inclusive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenConfig {
    pub periods: usize,
    pub xi: usize,
    pub objects_per_period: (usize, usize),
    pub object_dim: (i64, i64),
    pub items_per_period: (usize, usize),
    pub item_dim: (i64, i64),
    pub catalogue_size: (usize, usize),
    pub unit_cost: (i64, i64),
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            periods: 4,
            xi: 1,
            objects_per_period: (1, 5),
            object_dim: (30, 100),
            items_per_period: (2, 15),
            item_dim: (5, 20),
            catalogue_size: (1, 5),
            unit_cost: (1, 1),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("invalid generator range for {0}")]
    BadRange(&'static str),
    #[error("no feasible sample after {0} attempts")]
    Exhausted(usize),
}

const GEN_RETRIES: usize = 1000;

fn check_range<T: PartialOrd>(r: (T, T), name: &'static str) -> Result<(), GenError> {
    if r.0 > r.1 {
        return Err(GenError::BadRange(name));
    }
    Ok(())
}

/// Draws a random instance. Items come in a few distinct shapes, each
/// repeated, and every item fits some object of its own instant. The
/// catalogue is made of the smallest item shapes seen.
pub fn generate_instance(cfg: &GenConfig) -> Result<Instance, GenError> {
    check_range(cfg.objects_per_period, "objects per period")?;
    check_range(cfg.object_dim, "object dims")?;
    check_range(cfg.items_per_period, "items per period")?;
    check_range(cfg.item_dim, "item dims")?;
    check_range(cfg.catalogue_size, "catalogue size")?;
    check_range(cfg.unit_cost, "unit cost")?;
    if cfg.periods == 0 || cfg.xi > cfg.periods {
        return Err(GenError::BadRange("periods/xi"));
    }
    if cfg.objects_per_period.1 == 0 || cfg.object_dim.0 < 1 || cfg.item_dim.0 < 1 || cfg.unit_cost.0 < 1 {
        return Err(GenError::BadRange("positivity"));
    }
    if cfg.catalogue_size.1 == 0 {
        return Err(GenError::BadRange("catalogue size"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut purchasable = Vec::with_capacity(cfg.periods);
    let mut orders = Vec::with_capacity(cfg.periods);
    for _ in 0..cfg.periods {
        let m = rng.gen_range(cfg.objects_per_period.0.max(1)..=cfg.objects_per_period.1);
        let objs: Vec<PurchasableObject> = (0..m)
            .map(|_| {
                PurchasableObject::new(
                    rng.gen_range(cfg.object_dim.0..=cfg.object_dim.1),
                    rng.gen_range(cfg.object_dim.0..=cfg.object_dim.1),
                    rng.gen_range(cfg.unit_cost.0..=cfg.unit_cost.1),
                )
            })
            .collect();
        let n = rng.gen_range(cfg.items_per_period.0..=cfg.items_per_period.1);
        let mut items = Vec::with_capacity(n);
        if n > 0 {
            let kinds = rng.gen_range(1..=n.min(5));
            let mut shapes = Vec::with_capacity(kinds);
            for _ in 0..kinds {
                let mut tries = 0;
                loop {
                    let it = OrderedItem::new(
                        rng.gen_range(cfg.item_dim.0..=cfg.item_dim.1),
                        rng.gen_range(cfg.item_dim.0..=cfg.item_dim.1),
                    );
                    if objs.iter().any(|o| it.width <= o.width && it.height <= o.height) {
                        shapes.push(it);
                        break;
                    }
                    tries += 1;
                    if tries >= GEN_RETRIES {
                        return Err(GenError::Exhausted(GEN_RETRIES));
                    }
                }
            }
            for k in 0..n {
                let shape = if k < kinds { shapes[k] } else { shapes[rng.gen_range(0..kinds)] };
                items.push(shape);
            }
            items.shuffle(&mut rng);
        }
        purchasable.push(objs);
        orders.push(items);
    }

    let mut shapes: Vec<OrderedItem> = orders.iter().flatten().copied().collect();
    shapes.sort_by_key(|it| (it.area(), it.width, it.height));
    shapes.dedup();
    let d = rng.gen_range(cfg.catalogue_size.0.max(1)..=cfg.catalogue_size.1);
    let mut catalogue: Vec<CatalogueItem> =
        shapes.iter().take(d).map(|it| CatalogueItem::new(it.width, it.height)).collect();
    if catalogue.is_empty() {
        catalogue.push(CatalogueItem::new(cfg.item_dim.0, cfg.item_dim.0));
    }

    Ok(Instance { p: 0, big_p: cfg.periods, xi: cfg.xi, purchasable, orders, catalogue })
}
