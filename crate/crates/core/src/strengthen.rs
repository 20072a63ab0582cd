//! Variable fixing from the auxiliary problems `P1(h)`, `P2(h)` and
//! generators for the valid-inequality families of the block formulation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::combinatorics::{binomial, Combinations};
use crate::error::{Error, Result};
use crate::instance::{Instance, OrderedCostScale, CAPACITY_EPS};
use crate::lambda::{BlockDecomposition, Slot};
use crate::model::{MipModel, Sense, VarKey, VarKind};
use crate::solver::{solve_model, SolveStatus, SolverConfig};

/// Largest `n` for which `P1(h)` is solved by enumeration when a solver is
/// available.
pub const P1_ENUMERATION_LIMIT: usize = 8;

/// Largest number of hub sets `P2(h)` enumerates before using the solver.
pub const P2_ENUMERATION_LIMIT: u128 = 1_000_000;

/// `b_k^{h-1} = min(b_k, Σ_{s: ĉ_sk ≤ ĉ_(h-1)} W_s)`, stored for `h = 1..=G`.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveCapacityTable {
    b: Vec<Vec<f64>>,
}

impl EffectiveCapacityTable {
    pub fn get(&self, k: usize, h: usize) -> f64 {
        self.b[k][h]
    }

    pub fn g(&self) -> usize {
        self.b.first().map_or(0, |r| r.len() - 1)
    }
}

pub fn effective_capacities(inst: &Instance, scale: &OrderedCostScale) -> EffectiveCapacityTable {
    let n = inst.n();
    let g = scale.g();
    let b = (0..n)
        .map(|k| {
            let mut row = vec![0.0; g + 1];
            for (h, slot) in row.iter_mut().enumerate().skip(1) {
                let radius = scale.level(h - 1);
                let reach: f64 = (0..n)
                    .filter(|&s| scale.c_hat(s, k) <= radius)
                    .map(|s| scale.outflow(s))
                    .sum();
                *slot = inst.capacity(k).min(reach);
            }
            row
        })
        .collect();
    EffectiveCapacityTable { b }
}

/// Sites sorted by outflow: `σ(1..=n)` with `W_σ(q)` nondecreasing.
#[derive(Clone, Debug, PartialEq)]
pub struct SortedFlowOrder {
    pub sigma: Vec<usize>,
    /// `w_bar[q] = Σ_{r ≤ q} W_σ(r)`, `w_bar[0] = 0`.
    pub w_bar: Vec<f64>,
    w: Vec<f64>,
}

impl SortedFlowOrder {
    pub fn new(outflows: &[f64]) -> Self {
        let mut sigma: Vec<usize> = (0..outflows.len()).collect();
        sigma.sort_by(|&a, &b| outflows[a].total_cmp(&outflows[b]).then(a.cmp(&b)));
        let mut w_bar = vec![0.0];
        for &s in &sigma {
            w_bar.push(w_bar.last().unwrap() + outflows[s]);
        }
        SortedFlowOrder {
            sigma,
            w_bar,
            w: outflows.to_vec(),
        }
    }

    /// Site at 1-based sorted position `q`.
    pub fn site(&self, q: usize) -> usize {
        self.sigma[q - 1]
    }

    /// Outflow at 1-based sorted position `q`.
    pub fn w(&self, q: usize) -> f64 {
        self.w[self.sigma[q - 1]]
    }

    /// `S_k`: the `k` sites with smallest outflow.
    pub fn set(&self, k: usize) -> &[usize] {
        &self.sigma[..k]
    }
}

/// `M_s = min_{j ≠ s} ĉ_sj`, the cheapest allocation origin `s` can get
/// from any other site. Below this radius `s` is only served by itself.
#[derive(Clone, Debug, PartialEq)]
pub struct EmptyRadius {
    pub m: Vec<f64>,
}

impl EmptyRadius {
    pub fn new(scale: &OrderedCostScale) -> Self {
        let n = scale.outflows().len();
        let m = (0..n)
            .map(|s| {
                (0..n)
                    .filter(|&j| j != s)
                    .map(|j| scale.c_hat(s, j))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        EmptyRadius { m }
    }

    /// `|{q ≤ x : M_σ(q) ≤ radius}|`.
    pub fn count_within(&self, order: &SortedFlowOrder, radius: f64, x: usize) -> usize {
        (1..=x).filter(|&q| self.m[order.site(q)] <= radius).count()
    }

    /// Smallest sorted index at which `k` sites with `M ≤ radius` have been
    /// seen; `None` when fewer than `k` exist.
    pub fn s_index(&self, order: &SortedFlowOrder, radius: f64, k: usize) -> Option<usize> {
        if k == 0 {
            return Some(0);
        }
        let mut count = 0;
        for q in 1..=order.sigma.len() {
            if self.m[order.site(q)] <= radius {
                count += 1;
                if count == k {
                    return Some(q);
                }
            }
        }
        None
    }

    /// Largest `x ≤ t` with `count_within(x) + t − x = k`.
    pub fn s_hat(&self, order: &SortedFlowOrder, radius: f64, k: usize, t: usize) -> Option<usize> {
        (0..=t)
            .rev()
            .find(|&x| self.count_within(order, radius, x) + t - x == k)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum PreprocessMode {
    #[default]
    None,
    P1,
    P2,
    P12,
}

impl PreprocessMode {
    pub fn uses_p1(self) -> bool {
        matches!(self, PreprocessMode::P1 | PreprocessMode::P12)
    }

    pub fn uses_p2(self) -> bool {
        matches!(self, PreprocessMode::P2 | PreprocessMode::P12)
    }
}

impl FromStr for PreprocessMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(PreprocessMode::None),
            "p1" => Ok(PreprocessMode::P1),
            "p2" => Ok(PreprocessMode::P2),
            "p12" => Ok(PreprocessMode::P12),
            _ => Err(Error::Config(format!("unknown preprocess `{s}` (expected none|p1|p2|p12)"))),
        }
    }
}

impl fmt::Display for PreprocessMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PreprocessMode::None => "none",
            PreprocessMode::P1 => "p1",
            PreprocessMode::P2 => "p2",
            PreprocessMode::P12 => "p12",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CutFamily {
    /// Effective-capacity aggregation per hub and level.
    Dv3_3,
    /// Capacity disjunction over the `k` smallest flows.
    Dv3_12,
    /// Empty-radius reinforcement, unsplit.
    Dv3b,
    /// Empty-radius reinforcement, split by `t`.
    Dv3c,
    /// Cheap-open-hub disjunction per origin and level.
    Packing,
    /// Lower bound on allocations at a level.
    CountLb,
    /// Upper bound on allocations at a level.
    CountUb,
}

impl CutFamily {
    pub const ALL: [CutFamily; 7] = [
        CutFamily::Dv3_3,
        CutFamily::Dv3_12,
        CutFamily::Dv3b,
        CutFamily::Dv3c,
        CutFamily::Packing,
        CutFamily::CountLb,
        CutFamily::CountUb,
    ];

    pub fn key(self) -> &'static str {
        match self {
            CutFamily::Dv3_3 => "dv3_3",
            CutFamily::Dv3_12 => "dv3_12",
            CutFamily::Dv3b => "dv3b",
            CutFamily::Dv3c => "dv3c",
            CutFamily::Packing => "packing",
            CutFamily::CountLb => "count_lb",
            CutFamily::CountUb => "count_ub",
        }
    }

    pub fn tag(self) -> String {
        format!("cut:{}", self.key())
    }

    /// Families whose rows reference `u`/`v` variables.
    pub fn needs_blocks(self) -> bool {
        !matches!(self, CutFamily::Dv3_3 | CutFamily::Packing)
    }

    pub fn needs_p1(self) -> bool {
        matches!(self, CutFamily::Dv3_12 | CutFamily::Dv3b | CutFamily::Dv3c)
    }
}

impl FromStr for CutFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CutFamily::ALL
            .into_iter()
            .find(|c| c.key() == s)
            .ok_or_else(|| Error::Config(format!("unknown cut family `{s}`")))
    }
}

impl fmt::Display for CutFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct StrengthenConfig {
    pub preprocess: PreprocessMode,
    pub cuts: BTreeSet<CutFamily>,
}

impl StrengthenConfig {
    pub fn new(preprocess: PreprocessMode, cuts: impl IntoIterator<Item = CutFamily>) -> Self {
        StrengthenConfig {
            preprocess,
            cuts: cuts.into_iter().collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.preprocess == PreprocessMode::None && self.cuts.is_empty()
    }

    /// Short label such as `p12+dv3_3+dv3c`.
    pub fn label(&self) -> String {
        let mut parts = vec![self.preprocess.to_string()];
        parts.extend(self.cuts.iter().map(|c| c.key().to_string()));
        parts.join("+")
    }
}

impl FromStr for StrengthenConfig {
    type Err = Error;

    /// Parses the `label` form, e.g. `p12+dv3_3+packing` or `none`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split('+');
        let preprocess = parts.next().unwrap_or("none").parse()?;
        let cuts = parts.map(str::parse).collect::<Result<BTreeSet<_>>>()?;
        Ok(StrengthenConfig { preprocess, cuts })
    }
}

// ---------------------------------------------------------------------------
// P1 / P2

fn check_level(scale: &OrderedCostScale, h: usize, lo: usize) -> Result<()> {
    if h < lo || h > scale.g() {
        return Err(Error::Preprocess {
            h,
            msg: format!("level out of range {lo}..={}", scale.g()),
        });
    }
    Ok(())
}

/// Max number of origins that fit cheaply on hub set `hubs`.
fn p1_for_hubs(scale: &OrderedCostScale, cap: &[f64], hubs: &[usize], radius: f64, best_known: usize) -> usize {
    let n = cap.len();
    let w = scale.outflows();
    let mut origins: Vec<(usize, Vec<usize>)> = (0..n)
        .map(|j| {
            let ks: Vec<usize> = hubs
                .iter()
                .copied()
                .filter(|&k| scale.c_hat(j, k) <= radius && w[j] <= cap[k] + CAPACITY_EPS)
                .collect();
            (j, ks)
        })
        .filter(|(_, ks)| !ks.is_empty())
        .collect();
    origins.sort_by(|a, b| w[a.0].total_cmp(&w[b.0]).then(a.1.len().cmp(&b.1.len())));
    let reachable = origins.len();
    if reachable <= best_known {
        return reachable;
    }

    struct Search<'a> {
        origins: &'a [(usize, Vec<usize>)],
        w: &'a [f64],
        left: Vec<f64>,
        best: usize,
        target: usize,
    }
    impl Search<'_> {
        fn go(&mut self, i: usize, placed: usize) {
            if placed + (self.origins.len() - i) <= self.best || self.best == self.target {
                return;
            }
            if i == self.origins.len() {
                self.best = placed;
                return;
            }
            let (j, ref ks) = self.origins[i];
            for &k in ks {
                if self.left[k] + CAPACITY_EPS >= self.w[j] {
                    self.left[k] -= self.w[j];
                    self.go(i + 1, placed + 1);
                    self.left[k] += self.w[j];
                }
            }
            self.go(i + 1, placed);
        }
    }
    let mut s = Search {
        origins: &origins,
        w,
        left: cap.to_vec(),
        best: best_known,
        target: reachable,
    };
    s.go(0, 0);
    s.best
}

/// `P1(h)` by enumeration of hub sets and a branch-and-bound assignment.
pub fn solve_p1(inst: &Instance, scale: &OrderedCostScale, btable: &EffectiveCapacityTable, h: usize) -> Result<usize> {
    check_level(scale, h, 1)?;
    let n = inst.n();
    let radius = scale.level(h - 1);
    let cap: Vec<f64> = (0..n).map(|k| btable.get(k, h)).collect();
    let mut best = 0;
    for hubs in Combinations::new(n, inst.p().min(n)) {
        best = best.max(p1_for_hubs(scale, &cap, &hubs, radius, best));
        if best == n {
            break;
        }
    }
    Ok(best)
}

/// `P2(h)` by enumeration: the most origins some `p` hubs can serve at
/// cost at least `ĉ_(h-1)`.
pub fn solve_p2(inst: &Instance, scale: &OrderedCostScale, h: usize) -> Result<usize> {
    check_level(scale, h, 2)?;
    let n = inst.n();
    let radius = scale.level(h - 1);
    Ok(Combinations::new(n, inst.p().min(n))
        .map(|hubs| {
            (0..n)
                .filter(|&j| hubs.iter().any(|&k| scale.c_hat(j, k) >= radius))
                .count()
        })
        .max()
        .unwrap_or(0))
}

/// Builds the `P1(h)` or `P2(h)` integer program as a minimization of
/// `−Σ z`.
pub fn auxiliary_model(
    inst: &Instance,
    scale: &OrderedCostScale,
    btable: Option<&EffectiveCapacityTable>,
    h: usize,
) -> Result<MipModel> {
    let n = inst.n();
    let radius = scale.level(h - 1);
    let first = btable.is_some();
    let admissible = |j: usize, k: usize| {
        if first {
            scale.c_hat(j, k) <= radius
        } else {
            scale.c_hat(j, k) >= radius
        }
    };
    let mut m = MipModel::new(if first { format!("p1_{h}") } else { format!("p2_{h}") });
    let mut z = vec![vec![None; n]; n];
    for (j, row) in z.iter_mut().enumerate() {
        for (k, slot) in row.iter_mut().enumerate() {
            if admissible(j, k) {
                *slot = Some(m.add_var(format!("z_{}_{}", j + 1, k + 1), VarKind::Binary, 0.0, 1.0, -1.0)?);
            }
        }
    }
    let y: Vec<usize> = (0..n)
        .map(|k| m.add_var(format!("y_{}", k + 1), VarKind::Binary, 0.0, 1.0, 0.0))
        .collect::<Result<_>>()?;
    for (j, row) in z.iter().enumerate() {
        let terms: Vec<(usize, f64)> = row.iter().flatten().map(|&id| (id, 1.0)).collect();
        if !terms.is_empty() {
            m.add_row(format!("one_{}", j + 1), "aux", terms, Sense::Le, 1.0)?;
        }
    }
    let w = scale.outflows();
    for k in 0..n {
        let col: Vec<(usize, usize)> = (0..n).filter_map(|j| z[j][k].map(|id| (j, id))).collect();
        let open = col.iter().map(|&(_, id)| (id, 1.0)).chain([(y[k], -(n as f64))]);
        m.add_row(format!("open_{}", k + 1), "aux", open.collect::<Vec<_>>(), Sense::Le, 0.0)?;
        if let Some(bt) = btable {
            let cap = col.iter().map(|&(j, id)| (id, w[j])).chain([(y[k], -bt.get(k, h))]);
            m.add_row(format!("cap_{}", k + 1), "aux", cap.collect::<Vec<_>>(), Sense::Le, 0.0)?;
        }
    }
    m.add_row("hubs", "aux", y.iter().map(|&id| (id, 1.0)), Sense::Le, inst.p() as f64)?;
    Ok(m)
}

fn solve_auxiliary(model: &MipModel, h: usize, solver: &SolverConfig) -> Result<usize> {
    let res = solve_model(model, solver)?;
    match (res.outcome.status, res.outcome.best_objective) {
        (SolveStatus::Optimal, Some(obj)) => Ok((-obj).round().max(0.0) as usize),
        (status, _) => Err(Error::Preprocess {
            h,
            msg: format!("auxiliary problem {} ended with status {status}", model.name),
        }),
    }
}

/// `P1(h)` for `h = 1..=G` (index 0 unused). Enumerates for small `n` or
/// without a solver, otherwise dispatches each level to the solver.
pub fn p1_values(
    inst: &Instance,
    scale: &OrderedCostScale,
    btable: &EffectiveCapacityTable,
    solver: Option<&SolverConfig>,
) -> Result<Vec<usize>> {
    let g = scale.g();
    let vals = (1..=g)
        .into_par_iter()
        .map(|h| match solver {
            Some(cfg) if inst.n() > P1_ENUMERATION_LIMIT => {
                solve_auxiliary(&auxiliary_model(inst, scale, Some(btable), h)?, h, cfg)
            }
            _ => solve_p1(inst, scale, btable, h),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(std::iter::once(0).chain(vals).collect())
}

/// `P2(h)` for `h = 2..=G` (indices 0 and 1 unused).
pub fn p2_values(inst: &Instance, scale: &OrderedCostScale, solver: Option<&SolverConfig>) -> Result<Vec<usize>> {
    let g = scale.g();
    let enumerate = binomial(inst.n(), inst.p()) <= P2_ENUMERATION_LIMIT;
    let vals = (2..=g)
        .into_par_iter()
        .map(|h| match solver {
            Some(cfg) if !enumerate => solve_auxiliary(&auxiliary_model(inst, scale, None, h)?, h, cfg),
            _ => solve_p2(inst, scale, h),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok([0, 0].into_iter().chain(vals).collect())
}

// ---------------------------------------------------------------------------
// Fixing

/// Bounds implied by the auxiliary problems, per block `i` and level `h`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FixingReport {
    /// `u_ih = 1`, `v_ih = β_i`.
    pub ones: BTreeSet<(usize, usize)>,
    /// `u_ih = v_ih = 0`.
    pub zeros: BTreeSet<(usize, usize)>,
    /// `u_ih = 0` with `v_ih` only bounded above.
    pub u_zeros: BTreeSet<(usize, usize)>,
    pub v_lower: BTreeMap<(usize, usize), usize>,
    pub v_upper: BTreeMap<(usize, usize), usize>,
    pub p1: Vec<usize>,
    pub p2: Vec<usize>,
    pub fixed_fraction: f64,
}

impl FixingReport {
    fn refresh_fraction(&mut self, decomp: &BlockDecomposition, g: usize) {
        let total = decomp.blocks() * g;
        self.fixed_fraction = if total == 0 {
            0.0
        } else {
            (self.ones.len() + self.zeros.len()) as f64 / total as f64
        };
    }

    /// Union of two reports; contradictory fixes mean no feasible solution.
    pub fn merge(mut self, other: FixingReport, decomp: &BlockDecomposition, g: usize) -> Result<FixingReport> {
        self.ones.extend(other.ones);
        self.zeros.extend(other.zeros);
        self.u_zeros.extend(other.u_zeros);
        let zero_u: BTreeSet<_> = self.zeros.union(&self.u_zeros).copied().collect();
        if let Some(&(i, h)) = self.ones.intersection(&zero_u).next() {
            return Err(Error::Preprocess {
                h,
                msg: format!("block {i} fixed to both one and zero"),
            });
        }
        for (key, lo) in other.v_lower {
            let e = self.v_lower.entry(key).or_insert(0);
            *e = (*e).max(lo);
        }
        for (key, hi) in other.v_upper {
            let e = self.v_upper.entry(key).or_insert(usize::MAX);
            *e = (*e).min(hi);
        }
        if !other.p1.is_empty() {
            self.p1 = other.p1;
        }
        if !other.p2.is_empty() {
            self.p2 = other.p2;
        }
        self.refresh_fraction(decomp, g);
        Ok(self)
    }

    /// Tightens `u`/`v` bounds in `model`; returns the number of covering
    /// variables whose bounds changed.
    pub fn apply(&self, model: &mut MipModel, decomp: &BlockDecomposition) -> Result<usize> {
        let mut touched = BTreeSet::new();
        let mut set = |model: &mut MipModel, key: VarKey, lo: f64, hi: f64| -> Result<()> {
            let id = model.id_of(&key)?;
            let before = (model.vars()[id].lb, model.vars()[id].ub);
            model.tighten_bounds(id, lo, hi);
            let v = &model.vars()[id];
            if v.lb > v.ub + 1e-9 {
                return Err(Error::Preprocess {
                    h: match key {
                        VarKey::U(_, h) | VarKey::V(_, h) => h,
                        _ => 0,
                    },
                    msg: format!("bounds of {key} became empty [{}, {}]", v.lb, v.ub),
                });
            }
            if (v.lb, v.ub) != before {
                touched.insert(id);
            }
            Ok(())
        };
        for &(i, h) in &self.ones {
            let beta = decomp.beta(i) as f64;
            set(model, VarKey::U(i, h), 1.0, 1.0)?;
            set(model, VarKey::V(i, h), beta, beta)?;
        }
        for &(i, h) in &self.zeros {
            set(model, VarKey::U(i, h), 0.0, 0.0)?;
            set(model, VarKey::V(i, h), 0.0, 0.0)?;
        }
        for &(i, h) in &self.u_zeros {
            set(model, VarKey::U(i, h), 0.0, 0.0)?;
        }
        for (&(i, h), &lo) in &self.v_lower {
            set(model, VarKey::V(i, h), lo as f64, f64::INFINITY)?;
        }
        for (&(i, h), &hi) in &self.v_upper {
            set(model, VarKey::V(i, h), f64::NEG_INFINITY, hi as f64)?;
        }
        Ok(touched.len())
    }

    /// Whether the canonical `(u, v)` of some solution obeys every fix.
    pub fn admits(&self, u: impl Fn(usize, usize) -> u8, v: impl Fn(usize, usize) -> usize, decomp: &BlockDecomposition) -> bool {
        self.ones.iter().all(|&(i, h)| u(i, h) == 1 && v(i, h) == decomp.beta(i))
            && self.zeros.iter().all(|&(i, h)| u(i, h) == 0 && v(i, h) == 0)
            && self.u_zeros.iter().all(|&(i, h)| u(i, h) == 0)
            && self.v_lower.iter().all(|(&(i, h), &lo)| v(i, h) >= lo)
            && self.v_upper.iter().all(|(&(i, h), &hi)| v(i, h) <= hi)
    }
}

/// Fixes to upper bounds: positions beyond `P1(h)` cost at least `ĉ_(h)`.
pub fn fix_from_p1(p1: &[usize], decomp: &BlockDecomposition) -> FixingReport {
    let blocks = decomp.blocks();
    let p = decomp.p;
    let g = p1.len().saturating_sub(1);
    let mut rep = FixingReport {
        p1: p1.to_vec(),
        ..Default::default()
    };
    for (h, &val) in p1.iter().enumerate().skip(2) {
        let Some(i1) = (1..=blocks).find(|&i| val <= p + decomp.alpha_bar(i) + decomp.beta_bar(i)) else {
            continue;
        };
        let from = if val <= p + decomp.alpha_bar(i1) + decomp.beta_bar(i1 - 1) {
            i1
        } else {
            let lo = p + decomp.alpha_bar(i1) + decomp.beta_bar(i1) - val;
            rep.v_lower.insert((i1, h), lo);
            i1 + 1
        };
        for i in from..=blocks {
            rep.ones.insert((i, h));
        }
    }
    rep.refresh_fraction(decomp, g);
    rep
}

/// Fixes to lower bounds: at least `n − P2(h)` allocations cost less than
/// `ĉ_(h-1)`.
pub fn fix_from_p2(p2: &[usize], n: usize, decomp: &BlockDecomposition) -> FixingReport {
    let blocks = decomp.blocks();
    let p = decomp.p;
    let g = p2.len().saturating_sub(1);
    let mut rep = FixingReport {
        p2: p2.to_vec(),
        ..Default::default()
    };
    for (h, &val) in p2.iter().enumerate().skip(2) {
        let cheap = n.saturating_sub(val);
        if cheap <= p {
            continue;
        }
        let i2 = (1..=blocks).find(|&i| cheap <= p + decomp.alpha_bar(i) + decomp.beta_bar(i));
        let Some(i2) = i2 else {
            // every block lies inside the cheap prefix
            for i in 1..=blocks {
                rep.zeros.insert((i, h));
            }
            continue;
        };
        for i in 1..i2 {
            rep.zeros.insert((i, h));
        }
        if cheap > p + decomp.alpha_bar(i2) + decomp.beta_bar(i2 - 1) {
            let hi = p + decomp.alpha_bar(i2) + decomp.beta_bar(i2) - cheap;
            if hi == 0 {
                rep.zeros.insert((i2, h));
            } else {
                rep.u_zeros.insert((i2, h));
                rep.v_upper.insert((i2, h), hi);
            }
        }
    }
    rep.refresh_fraction(decomp, g);
    rep
}

// ---------------------------------------------------------------------------
// Cuts

/// A generated inequality over named variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Cut {
    pub name: String,
    pub tag: String,
    pub terms: Vec<(VarKey, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Cut {
    fn new(family: CutFamily, name: String, terms: Vec<(VarKey, f64)>, sense: Sense, rhs: f64) -> Self {
        Cut {
            name,
            tag: family.tag(),
            terms,
            sense,
            rhs,
        }
    }

    pub fn lhs(&self, value: impl Fn(&VarKey) -> f64) -> f64 {
        self.terms.iter().map(|(k, c)| c * value(k)).sum()
    }

    /// Whether the point given by `value` satisfies the cut within `tol`.
    pub fn holds(&self, value: impl Fn(&VarKey) -> f64, tol: f64) -> bool {
        let lhs = self.lhs(value);
        match self.sense {
            Sense::Le => lhs <= self.rhs + tol,
            Sense::Ge => lhs >= self.rhs - tol,
            Sense::Eq => (lhs - self.rhs).abs() <= tol,
        }
    }
}

/// Appends cuts as tagged rows.
pub fn add_cuts(model: &mut MipModel, cuts: &[Cut]) -> Result<usize> {
    for c in cuts {
        model.add_row_by_key(c.name.clone(), c.tag.clone(), &c.terms, c.sense, c.rhs)?;
    }
    Ok(cuts.len())
}

/// Shared inputs of the capacity-based families.
pub struct CutContext<'a> {
    pub inst: &'a Instance,
    pub scale: &'a OrderedCostScale,
    pub btable: &'a EffectiveCapacityTable,
    pub decomp: &'a BlockDecomposition,
    pub order: SortedFlowOrder,
    pub radius: EmptyRadius,
    /// `P1(h)` indexed by `h`.
    pub p1: &'a [usize],
}

impl<'a> CutContext<'a> {
    pub fn new(
        inst: &'a Instance,
        scale: &'a OrderedCostScale,
        btable: &'a EffectiveCapacityTable,
        decomp: &'a BlockDecomposition,
        p1: &'a [usize],
    ) -> Self {
        CutContext {
            inst,
            scale,
            btable,
            decomp,
            order: SortedFlowOrder::new(scale.outflows()),
            radius: EmptyRadius::new(scale),
            p1,
        }
    }

    /// `(u|v)_ih` for sorted offset `k`, `None` in trailing zeros.
    fn block_var(&self, k: usize, h: usize) -> Option<VarKey> {
        match self.decomp.locate(k)? {
            Slot::Run(i) => Some(VarKey::U(i, h)),
            Slot::Block(i) => Some(VarKey::V(i, h)),
        }
    }

    /// Offsets `k` worth a cut at level `h`: `k ≤ P1(h) − p`.
    fn offsets(&self, h: usize) -> std::ops::RangeInclusive<usize> {
        let n = self.inst.n();
        let p = self.inst.p();
        let top = self.p1.get(h).map_or(0, |&v| v.saturating_sub(p)).min(n - p);
        1..=top
    }

    /// `Σ_j (b_j^{h-1} − W_j) x_jj` as terms.
    fn spare(&self, h: usize) -> Vec<(VarKey, f64)> {
        (0..self.inst.n())
            .map(|j| (VarKey::X(j, j), self.btable.get(j, h) - self.scale.outflow(j)))
            .collect()
    }

    /// Capacity disjunction: `W̄_k var + spare + Σ_{s∈S_k} W_s x_ss ≥ W̄_k`.
    pub fn capacity_ii(&self) -> Vec<Cut> {
        let mut out = Vec::new();
        for h in 2..=self.scale.g() {
            for k in self.offsets(h) {
                let Some(var) = self.block_var(k, h) else { continue };
                let wk = self.order.w_bar[k];
                let mut terms = vec![(var, wk)];
                terms.extend(self.spare(h));
                terms.extend(self.order.set(k).iter().map(|&s| (VarKey::X(s, s), self.scale.outflow(s))));
                out.push(Cut::new(CutFamily::Dv3_12, format!("dv3_12_{h}_{k}"), terms, Sense::Ge, wk));
            }
        }
        out
    }

    /// Same inequality over a caller-chosen origin set `subset`, with
    /// `W̄_k ≤ A_S < W̄_{k+1}`. `None` when no effective `k` exists.
    pub fn capacity_subset(&self, h: usize, subset: &[usize]) -> Option<Cut> {
        let a_s: f64 = subset.iter().map(|&s| self.scale.outflow(s)).sum();
        let n = self.inst.n();
        let k = (1..=n).rev().find(|&k| self.order.w_bar[k] <= a_s + CAPACITY_EPS)?;
        if !self.offsets(h).contains(&k) {
            return None;
        }
        let var = self.block_var(k, h)?;
        let mut terms = vec![(var, a_s)];
        terms.extend(self.spare(h));
        terms.extend(self.order.set(k).iter().map(|&s| (VarKey::X(s, s), self.scale.outflow(s))));
        let mut ids: Vec<String> = subset.iter().map(|s| (s + 1).to_string()).collect();
        ids.sort();
        Some(Cut::new(
            CutFamily::Dv3_12,
            format!("dv3bis_{h}_{}", ids.join("_")),
            terms,
            Sense::Ge,
            self.order.w_bar[k],
        ))
    }

    /// Empty-radius family; `split` emits one cut per `t = k..=s(h-1,k)`,
    /// otherwise only `t = s(h-1,k)`.
    pub fn empty_radius(&self, split: bool) -> Vec<Cut> {
        let family = if split { CutFamily::Dv3c } else { CutFamily::Dv3b };
        let mut out = Vec::new();
        for h in 2..=self.scale.g() {
            let radius = self.scale.level(h - 1);
            for k in self.offsets(h) {
                let Some(var) = self.block_var(k, h) else { continue };
                let Some(s_star) = self.radius.s_index(&self.order, radius, k) else { continue };
                let ts = if split { k..=s_star } else { s_star..=s_star };
                for t in ts {
                    let Some(s_hat) = self.radius.s_hat(&self.order, radius, k, t) else { continue };
                    let wt = self.order.w(t);
                    let mut incl_w = 0.0;
                    let mut x_terms = Vec::new();
                    for q in 1..=t {
                        let s = self.order.site(q);
                        let ws = self.scale.outflow(s);
                        if self.radius.m[s] <= radius || q > s_hat {
                            incl_w += ws;
                            x_terms.push((VarKey::X(s, s), ws));
                        } else {
                            x_terms.push((VarKey::X(s, s), wt - ws));
                        }
                    }
                    let mut terms = vec![(var.clone(), incl_w)];
                    terms.extend(self.spare(h));
                    terms.extend(x_terms);
                    let name = if split {
                        format!("dv3c_{h}_{k}_{t}")
                    } else {
                        format!("dv3b_{h}_{k}")
                    };
                    out.push(Cut::new(family, name, terms, Sense::Ge, incl_w));
                }
            }
        }
        out
    }
}

/// `Σ_{j: ĉ_jk ≤ ĉ_(h-1)} W_j x_jk ≤ b_k^{h-1} x_kk`, only where the
/// effective capacity is below `b_k`.
pub fn gen_cuts_capacity_i(inst: &Instance, scale: &OrderedCostScale, btable: &EffectiveCapacityTable) -> Vec<Cut> {
    let n = inst.n();
    let mut out = Vec::new();
    for h in 2..=scale.g() {
        let radius = scale.level(h - 1);
        for k in 0..n {
            let b = btable.get(k, h);
            if b >= inst.capacity(k) - CAPACITY_EPS {
                continue;
            }
            let terms: Vec<(VarKey, f64)> = (0..n)
                .filter(|&j| scale.c_hat(j, k) <= radius)
                .map(|j| (VarKey::X(j, k), if j == k { scale.outflow(j) - b } else { scale.outflow(j) }))
                .collect();
            out.push(Cut::new(CutFamily::Dv3_3, format!("dv3_3_{h}_{}", k + 1), terms, Sense::Le, 0.0));
        }
    }
    out
}

/// Either origin `j` pays at least `ĉ_(h)` or a hub cheaper than that is open.
pub fn gen_cuts_disjunctive(inst: &Instance, scale: &OrderedCostScale) -> Vec<Cut> {
    let n = inst.n();
    let mut out = Vec::new();
    for j in 0..n {
        for h in 1..=scale.g() {
            let level = scale.level(h);
            let terms = (0..n)
                .map(|k| {
                    if scale.c_hat(j, k) >= level {
                        (VarKey::X(j, k), 1.0)
                    } else {
                        (VarKey::X(k, k), 1.0)
                    }
                })
                .collect();
            out.push(Cut::new(CutFamily::Packing, format!("packing_{}_{h}", j + 1), terms, Sense::Ge, 1.0));
        }
    }
    out
}

/// Non-hub allocations costing exactly `ĉ_(h-1)`.
fn level_count_terms(scale: &OrderedCostScale, h: usize) -> Vec<(VarKey, f64)> {
    let n = scale.outflows().len();
    let level = scale.level(h - 1);
    let mut terms = Vec::new();
    for j in 0..n {
        for k in 0..n {
            if j != k && scale.c_hat(j, k) == level {
                terms.push((VarKey::X(j, k), 1.0));
            }
        }
    }
    terms
}

/// Lower bound on the allocations at level `h − 1` beyond the hub slots.
pub fn gen_cuts_count_lower(scale: &OrderedCostScale, decomp: &BlockDecomposition) -> Vec<Cut> {
    let blocks = decomp.blocks();
    if blocks == 0 {
        return Vec::new();
    }
    (2..=scale.g())
        .map(|h| {
            let mut terms = level_count_terms(scale, h);
            for i in 1..=blocks {
                terms.push((VarKey::V(i, h - 1), -1.0));
                terms.push((VarKey::V(i, h), 1.0));
            }
            for i in 2..=blocks {
                let a = decomp.alpha(i) as f64;
                terms.push((VarKey::U(i - 1, h - 1), -a));
                terms.push((VarKey::U(i, h), a));
            }
            Cut::new(CutFamily::CountLb, format!("count_lb_{h}"), terms, Sense::Ge, 0.0)
        })
        .collect()
}

/// Upper bound on the allocations at level `h − 1` beyond the hub slots.
pub fn gen_cuts_count_upper(scale: &OrderedCostScale, decomp: &BlockDecomposition) -> Vec<Cut> {
    let blocks = decomp.blocks();
    if blocks == 0 {
        return Vec::new();
    }
    (2..=scale.g())
        .map(|h| {
            let mut terms = level_count_terms(scale, h);
            for i in 1..=blocks {
                let a = decomp.alpha(i) as f64;
                terms.push((VarKey::V(i, h - 1), -1.0));
                terms.push((VarKey::V(i, h), 1.0));
                terms.push((VarKey::U(i, h - 1), -a));
                terms.push((VarKey::U(i, h), a));
            }
            let trailing = decomp.alpha(blocks + 1) as f64;
            terms.push((VarKey::U(blocks, h), trailing));
            terms.push((VarKey::U(1, h), -(decomp.alpha(1) as f64)));
            for i in 1..blocks {
                let a = decomp.alpha(i + 1) as f64;
                terms.push((VarKey::U(i + 1, h), -a));
                terms.push((VarKey::U(i, h), a));
            }
            Cut::new(CutFamily::CountUb, format!("count_ub_{h}"), terms, Sense::Le, trailing)
        })
        .collect()
}

/// Every cut of the requested families. `p1` is required by the
/// capacity-disjunction and empty-radius families.
pub fn generate_cuts(
    inst: &Instance,
    scale: &OrderedCostScale,
    decomp: &BlockDecomposition,
    families: &BTreeSet<CutFamily>,
    p1: Option<&[usize]>,
) -> Result<Vec<Cut>> {
    let btable = effective_capacities(inst, scale);
    let mut out = Vec::new();
    let needs_p1 = families.iter().any(|f| f.needs_p1()) && decomp.blocks() > 0;
    let computed;
    let p1 = match (needs_p1, p1) {
        (false, _) => &[][..],
        (true, Some(v)) => v,
        (true, None) => {
            computed = p1_values(inst, scale, &btable, None)?;
            &computed[..]
        }
    };
    let ctx = CutContext::new(inst, scale, &btable, decomp, p1);
    for &family in families {
        if family.needs_blocks() && decomp.blocks() == 0 {
            continue;
        }
        out.extend(match family {
            CutFamily::Dv3_3 => gen_cuts_capacity_i(inst, scale, &btable),
            CutFamily::Dv3_12 => ctx.capacity_ii(),
            CutFamily::Dv3b => ctx.empty_radius(false),
            CutFamily::Dv3c => ctx.empty_radius(true),
            CutFamily::Packing => gen_cuts_disjunctive(inst, scale),
            CutFamily::CountLb => gen_cuts_count_lower(scale, decomp),
            CutFamily::CountUb => gen_cuts_count_upper(scale, decomp),
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Orchestration

#[derive(Clone, Debug, Default, PartialEq)]
pub struct StrengthenReport {
    pub fixing: FixingReport,
    pub cuts_by_family: BTreeMap<CutFamily, usize>,
    pub cuts_added: usize,
    pub vars_fixed: usize,
    pub prep_time_s: f64,
}

/// Applies the configured fixing and cut families to a block-formulation
/// model in place.
pub fn strengthen(
    model: &mut MipModel,
    inst: &Instance,
    scale: &OrderedCostScale,
    decomp: &BlockDecomposition,
    config: &StrengthenConfig,
    solver: Option<&SolverConfig>,
) -> Result<StrengthenReport> {
    let started = Instant::now();
    let has_blocks = model.count_vars_with_prefix("u_") > 0;
    let wants_blocks = config.preprocess != PreprocessMode::None || config.cuts.iter().any(|c| c.needs_blocks());
    if wants_blocks && !has_blocks && decomp.blocks() > 0 {
        return Err(Error::Config(format!(
            "strengthening `{}` needs the block formulation",
            config.label()
        )));
    }
    let g = scale.g();
    let btable = effective_capacities(inst, scale);
    let needs_p1 = decomp.blocks() > 0 && (config.preprocess.uses_p1() || config.cuts.iter().any(|c| c.needs_p1()));
    let p1 = if needs_p1 {
        p1_values(inst, scale, &btable, solver)?
    } else {
        Vec::new()
    };

    let mut fixing = FixingReport::default();
    if decomp.blocks() > 0 {
        if config.preprocess.uses_p1() {
            fixing = fixing.merge(fix_from_p1(&p1, decomp), decomp, g)?;
        }
        if config.preprocess.uses_p2() {
            let p2 = p2_values(inst, scale, solver)?;
            fixing = fixing.merge(fix_from_p2(&p2, inst.n(), decomp), decomp, g)?;
        }
    }
    if fixing.p1.is_empty() {
        fixing.p1 = p1.clone();
    }
    let vars_fixed = fixing.apply(model, decomp)?;

    let cuts = generate_cuts(inst, scale, decomp, &config.cuts, needs_p1.then_some(&p1[..]))?;
    let mut cuts_by_family = BTreeMap::new();
    for c in &cuts {
        let family: CutFamily = c.tag.trim_start_matches("cut:").parse()?;
        *cuts_by_family.entry(family).or_insert(0) += 1;
    }
    let cuts_added = add_cuts(model, &cuts)?;
    Ok(StrengthenReport {
        fixing,
        cuts_by_family,
        cuts_added,
        vars_fixed,
        prep_time_s: started.elapsed().as_secs_f64(),
    })
}
