//! Builders for the full covering formulation (`ubar` variables) and the
//! block formulation (`u`/`v` variables), plus an independent objective
//! evaluator and the definition-true covering values of an allocation.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::instance::{Instance, OrderedCostScale, CAPACITY_EPS};
use crate::lambda::{BlockDecomposition, LambdaVector};
use crate::model::{MipModel, Sense, VarKey, VarKind};

/// Which covering formulation to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formulation {
    Ubar,
    Uv,
}

impl std::str::FromStr for Formulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ubar" => Ok(Formulation::Ubar),
            "uv" => Ok(Formulation::Uv),
            _ => Err(Error::Config(format!("unknown formulation `{s}` (expected ubar|uv)"))),
        }
    }
}

impl std::fmt::Display for Formulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Formulation::Ubar => "ubar",
            Formulation::Uv => "uv",
        })
    }
}

/// Origin → first hub map. Hubs are the sites allocated to themselves.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Allocation {
    pub hub_of: Vec<usize>,
}

impl Allocation {
    pub fn new(hub_of: Vec<usize>) -> Self {
        Allocation { hub_of }
    }

    pub fn hubs(&self) -> Vec<usize> {
        (0..self.hub_of.len()).filter(|&k| self.hub_of[k] == k).collect()
    }

    pub fn is_hub(&self, k: usize) -> bool {
        self.hub_of[k] == k
    }

    /// Allocation costs `ĉ_{j, hub(j)}` sorted ascending.
    pub fn sorted_costs(&self, scale: &OrderedCostScale) -> Vec<f64> {
        let mut c: Vec<f64> = self
            .hub_of
            .iter()
            .enumerate()
            .map(|(j, &k)| scale.c_hat(j, k))
            .collect();
        c.sort_by(f64::total_cmp);
        c
    }

    /// Load charged to each hub, `Σ_{j: hub(j)=k} W_j`.
    pub fn loads(&self, outflows: &[f64]) -> Vec<f64> {
        let mut load = vec![0.0; self.hub_of.len()];
        for (j, &k) in self.hub_of.iter().enumerate() {
            load[k] += outflows[j];
        }
        load
    }

    /// Checks assignment, open-hub linking, cardinality and capacity.
    pub fn validate(&self, inst: &Instance) -> Result<()> {
        let n = inst.n();
        if self.hub_of.len() != n {
            return Err(Error::InfeasibleAllocation {
                constraint: "assign".into(),
                detail: format!("{} origins allocated, expected {n}", self.hub_of.len()),
            });
        }
        for (j, &k) in self.hub_of.iter().enumerate() {
            if k >= n {
                return Err(Error::InfeasibleAllocation {
                    constraint: "assign".into(),
                    detail: format!("origin {} sent to unknown site {}", j + 1, k + 1),
                });
            }
            if self.hub_of[k] != k {
                return Err(Error::InfeasibleAllocation {
                    constraint: "link".into(),
                    detail: format!("origin {} uses site {} which is not an open hub", j + 1, k + 1),
                });
            }
        }
        let hubs = self.hubs();
        if hubs.len() != inst.p() {
            return Err(Error::InfeasibleAllocation {
                constraint: "cardinality".into(),
                detail: format!("{} hubs open, expected {}", hubs.len(), inst.p()),
            });
        }
        let load = self.loads(&inst.outflow_totals());
        for k in hubs {
            if load[k] > inst.capacity(k) + CAPACITY_EPS {
                return Err(Error::InfeasibleAllocation {
                    constraint: "capacity".into(),
                    detail: format!("hub {} carries {} > {}", k + 1, load[k], inst.capacity(k)),
                });
            }
        }
        Ok(())
    }
}

/// Sparse routing `(k, l, m) → s_klm`, 0-based.
pub type Routing = BTreeMap<(usize, usize, usize), f64>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObjectiveBreakdown {
    pub ordered: f64,
    pub routing: f64,
    pub total: f64,
}

/// λ-weighted sorted allocation costs plus scaled routing cost.
pub fn evaluate_solution(
    inst: &Instance,
    scale: &OrderedCostScale,
    lambda: &LambdaVector,
    alloc: &Allocation,
    routing: &Routing,
) -> Result<ObjectiveBreakdown> {
    alloc.validate(inst)?;
    let ordered = ordered_cost(scale, lambda, alloc);
    let routing = routing
        .iter()
        .map(|(&(k, l, m), &s)| (inst.mu() * inst.cost(k, l) + inst.delta() * inst.cost(l, m)) * s)
        .sum::<f64>();
    Ok(ObjectiveBreakdown {
        ordered,
        routing,
        total: ordered + routing,
    })
}

pub(crate) fn ordered_cost(scale: &OrderedCostScale, lambda: &LambdaVector, alloc: &Allocation) -> f64 {
    alloc
        .sorted_costs(scale)
        .iter()
        .zip(&lambda.values)
        .map(|(c, l)| c * l)
        .sum()
}

/// Definition-true covering values of an allocation.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalCovering {
    /// `ubar[i][h-1]`, `i` 0-based sorted position.
    pub ubar: Vec<Vec<u8>>,
    /// `u[i-1][h-1]` for blocks `i = 1..=I`.
    pub u: Vec<Vec<u8>>,
    /// `v[i-1][h-1]`.
    pub v: Vec<Vec<usize>>,
}

impl CanonicalCovering {
    pub fn ubar(&self, i: usize, h: usize) -> u8 {
        self.ubar[i][h - 1]
    }

    pub fn u(&self, i: usize, h: usize) -> u8 {
        self.u[i - 1][h - 1]
    }

    pub fn v(&self, i: usize, h: usize) -> usize {
        self.v[i - 1][h - 1]
    }

    /// Value of a covering variable, `None` for other keys.
    pub fn value(&self, key: &VarKey) -> Option<f64> {
        match *key {
            VarKey::Ubar(i, h) => self.ubar.get(i)?.get(h.checked_sub(1)?).map(|&b| f64::from(b)),
            VarKey::U(i, h) => self
                .u
                .get(i.checked_sub(1)?)?
                .get(h.checked_sub(1)?)
                .map(|&b| f64::from(b)),
            VarKey::V(i, h) => self
                .v
                .get(i.checked_sub(1)?)?
                .get(h.checked_sub(1)?)
                .map(|&c| c as f64),
            _ => None,
        }
    }
}

pub fn canonical_covering(
    alloc: &Allocation,
    scale: &OrderedCostScale,
    decomp: &BlockDecomposition,
) -> CanonicalCovering {
    let g = scale.g();
    let costs = alloc.sorted_costs(scale);
    let at_least = |pos: usize, h: usize| costs[pos - 1] >= scale.level(h);
    let ubar = (1..=costs.len())
        .map(|pos| (1..=g).map(|h| u8::from(at_least(pos, h))).collect())
        .collect();
    let u = (1..=decomp.blocks())
        .map(|i| {
            (1..=g)
                .map(|h| u8::from(at_least(decomp.first_position(i), h)))
                .collect()
        })
        .collect();
    let v = (1..=decomp.blocks())
        .map(|i| {
            (1..=g)
                .map(|h| {
                    (decomp.first_position(i)..=decomp.last_position(i))
                        .filter(|&pos| at_least(pos, h))
                        .count()
                })
                .collect()
        })
        .collect();
    CanonicalCovering { ubar, u, v }
}

/// Dense point for `model` from an allocation, a routing and covering
/// values. Variables absent from all three are zero.
pub fn solution_point(
    model: &MipModel,
    alloc: &Allocation,
    routing: &Routing,
    cover: &CanonicalCovering,
) -> Vec<f64> {
    model.point_from(|name| {
        let key = VarKey::parse(name)?;
        match key {
            VarKey::X(j, k) => Some(if alloc.hub_of.get(j) == Some(&k) { 1.0 } else { 0.0 }),
            VarKey::S(k, l, m) => Some(routing.get(&(k, l, m)).copied().unwrap_or(0.0)),
            other => cover.value(&other),
        }
    })
}

/// Assignment, linking, cardinality, flow balance, hub-destination,
/// open-hub and capacity rows shared by both formulations.
fn add_allocation_routing(model: &mut MipModel, inst: &Instance) -> Result<()> {
    let n = inst.n();
    let w = inst.outflow_totals();
    let total: f64 = w.iter().sum();
    let (mu, delta) = (inst.mu(), inst.delta());

    let mut x = vec![vec![0usize; n]; n];
    for (j, row) in x.iter_mut().enumerate() {
        for (k, slot) in row.iter_mut().enumerate() {
            *slot = model.add_var(VarKey::X(j, k).to_string(), VarKind::Binary, 0.0, 1.0, 0.0)?;
        }
    }
    let mut s = vec![vec![vec![0usize; n]; n]; n];
    for k in 0..n {
        for l in 0..n {
            for m in 0..n {
                let c = mu * inst.cost(k, l) + delta * inst.cost(l, m);
                s[k][l][m] = model.add_var(
                    VarKey::S(k, l, m).to_string(),
                    VarKind::Continuous,
                    0.0,
                    f64::INFINITY,
                    c,
                )?;
            }
        }
    }

    for j in 0..n {
        model.add_row(format!("assign_{}", j + 1), "assign", (0..n).map(|k| (x[j][k], 1.0)), Sense::Eq, 1.0)?;
    }
    for k in 0..n {
        let terms = (0..n).map(|j| (x[j][k], 1.0)).chain([(x[k][k], -(n as f64))]);
        model.add_row(format!("link_{}", k + 1), "link", terms, Sense::Le, 0.0)?;
    }
    model.add_row(
        "cardinality",
        "cardinality",
        (0..n).map(|k| (x[k][k], 1.0)),
        Sense::Eq,
        inst.p() as f64,
    )?;
    for k in 0..n {
        for m in 0..n {
            let terms = (0..n)
                .map(|l| (s[k][l][m], 1.0))
                .chain((0..n).map(|j| (x[j][k], -inst.flow(j, m))));
            model.add_row(format!("balance_{}_{}", k + 1, m + 1), "balance", terms, Sense::Eq, 0.0)?;
        }
    }
    let inflow: Vec<f64> = (0..n).map(|m| (0..n).map(|j| inst.flow(j, m)).sum()).collect();
    for k in 0..n {
        for l in 0..n {
            for m in 0..n {
                if l == m {
                    continue;
                }
                model.add_row(
                    format!("hubdest_{}_{}_{}", k + 1, l + 1, m + 1),
                    "hubdest",
                    [(s[k][l][m], 1.0), (x[m][m], inflow[m])],
                    Sense::Le,
                    inflow[m],
                )?;
            }
        }
    }
    for k in 0..n {
        let terms = (0..n)
            .flat_map(|l| (0..n).map(move |m| (l, m)))
            .map(|(l, m)| (s[k][l][m], 1.0))
            .chain([(x[k][k], -total)]);
        model.add_row(format!("firsthub_{}", k + 1), "firsthub", terms.collect::<Vec<_>>(), Sense::Le, 0.0)?;
    }
    for l in 0..n {
        let terms = (0..n)
            .flat_map(|k| (0..n).map(move |m| (k, m)))
            .map(|(k, m)| (s[k][l][m], 1.0))
            .chain([(x[l][l], -total)]);
        model.add_row(format!("secondhub_{}", l + 1), "secondhub", terms.collect::<Vec<_>>(), Sense::Le, 0.0)?;
    }
    for k in 0..n {
        let terms = (0..n)
            .map(|j| (x[j][k], w[j]))
            .chain([(x[k][k], -inst.capacity(k))]);
        model.add_row(format!("capacity_{}", k + 1), "capacity", terms, Sense::Le, 0.0)?;
    }
    Ok(())
}

/// `x_jk` terms of the allocations costing at least `ĉ_(h)`.
fn x_terms_at_least(model: &MipModel, scale: &OrderedCostScale, h: usize, coef: f64) -> Vec<(usize, f64)> {
    let n = scale.outflows().len();
    let mut out = Vec::new();
    for j in 0..n {
        for k in 0..n {
            if scale.rank_of(j, k) >= h {
                out.push((model.id_of(&VarKey::X(j, k)).expect("x exists"), coef));
            }
        }
    }
    out
}

/// Full covering formulation with one `ubar` row per sorted position.
pub fn build_f_ubar(inst: &Instance, scale: &OrderedCostScale, lambda: &LambdaVector) -> Result<MipModel> {
    let n = inst.n();
    if lambda.len() != n {
        return Err(Error::Lambda(format!("lambda has {} entries, expected {n}", lambda.len())));
    }
    let g = scale.g();
    let mut model = MipModel::new("fubar");
    add_allocation_routing(&mut model, inst)?;

    let mut ubar = vec![vec![0usize; g + 1]; n];
    for i in 0..n {
        for h in 1..=g {
            let obj = if h >= 2 {
                lambda.values[i] * (scale.level(h) - scale.level(h - 1))
            } else {
                0.0
            };
            ubar[i][h] = model.add_var(VarKey::Ubar(i, h).to_string(), VarKind::Binary, 0.0, 1.0, obj)?;
        }
    }
    for h in 1..=g {
        let terms: Vec<(usize, f64)> = (0..n)
            .map(|i| (ubar[i][h], 1.0))
            .chain(x_terms_at_least(&model, scale, h, -1.0))
            .collect();
        model.add_row(format!("cover_{h}"), "cover", terms, Sense::Eq, 0.0)?;
    }
    for i in 1..n {
        for h in 1..=g {
            model.add_row(
                format!("sort_{}_{h}", i + 1),
                "sort",
                [(ubar[i][h], 1.0), (ubar[i - 1][h], -1.0)],
                Sense::Ge,
                0.0,
            )?;
        }
    }
    Ok(model)
}

/// Block formulation: one `(u, v)` pair per nonzero block of `λ̃` and level.
///
/// Monotonicity in `h`, the `β_i = 1` equalities and the trivial fixes at
/// `h = 1, 2` are part of the base model.
pub fn build_f_uv(inst: &Instance, scale: &OrderedCostScale, decomp: &BlockDecomposition) -> Result<MipModel> {
    let n = inst.n();
    if decomp.p != inst.p() || decomp.lambda_tilde.len() + decomp.p != n {
        return Err(Error::Lambda("block decomposition does not match the instance".into()));
    }
    let g = scale.g();
    let blocks = decomp.blocks();
    let mut model = MipModel::new("fuv");
    add_allocation_routing(&mut model, inst)?;
    if blocks == 0 {
        return Ok(model);
    }

    let mut u = vec![vec![0usize; g + 1]; blocks + 1];
    let mut v = vec![vec![0usize; g + 1]; blocks + 1];
    for i in 1..=blocks {
        let beta = decomp.beta(i) as f64;
        for h in 1..=g {
            u[i][h] = model.add_var(VarKey::U(i, h).to_string(), VarKind::Binary, 0.0, 1.0, 0.0)?;
            let obj = if h >= 2 {
                decomp.gamma(i) * (scale.level(h) - scale.level(h - 1))
            } else {
                0.0
            };
            v[i][h] = model.add_var(VarKey::V(i, h).to_string(), VarKind::Integer, 0.0, beta, obj)?;
        }
    }

    for h in 2..=g {
        let terms: Vec<(usize, f64)> = (1..=blocks)
            .flat_map(|i| [(u[i][h], decomp.alpha(i) as f64), (v[i][h], 1.0)])
            .chain(x_terms_at_least(&model, scale, h, -1.0))
            .collect();
        model.add_row(
            format!("count_{h}"),
            "count",
            terms,
            Sense::Ge,
            -(decomp.alpha(blocks + 1) as f64),
        )?;
    }
    for i in 2..=blocks {
        for h in 1..=g {
            model.add_row(
                format!("bsort_{i}_{h}"),
                "block_sort",
                [(u[i][h], 1.0), (u[i - 1][h], -1.0)],
                Sense::Ge,
                0.0,
            )?;
            model.add_row(
                format!("blink_{i}_{h}"),
                "block_link",
                [(u[i][h], decomp.beta(i - 1) as f64), (v[i - 1][h], -1.0)],
                Sense::Ge,
                0.0,
            )?;
        }
    }
    for i in 1..=blocks {
        for h in 1..=g {
            model.add_row(
                format!("blower_{i}_{h}"),
                "block_lower",
                [(v[i][h], 1.0), (u[i][h], -(decomp.beta(i) as f64))],
                Sense::Ge,
                0.0,
            )?;
            if decomp.beta(i) == 1 {
                model.add_row(
                    format!("unit_{i}_{h}"),
                    "unit_block",
                    [(v[i][h], 1.0), (u[i][h], -1.0)],
                    Sense::Eq,
                    0.0,
                )?;
            }
        }
        for h in 1..g {
            model.add_row(
                format!("monou_{i}_{h}"),
                "mono_u",
                [(u[i][h], 1.0), (u[i][h + 1], -1.0)],
                Sense::Ge,
                0.0,
            )?;
            model.add_row(
                format!("monov_{i}_{h}"),
                "mono_v",
                [(v[i][h], 1.0), (v[i][h + 1], -1.0)],
                Sense::Ge,
                0.0,
            )?;
        }
    }

    // Every sorted position is at cost ≥ ĉ_(1) = 0; positions past the p
    // hubs cost ≥ ĉ_(2) when no origin reaches another site for free.
    let trivial_levels = if g >= 2 && positive_off_diagonal(scale) { 2 } else { 1 };
    for i in 1..=blocks {
        let beta = decomp.beta(i) as f64;
        for h in 1..=trivial_levels {
            model.tighten_bounds(u[i][h], 1.0, 1.0);
            model.tighten_bounds(v[i][h], beta, beta);
        }
    }
    Ok(model)
}

/// True when `ĉ_jk > 0` for every `j ≠ k`.
pub fn positive_off_diagonal(scale: &OrderedCostScale) -> bool {
    let n = scale.outflows().len();
    (0..n).all(|j| (0..n).all(|k| j == k || scale.c_hat(j, k) > 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::example::{example1, EXAMPLE1_LAMBDA};
    use crate::instance::compute_order_scale;
    use crate::lambda::block_decompose;

    fn example_alloc() -> Allocation {
        // 1→6, 2→4, 3→4, 4→4, 5→6, 6→6
        Allocation::new(vec![5, 3, 3, 3, 5, 5])
    }

    fn example_routing() -> Routing {
        let printed = [
            ((4, 4, 2), 11.0),
            ((4, 4, 3), 6.0),
            ((4, 4, 4), 19.0),
            ((4, 6, 1), 29.0),
            ((4, 6, 5), 45.0),
            ((4, 6, 6), 28.0),
            ((6, 4, 2), 23.0),
            ((6, 4, 4), 23.0),
            ((6, 6, 1), 27.0),
            ((6, 6, 3), 29.0),
            ((6, 6, 5), 29.0),
            ((6, 6, 6), 3.0),
        ];
        printed
            .iter()
            .map(|&((k, l, m), s)| ((k - 1, l - 1, m - 1), s))
            .collect()
    }

    #[test]
    fn example_objective_breakdown() {
        let inst = example1();
        let scale = compute_order_scale(&inst);
        let lambda = LambdaVector::custom(EXAMPLE1_LAMBDA.to_vec()).unwrap();
        let b = evaluate_solution(&inst, &scale, &lambda, &example_alloc(), &example_routing()).unwrap();
        assert!((b.ordered - 636.0).abs() < 1e-9);
        assert!((b.routing - 1500.8).abs() < 1e-6);
        assert!((b.total - 2136.8).abs() < 1e-6);

        let zero = LambdaVector::custom(vec![0.0; 6]).unwrap();
        let b = evaluate_solution(&inst, &scale, &zero, &example_alloc(), &example_routing()).unwrap();
        assert_eq!(b.ordered, 0.0);
    }

    #[test]
    fn infeasible_allocations_are_named() {
        let inst = example1();
        let scale = compute_order_scale(&inst);
        let lambda = LambdaVector::custom(EXAMPLE1_LAMBDA.to_vec()).unwrap();
        let cases = [
            (vec![5, 3, 3, 3, 5, 4], "link"),
            (vec![0, 3, 3, 3, 5, 5], "cardinality"),
            (vec![5, 5, 5, 3, 5, 5], "capacity"),
        ];
        for (hub_of, name) in cases {
            match evaluate_solution(&inst, &scale, &lambda, &Allocation::new(hub_of), &Routing::new()) {
                Err(Error::InfeasibleAllocation { constraint, .. }) => assert_eq!(constraint, name),
                other => panic!("expected {name}, got {other:?}"),
            }
        }
    }

    #[test]
    fn example_canonical_covering() {
        let inst = example1();
        let scale = compute_order_scale(&inst);
        let lambda = LambdaVector::custom(EXAMPLE1_LAMBDA.to_vec()).unwrap();
        let decomp = block_decompose(&lambda, 2).unwrap();
        let cov = canonical_covering(&example_alloc(), &scale, &decomp);
        // last one / first zero per sorted position
        let printed = [(1, 1), (2, 1), (3, 5), (4, 6), (5, 9), (6, 12)];
        for (pos, last) in printed {
            assert_eq!(cov.ubar(pos - 1, last), 1, "position {pos}");
            assert_eq!(cov.ubar(pos - 1, last + 1), 0, "position {pos}");
        }
        for h in 1..=26 {
            let expect = if h <= 9 {
                2
            } else if h <= 12 {
                1
            } else {
                0
            };
            assert_eq!(cov.v(1, h), expect, "v_1_{h}");
        }
    }

    #[test]
    fn all_hubs_cover_nothing_above_zero() {
        let inst = example1().with_hub_count(6).unwrap();
        let scale = compute_order_scale(&inst);
        let lambda = LambdaVector::custom(EXAMPLE1_LAMBDA.to_vec()).unwrap();
        let decomp = block_decompose(&lambda, 6).unwrap();
        let cov = canonical_covering(&Allocation::new((0..6).collect()), &scale, &decomp);
        for i in 0..6 {
            for h in 2..=scale.g() {
                assert_eq!(cov.ubar(i, h), 0);
            }
        }
    }

    #[test]
    fn example_model_sizes() {
        let inst = example1();
        let scale = compute_order_scale(&inst);
        let lambda = LambdaVector::custom(EXAMPLE1_LAMBDA.to_vec()).unwrap();
        let fu = build_f_ubar(&inst, &scale, &lambda).unwrap();
        assert_eq!(fu.count_vars_with_prefix("ubar_"), 156);
        assert_eq!(fu.count_vars_with_prefix("x_"), 36);
        assert_eq!(fu.count_vars_with_prefix("s_"), 216);
        assert_eq!(fu.count_rows_tagged("hubdest"), 180);

        let decomp = block_decompose(&lambda, 2).unwrap();
        let fuv = build_f_uv(&inst, &scale, &decomp).unwrap();
        let covering = fuv.count_vars_with_prefix("u_") + fuv.count_vars_with_prefix("v_");
        assert_eq!(covering, 52);
        assert_eq!(156 - covering, 104);
    }

    #[test]
    fn example_solution_is_feasible_in_both_models() {
        let inst = example1();
        let scale = compute_order_scale(&inst);
        let lambda = LambdaVector::custom(EXAMPLE1_LAMBDA.to_vec()).unwrap();
        let decomp = block_decompose(&lambda, 2).unwrap();
        let cov = canonical_covering(&example_alloc(), &scale, &decomp);
        for model in [
            build_f_ubar(&inst, &scale, &lambda).unwrap(),
            build_f_uv(&inst, &scale, &decomp).unwrap(),
        ] {
            let point = solution_point(&model, &example_alloc(), &example_routing(), &cov);
            assert_eq!(model.violations(&point, 1e-9), Vec::<String>::new(), "{}", model.name);
            assert!((model.objective_value(&point) - 2136.8).abs() < 1e-6);
        }
    }

    #[test]
    fn vanishing_ordered_part_gives_routing_only_model() {
        let inst = example1();
        let scale = compute_order_scale(&inst);
        let lambda = LambdaVector::custom(vec![1.0, 1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let decomp = block_decompose(&lambda, 2).unwrap();
        let m = build_f_uv(&inst, &scale, &decomp).unwrap();
        assert_eq!(m.count_vars_with_prefix("u_") + m.count_vars_with_prefix("v_"), 0);
        assert!(m
            .vars()
            .iter()
            .zip(m.objective())
            .all(|(v, &c)| c == 0.0 || v.name.starts_with("s_")));
    }
}
