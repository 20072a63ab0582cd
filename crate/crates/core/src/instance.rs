//! Instance data, the canonical text format, the ordered cost scale and
//! capacity generation.
//!
//! The canonical file is whitespace separated UTF-8 text:
//!
//! ```text
//! # comment lines start with '#'
//! n p mu delta
//! <n rows of n unit costs>
//! <n rows of n flows>
//! <one row of n capacities>
//! ```

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::combinatorics::Combinations;
use crate::error::{Error, Result};

/// Default number of regeneration attempts when a generated instance turns
/// out to be infeasible.
pub const DEFAULT_REGEN_RETRIES: u32 = 100;

/// Largest `n` for which [`check_feasible`] enumerates hub sets.
pub const DEFAULT_FEASIBILITY_CEILING: usize = 14;

/// A validated problem instance. Immutable after construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    n: usize,
    cost: Vec<Vec<f64>>,
    flow: Vec<Vec<f64>>,
    capacity: Vec<f64>,
    p: usize,
    mu: f64,
    delta: f64,
}

impl Instance {
    pub fn new(
        cost: Vec<Vec<f64>>,
        flow: Vec<Vec<f64>>,
        capacity: Vec<f64>,
        p: usize,
        mu: f64,
        delta: f64,
    ) -> Result<Self> {
        let n = cost.len();
        if n == 0 {
            return Err(Error::Validation("instance has no sites".into()));
        }
        let square = |m: &Vec<Vec<f64>>, what: &str| -> Result<()> {
            if m.len() != n || m.iter().any(|r| r.len() != n) {
                return Err(Error::Validation(format!("{what} matrix is not {n}x{n}")));
            }
            Ok(())
        };
        square(&cost, "cost")?;
        square(&flow, "flow")?;
        if capacity.len() != n {
            return Err(Error::Validation(format!(
                "capacity vector has {} entries, expected {n}",
                capacity.len()
            )));
        }
        for j in 0..n {
            if cost[j][j] != 0.0 {
                return Err(Error::Validation(format!(
                    "free self-service violated: c_{0}{0} = {1}",
                    j + 1,
                    cost[j][j]
                )));
            }
            for k in 0..n {
                if !(cost[j][k] >= 0.0) || !cost[j][k].is_finite() {
                    return Err(Error::Validation(format!(
                        "negative or non-finite cost c_{}{} = {}",
                        j + 1,
                        k + 1,
                        cost[j][k]
                    )));
                }
                if !(flow[j][k] >= 0.0) || !flow[j][k].is_finite() {
                    return Err(Error::Validation(format!(
                        "negative or non-finite flow w_{}{} = {}",
                        j + 1,
                        k + 1,
                        flow[j][k]
                    )));
                }
            }
            if !(capacity[j] >= 0.0) || !capacity[j].is_finite() {
                return Err(Error::Validation(format!(
                    "negative or non-finite capacity b_{} = {}",
                    j + 1,
                    capacity[j]
                )));
            }
        }
        if p == 0 || p > n {
            return Err(Error::Validation(format!("hub count p = {p} outside 1..={n}")));
        }
        if !(mu > 0.0 && mu < 1.0) {
            return Err(Error::Validation(format!("mu = {mu} outside (0, 1)")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Validation(format!("delta = {delta} outside (0, 1)")));
        }
        if mu >= delta {
            return Err(Error::Validation(format!("mu = {mu} must be below delta = {delta}")));
        }
        Ok(Instance {
            n,
            cost,
            flow,
            capacity,
            p,
            mu,
            delta,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Unit cost from site `j` to site `k` (0-based).
    pub fn cost(&self, j: usize, k: usize) -> f64 {
        self.cost[j][k]
    }

    /// Flow from site `j` to site `m` (0-based).
    pub fn flow(&self, j: usize, m: usize) -> f64 {
        self.flow[j][m]
    }

    pub fn capacity(&self, k: usize) -> f64 {
        self.capacity[k]
    }

    pub fn capacities(&self) -> &[f64] {
        &self.capacity
    }

    pub fn cost_matrix(&self) -> &[Vec<f64>] {
        &self.cost
    }

    pub fn flow_matrix(&self) -> &[Vec<f64>] {
        &self.flow
    }

    /// `W_j`, the total flow leaving each origin.
    pub fn outflow_totals(&self) -> Vec<f64> {
        self.flow.iter().map(|row| row.iter().sum()).collect()
    }

    pub fn total_flow(&self) -> f64 {
        self.outflow_totals().iter().sum()
    }

    pub fn with_capacities(&self, capacity: Vec<f64>) -> Result<Self> {
        Instance::new(
            self.cost.clone(),
            self.flow.clone(),
            capacity,
            self.p,
            self.mu,
            self.delta,
        )
    }

    pub fn with_hub_count(&self, p: usize) -> Result<Self> {
        Instance::new(
            self.cost.clone(),
            self.flow.clone(),
            self.capacity.clone(),
            p,
            self.mu,
            self.delta,
        )
    }

    /// Serializes to the canonical text format. Values use the shortest
    /// representation that parses back to the same `f64`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {} {} {}", self.n, self.p, self.mu, self.delta);
        out.push_str("# costs\n");
        for row in &self.cost {
            out.push_str(&join(row));
            out.push('\n');
        }
        out.push_str("# flows\n");
        for row in &self.flow {
            out.push_str(&join(row));
            out.push('\n');
        }
        out.push_str("# capacities\n");
        out.push_str(&join(&self.capacity));
        out.push('\n');
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Parses a canonical instance document.
pub fn load_instance(source: &str) -> Result<Instance> {
    let mut lines = source
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let numbers = |line: usize, text: &str| -> Result<Vec<f64>> {
        text.split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| Error::parse(line, format!("`{tok}` is not a number")))
            })
            .collect()
    };

    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty document"))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 4 {
        return Err(Error::parse(hline, "header must read `n p mu delta`"));
    }
    let n: usize = head[0]
        .parse()
        .map_err(|_| Error::parse(hline, format!("`{}` is not a site count", head[0])))?;
    let p: usize = head[1]
        .parse()
        .map_err(|_| Error::parse(hline, format!("`{}` is not a hub count", head[1])))?;
    let mu: f64 = head[2]
        .parse()
        .map_err(|_| Error::parse(hline, format!("`{}` is not a number", head[2])))?;
    let delta: f64 = head[3]
        .parse()
        .map_err(|_| Error::parse(hline, format!("`{}` is not a number", head[3])))?;
    if n == 0 {
        return Err(Error::parse(hline, "n must be positive"));
    }

    let mut read_row = |what: &str| -> Result<Vec<f64>> {
        let (line, text) = lines
            .next()
            .ok_or_else(|| Error::parse(source.lines().count() + 1, format!("missing {what} row")))?;
        let row = numbers(line, text)?;
        if row.len() != n {
            return Err(Error::parse(
                line,
                format!("{what} row has {} values, expected {n}", row.len()),
            ));
        }
        Ok(row)
    };

    let mut cost = Vec::with_capacity(n);
    for _ in 0..n {
        cost.push(read_row("cost")?);
    }
    let mut flow = Vec::with_capacity(n);
    for _ in 0..n {
        flow.push(read_row("flow")?);
    }
    let capacity = read_row("capacity")?;
    if let Some((line, _)) = lines.next() {
        return Err(Error::parse(line, "unexpected trailing data"));
    }
    Instance::new(cost, flow, capacity, p, mu, delta)
}

pub fn load_instance_file(path: impl AsRef<Path>) -> Result<Instance> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    load_instance(&text)
}

/// Allocation costs `ĉ_jk = c_jk W_j` and their distinct sorted levels.
#[derive(Clone, Debug)]
pub struct OrderedCostScale {
    c_hat: Vec<Vec<f64>>,
    w_row: Vec<f64>,
    levels: Vec<f64>,
    rank: Vec<Vec<usize>>,
}

impl OrderedCostScale {
    pub fn new(inst: &Instance) -> Self {
        compute_order_scale(inst)
    }

    pub fn c_hat(&self, j: usize, k: usize) -> f64 {
        self.c_hat[j][k]
    }

    pub fn c_hat_matrix(&self) -> &[Vec<f64>] {
        &self.c_hat
    }

    pub fn outflow(&self, j: usize) -> f64 {
        self.w_row[j]
    }

    pub fn outflows(&self) -> &[f64] {
        &self.w_row
    }

    /// Number of distinct levels `G`.
    pub fn g(&self) -> usize {
        self.levels.len()
    }

    /// Levels `ĉ_(1) < ... < ĉ_(G)` as a 0-based slice.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// `ĉ_(h)` for `h` in `0..=G`, with `ĉ_(0) = 0`.
    pub fn level(&self, h: usize) -> f64 {
        if h == 0 {
            0.0
        } else {
            self.levels[h - 1]
        }
    }

    /// 1-based level index of `ĉ_jk`.
    pub fn rank_of(&self, j: usize, k: usize) -> usize {
        self.rank[j][k]
    }
}

pub fn compute_order_scale(inst: &Instance) -> OrderedCostScale {
    let n = inst.n();
    let w_row = inst.outflow_totals();
    let c_hat: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|k| inst.cost(j, k) * w_row[j]).collect())
        .collect();
    let mut levels: Vec<f64> = c_hat.iter().flatten().copied().collect();
    levels.push(0.0);
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let rank = c_hat
        .iter()
        .map(|row| {
            row.iter()
                .map(|v| {
                    levels
                        .binary_search_by(|probe| probe.total_cmp(v))
                        .expect("every allocation cost is a level")
                        + 1
                })
                .collect()
        })
        .collect();
    OrderedCostScale {
        c_hat,
        w_row,
        levels,
        rank,
    }
}

/// Draws each capacity uniformly from `[min_i W_i, ½ Σ_i W_i]`.
pub fn generate_capacities(outflows: &[f64], seed: u64) -> Vec<f64> {
    generate_capacities_up_to(outflows, seed, 0.5)
}

/// Same as [`generate_capacities`] with upper end `fraction · Σ_i W_i`.
pub fn generate_capacities_up_to(outflows: &[f64], seed: u64, fraction: f64) -> Vec<f64> {
    let lo = outflows.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = fraction * outflows.iter().sum::<f64>();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    outflows
        .iter()
        .map(|_| if hi > lo { rng.gen_range(lo..=hi) } else { lo })
        .collect()
}

/// Whether some set of `p` hubs admits a capacity-feasible single
/// allocation. Exact, by enumeration of hub sets and a bin-packing search.
pub fn check_feasible(inst: &Instance) -> Result<bool> {
    check_feasible_with_ceiling(inst, DEFAULT_FEASIBILITY_CEILING)
}

pub fn check_feasible_with_ceiling(inst: &Instance, ceiling: usize) -> Result<bool> {
    if inst.n() > ceiling {
        return Err(Error::SizeLimit {
            size: inst.n(),
            ceiling,
        });
    }
    let w = inst.outflow_totals();
    Ok(Combinations::new(inst.n(), inst.p()).any(|hubs| hub_set_packable(inst, &w, &hubs)))
}

/// Hub sets drawn from the `p + 6` largest capacities, tried with a bounded
/// packing search. `true` is a certificate; `false` only means none was found.
pub fn find_feasible_hub_set(inst: &Instance) -> Option<Vec<usize>> {
    let n = inst.n();
    let w = inst.outflow_totals();
    let total: f64 = w.iter().sum();
    let mut by_cap: Vec<usize> = (0..n).collect();
    by_cap.sort_by(|&a, &b| inst.capacity(b).total_cmp(&inst.capacity(a)).then(a.cmp(&b)));
    let pool = &by_cap[..(inst.p() + 6).min(n)];
    Combinations::new(pool.len(), inst.p())
        .map(|idx| {
            let mut hubs: Vec<usize> = idx.iter().map(|&i| pool[i]).collect();
            hubs.sort_unstable();
            hubs
        })
        .filter(|hubs| hubs.iter().map(|&k| inst.capacity(k)).sum::<f64>() + CAPACITY_EPS >= total)
        .find(|hubs| {
            let mut residual: Vec<f64> = hubs.iter().map(|&k| inst.capacity(k) - w[k]).collect();
            if residual.iter().any(|&r| r < -CAPACITY_EPS) {
                return false;
            }
            let mut items: Vec<f64> = (0..n).filter(|j| !hubs.contains(j)).map(|j| w[j]).collect();
            items.sort_by(|a, b| b.total_cmp(a));
            let mut budget = PACK_NODE_BUDGET;
            pack_bounded(&items, &mut residual, &mut budget)
        })
}

const PACK_NODE_BUDGET: usize = 20_000;

fn pack_bounded(items: &[f64], residual: &mut [f64], budget: &mut usize) -> bool {
    let Some((&first, rest)) = items.split_first() else {
        return true;
    };
    if *budget == 0 {
        return false;
    }
    *budget -= 1;
    for b in 0..residual.len() {
        if residual[..b].iter().any(|&r| r == residual[b]) {
            continue;
        }
        if residual[b] + CAPACITY_EPS >= first {
            residual[b] -= first;
            let ok = pack_bounded(rest, residual, budget);
            residual[b] += first;
            if ok {
                return true;
            }
        }
    }
    false
}

/// Can the non-hub origins be packed into the residual hub capacities?
pub(crate) fn hub_set_packable(inst: &Instance, w: &[f64], hubs: &[usize]) -> bool {
    let mut residual: Vec<f64> = hubs.iter().map(|&k| inst.capacity(k) - w[k]).collect();
    if residual.iter().any(|&r| r < -CAPACITY_EPS) {
        return false;
    }
    let mut items: Vec<f64> = (0..inst.n())
        .filter(|j| !hubs.contains(j))
        .map(|j| w[j])
        .collect();
    items.sort_by(|a, b| b.total_cmp(a));
    pack(&items, &mut residual)
}

pub(crate) const CAPACITY_EPS: f64 = 1e-9;

fn pack(items: &[f64], residual: &mut [f64]) -> bool {
    let Some((&first, rest)) = items.split_first() else {
        return true;
    };
    for b in 0..residual.len() {
        // bins with identical residual are interchangeable
        if residual[..b].iter().any(|&r| r == residual[b]) {
            continue;
        }
        if residual[b] + CAPACITY_EPS >= first {
            residual[b] -= first;
            let ok = pack(rest, residual);
            residual[b] += first;
            if ok {
                return true;
            }
        }
    }
    false
}

/// Random instance generator following the experimental protocol:
/// integer costs, integer flows and capacities from [`generate_capacities`],
/// regenerated with `seed + 1` when infeasible. Above
/// [`DEFAULT_FEASIBILITY_CEILING`] sites feasibility needs a certificate from
/// [`find_feasible_hub_set`].
#[derive(Clone, Debug)]
pub struct InstanceGenerator {
    pub n: usize,
    pub p: usize,
    pub mu: f64,
    pub delta: f64,
    pub max_cost: u32,
    pub max_flow: u32,
    pub retries: u32,
    /// Capacities are drawn up to this share of the total outflow. With
    /// the default ½, two hubs can almost never serve everything.
    pub capacity_fraction: f64,
}

impl InstanceGenerator {
    pub fn new(n: usize, p: usize) -> Self {
        InstanceGenerator {
            n,
            p,
            mu: 0.7,
            delta: 0.9,
            max_cost: 20,
            max_flow: 20,
            retries: DEFAULT_REGEN_RETRIES,
            capacity_fraction: 0.5,
        }
    }

    /// Costs and flows only; capacities are left unbounded (`Σ W`).
    pub fn uncapacitated(&self, seed: u64) -> Result<Instance> {
        let n = self.n;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cost: Vec<Vec<f64>> = (0..n)
            .map(|j| {
                (0..n)
                    .map(|k| {
                        if j == k {
                            0.0
                        } else {
                            f64::from(rng.gen_range(1..=self.max_cost))
                        }
                    })
                    .collect()
            })
            .collect();
        let mut flow: Vec<Vec<f64>> = (0..n)
            .map(|j| {
                (0..n)
                    .map(|m| {
                        if j == m {
                            0.0
                        } else {
                            f64::from(rng.gen_range(0..=self.max_flow))
                        }
                    })
                    .collect()
            })
            .collect();
        // every origin ships something so allocation costs are positive
        for (j, row) in flow.iter_mut().enumerate() {
            if n > 1 && row.iter().sum::<f64>() == 0.0 {
                row[(j + 1) % n] = 1.0;
            }
        }
        let total: f64 = flow.iter().flatten().sum();
        Instance::new(cost, flow, vec![total; n], self.p, self.mu, self.delta)
    }

    /// A feasible capacitated instance. Returns the instance and the seed
    /// that produced it.
    pub fn generate(&self, seed: u64) -> Result<(Instance, u64)> {
        let mut s = seed;
        for _ in 0..=self.retries {
            let base = self.uncapacitated(s)?;
            let b = generate_capacities_up_to(&base.outflow_totals(), s, self.capacity_fraction);
            let inst = base.with_capacities(b)?;
            let feasible = if inst.n() <= DEFAULT_FEASIBILITY_CEILING {
                check_feasible(&inst)?
            } else {
                find_feasible_hub_set(&inst).is_some()
            };
            if feasible {
                return Ok((inst, s));
            }
            s += 1;
        }
        Err(Error::Infeasible)
    }
}
