//! Solver-agnostic MIP representation.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VarKind {
    Binary,
    Integer,
    Continuous,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        })
    }
}

/// Typed handle for the variables of both formulations. Indices are
/// 0-based here; [`fmt::Display`] renders the 1-based naming contract
/// (`x_j_k`, `s_k_l_m`, `ubar_i_h`, `u_i_h`, `v_i_h`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKey {
    X(usize, usize),
    S(usize, usize, usize),
    Ubar(usize, usize),
    /// Block index `i` is 1-based, level `h` is 1-based, as in the text.
    U(usize, usize),
    V(usize, usize),
    Named(String),
}

impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarKey::X(j, k) => write!(f, "x_{}_{}", j + 1, k + 1),
            VarKey::S(k, l, m) => write!(f, "s_{}_{}_{}", k + 1, l + 1, m + 1),
            VarKey::Ubar(i, h) => write!(f, "ubar_{}_{}", i + 1, h),
            VarKey::U(i, h) => write!(f, "u_{i}_{h}"),
            VarKey::V(i, h) => write!(f, "v_{i}_{h}"),
            VarKey::Named(s) => f.write_str(s),
        }
    }
}

impl VarKey {
    /// Inverse of `Display` for the structured names.
    pub fn parse(name: &str) -> Option<VarKey> {
        let mut parts = name.split('_');
        let head = parts.next()?;
        let nums: Option<Vec<usize>> = parts.map(|p| p.parse().ok()).collect();
        let nums = nums?;
        match (head, nums.as_slice()) {
            ("x", [j, k]) if *j > 0 && *k > 0 => Some(VarKey::X(j - 1, k - 1)),
            ("s", [k, l, m]) if *k > 0 && *l > 0 && *m > 0 => Some(VarKey::S(k - 1, l - 1, m - 1)),
            ("ubar", [i, h]) if *i > 0 => Some(VarKey::Ubar(i - 1, *h)),
            ("u", [i, h]) => Some(VarKey::U(*i, *h)),
            ("v", [i, h]) => Some(VarKey::V(*i, *h)),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Var {
    pub name: String,
    pub kind: VarKind,
    pub lb: f64,
    pub ub: f64,
}

/// A named linear relation `Σ coef·var  sense  rhs` with a family tag.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub name: String,
    pub tag: String,
    pub coefs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// Minimization model with stable variable and row names.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MipModel {
    pub name: String,
    vars: Vec<Var>,
    rows: Vec<Row>,
    objective: Vec<f64>,
    index: HashMap<String, usize>,
}

impl MipModel {
    pub fn new(name: impl Into<String>) -> Self {
        MipModel {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        kind: VarKind,
        lb: f64,
        ub: f64,
        obj: f64,
    ) -> Result<usize> {
        let name = name.into();
        if self.index.contains_key(&name) {
            return Err(Error::DuplicateVariable(name));
        }
        let (lb, ub) = match kind {
            VarKind::Binary => (lb.max(0.0), ub.min(1.0)),
            _ => (lb, ub),
        };
        let id = self.vars.len();
        self.index.insert(name.clone(), id);
        self.vars.push(Var { name, kind, lb, ub });
        self.objective.push(obj);
        Ok(id)
    }

    /// Appends a row; duplicate variable references are merged and exact
    /// zeros dropped.
    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        tag: impl Into<String>,
        coefs: impl IntoIterator<Item = (usize, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> Result<usize> {
        let mut terms: Vec<(usize, f64)> = coefs.into_iter().collect();
        if let Some(&(id, _)) = terms.iter().find(|(id, _)| *id >= self.vars.len()) {
            return Err(Error::UnknownVariable(format!("#{id}")));
        }
        terms.sort_by_key(|(v, _)| *v);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
        for (id, c) in terms {
            match merged.last_mut() {
                Some(last) if last.0 == id => last.1 += c,
                _ => merged.push((id, c)),
            }
        }
        merged.retain(|(_, c)| *c != 0.0);
        self.rows.push(Row {
            name: name.into(),
            tag: tag.into(),
            coefs: merged,
            sense,
            rhs,
        });
        Ok(self.rows.len() - 1)
    }

    /// Same as [`MipModel::add_row`] with terms addressed by name.
    pub fn add_row_by_key(
        &mut self,
        name: impl Into<String>,
        tag: impl Into<String>,
        terms: &[(VarKey, f64)],
        sense: Sense,
        rhs: f64,
    ) -> Result<usize> {
        let coefs = terms
            .iter()
            .map(|(k, c)| self.id_of(k).map(|id| (id, *c)))
            .collect::<Result<Vec<_>>>()?;
        self.add_row(name, tag, coefs, sense, rhs)
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn id_of(&self, key: &VarKey) -> Result<usize> {
        let name = key.to_string();
        self.id(&name).ok_or(Error::UnknownVariable(name))
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn set_objective(&mut self, id: usize, coef: f64) {
        self.objective[id] = coef;
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Tightens bounds to the intersection with `[lb, ub]`.
    pub fn tighten_bounds(&mut self, id: usize, lb: f64, ub: f64) {
        let v = &mut self.vars[id];
        v.lb = v.lb.max(lb);
        v.ub = v.ub.min(ub);
    }

    pub fn set_bounds(&mut self, id: usize, lb: f64, ub: f64) {
        let v = &mut self.vars[id];
        v.lb = lb;
        v.ub = ub;
    }

    pub fn count_vars(&self, pred: impl Fn(&Var) -> bool) -> usize {
        self.vars.iter().filter(|v| pred(v)).count()
    }

    pub fn count_vars_with_prefix(&self, prefix: &str) -> usize {
        self.count_vars(|v| v.name.starts_with(prefix))
    }

    pub fn count_rows_tagged(&self, tag: &str) -> usize {
        self.rows.iter().filter(|r| r.tag == tag).count()
    }

    /// Copy with every integrality requirement dropped.
    pub fn relaxed(&self) -> MipModel {
        let mut m = self.clone();
        for v in &mut m.vars {
            v.kind = VarKind::Continuous;
        }
        m
    }

    pub fn objective_value(&self, point: &[f64]) -> f64 {
        self.objective.iter().zip(point).map(|(c, x)| c * x).sum()
    }

    /// Names of rows and bounds violated by `point` beyond `tol`.
    pub fn violations(&self, point: &[f64], tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        for (v, &x) in self.vars.iter().zip(point) {
            if x < v.lb - tol || x > v.ub + tol {
                out.push(format!("bound:{} = {x} not in [{}, {}]", v.name, v.lb, v.ub));
            }
            if v.kind != VarKind::Continuous && (x - x.round()).abs() > tol {
                out.push(format!("integrality:{} = {x}", v.name));
            }
        }
        for r in &self.rows {
            let lhs: f64 = r.coefs.iter().map(|&(id, c)| c * point[id]).sum();
            let bad = match r.sense {
                Sense::Le => lhs > r.rhs + tol,
                Sense::Ge => lhs < r.rhs - tol,
                Sense::Eq => (lhs - r.rhs).abs() > tol,
            };
            if bad {
                out.push(format!("{} ({}): {lhs} {} {}", r.name, r.tag, r.sense, r.rhs));
            }
        }
        out
    }

    /// Builds a dense point from a name lookup; unknown names default to 0.
    pub fn point_from(&self, value: impl Fn(&str) -> Option<f64>) -> Vec<f64> {
        self.vars.iter().map(|v| value(&v.name).unwrap_or(0.0)).collect()
    }
}
