//! Linearized binary integer program.
//!
//! Variables: `x(c,l)` one-hot labels per kept cell, `d(k,l)` the XOR of the
//! two cells' `l` indicators across candidate edge `k`, `s(k)` the edge
//! selection with `2·s(k) = Σ_l d(k,l)`, and `y(i,j) ≥ s_i + s_j − 1` for
//! penalized pairs. The objective is exact for any feasible assignment
//! where `y` is the product of its two selections, which is what a
//! minimizer chooses since pair penalties are positive.

use super::{EnergyModel, Labeling};
use crate::error::{Error, Result};
use crate::fracture::Arrangement;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Assign { cell: usize, label: usize },
    Xor { edge: usize, label: usize },
    Select { edge: usize },
    Pair { a: usize, b: usize },
}

impl VarKind {
    pub fn name(&self) -> String {
        match *self {
            VarKind::Assign { cell, label } => format!("x_{cell}_{label}"),
            VarKind::Xor { edge, label } => format!("d_{edge}_{label}"),
            VarKind::Select { edge } => format!("s_{edge}"),
            VarKind::Pair { a, b } => format!("y_{a}_{b}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Eq,
    Le,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    fn holds(&self, x: &[bool]) -> bool {
        let lhs: f64 = self.terms.iter().map(|&(v, c)| if x[v] { c } else { 0.0 }).sum();
        match self.sense {
            Sense::Eq => (lhs - self.rhs).abs() < 1e-9,
            Sense::Le => lhs <= self.rhs + 1e-9,
            Sense::Ge => lhs >= self.rhs - 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BipInstance {
    pub vars: Vec<VarKind>,
    pub constraints: Vec<Constraint>,
    pub objective: Vec<f64>,
    pub constant: f64,
    pub model: EnergyModel,
    x_index: Vec<usize>,
    s_index: Vec<usize>,
}

/// Builds the program for the kept cells of `arr`. Fails when the variable
/// count exceeds `max_variables`; raising γ reduces the instance.
pub fn build_bip(model: EnergyModel, max_variables: usize) -> Result<BipInstance> {
    let n = model.cells.len();
    let l = model.label_count;
    if n == 0 {
        return Err(Error::NoBuilding);
    }
    let estimate = n * l + model.edges.len() * (l + 1) + model.pairs.len();
    if estimate > max_variables {
        return Err(Error::InstanceTooLarge {
            what: format!("{estimate} variables (cap {max_variables}); raise gamma"),
        });
    }

    let mut vars = Vec::with_capacity(estimate);
    let mut constraints = Vec::new();
    let mut objective = Vec::with_capacity(estimate);
    let mut constant = model.constant;

    let x_index: Vec<usize> = (0..n * l).map(|i| vars.len() + i).collect();
    for cell in 0..n {
        for label in 0..l {
            vars.push(VarKind::Assign { cell, label });
            objective.push(0.0);
        }
        constraints.push(Constraint {
            terms: (0..l).map(|label| (x_index[cell * l + label], 1.0)).collect(),
            sense: Sense::Eq,
            rhs: 1.0,
        });
    }

    let mut s_index = Vec::with_capacity(model.edges.len());
    for (k, e) in model.edges.iter().enumerate() {
        let mut d_vars = Vec::with_capacity(l);
        for label in 0..l {
            let d = vars.len();
            vars.push(VarKind::Xor { edge: k, label });
            objective.push(0.0);
            let (xp, xq) = (x_index[e.p * l + label], x_index[e.q * l + label]);
            constraints.push(Constraint {
                terms: vec![(d, 1.0), (xp, -1.0), (xq, 1.0)],
                sense: Sense::Ge,
                rhs: 0.0,
            });
            constraints.push(Constraint {
                terms: vec![(d, 1.0), (xq, -1.0), (xp, 1.0)],
                sense: Sense::Ge,
                rhs: 0.0,
            });
            constraints.push(Constraint {
                terms: vec![(d, 1.0), (xp, -1.0), (xq, -1.0)],
                sense: Sense::Le,
                rhs: 0.0,
            });
            constraints.push(Constraint {
                terms: vec![(d, 1.0), (xp, 1.0), (xq, 1.0)],
                sense: Sense::Le,
                rhs: 2.0,
            });
            d_vars.push(d);
        }
        let s = vars.len();
        vars.push(VarKind::Select { edge: k });
        // cost = unselected + (selected − unselected)·s
        constant += e.cost_unselected;
        objective.push(e.cost_selected - e.cost_unselected);
        let mut terms = vec![(s, 2.0)];
        terms.extend(d_vars.iter().map(|&d| (d, -1.0)));
        constraints.push(Constraint {
            terms,
            sense: Sense::Eq,
            rhs: 0.0,
        });
        s_index.push(s);
    }

    for &(a, b, w) in &model.pairs {
        let y = vars.len();
        vars.push(VarKind::Pair { a, b });
        objective.push(w);
        constraints.push(Constraint {
            terms: vec![(y, 1.0), (s_index[a], -1.0), (s_index[b], -1.0)],
            sense: Sense::Ge,
            rhs: -1.0,
        });
    }

    Ok(BipInstance {
        vars,
        constraints,
        objective,
        constant,
        model,
        x_index,
        s_index,
    })
}

impl BipInstance {
    pub fn variable_count(&self) -> usize {
        self.vars.len()
    }

    pub fn objective_value(&self, x: &[bool]) -> f64 {
        self.constant
            + self
                .objective
                .iter()
                .zip(x)
                .filter(|(_, &b)| b)
                .map(|(c, _)| c)
                .sum::<f64>()
    }

    pub fn is_feasible(&self, x: &[bool]) -> bool {
        x.len() == self.vars.len() && self.constraints.iter().all(|c| c.holds(x))
    }

    /// Assignment induced by per-variable labels, with every auxiliary at
    /// its tightest value.
    pub fn encode(&self, labels: &[usize]) -> Vec<bool> {
        let l = self.model.label_count;
        let mut x = vec![false; self.vars.len()];
        for (cell, &lab) in labels.iter().enumerate() {
            x[self.x_index[cell * l + lab]] = true;
        }
        for (v, kind) in self.vars.iter().enumerate() {
            if let VarKind::Xor { edge, label } = *kind {
                let e = &self.model.edges[edge];
                x[v] = (labels[e.p] == label) != (labels[e.q] == label);
            }
        }
        for (k, &s) in self.s_index.iter().enumerate() {
            let e = &self.model.edges[k];
            x[s] = labels[e.p] != labels[e.q];
        }
        for (v, kind) in self.vars.iter().enumerate() {
            if let VarKind::Pair { a, b } = *kind {
                x[v] = x[self.s_index[a]] && x[self.s_index[b]];
            }
        }
        x
    }

    pub fn encode_labeling(&self, lab: &Labeling) -> Vec<bool> {
        self.encode(&self.model.from_labeling(lab))
    }

    pub fn decode(&self, x: &[bool], arr: &Arrangement) -> Labeling {
        let l = self.model.label_count;
        let labels: Vec<usize> = (0..self.model.cells.len())
            .map(|c| (0..l).find(|&k| x[self.x_index[c * l + k]]).unwrap_or(0))
            .collect();
        self.model.to_labeling(arr, &labels)
    }
}
