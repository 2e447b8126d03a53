//! Minimizers for the footprint energy.
//!
//! Both modes walk labelings as restricted growth strings in a fixed cell
//! order (breadth-first over candidate-edge adjacency): cell `i` may take a
//! label at most one above the largest label used before it, so each
//! partition of the cells is visited once.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use super::bip::BipInstance;
use super::EnergyModel;
use crate::error::{Error, Result};

/// Exhaustive mode refuses instances with more labelings than this.
pub const EXACT_STATE_LIMIT: u128 = 1 << 24;
const NODE_LIMIT: usize = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    Exact,
    BranchAndBound,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// Label per model variable (kept cell, in [`EnergyModel::cells`] order).
    pub labels: Vec<usize>,
    pub energy: f64,
    /// False when the budget or node limit stopped the search early.
    pub optimal: bool,
    pub nodes: u64,
}

/// Number of restricted growth strings of length `n` over at most `l`
/// labels, saturating.
pub fn labeling_count(n: usize, l: usize) -> u128 {
    // ways[k] = strings of the current length using exactly k labels.
    let mut ways = vec![0u128; l + 1];
    if n == 0 {
        return 1;
    }
    ways[1] = 1;
    for _ in 1..n {
        for k in (1..=l).rev() {
            ways[k] = ways[k]
                .saturating_mul(k as u128)
                .saturating_add(ways[k - 1]);
        }
    }
    ways.iter().fold(0u128, |a, &b| a.saturating_add(b))
}

struct Plan<'a> {
    model: &'a EnergyModel,
    order: Vec<usize>,
    /// Candidate edges that become determined when depth `d` is assigned.
    edges_at: Vec<Vec<usize>>,
    pairs_at: Vec<Vec<usize>>,
    /// Lower bound on the cost of edges determined at depth ≥ d.
    suffix_min: Vec<f64>,
}

impl<'a> Plan<'a> {
    fn new(model: &'a EnergyModel) -> Plan<'a> {
        let n = model.cells.len();
        let mut adj = vec![Vec::new(); n];
        for e in &model.edges {
            adj[e.p].push(e.q);
            adj[e.q].push(e.p);
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        let mut order = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut queue = std::collections::VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                order.push(v);
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
        let mut pos = vec![0; n];
        for (d, &v) in order.iter().enumerate() {
            pos[v] = d;
        }
        let mut edges_at = vec![Vec::new(); n];
        let mut edge_depth = vec![0; model.edges.len()];
        for (k, e) in model.edges.iter().enumerate() {
            let d = pos[e.p].max(pos[e.q]);
            edge_depth[k] = d;
            edges_at[d].push(k);
        }
        let mut pairs_at = vec![Vec::new(); n];
        for (k, &(i, j, _)) in model.pairs.iter().enumerate() {
            pairs_at[edge_depth[i].max(edge_depth[j])].push(k);
        }
        let mut suffix_min = vec![0.0; n + 1];
        for d in (0..n).rev() {
            suffix_min[d] = suffix_min[d + 1]
                + edges_at[d]
                    .iter()
                    .map(|&k| model.edges[k].cost_selected.min(model.edges[k].cost_unselected))
                    .sum::<f64>();
        }
        Plan {
            model,
            order,
            edges_at,
            pairs_at,
            suffix_min,
        }
    }

    fn selected(&self, k: usize, labels: &[usize]) -> bool {
        let e = &self.model.edges[k];
        labels[e.p] != labels[e.q]
    }

    /// Cost added by assigning depth `d`, with `labels` holding every
    /// variable up to and including that depth.
    fn increment(&self, d: usize, labels: &[usize]) -> f64 {
        let mut c = 0.0;
        for &k in &self.edges_at[d] {
            let e = &self.model.edges[k];
            c += if self.selected(k, labels) {
                e.cost_selected
            } else {
                e.cost_unselected
            };
        }
        for &k in &self.pairs_at[d] {
            let (i, j, w) = self.model.pairs[k];
            if self.selected(i, labels) && self.selected(j, labels) {
                c += w;
            }
        }
        c
    }
}

pub fn solve(bip: &BipInstance, mode: SolveMode, budget: Duration) -> Result<Solution> {
    solve_model(&bip.model, mode, budget)
}

pub fn solve_model(model: &EnergyModel, mode: SolveMode, budget: Duration) -> Result<Solution> {
    if budget.is_zero() {
        return Err(Error::InvalidBudget);
    }
    let n = model.cells.len();
    if n == 0 {
        return Err(Error::NoBuilding);
    }
    let l = model.label_count.max(1);
    match mode {
        SolveMode::Exact => {
            if labeling_count(n, l) > EXACT_STATE_LIMIT {
                return Err(Error::InstanceTooLarge {
                    what: format!("{n} cells with {l} labels exceed exhaustive limit"),
                });
            }
            Ok(exhaustive(model, l))
        }
        SolveMode::BranchAndBound => Ok(branch_and_bound(model, l, budget)),
    }
}

fn exhaustive(model: &EnergyModel, l: usize) -> Solution {
    let plan = Plan::new(model);
    let n = plan.order.len();
    let mut labels = vec![0usize; n];
    let mut best = (f64::INFINITY, labels.clone());
    let mut nodes = 0u64;

    fn rec(
        plan: &Plan,
        d: usize,
        used: usize,
        cost: f64,
        l: usize,
        labels: &mut Vec<usize>,
        best: &mut (f64, Vec<usize>),
        nodes: &mut u64,
    ) {
        if d == plan.order.len() {
            if cost < best.0 {
                *best = (cost, labels.clone());
            }
            return;
        }
        let v = plan.order[d];
        for lab in 0..=used.min(l - 1) {
            *nodes += 1;
            labels[v] = lab;
            let c = cost + plan.increment(d, labels);
            rec(plan, d + 1, used.max(lab + 1), c, l, labels, best, nodes);
        }
    }
    rec(&plan, 0, 0, model.constant, l, &mut labels, &mut best, &mut nodes);
    let _ = n;
    Solution {
        energy: model.energy(&best.1),
        labels: best.1,
        optimal: true,
        nodes,
    }
}

/// Single-cell relabeling descent, deterministic in variable order.
fn local_search(model: &EnergyModel, l: usize, mut labels: Vec<usize>) -> (f64, Vec<usize>) {
    let mut cur = model.energy(&labels);
    loop {
        let mut improved = false;
        for v in 0..labels.len() {
            let keep = labels[v];
            let mut best = (cur, keep);
            for lab in 0..l {
                if lab == keep {
                    continue;
                }
                labels[v] = lab;
                let e = model.energy(&labels);
                if e < best.0 - 1e-12 {
                    best = (e, lab);
                }
            }
            labels[v] = best.1;
            if best.1 != keep {
                cur = best.0;
                improved = true;
            }
        }
        if !improved {
            return (cur, labels);
        }
    }
}

struct Node {
    parent: u32,
    label: u16,
    used: u16,
    cost: f64,
}

#[derive(PartialEq)]
struct Open {
    bound: f64,
    depth: usize,
    id: u32,
}

impl Eq for Open {}

impl Ord for Open {
    // Max-heap: smallest bound first, then deepest, then oldest.
    fn cmp(&self, o: &Self) -> Ordering {
        o.bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&o.depth))
            .then(o.id.cmp(&self.id))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

fn branch_and_bound(model: &EnergyModel, l: usize, budget: Duration) -> Solution {
    let start = Instant::now();
    let plan = Plan::new(model);
    let n = plan.order.len();

    let mut inc = local_search(model, l, vec![0; n]);
    let spread: Vec<usize> = (0..n).map(|d| d.min(l - 1)).collect();
    let mut by_var = vec![0; n];
    for (d, &v) in plan.order.iter().enumerate() {
        by_var[v] = spread[d];
    }
    let alt = local_search(model, l, by_var);
    if alt.0 < inc.0 {
        inc = alt;
    }
    let slack = |x: f64| x + 1e-9 * x.abs().max(1.0);

    let mut arena: Vec<Node> = vec![Node {
        parent: u32::MAX,
        label: 0,
        used: 0,
        cost: model.constant,
    }];
    let mut heap = BinaryHeap::new();
    heap.push(Open {
        bound: model.constant + plan.suffix_min[0],
        depth: 0,
        id: 0,
    });
    let mut labels = vec![0usize; n];
    let mut nodes = 0u64;
    let mut optimal = true;

    while let Some(top) = heap.pop() {
        if top.bound > slack(inc.0) {
            break;
        }
        nodes += 1;
        if nodes % 1024 == 0 && start.elapsed() > budget || arena.len() >= NODE_LIMIT {
            optimal = false;
            break;
        }
        let d = top.depth;
        let mut id = top.id;
        for k in (0..d).rev() {
            let node = &arena[id as usize];
            labels[plan.order[k]] = node.label as usize;
            id = node.parent;
        }
        let (used, cost) = {
            let node = &arena[top.id as usize];
            (node.used as usize, node.cost)
        };
        let v = plan.order[d];
        for lab in 0..=used.min(l - 1) {
            labels[v] = lab;
            let c = cost + plan.increment(d, &labels);
            let bound = c + plan.suffix_min[d + 1];
            if bound > slack(inc.0) {
                continue;
            }
            if d + 1 == n {
                if c < inc.0 {
                    inc = (c, labels.clone());
                }
                continue;
            }
            arena.push(Node {
                parent: top.id,
                label: lab as u16,
                used: used.max(lab + 1) as u16,
                cost: c,
            });
            heap.push(Open {
                bound,
                depth: d + 1,
                id: (arena.len() - 1) as u32,
            });
        }
    }

    Solution {
        energy: model.energy(&inc.1),
        labels: inc.1,
        optimal,
        nodes,
    }
}
