//! Network simplex for uncapacitated minimum-cost flow.
//!
//! One solver serves three formulations: the dense bipartite
//! transportation problem, the admissibility-masked secondary problem
//! (sparse arc set), and the three-layer quantized objective
//! (sources -> net points -> targets, with free middle marginals).
//!
//! Determinism and degeneracy: distance costs make transportation LPs
//! massively degenerate, so pivoting follows Bland's rule throughout —
//! the entering arc is the lowest-index arc with reduced cost below
//! `-tol`, and the leaving arc is the lowest-index arc among the
//! minimum-ratio candidates. That makes termination guaranteed and every
//! solve reproducible. Node potentials are recomputed from the spanning
//! tree after every pivot, so complementary slackness holds on basic arcs
//! by construction rather than by incremental update.
//!
//! Feasibility uses the classic two-phase scheme with an artificial root
//! node: phase one prices artificial arcs at 1 and everything else at 0;
//! phase two prices real arcs and treats any artificial arc still in the
//! basis as having capacity zero, so no feasible flow can sneak back
//! through the root.

use crate::error::{MongeError, Result};

/// Relative tolerance for "reduced cost is negative" tests.
const ENTERING_REL_TOL: f64 = 1e-11;
/// Relative tolerance for declaring phase-one residual mass infeasible.
const FEASIBILITY_REL_TOL: f64 = 1e-9;

/// A minimum-cost flow instance: `balances[v]` is the supply (positive)
/// or demand (negative) at node `v`, and arcs are directed with
/// unbounded capacity. Balances must sum to zero.
///
/// Arc order is part of the contract: it is the Bland pivot order, so
/// callers fix it once (row-major for matrices) and get reproducible
/// vertex solutions.
pub(crate) struct NetworkProblem {
    pub node_count: usize,
    pub balances: Vec<f64>,
    pub arcs: Vec<(usize, usize)>,
    pub costs: Vec<f64>,
}

/// Optimal flow with the node potentials that certify it.
///
/// Potentials satisfy `cost[a] - pot[from] + pot[to] >= -tol` for every
/// arc, with equality (up to tree-path rounding) on arcs carrying flow.
pub(crate) struct FlowSolution {
    pub flows: Vec<f64>,
    pub potentials: Vec<f64>,
    /// Pivot count; deterministic for a fixed problem, asserted in tests.
    #[cfg_attr(not(test), allow(dead_code))]
    pub pivots: usize,
}

pub(crate) fn solve_min_cost_flow(problem: &NetworkProblem) -> Result<FlowSolution> {
    let n = problem.node_count;
    if problem.balances.len() != n {
        return Err(MongeError::InvalidCost(format!(
            "{} balances for {} nodes",
            problem.balances.len(),
            n
        )));
    }
    if problem.arcs.len() != problem.costs.len() {
        return Err(MongeError::InvalidCost(format!(
            "{} arcs but {} costs",
            problem.arcs.len(),
            problem.costs.len()
        )));
    }
    for &(u, v) in &problem.arcs {
        if u >= n || v >= n || u == v {
            return Err(MongeError::InvalidCost(format!("bad arc ({u}, {v})")));
        }
    }
    for &c in &problem.costs {
        if !c.is_finite() {
            return Err(MongeError::InvalidCost(format!("non-finite arc cost {c}")));
        }
    }
    let scale = problem
        .balances
        .iter()
        .fold(0.0f64, |a, &b| a.max(b.abs()));
    let imbalance: f64 = problem.balances.iter().sum();
    if imbalance.abs() > FEASIBILITY_REL_TOL * (1.0 + scale) {
        return Err(MongeError::Infeasible(format!(
            "balances sum to {imbalance:.3e}, not zero"
        )));
    }

    let real = problem.arcs.len();
    let root = n;
    let mut arcs = problem.arcs.clone();
    for (v, &b) in problem.balances.iter().enumerate() {
        if b >= 0.0 {
            arcs.push((v, root));
        } else {
            arcs.push((root, v));
        }
    }
    let total = arcs.len();

    let mut state = Simplex {
        node_count: n + 1,
        real,
        arcs,
        flows: vec![0.0; total],
        in_tree: vec![false; total],
        adjacency: vec![Vec::new(); n + 1],
        potentials: vec![0.0; n + 1],
        pivots: 0,
        max_pivots: 20_000 + 20 * (n + total),
    };
    for (v, &b) in problem.balances.iter().enumerate() {
        state.flows[real + v] = b.abs();
        state.in_tree[real + v] = true;
    }
    state.rebuild_adjacency();

    // Phase one: minimize total artificial flow.
    let mut phase1 = vec![0.0; total];
    for c in phase1.iter_mut().skip(real) {
        *c = 1.0;
    }
    state.optimize(&phase1, total, false)?;
    let residual: f64 = state.flows[real..].iter().sum();
    if residual > FEASIBILITY_REL_TOL * (1.0 + scale) {
        return Err(MongeError::Infeasible(format!(
            "residual unmatched mass {residual:.3e} after phase one"
        )));
    }

    // Phase two: real costs; leftover artificial arcs are capacity zero.
    let mut phase2 = vec![0.0; total];
    phase2[..real].copy_from_slice(&problem.costs);
    state.optimize(&phase2, real, true)?;

    Ok(FlowSolution {
        flows: state.flows[..real].to_vec(),
        potentials: state.potentials[..n].to_vec(),
        pivots: state.pivots,
    })
}

struct Simplex {
    /// Includes the artificial root (index `node_count - 1`).
    node_count: usize,
    /// Arcs below this index are real; the rest are artificial.
    real: usize,
    arcs: Vec<(usize, usize)>,
    flows: Vec<f64>,
    in_tree: Vec<bool>,
    /// Tree arcs incident to each node, ascending by arc index.
    adjacency: Vec<Vec<u32>>,
    potentials: Vec<f64>,
    pivots: usize,
    max_pivots: usize,
}

impl Simplex {
    fn rebuild_adjacency(&mut self) {
        for list in &mut self.adjacency {
            list.clear();
        }
        for (a, &(u, v)) in self.arcs.iter().enumerate() {
            if self.in_tree[a] {
                self.adjacency[u].push(a as u32);
                self.adjacency[v].push(a as u32);
            }
        }
    }

    /// Set potentials so every tree arc has zero reduced cost:
    /// for arc (u, v), `pot[u] - pot[v] = cost`.
    fn recompute_potentials(&mut self, costs: &[f64]) {
        let root = self.node_count - 1;
        let mut visited = vec![false; self.node_count];
        self.potentials[root] = 0.0;
        visited[root] = true;
        let mut stack = vec![root];
        while let Some(node) = stack.pop() {
            for &a in &self.adjacency[node] {
                let (u, v) = self.arcs[a as usize];
                let other = if u == node { v } else { u };
                if visited[other] {
                    continue;
                }
                self.potentials[other] = if u == node {
                    // node -> other: pot[other] = pot[node] - cost.
                    self.potentials[node] - costs[a as usize]
                } else {
                    // other -> node: pot[other] = pot[node] + cost.
                    self.potentials[node] + costs[a as usize]
                };
                visited[other] = true;
                stack.push(other);
            }
        }
    }

    /// Unique tree path from `start` to `goal`, as (arc, forward) pairs
    /// where `forward` means the cycle direction matches the arc's own
    /// orientation.
    fn tree_path(&self, start: usize, goal: usize) -> Vec<(usize, bool)> {
        let mut parent: Vec<Option<(u32, u32)>> = vec![None; self.node_count];
        let mut visited = vec![false; self.node_count];
        visited[start] = true;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(node) = queue.pop_front() {
            if node == goal {
                break;
            }
            for &a in &self.adjacency[node] {
                let (u, v) = self.arcs[a as usize];
                let other = if u == node { v } else { u };
                if !visited[other] {
                    visited[other] = true;
                    parent[other] = Some((node as u32, a));
                    queue.push_back(other);
                }
            }
        }
        let mut path_rev = Vec::new();
        let mut node = goal;
        while node != start {
            let (prev, a) = parent[node].expect("tree is spanning");
            let (u, _) = self.arcs[a as usize];
            // Step was prev -> node; forward iff the arc is stored that way.
            path_rev.push((a as usize, u == prev as usize));
            node = prev as usize;
        }
        path_rev.reverse();
        path_rev
    }

    fn find_entering(&self, costs: &[f64], limit: usize, tol: f64) -> Option<usize> {
        (0..limit).find(|&a| {
            if self.in_tree[a] {
                return false;
            }
            let (u, v) = self.arcs[a];
            costs[a] - self.potentials[u] + self.potentials[v] < -tol
        })
    }

    fn optimize(
        &mut self,
        costs: &[f64],
        entering_limit: usize,
        cap_artificials: bool,
    ) -> Result<()> {
        let tol =
            ENTERING_REL_TOL * (1.0 + costs.iter().fold(0.0f64, |a, &c| a.max(c.abs())));
        self.recompute_potentials(costs);
        while let Some(entering) = self.find_entering(costs, entering_limit, tol) {
            self.pivots += 1;
            if self.pivots > self.max_pivots {
                return Err(MongeError::NumericalFailure(format!(
                    "pivot limit {} exceeded",
                    self.max_pivots
                )));
            }
            self.pivot(entering, costs, cap_artificials)?;
        }
        Ok(())
    }

    /// Push flow around the unique cycle the entering arc closes, remove
    /// the first blocking arc, and refresh potentials.
    fn pivot(&mut self, entering: usize, costs: &[f64], cap_artificials: bool) -> Result<()> {
        let (eu, ev) = self.arcs[entering];
        // The cycle sends flow eu -> ev across the entering arc, then back
        // along the tree path ev -> eu.
        let path = self.tree_path(ev, eu);

        let mut theta = f64::INFINITY;
        for &(a, forward) in &path {
            let bound = if cap_artificials && a >= self.real {
                0.0
            } else if forward {
                f64::INFINITY
            } else {
                self.flows[a]
            };
            theta = theta.min(bound);
        }
        if !theta.is_finite() {
            return Err(MongeError::NumericalFailure(
                "unbounded improving cycle".into(),
            ));
        }
        let leaving = path
            .iter()
            .filter(|&&(a, forward)| {
                let bound = if cap_artificials && a >= self.real {
                    0.0
                } else if forward {
                    f64::INFINITY
                } else {
                    self.flows[a]
                };
                bound <= theta
            })
            .map(|&(a, _)| a)
            .min()
            .expect("a blocking arc exists when theta is finite");

        self.flows[entering] += theta;
        for &(a, forward) in &path {
            if forward {
                self.flows[a] += theta;
            } else {
                self.flows[a] -= theta;
            }
        }
        self.flows[leaving] = 0.0;
        self.in_tree[entering] = true;
        self.in_tree[leaving] = false;
        self.rebuild_adjacency();
        self.recompute_potentials(costs);
        Ok(())
    }
}
