//! Maximum mean cycle values for deterministic problems.
//!
//! On a finite deterministic problem the long-run average of an optimal play
//! is the largest mean payoff over cycles reachable from the start. Each
//! strongly connected component is solved with Karp's recurrence over
//! maximum-weight walks of exact length; the component values are then
//! propagated backwards through the condensation.

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::model::DpModel;

/// Maximum mean payoff over cycles reachable from every state.
pub fn max_mean_cycle_values(model: &DpModel) -> Vec<f64> {
    let n = model.len();
    let mut graph = DiGraph::<(), ()>::with_capacity(n, n);
    let nodes: Vec<NodeIndex> = (0..n).map(|_| graph.add_node(())).collect();
    for s in 0..n {
        for &t in model.successors(s) {
            graph.add_edge(nodes[s], nodes[t], ());
        }
    }

    // tarjan_scc yields components in reverse topological order, so every
    // component reachable from the current one has already been resolved.
    let components = tarjan_scc(&graph);
    let mut component_of = vec![usize::MAX; n];
    for (c, members) in components.iter().enumerate() {
        for node in members {
            component_of[node.index()] = c;
        }
    }

    let mut best = vec![f64::NEG_INFINITY; components.len()];
    for (c, members) in components.iter().enumerate() {
        let members: Vec<usize> = members.iter().map(|v| v.index()).collect();
        let mut value = component_cycle_mean(model, &members, &component_of, c);
        for &s in &members {
            for &t in model.successors(s) {
                let d = component_of[t];
                if d != c {
                    value = value.max(best[d]);
                }
            }
        }
        best[c] = value;
    }
    (0..n).map(|s| best[component_of[s]]).collect()
}

/// Karp's maximum cycle mean restricted to one component, or `-inf` when
/// the component carries no cycle (a single state without a self-loop).
fn component_cycle_mean(
    model: &DpModel,
    members: &[usize],
    component_of: &[usize],
    c: usize,
) -> f64 {
    let k = members.len();
    if k == 1 && !model.is_successor(members[0], members[0]) {
        return f64::NEG_INFINITY;
    }
    let mut local = vec![usize::MAX; model.len()];
    for (i, &s) in members.iter().enumerate() {
        local[s] = i;
    }
    // walk[j][v]: heaviest walk with exactly j edges from members[0] to v,
    // where an edge leaving s weighs f(s).
    let mut walk = vec![vec![f64::NEG_INFINITY; k]; k + 1];
    walk[0][0] = 0.0;
    for j in 1..=k {
        for (i, &s) in members.iter().enumerate() {
            let from = walk[j - 1][i];
            if from == f64::NEG_INFINITY {
                continue;
            }
            for &t in model.successors(s) {
                if component_of[t] != c {
                    continue;
                }
                let cand = from + model.payoff(s);
                let slot = &mut walk[j][local[t]];
                if cand > *slot {
                    *slot = cand;
                }
            }
        }
    }
    let mut best = f64::NEG_INFINITY;
    for v in 0..k {
        if walk[k][v] == f64::NEG_INFINITY {
            continue;
        }
        let mut worst = f64::INFINITY;
        for j in 0..k {
            if walk[j][v] == f64::NEG_INFINITY {
                continue;
            }
            worst = worst.min((walk[k][v] - walk[j][v]) / (k - j) as f64);
        }
        best = best.max(worst);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Mean of every simple cycle through brute-force DFS.
    fn brute_force(model: &DpModel) -> Vec<f64> {
        let n = model.len();
        let mut cycle_best = vec![f64::NEG_INFINITY; n];
        fn dfs(
            model: &DpModel,
            root: usize,
            path: &mut Vec<usize>,
            best: &mut f64,
        ) {
            let last = *path.last().unwrap();
            for &t in model.successors(last) {
                if t == root {
                    let mean = path.iter().map(|&s| model.payoff(s)).sum::<f64>()
                        / path.len() as f64;
                    *best = best.max(mean);
                } else if t > root && !path.contains(&t) {
                    path.push(t);
                    dfs(model, root, path, best);
                    path.pop();
                }
            }
        }
        let mut cycle_means = vec![];
        for root in 0..n {
            let mut best = f64::NEG_INFINITY;
            dfs(model, root, &mut vec![root], &mut best);
            cycle_means.push(best);
        }
        // cycles found from their smallest member; spread to every member
        // by recomputing through reachability below.
        let mut reach = vec![vec![false; n]; n];
        for s in 0..n {
            let mut stack = vec![s];
            reach[s][s] = true;
            while let Some(u) = stack.pop() {
                for &t in model.successors(u) {
                    if !reach[s][t] {
                        reach[s][t] = true;
                        stack.push(t);
                    }
                }
            }
        }
        for s in 0..n {
            for root in 0..n {
                if reach[s][root] {
                    cycle_best[s] = cycle_best[s].max(cycle_means[root]);
                }
            }
        }
        cycle_best
    }

    #[test]
    fn two_state_chain() {
        let m = DpModel::from_labels(&[("s0", 0.0, vec!["s0", "s1"]), ("s1", 1.0, vec!["s1"])])
            .unwrap();
        assert_eq!(max_mean_cycle_values(&m), vec![1.0, 1.0]);
    }

    #[test]
    fn three_cycle_mean() {
        let m = DpModel::from_labels(&[
            ("c0", 0.0, vec!["c1"]),
            ("c1", 1.0, vec!["c2"]),
            ("c2", 1.0, vec!["c0"]),
        ])
        .unwrap();
        for v in max_mean_cycle_values(&m) {
            assert!((v - 2.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn agrees_with_simple_cycle_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let n = rng.gen_range(1..=6);
            let states: Vec<(String, f64, Vec<String>)> = (0..n)
                .map(|i| {
                    let b = rng.gen_range(1..=3);
                    let succ = (0..b).map(|_| format!("q{}", rng.gen_range(0..n))).collect();
                    (format!("q{i}"), rng.gen_range(0..=8) as f64 / 8.0, succ)
                })
                .collect();
            let m = DpModel::from_labels(&states).unwrap();
            let fast = max_mean_cycle_values(&m);
            let slow = brute_force(&m);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}\n{m}");
            }
        }
    }
}
