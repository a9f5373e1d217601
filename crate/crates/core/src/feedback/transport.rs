//! Exact balanced transportation via successive shortest paths.
//!
//! Masses are integers so every augmentation moves at least one unit and the
//! search terminates; costs are arbitrary non-negative reals.

const EPS: f64 = 1e-12;

struct Edge {
    to: usize,
    rev: usize,
    cap: u64,
    cost: f64,
}

struct Graph {
    adj: Vec<Vec<Edge>>,
}

impl Graph {
    fn new(nodes: usize) -> Self {
        Graph {
            adj: (0..nodes).map(|_| Vec::new()).collect(),
        }
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: u64, cost: f64) -> (usize, usize) {
        let fwd = self.adj[from].len();
        let back = self.adj[to].len();
        self.adj[from].push(Edge {
            to,
            rev: back,
            cap,
            cost,
        });
        self.adj[to].push(Edge {
            to: from,
            rev: fwd,
            cap: 0,
            cost: -cost,
        });
        (from, fwd)
    }

    /// Bellman-Ford over the residual graph; returns predecessor edges.
    fn shortest_path(&self, source: usize, sink: usize) -> Option<Vec<(usize, usize)>> {
        let n = self.adj.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred: Vec<Option<(usize, usize)>> = vec![None; n];
        dist[source] = 0.0;
        for _ in 0..n {
            let mut changed = false;
            for u in 0..n {
                if dist[u].is_infinite() {
                    continue;
                }
                for (k, e) in self.adj[u].iter().enumerate() {
                    if e.cap > 0 && dist[u] + e.cost < dist[e.to] - EPS {
                        dist[e.to] = dist[u] + e.cost;
                        pred[e.to] = Some((u, k));
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let mut path = Vec::new();
        let mut v = sink;
        while v != source {
            let (u, k) = pred[v]?;
            path.push((u, k));
            v = u;
        }
        path.reverse();
        Some(path)
    }
}

/// An optimal plan: total cost and the flow on every (supply, demand) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub cost: f64,
    pub flows: Vec<Vec<u64>>,
}

/// Minimum-cost transport of integer `supplies` onto `demands`.
///
/// Both sides must carry the same total mass.
pub fn min_cost_transport<F>(supplies: &[u64], demands: &[u64], cost: F) -> TransportPlan
where
    F: Fn(usize, usize) -> f64,
{
    let total: u64 = supplies.iter().sum();
    assert_eq!(total, demands.iter().sum::<u64>(), "unbalanced transport problem");
    let (m, n) = (supplies.len(), demands.len());
    let source = 0;
    let sink = m + n + 1;
    let mut graph = Graph::new(m + n + 2);
    for (i, &s) in supplies.iter().enumerate() {
        graph.add_edge(source, 1 + i, s, 0.0);
    }
    for (j, &d) in demands.iter().enumerate() {
        graph.add_edge(1 + m + j, sink, d, 0.0);
    }
    let arcs: Vec<Vec<(usize, usize)>> = (0..m)
        .map(|i| {
            (0..n)
                .map(|j| graph.add_edge(1 + i, 1 + m + j, total, cost(i, j)))
                .collect()
        })
        .collect();

    let mut moved = 0;
    while moved < total {
        let path = graph
            .shortest_path(source, sink)
            .expect("balanced problem always has an augmenting path");
        let push = path
            .iter()
            .map(|&(u, k)| graph.adj[u][k].cap)
            .min()
            .expect("non-empty path");
        for &(u, k) in &path {
            let (to, rev) = {
                let e = &mut graph.adj[u][k];
                e.cap -= push;
                (e.to, e.rev)
            };
            graph.adj[to][rev].cap += push;
        }
        moved += push;
    }

    let mut plan = TransportPlan {
        cost: 0.0,
        flows: vec![vec![0; n]; m],
    };
    for (row, flows) in arcs.iter().zip(&mut plan.flows) {
        for (&(u, k), flow) in row.iter().zip(flows) {
            let e = &graph.adj[u][k];
            *flow = graph.adj[e.to][e.rev].cap;
            plan.cost += *flow as f64 * e.cost;
        }
    }
    plan
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell() {
        let plan = min_cost_transport(&[3], &[3], |_, _| 2.5);
        assert_eq!(plan.cost, 7.5);
        assert_eq!(plan.flows, vec![vec![3]]);
    }

    #[test]
    fn prefers_cheaper_assignment() {
        // Identity pairing costs 0; the crossed pairing costs 2.
        let c = [[0.0, 1.0], [1.0, 0.0]];
        let plan = min_cost_transport(&[1, 1], &[1, 1], |i, j| c[i][j]);
        assert_eq!(plan.cost, 0.0);
        assert_eq!(plan.flows, vec![vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn needs_rerouting_through_reverse_edges() {
        // Greedy would send supply 0 to demand 0 first; optimum crosses.
        let c = [[1.0, 2.0], [1.0, 100.0]];
        let plan = min_cost_transport(&[1, 1], &[1, 1], |i, j| c[i][j]);
        assert_eq!(plan.cost, 3.0);
    }

    #[test]
    fn split_masses_conserve() {
        let plan = min_cost_transport(&[2, 4], &[3, 1, 2], |i, j| (i + 2 * j) as f64);
        let rows: Vec<u64> = plan.flows.iter().map(|r| r.iter().sum()).collect();
        assert_eq!(rows, vec![2, 4]);
        for j in 0..3 {
            let col: u64 = plan.flows.iter().map(|r| r[j]).sum();
            assert_eq!(col, [3, 1, 2][j]);
        }
    }
}
