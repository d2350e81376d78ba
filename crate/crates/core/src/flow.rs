//! Integer min-cost flow by successive shortest paths with node potentials.
//!
//! Costs must be nonnegative, so the zero potential is valid at the start and
//! Dijkstra runs on reduced costs throughout. Arc insertion order fixes every
//! tie, which makes the returned arc flows deterministic.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FlowError {
    #[error("arc {arc} references node {node}, but the network has {node_count} nodes")]
    DanglingNode { arc: usize, node: usize, node_count: usize },
    #[error("arc {arc} is a self-loop")]
    SelfLoop { arc: usize },
    #[error("arc {arc} has negative capacity {capacity}")]
    NegativeCapacity { arc: usize, capacity: i64 },
    #[error("arc {arc} has negative cost {cost}")]
    NegativeCost { arc: usize, cost: i64 },
    #[error("source or sink out of range")]
    Terminal,
    #[error("required flow {required} exceeds the maximum flow {achieved}")]
    Infeasible { required: i64, achieved: i64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlowArc {
    pub from: usize,
    pub to: usize,
    pub capacity: i64,
    pub cost: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowNetwork {
    pub node_count: usize,
    pub arcs: Vec<FlowArc>,
    pub source: usize,
    pub sink: usize,
}

impl FlowNetwork {
    pub fn new(node_count: usize, source: usize, sink: usize) -> Self {
        Self { node_count, arcs: Vec::new(), source, sink }
    }

    /// Appends an arc and returns its index.
    pub fn add_arc(&mut self, from: usize, to: usize, capacity: i64, cost: i64) -> usize {
        self.arcs.push(FlowArc { from, to, capacity, cost });
        self.arcs.len() - 1
    }

    pub fn validate(&self) -> Result<(), FlowError> {
        if self.source >= self.node_count || self.sink >= self.node_count || self.source == self.sink {
            return Err(FlowError::Terminal);
        }
        for (arc, a) in self.arcs.iter().enumerate() {
            for node in [a.from, a.to] {
                if node >= self.node_count {
                    return Err(FlowError::DanglingNode { arc, node, node_count: self.node_count });
                }
            }
            if a.from == a.to {
                return Err(FlowError::SelfLoop { arc });
            }
            if a.capacity < 0 {
                return Err(FlowError::NegativeCapacity { arc, capacity: a.capacity });
            }
            if a.cost < 0 {
                return Err(FlowError::NegativeCost { arc, cost: a.cost });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowResult {
    pub flow_value: i64,
    pub total_cost: i64,
    pub arc_flows: Vec<i64>,
}

const INF: i64 = i64::MAX / 4;

struct Residual {
    head: Vec<usize>,
    cap: Vec<i64>,
    cost: Vec<i64>,
    adj: Vec<Vec<usize>>,
}

impl Residual {
    // residual edge 2k is arc k, 2k+1 its reverse
    fn build(net: &FlowNetwork) -> Self {
        let m = net.arcs.len();
        let mut r = Residual {
            head: Vec::with_capacity(2 * m),
            cap: Vec::with_capacity(2 * m),
            cost: Vec::with_capacity(2 * m),
            adj: vec![Vec::new(); net.node_count],
        };
        for a in &net.arcs {
            let e = r.head.len();
            r.head.extend([a.to, a.from]);
            r.cap.extend([a.capacity, 0]);
            r.cost.extend([a.cost, -a.cost]);
            r.adj[a.from].push(e);
            r.adj[a.to].push(e + 1);
        }
        r
    }
}

/// Sends exactly `required_flow` units from source to sink at minimum cost.
pub fn min_cost_flow(network: &FlowNetwork, required_flow: i64) -> Result<FlowResult, FlowError> {
    network.validate()?;
    let n = network.node_count;
    let mut res = Residual::build(network);
    let mut potential = vec![0i64; n];
    let mut dist = vec![INF; n];
    let mut parent = vec![usize::MAX; n];
    let mut flow = 0i64;
    let mut cost = 0i64;

    while flow < required_flow {
        dist.fill(INF);
        parent.fill(usize::MAX);
        dist[network.source] = 0;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((0i64, network.source)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &e in &res.adj[u] {
                if res.cap[e] == 0 {
                    continue;
                }
                let v = res.head[e];
                let nd = d + res.cost[e] + potential[u] - potential[v];
                if nd < dist[v] {
                    dist[v] = nd;
                    parent[v] = e;
                    heap.push(Reverse((nd, v)));
                }
            }
        }
        if dist[network.sink] >= INF {
            break;
        }
        for v in 0..n {
            if dist[v] < INF {
                potential[v] += dist[v];
            }
        }
        let mut push = required_flow - flow;
        let mut v = network.sink;
        while v != network.source {
            let e = parent[v];
            push = push.min(res.cap[e]);
            v = res.head[e ^ 1];
        }
        let mut v = network.sink;
        while v != network.source {
            let e = parent[v];
            res.cap[e] -= push;
            res.cap[e ^ 1] += push;
            cost += push * res.cost[e];
            v = res.head[e ^ 1];
        }
        flow += push;
    }

    if flow < required_flow {
        return Err(FlowError::Infeasible { required: required_flow, achieved: flow });
    }
    let arc_flows = (0..network.arcs.len()).map(|k| res.cap[2 * k + 1]).collect();
    Ok(FlowResult { flow_value: flow, total_cost: cost, arc_flows })
}
