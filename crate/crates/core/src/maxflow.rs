//! Max-flow / min-cut on dense symmetric capacity matrices (Dinic).
//!
//! Used as the separation subroutine for the LP relaxation: the max-flow
//! value equals the min-cut capacity, and both sides of the minimum cut are
//! reported so callers can pick the smaller certifying subset.

const CAP_EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct MaxFlowResult {
    pub value: f64,
    /// Vertices reachable from the source in the residual graph.
    pub source_side: Vec<bool>,
    /// Vertices that can still reach the sink in the residual graph.
    pub sink_side: Vec<bool>,
}

struct Arc {
    to: usize,
    cap: f64,
}

struct Dinic {
    arcs: Vec<Arc>,
    adj: Vec<Vec<usize>>,
    level: Vec<i32>,
    cursor: Vec<usize>,
}

impl Dinic {
    fn new(n: usize) -> Self {
        Dinic {
            arcs: Vec::new(),
            adj: vec![Vec::new(); n],
            level: vec![-1; n],
            cursor: vec![0; n],
        }
    }

    /// Undirected edge: two arcs, each the other's reverse.
    fn add_undirected(&mut self, u: usize, v: usize, cap: f64) {
        let id = self.arcs.len();
        self.arcs.push(Arc { to: v, cap });
        self.arcs.push(Arc { to: u, cap });
        self.adj[u].push(id);
        self.adj[v].push(id + 1);
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &id in &self.adj[u] {
                let arc = &self.arcs[id];
                if arc.cap > CAP_EPS && self.level[arc.to] < 0 {
                    self.level[arc.to] = self.level[u] + 1;
                    queue.push_back(arc.to);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, u: usize, t: usize, pushed: f64) -> f64 {
        if u == t {
            return pushed;
        }
        while self.cursor[u] < self.adj[u].len() {
            let id = self.adj[u][self.cursor[u]];
            let (to, cap) = (self.arcs[id].to, self.arcs[id].cap);
            if cap > CAP_EPS && self.level[to] == self.level[u] + 1 {
                let got = self.dfs(to, t, pushed.min(cap));
                if got > CAP_EPS {
                    self.arcs[id].cap -= got;
                    self.arcs[id ^ 1].cap += got;
                    return got;
                }
            }
            self.cursor[u] += 1;
        }
        0.0
    }
}

/// Maximum s-t flow under symmetric nonnegative capacities.
pub fn max_flow(capacities: &[Vec<f64>], s: usize, t: usize) -> MaxFlowResult {
    let n = capacities.len();
    assert!(s < n && t < n && s != t, "bad terminals");
    let mut net = Dinic::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let cap = capacities[i][j];
            if cap > CAP_EPS {
                net.add_undirected(i, j, cap);
            }
        }
    }
    let mut value = 0.0;
    while net.bfs(s, t) {
        net.cursor.iter_mut().for_each(|c| *c = 0);
        loop {
            let pushed = net.dfs(s, t, f64::INFINITY);
            if pushed <= CAP_EPS {
                break;
            }
            value += pushed;
        }
    }

    // Source side: residual reachability from s. Sink side: vertices with a
    // residual path into t, found by walking arcs backwards.
    let mut source_side = vec![false; n];
    source_side[s] = true;
    let mut queue = std::collections::VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        for &id in &net.adj[u] {
            let arc = &net.arcs[id];
            if arc.cap > CAP_EPS && !source_side[arc.to] {
                source_side[arc.to] = true;
                queue.push_back(arc.to);
            }
        }
    }
    let mut sink_side = vec![false; n];
    sink_side[t] = true;
    queue.push_back(t);
    while let Some(u) = queue.pop_front() {
        for &id in &net.adj[u] {
            // The paired arc runs arc.to -> u; positive residual there means
            // arc.to can reach u, and u reaches t.
            let rev = &net.arcs[id ^ 1];
            let from = net.arcs[id].to;
            if rev.cap > CAP_EPS && !sink_side[from] {
                sink_side[from] = true;
                queue.push_back(from);
            }
        }
    }

    MaxFlowResult {
        value,
        source_side,
        sink_side,
    }
}
