//! Dinic maximum flow with floating-point capacities.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

const EPS: f64 = 1e-15;

struct Edge {
    to: usize,
    cap: f64,
}

pub(crate) struct FlowNetwork {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
    level: Vec<i32>,
    cursor: Vec<usize>,
}

impl FlowNetwork {
    pub(crate) fn new(nodes: usize) -> Self {
        FlowNetwork {
            edges: Vec::new(),
            adj: alloc::vec![Vec::new(); nodes],
            level: alloc::vec![0; nodes],
            cursor: alloc::vec![0; nodes],
        }
    }

    pub(crate) fn add_edge(&mut self, from: usize, to: usize, cap: f64) {
        self.adj[from].push(self.edges.len());
        self.edges.push(Edge { to, cap });
        self.adj[to].push(self.edges.len());
        self.edges.push(Edge { to: from, cap: 0.0 });
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let edge = &self.edges[e];
                if edge.cap > EPS && self.level[edge.to] < 0 {
                    self.level[edge.to] = self.level[u] + 1;
                    queue.push_back(edge.to);
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
            let e = self.adj[u][self.cursor[u]];
            let (to, cap) = (self.edges[e].to, self.edges[e].cap);
            if cap > EPS && self.level[to] == self.level[u] + 1 {
                let got = self.dfs(to, t, pushed.min(cap));
                if got > 0.0 {
                    self.edges[e].cap -= got;
                    self.edges[e ^ 1].cap += got;
                    return got;
                }
            }
            self.cursor[u] += 1;
        }
        0.0
    }

    pub(crate) fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut total = 0.0;
        while self.bfs(s, t) {
            self.cursor.iter_mut().for_each(|c| *c = 0);
            loop {
                let f = self.dfs(s, t, f64::INFINITY);
                if f <= 0.0 {
                    break;
                }
                total += f;
            }
        }
        total
    }
}
