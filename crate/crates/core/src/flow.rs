//! Dinic max-flow on small integer-capacity networks.
//!
//! Used to decide windowed doubling: the flow value either certifies a
//! two-to-one bounded matching or, through the residual cut, yields an exact
//! Hall deficiency witness. Edge insertion order is deterministic, so repeated
//! runs produce identical flows and cuts.

use std::collections::VecDeque;

pub struct FlowNetwork {
    to: Vec<u32>,
    cap: Vec<u64>,
    adj: Vec<Vec<u32>>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork {
            to: Vec::new(),
            cap: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    /// Adds a directed edge and its residual twin; returns the edge index.
    pub fn add_edge(&mut self, u: u32, v: u32, cap: u64) -> u32 {
        let id = self.to.len() as u32;
        self.to.push(v);
        self.cap.push(cap);
        self.adj[u as usize].push(id);
        self.to.push(u);
        self.cap.push(0);
        self.adj[v as usize].push(id + 1);
        id
    }

    /// Flow currently routed through edge `id` (forward edges only).
    pub fn flow_on(&self, id: u32) -> u64 {
        self.cap[id as usize ^ 1]
    }

    pub fn max_flow(&mut self, s: u32, t: u32) -> u64 {
        let n = self.adj.len();
        let mut total = 0u64;
        let mut level = vec![u32::MAX; n];
        let mut iter = vec![0usize; n];
        loop {
            level.fill(u32::MAX);
            level[s as usize] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &eid in &self.adj[u as usize] {
                    let v = self.to[eid as usize];
                    if self.cap[eid as usize] > 0 && level[v as usize] == u32::MAX {
                        level[v as usize] = level[u as usize] + 1;
                        queue.push_back(v);
                    }
                }
            }
            if level[t as usize] == u32::MAX {
                return total;
            }
            iter.fill(0);
            loop {
                let pushed = self.dfs(s, t, u64::MAX, &level, &mut iter);
                if pushed == 0 {
                    break;
                }
                total += pushed;
            }
        }
    }

    fn dfs(&mut self, u: u32, t: u32, limit: u64, level: &[u32], iter: &mut [usize]) -> u64 {
        if u == t {
            return limit;
        }
        while iter[u as usize] < self.adj[u as usize].len() {
            let eid = self.adj[u as usize][iter[u as usize]];
            let v = self.to[eid as usize];
            if self.cap[eid as usize] > 0 && level[v as usize] == level[u as usize] + 1 {
                let pushed = self.dfs(v, t, limit.min(self.cap[eid as usize]), level, iter);
                if pushed > 0 {
                    self.cap[eid as usize] -= pushed;
                    self.cap[eid as usize ^ 1] += pushed;
                    return pushed;
                }
            }
            iter[u as usize] += 1;
        }
        0
    }

    /// Nodes reachable from `s` in the residual graph; call after `max_flow`.
    pub fn residual_reachable(&self, s: u32) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[s as usize] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &eid in &self.adj[u as usize] {
                let v = self.to[eid as usize];
                if self.cap[eid as usize] > 0 && !seen[v as usize] {
                    seen[v as usize] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }
}
