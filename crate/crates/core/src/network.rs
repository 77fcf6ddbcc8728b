//! Homophilous preferential-attachment social network.
//!
//! Growth starts from a clique of `m` agents. Every later agent attaches
//! `m` distinct edges; candidate `j` is drawn with weight
//! `degree(j) * (1 + h * B)` when it shares the newcomer's socioeconomic
//! group and `degree(j)` otherwise.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::population::{Agent, SocioEconomicGroup};

/// Sampling attempts per edge before falling back to an exact scan.
const MAX_FAST_DRAWS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    /// Edges attached by each newcomer.
    pub m: usize,
    /// Homophily strength in `[0, 1]`.
    pub homophily: f64,
    /// Same-group bonus factor applied at full homophily.
    pub bonus: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig { m: 2, homophily: 0.8, bonus: 3.0 }
    }
}

impl NetworkConfig {
    pub fn validate(&self, n_agents: usize) -> Result<()> {
        if self.m == 0 {
            return Err(Error::config("network.m", "must be at least 1"));
        }
        if self.m >= n_agents {
            return Err(Error::config(
                "network.m",
                format!("m = {} must be smaller than the number of agents ({n_agents})", self.m),
            ));
        }
        if !(0.0..=1.0).contains(&self.homophily) {
            return Err(Error::config("network.homophily", "must lie in [0, 1]"));
        }
        if !(self.bonus.is_finite() && self.bonus >= 0.0) {
            return Err(Error::config("network.bonus", "must be finite and non-negative"));
        }
        Ok(())
    }
}

/// Undirected simple graph over agent ids `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SocialGraph {
    adjacency: Vec<Vec<usize>>,
    edge_count: usize,
    pub m_per_node: usize,
    pub homophily: f64,
}

impl SocialGraph {
    /// Graph with `n` isolated nodes.
    pub fn empty(n: usize) -> Self {
        SocialGraph { adjacency: vec![Vec::new(); n], edge_count: 0, m_per_node: 0, homophily: 0.0 }
    }

    /// Builds a graph from an explicit edge list. Self-loops and repeated edges are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = SocialGraph::empty(n);
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::UnknownAgent(a.max(b)));
            }
            if a == b {
                return Err(Error::data(format!("self-loop on node {a}")));
            }
            if g.adjacency[a].contains(&b) {
                return Err(Error::data(format!("duplicate edge {a}-{b}")));
            }
            g.add_edge(a, b);
        }
        Ok(g)
    }

    fn add_edge(&mut self, a: usize, b: usize) {
        self.adjacency[a].push(b);
        self.adjacency[b].push(a);
        self.edge_count += 1;
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn degree(&self, id: usize) -> usize {
        self.adjacency[id].len()
    }

    pub fn neighbors(&self, id: usize) -> Result<&[usize]> {
        self.adjacency.get(id).map(Vec::as_slice).ok_or(Error::UnknownAgent(id))
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(a, ns)| ns.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
    }

    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut visited = 1;
        while let Some(v) = stack.pop() {
            for &u in &self.adjacency[v] {
                if !seen[u] {
                    seen[u] = true;
                    visited += 1;
                    stack.push(u);
                }
            }
        }
        visited == n
    }

    /// Writes `src,dst` rows, one per undirected edge with `src < dst`.
    pub fn write_edge_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["src", "dst"]).map_err(|e| Error::Runtime(e.to_string()))?;
        for (a, b) in self.edges() {
            w.write_record([a.to_string(), b.to_string()]).map_err(|e| Error::Runtime(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::Runtime(e.to_string()))
    }
}

/// Grows the network over `agents` (ids must be `0..n` in order).
pub fn build_network<R: Rng + ?Sized>(agents: &[Agent], cfg: &NetworkConfig, rng: &mut R) -> Result<SocialGraph> {
    let n = agents.len();
    cfg.validate(n)?;
    let m = cfg.m;
    let factor = 1.0 + cfg.homophily * cfg.bonus;

    let mut g = SocialGraph::empty(n);
    g.m_per_node = m;
    g.homophily = cfg.homophily;

    // One entry per edge endpoint, split by group: a uniform pick from a
    // group's list is a degree-proportional pick within that group.
    let mut endpoints: [Vec<usize>; 3] = Default::default();
    for a in 0..m {
        for b in (a + 1)..m {
            g.add_edge(a, b);
            endpoints[agents[a].ses.index()].push(a);
            endpoints[agents[b].ses.index()].push(b);
        }
    }

    let mut chosen: Vec<usize> = Vec::with_capacity(m);
    for newcomer in m..n {
        let own = agents[newcomer].ses;
        chosen.clear();
        while chosen.len() < m {
            let pick = draw_fast(&endpoints, own, factor, &chosen, rng)
                .unwrap_or_else(|| draw_exact(&g, agents, newcomer, own, factor, &chosen, rng));
            chosen.push(pick);
        }
        for &target in &chosen {
            g.add_edge(newcomer, target);
            endpoints[agents[target].ses.index()].push(target);
            endpoints[own.index()].push(newcomer);
        }
    }
    Ok(g)
}

/// Group-first sampling from the endpoint lists, rejecting already-chosen targets.
fn draw_fast<R: Rng + ?Sized>(
    endpoints: &[Vec<usize>; 3],
    own: SocioEconomicGroup,
    factor: f64,
    chosen: &[usize],
    rng: &mut R,
) -> Option<usize> {
    let mass: [f64; 3] = std::array::from_fn(|gi| {
        let w = endpoints[gi].len() as f64;
        if gi == own.index() {
            w * factor
        } else {
            w
        }
    });
    let total: f64 = mass.iter().sum();
    if total <= 0.0 {
        return None;
    }
    for _ in 0..MAX_FAST_DRAWS {
        let mut u = rng.random::<f64>() * total;
        let mut group = 2;
        for (gi, &w) in mass.iter().enumerate() {
            if u < w {
                group = gi;
                break;
            }
            u -= w;
        }
        let list = &endpoints[group];
        if list.is_empty() {
            continue;
        }
        let candidate = list[rng.random_range(0..list.len())];
        if !chosen.contains(&candidate) {
            return Some(candidate);
        }
    }
    None
}

/// Exact weighted draw over all remaining candidates; uniform when every weight is zero.
fn draw_exact<R: Rng + ?Sized>(
    g: &SocialGraph,
    agents: &[Agent],
    newcomer: usize,
    own: SocioEconomicGroup,
    factor: f64,
    chosen: &[usize],
    rng: &mut R,
) -> usize {
    let candidates: Vec<usize> = (0..newcomer).filter(|c| !chosen.contains(c)).collect();
    let weights: Vec<f64> = candidates
        .iter()
        .map(|&c| {
            let d = g.degree(c) as f64;
            if agents[c].ses == own {
                d * factor
            } else {
                d
            }
        })
        .collect();
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return candidates[rng.random_range(0..candidates.len())];
    }
    let mut u = rng.random::<f64>() * total;
    for (&c, &w) in candidates.iter().zip(&weights) {
        if u < w {
            return c;
        }
        u -= w;
    }
    *candidates.last().expect("newcomer always has at least m earlier candidates")
}

/// Fraction of edges joining two agents of the same socioeconomic group.
pub fn assortativity_by_ses(g: &SocialGraph, agents: &[Agent]) -> Result<f64> {
    let ses: Vec<SocioEconomicGroup> = agents.iter().map(|a| a.ses).collect();
    assortativity_by_labels(g, &ses)
}

/// Same as [`assortativity_by_ses`] for an explicit label vector.
pub fn assortativity_by_labels(g: &SocialGraph, labels: &[SocioEconomicGroup]) -> Result<f64> {
    if g.edge_count() == 0 {
        return Err(Error::data("assortativity of a graph without edges is undefined"));
    }
    if labels.len() != g.node_count() {
        return Err(Error::data("label vector does not match graph size"));
    }
    let same = g.edges().filter(|&(a, b)| labels[a] == labels[b]).count();
    Ok(same as f64 / g.edge_count() as f64)
}
