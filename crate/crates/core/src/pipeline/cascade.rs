//! Chains of confirmed leader-to-follower edges.

use std::collections::BTreeMap;
use std::io::Write;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::{Deserialize, Serialize};

use super::stage2::PairReportRow;
use super::PipelineError;
use crate::series::Granularity;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CascadeEdge {
    pub leader: String,
    pub follower: String,
    pub lag: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chain {
    pub symbols: Vec<String>,
    pub lags: Vec<usize>,
    pub cumulative_lag: usize,
    /// Some member also sits on a cycle of confirmed edges.
    pub touches_cycle: bool,
}

impl Chain {
    pub fn edges(&self) -> usize {
        self.lags.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cycle {
    /// Sorted member symbols of one strongly connected component.
    pub members: Vec<String>,
    /// Every confirmed edge inside the component.
    pub edges: Vec<CascadeEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CascadeReport {
    pub chains: Vec<Chain>,
    pub cycles: Vec<Cycle>,
}

/// Confirmed edges of `rows`, sorted by (leader, follower).
pub fn confirmed_edges(rows: &[PairReportRow]) -> Vec<CascadeEdge> {
    let mut edges: Vec<CascadeEdge> = rows
        .iter()
        .filter(|r| r.is_confirmed())
        .map(|r| CascadeEdge {
            leader: r.leader.clone(),
            follower: r.follower.clone(),
            lag: r.optimal_lag,
        })
        .collect();
    edges.sort_by(|x, y| (&x.leader, &x.follower).cmp(&(&y.leader, &y.follower)));
    edges.dedup_by(|x, y| x.leader == y.leader && x.follower == y.follower);
    edges
}

/// Every maximal simple path with at least two edges (no edge can be added
/// at either end without revisiting a node), plus cycles found as strongly
/// connected components. Rows must come from one granularity.
pub fn detect_cascades(rows: &[PairReportRow]) -> CascadeReport {
    let edges = confirmed_edges(rows);
    let mut graph: DiGraph<String, usize> = DiGraph::new();
    let mut index: BTreeMap<String, NodeIndex> = BTreeMap::new();
    for e in &edges {
        for s in [&e.leader, &e.follower] {
            if !index.contains_key(s) {
                index.insert(s.clone(), graph.add_node(s.clone()));
            }
        }
        graph.add_edge(index[&e.leader], index[&e.follower], e.lag);
    }

    let mut on_cycle = vec![false; graph.node_count()];
    let mut cycles = Vec::new();
    for scc in tarjan_scc(&graph) {
        if scc.len() < 2 {
            continue;
        }
        for &v in &scc {
            on_cycle[v.index()] = true;
        }
        let mut members: Vec<String> = scc.iter().map(|&v| graph[v].clone()).collect();
        members.sort();
        let edges = edges
            .iter()
            .filter(|e| members.contains(&e.leader) && members.contains(&e.follower))
            .cloned()
            .collect();
        cycles.push(Cycle { members, edges });
    }
    cycles.sort_by(|x, y| x.members.cmp(&y.members));

    let neighbors = |v: NodeIndex, dir| {
        let mut out: Vec<(NodeIndex, usize)> = graph
            .edges_directed(v, dir)
            .map(|e| {
                use petgraph::visit::EdgeRef;
                let other = if dir == petgraph::Direction::Outgoing { e.target() } else { e.source() };
                (other, *e.weight())
            })
            .collect();
        out.sort_by(|x, y| graph[x.0].cmp(&graph[y.0]));
        out
    };

    let mut chains = Vec::new();
    let mut path = Vec::new();
    let mut lags = Vec::new();
    for &start in index.values() {
        path.clear();
        lags.clear();
        path.push(start);
        extend(&neighbors, &mut path, &mut lags, &mut |path, lags| {
            if lags.len() < 2 {
                return;
            }
            let head = path[0];
            let extendable_back = neighbors(head, petgraph::Direction::Incoming)
                .iter()
                .any(|(u, _)| !path.contains(u));
            if extendable_back {
                return;
            }
            chains.push(Chain {
                symbols: path.iter().map(|&v| graph[v].clone()).collect(),
                lags: lags.to_vec(),
                cumulative_lag: lags.iter().sum(),
                touches_cycle: path.iter().any(|v| on_cycle[v.index()]),
            });
        });
    }
    chains.sort_by(|x, y| {
        y.edges()
            .cmp(&x.edges())
            .then_with(|| x.cumulative_lag.cmp(&y.cumulative_lag))
            .then_with(|| x.symbols.cmp(&y.symbols))
    });
    CascadeReport { chains, cycles }
}

fn extend<F>(
    neighbors: &F,
    path: &mut Vec<NodeIndex>,
    lags: &mut Vec<usize>,
    emit: &mut dyn FnMut(&[NodeIndex], &[usize]),
) where
    F: Fn(NodeIndex, petgraph::Direction) -> Vec<(NodeIndex, usize)>,
{
    let last = *path.last().expect("non-empty path");
    let next: Vec<(NodeIndex, usize)> = neighbors(last, petgraph::Direction::Outgoing)
        .into_iter()
        .filter(|(v, _)| !path.contains(v))
        .collect();
    if next.is_empty() {
        emit(path, lags);
        return;
    }
    for (v, lag) in next {
        path.push(v);
        lags.push(lag);
        extend(neighbors, path, lags, emit);
        path.pop();
        lags.pop();
    }
}

pub const CASCADE_HEADER: [&str; 7] = [
    "granularity",
    "kind",
    "path",
    "edges",
    "lags",
    "cumulative_lag",
    "note",
];

pub fn write_cascades<W: Write>(g: Granularity, report: &CascadeReport, out: W) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CASCADE_HEADER).map_err(PipelineError::csv)?;
    let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(";");
    for c in &report.chains {
        w.write_record([
            g.label().to_string(),
            "chain".into(),
            c.symbols.join(" -> "),
            c.edges().to_string(),
            join(&c.lags),
            c.cumulative_lag.to_string(),
            g.wallclock(c.cumulative_lag as i64) + if c.touches_cycle { "; touches cycle" } else { "" },
        ])
        .map_err(PipelineError::csv)?;
    }
    for cy in &report.cycles {
        let edges: Vec<String> = cy.edges.iter().map(|e| format!("{} -> {}", e.leader, e.follower)).collect();
        let lags: Vec<usize> = cy.edges.iter().map(|e| e.lag).collect();
        w.write_record([
            g.label().to_string(),
            "cycle".into(),
            edges.join(", "),
            cy.edges.len().to_string(),
            join(&lags),
            String::new(),
            format!("cycle among {}", cy.members.join(", ")),
        ])
        .map_err(PipelineError::csv)?;
    }
    w.flush().map_err(|e| PipelineError::Csv(e.to_string()))
}
