//! Agents on a graph, one die side each. An agent sees the counts of every
//! side held by an agent within the visibility radius, and all agents run
//! the same inference on what they see.

use std::collections::VecDeque;

use rayon::prelude::*;
use thiserror::Error;

use crate::engine::{
    me_entropy, posterior_summary, ConstraintSpec, Engine, EngineError, EntropyReport, Inference,
    PriorSpec,
};
use crate::multinomial::{AgentView, CountVector, ModelError};
use crate::{Posterior, Summary};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("network needs at least 2 agents, got {0}")]
    TooSmall(usize),
    #[error("edge ({0}, {1}) is a self-loop")]
    SelfLoop(usize, usize),
    #[error("edge ({a}, {b}) references an agent outside 1..={k}")]
    OutOfRange { a: usize, b: usize, k: usize },
    #[error("assignment is not a bijection between agents and sides")]
    Assignment,
    #[error("network has {net} agents but the counts have {counts} sides")]
    Dimension { net: usize, counts: usize },
    #[error("agent {0} is not in the table")]
    UnknownAgent(usize),
    #[error("agent {agent} failed: {source}")]
    Agent { agent: usize, source: EngineError },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Graph presets; agent indices are 0-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NetworkPreset {
    /// Every agent sees every other one; `Complete { k: 3 }` is the triangle classroom.
    Complete { k: usize },
    /// A `rows × cols` parallelogram patch of the triangular lattice. Agent
    /// `(r, c)` has index `r·cols + c` and neighbours `(r, c±1)`, `(r±1, c)`,
    /// `(r−1, c+1)`, `(r+1, c−1)`; interior agents have six.
    TriangleLattice { rows: usize, cols: usize },
    Explicit {
        k: usize,
        edges: Vec<(usize, usize)>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgentNetwork {
    k: usize,
    adjacency: Vec<Vec<usize>>,
    /// `assignment[agent]` is the side whose count the agent is handed.
    assignment: Vec<usize>,
}

/// Visibility radius in graph hops; 0 means an agent sees only its own count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct VisibilityRound(pub usize);

pub fn build_network(preset: &NetworkPreset) -> Result<AgentNetwork, NetworkError> {
    match preset {
        NetworkPreset::Complete { k } => {
            let edges = (0..*k)
                .flat_map(|a| (a + 1..*k).map(move |b| (a, b)))
                .collect::<Vec<_>>();
            AgentNetwork::from_edges(*k, &edges)
        }
        NetworkPreset::TriangleLattice { rows, cols } => {
            let (rows, cols) = (*rows, *cols);
            let id = |r: usize, c: usize| r * cols + c;
            let mut edges = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    if c + 1 < cols {
                        edges.push((id(r, c), id(r, c + 1)));
                    }
                    if r + 1 < rows {
                        edges.push((id(r, c), id(r + 1, c)));
                        if c >= 1 {
                            edges.push((id(r, c), id(r + 1, c - 1)));
                        }
                    }
                }
            }
            AgentNetwork::from_edges(rows * cols, &edges)
        }
        NetworkPreset::Explicit { k, edges } => AgentNetwork::from_edges(*k, edges),
    }
}

impl AgentNetwork {
    pub fn from_edges(k: usize, edges: &[(usize, usize)]) -> Result<Self, NetworkError> {
        if k < 2 {
            return Err(NetworkError::TooSmall(k));
        }
        let mut adjacency = vec![Vec::new(); k];
        for &(a, b) in edges {
            if a >= k || b >= k {
                return Err(NetworkError::OutOfRange {
                    a: a + 1,
                    b: b + 1,
                    k,
                });
            }
            if a == b {
                return Err(NetworkError::SelfLoop(a + 1, b + 1));
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self {
            k,
            adjacency,
            assignment: (0..k).collect(),
        })
    }

    pub fn with_assignment(mut self, assignment: Vec<usize>) -> Result<Self, NetworkError> {
        let mut seen = vec![false; self.k];
        if assignment.len() != self.k {
            return Err(NetworkError::Assignment);
        }
        for &s in &assignment {
            if s >= self.k || seen[s] {
                return Err(NetworkError::Assignment);
            }
            seen[s] = true;
        }
        self.assignment = assignment;
        Ok(self)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn neighbors(&self, agent: usize) -> &[usize] {
        &self.adjacency[agent]
    }

    pub fn degree(&self, agent: usize) -> usize {
        self.adjacency[agent].len()
    }

    pub fn side_of(&self, agent: usize) -> usize {
        self.assignment[agent]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (a, list) in self.adjacency.iter().enumerate() {
            out.extend(list.iter().filter(|&&b| b > a).map(|&b| (a, b)));
        }
        out
    }

    /// Hop distances from `agent`; `None` for unreachable agents.
    pub fn distances(&self, agent: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.k];
        dist[agent] = Some(0);
        let mut queue = VecDeque::from([agent]);
        while let Some(a) = queue.pop_front() {
            let d = dist[a].unwrap();
            for &b in &self.adjacency[a] {
                if dist[b].is_none() {
                    dist[b] = Some(d + 1);
                    queue.push_back(b);
                }
            }
        }
        dist
    }

    /// Largest hop distance, or `None` if the graph is disconnected.
    pub fn diameter(&self) -> Option<usize> {
        let mut best = 0;
        for a in 0..self.k {
            for d in self.distances(a) {
                best = best.max(d?);
            }
        }
        Some(best)
    }

    /// Sides whose counts `agent` sees at `round`, ascending.
    pub fn visible_sides(&self, agent: usize, round: VisibilityRound) -> Vec<usize> {
        let mut sides: Vec<usize> = self
            .distances(agent)
            .into_iter()
            .enumerate()
            .filter(|(_, d)| d.is_some_and(|d| d <= round.0))
            .map(|(b, _)| self.assignment[b])
            .collect();
        sides.sort_unstable();
        sides
    }
}

pub fn views_at_round(
    net: &AgentNetwork,
    counts: &CountVector,
    round: VisibilityRound,
) -> Result<Vec<AgentView>, NetworkError> {
    if counts.k() != net.k {
        return Err(NetworkError::Dimension {
            net: net.k,
            counts: counts.k(),
        });
    }
    (0..net.k)
        .map(|a| Ok(AgentView::of_sides(counts, net.visible_sides(a, round))?))
        .collect()
}

#[derive(Clone, Debug)]
pub struct Belief {
    pub model: Posterior,
    pub summary: Summary,
    pub entropy: EntropyReport<f64>,
}

#[derive(Clone, Debug)]
pub struct AgentBelief {
    pub agent: usize,
    pub view: AgentView,
    pub outcome: Result<Belief, EngineError>,
}

/// One entry per agent, in agent order.
#[derive(Clone, Debug)]
pub struct BeliefTable {
    pub round: VisibilityRound,
    pub entries: Vec<AgentBelief>,
}

impl BeliefTable {
    pub fn get(&self, agent: usize) -> Result<&Belief, NetworkError> {
        let entry = self
            .entries
            .get(agent)
            .ok_or(NetworkError::UnknownAgent(agent + 1))?;
        entry.outcome.as_ref().map_err(|e| NetworkError::Agent {
            agent: agent + 1,
            source: e.clone(),
        })
    }

    pub fn successes(&self) -> usize {
        self.entries.iter().filter(|e| e.outcome.is_ok()).count()
    }
}

/// One agent's posterior, summary and entropy.
pub fn infer_one(
    view: &AgentView,
    prior: &PriorSpec<f64>,
    constraint: &ConstraintSpec<f64>,
    engine: Engine,
) -> Result<Belief, EngineError> {
    let problem = Inference::new(prior, view, constraint, engine)?;
    let solved = problem.solve()?;
    let model = problem.posterior(&solved)?;
    let summary = posterior_summary(&model)?;
    let entropy = me_entropy(&model);
    Ok(Belief {
        model,
        summary,
        entropy,
    })
}

/// Runs every agent's inference; a failing agent is recorded, not fatal.
pub fn infer_all(
    net: &AgentNetwork,
    counts: &CountVector,
    round: VisibilityRound,
    prior: &PriorSpec<f64>,
    constraint: &ConstraintSpec<f64>,
    engine: Engine,
) -> Result<BeliefTable, NetworkError> {
    let views = views_at_round(net, counts, round)?;
    let entries = views
        .into_par_iter()
        .enumerate()
        .map(|(agent, view)| {
            let outcome = infer_one(&view, prior, constraint, engine);
            AgentBelief {
                agent,
                view,
                outcome,
            }
        })
        .collect();
    Ok(BeliefTable { round, entries })
}

/// `KL(a‖b)` estimated on `a`'s nodes.
fn kl(a: &Posterior, b: &Posterior) -> Result<f64, EngineError> {
    let mut acc = Vec::with_capacity(a.nodes().len());
    for (t, &m) in a.nodes().iter().zip(a.node_mass()) {
        if m == 0.0 {
            continue;
        }
        acc.push(m * (a.log_density(t)? - b.log_density(t)?));
    }
    Ok(crate::simplex::pairwise_sum(&acc))
}

/// Symmetrized relative entropy `KL(a‖b) + KL(b‖a)` between two posteriors.
pub fn model_divergence(a: &Posterior, b: &Posterior) -> Result<f64, EngineError> {
    Ok((kl(a, b)? + kl(b, a)?).max(0.0))
}

pub fn belief_divergence(table: &BeliefTable, a: usize, b: usize) -> Result<f64, NetworkError> {
    let (pa, pb) = (table.get(a)?, table.get(b)?);
    model_divergence(&pa.model, &pb.model).map_err(|source| NetworkError::Agent {
        agent: a + 1,
        source,
    })
}
