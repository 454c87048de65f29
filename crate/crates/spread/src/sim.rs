use gfcn_graph::Graph;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::SpreadError;

/// Parameters of one epidemic run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    /// Chance that an infected vertex passes the infection over one
    /// edge in one round.
    pub infection_prob: f64,
    /// Chance that an infected vertex recovers in one round. Recovered
    /// vertices can be infected again later.
    pub recovery_prob: f64,
    /// The run stops once this fraction of all vertices is infected at
    /// the same time.
    pub stop_fraction: f64,
    /// Hard cap on the number of rounds.
    pub max_steps: usize,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            infection_prob: 0.5,
            recovery_prob: 0.1,
            stop_fraction: 0.3,
            max_steps: 100,
        }
    }
}

impl SimParams {
    fn check(&self) -> Result<(), SpreadError> {
        for (name, p) in [
            ("infection_prob", self.infection_prob),
            ("recovery_prob", self.recovery_prob),
        ] {
            if !(0.0..=1.0).contains(&p) || p.is_nan() {
                return Err(SpreadError::BadParams(format!(
                    "{name} must lie in [0, 1], got {p}"
                )));
            }
        }
        if !(self.stop_fraction > 0.0 && self.stop_fraction <= 1.0) {
            return Err(SpreadError::BadParams(format!(
                "stop_fraction must lie in (0, 1], got {}",
                self.stop_fraction
            )));
        }
        Ok(())
    }
}

/// What an observer sees at the end of a run: who is infected right
/// now. Vertices that caught the infection and recovered are
/// indistinguishable from ones never touched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub source: usize,
    /// One flag per vertex: infected at observation time.
    pub infected: Vec<bool>,
    /// Rounds actually simulated.
    pub steps: usize,
    #[serde(rename = "p_i")]
    pub infection_prob: f64,
    #[serde(rename = "p_r")]
    pub recovery_prob: f64,
}

impl Snapshot {
    /// Ids of the infected vertices, ascending.
    pub fn infected_ids(&self) -> Vec<usize> {
        (0..self.infected.len())
            .filter(|&v| self.infected[v])
            .collect()
    }

    pub fn num_infected(&self) -> usize {
        self.infected.iter().filter(|&&b| b).count()
    }
}

#[derive(Clone, Copy, PartialEq)]
enum State {
    Susceptible,
    Infected,
    Recovered,
}

/// Run one epidemic from `source` and return the final snapshot.
///
/// Rounds are synchronous and recovery comes first: a vertex that
/// recovers in a round does not spread in that round, and a vertex
/// infected in a round starts spreading in the next one.
pub fn simulate(
    graph: &Graph,
    source: usize,
    params: &SimParams,
    rng: &mut ChaCha8Rng,
) -> Result<Snapshot, SpreadError> {
    params.check()?;
    let n = graph.num_vertices();
    if source >= n {
        return Err(SpreadError::BadVertex {
            vertex: source,
            num_vertices: n,
        });
    }

    let mut state = vec![State::Susceptible; n];
    state[source] = State::Infected;
    let mut infected_count = 1usize;
    let mut steps = 0;

    while steps < params.max_steps
        && infected_count > 0
        && (infected_count as f64) < params.stop_fraction * n as f64
    {
        for v in 0..n {
            if state[v] == State::Infected && rng.gen_bool(params.recovery_prob) {
                state[v] = State::Recovered;
                infected_count -= 1;
            }
        }
        let mut caught = Vec::new();
        for v in 0..n {
            if state[v] != State::Infected {
                continue;
            }
            for u in graph.neighbors(v) {
                if state[u] != State::Infected && rng.gen_bool(params.infection_prob) {
                    caught.push(u);
                }
            }
        }
        for u in caught {
            if state[u] != State::Infected {
                state[u] = State::Infected;
                infected_count += 1;
            }
        }
        steps += 1;
    }

    Ok(Snapshot {
        source,
        infected: state.iter().map(|&s| s == State::Infected).collect(),
        steps,
        infection_prob: params.infection_prob,
        recovery_prob: params.recovery_prob,
    })
}
