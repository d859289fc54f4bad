use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{chordal_completion, pair_count, EliminationOrder, Graph};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Maps a linear index in `0..p(p-1)/2` to the pair `(i, j)`, `i < j`, in
/// row-major order of the strict upper triangle.
fn pair_from_index(p: usize, mut k: usize) -> (usize, usize) {
    let mut i = 0;
    loop {
        let row = p - 1 - i;
        if k < row {
            return (i, i + 1 + k);
        }
        k -= row;
        i += 1;
    }
}

/// Erdős–Rényi `G(p, m)` with `m = round(d · p(p-1)/2)` edges drawn
/// uniformly without replacement.
pub fn erdos_renyi(p: usize, density: f64, seed: u64) -> Result<Graph> {
    if p < 2 {
        return Err(Error::InvalidParameter("erdos_renyi needs p >= 2".into()));
    }
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::InvalidParameter(format!(
            "density {density} outside [0, 1]"
        )));
    }
    let total = pair_count(p);
    let m = (density * total as f64).round() as usize;
    let mut rng = rng_from_seed(seed);
    let picks = index::sample(&mut rng, total, m.min(total));
    Graph::new(p, picks.into_iter().map(|k| pair_from_index(p, k)))
}

/// Preferential attachment seeded with a clique on the first `m` nodes.
///
/// Each later node links to `m` distinct earlier nodes, drawn one at a time
/// with probability proportional to current degree (uniform when every
/// candidate has degree zero).
pub fn barabasi_albert(p: usize, m: usize, seed: u64) -> Result<Graph> {
    if m == 0 || m >= p {
        return Err(Error::InvalidParameter(format!(
            "barabasi_albert needs 1 <= m < p, got m={m}, p={p}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut degree = vec![0usize; p];
    let mut edges = Vec::with_capacity(m * (m - 1) / 2 + m * (p - m));
    for i in 0..m {
        for j in i + 1..m {
            edges.push((i, j));
            degree[i] += 1;
            degree[j] += 1;
        }
    }
    let mut taken = vec![false; p];
    for v in m..p {
        let mut targets = Vec::with_capacity(m);
        for _ in 0..m {
            let weight = |u: usize| if taken[u] { 0 } else { degree[u] };
            let total: usize = (0..v).map(weight).sum();
            let chosen = if total == 0 {
                let free: Vec<usize> = (0..v).filter(|&u| !taken[u]).collect();
                free[rng.random_range(0..free.len())]
            } else {
                let mut ticket = rng.random_range(0..total);
                let mut pick = 0;
                for u in 0..v {
                    let w = weight(u);
                    if ticket < w {
                        pick = u;
                        break;
                    }
                    ticket -= w;
                }
                pick
            };
            taken[chosen] = true;
            targets.push(chosen);
        }
        for &u in &targets {
            taken[u] = false;
            degree[u] += 1;
            degree[v] += 1;
            edges.push((u, v));
        }
    }
    Graph::new(p, edges)
}

/// Watts–Strogatz small world: a ring lattice of even degree `k`, each
/// lattice edge rewired with probability `beta` to a uniformly chosen node
/// that is neither the source nor already adjacent to it.
pub fn watts_strogatz(p: usize, k: usize, beta: f64, seed: u64) -> Result<Graph> {
    if k % 2 != 0 || k < 2 || k >= p {
        return Err(Error::InvalidParameter(format!(
            "watts_strogatz needs even k with 2 <= k < p, got k={k}, p={p}"
        )));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidParameter(format!("beta {beta} outside [0, 1]")));
    }
    let mut adj = vec![false; p * p];
    let set = |adj: &mut Vec<bool>, a: usize, b: usize, on: bool| {
        adj[a * p + b] = on;
        adj[b * p + a] = on;
    };
    for u in 0..p {
        for j in 1..=k / 2 {
            set(&mut adj, u, (u + j) % p, true);
        }
    }
    let mut rng = rng_from_seed(seed);
    for j in 1..=k / 2 {
        for u in 0..p {
            let v = (u + j) % p;
            if rng.random::<f64>() >= beta {
                continue;
            }
            let candidates: Vec<usize> = (0..p).filter(|&w| w != u && !adj[u * p + w]).collect();
            if candidates.is_empty() {
                continue;
            }
            let w = candidates[rng.random_range(0..candidates.len())];
            set(&mut adj, u, v, false);
            set(&mut adj, u, w, true);
        }
    }
    let edges = (0..p).flat_map(|i| (i + 1..p).map(move |j| (i, j)));
    Graph::new(p, edges.filter(|&(i, j)| adj[i * p + j]).collect::<Vec<_>>())
}

/// Stochastic block model with consecutive blocks of the given sizes.
pub fn sbm(block_sizes: &[usize], p_intra: f64, p_inter: f64, seed: u64) -> Result<Graph> {
    if block_sizes.is_empty() {
        return Err(Error::InvalidParameter("sbm needs at least one block".into()));
    }
    if block_sizes.contains(&0) {
        return Err(Error::InvalidParameter("sbm block sizes must be positive".into()));
    }
    for q in [p_intra, p_inter] {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidParameter(format!("probability {q} outside [0, 1]")));
        }
    }
    let block: Vec<usize> = block_sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &n)| std::iter::repeat_n(b, n))
        .collect();
    let p = block.len();
    let mut rng = rng_from_seed(seed);
    let mut edges = Vec::new();
    for i in 0..p {
        for j in i + 1..p {
            let q = if block[i] == block[j] { p_intra } else { p_inter };
            if rng.random::<f64>() < q {
                edges.push((i, j));
            }
        }
    }
    Graph::new(p, edges)
}

/// Model catalogue. Knobs left as `None` are derived from the target density
/// (see [`GraphModelParams::resolve`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum GraphModel {
    #[serde(rename = "er", alias = "erdos_renyi")]
    ErdosRenyi,
    #[serde(rename = "ba", alias = "barabasi_albert")]
    BarabasiAlbert {
        #[serde(default)]
        m: Option<usize>,
    },
    #[serde(rename = "ws", alias = "watts_strogatz")]
    WattsStrogatz {
        #[serde(default)]
        k: Option<usize>,
        #[serde(default = "default_beta")]
        beta: f64,
    },
    #[serde(rename = "sbm", alias = "stochastic_block_model")]
    StochasticBlockModel {
        #[serde(default)]
        block_sizes: Option<Vec<usize>>,
        #[serde(default)]
        p_intra: Option<f64>,
        #[serde(default)]
        p_inter: Option<f64>,
    },
    /// Barabási–Albert graph made chordal by minimum-degree elimination.
    #[serde(rename = "chordal")]
    Chordal {
        #[serde(default)]
        m: Option<usize>,
    },
}

fn default_beta() -> f64 {
    0.1
}

/// Ratio `p_inter / p_intra` used when SBM probabilities are derived from a
/// target density.
pub const SBM_DEFAULT_INTER_RATIO: f64 = 0.25;

impl GraphModel {
    pub fn short_name(&self) -> &'static str {
        match self {
            GraphModel::ErdosRenyi => "er",
            GraphModel::BarabasiAlbert { .. } => "ba",
            GraphModel::WattsStrogatz { .. } => "ws",
            GraphModel::StochasticBlockModel { .. } => "sbm",
            GraphModel::Chordal { .. } => "chordal",
        }
    }

    /// Model with every knob derived from density.
    pub fn from_short_name(name: &str) -> Result<Self> {
        Ok(match name {
            "er" | "erdos_renyi" => GraphModel::ErdosRenyi,
            "ba" | "barabasi_albert" => GraphModel::BarabasiAlbert { m: None },
            "ws" | "watts_strogatz" => GraphModel::WattsStrogatz {
                k: None,
                beta: default_beta(),
            },
            "sbm" | "stochastic_block_model" => GraphModel::StochasticBlockModel {
                block_sizes: None,
                p_intra: None,
                p_inter: None,
            },
            "chordal" => GraphModel::Chordal { m: None },
            other => {
                return Err(Error::InvalidParameter(format!("unknown graph model {other:?}")))
            }
        })
    }
}

/// A graph model together with node count and target density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphModelParams {
    #[serde(flatten)]
    pub model: GraphModel,
    pub p: usize,
    pub target_density: f64,
}

/// Barabási–Albert attachment count for a target density:
/// `round(d (p-1) / 2)` clamped to `[1, p-1]`.
pub fn ba_m_for_density(p: usize, d: f64) -> usize {
    ((d * (p as f64 - 1.0) / 2.0).round() as usize).clamp(1, p - 1)
}

/// Watts–Strogatz ring degree for a target density: the even integer
/// nearest to `d (p-1)`, clamped to `[2, p-1]`.
pub fn ws_k_for_density(p: usize, d: f64) -> usize {
    let raw = d * (p as f64 - 1.0);
    let mut k = 2 * ((raw / 2.0).round() as usize);
    let max_even = (p - 1) & !1;
    k = k.clamp(2, max_even.max(2));
    k
}

/// Two near-equal blocks with `p_inter = r p_intra` chosen so the expected
/// density equals `d`; `p_intra` saturates at 1 for dense targets.
pub fn sbm_defaults_for_density(p: usize, d: f64) -> (Vec<usize>, f64, f64) {
    let blocks = vec![p / 2, p - p / 2];
    let n_in: usize = blocks.iter().map(|&b| pair_count(b)).sum();
    let n_out = pair_count(p) - n_in;
    let target = d * pair_count(p) as f64;
    let r = SBM_DEFAULT_INTER_RATIO;
    let mut p_in = target / (n_in as f64 + r * n_out as f64);
    let mut p_out = r * p_in;
    if p_in > 1.0 {
        p_in = 1.0;
        p_out = ((target - n_in as f64) / n_out as f64).clamp(0.0, 1.0);
    }
    (blocks, p_in, p_out)
}

impl GraphModelParams {
    pub fn new(model: GraphModel, p: usize, target_density: f64) -> Result<Self> {
        let params = Self {
            model,
            p,
            target_density,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 2 {
            return Err(Error::InvalidParameter("p must be at least 2".into()));
        }
        if !(self.target_density > 0.0 && self.target_density <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "target density {} outside (0, 1]",
                self.target_density
            )));
        }
        match &self.model {
            GraphModel::WattsStrogatz { beta, .. } if !(0.0..=1.0).contains(beta) => Err(
                Error::InvalidParameter(format!("beta {beta} outside [0, 1]")),
            ),
            GraphModel::WattsStrogatz { .. } if self.p < 3 => Err(Error::InvalidParameter(
                "watts_strogatz needs p >= 3".into(),
            )),
            GraphModel::StochasticBlockModel {
                block_sizes: Some(b),
                ..
            } if b.iter().sum::<usize>() != self.p => Err(Error::InvalidParameter(format!(
                "block sizes sum to {}, expected p = {}",
                b.iter().sum::<usize>(),
                self.p
            ))),
            _ => Ok(()),
        }
    }

    /// Fills every unset knob from the target density.
    pub fn resolve(&self) -> GraphModel {
        let (p, d) = (self.p, self.target_density);
        match &self.model {
            GraphModel::ErdosRenyi => GraphModel::ErdosRenyi,
            GraphModel::BarabasiAlbert { m } => GraphModel::BarabasiAlbert {
                m: Some(m.unwrap_or_else(|| ba_m_for_density(p, d))),
            },
            GraphModel::Chordal { m } => GraphModel::Chordal {
                m: Some(m.unwrap_or_else(|| ba_m_for_density(p, d))),
            },
            GraphModel::WattsStrogatz { k, beta } => GraphModel::WattsStrogatz {
                k: Some(k.unwrap_or_else(|| ws_k_for_density(p, d))),
                beta: *beta,
            },
            GraphModel::StochasticBlockModel {
                block_sizes,
                p_intra,
                p_inter,
            } => {
                let (db, di, dx) = sbm_defaults_for_density(p, d);
                GraphModel::StochasticBlockModel {
                    block_sizes: Some(block_sizes.clone().unwrap_or(db)),
                    p_intra: Some(p_intra.unwrap_or(di)),
                    p_inter: Some(p_inter.unwrap_or(dx)),
                }
            }
        }
    }

    pub fn generate(&self, seed: u64) -> Result<Graph> {
        self.validate()?;
        let p = self.p;
        match self.resolve() {
            GraphModel::ErdosRenyi => erdos_renyi(p, self.target_density, seed),
            GraphModel::BarabasiAlbert { m } => barabasi_albert(p, m.unwrap_or(1), seed),
            GraphModel::WattsStrogatz { k, beta } => {
                watts_strogatz(p, k.unwrap_or(2), beta, seed)
            }
            GraphModel::StochasticBlockModel {
                block_sizes,
                p_intra,
                p_inter,
            } => sbm(
                &block_sizes.unwrap_or_default(),
                p_intra.unwrap_or(0.0),
                p_inter.unwrap_or(0.0),
                seed,
            ),
            GraphModel::Chordal { m } => {
                let base = barabasi_albert(p, m.unwrap_or(1), seed)?;
                Ok(chordal_completion(&base, &EliminationOrder::MinDegree))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::is_chordal;

    #[test]
    fn pair_index_enumerates_upper_triangle() {
        let p = 6;
        let pairs: Vec<_> = (0..pair_count(p)).map(|k| pair_from_index(p, k)).collect();
        let expected: Vec<_> = (0..p).flat_map(|i| (i + 1..p).map(move |j| (i, j))).collect();
        assert_eq!(pairs, expected);
    }

    #[test]
    fn er_hits_exact_edge_count() {
        let g = erdos_renyi(51, 0.5, 3).unwrap();
        assert_eq!(g.edge_count(), 638);
        assert_eq!(erdos_renyi(3, 1.0, 9).unwrap(), Graph::complete(3).unwrap());
        assert_eq!(erdos_renyi(10, 0.0, 9).unwrap().edge_count(), 0);
    }

    #[test]
    fn er_is_deterministic() {
        assert_eq!(erdos_renyi(20, 0.3, 11).unwrap(), erdos_renyi(20, 0.3, 11).unwrap());
        assert_ne!(erdos_renyi(20, 0.3, 11).unwrap(), erdos_renyi(20, 0.3, 12).unwrap());
    }

    #[test]
    fn ba_small_cases() {
        assert_eq!(barabasi_albert(4, 3, 1).unwrap(), Graph::complete(4).unwrap());
        assert_eq!(barabasi_albert(2, 1, 1).unwrap(), Graph::complete(2).unwrap());
        assert!(barabasi_albert(4, 4, 1).is_err());
        assert!(barabasi_albert(4, 0, 1).is_err());
    }

    #[test]
    fn ba_edge_count_follows_clique_seed() {
        for seed in 0..5 {
            let g = barabasi_albert(51, 5, seed).unwrap();
            assert_eq!(g.edge_count(), 5 * 46 + 10);
        }
    }

    #[test]
    fn ba_is_connected() {
        let g = barabasi_albert(40, 2, 5).unwrap();
        let mut seen = vec![false; 40];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for v in g.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn ws_ring_and_rewiring() {
        assert_eq!(watts_strogatz(6, 2, 0.0, 1).unwrap(), Graph::cycle(6).unwrap());
        let g = watts_strogatz(51, 24, 0.1, 4).unwrap();
        assert_eq!(g.edge_count(), 612);
        assert!((g.density().unwrap() - 0.48).abs() < 1e-12);
        let g = watts_strogatz(4, 2, 1.0, 2).unwrap();
        assert_eq!(g.edge_count(), 4);
        assert!(watts_strogatz(6, 3, 0.0, 1).is_err());
        assert!(watts_strogatz(6, 6, 0.0, 1).is_err());
    }

    #[test]
    fn sbm_extremes() {
        let g = sbm(&[3, 3], 1.0, 0.0, 1).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)]);
        assert_eq!(sbm(&[5], 1.0, 0.3, 1).unwrap(), Graph::complete(5).unwrap());
        assert!(sbm(&[], 0.5, 0.5, 1).is_err());
    }

    #[test]
    fn sbm_edge_count_concentrates() {
        // 300 + 325 intra pairs at 0.8, 650 inter pairs at 0.2.
        let mean = 0.8 * 625.0 + 0.2 * 650.0;
        let var = 625.0 * 0.8 * 0.2 + 650.0 * 0.2 * 0.8;
        for seed in 0..10 {
            let e = sbm(&[25, 26], 0.8, 0.2, seed).unwrap().edge_count() as f64;
            assert!((e - mean).abs() <= 3.0 * f64::sqrt(var), "seed {seed}: {e}");
        }
    }

    #[test]
    fn density_to_knob_maps() {
        assert_eq!(ba_m_for_density(51, 0.2), 5);
        assert_eq!(ba_m_for_density(51, 0.0001), 1);
        assert_eq!(ws_k_for_density(51, 0.48), 24);
        assert_eq!(ws_k_for_density(51, 1.0), 50);
        assert_eq!(ws_k_for_density(50, 1.0), 48);
        assert_eq!(ws_k_for_density(51, 0.01), 2);
        let (b, pi, px) = sbm_defaults_for_density(51, 0.3);
        assert_eq!(b, vec![25, 26]);
        let expected = pi * 625.0 + px * 650.0;
        assert!((expected - 0.3 * 1275.0).abs() < 1e-9);
    }

    #[test]
    fn model_params_generate_every_model() {
        for name in ["er", "ba", "ws", "sbm", "chordal"] {
            let params =
                GraphModelParams::new(GraphModel::from_short_name(name).unwrap(), 30, 0.3).unwrap();
            let g = params.generate(5).unwrap();
            assert_eq!(g.node_count(), 30);
            assert_eq!(g, params.generate(5).unwrap());
            if name == "chordal" {
                assert!(is_chordal(&g).0);
            }
        }
    }

    #[test]
    fn model_params_json_shape() {
        let params: GraphModelParams =
            serde_json::from_str(r#"{"model":"ws","p":10,"target_density":0.4,"beta":0.2}"#)
                .unwrap();
        assert_eq!(
            params.model,
            GraphModel::WattsStrogatz {
                k: None,
                beta: 0.2
            }
        );
        assert!(GraphModelParams::new(GraphModel::ErdosRenyi, 10, 0.0).is_err());
    }
}
