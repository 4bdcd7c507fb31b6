//! Training-data synthesis: sampled designs with simulated time costs, and
//! the two prompt styles built from them (plain completion and pairwise
//! comparison).

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{derive_seed, RunConfig};
use crate::control::{Environment, Objective, StairParams, TaskSpec};
use crate::design::{bfs_augment, canonical_key, sample_design, CanonicalKey, DesignError, GridDesign};
use crate::metrics::simulate_design;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetParams {
    pub grid: (u32, u32),
    pub min_blocks: usize,
    pub max_blocks: usize,
    /// Distance requirements are drawn from this range in half-block steps.
    pub distance_min: f64,
    pub distance_max: f64,
    pub stairs: StairParams,
    /// Optimizer iterations per record.
    pub budget: usize,
}

impl Default for DatasetParams {
    fn default() -> Self {
        DatasetParams {
            grid: (5, 5),
            min_blocks: 3,
            max_blocks: 10,
            distance_min: 2.0,
            distance_max: 6.0,
            stairs: StairParams::default(),
            budget: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: usize,
    pub objective: Objective,
    pub environment: Environment,
    pub max_distance: f64,
    pub design_text: String,
    /// Simulated seconds to complete the task; `None` if it never did.
    pub time_cost: Option<f64>,
    pub canonical_key: CanonicalKey,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl DatasetRecord {
    pub fn task_spec(&self) -> TaskSpec {
        TaskSpec {
            distance_req: Some(self.max_distance),
            ..TaskSpec::new(self.objective, self.environment)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptKind {
    Clm,
    Compare,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptRecord {
    pub kind: PromptKind,
    pub prompt: String,
    pub completion: String,
    pub source_ids: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatagenError {
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error("records {a} and {b} cannot be compared: {reason}")]
    IncomparablePair { a: usize, b: usize, reason: &'static str },
}

pub fn environment_for(objective: Objective, params: &DatasetParams) -> Environment {
    match objective {
        Objective::Downstairs => Environment::Stairs(params.stairs),
        _ => Environment::FlatPlane,
    }
}

fn draw_distance(params: &DatasetParams, seed: u64) -> f64 {
    let lo = (params.distance_min * 2.0).ceil() as i64;
    let hi = ((params.distance_max * 2.0).floor() as i64).max(lo);
    ChaCha8Rng::seed_from_u64(seed).gen_range(lo..=hi) as f64 / 2.0
}

/// Samples `n_configs` designs and simulates each under every objective.
/// Records are numbered config-major: `id = config * objectives.len() + t`.
pub fn build_dataset(
    n_configs: usize,
    objectives: &[Objective],
    config: &RunConfig,
) -> Result<Vec<DatasetRecord>, DatagenError> {
    let params = &config.dataset;
    let designs: Vec<GridDesign> = (0..n_configs)
        .map(|i| {
            sample_design(
                params.grid,
                params.min_blocks..=params.max_blocks,
                derive_seed(config.seed, 10, i as u64),
            )
        })
        .collect::<Result<_, _>>()?;
    let mut sim_config = config.clone();
    sim_config.budget = params.budget;

    let jobs: Vec<(usize, &GridDesign, Objective)> = designs
        .iter()
        .flat_map(|d| objectives.iter().map(move |&o| (d, o)))
        .enumerate()
        .map(|(id, (d, o))| (id, d, o))
        .collect();
    jobs.into_par_iter()
        .map(|(id, design, objective)| {
            let id64 = id as u64;
            let script = bfs_augment(design, 1, derive_seed(config.seed, 11, id64))?.remove(0);
            let record = DatasetRecord {
                id,
                objective,
                environment: environment_for(objective, params),
                max_distance: draw_distance(params, derive_seed(config.seed, 12, id64)),
                design_text: script.to_string(),
                time_cost: None,
                canonical_key: canonical_key(design)?,
                failure: None,
            };
            let outcome = simulate_design(design, &record.task_spec(), &sim_config, derive_seed(config.seed, 13, id64));
            Ok(match outcome {
                Ok(o) => DatasetRecord {
                    time_cost: o.completion_time,
                    ..record
                },
                Err(e) => DatasetRecord {
                    failure: Some(e),
                    ..record
                },
            })
        })
        .collect()
}

pub fn task_phrase(objective: Objective) -> &'static str {
    match objective {
        Objective::Uni => "unidirectional locomotion",
        Objective::BackForth => "back-and-forth locomotion",
        Objective::Downstairs => "stair-descending locomotion",
    }
}

pub fn environment_phrase(env: &Environment) -> &'static str {
    match env {
        Environment::FlatPlane => "a flat plane",
        Environment::Stairs(_) => "stairs",
    }
}

fn block_count(record: &DatasetRecord) -> usize {
    record.canonical_key.as_bytes().len() / 8
}

/// Completion prompt. The distance clause and the block-count clause are
/// each kept with probability 1/2.
pub fn render_clm(record: &DatasetRecord, seed: u64) -> PromptRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let keep_distance = rng.gen_bool(0.5);
    let keep_blocks = rng.gen_bool(0.5);
    let at_most = rng.gen_bool(0.5);
    let mut prompt = format!("Design a soft modular robot to achieve {}", task_phrase(record.objective));
    if keep_distance {
        prompt.push_str(&format!(" over a distance of {} block lengths", record.max_distance));
    }
    prompt.push_str(&format!(" within {}", environment_phrase(&record.environment)));
    if keep_blocks {
        let bound = if at_most { "at most" } else { "at least" };
        prompt.push_str(&format!(" using {bound} {} blocks", block_count(record)));
    }
    prompt.push('.');
    PromptRecord {
        kind: PromptKind::Clm,
        prompt,
        completion: record.design_text.clone(),
        source_ids: vec![record.id],
    }
}

/// Pairwise prompt; the completion is the design with the lower time cost.
/// Which record is shown as (a) is drawn from `seed`; ties go to (a).
pub fn render_compare(a: &DatasetRecord, b: &DatasetRecord, seed: u64) -> Result<PromptRecord, DatagenError> {
    let incomparable = |reason| DatagenError::IncomparablePair { a: a.id, b: b.id, reason };
    if a.objective != b.objective || a.environment != b.environment {
        return Err(incomparable("different task or environment"));
    }
    let (Some(ca), Some(cb)) = (a.time_cost, b.time_cost) else {
        return Err(incomparable("missing time cost"));
    };
    let (first, second, c1, c2) = if ChaCha8Rng::seed_from_u64(seed).gen_bool(0.5) {
        (b, a, cb, ca)
    } else {
        (a, b, ca, cb)
    };
    let winner = if c1 <= c2 { first } else { second };
    let prompt = format!(
        "For achieving {} within {}, which design is better?\n(a)\n{}\n(b)\n{}",
        task_phrase(a.objective),
        environment_phrase(&a.environment),
        first.design_text,
        second.design_text
    );
    Ok(PromptRecord {
        kind: PromptKind::Compare,
        prompt,
        completion: winner.design_text.clone(),
        source_ids: vec![first.id, second.id],
    })
}

/// Design scripts carried by a prompt record, in (a), (b) order for
/// comparisons.
pub fn embedded_designs(record: &PromptRecord) -> Vec<String> {
    match record.kind {
        PromptKind::Clm => vec![record.completion.clone()],
        PromptKind::Compare => {
            let body = record.prompt.split_once("\n(a)\n").map_or("", |(_, rest)| rest);
            match body.split_once("\n(b)\n") {
                Some((a, b)) => vec![a.to_owned(), b.to_owned()],
                None => Vec::new(),
            }
        }
    }
}

/// Uniformly random distinct pairs of completed records sharing objective
/// and environment, without replacement. Returns fewer than `n_pairs` when
/// the groups run out.
pub fn pair_sampler(records: &[DatasetRecord], n_pairs: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut groups: BTreeMap<(Objective, String), Vec<usize>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.time_cost.is_some()) {
        groups.entry((r.objective, r.environment.to_string())).or_default().push(r.id);
    }
    let groups: Vec<Vec<usize>> = groups.into_values().filter(|g| g.len() >= 2).collect();
    let sizes: Vec<usize> = groups.iter().map(|g| g.len() * (g.len() - 1) / 2).collect();
    let total: usize = sizes.iter().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    if n_pairs.saturating_mul(2) >= total {
        let mut all: Vec<(usize, usize)> = groups
            .iter()
            .flat_map(|g| {
                (0..g.len()).flat_map(move |i| (i + 1..g.len()).map(move |j| (g[i], g[j])))
            })
            .collect();
        all.shuffle(&mut rng);
        all.truncate(n_pairs);
        return all;
    }

    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(n_pairs);
    while out.len() < n_pairs {
        let mut k = rng.gen_range(0..total);
        let g = sizes
            .iter()
            .position(|&s| {
                if k < s {
                    true
                } else {
                    k -= s;
                    false
                }
            })
            .expect("index below total");
        let members = &groups[g];
        let i = rng.gen_range(0..members.len());
        let mut j = rng.gen_range(0..members.len() - 1);
        if j >= i {
            j += 1;
        }
        let pair = (members[i.min(j)], members[i.max(j)]);
        if seen.insert(pair) {
            out.push(pair);
        }
    }
    out
}

/// `n_clm` completion prompts cycling over the records, then up to
/// `n_compare` comparison prompts.
pub fn build_prompts(records: &[DatasetRecord], n_clm: usize, n_compare: usize, seed: u64) -> Vec<PromptRecord> {
    let mut out = Vec::new();
    if !records.is_empty() {
        for i in 0..n_clm {
            out.push(render_clm(&records[i % records.len()], derive_seed(seed, 20, i as u64)));
        }
    }
    let by_id: BTreeMap<usize, &DatasetRecord> = records.iter().map(|r| (r.id, r)).collect();
    for (n, (a, b)) in pair_sampler(records, n_compare, derive_seed(seed, 22, 0)).into_iter().enumerate() {
        let prompt = render_compare(by_id[&a], by_id[&b], derive_seed(seed, 21, n as u64))
            .expect("sampled pairs are comparable");
        out.push(prompt);
    }
    out
}
