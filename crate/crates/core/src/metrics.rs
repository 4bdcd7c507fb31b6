//! The five design metrics: instruction following (IF), promise score (PS),
//! completion time (OPT), unseen-design rate (GEN) and legal-generation
//! rate (SR).
//!
//! SR is taken over every record; the other four only over legal designs.
//! PS and OPT come from a long rollout of each design's optimized
//! controller, `long_horizon_factor` times the task horizon.

use std::collections::{BTreeMap, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{derive_seed, RunConfig};
use crate::control::{self, Environment, Objective, TaskSpec};
use crate::design::{canonical_key, parse_design, validate, CanonicalKey, GridDesign, Reason};
use crate::mesh::{build_mesh, Vec2};

/// One generated design, as read from a generations file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub prompt_id: String,
    pub task: Objective,
    pub environment: Environment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_blocks: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_blocks: Option<usize>,
    pub design_text: String,
}

impl GenerationRecord {
    pub fn task_spec(&self) -> TaskSpec {
        TaskSpec {
            objective: self.task,
            environment: self.environment,
            distance_req: self.distance,
            min_blocks: self.min_blocks,
            max_blocks: self.max_blocks,
        }
    }
}

/// Long-horizon result for one design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignOutcome {
    /// Simulated seconds until the completion predicate first held.
    pub completion_time: Option<f64>,
    /// Promise score in block lengths.
    pub ps: f64,
}

/// `num / den`, kept unreduced so reports can show denominators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Fraction {
    pub num: usize,
    pub den: usize,
}

impl Fraction {
    pub fn value(self) -> Option<f64> {
        (self.den > 0).then(|| self.num as f64 / self.den as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("no legal design carries block-count bounds")]
    NoConstrainedPrompts,
    #[error("record {index}: {message}")]
    Task { index: usize, message: String },
}

/// Parses and validates a generated script.
pub fn legality(text: &str) -> Result<GridDesign, Vec<Reason>> {
    let design = parse_design(text).map_err(|_| Vec::new())?;
    let verdict = validate(&design, None);
    if verdict.legal {
        Ok(design)
    } else {
        Err(verdict.reasons)
    }
}

pub fn score_sr(texts: &[&str]) -> Fraction {
    Fraction {
        num: texts.iter().filter(|t| legality(t).is_ok()).count(),
        den: texts.len(),
    }
}

/// Block-count compliance over legal designs whose prompts carry bounds.
pub fn score_if(batch: &[(&TaskSpec, &GridDesign)]) -> Result<Fraction, MetricError> {
    let constrained: Vec<_> = batch.iter().filter(|(t, _)| t.has_block_bounds()).collect();
    if constrained.is_empty() {
        return Err(MetricError::NoConstrainedPrompts);
    }
    Ok(Fraction {
        num: constrained
            .iter()
            .filter(|(t, d)| t.blocks_within_bounds(d.block_count()))
            .count(),
        den: constrained.len(),
    })
}

pub fn score_ps(outcomes: &[DesignOutcome]) -> Option<f64> {
    mean(outcomes.iter().map(|o| o.ps))
}

/// Mean completion time over completers, and the completer fraction.
pub fn score_opt(outcomes: &[DesignOutcome]) -> (Option<f64>, Fraction) {
    let times: Vec<f64> = outcomes.iter().filter_map(|o| o.completion_time).collect();
    let frac = Fraction {
        num: times.len(),
        den: outcomes.len(),
    };
    (mean(times.into_iter()), frac)
}

pub fn score_gen(designs: &[GridDesign], training: &HashSet<CanonicalKey>) -> Fraction {
    Fraction {
        num: designs
            .iter()
            .filter(|d| canonical_key(d).map_or(false, |k| !training.contains(&k)))
            .count(),
        den: designs.len(),
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Distance credited over a center-of-mass track. Uni and downstairs use
/// net displacement; back-and-forth credits every completed leg with the
/// distance requirement plus progress into the unfinished leg. A return leg
/// completes within half a block of the start, as in the completion
/// predicate.
pub fn promise_score(task: &TaskSpec, com: &[Vec2]) -> f64 {
    let (Some(first), Some(last)) = (com.first(), com.last()) else {
        return 0.0;
    };
    match task.objective {
        Objective::Uni | Objective::Downstairs => last[0] - first[0],
        Objective::BackForth => {
            let req = task.distance();
            let mut legs = 0usize;
            for c in com {
                let p = c[0] - first[0];
                let outbound = legs % 2 == 0;
                if (outbound && p >= req) || (!outbound && p <= 0.5) {
                    legs += 1;
                }
            }
            let p = last[0] - first[0];
            let residual = if legs % 2 == 0 { p } else { req - p };
            legs as f64 * req + residual.clamp(0.0, req)
        }
    }
}

/// Optimizes a controller on the task horizon, then rolls it out over the
/// long horizon and scores it.
pub fn simulate_design(
    design: &GridDesign,
    task: &TaskSpec,
    config: &RunConfig,
    seed: u64,
) -> Result<DesignOutcome, String> {
    let mesh = build_mesh(design, &config.material).map_err(|e| e.to_string())?;
    let width = design.bounds().map_or(0, |(lo, hi)| hi.0 - lo.0 + 1) as f64;
    let terrain = task.environment.terrain(width);
    let best = control::optimize(
        &mesh,
        task,
        &terrain,
        seed,
        config.budget,
        &config.sim,
        &config.optimizer,
    )
    .map_err(|e| e.to_string())?;
    let steps = config.sim.n_steps * config.long_horizon_factor.max(1);
    let long = control::evaluate_plan(&mesh, task, &terrain, &best.plan, &config.sim, steps)
        .map_err(|e| e.to_string())?;
    Ok(DesignOutcome {
        completion_time: long.completion_step.map(|n| n as f64 * config.sim.dt),
        ps: promise_score(task, &long.com_track),
    })
}

/// Source of per-design outcomes.
pub trait Evaluator: Sync {
    fn outcome(&self, index: usize, design: &GridDesign, task: &TaskSpec) -> Result<DesignOutcome, String>;
}

/// Optimizes and simulates every design.
pub struct Simulated<'a>(pub &'a RunConfig);

impl Evaluator for Simulated<'_> {
    fn outcome(&self, index: usize, design: &GridDesign, task: &TaskSpec) -> Result<DesignOutcome, String> {
        simulate_design(design, task, self.0, derive_seed(self.0.seed, 1, index as u64))
    }
}

/// Row of an outcomes file, keyed by record index in the generations file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRow {
    pub index: usize,
    pub completion_time: Option<f64>,
    pub ps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

/// Replays recorded outcomes instead of simulating.
pub struct Replay(HashMap<usize, OutcomeRow>);

impl Replay {
    pub fn new(rows: impl IntoIterator<Item = OutcomeRow>) -> Self {
        Replay(rows.into_iter().map(|r| (r.index, r)).collect())
    }
}

impl Evaluator for Replay {
    fn outcome(&self, index: usize, _: &GridDesign, _: &TaskSpec) -> Result<DesignOutcome, String> {
        let row = self.0.get(&index).ok_or_else(|| "no recorded outcome".to_owned())?;
        match &row.failure {
            Some(f) => Err(f.clone()),
            None => Ok(DesignOutcome {
                completion_time: row.completion_time,
                ps: row.ps,
            }),
        }
    }
}

/// Per-design line of the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetailRow {
    pub index: usize,
    pub prompt_id: String,
    pub task: Objective,
    pub legal: bool,
    /// Empty for scripts that fail to parse.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub reasons: Vec<Reason>,
    pub blocks: Option<usize>,
    pub compliant: Option<bool>,
    pub unseen: Option<bool>,
    pub completion_time: Option<f64>,
    pub ps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counts {
    pub total: usize,
    pub legal: usize,
    pub constrained: usize,
    pub compliant: usize,
    pub unseen: usize,
    pub simulated: usize,
    pub failed: usize,
    pub completers: usize,
}

/// Aggregates for one task objective (or all of them). `None` marks a
/// metric with an empty denominator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskMetrics {
    #[serde(rename = "if")]
    pub if_: Option<f64>,
    pub ps: Option<f64>,
    pub opt: Option<f64>,
    pub opt_completion_fraction: Option<f64>,
    pub gen: Option<f64>,
    pub sr: Option<f64>,
    pub counts: Counts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub ps_definition: String,
    pub tasks: BTreeMap<String, TaskMetrics>,
    pub overall: TaskMetrics,
    pub details: Vec<DetailRow>,
}

const PS_DEFINITION: &str =
    "uni, downstairs: net com displacement; back_forth: completed legs times distance plus progress in the open leg";

fn aggregate(
    rows: &[&DetailRow],
    specs: &[TaskSpec],
    designs: &[Option<GridDesign>],
    training: &HashSet<CanonicalKey>,
) -> TaskMetrics {
    let sr = Fraction {
        num: rows.iter().filter(|r| r.legal).count(),
        den: rows.len(),
    };
    let legal: Vec<(&TaskSpec, &GridDesign)> = rows
        .iter()
        .filter_map(|r| designs[r.index].as_ref().map(|d| (&specs[r.index], d)))
        .collect();
    let if_ = score_if(&legal).ok();
    let legal_designs: Vec<GridDesign> = legal.iter().map(|(_, d)| (*d).clone()).collect();
    let gen = score_gen(&legal_designs, training);
    let outcomes: Vec<DesignOutcome> = rows
        .iter()
        .filter(|r| r.legal && r.failure.is_none())
        .map(|r| DesignOutcome {
            completion_time: r.completion_time,
            ps: r.ps.unwrap_or(0.0),
        })
        .collect();
    let (opt, completed) = score_opt(&outcomes);
    TaskMetrics {
        if_: if_.and_then(Fraction::value),
        ps: score_ps(&outcomes),
        opt,
        opt_completion_fraction: completed.value(),
        gen: gen.value(),
        sr: sr.value(),
        counts: Counts {
            total: rows.len(),
            legal: sr.num,
            constrained: if_.map_or(0, |f| f.den),
            compliant: if_.map_or(0, |f| f.num),
            unseen: gen.num,
            simulated: outcomes.len(),
            failed: rows.iter().filter(|r| r.legal && r.failure.is_some()).count(),
            completers: completed.num,
        },
    }
}

/// Scores a batch. Outcomes are computed in parallel; aggregation runs in
/// record order.
pub fn evaluate(
    records: &[GenerationRecord],
    training: &HashSet<CanonicalKey>,
    evaluator: &dyn Evaluator,
) -> Result<MetricReport, MetricError> {
    let specs: Vec<TaskSpec> = records.iter().map(GenerationRecord::task_spec).collect();
    for (index, spec) in specs.iter().enumerate() {
        spec.check().map_err(|e| MetricError::Task {
            index,
            message: e.to_string(),
        })?;
    }
    let parsed: Vec<Result<GridDesign, Vec<Reason>>> =
        records.iter().map(|r| legality(&r.design_text)).collect();
    let designs: Vec<Option<GridDesign>> = parsed.iter().map(|p| p.as_ref().ok().cloned()).collect();

    let outcomes: Vec<Option<Result<DesignOutcome, String>>> = (0..records.len())
        .into_par_iter()
        .map(|i| designs[i].as_ref().map(|d| evaluator.outcome(i, d, &specs[i])))
        .collect();

    let details: Vec<DetailRow> = records
        .iter()
        .enumerate()
        .map(|(index, rec)| {
            let design = designs[index].as_ref();
            let (completion_time, ps, failure) = match &outcomes[index] {
                Some(Ok(o)) => (o.completion_time, Some(o.ps), None),
                Some(Err(e)) => (None, None, Some(e.clone())),
                None => (None, None, None),
            };
            DetailRow {
                index,
                prompt_id: rec.prompt_id.clone(),
                task: rec.task,
                legal: design.is_some(),
                reasons: parsed[index].as_ref().err().cloned().unwrap_or_default(),
                blocks: design.map(GridDesign::block_count),
                compliant: design
                    .filter(|_| specs[index].has_block_bounds())
                    .map(|d| specs[index].blocks_within_bounds(d.block_count())),
                unseen: design.map(|d| canonical_key(d).map_or(false, |k| !training.contains(&k))),
                completion_time,
                ps,
                failure,
            }
        })
        .collect();

    let mut tasks = BTreeMap::new();
    for objective in Objective::ALL {
        let rows: Vec<&DetailRow> = details.iter().filter(|r| r.task == objective).collect();
        tasks.insert(objective.name().to_owned(), aggregate(&rows, &specs, &designs, training));
    }
    let all: Vec<&DetailRow> = details.iter().collect();
    let overall = aggregate(&all, &specs, &designs, training);
    Ok(MetricReport {
        ps_definition: PS_DEFINITION.to_owned(),
        tasks,
        overall,
        details,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::serialize;

    fn track(xs: &[f64]) -> Vec<Vec2> {
        xs.iter().map(|&x| [x, 0.0]).collect()
    }

    fn record(task: Objective, text: &str, max_blocks: Option<usize>) -> GenerationRecord {
        GenerationRecord {
            prompt_id: "p".into(),
            task,
            environment: if task == Objective::Downstairs {
                Environment::Stairs(Default::default())
            } else {
                Environment::FlatPlane
            },
            distance: None,
            min_blocks: None,
            max_blocks,
            design_text: text.into(),
        }
    }

    #[test]
    fn sr_counts_parse_and_shape_failures() {
        let ok = "robot with 1 blocks:\nblock b0 at origin.";
        let mut texts = vec![ok; 9];
        texts.push("robot with 1 blocks:\nblok b0 at origin.");
        assert_eq!(score_sr(&texts).value(), Some(0.9));
        assert_eq!(score_sr(&[ok, ok]).value(), Some(1.0));
        assert_eq!(score_sr(&[]).value(), None);
    }

    #[test]
    fn if_bounds() {
        let spec = TaskSpec {
            max_blocks: Some(9),
            ..TaskSpec::new(Objective::Uni, Environment::FlatPlane)
        };
        let eight = GridDesign::from_cells((0..8).map(|c| (c, 0)));
        let ten = GridDesign::from_cells((0..10).map(|c| (c, 0)));
        assert_eq!(score_if(&[(&spec, &eight)]).unwrap().value(), Some(1.0));
        assert_eq!(score_if(&[(&spec, &ten)]).unwrap().value(), Some(0.0));
        let free = TaskSpec::new(Objective::Uni, Environment::FlatPlane);
        assert_eq!(score_if(&[(&free, &ten)]), Err(MetricError::NoConstrainedPrompts));
    }

    #[test]
    fn opt_and_ps() {
        let o = |t: Option<f64>, ps| DesignOutcome { completion_time: t, ps };
        let batch = [o(Some(2.0), 1.0), o(Some(4.0), 0.0), o(Some(6.0), 2.0), o(None, 5.0)];
        assert_eq!(score_opt(&batch), (Some(4.0), Fraction { num: 3, den: 4 }));
        assert_eq!(score_ps(&batch), Some(2.0));
        let (t, f) = score_opt(&[o(None, 0.0)]);
        assert_eq!((t, f.value()), (None, Some(0.0)));
    }

    #[test]
    fn gen_uses_canonical_keys() {
        let d = GridDesign::from_cells([(0, 0), (1, 0), (1, 1)]);
        assert_eq!(score_gen(&[d.clone()], &HashSet::new()).value(), Some(1.0));
        let seen = HashSet::from([canonical_key(&d.translated(3, 4)).unwrap()]);
        assert_eq!(score_gen(&[d], &seen).value(), Some(0.0));
    }

    #[test]
    fn promise_scores() {
        let uni = TaskSpec::new(Objective::Uni, Environment::FlatPlane);
        assert_eq!(promise_score(&uni, &track(&[0.0, 0.0])), 0.0);
        assert_eq!(promise_score(&uni, &track(&[1.0, 5.0, 13.0])), 12.0);
        let bf = TaskSpec {
            distance_req: Some(2.0),
            ..TaskSpec::new(Objective::BackForth, Environment::FlatPlane)
        };
        // out, back, then half way out again
        assert_eq!(promise_score(&bf, &track(&[0.0, 2.0, 1.0, 0.4, 1.0])), 5.0);
        // never finishes the first leg
        assert_eq!(promise_score(&bf, &track(&[0.0, 1.5, -1.0])), 0.0);
        // one leg, partway back
        assert_eq!(promise_score(&bf, &track(&[0.0, 3.0, 1.5])), 2.5);
    }

    #[test]
    fn all_illegal_batch() {
        let recs = vec![
            record(Objective::Uni, "nonsense", None),
            record(Objective::Uni, "robot with 2 blocks:\nblock b0 at origin.", None),
        ];
        let report = evaluate(&recs, &HashSet::new(), &Replay::new([])).unwrap();
        let uni = &report.tasks["uni"];
        assert_eq!(uni.sr, Some(0.0));
        assert_eq!((uni.if_, uni.ps, uni.opt, uni.gen), (None, None, None, None));
        assert_eq!(report.overall.counts.total, 2);
        assert_eq!(report.tasks["downstairs"].sr, None);
    }

    #[test]
    fn replay_composes_scorers() {
        let d = GridDesign::from_cells([(0, 0), (1, 0)]);
        let recs = vec![record(Objective::Uni, &serialize(&d).unwrap(), Some(3))];
        let replay = Replay::new([OutcomeRow {
            index: 0,
            completion_time: Some(3.5),
            ps: 7.25,
            failure: None,
        }]);
        let report = evaluate(&recs, &HashSet::new(), &replay).unwrap();
        let uni = &report.tasks["uni"];
        let spec = recs[0].task_spec();
        let outcome = [DesignOutcome { completion_time: Some(3.5), ps: 7.25 }];
        assert_eq!(uni.if_, score_if(&[(&spec, &d)]).unwrap().value());
        assert_eq!(uni.ps, score_ps(&outcome));
        assert_eq!(uni.opt, score_opt(&outcome).0);
        assert_eq!(uni.gen, score_gen(&[d], &HashSet::new()).value());
        assert_eq!(uni.sr, Some(1.0));
        assert_eq!(report.overall, *uni);
    }

    #[test]
    fn failures_are_quarantined() {
        let d = GridDesign::from_cells([(0, 0)]);
        let recs = vec![record(Objective::Uni, &serialize(&d).unwrap(), None)];
        let report = evaluate(&recs, &HashSet::new(), &Replay::new([])).unwrap();
        assert_eq!(report.details[0].failure.as_deref(), Some("no recorded outcome"));
        assert_eq!(report.overall.counts.failed, 1);
        assert_eq!(report.overall.ps, None);
        assert_eq!(report.overall.sr, Some(1.0));
    }

    #[test]
    fn mismatched_task_rejected() {
        let mut r = record(Objective::Uni, "x", None);
        r.environment = Environment::Stairs(Default::default());
        assert!(matches!(
            evaluate(&[r], &HashSet::new(), &Replay::new([])),
            Err(MetricError::Task { index: 0, .. })
        ));
    }
}
