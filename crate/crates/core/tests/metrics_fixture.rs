use std::collections::HashSet;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use modbot::datagen::DatasetRecord;
use modbot::design::{bfs_augment, canonical_key, parse_design};
use modbot::io::read_jsonl;
use modbot::metrics::{evaluate, score_gen, GenerationRecord, OutcomeRow, Replay};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn rows<T: serde::de::DeserializeOwned>(name: &str) -> Vec<T> {
    read_jsonl(BufReader::new(File::open(fixture(name)).unwrap())).unwrap().1
}

fn load() -> (Vec<GenerationRecord>, HashSet<modbot::design::CanonicalKey>, Replay) {
    let gens: Vec<GenerationRecord> = rows("generations.jsonl");
    let training: Vec<DatasetRecord> = rows("training.jsonl");
    let outcomes: Vec<OutcomeRow> = rows("outcomes.jsonl");
    (gens, training.into_iter().map(|r| r.canonical_key).collect(), Replay::new(outcomes))
}

#[test]
fn hand_labeled_fixture() {
    let (gens, keys, replay) = load();
    assert_eq!(gens.len(), 20);
    let report = evaluate(&gens, &keys, &replay).unwrap();
    // 3 of 20 scripts are broken: bad syntax, dangling reference, overlap
    assert_eq!(report.overall.sr, Some(0.85));
    let illegal: Vec<usize> = report.details.iter().filter(|d| !d.legal).map(|d| d.index).collect();
    assert_eq!(illegal, vec![15, 17, 19]);
    let uni = &report.tasks["uni"];
    assert_eq!((uni.counts.constrained, uni.counts.compliant), (10, 7));
    assert_eq!(uni.if_, Some(0.7));
    assert_eq!(uni.counts.unseen, 8);
    assert_eq!(uni.gen, Some(0.8));
    let bf = &report.tasks["back_forth"];
    assert_eq!((bf.opt, bf.opt_completion_fraction), (Some(4.0), Some(0.75)));
    for t in report.tasks.values().chain([&report.overall]) {
        for v in [t.if_, t.gen, t.sr, t.opt_completion_fraction].into_iter().flatten() {
            assert!((0.0..=1.0).contains(&v));
        }
        assert!(t.counts.constrained <= t.counts.legal && t.counts.simulated <= t.counts.legal);
    }
}

#[test]
fn evaluation_is_repeatable() {
    let (gens, keys, replay) = load();
    assert_eq!(evaluate(&gens, &keys, &replay).unwrap(), evaluate(&gens, &keys, &replay).unwrap());
}

#[test]
fn gen_ignores_assembly_order() {
    let training: Vec<DatasetRecord> = rows("training.jsonl");
    let keys: HashSet<_> = training.iter().map(|r| r.canonical_key.clone()).collect();
    let reordered: Vec<_> = training
        .iter()
        .map(|r| {
            let d = parse_design(&r.design_text).unwrap();
            let s = bfs_augment(&d, 1, r.id as u64).unwrap().remove(0);
            parse_design(&s.to_string()).unwrap()
        })
        .collect();
    assert_eq!(score_gen(&reordered, &keys).value(), Some(0.0));
    for r in &training {
        assert_eq!(canonical_key(&parse_design(&r.design_text).unwrap()).unwrap(), r.canonical_key);
    }
}

#[test]
fn report_schema() {
    let text = std::fs::read_to_string(fixture("report.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["header", "ps_definition", "tasks", "overall", "details"]);
    let tasks: Vec<&str> = v["tasks"].as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(tasks, ["back_forth", "downstairs", "uni"]);
    for block in v["tasks"].as_object().unwrap().values().chain([&v["overall"]]) {
        let fields: Vec<&str> = block.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(fields, ["if", "ps", "opt", "opt_completion_fraction", "gen", "sr", "counts"]);
    }
    assert_eq!(v["tasks"]["uni"]["opt"].is_number(), true);
    assert!(v["tasks"]["back_forth"]["if"].is_null());
}
