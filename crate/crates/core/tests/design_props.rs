use std::collections::{BTreeSet, HashSet, VecDeque};

use modbot::design::{
    bfs_augment, canonical_key, execute, parse, parse_design, sample_design, serialize, validate, GridDesign,
    ParseError, Reason,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_design(seed: u64) -> GridDesign {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = rng.gen_range(1..=6);
    let h = rng.gen_range(1..=6);
    let max = (w * h) as usize;
    let lo = rng.gen_range(1..=max);
    let hi = rng.gen_range(lo..=max);
    let d = sample_design((w, h), lo..=hi, seed).unwrap();
    let (dc, dr) = (rng.gen_range(-5..5), rng.gen_range(-5..5));
    d.translated(dc, dr)
}

fn normalized_set(cells: &BTreeSet<(i32, i32)>) -> BTreeSet<(i32, i32)> {
    let mc = cells.iter().map(|c| c.0).min().unwrap_or(0);
    let mr = cells.iter().map(|c| c.1).min().unwrap_or(0);
    cells.iter().map(|&(c, r)| (c - mc, r - mr)).collect()
}

fn flood_fill_connected(cells: &BTreeSet<(i32, i32)>) -> bool {
    let Some(&start) = cells.iter().next() else {
        return true;
    };
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([start]);
    seen.insert(start);
    while let Some((c, r)) = queue.pop_front() {
        for n in [(c + 1, r), (c - 1, r), (c, r + 1), (c, r - 1)] {
            if cells.contains(&n) && seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    seen.len() == cells.len()
}

#[test]
fn round_trip_on_random_designs() {
    for seed in 0..1000 {
        let d = random_design(seed);
        let text = serialize(&d).unwrap();
        let back = execute(&parse(&text).unwrap()).unwrap();
        assert_eq!(back, d.normalized(), "seed {seed}");
        assert_eq!(back.cells(), normalized_set(&d.cells()));
    }
}

#[test]
fn augmentation_closure() {
    for seed in 0..1000 {
        let d = random_design(seed);
        let key = canonical_key(&d).unwrap();
        let scripts = bfs_augment(&d, 4, seed ^ 0xABCD).unwrap();
        assert_eq!(scripts.len(), 4);
        for s in scripts {
            let text = s.to_string();
            assert_eq!(canonical_key(&parse_design(&text).unwrap()).unwrap(), key, "seed {seed}");
        }
    }
}

#[test]
fn canonical_key_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    // small designs so that equal pairs occur often
    let pool: Vec<GridDesign> = (0..1000)
        .map(|i| {
            let d = sample_design((3, 3), 1..=4, 5000 + i).unwrap();
            d.translated(rng.gen_range(-3..3), rng.gen_range(-3..3))
        })
        .collect();
    let keys: Vec<_> = pool.iter().map(|d| canonical_key(d).unwrap()).collect();
    let sets: Vec<_> = pool.iter().map(|d| normalized_set(&d.cells())).collect();
    let mut equal_pairs = 0;
    for i in 0..pool.len() {
        for j in (i + 1)..pool.len().min(i + 60) {
            let same = sets[i] == sets[j];
            assert_eq!(keys[i] == keys[j], same, "{i} vs {j}");
            equal_pairs += same as usize;
        }
    }
    assert!(equal_pairs > 100);
}

#[test]
fn key_examples() {
    let a = GridDesign::from_cells([(0, 0), (1, 0)]);
    let b = GridDesign::from_cells([(3, 2), (4, 2)]);
    let c = GridDesign::from_cells([(0, 0), (0, 1)]);
    assert_eq!(canonical_key(&a).unwrap(), canonical_key(&b).unwrap());
    assert_ne!(canonical_key(&a).unwrap(), canonical_key(&c).unwrap());
    let k = canonical_key(&a).unwrap();
    assert_eq!(modbot::design::CanonicalKey::from_hex(&k.to_hex()), Some(k));
}

#[test]
fn validate_agrees_with_flood_fill() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut disconnected = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=8);
        let cells: BTreeSet<(i32, i32)> = (0..n).map(|_| (rng.gen_range(0..4), rng.gen_range(0..4))).collect();
        let verdict = validate(&GridDesign::from_cells(cells.iter().copied()), None);
        let oracle = flood_fill_connected(&cells);
        assert_eq!(verdict.legal, oracle, "{cells:?}");
        assert_eq!(verdict.reasons.contains(&Reason::Disconnected), !oracle);
        disconnected += !oracle as usize;
    }
    assert!(disconnected > 100);
}

#[test]
fn validate_examples() {
    assert!(validate(&GridDesign::from_cells([(0, 0), (1, 0), (1, 1)]), None).legal);
    let v = validate(&GridDesign::from_cells([(0, 0), (2, 0)]), None);
    assert_eq!(v.reasons, vec![Reason::Disconnected]);
    let v = validate(&GridDesign::from_cells([]), None);
    assert_eq!(v.reasons, vec![Reason::Empty]);
    let row = GridDesign::from_cells((0..6).map(|c| (c, 0)));
    assert_eq!(validate(&row, Some((5, 5))).reasons, vec![Reason::ExceedsBound]);
    assert!(validate(&row, Some((6, 1))).legal);
}

/// Every script text reachable by breadth-first traversal over all roots and
/// all neighbor orderings at every expansion.
fn enumerate_bfs_scripts(cells: &BTreeSet<(i32, i32)>) -> HashSet<String> {
    const DIRS: [((i32, i32), &str); 4] = [((1, 0), "right"), ((0, 1), "top"), ((-1, 0), "left"), ((0, -1), "bottom")];
    fn perms(items: &[usize]) -> Vec<Vec<usize>> {
        if items.is_empty() {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for i in 0..items.len() {
            let mut rest = items.to_vec();
            let x = rest.remove(i);
            for mut p in perms(&rest) {
                p.insert(0, x);
                out.push(p);
            }
        }
        out
    }
    fn go(
        cells: &BTreeSet<(i32, i32)>,
        ids: Vec<((i32, i32), usize)>,
        queue: VecDeque<(i32, i32)>,
        lines: Vec<String>,
        out: &mut HashSet<String>,
    ) {
        let mut queue = queue;
        let Some(cell) = queue.pop_front() else {
            let mut text = format!("robot with {} blocks:\nblock b0 at origin.", cells.len());
            for l in &lines {
                text.push('\n');
                text.push_str(l);
            }
            out.insert(text);
            return;
        };
        let anchor = ids.iter().find(|(c, _)| *c == cell).unwrap().1;
        for order in perms(&[0, 1, 2, 3]) {
            let (mut ids, mut queue, mut lines) = (ids.clone(), queue.clone(), lines.clone());
            for d in order {
                let ((dc, dr), name) = DIRS[d];
                let next = (cell.0 + dc, cell.1 + dr);
                if cells.contains(&next) && !ids.iter().any(|(c, _)| *c == next) {
                    let id = ids.len();
                    ids.push((next, id));
                    queue.push_back(next);
                    lines.push(format!("attach block b{id} to the {name} of block b{anchor}."));
                }
            }
            go(cells, ids, queue, lines, out);
        }
    }
    let mut out = HashSet::new();
    for &root in cells {
        go(cells, vec![(root, 0)], VecDeque::from([root]), Vec::new(), &mut out);
    }
    out
}

#[test]
fn l_tromino_orders_match_enumeration() {
    let cells: BTreeSet<_> = [(0, 0), (1, 0), (0, 1)].into_iter().collect();
    let oracle = enumerate_bfs_scripts(&cells);
    let d = GridDesign::from_cells(cells.iter().copied());
    let sampled: HashSet<String> = bfs_augment(&d, 2000, 3).unwrap().iter().map(|s| s.to_string()).collect();
    assert_eq!(sampled, oracle);
    assert_eq!(oracle.len(), 4);
}

#[test]
fn larger_shape_orders_match_enumeration() {
    let cells: BTreeSet<_> = [(0, 0), (1, 0), (2, 0), (1, 1)].into_iter().collect();
    let oracle = enumerate_bfs_scripts(&cells);
    let d = GridDesign::from_cells(cells.iter().copied());
    let sampled: HashSet<String> = bfs_augment(&d, 5000, 11).unwrap().iter().map(|s| s.to_string()).collect();
    assert_eq!(sampled, oracle);
}

#[test]
fn single_block_augment() {
    let d = GridDesign::from_cells([(2, 2)]);
    let scripts = bfs_augment(&d, 3, 0).unwrap();
    assert_eq!(scripts.len(), 3);
    assert!(scripts.iter().all(|s| s.to_string() == "robot with 1 blocks:\nblock b0 at origin."));
}

#[test]
fn sampler_stays_in_grid() {
    for seed in 0..3000 {
        let d = sample_design((5, 5), 3..=25, seed).unwrap();
        assert!(validate(&d, Some((5, 5))).legal);
        assert!((3..=25).contains(&d.block_count()));
        assert_eq!(d.bounds().unwrap().0, (0, 0));
    }
    assert_eq!(sample_design((1, 1), 1..=1, 4).unwrap().cells(), BTreeSet::from([(0, 0)]));
    assert_eq!(sample_design((5, 5), 3..=9, 17).unwrap(), sample_design((5, 5), 3..=9, 17).unwrap());
    assert!(sample_design((2, 2), 3..=5, 0).is_err());
}

#[test]
fn parse_tolerance_and_errors() {
    let loose = "  ROBOT with 2 Blocks:  \n\nBlock b0 at Origin\n attach   block b1 to the RIGHT of block b0 ;\n";
    assert_eq!(parse_design(loose).unwrap().cells(), BTreeSet::from([(0, 0), (1, 0)]));
    let overlap = "robot with 3 blocks:\nblock b0 at origin.\nattach block b1 to the right of block b0.\nattach block b2 to the right of block b0.";
    assert!(matches!(parse(overlap), Err(ParseError::Overlap { line: 4, .. })));
    let count = "robot with 3 blocks:\nblock b0 at origin.\nattach block b1 to the top of block b0.";
    assert!(matches!(parse(count), Err(ParseError::CountMismatch { declared: 3, placed: 2 })));
    assert!(matches!(parse("robot with 1 blocks:\nblock b0 sideways."), Err(ParseError::Syntax { line: 2, .. })));
}

proptest! {
    #[test]
    fn parse_never_panics(text in "\\PC{0,200}") {
        let _ = parse(&text);
    }

    #[test]
    fn translation_congruence(seed in 0u64..10_000, dc in -50i32..50, dr in -50i32..50) {
        let d = random_design(seed);
        prop_assert_eq!(canonical_key(&d).unwrap(), canonical_key(&d.translated(dc, dr)).unwrap());
    }
}
