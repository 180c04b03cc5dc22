use lhf::workload::{
    diff_digests, generate, parse, run_lhf, run_naive, serialize, GenParams, Instruction, Mode,
    RunOptions, Target,
};

const MODES: [Mode; 3] = [Mode::Claim1, Mode::Pessimistic, Mode::Optimistic];
const TARGETS: [Target; 2] = [Target::Scalar, Target::PointsTo];

fn tiny(mode: Mode, target: Target, ops: usize, seed: u64) -> GenParams {
    GenParams {
        max_value: 8 + seed % 40,
        max_size: 1 + (seed % 7) as usize,
        corpus_size: 4 + (seed % 9) as usize,
        grow_one_in: 1 + seed % 5,
        max_segment: 1 + (seed % 3) as usize,
        max_keys: (seed % 4) as usize,
        key_space: 4,
        max_pointees: 1 + (seed % 3) as usize,
        ..GenParams::new(mode, target, ops, seed)
    }
}

#[test]
fn generated_streams_round_trip() {
    for seed in 0..10_000u64 {
        let mode = MODES[(seed % 3) as usize];
        let target = TARGETS[((seed / 3) % 2) as usize];
        let w = generate(&tiny(mode, target, (seed % 25) as usize, seed)).unwrap();
        let text = serialize(&w);
        let back = parse(&text).unwrap();
        assert_eq!(back, w, "seed {seed}");
        assert_eq!(serialize(&back), text);
    }
}

#[test]
fn engines_agree_on_small_streams() {
    for seed in 0..600u64 {
        let mode = MODES[(seed % 3) as usize];
        let target = TARGETS[((seed / 3) % 2) as usize];
        let w = generate(&tiny(mode, target, 40, seed)).unwrap();
        let l = run_lhf(&w, RunOptions::default()).unwrap();
        let n = run_naive(&w, RunOptions::default()).unwrap();
        assert_eq!(diff_digests(&l.digest, &n.digest), None, "seed {seed}");
        assert_eq!(l.digest.len(), w.validate().unwrap());
        assert_eq!(l.distinct_results, n.distinct_results, "seed {seed}");
    }
}

#[test]
fn engines_agree_at_default_parameters() {
    for mode in MODES {
        for target in TARGETS {
            let w = generate(&GenParams::new(mode, target, 5_000, 11)).unwrap();
            let l = run_lhf(&w, RunOptions::default()).unwrap();
            let n = run_naive(&w, RunOptions::default()).unwrap();
            assert_eq!(diff_digests(&l.digest, &n.digest), None, "{mode} {target:?}");
        }
    }
}

#[test]
fn runs_are_reproducible() {
    let p = GenParams::new(Mode::Pessimistic, Target::PointsTo, 4_000, 5);
    let a = run_lhf(&generate(&p).unwrap(), RunOptions::default()).unwrap();
    let b = run_lhf(&generate(&p).unwrap(), RunOptions::default()).unwrap();
    assert_eq!(a.digest, b.digest);
    assert_eq!(a.stats, b.stats);
    assert_eq!(a.child_stats, b.child_stats);
    assert_eq!(a.sets_registered, b.sets_registered);
    assert_eq!(a.logical_units, b.logical_units);
}

#[test]
fn pessimistic_and_optimistic_grow() {
    for mode in [Mode::Pessimistic, Mode::Optimistic] {
        let w = generate(&GenParams::new(mode, Target::Scalar, 50_000, 2)).unwrap();
        let grows: Vec<usize> = w
            .instructions
            .iter()
            .filter_map(|i| match i {
                Instruction::Grow { len, .. } => Some(*len),
                _ => None,
            })
            .collect();
        assert!(!grows.is_empty());
        assert!(grows.iter().all(|&l| (1..=30).contains(&l)));
    }
}

#[test]
fn optimistic_registrations_grow_sublinearly() {
    let w = generate(&GenParams::new(Mode::Optimistic, Target::Scalar, 200_000, 1)).unwrap();
    let l = run_lhf(&w, RunOptions { track_growth: true }).unwrap();
    let g = &l.growth;
    assert_eq!(g.len(), 200_000);
    let half = g[g.len() / 2 - 1];
    let end = *g.last().unwrap();
    assert!(g.windows(2).all(|w| w[0] <= w[1]));
    assert!(end - half < half, "second half added {} sets, first half {half}", end - half);
}

#[test]
fn claim1_registers_more_than_it_reuses() {
    let w = generate(&GenParams::new(Mode::Claim1, Target::Scalar, 2_000, 3)).unwrap();
    let l = run_lhf(&w, RunOptions::default()).unwrap();
    let n = run_naive(&w, RunOptions::default()).unwrap();
    assert!(l.sets_registered > n.distinct_results);
}
