use std::collections::{BTreeMap, BTreeSet};

use lhf::pointsto::{Cfg, PtaConstruction, BRANCH_JOIN_CFG};
use lhf::Index;
use proptest::prelude::*;

type Facts = BTreeMap<String, BTreeSet<String>>;

#[derive(Clone, Debug)]
enum S {
    AddrOf(usize, usize),
    Copy(usize, usize),
    Load(usize, usize),
    Store(usize, usize),
}

const VARS: [&str; 5] = ["p", "q", "r", "x", "y"];

fn render(s: &S) -> String {
    match *s {
        S::AddrOf(a, b) => format!("{} = &{}", VARS[a], VARS[b]),
        S::Copy(a, b) => format!("{} = {}", VARS[a], VARS[b]),
        S::Load(a, b) => format!("{} = *{}", VARS[a], VARS[b]),
        S::Store(a, b) => format!("*{} = {}", VARS[a], VARS[b]),
    }
}

fn set(f: &mut Facts, p: &str, v: BTreeSet<String>) {
    if v.is_empty() {
        f.remove(p);
    } else {
        f.insert(p.to_string(), v);
    }
}

fn get(f: &Facts, p: &str) -> BTreeSet<String> {
    f.get(p).cloned().unwrap_or_default()
}

fn naive_transfer(s: &S, f: &mut Facts) {
    match *s {
        S::AddrOf(a, b) => set(f, VARS[a], [VARS[b].to_string()].into()),
        S::Copy(a, b) => {
            let v = get(f, VARS[b]);
            set(f, VARS[a], v);
        }
        S::Load(a, b) => {
            let mut v = BTreeSet::new();
            for r in get(f, VARS[b]) {
                v.extend(get(f, &r));
            }
            set(f, VARS[a], v);
        }
        S::Store(a, b) => {
            let targets = get(f, VARS[a]);
            let v = get(f, VARS[b]);
            if targets.len() == 1 {
                set(f, targets.first().unwrap(), v);
            } else {
                for r in targets {
                    let mut merged = get(f, &r);
                    merged.extend(v.iter().cloned());
                    set(f, &r, merged);
                }
            }
        }
    }
}

/// Round-robin iteration over map-based facts until nothing changes.
fn naive_analyze(blocks: &[Vec<S>], edges: &[(usize, usize)]) -> Vec<(Facts, Facts)> {
    let n = blocks.len();
    let mut state = vec![(Facts::new(), Facts::new()); n];
    loop {
        let mut changed = false;
        for b in 0..n {
            let mut input = Facts::new();
            for &(from, to) in edges {
                if to == b {
                    for (k, v) in &state[from].1 {
                        input.entry(k.clone()).or_default().extend(v.iter().cloned());
                    }
                }
            }
            let mut out = input.clone();
            for s in &blocks[b] {
                naive_transfer(s, &mut out);
            }
            if state[b] != (input.clone(), out.clone()) {
                state[b] = (input, out);
                changed = true;
            }
        }
        if !changed {
            return state;
        }
    }
}

fn facts(pta: &PtaConstruction, pts: Index) -> Facts {
    let mut f = Facts::new();
    for p in pta.pointers(pts).unwrap() {
        let pointees = pta.pointee_vars(pta.pointees_of(pts, p).unwrap()).unwrap();
        f.insert(
            pta.name(p).to_string(),
            pointees.into_iter().map(|v| pta.name(v).to_string()).collect(),
        );
    }
    f
}

fn program() -> impl Strategy<Value = (Vec<Vec<S>>, Vec<(usize, usize)>)> {
    let stmt = (0usize..4, 0usize..5, 0usize..5).prop_map(|(k, a, b)| match k {
        0 => S::AddrOf(a, b),
        1 => S::Copy(a, b),
        2 => S::Load(a, b),
        _ => S::Store(a, b),
    });
    (1usize..7).prop_flat_map(move |n| {
        let blocks = prop::collection::vec(prop::collection::vec(stmt.clone(), 0..4), n);
        let extra = prop::collection::vec((0..n, 0..n), 0..n + 2);
        (blocks, extra).prop_map(move |(blocks, extra)| {
            let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
            edges.extend(extra);
            (blocks, edges)
        })
    })
}

fn cfg_text(blocks: &[Vec<S>], edges: &[(usize, usize)]) -> String {
    let mut t = String::new();
    for (i, b) in blocks.iter().enumerate() {
        t.push_str(&format!("block b{i}\n"));
        for s in b {
            t.push_str(&format!("  {}\n", render(s)));
        }
    }
    for (f, to) in edges {
        t.push_str(&format!("edge b{f} -> b{to}\n"));
    }
    t
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn fixed_point_matches_naive_dataflow((blocks, edges) in program()) {
        let mut pta = PtaConstruction::new();
        let cfg = Cfg::parse(&cfg_text(&blocks, &edges), &mut pta).unwrap();
        let result = pta.analyze(&cfg).unwrap();
        let expected = naive_analyze(&blocks, &edges);
        for b in 0..blocks.len() {
            prop_assert_eq!(facts(&pta, result.inputs[b]), expected[b].0.clone(), "block b{} in", b);
            prop_assert_eq!(facts(&pta, result.outputs[b]), expected[b].1.clone(), "block b{} out", b);
        }
    }
}

#[test]
fn branch_join_reaches_union_at_the_join() {
    let mut pta = PtaConstruction::new();
    let cfg = Cfg::parse(BRANCH_JOIN_CFG, &mut pta).unwrap();
    let r = pta.analyze(&cfg).unwrap();
    let b4 = cfg.block("block4").unwrap();
    let expected: Facts = [("p1".to_string(), ["a".to_string(), "b".to_string()].into())].into();
    assert_eq!(facts(&pta, r.inputs[b4]), expected);
    assert_eq!(facts(&pta, r.outputs[b4]), expected);
}

#[test]
fn loop_converges_within_bound() {
    let text = "block b1\n  p = &a\nblock b2\n  q = p\nblock b3\n  p = &b\nblock b4\n\
                edge b1 -> b2\nedge b2 -> b3\nedge b3 -> b2\nedge b2 -> b4\n";
    let mut pta = PtaConstruction::new();
    let cfg = Cfg::parse(text, &mut pta).unwrap();
    let r = pta.analyze(&cfg).unwrap();
    assert!(r.evaluations <= 4 * 4, "{} evaluations", r.evaluations);
    let b4 = cfg.block("b4").unwrap();
    assert_eq!(pta.describe(r.inputs[b4]).unwrap(), "p -> {a, b}, q -> {a, b}");
    // rerunning on the same construction reproduces the same indices
    let again = pta.analyze(&cfg).unwrap();
    assert_eq!(again.inputs, r.inputs);
    assert_eq!(again.outputs, r.outputs);
}
