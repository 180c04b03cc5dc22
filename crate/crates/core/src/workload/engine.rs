//! The two engines that execute instruction streams, and the digest files
//! used to compare them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::Hasher;
use std::io::{self, BufRead, Write};
use std::time::{Duration, Instant};

use fnv::FnvHasher;
use rustc_hash::{FxHashMap, FxHashSet};

use super::format::{Instruction, Target, Workload};
use super::WorkloadError;
use crate::forest::{Index, OpKind};
use crate::nesting::{Construction, ForestId, NestedElement, NestingConfig, OpSet};
use crate::stats::OpStats;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EngineKind {
    Lhf,
    Naive,
}

impl EngineKind {
    pub fn name(self) -> &'static str {
        match self {
            EngineKind::Lhf => "lhf",
            EngineKind::Naive => "naive",
        }
    }
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Content hash of one corpus entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DigestEntry {
    pub pos: usize,
    pub hash: u64,
}

/// Calls and cumulative time for one instruction kind.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct KindTiming {
    pub invocations: u64,
    pub nanos: u64,
}

impl KindTiming {
    fn record(&mut self, start: Instant) {
        self.invocations += 1;
        self.nanos += start.elapsed().as_nanos() as u64;
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Record the registered-set count after every `OP`.
    pub track_growth: bool,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub engine: EngineKind,
    pub target: Option<Target>,
    pub ops: usize,
    pub digest: Vec<DigestEntry>,
    pub union: KindTiming,
    pub intersection: KindTiming,
    pub difference: KindTiming,
    pub register: KindTiming,
    /// Counters of the forest the stream operates on (lhf only).
    pub stats: Option<OpStats>,
    /// Counters of the pointee forest in points-to runs (lhf only).
    pub child_stats: Option<OpStats>,
    /// Sets held by the engine: interned sets for lhf, materialized sets
    /// for naive.
    pub sets_registered: u64,
    pub memo_entries: u64,
    /// Logical memory in elements. For lhf: stored elements plus operation
    /// and subset map entries. For naive: every element ever materialized.
    pub logical_units: u64,
    /// Distinct contents among `OP` results.
    pub distinct_results: u64,
    /// Registered-set count after each `OP`, when tracked.
    pub growth: Vec<u64>,
    pub wall: Duration,
}

impl RunOutcome {
    fn new(engine: EngineKind, target: Option<Target>, ops: usize) -> Self {
        Self {
            engine,
            target,
            ops,
            digest: Vec::new(),
            union: KindTiming::default(),
            intersection: KindTiming::default(),
            difference: KindTiming::default(),
            register: KindTiming::default(),
            stats: None,
            child_stats: None,
            sets_registered: 0,
            memo_entries: 0,
            logical_units: 0,
            distinct_results: 0,
            growth: Vec::new(),
            wall: Duration::ZERO,
        }
    }

    pub fn timing(&self, kind: OpKind) -> KindTiming {
        match kind {
            OpKind::Union => self.union,
            OpKind::Intersection => self.intersection,
            OpKind::Difference => self.difference,
            _ => KindTiming::default(),
        }
    }

    fn timing_mut(&mut self, kind: OpKind) -> &mut KindTiming {
        match kind {
            OpKind::Union => &mut self.union,
            OpKind::Intersection => &mut self.intersection,
            OpKind::Difference => &mut self.difference,
            other => unreachable!("{other} is not a stream operation"),
        }
    }

    /// Cumulative time spent in set operations and registrations.
    pub fn operation_nanos(&self) -> u64 {
        self.union.nanos + self.intersection.nanos + self.difference.nanos + self.register.nanos
    }
}

pub fn content_hash_flat<I>(elements: I) -> u64
where
    I: ExactSizeIterator<Item = u64>,
{
    let mut h = FnvHasher::default();
    hash_list(&mut h, elements);
    h.finish()
}

/// Hash of a points-to set given as `(key, pointees)` pairs in key order.
pub fn content_hash_nested<I, J>(pairs: I) -> u64
where
    I: ExactSizeIterator<Item = (u64, J)>,
    J: ExactSizeIterator<Item = u64>,
{
    let mut h = FnvHasher::default();
    h.write_u64(pairs.len() as u64);
    for (key, pointees) in pairs {
        h.write_u64(key);
        hash_list(&mut h, pointees);
    }
    h.finish()
}

fn hash_list(h: &mut FnvHasher, items: impl ExactSizeIterator<Item = u64>) {
    h.write_u64(items.len() as u64);
    for x in items {
        h.write(&x.to_le_bytes());
    }
}

pub fn write_digest<W: Write>(out: &mut W, digest: &[DigestEntry]) -> io::Result<()> {
    for e in digest {
        writeln!(out, "{} {:016x}", e.pos, e.hash)?;
    }
    Ok(())
}

pub fn read_digest<R: BufRead>(input: R) -> Result<Vec<DigestEntry>, WorkloadError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let err = |message: String| WorkloadError::Parse {
            line: i + 1,
            message,
        };
        let line = line.map_err(|e| err(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let (Some(pos), Some(hash), None) = (it.next(), it.next(), it.next()) else {
            return Err(err(format!("expected `pos hash`, found `{line}`")));
        };
        out.push(DigestEntry {
            pos: pos.parse().map_err(|_| err(format!("bad position `{pos}`")))?,
            hash: u64::from_str_radix(hash, 16).map_err(|_| err(format!("bad hash `{hash}`")))?,
        });
    }
    Ok(out)
}

/// Position of the first entry where the digests disagree, or where one
/// ends before the other.
pub fn diff_digests(a: &[DigestEntry], b: &[DigestEntry]) -> Option<usize> {
    for (x, y) in a.iter().zip(b) {
        if x != y {
            return Some(x.pos.min(y.pos));
        }
    }
    match a.len().cmp(&b.len()) {
        std::cmp::Ordering::Equal => None,
        std::cmp::Ordering::Less => Some(b[a.len()].pos),
        std::cmp::Ordering::Greater => Some(a[b.len()].pos),
    }
}

/// Start position of each instruction's output and the final corpus length.
fn layout(workload: &Workload) -> (Vec<usize>, usize) {
    let mut starts = Vec::with_capacity(workload.instructions.len());
    let mut len = 0;
    for inst in &workload.instructions {
        starts.push(len);
        len += match inst {
            Instruction::Grow { len, .. } => *len,
            _ => 1,
        };
    }
    (starts, len)
}

fn record_growth(outcome: &mut RunOutcome, options: RunOptions, count: u64) {
    if options.track_growth {
        outcome.growth.push(count);
    }
}

/// Executes `workload` on forests, one per target.
pub fn run_lhf(workload: &Workload, options: RunOptions) -> Result<RunOutcome, WorkloadError> {
    workload.validate()?;
    let target = workload.target();
    let mut out = RunOutcome::new(EngineKind::Lhf, target, workload.op_count());
    let started = Instant::now();

    let mut c = Construction::new();
    let pointees = c.add_flat(OpSet::all());
    let pts = c.add_nested(OpSet::all(), &[pointees], NestingConfig::default())?;
    let top = if target == Some(Target::PointsTo) { pts } else { pointees };
    let registered = |c: &Construction| c.count(pointees).unwrap() + c.count(pts).unwrap() - 1;

    let (_, total) = layout(workload);
    let mut corpus: Vec<Index> = Vec::with_capacity(total);
    let mut results = FxHashSet::default();
    for inst in &workload.instructions {
        match inst {
            Instruction::Reg(elements) => {
                let t = Instant::now();
                let id = c.register_flat(pointees, elements.clone())?;
                out.register.record(t);
                corpus.push(id);
            }
            Instruction::RegPt(pairs) => {
                let t = Instant::now();
                let mut elements = Vec::with_capacity(pairs.len());
                for (key, targets) in pairs {
                    let child = c.register_flat(pointees, targets.clone())?;
                    elements.push(NestedElement::new(*key, &[child]));
                }
                let id = c.register_nested(pts, elements)?;
                out.register.record(t);
                corpus.push(id);
            }
            Instruction::Op { kind, lhs, rhs } => {
                let (a, b) = (corpus[*lhs], corpus[*rhs]);
                let t = Instant::now();
                let r = c.operate(top, *kind, a, b)?;
                out.timing_mut(*kind).record(t);
                corpus.push(r);
                results.insert(r);
                record_growth(&mut out, options, registered(&c));
            }
            Instruction::Grow { src, len } => corpus.extend_from_within(*src..*src + *len),
        }
    }
    out.wall = started.elapsed();

    out.stats = Some(c.stats(top)?);
    if target == Some(Target::PointsTo) {
        out.child_stats = Some(c.stats(pointees)?);
    }
    out.sets_registered = registered(&c);
    out.memo_entries = (c.memo_entries(pointees)? + c.memo_entries(pts)?) as u64;
    out.logical_units =
        c.stored_elements(pointees)? + c.stored_elements(pts)? + out.memo_entries;
    out.distinct_results = results.len() as u64;
    out.digest = lhf_digest(&c, top, pointees, target, &corpus)?;
    Ok(out)
}

fn lhf_digest(
    c: &Construction,
    top: ForestId,
    pointees: ForestId,
    target: Option<Target>,
    corpus: &[Index],
) -> Result<Vec<DigestEntry>, WorkloadError> {
    let flat = c.flat(pointees)?;
    let mut cache: FxHashMap<Index, u64> = FxHashMap::default();
    let mut digest = Vec::with_capacity(corpus.len());
    for (pos, &id) in corpus.iter().enumerate() {
        let hash = match cache.get(&id) {
            Some(&h) => h,
            None => {
                let h = if target == Some(Target::PointsTo) {
                    let set = c.nested(top)?.forest().resolve(id)?;
                    let mut pairs = Vec::with_capacity(set.len());
                    for e in set.iter() {
                        pairs.push((e.key, flat.resolve(e.children[0])?));
                    }
                    content_hash_nested(pairs.into_iter().map(|(k, s)| (k, s.iter().copied())))
                } else {
                    content_hash_flat(flat.resolve(id)?.iter().copied())
                };
                cache.insert(id, h);
                h
            }
        };
        digest.push(DigestEntry { pos, hash });
    }
    Ok(digest)
}

type PointsTo = BTreeMap<u64, BTreeSet<u64>>;

/// Ordered-container values for the naive engine.
trait NaiveValue: Clone {
    fn operate(kind: OpKind, a: &Self, b: &Self) -> Self;
    fn content_hash(&self) -> u64;
    fn units(&self) -> u64;
}

fn set_op(kind: OpKind, a: &BTreeSet<u64>, b: &BTreeSet<u64>) -> BTreeSet<u64> {
    match kind {
        OpKind::Union => a.union(b).copied().collect(),
        OpKind::Intersection => a.intersection(b).copied().collect(),
        OpKind::Difference => a.difference(b).copied().collect(),
        other => unreachable!("{other} is not a stream operation"),
    }
}

impl NaiveValue for BTreeSet<u64> {
    fn operate(kind: OpKind, a: &Self, b: &Self) -> Self {
        set_op(kind, a, b)
    }

    fn content_hash(&self) -> u64 {
        content_hash_flat(self.iter().copied())
    }

    fn units(&self) -> u64 {
        self.len() as u64
    }
}

impl NaiveValue for PointsTo {
    fn operate(kind: OpKind, a: &Self, b: &Self) -> Self {
        let mut out = PointsTo::new();
        match kind {
            OpKind::Union => {
                for (k, pa) in a {
                    let v = match b.get(k) {
                        Some(pb) => pa.union(pb).copied().collect(),
                        None => pa.clone(),
                    };
                    out.insert(*k, v);
                }
                for (k, pb) in b {
                    out.entry(*k).or_insert_with(|| pb.clone());
                }
            }
            OpKind::Intersection => {
                for (k, pa) in a {
                    if let Some(pb) = b.get(k) {
                        let v: BTreeSet<u64> = pa.intersection(pb).copied().collect();
                        if !v.is_empty() {
                            out.insert(*k, v);
                        }
                    }
                }
            }
            OpKind::Difference => {
                for (k, pa) in a {
                    let v = match b.get(k) {
                        Some(pb) => pa.difference(pb).copied().collect(),
                        None => pa.clone(),
                    };
                    if !v.is_empty() {
                        out.insert(*k, v);
                    }
                }
            }
            other => unreachable!("{other} is not a stream operation"),
        }
        out
    }

    fn content_hash(&self) -> u64 {
        content_hash_nested(self.iter().map(|(k, p)| (*k, p.iter().copied())))
    }

    fn units(&self) -> u64 {
        self.values().map(|p| 1 + p.len() as u64).sum()
    }
}

/// Executes `workload` with ordered sets and maps, materializing every
/// result. Entries that no later instruction reads are hashed and dropped.
pub fn run_naive(workload: &Workload, options: RunOptions) -> Result<RunOutcome, WorkloadError> {
    workload.validate()?;
    match workload.target() {
        Some(Target::PointsTo) => naive::<PointsTo>(workload, options, |inst| match inst {
            Instruction::RegPt(pairs) => pairs
                .iter()
                .map(|(k, p)| (*k, p.iter().copied().collect()))
                .collect(),
            _ => unreachable!("validated stream"),
        }),
        _ => naive::<BTreeSet<u64>>(workload, options, |inst| match inst {
            Instruction::Reg(elements) => elements.iter().copied().collect(),
            _ => unreachable!("validated stream"),
        }),
    }
}

fn naive<V: NaiveValue>(
    workload: &Workload,
    options: RunOptions,
    build: impl Fn(&Instruction) -> V,
) -> Result<RunOutcome, WorkloadError> {
    let mut out = RunOutcome::new(EngineKind::Naive, workload.target(), workload.op_count());
    let (starts, total) = layout(workload);

    let mut needed = vec![false; total];
    for (inst, &first) in workload.instructions.iter().zip(&starts).rev() {
        match *inst {
            Instruction::Op { lhs, rhs, .. } => {
                needed[lhs] = true;
                needed[rhs] = true;
            }
            Instruction::Grow { src, len } => {
                for k in 0..len {
                    if needed[first + k] {
                        needed[src + k] = true;
                    }
                }
            }
            _ => {}
        }
    }

    let started = Instant::now();
    let mut values: Vec<Option<V>> = Vec::with_capacity(total);
    let mut hashes: Vec<u64> = Vec::with_capacity(total);
    let mut results = FxHashSet::default();
    for inst in &workload.instructions {
        match inst {
            Instruction::Reg(_) | Instruction::RegPt(_) => {
                let t = Instant::now();
                let v = build(inst);
                out.register.record(t);
                out.sets_registered += 1;
                out.logical_units += v.units();
                hashes.push(v.content_hash());
                let keep = needed[values.len()];
                values.push(keep.then_some(v));
            }
            Instruction::Op { kind, lhs, rhs } => {
                let (a, b) = match (&values[*lhs], &values[*rhs]) {
                    (Some(a), Some(b)) => (a, b),
                    _ => unreachable!("operands are retained"),
                };
                let t = Instant::now();
                let v = V::operate(*kind, a, b);
                out.timing_mut(*kind).record(t);
                out.sets_registered += 1;
                out.logical_units += v.units();
                let h = v.content_hash();
                hashes.push(h);
                results.insert(h);
                let keep = needed[values.len()];
                values.push(keep.then_some(v));
                let count = out.sets_registered;
                record_growth(&mut out, options, count);
            }
            Instruction::Grow { src, len } => {
                for k in *src..*src + *len {
                    let copy = if needed[values.len()] {
                        let v = values[k].clone().expect("grow sources are retained");
                        out.sets_registered += 1;
                        out.logical_units += v.units();
                        Some(v)
                    } else {
                        None
                    };
                    hashes.push(hashes[k]);
                    values.push(copy);
                }
            }
        }
    }
    out.wall = started.elapsed();
    out.distinct_results = results.len() as u64;
    out.digest = hashes
        .into_iter()
        .enumerate()
        .map(|(pos, hash)| DigestEntry { pos, hash })
        .collect();
    Ok(out)
}
