//! Seeded workload generators.
//!
//! Every random decision site draws from its own ChaCha8 stream (same seed,
//! distinct stream number), so adding draws at one site never shifts the
//! values drawn at another. Bounded draws are `next_u64() % bound`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::format::{Instruction, Target, Workload};
use super::WorkloadError;
use crate::forest::OpKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Fresh random data before every operation: no closed world.
    Claim1,
    /// Fixed random corpus, random operations, occasional corpus growth.
    Pessimistic,
    /// Corpus drawn from a small pool of sets, operations drawn from a
    /// sampled operation corpus.
    Optimistic,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Claim1 => "claim1",
            Mode::Pessimistic => "pessimistic",
            Mode::Optimistic => "optimistic",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = WorkloadError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "claim1" => Ok(Mode::Claim1),
            "pessimistic" => Ok(Mode::Pessimistic),
            "optimistic" => Ok(Mode::Optimistic),
            other => Err(WorkloadError::Params(format!("unknown mode `{other}`"))),
        }
    }
}

impl FromStr for Target {
    type Err = WorkloadError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "scalar" => Ok(Target::Scalar),
            "pointsto" => Ok(Target::PointsTo),
            other => Err(WorkloadError::Params(format!("unknown target `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenParams {
    pub mode: Mode,
    pub target: Target,
    /// Largest element value (inclusive).
    pub max_value: u64,
    /// Largest scalar set size (inclusive).
    pub max_size: usize,
    /// Initial data cells for the corpus-based modes.
    pub corpus_size: usize,
    /// Number of `OP` instructions to emit.
    pub op_count: usize,
    pub seed: u64,
    /// A `GROW` is emitted before an operation with probability `1 / grow_one_in`.
    pub grow_one_in: u64,
    /// Longest `GROW` segment.
    pub max_segment: usize,
    /// Most pointers in one points-to set.
    pub max_keys: usize,
    /// Pointer keys are drawn from `0 .. key_space`.
    pub key_space: u64,
    /// Largest pointee set (at least one pointee per pointer).
    pub max_pointees: usize,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            mode: Mode::Claim1,
            target: Target::Scalar,
            max_value: 10_000,
            max_size: 200,
            corpus_size: 300,
            op_count: 0,
            seed: 0,
            grow_one_in: 1000,
            max_segment: 30,
            max_keys: 16,
            key_space: 64,
            max_pointees: 20,
        }
    }
}

impl GenParams {
    pub fn new(mode: Mode, target: Target, op_count: usize, seed: u64) -> Self {
        Self {
            mode,
            target,
            op_count,
            seed,
            ..Self::default()
        }
    }

    fn check(&self) -> Result<(), WorkloadError> {
        let bad = |m: &str| Err(WorkloadError::Params(m.to_string()));
        if self.max_size == 0 || self.corpus_size == 0 || self.max_value == 0 {
            return bad("max-value, max-size and corpus size must be positive");
        }
        if self.max_size as u64 > self.max_value + 1 || self.max_pointees as u64 > self.max_value + 1 {
            return bad("set sizes cannot exceed the number of distinct values");
        }
        if self.mode == Mode::Optimistic && self.corpus_size < 4 {
            return bad("optimistic mode needs a corpus of at least 4 cells");
        }
        if self.grow_one_in == 0 || self.max_segment == 0 {
            return bad("growth parameters must be positive");
        }
        if self.target == Target::PointsTo
            && (self.max_pointees == 0 || self.max_keys as u64 > self.key_space)
        {
            return bad("points-to sets need max-pointees >= 1 and max-keys <= key-space");
        }
        Ok(())
    }

    fn header(&self) -> String {
        format!(
            "# lhf-workload mode={} target={} ops={} seed={} max-value={} max-size={} corpus={} grow-one-in={} max-segment={}",
            self.mode,
            self.target.name(),
            self.op_count,
            self.seed,
            self.max_value,
            self.max_size,
            self.corpus_size,
            self.grow_one_in,
            self.max_segment
        )
    }
}

struct Streams {
    sizes: ChaCha8Rng,
    values: ChaCha8Rng,
    positions: ChaCha8Rng,
    kinds: ChaCha8Rng,
    grow: ChaCha8Rng,
    keys: ChaCha8Rng,
    picks: ChaCha8Rng,
}

impl Streams {
    fn new(seed: u64) -> Self {
        let stream = |n: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(n);
            rng
        };
        Self {
            sizes: stream(1),
            values: stream(2),
            positions: stream(3),
            kinds: stream(4),
            grow: stream(5),
            keys: stream(6),
            picks: stream(7),
        }
    }
}

fn below(rng: &mut ChaCha8Rng, bound: u64) -> u64 {
    rng.next_u64() % bound
}

fn pick<T: Copy>(rng: &mut ChaCha8Rng, items: &[T]) -> T {
    items[below(rng, items.len() as u64) as usize]
}

fn kind(rng: &mut ChaCha8Rng) -> OpKind {
    OpKind::BINARY[below(rng, 3) as usize]
}

struct Builder<'p> {
    p: &'p GenParams,
    rng: Streams,
    out: Vec<Instruction>,
    len: usize,
}

impl<'p> Builder<'p> {
    fn distinct_values(&mut self, size: usize) -> Vec<u64> {
        let mut set = BTreeSet::new();
        while set.len() < size {
            set.insert(below(&mut self.rng.values, self.p.max_value + 1));
        }
        set.into_iter().collect()
    }

    fn random_set(&mut self) -> Instruction {
        match self.p.target {
            Target::Scalar => {
                let size = below(&mut self.rng.sizes, self.p.max_size as u64 + 1) as usize;
                Instruction::Reg(self.distinct_values(size))
            }
            Target::PointsTo => {
                let nkeys = below(&mut self.rng.sizes, self.p.max_keys as u64 + 1) as usize;
                let mut keys = BTreeSet::new();
                while keys.len() < nkeys {
                    keys.insert(below(&mut self.rng.keys, self.p.key_space));
                }
                let pairs = keys
                    .into_iter()
                    .map(|k| {
                        let m = 1 + below(&mut self.rng.sizes, self.p.max_pointees as u64) as usize;
                        (k, self.distinct_values(m))
                    })
                    .collect();
                Instruction::RegPt(pairs)
            }
        }
    }

    fn empty_set(&self) -> Instruction {
        match self.p.target {
            Target::Scalar => Instruction::Reg(Vec::new()),
            Target::PointsTo => Instruction::RegPt(Vec::new()),
        }
    }

    fn emit(&mut self, inst: Instruction) -> usize {
        let first = self.len;
        self.len += match &inst {
            Instruction::Grow { len, .. } => *len,
            _ => 1,
        };
        self.out.push(inst);
        first
    }

    /// With probability `1 / grow_one_in`, copies a random piece of one
    /// data run to the end of the corpus and returns the new positions.
    fn maybe_grow(&mut self, runs: &mut Vec<(usize, usize)>) -> Option<std::ops::Range<usize>> {
        if below(&mut self.rng.grow, self.p.grow_one_in) != 0 {
            return None;
        }
        let (start, run_len) = pick(&mut self.rng.grow, runs);
        let offset = below(&mut self.rng.grow, run_len as u64) as usize;
        let room = (run_len - offset).min(self.p.max_segment);
        let len = 1 + below(&mut self.rng.grow, room as u64) as usize;
        let first = self.emit(Instruction::Grow {
            src: start + offset,
            len,
        });
        runs.push((first, len));
        Some(first..first + len)
    }
}

/// Produces the instruction stream for `params`. The same parameters always
/// give the same stream.
pub fn generate(params: &GenParams) -> Result<Workload, WorkloadError> {
    params.check()?;
    let mut b = Builder {
        p: params,
        rng: Streams::new(params.seed),
        out: Vec::new(),
        len: 0,
    };
    match params.mode {
        Mode::Claim1 => claim1(&mut b),
        Mode::Pessimistic => pessimistic(&mut b),
        Mode::Optimistic => optimistic(&mut b),
    }
    Ok(Workload {
        header: vec![params.header()],
        instructions: b.out,
    })
}

fn claim1(b: &mut Builder) {
    let mut data = Vec::with_capacity(b.p.op_count);
    for _ in 0..b.p.op_count {
        let set = b.random_set();
        data.push(b.emit(set));
        let lhs = pick(&mut b.rng.positions, &data);
        let rhs = pick(&mut b.rng.positions, &data);
        let kind = kind(&mut b.rng.kinds);
        b.emit(Instruction::Op { kind, lhs, rhs });
    }
}

fn pessimistic(b: &mut Builder) {
    let mut cells = Vec::with_capacity(b.p.corpus_size);
    for _ in 0..b.p.corpus_size {
        let set = b.random_set();
        cells.push(b.emit(set));
    }
    let mut runs = vec![(0, b.p.corpus_size)];
    for _ in 0..b.p.op_count {
        if let Some(grown) = b.maybe_grow(&mut runs) {
            cells.extend(grown);
        }
        let lhs = pick(&mut b.rng.positions, &cells);
        let rhs = pick(&mut b.rng.positions, &cells);
        let kind = kind(&mut b.rng.kinds);
        b.emit(Instruction::Op { kind, lhs, rhs });
    }
}

fn optimistic(b: &mut Builder) {
    let size = b.p.corpus_size;
    let pool: Vec<Instruction> = (0..size / 4).map(|_| b.random_set()).collect();

    let mut cells = Vec::with_capacity(size);
    for _ in 0..size {
        let empty = b.empty_set();
        cells.push(b.emit(empty));
    }
    // Overwrite three quarters of the cells (chosen without repetition) with
    // registrations drawn from the pool.
    let mut order: Vec<usize> = (0..size).collect();
    for i in 0..size * 3 / 4 {
        let j = i + below(&mut b.rng.picks, (size - i) as u64) as usize;
        order.swap(i, j);
        let set = pool[below(&mut b.rng.picks, pool.len() as u64) as usize].clone();
        cells[order[i]] = b.emit(set);
    }

    let mut runs = vec![(0, b.len)];
    let random_op = |b: &mut Builder, cells: &[usize]| {
        let lhs = pick(&mut b.rng.positions, cells);
        let rhs = pick(&mut b.rng.positions, cells);
        (kind(&mut b.rng.kinds), lhs, rhs)
    };
    let mut ops: Vec<(OpKind, usize, usize)> = (0..size).map(|_| random_op(b, &cells)).collect();

    for _ in 0..b.p.op_count {
        if let Some(grown) = b.maybe_grow(&mut runs) {
            // operations grow by freshly sampled pairs, never by copies, and
            // by no more than the data increment
            let increment = grown.len();
            cells.extend(grown);
            for _ in 0..increment {
                let op = random_op(b, &cells);
                ops.push(op);
            }
        }
        let (kind, lhs, rhs) = ops[below(&mut b.rng.picks, ops.len() as u64) as usize];
        b.emit(Instruction::Op { kind, lhs, rhs });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::format::serialize;

    fn count_ops(w: &Workload) -> usize {
        w.op_count()
    }

    #[test]
    fn streams_are_deterministic() {
        for mode in [Mode::Claim1, Mode::Pessimistic, Mode::Optimistic] {
            for target in [Target::Scalar, Target::PointsTo] {
                let p = GenParams::new(mode, target, 2000, 99);
                let a = serialize(&generate(&p).unwrap());
                let b = serialize(&generate(&p).unwrap());
                assert_eq!(a, b);
                let other = serialize(&generate(&GenParams { seed: 100, ..p }).unwrap());
                assert_ne!(a, other);
            }
        }
    }

    #[test]
    fn claim1_shape() {
        let w = generate(&GenParams::new(Mode::Claim1, Target::Scalar, 30_000, 1)).unwrap();
        assert_eq!(count_ops(&w), 30_000);
        for inst in &w.instructions {
            if let Instruction::Reg(e) = inst {
                assert!(e.len() <= 200);
                assert!(e.iter().all(|&v| v <= 10_000));
            }
        }
        w.validate().unwrap();
    }

    #[test]
    fn pessimistic_prefix_is_the_corpus() {
        let w = generate(&GenParams::new(Mode::Pessimistic, Target::Scalar, 5000, 3)).unwrap();
        let first_op = w
            .instructions
            .iter()
            .position(|i| matches!(i, Instruction::Op { .. }))
            .unwrap();
        assert_eq!(first_op, 300);
        assert!(w.instructions[..300].iter().all(|i| matches!(i, Instruction::Reg(_))));
        assert_eq!(count_ops(&w), 5000);
        assert!(w.instructions.iter().any(|i| matches!(i, Instruction::Grow { .. })));
        w.validate().unwrap();
    }

    #[test]
    fn optimistic_draws_from_pool() {
        let w = generate(&GenParams::new(Mode::Optimistic, Target::Scalar, 5000, 4)).unwrap();
        let regs: Vec<&Vec<u64>> = w
            .instructions
            .iter()
            .filter_map(|i| match i {
                Instruction::Reg(e) => Some(e),
                _ => None,
            })
            .collect();
        assert_eq!(regs.len(), 300 + 225);
        let distinct: BTreeSet<_> = regs.iter().filter(|e| !e.is_empty()).collect();
        assert!(distinct.len() <= 75);
        assert_eq!(count_ops(&w), 5000);
        w.validate().unwrap();
    }

    #[test]
    fn zero_ops_still_has_header() {
        let w = generate(&GenParams::new(Mode::Claim1, Target::Scalar, 0, 1)).unwrap();
        assert!(w.instructions.is_empty());
        assert_eq!(w.header.len(), 1);
    }

    #[test]
    fn rejects_bad_params() {
        let p = GenParams {
            max_size: 0,
            ..GenParams::default()
        };
        assert!(generate(&p).is_err());
        let p = GenParams {
            max_size: 50,
            max_value: 10,
            ..GenParams::default()
        };
        assert!(generate(&p).is_err());
        assert!("bogus".parse::<Mode>().is_err());
    }
}
