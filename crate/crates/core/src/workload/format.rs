//! Line-oriented text form of instruction streams.
//!
//! ```text
//! # leading comment lines form the header
//! REG 3 1 2 3
//! REGPT 2 4 3 1 2 3 | 7 1 5
//! OP UNION 0 1
//! GROW 0 2
//! ```
//!
//! `REG n e1 .. en` lists a strictly increasing scalar set. `REGPT n` is
//! followed by `n` groups separated by `|`, each `key m p1 .. pm` with
//! strictly increasing keys and pointees and `m >= 1`. `OP` takes one of
//! `UNION`, `INTER`, `DIFF` and two corpus positions. `GROW s l` copies
//! positions `s .. s+l` onto the end of the corpus.

use std::fmt::Write as _;

use super::WorkloadError;
use crate::forest::OpKind;
use crate::setops::is_strictly_sorted;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instruction {
    Reg(Vec<u64>),
    RegPt(Vec<(u64, Vec<u64>)>),
    Op { kind: OpKind, lhs: usize, rhs: usize },
    Grow { src: usize, len: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Target {
    Scalar,
    PointsTo,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::Scalar => "scalar",
            Target::PointsTo => "pointsto",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Workload {
    /// Comment lines preceding the first instruction, `#` included.
    pub header: Vec<String>,
    pub instructions: Vec<Instruction>,
}

impl Workload {
    /// Target implied by the registrations, if the stream has any.
    pub fn target(&self) -> Option<Target> {
        self.instructions.iter().find_map(|i| match i {
            Instruction::Reg(_) => Some(Target::Scalar),
            Instruction::RegPt(_) => Some(Target::PointsTo),
            _ => None,
        })
    }

    pub fn op_count(&self) -> usize {
        self.instructions
            .iter()
            .filter(|i| matches!(i, Instruction::Op { .. }))
            .count()
    }

    /// Value of a `key=value` token in the header, if present.
    pub fn header_field(&self, key: &str) -> Option<&str> {
        self.header.iter().find_map(|line| {
            line.split_whitespace()
                .find_map(|tok| tok.strip_prefix(key)?.strip_prefix('='))
        })
    }

    /// Checks positions and target consistency, returning the final corpus
    /// length.
    pub fn validate(&self) -> Result<usize, WorkloadError> {
        let mut len = 0usize;
        let mut target = None;
        for (n, inst) in self.instructions.iter().enumerate() {
            match inst {
                Instruction::Reg(_) | Instruction::RegPt(_) => {
                    let t = if matches!(inst, Instruction::Reg(_)) {
                        Target::Scalar
                    } else {
                        Target::PointsTo
                    };
                    if *target.get_or_insert(t) != t {
                        return Err(WorkloadError::TargetMismatch { instruction: n });
                    }
                    len += 1;
                }
                Instruction::Op { lhs, rhs, .. } => {
                    for &p in [lhs, rhs] {
                        if p >= len {
                            return Err(WorkloadError::Position {
                                instruction: n,
                                position: p,
                                len,
                            });
                        }
                    }
                    len += 1;
                }
                Instruction::Grow { src, len: l } => {
                    if src + l > len {
                        return Err(WorkloadError::Position {
                            instruction: n,
                            position: src + l - 1,
                            len,
                        });
                    }
                    len += l;
                }
            }
        }
        Ok(len)
    }
}

fn kind_token(kind: OpKind) -> &'static str {
    match kind {
        OpKind::Union => "UNION",
        OpKind::Intersection => "INTER",
        OpKind::Difference => "DIFF",
        other => unreachable!("{other} has no stream form"),
    }
}

pub fn serialize(workload: &Workload) -> String {
    let mut out = String::new();
    for line in &workload.header {
        out.push_str(line);
        out.push('\n');
    }
    for inst in &workload.instructions {
        write_instruction(&mut out, inst);
        out.push('\n');
    }
    out
}

fn write_instruction(out: &mut String, inst: &Instruction) {
    match inst {
        Instruction::Reg(elements) => {
            write!(out, "REG {}", elements.len()).unwrap();
            for e in elements {
                write!(out, " {e}").unwrap();
            }
        }
        Instruction::RegPt(pairs) => {
            write!(out, "REGPT {}", pairs.len()).unwrap();
            for (i, (key, pointees)) in pairs.iter().enumerate() {
                if i > 0 {
                    out.push_str(" |");
                }
                write!(out, " {key} {}", pointees.len()).unwrap();
                for p in pointees {
                    write!(out, " {p}").unwrap();
                }
            }
        }
        Instruction::Op { kind, lhs, rhs } => {
            write!(out, "OP {} {lhs} {rhs}", kind_token(*kind)).unwrap();
        }
        Instruction::Grow { src, len } => write!(out, "GROW {src} {len}").unwrap(),
    }
}

struct Tokens<'a> {
    line: usize,
    iter: std::str::SplitWhitespace<'a>,
}

impl<'a> Tokens<'a> {
    fn err(&self, message: impl Into<String>) -> WorkloadError {
        WorkloadError::Parse {
            line: self.line,
            message: message.into(),
        }
    }

    fn word(&mut self, what: &str) -> Result<&'a str, WorkloadError> {
        self.iter
            .next()
            .ok_or_else(|| self.err(format!("missing {what}")))
    }

    fn number<T: std::str::FromStr>(&mut self, what: &str) -> Result<T, WorkloadError> {
        let tok = self.word(what)?;
        tok.parse()
            .map_err(|_| self.err(format!("expected {what}, found `{tok}`")))
    }

    fn sorted_list(&mut self, count: usize, what: &str) -> Result<Vec<u64>, WorkloadError> {
        let mut items = Vec::with_capacity(count);
        for _ in 0..count {
            items.push(self.number(what)?);
        }
        if !is_strictly_sorted(&items) {
            return Err(self.err(format!("{what}s must be strictly increasing")));
        }
        Ok(items)
    }

    fn finish(&mut self) -> Result<(), WorkloadError> {
        match self.iter.next() {
            None => Ok(()),
            Some(tok) => Err(self.err(format!("unexpected trailing token `{tok}`"))),
        }
    }
}

pub fn parse(text: &str) -> Result<Workload, WorkloadError> {
    let mut workload = Workload::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if workload.instructions.is_empty() {
                workload.header.push(line.to_string());
            }
            continue;
        }
        let mut t = Tokens {
            line: i + 1,
            iter: line.split_whitespace(),
        };
        let inst = match t.word("instruction")? {
            "REG" => {
                let n = t.number("element count")?;
                Instruction::Reg(t.sorted_list(n, "element")?)
            }
            "REGPT" => {
                let n: usize = t.number("pair count")?;
                let mut pairs = Vec::with_capacity(n);
                for g in 0..n {
                    if g > 0 && t.word("`|`")? != "|" {
                        return Err(t.err("expected `|` between pointer groups"));
                    }
                    let key = t.number("pointer key")?;
                    let m: usize = t.number("pointee count")?;
                    if m == 0 {
                        return Err(t.err("a pointer group needs at least one pointee"));
                    }
                    pairs.push((key, t.sorted_list(m, "pointee")?));
                }
                if !pairs.windows(2).all(|w| w[0].0 < w[1].0) {
                    return Err(t.err("pointer keys must be strictly increasing"));
                }
                Instruction::RegPt(pairs)
            }
            "OP" => {
                let kind = match t.word("operation")? {
                    "UNION" => OpKind::Union,
                    "INTER" => OpKind::Intersection,
                    "DIFF" => OpKind::Difference,
                    other => return Err(t.err(format!("unknown operation `{other}`"))),
                };
                let lhs = t.number("corpus position")?;
                let rhs = t.number("corpus position")?;
                Instruction::Op { kind, lhs, rhs }
            }
            "GROW" => Instruction::Grow {
                src: t.number("segment start")?,
                len: t.number("segment length")?,
            },
            other => return Err(t.err(format!("unknown instruction `{other}`"))),
        };
        t.finish()?;
        workload.instructions.push(inst);
    }
    workload.validate().map_err(|e| match e {
        WorkloadError::Position { instruction, .. } | WorkloadError::TargetMismatch { instruction } => {
            WorkloadError::Parse {
                line: line_of(text, instruction),
                message: e.to_string(),
            }
        }
        other => other,
    })?;
    Ok(workload)
}

/// 1-based line number of the `n`th instruction.
fn line_of(text: &str, n: usize) -> usize {
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let l = l.trim();
            !l.is_empty() && !l.starts_with('#')
        })
        .nth(n)
        .map_or(0, |(i, _)| i + 1)
}
