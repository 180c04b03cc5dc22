//! Flow-sensitive intraprocedural points-to analysis on a two-level
//! construction: points-to sets map pointer variables to pointee sets.
//!
//! Pointee sets and live-variable sets share one flat forest, so the two
//! uses memoize into the same tables.
//!
//! # CFG text format
//!
//! ```text
//! # comment
//! entry b1              optional, defaults to the first block
//! block b1
//!   p = &x              address-of
//!   p = q               copy
//!   p = *q              load
//!   *p = q              store
//! block b2
//! edge b1 -> b2
//! ```

use std::collections::VecDeque;

use thiserror::Error;

use crate::dedup::Interner;
use crate::error::LhfError;
use crate::forest::{Index, OpKind};
use crate::nesting::{Construction, ForestId, NestedElement, NestingConfig, OpSet};

/// Control flow graph in which a pointer is re-pointed on one branch before
/// the paths join.
pub const BRANCH_JOIN_CFG: &str = include_str!("../fixtures/branch_join.cfg");

#[derive(Debug, Error)]
pub enum PtaError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("block `{0}` is unreachable from the entry")]
    Unreachable(String),
    #[error("the graph has no blocks")]
    NoBlocks,
    #[error("no fixed point after {0} block evaluations")]
    NoFixedPoint(usize),
    #[error(transparent)]
    Lhf(#[from] LhfError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u64);

impl Var {
    pub fn id(self) -> u64 {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stmt {
    /// `p = &x`
    AddrOf(Var, Var),
    /// `p = q`
    Copy(Var, Var),
    /// `p = *q`
    Load(Var, Var),
    /// `*p = q`
    Store(Var, Var),
}

pub struct PtaConstruction {
    c: Construction,
    pointees: ForestId,
    pts: ForestId,
    vars: Interner<String>,
}

impl Default for PtaConstruction {
    fn default() -> Self {
        Self::new()
    }
}

impl PtaConstruction {
    pub fn new() -> Self {
        let mut c = Construction::new();
        let pointees = c.add_flat(OpSet::all());
        let pts = c
            .add_nested(OpSet::all(), &[pointees], NestingConfig::default())
            .expect("child forest exists");
        Self {
            c,
            pointees,
            pts,
            vars: Interner::new(),
        }
    }

    pub fn construction(&self) -> &Construction {
        &self.c
    }

    pub fn pointee_forest(&self) -> ForestId {
        self.pointees
    }

    /// The forest for live-variable sets: the pointee forest itself.
    pub fn live_forest(&self) -> ForestId {
        self.pointees
    }

    pub fn pts_forest(&self) -> ForestId {
        self.pts
    }

    pub fn var(&mut self, name: &str) -> Var {
        match self.vars.lookup(&name.to_string()) {
            Some(id) => Var(id),
            None => Var(self.vars.intern(name.to_string())),
        }
    }

    pub fn name(&self, v: Var) -> &str {
        self.vars.resolve(v.0).map_or("?", String::as_str)
    }

    fn var_set(&mut self, forest: ForestId, vars: &[Var]) -> Result<Index, PtaError> {
        let mut ids: Vec<u64> = vars.iter().map(|v| v.0).collect();
        ids.sort_unstable();
        ids.dedup();
        Ok(self.c.register_flat(forest, ids)?)
    }

    pub fn register_pointees(&mut self, vars: &[Var]) -> Result<Index, PtaError> {
        self.var_set(self.pointees, vars)
    }

    pub fn register_live(&mut self, vars: &[Var]) -> Result<Index, PtaError> {
        self.var_set(self.live_forest(), vars)
    }

    /// Registers a points-to set. Pointers with no pointees are left out.
    pub fn register_pts(&mut self, pairs: &[(Var, &[Var])]) -> Result<Index, PtaError> {
        let mut elements = Vec::with_capacity(pairs.len());
        for (p, targets) in pairs {
            let child = self.register_pointees(targets)?;
            if !child.is_empty() {
                elements.push(NestedElement::new(p.0, &[child]));
            }
        }
        elements.sort();
        Ok(self.c.register_nested(self.pts, elements)?)
    }

    /// Pointee-set index of `p` in `pts`, the empty set if `p` is absent.
    pub fn pointees_of(&self, pts: Index, p: Var) -> Result<Index, PtaError> {
        Ok(self
            .c
            .value_of(self.pts, pts, p.0)?
            .map_or(Index::EMPTY, |children| children[0]))
    }

    /// Pointers with a non-empty pointee set in `pts`.
    pub fn pointers(&self, pts: Index) -> Result<Vec<Var>, PtaError> {
        Ok(self.c.keys_of(self.pts, pts)?.into_iter().map(Var).collect())
    }

    pub fn pointee_vars(&self, set: Index) -> Result<Vec<Var>, PtaError> {
        let flat = self.c.flat(self.pointees)?;
        Ok(flat.resolve(set)?.iter().map(|&v| Var(v)).collect())
    }

    fn assign(&mut self, pts: Index, p: Var, value: Index) -> Result<Index, PtaError> {
        Ok(self.c.set_key_value(self.pts, pts, p.0, &[value])?)
    }

    fn union_pointees(&mut self, a: Index, b: Index) -> Result<Index, PtaError> {
        Ok(self.c.operate(self.pointees, OpKind::Union, a, b)?)
    }

    pub fn transfer(&mut self, stmt: Stmt, input: Index) -> Result<Index, PtaError> {
        match stmt {
            Stmt::AddrOf(p, x) => {
                let target = self.register_pointees(&[x])?;
                self.assign(input, p, target)
            }
            Stmt::Copy(p, q) => {
                let value = self.pointees_of(input, q)?;
                self.assign(input, p, value)
            }
            Stmt::Load(p, q) => {
                let mut value = Index::EMPTY;
                for r in self.pointee_vars(self.pointees_of(input, q)?)? {
                    let through = self.pointees_of(input, r)?;
                    value = self.union_pointees(value, through)?;
                }
                self.assign(input, p, value)
            }
            Stmt::Store(p, q) => {
                let targets = self.pointee_vars(self.pointees_of(input, p)?)?;
                let value = self.pointees_of(input, q)?;
                if let [r] = targets[..] {
                    return self.assign(input, r, value);
                }
                let mut out = input;
                for r in targets {
                    let old = self.pointees_of(out, r)?;
                    let merged = self.union_pointees(old, value)?;
                    out = self.assign(out, r, merged)?;
                }
                Ok(out)
            }
        }
    }

    pub fn merge(&mut self, a: Index, b: Index) -> Result<Index, PtaError> {
        Ok(self.c.union(self.pts, a, b)?)
    }

    /// Renders a points-to set as `p -> {a, b}, q -> {c}`, or `{}` when empty.
    pub fn describe(&self, pts: Index) -> Result<String, PtaError> {
        let mut parts = Vec::new();
        for p in self.pointers(pts)? {
            let targets: Vec<&str> = self
                .pointee_vars(self.pointees_of(pts, p)?)?
                .into_iter()
                .map(|v| self.name(v))
                .collect();
            parts.push(format!("{} -> {{{}}}", self.name(p), targets.join(", ")));
        }
        Ok(if parts.is_empty() {
            "{}".to_string()
        } else {
            parts.join(", ")
        })
    }

    pub fn analyze(&mut self, cfg: &Cfg) -> Result<Analysis, PtaError> {
        let n = cfg.blocks.len();
        let mut preds = vec![Vec::new(); n];
        let mut succs = vec![Vec::new(); n];
        for &(from, to) in &cfg.edges {
            succs[from].push(to);
            preds[to].push(from);
        }
        let mut inputs = vec![Index::EMPTY; n];
        let mut outputs = vec![Index::EMPTY; n];
        let mut evaluated = vec![false; n];
        let mut queued = vec![true; n];
        let mut work: VecDeque<usize> = (0..n).collect();
        let limit = 64 * (n + 1) * (self.vars.count() as usize + 1);
        let mut evaluations = 0;
        while let Some(b) = work.pop_front() {
            queued[b] = false;
            evaluations += 1;
            if evaluations > limit {
                return Err(PtaError::NoFixedPoint(limit));
            }
            let mut input = Index::EMPTY;
            for &p in &preds[b] {
                input = self.merge(input, outputs[p])?;
            }
            let mut out = input;
            for &stmt in &cfg.blocks[b].stmts {
                out = self.transfer(stmt, out)?;
            }
            inputs[b] = input;
            if evaluated[b] && out == outputs[b] {
                continue;
            }
            evaluated[b] = true;
            outputs[b] = out;
            for &s in &succs[b] {
                if !queued[s] {
                    queued[s] = true;
                    work.push_back(s);
                }
            }
        }
        Ok(Analysis {
            inputs,
            outputs,
            evaluations,
        })
    }

    /// One `name.in: ...` and one `name.out: ...` line per block.
    pub fn report(&self, cfg: &Cfg, analysis: &Analysis) -> Result<String, PtaError> {
        let mut text = String::new();
        for (b, block) in cfg.blocks.iter().enumerate() {
            text.push_str(&format!("{}.in: {}\n", block.name, self.describe(analysis.inputs[b])?));
            text.push_str(&format!("{}.out: {}\n", block.name, self.describe(analysis.outputs[b])?));
        }
        Ok(text)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub name: String,
    pub stmts: Vec<Stmt>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cfg {
    pub blocks: Vec<Block>,
    pub edges: Vec<(usize, usize)>,
    pub entry: usize,
}

impl Cfg {
    pub fn block(&self, name: &str) -> Option<usize> {
        self.blocks.iter().position(|b| b.name == name)
    }

    /// Parses the text format, interning variable names in `pta`.
    pub fn parse(text: &str, pta: &mut PtaConstruction) -> Result<Cfg, PtaError> {
        let mut blocks: Vec<Block> = Vec::new();
        let mut edges = Vec::new();
        let mut entry = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| PtaError::Parse { line: i + 1, message };
            let words: Vec<&str> = line.split_whitespace().collect();
            match words[..] {
                ["block", name] => {
                    if blocks.iter().any(|b| b.name == name) {
                        return Err(err(format!("block `{name}` is declared twice")));
                    }
                    blocks.push(Block {
                        name: name.to_string(),
                        stmts: Vec::new(),
                    });
                }
                ["entry", name] => {
                    if entry.replace((name.to_string(), i + 1)).is_some() {
                        return Err(err("entry is given twice".into()));
                    }
                }
                ["edge", from, "->", to] => edges.push((from.to_string(), to.to_string(), i + 1)),
                ["block" | "entry" | "edge", ..] => return Err(err(format!("malformed `{line}`"))),
                _ => {
                    let stmt = parse_stmt(line, pta).ok_or_else(|| err(format!("unknown statement `{line}`")))?;
                    let block = blocks
                        .last_mut()
                        .ok_or_else(|| err("statement outside of a block".into()))?;
                    block.stmts.push(stmt);
                }
            }
        }
        if blocks.is_empty() {
            return Err(PtaError::NoBlocks);
        }
        let find = |name: &str, line: usize| {
            blocks
                .iter()
                .position(|b| b.name == name)
                .ok_or_else(|| PtaError::Parse {
                    line,
                    message: format!("unknown block `{name}`"),
                })
        };
        let entry = match entry {
            Some((name, line)) => find(&name, line)?,
            None => 0,
        };
        let edges = edges
            .iter()
            .map(|(f, t, line)| Ok((find(f, *line)?, find(t, *line)?)))
            .collect::<Result<Vec<_>, PtaError>>()?;
        let cfg = Cfg { blocks, edges, entry };
        cfg.check_reachable()?;
        Ok(cfg)
    }

    fn check_reachable(&self) -> Result<(), PtaError> {
        let mut seen = vec![false; self.blocks.len()];
        let mut stack = vec![self.entry];
        seen[self.entry] = true;
        while let Some(b) = stack.pop() {
            for &(f, t) in &self.edges {
                if f == b && !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(b) => Err(PtaError::Unreachable(self.blocks[b].name.clone())),
            None => Ok(()),
        }
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn parse_stmt(line: &str, pta: &mut PtaConstruction) -> Option<Stmt> {
    let (lhs, rhs) = line.split_once('=')?;
    let (lhs, rhs) = (lhs.trim(), rhs.trim());
    let (store, lhs) = match lhs.strip_prefix('*') {
        Some(rest) => (true, rest.trim()),
        None => (false, lhs),
    };
    let (op, rhs) = if let Some(rest) = rhs.strip_prefix('&') {
        ('&', rest.trim())
    } else if let Some(rest) = rhs.strip_prefix('*') {
        ('*', rest.trim())
    } else {
        (' ', rhs)
    };
    if !is_ident(lhs) || !is_ident(rhs) {
        return None;
    }
    let (p, q) = (pta.var(lhs), pta.var(rhs));
    match (store, op) {
        (false, '&') => Some(Stmt::AddrOf(p, q)),
        (false, ' ') => Some(Stmt::Copy(p, q)),
        (false, '*') => Some(Stmt::Load(p, q)),
        (true, ' ') => Some(Stmt::Store(p, q)),
        _ => None,
    }
}

/// Fixed-point result: points-to sets at entry and exit of every block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Analysis {
    pub inputs: Vec<Index>,
    pub outputs: Vec<Index>,
    /// Block transfer evaluations until the worklist emptied.
    pub evaluations: usize,
}
