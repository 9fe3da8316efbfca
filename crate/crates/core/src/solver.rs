//! A complete CDCL SAT solver with run metrics.
//!
//! Standard architecture: two-watched-literal propagation, first-UIP conflict
//! analysis with simple clause minimization, activity-ordered decisions with
//! phase saving, Luby restarts and activity-based learnt-clause reduction.
//! There is no randomness and no time-based heuristic, so conflict, decision
//! and propagation counts are reproducible for a given input.

use alloc::vec;
use alloc::vec::Vec;
use core::mem;

use crate::cnf::{Cnf, Lit};

const NO_REASON: u32 = u32::MAX;
const VAR_DECAY: f64 = 0.95;
const CLAUSE_DECAY: f64 = 0.999;
const RESTART_BASE: u64 = 256;
const STOP_CHECK_INTERVAL: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveOutcome {
    Sat,
    Unsat,
    /// The stop callback fired before the search finished. Never reported as
    /// Unsat.
    Interrupted,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub restarts: u64,
    pub learnt: u64,
    pub deleted: u64,
}

/// Internal literal: `var_index << 1 | negated`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct ILit(u32);

impl ILit {
    fn from_lit(lit: Lit) -> ILit {
        ILit(lit.code() as u32)
    }

    fn from_var(var: usize, positive: bool) -> ILit {
        ILit((var as u32) << 1 | u32::from(!positive))
    }

    fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    fn negated(self) -> ILit {
        ILit(self.0 ^ 1)
    }

    fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone)]
struct SClause {
    lits: Vec<ILit>,
    activity: f64,
    lbd: u32,
    learnt: bool,
    removed: bool,
}

#[derive(Debug, Clone, Copy)]
struct Watcher {
    clause: u32,
    blocker: ILit,
}

/// Max-heap over variable activities with position tracking, so bumps can
/// percolate in place.
#[derive(Debug, Default)]
struct VarHeap {
    heap: Vec<u32>,
    pos: Vec<i32>,
}

impl VarHeap {
    fn contains(&self, v: usize) -> bool {
        self.pos.get(v).is_some_and(|&p| p >= 0)
    }

    fn grow(&mut self, n: usize) {
        if self.pos.len() < n {
            self.pos.resize(n, -1);
        }
    }

    fn percolate_up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) >> 1;
            if act[self.heap[parent] as usize] >= act[v as usize] {
                break;
            }
            self.heap[i] = self.heap[parent];
            self.pos[self.heap[i] as usize] = i as i32;
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i as i32;
    }

    fn percolate_down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        loop {
            let left = 2 * i + 1;
            if left >= self.heap.len() {
                break;
            }
            let right = left + 1;
            let child = if right < self.heap.len()
                && act[self.heap[right] as usize] > act[self.heap[left] as usize]
            {
                right
            } else {
                left
            };
            if act[self.heap[child] as usize] <= act[v as usize] {
                break;
            }
            self.heap[i] = self.heap[child];
            self.pos[self.heap[i] as usize] = i as i32;
            i = child;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i as i32;
    }

    fn insert(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.grow(v + 1);
        self.heap.push(v as u32);
        self.pos[v] = (self.heap.len() - 1) as i32;
        self.percolate_up(self.heap.len() - 1, act);
    }

    fn update(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            self.percolate_up(self.pos[v] as usize, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<usize> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().expect("nonempty");
        self.pos[top as usize] = -1;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = 0;
            self.percolate_down(0, act);
        }
        Some(top as usize)
    }
}

pub struct Solver {
    clauses: Vec<SClause>,
    watches: Vec<Vec<Watcher>>,
    values: Vec<i8>,
    levels: Vec<u32>,
    reasons: Vec<u32>,
    trail: Vec<ILit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f64,
    heap: VarHeap,
    phase: Vec<bool>,
    seen: Vec<bool>,
    stats: SolverStats,
    ok: bool,
    num_learnts: usize,
    max_learnts: usize,
}

impl Solver {
    pub fn new(num_vars: u32) -> Solver {
        let n = num_vars as usize;
        let mut solver = Solver {
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * n],
            values: vec![0; n],
            levels: vec![0; n],
            reasons: vec![NO_REASON; n],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: vec![0.0; n],
            var_inc: 1.0,
            cla_inc: 1.0,
            heap: VarHeap::default(),
            phase: vec![false; n],
            seen: vec![false; n],
            stats: SolverStats::default(),
            ok: true,
            num_learnts: 0,
            max_learnts: 4000,
        };
        for v in 0..n {
            solver.heap.insert(v, &solver.activity);
        }
        solver
    }

    pub fn from_cnf(cnf: &Cnf) -> Solver {
        let mut solver = Solver::new(cnf.num_vars());
        for clause in cnf.clauses() {
            solver.add_clause(clause);
        }
        solver
    }

    pub fn num_vars(&self) -> usize {
        self.values.len()
    }

    pub fn stats(&self) -> &SolverStats {
        &self.stats
    }

    fn grow_to(&mut self, num_vars: usize) {
        let old = self.values.len();
        if num_vars <= old {
            return;
        }
        self.watches.resize(2 * num_vars, Vec::new());
        self.values.resize(num_vars, 0);
        self.levels.resize(num_vars, 0);
        self.reasons.resize(num_vars, NO_REASON);
        self.activity.resize(num_vars, 0.0);
        self.phase.resize(num_vars, false);
        self.seen.resize(num_vars, false);
        for v in old..num_vars {
            self.heap.insert(v, &self.activity);
        }
    }

    fn value_lit(&self, lit: ILit) -> i8 {
        let v = self.values[lit.var()];
        if lit.is_positive() {
            v
        } else {
            -v
        }
    }

    fn current_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    /// Adds a problem clause. Must be called before `solve`. Duplicate
    /// literals are merged, tautologies dropped, and literals already false
    /// at the top level removed.
    pub fn add_clause(&mut self, lits: &[Lit]) {
        if !self.ok {
            return;
        }
        debug_assert_eq!(self.current_level(), 0);
        let max_var = lits.iter().map(|l| l.var().number() as usize).max();
        if let Some(m) = max_var {
            self.grow_to(m);
        }
        let mut clause: Vec<ILit> = lits.iter().map(|&l| ILit::from_lit(l)).collect();
        clause.sort_by_key(|l| l.0);
        clause.dedup();
        let mut filtered = Vec::with_capacity(clause.len());
        for (i, &l) in clause.iter().enumerate() {
            if i + 1 < clause.len() && clause[i + 1] == l.negated() {
                return; // tautology
            }
            match self.value_lit(l) {
                1 => return, // already satisfied at the top level
                -1 => {}
                _ => filtered.push(l),
            }
        }
        match filtered.len() {
            0 => self.ok = false,
            1 => {
                self.unchecked_enqueue(filtered[0], NO_REASON);
                // defer full propagation to solve(); direct contradictions
                // between units are caught by unchecked_enqueue's caller
            }
            _ => {
                self.attach(filtered, false, 0);
            }
        }
    }

    fn attach(&mut self, lits: Vec<ILit>, learnt: bool, lbd: u32) -> u32 {
        let idx = self.clauses.len() as u32;
        self.watches[lits[0].index()].push(Watcher {
            clause: idx,
            blocker: lits[1],
        });
        self.watches[lits[1].index()].push(Watcher {
            clause: idx,
            blocker: lits[0],
        });
        self.clauses.push(SClause {
            lits,
            activity: 0.0,
            lbd,
            learnt,
            removed: false,
        });
        idx
    }

    fn unchecked_enqueue(&mut self, lit: ILit, reason: u32) {
        debug_assert_eq!(self.value_lit(lit), 0);
        self.values[lit.var()] = if lit.is_positive() { 1 } else { -1 };
        self.levels[lit.var()] = self.current_level();
        self.reasons[lit.var()] = reason;
        self.trail.push(lit);
        if reason != NO_REASON {
            self.stats.propagations += 1;
        }
    }

    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = p.negated();
            let mut ws = mem::take(&mut self.watches[false_lit.index()]);
            let mut i = 0;
            let mut j = 0;
            'watchers: while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value_lit(w.blocker) == 1 {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let ci = w.clause as usize;
                if self.clauses[ci].lits[0] == false_lit {
                    self.clauses[ci].lits.swap(0, 1);
                }
                debug_assert_eq!(self.clauses[ci].lits[1], false_lit);
                let first = self.clauses[ci].lits[0];
                if first != w.blocker && self.value_lit(first) == 1 {
                    ws[j] = Watcher {
                        clause: w.clause,
                        blocker: first,
                    };
                    j += 1;
                    continue;
                }
                let mut replacement = None;
                for k in 2..self.clauses[ci].lits.len() {
                    if self.value_lit(self.clauses[ci].lits[k]) != -1 {
                        replacement = Some(k);
                        break;
                    }
                }
                if let Some(k) = replacement {
                    self.clauses[ci].lits.swap(1, k);
                    let new_watch = self.clauses[ci].lits[1];
                    self.watches[new_watch.index()].push(Watcher {
                        clause: w.clause,
                        blocker: first,
                    });
                    continue 'watchers;
                }
                // unit or conflicting
                ws[j] = Watcher {
                    clause: w.clause,
                    blocker: first,
                };
                j += 1;
                if self.value_lit(first) == -1 {
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                    ws.truncate(j);
                    self.watches[false_lit.index()] = ws;
                    self.qhead = self.trail.len();
                    return Some(w.clause);
                }
                self.unchecked_enqueue(first, w.clause);
            }
            ws.truncate(j);
            self.watches[false_lit.index()] = ws;
        }
        None
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.update(v, &self.activity);
    }

    fn bump_clause(&mut self, ci: usize) {
        let c = &mut self.clauses[ci];
        c.activity += self.cla_inc;
        if c.activity > 1e20 {
            for cl in &mut self.clauses {
                cl.activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    fn analyze(&mut self, mut confl: u32) -> (Vec<ILit>, u32, u32) {
        let mut learnt: Vec<ILit> = vec![ILit(0)];
        let mut to_clear: Vec<usize> = Vec::new();
        let mut path_count = 0u32;
        let mut p: Option<ILit> = None;
        let mut index = self.trail.len();
        loop {
            let ci = confl as usize;
            if self.clauses[ci].learnt {
                self.bump_clause(ci);
            }
            let start = usize::from(p.is_some());
            for k in start..self.clauses[ci].lits.len() {
                let q = self.clauses[ci].lits[k];
                let v = q.var();
                if !self.seen[v] && self.levels[v] > 0 {
                    self.seen[v] = true;
                    to_clear.push(v);
                    self.bump_var(v);
                    if self.levels[v] >= self.current_level() {
                        path_count += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var()] {
                    break;
                }
            }
            let pl = self.trail[index];
            self.seen[pl.var()] = false;
            path_count -= 1;
            p = Some(pl);
            if path_count == 0 {
                break;
            }
            confl = self.reasons[pl.var()];
            debug_assert_ne!(confl, NO_REASON);
        }
        learnt[0] = p.expect("asserting literal").negated();

        // simple minimization: drop literals whose reason lies entirely
        // inside the clause (or at level 0)
        let mut kept = vec![learnt[0]];
        for &l in &learnt[1..] {
            let v = l.var();
            let r = self.reasons[v];
            let redundant = r != NO_REASON
                && self.clauses[r as usize].lits[1..].iter().all(|&q| {
                    self.seen[q.var()] || self.levels[q.var()] == 0
                });
            if !redundant {
                kept.push(l);
            }
        }
        let mut learnt = kept;

        for v in to_clear {
            self.seen[v] = false;
        }

        let backtrack_level = if learnt.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.levels[learnt[i].var()] > self.levels[learnt[max_i].var()] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            self.levels[learnt[1].var()]
        };

        let mut level_list: Vec<u32> = learnt.iter().map(|l| self.levels[l.var()]).collect();
        level_list.sort_unstable();
        level_list.dedup();
        let lbd = level_list.len() as u32;

        (learnt, backtrack_level, lbd)
    }

    fn backtrack(&mut self, level: u32) {
        if self.current_level() <= level {
            return;
        }
        let bound = self.trail_lim[level as usize];
        for idx in (bound..self.trail.len()).rev() {
            let lit = self.trail[idx];
            let v = lit.var();
            self.phase[v] = lit.is_positive();
            self.values[v] = 0;
            self.reasons[v] = NO_REASON;
            self.heap.insert(v, &self.activity);
        }
        self.trail.truncate(bound);
        self.trail_lim.truncate(level as usize);
        self.qhead = self.trail.len();
    }

    fn new_level(&mut self) {
        self.trail_lim.push(self.trail.len());
    }

    fn locked(&self, ci: usize) -> bool {
        let first = self.clauses[ci].lits[0];
        self.reasons[first.var()] == ci as u32 && self.value_lit(first) == 1
    }

    fn reduce_db(&mut self) {
        let mut candidates: Vec<usize> = (0..self.clauses.len())
            .filter(|&ci| {
                let c = &self.clauses[ci];
                c.learnt && !c.removed && c.lits.len() > 2 && c.lbd > 2 && !self.locked(ci)
            })
            .collect();
        candidates.sort_by(|&a, &b| {
            self.clauses[a]
                .activity
                .total_cmp(&self.clauses[b].activity)
        });
        let remove_count = candidates.len() / 2;
        for &ci in &candidates[..remove_count] {
            self.clauses[ci].removed = true;
            self.clauses[ci].lits = Vec::new();
            self.num_learnts -= 1;
            self.stats.deleted += 1;
        }
        if remove_count > 0 {
            self.rebuild_watches();
        }
        self.max_learnts += self.max_learnts / 2;
    }

    fn rebuild_watches(&mut self) {
        for ws in &mut self.watches {
            ws.clear();
        }
        for ci in 0..self.clauses.len() {
            if self.clauses[ci].removed {
                continue;
            }
            let (l0, l1) = (self.clauses[ci].lits[0], self.clauses[ci].lits[1]);
            self.watches[l0.index()].push(Watcher {
                clause: ci as u32,
                blocker: l1,
            });
            self.watches[l1.index()].push(Watcher {
                clause: ci as u32,
                blocker: l0,
            });
        }
    }

    fn luby(mut x: u64) -> u64 {
        let mut size = 1u64;
        let mut seq = 0u32;
        while size < x + 1 {
            seq += 1;
            size = 2 * size + 1;
        }
        while size - 1 != x {
            size = (size - 1) / 2;
            seq -= 1;
            x %= size;
        }
        1 << seq
    }

    pub fn solve(&mut self, assumptions: &[Lit]) -> SolveOutcome {
        self.solve_with_stop(assumptions, &mut || false)
    }

    /// Complete search. `stop` is polled every 1024 conflicts; when it
    /// returns true the search is abandoned with `Interrupted`.
    pub fn solve_with_stop(
        &mut self,
        assumptions: &[Lit],
        stop: &mut dyn FnMut() -> bool,
    ) -> SolveOutcome {
        if !self.ok {
            return SolveOutcome::Unsat;
        }
        if let Some(m) = assumptions.iter().map(|l| l.var().number() as usize).max() {
            self.grow_to(m);
        }
        let assumptions: Vec<ILit> = assumptions.iter().map(|&l| ILit::from_lit(l)).collect();
        self.backtrack(0);
        if self.propagate().is_some() {
            self.ok = false;
            return SolveOutcome::Unsat;
        }

        let mut restart_seq = 0u64;
        let mut restart_budget = Self::luby(restart_seq) * RESTART_BASE;
        let mut conflicts_since_restart = 0u64;

        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts_since_restart += 1;
                if self.current_level() == 0 {
                    self.ok = false;
                    return SolveOutcome::Unsat;
                }
                let (learnt, bt_level, lbd) = self.analyze(confl);
                self.backtrack(bt_level);
                if learnt.len() == 1 {
                    self.unchecked_enqueue(learnt[0], NO_REASON);
                } else {
                    let first = learnt[0];
                    let ci = self.attach(learnt, true, lbd);
                    self.bump_clause(ci as usize);
                    self.num_learnts += 1;
                    self.stats.learnt += 1;
                    self.unchecked_enqueue(first, ci);
                }
                self.var_inc /= VAR_DECAY;
                self.cla_inc /= CLAUSE_DECAY;
                if self.stats.conflicts % STOP_CHECK_INTERVAL == 0 && stop() {
                    return SolveOutcome::Interrupted;
                }
            } else {
                if conflicts_since_restart >= restart_budget {
                    restart_seq += 1;
                    restart_budget = Self::luby(restart_seq) * RESTART_BASE;
                    conflicts_since_restart = 0;
                    self.stats.restarts += 1;
                    self.backtrack(0);
                    continue;
                }
                if self.num_learnts >= self.max_learnts {
                    self.reduce_db();
                }
                // next decision: pending assumptions first
                let dl = self.current_level() as usize;
                if dl < assumptions.len() {
                    let a = assumptions[dl];
                    match self.value_lit(a) {
                        1 => {
                            self.new_level();
                        }
                        -1 => return SolveOutcome::Unsat,
                        _ => {
                            self.new_level();
                            self.unchecked_enqueue(a, NO_REASON);
                        }
                    }
                    continue;
                }
                let decision = loop {
                    match self.heap.pop(&self.activity) {
                        Some(v) if self.values[v] == 0 => break Some(v),
                        Some(_) => continue,
                        None => break None,
                    }
                };
                match decision {
                    None => return SolveOutcome::Sat,
                    Some(v) => {
                        self.stats.decisions += 1;
                        self.new_level();
                        self.unchecked_enqueue(ILit::from_var(v, self.phase[v]), NO_REASON);
                    }
                }
            }
        }
    }

    /// The satisfying assignment after a `Sat` outcome, indexed by variable.
    pub fn model(&self) -> Option<Vec<bool>> {
        if self.values.iter().any(|&v| v == 0) {
            return None;
        }
        Some(self.values.iter().map(|&v| v == 1).collect())
    }
}

/// Convenience: status of `cnf ∧ extra ∧ assumptions` with a fresh solver.
pub fn solve_cnf(cnf: &Cnf, extra: &[crate::cnf::Clause], assumptions: &[Lit]) -> SolveOutcome {
    let mut solver = Solver::from_cnf(cnf);
    for clause in extra {
        solver.add_clause(clause);
    }
    solver.solve(assumptions)
}
