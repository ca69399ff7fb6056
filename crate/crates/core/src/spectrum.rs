//! Gelfand spectra of contexts, restriction of characters and the search for
//! global sections of the spectral presheaf.
//!
//! At finite dimension a character of a context is determined by the one
//! minimal projection it sends to 1, so characters are stored as block
//! indices. A global section picks one such block per context of a family,
//! compatibly with every restriction map; a family without one witnesses
//! the Kochen–Specker obstruction.

use std::cmp::Reverse;
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::context::{context_leq, Context, ContextFamily, ContextId};
use crate::error::{Error, Result};
use crate::matrix::projection_leq;

pub const DEFAULT_SEARCH_BUDGET: u64 = 10_000_000;

/// The character of a context that fires on one minimal projection.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Character {
    pub context: ContextId,
    pub block: usize,
}

/// One character per block, in canonical block order.
pub fn spectrum(v: &Context) -> Vec<Character> {
    (0..v.len()).map(|block| Character { context: v.id().clone(), block }).collect()
}

/// `λ ↦ λ|_{V′}`: the block of `V′` dominating the block of `λ`.
pub fn restrict_character(lam: &Character, v: &Context, vp: &Context) -> Result<Character> {
    if &lam.context != v.id() {
        return Err(Error::MissingContext("character does not belong to the source context".into()));
    }
    if lam.block >= v.len() {
        return Err(Error::BlockOutOfRange { index: lam.block, blocks: v.len() });
    }
    if !context_leq(vp, v)? {
        return Err(Error::NotComparable);
    }
    let p = v.block(lam.block);
    let block = (0..vp.len())
        .find(|&q| projection_leq(p, vp.block(q)).unwrap_or(false))
        .ok_or(Error::NotComparable)?;
    Ok(Character { context: vp.id().clone(), block })
}

/// A choice of one character per context of a family.
#[derive(Debug, Clone)]
pub struct GlobalSection {
    family: Arc<ContextFamily>,
    assignment: Vec<usize>,
}

impl GlobalSection {
    pub fn new(family: Arc<ContextFamily>, assignment: Vec<usize>) -> Result<Self> {
        if assignment.len() != family.len() {
            return Err(Error::DimensionMismatch { expected: family.len(), found: assignment.len() });
        }
        for (i, &b) in assignment.iter().enumerate() {
            if b >= family.context(i).len() {
                return Err(Error::BlockOutOfRange { index: b, blocks: family.context(i).len() });
            }
        }
        let s = Self { family, assignment };
        if !s.is_consistent() {
            return Err(Error::NotSubobject("assignment violates a restriction map".into()));
        }
        Ok(s)
    }

    pub fn family(&self) -> &Arc<ContextFamily> {
        &self.family
    }

    /// Block index chosen at each family context, by family index.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn character(&self, i: usize) -> Character {
        Character { context: self.family.context(i).id().clone(), block: self.assignment[i] }
    }

    /// Full pairwise re-check of every order pair.
    pub fn is_consistent(&self) -> bool {
        self.family.order_pairs().into_iter().all(|(coarse, fine)| {
            self.family
                .restriction(fine, coarse)
                .is_some_and(|map| map[self.assignment[fine]] == self.assignment[coarse])
        })
    }
}

#[derive(Debug, Clone)]
pub enum SearchOutcome {
    Found(GlobalSection),
    /// Exhaustive search finished without a witness.
    Absent,
    /// The node budget ran out first.
    Exhausted,
}

#[derive(Debug, Clone)]
pub struct SearchReport {
    pub outcome: SearchOutcome,
    pub nodes: u64,
    pub elapsed: Duration,
}

impl SearchReport {
    pub fn section(&self) -> Option<&GlobalSection> {
        match &self.outcome {
            SearchOutcome::Found(s) => Some(s),
            _ => None,
        }
    }
}

pub fn find_global_section(family: &Arc<ContextFamily>) -> SearchReport {
    find_global_section_with_budget(family, DEFAULT_SEARCH_BUDGET)
}

struct Search<'a> {
    family: &'a ContextFamily,
    order: Vec<usize>,
    // links[x][y]: common lower bounds of contexts x and y
    links: Vec<Vec<Vec<usize>>>,
    assignment: Vec<Option<usize>>,
    nodes: u64,
    budget: u64,
}

impl Search<'_> {
    fn consistent(&self, ctx: usize, value: usize) -> bool {
        self.order.iter().filter_map(|&other| self.assignment[other].map(|v| (other, v))).all(
            |(other, other_value)| {
                self.links[ctx][other].iter().all(|&low| {
                    let here = self.family.restriction(ctx, low).expect("lower bound has a restriction");
                    let there = self.family.restriction(other, low).expect("lower bound has a restriction");
                    here[value] == there[other_value]
                })
            },
        )
    }

    /// `Some(true)` on a witness, `Some(false)` when the subtree is empty,
    /// `None` when the budget is spent.
    fn descend(&mut self, depth: usize) -> Option<bool> {
        if depth == self.order.len() {
            return Some(true);
        }
        let ctx = self.order[depth];
        for value in 0..self.family.context(ctx).len() {
            self.nodes += 1;
            if self.nodes > self.budget {
                return None;
            }
            if !self.consistent(ctx, value) {
                continue;
            }
            self.assignment[ctx] = Some(value);
            match self.descend(depth + 1) {
                Some(false) => self.assignment[ctx] = None,
                other => return other,
            }
        }
        Some(false)
    }
}

/// Backtracking search for a global section.
///
/// Contexts are visited by descending block count (ties by family index),
/// values in canonical block order; a partial assignment is pruned as soon
/// as two assigned contexts restrict differently to a common lower context.
pub fn find_global_section_with_budget(family: &Arc<ContextFamily>, budget: u64) -> SearchReport {
    let start = Instant::now();
    let n = family.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (Reverse(family.context(i).len()), i));
    let links = (0..n)
        .map(|x| {
            (0..n)
                .map(|y| if x == y { Vec::new() } else { (0..n).filter(|&a| family.leq(a, x) && family.leq(a, y)).collect() })
                .collect()
        })
        .collect();
    let mut search = Search { family, order, links, assignment: vec![None; n], nodes: 0, budget };
    let outcome = match search.descend(0) {
        Some(true) => {
            let assignment = search.assignment.iter().map(|v| v.expect("complete assignment")).collect();
            SearchOutcome::Found(GlobalSection { family: Arc::clone(family), assignment })
        }
        Some(false) => SearchOutcome::Absent,
        None => SearchOutcome::Exhausted,
    };
    SearchReport { outcome, nodes: search.nodes, elapsed: start.elapsed() }
}
