//! Contexts (abelian subalgebras given by their minimal projections) and
//! finite, meet-closed families of contexts ordered by inclusion.

use std::collections::HashMap;
use std::fmt;

use petgraph::unionfind::UnionFind;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::matrix::{
    projection_leq, spectral_decompose, ComplexMatrix, HermitianOperator, Projection,
    UnitaryOperator,
};
use crate::tolerance::Tolerances;

/// Identity of a context: canonical bytes built from its rounded blocks.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ContextId(Vec<u8>);

impl ContextId {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    /// First 12 hex digits of the SHA-256 of the key.
    pub fn short(&self) -> String {
        let digest = Sha256::digest(&self.0);
        digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Debug for ContextId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ContextId({})", self.short())
    }
}

impl fmt::Display for ContextId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.short())
    }
}

fn rounded_entries(p: &Projection, grid: f64) -> Vec<i64> {
    p.matrix()
        .entries()
        .iter()
        .flat_map(|z| [(z.re / grid).round() as i64, (z.im / grid).round() as i64])
        .collect()
}

/// A resolution of the identity into at least two pairwise orthogonal,
/// nonzero projections, kept in canonical order.
#[derive(Clone)]
pub struct Context {
    dim: usize,
    blocks: Vec<Projection>,
    id: ContextId,
}

impl Context {
    pub fn new(blocks: Vec<Projection>) -> Result<Self> {
        Self::new_with(blocks, &Tolerances::DEFAULT)
    }

    pub fn new_with(blocks: Vec<Projection>, tol: &Tolerances) -> Result<Self> {
        if blocks.len() < 2 {
            return Err(Error::TrivialContext);
        }
        let dim = blocks[0].dim();
        if let Some(b) = blocks.iter().find(|b| b.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: b.dim() });
        }
        if blocks.iter().any(Projection::is_zero) {
            return Err(Error::InvalidContext("zero block".into()));
        }
        for (i, p) in blocks.iter().enumerate() {
            for q in &blocks[i + 1..] {
                let ov = p.overlap(q);
                if ov > tol.overlap {
                    return Err(Error::InvalidContext(format!("blocks overlap (‖PQ‖_F = {ov:e})")));
                }
            }
        }
        let total = Projection::sum_orthogonal(dim, &blocks);
        let defect = total.matrix().distance(&ComplexMatrix::identity(dim));
        if defect > tol.projection {
            return Err(Error::InvalidContext(format!("blocks sum to I only within {defect:e}")));
        }

        let mut keyed: Vec<(usize, Vec<i64>, Projection)> = blocks
            .into_iter()
            .map(|b| (b.rank(), rounded_entries(&b, tol.rounding), b))
            .collect();
        // Rank ascending, then rounded entries descending (so e1, e2, e3 for diagonal blocks).
        keyed.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| b.1.cmp(&a.1)));

        let mut key = Vec::new();
        key.extend_from_slice(&(dim as u32).to_le_bytes());
        for (rank, entries, _) in &keyed {
            key.extend_from_slice(&(*rank as u32).to_le_bytes());
            for e in entries {
                key.extend_from_slice(&e.to_le_bytes());
            }
        }
        Ok(Self { dim, blocks: keyed.into_iter().map(|(_, _, b)| b).collect(), id: ContextId(key) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[Projection] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &Projection {
        &self.blocks[i]
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn id(&self) -> &ContextId {
        &self.id
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.blocks.iter().map(Projection::rank).collect()
    }

    /// A maximal abelian subalgebra: every block has rank one.
    pub fn is_maximal(&self) -> bool {
        self.blocks.iter().all(|b| b.rank() == 1)
    }

    /// Blocks `i` with ‖block_i · P‖_F above the overlap threshold.
    pub fn overlapping_blocks(&self, p: &Projection) -> Vec<usize> {
        let tol = Tolerances::DEFAULT.overlap;
        (0..self.len()).filter(|&i| self.blocks[i].overlap(p) > tol).collect()
    }

    /// Index of the block matching `p` within the equality tolerance.
    pub fn find_block(&self, p: &Projection) -> Option<usize> {
        let tol = Tolerances::DEFAULT.equality;
        self.blocks.iter().position(|b| b.approx_eq(p, tol))
    }

    /// Same blocks up to order, each within the equality tolerance.
    pub fn approx_eq(&self, other: &Context) -> bool {
        self.dim == other.dim
            && self.len() == other.len()
            && self.blocks.iter().all(|b| other.find_block(b).is_some())
    }

    fn sum_of(&self, indices: &[usize]) -> Projection {
        Projection::sum_orthogonal(self.dim, indices.iter().map(|&i| &self.blocks[i]))
    }
}

impl fmt::Debug for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Context").field("id", &self.id).field("ranks", &self.ranks()).finish()
    }
}

/// Minimal projections of the abelian algebra generated by pairwise
/// commuting Hermitian operators.
pub fn context_from_operators(ops: &[HermitianOperator]) -> Result<Context> {
    let tol = Tolerances::DEFAULT;
    let Some(first) = ops.first() else {
        return Err(Error::TrivialContext);
    };
    let dim = first.dim();
    if let Some(op) = ops.iter().find(|o| o.dim() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, found: op.dim() });
    }
    for (i, a) in ops.iter().enumerate() {
        for b in &ops[i + 1..] {
            let deviation = a.matrix().commutator(b.matrix()).frobenius_norm();
            if deviation > tol.commute {
                return Err(Error::NonCommuting { deviation });
            }
        }
    }

    let mut blocks = vec![Projection::identity(dim)];
    for op in ops {
        let eigen = spectral_decompose(op);
        let mut refined = Vec::new();
        for b in &blocks {
            for (_, e) in &eigen {
                if b.overlap(e) <= tol.overlap {
                    continue;
                }
                let product = (b.matrix() * e.matrix()).hermitian_part();
                refined.push(Projection::new(product)?);
            }
        }
        blocks = refined;
    }
    if blocks.len() < 2 {
        return Err(Error::TrivialContext);
    }
    Context::new(blocks)
}

/// `V′ ≤ V`: every block of `V′` is a sum of blocks of `V`.
pub fn context_leq(vp: &Context, v: &Context) -> Result<bool> {
    if vp.dim != v.dim {
        return Err(Error::DimensionMismatch { expected: v.dim, found: vp.dim });
    }
    let tol = Tolerances::DEFAULT;
    Ok(vp.blocks.iter().all(|q| {
        let below = v.overlapping_blocks(q);
        v.sum_of(&below).matrix().distance(q.matrix()) <= tol.equality
    }))
}

/// `V ∩ W`, or `None` when the intersection is `ℂ·1`.
pub fn context_meet(v: &Context, w: &Context) -> Result<Option<Context>> {
    if v.dim != w.dim {
        return Err(Error::DimensionMismatch { expected: v.dim, found: w.dim });
    }
    let tol = Tolerances::DEFAULT;
    let n = v.len();
    let mut uf = UnionFind::<usize>::new(n + w.len());
    for (i, p) in v.blocks.iter().enumerate() {
        for (j, q) in w.blocks.iter().enumerate() {
            if p.overlap(q) > tol.overlap {
                uf.union(i, n + j);
            }
        }
    }
    let mut components: Vec<(usize, Vec<usize>)> = Vec::new();
    for i in 0..n {
        let root = uf.find(i);
        match components.iter_mut().find(|(r, _)| *r == root) {
            Some((_, members)) => members.push(i),
            None => components.push((root, vec![i])),
        }
    }
    if components.len() < 2 {
        return Ok(None);
    }
    let blocks = components.iter().map(|(_, members)| v.sum_of(members)).collect();
    Context::new(blocks).map(Some)
}

/// `U V U*`.
pub fn conjugate_context(u: &UnitaryOperator, v: &Context) -> Result<Context> {
    if u.dim() != v.dim {
        return Err(Error::DimensionMismatch { expected: v.dim, found: u.dim() });
    }
    let blocks = v.blocks.iter().map(|b| b.conjugated(u)).collect::<Result<Vec<_>>>()?;
    Context::new(blocks)
}

/// Block permutation induced by conjugation: block `i` of `v` is carried to
/// block `perm[i]` of `image`, where `image` is (approximately) `U v U*`.
pub(crate) fn conjugation_block_map(u: &UnitaryOperator, v: &Context, image: &Context) -> Result<Vec<usize>> {
    v.blocks
        .iter()
        .map(|b| {
            let moved = b.conjugated(u)?;
            image
                .find_block(&moved)
                .ok_or_else(|| Error::MissingContext("conjugated block not found in target".into()))
        })
        .collect()
}

/// A finite set of contexts closed under non-trivial meets, together with
/// the inclusion order and the restriction maps between related contexts.
#[derive(Clone)]
pub struct ContextFamily {
    dim: usize,
    contexts: Vec<Context>,
    leq: Vec<Vec<bool>>,
    // (fine, coarse) -> image of each fine block
    restrictions: HashMap<(usize, usize), Vec<usize>>,
}

fn insert_unique(list: &mut Vec<Context>, c: Context) -> Result<bool> {
    if let Some(same_key) = list.iter().find(|e| e.id == c.id) {
        return if same_key.approx_eq(&c) { Ok(false) } else { Err(Error::CanonicalizationClash) };
    }
    if list.iter().any(|e| e.approx_eq(&c)) {
        return Ok(false);
    }
    list.push(c);
    Ok(true)
}

/// Close `seed` under pairwise non-trivial meets and compute the order.
pub fn close_family(seed: &[Context]) -> Result<ContextFamily> {
    let Some(first) = seed.first() else {
        return Err(Error::EmptySeed);
    };
    let dim = first.dim;
    let mut contexts: Vec<Context> = Vec::new();
    for c in seed {
        if c.dim != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: c.dim });
        }
        insert_unique(&mut contexts, c.clone())?;
    }

    let mut done = 0;
    while done < contexts.len() {
        // Meets of every new context against everything before it.
        let upto = contexts.len();
        for j in done..upto {
            for i in 0..j {
                if let Some(m) = context_meet(&contexts[i], &contexts[j])? {
                    insert_unique(&mut contexts, m)?;
                }
            }
        }
        done = upto;
    }
    contexts.sort_by(|a, b| a.id.cmp(&b.id));
    ContextFamily::from_sorted(dim, contexts)
}

impl ContextFamily {
    fn from_sorted(dim: usize, contexts: Vec<Context>) -> Result<Self> {
        let n = contexts.len();
        let mut leq = vec![vec![false; n]; n];
        let mut restrictions = HashMap::new();
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    leq[a][b] = true;
                    restrictions.insert((b, a), (0..contexts[a].len()).collect());
                    continue;
                }
                if !context_leq(&contexts[a], &contexts[b])? {
                    continue;
                }
                leq[a][b] = true;
                let map = contexts[b]
                    .blocks
                    .iter()
                    .map(|p| {
                        contexts[a]
                            .blocks
                            .iter()
                            .position(|q| projection_leq(p, q).unwrap_or(false))
                            .ok_or_else(|| Error::InvalidContext("block without a dominating coarse block".into()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                restrictions.insert((b, a), map);
            }
        }
        Ok(Self { dim, contexts, leq, restrictions })
    }

    /// The closure of this family together with `extra`.
    pub fn extended(&self, extra: &[Context]) -> Result<ContextFamily> {
        let mut seed = self.contexts.clone();
        seed.extend_from_slice(extra);
        close_family(&seed)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.contexts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contexts.is_empty()
    }

    pub fn contexts(&self) -> &[Context] {
        &self.contexts
    }

    pub fn context(&self, i: usize) -> &Context {
        &self.contexts[i]
    }

    pub fn ids(&self) -> impl Iterator<Item = &ContextId> {
        self.contexts.iter().map(|c| &c.id)
    }

    pub fn index_of_id(&self, id: &ContextId) -> Option<usize> {
        self.contexts.binary_search_by(|c| c.id.cmp(id)).ok()
    }

    /// Position of a context equal to `c`, by id or, failing that, by
    /// blockwise comparison.
    pub fn index_of(&self, c: &Context) -> Option<usize> {
        self.index_of_id(&c.id)
            .filter(|&i| self.contexts[i].approx_eq(c))
            .or_else(|| self.contexts.iter().position(|e| e.approx_eq(c)))
    }

    /// `contexts[a] ≤ contexts[b]`.
    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a][b]
    }

    /// All pairs `(a, b)` with `a ≤ b`, reflexive pairs included.
    pub fn order_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .filter(|&(a, b)| self.leq[a][b])
            .collect()
    }

    pub fn strict_pairs(&self) -> Vec<(usize, usize)> {
        self.order_pairs().into_iter().filter(|(a, b)| a != b).collect()
    }

    /// Pairs `a < b` with nothing strictly between them.
    pub fn covering_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        self.strict_pairs()
            .into_iter()
            .filter(|&(a, b)| !(0..n).any(|c| c != a && c != b && self.leq[a][c] && self.leq[c][b]))
            .collect()
    }

    /// Indices `a` with `a ≤ b`, including `b` itself.
    pub fn below(&self, b: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&a| self.leq[a][b])
    }

    /// Restriction of the blocks of `fine` onto the blocks of `coarse`, when
    /// `coarse ≤ fine`.
    pub fn restriction(&self, fine: usize, coarse: usize) -> Option<&[usize]> {
        self.restrictions.get(&(fine, coarse)).map(Vec::as_slice)
    }

    /// Same contexts in the same order.
    pub fn same_as(&self, other: &ContextFamily) -> bool {
        std::ptr::eq(self, other)
            || (self.dim == other.dim
                && self.len() == other.len()
                && self.contexts.iter().zip(&other.contexts).all(|(a, b)| a.id == b.id))
    }

    /// Indices of contexts containing `p` as a sum of their blocks.
    pub fn contexts_containing(&self, p: &Projection) -> Vec<usize> {
        let tol = Tolerances::DEFAULT;
        (0..self.len())
            .filter(|&i| {
                let c = &self.contexts[i];
                c.sum_of(&c.overlapping_blocks(p)).matrix().distance(p.matrix()) <= tol.projection
            })
            .collect()
    }
}

impl fmt::Debug for ContextFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ContextFamily")
            .field("dim", &self.dim)
            .field("contexts", &self.contexts)
            .field("order", &self.strict_pairs())
            .finish()
    }
}

#[cfg(test)]
pub(crate) fn diag_context(values: &[&[f64]]) -> Result<Context> {
    Context::new(values.iter().map(|d| Projection::new(ComplexMatrix::diagonal(d))).collect::<Result<Vec<_>>>()?)
}
