//! Clopen subobjects of the spectral presheaf over a context family.
//!
//! Spectra are finite and discrete, so every subset of a spectrum is clopen
//! and a subobject is simply a choice of block-index set per context that is
//! stable under restriction. Components are bitsets over canonical block
//! indices, which keeps the lattice operations to a few integer ops.

use std::fmt;
use std::sync::Arc;

use crate::context::{Context, ContextFamily};
use crate::error::{Error, Result};
use crate::matrix::Projection;
use crate::tolerance::Tolerances;

/// Set of block indices of one context.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct BlockSet(u32);

impl BlockSet {
    pub const EMPTY: BlockSet = BlockSet(0);

    pub fn full(blocks: usize) -> Self {
        assert!(blocks <= 32, "at most 32 blocks per context");
        if blocks == 32 { BlockSet(u32::MAX) } else { BlockSet((1u32 << blocks) - 1) }
    }

    pub fn from_bits(bits: u32) -> Self {
        BlockSet(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn singleton(i: usize) -> Self {
        BlockSet(1 << i)
    }

    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        indices.into_iter().fold(Self::EMPTY, |s, i| s.with(i))
    }

    pub fn with(self, i: usize) -> Self {
        BlockSet(self.0 | (1 << i))
    }

    pub fn contains(self, i: usize) -> bool {
        i < 32 && self.0 & (1 << i) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn union(self, other: Self) -> Self {
        BlockSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        BlockSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        BlockSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&i| self.contains(i))
    }

    /// Image under a block map (restriction or transport).
    pub fn map(self, blocks: &[usize]) -> Self {
        Self::from_indices(self.iter().map(|i| blocks[i]))
    }
}

impl fmt::Debug for BlockSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// `α_V`: block-index set ↦ sum of the selected blocks.
pub fn alpha(v: &Context, s: BlockSet) -> Result<Projection> {
    if let Some(bad) = s.iter().find(|&i| i >= v.len()) {
        return Err(Error::BlockOutOfRange { index: bad, blocks: v.len() });
    }
    Ok(Projection::sum_orthogonal(v.dim(), s.iter().map(|i| v.block(i))))
}

/// `α_V⁻¹`: a projection of `V` ↦ the blocks summing to it.
pub fn alpha_inv(v: &Context, p: &Projection) -> Result<BlockSet> {
    if p.dim() != v.dim() {
        return Err(Error::DimensionMismatch { expected: v.dim(), found: p.dim() });
    }
    let s = BlockSet::from_indices(v.overlapping_blocks(p));
    let back = alpha(v, s)?;
    if back.matrix().distance(p.matrix()) > Tolerances::DEFAULT.projection {
        return Err(Error::NotInContext);
    }
    Ok(s)
}

/// The Boolean-algebra dictionary of one context.
#[derive(Debug, Clone, Copy)]
pub struct AlphaDictionary<'a> {
    context: &'a Context,
}

impl<'a> AlphaDictionary<'a> {
    pub fn new(context: &'a Context) -> Self {
        Self { context }
    }

    pub fn to_projection(&self, s: BlockSet) -> Result<Projection> {
        alpha(self.context, s)
    }

    pub fn to_blocks(&self, p: &Projection) -> Result<BlockSet> {
        alpha_inv(self.context, p)
    }

    /// Complement inside the context's spectrum.
    pub fn complement(&self, s: BlockSet) -> BlockSet {
        BlockSet::full(self.context.len()).difference(s)
    }
}

/// Subobject condition: every restriction of a selected block is selected.
pub fn is_subobject(family: &ContextFamily, components: &[BlockSet]) -> bool {
    components.len() == family.len()
        && family.order_pairs().into_iter().all(|(coarse, fine)| {
            let map = family.restriction(fine, coarse).expect("order pair has a restriction");
            components[fine].map(map).is_subset(components[coarse])
        })
}

/// Smallest subobject containing the given components.
fn downward_closure(family: &ContextFamily, raw: &[BlockSet]) -> Vec<BlockSet> {
    (0..family.len())
        .map(|coarse| {
            (0..family.len())
                .filter(|&fine| family.leq(coarse, fine))
                .fold(BlockSet::EMPTY, |acc, fine| {
                    let map = family.restriction(fine, coarse).expect("order pair has a restriction");
                    acc.union(raw[fine].map(map))
                })
        })
        .collect()
}

/// A clopen subobject: one block set per context of a family.
#[derive(Clone)]
pub struct ClopenSubobject {
    family: Arc<ContextFamily>,
    components: Vec<BlockSet>,
}

impl ClopenSubobject {
    pub fn new(family: Arc<ContextFamily>, components: Vec<BlockSet>) -> Result<Self> {
        if components.len() != family.len() {
            return Err(Error::NotSubobject(format!(
                "{} components for a family of {} contexts",
                components.len(),
                family.len()
            )));
        }
        for (i, s) in components.iter().enumerate() {
            if !s.is_subset(BlockSet::full(family.context(i).len())) {
                return Err(Error::BlockOutOfRange { index: s.iter().last().unwrap_or(0), blocks: family.context(i).len() });
            }
        }
        if !is_subobject(&family, &components) {
            return Err(Error::NotSubobject("a restriction leaves its component".into()));
        }
        Ok(Self { family, components })
    }

    /// Smallest subobject whose components contain `raw`.
    pub fn generated_by(family: Arc<ContextFamily>, raw: &[BlockSet]) -> Result<Self> {
        if raw.len() != family.len() {
            return Err(Error::NotSubobject("component count differs from family size".into()));
        }
        let components = downward_closure(&family, raw);
        Self::new(family, components)
    }

    pub fn top(family: Arc<ContextFamily>) -> Self {
        let components = family.contexts().iter().map(|c| BlockSet::full(c.len())).collect();
        Self { family, components }
    }

    pub fn bottom(family: Arc<ContextFamily>) -> Self {
        let components = vec![BlockSet::EMPTY; family.len()];
        Self { family, components }
    }

    pub fn family(&self) -> &Arc<ContextFamily> {
        &self.family
    }

    pub fn components(&self) -> &[BlockSet] {
        &self.components
    }

    pub fn component(&self, i: usize) -> BlockSet {
        self.components[i]
    }

    /// `P_{S_V} = α_V(S_V)`.
    pub fn component_projection(&self, i: usize) -> Projection {
        alpha(self.family.context(i), self.components[i]).expect("components are in range")
    }

    pub fn is_top(&self) -> bool {
        self.components.iter().zip(self.family.contexts()).all(|(s, c)| *s == BlockSet::full(c.len()))
    }

    pub fn is_bottom(&self) -> bool {
        self.components.iter().all(|s| s.is_empty())
    }

    fn check_family(&self, other: &Self) -> Result<()> {
        if self.family.same_as(&other.family) {
            Ok(())
        } else {
            Err(Error::FamilyMismatch)
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(BlockSet, BlockSet) -> BlockSet) -> Result<Self> {
        self.check_family(other)?;
        let components = self.components.iter().zip(&other.components).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { family: Arc::clone(&self.family), components })
    }

    pub fn meet(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, BlockSet::intersection)
    }

    pub fn join(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, BlockSet::union)
    }

    pub fn leq(&self, other: &Self) -> Result<bool> {
        self.check_family(other)?;
        Ok(self.components.iter().zip(&other.components).all(|(a, b)| a.is_subset(*b)))
    }

    /// Heyting implication `S ⇒ T`.
    ///
    /// A character at `V` belongs to the result iff each of its restrictions
    /// to `V′ ≤ V` that lands in `S` also lands in `T`.
    pub fn implies(&self, other: &Self) -> Result<Self> {
        self.check_family(other)?;
        let f = &self.family;
        let components = (0..f.len())
            .map(|v| {
                let blocks = f.context(v).len();
                BlockSet::from_indices((0..blocks).filter(|&lam| {
                    f.below(v).all(|vp| {
                        let to = f.restriction(v, vp).expect("order pair has a restriction")[lam];
                        !self.components[vp].contains(to) || other.components[vp].contains(to)
                    })
                }))
            })
            .collect();
        Ok(Self { family: Arc::clone(f), components })
    }

    /// Co-Heyting subtraction `S ∖ T`: the least `R` with `S ≤ T ∨ R`.
    pub fn subtract(&self, other: &Self) -> Result<Self> {
        self.check_family(other)?;
        let raw: Vec<BlockSet> =
            self.components.iter().zip(&other.components).map(|(a, b)| a.difference(*b)).collect();
        Ok(Self { family: Arc::clone(&self.family), components: downward_closure(&self.family, &raw) })
    }

    /// Heyting negation `S ⇒ ⊥`.
    pub fn negation(&self) -> Self {
        self.implies(&Self::bottom(Arc::clone(&self.family))).expect("same family")
    }

    /// Co-Heyting negation `⊤ ∖ S`.
    pub fn co_negation(&self) -> Self {
        Self::top(Arc::clone(&self.family)).subtract(self).expect("same family")
    }
}

impl PartialEq for ClopenSubobject {
    fn eq(&self, other: &Self) -> bool {
        self.family.same_as(&other.family) && self.components == other.components
    }
}

impl fmt::Debug for ClopenSubobject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClopenSubobject").field("components", &self.components).finish()
    }
}

pub fn sub_meet(s: &ClopenSubobject, t: &ClopenSubobject) -> Result<ClopenSubobject> {
    s.meet(t)
}

pub fn sub_join(s: &ClopenSubobject, t: &ClopenSubobject) -> Result<ClopenSubobject> {
    s.join(t)
}

pub fn sub_leq(s: &ClopenSubobject, t: &ClopenSubobject) -> Result<bool> {
    s.leq(t)
}

pub fn heyting_implies(s: &ClopenSubobject, t: &ClopenSubobject) -> Result<ClopenSubobject> {
    s.implies(t)
}

pub fn coheyting_subtract(s: &ClopenSubobject, t: &ClopenSubobject) -> Result<ClopenSubobject> {
    s.subtract(t)
}

/// Outer daseinisation `δ°(P)`: at each context, the blocks not orthogonal
/// to `P`, i.e. the smallest projection of the context dominating `P`.
pub fn outer_daseinisation(p: &Projection, family: &Arc<ContextFamily>) -> Result<ClopenSubobject> {
    if p.dim() != family.dim() {
        return Err(Error::DimensionMismatch { expected: family.dim(), found: p.dim() });
    }
    let components =
        family.contexts().iter().map(|c| BlockSet::from_indices(c.overlapping_blocks(p))).collect();
    Ok(ClopenSubobject { family: Arc::clone(family), components })
}

/// Every subobject of a small family, in increasing bit order.
pub fn enumerate_subobjects(family: &Arc<ContextFamily>) -> Result<Vec<ClopenSubobject>> {
    let sizes: Vec<usize> = family.contexts().iter().map(Context::len).collect();
    let total: usize = sizes.iter().sum();
    if total > 24 {
        return Err(Error::NotSubobject(format!("{total} spectrum points are too many to enumerate")));
    }
    let mut out = Vec::new();
    for code in 0u64..(1u64 << total) {
        let mut shift = 0;
        let components: Vec<BlockSet> = sizes
            .iter()
            .map(|&k| {
                let bits = ((code >> shift) & ((1u64 << k) - 1)) as u32;
                shift += k;
                BlockSet::from_bits(bits)
            })
            .collect();
        if is_subobject(family, &components) {
            out.push(ClopenSubobject { family: Arc::clone(family), components });
        }
    }
    Ok(out)
}
