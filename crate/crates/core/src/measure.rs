//! States as global sections of the presheaf of classical probability
//! measures, the state–proposition pairing and the Born rule.
//!
//! A section assigns to every context a probability vector over its blocks.
//! Pairing a section with a subobject sums the probabilities of the selected
//! blocks context by context, giving an antitone function on the family;
//! its minimum over contexts is the Born probability.

use std::sync::Arc;

use rand::Rng;

use crate::context::ContextFamily;
use crate::error::{Error, Result};
use crate::matrix::{DensityState, Projection};
use crate::subobject::{alpha, outer_daseinisation, BlockSet, ClopenSubobject};
use crate::tolerance::Tolerances;

fn clamp_probability(x: f64, tol: f64) -> f64 {
    if x < 0.0 && x >= -tol {
        0.0
    } else if x > 1.0 && x <= 1.0 + tol {
        1.0
    } else {
        x
    }
}

/// Per-context probability vectors, compatible under coarse-graining.
#[derive(Debug, Clone)]
pub struct CPGlobalSection {
    family: Arc<ContextFamily>,
    values: Vec<Vec<f64>>,
}

impl CPGlobalSection {
    /// Validated construction: probabilities in [0, 1], unit sums and
    /// compatibility along every restriction, each within 1e-9.
    pub fn new(family: Arc<ContextFamily>, values: Vec<Vec<f64>>) -> Result<Self> {
        let s = Self::unchecked(family, values)?;
        let tol = Tolerances::DEFAULT.trace;
        if let Some(x) = s.values.iter().flatten().find(|x| !(-tol..=1.0 + tol).contains(*x)) {
            return Err(Error::InvalidSection(format!("probability {x} outside [0, 1]")));
        }
        let norm = s.normalization_violation();
        if norm > tol {
            return Err(Error::InvalidSection(format!("context sums differ from 1 by {norm:e}")));
        }
        let compat = s.compatibility_violation();
        if compat > tol {
            return Err(Error::InvalidSection(format!("coarse-graining mismatch {compat:e}")));
        }
        Ok(s)
    }

    /// Shape-checked only; used to represent corrupted inputs for diagnostics.
    pub fn unchecked(family: Arc<ContextFamily>, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != family.len() {
            return Err(Error::InvalidSection(format!(
                "{} probability vectors for {} contexts",
                values.len(),
                family.len()
            )));
        }
        for (i, v) in values.iter().enumerate() {
            if v.len() != family.context(i).len() {
                return Err(Error::InvalidSection(format!(
                    "context {i} has {} blocks but {} probabilities",
                    family.context(i).len(),
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidSection(format!("non-finite probability at context {i}")));
            }
        }
        Ok(Self { family, values })
    }

    pub fn family(&self) -> &Arc<ContextFamily> {
        &self.family
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn at(&self, context: usize) -> &[f64] {
        &self.values[context]
    }

    /// `m_V(S)`: total probability of the selected blocks.
    pub fn mass(&self, context: usize, s: BlockSet) -> f64 {
        s.iter().map(|i| self.values[context][i]).sum()
    }

    pub fn normalization_violation(&self) -> f64 {
        self.values.iter().map(|v| (v.iter().sum::<f64>() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Largest mismatch between a coarse probability and the summed fine
    /// probabilities dominated by it.
    pub fn compatibility_violation(&self) -> f64 {
        let f = &self.family;
        f.strict_pairs()
            .into_iter()
            .flat_map(|(coarse, fine)| {
                let map = f.restriction(fine, coarse).expect("order pair has a restriction");
                let mut pushed = vec![0.0; f.context(coarse).len()];
                for (i, &q) in map.iter().enumerate() {
                    pushed[q] += self.values[fine][i];
                }
                pushed.into_iter().zip(&self.values[coarse]).map(|(a, b)| (a - b).abs()).collect::<Vec<_>>()
            })
            .fold(0.0, f64::max)
    }

    /// `weight·self + (1 − weight)·other`.
    pub fn mix(&self, other: &Self, weight: f64) -> Result<Self> {
        if !self.family.same_as(&other.family) {
            return Err(Error::FamilyMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| weight * x + (1.0 - weight) * y).collect())
            .collect();
        Ok(Self { family: Arc::clone(&self.family), values })
    }

    pub fn max_abs_difference(&self, other: &Self) -> Result<f64> {
        if !self.family.same_as(&other.family) {
            return Err(Error::FamilyMismatch);
        }
        Ok(self
            .values
            .iter()
            .flatten()
            .zip(other.values.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// `m_{ρ;V}(block) = tr(ρ·block)`.
pub fn section_from_state(rho: &DensityState, family: &Arc<ContextFamily>) -> Result<CPGlobalSection> {
    if rho.dim() != family.dim() {
        return Err(Error::DimensionMismatch { expected: family.dim(), found: rho.dim() });
    }
    let clamp = Tolerances::DEFAULT.clamp;
    let values = family
        .contexts()
        .iter()
        .map(|c| c.blocks().iter().map(|b| clamp_probability(rho.expectation(b.matrix()), clamp)).collect())
        .collect();
    Ok(CPGlobalSection { family: Arc::clone(family), values })
}

/// Function from the contexts of a family into [0, 1].
#[derive(Debug, Clone)]
pub struct AntitoneFunction {
    family: Arc<ContextFamily>,
    values: Vec<f64>,
}

impl AntitoneFunction {
    pub fn new(family: Arc<ContextFamily>, values: Vec<f64>) -> Result<Self> {
        if values.len() != family.len() {
            return Err(Error::DimensionMismatch { expected: family.len(), found: values.len() });
        }
        let f = Self { family, values };
        let violation = f.antitone_violation();
        if violation > Tolerances::DEFAULT.check {
            return Err(Error::NotAntitone { violation });
        }
        Ok(f)
    }

    pub fn family(&self) -> &Arc<ContextFamily> {
        &self.family
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, context: usize) -> f64 {
        self.values[context]
    }

    /// Largest increase `value(V) − value(V′)` over pairs `V′ ≤ V`.
    pub fn antitone_violation(&self) -> f64 {
        self.family
            .strict_pairs()
            .into_iter()
            .map(|(coarse, fine)| self.values[fine] - self.values[coarse])
            .fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Contexts whose value is within `tol` of the minimum.
    pub fn argmin(&self, tol: f64) -> Vec<usize> {
        let m = self.min();
        (0..self.values.len()).filter(|&i| self.values[i] <= m + tol).collect()
    }

    pub fn max_abs_difference(&self, other: &Self) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// `(m(S))_V = m_V(S_V)`.
pub fn pairing(m: &CPGlobalSection, s: &ClopenSubobject) -> Result<AntitoneFunction> {
    if !m.family.same_as(s.family()) {
        return Err(Error::FamilyMismatch);
    }
    let values = (0..m.family.len()).map(|i| m.mass(i, s.component(i))).collect();
    Ok(AntitoneFunction { family: Arc::clone(&m.family), values })
}

/// Maps clopen subobjects to antitone functions.
pub trait SubobjectMeasure {
    fn family(&self) -> &Arc<ContextFamily>;
    fn measure(&self, s: &ClopenSubobject) -> Result<AntitoneFunction>;
}

/// The probability measure on subobjects determined by a section.
#[derive(Debug, Clone)]
pub struct PresheafMeasure {
    section: CPGlobalSection,
}

impl PresheafMeasure {
    pub fn section(&self) -> &CPGlobalSection {
        &self.section
    }
}

impl SubobjectMeasure for PresheafMeasure {
    fn family(&self) -> &Arc<ContextFamily> {
        &self.section.family
    }

    fn measure(&self, s: &ClopenSubobject) -> Result<AntitoneFunction> {
        pairing(&self.section, s)
    }
}

pub fn measure_from_section(m: &CPGlobalSection) -> PresheafMeasure {
    PresheafMeasure { section: m.clone() }
}

/// Recover the section: `m_V({i}) = μ(S)(V)` where `S` is the smallest
/// subobject whose component at `V` is `{i}`.
pub fn section_from_measure<M: SubobjectMeasure + ?Sized>(mu: &M) -> Result<CPGlobalSection> {
    let family = mu.family();
    let n = family.len();
    let mut values = Vec::with_capacity(n);
    for v in 0..n {
        let mut probs = Vec::with_capacity(family.context(v).len());
        for i in 0..family.context(v).len() {
            let mut raw = vec![BlockSet::EMPTY; n];
            raw[v] = BlockSet::singleton(i);
            let s = ClopenSubobject::generated_by(Arc::clone(family), &raw)?;
            probs.push(mu.measure(&s)?.value(v));
        }
        values.push(probs);
    }
    CPGlobalSection::unchecked(Arc::clone(family), values)
}

/// Maximum violations of the probability-measure axioms.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AxiomsReport {
    /// max_V |μ(⊤)_V − 1|
    pub normalization: f64,
    /// max over pairs and contexts of |μ(S) + μ(T) − μ(S∨T) − μ(S∧T)|
    pub modularity: f64,
    /// largest increase of any μ(S) along an inclusion
    pub antitone: f64,
    /// largest coarse-graining mismatch of the section itself
    pub compatibility: f64,
    pub pairs_checked: usize,
}

impl AxiomsReport {
    pub fn max_violation(&self) -> f64 {
        self.normalization.max(self.modularity).max(self.antitone).max(self.compatibility)
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.max_violation() <= tol
    }
}

pub fn measure_axioms_check(m: &CPGlobalSection, pairs: &[(ClopenSubobject, ClopenSubobject)]) -> Result<AxiomsReport> {
    let top = pairing(m, &ClopenSubobject::top(Arc::clone(&m.family)))?;
    let mut report = AxiomsReport {
        normalization: top.values.iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max),
        antitone: top.antitone_violation(),
        compatibility: m.compatibility_violation(),
        ..Default::default()
    };
    for (s, t) in pairs {
        let ms = pairing(m, s)?;
        let mt = pairing(m, t)?;
        let mj = pairing(m, &s.join(t)?)?;
        let mm = pairing(m, &s.meet(t)?)?;
        for v in 0..m.family.len() {
            let gap = (ms.values[v] + mt.values[v] - mj.values[v] - mm.values[v]).abs();
            report.modularity = report.modularity.max(gap);
        }
        for f in [&ms, &mt, &mj, &mm] {
            report.antitone = report.antitone.max(f.antitone_violation());
        }
        report.pairs_checked += 1;
    }
    Ok(report)
}

/// Random subobject pairs for [`measure_axioms_check`].
pub fn sample_subobject_pairs<R: Rng + ?Sized>(
    rng: &mut R,
    family: &Arc<ContextFamily>,
    count: usize,
) -> Vec<(ClopenSubobject, ClopenSubobject)> {
    (0..count)
        .map(|_| {
            let density = rng.random_range(0.1..0.6);
            (crate::random::subobject(rng, family, density), crate::random::subobject(rng, family, density))
        })
        .collect()
}

/// Finitely additive measure on the projections occurring in a family.
#[derive(Debug, Clone)]
pub struct ProjectionFAPM {
    entries: Vec<(Projection, f64)>,
}

impl ProjectionFAPM {
    pub fn value(&self, p: &Projection) -> Option<f64> {
        let tol = Tolerances::DEFAULT.equality;
        self.entries.iter().find(|(q, _)| q.approx_eq(p, tol)).map(|(_, v)| *v)
    }

    pub fn entries(&self) -> &[(Projection, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Value of every block-sum projection of the family, checking that
/// contexts sharing a projection agree on it.
pub fn projection_fapm(m: &CPGlobalSection) -> Result<ProjectionFAPM> {
    let tol = Tolerances::DEFAULT;
    let mut entries: Vec<(Projection, f64)> = Vec::new();
    for (v, ctx) in m.family.contexts().iter().enumerate() {
        for bits in 0..(1u32 << ctx.len()) {
            let s = BlockSet::from_bits(bits);
            let p = alpha(ctx, s)?;
            let value = m.mass(v, s);
            match entries.iter().find(|(q, _)| q.approx_eq(&p, tol.equality)) {
                Some((_, existing)) => {
                    let discrepancy = (existing - value).abs();
                    if discrepancy > tol.check {
                        return Err(Error::WellDefinednessViolation { discrepancy });
                    }
                }
                None => entries.push((p, value)),
            }
        }
    }
    Ok(ProjectionFAPM { entries })
}

/// Born probability as the minimum of `m_ρ(δ°(P))` over the family.
#[derive(Debug, Clone)]
pub struct BornProbability {
    pub probability: f64,
    /// Contexts attaining the minimum within the check tolerance.
    pub minimizers: Vec<usize>,
    /// Contexts containing `P`.
    pub containing: Vec<usize>,
    pub pairing: AntitoneFunction,
}

pub fn born_probability(rho: &DensityState, p: &Projection, family: &Arc<ContextFamily>) -> Result<BornProbability> {
    if rho.dim() != family.dim() || p.dim() != family.dim() {
        return Err(Error::DimensionMismatch { expected: family.dim(), found: rho.dim().max(p.dim()) });
    }
    let containing = family.contexts_containing(p);
    if containing.is_empty() {
        return Err(Error::MissingContext("no context contains the projection".into()));
    }
    let m = section_from_state(rho, family)?;
    let pairing = pairing(&m, &outer_daseinisation(p, family)?)?;
    Ok(BornProbability {
        probability: pairing.min(),
        minimizers: pairing.argmin(Tolerances::DEFAULT.check),
        containing,
        pairing,
    })
}
