//! Unitary automorphisms of the spectral presheaf and the two pictures of
//! time evolution.
//!
//! Conventions, with `U_t = exp(itH)`:
//!
//! | quantity                 | definition                                  |
//! |--------------------------|---------------------------------------------|
//! | evolved state            | `ρ_t = U_t ρ_0 U_t*`                        |
//! | evolved projection       | `P_t = U_{-t} P_0 U_t`                      |
//! | `act_on_subobject(U, S)` | component at `V` is `U · P_{S at U*VU} · U*` |
//! | Heisenberg subobject     | `S_t = act_on_subobject(U_{-t}, S_0)`       |
//! | Schrödinger section      | `(U.m)_V = m_{U*VU}` composed with `U*·U`   |
//!
//! Acting with `U` moves data from a family `F` onto `U F U*`. The image
//! family is built on demand; contexts carry canonical ids, so a flow that
//! returns to the same contexts (a periodic flow, a central unitary) lands
//! on a family equal to the original one.

use std::sync::Arc;

use serde::Serialize;

use crate::context::{close_family, conjugate_context, conjugation_block_map, Context, ContextFamily};
use crate::error::{Error, Result};
use crate::matrix::{spectral_decompose, unitary_from_spectrum, DensityState, HermitianOperator, Projection, UnitaryOperator};
use crate::measure::{pairing, section_from_state, CPGlobalSection};
use crate::subobject::{outer_daseinisation, BlockSet, ClopenSubobject};

/// A unitary carrying `source` onto `target`: every target context `W` has
/// `U* W U` in the source, with a matching of blocks.
#[derive(Debug, Clone)]
pub struct TransportedFamily {
    unitary: UnitaryOperator,
    source: Arc<ContextFamily>,
    target: Arc<ContextFamily>,
    // per target context: its preimage in the source
    preimage: Vec<usize>,
    // per target context: source block -> target block
    block_maps: Vec<Vec<usize>>,
}

impl TransportedFamily {
    /// Transport onto the full image `U F U*`.
    pub fn image(u: &UnitaryOperator, source: &Arc<ContextFamily>) -> Result<Self> {
        if u.dim() != source.dim() {
            return Err(Error::DimensionMismatch { expected: source.dim(), found: u.dim() });
        }
        let images = source.contexts().iter().map(|v| conjugate_context(u, v)).collect::<Result<Vec<_>>>()?;
        let target = Arc::new(close_family(&images)?);
        if target.len() != source.len() {
            return Err(Error::InvalidContext("conjugated family is not order-isomorphic to its source".into()));
        }
        let mut preimage = vec![usize::MAX; target.len()];
        let mut block_maps = vec![Vec::new(); target.len()];
        for (i, w) in images.iter().enumerate() {
            let j = target.index_of(w).ok_or_else(|| Error::MissingContext(w.id().short()))?;
            preimage[j] = i;
            block_maps[j] = conjugation_block_map(u, source.context(i), target.context(j))?;
        }
        if preimage.contains(&usize::MAX) {
            return Err(Error::InvalidContext("conjugation merged two contexts".into()));
        }
        Ok(Self { unitary: u.clone(), source: Arc::clone(source), target, preimage, block_maps })
    }

    /// Transport onto a given family; each of its contexts must have its
    /// preimage in the source.
    pub fn onto(u: &UnitaryOperator, source: &Arc<ContextFamily>, target: &Arc<ContextFamily>) -> Result<Self> {
        if u.dim() != source.dim() || target.dim() != source.dim() {
            return Err(Error::DimensionMismatch { expected: source.dim(), found: u.dim().max(target.dim()) });
        }
        let back = u.adjoint();
        let mut preimage = Vec::with_capacity(target.len());
        let mut block_maps = Vec::with_capacity(target.len());
        for w in target.contexts() {
            let v = conjugate_context(&back, w)?;
            let i = source
                .index_of(&v)
                .ok_or_else(|| Error::MissingContext(format!("preimage of context {} not in source family", w.id().short())))?;
            block_maps.push(conjugation_block_map(u, source.context(i), w)?);
            preimage.push(i);
        }
        Ok(Self { unitary: u.clone(), source: Arc::clone(source), target: Arc::clone(target), preimage, block_maps })
    }

    pub fn unitary(&self) -> &UnitaryOperator {
        &self.unitary
    }

    pub fn source(&self) -> &Arc<ContextFamily> {
        &self.source
    }

    pub fn target(&self) -> &Arc<ContextFamily> {
        &self.target
    }

    /// Source index of `U* W U` for target context `w`.
    pub fn preimage(&self, w: usize) -> usize {
        self.preimage[w]
    }

    /// Target index of `U V U*` for source context `v`, if present.
    pub fn image_of(&self, v: usize) -> Option<usize> {
        self.preimage.iter().position(|&i| i == v)
    }

    pub fn block_map(&self, w: usize) -> &[usize] {
        &self.block_maps[w]
    }

    pub fn subobject(&self, s: &ClopenSubobject) -> Result<ClopenSubobject> {
        if !s.family().same_as(&self.source) {
            return Err(Error::FamilyMismatch);
        }
        let components = (0..self.target.len())
            .map(|w| s.component(self.preimage[w]).map(&self.block_maps[w]))
            .collect();
        ClopenSubobject::new(Arc::clone(&self.target), components)
    }

    pub fn section(&self, m: &CPGlobalSection) -> Result<CPGlobalSection> {
        if !m.family().same_as(&self.source) {
            return Err(Error::FamilyMismatch);
        }
        let values = (0..self.target.len())
            .map(|w| {
                let from = m.at(self.preimage[w]);
                let mut out = vec![0.0; from.len()];
                for (i, &j) in self.block_maps[w].iter().enumerate() {
                    out[j] = from[i];
                }
                out
            })
            .collect();
        CPGlobalSection::unchecked(Arc::clone(&self.target), values)
    }
}

/// `φ̃_{U*}(S)`: the component at `V` is `U · P_{S at U*VU} · U*`. The
/// result lives on `U F U*`.
pub fn act_on_subobject(u: &UnitaryOperator, s: &ClopenSubobject) -> Result<ClopenSubobject> {
    TransportedFamily::image(u, s.family())?.subobject(s)
}

/// As [`act_on_subobject`], evaluated on a chosen family.
pub fn act_on_subobject_onto(
    u: &UnitaryOperator,
    s: &ClopenSubobject,
    target: &Arc<ContextFamily>,
) -> Result<ClopenSubobject> {
    TransportedFamily::onto(u, s.family(), target)?.subobject(s)
}

/// The automorphism `φ̃_U` of the spectral presheaf induced by `U`.
///
/// Composition is contravariant: `φ̃_{AB} = φ̃_B ∘ φ̃_A`.
#[derive(Debug, Clone)]
pub struct SpectralAutomorphism {
    unitary: UnitaryOperator,
}

impl SpectralAutomorphism {
    pub fn new(unitary: UnitaryOperator) -> Self {
        Self { unitary }
    }

    pub fn unitary(&self) -> &UnitaryOperator {
        &self.unitary
    }

    /// Base map on contexts, `V ↦ U* V U`.
    pub fn on_context(&self, v: &Context) -> Result<Context> {
        conjugate_context(&self.unitary.adjoint(), v)
    }

    /// `φ̃_{self·other}`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        Ok(Self { unitary: self.unitary.compose(&other.unitary)? })
    }

    pub fn apply(&self, s: &ClopenSubobject) -> Result<ClopenSubobject> {
        act_on_subobject(&self.unitary.adjoint(), s)
    }
}

/// `t ↦ exp(itH)`.
#[derive(Debug, Clone)]
pub struct UnitaryFlow {
    hamiltonian: HermitianOperator,
    spectrum: Vec<(f64, Projection)>,
}

impl UnitaryFlow {
    pub fn new(hamiltonian: HermitianOperator) -> Self {
        let spectrum = spectral_decompose(&hamiltonian);
        Self { hamiltonian, spectrum }
    }

    pub fn hamiltonian(&self) -> &HermitianOperator {
        &self.hamiltonian
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn unitary(&self, t: f64) -> UnitaryOperator {
        unitary_from_spectrum(&self.spectrum, self.dim(), t)
    }

    /// `U_{-t} P U_t`.
    pub fn evolve_projection(&self, t: f64, p: &Projection) -> Result<Projection> {
        p.conjugated(&self.unitary(-t))
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found });
        }
        Ok(())
    }
}

/// `S_t = φ̃_{U_t}(S_0)`, living on `U_{-t} F U_t`.
pub fn heisenberg_evolve(flow: &UnitaryFlow, t: f64, s0: &ClopenSubobject) -> Result<ClopenSubobject> {
    flow.check_dim(s0.family().dim())?;
    act_on_subobject(&flow.unitary(-t), s0)
}

/// `ρ_t = U_t ρ_0 U_t*`.
pub fn schrodinger_evolve_state(flow: &UnitaryFlow, t: f64, rho0: &DensityState) -> Result<DensityState> {
    flow.check_dim(rho0.dim())?;
    rho0.evolved(&flow.unitary(t))
}

/// `U_t . m`, living on `U_t F U_{-t}`.
pub fn schrodinger_evolve_section(flow: &UnitaryFlow, t: f64, m: &CPGlobalSection) -> Result<CPGlobalSection> {
    flow.check_dim(m.family().dim())?;
    TransportedFamily::image(&flow.unitary(t), m.family())?.section(m)
}

/// One context of a two-sided identity check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub context: usize,
    pub id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub diff: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub t: f64,
    pub rows: Vec<CheckRow>,
    pub max: f64,
    pub lhs_min: f64,
    pub rhs_min: f64,
    /// Largest gap between the transported section and the section of
    /// the transported state; both routes must agree.
    pub state_route_discrepancy: f64,
}

impl CheckReport {
    fn build(t: f64, family: &ContextFamily, lhs: &[f64], rhs: &[f64], state_route_discrepancy: f64) -> Self {
        let rows: Vec<CheckRow> = (0..family.len())
            .map(|v| CheckRow {
                context: v,
                id: family.context(v).id().short(),
                lhs: lhs[v],
                rhs: rhs[v],
                diff: (lhs[v] - rhs[v]).abs(),
            })
            .collect();
        let min = |xs: &[f64]| xs.iter().copied().fold(f64::INFINITY, f64::min);
        Self {
            t,
            max: rows.iter().map(|r| r.diff).fold(0.0, f64::max),
            lhs_min: min(lhs),
            rhs_min: min(rhs),
            rows,
            state_route_discrepancy,
        }
    }

    pub fn minima_gap(&self) -> f64 {
        (self.lhs_min - self.rhs_min).abs()
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.max <= tol && self.state_route_discrepancy <= tol && self.minima_gap() <= tol
    }
}

/// `(m_{ρ_t}(S_0))_V` against `(m_{ρ_0}(S_t))_{U_{-t} V U_t}` for every `V`
/// of the family of `S_0`.
pub fn check_compatibility(rho0: &DensityState, s0: &ClopenSubobject, flow: &UnitaryFlow, t: f64) -> Result<CheckReport> {
    let family = s0.family();
    flow.check_dim(family.dim())?;
    flow.check_dim(rho0.dim())?;
    let rho_t = schrodinger_evolve_state(flow, t, rho0)?;
    let lhs = pairing(&section_from_state(&rho_t, family)?, s0)?;

    let s_t = heisenberg_evolve(flow, t, s0)?;
    let shifted = s_t.family();
    let rhs_fn = pairing(&section_from_state(rho0, shifted)?, &s_t)?;
    // The contexts U_{-t} V U_t, as seen from the base family.
    let back = TransportedFamily::onto(&flow.unitary(t), shifted, family)?;
    let rhs: Vec<f64> = (0..family.len()).map(|v| rhs_fn.value(back.preimage(v))).collect();

    let via_section = back.section(&section_from_state(rho0, shifted)?)?;
    let route = via_section.max_abs_difference(&section_from_state(&rho_t, family)?)?;
    Ok(CheckReport::build(t, family, lhs.values(), &rhs, route))
}

/// `(m_{ρ_0}(S_0))_V` against `(m_{ρ_t}(S_{-t}))_{U_t V U_{-t}}` with
/// `S_{-t} = act_on_subobject(U_t, S_0)`.
pub fn check_covariance(rho0: &DensityState, s0: &ClopenSubobject, flow: &UnitaryFlow, t: f64) -> Result<CheckReport> {
    let family = s0.family();
    flow.check_dim(family.dim())?;
    flow.check_dim(rho0.dim())?;
    let m0 = section_from_state(rho0, family)?;
    let lhs = pairing(&m0, s0)?;

    let forward = TransportedFamily::image(&flow.unitary(t), family)?;
    let s_minus = forward.subobject(s0)?;
    let shifted = forward.target();
    let rho_t = schrodinger_evolve_state(flow, t, rho0)?;
    let m_t = section_from_state(&rho_t, shifted)?;
    let rhs_fn = pairing(&m_t, &s_minus)?;
    let rhs: Vec<f64> = (0..family.len())
        .map(|v| forward.image_of(v).map(|w| rhs_fn.value(w)).ok_or_else(|| Error::MissingContext(family.context(v).id().short())))
        .collect::<Result<_>>()?;

    let route = forward.section(&m0)?.max_abs_difference(&m_t)?;
    Ok(CheckReport::build(t, family, lhs.values(), &rhs, route))
}

/// Outcome of comparing `heisenberg_evolve(t, δ°(P_0))` with `δ°(P_t)`.
#[derive(Debug, Clone, Serialize)]
pub struct FlowIdentityReport {
    pub t: f64,
    /// Contexts (of the evolved family) where the block sets differ.
    pub mismatches: Vec<usize>,
    pub contexts: usize,
}

impl FlowIdentityReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

pub fn check_flow_identity(
    flow: &UnitaryFlow,
    t: f64,
    p0: &Projection,
    family: &Arc<ContextFamily>,
) -> Result<FlowIdentityReport> {
    let s_t = heisenberg_evolve(flow, t, &outer_daseinisation(p0, family)?)?;
    let direct = outer_daseinisation(&flow.evolve_projection(t, p0)?, s_t.family())?;
    let mismatches = (0..s_t.family().len())
        .filter(|&v| s_t.component(v) != direct.component(v))
        .collect();
    Ok(FlowIdentityReport { t, mismatches, contexts: s_t.family().len() })
}

/// Block sets of `s` transported back by their component projections, for
/// comparisons across families that agree only numerically.
pub fn components_on(s: &ClopenSubobject, target: &Arc<ContextFamily>) -> Result<Vec<BlockSet>> {
    Ok(act_on_subobject_onto(&UnitaryOperator::identity(target.dim()), s, target)?.components().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::diag_context;
    use crate::matrix::{c, ComplexMatrix};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    fn sigma_x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    fn sigma_z() -> HermitianOperator {
        HermitianOperator::diagonal(&[1.0, -1.0])
    }

    fn plus() -> Projection {
        Projection::onto_vector(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap()
    }

    fn minus() -> Projection {
        Projection::onto_vector(&[c(1.0, 0.0), c(-1.0, 0.0)]).unwrap()
    }

    fn diag_family() -> Arc<ContextFamily> {
        Arc::new(close_family(&[diag_context(&[&[1.0, 0.0], &[0.0, 1.0]]).unwrap()]).unwrap())
    }

    fn qubit_family() -> Arc<ContextFamily> {
        Arc::new(
            close_family(&[
                diag_context(&[&[1.0, 0.0], &[0.0, 1.0]]).unwrap(),
                Context::new(vec![plus(), minus()]).unwrap(),
            ])
            .unwrap(),
        )
    }

    fn ket0() -> DensityState {
        DensityState::pure(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap()
    }

    #[test]
    fn identity_and_sigma_x_actions() {
        let f = diag_family();
        let p0 = Projection::new(ComplexMatrix::diagonal(&[1.0, 0.0])).unwrap();
        let s = outer_daseinisation(&p0, &f).unwrap();
        assert_eq!(act_on_subobject(&UnitaryOperator::identity(2), &s).unwrap(), s);

        let x = UnitaryOperator::new(sigma_x()).unwrap();
        let moved = act_on_subobject(&x, &s).unwrap();
        assert!(moved.family().same_as(&f));
        let expected = Projection::new(ComplexMatrix::diagonal(&[0.0, 1.0])).unwrap();
        assert!(moved.component_projection(0).approx_eq(&expected, 1e-12));
        assert_eq!(act_on_subobject(&x.adjoint(), &moved).unwrap(), s);
    }

    #[test]
    fn central_unitary_acts_trivially() {
        let f = qubit_family();
        let s = outer_daseinisation(&plus(), &f).unwrap();
        let u = UnitaryOperator::phase(2, 0.7);
        assert_eq!(act_on_subobject(&u, &s).unwrap(), s);
    }

    #[test]
    fn heisenberg_examples() {
        let f = qubit_family();
        let flow = UnitaryFlow::new(sigma_z());
        let s0 = outer_daseinisation(&plus(), &f).unwrap();
        assert_eq!(heisenberg_evolve(&flow, 0.0, &s0).unwrap(), s0);

        let s_half = heisenberg_evolve(&flow, FRAC_PI_2, &s0).unwrap();
        let expected = outer_daseinisation(&minus(), s_half.family()).unwrap();
        assert_eq!(s_half, expected);
        // exp(iπσ_z) = −I is central.
        assert_eq!(heisenberg_evolve(&flow, PI, &s0).unwrap(), s0);

        let p_up = Projection::new(ComplexMatrix::diagonal(&[1.0, 0.0])).unwrap();
        let fixed = outer_daseinisation(&p_up, &f).unwrap();
        for t in [0.3, 1.0, 2.5] {
            let moved = heisenberg_evolve(&flow, t, &fixed).unwrap();
            assert_eq!(moved.components(), outer_daseinisation(&p_up, moved.family()).unwrap().components());
        }
    }

    #[test]
    fn schrodinger_examples() {
        let flow = UnitaryFlow::new(sigma_z());
        let rho = DensityState::pure(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(schrodinger_evolve_state(&flow, 0.0, &rho).unwrap().matrix().distance(rho.matrix()) == 0.0);
        let minus_rho = schrodinger_evolve_state(&flow, FRAC_PI_2, &rho).unwrap();
        assert!(minus_rho.matrix().distance(minus().matrix()) < 1e-12);
        assert!(schrodinger_evolve_state(&flow, PI, &rho).unwrap().matrix().distance(rho.matrix()) < 1e-12);

        let mixed = DensityState::maximally_mixed(2);
        let xflow = UnitaryFlow::new(HermitianOperator::new(sigma_x()).unwrap());
        assert!(schrodinger_evolve_state(&xflow, 1.3, &mixed).unwrap().matrix().distance(mixed.matrix()) < 1e-12);

        let f = diag_family();
        let m = section_from_state(&ket0(), &f).unwrap();
        let m_t = schrodinger_evolve_section(&xflow, FRAC_PI_2, &m).unwrap();
        assert!(m_t.family().same_as(&f));
        assert!((m_t.at(0)[0] - 0.0).abs() < 1e-12);
        assert!((m_t.at(0)[1] - 1.0).abs() < 1e-12);
        assert_eq!(schrodinger_evolve_section(&xflow, 0.0, &m).unwrap().values(), m.values());
    }

    #[test]
    fn section_evolution_matches_state_evolution() {
        let f = qubit_family();
        let flow = UnitaryFlow::new(HermitianOperator::new(sigma_x()).unwrap());
        let rho = DensityState::new(ComplexMatrix::from_rows(vec![vec![c(0.7, 0.0), c(0.1, 0.2)], vec![c(0.1, -0.2), c(0.3, 0.0)]]).unwrap()).unwrap();
        let t = 0.4;
        let m_t = schrodinger_evolve_section(&flow, t, &section_from_state(&rho, &f).unwrap()).unwrap();
        let direct = section_from_state(&schrodinger_evolve_state(&flow, t, &rho).unwrap(), m_t.family()).unwrap();
        assert!(m_t.max_abs_difference(&direct).unwrap() <= 1e-12);
        assert!(m_t.compatibility_violation() <= 1e-12);
    }

    #[test]
    fn qubit_compatibility_and_covariance() {
        let f = qubit_family();
        let flow = UnitaryFlow::new(sigma_z());
        let s0 = outer_daseinisation(&plus(), &f).unwrap();
        let zero = check_compatibility(&ket0(), &s0, &flow, 0.0).unwrap();
        assert_eq!(zero.max, 0.0);
        for t in [FRAC_PI_3, 1.0, -2.0] {
            let compat = check_compatibility(&ket0(), &s0, &flow, t).unwrap();
            assert!(compat.passed(1e-9), "{compat:?}");
            let cov = check_covariance(&ket0(), &s0, &flow, t).unwrap();
            assert!(cov.passed(1e-9), "{cov:?}");
            // Trace oracle: ρ_t(P_0) = ρ_0(P_t).
            let p_t = flow.evolve_projection(t, &plus()).unwrap();
            let rho_t = schrodinger_evolve_state(&flow, t, &ket0()).unwrap();
            assert!((rho_t.expectation(plus().matrix()) - ket0().expectation(p_t.matrix())).abs() < 1e-12);
        }
    }

    #[test]
    fn contravariant_composition() {
        let f = qubit_family();
        let s = outer_daseinisation(&plus(), &f).unwrap();
        let a = UnitaryFlow::new(sigma_z()).unitary(0.4);
        let b = UnitaryFlow::new(HermitianOperator::new(sigma_x()).unwrap()).unitary(1.1);
        let ab = a.compose(&b).unwrap();
        let whole = act_on_subobject(&ab, &s).unwrap();
        let staged = act_on_subobject(&a, &act_on_subobject(&b, &s).unwrap()).unwrap();
        assert_eq!(components_on(&staged, whole.family()).unwrap(), whole.components());

        let phi = SpectralAutomorphism::new(a.clone()).compose(&SpectralAutomorphism::new(b.clone())).unwrap();
        let chained = SpectralAutomorphism::new(b).apply(&SpectralAutomorphism::new(a).apply(&s).unwrap()).unwrap();
        let direct = phi.apply(&s).unwrap();
        assert_eq!(components_on(&chained, direct.family()).unwrap(), direct.components());
    }

    #[test]
    fn onto_requires_preimages() {
        let f = diag_family();
        let s = ClopenSubobject::top(Arc::clone(&f));
        let h = UnitaryOperator::new(
            ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, -1.0]]).unwrap().scale_real(0.5f64.sqrt()),
        )
        .unwrap();
        assert!(matches!(act_on_subobject_onto(&h, &s, &f), Err(Error::MissingContext(_))));
    }

    #[test]
    fn flow_identity_on_qubit() {
        let f = qubit_family();
        let flow = UnitaryFlow::new(HermitianOperator::new(sigma_x()).unwrap());
        let p0 = Projection::new(ComplexMatrix::diagonal(&[1.0, 0.0])).unwrap();
        for t in [0.0, 0.5, 2.0] {
            assert!(check_flow_identity(&flow, t, &p0, &f).unwrap().passed());
        }
    }
}
