//! Random operators, states, contexts and subobjects for sampling-based
//! checks and property tests.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::context::{Context, ContextFamily};
use crate::matrix::{ComplexMatrix, DensityState, HermitianOperator, Projection, UnitaryOperator};
use crate::subobject::{BlockSet, ClopenSubobject};

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<Complex64> {
    (0..dim)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

/// Orthonormal basis by Gram–Schmidt on Gaussian vectors.
pub fn orthonormal_basis<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<Vec<Complex64>> {
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    while basis.len() < dim {
        let mut v = gaussian_vector(rng, dim);
        for b in &basis {
            let overlap: Complex64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= overlap * bi;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            basis.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    basis
}

pub fn unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> UnitaryOperator {
    let basis = orthonormal_basis(rng, dim);
    let mut rows = vec![Vec::with_capacity(dim); dim];
    for col in &basis {
        for (r, z) in col.iter().enumerate() {
            rows[r].push(*z);
        }
    }
    UnitaryOperator::new(ComplexMatrix::from_rows(rows).expect("square")).expect("orthonormal columns")
}

/// Hermitian matrix with Gaussian entries scaled by `scale`.
pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize, scale: f64) -> HermitianOperator {
    let g = ComplexMatrix::new(dim, gaussian_vector(rng, dim * dim)).expect("square");
    HermitianOperator::new(g.hermitian_part().scale_real(scale)).expect("Hermitian by construction")
}

pub fn projection<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> Projection {
    let basis = orthonormal_basis(rng, dim);
    Projection::onto_orthonormal(&basis[..rank], dim).expect("orthonormal vectors")
}

/// Density matrix `WW†/tr(WW†)` with a Gaussian `W` (full rank almost surely).
pub fn density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityState {
    let w = ComplexMatrix::new(dim, gaussian_vector(rng, dim * dim)).expect("square");
    let m = &w * &w.adjoint();
    let tr = m.trace().re;
    DensityState::new(m.scale_real(1.0 / tr)).expect("positive by construction")
}

pub fn pure_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityState {
    DensityState::pure(&gaussian_vector(rng, dim)).expect("nonzero vector")
}

/// A maximal context from a random orthonormal basis.
pub fn maximal_context<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Context {
    let blocks = orthonormal_basis(rng, dim)
        .iter()
        .map(|v| Projection::onto_vector(v).expect("unit vector"))
        .collect();
    Context::new(blocks).expect("orthonormal basis")
}

/// Random coarsening of `v`: blocks are grouped into at least two parts.
pub fn coarsening<R: Rng + ?Sized>(rng: &mut R, v: &Context) -> Option<Context> {
    let n = v.len();
    if n < 2 {
        return None;
    }
    let parts = rng.random_range(2..=n);
    let mut labels: Vec<usize> = (0..n).map(|i| if i < parts { i } else { rng.random_range(0..parts) }).collect();
    // Shuffle so the guaranteed labels are not always the first blocks.
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        labels.swap(i, j);
    }
    let blocks = (0..parts)
        .map(|g| {
            let members: Vec<&Projection> = (0..n).filter(|&i| labels[i] == g).map(|i| v.block(i)).collect();
            let mut m = ComplexMatrix::zeros(v.dim());
            for p in members {
                m = &m + p.matrix();
            }
            Projection::new(m).expect("sum of orthogonal blocks")
        })
        .collect();
    Context::new(blocks).ok()
}

/// Random refinement of the context `{P, 1 − P}` into a maximal context.
pub fn maximal_context_containing<R: Rng + ?Sized>(rng: &mut R, p: &Projection) -> Context {
    let dim = p.dim();
    let mut blocks = Vec::new();
    for part in [p.clone(), p.complement()] {
        if part.is_zero() {
            continue;
        }
        // Project Gaussian vectors into the range and orthonormalize.
        let mut found: Vec<Vec<Complex64>> = Vec::new();
        while found.len() < part.rank() {
            let g = gaussian_vector(rng, dim);
            let mut v: Vec<Complex64> =
                (0..dim).map(|r| (0..dim).map(|k| part.matrix()[(r, k)] * g[k]).sum()).collect();
            for b in &found {
                let overlap: Complex64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= overlap * bi;
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-6 {
                found.push(v.into_iter().map(|z| z / norm).collect());
            }
        }
        blocks.extend(found.iter().map(|v| Projection::onto_vector(v).expect("unit vector")));
    }
    Context::new(blocks).expect("orthonormal refinement")
}

/// Smallest subobject containing independently random components.
pub fn subobject<R: Rng + ?Sized>(rng: &mut R, family: &Arc<ContextFamily>, density: f64) -> ClopenSubobject {
    let raw: Vec<BlockSet> = family
        .contexts()
        .iter()
        .map(|c| BlockSet::from_indices((0..c.len()).filter(|_| rng.random_bool(density))))
        .collect();
    ClopenSubobject::generated_by(Arc::clone(family), &raw).expect("closure is a subobject")
}
