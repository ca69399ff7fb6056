//! Shared generators and direct-arithmetic oracles for the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectral_topos::context::close_family;
use spectral_topos::random;
use spectral_topos::{ComplexMatrix, Context, ContextFamily, Projection};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A family of at most `max` contexts containing `{P, 1 − P}` and a maximal
/// refinement of it, padded with random maximal contexts and coarsenings.
pub fn family_around<R: Rng>(rng: &mut R, p: &Projection, max: usize) -> Arc<ContextFamily> {
    let d = p.dim();
    loop {
        let refined = random::maximal_context_containing(rng, p);
        let mut seeds = vec![refined.clone(), Context::new(vec![p.clone(), p.complement()]).unwrap()];
        if d >= 3 && rng.random_bool(0.5) {
            seeds.extend(random::coarsening(rng, &refined));
        }
        for _ in 0..rng.random_range(0..=2) {
            let v = random::maximal_context(rng, d);
            if d >= 3 && rng.random_bool(0.5) {
                seeds.extend(random::coarsening(rng, &v));
            }
            seeds.push(v);
        }
        let family = close_family(&seeds).unwrap();
        if family.len() <= max {
            return Arc::new(family);
        }
    }
}

/// Random projection of rank strictly between 0 and `d`.
pub fn proper_projection<R: Rng>(rng: &mut R, d: usize) -> Projection {
    let rank = rng.random_range(1..d);
    random::projection(rng, d, rank)
}

fn mat(dim: usize, data: Vec<Complex64>) -> ComplexMatrix {
    ComplexMatrix::new(dim, data).unwrap()
}

fn mul(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let n = a.dim();
    let (x, y) = (a.entries(), b.entries());
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for k in 0..n {
            let xik = x[i * n + k];
            for j in 0..n {
                out[i * n + j] += xik * y[k * n + j];
            }
        }
    }
    mat(n, out)
}

/// `exp(itH)` by scaling and squaring of a Taylor series; shares no code
/// with the spectral route used by the library.
pub fn expm_it(h: &ComplexMatrix, t: f64) -> ComplexMatrix {
    let n = h.dim();
    let norm = h.frobenius_norm() * t.abs();
    let squarings = if norm > 0.25 { (norm / 0.25).log2().ceil() as u32 } else { 0 };
    let scale = Complex64::new(0.0, t / f64::from(1u32 << squarings));
    let a = mat(n, h.entries().iter().map(|z| z * scale).collect());
    let mut sum = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..=24 {
        term = mul(&term, &a);
        term = mat(n, term.entries().iter().map(|z| z / k as f64).collect());
        sum = mat(n, sum.entries().iter().zip(term.entries()).map(|(x, y)| x + y).collect());
    }
    for _ in 0..squarings {
        sum = mul(&sum, &sum);
    }
    sum
}

pub fn adjoint(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.dim();
    mat(n, (0..n * n).map(|k| a.entries()[(k % n) * n + k / n].conj()).collect())
}

/// `U A U*`.
pub fn sandwich(u: &ComplexMatrix, a: &ComplexMatrix) -> ComplexMatrix {
    mul(&mul(u, a), &adjoint(u))
}

/// `Re tr(AB)`.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            s += a.entries()[i * n + k] * b.entries()[k * n + i];
        }
    }
    s.re
}

/// `‖AB‖_F`.
pub fn product_norm(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    mul(a, b).frobenius_norm()
}

/// `P ≤ Q` by `‖QP − P‖ ≤ 1e-9`.
pub fn below(p: &ComplexMatrix, q: &ComplexMatrix) -> bool {
    let qp = mul(q, p);
    qp.entries().iter().zip(p.entries()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt() <= 1e-9
}

/// Restriction maps computed from the matrices: fine block `i` goes to the
/// coarse block dominating it.
pub fn restriction_oracle(fine: &Context, coarse: &Context) -> Vec<usize> {
    fine.blocks()
        .iter()
        .map(|b| {
            let hits: Vec<usize> =
                (0..coarse.len()).filter(|&j| below(b.matrix(), coarse.block(j).matrix())).collect();
            assert_eq!(hits.len(), 1, "each fine block has exactly one dominating coarse block");
            hits[0]
        })
        .collect()
}

/// Order and restriction maps of a family recomputed from its matrices.
pub struct OrderOracle {
    /// `leq[a][b]`: context `a` is a coarsening of context `b`.
    pub leq: Vec<Vec<bool>>,
    /// `maps[b][a]`: restriction from fine `b` to coarse `a` when `a ≤ b`.
    pub maps: Vec<Vec<Option<Vec<usize>>>>,
}

impl OrderOracle {
    pub fn new(family: &ContextFamily) -> Self {
        let n = family.len();
        let leq: Vec<Vec<bool>> = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        let (coarse, fine) = (family.context(a), family.context(b));
                        fine.blocks()
                            .iter()
                            .all(|q| coarse.blocks().iter().any(|p| below(q.matrix(), p.matrix())))
                    })
                    .collect()
            })
            .collect();
        let maps = (0..n)
            .map(|b| {
                (0..n)
                    .map(|a| leq[a][b].then(|| restriction_oracle(family.context(b), family.context(a))))
                    .collect()
            })
            .collect();
        Self { leq, maps }
    }

    /// Pairs `(coarse, fine)` with `coarse ≤ fine`, reflexive ones included.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let n = self.leq.len();
        (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).filter(|&(a, b)| self.leq[a][b]).collect()
    }
}
