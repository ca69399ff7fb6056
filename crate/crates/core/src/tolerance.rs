//! Numerical thresholds used throughout the crate.
//!
//! Every operation reads its thresholds from [`Tolerances::DEFAULT`] unless a
//! `_with` variant is called with an explicit record.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Hermiticity, scaled by the dimension: ‖M − M†‖_F ≤ hermitian·d.
    pub hermitian: f64,
    /// ‖P² − P‖_F and |tr P − rank P|.
    pub projection: f64,
    /// ‖UU† − I‖_F.
    pub unitary: f64,
    /// Smallest admissible eigenvalue of a density matrix is −positivity.
    pub positivity: f64,
    /// |tr ρ − 1|.
    pub trace: f64,
    /// Eigenvalues closer than this are merged into one eigenprojection.
    pub cluster: f64,
    /// ‖[A, B]‖_F below this counts as commuting.
    pub commute: f64,
    /// ‖PQ‖_F above this counts as overlapping (orthogonality, membership, daseinisation).
    pub overlap: f64,
    /// Frobenius distance under which two projections or contexts are equal.
    pub equality: f64,
    /// Rounding grid for canonical ordering and context ids.
    pub rounding: f64,
    /// Probabilities within this of 0 or 1 are clamped into [0, 1].
    pub clamp: f64,
    /// Pass threshold for identity checks.
    pub check: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        hermitian: 1e-10,
        projection: 1e-9,
        unitary: 1e-9,
        positivity: 1e-10,
        trace: 1e-9,
        cluster: 1e-8,
        commute: 1e-8,
        overlap: 1e-9,
        equality: 1e-8,
        rounding: 1e-6,
        clamp: 1e-12,
        check: 1e-9,
    };

    /// Same record with a different pass threshold for identity checks.
    pub fn with_check(mut self, check: f64) -> Self {
        self.check = check;
        self
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
