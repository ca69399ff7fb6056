//! Spectral presheaves of finite-dimensional von Neumann algebras.
//!
//! The crate works with matrix algebras `B(ℂ^d)` and builds, on a finite
//! family of contexts (abelian subalgebras), the spectral presheaf, outer
//! daseinisation of projections, the bi-Heyting algebra of clopen
//! subobjects, the presheaf of classical probability measures and the
//! unitary flows that implement the Heisenberg and Schrödinger pictures.
//!
//! Module map:
//!
//! * [`matrix`] dense complex matrices, Hermitian eigensolver, validated operator types
//! * [`context`] contexts, closed context families and their order
//! * [`spectrum`] characters, restriction maps and global-section search
//! * [`subobject`] clopen subobjects, daseinisation and the bi-Heyting operations
//! * [`measure`] state sections, the state–proposition pairing and the Born rule
//! * [`flow`] unitary automorphisms, time evolution and the picture-compatibility checks
//! * [`scenario`] JSON scenario files and the command implementations behind the CLI

pub mod context;
pub mod error;
pub mod flow;
pub mod format;
pub mod matrix;
pub mod measure;
pub mod random;
pub mod scenario;
pub mod serial;
pub mod spectrum;
pub mod subobject;
pub mod tolerance;

pub use context::{Context, ContextFamily, ContextId};
pub use error::{Error, Result};
pub use matrix::{
    ComplexMatrix, DensityState, HermitianOperator, Projection, UnitaryOperator,
};
pub use tolerance::Tolerances;
