//! Spectral solver for equilateral quantum graphs on the Platonic solids.
//!
//! The library builds the five Platonic skeleton graphs, equips every vertex
//! with a unitary coupling (delta or preferred-orientation), assembles the
//! secular matrix M(k), locates the positive spectrum through its smallest
//! singular value, and checks the high-energy clustering of the eigenvalues
//! against per-solid interval envelopes.

pub mod asymptotics;
pub mod coupling;
pub mod graph;
pub mod io;
pub mod oracle;
pub mod rootfind;
pub mod secular;

pub use coupling::{BoundaryCondition, CouplingAssignment, CouplingKind, CouplingSpec, VertexCoupling, C64};
pub use graph::{build_platonic, single_edge, End, EdgeEnd, MetricGraph, Solid, ValidationReport, Vertex};
pub use rootfind::{Eigenvalue, ScanOptions, Spectrum};
pub use secular::{SecularSystem, SigmaStats};
