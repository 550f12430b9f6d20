//! Unitary vertex couplings and degree-1 boundary conditions.
//!
//! A vertex condition is `(U - I) psi + i (U + I) psi' = 0` with `U` unitary,
//! `psi` the boundary values and `psi'` the outgoing derivatives at the
//! vertex. The two couplings under study are the delta coupling
//! `U = 2/(d + i*alpha) J - I` and the preferred-orientation coupling whose
//! `U` is the cyclic shift permutation.

use crate::graph::MetricGraph;
use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

pub type C64 = Complex<f64>;

/// Unitarity is enforced on custom matrices to this max-norm defect.
pub const CUSTOM_UNITARITY_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum CouplingError {
    #[error("delta coupling needs degree >= 1, got {0}")]
    DeltaDegree(usize),
    #[error("preferred-orientation coupling needs degree >= 2, got {0}")]
    PreferredOrientationDegree(usize),
    #[error("custom matrix must be square, got {0}x{1}")]
    NotSquare(usize, usize),
    #[error("custom matrix is not unitary (defect {0:.3e} > {CUSTOM_UNITARITY_TOL:.0e})")]
    NotUnitary(f64),
    #[error("coupling dimension {have} does not match vertex degree {want} at vertex {vertex}")]
    DegreeMismatch { vertex: usize, have: usize, want: usize },
    #[error("boundary condition '{0}' only applies to degree-1 vertices")]
    BoundaryOnInteriorVertex(String),
    #[error("bad coupling file: {0}")]
    BadFile(String),
}

/// How a coupling was constructed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CouplingKind {
    Delta { alpha: f64 },
    PreferredOrientation,
    Custom,
}

/// Endpoint condition for a degree-1 vertex, in the outgoing-derivative
/// convention: Dirichlet is `f = 0`, Neumann `f' = 0`, Robin `f' = c*f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
    Robin(C64),
}

impl BoundaryCondition {
    /// The 1x1 unitary realizing this condition: `U = (1 - ic)/(1 + ic)`.
    pub fn unitary(self) -> C64 {
        match self {
            BoundaryCondition::Dirichlet => C64::new(-1.0, 0.0),
            BoundaryCondition::Neumann => C64::new(1.0, 0.0),
            BoundaryCondition::Robin(c) => {
                let i = C64::new(0.0, 1.0);
                (C64::new(1.0, 0.0) - i * c) / (C64::new(1.0, 0.0) + i * c)
            }
        }
    }
}

/// A d x d unitary vertex coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexCoupling {
    matrix: DMatrix<C64>,
    kind: CouplingKind,
}

impl VertexCoupling {
    /// Delta coupling of strength `alpha`: `U = 2/(d + i*alpha) J - I`.
    pub fn delta(d: usize, alpha: f64) -> Result<Self, CouplingError> {
        if d < 1 {
            return Err(CouplingError::DeltaDegree(d));
        }
        let w = C64::new(2.0, 0.0) / C64::new(d as f64, alpha);
        let mut m = DMatrix::from_element(d, d, w);
        for i in 0..d {
            m[(i, i)] -= C64::new(1.0, 0.0);
        }
        Ok(VertexCoupling { matrix: m, kind: CouplingKind::Delta { alpha } })
    }

    /// Preferred-orientation coupling: row m has its 1 in column (m+1) mod d.
    pub fn preferred_orientation(d: usize) -> Result<Self, CouplingError> {
        if d < 2 {
            return Err(CouplingError::PreferredOrientationDegree(d));
        }
        let mut m = DMatrix::zeros(d, d);
        for i in 0..d {
            m[(i, (i + 1) % d)] = C64::new(1.0, 0.0);
        }
        Ok(VertexCoupling { matrix: m, kind: CouplingKind::PreferredOrientation })
    }

    /// Arbitrary unitary coupling; rejected unless the unitarity defect is
    /// within [`CUSTOM_UNITARITY_TOL`].
    pub fn custom(matrix: DMatrix<C64>) -> Result<Self, CouplingError> {
        if matrix.nrows() != matrix.ncols() {
            return Err(CouplingError::NotSquare(matrix.nrows(), matrix.ncols()));
        }
        let c = VertexCoupling { matrix, kind: CouplingKind::Custom };
        let defect = c.unitarity_defect();
        if defect > CUSTOM_UNITARITY_TOL {
            return Err(CouplingError::NotUnitary(defect));
        }
        Ok(c)
    }

    pub fn from_boundary(bc: BoundaryCondition) -> Self {
        VertexCoupling {
            matrix: DMatrix::from_element(1, 1, bc.unitary()),
            kind: CouplingKind::Custom,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn kind(&self) -> CouplingKind {
        self.kind
    }

    /// Max-norm of `U* U - I`.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.dim();
        let prod = self.matrix.adjoint() * &self.matrix;
        let mut defect: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let want = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                defect = defect.max((prod[(i, j)] - want).norm());
            }
        }
        defect
    }

    /// The condition rows `(A, B) = (U - I, i(U + I))`, so that the vertex
    /// condition reads `A psi + B psi' = 0`.
    pub fn rows(&self) -> (DMatrix<C64>, DMatrix<C64>) {
        let d = self.dim();
        let eye = DMatrix::<C64>::identity(d, d);
        let a = &self.matrix - &eye;
        let b = (&self.matrix + &eye).map(|z| z * C64::new(0.0, 1.0));
        (a, b)
    }

    /// Complex conjugate coupling (time reversal of the vertex condition).
    pub fn conjugated(&self) -> Self {
        VertexCoupling { matrix: self.matrix.map(|z| z.conj()), kind: CouplingKind::Custom }
    }

    /// Transposed coupling (reversed cyclic orientation for permutations).
    pub fn transposed(&self) -> Self {
        VertexCoupling { matrix: self.matrix.transpose(), kind: CouplingKind::Custom }
    }
}

/// One coupling choice in an assignment file.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CouplingSpec {
    Delta { alpha: f64 },
    PreferredOrientation,
    Dirichlet,
    Neumann,
    Robin { c: [f64; 2] },
    /// Row-major d x d matrix of [re, im] pairs.
    Custom { matrix: Vec<Vec<[f64; 2]>> },
}

impl CouplingSpec {
    pub fn build(&self, degree: usize) -> Result<VertexCoupling, CouplingError> {
        match self {
            CouplingSpec::Delta { alpha } => VertexCoupling::delta(degree, *alpha),
            CouplingSpec::PreferredOrientation => VertexCoupling::preferred_orientation(degree),
            CouplingSpec::Dirichlet => {
                // -I is Dirichlet on every end; for degree 1 this is the
                // standard endpoint condition
                let m = DMatrix::from_diagonal_element(degree, degree, C64::new(-1.0, 0.0));
                VertexCoupling::custom(m)
            }
            CouplingSpec::Neumann => {
                let m = DMatrix::from_diagonal_element(degree, degree, C64::new(1.0, 0.0));
                VertexCoupling::custom(m)
            }
            CouplingSpec::Robin { c } => {
                if degree != 1 {
                    return Err(CouplingError::BoundaryOnInteriorVertex("robin".into()));
                }
                Ok(VertexCoupling::from_boundary(BoundaryCondition::Robin(C64::new(c[0], c[1]))))
            }
            CouplingSpec::Custom { matrix } => {
                let d = matrix.len();
                if matrix.iter().any(|row| row.len() != d) {
                    return Err(CouplingError::NotSquare(d, matrix.iter().map(Vec::len).max().unwrap_or(0)));
                }
                if d != degree {
                    return Err(CouplingError::DegreeMismatch { vertex: usize::MAX, have: d, want: degree });
                }
                let m = DMatrix::from_fn(d, d, |i, j| C64::new(matrix[i][j][0], matrix[i][j][1]));
                VertexCoupling::custom(m)
            }
        }
    }
}

/// Per-graph coupling assignment: a default plus per-vertex overrides.
///
/// Accepts either `{"default": {...}, "overrides": {"3": {...}}}` or a bare
/// coupling spec such as `{"kind": "preferred_orientation"}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CouplingAssignment {
    pub default: CouplingSpec,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub overrides: BTreeMap<usize, CouplingSpec>,
}

impl CouplingAssignment {
    pub fn uniform(spec: CouplingSpec) -> Self {
        CouplingAssignment { default: spec, overrides: BTreeMap::new() }
    }

    pub fn from_json(text: &str) -> Result<Self, CouplingError> {
        if let Ok(full) = serde_json::from_str::<CouplingAssignment>(text) {
            return Ok(full);
        }
        let bare: CouplingSpec =
            serde_json::from_str(text).map_err(|e| CouplingError::BadFile(e.to_string()))?;
        Ok(CouplingAssignment::uniform(bare))
    }

    /// Builds one coupling per vertex, in vertex order.
    pub fn build_for(&self, graph: &MetricGraph) -> Result<Vec<VertexCoupling>, CouplingError> {
        graph
            .vertices()
            .iter()
            .map(|v| {
                let spec = self.overrides.get(&v.id).unwrap_or(&self.default);
                spec.build(v.degree()).map_err(|e| match e {
                    CouplingError::DegreeMismatch { have, want, .. } => {
                        CouplingError::DegreeMismatch { vertex: v.id, have, want }
                    }
                    other => other,
                })
            })
            .collect()
    }
}
