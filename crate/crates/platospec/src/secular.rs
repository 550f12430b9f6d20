//! Assembly of the 2N x 2N secular matrix M(k) and its zero detectors.
//!
//! Each edge carries the Ansatz `f_e(x) = a_e cos(kx) + b_e sin(kx)`. Every
//! vertex of degree d contributes d rows of `(U - I) psi + i (U + I) psi'`
//! expressed in the coefficients `(a_e, b_e)`, giving a square matrix whose
//! singular k are exactly the square roots of eigenvalues. Zero detection
//! uses the smallest singular value of the row-normalized matrix; the raw
//! determinant grows like k^(2N) and is kept only as a cross-check.

use crate::coupling::{C64, CouplingError, VertexCoupling};
use crate::graph::{End, GraphError, MetricGraph};
use nalgebra::DMatrix;
use thiserror::Error;

/// Multiplicity threshold coefficient: singular values below
/// `1e-6 * sqrt(2N)` count toward the null-space dimension.
pub const MULT_TOL_COEFF: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum SecularError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Coupling(#[from] CouplingError),
    #[error("graph failed validation: {0}")]
    InvalidGraph(String),
    #[error("need one coupling per vertex: {have} couplings for {want} vertices")]
    CouplingCount { have: usize, want: usize },
    #[error("k must be positive, got {0}")]
    NonPositiveK(f64),
}

/// A coupled graph ready for spectral evaluation.
#[derive(Debug, Clone)]
pub struct SecularSystem {
    graph: MetricGraph,
    /// Per-vertex condition rows (A, B) = (U - I, i(U + I)).
    rows: Vec<(DMatrix<C64>, DMatrix<C64>)>,
    dim: usize,
}

/// Smallest singular value of the row-normalized M(k) plus the count of
/// singular values under the multiplicity threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaStats {
    pub sigma_min: f64,
    /// Candidate eigenvalue multiplicity at this k.
    pub near_zero_count: usize,
    /// Count at the strict acceptance level (1e-8).
    pub accept_count: usize,
}

impl SecularSystem {
    pub fn new(graph: MetricGraph, couplings: Vec<VertexCoupling>) -> Result<Self, SecularError> {
        let report = graph.validate();
        if !report.is_clean() {
            let msgs: Vec<String> = report.issues.iter().map(|i| i.to_string()).collect();
            return Err(SecularError::InvalidGraph(msgs.join("; ")));
        }
        if couplings.len() != graph.vertices().len() {
            return Err(SecularError::CouplingCount {
                have: couplings.len(),
                want: graph.vertices().len(),
            });
        }
        for (v, u) in graph.vertices().iter().zip(&couplings) {
            if u.dim() != v.degree() {
                return Err(CouplingError::DegreeMismatch {
                    vertex: v.id,
                    have: u.dim(),
                    want: v.degree(),
                }
                .into());
            }
        }
        let dim = 2 * graph.edge_count();
        let rows = couplings.iter().map(VertexCoupling::rows).collect();
        Ok(SecularSystem { graph, rows, dim })
    }

    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    /// Matrix dimension 2N.
    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn mult_tol(&self) -> f64 {
        MULT_TOL_COEFF * (self.dim as f64).sqrt()
    }

    /// The raw secular matrix M(k).
    pub fn assemble(&self, k: f64) -> Result<DMatrix<C64>, SecularError> {
        if !(k > 0.0) {
            return Err(SecularError::NonPositiveK(k));
        }
        let (ck, sk) = (k.cos(), k.sin());
        let mut m = DMatrix::<C64>::zeros(self.dim, self.dim);
        let mut row0 = 0;
        for (v, (a, b)) in self.graph.vertices().iter().zip(&self.rows) {
            let d = v.degree();
            for (slot, e) in v.ends.iter().enumerate() {
                let (ca, cb) = (2 * e.edge, 2 * e.edge + 1);
                for r in 0..d {
                    let (ar, br) = (a[(r, slot)], b[(r, slot)]);
                    match e.end {
                        // value = a_e, outgoing derivative = k b_e
                        End::Zero => {
                            m[(row0 + r, ca)] += ar;
                            m[(row0 + r, cb)] += br * k;
                        }
                        // value = a_e cos k + b_e sin k,
                        // outgoing derivative = k (a_e sin k - b_e cos k)
                        End::One => {
                            m[(row0 + r, ca)] += ar * ck + br * (k * sk);
                            m[(row0 + r, cb)] += ar * sk - br * (k * ck);
                        }
                    }
                }
            }
            row0 += d;
        }
        Ok(m)
    }

    /// M(k) with every row scaled to unit max-norm.
    pub fn assemble_normalized(&self, k: f64) -> Result<DMatrix<C64>, SecularError> {
        let mut m = self.assemble(k)?;
        for r in 0..self.dim {
            let mut max = 0.0f64;
            for c in 0..self.dim {
                max = max.max(m[(r, c)].norm());
            }
            if max > 0.0 {
                for c in 0..self.dim {
                    m[(r, c)] /= max;
                }
            }
        }
        Ok(m)
    }

    fn singular_values(&self, k: f64) -> Result<Vec<f64>, SecularError> {
        let m = self.assemble_normalized(k)?;
        let mut sv: Vec<f64> = m.svd(false, false).singular_values.iter().cloned().collect();
        sv.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(sv)
    }

    /// Zero detector: smallest singular value and near-zero counts of the
    /// row-normalized matrix.
    pub fn sigma(&self, k: f64) -> Result<SigmaStats, SecularError> {
        let sv = self.singular_values(k)?;
        let tol = self.mult_tol();
        Ok(SigmaStats {
            sigma_min: sv[0],
            near_zero_count: sv.iter().filter(|&&s| s < tol).count(),
            accept_count: sv.iter().filter(|&&s| s <= 1e-8).count(),
        })
    }

    pub fn sigma_min(&self, k: f64) -> Result<f64, SecularError> {
        Ok(self.singular_values(k)?[0])
    }

    /// Determinant of the row-normalized matrix (cross-check detector).
    pub fn det_normalized(&self, k: f64) -> Result<C64, SecularError> {
        Ok(self.assemble_normalized(k)?.determinant())
    }

    /// Orthonormal basis of the numerical null space at an accepted k: the
    /// right singular vectors of the `count` smallest singular values,
    /// returned per edge as `(a_e, b_e)` pairs.
    pub fn null_space(&self, k: f64, count: usize) -> Result<Vec<Vec<(C64, C64)>>, SecularError> {
        let m = self.assemble_normalized(k)?;
        let svd = m.clone().svd(false, true);
        let vt = svd.v_t.expect("requested v_t");
        let mut order: Vec<usize> = (0..self.dim).collect();
        order.sort_by(|&i, &j| svd.singular_values[i].partial_cmp(&svd.singular_values[j]).unwrap());
        let mut basis = Vec::with_capacity(count);
        for &idx in order.iter().take(count) {
            // rows of V^H are conjugated right singular vectors
            let v: Vec<C64> = (0..self.dim).map(|c| vt[(idx, c)].conj()).collect();
            let coeffs: Vec<(C64, C64)> =
                (0..self.graph.edge_count()).map(|e| (v[2 * e], v[2 * e + 1])).collect();
            basis.push(coeffs);
        }
        Ok(basis)
    }

    /// Residual `||M v||` of a coefficient vector against the row-normalized
    /// matrix.
    pub fn residual(&self, k: f64, coeffs: &[(C64, C64)]) -> Result<f64, SecularError> {
        let m = self.assemble_normalized(k)?;
        let v = DMatrix::<C64>::from_fn(self.dim, 1, |r, _| {
            let (a, b) = coeffs[r / 2];
            if r % 2 == 0 { a } else { b }
        });
        Ok((m * v).norm())
    }
}

/// Convenience: one identical coupling spec at every vertex.
pub fn uniform_system(
    graph: MetricGraph,
    spec: &crate::coupling::CouplingSpec,
) -> Result<SecularSystem, SecularError> {
    let couplings = crate::coupling::CouplingAssignment::uniform(spec.clone()).build_for(&graph)?;
    SecularSystem::new(graph, couplings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::CouplingSpec;
    use crate::graph::{build_platonic, single_edge, Solid};
    use std::f64::consts::PI;

    fn po_system(solid: Solid) -> SecularSystem {
        uniform_system(build_platonic(solid), &CouplingSpec::PreferredOrientation).unwrap()
    }

    #[test]
    fn single_edge_dirichlet_zeros_at_n_pi() {
        let sys = uniform_system(single_edge(), &CouplingSpec::Dirichlet).unwrap();
        assert_eq!(sys.dimension(), 2);
        for n in 1..=3 {
            let s = sys.sigma(n as f64 * PI).unwrap();
            assert!(s.sigma_min < 1e-12, "n={n} sigma {}", s.sigma_min);
            assert_eq!(s.near_zero_count, 1);
        }
        assert!(sys.sigma_min(1.0).unwrap() > 1e-3);
        assert!(sys.sigma_min(PI / 2.0).unwrap() > 1e-3);
    }

    #[test]
    fn single_edge_neumann_zeros_at_n_pi() {
        let sys = uniform_system(single_edge(), &CouplingSpec::Neumann).unwrap();
        for n in 1..=3 {
            assert!(sys.sigma_min(n as f64 * PI).unwrap() < 1e-12);
        }
        assert!(sys.sigma_min(2.0).unwrap() > 1e-3);
    }

    #[test]
    fn tetrahedron_po_exact_at_two_pi() {
        let sys = po_system(Solid::Tetrahedron);
        let s = sys.sigma(2.0 * PI).unwrap();
        assert!(s.sigma_min <= 1e-8, "sigma {}", s.sigma_min);
        assert_eq!(s.near_zero_count, 4);
    }

    #[test]
    fn octahedron_po_multiplicities() {
        let sys = po_system(Solid::Octahedron);
        for (k, want) in [(2.0 * PI, 8), (2.0 * PI / 3.0, 2), (4.0 * PI / 3.0, 2)] {
            let s = sys.sigma(k).unwrap();
            assert!(s.sigma_min <= 1e-8, "k={k} sigma {}", s.sigma_min);
            assert_eq!(s.near_zero_count, want, "k={k}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let sys = po_system(Solid::Tetrahedron);
        assert!(matches!(sys.assemble(0.0), Err(SecularError::NonPositiveK(_))));
        assert!(matches!(sys.assemble(-1.0), Err(SecularError::NonPositiveK(_))));

        let g = build_platonic(Solid::Cube);
        let wrong = vec![VertexCoupling::delta(4, 0.0).unwrap(); 8];
        assert!(matches!(
            SecularSystem::new(g, wrong),
            Err(SecularError::Coupling(CouplingError::DegreeMismatch { .. }))
        ));

        let g = build_platonic(Solid::Cube);
        let too_few = vec![VertexCoupling::delta(3, 0.0).unwrap(); 7];
        assert!(matches!(SecularSystem::new(g, too_few), Err(SecularError::CouplingCount { .. })));
    }

    #[test]
    fn det_and_sigma_agree_on_zero_set() {
        let sys = po_system(Solid::Tetrahedron);
        // at known zeros the normalized determinant also collapses
        for k in [2.0 * PI, 4.0 * PI] {
            assert!(sys.det_normalized(k).unwrap().norm() < 1e-10);
        }
        // away from zeros both detectors are comfortably nonzero
        for k in [1.0, 2.0, 3.0, 5.0] {
            assert!(sys.sigma_min(k).unwrap() > 1e-4, "k={k}");
            assert!(sys.det_normalized(k).unwrap().norm() > 1e-10, "k={k}");
        }
    }

    #[test]
    fn null_space_residuals_are_small() {
        let sys = po_system(Solid::Octahedron);
        let k = 2.0 * PI;
        let basis = sys.null_space(k, 8).unwrap();
        assert_eq!(basis.len(), 8);
        for v in &basis {
            assert!(sys.residual(k, v).unwrap() <= 1e-7);
        }
    }
}
