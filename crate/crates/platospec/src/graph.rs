//! Equilateral metric graphs with oriented edge ends.
//!
//! Every edge is a copy of the unit interval; an [`EdgeEnd`] names one of its
//! two endpoints. Each vertex owns an *ordered* list of incident ends — the
//! list order is the cyclic order seen by orientation-sensitive couplings, so
//! rotating it is harmless while reversing it is not. Constructors for the
//! five Platonic skeletons derive that order from embedded coordinates:
//! incident edges are sorted clockwise around the outward vertex normal, as
//! viewed from outside the solid.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use thiserror::Error;

/// Which endpoint of the unit-interval parametrization an edge end refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum End {
    Zero,
    One,
}

impl End {
    pub fn flipped(self) -> End {
        match self {
            End::Zero => End::One,
            End::One => End::Zero,
        }
    }
}

impl Serialize for End {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(match self {
            End::Zero => 0,
            End::One => 1,
        })
    }
}

impl<'de> Deserialize<'de> for End {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match u8::deserialize(d)? {
            0 => Ok(End::Zero),
            1 => Ok(End::One),
            v => Err(serde::de::Error::custom(format!("edge end must be 0 or 1, got {v}"))),
        }
    }
}

/// One endpoint of one edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdgeEnd {
    pub edge: usize,
    pub end: End,
}

/// A vertex together with its cyclically ordered incident edge ends.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: usize,
    pub ends: Vec<EdgeEnd>,
}

impl Vertex {
    pub fn degree(&self) -> usize {
        self.ends.len()
    }
}

/// A finite equilateral metric graph (all edge lengths 1).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricGraph {
    vertices: Vec<Vertex>,
    edge_count: usize,
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("unknown vertex id {0}")]
    UnknownVertex(usize),
    #[error("unknown edge id {0}")]
    UnknownEdge(usize),
    #[error("invalid graph: {0}")]
    Invalid(String),
}

/// One defect found by [`MetricGraph::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum ValidationIssue {
    /// An edge end appears in more than one vertex list.
    DuplicateEnd(EdgeEnd),
    /// An edge end appears in no vertex list (degree sum < 2N).
    DanglingEnd(EdgeEnd),
    /// An edge id out of range `0..edge_count`.
    UnknownEdge(usize),
    /// Vertex ids are not `0..vertex_count`.
    BadVertexIds,
    /// The graph is not connected.
    Disconnected,
}

impl std::fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ValidationIssue::DuplicateEnd(e) => write!(f, "duplicate end: edge {} end {:?}", e.edge, e.end),
            ValidationIssue::DanglingEnd(e) => write!(f, "dangling end: edge {} end {:?}", e.edge, e.end),
            ValidationIssue::UnknownEdge(e) => write!(f, "unknown edge id {e}"),
            ValidationIssue::BadVertexIds => write!(f, "vertex ids are not contiguous from 0"),
            ValidationIssue::Disconnected => write!(f, "graph is not connected"),
        }
    }
}

/// Outcome of structural validation; an empty issue list means valid.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.issues.is_empty()
    }
}

impl MetricGraph {
    /// Assembles a graph from parts without validating; call
    /// [`MetricGraph::validate`] to check the invariants.
    pub fn new(vertices: Vec<Vertex>, edge_count: usize) -> Self {
        MetricGraph { vertices, edge_count }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, id: usize) -> Result<&Vertex, GraphError> {
        self.vertices.iter().find(|v| v.id == id).ok_or(GraphError::UnknownVertex(id))
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn degree_sum(&self) -> usize {
        self.vertices.iter().map(Vertex::degree).sum()
    }

    /// Checks end pairing, degree-sum consistency and connectedness.
    pub fn validate(&self) -> ValidationReport {
        let mut issues = Vec::new();
        let ids_ok = {
            let mut ids: Vec<usize> = self.vertices.iter().map(|v| v.id).collect();
            ids.sort_unstable();
            ids == (0..self.vertices.len()).collect::<Vec<_>>()
        };
        if !ids_ok {
            issues.push(ValidationIssue::BadVertexIds);
        }
        // seen[edge][end as usize] counts occurrences across vertex lists
        let mut seen = vec![[0usize; 2]; self.edge_count];
        for v in &self.vertices {
            for e in &v.ends {
                if e.edge >= self.edge_count {
                    issues.push(ValidationIssue::UnknownEdge(e.edge));
                    continue;
                }
                seen[e.edge][(e.end == End::One) as usize] += 1;
            }
        }
        for (edge, counts) in seen.iter().enumerate() {
            for (slot, &n) in counts.iter().enumerate() {
                let end = if slot == 0 { End::Zero } else { End::One };
                if n > 1 {
                    issues.push(ValidationIssue::DuplicateEnd(EdgeEnd { edge, end }));
                } else if n == 0 {
                    issues.push(ValidationIssue::DanglingEnd(EdgeEnd { edge, end }));
                }
            }
        }
        if issues.is_empty() && !self.is_connected() {
            issues.push(ValidationIssue::Disconnected);
        }
        ValidationReport { issues }
    }

    fn is_connected(&self) -> bool {
        if self.vertices.is_empty() {
            return true;
        }
        // vertices sharing an edge are adjacent
        let mut owner = vec![[usize::MAX; 2]; self.edge_count];
        for (vi, v) in self.vertices.iter().enumerate() {
            for e in &v.ends {
                owner[e.edge][(e.end == End::One) as usize] = vi;
            }
        }
        let mut seen = vec![false; self.vertices.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(vi) = queue.pop_front() {
            for e in &self.vertices[vi].ends {
                let other = owner[e.edge][(e.end == End::Zero) as usize];
                if other != usize::MAX && !seen[other] {
                    seen[other] = true;
                    queue.push_back(other);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// Returns a copy with the named vertex's end list cyclically rotated
    /// left by `shift` positions.
    pub fn rotate_vertex_order(&self, vertex_id: usize, shift: usize) -> Result<MetricGraph, GraphError> {
        let mut out = self.clone();
        let v = out
            .vertices
            .iter_mut()
            .find(|v| v.id == vertex_id)
            .ok_or(GraphError::UnknownVertex(vertex_id))?;
        if !v.ends.is_empty() {
            let d = v.ends.len();
            v.ends.rotate_left(shift % d);
        }
        Ok(out)
    }

    /// Returns a copy with the Zero/One assignment of one edge swapped.
    pub fn flip_edge_orientation(&self, edge_id: usize) -> Result<MetricGraph, GraphError> {
        if edge_id >= self.edge_count {
            return Err(GraphError::UnknownEdge(edge_id));
        }
        let mut out = self.clone();
        for v in &mut out.vertices {
            for e in &mut v.ends {
                if e.edge == edge_id {
                    e.end = e.end.flipped();
                }
            }
        }
        Ok(out)
    }

    /// Multiset of sorted breadth-first layer degree sequences rooted at a
    /// vertex; equal fingerprints from every root are a cheap necessary
    /// condition for vertex transitivity.
    pub fn bfs_layer_fingerprint(&self, root: usize) -> Result<Vec<Vec<usize>>, GraphError> {
        let vi = self
            .vertices
            .iter()
            .position(|v| v.id == root)
            .ok_or(GraphError::UnknownVertex(root))?;
        let mut owner = vec![[usize::MAX; 2]; self.edge_count];
        for (i, v) in self.vertices.iter().enumerate() {
            for e in &v.ends {
                owner[e.edge][(e.end == End::One) as usize] = i;
            }
        }
        let mut depth = vec![usize::MAX; self.vertices.len()];
        depth[vi] = 0;
        let mut queue = VecDeque::from([vi]);
        while let Some(u) = queue.pop_front() {
            for e in &self.vertices[u].ends {
                let other = owner[e.edge][(e.end == End::Zero) as usize];
                if other != usize::MAX && depth[other] == usize::MAX {
                    depth[other] = depth[u] + 1;
                    queue.push_back(other);
                }
            }
        }
        let max_depth = depth.iter().copied().filter(|&d| d != usize::MAX).max().unwrap_or(0);
        let mut layers = vec![Vec::new(); max_depth + 1];
        for (i, &d) in depth.iter().enumerate() {
            if d != usize::MAX {
                layers[d].push(self.vertices[i].degree());
            }
        }
        for layer in &mut layers {
            layer.sort_unstable();
        }
        Ok(layers)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        serde_json::from_str(text).map_err(|e| GraphError::Invalid(e.to_string()))
    }
}

/// The five Platonic solids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solid {
    Tetrahedron,
    Cube,
    Octahedron,
    Dodecahedron,
    Icosahedron,
}

impl Solid {
    pub const ALL: [Solid; 5] = [
        Solid::Tetrahedron,
        Solid::Cube,
        Solid::Octahedron,
        Solid::Dodecahedron,
        Solid::Icosahedron,
    ];

    /// (vertex count, edge count, regular degree)
    pub fn counts(self) -> (usize, usize, usize) {
        match self {
            Solid::Tetrahedron => (4, 6, 3),
            Solid::Cube => (8, 12, 3),
            Solid::Octahedron => (6, 12, 4),
            Solid::Dodecahedron => (20, 30, 3),
            Solid::Icosahedron => (12, 30, 5),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Solid::Tetrahedron => "tetrahedron",
            Solid::Cube => "cube",
            Solid::Octahedron => "octahedron",
            Solid::Dodecahedron => "dodecahedron",
            Solid::Icosahedron => "icosahedron",
        }
    }
}

impl std::str::FromStr for Solid {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, GraphError> {
        match s.to_ascii_lowercase().as_str() {
            "tetrahedron" | "tetra" => Ok(Solid::Tetrahedron),
            "cube" => Ok(Solid::Cube),
            "octahedron" | "octa" => Ok(Solid::Octahedron),
            "dodecahedron" | "dodeca" => Ok(Solid::Dodecahedron),
            "icosahedron" | "icosa" => Ok(Solid::Icosahedron),
            other => Err(GraphError::Invalid(format!("unknown solid '{other}'"))),
        }
    }
}

impl std::fmt::Display for Solid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

const PHI: f64 = 1.618033988749894848;

fn solid_coords(solid: Solid) -> Vec<Vector3<f64>> {
    let p = |x: f64, y: f64, z: f64| Vector3::new(x, y, z);
    match solid {
        Solid::Tetrahedron => vec![p(1., 1., 1.), p(1., -1., -1.), p(-1., 1., -1.), p(-1., -1., 1.)],
        Solid::Cube => {
            let mut pts = Vec::new();
            for &x in &[-1.0, 1.0] {
                for &y in &[-1.0, 1.0] {
                    for &z in &[-1.0, 1.0] {
                        pts.push(p(x, y, z));
                    }
                }
            }
            pts
        }
        Solid::Octahedron => vec![
            p(1., 0., 0.),
            p(-1., 0., 0.),
            p(0., 1., 0.),
            p(0., -1., 0.),
            p(0., 0., 1.),
            p(0., 0., -1.),
        ],
        Solid::Dodecahedron => {
            let mut pts = Vec::new();
            for &x in &[-1.0, 1.0] {
                for &y in &[-1.0, 1.0] {
                    for &z in &[-1.0, 1.0] {
                        pts.push(p(x, y, z));
                    }
                }
            }
            for &s1 in &[-1.0, 1.0] {
                for &s2 in &[-1.0, 1.0] {
                    pts.push(p(0., s1 / PHI, s2 * PHI));
                    pts.push(p(s1 / PHI, s2 * PHI, 0.));
                    pts.push(p(s1 * PHI, 0., s2 / PHI));
                }
            }
            pts
        }
        Solid::Icosahedron => {
            let mut pts = Vec::new();
            for &s1 in &[-1.0, 1.0] {
                for &s2 in &[-1.0, 1.0] {
                    pts.push(p(0., s1, s2 * PHI));
                    pts.push(p(s1, s2 * PHI, 0.));
                    pts.push(p(s1 * PHI, 0., s2));
                }
            }
            pts
        }
    }
}

/// Builds the 1-skeleton of a Platonic solid with unit edges.
///
/// Adjacency comes from the minimal pairwise distance of the standard
/// coordinates; the per-vertex end order is the clockwise order around the
/// outward normal as seen from outside the solid. The end with the smaller
/// vertex id is the `Zero` end of every edge.
pub fn build_platonic(solid: Solid) -> MetricGraph {
    let pts = solid_coords(solid);
    let n = pts.len();
    let mut min_d2 = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            min_d2 = min_d2.min((pts[i] - pts[j]).norm_squared());
        }
    }
    let adjacent = |i: usize, j: usize| (pts[i] - pts[j]).norm_squared() < min_d2 + 1e-9;

    let mut edge_ids = vec![vec![usize::MAX; n]; n];
    let mut edge_count = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            if adjacent(i, j) {
                edge_ids[i][j] = edge_count;
                edge_ids[j][i] = edge_count;
                edge_count += 1;
            }
        }
    }

    let mut vertices = Vec::with_capacity(n);
    for i in 0..n {
        let normal = pts[i].normalize();
        // tangent frame: axis least aligned with the normal, projected
        let mut axis = Vector3::zeros();
        let a = (0..3).min_by(|&u, &v| normal[u].abs().partial_cmp(&normal[v].abs()).unwrap()).unwrap();
        axis[a] = 1.0;
        let t1 = (axis - normal * axis.dot(&normal)).normalize();
        let t2 = normal.cross(&t1);
        let mut nbrs: Vec<usize> = (0..n).filter(|&j| j != i && adjacent(i, j)).collect();
        // (t1, t2, normal) is right-handed, so decreasing angle is clockwise
        // when viewed from outside
        let angle = |j: usize| {
            let d = pts[j] - pts[i];
            d.dot(&t2).atan2(d.dot(&t1))
        };
        nbrs.sort_by(|&a, &b| angle(b).partial_cmp(&angle(a)).unwrap());
        let ends = nbrs
            .into_iter()
            .map(|j| EdgeEnd {
                edge: edge_ids[i][j],
                end: if i < j { End::Zero } else { End::One },
            })
            .collect();
        vertices.push(Vertex { id: i, ends });
    }
    MetricGraph::new(vertices, edge_count)
}

/// A single unit edge with two degree-1 endpoints, mainly for tests and the
/// `--graph-file` path.
pub fn single_edge() -> MetricGraph {
    MetricGraph::new(
        vec![
            Vertex { id: 0, ends: vec![EdgeEnd { edge: 0, end: End::Zero }] },
            Vertex { id: 1, ends: vec![EdgeEnd { edge: 0, end: End::One }] },
        ],
        1,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn platonic_counts_match() {
        for solid in Solid::ALL {
            let (v, e, d) = solid.counts();
            let g = build_platonic(solid);
            assert_eq!(g.vertices().len(), v, "{solid} vertex count");
            assert_eq!(g.edge_count(), e, "{solid} edge count");
            assert!(g.vertices().iter().all(|vx| vx.degree() == d), "{solid} degree");
            assert_eq!(g.degree_sum(), 2 * e);
        }
    }

    #[test]
    fn platonic_graphs_validate_clean() {
        for solid in Solid::ALL {
            let report = build_platonic(solid).validate();
            assert!(report.is_clean(), "{solid}: {:?}", report.issues);
        }
    }

    #[test]
    fn bfs_fingerprints_agree_from_every_root() {
        for solid in Solid::ALL {
            let g = build_platonic(solid);
            let base = g.bfs_layer_fingerprint(0).unwrap();
            for v in g.vertices() {
                assert_eq!(g.bfs_layer_fingerprint(v.id).unwrap(), base, "{solid} root {}", v.id);
            }
        }
    }

    #[test]
    fn duplicate_end_detected() {
        let mut g = build_platonic(Solid::Cube);
        let shared = g.vertices()[0].ends[0];
        let mut vs = g.vertices().to_vec();
        vs[1].ends[0] = shared;
        g = MetricGraph::new(vs, g.edge_count());
        let report = g.validate();
        assert!(report.issues.iter().any(|i| matches!(i, ValidationIssue::DuplicateEnd(_))));
        assert!(report.issues.iter().any(|i| matches!(i, ValidationIssue::DanglingEnd(_))));
    }

    #[test]
    fn dangling_end_detected() {
        let mut vs = build_platonic(Solid::Tetrahedron).vertices().to_vec();
        vs[0].ends.pop();
        let g = MetricGraph::new(vs, 6);
        let report = g.validate();
        assert!(report.issues.iter().any(|i| matches!(i, ValidationIssue::DanglingEnd(_))));
    }

    #[test]
    fn rotation_identity_cases() {
        let g = build_platonic(Solid::Tetrahedron);
        assert_eq!(g.rotate_vertex_order(0, 0).unwrap(), g);
        let d = g.vertices()[0].degree();
        assert_eq!(g.rotate_vertex_order(0, d).unwrap(), g);
        assert_ne!(g.rotate_vertex_order(0, 1).unwrap(), g);
        assert!(g.rotate_vertex_order(99, 1).is_err());
    }

    #[test]
    fn edge_flip_swaps_both_ends() {
        let g = build_platonic(Solid::Cube);
        let f = g.flip_edge_orientation(3).unwrap();
        assert!(f.validate().is_clean());
        assert_ne!(f, g);
        assert_eq!(f.flip_edge_orientation(3).unwrap(), g);
    }

    #[test]
    fn json_round_trip() {
        let g = build_platonic(Solid::Dodecahedron);
        let back = MetricGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn single_edge_is_valid() {
        let g = single_edge();
        assert!(g.validate().is_clean());
        assert_eq!(g.degree_sum(), 2);
    }

    #[test]
    fn solid_parsing() {
        assert_eq!("octahedron".parse::<Solid>().unwrap(), Solid::Octahedron);
        assert_eq!("Dodeca".parse::<Solid>().unwrap(), Solid::Dodecahedron);
        assert!("prism".parse::<Solid>().is_err());
    }
}
