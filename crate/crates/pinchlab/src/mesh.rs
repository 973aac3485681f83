//! Triangle mesh representation, validation and normalization.
//!
//! A [`Mesh`] is a closed oriented triangulated surface immersed in R^3:
//! faces are counter-clockwise as seen from the outward normal. Meshes are
//! immutable after construction and safe to share across threads.

use nalgebra::Vector3;
use std::collections::HashMap;

use crate::{Error, Result};

/// Relative threshold below which a face counts as degenerate.
pub const DEGENERATE_FACE_REL: f64 = 1e-14;

/// Closed oriented triangulated surface in R^3. Intrinsic dimension is 2.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Vector3<f64>>,
    faces: Vec<[usize; 3]>,
}

impl Mesh {
    /// Build a mesh from raw buffers. Only face-index bounds are checked here;
    /// manifoldness, orientation and connectivity are reported by [`validate`].
    pub fn new(vertices: Vec<Vector3<f64>>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let n = vertices.len();
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                if v >= n {
                    return Err(Error::InvalidMesh(format!(
                        "face {fi} references vertex {v} but mesh has {n} vertices"
                    )));
                }
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::InvalidMesh(format!("face {fi} repeats a vertex")));
            }
        }
        Ok(Self { vertices, faces })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn vertices(&self) -> &[Vector3<f64>] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn vertex(&self, i: usize) -> Vector3<f64> {
        self.vertices[i]
    }

    /// Corner positions of face `f`.
    pub fn face_points(&self, f: usize) -> [Vector3<f64>; 3] {
        let [a, b, c] = self.faces[f];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn face_area(&self, f: usize) -> f64 {
        let [p0, p1, p2] = self.face_points(f);
        0.5 * (p1 - p0).cross(&(p2 - p0)).norm()
    }

    /// Unnormalized face normal from the winding (length = 2 * area).
    pub fn face_normal_raw(&self, f: usize) -> Vector3<f64> {
        let [p0, p1, p2] = self.face_points(f);
        (p1 - p0).cross(&(p2 - p0))
    }

    pub fn face_barycenter(&self, f: usize) -> Vector3<f64> {
        let [p0, p1, p2] = self.face_points(f);
        (p0 + p1 + p2) / 3.0
    }

    /// Number of distinct undirected edges.
    pub fn edge_count(&self) -> usize {
        let mut edges = std::collections::HashSet::new();
        for f in &self.faces {
            for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
                edges.insert((a.min(b), a.max(b)));
            }
        }
        edges.len()
    }

    /// V - E + F.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.edge_count() as i64 + self.face_count() as i64
    }

    /// Genus of a closed oriented surface, `(2 - chi) / 2`.
    pub fn genus(&self) -> i64 {
        (2 - self.euler_characteristic()) / 2
    }

    /// New mesh with `v -> (v + translation) * scale`.
    pub fn transformed(&self, translation: Vector3<f64>, scale: f64) -> Mesh {
        Mesh {
            vertices: self.vertices.iter().map(|v| (v + translation) * scale).collect(),
            faces: self.faces.clone(),
        }
    }

    /// Lumped per-vertex masses: one third of each incident face area.
    pub fn vertex_masses(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.vertex_count()];
        for (fi, f) in self.faces.iter().enumerate() {
            let a3 = self.face_area(fi) / 3.0;
            for &v in f {
                m[v] += a3;
            }
        }
        m
    }
}

/// A single defect found by [`validate`], tagged with the lowest-index simplex involved.
#[derive(Debug, Clone, PartialEq)]
pub enum MeshViolation {
    /// Edge with exactly one incident face.
    OpenEdge { edge: (usize, usize), face: usize },
    /// Edge with more than two incident faces.
    NonManifoldEdge { edge: (usize, usize), count: usize },
    /// Edge traversed twice in the same direction by its two faces.
    InconsistentOrientation { edge: (usize, usize), faces: (usize, usize) },
    /// Face graph splits into more than one component.
    Disconnected { components: usize },
    /// Face area below `DEGENERATE_FACE_REL` times the mean face area.
    DegenerateFace { face: usize, area: f64 },
}

impl std::fmt::Display for MeshViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MeshViolation::OpenEdge { edge, face } => {
                write!(f, "open edge ({}, {}) on face {}", edge.0, edge.1, face)
            }
            MeshViolation::NonManifoldEdge { edge, count } => {
                write!(f, "non-manifold edge ({}, {}) with {} incident faces", edge.0, edge.1, count)
            }
            MeshViolation::InconsistentOrientation { edge, faces } => write!(
                f,
                "inconsistent orientation across edge ({}, {}) between faces {} and {}",
                edge.0, edge.1, faces.0, faces.1
            ),
            MeshViolation::Disconnected { components } => {
                write!(f, "disconnected: {} components", components)
            }
            MeshViolation::DegenerateFace { face, area } => {
                write!(f, "degenerate face {} (area {:.3e})", face, area)
            }
        }
    }
}

/// Outcome of [`validate`]: empty violation list means the mesh is a closed,
/// oriented, connected, non-degenerate manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationResult {
    violations: Vec<MeshViolation>,
}

impl ValidationResult {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violations(&self) -> &[MeshViolation] {
        &self.violations
    }

    /// Human-readable summary of the first violation, if any.
    pub fn first_message(&self) -> Option<String> {
        self.violations.first().map(|v| v.to_string())
    }
}

/// Diagnostic check of the closed-oriented-manifold invariants. Never fails;
/// the result lists every violation, lowest-index simplex first.
pub fn validate(mesh: &Mesh) -> ValidationResult {
    let mut violations = Vec::new();

    // Directed edge census. Key is the undirected edge; per edge we keep the
    // incident (face, forward?) pairs in face order.
    let mut edges: HashMap<(usize, usize), Vec<(usize, bool)>> = HashMap::new();
    for (fi, f) in mesh.faces.iter().enumerate() {
        for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
            let key = (a.min(b), a.max(b));
            edges.entry(key).or_default().push((fi, a < b));
        }
    }

    let mut edge_list: Vec<_> = edges.iter().collect();
    edge_list.sort_by_key(|(k, _)| **k);
    for (key, inc) in edge_list {
        match inc.len() {
            1 => violations.push(MeshViolation::OpenEdge { edge: *key, face: inc[0].0 }),
            2 => {
                if inc[0].1 == inc[1].1 {
                    violations.push(MeshViolation::InconsistentOrientation {
                        edge: *key,
                        faces: (inc[0].0, inc[1].0),
                    });
                }
            }
            n => violations.push(MeshViolation::NonManifoldEdge { edge: *key, count: n }),
        }
    }

    // Connectivity of the face graph via union over shared edges.
    if !mesh.faces.is_empty() {
        let mut comp = vec![usize::MAX; mesh.face_count()];
        let mut ncomp = 0;
        for start in 0..mesh.face_count() {
            if comp[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            comp[start] = ncomp;
            while let Some(fi) = stack.pop() {
                let f = mesh.faces[fi];
                for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
                    let key = (a.min(b), a.max(b));
                    for &(gj, _) in &edges[&key] {
                        if comp[gj] == usize::MAX {
                            comp[gj] = ncomp;
                            stack.push(gj);
                        }
                    }
                }
            }
            ncomp += 1;
        }
        if ncomp > 1 {
            violations.push(MeshViolation::Disconnected { components: ncomp });
        }
    }

    // Degenerate faces, relative to the mean face area.
    if !mesh.faces.is_empty() {
        let mean = (0..mesh.face_count()).map(|f| mesh.face_area(f)).sum::<f64>()
            / mesh.face_count() as f64;
        for fi in 0..mesh.face_count() {
            let a = mesh.face_area(fi);
            if a <= DEGENERATE_FACE_REL * mean {
                violations.push(MeshViolation::DegenerateFace { face: fi, area: a });
            }
        }
    }

    ValidationResult { violations }
}

/// Total surface area (the n-dimensional Riemannian volume of the surface).
pub fn area(mesh: &Mesh) -> f64 {
    (0..mesh.face_count()).map(|f| mesh.face_area(f)).sum()
}

/// Mass-weighted vertex barycenter `x0 = sum(m_v X_v) / sum(m_v)`.
pub fn center_of_mass(mesh: &Mesh, mass: &crate::operators::SparseSymmetricOperator) -> Vector3<f64> {
    let m = mass.diagonal();
    let total: f64 = m.iter().sum();
    let mut c = Vector3::zeros();
    for (v, &mv) in mesh.vertices.iter().zip(m.iter()) {
        c += mv * v;
    }
    c / total
}

/// Inverse transform recovering the input of [`normalize`]:
/// `input = normalized / scale - translation`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationRecord {
    pub translation: Vector3<f64>,
    pub scale: f64,
    pub original_area: f64,
}

impl NormalizationRecord {
    /// Undo the normalization.
    pub fn denormalize(&self, mesh: &Mesh) -> Mesh {
        mesh.transformed(Vector3::zeros(), 1.0 / self.scale)
            .transformed(-self.translation, 1.0)
    }
}

/// Translate the mass-weighted barycenter to the origin, then scale to unit
/// area. Translation commutes with centering and scaling is conformal, so one
/// pass suffices.
pub fn normalize(mesh: &Mesh) -> Result<(Mesh, NormalizationRecord)> {
    let a = area(mesh);
    if !(a > 1e-300) || !a.is_finite() {
        return Err(Error::DegenerateSurface(format!("area {a:.3e}")));
    }
    let masses = mesh.vertex_masses();
    let total: f64 = masses.iter().sum();
    let mut com = Vector3::zeros();
    for (v, &mv) in mesh.vertices.iter().zip(masses.iter()) {
        com += mv * v;
    }
    com /= total;
    let scale = 1.0 / a.sqrt();
    let out = mesh.transformed(-com, scale);
    Ok((out, NormalizationRecord { translation: -com, scale, original_area: a }))
}
