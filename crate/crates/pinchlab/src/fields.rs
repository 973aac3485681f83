//! Per-vertex scalar and 3-vector quantities.

use nalgebra::Vector3;

/// One real value per mesh vertex (mean curvature, |X^T|, eigenfunctions, ...).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn from_fn(len: usize, f: impl FnMut(usize) -> f64) -> Self {
        Self { values: (0..len).map(f).collect() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

impl std::ops::Index<usize> for ScalarField {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// One 3-vector per mesh vertex (normals, position projections, Y, Z, ...).
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    values: Vec<Vector3<f64>>,
}

impl VectorField {
    pub fn new(values: Vec<Vector3<f64>>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Vector3<f64>] {
        &self.values
    }

    /// Pointwise Euclidean magnitudes as a scalar field.
    pub fn magnitudes(&self) -> ScalarField {
        ScalarField::new(self.values.iter().map(|v| v.norm()).collect())
    }
}

impl std::ops::Index<usize> for VectorField {
    type Output = Vector3<f64>;
    fn index(&self, i: usize) -> &Vector3<f64> {
        &self.values[i]
    }
}
