//! Analytic test-surface generators: icosphere, ellipsoid, harmonically
//! perturbed sphere, and the tube torus of the annulus-foliation construction.
//!
//! All generators emit outward-oriented closed meshes and are deterministic.

use nalgebra::Vector3;
use std::collections::HashMap;

use crate::mesh::Mesh;
use crate::{Error, Result};

/// Largest supported subdivision level (20 * 4^8 = 1.3M faces).
pub const MAX_LEVEL: u32 = 8;

/// Which surface to build; carries every shape parameter.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSpec {
    Icosphere { level: u32, radius: f64 },
    Ellipsoid { semi_axes: Vector3<f64>, level: u32 },
    /// Radius field `base_radius * (1 + amplitude * Ybar_l^m)` over the sphere,
    /// with the real harmonic scaled to unit sup-norm.
    PerturbedSphere { level: u32, amplitude: f64, degree: u32, order: i32, base_radius: f64 },
    /// Image of `(xi, theta) -> (L - l cos(theta)) xi + (l sin(theta) + a) e`
    /// over S^1 x S^1, `xi` in the xy-plane and `e` the z-axis.
    TubeTorus { major: f64, minor: f64, offset: f64, nu: usize, nv: usize },
}

impl GeneratorSpec {
    pub fn build(&self) -> Result<Mesh> {
        match *self {
            GeneratorSpec::Icosphere { level, radius } => gen_icosphere(level, radius),
            GeneratorSpec::Ellipsoid { semi_axes, level } => gen_ellipsoid(semi_axes, level),
            GeneratorSpec::PerturbedSphere { level, amplitude, degree, order, base_radius } => {
                gen_perturbed_sphere(level, amplitude, degree, order, base_radius)
            }
            GeneratorSpec::TubeTorus { major, minor, offset, nu, nv } => {
                gen_tube_torus(major, minor, offset, nu, nv)
            }
        }
    }
}

impl std::fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GeneratorSpec::Icosphere { level, radius } => {
                write!(f, "icosphere level={level} radius={radius}")
            }
            GeneratorSpec::Ellipsoid { semi_axes, level } => write!(
                f,
                "ellipsoid axes=({},{},{}) level={level}",
                semi_axes.x, semi_axes.y, semi_axes.z
            ),
            GeneratorSpec::PerturbedSphere { level, amplitude, degree, order, base_radius } => {
                write!(
                    f,
                    "perturbed-sphere level={level} t={amplitude} l={degree} m={order} radius={base_radius}"
                )
            }
            GeneratorSpec::TubeTorus { major, minor, offset, nu, nv } => {
                write!(f, "tube-torus L={major} l={minor} a={offset} grid={nu}x{nv}")
            }
        }
    }
}

/// Pole-oriented icosahedron on the unit sphere: vertex 0 at the north pole,
/// two latitude rings of five, vertex 11 at the south pole. Pole vertices let
/// harmonic perturbations attain their polar extrema exactly.
fn icosahedron() -> (Vec<Vector3<f64>>, Vec<[usize; 3]>) {
    let mut verts = Vec::with_capacity(12);
    verts.push(Vector3::new(0.0, 0.0, 1.0));
    let (zr, rr) = (1.0 / 5f64.sqrt(), 2.0 / 5f64.sqrt());
    for k in 0..5 {
        let a = 2.0 * std::f64::consts::PI * k as f64 / 5.0;
        verts.push(Vector3::new(rr * a.cos(), rr * a.sin(), zr));
    }
    for k in 0..5 {
        let a = 2.0 * std::f64::consts::PI * k as f64 / 5.0 + std::f64::consts::PI / 5.0;
        verts.push(Vector3::new(rr * a.cos(), rr * a.sin(), -zr));
    }
    verts.push(Vector3::new(0.0, 0.0, -1.0));

    let mut faces = Vec::with_capacity(20);
    for k in 0..5usize {
        let k1 = (k + 1) % 5;
        faces.push([0, 1 + k, 1 + k1]);
        faces.push([1 + k, 6 + k, 1 + k1]);
        faces.push([6 + k, 6 + k1, 1 + k1]);
        faces.push([11, 6 + k1, 6 + k]);
    }
    (verts, faces)
}

/// One midpoint-subdivision pass with re-projection to the unit sphere.
fn subdivide_projected(
    verts: &mut Vec<Vector3<f64>>,
    faces: &[[usize; 3]],
) -> Vec<[usize; 3]> {
    let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
    let mut out = Vec::with_capacity(faces.len() * 4);
    for &[a, b, c] in faces {
        let mut mid = |i: usize, j: usize, verts: &mut Vec<Vector3<f64>>| -> usize {
            let key = (i.min(j), i.max(j));
            *cache.entry(key).or_insert_with(|| {
                let m = (verts[i] + verts[j]).normalize();
                verts.push(m);
                verts.len() - 1
            })
        };
        let ab = mid(a, b, verts);
        let bc = mid(b, c, verts);
        let ca = mid(c, a, verts);
        out.push([a, ab, ca]);
        out.push([b, bc, ab]);
        out.push([c, ca, bc]);
        out.push([ab, bc, ca]);
    }
    out
}

/// Unit directions and faces of the level-`level` icosphere.
fn icosphere_directions(level: u32) -> Result<(Vec<Vector3<f64>>, Vec<[usize; 3]>)> {
    if level > MAX_LEVEL {
        return Err(Error::InvalidArgument(format!(
            "subdivision level {level} exceeds maximum {MAX_LEVEL}"
        )));
    }
    let (mut verts, mut faces) = icosahedron();
    for _ in 0..level {
        faces = subdivide_projected(&mut verts, &faces);
    }
    Ok((verts, faces))
}

/// Subdivided icosahedron projected onto the sphere of the given radius.
/// Level `k` has `20 * 4^k` faces.
pub fn gen_icosphere(level: u32, radius: f64) -> Result<Mesh> {
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    let (dirs, faces) = icosphere_directions(level)?;
    Mesh::new(dirs.into_iter().map(|d| d * radius).collect(), faces)
}

/// Icosphere scaled anisotropically onto `(x/a)^2 + (y/b)^2 + (z/c)^2 = 1`.
pub fn gen_ellipsoid(semi_axes: Vector3<f64>, level: u32) -> Result<Mesh> {
    if !(semi_axes.x > 0.0 && semi_axes.y > 0.0 && semi_axes.z > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "semi-axes must be positive, got ({}, {}, {})",
            semi_axes.x, semi_axes.y, semi_axes.z
        )));
    }
    let (dirs, faces) = icosphere_directions(level)?;
    Mesh::new(dirs.into_iter().map(|d| d.component_mul(&semi_axes)).collect(), faces)
}

/// Associated Legendre P_l^m(x) (m >= 0, no Condon-Shortley phase).
fn legendre_assoc(l: u32, m: u32, x: f64) -> f64 {
    debug_assert!(m <= l);
    let mut pmm = 1.0;
    if m > 0 {
        let s = ((1.0 - x) * (1.0 + x)).max(0.0).sqrt();
        let mut fact = 1.0;
        for _ in 0..m {
            pmm *= fact * s;
            fact += 2.0;
        }
    }
    if l == m {
        return pmm;
    }
    let mut pmmp1 = x * (2.0 * m as f64 + 1.0) * pmm;
    if l == m + 1 {
        return pmmp1;
    }
    for ll in (m + 2)..=l {
        let (llf, mf) = (ll as f64, m as f64);
        let pll = (x * (2.0 * llf - 1.0) * pmmp1 - (llf + mf - 1.0) * pmm) / (llf - mf);
        pmm = pmmp1;
        pmmp1 = pll;
    }
    pmmp1
}

/// Sup-norm of P_l^m over [-1, 1], sampled on a dense grid (deterministic).
fn legendre_sup(l: u32, m: u32) -> f64 {
    let n = 20_000usize;
    let mut sup = 0f64;
    for i in 0..=n {
        let x = -1.0 + 2.0 * i as f64 / n as f64;
        sup = sup.max(legendre_assoc(l, m, x).abs());
    }
    sup
}

/// Real spherical harmonic scaled to unit sup-norm, evaluated at a unit direction.
fn real_harmonic_unit_sup(l: u32, m: i32, dir: &Vector3<f64>, sup: f64) -> f64 {
    let ct = dir.z.clamp(-1.0, 1.0);
    let p = legendre_assoc(l, m.unsigned_abs(), ct);
    let angular = match m.cmp(&0) {
        std::cmp::Ordering::Greater => (m as f64 * dir.y.atan2(dir.x)).cos(),
        std::cmp::Ordering::Less => ((-m) as f64 * dir.y.atan2(dir.x)).sin(),
        std::cmp::Ordering::Equal => 1.0,
    };
    p * angular / sup
}

/// Sphere with radius field `base_radius * (1 + t * Ybar_l^m)`. Amplitude
/// `|t| < 1/2` keeps the surface embedded; the unit-sup harmonic makes `t`
/// the exact relative radial deviation bound.
pub fn gen_perturbed_sphere(
    level: u32,
    amplitude: f64,
    degree: u32,
    order: i32,
    base_radius: f64,
) -> Result<Mesh> {
    if !(amplitude.abs() < 0.5) {
        return Err(Error::InvalidArgument(format!(
            "perturbation amplitude |t| must be < 0.5, got {amplitude}"
        )));
    }
    if degree < 1 {
        return Err(Error::InvalidArgument("harmonic degree l must be >= 1".into()));
    }
    if order.unsigned_abs() > degree {
        return Err(Error::InvalidArgument(format!(
            "harmonic order |m| = {} exceeds degree l = {degree}",
            order.unsigned_abs()
        )));
    }
    if !(base_radius > 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {base_radius}")));
    }
    if amplitude == 0.0 {
        return gen_icosphere(level, base_radius);
    }
    let (dirs, faces) = icosphere_directions(level)?;
    let sup = legendre_sup(degree, order.unsigned_abs());
    let verts = dirs
        .into_iter()
        .map(|d| {
            let y = real_harmonic_unit_sup(degree, order, &d, sup);
            d * (base_radius * (1.0 + amplitude * y))
        })
        .collect();
    Mesh::new(verts, faces)
}

/// Structured torus `(xi, theta) -> (L - l cos(theta)) xi + (l sin(theta) + a) e`,
/// outward-oriented. `theta = 0` is the inner equator, `theta = pi` the outer.
pub fn gen_tube_torus(major: f64, minor: f64, offset: f64, nu: usize, nv: usize) -> Result<Mesh> {
    if !(minor > 0.0) || !major.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "tube radii must satisfy L > l > 0, got L={major} l={minor}"
        )));
    }
    if major <= minor {
        return Err(Error::InvalidArgument(format!(
            "self-intersecting tube: L={major} <= l={minor}"
        )));
    }
    if nu < 8 || nv < 8 {
        return Err(Error::InvalidArgument(format!("grid must be at least 8x8, got {nu}x{nv}")));
    }
    let mut verts = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = 2.0 * std::f64::consts::PI * i as f64 / nu as f64;
        let xi = Vector3::new(u.cos(), u.sin(), 0.0);
        for j in 0..nv {
            let th = 2.0 * std::f64::consts::PI * j as f64 / nv as f64;
            verts.push((major - minor * th.cos()) * xi + Vector3::new(0.0, 0.0, minor * th.sin() + offset));
        }
    }
    // Quad (i,j)-(i,j+1)-(i+1,j+1)-(i+1,j); splitting along theta first makes
    // the winding outward for this parameterization.
    let mut faces = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        let i1 = (i + 1) % nu;
        for j in 0..nv {
            let j1 = (j + 1) % nv;
            let (v00, v01, v11, v10) = (i * nv + j, i * nv + j1, i1 * nv + j1, i1 * nv + j);
            faces.push([v00, v01, v11]);
            faces.push([v00, v11, v10]);
        }
    }
    Mesh::new(verts, faces)
}
