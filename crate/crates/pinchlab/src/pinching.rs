//! Pinching diagnostics: mass-weighted norms, the Reilly defect, the
//! position-vector lemma chain, Hausdorff/annulus/coverage closeness to the
//! predicted sphere, and the closed-form Sobolev/Moser/tube constants.

use nalgebra::Vector3;

use crate::distance::TriangleBvh;
use crate::fields::{ScalarField, VectorField};
use crate::mesh::Mesh;
use crate::operators::{tangential_position, ShapeOperatorField, SparseSymmetricOperator};
use crate::{Error, Result};

/// Knobs of the diagnostic pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct PinchingConfig {
    /// Exponent in the `L_{2p}` curvature norm; the sharp statements need `p >= 2`.
    pub p: f64,
    /// Sobolev constant K(n). No explicit value is known; the default is a
    /// placeholder and every acceptance check is K-independent.
    pub sobolev_k: f64,
    /// Intrinsic dimension used by the closed-form constants (the discrete
    /// kernel itself is fixed at n = 2).
    pub n: u32,
    /// Minimum number of sphere samples for coverage checks.
    pub sphere_samples: usize,
    /// Sup-norm diagnostic threshold.
    pub eta: f64,
    /// Hausdorff/annulus/coverage threshold.
    pub epsilon: f64,
}

impl Default for PinchingConfig {
    fn default() -> Self {
        Self { p: 2.0, sobolev_k: 8.0, n: 2, sphere_samples: 20_000, eta: 1e-2, epsilon: 1e-2 }
    }
}

impl PinchingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 2.0) {
            return Err(Error::InvalidArgument(format!("p must be >= 2, got {}", self.p)));
        }
        if !(self.sobolev_k > 0.0) {
            return Err(Error::InvalidArgument(format!("K must be positive, got {}", self.sobolev_k)));
        }
        if self.n < 2 {
            return Err(Error::InvalidArgument(format!("n must be >= 2, got {}", self.n)));
        }
        if !(self.eta > 0.0 && self.epsilon > 0.0) {
            return Err(Error::InvalidArgument("eta and epsilon must be positive".into()));
        }
        Ok(())
    }
}

/// Slack for discrete inequality checks: 5% of the bound's scale with a
/// floor tied to the eigenvalue magnitude.
pub fn numeric_slack(scale: f64, lambda1: f64) -> f64 {
    0.05 * scale.abs().max(lambda1.abs() * 1e-3)
}

/// Mass-weighted `L_p` norm `(sum m_v |T_v|^p)^{1/p}`; `p = inf` gives the
/// sup norm.
pub fn lp_norm(field: &ScalarField, mass: &SparseSymmetricOperator, p: f64) -> Result<f64> {
    lp_norm_values(field.values().iter().copied(), mass, p)
}

/// Same as [`lp_norm`] for the pointwise magnitudes of a vector field.
pub fn lp_norm_vec(field: &VectorField, mass: &SparseSymmetricOperator, p: f64) -> Result<f64> {
    lp_norm_values(field.values().iter().map(|v| v.norm()), mass, p)
}

fn lp_norm_values(
    values: impl Iterator<Item = f64>,
    mass: &SparseSymmetricOperator,
    p: f64,
) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidArgument(format!("norm exponent must be >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(values.fold(0.0, |acc, v| acc.max(v.abs())));
    }
    let m = mass.diagonal();
    let mut acc = 0.0;
    for (v, w) in values.zip(m) {
        acc += w * v.abs().powf(p);
    }
    Ok(acc.powf(1.0 / p))
}

/// Reilly defect `C = n ||H||_{2p}^2 - lambda_1`, the smallest pinching
/// constant for which the surface satisfies the pinched inequality. The mesh
/// must be unit-area and centered for the scale-free interpretation.
pub fn pinching_defect(n: u32, h_norm_2p: f64, lambda1: f64) -> f64 {
    n as f64 * h_norm_2p * h_norm_2p - lambda1
}

/// All L^2 diagnostics of the position vector, with the two unconditional
/// bounds checked (upper/lower `||X||_2^2` bracket and `||Y||_2^2 <= nC`)
/// and the unknown-constant lemmas reported only as empirical ratios.
#[derive(Debug, Clone)]
pub struct LemmaChainReport {
    pub norm_x2_sq: f64,
    pub norm_xt2_sq: f64,
    pub norm_y2_sq: f64,
    pub norm_z2_sq: f64,
    pub norm_phi2: f64,
    pub norm_phi_inf: f64,
    pub norm_psi_inf: f64,
    /// `||X||_2^2 <= n/lambda_1 + slack`
    pub x_upper_ok: bool,
    /// `n lambda_1/(C + lambda_1)^2 - slack <= ||X||_2^2`
    pub x_lower_ok: bool,
    /// `||Y||_2^2 <= n C + slack`
    pub y_ok: bool,
    /// `||X^T||_2^2 / C` (empirical stand-in for the A(n) bound)
    pub ratio_a: Option<f64>,
    /// `||Z||_2^2 / C` (B(n))
    pub ratio_b: Option<f64>,
    /// `||phi||_2 / (||phi||_inf^{3/4} C^{1/4})` (D(n))
    pub ratio_d: Option<f64>,
}

impl LemmaChainReport {
    pub fn all_hold(&self) -> bool {
        self.x_upper_ok && self.x_lower_ok && self.y_ok
    }
}

/// Evaluate the lemma chain on a normalized, centered mesh.
///
/// `Y = n H nu - lambda_1 X`, `Z = sqrt(n/lambda_1) |X|^{1/2} H nu - X/|X|^{1/2}`,
/// `phi = |X| (|X| - sqrt(n/lambda_1))^2`, `psi = |X^T|`.
pub fn lemma_chain_report(
    mesh: &Mesh,
    mass: &SparseSymmetricOperator,
    normals: &VectorField,
    mean_curv: &ScalarField,
    lambda1: f64,
    defect: f64,
) -> Result<LemmaChainReport> {
    let n = 2.0f64;
    let masses = mass.diagonal();
    let radius = (n / lambda1).sqrt();

    let mut x2 = 0.0;
    let mut xt2 = 0.0;
    let mut y2 = 0.0;
    let mut z2 = 0.0;
    let mut phi2 = 0.0;
    let mut phi_inf = 0f64;
    let mut psi_inf = 0f64;
    let xt = tangential_position(mesh, normals);
    for i in 0..mesh.vertex_count() {
        let x = mesh.vertex(i);
        let xn = x.norm();
        if xn < 1e-12 {
            return Err(Error::InvalidArgument(format!("position vanishes at vertex {i}")));
        }
        let w = masses[i];
        let hnu = normals[i] * (n * mean_curv[i]);
        let y = hnu - lambda1 * x;
        let z = radius * xn.sqrt() * mean_curv[i] * normals[i] - x / xn.sqrt();
        let phi = xn * (xn - radius) * (xn - radius);
        let psi = xt[i].norm();
        x2 += w * xn * xn;
        xt2 += w * psi * psi;
        y2 += w * y.norm_squared();
        z2 += w * z.norm_squared();
        phi2 += w * phi * phi;
        phi_inf = phi_inf.max(phi);
        psi_inf = psi_inf.max(psi);
    }
    let phi2 = phi2.sqrt();

    let x_upper = n / lambda1;
    let x_lower = n * lambda1 / ((defect + lambda1) * (defect + lambda1));
    let y_bound = n * defect;
    let x_upper_ok = x2 <= x_upper + numeric_slack(x_upper, lambda1);
    let x_lower_ok = x_lower - numeric_slack(x_lower, lambda1) <= x2;
    let y_ok = y2 <= y_bound + numeric_slack(y_bound, lambda1);

    let ratios = if defect > 1e-14 * lambda1.abs() {
        (
            Some(xt2 / defect),
            Some(z2 / defect),
            Some(phi2 / (phi_inf.powf(0.75) * defect.powf(0.25)).max(1e-300)),
        )
    } else {
        (None, None, None)
    };

    Ok(LemmaChainReport {
        norm_x2_sq: x2,
        norm_xt2_sq: xt2,
        norm_y2_sq: y2,
        norm_z2_sq: z2,
        norm_phi2: phi2,
        norm_phi_inf: phi_inf,
        norm_psi_inf: psi_inf,
        x_upper_ok,
        x_lower_ok,
        y_ok,
        ratio_a: ratios.0,
        ratio_b: ratios.1,
        ratio_d: ratios.2,
    })
}

/// Deterministic near-uniform sphere sample (golden-angle spiral).
pub fn fibonacci_sphere(samples: usize, center: Vector3<f64>, radius: f64) -> Vec<Vector3<f64>> {
    let golden_angle = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..samples)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / samples as f64;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden_angle * i as f64;
            center + radius * Vector3::new(rho * phi.cos(), rho * phi.sin(), z)
        })
        .collect()
}

/// Sample count whose lattice spacing (covering radius ~ 3 r / sqrt(N)) stays
/// below `epsilon / 4`, floored at `minimum` and capped at 2e6.
pub fn samples_for_epsilon(radius: f64, epsilon: f64, minimum: usize) -> usize {
    const CAP: usize = 2_000_000;
    let required = (12.0 * radius / epsilon).powi(2).ceil();
    let required = if required.is_finite() { required as usize } else { usize::MAX };
    required.clamp(minimum.clamp(100, CAP), CAP)
}

/// Max over mesh vertices of `| |X - center| - radius |` (the annulus side of
/// the Hausdorff distance).
fn annulus_deviation(mesh: &Mesh, center: &Vector3<f64>, radius: f64) -> f64 {
    mesh.vertices()
        .iter()
        .map(|v| ((v - center).norm() - radius).abs())
        .fold(0.0, f64::max)
}

/// Max over sphere samples of the exact distance to the mesh surface (the
/// coverage side of the Hausdorff distance).
fn coverage_gap(mesh: &Mesh, center: &Vector3<f64>, radius: f64, samples: usize) -> f64 {
    let bvh = TriangleBvh::build(mesh);
    fibonacci_sphere(samples, *center, radius)
        .iter()
        .map(|p| bvh.distance(p))
        .fold(0.0, f64::max)
}

/// Hausdorff distance between the mesh and the sphere `S(center, radius)`:
/// exact on the mesh-to-sphere side, sampled on the sphere-to-mesh side.
pub fn hausdorff_to_sphere(
    mesh: &Mesh,
    center: &Vector3<f64>,
    radius: f64,
    samples: usize,
) -> f64 {
    let samples = samples.max(100);
    annulus_deviation(mesh, center, radius).max(coverage_gap(mesh, center, radius, samples))
}

/// Does every vertex lie in the closed annulus of width `2 epsilon` around
/// the sphere? Returns the verdict and the max deviation.
pub fn annulus_check(
    mesh: &Mesh,
    center: &Vector3<f64>,
    radius: f64,
    epsilon: f64,
) -> (bool, f64) {
    let dev = annulus_deviation(mesh, center, radius);
    (dev <= epsilon, dev)
}

/// Does every sphere sample have a mesh point within `epsilon`? Returns the
/// verdict and the max gap.
pub fn coverage_check(
    mesh: &Mesh,
    center: &Vector3<f64>,
    radius: f64,
    epsilon: f64,
    samples: usize,
) -> (bool, f64) {
    let samples = samples.max(100);
    let gap = coverage_gap(mesh, center, radius, samples);
    (gap <= epsilon, gap)
}

/// `(c_n, d_n) = (n / (2 K^2), 2 K^2)`; their product is n.
pub fn sobolev_constants(n: u32, k: f64) -> (f64, f64) {
    let d = 2.0 * k * k;
    (n as f64 / d, d)
}

/// Limiting constants of the L^2-to-sup-norm iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct MoserConstants {
    /// `sum_{k>=0} k / (q^k + 1)`
    pub alpha: f64,
    /// `prod_{k>=0} (1 - 1/(q^k + 1))`, inside `[e^-n, e^{-n/2}]`
    pub beta: f64,
    /// `Ktilde^{(1-beta)/beta} q^{alpha/beta}`
    pub l: f64,
    /// `n / (n - 1)`
    pub q: f64,
    /// Terms actually summed.
    pub terms_used: usize,
}

/// Evaluate the series/product with a geometric tail bound below 1e-13;
/// `terms` is a floor on the number of terms.
pub fn moser_constants(n: u32, ktilde: f64, terms: usize) -> Result<MoserConstants> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("n must be >= 2, got {n}")));
    }
    if !(ktilde > 0.0) {
        return Err(Error::InvalidArgument(format!("Ktilde must be positive, got {ktilde}")));
    }
    let q = n as f64 / (n as f64 - 1.0);
    let x = 1.0 / q;
    let mut alpha = 0.0;
    let mut beta = 1.0;
    let mut k = 0usize;
    let mut qk = 1.0f64;
    loop {
        alpha += k as f64 / (qk + 1.0);
        beta *= 1.0 - 1.0 / (qk + 1.0);
        k += 1;
        qk *= q;
        if k >= terms.max(50) {
            // alpha tail: sum_{j>=k} j x^j = x^k (k(1-x)+x)/(1-x)^2
            // |log beta| tail: <= 2 x^k / (1-x)
            let xk = x.powi(k as i32);
            let alpha_tail = xk * (k as f64 * (1.0 - x) + x) / ((1.0 - x) * (1.0 - x));
            let beta_tail = 2.0 * xk / (1.0 - x);
            if alpha_tail.max(beta_tail) < 1e-13 {
                break;
            }
        }
        if k > 1_000_000 {
            break;
        }
    }
    let l = ktilde.powf((1.0 - beta) / beta) * q.powf(alpha / beta);
    Ok(MoserConstants { alpha, beta, l, q, terms_used: k })
}

/// Every closed-form constant in one record.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticConstants {
    pub c_n: f64,
    pub d_n: f64,
    pub alpha: f64,
    pub beta: f64,
    pub moser_l: f64,
    pub q: f64,
}

pub fn analytic_constants(n: u32, k: f64, ktilde: f64, terms: usize) -> Result<AnalyticConstants> {
    let (c_n, d_n) = sobolev_constants(n, k);
    let m = moser_constants(n, ktilde, terms)?;
    Ok(AnalyticConstants { c_n, d_n, alpha: m.alpha, beta: m.beta, moser_l: m.l, q: m.q })
}

/// Mean curvature of the tube `(xi, theta) -> (L - l cos theta) xi + l sin theta e + a e`
/// with outward orientation: `H(theta) = (1/n)(1/l - (n-1) cos theta / (L - l cos theta))`.
pub fn analytic_tube_mean_curvature(n: u32, major: f64, minor: f64, theta: f64) -> Result<f64> {
    if !(major > minor && minor > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tube radii must satisfy L > l > 0, got L={major} l={minor}"
        )));
    }
    let nf = n as f64;
    Ok((1.0 / minor - (nf - 1.0) * theta.cos() / (major - minor * theta.cos())) / nf)
}

/// Uniform-in-theta lower bound `(1/n)(1/l - (n-1)/(L - l))`.
pub fn tube_mean_curvature_lower_bound(n: u32, major: f64, minor: f64) -> Result<f64> {
    if !(major > minor && minor > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tube radii must satisfy L > l > 0, got L={major} l={minor}"
        )));
    }
    let nf = n as f64;
    Ok((1.0 / minor - (nf - 1.0) / (major - minor)) / nf)
}

/// Total curvature criterion for n = 2: `value = integral of (|B|^2 - 2 H^2)`;
/// below `4 pi` the surface is a topological sphere.
pub fn shiohama_xu_check(
    shape: &ShapeOperatorField,
    mean_curv: &ScalarField,
    mass: &SparseSymmetricOperator,
) -> (f64, bool) {
    let masses = mass.diagonal();
    let mut value = 0.0;
    for i in 0..shape.len() {
        value += masses[i] * (shape.norm_sq(i) - 2.0 * mean_curv[i] * mean_curv[i]);
    }
    (value, value < 4.0 * std::f64::consts::PI)
}
