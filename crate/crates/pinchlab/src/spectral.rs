//! First nonzero eigenpair of the generalized problem `S u = lambda M u`.
//!
//! Blocked subspace iteration with Rayleigh-Ritz extraction. Each inverse
//! application solves the singular-but-consistent system `S w = M v` by
//! conjugate gradients restricted to the complement of the constants
//! (Jacobi-preconditioned, mean-deflated). The start block is a pure
//! function of the vertex index, so runs are bit-reproducible without RNG.

use nalgebra::DMatrix;

use crate::fields::ScalarField;
use crate::mesh::Mesh;
use crate::operators::{mean_curvature, vertex_normals, SparseSymmetricOperator};
use crate::pinching::lp_norm;
use crate::{Error, Result};

/// Default relative residual tolerance.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Default cap on outer subspace iterations.
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// `(lambda_1, eigenfunction)` with the Euclidean residual
/// `|S u - lambda M u| / |M u|` actually achieved.
#[derive(Debug, Clone)]
pub struct SpectralPair {
    pub lambda1: f64,
    /// M-normalized, M-orthogonal to constants.
    pub eigenfunction: ScalarField,
    pub residual: f64,
}

/// SplitMix64: deterministic start-vector entries keyed by (vertex, column).
fn start_entry(vertex: usize, column: usize) -> f64 {
    let mut z = (vertex as u64)
        .wrapping_mul(0x9E3779B97F4A7C15)
        .wrapping_add((column as u64 + 1).wrapping_mul(0xBF58476D1CE4E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn m_dot(m: &[f64], a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).zip(m).map(|((x, y), w)| w * x * y).sum()
}

/// Remove the M-weighted mean (projects out the constant kernel direction).
fn project_constants(v: &mut [f64], m: &[f64], total_mass: f64) {
    let mut s = 0.0;
    for (x, w) in v.iter().zip(m) {
        s += w * x;
    }
    let mean = s / total_mass;
    for x in v.iter_mut() {
        *x -= mean;
    }
}

/// Remove the Euclidean mean (kernel of S itself).
fn project_mean(v: &mut [f64]) {
    let mean: f64 = v.iter().sum::<f64>() / v.len() as f64;
    for x in v.iter_mut() {
        *x -= mean;
    }
}

/// Jacobi-preconditioned CG for `S x = b` with `b` orthogonal to constants.
/// Iterates are kept mean-free; converges to the minimum-norm-ish solution in
/// the complement of the kernel.
fn solve_deflated_pcg(
    s: &SparseSymmetricOperator,
    b: &[f64],
    diag_inv: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Vec<f64> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    project_mean(&mut r);
    let b_norm = dot(&r, &r).sqrt();
    if b_norm == 0.0 {
        return x;
    }
    let mut z: Vec<f64> = r.iter().zip(diag_inv).map(|(ri, d)| ri * d).collect();
    project_mean(&mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut sp = vec![0.0; n];
    for _ in 0..max_iter {
        s.apply_into(&p, &mut sp);
        let psp = dot(&p, &sp);
        if psp <= 0.0 {
            break; // kernel leak, the projected residual is already tiny
        }
        let alpha = rz / psp;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * sp[i];
        }
        project_mean(&mut r);
        if dot(&r, &r).sqrt() <= rel_tol * b_norm {
            break;
        }
        z.clear();
        z.extend(r.iter().zip(diag_inv).map(|(ri, d)| ri * d));
        project_mean(&mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    x
}

/// M-orthonormalize the columns in place (modified Gram-Schmidt, two passes).
fn m_orthonormalize(cols: &mut [Vec<f64>], m: &[f64], total_mass: f64) {
    let k = cols.len();
    for j in 0..k {
        project_constants(&mut cols[j], m, total_mass);
        for _pass in 0..2 {
            for i in 0..j {
                let (head, tail) = cols.split_at_mut(j);
                let c = m_dot(m, &head[i], &tail[0]);
                for (t, h) in tail[0].iter_mut().zip(head[i].iter()) {
                    *t -= c * h;
                }
            }
        }
        let norm = m_dot(m, &cols[j], &cols[j]).sqrt();
        if norm > 0.0 {
            for x in cols[j].iter_mut() {
                *x /= norm;
            }
        }
    }
}

/// The `k` smallest eigenpairs above the constant kernel, ascending.
///
/// Deterministic given the operators; errors if the residual target is not
/// met within `max_iter` outer iterations, or if a second near-zero
/// eigenvalue reveals a disconnected surface.
///
/// Pass the mesh coordinates as `warm_start` columns when available; on
/// near-round surfaces they are close to the first eigenspace and cut the
/// iteration count substantially.
pub fn smallest_eigenpairs_seeded(
    stiffness: &SparseSymmetricOperator,
    mass: &SparseSymmetricOperator,
    k: usize,
    tol: f64,
    max_iter: usize,
    warm_start: &[Vec<f64>],
) -> Result<Vec<SpectralPair>> {
    let n = stiffness.dim();
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!("requested {k} eigenpairs of a {n}-dim operator")));
    }
    if !(tol > 0.0 && tol <= 1e-4) {
        return Err(Error::InvalidArgument(format!("tol must lie in (0, 1e-4], got {tol}")));
    }
    let m = mass.diagonal();
    let total_mass: f64 = m.iter().sum();
    let s_diag = stiffness.diagonal();
    let mean_diag = s_diag.iter().sum::<f64>() / n as f64;
    let diag_inv: Vec<f64> =
        s_diag.iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect();

    let block = (k + 4).min(n - 1);
    let mut v: Vec<Vec<f64>> = (0..block)
        .map(|j| match warm_start.get(j) {
            // deterministic jitter keeps accidentally dependent seeds usable
            Some(col) if col.len() == n => {
                let scale = col.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1e-300);
                col.iter()
                    .enumerate()
                    .map(|(i, &x)| x + 1e-8 * scale * start_entry(i, j))
                    .collect()
            }
            _ => (0..n).map(|i| start_entry(i, j)).collect(),
        })
        .collect();
    m_orthonormalize(&mut v, &m, total_mass);

    let cg_cap = 40 * n;
    let mut best_residual = f64::INFINITY;
    let mut result: Option<Vec<(f64, Vec<f64>)>> = None;

    for iter in 0..max_iter {
        // inner accuracy only needs to outpace the outer residual
        let cg_rtol = (best_residual * 1e-3).clamp(1e-13, 1e-7);
        // W = S^{-1} M V, deflated
        let mut w: Vec<Vec<f64>> = Vec::with_capacity(block);
        for col in &v {
            let rhs: Vec<f64> = col.iter().zip(&m).map(|(x, w)| x * w).collect();
            w.push(solve_deflated_pcg(stiffness, &rhs, &diag_inv, cg_rtol, cg_cap));
        }
        m_orthonormalize(&mut w, &m, total_mass);

        // Rayleigh-Ritz on span(W)
        let mut a = DMatrix::zeros(block, block);
        let sw: Vec<Vec<f64>> = w.iter().map(|col| stiffness.apply(col)).collect();
        for i in 0..block {
            for j in i..block {
                let val = dot(&w[i], &sw[j]);
                a[(i, j)] = val;
                a[(j, i)] = val;
            }
        }
        let eig = a.symmetric_eigen();
        let mut order: Vec<usize> = (0..block).collect();
        order.sort_by(|&x, &y| eig.eigenvalues[x].partial_cmp(&eig.eigenvalues[y]).unwrap());

        let mut ritz: Vec<(f64, Vec<f64>)> = Vec::with_capacity(block);
        for &col in &order {
            let lambda = eig.eigenvalues[col];
            let mut u = vec![0.0; n];
            for (i, wi) in w.iter().enumerate() {
                let c = eig.eigenvectors[(i, col)];
                for (uj, &wij) in u.iter_mut().zip(wi.iter()) {
                    *uj += c * wij;
                }
            }
            ritz.push((lambda, u));
        }

        // disconnected surfaces show a second eigenvalue at the kernel scale
        if ritz[0].0 < 1e-10 * mean_diag {
            return Err(Error::NotConnected);
        }

        let mut worst = 0f64;
        for (lambda, u) in ritz.iter().take(k) {
            let su = stiffness.apply(u);
            let mu: Vec<f64> = u.iter().zip(&m).map(|(x, w)| x * w).collect();
            let num = su.iter().zip(&mu).map(|(a, b)| (a - lambda * b) * (a - lambda * b)).sum::<f64>().sqrt();
            let den = dot(&mu, &mu).sqrt();
            worst = worst.max(num / den);
        }
        best_residual = best_residual.min(worst);
        if worst <= tol {
            result = Some(ritz.into_iter().take(k).collect());
            break;
        }
        let _ = iter;
        v = ritz.into_iter().map(|(_, u)| u).collect();
    }

    let Some(pairs) = result else {
        return Err(Error::NoConvergence { iterations: max_iter, residual: best_residual });
    };

    Ok(pairs
        .into_iter()
        .map(|(lambda, u)| {
            let su = stiffness.apply(&u);
            let mu: Vec<f64> = u.iter().zip(&m).map(|(x, w)| x * w).collect();
            let num = su.iter().zip(&mu).map(|(a, b)| (a - lambda * b) * (a - lambda * b)).sum::<f64>().sqrt();
            let den = dot(&mu, &mu).sqrt();
            SpectralPair { lambda1: lambda, eigenfunction: ScalarField::new(u), residual: num / den }
        })
        .collect())
}

/// [`smallest_eigenpairs_seeded`] with the index-keyed start block only.
pub fn smallest_eigenpairs(
    stiffness: &SparseSymmetricOperator,
    mass: &SparseSymmetricOperator,
    k: usize,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<SpectralPair>> {
    smallest_eigenpairs_seeded(stiffness, mass, k, tol, max_iter, &[])
}

/// Coordinate functions of a mesh, the classical trial block for the first
/// eigenspace of an immersed hypersurface.
pub fn coordinate_seed(mesh: &Mesh) -> Vec<Vec<f64>> {
    (0..3).map(|k| mesh.vertices().iter().map(|v| v[k]).collect()).collect()
}

/// Smallest eigenvalue of `S u = lambda M u` on the M-orthogonal complement
/// of constants, with its eigenfunction.
pub fn lambda1(
    stiffness: &SparseSymmetricOperator,
    mass: &SparseSymmetricOperator,
    tol: f64,
    max_iter: usize,
) -> Result<SpectralPair> {
    Ok(smallest_eigenpairs(stiffness, mass, 1, tol, max_iter)?.remove(0))
}

/// [`lambda1`] seeded with the mesh coordinates.
pub fn lambda1_for_mesh(
    mesh: &Mesh,
    stiffness: &SparseSymmetricOperator,
    mass: &SparseSymmetricOperator,
    tol: f64,
    max_iter: usize,
) -> Result<SpectralPair> {
    let seed = coordinate_seed(mesh);
    Ok(smallest_eigenpairs_seeded(stiffness, mass, 1, tol, max_iter, &seed)?.remove(0))
}

/// Rayleigh quotient `(f^T S f)/(f^T M f)` after projecting out constants.
pub fn rayleigh(
    stiffness: &SparseSymmetricOperator,
    mass: &SparseSymmetricOperator,
    field: &ScalarField,
) -> Result<f64> {
    let m = mass.diagonal();
    let total_mass: f64 = m.iter().sum();
    let mut f = field.values().to_vec();
    let scale = f.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    project_constants(&mut f, &m, total_mass);
    let den = m_dot(&m, &f, &f);
    // roundoff leaves ~eps^2-sized mass behind for constant inputs
    if den <= 1e-24 * total_mass * scale * scale || !den.is_finite() {
        return Err(Error::InvalidArgument(
            "field is constant: zero after projecting out constants".into(),
        ));
    }
    Ok(stiffness.quadratic_form(&f, &f) / den)
}

/// Both sides of the `L_{2p}` Reilly inequality:
/// `(lambda_1, n ||H||_{2p}^2 / V^{1/p})`. The volume factor is applied
/// explicitly so unnormalized meshes are fine.
pub fn reilly_lhs_rhs(
    mesh: &Mesh,
    stiffness: &SparseSymmetricOperator,
    mass: &SparseSymmetricOperator,
    p: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, f64)> {
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("exponent p must be >= 1, got {p}")));
    }
    let pair = lambda1_for_mesh(mesh, stiffness, mass, tol, max_iter)?;
    let normals = vertex_normals(mesh)?;
    let h = mean_curvature(mesh, stiffness, mass, &normals);
    let h2p = lp_norm(&h, mass, 2.0 * p)?;
    let volume: f64 = mass.diagonal().iter().sum();
    let n = 2.0;
    Ok((pair.lambda1, n * h2p * h2p / volume.powf(1.0 / p)))
}
