//! Exact point-to-triangle-mesh distance, accelerated by an AABB tree.

use nalgebra::Vector3;

use crate::mesh::Mesh;

/// Squared distance from `p` to triangle `(a, b, c)`.
///
/// Region decomposition over the barycentric plane (Eberly's method):
/// minimize `|a + s e0 + t e1 - p|^2` over the triangle `s, t >= 0, s+t <= 1`.
pub fn point_triangle_distance_sq(
    p: &Vector3<f64>,
    a: &Vector3<f64>,
    b: &Vector3<f64>,
    c: &Vector3<f64>,
) -> f64 {
    let e0 = b - a;
    let e1 = c - a;
    let d = a - p;
    let a00 = e0.dot(&e0);
    let a01 = e0.dot(&e1);
    let a11 = e1.dot(&e1);
    let b0 = e0.dot(&d);
    let b1 = e1.dot(&d);
    let det = (a00 * a11 - a01 * a01).max(0.0);
    let mut s = a01 * b1 - a11 * b0;
    let mut t = a01 * b0 - a00 * b1;

    if s + t <= det {
        if s < 0.0 {
            if t < 0.0 {
                // region 4
                if b0 < 0.0 {
                    t = 0.0;
                    s = if -b0 >= a00 { 1.0 } else { -b0 / a00 };
                } else {
                    s = 0.0;
                    t = if b1 >= 0.0 {
                        0.0
                    } else if -b1 >= a11 {
                        1.0
                    } else {
                        -b1 / a11
                    };
                }
            } else {
                // region 3
                s = 0.0;
                t = if b1 >= 0.0 {
                    0.0
                } else if -b1 >= a11 {
                    1.0
                } else {
                    -b1 / a11
                };
            }
        } else if t < 0.0 {
            // region 5
            t = 0.0;
            s = if b0 >= 0.0 {
                0.0
            } else if -b0 >= a00 {
                1.0
            } else {
                -b0 / a00
            };
        } else {
            // region 0 (interior)
            if det > 0.0 {
                s /= det;
                t /= det;
            } else {
                // degenerate triangle: fall back to the longest edge
                s = if a00 > 0.0 { (-b0 / a00).clamp(0.0, 1.0) } else { 0.0 };
                t = 0.0;
            }
        }
    } else if s < 0.0 {
        // region 2
        let tmp0 = a01 + b0;
        let tmp1 = a11 + b1;
        if tmp1 > tmp0 {
            let numer = tmp1 - tmp0;
            let denom = a00 - 2.0 * a01 + a11;
            s = if numer >= denom { 1.0 } else { numer / denom };
            t = 1.0 - s;
        } else {
            s = 0.0;
            t = if tmp1 <= 0.0 {
                1.0
            } else if b1 >= 0.0 {
                0.0
            } else {
                -b1 / a11
            };
        }
    } else if t < 0.0 {
        // region 6
        let tmp0 = a01 + b1;
        let tmp1 = a00 + b0;
        if tmp1 > tmp0 {
            let numer = tmp1 - tmp0;
            let denom = a00 - 2.0 * a01 + a11;
            t = if numer >= denom { 1.0 } else { numer / denom };
            s = 1.0 - t;
        } else {
            t = 0.0;
            s = if tmp1 <= 0.0 {
                1.0
            } else if b0 >= 0.0 {
                0.0
            } else {
                -b0 / a00
            };
        }
    } else {
        // region 1
        let numer = a11 + b1 - a01 - b0;
        if numer <= 0.0 {
            s = 0.0;
        } else {
            let denom = a00 - 2.0 * a01 + a11;
            s = if numer >= denom { 1.0 } else { numer / denom };
        }
        t = 1.0 - s;
    }

    let closest = a + e0 * s + e1 * t;
    (closest - p).norm_squared()
}

/// Brute-force distance from `p` to the mesh surface.
pub fn point_mesh_distance_brute(mesh: &Mesh, p: &Vector3<f64>) -> f64 {
    let mut best = f64::INFINITY;
    for f in 0..mesh.face_count() {
        let [a, b, c] = mesh.face_points(f);
        best = best.min(point_triangle_distance_sq(p, &a, &b, &c));
    }
    best.sqrt()
}

const LEAF_SIZE: usize = 8;

struct Node {
    lo: Vector3<f64>,
    hi: Vector3<f64>,
    /// leaf: range into `order`; inner: child node indices
    left: u32,
    right: u32,
    count: u32,
    start: u32,
}

/// Median-split AABB tree over the faces. Deterministic construction,
/// exact branch-and-bound queries.
pub struct TriangleBvh {
    points: Vec<[Vector3<f64>; 3]>,
    order: Vec<u32>,
    nodes: Vec<Node>,
}

impl TriangleBvh {
    pub fn build(mesh: &Mesh) -> Self {
        let nf = mesh.face_count();
        let points: Vec<[Vector3<f64>; 3]> = (0..nf).map(|f| mesh.face_points(f)).collect();
        let centroids: Vec<Vector3<f64>> =
            points.iter().map(|[a, b, c]| (a + b + c) / 3.0).collect();
        let mut order: Vec<u32> = (0..nf as u32).collect();
        let mut nodes = Vec::with_capacity(2 * nf / LEAF_SIZE + 2);
        if nf > 0 {
            Self::split(&points, &centroids, &mut order, 0, nf, &mut nodes);
        }
        Self { points, order, nodes }
    }

    fn range_aabb(
        points: &[[Vector3<f64>; 3]],
        order: &[u32],
        start: usize,
        end: usize,
    ) -> (Vector3<f64>, Vector3<f64>) {
        let mut lo = Vector3::repeat(f64::INFINITY);
        let mut hi = Vector3::repeat(f64::NEG_INFINITY);
        for &f in &order[start..end] {
            for p in &points[f as usize] {
                lo = lo.inf(p);
                hi = hi.sup(p);
            }
        }
        (lo, hi)
    }

    fn split(
        points: &[[Vector3<f64>; 3]],
        centroids: &[Vector3<f64>],
        order: &mut [u32],
        start: usize,
        end: usize,
        nodes: &mut Vec<Node>,
    ) -> u32 {
        let (lo, hi) = Self::range_aabb(points, order, start, end);
        let idx = nodes.len() as u32;
        nodes.push(Node { lo, hi, left: 0, right: 0, count: 0, start: 0 });
        if end - start <= LEAF_SIZE {
            nodes[idx as usize].count = (end - start) as u32;
            nodes[idx as usize].start = start as u32;
            return idx;
        }
        let extent = hi - lo;
        let axis = if extent.x >= extent.y && extent.x >= extent.z {
            0
        } else if extent.y >= extent.z {
            1
        } else {
            2
        };
        let mid = (start + end) / 2;
        // ties broken by face index for a deterministic layout
        order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            centroids[a as usize][axis]
                .partial_cmp(&centroids[b as usize][axis])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let left = Self::split(points, centroids, order, start, mid, nodes);
        let right = Self::split(points, centroids, order, mid, end, nodes);
        nodes[idx as usize].left = left;
        nodes[idx as usize].right = right;
        idx
    }

    fn aabb_distance_sq(p: &Vector3<f64>, lo: &Vector3<f64>, hi: &Vector3<f64>) -> f64 {
        let mut d = 0.0;
        for k in 0..3 {
            let v = if p[k] < lo[k] {
                lo[k] - p[k]
            } else if p[k] > hi[k] {
                p[k] - hi[k]
            } else {
                0.0
            };
            d += v * v;
        }
        d
    }

    /// Exact distance from `p` to the mesh surface.
    pub fn distance(&self, p: &Vector3<f64>) -> f64 {
        if self.nodes.is_empty() {
            return f64::INFINITY;
        }
        let mut best = f64::INFINITY;
        let mut stack: Vec<u32> = Vec::with_capacity(64);
        stack.push(0);
        while let Some(idx) = stack.pop() {
            let node = &self.nodes[idx as usize];
            if Self::aabb_distance_sq(p, &node.lo, &node.hi) >= best {
                continue;
            }
            if node.count > 0 {
                let start = node.start as usize;
                for &f in &self.order[start..start + node.count as usize] {
                    let [a, b, c] = &self.points[f as usize];
                    let d = point_triangle_distance_sq(p, a, b, c);
                    if d < best {
                        best = d;
                    }
                }
            } else {
                let l = node.left as usize;
                let r = node.right as usize;
                let dl = Self::aabb_distance_sq(p, &self.nodes[l].lo, &self.nodes[l].hi);
                let dr = Self::aabb_distance_sq(p, &self.nodes[r].lo, &self.nodes[r].hi);
                // nearer child explored first
                if dl <= dr {
                    if dr < best {
                        stack.push(node.right);
                    }
                    if dl < best {
                        stack.push(node.left);
                    }
                } else {
                    if dl < best {
                        stack.push(node.left);
                    }
                    if dr < best {
                        stack.push(node.right);
                    }
                }
            }
        }
        best.sqrt()
    }
}
