//! Points on the unit sphere, deterministic tangent frames, the projection
//! retraction used by Newton steps, and centrally symmetric geodesic meshes.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vectors shorter than this cannot be projected onto the sphere.
pub const MIN_NORM: f64 = 1e-14;

/// Largest subdivision level accepted by [`build_symmetric_mesh`].
pub const MAX_MESH_LEVEL: u32 = 9;

/// A unit vector in R^3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 3]", try_from = "[f64; 3]")]
pub struct SpherePoint(Vector3<f64>);

impl SpherePoint {
    /// Projects `v` onto the sphere.
    pub fn new(v: Vector3<f64>) -> Result<Self> {
        normalize(v)
    }

    pub fn from_xyz(x: f64, y: f64, z: f64) -> Result<Self> {
        normalize(Vector3::new(x, y, z))
    }

    pub fn coords(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn x(&self) -> f64 {
        self.0.x
    }

    pub fn y(&self) -> f64 {
        self.0.y
    }

    pub fn z(&self) -> f64 {
        self.0.z
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.0.x, self.0.y, self.0.z]
    }

    pub fn antipode(&self) -> Self {
        antipode(*self)
    }

    /// Projects `self + d` back onto the sphere.
    pub fn displace(&self, d: Vector3<f64>) -> Result<Self> {
        normalize(self.0 + d)
    }

    pub fn chord_distance(&self, other: &SpherePoint) -> f64 {
        (self.0 - other.0).norm()
    }

    /// Chord distance between the antipodal pairs `{±self}` and `{±other}`.
    pub fn pair_distance(&self, other: &SpherePoint) -> f64 {
        (self.0 - other.0).norm().min((self.0 + other.0).norm())
    }

    /// The member of `{self, -self}` with `z > 0`; on the equator `y > 0`,
    /// then `x > 0`.
    pub fn canonical(&self) -> Self {
        let c = &self.0;
        let keep = if c.z != 0.0 {
            c.z > 0.0
        } else if c.y != 0.0 {
            c.y > 0.0
        } else {
            c.x > 0.0
        };
        let p = if keep { *self } else { self.antipode() };
        // Adding +0.0 turns -0.0 into +0.0.
        Self(p.0.map(|v| v + 0.0))
    }
}

impl From<SpherePoint> for [f64; 3] {
    fn from(p: SpherePoint) -> Self {
        p.to_array()
    }
}

impl TryFrom<[f64; 3]> for SpherePoint {
    type Error = Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        SpherePoint::from_xyz(v[0], v[1], v[2])
    }
}

pub fn normalize(v: Vector3<f64>) -> Result<SpherePoint> {
    let norm = v.norm();
    if !(norm > MIN_NORM) {
        return Err(Error::NearZeroVector { norm });
    }
    Ok(SpherePoint(v / norm))
}

pub fn antipode(p: SpherePoint) -> SpherePoint {
    SpherePoint(-p.0)
}

/// Orthonormal basis of the tangent plane at `base`, oriented so that
/// `(e1, e2, base)` is right-handed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentFrame {
    base: SpherePoint,
    e1: Vector3<f64>,
    e2: Vector3<f64>,
}

impl TangentFrame {
    pub fn base(&self) -> &SpherePoint {
        &self.base
    }

    pub fn e1(&self) -> &Vector3<f64> {
        &self.e1
    }

    pub fn e2(&self) -> &Vector3<f64> {
        &self.e2
    }

    /// Tangent vector with coordinates `t` in this frame.
    pub fn lift(&self, t: Vector2<f64>) -> Vector3<f64> {
        self.e1 * t.x + self.e2 * t.y
    }
}

/// Frame built from the coordinate axis with the smallest `|component|` of
/// `p` (ties go to the earlier axis), Gram-Schmidt'ed against `p`.
pub fn tangent_frame(p: SpherePoint) -> TangentFrame {
    let c = p.coords();
    let abs = [c.x.abs(), c.y.abs(), c.z.abs()];
    let mut axis = 0;
    for k in 1..3 {
        if abs[k] < abs[axis] {
            axis = k;
        }
    }
    let mut a = Vector3::zeros();
    a[axis] = 1.0;
    // |c[axis]| <= 1/sqrt(3), so the projection has norm >= sqrt(2/3).
    let e1 = (a - c * c[axis]).normalize();
    let e2 = c.cross(&e1);
    TangentFrame { base: p, e1, e2 }
}

/// Projection retraction: `normalize(p + t1 e1 + t2 e2)`.
pub fn retract(p: SpherePoint, t: Vector2<f64>, frame: &TangentFrame) -> Result<SpherePoint> {
    debug_assert!(frame.base == p, "retract: frame does not belong to p");
    p.displace(frame.lift(t))
}

/// Area of the spherical triangle `abc` (positive when counter-clockwise seen
/// from outside).
pub fn spherical_triangle_area(a: &SpherePoint, b: &SpherePoint, c: &SpherePoint) -> f64 {
    let (a, b, c) = (a.coords(), b.coords(), c.coords());
    let triple = a.dot(&b.cross(c));
    let denom = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    2.0 * triple.atan2(denom)
}

/// Subdivided icosahedron whose vertex set is closed under `p -> -p`.
#[derive(Debug, Clone)]
pub struct SymmetricMesh {
    level: u32,
    vertices: Vec<SpherePoint>,
    triangles: Vec<[usize; 3]>,
    antipodes: Vec<usize>,
}

impl SymmetricMesh {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn vertices(&self) -> &[SpherePoint] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Index of the vertex at `-vertices[i]`.
    pub fn antipode_index(&self, i: usize) -> usize {
        self.antipodes[i]
    }

    pub fn antipode_table(&self) -> &[usize] {
        &self.antipodes
    }

    pub fn triangle_points(&self, t: usize) -> [SpherePoint; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn centroid(&self, t: usize) -> SpherePoint {
        let [a, b, c] = self.triangle_points(t);
        // The centroid of a small spherical triangle is far from the origin.
        normalize(a.coords() + b.coords() + c.coords()).expect("degenerate mesh triangle")
    }

    pub fn longest_edge(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        a.chord_distance(&b).max(b.chord_distance(&c)).max(c.chord_distance(&a))
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        spherical_triangle_area(&a, &b, &c)
    }

    /// Shared, lazily built mesh for `level`.
    pub fn shared(level: u32) -> Result<Arc<SymmetricMesh>> {
        static CACHE: [OnceLock<Arc<SymmetricMesh>>; (MAX_MESH_LEVEL + 1) as usize] =
            [const { OnceLock::new() }; (MAX_MESH_LEVEL + 1) as usize];
        if level > MAX_MESH_LEVEL {
            return Err(Error::LevelTooLarge {
                level,
                max: MAX_MESH_LEVEL,
            });
        }
        let slot = &CACHE[level as usize];
        if let Some(mesh) = slot.get() {
            return Ok(Arc::clone(mesh));
        }
        let mesh = Arc::new(build_symmetric_mesh(level)?);
        Ok(Arc::clone(slot.get_or_init(|| mesh)))
    }
}

fn icosahedron() -> (Vec<SpherePoint>, Vec<[usize; 3]>) {
    let t = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let vertices = raw
        .iter()
        .map(|v| normalize(Vector3::from(*v)).expect("icosahedron vertex"))
        .collect::<Vec<_>>();
    let mut faces = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for f in &mut faces {
        let [a, b, c] = [vertices[f[0]], vertices[f[1]], vertices[f[2]]];
        if spherical_triangle_area(&a, &b, &c) < 0.0 {
            f.swap(1, 2);
        }
    }
    (vertices, faces)
}

/// Icosahedron subdivided `level` times with vertices projected to the sphere.
pub fn build_symmetric_mesh(level: u32) -> Result<SymmetricMesh> {
    if level > MAX_MESH_LEVEL {
        return Err(Error::LevelTooLarge {
            level,
            max: MAX_MESH_LEVEL,
        });
    }
    let (mut vertices, mut triangles) = icosahedron();
    let mut antipodes = vertices
        .iter()
        .map(|v| {
            vertices
                .iter()
                .position(|w| w.coords() == &-v.coords())
                .expect("icosahedron is centrally symmetric")
        })
        .collect::<Vec<_>>();

    for _ in 0..level {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::with_capacity(triangles.len() * 2);
        let mut next = Vec::with_capacity(triangles.len() * 4);
        let mut midpoint = |i: usize, j: usize, vertices: &mut Vec<SpherePoint>| -> usize {
            let key = (i.min(j), i.max(j));
            *midpoints.entry(key).or_insert_with(|| {
                let m = normalize(vertices[key.0].coords() + vertices[key.1].coords())
                    .expect("adjacent vertices are never antipodal");
                vertices.push(m);
                vertices.len() - 1
            })
        };
        for &[a, b, c] in &triangles {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            next.push([a, ab, ca]);
            next.push([b, bc, ab]);
            next.push([c, ca, bc]);
            next.push([ab, bc, ca]);
        }
        antipodes.resize(vertices.len(), usize::MAX);
        for (&(i, j), &m) in &midpoints {
            let (ai, aj) = (antipodes[i], antipodes[j]);
            antipodes[m] = midpoints[&(ai.min(aj), ai.max(aj))];
        }
        triangles = next;
    }

    Ok(SymmetricMesh {
        level,
        vertices,
        triangles,
        antipodes,
    })
}
