//! Procedural meshes used by tests, the acceptance suite and `abelquad generate`.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::mesh::Mesh;

pub fn cube() -> Mesh {
    let p = vec![
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [1.0, 1.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [1.0, 0.0, 1.0],
        [1.0, 1.0, 1.0],
        [0.0, 1.0, 1.0],
    ];
    let faces = vec![
        vec![0, 3, 2, 1],
        vec![4, 5, 6, 7],
        vec![0, 1, 5, 4],
        vec![1, 2, 6, 5],
        vec![2, 3, 7, 6],
        vec![3, 0, 4, 7],
    ];
    Mesh::from_faces(8, &faces, Some(p)).expect("cube is valid")
}

/// `nu × nv` quad grid with periodic identifications, embedded as a torus of
/// revolution. Vertex `(i, j)` has id `j * nu + i`; `i` runs along the rows.
pub fn torus_grid(nu: usize, nv: usize) -> Mesh {
    assert!(nu >= 3 && nv >= 3);
    let id = |i: usize, j: usize| (j % nv) * nu + (i % nu);
    let (big, small) = (3.0, 1.0);
    let mut pos = Vec::with_capacity(nu * nv);
    for j in 0..nv {
        for i in 0..nu {
            let u = 2.0 * PI * i as f64 / nu as f64;
            let v = 2.0 * PI * j as f64 / nv as f64;
            let r = big + small * v.cos();
            pos.push([r * u.cos(), r * u.sin(), small * v.sin()]);
        }
    }
    let mut faces = Vec::with_capacity(nu * nv);
    for j in 0..nv {
        for i in 0..nu {
            faces.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    Mesh::from_faces(nu * nv, &faces, Some(pos)).expect("torus grid is valid")
}

/// Square-tiled surface: square `s` has right neighbour `right[s]` and upper
/// neighbour `up[s]`. Each square is subdivided into `n × n` quads.
pub fn origami(right: &[usize], up: &[usize], n: usize) -> Mesh {
    let ns = right.len();
    assert_eq!(ns, up.len());
    // a square glued to itself needs n >= 3 to avoid doubled edges
    assert!(n >= 3);
    let w = n + 1;
    let key = |s: usize, i: usize, j: usize| (s * w + j) * w + i;
    let mut parent: Vec<usize> = (0..ns * w * w).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut union = |a: usize, b: usize| {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    };
    for s in 0..ns {
        for t in 0..=n {
            union(key(s, n, t), key(right[s], 0, t));
            union(key(s, t, n), key(up[s], t, 0));
        }
    }
    // Squares are laid out along x for the (cosmetic) embedding.
    let mut ids = HashMap::new();
    let mut pos = Vec::new();
    for s in 0..ns {
        for j in 0..=n {
            for i in 0..=n {
                let r = find(&mut parent, key(s, i, j));
                ids.entry(r).or_insert_with(|| {
                    pos.push([
                        s as f64 * 1.5 + i as f64 / n as f64,
                        j as f64 / n as f64,
                        0.0,
                    ]);
                    pos.len() - 1
                });
            }
        }
    }
    let mut vid = |s: usize, i: usize, j: usize| ids[&find(&mut parent, key(s, i, j))];
    let mut faces = Vec::with_capacity(ns * n * n);
    for s in 0..ns {
        for j in 0..n {
            for i in 0..n {
                faces.push(vec![
                    vid(s, i, j),
                    vid(s, i + 1, j),
                    vid(s, i + 1, j + 1),
                    vid(s, i, j + 1),
                ]);
            }
        }
    }
    Mesh::from_faces(pos.len(), &faces, Some(pos)).expect("origami is a valid surface")
}

/// Four-square genus-two origami whose corners all meet at one valence-12
/// vertex (plus one regular corner vertex).
pub fn origami_genus2(n: usize) -> Mesh {
    origami(&[1, 2, 0, 3], &[3, 1, 2, 0], n)
}

/// Open quad patch whose vertex 0 has valence five.
pub fn valence_five_patch() -> (usize, Vec<Vec<usize>>) {
    let faces = (0..5)
        .map(|k| vec![0, 1 + k, 6 + k, 1 + (k + 1) % 5])
        .collect();
    (11, faces)
}

/// Geodesic sphere by repeated 4-to-1 subdivision of an icosahedron.
pub fn icosphere(level: usize) -> Mesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut pos: Vec<[f64; 3]> = vec![
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
    let mut faces: Vec<[usize; 3]> = vec![
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
    let normalize = |p: [f64; 3]| {
        let l = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        [p[0] / l, p[1] / l, p[2] / l]
    };
    for p in pos.iter_mut() {
        *p = normalize(*p);
    }
    for _ in 0..level {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let mut m = [0; 3];
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                m[k] = *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                    let (pa, pb) = (pos[a], pos[b]);
                    pos.push(normalize([pa[0] + pb[0], pa[1] + pb[1], pa[2] + pb[2]]));
                    pos.len() - 1
                });
            }
            next.push([f[0], m[0], m[2]]);
            next.push([f[1], m[1], m[0]]);
            next.push([f[2], m[2], m[1]]);
            next.push([m[0], m[1], m[2]]);
        }
        faces = next;
    }
    let faces: Vec<Vec<usize>> = faces.iter().map(|f| f.to_vec()).collect();
    Mesh::from_faces(pos.len(), &faces, Some(pos)).expect("icosphere is valid")
}

/// Planar `nx × ny` quad grid covering `[0, width] × [0, height]`.
pub fn rectangle(nx: usize, ny: usize, width: f64, height: f64) -> Mesh {
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut pos = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            pos.push([
                width * i as f64 / nx as f64,
                height * j as f64 / ny as f64,
                0.0,
            ]);
        }
    }
    let mut faces = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            faces.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    Mesh::from_faces(pos.len(), &faces, Some(pos)).expect("rectangle is valid")
}

/// Polar triangulation of the unit disk: a centre vertex (id 0) plus `rings`
/// rings of `sectors` vertices at radius `(i / rings)^grading`.
pub fn polar_disk(rings: usize, sectors: usize, grading: f64) -> Mesh {
    polar_mesh(rings, sectors, |i, phi| {
        let r = (i as f64 / rings as f64).powf(grading);
        [r * phi.cos(), r * phi.sin(), 0.0]
    })
}

/// Upper unit hemisphere with the same connectivity as [`polar_disk`]; the
/// polar angle grows linearly with the ring index.
pub fn hemisphere(rings: usize, sectors: usize) -> Mesh {
    polar_mesh(rings, sectors, |i, phi| {
        let theta = 0.5 * PI * i as f64 / rings as f64;
        [
            theta.sin() * phi.cos(),
            theta.sin() * phi.sin(),
            theta.cos(),
        ]
    })
}

fn polar_mesh(rings: usize, sectors: usize, place: impl Fn(usize, f64) -> [f64; 3]) -> Mesh {
    assert!(rings >= 1 && sectors >= 3);
    let id = |i: usize, k: usize| 1 + (i - 1) * sectors + (k % sectors);
    let mut pos = vec![place(0, 0.0)];
    for i in 1..=rings {
        for k in 0..sectors {
            // stagger alternate rings to keep triangles well shaped
            let phi = 2.0 * PI * (k as f64 + 0.5 * (i % 2) as f64) / sectors as f64;
            pos.push(place(i, phi));
        }
    }
    let mut faces = Vec::new();
    for k in 0..sectors {
        faces.push(vec![0, id(1, k), id(1, k + 1)]);
    }
    for i in 1..rings {
        for k in 0..sectors {
            let (a, b) = (id(i, k), id(i, k + 1));
            let (c, d) = (id(i + 1, k), id(i + 1, k + 1));
            if i % 2 == 1 {
                faces.push(vec![a, c, d]);
                faces.push(vec![a, d, b]);
            } else {
                faces.push(vec![a, c, b]);
                faces.push(vec![b, c, d]);
            }
        }
    }
    Mesh::from_faces(pos.len(), &faces, Some(pos)).expect("polar mesh is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_is_genus_one() {
        let m = torus_grid(6, 5);
        assert_eq!(m.euler_characteristic(), 0);
        assert_eq!(m.genus(), 1);
        assert!((0..m.num_vertices()).all(|v| m.valence(v) == 4));
    }

    #[test]
    fn origami_has_one_cone() {
        for n in [3, 4, 5] {
            let m = origami_genus2(n);
            assert!(m.is_closed());
            assert_eq!(m.num_faces(), 4 * n * n);
            assert_eq!(m.genus(), 2);
            let valences: Vec<usize> = (0..m.num_vertices()).map(|v| m.valence(v)).collect();
            assert_eq!(valences.iter().filter(|&&k| k == 12).count(), 1);
            assert!(valences.iter().all(|&k| k == 4 || k == 12));
        }
    }

    #[test]
    fn sphere_and_disks() {
        let s = icosphere(2);
        assert_eq!(s.euler_characteristic(), 2);
        assert_eq!(s.num_faces(), 320);
        let d = polar_disk(10, 12, 2.0);
        assert_eq!(d.boundary_loops().len(), 1);
        assert_eq!(d.euler_characteristic(), 1);
        assert_eq!(d.num_faces(), 12 + 2 * 12 * 9);
        let h = hemisphere(6, 16);
        assert_eq!(h.genus(), 0);
        let r = rectangle(3, 2, 1.0, 1.0);
        assert_eq!(r.euler_characteristic(), 1);
    }
}
