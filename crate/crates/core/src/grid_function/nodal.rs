//! Zero-set measure by piecewise-linear interpolation.
//!
//! The interpolation lattice is the set of cell centres plus one layer of
//! boundary nodes on the faces of the cube (coordinates `0` and `1`), whose
//! values are extrapolated linearly from the two nearest centres. The
//! lattice therefore spans the whole cube, so a straight interface is
//! measured exactly.
//!
//! Nodes are classified as positive (`v > 0`) or not; interfaces pass through
//! every lattice edge joining the two classes, at the linearly interpolated
//! root.

use super::GridFunction;

pub(super) fn nodal_measure(f: &GridFunction) -> f64 {
    let lattice = Lattice::new(f);
    match f.dim() {
        1 => lattice.sign_changes(),
        2 => lattice.marching_squares(),
        _ => lattice.marching_tetrahedra(),
    }
}

struct Lattice {
    /// Nodes per axis (`n + 2`).
    m: usize,
    coords: Vec<f64>,
    values: Vec<f64>,
}

impl Lattice {
    fn new(f: &GridFunction) -> Self {
        let (dim, n) = (f.dim(), f.n());
        let m = n + 2;
        let h = f.h();
        let mut coords = Vec::with_capacity(m);
        coords.push(0.0);
        coords.extend((0..n).map(|i| (i as f64 + 0.5) * h));
        coords.push(1.0);

        let total = m.pow(dim as u32);
        let mut values = vec![0.0; total];
        let stride = |a: usize| m.pow(a as u32);
        let decode = |mut idx: usize| {
            let mut out = [0usize; 3];
            for o in out.iter_mut().take(dim) {
                *o = idx % m;
                idx /= m;
            }
            out
        };
        for (idx, &v) in f.values().iter().enumerate() {
            let c = f.multi_index(idx);
            let pos: usize = (0..dim).map(|a| (c[a] + 1) * stride(a)).sum();
            values[pos] = v;
        }
        // Fill the boundary layer one axis at a time; later axes see the
        // nodes filled by earlier ones, which extrapolates the corners too.
        for a in 0..dim {
            let s = stride(a);
            for idx in 0..total {
                let c = decode(idx);
                if c[a] != 0 && c[a] != m - 1 {
                    continue;
                }
                let filled = (a + 1..dim).all(|b| c[b] != 0 && c[b] != m - 1);
                if !filled {
                    continue;
                }
                let (near, far) = if c[a] == 0 {
                    (idx + s, idx + 2 * s)
                } else {
                    (idx - s, idx - 2 * s)
                };
                values[idx] = if n == 1 {
                    values[near]
                } else {
                    values[near] + 0.5 * (values[near] - values[far])
                };
            }
        }
        Self { m, coords, values }
    }

    fn sign_changes(&self) -> f64 {
        self.values
            .windows(2)
            .filter(|w| (w[0] > 0.0) != (w[1] > 0.0))
            .count() as f64
    }

    fn marching_squares(&self) -> f64 {
        let m = self.m;
        let mut length = 0.0;
        for j in 0..m - 1 {
            for i in 0..m - 1 {
                let ids = [j * m + i, j * m + i + 1, (j + 1) * m + i + 1, (j + 1) * m + i];
                let pts = [
                    [self.coords[i], self.coords[j]],
                    [self.coords[i + 1], self.coords[j]],
                    [self.coords[i + 1], self.coords[j + 1]],
                    [self.coords[i], self.coords[j + 1]],
                ];
                let vals = ids.map(|k| self.values[k]);
                let pos = vals.map(|v| v > 0.0);
                // Crossing on edge e joins corner e and corner e+1.
                let mut cross: [Option<[f64; 2]>; 4] = [None; 4];
                let mut count = 0;
                for (a, slot) in cross.iter_mut().enumerate() {
                    let b = (a + 1) % 4;
                    if pos[a] != pos[b] {
                        let t = vals[a] / (vals[a] - vals[b]);
                        *slot = Some([
                            pts[a][0] + t * (pts[b][0] - pts[a][0]),
                            pts[a][1] + t * (pts[b][1] - pts[a][1]),
                        ]);
                        count += 1;
                    }
                }
                let seg = |p: usize, q: usize| {
                    let (p, q) = (cross[p].unwrap(), cross[q].unwrap());
                    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
                };
                match count {
                    0 => {}
                    2 => {
                        let mut it = (0..4).filter(|&e| cross[e].is_some());
                        let (p, q) = (it.next().unwrap(), it.next().unwrap());
                        length += seg(p, q);
                    }
                    _ => {
                        // Saddle: the centre value decides which diagonal is connected.
                        let centre = vals.iter().sum::<f64>() / 4.0;
                        if (centre > 0.0) == pos[0] {
                            length += seg(0, 1) + seg(2, 3);
                        } else {
                            length += seg(3, 0) + seg(1, 2);
                        }
                    }
                }
            }
        }
        length
    }

    fn marching_tetrahedra(&self) -> f64 {
        // Kuhn subdivision of the unit cube into six tetrahedra along the
        // main diagonal; corner k has offset bits (k & 1, k >> 1 & 1, k >> 2 & 1).
        const TETS: [[usize; 4]; 6] = [
            [0, 1, 3, 7],
            [0, 1, 5, 7],
            [0, 2, 3, 7],
            [0, 2, 6, 7],
            [0, 4, 5, 7],
            [0, 4, 6, 7],
        ];
        let m = self.m;
        let mut area = 0.0;
        for k in 0..m - 1 {
            for j in 0..m - 1 {
                for i in 0..m - 1 {
                    let mut pts = [[0.0; 3]; 8];
                    let mut vals = [0.0; 8];
                    for (c, (p, v)) in pts.iter_mut().zip(vals.iter_mut()).enumerate() {
                        let (di, dj, dk) = (c & 1, (c >> 1) & 1, (c >> 2) & 1);
                        *p = [self.coords[i + di], self.coords[j + dj], self.coords[k + dk]];
                        *v = self.values[((k + dk) * m + j + dj) * m + i + di];
                    }
                    if vals.iter().all(|v| *v > 0.0) || vals.iter().all(|v| *v <= 0.0) {
                        continue;
                    }
                    for tet in TETS {
                        area += tet_area(tet.map(|c| pts[c]), tet.map(|c| vals[c]));
                    }
                }
            }
        }
        area
    }
}

fn root(p: [f64; 3], q: [f64; 3], vp: f64, vq: f64) -> [f64; 3] {
    let t = vp / (vp - vq);
    [
        p[0] + t * (q[0] - p[0]),
        p[1] + t * (q[1] - p[1]),
        p[2] + t * (q[2] - p[2]),
    ]
}

fn triangle_area(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let x = u[1] * v[2] - u[2] * v[1];
    let y = u[2] * v[0] - u[0] * v[2];
    let z = u[0] * v[1] - u[1] * v[0];
    0.5 * (x * x + y * y + z * z).sqrt()
}

fn tet_area(p: [[f64; 3]; 4], v: [f64; 4]) -> f64 {
    let inside: Vec<usize> = (0..4).filter(|&i| v[i] > 0.0).collect();
    let outside: Vec<usize> = (0..4).filter(|&i| v[i] <= 0.0).collect();
    let cut = |a: usize, b: usize| root(p[a], p[b], v[a], v[b]);
    match (inside.len(), outside.len()) {
        (1, 3) | (3, 1) => {
            let (lone, rest) = if inside.len() == 1 {
                (inside[0], &outside)
            } else {
                (outside[0], &inside)
            };
            triangle_area(cut(lone, rest[0]), cut(lone, rest[1]), cut(lone, rest[2]))
        }
        (2, 2) => {
            let (a, b, c, d) = (inside[0], inside[1], outside[0], outside[1]);
            let (ac, ad, bd, bc) = (cut(a, c), cut(a, d), cut(b, d), cut(b, c));
            triangle_area(ac, ad, bd) + triangle_area(ac, bd, bc)
        }
        _ => 0.0,
    }
}
