//! P1 finite elements on structured triangulations of the unit square.
//!
//! Every square cell is cut along its (0,0)–(1,1) diagonal. Refining such a
//! mesh by halving keeps each coarse triangle a union of fine triangles with
//! the same orientation, so the P1 spaces are nested.

use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, MatrixPencil, SpdMatrix};

/// Uniform mesh of the unit square with `h = 2^-k`; only interior nodes carry
/// unknowns (homogeneous Dirichlet data). `k = 0` is the single cell, which has
/// no interior node and only serves as a trivial coarse level.
#[derive(Clone, Debug, PartialEq)]
pub struct StructuredMesh {
    level: u32,
}

impl StructuredMesh {
    pub fn new(level: u32) -> Result<Self> {
        if level > 14 {
            return Err(Error::Usage(format!("mesh level must lie in 0..=14, got {level}")));
        }
        Ok(Self { level })
    }

    /// Accepts `h` only when it is exactly a reciprocal power of two.
    pub fn from_h(h: f64) -> Result<Self> {
        Self::new(level_of(h)?)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Cells per side, `1/h`.
    pub fn cells(&self) -> usize {
        1usize << self.level
    }

    pub fn h(&self) -> f64 {
        1.0 / self.cells() as f64
    }

    /// Interior nodes per side.
    pub fn side(&self) -> usize {
        self.cells() - 1
    }

    pub fn num_nodes(&self) -> usize {
        self.side() * self.side()
    }

    /// Flat index of grid node `(i, j)`, `None` on the boundary.
    pub fn node(&self, i: usize, j: usize) -> Option<usize> {
        let m = self.side();
        if (1..=m).contains(&i) && (1..=m).contains(&j) {
            Some((j - 1) * m + (i - 1))
        } else {
            None
        }
    }

    /// Grid coordinates `(i, j)` of a flat index.
    pub fn grid_of(&self, idx: usize) -> (usize, usize) {
        let m = self.side();
        (idx % m + 1, idx / m + 1)
    }

    /// Both triangles of every cell as grid-vertex triples, counter-clockwise.
    pub fn elements(&self) -> impl Iterator<Item = [(usize, usize); 3]> + '_ {
        let n = self.cells();
        (0..n).flat_map(move |cj| {
            (0..n).flat_map(move |ci| {
                [
                    [(ci, cj), (ci + 1, cj), (ci + 1, cj + 1)],
                    [(ci, cj), (ci + 1, cj + 1), (ci, cj + 1)],
                ]
            })
        })
    }
}

pub(crate) fn level_of(h: f64) -> Result<u32> {
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::Usage(format!("mesh size must lie in (0, 1], got {h}")));
    }
    let k = (1.0 / h).log2().round();
    if (0.5f64.powi(k as i32) - h).abs() > 1e-12 * h {
        return Err(Error::Usage(format!("mesh size {h} is not a reciprocal power of two")));
    }
    Ok(k as u32)
}

/// Symmetric 2×2 diffusion tensor `[[a11, a12], [a12, a22]]`.
pub type Tensor = [[f64; 2]; 2];

pub enum Coefficient {
    Constant(Tensor),
    /// Evaluated once per element at the centroid.
    Field(Box<dyn Fn(f64, f64) -> Tensor + Send + Sync>),
}

impl Coefficient {
    pub fn identity() -> Self {
        Coefficient::Constant([[1.0, 0.0], [0.0, 1.0]])
    }

    fn at(&self, x: f64, y: f64) -> Tensor {
        match self {
            Coefficient::Constant(t) => *t,
            Coefficient::Field(f) => f(x, y),
        }
    }
}

fn check_spd_tensor(t: &Tensor, x: f64, y: f64) -> Result<()> {
    let sym = (t[0][1] - t[1][0]).abs() <= 1e-14 * (t[0][0].abs() + t[1][1].abs());
    let det = t[0][0] * t[1][1] - t[0][1] * t[1][0];
    if !sym || !(t[0][0] > 0.0) || !(det > 0.0) {
        return Err(Error::Domain(format!(
            "coefficient is not symmetric positive definite at ({x:.4}, {y:.4}): {t:?}"
        )));
    }
    Ok(())
}

/// Element stiffness `|T| Gᵀ K G` and consistent mass `|T|/12 (1 + δ_ij)`.
pub fn element_matrices(p: [(f64, f64); 3], k: &Tensor) -> ([[f64; 3]; 3], [[f64; 3]; 3]) {
    let (x0, y0) = p[0];
    let (x1, y1) = p[1];
    let (x2, y2) = p[2];
    let det = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0);
    let area = 0.5 * det.abs();
    // Gradients of the barycentric coordinates.
    let g = [
        [(y1 - y2) / det, (x2 - x1) / det],
        [(y2 - y0) / det, (x0 - x2) / det],
        [(y0 - y1) / det, (x1 - x0) / det],
    ];
    let mut ke = [[0.0; 3]; 3];
    let mut me = [[0.0; 3]; 3];
    for a in 0..3 {
        let kg = [
            k[0][0] * g[a][0] + k[0][1] * g[a][1],
            k[1][0] * g[a][0] + k[1][1] * g[a][1],
        ];
        for b in 0..3 {
            ke[b][a] = area * (kg[0] * g[b][0] + kg[1] * g[b][1]);
            me[a][b] = area / 12.0 * if a == b { 2.0 } else { 1.0 };
        }
    }
    (ke, me)
}

/// Stiffness and consistent mass on the interior nodes.
pub fn assemble_laplacian_p1(mesh: &StructuredMesh, coeff: &Coefficient) -> Result<MatrixPencil> {
    let h = mesh.h();
    let mut ta = Vec::with_capacity(mesh.num_nodes() * 7);
    let mut tm = Vec::with_capacity(mesh.num_nodes() * 7);
    for tri in mesh.elements() {
        let pts = tri.map(|(i, j)| (i as f64 * h, j as f64 * h));
        let cx = (pts[0].0 + pts[1].0 + pts[2].0) / 3.0;
        let cy = (pts[0].1 + pts[1].1 + pts[2].1) / 3.0;
        let k = coeff.at(cx, cy);
        check_spd_tensor(&k, cx, cy)?;
        let (ke, me) = element_matrices(pts, &k);
        let gi = tri.map(|(i, j)| mesh.node(i, j));
        for a in 0..3 {
            let Some(ia) = gi[a] else { continue };
            for b in 0..3 {
                let Some(ib) = gi[b] else { continue };
                ta.push((ia, ib, ke[a][b]));
                tm.push((ia, ib, me[a][b]));
            }
        }
    }
    let n = mesh.num_nodes();
    MatrixPencil::new(SpdMatrix::from_triplets(n, ta)?, SpdMatrix::from_triplets(n, tm)?)
}

/// P1 hat function of the diagonal-split grid, in units of its mesh size.
pub fn hat(dx: f64, dy: f64) -> f64 {
    (1.0 - dx.abs().max(dy.abs()).max((dx - dy).abs())).max(0.0)
}

/// Nested pair of meshes with the nodal interpolation `R₀ᵀ` (fine ← coarse).
#[derive(Clone, Debug)]
pub struct MeshHierarchy {
    pub coarse: StructuredMesh,
    pub fine: StructuredMesh,
    pub interp: CsrMatrix,
}

impl MeshHierarchy {
    /// `H / h`
    pub fn ratio(&self) -> usize {
        1usize << (self.fine.level() - self.coarse.level())
    }
}

pub fn build_mesh_hierarchy(coarse_h: f64, fine_h: f64) -> Result<MeshHierarchy> {
    let coarse = StructuredMesh::from_h(coarse_h)?;
    let fine = StructuredMesh::from_h(fine_h)?;
    if fine.level() < coarse.level() {
        return Err(Error::Usage(format!(
            "fine mesh size {fine_h} must not exceed coarse mesh size {coarse_h}"
        )));
    }
    let r = 1usize << (fine.level() - coarse.level());
    let mut trip = Vec::new();
    for cj in 1..=coarse.side() {
        for ci in 1..=coarse.side() {
            let col = coarse.node(ci, cj).expect("interior coarse node");
            let (fi0, fj0) = (ci * r, cj * r);
            // The hat is supported within one coarse cell of its node.
            for fj in fj0.saturating_sub(r).max(1)..=(fj0 + r).min(fine.side()) {
                for fi in fi0.saturating_sub(r).max(1)..=(fi0 + r).min(fine.side()) {
                    let dx = (fi as f64 - fi0 as f64) / r as f64;
                    let dy = (fj as f64 - fj0 as f64) / r as f64;
                    let v = hat(dx, dy);
                    if v > 0.0 {
                        trip.push((fine.node(fi, fj).expect("interior fine node"), col, v));
                    }
                }
            }
        }
    }
    let interp = CsrMatrix::from_triplets(fine.num_nodes(), coarse.num_nodes(), trip)?;
    Ok(MeshHierarchy { coarse, fine, interp })
}

/// One fine-node index set per coarse cell (row-major over cells).
///
/// With positive overlap a cell `[a, b]` grows to the open interval
/// `(a − δ, b + δ)`, `δ = overlap_ratio·H`, in each direction; nodes on the
/// grown boundary are not solved for, as for a Dirichlet local problem. With
/// zero overlap the cells are half-open `(a, b]`, so a node on a shared cell
/// edge belongs to the cell on its left or below and the sets partition the
/// interior nodes.
pub fn subdomain_index_sets(hier: &MeshHierarchy, overlap_ratio: f64) -> Result<Vec<Vec<usize>>> {
    if !(0.0..=1.0).contains(&overlap_ratio) {
        return Err(Error::Usage(format!("overlap ratio must lie in [0, 1], got {overlap_ratio}")));
    }
    let r = hier.ratio() as f64;
    let d = overlap_ratio * r;
    let nc = hier.coarse.cells();
    let fine = &hier.fine;
    let inside = |i: usize, c: usize| -> bool {
        let (lo, hi) = (c as f64 * r, (c + 1) as f64 * r);
        let x = i as f64;
        if overlap_ratio == 0.0 {
            x > lo && x <= hi
        } else {
            x > lo - d && x < hi + d
        }
    };
    let mut sets = Vec::with_capacity(nc * nc);
    for cj in 0..nc {
        for ci in 0..nc {
            let mut s = Vec::new();
            for fj in 1..=fine.side() {
                if !inside(fj, cj) {
                    continue;
                }
                for fi in 1..=fine.side() {
                    if inside(fi, ci) {
                        s.push(fine.node(fi, fj).expect("interior"));
                    }
                }
            }
            sets.push(s);
        }
    }
    Ok(sets)
}
