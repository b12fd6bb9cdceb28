//! Dense reference evolution for small instances.
//!
//! The step operator is assembled as explicit matrices: a block-diagonal
//! coin matrix (one `(d+1) x (d+1)` block per vertex) multiplied by the
//! shift permutation, both written out entry by entry from the operator
//! definitions rather than routed through the sparse kernels.  This is
//! the independent oracle the sparse engine is checked against.

use crate::error::{Result, WalkError};
use crate::lattice::{CoinFamily, CoinSpec, LatticeGeometry, VertexId, WalkState};
use crate::operators::MarkedSet;

/// Reference scale only; keeps the O(dim^2) storage trivially small.
pub const MAX_DENSE_DIM: usize = 512;

/// Explicit `(d+1)N x (d+1)N` step matrix with its configuration echo.
#[derive(Debug, Clone)]
pub struct DenseUnitary {
    dim: usize,
    /// Row-major entries.
    entries: Vec<f64>,
    geometry: LatticeGeometry,
    spec: CoinSpec,
    marked: MarkedSet,
}

impl DenseUnitary {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn geometry(&self) -> &LatticeGeometry {
        &self.geometry
    }

    pub fn spec(&self) -> &CoinSpec {
        &self.spec
    }

    pub fn marked(&self) -> &MarkedSet {
        &self.marked
    }

    /// Max-norm of `U^T U - I`.
    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut dot = 0.0;
                for k in 0..n {
                    dot += self.at(k, i) * self.at(k, j);
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

fn matmul(dim: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; dim * dim];
    for i in 0..dim {
        for k in 0..dim {
            let aik = a[i * dim + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..dim {
                out[i * dim + j] += aik * b[k * dim + j];
            }
        }
    }
    out
}

/// Grover diffusion block `2 psi psi^T - I`.
fn diffusion_block(psi: &[f64]) -> Vec<f64> {
    let c = psi.len();
    let mut m = vec![0.0; c * c];
    for i in 0..c {
        for j in 0..c {
            m[i * c + j] = 2.0 * psi[i] * psi[j] - if i == j { 1.0 } else { 0.0 };
        }
    }
    m
}

fn small_matmul(c: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; c * c];
    for i in 0..c {
        for k in 0..c {
            for j in 0..c {
                out[i * c + j] += a[i * c + k] * b[k * c + j];
            }
        }
    }
    out
}

/// Coin block applied at a marked vertex for the given family.
fn marked_block(family: CoinFamily, psi: &[f64]) -> Vec<f64> {
    let c = psi.len();
    let c0 = diffusion_block(psi);
    match family {
        CoinFamily::G => {
            // C0 * (I - 2 |loop><loop|)
            let mut refl = vec![0.0; c * c];
            for i in 0..c {
                refl[i * c + i] = 1.0;
            }
            refl[(c - 1) * c + (c - 1)] = -1.0;
            small_matmul(c, &c0, &refl)
        }
        CoinFamily::Akr => c0.iter().map(|x| -x).collect(),
        CoinFamily::Skw => {
            let mut m = vec![0.0; c * c];
            for i in 0..c {
                m[i * c + i] = -1.0;
            }
            m
        }
    }
}

/// Assembles `U = S * C` as explicit matrices.
pub fn build_dense_step(
    geometry: LatticeGeometry,
    spec: &CoinSpec,
    marked: &MarkedSet,
) -> Result<DenseUnitary> {
    let dim = geometry.state_len();
    if dim > MAX_DENSE_DIM {
        return Err(WalkError::DenseTooLarge { requested: dim, max: MAX_DENSE_DIM });
    }
    let coin_dim = geometry.coin_dim();
    let psi = spec.coin_state(geometry.degree());
    let mask = marked.mask(&geometry);

    // block-diagonal coin matrix
    let unmarked = diffusion_block(&psi);
    let at_marked = marked_block(spec.family, &psi);
    let mut coin = vec![0.0; dim * dim];
    for v in 0..geometry.vertex_count() {
        let block = if mask[v] { &at_marked } else { &unmarked };
        for i in 0..coin_dim {
            for j in 0..coin_dim {
                coin[(v * coin_dim + i) * dim + (v * coin_dim + j)] = block[i * coin_dim + j];
            }
        }
    }

    // shift permutation
    let mut shift = vec![0.0; dim * dim];
    for v in 0..geometry.vertex_count() {
        for &dir in geometry.edge_directions() {
            let w = geometry.neighbor(VertexId(v), dir)?;
            let src = v * coin_dim + geometry.slot(dir)?;
            let dest = w.0 * coin_dim + geometry.slot(dir.reversed())?;
            shift[dest * dim + src] = 1.0;
        }
        let l = v * coin_dim + geometry.degree();
        shift[l * dim + l] = 1.0;
    }

    let entries = matmul(dim, &shift, &coin);
    Ok(DenseUnitary { dim, entries, geometry, spec: *spec, marked: marked.clone() })
}

/// Evolves a state by `steps` matrix-vector products.
pub fn dense_evolve(u: &DenseUnitary, state: &WalkState, steps: usize) -> Result<WalkState> {
    if state.amplitudes().len() != u.dim {
        return Err(WalkError::DimensionMismatch {
            state: state.amplitudes().len(),
            operator: u.dim,
        });
    }
    let mut current = state.amplitudes().to_vec();
    let mut next = vec![0.0; u.dim];
    for _ in 0..steps {
        for (i, slot) in next.iter_mut().enumerate() {
            let row = &u.entries[i * u.dim..(i + 1) * u.dim];
            *slot = row.iter().zip(&current).map(|(m, x)| m * x).sum();
        }
        std::mem::swap(&mut current, &mut next);
    }
    WalkState::from_amplitudes(u.geometry, current)
}
