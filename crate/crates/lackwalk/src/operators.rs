//! Walk-step operators: oracles, per-vertex Grover diffusion and the
//! flip-flop shift.
//!
//! All operators act in place on a [`WalkState`].  The coin and oracle
//! operators touch disjoint `(d+1)`-blocks, so the parallel build fans
//! them out over vertex blocks with rayon; the shift is a permutation and
//! goes through a double buffer (read old, write new) so the parallel
//! gather stays race-free.  Per-block arithmetic is identical in both
//! builds, which keeps results bit-for-bit deterministic.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, WalkError};
use crate::lattice::{CoinSpec, LatticeGeometry, VertexId, WalkState};

/// How a marked set was generated; carried along for provenance in output
/// records.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Block { k: usize, l: usize, anchor: usize },
    Diagonal,
    Run { m: usize, anchor: usize },
    Explicit,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Provenance::Block { k, l, .. } => write!(f, "block{}x{}", k, l),
            Provenance::Diagonal => write!(f, "diag"),
            Provenance::Run { m, .. } => write!(f, "run{}", m),
            Provenance::Explicit => write!(f, "explicit"),
        }
    }
}

/// Ordered set of distinct marked vertices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkedSet {
    vertices: Vec<VertexId>,
    provenance: Provenance,
}

impl MarkedSet {
    pub fn new(
        geometry: &LatticeGeometry,
        vertices: Vec<VertexId>,
        provenance: Provenance,
    ) -> Result<Self> {
        let mut seen = vec![false; geometry.vertex_count()];
        for &v in &vertices {
            if !geometry.contains(v) {
                return Err(WalkError::VertexOutOfRange {
                    vertex: v.0,
                    vertex_count: geometry.vertex_count(),
                });
            }
            if seen[v.0] {
                return Err(WalkError::DuplicateMarkedVertex(v.0));
            }
            seen[v.0] = true;
        }
        Ok(Self { vertices, provenance })
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Per-vertex membership mask.
    pub fn mask(&self, geometry: &LatticeGeometry) -> Vec<bool> {
        let mut mask = vec![false; geometry.vertex_count()];
        for &v in &self.vertices {
            mask[v.0] = true;
        }
        mask
    }

    /// The set translated by a lattice vector.
    pub fn translated(&self, geometry: &LatticeGeometry, dx: usize, dy: usize) -> Self {
        Self {
            vertices: self
                .vertices
                .iter()
                .map(|&v| geometry.translate(v, dx, dy))
                .collect(),
            provenance: Provenance::Explicit,
        }
    }
}

fn check_marked(state: &WalkState, marked: &MarkedSet) -> Result<()> {
    for &v in marked.vertices() {
        if !state.geometry().contains(v) {
            return Err(WalkError::VertexOutOfRange {
                vertex: v.0,
                vertex_count: state.geometry().vertex_count(),
            });
        }
    }
    Ok(())
}

/// Negates the loop amplitude at each marked vertex; everything else is
/// untouched.  This is the phase oracle of the loop-flip coin.
pub fn apply_loop_oracle(state: &mut WalkState, marked: &MarkedSet) -> Result<()> {
    check_marked(state, marked)?;
    let loop_slot = state.geometry().degree();
    for &v in marked.vertices() {
        state.block_mut(v)[loop_slot] = -state.block_mut(v)[loop_slot];
    }
    Ok(())
}

/// Negates the full coin block at each marked vertex (the AKR-style
/// marked-vertex phase flip).
pub fn apply_akr_oracle(state: &mut WalkState, marked: &MarkedSet) -> Result<()> {
    check_marked(state, marked)?;
    for &v in marked.vertices() {
        for a in state.block_mut(v) {
            *a = -*a;
        }
    }
    Ok(())
}

#[inline]
fn diffuse_block(block: &mut [f64], psi: &[f64]) {
    let mut dot = 0.0;
    for (b, p) in block.iter().zip(psi) {
        dot += b * p;
    }
    let twice = 2.0 * dot;
    for (b, p) in block.iter_mut().zip(psi) {
        *b = twice * p - *b;
    }
}

/// Reflects every coin block about the weighted uniform coin state:
/// `b -> 2 <psi|b> psi - b`.
pub fn apply_grover_diffusion(state: &mut WalkState, spec: &CoinSpec) {
    let psi = spec.coin_state(state.geometry().degree());
    let coin_dim = state.geometry().coin_dim();
    for_each_block(state.amplitudes_mut(), coin_dim, |_, block| {
        diffuse_block(block, &psi);
    });
}

/// Sequential twin of [`apply_grover_diffusion`]; kept for the scalar
/// baseline in the benches.
pub fn apply_grover_diffusion_sequential(state: &mut WalkState, spec: &CoinSpec) {
    let psi = spec.coin_state(state.geometry().degree());
    let coin_dim = state.geometry().coin_dim();
    for block in state.amplitudes_mut().chunks_exact_mut(coin_dim) {
        diffuse_block(block, &psi);
    }
}

/// Grover diffusion at unmarked vertices, `-I` at marked vertices.
pub fn apply_skw_coin(state: &mut WalkState, spec: &CoinSpec, marked: &MarkedSet) -> Result<()> {
    check_marked(state, marked)?;
    let psi = spec.coin_state(state.geometry().degree());
    let coin_dim = state.geometry().coin_dim();
    let mask = marked.mask(state.geometry());
    for_each_block(state.amplitudes_mut(), coin_dim, |v, block| {
        if mask[v] {
            for a in block {
                *a = -*a;
            }
        } else {
            diffuse_block(block, &psi);
        }
    });
    Ok(())
}

fn shift_gather(geometry: &LatticeGeometry, src: &[f64], dest_v: usize, dest_block: &mut [f64]) {
    let coin_dim = geometry.coin_dim();
    let v = VertexId(dest_v);
    // amplitude leaving u along dir arrives at neighbor(u, dir) with the
    // coin reversed, so slot dir of the dest block gathers from
    // u = neighbor(v, dir) at slot reversed(dir)
    for &dir in geometry.edge_directions() {
        let from = geometry.neighbor(v, dir).expect("edge direction");
        let src_slot = geometry.slot(dir.reversed()).expect("edge slot");
        let dest_slot = geometry.slot(dir).expect("edge slot");
        dest_block[dest_slot] = src[from.0 * coin_dim + src_slot];
    }
    let loop_slot = geometry.degree();
    dest_block[loop_slot] = src[dest_v * coin_dim + loop_slot];
}

/// Flip-flop shift: amplitude moves to the periodic neighbor and the coin
/// direction reverses; the loop amplitude stays put.  Double-buffered
/// permutation.
pub fn apply_flipflop_shift(state: &mut WalkState) {
    let geometry = *state.geometry();
    let coin_dim = geometry.coin_dim();
    let src = state.amplitudes().to_vec();
    for_each_block(state.amplitudes_mut(), coin_dim, |v, block| {
        shift_gather(&geometry, &src, v, block);
    });
}

/// Sequential twin of [`apply_flipflop_shift`].
pub fn apply_flipflop_shift_sequential(state: &mut WalkState) {
    let geometry = *state.geometry();
    let coin_dim = geometry.coin_dim();
    let src = state.amplitudes().to_vec();
    for (v, block) in state.amplitudes_mut().chunks_exact_mut(coin_dim).enumerate() {
        shift_gather(&geometry, &src, v, block);
    }
}

/// One step of the evolution `U = S * C`.
///
/// Family G applies the loop oracle, then diffusion, then the shift
/// (the oracle is the rightmost factor of the coin).  AKR swaps in the
/// full-block oracle; SKW applies its combined coin and then the shift.
pub fn step(state: &mut WalkState, spec: &CoinSpec, marked: &MarkedSet) -> Result<()> {
    if marked.is_empty() {
        return Err(WalkError::EmptyMarkedSet);
    }
    match spec.family {
        crate::lattice::CoinFamily::G => {
            apply_loop_oracle(state, marked)?;
            apply_grover_diffusion(state, spec);
        }
        crate::lattice::CoinFamily::Akr => {
            apply_akr_oracle(state, marked)?;
            apply_grover_diffusion(state, spec);
        }
        crate::lattice::CoinFamily::Skw => {
            apply_skw_coin(state, spec, marked)?;
        }
    }
    apply_flipflop_shift(state);
    Ok(())
}

/// Fully sequential walk step, independent of the `parallel` feature.
pub fn step_sequential(state: &mut WalkState, spec: &CoinSpec, marked: &MarkedSet) -> Result<()> {
    if marked.is_empty() {
        return Err(WalkError::EmptyMarkedSet);
    }
    match spec.family {
        crate::lattice::CoinFamily::G => {
            apply_loop_oracle(state, marked)?;
            apply_grover_diffusion_sequential(state, spec);
        }
        crate::lattice::CoinFamily::Akr => {
            apply_akr_oracle(state, marked)?;
            apply_grover_diffusion_sequential(state, spec);
        }
        crate::lattice::CoinFamily::Skw => {
            // the marked mask makes the skw block loop cheap either way
            apply_skw_coin(state, spec, marked)?;
        }
    }
    apply_flipflop_shift_sequential(state);
    Ok(())
}

#[cfg(feature = "parallel")]
fn for_each_block<F>(amps: &mut [f64], coin_dim: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    amps.par_chunks_exact_mut(coin_dim)
        .enumerate()
        .for_each(|(v, block)| f(v, block));
}

#[cfg(not(feature = "parallel"))]
fn for_each_block<F>(amps: &mut [f64], coin_dim: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    for (v, block) in amps.chunks_exact_mut(coin_dim).enumerate() {
        f(v, block);
    }
}
