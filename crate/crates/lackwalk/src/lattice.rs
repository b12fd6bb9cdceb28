//! Lattice geometry, coin/vertex indexing and the walk state container.
//!
//! Amplitudes are real: the initial state, the Grover diffusion, the
//! oracles and the flip-flop shift are all real-valued maps, so the state
//! stays in the real subspace for the whole evolution.  The layout is
//! vertex-major: the `d+1` coin amplitudes of vertex 0, then vertex 1 and
//! so on, with the self-loop slot always last inside a block.

use serde::Serialize;

use crate::error::{Result, WalkError};

/// Periodic lattice in one or two dimensions.  2D lattices are square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LatticeGeometry {
    dimension: u8,
    side: usize,
    degree: usize,
    vertex_count: usize,
}

/// Flat vertex index in `[0, N)`.  In 2D, `index = y * side + x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct VertexId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoinDirection {
    XPlus,
    XMinus,
    YPlus,
    YMinus,
    Loop,
}

impl CoinDirection {
    pub fn reversed(self) -> Self {
        match self {
            CoinDirection::XPlus => CoinDirection::XMinus,
            CoinDirection::XMinus => CoinDirection::XPlus,
            CoinDirection::YPlus => CoinDirection::YMinus,
            CoinDirection::YMinus => CoinDirection::YPlus,
            CoinDirection::Loop => CoinDirection::Loop,
        }
    }

    fn name(self) -> &'static str {
        match self {
            CoinDirection::XPlus => "x+",
            CoinDirection::XMinus => "x-",
            CoinDirection::YPlus => "y+",
            CoinDirection::YMinus => "y-",
            CoinDirection::Loop => "loop",
        }
    }
}

impl LatticeGeometry {
    /// Builds a 1D ring (`side` vertices, degree 2) or a 2D torus
    /// (`side * side` vertices, degree 4).
    pub fn new(dimension: u8, side: usize) -> Result<Self> {
        if dimension != 1 && dimension != 2 {
            return Err(WalkError::InvalidDimension(dimension));
        }
        if side < 2 {
            return Err(WalkError::SideTooSmall(side));
        }
        let degree = 2 * dimension as usize;
        let vertex_count = if dimension == 1 { side } else { side * side };
        Ok(Self { dimension, side, degree, vertex_count })
    }

    pub fn dimension(&self) -> u8 {
        self.dimension
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// Coin-space dimension `d + 1` (loop included).
    pub fn coin_dim(&self) -> usize {
        self.degree + 1
    }

    /// Total amplitude count `(d + 1) * N`.
    pub fn state_len(&self) -> usize {
        self.coin_dim() * self.vertex_count
    }

    /// Slot of a direction inside a coin block, loop last.
    /// 1D blocks are `[x+, x-, loop]`, 2D blocks `[x+, x-, y+, y-, loop]`.
    pub fn slot(&self, dir: CoinDirection) -> Result<usize> {
        match dir {
            CoinDirection::XPlus => Ok(0),
            CoinDirection::XMinus => Ok(1),
            CoinDirection::YPlus if self.dimension == 2 => Ok(2),
            CoinDirection::YMinus if self.dimension == 2 => Ok(3),
            CoinDirection::Loop => Ok(self.degree),
            dir => Err(WalkError::InvalidDirection(dir.name(), self.dimension)),
        }
    }

    /// Edge directions of this lattice, loop excluded, in slot order.
    pub fn edge_directions(&self) -> &'static [CoinDirection] {
        if self.dimension == 1 {
            &[CoinDirection::XPlus, CoinDirection::XMinus]
        } else {
            &[
                CoinDirection::XPlus,
                CoinDirection::XMinus,
                CoinDirection::YPlus,
                CoinDirection::YMinus,
            ]
        }
    }

    pub fn contains(&self, v: VertexId) -> bool {
        v.0 < self.vertex_count
    }

    pub fn vertex(&self, x: usize, y: usize) -> VertexId {
        debug_assert!(x < self.side);
        debug_assert!(self.dimension == 2 || y == 0);
        VertexId(y * self.side + x)
    }

    /// Coordinates of a vertex; `y` is always 0 in 1D.
    pub fn coords(&self, v: VertexId) -> (usize, usize) {
        if self.dimension == 1 {
            (v.0, 0)
        } else {
            (v.0 % self.side, v.0 / self.side)
        }
    }

    /// Periodic neighbor along an edge direction.
    pub fn neighbor(&self, v: VertexId, dir: CoinDirection) -> Result<VertexId> {
        if !self.contains(v) {
            return Err(WalkError::VertexOutOfRange {
                vertex: v.0,
                vertex_count: self.vertex_count,
            });
        }
        if dir == CoinDirection::Loop {
            return Err(WalkError::LoopHasNoNeighbor);
        }
        // validates the direction against the dimension
        self.slot(dir)?;
        let (x, y) = self.coords(v);
        let s = self.side;
        let (x, y) = match dir {
            CoinDirection::XPlus => ((x + 1) % s, y),
            CoinDirection::XMinus => ((x + s - 1) % s, y),
            CoinDirection::YPlus => (x, (y + 1) % s),
            CoinDirection::YMinus => (x, (y + s - 1) % s),
            CoinDirection::Loop => unreachable!(),
        };
        Ok(self.vertex(x, y))
    }

    /// Translates a vertex by a lattice vector, wrapping periodically.
    pub fn translate(&self, v: VertexId, dx: usize, dy: usize) -> VertexId {
        let (x, y) = self.coords(v);
        let x = (x + dx) % self.side;
        if self.dimension == 1 {
            VertexId(x)
        } else {
            self.vertex(x, (y + dy) % self.side)
        }
    }
}

/// Coin family selecting how marked vertices are distinguished.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CoinFamily {
    /// Loop-phase oracle followed by Grover diffusion everywhere.
    G,
    /// Full coin-block sign flip at marked vertices, then diffusion.
    Akr,
    /// Diffusion at unmarked vertices, `-I` at marked vertices.
    Skw,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoinSpec {
    pub family: CoinFamily,
    pub loop_weight: f64,
}

impl CoinSpec {
    pub fn new(family: CoinFamily, loop_weight: f64) -> Result<Self> {
        if !(loop_weight > 0.0) || !loop_weight.is_finite() {
            return Err(WalkError::InvalidLoopWeight(loop_weight));
        }
        Ok(Self { family, loop_weight })
    }

    /// Weighted uniform coin state: `1/sqrt(d+a)` on each edge slot and
    /// `sqrt(a)/sqrt(d+a)` on the loop slot.
    pub fn coin_state(&self, degree: usize) -> Vec<f64> {
        let norm = (degree as f64 + self.loop_weight).sqrt();
        let mut psi = vec![1.0 / norm; degree + 1];
        psi[degree] = self.loop_weight.sqrt() / norm;
        psi
    }
}

/// Full amplitude vector over coin x vertex space.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkState {
    geometry: LatticeGeometry,
    amplitudes: Vec<f64>,
}

impl WalkState {
    /// The uniform product start state: every vertex carries the weighted
    /// coin state scaled by `1/sqrt(N)`.
    pub fn uniform(geometry: LatticeGeometry, spec: &CoinSpec) -> Self {
        let psi = spec.coin_state(geometry.degree());
        let scale = 1.0 / (geometry.vertex_count() as f64).sqrt();
        let mut amplitudes = Vec::with_capacity(geometry.state_len());
        for _ in 0..geometry.vertex_count() {
            amplitudes.extend(psi.iter().map(|p| p * scale));
        }
        Self { geometry, amplitudes }
    }

    pub fn zero(geometry: LatticeGeometry) -> Self {
        Self { geometry, amplitudes: vec![0.0; geometry.state_len()] }
    }

    pub fn from_amplitudes(geometry: LatticeGeometry, amplitudes: Vec<f64>) -> Result<Self> {
        if amplitudes.len() != geometry.state_len() {
            return Err(WalkError::DimensionMismatch {
                state: amplitudes.len(),
                operator: geometry.state_len(),
            });
        }
        Ok(Self { geometry, amplitudes })
    }

    pub fn geometry(&self) -> &LatticeGeometry {
        &self.geometry
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [f64] {
        &mut self.amplitudes
    }

    pub fn block(&self, v: VertexId) -> &[f64] {
        let c = self.geometry.coin_dim();
        &self.amplitudes[v.0 * c..(v.0 + 1) * c]
    }

    pub fn block_mut(&mut self, v: VertexId) -> &mut [f64] {
        let c = self.geometry.coin_dim();
        &mut self.amplitudes[v.0 * c..(v.0 + 1) * c]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a).sum()
    }

    /// Probability of measuring the walker at `v`, loop included.
    pub fn vertex_probability(&self, v: VertexId) -> f64 {
        self.block(v).iter().map(|a| a * a).sum()
    }

    /// State translated by a lattice vector: the block of vertex `v` in the
    /// result is the block of `v - (dx, dy)` in the original.
    pub fn translated(&self, dx: usize, dy: usize) -> Self {
        let mut out = Self::zero(self.geometry);
        for v in 0..self.geometry.vertex_count() {
            let dest = self.geometry.translate(VertexId(v), dx, dy);
            out.block_mut(dest).copy_from_slice(self.block(VertexId(v)));
        }
        out
    }
}

/// Convenience wrapper matching the geometry constructor.
pub fn build_lattice(dimension: u8, side: usize) -> Result<LatticeGeometry> {
    LatticeGeometry::new(dimension, side)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_of_six() {
        let g = build_lattice(1, 6).unwrap();
        assert_eq!(g.degree(), 2);
        assert_eq!(g.vertex_count(), 6);
        assert_eq!(g.coin_dim(), 3);
    }

    #[test]
    fn torus_forty() {
        let g = build_lattice(2, 40).unwrap();
        assert_eq!(g.degree(), 4);
        assert_eq!(g.vertex_count(), 1600);
    }

    #[test]
    fn rejects_bad_geometry() {
        assert_eq!(build_lattice(3, 8).unwrap_err(), WalkError::InvalidDimension(3));
        assert_eq!(build_lattice(0, 8).unwrap_err(), WalkError::InvalidDimension(0));
        assert_eq!(build_lattice(2, 1).unwrap_err(), WalkError::SideTooSmall(1));
    }

    #[test]
    fn neighbor_wraps() {
        let g = build_lattice(1, 8).unwrap();
        assert_eq!(g.neighbor(VertexId(7), CoinDirection::XPlus).unwrap(), VertexId(0));
        assert_eq!(g.neighbor(VertexId(0), CoinDirection::XMinus).unwrap(), VertexId(7));

        let g = build_lattice(2, 4).unwrap();
        let v = g.vertex(3, 2);
        assert_eq!(g.neighbor(v, CoinDirection::XPlus).unwrap(), g.vertex(0, 2));
        let v = g.vertex(1, 1);
        assert_eq!(g.neighbor(v, CoinDirection::YMinus).unwrap(), g.vertex(1, 0));
    }

    #[test]
    fn neighbor_rejects_loop_and_bad_axis() {
        let g = build_lattice(1, 8).unwrap();
        assert_eq!(
            g.neighbor(VertexId(0), CoinDirection::Loop).unwrap_err(),
            WalkError::LoopHasNoNeighbor
        );
        assert!(g.neighbor(VertexId(0), CoinDirection::YPlus).is_err());
    }

    #[test]
    fn neighbor_is_inverse() {
        for (dim, side) in [(1u8, 9usize), (2, 5)] {
            let g = build_lattice(dim, side).unwrap();
            for v in 0..g.vertex_count() {
                for &dir in g.edge_directions() {
                    let w = g.neighbor(VertexId(v), dir).unwrap();
                    assert_eq!(g.neighbor(w, dir.reversed()).unwrap(), VertexId(v));
                }
            }
        }
    }

    #[test]
    fn index_coords_bijection() {
        let g = build_lattice(2, 17).unwrap();
        for v in 0..g.vertex_count() {
            let (x, y) = g.coords(VertexId(v));
            assert_eq!(g.vertex(x, y), VertexId(v));
        }
    }

    #[test]
    fn uniform_state_all_equal_when_a_is_one() {
        let g = build_lattice(1, 4).unwrap();
        let spec = CoinSpec::new(CoinFamily::G, 1.0).unwrap();
        let state = WalkState::uniform(g, &spec);
        assert_eq!(state.amplitudes().len(), 12);
        let expect = 1.0 / 12f64.sqrt();
        for &a in state.amplitudes() {
            assert!((a - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn uniform_state_2d_amplitudes() {
        let g = build_lattice(2, 40).unwrap();
        let spec = CoinSpec::new(CoinFamily::G, 0.01).unwrap();
        let state = WalkState::uniform(g, &spec);
        let block = state.block(VertexId(123));
        let edge = 1.0 / 4.01f64.sqrt() / 40.0;
        let loop_amp = (0.01f64 / 4.01).sqrt() / 40.0;
        for &b in &block[..4] {
            assert!((b - edge).abs() < 1e-15);
        }
        assert!((block[4] - loop_amp).abs() < 1e-15);
        assert!((loop_amp - 0.0012484).abs() < 1e-7);
        assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coin_spec_rejects_bad_weight() {
        assert!(CoinSpec::new(CoinFamily::G, 0.0).is_err());
        assert!(CoinSpec::new(CoinFamily::G, -0.5).is_err());
        assert!(CoinSpec::new(CoinFamily::G, f64::INFINITY).is_err());
        assert!(CoinSpec::new(CoinFamily::G, f64::NAN).is_err());
    }

    #[test]
    fn initial_coin_block_matches_weighted_coin_state() {
        let g = build_lattice(2, 6).unwrap();
        let spec = CoinSpec::new(CoinFamily::G, 0.3).unwrap();
        let state = WalkState::uniform(g, &spec);
        let psi = spec.coin_state(g.degree());
        let block = state.block(VertexId(17));
        let dot: f64 = block.iter().zip(&psi).map(|(b, p)| b * p).sum();
        let nb = block.iter().map(|b| b * b).sum::<f64>().sqrt();
        let cos = dot / nb;
        assert!((cos - 1.0).abs() < 1e-12);
    }
}
