//! Experiment harness: marked-cluster generators, self-loop-weight sweeps,
//! scaling runs over lattice sizes and empirical scaling fits.
//!
//! Rows within a sweep or scaling run are independent simulations; the
//! parallel build fans them out with rayon while keeping the output in
//! input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, WalkError};
use crate::lattice::{CoinFamily, CoinSpec, LatticeGeometry, VertexId};
use crate::operators::{MarkedSet, Provenance};
use crate::search::{evolve_trace, find_first_peak, PeakResult};

/// Default peak prominence above `p(0)`; skips micro-oscillations.
pub const DEFAULT_PROMINENCE: f64 = 0.05;

/// `k x l` rectangle of marked vertices anchored at `anchor`, wrapping
/// periodically; `k` extends along x, `l` along y.
pub fn make_marked_block(
    geometry: &LatticeGeometry,
    k: usize,
    l: usize,
    anchor: VertexId,
) -> Result<MarkedSet> {
    if geometry.dimension() != 2 {
        return Err(WalkError::WrongClusterDimension { required: 2 });
    }
    if k == 0 || l == 0 || k > geometry.side() || l > geometry.side() {
        return Err(WalkError::ClusterTooLarge { k, l, side: geometry.side() });
    }
    let (ax, ay) = geometry.coords(anchor);
    let mut vertices = Vec::with_capacity(k * l);
    for dy in 0..l {
        for dx in 0..k {
            vertices.push(geometry.vertex((ax + dx) % geometry.side(), (ay + dy) % geometry.side()));
        }
    }
    MarkedSet::new(geometry, vertices, Provenance::Block { k, l, anchor: anchor.0 })
}

/// All vertices `(i, i)` along the main diagonal.
pub fn make_marked_diagonal(geometry: &LatticeGeometry) -> Result<MarkedSet> {
    if geometry.dimension() != 2 {
        return Err(WalkError::WrongClusterDimension { required: 2 });
    }
    let vertices = (0..geometry.side()).map(|i| geometry.vertex(i, i)).collect();
    MarkedSet::new(geometry, vertices, Provenance::Diagonal)
}

/// Run of `m` adjacent vertices on a ring, starting at `anchor`.
pub fn make_marked_run(geometry: &LatticeGeometry, m: usize, anchor: VertexId) -> Result<MarkedSet> {
    if geometry.dimension() != 1 {
        return Err(WalkError::WrongClusterDimension { required: 1 });
    }
    let n = geometry.vertex_count();
    if m == 0 || m > n {
        return Err(WalkError::RunTooLong { m, n });
    }
    let vertices = (0..m).map(|i| VertexId((anchor.0 + i) % n)).collect();
    MarkedSet::new(geometry, vertices, Provenance::Run { m, anchor: anchor.0 })
}

/// Marked-cluster shape, instantiated against a geometry and anchor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterSpec {
    Run { m: usize },
    Block { k: usize, l: usize },
    Diagonal,
    Explicit(Vec<usize>),
}

impl ClusterSpec {
    pub fn build(&self, geometry: &LatticeGeometry, anchor: VertexId) -> Result<MarkedSet> {
        match self {
            ClusterSpec::Run { m } => make_marked_run(geometry, *m, anchor),
            ClusterSpec::Block { k, l } => make_marked_block(geometry, *k, *l, anchor),
            ClusterSpec::Diagonal => make_marked_diagonal(geometry),
            ClusterSpec::Explicit(ids) => MarkedSet::new(
                geometry,
                ids.iter().map(|&i| VertexId(i)).collect(),
                Provenance::Explicit,
            ),
        }
    }

    /// Cluster size on a lattice of the given side.
    pub fn size(&self, side: usize) -> usize {
        match self {
            ClusterSpec::Run { m } => *m,
            ClusterSpec::Block { k, l } => k * l,
            ClusterSpec::Diagonal => side,
            ClusterSpec::Explicit(ids) => ids.len(),
        }
    }
}

impl std::fmt::Display for ClusterSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ClusterSpec::Run { m } => write!(f, "run:{}", m),
            ClusterSpec::Block { k, l } => write!(f, "block:{}x{}", k, l),
            ClusterSpec::Diagonal => write!(f, "diag"),
            ClusterSpec::Explicit(ids) => {
                write!(f, "list:")?;
                for (i, id) in ids.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", id)?;
                }
                Ok(())
            }
        }
    }
}

/// Self-loop weight as a function of the vertex count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopWeightRule {
    Constant(f64),
    /// `c / N`.
    OverN(f64),
}

impl LoopWeightRule {
    pub fn weight(&self, vertex_count: usize) -> f64 {
        match self {
            LoopWeightRule::Constant(a) => *a,
            LoopWeightRule::OverN(c) => c / vertex_count as f64,
        }
    }
}

impl std::fmt::Display for LoopWeightRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LoopWeightRule::Constant(a) => write!(f, "{}", a),
            LoopWeightRule::OverN(c) => write!(f, "{}/N", c),
        }
    }
}

/// Default evolution horizon: 20x the asymptotic running time,
/// `20 ceil(N/M)` in 1D and `20 ceil(sqrt((N/M) ln(N/M)))` in 2D.
pub fn default_horizon(dimension: u8, vertex_count: usize, marked_count: usize) -> usize {
    let ratio = vertex_count as f64 / marked_count as f64;
    let base = if dimension == 1 {
        ratio.ceil()
    } else {
        (ratio * ratio.ln().max(1.0)).sqrt().ceil()
    };
    20 * (base as usize).max(1)
}

/// One row of a self-loop-weight sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub loop_weight: f64,
    pub result: Result<PeakResult>,
}

/// One row of a scaling run.
#[derive(Debug, Clone)]
pub struct ScalingRow {
    pub side: usize,
    pub vertex_count: usize,
    pub marked_count: usize,
    pub cluster: ClusterSpec,
    pub result: Result<PeakResult>,
}

fn run_one(
    geometry: LatticeGeometry,
    family: CoinFamily,
    marked: &MarkedSet,
    loop_weight: f64,
    horizon: usize,
    prominence: f64,
) -> Result<PeakResult> {
    if horizon == 0 {
        return Err(WalkError::ZeroHorizon);
    }
    let spec = CoinSpec::new(family, loop_weight)?;
    let trace = evolve_trace(geometry, &spec, marked, horizon)?;
    find_first_peak(&trace, prominence)
}

/// Runs one first-peak search per weight; rows come back in input order
/// and a failing row does not abort the sweep.
pub fn sweep_loop_weight(
    geometry: LatticeGeometry,
    family: CoinFamily,
    marked: &MarkedSet,
    weights: &[f64],
    horizon: usize,
    prominence: f64,
) -> Vec<SweepRow> {
    let run = |&a: &f64| SweepRow {
        loop_weight: a,
        result: run_one(geometry, family, marked, a, horizon, prominence),
    };
    #[cfg(feature = "parallel")]
    {
        weights.par_iter().map(run).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        weights.iter().map(run).collect()
    }
}

/// Runs one first-peak search per lattice size.  `sizes` are sides
/// (`N` itself in 1D); the anchor is the lattice origin.
pub fn scaling_run(
    family: CoinFamily,
    dimension: u8,
    sizes: &[usize],
    cluster: &ClusterSpec,
    weight_rule: LoopWeightRule,
    horizon: Option<usize>,
    prominence: f64,
) -> Vec<ScalingRow> {
    let run = |&side: &usize| {
        let result = LatticeGeometry::new(dimension, side).and_then(|geometry| {
            let marked = cluster.build(&geometry, VertexId(0))?;
            let n = geometry.vertex_count();
            let h = horizon.unwrap_or_else(|| default_horizon(dimension, n, marked.len().max(1)));
            run_one(geometry, family, &marked, weight_rule.weight(n), h, prominence)
        });
        let n = if dimension == 1 { side } else { side * side };
        ScalingRow {
            side,
            vertex_count: n,
            marked_count: cluster.size(side),
            cluster: cluster.clone(),
            result,
        }
    };
    #[cfg(feature = "parallel")]
    {
        sizes.par_iter().map(run).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        sizes.iter().map(run).collect()
    }
}

/// Geometric grid of `count` weights from `lo` to `hi` inclusive.
pub fn geometric_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let ratio = (hi / lo).ln() / (count - 1) as f64;
    (0..count).map(|i| lo * (ratio * i as f64).exp()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// `t = c * (N/M)^beta`.
    PowerLaw,
    /// `t = c * N/M`.
    LinearOverM,
    /// `t = c * sqrt((N/M) ln(N/M))`.
    SqrtLog,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub model: FitModel,
    pub c: f64,
    pub beta: Option<f64>,
    /// RMS of the log-space residuals.
    pub residual: f64,
    pub ratio_min: Option<f64>,
    pub ratio_max: Option<f64>,
}

/// Fits peak times against the model's size variable.  Failed rows are
/// skipped; at least three successful rows with positive peak time are
/// required.
pub fn fit_scaling(rows: &[ScalingRow], model: FitModel) -> Result<FitResult> {
    let mut points = Vec::new();
    for row in rows {
        if let Ok(peak) = &row.result {
            if peak.t_peak == 0 {
                return Err(WalkError::NonPositivePeakTime);
            }
            let ratio = row.vertex_count as f64 / row.marked_count as f64;
            points.push((ratio, peak.t_peak as f64));
        }
    }
    if points.len() < 3 {
        return Err(WalkError::TooFewRows(points.len()));
    }

    match model {
        FitModel::PowerLaw => {
            let logs: Vec<(f64, f64)> =
                points.iter().map(|(x, t)| (x.ln(), t.ln())).collect();
            let n = logs.len() as f64;
            let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
            let mt = logs.iter().map(|p| p.1).sum::<f64>() / n;
            let var = logs.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
            let cov = logs.iter().map(|p| (p.0 - mx) * (p.1 - mt)).sum::<f64>();
            let beta = cov / var;
            let c = (mt - beta * mx).exp();
            let residual = (logs
                .iter()
                .map(|p| (p.1 - (c.ln() + beta * p.0)).powi(2))
                .sum::<f64>()
                / n)
                .sqrt();
            Ok(FitResult { model, c, beta: Some(beta), residual, ratio_min: None, ratio_max: None })
        }
        FitModel::LinearOverM | FitModel::SqrtLog => {
            let xs: Vec<f64> = points
                .iter()
                .map(|(ratio, _)| match model {
                    FitModel::LinearOverM => *ratio,
                    FitModel::SqrtLog => (ratio * ratio.ln().max(f64::MIN_POSITIVE)).sqrt(),
                    FitModel::PowerLaw => unreachable!(),
                })
                .collect();
            let ratios: Vec<f64> =
                points.iter().zip(&xs).map(|((_, t), x)| t / x).collect();
            let c = ratios.iter().sum::<f64>() / ratios.len() as f64;
            let residual = (ratios.iter().map(|r| (r / c).ln().powi(2)).sum::<f64>()
                / ratios.len() as f64)
                .sqrt();
            let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = ratios.iter().cloned().fold(0.0f64, f64::max);
            Ok(FitResult { model, c, beta: None, residual, ratio_min: Some(min), ratio_max: Some(max) })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_lattice;
    use crate::search::Termination;

    #[test]
    fn block_generator() {
        let g = build_lattice(2, 4).unwrap();
        let m = make_marked_block(&g, 2, 1, g.vertex(0, 0)).unwrap();
        assert_eq!(m.vertices(), &[g.vertex(0, 0), g.vertex(1, 0)]);

        let wrapped = make_marked_block(&g, 2, 2, g.vertex(3, 3)).unwrap();
        assert_eq!(
            wrapped.vertices(),
            &[g.vertex(3, 3), g.vertex(0, 3), g.vertex(3, 0), g.vertex(0, 0)]
        );

        assert!(make_marked_block(&g, 5, 1, g.vertex(0, 0)).is_err());
        let ring = build_lattice(1, 8).unwrap();
        assert!(make_marked_block(&ring, 1, 1, VertexId(0)).is_err());
    }

    #[test]
    fn diagonal_generator() {
        let g = build_lattice(2, 4).unwrap();
        let m = make_marked_diagonal(&g).unwrap();
        assert_eq!(m.len(), 4);
        assert_eq!(
            m.vertices(),
            &[g.vertex(0, 0), g.vertex(1, 1), g.vertex(2, 2), g.vertex(3, 3)]
        );
        let two = build_lattice(2, 2).unwrap();
        assert_eq!(make_marked_diagonal(&two).unwrap().len(), 2);
        let ring = build_lattice(1, 4).unwrap();
        assert!(make_marked_diagonal(&ring).is_err());
    }

    #[test]
    fn run_generator() {
        let g = build_lattice(1, 10).unwrap();
        let m = make_marked_run(&g, 3, VertexId(8)).unwrap();
        assert_eq!(m.vertices(), &[VertexId(8), VertexId(9), VertexId(0)]);
        assert_eq!(make_marked_run(&g, 1, VertexId(4)).unwrap().vertices(), &[VertexId(4)]);
        assert_eq!(make_marked_run(&g, 10, VertexId(0)).unwrap().len(), 10);
        assert!(make_marked_run(&g, 11, VertexId(0)).is_err());
    }

    #[test]
    fn geometric_grid_endpoints() {
        let grid = geometric_grid(0.01, 10.0, 100);
        assert_eq!(grid.len(), 100);
        assert!((grid[0] - 0.01).abs() < 1e-15);
        assert!((grid[99] - 10.0).abs() < 1e-12);
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn sweep_row_count_and_failure_isolation() {
        let g = build_lattice(1, 16).unwrap();
        let marked = make_marked_run(&g, 1, VertexId(0)).unwrap();
        // a negative weight makes its row fail without aborting the rest
        let weights = [0.05, -1.0, 0.1];
        let rows = sweep_loop_weight(g, CoinFamily::G, &marked, &weights, 100, 0.01);
        assert_eq!(rows.len(), 3);
        assert!(rows[0].result.is_ok());
        assert!(rows[1].result.is_err());
        assert!(rows[2].result.is_ok());
    }

    #[test]
    fn sweep_is_deterministic() {
        let g = build_lattice(2, 8).unwrap();
        let marked = make_marked_block(&g, 2, 2, g.vertex(0, 0)).unwrap();
        let weights = geometric_grid(0.01, 0.5, 6);
        let a = sweep_loop_weight(g, CoinFamily::G, &marked, &weights, 200, 0.05);
        let b = sweep_loop_weight(g, CoinFamily::G, &marked, &weights, 200, 0.05);
        for (ra, rb) in a.iter().zip(&b) {
            let (pa, pb) = (ra.result.as_ref().unwrap(), rb.result.as_ref().unwrap());
            assert_eq!(pa.t_peak, pb.t_peak);
            assert_eq!(pa.p_peak.to_bits(), pb.p_peak.to_bits());
        }
    }

    #[test]
    fn scaling_row_count() {
        let sizes = [16, 32, 64];
        let rows = scaling_run(
            CoinFamily::G,
            1,
            &sizes,
            &ClusterSpec::Run { m: 1 },
            LoopWeightRule::OverN(0.1),
            None,
            DEFAULT_PROMINENCE,
        );
        assert_eq!(rows.len(), 3);
        for row in &rows {
            assert_eq!(row.marked_count, 1);
            let peak = row.result.as_ref().unwrap();
            assert_eq!(peak.terminated_by, Termination::PeakFound);
        }
    }

    fn synthetic_rows(f: impl Fn(f64) -> f64) -> Vec<ScalingRow> {
        [100usize, 200, 400, 800]
            .iter()
            .map(|&n| ScalingRow {
                side: n,
                vertex_count: n,
                marked_count: 1,
                cluster: ClusterSpec::Run { m: 1 },
                result: Ok(PeakResult {
                    t_peak: f(n as f64).round() as usize,
                    p_peak: 0.9,
                    terminated_by: Termination::PeakFound,
                }),
            })
            .collect()
    }

    #[test]
    fn power_law_fit_recovers_linear() {
        let rows = synthetic_rows(|n| 7.0 * n);
        let fit = fit_scaling(&rows, FitModel::PowerLaw).unwrap();
        assert!((fit.beta.unwrap() - 1.0).abs() < 1e-9);
        assert!((fit.c - 7.0).abs() < 1e-6);
        assert!(fit.residual < 1e-9);
    }

    #[test]
    fn sqrt_log_ratio_is_tight_on_synthetic_data() {
        let rows = synthetic_rows(|n| (3.0 * (n * n.ln()).sqrt()).round());
        let fit = fit_scaling(&rows, FitModel::SqrtLog).unwrap();
        // rounding to integer steps is the only noise
        assert!((fit.c - 3.0).abs() < 0.01);
        assert!(fit.ratio_max.unwrap() / fit.ratio_min.unwrap() < 1.01);
    }

    #[test]
    fn fit_rejects_too_few_rows() {
        let rows = &synthetic_rows(|n| n)[..2];
        assert!(matches!(
            fit_scaling(rows, FitModel::PowerLaw).unwrap_err(),
            WalkError::TooFewRows(2)
        ));
    }

    #[test]
    fn default_horizon_values() {
        assert_eq!(default_horizon(1, 1000, 1), 20_000);
        assert_eq!(default_horizon(1, 1000, 8), 20 * 125);
        let h = default_horizon(2, 1600, 1);
        // sqrt(1600 * ln 1600) = 108.6 -> 109
        assert_eq!(h, 20 * 109);
    }
}
