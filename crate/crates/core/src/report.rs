//! Per-point analysis of a scenario and its aggregate classification.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::FieldGeometry;
use crate::geometry::{
    curvature_adapted_residuals, field_frames, leaf_data_at, omega_foliation_at, omega_general_at, FrameMode, OmegaTensor,
};
use crate::jet::DerivativeMode;
use crate::manifold::{jacobi_from_geometry, ChartPoint};
use crate::sampling::{sample_points, MARGIN, SEED};
use crate::scenario::Scenario;

pub const TOOL: &str = "tgfield";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Which expression produced `Ω̃` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Formula {
    /// Singular-frame formula, valid for any unit field.
    General,
    /// Leaf form, used when `ξ^⊥` is integrable and `ξ` geodesic.
    Foliation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointRecord {
    pub index: usize,
    /// Sample box the point was drawn from.
    pub region: usize,
    pub coords: Vec<f64>,
    pub formula: Formula,
    pub frame_mode: FrameMode,
    /// `λ_0..λ_n` (for the leaf form: `0, k_1..k_n`).
    pub lambda: Vec<f64>,
    /// Eigenvalues `K_σ` of the normal Jacobi operator, descending.
    pub jacobi_eigenvalues: Vec<f64>,
    /// `omega[σ-1][i][j] = Ω̃_{σ|ij}`.
    pub omega: Vec<Vec<Vec<f64>>>,
    pub max_abs: f64,
    pub trace_norm: f64,
    /// `K_σ − 2k_σ²/(k_σ²−1)` per leaf direction; absent for the general
    /// formula or when undefined (see `condition_note`).
    pub condition_residual: Option<Vec<f64>>,
    pub condition_note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub points: usize,
    /// Maxima of the per-point values.
    pub max_abs: f64,
    pub trace_norm: f64,
    pub totally_geodesic: bool,
    pub minimal: bool,
    /// Largest `|condition_residual|` over points where it is defined.
    pub max_condition_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub scenario: String,
    pub dim: usize,
    pub coords: Vec<String>,
    pub derivative_mode: DerivativeMode,
    pub tolerance: f64,
    pub sampling: SamplingInfo,
    pub records: Vec<PointRecord>,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplingInfo {
    pub sequence: String,
    pub seed: u64,
    pub margin: f64,
    pub regions: Vec<Vec<(f64, f64)>>,
}

fn omega_record(omega: &OmegaTensor) -> (Vec<Vec<Vec<f64>>>, f64, f64) {
    (omega.to_nested(), omega.max_abs(), omega.trace_norm())
}

/// Evaluates one point; the leaf form is used whenever the integrability and
/// geodesic probes pass.
pub fn evaluate_point(s: &Scenario, x: &ChartPoint, index: usize, region: usize) -> Result<PointRecord> {
    let fg = FieldGeometry::at(&s.metric, &s.field, x)?;
    let jacobi = jacobi_from_geometry(&fg.geo, &fg.xi)?;
    let (formula, frame_mode, omega, condition) = match leaf_data_at(&s.metric, &s.field, &fg) {
        Ok(leaf) => {
            let omega = omega_foliation_at(&fg, &leaf);
            let condition = match curvature_adapted_residuals(&leaf) {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(e.to_string())),
            };
            (Formula::Foliation, FrameMode::Signed, omega, condition)
        }
        Err(Error::NotIntegrable(_) | Error::NotGeodesic(_)) => {
            let frames = field_frames(&fg, None)?;
            let mode = frames.mode();
            (Formula::General, mode, omega_general_at(&fg, &frames), (None, None))
        }
        Err(e) => return Err(e),
    };
    let (nested, max_abs, trace_norm) = omega_record(&omega);
    Ok(PointRecord {
        index,
        region,
        coords: x.as_slice().to_vec(),
        formula,
        frame_mode,
        lambda: omega.lambdas.iter().copied().collect(),
        jacobi_eigenvalues: jacobi.eigenvalues.iter().copied().collect(),
        omega: nested,
        max_abs,
        trace_norm,
        condition_residual: condition.0,
        condition_note: condition.1,
    })
}

/// Aggregates `records`; every field is a max/all over the records.
pub fn summarize(records: &[PointRecord], tol: f64) -> Summary {
    let max_abs = records.iter().map(|r| r.max_abs).fold(0.0, f64::max);
    let trace_norm = records.iter().map(|r| r.trace_norm).fold(0.0, f64::max);
    let max_condition_residual = records
        .iter()
        .filter_map(|r| r.condition_residual.as_ref())
        .flat_map(|v| v.iter().map(|c| c.abs()))
        .reduce(f64::max);
    Summary {
        points: records.len(),
        max_abs,
        trace_norm,
        totally_geodesic: records.iter().all(|r| r.max_abs < tol),
        minimal: records.iter().all(|r| r.trace_norm < tol),
        max_condition_residual,
    }
}

/// Samples `points` points and evaluates them in parallel; record order is
/// the sample order.
pub fn build_report(s: &Scenario, points: usize, tol: Option<f64>) -> Result<Report> {
    let tol = tol.unwrap_or_else(|| s.default_tol());
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Scenario(format!("tolerance must be positive, got {tol}")));
    }
    let xs = sample_points(&s.regions, points)?;
    let nr = s.regions.len();
    let records = xs
        .par_iter()
        .enumerate()
        .map(|(i, x)| evaluate_point(s, x, i, i % nr))
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(&records, tol);
    let mode = match (s.metric.derivative_mode(), s.field.derivative_mode()) {
        (DerivativeMode::Analytic, DerivativeMode::Analytic) => DerivativeMode::Analytic,
        _ => DerivativeMode::FiniteDifference,
    };
    Ok(Report {
        tool: TOOL.into(),
        version: VERSION.into(),
        scenario: s.name.clone(),
        dim: s.dim(),
        coords: s.metric.coords().to_vec(),
        derivative_mode: mode,
        tolerance: tol,
        sampling: SamplingInfo { sequence: "halton".into(), seed: SEED, margin: MARGIN, regions: s.regions.clone() },
        records,
        summary,
    })
}
