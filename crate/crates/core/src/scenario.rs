//! Named metric/field pairs with their sample regions and tolerances.

use std::f64::consts::PI;

use crate::classified::{classified_field, classified_metric, ClassifiedSurface};
use crate::error::{Error, Result};
use crate::field::UnitField;
use crate::jet::DerivativeMode;
use crate::manifold::ChartMetric;
use crate::sampling::Region;

/// Classification tolerance with analytic derivatives.
pub const TOL_ANALYTIC: f64 = 1e-6;
/// Classification tolerance with finite-difference derivatives.
pub const TOL_FD: f64 = 1e-4;
/// Oracle agreement, and the looser bound for the two-dimensional-leaf case.
pub const ORACLE_TOL: f64 = 2e-4;
pub const ORACLE_TOL_N2: f64 = 5e-4;

pub const BUILTIN: [&str; 6] = ["flat2-parallel", "flat3-parallel", "sphere2", "classified", "classified-n2", "classified-n3"];

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub metric: ChartMetric,
    pub field: UnitField,
    /// Sample boxes; points are spread over them round-robin.
    pub regions: Vec<Region>,
    pub oracle_tol: f64,
}

impl Scenario {
    /// Default classification tolerance for the metric's derivative mode.
    pub fn default_tol(&self) -> f64 {
        match (self.metric.derivative_mode(), self.field.derivative_mode()) {
            (DerivativeMode::Analytic, DerivativeMode::Analytic) => TOL_ANALYTIC,
            _ => TOL_FD,
        }
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }
}

fn flat(name: &str, field: &[&str]) -> Result<Scenario> {
    let n = field.len();
    let coords: Vec<String> = ["x", "y", "z"][..n].iter().map(|s| s.to_string()).collect();
    let metric = ChartMetric::diagonal(&coords, &vec!["1"; n])?;
    let field = UnitField::symbolic(&metric, field)?;
    Ok(Scenario { name: name.into(), metric, field, regions: vec![vec![(-1.0, 1.0); n]], oracle_tol: ORACLE_TOL })
}

fn classified(name: &str, n: usize) -> Result<Scenario> {
    let s = ClassifiedSurface::new(1.0, 1.2, 5.0, n)?;
    let metric = classified_metric(&s)?;
    let field = classified_field(&metric)?;
    let leaf = vec![(0.0, 2.0 * PI); n];
    let branch = |lo: f64, hi: f64| std::iter::once((lo, hi)).chain(leaf.iter().copied()).collect::<Region>();
    Ok(Scenario {
        name: name.into(),
        metric,
        field,
        regions: vec![branch(0.2, 0.8), branch(1.2, 5.0)],
        oracle_tol: if n == 2 { ORACLE_TOL_N2 } else { ORACLE_TOL },
    })
}

/// One of [`BUILTIN`].
pub fn builtin(name: &str) -> Result<Scenario> {
    match name {
        "flat2-parallel" => flat(name, &["0.6", "0.8"]),
        "flat3-parallel" => flat(name, &["0.48", "0.6", "0.64"]),
        "sphere2" => {
            let metric = ChartMetric::diagonal(&["u", "v"], &["1", "sin(u)^2"])?;
            let field = UnitField::symbolic(&metric, &["1", "0"])?;
            Ok(Scenario {
                name: name.into(),
                metric,
                field,
                regions: vec![vec![(0.2, PI - 0.2), (0.0, 2.0 * PI)]],
                oracle_tol: ORACLE_TOL,
            })
        }
        "classified" => classified(name, 1),
        "classified-n2" => classified(name, 2),
        "classified-n3" => classified(name, 3),
        "custom" => Err(Error::Scenario("the custom scenario needs --coords, --metric, --field and --region".into())),
        other => Err(Error::Scenario(format!("unknown scenario '{other}' (builtin: {}, custom)", BUILTIN.join(", ")))),
    }
}

/// User-supplied expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct CustomSpec {
    pub coords: Vec<String>,
    /// Either `d` diagonal entries or `d²` row-major entries.
    pub metric: Vec<String>,
    pub field: Vec<String>,
    pub region: Region,
}

pub fn custom(spec: &CustomSpec) -> Result<Scenario> {
    let d = spec.coords.len();
    if d < 2 {
        return Err(Error::Scenario(format!("a chart needs at least 2 coordinates, got {d}")));
    }
    let metric = if spec.metric.len() == d {
        let diag: Vec<&str> = spec.metric.iter().map(String::as_str).collect();
        ChartMetric::diagonal(&spec.coords, &diag)?
    } else if spec.metric.len() == d * d {
        let rows: Vec<Vec<String>> = spec.metric.chunks(d).map(|r| r.to_vec()).collect();
        ChartMetric::symbolic(&spec.coords, &rows)?
    } else {
        return Err(Error::Scenario(format!("metric needs {d} or {} entries, got {}", d * d, spec.metric.len())));
    };
    let field = UnitField::symbolic(&metric, &spec.field)?;
    if spec.region.len() != d {
        return Err(Error::Dimension { expected: d, got: spec.region.len() });
    }
    Ok(Scenario { name: "custom".into(), metric, field, regions: vec![spec.region.clone()], oracle_tol: ORACLE_TOL })
}

/// Parses `"a:b,c:d,…"`.
pub fn parse_region(s: &str) -> Result<Region> {
    s.split(',')
        .map(|part| {
            let (lo, hi) = part
                .split_once(':')
                .ok_or_else(|| Error::Scenario(format!("region entry '{part}' is not of the form lo:hi")))?;
            let parse = |v: &str| {
                v.trim().parse::<f64>().map_err(|_| Error::Scenario(format!("'{v}' is not a number in region '{part}'")))
            };
            Ok((parse(lo)?, parse(hi)?))
        })
        .collect()
}
