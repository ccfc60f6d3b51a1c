//! Three-angle Bell functional `F(a,b,c) = |C(a,b) − C(a,c)| − 1 − C(b,c)`.
//! Local hidden-variable correlations satisfy `F ≤ 0`; the singlet law
//! `C = −cos 2(θ₁−θ₂)` reaches `F = +½` at `a = 0°, b = 30°, c = 60°`.

use serde::{Deserialize, Serialize};

use crate::correlation::{
    calibrate, correlation_scan_calibrated, Calibration, Sampling, ScanPoint,
};
use crate::error::{Error, Result};
use crate::optical_bench::{BellPreparation, BenchConfig};
use crate::polarization::AnalyzerSetting;

pub fn bell_f(c_ab: f64, c_ac: f64, c_bc: f64) -> f64 {
    (c_ab - c_ac).abs() - 1.0 - c_bc
}

/// `F(a,b,c)` for an arbitrary correlation function.
pub fn bell_f_with<C>(correlation: C, a: f64, b: f64, c: f64) -> f64
where
    C: Fn(f64, f64) -> f64,
{
    bell_f(correlation(a, b), correlation(a, c), correlation(b, c))
}

/// Closed-form singlet curve `|−cos 2(a−b) + cos 2(a−c)| − 1 + cos 2(b−c)`.
pub fn singlet_f(a: f64, b: f64, c: f64) -> f64 {
    bell_f_with(|x, y| -(2.0 * (x - y)).cos(), a, b, c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellScanResult {
    pub a: AnalyzerSetting,
    pub b: AnalyzerSetting,
    pub c_grid: Vec<AnalyzerSetting>,
    pub f_values: Vec<f64>,
    /// Per-point errors in quadrature. The `C(a,b)` term is one shared
    /// estimate, so its error is fully correlated across the curve.
    pub f_errors: Vec<f64>,
    pub max_f: f64,
    pub argmax_c: AnalyzerSetting,
    pub c_ab: ScanPoint,
    pub c_ac: Vec<ScanPoint>,
    pub c_bc: Vec<ScanPoint>,
    pub calibration: Calibration,
}

impl BellScanResult {
    pub fn max_index(&self) -> usize {
        self.f_values
            .iter()
            .enumerate()
            .fold(0, |best, (i, &f)| if f > self.f_values[best] { i } else { best })
    }

    pub fn violates(&self) -> bool {
        self.max_f > 0.0
    }
}

/// Assembles an F curve from already normalized estimates.
pub fn assemble_scan(
    a: AnalyzerSetting,
    b: AnalyzerSetting,
    c_ab: ScanPoint,
    c_ac: Vec<ScanPoint>,
    c_bc: Vec<ScanPoint>,
    calibration: Calibration,
) -> Result<BellScanResult> {
    if c_ac.is_empty() {
        return Err(Error::Empty("c grid"));
    }
    if c_ac.len() != c_bc.len() {
        return Err(Error::LengthMismatch {
            left: c_ac.len(),
            right: c_bc.len(),
        });
    }
    let f_values: Vec<f64> = c_ac
        .iter()
        .zip(&c_bc)
        .map(|(ac, bc)| bell_f(c_ab.value(), ac.value(), bc.value()))
        .collect();
    let f_errors: Vec<f64> = c_ac
        .iter()
        .zip(&c_bc)
        .map(|(ac, bc)| {
            (c_ab.std_error().powi(2) + ac.std_error().powi(2) + bc.std_error().powi(2)).sqrt()
        })
        .collect();
    let c_grid: Vec<AnalyzerSetting> = c_ac.iter().map(|p| p.theta2).collect();
    let mut result = BellScanResult {
        a,
        b,
        c_grid,
        f_values,
        f_errors,
        max_f: f64::NEG_INFINITY,
        argmax_c: a,
        c_ab,
        c_ac,
        c_bc,
        calibration,
    };
    let i = result.max_index();
    result.max_f = result.f_values[i];
    result.argmax_c = result.c_grid[i];
    Ok(result)
}

/// Simulated F curve over `c_grid`: `C(a,b)` once, then `C(a,c)` and
/// `C(b,c)` at each grid point, all normalized by one calibration. Each of
/// the three families draws from its own derived stream family.
pub fn violation_scan(
    prep: BellPreparation,
    a: AnalyzerSetting,
    b: AnalyzerSetting,
    c_grid: &[AnalyzerSetting],
    bench: &BenchConfig,
    sampling: &Sampling,
) -> Result<BellScanResult> {
    if c_grid.is_empty() {
        return Err(Error::Empty("c grid"));
    }
    let calibration = calibrate(prep, bench, sampling)?;
    let ab = correlation_scan_calibrated(prep, a, &[b], bench, &sampling.derived(0), &calibration)?;
    let ac = correlation_scan_calibrated(prep, a, c_grid, bench, &sampling.derived(1), &calibration)?;
    let bc = correlation_scan_calibrated(prep, b, c_grid, bench, &sampling.derived(2), &calibration)?;
    assemble_scan(a, b, ab.points[0], ac.points, bc.points, calibration)
}
