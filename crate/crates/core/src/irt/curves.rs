//! Tabulated curve data for external plotting: per-item characteristic
//! curves, item information, test information, and the expected true score.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{real, Real};

use super::{icc, item_information, FittedModel};

/// Inclusive, evenly spaced evaluation grid over the latent trait.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaGrid<R> {
    pub min: R,
    pub max: R,
    pub step: R,
}

impl<R: Real> ThetaGrid<R> {
    pub fn new(min: R, max: R, step: R) -> Self {
        Self { min, max, step }
    }

    /// Grid points `min, min + step, ...` up to `max`. At least two points
    /// are required; a collapsed or inverted grid is an error.
    pub fn points(&self) -> Result<Vec<R>> {
        if !self.min.is_finite() || !self.max.is_finite() || !self.step.is_finite() {
            return Err(Error::invalid_argument(
                "grid bounds and step must be finite",
            ));
        }
        if self.step <= R::zero() {
            return Err(Error::invalid_argument(format!(
                "grid step must be positive, got {}",
                self.step
            )));
        }
        if self.min >= self.max {
            return Err(Error::invalid_argument(format!(
                "grid needs min < max, got [{}, {}]",
                self.min, self.max
            )));
        }
        let span = (self.max - self.min) / self.step + real(1e-9);
        let count = span.floor().to_usize().ok_or_else(|| {
            Error::invalid_argument("grid step too small for the requested range")
        })? + 1;
        if count < 2 {
            return Err(Error::invalid_argument("grid has fewer than 2 points"));
        }
        if count > 10_000_000 {
            return Err(Error::invalid_argument(format!(
                "grid has {count} points; refusing to tabulate more than 10 million"
            )));
        }
        Ok((0..count)
            .map(|i| self.min + real::<R>(i as f64) * self.step)
            .collect())
    }
}

/// One grid row of tabulated curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint<R> {
    pub theta: R,
    /// Pass probability per item, in model item order.
    pub icc: Vec<R>,
    /// Information per item, in model item order.
    pub information: Vec<R>,
    pub test_information: R,
    /// Expected true score: sum of the icc column.
    pub expected_true_score: R,
}

/// Curve table over a theta grid, one row per grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveTable<R> {
    pub item_ids: Vec<String>,
    pub points: Vec<CurvePoint<R>>,
}

/// Tabulates ICC, item information, test information, and expected true
/// score over `grid` for plotting.
pub fn curve_table<R: Real>(model: &FittedModel<R>, grid: &ThetaGrid<R>) -> Result<CurveTable<R>> {
    let thetas = grid.points()?;
    let mut points = Vec::with_capacity(thetas.len());
    for theta in thetas {
        let mut probabilities = Vec::with_capacity(model.n_items());
        let mut information = Vec::with_capacity(model.n_items());
        let mut tif = R::zero();
        let mut true_score = R::zero();
        for item in model.items() {
            let p = icc(theta, item)?;
            let info = item_information(theta, item)?;
            true_score += p;
            tif += info;
            probabilities.push(p);
            information.push(info);
        }
        points.push(CurvePoint {
            theta,
            icc: probabilities,
            information,
            test_information: tif,
            expected_true_score: true_score,
        });
    }
    Ok(CurveTable {
        item_ids: model.item_ids().map(str::to_string).collect(),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::irt::{fit, FitConfig, ModelKind, Response, ResponseMatrix};

    fn model() -> FittedModel<f64> {
        let rows: Vec<(String, Vec<Option<Response>>)> =
            [[1, 0], [0, 1], [1, 1], [0, 0], [1, 0], [0, 1]]
                .iter()
                .enumerate()
                .map(|(i, cells)| {
                    (
                        format!("d{}", i + 1),
                        cells
                            .iter()
                            .map(|&c| Some(Response::from_u8(c).unwrap()))
                            .collect(),
                    )
                })
                .collect();
        let matrix = ResponseMatrix::new(vec!["a".into(), "b".into()], rows).unwrap();
        fit(&matrix, ModelKind::TwoPl, &FitConfig::default()).unwrap()
    }

    #[test]
    fn collapsed_grid_is_rejected() {
        let grid = ThetaGrid::new(0.0, 0.0, 0.1);
        assert!(grid.points().is_err());
    }

    #[test]
    fn standard_grid_has_81_points() {
        let grid = ThetaGrid::<f64>::new(-4.0, 4.0, 0.1);
        let points = grid.points().unwrap();
        assert_eq!(points.len(), 81);
        assert_eq!(points[0], -4.0);
        assert!((points[80] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn table_shape_matches_grid_and_items() {
        let model = model();
        let table = curve_table(&model, &ThetaGrid::new(-4.0, 4.0, 0.1)).unwrap();
        assert_eq!(table.points.len(), 81);
        for point in &table.points {
            assert_eq!(point.icc.len(), 2);
            assert_eq!(point.information.len(), 2);
            let sum: f64 = point.icc.iter().sum();
            assert!((sum - point.expected_true_score).abs() < 1e-12);
            let tif: f64 = point.information.iter().sum();
            assert!((tif - point.test_information).abs() < 1e-12);
        }
    }

    #[test]
    fn rasch_icc_is_symmetric_about_zero_difficulty() {
        // 1PL with b = 0: P(-theta) = 1 - P(theta)
        let item = crate::irt::ItemParameters::new("x", 1.0_f64, 0.0);
        for theta in [-3.0, -1.5, -0.2, 0.0, 0.7, 2.4] {
            let p = icc(theta, &item).unwrap();
            let q = icc(-theta, &item).unwrap();
            assert!((p + q - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn negative_step_is_invalid() {
        assert!(ThetaGrid::new(-1.0, 1.0, -0.5).points().is_err());
        assert!(ThetaGrid::new(-1.0, 1.0, 0.0).points().is_err());
        assert!(ThetaGrid::new(f64::NAN, 1.0, 0.5).points().is_err());
    }
}
