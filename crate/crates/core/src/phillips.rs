//! Inflation/unemployment relation built on the self-consistent price-level
//! kernel.
//!
//! Unemployment enters through the capital rate `∂K/∂t = 1/u`, spread
//! uniformly over a source region; expectations enter as the `∂²π/∂t²`
//! source. Both are scalar fields along the price axis.

use crate::kernels::{inflation_selfconsistent, newtonian_potential, SourceGrid};
use crate::{Error, Result, Vec3};

/// Capital rate implied by unemployment, `∂K/∂t = 1/u`.
pub fn capital_rate(u: f64) -> Result<f64> {
    if !(u > 0.0) {
        return Err(Error::ZeroUnemployment(u));
    }
    Ok(1.0 / u)
}

/// One point of the Phillips curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhillipsSample {
    pub u: f64,
    pub capital_rate: f64,
    pub inflation: f64,
}

/// Price level at `x` for each unemployment rate in `u_values`.
///
/// `region` is the spatial profile of the capital-rate source (typically an
/// indicator of a compact region); it is scaled by `1/u`. `expectations` is
/// the inflation-acceleration source and must be congruent with `region`.
pub fn phillips_curve(
    u_values: &[f64],
    region: &SourceGrid<f64>,
    expectations: &SourceGrid<f64>,
    x: Vec3,
) -> Result<Vec<PhillipsSample>> {
    if !region.is_congruent(expectations) {
        return Err(Error::GridMismatch);
    }
    // The kernel is linear: evaluate the two contributions once and combine.
    let unit = newtonian_potential(region, x);
    let expected = inflation_selfconsistent(&region.scaled(0.0), expectations, x)?;
    u_values
        .iter()
        .map(|&u| {
            let rate = capital_rate(u)?;
            Ok(PhillipsSample {
                u,
                capital_rate: rate,
                inflation: rate * unit + expected,
            })
        })
        .collect()
}

/// Direct evaluation for a single `u`, filling the source grid explicitly.
pub fn inflation_at(u: f64, region: &SourceGrid<f64>, expectations: &SourceGrid<f64>, x: Vec3) -> Result<f64> {
    let capital = region.scaled(capital_rate(u)?);
    inflation_selfconsistent(&capital, expectations, x)
}
