//! Integral solutions of the field equations.
//!
//! Newtonian-potential and Biot-Savart integrals are evaluated with the
//! midpoint rule. Singular self-contributions are dropped (the self-cell of
//! a grid, the segment a target sits on) instead of regularising the kernel.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use log::warn;
use rayon::prelude::*;

use crate::soliton::SolitonParams;
use crate::{Error, Result, Vec3};

const FOUR_PI: f64 = 4.0 * PI;

/// Distance below which a target counts as lying on a filament segment.
pub const FILAMENT_EPS: f64 = 1e-9;

/// Sample type carried by a [`SourceGrid`]: a scalar or a 3-vector.
pub trait FieldValue: Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn is_finite(&self) -> bool;
}

impl FieldValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

impl FieldValue for Vec3 {
    fn zero() -> Self {
        Vec3::zeros()
    }
    fn is_zero(&self) -> bool {
        *self == Vec3::zeros()
    }
    fn is_finite(&self) -> bool {
        self.iter().all(|c| c.is_finite())
    }
}

/// Uniform rectangular grid of source samples at cell centres.
///
/// Cell `(i, j, k)` sits at `origin + (i, j, k) ⊙ spacing`; values are stored
/// with `i` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceGrid<V> {
    origin: Vec3,
    spacing: Vec3,
    dims: [usize; 3],
    values: Vec<V>,
}

impl<V: FieldValue> SourceGrid<V> {
    pub fn new(origin: Vec3, spacing: Vec3, dims: [usize; 3], values: Vec<V>) -> Result<Self> {
        if spacing.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
            return Err(Error::invalid("spacing", "components must be positive and finite"));
        }
        if values.len() != dims.iter().product::<usize>() {
            return Err(Error::invalid(
                "values",
                format!(
                    "expected {} samples, got {}",
                    dims.iter().product::<usize>(),
                    values.len()
                ),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("values", "samples must be finite"));
        }
        Ok(Self {
            origin,
            spacing,
            dims,
            values,
        })
    }

    /// Samples `f` at every cell centre.
    pub fn from_fn<F: Fn(Vec3) -> V>(origin: Vec3, spacing: Vec3, dims: [usize; 3], f: F) -> Result<Self> {
        let mut values = Vec::with_capacity(dims.iter().product());
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    values.push(f(
                        origin + spacing.component_mul(&Vec3::new(i as f64, j as f64, k as f64))
                    ));
                }
            }
        }
        Self::new(origin, spacing, dims, values)
    }

    pub fn zeros(origin: Vec3, spacing: Vec3, dims: [usize; 3]) -> Result<Self> {
        Self::new(origin, spacing, dims, vec![V::zero(); dims.iter().product()])
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn spacing(&self) -> Vec3 {
        self.spacing
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.product()
    }

    pub fn cell_center(&self, index: usize) -> Vec3 {
        let i = index % self.dims[0];
        let j = (index / self.dims[0]) % self.dims[1];
        let k = index / (self.dims[0] * self.dims[1]);
        self.origin + self.spacing.component_mul(&Vec3::new(i as f64, j as f64, k as f64))
    }

    /// Same origin, spacing and shape.
    pub fn is_congruent<W>(&self, other: &SourceGrid<W>) -> bool {
        self.origin == other.origin && self.spacing == other.spacing && self.dims == other.dims
    }

    /// Pointwise `f(a, b)` over two congruent grids.
    pub fn zip_with<F: Fn(V, V) -> V>(&self, other: &Self, f: F) -> Result<Self> {
        if !self.is_congruent(other) {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect();
        Self::new(self.origin, self.spacing, self.dims, values)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| *v * factor).collect(),
            ..self.clone()
        }
    }
}

/// Newtonian potential `(1/4π) Σ v dV / |x − x_cell|`.
///
/// Cells closer than half the smallest spacing to `x` are skipped.
pub fn newtonian_potential<V: FieldValue>(sources: &SourceGrid<V>, x: Vec3) -> V {
    let exclusion = 0.5 * sources.spacing.min();
    let dv = sources.cell_volume();
    let mut acc = V::zero();
    for (idx, v) in sources.values.iter().enumerate() {
        if v.is_zero() {
            continue;
        }
        let dist = (x - sources.cell_center(idx)).norm();
        if dist < exclusion {
            continue;
        }
        acc = acc + *v * (dv / dist);
    }
    acc * (1.0 / FOUR_PI)
}

/// [`newtonian_potential`] at many targets in parallel.
pub fn newtonian_potential_many<V: FieldValue>(sources: &SourceGrid<V>, targets: &[Vec3]) -> Vec<V> {
    targets.par_iter().map(|x| newtonian_potential(sources, *x)).collect()
}

/// Polyline carrying a circulation `γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Filament {
    points: Vec<Vec3>,
    gamma: f64,
    closed: bool,
}

impl Filament {
    pub fn new(points: Vec<Vec3>, gamma: f64, closed: bool) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("points", "a filament needs at least two points"));
        }
        if points.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("points", "consecutive points must be distinct"));
        }
        Ok(Self { points, gamma, closed })
    }

    /// Straight filament centred at `center` along unit `direction`.
    pub fn straight(center: Vec3, direction: Vec3, length: f64, segments: usize, gamma: f64) -> Result<Self> {
        let d = direction.normalize();
        let points = (0..=segments)
            .map(|i| center + d * (length * (i as f64 / segments as f64 - 0.5)))
            .collect();
        Self::new(points, gamma, false)
    }

    /// Closed circular loop of `radius` about the z axis through `center`.
    pub fn ring(center: Vec3, radius: f64, segments: usize, gamma: f64) -> Result<Self> {
        let points = (0..segments)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / segments as f64;
                center + Vec3::new(radius * a.cos(), radius * a.sin(), 0.0)
            })
            .collect();
        Self::new(points, gamma, true)
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Segments as `(start, end)`, including the closing segment when closed.
    pub fn segments(&self) -> impl Iterator<Item = (Vec3, Vec3)> + '_ {
        let n = self.points.len();
        let count = if self.closed { n } else { n - 1 };
        (0..count).map(move |i| (self.points[i], self.points[(i + 1) % n]))
    }
}

fn distance_to_segment(x: Vec3, a: Vec3, b: Vec3) -> f64 {
    let ab = b - a;
    let t = ((x - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
    (x - (a + ab * t)).norm()
}

/// Competition field of a filament,
/// `(γ/4π) Σ (x − x_mid) × Δe / |x − x_mid|³ − capital`.
pub fn biot_savart(filament: &Filament, x: Vec3, capital: Vec3) -> Result<Vec3> {
    let mut acc = Vec3::zeros();
    for (a, b) in filament.segments() {
        let distance = distance_to_segment(x, a, b);
        if distance < FILAMENT_EPS {
            return Err(Error::OnFilament { distance });
        }
        let r = x - 0.5 * (a + b);
        let r_norm = r.norm();
        acc += r.cross(&(b - a)) / (r_norm * r_norm * r_norm);
    }
    Ok(acc * (filament.gamma / FOUR_PI) - capital)
}

/// Local-induction competition `C = (γκ/4π) ln(2L/r) b − K`.
///
/// The logarithmic law assumes `L ≫ r`; a warning is logged when `r > L/10`.
pub fn lia_competition(params: &SolitonParams, kappa: f64, binormal: Vec3, r: f64, capital: Vec3) -> Result<Vec3> {
    if !(r > 0.0) {
        return Err(Error::NonpositiveRadius(r));
    }
    let big_l = params.half_length;
    if r > big_l / 10.0 {
        warn!("cross-section radius {r} is not small against L = {big_l}");
    }
    Ok(binormal * (params.gamma * kappa / FOUR_PI * (2.0 * big_l / r).ln()) - capital)
}

/// Capital at the transverse cutoff `r = d`, `K = (γκ/4π) ln(2L/d) b`.
pub fn capital_boundary(params: &SolitonParams, kappa: f64, binormal: Vec3) -> Result<Vec3> {
    let d = params.cutoff;
    let two_l = 2.0 * params.half_length;
    if !(d > 0.0 && d < two_l) {
        return Err(Error::InvalidCutoff { d, two_l });
    }
    Ok(binormal * (params.gamma * kappa / FOUR_PI * (two_l / d).ln()))
}

/// Competition with the capital cutoff applied, `C = (γκ/4π) ln(d/r) b`.
pub fn cutoff_competition(params: &SolitonParams, kappa: f64, binormal: Vec3, r: f64) -> Result<Vec3> {
    if !(r > 0.0) {
        return Err(Error::NonpositiveRadius(r));
    }
    let d = params.cutoff;
    let two_l = 2.0 * params.half_length;
    if !(d > 0.0 && d < two_l) {
        return Err(Error::InvalidCutoff { d, two_l });
    }
    Ok(binormal * (params.gamma * kappa / FOUR_PI * (d / r).ln()))
}

/// Price level `π = N[dK/dt](x) − ∂C_h/∂t(x)`.
pub fn inflation_from_sources<F>(capital_rate: &SourceGrid<Vec3>, choice_rate: F, x: Vec3) -> Vec3
where
    F: Fn(Vec3) -> Vec3,
{
    newtonian_potential(capital_rate, x) - choice_rate(x)
}

/// Choice generated by inflation dynamics, `C_h = −N[∂π/∂t](x)`.
pub fn choice_from_inflation(inflation_rate: &SourceGrid<Vec3>, x: Vec3) -> Vec3 {
    -newtonian_potential(inflation_rate, x)
}

/// Self-consistent price level `π = N[dK/dt + ∂²π/∂t²](x)`.
pub fn inflation_selfconsistent<V: FieldValue>(
    capital_rate: &SourceGrid<V>,
    inflation_accel: &SourceGrid<V>,
    x: Vec3,
) -> Result<V> {
    let total = capital_rate.zip_with(inflation_accel, |a, b| a + b)?;
    Ok(newtonian_potential(&total, x))
}
