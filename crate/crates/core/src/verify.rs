//! Verification suite behind `marketfield verify`.
//!
//! Every check reduces to a non-negative measured value compared against a
//! named tolerance (`measured ≤ tolerance` passes). Tolerances can be
//! overridden by name.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::f64::consts::PI;
use std::fmt;

use crate::config::{linspace, RunConfig};
use crate::equilibrium::{
    berry_connection, berry_phase_line, berry_phase_surface, circle_contour, construct_fields, residual_check,
    FieldGrid, GridGeometry, PotentialSample, ResidualReport, StateVector, TriangleMesh,
};
use crate::frenet::{integrate_frenet, reconstruct_soliton_curve, FrenetFrame};
use crate::kernels::{
    biot_savart, capital_boundary, cutoff_competition, lia_competition, newtonian_potential_many, Filament, SourceGrid,
};
use crate::phillips::phillips_curve;
use crate::soliton::{curvature, demand_radius, SolitonParams};
use crate::{Error, Result, Vec3};

/// Default tolerance of every check, by name.
pub const DEFAULT_TOLERANCES: &[(&str, f64)] = &[
    ("curvature_peak_speed", 1e-6),
    ("frame_orthonormality", 1e-8),
    ("circle_closure", 1e-6),
    ("helix_radius", 1e-6),
    ("integrator_order", 4.0),
    ("stokes_equality", 1e-3),
    ("stokes_analytic", 1e-3),
    ("laplacian_recovers_source", 0.05),
    ("biot_savart_straight", 0.01),
    ("biot_savart_refinement", 1e-3),
    ("lia_cutoff_identity", 1e-12),
    ("connection_reality", 1e-8),
    ("connection_phase", 1e-6),
    ("residual_convergence", 1.0),
    ("demand_monotonicity", 0.0),
    ("phillips_monotonicity", 0.0),
];

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.measured.is_finite() && self.measured <= self.tolerance
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<28} measured={:.3e} tol={:.3e}  {}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.tolerance,
            self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed())
    }
}

/// Parses `NAME=VALUE` overrides, rejecting unknown names.
pub fn parse_overrides<S: AsRef<str>>(items: &[S]) -> Result<HashMap<String, f64>> {
    let known: HashSet<&str> = DEFAULT_TOLERANCES.iter().map(|(n, _)| *n).collect();
    let mut out = HashMap::new();
    for item in items {
        let item = item.as_ref();
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| Error::invalid("tol", format!("expected NAME=VALUE, got `{item}`")))?;
        let name = name.trim();
        if !known.contains(name) {
            return Err(Error::UnknownKey(name.to_string()));
        }
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::invalid("tol", format!("`{value}` is not a number")))?;
        out.insert(name.to_string(), value);
    }
    Ok(out)
}

/// Location of the curvature maximum at time `t`: grid argmax over
/// `s_grid`, refined by golden-section search on the bracketing cells.
pub fn curvature_peak(params: &SolitonParams, t: f64, s_grid: &[f64]) -> f64 {
    let f = |s: f64| curvature(params, s, t);
    let (best, _) = s_grid
        .iter()
        .enumerate()
        .map(|(i, s)| (i, f(*s)))
        .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    let mut a = s_grid[best.saturating_sub(1)];
    let mut b = s_grid[(best + 1).min(s_grid.len() - 1)];
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        if b - a < 1e-15 * (1.0 + a.abs()) {
            break;
        }
        let c = b - inv_phi * (b - a);
        let d = a + inv_phi * (b - a);
        if f(c) >= f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

/// Least-squares slope of `ys` against `xs`.
pub fn fitted_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn circle_endpoint_error(steps: usize) -> Result<f64> {
    let c = integrate_frenet(
        |_| 1.0,
        |_| 0.0,
        (0.0, 2.0 * PI),
        2.0 * PI / steps as f64,
        FrenetFrame::identity(),
        Vec3::zeros(),
    )?;
    Ok(c.samples.last().expect("non-empty curve").position.norm())
}

/// Measured radius and pitch of the constant-(κ, τ) helix over one turn,
/// worst radius deviation from `κ/(κ²+τ²)` as the third element.
pub fn helix_measurement(kappa: f64, tau: f64, step: f64) -> Result<(f64, f64, f64)> {
    let omega = (kappa * kappa + tau * tau).sqrt();
    let period = 2.0 * PI / omega;
    let curve = integrate_frenet(
        |_| kappa,
        |_| tau,
        (0.0, period),
        step,
        FrenetFrame::identity(),
        Vec3::zeros(),
    )?;
    // Darboux vector τt + κb is the helix axis.
    let f0 = curve.samples[0].frame;
    let axis = (f0.tangent * tau + f0.binormal * kappa).normalize();
    let turn = &curve.samples[..curve.samples.len() - 1];
    let project = |p: Vec3| p - axis * p.dot(&axis);
    let center = turn.iter().map(|s| project(s.position)).sum::<Vec3>() / turn.len() as f64;
    let expected = kappa / (omega * omega);
    let mut mean = 0.0;
    let mut worst: f64 = 0.0;
    for s in turn {
        let r = (project(s.position) - center).norm();
        mean += r;
        worst = worst.max((r - expected).abs());
    }
    mean /= turn.len() as f64;
    let last = curve.samples.last().expect("non-empty").position;
    let pitch = (last - curve.samples[0].position).dot(&axis);
    Ok((mean, pitch, worst))
}

/// Outcome of the Poisson-kernel Laplacian check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplacianCheck {
    /// `max |Δ_h φ + f| / max |f|` over qualified points.
    pub max_relative_error: f64,
    pub qualified_points: usize,
}

/// Applies the 7-point Laplacian to the Newtonian potential of the compact
/// bump `(1 − r²/a²)⁴` on an `n³` unit-spacing grid and compares with the
/// source at points at least `margin` cells from both the support boundary
/// and the grid edge.
pub fn laplacian_check(n: usize, support_radius: f64, margin: usize) -> Result<LaplacianCheck> {
    let center = Vec3::repeat((n - 1) as f64 / 2.0);
    let bump = |p: Vec3| {
        let q = (p - center).norm_squared() / (support_radius * support_radius);
        if q < 1.0 {
            (1.0 - q).powi(4)
        } else {
            0.0
        }
    };
    let grid = SourceGrid::from_fn(Vec3::zeros(), Vec3::repeat(1.0), [n, n, n], bump)?;
    let m = margin as f64;
    let mut qualified = Vec::new();
    for k in margin..n - margin {
        for j in margin..n - margin {
            for i in margin..n - margin {
                let p = Vec3::new(i as f64, j as f64, k as f64);
                let r = (p - center).norm();
                if r <= support_radius - m || r >= support_radius + m {
                    qualified.push([i, j, k]);
                }
            }
        }
    }
    let mut needed: BTreeMap<[usize; 3], usize> = BTreeMap::new();
    for q in &qualified {
        for d in [
            [0i64, 0, 0],
            [1, 0, 0],
            [-1, 0, 0],
            [0, 1, 0],
            [0, -1, 0],
            [0, 0, 1],
            [0, 0, -1],
        ] {
            let key = [
                (q[0] as i64 + d[0]) as usize,
                (q[1] as i64 + d[1]) as usize,
                (q[2] as i64 + d[2]) as usize,
            ];
            let next = needed.len();
            needed.entry(key).or_insert(next);
        }
    }
    let mut targets = vec![Vec3::zeros(); needed.len()];
    for (key, &slot) in &needed {
        targets[slot] = Vec3::new(key[0] as f64, key[1] as f64, key[2] as f64);
    }
    let phi = newtonian_potential_many(&grid, &targets);
    let value = |key: [usize; 3]| phi[needed[&key]];
    let mut worst: f64 = 0.0;
    for q in &qualified {
        let [i, j, k] = *q;
        let lap = value([i + 1, j, k])
            + value([i - 1, j, k])
            + value([i, j + 1, k])
            + value([i, j - 1, k])
            + value([i, j, k + 1])
            + value([i, j, k - 1])
            - 6.0 * value(*q);
        let f = bump(Vec3::new(i as f64, j as f64, k as f64));
        worst = worst.max((lap + f).abs());
    }
    Ok(LaplacianCheck {
        max_relative_error: worst,
        qualified_points: qualified.len(),
    })
}

/// Smooth potentials obeying `div C_h + ∂φ/∂t = 0`:
/// `C_h = cos t ∇χ + (1 + t)(sin y sin 2z, sin z sin 2x, sin x sin 2y)`,
/// `φ = 3 sin t χ`, `χ = sin x sin y sin z`.
pub fn synthetic_potentials(x: Vec3, t: f64) -> PotentialSample {
    let (sx, cx) = x.x.sin_cos();
    let (sy, cy) = x.y.sin_cos();
    let (sz, cz) = x.z.sin_cos();
    let grad_chi = Vec3::new(cx * sy * sz, sx * cy * sz, sx * sy * cz);
    // unequal wavenumbers keep the discrete div-of-curl truncation visible
    let swirl = Vec3::new(sy * (2.0 * x.z).sin(), sz * (2.0 * x.x).sin(), sx * (2.0 * x.y).sin());
    PotentialSample {
        choice: grad_chi * t.cos() + swirl * (1.0 + t),
        phi: 3.0 * t.sin() * sx * sy * sz,
        ln_m: 0.1 * x.x * t + 0.05 * (x.y * x.z).cos(),
    }
}

/// Builds fields at spacing `1/(8·2^level)` over the box `[3/8, 5/8]³`
/// (plus the residual margin) around time `0.5` and reports residuals.
pub fn residual_at_level(level: u32) -> Result<ResidualReport> {
    let h = 1.0 / (8.0 * f64::from(1u32 << level));
    let margin = crate::equilibrium::RESIDUAL_MARGIN as f64;
    let n = (0.25 / h).round() as usize + 2 * crate::equilibrium::RESIDUAL_MARGIN + 1;
    let geometry = GridGeometry {
        origin: Vec3::repeat(0.375 - margin * h),
        spacing: Vec3::repeat(h),
        dims: [n, n, n],
        t0: 0.5 - margin * h,
        dt: h,
    };
    let grid = FieldGrid::sample(
        geometry,
        2 * crate::equilibrium::RESIDUAL_MARGIN + 1,
        synthetic_potentials,
    )?;
    residual_check(&construct_fields(grid)?)
}

fn ratio_deviation(values: &[f64], target: f64) -> (f64, Vec<f64>) {
    let ratios: Vec<f64> = values.windows(2).map(|w| w[0] / w[1]).collect();
    let dev = ratios.iter().map(|r| (r - target).abs()).fold(0.0, f64::max);
    (dev, ratios)
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(", ")
}

/// Runs every check with `cfg`'s soliton parameters.
pub fn run_verify(cfg: &RunConfig, overrides: &HashMap<String, f64>) -> Result<VerifyReport> {
    cfg.validate()?;
    let tol = |name: &'static str| -> f64 {
        overrides.get(name).copied().unwrap_or_else(|| {
            DEFAULT_TOLERANCES
                .iter()
                .find(|(n, _)| *n == name)
                .map(|(_, v)| *v)
                .expect("every check has a default tolerance")
        })
    };
    let mut checks = Vec::new();
    let mut push = |name: &'static str, measured: f64, detail: String| {
        checks.push(CheckResult {
            name,
            measured,
            tolerance: tol(name),
            detail,
        });
    };
    let p = cfg.params;

    // soliton speed
    let ts = linspace(0.0, 4.0, 81);
    let s_grid = linspace(-10.0, 20.0, 3001);
    let peaks: Vec<f64> = ts.iter().map(|&t| curvature_peak(&p, t, &s_grid)).collect();
    let slope = fitted_slope(&ts, &peaks);
    push(
        "curvature_peak_speed",
        (slope - 2.0 * p.tau).abs(),
        format!("slope {slope:.12} vs 2τ = {}", 2.0 * p.tau),
    );

    // frames
    let (curve, report) = reconstruct_soliton_curve(&p, 0.0, (-10.0, 10.0), 1e-3)?;
    let circle = integrate_frenet(
        |_| 1.0,
        |_| 0.0,
        (0.0, 2.0 * PI),
        1e-3,
        FrenetFrame::identity(),
        Vec3::zeros(),
    )?;
    push(
        "frame_orthonormality",
        curve.max_frame_defect().max(circle.max_frame_defect()),
        format!("soliton curve rms vs closed form {:.4e}", report.rms_after_alignment),
    );
    let closure = circle.samples.last().expect("non-empty").position.norm();
    push("circle_closure", closure, "κ=1, τ=0 over 2π, step 1e-3".into());
    let (radius, pitch, worst) = helix_measurement(1.0, 0.5, 1e-3)?;
    push(
        "helix_radius",
        worst,
        format!(
            "radius {radius:.9} (expect 0.8), pitch {pitch:.9} (expect {:.9})",
            2.0 * PI * 0.5 / 1.25
        ),
    );
    let errors = [16, 32, 64, 128]
        .into_iter()
        .map(circle_endpoint_error)
        .collect::<Result<Vec<_>>>()?;
    let (dev, ratios) = ratio_deviation(&errors, 16.0);
    push("integrator_order", dev, format!("error ratios [{}]", fmt_list(&ratios)));

    // Stokes
    let rho = 1.0;
    let field = |x: Vec3| Vec3::new(-x.y, x.x, 0.0) * 0.5;
    let contour = circle_contour(Vec3::zeros(), rho, 256);
    let mesh = TriangleMesh::disk(Vec3::zeros(), rho, 16, 256);
    let line = berry_phase_line(field, &contour)?;
    let surface = berry_phase_surface(field, &mesh, &contour)?;
    push(
        "stokes_equality",
        ((line - surface) / line).abs(),
        format!("line {line:.9}, surface {surface:.9}"),
    );
    let exact = PI * rho * rho;
    push(
        "stokes_analytic",
        (line - exact).abs().max((surface - exact).abs()),
        format!("πρ² = {exact:.9}"),
    );

    // kernels
    let lap = laplacian_check(48, 12.0, 5)?;
    push(
        "laplacian_recovers_source",
        lap.max_relative_error,
        format!("{} qualified points on 48³", lap.qualified_points),
    );
    let rho = 1.0;
    let gamma = 1.0;
    let straight = Filament::straight(Vec3::zeros(), Vec3::z(), 200.0 * rho, 4001, gamma)?;
    let b = biot_savart(&straight, Vec3::new(rho, 0.0, 0.0), Vec3::zeros())?;
    let expected = gamma / (2.0 * PI * rho);
    // the (x − x′) × de orientation points along −φ̂ here; only the direction class matters
    let azimuthal = b.dot(&Vec3::y()).abs() / b.norm();
    push(
        "biot_savart_straight",
        ((b.norm() - expected) / expected).abs().max(1.0 - azimuthal),
        format!("|C| = {:.9} vs γ/2πρ = {expected:.9}", b.norm()),
    );
    let target = Vec3::new(0.3, 0.2, 0.5);
    let coarse = biot_savart(&Filament::ring(Vec3::zeros(), 1.0, 256, gamma)?, target, Vec3::zeros())?;
    let fine = biot_savart(&Filament::ring(Vec3::zeros(), 1.0, 512, gamma)?, target, Vec3::zeros())?;
    push(
        "biot_savart_refinement",
        (coarse - fine).norm() / fine.norm(),
        "ring, 256 vs 512 segments".into(),
    );
    let mut identity_gap: f64 = 0.0;
    let binormal = Vec3::new(2.0, -1.0, 2.0) / 3.0;
    for big_l in [2.0, 5.0, 40.0] {
        for d in [0.1, 1.0, 3.0] {
            let q = SolitonParams {
                half_length: big_l,
                cutoff: d,
                ..p
            };
            if d >= 2.0 * big_l {
                continue;
            }
            let k = capital_boundary(&q, 1.7, binormal)?;
            for r in [0.01, 0.3, d, 2.5] {
                let lhs = lia_competition(&q, 1.7, binormal, r, k)?;
                let rhs = cutoff_competition(&q, 1.7, binormal, r)?;
                identity_gap = identity_gap.max((lhs - rhs).amax());
            }
            identity_gap = identity_gap.max(lia_competition(&q, 1.7, binormal, d, k)?.amax());
        }
    }
    push("lia_cutoff_identity", identity_gap, "sweep over r, d, L".into());

    // connection
    let u = [
        num_complex::Complex64::new(0.6, 0.0),
        num_complex::Complex64::new(0.0, 0.8),
    ];
    let family = |theta: fn(f64) -> f64| {
        move |x: f64| -> StateVector {
            let ph = num_complex::Complex64::from_polar(1.0, theta(x));
            u.iter().map(|v| ph * v).collect()
        }
    };
    type Phase = fn(f64) -> f64;
    let thetas: [(Phase, Phase); 3] = [
        (|x| x * x, |x| 2.0 * x),
        (|x| x.sin(), |x| x.cos()),
        (|x| 3.0 * x, |_| 3.0),
    ];
    let mut reality: f64 = 0.0;
    let mut phase_err: f64 = 0.0;
    for (theta, dtheta) in thetas {
        for x in [-1.0, 0.2, 1.0, 2.5] {
            let c = berry_connection(family(theta), x, 1e-5);
            reality = reality.max(c.im.abs());
            phase_err = phase_err.max((c.re + dtheta(x)).abs());
        }
    }
    push("connection_reality", reality, "|Re (m, ∂m)| over phase families".into());
    push("connection_phase", phase_err, "i(m, ∂m) vs −θ'".into());

    // residuals
    let reports = (0..4).map(residual_at_level).collect::<Result<Vec<_>>>()?;
    let r15: Vec<f64> = reports.iter().map(|r| r.competition_curl.max_abs).collect();
    let r16: Vec<f64> = reports.iter().map(|r| r.profit_div.max_abs).collect();
    let (d15, q15) = ratio_deviation(&r15, 4.0);
    let (d16, q16) = ratio_deviation(&r16, 4.0);
    push(
        "residual_convergence",
        d15.max(d16),
        format!("curl C ratios [{}], div P ratios [{}]", fmt_list(&q15), fmt_list(&q16)),
    );

    // demand
    let mags = linspace(1.0, 1e-3, 400);
    let radii = mags
        .iter()
        .map(|m| demand_radius(*m, cfg.demand_a))
        .collect::<Result<Vec<_>>>()?;
    let violations = radii.windows(2).filter(|w| !(w[1] > w[0])).count() + usize::from(radii[0] != 0.0);
    push(
        "demand_monotonicity",
        violations as f64,
        format!("R(1) = {}, R(1e-3) = {:.6}", radii[0], radii[radii.len() - 1]),
    );

    // Phillips
    let n = 9;
    let c = (n - 1) as f64 / 2.0;
    let region = SourceGrid::from_fn(Vec3::zeros(), Vec3::repeat(1.0), [n, n, n], |x| {
        if (x - Vec3::repeat(c)).norm() <= 3.0 {
            1.0
        } else {
            0.0
        }
    })?;
    let expectations = SourceGrid::from_fn(Vec3::zeros(), Vec3::repeat(1.0), [n, n, n], |x| {
        0.2 * (-(x - Vec3::repeat(c)).norm_squared() / 8.0).exp()
    })?;
    let us: Vec<f64> = (1..=10).map(|i| 0.02 * i as f64).collect();
    let curve = phillips_curve(&us, &region, &expectations, Vec3::new(c + 10.0, c, c))?;
    let drops = curve.windows(2).filter(|w| !(w[1].inflation < w[0].inflation)).count();
    push(
        "phillips_monotonicity",
        drops as f64,
        format!(
            "π(0.02) = {:.6}, π(0.2) = {:.6}",
            curve[0].inflation,
            curve[curve.len() - 1].inflation
        ),
    );

    Ok(VerifyReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_parse() {
        let o = parse_overrides(&["circle_closure=1e-3", "helix_radius = 0"]).unwrap();
        assert_eq!(o["circle_closure"], 1e-3);
        assert_eq!(o["helix_radius"], 0.0);
        assert!(matches!(parse_overrides(&["nope=1"]), Err(Error::UnknownKey(_))));
        assert!(parse_overrides(&["circle_closure"]).is_err());
        assert!(parse_overrides(&["circle_closure=abc"]).is_err());
    }

    #[test]
    fn peak_refinement() {
        let p = SolitonParams::default();
        let grid = linspace(-10.0, 10.0, 101);
        for t in [0.0, 0.37, 1.0, 3.3] {
            assert!((curvature_peak(&p, t, &grid) - 2.0 * p.tau * t).abs() < 1e-7);
        }
    }

    #[test]
    fn slope_of_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        assert!((fitted_slope(&xs, &ys) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn synthetic_potentials_satisfy_gauge_relation() {
        // div C_h + ∂φ/∂t by centred differences at a few points
        let h = 1e-4;
        for (x, t) in [(Vec3::new(0.3, 0.4, 0.5), 0.5), (Vec3::new(1.0, -0.2, 0.7), 1.3)] {
            let div: f64 = (0..3)
                .map(|a| {
                    let mut e = Vec3::zeros();
                    e[a] = h;
                    (synthetic_potentials(x + e, t).choice[a] - synthetic_potentials(x - e, t).choice[a]) / (2.0 * h)
                })
                .sum();
            let dphi = (synthetic_potentials(x, t + h).phi - synthetic_potentials(x, t - h).phi) / (2.0 * h);
            assert!((div + dphi).abs() < 1e-7);
        }
    }
}
