//! Frenet-Serret integration and reconstruction of the choice curve.

use nalgebra::Matrix3;

use crate::quadrature::adaptive_simpson;
use crate::soliton::{choice_components, curvature, SolitonParams};
use crate::{Error, Result, Vec3};

/// Orthonormal tangent/normal/binormal triad.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrenetFrame {
    pub tangent: Vec3,
    pub normal: Vec3,
    pub binormal: Vec3,
}

impl Default for FrenetFrame {
    fn default() -> Self {
        Self::identity()
    }
}

impl FrenetFrame {
    /// `t = x̂, n = ŷ, b = ẑ`.
    pub fn identity() -> Self {
        Self {
            tangent: Vec3::x(),
            normal: Vec3::y(),
            binormal: Vec3::z(),
        }
    }

    /// Largest entry of `|G − I|` where `G` is the Gram matrix of the triad.
    pub fn orthonormality_defect(&self) -> f64 {
        let v = [self.tangent, self.normal, self.binormal];
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v[i].dot(&v[j]) - target).abs());
            }
        }
        worst.max((self.tangent.cross(&self.normal) - self.binormal).amax())
    }

    /// Gram-Schmidt projection back onto a right-handed orthonormal triad.
    pub fn reorthonormalize(&mut self) {
        let t = self.tangent.normalize();
        let n = (self.normal - t * t.dot(&self.normal)).normalize();
        self.tangent = t;
        self.normal = n;
        self.binormal = t.cross(&n);
    }
}

/// One sample of an integrated curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    pub s: f64,
    pub position: Vec3,
    pub frame: FrenetFrame,
}

/// Space curve sampled at uniform arclength spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub samples: Vec<CurveSample>,
    pub step: f64,
}

impl Curve {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn positions(&self) -> impl Iterator<Item = Vec3> + '_ {
        self.samples.iter().map(|p| p.position)
    }

    /// Worst frame orthonormality defect over all samples.
    pub fn max_frame_defect(&self) -> f64 {
        self.samples
            .iter()
            .map(|p| p.frame.orthonormality_defect())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy)]
struct State {
    position: Vec3,
    frame: FrenetFrame,
}

#[derive(Clone, Copy)]
struct Deriv([Vec3; 4]);

impl State {
    fn derivative(&self, kappa: f64, tau: f64) -> Deriv {
        let FrenetFrame {
            tangent: t,
            normal: n,
            binormal: b,
        } = self.frame;
        Deriv([t, n * kappa, b * tau - t * kappa, -n * tau])
    }

    fn advanced(&self, d: &Deriv, h: f64) -> State {
        State {
            position: self.position + d.0[0] * h,
            frame: FrenetFrame {
                tangent: self.frame.tangent + d.0[1] * h,
                normal: self.frame.normal + d.0[2] * h,
                binormal: self.frame.binormal + d.0[3] * h,
            },
        }
    }
}

/// Integrates the Frenet-Serret system
///
/// ```text
/// r' = t,  t' = κ n,  n' = τ b − κ t,  b' = −τ n
/// ```
///
/// over `s_range` with the classical fourth-order Runge-Kutta method,
/// projecting the frame back onto the orthonormal manifold after every step.
///
/// The extent is split into `round(extent / step)` equal steps, so the
/// returned `Curve::step` can differ from the requested value by a relative
/// `O(step / extent)`.
pub fn integrate_frenet<K, T>(
    kappa: K,
    tau: T,
    s_range: (f64, f64),
    step: f64,
    initial_frame: FrenetFrame,
    initial_position: Vec3,
) -> Result<Curve>
where
    K: Fn(f64) -> f64,
    T: Fn(f64) -> f64,
{
    let (s0, s1) = s_range;
    let extent = s1 - s0;
    if !(step > 0.0) || !extent.is_finite() || extent <= 0.0 || step > extent {
        return Err(Error::InvalidStep { step, extent });
    }
    let n = ((extent / step).round() as usize).max(1);
    let h = extent / n as f64;

    let mut state = State {
        position: initial_position,
        frame: initial_frame,
    };
    state.frame.reorthonormalize();

    let mut samples = Vec::with_capacity(n + 1);
    samples.push(CurveSample {
        s: s0,
        position: state.position,
        frame: state.frame,
    });

    for i in 0..n {
        let s = s0 + i as f64 * h;
        let mid = s + 0.5 * h;
        let end = s0 + (i + 1) as f64 * h;
        let (k_mid, t_mid) = (kappa(mid), tau(mid));

        let k1 = state.derivative(kappa(s), tau(s));
        let k2 = state.advanced(&k1, 0.5 * h).derivative(k_mid, t_mid);
        let k3 = state.advanced(&k2, 0.5 * h).derivative(k_mid, t_mid);
        let k4 = state.advanced(&k3, h).derivative(kappa(end), tau(end));

        let mut combined = [Vec3::zeros(); 4];
        for (j, c) in combined.iter_mut().enumerate() {
            *c = (k1.0[j] + (k2.0[j] + k3.0[j]) * 2.0 + k4.0[j]) / 6.0;
        }
        state = state.advanced(&Deriv(combined), h);
        state.frame.reorthonormalize();

        samples.push(CurveSample {
            s: end,
            position: state.position,
            frame: state.frame,
        });
    }

    Ok(Curve { samples, step: h })
}

/// Result of rigidly aligning a reconstructed curve onto a reference.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentReport {
    pub rms_after_alignment: f64,
    pub rotation: Matrix3<f64>,
    pub translation: Vec3,
}

/// Least-squares rigid motion (Kabsch) taking `source` onto `target`.
///
/// Both slices must have the same, non-zero length.
pub fn align_rigid(source: &[Vec3], target: &[Vec3]) -> AlignmentReport {
    assert_eq!(source.len(), target.len());
    assert!(!source.is_empty());
    let n = source.len() as f64;
    let cs = source.iter().sum::<Vec3>() / n;
    let ct = target.iter().sum::<Vec3>() / n;

    let mut h = Matrix3::zeros();
    for (p, q) in source.iter().zip(target) {
        h += (p - cs) * (q - ct).transpose();
    }
    let svd = h.svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let v = v_t.transpose();
    let d = (v * u.transpose()).determinant().signum();
    let fix = Matrix3::from_diagonal(&Vec3::new(1.0, 1.0, d));
    let rotation = v * fix * u.transpose();
    let translation = ct - rotation * cs;

    let sq: f64 = source
        .iter()
        .zip(target)
        .map(|(p, q)| (rotation * p + translation - q).norm_squared())
        .sum();
    AlignmentReport {
        rms_after_alignment: (sq / n).sqrt(),
        rotation,
        translation,
    }
}

/// Integrates the soliton curvature with constant torsion at time `t` and
/// aligns the result to the closed-form choice curve sampled at the same
/// arclengths.
///
/// The residual RMS is informational; the two descriptions are not assumed
/// to coincide.
pub fn reconstruct_soliton_curve(
    params: &SolitonParams,
    t: f64,
    s_range: (f64, f64),
    step: f64,
) -> Result<(Curve, AlignmentReport)> {
    params.validate()?;
    let tau = params.tau;
    let curve = integrate_frenet(
        |s| curvature(params, s, t),
        |_| tau,
        s_range,
        step,
        FrenetFrame::identity(),
        Vec3::zeros(),
    )?;
    let reference: Vec<Vec3> = curve
        .samples
        .iter()
        .map(|p| Vec3::from(choice_components(params, p.s, t).as_array()))
        .collect();
    let positions: Vec<Vec3> = curve.positions().collect();
    let report = align_rigid(&positions, &reference);
    Ok((curve, report))
}

/// Binormal-flow velocity `κ(s) b(s)` at every sample.
pub fn binormal_velocity<K: Fn(f64) -> f64>(curve: &Curve, kappa: K) -> Vec<Vec3> {
    curve.samples.iter().map(|p| p.frame.binormal * kappa(p.s)).collect()
}

/// Polarization rotation `Θ = ∫₀ᴸ τ(s) ds`.
pub fn polarization_rotation<T: Fn(f64) -> f64>(tau: T, length: f64) -> f64 {
    adaptive_simpson(tau, 0.0, length, 1e-13)
}
