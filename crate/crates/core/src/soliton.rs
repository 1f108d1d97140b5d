//! Closed-form solutions of the choice field.
//!
//! Two families of formulas live here and use different argument
//! conventions, which are kept apart on purpose:
//!
//! * the *curve components* ([`choice_components`]) with
//!   `x = 2β(s − 2τt)`, `y = 4βτt`;
//! * the *derived-field equations* ([`derived_fields`]) with
//!   `X = 2β(S + τ r t / (4πL))`, `Y = βτt / (2πL)`.
//!
//! No identity between the two sets is assumed anywhere in the crate.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::quadrature::adaptive_simpson;
use crate::{Error, Result};

/// Scale of the demand-circle law, `a = 16π²`.
pub const DEMAND_SCALE: f64 = 16.0 * PI * PI;

/// Parameters of the one-soliton choice field.
///
/// `ν = 2τ/β` is never stored; see [`SolitonParams::nu`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitonParams {
    /// Inverse-arclength scale, > 0.
    pub beta: f64,
    /// Torsion of the choice curve.
    pub tau: f64,
    /// Amplitude scale `l` of the second and third curve components.
    pub l_scale: f64,
    /// Half-length `L` of the choice region, > 0.
    pub half_length: f64,
    /// Market activity `A`.
    pub activity: f64,
    /// Circulation `γ` of stable competition.
    pub gamma: f64,
    /// Capital cutoff radius `d`, > 0.
    pub cutoff: f64,
}

impl Default for SolitonParams {
    fn default() -> Self {
        Self {
            beta: 0.5,
            tau: 0.25,
            l_scale: 1.0,
            half_length: 5.0,
            activity: 1.0,
            gamma: 1.0,
            cutoff: 1.0,
        }
    }
}

impl SolitonParams {
    /// Default parameters with the given `β` and `τ`.
    pub fn new(beta: f64, tau: f64) -> Result<Self> {
        let p = Self {
            beta,
            tau,
            ..Self::default()
        };
        p.validate()?;
        Ok(p)
    }

    #[inline]
    pub fn nu(&self) -> f64 {
        2.0 * self.tau / self.beta
    }

    /// Common prefactor `1 / (β(1 + ν²))`.
    #[inline]
    fn amplitude(&self) -> f64 {
        let nu = self.nu();
        1.0 / (self.beta * (1.0 + nu * nu))
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("beta", self.beta),
            ("tau", self.tau),
            ("l_scale", self.l_scale),
            ("L", self.half_length),
            ("activity", self.activity),
            ("gamma", self.gamma),
            ("d", self.cutoff),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::invalid(name, format!("{v} is not finite")));
            }
        }
        if self.beta <= 0.0 {
            return Err(Error::invalid("beta", "must be > 0"));
        }
        if self.half_length <= 0.0 {
            return Err(Error::invalid("L", "must be > 0"));
        }
        if self.cutoff <= 0.0 {
            return Err(Error::invalid("d", "must be > 0"));
        }
        Ok(())
    }
}

#[inline]
pub fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

/// `ln cosh x` without overflow for large `|x|`.
#[inline]
pub fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Curvature soliton `κ(s, t) = 4β sech(2β(s − 2τt))`.
pub fn curvature(params: &SolitonParams, s: f64, t: f64) -> f64 {
    let beta = params.beta;
    4.0 * beta * sech(2.0 * beta * (s - 2.0 * params.tau * t))
}

/// Hasimoto wave function `ψ = κ exp(i ∫₀ˢ τ ds')` for constant torsion.
pub fn hasimoto_psi(params: &SolitonParams, s: f64, t: f64) -> Complex64 {
    Complex64::from_polar(curvature(params, s, t), params.tau * s)
}

/// Hasimoto wave function for a torsion profile `τ(s)`; the phase integral
/// is evaluated by adaptive quadrature.
pub fn hasimoto_psi_with_torsion<F>(kappa: f64, torsion: F, s: f64) -> Complex64
where
    F: Fn(f64) -> f64,
{
    let phase = adaptive_simpson(torsion, 0.0, s, 1e-13);
    Complex64::from_polar(kappa, phase)
}

/// Choice components along the price, goods and capital axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChoiceComponents {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl ChoiceComponents {
    pub fn as_array(&self) -> [f64; 3] {
        [self.c1, self.c2, self.c3]
    }
}

/// Closed-form choice curve `C_h(s, t)`.
///
/// ```text
/// c1 = 1/(β(1+ν²)) · (sin νx / ch x + sin νy / ch y)
/// c2 = l/(β(1+ν²)) · (cos νx / ch x − cos νy / ch y)
/// c3 = s − l/(β(1+ν²)) · (th x + th y)
/// ```
pub fn choice_components(params: &SolitonParams, s: f64, t: f64) -> ChoiceComponents {
    let beta = params.beta;
    let tau = params.tau;
    let nu = params.nu();
    let k = params.amplitude();
    let l = params.l_scale;
    let x = 2.0 * beta * (s - 2.0 * tau * t);
    let y = 4.0 * beta * tau * t;
    let (sx, cx) = (nu * x).sin_cos();
    let (sy, cy) = (nu * y).sin_cos();
    let hx = sech(x);
    let hy = sech(y);
    ChoiceComponents {
        c1: k * (sx * hx + sy * hy),
        c2: l * k * (cx * hx - cy * hy),
        c3: s - l * k * (x.tanh() + y.tanh()),
    }
}

/// Choice value in the (P, Q) plane, `sqrt(c1² + c2²)`.
pub fn choice_magnitude_pq(params: &SolitonParams, s: f64, t: f64) -> f64 {
    let c = choice_components(params, s, t);
    c.c1.hypot(c.c2)
}

/// Berry-phase, non-price competition and profit components along the
/// capital axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedFields {
    pub theta3: f64,
    pub c3: f64,
    pub p3: f64,
}

/// Derived-field equations at arclength `S`, time `t` and transverse
/// position `(x1, x2)`.
///
/// Fails with [`Error::ZeroRadius`] on the capital axis, where the profit
/// component divides by `r² = x1² + x2²`.
pub fn derived_fields(params: &SolitonParams, arc: f64, t: f64, x1: f64, x2: f64) -> Result<DerivedFields> {
    let r2 = x1 * x1 + x2 * x2;
    if r2 == 0.0 {
        return Err(Error::ZeroRadius);
    }
    let r = r2.sqrt();
    let beta = params.beta;
    let tau = params.tau;
    let big_l = params.half_length;
    let nu = params.nu();
    let denom = 1.0 + nu * nu;

    let big_x = 2.0 * beta * (arc + tau * r * t / (4.0 * PI * big_l));
    let big_y = beta * tau * t / (2.0 * PI * big_l);
    let hx = sech(big_x);
    let hy = sech(big_y);

    Ok(DerivedFields {
        theta3: (ln_cosh(big_x) - ln_cosh(big_y)) / (beta * denom),
        c3: beta * params.activity / denom * (hy * hy - hx * hx),
        p3: 2.0 * beta * tau / denom * (big_x * t / r2) * hy * hy,
    })
}

/// Radius of the demand circle, `R = a · arcsech(|C_h|)`.
pub fn demand_radius(ch_mag: f64, a: f64) -> Result<f64> {
    if !(ch_mag > 0.0 && ch_mag <= 1.0) {
        return Err(Error::OutOfDomain(ch_mag));
    }
    Ok(a * (1.0 / ch_mag).acosh())
}

/// One sample of the demand-circle family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemandSample {
    pub p: f64,
    pub q: f64,
    /// `|C_h^(P,Q)| ≈ sech(√(P²+Q²)/a)`.
    pub ch: f64,
    /// Radius of the circle `P² + Q² = R²` through this state.
    pub radius: f64,
}

/// Choice magnitude of the demand law at `(p, q)`.
pub fn demand_choice(p: f64, q: f64, a: f64) -> f64 {
    sech(p.hypot(q) / a)
}

/// Samples the demand law on a `n × n` grid over `[0, p_max] × [0, q_max]`,
/// `Q` outer and `P` inner.
pub fn demand_curve_family(a: f64, p_max: f64, q_max: f64, n: usize) -> Result<Vec<DemandSample>> {
    if n < 2 {
        return Err(Error::invalid("demand_n", "need at least 2 samples per axis"));
    }
    if !(a > 0.0) {
        return Err(Error::invalid("demand_a", "must be > 0"));
    }
    let step = |max: f64, i: usize| max * i as f64 / (n - 1) as f64;
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        let q = step(q_max, j);
        for i in 0..n {
            let p = step(p_max, i);
            let ch = demand_choice(p, q, a);
            out.push(DemandSample {
                p,
                q,
                ch,
                radius: demand_radius(ch, a)?,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> SolitonParams {
        SolitonParams::default()
    }

    #[test]
    fn nu_tracks_beta_and_tau() {
        let mut p = base();
        assert_eq!(p.nu(), 1.0);
        p.beta = 1.0;
        assert_eq!(p.nu(), 0.5);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(SolitonParams::new(0.0, 0.25).is_err());
        assert!(SolitonParams::new(-1.0, 0.25).is_err());
        assert!(SolitonParams::new(f64::NAN, 0.25).is_err());
        let p = SolitonParams { cutoff: 0.0, ..base() };
        assert!(p.validate().is_err());
        let p = SolitonParams {
            half_length: -2.0,
            ..base()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn curvature_peak_is_four_beta() {
        assert_eq!(curvature(&base(), 0.5, 1.0), 2.0);
    }

    #[test]
    fn curvature_spot_value() {
        // 2 sech(1), mpmath at 40 digits
        let v = curvature(&base(), 1.0, 0.0);
        assert!((v - 1.296_108_547_327_770_8).abs() < 1e-14);
    }

    #[test]
    fn curvature_decays_and_is_symmetric() {
        let p = base();
        assert!(curvature(&p, 1e4, 0.0) < 1e-300);
        assert!(curvature(&p, -1e4, 0.0) < 1e-300);
        for d in [0.1, 0.7, 3.0] {
            let a = curvature(&p, 0.5 + d, 1.0);
            let b = curvature(&p, 0.5 - d, 1.0);
            assert!((a - b).abs() < 1e-15);
            assert!(a > 0.0);
        }
    }

    #[test]
    fn psi_has_zero_phase_without_torsion() {
        let p = SolitonParams { tau: 0.0, ..base() };
        let psi = hasimoto_psi(&p, 1.3, 0.4);
        assert_eq!(psi.im, 0.0);
        assert!((psi.re - curvature(&p, 1.3, 0.4)).abs() < 1e-15);
    }

    #[test]
    fn psi_phase_is_tau_s() {
        let p = base();
        let s = 2.0;
        let psi = hasimoto_psi(&p, s, 0.3);
        assert!((psi.arg() - p.tau * s).abs() < 1e-12);
        let q = hasimoto_psi_with_torsion(curvature(&p, s, 0.3), |_| p.tau, s);
        assert!((q - psi).norm() < 1e-12);
    }

    #[test]
    fn psi_with_piecewise_torsion() {
        let tau = |s: f64| if s < 1.0 { 0.2 } else { 0.6 };
        let psi = hasimoto_psi_with_torsion(1.5, tau, 2.0);
        assert!((psi.norm() - 1.5).abs() < 1e-14);
        assert!((psi.arg() - 0.8).abs() < 1e-10);
    }

    #[test]
    fn components_vanish_at_origin() {
        let c = choice_components(&base(), 0.0, 0.0);
        assert_eq!(c.as_array(), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn components_spot_value() {
        // mpmath at x = 1, y = 0, ν = 1, l = 1
        let c = choice_components(&base(), 1.0, 0.0);
        assert!((c.c1 - 0.545_318_867_868_915_7).abs() < 1e-14);
        assert!((c.c2 + 0.649_854_781_611_700_3).abs() < 1e-14);
        assert!((c.c3 - 0.238_405_844_044_235_1).abs() < 1e-14);
    }

    #[test]
    fn c3_asymptote() {
        let p = SolitonParams { l_scale: 1.7, ..base() };
        let t = 0.8;
        let y = 4.0 * p.beta * p.tau * t;
        let s = 60.0;
        let nu = p.nu();
        let expected = s - p.l_scale / (p.beta * (1.0 + nu * nu)) * (1.0 + y.tanh());
        assert!((choice_components(&p, s, t).c3 - expected).abs() < 1e-12);
    }

    #[test]
    fn magnitude_spot_value() {
        let m = choice_magnitude_pq(&base(), 1.0, 1.0);
        assert!((m - 0.850_327_242_183_461_8).abs() < 1e-14);
        assert_eq!(choice_magnitude_pq(&base(), 0.0, 0.0), 0.0);
    }

    #[test]
    fn derived_fields_at_origin_time() {
        let d = derived_fields(&base(), 0.0, 0.0, 0.3, -1.2).unwrap();
        assert_eq!(d.theta3, 0.0);
        assert_eq!(d.p3, 0.0);
        assert_eq!(d.c3, 0.0);
    }

    #[test]
    fn derived_c3_at_t0_is_tanh_squared() {
        let p = base();
        for arc in [-2.0, 0.4, 1.0, 3.5] {
            let d = derived_fields(&p, arc, 0.0, 1.0, 0.0).unwrap();
            let nu = p.nu();
            let expected = p.beta * p.activity / (1.0 + nu * nu) * (2.0 * p.beta * arc).tanh().powi(2);
            assert!((d.c3 - expected).abs() < 1e-15);
            assert!(d.c3 >= 0.0);
            assert_eq!(d.p3, 0.0);
        }
    }

    #[test]
    fn derived_fields_spot_value() {
        // mpmath: S = t = x1 = x2 = 1, β = 0.5, τ = 0.25, L = 5, A = 1
        let d = derived_fields(&base(), 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!((d.theta3 - 0.438_065_017_394_021_2).abs() < 1e-14);
        assert!((d.c3 - 0.145_899_885_894_215_7).abs() < 1e-14);
        assert!((d.p3 - 0.062_850_691_039_121_63).abs() < 1e-14);
    }

    #[test]
    fn derived_fields_reject_capital_axis() {
        assert!(matches!(
            derived_fields(&base(), 1.0, 1.0, 0.0, 0.0),
            Err(Error::ZeroRadius)
        ));
    }

    #[test]
    fn ln_cosh_is_overflow_safe() {
        assert!((ln_cosh(800.0) - (800.0 - std::f64::consts::LN_2)).abs() < 1e-12);
        assert!((ln_cosh(1.5) - 1.5f64.cosh().ln()).abs() < 1e-15);
        assert_eq!(ln_cosh(0.0), 0.0);
        let d = derived_fields(&base(), 2000.0, 0.0, 1.0, 0.0).unwrap();
        assert!(d.theta3.is_finite());
    }

    #[test]
    fn demand_radius_values() {
        assert_eq!(demand_radius(1.0, DEMAND_SCALE).unwrap(), 0.0);
        let r = demand_radius(sech(1.0), DEMAND_SCALE).unwrap();
        assert!((r - 157.913_670_417_429_74).abs() < 1e-9);
        assert!(demand_radius(1e-300, DEMAND_SCALE).unwrap() > 1e5);
    }

    #[test]
    fn demand_radius_domain() {
        for bad in [0.0, -0.1, 1.0 + 1e-12, f64::NAN] {
            assert!(matches!(demand_radius(bad, DEMAND_SCALE), Err(Error::OutOfDomain(_))));
        }
    }

    #[test]
    fn demand_family_corner_and_spot() {
        let fam = demand_curve_family(DEMAND_SCALE, 1.5, 1.5, 4).unwrap();
        assert_eq!(fam.len(), 16);
        assert_eq!(fam[0].ch, 1.0);
        assert_eq!(fam[0].radius, 0.0);
        let last_p = fam[3];
        assert_eq!((last_p.p, last_p.q), (1.5, 0.0));
        assert!((last_p.ch - 0.999_954_887_516_182).abs() < 1e-15);
    }

    #[test]
    fn demand_family_radial_symmetry() {
        let fam = demand_curve_family(DEMAND_SCALE, 1.5, 1.5, 7).unwrap();
        for a in &fam {
            let mirror = fam.iter().find(|b| b.p == a.q && b.q == a.p).unwrap();
            assert_eq!(a.ch, mirror.ch);
            assert_eq!(a.radius, mirror.radius);
        }
    }
}
