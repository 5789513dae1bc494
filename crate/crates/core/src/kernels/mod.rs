//! Scale-decomposed covariance kernels and the second/third order coefficients.

pub mod cutoff;
pub mod quad;
pub mod wick;

use std::f64::consts::PI;

use serde::Serialize;
use statrs::function::gamma::gamma;

pub use cutoff::{BumpShape, CutoffProfile};
use quad::{integrate, QuadOpts};

use crate::error::{Error, Result};

pub fn kappa_eps(eps: f64) -> Result<f64> {
    if !(0.0..3.0).contains(&eps) {
        return Err(Error::Domain(format!("eps = {eps} outside [0, 3)")));
    }
    Ok(PI.powf(-1.5) * 2f64.powf(-(3.0 + eps) / 2.0) * gamma((3.0 - eps) / 4.0) / gamma((3.0 + eps) / 4.0))
}

/// Returns the base bump and the normalized self-convolution u0.
///
/// u0 is scaled so that int_0^oo dl/l l^(-3/2) u0(x/l) = kappa_0 |x|^(-3/2) holds exactly,
/// i.e. int_0^1 t^(1/2) u0(t) dt = kappa_0.
pub fn build_cutoff() -> Result<(CutoffProfile, CutoffProfile)> {
    build_cutoff_with(BumpShape::Standard)
}

pub fn build_cutoff_with(shape: BumpShape) -> Result<(CutoffProfile, CutoffProfile)> {
    let bump = cutoff::base_bump(shape);
    let conv = cutoff::self_convolution(shape)?;
    let m = conv.radial_moment(0.5)?;
    Ok((bump, conv.scaled(kappa_eps(0.0)? / m)))
}

pub fn lambda_eps(u0: &CutoffProfile, eps: f64) -> Result<f64> {
    let m = u0.radial_moment((1.0 - eps) / 2.0)?;
    if !(m > 0.0) {
        return Err(Error::Numerical("vanishing Riesz moment of u0".into()));
    }
    Ok(kappa_eps(eps)? / m)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CoefficientRow {
    pub l: u32,
    pub eps: f64,
    pub a: f64,
    pub b: f64,
    pub c0: f64,
    pub gamma0: f64,
}

/// All radial kernels at fixed (L, eps). Immutable once built.
#[derive(Debug, Clone)]
pub struct KernelSet {
    pub l: u32,
    pub eps: f64,
    pub kappa: f64,
    pub lambda: f64,
    /// decay exponent (3 - eps)/2 of the covariance, i.e. twice the field dimension
    pub alpha: f64,
    pub c0: f64,
    pub gamma0: f64,
    pub a_coeff: f64,
    pub b_coeff: f64,
    u: CutoffProfile,
    opts: QuadOpts,
}

impl KernelSet {
    pub fn new(l: u32, eps: f64) -> Result<Self> {
        let (_, u0) = build_cutoff()?;
        Self::from_u0(l, eps, &u0)
    }

    pub fn with_shape(l: u32, eps: f64, shape: BumpShape) -> Result<Self> {
        let (_, u0) = build_cutoff_with(shape)?;
        Self::from_u0(l, eps, &u0)
    }

    pub fn from_u0(l: u32, eps: f64, u0: &CutoffProfile) -> Result<Self> {
        if l < 2 {
            return Err(Error::Domain(format!("L = {l} must be at least 2")));
        }
        if !(0.0..1.0).contains(&eps) {
            return Err(Error::Domain(format!("eps = {eps} outside [0, 1)")));
        }
        let kappa = kappa_eps(eps)?;
        let lambda = lambda_eps(u0, eps)?;
        let u = u0.scaled(lambda);
        let alpha = (3.0 - eps) / 2.0;
        let mut ks = KernelSet {
            l,
            eps,
            kappa,
            lambda,
            alpha,
            c0: u.value(0.0) / alpha,
            gamma0: 0.0,
            a_coeff: 0.0,
            b_coeff: 0.0,
            u,
            opts: QuadOpts::default(),
        };
        ks.gamma0 = ks.fluctuation(0.0)?;
        ks.a_coeff = 36.0 * ks.v_integral(2)?;
        ks.b_coeff = 48.0 * ks.v_integral(3)?;
        if !(ks.a_coeff > 0.0) {
            return Err(Error::Numerical(format!("a = {} is not positive", ks.a_coeff)));
        }
        Ok(ks)
    }

    pub fn phi_dim(&self) -> f64 {
        self.alpha / 2.0
    }

    pub fn u_eps(&self, r: f64) -> f64 {
        self.u.value(r)
    }

    /// kappa_eps r^(-alpha), the covariance without cutoff.
    pub fn free_covariance(&self, r: f64) -> f64 {
        self.kappa * r.powf(-self.alpha)
    }

    /// C(r) = int_1^oo dl/l l^(-alpha) u(r/l) = r^(-alpha) int_0^min(r,1) t^(alpha-1) u(t) dt.
    pub fn covariance(&self, r: f64) -> Result<f64> {
        if r < 0.0 {
            return Err(Error::Domain(format!("negative radius {r}")));
        }
        if r == 0.0 {
            return Ok(self.c0);
        }
        if r >= 1.0 {
            // u has support in the unit ball, so the whole Riesz mass is inside
            return Ok(self.free_covariance(r));
        }
        // t = r s keeps the integral of order one for small r
        let e = self.alpha - 1.0;
        let mut pts = vec![0.0];
        pts.extend([0.25, 0.5, 0.75].iter().map(|b| b / r).filter(|s| *s < 1.0));
        pts.push(1.0);
        let m = integrate(|s| s.powf(e) * self.u.value(r * s), &pts, self.opts)?;
        Ok(m.value)
    }

    /// C_L(r) = L^alpha C(L r)
    pub fn scaled_covariance(&self, r: f64) -> Result<f64> {
        let l = self.l as f64;
        Ok(l.powf(self.alpha) * self.covariance(l * r)?)
    }

    /// Gamma(r) = int_1^L dl/l l^(-alpha) u(r/l), evaluated directly in the scale variable.
    pub fn fluctuation(&self, r: f64) -> Result<f64> {
        if r < 0.0 {
            return Err(Error::Domain(format!("negative radius {r}")));
        }
        let l = self.l as f64;
        if r >= l {
            return Ok(0.0);
        }
        let lo = r.max(1.0);
        let pts = [lo, (2.0 * r).clamp(lo, l), (4.0 * r).clamp(lo, l), l];
        let m = integrate(|s: f64| s.powf(-self.alpha - 1.0) * self.u.value(r / s), &pts, self.opts)?;
        Ok(m.value)
    }

    /// Relative defect of the scale integral over (0, oo) against kappa_eps r^(-alpha).
    pub fn riesz_check(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain("riesz check needs r > 0".into()));
        }
        // l = e^x; the integrand vanishes for l < r
        let x0 = r.ln();
        let x1 = x0 + 45.0 / self.alpha;
        let pts: Vec<f64> = (0..=12).map(|i| x0 + (x1 - x0) * i as f64 / 12.0).collect();
        let full = integrate(|x: f64| (-self.alpha * x).exp() * self.u.value(r * (-x).exp()), &pts, self.opts)?;
        let exact = self.free_covariance(r);
        Ok((full.value - exact).abs() / exact)
    }

    /// C(r) - Gamma(r) - L^(-alpha) C(r/L); zero by the substitution l -> L l.
    pub fn decomposition_defect(&self, r: f64) -> Result<f64> {
        let l = self.l as f64;
        Ok(self.covariance(r)? - self.fluctuation(r)? - l.powf(-self.alpha) * self.covariance(r / l)?)
    }

    /// v^(p)(r) = C_L(r)^p - C(r)^p
    pub fn v(&self, p: i32, r: f64) -> Result<f64> {
        if !(1..=4).contains(&p) {
            return Err(Error::Domain(format!("v kernel defined for p in 1..=4, got {p}")));
        }
        Ok(self.scaled_covariance(r)?.powi(p) - self.covariance(r)?.powi(p))
    }

    /// w^(p)(r) = C~(r)^p - C(r)^p
    pub fn w(&self, p: i32, r: f64) -> Result<f64> {
        if !(1..=3).contains(&p) {
            return Err(Error::Domain(format!("w kernel defined for p in 1..=3, got {p}")));
        }
        if !(r > 0.0) {
            return Err(Error::Domain("w kernel is defined away from the origin".into()));
        }
        Ok(self.free_covariance(r).powi(p) - self.covariance(r)?.powi(p))
    }

    /// int d^3x v^(p)(x); v vanishes identically for r >= 1.
    fn v_integral(&self, p: i32) -> Result<f64> {
        let l = self.l as f64;
        let pts = [0.0, 0.25 / l, 0.5 / l, 1.0 / l, 0.25, 0.5, 1.0];
        let r = integrate(|r| r * r * self.v(p, r).unwrap_or(f64::NAN), &pts, self.opts)?;
        Ok(4.0 * PI * r.value)
    }

    pub fn row(&self) -> CoefficientRow {
        CoefficientRow { l: self.l, eps: self.eps, a: self.a_coeff, b: self.b_coeff, c0: self.c0, gamma0: self.gamma0 }
    }
}

/// Limit of the second order coefficient as eps -> 0, for the canonically normalized covariance.
pub fn a_marginal(l: u32) -> f64 {
    36.0 * 4.0 * PI * kappa_eps(0.0).unwrap().powi(2) * (l as f64).ln()
}

/// The closed form log L / (18 pi^2) quoted for the eps -> 0 limit of a.
pub fn a_marginal_quoted(l: u32) -> f64 {
    (l as f64).ln() / (18.0 * PI * PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn riesz_constant_at_zero() {
        assert!((kappa_eps(0.0).unwrap() - (2.0 * PI).powf(-1.5)).abs() < 1e-15);
        assert!(kappa_eps(-0.1).is_err());
    }

    #[test]
    fn lambda_tends_to_one() {
        let (_, u0) = build_cutoff().unwrap();
        assert!((lambda_eps(&u0, 0.0).unwrap() - 1.0).abs() < 1e-8);
        let l1 = lambda_eps(&u0, 0.1).unwrap();
        let l2 = lambda_eps(&u0, 0.01).unwrap();
        assert!(l1 > 0.9 && l1 < 1.1);
        assert!((l2 - 1.0).abs() < (l1 - 1.0).abs());
    }

    #[test]
    fn supports_are_exact() {
        let ks = KernelSet::new(2, 0.1).unwrap();
        for r in [2.0, 2.5, 10.0] {
            assert_eq!(ks.fluctuation(r).unwrap(), 0.0);
        }
        for r in [1.0, 1.3, 4.0] {
            for p in 1..=3 {
                assert_eq!(ks.w(p, r).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn scale_decomposition() {
        let ks = KernelSet::new(3, 0.05).unwrap();
        for r in [0.05, 0.3, 0.9, 1.7, 2.9] {
            assert!(ks.decomposition_defect(r).unwrap().abs() < 1e-8);
        }
    }

    #[test]
    fn w_kernel_below_free_power() {
        let ks = KernelSet::new(2, 0.1).unwrap();
        for r in [0.05f64, 0.2, 0.6, 0.95] {
            for p in 1..=3 {
                let bound = ks.kappa.powi(p) * r.powf(-(p as f64) * ks.alpha);
                let w = ks.w(p, r).unwrap();
                assert!(w >= 0.0 && w <= bound, "p={p} r={r}");
            }
        }
    }

    #[test]
    fn coefficients_are_positive_and_c0_is_the_limit() {
        let ks = KernelSet::new(2, 0.05).unwrap();
        assert!(ks.a_coeff > 0.0 && ks.b_coeff > 0.0);
        assert!((ks.covariance(1e-7).unwrap() - ks.c0).abs() < 1e-6 * ks.c0);
        assert!(ks.v(5, 0.5).is_err() && ks.w(0, 0.5).is_err() && ks.covariance(-1.0).is_err());
    }

    #[test]
    fn marginal_limit_is_approached() {
        let a = KernelSet::new(2, 1e-3).unwrap().a_coeff;
        assert!((a - a_marginal(2)).abs() < 0.01 * a_marginal(2));
    }
}
