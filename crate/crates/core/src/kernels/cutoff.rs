use std::f64::consts::PI;

use super::quad::{integrate, ChebTable, QuadOpts};
use crate::error::{Error, Result};

/// Transition profile of the base bump between radius 1/4 and 1/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum BumpShape {
    /// built from t -> exp(-1/t)
    Standard,
    /// built from t -> exp(-1/t^2), a second admissible choice
    Steep,
}

fn flat(shape: BumpShape, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    match shape {
        BumpShape::Standard => (-1.0 / t).exp(),
        BumpShape::Steep => (-1.0 / (t * t)).exp(),
    }
}

fn smooth_step(shape: BumpShape, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let p = flat(shape, x);
        p / (p + flat(shape, 1.0 - x))
    }
}

/// The base bump: 1 on r <= 1/4, 0 on r >= 1/2, smooth and radial.
pub fn bump(shape: BumpShape, r: f64) -> f64 {
    1.0 - smooth_step(shape, 4.0 * r - 1.0)
}

#[derive(Debug, Clone)]
enum Profile {
    Bump(BumpShape),
    Table(ChebTable),
}

/// A nonnegative radial function with compact support.
#[derive(Debug, Clone)]
pub struct CutoffProfile {
    profile: Profile,
    scale: f64,
    pub support_radius: f64,
    pub closed_form: bool,
}

impl CutoffProfile {
    pub fn value(&self, r: f64) -> f64 {
        let r = r.abs();
        if r >= self.support_radius {
            return 0.0;
        }
        let v = match &self.profile {
            Profile::Bump(s) => bump(*s, r),
            Profile::Table(t) => t.eval(r),
        };
        self.scale * v.max(0.0)
    }

    /// Same profile multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> CutoffProfile {
        let mut c = self.clone();
        c.scale *= factor;
        c
    }

    /// Radial moment int_0^R t^power f(t) dt.
    pub fn radial_moment(&self, power: f64) -> Result<f64> {
        let pts = [0.0, 0.25, 0.5, 0.75, self.support_radius];
        let pts: Vec<f64> = pts.into_iter().filter(|&x| x <= self.support_radius).collect();
        Ok(integrate(|t| t.powf(power) * self.value(t), &pts, QuadOpts::default())?.value)
    }

    /// int d^3z |z|^(-s) f(z)
    pub fn riesz_integral(&self, s: f64) -> Result<f64> {
        Ok(4.0 * PI * self.radial_moment(2.0 - s)?)
    }
}

const PANELS: usize = 64;
const DEG: usize = 16;

/// Radial self-convolution in three dimensions, reduced to a double radial integral:
/// (f*f)(r) = (2 pi / r) int s f(s) int_{|r-s|}^{r+s} t f(t) dt ds.
pub fn self_convolution(shape: BumpShape) -> Result<CutoffProfile> {
    let opts = QuadOpts::default();
    let f = |t: f64| bump(shape, t);
    // P(x) = int_0^x t f(t) dt; exact below 1/4, tabulated across the transition
    let ptab = ChebTable::build(
        |x| Ok(0.03125 + integrate(|t| t * f(t), &[0.25, x], opts)?.value),
        0.25,
        0.5,
        16,
        DEG,
    )?;
    let p_top = 0.03125 + integrate(|t| t * f(t), &[0.25, 0.5], opts)?.value;
    let prim = |x: f64| {
        if x <= 0.25 {
            0.5 * x * x
        } else if x >= 0.5 {
            p_top
        } else {
            ptab.eval(x)
        }
    };
    let at_zero = 4.0 * PI * integrate(|s| s * s * f(s) * f(s), &[0.0, 0.25, 0.5], opts)?.value;
    let conv = |r: f64| -> Result<f64> {
        if r <= 0.0 {
            return Ok(at_zero);
        }
        if r >= 1.0 {
            return Ok(0.0);
        }
        let mut pts = vec![0.0, 0.5, r, r - 0.25, r + 0.25, r - 0.5, 0.25 - r, 0.5 - r];
        pts.retain(|&x| (0.0..=0.5).contains(&x));
        let inner = integrate(|s| s * f(s) * (prim(r + s) - prim((r - s).abs())), &pts, opts)?;
        Ok(2.0 * PI / r * inner.value)
    };
    let table = ChebTable::build(conv, 0.0, 1.0, PANELS, DEG)?;
    if !(table.eval(0.0) > 0.0) {
        return Err(Error::Numerical("self-convolution vanishes at the origin".into()));
    }
    Ok(CutoffProfile { profile: Profile::Table(table), scale: 1.0, support_radius: 1.0, closed_form: false })
}

/// The base bump as a profile.
pub fn base_bump(shape: BumpShape) -> CutoffProfile {
    CutoffProfile { profile: Profile::Bump(shape), scale: 1.0, support_radius: 0.5, closed_form: true }
}
