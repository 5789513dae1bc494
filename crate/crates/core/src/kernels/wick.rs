//! Explicit Wick-ordered polynomials with respect to a covariance with diagonal C0 and
//! off-diagonal Cxy.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WickKind {
    Phi2,
    Phi4,
    BilocalDiff2,
    BilocalSq2,
    BilocalCube3,
}

impl WickKind {
    pub const ALL: [WickKind; 5] =
        [WickKind::Phi2, WickKind::Phi4, WickKind::BilocalDiff2, WickKind::BilocalSq2, WickKind::BilocalCube3];

    pub fn name(self) -> &'static str {
        match self {
            WickKind::Phi2 => "phi2",
            WickKind::Phi4 => "phi4",
            WickKind::BilocalDiff2 => "bilocal_diff2",
            WickKind::BilocalSq2 => "bilocal_sq2",
            WickKind::BilocalCube3 => "bilocal_cube3",
        }
    }
}

impl FromStr for WickKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        WickKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown Wick expression '{s}'")))
    }
}

/// Evaluate the Wick polynomial `kind` at field values (x, y).
/// The local kinds only use x.
pub fn wick_eval(kind: WickKind, x: f64, y: f64, c0: f64, cxy: f64) -> Result<f64> {
    if c0 < cxy.abs() {
        return Err(Error::Domain(format!("need C0 >= |Cxy|, got C0 = {c0}, Cxy = {cxy}")));
    }
    let v = match kind {
        WickKind::Phi2 => x * x - c0,
        WickKind::Phi4 => x.powi(4) - 6.0 * c0 * x * x + 3.0 * c0 * c0,
        WickKind::BilocalDiff2 => (x - y).powi(2) - 2.0 * c0 + 2.0 * cxy,
        WickKind::BilocalSq2 => {
            (x * x - y * y).powi(2) - 4.0 * c0 * (x * x + y * y) + 8.0 * cxy * x * y + 4.0 * c0 * c0
                - 4.0 * cxy * cxy
        }
        WickKind::BilocalCube3 => {
            let (x2, y2) = (x * x, y * y);
            x2 * x * y2 * y - 3.0 * c0 * x * y * (x2 + y2) - 9.0 * cxy * x2 * y2
                + 9.0 * c0 * c0 * x * y
                + 18.0 * cxy * cxy * x * y
                + 9.0 * c0 * cxy * (x2 + y2)
                - 9.0 * c0 * c0 * cxy
                - 6.0 * cxy.powi(3)
        }
    };
    Ok(v)
}

/// Sample mean and its standard error for one Wick expression.
#[derive(Debug, Clone, Serialize)]
pub struct WickSample {
    pub kind: &'static str,
    pub mean: f64,
    pub std_err: f64,
}

/// Monte-Carlo means of every Wick expression under the centred Gaussian pair with
/// covariance [[c0, cxy], [cxy, c0]].
pub fn wick_monte_carlo(c0: f64, cxy: f64, samples: usize, seed: u64) -> Result<Vec<WickSample>> {
    if !(c0 > 0.0 && cxy.abs() <= c0) || samples < 2 {
        return Err(Error::Domain(format!("need c0 > 0, |cxy| <= c0 and two samples (c0 = {c0}, cxy = {cxy})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rho = cxy / c0;
    let sd = c0.sqrt();
    let mut acc = vec![(0.0, 0.0); WickKind::ALL.len()];
    for _ in 0..samples {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let x = sd * z1;
        let y = sd * (rho * z1 + (1.0 - rho * rho).sqrt() * z2);
        for (a, k) in acc.iter_mut().zip(WickKind::ALL) {
            let v = wick_eval(k, x, y, c0, cxy)?;
            a.0 += v;
            a.1 += v * v;
        }
    }
    let n = samples as f64;
    Ok(acc
        .into_iter()
        .zip(WickKind::ALL)
        .map(|((s1, s2), k)| {
            let mean = s1 / n;
            let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0);
            WickSample { kind: k.name(), mean, std_err: (var / n).sqrt() }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_terms() {
        assert_eq!(wick_eval(WickKind::Phi2, 0.0, 0.0, 1.0, 0.0).unwrap(), -1.0);
        assert_eq!(wick_eval(WickKind::Phi4, 0.0, 0.0, 1.0, 0.0).unwrap(), 3.0);
    }

    #[test]
    fn rejects_bad_covariance() {
        assert!(wick_eval(WickKind::Phi2, 0.0, 0.0, 0.5, 0.7).is_err());
        assert!("phi6".parse::<WickKind>().is_err());
    }

    #[test]
    fn coincident_points_reduce_to_local() {
        // :(x-y)^2: vanishes identically at Cxy = C0, x = y
        assert_eq!(wick_eval(WickKind::BilocalDiff2, 0.3, 0.3, 1.0, 1.0).unwrap(), 0.0);
        // :x^3 y^3: at coincident points is :x^6:
        let (x, c) = (0.7f64, 0.4f64);
        let phi6 = x.powi(6) - 15.0 * c * x.powi(4) + 45.0 * c * c * x * x - 15.0 * c.powi(3);
        assert!((wick_eval(WickKind::BilocalCube3, x, x, c, c).unwrap() - phi6).abs() < 1e-14);
    }

    #[test]
    fn monte_carlo_is_seeded_and_centred() {
        let a = wick_monte_carlo(1.0, 0.4, 20_000, 5).unwrap();
        let b = wick_monte_carlo(1.0, 0.4, 20_000, 5).unwrap();
        assert_eq!(a.len(), 5);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.mean, y.mean);
            assert!(x.mean.abs() <= 5.0 * x.std_err, "{}", x.kind);
        }
        assert!(wick_monte_carlo(1.0, 0.4, 1, 0).is_err());
    }
}
