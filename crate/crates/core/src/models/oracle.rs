//! Exactly solvable two-coupling flow dg/dt = alpha g - beta g^2, dmu/dt = gamma mu - delta g^2,
//! whose connecting orbit is an incomplete beta function.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

const TERM_CAP: usize = 200_000;

/// Gauss series sum_k (a)_k (b)_k / ((c)_k k!) s^k to relative 1e-12, stopped on a geometric
/// majorant of the tail.
pub fn hyper_2f1(a: f64, b: f64, c: f64, s: f64) -> Result<f64> {
    if !(s.abs() < 1.0) {
        return Err(Error::Domain(format!("series needs |s| < 1, got {s}")));
    }
    if c <= 0.0 && c == c.round() {
        return Err(Error::Domain(format!("c = {c} is a nonpositive integer")));
    }
    let settle = 2.0 * a.abs().max(b.abs()).max(c.abs()) + 2.0;
    let mut sum = 1.0;
    let mut term = 1.0;
    for k in 0..TERM_CAP {
        let kf = k as f64;
        let ratio = (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * s;
        term *= ratio;
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        if kf > settle {
            let rho = ratio.abs().max(s.abs());
            if rho < 1.0 && term.abs() * rho / (1.0 - rho) <= 1e-13 * sum.abs() {
                return Ok(sum);
            }
        }
    }
    Err(Error::Numerical(format!("2F1({a}, {b}; {c}; {s}) did not converge in {TERM_CAP} terms")))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ToyFlowParams {
    pub alpha: f64,
    pub beta_c: f64,
    pub gamma_c: f64,
    pub delta_c: f64,
}

impl ToyFlowParams {
    pub fn new(alpha: f64, beta_c: f64, gamma_c: f64, delta_c: f64) -> Result<Self> {
        if [alpha, beta_c, gamma_c, delta_c].iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            return Err(Error::Domain("flow coefficients must be positive and finite".into()));
        }
        let tf = ToyFlowParams { alpha, beta_c, gamma_c, delta_c };
        check_nu(tf.nu())?;
        if tf.nu() <= 2.0 {
            return Err(Error::Domain(format!("nu = {} must exceed 2", tf.nu())));
        }
        Ok(tf)
    }

    /// unit alpha, beta, delta and gamma = nu
    pub fn with_nu(nu: f64) -> Result<Self> {
        Self::new(1.0, 1.0, nu, 1.0)
    }

    pub fn nu(&self) -> f64 {
        self.gamma_c / self.alpha
    }

    /// s = beta g / alpha
    pub fn rescale_coupling(&self, g: f64) -> f64 {
        self.beta_c * g / self.alpha
    }

    /// mu = mass_unit * m(s)
    pub fn mass_unit(&self) -> f64 {
        self.delta_c * self.alpha / (self.beta_c * self.beta_c)
    }
}

fn check_nu(nu: f64) -> Result<()> {
    if nu == nu.round() {
        return Err(Error::Domain(format!("nu = {nu} is an integer; the orbit formula holds only for non-integer nu")));
    }
    Ok(())
}

/// s^nu pi (nu-1)/sin(pi (nu-1)) + s^2/(nu-2) 2F1(1-nu, 2-nu; 3-nu; s). This is (1-s)^nu m(s),
/// m the rescaled mass on the connecting orbit.
pub fn orbit_function(s: f64, nu: f64) -> Result<f64> {
    check_nu(nu)?;
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!("s = {s} outside (0, 1)")));
    }
    let x = PI * (nu - 1.0);
    Ok(s.powf(nu) * x / x.sin() + s * s / (nu - 2.0) * hyper_2f1(1.0 - nu, 2.0 - nu, 3.0 - nu, s)?)
}

pub fn toy_orbit_mu(s: f64, tf: &ToyFlowParams) -> Result<f64> {
    orbit_function(s, tf.nu())
}

/// Mass coupling on the connecting orbit at coupling g, in the original variables.
pub fn orbit_mass(g: f64, tf: &ToyFlowParams) -> Result<f64> {
    let s = tf.rescale_coupling(g);
    Ok(tf.mass_unit() * toy_orbit_mu(s, tf)? / (1.0 - s).powf(tf.nu()))
}

/// Rescaled mass near the infrared end, m(s) = s^nu / nu 2F1(nu-1, nu; nu+1; 1-s).
pub fn infrared_mass(s: f64, nu: f64) -> Result<f64> {
    check_nu(nu)?;
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!("s = {s} outside (0, 1)")));
    }
    Ok(s.powf(nu) / nu * hyper_2f1(nu - 1.0, nu, nu + 1.0, 1.0 - s)?)
}

/// RK4 integration of dm/ds = (nu m - s^2)/(s(1-s)) in the logit variable x = log(s/(1-s)),
/// where it reads dm/dx = nu m - s^2, from `s_start` near 1 down to each requested point.
/// Returns (1-s)^nu m(s) at `targets`, which must be decreasing and below `s_start`.
pub fn rk4_orbit(nu: f64, s_start: f64, targets: &[f64], h: f64) -> Result<Vec<f64>> {
    check_nu(nu)?;
    if targets.windows(2).any(|w| w[1] >= w[0]) || targets.first().is_some_and(|t| *t >= s_start) {
        return Err(Error::Usage("targets must decrease from below the starting point".into()));
    }
    let logit = |s: f64| (s / (1.0 - s)).ln();
    let sig = |x: f64| 1.0 / (1.0 + (-x).exp());
    let rhs = |x: f64, m: f64| nu * m - sig(x).powi(2);
    let mut x = logit(s_start);
    let mut m = infrared_mass(s_start, nu)?;
    let mut out = Vec::with_capacity(targets.len());
    for t in targets {
        if !(*t > 0.0) {
            return Err(Error::Domain(format!("target s = {t} must be positive")));
        }
        let xt = logit(*t);
        let steps = ((x - xt) / h).ceil().max(1.0) as usize;
        let dx = -(x - xt) / steps as f64;
        for _ in 0..steps {
            let k1 = rhs(x, m);
            let k2 = rhs(x + 0.5 * dx, m + 0.5 * dx * k1);
            let k3 = rhs(x + 0.5 * dx, m + 0.5 * dx * k2);
            let k4 = rhs(x + dx, m + dx * k3);
            m += dx / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            x += dx;
        }
        out.push((1.0 - t).powf(nu) * m);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleRow {
    pub s: f64,
    pub formula: f64,
    pub rk4: f64,
    pub rel_diff: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub nu: f64,
    pub s_start: f64,
    pub step: f64,
    pub max_rel_diff: f64,
    pub rows: Vec<OracleRow>,
}

/// Formula against RK4 on `points` equally spaced s in [s_min, s_max].
pub fn oracle_comparison(nu: f64, s_min: f64, s_max: f64, points: usize) -> Result<OracleReport> {
    check_nu(nu)?;
    if !(0.0 < s_min && s_min < s_max && s_max < 0.99) || points < 2 {
        return Err(Error::Usage("need 0 < s_min < s_max < 0.99 and at least two points".into()));
    }
    let (s_start, step) = (0.99, 1e-3);
    let targets: Vec<f64> = (0..points).map(|i| s_max - (s_max - s_min) * i as f64 / (points - 1) as f64).collect();
    let rk = rk4_orbit(nu, s_start, &targets, step)?;
    let mut rows = Vec::with_capacity(points);
    for (s, r) in targets.iter().zip(rk) {
        let f = orbit_function(*s, nu)?;
        rows.push(OracleRow { s: *s, formula: f, rk4: r, rel_diff: ((f - r) / f).abs() });
    }
    rows.reverse();
    let max_rel_diff = rows.iter().map(|r| r.rel_diff).fold(0.0, f64::max);
    Ok(OracleReport { nu, s_start, step, max_rel_diff, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_at_origin_and_log_identity() {
        assert_eq!(hyper_2f1(0.3, 1.7, 2.4, 0.0).unwrap(), 1.0);
        let s = 0.5f64;
        let want = -(1.0 - s).ln() / s;
        assert!((hyper_2f1(1.0, 1.0, 2.0, s).unwrap() - want).abs() < 1e-13 * want);
    }

    #[test]
    fn terminating_series_is_a_polynomial() {
        // 2F1(-2, b; c; s) = 1 - 2 b s / c + b (b+1) s^2 / (c (c+1))
        let (b, c, s) = (0.7, 1.3, 0.4);
        let want = 1.0 - 2.0 * b * s / c + b * (b + 1.0) * s * s / (c * (c + 1.0));
        assert!((hyper_2f1(-2.0, b, c, s).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(hyper_2f1(1.0, 1.0, -2.0, 0.5), Err(Error::Domain(_))));
        assert!(matches!(hyper_2f1(1.0, 1.0, 2.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(orbit_function(0.5, 3.0), Err(Error::Domain(_))));
        assert!(matches!(ToyFlowParams::with_nu(4.0), Err(Error::Domain(_))));
        assert!(matches!(ToyFlowParams::with_nu(1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn orbit_solves_the_rescaled_equation() {
        let nu = 2.7;
        for s in [0.1, 0.4, 0.7] {
            let m = |s: f64| orbit_function(s, nu).unwrap() / (1.0 - s).powf(nu);
            let h = 1e-5;
            let dm = (m(s + h) - m(s - h)) / (2.0 * h);
            let rhs = (nu * m(s) - s * s) / (s * (1.0 - s));
            assert!((dm - rhs).abs() < 1e-7 * rhs.abs(), "s = {s}: {dm} vs {rhs}");
        }
    }

    #[test]
    fn both_ends_describe_the_same_orbit() {
        let nu = 2.7;
        for s in [0.3, 0.5, 0.6] {
            let a = orbit_function(s, nu).unwrap();
            let b = (1.0 - s).powf(nu) * infrared_mass(s, nu).unwrap();
            assert!((a - b).abs() < 1e-11 * a.abs());
        }
    }
}
