//! The approximate logistic flow x -> L^eps x - L^(2 eps) a x^2 and its two-sided orbit.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FlowParams {
    pub l: u32,
    pub eps: f64,
    pub a: f64,
    pub gbar_star: f64,
}

impl FlowParams {
    pub fn new(l: u32, eps: f64, a: f64) -> Result<Self> {
        if l < 2 {
            return Err(Error::Domain(format!("L = {l} must be at least 2")));
        }
        let le = (l as f64).powf(eps);
        if !(eps > 0.0 && le < 2.0) {
            return Err(Error::Domain(format!("need 1 < L^eps < 2, got L^eps = {le}")));
        }
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Domain(format!("a = {a} must be positive")));
        }
        Ok(FlowParams { l, eps, a, gbar_star: (le - 1.0) / (le * le * a) })
    }

    pub fn l_eps(&self) -> f64 {
        (self.l as f64).powf(self.eps)
    }

    /// L^(2 eps) a, the effective quadratic coefficient.
    pub fn quad(&self) -> f64 {
        let le = self.l_eps();
        le * le * self.a
    }

    /// Relevant multiplier of the mass term, L^((3+eps)/2).
    pub fn mass_multiplier(&self) -> f64 {
        (self.l as f64).powf((3.0 + self.eps) / 2.0)
    }

    fn check(&self, x: f64) -> Result<()> {
        if !(x >= 0.0 && x <= self.gbar_star * (1.0 + 1e-12)) {
            return Err(Error::Domain(format!("x = {x} outside [0, {}]", self.gbar_star)));
        }
        Ok(())
    }

    pub fn f(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(self.f_unchecked(x))
    }

    pub fn f_prime(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(self.f_prime_unchecked(x))
    }

    pub(crate) fn f_unchecked(&self, x: f64) -> f64 {
        x * (self.l_eps() - self.quad() * x)
    }

    pub(crate) fn f_prime_unchecked(&self, x: f64) -> f64 {
        self.l_eps() - 2.0 * self.quad() * x
    }

    /// Smaller root of L^eps x - L^(2eps) a x^2 = y.
    pub fn f_inverse(&self, y: f64) -> Result<f64> {
        self.check(y)?;
        let le = self.l_eps();
        let q = self.quad();
        let disc = le * le - 4.0 * q * y;
        if disc < 0.0 {
            return Err(Error::Domain(format!("negative discriminant {disc} inverting f at {y}")));
        }
        // cancellation-free form of (le - sqrt(disc)) / (2q)
        Ok(2.0 * y / (le + disc.sqrt()))
    }
}

/// The orbit gbar_n on the window [-n_minus, n_plus] with gbar_0 = omega0 * gbar_star.
#[derive(Debug, Clone, Serialize)]
pub struct GbarSequence {
    pub omega0: f64,
    pub n_minus: usize,
    pub n_plus: usize,
    values: Vec<f64>,
    pub fp: FlowParams,
}

impl GbarSequence {
    pub fn build(omega0: f64, n_minus: usize, n_plus: usize, fp: &FlowParams) -> Result<Self> {
        if !(omega0 > 0.0 && omega0 < 1.0) {
            return Err(Error::Domain(format!("omega0 = {omega0} outside (0, 1)")));
        }
        let mut values = vec![0.0; n_minus + n_plus + 1];
        values[n_minus] = omega0 * fp.gbar_star;
        for i in (0..n_minus).rev() {
            let v = fp.f_inverse(values[i + 1])?;
            if !(v > f64::MIN_POSITIVE) {
                return Err(Error::Truncation(format!(
                    "backward orbit underflows at n = -{}; shrink the window",
                    n_minus - i
                )));
            }
            values[i] = v;
        }
        for i in n_minus..n_minus + n_plus {
            values[i + 1] = fp.f(values[i])?;
        }
        Ok(GbarSequence { omega0, n_minus, n_plus, values, fp: *fp })
    }

    /// Symmetric window from the default rule ceil(40 / (eps log L)).
    pub fn build_default(omega0: f64, fp: &FlowParams) -> Result<Self> {
        let n = default_window(fp);
        Self::build(omega0, n, n, fp)
    }

    pub fn lo(&self) -> i64 {
        -(self.n_minus as i64)
    }

    pub fn hi(&self) -> i64 {
        self.n_plus as i64
    }

    pub fn contains(&self, n: i64) -> bool {
        n >= self.lo() && n <= self.hi()
    }

    pub fn get(&self, n: i64) -> f64 {
        self.values[(n - self.lo()) as usize]
    }

    pub fn try_get(&self, n: i64) -> Result<f64> {
        if !self.contains(n) {
            return Err(Error::Domain(format!("n = {n} outside the stored window; use step_bounds")));
        }
        Ok(self.get(n))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> {
        self.lo()..=self.hi()
    }

    pub fn step_bounds(&self, n: i64) -> (f64, f64) {
        step_bounds(n, self.omega0, &self.fp)
    }
}

pub fn default_window(fp: &FlowParams) -> usize {
    (40.0 / (fp.eps * (fp.l as f64).ln())).ceil() as usize
}

/// Two-sided bounds on gbar_n valid for every integer n.
pub fn step_bounds(n: i64, omega0: f64, fp: &FlowParams) -> (f64, f64) {
    let le = fp.l_eps();
    let gs = fp.gbar_star;
    if n >= 0 {
        let k = n as i32;
        let lower = gs * (1.0 - (1.0 - omega0) * (1.0 + omega0 - le * omega0).powi(k));
        let upper = gs * (1.0 - (1.0 - omega0) * (2.0 - le).powi(k));
        (lower, upper)
    } else {
        let root = (le * le - 4.0 * omega0 * (le - 1.0)).sqrt();
        let lower = gs * omega0 * le.powf(n as f64);
        let upper = gs * omega0 * (2.0 / (le + root)).powf(-(n as f64));
        (lower, upper)
    }
}
