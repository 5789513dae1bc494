//! The four weighted sums controlling the sequence-space map, their closed-form majorants,
//! and the small-eps constants.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{FlowParams, GbarSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaKind {
    DgForward,
    DgBackward,
    MuForward,
    RBackward,
}

impl SigmaKind {
    pub const ALL: [SigmaKind; 4] = [SigmaKind::DgForward, SigmaKind::DgBackward, SigmaKind::MuForward, SigmaKind::RBackward];

    pub fn name(self) -> &'static str {
        match self {
            SigmaKind::DgForward => "dg_forward",
            SigmaKind::DgBackward => "dg_backward",
            SigmaKind::MuForward => "mu_forward",
            SigmaKind::RBackward => "R_backward",
        }
    }
}

impl FromStr for SigmaKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SigmaKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Usage(format!("unknown sum '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SigmaSpec {
    pub which: SigmaKind,
    pub gamma: f64,
    pub nu: f64,
    /// contraction rate of the irrelevant part; only read by R_backward
    pub c_r: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Hypothesis {
    pub name: String,
    pub holds: bool,
}

impl SigmaSpec {
    pub fn new(which: SigmaKind, gamma: f64, nu: f64, c_r: f64) -> Self {
        SigmaSpec { which, gamma, nu, c_r }
    }

    fn condition(&self) -> &'static str {
        match self.which {
            SigmaKind::RBackward => "backward bound for R",
            SigmaKind::MuForward => "forward bound for mu",
            SigmaKind::DgBackward => "backward bound for delta g",
            SigmaKind::DgForward => "forward bound for delta g",
        }
    }

    /// Hypotheses of the majorant for this kind, each with its truth value.
    pub fn hypotheses(&self, fp: &FlowParams, omega0: f64) -> Vec<Hypothesis> {
        let (g, nu) = (self.gamma, self.nu);
        let h = |name: &str, holds: bool| Hypothesis { name: name.to_string(), holds };
        match self.which {
            SigmaKind::RBackward => vec![
                h("nu >= gamma >= 0", nu >= g && g >= 0.0),
                h("0 < c_R < 1", self.c_r > 0.0 && self.c_r < 1.0),
            ],
            SigmaKind::MuForward => vec![
                h("nu >= gamma >= 0", nu >= g && g >= 0.0),
                h("eps nu < (3+eps)/2", fp.eps * nu < (3.0 + fp.eps) / 2.0),
            ],
            SigmaKind::DgBackward => vec![h("gamma, nu >= 0", g >= 0.0 && nu >= 0.0)],
            SigmaKind::DgForward => {
                let ups = upsilon(nu, fp, omega0);
                vec![
                    h("0 <= gamma <= 1", (0.0..=1.0).contains(&g)),
                    h("nu > 0", nu > 0.0),
                    h("Upsilon in (0,1)", ups > 0.0 && ups < 1.0),
                ]
            }
        }
    }

    pub fn check(&self, fp: &FlowParams, omega0: f64) -> Result<()> {
        let failed: Vec<String> =
            self.hypotheses(fp, omega0).into_iter().filter(|h| !h.holds).map(|h| h.name).collect();
        if failed.is_empty() {
            Ok(())
        } else {
            Err(Error::Precondition { condition: self.condition().into(), detail: failed.join("; ") })
        }
    }
}

pub fn upsilon(nu: f64, fp: &FlowParams, omega0: f64) -> f64 {
    let le = fp.l_eps();
    let root = (le * le - 4.0 * omega0 * (le - 1.0)).sqrt();
    2.0 * (fp.l as f64).powf(fp.eps / nu) / (le + root)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SigmaValue {
    /// supremum of the defining sums over the stored window (truncated sums)
    pub value: f64,
    /// value + tail_bound majorizes the supremum over all integers of the untruncated sums
    pub tail_bound: f64,
    pub argmax: i64,
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Window supremum of the chosen sum together with a rigorous majorant of what the window misses.
/// Products of f' are accumulated in log space.
pub fn sigma_value(spec: &SigmaSpec, gs: &GbarSequence) -> Result<SigmaValue> {
    let fp = &gs.fp;
    let (gamma, nu) = (spec.gamma, spec.nu);
    let (lo, hi) = (gs.lo(), gs.hi());
    let lg = |n: i64| gs.get(n).ln();
    let lfp = |n: i64| fp.f_prime_unchecked(gs.get(n)).ln();
    let gstar = fp.gbar_star;
    let mut best = (f64::NEG_INFINITY, 0i64);
    let mut upper = f64::NEG_INFINITY;
    let mut note = |n: i64, s: f64, u: f64| {
        if s > best.0 {
            best = (s, n);
        }
        upper = upper.max(u);
    };
    match spec.which {
        SigmaKind::DgBackward => {
            if hi < 1 {
                return Err(Error::Truncation("window has no positive indices".into()));
            }
            let mut la = nu * lg(0);
            for n in 1..=hi {
                let s = (la - gamma * lg(n)).exp();
                note(n, s, s);
                if n < hi {
                    la = log_add(lfp(n) + la, nu * lg(n));
                }
            }
            // n > hi: A_{n+1} <= q A_n + gstar^nu with q = f'(gbar_hi)
            let q = fp.f_prime_unchecked(gs.get(hi));
            let outside = if q < 1.0 {
                gs.get(hi).powf(-gamma) * la.exp().max(gstar.powf(nu) / (1.0 - q))
            } else {
                f64::INFINITY
            };
            upper = upper.max(outside);
        }
        SigmaKind::DgForward => {
            if lo > -1 {
                return Err(Error::Truncation("window has no negative indices".into()));
            }
            let mut lb = f64::NEG_INFINITY;
            let mut at_edge = 0.0;
            for n in (lo..=-1).rev() {
                lb = log_add(nu * lg(n), lb) - lfp(n);
                let s = (lb - gamma * lg(n)).exp();
                note(n, s, s);
                at_edge = s;
            }
            let gm = gs.get(lo);
            let fpm = fp.f_prime_unchecked(gm);
            let rho = gm.mul_add(-fp.quad(), fp.l_eps());
            let outside = if gamma <= 1.0 && nu > gamma && rho > 1.0 {
                let e = (fp.quad() * gm / (fpm * (rho - 1.0))).exp();
                e * at_edge + e * gm.powf(nu - gamma) / (fpm * (rho.powf(nu - gamma) - 1.0))
            } else {
                f64::INFINITY
            };
            upper = upper.max(outside);
        }
        SigmaKind::MuForward => {
            let k = (3.0 + fp.eps) / 2.0;
            let lk = k * (fp.l as f64).ln();
            let lmk = (-lk).exp();
            let mut ld = f64::NEG_INFINITY;
            let mut at_lo = 0.0;
            for n in (lo..=hi).rev() {
                ld = log_add(nu * lg(n), ld) - lk;
                let s = (ld - gamma * lg(n)).exp();
                let t = gs.get(n).powf(-gamma) * gstar.powf(nu) * (-lk * (hi - n + 2) as f64).exp() / (1.0 - lmk);
                note(n, s, s + t);
                at_lo = s + t;
            }
            let right = gs.get(hi).powf(-gamma) * gstar.powf(nu) / (lk.exp() - 1.0);
            let left = if nu >= gamma && fp.eps * gamma < k {
                at_lo.max(gs.get(lo).powf(nu - gamma) / (lk.exp() - (fp.eps * gamma * (fp.l as f64).ln()).exp()))
            } else {
                f64::INFINITY
            };
            upper = upper.max(right).max(left);
        }
        SigmaKind::RBackward => {
            let c = spec.c_r;
            if !(c > 0.0 && c < 1.0) {
                return Err(Error::Domain(format!("c_R = {c} outside (0,1)")));
            }
            let gm = gs.get(lo);
            let mut la = f64::NEG_INFINITY;
            let mut a_full_hi = 0.0;
            for n in lo..=hi {
                if n > lo {
                    la = log_add(c.ln() + la, nu * lg(n - 1));
                }
                let s = (la - gamma * lg(n)).exp();
                let tail_a = gm.powf(nu) * c.powi((n - lo) as i32) / (1.0 - c);
                let t = gs.get(n).powf(-gamma) * tail_a;
                note(n, s, s + t);
                a_full_hi = la.exp() + tail_a;
            }
            let right = gs.get(hi).powf(-gamma) * (c * a_full_hi + gs.get(hi).powf(nu)).max(gstar.powf(nu) / (1.0 - c));
            let left = if nu >= gamma { gm.powf(nu - gamma) / (1.0 - c) } else { f64::INFINITY };
            upper = upper.max(right).max(left);
        }
    }
    let (value, argmax) = best;
    let tail_bound = (upper - value).max(0.0);
    if !(tail_bound < value) {
        return Err(Error::Truncation(format!(
            "{}: tail bound {tail_bound:e} dominates the window value {value:e}; enlarge the window",
            spec.which.name()
        )));
    }
    Ok(SigmaValue { value, tail_bound, argmax })
}

/// Closed-form majorant of the sum; refuses when a hypothesis fails.
pub fn bar_sigma(spec: &SigmaSpec, fp: &FlowParams, omega0: f64) -> Result<f64> {
    spec.check(fp, omega0)?;
    let (g, nu) = (spec.gamma, spec.nu);
    let le = fp.l_eps();
    let gs = fp.gbar_star;
    let l = fp.l as f64;
    Ok(match spec.which {
        SigmaKind::RBackward => gs.powf(nu - g) / (1.0 - spec.c_r),
        SigmaKind::MuForward => gs.powf(nu - g) / (l.powf((3.0 + fp.eps) / 2.0) - l.powf(fp.eps * nu)),
        SigmaKind::DgBackward => {
            let ex = 2.0 * (1.0 - omega0) * (1.0 + omega0 - le * omega0) / (omega0 * (2.0 - le));
            omega0.powf(-g) * gs.powf(nu - g) / (le - 1.0) * ex.exp()
        }
        SigmaKind::DgForward => {
            let root = (le * le - 4.0 * omega0 * (le - 1.0)).sqrt();
            let ups = upsilon(nu, fp, omega0);
            let ex = omega0 * (2.0 - le + root) / ((1.0 - omega0) * (le - 2.0 * omega0 * (le - 1.0)));
            (omega0 * gs).powf(nu - g) / (1.0 - ups.powf(nu)) * ex.exp()
        }
    })
}

/// Leading small-eps behaviour bar_sigma ~ K eps^p, returned as (K, p).
///
/// The limit gbar_star / eps -> log L / a is taken with `fp.a` held fixed; for a = log L / (18 pi^2)
/// this is the familiar 18 pi^2.
pub fn k_constant(spec: &SigmaSpec, fp: &FlowParams, omega0: f64) -> Result<(f64, f64)> {
    let (g, nu) = (spec.gamma, spec.nu);
    let ll = (fp.l as f64).ln();
    let ratio = ll / fp.a;
    let pre = |condition: &str, detail: &str| Error::Precondition { condition: condition.into(), detail: detail.into() };
    match spec.which {
        SigmaKind::RBackward => {
            if !(nu >= g && g >= 0.0) {
                return Err(pre("small-eps constants", "nu >= gamma >= 0"));
            }
            Ok((ratio.powf(nu - g) / (1.0 - spec.c_r), nu - g))
        }
        SigmaKind::MuForward => {
            if !(nu >= g && g >= 0.0) {
                return Err(pre("small-eps constants", "nu >= gamma >= 0"));
            }
            Ok((ratio.powf(nu - g) / ((fp.l as f64).powf(1.5) - 1.0), nu - g))
        }
        SigmaKind::DgBackward => {
            if !(nu >= 0.0 && g >= 0.0) {
                return Err(pre("small-eps constants", "nu, gamma >= 0"));
            }
            let k = ratio.powf(nu - g) / (omega0.powf(g) * ll) * (2.0 * (1.0 - omega0) / omega0).exp();
            Ok((k, nu - g - 1.0))
        }
        SigmaKind::DgForward => {
            if g != 1.0 {
                return Err(pre("small-eps constants", "forward delta g constant is stated for gamma = 1"));
            }
            if !(nu > 1.0 / (1.0 - omega0)) {
                return Err(pre("small-eps constants", "nu > 1/(1-omega0)"));
            }
            let k = (omega0 * ratio).powf(nu - 1.0) / (ll * (nu * (1.0 - omega0) - 1.0))
                * (2.0 * omega0 / (1.0 - omega0)).exp();
            Ok((k, nu - 2.0))
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundRow {
    pub which: &'static str,
    pub gamma: f64,
    pub nu: f64,
    pub eps: f64,
    pub omega0: f64,
    pub l: u32,
    pub sigma: f64,
    pub tail: f64,
    pub bar_sigma: f64,
    pub k: f64,
    pub eps_power: f64,
}

/// One row of the bound sweep; fields that cannot be computed are NaN.
pub fn bound_row(spec: &SigmaSpec, gs: &GbarSequence) -> BoundRow {
    let fp = &gs.fp;
    let sv = sigma_value(spec, gs).ok();
    let bar = bar_sigma(spec, fp, gs.omega0).unwrap_or(f64::NAN);
    let (k, p) = k_constant(spec, fp, gs.omega0).unwrap_or((f64::NAN, f64::NAN));
    BoundRow {
        which: spec.which.name(),
        gamma: spec.gamma,
        nu: spec.nu,
        eps: fp.eps,
        omega0: gs.omega0,
        l: fp.l,
        sigma: sv.map_or(f64::NAN, |s| s.value),
        tail: sv.map_or(f64::NAN, |s| s.tail_bound),
        bar_sigma: bar,
        k,
        eps_power: p,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(eps: f64) -> (FlowParams, GbarSequence) {
        let fp = FlowParams::new(2, eps, 1.2).unwrap();
        let gs = GbarSequence::build_default(0.3, &fp).unwrap();
        (fp, gs)
    }

    #[test]
    fn mu_forward_geometric_case() {
        let (fp, gs) = setup(0.05);
        let spec = SigmaSpec::new(SigmaKind::MuForward, 0.0, 0.0, 0.5);
        let sv = sigma_value(&spec, &gs).unwrap();
        let q = fp.mass_multiplier().recip();
        assert!((sv.value - q / (1.0 - q)).abs() < 1e-12);
        assert!(sv.tail_bound < 1e-12);
        let bar = bar_sigma(&spec, &fp, 0.3).unwrap();
        assert!((bar - 1.0 / (fp.mass_multiplier() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn r_backward_equal_exponents() {
        let (fp, gs) = setup(0.05);
        let spec = SigmaSpec::new(SigmaKind::RBackward, 1.5, 1.5, 0.5);
        let sv = sigma_value(&spec, &gs).unwrap();
        assert!(sv.value + sv.tail_bound <= 2.0 + 1e-12);
        assert_eq!(bar_sigma(&spec, &fp, 0.3).unwrap(), 2.0);
    }

    #[test]
    fn gating() {
        let (fp, _) = setup(0.05);
        assert!(bar_sigma(&SigmaSpec::new(SigmaKind::DgForward, 1.5, 3.0, 0.5), &fp, 0.3).is_err());
        assert!(bar_sigma(&SigmaSpec::new(SigmaKind::RBackward, 2.0, 1.0, 0.5), &fp, 0.3).is_err());
        assert!(bar_sigma(&SigmaSpec::new(SigmaKind::MuForward, 0.0, 40.0, 0.5), &fp, 0.3).is_err());
        // Upsilon >= 1 when nu (1 - omega0) < 1
        assert!(bar_sigma(&SigmaSpec::new(SigmaKind::DgForward, 1.0, 1.2, 0.5), &fp, 0.3).is_err());
        assert!(k_constant(&SigmaSpec::new(SigmaKind::DgForward, 1.0, 1.4, 0.5), &fp, 0.3).is_err());
    }

    #[test]
    fn upsilon_small_eps() {
        let (l, eps, w0, nu) = (2u32, 1e-4, 0.3, 2.0);
        let fp = FlowParams::new(l, eps, 1.0).unwrap();
        let coef = (1.0 - upsilon(nu, &fp, w0)) / (eps * (l as f64).ln());
        let want = 1.0 - w0 - 1.0 / nu;
        assert!((coef / want - 1.0).abs() < 1e-2);
    }
}
