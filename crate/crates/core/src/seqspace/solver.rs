use serde::Serialize;

use super::{apply_m, quadruple_norm, quadruple_norm_at, recursion_residual, DeviationSequence, NormWeights};
use crate::error::{Error, Result};
use crate::flow::GbarSequence;
use crate::models::RgModel;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SolverConfig {
    pub beta: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub contraction_budget: f64,
    pub c_r: f64,
}

impl SolverConfig {
    /// Largest admissible ball radius for a given omega0.
    pub fn beta_limit(omega0: f64) -> f64 {
        (1.0 - 2.0 * omega0) / (6.0 * omega0) * (-2.0 * omega0 / (1.0 - omega0)).exp()
    }

    /// Half the admissible radius, tolerance 1e-12.
    pub fn for_omega0(omega0: f64) -> Self {
        SolverConfig { beta: 0.5 * Self::beta_limit(omega0), max_iter: 200, tol: 1e-12, contraction_budget: 0.5, c_r: 0.5 }
    }

    pub fn validate(&self, omega0: f64) -> Result<()> {
        if !(omega0 > 0.0 && omega0 < 0.5) {
            return Err(Error::Domain(format!("omega0 = {omega0} outside (0, 1/2)")));
        }
        let lim = Self::beta_limit(omega0);
        if !(self.beta > 0.0 && self.beta < lim) {
            return Err(Error::Precondition {
                condition: "ball radius".into(),
                detail: format!("beta = {} must lie in (0, {lim})", self.beta),
            });
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(Error::Usage("tol must be positive and max_iter nonzero".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverTails {
    pub mu_max: f64,
    pub r_max: f64,
    /// the same majorants restricted to the inner half of the window
    pub mu_inner: f64,
    pub r_inner: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverReport {
    pub model: String,
    pub iterations: usize,
    pub iterate_norms: Vec<f64>,
    pub differences: Vec<f64>,
    pub measured_contraction: Vec<f64>,
    pub final_residual: f64,
    pub tail_bounds: SolverTails,
    pub converged: bool,
}

/// Picard iteration of the sequence-space map until successive iterates differ by at most tol.
pub fn solve_fixed_point(
    initial: &DeviationSequence,
    cfg: &SolverConfig,
    gs: &GbarSequence,
    nw: &NormWeights,
    model: &dyn RgModel,
) -> Result<(DeviationSequence, SolverReport)> {
    cfg.validate(gs.omega0)?;
    let c = model.constants();
    if c.c_r > cfg.contraction_budget {
        return Err(Error::Precondition {
            condition: "irrelevant contraction".into(),
            detail: format!("declared c_R = {} exceeds {}", c.c_r, cfg.contraction_budget),
        });
    }
    let n0 = quadruple_norm(initial, gs, nw, model)?;
    if n0 > cfg.beta / 6.0 {
        return Err(Error::Precondition {
            condition: "initial point".into(),
            detail: format!("initial norm {n0} exceeds beta/6 = {}", cfg.beta / 6.0),
        });
    }
    let mut cur = initial.clone();
    let mut norms = vec![n0];
    let mut diffs = Vec::new();
    let mut ratios = Vec::new();
    let mut tails = None;
    let mut converged = false;
    for _ in 0..cfg.max_iter {
        let (next, t) = apply_m(&cur, gs, nw, model)?;
        let (norm, at) = quadruple_norm_at(&next, gs, nw, model)?;
        if !(norm <= cfg.beta) {
            return Err(Error::Divergence { n: at, detail: format!("norm {norm:e} exceeds beta = {}", cfg.beta) });
        }
        let d = quadruple_norm(&next.sub(&cur)?, gs, nw, model)?;
        if let Some(&prev) = diffs.last() {
            if prev > 0.0 {
                ratios.push(d / prev);
            }
        }
        diffs.push(d);
        norms.push(norm);
        tails = Some(t);
        cur = next;
        if d <= cfg.tol {
            converged = true;
            break;
        }
    }
    let t = tails.expect("at least one iteration");
    let (lo, hi) = (gs.lo(), gs.hi());
    let (mu_max, r_max) = t.max_between(lo, lo, hi);
    let (mu_inner, r_inner) = t.max_between(lo, lo / 2, hi / 2);
    let report = SolverReport {
        model: model.name().to_string(),
        iterations: diffs.len(),
        iterate_norms: norms,
        differences: diffs,
        measured_contraction: ratios,
        final_residual: recursion_residual(&cur, gs, nw, model)?,
        tail_bounds: SolverTails { mu_max, r_max, mu_inner, r_inner },
        converged,
    };
    Ok((cur, report))
}
