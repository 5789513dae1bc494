//! Deviation sequences around the approximate orbit, their weighted norm, the map whose fixed
//! points are complete trajectories, and the Picard solver.

mod solver;

use rayon::prelude::*;
use serde::Serialize;

pub use solver::{solve_fixed_point, SolverConfig, SolverReport};

use crate::error::{Error, Result};
use crate::flow::{FlowParams, GbarSequence};
use crate::models::{Remainders, RgModel};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct NormWeights {
    pub delta: f64,
    pub eta: f64,
    /// constant c of the calibrator h = c gbar^(-1/4)
    pub c_norm: f64,
    pub h_star: f64,
    pub weight_cap: usize,
}

impl NormWeights {
    pub fn standard(fp: &FlowParams) -> Self {
        NormWeights {
            delta: 1.0 / 6.0,
            eta: 3.0 / 16.0,
            c_norm: 1.0,
            h_star: (fp.l as f64).powf((3.0 + fp.eps) / 4.0),
            weight_cap: 9,
        }
    }

    pub fn g_exponent(&self, n: i64) -> f64 {
        if n <= 0 {
            1.0
        } else {
            1.5
        }
    }

    pub fn mu_exponent(&self) -> f64 {
        2.0 - self.delta
    }

    pub fn r_exponent(&self) -> f64 {
        2.75 - self.eta
    }
}

/// max( sum_j h*^j |R_j| , gbar^2 sum_j (c gbar^(-1/4))^j |R_j| )
pub fn calibrated_r_norm(r: &[f64], gbar: f64, nw: &NormWeights) -> Result<f64> {
    if !(gbar > 0.0) {
        return Err(Error::Domain(format!("calibrator gbar = {gbar} must be positive")));
    }
    if r.len() > nw.weight_cap + 1 {
        return Err(Error::Domain(format!("R has {} components, cap is {}", r.len(), nw.weight_cap + 1)));
    }
    let h = nw.c_norm * gbar.powf(-0.25);
    let (mut large, mut small) = (0.0, 0.0);
    let (mut ws, mut wh) = (1.0, 1.0);
    for x in r {
        large += ws * x.abs();
        small += wh * x.abs();
        ws *= nw.h_star;
        wh *= h;
    }
    Ok(large.max(gbar * gbar * small))
}

/// Norm-growth factor between the calibrators gbar and f(gbar).
pub fn norm_growth_allowance(fp: &FlowParams) -> f64 {
    let le = fp.l_eps();
    (le * le).max((2.0 - le).powf(-0.25))
}

/// Windowed (delta g_n, mu_n, R_n).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationSequence {
    pub n_minus: usize,
    pub n_plus: usize,
    pub dim: usize,
    pub dg: Vec<f64>,
    pub mu: Vec<f64>,
    pub r: Vec<f64>,
}

impl DeviationSequence {
    pub fn zeros(n_minus: usize, n_plus: usize, dim: usize) -> Self {
        let len = n_minus + n_plus + 1;
        DeviationSequence { n_minus, n_plus, dim, dg: vec![0.0; len], mu: vec![0.0; len], r: vec![0.0; len * dim] }
    }

    pub fn zeros_like(gs: &GbarSequence, dim: usize) -> Self {
        Self::zeros(gs.n_minus, gs.n_plus, dim)
    }

    pub fn len(&self) -> usize {
        self.dg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dg.is_empty()
    }

    pub fn lo(&self) -> i64 {
        -(self.n_minus as i64)
    }

    pub fn hi(&self) -> i64 {
        self.n_plus as i64
    }

    pub fn idx(&self, n: i64) -> usize {
        (n - self.lo()) as usize
    }

    pub fn dg_at(&self, n: i64) -> f64 {
        self.dg[self.idx(n)]
    }

    pub fn mu_at(&self, n: i64) -> f64 {
        self.mu[self.idx(n)]
    }

    pub fn r_at(&self, n: i64) -> &[f64] {
        let i = self.idx(n);
        &self.r[i * self.dim..(i + 1) * self.dim]
    }

    pub fn r_at_mut(&mut self, n: i64) -> &mut [f64] {
        let i = self.idx(n);
        &mut self.r[i * self.dim..(i + 1) * self.dim]
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let z = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>();
        Ok(DeviationSequence {
            n_minus: self.n_minus,
            n_plus: self.n_plus,
            dim: self.dim,
            dg: z(&self.dg, &other.dg),
            mu: z(&self.mu, &other.mu),
            r: z(&self.r, &other.r),
        })
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut c = self.clone();
        c.dg.iter_mut().chain(c.mu.iter_mut()).chain(c.r.iter_mut()).for_each(|x| *x *= s);
        c
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.n_minus != other.n_minus || self.n_plus != other.n_plus || self.dim != other.dim {
            return Err(Error::Usage("deviation sequences have different windows".into()));
        }
        Ok(())
    }

    fn check_window(&self, gs: &GbarSequence) -> Result<()> {
        if self.n_minus != gs.n_minus || self.n_plus != gs.n_plus {
            return Err(Error::Usage(format!(
                "window mismatch: sequence [-{}, {}] vs orbit [-{}, {}]",
                self.n_minus, self.n_plus, gs.n_minus, gs.n_plus
            )));
        }
        Ok(())
    }

    pub fn all_finite(&self) -> bool {
        self.dg.iter().chain(&self.mu).chain(&self.r).all(|x| x.is_finite())
    }
}

/// Weighted components at one index: (|dg| gbar^-e_n, |mu| gbar^-(2-delta), |||R||| gbar^-(11/4-eta)).
pub fn weighted_entries(
    ds: &DeviationSequence,
    gs: &GbarSequence,
    nw: &NormWeights,
    model: &dyn RgModel,
    n: i64,
) -> [f64; 3] {
    let g = gs.get(n);
    [
        ds.dg_at(n).abs() * g.powf(-nw.g_exponent(n)),
        ds.mu_at(n).abs() * g.powf(-nw.mu_exponent()),
        model.r_norm(ds.r_at(n), g, nw) * g.powf(-nw.r_exponent()),
    ]
}

/// Quadruple norm and the index where it is attained.
pub fn quadruple_norm_at(
    ds: &DeviationSequence,
    gs: &GbarSequence,
    nw: &NormWeights,
    model: &dyn RgModel,
) -> Result<(f64, i64)> {
    ds.check_window(gs)?;
    let mut best = (0.0, 0);
    for n in gs.indices() {
        let m = weighted_entries(ds, gs, nw, model, n).into_iter().fold(0.0, f64::max);
        if m > best.0 || m.is_nan() {
            best = (m, n);
        }
    }
    Ok(best)
}

pub fn quadruple_norm(ds: &DeviationSequence, gs: &GbarSequence, nw: &NormWeights, model: &dyn RgModel) -> Result<f64> {
    Ok(quadruple_norm_at(ds, gs, nw, model)?.0)
}

/// Truncation majorants per index, in the weighted units of the quadruple norm.
#[derive(Debug, Clone, Serialize)]
pub struct TailBounds {
    /// mass-term sums cut at the right edge
    pub mu: Vec<f64>,
    /// irrelevant-part sums seeded with zero at the left edge
    pub r: Vec<f64>,
}

impl TailBounds {
    pub fn max_between(&self, ds_lo: i64, from: i64, to: i64) -> (f64, f64) {
        let (a, b) = ((from - ds_lo) as usize, (to - ds_lo) as usize);
        let m = |v: &[f64]| v[a..=b].iter().copied().fold(0.0, f64::max);
        (m(&self.mu), m(&self.r))
    }
}

fn check_domain(
    ds: &DeviationSequence,
    gs: &GbarSequence,
    nw: &NormWeights,
    model: &dyn RgModel,
) -> Result<()> {
    let c = model.constants();
    for n in gs.indices() {
        let g = gs.get(n);
        if !(ds.dg_at(n).abs() < c.a_g * g) {
            return Err(Error::DomainViolation { n, which: format!("|delta g| >= {} gbar", c.a_g) });
        }
        if !(ds.mu_at(n).abs() < c.a_mu * g.powf(nw.mu_exponent())) {
            return Err(Error::DomainViolation { n, which: format!("|mu| >= {} gbar^(2-delta)", c.a_mu) });
        }
        if !(model.r_norm(ds.r_at(n), g, nw) < c.a_r * g.powf(nw.r_exponent())) {
            return Err(Error::DomainViolation { n, which: format!("|||R||| >= {} gbar^(11/4-eta)", c.a_r) });
        }
    }
    Ok(())
}

fn all_remainders(ds: &DeviationSequence, gs: &GbarSequence, model: &dyn RgModel) -> Result<Vec<Remainders>> {
    let idx: Vec<i64> = gs.indices().collect();
    idx.par_iter()
        .map(|&n| model.remainders(gs.get(n) + ds.dg_at(n), ds.mu_at(n), ds.r_at(n)))
        .collect()
}

/// One application of the sequence-space map. Sums over the infinite past or future are cut at
/// the window edges; the returned tail bounds majorize what was cut.
pub fn apply_m(
    ds: &DeviationSequence,
    gs: &GbarSequence,
    nw: &NormWeights,
    model: &dyn RgModel,
) -> Result<(DeviationSequence, TailBounds)> {
    ds.check_window(gs)?;
    if ds.dim != model.r_dim() {
        return Err(Error::Usage(format!("R dimension {} does not match model ({})", ds.dim, model.r_dim())));
    }
    check_domain(ds, gs, nw, model)?;
    let fp = &gs.fp;
    let xi = all_remainders(ds, gs, model)?;
    let (lo, hi) = (gs.lo(), gs.hi());
    let at = |n: i64| (n - lo) as usize;
    let nonlin = |n: i64| -fp.quad() * ds.dg_at(n).powi(2) + xi[at(n)].g;
    let mut out = DeviationSequence::zeros_like(gs, ds.dim);

    // relevant coupling: forward from 0 for n > 0, backward from 0 for n < 0
    for n in 1..=hi {
        let prev = out.dg_at(n - 1);
        out.dg[at(n)] = fp.f_prime_unchecked(gs.get(n - 1)) * prev + nonlin(n - 1);
    }
    for n in (lo..0).rev() {
        let next = out.dg_at(n + 1);
        out.dg[at(n)] = (next - nonlin(n)) / fp.f_prime_unchecked(gs.get(n));
    }

    // mass term: summed from the future
    let k = fp.mass_multiplier();
    out.mu[at(hi)] = -xi[at(hi)].mu / k;
    for n in (lo..hi).rev() {
        out.mu[at(n)] = (out.mu[at(n + 1)] - xi[at(n)].mu) / k;
    }

    // irrelevant part: summed from the past
    for n in lo + 1..=hi {
        let p = n - 1;
        let prev = out.r_at(p).to_vec();
        let lin = model.apply_linear(gs.get(p) + ds.dg_at(p), ds.mu_at(p), &prev);
        let dst = out.r_at_mut(n);
        for (j, d) in dst.iter_mut().enumerate() {
            *d = lin[j] + xi[at(p)].r[j];
        }
    }

    let c = model.constants();
    let lmk = 1.0 / k;
    let g_lo = gs.get(lo);
    let tails = TailBounds {
        mu: gs
            .indices()
            .map(|n| {
                c.b_mu * fp.gbar_star.powi(2) * lmk.powi((hi - n + 1) as i32) / (1.0 - lmk)
                    * gs.get(n).powf(-nw.mu_exponent())
            })
            .collect(),
        r: gs
            .indices()
            .map(|n| {
                c.b_rxi * g_lo.powf(2.75) * c.c_r.powi((n - lo) as i32) / (1.0 - c.c_r)
                    * gs.get(n).powf(-nw.r_exponent())
            })
            .collect(),
    };
    if !out.all_finite() {
        return Err(Error::Numerical("non-finite entry in the image sequence".into()));
    }
    Ok((out, tails))
}

/// Weighted defects of the deviation recursion at every n in [lo, hi-1], entry n stored at
/// index n - lo.
pub fn recursion_defects(
    ds: &DeviationSequence,
    gs: &GbarSequence,
    nw: &NormWeights,
    model: &dyn RgModel,
) -> Result<Vec<f64>> {
    ds.check_window(gs)?;
    let fp = &gs.fp;
    let xi = all_remainders(ds, gs, model)?;
    let (lo, hi) = (gs.lo(), gs.hi());
    let k = fp.mass_multiplier();
    let mut out = vec![0.0; ds.len()];
    for n in lo..hi {
        let i = (n - lo) as usize;
        let (dg, mu) = (ds.dg_at(n), ds.mu_at(n));
        let g1 = gs.get(n + 1);
        let d_g = ds.dg_at(n + 1) - (fp.f_prime_unchecked(gs.get(n)) * dg - fp.quad() * dg * dg + xi[i].g);
        let d_mu = ds.mu_at(n + 1) - (k * mu + xi[i].mu);
        let lin = model.apply_linear(gs.get(n) + dg, mu, ds.r_at(n));
        let d_r: Vec<f64> = ds.r_at(n + 1).iter().zip(&lin).zip(&xi[i].r).map(|((a, b), c)| a - b - c).collect();
        out[i] = (d_g.abs() * g1.powf(-nw.g_exponent(n + 1)))
            .max(d_mu.abs() * g1.powf(-nw.mu_exponent()))
            .max(model.r_norm(&d_r, g1, nw) * g1.powf(-nw.r_exponent()));
    }
    Ok(out)
}

pub fn recursion_residual(
    ds: &DeviationSequence,
    gs: &GbarSequence,
    nw: &NormWeights,
    model: &dyn RgModel,
) -> Result<f64> {
    Ok(recursion_defects(ds, gs, nw, model)?.into_iter().fold(0.0, f64::max))
}

/// Reconstructed couplings g_n = gbar_n + delta g_n.
pub fn orbit(ds: &DeviationSequence, gs: &GbarSequence) -> Vec<f64> {
    gs.indices().map(|n| gs.get(n) + ds.dg_at(n)).collect()
}
