//! Hierarchical phi^4 recursion in a Wick basis, evaluated by Gauss-Hermite quadrature.

use rayon::prelude::*;
use serde::Serialize;

use super::hermite::{hermite_he, GaussHermite};
use super::{require_contract, ModelConstants, Remainders, RgModel};
use crate::error::{Error, Result};
use crate::flow::FlowParams;
use crate::seqspace::{norm_growth_allowance, NormWeights};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct HierParams {
    pub l: u32,
    pub eps: f64,
    /// variance of the block fluctuation field
    pub sigma2: f64,
    pub k_max: usize,
    pub outer_nodes: usize,
    pub inner_nodes: usize,
}

impl HierParams {
    pub fn new(l: u32, eps: f64) -> Self {
        HierParams { l, eps, sigma2: DEFAULT_SIGMA2, k_max: 10, outer_nodes: 129, inner_nodes: 20 }
    }

    pub fn phi_dim(&self) -> f64 {
        (3.0 - self.eps) / 4.0
    }

    /// factor by which the block field is scaled in one step
    pub fn shrink(&self) -> f64 {
        (self.l as f64).powf(-self.phi_dim())
    }

    /// stationary variance of the scale recursion, the Wick reference
    pub fn sigma_ref(&self) -> f64 {
        self.sigma2 / (1.0 - self.shrink().powi(2))
    }

    /// exact multiplier of the degree-k Wick coefficient under the linearized step
    pub fn eigenvalue(&self, k: usize) -> f64 {
        (self.l as f64).powf(3.0 - k as f64 * self.phi_dim())
    }

    pub fn validate(&self) -> Result<()> {
        if self.l < 2 || !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::Domain(format!("need L >= 2 and eps in (0, 1), got L = {}, eps = {}", self.l, self.eps)));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::Domain(format!("sigma2 = {} must be positive", self.sigma2)));
        }
        if self.k_max < 6 || self.k_max % 2 == 1 {
            return Err(Error::Domain(format!("k_max = {} must be even and at least 6", self.k_max)));
        }
        if self.outer_nodes < self.k_max + 2 || self.inner_nodes < self.k_max / 2 + 2 {
            return Err(Error::Domain("quadrature too small for the truncation degree".into()));
        }
        Ok(())
    }
}

/// Default fluctuation variance; it fixes the field units relative to the sequence-space weights.
pub const DEFAULT_SIGMA2: f64 = 0.005;

/// Even potential sum_k c_k :phi^k: (Wick order w.r.t. sigma_ref) plus a constant fixing v(0) = 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HierPotential {
    /// indexed by degree; odd entries stay zero
    pub wick_coeffs: Vec<f64>,
    pub constant: f64,
    pub sigma_ref: f64,
}

impl HierPotential {
    pub fn zero(k_max: usize, sigma_ref: f64) -> Self {
        HierPotential { wick_coeffs: vec![0.0; k_max + 1], constant: 0.0, sigma_ref }
    }

    pub fn from_coeffs(wick_coeffs: Vec<f64>, sigma_ref: f64) -> Self {
        let mut v = HierPotential { wick_coeffs, constant: 0.0, sigma_ref };
        v.normalize();
        v
    }

    pub fn k_max(&self) -> usize {
        self.wick_coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.wick_coeffs.get(k).copied().unwrap_or(0.0)
    }

    fn polynomial(&self, phi: f64) -> f64 {
        let s = self.sigma_ref.sqrt();
        let he = hermite_he(phi / s, self.k_max());
        let mut acc = 0.0;
        let mut sk = 1.0;
        for (k, c) in self.wick_coeffs.iter().enumerate() {
            if k > 0 && *c != 0.0 {
                acc += c * sk * he[k];
            }
            sk *= s;
        }
        acc
    }

    pub fn eval(&self, phi: f64) -> f64 {
        self.constant + self.polynomial(phi)
    }

    pub fn normalize(&mut self) {
        self.constant = -self.polynomial(0.0);
    }

    pub fn is_even(&self) -> bool {
        self.wick_coeffs.iter().skip(1).step_by(2).all(|c| *c == 0.0)
    }
}

/// Quadrature grid: outer nodes for the block field, inner nodes for the fluctuation.
#[derive(Debug, Clone)]
pub struct HierGrid {
    pub params: HierParams,
    pub phi: Vec<f64>,
    pub phi_weights: Vec<f64>,
    pub zeta: Vec<f64>,
    pub zeta_weights: Vec<f64>,
    /// probabilists' Hermite values He_k(phi_i / sqrt(sigma_ref)) for k <= k_max
    he: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HierStepOutput {
    pub potential: HierPotential,
    /// max deviation of the truncated projection from the stepped potential on |phi| <= 8 sigma_ref^(1/2),
    /// relative to the largest value there
    pub projection_residual: f64,
}

/// Relative projection residual above which a step records a truncation warning.
pub const PROJECTION_WARN: f64 = 1e-6;

impl HierGrid {
    pub fn new(params: HierParams) -> Result<Self> {
        params.validate()?;
        let outer = GaussHermite::new(params.outer_nodes);
        let inner = GaussHermite::new(params.inner_nodes);
        let s = params.sigma_ref().sqrt();
        let sig = params.sigma2.sqrt();
        let he = outer.nodes.iter().map(|x| hermite_he(*x, params.k_max)).collect();
        Ok(HierGrid {
            params,
            phi: outer.nodes.iter().map(|x| x * s).collect(),
            phi_weights: outer.weights,
            zeta: inner.nodes.iter().map(|x| x * sig).collect(),
            zeta_weights: inner.weights,
            he,
        })
    }

    pub fn sigma_ref(&self) -> f64 {
        self.params.sigma_ref()
    }

    /// Wick coefficients of degrees 0..=k_max of a function sampled at the outer nodes.
    pub fn project(&self, values: &[f64]) -> Vec<f64> {
        let km = self.params.k_max;
        let s = self.sigma_ref().sqrt();
        let mut out = vec![0.0; km + 1];
        let mut fact = 1.0;
        for (k, o) in out.iter_mut().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            if k % 2 == 1 {
                continue;
            }
            let m: f64 = values.iter().zip(&self.phi_weights).zip(&self.he).map(|((v, w), h)| v * w * h[k]).sum();
            *o = m / (fact * s.powi(k as i32));
        }
        out
    }

    pub fn to_grid(&self, v: &HierPotential) -> Vec<f64> {
        self.phi.iter().map(|p| v.eval(*p)).collect()
    }

    pub fn from_grid(&self, values: &[f64]) -> HierPotential {
        let mut c = self.project(values);
        c[0] = 0.0;
        HierPotential::from_coeffs(c, self.sigma_ref())
    }

    /// (phi, exp(-v(phi))) on the outer nodes inside |phi| <= 8 sigma_ref^(1/2).
    pub fn snapshot(&self, v: &HierPotential) -> Vec<(f64, f64)> {
        let cut = 8.0 * self.sigma_ref().sqrt();
        self.phi.iter().filter(|p| p.abs() <= cut).map(|p| (*p, (-v.eval(*p)).exp())).collect()
    }

    fn check_potential(&self, v: &HierPotential) -> Result<()> {
        if v.k_max() != self.params.k_max || (v.sigma_ref - self.sigma_ref()).abs() > 1e-14 * self.sigma_ref() {
            return Err(Error::Usage("potential does not match the grid truncation or reference variance".into()));
        }
        if v.wick_coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Numerical("non-finite potential coefficient".into()));
        }
        Ok(())
    }

    /// Direct step: v'(phi) = -L^3 log E exp(-v(A phi + zeta)), normalized to v'(0) = 0.
    pub fn step(&self, v: &HierPotential) -> Result<HierStepOutput> {
        self.check_potential(v)?;
        let a = self.params.shrink();
        let l3 = (self.params.l as f64).powi(3);
        let vals: Vec<f64> = self
            .phi
            .par_iter()
            .map(|p| {
                let e: Vec<f64> = self.zeta.iter().map(|z| -v.eval(a * p + z)).collect();
                let m = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let s: f64 = e.iter().zip(&self.zeta_weights).map(|(x, w)| w * (x - m).exp()).sum();
                if !(s > 0.0 && s.is_finite() && m.is_finite()) {
                    return Err(Error::Numerical(format!("fluctuation integral lost positivity at phi = {p}")));
                }
                Ok(-l3 * (m + s.ln()))
            })
            .collect::<Result<_>>()?;
        let potential = self.from_grid(&vals);
        let cut = 8.0 * self.sigma_ref().sqrt();
        let c0 = self.project(&vals)[0];
        let (mut dev, mut size) = (0.0f64, 0.0f64);
        for (p, val) in self.phi.iter().zip(&vals) {
            if p.abs() <= cut {
                let fit = c0 + potential.eval(*p) - potential.constant;
                dev = dev.max((val - fit).abs());
                size = size.max(val.abs());
            }
        }
        Ok(HierStepOutput { potential, projection_residual: if size > 0.0 { dev / size } else { dev } })
    }

    /// Wick coefficients of the nonlinear part of the step, N = -L^3 log E exp(-w) with
    /// w = v(A phi + zeta) - E_zeta v(A phi + zeta).
    pub fn nonlinear(&self, v: &HierPotential) -> Result<Vec<f64>> {
        let g = v.coeff(4);
        let mut rest = v.clone();
        rest.wick_coeffs[4] = 0.0;
        let p = self.nonlinear_rest(g, &rest)?;
        let n = self.quartic_second_order();
        Ok(p.iter().zip(&n).map(|(a, b)| a + g * g * b).collect())
    }

    /// Coefficients n with N = g^2 n + O(g^3) for a pure quartic potential g :phi^4:.
    pub fn quartic_second_order(&self) -> Vec<f64> {
        let a = self.params.shrink();
        let l3 = (self.params.l as f64).powi(3);
        let s = self.sigma_ref();
        let vals: Vec<f64> = self
            .phi
            .iter()
            .zip(&self.he)
            .map(|(p, h)| {
                let qm = a.powi(4) * s * s * h[4];
                let e: f64 = self.zeta.iter().zip(&self.zeta_weights).map(|(z, w)| w * (quartic(a * p + z, s) - qm).powi(2)).sum();
                -0.5 * l3 * e
            })
            .collect();
        self.project(&vals)
    }

    /// Wick coefficients of N(g :phi^4: + rest) - g^2 n. With w = g q + r split into its quartic
    /// and remaining fluctuations and E w = 0,
    ///   -log E exp(-w) = -(g E[q r] + E[r^2]/2) - g^2 E[q^2]/2 - E[exp(-w) - 1 + w - w^2/2] - l(T),
    /// T = E[exp(-w) - 1 + w], l(T) = log(1 + T) - T. Each piece keeps full relative accuracy for
    /// small couplings, so remainders of third order are not swamped by rounding of second-order terms.
    pub fn nonlinear_rest(&self, g: f64, rest: &HierPotential) -> Result<Vec<f64>> {
        self.check_potential(rest)?;
        if rest.coeff(4) != 0.0 {
            return Err(Error::Usage("rest potential must carry no quartic coefficient".into()));
        }
        let a = self.params.shrink();
        let l3 = (self.params.l as f64).powi(3);
        let s = self.sigma_ref();
        let ss = s.sqrt();
        let vals: Vec<f64> = self
            .phi
            .par_iter()
            .zip(&self.he)
            .map(|(p, h)| {
                let mut rm = 0.0;
                let (mut ak, mut sk) = (1.0, 1.0);
                for (k, c) in rest.wick_coeffs.iter().enumerate() {
                    if k > 0 && *c != 0.0 {
                        rm += c * ak * sk * h[k];
                    }
                    ak *= a;
                    sk *= ss;
                }
                let qm = a.powi(4) * s * s * h[4];
                let (mut eqr, mut err, mut e3, mut t, mut eqq) = (0.0, 0.0, 0.0, 0.0, 0.0);
                let mut ws = Vec::with_capacity(self.zeta.len());
                for (z, wt) in self.zeta.iter().zip(&self.zeta_weights) {
                    let x = a * p + z;
                    let q = quartic(x, s) - qm;
                    let r = rest.polynomial(x) - rm;
                    let w = g * q + r;
                    eqr += wt * q * r;
                    err += wt * r * r;
                    eqq += wt * q * q;
                    e3 += wt * exp_defect3(w);
                    t += wt * exp_defect(w);
                    ws.push(w);
                }
                let val = if ws.iter().any(|w| *w < -600.0) {
                    let m = ws.iter().map(|x| -x).fold(f64::NEG_INFINITY, f64::max);
                    let u: f64 = ws.iter().zip(&self.zeta_weights).map(|(x, wt)| wt * (-x - m).exp()).sum();
                    -l3 * (m + u.ln()) + 0.5 * l3 * g * g * eqq
                } else {
                    -l3 * (g * eqr + 0.5 * err + e3 + log1p_defect(t))
                };
                if val.is_finite() {
                    Ok(val)
                } else {
                    Err(Error::Numerical(format!("fluctuation integral lost positivity at phi = {p}")))
                }
            })
            .collect::<Result<_>>()?;
        Ok(self.project(&vals))
    }
}

fn quartic(x: f64, s: f64) -> f64 {
    let x2 = x * x;
    x2 * x2 - 6.0 * s * x2 + 3.0 * s * s
}

/// exp(-w) - 1 + w, accurate near zero.
fn exp_defect(w: f64) -> f64 {
    if w.abs() < 1.0 {
        exp_tail(w, 2)
    } else {
        (-w).exp_m1() + w
    }
}

/// exp(-w) - 1 + w - w^2/2, accurate near zero.
fn exp_defect3(w: f64) -> f64 {
    if w.abs() < 2.0 {
        exp_tail(w, 3)
    } else {
        (-w).exp_m1() + w - 0.5 * w * w
    }
}

/// sum_{k >= from} (-w)^k / k!
fn exp_tail(w: f64, from: i32) -> f64 {
    let mut term = (-w).powi(from) / (1..=from).map(f64::from).product::<f64>();
    let mut acc = 0.0f64;
    let mut k = from as f64;
    while term != 0.0 && term.abs() > 1e-18 * acc.abs() {
        acc += term;
        k += 1.0;
        term *= -w / k;
    }
    acc
}

/// log(1 + t) - t, accurate near zero.
fn log1p_defect(t: f64) -> f64 {
    if t.abs() < 0.1 {
        let mut acc = 0.0f64;
        let mut pw = t * t;
        let mut k = 2.0;
        while pw.abs() / k > 1e-18 * acc.abs() && pw != 0.0 {
            acc += if k as i64 % 2 == 0 { -pw / k } else { pw / k };
            pw *= t;
            k += 1.0;
        }
        acc
    } else {
        t.ln_1p() - t
    }
}

/// Second-order coefficient of the quartic coupling from Gaussian contractions:
/// g' = L^eps g - a g^2 + O(g^3) with a = L^eps (36 sigma^4 + 72 sigma^2 A^2 sigma_ref).
pub fn a_hier_second_order(p: &HierParams) -> f64 {
    let le = (p.l as f64).powf(p.eps);
    le * (36.0 * p.sigma2.powi(2) + 72.0 * p.sigma2 * p.shrink().powi(2) * p.sigma_ref())
}

/// Hierarchical model in (g, mu, R) coordinates. The degree k = 6 + 2j Wick coefficient is
/// W_k g^2 + R_j / (sigma_ref^(j+1) (k!/4!)^(1/2)), where W_k g^2 is the stationary second-order irrelevant part
/// (W_k = n_k / (L^(2 eps) - lambda_k)), so R collects only what second order leaves behind.
#[derive(Debug, Clone)]
pub struct HierModel {
    pub grid: HierGrid,
    /// fitted second-order coefficient of the quartic coupling, g' = L^eps g - a_hier g^2 + ...
    pub a_hier: f64,
    pub fp: FlowParams,
    /// exact second-order response to g :phi^4:, by degree
    pub second_order: Vec<f64>,
    /// stationary second-order irrelevant coefficients, by degree
    pub stationary: Vec<f64>,
    consts: ModelConstants,
}

#[derive(Debug, Clone, Serialize)]
pub struct QuadraticFit {
    pub a: f64,
    pub cubic: f64,
    pub couplings: Vec<f64>,
    pub max_residual: f64,
}

/// Radius of the mass and irrelevant domains in weighted units. It exceeds every admissible ball
/// radius, while keeping the sampled potentials in the regime where the step is perturbative.
pub const DOMAIN_RADIUS: f64 = 0.2;

/// Lower end of the fit range used by the model, in units of g sigma_ref^2.
pub const MODEL_FIT_SCALE: f64 = 1e-7;

impl HierModel {
    pub fn r_dim_for(k_max: usize) -> usize {
        (k_max - 4) / 2
    }

    /// Unit of R_j: the degree-k coefficient whose Wick monomial fluctuates like a unit quartic one.
    fn r_scale(&self, j: usize) -> f64 {
        let k = 6 + 2 * j;
        let ratio: f64 = (5..=k).map(|i| i as f64).product();
        self.grid.sigma_ref().powi(j as i32 + 1) * ratio.sqrt()
    }

    /// Quadratic least-squares fit of N_4(g)/g^2 = -a + c g + ... over ten pure quartic inputs
    /// with g sigma_ref^2 in {scale, 2 scale, ..., 10 scale}.
    pub fn fit_quadratic(grid: &HierGrid, scale: f64) -> Result<QuadraticFit> {
        let s2 = grid.sigma_ref().powi(2);
        let km = grid.params.k_max;
        let couplings: Vec<f64> = (1..=10).map(|i| scale * i as f64 / s2).collect();
        let mut ys = Vec::new();
        for g in &couplings {
            let mut c = vec![0.0; km + 1];
            c[4] = *g;
            let n = grid.nonlinear(&HierPotential::from_coeffs(c, grid.sigma_ref()))?;
            ys.push(n[4] / (g * g));
        }
        let xs: Vec<f64> = couplings.iter().map(|g| g * s2 / scale).collect();
        let mut m = [[0.0; 3]; 3];
        let mut rhs = [0.0; 3];
        for (x, y) in xs.iter().zip(&ys) {
            let b = [1.0, *x, x * x];
            for i in 0..3 {
                rhs[i] += b[i] * y;
                for j in 0..3 {
                    m[i][j] += b[i] * b[j];
                }
            }
        }
        let sol = solve3(m, rhs).ok_or_else(|| Error::Numerical("singular quadratic fit".into()))?;
        let max_residual = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (y - sol[0] - sol[1] * x - sol[2] * x * x).abs())
            .fold(0.0, f64::max);
        Ok(QuadraticFit { a: -sol[0], cubic: sol[1] * s2 / scale, couplings, max_residual })
    }

    pub fn new(params: HierParams) -> Result<Self> {
        Self::with_audit(params, 1000, 0)
    }

    /// Fits a_hier, freezes it into the flow parameters, measures the remainder constants on
    /// `samples` domain points and declares them with 2x headroom, then audits them on a fresh sample.
    pub fn with_audit(params: HierParams, samples: usize, seed: u64) -> Result<Self> {
        let grid = HierGrid::new(params)?;
        let fit = Self::fit_quadratic(&grid, MODEL_FIT_SCALE)?;
        if !(fit.a > 0.0) {
            return Err(Error::Model(format!("fitted quadratic coefficient {} is not positive", fit.a)));
        }
        let le = (params.l as f64).powf(params.eps);
        let fp = FlowParams::new(params.l, params.eps, fit.a / (le * le))?;
        let c_r = params.eigenvalue(6) * norm_growth_allowance(&fp);
        if c_r > 0.5 {
            return Err(Error::Model(format!("irrelevant contraction {c_r} with norm-growth allowance exceeds 1/2")));
        }
        let second_order = grid.quartic_second_order();
        let stationary = (0..=params.k_max)
            .map(|k| if k >= 6 && k % 2 == 0 { second_order[k] / (le * le - params.eigenvalue(k)) } else { 0.0 })
            .collect();
        let mut m = HierModel {
            grid,
            a_hier: fit.a,
            fp,
            second_order,
            stationary,
            consts: ModelConstants { a_mu: DOMAIN_RADIUS, a_r: DOMAIN_RADIUS, c_r, ..Default::default() },
        };
        let nw = NormWeights::standard(&fp);
        let probe = super::contract_audit(&m, &fp, &nw, samples, seed.wrapping_add(1))?;
        m.consts.b_g = 2.0 * probe.max_ratio_g;
        m.consts.b_mu = 2.0 * probe.max_ratio_mu;
        m.consts.b_rxi = 2.0 * probe.max_ratio_r;
        require_contract(&m, &fp, &nw, samples, seed)?;
        Ok(m)
    }

    fn rest_potential(&self, g: f64, mu: f64, r: &[f64]) -> HierPotential {
        let mut c = vec![0.0; self.grid.params.k_max + 1];
        c[2] = mu;
        for (j, x) in r.iter().enumerate() {
            let k = 6 + 2 * j;
            c[k] = x / self.r_scale(j) + self.stationary[k] * g * g;
        }
        HierPotential::from_coeffs(c, self.grid.sigma_ref())
    }

    pub fn potential(&self, g: f64, mu: f64, r: &[f64]) -> HierPotential {
        let mut v = self.rest_potential(g, mu, r);
        v.wick_coeffs[4] = g;
        v.normalize();
        v
    }

    pub fn coordinates(&self, v: &HierPotential) -> (f64, f64, Vec<f64>) {
        let g = v.coeff(4);
        let r = (0..self.r_dim())
            .map(|j| {
                let k = 6 + 2 * j;
                (v.coeff(k) - self.stationary[k] * g * g) * self.r_scale(j)
            })
            .collect();
        (g, v.coeff(2), r)
    }

    /// Full step in model coordinates through the direct path.
    pub fn step_coordinates(&self, g: f64, mu: f64, r: &[f64]) -> Result<(f64, f64, Vec<f64>)> {
        let out = self.grid.step(&self.potential(g, mu, r))?.potential;
        Ok(self.coordinates(&out))
    }
}

fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for c in 0..3 {
        let p = (c..3).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
        m.swap(c, p);
        b.swap(c, p);
        if m[c][c] == 0.0 {
            return None;
        }
        #[allow(clippy::needless_range_loop)]
        for r in c + 1..3 {
            let f = m[r][c] / m[c][c];
            for k in c..3 {
                m[r][k] -= f * m[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = [0.0; 3];
    for c in (0..3).rev() {
        let s: f64 = (c + 1..3).map(|k| m[c][k] * x[k]).sum();
        x[c] = (b[c] - s) / m[c][c];
    }
    Some(x)
}

impl RgModel for HierModel {
    fn name(&self) -> &str {
        "hier"
    }
    fn r_dim(&self) -> usize {
        Self::r_dim_for(self.grid.params.k_max)
    }
    fn remainders(&self, g: f64, mu: f64, r: &[f64]) -> Result<Remainders> {
        let p = self.grid.nonlinear_rest(g, &self.rest_potential(g, mu, r))?;
        let n = &self.second_order;
        let g2 = g * g;
        let n4 = n[4] * g2 + p[4];
        let le = self.fp.l_eps();
        // R' = lambda R + n g^2 + P - W (g'^2 - L^(2 eps) g^2), the g^2 terms cancelling by choice of W
        let dg2 = 2.0 * le * g * n4 + n4 * n4;
        Ok(Remainders {
            g: (n[4] + self.a_hier) * g2 + p[4],
            mu: n[2] * g2 + p[2],
            r: (0..self.r_dim())
                .map(|j| {
                    let k = 6 + 2 * j;
                    (p[k] - self.stationary[k] * dg2) * self.r_scale(j)
                })
                .collect(),
        })
    }
    fn apply_linear(&self, _g: f64, _mu: f64, r: &[f64]) -> Vec<f64> {
        r.iter().enumerate().map(|(j, x)| self.grid.params.eigenvalue(6 + 2 * j) * x).collect()
    }
    fn constants(&self) -> ModelConstants {
        self.consts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> HierGrid {
        HierGrid::new(HierParams::new(2, 0.1)).unwrap()
    }

    fn model() -> &'static HierModel {
        static MODEL: std::sync::OnceLock<HierModel> = std::sync::OnceLock::new();
        MODEL.get_or_init(|| HierModel::new(HierParams::new(2, 0.1)).unwrap())
    }

    #[test]
    fn potentials_are_even_and_normalized() {
        let g = grid();
        let mut c = vec![0.0; 11];
        c[2] = 0.3;
        c[4] = 1.2;
        c[6] = -0.1;
        let v = HierPotential::from_coeffs(c.clone(), g.sigma_ref());
        assert!(v.is_even());
        assert!(v.eval(0.0).abs() < 1e-15);
        assert!((v.eval(0.2) - v.eval(-0.2)).abs() < 1e-15);
        c[3] = 1.0;
        assert!(!HierPotential::from_coeffs(c, g.sigma_ref()).is_even());
    }

    #[test]
    fn grid_round_trip() {
        let g = grid();
        let s = g.sigma_ref();
        let c: Vec<f64> = (0..=10).map(|k| if k % 2 == 0 && k > 0 { 0.5 / s.powf(k as f64 / 2.0) / k as f64 } else { 0.0 }).collect();
        let v = HierPotential::from_coeffs(c, s);
        let back = g.from_grid(&g.to_grid(&v));
        for k in 0..=10 {
            let scale = s.powf(k as f64 / 2.0);
            assert!(((back.coeff(k) - v.coeff(k)) * scale).abs() < 1e-8, "degree {k}");
        }
    }

    #[test]
    fn step_keeps_the_weight_positive_and_even() {
        let g = grid();
        let s = g.sigma_ref();
        let mut c = vec![0.0; 11];
        c[4] = 1e-4 / (s * s);
        let out = g.step(&HierPotential::from_coeffs(c, s)).unwrap();
        assert!(out.potential.is_even());
        assert!(out.potential.eval(0.0).abs() < 1e-12);
        assert!(g.snapshot(&out.potential).iter().all(|(_, w)| *w > 0.0 && w.is_finite()));
        assert!(out.projection_residual < PROJECTION_WARN);
    }

    #[test]
    fn fitted_coefficient_matches_second_order_formula() {
        let g = grid();
        let fit = HierModel::fit_quadratic(&g, MODEL_FIT_SCALE).unwrap();
        let exact = a_hier_second_order(&g.params);
        assert!((fit.a - exact).abs() < 1e-10 * exact);
        assert!((fit.a + g.quartic_second_order()[4]).abs() < 1e-10 * exact);
    }

    #[test]
    fn coordinates_invert_the_potential() {
        let m = model();
        let r = [1e-6, -2e-7, 3e-8];
        let (g, mu, rr) = m.coordinates(&m.potential(0.7, 1e-4, &r));
        assert!((g - 0.7).abs() < 1e-14 && (mu - 1e-4).abs() < 1e-16);
        for (a, b) in rr.iter().zip(&r) {
            assert!((a - b).abs() < 1e-12 * m.r_scale(2).max(1.0));
        }
    }

    #[test]
    fn remainders_reproduce_the_direct_step() {
        let m = model();
        let fp = m.fp;
        let (g, mu, r) = (0.5, 2e-4, vec![1e-5, 0.0, 0.0]);
        let (g1, mu1, r1) = m.step_coordinates(g, mu, &r).unwrap();
        let xi = m.remainders(g, mu, &r).unwrap();
        assert!((g1 - (fp.l_eps() * g - fp.quad() * g * g + xi.g)).abs() < 1e-9 * g);
        assert!((mu1 - (fp.mass_multiplier() * mu + xi.mu)).abs() < 1e-9 * g);
        let lin = m.apply_linear(g, mu, &r);
        for j in 0..r.len() {
            assert!((r1[j] - lin[j] - xi.r[j]).abs() < 1e-7 * g * g, "component {j}");
        }
    }

    #[test]
    fn weak_contraction_is_refused() {
        assert!(matches!(HierModel::with_audit(HierParams::new(2, 0.2), 10, 0), Err(Error::Model(_))));
        let mut p = HierParams::new(2, 0.1);
        p.k_max = 7;
        assert!(HierGrid::new(p).is_err());
    }
}
