//! Polynomial toy model: cubic remainders and a scalar contraction on a three-dimensional
//! irrelevant space.

use serde::Serialize;

use super::{require_contract, FixedPoint, ModelConstants, Remainders, RgModel};
use crate::error::{Error, Result};
use crate::flow::FlowParams;
use crate::kernels::KernelSet;
use crate::seqspace::{calibrated_r_norm, norm_growth_allowance, NormWeights};

pub const TOY_DIM: usize = 3;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ToyParams {
    pub theta_g: f64,
    pub theta_r: f64,
    /// take the mass coefficient from the kernel set instead of `mass_coeff`
    pub use_b: bool,
    pub mass_coeff: f64,
    /// the irrelevant map is multiplier * identity
    pub multiplier: f64,
}

impl ToyParams {
    /// Coefficients that put each fixed-point coordinate at `target` in weighted units, i.e. half
    /// of the admissible initial radius beta/6 when target = beta/12.
    pub fn calibrated(fp: &FlowParams, target: f64) -> Self {
        let multiplier = 1.0 / 3.0;
        let gs = fp.gbar_star;
        let k = fp.mass_multiplier();
        ToyParams {
            theta_g: target * (fp.l_eps() - 1.0) * gs.powf(-1.5),
            theta_r: target * (1.0 - multiplier) * gs.powf(-0.4375) / unit_norm(fp),
            use_b: false,
            mass_coeff: target * (k - 1.0) / (fp.l_eps().powi(2) * gs.powf(1.0 / 6.0)),
            multiplier,
        }
    }

    pub fn zero() -> Self {
        ToyParams { theta_g: 0.0, theta_r: 0.0, use_b: false, mass_coeff: 0.0, multiplier: 1.0 / 3.0 }
    }
}

#[derive(Debug, Clone)]
pub struct PolyToyModel {
    pub params: ToyParams,
    pub fp: FlowParams,
    /// coefficient b in xi_mu = -L^(2 eps) b g^2
    pub b: f64,
    consts: ModelConstants,
    fixed: FixedPoint,
}

impl PolyToyModel {
    pub fn new(params: ToyParams, fp: &FlowParams, ks: Option<&KernelSet>) -> Result<Self> {
        Self::with_audit(params, fp, ks, 1000, 0)
    }

    pub fn with_audit(params: ToyParams, fp: &FlowParams, ks: Option<&KernelSet>, samples: usize, seed: u64) -> Result<Self> {
        let ToyParams { theta_g, theta_r, multiplier, .. } = params;
        if !(theta_g >= 0.0 && theta_r >= 0.0 && theta_g.is_finite() && theta_r.is_finite()) {
            return Err(Error::Domain("toy coefficients must be finite and nonnegative".into()));
        }
        if !(multiplier > 0.0 && multiplier < 1.0) {
            return Err(Error::Domain(format!("multiplier {multiplier} outside (0, 1)")));
        }
        let b = if params.use_b {
            ks.ok_or_else(|| Error::Usage("use_b requires a kernel set".into()))?.b_coeff
        } else {
            params.mass_coeff
        };
        let nw = NormWeights::standard(fp);
        let gs = fp.gbar_star;
        let le2 = fp.l_eps().powi(2);
        // suprema over the domain |g - gbar| < gbar / 2, gbar <= gbar*
        let top = 1.5f64.powi(3);
        let consts = ModelConstants {
            b_g: top * theta_g * gs.powf(3.0 - 2.75 + nw.eta),
            b_mu: 2.25 * le2 * b.abs(),
            b_rxi: top * theta_r * gs.powf(0.25) * unit_norm(fp),
            c_r: multiplier * norm_growth_allowance(fp),
            ..Default::default()
        };
        let g = fixed_coupling(fp, theta_g)?;
        let fixed = FixedPoint {
            g,
            mu: le2 * b * g * g / (fp.mass_multiplier() - 1.0),
            r: {
                let mut r = vec![0.0; TOY_DIM];
                r[0] = theta_r * g.powi(3) / (1.0 - multiplier);
                r
            },
        };
        let m = PolyToyModel { params, fp: *fp, b, consts, fixed };
        require_contract(&m, fp, &nw, samples, seed)?;
        Ok(m)
    }
}

/// Norm of the first basis vector at gbar*, the largest it gets on the orbit.
fn unit_norm(fp: &FlowParams) -> f64 {
    let mut e = vec![0.0; TOY_DIM];
    e[0] = 1.0;
    calibrated_r_norm(&e, fp.gbar_star, &NormWeights::standard(fp)).expect("gbar* > 0")
}

/// Smaller positive root of (L^eps - 1) - L^(2eps) a g + theta g^2.
fn fixed_coupling(fp: &FlowParams, theta: f64) -> Result<f64> {
    let (c0, q) = (fp.l_eps() - 1.0, fp.quad());
    let disc = q * q - 4.0 * theta * c0;
    if disc < 0.0 {
        return Err(Error::Model(format!("theta_g = {theta} removes the nontrivial fixed point")));
    }
    Ok(2.0 * c0 / (q + disc.sqrt()))
}

impl RgModel for PolyToyModel {
    fn name(&self) -> &str {
        "toy"
    }
    fn r_dim(&self) -> usize {
        TOY_DIM
    }
    fn remainders(&self, g: f64, _mu: f64, _r: &[f64]) -> Result<Remainders> {
        let g3 = g * g * g;
        let mut r = vec![0.0; TOY_DIM];
        r[0] = self.params.theta_r * g3;
        Ok(Remainders { g: self.params.theta_g * g3, mu: -self.fp.l_eps().powi(2) * self.b * g * g, r })
    }
    fn apply_linear(&self, _g: f64, _mu: f64, r: &[f64]) -> Vec<f64> {
        r.iter().map(|x| self.params.multiplier * x).collect()
    }
    fn constants(&self) -> ModelConstants {
        self.consts
    }
    fn fixed_point(&self) -> Option<FixedPoint> {
        Some(self.fixed.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp() -> FlowParams {
        FlowParams::new(2, 0.05, 2f64.ln() / (18.0 * std::f64::consts::PI.powi(2))).unwrap()
    }

    #[test]
    fn zero_coefficients_give_the_approximate_fixed_point() {
        let fp = fp();
        let m = PolyToyModel::new(ToyParams::zero(), &fp, None).unwrap();
        let x = m.fixed_point().unwrap();
        assert!((x.g - fp.gbar_star).abs() <= 1e-15 * fp.gbar_star);
        assert_eq!(x.mu, 0.0);
        assert!(x.r.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn fixed_point_is_stationary() {
        let fp = fp();
        let m = PolyToyModel::new(ToyParams::calibrated(&fp, 0.004), &fp, None).unwrap();
        let x = m.fixed_point().unwrap();
        let xi = m.remainders(x.g, x.mu, &x.r).unwrap();
        let g1 = fp.l_eps() * x.g - fp.quad() * x.g * x.g + xi.g;
        let mu1 = fp.mass_multiplier() * x.mu + xi.mu;
        let lin = m.apply_linear(x.g, x.mu, &x.r);
        assert!((g1 - x.g).abs() < 1e-15 * x.g);
        assert!((mu1 - x.mu).abs() < 1e-13 * x.mu.abs());
        assert!((lin[0] + xi.r[0] - x.r[0]).abs() < 1e-13 * x.r[0]);
    }

    #[test]
    fn oversized_coefficients_are_rejected() {
        let fp = fp();
        let mut p = ToyParams::calibrated(&fp, 0.004);
        p.theta_g = 1e9;
        assert!(matches!(PolyToyModel::new(p, &fp, None), Err(Error::Model(_))));
    }
}
