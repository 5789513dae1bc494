//! Concrete RG models behind a common remainder/linear-map interface.

pub mod hermite;
pub mod hier;
pub mod oracle;
pub mod toy;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::FlowParams;
use crate::seqspace::{calibrated_r_norm, NormWeights};

pub use hier::{HierModel, HierParams, HierPotential};
pub use toy::{PolyToyModel, ToyParams};

/// Declared constants of the model contract.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ModelConstants {
    pub a_g: f64,
    pub a_mu: f64,
    pub a_r: f64,
    pub b_g: f64,
    pub b_mu: f64,
    pub b_rxi: f64,
    /// contraction of the linear irrelevant map, measured between the norms at gbar and f(gbar)
    pub c_r: f64,
}

impl Default for ModelConstants {
    fn default() -> Self {
        ModelConstants { a_g: 0.5, a_mu: 1.0, a_r: 1.0, b_g: 0.0, b_mu: 0.0, b_rxi: 0.0, c_r: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Remainders {
    pub g: f64,
    pub mu: f64,
    pub r: Vec<f64>,
}

/// Infrared fixed point (g*, mu*, R*) when the model knows it in closed form.
#[derive(Debug, Clone, Serialize)]
pub struct FixedPoint {
    pub g: f64,
    pub mu: f64,
    pub r: Vec<f64>,
}

/// One RG step is g' = L^eps g - L^(2eps) a g^2 + xi_g, mu' = L^((3+eps)/2) mu + xi_mu,
/// R' = Lin(g, mu) R + xi_R. Implementations must be reentrant.
pub trait RgModel: Sync + Send {
    fn name(&self) -> &str;
    fn r_dim(&self) -> usize;
    fn remainders(&self, g: f64, mu: f64, r: &[f64]) -> Result<Remainders>;
    fn apply_linear(&self, g: f64, mu: f64, r: &[f64]) -> Vec<f64>;
    fn constants(&self) -> ModelConstants;

    fn r_norm(&self, r: &[f64], gbar: f64, nw: &NormWeights) -> f64 {
        calibrated_r_norm(r, gbar, nw).unwrap_or(f64::INFINITY)
    }

    fn fixed_point(&self) -> Option<FixedPoint> {
        None
    }
}

/// All remainders vanish; the linear map is a multiple of the identity.
#[derive(Debug, Clone)]
pub struct NullModel {
    pub dim: usize,
    pub multiplier: f64,
}

pub fn null_model() -> NullModel {
    NullModel { dim: 3, multiplier: 1.0 / 3.0 }
}

impl RgModel for NullModel {
    fn name(&self) -> &str {
        "null"
    }
    fn r_dim(&self) -> usize {
        self.dim
    }
    fn remainders(&self, _g: f64, _mu: f64, _r: &[f64]) -> Result<Remainders> {
        Ok(Remainders { g: 0.0, mu: 0.0, r: vec![0.0; self.dim] })
    }
    fn apply_linear(&self, _g: f64, _mu: f64, r: &[f64]) -> Vec<f64> {
        r.iter().map(|x| self.multiplier * x).collect()
    }
    fn constants(&self) -> ModelConstants {
        // the 3/2 allowance covers the change of calibrator between consecutive scales
        ModelConstants { c_r: 1.5 * self.multiplier, ..Default::default() }
    }
}

/// One sampled point of the model domain, with ratios of remainder size to the contract scale.
#[derive(Debug, Clone, Serialize)]
pub struct AuditPoint {
    pub gbar: f64,
    pub g: f64,
    pub mu: f64,
    pub r: Vec<f64>,
    /// |xi_g| / gbar^(11/4-eta), |xi_mu| / gbar^2, |||xi_R||| / gbar^(11/4)
    pub ratios: [f64; 3],
    /// |||Lin R|||_f(gbar) / |||R|||_gbar
    pub contraction: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContractAudit {
    pub model: String,
    pub samples: usize,
    pub seed: u64,
    pub declared: ModelConstants,
    pub max_ratio_g: f64,
    pub max_ratio_mu: f64,
    pub max_ratio_r: f64,
    pub max_contraction: f64,
    pub violations: usize,
    pub worst: Option<AuditPoint>,
}

impl ContractAudit {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Domain points: gbar log-uniform in [gbar* 1e-6, gbar*], the three coordinates uniform in
/// their domains (up to 0.99 of each radius), R along a random Gaussian direction.
/// (gbar, g, mu, R, direction of the contraction probe)
pub type DomainPoint = (f64, f64, f64, Vec<f64>, Vec<f64>);

pub fn sample_domain(
    fp: &FlowParams,
    nw: &NormWeights,
    c: &ModelConstants,
    dim: usize,
    samples: usize,
    seed: u64,
    r_norm: &dyn Fn(&[f64], f64) -> f64,
) -> Vec<DomainPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let top = fp.gbar_star.ln();
    let bottom = top + (1e-6f64).ln();
    (0..samples)
        .map(|_| {
            let gbar = rng.gen_range(bottom..top).exp();
            let g = gbar * (1.0 + 0.99 * c.a_g * rng.gen_range(-1.0..1.0));
            let mu = 0.99 * c.a_mu * gbar.powf(nw.mu_exponent()) * rng.gen_range(-1.0..1.0);
            let mut dir: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            let nd = r_norm(&dir, gbar);
            let rad = 0.99 * c.a_r * gbar.powf(nw.r_exponent()) * rng.gen_range(0.0..1.0) / nd;
            dir.iter_mut().for_each(|x| *x *= rad);
            let probe: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            (gbar, g, mu, dir, probe)
        })
        .collect()
}

fn audit_ratios(
    model: &dyn RgModel,
    fp: &FlowParams,
    nw: &NormWeights,
    pt: (f64, f64, f64, Vec<f64>, Vec<f64>),
) -> Result<AuditPoint> {
    let (gbar, g, mu, r, probe) = pt;
    let xi = model.remainders(g, mu, &r)?;
    let ratios = [
        xi.g.abs() / gbar.powf(2.75 - nw.eta),
        xi.mu.abs() / (gbar * gbar),
        model.r_norm(&xi.r, gbar, nw) / gbar.powf(2.75),
    ];
    let lin = model.apply_linear(g, mu, &probe);
    let contraction = model.r_norm(&lin, fp.f_unchecked(gbar), nw) / model.r_norm(&probe, gbar, nw);
    Ok(AuditPoint { gbar, g, mu, r, ratios, contraction })
}

/// Sampled check of the declared contract constants.
pub fn contract_audit(
    model: &dyn RgModel,
    fp: &FlowParams,
    nw: &NormWeights,
    samples: usize,
    seed: u64,
) -> Result<ContractAudit> {
    let c = model.constants();
    let pts = sample_domain(fp, nw, &c, model.r_dim(), samples, seed, &|r, g| model.r_norm(r, g, nw));
    let res: Vec<AuditPoint> = pts.into_par_iter().map(|p| audit_ratios(model, fp, nw, p)).collect::<Result<_>>()?;
    let bound = [c.b_g, c.b_mu, c.b_rxi];
    let excess = |p: &AuditPoint| {
        let mut e = p.contraction / c.c_r.max(f64::MIN_POSITIVE);
        for (ratio, b) in p.ratios.iter().zip(bound) {
            let r = if b > 0.0 { ratio / b } else if *ratio > 0.0 { f64::INFINITY } else { 0.0 };
            e = e.max(r);
        }
        e
    };
    let mut out = ContractAudit {
        model: model.name().to_string(),
        samples,
        seed,
        declared: c,
        max_ratio_g: 0.0,
        max_ratio_mu: 0.0,
        max_ratio_r: 0.0,
        max_contraction: 0.0,
        violations: 0,
        worst: None,
    };
    let mut worst = -1.0;
    for p in res {
        out.max_ratio_g = out.max_ratio_g.max(p.ratios[0]);
        out.max_ratio_mu = out.max_ratio_mu.max(p.ratios[1]);
        out.max_ratio_r = out.max_ratio_r.max(p.ratios[2]);
        out.max_contraction = out.max_contraction.max(p.contraction);
        let e = excess(&p);
        if e > 1.0 {
            out.violations += 1;
        }
        if e > worst {
            worst = e;
            out.worst = Some(p);
        }
    }
    Ok(out)
}

/// Construction-time audit that turns violations into a model error naming the worst point.
pub(crate) fn require_contract(model: &dyn RgModel, fp: &FlowParams, nw: &NormWeights, samples: usize, seed: u64) -> Result<()> {
    let a = contract_audit(model, fp, nw, samples, seed)?;
    if a.passed() {
        return Ok(());
    }
    let w = a.worst.expect("violations imply a worst point");
    Err(Error::Model(format!(
        "{}: {} of {} sampled points violate the contract; worst at gbar = {:e}, g = {:e}, mu = {:e}, ratios = {:?}, contraction = {:e}",
        a.model, a.violations, a.samples, w.gbar, w.g, w.mu, w.ratios, w.contraction
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp() -> FlowParams {
        FlowParams::new(2, 0.05, 0.004).unwrap()
    }

    /// Remainders deliberately above any sensible contract constant.
    struct Loud;

    impl RgModel for Loud {
        fn name(&self) -> &str {
            "loud"
        }
        fn r_dim(&self) -> usize {
            1
        }
        fn remainders(&self, g: f64, _mu: f64, _r: &[f64]) -> Result<Remainders> {
            Ok(Remainders { g: g * g, mu: 0.0, r: vec![0.0] })
        }
        fn apply_linear(&self, _g: f64, _mu: f64, r: &[f64]) -> Vec<f64> {
            r.to_vec()
        }
        fn constants(&self) -> ModelConstants {
            ModelConstants { b_g: 1.0, ..Default::default() }
        }
    }

    #[test]
    fn null_model_passes_its_audit() {
        let fp = fp();
        let nw = NormWeights::standard(&fp);
        let a = contract_audit(&null_model(), &fp, &nw, 200, 3).unwrap();
        assert!(a.passed());
        assert_eq!(a.max_ratio_g, 0.0);
        assert!(a.max_contraction <= null_model().constants().c_r);
    }

    #[test]
    fn audit_is_reproducible() {
        let fp = fp();
        let nw = NormWeights::standard(&fp);
        let x = contract_audit(&Loud, &fp, &nw, 100, 11).unwrap();
        let y = contract_audit(&Loud, &fp, &nw, 100, 11).unwrap();
        assert_eq!(x.max_ratio_g, y.max_ratio_g);
        assert_eq!(x.violations, y.violations);
    }

    #[test]
    fn violations_become_model_errors() {
        let fp = fp();
        let nw = NormWeights::standard(&fp);
        match require_contract(&Loud, &fp, &nw, 100, 0) {
            Err(Error::Model(msg)) => assert!(msg.contains("loud") && msg.contains("worst")),
            other => panic!("expected a model error, got {other:?}"),
        }
    }
}
