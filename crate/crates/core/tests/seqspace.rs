use std::f64::consts::PI;

use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crossover::error::{Error, Result};
use crossover::flow::{FlowParams, GbarSequence};
use crossover::models::{null_model, ModelConstants, PolyToyModel, Remainders, RgModel, ToyParams};
use crossover::seqspace::{
    apply_m, calibrated_r_norm, norm_growth_allowance, orbit, quadruple_norm, recursion_residual, solve_fixed_point,
    DeviationSequence, NormWeights, SolverConfig,
};

fn setup() -> (FlowParams, GbarSequence, NormWeights) {
    let fp = FlowParams::new(2, 0.05, 2f64.ln() / (18.0 * PI * PI)).unwrap();
    let gs = GbarSequence::build(0.3, 80, 100, &fp).unwrap();
    (fp, gs, NormWeights::standard(&fp))
}

/// Constant mass remainder, irrelevant remainder r0 + theta g^3 along the first axis, and a
/// multiple of the identity as linear map.
struct Stub {
    mu: f64,
    r0: f64,
    theta: f64,
    c: f64,
}

impl RgModel for Stub {
    fn name(&self) -> &str {
        "stub"
    }
    fn r_dim(&self) -> usize {
        2
    }
    fn remainders(&self, g: f64, _mu: f64, _r: &[f64]) -> Result<Remainders> {
        Ok(Remainders { g: 0.0, mu: self.mu, r: vec![self.r0 + self.theta * g.powi(3), 0.0] })
    }
    fn apply_linear(&self, _g: f64, _mu: f64, r: &[f64]) -> Vec<f64> {
        r.iter().map(|x| self.c * x).collect()
    }
    fn constants(&self) -> ModelConstants {
        ModelConstants { c_r: 1.5 * self.c, ..Default::default() }
    }
}

fn toy(fp: &FlowParams, cfg: &SolverConfig) -> PolyToyModel {
    PolyToyModel::new(ToyParams::calibrated(fp, cfg.beta / 12.0), fp, None).unwrap()
}

/// A sequence whose weighted entries are uniform in [-amp, amp].
fn random_sequence(gs: &GbarSequence, nw: &NormWeights, dim: usize, amp: f64, seed: u64) -> DeviationSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ds = DeviationSequence::zeros_like(gs, dim);
    for n in gs.indices() {
        let g = gs.get(n);
        let i = ds.idx(n);
        ds.dg[i] = amp * rng.gen_range(-1.0..1.0) * g.powf(nw.g_exponent(n));
        ds.mu[i] = amp * rng.gen_range(-1.0..1.0) * g.powf(nw.mu_exponent());
        let r: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let s = amp * rng.gen_range(0.0..1.0) * g.powf(nw.r_exponent()) / calibrated_r_norm(&r, g, nw).unwrap();
        ds.r_at_mut(n).iter_mut().zip(&r).for_each(|(d, x)| *d = s * x);
    }
    ds
}

#[test]
fn norm_of_simple_sequences() {
    let (_, gs, nw) = setup();
    let m = null_model();
    let mut ds = DeviationSequence::zeros_like(&gs, 3);
    assert_eq!(quadruple_norm(&ds, &gs, &nw, &m).unwrap(), 0.0);
    let i = ds.idx(5);
    ds.mu[i] = gs.get(5).powf(2.0 - nw.delta);
    assert_relative_eq!(quadruple_norm(&ds, &gs, &nw, &m).unwrap(), 1.0, max_relative = 1e-14);
    for g in [0.3, 2.0] {
        assert_eq!(calibrated_r_norm(&[1.0], g, &nw).unwrap(), f64::max(1.0, g * g));
    }
    assert!(matches!(calibrated_r_norm(&[1.0], 0.0, &nw), Err(Error::Domain(_))));
}

#[test]
fn calibrated_norms_are_equivalent() {
    let (_, _, nw) = setup();
    let r = [0.3, -1.0, 0.2, 0.05];
    let (g1, g2) = (0.7, 1.9);
    let ratio = calibrated_r_norm(&r, g2, &nw).unwrap() / calibrated_r_norm(&r, g1, &nw).unwrap();
    let weight = |g: f64, j: i32| f64::max(nw.h_star.powi(j), g * g * g.powf(-0.25 * j as f64));
    let bound = (0..4).map(|j| weight(g2, j) / weight(g1, j)).fold(0.0, f64::max);
    assert!(ratio.is_finite() && ratio <= bound * (1.0 + 1e-12));
}

#[test]
fn null_model_maps_zero_to_zero() {
    let (_, gs, nw) = setup();
    let m = null_model();
    let zero = DeviationSequence::zeros_like(&gs, 3);
    let (image, _) = apply_m(&zero, &gs, &nw, &m).unwrap();
    assert_eq!(image, zero);
    assert_eq!(recursion_residual(&zero, &gs, &nw, &m).unwrap(), 0.0);
}

#[test]
fn constant_remainders_give_geometric_sums() {
    let (fp, gs, nw) = setup();
    let stub = Stub { mu: 1e-3, r0: 2e-3, theta: 0.0, c: 0.25 };
    let (image, _) = apply_m(&DeviationSequence::zeros_like(&gs, 2), &gs, &nw, &stub).unwrap();
    let q = 1.0 / fp.mass_multiplier();
    let mu = -stub.mu * q / (1.0 - q);
    let r = stub.r0 / (1.0 - stub.c);
    for n in gs.lo() + 40..=gs.hi() - 40 {
        assert_relative_eq!(image.mu_at(n), mu, max_relative = 1e-12);
        assert_relative_eq!(image.r_at(n)[0], r, max_relative = 1e-12);
        assert_eq!(image.r_at(n)[1], 0.0);
    }
}

#[test]
fn streaming_and_summed_irrelevant_parts_agree() {
    let (_, gs, nw) = setup();
    let stub = Stub { mu: 0.0, r0: 0.0, theta: 1e-4, c: 0.3 };
    let ds = random_sequence(&gs, &nw, 2, 0.01, 3);
    let (image, _) = apply_m(&ds, &gs, &nw, &stub).unwrap();
    let xi = |p: i64| stub.theta * (gs.get(p) + ds.dg_at(p)).powi(3);
    for n in gs.indices() {
        let summed: f64 = (gs.lo()..n).map(|p| stub.c.powi((n - 1 - p) as i32) * xi(p)).sum();
        assert!((image.r_at(n)[0] - summed).abs() <= 1e-12 * summed.abs().max(1e-300), "n = {n}");
    }
}

#[test]
fn fixed_point_solves_the_recursion_and_defects_are_linear() {
    let (fp, gs, nw) = setup();
    let cfg = SolverConfig::for_omega0(0.3);
    let m = toy(&fp, &cfg);
    let (ds, rep) = solve_fixed_point(&DeviationSequence::zeros_like(&gs, m.r_dim()), &cfg, &gs, &nw, &m).unwrap();
    assert!(rep.converged);
    assert!(rep.measured_contraction.iter().all(|&c| c <= cfg.contraction_budget + 0.05));
    let base = recursion_residual(&ds, &gs, &nw, &m).unwrap();
    assert!(base < 1e-10, "{base}");
    assert_eq!(ds.dg_at(0), 0.0);
    assert_eq!(orbit(&ds, &gs)[gs.n_minus], 0.3 * fp.gbar_star);
    // the solved window is in the interior of the domain, so a small kick gives a proportional defect
    let i = ds.idx(10);
    let kick = |h: f64| {
        let mut p = ds.clone();
        p.mu[i] += h * gs.get(10).powf(nw.mu_exponent());
        recursion_residual(&p, &gs, &nw, &m).unwrap()
    };
    let (r1, r2) = (kick(1e-6), kick(2e-6));
    assert!(r1 > 100.0 * base);
    assert_relative_eq!(r2 / r1, 2.0, max_relative = 1e-3);
}

#[test]
fn solver_refuses_oversized_starts_and_weak_contraction() {
    let (_, gs, nw) = setup();
    let cfg = SolverConfig::for_omega0(0.3);
    let m = null_model();
    let big = random_sequence(&gs, &nw, 3, cfg.beta, 1);
    assert!(matches!(solve_fixed_point(&big, &cfg, &gs, &nw, &m), Err(Error::Precondition { .. })));
    let weak = Stub { mu: 0.0, r0: 0.0, theta: 0.0, c: 0.45 };
    let zero = DeviationSequence::zeros_like(&gs, 2);
    assert!(matches!(solve_fixed_point(&zero, &cfg, &gs, &nw, &weak), Err(Error::Precondition { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn norm_is_homogeneous_with_triangle_inequality(seed in any::<u64>(), s in -4.0f64..4.0) {
        let (_, gs, nw) = setup();
        let m = null_model();
        let a = random_sequence(&gs, &nw, 3, 1.0, seed);
        let b = random_sequence(&gs, &nw, 3, 0.5, seed ^ 0x5eed);
        let na = quadruple_norm(&a, &gs, &nw, &m).unwrap();
        let nb = quadruple_norm(&b, &gs, &nw, &m).unwrap();
        prop_assert!((quadruple_norm(&a.scaled(s), &gs, &nw, &m).unwrap() - s.abs() * na).abs() <= 1e-12 * na);
        let sum = a.sub(&b.scaled(-1.0)).unwrap();
        prop_assert!(quadruple_norm(&sum, &gs, &nw, &m).unwrap() <= (na + nb) * (1.0 + 1e-12));
    }

    #[test]
    fn calibrated_norm_triangle_inequality(x in prop::collection::vec(-1.0f64..1.0, 1..=10), g in 0.01f64..20.0, s in -3.0f64..3.0) {
        let (fp, _, nw) = setup();
        let y: Vec<f64> = x.iter().rev().map(|v| 0.5 * v).collect();
        let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let n = |v: &[f64]| calibrated_r_norm(v, g, &nw).unwrap();
        prop_assert!(n(&sum) <= (n(&x) + n(&y)) * (1.0 + 1e-12));
        let scaled: Vec<f64> = x.iter().map(|v| s * v).collect();
        prop_assert!((n(&scaled) - s.abs() * n(&x)).abs() <= 1e-12 * n(&x));
        // moving the calibrator one step along the flow costs at most the growth allowance
        let g = g.min(fp.gbar_star);
        prop_assert!(calibrated_r_norm(&x, fp.f(g).unwrap(), &nw).unwrap() <= norm_growth_allowance(&fp) * n(&x) * (1.0 + 1e-12));
    }

    #[test]
    fn map_pins_delta_g_at_zero_and_stays_in_the_small_ball(seed in any::<u64>(), amp in 0.0f64..1.0) {
        let (fp, gs, nw) = setup();
        let cfg = SolverConfig::for_omega0(0.3);
        let m = toy(&fp, &cfg);
        let ds = random_sequence(&gs, &nw, m.r_dim(), amp * cfg.beta, seed);
        let (image, _) = apply_m(&ds, &gs, &nw, &m).unwrap();
        prop_assert_eq!(image.dg_at(0), 0.0);
        let norm = quadruple_norm(&image, &gs, &nw, &m).unwrap();
        prop_assert!(norm <= cfg.beta / 6.0, "image norm {} vs beta/6 = {}", norm, cfg.beta / 6.0);
    }
}
