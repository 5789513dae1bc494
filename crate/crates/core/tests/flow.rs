use std::f64::consts::PI;

use approx::assert_relative_eq;
use proptest::prelude::*;

use crossover::error::Error;
use crossover::flow::{step_bounds, FlowParams, GbarSequence};

fn params() -> impl Strategy<Value = FlowParams> {
    (2u32..=4, 0.01f64..0.3, 1e-3f64..2.0).prop_filter_map("L^eps < 2", |(l, eps, a)| FlowParams::new(l, eps, a).ok())
}

#[test]
fn fixed_points_and_derivatives() {
    let fp = FlowParams::new(2, 0.1, 0.004).unwrap();
    let le = 2f64.powf(0.1);
    assert_relative_eq!(fp.gbar_star, (le - 1.0) / (le * le * 0.004), max_relative = 1e-15);
    assert_eq!(fp.f(0.0).unwrap(), 0.0);
    assert!((fp.f(fp.gbar_star).unwrap() - fp.gbar_star).abs() <= 1e-14 * fp.gbar_star);
    assert_relative_eq!(fp.f_prime(fp.gbar_star).unwrap(), 2.0 - le, max_relative = 1e-12);
    assert_eq!(fp.f_prime(0.0).unwrap(), le);
    let mut x = 0.5 * fp.gbar_star;
    for _ in 0..2000 {
        x = fp.f(x).unwrap();
    }
    assert_relative_eq!(x, fp.gbar_star, max_relative = 1e-12);
}

#[test]
fn domain_is_enforced() {
    let fp = FlowParams::new(2, 0.1, 0.004).unwrap();
    assert!(matches!(fp.f(-1e-3), Err(Error::Domain(_))));
    assert!(matches!(fp.f(1.01 * fp.gbar_star), Err(Error::Domain(_))));
    assert!(matches!(fp.f_inverse(2.0 * fp.gbar_star), Err(Error::Domain(_))));
    assert!(FlowParams::new(2, 1.0, 0.1).is_err());
    assert!(FlowParams::new(1, 0.1, 0.1).is_err());
    assert!(FlowParams::new(2, 0.1, 0.0).is_err());
    assert!(GbarSequence::build(1.0, 3, 3, &fp).is_err());
}

#[test]
fn inverse_gives_the_backward_step() {
    let fp = FlowParams::new(2, 0.05, 0.01).unwrap();
    let (w0, le) = (0.3, fp.l_eps());
    assert_eq!(fp.f_inverse(0.0).unwrap(), 0.0);
    let w = fp.f_inverse(w0 * fp.gbar_star).unwrap() / fp.gbar_star;
    let want = (le - (le * le - 4.0 * w0 * (le - 1.0)).sqrt()) / (2.0 * (le - 1.0));
    assert_relative_eq!(w, want, max_relative = 1e-10);
    for i in 0..100 {
        let y = fp.gbar_star * i as f64 / 99.0;
        let back = fp.f(fp.f_inverse(y).unwrap()).unwrap();
        assert!((back - y).abs() <= 1e-12 * y.max(f64::MIN_POSITIVE), "y = {y}");
    }
}

#[test]
fn first_forward_step_and_bounds_at_zero() {
    let fp = FlowParams::new(3, 0.05, 0.02).unwrap();
    let gs = GbarSequence::build(0.3, 5, 5, &fp).unwrap();
    let le = fp.l_eps();
    assert_eq!(gs.get(0), 0.3 * fp.gbar_star);
    assert_relative_eq!(gs.get(1) / fp.gbar_star, le * 0.3 - le * 0.09 + 0.09, max_relative = 1e-13);
    let (lo, hi) = step_bounds(0, 0.3, &fp);
    assert_relative_eq!(lo, gs.get(0), max_relative = 1e-15);
    assert_relative_eq!(hi, gs.get(0), max_relative = 1e-15);
    assert!(gs.try_get(6).is_err());
}

#[test]
fn sandwich_at_fifty_steps() {
    let fp = FlowParams::new(2, 0.05, 2f64.ln() / (18.0 * PI * PI)).unwrap();
    let gs = GbarSequence::build(0.3, 50, 50, &fp).unwrap();
    for n in [-50, 50] {
        let (lo, hi) = gs.step_bounds(n);
        assert!(lo <= gs.get(n) && gs.get(n) <= hi, "n = {n}");
    }
}

#[test]
fn fixed_point_scales_like_eps_at_small_eps() {
    for l in [2u32, 3] {
        let eps = 1e-4;
        let fp = FlowParams::new(l, eps, (l as f64).ln() / (18.0 * PI * PI)).unwrap();
        let ratio = fp.gbar_star / (18.0 * PI * PI * eps);
        assert!((ratio - 1.0).abs() < 0.01, "L = {l}: {ratio}");
    }
}

#[test]
fn backward_underflow_is_a_truncation_error() {
    let fp = FlowParams::new(2, 0.3, 0.01).unwrap();
    assert!(matches!(GbarSequence::build(0.3, 100_000, 1, &fp), Err(Error::Truncation(_))));
}

proptest! {
    #[test]
    fn forward_map_is_increasing_and_concave(fp in params(), x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let (x, y) = (x.min(y) * fp.gbar_star, x.max(y) * fp.gbar_star);
        prop_assume!(y - x > 1e-9 * fp.gbar_star);
        prop_assert!(fp.f(x).unwrap() < fp.f(y).unwrap());
        prop_assert!(fp.f_prime(x).unwrap() > fp.f_prime(y).unwrap());
        let mid = 0.5 * (x + y);
        prop_assert!(fp.f(mid).unwrap() >= 0.5 * (fp.f(x).unwrap() + fp.f(y).unwrap()));
        prop_assert!(fp.f(y).unwrap() <= fp.gbar_star * (1.0 + 1e-15));
    }

    #[test]
    fn inverse_round_trips(fp in params(), t in 0.0f64..=1.0) {
        let y = t * fp.gbar_star;
        let back = fp.f(fp.f_inverse(y).unwrap()).unwrap();
        prop_assert!((back - y).abs() <= 1e-12 * y.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn orbit_is_increasing_with_bounded_ratios_and_sandwiched(fp in params(), w0 in 0.01f64..0.99) {
        let gs = GbarSequence::build(w0, 120, 120, &fp).unwrap();
        let le = fp.l_eps();
        for n in gs.lo()..gs.hi() {
            let q = gs.get(n + 1) / gs.get(n);
            // the ratio reaches L^eps to rounding deep in the left tail
            prop_assert!(q > 2.0 - le && q <= le * (1.0 + 1e-14), "ratio {} at n = {}", q, n);
            prop_assert!(gs.get(n + 1) > gs.get(n) || (gs.get(n) - fp.gbar_star).abs() < 1e-14 * fp.gbar_star);
        }
        for n in gs.indices() {
            let (lo, hi) = step_bounds(n, w0, &fp);
            let g = gs.get(n);
            prop_assert!(lo * (1.0 - 1e-12) <= g && g <= hi * (1.0 + 1e-12), "n = {}", n);
        }
    }
}
