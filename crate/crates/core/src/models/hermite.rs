//! Gauss-Hermite rules for expectations under a centred normal law, and Hermite polynomials.

use std::f64::consts::PI;

/// Nodes and weights with sum_i w_i f(x_i) ~ E[f(X)], X ~ N(0, 1).
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        let pim4 = PI.powf(-0.25);
        let nf = n as f64;
        let m = n.div_ceil(2);
        let mut z: f64 = 0.0;
        for i in 0..m {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * x[0],
                3 => 1.91 * z - 0.91 * x[1],
                _ => 2.0 * z - x[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..200 {
                let (mut p1, mut p2) = (pim4, 0.0);
                for j in 1..=n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            x[i] = z;
            x[n - 1 - i] = -z;
            w[i] = 2.0 / (pp * pp);
            w[n - 1 - i] = w[i];
        }
        // physicists' rule for exp(-x^2) -> expectation under N(0, 1)
        let s = 2f64.sqrt();
        let nodes = x.iter().rev().map(|v| v * s).collect();
        let weights = w.iter().rev().map(|v| v / PI.sqrt()).collect();
        GaussHermite { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Probabilists' Hermite polynomials He_0..=He_kmax at x.
pub fn hermite_he(x: f64, kmax: usize) -> Vec<f64> {
    let mut h = vec![0.0; kmax + 1];
    h[0] = 1.0;
    if kmax >= 1 {
        h[1] = x;
    }
    for k in 1..kmax {
        h[k + 1] = x * h[k] - k as f64 * h[k - 1];
    }
    h
}

/// Wick power :x^k: with respect to variance `var`.
pub fn wick_power(x: f64, k: usize, var: f64) -> f64 {
    let s = var.sqrt();
    s.powi(k as i32) * hermite_he(x / s, k)[k]
}
