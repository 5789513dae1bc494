use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOpts {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOpts {
    fn default() -> Self {
        QuadOpts { abs_tol: 1e-14, rel_tol: 1e-12, max_intervals: 4000 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss-Kronrod (7/15) over the panels delimited by `points`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, points: &[f64], opts: QuadOpts) -> Result<QuadResult> {
    let mut pts: Vec<f64> = points.iter().copied().filter(|x| x.is_finite()).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    if pts.len() < 2 {
        return Ok(QuadResult { value: 0.0, error: 0.0, evals: 0 });
    }
    let mut segs: Vec<(f64, f64, f64, f64)> = Vec::new();
    for w in pts.windows(2) {
        let (v, e) = kronrod(&f, w[0], w[1]);
        segs.push((w[0], w[1], v, e));
    }
    let mut evals = 15 * segs.len();
    loop {
        let total: f64 = segs.iter().map(|s| s.2).sum();
        let err: f64 = segs.iter().map(|s| s.3).sum();
        if !total.is_finite() {
            return Err(Error::Numerical("non-finite integrand value".into()));
        }
        if err <= opts.abs_tol.max(opts.rel_tol * total.abs()) {
            return Ok(QuadResult { value: total, error: err, evals });
        }
        if segs.len() >= opts.max_intervals {
            return Err(Error::Numerical(format!(
                "quadrature did not converge: estimate {total:e}, error {err:e} after {} panels",
                segs.len()
            )));
        }
        let (idx, _) = segs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .3.partial_cmp(&b.1 .3).unwrap())
            .unwrap();
        let (a, b, _, _) = segs.swap_remove(idx);
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            // interval can no longer be bisected in floating point
            return Ok(QuadResult { value: total, error: err, evals });
        }
        let (v1, e1) = kronrod(&f, a, m);
        let (v2, e2) = kronrod(&f, m, b);
        evals += 30;
        segs.push((a, m, v1, e1));
        segs.push((m, b, v2, e2));
    }
}

/// Piecewise Chebyshev interpolant on uniform panels.
#[derive(Debug, Clone)]
pub struct ChebTable {
    lo: f64,
    hi: f64,
    panels: usize,
    deg: usize,
    coeffs: Vec<f64>,
}

impl ChebTable {
    pub fn build<F: FnMut(f64) -> Result<f64>>(mut f: F, lo: f64, hi: f64, panels: usize, deg: usize) -> Result<Self> {
        let n = deg + 1;
        let width = (hi - lo) / panels as f64;
        let mut coeffs = Vec::with_capacity(panels * n);
        let mut vals = vec![0.0; n];
        for p in 0..panels {
            let a = lo + width * p as f64;
            for (k, v) in vals.iter_mut().enumerate() {
                let t = (std::f64::consts::PI * (k as f64 + 0.5) / n as f64).cos();
                *v = f(a + 0.5 * width * (t + 1.0))?;
            }
            for j in 0..n {
                let mut s = 0.0;
                for (k, v) in vals.iter().enumerate() {
                    s += v * (std::f64::consts::PI * j as f64 * (k as f64 + 0.5) / n as f64).cos();
                }
                let c = 2.0 * s / n as f64;
                coeffs.push(if j == 0 { 0.5 * c } else { c });
            }
        }
        Ok(ChebTable { lo, hi, panels, deg, coeffs })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let width = (self.hi - self.lo) / self.panels as f64;
        let mut p = ((x - self.lo) / width).floor() as isize;
        p = p.clamp(0, self.panels as isize - 1);
        let a = self.lo + width * p as f64;
        let t = 2.0 * (x - a) / width - 1.0;
        let c = &self.coeffs[p as usize * (self.deg + 1)..(p as usize + 1) * (self.deg + 1)];
        let (mut b1, mut b2) = (0.0, 0.0);
        for &ck in c.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + ck;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + c[0]
    }
}
