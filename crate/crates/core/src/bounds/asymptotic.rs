//! Second-order predictor and direct-product thresholds for `n` IID copies.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::probcore::{q_inv, MomentSummary, SpectrumTable};

/// `n·IC + √(nV)·Q⁻¹(ε)`.
pub fn second_order_predict(m: &MomentSummary, n: usize, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::ParameterRange(format!("eps {eps} not in (0,1)")));
    }
    if m.variance <= 1e-15 {
        return Err(Error::ZeroVariance);
    }
    let n = n as f64;
    let q = if eps == 0.5 { 0.0 } else { q_inv(eps)? };
    Ok(n * m.mean + (n * m.variance).sqrt() * q)
}

fn log2_mgf(s: &SpectrumTable, t: f64, theta: f64) -> f64 {
    // log2 E[2^{−t(D−θ)}] via log-sum-exp
    let exps: Vec<(f64, f64)> = s.atoms().iter().map(|(v, p)| (-t * (v - theta), *p)).collect();
    let m = exps.iter().map(|e| e.0).fold(f64::NEG_INFINITY, f64::max);
    m + exps.iter().map(|(e, p)| p * 2f64.powf(e - m)).sum::<f64>().log2()
}

/// `sup_{s ≥ 0} −log E[2^{−s(D − θ)}]`, the exponent of `Pr[Σ D_i ≤ nθ]`.
pub fn chernoff_exponent(s: &SpectrumTable, theta: f64) -> f64 {
    if s.min() >= theta {
        return if s.min() > theta { f64::INFINITY } else { -s.prob_less(theta + 1e-12).log2() };
    }
    let f = |t: f64| -log2_mgf(s, t, theta);
    // f is concave; grow the bracket until f starts decreasing
    let mut hi = 1.0;
    while hi < 1e6 && f(2.0 * hi) > f(hi) {
        hi *= 2.0;
    }
    let hi = 2.0 * hi;
    let (mut a, mut b) = (0.0, hi);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd).max(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectProductReport {
    pub n: usize,
    pub delta: f64,
    /// `n[IC − δ]`.
    pub sim_threshold: f64,
    /// `n[H(F|X) + H(F|Y) − δ]`.
    pub func_threshold: f64,
    pub sim_vacuous: bool,
    pub func_vacuous: bool,
    /// Chernoff exponent of `Pr[ic(Πⁿ) ≤ n(IC − δ/3)]`.
    pub chernoff_exponent: f64,
    /// `2^{−E n}`.
    pub failure_bound: f64,
    /// Exact `Pr[ic(Πⁿ) ≤ n(IC − δ/3)]` when the convolution was computed.
    pub exact_lower_mass: Option<f64>,
}

/// Thresholds for `n` copies from the single-copy ic spectrum and `H(F|X) + H(F|Y)`.
/// The exact `n`-fold probability is computed when `n ≤ exact_limit`.
pub fn direct_product_thresholds(
    ic: &SpectrumTable,
    hsum_f: f64,
    n: usize,
    delta: f64,
    exact_limit: usize,
) -> Result<DirectProductReport> {
    if !(delta > 0.0) {
        return Err(Error::ParameterRange(format!("delta {delta} must be positive")));
    }
    if n == 0 {
        return Err(Error::ParameterRange("n must be positive".into()));
    }
    let nf = n as f64;
    let info = ic.mean();
    let sim_threshold = nf * (info - delta);
    let func_threshold = nf * (hsum_f - delta);
    let theta = info - delta / 3.0;
    let e = chernoff_exponent(ic, theta);
    let exact_lower_mass = if n <= exact_limit {
        let sn = ic.power(n)?;
        Some(1.0 - sn.prob_greater(nf * theta))
    } else {
        None
    };
    Ok(DirectProductReport {
        n,
        delta,
        sim_threshold,
        func_threshold,
        sim_vacuous: sim_threshold <= 0.0,
        func_vacuous: func_threshold <= 0.0,
        chernoff_exponent: e,
        failure_bound: 2f64.powf(-e * nf),
        exact_lower_mass,
    })
}
