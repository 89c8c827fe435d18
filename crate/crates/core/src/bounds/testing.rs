//! Neyman-Pearson testing and the secret-key bounds built on it.

use crate::error::{Error, Result};
use crate::probcore::{FiniteDistribution, JointSource};

/// `β_ε(P, Q) = inf{Q[T] : P[T] ≥ 1 − ε}` over randomized tests.
pub fn beta_eps<K: Ord + Clone>(p: &FiniteDistribution<K>, q: &FiniteDistribution<K>, eps: f64) -> Result<f64> {
    if !p.same_universe(q) {
        return Err(Error::MismatchedSupport);
    }
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::ParameterRange(format!("eps {eps} not in [0,1]")));
    }
    let mut cells: Vec<(f64, f64)> =
        p.iter().zip(q.iter()).map(|((_, a), (_, b))| (a, b)).filter(|(a, _)| *a > 0.0).collect();
    // decreasing likelihood ratio a/b, compared as a1*b2 > a2*b1 to handle b = 0
    cells.sort_by(|x, y| (y.0 * x.1).partial_cmp(&(x.0 * y.1)).expect("finite masses"));
    let mut need = 1.0 - eps;
    let mut beta = 0.0;
    for (a, b) in cells {
        if need <= 0.0 {
            break;
        }
        if a <= need {
            need -= a;
            beta += b;
        } else {
            beta += b * need / a;
            need = 0.0;
        }
    }
    Ok(beta.clamp(0.0, 1.0))
}

/// `λ − log((P[log P/Q < λ] − ε)₊)`; `+∞` when the bracket is not positive.
pub fn beta_eps_upper<K: Ord + Clone>(
    p: &FiniteDistribution<K>,
    q: &FiniteDistribution<K>,
    eps: f64,
    lambda: f64,
) -> Result<f64> {
    if !p.same_universe(q) {
        return Err(Error::MismatchedSupport);
    }
    let mass: f64 = p
        .iter()
        .zip(q.iter())
        .filter(|((_, a), (_, b))| *a > 0.0 && *b > 0.0 && (a / b).log2() < lambda)
        .map(|((_, a), _)| a)
        .sum();
    let gap = mass - eps;
    Ok(if gap > 0.0 { lambda - gap.log2() } else { f64::INFINITY })
}

/// `−log β_{ε+η}(P_XY, Q_X × Q_Y) + 2 log(1/η)`.
pub fn sk_bounds(source: &JointSource, eps: f64, eta: f64, q_x: &[f64], q_y: &[f64]) -> Result<f64> {
    if !(0.0..1.0).contains(&eps) || !(eta > 0.0 && eta < 1.0 - eps) {
        return Err(Error::ParameterRange(format!("need 0 <= eps < 1 and 0 < eta < 1 - eps, got {eps}, {eta}")));
    }
    if q_x.len() != source.nx() || q_y.len() != source.ny() {
        return Err(Error::AlphabetMismatch("reference marginals do not match the source".into()));
    }
    let ny = source.ny();
    let cells = 0..source.nx() * ny;
    let p = FiniteDistribution::new(cells.clone().map(|c| (c, source.mass()[c])))?;
    let q = FiniteDistribution::new(cells.map(|c| (c, q_x[c / ny] * q_y[c % ny])))?;
    let beta = beta_eps(&p, &q, eps + eta)?;
    Ok(-beta.log2() + 2.0 * (1.0 / eta).log2())
}

/// `s − log|V| − 2 log(1/(2ε))`.
pub fn sk_chain(s: f64, log_v: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) || log_v < 0.0 {
        return Err(Error::ParameterRange(format!("need 0 < eps < 1 and log|V| >= 0, got {eps}, {log_v}")));
    }
    Ok(s - log_v - 2.0 * (1.0 / (2.0 * eps)).log2())
}
