//! Optimal type-II error β_ε of binary hypothesis testing and its
//! information-spectrum upper bound on −log β_ε.

use icdensity::bounds::{beta_eps, beta_eps_upper};
use icdensity::probcore::FiniteDistribution;

fn main() -> icdensity::Result<()> {
    let p = FiniteDistribution::new([(0u8, 0.5), (1, 0.5)])?;
    let q = FiniteDistribution::new([(0u8, 0.1), (1, 0.9)])?;
    for eps in [0.05, 0.1, 0.3, 0.5] {
        let beta = beta_eps(&p, &q, eps)?;
        let best = [-2.0, 0.0, 1.0, 2.0, 3.0]
            .iter()
            .map(|l| beta_eps_upper(&p, &q, eps, *l))
            .collect::<icdensity::Result<Vec<_>>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        println!("eps {eps:.2}: beta {beta:.4}, -log beta {:.4}, best upper bound {best:.4}", -beta.log2());
    }
    Ok(())
}
