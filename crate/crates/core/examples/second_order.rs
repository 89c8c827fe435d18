//! Exact ε-tails of n-fold IC spectra against the Gaussian second-order
//! prediction nμ + √(nV)·Q⁻¹(ε).

use icdensity::bounds::second_order_predict;
use icdensity::probcore::{Density, DensityModel, JointSource, TailSide};
use icdensity::protocol::{generators, transcript_law};

fn main() -> icdensity::Result<()> {
    let source = JointSource::dsbs(0.11)?;
    let base = transcript_law(&generators::send_x(&source), &source)?.spectrum(Density::Ic)?;
    let m = base.moments();
    println!("single copy: mean {:.4}, variance {:.4}", m.mean, m.variance);
    println!("{:>3} {:>6} {:>10} {:>10}", "n", "eps", "exact", "predicted");
    for n in [1usize, 2, 4, 8, 16, 32] {
        let sn = base.power(n)?;
        for eps in [0.1, 0.25] {
            let exact = sn.eps_tail(eps, TailSide::Lower)?;
            println!("{n:>3} {eps:>6} {exact:>10.3} {:>10.3}", second_order_predict(&m, n, eps)?);
        }
    }
    Ok(())
}
