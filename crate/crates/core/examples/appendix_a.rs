//! The four-region protocol where the lower ε-tail of the information
//! complexity density is 2n while IC itself is small.

use icdensity::bounds::{lower_bound, TailSpec};
use icdensity::probcore::{Density, DensityModel, TailSide};
use icdensity::protocol::appendix_a_example;

fn main() -> icdensity::Result<()> {
    for n in [8u32, 16, 32, 48] {
        let app = appendix_a_example(n)?;
        println!("n = {n}");
        for r in &app.regions {
            println!("  region {:>2}: mass {:.6}, ic {:.4}", r.name, r.mass, r.atom.density(Density::Ic));
        }
        let spec = app.spectrum(Density::Ic)?;
        let eps = 1.0 / (n as f64).powi(3);
        let eta = 1.0 / (4.0 * (n as f64).powi(2));
        let report = lower_bound(&app, eps, eta, &TailSpec::default())?;
        println!(
            "  IC = {:.4}, lower tail at eps = n^-3: {}, lambda_eps = {}, converse bound {:.2}",
            spec.mean(),
            spec.eps_tail(eps, TailSide::Lower)?,
            report.lambda_eps,
            report.bound
        );
    }
    Ok(())
}
