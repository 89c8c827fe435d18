//! Converse bound on the communication needed to simulate data exchange
//! over k copies of a doubly symmetric binary source. The bound trails
//! λ_ε by a penalty that grows only logarithmically in k, so the gap
//! printed here stays nearly flat while λ_ε grows linearly.

use icdensity::bounds::{lower_bound, TailSpec};
use icdensity::probcore::{Density, DensityModel, JointSource};
use icdensity::protocol::data_exchange_protocol;

fn main() -> icdensity::Result<()> {
    let (q, eps, eta) = (0.25, 0.05, 0.05);
    for k in [1u32, 2, 4, 6, 8] {
        let source = JointSource::dsbs_bits(q, k)?;
        let law = data_exchange_protocol(&source)?;
        let ic = law.spectrum(Density::Ic)?;
        let r = lower_bound(&law, eps, eta, &TailSpec::default())?;
        println!(
            "k = {k}: IC = {:.3}, lambda_eps = {:.3}, Lambda = ({:.3}, {:.3}, {:.3}), bound {:.3}, gap {:.3}",
            ic.mean(),
            r.lambda_eps,
            r.Lambda1,
            r.Lambda2,
            r.Lambda3,
            r.bound,
            r.lambda_eps - r.bound
        );
    }
    Ok(())
}
