//! A coin-flip mixture of two protocols run n times: IC is the average,
//! while the normalized density concentrates on two separate values.

use icdensity::protocol::{generators, mixed_protocol, transcript_law};
use icdensity::probcore::JointSource;

fn main() -> icdensity::Result<()> {
    let source = JointSource::dsbs(0.4)?;
    let heads = transcript_law(&generators::send_x(&source), &source)?;
    let tails = transcript_law(&generators::constant(), &source)?;
    let n = 200;
    for p in [0.05, 0.5] {
        let mix = mixed_protocol(&heads, &tails, p, n)?;
        let summary = mix.summary()?;
        let draws = mix.sample_normalized_ic(20_000, 3)?;
        let high = draws.iter().filter(|v| **v > summary.ic_heads / 2.0).count() as f64 / draws.len() as f64;
        println!(
            "p = {p}: IC/n = {:.4}, IC(heads) = {:.4}, Pr[ic/n > IC(heads)/2] = {high:.4}",
            summary.ic_total / n as f64,
            summary.ic_heads
        );
    }
    Ok(())
}
