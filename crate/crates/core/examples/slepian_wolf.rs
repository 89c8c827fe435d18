//! One-shot and interactive Slepian-Wolf coding of X given Y on a
//! 4-bit doubly symmetric binary source.

use icdensity::probcore::{source_spectrum, DensityKind, JointSource, SliceConfig};
use icdensity::simulate::{run_trials, Protocol1, Protocol2, TrialSummary};

fn main() -> icdensity::Result<()> {
    let source = JointSource::dsbs_bits(0.1, 4)?;
    let spectrum = source_spectrum(&source, DensityKind::CondXGivenY)?;
    println!("H(X|Y) = {:.4} bits, h(X|Y) ranges over [{:.3}, {:.3}]", source.entropy_x_given_y(), spectrum.min(), spectrum.max());

    let p1 = Protocol1::new(&source, 12, 5.0, None)?;
    let s1 = TrialSummary::from_outcomes(&run_trials(&p1, 100_000, 7));
    println!("protocol 1: l = 12, error {:.5} (bound {:.5})", s1.error_rate, p1.error_bound());

    let cfg = SliceConfig::new(0.0, 13.0, 2.0, 5.0)?;
    let p2 = Protocol2::new(&source, cfg, None, None)?;
    let out = run_trials(&p2, 100_000, 7);
    let s2 = TrialSummary::from_outcomes(&out);
    println!(
        "protocol 2: l = {}, N = {}, mean bits {:.3}, error {:.5} (bound {:.5})",
        p2.schedule().l,
        p2.schedule().n,
        s2.mean_bits,
        s2.error_rate,
        p2.error_bound()
    );
    for (bits, count) in &s2.bit_histogram {
        println!("  {bits:>3} bits: {count}");
    }
    Ok(())
}
