//! Simulating one round of a noisy protocol: the receiver-side scheme with
//! shared bits, and the scheme that also compresses the transmitter's side.

use icdensity::eval::{measure_sim_error, EvalMode};
use icdensity::probcore::{JointSource, SliceConfig};
use icdensity::protocol::{generators, RoundLaw};
use icdensity::simulate::{receiver_spectrum, run_trials, transmitter_spectrum, Protocol3, Protocol4, TrialSummary};

fn main() -> icdensity::Result<()> {
    let source = JointSource::dsbs_bits(0.15, 2)?;
    let round = RoundLaw::first_round(&generators::bsc(2, 0.1)?, &source)?;
    let gamma = 6.0;

    let rx = SliceConfig::around(&receiver_spectrum(&round)?, gamma);
    let p3 = Protocol3::new(&round, 1, rx)?;
    let tv = measure_sim_error(&p3, EvalMode::Plugin, 100_000, 5)?;
    let bits = TrialSummary::from_outcomes(&run_trials(&p3, 20_000, 5));
    println!(
        "receiver-side scheme: TV {:.4} ± {:.4} (bound {:.4}), mean bits {:.2}",
        tv.value,
        tv.ci_halfwidth,
        p3.error_bound()?,
        bits.mean_bits
    );

    let tx = transmitter_spectrum(&round)?;
    let cfg_x = SliceConfig::new(0.0, tx.max().ceil() + 8.0, 1.0, gamma)?;
    let p4 = Protocol4::new(&round, rx, cfg_x, gamma)?;
    let tv = measure_sim_error(&p4, EvalMode::Plugin, 100_000, 5)?;
    let bits = TrialSummary::from_outcomes(&run_trials(&p4, 20_000, 5));
    println!(
        "two-sided scheme: TV {:.4} ± {:.4} (bound {:.4}), mean bits {:.2}",
        tv.value,
        tv.ci_halfwidth,
        p4.error_bound()?,
        bits.mean_bits
    );
    Ok(())
}
