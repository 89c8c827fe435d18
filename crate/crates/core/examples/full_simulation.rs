//! Round-by-round simulation of a whole interactive protocol, with the
//! per-round communication budget and the resulting error bound.

use icdensity::bounds::protocol5_budget;
use icdensity::eval::{measure_sim_error, EvalMode};
use icdensity::probcore::{JointSource, SliceConfig};
use icdensity::protocol::generators;
use icdensity::simulate::{run_trials, Protocol5, RoundConfig, TrialSummary};

fn main() -> icdensity::Result<()> {
    let source = JointSource::dsbs(0.2)?;
    let tree = generators::noisy_exchange(1, 0.1)?;
    let gamma = 12.0;
    let wide = SliceConfig::new(0.0, 32.0, 1.0, gamma)?;
    let configs = vec![RoundConfig { tx: wide, rx: wide }; tree.rounds()];
    let p5 = Protocol5::new(&tree, &source, &configs, gamma, None)?;

    let budget = protocol5_budget(&p5, 0.9)?;
    for (t, r) in budget.rounds.iter().enumerate() {
        println!("round {}: {:?}", t + 1, r);
    }
    println!("eps' = {:.4}, l_max = {:.1}, error bound {:.4}", budget.eps_prime, budget.l_max, budget.error_bound);

    let tv = measure_sim_error(&p5, EvalMode::Plugin, 100_000, 11)?;
    let s = TrialSummary::from_outcomes(&run_trials(&p5, 20_000, 11));
    println!("measured TV {:.4} ± {:.4}, mean bits {:.2}", tv.value, tv.ci_halfwidth, s.mean_bits);
    Ok(())
}
