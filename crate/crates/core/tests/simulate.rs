use icdensity::eval::{exact_agreement, exact_view_law, EXACT_LIMIT};
use icdensity::probcore::{DensityKind, JointSource, SliceConfig, TailSide};
use icdensity::probcore::source_spectrum;
use icdensity::protocol::{generators, RoundLaw};
use icdensity::simulate::*;

#[test]
fn copy_source_is_decoded_without_error() {
    let s = JointSource::copy(3).unwrap();
    let p1 = Protocol1::new(&s, 3, 2.0, None).unwrap();
    let out = run_trials(&p1, 2000, 1);
    assert!(out.iter().all(|o| o.error.is_none() && o.tau_y == Some(o.x)));
}

#[test]
fn protocol1_error_within_typical_set_bound() {
    let s = JointSource::dsbs_bits(0.1, 4).unwrap();
    let p1 = Protocol1::new(&s, 6, 2.0, None).unwrap();
    let tail = source_spectrum(&s, DensityKind::CondXGivenY).unwrap().prob_greater(4.0);
    assert!((p1.atypical_mass() - tail).abs() < 1e-12);
    assert!((p1.error_bound() - (tail + 0.25)).abs() < 1e-12);
    let summary = TrialSummary::from_outcomes(&run_trials(&p1, 100_000, 5));
    assert!(summary.error_rate <= p1.error_bound(), "{} > {}", summary.error_rate, p1.error_bound());
    assert!(summary.bit_histogram.keys().all(|b| *b == 6));
}

#[test]
fn protocol1_with_empty_typical_set_always_fails() {
    let s = JointSource::dsbs_bits(0.1, 2).unwrap();
    let p1 = Protocol1::new(&s, 4, 3.9, None).unwrap();
    assert!((p1.atypical_mass() - 1.0).abs() < 1e-12);
    let summary = TrialSummary::from_outcomes(&run_trials(&p1, 1000, 2));
    assert_eq!(summary.error_rate, 1.0);
}

#[test]
fn protocol2_bits_follow_the_slice_formula() {
    let s = JointSource::dsbs_bits(0.1, 8).unwrap();
    let h = source_spectrum(&s, DensityKind::CondXGivenY).unwrap();
    let cfg = SliceConfig::new(h.min().floor(), h.max() + 1.0, 2.0, 3.0).unwrap();
    let p2 = Protocol2::new(&s, cfg, None, None).unwrap();
    assert_eq!(p2.tail_mass(), 0.0);
    let out = run_trials(&p2, 20_000, 3);
    for o in &out {
        let i = o.slice.unwrap();
        assert_eq!(o.bits, p2.bits_in_slice(i), "slice {i}");
        assert_eq!(p2.bits_in_slice(i), p2.schedule().l + (i - 1) * 2 + i);
    }
    let summary = TrialSummary::from_outcomes(&out);
    assert!(summary.error_rate <= p2.error_bound());
    // slice 1 costs one hash block and one acknowledgement
    assert_eq!(p2.bits_in_slice(1), p2.schedule().l + 1);
}

#[test]
fn protocol2_monte_carlo_matches_exact_enumeration() {
    let s = JointSource::dsbs_bits(0.2, 2).unwrap();
    let cfg = SliceConfig::new(0.0, 8.0, 1.0, 1.0).unwrap();
    let p2 = Protocol2::new(&s, cfg, Some(1), None).unwrap();
    let law = exact_view_law(&p2, EXACT_LIMIT).unwrap();
    let exact_error = 1.0 - exact_agreement(&law, |x, _| x);
    assert!(exact_error > 0.0);
    let trials = 100_000;
    let summary = TrialSummary::from_outcomes(&run_trials(&p2, trials, 11));
    let sigma = (exact_error * (1.0 - exact_error) / trials as f64).sqrt();
    assert!((summary.disagreement_rate - exact_error).abs() <= 3.0 * sigma, "{} vs {}", summary.disagreement_rate, exact_error);
}

fn bsc_round(k: u32, c: f64) -> RoundLaw {
    let s = JointSource::independent_uniform(k, 1).unwrap();
    RoundLaw::first_round(&generators::bsc(k, c).unwrap(), &s).unwrap()
}

#[test]
fn protocol3_tv_within_bound() {
    let round = bsc_round(1, 0.2);
    let rx = receiver_spectrum(&round).unwrap();
    let cfg = SliceConfig::around(&rx, 6.0);
    let p3 = Protocol3::new(&round, 1, cfg).unwrap();
    let est = icdensity::eval::measure_sim_error(&p3, icdensity::eval::EvalMode::Plugin, 100_000, 4).unwrap();
    let bound = p3.error_bound().unwrap();
    assert!(est.value <= bound + est.ci_halfwidth, "{} > {}", est.value, bound);
}

#[test]
fn protocol3_without_shared_bits_is_protocol2() {
    let round = bsc_round(2, 0.2);
    let cfg = SliceConfig::around(&receiver_spectrum(&round).unwrap(), 4.0);
    let p3 = Protocol3::new(&round, 0, cfg).unwrap();
    assert_eq!(p3.k(), 0);
    let bound = p3.error_bound().unwrap();
    let expected = p3.tail_mass().unwrap() + p3.schedule().n as f64 * 2f64.powf(-4.0) + 0.5 * 2f64.powf(-p3.min_entropy().unwrap() / 2.0);
    assert!((bound - expected).abs() < 1e-12);
}

#[test]
fn protocol4_bits_and_index_cost() {
    let round = bsc_round(4, 0.2);
    let cfg_y = SliceConfig::around(&receiver_spectrum(&round).unwrap(), 3.0);
    let cfg_x = SliceConfig::around(&transmitter_spectrum(&round).unwrap(), 3.0);
    let p4 = Protocol4::new(&round, cfg_y, cfg_x, 3.0).unwrap();
    for o in run_trials(&p4, 20_000, 9) {
        if o.error.is_none() {
            let tau = o.tau_x.unwrap();
            // the stated bound plus the two bits lost to rounding l and k
            assert!(o.bits as f64 <= p4.bit_bound(tau, o.x, o.y) + 2.0, "{} bits", o.bits);
        }
    }

    let s = JointSource::dsbs_bits(0.1, 2).unwrap();
    let det = RoundLaw::first_round(&generators::send_x(&s), &s).unwrap();
    let tx = transmitter_spectrum(&det).unwrap();
    assert_eq!(tx.atoms(), &[(0.0, 1.0)]);
    let cfg_x = SliceConfig::new(0.0, 1.0, 1.0, 3.0).unwrap();
    let cfg_y = SliceConfig::around(&receiver_spectrum(&det).unwrap(), 3.0);
    let p4 = Protocol4::new(&det, cfg_y, cfg_x, 3.0).unwrap();
    assert_eq!(p4.good_indices(), vec![1]);
    assert_eq!(p4.j_bits(), index_bits(1));
    assert!(run_trials(&p4, 500, 1).iter().all(|o| o.j == Some(1)));
}

#[test]
fn one_round_protocol5_is_protocol4() {
    let s = JointSource::independent_uniform(3, 1).unwrap();
    let tree = generators::bsc(3, 0.2).unwrap();
    let round = RoundLaw::first_round(&tree, &s).unwrap();
    let configs = default_round_configs(&tree, &s, 4.0).unwrap();
    assert_eq!(configs.len(), 1);
    let p4 = Protocol4::new(&round, configs[0].rx, configs[0].tx, 4.0).unwrap();
    let p5 = Protocol5::new(&tree, &s, &configs, 4.0, None).unwrap();
    let a = run_trials(&p4, 5000, 21);
    let b = run_trials(&p5, 5000, 21);
    for (u, v) in a.iter().zip(&b) {
        assert_eq!((u.x, u.y, u.tau_x, u.tau_y, u.bits, u.error), (v.x, v.y, v.tau_x, v.tau_y, v.bits, v.error));
    }
}

#[test]
fn protocol5_budget_aborts() {
    let s = JointSource::dsbs_bits(0.1, 2).unwrap();
    let tree = generators::data_exchange(&s);
    let configs = default_round_configs(&tree, &s, 3.0).unwrap();
    assert_eq!(configs.len(), 2);
    let p5 = Protocol5::new(&tree, &s, &configs, 3.0, Some(1)).unwrap();
    let out = run_trials(&p5, 200, 1);
    assert!(out.iter().all(|o| o.error == Some(ErrorCause::BudgetExceeded) && o.bits <= 1));
}

#[test]
fn trials_are_reproducible_and_summaries_consistent() {
    let s = JointSource::dsbs_bits(0.2, 3).unwrap();
    let p1 = Protocol1::new(&s, 4, 1.0, None).unwrap();
    let a = run_trials(&p1, 1, 77);
    let b = run_trials(&p1, 1, 77);
    assert_eq!(a, b);
    let out = run_trials(&p1, 5000, 3);
    let summary = TrialSummary::from_outcomes(&out);
    let errored = out.iter().filter(|o| o.error.is_some()).count() as u64;
    assert_eq!(summary.errors.values().sum::<u64>(), errored);
    assert!(errored > 0);
}

#[test]
fn tail_of_density_uses_upper_side() {
    let s = JointSource::dsbs_bits(0.1, 4).unwrap();
    let h = source_spectrum(&s, DensityKind::CondXGivenY).unwrap();
    assert!(h.eps_tail(0.05, TailSide::Upper).unwrap() >= h.eps_tail(0.05, TailSide::Lower).unwrap());
}
