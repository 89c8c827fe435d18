use approx::assert_abs_diff_eq;
use icdensity::probcore::{Density, DensityModel, JointSource, SpectrumTable};
use icdensity::protocol::*;
use icdensity::Error;

fn assert_atoms(s: &SpectrumTable, expected: &[(f64, f64)], tol: f64) {
    assert_eq!(s.len(), expected.len(), "atoms {:?}", s.atoms());
    for (&(v, p), &(ev, ep)) in s.atoms().iter().zip(expected) {
        assert_abs_diff_eq!(v, ev, epsilon = tol);
        assert_abs_diff_eq!(p, ep, epsilon = 1e-12);
    }
}

#[test]
fn send_x_product_spectrum() {
    let s = JointSource::dsbs(0.25).unwrap();
    let law = transcript_law(&generators::send_x(&s), &s).unwrap();
    let prod = product_protocol(&law, 2).unwrap();
    let expected = [(0.830, 0.5625), (2.415, 0.375), (4.0, 0.0625)];
    assert_atoms(&prod.spectrum(Density::Ic).unwrap(), &expected, 1e-3);
    // the factored and the explicit product agree
    let explicit = prod.expand().unwrap().spectrum(Density::Ic).unwrap();
    assert_atoms(&explicit, &expected, 1e-3);
}

#[test]
fn data_exchange_sum_density() {
    let s = JointSource::dsbs(0.25).unwrap();
    let law = data_exchange_protocol(&s).unwrap();
    let hsum = law.spectrum(Density::Sum).unwrap();
    assert_atoms(&hsum, &[(0.830, 0.75), (4.0, 0.25)], 1e-3);
    // a transcript that determines both inputs reveals exactly h(X|Y) + h(Y|X)
    let ic = law.spectrum(Density::Ic).unwrap();
    assert_atoms(&ic, &[(0.830, 0.75), (4.0, 0.25)], 1e-3);
    assert_abs_diff_eq!(law.information_complexity().unwrap(), 2.0 * 0.8112781244591328, epsilon = 1e-12);
}

#[test]
fn appendix_expansion_matches_aggregated_form() {
    let agg = appendix_a_example(4).unwrap();
    let (_, law) = agg.expand().unwrap();
    for d in [Density::Ic, Density::Joint, Density::CondXGivenYTau, Density::SumExtended] {
        let a = agg.spectrum(d).unwrap();
        let b = law.spectrum(d).unwrap();
        assert_eq!(a.len(), b.len(), "{d:?}");
        for (x, y) in a.atoms().iter().zip(b.atoms()) {
            assert_abs_diff_eq!(x.0, y.0, epsilon = 1e-9);
            assert_abs_diff_eq!(x.1, y.1, epsilon = 1e-12);
        }
    }
    // Pr[Π ∉ {a,b,c}] = ⌊2ⁿ/n⌋²/2²ⁿ
    assert_abs_diff_eq!(agg.prob_pair_transcript(), 16.0 / 256.0, epsilon = 1e-15);
    assert!(appendix_a_example(3).is_err());
    assert!(matches!(appendix_a_example(9).unwrap().expand(), Err(Error::TooLarge { .. })));
}

#[test]
fn marginal_rows_are_consistent() {
    let s = JointSource::dsbs_bits(0.2, 2).unwrap();
    let tree = generators::noisy_exchange(2, 0.1).unwrap();
    let law = transcript_law(&tree, &s).unwrap();
    for x in 0..s.nx() {
        for t in 0..law.n_transcripts() {
            let direct: f64 = (0..s.ny()).map(|y| s.p_y_given_x(y, x) * law.p_tau_given_xy(t, x, y)).sum();
            assert_abs_diff_eq!(law.p_tau_given_x(t, x), direct, epsilon = 1e-12);
        }
        let total: f64 = law.row_x(x).iter().map(|(_, p)| p).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
    }
    for y in 0..s.ny() {
        for t in 0..law.n_transcripts() {
            let direct: f64 = (0..s.nx()).map(|x| s.p_x_given_y(x, y) * law.p_tau_given_xy(t, x, y)).sum();
            assert_abs_diff_eq!(law.p_tau_given_y(t, y), direct, epsilon = 1e-12);
        }
    }
    // the rectangle property: P(τ|xy) factors into the two parties' path weights
    assert!(law.information_complexity().unwrap() >= 0.0);
}

#[test]
fn ic_of_one_way_protocol_is_conditional_mutual_information() {
    // for Π = X, IC = I(X;Π|Y) = H(X|Y)
    let s = JointSource::dsbs_bits(0.3, 2).unwrap();
    let law = transcript_law(&generators::send_x(&s), &s).unwrap();
    assert!(law.is_one_way());
    assert_abs_diff_eq!(law.information_complexity().unwrap(), s.entropy_x_given_y(), epsilon = 1e-12);
}

#[test]
fn tree_rounds_and_json() {
    let s = JointSource::dsbs(0.1).unwrap();
    assert_eq!(generators::constant().rounds(), 0);
    assert_eq!(generators::send_x(&s).rounds(), 1);
    let ex = generators::data_exchange(&s);
    assert_eq!(ex.rounds(), 2);
    let back = ProtocolTree::from_json(&ex.to_json().unwrap()).unwrap();
    assert_eq!(back, ex);
    let looped = vec![
        Node::Internal { owner: Owner::Party1, p_one: vec![0.5, 0.5], children: [0, 1] },
        Node::Leaf { label: "a".into() },
    ];
    assert!(matches!(ProtocolTree::new(looped), Err(Error::InvalidProtocol(_))));
    let bad_prob = vec![
        Node::Internal { owner: Owner::Party1, p_one: vec![1.5, 0.5], children: [1, 2] },
        Node::Leaf { label: "a".into() },
        Node::Leaf { label: "b".into() },
    ];
    assert!(matches!(ProtocolTree::new(bad_prob), Err(Error::InvalidProtocol(_))));
}

#[test]
fn tree_alphabet_mismatch_is_rejected() {
    let s2 = JointSource::dsbs_bits(0.1, 2).unwrap();
    let s1 = JointSource::dsbs(0.1).unwrap();
    let tree = generators::send_x(&s2);
    assert!(matches!(transcript_law(&tree, &s1), Err(Error::AlphabetMismatch(_))));
}

#[test]
fn mixed_protocol_summary() {
    let s = JointSource::dsbs(0.4).unwrap();
    let heads = transcript_law(&generators::send_x(&s), &s).unwrap();
    let tails = transcript_law(&generators::constant(), &s).unwrap();
    let mix = mixed_protocol(&heads, &tails, 0.5, 10).unwrap();
    let sum = mix.summary().unwrap();
    assert_abs_diff_eq!(sum.ic_total, 5.0 * 0.9709505944546686, epsilon = 1e-12);
    let spec = mix.spectrum(Density::Ic).unwrap();
    assert_abs_diff_eq!(spec.mean(), sum.ic_total, epsilon = 1e-9);
    let draws = mix.sample_normalized_ic(2000, 7).unwrap();
    let zeros = draws.iter().filter(|v| **v == 0.0).count() as f64 / 2000.0;
    assert!((zeros - 0.5).abs() < 0.05);
    assert!(mixed_protocol(&heads, &tails, 1.0, 10).is_err());
}
