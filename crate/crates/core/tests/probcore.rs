use approx::assert_abs_diff_eq;
use icdensity::probcore::*;
use icdensity::protocol::{appendix_a_example, generators, TranscriptLaw};
use icdensity::Error;

fn send_x_law(q: f64) -> TranscriptLaw {
    let s = JointSource::dsbs(q).unwrap();
    TranscriptLaw::from_tree(&generators::send_x(&s), &s).unwrap()
}

#[test]
fn entropy_density_examples() {
    let copy = JointSource::copy(1).unwrap();
    assert_eq!(entropy_density(&copy, DensityKind::Sum, 1, 1).unwrap(), 0.0);
    assert_eq!(entropy_density(&copy, DensityKind::Joint, 0, 0).unwrap(), 1.0);
    let indep = JointSource::independent_uniform(1, 1).unwrap();
    assert_eq!(entropy_density(&indep, DensityKind::Sum, 0, 1).unwrap(), 2.0);
    assert!(matches!(entropy_density(&copy, DensityKind::Mutual, 0, 1), Err(Error::ZeroMassAtom(_))));
}

#[test]
fn mutual_density_sign() {
    // log P(x|y)/P(x): positive for correlated agreeing pairs
    let s = JointSource::dsbs(0.25).unwrap();
    assert_abs_diff_eq!(entropy_density(&s, DensityKind::Mutual, 0, 0).unwrap(), (1.5f64).log2(), epsilon = 1e-12);
}

#[test]
fn ic_density_examples() {
    let s = JointSource::dsbs(0.25).unwrap();
    let constant = TranscriptLaw::from_tree(&generators::constant(), &s).unwrap();
    for (x, y, _) in s.support() {
        assert_eq!(constant.ic_density(0, x, y).unwrap(), 0.0);
    }
    let law = send_x_law(0.25);
    assert_abs_diff_eq!(law.ic_density(0, 0, 0).unwrap(), (4.0f64 / 3.0).log2(), epsilon = 1e-12);
    assert_abs_diff_eq!(law.ic_density(1, 1, 0).unwrap(), 2.0, epsilon = 1e-12);
    assert!(matches!(law.ic_density(1, 0, 0), Err(Error::ZeroMassAtom(_))));

    let app = appendix_a_example(16).unwrap();
    assert_eq!(app.regions[3].atom.density(Density::Ic), 32.0);
}

#[test]
fn spectrum_examples() {
    let s = JointSource::dsbs(0.25).unwrap();
    let constant = TranscriptLaw::from_tree(&generators::constant(), &s).unwrap();
    assert_eq!(constant.spectrum(Density::Ic).unwrap().atoms(), &[(0.0, 1.0)]);

    let ic = send_x_law(0.25).spectrum(Density::Ic).unwrap();
    assert_eq!(ic.len(), 2);
    assert_abs_diff_eq!(ic.atoms()[0].0, 0.41503749927884376, epsilon = 1e-12);
    assert_abs_diff_eq!(ic.atoms()[0].1, 0.75, epsilon = 1e-12);
    assert_abs_diff_eq!(ic.atoms()[1].0, 2.0, epsilon = 1e-12);

    let app = appendix_a_example(8).unwrap();
    let spec = app.spectrum(Density::Ic).unwrap();
    // b and c share a density value and merge
    assert_eq!(spec.len(), 3);
    let s8 = (256.0f64 / 8.0).floor() / 256.0;
    let u = 1.0 - s8;
    assert_abs_diff_eq!(spec.atoms()[0].1, u * u, epsilon = 1e-15);
    assert_abs_diff_eq!(spec.atoms()[1].1, 2.0 * u * s8, epsilon = 1e-15);
    assert_abs_diff_eq!(spec.atoms()[2].1, s8 * s8, epsilon = 1e-15);
}

#[test]
fn eps_tail_examples() {
    let ic = send_x_law(0.25).spectrum(Density::Ic).unwrap();
    assert_eq!(ic.eps_tail(0.1, TailSide::Lower).unwrap(), 2.0);
    assert_eq!(SpectrumTable::point(0.0).eps_tail(0.3, TailSide::Lower).unwrap(), 0.0);
    for n in [8u32, 16, 32] {
        let app = appendix_a_example(n).unwrap();
        let eps = 1.0 / (n as f64).powi(3);
        assert_eq!(app.spectrum(Density::Ic).unwrap().eps_tail(eps, TailSide::Lower).unwrap(), 2.0 * n as f64);
    }
    assert!(matches!(ic.eps_tail(1.0, TailSide::Lower), Err(Error::OutOfRange(_))));
}

#[test]
fn tail_sides_differ_on_an_atom() {
    // Pr[D > λ] = 0.25 exactly at the threshold
    let s = SpectrumTable::from_weighted([(0.0, 0.75), (1.0, 0.25)]).unwrap();
    assert_eq!(s.eps_tail(0.25, TailSide::Lower).unwrap(), 0.0);
    assert_eq!(s.eps_tail(0.25, TailSide::Upper).unwrap(), 1.0);
    assert_eq!(s.eps_tail(0.2, TailSide::Lower).unwrap(), 1.0);
    assert_eq!(s.eps_tail(0.2, TailSide::Upper).unwrap(), 1.0);
}

#[test]
fn moments_examples() {
    let m = SpectrumTable::point(3.5).moments();
    assert_eq!((m.mean, m.variance, m.third_central_moment), (3.5, 0.0, 0.0));
    let ic = send_x_law(0.25).spectrum(Density::Ic).unwrap();
    assert_abs_diff_eq!(ic.mean(), binary_entropy(0.25), epsilon = 1e-12);
    assert_abs_diff_eq!(ic.mean(), 0.8112781244591328, epsilon = 1e-12);
}

#[test]
fn tv_examples() {
    let p = FiniteDistribution::new([(0, 0.5), (1, 0.5)]).unwrap();
    let q = FiniteDistribution::new([(0, 0.75), (1, 0.25)]).unwrap();
    assert_eq!(tv_distance(&p, &p).unwrap(), 0.0);
    assert_abs_diff_eq!(tv_distance(&p, &q).unwrap(), 0.25, epsilon = 1e-15);
    let a = FiniteDistribution::new([(0, 1.0), (1, 0.0)]).unwrap();
    let b = FiniteDistribution::new([(0, 0.0), (1, 1.0)]).unwrap();
    assert_eq!(tv_distance(&a, &b).unwrap(), 1.0);
    let c = FiniteDistribution::new([(0, 1.0)]).unwrap();
    assert!(matches!(tv_distance(&a, &c), Err(Error::MismatchedSupport)));
    assert_eq!(tv_distance_aligned(&c, &b), 1.0);
}

#[test]
fn q_inv_examples() {
    assert_abs_diff_eq!(q_inv(0.5).unwrap(), 0.0, epsilon = 1e-10);
    assert_abs_diff_eq!(q_inv(0.1).unwrap(), 1.2815515655446004, epsilon = 1e-9);
    assert_abs_diff_eq!(q_inv(0.9).unwrap(), -1.2815515655446004, epsilon = 1e-9);
    assert!(matches!(q_inv(0.0), Err(Error::OutOfRange(_))));
    assert!(matches!(q_inv(1.0), Err(Error::OutOfRange(_))));
}

#[test]
fn slice_config_counts_and_tails() {
    let cfg = SliceConfig::new(1.0, 8.0, 2.0, 3.0).unwrap();
    assert_eq!(cfg.n_slices(), 4);
    assert_eq!(cfg.slice_of(0.5), 0);
    assert_eq!(cfg.slice_of(1.0), 1);
    assert_eq!(cfg.slice_of(2.999), 1);
    assert_eq!(cfg.slice_of(3.0), 2);
    assert_eq!(cfg.slice_of(7.9), 4);
    assert_eq!(cfg.slice_of(8.0), 0);
    assert_eq!(cfg.first_hash_len(), 6);
    let s = SpectrumTable::from_weighted([(0.0, 0.1), (2.0, 0.6), (9.0, 0.3)]).unwrap();
    assert_abs_diff_eq!(cfg.tail_mass(&s), 0.4, epsilon = 1e-15);
    assert!(SliceConfig::new(2.0, 2.0, 1.0, 0.0).is_err());
    assert!(SliceConfig::new(0.0, 2.0, 0.0, 0.0).is_err());
}

#[test]
fn spectrum_csv_export() {
    let s = SpectrumTable::from_weighted([(1.0, 0.5), (0.0, 0.5)]).unwrap();
    assert_eq!(s.to_csv_string().unwrap(), "value,prob\n0,0.5\n1,0.5\n");
}

#[test]
fn source_json_document() {
    let text = r#"{"x_alphabet":["a","b"],"y_alphabet":["0"],"mass":[[0.25],[0.75]]}"#;
    let s = JointSource::from_json(text).unwrap();
    assert_eq!(s.px(1), 0.75);
    assert_eq!(s.x_index("b"), Some(1));
    let bad = r#"{"x_alphabet":["a"],"y_alphabet":["0"],"mass":[[0.5]]}"#;
    assert!(matches!(JointSource::from_json(bad), Err(Error::InvalidDistribution(_))));
}
