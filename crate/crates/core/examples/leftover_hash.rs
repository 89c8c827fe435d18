//! Extracting nearly uniform keys from a source with side information.

use icdensity::hashing::{extract, leftover_bound, min_entropy, Conditioning};
use icdensity::probcore::JointSource;
use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> icdensity::Result<()> {
    let source = JointSource::dsbs_bits(0.3, 8)?;
    let joint: Vec<Vec<f64>> = (0..source.nx()).map(|x| (0..source.ny()).map(|y| source.p(x, y)).collect()).collect();
    let h = min_entropy(&joint, &Conditioning::Optimize)?;
    println!("H_min(X|Y) = {:.4} bits, H(X|Y) = {:.4} bits", h.value, source.entropy_x_given_y());
    for k in 0..=4 {
        println!("  k = {k}: distance bound {:.4}", leftover_bound(k as f64, 0.0, h.value));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cells = WeightedIndex::new(source.mass()).expect("valid mass table");
    let xs: Vec<usize> = (0..20).map(|_| cells.sample(&mut rng) / source.ny()).collect();
    let out = extract(&xs, source.nx(), 2, 9, h.value, 0.0)?;
    println!("2-bit keys for 20 samples: {:?} (bound {:.4})", out.keys, out.bound);
    Ok(())
}
