//! Finite joint sources `P_XY` for the two parties' inputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass of a distribution.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// A finite joint distribution of the inputs `(X, Y)`.
///
/// The mass table is stored row-major (`x` major). Marginals are computed
/// once at construction; the type is immutable afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSource {
    x_alphabet: Vec<String>,
    y_alphabet: Vec<String>,
    mass: Vec<f64>,
    px: Vec<f64>,
    py: Vec<f64>,
}

/// JSON document form: ordered alphabets plus a row-major mass matrix.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct JointSourceDoc {
    pub x_alphabet: Vec<String>,
    pub y_alphabet: Vec<String>,
    pub mass: Vec<Vec<f64>>,
}

impl JointSource {
    pub fn new(x_alphabet: Vec<String>, y_alphabet: Vec<String>, mass: Vec<f64>) -> Result<Self> {
        let (nx, ny) = (x_alphabet.len(), y_alphabet.len());
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidDistribution("empty alphabet".into()));
        }
        if mass.len() != nx * ny {
            return Err(Error::InvalidDistribution(format!(
                "mass table has {} entries, expected {}x{}",
                mass.len(),
                nx,
                ny
            )));
        }
        if let Some(bad) = mass.iter().find(|m| !m.is_finite() || **m < 0.0) {
            return Err(Error::InvalidDistribution(format!("negative or non-finite mass {bad}")));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("total mass {total} is not 1")));
        }
        let mut px = vec![0.0; nx];
        let mut py = vec![0.0; ny];
        for x in 0..nx {
            for y in 0..ny {
                let m = mass[x * ny + y];
                px[x] += m;
                py[y] += m;
            }
        }
        Ok(Self { x_alphabet, y_alphabet, mass, px, py })
    }

    pub fn from_doc(doc: &JointSourceDoc) -> Result<Self> {
        if doc.mass.len() != doc.x_alphabet.len() {
            return Err(Error::InvalidDistribution("mass matrix must have one row per x symbol".into()));
        }
        let mut flat = Vec::with_capacity(doc.x_alphabet.len() * doc.y_alphabet.len());
        for row in &doc.mass {
            if row.len() != doc.y_alphabet.len() {
                return Err(Error::InvalidDistribution("mass row length differs from |Y|".into()));
            }
            flat.extend_from_slice(row);
        }
        Self::new(doc.x_alphabet.clone(), doc.y_alphabet.clone(), flat)
    }

    pub fn to_doc(&self) -> JointSourceDoc {
        JointSourceDoc {
            x_alphabet: self.x_alphabet.clone(),
            y_alphabet: self.y_alphabet.clone(),
            mass: self.mass.chunks(self.ny()).map(|r| r.to_vec()).collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: JointSourceDoc = serde_json::from_str(text)?;
        Self::from_doc(&doc)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_doc())?)
    }

    /// Doubly symmetric binary source: `X` a uniform bit, `Y = X` flipped with probability `q`.
    pub fn dsbs(q: f64) -> Result<Self> {
        Self::dsbs_bits(q, 1)
    }

    /// `k` independent coordinates of DSBS(q), with `X, Y` taken as `k`-bit strings.
    pub fn dsbs_bits(q: f64, k: u32) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::ParameterRange(format!("crossover {q} not in [0,1]")));
        }
        if k == 0 || k > 10 {
            return Err(Error::ParameterRange(format!("bit width {k} not in 1..=10")));
        }
        let n = 1usize << k;
        let labels = bit_labels(k);
        let base = 1.0 / n as f64;
        let mut mass = Vec::with_capacity(n * n);
        for x in 0..n {
            for y in 0..n {
                let d = (x ^ y).count_ones() as i32;
                mass.push(base * q.powi(d) * (1.0 - q).powi(k as i32 - d));
            }
        }
        Self::new(labels.clone(), labels, mass)
    }

    /// `X` and `Y` independent and uniform on `kx`- and `ky`-bit strings.
    pub fn independent_uniform(kx: u32, ky: u32) -> Result<Self> {
        let (nx, ny) = (1usize << kx, 1usize << ky);
        let m = 1.0 / (nx * ny) as f64;
        Self::new(bit_labels(kx), bit_labels(ky), vec![m; nx * ny])
    }

    /// `X` uniform on `k`-bit strings and `Y = X`.
    pub fn copy(k: u32) -> Result<Self> {
        let n = 1usize << k;
        let mut mass = vec![0.0; n * n];
        for x in 0..n {
            mass[x * n + x] = 1.0 / n as f64;
        }
        Self::new(bit_labels(k), bit_labels(k), mass)
    }

    /// The `n`-fold IID product, with symbols joined by `,`.
    pub fn power(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ParameterRange("product order must be >= 1".into()));
        }
        let mut acc = self.clone();
        for _ in 1..n {
            acc = acc.product(self)?;
        }
        Ok(acc)
    }

    /// Independent pair `((X, X'), (Y, Y'))` with `(X, Y) ~ self`, `(X', Y') ~ other`.
    pub fn product(&self, other: &JointSource) -> Result<Self> {
        let join = |a: &[String], b: &[String]| -> Vec<String> {
            a.iter().flat_map(|s| b.iter().map(move |t| format!("{s},{t}"))).collect()
        };
        let xs = join(&self.x_alphabet, &other.x_alphabet);
        let ys = join(&self.y_alphabet, &other.y_alphabet);
        let (ny, ony) = (self.ny(), other.ny());
        let total_ny = ny * ony;
        let mut mass = vec![0.0; xs.len() * total_ny];
        for x in 0..self.nx() {
            for x2 in 0..other.nx() {
                for y in 0..ny {
                    for y2 in 0..ony {
                        let xi = x * other.nx() + x2;
                        let yi = y * ony + y2;
                        mass[xi * total_ny + yi] = self.p(x, y) * other.p(x2, y2);
                    }
                }
            }
        }
        Self::new(xs, ys, mass)
    }

    pub fn nx(&self) -> usize {
        self.x_alphabet.len()
    }

    pub fn ny(&self) -> usize {
        self.y_alphabet.len()
    }

    pub fn x_alphabet(&self) -> &[String] {
        &self.x_alphabet
    }

    pub fn y_alphabet(&self) -> &[String] {
        &self.y_alphabet
    }

    /// Row-major mass table.
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    #[inline]
    pub fn p(&self, x: usize, y: usize) -> f64 {
        self.mass[x * self.ny() + y]
    }

    #[inline]
    pub fn px(&self, x: usize) -> f64 {
        self.px[x]
    }

    #[inline]
    pub fn py(&self, y: usize) -> f64 {
        self.py[y]
    }

    pub fn marginal_x(&self) -> &[f64] {
        &self.px
    }

    pub fn marginal_y(&self) -> &[f64] {
        &self.py
    }

    pub fn p_x_given_y(&self, x: usize, y: usize) -> f64 {
        if self.py[y] == 0.0 {
            0.0
        } else {
            self.p(x, y) / self.py[y]
        }
    }

    pub fn p_y_given_x(&self, y: usize, x: usize) -> f64 {
        if self.px[x] == 0.0 {
            0.0
        } else {
            self.p(x, y) / self.px[x]
        }
    }

    /// Positive-mass cells `(x, y, P(x,y))`.
    pub fn support(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let ny = self.ny();
        self.mass
            .iter()
            .enumerate()
            .filter(|(_, m)| **m > 0.0)
            .map(move |(i, m)| (i / ny, i % ny, *m))
    }

    pub fn joint_entropy(&self) -> f64 {
        self.support().map(|(_, _, m)| -m * m.log2()).sum()
    }

    pub fn entropy_x(&self) -> f64 {
        entropy(&self.px)
    }

    pub fn entropy_y(&self) -> f64 {
        entropy(&self.py)
    }

    pub fn entropy_x_given_y(&self) -> f64 {
        self.joint_entropy() - self.entropy_y()
    }

    pub fn entropy_y_given_x(&self) -> f64 {
        self.joint_entropy() - self.entropy_x()
    }

    pub fn mutual_information(&self) -> f64 {
        self.entropy_x() + self.entropy_y() - self.joint_entropy()
    }

    pub fn x_index(&self, label: &str) -> Option<usize> {
        self.x_alphabet.iter().position(|s| s == label)
    }

    pub fn y_index(&self, label: &str) -> Option<usize> {
        self.y_alphabet.iter().position(|s| s == label)
    }
}

pub(crate) fn entropy(p: &[f64]) -> f64 {
    p.iter().filter(|v| **v > 0.0).map(|v| -v * v.log2()).sum()
}

/// Binary entropy function in bits.
pub fn binary_entropy(p: f64) -> f64 {
    entropy(&[p, 1.0 - p])
}

/// Labels `"0".."1"` style fixed-width binary strings for `k` bits.
pub fn bit_labels(k: u32) -> Vec<String> {
    (0..1usize << k).map(|v| format!("{:0width$b}", v, width = k as usize)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unnormalized_mass() {
        let err = JointSource::new(vec!["a".into()], vec!["b".into()], vec![0.5]);
        assert!(matches!(err, Err(Error::InvalidDistribution(_))));
    }

    #[test]
    fn dsbs_marginals_are_uniform() {
        let s = JointSource::dsbs_bits(0.1, 3).unwrap();
        for x in 0..8 {
            assert!((s.px(x) - 0.125).abs() < 1e-12);
            assert!((s.py(x) - 0.125).abs() < 1e-12);
        }
        let h = 3.0 * binary_entropy(0.1);
        assert!((s.entropy_x_given_y() - h).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let s = JointSource::dsbs(0.25).unwrap();
        let back = JointSource::from_json(&s.to_json().unwrap()).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn json_rejects_unknown_fields() {
        let text = r#"{"x_alphabet":["0"],"y_alphabet":["0"],"mass":[[1.0]],"extra":1}"#;
        assert!(JointSource::from_json(text).is_err());
    }

    #[test]
    fn power_matches_bitwise_dsbs() {
        let a = JointSource::dsbs(0.2).unwrap().power(2).unwrap();
        let b = JointSource::dsbs_bits(0.2, 2).unwrap();
        assert_eq!(a.nx(), b.nx());
        assert!((a.joint_entropy() - b.joint_entropy()).abs() < 1e-12);
    }
}
