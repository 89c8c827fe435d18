//! Conditional transcript laws `P_{Π|XY}`, `P_{Π|X}`, `P_{Π|Y}`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::probcore::{
    spectrum_from_atoms, Density, DensityModel, FiniteDistribution, JointSource, SpectrumTable, ViewAtom,
    MASS_TOLERANCE,
};
use crate::protocol::tree::ProtocolTree;

/// Sparse conditional row: `(transcript, probability)` pairs sorted by transcript.
pub type Row = Vec<(usize, f64)>;

/// A view `(τ_X, τ_Y, x, y)`: the two parties' transcript estimates (`None` for ⊥)
/// and the inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ViewKey {
    pub tau_x: Option<usize>,
    pub tau_y: Option<usize>,
    pub x: usize,
    pub y: usize,
}

/// Exact transcript law of a protocol run on a source.
#[derive(Debug, Clone)]
pub struct TranscriptLaw {
    source: JointSource,
    labels: Vec<String>,
    by_xy: Vec<Row>,
    by_x: Vec<Row>,
    by_y: Vec<Row>,
}

fn lookup(row: &Row, tau: usize) -> f64 {
    row.binary_search_by_key(&tau, |(t, _)| *t).map(|i| row[i].1).unwrap_or(0.0)
}

fn accumulate(row: &mut Vec<f64>, src: &Row, w: f64) {
    for (t, p) in src {
        row[*t] += w * p;
    }
}

// dividing by the accumulated weight keeps deterministic rows exactly at 1
fn normalized(dense: Vec<f64>, total: f64) -> Row {
    if total > 0.0 {
        sparse(dense.into_iter().map(|p| p / total).collect())
    } else {
        Vec::new()
    }
}

fn sparse(dense: Vec<f64>) -> Row {
    dense.into_iter().enumerate().filter(|(_, p)| *p > 0.0).collect()
}

impl TranscriptLaw {
    /// Builds a law from `P_{Π|XY}` rows indexed `x * |Y| + y`.
    ///
    /// Rows of positive-mass input pairs must sum to one; rows of zero-mass
    /// pairs are kept as given (they never influence any derived quantity).
    pub fn from_conditional(source: JointSource, labels: Vec<String>, by_xy: Vec<Row>) -> Result<Self> {
        let (nx, ny, nt) = (source.nx(), source.ny(), labels.len());
        if by_xy.len() != nx * ny {
            return Err(Error::AlphabetMismatch(format!(
                "{} conditional rows for a {}x{} source",
                by_xy.len(),
                nx,
                ny
            )));
        }
        let mut rows = Vec::with_capacity(by_xy.len());
        for (cell, row) in by_xy.into_iter().enumerate() {
            let mut row: Row = row.into_iter().filter(|(_, p)| *p > 0.0).collect();
            row.sort_by_key(|(t, _)| *t);
            if let Some((t, _)) = row.iter().find(|(t, _)| *t >= nt) {
                return Err(Error::InvalidProtocol(format!("transcript index {t} out of range")));
            }
            if row.iter().any(|(_, p)| !p.is_finite()) {
                return Err(Error::InvalidProtocol("non-finite transcript probability".into()));
            }
            let total: f64 = row.iter().map(|(_, p)| p).sum();
            if source.mass()[cell] > 0.0 && (total - 1.0).abs() > MASS_TOLERANCE {
                return Err(Error::InvalidProtocol(format!(
                    "P(.|x,y) sums to {total} for input pair {} {}",
                    cell / ny,
                    cell % ny
                )));
            }
            rows.push(row);
        }
        let mut by_x = Vec::with_capacity(nx);
        for x in 0..nx {
            let mut acc = vec![0.0; nt];
            let mut total = 0.0;
            for y in 0..ny {
                if source.p(x, y) > 0.0 {
                    accumulate(&mut acc, &rows[x * ny + y], source.p(x, y));
                    total += source.p(x, y);
                }
            }
            by_x.push(normalized(acc, total));
        }
        let mut by_y = Vec::with_capacity(ny);
        for y in 0..ny {
            let mut acc = vec![0.0; nt];
            let mut total = 0.0;
            for x in 0..nx {
                if source.p(x, y) > 0.0 {
                    accumulate(&mut acc, &rows[x * ny + y], source.p(x, y));
                    total += source.p(x, y);
                }
            }
            by_y.push(normalized(acc, total));
        }
        Ok(Self { source, labels, by_xy: rows, by_x, by_y })
    }

    /// Exact law of a tree protocol: path products of the bit laws.
    pub fn from_tree(tree: &ProtocolTree, source: &JointSource) -> Result<Self> {
        let (nx, ny) = (source.nx(), source.ny());
        tree.check_alphabets(nx, ny)?;
        let mut by_xy: Vec<Row> = vec![Vec::new(); nx * ny];
        for (t, &leaf) in tree.leaves().iter().enumerate() {
            let (a1, a2) = tree.path_weights(leaf, nx, ny);
            for x in 0..nx {
                if a1[x] == 0.0 {
                    continue;
                }
                for y in 0..ny {
                    let p = a1[x] * a2[y];
                    if p > 0.0 {
                        by_xy[x * ny + y].push((t, p));
                    }
                }
            }
        }
        Self::from_conditional(source.clone(), tree.leaf_labels(), by_xy)
    }

    pub fn source(&self) -> &JointSource {
        &self.source
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n_transcripts(&self) -> usize {
        self.labels.len()
    }

    pub fn row_xy(&self, x: usize, y: usize) -> &Row {
        &self.by_xy[x * self.source.ny() + y]
    }

    pub fn row_x(&self, x: usize) -> &Row {
        &self.by_x[x]
    }

    pub fn row_y(&self, y: usize) -> &Row {
        &self.by_y[y]
    }

    pub fn p_tau_given_xy(&self, tau: usize, x: usize, y: usize) -> f64 {
        lookup(self.row_xy(x, y), tau)
    }

    pub fn p_tau_given_x(&self, tau: usize, x: usize) -> f64 {
        lookup(&self.by_x[x], tau)
    }

    pub fn p_tau_given_y(&self, tau: usize, y: usize) -> f64 {
        lookup(&self.by_y[y], tau)
    }

    /// Information complexity density `log P(τ|xy)/P(τ|x) + log P(τ|xy)/P(τ|y)`.
    pub fn ic_density(&self, tau: usize, x: usize, y: usize) -> Result<f64> {
        let p = self.p_tau_given_xy(tau, x, y);
        if p <= 0.0 || self.source.p(x, y) <= 0.0 {
            return Err(Error::ZeroMassAtom(format!("P(tau={tau}, x={x}, y={y}) = 0")));
        }
        Ok((p / self.p_tau_given_x(tau, x)).log2() + (p / self.p_tau_given_y(tau, y)).log2())
    }

    /// One view atom per positive-mass triple `(τ, x, y)`.
    pub fn view_atoms(&self) -> Vec<ViewAtom> {
        let mut atoms = Vec::new();
        for (x, y, m) in self.source.support() {
            for &(t, p) in self.row_xy(x, y) {
                atoms.push(ViewAtom {
                    prob: m * p,
                    p_xy: m,
                    p_x: self.source.px(x),
                    p_y: self.source.py(y),
                    p_tau_xy: p,
                    p_tau_x: self.p_tau_given_x(t, x),
                    p_tau_y: self.p_tau_given_y(t, y),
                });
            }
        }
        atoms
    }

    /// All positive-mass triples `(τ, x, y, P(τ,x,y))`.
    pub fn triples(&self) -> Vec<(usize, usize, usize, f64)> {
        let mut out = Vec::new();
        for (x, y, m) in self.source.support() {
            for &(t, p) in self.row_xy(x, y) {
                out.push((t, x, y, m * p));
            }
        }
        out
    }

    /// Information complexity `IC = E[ic(Π;X,Y)]`.
    pub fn information_complexity(&self) -> Result<f64> {
        Ok(self.spectrum(Density::Ic)?.mean())
    }

    /// The law of the ideal view `(Π, Π, X, Y)`.
    pub fn true_view(&self) -> FiniteDistribution<ViewKey> {
        FiniteDistribution::new(
            self.triples()
                .into_iter()
                .map(|(t, x, y, p)| (ViewKey { tau_x: Some(t), tau_y: Some(t), x, y }, p)),
        )
        .expect("transcript law is normalized")
    }

    /// Whether the transcript depends on `x` alone (`Π − X − Y`).
    pub fn is_one_way(&self) -> bool {
        self.source.support().all(|(x, y, _)| {
            let row = self.row_xy(x, y);
            let rx = &self.by_x[x];
            row.len() == rx.len()
                && row.iter().zip(rx).all(|(a, b)| a.0 == b.0 && (a.1 - b.1).abs() <= 1e-9)
        })
    }

    /// Law of two independent protocols run on independent source copies.
    pub fn product(&self, other: &TranscriptLaw) -> Result<TranscriptLaw> {
        let source = self.source.product(&other.source)?;
        let (ny1, ny2) = (self.source.ny(), other.source.ny());
        let nt2 = other.n_transcripts();
        let mut labels = Vec::with_capacity(self.labels.len() * nt2);
        for a in &self.labels {
            for b in &other.labels {
                labels.push(format!("{a}|{b}"));
            }
        }
        let mut by_xy = vec![Vec::new(); source.nx() * source.ny()];
        for x1 in 0..self.source.nx() {
            for x2 in 0..other.source.nx() {
                for y1 in 0..ny1 {
                    for y2 in 0..ny2 {
                        let x = x1 * other.source.nx() + x2;
                        let y = y1 * ny2 + y2;
                        let mut row = Vec::new();
                        for &(t1, p1) in self.row_xy(x1, y1) {
                            for &(t2, p2) in other.row_xy(x2, y2) {
                                row.push((t1 * nt2 + t2, p1 * p2));
                            }
                        }
                        by_xy[x * source.ny() + y] = row;
                    }
                }
            }
        }
        TranscriptLaw::from_conditional(source, labels, by_xy)
    }
}

impl DensityModel for TranscriptLaw {
    fn spectrum(&self, d: Density) -> Result<SpectrumTable> {
        spectrum_from_atoms(&self.view_atoms(), d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::generators;

    #[test]
    fn constant_protocol_has_zero_ic() {
        let s = JointSource::dsbs(0.25).unwrap();
        let law = TranscriptLaw::from_tree(&generators::constant(), &s).unwrap();
        let spec = law.spectrum(Density::Ic).unwrap();
        assert_eq!(spec.atoms(), &[(0.0, 1.0)]);
    }

    #[test]
    fn send_x_on_dsbs() {
        let s = JointSource::dsbs(0.25).unwrap();
        let law = TranscriptLaw::from_tree(&generators::send_x(&s), &s).unwrap();
        assert!((law.ic_density(0, 0, 0).unwrap() - (4.0f64 / 3.0).log2()).abs() < 1e-12);
        assert!((law.ic_density(1, 1, 0).unwrap() - 2.0).abs() < 1e-12);
        assert!(law.ic_density(1, 0, 0).is_err());
        assert!(law.is_one_way());
    }
}

/// The law of a single one-way round `Π₁ − X − Y`: `P(τ|x)` and the induced `P(τ|y)`.
#[derive(Debug, Clone)]
pub struct RoundLaw {
    source: JointSource,
    labels: Vec<String>,
    cond_x: Vec<Row>,
    cond_y: Vec<Row>,
}

impl RoundLaw {
    /// Builds the round from `P(τ|x)` rows.
    pub fn new(source: JointSource, labels: Vec<String>, cond_x: Vec<Row>) -> Result<Self> {
        if cond_x.len() != source.nx() {
            return Err(Error::AlphabetMismatch(format!(
                "{} rows for an alphabet of {}",
                cond_x.len(),
                source.nx()
            )));
        }
        let nt = labels.len();
        let cond_x: Vec<Row> = cond_x
            .into_iter()
            .map(|r| {
                let mut r: Row = r.into_iter().filter(|(_, p)| *p > 0.0).collect();
                r.sort_by_key(|(t, _)| *t);
                r
            })
            .collect();
        for (x, row) in cond_x.iter().enumerate() {
            let total: f64 = row.iter().map(|(_, p)| p).sum();
            if row.iter().any(|(t, _)| *t >= nt) || (source.px(x) > 0.0 && (total - 1.0).abs() > MASS_TOLERANCE) {
                return Err(Error::InvalidProtocol(format!("P(.|x) row {x} is not a distribution over the transcripts")));
            }
        }
        let mut cond_y = Vec::with_capacity(source.ny());
        for y in 0..source.ny() {
            let mut acc = vec![0.0; nt];
            for x in 0..source.nx() {
                if source.p(x, y) > 0.0 {
                    accumulate(&mut acc, &cond_x[x], source.p_x_given_y(x, y));
                }
            }
            cond_y.push(sparse(acc));
        }
        Ok(Self { source, labels, cond_x, cond_y })
    }

    /// The round of a one-way law (its transcript must not depend on `y`).
    pub fn from_law(law: &TranscriptLaw) -> Result<Self> {
        if !law.is_one_way() {
            return Err(Error::InvalidProtocol("transcript depends on Y; not a single one-way round".into()));
        }
        Self::new(law.source().clone(), law.labels().to_vec(), law.by_x.clone())
    }

    /// The first round of a tree protocol; transcripts are the nodes where
    /// party 1's opening run ends, in depth-first order.
    pub fn first_round(tree: &ProtocolTree, source: &JointSource) -> Result<Self> {
        tree.check_alphabets(source.nx(), source.ny())?;
        let ends = tree.round_ends(0);
        if ends.is_empty() {
            return Err(Error::InvalidProtocol("protocol sends nothing".into()));
        }
        let labels = ends
            .iter()
            .map(|e| match tree.node(e.node) {
                crate::protocol::tree::Node::Leaf { label } => label.clone(),
                _ => format!("node{}", e.node),
            })
            .collect();
        let cond_x = (0..source.nx())
            .map(|x| ends.iter().enumerate().map(|(t, e)| (t, e.prob[x])).collect())
            .collect();
        Self::new(source.clone(), labels, cond_x)
    }

    pub fn source(&self) -> &JointSource {
        &self.source
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n_transcripts(&self) -> usize {
        self.labels.len()
    }

    pub fn row_x(&self, x: usize) -> &Row {
        &self.cond_x[x]
    }

    pub fn row_y(&self, y: usize) -> &Row {
        &self.cond_y[y]
    }

    pub fn p_tau_given_x(&self, tau: usize, x: usize) -> f64 {
        lookup(&self.cond_x[x], tau)
    }

    pub fn p_tau_given_y(&self, tau: usize, y: usize) -> f64 {
        lookup(&self.cond_y[y], tau)
    }

    /// The round as a full transcript law.
    pub fn to_law(&self) -> Result<TranscriptLaw> {
        let ny = self.source.ny();
        let by_xy = (0..self.source.nx() * ny).map(|c| self.cond_x[c / ny].clone()).collect();
        TranscriptLaw::from_conditional(self.source.clone(), self.labels.clone(), by_xy)
    }

    /// Joint table `P(τ, x)` indexed `[τ][x]`.
    pub fn joint_tau_x(&self) -> Vec<Vec<f64>> {
        let mut t = vec![vec![0.0; self.source.nx()]; self.labels.len()];
        for x in 0..self.source.nx() {
            for &(tau, p) in &self.cond_x[x] {
                t[tau][x] = p * self.source.px(x);
            }
        }
        t
    }
}
