//! Seeded synthetic datasets with known cluster structure.
//!
//! Normal draws use the ziggurat sampler of `rand_distr::StandardNormal` on a
//! ChaCha8 stream seeded from the spec seed, so a spec always regenerates the
//! exact same matrix.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::seed::rng_from_seed;

/// Component means of the three-component dataset (identity covariances).
pub const THREE_COMPONENT_MEANS: [[f64; 3]; 3] =
    [[0.0, 0.0, 0.0], [5.0, 0.0, 0.0], [0.0, 5.0, 0.0]];

/// Double-cigar means; both components share covariance `diag(1, 200)`.
pub const DOUBLE_CIGAR_MEANS: [[f64; 2]; 2] = [[-3.0, 0.0], [3.0, 0.0]];
pub const DOUBLE_CIGAR_VARIANCES: [f64; 2] = [1.0, 200.0];

/// One-dimensional hierarchy: pairs 2 apart, pairs of pairs 7 apart, halves
/// mirrored around 0.
pub const HIERARCHY_MEANS: [f64; 8] = [-15.0, -13.0, -8.0, -6.0, 6.0, 8.0, 13.0, 15.0];
pub const HIERARCHY_SD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticKind {
    ThreeComponent,
    DoubleCigar,
    Hierarchy,
}

impl SyntheticKind {
    pub fn name(self) -> &'static str {
        match self {
            SyntheticKind::ThreeComponent => "three_component",
            SyntheticKind::DoubleCigar => "double_cigar",
            SyntheticKind::Hierarchy => "hierarchy",
        }
    }

    fn components(self) -> usize {
        match self {
            SyntheticKind::ThreeComponent => 3,
            SyntheticKind::DoubleCigar => 2,
            SyntheticKind::Hierarchy => 8,
        }
    }

    /// 100 points for the three-component set, 100 per component otherwise.
    pub fn default_n(self) -> usize {
        match self {
            SyntheticKind::ThreeComponent => 100,
            SyntheticKind::DoubleCigar => 200,
            SyntheticKind::Hierarchy => 800,
        }
    }
}

impl fmt::Display for SyntheticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "three_component" => Ok(SyntheticKind::ThreeComponent),
            "double_cigar" => Ok(SyntheticKind::DoubleCigar),
            "hierarchy" => Ok(SyntheticKind::Hierarchy),
            other => Err(Error::Input(format!("unknown synthetic kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticSpec {
    pub kind: SyntheticKind,
    /// Total sample count, split as evenly as possible across components
    /// (earlier components take the remainder). `None` uses the kind's default.
    pub n: Option<usize>,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(kind: SyntheticKind, seed: u64) -> Self {
        Self {
            kind,
            n: None,
            seed,
        }
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }
}

/// A generated matrix with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub data: DataMatrix,
    /// Generating component of every row.
    pub labels: Vec<usize>,
    /// Truth at every granularity, coarsest first; the last entry equals `labels`.
    pub levels: Vec<Vec<usize>>,
}

pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticData> {
    let kind = spec.kind;
    let n = spec.n.unwrap_or(kind.default_n());
    let components = kind.components();
    if n < components {
        return Err(Error::Input(format!(
            "{kind} needs at least {components} samples, got {n}"
        )));
    }
    let mut rng = rng_from_seed(spec.seed);
    let mut normal = move || rng.sample::<f64, _>(StandardNormal);

    let mut labels = Vec::with_capacity(n);
    for c in 0..components {
        let count = n / components + usize::from(c < n % components);
        labels.extend(std::iter::repeat_n(c, count));
    }

    let (d, values): (usize, Vec<f64>) = match kind {
        SyntheticKind::ThreeComponent => (
            3,
            labels
                .iter()
                .flat_map(|&c| THREE_COMPONENT_MEANS[c].map(|m| m + normal()))
                .collect(),
        ),
        SyntheticKind::DoubleCigar => (
            2,
            labels
                .iter()
                .flat_map(|&c| {
                    let [mx, my] = DOUBLE_CIGAR_MEANS[c];
                    let x = mx + DOUBLE_CIGAR_VARIANCES[0].sqrt() * normal();
                    let y = my + DOUBLE_CIGAR_VARIANCES[1].sqrt() * normal();
                    [x, y]
                })
                .collect(),
        ),
        SyntheticKind::Hierarchy => (
            1,
            labels
                .iter()
                .map(|&c| HIERARCHY_MEANS[c] + HIERARCHY_SD * normal())
                .collect(),
        ),
    };

    let levels = match kind {
        SyntheticKind::Hierarchy => vec![
            labels.iter().map(|c| c / 4).collect(),
            labels.iter().map(|c| c / 2).collect(),
            labels.clone(),
        ],
        _ => vec![labels.clone()],
    };
    Ok(SyntheticData {
        data: DataMatrix::new(n, d, values)?,
        labels,
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn component_means(s: &SyntheticData, c: usize) -> Vec<f64> {
        let rows: Vec<&[f64]> = s
            .data
            .rows()
            .zip(&s.labels)
            .filter(|(_, &l)| l == c)
            .map(|(r, _)| r)
            .collect();
        (0..s.data.ncols())
            .map(|a| rows.iter().map(|r| r[a]).sum::<f64>() / rows.len() as f64)
            .collect()
    }

    #[test]
    fn three_component_shape_and_means() {
        let s = generate(&SyntheticSpec::new(SyntheticKind::ThreeComponent, 7)).unwrap();
        assert_eq!((s.data.nrows(), s.data.ncols()), (100, 3));
        let bound = 3.0 / (100.0f64 / 3.0).sqrt();
        for c in 0..3 {
            for (m, t) in component_means(&s, c).iter().zip(THREE_COMPONENT_MEANS[c]) {
                assert!((m - t).abs() < bound, "component {c}: {m} vs {t}");
            }
        }
    }

    #[test]
    fn double_cigar_spread() {
        let s = generate(&SyntheticSpec::new(SyntheticKind::DoubleCigar, 7)).unwrap();
        assert_eq!((s.data.nrows(), s.data.ncols()), (200, 2));
        let ys: Vec<f64> = s.data.rows().map(|r| r[1]).collect();
        let mean = ys.iter().sum::<f64>() / 200.0;
        let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / 199.0;
        assert!((140.0..=260.0).contains(&var), "{var}");
    }

    #[test]
    fn hierarchy_levels() {
        let s = generate(&SyntheticSpec::new(SyntheticKind::Hierarchy, 7)).unwrap();
        assert_eq!((s.data.nrows(), s.data.ncols()), (800, 1));
        assert_eq!(s.levels.len(), 3);
        assert_eq!(s.levels[0].iter().filter(|&&l| l == 0).count(), 400);
        assert_eq!(s.levels[1].iter().filter(|&&l| l == 3).count(), 200);
        assert_eq!(s.levels[2], s.labels);
    }

    #[test]
    fn bit_identical_regeneration() {
        for kind in [
            SyntheticKind::ThreeComponent,
            SyntheticKind::DoubleCigar,
            SyntheticKind::Hierarchy,
        ] {
            let a = generate(&SyntheticSpec::new(kind, 3)).unwrap();
            let b = generate(&SyntheticSpec::new(kind, 3)).unwrap();
            assert!(a
                .data
                .as_slice()
                .iter()
                .zip(b.data.as_slice())
                .all(|(x, y)| x.to_bits() == y.to_bits()));
            assert_ne!(a.data, generate(&SyntheticSpec::new(kind, 4)).unwrap().data);
        }
    }
}
