//! Per-agent corpus construction from the shared weighted vocabulary.

use serde::{Deserialize, Serialize};

use planchette_core::lm::Vocabulary;
use planchette_core::{Error, Result};

/// The bundled 100-flower vocabulary shipped with the binary.
pub fn bundled_vocabulary() -> Vocabulary {
    Vocabulary::from_tsv(include_str!("../data/flowers.tsv"))
        .expect("bundled vocabulary is well-formed")
}

/// Weighting scheme applied to the base vocabulary for one agent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Weights proportional to the colorfulness weight `w`.
    Colorful,
    /// Weights proportional to `1 - w`.
    Reverse,
    /// Equal weights.
    Uniform,
}

impl Scheme {
    pub fn label(self) -> &'static str {
        match self {
            Scheme::Colorful => "colorful",
            Scheme::Reverse => "reverse",
            Scheme::Uniform => "uniform",
        }
    }
}

/// Reweights the vocabulary for one agent and normalizes to sum one.
pub fn build_agent_corpora(vocab: &Vocabulary, scheme: Scheme) -> Result<Vocabulary> {
    let raw: Vec<(String, f64)> = vocab
        .entries()
        .iter()
        .map(|(word, w)| {
            let weight = match scheme {
                Scheme::Colorful => *w,
                Scheme::Reverse => 1.0 - *w,
                Scheme::Uniform => 1.0,
            };
            (word.clone(), weight)
        })
        .collect();
    let total: f64 = raw.iter().map(|(_, w)| w).sum();
    if total <= 0.0 {
        return Err(Error::AllZeroWeights);
    }
    Vocabulary::new(raw.into_iter().map(|(word, w)| (word, w / total)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_vocabulary_has_100_entries() {
        let v = bundled_vocabulary();
        assert_eq!(v.len(), 100);
        assert!(v.contains("quince"));
        assert!(v.contains("petunia"));
    }

    #[test]
    fn reverse_flips_and_normalizes() {
        let v = Vocabulary::new(vec![("aa".into(), 1.0), ("bb".into(), 0.0)]).unwrap();
        let r = build_agent_corpora(&v, Scheme::Reverse).unwrap();
        assert_eq!(r.weight("aa"), Some(0.0));
        assert_eq!(r.weight("bb"), Some(1.0));
    }

    #[test]
    fn uniform_gives_equal_shares() {
        let v = bundled_vocabulary();
        let u = build_agent_corpora(&v, Scheme::Uniform).unwrap();
        for (_, w) in u.entries() {
            assert!((w - 0.01).abs() < 1e-12);
        }
    }

    #[test]
    fn colorful_then_reverse_arithmetic() {
        let v = Vocabulary::new(vec![("aa".into(), 0.8), ("bb".into(), 0.2)]).unwrap();
        let colorful = build_agent_corpora(&v, Scheme::Colorful).unwrap();
        assert_eq!(colorful.weight("aa"), Some(0.8));
        assert_eq!(colorful.weight("bb"), Some(0.2));
        let reversed = build_agent_corpora(&colorful, Scheme::Reverse).unwrap();
        assert!((reversed.weight("aa").unwrap() - 0.2).abs() < 1e-12);
        assert!((reversed.weight("bb").unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn degenerate_reverse_weights_error() {
        let v = Vocabulary::new(vec![("aa".into(), 1.0), ("bb".into(), 1.0)]).unwrap();
        assert!(matches!(build_agent_corpora(&v, Scheme::Reverse), Err(Error::AllZeroWeights)));
    }
}
