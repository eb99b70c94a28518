//! Character n-gram language models over weighted word corpora.
//!
//! Words are wrapped as `BOS^(n-1) word EOS` before counting, so a model of
//! order `n` conditions on the previous `n-1` symbols (left-padded with BOS
//! for short contexts). Probabilities use additive smoothing over the
//! emittable symbols; BOS is never emitted. Several models sharing an
//! alphabet fuse into a tempered product of experts: a normalized weighted
//! geometric mean of their conditional distributions.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alphabet::{Alphabet, Symbol};
use crate::{Error, Result};

/// Weighted word list: lowercase single words with weights in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Vocabulary {
    entries: Vec<(String, f64)>,
}

impl Vocabulary {
    pub fn new(entries: Vec<(String, f64)>) -> Result<Vocabulary> {
        if entries.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        let entries: Vec<(String, f64)> = entries
            .into_iter()
            .map(|(w, weight)| (w.to_lowercase(), weight))
            .collect();
        for (word, weight) in &entries {
            if word.is_empty() {
                return Err(Error::InvalidWord { word: word.clone(), reason: "empty".into() });
            }
            if word.chars().any(|c| c.is_whitespace()) {
                return Err(Error::InvalidWord {
                    word: word.clone(),
                    reason: "multiword names are not allowed".into(),
                });
            }
            if !weight.is_finite() || !(0.0..=1.0).contains(weight) {
                return Err(Error::InvalidWord {
                    word: word.clone(),
                    reason: format!("weight {weight} outside [0, 1]"),
                });
            }
        }
        Ok(Vocabulary { entries })
    }

    /// Parses the `word<TAB>weight` file format; `#` lines and blank lines
    /// are skipped.
    pub fn from_tsv(text: &str) -> Result<Vocabulary> {
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, weight) = line.split_once('\t').ok_or(Error::Parse {
                line: idx + 1,
                msg: "expected word<TAB>weight".into(),
            })?;
            let weight: f64 = weight.trim().parse().map_err(|_| Error::Parse {
                line: idx + 1,
                msg: format!("bad weight {weight:?}"),
            })?;
            entries.push((word.to_string(), weight));
        }
        Vocabulary::new(entries)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (word, weight) in &self.entries {
            out.push_str(word);
            out.push('\t');
            out.push_str(&weight.to_string());
            out.push('\n');
        }
        out
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.iter().any(|(w, _)| w == word)
    }

    pub fn weight(&self, word: &str) -> Option<f64> {
        self.entries.iter().find(|(w, _)| w == word).map(|(_, weight)| *weight)
    }
}

/// Count mass expectation-mode training normalizes to. Matching the default
/// sampling budget keeps `alpha` meaning the same thing in both modes, so
/// expectation- and sample-trained models agree.
pub const NOMINAL_SAMPLE_MASS: f64 = 100_000.0;

/// How training turns word weights into counts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum TrainMode {
    /// Counts are the exact expected counts of a [`NOMINAL_SAMPLE_MASS`]-draw
    /// weighted sample: fractional, weight-proportional, and reproducible.
    Expectation,
    /// Counts come from `count` weighted random draws of whole words.
    Sample { count: u64, seed: u64 },
}

/// Shared query surface of plain and fused models.
pub trait CharModel {
    fn alphabet(&self) -> &Alphabet;

    /// Distribution over the next symbol given a context, using the last
    /// `order - 1` symbols left-padded with BOS. Always sums to one;
    /// `P(BOS | ctx) = 0`.
    fn next_char_dist(&self, context: &[Symbol]) -> Vec<f64>;
}

/// Order-n character model with weighted counts and additive smoothing.
#[derive(Clone, Debug)]
pub struct NgramModel {
    order: usize,
    alphabet: Alphabet,
    alpha: f64,
    counts: HashMap<Vec<Symbol>, Vec<f64>>,
}

impl NgramModel {
    /// Trains a model from a weighted vocabulary.
    pub fn train_weighted(
        vocab: &Vocabulary,
        alphabet: &Alphabet,
        order: usize,
        alpha: f64,
        mode: TrainMode,
    ) -> Result<NgramModel> {
        if order < 1 {
            return Err(Error::InvalidConfig("order must be >= 1".into()));
        }
        if !(alpha >= 0.0) {
            return Err(Error::InvalidConfig(format!("alpha {alpha} must be >= 0")));
        }
        if vocab.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        let encoded: Vec<(Vec<Symbol>, f64)> = vocab
            .entries()
            .iter()
            .map(|(word, weight)| Ok((alphabet.encode_word(word)?, *weight)))
            .collect::<Result<_>>()?;

        let mut model = NgramModel {
            order,
            alphabet: alphabet.clone(),
            alpha,
            counts: HashMap::new(),
        };
        match mode {
            TrainMode::Expectation => {
                let total: f64 = encoded.iter().map(|(_, w)| w).sum();
                if total <= 0.0 {
                    return Err(Error::AllZeroWeights);
                }
                let scale = NOMINAL_SAMPLE_MASS / total;
                for (symbols, weight) in &encoded {
                    model.accumulate(symbols, weight * scale);
                }
            }
            TrainMode::Sample { count, seed } => {
                if count < 1 {
                    return Err(Error::InvalidConfig("sample count must be >= 1".into()));
                }
                let total: f64 = encoded.iter().map(|(_, w)| w).sum();
                if total <= 0.0 {
                    return Err(Error::AllZeroWeights);
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for _ in 0..count {
                    let mut u = rng.gen::<f64>() * total;
                    let mut pick = encoded.len() - 1;
                    for (i, (_, w)) in encoded.iter().enumerate() {
                        u -= w;
                        if u <= 0.0 {
                            pick = i;
                            break;
                        }
                    }
                    let symbols = encoded[pick].0.clone();
                    model.accumulate(&symbols, 1.0);
                }
            }
        }
        Ok(model)
    }

    /// Adds the padded word's (context, symbol) events with the given weight.
    fn accumulate(&mut self, word: &[Symbol], weight: f64) {
        let bos = self.alphabet.bos();
        let eos = self.alphabet.eos();
        let mut padded = vec![bos; self.order - 1];
        padded.extend_from_slice(word);
        padded.push(eos);
        let n_symbols = self.alphabet.len();
        for t in 0..=word.len() {
            let context = padded[t..t + self.order - 1].to_vec();
            let symbol = padded[t + self.order - 1];
            let slot = self
                .counts
                .entry(context)
                .or_insert_with(|| vec![0.0; n_symbols]);
            slot[symbol.index()] += weight;
        }
    }

    /// Builds a model directly from a sparse count table. Contexts must have
    /// length `order - 1`; BOS counts are rejected since BOS is never
    /// emitted.
    pub fn from_counts(
        alphabet: Alphabet,
        order: usize,
        alpha: f64,
        counts: HashMap<Vec<Symbol>, Vec<f64>>,
    ) -> Result<NgramModel> {
        if order < 1 {
            return Err(Error::InvalidConfig("order must be >= 1".into()));
        }
        if !(alpha >= 0.0) {
            return Err(Error::InvalidConfig(format!("alpha {alpha} must be >= 0")));
        }
        for (context, row) in &counts {
            if context.len() != order - 1 {
                return Err(Error::InvalidConfig("context length must be order - 1".into()));
            }
            if row.len() != alphabet.len() {
                return Err(Error::ShapeMismatch { left: row.len(), right: alphabet.len() });
            }
            if row[alphabet.bos().index()] != 0.0 {
                return Err(Error::InvalidConfig("BOS cannot carry emission counts".into()));
            }
            if row.iter().any(|c| !c.is_finite() || *c < 0.0) {
                return Err(Error::InvalidConfig("counts must be finite and >= 0".into()));
            }
        }
        Ok(NgramModel { order, alphabet, alpha, counts })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// The trailing `order - 1` symbols of `context`, left-padded with BOS.
    fn context_key(&self, context: &[Symbol]) -> Vec<Symbol> {
        let want = self.order - 1;
        let mut key = Vec::with_capacity(want);
        if context.len() < want {
            key.resize(want - context.len(), self.alphabet.bos());
            key.extend_from_slice(context);
        } else {
            key.extend_from_slice(&context[context.len() - want..]);
        }
        key
    }

    /// Serializes to a JSON document with a sparse, deterministically ordered
    /// count table.
    pub fn to_json(&self) -> String {
        let doc = ModelDoc::from(self);
        serde_json::to_string_pretty(&doc).expect("model serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<NgramModel> {
        let doc: ModelDoc = serde_json::from_str(text)?;
        doc.into_model()
    }
}

impl CharModel for NgramModel {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn next_char_dist(&self, context: &[Symbol]) -> Vec<f64> {
        let n = self.alphabet.len();
        let bos = self.alphabet.bos().index();
        let key = self.context_key(context);
        let mut probs = vec![0.0; n];
        match self.counts.get(&key) {
            Some(row) => {
                let total: f64 = row.iter().sum();
                let denom = total + self.alpha * self.alphabet.emittable_len() as f64;
                if denom > 0.0 {
                    for (i, p) in probs.iter_mut().enumerate() {
                        if i != bos {
                            *p = (row[i] + self.alpha) / denom;
                        }
                    }
                    return probs;
                }
                // total == 0 and alpha == 0 falls through to uniform.
            }
            None => {}
        }
        // Unseen context: the smoothing formula with zero counts, i.e.
        // uniform over the emittable symbols (also the alpha -> 0 limit).
        let uniform = 1.0 / self.alphabet.emittable_len() as f64;
        for (i, p) in probs.iter_mut().enumerate() {
            if i != bos {
                *p = uniform;
            }
        }
        probs
    }
}

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    order: usize,
    alphabet: Vec<String>,
    alpha: f64,
    counts: BTreeMap<String, BTreeMap<String, f64>>,
}

// Context keys join symbol labels with spaces ("BOS BOS q u i n").
impl From<&NgramModel> for ModelDoc {
    fn from(model: &NgramModel) -> ModelDoc {
        let a = &model.alphabet;
        let mut counts = BTreeMap::new();
        for (context, row) in &model.counts {
            let key = context.iter().map(|&s| a.label(s)).collect::<Vec<_>>().join(" ");
            let mut entry = BTreeMap::new();
            for (i, &c) in row.iter().enumerate() {
                if c != 0.0 {
                    entry.insert(a.label(Symbol(i as u8)), c);
                }
            }
            counts.insert(key, entry);
        }
        ModelDoc { order: model.order, alphabet: a.labels(), alpha: model.alpha, counts }
    }
}

impl ModelDoc {
    fn into_model(self) -> Result<NgramModel> {
        let alphabet = Alphabet::from_labels(&self.alphabet)?;
        let mut counts = HashMap::new();
        for (key, entry) in self.counts {
            let context: Vec<Symbol> = if key.is_empty() {
                Vec::new()
            } else {
                key.split(' ')
                    .map(|label| {
                        alphabet
                            .from_label(label)
                            .ok_or_else(|| Error::UnknownSymbol(label.to_string()))
                    })
                    .collect::<Result<_>>()?
            };
            let mut row = vec![0.0; alphabet.len()];
            for (label, count) in entry {
                let s = alphabet
                    .from_label(&label)
                    .ok_or_else(|| Error::UnknownSymbol(label.clone()))?;
                row[s.index()] = count;
            }
            counts.insert(context, row);
        }
        NgramModel::from_counts(alphabet, self.order, self.alpha, counts)
    }
}

/// Tempered product of experts over models with a shared alphabet.
#[derive(Clone, Debug)]
pub struct FusedCharModel {
    components: Vec<(NgramModel, f64)>,
}

/// Fuses models into a normalized weighted geometric mean. Exponents must be
/// positive and sum to one within 1e-9.
pub fn fuse_char_models(models: Vec<NgramModel>, exponents: &[f64]) -> Result<FusedCharModel> {
    if models.is_empty() || models.len() != exponents.len() {
        return Err(Error::ShapeMismatch { left: models.len(), right: exponents.len() });
    }
    if exponents.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidConfig("exponents must be positive".into()));
    }
    let sum: f64 = exponents.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized { sum });
    }
    if models.iter().any(|m| m.alphabet != models[0].alphabet) {
        return Err(Error::AlphabetMismatch);
    }
    Ok(FusedCharModel {
        components: models.into_iter().zip(exponents.iter().copied()).collect(),
    })
}

impl FusedCharModel {
    pub fn components(&self) -> &[(NgramModel, f64)] {
        &self.components
    }
}

impl CharModel for FusedCharModel {
    fn alphabet(&self) -> &Alphabet {
        &self.components[0].0.alphabet
    }

    fn next_char_dist(&self, context: &[Symbol]) -> Vec<f64> {
        let n = self.alphabet().len();
        // Weighted geometric mean in log space; a zero in any component
        // zeroes the product.
        let mut log_probs = vec![0.0f64; n];
        for (model, exponent) in &self.components {
            let dist = model.next_char_dist(context);
            for (acc, &p) in log_probs.iter_mut().zip(&dist) {
                *acc += if p > 0.0 { exponent * p.ln() } else { f64::NEG_INFINITY };
            }
        }
        let max = log_probs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut probs = vec![0.0; n];
        if max == f64::NEG_INFINITY {
            // Every symbol vanished in some component; fall back to uniform
            // over emittable symbols so the result is still a distribution.
            let bos = self.alphabet().bos().index();
            let uniform = 1.0 / self.alphabet().emittable_len() as f64;
            for (i, p) in probs.iter_mut().enumerate() {
                if i != bos {
                    *p = uniform;
                }
            }
            return probs;
        }
        let mut total = 0.0;
        for (p, &lp) in probs.iter_mut().zip(&log_probs) {
            if lp > f64::NEG_INFINITY {
                *p = (lp - max).exp();
                total += *p;
            }
        }
        probs.iter_mut().for_each(|p| *p /= total);
        probs
    }
}

/// Log-probability of a word including its terminal EOS step. A
/// zero-probability step yields `-inf`.
pub fn sequence_logprob<M: CharModel + ?Sized>(model: &M, word: &str) -> Result<f64> {
    let alphabet = model.alphabet();
    let mut symbols = alphabet.encode_word(word)?;
    symbols.push(alphabet.eos());
    let mut logprob = 0.0;
    for t in 0..symbols.len() {
        let dist = model.next_char_dist(&symbols[..t]);
        let p = dist[symbols[t].index()];
        if p <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        logprob += p.ln();
    }
    Ok(logprob)
}

/// Character-level perplexity over words:
/// `exp(-sum logprob / sum padded lengths)` where each padded length counts
/// the terminal EOS. Any `-inf` word log-probability is an error.
pub fn perplexity<M: CharModel + ?Sized>(model: &M, words: &[String]) -> Result<f64> {
    if words.is_empty() {
        return Err(Error::InvalidConfig("perplexity needs at least one word".into()));
    }
    let mut total_logprob = 0.0;
    let mut total_len = 0usize;
    for word in words {
        let lp = sequence_logprob(model, word)?;
        if lp == f64::NEG_INFINITY {
            return Err(Error::ZeroProbabilityWord { word: word.clone() });
        }
        total_logprob += lp;
        total_len += word.chars().count() + 1;
    }
    Ok((-total_logprob / total_len as f64).exp())
}
