//! The shared symbol set: lowercase letters plus the BOS/EOS markers.
//!
//! Boards and language models both index distributions by [`Symbol`], a
//! position into an [`Alphabet`]. The ordering of the alphabet is significant:
//! deterministic tie-breaking (nearest-goal and vote argmax) always favors the
//! lowest symbol index.

use crate::{Error, Result};

/// Literal label used for the begin-of-sequence marker in text formats.
pub const BOS_LABEL: &str = "BOS";
/// Literal label used for the end-of-sequence marker in text formats.
pub const EOS_LABEL: &str = "EOS";

/// Index of a symbol within its [`Alphabet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(pub u8);

impl Symbol {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum SymbolKind {
    Bos,
    Eos,
    Letter(char),
}

/// Ordered symbol set with exactly one BOS and one EOS.
///
/// BOS is never emitted by a model (it only pads contexts), so the emittable
/// set is everything except BOS.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    kinds: Vec<SymbolKind>,
    bos: Symbol,
    eos: Symbol,
}

impl Alphabet {
    /// Builds an alphabet from symbol labels in order. Labels are `BOS`,
    /// `EOS`, or single lowercase letters; each may appear once.
    pub fn from_labels<S: AsRef<str>>(labels: &[S]) -> Result<Alphabet> {
        let mut kinds = Vec::with_capacity(labels.len());
        let mut bos = None;
        let mut eos = None;
        for (i, label) in labels.iter().enumerate() {
            let label = label.as_ref();
            let kind = match label {
                BOS_LABEL => {
                    if bos.replace(Symbol(i as u8)).is_some() {
                        return Err(Error::InvalidConfig("duplicate BOS symbol".into()));
                    }
                    SymbolKind::Bos
                }
                EOS_LABEL => {
                    if eos.replace(Symbol(i as u8)).is_some() {
                        return Err(Error::InvalidConfig("duplicate EOS symbol".into()));
                    }
                    SymbolKind::Eos
                }
                _ => {
                    let mut chars = label.chars();
                    let c = chars.next().ok_or_else(|| {
                        Error::InvalidConfig("empty symbol label".into())
                    })?;
                    if chars.next().is_some() || !c.is_ascii_lowercase() {
                        return Err(Error::UnknownSymbol(label.to_string()));
                    }
                    let kind = SymbolKind::Letter(c);
                    if kinds.contains(&kind) {
                        return Err(Error::InvalidConfig(format!("duplicate symbol {c:?}")));
                    }
                    kind
                }
            };
            kinds.push(kind);
        }
        if kinds.len() > u8::MAX as usize {
            return Err(Error::InvalidConfig("alphabet too large".into()));
        }
        let bos = bos.ok_or_else(|| Error::InvalidConfig("missing BOS symbol".into()))?;
        let eos = eos.ok_or_else(|| Error::InvalidConfig("missing EOS symbol".into()))?;
        Ok(Alphabet { kinds, bos, eos })
    }

    /// The 28-symbol default: BOS, `a`..`z`, EOS.
    pub fn latin() -> Alphabet {
        let mut labels = vec![BOS_LABEL.to_string()];
        labels.extend(('a'..='z').map(|c| c.to_string()));
        labels.push(EOS_LABEL.to_string());
        Alphabet::from_labels(&labels).expect("latin alphabet is well-formed")
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    pub fn bos(&self) -> Symbol {
        self.bos
    }

    pub fn eos(&self) -> Symbol {
        self.eos
    }

    /// Number of symbols a model may emit (everything but BOS).
    pub fn emittable_len(&self) -> usize {
        self.kinds.len() - 1
    }

    pub fn is_emittable(&self, s: Symbol) -> bool {
        s != self.bos
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        (0..self.kinds.len()).map(|i| Symbol(i as u8))
    }

    pub fn label(&self, s: Symbol) -> String {
        match self.kinds[s.index()] {
            SymbolKind::Bos => BOS_LABEL.to_string(),
            SymbolKind::Eos => EOS_LABEL.to_string(),
            SymbolKind::Letter(c) => c.to_string(),
        }
    }

    pub fn letter(&self, s: Symbol) -> Option<char> {
        match self.kinds[s.index()] {
            SymbolKind::Letter(c) => Some(c),
            _ => None,
        }
    }

    pub fn from_letter(&self, c: char) -> Option<Symbol> {
        self.kinds
            .iter()
            .position(|k| *k == SymbolKind::Letter(c))
            .map(|i| Symbol(i as u8))
    }

    pub fn from_label(&self, label: &str) -> Option<Symbol> {
        match label {
            BOS_LABEL => Some(self.bos),
            EOS_LABEL => Some(self.eos),
            _ => {
                let mut chars = label.chars();
                match (chars.next(), chars.next()) {
                    (Some(c), None) => self.from_letter(c),
                    _ => None,
                }
            }
        }
    }

    /// Encodes a bare word (letters only, no markers) to symbols.
    pub fn encode_word(&self, word: &str) -> Result<Vec<Symbol>> {
        word.chars()
            .map(|c| {
                self.from_letter(c).ok_or_else(|| Error::InvalidWord {
                    word: word.to_string(),
                    reason: format!("character {c:?} is not on the board"),
                })
            })
            .collect()
    }

    /// Decodes a symbol sequence back to a string, skipping BOS/EOS markers.
    pub fn decode_letters(&self, symbols: &[Symbol]) -> String {
        symbols.iter().filter_map(|&s| self.letter(s)).collect()
    }

    pub fn labels(&self) -> Vec<String> {
        self.symbols().map(|s| self.label(s)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn latin_has_28_symbols_in_declared_order() {
        let a = Alphabet::latin();
        assert_eq!(a.len(), 28);
        assert_eq!(a.bos(), Symbol(0));
        assert_eq!(a.eos(), Symbol(27));
        assert_eq!(a.label(Symbol(1)), "a");
        assert_eq!(a.label(Symbol(26)), "z");
        assert_eq!(a.emittable_len(), 27);
        assert!(!a.is_emittable(a.bos()));
        assert!(a.is_emittable(a.eos()));
    }

    #[test]
    fn encode_rejects_unknown_characters() {
        let a = Alphabet::latin();
        assert!(a.encode_word("rose").is_ok());
        let err = a.encode_word("ros3").unwrap_err();
        assert!(matches!(err, Error::InvalidWord { .. }));
    }

    #[test]
    fn from_labels_requires_both_markers() {
        assert!(Alphabet::from_labels(&["BOS", "a"]).is_err());
        assert!(Alphabet::from_labels(&["a", "EOS"]).is_err());
        assert!(Alphabet::from_labels(&["BOS", "a", "a", "EOS"]).is_err());
        assert!(Alphabet::from_labels(&["BOS", "a", "EOS"]).is_ok());
    }
}
