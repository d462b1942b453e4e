use crate::error::{Error, Result};
use crate::nncore::Scalar;

pub const VOCAB_SIZE: usize = 38;
pub const PAD: usize = 0;
pub const UNK: usize = 1;

/// The fixed 38-symbol character inventory: padding, unknown, `a`–`z`,
/// `0`–`9`. Names are lowercased before lookup; anything outside the
/// inventory becomes [`UNK`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    symbols: Vec<String>,
}

impl Vocabulary {
    pub fn standard() -> Self {
        let mut symbols = Vec::with_capacity(VOCAB_SIZE);
        symbols.push("<pad>".to_string());
        symbols.push("<unk>".to_string());
        symbols.extend(('a'..='z').map(|c| c.to_string()));
        symbols.extend(('0'..='9').map(|c| c.to_string()));
        debug_assert_eq!(symbols.len(), VOCAB_SIZE);
        Vocabulary { symbols }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn encode_char(&self, c: char) -> usize {
        match c.to_ascii_lowercase() {
            c @ 'a'..='z' => 2 + (c as usize - 'a' as usize),
            c @ '0'..='9' => 28 + (c as usize - '0' as usize),
            _ => UNK,
        }
    }

    pub fn encode(&self, name: &str) -> Result<Vec<usize>> {
        if name.is_empty() {
            return Err(Error::EmptyName);
        }
        Ok(name.chars().map(|c| self.encode_char(c)).collect())
    }

    pub fn one_hot<F: Scalar>(&self, token: usize) -> Vec<F> {
        debug_assert!(token < VOCAB_SIZE);
        let mut x = vec![F::zero(); VOCAB_SIZE];
        x[token] = F::one();
        x
    }
}

impl Default for Vocabulary {
    fn default() -> Self {
        Vocabulary::standard()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_pad_unk_letters_digits() {
        let v = Vocabulary::standard();
        assert_eq!(v.len(), 38);
        assert_eq!(v.symbols()[0], "<pad>");
        assert_eq!(v.symbols()[1], "<unk>");
        assert_eq!(v.symbols()[2], "a");
        assert_eq!(v.symbols()[27], "z");
        assert_eq!(v.symbols()[28], "0");
        assert_eq!(v.symbols()[37], "9");
    }

    #[test]
    fn encodes_letters_and_digits() {
        let v = Vocabulary::standard();
        assert_eq!(v.encode("abc").unwrap(), vec![2, 3, 4]);
        assert_eq!(v.encode("a9").unwrap(), vec![2, 37]);
        assert_eq!(v.encode("z0").unwrap(), vec![27, 28]);
    }

    #[test]
    fn unknown_symbols_fall_back_to_unk() {
        let v = Vocabulary::standard();
        assert_eq!(v.encode("a-b").unwrap(), vec![2, UNK, 3]);
        assert_eq!(v.encode("é").unwrap(), vec![UNK]);
    }

    #[test]
    fn uppercase_is_folded() {
        let v = Vocabulary::standard();
        assert_eq!(v.encode("Abc").unwrap(), v.encode("abc").unwrap());
    }

    #[test]
    fn empty_names_are_rejected() {
        assert!(matches!(
            Vocabulary::standard().encode(""),
            Err(Error::EmptyName)
        ));
    }

    #[test]
    fn one_hot_has_a_single_one() {
        let v = Vocabulary::standard();
        let x: Vec<f64> = v.one_hot(5);
        assert_eq!(x.len(), VOCAB_SIZE);
        assert_eq!(x.iter().sum::<f64>(), 1.0);
        assert_eq!(x[5], 1.0);
    }
}
