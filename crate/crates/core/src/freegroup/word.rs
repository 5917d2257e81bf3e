use std::fmt;

use crate::error::{Error, Result};

/// A generator `a_i` or its inverse, stored as `±(i + 1)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(i32);

impl Letter {
    pub fn generator(index: usize) -> Self {
        Letter(index as i32 + 1)
    }

    pub fn inverse_of(index: usize) -> Self {
        Letter(-(index as i32 + 1))
    }

    /// From the signed one-based encoding used in files.
    pub fn from_signed(code: i32, n_generators: usize) -> Result<Self> {
        if code == 0 || code.unsigned_abs() as usize > n_generators {
            return Err(Error::Malformed(format!(
                "letter {code} out of range for {n_generators} generators"
            )));
        }
        Ok(Letter(code))
    }

    pub fn signed(self) -> i32 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0.unsigned_abs() as usize - 1
    }

    pub fn is_inverse(self) -> bool {
        self.0 < 0
    }

    pub fn inverse(self) -> Self {
        Letter(-self.0)
    }

    /// Dense index in `0..2n`: `2i` for `a_i`, `2i + 1` for `a_i⁻¹`.
    pub fn slot(self) -> usize {
        2 * self.index() + usize::from(self.is_inverse())
    }

    pub fn from_slot(slot: usize) -> Self {
        if slot % 2 == 0 {
            Letter::generator(slot / 2)
        } else {
            Letter::inverse_of(slot / 2)
        }
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_inverse() {
            write!(f, "a{}'", self.index() + 1)
        } else {
            write!(f, "a{}", self.index() + 1)
        }
    }
}

/// A freely reduced word; the empty word is the identity.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    /// Reduces an arbitrary letter sequence.
    pub fn from_letters(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Self {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn product(&self, other: &Word) -> Self {
        Word::from_letters(self.0.iter().chain(other.0.iter()).copied())
    }

    pub fn signed(&self) -> Vec<i32> {
        self.0.iter().map(|l| l.signed()).collect()
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("·")?;
            }
            write!(f, "{l:?}")?;
        }
        Ok(())
    }
}

/// Validates signed letters against `n_generators` and freely reduces them.
pub fn reduce_word(letters: &[i32], n_generators: usize) -> Result<Word> {
    let letters = letters
        .iter()
        .map(|&c| Letter::from_signed(c, n_generators))
        .collect::<Result<Vec<_>>>()?;
    Ok(Word::from_letters(letters))
}

/// Product of several words, reduced.
pub fn product_of<'a>(words: impl IntoIterator<Item = &'a Word>) -> Word {
    Word::from_letters(words.into_iter().flat_map(|w| w.0.iter().copied()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancellation() {
        assert!(reduce_word(&[1, -1], 1).unwrap().is_identity());
        assert_eq!(reduce_word(&[1, 2, -2, 1], 2).unwrap().signed(), vec![1, 1]);
        assert_eq!(reduce_word(&[2, 1, -1, -2, 1], 2).unwrap().signed(), vec![1]);
    }

    #[test]
    fn out_of_range_letters() {
        assert!(reduce_word(&[3], 2).is_err());
        assert!(reduce_word(&[0], 2).is_err());
    }

    #[test]
    fn inverse_cancels() {
        let w = reduce_word(&[1, 2, 2, -1], 2).unwrap();
        assert!(w.product(&w.inverse()).is_identity());
        assert!(w.inverse().product(&w).is_identity());
    }

    #[test]
    fn slots_round_trip() {
        for slot in 0..6 {
            assert_eq!(Letter::from_slot(slot).slot(), slot);
        }
        assert_eq!(Letter::generator(1).inverse().slot(), 3);
    }
}
