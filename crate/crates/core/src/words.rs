//! Free group words.
//!
//! A [`Word`] is a freely reduced sequence of signed generator letters over an
//! alphabet of fixed rank. Text syntax: lowercase `a..z` are the generators
//! `f_1..f_26`, uppercase letters their inverses, and `""` or `"1"` the
//! identity.
//!
//! Words are reduced on construction, so every `Word` value is reduced. The
//! derived `Ord` is shortlex with letter order `a < A < b < B < ...`.
//!
//! The commutator convention used throughout the crate is
//! `[u, v] = u⁻¹ v⁻¹ u v`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Mul;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub const MAX_TEXT_RANK: usize = 26;

/// A generator or its formal inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Letter {
    gen: u32,
    inverse: bool,
}

impl Letter {
    pub fn new(gen: usize, inverse: bool) -> Letter {
        Letter {
            gen: gen as u32,
            inverse,
        }
    }

    pub fn gen(self) -> usize {
        self.gen as usize
    }

    pub fn is_inverse(self) -> bool {
        self.inverse
    }

    pub fn inverse(self) -> Letter {
        Letter {
            gen: self.gen,
            inverse: !self.inverse,
        }
    }

    /// Position in the order `a < A < b < B < ...`; also the column index
    /// used by the subgroup graphs.
    pub fn key(self) -> usize {
        2 * self.gen as usize + self.inverse as usize
    }

    pub fn from_key(key: usize) -> Letter {
        Letter::new(key / 2, key % 2 == 1)
    }

    /// Signed exponent contributed to the abelianization.
    pub fn sign(self) -> i64 {
        if self.inverse {
            -1
        } else {
            1
        }
    }

    pub fn to_char(self) -> Option<char> {
        if self.gen as usize >= MAX_TEXT_RANK {
            return None;
        }
        let c = (b'a' + self.gen as u8) as char;
        Some(if self.inverse { c.to_ascii_uppercase() } else { c })
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

/// Alphabet of rank `1..=26` for the letter syntax.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Alphabet {
    rank: usize,
}

impl Alphabet {
    pub fn new(rank: usize) -> Result<Alphabet> {
        if rank == 0 || rank > MAX_TEXT_RANK {
            return Err(Error::InvalidRank(rank));
        }
        Ok(Alphabet { rank })
    }

    pub fn rank(self) -> usize {
        self.rank
    }

    pub fn parse(self, text: &str) -> Result<Word> {
        Word::parse(text, self.rank)
    }

    pub fn generators(self) -> Vec<Word> {
        (0..self.rank).map(|g| Word::generator(self.rank, g)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Word {
    rank: usize,
    letters: Vec<Letter>,
}

/// Freely reduce a letter sequence. Every letter must be below `rank`.
pub fn reduce(rank: usize, raw: &[Letter]) -> Result<Word> {
    Word::from_letters(rank, raw.iter().copied())
}

fn push_reduced(out: &mut Vec<Letter>, l: Letter) {
    if out.last() == Some(&l.inverse()) {
        out.pop();
    } else {
        out.push(l);
    }
}

impl Word {
    pub fn identity(rank: usize) -> Word {
        Word {
            rank,
            letters: Vec::new(),
        }
    }

    pub fn generator(rank: usize, gen: usize) -> Word {
        assert!(gen < rank, "generator {gen} out of range for rank {rank}");
        Word {
            rank,
            letters: vec![Letter::new(gen, false)],
        }
    }

    pub fn from_letters<I: IntoIterator<Item = Letter>>(rank: usize, letters: I) -> Result<Word> {
        let mut out = Vec::new();
        for (position, l) in letters.into_iter().enumerate() {
            if l.gen() >= rank {
                return Err(Error::InvalidLetter {
                    found: format!("{}{}", if l.is_inverse() { "-" } else { "" }, l.gen() + 1),
                    position,
                    rank,
                });
            }
            push_reduced(&mut out, l);
        }
        Ok(Word { rank, letters: out })
    }

    /// Signed 1-based indices, e.g. `[1, -2]` for `aB`.
    pub fn from_signed(rank: usize, signed: &[i32]) -> Result<Word> {
        let mut letters = Vec::with_capacity(signed.len());
        for (position, &s) in signed.iter().enumerate() {
            if s == 0 || s.unsigned_abs() as usize > rank {
                return Err(Error::InvalidLetter {
                    found: s.to_string(),
                    position,
                    rank,
                });
            }
            letters.push(Letter::new(s.unsigned_abs() as usize - 1, s < 0));
        }
        Word::from_letters(rank, letters)
    }

    pub fn parse(text: &str, rank: usize) -> Result<Word> {
        if rank == 0 || rank > MAX_TEXT_RANK {
            return Err(Error::InvalidRank(rank));
        }
        let trimmed = text.trim();
        if trimmed.is_empty() || trimmed == "1" {
            return Ok(Word::identity(rank));
        }
        let offset = text.len() - text.trim_start().len();
        let mut out = Vec::with_capacity(trimmed.len());
        for (i, c) in trimmed.char_indices() {
            let gen = match c {
                'a'..='z' => c as usize - 'a' as usize,
                'A'..='Z' => c as usize - 'A' as usize,
                _ => usize::MAX,
            };
            if gen >= rank {
                return Err(Error::InvalidLetter {
                    found: c.to_string(),
                    position: offset + i,
                    rank,
                });
            }
            push_reduced(&mut out, Letter::new(gen, c.is_ascii_uppercase()));
        }
        Ok(Word { rank, letters: out })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    fn check_rank(&self, other: &Word) -> Result<()> {
        if self.rank != other.rank {
            return Err(Error::AlphabetMismatch {
                left: self.rank,
                right: other.rank,
            });
        }
        Ok(())
    }

    pub fn multiply(&self, other: &Word) -> Result<Word> {
        self.check_rank(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Word) -> Word {
        let mut letters = self.letters.clone();
        letters.reserve(other.len());
        for &l in &other.letters {
            push_reduced(&mut letters, l);
        }
        Word {
            rank: self.rank,
            letters,
        }
    }

    pub fn invert(&self) -> Word {
        Word {
            rank: self.rank,
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    /// `s⁻¹ self s`.
    pub fn conjugate(&self, s: &Word) -> Result<Word> {
        self.check_rank(s)?;
        Ok(&(&s.invert() * self) * s)
    }

    /// `[self, v] = self⁻¹ v⁻¹ self v`.
    pub fn commutator(&self, v: &Word) -> Result<Word> {
        self.check_rank(v)?;
        Ok(&(&(&self.invert() * &v.invert()) * self) * v)
    }

    pub fn pow(&self, n: i64) -> Word {
        let base = if n < 0 { self.invert() } else { self.clone() };
        let mut out = Word::identity(self.rank);
        for _ in 0..n.unsigned_abs() {
            out = &out * &base;
        }
        out
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.letters.first(), self.letters.last()) {
            (Some(&f), Some(&l)) => self.len() == 1 || f != l.inverse(),
            _ => true,
        }
    }

    /// Splits `self = t c t⁻¹` with `c` cyclically reduced; returns `(t, c)`.
    pub fn cyclic_decomposition(&self) -> (Word, Word) {
        let n = self.len();
        let mut k = 0;
        while 2 * k + 1 < n && self.letters[k] == self.letters[n - 1 - k].inverse() {
            k += 1;
        }
        let t = Word {
            rank: self.rank,
            letters: self.letters[..k].to_vec(),
        };
        let c = Word {
            rank: self.rank,
            letters: self.letters[k..n - k].to_vec(),
        };
        (t, c)
    }

    /// The unique `(root, exponent)` with `root^exponent = self` and `root`
    /// not a proper power.
    pub fn primitive_root(&self) -> Result<(Word, u64)> {
        if self.is_empty() {
            return Err(Error::EmptyWordNoRoot);
        }
        let (t, c) = self.cyclic_decomposition();
        let n = c.len();
        let period = (1..=n)
            .filter(|p| n % p == 0)
            .find(|&p| (p..n).all(|i| c.letters[i] == c.letters[i - p]))
            .unwrap_or(n);
        let base = Word {
            rank: self.rank,
            letters: c.letters[..period].to_vec(),
        };
        let root = &(&t * &base) * &t.invert();
        Ok((root, (n / period) as u64))
    }

    /// Exponent sum of each generator.
    pub fn exponent_sums(&self) -> Vec<i64> {
        let mut v = vec![0; self.rank];
        for l in &self.letters {
            v[l.gen()] += l.sign();
        }
        v
    }

    /// Same letters read over a larger (or equal) alphabet.
    pub fn widen(&self, rank: usize) -> Result<Word> {
        if rank < self.rank && self.letters.iter().any(|l| l.gen() >= rank) {
            return Err(Error::AlphabetMismatch {
                left: self.rank,
                right: rank,
            });
        }
        Ok(Word {
            rank,
            letters: self.letters.clone(),
        })
    }

    /// Variable syntax: `x1 x2 X1`; identity renders as `1`.
    pub fn to_variable_string(&self) -> String {
        if self.is_empty() {
            return "1".to_string();
        }
        self.letters
            .iter()
            .map(|l| format!("{}{}", if l.is_inverse() { 'X' } else { 'x' }, l.gen() + 1))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Parses variable syntax over `n` variables: whitespace-separated
    /// tokens `x<i>` / `X<i>` with `1 <= i <= n`; `1` or empty is the identity.
    pub fn parse_variables(text: &str, n: usize) -> Result<Word> {
        let mut letters = Vec::new();
        let bytes = text.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i] as char;
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c == '1' && (i + 1 == bytes.len() || (bytes[i + 1] as char).is_whitespace()) {
                i += 1;
                continue;
            }
            if c != 'x' && c != 'X' {
                return Err(Error::Parse {
                    position: i,
                    message: format!("expected a variable token x<i> or X<i>, found {c:?}"),
                });
            }
            let start = i + 1;
            let mut end = start;
            while end < bytes.len() && bytes[end].is_ascii_digit() {
                end += 1;
            }
            let index: usize = text[start..end].parse().map_err(|_| Error::Parse {
                position: i,
                message: "variable token without index".to_string(),
            })?;
            if index == 0 || index > n {
                return Err(Error::Parse {
                    position: i,
                    message: format!("variable index {index} outside 1..={n}"),
                });
            }
            letters.push(Letter::new(index - 1, c == 'X'));
            i = end;
        }
        Word::from_letters(n, letters)
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.letters.cmp(&other.letters))
            .then_with(|| self.rank.cmp(&other.rank))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            match l.to_char() {
                Some(c) => write!(f, "{c}")?,
                None => write!(f, "[{}{}]", if l.is_inverse() { "-" } else { "" }, l.gen() + 1)?,
            }
        }
        Ok(())
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

/// Panics when the ranks differ; use [`Word::multiply`] for a checked product.
impl Mul<&Word> for &Word {
    type Output = Word;

    fn mul(self, rhs: &Word) -> Word {
        assert_eq!(self.rank, rhs.rank, "multiplying words of different rank");
        self.mul_unchecked(rhs)
    }
}

/// Images of the generators of a free group of rank `images.len()` in a free
/// group of rank `target_rank`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Substitution {
    target_rank: usize,
    images: Vec<Word>,
}

impl Substitution {
    pub fn new(images: Vec<Word>, target_rank: usize) -> Result<Substitution> {
        for w in &images {
            if w.rank() != target_rank {
                return Err(Error::AlphabetMismatch {
                    left: w.rank(),
                    right: target_rank,
                });
            }
        }
        Ok(Substitution {
            target_rank,
            images,
        })
    }

    pub fn identity(rank: usize) -> Substitution {
        Substitution {
            target_rank: rank,
            images: (0..rank).map(|g| Word::generator(rank, g)).collect(),
        }
    }

    /// Sends every generator to the identity.
    pub fn trivial(domain_rank: usize, target_rank: usize) -> Substitution {
        Substitution {
            target_rank,
            images: vec![Word::identity(target_rank); domain_rank],
        }
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn domain_rank(&self) -> usize {
        self.images.len()
    }

    pub fn target_rank(&self) -> usize {
        self.target_rank
    }

    pub fn apply(&self, w: &Word) -> Result<Word> {
        if w.rank() != self.images.len() {
            return Err(Error::AlphabetMismatch {
                left: w.rank(),
                right: self.images.len(),
            });
        }
        Ok(self.apply_unchecked(w))
    }

    pub(crate) fn set_image(&mut self, gen: usize, image: Word) {
        debug_assert_eq!(image.rank(), self.target_rank);
        self.images[gen] = image;
    }

    pub(crate) fn apply_unchecked(&self, w: &Word) -> Word {
        let mut letters = Vec::new();
        for l in w.letters() {
            let img = &self.images[l.gen()];
            if l.is_inverse() {
                for &x in img.letters.iter().rev() {
                    push_reduced(&mut letters, x.inverse());
                }
            } else {
                for &x in &img.letters {
                    push_reduced(&mut letters, x);
                }
            }
        }
        Word {
            rank: self.target_rank,
            letters,
        }
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &Substitution) -> Result<Substitution> {
        let images = other
            .images
            .iter()
            .map(|w| self.apply(w))
            .collect::<Result<Vec<_>>>()?;
        Ok(Substitution {
            target_rank: self.target_rank,
            images,
        })
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, w) in self.images.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            let name = Letter::new(i, false).to_char().unwrap_or('?');
            write!(f, "{name}->{}", if w.is_empty() { "1".to_string() } else { w.to_string() })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s, 2).unwrap()
    }

    // Naive oracle: repeatedly delete the first cancelling pair.
    fn naive_reduce(s: &str) -> String {
        let mut v: Vec<char> = s.chars().collect();
        loop {
            let pos = v.windows(2).position(|p| {
                p[0] != p[1] && p[0].eq_ignore_ascii_case(&p[1])
            });
            match pos {
                Some(i) => {
                    v.drain(i..i + 2);
                }
                None => return v.into_iter().collect(),
            }
        }
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(w("abBA").to_string(), "");
        assert!(w("abBA").is_empty());
        assert_eq!(w("abAB").to_string(), "abAB");
        // a a (b B) A A b collapses completely except for the final b.
        assert_eq!(naive_reduce("aabBAAb"), "b");
        assert_eq!(w("aabBAAb").to_string(), "b");
        assert_eq!(w("1"), Word::identity(2));
    }

    #[test]
    fn reduce_from_letters_rejects_out_of_range() {
        let err = reduce(2, &[Letter::new(0, false), Letter::new(2, false)]).unwrap_err();
        assert!(matches!(err, Error::InvalidLetter { position: 1, .. }));
        assert!(matches!(
            Word::parse("abc", 2),
            Err(Error::InvalidLetter { position: 2, .. })
        ));
        assert!(matches!(Word::parse("a?", 2), Err(Error::InvalidLetter { .. })));
        assert_eq!(Word::parse("a", 27), Err(Error::InvalidRank(27)));
    }

    #[test]
    fn group_operation_examples() {
        assert_eq!(w("a").commutator(&w("b")).unwrap().to_string(), "ABab");
        assert_eq!(w("a").conjugate(&w("b")).unwrap().to_string(), "Bab");
        assert!(w("ab").multiply(&w("BA")).unwrap().is_empty());
        let other = Word::parse("c", 3).unwrap();
        assert!(matches!(
            w("a").multiply(&other),
            Err(Error::AlphabetMismatch { left: 2, right: 3 })
        ));
    }

    #[test]
    fn apply_examples() {
        let s = Substitution::new(vec![w("ab"), w("")], 2).unwrap();
        assert_eq!(s.apply(&w("ab")).unwrap().to_string(), "ab");
        assert_eq!(Substitution::identity(2).apply(&w("abAB")).unwrap(), w("abAB"));
        let swap = Substitution::new(vec![w("b"), w("a")], 2).unwrap();
        assert_eq!(swap.apply(&w("aB")).unwrap().to_string(), "bA");
        assert!(matches!(
            swap.apply(&Word::parse("a", 3).unwrap()),
            Err(Error::AlphabetMismatch { .. })
        ));
    }

    // Oracle: scan every divisor p of |c| for the cyclically reduced core c.
    fn root_oracle(s: &str) -> (String, u64) {
        let word = w(s);
        let (t, c) = word.cyclic_decomposition();
        let text: Vec<char> = c.to_string().chars().collect();
        let n = text.len();
        for p in 1..=n {
            if n.is_multiple_of(p) {
                let block: String = text[..p].iter().collect();
                if block.repeat(n / p) == c.to_string() {
                    let root = &(&t * &w(&block)) * &t.invert();
                    return (root.to_string(), (n / p) as u64);
                }
            }
        }
        unreachable!()
    }

    #[test]
    fn primitive_root_examples() {
        let (r, e) = w("abab").primitive_root().unwrap();
        assert_eq!((r.to_string(), e), ("ab".to_string(), 2));
        let (r, e) = w("a").primitive_root().unwrap();
        assert_eq!((r.to_string(), e), ("a".to_string(), 1));
        // "BaabBaab" reduces to "Baaaab" = (Bab)^4.
        assert_eq!(root_oracle("BaabBaab"), ("Bab".to_string(), 4));
        let (r, e) = w("BaabBaab").primitive_root().unwrap();
        assert_eq!((r.to_string(), e), ("Bab".to_string(), 4));
        assert_eq!(w("").primitive_root(), Err(Error::EmptyWordNoRoot));
    }

    #[test]
    fn variable_syntax() {
        let v = Word::parse_variables("x1 x2 X1", 2).unwrap();
        assert_eq!(v.to_variable_string(), "x1 x2 X1");
        assert_eq!(Word::parse_variables("x1x2X2", 2).unwrap().to_variable_string(), "x1");
        assert!(Word::parse_variables("1", 2).unwrap().is_empty());
        assert!(matches!(Word::parse_variables("x3", 2), Err(Error::Parse { position: 0, .. })));
        assert!(matches!(Word::parse_variables("x1 y", 2), Err(Error::Parse { position: 3, .. })));
    }

    #[test]
    fn shortlex_order() {
        let mut v = [w("b"), w("A"), w("aa"), w(""), w("a"), w("B")];
        v.sort();
        let s: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        assert_eq!(s, ["", "a", "A", "b", "B", "aa"]);
    }
}
