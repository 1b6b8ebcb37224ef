//! Freely reduced words in a finitely generated free group.

use std::fmt;
use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A generator or its inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

impl Letter {
    pub const fn new(generator: usize, inverse: bool) -> Self {
        Letter { generator, inverse }
    }

    pub fn inv(self) -> Self {
        Letter {
            inverse: !self.inverse,
            ..self
        }
    }

    /// `+1` or `−1`.
    pub fn exponent(self) -> i64 {
        if self.inverse {
            -1
        } else {
            1
        }
    }

    /// Generator `g` as `g + 1`, its inverse as `−(g + 1)`.
    pub fn signed(self) -> i32 {
        let g = self.generator as i32 + 1;
        if self.inverse {
            -g
        } else {
            g
        }
    }

    pub fn from_signed(code: i32) -> Option<Self> {
        if code == 0 {
            return None;
        }
        Some(Letter::new(code.unsigned_abs() as usize - 1, code < 0))
    }
}

/// A freely reduced word. Serializes as its list of signed letter codes
/// (generator `g` is `g + 1`, its inverse `−(g + 1)`).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i32>", into = "Vec<i32>")]
pub struct FreeWord {
    letters: Vec<Letter>,
}

impl FreeWord {
    pub fn identity() -> Self {
        FreeWord::default()
    }

    pub fn generator(g: usize) -> Self {
        FreeWord {
            letters: vec![Letter::new(g, false)],
        }
    }

    /// Reduces `letters` freely.
    pub fn new(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inv()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        FreeWord { letters: out }
    }

    pub fn from_signed(codes: &[i32]) -> Result<Self> {
        codes
            .iter()
            .map(|&c| Letter::from_signed(c).ok_or_else(|| Error::Schema("letter code 0 in word".into())))
            .collect::<Result<Vec<_>>>()
            .map(FreeWord::new)
    }

    pub fn to_signed(&self) -> Vec<i32> {
        self.letters.iter().map(|l| l.signed()).collect()
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

    pub fn inverse(&self) -> Self {
        FreeWord {
            letters: self.letters.iter().rev().map(|l| l.inv()).collect(),
        }
    }

    pub fn pow(&self, n: i64) -> Self {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut out = FreeWord::identity();
        for _ in 0..n.unsigned_abs() {
            out = &out * &base;
        }
        out
    }

    /// Replaces generator `g` by `images[g]`.
    pub fn substitute(&self, images: &[FreeWord]) -> Self {
        FreeWord::new(self.letters.iter().flat_map(|l| {
            let image = &images[l.generator];
            if l.inverse {
                image.inverse().letters
            } else {
                image.letters.clone()
            }
        }))
    }

    /// Sum of exponents of generator `g`.
    pub fn exponent_sum(&self, g: usize) -> i64 {
        self.letters
            .iter()
            .filter(|l| l.generator == g)
            .map(|l| l.exponent())
            .sum()
    }

    /// Largest generator index used, plus one.
    pub fn rank_used(&self) -> usize {
        self.letters.iter().map(|l| l.generator + 1).max().unwrap_or(0)
    }

    /// Parses whitespace-separated tokens `name` or `name^-1` (any integer
    /// exponent is accepted). The empty string and `1` give the identity.
    pub fn parse(text: &str, names: &[&str]) -> Result<Self> {
        let mut letters = Vec::new();
        for token in text.split_whitespace() {
            if token == "1" {
                continue;
            }
            let (name, exponent) = match token.split_once('^') {
                Some((n, e)) => (
                    n,
                    e.parse::<i64>()
                        .map_err(|_| Error::Schema(format!("bad exponent in `{token}`")))?,
                ),
                None => (token, 1),
            };
            let g = names
                .iter()
                .position(|n| *n == name)
                .ok_or_else(|| Error::Schema(format!("unknown generator `{name}`")))?;
            let letter = Letter::new(g, exponent < 0);
            letters.extend(std::iter::repeat_n(letter, exponent.unsigned_abs() as usize));
        }
        Ok(FreeWord::new(letters))
    }

    /// Renders with the given generator names, grouping repeated letters.
    pub fn render(&self, names: &[&str]) -> String {
        if self.is_empty() {
            return "1".into();
        }
        let mut parts = Vec::new();
        let mut i = 0;
        while i < self.letters.len() {
            let l = self.letters[i];
            let mut run = 1;
            while i + run < self.letters.len() && self.letters[i + run] == l {
                run += 1;
            }
            let name = names.get(l.generator).copied().unwrap_or("?");
            let exponent = run as i64 * l.exponent();
            parts.push(if exponent == 1 {
                name.to_string()
            } else {
                format!("{name}^{exponent}")
            });
            i += run;
        }
        parts.join(" ")
    }
}

impl Mul for &FreeWord {
    type Output = FreeWord;

    fn mul(self, rhs: &FreeWord) -> FreeWord {
        FreeWord::new(self.letters.iter().chain(rhs.letters.iter()).copied())
    }
}

impl Mul for FreeWord {
    type Output = FreeWord;

    fn mul(self, rhs: FreeWord) -> FreeWord {
        &self * &rhs
    }
}

impl TryFrom<Vec<i32>> for FreeWord {
    type Error = Error;

    fn try_from(codes: Vec<i32>) -> Result<Self> {
        let word = FreeWord::from_signed(&codes)?;
        if word.len() != codes.len() {
            return Err(Error::Schema("stored word is not freely reduced".into()));
        }
        Ok(word)
    }
}

impl From<FreeWord> for Vec<i32> {
    fn from(w: FreeWord) -> Self {
        w.to_signed()
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.rank_used()).map(|g| format!("g{g}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        f.write_str(&self.render(&refs))
    }
}
