use std::fmt;

use crate::error::{Error, Result};

pub const MAX_RANK: usize = 4;

/// Element of the symmetric group `S_r`, `1 <= r <= 4`.
///
/// Stored zero-based; the one-line word form is one-based, so `"231"` means
/// `1 -> 2, 2 -> 3, 3 -> 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(r: usize) -> Result<Self> {
        check_rank(r)?;
        Ok(Permutation { images: (0..r).collect() })
    }

    /// From one-based images, `images[x - 1] = sigma(x)`.
    pub fn from_images(images: &[usize]) -> Result<Self> {
        check_rank(images.len())?;
        let r = images.len();
        let mut seen = vec![false; r];
        for &y in images {
            if y == 0 || y > r {
                return Err(Error::BadPermutation(format!(
                    "image {y} outside 1..={r}"
                )));
            }
            if std::mem::replace(&mut seen[y - 1], true) {
                return Err(Error::BadPermutation(format!(
                    "image {y} repeated; not a bijection"
                )));
            }
        }
        Ok(Permutation { images: images.iter().map(|y| y - 1).collect() })
    }

    /// Parses a one-line word such as `"2143"`.
    pub fn parse(word: &str) -> Result<Self> {
        let word = word.trim();
        if word.is_empty() {
            return Err(Error::BadPermutation("empty word".into()));
        }
        let images = word
            .chars()
            .map(|ch| {
                ch.to_digit(10).map(|d| d as usize).ok_or_else(|| {
                    Error::BadPermutation(format!("'{ch}' in \"{word}\" is not a digit"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_images(&images)
    }

    pub fn rank(&self) -> usize {
        self.images.len()
    }

    /// Zero-based image.
    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.images[x]
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(x, &y)| x == y)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.rank()];
        for (x, &y) in self.images.iter().enumerate() {
            inv[y] = x;
        }
        Permutation { images: inv }
    }

    /// `self o other`, i.e. `x -> self(other(x))`.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.rank(), other.rank());
        Permutation { images: other.images.iter().map(|&y| self.images[y]).collect() }
    }

    /// `kappa o self o kappa^-1`.
    pub fn conjugate_by(&self, kappa: &Self) -> Self {
        kappa.compose(self).compose(&kappa.inverse())
    }

    /// Cycle lengths in descending order; fixed points count as 1-cycles.
    pub fn cycle_lengths(&self) -> Vec<usize> {
        let r = self.rank();
        let mut visited = vec![false; r];
        let mut lengths = Vec::new();
        for start in 0..r {
            if visited[start] {
                continue;
            }
            let mut len = 0;
            let mut x = start;
            while !visited[x] {
                visited[x] = true;
                x = self.images[x];
                len += 1;
            }
            lengths.push(len);
        }
        lengths.sort_unstable_by(|a, b| b.cmp(a));
        lengths
    }

    /// All of `S_r` in lexicographic order of their words.
    pub fn all(r: usize) -> Result<Vec<Self>> {
        check_rank(r)?;
        let mut out = Vec::new();
        let mut current: Vec<usize> = (0..r).collect();
        loop {
            out.push(Permutation { images: current.clone() });
            // next lexicographic permutation
            let Some(i) = (0..r.saturating_sub(1)).rev().find(|&i| current[i] < current[i + 1])
            else {
                break;
            };
            let j = (i + 1..r).rev().find(|&j| current[j] > current[i]).unwrap();
            current.swap(i, j);
            current[i + 1..].reverse();
        }
        Ok(out)
    }
}

fn check_rank(r: usize) -> Result<()> {
    if r > MAX_RANK {
        Err(Error::RankTooLarge(r))
    } else if r == 0 {
        Err(Error::BadPermutation("rank must be at least 1".into()))
    } else {
        Ok(())
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &y in &self.images {
            write!(f, "{}", y + 1)?;
        }
        Ok(())
    }
}
