//! Reduced words in the rank-`m` free group and finite windows of them.
//!
//! Conventions used throughout the crate:
//!
//! * generators are indexed from 0 internally and printed as `s1 .. sm`;
//! * the shift acts by right translation, so a potential with support `D`
//!   has terms on the right translates `D·g`;
//! * consequently the interaction tree links `g` with `s·g`, and the tree
//!   parent of a nonempty word is the word with its first letter removed.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::Mul;
use core::str::FromStr;

use crate::{Error, Result};

/// A generator or its inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    generator: u16,
    inverse: bool,
}

impl Letter {
    /// `s_{i+1}` for the 0-based generator index `i`.
    pub fn pos(generator: usize) -> Self {
        Letter {
            generator: generator as u16,
            inverse: false,
        }
    }

    /// `s_{i+1}^{-1}`.
    pub fn neg(generator: usize) -> Self {
        Letter {
            generator: generator as u16,
            inverse: true,
        }
    }

    pub fn generator(self) -> usize {
        self.generator as usize
    }

    pub fn is_inverse(self) -> bool {
        self.inverse
    }

    pub fn inverse(self) -> Self {
        Letter {
            generator: self.generator,
            inverse: !self.inverse,
        }
    }

    /// All `2m` letters in canonical order `s1, s1^-1, s2, ...`.
    pub fn all(rank: usize) -> impl Iterator<Item = Letter> {
        (0..rank).flat_map(|i| [Letter::pos(i), Letter::neg(i)])
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inverse {
            write!(f, "s{}^-1", self.generator + 1)
        } else {
            write!(f, "s{}", self.generator + 1)
        }
    }
}

/// A freely reduced word. The identity is the empty word.
///
/// Words order shortlex (length first, then letters), which is the canonical
/// order of every [`FiniteWindow`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct GroupWord {
    letters: Vec<Letter>,
}

impl GroupWord {
    pub fn identity() -> Self {
        GroupWord::default()
    }

    pub fn generator(i: usize) -> Self {
        GroupWord {
            letters: alloc::vec![Letter::pos(i)],
        }
    }

    pub fn letter(l: Letter) -> Self {
        GroupWord {
            letters: alloc::vec![l],
        }
    }

    /// Builds a word from arbitrary letters, reducing as it goes.
    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        GroupWord { letters: out }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Self {
        GroupWord {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    /// Reduced product `self · other`.
    pub fn multiply(&self, other: &GroupWord) -> GroupWord {
        let mut cancel = 0;
        let (a, b) = (&self.letters, &other.letters);
        while cancel < a.len() && cancel < b.len() && a[a.len() - 1 - cancel] == b[cancel].inverse()
        {
            cancel += 1;
        }
        let mut letters = Vec::with_capacity(a.len() + b.len() - 2 * cancel);
        letters.extend_from_slice(&a[..a.len() - cancel]);
        letters.extend_from_slice(&b[cancel..]);
        GroupWord { letters }
    }

    /// `l · self`, i.e. the tree neighbour of `self` along `l`.
    pub fn prepend(&self, l: Letter) -> GroupWord {
        GroupWord::letter(l).multiply(self)
    }

    /// Neighbour one step closer to the identity in the interaction tree,
    /// together with the letter `l` such that `self = l · parent`.
    pub fn tree_parent(&self) -> Option<(GroupWord, Letter)> {
        let (&first, rest) = self.letters.split_first()?;
        Some((
            GroupWord {
                letters: rest.to_vec(),
            },
            first,
        ))
    }

    /// Largest generator index used, plus one.
    pub fn rank_used(&self) -> usize {
        self.letters
            .iter()
            .map(|l| l.generator() + 1)
            .max()
            .unwrap_or(0)
    }
}

impl Mul for &GroupWord {
    type Output = GroupWord;

    fn mul(self, rhs: &GroupWord) -> GroupWord {
        self.multiply(rhs)
    }
}

impl Ord for GroupWord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.letters
            .len()
            .cmp(&other.letters.len())
            .then_with(|| self.letters.cmp(&other.letters))
    }
}

impl PartialOrd for GroupWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("e");
        }
        for (k, l) in self.letters.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Parses `e`, or whitespace-separated letters such as `s1 s2^-1`.
impl FromStr for GroupWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "e" || s.is_empty() {
            return Ok(GroupWord::identity());
        }
        let mut letters = Vec::new();
        for tok in s.split_whitespace() {
            let bad = || Error::Argument(alloc::format!("bad letter `{tok}`"));
            let body = tok.strip_prefix('s').ok_or_else(bad)?;
            let (num, inverse) = match body.strip_suffix("^-1") {
                Some(n) => (n, true),
                None => (body, false),
            };
            let i: usize = num.parse().map_err(|_| bad())?;
            if i == 0 {
                return Err(bad());
            }
            letters.push(if inverse {
                Letter::neg(i - 1)
            } else {
                Letter::pos(i - 1)
            });
        }
        Ok(GroupWord::from_letters(letters))
    }
}

/// A finite set of group elements in canonical (shortlex) order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct FiniteWindow {
    elements: Vec<GroupWord>,
}

impl FiniteWindow {
    pub fn new<I: IntoIterator<Item = GroupWord>>(words: I) -> Self {
        let set: BTreeSet<GroupWord> = words.into_iter().collect();
        FiniteWindow {
            elements: set.into_iter().collect(),
        }
    }

    pub fn identity() -> Self {
        FiniteWindow {
            elements: alloc::vec![GroupWord::identity()],
        }
    }

    /// All reduced words of length at most `radius` in the rank-`rank` group.
    pub fn ball(rank: usize, radius: usize) -> Self {
        let mut all = alloc::vec![GroupWord::identity()];
        let mut frontier = alloc::vec![GroupWord::identity()];
        for _ in 0..radius {
            let mut next = Vec::new();
            for w in &frontier {
                for l in Letter::all(rank) {
                    if w.letters.last() == Some(&l.inverse()) {
                        continue;
                    }
                    let mut letters = w.letters.clone();
                    letters.push(l);
                    next.push(GroupWord { letters });
                }
            }
            all.extend(next.iter().cloned());
            frontier = next;
        }
        FiniteWindow::new(all)
    }

    /// Words of length exactly `radius`.
    pub fn sphere(rank: usize, radius: usize) -> Self {
        FiniteWindow::new(
            FiniteWindow::ball(rank, radius)
                .elements
                .into_iter()
                .filter(|w| w.len() == radius),
        )
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[GroupWord] {
        &self.elements
    }

    pub fn iter(&self) -> core::slice::Iter<'_, GroupWord> {
        self.elements.iter()
    }

    pub fn contains(&self, g: &GroupWord) -> bool {
        self.elements.binary_search(g).is_ok()
    }

    /// Position of `g` in canonical order.
    pub fn index_of(&self, g: &GroupWord) -> Option<usize> {
        self.elements.binary_search(g).ok()
    }

    /// Right translate `{f·g : f ∈ self}`.
    pub fn translate(&self, g: &GroupWord) -> FiniteWindow {
        FiniteWindow::new(self.elements.iter().map(|f| f.multiply(g)))
    }

    pub fn inverse(&self) -> FiniteWindow {
        FiniteWindow::new(self.elements.iter().map(GroupWord::inverse))
    }

    pub fn union(&self, other: &FiniteWindow) -> FiniteWindow {
        FiniteWindow::new(self.elements.iter().chain(other.elements.iter()).cloned())
    }

    pub fn difference(&self, other: &FiniteWindow) -> FiniteWindow {
        FiniteWindow {
            elements: self
                .elements
                .iter()
                .filter(|g| !other.contains(g))
                .cloned()
                .collect(),
        }
    }

    pub fn intersects(&self, other: &FiniteWindow) -> bool {
        self.elements.iter().any(|g| other.contains(g))
    }

    pub fn is_subset(&self, other: &FiniteWindow) -> bool {
        self.elements.iter().all(|g| other.contains(g))
    }

    /// Elementwise products `{a·b : a ∈ self, b ∈ other}`.
    pub fn product(&self, other: &FiniteWindow) -> FiniteWindow {
        FiniteWindow::new(
            self.elements
                .iter()
                .flat_map(|a| other.elements.iter().map(move |b| a.multiply(b))),
        )
    }

    pub fn rank_used(&self) -> usize {
        self.elements
            .iter()
            .map(GroupWord::rank_used)
            .max()
            .unwrap_or(0)
    }

    /// Parses a comma-separated list of words.
    pub fn parse_list(s: &str) -> Result<FiniteWindow> {
        let words = s
            .split(',')
            .map(|w| w.parse::<GroupWord>())
            .collect::<Result<Vec<_>>>()?;
        Ok(FiniteWindow::new(words))
    }
}

impl fmt::Display for FiniteWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, g) in self.elements.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{g}")?;
        }
        f.write_str("}")
    }
}

impl<'a> IntoIterator for &'a FiniteWindow {
    type Item = &'a GroupWord;
    type IntoIter = core::slice::Iter<'a, GroupWord>;

    fn into_iter(self) -> Self::IntoIter {
        self.elements.iter()
    }
}

/// Closed-form `|ball(rank, radius)| = 1 + 2m·Σ_{k<r}(2m−1)^k`.
pub fn ball_size(rank: usize, radius: usize) -> usize {
    let mut total = 1usize;
    let mut layer = 2 * rank;
    for _ in 0..radius {
        total += layer;
        layer *= (2 * rank).saturating_sub(1);
    }
    total
}

/// Boundary of `window` for a shift potential supported on `support`:
/// the union of `D·g \ F` over all `g` with `D·g ∩ F ≠ ∅`.
///
/// Only `g ∈ D⁻¹·F` can make `D·g` meet `F`, so the search runs over that set.
pub fn potential_boundary(window: &FiniteWindow, support: &FiniteWindow) -> FiniteWindow {
    let candidates = support.inverse().product(window);
    let mut out = BTreeSet::new();
    for g in candidates.iter() {
        for d in support.iter() {
            let t = d.multiply(g);
            if !window.contains(&t) {
                out.insert(t);
            }
        }
    }
    FiniteWindow {
        elements: out.into_iter().collect(),
    }
}

/// Human-readable list, used by reports.
pub fn window_labels(window: &FiniteWindow) -> Vec<String> {
    window.iter().map(|g| alloc::format!("{g}")).collect()
}
