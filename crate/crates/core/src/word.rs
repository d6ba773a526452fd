//! Reduced words in a free group on countably many generators `g1, g2, …`,
//! and canonical representatives for right cosets of free-factor subgroups.
//!
//! A letter is a nonzero `i32`: positive `k` is the generator `g_k`, negative
//! `-k` its inverse.  Words are kept freely reduced at all times, so equality
//! of words is equality in the group.

use std::collections::BTreeSet;
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A finite set of generator indices, defining the free-factor subgroup
/// generated by those generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSet(BTreeSet<u32>);

impl GeneratorSet {
    /// Builds a set from generator indices.  Indices are 1-based; 0 is not a
    /// generator index.
    pub fn new(indices: impl IntoIterator<Item = u32>) -> Self {
        let set: BTreeSet<u32> = indices.into_iter().collect();
        assert!(!set.contains(&0), "generator indices are 1-based");
        GeneratorSet(set)
    }

    /// The empty set (trivial subgroup).
    pub fn empty() -> Self {
        GeneratorSet(BTreeSet::new())
    }

    /// The contiguous range `{lo, …, hi}`, empty when `lo > hi`.
    pub fn range(lo: u32, hi: u32) -> Self {
        assert!(lo >= 1, "generator indices are 1-based");
        GeneratorSet((lo..=hi).collect())
    }

    pub fn contains(&self, index: u32) -> bool {
        self.0.contains(&index)
    }

    /// True when the index of `letter` lies in the set, regardless of sign.
    pub fn contains_letter(&self, letter: i32) -> bool {
        self.contains(letter.unsigned_abs())
    }

    pub fn is_subset(&self, other: &GeneratorSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }
}

/// A freely reduced word.  The `Vec` never contains a letter followed by its
/// negation, so two `Word`s are equal as values iff they are equal in the
/// free group.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<i32>);

impl Word {
    /// The empty word.
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    /// The single-letter word `g_index`.
    pub fn gen(index: u32) -> Self {
        assert!(index >= 1, "generator indices are 1-based");
        Word(vec![index as i32])
    }

    /// Freely reduces a raw letter sequence by cancelling adjacent inverse
    /// pairs until none remain.  The result is the unique reduced form.
    ///
    /// Letters must be nonzero; `0` encodes no generator.
    pub fn reduce(raw: &[i32]) -> Self {
        let mut stack: Vec<i32> = Vec::with_capacity(raw.len());
        for &letter in raw {
            assert!(letter != 0, "0 is not a letter");
            if stack.last() == Some(&-letter) {
                stack.pop();
            } else {
                stack.push(letter);
            }
        }
        Word(stack)
    }

    /// Concatenation followed by reduction.
    pub fn multiply(&self, other: &Word) -> Word {
        let mut stack = self.0.clone();
        for &letter in &other.0 {
            if stack.last() == Some(&-letter) {
                stack.pop();
            } else {
                stack.push(letter);
            }
        }
        Word(stack)
    }

    /// The group inverse: letters reversed with signs flipped.  Already
    /// reduced whenever the input is.
    pub fn invert(&self) -> Word {
        Word(self.0.iter().rev().map(|&l| -l).collect())
    }

    /// Canonical representative of the right coset `w·H`, where `H` is the
    /// free-factor subgroup on the generators in `h`: strips the maximal
    /// suffix whose letters all have indices in `h`.
    ///
    /// Two words have the same representative iff they lie in the same
    /// coset.  (Soundness: the stripped suffix lies in `H`.  Completeness:
    /// in `rep(v)⁻¹·rep(w)` the boundary letters of the representatives have
    /// indices outside `h` and cannot cancel into a word over `h` unless the
    /// representatives are equal.)
    pub fn coset_rep(&self, h: &GeneratorSet) -> Word {
        match self.0.iter().rposition(|&l| !h.contains_letter(l)) {
            Some(cut) => Word(self.0[..=cut].to_vec()),
            None => Word::identity(),
        }
    }

    /// True when every letter index lies in `h`, i.e. the word belongs to
    /// the free-factor subgroup on `h`.
    pub fn lies_in(&self, h: &GeneratorSet) -> bool {
        self.0.iter().all(|&l| h.contains_letter(l))
    }

    pub fn letters(&self) -> &[i32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// True iff the word has no letters — the same test as
    /// [`Word::is_identity`], under the name sequence APIs expect.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    /// Largest generator index appearing in the word, if any.
    pub fn max_index(&self) -> Option<u32> {
        self.0.iter().map(|l| l.unsigned_abs()).max()
    }
}

impl fmt::Display for Word {
    /// Renders e.g. `g1·g2⁻¹` (the empty word as `ε`).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "ε");
        }
        for (i, &l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "·")?;
            }
            if l > 0 {
                write!(f, "g{l}")?;
            } else {
                write!(f, "g{}⁻¹", -l)?;
            }
        }
        Ok(())
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Word {
    /// Accepts any raw letter array and reduces it; rejects the letter `0`.
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = Vec::<i32>::deserialize(deserializer)?;
        if let Some(pos) = raw.iter().position(|&l| l == 0) {
            return Err(D::Error::custom(format!(
                "letter {pos} is 0; letters are nonzero signed generator indices"
            )));
        }
        Ok(Word::reduce(&raw))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Oracle: cancel one adjacent inverse pair per scan, rescan until the
    /// word is stable.  Quadratic but obviously correct.
    fn reduce_by_rescanning(raw: &[i32]) -> Vec<i32> {
        let mut word = raw.to_vec();
        loop {
            let mut cancelled = false;
            let mut out = Vec::with_capacity(word.len());
            let mut i = 0;
            while i < word.len() {
                if i + 1 < word.len() && word[i] == -word[i + 1] {
                    i += 2;
                    cancelled = true;
                } else {
                    out.push(word[i]);
                    i += 1;
                }
            }
            word = out;
            if !cancelled {
                return word;
            }
        }
    }

    /// All reduced words of length ≤ `max_len` over generators `1..=n`, in
    /// breadth-first order.
    fn reduced_words(n: u32, max_len: usize) -> Vec<Word> {
        let mut frontier = vec![Word::identity()];
        let mut all = frontier.clone();
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &frontier {
                for k in 1..=n {
                    for letter in [k as i32, -(k as i32)] {
                        if w.letters().last() != Some(&-letter) {
                            let mut v = w.letters().to_vec();
                            v.push(letter);
                            next.push(Word(v));
                        }
                    }
                }
            }
            all.extend(next.iter().cloned());
            frontier = next;
        }
        all
    }

    #[test]
    fn reduce_matches_rescanning_oracle_exhaustively() {
        // Every raw sequence of length ≤ 5 over {±1, ±2}.
        let alphabet = [1, -1, 2, -2];
        let mut raws: Vec<Vec<i32>> = vec![vec![]];
        for _ in 0..5 {
            raws = raws
                .iter()
                .flat_map(|r| {
                    alphabet.iter().map(move |&l| {
                        let mut r = r.clone();
                        r.push(l);
                        r
                    })
                })
                .chain(std::iter::once(vec![]))
                .collect();
        }
        for raw in raws {
            assert_eq!(Word::reduce(&raw).letters(), reduce_by_rescanning(&raw));
        }
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(Word::reduce(&[1, -1]).letters(), &[] as &[i32]);
        assert_eq!(Word::reduce(&[1, 2, -2, -1, 3]).letters(), &[3]);
        assert_eq!(Word::reduce(&[5, -2, 1]).letters(), &[5, -2, 1]);
        // Cancellation can cascade across the whole word.
        assert_eq!(Word::reduce(&[1, 2, 3, -3, -2, -1]).letters(), &[] as &[i32]);
    }

    #[test]
    fn coset_rep_examples() {
        let h = GeneratorSet::new([2, 3]);
        // g1·g2·g3⁻¹ ends in an H-suffix of length 2.
        assert_eq!(Word::reduce(&[1, 2, -3]).coset_rep(&h).letters(), &[1]);
        // A word entirely over H represents the identity coset.
        assert!(Word::reduce(&[2, -3, 2]).coset_rep(&h).is_identity());
        // No H-suffix: the word is its own representative.
        let w = Word::reduce(&[2, 1]);
        assert_eq!(w.coset_rep(&h), w);
        // Empty subgroup: every word is its own representative.
        assert_eq!(w.coset_rep(&GeneratorSet::empty()), w);
    }

    /// Brute-force elements of the free-factor subgroup on `h`, as reduced
    /// words of length ≤ `max_len`, by breadth-first multiplication.
    fn subgroup_elements(h: &GeneratorSet, max_len: usize) -> std::collections::HashSet<Word> {
        let mut seen = std::collections::HashSet::from([Word::identity()]);
        let mut frontier = vec![Word::identity()];
        while let Some(w) = frontier.pop() {
            for k in h.iter() {
                for letter in [k as i32, -(k as i32)] {
                    let v = w.multiply(&Word(vec![letter]));
                    if v.len() <= max_len && seen.insert(v.clone()) {
                        frontier.push(v);
                    }
                }
            }
        }
        seen
    }

    #[test]
    fn coset_rep_iff_brute_force_coset_search() {
        // For all reduced words w, v of length ≤ 3 over generators {1..4}:
        // equal representatives iff some h ∈ ⟨g3, g4⟩ with |h| ≤ 6 solves
        // w = v·h.  The subgroup is enumerated breadth-first, independently
        // of the suffix-stripping rule under test.
        let h = GeneratorSet::new([3, 4]);
        let words = reduced_words(4, 3);
        let subgroup = subgroup_elements(&h, 6);
        for w in &words {
            for v in &words {
                let same_rep = w.coset_rep(&h) == v.coset_rep(&h);
                let same_coset = subgroup.contains(&v.invert().multiply(w));
                assert_eq!(
                    same_rep, same_coset,
                    "coset disagreement for w={w}, v={v}"
                );
            }
        }
    }

    #[test]
    fn coset_rep_sound_and_canonical_exhaustively() {
        // For every reduced word of length ≤ 6 over {1..4} and both test
        // subgroups: the stripped suffix lies in the subgroup, and the
        // representative is a fixed point of the stripping.
        for h in [GeneratorSet::new([3, 4]), GeneratorSet::new([2])] {
            for w in reduced_words(4, 6) {
                let r = w.coset_rep(&h);
                assert!(r.invert().multiply(&w).lies_in(&h));
                assert_eq!(r.coset_rep(&h), r);
                assert!(r.len() <= w.len());
            }
        }
    }

    #[test]
    fn serde_roundtrip_and_rejection() {
        let w: Word = serde_json::from_str("[5,-2,1]").unwrap();
        assert_eq!(w.letters(), &[5, -2, 1]);
        assert_eq!(serde_json::to_string(&w).unwrap(), "[5,-2,1]");
        // Raw input reduces on the way in.
        let w: Word = serde_json::from_str("[1,-1,3]").unwrap();
        assert_eq!(w.letters(), &[3]);
        assert!(serde_json::from_str::<Word>("[1,0,2]").is_err());
    }
}
