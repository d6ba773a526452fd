//! Truncated inverse systems of discrete fibers and the classification of
//! their limit.
//!
//! Over a shrinking system of punctured discs around a branch point, a
//! covering restricts to discrete component spaces connected by bonding
//! maps; the fiber over the branch point is the inverse limit.  We work with
//! finite truncations: a list of enumerated levels plus a bonding map from
//! each level to the previous one.  Threads (compatible sequences) are the
//! points of the truncated limit, and the sizes of the bonding fibers decide
//! the topology of the full limit.

use std::collections::HashMap;

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::word::Word;

/// A point of one level: a canonical coset representative, either a reduced
/// word (universal cover) or an element of a finite group (quotient cover).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Label {
    Word(Word),
    Group(u32),
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Label::Word(w) => w.serialize(serializer),
            Label::Group(g) => serializer.serialize_u32(*g),
        }
    }
}

/// One level of the inverse system: an enumerated component space.
#[derive(Debug, Clone)]
pub struct Level {
    labels: Vec<Label>,
    position: HashMap<Label, usize>,
    /// False when the enumeration was truncated (the true level is
    /// infinite); sizes of partial levels are lower bounds only.
    pub exhaustive: bool,
}

impl Level {
    fn new(labels: Vec<Label>, exhaustive: bool) -> Self {
        let position = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        Level {
            labels,
            position,
            exhaustive,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, index: usize) -> &Label {
        &self.labels[index]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// Index of a label in this level's enumeration.
    pub fn index_of(&self, label: &Label) -> Option<usize> {
        self.position.get(label).copied()
    }
}

/// Errors from building or sampling an inverse system.
#[derive(Debug, thiserror::Error, PartialEq)]
pub enum FiberError {
    /// Raised by thread enumeration when a level outgrows the cap
    /// (`CAP_EXCEEDED`).
    #[error("CAP_EXCEEDED: level {level} holds {size} elements, over the cap of {cap}")]
    CapExceeded { level: usize, size: usize, cap: usize },
    /// Raised when bonding fibers over a level differ in size and no
    /// homogeneity certificate was supplied (`NOT_HOMOGENEOUS`).
    #[error(
        "NOT_HOMOGENEOUS: bonding fibers over level {level} have sizes {smaller} and {larger}; \
         supply a transitivity certificate or an explicit override to sample anyway"
    )]
    NotHomogeneous {
        level: usize,
        smaller: usize,
        larger: usize,
    },
    /// Internal invariant: every bond image must land in the coarser level.
    #[error("bond out of level {level} missed the enumeration of level {}", .level - 1)]
    BondNotTotal { level: usize },
    #[error("an inverse system needs at least one level")]
    Empty,
    #[error("level {level} is empty; every level contains at least the basepoint component")]
    EmptyLevel { level: usize },
}

/// A truncated inverse system: levels `1..=depth` and bonding maps
/// `level n+1 → level n`.  Level 1 is the coarsest.  By convention the
/// basepoint component sits at index 0 of every level.
#[derive(Debug, Clone)]
pub struct LevelSystem {
    levels: Vec<Level>,
    /// `bonds[n-1][i]` is the index in level `n` of the bond image of
    /// element `i` of level `n+1`; entry `depth-1` is unused and empty.
    bonds: Vec<Vec<usize>>,
}

impl LevelSystem {
    /// Assembles a system from per-level label enumerations and a bonding
    /// rule mapping a level-(n+1) label to its level-n label.
    ///
    /// Checks totality: each bond image must already be enumerated in the
    /// coarser level.  (Partial levels must therefore be closed under the
    /// bond, which holds for length-capped word enumerations because
    /// representatives never grow.)
    pub fn from_levels(
        level_labels: Vec<(Vec<Label>, bool)>,
        bond: impl Fn(usize, &Label) -> Label,
    ) -> Result<Self, FiberError> {
        if level_labels.is_empty() {
            return Err(FiberError::Empty);
        }
        let levels: Vec<Level> = level_labels
            .into_iter()
            .map(|(labels, exhaustive)| Level::new(labels, exhaustive))
            .collect();
        for (i, level) in levels.iter().enumerate() {
            if level.is_empty() {
                return Err(FiberError::EmptyLevel { level: i + 1 });
            }
        }
        let mut bonds = Vec::with_capacity(levels.len());
        for n in 1..levels.len() {
            // Bond out of level n+1 (0-based n) down to level n.
            let mut images = Vec::with_capacity(levels[n].len());
            for label in levels[n].labels() {
                let image = bond(n + 1, label);
                let index = levels[n - 1]
                    .index_of(&image)
                    .ok_or(FiberError::BondNotTotal { level: n + 1 })?;
                images.push(index);
            }
            bonds.push(images);
        }
        bonds.push(Vec::new());
        Ok(LevelSystem { levels, bonds })
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Level `n`, 1-based.
    pub fn level(&self, n: usize) -> &Level {
        &self.levels[n - 1]
    }

    /// Index in level `n` of the bond image of element `elem` of level `n+1`.
    pub fn bond_image(&self, n: usize, elem: usize) -> usize {
        self.bonds[n - 1][elem]
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.len()).collect()
    }

    pub fn all_exhaustive(&self) -> bool {
        self.levels.iter().all(|l| l.exhaustive)
    }
}

/// A point of the truncated inverse limit: one label per level, compatible
/// with the bonds.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Thread(pub Vec<Label>);

/// The threads of a truncated system.
#[derive(Debug, Clone)]
pub struct ThreadEnumeration {
    pub threads: Vec<Thread>,
    /// False when some level was itself a truncated enumeration, so deeper
    /// truncations could reveal more threads.
    pub exhaustive: bool,
}

/// The thread through element `top` of the deepest level, read off by
/// following bonds downward.
fn thread_at(sys: &LevelSystem, top: usize) -> Thread {
    let depth = sys.depth();
    let mut labels = vec![Label::Group(0); depth];
    let mut at = top;
    for n in (1..=depth).rev() {
        labels[n - 1] = sys.level(n).label(at).clone();
        if n > 1 {
            at = sys.bond_image(n - 1, at);
        }
    }
    Thread(labels)
}

/// Enumerates all threads, refusing (rather than truncating silently) when
/// any level exceeds `cap`.
///
/// Bonds are total maps, so threads correspond bijectively to elements of
/// the deepest level.
pub fn enumerate_threads(sys: &LevelSystem, cap: usize) -> Result<ThreadEnumeration, FiberError> {
    for n in 1..=sys.depth() {
        let size = sys.level(n).len();
        if size > cap {
            return Err(FiberError::CapExceeded { level: n, size, cap });
        }
    }
    let threads = (0..sys.level(sys.depth()).len())
        .map(|top| thread_at(sys, top))
        .collect();
    Ok(ThreadEnumeration {
        threads,
        exhaustive: sys.all_exhaustive(),
    })
}

/// The first `min(k, top level size)` threads in enumeration order.
/// Infallible; used for report samples where a cap refusal would be
/// unhelpful.
pub fn sample_threads(sys: &LevelSystem, k: usize) -> Vec<Thread> {
    (0..k.min(sys.level(sys.depth()).len()))
        .map(|top| thread_at(sys, top))
        .collect()
}

/// Size of one bonding fiber, with saturation above the sampling cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FiberSize {
    Exact(usize),
    /// More preimages than the sampling cap; on a partial level this is a
    /// certificate that the true fiber is large (it can only be larger).
    Overflow,
}

impl Serialize for FiberSize {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            FiberSize::Exact(n) => serializer.serialize_u64(*n as u64),
            FiberSize::Overflow => serializer.serialize_str("OVERFLOW"),
        }
    }
}

/// Why it is sound to read the size of one bonding fiber off a single
/// element of the lower level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HomogeneityWitness {
    /// A deck action transitive on every level has been exhibited; it
    /// commutes with the bonds, so all fibers over one level are conjugate.
    TransitiveAction,
    /// No certificate: verify homogeneity by counting every fiber, and fail
    /// with [`FiberError::NotHomogeneous`] if two differ.
    Checked,
    /// Caller takes responsibility (e.g. universal covers, where fibers
    /// over one level are cosets of one subgroup and homogeneity is a
    /// theorem rather than a computation).
    Override,
}

/// Sizes of the bonding fibers over the basepoint component of each level
/// `1..=depth-1`, saturating at `sample_cap`.
///
/// Under [`HomogeneityWitness::Checked`], all fibers over a level are
/// counted and compared (sizes compare saturated: two fibers both above the
/// cap count as equal).  Under the other witnesses only the basepoint fiber
/// is counted.
pub fn bonding_fiber_sizes(
    sys: &LevelSystem,
    sample_cap: usize,
    witness: HomogeneityWitness,
) -> Result<Vec<FiberSize>, FiberError> {
    let saturate = |count: usize| {
        if count > sample_cap {
            FiberSize::Overflow
        } else {
            FiberSize::Exact(count)
        }
    };
    let mut sizes = Vec::with_capacity(sys.depth().saturating_sub(1));
    for n in 1..sys.depth() {
        let mut counts = vec![0usize; sys.level(n).len()];
        for upper in 0..sys.level(n + 1).len() {
            counts[sys.bond_image(n, upper)] += 1;
        }
        if witness == HomogeneityWitness::Checked {
            let (mut lo, mut hi) = (usize::MAX, 0usize);
            for &c in &counts {
                lo = lo.min(c.min(sample_cap + 1));
                hi = hi.max(c.min(sample_cap + 1));
            }
            if lo != hi {
                return Err(FiberError::NotHomogeneous {
                    level: n,
                    smaller: lo,
                    larger: hi,
                });
            }
        }
        sizes.push(saturate(counts[0]));
    }
    Ok(sizes)
}

/// Topological verdict on the inverse limit, read off the bonding fiber
/// sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FiberVerdict {
    /// The sizes are eventually 1: the limit injects into a finite level,
    /// hence is discrete (and the covering restricts to an honest covering
    /// near the branch point).
    StationaryDiscrete,
    /// Every observed size is exactly 2: the limit is a Cantor set.
    CantorLike,
    /// Some size overflows the cap: the limit contains a product of
    /// infinitely many infinite discrete spaces' worth of choices and is
    /// not locally compact.
    NonLocallyCompact,
    /// The truncation is too shallow to tell (e.g. sizes still > 1 at the
    /// deepest level but not overflowing).
    Inconclusive,
}

/// Classification of the observed size sequence `N_n`, together with the
/// first level of an all-ones tail when there is one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberClassification {
    pub verdict: FiberVerdict,
    /// For [`FiberVerdict::StationaryDiscrete`]: first level from which
    /// every observed size is 1.
    pub stationary_from: Option<usize>,
}

/// Minimum length of the all-ones tail required to call a sequence
/// stationary.  The trailing discs of a finite (non-accumulating)
/// configuration repeat, so honest stabilization shows up as a run of 1s;
/// shorter runs stay inconclusive.
pub const STATIONARY_TAIL: usize = 3;

/// Classifies a bonding-size sequence.
///
/// Rules, in order: an all-ones tail of length ≥ [`STATIONARY_TAIL`] is
/// stationary-discrete (sizes > 1 before the tail are allowed — only the
/// tail decides); otherwise any overflow means not locally compact; a
/// constant-2 sequence is Cantor-like (constant, not merely ≥ 2: a finite
/// observation window earns the name only by matching the doubling system
/// it is named after); anything else is inconclusive.
pub fn classify_fiber(sizes: &[FiberSize]) -> FiberClassification {
    let tail_start = sizes
        .iter()
        .rposition(|s| *s != FiberSize::Exact(1))
        .map_or(0, |i| i + 1);
    let tail_len = sizes.len() - tail_start;
    if !sizes.is_empty() && tail_len >= STATIONARY_TAIL.min(sizes.len()) {
        return FiberClassification {
            verdict: FiberVerdict::StationaryDiscrete,
            stationary_from: Some(tail_start + 1),
        };
    }
    if sizes.contains(&FiberSize::Overflow) {
        return FiberClassification {
            verdict: FiberVerdict::NonLocallyCompact,
            stationary_from: None,
        };
    }
    let constant_two = sizes.iter().all(|s| *s == FiberSize::Exact(2));
    if !sizes.is_empty() && constant_two {
        return FiberClassification {
            verdict: FiberVerdict::CantorLike,
            stationary_from: None,
        };
    }
    FiberClassification {
        verdict: FiberVerdict::Inconclusive,
        stationary_from: None,
    }
}

/// Report on the truncated fiber over a branch point.
#[derive(Debug, Clone, Serialize)]
pub struct FiberReport {
    pub depth: usize,
    pub level_sizes: Vec<usize>,
    /// Bonding fiber sizes `N_1, …, N_{depth-1}`; `"OVERFLOW"` above cap.
    pub n_sequence: Vec<FiberSize>,
    pub verdict: FiberVerdict,
    /// A deterministic sample of threads (all of them when few).
    #[serde(serialize_with = "serialize_threads")]
    pub threads_sample: Vec<Thread>,
}

fn serialize_threads<S: Serializer>(threads: &[Thread], serializer: S) -> Result<S::Ok, S::Error> {
    let mut seq = serializer.serialize_seq(Some(threads.len()))?;
    for t in threads {
        seq.serialize_element(t)?;
    }
    seq.end()
}
