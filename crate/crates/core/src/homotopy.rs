//! Almost-homotopy of path-words and its agreement with endpoint
//! identification in the branched cover.
//!
//! Two paths into the branch point are almost homotopic when they become
//! homotopic inside every punctured disc of the system — combinatorially,
//! when their words lie in the same coset at every level.  This is exactly
//! the condition for their lifts to share an endpoint thread, and
//! [`equivalence_check`] verifies that agreement with the two sides
//! computed through independent routes.

use std::fmt;

use crate::cover::{CoverError, CoverSpec, CoverSystem, PunctureConfig};
use crate::word::Word;

/// Endpoint tag of a path-word: the distinguished point of the disc system
/// or one of the punctures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    LimitPoint,
    Puncture(u32),
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::LimitPoint => write!(f, "LIMIT_POINT"),
            Target::Puncture(k) => write!(f, "puncture {k}"),
        }
    }
}

/// A path from the basepoint ending at `target`, recorded by the word its
/// loop part traces in the meridian generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathWord {
    pub word: Word,
    pub target: Target,
}

impl PathWord {
    /// A path into the distinguished point.
    pub fn to_limit(word: Word) -> Self {
        PathWord {
            word,
            target: Target::LimitPoint,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum HomotopyError {
    /// Almost-homotopy only compares paths with a common endpoint
    /// (`TARGET_MISMATCH`).
    #[error("TARGET_MISMATCH: paths end at {t1} and {t2}")]
    TargetMismatch { t1: Target, t2: Target },
    #[error("target puncture {index} is outside 1..={count}")]
    TargetOutOfRange { index: u32, count: u32 },
    #[error(transparent)]
    Cover(#[from] CoverError),
}

/// Outcome of an almost-homotopy comparison at a finite depth.
///
/// A positive answer is evidence up to the checked depth (deeper levels
/// could still separate); a negative answer is conclusive and names the
/// first separating level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HomotopyVerdict {
    pub equivalent: bool,
    pub checked_depth: usize,
    pub separating_level: Option<usize>,
}

fn check_target(target: Target, cfg: &PunctureConfig) -> Result<(), HomotopyError> {
    if let Target::Puncture(index) = target {
        if index < 1 || index > cfg.puncture_count() {
            return Err(HomotopyError::TargetOutOfRange {
                index,
                count: cfg.puncture_count(),
            });
        }
    }
    Ok(())
}

fn check_word(w: &Word, cfg: &PunctureConfig) -> Result<(), HomotopyError> {
    if let Some(index) = w.max_index() {
        if index > cfg.puncture_count() {
            return Err(HomotopyError::Cover(CoverError::GeneratorOutOfRange {
                index,
                count: cfg.puncture_count(),
            }));
        }
    }
    Ok(())
}

/// First level `n ≤ depth` whose coset separates the two words, if any.
/// Separation is monotone in `n` (bonds send equal cosets to equal
/// cosets), so the scan stops at the first difference.
fn separating_level(w1: &Word, w2: &Word, cfg: &PunctureConfig, depth: usize) -> Option<usize> {
    // Same coset of ⟨g_k : k ∈ disc⟩ iff w1⁻¹·w2 lies in the subgroup —
    // checked by letter membership, not canonical representatives.
    let difference = w1.invert().multiply(w2);
    (1..=depth).find(|&n| !difference.lies_in(cfg.schedule(n)))
}

/// Almost-homotopy test: equal cosets of `⟨g_k : k ∈ disc_schedule(n)⟩`
/// for every `n ≤ depth`.
pub fn almost_homotopic(
    p1: &PathWord,
    p2: &PathWord,
    cfg: &PunctureConfig,
    depth: usize,
) -> Result<HomotopyVerdict, HomotopyError> {
    if p1.target != p2.target {
        return Err(HomotopyError::TargetMismatch {
            t1: p1.target,
            t2: p2.target,
        });
    }
    check_target(p1.target, cfg)?;
    check_word(&p1.word, cfg)?;
    check_word(&p2.word, cfg)?;
    if depth == 0 {
        return Err(HomotopyError::Cover(CoverError::DepthZero));
    }
    let separating = separating_level(&p1.word, &p2.word, cfg, depth);
    Ok(HomotopyVerdict {
        equivalent: separating.is_none(),
        checked_depth: depth,
        separating_level: separating,
    })
}

/// Almost-triviality of a loop: almost-homotopy with the constant path.
pub fn almost_trivial(
    loop_word: &Word,
    cfg: &PunctureConfig,
    depth: usize,
) -> Result<HomotopyVerdict, HomotopyError> {
    almost_homotopic(
        &PathWord::to_limit(loop_word.clone()),
        &PathWord::to_limit(Word::identity()),
        cfg,
        depth,
    )
}

/// Cross-checks that path-class equality agrees with endpoint-thread
/// equality over every same-target pair in the sample.
///
/// The two sides are computed through independent routes.  Path classes
/// use subgroup-membership of `w1⁻¹·w2` — letter membership for the
/// universal cover, closure membership of the deck-group image for a
/// quotient.  Threads come from [`CoverSystem::lift_endpoint`], i.e. the
/// canonical-representative machinery.  Pairs with different targets are
/// incomparable and skipped.
pub fn equivalence_check(
    sample: &[PathWord],
    cfg: &PunctureConfig,
    spec: &CoverSpec,
    depth: usize,
) -> Result<bool, HomotopyError> {
    for p in sample {
        check_target(p.target, cfg)?;
        check_word(&p.word, cfg)?;
    }
    let system = CoverSystem::build(cfg, spec, depth, crate::cover::CapSettings::default().word_length_cap)?;
    let threads: Vec<_> = sample
        .iter()
        .map(|p| system.lift_endpoint(&p.word))
        .collect::<Result<_, _>>()?;

    // Path-class data, per the covering under test.
    enum ClassSide<'a> {
        Universal,
        Quotient {
            q: &'a crate::group::QuotientSpec,
            images: Vec<u32>,
            level_subgroups: Vec<Vec<u32>>,
        },
    }
    let side = match spec {
        CoverSpec::Universal => ClassSide::Universal,
        CoverSpec::Quotient(q) => {
            let images = sample
                .iter()
                .map(|p| q.apply(&p.word).map_err(CoverError::from))
                .collect::<Result<_, _>>()?;
            let level_subgroups = (1..=depth)
                .map(|n| {
                    let gens: Vec<u32> = cfg
                        .schedule(n)
                        .iter()
                        .map(|k| q.image(k))
                        .collect::<Result<_, _>>()?;
                    q.group.closure(&gens)
                })
                .collect::<Result<_, _>>()
                .map_err(CoverError::from)?;
            ClassSide::Quotient {
                q,
                images,
                level_subgroups,
            }
        }
    };

    for i in 0..sample.len() {
        for j in (i + 1)..sample.len() {
            if sample[i].target != sample[j].target {
                continue;
            }
            let same_class = match &side {
                ClassSide::Universal => {
                    separating_level(&sample[i].word, &sample[j].word, cfg, depth).is_none()
                }
                ClassSide::Quotient {
                    q,
                    images,
                    level_subgroups,
                } => {
                    let d = q.group.mul(q.group.inv(images[i]), images[j]);
                    level_subgroups
                        .iter()
                        .all(|sub| sub.binary_search(&d).is_ok())
                }
            };
            let same_thread = threads[i] == threads[j];
            if same_class != same_thread {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
