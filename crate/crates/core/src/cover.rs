//! Planar puncture configurations and their branched-covering fibers.
//!
//! The base is a plane with `N` punctures and a distinguished point `b`
//! (either an accumulation point of punctures or an ordinary point), probed
//! by a decreasing system of discs `D_1 ⊇ D_2 ⊇ …` around `b`.  Only the
//! combinatorics enters: the disc schedule records which puncture indices
//! lie in each disc.  The fundamental group of the complement is free on
//! one meridian `g_k` per puncture, and the fiber of a covering over `b` is
//! the inverse limit of coset spaces — of free-factor subgroups for the
//! universal cover, or of their images in a finite deck group for a
//! quotient cover.

use serde::{Deserialize, Serialize};

use crate::fiber::{
    bonding_fiber_sizes, classify_fiber, sample_threads, FiberError, FiberReport, FiberSize,
    FiberVerdict, HomogeneityWitness, Label, LevelSystem, Thread,
};
use crate::group::{CosetTable, FiniteGroup, GroupError, QuotientSpec};
use crate::word::{GeneratorSet, Word};

/// Enumeration and sampling caps.  Word and bond caps bound the partial
/// enumeration of infinite universal levels; the thread cap bounds report
/// payloads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CapSettings {
    /// Universal levels enumerate reduced words up to this length.
    pub word_length_cap: usize,
    /// Bonding fibers larger than this saturate to `OVERFLOW`.
    pub bond_sample_cap: usize,
    /// Thread enumerations refuse levels larger than this.
    pub thread_cap: usize,
}

impl Default for CapSettings {
    fn default() -> Self {
        CapSettings {
            word_length_cap: 6,
            bond_sample_cap: 50,
            thread_cap: 4096,
        }
    }
}

/// Number of threads included in report samples.
const THREAD_SAMPLE: usize = 8;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CoverError {
    #[error("a configuration needs at least one puncture")]
    NoPunctures,
    #[error("disc schedule is empty; at least one disc is required")]
    EmptySchedule,
    #[error("disc schedule must be decreasing: disc {level} is not contained in disc {}", .level - 1)]
    ScheduleNotDecreasing { level: usize },
    #[error("puncture index {index} in disc {level} is outside 1..={count}")]
    PunctureOutOfRange { level: usize, index: u32, count: u32 },
    #[error("accumulating configuration has an empty disc at level {level}; discs around the limit point always contain deeper punctures")]
    EmptyAccumulatingDisc { level: usize },
    #[error("depth {depth} exceeds the {count} punctures of an accumulating configuration; deeper discs are not modelled")]
    DepthBeyondAccumulation { depth: usize, count: u32 },
    #[error("depth must be at least 1")]
    DepthZero,
    #[error("word length cap must be at least 1")]
    CapZero,
    #[error("word uses generator g{index}, beyond the {count} punctures")]
    GeneratorOutOfRange { index: u32, count: u32 },
    #[error("quotient assigns images to {assigned} generators but the configuration has {count} punctures")]
    ImageCountMismatch { assigned: u32, count: u32 },
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Fiber(#[from] FiberError),
}

/// A planar configuration of punctures with a decreasing disc system
/// around a distinguished point.
///
/// The canonical accumulating configuration places puncture `k` at
/// `(1/k, 0)` with the limit point `b = (0,0)` and discs of radius
/// `1/(n－1/2)`, so disc `n` contains exactly the punctures `{k : k ≥ n}`;
/// the geometry is documentation only — computations use the index sets.
#[derive(Debug, Clone, PartialEq)]
pub struct PunctureConfig {
    puncture_count: u32,
    accumulating: bool,
    /// Name of the base point, which lies outside every disc.
    pub basepoint_tag: String,
    discs: Vec<GeneratorSet>,
}

impl PunctureConfig {
    /// Validates a configuration: indices in range, schedule decreasing,
    /// and (for accumulating configurations) no empty disc.
    pub fn new(
        puncture_count: u32,
        accumulating: bool,
        discs: Vec<GeneratorSet>,
    ) -> Result<Self, CoverError> {
        if puncture_count == 0 {
            return Err(CoverError::NoPunctures);
        }
        if discs.is_empty() {
            return Err(CoverError::EmptySchedule);
        }
        for (i, disc) in discs.iter().enumerate() {
            for index in disc.iter() {
                if index < 1 || index > puncture_count {
                    return Err(CoverError::PunctureOutOfRange {
                        level: i + 1,
                        index,
                        count: puncture_count,
                    });
                }
            }
            if i > 0 && !disc.is_subset(&discs[i - 1]) {
                return Err(CoverError::ScheduleNotDecreasing { level: i + 1 });
            }
            if accumulating && disc.is_empty() {
                return Err(CoverError::EmptyAccumulatingDisc { level: i + 1 });
            }
        }
        Ok(PunctureConfig {
            puncture_count,
            accumulating,
            basepoint_tag: "a".to_string(),
            discs,
        })
    }

    /// The canonical accumulating configuration on `n` punctures: disc `k`
    /// contains punctures `{k, …, n}`.
    pub fn canonical_accumulating(n: u32) -> Self {
        let discs = (1..=n).map(|k| GeneratorSet::range(k, n)).collect();
        PunctureConfig::new(n, true, discs).expect("canonical schedule is valid")
    }

    pub fn puncture_count(&self) -> u32 {
        self.puncture_count
    }

    pub fn accumulating(&self) -> bool {
        self.accumulating
    }

    /// Puncture indices inside disc `n` (1-based).  Beyond the stored
    /// schedule the last disc repeats: smaller discs around an ordinary
    /// point keep the same puncture content.
    pub fn schedule(&self, n: usize) -> &GeneratorSet {
        assert!(n >= 1, "disc levels are 1-based");
        &self.discs[(n - 1).min(self.discs.len() - 1)]
    }

    /// Number of explicitly stored discs.
    pub fn stored_depth(&self) -> usize {
        self.discs.len()
    }

    fn check_depth(&self, depth: usize) -> Result<(), CoverError> {
        if depth == 0 {
            return Err(CoverError::DepthZero);
        }
        if self.accumulating && depth > self.puncture_count as usize {
            return Err(CoverError::DepthBeyondAccumulation {
                depth,
                count: self.puncture_count,
            });
        }
        Ok(())
    }

    fn check_word(&self, w: &Word) -> Result<(), CoverError> {
        if let Some(index) = w.max_index() {
            if index > self.puncture_count {
                return Err(CoverError::GeneratorOutOfRange {
                    index,
                    count: self.puncture_count,
                });
            }
        }
        Ok(())
    }
}

/// Which covering of the punctured plane is being completed over the
/// branch point.
#[derive(Debug, Clone, PartialEq)]
pub enum CoverSpec {
    /// The universal cover: levels are cosets of free-factor subgroups of
    /// the meridian free group.
    Universal,
    /// The quotient cover determined by a surjection onto a finite deck
    /// group.
    Quotient(QuotientSpec),
}

/// The deck group acting on every level of a quotient system by left
/// translation of cosets.
#[derive(Debug, Clone)]
pub struct DeckAction {
    group: FiniteGroup,
    /// Generators of the acting subgroup (the full deck group by default).
    generators: Vec<u32>,
    levels: Vec<ActionLevel>,
}

#[derive(Debug, Clone)]
struct ActionLevel {
    /// Group element → index of its coset in the level enumeration.
    coset_index: Vec<usize>,
    /// Level element → a representative group element (the canonical one).
    reps: Vec<u32>,
}

impl DeckAction {
    fn from_tables(group: FiniteGroup, generators: Vec<u32>, tables: &[CosetTable]) -> Self {
        let levels = tables
            .iter()
            .map(|t| ActionLevel {
                coset_index: (0..group.order()).map(|a| t.coset_index(a)).collect(),
                reps: t.reps.clone(),
            })
            .collect();
        DeckAction {
            group,
            generators,
            levels,
        }
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn acting_generators(&self) -> &[u32] {
        &self.generators
    }

    pub fn level_size(&self, n: usize) -> usize {
        self.levels[n - 1].reps.len()
    }

    /// Left translation: sends the coset of `r` to the coset of `g·r`.
    pub fn act(&self, n: usize, g: u32, elem: usize) -> usize {
        let level = &self.levels[n - 1];
        level.coset_index[self.group.mul(g, level.reps[elem]) as usize]
    }

    /// The same action restricted to the subgroup generated by `generators`.
    pub fn restricted_to(&self, generators: Vec<u32>) -> Result<DeckAction, GroupError> {
        for &g in &generators {
            if !self.group.contains(g) {
                return Err(GroupError::ElementOutOfRange {
                    value: g,
                    order: self.group.order(),
                });
            }
        }
        Ok(DeckAction {
            group: self.group.clone(),
            generators,
            levels: self.levels.clone(),
        })
    }

    /// Orbits of the acting subgroup on level `n`.
    pub fn orbit_count(&self, n: usize) -> usize {
        let size = self.level_size(n);
        let mut seen = vec![false; size];
        let mut orbits = 0;
        for start in 0..size {
            if seen[start] {
                continue;
            }
            orbits += 1;
            let mut frontier = vec![start];
            seen[start] = true;
            while let Some(e) = frontier.pop() {
                for &g in &self.generators {
                    for h in [g, self.group.inv(g)] {
                        let image = self.act(n, h, e);
                        if !seen[image] {
                            seen[image] = true;
                            frontier.push(image);
                        }
                    }
                }
            }
        }
        orbits
    }

    /// All group elements fixing the basepoint component of level `n`.
    pub fn basepoint_stabilizer(&self, n: usize) -> Vec<u32> {
        (0..self.group.order())
            .filter(|&g| self.act(n, g, 0) == 0)
            .collect()
    }

    /// Exhaustive action/bond commutation check:
    /// `bond(g·x) = g·bond(x)` for every group element, level, and element.
    pub fn commutes_with_bonds(&self, sys: &LevelSystem) -> bool {
        for n in 1..sys.depth() {
            for e in 0..sys.level(n + 1).len() {
                for g in 0..self.group.order() {
                    let acted_then_bonded = sys.bond_image(n, self.act(n + 1, g, e));
                    let bonded_then_acted = self.act(n, g, sys.bond_image(n, e));
                    if acted_then_bonded != bonded_then_acted {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// True per level iff the action has a single orbit there.
pub fn deck_transitive_per_level(sys: &LevelSystem, action: &DeckAction) -> Vec<bool> {
    (1..=sys.depth())
        .map(|n| {
            debug_assert_eq!(sys.level(n).len(), action.level_size(n));
            action.orbit_count(n) == 1
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Universal levels: words under a length cap.

/// All reduced words one letter longer than those in `frontier`, in
/// deterministic generator order.
fn extend_reduced(frontier: &[Word], count: u32) -> Vec<Word> {
    let mut next = Vec::with_capacity(frontier.len() * 2 * count as usize);
    for w in frontier {
        for k in 1..=count {
            for letter in [k as i32, -(k as i32)] {
                if w.letters().last() != Some(&-letter) {
                    let mut v = w.letters().to_vec();
                    v.push(letter);
                    next.push(Word::reduce(&v));
                }
            }
        }
    }
    next
}

/// All reduced words of length ≤ `cap` over generators `1..=count`,
/// shortest first, identity first; deterministic.
fn words_up_to(count: u32, cap: usize) -> Vec<Word> {
    let mut all = vec![Word::identity()];
    let mut frontier = vec![Word::identity()];
    for _ in 0..cap {
        frontier = extend_reduced(&frontier, count);
        all.extend(frontier.iter().cloned());
    }
    all
}

/// Depth-first count of reduced words of length ≤ `cap` over the given
/// alphabet whose last letter is accepted by `keep_last` (the empty word is
/// always counted), stopping once `limit` words have been found.
/// Returns the count and whether the limit cut the search short.
fn count_reduced_words(
    alphabet: &[u32],
    cap: usize,
    keep_last: &dyn Fn(i32) -> bool,
    limit: usize,
) -> (usize, bool) {
    fn dfs(
        alphabet: &[u32],
        remaining: usize,
        last: i32,
        keep_last: &dyn Fn(i32) -> bool,
        count: &mut usize,
        limit: usize,
    ) -> bool {
        if *count >= limit {
            return true;
        }
        if remaining == 0 {
            return false;
        }
        for &k in alphabet {
            for letter in [k as i32, -(k as i32)] {
                if letter == -last {
                    continue;
                }
                if keep_last(letter) {
                    *count += 1;
                    if *count >= limit {
                        return true;
                    }
                }
                if dfs(alphabet, remaining - 1, letter, keep_last, count, limit) {
                    return true;
                }
            }
        }
        false
    }
    let mut count = 1; // the empty word
    let truncated = count >= limit || dfs(alphabet, cap, 0, keep_last, &mut count, limit);
    (count, truncated)
}

/// Levels of the universal cover: level `n` holds the canonical
/// representatives of every reduced word of length ≤ `word_length_cap` for
/// the subgroup on `disc_schedule(n)`; bonds re-canonicalize with the
/// larger subgroup.  Levels are partial enumerations (flagged) except when
/// a disc contains every puncture.
pub fn universal_levels(
    cfg: &PunctureConfig,
    depth: usize,
    word_length_cap: usize,
) -> Result<LevelSystem, CoverError> {
    cfg.check_depth(depth)?;
    if word_length_cap == 0 {
        return Err(CoverError::CapZero);
    }
    let words = words_up_to(cfg.puncture_count(), word_length_cap);
    let full = GeneratorSet::range(1, cfg.puncture_count());
    let mut level_labels = Vec::with_capacity(depth);
    for n in 1..=depth {
        let h = cfg.schedule(n);
        // A representative is a word with no trailing letter in the
        // subgroup; reps of length ≤ cap are exactly the reps of all words
        // of length ≤ cap, since stripping never lengthens.
        let labels: Vec<Label> = words
            .iter()
            .filter(|w| w.letters().last().is_none_or(|&l| !h.contains_letter(l)))
            .map(|w| Label::Word(w.clone()))
            .collect();
        let exhaustive = full.is_subset(h);
        level_labels.push((labels, exhaustive));
    }
    let sys = LevelSystem::from_levels(level_labels, |source, label| match label {
        Label::Word(w) => Label::Word(w.coset_rep(cfg.schedule(source - 1))),
        Label::Group(_) => unreachable!("universal levels are word-labelled"),
    })?;
    Ok(sys)
}

/// Levels of the quotient cover determined by `q`: level `n` holds the
/// right cosets of `⟨q(g_k) : k ∈ disc_schedule(n)⟩`, with the deck group
/// acting by left translation.  Levels are finite and exact.
pub fn quotient_levels(
    cfg: &PunctureConfig,
    q: &QuotientSpec,
    depth: usize,
) -> Result<(LevelSystem, DeckAction), CoverError> {
    let (sys, action, _) = quotient_system(cfg, q, depth)?;
    Ok((sys, action))
}

fn quotient_system(
    cfg: &PunctureConfig,
    q: &QuotientSpec,
    depth: usize,
) -> Result<(LevelSystem, DeckAction, Vec<CosetTable>), CoverError> {
    cfg.check_depth(depth)?;
    if q.generator_count() < cfg.puncture_count() {
        return Err(CoverError::ImageCountMismatch {
            assigned: q.generator_count(),
            count: cfg.puncture_count(),
        });
    }
    let mut tables = Vec::with_capacity(depth);
    for n in 1..=depth {
        let gens: Vec<u32> = cfg
            .schedule(n)
            .iter()
            .map(|k| q.image(k))
            .collect::<Result<_, _>>()?;
        tables.push(q.group.coset_table(&gens)?);
    }
    let level_labels = tables
        .iter()
        .map(|t| (t.reps.iter().map(|&r| Label::Group(r)).collect(), true))
        .collect();
    let sys = LevelSystem::from_levels(level_labels, |source, label| match label {
        Label::Group(g) => Label::Group(tables[source - 2].canon[*g as usize]),
        Label::Word(_) => unreachable!("quotient levels are group-labelled"),
    })?;
    let images: Vec<u32> = (1..=cfg.puncture_count())
        .map(|k| q.image(k))
        .collect::<Result<_, _>>()?;
    let action = DeckAction::from_tables(q.group.clone(), images, &tables);
    Ok((sys, action, tables))
}

// ---------------------------------------------------------------------------
// Cover systems: one covering, truncated at a depth.

#[derive(Debug, Clone)]
enum SystemKind {
    /// Lazy: levels are counted and sampled without materializing the
    /// (large) word enumerations.
    Universal { word_length_cap: usize },
    /// Exact: the finite level system, its coset tables, and the deck
    /// action are all materialized (boxed: hundreds of bytes against the
    /// lazy variant's one word).
    Quotient(Box<QuotientData>),
}

#[derive(Debug, Clone)]
struct QuotientData {
    spec: QuotientSpec,
    system: LevelSystem,
    action: DeckAction,
    tables: Vec<CosetTable>,
}

/// Level sizes, bonding sizes, verdict, and thread sample of one system.
type ClassificationData = (Vec<usize>, Vec<FiberSize>, FiberVerdict, Vec<Thread>);

/// A branched covering truncated at a depth, ready for fiber reports,
/// endpoint lifts, and the Galois decision procedure.
#[derive(Debug, Clone)]
pub struct CoverSystem {
    config: PunctureConfig,
    depth: usize,
    kind: SystemKind,
}

impl CoverSystem {
    pub fn build(
        cfg: &PunctureConfig,
        spec: &CoverSpec,
        depth: usize,
        word_length_cap: usize,
    ) -> Result<Self, CoverError> {
        cfg.check_depth(depth)?;
        if word_length_cap == 0 {
            return Err(CoverError::CapZero);
        }
        let kind = match spec {
            CoverSpec::Universal => SystemKind::Universal { word_length_cap },
            CoverSpec::Quotient(q) => {
                let (system, action, tables) = quotient_system(cfg, q, depth)?;
                SystemKind::Quotient(Box::new(QuotientData {
                    spec: q.clone(),
                    system,
                    action,
                    tables,
                }))
            }
        };
        Ok(CoverSystem {
            config: cfg.clone(),
            depth,
            kind,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn config(&self) -> &PunctureConfig {
        &self.config
    }

    pub fn is_universal(&self) -> bool {
        matches!(self.kind, SystemKind::Universal { .. })
    }

    /// The materialized level system of a quotient cover.
    pub fn quotient_parts(&self) -> Option<(&LevelSystem, &DeckAction)> {
        match &self.kind {
            SystemKind::Quotient(data) => Some((&data.system, &data.action)),
            SystemKind::Universal { .. } => None,
        }
    }

    fn alphabet(&self) -> Vec<u32> {
        (1..=self.config.puncture_count()).collect()
    }

    /// Size of each level: exact for quotients, partial-enumeration counts
    /// (at the word cap) for universal covers.
    pub fn level_sizes(&self) -> Vec<usize> {
        match &self.kind {
            SystemKind::Quotient(data) => data.system.level_sizes(),
            SystemKind::Universal { word_length_cap } => (1..=self.depth)
                .map(|n| {
                    let h = self.config.schedule(n);
                    count_reduced_words(
                        &self.alphabet(),
                        *word_length_cap,
                        &|l| !h.contains_letter(l),
                        usize::MAX,
                    )
                    .0
                })
                .collect(),
        }
    }

    /// Bonding fiber sizes `N_1, …, N_{depth-1}` over the basepoint
    /// component, saturated at `bond_sample_cap`.
    ///
    /// For quotient covers the transitive deck action certifies
    /// homogeneity.  For the universal cover the fibers over a level are
    /// cosets of a single subgroup, so homogeneity is a theorem and the
    /// basepoint fiber is counted directly: its elements are the
    /// representatives over `disc_schedule(n)` that are still reduced-word
    /// representatives at level `n+1`.
    pub fn bond_sizes(&self, caps: &CapSettings) -> Result<Vec<FiberSize>, CoverError> {
        match &self.kind {
            SystemKind::Quotient(data) => Ok(bonding_fiber_sizes(
                &data.system,
                caps.bond_sample_cap,
                HomogeneityWitness::TransitiveAction,
            )?),
            SystemKind::Universal { word_length_cap } => Ok((1..self.depth)
                .map(|n| {
                    let outer: Vec<u32> = self.config.schedule(n).iter().collect();
                    let inner = self.config.schedule(n + 1);
                    let (count, truncated) = count_reduced_words(
                        &outer,
                        *word_length_cap,
                        &|l| !inner.contains_letter(l),
                        caps.bond_sample_cap + 1,
                    );
                    if truncated || count > caps.bond_sample_cap {
                        FiberSize::Overflow
                    } else {
                        FiberSize::Exact(count)
                    }
                })
                .collect()),
        }
    }

    /// The thread hitting the endpoint of the lift of the path-word `w`:
    /// its level-`n` choice is the coset of `w` at level `n`.  Total.
    pub fn lift_endpoint(&self, w: &Word) -> Result<Thread, CoverError> {
        self.config.check_word(w)?;
        let labels = match &self.kind {
            SystemKind::Universal { .. } => (1..=self.depth)
                .map(|n| Label::Word(w.coset_rep(self.config.schedule(n))))
                .collect(),
            SystemKind::Quotient(data) => {
                let image = data.spec.apply(w)?;
                data.tables
                    .iter()
                    .map(|t| Label::Group(t.canon[image as usize]))
                    .collect()
            }
        };
        Ok(Thread(labels))
    }

    /// A deterministic sample of threads: the first few by level order
    /// (quotient) or by word length (universal).  Generates only as many
    /// words as the sample needs.
    pub fn threads_sample(&self, k: usize) -> Vec<Thread> {
        match &self.kind {
            SystemKind::Quotient(data) => sample_threads(&data.system, k),
            SystemKind::Universal { word_length_cap } => {
                let h = self.config.schedule(self.depth);
                let mut sample = Vec::with_capacity(k);
                let mut frontier = vec![Word::identity()];
                for length in 0..=*word_length_cap {
                    for w in &frontier {
                        if sample.len() >= k {
                            return sample;
                        }
                        if w.letters().last().is_none_or(|&l| !h.contains_letter(l)) {
                            sample.push(
                                self.lift_endpoint(w)
                                    .expect("enumerated words stay in range"),
                            );
                        }
                    }
                    if length < *word_length_cap {
                        frontier = extend_reduced(&frontier, self.config.puncture_count());
                    }
                }
                sample
            }
        }
    }

    fn classification_data(&self, caps: &CapSettings) -> Result<ClassificationData, CoverError> {
        let level_sizes = self.level_sizes();
        let n_sequence = self.bond_sizes(caps)?;
        let verdict = classify_fiber(&n_sequence).verdict;
        let sample = self.threads_sample(THREAD_SAMPLE.min(caps.thread_cap));
        Ok((level_sizes, n_sequence, verdict, sample))
    }

    /// Fiber report over the branch point.
    pub fn fiber_report(&self, caps: &CapSettings) -> Result<FiberReport, CoverError> {
        let (level_sizes, n_sequence, verdict, threads_sample) = self.classification_data(caps)?;
        Ok(FiberReport {
            depth: self.depth,
            level_sizes,
            n_sequence,
            verdict,
            threads_sample,
        })
    }

    /// Fiber report extended with the Galois verdict and (for quotient
    /// covers) the deck-orbit counts per level.
    pub fn galois_report(&self, caps: &CapSettings) -> Result<GaloisReport, CoverError> {
        let (level_sizes, n_sequence, verdict, threads_sample) = self.classification_data(caps)?;
        let orbit_counts = match &self.kind {
            SystemKind::Universal { .. } => None,
            SystemKind::Quotient(data) => Some(
                (1..=self.depth)
                    .map(|n| data.action.orbit_count(n))
                    .collect::<Vec<_>>(),
            ),
        };
        // Discrete fiber ⇒ the deck action reaches everything (transitive);
        // an overflowing or Cantor-like fiber outgrows the orbits a deck
        // group can muster at the truncation.  All verdicts are evidence at
        // finite depth, never certificates.
        let galois_verdict = match verdict {
            FiberVerdict::StationaryDiscrete => GaloisVerdict::GaloisianEvidence,
            FiberVerdict::NonLocallyCompact => GaloisVerdict::NotGaloisianEvidence,
            FiberVerdict::CantorLike => {
                let thread_count = *level_sizes.last().expect("depth ≥ 1");
                match &orbit_counts {
                    Some(counts) if counts[self.depth - 1] < thread_count => {
                        GaloisVerdict::NotGaloisianEvidence
                    }
                    _ => GaloisVerdict::Inconclusive,
                }
            }
            FiberVerdict::Inconclusive => GaloisVerdict::Inconclusive,
        };
        Ok(GaloisReport {
            depth: self.depth,
            level_sizes,
            n_sequence,
            verdict,
            threads_sample,
            galois_verdict,
            orbit_counts,
        })
    }
}

/// Verdict of the Galois decision procedure at a finite truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GaloisVerdict {
    GaloisianEvidence,
    NotGaloisianEvidence,
    Inconclusive,
}

/// Fiber report extended with the Galois verdict and orbit counts.
#[derive(Debug, Clone, Serialize)]
pub struct GaloisReport {
    pub depth: usize,
    pub level_sizes: Vec<usize>,
    pub n_sequence: Vec<FiberSize>,
    pub verdict: FiberVerdict,
    pub threads_sample: Vec<Thread>,
    pub galois_verdict: GaloisVerdict,
    /// Deck-orbit count per level; absent for the universal cover, whose
    /// deck group is not enumerated.
    pub orbit_counts: Option<Vec<usize>>,
}

/// The Galois decision procedure: classify the fiber and derive the
/// verdict.  `GALOISIAN_EVIDENCE` iff the fiber is stationary-discrete;
/// `NOT_GALOISIAN_EVIDENCE` iff it is not locally compact, or Cantor-like
/// with fewer top-level orbits than threads.
pub fn is_galoisian(
    cfg: &PunctureConfig,
    spec: &CoverSpec,
    depth: usize,
    caps: &CapSettings,
) -> Result<GaloisReport, CoverError> {
    CoverSystem::build(cfg, spec, depth, caps.word_length_cap)?.galois_report(caps)
}

/// Standalone endpoint lift; see [`CoverSystem::lift_endpoint`].
pub fn lift_endpoint(
    w: &Word,
    cfg: &PunctureConfig,
    spec: &CoverSpec,
    depth: usize,
) -> Result<Thread, CoverError> {
    CoverSystem::build(cfg, spec, depth, CapSettings::default().word_length_cap)?.lift_endpoint(w)
}

// ---------------------------------------------------------------------------
// Configuration JSON.

/// On-disk configuration:
/// `{"punctures": N, "accumulating": bool, "disc_schedule": [[…], …],
///   "quotient": {"type": "Z2^m", …} | {"type": "table", …} | null}`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigJson {
    punctures: u32,
    accumulating: bool,
    disc_schedule: Vec<Vec<u32>>,
    quotient: Option<QuotientJson>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
enum QuotientJson {
    /// `(Z/2)^m`; images default to the standard basis vectors `e_k`.
    #[serde(rename = "Z2^m")]
    Z2m { m: u32, images: Option<Vec<u32>> },
    /// Arbitrary finite group by multiplication table; images required.
    #[serde(rename = "table")]
    Table { mul: Vec<Vec<u32>>, images: Vec<u32> },
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("field \"{field}\": {source}")]
    Cover {
        field: &'static str,
        source: CoverError,
    },
    #[error("field \"{field}\": {source}")]
    Group {
        field: &'static str,
        source: GroupError,
    },
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<(PunctureConfig, CoverSpec), ConfigError> {
    let raw: ConfigJson = serde_json::from_str(text)?;
    // Puncture indices are 1-based; report a zero as out of range before
    // building index sets.
    if let Some(level) = raw.disc_schedule.iter().position(|d| d.contains(&0)) {
        return Err(ConfigError::Cover {
            field: "disc_schedule",
            source: CoverError::PunctureOutOfRange {
                level: level + 1,
                index: 0,
                count: raw.punctures,
            },
        });
    }
    let discs = raw
        .disc_schedule
        .iter()
        .map(|d| GeneratorSet::new(d.iter().copied()))
        .collect();
    let cfg = PunctureConfig::new(raw.punctures, raw.accumulating, discs).map_err(|source| {
        ConfigError::Cover {
            field: "disc_schedule",
            source,
        }
    })?;
    let spec = match raw.quotient {
        None => CoverSpec::Universal,
        Some(QuotientJson::Z2m { m, images }) => {
            let group = FiniteGroup::z2m(m).map_err(|source| ConfigError::Group {
                field: "quotient.m",
                source,
            })?;
            let images = images
                .unwrap_or_else(|| (0..raw.punctures.min(m)).map(|k| 1u32 << k).collect());
            let q = QuotientSpec::new(group, images).map_err(|source| ConfigError::Group {
                field: "quotient.images",
                source,
            })?;
            CoverSpec::Quotient(q)
        }
        Some(QuotientJson::Table { mul, images }) => {
            let group = FiniteGroup::from_table(mul).map_err(|source| ConfigError::Group {
                field: "quotient.mul",
                source,
            })?;
            let q = QuotientSpec::new(group, images).map_err(|source| ConfigError::Group {
                field: "quotient.images",
                source,
            })?;
            CoverSpec::Quotient(q)
        }
    };
    Ok((cfg, spec))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z2_quotient(n: u32) -> QuotientSpec {
        QuotientSpec::mod_two_abelianized(n).unwrap()
    }

    #[test]
    fn canonical_schedule_contains_tail_indices() {
        let cfg = PunctureConfig::canonical_accumulating(5);
        assert_eq!(cfg.puncture_count(), 5);
        assert!(cfg.accumulating());
        for n in 1..=5usize {
            for k in 1..=5u32 {
                assert_eq!(cfg.schedule(n).contains(k), k as usize >= n);
            }
        }
    }

    #[test]
    fn config_validation() {
        use CoverError::*;
        assert_eq!(
            PunctureConfig::new(0, false, vec![GeneratorSet::empty()]),
            Err(NoPunctures)
        );
        assert_eq!(PunctureConfig::new(2, false, vec![]), Err(EmptySchedule));
        assert_eq!(
            PunctureConfig::new(
                2,
                false,
                vec![GeneratorSet::new([1]), GeneratorSet::new([2])]
            ),
            Err(ScheduleNotDecreasing { level: 2 })
        );
        assert_eq!(
            PunctureConfig::new(2, false, vec![GeneratorSet::new([3])]),
            Err(PunctureOutOfRange {
                level: 1,
                index: 3,
                count: 2
            })
        );
        assert_eq!(
            PunctureConfig::new(
                2,
                true,
                vec![GeneratorSet::new([1, 2]), GeneratorSet::empty()]
            ),
            Err(EmptyAccumulatingDisc { level: 2 })
        );
        // Depth beyond the punctures of an accumulating configuration.
        let cfg = PunctureConfig::canonical_accumulating(3);
        assert_eq!(
            universal_levels(&cfg, 4, 3).unwrap_err(),
            DepthBeyondAccumulation { depth: 4, count: 3 }
        );
        // Non-accumulating configurations repeat their last disc instead.
        let cfg =
            PunctureConfig::new(2, false, vec![GeneratorSet::new([1, 2]), GeneratorSet::new([1])])
                .unwrap();
        assert_eq!(cfg.schedule(7), &GeneratorSet::new([1]));
    }

    #[test]
    fn universal_level_one_has_identity_and_no_trailing_disc_letters() {
        // Any configuration, depth 1: representatives have no trailing
        // letter inside disc 1, and the identity is present (first).
        let cfg = PunctureConfig::new(3, false, vec![GeneratorSet::new([2])]).unwrap();
        let sys = universal_levels(&cfg, 1, 3).unwrap();
        let level = sys.level(1);
        assert_eq!(level.label(0), &Label::Word(Word::identity()));
        for label in level.labels() {
            let Label::Word(w) = label else { unreachable!() };
            assert!(w.letters().last().is_none_or(|&l| l.unsigned_abs() != 2));
        }
        assert!(!level.exhaustive);
    }

    #[test]
    fn universal_rep_of_g3_flips_at_level_four() {
        // Canonical accumulating, w = g3: inside the subgroup (rep ε) for
        // n ≤ 3, outside (rep g3) once discs exclude puncture 3.
        let cfg = PunctureConfig::canonical_accumulating(5);
        let thread = lift_endpoint(&Word::gen(3), &cfg, &CoverSpec::Universal, 5).unwrap();
        for (i, label) in thread.0.iter().enumerate() {
            let expected = if i < 3 {
                Word::identity()
            } else {
                Word::gen(3)
            };
            assert_eq!(label, &Label::Word(expected), "level {}", i + 1);
        }
    }

    #[test]
    fn universal_two_puncture_disc_around_one_puncture() {
        // N = 2, disc 1 around puncture 1 only, disc 2 empty: level 1
        // elements are words not ending in g1^{±}; the bonding fiber over
        // the basepoint is the set of powers of g1, unbounded in the cap.
        let cfg = PunctureConfig::new(
            2,
            false,
            vec![GeneratorSet::new([1]), GeneratorSet::empty()],
        )
        .unwrap();
        let sys = universal_levels(&cfg, 2, 4).unwrap();
        // Words length ≤ 4 over two generators: 1+4+12+36+108 = 161, of
        // which half of each positive length end in ±g1.
        assert_eq!(sys.level_sizes(), vec![81, 161]);
        for label in sys.level(1).labels() {
            let Label::Word(w) = label else { unreachable!() };
            assert!(w.letters().last().is_none_or(|&l| l.unsigned_abs() != 1));
        }
        let spec = CoverSpec::Universal;
        let caps = CapSettings {
            word_length_cap: 4,
            bond_sample_cap: 50,
            thread_cap: 4096,
        };
        let system = CoverSystem::build(&cfg, &spec, 2, 4).unwrap();
        // Powers g1^j, 0 < |j| ≤ 4, plus the identity: 9 at cap 4, and
        // growing with the cap (13 at cap 6) — the true fiber is infinite.
        assert_eq!(system.bond_sizes(&caps).unwrap(), vec![FiberSize::Exact(9)]);
        let system6 = CoverSystem::build(&cfg, &spec, 2, 6).unwrap();
        assert_eq!(
            system6.bond_sizes(&caps).unwrap(),
            vec![FiberSize::Exact(13)]
        );
        let tight = CapSettings {
            bond_sample_cap: 5,
            ..caps
        };
        assert_eq!(system.bond_sizes(&tight).unwrap(), vec![FiberSize::Overflow]);
    }

    #[test]
    fn lazy_universal_counts_match_materialized_levels() {
        // The counting path used for large universal systems must agree
        // with the materialized level system on desk-scale instances.
        for (cfg, depth) in [
            (PunctureConfig::canonical_accumulating(4), 4usize),
            (
                PunctureConfig::new(
                    3,
                    false,
                    vec![
                        GeneratorSet::new([1, 2, 3]),
                        GeneratorSet::new([2]),
                        GeneratorSet::empty(),
                    ],
                )
                .unwrap(),
                5,
            ),
        ] {
            let cap = 3;
            let sys = universal_levels(&cfg, depth, cap).unwrap();
            let lazy = CoverSystem::build(&cfg, &CoverSpec::Universal, depth, cap).unwrap();
            assert_eq!(lazy.level_sizes(), sys.level_sizes());
            let caps = CapSettings {
                word_length_cap: cap,
                bond_sample_cap: 1_000_000,
                thread_cap: 1 << 20,
            };
            let from_system =
                bonding_fiber_sizes(&sys, caps.bond_sample_cap, HomogeneityWitness::Override)
                    .unwrap();
            assert_eq!(lazy.bond_sizes(&caps).unwrap(), from_system);
        }
    }

    #[test]
    fn quotient_z2_6_level_sizes_and_bonds() {
        // (Z/2)^6, images e_k, canonical accumulating: the level-n subgroup
        // has rank 7−n, so Lagrange gives 2^{n−1} cosets.
        let cfg = PunctureConfig::canonical_accumulating(6);
        let q = z2_quotient(6);
        let (sys, action) = quotient_levels(&cfg, &q, 6).unwrap();
        let expected: Vec<usize> = (0..6).map(|i| 1usize << i).collect();
        assert_eq!(sys.level_sizes(), expected);
        // Independence check via orders: |level n| = |Q| / |subgroup|.
        for n in 1..=6usize {
            let gens: Vec<u32> = cfg.schedule(n).iter().map(|k| 1u32 << (k - 1)).collect();
            let subgroup = q.group.closure(&gens).unwrap();
            assert_eq!(sys.level(n).len(), 64 / subgroup.len());
        }
        let sizes =
            bonding_fiber_sizes(&sys, 50, HomogeneityWitness::TransitiveAction).unwrap();
        assert_eq!(sizes, vec![FiberSize::Exact(2); 5]);
        assert!(action.commutes_with_bonds(&sys));
        assert_eq!(deck_transitive_per_level(&sys, &action), vec![true; 6]);
    }

    #[test]
    fn trivial_and_full_subgroup_quotients_have_singleton_levels() {
        // Trivial deck group.
        let cfg = PunctureConfig::new(2, false, vec![GeneratorSet::new([1, 2])]).unwrap();
        let trivial = QuotientSpec::new(FiniteGroup::from_table(vec![vec![0]]).unwrap(), vec![0, 0])
            .unwrap();
        let (sys, _) = quotient_levels(&cfg, &trivial, 3).unwrap();
        assert_eq!(sys.level_sizes(), vec![1, 1, 1]);

        // Z/3 with every image a generator and one puncture in every disc:
        // the level subgroup is everything, one coset per level.
        let z3 = FiniteGroup::from_table(vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]])
            .unwrap();
        let q = QuotientSpec::new(z3, vec![1]).unwrap();
        let cfg = PunctureConfig::new(1, false, vec![GeneratorSet::new([1])]).unwrap();
        let (sys, action) = quotient_levels(&cfg, &q, 4).unwrap();
        assert_eq!(sys.level_sizes(), vec![1; 4]);
        assert_eq!(deck_transitive_per_level(&sys, &action), vec![true; 4]);
    }

    #[test]
    fn restricted_actions_lose_transitivity() {
        let cfg = PunctureConfig::canonical_accumulating(6);
        let q = z2_quotient(6);
        let (sys, action) = quotient_levels(&cfg, &q, 6).unwrap();
        // Trivial subgroup on a 2-element level: two orbits.
        let trivial = action.restricted_to(vec![]).unwrap();
        let t = deck_transitive_per_level(&sys, &trivial);
        assert_eq!(t, vec![true, false, false, false, false, false]);
        // ⟨e1⟩ merges cosets differing by e1: transitive exactly up to
        // level 2, then ≥ 2 orbits remain.
        let e1 = action.restricted_to(vec![1]).unwrap();
        let t = deck_transitive_per_level(&sys, &e1);
        assert_eq!(t, vec![true, true, false, false, false, false]);
        for n in 3..=6usize {
            assert_eq!(e1.orbit_count(n), sys.level(n).len() / 2);
        }
    }

    #[test]
    fn stabilizer_of_basepoint_is_the_disc_subgroup() {
        let cfg = PunctureConfig::canonical_accumulating(6);
        let q = z2_quotient(6);
        let (_, action) = quotient_levels(&cfg, &q, 6).unwrap();
        for n in 1..=6usize {
            let gens: Vec<u32> = cfg.schedule(n).iter().map(|k| 1u32 << (k - 1)).collect();
            let expected = q.group.closure(&gens).unwrap();
            assert_eq!(action.basepoint_stabilizer(n), expected);
        }
    }

    #[test]
    fn orbit_stabilizer_accounting() {
        // Thread count × top-level stabilizer size = |Q|.
        let cfg = PunctureConfig::canonical_accumulating(5);
        let q = z2_quotient(5);
        let (sys, action) = quotient_levels(&cfg, &q, 5).unwrap();
        let threads = crate::fiber::enumerate_threads(&sys, 4096).unwrap();
        assert!(threads.exhaustive);
        let stab = action.basepoint_stabilizer(5);
        assert_eq!(threads.threads.len() * stab.len(), 32);
    }

    #[test]
    fn galois_verdicts_match_the_dichotomy() {
        let caps = CapSettings::default();
        // Finite configuration, universal cover: stationary, Galoisian.
        let cfg = PunctureConfig::new(
            2,
            false,
            vec![GeneratorSet::new([1, 2]), GeneratorSet::new([1])],
        )
        .unwrap();
        let report = is_galoisian(&cfg, &CoverSpec::Universal, 6, &caps).unwrap();
        assert_eq!(report.verdict, FiberVerdict::StationaryDiscrete);
        assert_eq!(report.galois_verdict, GaloisVerdict::GaloisianEvidence);
        assert!(report.orbit_counts.is_none());

        // Canonical accumulating, universal: overflowing fibers.
        let cfg = PunctureConfig::canonical_accumulating(4);
        let report = is_galoisian(&cfg, &CoverSpec::Universal, 4, &caps).unwrap();
        assert_eq!(report.verdict, FiberVerdict::NonLocallyCompact);
        assert_eq!(report.galois_verdict, GaloisVerdict::NotGaloisianEvidence);

        // Canonical accumulating with the mod-2 quotient: Cantor-like, and
        // the single deck orbit cannot cover the threads.
        let report = is_galoisian(
            &cfg,
            &CoverSpec::Quotient(z2_quotient(4)),
            4,
            &caps,
        )
        .unwrap();
        assert_eq!(report.verdict, FiberVerdict::CantorLike);
        assert_eq!(report.galois_verdict, GaloisVerdict::NotGaloisianEvidence);
        assert_eq!(report.orbit_counts, Some(vec![1; 4]));
    }

    #[test]
    fn lift_is_constant_on_deep_subgroup_multiplication() {
        let cfg = PunctureConfig::canonical_accumulating(5);
        for spec in [
            CoverSpec::Universal,
            CoverSpec::Quotient(z2_quotient(5)),
        ] {
            let system = CoverSystem::build(&cfg, &spec, 4, 4).unwrap();
            let w = Word::reduce(&[5, 2]);
            let base = system.lift_endpoint(&w).unwrap();
            // Letters in disc_schedule(4) = {4, 5}: right multiplication
            // stays in every level's subgroup.
            for h in [Word::gen(4), Word::gen(5), Word::reduce(&[5, -4])] {
                assert_eq!(system.lift_endpoint(&w.multiply(&h)).unwrap(), base);
            }
            // The identity lifts to the basepoint thread.
            let id = system.lift_endpoint(&Word::identity()).unwrap();
            for label in &id.0 {
                match label {
                    Label::Word(w) => assert!(w.is_identity()),
                    Label::Group(g) => assert_eq!(*g, 0),
                }
            }
        }
    }

    #[test]
    fn lift_rejects_out_of_range_generators() {
        let cfg = PunctureConfig::canonical_accumulating(3);
        let err = lift_endpoint(&Word::gen(7), &cfg, &CoverSpec::Universal, 2).unwrap_err();
        assert_eq!(err, CoverError::GeneratorOutOfRange { index: 7, count: 3 });
    }

    #[test]
    fn config_json_round_trip_and_diagnostics() {
        let (cfg, spec) = parse_config(
            r#"{"punctures": 3, "accumulating": true,
                "disc_schedule": [[1,2,3],[2,3],[3]],
                "quotient": {"type": "Z2^m", "m": 3}}"#,
        )
        .unwrap();
        assert_eq!(cfg, PunctureConfig::canonical_accumulating(3));
        match spec {
            CoverSpec::Quotient(q) => assert_eq!(q.group.order(), 8),
            CoverSpec::Universal => panic!("expected a quotient"),
        }

        let (_, spec) = parse_config(
            r#"{"punctures": 1, "accumulating": false,
                "disc_schedule": [[1]],
                "quotient": {"type": "table", "mul": [[0,1],[1,0]], "images": [1]}}"#,
        )
        .unwrap();
        assert!(matches!(spec, CoverSpec::Quotient(_)));

        assert!(matches!(
            parse_config("{"),
            Err(ConfigError::Json(_))
        ));
        // Unknown fields are rejected, with serde naming the field.
        let err = parse_config(r#"{"punctures": 1, "accumulating": false, "disc_schedule": [[1]], "quotient": null, "extra": 1}"#)
            .unwrap_err();
        assert!(err.to_string().contains("extra"));
        // Schedule violations carry the field name.
        let err = parse_config(
            r#"{"punctures": 2, "accumulating": false, "disc_schedule": [[1],[2]], "quotient": null}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("disc_schedule"));
        // Non-generating images are group errors under the quotient field.
        let err = parse_config(
            r#"{"punctures": 2, "accumulating": false, "disc_schedule": [[1,2]],
                "quotient": {"type": "Z2^m", "m": 2, "images": [1, 1]}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("quotient.images"));
    }
}
