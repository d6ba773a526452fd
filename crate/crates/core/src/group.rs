//! Finite deck groups: elementary abelian 2-groups and arbitrary finite
//! groups given by multiplication tables, together with coset tables used
//! to build the levels of a quotient covering.

use std::collections::HashMap;

use crate::word::Word;

/// Largest group order accepted, keeping closure and coset computations at
/// desk scale.
pub const MAX_ORDER: u32 = 1 << 16;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GroupError {
    #[error("group order {order} exceeds the supported maximum {MAX_ORDER}")]
    OrderTooLarge { order: u64 },
    #[error("multiplication table is empty")]
    EmptyTable,
    #[error("multiplication table row {row} has {len} entries, expected {order}")]
    RaggedTable { row: usize, len: usize, order: usize },
    #[error("table entry at ({row}, {col}) is {value}, outside 0..{order}")]
    EntryOutOfRange {
        row: usize,
        col: usize,
        value: u32,
        order: usize,
    },
    #[error("row or column {row} of the table repeats a value; rows and columns must be permutations")]
    NotLatin { row: usize },
    #[error("no two-sided identity element in the table")]
    NoIdentity,
    #[error("table is not associative: ({a}·{b})·{c} ≠ {a}·({b}·{c})")]
    NotAssociative { a: u32, b: u32, c: u32 },
    #[error("element {value} is outside the group of order {order}")]
    ElementOutOfRange { value: u32, order: u32 },
    #[error("no image assigned to generator g{index}")]
    ImageUndefined { index: u32 },
    #[error("generator images span only {spanned} of {order} group elements; images must generate")]
    ImagesDoNotGenerate { spanned: u32, order: u32 },
}

/// A finite group with elements `0..order`.
#[derive(Debug, Clone, PartialEq)]
pub enum FiniteGroup {
    /// `(Z/2)^m` under XOR of bitmasks; identity 0, every element its own
    /// inverse.
    Z2m { m: u32 },
    /// An arbitrary finite group given by its multiplication table.
    Table(GroupTable),
}

/// A validated multiplication table: rows and columns are permutations,
/// there is a two-sided identity, and the operation is associative (checked
/// exhaustively), so inverses exist and are recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupTable {
    mul: Vec<Vec<u32>>,
    inv: Vec<u32>,
    identity: u32,
}

impl FiniteGroup {
    pub fn z2m(m: u32) -> Result<Self, GroupError> {
        let order = 1u64 << m.min(63);
        if m > 63 || order > MAX_ORDER as u64 {
            return Err(GroupError::OrderTooLarge { order });
        }
        Ok(FiniteGroup::Z2m { m })
    }

    /// Validates a raw multiplication table and derives identity and
    /// inverses.
    pub fn from_table(mul: Vec<Vec<u32>>) -> Result<Self, GroupError> {
        let order = mul.len();
        if order == 0 {
            return Err(GroupError::EmptyTable);
        }
        if order as u64 > MAX_ORDER as u64 {
            return Err(GroupError::OrderTooLarge { order: order as u64 });
        }
        for (row, entries) in mul.iter().enumerate() {
            if entries.len() != order {
                return Err(GroupError::RaggedTable {
                    row,
                    len: entries.len(),
                    order,
                });
            }
            for (col, &value) in entries.iter().enumerate() {
                if value as usize >= order {
                    return Err(GroupError::EntryOutOfRange {
                        row,
                        col,
                        value,
                        order,
                    });
                }
            }
        }
        // Latin square: each row and column is a permutation.
        for (i, row) in mul.iter().enumerate() {
            let mut seen = vec![false; order];
            for &v in row {
                if seen[v as usize] {
                    return Err(GroupError::NotLatin { row: i });
                }
                seen[v as usize] = true;
            }
        }
        for i in 0..order {
            let mut seen = vec![false; order];
            for row in &mul {
                let v = row[i] as usize;
                if seen[v] {
                    return Err(GroupError::NotLatin { row: i });
                }
                seen[v] = true;
            }
        }
        let identity = (0..order as u32)
            .find(|&e| {
                (0..order as u32).all(|a| {
                    mul[e as usize][a as usize] == a && mul[a as usize][e as usize] == a
                })
            })
            .ok_or(GroupError::NoIdentity)?;
        for a in 0..order as u32 {
            for b in 0..order as u32 {
                for c in 0..order as u32 {
                    let left = mul[mul[a as usize][b as usize] as usize][c as usize];
                    let right = mul[a as usize][mul[b as usize][c as usize] as usize];
                    if left != right {
                        return Err(GroupError::NotAssociative { a, b, c });
                    }
                }
            }
        }
        let inv = (0..order as u32)
            .map(|a| {
                (0..order as u32)
                    .find(|&b| mul[a as usize][b as usize] == identity)
                    .expect("Latin square rows contain the identity")
            })
            .collect();
        Ok(FiniteGroup::Table(GroupTable { mul, inv, identity }))
    }

    pub fn order(&self) -> u32 {
        match self {
            FiniteGroup::Z2m { m } => 1 << m,
            FiniteGroup::Table(t) => t.mul.len() as u32,
        }
    }

    pub fn identity(&self) -> u32 {
        match self {
            FiniteGroup::Z2m { .. } => 0,
            FiniteGroup::Table(t) => t.identity,
        }
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        match self {
            FiniteGroup::Z2m { .. } => a ^ b,
            FiniteGroup::Table(t) => t.mul[a as usize][b as usize],
        }
    }

    pub fn inv(&self, a: u32) -> u32 {
        match self {
            FiniteGroup::Z2m { .. } => a,
            FiniteGroup::Table(t) => t.inv[a as usize],
        }
    }

    pub fn contains(&self, a: u32) -> bool {
        a < self.order()
    }

    fn check_element(&self, a: u32) -> Result<(), GroupError> {
        if self.contains(a) {
            Ok(())
        } else {
            Err(GroupError::ElementOutOfRange {
                value: a,
                order: self.order(),
            })
        }
    }

    /// Elements of the subgroup generated by `gens`, sorted ascending.
    /// Breadth-first closure under multiplication by generators and their
    /// inverses.
    pub fn closure(&self, gens: &[u32]) -> Result<Vec<u32>, GroupError> {
        for &g in gens {
            self.check_element(g)?;
        }
        let mut member = vec![false; self.order() as usize];
        member[self.identity() as usize] = true;
        let mut frontier = vec![self.identity()];
        while let Some(a) = frontier.pop() {
            for &g in gens {
                for b in [self.mul(a, g), self.mul(a, self.inv(g))] {
                    if !member[b as usize] {
                        member[b as usize] = true;
                        frontier.push(b);
                    }
                }
            }
        }
        Ok((0..self.order()).filter(|&a| member[a as usize]).collect())
    }

    /// Right cosets `a·K` of the subgroup `K = ⟨gens⟩`.
    pub fn coset_table(&self, gens: &[u32]) -> Result<CosetTable, GroupError> {
        let subgroup = self.closure(gens)?;
        let order = self.order() as usize;
        let mut canon: Vec<u32> = vec![u32::MAX; order];
        for a in 0..order as u32 {
            if canon[a as usize] != u32::MAX {
                continue;
            }
            // Minimal element of a·K labels the whole coset.
            let coset: Vec<u32> = subgroup.iter().map(|&k| self.mul(a, k)).collect();
            let rep = *coset.iter().min().expect("subgroup contains the identity");
            for b in coset {
                canon[b as usize] = rep;
            }
        }
        let basepoint_rep = canon[self.identity() as usize];
        let mut reps: Vec<u32> = canon.iter().copied().collect::<std::collections::BTreeSet<_>>().into_iter().collect();
        reps.retain(|&r| r != basepoint_rep);
        reps.insert(0, basepoint_rep);
        let rep_index = reps.iter().enumerate().map(|(i, &r)| (r, i)).collect();
        Ok(CosetTable {
            subgroup,
            canon,
            reps,
            rep_index,
        })
    }
}

/// The right cosets of one subgroup: canonical labels (minimal coset
/// element), with the identity coset listed first.
#[derive(Debug, Clone)]
pub struct CosetTable {
    /// Sorted elements of the subgroup `K`.
    pub subgroup: Vec<u32>,
    /// `canon[a]` is the canonical label of `a·K`.
    pub canon: Vec<u32>,
    /// Distinct labels, identity coset first and the rest ascending.
    pub reps: Vec<u32>,
    rep_index: HashMap<u32, usize>,
}

impl CosetTable {
    pub fn coset_count(&self) -> usize {
        self.reps.len()
    }

    /// Position of `a`'s coset in the `reps` enumeration.
    pub fn coset_index(&self, a: u32) -> usize {
        self.rep_index[&self.canon[a as usize]]
    }

    pub fn contains_in_subgroup(&self, a: u32) -> bool {
        self.subgroup.binary_search(&a).is_ok()
    }
}

/// A surjection from the free group on `g1..gN` onto a finite group,
/// determined by the images of the generators.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientSpec {
    pub group: FiniteGroup,
    images: Vec<u32>,
}

impl QuotientSpec {
    /// Validates that every image lies in the group and that the images
    /// generate it (a covering's deck group acts through a quotient that
    /// the meridians generate).
    pub fn new(group: FiniteGroup, images: Vec<u32>) -> Result<Self, GroupError> {
        for &im in &images {
            if !group.contains(im) {
                return Err(GroupError::ElementOutOfRange {
                    value: im,
                    order: group.order(),
                });
            }
        }
        let spanned = group.closure(&images)?.len() as u32;
        if spanned != group.order() {
            return Err(GroupError::ImagesDoNotGenerate {
                spanned,
                order: group.order(),
            });
        }
        Ok(QuotientSpec { group, images })
    }

    /// The mod-2 abelianization onto `(Z/2)^n`: generator `g_k` maps to the
    /// k-th basis vector.
    pub fn mod_two_abelianized(n: u32) -> Result<Self, GroupError> {
        let group = FiniteGroup::z2m(n)?;
        let images = (0..n).map(|k| 1u32 << k).collect();
        QuotientSpec::new(group, images)
    }

    pub fn generator_count(&self) -> u32 {
        self.images.len() as u32
    }

    /// Image of the generator `g_index` (1-based).
    pub fn image(&self, index: u32) -> Result<u32, GroupError> {
        self.images
            .get(index.checked_sub(1).ok_or(GroupError::ImageUndefined { index })? as usize)
            .copied()
            .ok_or(GroupError::ImageUndefined { index })
    }

    /// Image of a reduced word under the quotient map.
    pub fn apply(&self, w: &Word) -> Result<u32, GroupError> {
        let mut acc = self.group.identity();
        for &letter in w.letters() {
            let im = self.image(letter.unsigned_abs())?;
            let factor = if letter > 0 { im } else { self.group.inv(im) };
            acc = self.group.mul(acc, factor);
        }
        Ok(acc)
    }
}
