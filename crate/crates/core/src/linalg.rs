//! Incremental exact row reduction over ℚ with sparse rows.
//!
//! Rows are fed one at a time. The pivot set is kept in fully reduced
//! row-echelon form, so a column is determined exactly when its pivot row
//! has no other entries.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use crate::scalar::Rational;

/// One linear equation `Σ entries[c]·x_c = rhs`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparseRow {
    pub entries: BTreeMap<usize, Rational>,
    pub rhs: Rational,
}

impl SparseRow {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, col: usize, coef: &Rational) {
        if coef.is_zero() {
            return;
        }
        let e = self.entries.entry(col).or_insert_with(Rational::zero);
        *e += coef;
        if e.is_zero() {
            self.entries.remove(&col);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RowOutcome {
    /// The row introduced a new pivot in this column.
    Pivot(usize),
    /// The row reduced to `0 = 0`.
    Redundant,
    /// The row reduced to `0 = c` with `c ≠ 0`.
    Inconsistent(Rational),
}

#[derive(Clone, Debug, Default)]
pub struct Rref {
    pivots: BTreeMap<usize, SparseRow>,
    // non-pivot column -> pivot columns whose row mentions it
    occurs: BTreeMap<usize, BTreeSet<usize>>,
}

impl Rref {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_pivot(&self, col: usize) -> bool {
        self.pivots.contains_key(&col)
    }

    /// Value of `x_col` if the rows seen so far force it.
    pub fn value(&self, col: usize) -> Option<Rational> {
        let row = self.pivots.get(&col)?;
        if row.entries.len() == 1 {
            Some(row.rhs.clone())
        } else {
            None
        }
    }

    fn reduce(&self, mut row: SparseRow) -> SparseRow {
        let hits: Vec<usize> = row
            .entries
            .keys()
            .filter(|c| self.pivots.contains_key(c))
            .copied()
            .collect();
        for c in hits {
            let f = match row.entries.get(&c) {
                Some(f) => f.clone(),
                None => continue,
            };
            let p = &self.pivots[&c];
            for (k, v) in &p.entries {
                row.add(*k, &(-(&f * v)));
            }
            row.rhs -= &f * &p.rhs;
        }
        row
    }

    pub fn push(&mut self, row: SparseRow) -> RowOutcome {
        let mut row = self.reduce(row);
        if row.is_empty() {
            return if row.rhs.is_zero() {
                RowOutcome::Redundant
            } else {
                RowOutcome::Inconsistent(row.rhs)
            };
        }
        let col = *row
            .entries
            .keys()
            .min_by_key(|c| (self.occurs.get(c).map_or(0, |s| s.len()), **c))
            .expect("nonempty row");
        let inv = row.entries[&col].recip();
        if !inv.is_one() {
            for v in row.entries.values_mut() {
                *v *= &inv;
            }
            row.rhs *= &inv;
        }
        let users = self.occurs.remove(&col).unwrap_or_default();
        for pc in users {
            let prow = self.pivots.get_mut(&pc).expect("pivot row");
            let f = match prow.entries.remove(&col) {
                Some(f) => f,
                None => continue,
            };
            for (k, v) in &row.entries {
                if *k == col {
                    continue;
                }
                let before = prow.entries.contains_key(k);
                prow.add(*k, &(-(&f * v)));
                let after = prow.entries.contains_key(k);
                if before && !after {
                    if let Some(s) = self.occurs.get_mut(k) {
                        s.remove(&pc);
                    }
                } else if !before && after {
                    self.occurs.entry(*k).or_default().insert(pc);
                }
            }
            prow.rhs -= &f * &row.rhs;
        }
        for k in row.entries.keys() {
            if *k != col {
                self.occurs.entry(*k).or_default().insert(col);
            }
        }
        self.pivots.insert(col, row);
        RowOutcome::Pivot(col)
    }
}
