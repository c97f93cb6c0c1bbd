//! Conditional probability tables.
//!
//! A [`Cpd`] is logically dense: one probability row per joint assignment of
//! its parents, in lexicographic order with the first parent most significant.
//! Physically, identical rows are stored once and each parent assignment holds
//! an index into the distinct rows. Deterministic functions of large parents
//! (bit strings, guess pairs) then cost one small integer per assignment.

use std::collections::HashMap;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::graph::NodeId;

/// Normalization tolerance for float rows.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// One probability vector over a node's domain.
///
/// Rows compare by their float entries, and additionally by their exact
/// entries when both sides carry them.
#[derive(Clone, Debug)]
pub struct ProbRow {
    probs: Vec<f64>,
    exact: Option<Vec<BigRational>>,
}

impl ProbRow {
    pub fn new(probs: Vec<f64>) -> Self {
        ProbRow { probs, exact: None }
    }

    /// Exact row; the float view is derived from it.
    pub fn exact(exact: Vec<BigRational>) -> Self {
        let probs = exact.iter().map(|r| r.to_f64().unwrap_or(f64::NAN)).collect();
        ProbRow { probs, exact: Some(exact) }
    }

    /// Point mass on `index` within a domain of `len` values.
    pub fn point_mass(len: usize, index: usize) -> Self {
        let mut probs = vec![0.0; len];
        probs[index] = 1.0;
        let mut exact = vec![BigRational::zero(); len];
        exact[index] = BigRational::one();
        ProbRow { probs, exact: Some(exact) }
    }

    pub fn uniform(len: usize) -> Self {
        let n = BigRational::from_integer(len.into());
        let each = BigRational::one() / n;
        ProbRow::exact(vec![each; len])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn exact_probs(&self) -> Option<&[BigRational]> {
        self.exact.as_deref()
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Index of the single value with probability one, if the row is a point mass.
    pub fn point_mass_index(&self) -> Option<usize> {
        let mut hit = None;
        for (i, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            if (p - 1.0).abs() <= NORMALIZATION_TOL && hit.is_none() {
                hit = Some(i);
            } else {
                return None;
            }
        }
        hit
    }

    pub fn support_size(&self) -> usize {
        self.probs.iter().filter(|&&p| p > 0.0).count()
    }

    /// Checks non-negativity and normalization; returns a description of the first problem.
    pub fn check(&self, require_exact: bool) -> Option<String> {
        if let Some(p) = self.probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Some(format!("probability {p} is negative or not finite"));
        }
        let sum: f64 = self.probs.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Some(format!("probabilities sum to {sum}, not 1"));
        }
        match &self.exact {
            Some(exact) => {
                if exact.iter().any(|r| *r < BigRational::zero()) {
                    return Some("exact probability is negative".into());
                }
                let total: BigRational = exact.iter().sum();
                if !total.is_one() {
                    return Some(format!("exact probabilities sum to {total}, not 1"));
                }
            }
            None if require_exact => return Some("row has no exact probabilities".into()),
            None => {}
        }
        None
    }

    fn key(&self) -> RowKey {
        RowKey {
            bits: self.probs.iter().map(|p| p.to_bits()).collect(),
            exact: self.exact.clone(),
        }
    }
}

impl PartialEq for ProbRow {
    fn eq(&self, other: &Self) -> bool {
        self.probs == other.probs
            && match (&self.exact, &other.exact) {
                (Some(a), Some(b)) => a == b,
                _ => true,
            }
    }
}

#[derive(Hash, PartialEq, Eq)]
struct RowKey {
    bits: Vec<u64>,
    exact: Option<Vec<BigRational>>,
}

/// Per-assignment index into the distinct rows, narrowest width that fits.
#[derive(Clone, Debug, PartialEq)]
enum RowIndex {
    U8(Vec<u8>),
    U16(Vec<u16>),
    U32(Vec<u32>),
}

impl RowIndex {
    /// `max_id` is the largest id to be stored; the maximum of the width is
    /// reserved for "missing".
    fn with_capacity(n: usize, max_id: usize) -> Self {
        if max_id < u8::MAX as usize {
            RowIndex::U8(Vec::with_capacity(n))
        } else if max_id < u16::MAX as usize {
            RowIndex::U16(Vec::with_capacity(n))
        } else {
            RowIndex::U32(Vec::with_capacity(n))
        }
    }

    fn push(&mut self, id: Option<usize>) {
        match self {
            RowIndex::U8(v) => v.push(id.map_or(u8::MAX, |i| i as u8)),
            RowIndex::U16(v) => v.push(id.map_or(u16::MAX, |i| i as u16)),
            RowIndex::U32(v) => v.push(id.map_or(u32::MAX, |i| i as u32)),
        }
    }

    fn get(&self, i: usize) -> Option<usize> {
        match self {
            RowIndex::U8(v) => v.get(i).filter(|&&x| x != u8::MAX).map(|&x| x as usize),
            RowIndex::U16(v) => v.get(i).filter(|&&x| x != u16::MAX).map(|&x| x as usize),
            RowIndex::U32(v) => v.get(i).filter(|&&x| x != u32::MAX).map(|&x| x as usize),
        }
    }

    fn len(&self) -> usize {
        match self {
            RowIndex::U8(v) => v.len(),
            RowIndex::U16(v) => v.len(),
            RowIndex::U32(v) => v.len(),
        }
    }
}

#[derive(Debug, PartialEq)]
struct Table {
    distinct: Vec<ProbRow>,
    row_of: RowIndex,
}

/// Conditional probability table of one node given its ordered parents.
#[derive(Clone, Debug)]
pub struct Cpd {
    parents: Vec<NodeId>,
    table: Arc<Table>,
}

impl PartialEq for Cpd {
    fn eq(&self, other: &Self) -> bool {
        if self.parents != other.parents || self.num_rows() != other.num_rows() {
            return false;
        }
        if Arc::ptr_eq(&self.table, &other.table) {
            return true;
        }
        (0..self.num_rows()).all(|i| self.row(i) == other.row(i))
    }
}

struct Dedup {
    distinct: Vec<ProbRow>,
    seen: HashMap<RowKey, usize>,
}

impl Dedup {
    fn new() -> Self {
        Dedup { distinct: Vec::new(), seen: HashMap::new() }
    }

    fn intern(&mut self, row: ProbRow) -> usize {
        let key = row.key();
        if let Some(&id) = self.seen.get(&key) {
            return id;
        }
        let id = self.distinct.len();
        self.distinct.push(row);
        self.seen.insert(key, id);
        id
    }
}

impl Cpd {
    /// Builds a table from rows listed in canonical parent-assignment order.
    /// The caller is responsible for supplying one row per assignment;
    /// validation reports a short table as incomplete.
    pub fn from_rows(parents: Vec<NodeId>, rows: Vec<ProbRow>) -> Self {
        Cpd::from_optional_rows(parents, rows.into_iter().map(Some).collect())
    }

    /// Like [`Cpd::from_rows`] but individual assignments may be missing.
    pub fn from_optional_rows(parents: Vec<NodeId>, rows: Vec<Option<ProbRow>>) -> Self {
        let mut dedup = Dedup::new();
        let ids: Vec<Option<usize>> = rows.into_iter().map(|r| r.map(|r| dedup.intern(r))).collect();
        let mut row_of = RowIndex::with_capacity(ids.len(), dedup.distinct.len());
        for id in ids {
            row_of.push(id);
        }
        Cpd { parents, table: Arc::new(Table { distinct: dedup.distinct, row_of }) }
    }

    /// Same row for every parent assignment.
    pub fn constant(parents: Vec<NodeId>, parent_sizes: &[usize], row: ProbRow) -> Self {
        Cpd::from_row_ids(parents, parent_sizes, vec![row], |_| 0)
    }

    /// Builds a table from a closure over parent value indices.
    pub fn from_fn(
        parents: Vec<NodeId>,
        parent_sizes: &[usize],
        mut f: impl FnMut(&[usize]) -> ProbRow,
    ) -> Self {
        let mut rows = Vec::new();
        for_each_assignment(parent_sizes, |a| rows.push(f(a)));
        Cpd::from_rows(parents, rows)
    }

    /// Builds a table from a fixed set of distinct rows and a closure choosing
    /// one of them per parent assignment. Suited to very large parent spaces.
    pub fn from_row_ids(
        parents: Vec<NodeId>,
        parent_sizes: &[usize],
        distinct: Vec<ProbRow>,
        mut choose: impl FnMut(&[usize]) -> usize,
    ) -> Self {
        let n: usize = parent_sizes.iter().product();
        let mut row_of = RowIndex::with_capacity(n, distinct.len());
        for_each_assignment(parent_sizes, |a| {
            let id = choose(a);
            debug_assert!(id < distinct.len());
            row_of.push(Some(id));
        });
        Cpd { parents, table: Arc::new(Table { distinct, row_of }) }
    }

    pub fn parents(&self) -> &[NodeId] {
        &self.parents
    }

    /// Number of parent assignments the table lists (including missing ones).
    pub fn num_rows(&self) -> usize {
        self.table.row_of.len()
    }

    pub fn row(&self, i: usize) -> Option<&ProbRow> {
        self.table.row_of.get(i).map(|id| &self.table.distinct[id])
    }

    pub fn row_id(&self, i: usize) -> Option<usize> {
        self.table.row_of.get(i)
    }

    pub fn distinct_rows(&self) -> &[ProbRow] {
        &self.table.distinct
    }

    pub fn missing_rows(&self) -> usize {
        (0..self.num_rows()).filter(|&i| self.table.row_of.get(i).is_none()).count()
    }

    /// Whether every listed row is a point mass.
    pub fn is_deterministic(&self) -> bool {
        self.table.distinct.iter().all(|r| r.point_mass_index().is_some())
    }

    /// Largest number of non-zero entries in any row.
    pub fn max_support(&self) -> usize {
        self.table.distinct.iter().map(ProbRow::support_size).max().unwrap_or(0)
    }
}

/// Calls `f` with every joint index assignment over `sizes`, first position
/// most significant.
pub fn for_each_assignment(sizes: &[usize], mut f: impl FnMut(&[usize])) {
    if sizes.contains(&0) {
        return;
    }
    let mut idx = vec![0usize; sizes.len()];
    loop {
        f(&idx);
        let mut k = sizes.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < sizes[k] {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Row index of an assignment in canonical order.
pub fn assignment_index(sizes: &[usize], assignment: &[usize]) -> usize {
    sizes.iter().zip(assignment).fold(0, |acc, (&s, &a)| acc * s + a)
}
