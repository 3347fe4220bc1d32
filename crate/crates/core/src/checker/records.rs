use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::semantics::{StateKey, StateValuation};

/// Index of a record inside a [`StateMap`].
pub type RecordId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    Yes,
    No,
    Unknown,
}

/// Record used by bounded until. `p` holds two rotating horizon slots.
#[derive(Clone, Debug, PartialEq)]
pub struct BuRecord {
    pub term: StateValuation,
    /// `(predecessor, probability of the step predecessor -> this)`
    pub prec: Vec<(RecordId, f64)>,
    pub p: [f64; 2],
    pub label: Label,
}

impl BuRecord {
    pub(crate) fn new(term: StateValuation, label: Label) -> Self {
        let v = if label == Label::Yes { 1.0 } else { 0.0 };
        BuRecord {
            term,
            prec: Vec::new(),
            p: [v; 2],
            label,
        }
    }
}

/// Record used by unbounded until.
#[derive(Clone, Debug, PartialEq)]
pub struct UuRecord {
    pub term: StateValuation,
    pub prec: Vec<(RecordId, f64)>,
    pub p_yes: [f64; 2],
    pub p_no: [f64; 2],
    pub label: Label,
}

impl UuRecord {
    pub(crate) fn new(term: StateValuation, label: Label) -> Self {
        let mut r = UuRecord {
            term,
            prec: Vec::new(),
            p_yes: [0.0; 2],
            p_no: [0.0; 2],
            label: Label::Unknown,
        };
        r.relabel(label);
        r
    }

    pub(crate) fn relabel(&mut self, label: Label) {
        self.label = label;
        let (y, n) = match label {
            Label::Yes => (1.0, 0.0),
            Label::No => (0.0, 1.0),
            Label::Unknown => (0.0, 0.0),
        };
        self.p_yes = [y; 2];
        self.p_no = [n; 2];
    }
}

pub trait HasPrec {
    fn prec(&self) -> &[(RecordId, f64)];
}

impl HasPrec for BuRecord {
    fn prec(&self) -> &[(RecordId, f64)] {
        &self.prec
    }
}

impl HasPrec for UuRecord {
    fn prec(&self) -> &[(RecordId, f64)] {
        &self.prec
    }
}

/// At most one record per state, addressed by canonical key.
#[derive(Clone, Debug)]
pub struct StateMap<R> {
    index: HashMap<StateKey, RecordId>,
    records: Vec<R>,
}

impl<R> Default for StateMap<R> {
    fn default() -> Self {
        StateMap {
            index: HashMap::new(),
            records: Vec::new(),
        }
    }
}

impl<R> StateMap<R> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn lookup(&self, key: &StateKey) -> Option<RecordId> {
        self.index.get(key).copied()
    }

    /// Inserts a record for a state that has none yet.
    pub fn insert(&mut self, key: StateKey, record: R) -> RecordId {
        let id = self.records.len();
        let prev = self.index.insert(key, id);
        assert!(prev.is_none(), "state already has a record");
        self.records.push(record);
        id
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[R] {
        &self.records
    }

    pub(crate) fn records_mut(&mut self) -> &mut [R] {
        &mut self.records
    }

    pub fn get(&self, key: &StateKey) -> Option<&R> {
        self.lookup(key).map(|id| &self.records[id])
    }
}

impl<R> core::ops::Index<RecordId> for StateMap<R> {
    type Output = R;

    fn index(&self, id: RecordId) -> &R {
        &self.records[id]
    }
}

/// Membership mask of every record from which some seed is reachable
/// (reflexive, transitive, walking `prec` edges breadth-first).
pub(crate) fn closure_mask<R: HasPrec>(map: &StateMap<R>, seeds: &[RecordId]) -> Vec<bool> {
    let mut seen = vec![false; map.len()];
    let mut queue = VecDeque::new();
    for &s in seeds {
        if !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(r) = queue.pop_front() {
        for &(q, _) in map.records[r].prec() {
            if !seen[q] {
                seen[q] = true;
                queue.push_back(q);
            }
        }
    }
    seen
}

/// All records that can reach a seed, in ascending id order.
pub fn backward_closure<R: HasPrec>(
    map: &StateMap<R>,
    seeds: impl IntoIterator<Item = RecordId>,
) -> Vec<RecordId> {
    let seeds: Vec<RecordId> = seeds.into_iter().collect();
    closure_mask(map, &seeds)
        .into_iter()
        .enumerate()
        .filter_map(|(i, m)| m.then_some(i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::{canonical_key, Value};

    fn chain(n: usize) -> StateMap<BuRecord> {
        // record i+1 has predecessor i
        let mut m = StateMap::new();
        for i in 0..n {
            let s = StateValuation::from_entries([("x", Value::Int(i as i64))]).unwrap();
            let mut r = BuRecord::new(s.clone(), Label::Unknown);
            if i > 0 {
                r.prec.push((i - 1, 1.0));
            }
            m.insert(canonical_key(&s), r);
        }
        m
    }

    #[test]
    fn closure_cases() {
        let m = chain(3);
        assert!(backward_closure(&m, []).is_empty());
        assert_eq!(backward_closure(&m, [0]), [0]);
        assert_eq!(backward_closure(&m, [2]), [0, 1, 2]);
        assert_eq!(backward_closure(&m, [1]), [0, 1]);
    }

    #[test]
    fn uu_record_initial_values() {
        let s = StateValuation::from_entries([("x", Value::Int(0))]).unwrap();
        let y = UuRecord::new(s.clone(), Label::Yes);
        assert_eq!((y.p_yes, y.p_no), ([1.0; 2], [0.0; 2]));
        let n = UuRecord::new(s.clone(), Label::No);
        assert_eq!((n.p_yes, n.p_no), ([0.0; 2], [1.0; 2]));
        let u = UuRecord::new(s, Label::Unknown);
        assert_eq!((u.p_yes, u.p_no), ([0.0; 2], [0.0; 2]));
    }
}
