use alloc::vec;
use alloc::vec::Vec;

use super::records::{BuRecord, Label, RecordId, StateMap};
use super::{CheckError, Engine, NodeId};
use crate::semantics::{canonical_key, ModelSemantics, StateKey, StateValuation};

const PHASE: &str = "bounded-until expansion";

impl<M: ModelSemantics> Engine<'_, M> {
    pub(super) fn bounded_until(
        &mut self,
        s: &StateValuation,
        key: StateKey,
        phi1: NodeId,
        k: u32,
        phi2: NodeId,
    ) -> Result<f64, CheckError> {
        let label = self.label(s, &key, phi1, phi2)?;
        match label {
            Label::Yes => return Ok(1.0),
            Label::No => return Ok(0.0),
            Label::Unknown => {}
        }
        let mut map: StateMap<BuRecord> = StateMap::new();
        self.admit_record(0, PHASE)?;
        let root = map.insert(key, BuRecord::new(s.clone(), label));

        // expansion: k levels, breadth-first, only UNKNOWN records grow
        let mut s_yes: Vec<RecordId> = Vec::new();
        let mut frontier = vec![root];
        for _ in 0..k {
            let mut next_level = Vec::new();
            for r in frontier {
                let term = map[r].term.clone();
                for t in self.successors(&term)? {
                    let tkey = canonical_key(&t.target);
                    let id = match map.lookup(&tkey) {
                        Some(id) => id,
                        None => {
                            self.admit_record(map.len(), PHASE)?;
                            let label = self.label(&t.target, &tkey, phi1, phi2)?;
                            let id = map.insert(tkey, BuRecord::new(t.target, label));
                            match label {
                                Label::Yes => s_yes.push(id),
                                Label::Unknown => next_level.push(id),
                                Label::No => {}
                            }
                            id
                        }
                    };
                    map.records_mut()[id].prec.push((r, t.prob));
                }
            }
            if next_level.is_empty() {
                break;
            }
            frontier = next_level;
        }
        if s_yes.is_empty() {
            return Ok(0.0);
        }

        // computation: step i turns horizon i-1 values into horizon i values
        let records = map.records_mut();
        let mut active = s_yes;
        let mut in_active = vec![false; records.len()];
        for &r in &active {
            in_active[r] = true;
        }
        for i in 1..=k as usize {
            let (cur, prev) = (i % 2, (i - 1) % 2);
            for &r in &active {
                if records[r].label == Label::Unknown {
                    records[r].p[cur] = 0.0;
                }
            }
            for &r in &active {
                let v = records[r].p[prev];
                if v == 0.0 {
                    continue;
                }
                for j in 0..records[r].prec.len() {
                    let (q, p) = records[r].prec[j];
                    if records[q].label == Label::Unknown {
                        records[q].p[cur] += p * v;
                    }
                }
            }
            let len = active.len();
            for idx in 0..len {
                for j in 0..records[active[idx]].prec.len() {
                    let q = records[active[idx]].prec[j].0;
                    if !in_active[q] {
                        in_active[q] = true;
                        active.push(q);
                    }
                }
            }
            self.stats.iterations += 1;
        }
        Ok(records[root].p[k as usize % 2].min(1.0))
    }
}
