use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use super::records::{closure_mask, Label, RecordId, StateMap, UuRecord};
use super::{CheckError, ConvergenceScope, Engine, IterationSnapshot, NodeId};
use crate::semantics::{canonical_key, ModelSemantics, StateKey, StateValuation};

const PHASE: &str = "unbounded-until expansion";

impl<M: ModelSemantics> Engine<'_, M> {
    pub(super) fn unbounded_until(
        &mut self,
        s: &StateValuation,
        key: StateKey,
        phi1: NodeId,
        phi2: NodeId,
    ) -> Result<f64, CheckError> {
        let epsilon = self.config.epsilon;
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(CheckError::InvalidEpsilon(epsilon));
        }
        let label = self.label(s, &key, phi1, phi2)?;
        match label {
            Label::Yes => return Ok(1.0),
            Label::No => return Ok(0.0),
            Label::Unknown => {}
        }
        let mut map: StateMap<UuRecord> = StateMap::new();
        self.admit_record(0, PHASE)?;
        let root = map.insert(key, UuRecord::new(s.clone(), label));

        // expansion to fixpoint
        let mut s_yes: Vec<RecordId> = Vec::new();
        let mut queue = VecDeque::from([root]);
        while let Some(r) = queue.pop_front() {
            let term = map[r].term.clone();
            for t in self.successors(&term)? {
                let tkey = canonical_key(&t.target);
                let id = match map.lookup(&tkey) {
                    Some(id) => id,
                    None => {
                        self.admit_record(map.len(), PHASE)?;
                        let label = self.label(&t.target, &tkey, phi1, phi2)?;
                        let id = map.insert(tkey, UuRecord::new(t.target, label));
                        match label {
                            Label::Yes => s_yes.push(id),
                            Label::Unknown => queue.push_back(id),
                            Label::No => {}
                        }
                        id
                    }
                };
                map.records_mut()[id].prec.push((r, t.prob));
            }
        }
        if s_yes.is_empty() {
            return Ok(0.0);
        }

        // records that cannot reach YES become NO
        let reaches_yes = closure_mask(&map, &s_yes);
        let s_no: Vec<RecordId> = (0..map.len()).filter(|&r| !reaches_yes[r]).collect();
        for &r in &s_no {
            map.records_mut()[r].relabel(Label::No);
        }
        if s_no.is_empty() {
            return Ok(1.0);
        }
        // records that cannot reach NO (e.g. phi1-only bottom components) become YES
        let reaches_no = closure_mask(&map, &s_no);
        let s_yes: Vec<RecordId> = (0..map.len()).filter(|&r| !reaches_no[r]).collect();
        for &r in &s_yes {
            map.records_mut()[r].relabel(Label::Yes);
        }

        // computation: iterate until the mass left in UNKNOWN is below epsilon
        let scope = self.config.convergence;
        let records = map.records_mut();
        let mut active: Vec<RecordId> = s_yes.into_iter().chain(s_no).collect();
        let mut in_active = vec![false; records.len()];
        for &r in &active {
            in_active[r] = true;
        }
        let mut cur = 0;
        let mut iteration = 0u64;
        self.notify(records, root, iteration, cur);
        loop {
            let converged = |r: &UuRecord| r.p_yes[cur] + r.p_no[cur] >= 1.0 - epsilon;
            let done = match scope {
                ConvergenceScope::AllRecords => records.iter().all(converged),
                ConvergenceScope::InitialOnly => converged(&records[root]),
            };
            if done {
                break;
            }
            let next = 1 - cur;
            for &r in &active {
                if records[r].label == Label::Unknown {
                    records[r].p_yes[next] = 0.0;
                    records[r].p_no[next] = 0.0;
                }
            }
            for &r in &active {
                let (vy, vn) = (records[r].p_yes[cur], records[r].p_no[cur]);
                for j in 0..records[r].prec.len() {
                    let (q, p) = records[r].prec[j];
                    if records[q].label == Label::Unknown {
                        records[q].p_yes[next] += p * vy;
                        records[q].p_no[next] += p * vn;
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
            cur = next;
            iteration += 1;
            self.stats.iterations += 1;
            self.notify(records, root, iteration, cur);
        }
        Ok(records[root].p_yes[cur].min(1.0))
    }

    fn notify(&mut self, records: &[UuRecord], root: RecordId, iteration: u64, slot: usize) {
        if let Some(observer) = self.observer.as_mut() {
            observer(&IterationSnapshot {
                iteration,
                initial: root,
                slot,
                records,
            });
        }
    }
}
