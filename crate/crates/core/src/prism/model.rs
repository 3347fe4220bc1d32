use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::elaborate::{CompiledCommand, ElaboratedModel};
use super::expr::CExpr;
use super::parse::parse_expression;
use super::ModelError;
use crate::pctl::StateFormula;
use crate::semantics::{
    AtomId, ModelSemantics, SemanticsError, StateValuation, TransitionList, Value,
};

/// A probability and the successor state vector it leads to.
type Outcome = (f64, Box<[Value]>);

/// [`ModelSemantics`] for an elaborated PRISM model.
#[derive(Clone, Debug)]
pub struct PrismModel {
    model: ElaboratedModel,
    inline_atoms: BTreeMap<String, CExpr>,
}

pub fn build_semantics(model: ElaboratedModel) -> PrismModel {
    PrismModel {
        model,
        inline_atoms: BTreeMap::new(),
    }
}

impl PrismModel {
    pub fn elaborated(&self) -> &ElaboratedModel {
        &self.model
    }

    /// Makes every atom of `formula` evaluable: inline comparisons are
    /// compiled, labels must be declared by the model.
    pub fn register_atoms(&mut self, formula: &StateFormula) -> Result<(), ModelError> {
        for atom in formula.atoms() {
            if atom.is_label() {
                if !self.model.labels.contains_key(atom.name()) {
                    return Err(ModelError::UnknownLabel(atom.name().into()));
                }
            } else if !self.inline_atoms.contains_key(atom.name()) {
                let expr = parse_expression(atom.name())?;
                let compiled = self.model.compile_predicate(&expr)?;
                self.inline_atoms.insert(atom.name().into(), compiled);
            }
        }
        Ok(())
    }

    fn check_state<'s>(&self, s: &'s StateValuation) -> Result<&'s [Value], SemanticsError> {
        if s.names() != &self.model.names && **s.names() != *self.model.names {
            return Err(SemanticsError::ForeignState(format!("{s}")));
        }
        Ok(s.values())
    }

    /// Successor distribution of one command instance: a set of commands
    /// (one per participating module) whose updates are combined.
    fn joint_updates(
        &self,
        state: &[Value],
        instance: &[&CompiledCommand],
    ) -> Result<Vec<Outcome>, SemanticsError> {
        let mut outcomes: Vec<Outcome> = alloc::vec![(1.0, state.into())];
        for command in instance {
            let mut next = Vec::with_capacity(outcomes.len() * command.updates.len());
            for (p, values) in &outcomes {
                for update in &command.updates {
                    let mut target = values.clone();
                    for (slot, expr) in &update.assignments {
                        let value = expr
                            .eval(state)
                            .map_err(|message| SemanticsError::Evaluation {
                                command: command.describe(),
                                message,
                            })?
                            .to_value()
                            .expect("assignments are int or bool");
                        let var = &self.model.variables[*slot];
                        if !var.admits(value) {
                            return Err(SemanticsError::OutOfBounds {
                                command: command.describe(),
                                variable: var.name.clone(),
                                value: value.as_int().unwrap_or_default(),
                            });
                        }
                        target[*slot] = value;
                    }
                    next.push((p * update.prob, target));
                }
            }
            outcomes = next;
        }
        Ok(outcomes)
    }

    fn enabled(&self, state: &[Value], command: &CompiledCommand) -> Result<bool, SemanticsError> {
        command
            .guard
            .eval_bool(state)
            .map_err(|message| SemanticsError::Evaluation {
                command: command.describe(),
                message,
            })
    }
}

impl ModelSemantics for PrismModel {
    fn initial_state(&self) -> StateValuation {
        self.model.initial.clone()
    }

    fn next(&self, s: &StateValuation) -> Result<TransitionList, SemanticsError> {
        let state = self.check_state(s)?;
        let commands = &self.model.commands;
        let mut instances: Vec<Vec<&CompiledCommand>> = Vec::new();
        for &ci in &self.model.local {
            if self.enabled(state, &commands[ci])? {
                instances.push(alloc::vec![&commands[ci]]);
            }
        }
        for group in &self.model.sync {
            let mut per_module: Vec<Vec<&CompiledCommand>> = Vec::with_capacity(group.modules.len());
            for module_commands in &group.modules {
                let mut enabled = Vec::new();
                for &ci in module_commands {
                    if self.enabled(state, &commands[ci])? {
                        enabled.push(&commands[ci]);
                    }
                }
                per_module.push(enabled);
            }
            if per_module.iter().any(Vec::is_empty) {
                continue;
            }
            // every combination of one enabled command per module
            let mut combos: Vec<Vec<&CompiledCommand>> = alloc::vec![Vec::new()];
            for enabled in &per_module {
                combos = combos
                    .into_iter()
                    .flat_map(|prefix| {
                        enabled.iter().map(move |c| {
                            let mut v = prefix.clone();
                            v.push(*c);
                            v
                        })
                    })
                    .collect();
            }
            instances.extend(combos);
        }
        if instances.is_empty() {
            return Ok(TransitionList::deadlock_self_loop(s));
        }
        let weight = 1.0 / instances.len() as f64;
        let mut targets = Vec::new();
        for instance in &instances {
            for (p, values) in self.joint_updates(state, instance)? {
                targets.push((s.with_values(values), weight * p));
            }
        }
        TransitionList::from_weighted(targets)
    }

    fn lab_eval(&self, s: &StateValuation, atom: &AtomId) -> Result<bool, SemanticsError> {
        let state = self.check_state(s)?;
        let expr = self
            .model
            .labels
            .get(atom.name())
            .or_else(|| self.inline_atoms.get(atom.name()))
            .ok_or_else(|| SemanticsError::UnknownLabel(atom.name().into()))?;
        expr.eval_bool(state)
            .map_err(|message| SemanticsError::Evaluation {
                command: format!("label \"{atom}\""),
                message,
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pctl::parse_property;
    use crate::prism::{elaborate, parse_model};
    use crate::semantics::Transition;

    fn load(src: &str) -> PrismModel {
        build_semantics(elaborate(&parse_model(src).unwrap(), &BTreeMap::new()).unwrap())
    }

    fn state(m: &PrismModel, values: &[i64]) -> StateValuation {
        m.initial_state()
            .with_values(values.iter().map(|v| Value::Int(*v)).collect())
    }

    const HERMAN3: &str = "dtmc
module process1
  x1 : [0..1] init 0;
  [step] (x1=x3) -> 0.5 : (x1'=0) + 0.5 : (x1'=1);
  [step] !(x1=x3) -> (x1'=x3);
endmodule
module process2 = process1 [ x1=x2, x3=x1 ] endmodule
module process3 = process1 [ x1=x3, x3=x2 ] endmodule
formula num_tokens = (1-(x1-x3)*(x1-x3)) + (1-(x2-x1)*(x2-x1)) + (1-(x3-x2)*(x3-x2));
label \"stable\" = num_tokens=1;
";

    #[test]
    fn single_enabled_command_splits_evenly() {
        let m = load("dtmc module m x:[0..1] init 0; [] x=0 -> 0.5:(x'=0) + 0.5:(x'=1); [] x=1 -> 1:(x'=1); endmodule");
        let t = m.next(&m.initial_state()).unwrap();
        assert_eq!(t.len(), 2);
        assert!(t.iter().all(|t| t.prob == 0.5));
    }

    #[test]
    fn enabled_commands_are_chosen_uniformly() {
        // from x=0 both commands are enabled: x'=1 and x'=2, each with 1/2
        let m = load("dtmc module m x:[0..2] init 0; [] x=0 -> (x'=1); [] x<2 -> (x'=2); endmodule");
        let t = m.next(&m.initial_state()).unwrap();
        assert_eq!(
            t.items(),
            &[
                Transition { target: state(&m, &[1]), prob: 0.5 },
                Transition { target: state(&m, &[2]), prob: 0.5 },
            ]
        );
        // from x=1 only the second command is enabled
        let t = m.next(&state(&m, &[1])).unwrap();
        assert_eq!(t.items(), &[Transition { target: state(&m, &[2]), prob: 1.0 }]);
    }

    #[test]
    fn deadlock_becomes_self_loop() {
        let m = load("dtmc module m x:[0..2] init 2; [] x<2 -> (x'=x+1); endmodule");
        let s = m.initial_state();
        let t = m.next(&s).unwrap();
        assert!(t.is_patched_deadlock());
        assert_eq!(t.items(), &[Transition { target: s, prob: 1.0 }]);
    }

    #[test]
    fn out_of_bounds_update_names_the_command() {
        let m = load("dtmc module counter x:[0..1] init 1; [inc] true -> (x'=x+1); endmodule");
        let err = m.next(&m.initial_state()).unwrap_err();
        let SemanticsError::OutOfBounds { command, variable, value } = err else {
            panic!("{err:?}")
        };
        assert!(command.starts_with("counter#1 [inc]"));
        assert_eq!((variable.as_str(), value), ("x", 2));
    }

    #[test]
    fn herman_all_active_state_has_eight_coin_outcomes() {
        let m = load(HERMAN3);
        let s = m.initial_state();
        let t = m.next(&s).unwrap();
        // all three processes hold a token; each flips, 2^3 distinct outcomes
        assert_eq!(t.len(), 8);
        assert!(t.iter().all(|t| (t.prob - 0.125).abs() < 1e-15));
        assert!((t.total() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn herman_labels() {
        let m = load(HERMAN3);
        let stable = AtomId::new("stable");
        assert!(!m.lab_eval(&m.initial_state(), &stable).unwrap());
        // x = (1,0,0): tokens at process2 only (x2 = x1? no; x3 = x2 yes) -> one token
        let one_token = state(&m, &[1, 0, 0]);
        assert!(m.lab_eval(&one_token, &stable).unwrap());
        assert!(matches!(
            m.lab_eval(&one_token, &AtomId::new("nope")),
            Err(SemanticsError::UnknownLabel(_))
        ));
    }

    #[test]
    fn herman_single_token_moves_deterministically() {
        let m = load(HERMAN3);
        // x1=1,x2=0,x3=0: only process3 (x3=x2) holds the token and flips
        let t = m.next(&state(&m, &[1, 0, 0])).unwrap();
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn inline_atoms_are_registered() {
        let mut m = load("dtmc const int K = 1; module m x:[0..2] init 1; [] true -> true; endmodule label \"t\" = true;");
        let q = parse_property("P>=1 [ (x>=K) U \"t\" ]").unwrap();
        m.register_atoms(&q.formula).unwrap();
        assert!(m.lab_eval(&m.initial_state(), &AtomId::new("x>=K")).unwrap());
        assert!(m.lab_eval(&m.initial_state(), &AtomId::new("t")).unwrap());
        let bad = parse_property("P>=1 [ F \"missing\" ]").unwrap();
        assert!(matches!(m.register_atoms(&bad.formula), Err(ModelError::UnknownLabel(_))));
    }

    #[test]
    fn renamed_module_matches_hand_written_copy() {
        let renamed = load(
            "dtmc module a x:[0..2] init 0; [] x<2 -> 0.3:(x'=x+1) + 0.7:(x'=x); endmodule \
             module b = a [x=y] endmodule",
        );
        let manual = load(
            "dtmc module a x:[0..2] init 0; [] x<2 -> 0.3:(x'=x+1) + 0.7:(x'=x); endmodule \
             module b y:[0..2] init 0; [] y<2 -> 0.3:(y'=y+1) + 0.7:(y'=y); endmodule",
        );
        for x in 0..=2 {
            for y in 0..=2 {
                let a = renamed.next(&state(&renamed, &[x, y])).unwrap();
                let b = manual.next(&state(&manual, &[x, y])).unwrap();
                assert_eq!(a, b);
            }
        }
    }
}
