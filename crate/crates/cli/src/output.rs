//! Rendering of property reports.

use flycheck_core::Verdict;
use serde_json::{json, Value};

use crate::run::{Outcome, PropertyReport};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Text,
    JsonLines,
}

pub fn render(report: &PropertyReport, format: Format, stats: bool) -> String {
    match format {
        Format::Text => text(report, stats),
        Format::JsonLines => json_line(report).to_string(),
    }
}

fn text(r: &PropertyReport, stats: bool) -> String {
    let result = match &r.outcome {
        Outcome::Verdict(Verdict::Bool(b)) => b.to_string(),
        Outcome::Verdict(Verdict::Probability(p)) => format!("{p:.9}"),
        Outcome::Error(e) => format!("error: {e}"),
    };
    let mut line = format!(
        "{}: {result}  ({:.1} ms, {} states, {} iterations)",
        r.property, r.ms, r.states, r.iterations
    );
    if stats {
        line.push_str(&format!(
            "\n  expanded={} records={} iterations={} deadlocks={}",
            r.expanded, r.states, r.iterations, r.deadlocks
        ));
    }
    line
}

/// One object per property. Errors carry an extra `error` key and null
/// verdict and probability.
pub fn json_line(r: &PropertyReport) -> Value {
    let (verdict, probability) = match &r.outcome {
        Outcome::Verdict(Verdict::Bool(b)) => (json!(b), Value::Null),
        Outcome::Verdict(Verdict::Probability(p)) => (Value::Null, json!(p)),
        Outcome::Error(_) => (Value::Null, Value::Null),
    };
    let mut obj = json!({
        "property": r.property,
        "verdict": verdict,
        "probability": probability,
        "ms": r.ms,
        "states": r.states,
        "iterations": r.iterations,
    });
    if let Outcome::Error(e) = &r.outcome {
        obj["error"] = json!(e);
    }
    obj
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(outcome: Outcome) -> PropertyReport {
        PropertyReport {
            property: "P=? [ F \"a\" ]".into(),
            outcome,
            ms: 1.5,
            states: 4,
            iterations: 7,
            expanded: 3,
            deadlocks: 0,
        }
    }

    #[test]
    fn json_keys_are_fixed() {
        let v = json_line(&report(Outcome::Verdict(Verdict::Probability(0.5))));
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        let mut expected = vec!["property", "verdict", "probability", "ms", "states", "iterations"];
        expected.sort_unstable();
        let mut keys = keys;
        keys.sort_unstable();
        assert_eq!(keys, expected);
        assert_eq!(v["probability"], json!(0.5));
        assert!(v["verdict"].is_null());
    }

    #[test]
    fn text_line() {
        let line = render(&report(Outcome::Verdict(Verdict::Bool(true))), Format::Text, false);
        assert_eq!(line, "P=? [ F \"a\" ]: true  (1.5 ms, 4 states, 7 iterations)");
        let err = render(&report(Outcome::Error("boom".into())), Format::JsonLines, false);
        assert!(err.contains("\"error\":\"boom\""));
    }
}
