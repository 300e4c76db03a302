//! JSON encodings of library values that carry no serde impl of their own.

use derivgraph::chase::Derivation;
use derivgraph::classify::{ClassificationVerdict, Outcome};
use derivgraph::graph::DerivationGraph;
use derivgraph::reduce::ReductionTrace;
use derivgraph::Rule;
use serde_json::{json, Value};

pub const SCHEMA: u32 = 1;

/// Wraps a report body with the schema version and command name.
pub fn envelope(command: &str, body: Value) -> Value {
    let mut v = json!({ "schema": SCHEMA, "command": command });
    if let (Value::Object(out), Value::Object(extra)) = (&mut v, body) {
        out.extend(extra);
    }
    v
}

pub fn derivation(d: &Derivation, rules: &[Rule]) -> Value {
    let steps: Vec<Value> = d
        .steps()
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let rule = &rules[s.trigger.rule];
            json!({
                "step": k + 1,
                "rule": rule.id(),
                "hom": s.trigger.hom,
                "extension": s.trigger.extension,
                "atoms": s.trigger.head_image(rule),
            })
        })
        .collect();
    json!({
        "length": d.len(),
        "rules": d.rule_ids(rules),
        "initial": d.initial(),
        "steps": steps,
        "final": d.final_instance(),
    })
}

pub fn graph(g: &DerivationGraph) -> Value {
    let arcs: Vec<Value> = g
        .arcs()
        .iter()
        .map(|(&(i, j), l)| json!({ "from": i, "to": j, "label": l }))
        .collect();
    json!({ "nodes": g.nodes(), "arcs": arcs })
}

pub fn trace(t: &ReductionTrace) -> Value {
    json!({
        "steps": t.steps,
        "text": t.steps.iter().map(ToString::to_string).collect::<Vec<_>>(),
    })
}

pub fn verdict(v: &ClassificationVerdict, rules: &[Rule], verified: bool) -> Value {
    let mut out = json!({
        "class": v.class.to_string(),
        "depth": v.depth,
        "outcome": v.outcome.name(),
        "rederive_len": v.rederive_len,
        "derivations_checked": v.certificate.derivations_checked,
        "instances": v.certificate.instances,
        "witnesses": v.certificate.witnesses.len(),
        "verified": verified,
    });
    match &v.outcome {
        Outcome::Refuted { counterexample } => {
            out["counterexample"] = derivation(counterexample, rules);
        }
        Outcome::Unknown { reason } => out["reason"] = json!(reason),
        Outcome::Holds => {}
    }
    out
}
