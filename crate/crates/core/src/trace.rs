//! JSON rendering of verdicts. See `docs/proof-trace.md` for the schema.

use serde_json::{json, Value};

use crate::critical_pairs::CriticalPair;
use crate::joinability::JoinInstance;
use crate::matrix::MatrixInterpretation;
use crate::prover::{JoinedPair, Proof, Verdict, Witness};
use crate::relative_termination::{Closing, RelTermProof, RemovalStep};
use crate::rewriting::{Rule, Step, Trs};

/// A rule reference: file index and the 1-based label used in prose.
fn rule_ref(index: usize) -> Value {
    json!({ "index": index, "label": index + 1 })
}

fn rule_json(r: &Rule) -> Value {
    json!({ "index": r.index, "label": r.index + 1, "rule": r.to_string() })
}

fn system_json(trs: &Trs) -> Value {
    Value::Array(trs.rules().iter().map(rule_json).collect())
}

fn steps_json(steps: &[Step]) -> Value {
    Value::Array(
        steps
            .iter()
            .map(|s| json!({ "rule": rule_ref(s.rule), "position": s.pos.to_string(), "term": s.term.to_string() }))
            .collect(),
    )
}

fn critical_pair_json(cp: &CriticalPair) -> Value {
    json!({
        "inner": rule_ref(cp.overlap.inner.index),
        "outer": rule_ref(cp.overlap.outer.index),
        "position": cp.overlap.pos.to_string(),
        "source": cp.source.to_string(),
        "left": cp.left.to_string(),
        "right": cp.right.to_string(),
    })
}

fn join_json(j: &JoinInstance) -> Value {
    json!({
        "left_labels": j.left.iter().map(|&r| rule_ref(r)).collect::<Vec<_>>(),
        "right_labels": j.right.iter().map(|&r| rule_ref(r)).collect::<Vec<_>>(),
        "meet": j.meet.to_string(),
        "left_steps": steps_json(&j.left_trace),
        "right_steps": steps_json(&j.right_trace),
    })
}

fn joins_json(joins: &[JoinedPair]) -> Value {
    Value::Array(
        joins.iter().map(|j| json!({ "critical_pair": critical_pair_json(&j.critical_pair), "join": join_json(&j.join) })).collect(),
    )
}

fn interpretation_json(m: &MatrixInterpretation) -> Value {
    let symbols: serde_json::Map<String, Value> = m
        .symbols
        .iter()
        .map(|(f, s)| (f.to_string(), json!({ "arguments": s.args, "constant": s.constant })))
        .collect();
    json!({ "dimension": m.dim, "symbols": symbols })
}

fn removal_steps_json(steps: &[RemovalStep]) -> Value {
    Value::Array(
        steps
            .iter()
            .map(|s| {
                let pick = |trs: &Trs, set: &std::collections::BTreeSet<usize>| {
                    Value::Array(trs.rules().iter().filter(|r| set.contains(&r.index)).map(rule_json).collect())
                };
                json!({
                    "strict": system_json(&s.problem.strict),
                    "weak": system_json(&s.problem.weak),
                    "interpretation": interpretation_json(&s.interpretation),
                    "removed_strict": pick(&s.problem.strict, &s.removed.strict),
                    "removed_weak": pick(&s.problem.weak, &s.removed.weak),
                })
            })
            .collect(),
    )
}

fn termination_json(p: &RelTermProof) -> Value {
    let closing = match &p.closing {
        Closing::Empty => json!({ "kind": "empty" }),
        Closing::Terminating { system, steps } => {
            json!({ "kind": "terminating", "system": system_json(system), "steps": removal_steps_json(steps) })
        }
        Closing::External { system, command } => {
            json!({ "kind": "external", "system": system_json(system), "command": command })
        }
    };
    json!({ "steps": removal_steps_json(&p.steps), "closing": closing })
}

fn witness_json(w: &Witness) -> Value {
    json!({
        "critical_pair": critical_pair_json(&w.critical_pair),
        "left_normal_form": w.left_normal_form.to_string(),
        "right_normal_form": w.right_normal_form.to_string(),
        "left_steps": steps_json(&w.left_steps),
        "right_steps": steps_json(&w.right_steps),
    })
}

pub fn trace_json(trs: &Trs, verdict: &Verdict) -> Value {
    match verdict {
        Verdict::Yes { criterion, proof } => {
            let details = match proof {
                Proof::Orthogonal => json!({ "left_linear": true, "critical_pairs": 0 }),
                Proof::KnuthBendix { termination, joins } => {
                    json!({ "termination": termination_json(termination), "joins": joins_json(joins) })
                }
                Proof::RuleLabeling { k, levels, formula, overlaps, chosen } => json!({
                    "k": k,
                    "level_map": levels.iter().map(|(r, l)| json!({ "rule": rule_ref(*r), "level": l })).collect::<Vec<_>>(),
                    "formula": formula.to_string(),
                    "overlaps": overlaps.iter().zip(chosen).map(|(o, j)| json!({
                        "critical_pair": critical_pair_json(&o.critical_pair),
                        "instances": o.instances.len(),
                        "chosen": join_json(j),
                    })).collect::<Vec<_>>(),
                }),
                Proof::Decreasing { joins, problem, termination } => json!({
                    "joins": joins_json(joins),
                    "relative_termination": {
                        "strict": system_json(&problem.strict),
                        "weak": system_json(&problem.weak),
                        "proof": termination_json(termination),
                    },
                }),
            };
            json!({ "verdict": "YES", "criterion": criterion.name(), "system": system_json(trs), "details": details })
        }
        Verdict::No { criterion, witness } => json!({
            "verdict": "NO",
            "criterion": criterion.name(),
            "system": system_json(trs),
            "details": { "witness": witness_json(witness) },
        }),
        Verdict::Maybe { reasons } => json!({
            "verdict": "MAYBE",
            "criterion": null,
            "system": system_json(trs),
            "details": {
                "reasons": reasons.iter().map(|(c, r)| json!({ "criterion": c.name(), "reason": r })).collect::<Vec<_>>(),
            },
        }),
    }
}
