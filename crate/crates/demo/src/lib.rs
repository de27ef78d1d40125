//! Browser bindings. Each exported function takes plain strings and
//! returns a JSON document; the `*_value` functions behind them are
//! ordinary Rust and are tested natively.

use std::collections::{BTreeMap, HashMap, VecDeque};

use divergence_core::check::{check_comb, check_profile, Predicate};
use divergence_core::comb::{comb_rat_inf_report, comb_spe, CombChoiceWord, StageOutcome, WitnessBounds};
use divergence_core::families::{build_family, spine_moves, unfold, EndingOption, FamilyBundle, NamedProfile};
use divergence_core::finite::{bi, enumerate_profiles};
use divergence_core::textio::{parse_profile, serialize_profile, Format};
use divergence_core::{Node, NodeId, Profile};
use serde_json::{json, Value};
use wasm_bindgen::prelude::wasm_bindgen;

/// Parses a profile document and decides every predicate on it.
#[wasm_bindgen]
pub fn check_document(text: &str) -> String {
    check_document_value(text).to_string()
}

/// Stage table, SPE certificate and Rat_∞ verdict of a comb family under
/// a choice word.
#[wasm_bindgen]
pub fn explore_comb(family: &str, params: &str, word: &str, stages: u32) -> String {
    explore_comb_value(family, params, word, stages).to_string()
}

/// Backward-induction profiles of a truncated comb.
#[wasm_bindgen]
pub fn explore_unfold(family: &str, params: &str, depth: u32, ending: &str) -> String {
    explore_unfold_value(family, params, depth, ending).to_string()
}

fn error(msg: impl ToString) -> Value {
    json!({ "ok": false, "error": msg.to_string() })
}

pub fn check_document_value(text: &str) -> Value {
    let s = match parse_profile(text) {
        Ok(s) => s,
        Err(e) => return json!({ "ok": false, "error": e.to_string(), "line": e.line }),
    };
    let mut preds = serde_json::Map::new();
    for p in Predicate::ALL {
        let v = match check_profile(&s, p) {
            Ok(v) => json!(v.to_string()),
            Err(_) => json!("n/a"),
        };
        preds.insert(p.name().to_string(), v);
    }
    let outcome = s.utility_assignment().map(|u| u.to_string()).ok();
    json!({
        "ok": true,
        "predicates": preds,
        "outcome": outcome,
        "layout": layout(&s),
        "dot": serialize_profile(&s, Format::Dot),
    })
}

/// Nodes placed by breadth-first depth; edges into earlier layers are
/// marked as back edges.
pub fn layout(s: &Profile) -> Value {
    let mut depth: HashMap<NodeId, usize> = HashMap::new();
    let mut order = vec![];
    let mut q = VecDeque::from([s.root()]);
    depth.insert(s.root(), 0);
    while let Some(id) = q.pop_front() {
        order.push(id);
        for &c in s.node(id).children() {
            if !depth.contains_key(&c) {
                depth.insert(c, depth[&id] + 1);
                q.push_back(c);
            }
        }
    }
    let index: HashMap<NodeId, usize> = order.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let mut per_layer: BTreeMap<usize, usize> = BTreeMap::new();
    let mut nodes = vec![];
    let mut edges = vec![];
    for &id in &order {
        let d = depth[&id];
        let slot = per_layer.entry(d).or_insert(0);
        let (kind, label) = match s.node(id) {
            Node::Leaf(u) => ("leaf", u.to_string()),
            Node::Internal { owner, .. } => ("decision", owner.to_string()),
        };
        nodes.push(json!({ "id": index[&id], "kind": kind, "label": label, "layer": d, "slot": *slot }));
        *slot += 1;
        if let Node::Internal { choice, children, .. } = s.node(id) {
            for (k, c) in children.iter().enumerate() {
                edges.push(json!({
                    "from": index[&id],
                    "to": index[c],
                    "choice": k + 1,
                    "chosen": k == choice.index(),
                    "back": depth[c] <= d,
                }));
            }
        }
    }
    json!({ "nodes": nodes, "edges": edges, "layers": per_layer })
}

fn bundle(family: &str, params: &str) -> Result<FamilyBundle, Value> {
    let mut map = BTreeMap::new();
    for part in params.split([',', '&', ' ']).filter(|p| !p.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| error(format!("bad parameter `{part}`")))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    build_family(family, &map).map_err(error)
}

fn resolve_word(b: &FamilyBundle, word: &str) -> Result<CombChoiceWord, Value> {
    match b.profiles.get(word) {
        Some(NamedProfile::Word(w)) => Ok(w.clone()),
        _ => word.parse().map_err(error),
    }
}

pub fn explore_comb_value(family: &str, params: &str, word: &str, stages: u32) -> Value {
    let b = match bundle(family, params) {
        Ok(b) => b,
        Err(e) => return e,
    };
    let Some(spec) = b.comb() else {
        return error(format!("{family} is not a comb family"));
    };
    let w = match resolve_word(&b, word) {
        Ok(w) => w,
        Err(e) => return e,
    };
    let table: Vec<Value> = (0..u64::from(stages.min(64)))
        .map(|j| {
            let take: Vec<String> = spec.take_at(j).iter().map(|u| u.to_string()).collect();
            json!({ "stage": j, "owner": spec.owner(j).to_string(), "take": take, "move": w.at(j).letter().to_string() })
        })
        .collect();
    let cert = comb_spe(spec, &w);
    let records: Vec<Value> = cert
        .records
        .iter()
        .map(|r| {
            json!({
                "class": r.class.to_string(),
                "move": r.choice.letter().to_string(),
                "inequality": r.inequality(),
                "verdict": r.verdict.to_string(),
                "holds": r.verdict.holds(),
            })
        })
        .collect();
    let rat = comb_rat_inf_report(spec, &w, WitnessBounds::default());
    let support: Vec<Value> = rat
        .stages
        .iter()
        .map(|s| {
            let how = match &s.outcome {
                StageOutcome::Witness(u) => format!("witness {u}"),
                StageOutcome::Exact(true) => "supported (exact)".into(),
                StageOutcome::Exact(false) => "unsupported (exact)".into(),
                StageOutcome::Unknown => "unknown".into(),
            };
            json!({ "class": s.class.to_string(), "move": s.choice.letter().to_string(), "support": how })
        })
        .collect();
    let verdict = |p: Predicate| check_comb(spec, &w, p).map(|v| v.to_string()).unwrap_or_else(|_| "n/a".into());
    let names: Vec<&String> = b.profiles.keys().collect();
    json!({
        "ok": true,
        "word": w.to_string(),
        "profiles": names,
        "stages": table,
        "certificate": { "valid": cert.is_valid(), "always_convergent": cert.always_convergent, "records": records },
        "ratinf": { "verdict": rat.verdict.to_string(), "stages": support },
        "divergent": verdict(Predicate::Div),
        "spe": verdict(Predicate::Spe),
    })
}

pub fn explore_unfold_value(family: &str, params: &str, depth: u32, ending: &str) -> Value {
    let b = match bundle(family, params) {
        Ok(b) => b,
        Err(e) => return e,
    };
    let Some(spec) = b.comb() else {
        return error(format!("{family} is not a comb family"));
    };
    let ending: EndingOption = match ending.parse() {
        Ok(e) => e,
        Err(e) => return error(e),
    };
    if !(1..=14).contains(&depth) {
        return error("depth must be between 1 and 14");
    }
    let g = match unfold(spec, depth as usize, ending) {
        Ok(g) => g,
        Err(e) => return error(e),
    };
    let all = enumerate_profiles(&g).expect("depth bound keeps enumeration small");
    let total = all.len();
    let mut words = vec![];
    let mut first = None;
    for p in all.filter(bi) {
        let moves: String = spine_moves(p.profile()).iter().map(|m| m.letter()).collect();
        words.push(moves);
        if first.is_none() {
            first = Some(layout(p.profile()));
        }
    }
    json!({
        "ok": true,
        "profiles": total,
        "bi_count": words.len(),
        "bi_words": words,
        "first_bi_layout": first,
    })
}
