//! JSON result documents and structural checks for them.
//!
//! Keys are snake_case and rationals are strings `"p/q"`.

use serde_json::{json, Map, Value};

use crate::elimination::{Condition1, Condition2, ConditionReport, ConeWitness, Cycle, ReducedNetwork};
use crate::markov::Distribution;
use crate::model::{Complex, Network};
use crate::num::{format_fraction, parse_rat, Rat};
use crate::scaling::ConvergenceRow;
use crate::simulate::Occupation;

pub fn rat_value(r: &Rat) -> Value {
    Value::String(format_fraction(r))
}

fn complex_text(c: &Complex, names: &[String]) -> String {
    c.format_declared(names)
}

/// `{"species": [...], "exact": b, "entries": [{"state": [...], "p": "p/q"}]}`
pub fn distribution_json(d: &Distribution, species: &[String]) -> Value {
    let entries: Vec<Value> = d
        .states
        .iter()
        .zip(&d.probabilities)
        .map(|(s, p)| json!({"state": s.as_slice(), "p": rat_value(p)}))
        .collect();
    let mut doc = json!({
        "species": species,
        "exact": d.exact,
        "entries": entries,
    });
    if let Some(m) = &d.normalization {
        doc["normalization"] = rat_value(m);
    }
    doc
}

/// Same layout with float probabilities.
pub fn occupation_json(o: &Occupation, species: &[String]) -> Value {
    let entries: Vec<Value> = o
        .states
        .iter()
        .zip(&o.weights)
        .map(|(s, p)| json!({"state": s.as_slice(), "p": p}))
        .collect();
    json!({"species": species, "exact": false, "entries": entries})
}

fn cycle_json(c: &Cycle) -> Value {
    json!({"nodes": c.nodes, "reactions": c.edges, "zeta": c.zeta, "display": c.display})
}

fn cone_json(w: &Option<ConeWitness>) -> Value {
    match w {
        None => Value::Null,
        Some(w) => json!({
            "terms": w.terms.iter().map(|(k, c)| json!({"coefficient": k, "cycle": cycle_json(c)})).collect::<Vec<_>>(),
            "combination": w.combination,
        }),
    }
}

pub fn condition1_json(c: &Condition1) -> Value {
    json!({"holds": c.holds, "witness": c.witness.as_ref().map(cycle_json)})
}

pub fn condition2_json(c: &Condition2) -> Value {
    json!({
        "part_i": c.part_i,
        "witness_i": cone_json(&c.witness_i),
        "part_ii": c.part_ii,
        "witness_ii": cone_json(&c.witness_ii),
    })
}

pub fn condition_report_json(r: &ConditionReport) -> Value {
    json!({
        "condition1": condition1_json(&r.condition1),
        "condition2": condition2_json(&r.condition2),
        "eliminable": r.eliminable,
        "u_pro": r.u_pro,
        "u_deg": r.u_deg,
        "weakly_reversible": r.weakly_reversible,
    })
}

pub fn reduced_network_json(net: &Network, rn: &ReducedNetwork) -> Value {
    let names = net.species_names();
    let eliminated: Vec<&String> = rn.graph.u_set.iter().map(|&s| &names[s]).collect();
    let reaction = |r: &crate::elimination::ReducedReaction| {
        json!({
            "reactant": complex_text(&r.reactant, &rn.core_names),
            "product": complex_text(&r.product, &rn.core_names),
            "text": format!(
                "{} -> {}",
                complex_text(&r.reactant, &rn.core_names),
                complex_text(&r.product, &rn.core_names)
            ),
            "provenance_count": r.provenance.len(),
            "example_walk": r.provenance.first().map(|w| w.edges.clone()),
        })
    };
    json!({
        "core_species": rn.core_names,
        "eliminated": eliminated,
        "reactions": rn.reactions.iter().map(reaction).collect::<Vec<_>>(),
        "self_loops": rn.self_loops.iter().map(reaction).collect::<Vec<_>>(),
        "memo_entries": rn.memo_entries,
    })
}

pub fn convergence_json(rows: &[ConvergenceRow]) -> Value {
    Value::Array(
        rows.iter()
            .map(|r| json!({"n": r.n, "tv": rat_value(&r.tv), "tv_float": r.tv_float, "ratio": r.ratio}))
            .collect(),
    )
}

/// Structural violations of a JSON document.
pub type SchemaResult = Result<(), String>;

fn object<'a>(v: &'a Value, at: &str) -> Result<&'a Map<String, Value>, String> {
    v.as_object().ok_or_else(|| format!("{at}: expected an object"))
}

fn field<'a>(o: &'a Map<String, Value>, key: &str, at: &str) -> Result<&'a Value, String> {
    o.get(key).ok_or_else(|| format!("{at}: missing `{key}`"))
}

fn check_keys(v: &Value, at: &str) -> SchemaResult {
    match v {
        Value::Object(o) => {
            for (k, inner) in o {
                let snake = !k.is_empty()
                    && k.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_');
                if !snake {
                    return Err(format!("{at}: key `{k}` is not snake_case"));
                }
                check_keys(inner, &format!("{at}.{k}"))?;
            }
            Ok(())
        }
        Value::Array(a) => a.iter().enumerate().try_for_each(|(i, x)| check_keys(x, &format!("{at}[{i}]"))),
        _ => Ok(()),
    }
}

fn is_fraction(v: &Value) -> bool {
    v.as_str().is_some_and(|s| s.contains('/') && parse_rat(s).is_some())
}

fn check_bool(o: &Map<String, Value>, key: &str, at: &str) -> SchemaResult {
    field(o, key, at)?
        .as_bool()
        .map(|_| ())
        .ok_or_else(|| format!("{at}.{key}: expected a boolean"))
}

pub fn check_distribution(v: &Value) -> SchemaResult {
    check_keys(v, "$")?;
    let o = object(v, "$")?;
    let species = field(o, "species", "$")?
        .as_array()
        .ok_or("$.species: expected an array")?;
    check_bool(o, "exact", "$")?;
    let entries = field(o, "entries", "$")?.as_array().ok_or("$.entries: expected an array")?;
    for (i, e) in entries.iter().enumerate() {
        let at = format!("$.entries[{i}]");
        let eo = object(e, &at)?;
        let state = field(eo, "state", &at)?.as_array().ok_or(format!("{at}.state: expected an array"))?;
        if state.len() != species.len() || !state.iter().all(|x| x.is_u64()) {
            return Err(format!("{at}.state: expected {} counts", species.len()));
        }
        let p = field(eo, "p", &at)?;
        if !(is_fraction(p) || p.is_f64() || p.is_u64()) {
            return Err(format!("{at}.p: expected \"p/q\" or a number"));
        }
    }
    Ok(())
}

fn check_cycle(v: &Value, at: &str) -> SchemaResult {
    let o = object(v, at)?;
    for key in ["nodes", "reactions", "zeta"] {
        field(o, key, at)?.as_array().ok_or(format!("{at}.{key}: expected an array"))?;
    }
    field(o, "display", at)?.as_str().ok_or(format!("{at}.display: expected a string"))?;
    Ok(())
}

pub fn check_condition_report(v: &Value) -> SchemaResult {
    check_keys(v, "$")?;
    let o = object(v, "$")?;
    let c1 = object(field(o, "condition1", "$")?, "$.condition1")?;
    check_bool(c1, "holds", "$.condition1")?;
    match field(c1, "witness", "$.condition1")? {
        Value::Null => {}
        w => check_cycle(w, "$.condition1.witness")?,
    }
    let c2 = object(field(o, "condition2", "$")?, "$.condition2")?;
    for part in ["i", "ii"] {
        check_bool(c2, &format!("part_{part}"), "$.condition2")?;
        let at = format!("$.condition2.witness_{part}");
        match field(c2, &format!("witness_{part}"), "$.condition2")? {
            Value::Null => {}
            w => {
                let wo = object(w, &at)?;
                field(wo, "combination", &at)?.as_array().ok_or(format!("{at}.combination: expected an array"))?;
                let terms = field(wo, "terms", &at)?.as_array().ok_or(format!("{at}.terms: expected an array"))?;
                for (k, t) in terms.iter().enumerate() {
                    let to = object(t, &at)?;
                    field(to, "coefficient", &at)?.as_u64().ok_or(format!("{at}.terms[{k}]: bad coefficient"))?;
                    check_cycle(field(to, "cycle", &at)?, &format!("{at}.terms[{k}].cycle"))?;
                }
            }
        }
    }
    check_bool(o, "eliminable", "$")?;
    check_bool(o, "weakly_reversible", "$")?;
    for key in ["u_pro", "u_deg"] {
        field(o, key, "$")?.as_array().ok_or(format!("$.{key}: expected an array"))?;
    }
    Ok(())
}

pub fn check_reduced_network(v: &Value) -> SchemaResult {
    check_keys(v, "$")?;
    let o = object(v, "$")?;
    for key in ["core_species", "eliminated"] {
        field(o, key, "$")?.as_array().ok_or(format!("$.{key}: expected an array"))?;
    }
    field(o, "memo_entries", "$")?.as_u64().ok_or("$.memo_entries: expected a count")?;
    for list in ["reactions", "self_loops"] {
        let items = field(o, list, "$")?.as_array().ok_or(format!("$.{list}: expected an array"))?;
        for (i, r) in items.iter().enumerate() {
            let at = format!("$.{list}[{i}]");
            let ro = object(r, &at)?;
            for key in ["reactant", "product", "text"] {
                field(ro, key, &at)?.as_str().ok_or(format!("{at}.{key}: expected a string"))?;
            }
            field(ro, "provenance_count", &at)?.as_u64().ok_or(format!("{at}.provenance_count: expected a count"))?;
        }
    }
    Ok(())
}

pub fn check_convergence(v: &Value) -> SchemaResult {
    check_keys(v, "$")?;
    let rows = v.as_array().ok_or("$: expected an array")?;
    for (i, r) in rows.iter().enumerate() {
        let at = format!("$[{i}]");
        let ro = object(r, &at)?;
        field(ro, "n", &at)?.as_u64().ok_or(format!("{at}.n: expected an integer"))?;
        if !is_fraction(field(ro, "tv", &at)?) {
            return Err(format!("{at}.tv: expected \"p/q\""));
        }
        field(ro, "tv_float", &at)?.as_f64().ok_or(format!("{at}.tv_float: expected a number"))?;
    }
    Ok(())
}

/// Parse the entries of a distribution document back into exact values.
pub fn read_distribution(v: &Value) -> Result<Vec<(Vec<u64>, Rat)>, String> {
    check_distribution(v)?;
    v["entries"]
        .as_array()
        .expect("checked")
        .iter()
        .map(|e| {
            let state = e["state"].as_array().expect("checked").iter().map(|x| x.as_u64().expect("checked")).collect();
            let p = e["p"]
                .as_str()
                .and_then(parse_rat)
                .ok_or_else(|| "probability is not exact".to_string())?;
            Ok((state, p))
        })
        .collect()
}
