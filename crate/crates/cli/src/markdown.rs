//! Markdown views of JSON reports.

use std::fmt::Write;

use serde_json::Value;

use crate::commands::Envelope;

fn text(v: &Value) -> String {
    match v {
        Value::Null => "-".into(),
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(text).collect::<Vec<_>>().join(", "),
        other => other.to_string(),
    }
}

fn table(out: &mut String, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) {
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let _ = writeln!(out, "|{}|", header.iter().map(|_| "---").collect::<Vec<_>>().join("|"));
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(|c| c.replace('|', "\\|")).collect();
        let _ = writeln!(out, "| {} |", cells.join(" | "));
    }
    out.push('\n');
}

fn flags(out: &mut String, obj: &Value) {
    if let Some(map) = obj.as_object() {
        let rows = map.iter().filter(|(_, v)| v.is_boolean() || v.is_number()).map(|(k, v)| vec![k.clone(), text(v)]);
        table(out, &["property", "value"], rows);
    }
}

fn step_fn(v: &Value) -> String {
    let bps = v["breakpoints"].as_array().cloned().unwrap_or_default();
    let vals = v["values"].as_array().cloned().unwrap_or_default();
    let mut pieces = vec![format!("0 ↦ {}", text(&v["at_zero"]))];
    let mut low = "0".to_string();
    for (i, piece) in vals.iter().enumerate() {
        let high = bps.get(i).map(text).unwrap_or_else(|| "∞)".into());
        let close = if i < bps.len() { "]" } else { "" };
        pieces.push(format!("({low}, {high}{close} ↦ {}", text(piece)));
        low = high;
    }
    pieces.push(format!("∞ ↦ {}", text(&v["at_infinity"])));
    pieces.join("; ")
}

fn check(out: &mut String, r: &Value) {
    let _ = writeln!(out, "Points: {}\n", text(&r["points"]));
    flags(out, &r["validation"]);
    if let Some(d) = r["derived"].as_object() {
        table(out, &["function", "pieces"], d.iter().map(|(k, v)| vec![k.clone(), step_fn(v)]));
    }
    if !r["conditions"].is_null() {
        flags(out, &r["conditions"]);
    }
    if !r["completeness"].is_null() {
        let c = &r["completeness"];
        let _ = writeln!(out, "Complete: {} ({} zero cliques)\n", text(&c["complete"]), text(&c["zero_cliques"]));
    }
    if let Some(seqs) = r["sequences"].as_array() {
        let rows = seqs.iter().map(|s| {
            vec![
                format!("{} ({})*", text(&s["sequence"]["pre"]), text(&s["sequence"]["cycle"])),
                text(&s["reflexive"]),
                text(&s["pre_cauchy"]),
                text(&s["cauchy"]),
                text(&s["limits"]["upper_hole"]),
                text(&s["limits"]["lower_hole"]),
                text(&s["limits"]["double_hole"]),
            ]
        });
        table(out, &["sequence", "reflexive", "pre-Cauchy", "Cauchy", "upper hole", "lower hole", "double hole"], rows);
    }
    if let Some(subs) = r["subsets"].as_array() {
        let rows = subs.iter().map(|s| {
            ["subset", "d_directed", "leq_directed", "leq_sups", "d_sups"].iter().map(|k| text(&s[*k])).collect()
        });
        table(out, &["subset", "d-directed", "≤-directed", "≤-sups", "d-sups"], rows);
    }
}

fn audit(out: &mut String, r: &Value) {
    let entries = r["entries"].as_array().cloned().unwrap_or_default();
    let rows = entries.iter().map(|e| {
        vec![text(&e["statement"]), text(&e["hypotheses_met"]), text(&e["conclusion"]), text(&e["witness"])]
    });
    table(out, &["statement", "hypotheses met", "conclusion", "witness"], rows);
    let _ = writeln!(out, "Failures: {}\n", text(&r["failures"]));
}

fn gallery(out: &mut String, r: &Value) {
    let _ = writeln!(out, "Fixture `{}` at cutoff {}, {} points.\n", text(&r["name"]), text(&r["cutoff"]), text(&r["points"]));
    let facts = r["facts"].as_array().cloned().unwrap_or_default();
    table(out, &["fact", "holds", "observed"], facts.iter().map(|f| vec![text(&f["fact"]), text(&f["holds"]), text(&f["observed"])]));
    if let Some(s) = r["summary"].as_object() {
        table(out, &["summary", "value"], s.iter().map(|(k, v)| vec![k.clone(), text(v)]));
    }
    if let Some(a) = r["audits"].as_array().filter(|a| !a.is_empty()) {
        table(out, &["statement", "verdict"], a.iter().map(|e| vec![text(&e["statement"]), text(&e["verdict"])]));
    }
}

fn random(out: &mut String, r: &Value) {
    let _ = writeln!(out, "n ≤ {}, {} instances, seed {}.\n", text(&r["n"]), text(&r["count"]), text(&r["seed"]));
    if let Some(s) = r["statements"].as_object() {
        let rows = s.iter().map(|(k, t)| {
            let mut row = vec![k.clone()];
            row.extend(["verified", "refuted", "vacuous", "skipped"].iter().map(|c| text(&t[*c])));
            row
        });
        table(out, &["statement", "verified", "refuted", "vacuous", "skipped"], rows);
    }
    flags(out, &r["derived"]);
    let failures = r["failures"].as_array().map_or(0, Vec::len);
    let _ = writeln!(out, "Failures: {failures}. Report hash `{}`.\n", text(&r["report_hash"]));
}

fn section(out: &mut String, env: &Envelope, level: &str) {
    let _ = writeln!(out, "{level} {}\n", env.command);
    if let Some(input) = env.input.as_object() {
        let parts: Vec<String> = input.iter().map(|(k, v)| format!("{k} = {}", text(v))).collect();
        let _ = writeln!(out, "Input: {}\n", parts.join(", "));
    }
    match env.command.as_str() {
        "check" => check(out, &env.result),
        "audit" => audit(out, &env.result),
        "gallery" => gallery(out, &env.result),
        "random" => random(out, &env.result),
        _ => {
            let _ = writeln!(out, "```json\n{}\n```\n", serde_json::to_string_pretty(&env.result).unwrap_or_default());
        }
    }
}

pub fn single(env: &Envelope) -> String {
    let mut out = String::new();
    section(&mut out, env, "#");
    out
}

pub fn merged(envs: &[Envelope]) -> String {
    let mut out = String::from("# Report\n\n");
    let rows = envs.iter().enumerate().map(|(i, e)| vec![(i + 1).to_string(), e.command.clone(), text(&e.input)]);
    table(&mut out, &["#", "command", "input"], rows);
    for env in envs {
        section(&mut out, env, "##");
    }
    out
}
