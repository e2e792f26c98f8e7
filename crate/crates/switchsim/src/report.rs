//! JSON and CSV renderings.
//!
//! Object keys keep insertion order and floats print in shortest round-trip
//! form, so equal inputs give byte-identical output.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};
use switchsim_core::friend::FriendReport;
use switchsim_core::immersion::{EventMap, ImmersionReport};
use switchsim_core::scenario::{pair_key, ProbabilityTable};

use crate::CliError;

/// `{"entries": {"(0,v)": p, …}, "p_A": …, "p_B": …, "sum": …}`.
pub fn table_json(table: &ProbabilityTable) -> Value {
    let entries: Map<String, Value> = table.entries().iter().map(|&(a, b, p)| (pair_key(a, b), json!(p))).collect();
    json!({
        "entries": entries,
        "p_A": table.p_a(),
        "p_B": table.p_b(),
        "sum": table.sum(),
    })
}

/// One row per outcome pair under the header `alpha,beta,probability`.
pub fn table_csv(table: &ProbabilityTable) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Invariant(format!("csv: {e}"));
    w.write_record(["alpha", "beta", "probability"]).map_err(fail)?;
    for &(a, b, p) in table.entries() {
        w.write_record([a.symbol(), b.symbol(), &p.to_string()]).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Invariant(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::Invariant(format!("csv: {e}")))
}

pub struct FriendRun<'a> {
    pub report: &'a FriendReport,
    pub seed: u64,
    /// Outcome of one sampled `M` measurement.
    pub sampled_m: u8,
    /// Arrival-label counts over the decohered runs.
    pub arrival_counts: &'a BTreeMap<String, usize>,
}

pub fn friend_json(run: &FriendRun<'_>) -> Value {
    let r = run.report;
    let mut out = Map::new();
    out.insert("variant".into(), json!(r.variant.kind.as_str()));
    out.insert("meets_boundary".into(), json!(r.variant.meets_boundary));
    out.insert("recombines".into(), json!(r.variant.recombines));
    out.insert("M".into(), json!({"0": r.m[0], "1": r.m[1]}));
    if let Some([plus, minus]) = r.erase {
        out.insert("erase".into(), json!({"+": plus, "\u{2212}": minus}));
    }
    out.insert("purity_before".into(), json!(r.purity_before));
    out.insert("post_state_purity".into(), json!(r.post_state_purity));
    out.insert("classification".into(), json!(r.classification.as_str()));
    out.insert("distinct_arrival_labels".into(), json!(r.distinct_arrival_labels));
    out.insert("seed".into(), json!(run.seed));
    out.insert("sampled_M".into(), json!(run.sampled_m));
    out.insert("arrival_counts".into(), json!(run.arrival_counts));
    Value::Object(out)
}

/// `{"layers": […], "time_slices": n, "points": {node: {"t": …, "x": […]}}}`,
/// plus a `verification` object when `report` is given.
pub fn event_map_json(em: &EventMap, report: Option<&ImmersionReport>) -> Value {
    let points: Map<String, Value> =
        em.assignment.iter().map(|(n, p)| (n.clone(), json!({"t": p.t, "x": p.x}))).collect();
    let mut out = Map::new();
    out.insert("layers".into(), json!(em.layers));
    out.insert("time_slices".into(), json!(em.time_slices()));
    out.insert("points".into(), Value::Object(points));
    if let Some(r) = report {
        out.insert(
            "verification".into(),
            json!({
                "order_preserved": r.order_preserved,
                "violations": r.violations,
                "extra_relations": r.extra_relations,
                "is_embedding": r.is_embedding,
            }),
        );
    }
    Value::Object(out)
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values built here always serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use switchsim_core::friend::{friend_report, SwitchVariant, VariantKind};
    use switchsim_core::immersion::{immerse, switch_circuit_4event, verify_immersion, PlacementParams};
    use switchsim_core::scenario::{probability_distribution, ScenarioConfig, ScenarioKind};
    use switchsim_core::{c64, Matrix};

    fn identity_table() -> ProbabilityTable {
        let one = c64(1.0, 0.0);
        let cfg = ScenarioConfig::new(ScenarioKind::FourEvent, Matrix::identity(2), Matrix::identity(2), [one, c64(0.0, 0.0)]);
        probability_distribution(&cfg).unwrap()
    }

    #[test]
    fn table_json_layout() {
        let v = table_json(&identity_table());
        let entries = v["entries"].as_object().unwrap();
        assert_eq!(entries.len(), 9);
        assert!((entries["(0,v)"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        assert!((v["sum"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        assert!((v["p_A"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(entries.keys().next().unwrap(), "(0,0)");
    }

    #[test]
    fn table_csv_layout() {
        let csv = table_csv(&identity_table()).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "alpha,beta,probability");
        assert_eq!(lines.len(), 10);
        assert!(lines.iter().any(|l| l.starts_with("0,v,")));
    }

    #[test]
    fn friend_json_layout() {
        let report = friend_report(SwitchVariant::new(VariantKind::Optical4Event)).unwrap();
        let counts = BTreeMap::new();
        let v = friend_json(&FriendRun { report: &report, seed: 3, sampled_m: 1, arrival_counts: &counts });
        assert!((v["M"]["1"].as_f64().unwrap() - 1.0).abs() < 1e-10);
        assert!((v["erase"]["\u{2212}"].as_f64().unwrap() - 0.5).abs() < 1e-10);
        assert!((v["post_state_purity"].as_f64().unwrap() - 1.0).abs() < 1e-10);

        let report = friend_report(SwitchVariant::new(VariantKind::Grav2Event)).unwrap();
        let v = friend_json(&FriendRun { report: &report, seed: 3, sampled_m: 0, arrival_counts: &counts });
        assert!(v.get("erase").is_none());
        assert_eq!(v["classification"], "distinguishable_as_2event");
        assert_eq!(v["distinct_arrival_labels"], 2);
    }

    #[test]
    fn event_map_layout() {
        let g = switch_circuit_4event();
        let em = immerse(&g, PlacementParams::default()).unwrap();
        let r = verify_immersion(&g, &em).unwrap();
        let v = event_map_json(&em, Some(&r));
        assert_eq!(v["time_slices"], 6);
        assert_eq!(v["points"].as_object().unwrap().len(), 10);
        assert_eq!(v["verification"]["order_preserved"], true);
        assert_eq!(v["points"]["S^i"]["x"].as_array().unwrap().len(), 3);
    }
}
