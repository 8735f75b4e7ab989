//! Net document format (`.pnet`), canonical serialization, and export of
//! traces, batches, and matrices.
//!
//! Documents are JSON with a `format_version` gate and a strict schema:
//! unknown fields are rejected with line/column diagnostics. Serialization
//! is canonical — sorted ids, sorted object keys, floats at 9 significant
//! digits — so equal nets produce byte-identical text. Sampling entries
//! keep their declared order; it determines the draw sequence.

mod csv;
mod svg;

pub use csv::{batch_csv, events_csv, matrix_csv, sweep_csv, trajectories_csv};
pub use svg::{heatmap_svg, timeline_svg};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::compose::FusionMap;
use crate::mc::SamplingSpec;
use crate::model::{ConflictPolicy, GoalPredicate, Net, Place, Resource, Transition};
use crate::validate::{validate_net, ValidationReport};

pub const FORMAT_VERSION: u32 = 1;

/// On-disk form of a net plus the optional fusion and sampling sections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetDocument {
    pub format_version: u32,
    #[serde(default)]
    pub policy: ConflictPolicy,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
    #[serde(default)]
    pub places: Vec<Place>,
    #[serde(default)]
    pub resources: Vec<Resource>,
    #[serde(default)]
    pub transitions: Vec<Transition>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal: Option<GoalPredicate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fusion: Option<FusionMap>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<SamplingSpec>,
}

impl NetDocument {
    pub fn from_net(net: &Net) -> Self {
        NetDocument {
            format_version: FORMAT_VERSION,
            policy: net.policy,
            metadata: net.metadata.clone(),
            places: net.places.clone(),
            resources: net.resources.clone(),
            transitions: net.transitions.clone(),
            goal: net.goal.clone(),
            fusion: None,
            sampling: None,
        }
    }

    pub fn into_net(self) -> Net {
        Net {
            places: self.places,
            resources: self.resources,
            transitions: self.transitions,
            goal: self.goal,
            policy: self.policy,
            metadata: self.metadata,
        }
    }

    pub fn to_net(&self) -> Net {
        self.clone().into_net()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{line}:{column}: syntax error: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{line}:{column}: schema violation: {message}")]
    Schema { line: usize, column: usize, message: String },
    #[error("unsupported format_version {found} (this build reads version {expected})")]
    Version { found: u32, expected: u32 },
    #[error("document is structurally invalid:\n{0}")]
    Invalid(ValidationReport),
    #[error("value {0} cannot be serialized (not finite)")]
    NonFiniteNumber(f64),
}

impl IoError {
    fn from_serde(err: serde_json::Error) -> Self {
        let (line, column) = (err.line(), err.column());
        let message = err.to_string();
        match err.classify() {
            serde_json::error::Category::Syntax | serde_json::error::Category::Eof => {
                IoError::Syntax { line, column, message }
            }
            _ => IoError::Schema { line, column, message },
        }
    }
}

/// Strict parse of a document: schema, version gate, no semantic checks.
pub fn parse_document(text: &str) -> Result<NetDocument, IoError> {
    let doc: NetDocument = serde_json::from_str(text).map_err(IoError::from_serde)?;
    if doc.format_version != FORMAT_VERSION {
        return Err(IoError::Version { found: doc.format_version, expected: FORMAT_VERSION });
    }
    Ok(doc)
}

/// Parses a net and requires it to pass structural validation.
pub fn parse_net(text: &str) -> Result<Net, IoError> {
    let net = parse_document(text)?.into_net();
    let report = validate_net(&net);
    if !report.is_valid() {
        return Err(IoError::Invalid(report));
    }
    Ok(net)
}

/// Canonical text for a net: collections sorted by id, arcs sorted by
/// target, keys sorted, floats at 9 significant digits.
pub fn serialize_net(net: &Net) -> Result<String, IoError> {
    serialize_document(&NetDocument::from_net(net))
}

pub fn serialize_document(doc: &NetDocument) -> Result<String, IoError> {
    let mut doc = doc.clone();
    canonicalize(&mut doc);
    let value = serde_json::to_value(&doc).map_err(IoError::from_serde)?;
    let mut out = String::new();
    write_value(&mut out, &value, 0)?;
    out.push('\n');
    Ok(out)
}

fn canonicalize(doc: &mut NetDocument) {
    doc.places.sort_by(|a, b| a.id.cmp(&b.id));
    doc.resources.sort_by(|a, b| a.id.cmp(&b.id));
    doc.transitions.sort_by(|a, b| a.id.cmp(&b.id));
    for t in &mut doc.transitions {
        t.inputs.sort_by(|a, b| a.place.cmp(&b.place));
        t.outputs.sort_by(|a, b| a.place.cmp(&b.place));
        t.inhibitors.sort();
        t.rates.sort_by(|a, b| a.resource.cmp(&b.resource));
    }
    if let Some(goal) = &mut doc.goal {
        goal.tokens.sort_by(|a, b| a.place.cmp(&b.place));
        goal.resources.sort_by(|a, b| a.resource.cmp(&b.resource));
    }
    if let Some(fusion) = &mut doc.fusion {
        fusion.places.sort_by(|a, b| a.id.cmp(&b.id));
        fusion.resources.sort_by(|a, b| a.id.cmp(&b.id));
        for group in &mut fusion.places {
            group.members.sort_by(|a, b| (&a.net, &a.place).cmp(&(&b.net, &b.place)));
        }
        for group in &mut fusion.resources {
            group.members.sort_by(|a, b| (&a.net, &a.resource).cmp(&(&b.net, &b.resource)));
        }
    }
    // Sampling entries keep their order: it is the draw sequence.
}

/// Canonical rendering of an arbitrary JSON value (sorted keys, canonical
/// floats); used for the auxiliary bundle files.
pub fn write_canonical_value(out: &mut String, value: &serde_json::Value) -> Result<(), IoError> {
    write_value(out, value, 0)
}

/// Rounds to 9 significant digits; idempotent for values already carrying
/// at most 9 significant digits.
pub fn round_sig9(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.8e}").parse::<f64>().expect("valid float literal")
}

/// Canonical text for a float: 9 significant digits, integral values as
/// `x.0`, no scientific notation.
pub fn format_f64(v: f64) -> Result<String, IoError> {
    if !v.is_finite() {
        return Err(IoError::NonFiniteNumber(v));
    }
    if v == 0.0 {
        return Ok("0.0".to_string());
    }
    let r = round_sig9(v);
    if r == r.trunc() && r.abs() < 1e15 {
        Ok(format!("{r:.1}"))
    } else {
        Ok(format!("{r}"))
    }
}

fn write_value(out: &mut String, value: &serde_json::Value, indent: usize) -> Result<(), IoError> {
    use serde_json::Value;
    const STEP: usize = 2;
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else {
                let f = n.as_f64().expect("number is one of u64/i64/f64");
                out.push_str(&format_f64(f)?);
            }
        }
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("strings always serialize"));
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return Ok(());
            }
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('\n');
                out.push_str(&" ".repeat(indent + STEP));
                write_value(out, item, indent + STEP)?;
            }
            out.push('\n');
            out.push_str(&" ".repeat(indent));
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return Ok(());
            }
            out.push('{');
            // serde_json maps are BTreeMaps: keys come out sorted.
            for (i, (key, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('\n');
                out.push_str(&" ".repeat(indent + STEP));
                out.push_str(&serde_json::to_string(key).expect("strings always serialize"));
                out.push_str(": ");
                write_value(out, item, indent + STEP)?;
            }
            out.push('\n');
            out.push_str(&" ".repeat(indent));
            out.push('}');
        }
    }
    Ok(())
}

/// RFC 4180-style quoting: fields containing commas, quotes, or newlines
/// are wrapped in double quotes with inner quotes doubled.
pub(crate) fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') || s.contains('\r') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Plain float form for CSV cells (shortest round-trip, deterministic).
pub(crate) fn csv_f64(v: f64) -> String {
    format!("{v}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DurationDistribution;

    fn minimal_text() -> &'static str {
        r#"{
  "format_version": 1,
  "places": [ { "id": "p1", "initial_tokens": 1 }, { "id": "p2" } ],
  "transitions": [
    {
      "id": "t",
      "duration": { "kind": "constant", "value": 2.0 },
      "inputs": [ { "place": "p1", "weight": 1 } ],
      "outputs": [ { "place": "p2", "weight": 1 } ]
    }
  ]
}"#
    }

    #[test]
    fn minimal_document_parses() {
        let net = parse_net(minimal_text()).unwrap();
        assert_eq!(net.places.len(), 2);
        assert_eq!(net.transitions[0].duration, DurationDistribution::constant(2.0));
    }

    #[test]
    fn unknown_field_is_rejected_with_position() {
        let text = minimal_text().replace("\"id\": \"p1\"", "\"id\": \"p1\", \"bogus\": 3");
        let err = parse_net(&text).unwrap_err();
        match err {
            IoError::Schema { line, column, message } => {
                assert!(message.contains("bogus"), "{message}");
                assert!(line >= 1 && column >= 1);
            }
            other => panic!("expected schema error, got {other}"),
        }
    }

    #[test]
    fn negative_arc_weight_is_schema_diagnostic() {
        let text = minimal_text().replace("\"weight\": 1 } ]", "\"weight\": -1 } ]");
        let err = parse_net(&text).unwrap_err();
        assert!(matches!(err, IoError::Schema { .. }), "{err}");
    }

    #[test]
    fn syntax_error_carries_location() {
        let err = parse_net("{ not json").unwrap_err();
        assert!(matches!(err, IoError::Syntax { line: 1, .. }), "{err}");
    }

    #[test]
    fn version_gate() {
        let text = minimal_text().replace("\"format_version\": 1", "\"format_version\": 99");
        let err = parse_net(&text).unwrap_err();
        assert!(matches!(err, IoError::Version { found: 99, .. }));
    }

    #[test]
    fn semantic_violations_are_reported() {
        let text = minimal_text().replace("\"place\": \"p1\"", "\"place\": \"missing\"");
        let err = parse_net(&text).unwrap_err();
        assert!(matches!(err, IoError::Invalid(_)), "{err}");
    }

    #[test]
    fn roundtrip_is_identity_and_canonical_form_idempotent() {
        let net = parse_net(minimal_text()).unwrap();
        let text1 = serialize_net(&net).unwrap();
        let reparsed = parse_net(&text1).unwrap();
        assert_eq!(reparsed, net);
        let text2 = serialize_net(&reparsed).unwrap();
        assert_eq!(text1, text2);
    }

    #[test]
    fn declaration_order_does_not_change_canonical_text() {
        let mut a = parse_net(minimal_text()).unwrap();
        let mut b = a.clone();
        b.places.reverse();
        a.transitions[0].inputs.push(crate::model::Arc::new("p2", 2));
        b.transitions[0].inputs.push(crate::model::Arc::new("p2", 2));
        b.transitions[0].inputs.reverse();
        assert_eq!(serialize_net(&a).unwrap(), serialize_net(&b).unwrap());
    }

    #[test]
    fn float_formatting_is_nine_significant_digits() {
        assert_eq!(format_f64(0.0).unwrap(), "0.0");
        assert_eq!(format_f64(60.0).unwrap(), "60.0");
        assert_eq!(format_f64(18.3).unwrap(), "18.3");
        assert_eq!(format_f64(-2.5).unwrap(), "-2.5");
        assert_eq!(format_f64(0.123456789).unwrap(), "0.123456789");
        assert_eq!(format_f64(0.1234567894).unwrap(), "0.123456789");
        assert_eq!(format_f64(123456789.4).unwrap(), "123456789.0");
        assert!(format_f64(f64::NAN).is_err());
    }

    #[test]
    fn round_sig9_is_idempotent() {
        for v in [18.3, 0.123456789, 1.0 / 3.0, 2.0_f64.sqrt(), 1e-7, 123456.789] {
            let once = round_sig9(v);
            assert_eq!(round_sig9(once), once, "v = {v}");
        }
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }

    #[test]
    fn document_sections_roundtrip() {
        let mut doc = NetDocument::from_net(&parse_net(minimal_text()).unwrap());
        doc.sampling = Some(crate::mc::SamplingSpec {
            entries: vec![crate::mc::SampleEntry {
                target: crate::mc::SampleTarget::InitialTokens { place: "p1".into() },
                distribution: crate::mc::SampleDistribution::IntegerUniform { low: 1, high: 4 },
            }],
        });
        doc.fusion = Some(crate::compose::FusionMap::default());
        let text = serialize_document(&doc).unwrap();
        let parsed = parse_document(&text).unwrap();
        assert_eq!(parsed, doc);
    }
}
