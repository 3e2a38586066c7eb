//! Canonical JSON policy format.
//!
//! Parsing walks a `serde_json::Value` so schema errors carry the JSON
//! path of the offending key. Serialization emits a canonical form: object
//! keys sorted, set-valued fields in lexicographic order, so equal
//! policies always produce identical bytes.

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use serde_json::{json, Map, Value};

use super::{
    DataElement, DataRecipient, LayeredPrivacyPolicy, PrivacyModel, Purpose, PurposeEdge,
    RecipientKind, Retention, RetentionType,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "camelCase")]
pub enum EdgeKind {
    Composition,
    Inheritance,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolicyParseError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("dangling {kind:?} edge {parent} -> {child}")]
    DanglingEdge { kind: EdgeKind, parent: String, child: String },
}

fn schema(path: &str, message: impl Into<String>) -> PolicyParseError {
    PolicyParseError::Schema { path: path.to_string(), message: message.into() }
}

/// Parses a UTF-8 policy document. In strict mode (the default for the
/// CLI) unknown object keys are rejected; `lenient` ignores them.
pub fn parse_policy(text: &str, lenient: bool) -> Result<LayeredPrivacyPolicy, PolicyParseError> {
    let value: Value = serde_json::from_str(text).map_err(|e| PolicyParseError::Syntax {
        line: e.line(),
        col: e.column(),
        message: e.to_string(),
    })?;
    parse_policy_value(&value, "$", lenient)
}

fn expect_object<'a>(
    value: &'a Value,
    path: &str,
) -> Result<&'a Map<String, Value>, PolicyParseError> {
    value.as_object().ok_or_else(|| schema(path, "expected object"))
}

fn expect_array<'a>(value: &'a Value, path: &str) -> Result<&'a Vec<Value>, PolicyParseError> {
    value.as_array().ok_or_else(|| schema(path, "expected array"))
}

fn get_string(
    obj: &Map<String, Value>,
    key: &str,
    path: &str,
) -> Result<String, PolicyParseError> {
    match obj.get(key) {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(_) => Err(schema(&format!("{path}.{key}"), "expected string")),
        None => Err(schema(path, format!("missing key {key:?}"))),
    }
}

fn get_bool(obj: &Map<String, Value>, key: &str, path: &str) -> Result<bool, PolicyParseError> {
    match obj.get(key) {
        Some(Value::Bool(b)) => Ok(*b),
        Some(_) => Err(schema(&format!("{path}.{key}"), "expected boolean")),
        None => Err(schema(path, format!("missing key {key:?}"))),
    }
}

fn check_keys(
    obj: &Map<String, Value>,
    allowed: &[&str],
    path: &str,
    lenient: bool,
) -> Result<(), PolicyParseError> {
    if lenient {
        return Ok(());
    }
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(schema(&format!("{path}.{key}"), "unknown key"));
        }
    }
    Ok(())
}

fn parse_policy_value(
    value: &Value,
    path: &str,
    lenient: bool,
) -> Result<LayeredPrivacyPolicy, PolicyParseError> {
    let obj = expect_object(value, path)?;
    check_keys(
        obj,
        &[
            "version",
            "name",
            "lang",
            "ppURI",
            "underlyingPolicies",
            "purposes",
            "composition",
            "hierarchy",
        ],
        path,
        lenient,
    )?;

    let mut policy = LayeredPrivacyPolicy {
        version: get_string(obj, "version", path)?,
        name: get_string(obj, "name", path)?,
        lang: get_string(obj, "lang", path)?,
        pp_uri: get_string(obj, "ppURI", path)?,
        ..Default::default()
    };

    if let Some(upps) = obj.get("underlyingPolicies") {
        let upp_path = format!("{path}.underlyingPolicies");
        for (i, upp) in expect_array(upps, &upp_path)?.iter().enumerate() {
            policy
                .underlying_policies
                .push(parse_policy_value(upp, &format!("{upp_path}[{i}]"), lenient)?);
        }
    }

    let purposes_path = format!("{path}.purposes");
    let purposes = obj
        .get("purposes")
        .ok_or_else(|| schema(path, "missing key \"purposes\""))?;
    for (i, pv) in expect_array(purposes, &purposes_path)?.iter().enumerate() {
        let purpose = parse_purpose(pv, &format!("{purposes_path}[{i}]"), lenient)?;
        if policy.purposes.contains_key(&purpose.id) {
            return Err(schema(
                &format!("{purposes_path}[{i}].id"),
                format!("duplicate purpose id {:?}", purpose.id),
            ));
        }
        policy.purposes.insert(purpose.id.clone(), purpose);
    }

    policy.composition =
        parse_edges(obj.get("composition"), &format!("{path}.composition"), lenient)?;
    policy.hierarchy = parse_edges(obj.get("hierarchy"), &format!("{path}.hierarchy"), lenient)?;

    for (kind, edges) in [
        (EdgeKind::Composition, &policy.composition),
        (EdgeKind::Inheritance, &policy.hierarchy),
    ] {
        for edge in edges {
            if !policy.purposes.contains_key(&edge.parent)
                || !policy.purposes.contains_key(&edge.child)
            {
                return Err(PolicyParseError::DanglingEdge {
                    kind,
                    parent: edge.parent.clone(),
                    child: edge.child.clone(),
                });
            }
        }
    }

    // single inheritance: a purpose may have at most one parent
    let mut seen_children = BTreeSet::new();
    for edge in &policy.hierarchy {
        if !seen_children.insert(&edge.child) {
            return Err(schema(
                &format!("{path}.hierarchy"),
                format!("purpose {:?} has multiple inheritance parents", edge.child),
            ));
        }
    }

    Ok(policy)
}

fn parse_edges(
    value: Option<&Value>,
    path: &str,
    lenient: bool,
) -> Result<BTreeSet<PurposeEdge>, PolicyParseError> {
    let mut edges = BTreeSet::new();
    let Some(value) = value else { return Ok(edges) };
    for (i, ev) in expect_array(value, path)?.iter().enumerate() {
        let epath = format!("{path}[{i}]");
        let obj = expect_object(ev, &epath)?;
        check_keys(obj, &["parent", "child"], &epath, lenient)?;
        let edge = PurposeEdge::new(
            get_string(obj, "parent", &epath)?,
            get_string(obj, "child", &epath)?,
        );
        if edge.parent == edge.child {
            return Err(schema(&epath, format!("self-edge on {:?}", edge.parent)));
        }
        if !edges.insert(edge) {
            return Err(schema(&epath, "duplicate edge"));
        }
    }
    Ok(edges)
}

fn parse_purpose(value: &Value, path: &str, lenient: bool) -> Result<Purpose, PolicyParseError> {
    let obj = expect_object(value, path)?;
    check_keys(
        obj,
        &[
            "id",
            "name",
            "optOut",
            "required",
            "descr",
            "recipients",
            "retention",
            "privacyModel",
            "data",
        ],
        path,
        lenient,
    )?;

    let id = get_string(obj, "id", path)?;
    if id.is_empty() {
        return Err(schema(&format!("{path}.id"), "empty purpose id"));
    }
    let name = get_string(obj, "name", path)?;
    if name.is_empty() {
        return Err(schema(&format!("{path}.name"), "empty purpose name"));
    }

    let mut recipients = BTreeSet::new();
    if let Some(rv) = obj.get("recipients") {
        let rpath = format!("{path}.recipients");
        for (i, r) in expect_array(rv, &rpath)?.iter().enumerate() {
            let rp = format!("{rpath}[{i}]");
            let robj = expect_object(r, &rp)?;
            check_keys(robj, &["name", "kind"], &rp, lenient)?;
            let rname = get_string(robj, "name", &rp)?;
            if rname.is_empty() {
                return Err(schema(&format!("{rp}.name"), "empty recipient name"));
            }
            let kind_str = get_string(robj, "kind", &rp)?;
            let kind = RecipientKind::from_str(&kind_str).ok_or_else(|| {
                schema(&format!("{rp}.kind"), format!("unknown recipient kind {kind_str:?}"))
            })?;
            if !recipients.insert(DataRecipient::new(rname, kind)) {
                return Err(schema(&rp, "duplicate recipient"));
            }
        }
    }

    let retention_value = obj
        .get("retention")
        .ok_or_else(|| schema(path, "missing key \"retention\""))?;
    let retention = parse_retention(retention_value, &format!("{path}.retention"), lenient)?;

    let privacy_model = match obj.get("privacyModel") {
        None | Some(Value::Null) => None,
        Some(pmv) => Some(parse_privacy_model(pmv, &format!("{path}.privacyModel"), lenient)?),
    };

    let mut data = BTreeSet::new();
    if let Some(dv) = obj.get("data") {
        let dpath = format!("{path}.data");
        for (i, d) in expect_array(dv, &dpath)?.iter().enumerate() {
            let dp = format!("{dpath}[{i}]");
            let qualified = d.as_str().ok_or_else(|| schema(&dp, "expected string"))?;
            let element = DataElement::parse(qualified).ok_or_else(|| {
                schema(&dp, format!("{qualified:?} is not a qualified \"Entity.field\" name"))
            })?;
            if !data.insert(element) {
                return Err(schema(&dp, "duplicate data element"));
            }
        }
    }

    Ok(Purpose {
        id,
        name,
        opt_out: get_bool(obj, "optOut", path)?,
        required: get_bool(obj, "required", path)?,
        descr: get_string(obj, "descr", path)?,
        recipients,
        retention,
        privacy_model,
        data,
    })
}

fn parse_retention(
    value: &Value,
    path: &str,
    lenient: bool,
) -> Result<Retention, PolicyParseError> {
    let obj = expect_object(value, path)?;
    check_keys(obj, &["type", "pointInTime"], path, lenient)?;
    let type_str = get_string(obj, "type", path)?;
    let rtype = RetentionType::from_str(&type_str).ok_or_else(|| {
        schema(&format!("{path}.type"), format!("unknown retention type {type_str:?}"))
    })?;
    let point_in_time = match obj.get("pointInTime") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|_| {
            schema(&format!("{path}.pointInTime"), format!("{s:?} is not a YYYY-MM-DD date"))
        })?),
        Some(_) => return Err(schema(&format!("{path}.pointInTime"), "expected string")),
    };
    Retention::new(rtype, point_in_time).map_err(|e| schema(path, e.to_string()))
}

fn parse_privacy_model(
    value: &Value,
    path: &str,
    lenient: bool,
) -> Result<PrivacyModel, PolicyParseError> {
    let obj = expect_object(value, path)?;
    check_keys(obj, &["name", "attributes"], path, lenient)?;
    let name = get_string(obj, "name", path)?;
    if name.is_empty() {
        return Err(schema(&format!("{path}.name"), "empty privacy model name"));
    }
    let mut attributes = BTreeMap::new();
    if let Some(av) = obj.get("attributes") {
        let apath = format!("{path}.attributes");
        let aobj = expect_object(av, &apath)?;
        for (key, v) in aobj {
            let ap = format!("{apath}.{key}");
            if key.is_empty() {
                return Err(schema(&apath, "empty attribute key"));
            }
            let num = v.as_f64().ok_or_else(|| schema(&ap, "expected number"))?;
            if !num.is_finite() {
                return Err(schema(&ap, "attribute value must be finite"));
            }
            attributes.insert(key.clone(), num);
        }
    }
    Ok(PrivacyModel { name, attributes })
}

/// Serializes a policy to its canonical textual form. Deterministic:
/// `parse_policy(serialize_policy(p))` reproduces `p`, and equal policies
/// serialize to identical bytes.
pub fn serialize_policy(policy: &LayeredPrivacyPolicy) -> String {
    let mut text = serde_json::to_string_pretty(&policy_to_value(policy))
        .expect("policy serialization cannot fail");
    text.push('\n');
    text
}

/// Canonical JSON value of a policy, reusable inside larger documents.
pub fn policy_to_value(policy: &LayeredPrivacyPolicy) -> Value {
    json!({
        "version": policy.version,
        "name": policy.name,
        "lang": policy.lang,
        "ppURI": policy.pp_uri,
        "underlyingPolicies": policy.underlying_policies.iter().map(policy_to_value).collect::<Vec<_>>(),
        "purposes": policy.purposes.values().map(purpose_value).collect::<Vec<_>>(),
        "composition": policy.composition.iter().map(edge_value).collect::<Vec<_>>(),
        "hierarchy": policy.hierarchy.iter().map(edge_value).collect::<Vec<_>>(),
    })
}

fn edge_value(edge: &PurposeEdge) -> Value {
    json!({ "parent": edge.parent, "child": edge.child })
}

fn purpose_value(purpose: &Purpose) -> Value {
    let mut obj = Map::new();
    obj.insert("id".into(), json!(purpose.id));
    obj.insert("name".into(), json!(purpose.name));
    obj.insert("optOut".into(), json!(purpose.opt_out));
    obj.insert("required".into(), json!(purpose.required));
    obj.insert("descr".into(), json!(purpose.descr));
    obj.insert(
        "recipients".into(),
        json!(purpose
            .recipients
            .iter()
            .map(|r| json!({ "name": r.name, "kind": r.kind.as_str() }))
            .collect::<Vec<_>>()),
    );
    let mut retention = Map::new();
    retention.insert("type".into(), json!(purpose.retention.rtype().as_str()));
    if let Some(date) = purpose.retention.point_in_time() {
        retention.insert("pointInTime".into(), json!(date.format("%Y-%m-%d").to_string()));
    }
    obj.insert("retention".into(), Value::Object(retention));
    if let Some(pm) = &purpose.privacy_model {
        obj.insert(
            "privacyModel".into(),
            json!({ "name": pm.name, "attributes": pm.attributes }),
        );
    }
    obj.insert(
        "data".into(),
        json!(purpose.data.iter().map(|d| d.qualified_name()).collect::<Vec<_>>()),
    );
    Value::Object(obj)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "version": "1.0", "name": "min", "lang": "en", "ppURI": "https://example.org/pp",
        "purposes": [{
            "id": "p1", "name": "Analytics", "optOut": false, "required": true,
            "descr": "", "recipients": [], "retention": {"type": "indefinite"},
            "data": []
        }]
    }"#;

    #[test]
    fn minimal_policy_parses() {
        let policy = parse_policy(MINIMAL, false).unwrap();
        assert_eq!(policy.purposes.len(), 1);
        assert!(policy.composition.is_empty());
    }

    #[test]
    fn dangling_edge_rejected() {
        let text = MINIMAL.replace(
            "\"purposes\"",
            "\"composition\": [{\"parent\": \"p1\", \"child\": \"px\"}], \"purposes\"",
        );
        match parse_policy(&text, false) {
            Err(PolicyParseError::DanglingEdge { kind, child, .. }) => {
                assert_eq!(kind, EdgeKind::Composition);
                assert_eq!(child, "px");
            }
            other => panic!("expected DanglingEdge, got {other:?}"),
        }
    }

    #[test]
    fn unknown_key_strict_vs_lenient() {
        let text = MINIMAL.replace("\"version\"", "\"extra\": 1, \"version\"");
        assert!(matches!(parse_policy(&text, false), Err(PolicyParseError::Schema { .. })));
        assert!(parse_policy(&text, true).is_ok());
    }

    #[test]
    fn malformed_json_is_syntax_error() {
        match parse_policy("{\"version\": ", false) {
            Err(PolicyParseError::Syntax { line, col, .. }) => {
                assert!(line >= 1 && col >= 1);
            }
            other => panic!("expected Syntax, got {other:?}"),
        }
    }

    #[test]
    fn multiple_inheritance_rejected() {
        let text = r#"{
            "version": "1.0", "name": "mi", "lang": "en", "ppURI": "u",
            "purposes": [
                {"id": "a", "name": "a", "optOut": false, "required": true, "descr": "",
                 "recipients": [], "retention": {"type": "indefinite"}, "data": []},
                {"id": "b", "name": "b", "optOut": false, "required": true, "descr": "",
                 "recipients": [], "retention": {"type": "indefinite"}, "data": []},
                {"id": "c", "name": "c", "optOut": false, "required": true, "descr": "",
                 "recipients": [], "retention": {"type": "indefinite"}, "data": []}
            ],
            "hierarchy": [{"parent": "a", "child": "c"}, {"parent": "b", "child": "c"}]
        }"#;
        match parse_policy(text, false) {
            Err(PolicyParseError::Schema { message, .. }) => {
                assert!(message.contains("multiple inheritance"), "{message}");
            }
            other => panic!("expected Schema, got {other:?}"),
        }
    }

    #[test]
    fn empty_purpose_set_serializes_canonically() {
        let policy = LayeredPrivacyPolicy {
            version: "1.0".into(),
            name: "empty".into(),
            lang: "en".into(),
            pp_uri: "https://example.org".into(),
            ..Default::default()
        };
        let text = serialize_policy(&policy);
        let reparsed = parse_policy(&text, false).unwrap();
        assert_eq!(policy, reparsed);
        assert_eq!(text, serialize_policy(&reparsed));
    }

    #[test]
    fn round_trip_minimal() {
        let policy = parse_policy(MINIMAL, false).unwrap();
        let text = serialize_policy(&policy);
        assert_eq!(parse_policy(&text, false).unwrap(), policy);
    }
}
