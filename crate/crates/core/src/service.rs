//! Web services, Petri-net service nets, the personal-data inspection
//! function `pd`, and purpose coverage of services.
//!
//! Only the static net structure matters here: `pd` takes the union of
//! the personal data carried by transitions, so markings and firing are
//! never simulated.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::lpl::{DataElement, DataRecipient, LayeredPrivacyPolicy, RecipientKind};

/// One operation of a service net.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Transition {
    pub id: String,
    pub label: String,
    pub data: BTreeSet<DataElement>,
}

/// An arc of the net. Bipartite: place to transition or transition to
/// place.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Arc {
    pub from: String,
    pub to: String,
}

/// Place-transition net describing the behaviour of a web service.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ServiceNet {
    pub places: BTreeSet<String>,
    pub transitions: Vec<Transition>,
    pub arcs: BTreeSet<Arc>,
    pub input: String,
    pub output: String,
}

impl ServiceNet {
    /// The minimal net `input -> t -> output` with a single transition.
    pub fn minimal(transition_id: &str, label: &str, data: BTreeSet<DataElement>) -> Self {
        ServiceNet {
            places: BTreeSet::from(["i".to_string(), "o".to_string()]),
            transitions: vec![Transition { id: transition_id.to_string(), label: label.to_string(), data }],
            arcs: BTreeSet::from([
                Arc { from: "i".into(), to: transition_id.to_string() },
                Arc { from: transition_id.to_string(), to: "o".into() },
            ]),
            input: "i".into(),
            output: "o".into(),
        }
    }
}

/// A composable web service. Leaves carry a net; composites may only
/// list component service names.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WebService {
    pub name: String,
    pub desc: String,
    pub loc: String,
    pub url: String,
    pub components: BTreeSet<String>,
    pub net: Option<ServiceNet>,
    pub recipients: BTreeSet<DataRecipient>,
    pub underlying_policies: BTreeSet<String>,
}

/// Pairs a web service with a purpose governing it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct GovEdge {
    pub service: String,
    pub purpose: String,
}

/// A set of services plus the gov relation, as loaded from a service
/// model file.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ServiceModel {
    pub services: BTreeMap<String, WebService>,
    pub gov: BTreeSet<GovEdge>,
}

/// Result of inspecting the personal data processing of a service.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PdResult {
    pub data: BTreeSet<DataElement>,
    pub recipients: BTreeSet<DataRecipient>,
    pub underlying_policies: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ServiceError {
    #[error("unknown service {0:?}")]
    UnknownService(String),
    #[error("unknown purpose {0:?} in gov edge for service {1:?}")]
    UnknownPurpose(String, String),
    #[error("service {0:?} transitively contains itself")]
    ComponentCycle(String),
    #[error("leaf service {0:?} has no service net")]
    MissingNet(String),
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("service net of {service:?}: {problem}")]
    InvalidNet { service: String, problem: String },
}

/// Checks the structural invariants of a net: input and output are
/// distinct places, arcs are bipartite, and every transition lies on a
/// directed input → output path.
pub fn validate_net(net: &ServiceNet) -> Result<(), Vec<String>> {
    let mut errors = Vec::new();
    if !net.places.contains(&net.input) {
        errors.push(format!("input place {:?} is not a place", net.input));
    }
    if !net.places.contains(&net.output) {
        errors.push(format!("output place {:?} is not a place", net.output));
    }
    if net.input == net.output {
        errors.push("input and output places must differ".to_string());
    }
    let transition_ids: BTreeSet<&str> = net.transitions.iter().map(|t| t.id.as_str()).collect();
    let mut seen = BTreeSet::new();
    for t in &net.transitions {
        if !seen.insert(t.id.as_str()) {
            errors.push(format!("duplicate transition id {:?}", t.id));
        }
        if net.places.contains(&t.id) {
            errors.push(format!("id {:?} is both a place and a transition", t.id));
        }
    }
    for arc in &net.arcs {
        let from_place = net.places.contains(&arc.from);
        let from_transition = transition_ids.contains(arc.from.as_str());
        let to_place = net.places.contains(&arc.to);
        let to_transition = transition_ids.contains(arc.to.as_str());
        if !(from_place && to_transition || from_transition && to_place) {
            errors.push(format!("non-bipartite arc {} -> {}", arc.from, arc.to));
        }
    }
    if errors.is_empty() {
        // transitions must be forward-reachable from input and reach output
        let forward = reachable_ids(&net.arcs, &net.input, false);
        let backward = reachable_ids(&net.arcs, &net.output, true);
        for t in &net.transitions {
            if !forward.contains(t.id.as_str()) || !backward.contains(t.id.as_str()) {
                errors.push(format!("transition {:?} is not on an input-output path", t.id));
            }
        }
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

fn reachable_ids<'a>(arcs: &'a BTreeSet<Arc>, start: &'a str, reverse: bool) -> BTreeSet<&'a str> {
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(node) = queue.pop_front() {
        for arc in arcs {
            let (from, to) = if reverse { (&arc.to, &arc.from) } else { (&arc.from, &arc.to) };
            if from == node && seen.insert(to) {
                queue.push_back(to);
            }
        }
    }
    seen
}

/// The inspection function: unions the transition data of the service's
/// own net with the `pd` of every component, and carries the declared
/// recipients and underlying policies of the whole subtree.
pub fn pd(model: &ServiceModel, service: &str) -> Result<PdResult, ServiceError> {
    let mut result = PdResult::default();
    let mut visited = BTreeSet::new();
    pd_into(model, service, &mut result, &mut visited)?;
    Ok(result)
}

fn pd_into(
    model: &ServiceModel,
    name: &str,
    acc: &mut PdResult,
    visited: &mut BTreeSet<String>,
) -> Result<(), ServiceError> {
    if !visited.insert(name.to_string()) {
        return Ok(());
    }
    let ws = model
        .services
        .get(name)
        .ok_or_else(|| ServiceError::UnknownService(name.to_string()))?;
    if let Some(net) = &ws.net {
        for t in &net.transitions {
            acc.data.extend(t.data.iter().cloned());
        }
    }
    acc.recipients.extend(ws.recipients.iter().cloned());
    acc.underlying_policies.extend(ws.underlying_policies.iter().cloned());
    for component in &ws.components {
        pd_into(model, component, acc, visited)?;
    }
    Ok(())
}

/// Per-service coverage verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ServiceCoverage {
    pub service: String,
    pub governed: bool,
    pub covered: bool,
    pub governing_purposes: BTreeSet<String>,
    /// Smallest missing sets over all governing purposes (empty when covered).
    pub missing_data: Vec<String>,
    pub missing_recipients: Vec<String>,
    /// Underlying policies referenced by the service but absent from the
    /// policy's underlyingPolicies. Reported, and counted as uncovering.
    pub missing_underlying_policies: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CoverageReport {
    pub services: Vec<ServiceCoverage>,
    pub all_covered: bool,
    pub all_governed: bool,
    /// How underlying-policy membership is read: a service's referenced
    /// policies must each appear by name among the policy's
    /// underlyingPolicies.
    pub underlying_policy_reading: &'static str,
}

/// Checks that every service is governed by at least one purpose and that
/// some single governing purpose covers its personal data, recipients and
/// underlying-policy references.
pub fn check_coverage(
    policy: &LayeredPrivacyPolicy,
    model: &ServiceModel,
) -> Result<CoverageReport, ServiceError> {
    for edge in &model.gov {
        if !model.services.contains_key(&edge.service) {
            return Err(ServiceError::UnknownService(edge.service.clone()));
        }
        if !policy.purposes.contains_key(&edge.purpose) {
            return Err(ServiceError::UnknownPurpose(edge.purpose.clone(), edge.service.clone()));
        }
    }
    check_component_dag(model)?;

    let known_upps: BTreeSet<&str> =
        policy.underlying_policies.iter().map(|p| p.name.as_str()).collect();

    let mut services = Vec::new();
    for (name, _) in &model.services {
        let inspected = pd(model, name)?;
        let governing: BTreeSet<String> = model
            .gov
            .iter()
            .filter(|e| &e.service == name)
            .map(|e| e.purpose.clone())
            .collect();
        let governed = !governing.is_empty();

        let missing_upps: Vec<String> = inspected
            .underlying_policies
            .iter()
            .filter(|u| !known_upps.contains(u.as_str()))
            .cloned()
            .collect();

        // best single governing purpose: smallest combined missing sets
        let mut best: Option<(Vec<String>, Vec<String>)> = None;
        for pid in &governing {
            let purpose = &policy.purposes[pid];
            let missing_data: Vec<String> = inspected
                .data
                .difference(&purpose.data)
                .map(|d| d.qualified_name())
                .collect();
            let missing_recipients: Vec<String> = inspected
                .recipients
                .difference(&purpose.recipients)
                .map(|r| format!("{} ({})", r.name, r.kind.as_str()))
                .collect();
            let better = match &best {
                None => true,
                Some((bd, br)) => {
                    missing_data.len() + missing_recipients.len() < bd.len() + br.len()
                }
            };
            if better {
                best = Some((missing_data, missing_recipients));
            }
        }
        let (missing_data, missing_recipients) = best.unwrap_or_default();
        let covered = governed
            && missing_data.is_empty()
            && missing_recipients.is_empty()
            && missing_upps.is_empty();
        services.push(ServiceCoverage {
            service: name.clone(),
            governed,
            covered,
            governing_purposes: governing,
            missing_data,
            missing_recipients,
            missing_underlying_policies: missing_upps,
        });
    }
    let all_covered = services.iter().all(|s| s.covered);
    let all_governed = services.iter().all(|s| s.governed);
    Ok(CoverageReport {
        services,
        all_covered,
        all_governed,
        underlying_policy_reading:
            "each referenced underlying policy name must appear among the policy's underlyingPolicies",
    })
}

fn check_component_dag(model: &ServiceModel) -> Result<(), ServiceError> {
    fn visit<'a>(
        model: &'a ServiceModel,
        name: &'a str,
        state: &mut BTreeMap<&'a str, u8>,
    ) -> Result<(), ServiceError> {
        match state.get(name) {
            Some(1) => return Err(ServiceError::ComponentCycle(name.to_string())),
            Some(2) => return Ok(()),
            _ => {}
        }
        state.insert(name, 1);
        let ws = model
            .services
            .get(name)
            .ok_or_else(|| ServiceError::UnknownService(name.to_string()))?;
        for component in &ws.components {
            visit(model, component, state)?;
        }
        state.insert(name, 2);
        Ok(())
    }
    let mut state = BTreeMap::new();
    for name in model.services.keys() {
        visit(model, name, &mut state)?;
    }
    Ok(())
}

/// Checks the service-level invariants of a whole model: components
/// resolve and are acyclic, leaves carry nets, and every net is
/// structurally sound.
pub fn validate_model(model: &ServiceModel) -> Result<(), ServiceError> {
    check_component_dag(model)?;
    for (name, ws) in &model.services {
        if ws.components.is_empty() && ws.net.is_none() {
            return Err(ServiceError::MissingNet(name.clone()));
        }
        if let Some(net) = &ws.net {
            validate_net(net).map_err(|errors| ServiceError::InvalidNet {
                service: name.clone(),
                problem: errors.join("; "),
            })?;
        }
    }
    Ok(())
}

// --- service model JSON -------------------------------------------------

fn sschema(path: &str, message: impl Into<String>) -> ServiceError {
    ServiceError::Schema { path: path.to_string(), message: message.into() }
}

/// Parses a service model document:
/// `{"services": [...], "gov": [{"service", "purpose"}]}`.
pub fn parse_service_model(text: &str) -> Result<ServiceModel, ServiceError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ServiceError::Syntax {
        line: e.line(),
        col: e.column(),
        message: e.to_string(),
    })?;
    service_model_from_value(&value, "$")
}

/// Builds a model from an already-parsed JSON value (used when the
/// services live inside an extraction result document).
pub fn service_model_from_value(value: &Value, path: &str) -> Result<ServiceModel, ServiceError> {
    let obj = value.as_object().ok_or_else(|| sschema(path, "expected object"))?;
    let mut model = ServiceModel::default();
    let services = obj
        .get("services")
        .and_then(Value::as_array)
        .ok_or_else(|| sschema(path, "missing \"services\" array"))?;
    for (i, sv) in services.iter().enumerate() {
        let sp = format!("{path}.services[{i}]");
        let ws = parse_service(sv, &sp)?;
        if model.services.contains_key(&ws.name) {
            return Err(sschema(&sp, format!("duplicate service name {:?}", ws.name)));
        }
        model.services.insert(ws.name.clone(), ws);
    }
    if let Some(gov) = obj.get("gov") {
        let gpath = format!("{path}.gov");
        let arr = gov.as_array().ok_or_else(|| sschema(&gpath, "expected array"))?;
        for (i, gv) in arr.iter().enumerate() {
            let gp = format!("{gpath}[{i}]");
            let gobj = gv.as_object().ok_or_else(|| sschema(&gp, "expected object"))?;
            let service = str_field(gobj, "service", &gp)?;
            let purpose = str_field(gobj, "purpose", &gp)?;
            model.gov.insert(GovEdge { service, purpose });
        }
    }
    for (name, ws) in &model.services {
        for component in &ws.components {
            if !model.services.contains_key(component) {
                return Err(sschema(
                    &format!("{path}.services"),
                    format!("service {name:?} references unknown component {component:?}"),
                ));
            }
        }
    }
    Ok(model)
}

fn str_field(obj: &Map<String, Value>, key: &str, path: &str) -> Result<String, ServiceError> {
    obj.get(key)
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| sschema(path, format!("missing string key {key:?}")))
}

fn parse_service(value: &Value, path: &str) -> Result<WebService, ServiceError> {
    let obj = value.as_object().ok_or_else(|| sschema(path, "expected object"))?;
    let mut ws = WebService {
        name: str_field(obj, "name", path)?,
        desc: obj.get("desc").and_then(Value::as_str).unwrap_or_default().to_string(),
        loc: obj.get("loc").and_then(Value::as_str).unwrap_or_default().to_string(),
        url: obj.get("url").and_then(Value::as_str).unwrap_or_default().to_string(),
        ..Default::default()
    };
    if let Some(components) = obj.get("components") {
        let cpath = format!("{path}.components");
        let arr = components.as_array().ok_or_else(|| sschema(&cpath, "expected array"))?;
        for c in arr {
            let name = c.as_str().ok_or_else(|| sschema(&cpath, "expected string"))?;
            ws.components.insert(name.to_string());
        }
    }
    if let Some(recipients) = obj.get("recipients") {
        let rpath = format!("{path}.recipients");
        let arr = recipients.as_array().ok_or_else(|| sschema(&rpath, "expected array"))?;
        for (i, r) in arr.iter().enumerate() {
            let rp = format!("{rpath}[{i}]");
            let robj = r.as_object().ok_or_else(|| sschema(&rp, "expected object"))?;
            let kind_str = str_field(robj, "kind", &rp)?;
            let kind = RecipientKind::from_str(&kind_str)
                .ok_or_else(|| sschema(&rp, format!("unknown recipient kind {kind_str:?}")))?;
            ws.recipients.insert(DataRecipient::new(str_field(robj, "name", &rp)?, kind));
        }
    }
    if let Some(upps) = obj.get("underlyingPolicies") {
        let upath = format!("{path}.underlyingPolicies");
        let arr = upps.as_array().ok_or_else(|| sschema(&upath, "expected array"))?;
        for u in arr {
            let name = u.as_str().ok_or_else(|| sschema(&upath, "expected string"))?;
            ws.underlying_policies.insert(name.to_string());
        }
    }
    if let Some(net) = obj.get("net") {
        if !net.is_null() {
            ws.net = Some(parse_net(net, &format!("{path}.net"))?);
        }
    }
    Ok(ws)
}

fn parse_net(value: &Value, path: &str) -> Result<ServiceNet, ServiceError> {
    let obj = value.as_object().ok_or_else(|| sschema(path, "expected object"))?;
    let mut net = ServiceNet {
        input: str_field(obj, "input", path)?,
        output: str_field(obj, "output", path)?,
        ..Default::default()
    };
    let places = obj
        .get("places")
        .and_then(Value::as_array)
        .ok_or_else(|| sschema(path, "missing \"places\" array"))?;
    for p in places {
        let name = p.as_str().ok_or_else(|| sschema(&format!("{path}.places"), "expected string"))?;
        net.places.insert(name.to_string());
    }
    let transitions = obj
        .get("transitions")
        .and_then(Value::as_array)
        .ok_or_else(|| sschema(path, "missing \"transitions\" array"))?;
    for (i, t) in transitions.iter().enumerate() {
        let tp = format!("{path}.transitions[{i}]");
        let tobj = t.as_object().ok_or_else(|| sschema(&tp, "expected object"))?;
        let mut transition = Transition {
            id: str_field(tobj, "id", &tp)?,
            label: tobj.get("label").and_then(Value::as_str).unwrap_or_default().to_string(),
            data: BTreeSet::new(),
        };
        if let Some(data) = tobj.get("data") {
            let dpath = format!("{tp}.data");
            let arr = data.as_array().ok_or_else(|| sschema(&dpath, "expected array"))?;
            for d in arr {
                let qualified =
                    d.as_str().ok_or_else(|| sschema(&dpath, "expected string"))?;
                let element = DataElement::parse(qualified).ok_or_else(|| {
                    sschema(&dpath, format!("{qualified:?} is not an \"Entity.field\" name"))
                })?;
                transition.data.insert(element);
            }
        }
        net.transitions.push(transition);
    }
    let arcs = obj
        .get("arcs")
        .and_then(Value::as_array)
        .ok_or_else(|| sschema(path, "missing \"arcs\" array"))?;
    for (i, a) in arcs.iter().enumerate() {
        let ap = format!("{path}.arcs[{i}]");
        let pair = a.as_array().filter(|p| p.len() == 2).ok_or_else(|| {
            sschema(&ap, "expected [from, to] pair")
        })?;
        let from = pair[0].as_str().ok_or_else(|| sschema(&ap, "expected string"))?;
        let to = pair[1].as_str().ok_or_else(|| sschema(&ap, "expected string"))?;
        net.arcs.insert(Arc { from: from.to_string(), to: to.to_string() });
    }
    Ok(net)
}

/// Canonical JSON for a service model (same schema `parse_service_model`
/// accepts).
pub fn serialize_service_model(model: &ServiceModel) -> String {
    let mut text = serde_json::to_string_pretty(&service_model_value(model))
        .expect("service model serialization cannot fail");
    text.push('\n');
    text
}

/// The `{"services": [...], "gov": [...]}` value, reusable inside larger
/// documents.
pub fn service_model_value(model: &ServiceModel) -> Value {
    json!({
        "services": model.services.values().map(service_value).collect::<Vec<_>>(),
        "gov": model.gov.iter()
            .map(|g| json!({ "service": g.service, "purpose": g.purpose }))
            .collect::<Vec<_>>(),
    })
}

fn service_value(ws: &WebService) -> Value {
    let mut obj = Map::new();
    obj.insert("name".into(), json!(ws.name));
    obj.insert("desc".into(), json!(ws.desc));
    obj.insert("loc".into(), json!(ws.loc));
    obj.insert("url".into(), json!(ws.url));
    obj.insert("components".into(), json!(ws.components));
    obj.insert("recipients".into(), json!(ws.recipients.iter()
        .map(|r| json!({ "name": r.name, "kind": r.kind.as_str() }))
        .collect::<Vec<_>>()));
    obj.insert("underlyingPolicies".into(), json!(ws.underlying_policies));
    if let Some(net) = &ws.net {
        obj.insert("net".into(), json!({
            "places": net.places,
            "transitions": net.transitions.iter().map(|t| json!({
                "id": t.id,
                "label": t.label,
                "data": t.data.iter().map(|d| d.qualified_name()).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "arcs": net.arcs.iter().map(|a| json!([a.from, a.to])).collect::<Vec<_>>(),
            "input": net.input,
            "output": net.output,
        }));
    }
    Value::Object(obj)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn element(q: &str) -> DataElement {
        DataElement::parse(q).unwrap()
    }

    fn leaf(name: &str, data: &[&str]) -> WebService {
        WebService {
            name: name.into(),
            net: Some(ServiceNet::minimal("t1", name, data.iter().map(|d| element(d)).collect())),
            ..Default::default()
        }
    }

    #[test]
    fn minimal_net_is_valid() {
        let net = ServiceNet::minimal("t1", "op", BTreeSet::new());
        assert_eq!(validate_net(&net), Ok(()));
    }

    #[test]
    fn place_to_place_arc_rejected() {
        let mut net = ServiceNet::minimal("t1", "op", BTreeSet::new());
        net.arcs.insert(Arc { from: "i".into(), to: "o".into() });
        let errors = validate_net(&net).unwrap_err();
        assert!(errors.iter().any(|e| e.contains("non-bipartite arc")), "{errors:?}");
    }

    #[test]
    fn registration_chain_net_is_valid() {
        // i -> t1 -> p1 -> t2 -> p2 -> t3 -> o
        let net = ServiceNet {
            places: ["i", "p1", "p2", "o"].iter().map(|s| s.to_string()).collect(),
            transitions: vec![
                Transition { id: "t1".into(), label: "register customer".into(), data: BTreeSet::new() },
                Transition { id: "t2".into(), label: "create subscription".into(), data: BTreeSet::new() },
                Transition { id: "t3".into(), label: "send confirmation email".into(), data: BTreeSet::new() },
            ],
            arcs: [("i", "t1"), ("t1", "p1"), ("p1", "t2"), ("t2", "p2"), ("p2", "t3"), ("t3", "o")]
                .iter()
                .map(|(f, t)| Arc { from: f.to_string(), to: t.to_string() })
                .collect(),
            input: "i".into(),
            output: "o".into(),
        };
        assert_eq!(validate_net(&net), Ok(()));
    }

    #[test]
    fn disconnected_transition_rejected() {
        let mut net = ServiceNet::minimal("t1", "op", BTreeSet::new());
        net.transitions.push(Transition { id: "t2".into(), label: "stray".into(), data: BTreeSet::new() });
        let errors = validate_net(&net).unwrap_err();
        assert!(errors.iter().any(|e| e.contains("t2")), "{errors:?}");
    }

    #[test]
    fn pd_unions_transition_data() {
        let mut model = ServiceModel::default();
        let mut ws = leaf("svc", &[]);
        let net = ws.net.as_mut().unwrap();
        net.transitions[0].data = [element("User.name"), element("User.email")].into();
        net.places.insert("p1".into());
        net.transitions.push(Transition {
            id: "t2".into(),
            label: "plan".into(),
            data: [element("Sub.plan")].into(),
        });
        net.transitions.push(Transition {
            id: "t3".into(),
            label: "mail".into(),
            data: [element("User.email")].into(),
        });
        // rewire: i -> t1 -> p1 -> t2 -> ... reuse simple fan via shared places
        net.arcs.insert(Arc { from: "i".into(), to: "t2".into() });
        net.arcs.insert(Arc { from: "t2".into(), to: "o".into() });
        net.arcs.insert(Arc { from: "i".into(), to: "t3".into() });
        net.arcs.insert(Arc { from: "t3".into(), to: "o".into() });
        model.services.insert("svc".into(), ws);
        let result = pd(&model, "svc").unwrap();
        assert_eq!(
            result.data,
            [element("User.name"), element("User.email"), element("Sub.plan")].into()
        );
    }

    #[test]
    fn pd_composes_components() {
        let mut model = ServiceModel::default();
        model.services.insert("s1".into(), leaf("s1", &["A.a"]));
        model.services.insert("s2".into(), leaf("s2", &["B.b"]));
        let composite = WebService {
            name: "s".into(),
            components: ["s1".to_string(), "s2".to_string()].into(),
            ..Default::default()
        };
        model.services.insert("s".into(), composite);
        let result = pd(&model, "s").unwrap();
        assert_eq!(result.data, [element("A.a"), element("B.b")].into());
    }

    #[test]
    fn pd_empty_net_is_empty() {
        let mut model = ServiceModel::default();
        let mut ws = leaf("svc", &[]);
        ws.net.as_mut().unwrap().transitions[0].data.clear();
        model.services.insert("svc".into(), ws);
        assert!(pd(&model, "svc").unwrap().data.is_empty());
    }

    fn one_purpose_policy(id: &str, data: &[&str]) -> LayeredPrivacyPolicy {
        let mut policy = LayeredPrivacyPolicy {
            version: "1".into(),
            name: "t".into(),
            lang: "en".into(),
            pp_uri: "u".into(),
            ..Default::default()
        };
        policy.insert_purpose(crate::lpl::Purpose {
            id: id.into(),
            name: id.into(),
            opt_out: false,
            required: true,
            descr: String::new(),
            recipients: BTreeSet::new(),
            retention: crate::lpl::Retention::indefinite(),
            privacy_model: None,
            data: data.iter().map(|d| element(d)).collect(),
        });
        policy
    }

    #[test]
    fn coverage_subset_holds() {
        let policy = one_purpose_policy("p", &["User.email", "User.name"]);
        let mut model = ServiceModel::default();
        model.services.insert("svc".into(), leaf("svc", &["User.email"]));
        model.gov.insert(GovEdge { service: "svc".into(), purpose: "p".into() });
        let report = check_coverage(&policy, &model).unwrap();
        assert!(report.all_covered && report.all_governed);
    }

    #[test]
    fn coverage_reports_missing_data() {
        let policy = one_purpose_policy("p", &["User.email"]);
        let mut model = ServiceModel::default();
        model.services.insert("svc".into(), leaf("svc", &["User.email", "User.ssn"]));
        model.gov.insert(GovEdge { service: "svc".into(), purpose: "p".into() });
        let report = check_coverage(&policy, &model).unwrap();
        assert!(!report.all_covered);
        assert_eq!(report.services[0].missing_data, vec!["User.ssn"]);
    }

    #[test]
    fn ungoverned_service_flagged() {
        let policy = one_purpose_policy("p", &[]);
        let mut model = ServiceModel::default();
        model.services.insert("svc".into(), leaf("svc", &[]));
        let report = check_coverage(&policy, &model).unwrap();
        assert!(!report.all_governed);
        assert!(!report.services[0].covered);
    }

    #[test]
    fn gov_edge_to_unknown_purpose_errors() {
        let policy = one_purpose_policy("p", &[]);
        let mut model = ServiceModel::default();
        model.services.insert("svc".into(), leaf("svc", &[]));
        model.gov.insert(GovEdge { service: "svc".into(), purpose: "nope".into() });
        assert!(matches!(
            check_coverage(&policy, &model),
            Err(ServiceError::UnknownPurpose(..))
        ));
    }

    #[test]
    fn component_cycle_detected() {
        let mut model = ServiceModel::default();
        let mut a = leaf("a", &[]);
        a.components.insert("b".into());
        let mut b = leaf("b", &[]);
        b.components.insert("a".into());
        model.services.insert("a".into(), a);
        model.services.insert("b".into(), b);
        assert!(matches!(validate_model(&model), Err(ServiceError::ComponentCycle(_))));
    }

    #[test]
    fn model_round_trip() {
        let mut model = ServiceModel::default();
        model.services.insert("s1".into(), leaf("s1", &["A.a", "B.b"]));
        let mut root = WebService { name: "root".into(), ..Default::default() };
        root.components.insert("s1".into());
        root.underlying_policies.insert("partner-policy".into());
        model.services.insert("root".into(), root);
        model.gov.insert(GovEdge { service: "root".into(), purpose: "p".into() });
        let text = serialize_service_model(&model);
        let reparsed = parse_service_model(&text).unwrap();
        assert_eq!(model, reparsed);
        assert_eq!(text, serialize_service_model(&reparsed));
    }
}
