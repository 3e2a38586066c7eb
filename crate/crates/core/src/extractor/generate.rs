//! Turns an indexed corpus and its call graph into a composed-purpose
//! tree, a mirrored web service tree, the gov relation between the two,
//! and summary statistics.
//!
//! Generated purposes are valid by construction: the non-derivable fields
//! come from one shared defaults record, controller data is the union of
//! its endpoints' data, and the root unions everything.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::lpl::{
    self, DataElement, DataRecipient, LayeredPrivacyPolicy, PolicyParseError, PrivacyModel,
    Purpose, PurposeEdge, RecipientKind, Retention, RetentionType,
};
use crate::service::{
    self, GovEdge, ServiceError, ServiceModel, ServiceNet, WebService,
};

use super::callgraph::{CallGraph, NodeId, Warning};
use super::reach::reachable_data_all;
use super::symbols::SymbolTable;

/// Values for the purpose fields that cannot be derived from code.
/// Uniform across all generated purposes so the composition constraints
/// hold by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct GenDefaults {
    pub opt_out: bool,
    pub required: bool,
    pub retention: Retention,
    pub privacy_model: Option<PrivacyModel>,
    /// When empty, the corpus name is used as the controller of record.
    pub recipients: BTreeSet<DataRecipient>,
}

impl Default for GenDefaults {
    fn default() -> Self {
        GenDefaults {
            opt_out: false,
            required: true,
            retention: Retention::indefinite(),
            privacy_model: None,
            recipients: BTreeSet::new(),
        }
    }
}

impl GenDefaults {
    /// Loads defaults from a JSON config:
    /// `{"optOut": false, "required": true,
    ///   "retention": {"type": "indefinite"},
    ///   "privacyModel": {"name": ..., "attributes": {...}}?,
    ///   "recipients": [{"name", "kind"}]}`.
    pub fn from_json(text: &str) -> Result<Self, String> {
        let value: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let obj = value.as_object().ok_or("expected object")?;
        let mut defaults = GenDefaults::default();
        if let Some(v) = obj.get("optOut") {
            defaults.opt_out = v.as_bool().ok_or("optOut must be boolean")?;
        }
        if let Some(v) = obj.get("required") {
            defaults.required = v.as_bool().ok_or("required must be boolean")?;
        }
        if let Some(v) = obj.get("retention") {
            let robj = v.as_object().ok_or("retention must be object")?;
            let type_str = robj
                .get("type")
                .and_then(Value::as_str)
                .ok_or("retention.type must be string")?;
            let rtype = RetentionType::from_str(type_str)
                .ok_or_else(|| format!("unknown retention type {type_str:?}"))?;
            let date = match robj.get("pointInTime").and_then(Value::as_str) {
                Some(s) => Some(
                    chrono::NaiveDate::parse_from_str(s, "%Y-%m-%d")
                        .map_err(|e| e.to_string())?,
                ),
                None => None,
            };
            defaults.retention = Retention::new(rtype, date).map_err(|e| e.to_string())?;
        }
        if let Some(v) = obj.get("privacyModel") {
            if !v.is_null() {
                defaults.privacy_model =
                    Some(serde_json::from_value(v.clone()).map_err(|e| e.to_string())?);
            }
        }
        if let Some(v) = obj.get("recipients") {
            let arr = v.as_array().ok_or("recipients must be array")?;
            for r in arr {
                let robj = r.as_object().ok_or("recipient must be object")?;
                let name = robj
                    .get("name")
                    .and_then(Value::as_str)
                    .ok_or("recipient.name must be string")?;
                let kind_str = robj
                    .get("kind")
                    .and_then(Value::as_str)
                    .ok_or("recipient.kind must be string")?;
                let kind = RecipientKind::from_str(kind_str)
                    .ok_or_else(|| format!("unknown recipient kind {kind_str:?}"))?;
                defaults.recipients.insert(DataRecipient::new(name, kind));
            }
        }
        Ok(defaults)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct MinMaxMean {
    pub min: usize,
    pub max: usize,
    pub mean: f64,
}

impl MinMaxMean {
    fn over(counts: &[usize]) -> Self {
        if counts.is_empty() {
            return MinMaxMean::default();
        }
        let total: usize = counts.iter().sum();
        MinMaxMean {
            min: *counts.iter().min().unwrap(),
            max: *counts.iter().max().unwrap(),
            mean: total as f64 / counts.len() as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "camelCase")]
pub struct Stats {
    pub n_controllers: usize,
    pub n_endpoints: usize,
    pub endpoints_per_controller: MinMaxMean,
    pub n_controllers_with_pd: usize,
    pub n_endpoints_under_them: usize,
    pub filtered_endpoints_per_controller: MinMaxMean,
    pub n_entity_types: usize,
    pub per_purpose_data_counts: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionResult {
    pub policy: LayeredPrivacyPolicy,
    pub model: ServiceModel,
    pub stats: Stats,
    pub warnings: Vec<Warning>,
}

fn make_purpose(
    id: String,
    name: String,
    descr: String,
    data: BTreeSet<DataElement>,
    defaults: &GenDefaults,
    recipients: &BTreeSet<DataRecipient>,
) -> Purpose {
    Purpose {
        id,
        name,
        opt_out: defaults.opt_out,
        required: defaults.required,
        descr,
        recipients: recipients.clone(),
        retention: defaults.retention.clone(),
        privacy_model: defaults.privacy_model.clone(),
        data,
    }
}

/// Generates the three-level purpose tree (root → controllers →
/// endpoints), the mirrored service tree whose endpoint nets carry the
/// reachable data, the 1:1 gov mapping, and corpus statistics.
pub fn generate(
    table: &SymbolTable,
    graph: &CallGraph,
    corpus_name: &str,
    defaults: &GenDefaults,
) -> ExtractionResult {
    let corpus_name = if corpus_name.is_empty() { "corpus" } else { corpus_name };
    let recipients = if defaults.recipients.is_empty() {
        BTreeSet::from([DataRecipient::new(corpus_name, RecipientKind::Controller)])
    } else {
        defaults.recipients.clone()
    };

    let reach = reachable_data_all(graph, table);

    // endpoints grouped per controller class, ordered by node id
    let mut per_controller: BTreeMap<&str, Vec<(&NodeId, &String)>> = BTreeMap::new();
    for (node, route) in &graph.entry_points {
        per_controller.entry(node.class.as_str()).or_default().push((node, route));
    }

    let mut policy = LayeredPrivacyPolicy {
        version: "1.0".into(),
        name: corpus_name.to_string(),
        lang: "en".into(),
        pp_uri: String::new(),
        ..Default::default()
    };
    let mut model = ServiceModel::default();
    let mut stats = Stats { n_entity_types: table.entities.len(), ..Default::default() };

    let mut root_data: BTreeSet<DataElement> = BTreeSet::new();
    let mut endpoint_counts = Vec::new();
    let mut filtered_counts = Vec::new();

    for (controller, endpoints) in &per_controller {
        let mut controller_data: BTreeSet<DataElement> = BTreeSet::new();
        let controller_label = table
            .controllers
            .get(*controller)
            .map(|c| c.label.clone())
            .unwrap_or_else(|| controller.to_string());

        let mut endpoint_service_names = BTreeSet::new();
        for (node, route) in endpoints {
            let endpoint_id = format!("{}{}", node.class, route);
            let data = reach.get(node).cloned().unwrap_or_default();
            controller_data.extend(data.iter().cloned());

            policy.insert_purpose(make_purpose(
                endpoint_id.clone(),
                node.method.clone(),
                format!("Entry-point {} ({})", node, route),
                data.clone(),
                defaults,
                &recipients,
            ));
            policy.composition.insert(PurposeEdge::new(controller.to_string(), &endpoint_id));

            let transition_id = format!("t_{}", node.method);
            model.services.insert(
                endpoint_id.clone(),
                WebService {
                    name: endpoint_id.clone(),
                    desc: format!("Endpoint {}", node),
                    loc: String::new(),
                    url: route.to_string(),
                    components: BTreeSet::new(),
                    net: Some(ServiceNet::minimal(&transition_id, &node.method, data)),
                    recipients: recipients.clone(),
                    underlying_policies: BTreeSet::new(),
                },
            );
            model.gov.insert(GovEdge { service: endpoint_id.clone(), purpose: endpoint_id });
            endpoint_service_names.insert(format!("{}{}", node.class, route));
        }

        policy.insert_purpose(make_purpose(
            controller.to_string(),
            controller_label.clone(),
            format!("Controller module {controller}"),
            controller_data.clone(),
            defaults,
            &recipients,
        ));
        policy.composition.insert(PurposeEdge::new(corpus_name, controller.to_string()));

        model.services.insert(
            controller.to_string(),
            WebService {
                name: controller.to_string(),
                desc: format!("Controller {controller_label}"),
                loc: String::new(),
                url: String::new(),
                components: endpoint_service_names,
                net: None,
                recipients: recipients.clone(),
                underlying_policies: BTreeSet::new(),
            },
        );
        model
            .gov
            .insert(GovEdge { service: controller.to_string(), purpose: controller.to_string() });

        root_data.extend(controller_data.iter().cloned());
        endpoint_counts.push(endpoints.len());
        if !controller_data.is_empty() {
            stats.n_controllers_with_pd += 1;
            stats.n_endpoints_under_them += endpoints.len();
            filtered_counts.push(endpoints.len());
        }
    }

    policy.insert_purpose(make_purpose(
        corpus_name.to_string(),
        corpus_name.to_string(),
        format!("All processing of {corpus_name}"),
        root_data,
        defaults,
        &recipients,
    ));

    let controller_names: BTreeSet<String> =
        per_controller.keys().map(|c| c.to_string()).collect();
    model.services.insert(
        corpus_name.to_string(),
        WebService {
            name: corpus_name.to_string(),
            desc: format!("Root service of {corpus_name}"),
            loc: String::new(),
            url: String::new(),
            components: controller_names,
            // an empty net keeps a childless root a well-formed leaf
            net: if per_controller.is_empty() {
                Some(ServiceNet {
                    places: BTreeSet::from(["i".to_string(), "o".to_string()]),
                    input: "i".into(),
                    output: "o".into(),
                    ..Default::default()
                })
            } else {
                None
            },
            recipients: recipients.clone(),
            underlying_policies: BTreeSet::new(),
        },
    );
    model
        .gov
        .insert(GovEdge { service: corpus_name.to_string(), purpose: corpus_name.to_string() });

    stats.n_controllers = per_controller.len();
    stats.n_endpoints = graph.entry_points.len();
    stats.endpoints_per_controller = MinMaxMean::over(&endpoint_counts);
    stats.filtered_endpoints_per_controller = MinMaxMean::over(&filtered_counts);
    stats.per_purpose_data_counts =
        policy.purposes.values().map(|p| (p.id.clone(), p.data.len())).collect();

    ExtractionResult { policy, model, stats, warnings: graph.warnings.clone() }
}

/// The extraction result document:
/// `{"policy": ..., "services": [...], "gov": [...], "stats": ...}`.
pub fn extraction_result_value(result: &ExtractionResult) -> Value {
    let mut value = json!({
        "policy": lpl::policy_to_value(&result.policy),
        "stats": serde_json::to_value(&result.stats).expect("stats serialize"),
    });
    let services = service::service_model_value(&result.model);
    let obj = value.as_object_mut().unwrap();
    obj.insert("services".into(), services["services"].clone());
    obj.insert("gov".into(), services["gov"].clone());
    value
}

pub fn serialize_extraction_result(result: &ExtractionResult) -> String {
    let mut text = serde_json::to_string_pretty(&extraction_result_value(result))
        .expect("extraction result serialize");
    text.push('\n');
    text
}

#[derive(Debug, thiserror::Error)]
pub enum ResultParseError {
    #[error("{0}")]
    Policy(#[from] PolicyParseError),
    #[error("{0}")]
    Service(#[from] ServiceError),
    #[error("schema error at {0}: {1}")]
    Schema(String, String),
}

/// Reads back an extraction result document. Warnings live in the sidecar
/// file, not the document, so they come back empty.
pub fn parse_extraction_result(text: &str) -> Result<ExtractionResult, ResultParseError> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| ResultParseError::Schema("$".into(), e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| ResultParseError::Schema("$".into(), "expected object".into()))?;
    let policy_value = obj
        .get("policy")
        .ok_or_else(|| ResultParseError::Schema("$".into(), "missing \"policy\"".into()))?;
    let policy = lpl::parse_policy(&policy_value.to_string(), false)?;
    let model = service::service_model_from_value(&value, "$")?;
    let stats: Stats = obj
        .get("stats")
        .map(|s| serde_json::from_value(s.clone()))
        .transpose()
        .map_err(|e| ResultParseError::Schema("$.stats".into(), e.to_string()))?
        .unwrap_or_default();
    Ok(ExtractionResult { policy, model, stats, warnings: Vec::new() })
}
