//! Seeded generators for test suites and benchmarks: constraint-respecting
//! random policies, a single-constraint mutation catalogue, MiniSvc
//! corpora shaped like real service code-bases, and random service trees.
//!
//! Everything is deterministic in the seed.

use std::collections::BTreeSet;

use chrono::NaiveDate;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::lpl::{
    privacy_model_compare, retention_compare, DataElement, DataRecipient, LayeredPrivacyPolicy,
    PmOrdering, PrivacyModel, Purpose, PurposeEdge, RecipientKind, Retention, StrengthRegistry,
};
use crate::service::{GovEdge, ServiceModel, ServiceNet, Transition, WebService};
use crate::validator::Rule;

fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

fn data_pool() -> Vec<DataElement> {
    let mut pool = Vec::new();
    for entity in ["User", "Order", "Card", "Session", "Profile"] {
        for field in ["id", "email", "address", "history"] {
            pool.push(DataElement::new(entity, field));
        }
    }
    pool
}

fn recipient_pool() -> Vec<DataRecipient> {
    vec![
        DataRecipient::new("Acme", RecipientKind::Controller),
        DataRecipient::new("CloudOps", RecipientKind::Processor),
        DataRecipient::new("MailVendor", RecipientKind::Processor),
        DataRecipient::new("AdNetwork", RecipientKind::ThirdParty),
    ]
}

fn retention_candidates() -> Vec<Retention> {
    vec![
        Retention::indefinite(),
        Retention::after_purpose(None),
        Retention::after_purpose(Some(date(2027, 6, 1))),
        Retention::fixed_date(date(2026, 1, 1)),
        Retention::fixed_date(date(2028, 12, 31)),
    ]
}

fn pm_candidates() -> Vec<Option<PrivacyModel>> {
    vec![
        None,
        Some(PrivacyModel::new("k-anonymity").with_attribute("k", 2.0)),
        Some(PrivacyModel::new("k-anonymity").with_attribute("k", 5.0)),
        Some(PrivacyModel::new("k-anonymity").with_attribute("k", 10.0)),
        Some(PrivacyModel::new("l-diversity").with_attribute("l", 3.0)),
        Some(PrivacyModel::new("t-closeness").with_attribute("t", 0.1)),
        Some(PrivacyModel::new("t-closeness").with_attribute("t", 0.4)),
    ]
}

fn subset<T: Clone + Ord>(rng: &mut ChaCha8Rng, items: &BTreeSet<T>, keep: f64) -> BTreeSet<T> {
    items.iter().filter(|_| rng.gen_bool(keep)).cloned().collect()
}

/// A random policy that satisfies every composition constraint: child data
/// and recipients are subsets, retention never grows, privacy models never
/// weaken, and the boolean flags are uniform per root tree. Always has at
/// least one composition edge.
pub fn policy(seed: u64) -> LayeredPrivacyPolicy {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let registry = StrengthRegistry::default();
    let pool: BTreeSet<DataElement> = data_pool().into_iter().collect();
    let recipients: BTreeSet<DataRecipient> = recipient_pool().into_iter().collect();

    let mut policy = LayeredPrivacyPolicy {
        version: "1.0".into(),
        name: format!("generated-{seed}"),
        lang: "en".into(),
        pp_uri: "https://example.org/policy".into(),
        ..Default::default()
    };

    let n_roots = rng.gen_range(1..=3usize);
    let mut counter = 0usize;
    for root_index in 0..n_roots {
        let required = rng.gen_bool(0.8);
        let opt_out = rng.gen_bool(0.2);
        let root = Purpose {
            id: format!("p{root_index}"),
            name: format!("purpose {root_index}"),
            opt_out,
            required,
            descr: "generated".into(),
            recipients: subset(&mut rng, &recipients, 0.7),
            retention: retention_candidates().choose(&mut rng).unwrap().clone(),
            privacy_model: pm_candidates().choose(&mut rng).unwrap().clone(),
            data: subset(&mut rng, &pool, 0.6),
        };
        let root_id = root.id.clone();
        policy.insert_purpose(root);
        // depth-2 tree under each root; the first root always gets a child
        let n_children = if root_index == 0 {
            rng.gen_range(1..=3usize)
        } else {
            rng.gen_range(0..=3usize)
        };
        for _ in 0..n_children {
            counter += 1;
            let child_id = derive_child(&mut rng, &mut policy, &root_id, counter, &registry);
            for _ in 0..rng.gen_range(0..=2usize) {
                counter += 1;
                derive_child(&mut rng, &mut policy, &child_id, counter, &registry);
            }
        }
    }

    // a few inheritance edges; each child id used at most once
    let ids: Vec<String> = policy.purposes.keys().cloned().collect();
    let mut inherited = BTreeSet::new();
    for _ in 0..rng.gen_range(0..=2usize) {
        let parent = ids.choose(&mut rng).unwrap().clone();
        let child = ids.choose(&mut rng).unwrap().clone();
        if parent != child && inherited.insert(child.clone()) {
            policy.hierarchy.insert(PurposeEdge::new(parent, child));
        }
    }
    policy
}

fn derive_child(
    rng: &mut ChaCha8Rng,
    policy: &mut LayeredPrivacyPolicy,
    parent_id: &str,
    counter: usize,
    registry: &StrengthRegistry,
) -> String {
    let parent = policy.purpose(parent_id).unwrap().clone();
    let retention = retention_candidates()
        .into_iter()
        .filter(|r| retention_compare(r, &parent.retention) != std::cmp::Ordering::Greater)
        .collect::<Vec<_>>()
        .choose(rng)
        .unwrap()
        .clone();
    let privacy_model = pm_candidates()
        .into_iter()
        .filter(|pm| {
            matches!(
                privacy_model_compare(pm.as_ref(), parent.privacy_model.as_ref(), registry),
                Ok(PmOrdering::Equal) | Ok(PmOrdering::Greater)
            )
        })
        .collect::<Vec<_>>()
        .choose(rng)
        .unwrap()
        .clone();
    let child = Purpose {
        id: format!("{parent_id}.{counter}"),
        name: format!("purpose {counter}"),
        opt_out: parent.opt_out,
        required: parent.required,
        descr: "generated".into(),
        recipients: subset(rng, &parent.recipients, 0.8),
        retention,
        privacy_model,
        data: subset(rng, &parent.data, 0.7),
    };
    let child_id = child.id.clone();
    policy.insert_purpose(child);
    policy.composition.insert(PurposeEdge::new(parent_id, &child_id));
    child_id
}

/// The seven single-constraint mutations of the validator test suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    AddChildDatum,
    AddChildRecipient,
    RaiseChildRetention,
    WeakenChildPrivacyModel,
    FlipChildRequired,
    FlipChildOptOut,
    AddBackEdge,
}

impl Mutation {
    pub const ALL: [Mutation; 7] = [
        Mutation::AddChildDatum,
        Mutation::AddChildRecipient,
        Mutation::RaiseChildRetention,
        Mutation::WeakenChildPrivacyModel,
        Mutation::FlipChildRequired,
        Mutation::FlipChildOptOut,
        Mutation::AddBackEdge,
    ];

    /// The rule the mutated edge must be reported under.
    pub fn expected_rule(&self) -> Rule {
        match self {
            Mutation::AddChildDatum => Rule::DataSubset,
            Mutation::AddChildRecipient => Rule::RecipientSubset,
            Mutation::RaiseChildRetention => Rule::RetentionOrder,
            Mutation::WeakenChildPrivacyModel => Rule::PrivacyModelOrder,
            Mutation::FlipChildRequired => Rule::RequiredMismatch,
            Mutation::FlipChildOptOut => Rule::OptOutMismatch,
            Mutation::AddBackEdge => Rule::Cycle,
        }
    }
}

/// Applies one mutation to a copy of the policy, returning the mutant and
/// the composition edge it targets. Requires at least one composition
/// edge (which `policy` guarantees).
pub fn mutate(
    policy: &LayeredPrivacyPolicy,
    mutation: Mutation,
    seed: u64,
) -> (LayeredPrivacyPolicy, PurposeEdge) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mutant = policy.clone();
    let edges: Vec<PurposeEdge> = mutant.composition.iter().cloned().collect();
    let edge = edges.choose(&mut rng).expect("policy has composition edges").clone();
    match mutation {
        Mutation::AddChildDatum => {
            let child = mutant.purposes.get_mut(&edge.child).unwrap();
            child.data.insert(DataElement::new("Mutant", "field"));
        }
        Mutation::AddChildRecipient => {
            let child = mutant.purposes.get_mut(&edge.child).unwrap();
            child.recipients.insert(DataRecipient::new("MutantParty", RecipientKind::ThirdParty));
        }
        Mutation::RaiseChildRetention => {
            // child becomes Indefinite; lower the parent first if needed
            let parent = mutant.purposes.get_mut(&edge.parent).unwrap();
            if retention_compare(&parent.retention, &Retention::indefinite())
                == std::cmp::Ordering::Equal
            {
                parent.retention = Retention::fixed_date(date(2000, 1, 1));
            }
            let child = mutant.purposes.get_mut(&edge.child).unwrap();
            child.retention = Retention::indefinite();
        }
        Mutation::WeakenChildPrivacyModel => {
            let parent = mutant.purposes.get_mut(&edge.parent).unwrap();
            parent.privacy_model =
                Some(PrivacyModel::new("k-anonymity").with_attribute("k", 5.0));
            let child = mutant.purposes.get_mut(&edge.child).unwrap();
            child.privacy_model =
                Some(PrivacyModel::new("k-anonymity").with_attribute("k", 3.0));
        }
        Mutation::FlipChildRequired => {
            let child = mutant.purposes.get_mut(&edge.child).unwrap();
            child.required = !child.required;
        }
        Mutation::FlipChildOptOut => {
            let child = mutant.purposes.get_mut(&edge.child).unwrap();
            child.opt_out = !child.opt_out;
        }
        Mutation::AddBackEdge => {
            mutant.composition.insert(PurposeEdge::new(&edge.child, &edge.parent));
        }
    }
    (mutant, edge)
}

// --- MiniSvc corpora ------------------------------------------------------

/// Shape of a generated corpus.
#[derive(Debug, Clone)]
pub struct CorpusSpec {
    pub controllers: usize,
    /// Total endpoints; each controller receives at least one.
    pub endpoints: usize,
    pub entities: usize,
    pub helpers: usize,
    pub interfaces: usize,
    /// Upper bound on endpoints per controller (0 means unbounded).
    pub endpoint_cap: usize,
    pub seed: u64,
}

impl CorpusSpec {
    /// A small corpus within the acceptance bounds (≤30 classes,
    /// ≤8 methods per class, interfaces with ≤3 implementers).
    pub fn small(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let controllers = rng.gen_range(1..=4usize);
        CorpusSpec {
            controllers,
            endpoints: rng.gen_range(controllers..=controllers * 4),
            entities: rng.gen_range(1..=5),
            helpers: rng.gen_range(2..=10),
            interfaces: rng.gen_range(0..=3),
            endpoint_cap: 8,
            seed,
        }
    }
}

/// Generates MiniSvc source files: entities, helper classes (some behind
/// interfaces, recursion allowed), and controllers with annotated
/// entry-points. Returns (file name, source text) pairs.
pub fn corpus(spec: &CorpusSpec) -> Vec<(String, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut files = Vec::new();

    let entity_names: Vec<String> = (0..spec.entities).map(|i| format!("Entity{i}")).collect();
    for name in &entity_names {
        let n_pd = rng.gen_range(1..=2usize);
        let mut src = format!("@Document class {name} {{\n");
        for f in 0..n_pd {
            src.push_str(&format!("    @PersonalData String pd{f};\n"));
        }
        src.push_str("    String plain;\n}\n");
        files.push((format!("{}.msvc", name.to_lowercase()), src));
    }

    let helper_names: Vec<String> = (0..spec.helpers).map(|i| format!("Helper{i}")).collect();

    // interfaces claim disjoint implementer groups of 1..=3 helpers
    let mut unclaimed: Vec<usize> = (0..spec.helpers).collect();
    unclaimed.shuffle(&mut rng);
    let mut implements: Vec<Option<String>> = vec![None; spec.helpers];
    let mut interface_names = Vec::new();
    for i in 0..spec.interfaces {
        if unclaimed.is_empty() {
            break;
        }
        let name = format!("Iface{i}");
        let group = rng.gen_range(1..=3usize.min(unclaimed.len()));
        let mut src = format!("interface {name} {{\n    void op();\n}}\n");
        for _ in 0..group {
            let helper = unclaimed.pop().unwrap();
            implements[helper] = Some(name.clone());
        }
        src.push('\n');
        files.push((format!("{}.msvc", name.to_lowercase()), src));
        interface_names.push(name);
    }

    for (h, name) in helper_names.iter().enumerate() {
        let mut src = String::new();
        let iface = implements[h].clone();
        match &iface {
            Some(i) => src.push_str(&format!("class {name} implements {i} {{\n")),
            None => src.push_str(&format!("class {name} {{\n")),
        }
        // fields: a couple of entities, helpers or interfaces as collaborators
        let mut fields = Vec::new();
        for f in 0..rng.gen_range(0..=3usize) {
            let ty = random_collaborator_type(
                &mut rng,
                &entity_names,
                &helper_names,
                &interface_names,
            );
            let field = format!("dep{f}");
            src.push_str(&format!("    {ty} {field};\n"));
            fields.push((ty, field));
        }
        let n_methods = rng.gen_range(1..=4usize);
        for m in 0..n_methods {
            let method = if m == 0 && iface.is_some() { "op".to_string() } else { format!("run{m}") };
            src.push_str(&format!("    void {method}() {{\n"));
            emit_body(&mut rng, &mut src, &fields, &entity_names, &helper_names);
            src.push_str("    }\n");
        }
        src.push_str("}\n");
        files.push((format!("{}.msvc", name.to_lowercase()), src));
    }

    // distribute endpoints: every controller gets one, the rest at random,
    // respecting the per-controller cap when one is set
    let cap = if spec.endpoint_cap == 0 { usize::MAX } else { spec.endpoint_cap };
    let mut counts = vec![1usize; spec.controllers];
    let extra = spec.endpoints.saturating_sub(spec.controllers);
    for _ in 0..extra {
        let open: Vec<usize> =
            (0..spec.controllers).filter(|&i| counts[i] < cap).collect();
        let Some(&i) = open.choose(&mut rng) else { break };
        counts[i] += 1;
    }

    for (c, count) in counts.iter().enumerate() {
        let name = format!("Controller{c}");
        let mut src = format!("@Controller(\"ctrl{c}\") class {name} {{\n");
        let mut fields = Vec::new();
        for f in 0..rng.gen_range(1..=3usize) {
            let ty = random_collaborator_type(
                &mut rng,
                &entity_names,
                &helper_names,
                &interface_names,
            );
            let field = format!("dep{f}");
            src.push_str(&format!("    {ty} {field};\n"));
            fields.push((ty, field));
        }
        for e in 0..*count {
            src.push_str(&format!("    @RequestMapping(\"/ep{e}\")\n"));
            src.push_str(&format!("    void ep{e}() {{\n"));
            emit_body(&mut rng, &mut src, &fields, &entity_names, &helper_names);
            src.push_str("    }\n");
        }
        src.push_str("}\n");
        files.push((format!("{}.msvc", name.to_lowercase()), src));
    }

    files
}

fn random_collaborator_type(
    rng: &mut ChaCha8Rng,
    entities: &[String],
    helpers: &[String],
    interfaces: &[String],
) -> String {
    let mut candidates: Vec<&String> = Vec::new();
    candidates.extend(entities);
    candidates.extend(helpers);
    candidates.extend(interfaces);
    if candidates.is_empty() {
        return "String".into();
    }
    (*candidates.choose(rng).unwrap()).clone()
}

fn emit_body(
    rng: &mut ChaCha8Rng,
    src: &mut String,
    fields: &[(String, String)],
    entities: &[String],
    helpers: &[String],
) {
    let mut locals: Vec<(String, String)> = Vec::new();
    for s in 0..rng.gen_range(0..=4usize) {
        match rng.gen_range(0..4u8) {
            0 if !entities.is_empty() => {
                let entity = entities.choose(rng).unwrap();
                src.push_str(&format!("        new {entity}();\n"));
            }
            1 => {
                let ty = if !helpers.is_empty() && rng.gen_bool(0.5) {
                    helpers.choose(rng).unwrap().clone()
                } else if !entities.is_empty() {
                    entities.choose(rng).unwrap().clone()
                } else {
                    "String".into()
                };
                let name = format!("v{s}");
                src.push_str(&format!("        {ty} {name};\n"));
                locals.push((ty, name));
            }
            _ => {
                // call through a field or local
                let mut receivers: Vec<&(String, String)> = fields.iter().collect();
                receivers.extend(locals.iter());
                if let Some((ty, receiver)) = receivers.choose(rng) {
                    let method = if ty.starts_with("Iface") {
                        "op".to_string()
                    } else if ty.starts_with("Helper") {
                        format!("run{}", rng.gen_range(1..=3usize))
                    } else {
                        "touch".to_string()
                    };
                    src.push_str(&format!("        {receiver}.{method}();\n"));
                }
            }
        }
    }
}

// --- service trees --------------------------------------------------------

/// A random composable service tree of bounded depth. Leaves carry nets
/// whose transitions hold random personal data. Returns the model and the
/// root service name.
pub fn service_tree(seed: u64, max_depth: usize) -> (ServiceModel, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = ServiceModel::default();
    let pool = data_pool();
    let mut counter = 0usize;
    let root = build_service(&mut rng, &mut model, &pool, max_depth, &mut counter);
    (model, root)
}

fn build_service(
    rng: &mut ChaCha8Rng,
    model: &mut ServiceModel,
    pool: &[DataElement],
    depth: usize,
    counter: &mut usize,
) -> String {
    let name = format!("svc{}", *counter);
    *counter += 1;
    let leaf = depth == 0 || rng.gen_bool(0.4);
    if leaf {
        let n_transitions = rng.gen_range(1..=3usize);
        let mut net = ServiceNet {
            places: BTreeSet::from(["i".to_string(), "o".to_string()]),
            input: "i".into(),
            output: "o".into(),
            ..Default::default()
        };
        for t in 0..n_transitions {
            let id = format!("t{t}");
            let data: BTreeSet<DataElement> =
                pool.iter().filter(|_| rng.gen_bool(0.15)).cloned().collect();
            net.transitions.push(Transition { id: id.clone(), label: format!("op {t}"), data });
            net.arcs.insert(crate::service::Arc { from: "i".into(), to: id.clone() });
            net.arcs.insert(crate::service::Arc { from: id, to: "o".into() });
        }
        model.services.insert(
            name.clone(),
            WebService { name: name.clone(), net: Some(net), ..Default::default() },
        );
    } else {
        let mut components = BTreeSet::new();
        for _ in 0..rng.gen_range(1..=3usize) {
            components.insert(build_service(rng, model, pool, depth - 1, counter));
        }
        model.services.insert(
            name.clone(),
            WebService { name: name.clone(), components, ..Default::default() },
        );
    }
    model.gov.insert(GovEdge { service: name.clone(), purpose: format!("p-{name}") });
    name
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validator::validate;

    #[test]
    fn generated_policies_are_valid() {
        let registry = StrengthRegistry::default();
        for seed in 0..25 {
            let p = policy(seed);
            let report = validate(&p, &registry, false);
            assert!(report.is_valid, "seed {seed}: {:?}", report.violations);
            assert!(!p.composition.is_empty(), "seed {seed} has no composition edges");
        }
    }

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(policy(42), policy(42));
        assert_eq!(corpus(&CorpusSpec::small(7)), corpus(&CorpusSpec::small(7)));
        assert_eq!(service_tree(3, 3).0.services.len(), service_tree(3, 3).0.services.len());
    }

    #[test]
    fn every_mutation_invalidates() {
        let registry = StrengthRegistry::default();
        for seed in 0..10 {
            let p = policy(seed);
            for mutation in Mutation::ALL {
                let (mutant, edge) = mutate(&p, mutation, seed);
                let report = validate(&mutant, &registry, false);
                let rule = mutation.expected_rule();
                assert!(
                    report.violations.iter().any(|v| v.rule == rule),
                    "seed {seed}, {mutation:?} on {edge}: {:?}",
                    report.violations
                );
            }
        }
    }

    #[test]
    fn corpus_parses_and_indexes() {
        for seed in 0..10 {
            let files = corpus(&CorpusSpec::small(seed));
            let units: Vec<_> = files
                .iter()
                .map(|(path, src)| crate::minisvc::parse_source(src, path).unwrap())
                .collect();
            let table = crate::extractor::index(&units).unwrap();
            let graph = crate::extractor::build_call_graph(&table);
            let spec = CorpusSpec::small(seed);
            assert_eq!(graph.entry_points.len(), spec.endpoints, "seed {seed}");
        }
    }

    #[test]
    fn service_trees_are_well_formed() {
        for seed in 0..10 {
            let (model, root) = service_tree(seed, 4);
            assert!(crate::service::validate_model(&model).is_ok(), "seed {seed}");
            assert!(model.services.contains_key(&root));
        }
    }
}
