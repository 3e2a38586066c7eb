//! Composition-constraint validation for layered privacy policies.
//!
//! Every composition edge parent → child must satisfy: child data and
//! recipients are subsets of the parent's, child retention is no longer
//! than the parent's, child privacy model is at least as strong, and
//! `required`/`optOut` match. The composition graph must be acyclic and
//! the inheritance relation single-parent. Violations are collected
//! exhaustively and reported in a deterministic order.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::lpl::{
    privacy_model_compare, retention_compare, LayeredPrivacyPolicy, PmOrdering, PurposeEdge,
    StrengthRegistry,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Rule {
    DataSubset,
    RecipientSubset,
    RetentionOrder,
    PrivacyModelOrder,
    RequiredMismatch,
    OptOutMismatch,
    Cycle,
    MultipleInheritance,
}

/// Where a violation was found: a composition edge, an inheritance edge,
/// or the policy as a whole (cycles).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum EdgeRef {
    Composition { parent: String, child: String },
    Inheritance { parent: String, child: String },
    Policy,
}

impl EdgeRef {
    pub fn composition(edge: &PurposeEdge) -> Self {
        EdgeRef::Composition { parent: edge.parent.clone(), child: edge.child.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Violation {
    pub edge: EdgeRef,
    pub rule: Rule,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub roots: BTreeSet<String>,
    pub is_valid: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValidateError {
    #[error("edge {0} references a purpose not present in the policy")]
    DanglingEdge(PurposeEdge),
    #[error("purpose {0:?} not found")]
    UnknownRoot(String),
    #[error("composition cycle through {0:?}")]
    CycleDetected(String),
}

fn fmt_set<T: std::fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    let joined: Vec<String> = items.into_iter().map(|x| x.to_string()).collect();
    format!("{{{}}}", joined.join(", "))
}

/// Checks one composition edge against all six constraints, returning
/// every violated rule.
pub fn check_edge(
    policy: &LayeredPrivacyPolicy,
    edge: &PurposeEdge,
    registry: &StrengthRegistry,
) -> Result<Vec<Violation>, ValidateError> {
    let parent = policy
        .purpose(&edge.parent)
        .ok_or_else(|| ValidateError::DanglingEdge(edge.clone()))?;
    let child = policy
        .purpose(&edge.child)
        .ok_or_else(|| ValidateError::DanglingEdge(edge.clone()))?;
    let at = EdgeRef::composition(edge);
    let mut violations = Vec::new();

    let extra_data: Vec<_> = child.data.difference(&parent.data).collect();
    if !extra_data.is_empty() {
        violations.push(Violation {
            edge: at.clone(),
            rule: Rule::DataSubset,
            detail: format!("child data not in parent: {}", fmt_set(extra_data)),
        });
    }

    let extra_recipients: Vec<_> = child
        .recipients
        .difference(&parent.recipients)
        .map(|r| format!("{} ({})", r.name, r.kind.as_str()))
        .collect();
    if !extra_recipients.is_empty() {
        violations.push(Violation {
            edge: at.clone(),
            rule: Rule::RecipientSubset,
            detail: format!("child recipients not in parent: {}", fmt_set(extra_recipients)),
        });
    }

    if retention_compare(&child.retention, &parent.retention) == Ordering::Greater {
        violations.push(Violation {
            edge: at.clone(),
            rule: Rule::RetentionOrder,
            detail: format!(
                "child retention {} exceeds parent retention {}",
                child.retention.rtype().as_str(),
                parent.retention.rtype().as_str()
            ),
        });
    }

    match privacy_model_compare(
        child.privacy_model.as_ref(),
        parent.privacy_model.as_ref(),
        registry,
    ) {
        Ok(PmOrdering::Equal) | Ok(PmOrdering::Greater) => {}
        Ok(PmOrdering::Less) => violations.push(Violation {
            edge: at.clone(),
            rule: Rule::PrivacyModelOrder,
            detail: "child privacy model is weaker than parent's".into(),
        }),
        Ok(PmOrdering::Incomparable) => violations.push(Violation {
            edge: at.clone(),
            rule: Rule::PrivacyModelOrder,
            detail: "child and parent privacy models are incomparable".into(),
        }),
        Err(e) => violations.push(Violation {
            edge: at.clone(),
            rule: Rule::PrivacyModelOrder,
            detail: e.to_string(),
        }),
    }

    if child.required != parent.required {
        violations.push(Violation {
            edge: at.clone(),
            rule: Rule::RequiredMismatch,
            detail: format!(
                "child required = {}, parent required = {}",
                child.required, parent.required
            ),
        });
    }

    if child.opt_out != parent.opt_out {
        violations.push(Violation {
            edge: at,
            rule: Rule::OptOutMismatch,
            detail: format!("child optOut = {}, parent optOut = {}", child.opt_out, parent.opt_out),
        });
    }

    Ok(violations)
}

/// Detects a directed cycle in the composition edges, returning one
/// witness as an id sequence that starts and ends on the same purpose.
pub fn check_acyclic(policy: &LayeredPrivacyPolicy) -> Result<(), Violation> {
    let adjacency = composition_adjacency(policy);
    // iterative DFS with a gray/black coloring; stack holds the gray path
    let mut color: BTreeMap<&str, u8> = BTreeMap::new(); // 0 white, 1 gray, 2 black
    for start in adjacency.keys() {
        if color.get(start.as_str()).copied().unwrap_or(0) != 0 {
            continue;
        }
        let mut path: Vec<&str> = Vec::new();
        let mut stack: Vec<(&str, usize)> = vec![(start, 0)];
        while let Some((node, next)) = stack.pop() {
            if next == 0 {
                color.insert(node, 1);
                path.push(node);
            }
            let succs = adjacency.get(node).map(Vec::as_slice).unwrap_or(&[]);
            if next < succs.len() {
                stack.push((node, next + 1));
                let succ = succs[next].as_str();
                match color.get(succ).copied().unwrap_or(0) {
                    0 => stack.push((succ, 0)),
                    1 => {
                        // found a back-edge; cut the gray path at succ
                        let from = path.iter().position(|n| *n == succ).unwrap();
                        let mut witness: Vec<String> =
                            path[from..].iter().map(|s| s.to_string()).collect();
                        witness.push(succ.to_string());
                        return Err(Violation {
                            edge: EdgeRef::Policy,
                            rule: Rule::Cycle,
                            detail: witness.join(" -> "),
                        });
                    }
                    _ => {}
                }
            } else {
                color.insert(node, 2);
                path.pop();
            }
        }
    }
    Ok(())
}

fn composition_adjacency(policy: &LayeredPrivacyPolicy) -> BTreeMap<String, Vec<String>> {
    let mut adjacency: BTreeMap<String, Vec<String>> =
        policy.purposes.keys().map(|id| (id.clone(), Vec::new())).collect();
    for edge in &policy.composition {
        adjacency.entry(edge.parent.clone()).or_default().push(edge.child.clone());
    }
    adjacency
}

/// Root purposes: those never appearing as a child of a composition edge.
pub fn roots(policy: &LayeredPrivacyPolicy) -> BTreeSet<String> {
    let children: BTreeSet<&String> = policy.composition.iter().map(|e| &e.child).collect();
    policy.purposes.keys().filter(|id| !children.contains(id)).cloned().collect()
}

/// Full validation: every composition edge, acyclicity, and single
/// inheritance. With `strict_inheritance` the six edge constraints are
/// additionally applied along inheritance edges.
pub fn validate(
    policy: &LayeredPrivacyPolicy,
    registry: &StrengthRegistry,
    strict_inheritance: bool,
) -> ValidationReport {
    let mut violations = Vec::new();
    for edge in &policy.composition {
        match check_edge(policy, edge, registry) {
            Ok(vs) => violations.extend(vs),
            Err(e) => violations.push(Violation {
                edge: EdgeRef::composition(edge),
                rule: Rule::DataSubset,
                detail: e.to_string(),
            }),
        }
    }
    if strict_inheritance {
        for edge in &policy.hierarchy {
            if let Ok(vs) = check_edge(policy, edge, registry) {
                violations.extend(vs.into_iter().map(|v| Violation {
                    edge: EdgeRef::Inheritance {
                        parent: edge.parent.clone(),
                        child: edge.child.clone(),
                    },
                    ..v
                }));
            }
        }
    }
    if let Err(v) = check_acyclic(policy) {
        violations.push(v);
    }
    let mut inheritance_parents: BTreeMap<&String, Vec<&String>> = BTreeMap::new();
    for edge in &policy.hierarchy {
        inheritance_parents.entry(&edge.child).or_default().push(&edge.parent);
    }
    for (child, parents) in inheritance_parents {
        if parents.len() > 1 {
            violations.push(Violation {
                edge: EdgeRef::Inheritance {
                    parent: parents.iter().map(|p| p.as_str()).collect::<Vec<_>>().join(", "),
                    child: child.clone(),
                },
                rule: Rule::MultipleInheritance,
                detail: format!("{child} inherits from {} parents", parents.len()),
            });
        }
    }
    violations.sort();
    let is_valid = violations.is_empty();
    ValidationReport { violations, roots: roots(policy), is_valid }
}

/// Breadth-first transitive composition closure of a root purpose, the
/// layered display order. Siblings are visited in id order and every
/// purpose appears once.
pub fn closure(
    policy: &LayeredPrivacyPolicy,
    root: &str,
) -> Result<Vec<String>, ValidateError> {
    if !policy.purposes.contains_key(root) {
        return Err(ValidateError::UnknownRoot(root.to_string()));
    }
    if let Err(v) = check_acyclic(policy) {
        return Err(ValidateError::CycleDetected(v.detail));
    }
    let adjacency = composition_adjacency(policy);
    let mut order = vec![root.to_string()];
    let mut seen: BTreeSet<String> = order.iter().cloned().collect();
    let mut frontier = vec![root.to_string()];
    while !frontier.is_empty() {
        let mut next_layer = BTreeSet::new();
        for node in &frontier {
            for succ in adjacency.get(node).map(Vec::as_slice).unwrap_or(&[]) {
                if !seen.contains(succ) {
                    next_layer.insert(succ.clone());
                }
            }
        }
        for node in &next_layer {
            seen.insert(node.clone());
            order.push(node.clone());
        }
        frontier = next_layer.into_iter().collect();
    }
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lpl::{DataElement, Purpose, Retention};

    fn purpose(id: &str, data: &[&str]) -> Purpose {
        Purpose {
            id: id.into(),
            name: id.into(),
            opt_out: false,
            required: true,
            descr: String::new(),
            recipients: BTreeSet::new(),
            retention: Retention::indefinite(),
            privacy_model: None,
            data: data.iter().map(|d| DataElement::parse(d).unwrap()).collect(),
        }
    }

    fn policy_with(purposes: Vec<Purpose>, composition: &[(&str, &str)]) -> LayeredPrivacyPolicy {
        let mut policy = LayeredPrivacyPolicy {
            version: "1.0".into(),
            name: "t".into(),
            lang: "en".into(),
            pp_uri: "u".into(),
            ..Default::default()
        };
        for p in purposes {
            policy.insert_purpose(p);
        }
        for (parent, child) in composition {
            policy.composition.insert(PurposeEdge::new(*parent, *child));
        }
        policy
    }

    #[test]
    fn identical_child_passes() {
        let mut parent = purpose("p", &["User.email"]);
        parent.id = "p".into();
        let mut child = parent.clone();
        child.id = "c".into();
        let policy = policy_with(vec![parent, child], &[("p", "c")]);
        let reg = StrengthRegistry::default();
        let vs = check_edge(&policy, &PurposeEdge::new("p", "c"), &reg).unwrap();
        assert!(vs.is_empty(), "{vs:?}");
    }

    #[test]
    fn data_subset_violation() {
        let parent = purpose("p", &["User.email"]);
        let child = purpose("c", &["User.email", "User.location"]);
        let policy = policy_with(vec![parent, child], &[("p", "c")]);
        let reg = StrengthRegistry::default();
        let vs = check_edge(&policy, &PurposeEdge::new("p", "c"), &reg).unwrap();
        assert_eq!(vs.len(), 1);
        assert_eq!(vs[0].rule, Rule::DataSubset);
        assert!(vs[0].detail.contains("User.location"));
    }

    #[test]
    fn weaker_child_pm_violation() {
        use crate::lpl::PrivacyModel;
        let mut parent = purpose("p", &[]);
        parent.privacy_model = Some(PrivacyModel::new("k-anonymity").with_attribute("k", 5.0));
        let mut child = purpose("c", &[]);
        child.privacy_model = Some(PrivacyModel::new("k-anonymity").with_attribute("k", 3.0));
        let policy = policy_with(vec![parent, child], &[("p", "c")]);
        let reg = StrengthRegistry::default();
        let vs = check_edge(&policy, &PurposeEdge::new("p", "c"), &reg).unwrap();
        assert_eq!(vs.len(), 1);
        assert_eq!(vs[0].rule, Rule::PrivacyModelOrder);
    }

    #[test]
    fn acyclic_checks() {
        let ps = vec![purpose("a", &[]), purpose("b", &[]), purpose("c", &[])];
        assert!(check_acyclic(&policy_with(ps.clone(), &[])).is_ok());
        assert!(check_acyclic(&policy_with(ps.clone(), &[("a", "b"), ("b", "c")])).is_ok());
        let cyclic = policy_with(ps, &[("a", "b"), ("b", "a")]);
        let v = check_acyclic(&cyclic).unwrap_err();
        assert_eq!(v.rule, Rule::Cycle);
        assert!(v.detail == "a -> b -> a" || v.detail == "b -> a -> b", "{}", v.detail);
    }

    #[test]
    fn single_purpose_is_its_own_root() {
        let policy = policy_with(vec![purpose("only", &[])], &[]);
        let report = validate(&policy, &StrengthRegistry::default(), false);
        assert!(report.is_valid);
        assert_eq!(report.roots, BTreeSet::from(["only".to_string()]));
    }

    #[test]
    fn flipped_required_reports_exactly_one_mismatch() {
        let parent = purpose("p", &[]);
        let mut child = purpose("c", &[]);
        child.required = false;
        let policy = policy_with(vec![parent, child], &[("p", "c")]);
        let report = validate(&policy, &StrengthRegistry::default(), false);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].rule, Rule::RequiredMismatch);
    }

    #[test]
    fn closure_chain_and_diamond() {
        let ps = vec![purpose("a", &[]), purpose("b", &[]), purpose("c", &[]), purpose("d", &[])];
        let chain = policy_with(ps.clone(), &[("a", "b"), ("b", "c")]);
        assert_eq!(closure(&chain, "a").unwrap(), vec!["a", "b", "c"]);

        let diamond = policy_with(ps.clone(), &[("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")]);
        assert_eq!(closure(&diamond, "a").unwrap(), vec!["a", "b", "c", "d"]);

        let isolated = policy_with(vec![purpose("x", &[])], &[]);
        assert_eq!(closure(&isolated, "x").unwrap(), vec!["x"]);
    }

    #[test]
    fn closure_rejects_cycles_and_unknown_roots() {
        let ps = vec![purpose("a", &[]), purpose("b", &[])];
        let cyclic = policy_with(ps.clone(), &[("a", "b"), ("b", "a")]);
        assert!(matches!(closure(&cyclic, "a"), Err(ValidateError::CycleDetected(_))));
        let ok = policy_with(ps, &[]);
        assert!(matches!(closure(&ok, "zz"), Err(ValidateError::UnknownRoot(_))));
    }

    #[test]
    fn strict_inheritance_applies_edge_rules() {
        let parent = purpose("p", &["User.email"]);
        let child = purpose("c", &["User.email", "User.phone"]);
        let mut policy = policy_with(vec![parent, child], &[]);
        policy.hierarchy.insert(PurposeEdge::new("p", "c"));
        let reg = StrengthRegistry::default();
        assert!(validate(&policy, &reg, false).is_valid);
        let strict = validate(&policy, &reg, true);
        assert!(!strict.is_valid);
        assert!(matches!(strict.violations[0].edge, EdgeRef::Inheritance { .. }));
    }
}
