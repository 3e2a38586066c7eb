//! Function-dependency graph over the corpus. Direct calls resolve to the
//! receiver's declared class; interface calls resolve pessimistically to
//! every implementer. Calls whose receiver type is not part of the corpus
//! produce a warning instead of an edge.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::minisvc::{annotations, Pos, Stmt};

use super::symbols::{join_route, SymbolTable};

/// A method of a corpus class.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId {
    pub class: String,
    pub method: String,
}

impl NodeId {
    pub fn new(class: impl Into<String>, method: impl Into<String>) -> Self {
        NodeId { class: class.into(), method: method.into() }
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.class, self.method)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Warning {
    pub file: String,
    pub pos: Pos,
    pub message: String,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{} {}", self.file, self.pos.line, self.pos.col, self.message)
    }
}

#[derive(Debug, Clone, Default)]
pub struct CallGraph {
    pub nodes: BTreeSet<NodeId>,
    pub edges: BTreeSet<(NodeId, NodeId)>,
    /// Entry-point node → its full route path.
    pub entry_points: BTreeMap<NodeId, String>,
    pub warnings: Vec<Warning>,
}

impl CallGraph {
    pub fn successors<'a>(&'a self, node: &'a NodeId) -> impl Iterator<Item = &'a NodeId> {
        self.edges.iter().filter(move |(from, _)| from == node).map(|(_, to)| to)
    }
}

/// Builds the call graph from an indexed corpus.
pub fn build_call_graph(table: &SymbolTable) -> CallGraph {
    let mut graph = CallGraph::default();

    for (class_name, entry) in &table.classes {
        for method in &entry.decl.methods {
            let node = NodeId::new(class_name.clone(), method.name.clone());
            graph.nodes.insert(node.clone());
            if let Some(mapping) = method.annotation(annotations::REQUEST_MAPPING) {
                let prefix = table
                    .controllers
                    .get(class_name)
                    .map(|c| c.route_prefix.as_str())
                    .unwrap_or("");
                let route = join_route(prefix, mapping.arg.as_deref().unwrap_or(""));
                graph.entry_points.insert(node, route);
            }
        }
    }

    for (class_name, entry) in &table.classes {
        for method in &entry.decl.methods {
            let caller = NodeId::new(class_name.clone(), method.name.clone());
            for stmt in &method.body {
                let Stmt::Call { receiver, method: callee, pos, .. } = stmt else { continue };
                let receiver_ty = resolve_receiver_type(table, class_name, &method.name, receiver);
                let Some(ty) = receiver_ty else {
                    // unreachable after index-time receiver checks
                    continue;
                };
                if let Some(info) = table.interfaces.get(&ty) {
                    if info.decl.methods.iter().any(|sig| &sig.name == callee) {
                        for implementer in &info.implementers {
                            let target = NodeId::new(implementer.clone(), callee.clone());
                            if graph.nodes.contains(&target) {
                                graph.edges.insert((caller.clone(), target));
                            }
                        }
                    } else {
                        graph.warnings.push(Warning {
                            file: entry.path.clone(),
                            pos: *pos,
                            message: format!(
                                "interface {ty} has no method {callee}; call ignored"
                            ),
                        });
                    }
                } else if table.classes.contains_key(&ty) {
                    let target = NodeId::new(ty.clone(), callee.clone());
                    if graph.nodes.contains(&target) {
                        graph.edges.insert((caller.clone(), target));
                    } else {
                        graph.warnings.push(Warning {
                            file: entry.path.clone(),
                            pos: *pos,
                            message: format!("class {ty} has no method {callee}; call ignored"),
                        });
                    }
                } else {
                    graph.warnings.push(Warning {
                        file: entry.path.clone(),
                        pos: *pos,
                        message: format!(
                            "receiver type {ty} of {receiver}.{callee}() is not part of the corpus"
                        ),
                    });
                }
            }
        }
    }
    graph.warnings.sort();
    graph
}

/// Declared type of a call receiver: parameter, local or class field.
pub(crate) fn resolve_receiver_type(
    table: &SymbolTable,
    class: &str,
    method: &str,
    receiver: &str,
) -> Option<String> {
    let entry = table.classes.get(class)?;
    let decl = entry.decl.methods.iter().find(|m| m.name == method)?;
    if let Some(param) = decl.params.iter().find(|p| p.name == receiver) {
        return Some(param.ty.clone());
    }
    for stmt in &decl.body {
        if let Stmt::LocalDecl { ty, name, .. } = stmt {
            if name == receiver {
                return Some(ty.clone());
            }
        }
    }
    entry.decl.fields.iter().find(|f| f.name == receiver).map(|f| f.ty.clone())
}
