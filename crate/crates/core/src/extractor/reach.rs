//! Personal-data reachability. A method directly touches an entity when
//! it constructs it, declares a param or local of its type, or uses a
//! field of its type as a call receiver. The data reachable from an
//! entry-point is the union of direct touches over every method reachable
//! in the call graph, computed as a fixpoint over the strongly-connected
//! component condensation so recursive corpora terminate.

use std::collections::{BTreeMap, BTreeSet};

use crate::lpl::DataElement;
use crate::minisvc::Stmt;

use super::callgraph::{CallGraph, NodeId};
use super::symbols::SymbolTable;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReachError {
    #[error("unknown entry node {0}")]
    UnknownEntry(NodeId),
}

/// Entities a single method directly touches, as their data elements.
pub(crate) fn direct_touches(
    table: &SymbolTable,
    node: &NodeId,
) -> BTreeSet<DataElement> {
    let mut data = BTreeSet::new();
    let Some(entry) = table.classes.get(&node.class) else { return data };
    let Some(method) = entry.decl.methods.iter().find(|m| m.name == node.method) else {
        return data;
    };

    let touch = |class: &str, data: &mut BTreeSet<DataElement>| {
        if let Some(elements) = table.entities.get(class) {
            data.extend(elements.iter().cloned());
        }
    };

    for param in &method.params {
        touch(&param.ty, &mut data);
    }
    for stmt in &method.body {
        match stmt {
            Stmt::New { class, .. } => touch(class, &mut data),
            Stmt::LocalDecl { ty, .. } => touch(ty, &mut data),
            Stmt::Call { receiver, .. } => {
                if let Some(field) =
                    entry.decl.fields.iter().find(|f| &f.name == receiver)
                {
                    touch(&field.ty, &mut data);
                }
            }
        }
    }
    data
}

/// Reachable personal data for every node at once.
pub fn reachable_data_all(
    graph: &CallGraph,
    table: &SymbolTable,
) -> BTreeMap<NodeId, BTreeSet<DataElement>> {
    let nodes: Vec<&NodeId> = graph.nodes.iter().collect();
    let index_of: BTreeMap<&NodeId, usize> =
        nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let mut successors: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for (from, to) in &graph.edges {
        if let (Some(&f), Some(&t)) = (index_of.get(from), index_of.get(to)) {
            successors[f].push(t);
        }
    }

    let components = tarjan_scc(&successors);
    let mut component_of = vec![0usize; nodes.len()];
    for (ci, members) in components.iter().enumerate() {
        for &m in members {
            component_of[m] = ci;
        }
    }

    // Tarjan emits components in reverse topological order: successors of
    // a component always come earlier, so one forward pass reaches the
    // fixpoint.
    let mut component_data: Vec<BTreeSet<DataElement>> = Vec::with_capacity(components.len());
    for members in &components {
        let mut data = BTreeSet::new();
        for &m in members {
            data.extend(direct_touches(table, nodes[m]));
            for &succ in &successors[m] {
                let sc = component_of[succ];
                if sc != component_of[m] {
                    data.extend(component_data[sc].iter().cloned());
                }
            }
        }
        component_data.push(data);
    }

    nodes
        .iter()
        .enumerate()
        .map(|(i, node)| ((*node).clone(), component_data[component_of[i]].clone()))
        .collect()
}

/// Reachable personal data from one entry node.
pub fn reachable_data(
    graph: &CallGraph,
    table: &SymbolTable,
    entry: &NodeId,
) -> Result<BTreeSet<DataElement>, ReachError> {
    if !graph.nodes.contains(entry) {
        return Err(ReachError::UnknownEntry(entry.clone()));
    }
    Ok(reachable_data_all(graph, table).remove(entry).unwrap_or_default())
}

/// Iterative Tarjan strongly-connected components. Components are
/// returned in reverse topological order of the condensation.
fn tarjan_scc(successors: &[Vec<usize>]) -> Vec<Vec<usize>> {
    #[derive(Clone, Copy)]
    struct NodeState {
        index: usize,
        lowlink: usize,
        on_stack: bool,
        visited: bool,
    }
    let n = successors.len();
    let mut state =
        vec![NodeState { index: 0, lowlink: 0, on_stack: false, visited: false }; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut components: Vec<Vec<usize>> = Vec::new();
    let mut counter = 0usize;

    for root in 0..n {
        if state[root].visited {
            continue;
        }
        // explicit call stack: (node, next successor index)
        let mut call_stack: Vec<(usize, usize)> = vec![(root, 0)];
        while let Some(&mut (v, ref mut next)) = call_stack.last_mut() {
            if *next == 0 {
                state[v].visited = true;
                state[v].index = counter;
                state[v].lowlink = counter;
                counter += 1;
                stack.push(v);
                state[v].on_stack = true;
            }
            if *next < successors[v].len() {
                let w = successors[v][*next];
                *next += 1;
                if !state[w].visited {
                    call_stack.push((w, 0));
                } else if state[w].on_stack {
                    state[v].lowlink = state[v].lowlink.min(state[w].index);
                }
            } else {
                call_stack.pop();
                if let Some(&(parent, _)) = call_stack.last() {
                    state[parent].lowlink = state[parent].lowlink.min(state[v].lowlink);
                }
                if state[v].lowlink == state[v].index {
                    let mut component = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        state[w].on_stack = false;
                        component.push(w);
                        if w == v {
                            break;
                        }
                    }
                    components.push(component);
                }
            }
        }
    }
    components
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extractor::{build_call_graph, index};
    use crate::minisvc::parse_source;

    fn setup(sources: &[(&str, &str)]) -> (SymbolTable, CallGraph) {
        let units: Vec<_> =
            sources.iter().map(|(p, s)| parse_source(s, p).unwrap()).collect();
        let table = index(&units).unwrap();
        let graph = build_call_graph(&table);
        (table, graph)
    }

    fn element(q: &str) -> DataElement {
        DataElement::parse(q).unwrap()
    }

    #[test]
    fn register_reaches_user_email() {
        let (table, graph) = setup(&[
            (
                "register.msvc",
                "@Controller(\"account\") class AccountController { UserRepo repo; @RequestMapping(\"/register\") void register(String email) { User u; new User(); repo.save(u); } }",
            ),
            ("user.msvc", "@Document class User { @PersonalData String email; String nick; }"),
        ]);
        let data =
            reachable_data(&graph, &table, &NodeId::new("AccountController", "register")).unwrap();
        assert_eq!(data, BTreeSet::from([element("User.email")]));
    }

    #[test]
    fn no_entity_path_is_empty() {
        let (table, graph) = setup(&[(
            "c.msvc",
            "class C { Helper h; void m() { h.go(); } } class Helper { void go() {} }",
        )]);
        assert!(reachable_data(&graph, &table, &NodeId::new("C", "m")).unwrap().is_empty());
    }

    #[test]
    fn pessimistic_interface_unions_all_implementations() {
        let (table, graph) = setup(&[
            ("i.msvc", "interface Notifier { void send(String m); }"),
            (
                "e.msvc",
                "class EmailNotifier implements Notifier { void send(String m) { Email e; } }",
            ),
            (
                "s.msvc",
                "class SmsNotifier implements Notifier { void send(String m) { Phone p; } }",
            ),
            ("c.msvc", "class Caller { Notifier n; void go() { n.send(x); } }"),
            ("d1.msvc", "@Document class Email { @PersonalData String addr; }"),
            ("d2.msvc", "@Document class Phone { @PersonalData String number; }"),
        ]);
        let data = reachable_data(&graph, &table, &NodeId::new("Caller", "go")).unwrap();
        assert_eq!(data, BTreeSet::from([element("Email.addr"), element("Phone.number")]));
    }

    #[test]
    fn recursion_terminates_and_unions() {
        let (table, graph) = setup(&[
            (
                "r.msvc",
                "class R { R self; void a() { self.b(); User u; } void b() { self.a(); Card c; } }",
            ),
            ("u.msvc", "@Document class User { @PersonalData String email; }"),
            ("k.msvc", "@Document class Card { @PersonalData String pan; }"),
        ]);
        let expected = BTreeSet::from([element("Card.pan"), element("User.email")]);
        assert_eq!(reachable_data(&graph, &table, &NodeId::new("R", "a")).unwrap(), expected);
        assert_eq!(reachable_data(&graph, &table, &NodeId::new("R", "b")).unwrap(), expected);
    }

    #[test]
    fn field_receiver_touch() {
        let (table, graph) = setup(&[
            ("c.msvc", "class C { User u; void m() { u.anything(); } }"),
            ("u.msvc", "@Document class User { @PersonalData String email; }"),
        ]);
        let data = reachable_data(&graph, &table, &NodeId::new("C", "m")).unwrap();
        assert_eq!(data, BTreeSet::from([element("User.email")]));
    }

    #[test]
    fn unknown_entry_errors() {
        let (table, graph) = setup(&[("c.msvc", "class C { void m() {} }")]);
        assert!(matches!(
            reachable_data(&graph, &table, &NodeId::new("C", "nope")),
            Err(ReachError::UnknownEntry(_))
        ));
    }
}
