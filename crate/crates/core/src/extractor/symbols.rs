//! Corpus-wide symbol table: classes, interfaces with their
//! implementers, ORM entities and controllers.

use std::collections::{BTreeMap, BTreeSet};

use crate::lpl::DataElement;
use crate::minisvc::{annotations, ClassDecl, CompilationUnit, InterfaceDecl, MethodDecl, Stmt};

#[derive(Debug, Clone)]
pub struct ClassEntry {
    pub path: String,
    pub decl: ClassDecl,
}

#[derive(Debug, Clone)]
pub struct InterfaceInfo {
    pub path: String,
    pub decl: InterfaceDecl,
    pub implementers: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControllerInfo {
    pub label: String,
    pub route_prefix: String,
}

#[derive(Debug, Clone, Default)]
pub struct SymbolTable {
    pub classes: BTreeMap<String, ClassEntry>,
    pub interfaces: BTreeMap<String, InterfaceInfo>,
    /// Entity class name → its annotated personal-data elements.
    pub entities: BTreeMap<String, BTreeSet<DataElement>>,
    pub controllers: BTreeMap<String, ControllerInfo>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IndexError {
    #[error("duplicate top-level name {name:?} (declared in {paths:?})")]
    DuplicateName { name: String, paths: Vec<String> },
    #[error("class {class:?} implements undeclared interface {interface:?}")]
    UnknownInterface { class: String, interface: String },
    #[error("{path}: duplicate member {member:?} in {class:?}")]
    DuplicateMember { path: String, class: String, member: String },
    #[error("{path}: receiver {receiver:?} in {class}.{method} is not a param, local or field")]
    UnknownReceiver { path: String, class: String, method: String, receiver: String },
}

impl SymbolTable {
    pub fn method(&self, class: &str, method: &str) -> Option<&MethodDecl> {
        self.classes
            .get(class)
            .and_then(|entry| entry.decl.methods.iter().find(|m| m.name == method))
    }

    pub fn is_entity(&self, class: &str) -> bool {
        self.entities.contains_key(class)
    }
}

/// Builds the symbol table for a corpus of parsed units. Entities are the
/// `@Document` classes with at least one `@PersonalData` field;
/// controllers are classes annotated `@Controller` or containing a
/// `@RequestMapping` method.
pub fn index(units: &[CompilationUnit]) -> Result<SymbolTable, IndexError> {
    let mut table = SymbolTable::default();
    let mut declared_at: BTreeMap<&str, Vec<String>> = BTreeMap::new();

    for unit in units {
        for class in &unit.classes {
            declared_at.entry(&class.name).or_default().push(unit.path.clone());
        }
        for interface in &unit.interfaces {
            declared_at.entry(&interface.name).or_default().push(unit.path.clone());
        }
    }
    for (name, paths) in &declared_at {
        if paths.len() > 1 {
            return Err(IndexError::DuplicateName {
                name: name.to_string(),
                paths: paths.clone(),
            });
        }
    }

    for unit in units {
        for interface in &unit.interfaces {
            table.interfaces.insert(
                interface.name.clone(),
                InterfaceInfo {
                    path: unit.path.clone(),
                    decl: interface.clone(),
                    implementers: BTreeSet::new(),
                },
            );
        }
    }

    for unit in units {
        for class in &unit.classes {
            check_members(unit, class)?;
            if let Some(interface) = &class.implements {
                let info = table.interfaces.get_mut(interface).ok_or_else(|| {
                    IndexError::UnknownInterface {
                        class: class.name.clone(),
                        interface: interface.clone(),
                    }
                })?;
                info.implementers.insert(class.name.clone());
            }

            if class.annotation(annotations::DOCUMENT).is_some() {
                let elements: BTreeSet<DataElement> = class
                    .fields
                    .iter()
                    .filter(|f| f.has_annotation(annotations::PERSONAL_DATA))
                    .map(|f| DataElement::new(class.name.clone(), f.name.clone()))
                    .collect();
                if !elements.is_empty() {
                    table.entities.insert(class.name.clone(), elements);
                }
            }

            let has_routes = class
                .methods
                .iter()
                .any(|m| m.annotation(annotations::REQUEST_MAPPING).is_some());
            if let Some(controller) = class.annotation(annotations::CONTROLLER) {
                table.controllers.insert(
                    class.name.clone(),
                    ControllerInfo {
                        label: controller.arg.clone().unwrap_or_else(|| class.name.clone()),
                        route_prefix: class_prefix(class),
                    },
                );
            } else if has_routes {
                table.controllers.insert(
                    class.name.clone(),
                    ControllerInfo {
                        label: class.name.clone(),
                        route_prefix: class_prefix(class),
                    },
                );
            }

            table
                .classes
                .insert(class.name.clone(), ClassEntry { path: unit.path.clone(), decl: class.clone() });
        }
    }
    Ok(table)
}

fn class_prefix(class: &ClassDecl) -> String {
    class
        .annotation(annotations::REQUEST_MAPPING)
        .and_then(|a| a.arg.clone())
        .unwrap_or_default()
}

fn check_members(unit: &CompilationUnit, class: &ClassDecl) -> Result<(), IndexError> {
    let mut members = BTreeSet::new();
    for field in &class.fields {
        if !members.insert(field.name.as_str()) {
            return Err(IndexError::DuplicateMember {
                path: unit.path.clone(),
                class: class.name.clone(),
                member: field.name.clone(),
            });
        }
    }
    for method in &class.methods {
        if !members.insert(method.name.as_str()) {
            return Err(IndexError::DuplicateMember {
                path: unit.path.clone(),
                class: class.name.clone(),
                member: method.name.clone(),
            });
        }
        let mut in_scope: BTreeSet<&str> =
            method.params.iter().map(|p| p.name.as_str()).collect();
        in_scope.extend(class.fields.iter().map(|f| f.name.as_str()));
        in_scope.extend(method.body.iter().filter_map(|s| match s {
            Stmt::LocalDecl { name, .. } => Some(name.as_str()),
            _ => None,
        }));
        for stmt in &method.body {
            if let Stmt::Call { receiver, .. } = stmt {
                if !in_scope.contains(receiver.as_str()) {
                    return Err(IndexError::UnknownReceiver {
                        path: unit.path.clone(),
                        class: class.name.clone(),
                        method: method.name.clone(),
                        receiver: receiver.clone(),
                    });
                }
            }
        }
    }
    Ok(())
}

/// Joins a class-level route prefix with a method route, normalizing
/// slashes so the result has exactly one leading '/' and single
/// separators.
pub(crate) fn join_route(prefix: &str, route: &str) -> String {
    let mut parts: Vec<&str> = Vec::new();
    parts.extend(prefix.split('/').filter(|s| !s.is_empty()));
    parts.extend(route.split('/').filter(|s| !s.is_empty()));
    format!("/{}", parts.join("/"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minisvc::parse_source;

    const REGISTER_EXAMPLE: &str = "@Controller(\"account\") class AccountController { UserRepo repo; @RequestMapping(\"/register\") void register(String email) { User u; new User(); repo.save(u); } }";
    const USER_ENTITY: &str = "@Document class User { @PersonalData String email; String nick; }";

    fn units(sources: &[(&str, &str)]) -> Vec<CompilationUnit> {
        sources.iter().map(|(path, src)| parse_source(src, path).unwrap()).collect()
    }

    #[test]
    fn register_with_entity_indexes_annotated_fields_only() {
        let table =
            index(&units(&[("register.msvc", REGISTER_EXAMPLE), ("user.msvc", USER_ENTITY)])).unwrap();
        assert_eq!(
            table.entities.get("User"),
            Some(&BTreeSet::from([DataElement::new("User", "email")]))
        );
        assert_eq!(
            table.controllers.get("AccountController"),
            Some(&ControllerInfo { label: "account".into(), route_prefix: String::new() })
        );
    }

    #[test]
    fn unknown_interface_rejected() {
        let result = index(&units(&[("c.msvc", "class A implements Ghost {}")]));
        assert!(matches!(result, Err(IndexError::UnknownInterface { .. })));
    }

    #[test]
    fn no_document_classes_means_no_entities() {
        let table = index(&units(&[("register.msvc", REGISTER_EXAMPLE)])).unwrap();
        assert!(table.entities.is_empty());
    }

    #[test]
    fn document_without_personal_data_is_not_an_entity() {
        let table = index(&units(&[("p.msvc", "@Document class Plain { String note; }")])).unwrap();
        assert!(table.entities.is_empty());
    }

    #[test]
    fn duplicate_top_level_names_rejected() {
        let result = index(&units(&[("a.msvc", "class A {}"), ("b.msvc", "class A {}")]));
        assert!(matches!(result, Err(IndexError::DuplicateName { .. })));
    }

    #[test]
    fn undeclared_receiver_rejected() {
        let result = index(&units(&[("a.msvc", "class A { void m() { ghost.call(); } }")]));
        assert!(matches!(result, Err(IndexError::UnknownReceiver { .. })));
    }

    #[test]
    fn route_joining() {
        assert_eq!(join_route("", "/register"), "/register");
        assert_eq!(join_route("/api", "list"), "/api/list");
        assert_eq!(join_route("/api/", "/list/"), "/api/list");
        assert_eq!(join_route("", ""), "/");
    }
}
