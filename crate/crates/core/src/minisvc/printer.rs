//! Canonical pretty-printer. `print_unit` output reparses to an
//! equivalent AST (modulo positions) and printing is a fixpoint:
//! printing a reparsed print yields identical text.

use super::ast::*;

pub fn print_unit(unit: &CompilationUnit) -> String {
    let mut out = String::new();
    for interface in &unit.interfaces {
        print_interface(&mut out, interface);
        out.push('\n');
    }
    for class in &unit.classes {
        print_class(&mut out, class);
        out.push('\n');
    }
    out
}

fn print_annotation(out: &mut String, annotation: &Annotation, indent: &str) {
    out.push_str(indent);
    out.push('@');
    out.push_str(&annotation.name);
    if let Some(arg) = &annotation.arg {
        out.push_str("(\"");
        out.push_str(arg);
        out.push_str("\")");
    }
    out.push('\n');
}

fn print_params(out: &mut String, params: &[Param]) {
    out.push('(');
    for (i, param) in params.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&param.ty);
        out.push(' ');
        out.push_str(&param.name);
    }
    out.push(')');
}

fn print_interface(out: &mut String, interface: &InterfaceDecl) {
    out.push_str("interface ");
    out.push_str(&interface.name);
    out.push_str(" {\n");
    for sig in &interface.methods {
        out.push_str("    ");
        out.push_str(&sig.return_ty);
        out.push(' ');
        out.push_str(&sig.name);
        print_params(out, &sig.params);
        out.push_str(";\n");
    }
    out.push_str("}\n");
}

fn print_class(out: &mut String, class: &ClassDecl) {
    for annotation in &class.annotations {
        print_annotation(out, annotation, "");
    }
    out.push_str("class ");
    out.push_str(&class.name);
    if let Some(interface) = &class.implements {
        out.push_str(" implements ");
        out.push_str(interface);
    }
    out.push_str(" {\n");
    for field in &class.fields {
        for annotation in &field.annotations {
            print_annotation(out, annotation, "    ");
        }
        out.push_str("    ");
        out.push_str(&field.ty);
        out.push(' ');
        out.push_str(&field.name);
        out.push_str(";\n");
    }
    for method in &class.methods {
        for annotation in &method.annotations {
            print_annotation(out, annotation, "    ");
        }
        out.push_str("    ");
        out.push_str(&method.return_ty);
        out.push(' ');
        out.push_str(&method.name);
        print_params(out, &method.params);
        out.push_str(" {\n");
        for stmt in &method.body {
            out.push_str("        ");
            match stmt {
                Stmt::LocalDecl { ty, name, .. } => {
                    out.push_str(ty);
                    out.push(' ');
                    out.push_str(name);
                    out.push(';');
                }
                Stmt::Call { receiver, method, args, .. } => {
                    out.push_str(receiver);
                    out.push('.');
                    out.push_str(method);
                    out.push('(');
                    out.push_str(&args.join(", "));
                    out.push_str(");");
                }
                Stmt::New { class, .. } => {
                    out.push_str("new ");
                    out.push_str(class);
                    out.push_str("();");
                }
            }
            out.push('\n');
        }
        out.push_str("    }\n");
    }
    out.push_str("}\n");
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minisvc::parse_source;

    const REGISTER_EXAMPLE: &str = "@Controller(\"account\") class AccountController { UserRepo repo; @RequestMapping(\"/register\") void register(String email) { User u; new User(); repo.save(u); } }";

    #[test]
    fn print_is_fixpoint_on_register_example() {
        let unit = parse_source(REGISTER_EXAMPLE, "register.msvc").unwrap();
        let once = print_unit(&unit);
        let reparsed = parse_source(&once, "register.msvc").unwrap();
        assert_eq!(print_unit(&reparsed), once);
    }

    #[test]
    fn printed_interface_reparses() {
        let unit = parse_source("interface N { void send(String m); }", "n.msvc").unwrap();
        let text = print_unit(&unit);
        let reparsed = parse_source(&text, "n.msvc").unwrap();
        assert_eq!(reparsed.interfaces[0].name, "N");
        assert_eq!(print_unit(&reparsed), text);
    }
}
