//! MiniSvc: a small curly-brace service-definition language with
//! annotations. It captures exactly the constructs the purpose
//! extraction consumes: annotated classes and fields, interfaces with
//! implementations, and flow-insensitive method bodies made of typed
//! locals, calls and constructions.

mod ast;
mod lexer;
mod parser;
mod printer;

pub use ast::{
    Annotation, ClassDecl, CompilationUnit, FieldDecl, InterfaceDecl, MethodDecl, MethodSig,
    Param, Pos, Stmt,
};
pub use lexer::{tokenize, LexError, Token, TokenKind};
pub use parser::{parse, parse_source, ParseError};
pub use printer::print_unit;

/// Annotation names the analysis recognizes. Anything else is preserved
/// in the AST but ignored.
pub mod annotations {
    pub const REQUEST_MAPPING: &str = "RequestMapping";
    pub const CONTROLLER: &str = "Controller";
    pub const DOCUMENT: &str = "Document";
    pub const PERSONAL_DATA: &str = "PersonalData";
}
