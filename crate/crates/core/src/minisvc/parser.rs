//! Recursive-descent parser for MiniSvc. Stops at the first error and
//! reports the expected construct with the position of the offending
//! token.

use super::ast::*;
use super::lexer::{tokenize, LexError, Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{0}")]
    Lex(#[from] LexError),
    #[error("{line}:{col}: expected {expected}, found {found}")]
    Unexpected { expected: String, found: String, line: usize, col: usize },
    #[error("{line}:{col}: expected {expected}, found end of input")]
    Eof { expected: String, line: usize, col: usize },
}

impl ParseError {
    pub fn pos(&self) -> Pos {
        match self {
            ParseError::Lex(e) => e.pos(),
            ParseError::Unexpected { line, col, .. } | ParseError::Eof { line, col, .. } => {
                Pos { line: *line, col: *col }
            }
        }
    }
}

struct Parser<'a> {
    tokens: &'a [Token],
    index: usize,
    /// Position just past the last token, for EOF diagnostics.
    end: Pos,
}

impl<'a> Parser<'a> {
    fn new(tokens: &'a [Token]) -> Self {
        let end = tokens
            .last()
            .map(|t| Pos { line: t.pos.line, col: t.pos.col + t.text.chars().count() })
            .unwrap_or(Pos { line: 1, col: 1 });
        Parser { tokens, index: 0, end }
    }

    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.index)
    }

    fn peek_kind(&self) -> Option<TokenKind> {
        self.peek().map(|t| t.kind)
    }

    fn bump(&mut self) -> Option<&'a Token> {
        let token = self.tokens.get(self.index);
        if token.is_some() {
            self.index += 1;
        }
        token
    }

    fn error(&self, expected: impl Into<String>) -> ParseError {
        match self.peek() {
            Some(token) => ParseError::Unexpected {
                expected: expected.into(),
                found: format!("{} {:?}", token.kind.describe(), token.text),
                line: token.pos.line,
                col: token.pos.col,
            },
            None => ParseError::Eof {
                expected: expected.into(),
                line: self.end.line,
                col: self.end.col,
            },
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<&'a Token, ParseError> {
        match self.peek() {
            Some(token) if token.kind == kind => Ok(self.bump().unwrap()),
            _ => Err(self.error(kind.describe())),
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<&'a Token, ParseError> {
        match self.peek() {
            Some(token) if token.kind == TokenKind::Ident => Ok(self.bump().unwrap()),
            _ => Err(self.error(what)),
        }
    }

    fn annotations(&mut self) -> Result<Vec<Annotation>, ParseError> {
        let mut annotations = Vec::new();
        while self.peek_kind() == Some(TokenKind::At) {
            let at = self.bump().unwrap();
            let name = self.expect_ident("annotation name")?.text.clone();
            let arg = if self.peek_kind() == Some(TokenKind::LParen) {
                self.bump();
                let lit = self.expect(TokenKind::StringLit)?.text.clone();
                self.expect(TokenKind::RParen)?;
                Some(lit)
            } else {
                None
            };
            annotations.push(Annotation { name, arg, pos: at.pos });
        }
        Ok(annotations)
    }

    fn params(&mut self) -> Result<Vec<Param>, ParseError> {
        let mut params = Vec::new();
        self.expect(TokenKind::LParen)?;
        if self.peek_kind() == Some(TokenKind::RParen) {
            self.bump();
            return Ok(params);
        }
        loop {
            let ty = self.expect_ident("param or ')'")?.text.clone();
            let name = self.expect_ident("parameter name")?.text.clone();
            params.push(Param { ty, name });
            match self.peek_kind() {
                Some(TokenKind::Comma) => {
                    self.bump();
                }
                Some(TokenKind::RParen) => {
                    self.bump();
                    break;
                }
                _ => return Err(self.error("',' or ')'")),
            }
        }
        Ok(params)
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        if self.peek_kind() == Some(TokenKind::KwNew) {
            let pos = self.bump().unwrap().pos;
            let class = self.expect_ident("class name")?.text.clone();
            self.expect(TokenKind::LParen)?;
            self.expect(TokenKind::RParen)?;
            self.expect(TokenKind::Semi)?;
            return Ok(Stmt::New { class, pos });
        }
        let first = self.expect_ident("statement")?;
        match self.peek_kind() {
            Some(TokenKind::Dot) => {
                self.bump();
                let method = self.expect_ident("method name")?.text.clone();
                self.expect(TokenKind::LParen)?;
                let mut args = Vec::new();
                if self.peek_kind() != Some(TokenKind::RParen) {
                    loop {
                        args.push(self.expect_ident("argument")?.text.clone());
                        match self.peek_kind() {
                            Some(TokenKind::Comma) => {
                                self.bump();
                            }
                            _ => break,
                        }
                    }
                }
                self.expect(TokenKind::RParen)?;
                self.expect(TokenKind::Semi)?;
                Ok(Stmt::Call { receiver: first.text.clone(), method, args, pos: first.pos })
            }
            Some(TokenKind::Ident) => {
                let name = self.bump().unwrap().text.clone();
                self.expect(TokenKind::Semi)?;
                Ok(Stmt::LocalDecl { ty: first.text.clone(), name, pos: first.pos })
            }
            _ => Err(self.error("'.' or local variable name")),
        }
    }

    fn class_decl(&mut self, annotations: Vec<Annotation>) -> Result<ClassDecl, ParseError> {
        let kw = self.expect(TokenKind::KwClass)?;
        let name = self.expect_ident("class name")?.text.clone();
        let implements = if self.peek_kind() == Some(TokenKind::KwImplements) {
            self.bump();
            Some(self.expect_ident("interface name")?.text.clone())
        } else {
            None
        };
        self.expect(TokenKind::LBrace)?;
        let mut fields = Vec::new();
        let mut methods = Vec::new();
        while self.peek_kind() != Some(TokenKind::RBrace) {
            let member_annotations = self.annotations()?;
            let ty = self.expect_ident("member declaration or '}'")?;
            let member_name = self.expect_ident("member name")?.text.clone();
            match self.peek_kind() {
                Some(TokenKind::Semi) => {
                    self.bump();
                    fields.push(FieldDecl {
                        ty: ty.text.clone(),
                        name: member_name,
                        annotations: member_annotations,
                        pos: ty.pos,
                    });
                }
                Some(TokenKind::LParen) => {
                    let params = self.params()?;
                    self.expect(TokenKind::LBrace)?;
                    let mut body = Vec::new();
                    while self.peek_kind() != Some(TokenKind::RBrace) {
                        if self.peek().is_none() {
                            return Err(self.error("statement or '}'"));
                        }
                        body.push(self.stmt()?);
                    }
                    self.expect(TokenKind::RBrace)?;
                    methods.push(MethodDecl {
                        return_ty: ty.text.clone(),
                        name: member_name,
                        annotations: member_annotations,
                        params,
                        body,
                        pos: ty.pos,
                    });
                }
                _ => return Err(self.error("';' or '('")),
            }
        }
        self.expect(TokenKind::RBrace)?;
        Ok(ClassDecl { name, annotations, implements, fields, methods, pos: kw.pos })
    }

    fn interface_decl(&mut self) -> Result<InterfaceDecl, ParseError> {
        let kw = self.expect(TokenKind::KwInterface)?;
        let name = self.expect_ident("interface name")?.text.clone();
        self.expect(TokenKind::LBrace)?;
        let mut methods = Vec::new();
        while self.peek_kind() != Some(TokenKind::RBrace) {
            let return_ty = self.expect_ident("method signature or '}'")?;
            let sig_name = self.expect_ident("method name")?.text.clone();
            let params = self.params()?;
            self.expect(TokenKind::Semi)?;
            methods.push(MethodSig {
                return_ty: return_ty.text.clone(),
                name: sig_name,
                params,
                pos: return_ty.pos,
            });
        }
        self.expect(TokenKind::RBrace)?;
        Ok(InterfaceDecl { name, methods, pos: kw.pos })
    }

    fn file(&mut self, path: &str) -> Result<CompilationUnit, ParseError> {
        let mut unit = CompilationUnit {
            path: path.to_string(),
            classes: Vec::new(),
            interfaces: Vec::new(),
        };
        while self.peek().is_some() {
            match self.peek_kind() {
                Some(TokenKind::KwInterface) => unit.interfaces.push(self.interface_decl()?),
                Some(TokenKind::KwClass) => {
                    let class = self.class_decl(Vec::new())?;
                    unit.classes.push(class);
                }
                Some(TokenKind::At) => {
                    let annotations = self.annotations()?;
                    if self.peek_kind() == Some(TokenKind::KwClass) {
                        unit.classes.push(self.class_decl(annotations)?);
                    } else {
                        return Err(self.error("'class'"));
                    }
                }
                _ => return Err(self.error("'class', 'interface' or annotation")),
            }
        }
        Ok(unit)
    }
}

/// Parses a token stream into a compilation unit.
pub fn parse(tokens: &[Token], path: &str) -> Result<CompilationUnit, ParseError> {
    Parser::new(tokens).file(path)
}

/// Tokenizes and parses a source string in one step.
pub fn parse_source(text: &str, path: &str) -> Result<CompilationUnit, ParseError> {
    let tokens = tokenize(text)?;
    parse(&tokens, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub const REGISTER_EXAMPLE: &str = "@Controller(\"account\") class AccountController { UserRepo repo; @RequestMapping(\"/register\") void register(String email) { User u; new User(); repo.save(u); } }";

    #[test]
    fn empty_input() {
        let unit = parse_source("", "empty.msvc").unwrap();
        assert!(unit.classes.is_empty() && unit.interfaces.is_empty());
    }

    #[test]
    fn register_example_shape() {
        let unit = parse_source(REGISTER_EXAMPLE, "register.msvc").unwrap();
        assert_eq!(unit.classes.len(), 1);
        let class = &unit.classes[0];
        assert_eq!(class.name, "AccountController");
        assert_eq!(class.annotation("Controller").unwrap().arg.as_deref(), Some("account"));
        assert_eq!(class.fields.len(), 1);
        assert_eq!(class.methods.len(), 1);
        let method = &class.methods[0];
        assert_eq!(method.annotation("RequestMapping").unwrap().arg.as_deref(), Some("/register"));
        assert_eq!(method.params, vec![Param { ty: "String".into(), name: "email".into() }]);
        assert_eq!(method.body.len(), 3);
        assert!(matches!(&method.body[2], Stmt::Call { receiver, method, .. }
            if receiver == "repo" && method == "save"));
    }

    #[test]
    fn unterminated_method_params() {
        let err = parse_source("class A { void m( }", "t.msvc").unwrap_err();
        match err {
            ParseError::Unexpected { expected, found, line, col } => {
                assert_eq!(expected, "param or ')'");
                assert!(found.contains("'}'"), "{found}");
                assert_eq!((line, col), (1, 19));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn interface_with_signatures() {
        let unit = parse_source(
            "interface Notifier { void send(String msg); int count(); }",
            "i.msvc",
        )
        .unwrap();
        assert_eq!(unit.interfaces.len(), 1);
        assert_eq!(unit.interfaces[0].methods.len(), 2);
    }

    #[test]
    fn implements_clause() {
        let unit =
            parse_source("class EmailNotifier implements Notifier { void send(String m) {} }", "c")
                .unwrap();
        assert_eq!(unit.classes[0].implements.as_deref(), Some("Notifier"));
    }

    #[test]
    fn eof_carries_position() {
        let err = parse_source("class A {", "t.msvc").unwrap_err();
        match err {
            ParseError::Eof { line, col, .. } => assert_eq!((line, col), (1, 10)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn annotation_on_non_class_rejected() {
        assert!(parse_source("@Document interface I {}", "t.msvc").is_err());
    }
}
