//! Longest-match lexer for MiniSvc. Whitespace and `//` line comments are
//! skipped; any other unrecognized character stops lexing with its
//! position.

use super::ast::Pos;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    At,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Semi,
    Comma,
    Dot,
    StringLit,
    KwClass,
    KwInterface,
    KwImplements,
    KwNew,
}

impl TokenKind {
    pub fn describe(&self) -> &'static str {
        match self {
            TokenKind::Ident => "identifier",
            TokenKind::At => "'@'",
            TokenKind::LBrace => "'{'",
            TokenKind::RBrace => "'}'",
            TokenKind::LParen => "'('",
            TokenKind::RParen => "')'",
            TokenKind::Semi => "';'",
            TokenKind::Comma => "','",
            TokenKind::Dot => "'.'",
            TokenKind::StringLit => "string literal",
            TokenKind::KwClass => "'class'",
            TokenKind::KwInterface => "'interface'",
            TokenKind::KwImplements => "'implements'",
            TokenKind::KwNew => "'new'",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    /// For `StringLit` the unquoted contents; otherwise the source text.
    pub text: String,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LexError {
    #[error("{line}:{col}: unexpected character {ch:?}")]
    UnexpectedChar { line: usize, col: usize, ch: char },
    #[error("{line}:{col}: unterminated string literal")]
    UnterminatedString { line: usize, col: usize },
}

impl LexError {
    pub fn pos(&self) -> Pos {
        match self {
            LexError::UnexpectedChar { line, col, .. }
            | LexError::UnterminatedString { line, col } => Pos { line: *line, col: *col },
        }
    }
}

fn ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, LexError> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line = 1usize;
    let mut col = 1usize;

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if let Some(c) = c {
                if c == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
            }
            c
        }};
    }

    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '/' {
            // only `//` comments exist; a lone '/' is an error
            let mut lookahead = chars.clone();
            lookahead.next();
            if lookahead.peek() == Some(&'/') {
                while let Some(&n) = chars.peek() {
                    if n == '\n' {
                        break;
                    }
                    bump!();
                }
                continue;
            }
            return Err(LexError::UnexpectedChar { line, col, ch: '/' });
        }
        if ident_start(c) {
            let mut text = String::new();
            while let Some(&n) = chars.peek() {
                if !ident_continue(n) {
                    break;
                }
                text.push(n);
                bump!();
            }
            let kind = match text.as_str() {
                "class" => TokenKind::KwClass,
                "interface" => TokenKind::KwInterface,
                "implements" => TokenKind::KwImplements,
                "new" => TokenKind::KwNew,
                _ => TokenKind::Ident,
            };
            tokens.push(Token { kind, text, pos });
            continue;
        }
        if c == '"' {
            bump!();
            let mut text = String::new();
            loop {
                match chars.peek() {
                    None | Some('\n') => {
                        return Err(LexError::UnterminatedString {
                            line: pos.line,
                            col: pos.col,
                        })
                    }
                    Some('"') => {
                        bump!();
                        break;
                    }
                    Some(&n) => {
                        text.push(n);
                        bump!();
                    }
                }
            }
            tokens.push(Token { kind: TokenKind::StringLit, text, pos });
            continue;
        }
        let kind = match c {
            '@' => TokenKind::At,
            '{' => TokenKind::LBrace,
            '}' => TokenKind::RBrace,
            '(' => TokenKind::LParen,
            ')' => TokenKind::RParen,
            ';' => TokenKind::Semi,
            ',' => TokenKind::Comma,
            '.' => TokenKind::Dot,
            other => return Err(LexError::UnexpectedChar { line, col, ch: other }),
        };
        bump!();
        tokens.push(Token { kind, text: c.to_string(), pos });
    }
    Ok(tokens)
}
