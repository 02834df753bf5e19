//! A C-like tokenizer. It never parses: `#ifdef` bodies may be arbitrary
//! token sequences.

use std::collections::HashMap;

/// Token codes. 0 is the empty token; keywords and punctuation have fixed
/// codes below 1000, identifiers are interned from [`codes::IDENT_BASE`],
/// and literals from [`codes::LITERAL_BASE`].
pub mod codes {
    pub const EMPTY: u64 = 0;

    pub const SWITCH: u64 = 1;
    pub const CASE: u64 = 2;
    pub const BREAK: u64 = 3;
    pub const DEFAULT: u64 = 4;
    pub const RETURN: u64 = 5;
    pub const GOTO: u64 = 6;
    pub const INT: u64 = 7;
    pub const CHAR: u64 = 8;
    pub const LONG: u64 = 9;
    pub const UNSIGNED: u64 = 10;
    pub const VOID: u64 = 11;
    pub const STRUCT: u64 = 12;

    pub const LBRACE: u64 = 100;
    pub const RBRACE: u64 = 101;
    pub const LPAREN: u64 = 102;
    pub const RPAREN: u64 = 103;
    pub const SEMI: u64 = 104;
    pub const COLON: u64 = 105;

    pub const IDENT_BASE: u64 = 1000;
    pub const LITERAL_BASE: u64 = 1_000_000;

    pub const KEYWORDS: &[(&str, u64)] = &[
        ("switch", SWITCH),
        ("case", CASE),
        ("break", BREAK),
        ("default", DEFAULT),
        ("return", RETURN),
        ("goto", GOTO),
        ("int", INT),
        ("char", CHAR),
        ("long", LONG),
        ("unsigned", UNSIGNED),
        ("void", VOID),
        ("struct", STRUCT),
        ("if", 13),
        ("else", 14),
        ("while", 15),
        ("for", 16),
        ("do", 17),
        ("continue", 18),
        ("short", 19),
        ("float", 20),
        ("double", 21),
        ("static", 22),
        ("const", 23),
        ("sizeof", 24),
        ("typedef", 25),
        ("enum", 26),
        ("union", 27),
        ("signed", 28),
        ("extern", 29),
        ("volatile", 30),
        ("register", 31),
        ("inline", 32),
        ("auto", 33),
    ];

    /// Longest operators first, so greedy matching works.
    pub const PUNCTUATION: &[(&str, u64)] = &[
        ("<<=", 149),
        (">>=", 150),
        ("...", 151),
        ("->", 130),
        ("++", 131),
        ("--", 132),
        ("<<", 133),
        (">>", 134),
        ("<=", 135),
        (">=", 136),
        ("==", 137),
        ("!=", 138),
        ("&&", 139),
        ("||", 140),
        ("+=", 141),
        ("-=", 142),
        ("*=", 143),
        ("/=", 144),
        ("%=", 145),
        ("&=", 146),
        ("|=", 147),
        ("^=", 148),
        ("{", LBRACE),
        ("}", RBRACE),
        ("(", LPAREN),
        (")", RPAREN),
        (";", SEMI),
        (":", COLON),
        (",", 106),
        ("=", 107),
        ("+", 108),
        ("-", 109),
        ("*", 110),
        ("/", 111),
        ("%", 112),
        ("<", 113),
        (">", 114),
        ("!", 115),
        ("&", 116),
        ("|", 117),
        ("^", 118),
        ("~", 119),
        ("?", 120),
        (".", 121),
        ("[", 122),
        ("]", 123),
        ("#", 124),
    ];

    pub fn is_identifier(code: u64) -> bool {
        (IDENT_BASE..LITERAL_BASE).contains(&code)
    }

    /// Type keywords that start a declaration.
    pub fn is_declaration_keyword(code: u64) -> bool {
        (INT..=STRUCT).contains(&code)
    }
}

/// Assigns codes to lexemes: fixed ones from the tables, then identifiers
/// and literals in order of first appearance.
#[derive(Clone, Debug)]
pub struct Interner {
    fixed: HashMap<&'static str, u64>,
    interned: HashMap<String, u64>,
    next_ident: u64,
    next_literal: u64,
}

impl Default for Interner {
    fn default() -> Self {
        Interner::new()
    }
}

impl Interner {
    pub fn new() -> Interner {
        let fixed = codes::KEYWORDS
            .iter()
            .chain(codes::PUNCTUATION)
            .copied()
            .collect();
        Interner {
            fixed,
            interned: HashMap::new(),
            next_ident: codes::IDENT_BASE,
            next_literal: codes::LITERAL_BASE,
        }
    }

    pub fn code(&mut self, lexeme: &str, kind: LexKind) -> u64 {
        if let Some(&c) = self.fixed.get(lexeme) {
            return c;
        }
        if let Some(&c) = self.interned.get(lexeme) {
            return c;
        }
        let slot = match kind {
            LexKind::Identifier => &mut self.next_ident,
            _ => &mut self.next_literal,
        };
        let c = *slot;
        *slot += 1;
        self.interned.insert(lexeme.to_string(), c);
        c
    }

    /// Lexeme of a code, if known.
    pub fn lexeme(&self, code: u64) -> Option<&str> {
        self.fixed
            .iter()
            .find(|(_, &c)| c == code)
            .map(|(l, _)| *l)
            .or_else(|| {
                self.interned
                    .iter()
                    .find(|(_, &c)| c == code)
                    .map(|(l, _)| l.as_str())
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LexKind {
    Identifier,
    Keyword,
    Number,
    String,
    Punctuation,
    Other,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lexeme<'a> {
    pub text: &'a str,
    pub kind: LexKind,
    pub line: usize,
}

/// A source line that is a preprocessor directive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Directive<'a> {
    pub name: &'a str,
    /// Rest of the line with comments removed.
    pub argument: String,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Item<'a> {
    Token(Lexeme<'a>),
    Directive(Directive<'a>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LexError {
    pub line: usize,
    pub message: String,
}

const CONDITIONALS: &[&str] = &["if", "ifdef", "ifndef", "else", "elif", "endif"];

/// Splits source text into tokens and conditional directives. Other `#`
/// lines are tokenized like code.
pub fn lex(src: &str) -> Result<Vec<Item<'_>>, LexError> {
    let bytes = src.as_bytes();
    let mut items = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut line_start = true;
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            line += 1;
            line_start = true;
            i += 1;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'/') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'*') {
            let start_line = line;
            i += 2;
            loop {
                if i + 1 >= bytes.len() {
                    return Err(LexError {
                        line: start_line,
                        message: "unterminated comment".into(),
                    });
                }
                if bytes[i] == b'*' && bytes[i + 1] == b'/' {
                    i += 2;
                    break;
                }
                if bytes[i] == b'\n' {
                    line += 1;
                }
                i += 1;
            }
            continue;
        }
        if c == b'#' && line_start {
            let end = src[i..].find('\n').map_or(src.len(), |k| i + k);
            let text = &src[i + 1..end];
            let rest = text.trim_start();
            let name_len = rest
                .find(|ch: char| !ch.is_ascii_alphanumeric() && ch != '_')
                .unwrap_or(rest.len());
            let name = &rest[..name_len];
            if CONDITIONALS.contains(&name) {
                items.push(Item::Directive(Directive {
                    name,
                    argument: strip_comments(&rest[name_len..]).trim().to_string(),
                    line,
                }));
                i = end;
                continue;
            }
        }
        line_start = false;
        let start = i;
        let kind = if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            if codes::KEYWORDS.iter().any(|(k, _)| *k == &src[start..i]) {
                LexKind::Keyword
            } else {
                LexKind::Identifier
            }
        } else if c.is_ascii_digit() {
            while i < bytes.len()
                && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'.')
            {
                i += 1;
            }
            LexKind::Number
        } else if c == b'"' || c == b'\'' {
            i += 1;
            while i < bytes.len() && bytes[i] != c && bytes[i] != b'\n' {
                if bytes[i] == b'\\' {
                    i += 1;
                }
                i += 1;
            }
            if i >= bytes.len() || bytes[i] != c {
                return Err(LexError {
                    line,
                    message: "unterminated literal".into(),
                });
            }
            i += 1;
            LexKind::String
        } else if let Some((p, _)) = codes::PUNCTUATION
            .iter()
            .find(|(p, _)| src[i..].starts_with(p))
        {
            i += p.len();
            LexKind::Punctuation
        } else {
            i += src[i..].chars().next().map_or(1, char::len_utf8);
            LexKind::Other
        };
        items.push(Item::Token(Lexeme {
            text: &src[start..i],
            kind,
            line,
        }));
    }
    Ok(items)
}

fn strip_comments(s: &str) -> String {
    let mut out = String::new();
    let mut rest = s;
    loop {
        let line = rest.find("//");
        let block = rest.find("/*");
        match (line, block) {
            (Some(l), b) if b.is_none_or(|b| l < b) => {
                out.push_str(&rest[..l]);
                return out;
            }
            (_, Some(b)) => {
                out.push_str(&rest[..b]);
                out.push(' ');
                match rest[b + 2..].find("*/") {
                    Some(e) => rest = &rest[b + 2 + e + 2..],
                    None => return out,
                }
            }
            _ => {
                out.push_str(rest);
                return out;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(src: &str) -> Vec<String> {
        lex(src)
            .unwrap()
            .into_iter()
            .map(|it| match it {
                Item::Token(l) => l.text.to_string(),
                Item::Directive(d) => format!("#{} {}", d.name, d.argument),
            })
            .collect()
    }

    #[test]
    fn tokens_and_directives() {
        assert_eq!(
            texts("int x=a->b; // c\n#ifdef A // A\n  s = \"x;y\" /* z */ ;\n#endif"),
            ["int", "x", "=", "a", "->", "b", ";", "#ifdef A", "s", "=", "\"x;y\"", ";", "#endif "]
        );
        assert_eq!(texts("#include <a.h>"), ["#", "include", "<", "a", ".", "h", ">"]);
        assert_eq!(texts("x # y"), ["x", "#", "y"]);
        assert_eq!(texts("#if defined(A) /* x */ && B"), ["#if defined(A)   && B"]);
    }

    #[test]
    fn codes_are_stable() {
        let mut i = Interner::new();
        assert_eq!(i.code("switch", LexKind::Keyword), codes::SWITCH);
        assert_eq!(i.code("foo", LexKind::Identifier), 1000);
        assert_eq!(i.code("bar", LexKind::Identifier), 1001);
        assert_eq!(i.code("foo", LexKind::Identifier), 1000);
        assert_eq!(i.code("42", LexKind::Number), codes::LITERAL_BASE);
        assert!(codes::is_identifier(1001));
        assert!(!codes::is_identifier(codes::LITERAL_BASE));
        assert_eq!(i.lexeme(1001), Some("bar"));
    }

    #[test]
    fn unterminated_input() {
        assert!(lex("/* x").is_err());
        assert!(lex("\"abc\n\"").is_err());
    }
}
