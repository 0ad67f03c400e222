//! Lexical symbol extraction. Heuristic by design: a declaration keyword
//! followed by an identifier, top-level assignments for constants, and a
//! C-family rule for modifier-led method and field declarations.

use std::collections::HashSet;

use super::{SymbolKind, SymbolRecord};
use crate::store::FileId;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Family {
    Rust,
    Python,
    Go,
    Script,
    CLike,
    Generic,
}

fn family_for(path: &str) -> Family {
    let ext = path.rsplit_once('.').map(|(_, e)| e.to_ascii_lowercase());
    match ext.as_deref() {
        Some("rs") => Family::Rust,
        Some("py" | "pyi") => Family::Python,
        Some("go") => Family::Go,
        Some("js" | "jsx" | "mjs" | "cjs" | "ts" | "tsx") => Family::Script,
        Some(
            "java" | "kt" | "kts" | "scala" | "cs" | "c" | "h" | "cc" | "cpp" | "cxx" | "hpp"
            | "hh" | "swift" | "groovy" | "dart",
        ) => Family::CLike,
        _ => Family::Generic,
    }
}

fn keyword_kind(family: Family, word: &str) -> Option<SymbolKind> {
    use SymbolKind::*;
    let kind = match (family, word) {
        (_, "class" | "interface" | "enum" | "struct") => Class,
        (Family::Rust, "trait" | "union" | "type" | "mod") => Class,
        (Family::Rust, "fn") => Function,
        (Family::Rust, "const" | "static") => Field,
        (Family::Python, "def") => Function,
        (Family::Go, "type") => Class,
        (Family::Go, "func") => Function,
        (Family::Go, "const" | "var") => Field,
        (Family::Script, "type") => Class,
        (Family::Script, "function") => Function,
        (Family::Script, "const" | "let" | "var") => Field,
        (Family::CLike, "record" | "object" | "trait" | "union" | "protocol") => Class,
        (Family::CLike, "fun" | "func" | "def") => Function,
        (Family::CLike, "val" | "var" | "let") => Field,
        (Family::Generic, "trait" | "record" | "object" | "module") => Class,
        (Family::Generic, "fn" | "def" | "func" | "function" | "fun" | "sub") => Function,
        (Family::Generic, "const") => Field,
        _ => return None,
    };
    Some(kind)
}

const MODIFIERS: &[&str] = &[
    "public", "private", "protected", "internal", "static", "final", "abstract", "synchronized",
    "native", "override", "virtual", "inline", "async", "export", "default", "pub", "unsafe",
    "extern", "open", "sealed", "readonly", "volatile", "transient", "const", "constexpr",
];

const CONTROL: &[&str] = &[
    "if", "for", "while", "switch", "return", "catch", "else", "do", "new", "throw", "case",
    "sizeof", "match", "loop",
];

#[derive(Debug, PartialEq)]
enum Tok<'a> {
    Ident(&'a str),
    Punct(char),
}

fn is_ident_start(c: char) -> bool {
    c == '_' || c.is_alphabetic()
}

fn is_ident_continue(c: char) -> bool {
    c == '_' || c.is_alphanumeric()
}

fn tokenize(line: &str) -> Vec<Tok<'_>> {
    let mut out = Vec::new();
    let mut it = line.char_indices().peekable();
    while let Some((i, c)) = it.next() {
        if is_ident_start(c) {
            let mut end = i + c.len_utf8();
            while let Some(&(j, d)) = it.peek() {
                if !is_ident_continue(d) {
                    break;
                }
                end = j + d.len_utf8();
                it.next();
            }
            out.push(Tok::Ident(&line[i..end]));
        } else if c.is_ascii_digit() {
            while it.peek().is_some_and(|&(_, d)| is_ident_continue(d)) {
                it.next();
            }
        } else if c == '"' || c == '\'' || c == '`' {
            // skip string literal
            let mut escaped = false;
            for (_, d) in it.by_ref() {
                if escaped {
                    escaped = false;
                } else if d == '\\' {
                    escaped = true;
                } else if d == c {
                    break;
                }
            }
            out.push(Tok::Punct(c));
        } else if !c.is_whitespace() {
            out.push(Tok::Punct(c));
        }
    }
    out
}

fn is_comment(trimmed: &str, family: Family) -> bool {
    trimmed.starts_with("//")
        || trimmed.starts_with("/*")
        || trimmed.starts_with('*')
        || trimmed.starts_with("--")
        || (trimmed.starts_with('#') && !trimmed.starts_with("#define") && family != Family::Rust)
        || (family == Family::Rust && trimmed.starts_with("#["))
}

fn valid_name(name: &str) -> bool {
    name.chars().next().is_some_and(is_ident_start) && name.chars().any(|c| c != '_')
}

fn declarations(line: &str, family: Family) -> Vec<(String, SymbolKind)> {
    let trimmed = line.trim_start();
    if trimmed.is_empty() || is_comment(trimmed, family) {
        return Vec::new();
    }
    let mut out = Vec::new();

    if let Some(rest) = trimmed.strip_prefix("#define") {
        if let Some(Tok::Ident(name)) = tokenize(rest).first() {
            out.push((name.to_string(), SymbolKind::Field));
        }
        return out;
    }

    let toks = tokenize(trimmed);
    let mut i = 0;
    while i < toks.len() {
        if let Tok::Ident(word) = toks[i] {
            if let Some(kind) = keyword_kind(family, word) {
                let mut j = i + 1;
                // Go method receivers: func (r *T) Name(
                if family == Family::Go && word == "func" && toks.get(j) == Some(&Tok::Punct('(')) {
                    let mut depth = 0;
                    while j < toks.len() {
                        match toks[j] {
                            Tok::Punct('(') => depth += 1,
                            Tok::Punct(')') => {
                                depth -= 1;
                                if depth == 0 {
                                    j += 1;
                                    break;
                                }
                            }
                            _ => {}
                        }
                        j += 1;
                    }
                }
                // `const fn`, `static mut`, `enum class`
                while let Some(Tok::Ident(w)) = toks.get(j) {
                    if matches!(*w, "mut" | "fn" | "class" | "async" | "unsafe" | "extern") {
                        j += 1;
                    } else {
                        break;
                    }
                }
                if let Some(Tok::Ident(name)) = toks.get(j) {
                    let kind = match (word, toks.get(j - 1)) {
                        ("const", Some(Tok::Ident("fn"))) => SymbolKind::Function,
                        _ => kind,
                    };
                    if keyword_kind(family, name).is_none() && valid_name(name) {
                        out.push((name.to_string(), kind));
                    }
                    i = j + 1;
                    continue;
                }
            }
        }
        i += 1;
    }
    if !out.is_empty() {
        return out;
    }

    let indented = line.len() != trimmed.len();
    match family {
        Family::Python if !indented => {
            if let [Tok::Ident(name), Tok::Punct('='), rest @ ..] = toks.as_slice() {
                if rest.first() != Some(&Tok::Punct('=')) && valid_name(name) {
                    out.push((name.to_string(), SymbolKind::Field));
                }
            }
        }
        Family::CLike => {
            if let Some(d) = c_like_member(&toks) {
                out.push(d);
            }
        }
        _ => {}
    }
    out
}

/// `modifiers... Type name(` or `modifiers... Type name =|;`
fn c_like_member(toks: &[Tok<'_>]) -> Option<(String, SymbolKind)> {
    let mut i = 0;
    let mut saw_modifier = false;
    while let Some(Tok::Ident(w)) = toks.get(i) {
        if MODIFIERS.contains(w) {
            saw_modifier = true;
            i += 1;
        } else {
            break;
        }
    }
    if !saw_modifier {
        return None;
    }
    // skip the type, including generics and array brackets
    let mut last_ident: Option<&str> = None;
    for t in &toks[i..] {
        match t {
            Tok::Ident(w) => {
                if CONTROL.contains(w) {
                    return None;
                }
                last_ident = Some(w);
            }
            Tok::Punct('(') => {
                return last_ident
                    .filter(|n| valid_name(n))
                    .map(|n| (n.to_string(), SymbolKind::Function));
            }
            Tok::Punct('=' | ';') => {
                return last_ident
                    .filter(|n| valid_name(n))
                    .map(|n| (n.to_string(), SymbolKind::Field));
            }
            Tok::Punct('<' | '>' | '[' | ']' | ',' | '.' | '?' | '*' | '&' | ':') => {}
            Tok::Punct(_) => return None,
        }
    }
    None
}

/// Symbols declared in `content`, deduplicated by (name, line), in line order.
pub fn extract_symbols(content: &str, path: &str, file: FileId) -> Vec<SymbolRecord> {
    let family = family_for(path);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (idx, line) in content.lines().enumerate() {
        let line_no = (idx + 1) as u32;
        for (name, kind) in declarations(line, family) {
            if seen.insert((name.clone(), line_no)) {
                out.push(SymbolRecord {
                    name,
                    file,
                    line: line_no,
                    kind,
                });
            }
        }
    }
    out
}
