//! Experiment config files.
//!
//! One `key = value` pair per line; `#` starts a comment. A value is either a
//! scalar or a bracketed, comma-separated list. Items may be double-quoted, and
//! commas inside parentheses do not split items, so
//! `kind = bounded:beta(2, 5)` is a single scalar.
//!
//! ```text
//! means = [0.9, 0.6]
//! policies = [ts, eps-ts:0.2]
//! gap_functions = [standard, hinge:0.2]
//! horizon = 5000
//! seeds = 5000
//! ```
//!
//! Command-line overrides (`--set key=value`) use the same value syntax and
//! replace file entries before anything is validated.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

/// Every key the parser accepts. Subcommands ignore keys they do not use.
pub const KNOWN_KEYS: &[&str] = &[
    "means",
    "kind",
    "policies",
    "gap_functions",
    "horizon",
    "seeds",
    "seed",
    "checkpoints",
    "eps",
    "gap_function",
    "mu2",
    "mu1_grid",
    "mu1_range",
];

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Scalar(String),
    List(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Origin {
    Line(usize),
    Override,
}

#[derive(Debug, Clone)]
struct Entry {
    value: Value,
    origin: Origin,
}

#[derive(Debug, Clone, Default)]
pub struct Config {
    source: String,
    entries: BTreeMap<String, Entry>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&path.display().to_string(), &text)
    }

    pub fn parse(source: &str, text: &str) -> Result<Self, CliError> {
        let mut config = Self {
            source: source.to_owned(),
            entries: BTreeMap::new(),
        };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let at = |msg: String| CliError::Config(format!("{source}:{line}: {msg}"));
            let (key, value) = split_pair(content).map_err(at)?;
            if config.entries.contains_key(key) {
                return Err(at(format!("duplicate key `{key}`")));
            }
            config.entries.insert(
                key.to_owned(),
                Entry {
                    value,
                    origin: Origin::Line(line),
                },
            );
        }
        Ok(config)
    }

    /// Applies a `key=value` override, replacing any file entry.
    pub fn set(&mut self, assignment: &str) -> Result<(), CliError> {
        let (key, value) = split_pair(assignment)
            .map_err(|msg| CliError::Config(format!("--set {assignment:?}: {msg}")))?;
        self.entries.insert(
            key.to_owned(),
            Entry {
                value,
                origin: Origin::Override,
            },
        );
        Ok(())
    }

    fn field_error(&self, key: &str, msg: impl fmt::Display) -> CliError {
        let origin = match self.entries.get(key).map(|e| e.origin) {
            Some(Origin::Line(line)) => format!("{}:{line}", self.source),
            Some(Origin::Override) => "--set".to_owned(),
            None => self.source.clone(),
        };
        CliError::Config(format!("{origin}: field `{key}`: {msg}"))
    }

    fn missing(&self, key: &str) -> CliError {
        CliError::Config(format!("{}: missing required key `{key}`", self.source))
    }

    pub fn raw(&self, key: &str) -> Option<&Value> {
        self.entries.get(key).map(|e| &e.value)
    }

    /// A scalar parsed with `FromStr`, if present.
    pub fn scalar<T>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::List(_)) => Err(self.field_error(key, "expected a single value, found a list")),
            Some(Value::Scalar(s)) => s
                .parse()
                .map(Some)
                .map_err(|e| self.field_error(key, format!("{s:?}: {e}"))),
        }
    }

    pub fn require<T>(&self, key: &str) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        self.scalar(key)?.ok_or_else(|| self.missing(key))
    }

    /// A list whose items are parsed with `FromStr`, if present.
    pub fn list<T>(&self, key: &str) -> Result<Option<Vec<T>>, CliError>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::Scalar(_)) => Err(self.field_error(key, "expected a list `[a, b, ...]`")),
            Some(Value::List(items)) => items
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    s.parse()
                        .map_err(|e| self.field_error(key, format!("item {}: {s:?}: {e}", i + 1)))
                })
                .collect::<Result<Vec<T>, _>>()
                .map(Some),
        }
    }

    pub fn require_list<T>(&self, key: &str) -> Result<Vec<T>, CliError>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        self.list(key)?.ok_or_else(|| self.missing(key))
    }

    /// Wraps a domain error raised while interpreting `key`.
    pub fn invalid(&self, key: &str, err: impl fmt::Display) -> CliError {
        self.field_error(key, err)
    }
}

fn split_pair(content: &str) -> Result<(&str, Value), String> {
    let (key, value) = content
        .split_once('=')
        .ok_or_else(|| format!("expected `key = value`, found {content:?}"))?;
    let key = key.trim();
    if !KNOWN_KEYS.contains(&key) {
        return Err(format!("unknown key `{key}`"));
    }
    let value = parse_value(value.trim()).map_err(|msg| format!("field `{key}`: {msg}"))?;
    Ok((key, value))
}

fn parse_value(text: &str) -> Result<Value, String> {
    if text.is_empty() {
        return Err("empty value".to_owned());
    }
    let Some(body) = text.strip_prefix('[') else {
        return unquote(text).map(Value::Scalar);
    };
    let body = body
        .strip_suffix(']')
        .ok_or_else(|| format!("unterminated list {text:?}"))?;
    if body.trim().is_empty() {
        return Ok(Value::List(Vec::new()));
    }
    let mut items = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in body.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            '[' | ']' => return Err(format!("nested lists are not supported: {text:?}")),
            ',' if depth == 0 => {
                items.push(body[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    items.push(body[start..].trim());
    items
        .into_iter()
        .map(|item| {
            if item.is_empty() {
                Err(format!("empty list item in {text:?}"))
            } else {
                unquote(item)
            }
        })
        .collect::<Result<_, _>>()
        .map(Value::List)
}

fn unquote(item: &str) -> Result<String, String> {
    match item.strip_prefix('"') {
        None if item.contains('"') => Err(format!("stray quote in {item:?}")),
        None => Ok(item.to_owned()),
        Some(rest) => rest
            .strip_suffix('"')
            .filter(|inner| !inner.contains('"'))
            .map(str::to_owned)
            .ok_or_else(|| format!("unbalanced quotes in {item:?}")),
    }
}
