//! `section.key = value` configuration text. A `[section]` header prefixes
//! the keys below it; `#` and `;` start comment lines.

use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub value: String,
    pub line: usize,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum IniError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
}

pub fn parse(text: &str) -> Result<BTreeMap<String, Entry>, IniError> {
    let mut out = BTreeMap::new();
    let mut section = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') || s.starts_with(';') {
            continue;
        }
        if let Some(rest) = s.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| IniError::Syntax { line, message: "unterminated section header".into() })?;
            section = name.trim().to_string();
            continue;
        }
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| IniError::Syntax { line, message: format!("expected `key = value`, got `{s}`") })?;
        let k = k.trim();
        if k.is_empty() {
            return Err(IniError::Syntax { line, message: "empty key".into() });
        }
        let key = if section.is_empty() { k.to_string() } else { format!("{section}.{k}") };
        if out.contains_key(&key) {
            return Err(IniError::Duplicate { line, key });
        }
        out.insert(key, Entry { value: v.trim().to_string(), line });
    }
    Ok(out)
}
