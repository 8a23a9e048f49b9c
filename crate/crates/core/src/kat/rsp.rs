//! Reader and writer for NIST `.rsp` known-answer files.

use std::fmt::Write as _;

use crate::Error;

/// One `count = N` block with its fields in file order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KatEntry {
    pub count: usize,
    pub fields: Vec<(String, String)>,
}

impl KatEntry {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Hex field decoded to bytes.
    pub fn bytes(&self, key: &str) -> Result<Vec<u8>, Error> {
        let v = self
            .get(key)
            .ok_or_else(|| Error::Malformed(format!("entry {} has no field '{key}'", self.count)))?;
        Ok(hex::decode(v)?)
    }

    pub fn number(&self, key: &str) -> Result<usize, Error> {
        let v = self
            .get(key)
            .ok_or_else(|| Error::Malformed(format!("entry {} has no field '{key}'", self.count)))?;
        v.parse()
            .map_err(|_| Error::Malformed(format!("field '{key}' is not a number: {v}")))
    }

    pub fn push_hex(&mut self, key: &str, bytes: &[u8]) {
        self.fields.push((key.to_string(), hex::encode_upper(bytes)));
    }

    pub fn push_number(&mut self, key: &str, n: usize) {
        self.fields.push((key.to_string(), n.to_string()));
    }
}

/// A parsed response file.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KatFile {
    /// Algorithm name from a leading `# NAME` comment, if present.
    pub name: Option<String>,
    pub entries: Vec<KatEntry>,
}

impl KatFile {
    /// Parses a file, skipping comments and blank lines.
    pub fn parse(text: &str) -> Result<KatFile, Error> {
        let mut file = KatFile::default();
        let mut current: Option<KatEntry> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if file.name.is_none() && file.entries.is_empty() && current.is_none() {
                    file.name = Some(comment.trim().to_string());
                }
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Malformed(format!("line {}: expected 'key = value'", lineno + 1)))?;
            let key = key.trim();
            let value = value.trim();
            if key == "count" {
                if let Some(e) = current.take() {
                    file.entries.push(e);
                }
                let count = value
                    .parse()
                    .map_err(|_| Error::Malformed(format!("line {}: bad count '{value}'", lineno + 1)))?;
                current = Some(KatEntry {
                    count,
                    fields: Vec::new(),
                });
            } else {
                let entry = current
                    .as_mut()
                    .ok_or_else(|| Error::Malformed(format!("line {}: field before first count", lineno + 1)))?;
                entry.fields.push((key.to_string(), value.to_string()));
            }
        }
        if let Some(e) = current {
            file.entries.push(e);
        }
        Ok(file)
    }

    /// Full-file layout: header comment, entries separated by blank lines.
    pub fn render(&self) -> String {
        let mut out = String::new();
        if let Some(name) = &self.name {
            let _ = writeln!(out, "# {name}\n");
        }
        for e in &self.entries {
            out.push_str(&render_entry(e));
            out.push('\n');
        }
        out
    }
}

/// A single entry without header or trailing blank line.
pub fn render_entry(e: &KatEntry) -> String {
    let mut out = format!("count = {}\n", e.count);
    for (k, v) in &e.fields {
        let _ = writeln!(out, "{k} = {v}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "# Toy\n\ncount = 0\nseed = 0A0B\nss = FF\n\n# note\ncount = 1\nseed = 00\nss = 01\n\n";

    #[test]
    fn parse_and_render_round_trip() {
        let f = KatFile::parse(SAMPLE).unwrap();
        assert_eq!(f.name.as_deref(), Some("Toy"));
        assert_eq!(f.entries.len(), 2);
        assert_eq!(f.entries[0].bytes("seed").unwrap(), vec![10, 11]);
        assert_eq!(f.entries[1].get("ss"), Some("01"));
        let again = KatFile::parse(&f.render()).unwrap();
        assert_eq!(again, f);
        assert!(f.render().starts_with("# Toy\n\ncount = 0\n"));
    }

    #[test]
    fn malformed_lines() {
        assert!(KatFile::parse("seed = 00\n").is_err());
        assert!(KatFile::parse("count = x\n").is_err());
        assert!(KatFile::parse("count = 0\nnonsense\n").is_err());
        let f = KatFile::parse("count = 0\nmlen = 33\n").unwrap();
        assert_eq!(f.entries[0].number("mlen").unwrap(), 33);
        assert!(f.entries[0].bytes("pk").is_err());
    }
}
