//! Line-oriented `key = value` spec files.
//!
//! Blank lines and `#` comments are ignored; keys are case-insensitive;
//! repeated keys are allowed (list-valued keys like `row` rely on it) and
//! scalar getters insist on exactly one occurrence.

use std::path::Path;

use crate::err::{CliError, CliResult};

pub struct SpecFile {
    entries: Vec<(String, String)>,
    origin: String,
}

impl SpecFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::bad_input(format!("{}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> CliResult<Self> {
        let mut entries = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::bad_input(format!(
                    "{origin}:{}: expected `key = value`, got `{line}`",
                    lineno + 1
                )));
            };
            entries.push((key.trim().to_ascii_lowercase(), value.trim().to_string()));
        }
        Ok(Self { entries, origin: origin.to_string() })
    }

    fn single(&self, key: &str) -> CliResult<Option<&str>> {
        let mut hits = self.entries.iter().filter(|(k, _)| k == key);
        let first = hits.next();
        if hits.next().is_some() {
            return Err(CliError::bad_input(format!(
                "{}: key `{key}` given more than once",
                self.origin
            )));
        }
        Ok(first.map(|(_, v)| v.as_str()))
    }

    pub fn get_str(&self, key: &str) -> CliResult<Option<String>> {
        Ok(self.single(key)?.map(str::to_string))
    }

    pub fn all(&self, key: &str) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .collect()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(k, _)| k.as_str())
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        match self.single(key)? {
            None => Ok(None),
            Some(v) => v.parse::<T>().map(Some).map_err(|_| {
                CliError::bad_input(format!(
                    "{}: key `{key}` has unparseable value `{v}`",
                    self.origin
                ))
            }),
        }
    }

    pub fn require<T: std::str::FromStr>(&self, key: &str) -> CliResult<T> {
        self.parsed(key)?.ok_or_else(|| {
            CliError::bad_input(format!("{}: missing required key `{key}`", self.origin))
        })
    }

    pub fn get_or<T: std::str::FromStr>(&self, key: &str, default: T) -> CliResult<T> {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    pub fn list<T: std::str::FromStr>(&self, key: &str) -> CliResult<Option<Vec<T>>> {
        match self.single(key)? {
            None => Ok(None),
            Some(v) => {
                let mut out = Vec::new();
                for item in v.split(',') {
                    let item = item.trim();
                    if item.is_empty() {
                        continue;
                    }
                    out.push(item.parse::<T>().map_err(|_| {
                        CliError::bad_input(format!(
                            "{}: key `{key}` has unparseable item `{item}`",
                            self.origin
                        ))
                    })?);
                }
                Ok(Some(out))
            }
        }
    }

    pub fn require_list<T: std::str::FromStr>(&self, key: &str) -> CliResult<Vec<T>> {
        let list = self.list(key)?.ok_or_else(|| {
            CliError::bad_input(format!("{}: missing required key `{key}`", self.origin))
        })?;
        if list.is_empty() {
            return Err(CliError::bad_input(format!(
                "{}: key `{key}` must list at least one value",
                self.origin
            )));
        }
        Ok(list)
    }

    pub fn origin(&self) -> &str {
        &self.origin
    }
}

/// An estimator selected in a spec's `b_list`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorSel {
    /// Truncated sketch with this many bits per sample.
    Bits(u32),
    /// Full-width classic estimator.
    Minwise,
    /// XOR-folded half-bit estimator.
    Half,
    /// Ground-truth resemblance passthrough (debugging the harness itself).
    Exact,
}

impl EstimatorSel {
    pub fn parse(token: &str) -> CliResult<Self> {
        match token {
            "minwise" => Ok(Self::Minwise),
            "half" => Ok(Self::Half),
            "exact" => Ok(Self::Exact),
            _ => {
                let b: u32 = token.parse().map_err(|_| {
                    CliError::bad_input(format!(
                        "unknown estimator `{token}` (expected a bit count, `minwise`, `half`, or `exact`)"
                    ))
                })?;
                if b == 0 || b > 64 {
                    return Err(CliError::bad_input(format!(
                        "bit count {b} outside 1..=64"
                    )));
                }
                Ok(Self::Bits(b))
            }
        }
    }

    pub fn parse_list(tokens: &[String]) -> CliResult<Vec<Self>> {
        tokens.iter().map(|t| Self::parse(t)).collect()
    }

    /// Column label in CSV output.
    pub fn label(&self) -> String {
        match self {
            Self::Bits(b) => b.to_string(),
            Self::Minwise => "minwise".to_string(),
            Self::Half => "half".to_string(),
            Self::Exact => "exact".to_string(),
        }
    }

    /// Sort rank fixing output order: numeric widths ascending, then
    /// minwise, half, exact.
    pub fn rank(&self) -> u64 {
        match self {
            Self::Bits(b) => u64::from(*b),
            Self::Minwise => 1 << 32,
            Self::Half => (1 << 32) + 1,
            Self::Exact => (1 << 32) + 2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_blanks_and_values() {
        let spec = SpecFile::parse(
            "# comment\n\n d = 1024 \nk_grid = 100, 500\nD2=8\n",
            "test",
        )
        .unwrap();
        assert_eq!(spec.require::<u64>("d").unwrap(), 1024);
        assert_eq!(spec.require_list::<u32>("k_grid").unwrap(), vec![100, 500]);
        assert_eq!(spec.require::<u64>("d2").unwrap(), 8, "keys fold case");
        assert!(spec.require::<u64>("missing").is_err());
        assert_eq!(spec.get_or::<u64>("missing", 7).unwrap(), 7);
    }

    #[test]
    fn rejects_garbage_lines_and_duplicate_scalars() {
        assert!(SpecFile::parse("just words\n", "t").is_err());
        let spec = SpecFile::parse("a = 1\na = 2\n", "t").unwrap();
        assert!(spec.require::<u64>("a").is_err());
        assert_eq!(spec.all("a"), vec!["1", "2"]);
    }

    #[test]
    fn estimator_tokens() {
        assert_eq!(EstimatorSel::parse("4").unwrap(), EstimatorSel::Bits(4));
        assert_eq!(EstimatorSel::parse("minwise").unwrap(), EstimatorSel::Minwise);
        assert_eq!(EstimatorSel::parse("half").unwrap(), EstimatorSel::Half);
        assert_eq!(EstimatorSel::parse("exact").unwrap(), EstimatorSel::Exact);
        assert!(EstimatorSel::parse("0").is_err());
        assert!(EstimatorSel::parse("65").is_err());
        assert!(EstimatorSel::parse("slow").is_err());
        let mut sels = vec![
            EstimatorSel::Exact,
            EstimatorSel::Minwise,
            EstimatorSel::Bits(2),
            EstimatorSel::Half,
            EstimatorSel::Bits(1),
        ];
        sels.sort_by_key(|s| s.rank());
        assert_eq!(
            sels,
            vec![
                EstimatorSel::Bits(1),
                EstimatorSel::Bits(2),
                EstimatorSel::Minwise,
                EstimatorSel::Half,
                EstimatorSel::Exact,
            ]
        );
    }
}
