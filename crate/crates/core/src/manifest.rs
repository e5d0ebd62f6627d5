//! Dataset manifests: one graph per line, `<path> <split> [url]`, where
//! split is `train`, `test` or `valid`. Relative paths resolve against the
//! manifest's directory. `#` starts a comment.

use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{load_graph, CsrGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Test,
    Valid,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
            Split::Valid => "valid",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            "valid" => Ok(Split::Valid),
            _ => Err(format!("unknown split {s:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub split: Split,
    pub url: Option<String>,
}

impl ManifestEntry {
    /// Instance name: the file stem.
    pub fn name(&self) -> String {
        self.path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn parse<R: BufRead>(reader: R, base: &Path) -> Result<Self> {
        let mut entries = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut tokens = content.split_whitespace();
            let path = tokens.next().expect("nonempty line has a token");
            let split = tokens
                .next()
                .ok_or_else(|| Error::parse(idx + 1, "missing split tag"))?
                .parse::<Split>()
                .map_err(|e| Error::parse(idx + 1, e))?;
            let url = tokens.next().map(str::to_owned);
            if tokens.next().is_some() {
                return Err(Error::parse(idx + 1, "too many fields"));
            }
            let path = Path::new(path);
            let path = if path.is_relative() {
                base.join(path)
            } else {
                path.to_path_buf()
            };
            entries.push(ManifestEntry { path, split, url });
        }
        Ok(Manifest { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let base = path.parent().unwrap_or(Path::new("."));
        Manifest::parse(BufReader::new(fs::File::open(path)?), base)
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for e in &self.entries {
            write!(out, "{} {}", e.path.display(), e.split)?;
            if let Some(url) = &e.url {
                write!(out, " {url}")?;
            }
            writeln!(out)?;
        }
        out.flush()
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(move |e| e.split == split)
    }

    /// Loads every graph of one split, in manifest order.
    pub fn load_split(&self, split: Split) -> Result<Vec<CsrGraph>> {
        self.split(split).map(|e| load_graph(&e.path)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_entries_relative_to_base() {
        let text =
            "# corpus\ngraphs/a.edges train\n/abs/b.col test https://example.org/b.col  # remote\n\nc.csrg valid\n";
        let m = Manifest::parse(text.as_bytes(), Path::new("/data")).unwrap();
        assert_eq!(m.entries.len(), 3);
        assert_eq!(m.entries[0].path, PathBuf::from("/data/graphs/a.edges"));
        assert_eq!(m.entries[0].name(), "a");
        assert_eq!(m.entries[1].path, PathBuf::from("/abs/b.col"));
        assert_eq!(m.entries[1].url.as_deref(), Some("https://example.org/b.col"));
        assert_eq!(m.split(Split::Valid).count(), 1);
    }

    #[test]
    fn rejects_bad_lines() {
        for text in ["a.edges\n", "a.edges dev\n", "a.edges train url extra\n"] {
            assert!(matches!(
                Manifest::parse(text.as_bytes(), Path::new(".")),
                Err(Error::Parse { line: 1, .. })
            ));
        }
    }

    #[test]
    fn write_then_parse() {
        let m = Manifest {
            entries: vec![
                ManifestEntry {
                    path: "/x/a.edges".into(),
                    split: Split::Train,
                    url: None,
                },
                ManifestEntry {
                    path: "/x/b.col".into(),
                    split: Split::Test,
                    url: Some("u".into()),
                },
            ],
        };
        let mut buf = Vec::new();
        m.write(&mut buf).unwrap();
        assert_eq!(Manifest::parse(&buf[..], Path::new("/")).unwrap(), m);
    }
}
