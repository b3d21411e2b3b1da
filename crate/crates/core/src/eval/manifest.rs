use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use super::EvalError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DistortionClass {
    Jp2k,
    Jpeg,
    Wn,
    Gblur,
    Ff,
    Other,
}

impl DistortionClass {
    /// Report column order.
    pub const ALL: [DistortionClass; 6] = [Self::Jp2k, Self::Jpeg, Self::Wn, Self::Gblur, Self::Ff, Self::Other];

    /// Lowercase manifest spelling.
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Jp2k => "jp2k",
            Self::Jpeg => "jpeg",
            Self::Wn => "wn",
            Self::Gblur => "gblur",
            Self::Ff => "ff",
            Self::Other => "other",
        }
    }

    /// Column heading used in text reports.
    pub fn label(self) -> &'static str {
        match self {
            Self::Jp2k => "Jp2k",
            Self::Jpeg => "Jpeg",
            Self::Wn => "Wn",
            Self::Gblur => "Gblur",
            Self::Ff => "FF",
            Self::Other => "Other",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

impl fmt::Display for DistortionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ManifestEntry {
    pub ref_path: PathBuf,
    pub dist_path: PathBuf,
    pub dmos: f64,
    pub class: DistortionClass,
    /// 1-based line in the manifest file, for diagnostics.
    pub line: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Classes that occur at least once, in report order.
    pub fn classes(&self) -> Vec<DistortionClass> {
        DistortionClass::ALL
            .into_iter()
            .filter(|c| self.entries.iter().any(|e| e.class == *c))
            .collect()
    }
}

/// Reads a `ref,dist,dmos,class` CSV. Relative paths resolve against the
/// manifest's directory.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest, EvalError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => EvalError::MissingFile { line: 0, path: path.to_path_buf() },
        _ => EvalError::Io(e),
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    parse_manifest(&text, base)
}

/// Parses manifest text, resolving relative paths against `base` and
/// checking that every referenced file exists.
pub fn parse_manifest(text: &str, base: &Path) -> Result<DatasetManifest, EvalError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| EvalError::Parse { line: 1, msg: e.to_string() })?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["ref", "dist", "dmos", "class"] {
        return Err(EvalError::Parse {
            line: 1,
            msg: format!("expected header ref,dist,dmos,class, found {}", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }

    let resolve = |p: &str| {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    };

    let mut entries = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| EvalError::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            msg: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != 4 {
            return Err(EvalError::Parse { line, msg: format!("expected 4 fields, found {}", record.len()) });
        }
        let dmos: f64 = record[2]
            .parse()
            .map_err(|_| EvalError::Parse { line, msg: format!("bad dmos value {:?}", &record[2]) })?;
        if !dmos.is_finite() {
            return Err(EvalError::Parse { line, msg: "dmos must be finite".into() });
        }
        let class = DistortionClass::parse(&record[3])
            .ok_or_else(|| EvalError::UnknownClass { line, class: record[3].to_string() })?;
        let ref_path = resolve(&record[0]);
        let dist_path = resolve(&record[1]);
        for p in [&ref_path, &dist_path] {
            if !p.is_file() {
                return Err(EvalError::MissingFile { line, path: p.clone() });
            }
        }
        entries.push(ManifestEntry { ref_path, dist_path, dmos, class, line });
    }
    Ok(DatasetManifest { entries })
}
