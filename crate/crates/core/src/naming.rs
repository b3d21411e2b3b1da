//! Color-naming descriptors.
//!
//! Every pixel is labeled with a probability distribution over a vocabulary
//! of basic color terms. Distributions come from a lookup table indexed by
//! the quantized RGB value: either a learned table loaded from disk or a
//! deterministic Gaussian fallback built around per-term Lab prototypes.
//!
//! Table file format, one row per RGB bin, whitespace separated:
//!
//! ```text
//! r_idx g_idx b_idx p_1 ... p_N
//! ```
//!
//! The row count must be `bins³`. Indices are bin indices in `0..bins`; files
//! that store the bin's lowest channel value instead (`0, 8, 16, ...` for 32
//! bins) are also accepted. Blank lines and lines starting with `#` are
//! skipped.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::colorspace::{delta_e_2000, srgb_f64_to_lab, srgb_to_lab_pixel, De2000Params, LabColor};

/// The eleven basic color terms in their canonical order.
pub const BASIC_TERMS: [&str; 11] = [
    "black", "blue", "brown", "grey", "green", "orange", "pink", "purple", "red", "white", "yellow",
];

// Focal sRGB colors used as prototypes for the built-in vocabulary.
const BASIC_FOCAL_SRGB: [[u8; 3]; 11] = [
    [0, 0, 0],
    [0, 70, 190],
    [130, 75, 30],
    [128, 128, 128],
    [20, 150, 50],
    [255, 140, 0],
    [255, 160, 200],
    [130, 40, 160],
    [220, 20, 30],
    [255, 255, 255],
    [255, 230, 0],
];

pub const DEFAULT_BINS: usize = 32;
pub const DEFAULT_FALLBACK_SIGMA: f64 = 15.0;

/// Tolerance for the simplex invariant on stored descriptors.
pub const SIMPLEX_TOL: f64 = 1e-9;
/// Rows read from a file may deviate this much from unit mass and are renormalized.
pub const FILE_SUM_TOL: f64 = 1e-3;

#[derive(Debug, thiserror::Error)]
pub enum NamingError {
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("row on line {line} sums to {sum}, outside 1 ± {FILE_SUM_TOL}")]
    SimplexViolation { line: usize, sum: f64 },
    #[error("table has {rows} rows, which is not a cube of a bin count")]
    WrongRowCount { rows: usize },
    #[error("term {0:?} has zero total weight in the table")]
    DegenerateTerm(String),
    #[error("invalid vocabulary: {0}")]
    InvalidVocabulary(String),
    #[error("invalid descriptor: {0}")]
    InvalidDescriptor(String),
    #[error("invalid ground distance matrix: {0}")]
    InvalidGround(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// An ordered list of color terms, each with a representative Lab point.
#[derive(Clone, Debug, PartialEq)]
pub struct ColorVocabulary {
    terms: Vec<String>,
    prototypes: Vec<LabColor>,
}

impl ColorVocabulary {
    pub fn new(terms: Vec<String>, prototypes: Vec<LabColor>) -> Result<Self, NamingError> {
        if terms.len() < 2 {
            return Err(NamingError::InvalidVocabulary("at least two terms are required".into()));
        }
        if terms.len() != prototypes.len() {
            return Err(NamingError::InvalidVocabulary(format!(
                "{} terms but {} prototypes",
                terms.len(),
                prototypes.len()
            )));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = terms.iter().find(|t| !seen.insert(t.as_str())) {
            return Err(NamingError::InvalidVocabulary(format!("duplicate term {dup:?}")));
        }
        Ok(Self { terms, prototypes })
    }

    /// The eleven basic terms with focal-color prototypes.
    pub fn basic() -> Self {
        Self {
            terms: BASIC_TERMS.iter().map(|t| t.to_string()).collect(),
            prototypes: BASIC_FOCAL_SRGB.iter().map(|&c| srgb_to_lab_pixel(c)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn prototypes(&self) -> &[LabColor] {
        &self.prototypes
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.terms.iter().position(|t| t == term)
    }
}

/// Default term names for a vocabulary of size `n`.
pub fn default_term_names(n: usize) -> Vec<String> {
    if n == BASIC_TERMS.len() {
        BASIC_TERMS.iter().map(|t| t.to_string()).collect()
    } else {
        (0..n).map(|i| format!("term{i}")).collect()
    }
}

/// A probability distribution over color terms.
#[derive(Clone, Debug, PartialEq)]
pub struct ColorDescriptor {
    probs: Vec<f64>,
}

impl ColorDescriptor {
    pub fn new(probs: Vec<f64>) -> Result<Self, NamingError> {
        if probs.is_empty() {
            return Err(NamingError::InvalidDescriptor("empty".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(NamingError::InvalidDescriptor(format!("entry {p} is not a probability")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(NamingError::InvalidDescriptor(format!("entries sum to {sum}")));
        }
        Ok(Self { probs })
    }

    /// Scales nonnegative weights onto the simplex.
    pub fn normalized(weights: Vec<f64>) -> Result<Self, NamingError> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0 && sum.is_finite()) || weights.iter().any(|w| *w < 0.0) {
            return Err(NamingError::InvalidDescriptor(format!("cannot normalize weights summing to {sum}")));
        }
        Self::new(weights.into_iter().map(|w| w / sum).collect())
    }

    pub fn one_hot(n: usize, k: usize) -> Self {
        assert!(k < n, "term index out of range");
        let mut probs = vec![0.0; n];
        probs[k] = 1.0;
        Self { probs }
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0);
        Self {
            probs: vec![1.0 / n as f64; n],
        }
    }

    #[inline]
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Index of the most probable term (first on ties).
    pub fn argmax(&self) -> usize {
        self.probs
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &p)| if p > best.1 { (i, p) } else { best })
            .0
    }
}

/// Bin index of an 8-bit channel value: `floor(v / (256 / bins))`.
#[inline]
pub fn bin_index(v: u8, bins: usize) -> usize {
    v as usize * bins / 256
}

/// Center of a bin on the 0..=255 channel scale.
#[inline]
pub fn bin_center(idx: usize, bins: usize) -> f64 {
    let width = 256.0 / bins as f64;
    (idx as f64 + 0.5) * width - 0.5
}

/// RGB-indexed lookup table of color descriptors.
#[derive(Clone, Debug, PartialEq)]
pub struct NamingTable {
    bins: usize,
    terms: Vec<String>,
    entries: Vec<ColorDescriptor>,
}

impl NamingTable {
    /// Builds a table from entries in `(r, g, b)` row-major order.
    pub fn new(bins: usize, terms: Vec<String>, entries: Vec<ColorDescriptor>) -> Result<Self, NamingError> {
        if !(1..=256).contains(&bins) {
            return Err(NamingError::InvalidParameter(format!("bins must be in 1..=256, got {bins}")));
        }
        if entries.len() != bins * bins * bins {
            return Err(NamingError::WrongRowCount { rows: entries.len() });
        }
        if terms.len() < 2 {
            return Err(NamingError::InvalidVocabulary("at least two terms are required".into()));
        }
        if let Some(e) = entries.iter().find(|e| e.len() != terms.len()) {
            return Err(NamingError::InvalidDescriptor(format!(
                "descriptor has {} entries, expected {}",
                e.len(),
                terms.len()
            )));
        }
        Ok(Self { bins, terms, entries })
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn entries(&self) -> &[ColorDescriptor] {
        &self.entries
    }

    #[inline]
    fn flat_index(&self, r: usize, g: usize, b: usize) -> usize {
        (r * self.bins + g) * self.bins + b
    }

    /// Descriptor stored for bin `(r, g, b)`.
    pub fn entry(&self, r: usize, g: usize, b: usize) -> &ColorDescriptor {
        &self.entries[self.flat_index(r, g, b)]
    }

    /// Descriptor of the bin containing `rgb`.
    #[inline]
    pub fn describe_pixel(&self, rgb: [u8; 3]) -> &ColorDescriptor {
        let [r, g, b] = rgb.map(|v| bin_index(v, self.bins));
        &self.entries[self.flat_index(r, g, b)]
    }

    /// Bin centers paired with their descriptors, in storage order.
    pub fn bin_centers(&self) -> impl Iterator<Item = ([f64; 3], &ColorDescriptor)> + '_ {
        let bins = self.bins;
        self.entries.iter().enumerate().map(move |(i, d)| {
            let r = i / (bins * bins);
            let g = (i / bins) % bins;
            let b = i % bins;
            ([bin_center(r, bins), bin_center(g, bins), bin_center(b, bins)], d)
        })
    }

    /// Serializes the table in the text format read by [`parse_naming_table`].
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.entries.len() * (8 + 12 * self.terms.len()));
        let bins = self.bins;
        for (i, d) in self.entries.iter().enumerate() {
            let _ = write!(out, "{} {} {}", i / (bins * bins), (i / bins) % bins, i % bins);
            for p in d.probs() {
                let _ = write!(out, " {p:e}");
            }
            out.push('\n');
        }
        out
    }
}

pub fn load_naming_table(path: impl AsRef<Path>) -> Result<NamingTable, NamingError> {
    parse_naming_table(&fs::read_to_string(path)?)
}

pub fn parse_naming_table(text: &str) -> Result<NamingTable, NamingError> {
    struct Row {
        line: usize,
        idx: [usize; 3],
        probs: Vec<f64>,
    }

    let mut rows = Vec::new();
    let mut width = None;
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields = trimmed
            .split_whitespace()
            .map(|f| {
                f.parse::<f64>().map_err(|_| NamingError::Parse {
                    line,
                    msg: format!("invalid number {f:?}"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        if fields.len() < 5 {
            return Err(NamingError::Parse {
                line,
                msg: "expected three indices and at least two probabilities".into(),
            });
        }
        match width {
            None => width = Some(fields.len()),
            Some(w) if w != fields.len() => {
                return Err(NamingError::Parse {
                    line,
                    msg: format!("expected {w} columns, found {}", fields.len()),
                })
            }
            _ => {}
        }
        let mut idx = [0usize; 3];
        for (slot, &v) in idx.iter_mut().zip(&fields[..3]) {
            if !(v >= 0.0 && v.fract() == 0.0 && v < 256.0) {
                return Err(NamingError::Parse {
                    line,
                    msg: format!("bin index {v} is not an integer in 0..256"),
                });
            }
            *slot = v as usize;
        }
        rows.push(Row {
            line,
            idx,
            probs: fields[3..].to_vec(),
        });
    }

    let count = rows.len();
    let bins = (count as f64).cbrt().round() as usize;
    if count == 0 || bins * bins * bins != count || bins > 256 {
        return Err(NamingError::WrongRowCount { rows: count });
    }
    let n_terms = width.map_or(0, |w| w - 3);

    // Indices may be stored as channel values rather than bin numbers.
    let as_values = rows.iter().any(|r| r.idx.iter().any(|&i| i >= bins));

    let mut slots: Vec<Option<ColorDescriptor>> = vec![None; count];
    for row in rows {
        let [r, g, b] = if as_values {
            row.idx.map(|v| bin_index(v as u8, bins))
        } else {
            row.idx
        };
        let sum: f64 = row.probs.iter().sum();
        if row.probs.iter().any(|p| *p < 0.0 || !p.is_finite()) || (sum - 1.0).abs() > FILE_SUM_TOL {
            return Err(NamingError::SimplexViolation { line: row.line, sum });
        }
        let descriptor = ColorDescriptor::normalized(row.probs).map_err(|_| NamingError::SimplexViolation {
            line: row.line,
            sum,
        })?;
        let slot = &mut slots[(r * bins + g) * bins + b];
        if slot.is_some() {
            return Err(NamingError::Parse {
                line: row.line,
                msg: format!("duplicate bin ({r}, {g}, {b})"),
            });
        }
        *slot = Some(descriptor);
    }
    // Row count equals bins³ and duplicates are rejected, so every slot is filled.
    let entries = slots.into_iter().map(|s| s.expect("every bin present")).collect();
    NamingTable::new(bins, default_term_names(n_terms), entries)
}

/// Builds a table where each bin's descriptor is a Gaussian in CIEDE2000
/// distance around the vocabulary prototypes:
/// `p_i ∝ exp(-ΔE00(lab(center), prototype_i)² / (2σ²))`.
pub fn fallback_table(vocab: &ColorVocabulary, sigma: f64, bins: usize) -> Result<NamingTable, NamingError> {
    if !(sigma > 0.0) {
        return Err(NamingError::InvalidParameter(format!("sigma must be positive, got {sigma}")));
    }
    if !(1..=256).contains(&bins) {
        return Err(NamingError::InvalidParameter(format!("bins must be in 1..=256, got {bins}")));
    }
    let params = De2000Params::default();
    let centers: Vec<f64> = (0..bins).map(|i| bin_center(i, bins)).collect();
    let mut entries = Vec::with_capacity(bins * bins * bins);
    for &r in &centers {
        for &g in &centers {
            for &b in &centers {
                let lab = srgb_f64_to_lab([r, g, b]);
                let logits: Vec<f64> = vocab
                    .prototypes()
                    .iter()
                    .map(|&p| {
                        let d = delta_e_2000(lab, p, params);
                        -d * d / (2.0 * sigma * sigma)
                    })
                    .collect();
                entries.push(softmax(&logits));
            }
        }
    }
    NamingTable::new(bins, vocab.terms().to_vec(), entries)
}

fn softmax(logits: &[f64]) -> ColorDescriptor {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = weights.iter().sum();
    ColorDescriptor {
        probs: weights.into_iter().map(|w| w / sum).collect(),
    }
}

/// The built-in table: basic vocabulary, default σ and 32 bins per channel.
pub fn default_fallback_table() -> NamingTable {
    fallback_table(&ColorVocabulary::basic(), DEFAULT_FALLBACK_SIGMA, DEFAULT_BINS)
        .expect("default fallback parameters are valid")
}

/// Derives one Lab prototype per term as the probability-weighted centroid
/// of all bin centers.
pub fn derive_prototypes(table: &NamingTable) -> Result<ColorVocabulary, NamingError> {
    let n = table.term_count();
    let mut acc = vec![[0.0f64; 3]; n];
    let mut weight = vec![0.0f64; n];
    for (center, d) in table.bin_centers() {
        let lab = srgb_f64_to_lab(center);
        for (i, &p) in d.probs().iter().enumerate() {
            if p > 0.0 {
                acc[i][0] += p * lab.l;
                acc[i][1] += p * lab.a;
                acc[i][2] += p * lab.b;
                weight[i] += p;
            }
        }
    }
    let prototypes = acc
        .iter()
        .zip(&weight)
        .zip(table.terms())
        .map(|((sum, &w), term)| {
            if w > 0.0 {
                Ok(LabColor::new(sum[0] / w, sum[1] / w, sum[2] / w))
            } else {
                Err(NamingError::DegenerateTerm(term.clone()))
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    ColorVocabulary::new(table.terms().to_vec(), prototypes)
}

/// Symmetric matrix of perceived distances between color terms, in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundDistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl GroundDistanceMatrix {
    /// Validates a row-major `n × n` matrix: zero diagonal, symmetric, entries in `[0, 1]`.
    pub fn new(n: usize, d: Vec<f64>) -> Result<Self, NamingError> {
        if n < 1 || d.len() != n * n {
            return Err(NamingError::InvalidGround(format!("{} entries for a {n}x{n} matrix", d.len())));
        }
        for i in 0..n {
            if d[i * n + i] != 0.0 {
                return Err(NamingError::InvalidGround(format!("diagonal entry {i} is {}", d[i * n + i])));
            }
            for j in 0..n {
                let v = d[i * n + j];
                if !(0.0..=1.0).contains(&v) {
                    return Err(NamingError::InvalidGround(format!("entry ({i}, {j}) = {v} outside [0, 1]")));
                }
                if v != d[j * n + i] {
                    return Err(NamingError::InvalidGround(format!("entries ({i}, {j}) and ({j}, {i}) differ")));
                }
            }
        }
        Ok(Self { n, d })
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.d
    }

    pub fn max(&self) -> f64 {
        self.d.iter().copied().fold(0.0, f64::max)
    }

    /// One row per line, comma separated.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.d.chunks_exact(self.n) {
            let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, NamingError> {
        let mut data = Vec::new();
        let mut rows = 0;
        for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            for field in line.split(',') {
                data.push(field.trim().parse::<f64>().map_err(|_| NamingError::Parse {
                    line: n + 1,
                    msg: format!("invalid number {:?}", field.trim()),
                })?);
            }
            rows += 1;
        }
        Self::new(rows, data)
    }
}

/// Largest pairwise CIEDE2000 distance between prototypes.
pub fn max_prototype_distance(vocab: &ColorVocabulary) -> f64 {
    let p = vocab.prototypes();
    let params = De2000Params::default();
    let mut max = 0.0f64;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            max = max.max(delta_e_2000(p[i], p[j], params));
        }
    }
    max
}

/// `d[i][j] = min(ΔE00(prototype_i, prototype_j), threshold) / threshold`.
pub fn ground_distance(vocab: &ColorVocabulary, threshold: f64) -> Result<GroundDistanceMatrix, NamingError> {
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(NamingError::InvalidParameter(format!(
            "threshold must be positive, got {threshold}"
        )));
    }
    let p = vocab.prototypes();
    let n = p.len();
    let params = De2000Params::default();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = delta_e_2000(p[i], p[j], params).min(threshold) / threshold;
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    GroundDistanceMatrix::new(n, d)
}

/// Ground distances scaled by the largest prototype distance, so the
/// farthest pair of terms sits at exactly 1.
pub fn normalized_ground_distance(vocab: &ColorVocabulary) -> Result<GroundDistanceMatrix, NamingError> {
    ground_distance(vocab, max_prototype_distance(vocab))
}
