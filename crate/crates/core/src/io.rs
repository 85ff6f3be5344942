//! On-disk formats: binary tensors, anchor and label CSVs, translator JSON.
//!
//! # Tensor layout
//!
//! All integers little-endian.
//!
//! | offset | size      | field                               |
//! |--------|-----------|-------------------------------------|
//! | 0      | 4         | magic `LTEN`                        |
//! | 4      | 4         | version, `u32` (currently 1)        |
//! | 8      | 1         | dtype, `u8`: 1 = f32, 2 = f64       |
//! | 9      | 1         | ndim, `u8`: 1 or 2                  |
//! | 10     | 8 * ndim  | dims, `u64` each                    |
//! | ...    | prod(dims) * dtype size | row-major payload     |
//!
//! A file must be exactly header plus payload long. A 1-D tensor of length `n`
//! reads as an `n x 1` space.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::preprocess::NormalizerState;
use crate::space::{AnchorCorrespondence, LatentSpace};
use crate::translator::{Translator, TranslatorParts};
use crate::types::{EstimatorKind, L2Denorm};

pub const TENSOR_MAGIC: [u8; 4] = *b"LTEN";
pub const TENSOR_VERSION: u32 = 1;
const FIXED_HEADER_LEN: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    F32,
    F64,
}

impl Dtype {
    pub fn code(self) -> u8 {
        match self {
            Dtype::F32 => 1,
            Dtype::F64 => 2,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            1 => Ok(Dtype::F32),
            2 => Ok(Dtype::F64),
            other => Err(Error::UnknownDtype(other)),
        }
    }

    pub fn size(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorFileHeader {
    pub version: u32,
    pub dtype: Dtype,
    pub dims: Vec<u64>,
}

impl TensorFileHeader {
    pub fn encoded_len(&self) -> usize {
        FIXED_HEADER_LEN + 8 * self.dims.len()
    }

    pub fn payload_len(&self) -> Option<u64> {
        self.dims
            .iter()
            .try_fold(1u64, |acc, &d| acc.checked_mul(d))?
            .checked_mul(self.dtype.size() as u64)
    }

    fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(&TENSOR_MAGIC);
        out.extend_from_slice(&self.version.to_le_bytes());
        out.push(self.dtype.code());
        out.push(self.dims.len() as u8);
        for d in &self.dims {
            out.extend_from_slice(&d.to_le_bytes());
        }
        out
    }

    /// Parses a header from the start of `bytes`.
    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let short = |expected: usize| Error::TruncatedPayload {
            expected: expected as u64,
            found: bytes.len() as u64,
        };
        if bytes.len() < 4 {
            return Err(short(FIXED_HEADER_LEN));
        }
        let magic: [u8; 4] = bytes[0..4].try_into().expect("4-byte slice");
        if magic != TENSOR_MAGIC {
            return Err(Error::BadMagic(magic));
        }
        if bytes.len() < FIXED_HEADER_LEN {
            return Err(short(FIXED_HEADER_LEN));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4-byte slice"));
        if version != TENSOR_VERSION {
            return Err(Error::UnknownVersion(version));
        }
        let dtype = Dtype::from_code(bytes[8])?;
        let ndim = bytes[9];
        if !(1..=2).contains(&ndim) {
            return Err(Error::BadRank(ndim));
        }
        let header_len = FIXED_HEADER_LEN + 8 * ndim as usize;
        if bytes.len() < header_len {
            return Err(short(header_len));
        }
        let dims = bytes[FIXED_HEADER_LEN..header_len]
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        Ok(Self {
            version,
            dtype,
            dims,
        })
    }
}

/// Serializes a space to the tensor byte layout.
pub fn encode_tensor(space: &LatentSpace, dtype: Dtype) -> Vec<u8> {
    let header = TensorFileHeader {
        version: TENSOR_VERSION,
        dtype,
        dims: vec![space.count() as u64, space.dim() as u64],
    };
    let mut out = header.encode();
    out.reserve(space.count() * space.dim() * dtype.size());
    for row in space.matrix().row_iter() {
        for &v in row.iter() {
            match dtype {
                Dtype::F32 => out.extend_from_slice(&(v as f32).to_le_bytes()),
                Dtype::F64 => out.extend_from_slice(&v.to_le_bytes()),
            }
        }
    }
    out
}

/// Parses the tensor byte layout, validating the header and exact length
/// before touching the payload.
pub fn decode_tensor(bytes: &[u8]) -> Result<LatentSpace> {
    let header = TensorFileHeader::decode(bytes)?;
    let payload_len = header
        .payload_len()
        .ok_or_else(|| Error::InvalidConfig("tensor dimensions overflow".into()))?;
    let expected = header.encoded_len() as u64 + payload_len;
    let found = bytes.len() as u64;
    if found < expected {
        return Err(Error::TruncatedPayload { expected, found });
    }
    if found > expected {
        return Err(Error::TrailingBytes { expected, found });
    }
    let (rows, cols) = match header.dims[..] {
        [n] => (n as usize, 1),
        [n, d] => (n as usize, d as usize),
        _ => unreachable!("rank checked in header decode"),
    };
    let payload = &bytes[header.encoded_len()..];
    let values: Vec<f64> = match header.dtype {
        Dtype::F32 => payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4-byte chunk")) as f64)
            .collect(),
        Dtype::F64 => payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect(),
    };
    LatentSpace::new(DMatrix::from_row_slice(rows, cols, &values))
}

pub fn write_tensor(space: &LatentSpace, path: impl AsRef<Path>, dtype: Dtype) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_tensor(space, dtype)).map_err(|e| Error::io(path, e))
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<LatentSpace> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_tensor(&bytes)
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Parses `src_idx,tgt_idx` rows (header required).
pub fn parse_anchor_csv(text: &str) -> Result<AnchorCorrespondence> {
    let mut reader = csv_reader(text);
    let headers = reader.headers().map_err(csv_error)?.clone();
    if headers.len() != 2 || &headers[0] != "src_idx" || &headers[1] != "tgt_idx" {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `src_idx,tgt_idx`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut src = Vec::new();
    let mut tgt = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| -> Result<usize> {
            let raw = record.get(i).unwrap_or("");
            raw.parse().map_err(|_| Error::Parse {
                line,
                message: format!("`{raw}` is not a non-negative integer"),
            })
        };
        src.push(field(0)?);
        tgt.push(field(1)?);
    }
    AnchorCorrespondence::new(src, tgt)
}

pub fn read_anchor_csv(path: impl AsRef<Path>) -> Result<AnchorCorrespondence> {
    parse_anchor_csv(&read_text(path.as_ref())?)
}

pub fn write_anchor_csv(anchors: &AnchorCorrespondence, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("src_idx,tgt_idx\n");
    for (s, t) in anchors.pairs() {
        out.push_str(&format!("{s},{t}\n"));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Class labels: `indices[i]` is the class of row `i`, `names[c]` the name of class `c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labels {
    pub names: Vec<String>,
    pub indices: Vec<usize>,
}

impl Labels {
    /// Builds labels from per-row names; classes are numbered in first-seen order.
    pub fn from_names<S: AsRef<str>>(rows: &[S]) -> Self {
        let mut lookup = HashMap::new();
        let mut names = Vec::new();
        let indices = rows
            .iter()
            .map(|r| {
                let r = r.as_ref();
                *lookup.entry(r.to_owned()).or_insert_with(|| {
                    names.push(r.to_owned());
                    names.len() - 1
                })
            })
            .collect();
        Self { names, indices }
    }

    pub fn from_indices(indices: &[usize]) -> Self {
        let names: Vec<String> = indices.iter().map(|i| i.to_string()).collect();
        Self::from_names(&names)
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Parses a one-column CSV with header `label`.
pub fn parse_labels_csv(text: &str) -> Result<Labels> {
    let mut reader = csv_reader(text);
    let headers = reader.headers().map_err(csv_error)?.clone();
    if headers.len() != 1 || &headers[0] != "label" {
        return Err(Error::Parse {
            line: 1,
            message: "expected header `label`".into(),
        });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        rows.push(record.get(0).unwrap_or("").to_owned());
    }
    Ok(Labels::from_names(&rows))
}

pub fn read_labels_csv(path: impl AsRef<Path>) -> Result<Labels> {
    parse_labels_csv(&read_text(path.as_ref())?)
}

pub fn write_labels_csv(labels: &Labels, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut writer = csv::Writer::from_writer(Vec::new());
    let io_err = |e: csv::Error| Error::io(path, std::io::Error::other(e));
    writer.write_record(["label"]).map_err(io_err)?;
    for &i in &labels.indices {
        writer.write_record([&labels.names[i]]).map_err(io_err)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub const TRANSLATOR_FORMAT: &str = "latent-translator";
pub const TRANSLATOR_VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixDoc {
    rows: usize,
    cols: usize,
    /// base64 of row-major little-endian f64
    data: String,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
enum NormalizerDoc {
    Standard { means: String, scales: String },
    UnitNorm { dim: usize, mean_anchor_norm: String },
    None { dim: usize },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TranslatorDoc {
    format: String,
    version: u64,
    kind: String,
    padded_dim: usize,
    source_raw_dim: usize,
    target_raw_dim: usize,
    l2_denorm: String,
    r_matrix: MatrixDoc,
    bias: String,
    source_norm: NormalizerDoc,
    target_norm: NormalizerDoc,
}

fn encode_f64s(values: impl IntoIterator<Item = f64>) -> String {
    let bytes: Vec<u8> = values.into_iter().flat_map(f64::to_le_bytes).collect();
    B64.encode(bytes)
}

fn decode_f64s(field: &str, text: &str) -> Result<Vec<f64>> {
    let bytes = B64
        .decode(text)
        .map_err(|e| Error::Schema(format!("`{field}` is not valid base64: {e}")))?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Schema(format!(
            "`{field}` holds {} bytes, not a whole number of f64 values",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}

fn decode_len(field: &str, text: &str, len: usize) -> Result<Vec<f64>> {
    let v = decode_f64s(field, text)?;
    if v.len() != len {
        return Err(Error::Schema(format!(
            "`{field}` holds {} values, expected {len}",
            v.len()
        )));
    }
    Ok(v)
}

impl NormalizerDoc {
    fn from_state(state: &NormalizerState) -> Self {
        match state {
            NormalizerState::Standard { means, scales } => NormalizerDoc::Standard {
                means: encode_f64s(means.iter().copied()),
                scales: encode_f64s(scales.iter().copied()),
            },
            NormalizerState::UnitNorm {
                dim,
                mean_anchor_norm,
            } => NormalizerDoc::UnitNorm {
                dim: *dim,
                mean_anchor_norm: encode_f64s([*mean_anchor_norm]),
            },
            NormalizerState::None { dim } => NormalizerDoc::None { dim: *dim },
        }
    }

    fn into_state(self, dim: usize) -> Result<NormalizerState> {
        Ok(match self {
            NormalizerDoc::Standard { means, scales } => NormalizerState::Standard {
                means: decode_len("means", &means, dim)?,
                scales: decode_len("scales", &scales, dim)?,
            },
            NormalizerDoc::UnitNorm {
                dim,
                mean_anchor_norm,
            } => NormalizerState::UnitNorm {
                dim,
                mean_anchor_norm: decode_len("mean_anchor_norm", &mean_anchor_norm, 1)?[0],
            },
            NormalizerDoc::None { dim } => NormalizerState::None { dim },
        })
    }
}

pub fn translator_to_json(translator: &Translator) -> String {
    let r = translator.r_matrix();
    let row_major = r.transpose();
    let doc = TranslatorDoc {
        format: TRANSLATOR_FORMAT.to_owned(),
        version: TRANSLATOR_VERSION,
        kind: translator.kind().as_str().to_owned(),
        padded_dim: translator.padded_dim(),
        source_raw_dim: translator.source_raw_dim(),
        target_raw_dim: translator.target_raw_dim(),
        l2_denorm: translator.l2_denorm().as_str().to_owned(),
        r_matrix: MatrixDoc {
            rows: r.nrows(),
            cols: r.ncols(),
            data: encode_f64s(row_major.iter().copied()),
        },
        bias: encode_f64s(translator.bias().iter().copied()),
        source_norm: NormalizerDoc::from_state(translator.source_norm()),
        target_norm: NormalizerDoc::from_state(translator.target_norm()),
    };
    serde_json::to_string_pretty(&doc).expect("translator document serializes")
}

pub fn translator_from_json(text: &str) -> Result<Translator> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| Error::Schema(format!("invalid JSON: {e}")))?;
    // version is checked before the full schema so newer documents report a version error
    match value.get("version").and_then(Value::as_u64) {
        Some(TRANSLATOR_VERSION) => {}
        Some(other) => return Err(Error::Version(other)),
        None => return Err(Error::Schema("missing or non-integer `version`".into())),
    }
    let doc: TranslatorDoc =
        serde_json::from_value(value).map_err(|e| Error::Schema(e.to_string()))?;
    if doc.format != TRANSLATOR_FORMAT {
        return Err(Error::Schema(format!("unexpected format `{}`", doc.format)));
    }
    let kind: EstimatorKind = doc
        .kind
        .parse()
        .map_err(|_| Error::Schema(format!("unknown kind `{}`", doc.kind)))?;
    let l2_denorm: L2Denorm = doc
        .l2_denorm
        .parse()
        .map_err(|_| Error::Schema(format!("unknown l2_denorm `{}`", doc.l2_denorm)))?;
    let d = doc.padded_dim;
    if d != doc.source_raw_dim.max(doc.target_raw_dim) {
        return Err(Error::Schema("padded_dim must equal the larger raw dimension".into()));
    }
    if doc.r_matrix.rows != d || doc.r_matrix.cols != d {
        return Err(Error::Schema(format!(
            "r_matrix is {}x{}, expected {d}x{d}",
            doc.r_matrix.rows, doc.r_matrix.cols
        )));
    }
    let r_values = decode_len("r_matrix.data", &doc.r_matrix.data, d * d)?;
    let parts = TranslatorParts {
        kind,
        r_matrix: DMatrix::from_row_slice(d, d, &r_values),
        bias: DVector::from_vec(decode_len("bias", &doc.bias, d)?),
        source_norm: doc.source_norm.into_state(d)?,
        target_norm: doc.target_norm.into_state(d)?,
        source_raw_dim: doc.source_raw_dim,
        target_raw_dim: doc.target_raw_dim,
        l2_denorm,
    };
    Translator::from_parts(parts).map_err(|e| Error::Schema(e.to_string()))
}

pub fn write_translator(translator: &Translator, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, translator_to_json(translator)).map_err(|e| Error::io(path, e))
}

pub fn read_translator(path: impl AsRef<Path>) -> Result<Translator> {
    translator_from_json(&read_text(path.as_ref())?)
}
