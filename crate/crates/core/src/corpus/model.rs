//! `.gtok.json` model files.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bpe::Codebook;
use crate::graph::Label;
use crate::serialize::{Emission, GKind, Method, SerializationConfig};
use crate::stats::{FrequencyMap, GuidanceUnit, Pattern};
use crate::symbol::{Symbol, SymbolId, SymbolRepr};
use crate::tokenizer::TokenizerModel;

use super::CorpusError;

pub const MODEL_FORMAT_VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    walks: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    length: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    alpha: f64,
    g: String,
    rotation_normalize: bool,
    emission: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format_version: u64,
    config: ConfigFile,
    unit: String,
    truncated: bool,
    alphabet: Vec<SymbolRepr>,
    /// `[label..., F, C]` per pattern, in pattern order.
    frequencies: Vec<Vec<Value>>,
    /// `[left, right, new]` in rank order.
    merges: Vec<[u32; 3]>,
}

fn corrupt(m: impl Into<String>) -> CorpusError {
    CorpusError::CorruptFile(m.into())
}

/// Pretty-printed model document. Equal models give identical bytes.
pub fn model_to_json(m: &TokenizerModel) -> String {
    let c = m.config();
    let (walks, length, seed) = match c.method {
        Method::RandomWalk { walks, length, seed } => (Some(walks), Some(length), Some(seed)),
        _ => (None, None, None),
    };
    let file = ModelFile {
        format_version: MODEL_FORMAT_VERSION,
        config: ConfigFile {
            method: c.method.name().to_string(),
            walks,
            length,
            seed,
            alpha: c.alpha,
            g: c.g_kind.to_string(),
            rotation_normalize: c.rotation_normalize,
            emission: match c.emission {
                Emission::BackRef => "backref".into(),
                Emission::LabelOnly => "label-only".into(),
            },
        },
        unit: m.unit().to_string(),
        truncated: m.frequencies().truncated(),
        alphabet: m
            .codebook()
            .alphabet()
            .iter()
            .map(|s| SymbolRepr::from_symbol(s).expect("alphabet holds base symbols"))
            .collect(),
        frequencies: m
            .frequencies()
            .iter()
            .map(|(p, c, f)| {
                let mut row: Vec<Value> = p.labels().iter().map(|l| Value::from(l.as_str())).collect();
                row.push(Value::from(f));
                row.push(Value::from(c));
                row
            })
            .collect(),
        merges: m
            .codebook()
            .merges()
            .iter()
            .map(|r| [r.left.0, r.right.0, r.result.0])
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("model serializes");
    s.push('\n');
    s
}

pub fn model_from_json(text: &str) -> Result<TokenizerModel, CorpusError> {
    let v: Value = serde_json::from_str(text).map_err(|e| corrupt(e.to_string()))?;
    let version = v
        .get("format_version")
        .and_then(Value::as_u64)
        .ok_or_else(|| corrupt("missing format_version"))?;
    if version > MODEL_FORMAT_VERSION {
        return Err(CorpusError::VersionMismatch {
            found: version,
            supported: MODEL_FORMAT_VERSION,
        });
    }
    if version == 0 {
        return Err(corrupt("format_version 0 is not valid"));
    }
    let file: ModelFile = serde_json::from_value(v).map_err(|e| corrupt(e.to_string()))?;

    let c = &file.config;
    let mut method: Method = c.method.parse().map_err(|e: crate::serialize::SerializeError| corrupt(e.to_string()))?;
    if let Method::RandomWalk { .. } = method {
        method = Method::RandomWalk {
            walks: c.walks.ok_or_else(|| corrupt("random walk config needs walks"))?,
            length: c.length.ok_or_else(|| corrupt("random walk config needs length"))?,
            seed: c.seed.ok_or_else(|| corrupt("random walk config needs seed"))?,
        };
    }
    let g_kind: GKind = c.g.parse().map_err(|e: crate::serialize::SerializeError| corrupt(e.to_string()))?;
    let emission = match c.emission.as_str() {
        "backref" => Emission::BackRef,
        "label-only" => Emission::LabelOnly,
        other => return Err(corrupt(format!("unknown emission {other:?}"))),
    };
    let config = SerializationConfig {
        method,
        alpha: c.alpha,
        g_kind,
        rotation_normalize: c.rotation_normalize,
        emission,
    };
    let unit: GuidanceUnit = file.unit.parse().map_err(|e: crate::stats::StatsError| corrupt(e.to_string()))?;

    let mut counts = BTreeMap::new();
    let mut stated = Vec::with_capacity(file.frequencies.len());
    for (i, row) in file.frequencies.iter().enumerate() {
        if row.len() < 3 {
            return Err(corrupt(format!("frequency row {i} is too short")));
        }
        let n = row.len() - 2;
        let labels = row[..n]
            .iter()
            .map(|x| match x.as_str() {
                Some(s) if !s.is_empty() => Ok(Label::new(s)),
                _ => Err(corrupt(format!("frequency row {i} has a bad label"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let f = row[n].as_f64().ok_or_else(|| corrupt(format!("frequency row {i} has a bad F")))?;
        let cnt = row[n + 1]
            .as_u64()
            .filter(|&x| x > 0)
            .ok_or_else(|| corrupt(format!("frequency row {i} has a bad count")))?;
        if counts.insert(Pattern(labels), cnt).is_some() {
            return Err(corrupt(format!("frequency row {i} repeats a pattern")));
        }
        stated.push(f);
    }
    let freq = FrequencyMap::from_counts(unit, counts, file.truncated);
    for (i, ((_, _, f), s)) in freq.iter().zip(&stated).enumerate() {
        if (f - s).abs() > 1e-12 * f.max(1e-300).max(*s) + 1e-300 {
            return Err(corrupt(format!("frequency row {i}: F disagrees with counts")));
        }
    }

    let alphabet = file
        .alphabet
        .iter()
        .map(|r| r.to_symbol().map_err(|e| corrupt(e.to_string())))
        .collect::<Result<Vec<Symbol>, _>>()?;
    let base = alphabet.len() as u32;
    let mut pairs = Vec::with_capacity(file.merges.len());
    for (r, &[l, rt, new]) in file.merges.iter().enumerate() {
        if new != base + r as u32 {
            return Err(corrupt(format!("merge {r} produces id {new}, expected {}", base + r as u32)));
        }
        pairs.push((SymbolId(l), SymbolId(rt)));
    }
    let codebook = Codebook::new(alphabet, &pairs).map_err(|e| corrupt(e.to_string()))?;
    TokenizerModel::from_parts(config, unit, freq, codebook).map_err(|e| corrupt(e.to_string()))
}

pub fn save_model(m: &TokenizerModel, path: impl AsRef<Path>) -> Result<(), CorpusError> {
    let p = path.as_ref();
    std::fs::write(p, model_to_json(m)).map_err(|e| CorpusError::io(p, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TokenizerModel, CorpusError> {
    let p = path.as_ref();
    let text = std::fs::read(p).map_err(|e| CorpusError::io(p, e))?;
    let text = String::from_utf8(text).map_err(|_| corrupt("not UTF-8"))?;
    model_from_json(&text)
}
