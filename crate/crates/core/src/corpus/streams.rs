//! `.tokens.jsonl` and `.seqs.jsonl` records.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::bpe::TokenSequence;
use crate::serialize::SerializedSequence;
use crate::symbol::{Symbol, SymbolId, SymbolRepr};

use super::CorpusError;

/// One line of a token file. `lossy` is set when out-of-vocabulary symbols
/// were mapped to the unknown token, which breaks decoding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TokenRecord {
    pub id: Option<String>,
    pub tokens: Vec<u32>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub lossy: bool,
}

impl TokenRecord {
    pub fn to_sequence(&self) -> TokenSequence {
        TokenSequence {
            tokens: self.tokens.iter().map(|&t| SymbolId(t)).collect(),
            source_id: self.id.clone(),
        }
    }

    pub fn from_sequence(t: &TokenSequence, lossy: bool) -> Self {
        TokenRecord {
            id: t.source_id.clone(),
            tokens: t.tokens.iter().map(|t| t.0).collect(),
            lossy,
        }
    }
}

/// One line of a sequence file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceRecord {
    pub id: Option<String>,
    pub method: String,
    pub symbols: Vec<SymbolRepr>,
}

impl SequenceRecord {
    pub fn from_sequence(id: Option<String>, s: &SerializedSequence) -> Self {
        SequenceRecord {
            id,
            method: s.config.method.name().to_string(),
            symbols: s
                .symbols
                .iter()
                .map(|x| SymbolRepr::from_symbol(x).expect("serialized sequences hold base symbols"))
                .collect(),
        }
    }

    pub fn to_symbols(&self) -> Result<Vec<Symbol>, String> {
        self.symbols
            .iter()
            .map(|r| r.to_symbol().map_err(|e| e.to_string()))
            .collect()
    }
}

fn read_lines<R: BufRead, T: for<'de> Deserialize<'de>>(
    reader: R,
) -> impl Iterator<Item = Result<T, CorpusError>> {
    reader
        .lines()
        .enumerate()
        .filter(|(_, l)| !matches!(l, Ok(t) if t.trim().is_empty()))
        .map(|(i, l)| {
            let line = i + 1;
            let text = l.map_err(|e| CorpusError::ParseError {
                line,
                message: e.to_string(),
            })?;
            serde_json::from_str(&text).map_err(|e| CorpusError::ParseError {
                line,
                message: e.to_string(),
            })
        })
}

pub fn read_tokens<R: BufRead>(reader: R) -> impl Iterator<Item = Result<TokenRecord, CorpusError>> {
    read_lines(reader)
}

pub fn read_sequences<R: BufRead>(reader: R) -> impl Iterator<Item = Result<SequenceRecord, CorpusError>> {
    read_lines(reader)
}

fn write_lines<'a, W: Write, T: Serialize + 'a>(mut w: W, recs: impl IntoIterator<Item = &'a T>) -> io::Result<()> {
    for r in recs {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn write_tokens<'a, W: Write>(w: W, recs: impl IntoIterator<Item = &'a TokenRecord>) -> io::Result<()> {
    write_lines(w, recs)
}

pub fn write_sequences<'a, W: Write>(w: W, recs: impl IntoIterator<Item = &'a SequenceRecord>) -> io::Result<()> {
    write_lines(w, recs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn token_lines_roundtrip() {
        let recs = vec![
            TokenRecord { id: Some("a".into()), tokens: vec![3, 4, 0, 9], lossy: false },
            TokenRecord { id: None, tokens: vec![], lossy: true },
        ];
        let mut buf = Vec::new();
        write_tokens(&mut buf, &recs).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "{\"id\":\"a\",\"tokens\":[3,4,0,9]}\n{\"id\":null,\"tokens\":[],\"lossy\":true}\n"
        );
        let back: Vec<TokenRecord> = read_tokens(&buf[..]).collect::<Result<_, _>>().unwrap();
        assert_eq!(back, recs);
    }

    #[test]
    fn sequence_lines_roundtrip() {
        let r = SequenceRecord {
            id: Some("g".into()),
            method: "feuler".into(),
            symbols: [Symbol::node("a"), Symbol::edge("x"), Symbol::BackRef(0), Symbol::Separator]
                .iter()
                .map(|s| SymbolRepr::from_symbol(s).unwrap())
                .collect(),
        };
        let mut buf = Vec::new();
        write_sequences(&mut buf, [&r]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains(r#"{"k":"n","v":"a"}"#), "{text}");
        let back: Vec<SequenceRecord> = read_sequences(&buf[..]).collect::<Result<_, _>>().unwrap();
        assert_eq!(back, vec![r]);
        assert!(read_tokens(&b"{\"tokens\":[-1]}"[..]).next().unwrap().is_err());
    }
}
