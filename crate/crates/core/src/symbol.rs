//! Sequence symbols and their interning table.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::graph::Label;

/// Interned symbol id. Base symbols come first, merged symbols follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SymbolId(pub u32);

impl SymbolId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for SymbolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Orientation of an edge traversal relative to the stored edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeDir {
    Undirected,
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    NodeLabel,
    EdgeLabel,
    BackRef,
    Separator,
    Unknown,
    Merged,
}

/// One position of a serialized sequence, or a learned merge.
///
/// The derived order (variant order first, then payload) is the order used for
/// rotation normalization and component sorting.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    /// Boundary between connected components. Never merged.
    Separator,
    /// Stand-in for out-of-vocabulary input when passthrough is requested.
    Unknown,
    Node(Label),
    /// Revisit of the node discovered with this ordinal in the current component.
    BackRef(u32),
    /// `repeat` marks an extra traversal added by a postman augmentation.
    Edge {
        label: Label,
        dir: EdgeDir,
        repeat: bool,
    },
    Merged(SymbolId, SymbolId),
}

impl Symbol {
    pub fn node(label: &str) -> Self {
        Symbol::Node(Label::new(label))
    }

    pub fn edge(label: &str) -> Self {
        Symbol::Edge {
            label: Label::new(label),
            dir: EdgeDir::Undirected,
            repeat: false,
        }
    }

    pub fn kind(&self) -> SymbolKind {
        match self {
            Symbol::Separator => SymbolKind::Separator,
            Symbol::Unknown => SymbolKind::Unknown,
            Symbol::Node(_) => SymbolKind::NodeLabel,
            Symbol::BackRef(_) => SymbolKind::BackRef,
            Symbol::Edge { .. } => SymbolKind::EdgeLabel,
            Symbol::Merged(..) => SymbolKind::Merged,
        }
    }

    pub fn is_node_position(&self) -> bool {
        matches!(self, Symbol::Node(_) | Symbol::BackRef(_))
    }

    pub fn is_base(&self) -> bool {
        !matches!(self, Symbol::Merged(..))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Separator => f.write_str("|"),
            Symbol::Unknown => f.write_str("<unk>"),
            Symbol::Node(l) => write!(f, "{l}"),
            Symbol::BackRef(k) => write!(f, "↩{k}"),
            Symbol::Edge { label, dir, repeat } => {
                match dir {
                    EdgeDir::Undirected => write!(f, "{label}")?,
                    EdgeDir::Forward => write!(f, "{label}>")?,
                    EdgeDir::Backward => write!(f, "<{label}")?,
                }
                if *repeat {
                    f.write_str("*")?;
                }
                Ok(())
            }
            Symbol::Merged(l, r) => write!(f, "[{l}+{r}]"),
        }
    }
}

/// JSON form of a base symbol: `{"k":"n"|"e"|"b"|"|"|"?","v":...}`, with
/// optional `"d":"f"|"b"` and `"r":true` on edge symbols.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolRepr {
    pub k: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub r: bool,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("invalid symbol: {0}")]
pub struct SymbolReprError(pub String);

impl SymbolRepr {
    pub fn from_symbol(s: &Symbol) -> Option<SymbolRepr> {
        let repr = |k: &str, v: Option<serde_json::Value>| SymbolRepr {
            k: k.to_string(),
            v,
            d: None,
            r: false,
        };
        Some(match s {
            Symbol::Separator => repr("|", None),
            Symbol::Unknown => repr("?", None),
            Symbol::Node(l) => repr("n", Some(l.as_str().into())),
            Symbol::BackRef(k) => repr("b", Some((*k).into())),
            Symbol::Edge { label, dir, repeat } => SymbolRepr {
                k: "e".into(),
                v: Some(label.as_str().into()),
                d: match dir {
                    EdgeDir::Undirected => None,
                    EdgeDir::Forward => Some("f".into()),
                    EdgeDir::Backward => Some("b".into()),
                },
                r: *repeat,
            },
            Symbol::Merged(..) => return None,
        })
    }

    pub fn to_symbol(&self) -> Result<Symbol, SymbolReprError> {
        let label = || -> Result<Label, SymbolReprError> {
            match &self.v {
                Some(serde_json::Value::String(s)) if !s.is_empty() => Ok(Label::new(s)),
                _ => Err(SymbolReprError(format!("kind {:?} needs a label", self.k))),
            }
        };
        match self.k.as_str() {
            "|" => Ok(Symbol::Separator),
            "?" => Ok(Symbol::Unknown),
            "n" => Ok(Symbol::Node(label()?)),
            "b" => match self.v.as_ref().and_then(|v| v.as_u64()) {
                Some(k) if k <= u32::MAX as u64 => Ok(Symbol::BackRef(k as u32)),
                _ => Err(SymbolReprError("back-reference needs an ordinal".into())),
            },
            "e" => {
                let dir = match self.d.as_deref() {
                    None => EdgeDir::Undirected,
                    Some("f") => EdgeDir::Forward,
                    Some("b") => EdgeDir::Backward,
                    Some(other) => {
                        return Err(SymbolReprError(format!("unknown direction {other:?}")))
                    }
                };
                Ok(Symbol::Edge {
                    label: label()?,
                    dir,
                    repeat: self.r,
                })
            }
            other => Err(SymbolReprError(format!("unknown kind {other:?}"))),
        }
    }
}

/// Bidirectional map between symbols and dense ids.
#[derive(Debug, Clone, Default)]
pub struct SymbolTable {
    symbols: Vec<Symbol>,
    index: HashMap<Symbol, SymbolId>,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, s: Symbol) -> SymbolId {
        if let Some(&id) = self.index.get(&s) {
            return id;
        }
        let id = SymbolId(self.symbols.len() as u32);
        self.symbols.push(s.clone());
        self.index.insert(s, id);
        id
    }

    pub fn get(&self, s: &Symbol) -> Option<SymbolId> {
        self.index.get(s).copied()
    }

    pub fn resolve(&self, id: SymbolId) -> Option<&Symbol> {
        self.symbols.get(id.index())
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (SymbolId, &Symbol)> {
        self.symbols
            .iter()
            .enumerate()
            .map(|(i, s)| (SymbolId(i as u32), s))
    }
}
