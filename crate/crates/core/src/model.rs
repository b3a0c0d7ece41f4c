//! Core value types shared across the crate: edges, attribute values,
//! schemas, time ranges and route role flags.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Global vertex identifier. `0` is reserved and rejected on ingest.
pub type VertexId = u64;

/// Milliseconds since the UNIX epoch (UTC).
pub type Timestamp = u64;

pub const MILLIS_PER_HOUR: u64 = 3_600_000;

/// Last millisecond of 9999-12-31 UTC; later timestamps have no `dt=` date.
pub const MAX_TIMESTAMP: Timestamp = 253_402_300_799_999;

/// Largest allowed edge type name, in bytes.
pub const MAX_EDGE_TYPE_LEN: usize = 255;

/// UTC epoch hour containing `timestamp`.
#[inline]
pub fn hour_bucket(timestamp: Timestamp) -> u64 {
    timestamp / MILLIS_PER_HOUR
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttrType {
    Int,
    Long,
    Double,
    #[serde(rename = "string")]
    Str,
}

impl AttrType {
    pub fn name(self) -> &'static str {
        match self {
            AttrType::Int => "int",
            AttrType::Long => "long",
            AttrType::Double => "double",
            AttrType::Str => "string",
        }
    }

    /// Parses a textual cell into a value of this type.
    pub fn parse_value(self, text: &str) -> Option<AttributeValue> {
        match self {
            AttrType::Int => text.parse().ok().map(AttributeValue::Int),
            AttrType::Long => text.parse().ok().map(AttributeValue::Long),
            AttrType::Double => text.parse().ok().map(AttributeValue::Double),
            AttrType::Str => Some(AttributeValue::Str(text.to_owned())),
        }
    }
}

impl fmt::Display for AttrType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A single attribute cell.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum AttributeValue {
    Int(i32),
    Long(i64),
    Double(f64),
    Str(String),
}

impl AttributeValue {
    pub fn attr_type(&self) -> AttrType {
        match self {
            AttributeValue::Int(_) => AttrType::Int,
            AttributeValue::Long(_) => AttrType::Long,
            AttributeValue::Double(_) => AttrType::Double,
            AttributeValue::Str(_) => AttrType::Str,
        }
    }

    /// Numeric view of the value, `None` for strings.
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            AttributeValue::Int(v) => Some(v as f64),
            AttributeValue::Long(v) => Some(v as f64),
            AttributeValue::Double(v) => Some(v),
            AttributeValue::Str(_) => None,
        }
    }
}

// Doubles compare by bit pattern so that round-trip checks are exact and
// multisets of edges can be sorted and compared.
impl PartialEq for AttributeValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}

impl Eq for AttributeValue {}

impl PartialOrd for AttributeValue {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for AttributeValue {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use AttributeValue::*;
        match (self, other) {
            (Int(a), Int(b)) => a.cmp(b),
            (Long(a), Long(b)) => a.cmp(b),
            (Double(a), Double(b)) => a.to_bits().cmp(&b.to_bits()),
            (Str(a), Str(b)) => a.cmp(b),
            _ => self.attr_type().cmp(&other.attr_type()),
        }
    }
}

impl std::hash::Hash for AttributeValue {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        match self {
            AttributeValue::Int(v) => (0u8, *v as i64).hash(state),
            AttributeValue::Long(v) => (1u8, *v).hash(state),
            AttributeValue::Double(v) => (2u8, v.to_bits() as i64).hash(state),
            AttributeValue::Str(v) => (3u8, v).hash(state),
        }
    }
}

impl fmt::Display for AttributeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttributeValue::Int(v) => write!(f, "{v}"),
            AttributeValue::Long(v) => write!(f, "{v}"),
            AttributeValue::Double(v) => write!(f, "{v}"),
            AttributeValue::Str(v) => f.write_str(v),
        }
    }
}

/// One schema column: a name and a value type.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnDef {
    pub col: String,
    #[serde(rename = "type")]
    pub ty: AttrType,
}

impl ColumnDef {
    pub fn new(col: impl Into<String>, ty: AttrType) -> Self {
        Self { col: col.into(), ty }
    }
}

/// Declares the attribute columns of every edge type and the versioned
/// vertex attributes of a graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSchema {
    pub graph_id: String,
    pub edge_types: BTreeMap<String, Vec<ColumnDef>>,
    #[serde(default)]
    pub vertex_attrs: Vec<ColumnDef>,
}

impl GraphSchema {
    pub fn new(graph_id: impl Into<String>) -> Self {
        Self {
            graph_id: graph_id.into(),
            edge_types: BTreeMap::new(),
            vertex_attrs: Vec::new(),
        }
    }

    pub fn with_edge_type(mut self, name: impl Into<String>, columns: Vec<ColumnDef>) -> Self {
        self.edge_types.insert(name.into(), columns);
        self
    }

    pub fn with_vertex_attr(mut self, name: impl Into<String>, ty: AttrType) -> Self {
        self.vertex_attrs.push(ColumnDef::new(name, ty));
        self
    }

    pub fn edge_columns(&self, edge_type: &str) -> Option<&[ColumnDef]> {
        self.edge_types.get(edge_type).map(Vec::as_slice)
    }

    pub fn vertex_attr(&self, name: &str) -> Option<&ColumnDef> {
        self.vertex_attrs.iter().find(|c| c.col == name)
    }

    /// Checks the schema's own invariants: unique column names per edge type,
    /// unique vertex attribute names, non-empty graph id and bounded type names.
    pub fn check(&self) -> Result<(), Violation> {
        if self.graph_id.is_empty() || self.graph_id.contains(['/', '\\']) {
            return Err(Violation::new("graph_id", "must be a non-empty path segment"));
        }
        for (name, cols) in &self.edge_types {
            if name.is_empty() || name.len() > MAX_EDGE_TYPE_LEN || name.contains(['/', '\\']) {
                return Err(Violation::new("edge_type", format!("invalid edge type name {name:?}")));
            }
            let mut seen = HashSet::new();
            for c in cols {
                if !seen.insert(c.col.as_str()) {
                    return Err(Violation::new(
                        "edge_types",
                        format!("duplicate column {:?} in edge type {name:?}", c.col),
                    ));
                }
            }
        }
        let mut seen = HashSet::new();
        for c in &self.vertex_attrs {
            if !seen.insert(c.col.as_str()) {
                return Err(Violation::new("vertex_attrs", format!("duplicate attribute {:?}", c.col)));
            }
        }
        Ok(())
    }
}

/// Inclusive time interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TimeRange {
    pub start: Timestamp,
    pub end: Timestamp,
}

impl TimeRange {
    pub const ALL: TimeRange = TimeRange { start: 0, end: u64::MAX };

    /// Returns `None` when `start > end`.
    pub fn new(start: Timestamp, end: Timestamp) -> Option<Self> {
        (start <= end).then_some(Self { start, end })
    }

    pub fn up_to(end: Timestamp) -> Self {
        Self { start: 0, end }
    }

    #[inline]
    pub fn contains(&self, t: Timestamp) -> bool {
        self.start <= t && t <= self.end
    }
}

/// Which endpoint(s) of the edges in a partition a vertex occupies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RoleFlag {
    Src,
    Dst,
    Both,
}

impl RoleFlag {
    pub fn bits(self) -> u32 {
        match self {
            RoleFlag::Src => 0b01,
            RoleFlag::Dst => 0b10,
            RoleFlag::Both => 0b11,
        }
    }

    pub fn from_bits(bits: u32) -> Option<Self> {
        match bits {
            0b01 => Some(RoleFlag::Src),
            0b10 => Some(RoleFlag::Dst),
            0b11 => Some(RoleFlag::Both),
            _ => None,
        }
    }

    pub fn has_src(self) -> bool {
        self.bits() & 0b01 != 0
    }

    pub fn has_dst(self) -> bool {
        self.bits() & 0b10 != 0
    }

    pub fn union(self, other: RoleFlag) -> RoleFlag {
        RoleFlag::from_bits(self.bits() | other.bits()).expect("union of valid flags is valid")
    }
}

/// An edge event: the unit of ingest.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub src: VertexId,
    pub dst: VertexId,
    pub edge_type: String,
    pub timestamp: Timestamp,
    pub attributes: Vec<AttributeValue>,
}

impl Edge {
    pub fn new(
        src: VertexId,
        dst: VertexId,
        edge_type: impl Into<String>,
        timestamp: Timestamp,
        attributes: Vec<AttributeValue>,
    ) -> Self {
        Self { src, dst, edge_type: edge_type.into(), timestamp, attributes }
    }
}

/// A versioned update of one vertex attribute.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexUpdate {
    pub vertex: VertexId,
    pub attr: String,
    pub timestamp: Timestamp,
    pub value: AttributeValue,
}

/// Names the field of an edge (or schema) that broke an invariant.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{field}: {reason}")]
pub struct Violation {
    pub field: String,
    pub reason: String,
}

impl Violation {
    pub fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self { field: field.into(), reason: reason.into() }
    }
}

pub fn validate_edge(edge: &Edge, schema: &GraphSchema) -> Result<(), Violation> {
    if edge.src == 0 {
        return Err(Violation::new("src", "vertex id 0 is reserved"));
    }
    if edge.dst == 0 {
        return Err(Violation::new("dst", "vertex id 0 is reserved"));
    }
    if edge.edge_type.len() > MAX_EDGE_TYPE_LEN {
        return Err(Violation::new("edge_type", "longer than 255 bytes"));
    }
    let Some(columns) = schema.edge_columns(&edge.edge_type) else {
        return Err(Violation::new("edge_type", format!("unknown edge type {:?}", edge.edge_type)));
    };
    if edge.timestamp == 0 {
        return Err(Violation::new("timestamp", "must be > 0"));
    }
    if edge.timestamp > MAX_TIMESTAMP {
        return Err(Violation::new("timestamp", "beyond year 9999"));
    }
    if edge.attributes.len() != columns.len() {
        return Err(Violation::new(
            "attributes",
            format!("expected {} values, got {}", columns.len(), edge.attributes.len()),
        ));
    }
    for (i, (value, col)) in edge.attributes.iter().zip(columns).enumerate() {
        if value.attr_type() != col.ty {
            return Err(Violation::new(
                format!("attributes[{i}]"),
                format!("column {:?} expects {}, got {}", col.col, col.ty, value.attr_type()),
            ));
        }
    }
    Ok(())
}

pub fn validate_vertex_update(update: &VertexUpdate, schema: &GraphSchema) -> Result<(), Violation> {
    if update.vertex == 0 {
        return Err(Violation::new("vertex", "vertex id 0 is reserved"));
    }
    if update.timestamp == 0 {
        return Err(Violation::new("timestamp", "must be > 0"));
    }
    if update.timestamp > MAX_TIMESTAMP {
        return Err(Violation::new("timestamp", "beyond year 9999"));
    }
    let Some(col) = schema.vertex_attr(&update.attr) else {
        return Err(Violation::new("attr", format!("unknown vertex attribute {:?}", update.attr)));
    };
    if update.value.attr_type() != col.ty {
        return Err(Violation::new(
            "value",
            format!("attribute {:?} expects {}, got {}", col.col, col.ty, update.value.attr_type()),
        ));
    }
    Ok(())
}
