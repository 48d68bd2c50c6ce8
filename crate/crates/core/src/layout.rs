//! Dimensions, gz-curve layouts and composite-key composition.
//!
//! A layout assigns every dimension an ordered list of composite-key
//! positions. Within a dimension the k-th most significant bit lands on the
//! k-th largest assigned position, so each dimension's bit order survives the
//! shuffle.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bitkey::{bit, compress, deposit, low_ones, BitKey, Mask, MAX_WIDTH};
use crate::error::{Error, Result};

/// Format tag written into schema files.
pub const SCHEMA_FORMAT: &str = "gz-schema/1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dimension {
    pub name: String,
    pub bits: u32,
}

impl Dimension {
    pub fn new(name: impl Into<String>, bits: u32) -> Self {
        Self {
            name: name.into(),
            bits,
        }
    }

    pub fn cardinality(&self) -> u128 {
        1u128 << self.bits
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LayoutStrategy {
    /// One bit per dimension per round, widest dimension first.
    InterleaveByCardinality,
    /// Dimensions concatenated, first dimension most senior.
    Odometer,
    /// Per-dimension position lists, senior dimension bit first.
    Explicit(Vec<Vec<u32>>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    dimensions: Vec<Dimension>,
    placement: Vec<Vec<u32>>,
    masks: Vec<Mask>,
    width: u32,
}

pub fn build_layout(dims: Vec<Dimension>, strategy: LayoutStrategy) -> Result<Layout> {
    if dims.is_empty() {
        return Err(Error::InvalidLayout(
            "at least one dimension is required".into(),
        ));
    }
    for d in &dims {
        if d.bits == 0 || d.bits > 64 {
            return Err(Error::InvalidLayout(format!(
                "dimension `{}` has {} bits; expected 1..=64",
                d.name, d.bits
            )));
        }
    }
    for (i, d) in dims.iter().enumerate() {
        if dims[..i].iter().any(|o| o.name == d.name) {
            return Err(Error::InvalidLayout(format!(
                "duplicate dimension `{}`",
                d.name
            )));
        }
    }
    let width: u32 = dims.iter().map(|d| d.bits).sum();
    if width > MAX_WIDTH {
        return Err(Error::InvalidLayout(format!(
            "total width {width} exceeds {MAX_WIDTH} bits"
        )));
    }

    let placement = match strategy {
        LayoutStrategy::Odometer => {
            let mut next = width;
            dims.iter()
                .map(|d| {
                    let ps: Vec<u32> = (0..d.bits).map(|k| next - k).collect();
                    next -= d.bits;
                    ps
                })
                .collect()
        }
        LayoutStrategy::InterleaveByCardinality => {
            let mut order: Vec<usize> = (0..dims.len()).collect();
            // stable: ties keep declaration order
            order.sort_by(|&a, &b| dims[b].bits.cmp(&dims[a].bits));
            let mut placement = vec![Vec::new(); dims.len()];
            let mut next = width;
            let rounds = dims.iter().map(|d| d.bits).max().unwrap_or(0);
            for round in 0..rounds {
                for &i in &order {
                    if dims[i].bits > round {
                        placement[i].push(next);
                        next -= 1;
                    }
                }
            }
            placement
        }
        LayoutStrategy::Explicit(placement) => {
            validate_explicit(&dims, &placement, width)?;
            placement
        }
    };

    let masks = placement
        .iter()
        .map(|ps| Mask::from_positions(width, ps.iter().copied()))
        .collect::<Result<Vec<_>>>()?;
    Ok(Layout {
        dimensions: dims,
        placement,
        masks,
        width,
    })
}

fn validate_explicit(dims: &[Dimension], placement: &[Vec<u32>], width: u32) -> Result<()> {
    if placement.len() != dims.len() {
        return Err(Error::InvalidLayout(format!(
            "{} placements for {} dimensions",
            placement.len(),
            dims.len()
        )));
    }
    let mut seen = 0u128;
    for (d, ps) in dims.iter().zip(placement) {
        if ps.len() != d.bits as usize {
            return Err(Error::InvalidLayout(format!(
                "dimension `{}` declares {} bits but {} positions",
                d.name,
                d.bits,
                ps.len()
            )));
        }
        for w in ps.windows(2) {
            if w[0] <= w[1] {
                return Err(Error::InvalidLayout(format!(
                    "positions of `{}` must be listed senior first (strictly decreasing)",
                    d.name
                )));
            }
        }
        for &p in ps {
            if p == 0 || p > width {
                return Err(Error::InvalidLayout(format!(
                    "position {p} of `{}` outside 1..={width}",
                    d.name
                )));
            }
            if seen & bit(p) != 0 {
                return Err(Error::InvalidLayout(format!("position {p} assigned twice")));
            }
            seen |= bit(p);
        }
    }
    if seen != low_ones(width) {
        return Err(Error::InvalidLayout(
            "placements do not cover every position".into(),
        ));
    }
    Ok(())
}

impl Layout {
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn dimensions(&self) -> &[Dimension] {
        &self.dimensions
    }

    /// Assigned positions per dimension, senior dimension bit first.
    pub fn placement(&self) -> &[Vec<u32>] {
        &self.placement
    }

    pub fn dim_index(&self, name: &str) -> Result<usize> {
        self.dimensions
            .iter()
            .position(|d| d.name == name)
            .ok_or_else(|| Error::UnknownDimension(name.to_string()))
    }

    pub fn dim_mask(&self, name: &str) -> Result<Mask> {
        Ok(self.masks[self.dim_index(name)?])
    }

    pub fn mask_of(&self, index: usize) -> Mask {
        self.masks[index]
    }

    fn check_value(&self, index: usize, value: u64) -> Result<()> {
        let d = &self.dimensions[index];
        if (value as u128) >= d.cardinality() {
            return Err(Error::ValueOutOfRange {
                dimension: d.name.clone(),
                value,
                cardinality: d.cardinality(),
            });
        }
        Ok(())
    }

    /// Scatters one dimension value onto its positions.
    pub fn encode_value(&self, index: usize, value: u64) -> Result<u128> {
        self.check_value(index, value)?;
        Ok(deposit(value as u128, self.masks[index].bits()))
    }

    /// Values are given in declaration order.
    pub fn compose(&self, values: &[u64]) -> Result<BitKey> {
        if values.len() != self.dimensions.len() {
            return Err(Error::Contract(format!(
                "{} values for {} dimensions",
                values.len(),
                self.dimensions.len()
            )));
        }
        let mut key = 0u128;
        for (i, &v) in values.iter().enumerate() {
            key |= self.encode_value(i, v)?;
        }
        Ok(BitKey::from_raw(key, self.width))
    }

    pub fn decompose(&self, key: BitKey) -> Result<Vec<u64>> {
        if key.width() != self.width {
            return Err(Error::WidthMismatch {
                expected: self.width,
                found: key.width(),
            });
        }
        Ok(self
            .masks
            .iter()
            .map(|m| compress(key.value(), m.bits()) as u64)
            .collect())
    }

    pub fn to_schema(&self, strategy: &str) -> SchemaFile {
        SchemaFile {
            format: SCHEMA_FORMAT.to_string(),
            strategy: strategy.to_string(),
            dimensions: self
                .dimensions
                .iter()
                .zip(&self.placement)
                .map(|(d, ps)| SchemaDimension {
                    name: d.name.clone(),
                    bits: d.bits,
                    positions: Some(ps.clone()),
                })
                .collect(),
        }
    }
}

/// On-disk schema record.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaFile {
    pub format: String,
    /// `interleave`, `odometer` or `explicit`.
    pub strategy: String,
    pub dimensions: Vec<SchemaDimension>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaDimension {
    pub name: String,
    pub bits: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<u32>>,
}

impl SchemaFile {
    pub fn to_layout(&self) -> Result<Layout> {
        if self.format != SCHEMA_FORMAT {
            return Err(Error::Format(format!(
                "unsupported schema format `{}` (expected `{SCHEMA_FORMAT}`)",
                self.format
            )));
        }
        let dims: Vec<Dimension> = self
            .dimensions
            .iter()
            .map(|d| Dimension::new(d.name.clone(), d.bits))
            .collect();
        let explicit: Option<Vec<Vec<u32>>> = self
            .dimensions
            .iter()
            .map(|d| d.positions.clone())
            .collect();
        let strategy = match self.strategy.as_str() {
            "interleave" => LayoutStrategy::InterleaveByCardinality,
            "odometer" => LayoutStrategy::Odometer,
            "explicit" => LayoutStrategy::Explicit(explicit.clone().ok_or_else(|| {
                Error::Format("explicit strategy needs positions for every dimension".into())
            })?),
            other => return Err(Error::Format(format!("unknown layout strategy `{other}`"))),
        };
        let layout = build_layout(dims, strategy)?;
        // Stored placements must agree with what the strategy produces.
        if let Some(ps) = explicit {
            if ps != layout.placement {
                return Err(Error::Format(
                    "stored positions disagree with the declared strategy".into(),
                ));
            }
        }
        Ok(layout)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}
