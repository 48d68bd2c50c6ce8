use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use grasshopper::layout::SchemaFile;
use grasshopper::store::{read_dump, write_dump, SortedKeys};
use grasshopper::{BitKey, Layout};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// Recorded scan-to-seek ratio of a dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioRecord {
    pub r: f64,
    pub stddev: f64,
    pub ops: usize,
    pub trials: usize,
    pub samples: Vec<f64>,
    /// `measured` or `override`.
    pub source: String,
}

/// Sidecar of a key dump: dictionaries and recorded R.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<RatioRecord>,
    /// Per dictionary-encoded dimension, the value of each code.
    #[serde(default)]
    pub dictionaries: BTreeMap<String, Vec<String>>,
}

pub fn meta_path(data: &Path) -> PathBuf {
    let mut name = data.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

impl DatasetMeta {
    pub fn load(data: &Path) -> Result<Self> {
        let path = meta_path(data);
        if !path.exists() {
            return Ok(Self::default());
        }
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn save(&self, data: &Path) -> Result<()> {
        let path = meta_path(data);
        std::fs::write(&path, serde_json::to_string_pretty(self)?)
            .with_context(|| format!("writing {}", path.display()))
    }
}

pub fn load_layout(schema: &Path) -> Result<Layout> {
    let file =
        SchemaFile::load(schema).with_context(|| format!("loading schema {}", schema.display()))?;
    Ok(file.to_layout()?)
}

pub struct Dataset {
    pub layout: Layout,
    pub store: SortedKeys,
    pub meta: DatasetMeta,
    pub path: PathBuf,
}

impl Dataset {
    pub fn open(schema: &Path, data: &Path) -> Result<Self> {
        let layout = load_layout(schema)?;
        let (width, keys) =
            read_dump(data, true).with_context(|| format!("reading dataset {}", data.display()))?;
        if width != layout.width() {
            bail!(
                "dataset {} has {width}-bit keys but the schema describes {} bits",
                data.display(),
                layout.width()
            );
        }
        Ok(Self {
            store: SortedKeys::from_sorted(width, keys)?,
            meta: DatasetMeta::load(data)?,
            layout,
            path: data.to_path_buf(),
        })
    }

    /// Dimension values of a key, dictionary codes replaced by their values.
    pub fn decode(&self, key: u128) -> Result<Map<String, Value>> {
        let values = self
            .layout
            .decompose(BitKey::new(key, self.layout.width())?)?;
        let mut row = Map::new();
        for (dim, v) in self.layout.dimensions().iter().zip(values) {
            let decoded = match self.meta.dictionaries.get(&dim.name) {
                Some(dict) => dict
                    .get(v as usize)
                    .map_or(Value::from(v), |s| Value::from(s.clone())),
                None => Value::from(v),
            };
            row.insert(dim.name.clone(), decoded);
        }
        Ok(row)
    }
}

/// Writes sorted, deduplicated keys and the sidecar.
pub fn save_dataset(
    data: &Path,
    width: u32,
    mut keys: Vec<u128>,
    meta: &DatasetMeta,
) -> Result<usize> {
    keys.sort_unstable();
    keys.dedup();
    write_dump(data, width, &keys).with_context(|| format!("writing {}", data.display()))?;
    meta.save(data)?;
    Ok(keys.len())
}
