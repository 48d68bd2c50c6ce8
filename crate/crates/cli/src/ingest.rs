use std::collections::{BTreeMap, HashMap};
use std::io::Read;

use anyhow::{bail, Context, Result};
use grasshopper::Layout;

/// Dimension name to the original strings, indexed by code.
pub type Dictionaries = BTreeMap<String, Vec<String>>;

/// Keys and dictionaries built from CSV rows. Columns whose values all
/// parse as integers pass through; the others get dense codes in order of
/// first appearance.
pub fn ingest<R: Read>(input: R, layout: &Layout) -> Result<(Vec<u128>, Dictionaries)> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let dims = layout.dimensions();
    let mut column_of = Vec::with_capacity(dims.len());
    for d in dims {
        match header.iter().position(|h| *h == d.name) {
            Some(i) => column_of.push(i),
            None => bail!("CSV header lacks dimension `{}`", d.name),
        }
    }
    if let Some(extra) = header.iter().find(|h| !dims.iter().any(|d| d.name == **h)) {
        bail!("CSV column `{extra}` is not a schema dimension");
    }

    let rows: Vec<csv::StringRecord> = reader.records().collect::<Result<_, _>>()?;
    let numeric: Vec<bool> = column_of
        .iter()
        .map(|&c| rows.iter().all(|r| r[c].parse::<u64>().is_ok()))
        .collect();

    let mut dictionaries: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut lookups: Vec<HashMap<String, u64>> = vec![HashMap::new(); dims.len()];
    let mut overflow: Vec<&str> = Vec::new();
    let mut keys = Vec::with_capacity(rows.len());
    for (line, row) in rows.iter().enumerate() {
        let mut values = Vec::with_capacity(dims.len());
        for (i, d) in dims.iter().enumerate() {
            let cell = &row[column_of[i]];
            let v = if numeric[i] {
                cell.parse::<u64>()?
            } else {
                let dict = dictionaries.entry(d.name.clone()).or_default();
                let next = dict.len() as u64;
                *lookups[i].entry(cell.to_string()).or_insert_with(|| {
                    dict.push(cell.to_string());
                    next
                })
            };
            if (v as u128) >= d.cardinality() {
                if !overflow.contains(&d.name.as_str()) {
                    overflow.push(&d.name);
                }
                continue;
            }
            values.push(v);
        }
        if values.len() == dims.len() {
            keys.push(
                layout
                    .compose(&values)
                    .with_context(|| format!("row {}", line + 2))?
                    .value(),
            );
        }
    }
    if !overflow.is_empty() {
        bail!(
            "values exceed the capacity of dimension(s): {}",
            overflow.join(", ")
        );
    }
    Ok((keys, dictionaries))
}
