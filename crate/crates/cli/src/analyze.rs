use anyhow::Result;
use grasshopper::bitkey::mask_profile;
use grasshopper::engine::Planner;
use grasshopper::locus::{
    analytic_threshold, point_locus_stats, range_locus_stats, threshold, StoreStats,
};
use grasshopper::{FilterKind, Layout, Matcher};
use serde_json::{json, Value};

use crate::dataset::Dataset;
use crate::dsl::Query;

fn restriction(f: &grasshopper::Filter) -> Result<Value> {
    let m = f.mask();
    let profile = mask_profile(m)?;
    let components: Vec<String> = profile.components.iter().map(|c| c.to_string()).collect();
    let (kind, values, locus) = match f.kind() {
        FilterKind::Point(p) => (
            "point",
            json!([p.to_string()]),
            serde_json::to_value(point_locus_stats(m)?)?,
        ),
        FilterKind::Range(a, b) => (
            "range",
            json!([a.to_string(), b.to_string()]),
            range_locus_stats(m, *a, *b).map_or(Value::Null, |s| {
                serde_json::to_value(s).unwrap_or(Value::Null)
            }),
        ),
        FilterKind::Set(e) => (
            "set",
            Value::from(e.iter().map(u128::to_string).collect::<Vec<_>>()),
            range_locus_stats(m, e[0], e[e.len() - 1]).map_or(Value::Null, |s| {
                serde_json::to_value(s).unwrap_or(Value::Null)
            }),
        ),
    };
    Ok(json!({
        "mask": m.to_string(),
        "kind": kind,
        "values": values,
        "dims": profile.dims,
        "head": profile.head,
        "tail": profile.tail,
        "components": components,
        "locus": locus,
    }))
}

/// Reduction, locus geometry and, with a dataset, thresholds and the plan.
pub fn analyze(layout: &Layout, query: &Query, dataset: Option<(&Dataset, f64)>) -> Result<Value> {
    let filters = query.to_filters(layout)?;
    let matcher = Matcher::from_filters(layout.width(), &filters)?;
    let restrictions = matcher
        .filters()
        .iter()
        .map(restriction)
        .collect::<Result<Vec<_>>>()?;
    let mut report = json!({
        "filter": query.to_string(),
        "width": layout.width(),
        "space_width": matcher.space_width(),
        "triviality": format!("{:?}", matcher.triviality()).to_lowercase(),
        "restrictions": restrictions,
        "bounding_interval": matcher
            .bounding_interval()
            .map(|(a, b)| json!([a.value().to_string(), b.value().to_string()])),
    });
    if let Some((ds, r)) = dataset {
        let card = ds.store.len() as u64;
        let stats = StoreStats {
            width: matcher.space_width(),
            card,
            min_key: None,
            max_key: None,
            r,
        };
        let (lo, hi) = match (ds.store.keys().first(), ds.store.keys().last()) {
            (Some(a), Some(b)) => (*a, *b),
            _ => (1, 0),
        };
        let plan = Planner::new().plan(&ds.store, &matcher, lo, hi, r);
        report["dataset"] = json!({
            "card": card,
            "r": r,
            "threshold": threshold(&matcher, &stats),
            "analytic_threshold": analytic_threshold(matcher.space_width(), card, r),
            "plan": serde_json::to_value(plan)?,
        });
    }
    Ok(report)
}
