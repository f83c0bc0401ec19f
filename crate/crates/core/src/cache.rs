//! Text formats for count series and suffix tables.
//!
//! Series: `# qwalk-counts v1 steps=<steps> endpoint=<endpoint>` followed
//! by one decimal count per line. Tables: `# qwalk-table v1`, then `n_max`,
//! `a` and `b` on their own lines, then every layer in row-major order, one
//! decimal per line.

use std::fs;
use std::path::Path;

use num_bigint::BigUint;

use crate::enumerate::{CountSeries, CountTable};
use crate::error::{Error, Result};
use crate::stepset::StepSet;

const SERIES_MAGIC: &str = "# qwalk-counts v1";
const TABLE_MAGIC: &str = "# qwalk-table v1";

pub fn series_to_string(s: &StepSet, series: &CountSeries) -> String {
    let mut out = format!("{SERIES_MAGIC} steps={s} endpoint={}\n", series.endpoint);
    for v in &series.values {
        out.push_str(&v.to_str_radix(10));
        out.push('\n');
    }
    out
}

/// Parses a series file, returning the step set named in its header.
pub fn series_from_str(text: &str) -> Result<(StepSet, CountSeries)> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Cache("empty file".into()))?;
    let rest = header
        .strip_prefix(SERIES_MAGIC)
        .and_then(|r| r.strip_prefix(' '))
        .ok_or_else(|| Error::Cache(format!("bad header `{header}`")))?;
    let mut steps = None;
    let mut endpoint = None;
    for field in rest.split_whitespace() {
        if let Some(v) = field.strip_prefix("steps=") {
            steps = Some(StepSet::parse(v).map_err(|e| Error::Cache(e.to_string()))?);
        } else if let Some(v) = field.strip_prefix("endpoint=") {
            endpoint = Some(v.parse().map_err(|e: Error| Error::Cache(e.to_string()))?);
        }
    }
    let steps = steps.ok_or_else(|| Error::Cache("header lacks steps=".into()))?;
    let endpoint = endpoint.ok_or_else(|| Error::Cache("header lacks endpoint=".into()))?;
    let values = lines.map(parse_count).collect::<Result<Vec<_>>>()?;
    if values.first() != Some(&BigUint::from(1u8)) {
        return Err(Error::Cache("first count must be 1".into()));
    }
    Ok((steps, CountSeries::new(endpoint, values)))
}

pub fn table_to_string(t: &CountTable) -> String {
    let (a, b) = t.extent();
    let mut out = format!("{TABLE_MAGIC}\n{}\n{a}\n{b}\n", t.n_max());
    for rem in 0..=t.n_max() {
        for v in t.layer(rem) {
            out.push_str(&v.to_str_radix(10));
            out.push('\n');
        }
    }
    out
}

/// Parses a table file for the step set `s`; the extents in the file must
/// match those of `s`.
pub fn table_from_str(s: &StepSet, text: &str) -> Result<CountTable> {
    let mut lines = text.lines();
    if lines.next() != Some(TABLE_MAGIC) {
        return Err(Error::Cache("bad or missing table header".into()));
    }
    let mut num = |what: &str| -> Result<usize> {
        lines
            .next()
            .and_then(|l| l.trim().parse().ok())
            .ok_or_else(|| Error::Cache(format!("missing {what}")))
    };
    let (n_max, a, b) = (num("n_max")?, num("a")?, num("b")?);
    let (sa, sb) = s.max_up();
    if (a as i64, b as i64) != (sa, sb) {
        return Err(Error::Cache(format!("table extents ({a},{b}) do not match steps {s}")));
    }
    let mut layers = Vec::with_capacity(n_max + 1);
    for rem in 0..=n_max {
        let len = ((n_max - rem) * a + 1) * ((n_max - rem) * b + 1);
        let layer = (&mut lines).take(len).map(parse_count).collect::<Result<Vec<_>>>()?;
        if layer.len() != len {
            return Err(Error::Cache(format!("truncated at layer {rem}")));
        }
        layers.push(layer);
    }
    if lines.any(|l| !l.trim().is_empty()) {
        return Err(Error::Cache("trailing data after last layer".into()));
    }
    CountTable::from_layers(s.clone(), n_max, layers)
}

fn parse_count(line: &str) -> Result<BigUint> {
    BigUint::parse_bytes(line.trim().as_bytes(), 10).ok_or_else(|| Error::Cache(format!("bad count `{line}`")))
}

pub fn save_series(path: &Path, s: &StepSet, series: &CountSeries) -> Result<()> {
    Ok(fs::write(path, series_to_string(s, series))?)
}

pub fn load_series(path: &Path) -> Result<(StepSet, CountSeries)> {
    series_from_str(&fs::read_to_string(path)?)
}

pub fn save_table(path: &Path, t: &CountTable) -> Result<()> {
    Ok(fs::write(path, table_to_string(t))?)
}

pub fn load_table(path: &Path, s: &StepSet) -> Result<CountTable> {
    table_from_str(s, &fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::{quadrant_counts, suffix_counts, Endpoint, DEFAULT_MEM_BUDGET};
    use crate::stepset::presets;

    #[test]
    fn series_round_trip() {
        let s = presets::simple();
        let q = quadrant_counts(&s, 4, Endpoint::Any);
        let text = series_to_string(&s, &q);
        assert_eq!(text, "# qwalk-counts v1 steps=(1,0);(0,1);(-1,0);(0,-1) endpoint=any\n1\n2\n6\n18\n60\n");
        let (s2, q2) = series_from_str(&text).unwrap();
        assert_eq!(s2, s);
        assert_eq!(q2, q);
        assert_eq!(series_to_string(&s2, &q2), text);
    }

    #[test]
    fn wrong_version_is_rejected() {
        let text = "# qwalk-counts v2 steps=(1,0);(0,1) endpoint=any\n1\n";
        assert!(matches!(series_from_str(text), Err(Error::Cache(_))));
        assert!(matches!(table_from_str(&presets::simple(), "# qwalk-table v0\n"), Err(Error::Cache(_))));
    }

    #[test]
    fn table_round_trip_and_checks() {
        let s = presets::reluctant_six();
        let t = suffix_counts(&s, 6, DEFAULT_MEM_BUDGET).unwrap();
        let text = table_to_string(&t);
        let t2 = table_from_str(&s, &text).unwrap();
        assert_eq!(t2, t);
        assert_eq!(table_to_string(&t2), text);

        let cut = &text[..text.len() / 2];
        assert!(table_from_str(&s, cut).is_err());
        let mut lines: Vec<&str> = text.lines().collect();
        lines[4] = "2"; // first entry of layer 0
        let bad = lines.join("\n");
        assert!(matches!(table_from_str(&s, &bad), Err(Error::Cache(m)) if m.contains("layer 0")));
        assert!(table_from_str(&StepSet::parse("(2,0);(0,1);(-1,-1)").unwrap(), &text).is_err());
    }
}
