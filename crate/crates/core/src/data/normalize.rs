use super::panel::Panel;
use super::schema::FEATURE_COUNT;
use crate::error::{Error, Result};

/// Maps values to `[−1, 1]` by rank: the smallest gets −1, the largest +1,
/// ties share their mean rank, NaN (missing) maps to 0. A single non-missing
/// value maps to 0.
pub fn rank_to_unit(values: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    let mut present: Vec<(f64, usize)> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_nan())
        .map(|(i, v)| (*v, i))
        .collect();
    let n = present.len();
    if n < 2 {
        return out;
    }
    present.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let span = (n - 1) as f64;
    let mut k = 0;
    while k < n {
        let mut end = k + 1;
        while end < n && present[end].0 == present[k].0 {
            end += 1;
        }
        // zero-based ranks k..end share their mean
        let mean_rank = (k + end - 1) as f64 / 2.0;
        let mapped = -1.0 + 2.0 * mean_rank / span;
        for &(_, i) in &present[k..end] {
            out[i] = mapped;
        }
        k = end;
    }
    out
}

/// Cross-sectional rank normalization of every feature, month by month.
pub fn normalize_features(panel: &Panel) -> Result<Panel> {
    if panel.is_empty() {
        return Err(Error::Data("cannot normalize an empty panel".into()));
    }
    let mut out = panel.clone();
    let groups = panel.rows_by_month();
    let mut column = Vec::new();
    for rows in groups.values() {
        for j in 0..FEATURE_COUNT {
            column.clear();
            column.extend(rows.iter().map(|&i| panel.feature_row(i)[j]));
            let ranked = rank_to_unit(&column);
            let data = out.features_mut();
            for (&i, v) in rows.iter().zip(ranked) {
                data[i * FEATURE_COUNT + j] = v;
            }
        }
    }
    out.set_normalized();
    Ok(out)
}
