use super::month::Month;
use super::panel::Panel;
use super::schema::FEATURE_COUNT;
use crate::error::{Error, Result};
use crate::models::SequenceBatch;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WindowKey {
    pub asset_id: String,
    /// Last month of the feature window; the target is the following month.
    pub formation: Month,
}

impl WindowKey {
    pub fn target_month(&self) -> Month {
        self.formation.next()
    }
}

/// Borrowed view of one sample.
#[derive(Debug, Clone, Copy)]
pub struct SampleWindow<'a> {
    pub asset_id: &'a str,
    pub formation: Month,
    /// `seq_len × FEATURE_COUNT`, oldest month first.
    pub inputs: &'a [f64],
    pub target: f64,
}

/// A bag of samples stored contiguously for batching.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSet {
    seq_len: usize,
    keys: Vec<WindowKey>,
    inputs: Vec<f64>,
    targets: Vec<f64>,
}

impl WindowSet {
    pub fn empty(seq_len: usize) -> Self {
        WindowSet {
            seq_len,
            keys: Vec::new(),
            inputs: Vec::new(),
            targets: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn seq_len(&self) -> usize {
        self.seq_len
    }

    pub fn keys(&self) -> &[WindowKey] {
        &self.keys
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn window(&self, i: usize) -> SampleWindow<'_> {
        let w = self.seq_len * FEATURE_COUNT;
        SampleWindow {
            asset_id: &self.keys[i].asset_id,
            formation: self.keys[i].formation,
            inputs: &self.inputs[i * w..(i + 1) * w],
            target: self.targets[i],
        }
    }

    /// Distinct target months, ascending.
    pub fn target_months(&self) -> Vec<Month> {
        let mut m: Vec<Month> = self.keys.iter().map(WindowKey::target_month).collect();
        m.sort_unstable();
        m.dedup();
        m
    }

    pub fn max_target_month(&self) -> Option<Month> {
        self.keys.iter().map(WindowKey::target_month).max()
    }

    pub fn batch(&self, indices: &[usize]) -> Result<SequenceBatch> {
        let w = self.seq_len * FEATURE_COUNT;
        let mut inputs = Vec::with_capacity(indices.len() * w);
        let mut targets = Vec::with_capacity(indices.len());
        for &i in indices {
            inputs.extend_from_slice(&self.inputs[i * w..(i + 1) * w]);
            targets.push(self.targets[i]);
        }
        SequenceBatch::new(indices.len(), self.seq_len, FEATURE_COUNT, inputs, targets)
    }

    pub fn select(&self, keep: impl Fn(&WindowKey) -> bool) -> WindowSet {
        let mut out = WindowSet::empty(self.seq_len);
        for i in 0..self.len() {
            if keep(&self.keys[i]) {
                out.push_from(self, i);
            }
        }
        out
    }

    pub fn extend(&mut self, other: &WindowSet) -> Result<()> {
        if other.seq_len != self.seq_len {
            return Err(Error::Invalid(format!(
                "cannot merge windows of length {} and {}",
                self.seq_len, other.seq_len
            )));
        }
        self.keys.extend_from_slice(&other.keys);
        self.inputs.extend_from_slice(&other.inputs);
        self.targets.extend_from_slice(&other.targets);
        Ok(())
    }

    fn push_from(&mut self, other: &WindowSet, i: usize) {
        let w = self.seq_len * FEATURE_COUNT;
        self.keys.push(other.keys[i].clone());
        self.inputs
            .extend_from_slice(&other.inputs[i * w..(i + 1) * w]);
        self.targets.push(other.targets[i]);
    }

    fn push_rows(&mut self, panel: &Panel, first_row: usize, formation_row: usize) {
        for r in first_row..=formation_row {
            self.inputs.extend(
                panel
                    .feature_row(r)
                    .iter()
                    .map(|v| if v.is_nan() { 0.0 } else { *v }),
            );
        }
        self.keys.push(WindowKey {
            asset_id: panel.asset_of(formation_row).to_string(),
            formation: panel.month_of(formation_row),
        });
        self.targets.push(panel.excess_return(formation_row + 1));
    }
}

/// Windows formed at month `formation`: one per asset with `seq_len`
/// consecutive months ending at `formation` and a return in the month after.
/// Missing feature values are read as 0, the neutral point of the rank map.
pub fn build_windows(panel: &Panel, formation: Month, seq_len: usize) -> Result<WindowSet> {
    match (panel.first_month(), panel.last_month()) {
        (Some(first), Some(last)) if first <= formation && formation <= last => {}
        _ => {
            return Err(Error::Data(format!(
                "formation month {formation} is outside the panel range"
            )))
        }
    }
    build_windows_between(panel, formation.next(), formation.next(), seq_len)
}

/// All windows whose target month lies in `first_target..=last_target`,
/// ordered by asset then month.
pub fn build_windows_between(
    panel: &Panel,
    first_target: Month,
    last_target: Month,
    seq_len: usize,
) -> Result<WindowSet> {
    if seq_len == 0 {
        return Err(Error::Invalid("window length must be positive".into()));
    }
    let mut out = WindowSet::empty(seq_len);
    let span = seq_len as i32 - 1;
    for a in 0..panel.num_assets() {
        let range = panel.asset_range(a);
        for k in range.start + seq_len - 1..range.end.saturating_sub(1) {
            let formation = panel.month_of(k);
            let target = panel.month_of(k + 1);
            if target != formation.next() || target < first_target || target > last_target {
                continue;
            }
            let first = k + 1 - seq_len;
            // rows are sorted and unique per asset, so equal spans mean no gaps
            if panel.month_of(first).until(formation) == span {
                out.push_rows(panel, first, k);
            }
        }
    }
    Ok(out)
}
