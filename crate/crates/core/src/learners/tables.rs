//! Active action sets and elimination thresholds, both indexed by `(level, stage)`.

use serde::{Deserialize, Serialize};

use crate::error::LearnerError;

use super::Variant;

/// Per-state candidate actions, each set sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSetTable {
    horizon: usize,
    width: usize,
    sets: Vec<Vec<usize>>,
}

impl ActionSetTable {
    /// Every action active everywhere.
    pub fn full(horizon: usize, width: usize, num_actions: usize) -> Self {
        Self {
            horizon,
            width,
            sets: vec![(0..num_actions).collect(); horizon * width],
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn get(&self, level: usize, stage: usize) -> &[usize] {
        &self.sets[stage * self.width + level]
    }

    /// Replaces one set; the actions are sorted and deduplicated.
    pub fn set(&mut self, level: usize, stage: usize, mut actions: Vec<usize>) -> Result<(), LearnerError> {
        if actions.is_empty() {
            return Err(LearnerError::InvalidParameter(format!(
                "empty action set at (level {level}, stage {stage})"
            )));
        }
        actions.sort_unstable();
        actions.dedup();
        self.sets[stage * self.width + level] = actions;
        Ok(())
    }

    pub fn contains(&self, level: usize, stage: usize, action: usize) -> bool {
        self.get(level, stage).binary_search(&action).is_ok()
    }

    /// `Σ |A_{l,i}|`, the number of exploration blocks in a phase.
    pub fn total_size(&self) -> u64 {
        self.sets.iter().map(|s| s.len() as u64).sum()
    }

    pub fn is_subset_of(&self, other: &ActionSetTable) -> bool {
        self.horizon == other.horizon
            && self.width == other.width
            && self
                .sets
                .iter()
                .zip(&other.sets)
                .all(|(a, b)| a.iter().all(|x| b.binary_search(x).is_ok()))
    }

    pub fn all_nonempty(&self) -> bool {
        self.sets.iter().all(|s| !s.is_empty())
    }
}

/// Elimination constants `C_{l,i}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTable {
    pub variant: Variant,
    horizon: usize,
    width: usize,
    values: Vec<f64>,
}

impl ThresholdTable {
    pub fn get(&self, level: usize, stage: usize) -> f64 {
        self.values[stage * self.width + level]
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn for_variant(variant: Variant, horizon: usize, width: usize, num_actions: usize) -> Result<Self, LearnerError> {
        match variant {
            Variant::General => thresholds_general(horizon, width, num_actions),
            Variant::Ordered => thresholds_ordered(horizon, width, num_actions),
        }
    }
}

fn check_dims(horizon: usize, width: usize, num_actions: usize) -> Result<(), LearnerError> {
    if horizon == 0 || width == 0 || num_actions == 0 {
        return Err(LearnerError::InvalidParameter("H, k and A must be at least 1".into()));
    }
    Ok(())
}

fn build(
    variant: Variant,
    horizon: usize,
    width: usize,
    f: impl Fn(f64, f64) -> f64,
) -> Result<ThresholdTable, LearnerError> {
    let mut values = Vec::with_capacity(horizon * width);
    for stage in 0..horizon {
        for level in 0..width {
            // formulas use 1-based level and stage
            let c = f((level + 1) as f64, (stage + 1) as f64);
            if !c.is_finite() {
                return Err(LearnerError::ThresholdOverflow { level, stage });
            }
            values.push(c);
        }
    }
    Ok(ThresholdTable {
        variant,
        horizon,
        width,
        values,
    })
}

/// `C_{l,i} = (H - i + 1) (A k)^{H - i}`.
pub fn thresholds_general(horizon: usize, width: usize, num_actions: usize) -> Result<ThresholdTable, LearnerError> {
    check_dims(horizon, width, num_actions)?;
    let h = horizon as f64;
    let ak = (num_actions * width) as f64;
    build(Variant::General, horizon, width, |_, i| {
        (h - i + 1.0) * ak.powi((horizon as f64 - i) as i32)
    })
}

/// `C_{l,i} = e^{(H - i) k / H} (2 A H / k)^{l - 1} (H - i + 1)^l`, for `k <= H`.
pub fn thresholds_ordered(horizon: usize, width: usize, num_actions: usize) -> Result<ThresholdTable, LearnerError> {
    check_dims(horizon, width, num_actions)?;
    if width > horizon {
        return Err(LearnerError::InvalidParameter(format!(
            "ordered thresholds need k <= H (k = {width}, H = {horizon})"
        )));
    }
    let (h, k, a) = (horizon as f64, width as f64, num_actions as f64);
    let t = 2.0 * a * h / k;
    build(Variant::Ordered, horizon, width, |l, i| {
        ((h - i) * k / h).exp() * t.powi(l as i32 - 1) * (h - i + 1.0).powi(l as i32)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn general_values() {
        let t = thresholds_general(3, 2, 2).unwrap();
        assert_eq!(t.get(0, 0), 48.0);
        assert_eq!(t.get(1, 0), 48.0);
        assert_eq!(t.get(0, 1), 8.0);
        assert_eq!(t.get(1, 2), 1.0);
    }

    #[test]
    fn ordered_values() {
        let t = thresholds_ordered(4, 2, 2).unwrap();
        assert!((t.get(0, 2) - 2.0 * 0.5f64.exp()).abs() < 1e-12);
        assert_eq!(t.get(0, 3), 1.0);
        assert_eq!(t.get(1, 3), 8.0);
        assert!(thresholds_ordered(2, 3, 2).is_err());
    }

    #[test]
    fn overflow_is_an_error() {
        assert!(matches!(
            thresholds_general(200, 50, 50),
            Err(LearnerError::ThresholdOverflow { .. })
        ));
    }

    #[test]
    fn set_table_ops() {
        let mut s = ActionSetTable::full(2, 2, 3);
        assert_eq!(s.total_size(), 12);
        let full = s.clone();
        s.set(1, 0, vec![2, 0, 2]).unwrap();
        assert_eq!(s.get(1, 0), &[0, 2]);
        assert!(s.is_subset_of(&full));
        assert!(!full.is_subset_of(&s));
        assert!(s.set(0, 0, vec![]).is_err());
    }
}
