use crate::error::{Error, Result};
use crate::morphology::components::label_pixels;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentScore {
    pub correct: usize,
    pub total: usize,
}

impl ComponentScore {
    /// 1 when there are no components.
    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            1.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }
}

/// Majority class (1 or 2) over `members`; ties go to class 1.
fn majority(cls: &[u8], members: &[usize]) -> u8 {
    let lin = members.iter().filter(|&&i| cls[i] == 1).count();
    let non = members.iter().filter(|&&i| cls[i] == 2).count();
    if lin >= non {
        1
    } else {
        2
    }
}

/// Per 8-connected component of `mask`, whether the majority class of `pred`
/// matches the majority class of `label`.
pub fn component_accuracy(mask: &[u8], label: &[u8], pred: &[u8], width: usize, height: usize) -> Result<ComponentScore> {
    if label.len() != mask.len() || pred.len() != mask.len() {
        return Err(Error::GridMismatch("component accuracy inputs differ in size".into()));
    }
    let labels = label_pixels(mask, width, height, 8)?;
    let k = labels.iter().copied().max().unwrap_or(0) as usize;
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &l) in labels.iter().enumerate() {
        if l != 0 {
            members[l as usize - 1].push(i);
        }
    }
    let correct = members.iter().filter(|m| majority(label, m) == majority(pred, m)).count();
    Ok(ComponentScore { correct, total: k })
}
