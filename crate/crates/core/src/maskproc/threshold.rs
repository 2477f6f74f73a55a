use super::peaks::{find_peaks, histogram_ndvi, sampled, Histogram, PeakSet};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdKind {
    Valley,
    Percentile3,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplePass {
    HeightMasked,
    FullRaster,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdDecision {
    pub kind: ThresholdKind,
    pub threshold: Option<f64>,
    /// The last pass that was evaluated.
    pub pass: SamplePass,
    pub peaks: PeakSet,
}

impl ThresholdDecision {
    pub fn none(pass: SamplePass) -> Self {
        Self {
            kind: ThresholdKind::None,
            threshold: None,
            pass,
            peaks: PeakSet::default(),
        }
    }
}

/// `p`-th percentile with linear interpolation between order statistics.
/// The interpolation is anchored at the nearer order statistic, as numpy
/// does, so results agree with `numpy.percentile` bit for bit.
pub fn percentile(values: &mut [f64], p: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let pos = p / 100.0 * (values.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(values.len() - 1);
    let t = pos - lo as f64;
    let (a, b) = (values[lo], values[hi]);
    let diff = b - a;
    Some(if t >= 0.5 { b - diff * (1.0 - t) } else { a + diff * t })
}

/// Center of the least populated bin strictly between two bins; the leftmost
/// on ties.
pub fn valley(hist: &Histogram, left: usize, right: usize) -> Option<f64> {
    (left + 1..right)
        .min_by_key(|&b| (hist.counts[b], b))
        .map(|b| hist.center(b))
}

fn decide(values: &[f32], mask: Option<&[u8]>, pass: SamplePass) -> Option<ThresholdDecision> {
    let hist = histogram_ndvi(values, mask);
    let peaks = find_peaks(&hist);
    // highest NDVI non-vegetation peak and lowest NDVI vegetation peak
    let non_veg = peaks.non_vegetation.iter().map(|p| p.bin).max();
    let veg = peaks.vegetation.iter().map(|p| p.bin).min();
    let (kind, threshold) = match (non_veg, veg) {
        (Some(a), Some(b)) => (ThresholdKind::Valley, valley(&hist, a, b)?),
        (None, Some(_)) => {
            let mut v: Vec<f64> = sampled(values, mask).collect();
            (ThresholdKind::Percentile3, percentile(&mut v, 3.0)?)
        }
        _ => return None,
    };
    Some(ThresholdDecision {
        kind,
        threshold: Some(threshold),
        pass,
        peaks,
    })
}

/// Two-pass NDVI threshold: sampled under the height mask first, then over
/// the whole raster when the first pass yields no usable peaks.
pub fn detect_threshold(ndvi: &[f32], height_mask: &[u8]) -> ThresholdDecision {
    decide(ndvi, Some(height_mask), SamplePass::HeightMasked)
        .or_else(|| decide(ndvi, None, SamplePass::FullRaster))
        .unwrap_or_else(|| ThresholdDecision::none(SamplePass::FullRaster))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maskproc::peaks::Histogram;

    #[test]
    fn percentile_interpolates() {
        let mut v = vec![4.0, 1.0, 3.0, 2.0];
        // position 0.5 * 3 = 1.5
        assert_eq!(percentile(&mut v, 50.0), Some(2.5));
        assert_eq!(percentile(&mut v, 0.0), Some(1.0));
        assert_eq!(percentile(&mut v, 100.0), Some(4.0));
        assert_eq!(percentile(&mut [], 3.0), None);
    }

    #[test]
    fn percentile_matches_numpy_rounding() {
        // numpy.percentile(v, 97) = 0.8814999999999998; a + (b - a) t gives ...97
        let mut v = vec![0.046, 0.134, 0.144, 0.154, 0.159, 0.175, 0.192, 0.276, 0.51, 0.717, 0.952];
        assert_eq!(percentile(&mut v, 97.0), Some(0.8814999999999998));
    }

    #[test]
    fn valley_prefers_leftmost_minimum() {
        let mut h = Histogram::empty();
        h.counts[10] = 50;
        h.counts[30] = 50;
        for b in 11..30 {
            h.counts[b] = 5;
        }
        h.counts[14] = 1;
        h.counts[20] = 1;
        assert_eq!(valley(&h, 10, 30), Some(h.center(14)));
    }

    #[test]
    fn only_low_values_give_none() {
        let vals: Vec<f32> = (0..1000).map(|i| -0.4 + 0.3 * (i as f32 / 1000.0).powi(2)).collect();
        let d = detect_threshold(&vals, &vec![1; vals.len()]);
        assert_eq!(d.kind, ThresholdKind::None);
        assert_eq!(d.threshold, None);
    }

    #[test]
    fn falls_back_to_full_raster() {
        // masked sample is empty, full raster has one vegetation mode
        let vals: Vec<f32> = (0..2500).map(|k| 0.5 + 0.1 * ((k / 50 + k % 50) as f32 / 49.0)).collect();
        let d = detect_threshold(&vals, &vec![0; vals.len()]);
        assert_eq!(d.pass, SamplePass::FullRaster);
        assert_eq!(d.kind, ThresholdKind::Percentile3);
    }

    #[test]
    fn decision_json_shape() {
        let d = ThresholdDecision::none(SamplePass::FullRaster);
        let v = serde_json::to_value(&d).unwrap();
        assert_eq!(v["kind"], "none");
        assert_eq!(v["pass"], "full_raster");
        assert!(v["threshold"].is_null());
    }
}
