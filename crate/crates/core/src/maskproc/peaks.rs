use serde::{Deserialize, Serialize};

pub const CLIP_RANGE: (f64, f64) = (-0.5, 1.0);
pub const BINS: usize = 255;
/// Peaks centered above this NDVI count as vegetation.
pub const VEGETATION_SPLIT: f64 = 0.13;
pub const MIN_PEAK_DISTANCE: usize = 10;
pub const PROMINENCE_PERCENT: u64 = 20;

/// Fixed-range NDVI histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub clip_range: (f64, f64),
}

impl Histogram {
    pub fn empty() -> Self {
        let (lo, hi) = CLIP_RANGE;
        let bin_edges = (0..=BINS)
            .map(|i| lo + (hi - lo) * i as f64 / BINS as f64)
            .collect();
        Self {
            bin_edges,
            counts: vec![0; BINS],
            clip_range: CLIP_RANGE,
        }
    }

    pub fn bin_width(&self) -> f64 {
        (self.clip_range.1 - self.clip_range.0) / self.counts.len() as f64
    }

    pub fn center(&self, bin: usize) -> f64 {
        0.5 * (self.bin_edges[bin] + self.bin_edges[bin + 1])
    }

    /// Bin of an already clipped value; the last bin is closed on the right.
    pub fn bin_of(&self, v: f64) -> usize {
        let n = self.counts.len();
        let lo = self.clip_range.0;
        let mut i = (((v - lo) / self.bin_width()).floor().max(0.0) as usize).min(n - 1);
        // settle rounding against the stored edges
        while i > 0 && v < self.bin_edges[i] {
            i -= 1;
        }
        while i + 1 < n && v >= self.bin_edges[i + 1] {
            i += 1;
        }
        i
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

pub fn clip(v: f64) -> f64 {
    v.clamp(CLIP_RANGE.0, CLIP_RANGE.1)
}

/// Histogram of the clipped values where `sample_mask` is set (all values
/// when absent). NaN values are skipped.
pub fn histogram_ndvi(values: &[f32], sample_mask: Option<&[u8]>) -> Histogram {
    let mut h = Histogram::empty();
    for v in sampled(values, sample_mask) {
        let b = h.bin_of(v);
        h.counts[b] += 1;
    }
    h
}

/// Clipped, non-NaN sample values.
pub fn sampled<'a>(values: &'a [f32], sample_mask: Option<&'a [u8]>) -> impl Iterator<Item = f64> + 'a {
    values
        .iter()
        .enumerate()
        .filter(move |(i, v)| !v.is_nan() && sample_mask.is_none_or(|m| m[*i] != 0))
        .map(|(_, &v)| clip(v as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub bin: usize,
    pub center: f64,
    pub height: u64,
    pub prominence: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PeakSet {
    pub vegetation: Vec<Peak>,
    pub non_vegetation: Vec<Peak>,
}

impl PeakSet {
    pub fn is_empty(&self) -> bool {
        self.vegetation.is_empty() && self.non_vegetation.is_empty()
    }

    /// All peaks by bin.
    pub fn all(&self) -> Vec<Peak> {
        let mut v: Vec<Peak> = self.non_vegetation.iter().chain(&self.vegetation).copied().collect();
        v.sort_by_key(|p| p.bin);
        v
    }
}

/// Local maxima; a flat top reports its middle sample (left of center for
/// even widths). The first and last samples are never maxima.
pub fn local_maxima(x: &[u64]) -> Vec<usize> {
    let mut peaks = Vec::new();
    let n = x.len();
    let mut i = 1;
    while i + 1 < n {
        if x[i - 1] < x[i] {
            let mut ahead = i + 1;
            while ahead + 1 < n && x[ahead] == x[i] {
                ahead += 1;
            }
            if x[ahead] < x[i] {
                peaks.push((i + ahead - 1) / 2);
                i = ahead;
                continue;
            }
        }
        i += 1;
    }
    peaks
}

/// Height above the higher of the two lowest points reachable on each side
/// before meeting a strictly taller sample or the edge.
pub fn prominence(x: &[u64], peak: usize) -> u64 {
    let top = x[peak];
    let mut left_min = top;
    for &v in x[..=peak].iter().rev() {
        if v > top {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = top;
    for &v in &x[peak..] {
        if v > top {
            break;
        }
        right_min = right_min.min(v);
    }
    top - left_min.max(right_min)
}

/// Keeps peaks at least `distance` apart, visiting tallest first. Equal
/// heights favour the later peak.
pub fn select_by_distance(x: &[u64], peaks: &[usize], distance: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..peaks.len()).collect();
    order.sort_by_key(|&k| x[peaks[k]]);
    let mut keep = vec![true; peaks.len()];
    for &j in order.iter().rev() {
        if !keep[j] {
            continue;
        }
        let mut k = j;
        while k > 0 && peaks[j] - peaks[k - 1] < distance {
            k -= 1;
            keep[k] = false;
        }
        k = j + 1;
        while k < peaks.len() && peaks[k] - peaks[j] < distance {
            keep[k] = false;
            k += 1;
        }
    }
    peaks.iter().zip(keep).filter(|(_, k)| *k).map(|(&p, _)| p).collect()
}

/// Peak detection on raw counts: local maxima, then the distance filter,
/// then the relative prominence filter against `max − min` of the counts.
pub fn find_peaks_counts(x: &[u64], distance: usize, prominence_percent: u64) -> Vec<(usize, u64)> {
    let (Some(&max), Some(&min)) = (x.iter().max(), x.iter().min()) else {
        return Vec::new();
    };
    let range = max - min;
    let peaks = select_by_distance(x, &local_maxima(x), distance);
    peaks
        .into_iter()
        .map(|p| (p, prominence(x, p)))
        .filter(|&(_, prom)| 100 * prom >= prominence_percent * range)
        .collect()
}

/// Peaks of an NDVI histogram split at the vegetation threshold.
pub fn find_peaks(hist: &Histogram) -> PeakSet {
    let mut set = PeakSet::default();
    for (bin, prominence) in find_peaks_counts(&hist.counts, MIN_PEAK_DISTANCE, PROMINENCE_PERCENT) {
        let peak = Peak {
            bin,
            center: hist.center(bin),
            height: hist.counts[bin],
            prominence,
        };
        if peak.center > VEGETATION_SPLIT {
            set.vegetation.push(peak);
        } else {
            set.non_vegetation.push(peak);
        }
    }
    set
}
