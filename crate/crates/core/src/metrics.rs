//! Pixel-level F1 (fixed and best threshold), ROC AUC and image accuracy.

use alloc::string::String;
use alloc::vec::Vec;

use crate::localization::{BinaryMask, Heatmap};
use crate::{Error, Result};

/// Threshold used for fixed-threshold F1 and image accuracy.
pub const FIXED_THRESHOLD: f64 = 0.5;

fn f1_from_counts(tp: usize, fp: usize, fn_: usize) -> f64 {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        0.0
    } else {
        (2 * tp) as f64 / denom as f64
    }
}

fn check_shape(h: &Heatmap, gt: &BinaryMask) -> Result<()> {
    if h.width() != gt.width() || h.height() != gt.height() {
        return Err(Error::ShapeMismatch("heatmap and mask differ in size"));
    }
    Ok(())
}

/// F1 of `h >= threshold` against `gt`; 0 when nothing is positive on
/// either side.
pub fn pixel_f1(h: &Heatmap, gt: &BinaryMask, threshold: f64) -> Result<f64> {
    check_shape(h, gt)?;
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (&v, &g) in h.values().iter().zip(gt.pixels().iter()) {
        match (v >= threshold, g) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    Ok(f1_from_counts(tp, fp, fn_))
}

/// Best F1 over every distinct heatmap value plus 0 and 1, as
/// `(f1, threshold)`. Ties pick the lowest threshold.
pub fn best_threshold_f1(h: &Heatmap, gt: &BinaryMask) -> Result<(f64, f64)> {
    check_shape(h, gt)?;
    let mut pixels: Vec<(f64, bool)> = h
        .values()
        .iter()
        .copied()
        .zip(gt.pixels().iter().copied())
        .collect();
    // descending, so a prefix is exactly the set predicted at a threshold
    pixels.sort_by(|a, b| b.0.total_cmp(&a.0));
    let positives = pixels.iter().filter(|p| p.1).count();

    let mut candidates: Vec<f64> = pixels.iter().map(|p| p.0).collect();
    candidates.push(0.0);
    candidates.push(1.0);
    candidates.sort_by(|a, b| b.total_cmp(a));
    candidates.dedup();

    let (mut tp, mut fp) = (0usize, 0usize);
    let mut idx = 0;
    let mut best = (f64::NEG_INFINITY, 1.0);
    for &t in &candidates {
        while idx < pixels.len() && pixels[idx].0 >= t {
            if pixels[idx].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            idx += 1;
        }
        let f1 = f1_from_counts(tp, fp, positives - tp);
        // candidates descend, so `>=` keeps the lowest threshold on ties
        if f1 >= best.0 {
            best = (f1, t);
        }
    }
    Ok(best)
}

/// Area under the ROC curve via the Mann-Whitney statistic; ties count 1/2.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch {
            expected: scores.len(),
            actual: labels.len(),
        });
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::DegenerateLabels);
    }
    let mut items: Vec<(f64, bool)> = scores.iter().copied().zip(labels.iter().copied()).collect();
    items.sort_by(|a, b| a.0.total_cmp(&b.0));

    // twice the U statistic, kept integral
    let mut twice_u: u64 = 0;
    let mut neg_below: u64 = 0;
    let mut i = 0;
    while i < items.len() {
        let mut j = i;
        let (mut pos_eq, mut neg_eq) = (0u64, 0u64);
        while j < items.len() && items[j].0 == items[i].0 {
            if items[j].1 {
                pos_eq += 1;
            } else {
                neg_eq += 1;
            }
            j += 1;
        }
        twice_u += pos_eq * (2 * neg_below + neg_eq);
        neg_below += neg_eq;
        i = j;
    }
    Ok(twice_u as f64 / (2 * n_pos * n_neg) as f64)
}

/// Fraction of images where `score >= threshold` agrees with the label.
pub fn image_accuracy(scores: &[f64], labels: &[bool], threshold: f64) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch {
            expected: scores.len(),
            actual: labels.len(),
        });
    }
    if scores.is_empty() {
        return Err(Error::InvalidParameter("no images"));
    }
    let correct = scores
        .iter()
        .zip(labels)
        .filter(|(&s, &l)| (s >= threshold) == l)
        .count();
    Ok(correct as f64 / scores.len() as f64)
}

/// Per-image results. Localization fields are `None` for authentic images.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PerImageEval {
    pub id: String,
    pub label: u8,
    pub score: f64,
    pub f1_fixed: Option<f64>,
    pub f1_best: Option<f64>,
    pub best_threshold: Option<f64>,
}

impl PerImageEval {
    /// Scores one image. F1 is only computed for tampered images.
    pub fn new(id: String, tampered: bool, h: &Heatmap, gt: &BinaryMask) -> Result<Self> {
        check_shape(h, gt)?;
        let score = crate::localization::image_level_score(h);
        let (f1_fixed, best) = if tampered {
            (
                Some(pixel_f1(h, gt, FIXED_THRESHOLD)?),
                Some(best_threshold_f1(h, gt)?),
            )
        } else {
            (None, None)
        };
        Ok(Self {
            id,
            label: tampered as u8,
            score,
            f1_fixed,
            f1_best: best.map(|b| b.0),
            best_threshold: best.map(|b| b.1),
        })
    }
}

/// Aggregate metrics over a corpus.
///
/// F1 means cover tampered images only; AUC and accuracy use every image.
/// `best_threshold` is the mean of the per-image best thresholds. `auc` is
/// `None` when only one class is present.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    pub f1_fixed: f64,
    pub f1_best: f64,
    pub best_threshold: f64,
    pub auc: Option<f64>,
    pub accuracy: f64,
    pub n_images: usize,
    pub n_tampered: usize,
    pub per_image: Vec<PerImageEval>,
}

impl EvalReport {
    /// Builds the report; items are sorted by id first so input order does
    /// not matter.
    pub fn from_items(mut items: Vec<PerImageEval>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::InvalidParameter("no images"));
        }
        items.sort_by(|a, b| a.id.cmp(&b.id));
        let scores: Vec<f64> = items.iter().map(|i| i.score).collect();
        let labels: Vec<bool> = items.iter().map(|i| i.label == 1).collect();
        let tampered: Vec<&PerImageEval> = items.iter().filter(|i| i.label == 1).collect();
        let mean = |f: &dyn Fn(&PerImageEval) -> Option<f64>| {
            let vals: Vec<f64> = tampered.iter().filter_map(|i| f(i)).collect();
            if vals.is_empty() {
                0.0
            } else {
                vals.iter().sum::<f64>() / vals.len() as f64
            }
        };
        let auc = match roc_auc(&scores, &labels) {
            Ok(a) => Some(a),
            Err(Error::DegenerateLabels) => None,
            Err(e) => return Err(e),
        };
        Ok(Self {
            f1_fixed: mean(&|i| i.f1_fixed),
            f1_best: mean(&|i| i.f1_best),
            best_threshold: mean(&|i| i.best_threshold),
            auc,
            accuracy: image_accuracy(&scores, &labels, FIXED_THRESHOLD)?,
            n_images: items.len(),
            n_tampered: tampered.len(),
            per_image: items,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::localization::HeatmapOrigin;
    use alloc::vec;
    use proptest::prelude::*;

    fn hm(w: usize, h: usize, v: Vec<f64>) -> Heatmap {
        Heatmap::new(Grid::from_vec(w, h, v).unwrap(), HeatmapOrigin::External).unwrap()
    }

    fn mask(w: usize, h: usize, v: Vec<bool>) -> BinaryMask {
        BinaryMask::new(Grid::from_vec(w, h, v).unwrap())
    }

    // brute force: evaluate F1 at every candidate threshold, keep the lowest best
    fn brute_best(h: &Heatmap, gt: &BinaryMask) -> (f64, f64) {
        let mut cands: Vec<f64> = h.values().iter().copied().collect();
        cands.extend([0.0, 1.0]);
        let mut best = (-1.0, f64::INFINITY);
        for &t in &cands {
            let mut c = [0usize; 3];
            for (&v, &g) in h.values().iter().zip(gt.pixels().iter()) {
                let p = v >= t;
                if p && g {
                    c[0] += 1;
                } else if p {
                    c[1] += 1;
                } else if g {
                    c[2] += 1;
                }
            }
            let d = 2 * c[0] + c[1] + c[2];
            let f = if d == 0 { 0.0 } else { (2 * c[0]) as f64 / d as f64 };
            if f > best.0 || (f == best.0 && t < best.1) {
                best = (f, t);
            }
        }
        best
    }

    fn brute_auc(s: &[f64], l: &[bool]) -> f64 {
        let mut u = 0.0;
        let mut pairs = 0.0;
        for i in 0..s.len() {
            for j in 0..s.len() {
                if l[i] && !l[j] {
                    pairs += 1.0;
                    if s[i] > s[j] {
                        u += 1.0;
                    } else if s[i] == s[j] {
                        u += 0.5;
                    }
                }
            }
        }
        u / pairs
    }

    #[test]
    fn f1_examples() {
        let gt = mask(2, 2, vec![true, true, false, false]);
        assert_eq!(pixel_f1(&hm(2, 2, vec![1.0, 1.0, 0.0, 0.0]), &gt, 0.5).unwrap(), 1.0);
        assert_eq!(pixel_f1(&hm(2, 2, vec![0.0, 0.0, 1.0, 1.0]), &gt, 0.5).unwrap(), 0.0);
        // TP=2, FP=1, FN=1
        let gt = mask(5, 1, vec![true, true, true, false, false]);
        let h = hm(5, 1, vec![0.9, 0.8, 0.1, 0.7, 0.0]);
        assert!((pixel_f1(&h, &gt, 0.5).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(pixel_f1(&h, &mask(1, 1, vec![true]), 0.5).is_err());
    }

    #[test]
    fn best_f1_examples() {
        let gt = mask(2, 2, vec![true, false, true, false]);
        let (f, t) = best_threshold_f1(&hm(2, 2, vec![1.0, 0.0, 1.0, 0.0]), &gt).unwrap();
        assert_eq!(f, 1.0);
        assert!(t > 0.0 && t <= 1.0);

        // constant map: only "all" or "none" outcomes, p = 1/2
        let (f, _) = best_threshold_f1(&hm(2, 2, vec![0.5; 4]), &gt).unwrap();
        let p: f64 = 0.5;
        assert!((f - 2.0 * p / (p + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn auc_examples() {
        let l = [false, false, true, true];
        assert_eq!(roc_auc(&[0.1, 0.2, 0.8, 0.9], &l).unwrap(), 1.0);
        assert_eq!(roc_auc(&[0.3; 4], &l).unwrap(), 0.5);
        assert_eq!(roc_auc(&[0.1, 0.4, 0.35, 0.8], &l).unwrap(), 0.75);
        assert_eq!(roc_auc(&[0.1, 0.2], &[true, true]), Err(Error::DegenerateLabels));
    }

    #[test]
    fn accuracy_examples() {
        let l = [true, false, true, false];
        assert_eq!(image_accuracy(&[0.9, 0.1, 0.5, 0.4], &l, 0.5).unwrap(), 1.0);
        assert_eq!(image_accuracy(&[0.1, 0.9, 0.4, 0.5], &l, 0.5).unwrap(), 0.0);
        assert_eq!(image_accuracy(&[0.9, 0.1, 0.5, 0.6], &l, 0.5).unwrap(), 0.75);
        assert!(image_accuracy(&[0.9], &l, 0.5).is_err());
    }

    #[test]
    fn report_from_ground_truth_predictions() {
        let gt = mask(2, 1, vec![true, false]);
        let a = PerImageEval::new("b".into(), true, &hm(2, 1, vec![1.0, 0.0]), &gt).unwrap();
        let b = PerImageEval::new("a".into(), false, &hm(2, 1, vec![0.0, 0.0]), &BinaryMask::empty(2, 1))
            .unwrap();
        let r = EvalReport::from_items(vec![a, b]).unwrap();
        assert_eq!(r.per_image[0].id, "a");
        assert_eq!(r.f1_fixed, 1.0);
        assert_eq!(r.auc, Some(1.0));
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.n_tampered, 1);
    }

    #[test]
    fn report_from_zero_predictions() {
        let gt = mask(2, 1, vec![true, false]);
        let zero = hm(2, 1, vec![0.0, 0.0]);
        let a = PerImageEval::new("t".into(), true, &zero, &gt).unwrap();
        let b = PerImageEval::new("u".into(), false, &zero, &BinaryMask::empty(2, 1)).unwrap();
        let r = EvalReport::from_items(vec![a, b]).unwrap();
        assert_eq!(r.f1_fixed, 0.0);
        assert_eq!(r.auc, Some(0.5));
    }

    fn instance() -> impl Strategy<Value = (usize, usize, Vec<f64>, Vec<bool>)> {
        (1usize..=8, 1usize..=8).prop_flat_map(|(w, h)| {
            (
                Just(w),
                Just(h),
                // coarse levels so ties and repeated values are common
                proptest::collection::vec((0u8..=10).prop_map(|x| x as f64 / 10.0), w * h),
                proptest::collection::vec(any::<bool>(), w * h),
            )
        })
    }

    proptest! {
        #[test]
        fn best_f1_matches_brute_force((w, h, v, g) in instance(), t in 0.0f64..=1.0) {
            let (hmap, gt) = (hm(w, h, v), mask(w, h, g));
            let got = best_threshold_f1(&hmap, &gt).unwrap();
            prop_assert_eq!(got, brute_best(&hmap, &gt));
            prop_assert!(got.0 >= pixel_f1(&hmap, &gt, t).unwrap());
            prop_assert!(got.0 >= pixel_f1(&hmap, &gt, FIXED_THRESHOLD).unwrap());
        }

        #[test]
        fn auc_matches_brute_force(s in proptest::collection::vec((0u8..6).prop_map(f64::from), 2..30), seed in any::<u64>()) {
            let l: Vec<bool> = (0..s.len()).map(|i| (seed >> (i % 64)) & 1 == 1).collect();
            prop_assume!(l.iter().any(|&x| x) && l.iter().any(|&x| !x));
            let a = roc_auc(&s, &l).unwrap();
            prop_assert_eq!(a, brute_auc(&s, &l));
            // strictly monotone transform
            let t: Vec<f64> = s.iter().map(|x| x * x * x + 3.0 * x).collect();
            prop_assert_eq!(roc_auc(&t, &l).unwrap(), a);
        }
    }
}
