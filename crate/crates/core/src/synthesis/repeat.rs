//! A computable predictor outside every finite-state class: it follows the
//! period that explains the longest recent suffix.
//!
//! Policy: while a period `p` is held the prediction at `i` is `a[i-p]`.
//! After a wrong prediction, or whenever no period is held, the detector
//! picks the `p` in `1..=i` maximizing the length of the suffix of
//! `a[0..=i]` consistent with period `p`, preferring the shortest `p` on
//! ties; periods explaining no suffix at all are not held. Without a period
//! it predicts 0. A re-search costs time linear in the prefix.

use crate::bitseq::BitSeq;

/// Prediction stream of the repeat detector on `a`.
pub fn predict_repeat_detector(a: &BitSeq) -> BitSeq {
    let bits: Vec<bool> = a.iter().collect();
    let mut out = BitSeq::with_capacity(bits.len());
    let mut period: Option<usize> = None;
    for i in 0..bits.len() {
        let guess = match period {
            Some(p) => bits[i - p],
            None => false,
        };
        out.push(guess);
        if period.is_none() || guess != bits[i] {
            period = best_period(&bits[..=i]);
        }
    }
    out
}

/// Mispredictions of the repeat detector on `a[from..to]`.
pub fn repeat_detector_errors(a: &BitSeq, from: usize, to: usize) -> usize {
    let pred = predict_repeat_detector(&a.prefix(to));
    (from..to).filter(|&i| pred.get(i) != a.get(i)).count()
}

fn best_period(prefix: &[bool]) -> Option<usize> {
    let rev: Vec<bool> = prefix.iter().rev().copied().collect();
    let z = z_function(&rev);
    let mut best: Option<(usize, usize)> = None;
    for (p, &run) in z.iter().enumerate().skip(1) {
        if run > 0 && best.is_none_or(|(r, _)| run > r) {
            best = Some((run, p));
        }
    }
    best.map(|(_, p)| p)
}

/// `z[k]` is the length of the longest common prefix of `s` and `s[k..]`.
fn z_function(s: &[bool]) -> Vec<usize> {
    let n = s.len();
    let mut z = vec![0; n];
    if n == 0 {
        return z;
    }
    z[0] = n;
    let (mut l, mut r) = (0, 0);
    for k in 1..n {
        if k < r {
            z[k] = (r - k).min(z[k - l]);
        }
        while k + z[k] < n && s[z[k]] == s[k + z[k]] {
            z[k] += 1;
        }
        if k + z[k] > r {
            l = k;
            r = k + z[k];
        }
    }
    z
}
