// SPDX-License-Identifier: Apache-2.0

//! Slow, obviously-correct reference implementations for cross-checking the
//! camloc algorithms in tests. Nothing here depends on `camloc-core`; boxes
//! are plain `[x_min, y_min, x_max, y_max]` arrays.

#![allow(
    clippy::needless_range_loop,
    clippy::too_many_arguments,
    clippy::neg_cmp_op_on_partial_ord
)]

use num_bigint::BigInt;
use num_rational::BigRational;

pub type RawBox = [f64; 4];

pub fn box_iou(a: RawBox, b: RawBox) -> f64 {
    let iw = a[2].min(b[2]) - a[0].max(b[0]);
    let ih = a[3].min(b[3]) - a[1].max(b[1]);
    if iw <= 0.0 || ih <= 0.0 {
        return 0.0;
    }
    let inter = iw * ih;
    let union = (a[2] - a[0]) * (a[3] - a[1]) + (b[2] - b[0]) * (b[3] - b[1]) - inter;
    (inter / union).min(1.0)
}

fn lex(a: RawBox, b: RawBox) -> std::cmp::Ordering {
    a.partial_cmp(&b).unwrap()
}

// ---------------------------------------------------------------------------
// Otsu

/// Scans every bin edge, scoring between-class variance
/// `w0 * w1 * (mu0 - mu1)^2` in exact rationals; first maximum wins.
pub fn otsu(values: &[f64], bins: usize) -> Option<f64> {
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if values.is_empty() || !(max > min) {
        return None;
    }
    let mut hist = vec![0i64; bins];
    for &v in values {
        let b = ((v - min) / (max - min) * bins as f64).floor();
        let b = if b < 0.0 { 0 } else { (b as usize).min(bins - 1) };
        hist[b] += 1;
    }
    let total: i64 = hist.iter().sum();
    let rat = |n: i64| BigRational::from_integer(BigInt::from(n));
    let mut best: Option<(usize, BigRational)> = None;
    for k in 1..bins {
        let n0: i64 = hist[..k].iter().sum();
        let n1 = total - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let s0: i64 = hist[..k].iter().enumerate().map(|(i, &c)| i as i64 * c).sum();
        let s1: i64 = hist[k..]
            .iter()
            .enumerate()
            .map(|(i, &c)| (i + k) as i64 * c)
            .sum();
        let w0 = rat(n0) / rat(total);
        let w1 = rat(n1) / rat(total);
        let mu0 = rat(s0) / rat(n0);
        let mu1 = rat(s1) / rat(n1);
        let diff = mu0 - mu1;
        let var = w0 * w1 * diff.clone() * diff;
        if best.as_ref().is_none_or(|(_, b)| var > *b) {
            best = Some((k, var));
        }
    }
    let (k, _) = best?;
    Some(min + k as f64 * ((max - min) / bins as f64))
}

// ---------------------------------------------------------------------------
// Connected components

/// Recursive flood fill. Returns `(sorted pixel indices, [c0, r0, c1, r1])`
/// per component in raster order of first pixel; the box is half-open.
pub fn flood_fill(bits: &[bool], height: usize, width: usize, eight: bool) -> Vec<(Vec<usize>, [usize; 4])> {
    fn visit(
        bits: &[bool],
        seen: &mut [bool],
        h: usize,
        w: usize,
        eight: bool,
        r: usize,
        c: usize,
        out: &mut Vec<usize>,
    ) {
        let i = r * w + c;
        if !bits[i] || seen[i] {
            return;
        }
        seen[i] = true;
        out.push(i);
        for dr in -1i64..=1 {
            for dc in -1i64..=1 {
                if (dr == 0 && dc == 0) || (!eight && dr != 0 && dc != 0) {
                    continue;
                }
                let (nr, nc) = (r as i64 + dr, c as i64 + dc);
                if nr >= 0 && nc >= 0 && (nr as usize) < h && (nc as usize) < w {
                    visit(bits, seen, h, w, eight, nr as usize, nc as usize, out);
                }
            }
        }
    }

    let mut seen = vec![false; bits.len()];
    let mut comps = Vec::new();
    for r in 0..height {
        for c in 0..width {
            let mut px = Vec::new();
            visit(bits, &mut seen, height, width, eight, r, c, &mut px);
            if px.is_empty() {
                continue;
            }
            px.sort();
            let cols = px.iter().map(|p| p % width);
            let rows = px.iter().map(|p| p / width);
            let bbox = [
                cols.clone().min().unwrap(),
                rows.clone().min().unwrap(),
                cols.max().unwrap() + 1,
                rows.max().unwrap() + 1,
            ];
            comps.push((px, bbox));
        }
    }
    comps
}

// ---------------------------------------------------------------------------
// Greedy de-duplication

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawDet {
    pub bbox: RawBox,
    pub class_id: usize,
    pub score: f64,
}

/// Repeatedly takes the best remaining candidate (score desc, class asc,
/// box lexicographic) and keeps it when no kept box overlaps it at
/// `>= thr`.
pub fn greedy_dedup(dets: &[RawDet], thr: f64) -> Vec<RawDet> {
    let mut remaining: Vec<RawDet> = dets.to_vec();
    let mut kept: Vec<RawDet> = Vec::new();
    while !remaining.is_empty() {
        let mut best = 0;
        for i in 1..remaining.len() {
            let (a, b) = (remaining[i], remaining[best]);
            let better = a.score > b.score
                || (a.score == b.score
                    && (a.class_id < b.class_id
                        || (a.class_id == b.class_id && lex(a.bbox, b.bbox).is_lt())));
            if better {
                best = i;
            }
        }
        let cand = remaining.remove(best);
        if kept.iter().all(|k| box_iou(k.bbox, cand.bbox) < thr) {
            kept.push(cand);
        }
    }
    kept
}

// ---------------------------------------------------------------------------
// F1 threshold sweep

pub fn f1(pred: &[bool], truth: &[bool]) -> f64 {
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (&p, &t) in pred.iter().zip(truth) {
        match (p, t) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            _ => {}
        }
    }
    if tp + fp + fn_ == 0 {
        1.0
    } else {
        2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
    }
}

/// Best F1 of `p > t` over every threshold that yields a distinct
/// prediction: below everything, and at each observed probability.
pub fn best_threshold_f1(probs: &[f64], truth: &[bool]) -> f64 {
    let mut thresholds: Vec<f64> = probs.to_vec();
    thresholds.push(-1.0);
    thresholds
        .iter()
        .map(|&t| {
            let pred: Vec<bool> = probs.iter().map(|&p| p > t).collect();
            f1(&pred, truth)
        })
        .fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Asymmetric loss

/// Direct elementwise loss with clamping at `1e-7`.
pub fn asl_element(p: f64, y: bool, gamma_pos: f64, gamma_neg: f64, margin: f64) -> f64 {
    let p = p.clamp(1e-7, 1.0 - 1e-7);
    if y {
        -((1.0 - p).powf(gamma_pos)) * p.ln()
    } else {
        let pm = (p - margin).max(0.0);
        if pm == 0.0 {
            0.0
        } else {
            -(pm.powf(gamma_neg)) * (1.0 - pm).ln()
        }
    }
}

pub fn bce_element(p: f64, y: bool) -> f64 {
    let p = p.clamp(1e-7, 1.0 - 1e-7);
    if y {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

pub fn central_difference(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

// ---------------------------------------------------------------------------
// Dense Kalman reference

pub type Mat = Vec<Vec<f64>>;

pub fn zeros(r: usize, c: usize) -> Mat {
    vec![vec![0.0; c]; r]
}

pub fn identity(n: usize) -> Mat {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let mut out = zeros(a.len(), b[0].len());
    for i in 0..a.len() {
        for j in 0..b[0].len() {
            for k in 0..b.len() {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn transpose(a: &Mat) -> Mat {
    let mut out = zeros(a[0].len(), a.len());
    for i in 0..a.len() {
        for j in 0..a[0].len() {
            out[j][i] = a[i][j];
        }
    }
    out
}

pub fn add(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect())
        .collect()
}

pub fn sub(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x - y).collect())
        .collect()
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn invert(a: &Mat) -> Option<Mat> {
    let n = a.len();
    let mut m: Mat = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| m[x][col].abs().partial_cmp(&m[y][col].abs()).unwrap())?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        let p = m[col][col];
        for v in m[col].iter_mut() {
            *v /= p;
        }
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                if f != 0.0 {
                    for c in 0..2 * n {
                        m[r][c] -= f * m[col][c];
                    }
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Constant-velocity transition over `(cx, cy, w, h, v*)`.
pub fn transition() -> Mat {
    let mut f = identity(8);
    for i in 0..4 {
        f[i][i + 4] = 1.0;
    }
    f
}

pub fn observation() -> Mat {
    let mut h = zeros(4, 8);
    for (i, row) in h.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    h
}

pub fn dense_predict(x: &[f64], p: &Mat, q: &Mat) -> (Vec<f64>, Mat) {
    let f = transition();
    let xm: Mat = x.iter().map(|&v| vec![v]).collect();
    let x_next = matmul(&f, &xm).into_iter().map(|r| r[0]).collect();
    let p_next = add(&matmul(&matmul(&f, p), &transpose(&f)), q);
    (x_next, p_next)
}

pub fn dense_update(x: &[f64], p: &Mat, z: &[f64], r_var: f64) -> Option<(Vec<f64>, Mat)> {
    let h = observation();
    let ht = transpose(&h);
    let mut r = identity(4);
    for (i, row) in r.iter_mut().enumerate() {
        row[i] *= r_var;
    }
    let s = add(&matmul(&matmul(&h, p), &ht), &r);
    let k = matmul(&matmul(p, &ht), &invert(&s)?);
    let xm: Mat = x.iter().map(|&v| vec![v]).collect();
    let zm: Mat = z.iter().map(|&v| vec![v]).collect();
    let innovation = sub(&zm, &matmul(&h, &xm));
    let x_next = add(&xm, &matmul(&k, &innovation))
        .into_iter()
        .map(|r| r[0])
        .collect();
    let p_next = matmul(&sub(&identity(8), &matmul(&k, &h)), p);
    Some((x_next, p_next))
}

// ---------------------------------------------------------------------------
// Association

/// `(track class, track box)` against `(det class, det box)`; returns pairs
/// in selection order. Repeatedly takes the highest-IoU unused pair.
pub fn greedy_associate(
    tracks: &[(usize, RawBox)],
    dets: &[(usize, RawBox)],
    thr: f64,
) -> Vec<(usize, usize)> {
    let mut used_t = vec![false; tracks.len()];
    let mut used_d = vec![false; dets.len()];
    let mut pairs = Vec::new();
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for (ti, t) in tracks.iter().enumerate() {
            for (di, d) in dets.iter().enumerate() {
                if used_t[ti] || used_d[di] || t.0 != d.0 {
                    continue;
                }
                let v = box_iou(t.1, d.1);
                if v < thr || v == 0.0 {
                    continue;
                }
                if best.is_none_or(|(bv, _, _)| v > bv) {
                    best = Some((v, ti, di));
                }
            }
        }
        let Some((_, ti, di)) = best else { break };
        used_t[ti] = true;
        used_d[di] = true;
        pairs.push((ti, di));
    }
    pairs
}

// ---------------------------------------------------------------------------
// Average precision

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawPred {
    pub frame: u64,
    pub score: f64,
    pub bbox: RawBox,
}

/// Greedy matching followed by the VOC-style envelope with sentinels.
/// `None` when there is no ground truth.
pub fn average_precision(preds: &[RawPred], gts: &[(u64, RawBox)], thr: f64) -> Option<f64> {
    if gts.is_empty() {
        return None;
    }
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (preds[a], preds[b]);
        pb.score
            .partial_cmp(&pa.score)
            .unwrap()
            .then(pa.frame.cmp(&pb.frame))
            .then(lex(pa.bbox, pb.bbox))
    });
    let mut matched = vec![false; gts.len()];
    let mut tp = Vec::new();
    for &i in &order {
        let p = preds[i];
        let mut best: Option<(usize, f64)> = None;
        for (gi, g) in gts.iter().enumerate() {
            if g.0 != p.frame || matched[gi] {
                continue;
            }
            let v = box_iou(g.1, p.bbox);
            if v >= thr && best.is_none_or(|(_, bv)| v > bv) {
                best = Some((gi, v));
            }
        }
        if let Some((gi, _)) = best {
            matched[gi] = true;
        }
        tp.push(best.is_some());
    }
    let n = gts.len() as f64;
    let mut mrec = vec![0.0];
    let mut mpre = vec![0.0];
    let mut hits = 0.0;
    for (k, &t) in tp.iter().enumerate() {
        if t {
            hits += 1.0;
        }
        mrec.push(hits / n);
        mpre.push(hits / (k as f64 + 1.0));
    }
    mrec.push(1.0);
    mpre.push(0.0);
    for i in (0..mpre.len() - 1).rev() {
        mpre[i] = mpre[i].max(mpre[i + 1]);
    }
    let mut ap = 0.0;
    for i in 1..mrec.len() {
        if mrec[i] != mrec[i - 1] {
            ap += (mrec[i] - mrec[i - 1]) * mpre[i];
        }
    }
    Some(ap)
}
