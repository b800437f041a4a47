//! Brute-force reference computations.

/// Hedges' g evaluated the way a spreadsheet would: column means, sample
/// variances, pooled deviation, difference of means over pooled deviation.
pub fn spreadsheet_hedges_g(x: &[f64], y: &[f64]) -> f64 {
    let n1 = x.len() as f64;
    let n2 = y.len() as f64;
    let m1 = x.iter().sum::<f64>() / n1;
    let m2 = y.iter().sum::<f64>() / n2;
    let var1 = x.iter().map(|v| (v - m1).powi(2)).sum::<f64>() / (n1 - 1.0);
    let var2 = y.iter().map(|v| (v - m2).powi(2)).sum::<f64>() / (n2 - 1.0);
    let pooled = (((n1 - 1.0) * var1 + (n2 - 1.0) * var2) / (n1 + n2 - 2.0)).sqrt();
    (m1 - m2) / pooled
}

fn class_entropy(labels: &[u8]) -> f64 {
    let n = labels.len() as f64;
    if labels.is_empty() {
        return 0.0;
    }
    let ones = labels.iter().filter(|&&l| l != 0).count() as f64;
    let mut h = 0.0;
    for count in [ones, n - ones] {
        if count > 0.0 {
            let p = count / n;
            h -= p * p.log2();
        }
    }
    h
}

fn class_count(labels: &[u8]) -> f64 {
    let ones = labels.iter().any(|&l| l != 0);
    let zeros = labels.contains(&0);
    f64::from(u8::from(ones) + u8::from(zeros))
}

fn separating_midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m >= b {
        a
    } else {
        m
    }
}

/// Entropy-MDL cut points found by trying every midpoint at every level and
/// recomputing each partition's entropy from scratch.
pub fn exhaustive_mdl_cuts(values: &[f64], labels: &[u8]) -> Vec<f64> {
    let mut cuts = Vec::new();
    mdl_recurse(values, labels, &mut cuts);
    cuts.sort_by(f64::total_cmp);
    cuts
}

fn mdl_recurse(values: &[f64], labels: &[u8], cuts: &mut Vec<f64>) {
    let n = values.len();
    if n < 2 {
        return;
    }
    let mut distinct = values.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let mut best: Option<(f64, f64)> = None;
    for pair in distinct.windows(2) {
        let cut = separating_midpoint(pair[0], pair[1]);
        let left: Vec<u8> = (0..n).filter(|&i| values[i] <= cut).map(|i| labels[i]).collect();
        let right: Vec<u8> = (0..n).filter(|&i| values[i] > cut).map(|i| labels[i]).collect();
        let e = left.len() as f64 / n as f64 * class_entropy(&left) + right.len() as f64 / n as f64 * class_entropy(&right);
        match best {
            Some((b, _)) if e >= b - 1e-12 => {}
            _ => best = Some((e, cut)),
        }
    }
    let Some((e, cut)) = best else {
        return;
    };
    let left_idx: Vec<usize> = (0..n).filter(|&i| values[i] <= cut).collect();
    let right_idx: Vec<usize> = (0..n).filter(|&i| values[i] > cut).collect();
    let left_labels: Vec<u8> = left_idx.iter().map(|&i| labels[i]).collect();
    let right_labels: Vec<u8> = right_idx.iter().map(|&i| labels[i]).collect();

    let ent = class_entropy(labels);
    let (k, k1, k2) = (class_count(labels), class_count(&left_labels), class_count(&right_labels));
    let delta = (3f64.powf(k) - 2.0).log2() - (k * ent - k1 * class_entropy(&left_labels) - k2 * class_entropy(&right_labels));
    let gain = ent - e;
    if gain <= ((n as f64 - 1.0).log2() + delta) / n as f64 {
        return;
    }
    cuts.push(cut);
    let pick = |idx: &[usize]| -> (Vec<f64>, Vec<u8>) {
        (idx.iter().map(|&i| values[i]).collect(), idx.iter().map(|&i| labels[i]).collect())
    };
    let (lv, ll) = pick(&left_idx);
    let (rv, rl) = pick(&right_idx);
    mdl_recurse(&lv, &ll, cuts);
    mdl_recurse(&rv, &rl, cuts);
}

/// Weighted residual sum of squares of the least-squares fit of `y` on an
/// intercept plus the columns `cols` of `x`.
pub fn wls_residual(x: &[Vec<f64>], y: &[f64], w: &[f64], cols: &[usize]) -> f64 {
    let p = cols.len() + 1;
    let design = |row: &[f64], j: usize| if j == 0 { 1.0 } else { row[cols[j - 1]] };
    let mut a = vec![vec![0.0; p + 1]; p];
    for ((row, &t), &wi) in x.iter().zip(y).zip(w) {
        for i in 0..p {
            let di = design(row, i);
            for j in 0..p {
                a[i][j] += wi * di * design(row, j);
            }
            a[i][p] += wi * di * t;
        }
    }
    // Gauss-Jordan on the augmented matrix
    for c in 0..p {
        let pivot = (c..p).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, pivot);
        let d = a[c][c];
        if d.abs() < 1e-12 {
            return f64::INFINITY;
        }
        for v in a[c].iter_mut() {
            *v /= d;
        }
        for r in 0..p {
            if r != c {
                let f = a[r][c];
                for k in 0..=p {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
    }
    let beta: Vec<f64> = (0..p).map(|i| a[i][p]).collect();
    x.iter()
        .zip(y)
        .zip(w)
        .map(|((row, &t), &wi)| {
            let fit: f64 = (0..p).map(|j| beta[j] * design(row, j)).sum();
            wi * (t - fit).powi(2)
        })
        .sum()
}

/// Every size-`k` subset of `0..d` in lexicographic order.
pub fn subsets(d: usize, k: usize) -> Vec<Vec<usize>> {
    fn walk(start: usize, d: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..d {
            cur.push(i);
            walk(i + 1, d, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    walk(0, d, k, &mut Vec::new(), &mut out);
    out
}

/// Best size-`k` subset by weighted residual, with its residual.
pub fn best_subset(x: &[Vec<f64>], y: &[f64], w: &[f64], k: usize) -> (Vec<usize>, f64) {
    let d = x[0].len();
    subsets(d, k)
        .into_iter()
        .map(|s| {
            let r = wls_residual(x, y, w, &s);
            (s, r)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap()
}

/// Best single-threshold stump on one feature by exhaustive Gini search.
/// Returns `(threshold, left_label, right_label)`; majority ties go to 1.
pub fn best_stump(values: &[f64], labels: &[u8]) -> (f64, u8, u8) {
    let gini = |ls: &[u8]| {
        if ls.is_empty() {
            return 0.0;
        }
        let p = ls.iter().filter(|&&l| l == 1).count() as f64 / ls.len() as f64;
        1.0 - p * p - (1.0 - p) * (1.0 - p)
    };
    let majority = |ls: &[u8]| u8::from(2 * ls.iter().filter(|&&l| l == 1).count() >= ls.len());
    let mut distinct = values.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let n = values.len() as f64;
    let mut best: Option<(f64, f64, u8, u8)> = None;
    for pair in distinct.windows(2) {
        let t = separating_midpoint(pair[0], pair[1]);
        let left: Vec<u8> = values.iter().zip(labels).filter(|(v, _)| **v <= t).map(|(_, l)| *l).collect();
        let right: Vec<u8> = values.iter().zip(labels).filter(|(v, _)| **v > t).map(|(_, l)| *l).collect();
        let impurity = left.len() as f64 / n * gini(&left) + right.len() as f64 / n * gini(&right);
        match best {
            Some((b, ..)) if impurity >= b - 1e-12 => {}
            _ => best = Some((impurity, t, majority(&left), majority(&right))),
        }
    }
    let (_, t, l, r) = best.expect("at least two distinct values");
    (t, l, r)
}
