//! Brute-force reference implementations of the evaluation metrics.
//!
//! Deliberately naive: n-grams are materialised as vectors and counted by
//! linear scans, edit distance is a memoised recursion, and the TER shift
//! search collects every candidate before choosing.

use std::collections::HashMap;

fn grams<T: Clone>(seq: &[T], n: usize) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    let mut i = 0;
    while i + n <= seq.len() {
        out.push(seq[i..i + n].to_vec());
        i += 1;
    }
    out
}

fn occurrences<T: PartialEq>(list: &[Vec<T>], g: &[T]) -> u64 {
    list.iter().filter(|x| x.as_slice() == g).count() as u64
}

/// (clipped matches, hypothesis n-grams, reference n-grams)
fn match_counts<T: Clone + PartialEq>(hyp: &[T], reference: &[T], n: usize) -> (u64, u64, u64) {
    let h = grams(hyp, n);
    let r = grams(reference, n);
    let mut seen: Vec<Vec<T>> = Vec::new();
    let mut matches = 0;
    for g in &h {
        if seen.contains(g) {
            continue;
        }
        seen.push(g.clone());
        matches += occurrences(&h, g).min(occurrences(&r, g));
    }
    (matches, h.len() as u64, r.len() as u64)
}

fn bleu_generic<T: Clone + PartialEq>(pairs: &[(Vec<T>, Vec<T>)], max_order: usize, literal: bool) -> f64 {
    let mut m = vec![0u64; max_order];
    let mut t = vec![0u64; max_order];
    let (mut c, mut r) = (0.0, 0.0);
    for (h, rf) in pairs {
        c += h.len() as f64;
        r += rf.len() as f64;
        for n in 1..=max_order {
            let (mm, th, _) = match_counts(h, rf, n);
            m[n - 1] += mm;
            t[n - 1] += th;
        }
    }
    if c == 0.0 || m[0] == 0 {
        return 0.0;
    }
    let orders: Vec<usize> = (0..max_order).filter(|&i| t[i] > 0).collect();
    if literal {
        let bp = if c / r < 1.0 { c / r } else { 1.0 };
        let mut prod = 1.0;
        for &i in &orders {
            prod *= m[i] as f64 / t[i] as f64;
        }
        return 100.0 * bp * prod;
    }
    let bp = if c >= r { 1.0 } else { (1.0 - r / c).exp() };
    let mut log_sum = 0.0;
    for &i in &orders {
        let num = if m[i] == 0 { 1e-9 } else { m[i] as f64 };
        log_sum += (num / t[i] as f64).ln();
    }
    100.0 * bp * (log_sum / orders.len() as f64).exp()
}

fn tokens(s: &str) -> Vec<String> {
    s.split_whitespace().map(String::from).collect()
}

pub fn bleu(hyps: &[String], refs: &[String], literal: bool) -> f64 {
    let pairs: Vec<_> = hyps.iter().zip(refs).map(|(h, r)| (tokens(h), tokens(r))).collect();
    bleu_generic(&pairs, 4, literal)
}

pub fn char_bleu(hyps: &[String], refs: &[String]) -> f64 {
    let pairs: Vec<_> = hyps
        .iter()
        .zip(refs)
        .map(|(h, r)| (h.chars().collect::<Vec<_>>(), r.chars().collect::<Vec<_>>()))
        .collect();
    bleu_generic(&pairs, 4, false)
}

pub fn chrf2(hyps: &[String], refs: &[String]) -> f64 {
    let strip = |s: &String| s.chars().filter(|c| !c.is_whitespace()).collect::<Vec<_>>();
    let mut psum = 0.0;
    let mut rsum = 0.0;
    let mut k = 0.0;
    for n in 1..=6 {
        let (mut m, mut th, mut tr) = (0u64, 0u64, 0u64);
        for (h, r) in hyps.iter().zip(refs) {
            let (a, b, c) = match_counts(&strip(h), &strip(r), n);
            m += a;
            th += b;
            tr += c;
        }
        if tr == 0 {
            continue;
        }
        k += 1.0;
        psum += if th == 0 { 0.0 } else { m as f64 / th as f64 };
        rsum += m as f64 / tr as f64;
    }
    let (p, r) = (psum / k, rsum / k);
    if p + r == 0.0 {
        0.0
    } else {
        100.0 * 5.0 * p * r / (4.0 * p + r)
    }
}

pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    fn go<T: PartialEq>(a: &[T], b: &[T], i: usize, j: usize, memo: &mut HashMap<(usize, usize), usize>) -> usize {
        if i == a.len() {
            return b.len() - j;
        }
        if j == b.len() {
            return a.len() - i;
        }
        if let Some(&v) = memo.get(&(i, j)) {
            return v;
        }
        let v = if a[i] == b[j] {
            go(a, b, i + 1, j + 1, memo)
        } else {
            1 + go(a, b, i + 1, j + 1, memo)
                .min(go(a, b, i + 1, j, memo))
                .min(go(a, b, i, j + 1, memo))
        };
        // a free match is never worse than editing around it
        let v = v.min(1 + go(a, b, i + 1, j, memo)).min(1 + go(a, b, i, j + 1, memo));
        memo.insert((i, j), v);
        v
    }
    go(a, b, 0, 0, &mut HashMap::new())
}

pub fn wer(hyps: &[String], refs: &[String]) -> f64 {
    let mut e = 0;
    let mut n = 0;
    for (h, r) in hyps.iter().zip(refs) {
        e += edit_distance(&tokens(h), &tokens(r));
        n += tokens(r).len();
    }
    100.0 * e as f64 / n as f64
}

/// (edits, shifts) under greedy best-single-shift search.
pub fn ter_line(hyp: &[String], reference: &[String], max_dist: usize, max_len: usize) -> (usize, usize) {
    let mut cur = hyp.to_vec();
    let mut shifts = 0;
    loop {
        let d0 = edit_distance(&cur, reference);
        let mut cands: Vec<(usize, usize, usize, usize, Vec<String>)> = Vec::new();
        for start in 0..cur.len() {
            for len in 1..=max_len {
                if start + len > cur.len() {
                    break;
                }
                let mut rest = cur.clone();
                let block: Vec<String> = rest.drain(start..start + len).collect();
                for dest in 0..=rest.len() {
                    if dest == start || dest.abs_diff(start) > max_dist {
                        continue;
                    }
                    let mut cand = rest.clone();
                    for (k, w) in block.iter().enumerate() {
                        cand.insert(dest + k, w.clone());
                    }
                    cands.push((edit_distance(&cand, reference), start, len, dest, cand));
                }
            }
        }
        cands.retain(|c| c.0 < d0);
        cands.sort_by_key(|a| (a.0, a.1, a.2, a.3));
        match cands.into_iter().next() {
            Some(best) => {
                cur = best.4;
                shifts += 1;
            }
            None => return (d0, shifts),
        }
    }
}

pub fn ter(hyps: &[String], refs: &[String]) -> f64 {
    let mut total = 0;
    let mut n = 0;
    for (h, r) in hyps.iter().zip(refs) {
        let (e, s) = ter_line(&tokens(h), &tokens(r), 10, 10);
        total += e + s;
        n += tokens(r).len();
    }
    total as f64 / n as f64
}

/// Relative closeness used by the oracle comparisons.
pub fn close(a: f64, b: f64, rel: f64) -> bool {
    if a == b {
        return true;
    }
    (a - b).abs() <= rel * a.abs().max(b.abs())
}
