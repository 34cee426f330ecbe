//! Edit distances and the greedy block-shift search used by TER.

/// Unit-cost Levenshtein distance.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TerLine {
    pub edits: usize,
    pub shifts: usize,
}

/// Moves `len` items starting at `start` so that they begin at `dest`
/// in the resulting sequence.
fn shifted<T: Clone>(seq: &[T], start: usize, len: usize, dest: usize) -> Vec<T> {
    let mut rest: Vec<T> = Vec::with_capacity(seq.len());
    rest.extend_from_slice(&seq[..start]);
    rest.extend_from_slice(&seq[start + len..]);
    let mut out = Vec::with_capacity(seq.len());
    out.extend_from_slice(&rest[..dest]);
    out.extend_from_slice(&seq[start..start + len]);
    out.extend_from_slice(&rest[dest..]);
    out
}

/// Greedy TER for one sentence pair.
///
/// Each round tries every block of at most `max_len` words moved at most
/// `max_distance` positions and applies the one giving the lowest edit
/// distance, if that is strictly lower than the current one. Ties go to
/// the smallest start, then shortest block, then smallest destination.
pub fn ter_line<T: PartialEq + Clone>(hyp: &[T], reference: &[T], max_distance: usize, max_len: usize) -> TerLine {
    let mut cur: Vec<T> = hyp.to_vec();
    let mut dist = levenshtein(&cur, reference);
    let mut shifts = 0;
    while dist > 0 {
        let mut best: Option<(usize, Vec<T>)> = None;
        let n = cur.len();
        for start in 0..n {
            for len in 1..=max_len.min(n - start) {
                let lo = start.saturating_sub(max_distance);
                let hi = (start + max_distance).min(n - len);
                for dest in lo..=hi {
                    if dest == start {
                        continue;
                    }
                    let cand = shifted(&cur, start, len, dest);
                    let d = levenshtein(&cand, reference);
                    if d < best.as_ref().map_or(dist, |b| b.0) {
                        best = Some((d, cand));
                    }
                }
            }
        }
        match best {
            Some((d, cand)) => {
                cur = cand;
                dist = d;
                shifts += 1;
            }
            None => break,
        }
    }
    TerLine { edits: dist, shifts }
}
