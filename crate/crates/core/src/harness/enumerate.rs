//! Lexicographic combination indexing.

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        // acc·(n−k+i) is divisible by i
        match acc.checked_mul(n as u128 - k as u128 + i) {
            Some(v) => acc = v / i,
            None => return u128::MAX,
        }
    }
    acc
}

/// The `rank`-th `k`-subset of `0..n` in lexicographic order.
pub fn unrank_combination(n: u64, k: u64, mut rank: u128) -> Vec<u64> {
    let mut out = Vec::with_capacity(k as usize);
    let mut next = 0;
    for i in 0..k {
        let left = k - i;
        let mut c = next;
        loop {
            let block = binomial(n - c - 1, left - 1);
            if rank < block {
                break;
            }
            rank -= block;
            c += 1;
        }
        out.push(c);
        next = c + 1;
    }
    out
}

/// Advances `comb` to the next `k`-subset of `0..n`; false when exhausted.
pub fn next_combination(comb: &mut [u64], n: u64) -> bool {
    let k = comb.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if comb[i] < n - (k - i) as u64 {
            comb[i] += 1;
            for j in i + 1..k {
                comb[j] = comb[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Index ranges `[offset, offset + C(n, k))` for each size in `lo..=hi`.
#[derive(Debug, Clone)]
pub struct SizeSegments {
    pub n: u64,
    segments: Vec<(u64, u128, u128)>,
    pub total: u128,
}

impl SizeSegments {
    pub fn new(n: u64, lo: u64, hi: u64) -> Self {
        let mut segments = Vec::new();
        let mut total: u128 = 0;
        for k in lo..=hi.min(n) {
            let c = binomial(n, k);
            segments.push((k, total, c));
            total = total.saturating_add(c);
        }
        SizeSegments { n, segments, total }
    }

    pub fn get(&self, index: u128) -> Vec<u64> {
        let &(k, off, _) = self
            .segments
            .iter()
            .find(|&&(_, off, c)| index < off + c)
            .expect("index within total");
        unrank_combination(self.n, k, index - off)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(16, 5), 4368);
        assert_eq!(binomial(25, 5), 53130);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(81, 40), 212392290424395860814420);
        assert_eq!(binomial(6561, 3000), u128::MAX);
    }

    #[test]
    fn unrank_matches_successor() {
        for (n, k) in [(6, 0), (6, 1), (6, 3), (7, 7), (9, 4)] {
            let mut comb: Vec<u64> = (0..k).collect();
            let total = binomial(n, k);
            let mut seen = 0u128;
            loop {
                assert_eq!(unrank_combination(n, k, seen), comb);
                seen += 1;
                if !next_combination(&mut comb, n) {
                    break;
                }
            }
            assert_eq!(seen, total);
        }
    }

    #[test]
    fn segments_cover_every_subset_once() {
        let seg = SizeSegments::new(8, 2, 5);
        assert_eq!(seg.total, 28 + 56 + 70 + 56);
        let mut masks = std::collections::BTreeSet::new();
        for i in 0..seg.total {
            let mask: u32 = seg.get(i).iter().map(|&c| 1 << c).sum();
            assert!(masks.insert(mask));
        }
        assert!(masks.iter().all(|m| (2..=5).contains(&m.count_ones())));
    }
}
