//! Minimum number of directions over non-collinear sets of a given size.

use serde::Serialize;

use super::point_at;
use super::{
    pair_codes, run_chunks, sample_candidate, Candidate, HarnessError, Kind, SizeSegments,
};
use crate::ff::FieldSpec;
use crate::plane::{direction_mask, PlanePointSet};

const MAX_WITNESSES: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtremalResult {
    pub q: u32,
    pub size: usize,
    /// `"exhaustive"`, `"heuristic"` or `"exempt"` (sizes below 3).
    pub mode: &'static str,
    pub checked: u64,
    pub min_d: Option<usize>,
    pub witnesses: Vec<Vec<[u32; 2]>>,
}

#[derive(Default)]
struct Best {
    checked: u64,
    min_d: Option<usize>,
    witnesses: Vec<Vec<[u32; 2]>>,
}

impl Best {
    fn offer(&mut self, d: usize, w: Vec<[u32; 2]>) {
        match self.min_d {
            Some(m) if d > m => {}
            Some(m) if d == m => {
                if self.witnesses.len() < MAX_WITNESSES && !self.witnesses.contains(&w) {
                    self.witnesses.push(w);
                }
            }
            _ => {
                self.min_d = Some(d);
                self.witnesses = vec![w];
            }
        }
    }

    fn absorb(&mut self, other: Best) {
        self.checked += other.checked;
        if let Some(d) = other.min_d {
            for w in other.witnesses {
                self.offer(d, w);
            }
        }
    }
}

/// Exhaustive over all `C(q², size)` sets when that fits `budget`, otherwise
/// `samples` seeded random non-collinear sets.
pub fn extremal_search(
    spec: &FieldSpec,
    size: usize,
    budget: u128,
    samples: u64,
    seed: u64,
    jobs: usize,
) -> Result<ExtremalResult, HarnessError> {
    let q = spec.q() as usize;
    if size > q * q {
        return Err(HarnessError::Usage(format!(
            "size {size} exceeds q^2 = {}",
            q * q
        )));
    }
    let mut result = ExtremalResult {
        q: spec.q(),
        size,
        mode: "exempt",
        checked: 0,
        min_d: None,
        witnesses: Vec::new(),
    };
    if size < 3 {
        return Ok(result);
    }
    let seg = SizeSegments::new((q * q) as u64, size as u64, size as u64);
    let exhaustive = seg.total <= budget;
    let total = if exhaustive {
        seg.total as u64
    } else {
        samples
    };

    let parts = run_chunks(jobs, total, |range| {
        let mut best = Best::default();
        for i in range {
            let set = if exhaustive {
                PlanePointSet::new(
                    spec,
                    seg.get(i as u128).into_iter().map(|k| point_at(spec, k)),
                )
            } else {
                match sample_candidate(Kind::PlaneNonCollinear, spec, (size, size), seed, i) {
                    Some(Candidate::Plane(a)) => a,
                    _ => continue,
                }
            };
            let d = direction_mask(spec, &set.to_vec()).len();
            if d <= 1 {
                continue;
            }
            best.checked += 1;
            best.offer(d, pair_codes(set.iter()));
        }
        best
    })?;
    let mut best = Best::default();
    for p in parts {
        best.absorb(p);
    }
    result.mode = if exhaustive {
        "exhaustive"
    } else {
        "heuristic"
    };
    result.checked = best.checked;
    result.min_d = best.min_d;
    result.witnesses = best.witnesses;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plane::PlanePointSet;

    #[test]
    fn q4_size4_minimum_is_three() {
        let spec = FieldSpec::from_order(4).unwrap();
        let r = extremal_search(&spec, 4, 1 << 20, 0, 0, 1).unwrap();
        assert_eq!(r.mode, "exhaustive");
        assert_eq!(r.min_d, Some(3));
        assert_eq!(r.checked, 1820 - 20);
        let square = vec![[0, 0], [0, 1], [1, 0], [1, 1]];
        assert!(r.witnesses.contains(&square));
        for w in &r.witnesses {
            let codes: Vec<_> = w.iter().map(|&[a, b]| (a as u64, b as u64)).collect();
            let set = PlanePointSet::from_codes(&spec, &codes).unwrap();
            assert_eq!(set.directions().len(), 3);
        }
    }

    #[test]
    fn q5_size5_meets_the_prime_bound() {
        let spec = FieldSpec::from_order(5).unwrap();
        let r = extremal_search(&spec, 5, 1 << 20, 0, 0, 1).unwrap();
        assert!(r.min_d.unwrap() >= 4);
    }

    #[test]
    fn small_sizes_are_exempt_and_budget_falls_back() {
        let spec = FieldSpec::from_order(5).unwrap();
        assert_eq!(
            extremal_search(&spec, 2, 1 << 20, 0, 0, 1).unwrap().mode,
            "exempt"
        );
        let r = extremal_search(&spec, 5, 10, 500, 3, 1).unwrap();
        assert_eq!(r.mode, "heuristic");
        assert_eq!(r.checked, 500);
        assert!(r.min_d.unwrap() >= 4);
    }
}
