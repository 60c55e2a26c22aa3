//! Seeded candidate generation. The candidate for a trial depends only on
//! the seed, the trial index, the field, the size range and the kind, so two
//! targets of the same kind see identical sets.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{point_at, Candidate, Kind};
use crate::affgroup::{AffSet, AffineGroup};
use crate::bounds::enumerate_lines;
use crate::ff::{FieldElement, FieldSpec};
use crate::plane::{direction_mask, PlanePointSet};

/// Redraws allowed before a rejection sampler gives up on a trial.
const MAX_ATTEMPTS: usize = 10_000;

fn rng_for(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn subset(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut v = sample(rng, n, k).into_vec();
    v.sort_unstable();
    v
}

fn plane_set(rng: &mut ChaCha8Rng, spec: &FieldSpec, (lo, hi): (usize, usize)) -> PlanePointSet {
    let q = spec.q() as usize;
    let size = rng.gen_range(lo..=hi);
    let pts = subset(rng, q * q, size)
        .into_iter()
        .map(|i| point_at(spec, i as u64));
    PlanePointSet::new(spec, pts)
}

/// The candidate of trial `trial`, or `None` when rejection sampling fails.
///
/// * plane sets: a size uniform in the range, then a uniform subset of that
///   size; the non-collinear kind redraws size and set together until the
///   set is not contained in a line;
/// * symmetric sets: `m` uniform generators (with repetition) closed under
///   inversion, plus the identity with probability ½, redrawn until the size
///   lands in the range;
/// * incidence pairs: `|P|` uniform in the range, `|L|` uniform in
///   `0..=q² + q`, then uniform subsets;
/// * sum pairs: both sizes uniform in the range, then uniform subsets.
pub fn sample_candidate(
    kind: Kind,
    spec: &FieldSpec,
    sizes: (usize, usize),
    seed: u64,
    trial: u64,
) -> Option<Candidate> {
    let mut rng = rng_for(seed, trial);
    let q = spec.q() as usize;
    match kind {
        Kind::Plane => Some(Candidate::Plane(plane_set(&mut rng, spec, sizes))),
        Kind::PlaneNonCollinear => (0..MAX_ATTEMPTS).find_map(|_| {
            let a = plane_set(&mut rng, spec, sizes);
            (direction_mask(spec, &a.to_vec()).len() > 1).then_some(Candidate::Plane(a))
        }),
        Kind::Symmetric => {
            let group = AffineGroup::new(spec);
            let all: Vec<_> = group.elements().collect();
            let (lo, hi) = sizes;
            (0..MAX_ATTEMPTS).find_map(|_| {
                let m = rng.gen_range(1..=hi.clamp(1, all.len()));
                let mut elems = BTreeSet::new();
                for _ in 0..m {
                    let g = all[rng.gen_range(0..all.len())];
                    elems.insert(g);
                    elems.insert(group.inv(g));
                }
                if rng.gen_bool(0.5) {
                    elems.insert(crate::affgroup::AffElement::identity());
                }
                (lo..=hi)
                    .contains(&elems.len())
                    .then(|| Candidate::Affine(AffSet::new(spec, elems)))
            })
        }
        Kind::Incidence => {
            let lines = enumerate_lines(spec);
            let np = rng.gen_range(sizes.0..=sizes.1);
            let nl = rng.gen_range(0..=lines.len());
            let points = subset(&mut rng, q * q, np)
                .into_iter()
                .map(|i| point_at(spec, i as u64))
                .collect();
            let lines = subset(&mut rng, lines.len(), nl)
                .into_iter()
                .map(|i| lines[i])
                .collect();
            Some(Candidate::Incidence {
                spec: spec.clone(),
                points,
                lines,
            })
        }
        Kind::SumPair => {
            let mut draw = || -> BTreeSet<FieldElement> {
                let k = rng.gen_range(sizes.0..=sizes.1);
                subset(&mut rng, q, k)
                    .into_iter()
                    .map(|i| FieldElement::from_code_unchecked(i as u32))
                    .collect()
            };
            let a = draw();
            let b = draw();
            Some(Candidate::SumPair {
                spec: spec.clone(),
                a,
                b,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_are_reproducible_and_well_formed() {
        let spec = FieldSpec::from_order(9).unwrap();
        for trial in 0..200 {
            let a = sample_candidate(Kind::PlaneNonCollinear, &spec, (2, 9), 5, trial).unwrap();
            assert_eq!(
                a,
                sample_candidate(Kind::PlaneNonCollinear, &spec, (2, 9), 5, trial).unwrap()
            );
            let Candidate::Plane(set) = a else { panic!() };
            assert!((3..=9).contains(&set.len()));
            assert!(set.directions().len() > 1);

            let Some(Candidate::Affine(s)) =
                sample_candidate(Kind::Symmetric, &spec, (2, 72), 5, trial)
            else {
                panic!()
            };
            assert!(s.is_symmetric());
            assert!((2..=72).contains(&s.len()));
        }
    }

    #[test]
    fn trials_differ() {
        let spec = FieldSpec::from_order(7).unwrap();
        let distinct: BTreeSet<_> = (0..50)
            .map(|t| format!("{:?}", sample_candidate(Kind::Plane, &spec, (8, 14), 0, t)))
            .collect();
        assert!(distinct.len() > 40);
    }
}
