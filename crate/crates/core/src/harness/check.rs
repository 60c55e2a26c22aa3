//! Per-target checkers.

use super::{Candidate, Target};
use crate::affgroup::{classify, pi_bound_check, product_power, AffError};
use crate::bounds::{kneser_check, ruzsa_check, vinh_check};
use crate::plane::{
    direction_bounds, direction_mask, ghost_slopes, maindir_check, spans_all_check, PlaneError,
    PlanePointSet, UpperBound,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    /// Outside the hypotheses of the statement.
    Exempt,
    Violation {
        expected: String,
        observed: String,
    },
}

fn verdict(
    holds: bool,
    expected: impl FnOnce() -> String,
    observed: impl FnOnce() -> String,
) -> Outcome {
    if holds {
        Outcome::Pass
    } else {
        Outcome::Violation {
            expected: expected(),
            observed: observed(),
        }
    }
}

fn failure(expected: &str, err: impl std::fmt::Display) -> Outcome {
    Outcome::Violation {
        expected: expected.to_string(),
        observed: format!("error: {err}"),
    }
}

fn plane(c: &Candidate) -> &PlanePointSet {
    match c {
        Candidate::Plane(a) => a,
        other => panic!("plane target given {other:?}"),
    }
}

fn direction_count(a: &PlanePointSet) -> usize {
    direction_mask(a.spec(), &a.to_vec()).len()
}

pub fn default_check(target: Target, c: &Candidate) -> Outcome {
    match target {
        Target::Szonyi => {
            let a = plane(c);
            let (s, d) = (a.len(), direction_count(a));
            if s < 2 || d <= 1 {
                return Outcome::Exempt;
            }
            verdict(
                2 * d >= s + 3,
                || format!("|D| >= {}", (s + 4) / 2),
                || format!("|D| = {d}"),
            )
        }
        Target::Maindir => match maindir_check(plane(c)) {
            Ok(m) if m.exempt => Outcome::Exempt,
            Ok(m) => verdict(
                m.holds,
                || format!("|D| > {}/{}", m.threshold.numer(), m.threshold.denom()),
                || format!("|D| = {}", m.directions),
            ),
            Err(e) => failure("|D| above the threshold", e),
        },
        Target::Qbounds => match direction_bounds(plane(c)) {
            Err(PlaneError::DegenerateDirectionCount { .. }) => Outcome::Exempt,
            Err(e) => failure("lower <= |D| <= upper", e),
            Ok(b) => verdict(
                b.sandwich_holds(),
                || match b.upper {
                    UpperBound::Trivial => format!("{} <= |D|", b.lower),
                    UpperBound::Finite(u) => format!("{} <= |D| <= {u}", b.lower),
                },
                || format!("|D| = {} (l1 = {}, l2 = {})", b.directions, b.l1, b.l2),
            ),
        },
        Target::Moreq => {
            let a = plane(c);
            match spans_all_check(a) {
                Ok(all) => verdict(
                    all,
                    || format!("|D| = {}", a.q() + 1),
                    || format!("|D| = {}", direction_count(a)),
                ),
                Err(e) => failure("all directions spanned", e),
            }
        }
        Target::Ghost => {
            let a = plane(c);
            let q = a.q() as usize;
            if direction_count(a) == q + 1 {
                return Outcome::Exempt;
            }
            let n = q - a.len();
            for pt in a.iter() {
                match ghost_slopes(a, pt) {
                    Ok(g) if g.len() > n => {
                        return Outcome::Violation {
                            expected: format!("at most {n} ghost slopes"),
                            observed: format!("{} ghost slopes at ({}, {})", g.len(), pt.0, pt.1),
                        }
                    }
                    Ok(_) => {}
                    Err(e) => return failure("ghost slopes computable", e),
                }
            }
            Outcome::Pass
        }
        Target::Classify => {
            let Candidate::Affine(a) = c else {
                panic!("affine target given {c:?}")
            };
            match classify(a) {
                Err(AffError::TooSmall(_)) => Outcome::Exempt,
                Err(e) => failure("classification", e),
                Ok(r) => verdict(
                    r.disjunction_holds,
                    || "at least one of cases a, b, c".to_string(),
                    || {
                        format!(
                            "C = {}/{}, regime {:?}, pi = {}, case b {:?}, case c {:?}",
                            r.tripling.numer(),
                            r.tripling.denom(),
                            r.regime,
                            r.pi,
                            r.case_b,
                            r.case_c
                        )
                    },
                ),
            }
        }
        Target::Ruzsa => {
            let Candidate::Affine(a) = c else {
                panic!("affine target given {c:?}")
            };
            for k in 4..=6 {
                match ruzsa_check(a, k) {
                    Ok(r) if !r.holds => {
                        return Outcome::Violation {
                            expected: format!("|A^{k}| <= {}", r.bound),
                            observed: format!("|A^{k}| = {}", r.power_size),
                        }
                    }
                    Ok(_) => {}
                    Err(e) => return failure("Ruzsa inequality", e),
                }
            }
            Outcome::Pass
        }
        Target::LemmaPhipi => {
            let Candidate::Affine(a) = c else {
                panic!("affine target given {c:?}")
            };
            let mut any = false;
            for k in 1..=2 {
                let power = match product_power(a, k) {
                    Ok(p) => p,
                    Err(e) => return failure("product set", e),
                };
                for g in power.iter().filter(|g| !g.is_identity()) {
                    any = true;
                    match pi_bound_check(a, g, k) {
                        Ok(b) if !b.holds => {
                            return Outcome::Violation {
                                expected: format!(
                                    "|pi(A)| <= |A^{}|/|phi_g(A)| for g = {g}",
                                    k + 3
                                ),
                                observed: format!("{} > {}/{}", b.pi, b.power_size, b.image_size),
                            }
                        }
                        Ok(_) => {}
                        Err(e) => return failure("pi bound", e),
                    }
                }
            }
            if any {
                Outcome::Pass
            } else {
                Outcome::Exempt
            }
        }
        Target::Vinh => {
            let Candidate::Incidence {
                spec,
                points,
                lines,
            } = c
            else {
                panic!("incidence target given {c:?}")
            };
            let (holds, r) = vinh_check(spec, points, lines);
            verdict(
                holds,
                || format!("(qI - |P||L|)^2 <= {}", r.allowance),
                || format!("I = {}, (qI - |P||L|)^2 = {}", r.count, r.deviation_sq),
            )
        }
        Target::Kneser => {
            let Candidate::SumPair { spec, a, b } = c else {
                panic!("sumset target given {c:?}")
            };
            match kneser_check(spec, a, b) {
                Ok(r) => verdict(
                    r.holds,
                    || {
                        format!(
                            "|A+B| >= min({}, {})",
                            spec.q(),
                            a.len() as i64 + b.len() as i64 - r.h_size as i64
                        )
                    },
                    || format!("|A+B| = {}, |H| = {}", r.sumset_size, r.h_size),
                ),
                Err(e) => failure("Kneser inequality", e),
            }
        }
    }
}
