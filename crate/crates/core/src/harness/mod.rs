//! Verification campaigns: exhaustive or seeded random sweeps over candidate
//! sets, a checker per target, and deterministic aggregation.
//!
//! A campaign maps every candidate index to a candidate set through a pure
//! function, so the index space can be cut into fixed-size chunks and spread
//! over a thread pool. Chunk results are merged in index order, which makes
//! the report independent of the number of jobs.

mod check;
pub mod enumerate;
mod extremal;
mod persist;
mod sample;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Range;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Serialize, Serializer};
use serde_json::{json, Value};
use thiserror::Error;

use crate::affgroup::{AffElement, AffSet, AffineGroup};
use crate::bounds::{enumerate_lines, AffineLine};
use crate::ff::{FieldElement, FieldSpec};
use crate::plane::{direction_mask, PlanePointSet, Point};

pub use check::{default_check, Outcome};
pub use enumerate::{binomial, SizeSegments};
pub use extremal::{extremal_search, ExtremalResult};
pub use persist::{persist_counterexamples, PersistedRecord};
pub use sample::sample_candidate;

/// Default cap on the number of candidates an exhaustive run may visit.
pub const DEFAULT_BUDGET: u128 = 100_000_000;
/// Candidates per work item.
pub const CHUNK: u64 = 1024;
/// Violations kept verbatim in a report; the rest are only counted.
pub const MAX_RECORDED: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Usage(String),
    #[error("enumeration of {count} candidates exceeds the budget of {budget}")]
    BudgetExceeded { count: u128, budget: u128 },
    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Target {
    Szonyi,
    Maindir,
    Qbounds,
    Moreq,
    Classify,
    Vinh,
    Kneser,
    Ruzsa,
    Ghost,
    LemmaPhipi,
}

impl Target {
    pub const ALL: [Target; 10] = [
        Target::Szonyi,
        Target::Maindir,
        Target::Qbounds,
        Target::Moreq,
        Target::Classify,
        Target::Vinh,
        Target::Kneser,
        Target::Ruzsa,
        Target::Ghost,
        Target::LemmaPhipi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Target::Szonyi => "szonyi",
            Target::Maindir => "maindir",
            Target::Qbounds => "qbounds",
            Target::Moreq => "moreq",
            Target::Classify => "classify",
            Target::Vinh => "vinh",
            Target::Kneser => "kneser",
            Target::Ruzsa => "ruzsa",
            Target::Ghost => "ghost",
            Target::LemmaPhipi => "lemma_phipi",
        }
    }

    pub fn kind(self) -> Kind {
        match self {
            Target::Szonyi | Target::Maindir | Target::Qbounds | Target::Ghost => {
                Kind::PlaneNonCollinear
            }
            Target::Moreq => Kind::Plane,
            Target::Classify | Target::Ruzsa | Target::LemmaPhipi => Kind::Symmetric,
            Target::Vinh => Kind::Incidence,
            Target::Kneser => Kind::SumPair,
        }
    }

    /// Inclusive size range used when none is given.
    pub fn default_sizes(self, q: usize) -> (usize, usize) {
        match self.kind() {
            Kind::PlaneNonCollinear => (2, q),
            Kind::Plane => (q + 1, 2 * q),
            Kind::Symmetric => (2, q * (q - 1)),
            Kind::Incidence => (0, q * q),
            Kind::SumPair => (1, q),
        }
    }

    /// Admissible sizes for the target.
    fn size_limits(self, q: usize) -> (usize, usize) {
        match self.kind() {
            Kind::PlaneNonCollinear => (2, q),
            Kind::Plane => (q + 1, q * q),
            Kind::Symmetric => (1, q * (q - 1)),
            Kind::Incidence => (0, q * q),
            Kind::SumPair => (1, q),
        }
    }

    fn tracks_extremal(self) -> bool {
        matches!(self, Target::Szonyi | Target::Maindir | Target::Qbounds)
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Target::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Target::ALL.iter().map(|t| t.name()).collect();
                format!("unknown target {s:?}; expected one of {}", names.join(", "))
            })
    }
}

impl Serialize for Target {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// Shape of the candidates a target consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    PlaneNonCollinear,
    Plane,
    Symmetric,
    Incidence,
    SumPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exhaustive,
    Random { samples: u64, seed: u64 },
}

/// One input to a checker.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Candidate {
    Plane(PlanePointSet),
    Affine(AffSet),
    Incidence {
        spec: FieldSpec,
        points: Vec<Point>,
        lines: Vec<AffineLine>,
    },
    SumPair {
        spec: FieldSpec,
        a: BTreeSet<FieldElement>,
        b: BTreeSet<FieldElement>,
    },
}

fn pair_codes(pairs: impl Iterator<Item = (FieldElement, FieldElement)>) -> Vec<[u32; 2]> {
    pairs.map(|(a, b)| [a.code(), b.code()]).collect()
}

fn codes(s: &BTreeSet<FieldElement>) -> Vec<u32> {
    s.iter().map(|x| x.code()).collect()
}

impl Candidate {
    pub fn to_json(&self) -> Value {
        match self {
            Candidate::Plane(a) => json!({ "points": pair_codes(a.iter()) }),
            Candidate::Affine(a) => {
                json!({ "elements": pair_codes(a.iter().map(AffElement::as_point)) })
            }
            Candidate::Incidence { points, lines, .. } => json!({
                "points": pair_codes(points.iter().copied()),
                "lines": lines.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
            }),
            Candidate::SumPair { a, b, .. } => json!({ "a": codes(a), "b": codes(b) }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationRecord {
    pub index: u64,
    pub input: Value,
    pub expected: String,
    pub observed: String,
    #[serde(skip)]
    pub candidate: Candidate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtremalEntry {
    pub size: usize,
    pub min_d: usize,
    pub witness: Vec<[u32; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignReport {
    pub target: Target,
    pub q: u32,
    pub p: u32,
    pub e: u32,
    pub mode: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    pub sizes: [usize; 2],
    pub checked: u64,
    pub exempt: u64,
    pub violation_count: u64,
    pub violations: Vec<ViolationRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extremal: Option<Vec<ExtremalEntry>>,
    pub invocation: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
}

impl CampaignReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn verified(&self) -> bool {
        self.violation_count == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Campaign {
    pub target: Target,
    pub spec: FieldSpec,
    /// Inclusive.
    pub sizes: (usize, usize),
    pub mode: Mode,
    pub jobs: usize,
    pub budget: u128,
    /// Adds wall-clock seconds to the report, which makes it
    /// nondeterministic.
    pub timing: bool,
}

impl Campaign {
    pub fn new(target: Target, spec: &FieldSpec, mode: Mode) -> Self {
        Campaign {
            target,
            spec: spec.clone(),
            sizes: target.default_sizes(spec.q() as usize),
            mode,
            jobs: 1,
            budget: DEFAULT_BUDGET,
            timing: false,
        }
    }

    pub fn sizes(mut self, lo: usize, hi: usize) -> Self {
        self.sizes = (lo, hi);
        self
    }

    pub fn jobs(mut self, jobs: usize) -> Self {
        self.jobs = jobs;
        self
    }

    pub fn budget(mut self, budget: u128) -> Self {
        self.budget = budget;
        self
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let q = self.spec.q() as usize;
        let (lo, hi) = self.sizes;
        let (min, max) = self.target.size_limits(q);
        if lo > hi || lo < min || hi > max {
            return Err(HarnessError::Usage(format!(
                "sizes {lo}..{hi} are not within {min}..{max} for target {} at q = {q}",
                self.target
            )));
        }
        if self.target == Target::Szonyi && self.spec.e() != 1 {
            return Err(HarnessError::Usage(
                "target szonyi needs a prime field (e = 1)".into(),
            ));
        }
        if self.jobs == 0 {
            return Err(HarnessError::Usage("jobs must be at least 1".into()));
        }
        Ok(())
    }

    /// Command line reproducing this campaign; `--jobs` is left out since it
    /// does not affect the report.
    pub fn invocation(&self) -> String {
        let mut out = format!(
            "redei verify --target {} --q {}",
            self.target,
            self.spec.q()
        );
        match self.mode {
            Mode::Exhaustive => out.push_str(" --exhaustive"),
            Mode::Random { samples, seed } => {
                out.push_str(&format!(" --samples {samples} --seed {seed}"))
            }
        }
        out.push_str(&format!(" --sizes {}..{}", self.sizes.0, self.sizes.1));
        out
    }

    /// Number of indices the run will visit.
    pub fn candidate_count(&self) -> u128 {
        match self.mode {
            Mode::Random { samples, .. } => samples as u128,
            Mode::Exhaustive => Space::new(self).total,
        }
    }
}

/// Exhaustive index space of a campaign.
struct Space {
    spec: FieldSpec,
    kind: Kind,
    sizes: (usize, usize),
    total: u128,
    segments: Option<SizeSegments>,
    classes: Vec<Vec<AffElement>>,
    lines: Vec<AffineLine>,
    subsets: Vec<BTreeSet<FieldElement>>,
}

fn point_at(spec: &FieldSpec, i: u64) -> Point {
    let q = spec.q() as u64;
    (
        FieldElement::from_code_unchecked((i / q) as u32),
        FieldElement::from_code_unchecked((i % q) as u32),
    )
}

/// Inverse-pair classes `{g, g⁻¹}` in element order.
pub fn inverse_classes(spec: &FieldSpec) -> Vec<Vec<AffElement>> {
    let group = AffineGroup::new(spec);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for g in group.elements() {
        if seen.contains(&g) {
            continue;
        }
        let gi = group.inv(g);
        seen.insert(g);
        seen.insert(gi);
        out.push(if gi == g { vec![g] } else { vec![g, gi] });
    }
    out
}

impl Space {
    fn new(c: &Campaign) -> Self {
        let spec = c.spec.clone();
        let q = spec.q() as u64;
        let kind = c.target.kind();
        let (lo, hi) = (c.sizes.0 as u64, c.sizes.1 as u64);
        let mut space = Space {
            spec: spec.clone(),
            kind,
            sizes: c.sizes,
            total: 0,
            segments: None,
            classes: Vec::new(),
            lines: Vec::new(),
            subsets: Vec::new(),
        };
        match kind {
            Kind::PlaneNonCollinear | Kind::Plane => {
                let seg = SizeSegments::new(q * q, lo, hi);
                space.total = seg.total;
                space.segments = Some(seg);
            }
            Kind::Symmetric => {
                space.classes = inverse_classes(&spec);
                space.total = 1u128
                    .checked_shl(space.classes.len() as u32)
                    .unwrap_or(u128::MAX);
            }
            Kind::Incidence => {
                let seg = SizeSegments::new(q * q, lo, hi);
                space.lines = enumerate_lines(&spec);
                let masks = 1u128
                    .checked_shl(space.lines.len() as u32)
                    .unwrap_or(u128::MAX);
                space.total = seg.total.saturating_mul(masks);
                space.segments = Some(seg);
            }
            Kind::SumPair => {
                // only built when small enough to enumerate
                if q <= 20 {
                    for mask in 1u32..(1 << q) {
                        let n = mask.count_ones() as u64;
                        if (lo..=hi).contains(&n) {
                            space.subsets.push(
                                (0..q as u32)
                                    .filter(|i| mask >> i & 1 == 1)
                                    .map(FieldElement::from_code_unchecked)
                                    .collect(),
                            );
                        }
                    }
                    let n = space.subsets.len() as u128;
                    space.total = n * n;
                } else {
                    space.total = u128::MAX;
                }
            }
        }
        space
    }

    fn get(&self, index: u64) -> Option<Candidate> {
        let spec = &self.spec;
        match self.kind {
            Kind::PlaneNonCollinear | Kind::Plane => {
                let seg = self.segments.as_ref().expect("plane space");
                let pts = seg
                    .get(index as u128)
                    .into_iter()
                    .map(|i| point_at(spec, i));
                Some(Candidate::Plane(PlanePointSet::new(spec, pts)))
            }
            Kind::Symmetric => {
                let elems: Vec<AffElement> = self
                    .classes
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| index >> i & 1 == 1)
                    .flat_map(|(_, c)| c.iter().copied())
                    .collect();
                if !(self.sizes.0..=self.sizes.1).contains(&elems.len()) {
                    return None;
                }
                Some(Candidate::Affine(AffSet::new(spec, elems)))
            }
            Kind::Incidence => {
                let seg = self.segments.as_ref().expect("incidence space");
                let nl = self.lines.len() as u32;
                let (pi, lmask) = ((index >> nl) as u128, index & ((1u64 << nl) - 1));
                let points = seg.get(pi).into_iter().map(|i| point_at(spec, i)).collect();
                let lines = (0..nl)
                    .filter(|i| lmask >> i & 1 == 1)
                    .map(|i| self.lines[i as usize])
                    .collect();
                Some(Candidate::Incidence {
                    spec: spec.clone(),
                    points,
                    lines,
                })
            }
            Kind::SumPair => {
                let n = self.subsets.len() as u64;
                Some(Candidate::SumPair {
                    spec: spec.clone(),
                    a: self.subsets[(index / n) as usize].clone(),
                    b: self.subsets[(index % n) as usize].clone(),
                })
            }
        }
    }
}

/// Checker signature; [`default_check`] is the real one.
pub type Checker = dyn Fn(Target, &Candidate) -> Outcome + Sync;

#[derive(Default)]
struct Partial {
    checked: u64,
    exempt: u64,
    violation_count: u64,
    violations: Vec<ViolationRecord>,
    /// size → (min |D|, witness)
    extremal: BTreeMap<usize, (usize, Vec<[u32; 2]>)>,
}

impl Partial {
    fn absorb(&mut self, other: Partial) {
        self.checked += other.checked;
        self.exempt += other.exempt;
        self.violation_count += other.violation_count;
        let room = MAX_RECORDED.saturating_sub(self.violations.len());
        self.violations
            .extend(other.violations.into_iter().take(room));
        for (size, (d, w)) in other.extremal {
            match self.extremal.get(&size) {
                Some(&(best, _)) if best <= d => {}
                _ => {
                    self.extremal.insert(size, (d, w));
                }
            }
        }
    }
}

/// Runs `work` over `0..total` in chunks of [`CHUNK`] on `jobs` threads and
/// returns the chunk results in index order.
pub(crate) fn run_chunks<T, F>(jobs: usize, total: u64, work: F) -> Result<Vec<T>, HarnessError>
where
    T: Send,
    F: Fn(Range<u64>) -> T + Sync,
{
    let chunks: Vec<Range<u64>> = (0..total.div_ceil(CHUNK))
        .map(|i| i * CHUNK..((i + 1) * CHUNK).min(total))
        .collect();
    if jobs <= 1 {
        return Ok(chunks.into_iter().map(work).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| HarnessError::Usage(e.to_string()))?;
    Ok(pool.install(|| chunks.into_par_iter().map(&work).collect()))
}

pub fn run_campaign(c: &Campaign) -> Result<CampaignReport, HarnessError> {
    run_campaign_with(c, &default_check)
}

/// Runs a campaign with an arbitrary checker.
pub fn run_campaign_with(c: &Campaign, checker: &Checker) -> Result<CampaignReport, HarnessError> {
    c.validate()?;
    let start = Instant::now();
    let space = match c.mode {
        Mode::Exhaustive => {
            let space = Space::new(c);
            if space.total > c.budget {
                return Err(HarnessError::BudgetExceeded {
                    count: space.total,
                    budget: c.budget,
                });
            }
            Some(space)
        }
        Mode::Random { .. } => None,
    };
    let total = c.candidate_count() as u64;
    let kind = c.target.kind();

    let chunk_results = run_chunks(c.jobs, total, |range| {
        let mut part = Partial::default();
        for index in range {
            let cand = match (&space, c.mode) {
                (Some(space), _) => space.get(index),
                (None, Mode::Random { seed, .. }) => {
                    sample_candidate(kind, &c.spec, c.sizes, seed, index)
                }
                (None, Mode::Exhaustive) => unreachable!("exhaustive runs carry a space"),
            };
            let Some(cand) = cand else { continue };
            if c.target.tracks_extremal() {
                track_extremal(&mut part, &cand);
            }
            match checker(c.target, &cand) {
                Outcome::Pass => part.checked += 1,
                Outcome::Exempt => part.exempt += 1,
                Outcome::Violation { expected, observed } => {
                    part.checked += 1;
                    part.violation_count += 1;
                    if part.violations.len() < MAX_RECORDED {
                        part.violations.push(ViolationRecord {
                            index,
                            input: cand.to_json(),
                            expected,
                            observed,
                            candidate: cand,
                        });
                    }
                }
            }
        }
        part
    })?;

    let mut merged = Partial::default();
    for part in chunk_results {
        merged.absorb(part);
    }

    let (seed, samples) = match c.mode {
        Mode::Random { samples, seed } => (Some(seed), Some(samples)),
        Mode::Exhaustive => (None, None),
    };
    Ok(CampaignReport {
        target: c.target,
        q: c.spec.q(),
        p: c.spec.p(),
        e: c.spec.e(),
        mode: match c.mode {
            Mode::Exhaustive => "exhaustive",
            Mode::Random { .. } => "random",
        },
        seed,
        samples,
        sizes: [c.sizes.0, c.sizes.1],
        checked: merged.checked,
        exempt: merged.exempt,
        violation_count: merged.violation_count,
        violations: merged.violations,
        extremal: c.target.tracks_extremal().then(|| {
            merged
                .extremal
                .into_iter()
                .map(|(size, (min_d, witness))| ExtremalEntry {
                    size,
                    min_d,
                    witness,
                })
                .collect()
        }),
        invocation: c.invocation(),
        seconds: c.timing.then(|| start.elapsed().as_secs_f64()),
    })
}

fn track_extremal(part: &mut Partial, cand: &Candidate) {
    let Candidate::Plane(a) = cand else { return };
    let d = direction_mask(a.spec(), &a.to_vec()).len();
    if d <= 1 {
        return;
    }
    let size = a.len();
    if part.extremal.get(&size).is_none_or(|&(best, _)| d < best) {
        part.extremal.insert(size, (d, pair_codes(a.iter())));
    }
}

/// Parses `"a..b"`, `"a..=b"` or a single `"a"` as an inclusive range.
pub fn parse_sizes(s: &str) -> Result<(usize, usize), String> {
    let bad = || format!("malformed size range {s:?}; expected a..b");
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    match s.split_once("..") {
        Some((a, b)) => Ok((num(a)?, num(b.strip_prefix('=').unwrap_or(b))?)),
        None => {
            let v = num(s)?;
            Ok((v, v))
        }
    }
}
