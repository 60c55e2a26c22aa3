//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use redei::affgroup::{
    classify, fiber_statement_counterexample, pi_bound_check, AffineGroup, CaseA,
};
use redei::bounds::{enumerate_lines, vinh_check};
use redei::ff::{FieldElement, FieldSpec};
use redei::harness::{
    extremal_search, run_campaign, sample_candidate, Campaign, CampaignReport, Candidate, Kind,
    Mode, Target,
};
use redei::plane::{
    direction_bounds, direction_mask, ghost_slopes, redei_identity_failures, PlanePointSet,
    UpperBound,
};

const SEED: u64 = 20240601;

const LIMIT_SZONYI: Duration = Duration::from_secs(60);
const LIMIT_MAINDIR_Q4: Duration = Duration::from_secs(10);
const LIMIT_RANDOM_MAINDIR: Duration = Duration::from_secs(300);

const RANDOM_DIRECTION_SAMPLES: u64 = 100_000;
const REDEI_SETS_PER_FIELD: u64 = 1_000;
const GHOST_PAIRS_PER_FIELD: usize = 1_000;
const CLASSIFY_SAMPLES: u64 = 10_000;
const VINH_SAMPLES: u64 = 100_000;
const RUZSA_SAMPLES: u64 = 1_000;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn field(q: u64) -> FieldSpec {
    FieldSpec::from_order(q).expect("prime power")
}

fn square(spec: &FieldSpec) -> PlanePointSet {
    PlanePointSet::from_codes(spec, &[(0, 0), (0, 1), (1, 0), (1, 1)]).unwrap()
}

fn run(c: &Campaign) -> Result<CampaignReport, String> {
    run_campaign(c).map_err(|e| e.to_string())
}

fn clean(r: &CampaignReport) -> Result<(), String> {
    if r.violation_count == 0 {
        Ok(())
    } else {
        Err(format!(
            "{} violations in {} q={}, first: {:?}",
            r.violation_count,
            r.target,
            r.q,
            r.violations.first().map(|v| (&v.expected, &v.observed))
        ))
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    if elapsed <= limit {
        Ok(())
    } else {
        Err(format!("took {elapsed:.2?}, limit {limit:?}"))
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion_1() -> Verdict {
    let c = Campaign::new(Target::Szonyi, &field(5), Mode::Exhaustive).sizes(2, 5);
    let t = Instant::now();
    let r = run(&c)?;
    let elapsed = t.elapsed();
    clean(&r)?;
    within(elapsed, LIMIT_SZONYI)?;
    ensure(r.checked + r.exempt == 68_380, || {
        format!("visited {}", r.checked + r.exempt)
    })?;
    Ok(format!(
        "{} non-collinear sets, {} collinear exempt, 0 violations, {elapsed:.2?}",
        r.checked, r.exempt
    ))
}

fn criterion_2() -> Verdict {
    let spec = field(4);
    let c = Campaign::new(Target::Maindir, &spec, Mode::Exhaustive).sizes(2, 4);
    let t = Instant::now();
    let r = run(&c)?;
    let ext = extremal_search(&spec, 4, 1 << 20, 0, 0, 1).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    clean(&r)?;
    within(elapsed, LIMIT_MAINDIR_Q4)?;
    let min4 = r
        .extremal
        .as_ref()
        .and_then(|e| e.iter().find(|x| x.size == 4))
        .map(|x| x.min_d);
    ensure(min4 == Some(3), || {
        format!("campaign minimum at size 4 is {min4:?}")
    })?;
    ensure(ext.mode == "exhaustive" && ext.min_d == Some(3), || {
        format!("search gave {:?}", ext.min_d)
    })?;
    let sq = vec![[0, 0], [0, 1], [1, 0], [1, 1]];
    ensure(ext.witnesses.contains(&sq), || {
        "F_2 x F_2 not among the witnesses".into()
    })?;
    Ok(format!(
        "{} sets, min |D| at size 4 = 3 attained by F_2 x F_2, {elapsed:.2?}",
        r.checked
    ))
}

fn random_direction_campaign(target: Target, q: u64) -> Campaign {
    let spec = field(q);
    Campaign::new(
        target,
        &spec,
        Mode::Random {
            samples: RANDOM_DIRECTION_SAMPLES,
            seed: SEED,
        },
    )
    .sizes(2, q as usize)
}

fn criterion_3() -> Verdict {
    let mut notes = Vec::new();
    for q in [9, 8] {
        let t = Instant::now();
        let r = run(&random_direction_campaign(Target::Maindir, q))?;
        let elapsed = t.elapsed();
        clean(&r)?;
        within(elapsed, LIMIT_RANDOM_MAINDIR)?;
        ensure(r.checked == RANDOM_DIRECTION_SAMPLES, || {
            format!("checked {}", r.checked)
        })?;
        notes.push(format!("q={q}: {} sets in {elapsed:.2?}", r.checked));
    }
    Ok(notes.join("; "))
}

fn criterion_4() -> Verdict {
    ensure(Target::Maindir.kind() == Target::Qbounds.kind(), || {
        "samplers differ".into()
    })?;
    let mut notes = Vec::new();
    for q in [9, 8] {
        let r = run(&random_direction_campaign(Target::Qbounds, q))?;
        clean(&r)?;
        ensure(r.checked + r.exempt == RANDOM_DIRECTION_SAMPLES, || {
            "sample count".into()
        })?;
        notes.push(format!(
            "q={q}: {} checked, {} with |D| = q+1",
            r.checked, r.exempt
        ));
    }
    let r = run(&Campaign::new(Target::Qbounds, &field(4), Mode::Exhaustive).sizes(2, 4))?;
    clean(&r)?;
    notes.push(format!("q=4 exhaustive: {} checked", r.checked));
    let b = direction_bounds(&square(&field(4))).map_err(|e| e.to_string())?;
    ensure(
        b.lower == 3 && b.upper == UpperBound::Finite(3) && b.directions == 3,
        || {
            format!(
                "F_2 x F_2 gave {} <= {} <= {:?}",
                b.lower, b.directions, b.upper
            )
        },
    )?;
    notes.push("F_2 x F_2: lower = upper = |D| = 3".into());
    Ok(notes.join("; "))
}

fn criterion_5() -> Verdict {
    let mut total = 0;
    for q in [4u64, 5, 8, 9] {
        let spec = field(q);
        for trial in 0..REDEI_SETS_PER_FIELD {
            let Some(Candidate::Plane(a)) =
                sample_candidate(Kind::Plane, &spec, (2, q as usize), SEED, trial)
            else {
                return Err("sampler failed".into());
            };
            let fails = redei_identity_failures(&a).map_err(|e| e.to_string())?;
            ensure(fails.is_empty(), || {
                format!("q={q} trial {trial}: {fails:?}")
            })?;
            total += 1;
        }
    }
    Ok(format!("{total} sets, all q slopes each, 0 failures"))
}

fn criterion_6() -> Verdict {
    let mut notes = Vec::new();
    for q in [4u64, 5, 7, 8, 9] {
        let spec = field(q);
        let mut pairs = 0;
        let mut trial = 0;
        while pairs < GHOST_PAIRS_PER_FIELD {
            let Some(Candidate::Plane(a)) =
                sample_candidate(Kind::PlaneNonCollinear, &spec, (2, q as usize), SEED, trial)
            else {
                return Err("sampler failed".into());
            };
            trial += 1;
            if direction_mask(&spec, &a.to_vec()).len() == q as usize + 1 {
                continue;
            }
            let n = q as usize - a.len();
            for pt in a.iter() {
                let g = ghost_slopes(&a, pt).map_err(|e| e.to_string())?;
                ensure(g.len() <= n, || {
                    format!("q={q}: {} ghost slopes > n = {n}", g.len())
                })?;
                pairs += 1;
            }
        }
        notes.push(format!("q={q}: {pairs}"));
    }
    Ok(format!("(set, point) pairs checked: {}", notes.join(", ")))
}

fn criterion_7() -> Verdict {
    let r = run(&Campaign::new(Target::Moreq, &field(4), Mode::Exhaustive).sizes(5, 5))?;
    clean(&r)?;
    ensure(r.checked == 4368, || format!("checked {}", r.checked))?;
    Ok("all 4368 sets of size 5 in F_4^2 span 5 directions".into())
}

fn criterion_8() -> Verdict {
    let mut notes = Vec::new();
    for q in [4u64, 5, 7, 8, 9] {
        let c = Campaign::new(
            Target::Classify,
            &field(q),
            Mode::Random {
                samples: CLASSIFY_SAMPLES,
                seed: SEED,
            },
        );
        let r = run(&c)?;
        clean(&r)?;
        ensure(r.checked == CLASSIFY_SAMPLES, || {
            format!("q={q}: checked {}", r.checked)
        })?;
        notes.push(format!("q={q}"));
    }

    let f9 = field(9);
    let r = classify(&AffineGroup::new(&f9).stabilizer(FieldElement::ZERO))
        .map_err(|e| e.to_string())?;
    ensure(
        r.case_a
            == Some(CaseA {
                x: FieldElement::ZERO,
            }),
        || "Stab(0) not case a".into(),
    )?;

    let f4 = field(4);
    let r = classify(&AffineGroup::new(&f4).unipotent()).map_err(|e| e.to_string())?;
    let b = r.case_b.ok_or("U in F_4 has no case b")?;
    ensure(b.pi == 1 && b.bound == "4" && b.holds, || {
        format!("U in F_4: {b:?}")
    })?;

    let f7 = field(7);
    let r = classify(&AffineGroup::new(&f7).whole()).map_err(|e| e.to_string())?;
    let c = r.case_c.ok_or("Aff(F_7) has no case c")?;
    ensure(
        c.pi == 6 && c.bound == "12" && c.holds && c.u_covered,
        || format!("Aff(F_7): {c:?}"),
    )?;
    Ok(format!(
        "{CLASSIFY_SAMPLES} symmetric sets each at {}; fixtures a, b (1 < 4), c (6 < 12, U in A^8) reproduced",
        notes.join(", ")
    ))
}

fn criterion_9() -> Verdict {
    for q in [4, 5] {
        if let Some((g, h, h2)) = fiber_statement_counterexample(&field(q)) {
            return Err(format!("q={q}: g={g}, h={h}, h'={h2}"));
        }
    }
    let f4 = field(4);
    let g4 = AffineGroup::new(&f4);
    let f5 = field(5);
    let g5 = AffineGroup::new(&f5);
    let cases = [
        (g4.unipotent(), g4.element(1, 2).unwrap(), (1, 4, 1)),
        (g5.whole(), g5.element(2, 0).unwrap(), (4, 20, 5)),
        (
            g5.stabilizer(FieldElement::ZERO),
            g5.element(2, 0).unwrap(),
            (4, 4, 1),
        ),
    ];
    for (a, g, want) in cases {
        let b = pi_bound_check(&a, g, 1).map_err(|e| e.to_string())?;
        ensure(
            (b.pi, b.power_size, b.image_size) == want && b.holds,
            || format!("{b:?}"),
        )?;
    }
    Ok("fibres exact at q = 4, 5; 1 <= 4/1, 4 <= 20/5 (tight), 4 <= 4/1".into())
}

fn criterion_10() -> Verdict {
    let f7 = field(7);
    let all = PlanePointSet::full(&f7).to_vec();
    let (holds, r) = vinh_check(&f7, &all, &enumerate_lines(&f7));
    ensure(holds && r.deviation_sq == 0.into(), || {
        format!("full plane deviation {}", r.deviation_sq)
    })?;
    let c = Campaign::new(
        Target::Vinh,
        &f7,
        Mode::Random {
            samples: VINH_SAMPLES,
            seed: SEED,
        },
    );
    let r = run(&c)?;
    clean(&r)?;
    Ok(format!(
        "full plane deviation 0; {} random (P, L) pairs clean",
        r.checked
    ))
}

fn criterion_11() -> Verdict {
    let r = run(&Campaign::new(Target::Kneser, &field(4), Mode::Exhaustive).sizes(1, 4))?;
    clean(&r)?;
    ensure(r.checked == 225, || format!("checked {}", r.checked))?;
    let c = Campaign::new(
        Target::Ruzsa,
        &field(5),
        Mode::Random {
            samples: RUZSA_SAMPLES,
            seed: SEED,
        },
    );
    let rz = run(&c)?;
    clean(&rz)?;
    ensure(rz.checked == RUZSA_SAMPLES, || {
        format!("ruzsa checked {}", rz.checked)
    })?;
    Ok(format!(
        "Kneser on 225 pairs; Ruzsa k = 4, 5, 6 on {} symmetric sets",
        rz.checked
    ))
}

fn criterion_12() -> Verdict {
    let campaigns = [
        Campaign::new(
            Target::Maindir,
            &field(8),
            Mode::Random {
                samples: 20_000,
                seed: SEED,
            },
        ),
        Campaign::new(
            Target::Classify,
            &field(7),
            Mode::Random {
                samples: 2_000,
                seed: SEED,
            },
        ),
        Campaign::new(Target::Szonyi, &field(5), Mode::Exhaustive),
    ];
    for c in &campaigns {
        let first = run(c)?.to_json();
        let again = run(c)?.to_json();
        let parallel = run(&c.clone().jobs(4))?.to_json();
        ensure(first == again, || format!("{} rerun differs", c.target))?;
        ensure(first == parallel, || format!("{} jobs 4 differs", c.target))?;
    }
    let bin = env!("CARGO_BIN_EXE_redei");
    let cli = |jobs: &str| -> Result<Vec<u8>, String> {
        let out = Command::new(bin)
            .args([
                "verify",
                "--target",
                "qbounds",
                "--q",
                "9",
                "--samples",
                "5000",
                "--seed",
                "7",
                "--json",
                "--jobs",
                jobs,
            ])
            .output()
            .map_err(|e| e.to_string())?;
        ensure(out.status.success(), || {
            format!("exit {:?}", out.status.code())
        })?;
        Ok(out.stdout)
    };
    let serial = cli("1")?;
    ensure(serial == cli("1")?, || "CLI rerun differs".into())?;
    ensure(serial == cli("4")?, || "CLI --jobs 4 differs".into())?;
    Ok("reruns and --jobs 4 byte-identical (library and CLI)".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("direction lower bound over F_5, exhaustive", criterion_1),
        ("threshold at q = 4, exhaustive, min |D| = 3", criterion_2),
        ("threshold at q = 9 and q = 8, random", criterion_3),
        ("sandwich bounds on the same sets", criterion_4),
        ("Redei identities", criterion_5),
        ("ghost bound", criterion_6),
        ("sets larger than q span everything", criterion_7),
        ("affine classification", criterion_8),
        ("conjugation fibres and pi bound", criterion_9),
        ("incidence bound", criterion_10),
        ("Kneser and Ruzsa", criterion_11),
        ("determinism", criterion_12),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        match f() {
            Ok(detail) => println!(
                "criterion {:>2} PASS  {name}: {detail} [{:.2?}]",
                i + 1,
                t.elapsed()
            ),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
