//! Writing violation records to disk.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{CampaignReport, Candidate, HarnessError, Target, ViolationRecord};
use crate::io::{write_aff_set, write_point_set};

/// Contents of a persisted record file.
#[derive(Debug, Clone, Serialize)]
pub struct PersistedRecord<'a> {
    pub target: Target,
    pub field: String,
    pub record: &'a ViolationRecord,
    /// Sibling set file, when the input is a point or affine set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set_file: Option<String>,
    pub replay: Vec<String>,
}

fn io_err(path: &Path, e: std::io::Error) -> HarnessError {
    HarnessError::Io(format!("{}: {e}", path.display()))
}

/// Writes one JSON file per recorded violation (plus a `.set` file for set
/// inputs) into `dir` and returns the JSON paths.
pub fn persist_counterexamples(
    report: &CampaignReport,
    dir: &Path,
) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut out = Vec::new();
    for rec in &report.violations {
        let stem = format!("{}-q{}-{}", report.target, report.q, rec.index);
        let (set_text, replay_cmd) = match &rec.candidate {
            Candidate::Plane(a) => (
                Some(write_point_set(a)),
                if report.target == Target::Qbounds {
                    "bounds"
                } else {
                    "directions"
                },
            ),
            Candidate::Affine(a) => (Some(write_aff_set(a)), "classify"),
            _ => (None, ""),
        };
        let mut replay = vec![report.invocation.clone()];
        let set_file = match set_text {
            Some(text) => {
                let name = format!("{stem}.set");
                let path = dir.join(&name);
                fs::write(&path, text).map_err(|e| io_err(&path, e))?;
                replay.push(format!("redei {replay_cmd} {}", path.display()));
                Some(name)
            }
            None => None,
        };
        let field = {
            let s = rec.candidate_spec();
            format!("{} {}", s.q(), s.descriptor())
        };
        let body = PersistedRecord {
            target: report.target,
            field,
            record: rec,
            set_file,
            replay,
        };
        let path = dir.join(format!("{stem}.json"));
        let json = serde_json::to_string_pretty(&body).expect("record serializes");
        fs::write(&path, json).map_err(|e| io_err(&path, e))?;
        out.push(path);
    }
    Ok(out)
}

impl ViolationRecord {
    fn candidate_spec(&self) -> &crate::ff::FieldSpec {
        match &self.candidate {
            Candidate::Plane(a) => a.spec(),
            Candidate::Affine(a) => a.spec(),
            Candidate::Incidence { spec, .. } | Candidate::SumPair { spec, .. } => spec,
        }
    }
}
