//! `fraclap verify`: runs checks, writes one report per check and a summary.

use std::fmt::Write as _;
use std::path::Path;

use fraclap::verify::{check_ids, run_check, reports_to_csv, Report, VerifyConfig, CHECKS};

use crate::config::Format;
use crate::output::write_atomic;
use crate::CliError;

/// Help text listing every check id.
pub fn check_list() -> String {
    let width = check_ids().map(str::len).max().unwrap_or(0);
    let mut out = String::from("Check ids:\n");
    for c in CHECKS {
        let _ = writeln!(out, "  {:width$}  {}", c.id, c.summary);
    }
    let _ = writeln!(out, "  {:width$}  every check above, in this order", "all");
    out
}

/// Expands `all` and rejects unknown ids before anything runs.
pub fn select(id: &str) -> Result<Vec<&'static str>, CliError> {
    if id == "all" {
        return Ok(check_ids().collect());
    }
    check_ids()
        .find(|known| *known == id)
        .map(|known| vec![known])
        .ok_or_else(|| CliError::Usage(format!("unknown check id '{id}'; run `fraclap verify --help` for the list")))
}

pub enum Status {
    Pass,
    Fail(Vec<String>),
    Error(CliError),
}

pub fn run(id: &str, config: &VerifyConfig, out_dir: &Path, format: Format) -> Result<(), CliError> {
    let ids = select(id)?;
    let mut statuses = Vec::with_capacity(ids.len());
    let mut reports = Vec::new();
    for id in ids {
        let status = match run_check(id, config) {
            Ok(report) => {
                write_report(&report, out_dir, format)?;
                let status = if report.pass { Status::Pass } else { Status::Fail(report.failures()) };
                reports.push(report);
                status
            }
            Err(e) => Status::Error(e.into()),
        };
        println!("{}", summary_line(id, &status));
        statuses.push((id, status));
    }
    if reports.len() > 1 {
        let name = match format {
            Format::Json => "summary.json",
            Format::Csv => "summary.csv",
        };
        write_atomic(&out_dir.join(name), &summary(&reports, format))?;
    }
    let passed = statuses.iter().filter(|(_, s)| matches!(s, Status::Pass)).count();
    println!("{passed}/{} checks passed", statuses.len());
    let mut worst = None;
    for (id, status) in statuses {
        match status {
            Status::Pass => {}
            Status::Fail(_) if worst.is_none() => worst = Some(CliError::ChecksFailed),
            Status::Fail(_) => {}
            Status::Error(e) => {
                if !matches!(worst, Some(CliError::Numeric(_) | CliError::Usage(_))) {
                    worst = Some(match e {
                        CliError::Numeric(m) => CliError::Numeric(format!("{id}: {m}")),
                        CliError::Usage(m) => CliError::Usage(format!("{id}: {m}")),
                        other => other,
                    });
                }
            }
        }
    }
    worst.map_or(Ok(()), Err)
}

fn summary_line(id: &str, status: &Status) -> String {
    match status {
        Status::Pass => format!("PASS {id}"),
        Status::Fail(reasons) => format!("FAIL {id}: {}", reasons.join("; ")),
        Status::Error(e) => format!("ERROR {id}: {e}"),
    }
}

fn write_report(report: &Report, out_dir: &Path, format: Format) -> Result<(), CliError> {
    let (name, text) = match format {
        Format::Json => (format!("{}.json", report.check_id), report.to_json()),
        Format::Csv => (format!("{}.csv", report.check_id), reports_to_csv(std::slice::from_ref(report))),
    };
    write_atomic(&out_dir.join(name), &text)
}

fn summary(reports: &[Report], format: Format) -> String {
    match format {
        Format::Csv => reports_to_csv(reports),
        Format::Json => {
            let rows: Vec<serde_json::Value> = reports
                .iter()
                .map(|r| serde_json::json!({"check_id": r.check_id, "pass": r.pass, "failures": r.failures()}))
                .collect();
            let mut text = serde_json::to_string_pretty(&rows).expect("summary serializes");
            text.push('\n');
            text
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selection_expands_all_and_rejects_unknown_ids() {
        assert_eq!(select("all").unwrap().len(), CHECKS.len());
        assert_eq!(select("holder").unwrap(), ["holder"]);
        assert!(matches!(select("nope"), Err(CliError::Usage(_))));
        let help = check_list();
        assert!(CHECKS.iter().all(|c| help.contains(c.id)));
    }

    #[test]
    fn single_check_writes_its_report() {
        let dir = tempfile::tempdir().unwrap();
        run("dimension-reduction", &VerifyConfig::default(), dir.path(), Format::Json).unwrap();
        let text = std::fs::read_to_string(dir.path().join("dimension-reduction.json")).unwrap();
        let report = Report::from_json(&text).unwrap();
        assert!(report.pass);
        assert!(!dir.path().join("summary.json").exists());
    }
}
