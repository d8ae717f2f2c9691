//! Trajectory CSV: one row per recorded step, floats rendered with 17
//! significant digits so a reparse reproduces every f64 exactly.
//!
//! Header: step,theta_0..theta_{d-1},loss_0..loss_{k-1},w_0..w_{k-1},
//! gnorm_0..gnorm_{k-1},dnorm  (1 + d + 3k + 1 columns).

use gradmix_core::optimizer::{StepRecord, Trajectory};

use crate::CliError;

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn trajectory_to_csv(trajectory: &Trajectory) -> String {
    let first = trajectory
        .records
        .first()
        .expect("trajectory has at least the terminal record");
    let d = first.params.len();
    let k = first.losses.len();

    let mut header = vec!["step".to_string()];
    header.extend((0..d).map(|i| format!("theta_{i}")));
    header.extend((0..k).map(|i| format!("loss_{i}")));
    header.extend((0..k).map(|i| format!("w_{i}")));
    header.extend((0..k).map(|i| format!("gnorm_{i}")));
    header.push("dnorm".to_string());

    let mut out = header.join(",");
    out.push('\n');
    for r in &trajectory.records {
        let mut row = vec![r.step.to_string()];
        row.extend(r.params.iter().map(|x| fmt(*x)));
        row.extend(r.losses.iter().map(|x| fmt(*x)));
        row.extend(r.applied_weights.iter().map(|x| fmt(*x)));
        row.extend(r.grad_norms.iter().map(|x| fmt(*x)));
        row.push(fmt(r.direction_norm));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Reparse an emitted CSV into step records.
pub fn records_from_csv(text: &str) -> Result<Vec<StepRecord>, CliError> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::config("empty trajectory CSV".to_string()))?;
    let columns: Vec<&str> = header.split(',').collect();
    let d = columns.iter().filter(|c| c.starts_with("theta_")).count();
    let k = columns.iter().filter(|c| c.starts_with("loss_")).count();
    let expected = 1 + d + 3 * k + 1;
    if columns.len() != expected || d == 0 || k == 0 {
        return Err(CliError::config(format!(
            "malformed trajectory header: {} columns, expected {expected}",
            columns.len()
        )));
    }

    let parse = |field: &str| -> Result<f64, CliError> {
        field
            .parse::<f64>()
            .map_err(|e| CliError::config(format!("bad float `{field}`: {e}")))
    };

    let mut records = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != expected {
            return Err(CliError::config(format!(
                "row {}: {} fields, expected {expected}",
                lineno + 2,
                fields.len()
            )));
        }
        let step = fields[0]
            .parse::<usize>()
            .map_err(|e| CliError::config(format!("bad step `{}`: {e}", fields[0])))?;
        let mut at = 1;
        let mut take = |n: usize| -> Result<Vec<f64>, CliError> {
            let slice = &fields[at..at + n];
            at += n;
            slice.iter().map(|f| parse(f)).collect()
        };
        let params = take(d)?;
        let losses = take(k)?;
        let applied_weights = take(k)?;
        let grad_norms = take(k)?;
        let direction_norm = parse(fields[at])?;
        records.push(StepRecord {
            step,
            params,
            losses,
            applied_weights,
            grad_norms,
            direction_norm,
        });
    }
    Ok(records)
}
