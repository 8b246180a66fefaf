//! CSV plumbing for `gp-predict`.
//!
//! Input files may start with a header row; a first row that does not parse
//! as numbers is skipped.

use std::path::Path;

use probmorph::json::format_g17;
use probmorph::{GaussianMeasure, GpData};

use crate::error::CliError;

fn read_rows(path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let csv_err = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_err)?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let parsed: Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) if row.iter().all(|v| v.is_finite()) => rows.push(row),
            _ if i == 0 => continue,
            _ => {
                return Err(CliError::Usage(format!(
                    "{}: row {} is not a list of finite numbers",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Ok(rows)
}

/// Training data: input columns followed by the observed value.
pub fn read_training(path: &Path) -> Result<GpData, CliError> {
    let rows = read_rows(path)?;
    let mut xs = Vec::with_capacity(rows.len());
    let mut ys = Vec::with_capacity(rows.len());
    for mut row in rows {
        if row.len() < 2 {
            return Err(CliError::Usage(format!(
                "{}: training rows need at least one input column and a value",
                path.display()
            )));
        }
        ys.push(row.pop().expect("nonempty row"));
        xs.push(row);
    }
    Ok(GpData::new(xs, ys)?)
}

pub fn read_test(path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let rows = read_rows(path)?;
    if rows.is_empty() {
        return Err(CliError::Usage(format!(
            "{}: no test inputs",
            path.display()
        )));
    }
    Ok(rows)
}

/// Renders `test_x, posterior_mean, posterior_std` rows.
pub fn predictive_csv(test: &[Vec<f64>], pred: &GaussianMeasure) -> Result<Vec<u8>, CliError> {
    let dim = test.first().map_or(1, Vec::len);
    let mut header: Vec<String> = if dim == 1 {
        vec!["test_x".into()]
    } else {
        (0..dim).map(|j| format!("test_x{j}")).collect()
    };
    header.push("posterior_mean".into());
    header.push("posterior_std".into());

    let mut writer = csv::Writer::from_writer(Vec::new());
    let wrap = |source| CliError::Csv {
        path: "<output>".into(),
        source,
    };
    writer.write_record(&header).map_err(wrap)?;
    for (i, x) in test.iter().enumerate() {
        let mut row: Vec<String> = x.iter().map(|v| format_g17(*v)).collect();
        row.push(format_g17(pred.mean()[i]));
        row.push(format_g17(pred.cov()[(i, i)].max(0.0).sqrt()));
        writer.write_record(&row).map_err(wrap)?;
    }
    writer
        .into_inner()
        .map_err(|e| CliError::Usage(format!("flushing CSV output: {e}")))
}
