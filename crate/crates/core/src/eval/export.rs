use std::fs;
use std::path::{Path, PathBuf};

use super::metrics::Series;
use super::{EvalError, EvalReport};
use crate::scenario::ExecutionTrace;

#[derive(Debug, Clone, PartialEq)]
pub struct OutputFiles {
    pub summary_text: PathBuf,
    pub summary_json: PathBuf,
    pub csv: Vec<PathBuf>,
}

fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// `<agent>.<metric>[.<target>].csv`, with ids reduced to filename-safe characters.
pub fn series_file_name(agent: &str, metric: &str, target: Option<&str>) -> String {
    match target {
        Some(t) => format!("{}.{metric}.{}.csv", sanitize(agent), sanitize(t)),
        None => format!("{}.{metric}.csv", sanitize(agent)),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> EvalError + '_ {
    move |source| EvalError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Two-column CSV `time,value`. Infinite values are written as `inf`.
pub fn write_series_csv<V: ToString>(path: &Path, rows: impl IntoIterator<Item = (f64, V)>) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["time", "value"])?;
    for (t, v) in rows {
        w.write_record([t.to_string(), v.to_string()])?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

fn write_numeric(dir: &Path, name: String, s: &Series, out: &mut Vec<PathBuf>) -> Result<(), EvalError> {
    let path = dir.join(name);
    write_series_csv(&path, s.iter().copied())?;
    out.push(path);
    Ok(())
}

/// Writes `summary.txt`, `summary.json` and one CSV per series into `dir`,
/// creating it if needed. `trace` supplies the mode series.
pub fn write_outputs(report: &EvalReport, trace: &ExecutionTrace, dir: &Path) -> Result<OutputFiles, EvalError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let summary_text = dir.join("summary.txt");
    fs::write(&summary_text, report.to_text()).map_err(io_err(&summary_text))?;
    let summary_json = dir.join("summary.json");
    fs::write(&summary_json, report.to_json()).map_err(io_err(&summary_json))?;
    let mut csv = Vec::new();
    for (id, a) in &report.agents {
        if let Some(t) = trace.agent(id) {
            if !t.mode_trace.is_empty() {
                let path = dir.join(series_file_name(id, "mode", None));
                let rows = t.state_trace.iter().zip(&t.mode_trace).map(|(s, m)| (s.t, m.as_str()));
                write_series_csv(&path, rows)?;
                csv.push(path);
            }
        }
        for (target, s) in &a.unsafe_distance {
            write_numeric(dir, series_file_name(id, "distance", Some(target)), s, &mut csv)?;
        }
        for (target, s) in &a.agent_distance {
            write_numeric(dir, series_file_name(id, "distance", Some(target)), s, &mut csv)?;
        }
        for (target, s) in &a.ttc {
            write_numeric(dir, series_file_name(id, "ttc", Some(target)), s, &mut csv)?;
        }
    }
    Ok(OutputFiles {
        summary_text,
        summary_json,
        csv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_names_are_safe() {
        assert_eq!(series_file_name("car 1", "ttc", Some("a/b")), "car_1.ttc.a_b.csv");
        assert_eq!(series_file_name("ego", "mode", None), "ego.mode.csv");
    }

    #[test]
    fn csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        write_series_csv(&p, [(0.0, 1.5), (0.1, f64::INFINITY)]).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "time,value\n0,1.5\n0.1,inf\n");
    }
}
