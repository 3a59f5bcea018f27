//! Plain CSV formats for recordings, labels, manifests and feature tables.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::dataset::{Dataset, EpochReport, LabeledWindow, PainState, SubjectRecording};
use crate::error::{CoreError, Result};
use crate::signal::SampledSignal;

/// Metadata columns that precede the features in a feature table.
pub const FEATURE_TABLE_META: [&str; 5] =
    ["subject_id", "window_start_s", "pain_score", "pain_state", "is_synthetic"];

fn io_err(path: &Path, e: impl std::fmt::Display) -> CoreError {
    CoreError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> CoreError {
    CoreError::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

fn open_csv(path: &Path, expected: &[&str]) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let header = rdr.headers().map_err(|e| parse_err(path, 1, e.to_string()))?;
    let got: Vec<&str> = header.iter().collect();
    if got != expected {
        return Err(parse_err(
            path,
            1,
            format!("expected header {:?}, found {:?}", expected.join(","), got.join(",")),
        ));
    }
    Ok(rdr)
}

fn records(
    path: &Path,
    rdr: csv::Reader<File>,
) -> impl Iterator<Item = Result<(usize, csv::StringRecord)>> + '_ {
    rdr.into_records().map(move |r| {
        r.map(|rec| {
            let line = rec.position().map_or(0, |p| p.line() as usize);
            (line, rec)
        })
        .map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(path, line, e.to_string())
        })
    })
}

fn field<T: std::str::FromStr>(
    path: &Path,
    line: usize,
    rec: &csv::StringRecord,
    i: usize,
    name: &str,
) -> Result<T> {
    let raw = rec
        .get(i)
        .ok_or_else(|| parse_err(path, line, format!("missing {name}")))?;
    raw.parse()
        .map_err(|_| parse_err(path, line, format!("cannot parse {name} from {raw:?}")))
}

/// Reads a `time_s,bvp` file. Time must increase at a fixed step, which
/// fixes the sample rate.
pub fn read_recording(path: &Path) -> Result<SampledSignal<f64>> {
    let rdr = open_csv(path, &["time_s", "bvp"])?;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for r in records(path, rdr) {
        let (line, rec) = r?;
        let t: f64 = field(path, line, &rec, 0, "time_s")?;
        let v: f64 = field(path, line, &rec, 1, "bvp")?;
        if !t.is_finite() || !v.is_finite() {
            return Err(parse_err(path, line, "non-finite value"));
        }
        if let Some(&prev) = times.last() {
            if t <= prev {
                return Err(parse_err(path, line, format!("time {t} does not increase")));
            }
        }
        times.push(t);
        values.push(v);
    }
    if times.len() < 2 {
        return Err(parse_err(path, 1, "a recording needs at least two samples"));
    }
    let step = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    for (k, w) in times.windows(2).enumerate() {
        if ((w[1] - w[0]) - step).abs() > 1e-6 * step.max(1.0) + 1e-9 {
            return Err(parse_err(
                path,
                k + 3,
                format!("irregular time step {} (expected {step})", w[1] - w[0]),
            ));
        }
    }
    SampledSignal::new(1.0 / step, values, times[0])
}

/// Writes a `time_s,bvp` file.
pub fn write_recording(path: &Path, signal: &SampledSignal<f64>) -> Result<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    let mut go = || -> std::io::Result<()> {
        writeln!(w, "time_s,bvp")?;
        for (i, v) in signal.samples().iter().enumerate() {
            writeln!(w, "{},{}", signal.time_of(i), v)?;
        }
        w.flush()
    };
    go().map_err(|e| io_err(path, e))
}

/// Reads an `epoch_start_s,pain_score` file.
pub fn read_labels(path: &Path) -> Result<Vec<EpochReport>> {
    let rdr = open_csv(path, &["epoch_start_s", "pain_score"])?;
    let mut out = Vec::new();
    for r in records(path, rdr) {
        let (line, rec) = r?;
        let start_s: f64 = field(path, line, &rec, 0, "epoch_start_s")?;
        let score: i64 = field(path, line, &rec, 1, "pain_score")?;
        if !(0..=10).contains(&score) {
            return Err(parse_err(
                path,
                line,
                format!("pain score {score} outside the 0-10 range"),
            ));
        }
        if out.last().is_some_and(|e: &EpochReport| start_s <= e.start_s) {
            return Err(parse_err(path, line, "epoch starts must increase"));
        }
        out.push(EpochReport {
            start_s,
            pain_score: score as u8,
        });
    }
    Ok(out)
}

pub fn write_labels(path: &Path, epochs: &[EpochReport]) -> Result<()> {
    let mut body = String::from("epoch_start_s,pain_score\n");
    for e in epochs {
        body.push_str(&format!("{},{}\n", e.start_s, e.pain_score));
    }
    std::fs::write(path, body).map_err(|e| io_err(path, e))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub subject_id: String,
    pub recording: PathBuf,
    pub labels: PathBuf,
}

/// Reads `subject_id,recording_path,labels_path` lines; relative paths are
/// resolved against the manifest's directory.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let rdr = open_csv(path, &["subject_id", "recording_path", "labels_path"])?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut out: Vec<ManifestEntry> = Vec::new();
    for r in records(path, rdr) {
        let (line, rec) = r?;
        let id: String = field(path, line, &rec, 0, "subject_id")?;
        if id.is_empty() {
            return Err(parse_err(path, line, "empty subject id"));
        }
        if out.iter().any(|e| e.subject_id == id) {
            return Err(parse_err(path, line, format!("duplicate subject id {id}")));
        }
        let rec_path: String = field(path, line, &rec, 1, "recording_path")?;
        let lab_path: String = field(path, line, &rec, 2, "labels_path")?;
        out.push(ManifestEntry {
            subject_id: id,
            recording: base.join(rec_path),
            labels: base.join(lab_path),
        });
    }
    Ok(out)
}

/// Writes a manifest with paths relative to its own directory when possible.
pub fn write_manifest(path: &Path, entries: &[ManifestEntry]) -> Result<()> {
    let base = path.parent().unwrap_or(Path::new(""));
    let rel = |p: &Path| p.strip_prefix(base).unwrap_or(p).display().to_string();
    let mut body = String::from("subject_id,recording_path,labels_path\n");
    for e in entries {
        body.push_str(&format!(
            "{},{},{}\n",
            e.subject_id,
            rel(&e.recording),
            rel(&e.labels)
        ));
    }
    std::fs::write(path, body).map_err(|e| io_err(path, e))
}

/// Loads and validates every subject of a manifest.
pub fn load_recording(entry: &ManifestEntry, epoch_len_s: f64) -> Result<SubjectRecording> {
    let rec = SubjectRecording {
        subject_id: entry.subject_id.clone(),
        bvp: read_recording(&entry.recording)?,
        epochs: read_labels(&entry.labels)?,
    };
    rec.validate(epoch_len_s)?;
    Ok(rec)
}

/// Writes metadata columns followed by the feature columns.
pub fn write_feature_table(path: &Path, ds: &Dataset) -> Result<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let header: Vec<&str> = FEATURE_TABLE_META
        .iter()
        .copied()
        .chain(ds.column_names.iter().map(String::as_str))
        .collect();
    let wrap = |e: csv::Error| io_err(path, e);
    w.write_record(&header).map_err(wrap)?;
    for r in &ds.rows {
        let mut rec = vec![
            r.subject_id.clone(),
            r.window_start_s.to_string(),
            r.pain_score.to_string(),
            r.pain_state.to_string(),
            u8::from(r.synthetic.is_some()).to_string(),
        ];
        rec.extend(r.features.iter().map(f64::to_string));
        w.write_record(&rec).map_err(wrap)?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Reads a feature table written by [`write_feature_table`]. Synthetic rows
/// lose their parent links.
pub fn read_feature_table(path: &Path) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let header = rdr.headers().map_err(|e| parse_err(path, 1, e.to_string()))?.clone();
    let names: Vec<String> = header.iter().map(str::to_string).collect();
    if names.len() <= FEATURE_TABLE_META.len()
        || names[..FEATURE_TABLE_META.len()] != FEATURE_TABLE_META
    {
        return Err(parse_err(
            path,
            1,
            format!("header must start with {}", FEATURE_TABLE_META.join(",")),
        ));
    }
    let columns = names[FEATURE_TABLE_META.len()..].to_vec();
    let mut rows = Vec::new();
    for r in records(path, rdr) {
        let (line, rec) = r?;
        if rec.len() != names.len() {
            return Err(parse_err(
                path,
                line,
                format!("expected {} fields, found {}", names.len(), rec.len()),
            ));
        }
        let pain_score: u8 = field(path, line, &rec, 2, "pain_score")?;
        let pain_state: PainState = field(path, line, &rec, 3, "pain_state")?;
        if crate::dataset::bin_pain(pain_score).ok() != Some(pain_state) {
            return Err(parse_err(
                path,
                line,
                format!("state {pain_state} does not match score {pain_score}"),
            ));
        }
        let synthetic: u8 = field(path, line, &rec, 4, "is_synthetic")?;
        if synthetic != 0 {
            return Err(parse_err(path, line, "synthetic rows cannot be re-imported"));
        }
        let features = (FEATURE_TABLE_META.len()..names.len())
            .map(|i| field::<f64>(path, line, &rec, i, &names[i]))
            .collect::<Result<Vec<_>>>()?;
        rows.push(LabeledWindow {
            subject_id: field(path, line, &rec, 0, "subject_id")?,
            window_start_s: field(path, line, &rec, 1, "window_start_s")?,
            features,
            pain_score,
            pain_state,
            synthetic: None,
        });
    }
    Dataset::new(columns, rows).map_err(|e| parse_err(path, 0, e.to_string()))
}
