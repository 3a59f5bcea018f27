use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use bvpain_core::dataset::{normalize_per_subject, Dataset, PainState, SubjectRecording};
use bvpain_core::features::extract_dataset;
use bvpain_core::io::{
    load_recording, read_feature_table, read_manifest, write_feature_table, write_labels, write_manifest,
    write_recording, ManifestEntry,
};
use bvpain_core::synth::generate_cohort;
use bvpain_eval::{fold_importance, run_study, task_data, EvalReport};
use bvpain_stats::{dunn_table_csv, feature_pain_analysis};
use serde_json::json;

use crate::config::RunConfig;
use crate::failure::Failure;

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

pub fn require_file(path: &Path) -> Result<()> {
    if !path.is_file() {
        return Err(Failure::Usage(format!("input file {} does not exist", path.display())).into());
    }
    Ok(())
}

fn manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    require_file(path)?;
    let entries = read_manifest(path)?;
    if entries.is_empty() {
        return Err(Failure::Usage(format!("manifest {} lists no subjects", path.display())).into());
    }
    Ok(entries)
}

fn features(path: &Path) -> Result<Dataset> {
    require_file(path)?;
    Ok(read_feature_table(path)?)
}

/// Writes a synthetic cohort: one recording and one labels file per
/// subject plus a manifest.
pub fn synth(cfg: &RunConfig) -> Result<()> {
    let out = cfg.out_dir();
    let cohort = generate_cohort(cfg.cohort.n_subjects, &cfg.synth, cfg.seed)?;
    fs::create_dir_all(out.join("recordings")).with_context(|| format!("creating {}", out.display()))?;
    fs::create_dir_all(out.join("labels"))?;
    let mut entries = Vec::new();
    let mut subjects = Vec::new();
    for (rec, truth) in &cohort {
        let id = &rec.subject_id;
        let entry = ManifestEntry {
            subject_id: id.clone(),
            recording: out.join("recordings").join(format!("{id}.csv")),
            labels: out.join("labels").join(format!("{id}.csv")),
        };
        write_recording(&entry.recording, &rec.bvp)?;
        write_labels(&entry.labels, &rec.epochs)?;
        entries.push(entry);
        subjects.push(json!({
            "subject_id": id,
            "samples": rec.bvp.len(),
            "beats": truth.beat_times_s.len(),
            "epochs": rec.epochs.len(),
        }));
    }
    write_manifest(&out.join("manifest.csv"), &entries)?;
    write_json(
        &out.join("synth.json"),
        &json!({"command": "synth", "subjects": subjects, "config": cfg.echo()}),
    )?;
    say!("wrote {} synthetic subjects to {}", cohort.len(), out.display());
    Ok(())
}

fn load_all(cfg: &RunConfig, entries: &[ManifestEntry]) -> (Vec<SubjectRecording>, Vec<(String, String)>) {
    let mut ok = Vec::new();
    let mut rejects = Vec::new();
    for e in entries {
        match load_recording(e, cfg.features.epoch_len_s) {
            Ok(r) => ok.push(r),
            Err(err) => {
                log::warn!("{} rejected: {err}", e.subject_id);
                rejects.push((e.subject_id.clone(), err.to_string()));
            }
        }
    }
    (ok, rejects)
}

fn rejected(rejects: &[(String, String)], total: usize) -> anyhow::Error {
    let mut msg = format!("{} of {total} recordings rejected:", rejects.len());
    for (id, why) in rejects {
        let _ = write!(msg, "\n  {id}: {why}");
    }
    Failure::Data(msg).into()
}

/// Validates every recording of a manifest and summarises the cohort.
pub fn ingest(cfg: &RunConfig) -> Result<()> {
    let entries = manifest(&cfg.manifest_path())?;
    let (recs, rejects) = load_all(cfg, &entries);
    let mut histogram = [0usize; 11];
    let subjects: Vec<_> = recs
        .iter()
        .map(|r| {
            for e in &r.epochs {
                histogram[e.pain_score as usize] += 1;
            }
            json!({
                "subject_id": r.subject_id,
                "samples": r.bvp.len(),
                "sample_rate_hz": r.bvp.sample_rate_hz(),
                "duration_s": r.bvp.duration_s(),
                "epochs": r.epochs.len(),
            })
        })
        .collect();
    let reject_list: Vec<_> = rejects
        .iter()
        .map(|(id, why)| json!({"subject_id": id, "error": why}))
        .collect();
    let total_s: f64 = recs.iter().map(|r| r.bvp.duration_s()).sum();
    write_json(
        &cfg.out_dir().join("ingest.json"),
        &json!({
            "command": "ingest",
            "subjects": subjects,
            "score_histogram": histogram,
            "rejects": reject_list,
            "config": cfg.echo(),
        }),
    )?;
    say!(
        "{} subjects ingested ({total_s:.1} s of signal), {} rejected",
        recs.len(),
        rejects.len()
    );
    say!("pain score histogram (0-10): {histogram:?}");
    if !rejects.is_empty() {
        return Err(rejected(&rejects, entries.len()));
    }
    Ok(())
}

/// Windowed 44-feature table of every subject.
pub fn extract(cfg: &RunConfig) -> Result<()> {
    let entries = manifest(&cfg.manifest_path())?;
    let (recs, rejects) = load_all(cfg, &entries);
    if !rejects.is_empty() {
        return Err(rejected(&rejects, entries.len()));
    }
    let (ds, per_subject) = extract_dataset(&recs, &cfg.features)?;
    if ds.is_empty() {
        return Err(Failure::Data("no window of any subject has a complete feature vector".into()).into());
    }
    let path = cfg.out_dir().join("features.csv");
    fs::create_dir_all(cfg.out_dir())?;
    write_feature_table(&path, &ds)?;
    let subjects: Vec<_> = per_subject
        .iter()
        .map(|s| {
            if s.dropped > 0 {
                log::info!("{}: {} windows dropped", s.subject_id, s.dropped);
            }
            json!({"subject_id": s.subject_id, "windows": s.windows.len(), "dropped": s.dropped})
        })
        .collect();
    write_json(
        &cfg.out_dir().join("extract.json"),
        &json!({
            "command": "extract",
            "rows": ds.len(),
            "columns": ds.column_names,
            "subjects": subjects,
            "config": cfg.echo(),
        }),
    )?;
    let dropped: usize = per_subject.iter().map(|s| s.dropped).sum();
    say!("{} windows x {} features written to {} ({dropped} dropped)", ds.len(), ds.width(), path.display());
    Ok(())
}

fn report_stem(report: &EvalReport) -> String {
    format!("{}_{}", report.task, report.family)
}

fn fold_table(report: &EvalReport) -> String {
    let mut s = String::from("fold,metric,model,value\n");
    let sources = [(report.family.name().to_string(), &report.cv), (report.benchmark.name.clone(), &report.benchmark.cv)];
    for (name, cv) in sources {
        for (metric, summary) in &cv.metrics {
            for (fold, v) in summary.per_fold.iter().enumerate() {
                let v = v.map_or(String::new(), |v| v.to_string());
                let _ = writeln!(s, "{fold},{metric},{name},{v}");
            }
        }
    }
    s
}

/// Tuning, grid search and cross-validation for one task or all of them.
pub fn train_eval(cfg: &RunConfig) -> Result<()> {
    let ds = features(&cfg.features_path())?;
    let family = cfg.family()?;
    let out = cfg.out_dir();
    let mut summary = String::from("task,model,metric,mean,std,formatted\n");
    let mut first_err = None;
    for task in cfg.tasks()? {
        let mut report = match run_study(&ds, task, family, &cfg.study, cfg.seed) {
            Ok(r) => r,
            Err(e) => {
                log::error!("{task}: {e}");
                first_err.get_or_insert(anyhow::Error::new(e).context(format!("task {task}")));
                continue;
            }
        };
        report.config = cfg.echo();
        let stem = report_stem(&report);
        write_text(&out.join(format!("report_{stem}.json")), &(report.to_json()? + "\n"))?;
        if let Some(cm) = &report.cv.confusion {
            write_text(&out.join(format!("confusion_{stem}.csv")), &cm.to_csv())?;
        }
        write_text(&out.join(format!("folds_{stem}.csv")), &fold_table(&report))?;
        say!("{task} / {}", report.family);
        let sources = [(report.family.name().to_string(), &report.cv), (report.benchmark.name.clone(), &report.benchmark.cv)];
        for (name, cv) in sources {
            for (metric, m) in &cv.metrics {
                let _ = writeln!(summary, "{task},{name},{metric},{},{},{}", m.mean, m.std, m.formatted);
                say!("  {name:<16} {metric:<18} {}", m.formatted);
            }
        }
    }
    write_text(&out.join("results.csv"), &summary)?;
    match first_err {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn prepared(cfg: &RunConfig, ds: Dataset) -> Dataset {
    if cfg.study.normalize {
        normalize_per_subject(&ds).dataset
    } else {
        ds
    }
}

/// Fold-averaged extra-trees importance for the configured task.
pub fn importance(cfg: &RunConfig) -> Result<()> {
    let tasks = cfg.tasks()?;
    let [task] = tasks[..] else {
        return Err(Failure::Usage("importance needs a single task, not 'all'".into()).into());
    };
    if task.is_regression() {
        return Err(Failure::Usage("importance needs a classification task".into()).into());
    }
    let ds = prepared(cfg, features(&cfg.features_path())?);
    let data = task_data(&ds, task)?;
    let report = fold_importance(&data, &cfg.study.cv, cfg.importance.n_trees, cfg.seed)?;
    let out = cfg.out_dir();
    write_text(&out.join("importance.csv"), &report.to_csv())?;
    write_json(
        &out.join("importance.json"),
        &json!({"command": "importance", "task": task, "report": report, "config": cfg.echo()}),
    )?;
    say!("{task}: features above {}:", report.threshold);
    for r in report.rows.iter().filter(|r| r.top) {
        say!("  {:<24} {:.4}", r.feature, r.mean);
    }
    Ok(())
}

/// Kruskal-Wallis and Dunn's test across pain states for each feature.
pub fn stats(cfg: &RunConfig) -> Result<()> {
    let ds = features(&cfg.features_path())?;
    if cfg.stats.features.is_empty() {
        return Err(Failure::Usage("no feature selected; pass --feature NAME".into()).into());
    }
    let analyses = cfg
        .stats
        .features
        .iter()
        .map(|f| feature_pain_analysis(&ds, f))
        .collect::<bvpain_stats::Result<Vec<_>>>()?;
    let out = cfg.out_dir();
    write_text(&out.join("dunn.csv"), &dunn_table_csv(&analyses))?;
    // per-state values for box plots
    let mut values = String::from("feature,state,value\n");
    for a in &analyses {
        let j = ds.column_index(&a.feature).expect("analysed column exists");
        for state in PainState::ALL {
            for r in ds.rows.iter().filter(|r| r.synthetic.is_none() && r.pain_state == state) {
                let _ = writeln!(values, "{},{state},{}", a.feature, r.features[j]);
            }
        }
    }
    write_text(&out.join("state_values.csv"), &values)?;
    write_json(
        &out.join("stats.json"),
        &json!({"command": "stats", "analyses": analyses, "config": cfg.echo()}),
    )?;
    for a in &analyses {
        say!("{}: H = {:.3}, p = {:.3e}", a.feature, a.kruskal.h, a.kruskal.p_value);
        for p in &a.pairs {
            let mark = if p.dunn.significant_at_0_05 { " *" } else { "" };
            say!("  {}-{}: z = {:.3}, p = {:.3e}{mark}", p.a, p.b, p.dunn.z_statistic, p.dunn.p_value);
        }
    }
    Ok(())
}

