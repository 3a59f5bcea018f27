//! Tasks and the tune, cross-validate and report pipeline.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use bvpain_core::dataset::{normalize_per_subject, tuning_split, Dataset, PainState};
use bvpain_learn::{grid_search, Family, HyperGrid, HyperMap, ModelSpec, Target, TrainedModel};
use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::cv::{
    cross_validate, cross_validate_baseline, prepare_fold, Baseline, CvConfig, CvMode, CvReport, TaskData, TaskTarget,
};
use crate::error::{EvalError, Result};
use crate::metrics::{macro_prf, mae_rmse, ConfusionMatrix};

/// The score every regression window is compared against in the naive row.
pub const NAIVE_SCORE: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Task {
    /// Binary task; the second state is the positive class.
    Pair(PainState, PainState),
    /// LP vs MP vs HP.
    ThreeClass,
    /// Pain score 0-10.
    Regression,
}

impl Task {
    /// The six pairwise tasks, the three-class task and regression.
    pub fn all() -> Vec<Task> {
        let s = PainState::ALL;
        let mut v = Vec::new();
        for i in 0..s.len() {
            for j in i + 1..s.len() {
                v.push(Task::Pair(s[i], s[j]));
            }
        }
        v.push(Task::ThreeClass);
        v.push(Task::Regression);
        v
    }

    pub fn is_regression(self) -> bool {
        self == Task::Regression
    }

    /// States whose windows take part, in class order.
    pub fn states(self) -> Vec<PainState> {
        match self {
            Task::Pair(a, b) => vec![a, b],
            Task::ThreeClass => vec![PainState::Low, PainState::Medium, PainState::High],
            Task::Regression => PainState::ALL.to_vec(),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Task::Pair(a, b) => write!(f, "{a}-{b}"),
            Task::ThreeClass => f.write_str("LP-MP-HP"),
            Task::Regression => f.write_str("regression"),
        }
    }
}

impl FromStr for Task {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_uppercase().replace(['_', ' '], "-");
        match t.as_str() {
            "REGRESSION" | "REG" => return Ok(Task::Regression),
            "LP-MP-HP" | "3CLASS" | "THREE-CLASS" | "MULTICLASS" => return Ok(Task::ThreeClass),
            _ => {}
        }
        let state = |c: &str| PainState::ALL.into_iter().find(|p| p.code() == c);
        let parts: Vec<&str> = t.split('-').filter(|p| *p != "VS").collect();
        if let [a, b] = parts.as_slice() {
            if let (Some(a), Some(b)) = (state(a), state(b)) {
                if a != b {
                    return Ok(Task::Pair(a, b));
                }
            }
        }
        Err(EvalError::InvalidInput(format!(
            "unknown task '{s}' (expected e.g. NP-HP, LP-MP-HP or regression)"
        )))
    }
}

impl Serialize for Task {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Task {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Rows of `ds` that belong to `task`, with targets and strata. Rows marked
/// synthetic are ignored.
pub fn task_data(ds: &Dataset, task: Task) -> Result<TaskData> {
    let states = task.states();
    let rows: Vec<_> = ds
        .rows
        .iter()
        .filter(|r| r.synthetic.is_none())
        .filter_map(|r| states.iter().position(|&s| s == r.pain_state).map(|c| (r, c)))
        .collect();
    if rows.is_empty() {
        return Err(EvalError::Unstratifiable(format!("task {task} has no windows")));
    }
    let width = ds.width();
    let flat: Vec<f64> = rows.iter().flat_map(|(r, _)| r.features.iter().copied()).collect();
    let x = Array2::from_shape_vec((rows.len(), width), flat).map_err(|e| EvalError::InvalidInput(e.to_string()))?;
    let names: Vec<String> = states.iter().map(|s| s.code().to_string()).collect();
    let strata: Vec<usize> = rows.iter().map(|&(_, c)| c).collect();
    let target = if task.is_regression() {
        TaskTarget::Values(rows.iter().map(|(r, _)| f64::from(r.pain_score)).collect())
    } else {
        TaskTarget::Classes {
            labels: strata.clone(),
            names: names.clone(),
        }
    };
    Ok(TaskData {
        feature_names: ds.column_names.clone(),
        x,
        target,
        strata,
        strata_names: names,
        groups: rows.iter().map(|(r, _)| r.subject_id.clone()).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    pub cv: CvConfig,
    /// Share of each class held out for hyperparameter search.
    pub tuning_frac: f64,
    /// Z-score features within each subject first.
    pub normalize: bool,
    /// Search grid per family name; families not listed use their default grid.
    pub grids: BTreeMap<String, HyperGrid>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            cv: CvConfig::default(),
            tuning_frac: 0.16,
            normalize: true,
            grids: BTreeMap::new(),
        }
    }
}

impl StudyConfig {
    pub fn grid_for(&self, family: Family) -> HyperGrid {
        self.grids
            .get(family.name())
            .cloned()
            .unwrap_or_else(|| family.default_grid())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(EvalError::InvalidInput(m));
        if self.cv.k < 2 {
            return bad(format!("cv.k must be at least 2, got {}", self.cv.k));
        }
        if self.cv.smote_k == 0 {
            return bad("cv.smote_k must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.tuning_frac) {
            return bad(format!("tuning_frac must lie in [0, 1), got {}", self.tuning_frac));
        }
        for (name, grid) in &self.grids {
            let family: Family = name
                .parse()
                .map_err(|_| EvalError::InvalidInput(format!("grid for unknown model family '{name}'")))?;
            for point in grid.points() {
                ModelSpec {
                    family,
                    hyper: point,
                    seed: 0,
                }
                .validate()?;
            }
        }
        Ok(())
    }
}

/// Macro F1 for classifiers, negated MAE for regressors; larger is better.
pub fn tuning_score(model: &TrainedModel, x: ArrayView2<f64>, y: Target) -> bvpain_learn::Result<f64> {
    match y {
        Target::Classes(y) => {
            let classes = model.classes().unwrap_or(&[]).to_vec();
            let mut all: Vec<usize> = classes.iter().chain(y).copied().collect();
            all.sort_unstable();
            all.dedup();
            let index = |c: usize| all.binary_search(&c).expect("label listed");
            let truth: Vec<usize> = y.iter().map(|&c| index(c)).collect();
            let pred: Vec<usize> = model.predict(x)?.into_iter().map(index).collect();
            let names = all.iter().map(usize::to_string).collect();
            let cm = ConfusionMatrix::from_indices(names, &truth, &pred)
                .map_err(|e| bvpain_learn::LearnError::InvalidInput(e.to_string()))?;
            Ok(macro_prf(&cm).f1)
        }
        Target::Values(y) => {
            let p = model.predict_value(x)?;
            let (mae, _) = mae_rmse(y, &p).map_err(|e| bvpain_learn::LearnError::InvalidInput(e.to_string()))?;
            Ok(-mae)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningSummary {
    pub grid_points: usize,
    pub failed_points: usize,
    pub best: HyperMap,
    /// Macro F1, or negated MAE for regression; `None` without a tuning set.
    pub best_score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub name: String,
    pub cv: CvReport,
}

/// Everything one task/model run produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: Task,
    pub family: Family,
    pub model_seed: u64,
    /// Windows per stratum before the tuning split.
    pub windows: BTreeMap<String, usize>,
    pub n_main: usize,
    pub n_tuning: usize,
    pub tuning: TuningSummary,
    pub cv: CvReport,
    pub benchmark: BenchmarkReport,
    /// Effective run configuration, filled in by the caller.
    pub config: serde_json::Value,
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| EvalError::Serialization(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| EvalError::Serialization(e.to_string()))
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.cv.metrics.get(name).map(|m| m.mean)
    }
}

/// Picks the family that fits the task type.
pub fn family_for_task(family: Family, task: Task) -> Result<Family> {
    match (task.is_regression(), family.is_regression()) {
        (true, true) | (false, false) => Ok(family),
        (true, false) => family.regression_variant().ok_or_else(|| {
            EvalError::InvalidInput(format!("model {family} has no regression variant"))
        }),
        (false, true) => Err(EvalError::InvalidInput(format!(
            "model {family} is a regressor but task {task} is a classification task"
        ))),
    }
}

fn check_stratifiable(data: &TaskData, task: Task, cfg: &StudyConfig) -> Result<()> {
    let counts = data.strata_counts();
    let tuned = |n: usize| {
        if cfg.tuning_frac > 0.0 {
            ((cfg.tuning_frac * n as f64).round() as usize).max(1)
        } else {
            0
        }
    };
    let window_mode = cfg.cv.mode == CvMode::Window;
    let need = if window_mode { cfg.cv.k.max(2) } else { 2 };
    for (name, &n) in data.strata_names.iter().zip(&counts) {
        let main = n.saturating_sub(tuned(n));
        if n == 0 || main < need || (cfg.tuning_frac > 0.0 && tuned(n) >= n) {
            return Err(EvalError::Unstratifiable(format!(
                "class {name} of task {task} has {n} windows; {need} are needed in the cross-validation part"
            )));
        }
    }
    Ok(())
}

/// Tuning split, grid search on the remaining rows, k-fold cross-validation
/// of the selected model and of the reference predictor.
pub fn run_study(ds: &Dataset, task: Task, family: Family, cfg: &StudyConfig, model_seed: u64) -> Result<EvalReport> {
    cfg.validate()?;
    let family = family_for_task(family, task)?;
    let normalized;
    let ds = if cfg.normalize {
        normalized = normalize_per_subject(ds).dataset;
        &normalized
    } else {
        ds
    };
    let data = task_data(ds, task)?;
    check_stratifiable(&data, task, cfg)?;
    let windows = data
        .strata_names
        .iter()
        .cloned()
        .zip(data.strata_counts())
        .collect();
    let (main_idx, tuning_idx) = tuning_split(&data.strata, cfg.tuning_frac, cfg.cv.seed)?;
    let main = data.subset(&main_idx);
    let grid = cfg.grid_for(family);
    let tuning = if tuning_idx.is_empty() {
        let best = grid.points().into_iter().next().unwrap_or_default();
        TuningSummary {
            grid_points: grid.len(),
            failed_points: 0,
            best,
            best_score: None,
        }
    } else {
        let tune = data.subset(&tuning_idx);
        // the whole main part is the training set of the search
        let prep = prepare_fold(&main, &[], &cfg.cv, usize::MAX)?;
        let y_tune = match &tune.target {
            TaskTarget::Classes { labels, .. } => Target::Classes(labels),
            TaskTarget::Values(v) => Target::Values(v),
        };
        let found = grid_search(
            family,
            &grid,
            model_seed,
            (prep.x_train.view(), prep.y_train.view()),
            (tune.x.view(), y_tune),
            &tuning_score,
        )?;
        TuningSummary {
            grid_points: found.points.len(),
            failed_points: found.points.iter().filter(|p| p.score.is_none()).count(),
            best: found.best,
            best_score: Some(found.best_score),
        }
    };
    log::info!("{task} {family}: selected {:?}", tuning.best);
    let spec = ModelSpec {
        family,
        hyper: tuning.best.clone(),
        seed: model_seed,
    };
    let cv = cross_validate(&spec, &main, &cfg.cv)?;
    let baseline = if task.is_regression() {
        Baseline::Constant(NAIVE_SCORE)
    } else {
        Baseline::Majority
    };
    let benchmark = BenchmarkReport {
        name: baseline.name(),
        cv: cross_validate_baseline(baseline, &main, &cfg.cv)?,
    };
    Ok(EvalReport {
        task,
        family,
        model_seed,
        windows,
        n_main: main_idx.len(),
        n_tuning: tuning_idx.len(),
        tuning,
        cv,
        benchmark,
        config: serde_json::Value::Null,
    })
}
