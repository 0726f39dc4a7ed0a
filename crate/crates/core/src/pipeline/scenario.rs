use std::fmt;

use serde::{Deserialize, Serialize};

use super::{CorpusSettings, PipelineError, ProjectAnalysis};
use crate::learn::{cross_project_eval, cross_validate, smote, train_forest, CvConfig, Dataset, EvalReport, ForestConfig};
use crate::metrics::Granularity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    Within,
    Cross,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SmoteFlag {
    On,
    Off,
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scope::Within => "within",
            Scope::Cross => "cross",
        })
    }
}

impl fmt::Display for SmoteFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SmoteFlag::On => "on",
            SmoteFlag::Off => "off",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Scenario {
    pub granularity: Granularity,
    pub scope: Scope,
    pub smote: SmoteFlag,
}

impl Scenario {
    /// Every combination of the given values; `None` means both values.
    pub fn grid(granularity: Option<Granularity>, scope: Option<Scope>, smote: Option<SmoteFlag>) -> Vec<Scenario> {
        let gs = granularity.map_or(vec![Granularity::Method, Granularity::Pair], |g| vec![g]);
        let ss = scope.map_or(vec![Scope::Within, Scope::Cross], |s| vec![s]);
        let ms = smote.map_or(vec![SmoteFlag::Off, SmoteFlag::On], |m| vec![m]);
        let mut out = Vec::new();
        for &granularity in &gs {
            for &scope in &ss {
                for &smote in &ms {
                    out.push(Scenario { granularity, scope, smote });
                }
            }
        }
        out
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/smote-{}", self.granularity, self.scope, self.smote)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: Scenario,
    /// Metric blocks present in every report: support-weighted and the ineffective class.
    pub targets: Vec<String>,
    /// Within scope: one report per project. Cross scope: one per held-out project.
    pub projects: Vec<EvalReport>,
    /// Confusion counts of all project reports summed.
    pub pooled: EvalReport,
}

/// Contents of `eval_report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalDocument {
    pub seed: u64,
    pub folds: usize,
    pub repeats: usize,
    pub trees: usize,
    pub scenarios: Vec<ScenarioReport>,
}

fn cv_config(settings: &CorpusSettings, smote: SmoteFlag) -> CvConfig {
    CvConfig {
        folds: settings.folds,
        repeats: settings.repeats,
        smote: smote == SmoteFlag::On,
        forest: ForestConfig { n_trees: settings.trees, ..ForestConfig::default() },
        ..CvConfig::default()
    }
}

fn datasets(analyses: &[ProjectAnalysis], granularity: Granularity) -> Vec<Dataset> {
    analyses.iter().map(|a| Dataset::from_features(&a.project_id, a.rows(granularity))).collect()
}

fn pooled_dataset(parts: &[Dataset]) -> Result<Dataset, PipelineError> {
    let mut all = Dataset::default();
    for d in parts.iter().filter(|d| !d.is_empty()) {
        all.append(d)?;
    }
    Ok(all)
}

fn run_scenario(
    analyses: &[ProjectAnalysis],
    scenario: Scenario,
    settings: &CorpusSettings,
    seed: u64,
) -> Result<ScenarioReport, PipelineError> {
    let config = cv_config(settings, scenario.smote);
    let parts = datasets(analyses, scenario.granularity);
    let projects = match scenario.scope {
        Scope::Within => parts
            .iter()
            .zip(analyses)
            .filter(|(d, _)| !d.is_empty())
            .map(|(d, a)| {
                let mut r = cross_validate(d, &config, seed)?;
                r.project_id = a.project_id.clone();
                Ok(r)
            })
            .collect::<Result<Vec<_>, PipelineError>>()?,
        Scope::Cross => cross_project_eval(&pooled_dataset(&parts)?, &config, seed)?,
    };
    let pooled = EvalReport::pool("all", &projects);
    Ok(ScenarioReport {
        scenario,
        targets: vec!["weighted".to_string(), "ineffective".to_string()],
        projects,
        pooled,
    })
}

/// Runs `scenarios` and computes variable importance of a forest trained on
/// all projects at the first scenario's granularity and SMOTE setting.
pub fn predict(
    analyses: &[ProjectAnalysis],
    scenarios: &[Scenario],
    settings: &CorpusSettings,
    seed: u64,
) -> Result<(EvalDocument, Vec<(String, f64)>), PipelineError> {
    let reports = scenarios.iter().map(|&s| run_scenario(analyses, s, settings, seed)).collect::<Result<Vec<_>, _>>()?;
    let first = scenarios.first().ok_or_else(|| PipelineError::Input("no scenario selected".into()))?;
    let mut all = pooled_dataset(&datasets(analyses, first.granularity))?;
    if first.smote == SmoteFlag::On {
        all = smote(&all, crate::learn::smote::DEFAULT_NEIGHBORS, 1.0, seed)?;
    }
    let model = train_forest(&all, &ForestConfig { n_trees: settings.trees, ..ForestConfig::default() }, seed)?;
    let doc = EvalDocument {
        seed,
        folds: settings.folds,
        repeats: settings.repeats,
        trees: settings.trees,
        scenarios: reports,
    };
    Ok((doc, model.importance_report()))
}
