use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::interp::DEFAULT_STEP_BUDGET;
use crate::lang::{load_project, LoadedProject};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub project_id: String,
    /// Project directory, relative to the manifest.
    pub path: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusSettings {
    pub step_budget: u64,
    pub seed: u64,
    pub folds: usize,
    pub repeats: usize,
    pub trees: usize,
}

impl Default for CorpusSettings {
    fn default() -> Self {
        CorpusSettings { step_budget: DEFAULT_STEP_BUDGET, seed: 42, folds: 10, repeats: 3, trees: 100 }
    }
}

/// Contents of `corpus.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub projects: Vec<CorpusEntry>,
    #[serde(default)]
    pub settings: CorpusSettings,
}

pub struct Corpus {
    pub root: PathBuf,
    pub settings: CorpusSettings,
    pub projects: Vec<LoadedProject>,
}

impl Corpus {
    /// Loads `corpus.json` from `dir` and every project it lists.
    pub fn load(dir: &Path) -> Result<Corpus, PipelineError> {
        let path = dir.join("corpus.json");
        let text = fs::read_to_string(&path).map_err(|e| PipelineError::Input(format!("{}: {e}", path.display())))?;
        let manifest: CorpusManifest =
            serde_json::from_str(&text).map_err(|e| PipelineError::Input(format!("{}: {e}", path.display())))?;
        let mut seen = BTreeSet::new();
        let mut projects = Vec::new();
        for entry in &manifest.projects {
            if !seen.insert(entry.project_id.clone()) {
                return Err(PipelineError::Input(format!("duplicate project id `{}`", entry.project_id)));
            }
            let project = load_project(&dir.join(&entry.path))
                .map_err(|e| PipelineError::Input(format!("project `{}`: {e}", entry.project_id)))?;
            if project.manifest.project_id != entry.project_id {
                return Err(PipelineError::Input(format!(
                    "corpus lists `{}` but {} declares `{}`",
                    entry.project_id, entry.path, project.manifest.project_id
                )));
            }
            projects.push(project);
        }
        Ok(Corpus { root: dir.to_path_buf(), settings: manifest.settings, projects })
    }

    /// A corpus made of one project directory with default settings.
    pub fn single(project_dir: &Path) -> Result<Corpus, PipelineError> {
        Ok(Corpus {
            root: project_dir.to_path_buf(),
            settings: CorpusSettings::default(),
            projects: vec![load_project(project_dir)?],
        })
    }
}

/// The corpus shipped with the crate.
pub fn bundled_corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}
