//! Run configuration: one flat key set covering dataset paths, stage
//! artifacts, and every module knob. Values come from defaults, then an
//! optional `key = value` config file, then command-line flags.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use enginekgi::{
    Error, EvalConfig, LearnerConfig, LoopConfig, Norm, PathConfig, Result, RuleConfig,
    TrainConfig,
};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub train: Option<PathBuf>,
    pub valid: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub concepts: Option<PathBuf>,
    pub rules: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub path_index: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    /// Worker threads: 0 uses all cores, 1 forces deterministic mode.
    pub threads: usize,
    pub d: usize,
    pub batch_size: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub norm: u32,
    pub beta: f64,
    pub st: f64,
    pub min_sc: f64,
    pub min_hc: f64,
    pub min_support: u64,
    pub min_reliability: f64,
    pub max_paths_per_pair: usize,
    pub max_iterations: usize,
    pub warm_start: bool,
    pub valid_subsample: usize,
    pub on_demand_paths: bool,
    pub on_demand_top_k: usize,
    pub explain: Vec<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let train = TrainConfig::default();
        let learner = LearnerConfig::default();
        let paths = PathConfig::default();
        let eval = EvalConfig::default();
        let engine = LoopConfig::default();
        RunConfig {
            train: None,
            valid: None,
            test: None,
            concepts: None,
            rules: None,
            embeddings: None,
            path_index: None,
            out: PathBuf::from("out"),
            seed: train.seed,
            threads: 0,
            d: train.d,
            batch_size: train.batch_size,
            negatives: train.negatives,
            epochs: train.epochs,
            learning_rate: train.learning_rate,
            gamma1: train.gamma1,
            gamma2: train.gamma2,
            gamma3: train.gamma3,
            alpha1: train.alpha1,
            alpha2: train.alpha2,
            norm: train.norm.order(),
            beta: learner.beta,
            st: learner.st,
            min_sc: learner.min_sc,
            min_hc: learner.min_hc,
            min_support: learner.min_support,
            min_reliability: paths.min_reliability,
            max_paths_per_pair: paths.max_paths_per_pair,
            max_iterations: engine.max_iterations,
            warm_start: engine.warm_start,
            valid_subsample: engine.valid_queries,
            on_demand_paths: eval.on_demand_paths,
            on_demand_top_k: eval.on_demand_top_k,
            explain: Vec::new(),
        }
    }
}

fn num<T: std::str::FromStr>(value: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| format!("cannot parse {value:?}: {e}"))
}

fn flag(value: &str) -> std::result::Result<bool, String> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(format!("expected true or false, got {other:?}")),
    }
}

impl RunConfig {
    /// Applies `key = value` lines from `path`. Blank lines and `#`
    /// comments are skipped; later lines override earlier ones.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.into(),
            source: e,
        })?;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse {
                    path: path.into(),
                    line: idx + 1,
                    msg: format!("expected `key = value`, got {line:?}"),
                });
            };
            self.set(key.trim(), value.trim()).map_err(|msg| Error::Parse {
                path: path.into(),
                line: idx + 1,
                msg,
            })?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        match key {
            "train" => self.train = Some(value.into()),
            "valid" => self.valid = Some(value.into()),
            "test" => self.test = Some(value.into()),
            "concepts" => self.concepts = Some(value.into()),
            "rules" => self.rules = Some(value.into()),
            "embeddings" => self.embeddings = Some(value.into()),
            "path_index" => self.path_index = Some(value.into()),
            "out" => self.out = value.into(),
            "seed" => self.seed = num(value)?,
            "threads" => self.threads = num(value)?,
            "d" => self.d = num(value)?,
            "batch_size" => self.batch_size = num(value)?,
            "negatives" => self.negatives = num(value)?,
            "epochs" => self.epochs = num(value)?,
            "learning_rate" => self.learning_rate = num(value)?,
            "gamma1" => self.gamma1 = num(value)?,
            "gamma2" => self.gamma2 = num(value)?,
            "gamma3" => self.gamma3 = num(value)?,
            "alpha1" => self.alpha1 = num(value)?,
            "alpha2" => self.alpha2 = num(value)?,
            "norm" => self.norm = num(value)?,
            "beta" => self.beta = num(value)?,
            "st" => self.st = num(value)?,
            "min_sc" => self.min_sc = num(value)?,
            "min_hc" => self.min_hc = num(value)?,
            "min_support" => self.min_support = num(value)?,
            "min_reliability" => self.min_reliability = num(value)?,
            "max_paths_per_pair" => self.max_paths_per_pair = num(value)?,
            "max_iterations" => self.max_iterations = num(value)?,
            "warm_start" => self.warm_start = flag(value)?,
            "valid_subsample" => self.valid_subsample = num(value)?,
            "on_demand_paths" => self.on_demand_paths = flag(value)?,
            "on_demand_top_k" => self.on_demand_top_k = num(value)?,
            "explain" => self.explain.push(value.to_string()),
            other => return Err(format!("unknown config key {other:?}")),
        }
        Ok(())
    }

    /// The effective configuration as a config file, written to the
    /// output directory so a run can be reproduced from its artifacts.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        let mut file = |key: &str, value: &Option<PathBuf>| {
            if let Some(p) = value {
                writeln!(out, "{key} = {}", p.display()).unwrap();
            }
        };
        file("train", &self.train);
        file("valid", &self.valid);
        file("test", &self.test);
        file("concepts", &self.concepts);
        file("rules", &self.rules);
        file("embeddings", &self.embeddings);
        file("path_index", &self.path_index);
        writeln!(out, "out = {}", self.out.display()).unwrap();
        writeln!(out, "seed = {}", self.seed).unwrap();
        writeln!(out, "threads = {}", self.threads).unwrap();
        writeln!(out, "d = {}", self.d).unwrap();
        writeln!(out, "batch_size = {}", self.batch_size).unwrap();
        writeln!(out, "negatives = {}", self.negatives).unwrap();
        writeln!(out, "epochs = {}", self.epochs).unwrap();
        writeln!(out, "learning_rate = {}", self.learning_rate).unwrap();
        writeln!(out, "gamma1 = {}", self.gamma1).unwrap();
        writeln!(out, "gamma2 = {}", self.gamma2).unwrap();
        writeln!(out, "gamma3 = {}", self.gamma3).unwrap();
        writeln!(out, "alpha1 = {}", self.alpha1).unwrap();
        writeln!(out, "alpha2 = {}", self.alpha2).unwrap();
        writeln!(out, "norm = {}", self.norm).unwrap();
        writeln!(out, "beta = {}", self.beta).unwrap();
        writeln!(out, "st = {}", self.st).unwrap();
        writeln!(out, "min_sc = {}", self.min_sc).unwrap();
        writeln!(out, "min_hc = {}", self.min_hc).unwrap();
        writeln!(out, "min_support = {}", self.min_support).unwrap();
        writeln!(out, "min_reliability = {}", self.min_reliability).unwrap();
        writeln!(out, "max_paths_per_pair = {}", self.max_paths_per_pair).unwrap();
        writeln!(out, "max_iterations = {}", self.max_iterations).unwrap();
        writeln!(out, "warm_start = {}", self.warm_start).unwrap();
        writeln!(out, "valid_subsample = {}", self.valid_subsample).unwrap();
        writeln!(out, "on_demand_paths = {}", self.on_demand_paths).unwrap();
        writeln!(out, "on_demand_top_k = {}", self.on_demand_top_k).unwrap();
        for query in &self.explain {
            writeln!(out, "explain = {query}").unwrap();
        }
        out
    }

    pub fn scoring_norm(&self) -> Result<Norm> {
        Norm::from_order(self.norm)
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        Ok(TrainConfig {
            d: self.d,
            batch_size: self.batch_size,
            negatives: self.negatives,
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            gamma1: self.gamma1,
            gamma2: self.gamma2,
            gamma3: self.gamma3,
            alpha1: self.alpha1,
            alpha2: self.alpha2,
            norm: self.scoring_norm()?,
            seed: self.seed,
            parallel: self.threads != 1,
        })
    }

    pub fn learner_config(&self) -> Result<LearnerConfig> {
        Ok(LearnerConfig {
            beta: self.beta,
            st: self.st,
            min_sc: self.min_sc,
            min_hc: self.min_hc,
            min_support: self.min_support,
            norm: self.scoring_norm()?,
        })
    }

    pub fn rule_config(&self) -> RuleConfig {
        RuleConfig {
            min_sc: self.min_sc,
            min_hc: self.min_hc,
            min_support: self.min_support,
        }
    }

    pub fn path_config(&self) -> PathConfig {
        PathConfig {
            min_reliability: self.min_reliability,
            max_paths_per_pair: self.max_paths_per_pair,
        }
    }

    pub fn eval_config(&self) -> Result<EvalConfig> {
        Ok(EvalConfig {
            alpha1: self.alpha1,
            norm: self.scoring_norm()?,
            on_demand_paths: self.on_demand_paths,
            on_demand_top_k: self.on_demand_top_k,
            path_config: self.path_config(),
        })
    }

    pub fn loop_config(&self) -> Result<LoopConfig> {
        Ok(LoopConfig {
            max_iterations: self.max_iterations,
            warm_start: self.warm_start,
            valid_queries: self.valid_subsample,
            train: self.train_config()?,
            paths: self.path_config(),
            learner: self.learner_config()?,
            eval: self.eval_config()?,
            ..LoopConfig::default()
        })
    }
}
