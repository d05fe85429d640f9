//! Flat `key = value` experiment configs.
//!
//! ```text
//! # comment
//! [run]
//! seed = 3
//! repeats = 5
//!
//! [data]
//! source = lowrank
//! m = 50
//! sample = fraction 0.2
//!
//! [tr]
//! lambda = 1, 2, 4
//!
//! [box]
//! lambda = 2, 4
//! k = 1.5, 2
//! a = 0.01
//! ```
//!
//! Relative paths are resolved against the config file's directory.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use theta_norms::experiments::presets;
use theta_norms::experiments::{
    load_jester, load_movielens, load_mtl_csv, read_triplets, Dataset, ExperimentSpec, Family,
    MtlConfig, NmaeMode, RegularizerGrid, SampleMode,
};
use theta_norms::{Error, Result};

const RUN_KEYS: &[&str] = &[
    "seed",
    "repeats",
    "tolerance",
    "max_iterations",
    "step_size",
    "eps_mean",
    "nmae",
    "clamp",
];
const DATA_KEYS: &[&str] = &[
    "source",
    "name",
    "path",
    "m",
    "rank",
    "noise_sd",
    "blocks",
    "block_size",
    "levels",
    "sample",
    "r_min",
    "r_max",
    "tasks",
    "dim",
    "clusters",
    "train",
    "validation",
    "test",
    "mean_scale",
    "cluster_scale",
    "task_scale",
];
const GRID_KEYS: &[&str] = &["lambda", "k", "a", "b", "mu"];

fn usage(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::InvalidParams(format!("config line {line}: {msg}"))
}

#[derive(Debug)]
struct Section {
    name: String,
    line: usize,
    entries: Vec<(String, String, usize)>,
}

impl Section {
    fn raw(&self, key: &str) -> Option<(&str, usize)> {
        self.entries
            .iter()
            .find(|(k, _, _)| k == key)
            .map(|(_, v, l)| (v.as_str(), *l))
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse()
                .map(Some)
                .map_err(|_| usage(line, format!("cannot parse {key} = {v}"))),
        }
    }

    fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some((v, line)) = self.raw(key) else {
            return Ok(None);
        };
        v.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| usage(line, format!("bad number {s:?} in {key}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }
}

/// A parsed config file.
#[derive(Debug)]
pub struct Config {
    sections: Vec<Section>,
    base: PathBuf,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base: PathBuf) -> Result<Self> {
        let mut sections: Vec<Section> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(name) = body.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                let name = name.trim().to_string();
                let allowed = name == "run" || name == "data" || Family::parse(&name).is_some();
                if !allowed {
                    return Err(usage(line, format!("unknown section [{name}]")));
                }
                if sections.iter().any(|s| s.name == name) {
                    return Err(usage(line, format!("section [{name}] repeated")));
                }
                sections.push(Section {
                    name,
                    line,
                    entries: Vec::new(),
                });
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| usage(line, format!("expected key = value, got {body:?}")))?;
            let section = sections
                .last_mut()
                .ok_or_else(|| usage(line, "key outside of any section"))?;
            let key = key.trim().to_string();
            let keys = match section.name.as_str() {
                "run" => RUN_KEYS,
                "data" => DATA_KEYS,
                _ => GRID_KEYS,
            };
            if !keys.contains(&key.as_str()) {
                return Err(usage(
                    line,
                    format!("unknown key {key:?} in [{}]", section.name),
                ));
            }
            if section.raw(&key).is_some() {
                return Err(usage(line, format!("key {key:?} repeated")));
            }
            section.entries.push((key, value.trim().to_string(), line));
        }
        Ok(Self { sections, base })
    }

    fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    fn path(&self, data: &Section) -> Result<PathBuf> {
        let (p, _) = data
            .raw("path")
            .ok_or_else(|| usage(data.line, "[data] needs path"))?;
        let p = PathBuf::from(p);
        Ok(if p.is_relative() {
            self.base.join(p)
        } else {
            p
        })
    }

    fn dataset(&self) -> Result<Dataset> {
        let data = self
            .section("data")
            .ok_or_else(|| Error::InvalidParams("config has no [data] section".into()))?;
        let source: String = data
            .get("source")?
            .ok_or_else(|| usage(data.line, "[data] needs source"))?;
        let sample = |default: SampleMode| -> Result<SampleMode> {
            match data.raw("sample") {
                None => Ok(default),
                Some((v, line)) => {
                    parse_sample(v).ok_or_else(|| usage(line, format!("bad sample {v:?}")))
                }
            }
        };
        let ratings =
            |name: &str, obs, default: SampleMode, range: (f64, f64)| -> Result<Dataset> {
                Ok(Dataset::Ratings {
                    name: data.get_or("name", name.to_string())?,
                    observations: obs,
                    sample: sample(default)?,
                    r_min: data.get_or("r_min", range.0)?,
                    r_max: data.get_or("r_max", range.1)?,
                })
            };
        Ok(match source.as_str() {
            "lowrank" => Dataset::LowRank {
                m: data.get_or("m", presets::SYNTH_M)?,
                r: data.get_or("rank", presets::SYNTH_RANK)?,
                noise_sd: data.get_or("noise_sd", presets::LOWRANK_NOISE_SD)?,
                sample: sample(SampleMode::GlobalFraction(presets::SYNTH_FRACTION))?,
            },
            "block" => {
                let levels = match data.list("levels")? {
                    None => presets::BLOCK_LEVELS,
                    Some(v) if v.len() == 2 => (v[0], v[1]),
                    Some(_) => {
                        return Err(usage(
                            data.raw("levels").unwrap().1,
                            "levels needs two values",
                        ))
                    }
                };
                Dataset::Block {
                    m: data.get_or("m", 100)?,
                    blocks: data.get_or("blocks", 5)?,
                    block_size: data.get_or("block_size", 20)?,
                    levels,
                    noise_sd: data.get_or("noise_sd", presets::BLOCK_NOISE_SD)?,
                    sample: sample(SampleMode::GlobalFraction(presets::SYNTH_FRACTION))?,
                }
            }
            "movielens" => ratings(
                "movielens",
                load_movielens(self.path(data)?)?,
                SampleMode::PerRowFraction(0.5),
                (1.0, 5.0),
            )?,
            "jester" => ratings(
                "jester",
                load_jester(self.path(data)?)?,
                SampleMode::PerRowCount(20),
                (-10.0, 10.0),
            )?,
            "triplets" => {
                let file = std::fs::File::open(self.path(data)?)?;
                let obs = read_triplets(std::io::BufReader::new(file))?;
                if data.raw("r_min").is_none() || data.raw("r_max").is_none() {
                    return Err(usage(data.line, "triplets need r_min and r_max"));
                }
                ratings("triplets", obs, SampleMode::GlobalFraction(0.5), (0.0, 1.0))?
            }
            "mtl" => {
                let d = MtlConfig::default();
                Dataset::Multitask {
                    config: MtlConfig {
                        tasks: data.get_or("tasks", d.tasks)?,
                        dim: data.get_or("dim", d.dim)?,
                        clusters: data.get_or("clusters", d.clusters)?,
                        train_per_task: data.get_or("train", d.train_per_task)?,
                        validation_per_task: data.get_or("validation", d.validation_per_task)?,
                        test_per_task: data.get_or("test", d.test_per_task)?,
                        mean_scale: data.get_or("mean_scale", d.mean_scale)?,
                        cluster_scale: data.get_or("cluster_scale", d.cluster_scale)?,
                        task_scale: data.get_or("task_scale", d.task_scale)?,
                        noise_sd: data.get_or("noise_sd", d.noise_sd)?,
                    },
                }
            }
            "mtl-csv" => Dataset::MultitaskFixed {
                name: data.get_or("name", "mtl".to_string())?,
                data: load_mtl_csv(self.path(data)?)?,
            },
            other => return Err(usage(data.line, format!("unknown source {other:?}"))),
        })
    }

    fn grids(&self) -> Result<Vec<RegularizerGrid>> {
        let mut grids = Vec::new();
        for s in &self.sections {
            let Some(family) = Family::parse(&s.name) else {
                continue;
            };
            let lambdas = s
                .list("lambda")?
                .ok_or_else(|| usage(s.line, format!("[{}] needs lambda", s.name)))?;
            let mut g = RegularizerGrid::new(family, lambdas);
            if let Some(k) = s.list("k")? {
                g = g.with_k(k);
            }
            if let Some(a) = s.list("a")? {
                g = g.with_a(a);
            }
            if let Some(mu) = s.list("mu")? {
                g = g.with_mu(mu);
            }
            g.b = s.get_or("b", g.b)?;
            grids.push(g);
        }
        Ok(grids)
    }

    pub fn spec(&self) -> Result<ExperimentSpec> {
        let mut spec = ExperimentSpec::new(self.dataset()?, self.grids()?);
        if let Some(run) = self.section("run") {
            spec.seed = run.get_or("seed", spec.seed)?;
            spec.repeats = run.get_or("repeats", spec.repeats)?;
            spec.solver.tolerance = run.get_or("tolerance", spec.solver.tolerance)?;
            spec.solver.max_iterations =
                run.get_or("max_iterations", spec.solver.max_iterations)?;
            spec.solver.step_size = run.get("step_size")?;
            spec.eps_mean = run.get_or("eps_mean", spec.eps_mean)?;
            spec.clamp_predictions = run.get_or("clamp", spec.clamp_predictions)?;
            if let Some((v, line)) = run.raw("nmae") {
                spec.nmae_mode = match v {
                    "standard" => NmaeMode::Standard,
                    "literal" => NmaeMode::Literal,
                    _ => {
                        return Err(usage(
                            line,
                            format!("nmae must be standard or literal, got {v:?}"),
                        ))
                    }
                };
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// `fraction 0.2`, `per-row 20` or `per-row-fraction 0.5` (a colon also
/// separates).
pub fn parse_sample(v: &str) -> Option<SampleMode> {
    let mut parts = v
        .split(|c: char| c == ':' || c.is_whitespace())
        .filter(|s| !s.is_empty());
    let (kind, amount) = (parts.next()?, parts.next()?);
    if parts.next().is_some() {
        return None;
    }
    Some(match kind {
        "fraction" => SampleMode::GlobalFraction(amount.parse().ok()?),
        "per-row" => SampleMode::PerRowCount(amount.parse().ok()?),
        "per-row-fraction" => SampleMode::PerRowFraction(amount.parse().ok()?),
        _ => return None,
    })
}
