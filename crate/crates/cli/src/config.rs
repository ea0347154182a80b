//! Run configuration: a flat key-value file with `[memory]`, `[alphabet]`
//! and `[output]` section headers.
//!
//! Physical values use the same units as the library (vacuum variance 1/2).
//! Unknown sections or keys are hard errors; a typo in a physics constant
//! must never pass silently.

use std::path::PathBuf;

use cvmem::fidelity::PhaseSet;
use cvmem::gaussian::LossBudget;
use cvmem::memory::MemoryParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub memory: MemoryParams,
    pub d_max: Vec<f64>,
    pub s: f64,
    pub phases: PhaseSet,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            memory: MemoryParams::paper_2010(),
            d_max: vec![0.0, 3.8, 7.6],
            s: 4.0,
            phases: PhaseSet::Discrete(vec![0.0, 90.0]),
            out_dir: PathBuf::from("out"),
            format: OutputFormat::Csv,
            seed: 7,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.d_max.is_empty() {
            return Err("alphabet d_max list must not be empty".into());
        }
        if self.d_max.iter().any(|&d| d < 0.0) {
            return Err("alphabet d_max values must be non-negative".into());
        }
        if self.d_max.windows(2).any(|w| w[0] > w[1]) {
            return Err("alphabet d_max values must be sorted ascending".into());
        }
        if self.s <= 0.0 {
            return Err(format!("alphabet squeezing must be positive, got {}", self.s));
        }
        Ok(())
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, String> {
    let mut config = RunConfig::default();
    let mut section = String::new();

    // memory overrides are collected and applied over the preset
    let mut mem = MemoryParams::paper_2010();
    let mut losses = mem.losses;
    let mut g_explicit: Option<f64> = None;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = name.trim().to_string();
            if !matches!(section.as_str(), "memory" | "alphabet" | "output") {
                return Err(format!("line {}: unknown section [{}]", lineno + 1, section));
            }
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
        let (key, value) = (key.trim(), value.trim());
        let fail = |what: &str| format!("line {}: {what}", lineno + 1);

        match (section.as_str(), key) {
            ("memory", "preset") => {
                mem = match value {
                    "paper-2010" => MemoryParams::paper_2010(),
                    "perfect" => MemoryParams::perfect(),
                    other => return Err(fail(&format!("unknown preset '{other}'"))),
                };
                losses = mem.losses;
            }
            ("memory", "z2") => mem.z2 = parse_f64(value, &fail)?,
            ("memory", "kappa") => mem.kappa = parse_f64(value, &fail)?,
            ("memory", "g") => g_explicit = Some(parse_f64(value, &fail)?),
            ("memory", "var_xa_init") => mem.var_xa_init = parse_f64(value, &fail)?,
            ("memory", "var_pa_init") => mem.var_pa_init = parse_f64(value, &fail)?,
            ("memory", "var_sx") => mem.var_sx = parse_f64(value, &fail)?,
            ("memory", "var_sp") => mem.var_sp = parse_f64(value, &fail)?,
            ("memory", "eta_loss") => losses.eta_loss = parse_f64(value, &fail)?,
            ("memory", "eta_ent") => losses.eta_ent = parse_f64(value, &fail)?,
            ("memory", "eta_det") => losses.eta_det = parse_f64(value, &fail)?,
            ("alphabet", "d_max") => {
                config.d_max = value
                    .split(',')
                    .map(|v| parse_f64(v.trim(), &fail))
                    .collect::<Result<_, _>>()?;
            }
            ("alphabet", "s") => config.s = parse_f64(value, &fail)?,
            ("alphabet", "phases") => {
                config.phases = if let Some(n) = value.strip_prefix("continuous:") {
                    let samples = n
                        .trim()
                        .parse::<usize>()
                        .map_err(|_| fail("invalid sample count"))?;
                    PhaseSet::Continuous { samples }
                } else {
                    PhaseSet::Discrete(
                        value
                            .split(',')
                            .map(|v| parse_f64(v.trim(), &fail))
                            .collect::<Result<_, _>>()?,
                    )
                };
            }
            ("output", "dir") => config.out_dir = PathBuf::from(value),
            ("output", "format") => {
                config.format = match value {
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::Json,
                    other => return Err(fail(&format!("unknown format '{other}'"))),
                };
            }
            ("output", "seed") => {
                config.seed = value.parse::<u64>().map_err(|_| fail("invalid seed"))?;
            }
            (sec, key) => {
                return Err(fail(&format!("unknown key '{key}' in section [{sec}]")));
            }
        }
    }

    let losses = LossBudget::new(losses.eta_loss, losses.eta_ent, losses.eta_det)
        .map_err(|e| e.to_string())?;
    let g = g_explicit.unwrap_or_else(|| (1.0 - 1.0 / mem.z2).sqrt());
    config.memory = MemoryParams::new(
        mem.z2,
        mem.kappa,
        g,
        mem.var_xa_init,
        mem.var_pa_init,
        mem.var_sx,
        mem.var_sp,
        losses,
    )
    .map_err(|e| e.to_string())?;
    config.validate()?;
    Ok(config)
}

fn parse_f64(value: &str, fail: &dyn Fn(&str) -> String) -> Result<f64, String> {
    value
        .parse::<f64>()
        .map_err(|_| fail(&format!("invalid number '{value}'")))
}
