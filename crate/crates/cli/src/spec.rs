use std::path::PathBuf;

use anyhow::{bail, Context};
use forch_core::config::{check_doubling, InitialKind, Mode, RunConfig};
use forch_core::problems::{problem_from_config, Problem};
use forch_core::{Scheme, TimeSteppingConfig};

/// Default time step for stability runs when none is given.
const STABILITY_DT: f64 = 0.05;

/// A validated run request.
#[derive(Debug)]
pub struct RunSpec {
    pub mode: Mode,
    pub problem: Problem,
    pub n_list: Vec<usize>,
    pub stepping: TimeSteppingConfig,
    pub output: Option<PathBuf>,
    pub initial: InitialKind,
    pub seed: u64,
}

impl RunSpec {
    pub fn from_config(cfg: &RunConfig) -> anyhow::Result<Self> {
        let mode = cfg
            .mode
            .context("no mode selected (set `mode` in the config)")?;
        let problem = problem_from_config(cfg)?;
        let n_list = cfg.n_list.clone().unwrap_or_else(|| match mode {
            Mode::Convergence => vec![4, 8, 16, 32],
            _ => vec![16],
        });
        if n_list.is_empty() || n_list.contains(&0) {
            bail!("N list must be nonempty with positive entries");
        }
        if mode == Mode::Convergence {
            check_doubling(&n_list)?;
            if problem.exact.is_none() {
                bail!("convergence studies need a problem with an exact solution");
            }
        }
        let t_end = problem.t_end;
        let dt = match (cfg.dt, mode) {
            (Some(dt), _) => dt,
            // h/4 with h taken from the finest mesh, shared by every level
            (None, Mode::Convergence | Mode::Single) => {
                0.25 / *n_list.iter().max().expect("nonempty") as f64
            }
            (None, Mode::Stability) => STABILITY_DT.min(t_end),
        };
        let mut stepping = TimeSteppingConfig::new(dt, t_end)?;
        stepping.scheme = cfg.scheme.unwrap_or(Scheme::Picard);
        stepping.store_fields = false;
        stepping.num_steps()?;
        Ok(Self {
            mode,
            problem,
            n_list,
            stepping,
            output: cfg.output.as_ref().map(PathBuf::from),
            initial: cfg.initial.unwrap_or_default(),
            seed: cfg.seed.unwrap_or(0),
        })
    }
}
