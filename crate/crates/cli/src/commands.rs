use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use pracsim::config::{parse_timing_file, ConfigFile};
use pracsim::controller::{run_with, RunOptions};
use pracsim::experiments::{self, SweepParam, SweepSpec};
use pracsim::stats::log_rbmpki_correlation;
use pracsim::trace::{self, MixedParams, Trace};
use pracsim::{CoreModel, PolicyKind, Ps, TimingParams, TimingPreset};

use crate::output;
use crate::CliError;

pub struct Context {
    pub seed: u64,
    pub config: Option<PathBuf>,
}

impl Context {
    fn config_file(&self) -> Result<ConfigFile, CliError> {
        match &self.config {
            Some(path) => ConfigFile::parse(&read(path)?).map_err(|e| at(path, e)),
            None => Ok(ConfigFile::default()),
        }
    }
}

fn at(path: &Path, e: pracsim::Error) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

fn load_trace(path: &Path) -> Result<Trace, CliError> {
    let mut t = trace::parse(&read(path)?).map_err(|e| at(path, e))?;
    t.name = path.display().to_string();
    Ok(t)
}

/// `default` / `prac` name a preset; anything else must be a readable
/// timing file.
fn resolve_timing(spec: &str) -> Result<TimingParams, CliError> {
    if let Ok(preset) = spec.parse::<TimingPreset>() {
        return Ok(TimingParams::preset(preset));
    }
    let path = Path::new(spec);
    if !path.is_file() {
        return Err(CliError::Usage(format!(
            "invalid value {spec:?} for --timing: expected default, prac, or a timing file"
        )));
    }
    parse_timing_file(&read(path)?).map_err(|e| at(path, e))
}

fn ns(flag: &str, v: f64) -> Result<Ps, CliError> {
    if v.is_finite() {
        Ok(Ps::from_ns_f64(v))
    } else {
        Err(CliError::Usage(format!("--{flag} must be a finite number of nanoseconds")))
    }
}

pub struct SimulateOpts {
    pub trace: PathBuf,
    pub timing: Option<String>,
    pub policy: Option<PolicyKind>,
    pub core: Option<CoreModel>,
    pub out: PathBuf,
    pub log_commands: Option<PathBuf>,
    pub completions: Option<PathBuf>,
}

pub fn simulate(ctx: &Context, o: SimulateOpts) -> Result<(), CliError> {
    let timing = o.timing.as_deref().map(resolve_timing).transpose()?;
    let file = ctx.config_file()?;
    let trace = load_trace(&o.trace)?;
    let mut config = file.build(timing, o.policy).map_err(CliError::from)?;
    if let Some(model) = o.core {
        config.core.model = model;
    }
    let out = run_with(
        &config,
        &trace,
        RunOptions {
            record_completions: o.completions.is_some(),
            log_commands: o.log_commands.is_some(),
        },
    )
    .map_err(|e| at(&o.trace, e))?;
    let json = serde_json::to_string_pretty(&out.report.summary()).expect("report serializes");
    write(&o.out, &(json + "\n"))?;
    if let Some(path) = &o.log_commands {
        let text: String = out.commands.iter().map(|c| format!("{c}\n")).collect();
        write(path, &text)?;
    }
    if let Some(path) = &o.completions {
        write(path, &output::completions_csv(&out.completions, config.timing.clock_mhz))?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn sweep(
    _ctx: &Context,
    param: SweepParam,
    from: f64,
    to: f64,
    step: f64,
    base: TimingPreset,
    reduce_rcd_rtp: bool,
    out: &Path,
) -> Result<(), CliError> {
    let spec = SweepSpec {
        param,
        from: ns("from", from)?,
        to: ns("to", to)?,
        step: ns("step", step)?,
        base,
        reduce_rcd_rtp,
    };
    let grid = spec.grid()?;
    let rows = grid
        .par_iter()
        .map(|&v| experiments::sweep_point(&spec, v))
        .collect::<pracsim::Result<Vec<_>>>()?;
    write(out, &output::sweep_csv(&rows))
}

pub fn compare_prac(
    ctx: &Context,
    traces: &[PathBuf],
    policy: Option<PolicyKind>,
    out: &Path,
) -> Result<(), CliError> {
    let base = ctx.config_file()?.build(None, policy)?;
    let loaded = traces.iter().map(|p| load_trace(p)).collect::<Result<Vec<_>, _>>()?;
    let rows = loaded
        .par_iter()
        .zip(traces.par_iter())
        .map(|(t, path)| {
            experiments::compare_prac(&base, t)
                .map(|c| (t.name.clone(), c))
                .map_err(|e| at(path, e))
        })
        .collect::<Result<Vec<_>, _>>()?;
    write(out, &output::compare_prac_csv(&rows))?;

    let rbmpki: Vec<f64> = rows.iter().map(|(_, c)| c.rbmpki_default).collect();
    let oh: Vec<f64> = rows.iter().map(|(_, c)| c.comparison.overhead).collect();
    if rbmpki.iter().filter(|&&r| r > 0.0).count() >= 3 {
        match log_rbmpki_correlation(&rbmpki, &oh) {
            Ok(c) => println!("pearson_r(log rbmpki, oh_frac) = {} over {} traces", c.r, c.used),
            Err(e) => eprintln!("pracsim: correlation not reported: {e}"),
        }
    }
    Ok(())
}

pub fn compare_policies(ctx: &Context, trace: &Path, timing: &str, out: &Path) -> Result<(), CliError> {
    let timing = resolve_timing(timing)?;
    let base = ctx.config_file()?.build(Some(timing), None)?;
    let t = load_trace(trace)?;
    let rows = experiments::compare_policies(&base, &t).map_err(|e| at(trace, e))?;
    write(out, &output::compare_policies_csv(&rows))
}

pub fn gen_sbdr(ctx: &Context, pairs: usize, bank: usize, row_a: u64, row_b: u64, out: &Path) -> Result<(), CliError> {
    let mapping = ctx.config_file()?.build(None, None)?.mapping;
    let t = trace::gen_sbdr(pairs, bank, row_a, row_b, &mapping)?;
    write(out, &t.render())
}

pub fn gen_mixed(
    ctx: &Context,
    n: usize,
    miss_ratio: f64,
    banks: usize,
    write_ratio: f64,
    nonmem_max: u64,
    out: &Path,
) -> Result<(), CliError> {
    let mapping = ctx.config_file()?.build(None, None)?.mapping;
    let p = MixedParams {
        write_ratio,
        nonmem_max,
        ..MixedParams::new(n, miss_ratio, banks, ctx.seed)
    };
    let t = trace::gen_mixed(&p, &mapping)?;
    write(out, &t.render())
}
