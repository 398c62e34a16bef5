//! SBDR timing sweeps and Default-vs-PRAC / page-policy comparisons.

use std::fmt;
use std::str::FromStr;

use crate::controller::{run, run_with, CoreModel, RunOptions, SimConfig};
use crate::dram::AccessClass;
use crate::error::{Error, Result};
use crate::policy::{PolicyConfig, PolicyKind};
use crate::stats::{sbdr_oracle, ComparisonReport};
use crate::timing::{cycles_to_ns, Ps, TimingParams, TimingPreset};
use crate::trace::{gen_sbdr, Trace};

/// Iterations of the SBDR loop used to measure one sweep point.
pub const SBDR_PAIRS: usize = 32;

/// tRCD and tRTP used when their sum is cut to 16 ns for the tRAS sweep.
pub const REDUCED_T_RCD: Ps = Ps::from_ns(11);
pub const REDUCED_T_RTP: Ps = Ps::from_ns(5);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepParam {
    TRp,
    TRas,
}

impl SweepParam {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParam::TRp => "t_rp",
            SweepParam::TRas => "t_ras",
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t_rp" => Ok(SweepParam::TRp),
            "t_ras" => Ok(SweepParam::TRas),
            other => Err(Error::InvalidArgument(format!(
                "unknown sweep parameter {other:?} (expected t_rp or t_ras)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub from: Ps,
    pub to: Ps,
    pub step: Ps,
    pub base: TimingPreset,
    pub reduce_rcd_rtp: bool,
}

impl SweepSpec {
    /// Grid points `from, from + step, ...` up to and including `to`.
    pub fn grid(&self) -> Result<Vec<Ps>> {
        if self.step.0 <= 0 {
            return Err(Error::InvalidArgument(format!("step must be positive, got {}", self.step)));
        }
        if self.from > self.to {
            return Err(Error::InvalidArgument(format!(
                "empty range: from {} > to {}",
                self.from, self.to
            )));
        }
        if self.from.0 <= 0 {
            return Err(Error::InvalidArgument(format!("from must be positive, got {}", self.from)));
        }
        let mut out = Vec::new();
        let mut v = self.from;
        while v <= self.to {
            out.push(v);
            v = v + self.step;
        }
        Ok(out)
    }

    /// Timing table for one grid point. tRC follows `tRAS + tRP`, as it does
    /// in both presets.
    pub fn point_params(&self, value: Ps) -> TimingParams {
        let mut p = TimingParams::preset(self.base);
        if self.reduce_rcd_rtp {
            p.t_rcd = REDUCED_T_RCD;
            p.t_rtp = REDUCED_T_RTP;
        }
        match self.param {
            SweepParam::TRp => p.t_rp = value,
            SweepParam::TRas => p.t_ras = value,
        }
        p.t_rc = p.t_ras + p.t_rp;
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub param: SweepParam,
    pub value: Ps,
    pub period_cycles: u64,
    pub period_ns_simulated: f64,
    pub period_oracle: Ps,
    pub clock_mhz: u32,
}

impl SweepRow {
    /// Simulated minus oracle period, in picosecond-megahertz units (exact):
    /// one DRAM clock corresponds to 10^6.
    pub fn error_ps_mhz(&self) -> i128 {
        self.period_cycles as i128 * 1_000_000 - self.period_oracle.0 as i128 * self.clock_mhz as i128
    }

    /// |simulated - oracle| <= `clocks` DRAM cycles, evaluated exactly.
    pub fn within_clocks(&self, clocks: u32) -> bool {
        self.error_ps_mhz().abs() <= clocks as i128 * 1_000_000
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SbdrMeasurement {
    /// Steady-state spacing between consecutive completions.
    pub period_cycles: u64,
    /// Whether every spacing over the second half of the run was identical.
    pub steady: bool,
}

/// Runs the SBDR loop on the streaming core with the open policy and
/// returns the steady-state per-access period.
pub fn measure_sbdr(params: &TimingParams, pairs: usize) -> Result<SbdrMeasurement> {
    if pairs < 2 {
        return Err(Error::InvalidArgument("need at least two SBDR pairs".into()));
    }
    let config = SimConfig::default()
        .with_timing(*params)
        .with_policy(PolicyConfig::preset(PolicyKind::Open))
        .with_core_model(CoreModel::Streaming);
    let trace = gen_sbdr(pairs, 0, 1, 2, &config.mapping)?;
    let out = run_with(
        &config,
        &trace,
        RunOptions {
            record_completions: true,
            log_commands: false,
        },
    )?;
    let spacings: Vec<u64> = out
        .completions
        .windows(2)
        .map(|w| w[1].data - w[0].data)
        .collect();
    let tail = &spacings[spacings.len() / 2..];
    let period_cycles = *tail.last().expect("at least three completions");
    Ok(SbdrMeasurement {
        period_cycles,
        steady: tail.iter().all(|&s| s == period_cycles),
    })
}

pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.grid()?
        .into_iter()
        .map(|value| sweep_point(spec, value))
        .collect()
}

pub fn sweep_point(spec: &SweepSpec, value: Ps) -> Result<SweepRow> {
    let params = spec.point_params(value);
    let m = measure_sbdr(&params, SBDR_PAIRS)?;
    Ok(SweepRow {
        param: spec.param,
        value,
        period_cycles: m.period_cycles,
        period_ns_simulated: cycles_to_ns(m.period_cycles, params.clock_mhz),
        period_oracle: sbdr_oracle(&params),
        clock_mhz: params.clock_mhz,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PracComparison {
    pub policy: PolicyKind,
    pub comparison: ComparisonReport,
    pub rbmpki_default: f64,
}

/// Runs `trace` under the Default and PRAC presets with everything else in
/// `base` unchanged. Times are total core cycles.
pub fn compare_prac(base: &SimConfig, trace: &Trace) -> Result<PracComparison> {
    let d = run(&base.clone().with_timing(TimingParams::default_ddr5_4800()), trace)?;
    let p = run(&base.clone().with_timing(TimingParams::prac_ddr5_4800()), trace)?;
    Ok(PracComparison {
        policy: base.policy.kind,
        comparison: ComparisonReport::new(d.total_core_cycles, p.total_core_cycles)?,
        rbmpki_default: d.rbmpki(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyRow {
    pub policy: PolicyKind,
    pub hit_ratio: f64,
    pub empty_ratio: f64,
    pub miss_ratio: f64,
    pub rbmpki: f64,
    pub total_core_cycles: u64,
    /// Total cycles divided by the open policy's.
    pub cycles_norm_open: f64,
}

/// Runs `trace` under the open, adaptive and close presets, in that order.
pub fn compare_policies(base: &SimConfig, trace: &Trace) -> Result<Vec<PolicyRow>> {
    let reports = PolicyKind::ALL
        .into_iter()
        .map(|k| Ok((k, run(&base.clone().with_policy(PolicyConfig::preset(k)), trace)?)))
        .collect::<Result<Vec<_>>>()?;
    let open_cycles = reports[0].1.total_core_cycles as f64;
    Ok(reports
        .into_iter()
        .map(|(policy, r)| PolicyRow {
            policy,
            hit_ratio: r.ratio(AccessClass::Hit),
            empty_ratio: r.ratio(AccessClass::Empty),
            miss_ratio: r.ratio(AccessClass::Miss),
            rbmpki: r.rbmpki(),
            total_core_cycles: r.total_core_cycles,
            cycles_norm_open: r.total_core_cycles as f64 / open_cycles,
        })
        .collect())
}
