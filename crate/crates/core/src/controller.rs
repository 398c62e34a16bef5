//! The memory controller and the trace-driven run loop.
//!
//! Requests are serviced one at a time, in order. For each request the
//! controller first retires any idle-timer precharges that fell due before
//! the request arrived, then issues the minimal command sequence for the
//! request's row-buffer class (RD/WR; ACT+RD/WR; PRE+ACT+RD/WR), each at
//! its earliest legal tick. Ticks are DRAM command-clock cycles.

use std::str::FromStr;

use crate::dram::{AccessClass, BankState, Command, IssuedCommand, Tick};
use crate::error::{Error, Result};
use crate::mapping::AddressMapping;
use crate::policy::{Outcome, PolicyConfig, PolicyKind, PolicyScope, PolicyState};
use crate::stats::SimReport;
use crate::timing::{TimingCycles, TimingParams};
use crate::trace::{MemRequest, Op, Trace};

/// How the core issues requests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CoreModel {
    /// Each request waits for the previous one's data.
    #[default]
    Blocking,
    /// The next request is handed to the controller as soon as the previous
    /// one's column command issues. Used for the SBDR microbenchmark, whose
    /// back-to-back accesses expose the ACT-to-ACT critical path.
    Streaming,
}

impl FromStr for CoreModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "blocking" => Ok(CoreModel::Blocking),
            "streaming" => Ok(CoreModel::Streaming),
            other => Err(Error::InvalidArgument(format!(
                "unknown core model {other:?} (expected blocking or streaming)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CoreConfig {
    pub model: CoreModel,
    /// Core cycles per non-memory instruction.
    pub cpi_base: u32,
    pub core_clock_mhz: u32,
}

impl Default for CoreConfig {
    fn default() -> Self {
        CoreConfig {
            model: CoreModel::Blocking,
            cpi_base: 1,
            core_clock_mhz: 4800,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimConfig {
    pub timing: TimingParams,
    pub policy: PolicyConfig,
    pub mapping: AddressMapping,
    pub core: CoreConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            timing: TimingParams::default_ddr5_4800(),
            policy: PolicyConfig::preset(PolicyKind::Open),
            mapping: AddressMapping::default(),
            core: CoreConfig::default(),
        }
    }
}

impl SimConfig {
    pub fn with_timing(mut self, timing: TimingParams) -> Self {
        self.timing = timing;
        self
    }

    pub fn with_policy(mut self, policy: PolicyConfig) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_core_model(mut self, model: CoreModel) -> Self {
        self.core.model = model;
        self
    }

    pub fn banks(&self) -> usize {
        self.mapping.total_banks()
    }

    pub fn validate(&self) -> Result<()> {
        self.timing.cycles()?;
        self.policy.validate()?;
        if self.core.cpi_base == 0 {
            return Err(Error::InvalidConfig("cpi_base must be positive".into()));
        }
        if self.core.core_clock_mhz == 0 {
            return Err(Error::InvalidConfig("core_clock_mhz must be positive".into()));
        }
        Ok(())
    }
}

/// What the controller reports for each serviced request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompletionRecord {
    pub index: usize,
    pub class: AccessClass,
    pub start: Tick,
    /// Tick of the RD/WR command.
    pub column_issue: Tick,
    /// First read data, or write acceptance.
    pub data: Tick,
    pub premature: bool,
}

impl CompletionRecord {
    pub fn latency_cycles(&self) -> u64 {
        self.data - self.start
    }

    pub fn latency_ns(&self, clock_mhz: u32) -> f64 {
        crate::timing::cycles_to_ns(self.latency_cycles(), clock_mhz)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct BankSlot {
    state: BankState,
    /// Completion tick of the last column access to the open row.
    idle_from: Option<Tick>,
    /// The last precharge was issued by the idle timer.
    idle_closed: bool,
}

#[derive(Debug, Clone)]
pub struct Controller {
    timing: TimingCycles,
    policy: PolicyConfig,
    mapping: AddressMapping,
    banks: Vec<BankSlot>,
    policy_states: Vec<PolicyState>,
    log: Option<Vec<IssuedCommand>>,
}

impl Controller {
    pub fn new(config: &SimConfig) -> Result<Self> {
        config.validate()?;
        let banks = config.banks();
        let scopes = match config.policy.scope {
            PolicyScope::Channel => 1,
            PolicyScope::Bank => banks,
        };
        Ok(Controller {
            timing: config.timing.cycles()?,
            policy: config.policy,
            mapping: config.mapping.clone(),
            banks: vec![BankSlot::default(); banks],
            policy_states: vec![PolicyState::new(&config.policy); scopes],
            log: None,
        })
    }

    /// Starts recording every issued command.
    pub fn enable_command_log(&mut self) {
        self.log.get_or_insert_with(Vec::new);
    }

    pub fn command_log(&self) -> Option<&[IssuedCommand]> {
        self.log.as_deref()
    }

    pub fn take_command_log(&mut self) -> Vec<IssuedCommand> {
        self.log.take().unwrap_or_default()
    }

    pub fn timing(&self) -> &TimingCycles {
        &self.timing
    }

    pub fn bank_state(&self, bank: usize) -> &BankState {
        &self.banks[bank].state
    }

    /// Policy state governing `bank`.
    pub fn policy_state(&self, bank: usize) -> &PolicyState {
        &self.policy_states[self.scope_index(bank)]
    }

    fn scope_index(&self, bank: usize) -> usize {
        if self.policy_states.len() == 1 {
            0
        } else {
            bank
        }
    }

    fn issue(&mut self, bank: usize, cmd: Command, not_before: Tick) -> Result<Tick> {
        let state = &self.banks[bank].state;
        let at = state.earliest_issue(&cmd, &self.timing, not_before)?;
        self.banks[bank].state = state.apply(&cmd, at, &self.timing)?;
        if let Some(log) = self.log.as_mut() {
            log.push(IssuedCommand { tick: at, cmd });
        }
        Ok(at)
    }

    /// Closes every open row whose idle deadline has passed by `now`. Each
    /// PRE issues at the earliest legal tick at or after its deadline.
    pub fn advance_idle(&mut self, now: Tick) -> Result<Vec<IssuedCommand>> {
        let mut issued = Vec::new();
        for bank in 0..self.banks.len() {
            let slot = self.banks[bank];
            let (Some(_), Some(from)) = (slot.state.open_row, slot.idle_from) else {
                continue;
            };
            let Some(delay) = self.policy_state(bank).idle_deadline(&self.policy) else {
                continue;
            };
            let deadline = from + delay;
            if deadline > now {
                continue;
            }
            let cmd = Command::Pre { bank };
            let at = self.issue(bank, cmd, deadline)?;
            let slot = &mut self.banks[bank];
            slot.idle_from = None;
            slot.idle_closed = true;
            issued.push(IssuedCommand { tick: at, cmd });
        }
        Ok(issued)
    }

    /// Services one request arriving at `arrival`.
    pub fn service(&mut self, index: usize, request: &MemRequest, arrival: Tick) -> Result<CompletionRecord> {
        let decoded = self
            .mapping
            .decode(request.address)
            .ok_or(Error::UndecodableAddress {
                index,
                line: None,
                address: request.address,
            })?;
        let bank = self.mapping.flat_bank(&decoded);
        let (row, col) = (decoded.row, decoded.column);

        self.advance_idle(arrival)?;

        let slot = self.banks[bank];
        let class = slot.state.classify(row);
        let premature =
            class == AccessClass::Empty && slot.idle_closed && slot.state.last_closed_row == Some(row);

        let mut now = arrival;
        if class == AccessClass::Miss {
            now = self.issue(bank, Command::Pre { bank }, now)?;
            self.banks[bank].idle_closed = false;
        }
        if class != AccessClass::Hit {
            now = self.issue(bank, Command::Act { bank, row }, now)?;
        }
        let column_cmd = match request.op {
            Op::Read => Command::Rd { bank, col },
            Op::Write => Command::Wr { bank, col },
        };
        let column_issue = self.issue(bank, column_cmd, now)?;
        let data = match request.op {
            Op::Read => column_issue + self.timing.cl,
            // posted: acknowledged one cycle after the WR command
            Op::Write => column_issue + 1,
        };
        self.banks[bank].idle_from = Some(data);

        let scope = self.scope_index(bank);
        self.policy_states[scope].record_outcome(&self.policy, Outcome { class, premature });

        Ok(CompletionRecord {
            index,
            class,
            start: arrival,
            column_issue,
            data,
            premature,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    pub record_completions: bool,
    pub log_commands: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub report: SimReport,
    pub completions: Vec<CompletionRecord>,
    pub commands: Vec<IssuedCommand>,
}

fn scale_ceil(value: u64, num: u32, den: u32) -> u64 {
    (value as u128 * num as u128).div_ceil(den as u128) as u64
}

pub fn run(config: &SimConfig, trace: &Trace) -> Result<SimReport> {
    run_with(config, trace, RunOptions::default()).map(|o| o.report)
}

/// Runs `trace` through a fresh controller. Core time advances by
/// `nonmem * cpi_base` core cycles before each request; under the blocking
/// model it then waits for the request's data.
pub fn run_with(config: &SimConfig, trace: &Trace, opts: RunOptions) -> Result<RunOutput> {
    if trace.is_empty() {
        return Err(Error::InvalidArgument("trace is empty".into()));
    }
    let mut ctrl = Controller::new(config)?;
    if opts.log_commands {
        ctrl.enable_command_log();
    }
    let dram_mhz = config.timing.clock_mhz;
    let core_mhz = config.core.core_clock_mhz;
    let cpi = config.core.cpi_base as u64;

    let mut report = SimReport {
        dram_clock_mhz: dram_mhz,
        ..Default::default()
    };
    let mut completions = Vec::new();
    let mut core_now: u64 = 0;
    let mut last_data: Tick = 0;

    for (index, req) in trace.requests.iter().enumerate() {
        core_now += req.nonmem * cpi;
        report.total_instructions += req.nonmem + 1;
        let arrival = scale_ceil(core_now, dram_mhz, core_mhz);

        let rec = ctrl.service(index, req, arrival).map_err(|e| match e {
            Error::UndecodableAddress { index, address, .. } => Error::UndecodableAddress {
                index,
                line: trace.source_line(index),
                address,
            },
            other => other,
        })?;

        let resume = match config.core.model {
            CoreModel::Blocking => rec.data,
            CoreModel::Streaming => rec.column_issue,
        };
        core_now = core_now.max(scale_ceil(resume, core_mhz, dram_mhz));
        last_data = last_data.max(rec.data);

        match req.op {
            Op::Read => report.reads += 1,
            Op::Write => report.writes += 1,
        }
        let lat = rec.latency_cycles();
        match rec.class {
            AccessClass::Hit => {
                report.hits += 1;
                report.latency_cycles_hit += lat;
            }
            AccessClass::Empty => {
                report.empties += 1;
                report.latency_cycles_empty += lat;
            }
            AccessClass::Miss => {
                report.misses += 1;
                report.latency_cycles_miss += lat;
            }
        }
        if rec.premature {
            report.premature_closes += 1;
        }
        if opts.record_completions {
            completions.push(rec);
        }
    }

    report.total_dram_cycles = last_data;
    report.total_core_cycles = core_now.max(scale_ceil(last_data, core_mhz, dram_mhz));
    report.policy_final_idle = ctrl.policy_state(0).current_idle;

    Ok(RunOutput {
        report,
        completions,
        commands: ctrl.take_command_log(),
    })
}
