//! Trace-driven DDR5 channel simulator.
//!
//! Models per-bank row-buffer timing under the DDR5-4800 Default and PRAC
//! (per-row activation counting) timing tables, with open, close and
//! adaptive idle-timer page policies. Everything runs in integer DRAM
//! command-clock cycles, so results are deterministic and exact.
//!
//! ```
//! use pracsim::{controller, mapping::AddressMapping, trace, SimConfig, TimingParams};
//!
//! let m = AddressMapping::default();
//! let sbdr = trace::gen_sbdr(100, 0, 1, 2, &m).unwrap();
//! let default = controller::run(&SimConfig::default(), &sbdr).unwrap();
//! let prac = controller::run(
//!     &SimConfig::default().with_timing(TimingParams::prac_ddr5_4800()),
//!     &sbdr,
//! )
//! .unwrap();
//! assert!(prac.total_core_cycles > default.total_core_cycles);
//! ```

pub mod checker;
pub mod config;
pub mod controller;
pub mod dram;
pub mod error;
pub mod experiments;
pub mod mapping;
pub mod policy;
pub mod stats;
pub mod timing;
pub mod trace;

pub use controller::{CoreModel, SimConfig};
pub use dram::AccessClass;
pub use error::{Error, Result};
pub use policy::{PolicyConfig, PolicyKind};
pub use stats::SimReport;
pub use timing::{Ps, TimingParams, TimingPreset};
