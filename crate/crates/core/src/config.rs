//! TOML configuration files.
//!
//! ```toml
//! [timing]
//! preset = "prac"        # optional base, individual keys override it
//! t_rp_ns = 30
//!
//! [policy]
//! kind = "adaptive"
//! win_size = 32
//!
//! [mapping]
//! order = ["column", "bank_group", "bank", "rank", "row"]
//! column_bits = 13
//!
//! [core]
//! model = "blocking"
//! cpi_base = 1
//! core_clock_mhz = 4800
//! ```

use serde::Deserialize;

use crate::controller::{CoreConfig, SimConfig};
use crate::error::{Error, Result};
use crate::mapping::{AddressMapping, Field};
use crate::policy::{PolicyConfig, PolicyKind};
use crate::timing::{Ps, TimingParams};

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TimingSection {
    pub preset: Option<String>,
    pub t_ras_ns: Option<f64>,
    pub t_rp_ns: Option<f64>,
    pub t_rc_ns: Option<f64>,
    pub t_rcd_ns: Option<f64>,
    pub t_cl_ns: Option<f64>,
    pub t_rtp_ns: Option<f64>,
    pub t_wr_ns: Option<f64>,
    pub t_ccdl_ns: Option<f64>,
    pub t_cwl_ns: Option<f64>,
    pub t_bl_ns: Option<f64>,
    pub clock_mhz: Option<u32>,
}

impl TimingSection {
    /// Applies this section on top of `base`, or on top of its own `preset`
    /// when one is named.
    pub fn resolve(&self, base: TimingParams) -> Result<TimingParams> {
        let mut p = match &self.preset {
            Some(name) => TimingParams::preset(name.parse()?),
            None => base,
        };
        let overrides = [
            ("t_ras", self.t_ras_ns),
            ("t_rp", self.t_rp_ns),
            ("t_rc", self.t_rc_ns),
            ("t_rcd", self.t_rcd_ns),
            ("t_cl", self.t_cl_ns),
            ("t_rtp", self.t_rtp_ns),
            ("t_wr", self.t_wr_ns),
            ("t_ccdl", self.t_ccdl_ns),
            ("t_cwl", self.t_cwl_ns),
            ("t_bl", self.t_bl_ns),
        ];
        for (name, v) in overrides {
            if let Some(ns) = v {
                if !ns.is_finite() {
                    return Err(Error::InvalidConfig(format!("{name}_ns is not a finite number")));
                }
                *p.field_mut(name).expect("known field") = Ps::from_ns_f64(ns);
            }
        }
        if let Some(c) = self.clock_mhz {
            p.clock_mhz = c;
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PolicySection {
    pub kind: Option<String>,
    pub win_size: Option<u32>,
    pub idle_page_rst_val: Option<u32>,
    pub opc_th: Option<u32>,
    pub ppc_th: Option<u32>,
    pub idle_min: Option<u32>,
    pub idle_max: Option<u32>,
    pub scope: Option<String>,
}

impl PolicySection {
    /// Starts from the preset of `kind` (or of this section's own `kind`,
    /// or open) and applies the individual keys.
    pub fn resolve(&self, kind: Option<PolicyKind>) -> Result<PolicyConfig> {
        let kind = match (kind, &self.kind) {
            (Some(k), _) => k,
            (None, Some(s)) => s.parse()?,
            (None, None) => PolicyKind::Open,
        };
        let mut c = PolicyConfig::preset(kind);
        if let Some(v) = self.win_size {
            c.win_size = v;
        }
        if let Some(v) = self.idle_page_rst_val {
            c.idle_page_rst_val = v;
        }
        if let Some(v) = self.opc_th {
            c.opc_th = v;
        }
        if let Some(v) = self.ppc_th {
            c.ppc_th = v;
        }
        if let Some(v) = self.idle_min {
            c.idle_min = v;
        }
        if let Some(v) = self.idle_max {
            c.idle_max = v;
        }
        if let Some(s) = &self.scope {
            c.scope = s.parse()?;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MappingSection {
    pub order: Option<Vec<String>>,
    pub column_bits: Option<u32>,
    pub bank_group_bits: Option<u32>,
    pub bank_bits: Option<u32>,
    pub rank_bits: Option<u32>,
    pub row_bits: Option<u32>,
}

impl MappingSection {
    pub fn resolve(&self) -> Result<AddressMapping> {
        let default = AddressMapping::default();
        let order: Vec<Field> = match &self.order {
            Some(names) => names.iter().map(|n| n.parse()).collect::<Result<_>>()?,
            None => default.layout().iter().map(|(f, _)| *f).collect(),
        };
        let layout = order
            .into_iter()
            .map(|f| {
                let bits = match f {
                    Field::Column => self.column_bits,
                    Field::BankGroup => self.bank_group_bits,
                    Field::Bank => self.bank_bits,
                    Field::Rank => self.rank_bits,
                    Field::Row => self.row_bits,
                };
                (f, bits.unwrap_or_else(|| default.bits(f)))
            })
            .collect();
        AddressMapping::new(layout)
    }
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CoreSection {
    pub model: Option<String>,
    pub cpi_base: Option<u32>,
    pub core_clock_mhz: Option<u32>,
}

impl CoreSection {
    pub fn resolve(&self) -> Result<CoreConfig> {
        let mut c = CoreConfig::default();
        if let Some(m) = &self.model {
            c.model = m.parse()?;
        }
        if let Some(v) = self.cpi_base {
            c.cpi_base = v;
        }
        if let Some(v) = self.core_clock_mhz {
            c.core_clock_mhz = v;
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub timing: Option<TimingSection>,
    pub policy: Option<PolicySection>,
    pub mapping: Option<MappingSection>,
    pub core: Option<CoreSection>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    /// Builds a full configuration. `timing` and `policy` replace the
    /// file's base choices when given; the file's individual policy keys
    /// still apply on top of the chosen policy preset.
    pub fn build(&self, timing: Option<TimingParams>, policy: Option<PolicyKind>) -> Result<SimConfig> {
        let timing = match (timing, &self.timing) {
            (Some(t), _) => t,
            (None, Some(s)) => s.resolve(TimingParams::default_ddr5_4800())?,
            (None, None) => TimingParams::default_ddr5_4800(),
        };
        let config = SimConfig {
            timing,
            policy: self.policy.clone().unwrap_or_default().resolve(policy)?,
            mapping: self.mapping.clone().unwrap_or_default().resolve()?,
            core: self.core.clone().unwrap_or_default().resolve()?,
        };
        config.validate()?;
        Ok(config)
    }
}

/// Reads a standalone timing table: either a `[timing]` section or the same
/// keys at top level.
pub fn parse_timing_file(text: &str) -> Result<TimingParams> {
    #[derive(Deserialize)]
    struct Wrapped {
        timing: TimingSection,
    }
    let section = match toml::from_str::<Wrapped>(text) {
        Ok(w) => w.timing,
        Err(_) => toml::from_str::<TimingSection>(text).map_err(|e| Error::InvalidConfig(e.to_string()))?,
    };
    let p = section.resolve(TimingParams::default_ddr5_4800())?;
    p.cycles()?;
    Ok(p)
}
