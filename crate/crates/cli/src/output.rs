//! CSV rendering. Floats use Rust's shortest round-trip form, so output is
//! byte-stable for identical inputs.

use std::fmt::Write as _;

use pracsim::controller::CompletionRecord;
use pracsim::experiments::{PolicyRow, PracComparison, SweepRow};

pub const SWEEP_HEADER: &str = "param,value_ns,period_ns_simulated,period_ns_oracle";
pub const COMPARE_PRAC_HEADER: &str = "trace,policy,t_default_cycles,t_prac_cycles,oh_frac,rbmpki_default";
pub const COMPARE_POLICIES_HEADER: &str =
    "policy,hit_ratio,empty_ratio,miss_ratio,rbmpki,total_core_cycles,cycles_norm_open";
pub const COMPLETIONS_HEADER: &str = "index,class,latency_ns,premature";

fn csv(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut s = String::from(header);
    s.push('\n');
    for r in rows {
        s.push_str(&r);
        s.push('\n');
    }
    s
}

/// Quotes a field only when it needs it.
fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    csv(
        SWEEP_HEADER,
        rows.iter().map(|r| {
            format!(
                "{},{},{},{}",
                r.param,
                r.value,
                r.period_ns_simulated,
                r.period_oracle
            )
        }),
    )
}

pub fn compare_prac_csv(rows: &[(String, PracComparison)]) -> String {
    csv(
        COMPARE_PRAC_HEADER,
        rows.iter().map(|(name, c)| {
            format!(
                "{},{},{},{},{},{}",
                field(name),
                c.policy,
                c.comparison.t_default,
                c.comparison.t_prac,
                c.comparison.overhead,
                c.rbmpki_default
            )
        }),
    )
}

pub fn compare_policies_csv(rows: &[PolicyRow]) -> String {
    csv(
        COMPARE_POLICIES_HEADER,
        rows.iter().map(|r| {
            format!(
                "{},{},{},{},{},{},{}",
                r.policy, r.hit_ratio, r.empty_ratio, r.miss_ratio, r.rbmpki, r.total_core_cycles, r.cycles_norm_open
            )
        }),
    )
}

pub fn completions_csv(records: &[CompletionRecord], clock_mhz: u32) -> String {
    let mut s = String::from(COMPLETIONS_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(s, "{},{},{},{}", r.index, r.class, r.latency_ns(clock_mhz), r.premature);
    }
    s
}
