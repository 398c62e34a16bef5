use proptest::prelude::*;

use pracsim::checker::check_log;
use pracsim::controller::{run, run_with, CoreModel, RunOptions, SimConfig};
use pracsim::experiments::{measure_sbdr, sweep_point, SweepParam, SweepSpec};
use pracsim::mapping::AddressMapping;
use pracsim::policy::{PolicyConfig, PolicyKind};
use pracsim::stats::sbdr_oracle;
use pracsim::timing::{ns_to_cycles, Ps, TimingParams, TimingPreset};
use pracsim::trace::{gen_mixed, MixedParams};
use pracsim::AccessClass;

fn timing_table() -> impl Strategy<Value = TimingParams> {
    // tenths of a nanosecond
    (
        (50i64..500, 50i64..500, 50i64..300, 50i64..300),
        (20i64..150, 20i64..400, 0i64..60, 50i64..300, 0i64..60),
        prop::sample::select(vec![1600u32, 2400, 3200]),
    )
        .prop_map(|((ras, rp, rcd, cl), (rtp, wr, ccdl, cwl, bl), clock)| {
            let p = |tenths: i64| Ps::from_ps(tenths * 100);
            TimingParams {
                t_ras: p(ras),
                t_rp: p(rp),
                t_rc: p(ras + rp),
                t_rcd: p(rcd),
                t_cl: p(cl),
                t_rtp: p(rtp),
                t_wr: p(wr),
                t_ccdl: p(ccdl),
                t_cwl: p(cwl),
                t_bl: p(bl),
                clock_mhz: clock,
            }
        })
}

fn policy() -> impl Strategy<Value = PolicyKind> {
    prop::sample::select(PolicyKind::ALL.to_vec())
}

fn core() -> impl Strategy<Value = CoreModel> {
    prop::sample::select(vec![CoreModel::Blocking, CoreModel::Streaming])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_tables_produce_legal_logs(
        t in timing_table(),
        kind in policy(),
        model in core(),
        miss in 0.0f64..=1.0,
        writes in 0.0f64..=0.5,
        banks in 1usize..6,
        seed in any::<u64>(),
    ) {
        let m = AddressMapping::default();
        let p = MixedParams { write_ratio: writes, nonmem_max: 40, ..MixedParams::new(400, miss, banks, seed) };
        let trace = gen_mixed(&p, &m).unwrap();
        let cfg = SimConfig::default()
            .with_timing(t)
            .with_policy(PolicyConfig::preset(kind))
            .with_core_model(model);
        let out = run_with(&cfg, &trace, RunOptions { record_completions: true, log_commands: true }).unwrap();
        let v = check_log(&out.commands, &t.cycles().unwrap());
        prop_assert!(v.is_empty(), "{}", v[0]);
        prop_assert_eq!(out.completions.len(), trace.len());
        prop_assert!(out.completions.iter().all(|c| c.latency_cycles() > 0));
    }

    #[test]
    fn runs_are_deterministic(kind in policy(), miss in 0.0f64..=1.0, seed in any::<u64>()) {
        let m = AddressMapping::default();
        let p = MixedParams { write_ratio: 0.2, ..MixedParams::new(500, miss, 4, seed) };
        let trace = gen_mixed(&p, &m).unwrap();
        let cfg = SimConfig::default().with_policy(PolicyConfig::preset(kind));
        prop_assert_eq!(run(&cfg, &trace).unwrap(), run(&cfg, &trace).unwrap());
        prop_assert_eq!(gen_mixed(&p, &m).unwrap().render(), trace.render());
    }

    /// SBDR period equals the oracle evaluated on cycle-quantized
    /// parameters; against the unquantized oracle it is off by under two
    /// clocks (two ceilings per period).
    #[test]
    fn sbdr_matches_quantized_oracle(
        param in prop::sample::select(vec![SweepParam::TRp, SweepParam::TRas]),
        base in prop::sample::select(vec![TimingPreset::DefaultDdr5_4800, TimingPreset::PracDdr5_4800]),
        reduce in any::<bool>(),
        tenths in 100i64..500,
    ) {
        let spec = SweepSpec { param, from: Ps::from_ns(10), to: Ps::from_ns(50), step: Ps::from_ns(1), base, reduce_rcd_rtp: reduce };
        let row = sweep_point(&spec, Ps::from_ps(tenths * 100)).unwrap();
        let p = spec.point_params(row.value);
        let c = |v: Ps| ns_to_cycles(v, p.clock_mhz).unwrap();
        prop_assert_eq!(row.period_cycles, c(p.t_ras).max(c(p.t_rcd) + c(p.t_rtp)) + c(p.t_rp));
        prop_assert_eq!(row.period_oracle, sbdr_oracle(&p));
        let err = row.error_ps_mhz();
        prop_assert!((0..2_000_000).contains(&err), "error {} clocks", err as f64 / 1e6);
    }
}

/// With gaps long enough that no earlier command constrains the next
/// request, each latency is exactly its class formula.
#[test]
fn latency_decomposition_without_carryover() {
    let m = AddressMapping::default();
    for t in [TimingParams::default_ddr5_4800(), TimingParams::prac_ddr5_4800()] {
        let c = t.cycles().unwrap();
        let p = MixedParams {
            nonmem_max: 0,
            ..MixedParams::new(3000, 0.5, 3, 9)
        };
        let mut trace = gen_mixed(&p, &m).unwrap();
        for r in &mut trace.requests {
            r.nonmem = 2000;
        }
        let cfg = SimConfig::default().with_timing(t);
        let out = run_with(&cfg, &trace, RunOptions { record_completions: true, log_commands: false }).unwrap();
        for rec in &out.completions {
            let want = match rec.class {
                AccessClass::Hit => c.cl,
                AccessClass::Empty => c.rcd + c.cl,
                AccessClass::Miss => c.rp + c.rcd + c.cl,
            };
            assert_eq!(rec.latency_cycles(), want, "request {} ({})", rec.index, rec.class);
        }
    }
}

#[test]
fn sbdr_period_floor_is_trcd_plus_trtp() {
    // tRAS below tRCD + tRTP leaves the period unchanged
    let mut p = TimingParams::default_ddr5_4800();
    let floor = measure_sbdr(&p, 16).unwrap().period_cycles;
    p.t_ras = Ps::from_ns(20);
    p.t_rc = p.t_ras + p.t_rp;
    let low = measure_sbdr(&p, 16).unwrap().period_cycles;
    let c = |v: Ps| ns_to_cycles(v, 2400).unwrap();
    assert_eq!(low, c(p.t_rcd) + c(p.t_rtp) + c(p.t_rp));
    assert!(low < floor);
}

#[test]
fn sweep_grid_is_within_two_clocks_everywhere() {
    for base in [TimingPreset::DefaultDdr5_4800, TimingPreset::PracDdr5_4800] {
        for (param, reduce) in [(SweepParam::TRp, false), (SweepParam::TRas, false), (SweepParam::TRas, true)] {
            let spec = SweepSpec {
                param,
                from: Ps::from_ns(16),
                to: Ps::from_ns(36),
                step: Ps::from_ps(500),
                base,
                reduce_rcd_rtp: reduce,
            };
            for row in pracsim::experiments::run_sweep(&spec).unwrap() {
                assert!(row.within_clocks(2), "{param} {} under {base}: {}", row.value, row.error_ps_mhz());
            }
        }
    }
}
