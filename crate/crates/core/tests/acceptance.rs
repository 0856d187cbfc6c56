//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod support;

use std::time::{Duration, Instant};

use iai_core::agents::AgentKind;
use iai_core::blanket::{conditional_mi, mini_env_dataset, CmiThresholds, MiniInputs};
use iai_core::envs::{
    homeogrid_s_drive, rollout, Dynamics, EnvSpec, GridSpec, HomeoGridEnv, Placement,
    SeasonSchedule, SeasonSpec,
};
use iai_core::harness::{
    binomial_upper_tail, entropy_by_position, goal_switch_probe, median, metrics_csv, sign_test,
    sweep_logs, sweep_to_dir, table_from_logs, verify_blanket, ExperimentConfig, METRICS_FILE,
};
use iai_core::mdp::{
    step_factored, Action, BoundaryState, ExternalState, FactoredState, Flux, InternalState, Pos,
    Tag,
};
use iai_core::rng::{self, purpose};
use rand::Rng;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn telescoping() -> Outcome {
    let start = Instant::now();
    let env = HomeoGridEnv::new(EnvSpec::homeogrid_s(), homeogrid_s_drive()).unwrap();
    let dm = env.drive();
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let mut rng = rng::stream(seed, 0, purpose::ENV);
        let mut picks = rng::stream(seed, 0, purpose::AGENT);
        let actions: Vec<Action> = (0..1000)
            .map(|_| Action::ALL[picks.random_range(0..Action::COUNT)])
            .collect();
        let states = rollout(&env, &env.reset(seed), actions, &mut rng).unwrap();
        let sum: f64 = states
            .windows(2)
            .map(|w| dm.homeostatic_reward(&w[0].internal, &w[1].internal).unwrap())
            .sum();
        let first = dm.drive(&states[0].internal).unwrap();
        let last = dm.drive(&states[states.len() - 1].internal).unwrap();
        worst = worst.max((sum - (first - last)).abs());
    }
    let elapsed = start.elapsed();
    check(
        worst < 1e-9 && within(elapsed, 10.0),
        format!("max |sum r - (d0 - dT)| = {worst:.3e} over 100 x 1000 steps, {elapsed:.2?}"),
    )
}

fn small_grid(leak: f64) -> HomeoGridEnv {
    let base = EnvSpec::homeogrid_s();
    let spec = EnvSpec {
        grid: GridSpec {
            rows: 3,
            cols: 3,
            start: Pos::new(1, 1),
            seasons: vec![SeasonSpec {
                resources: vec![
                    Placement { row: 0, col: 0, tag: Tag::Food },
                    Placement { row: 2, col: 2, tag: Tag::Water },
                ],
                ambient_baseline: 37.0,
            }],
            ..base.grid
        },
        schedule: SeasonSchedule { period: 500, order: vec![0] },
        dynamics: Dynamics { leak: 0.0, ..base.dynamics },
    };
    let env = HomeoGridEnv::new(spec, homeogrid_s_drive()).unwrap();
    if leak > 0.0 {
        env.make_coupled_variant(leak).unwrap()
    } else {
        env
    }
}

/// Every external state of the 3x3 world: each cell any tag, the ambient field
/// implied by the shade cells, agent anywhere.
fn count_perturbation_mismatches(env: &HomeoGridEnv) -> (u64, u64) {
    let grid = &env.spec().grid;
    let cells = grid.rows * grid.cols;
    let mut base = env.reset(0);
    base.internal = InternalState::new(vec![0.6, 0.7, 36.2]);
    base.boundary = BoundaryState {
        sensed_ambient: 37.3,
        ingestion: Flux { food: 0.08, water: 0.0 },
    };
    let reference: Vec<InternalState> = Action::ALL
        .iter()
        .map(|&a| step_factored(env, &base, a, &mut rng::stream(0, 0, purpose::PROBE)).unwrap().internal)
        .collect();
    let layouts = 4u32.pow(cells as u32);
    let results: Vec<(u64, u64)> = (0..layouts)
        .into_par_iter()
        .map(|code| {
            let mut resources = Vec::with_capacity(cells);
            let mut c = code;
            for _ in 0..cells {
                resources.push(Tag::ALL[(c % 4) as usize]);
                c /= 4;
            }
            let centre = (grid.cols as f64 - 1.0) / 2.0;
            let ambient: Vec<f64> = resources
                .iter()
                .enumerate()
                .map(|(idx, tag)| {
                    let shade = if *tag == Tag::Shade { grid.shade_offset } else { 0.0 };
                    37.0 + grid.ambient_gradient * ((idx % grid.cols) as f64 - centre) - shade
                })
                .collect();
            let mut state = FactoredState {
                external: ExternalState { resources, ambient, ..base.external.clone() },
                ..base.clone()
            };
            let mut rng = rng::stream(0, 0, purpose::PROBE);
            let (mut cases, mut bad) = (0, 0);
            for row in 0..grid.rows {
                for col in 0..grid.cols {
                    state.external.agent_pos = Pos::new(row, col);
                    for (a, expected) in Action::ALL.iter().zip(&reference) {
                        let next = step_factored(env, &state, *a, &mut rng).unwrap();
                        cases += 1;
                        if !next.internal.bitwise_eq(expected) {
                            bad += 1;
                        }
                    }
                }
            }
            (cases, bad)
        })
        .collect();
    results.iter().fold((0, 0), |acc, r| (acc.0 + r.0, acc.1 + r.1))
}

fn structural_invariance() -> Outcome {
    let start = Instant::now();
    let (cases, bad) = count_perturbation_mismatches(&small_grid(0.0));
    let elapsed = start.elapsed();
    let (_, coupled_bad) = count_perturbation_mismatches(&small_grid(0.2));
    check(
        cases == 4u64.pow(9) * 9 * 6 && bad == 0 && coupled_bad >= 1 && within(elapsed, 5.0),
        format!("{cases} factored cases, {bad} mismatches in {elapsed:.2?}; coupled mismatches {coupled_bad}"),
    )
}

fn cmi_oracle(cfg: &ExperimentConfig) -> Outcome {
    let start = Instant::now();
    let probe = CmiThresholds { tol_lo: 0.0, tol_hi: 0.0 };
    let mut worst: f64 = 0.0;
    for leak in [0.0, cfg.blanket.coupled_leak] {
        let ds = mini_env_dataset(&MiniInputs::default(), leak).unwrap();
        let plug_in = conditional_mi(&ds, probe).unwrap().cmi_nats;
        worst = worst.max((plug_in - support::brute_force_cmi(&ds)).abs());
    }
    let report = verify_blanket(cfg).unwrap();
    let elapsed = start.elapsed();
    let (f, c) = (report.factored.cmi.cmi_nats, report.coupled.cmi.cmi_nats);
    let b = &cfg.blanket;
    check(
        worst < 1e-12
            && b.samples == 100_000
            && f < b.tol_lo
            && c > b.tol_hi
            && c >= 5.0 * f
            && within(elapsed, 60.0),
        format!(
            "oracle gap {worst:.1e}; factored {f:.5} < {:.5}, coupled {c:.5} > {:.5}, ratio {:.1}, {elapsed:.2?}",
            b.tol_lo, b.tol_hi, c / f
        ),
    )
}

fn jacobian_blocks(cfg: &ExperimentConfig) -> Outcome {
    let report = verify_blanket(cfg).unwrap();
    let f = report.factored.max_internal_from_external.max(report.factored.max_external_from_internal);
    let s = report.coupled.core_from_ambient;
    check(
        f == 0.0 && (s - 0.2).abs() < 1e-6,
        format!("factored forbidden max {f}, coupled d core'/d ambient = {s:.9}"),
    )
}

fn chain_oracle() -> Outcome {
    let start = Instant::now();
    let dm = support::chain_drive();
    let (alpha, gamma) = (0.5, 0.9);
    let optimal = support::value_iteration(&dm, gamma);
    let q = support::train_chain(&dm, alpha, gamma, 10_000, (1.0, 0.01), &mut rng::stream(0, 0, purpose::AGENT));
    let mut err: f64 = 0.0;
    let mut same_policy = true;
    for (s, row) in optimal.iter().enumerate() {
        let learned = q.values(iai_core::agents::ObsKey(s as u64));
        for (a, v) in row.iter().enumerate() {
            err = err.max((learned[a] - v).abs());
        }
        same_policy &= support::argmax(&learned) == support::argmax(row);
    }
    let elapsed = start.elapsed();
    check(
        err < 1e-3 && same_policy && within(elapsed, 5.0),
        format!("max |Q - Q*| = {err:.2e}, greedy policy identical: {same_policy}, {elapsed:.2?}"),
    )
}

fn viability(cfg: &ExperimentConfig, kind: AgentKind) -> Vec<f64> {
    let cfg = cfg.with_kind(kind);
    let logs = sweep_logs(&cfg, 0).unwrap();
    table_from_logs(&cfg, &logs).unwrap().column("viability_fraction").unwrap()
}

fn homeostasis(cfg: &ExperimentConfig) -> Outcome {
    let random = viability(cfg, AgentKind::Random);
    let external = viability(cfg, AgentKind::ExternalRewardQ);
    let homeo = viability(cfg, AgentKind::HomeostaticQ);
    let (mr, me, mh) = (median(&random), median(&external), median(&homeo));
    let st = sign_test(&homeo, &external);
    check(
        homeo.len() == 20 && mh >= 2.0 * mr && st.p_value < 0.05,
        format!(
            "median viability homeostatic {mh:.3}, random {mr:.3}, external {me:.3}; sign test {}-{} p = {:.2e}",
            st.wins, st.losses, st.p_value
        ),
    )
}

fn goal_switching(cfg: &ExperimentConfig) -> Outcome {
    let cfg = cfg.with_kind(AgentKind::HomeostaticQ);
    let outcomes: Vec<_> = cfg
        .seeds
        .par_iter()
        .map(|&seed| goal_switch_probe(&cfg, seed).unwrap())
        .collect();
    let n = outcomes.len() as u64;
    let hungry = outcomes.iter().filter(|o| o.hungry_correct()).count() as u64;
    let thirsty = outcomes.iter().filter(|o| o.thirsty_correct()).count() as u64;
    let (ph, pt) = (binomial_upper_tail(hungry, n), binomial_upper_tail(thirsty, n));
    check(
        n == 20 && ph < 0.05 && pt < 0.05,
        format!("energy deficit -> food {hungry}/{n} (p = {ph:.2e}); hydration deficit -> water {thirsty}/{n} (p = {pt:.2e})"),
    )
}

fn exploration(logs: &[iai_core::harness::EpisodeLog]) -> Outcome {
    let pairs = entropy_by_position(logs);
    let sat: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let def: Vec<f64> = pairs.iter().map(|p| p.2).collect();
    let st = sign_test(&sat, &def);
    check(
        st.p_value < 0.05,
        format!(
            "{} matched cells, satiated entropy higher in {} lower in {}, p = {:.2e}",
            pairs.len(),
            st.wins,
            st.losses,
            st.p_value
        ),
    )
}

fn stability(cfg: &ExperimentConfig, gated_logs: &[iai_core::harness::EpisodeLog]) -> Outcome {
    let gated_cfg = cfg.with_kind(AgentKind::Neuromod);
    let mut ungated_cfg = gated_cfg.clone();
    ungated_cfg.neuromod.context_gating = false;
    let gated = table_from_logs(&gated_cfg, gated_logs).unwrap();
    let ungated = table_from_logs(&ungated_cfg, &sweep_logs(&ungated_cfg, 0).unwrap()).unwrap();
    let (rg, ru) = (gated.column("retention").unwrap(), ungated.column("retention").unwrap());
    let at_least = rg.iter().zip(&ru).filter(|(g, u)| g >= u).count();
    let rec_g = median(&gated.column("recovery_time").unwrap());
    let rec_u = median(&ungated.column("recovery_time").unwrap());
    check(
        at_least * 2 > rg.len() && rec_g <= rec_u,
        format!(
            "gated retention >= ungated in {at_least}/{} seeds; median B->A recovery {rec_g} vs {rec_u}",
            rg.len()
        ),
    )
}

fn determinism(cfg: &ExperimentConfig) -> Outcome {
    let cfg = cfg.with_kind(AgentKind::Neuromod);
    let dir = tempfile::tempdir().unwrap();
    let runs = [(1, "serial_a"), (1, "serial_b"), (4, "parallel")];
    let mut csvs = Vec::new();
    for (jobs, name) in runs {
        let out = dir.path().join(name);
        let table = sweep_to_dir(&cfg, jobs, &out).unwrap();
        let bytes = std::fs::read(out.join(METRICS_FILE)).unwrap();
        assert_eq!(bytes, metrics_csv(&table).into_bytes());
        let mut logs: Vec<(String, Vec<u8>)> = std::fs::read_dir(&out)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
            })
            .collect();
        logs.sort();
        csvs.push(logs);
    }
    let same = csvs[0] == csvs[1] && csvs[0] == csvs[2];
    check(
        same && csvs[0].len() == cfg.seeds.len() + 1,
        format!("{} CSV files byte-identical across two serial runs and a 4-thread run: {same}", csvs[0].len()),
    )
}

fn main() {
    let cfg = ExperimentConfig::homeogrid_s();
    let suite_start = Instant::now();
    let mut results: Vec<(&str, Outcome)> = vec![
        ("1 telescoping reward identity", telescoping()),
        ("2 structural blanket invariance", structural_invariance()),
        ("3 CMI oracle and sampled verdicts", cmi_oracle(&cfg)),
        ("4 Jacobian zero blocks", jacobian_blocks(&cfg)),
        ("5 chain MDP value-iteration oracle", chain_oracle()),
        ("6 homeostasis vs baselines", homeostasis(&cfg)),
        ("7 goal switching", goal_switching(&cfg)),
    ];
    let neuromod = cfg.with_kind(AgentKind::Neuromod);
    let gated_logs = sweep_logs(&neuromod, 0).unwrap();
    results.push(("8 exploration modulation", exploration(&gated_logs)));
    results.push(("9 stability-plasticity", stability(&cfg, &gated_logs)));
    results.push(("10 determinism", determinism(&cfg)));

    let mut failed = 0;
    for (name, o) in &results {
        println!("[{}] criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {}/{} passed in {:.1?}",
        results.len() - failed,
        results.len(),
        suite_start.elapsed()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
