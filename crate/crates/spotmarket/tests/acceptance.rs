//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Set `SPOTMARKET_SKIP_SLOW=1` to skip the slow Case II run.

#![allow(clippy::needless_range_loop, clippy::type_complexity)]

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;
use spotmarket::core::agents::{CriticModel, FeatureVector, Mlp, PolicyModel, Side};
use spotmarket::core::agents::features::{ACTOR_FEATURES, CRITIC_FEATURES};
use spotmarket::core::agents::nn::Tape;
use spotmarket::core::agents::profile::bias_presets;
use spotmarket::core::broker::{allocate, max_volume_allocation, Quote, QuoteSheet};
use spotmarket::core::experiment::{preset, AgentSpec, ExperimentConfig};
use spotmarket::core::game::{best_responses, is_nash_point, BidAskProfile};
use spotmarket::core::market::{carrier_reward, shipper_reward, CaseConfig, Job, JobEconomics, MarketState};
use spotmarket::core::metrics::EpisodeMetrics;
use spotmarket::core::rng::{stream, SimRng, Stream};
use spotmarket::core::sim::{Market, ScriptedPrice};
use spotmarket::runner::{run_experiment, RunOptions, RunResult, EPISODES_FILE};

const KNAPSACK_INSTANCES: usize = 10_000;
const KNAPSACK_BUDGET: Duration = Duration::from_secs(10);
const CROSSING_SAMPLES: usize = 100_000;
const OVERPRICE: f64 = 0.1;
const OVERPRICE_EPISODES: u32 = 100;
const REWARD_IDENTITY_TOL: f64 = 1e-12;
const FD_STEP: f64 = 1e-5;
const FD_SAMPLES: usize = 100;
const FD_MAX_REL_ERROR: f64 = 1e-4;
const KINK_MARGIN: f64 = 1e-3;
const FROZEN_TOL: f64 = 0.15;
const TUNED_UTILIZATION: f64 = 0.95;
const TUNED_ADHERENCE: f64 = 0.85;
const TUNED_FAIRNESS: f64 = 0.80;
const SHARE_MARGIN: f64 = 0.1;
const CASE2_UTILIZATION: f64 = 0.90;
const CASE2_ADHERENCE: f64 = 0.75;
const CASE2_REPLICATIONS: u32 = 3;
const BIAS_TOL: f64 = 1e-12;

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rng(tag: u64) -> SimRng {
    stream(0xACCE_0000 + tag, Stream::Arrivals)
}

fn run(cfg: &ExperimentConfig) -> RunResult {
    run_experiment(cfg, &RunOptions { out_dir: None, progress: false }).expect("experiment runs")
}

fn brute_force(volumes: &[u32], values: &[f64], capacity: u32) -> f64 {
    let mut best = 0.0f64;
    for mask in 0u32..(1 << volumes.len()) {
        let (mut vol, mut val) = (0u32, 0.0);
        for i in (0..volumes.len()).filter(|i| mask >> i & 1 == 1) {
            vol += volumes[i];
            val += values[i];
        }
        if vol <= capacity && val > best {
            best = val;
        }
    }
    best
}

fn random_sheet(r: &mut SimRng, max_jobs: usize, max_volume: u32, spread: f64) -> (MarketState, QuoteSheet) {
    let n = r.gen_range(0..=max_jobs);
    let jobs: Vec<Job> = (0..n).map(|i| Job::new(i as u64, 0, 1, r.gen_range(1..=max_volume))).collect();
    let quotes = jobs
        .iter()
        .map(|j| {
            let bid = r.gen_range(0.0..10.0);
            Quote { job: j.id, bid, ask: bid - r.gen_range(-spread..=spread) }
        })
        .collect();
    (MarketState::new(0, jobs), QuoteSheet { epoch: 0, quotes })
}

fn c01_knapsack() -> Check {
    let mut r = rng(1);
    let start = Instant::now();
    let mut mismatches = 0;
    for _ in 0..KNAPSACK_INSTANCES {
        let (state, sheet) = random_sheet(&mut r, 12, 5, 5.0);
        let cap = r.gen_range(0..=20);
        let volumes: Vec<u32> = state.jobs.iter().map(|j| j.volume).collect();
        let spreads: Vec<f64> = sheet.quotes.iter().map(Quote::spread).collect();
        let alloc = allocate(&state, &sheet, cap).unwrap();
        let by_volume: Vec<f64> = volumes.iter().map(|&v| v as f64).collect();
        let fill = max_volume_allocation(&state, cap).used_volume as f64;
        if alloc.total_spread != brute_force(&volumes, &spreads, cap) || fill != brute_force(&volumes, &by_volume, cap) {
            mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(
        mismatches == 0 && elapsed < KNAPSACK_BUDGET,
        format!("{mismatches} mismatches in {KNAPSACK_INSTANCES} instances, {:.2}s (budget {}s)", elapsed.as_secs_f64(), KNAPSACK_BUDGET.as_secs()),
    )
}

fn c02_no_crossed_shipments() -> Check {
    let mut r = rng(2);
    let (mut crossed, mut selected) = (0, 0);
    for _ in 0..CROSSING_SAMPLES {
        let (state, sheet) = random_sheet(&mut r, 15, 5, 10.0);
        let alloc = allocate(&state, &sheet, r.gen_range(1..=40)).unwrap();
        for (q, _) in sheet.quotes.iter().zip(&alloc.flags).filter(|(_, &f)| f) {
            selected += 1;
            crossed += usize::from(q.bid < q.ask);
        }
    }
    ensure(crossed == 0, format!("{crossed} of {selected} selected jobs with bid < ask over {CROSSING_SAMPLES} samples"))
}

fn c03_overpriced_carrier() -> Check {
    let mut cfg = preset("case1-tuned").unwrap();
    cfg.carrier = AgentSpec::Scripted { price: ScriptedPrice::PayOffset(OVERPRICE) };
    let (mut shipper, carrier) = cfg.traders(0).unwrap();
    let mut market = Market::new(cfg.case.clone(), cfg.replication_seed(0)).unwrap();
    market.snapshots = false;
    let mut worst = f64::NEG_INFINITY;
    let mut shipped = 0;
    for _ in 0..OVERPRICE_EPISODES {
        let log = market.run_episode(&shipper, &carrier).unwrap();
        let total: f64 = log.completed.iter().flat_map(|t| t.observations(Side::Shipper)).map(|o| o.reward).sum();
        let m = EpisodeMetrics::from_log(0, false, &log);
        shipped += m.shipped;
        worst = worst.max(total).max(m.shipper_reward);
        shipper.learner_mut().unwrap().update(&log.view(Side::Shipper)).unwrap();
    }
    ensure(
        worst <= 0.0,
        format!("max episode shipper reward {worst:.4} over {OVERPRICE_EPISODES} episodes ({shipped} jobs shipped)"),
    )
}

fn c04_nash_band() -> Check {
    let econ = JobEconomics::new(2.0, 1.0);
    let mut wrong = Vec::new();
    let mut worst_identity = 0.0f64;
    for i in 0..=300 {
        let x = i as f64 / 100.0;
        let nash = is_nash_point(&BidAskProfile { bid: x, ask: x, econ });
        if nash != (100..=200).contains(&i) {
            wrong.push(x);
        }
        if nash {
            let sum = carrier_reward(true, x, &econ, 1.0, 0) + shipper_reward(true, x, &econ, 1.0);
            worst_identity = worst_identity.max((sum - econ.gap()).abs());
        }
    }
    ensure(
        wrong.is_empty() && worst_identity <= REWARD_IDENTITY_TOL,
        format!("misclassified grid points {wrong:?}, max |rC+rS-gap| {worst_identity:.1e}"),
    )
}

fn randomize(net: &mut Mlp, r: &mut SimRng) {
    for p in net.params_mut() {
        *p = r.gen_range(-1.0..1.0);
    }
}

/// Smallest |pre-activation| over hidden units; small values sit near a ReLU kink.
fn kink_distance(net: &Mlp, input: &[f64]) -> f64 {
    let sizes = net.sizes();
    let params = net.params();
    let mut x = input.to_vec();
    let mut offset = 0;
    let mut nearest = f64::INFINITY;
    for l in 0..sizes.len() - 2 {
        let (fi, fo) = (sizes[l], sizes[l + 1]);
        let (w, b) = params[offset..offset + fi * fo + fo].split_at(fi * fo);
        offset += fi * fo + fo;
        x = (0..fo)
            .map(|o| {
                let z = b[o] + w[o * fi..(o + 1) * fi].iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
                nearest = nearest.min(z.abs());
                z.max(0.0)
            })
            .collect();
    }
    nearest
}

fn relative_error(net: &mut Mlp, analytic: &[f64], loss: &mut dyn FnMut(&Mlp) -> f64) -> f64 {
    let (mut diff, mut na, mut nf) = (0.0, 0.0, 0.0);
    for k in 0..analytic.len() {
        let orig = net.params()[k];
        net.params_mut()[k] = orig + FD_STEP;
        let up = loss(net);
        net.params_mut()[k] = orig - FD_STEP;
        let down = loss(net);
        net.params_mut()[k] = orig;
        let fd = (up - down) / (2.0 * FD_STEP);
        diff += (analytic[k] - fd).powi(2);
        na += analytic[k].powi(2);
        nf += fd * fd;
    }
    diff.sqrt() / na.sqrt().max(nf.sqrt()).max(f64::MIN_POSITIVE)
}

fn random_features(r: &mut SimRng, len: usize) -> FeatureVector {
    let mut values: Vec<f64> = (0..len).map(|_| r.gen_range(0.0..1.0)).collect();
    values[0] = 1.0;
    FeatureVector::from_slice(&values).unwrap()
}

fn c05_gradients() -> Check {
    let mut r = rng(5);
    let (mut actor_worst, mut critic_worst, mut rejected) = (0.0f64, 0.0f64, 0);
    let mut accepted = 0;
    let mut tape = Tape::default();
    while accepted < FD_SAMPLES {
        let hidden: Vec<usize> = (0..r.gen_range(0..=3)).map(|_| r.gen_range(2..=12)).collect();
        let mut actor = PolicyModel::init(&hidden, 1.0, 1.0, &mut r).unwrap();
        randomize(&mut actor.net, &mut r);
        let mut critic = CriticModel::init(&hidden, &mut r);
        randomize(&mut critic.net, &mut r);
        let f = random_features(&mut r, ACTOR_FEATURES);
        let fc = random_features(&mut r, CRITIC_FEATURES);
        let head = actor.head(&f, &mut tape);
        if kink_distance(&actor.net, f.as_slice()) < KINK_MARGIN
            || kink_distance(&critic.net, fc.as_slice()) < KINK_MARGIN
            || head.sigma < 0.05
        {
            rejected += 1;
            continue;
        }
        accepted += 1;
        let price = head.mu + head.sigma * r.gen_range(-2.0..2.0);
        let signal = r.gen_range(-3.0..3.0);
        let mut grad = vec![0.0; actor.net.params().len()];
        actor.accumulate_gradient(&f, price, signal, &mut tape, &mut grad);
        let floor = actor.sigma_floor;
        let mut net = actor.net.clone();
        let e = relative_error(&mut net, &grad, &mut |n| {
            let mut m = PolicyModel::from_network(n.clone()).unwrap();
            m.sigma_floor = floor;
            m.loss(&f, price, signal)
        });
        actor_worst = actor_worst.max(e);
        let observed = r.gen_range(-5.0..5.0);
        let mut grad = vec![0.0; critic.net.params().len()];
        critic.accumulate_gradient(&fc, observed, &mut tape, &mut grad);
        let mut net = critic.net.clone();
        let e = relative_error(&mut net, &grad, &mut |n| CriticModel::from_network(n.clone()).unwrap().loss(&fc, observed));
        critic_worst = critic_worst.max(e);
    }
    ensure(
        actor_worst < FD_MAX_REL_ERROR && critic_worst < FD_MAX_REL_ERROR,
        format!(
            "max relative error actor {actor_worst:.2e}, critic {critic_worst:.2e} over {FD_SAMPLES} samples, h={FD_STEP:e} ({rejected} near-kink samples redrawn)"
        ),
    )
}

fn final_mean(rows: &[EpisodeMetrics], pick: fn(&EpisodeMetrics) -> f64) -> f64 {
    let n = rows.len().div_ceil(10);
    rows[rows.len() - n..].iter().map(pick).sum::<f64>() / n as f64
}

fn c06_frozen_opponent() -> Check {
    let mut out = Vec::new();
    let mut ok = true;
    for (name, target, pick) in [
        ("verify-fixed-ask", 1.0, (|m: &EpisodeMetrics| m.shipper_mu.unwrap_or(f64::NAN)) as fn(&EpisodeMetrics) -> f64),
        ("verify-fixed-bid", 2.0, |m: &EpisodeMetrics| m.carrier_mu.unwrap_or(f64::NAN)),
    ] {
        let mut cfg = preset(name).unwrap();
        cfg.replications = 1;
        let result = run(&cfg);
        let rep = &result.replications[0];
        let mu = final_mean(&rep.rows, pick);
        ok &= rep.is_stable() && rep.rows.len() == cfg.case.episodes as usize && (mu - target).abs() <= FROZEN_TOL;
        out.push(format!("{name}: mu {mu:.4} vs {target} (tol {FROZEN_TOL})"));
    }
    ensure(ok, out.join("; "))
}

fn pooled(result: &RunResult, field: &str) -> f64 {
    result.pooled.mean(field).unwrap_or(f64::NAN)
}

fn c07_case1_tuned() -> Check {
    let result = run(&preset("case1-tuned").unwrap());
    let (u, a, f) = (pooled(&result, "utilization"), pooled(&result, "adherence"), pooled(&result, "fairness"));
    ensure(
        result.unstable() == 0 && u >= TUNED_UTILIZATION && a >= TUNED_ADHERENCE && f >= TUNED_FAIRNESS,
        format!(
            "utilization {u:.4} (>= {TUNED_UTILIZATION}), adherence {a:.4} (>= {TUNED_ADHERENCE}), fairness {f:.4} (>= {TUNED_FAIRNESS}), {} reps, {} unstable",
            result.replications.len(),
            result.unstable()
        ),
    )
}

fn c08_penalty_asymmetry() -> Check {
    let result = run(&preset("shipper-penalty-0").unwrap());
    let (s, c) = (pooled(&result, "share_shipper"), pooled(&result, "share_carrier"));
    ensure(
        result.unstable() == 0 && s - c >= SHARE_MARGIN,
        format!("shipper share {s:.4} - carrier share {c:.4} = {:.4} (>= {SHARE_MARGIN}), {} reps", s - c, result.replications.len()),
    )
}

fn c09_case2_best() -> Check {
    let mut cfg = preset("case2-cap40-ra-rnbias").unwrap();
    cfg.replications = CASE2_REPLICATIONS;
    let result = run(&cfg);
    let (u, a) = (pooled(&result, "utilization"), pooled(&result, "adherence"));
    ensure(
        result.unstable() == 0 && u >= CASE2_UTILIZATION && a >= CASE2_ADHERENCE,
        format!("utilization {u:.4} (>= {CASE2_UTILIZATION}), adherence {a:.4} (>= {CASE2_ADHERENCE}), {CASE2_REPLICATIONS} reps"),
    )
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

type Labels<'a> = Vec<&'a str>;

fn c10_payoff_matrices() -> Check {
    // (file, carrier best per shipper column, shipper best per carrier row, equilibria)
    let expected: [(&str, Labels, Labels, Vec<(&str, &str)>); 3] = [
        ("nash-case1.csv", vec!["RA", "RS", "RS"], vec!["RN", "RS", "RS"], vec![("RS", "RN"), ("RA", "RS")]),
        (
            "nash-case2-cap40.csv",
            vec!["RN Bias", "RN Bias", "RN Bias"],
            vec!["RA Bias", "RS Bias", "RS Bias"],
            vec![("RN Bias", "RS Bias")],
        ),
        (
            "nash-case2-cap300.csv",
            vec!["RA Bias", "RN Bias", "RN Bias"],
            vec!["RN Bias", "RS Bias", "RS Bias"],
            vec![("RA Bias", "RS Bias")],
        ),
    ];
    let mut notes = Vec::new();
    let mut ok = true;
    for (file, carrier, shipper, nash) in expected {
        let m = spotmarket::nash::load_matrix(&fixture(file)).map_err(|e| e.to_string())?;
        let br = best_responses(&m);
        let single = |v: &Vec<usize>, labels: &[String]| match v.as_slice() {
            [i] => labels[*i].clone(),
            _ => format!("{v:?}"),
        };
        let got_c: Vec<String> = br.carrier.iter().map(|v| single(v, &m.rows)).collect();
        let got_s: Vec<String> = br.shipper.iter().map(|v| single(v, &m.columns)).collect();
        let got_n: Vec<(&str, &str)> = br.nash.iter().map(|&(r, c)| (m.rows[r].as_str(), m.columns[c].as_str())).collect();
        let matches = got_c == carrier && got_s == shipper && got_n == nash;
        ok &= matches;
        notes.push(format!("{file}: Nash {got_n:?}{}", if matches { "" } else { " MISMATCH" }));
    }
    ensure(ok, notes.join("; "))
}

fn c11_bias_presets() -> Check {
    let cfg = CaseConfig::case2(40);
    let b = bias_presets(&cfg);
    let (mut cost, mut pay) = (0.0, 0.0);
    for d in cfg.distance_range.values() {
        for v in cfg.volume_range.values() {
            cost += (d * v) as f64 * cfg.transport_rate;
            pay += (d * v) as f64 * cfg.willingness_rate;
        }
    }
    let (cost, pay) = (cost / 25.0, pay / 25.0);
    let err = [(b.avg_cost, cost), (b.avg_pay, pay), (b.midpoint(), (cost + pay) / 2.0)]
        .iter()
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let literal = (b.avg_cost, b.avg_pay, b.midpoint()) == (9.0, 18.0, 13.5);
    ensure(
        err <= BIAS_TOL && literal,
        format!("presets ({}, {}, {}) vs 25-pair enumeration, max error {err:.1e}", b.avg_cost, b.avg_pay, b.midpoint()),
    )
}

fn c12_determinism() -> Check {
    let mut cfg = preset("case2-cap40-ra-rnbias").unwrap();
    cfg.replications = 2;
    cfg.case.episodes = 20;
    cfg.case.horizon_days = 100;
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let bytes: Vec<Vec<u8>> = dirs
        .iter()
        .map(|d| {
            run_experiment(&cfg, &RunOptions { out_dir: Some(d.path().to_path_buf()), progress: false }).unwrap();
            std::fs::read(d.path().join(EPISODES_FILE)).unwrap()
        })
        .collect();
    ensure(
        bytes[0] == bytes[1] && !bytes[0].is_empty(),
        format!("{} and {} bytes, identical: {}", bytes[0].len(), bytes[1].len(), bytes[0] == bytes[1]),
    )
}

fn c13_documented() -> Check {
    let readme = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../README.md")).unwrap_or_default();
    ensure(
        readme.contains("not acceptance-gated"),
        "stochastic cell values are documented in README.md as not acceptance-gated".to_string(),
    )
}

fn main() -> ExitCode {
    let skip_slow = std::env::var_os("SPOTMARKET_SKIP_SLOW").is_some_and(|v| v != "0");
    let checks: [(&str, &str, fn() -> Check, bool); 13] = [
        ("C01", "knapsack matches exhaustive enumeration", c01_knapsack, false),
        ("C02", "selected jobs never have bid < ask", c02_no_crossed_shipments, false),
        ("C03", "overpriced scripted carrier leaves shipper reward <= 0", c03_overpriced_carrier, false),
        ("C04", "Nash predicate band and reward identity", c04_nash_band, false),
        ("C05", "actor and critic gradients vs finite differences", c05_gradients, false),
        ("C06", "learner converges to frozen opponent price", c06_frozen_opponent, false),
        ("C07", "Case I tuned market quality", c07_case1_tuned, false),
        ("C08", "zero shipper penalty favors the shipper", c08_penalty_asymmetry, false),
        ("C09", "Case II risk-averse, neutral bias (slow)", c09_case2_best, true),
        ("C10", "payoff matrices best responses and equilibria", c10_payoff_matrices, false),
        ("C11", "Case II bias presets", c11_bias_presets, false),
        ("C12", "fixed seed gives byte-identical CSV", c12_determinism, false),
        ("C13", "stochastic table cells not gated", c13_documented, false),
    ];
    let mut failed = 0;
    for (id, name, check, slow) in checks {
        if slow && skip_slow {
            println!("SKIP {id} {name}: SPOTMARKET_SKIP_SLOW is set");
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {id} {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {id} {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    println!("acceptance: {} failed", failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
