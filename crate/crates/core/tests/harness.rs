use doco_core::adversary::{LocalLoss, LossClass, LossStream, RoundLoss, ScriptedStream};
use doco_core::algorithms::{run_algorithm, Algorithm, EtaSchedule, HyperParams, RunSpec};
use doco_core::compress::{ByteMode, CompressorKind};
use doco_core::geometry::Domain;
use doco_core::gossip::GossipEngine;
use doco_core::harness::{
    self, bandit_regret, delay_probe, fit_loglog_slope, regret, scaling_sweep, ExperimentConfig, CSV_COLUMNS,
};
use doco_core::rng::{sub_stream, Purpose};
use doco_core::topology::GossipMatrix;
use doco_core::Error;
use rand::Rng;

fn small(algo: &str, extra: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml_str(&format!(
        r#"
[topology]
kind = "cycle"
n = 4

[compress]
compressor = {{ variant = "top_k", k = 2 }}

[adversary]
loss = {{ kind = "linear", G = 1.0 }}
d = 5
T = 100

[algorithm]
name = "{algo}"
overrides = {{ L1 = 3, L2 = 2 }}

[harness]
seeds = [1, 2, 3]
{extra}
"#
    ))
    .unwrap()
}

#[test]
fn csv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for k in 0..2 {
        let mut cfg = small("top_dogd", "stride = 7");
        let path = dir.path().join(format!("run{k}.csv"));
        cfg.harness.output = Some(path.clone());
        harness::run_experiment(&cfg).unwrap();
        texts.push(std::fs::read_to_string(&path).unwrap());
        let meta = std::fs::read_to_string(harness::metadata_path(&path)).unwrap();
        assert!(meta.contains("top_dogd"));
    }
    assert_eq!(texts[0], texts[1]);
    let mut lines = texts[0].lines();
    assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
    // rounds 7, 14, …, 98 plus the last, for 4 learners and 3 seeds
    assert_eq!(lines.count(), 3 * 4 * 15);
}

#[test]
fn learner_filter_limits_records() {
    let cfg = small("dc_dogd", "learners = [2]");
    let res = harness::run_experiment_with(&cfg, true).unwrap();
    for run in &res.runs {
        assert_eq!(run.records.len(), 100);
        assert!(run.records.iter().all(|r| r.learner == 2));
    }
}

#[test]
fn zero_losses_have_zero_regret_everywhere() {
    for algo in Algorithm::ALL {
        let mut cfg = small(algo.name(), "");
        cfg.adversary.loss = doco_core::adversary::LossSpec::Zero;
        if algo.is_bandit() {
            cfg.algorithm.overrides.eps = Some(0.1);
        }
        let res = harness::run_experiment_with(&cfg, true).unwrap();
        for run in &res.runs {
            assert!(run.records.iter().all(|r| r.cum_regret == 0.0), "{algo}");
        }
    }
}

#[test]
fn identity_bytes_are_full_vectors() {
    let mut cfg = small("dc_dogd", "");
    cfg.compress.compressor = CompressorKind::Identity;
    let res = harness::run_experiment_with(&cfg, false).unwrap();
    for run in &res.runs {
        assert_eq!(run.outcome.total_bytes, (100 * 4 * 8 * 5) as f64);
        assert_eq!(run.outcome.total_messages, 400);
    }
}

#[test]
fn records_telescope_exactly() {
    let res = harness::run_experiment_with(&small("top_dogd", ""), true).unwrap();
    for run in &res.runs {
        let mut prev = [0.0f64; 4];
        for r in &run.records {
            let want = prev[r.learner] + (r.loss - r.comparator_loss);
            assert_eq!(r.cum_regret, want);
            prev[r.learner] = r.cum_regret;
        }
        for (i, p) in prev.iter().enumerate() {
            assert_eq!(*p, run.outcome.final_regret[i]);
        }
    }
}

fn random_linear(seed: u64) -> ScriptedStream {
    let mut g = sub_stream(seed, Purpose::Custom(77), 0, 0);
    let rounds = (0..8)
        .map(|_| RoundLoss {
            losses: (0..2)
                .map(|_| LocalLoss::Linear {
                    g: vec![g.random_range(-1.0..1.0), g.random_range(-1.0..1.0)],
                })
                .collect(),
            d: 2,
        })
        .collect();
    ScriptedStream::new(rounds, LossClass::Convex, 2.0).unwrap()
}

#[test]
fn regret_matches_brute_force() {
    let p = GossipMatrix::from_rows(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
    let dom = Domain::Box { half_width: 1.0 };
    for seed in 0..5 {
        let stream = random_linear(seed);
        let spec = RunSpec {
            stream: &stream,
            p: &p,
            domain: dom,
            hp: HyperParams {
                l1: 1,
                l2: 1,
                gamma: 1.0,
                eta: EtaSchedule::Constant { eta: 0.3 },
                exploration: None,
            },
            compressor: CompressorKind::Identity,
            engine: GossipEngine::Naive,
            seed,
            bytes: ByteMode::Expected,
            keep_plays: true,
        };
        let out = run_algorithm(Algorithm::TopDogd, &spec, None).unwrap();
        let plays = out.plays.as_ref().unwrap();
        let total = |x: &[f64]| (0..8).map(|t| stream.round(t).global_value(x)).sum::<f64>();
        let mut best = f64::INFINITY;
        for a in 0..=200 {
            for b in 0..=200 {
                best = best.min(total(&[-1.0 + a as f64 * 0.01, -1.0 + b as f64 * 0.01]));
            }
        }
        for i in 0..2 {
            let played: f64 = (0..8).map(|t| stream.round(t).global_value(&plays[t][i][0])).sum();
            assert!((out.final_regret[i] - (played - best)).abs() <= 1e-9);
        }
        let r = regret(&stream, plays, &out.comparator).unwrap();
        let rb = bandit_regret(&stream, plays, &out.comparator).unwrap();
        for i in 0..2 {
            assert!((r[i] - out.final_regret[i]).abs() <= 1e-12);
            assert_eq!(r[i], rb[i]);
        }
    }
}

#[test]
fn mismatched_plays_rejected() {
    let stream = random_linear(0);
    let plays = vec![vec![vec![vec![0.0, 0.0]]; 2]; 7];
    assert!(matches!(regret(&stream, &plays, &[0.0, 0.0]), Err(Error::InvalidPairing(_))));
    let plays = vec![vec![vec![vec![0.0, 0.0]]; 3]; 8];
    assert!(matches!(regret(&stream, &plays, &[0.0, 0.0]), Err(Error::InvalidPairing(_))));
    let plays = vec![vec![vec![vec![0.0, 0.0]]; 2]; 8];
    assert!(matches!(regret(&stream, &plays, &[0.0]), Err(Error::InvalidPairing(_))));
}

#[test]
fn sweep_and_fit() {
    let xs = [2.0f64, 4.0, 8.0, 16.0];
    let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(0.5)).collect();
    assert!((fit_loglog_slope(&xs, &ys).unwrap() - 0.5).abs() < 1e-12);
    let cfg = small("top_dogd", "");
    assert!(matches!(scaling_sweep(&cfg, &[100]), Err(Error::InvalidSweep(_))));
    let res = scaling_sweep(&cfg, &[50, 100, 200]).unwrap();
    assert_eq!(res.points.len(), 3);
    assert_eq!(res.doubling_ratios.len(), 2);
    assert!(res.slope.is_finite());
}

#[test]
fn config_round_trips() {
    let cfg = small("top_dobd2", "stride = 3");
    let back = ExperimentConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
    assert_eq!(cfg, back);
    assert_eq!(ExperimentConfig::from_toml_str("").unwrap(), ExperimentConfig::default());
}

#[test]
fn invalid_configs_rejected() {
    assert!(matches!(
        ExperimentConfig::from_toml_str("[topology]\nsize = 3"),
        Err(Error::Config(_))
    ));
    assert!(ExperimentConfig::from_toml_str("[algorithm]\nname = \"sgd\"").is_err());

    let cases = [
        small("top_dogd", "stride = 0"),
        small("top_dogd", "learners = [4]"),
        {
            let mut c = small("top_dogd", "");
            c.harness.seeds.clear();
            c
        },
    ];
    for cfg in cases {
        assert!(matches!(cfg.resolve(), Err(Error::Config(_))));
    }

    let mut lb = small("top_dogd", "");
    lb.adversary.loss = doco_core::adversary::LossSpec::LowerBoundConvex { g: 1.0 };
    assert!(lb.resolve().is_err());
    lb.compress.compressor = CompressorKind::RandomizedGossip { p: 0.5 };
    assert!(lb.resolve().is_ok());
    lb.topology.n = 5;
    assert!(lb.resolve().is_err());

    let mut bandit = small("top_dobd1", "");
    bandit.geometry.domain = Domain::ShiftedBox { lo: 0.0, hi: 1.0 };
    assert!(matches!(bandit.resolve(), Err(Error::InvalidDomain(_))));

    let mut bad = small("top_dogd", "");
    bad.compress.compressor = CompressorKind::TopK { k: 9 };
    assert!(bad.resolve().is_err());
}

#[test]
fn delay_probe_matches_geometric_waits() {
    // two hops at ω = 1/2: mean 4 rounds
    let r = delay_probe(10, 0.5, 4000, 3).unwrap();
    assert_eq!(r.hops, 2);
    assert!((r.mean - 4.0).abs() <= 0.4);
    // one hop at ω = 1/4
    let r = delay_probe(6, 0.25, 4000, 3).unwrap();
    assert_eq!(r.hops, 1);
    assert!((r.mean - 4.0).abs() <= 0.4);
}

#[test]
fn compare_pairs_seeds() {
    let a = small("top_dogd", "");
    let b = small("dc_dogd", "");
    let table = harness::compare(&a, &b).unwrap();
    assert_eq!(table.rows.iter().map(|r| r.seed).collect::<Vec<_>>(), vec![1, 2, 3]);
    assert!(table.to_text().contains("dc_dogd"));
}
