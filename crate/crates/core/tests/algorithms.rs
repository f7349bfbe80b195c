mod common;

use common::{gaussian_vec, matmul, rng};
use doco_core::adversary::{
    linear_adversarial_stream, quadratic_stream, LocalLoss, LossClass, LossStream, RoundLoss, ScriptedStream,
    ZeroStream,
};
use doco_core::algorithms::{
    block_commit, compensation_subblock, gossip_subblock, run_algorithm, Algorithm, EtaSchedule, Exploration,
    HyperParams, RunRecord, RunSpec, TwoLevelState,
};
use doco_core::compress::{ByteMode, CompressorKind};
use doco_core::geometry::Domain;
use doco_core::gossip::{GossipEngine, ReplicaStore};
use doco_core::topology::{gossip_matrix_for, GossipMatrix, TopologyKind};
use doco_core::vector::{self, Vector};

const GRADS: [[f64; 2]; 8] = [
    [3.0, -1.0],
    [2.0, 4.0],
    [-5.0, 1.0],
    [1.0, 2.0],
    [6.0, -2.0],
    [-1.0, 3.0],
    [2.0, 2.0],
    [-4.0, 1.0],
];

fn scripted_linear(grads: &[[f64; 2]]) -> ScriptedStream {
    let rounds = grads
        .iter()
        .map(|row| RoundLoss {
            losses: row.iter().map(|g| LocalLoss::Linear { g: vec![*g] }).collect(),
            d: 1,
        })
        .collect();
    ScriptedStream::new(rounds, LossClass::Convex, 6.0).unwrap()
}

fn two_node_matrix() -> GossipMatrix {
    GossipMatrix::from_rows(vec![vec![0.75, 0.25], vec![0.25, 0.75]]).unwrap()
}

fn small_hp() -> HyperParams {
    HyperParams {
        l1: 1,
        l2: 1,
        gamma: 0.5,
        eta: EtaSchedule::Constant { eta: 0.25 },
        exploration: None,
    }
}

fn spec<'a>(stream: &'a dyn LossStream, p: &'a GossipMatrix, hp: HyperParams, kind: CompressorKind) -> RunSpec<'a> {
    RunSpec {
        stream,
        p,
        domain: Domain::Box { half_width: 1.0 },
        hp,
        compressor: kind,
        engine: GossipEngine::Efficient,
        seed: 3,
        bytes: ByteMode::Expected,
        keep_plays: true,
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12
}

#[test]
fn hand_trace_two_learners() {
    let stream = scripted_linear(&GRADS);
    let p = two_node_matrix();
    for engine in [GossipEngine::Efficient, GossipEngine::Naive] {
        let mut s = spec(&stream, &p, small_hp(), CompressorKind::Identity);
        s.engine = engine;
        let out = run_algorithm(Algorithm::TopDogd, &s, None).unwrap();
        let plays = out.plays.unwrap();
        let expect: [[f64; 2]; 8] = [
            [0.0, 0.0],
            [0.0, 0.0],
            [0.0, 0.0],
            [0.0, 0.0],
            [-1.0, -13.0 / 16.0],
            [-1.0, -13.0 / 16.0],
            [-25.0 / 128.0, -1.0],
            [-25.0 / 128.0, -1.0],
        ];
        for (t, row) in expect.iter().enumerate() {
            for i in 0..2 {
                assert!(close(plays[t][i][0][0], row[i]), "t={t} i={i}: {}", plays[t][i][0][0]);
            }
        }
        assert_eq!(out.comparator, vec![-1.0]);
        assert!(close(out.final_regret[0], 999.0 / 128.0));
        assert!(close(out.final_regret[1], 65.0 / 8.0));
        assert_eq!(out.final_decisions, vec![vec![-1.0], vec![-1.0]]);
    }
}

#[test]
fn hand_trace_state_level() {
    let p = two_node_matrix();
    let dom = Domain::Box { half_width: 1.0 };
    let kind = CompressorKind::Identity;
    let mut st = TwoLevelState::new(&p, 1, GossipEngine::Efficient);
    let block_y = [
        [-19.0 / 16.0, -13.0 / 16.0],
        [-25.0 / 128.0, -175.0 / 128.0],
        [-1455.0 / 1024.0, -1305.0 / 1024.0],
    ];
    for b in 1..=4usize {
        if b >= 2 {
            st.begin_block(0.25);
        }
        for t in [2 * (b - 1), 2 * (b - 1) + 1] {
            for i in 0..2 {
                st.add_gradient(i, &[GRADS[t][i]]);
            }
        }
        if b == 1 {
            st.commit_idle();
            continue;
        }
        gossip_subblock(&mut st, &p, 0.5, &kind, 1, 0, 0).unwrap();
        for i in 0..2 {
            assert!(close(st.y[i][0], block_y[b - 2][i]), "b={b}: {:?}", st.y);
        }
        compensation_subblock(&mut st, &dom, &kind, 1, 0, 1).unwrap();
        block_commit(&mut st, &p, &dom).unwrap();
    }
    assert_eq!(st.x, vec![vec![-1.0], vec![-1.0]]);
    assert!(close(st.hat.own(0)[0], -1049.0 / 1024.0));
    assert!(close(st.hat.own(1)[0], -999.0 / 1024.0));
}

#[test]
fn zero_losses_give_zero_regret() {
    let stream = ZeroStream { n: 4, d: 3, horizon: 40 };
    let (_, p) = gossip_matrix_for(TopologyKind::Cycle, 4, true).unwrap();
    let mut hp = small_hp();
    hp.exploration = Some(Exploration { eps: 0.2, zeta: 0.2 });
    for algo in Algorithm::ALL {
        let s = spec(&stream, &p, hp, CompressorKind::TopK { k: 1 });
        let out = run_algorithm(algo, &s, None).unwrap();
        assert!(out.final_regret.iter().all(|r| *r == 0.0), "{algo}");
        if !algo.is_bandit() {
            assert!(out.final_decisions.iter().flatten().all(|v| *v == 0.0), "{algo}");
        }
    }
}

fn random_state(p: &GossipMatrix, d: usize, tag: u32) -> TwoLevelState {
    let mut g = rng(tag);
    let mut st = TwoLevelState::new(p, d, GossipEngine::Efficient);
    for i in 0..p.n() {
        st.x[i] = vector::scaled(&gaussian_vec(&mut g, d), 0.3);
        st.z_prev[i] = gaussian_vec(&mut g, d);
    }
    st
}

#[test]
fn gossip_preserves_block_mean() {
    let (_, p) = gossip_matrix_for(TopologyKind::Cycle, 8, true).unwrap();
    let eta = 0.1;
    for kind in [
        CompressorKind::Identity,
        CompressorKind::TopK { k: 2 },
        CompressorKind::RandomizedGossip { p: 0.5 },
    ] {
        let mut st = random_state(&p, 6, 5);
        let mut want = vector::mean(&st.x);
        vector::axpy(&mut want, -eta, &vector::mean(&st.z_prev));
        st.begin_block(eta);
        gossip_subblock(&mut st, &p, 0.4, &kind, 30, 9, 0).unwrap();
        let got = st.mean_y();
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() <= 1e-12, "{kind}: {a} vs {b}");
        }
    }
}

#[test]
fn commit_error_decomposes() {
    // x − x̂ after commit = (y − ŷ) + (r − r̂), coordinate by coordinate
    let (_, p) = gossip_matrix_for(TopologyKind::Cycle, 6, true).unwrap();
    let dom = Domain::Ball { radius: 0.5 };
    for kind in [CompressorKind::Identity, CompressorKind::RandK { k: 2 }] {
        let mut st = random_state(&p, 4, 6);
        st.begin_block(1.0);
        gossip_subblock(&mut st, &p, 0.3, &kind, 5, 1, 0).unwrap();
        compensation_subblock(&mut st, &dom, &kind, 3, 1, 5).unwrap();
        let gap_y: Vec<Vector> = (0..6).map(|i| vector::sub(&st.y[i], st.hat.own(i))).collect();
        let gap_r: Vec<Vector> = (0..6).map(|i| vector::sub(&st.r[i], &st.r_hat[i])).collect();
        block_commit(&mut st, &p, &dom).unwrap();
        for i in 0..6 {
            assert!(dom.contains(&st.x[i], 1e-12));
            let gap = vector::sub(&st.x[i], st.hat.own(i));
            for c in 0..4 {
                assert!((gap[c] - gap_y[i][c] - gap_r[i][c]).abs() <= 1e-12);
            }
            if kind == CompressorKind::Identity {
                // the residual arrives intact; only the last gossip step's drift remains
                assert!(gap_r[i].iter().all(|v| *v == 0.0));
            }
        }
    }
}

#[test]
fn single_learner_is_blocked_projected_ogd() {
    let p = GossipMatrix::from_rows(vec![vec![1.0]]).unwrap();
    let stream = quadratic_stream(1, 3, 37, 1.0, 2.0, 4).unwrap();
    let dom = Domain::Ball { radius: 0.6 };
    let hp = HyperParams {
        l1: 3,
        l2: 2,
        gamma: 1.0,
        eta: EtaSchedule::StronglyConvex { mu: 1.0 },
        exploration: None,
    };
    let mut s = spec(&stream, &p, hp, CompressorKind::TopK { k: 1 });
    s.domain = dom;
    let out = run_algorithm(Algorithm::TopDogd, &s, None).unwrap();
    let plays = out.plays.unwrap();

    let l = 5;
    let mut x = vec![0.0; 3];
    let mut z_prev = vec![0.0; 3];
    let mut z = vec![0.0; 3];
    for t in 0..37 {
        let b = t / l + 1;
        assert_eq!(plays[t][0][0], x, "t={t}");
        vector::add_assign(&mut z, &stream.grad(t, 0, &x));
        if t % l == l - 1 {
            if b >= 2 {
                let eta = 1.0 / ((b * l) as f64 + 8.0);
                let y: Vec<f64> = x.iter().zip(&z_prev).map(|(a, g)| a - eta * g).collect();
                x = dom.project(&y);
            }
            z_prev = std::mem::replace(&mut z, vec![0.0; 3]);
        }
    }
}

#[test]
fn dc_dogd_matches_matrix_form() {
    let (n, d, horizon) = (4, 3, 50);
    let (_, p) = gossip_matrix_for(TopologyKind::Cycle, n, true).unwrap();
    let stream = quadratic_stream(n, d, horizon, 0.5, 2.0, 11).unwrap();
    let (gamma, eta) = (0.6, 0.2);
    let dom = Domain::Box { half_width: 0.5 };
    let hp = HyperParams {
        l1: 1,
        l2: 0,
        gamma,
        eta: EtaSchedule::Constant { eta },
        exploration: None,
    };
    let mut s = spec(&stream, &p, hp, CompressorKind::TopK { k: 1 });
    s.domain = dom;
    let out = run_algorithm(Algorithm::DcDogd, &s, None).unwrap();
    let plays = out.plays.unwrap();

    // X ← Π(X − ηG + γ(P − I)X̂), X̂ ← X̂ + top_1(X − X̂), rows are learners
    let pm: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| p.get(i, j)).collect()).collect();
    let mut x = vec![vec![0.0; d]; n];
    let mut xh = vec![vec![0.0; d]; n];
    for t in 0..horizon {
        for i in 0..n {
            for c in 0..d {
                assert!((plays[t][i][0][c] - x[i][c]).abs() <= 1e-12, "t={t} i={i} c={c}: {:?} vs {:?}", plays[t][i][0], x[i]);
            }
        }
        let pxh = matmul(&pm, &xh);
        x = (0..n)
            .map(|i| {
                let g = stream.grad(t, i, &x[i]);
                let v: Vec<f64> = (0..d)
                    .map(|c| x[i][c] - eta * g[c] + gamma * (pxh[i][c] - xh[i][c]))
                    .collect();
                dom.project(&v)
            })
            .collect();
        for i in 0..n {
            let diff: Vec<f64> = (0..d).map(|c| x[i][c] - xh[i][c]).collect();
            // ties go to the lowest index
            let mut top = 0;
            for c in 1..d {
                if diff[c].abs() > diff[top].abs() {
                    top = c;
                }
            }
            xh[i][top] += diff[top];
        }
    }
}

#[test]
fn d_ogd_equals_uncompressed_dc_dogd_with_unit_gamma() {
    let (_, p) = gossip_matrix_for(TopologyKind::Path, 6, true).unwrap();
    let stream = linear_adversarial_stream(6, 4, 60, 1.0, 2);
    let hp = HyperParams {
        l1: 1,
        l2: 0,
        gamma: 1.0,
        eta: EtaSchedule::Constant { eta: 0.05 },
        exploration: None,
    };
    let s = spec(&stream, &p, hp, CompressorKind::Identity);
    let a = run_algorithm(Algorithm::DOgd, &s, None).unwrap();
    let b = run_algorithm(Algorithm::DcDogd, &s, None).unwrap();
    for (pa, pb) in a.plays.unwrap().iter().flatten().zip(b.plays.unwrap().iter().flatten()) {
        for (u, v) in pa[0].iter().zip(&pb[0]) {
            assert!((u - v).abs() <= 1e-12);
        }
    }
    assert_eq!(a.total_bytes, b.total_bytes);
}

#[test]
fn bandit_plays_stay_feasible() {
    let (_, p) = gossip_matrix_for(TopologyKind::Cycle, 6, true).unwrap();
    let stream = linear_adversarial_stream(6, 5, 200, 1.0, 3);
    let hp = HyperParams {
        l1: 3,
        l2: 2,
        gamma: 0.3,
        eta: EtaSchedule::Constant { eta: 0.5 },
        exploration: Some(Exploration { eps: 0.25, zeta: 0.25 }),
    };
    for dom in [Domain::Ball { radius: 1.0 }, Domain::Box { half_width: 1.0 }] {
        for algo in [Algorithm::TopDobd1, Algorithm::TopDobd2] {
            let mut s = spec(&stream, &p, hp, CompressorKind::RandK { k: 2 });
            s.domain = dom;
            let out = run_algorithm(algo, &s, None).unwrap();
            let plays = out.plays.unwrap();
            let per = if algo == Algorithm::TopDobd2 { 2 } else { 1 };
            for row in &plays {
                for pts in row {
                    assert_eq!(pts.len(), per);
                    assert!(pts.iter().all(|q| dom.contains(q, 1e-12)), "{algo}");
                }
            }
            let inner = dom.shrink(0.25).unwrap();
            assert!(out.final_decisions.iter().all(|x| inner.contains(x, 1e-12)));
        }
    }
}

#[test]
fn one_message_per_learner_per_round() {
    let (_, p) = gossip_matrix_for(TopologyKind::Cycle, 5, true).unwrap();
    let stream = linear_adversarial_stream(5, 4, 23, 1.0, 1);
    let mut hp = small_hp();
    hp.l1 = 3;
    hp.exploration = Some(Exploration { eps: 0.1, zeta: 0.1 });
    for algo in Algorithm::ALL {
        let s = spec(&stream, &p, hp, CompressorKind::TopK { k: 2 });
        let mut records: Vec<RunRecord> = Vec::new();
        let mut sink = |r: &RunRecord| records.push(r.clone());
        let out = run_algorithm(algo, &s, Some(&mut sink)).unwrap();
        assert_eq!(out.total_messages, 5 * 23);
        assert_eq!(records.len(), 5 * 23);
        assert!(records.iter().all(|r| r.round_messages == 1));
        let bytes: f64 = records.iter().map(|r| r.round_bytes).sum();
        assert!((bytes - out.total_bytes).abs() <= 1e-9 * out.total_bytes.max(1.0));
    }
}

#[test]
fn partial_final_block_does_not_commit() {
    let stream = scripted_linear(&GRADS[..7]);
    let p = two_node_matrix();
    let out = run_algorithm(Algorithm::TopDogd, &spec(&stream, &p, small_hp(), CompressorKind::Identity), None).unwrap();
    // blocks 1–3 are complete; block 4 is cut after one round
    assert!(close(out.final_decisions[0][0], -25.0 / 128.0));
    assert!(close(out.final_decisions[1][0], -1.0));
}

#[test]
fn horizon_shorter_than_block_is_rejected() {
    let stream = scripted_linear(&GRADS[..1]);
    let p = two_node_matrix();
    let err = run_algorithm(Algorithm::TopDogd, &spec(&stream, &p, small_hp(), CompressorKind::Identity), None);
    assert!(err.is_err());
}

#[test]
fn ablation_without_compensation_still_runs_feasibly() {
    let (_, p) = gossip_matrix_for(TopologyKind::Cycle, 8, true).unwrap();
    let stream = linear_adversarial_stream(8, 6, 300, 1.0, 8);
    let hp = HyperParams {
        l1: 6,
        l2: 0,
        gamma: 0.2,
        eta: EtaSchedule::Constant { eta: 0.5 },
        exploration: None,
    };
    let with = HyperParams { l2: 2, ..hp };
    let kind = CompressorKind::TopK { k: 2 };
    let mut records = Vec::new();
    let mut sink = |r: &RunRecord| records.push(r.e_compression);
    let a = run_algorithm(Algorithm::TopDogd, &spec(&stream, &p, hp, kind), Some(&mut sink)).unwrap();
    let b = run_algorithm(Algorithm::TopDogd, &spec(&stream, &p, with, kind), None).unwrap();
    let dom = Domain::Box { half_width: 1.0 };
    assert!(a.final_decisions.iter().all(|x| dom.contains(x, 1e-12)));
    assert_ne!(a.final_regret, b.final_regret);
    assert!(records.iter().all(|e| e.is_finite()));
}
