mod common;

use holo::eval::load_corpus;
use holo::literal::ProblemInput;
use holo::pool::Pool;
use holo::reasoner::{Policy, ReasonerConfig, Session, Summary};
use holo::selector::{
    compute_reward, encode_state, train, write_log_csv, Hyper, QPolicy, RewardParams, STATE_DIM,
};
use proptest::prelude::*;

fn toy(name: &str) -> Vec<ProblemInput> {
    load_corpus(&common::corpus_dir(name)).unwrap().into_iter().map(|e| e.problem.unwrap()).collect()
}

fn quick() -> Hyper {
    Hyper { virtual_clock: true, batch: 8, ..Hyper::default() }
}

fn tmp(name: &str) -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("holo-selector-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

proptest! {
    #[test]
    fn reward_stays_in_unit_interval(
        theta in 0.0f64..1e6,
        alpha in 0.0f64..=1.0,
        sigma in 1e-3f64..1e3,
        satisfied in any::<bool>(),
        changed in any::<bool>(),
    ) {
        let prev = Summary::default();
        let next = Summary { edges: usize::from(changed), ..prev };
        let r = compute_reward(&prev, &next, satisfied, theta, &RewardParams { alpha, sigma });
        prop_assert!((-1.0..=1.0).contains(&r));
    }
}

#[test]
fn state_encoding_is_fixed_width_and_deterministic() {
    let pool = Pool::builtin();
    for id in ["quad_01", "circle_07", "other_02"] {
        let a = Session::new(common::hologram("curated", id), &pool, ReasonerConfig::default());
        let b = Session::new(common::hologram("curated", id), &pool, ReasonerConfig::default());
        let x = encode_state(&a);
        assert_eq!(x.len(), STATE_DIM);
        assert!(x.iter().all(|v| v.is_finite()));
        assert_eq!(x, encode_state(&b));
    }
}

#[test]
fn greedy_choice_respects_the_mask() {
    let pool = Pool::builtin();
    let policy = QPolicy::new(&pool, quick(), 5);
    let s = Session::new(common::hologram("curated", "tri_01"), &pool, ReasonerConfig::default());
    let mut allowed = vec![true; pool.len()];
    let first = policy.choose(&s, &allowed).unwrap();
    allowed[first] = false;
    let second = policy.choose(&s, &allowed).unwrap();
    assert_ne!(first, second);
    assert_eq!(policy.choose(&s, &vec![false; pool.len()]), None);
}

#[test]
fn checkpoint_round_trip_and_resume_numbering() {
    let pool = Pool::builtin();
    let problems = toy("toy_train");
    let mut p = QPolicy::new(&pool, quick(), 9);
    let mut rows = Vec::new();
    train(&mut p, &pool, &problems, 3, &mut |r| rows.push(r.clone())).unwrap();
    let path = tmp("ck").join("policy.json");
    p.save(&path).unwrap();
    let mut back = QPolicy::load(&path).unwrap();
    assert_eq!(back, p);
    back.check_pool(&pool).unwrap();
    train(&mut back, &pool, &problems, 2, &mut |r| rows.push(r.clone())).unwrap();
    let eps: Vec<u64> = rows.iter().map(|r| r.episode).collect();
    assert_eq!(eps, vec![1, 2, 3, 4, 5]);

    let mut csv = Vec::new();
    write_log_csv(&rows, &mut csv).unwrap();
    let csv = String::from_utf8(csv).unwrap();
    assert_eq!(csv.lines().count(), 6);
    assert!(csv.starts_with("episode,cumulative_reward,solved,steps\n"));
}

#[test]
fn checkpoint_for_another_pool_is_rejected() {
    let pool = Pool::builtin();
    let p = QPolicy::new(&pool, quick(), 1);
    let smaller = Pool::new(pool.models()[..5].to_vec()).unwrap();
    assert!(p.check_pool(&smaller).is_err());
}

#[test]
fn bad_checkpoint_version_is_rejected() {
    let pool = Pool::builtin();
    let mut p = QPolicy::new(&pool, quick(), 1);
    p.version = 99;
    let path = tmp("ver").join("policy.json");
    p.save(&path).unwrap();
    assert!(QPolicy::load(&path).is_err());
}

#[test]
fn training_is_reproducible_with_virtual_clock() {
    let pool = Pool::builtin();
    let problems = toy("toy_train");
    let go = || {
        let mut p = QPolicy::new(&pool, quick(), 3);
        let mut rows = Vec::new();
        train(&mut p, &pool, &problems, 30, &mut |r| rows.push(r.clone())).unwrap();
        (p, rows)
    };
    assert_eq!(go(), go());
}
