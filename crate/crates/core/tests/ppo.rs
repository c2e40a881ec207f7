use lpopt::eval::Bounds;
use lpopt::ppo::{
    logprob_and_entropy, loss_and_grad, ppo_loss, sample_action, PolicyParams, Ppo, PpoConfig, TrajectoryBatch,
};
use lpopt::rng;
use rand::Rng;

fn random_case(seed: u64) -> (PolicyParams, TrajectoryBatch, PpoConfig) {
    let mut r = rng::master(seed);
    let n_slots = r.random_range(1..5);
    let bounds: Vec<Bounds> = (0..n_slots).map(|_| Bounds::new(0, r.random_range(1..5))).collect();
    let mut p = PolicyParams::zeros(&bounds);
    let mut theta = p.to_flat();
    for t in theta.iter_mut() {
        *t = r.random_range(-3.0..3.0);
    }
    p.set_flat(&theta);
    let incumbent = (seed % 2 == 0).then(|| bounds.iter().map(|b| r.random_range(0..b.cardinality() as usize)).collect::<Vec<_>>());
    let n = r.random_range(3..12);
    let mut actions = Vec::new();
    let mut old = Vec::new();
    for _ in 0..n {
        let (a, lp) = sample_action(&p, incumbent.as_deref(), &mut r);
        // perturb the snapshot so ratios differ from 1
        old.push(lp.iter().map(|l| l + r.random_range(-0.3..0.3)).collect());
        actions.push(a);
    }
    let rewards: Vec<f64> = (0..n).map(|_| r.random_range(-2.0..2.0)).collect();
    let batch = TrajectoryBatch::new(actions, old, &rewards, seed % 3 != 0, r.random_range(-0.5..0.5), incumbent);
    let cfg = PpoConfig { vf_coef: 0.5, ent_coef: 0.05, ..PpoConfig::default() };
    (p, batch, cfg)
}

fn loss_at(p: &PolicyParams, theta: &[f64], batch: &TrajectoryBatch, cfg: &PpoConfig) -> f64 {
    let mut q = p.clone();
    q.set_flat(theta);
    ppo_loss(batch, &q, cfg).0
}

#[test]
fn analytic_gradient_matches_central_differences() {
    for seed in 0..20 {
        let (p, batch, cfg) = random_case(seed);
        let (_, g) = ppo_loss(&batch, &p, &cfg);
        let theta = p.to_flat();
        let h = 1e-5;
        let fd: Vec<f64> = (0..theta.len())
            .map(|i| {
                let mut up = theta.clone();
                let mut dn = theta.clone();
                up[i] += h;
                dn[i] -= h;
                (loss_at(&p, &up, &batch, &cfg) - loss_at(&p, &dn, &batch, &cfg)) / (2.0 * h)
            })
            .collect();
        let diff = g.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let scale = g.iter().map(|a| a * a).sum::<f64>().sqrt().max(fd.iter().map(|a| a * a).sum::<f64>().sqrt());
        assert!(diff / scale < 1e-4, "seed {seed}: relative error {}", diff / scale);
    }
}

#[test]
fn clipping_is_inert_at_unit_ratio() {
    for seed in 0..10 {
        let (p, mut batch, cfg) = random_case(seed);
        batch.old_logp = batch
            .actions
            .iter()
            .map(|a| {
                let inc = batch.incumbent.as_deref();
                p.probs(inc).iter().zip(a).map(|(pk, &ak)| pk[ak].ln()).collect()
            })
            .collect();
        let idx: Vec<usize> = (0..batch.len()).collect();
        let (l1, g1) = loss_and_grad(&batch, &idx, &p, &cfg, true);
        let (l2, g2) = loss_and_grad(&batch, &idx, &p, &cfg, false);
        assert!((l1 - l2).abs() < 1e-12);
        for (a, b) in g1.iter().zip(&g2) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

fn bandit_updates(cfg: PpoConfig, updates: usize, reward: impl Fn(&[usize]) -> f64) -> Ppo {
    let b = [Bounds::new(0, 1)];
    let mut ppo = Ppo::new(cfg, &b, 3).unwrap();
    let mut r = rng::master(3);
    for _ in 0..updates {
        let mut actions = Vec::new();
        let mut logps = Vec::new();
        let mut rewards = Vec::new();
        for _ in 0..32 {
            let (a, lp) = sample_action(&ppo.params, None, &mut r);
            rewards.push(reward(&a));
            actions.push(a);
            logps.push(lp);
        }
        let batch = TrajectoryBatch::new(actions, logps, &rewards, ppo.cfg.reward_norm, ppo.params.value, None);
        ppo.update(&batch);
    }
    ppo
}

#[test]
fn two_armed_bandit_converges() {
    let cfg = PpoConfig { ent_coef: 0.0, ..PpoConfig::default() };
    let ppo = bandit_updates(cfg, 200, |a| if a[0] == 0 { 1.0 } else { 0.0 });
    let p = ppo.params.probs(None)[0][0];
    assert!(p >= 0.99, "P(best arm) = {p}");
}

#[test]
fn strong_entropy_bonus_keeps_policy_flat() {
    let cfg = PpoConfig { ent_coef: 10.0, ..PpoConfig::default() };
    let ppo = bandit_updates(cfg, 100, |_| 0.0);
    let (_, h) = logprob_and_entropy(&ppo.params, &[0], None);
    assert!(h >= 0.99 * 2f64.ln(), "H = {h}");
}

#[test]
fn sampled_actions_stay_in_range() {
    let b = [Bounds::new(0, 4), Bounds::new(0, 0), Bounds::new(0, 7)];
    let mut p = PolicyParams::zeros(&b);
    p.logits[2][5] = 100.0;
    let mut r = rng::master(9);
    for _ in 0..1000 {
        let (a, lp) = sample_action(&p, None, &mut r);
        assert!(a[0] < 5 && a[1] == 0 && a[2] == 5);
        assert!(lp.iter().all(|l| l.is_finite() && *l <= 0.0));
    }
}

#[test]
fn sampling_frequencies() {
    let b = [Bounds::new(0, 3)];
    let mut p = PolicyParams::zeros(&b);
    let mut r = rng::master(11);
    let n = 40_000;
    let mut counts = [0usize; 4];
    for _ in 0..n {
        let (a, lp) = sample_action(&p, None, &mut r);
        assert_eq!(lp[0], logprob_and_entropy(&p, &a, None).0);
        counts[a[0]] += 1;
    }
    let sd = (n as f64 * 0.25 * 0.75).sqrt();
    assert!(counts.iter().all(|&c| (c as f64 - n as f64 / 4.0).abs() < 3.0 * sd), "{counts:?}");
    p.logits[0][2] = 50.0;
    let hits = (0..10_000).filter(|_| sample_action(&p, None, &mut r).0[0] == 2).count();
    assert!(hits as f64 >= 0.999 * 10_000.0);
}

#[test]
fn entropy_is_maximal_at_uniform() {
    let b = [Bounds::new(0, 4); 3];
    let uniform = logprob_and_entropy(&PolicyParams::zeros(&b), &[0; 3], None).1;
    let mut r = rng::master(5);
    for _ in 0..200 {
        let mut p = PolicyParams::zeros(&b);
        let mut theta = p.to_flat();
        for t in theta.iter_mut() {
            *t = r.random_range(-3.0..3.0);
        }
        p.set_flat(&theta);
        let h = logprob_and_entropy(&p, &[0; 3], None).1;
        assert!(h >= 0.0 && h <= uniform + 1e-12);
    }
}

#[test]
fn unit_ratio_surrogate_is_mean_advantage() {
    let (p, mut batch, _) = random_case(4);
    let inc = batch.incumbent.clone();
    batch.old_logp = batch
        .actions
        .iter()
        .map(|a| p.probs(inc.as_deref()).iter().zip(a).map(|(pk, &ak)| pk[ak].ln()).collect())
        .collect();
    let cfg = PpoConfig { vf_coef: 0.0, ent_coef: 0.0, ..PpoConfig::default() };
    let (loss, _) = ppo_loss(&batch, &p, &cfg);
    let mean_a = batch.advantages.iter().sum::<f64>() / batch.len() as f64;
    assert!((loss + mean_a).abs() < 1e-12);
}
