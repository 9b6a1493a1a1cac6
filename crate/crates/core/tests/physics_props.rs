mod common;

use std::collections::BTreeSet;

use common::{mirror, mirror_action, probing_action, random_episode, rng, scene, state_gap};
use proptest::prelude::*;
use rand::Rng;
use rmpc_push::physics::{max_penetration, rollout, step, BodyId, PhysicsConfig};
use rmpc_push::types::{RobotAction, Vec2};

#[test]
fn fifty_random_episodes_replay_bit_identically() {
    let cfg = PhysicsConfig::default();
    for seed in 0..50 {
        let (states, actions) = random_episode(seed, 40, &cfg);
        let (again, _) = rollout(&states[0], &actions, &cfg).unwrap();
        for (a, b) in states[1..].iter().zip(&again) {
            assert_eq!(a.snapshot(), b.snapshot(), "episode {seed}");
        }
    }
}

#[test]
fn penetration_stays_within_tolerance() {
    let cfg = PhysicsConfig::default();
    for seed in 0..30 {
        let (states, _) = random_episode(seed, 80, &cfg);
        for (k, s) in states.iter().enumerate() {
            let p = max_penetration(s, &cfg);
            assert!(
                p <= cfg.penetration_tolerance,
                "episode {seed} step {k}: {p}"
            );
        }
    }
}

#[test]
fn kinetic_energy_decays_to_zero_without_input() {
    let cfg = PhysicsConfig::default();
    for seed in 0..30 {
        let (mut s, _) = scene(seed);
        let mut r = rng(seed);
        for o in &mut s.objects {
            o.linear_velocity = Vec2::new(r.random_range(-0.6..0.6), r.random_range(-0.6..0.6));
            o.angular_velocity = r.random_range(-3.0..3.0);
        }
        let mut energy = s.kinetic_energy();
        let mut steps = 0;
        while energy > 0.0 {
            s = step(&s, &RobotAction::hold(), &cfg).unwrap().0;
            let next = s.kinetic_energy();
            assert!(
                next <= energy + 1e-12,
                "scene {seed} step {steps}: {energy} -> {next}"
            );
            energy = next;
            steps += 1;
            assert!(steps < 200, "scene {seed} still moving");
        }
    }
}

#[test]
fn mirrored_scene_gives_mirrored_steps() {
    let cfg = PhysicsConfig::default();
    for seed in 0..50 {
        let (states, actions) = random_episode(seed, 80, &cfg);
        for (k, (s, a)) in states.iter().zip(&actions).enumerate() {
            let direct = mirror(&step(s, a, &cfg).unwrap().0);
            let reflected = step(&mirror(s), &mirror_action(a), &cfg).unwrap().0;
            let gap = state_gap(&direct, &reflected);
            assert!(gap <= 1e-9, "episode {seed} step {k}: {gap}");
        }
    }
}

#[test]
fn objects_outside_the_contact_chain_stay_put() {
    let cfg = PhysicsConfig::default();
    for seed in 0..20 {
        let (mut s, _) = scene(seed);
        let mut r = rng(seed + 100);
        for _ in 0..60 {
            let a = probing_action(&s, &mut r, cfg.limits.v_max);
            let (next, report) = step(&s, &a, &cfg).unwrap();
            let mut reached = BTreeSet::from([BodyId::Robot]);
            loop {
                let before = reached.len();
                for c in &report.contacts {
                    if reached.contains(&c.a) && c.b != BodyId::Wall {
                        reached.insert(c.b);
                    }
                    if reached.contains(&c.b) && c.a != BodyId::Wall {
                        reached.insert(c.a);
                    }
                }
                if reached.len() == before {
                    break;
                }
            }
            for (o, n) in s.objects.iter().zip(&next.objects) {
                let at_rest = o.linear_velocity == Vec2::zeros() && o.angular_velocity == 0.0;
                if at_rest && !reached.contains(&BodyId::Object(o.id)) {
                    assert_eq!(o.pose, n.pose, "scene {seed} object {}", o.id);
                }
            }
            s = next;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn step_is_pure(seed in 0u64..10_000, vx in -0.5..0.5f64, vy in -0.5..0.5f64) {
        let cfg = PhysicsConfig::default();
        let (s, _) = scene(seed);
        let before = s.snapshot();
        let a = RobotAction::new(Vec2::new(vx, vy) * 0.7, Vec2::zeros());
        let first = step(&s, &a, &cfg).unwrap().0;
        prop_assert_eq!(s.snapshot(), before);
        prop_assert_eq!(first.snapshot(), step(&s, &a, &cfg).unwrap().0.snapshot());
    }

    #[test]
    fn ids_and_shapes_are_preserved(seed in 0u64..10_000) {
        let cfg = PhysicsConfig::default();
        let (states, _) = random_episode(seed, 10, &cfg);
        let last = states.last().unwrap();
        for (a, b) in states[0].objects.iter().zip(&last.objects) {
            prop_assert_eq!(a.id, b.id);
            prop_assert_eq!(a.shape, b.shape);
            prop_assert_eq!(a.mass, b.mass);
        }
    }
}
