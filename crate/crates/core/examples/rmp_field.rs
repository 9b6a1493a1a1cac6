//! Samples the controller around one target: the local pushing field in
//! the push frame, and the resolved approach acceleration with and without
//! a nearby obstacle.
//!
//! cargo run --example rmp_field

use rmpc_push::rmp::{
    control_detailed, push_local_field, ControlConfig, ControlMode, Obstacles, RmpWeights,
};
use rmpc_push::types::{
    ObjectState, Pose2, PushTask, RobotState, SceneState, Shape, Vec2, Workspace,
};

fn main() {
    let extent = 0.08;
    println!("pushing field (alphas = 1), rows y = 0.1 .. -0.1, columns x = -0.1 .. 0.1");
    for j in (-2..=2).rev() {
        let y = 0.05 * j as f64;
        let row: Vec<String> = (-2..=2)
            .map(|i| {
                let v = push_local_field(Vec2::new(0.05 * i as f64, y), extent, [1.0; 4]);
                format!("({:+.4},{:+.4})", v.x, v.y)
            })
            .collect();
        println!("  {}", row.join(" "));
    }

    let target = ObjectState::new(
        1,
        Shape::Disc { radius: 0.04 },
        Pose2::new(1.0, 1.0, 0.0),
        0.3,
    );
    let obstacle = ObjectState::new(
        2,
        Shape::Box {
            width: 0.08,
            length: 0.08,
        },
        Pose2::new(0.7, 1.0, 0.0),
        0.4,
    );
    let task = PushTask {
        target_id: 1,
        goal: Vec2::new(1.6, 1.0),
        goal_tolerance: 0.05,
    };
    let cfg = ControlConfig::default();
    println!("\napproach acceleration for a robot at rest (x, y -> ax, ay)");
    for (label, objects) in [
        ("target only", vec![target.clone()]),
        ("obstacle at (0.7, 1.0)", vec![target.clone(), obstacle]),
    ] {
        println!("  {label}");
        for (x, y) in [(0.4, 1.0), (0.5, 1.05), (0.6, 0.9), (1.0, 0.6), (1.3, 1.0)] {
            let state = SceneState {
                objects: objects.clone(),
                robot: RobotState::at(x, y),
                time: 0.0,
                workspace: Workspace::default(),
            };
            let out = control_detailed(
                &state,
                &task,
                &RmpWeights::nominal_for(&state),
                &cfg,
                Obstacles::Avoid,
            )
            .expect("controller output");
            let a = match out.mode {
                ControlMode::Approach => out.action.acceleration,
                ControlMode::Push => out.action.velocity,
            };
            println!(
                "    ({x:.2}, {y:.2}) -> ({:+.3}, {:+.3}) {:?}",
                a.x, a.y, out.mode
            );
        }
    }
}
