//! Runs every planner on a freshly generated batch and prints the summary table.
//!
//! cargo run --release --example compare_planners -- [scenes] [seed]

use std::time::Instant;

use rmpc_push::eval::{compare_planners, default_k_grid, generate_batch, EpisodeConfig};
use rmpc_push::planners::{Planner, PlannerConfig, PlannerKind};
use rmpc_push::scenegen::SceneGenConfig;

fn main() {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(20);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(0);
    let scenes =
        generate_batch(&SceneGenConfig::default().with_seed(seed), n).expect("scene batch");
    let base = Planner::new(PlannerConfig::default());
    let kinds = [
        PlannerKind::Rmpc,
        PlannerKind::Rmp,
        PlannerKind::Mpc,
        PlannerKind::Direct,
    ];
    for kind in kinds {
        let start = Instant::now();
        let c = compare_planners(
            &scenes,
            &[base.with_kind(kind)],
            &EpisodeConfig::default(),
            &default_k_grid(),
        )
        .expect("comparison");
        let s = &c.summaries[0];
        let r = |k: f64| {
            s.recall
                .iter()
                .find(|p| p.0 == k)
                .map(|p| p.1)
                .unwrap_or(0.0)
        };
        println!(
            "{:<9} ratio {:.4} success {:.2} dist {:.3} fail {} recall@.05 {:.2} @.1 {:.2} @.2 {:.2} @.4 {:.2}  ({:.1}s)",
            kind.name(),
            s.mean_ratio,
            s.success_rate,
            s.mean_final_distance,
            s.planner_failures,
            r(0.05),
            r(0.1),
            r(0.2),
            r(0.4),
            start.elapsed().as_secs_f64()
        );
    }
}
