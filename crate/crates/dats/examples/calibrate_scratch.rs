// Scratch calibration: agent roster on the delayed pendulum.
use dats::agent::{run_blind_pets, run_dats, run_wpets, AgentConfig};
use dats::delay::DelayedEnv;
use dats::envs::Pendulum;
use dats::model::TrainConfig;
use dats::planner::CemConfig;
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let agent = args.get(1).map(|s| s.as_str()).unwrap_or("dats").to_string();
    let trials: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(10);
    let seed: u64 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(0);

    let config = AgentConfig {
        trials,
        members: 5,
        hidden: vec![48],
        train: TrainConfig::default(),
        cem: CemConfig {
            population: 96,
            elites: 9,
            iterations: 4,
            horizon: 22,
            particles: 5,
            init_std: vec![1.0],
            std_floor: 1e-3,
            alpha: 0.1,
            include_prefix_reward: true,
        },
        buffer_capacity: 1_000_000,
    };
    let start = Instant::now();
    let mut env = DelayedEnv::new(Pendulum::new(), 1);
    let run = match agent.as_str() {
        "dats" => run_dats(&mut env, &config, seed).unwrap(),
        "blind" => run_blind_pets(&mut env, &config, seed).unwrap(),
        "wpets" => run_wpets(&mut env, &config, seed).unwrap(),
        _ => panic!("unknown agent"),
    };
    let scores: Vec<f64> = run.results.iter().map(|r| r.episode_return).collect();
    let last3 = &scores[scores.len() - 3..];
    println!(
        "{agent} seed {seed}: last3 mean {:.1} | trials {:.1?} | residual {:.5} | {:.0}s",
        last3.iter().sum::<f64>() / 3.0,
        scores,
        run.model.mean_squared_residual(&run.buffer).unwrap(),
        start.elapsed().as_secs_f64()
    );
}
