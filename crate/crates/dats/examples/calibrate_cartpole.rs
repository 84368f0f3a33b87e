use dats::agent::{run_dats, AgentConfig};
use dats::delay::DelayedEnv;
use dats::envs::Cartpole;
use dats::model::TrainConfig;
use dats::planner::CemConfig;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(0);
    let trials: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(6);
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
            horizon: 25,
            particles: 5,
            init_std: vec![0.5],
            std_floor: 1e-3,
            alpha: 0.1,
            include_prefix_reward: true,
        },
        buffer_capacity: 1_000_000,
    };
    let mut env = DelayedEnv::new(Cartpole::new(), n);
    let run = run_dats(&mut env, &config, seed).unwrap();
    let scores: Vec<f64> = run.results.iter().map(|r| r.episode_return).collect();
    println!("cartpole n={n} seed={seed}: {scores:.0?}");
}
