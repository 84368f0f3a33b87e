use dats::agent::run_oracle_dats;
use dats::delay::DelayedEnv;
use dats::envs::{oracle_dynamics, EnvKind, Pendulum};
use dats::planner::CemConfig;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let pop: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(96);
    let iters: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(4);
    let horizon: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(25);
    let cem = CemConfig {
        population: pop,
        elites: (pop / 10).max(2),
        iterations: iters,
        horizon,
        particles: 1,
        init_std: vec![1.0],
        std_floor: 1e-3,
        alpha: 0.1,
        include_prefix_reward: true,
    };
    let oracle = oracle_dynamics(EnvKind::Pendulum);
    let mut env = DelayedEnv::new(Pendulum::new(), 1);
    let results = run_oracle_dats(&mut env, &oracle, 10, &cem, 0).unwrap();
    let scores: Vec<f64> = results.iter().map(|r| r.episode_return).collect();
    let mean = scores.iter().sum::<f64>() / scores.len() as f64;
    println!("pop={pop} iters={iters} h={horizon}: mean {mean:.1} {scores:.1?}");
}
