use std::path::PathBuf;
use std::process::ExitCode;

use bandit_mdp::instances::{
    hard_instance_general, hard_instance_ordered, lower_bound_epsilon, random_generic,
    HardInstanceGeneralSpec, HardInstanceOrderedSpec,
};
use bandit_mdp::learners::Algorithm;
use bandit_mdp::mdp::{optimal_policy, policy_value};
use bandit_mdp::{LayeredMdp, Policy};
use bandit_mdp_harness::{
    emit_svg, parse_csv, run_grid, ApplicationSpec, ExperimentConfig, HarnessError, InstanceRef,
};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "bandit-mdp", version, about = "Layered-MDP learners under bandit feedback")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    ProphetUniform,
    ProphetRandom,
    PricingUniform,
    PricingRandom,
    HardGeneral,
    HardOrdered,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dist {
    Uniform,
    Random,
}

#[derive(Subcommand)]
enum Command {
    /// Write an instance as an MDP document (or an application spec with --spec-only).
    MakeInstance {
        #[arg(long, value_enum)]
        kind: Option<Kind>,
        /// Compile an application spec file instead of generating one.
        #[arg(long, conflicts_with = "kind")]
        from_spec: Option<PathBuf>,
        #[arg(long = "H", default_value_t = 15)]
        horizon: usize,
        #[arg(long = "k", default_value_t = 2)]
        capacity: usize,
        #[arg(long = "A", default_value_t = 5)]
        num_values: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Gap of the hard families; defaults to min(√(L/T), 1)/8 with --T.
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long = "T", default_value_t = 100_000)]
        episodes: u64,
        /// Secret actions of the general hard family (comma separated).
        #[arg(long, value_delimiter = ',')]
        theta: Vec<usize>,
        /// 1-based down stages of the ordered hard family.
        #[arg(long, value_delimiter = ',')]
        down: Vec<usize>,
        /// Down actions (1..=A) of the ordered hard family.
        #[arg(long, value_delimiter = ',')]
        actions: Vec<usize>,
        /// Random fixture with an action ordering.
        #[arg(long)]
        ordered: bool,
        /// Emit the application spec rather than the compiled MDP.
        #[arg(long)]
        spec_only: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact value of a policy (rows[level][stage] JSON) and of the optimum.
    EvalPolicy {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        policy: Option<PathBuf>,
    },
    /// Run an (instance × algorithm × seed) grid.
    RunExperiment {
        #[arg(long)]
        config: Option<PathBuf>,
        /// MDP document or application spec; overrides --H/--k/--A.
        #[arg(long)]
        instance: Option<PathBuf>,
        #[arg(long = "H")]
        horizon: Option<usize>,
        #[arg(long = "k")]
        capacity: Option<usize>,
        #[arg(long = "A")]
        num_values: Option<usize>,
        #[arg(long, value_enum, default_value = "uniform")]
        dist: Dist,
        #[arg(long, value_delimiter = ',')]
        algo: Vec<String>,
        #[arg(long = "T")]
        episodes: Option<u64>,
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        normalize_by_k: bool,
        #[arg(long)]
        stride: Option<u64>,
        /// Run cells one at a time (cleaner timings).
        #[arg(long)]
        sequential: bool,
    },
    /// Render CSV traces into one SVG panel.
    Render {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "cumulative regret")]
        title: String,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn write_text(out: Option<&PathBuf>, text: &str) -> Result<(), HarnessError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| HarnessError::Io {
            path: path.clone(),
            source: e,
        }),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, HarnessError> {
    match cli.command {
        Command::MakeInstance {
            kind,
            from_spec,
            horizon,
            capacity,
            num_values,
            seed,
            epsilon,
            episodes,
            theta,
            down,
            actions,
            ordered,
            spec_only,
            out,
        } => {
            if let Some(path) = from_spec {
                let mdp = bandit_mdp_harness::InstanceRef::File { path }.build()?;
                write_text(out.as_ref(), &mdp.to_json())?;
                return Ok(ExitCode::SUCCESS);
            }
            let kind = kind.ok_or_else(|| HarnessError::Config("pass --kind or --from-spec".into()))?;
            let app = |pricing: bool, random: bool| {
                if random {
                    InstanceRef::ProphetRandom {
                        horizon,
                        capacity,
                        num_values,
                        seed,
                        pricing,
                    }
                } else {
                    InstanceRef::ProphetUniform {
                        horizon,
                        capacity,
                        num_values,
                        pricing,
                    }
                }
            };
            let inst = match kind {
                Kind::ProphetUniform => Some(app(false, false)),
                Kind::ProphetRandom => Some(app(false, true)),
                Kind::PricingUniform => Some(app(true, false)),
                Kind::PricingRandom => Some(app(true, true)),
                _ => None,
            };
            if let Some(inst) = inst {
                let spec: ApplicationSpec = inst.spec()?.expect("generated spec");
                let text = if spec_only {
                    serde_json::to_string_pretty(&spec).expect("specs serialize")
                } else {
                    spec.compile()?.to_json()
                };
                write_text(out.as_ref(), &text)?;
                return Ok(ExitCode::SUCCESS);
            }
            let mdp: LayeredMdp = match kind {
                Kind::HardGeneral => {
                    let theta = if theta.is_empty() { vec![0; horizon] } else { theta };
                    let family = (num_values as f64).powi(theta.len() as i32);
                    hard_instance_general(&HardInstanceGeneralSpec {
                        epsilon: epsilon.unwrap_or_else(|| lower_bound_epsilon(family, episodes as f64)),
                        theta,
                        num_actions: num_values,
                    })?
                }
                Kind::HardOrdered => {
                    let spec = HardInstanceOrderedSpec {
                        down_stages: down,
                        actions,
                    };
                    let k = spec.down_stages.len();
                    let family = binomial(horizon - 1, k) * (num_values as f64).powi(k as i32);
                    hard_instance_ordered(
                        &spec,
                        horizon,
                        num_values,
                        epsilon.unwrap_or_else(|| lower_bound_epsilon(family, episodes as f64)),
                    )?
                }
                _ => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    random_generic(horizon, capacity, num_values, &mut rng, ordered)?
                }
            };
            write_text(out.as_ref(), &mdp.to_json())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::EvalPolicy { instance, policy } => {
            let mdp = InstanceRef::File { path: instance }.build()?;
            let (opt_policy, opt) = optimal_policy(&mdp);
            println!("opt {opt}");
            println!("optimal policy {}", serde_json::to_string(&opt_policy.to_matrix()).expect("matrix"));
            if let Some(path) = policy {
                let text = std::fs::read_to_string(&path).map_err(|e| HarnessError::Io { path, source: e })?;
                let rows: Vec<Vec<usize>> = serde_json::from_str(&text).map_err(|e| HarnessError::Mdp(e.into()))?;
                let p = Policy::from_matrix(&rows)?;
                mdp.check_policy(&p)?;
                let v = policy_value(&mdp, &p);
                println!("value {v}");
                println!("gap {}", opt - v);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::RunExperiment {
            config,
            instance,
            horizon,
            capacity,
            num_values,
            dist,
            algo,
            episodes,
            seeds,
            out,
            normalize_by_k,
            stride,
            sequential,
        } => {
            let mut cfg = match &config {
                Some(path) => ExperimentConfig::load(path)?,
                None => ExperimentConfig {
                    instances: vec![],
                    algorithms: vec![],
                    episodes: 100_000,
                    seeds: (0..5).collect(),
                    out: "results".into(),
                    normalize_by_k: false,
                    stride: None,
                    parallel: true,
                },
            };
            if let Some(path) = instance {
                cfg.instances = vec![InstanceRef::File { path }];
            } else if horizon.is_some() || capacity.is_some() || num_values.is_some() {
                let (h, k, a) = (horizon.unwrap_or(15), capacity.unwrap_or(2), num_values.unwrap_or(5));
                cfg.instances = vec![match dist {
                    Dist::Uniform => InstanceRef::ProphetUniform {
                        horizon: h,
                        capacity: k,
                        num_values: a,
                        pricing: false,
                    },
                    Dist::Random => InstanceRef::ProphetRandom {
                        horizon: h,
                        capacity: k,
                        num_values: a,
                        seed: 0,
                        pricing: false,
                    },
                }];
            }
            if !algo.is_empty() {
                cfg.algorithms = algo
                    .iter()
                    .map(|name| {
                        Algorithm::parse(name)
                            .ok_or_else(|| HarnessError::Config(format!("unknown algorithm {name:?}")))
                    })
                    .collect::<Result<_, _>>()?;
            }
            if let Some(t) = episodes {
                cfg.episodes = t;
            }
            if !seeds.is_empty() {
                cfg.seeds = seeds;
            }
            if let Some(o) = out {
                cfg.out = o;
            }
            if normalize_by_k {
                cfg.normalize_by_k = true;
            }
            if stride.is_some() {
                cfg.stride = stride;
            }
            if sequential {
                cfg.parallel = false;
            }
            let result = run_grid(&cfg)?;
            for row in &result.runtime {
                println!(
                    "{:<32} {:<8} final regret {:>12.4}  {:>9.2} us/episode",
                    row.instance, row.algorithm, row.mean_final_regret, row.us_per_episode
                );
            }
            for f in &result.failures {
                eprintln!("failed: {} {} seed {}: {}", f.instance, f.algorithm, f.seed, f.error);
            }
            Ok(if result.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Render { inputs, out, title } => {
            let mut traces = Vec::new();
            for path in &inputs {
                traces.extend(parse_csv(path)?);
            }
            emit_svg(&out, &title, "cumulative regret", &traces)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}
