use clap::{Args, Parser, Subcommand, ValueEnum};
use mpbnb::bnb_cert::{bnb_cert, CertConfig, Certificate, Mode};
use mpbnb::bnb_online::{bnb_solve, BranchRule, ChildOrder, Heuristic, NodeRule, SolverConfig, Subopt};
use mpbnb::harness::{emit_region_map, parse_grid, validate_grid};
use mpbnb::problems::{random_instance, Kind, MpProblem};
use mpbnb::quad_compare::Approx;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mpbnb", version, about = "Branch and bound for MILP/MIQP with parametric complexity certification")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve at one parameter value.
    Solve {
        #[arg(long)]
        problem: PathBuf,
        /// Comma separated parameter value.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        theta: Vec<f64>,
        #[command(flatten)]
        rules: RuleArgs,
    },
    /// Certify the solver over the problem's parameter set.
    Certify {
        #[arg(long)]
        problem: PathBuf,
        #[command(flatten)]
        rules: RuleArgs,
        #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value_t = ApproxArg::Atomic)]
        approx: ApproxArg,
        /// Conservative mode: test every collected upper bound.
        #[arg(long)]
        all_uppers: bool,
        #[arg(long, default_value_t = mpbnb::mp_cert::DEFAULT_PIECE_BUDGET)]
        budget: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare a certificate with online runs on a lattice.
    Validate {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        certificate: PathBuf,
        /// Points per axis, e.g. 100x100.
        #[arg(long, default_value = "100x100")]
        grid: String,
        /// Use the configuration stored in the certificate.
        #[arg(long)]
        config_echo: bool,
        #[command(flatten)]
        rules: RuleArgs,
        #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
        mode: ModeArg,
        /// Write the full report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Write a random instance.
    Generate {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        nb: usize,
        #[arg(long)]
        nc: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        ntheta: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rasterize a certificate over two parameter axes as CSV.
    Map {
        #[arg(long)]
        certificate: PathBuf,
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0,1")]
        axes: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        res: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Clone)]
struct RuleArgs {
    #[arg(long, value_enum, default_value_t = NodeArg::Df)]
    node_rule: NodeArg,
    #[arg(long, value_enum, default_value_t = BranchArg::Fb)]
    branch_rule: BranchArg,
    #[arg(long, value_enum, default_value_t = HeuristicArg::None)]
    heuristic: HeuristicArg,
    #[arg(long)]
    warm_start: bool,
    /// Which child is explored first.
    #[arg(long, value_enum, default_value_t = OrderArg::ZeroFirst)]
    order: OrderArg,
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    #[arg(long, default_value_t = 0.0)]
    eps_r: f64,
    #[arg(long)]
    tcut: Option<u64>,
    #[arg(long)]
    mcut: Option<usize>,
    #[arg(long, default_value_t = 2)]
    r_n0: usize,
    #[arg(long, default_value_t = 0.5)]
    rins_ratio: f64,
}

#[derive(ValueEnum, Clone, Copy)]
enum NodeArg {
    Df,
    Brf,
    Bf,
}

#[derive(ValueEnum, Clone, Copy)]
enum BranchArg {
    Fb,
    Mib,
}

#[derive(ValueEnum, Clone, Copy)]
enum HeuristicArg {
    None,
    Lb,
    Rins,
}

#[derive(ValueEnum, Clone, Copy)]
enum OrderArg {
    ZeroFirst,
    OneFirst,
}

#[derive(ValueEnum, Clone, Copy)]
enum ModeArg {
    Exact,
    Conservative,
}

#[derive(ValueEnum, Clone, Copy)]
enum ApproxArg {
    Atomic,
    Under,
    Mccormick,
}

#[derive(ValueEnum, Clone, Copy)]
enum KindArg {
    Milp,
    Miqp,
}

impl RuleArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            node_rule: match self.node_rule {
                NodeArg::Df => NodeRule::Df,
                NodeArg::Brf => NodeRule::Brf,
                NodeArg::Bf => NodeRule::Bf,
            },
            branch_rule: match self.branch_rule {
                BranchArg::Fb => BranchRule::Fb,
                BranchArg::Mib => BranchRule::Mib,
            },
            heuristic: match self.heuristic {
                HeuristicArg::None => Heuristic::None,
                HeuristicArg::Lb => Heuristic::Lb,
                HeuristicArg::Rins => Heuristic::Rins,
            },
            warm_start: self.warm_start,
            subopt: Subopt { eps: self.eps, eps_theta: vec![], eps_r: self.eps_r, t_cut: self.tcut, m_cut: self.mcut },
            order: match self.order {
                OrderArg::ZeroFirst => ChildOrder::ZeroFirst,
                OrderArg::OneFirst => ChildOrder::OneFirst,
            },
            r_n0: self.r_n0,
            rins_ratio: self.rins_ratio,
            ..Default::default()
        }
    }
}

fn mode_of(m: ModeArg) -> Mode {
    match m {
        ModeArg::Exact => Mode::Exact,
        ModeArg::Conservative => Mode::Conservative,
    }
}

fn run(cli: Cli) -> mpbnb::Result<bool> {
    match cli.cmd {
        Cmd::Solve { problem, theta, rules } => {
            let p = MpProblem::load(&problem)?;
            let cfg = rules.config();
            cfg.validate()?;
            let o = bnb_solve(&p, &theta, &cfg)?;
            let out = serde_json::json!({
                "J": if o.j_bar.is_finite() { serde_json::json!(o.j_bar) } else { serde_json::Value::Null },
                "x": o.x_bar.map(|x| x.as_slice().to_vec()),
                "kappa": o.kappa,
            });
            println!("{}", serde_json::to_string_pretty(&out).unwrap());
            Ok(true)
        }
        Cmd::Certify { problem, rules, mode, approx, all_uppers, budget, out } => {
            let p = MpProblem::load(&problem)?;
            let cfg = CertConfig {
                solver: rules.config(),
                mode: mode_of(mode),
                approx: match approx {
                    ApproxArg::Atomic => Approx::Atomic,
                    ApproxArg::Under => Approx::Under,
                    ApproxArg::Mccormick => Approx::McCormick,
                },
                all_uppers,
                budget,
            };
            let cert = bnb_cert(&p, &cfg)?;
            cert.save(&out)?;
            let k = cert.max_kappa();
            println!("{} regions, worst case {} iterations / {} nodes", cert.regions.len(), k.iterations, k.nodes);
            Ok(true)
        }
        Cmd::Validate { problem, certificate, grid, config_echo, rules, mode, report } => {
            let p = MpProblem::load(&problem)?;
            let cert = Certificate::load(&certificate)?;
            let cfg = if config_echo {
                cert.config.clone().ok_or_else(|| mpbnb::Error::Invalid("certificate has no configuration".into()))?
            } else {
                CertConfig { solver: rules.config(), mode: mode_of(mode), ..Default::default() }
            };
            let rep = validate_grid(&p, &cert, &parse_grid(&grid)?, &cfg)?;
            println!("{}", rep.summary());
            if let Some(path) = report {
                std::fs::write(path, serde_json::to_string_pretty(&rep).unwrap())?;
            }
            Ok(rep.passed())
        }
        Cmd::Generate { kind, nb, nc, m, ntheta, seed, out } => {
            let kind = match kind {
                KindArg::Milp => Kind::Milp,
                KindArg::Miqp => Kind::Miqp,
            };
            if nb == 0 || m == 0 || ntheta == 0 {
                return Err(mpbnb::Error::Invalid("sizes must be at least 1".into()));
            }
            random_instance(kind, nb, nc, m, ntheta, seed).save(&out)?;
            Ok(true)
        }
        Cmd::Map { certificate, problem, axes, res, out } => {
            let p = MpProblem::load(&problem)?;
            let cert = Certificate::load(&certificate)?;
            let (i, j) = match axes.as_slice() {
                [i, j] => (*i, *j),
                _ => return Err(mpbnb::Error::Invalid("--axes takes two indices".into())),
            };
            std::fs::write(out, emit_region_map(&cert, &p.theta0, (i, j), res)?)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
