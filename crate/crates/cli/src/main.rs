// SPDX-License-Identifier: Apache-2.0

//! `fsmhp`: generate, synthesize, attack and defend gate-level FSM designs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use fsm_honeypot::harness::{self, gen_benchmark, BenchmarkSpec, Plan};
use fsm_honeypot::netlist::{parse, BitState, Netlist};
use fsm_honeypot::obfuscate::{
    derive_honeypot, integrate_honeypot, replicate, rewrite_ra, rewrite_rb, tune_honeypot,
    HoneypotParams, ReplicationPlan,
};
use fsm_honeypot::relic::relic_tarjan;
use fsm_honeypot::stg::{extract_stg, identity_map, stg_equivalent, ExtractOptions};
use fsm_honeypot::synth::{parse_design, synthesize, write_design, GroundTruth, SynthOptions};
use fsm_honeypot::topo::topo_attack;

#[derive(Parser)]
#[command(
    name = "fsmhp",
    version,
    about = "FSM honeypot and unattractive-FSM obfuscation workbench"
)]
struct Cli {
    /// TOML plan supplying benchmark, attack, defense and check parameters.
    #[arg(long, global = true)]
    plan: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a seeded benchmark design document.
    Gen {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        states: Option<usize>,
        #[arg(long)]
        one_hot: Option<bool>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Synthesize a design document to a netlist and ground truth.
    Synth {
        design: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Ground-truth file; defaults to the netlist path with `.truth`.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        one_hot: bool,
        #[arg(long)]
        cse: bool,
        #[arg(long, default_value = "")]
        prefix: String,
    },
    /// Run an identification attack on a netlist.
    #[command(subcommand)]
    Attack(AttackCmd),
    /// Apply a defense transform.
    #[command(subcommand)]
    Defend(DefendCmd),
    /// Extract a state transition graph, optionally comparing with another netlist.
    Stg {
        netlist: PathBuf,
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Inputs enumerated exhaustively; the rest are held at 0.
        #[arg(long, value_delimiter = ',')]
        free: Vec<String>,
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Netlist whose STG must match (identity bit map).
        #[arg(long)]
        compare: Option<PathBuf>,
        #[arg(long)]
        compare_truth: Option<PathBuf>,
        /// Inputs of the compared netlist frozen to 0.
        #[arg(long, value_delimiter = ',')]
        freeze: Vec<String>,
    },
    /// Area and depth proxies of two netlists.
    Overhead { before: PathBuf, after: PathBuf },
    /// Baseline attack, defenses, checks and re-attack; writes a run directory.
    Pipeline {
        /// Use this seed's standard benchmark profile instead of the plan's.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short, long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct NetIn {
    netlist: PathBuf,
    /// Ground truth for scoring; defaults to the netlist path with `.truth` if present.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Subcommand)]
enum AttackCmd {
    Relic {
        #[command(flatten)]
        input: NetIn,
        /// Write the Z-score table as CSV.
        #[arg(long)]
        zscores: Option<PathBuf>,
    },
    Topo {
        #[command(flatten)]
        input: NetIn,
    },
}

#[derive(Subcommand)]
enum DefendCmd {
    /// Replicate state bits (and optionally counters) in a design document.
    Replicate {
        design: PathBuf,
        #[arg(long)]
        replicas: Option<usize>,
        #[arg(long)]
        counters: bool,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Gate-level feedback-path removal for a one-hot state FF.
    Ra {
        #[command(flatten)]
        input: NetIn,
        #[arg(long)]
        target: String,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Dummy-transition redesign of a binary-encoded FSM.
    Rb {
        design: PathBuf,
        #[arg(long)]
        bit: Option<usize>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Derive, synthesize and attach an FSM honeypot.
    Honeypot {
        #[command(flatten)]
        input: NetIn,
        /// Design document whose FSM the honeypot is derived from.
        #[arg(long)]
        design: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Try this many seeds against the similarity attack.
        #[arg(long)]
        tune: Option<usize>,
        #[arg(short, long)]
        out: PathBuf,
    },
}

fn read(p: &Path) -> Result<String> {
    fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))
}

fn write(p: &Path, s: &str) -> Result<()> {
    if let Some(d) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(d)?;
    }
    fs::write(p, s).with_context(|| format!("writing {}", p.display()))
}

fn truth_path(net: &Path) -> PathBuf {
    net.with_extension("truth")
}

fn load_net(p: &Path) -> Result<Netlist> {
    parse(&read(p)?).with_context(|| format!("parsing {}", p.display()))
}

fn load_truth(net: &Path, explicit: Option<&PathBuf>) -> Result<Option<GroundTruth>> {
    let p = match explicit {
        Some(p) => p.clone(),
        None => truth_path(net),
    };
    if explicit.is_none() && !p.exists() {
        return Ok(None);
    }
    Ok(Some(GroundTruth::from_text(&read(&p)?)?))
}

fn print_scores(
    identified: &std::collections::BTreeSet<String>,
    truth: Option<&GroundTruth>,
) -> Result<()> {
    println!(
        "identified {}",
        identified.iter().cloned().collect::<Vec<_>>().join(",")
    );
    if let Some(t) = truth {
        for (name, set) in [("sff", t.sff_set()), ("hp", t.hp_set())] {
            if set.is_empty() {
                continue;
            }
            let m = fsm_honeypot::metrics::evaluate(identified, &set)?;
            println!(
                "{name} sensitivity {:.6} precision {:.6} hits {}/{}",
                m.sensitivity, m.precision, m.hits, m.truth
            );
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    let plan = match &cli.plan {
        Some(p) => Plan::from_toml(&read(p)?)?,
        None => Plan::default(),
    };
    match cli.cmd {
        Cmd::Gen {
            seed,
            states,
            one_hot,
            out,
        } => {
            let mut spec = match seed {
                Some(s) => BenchmarkSpec::for_seed(s),
                None => plan.benchmark.clone(),
            };
            if let Some(n) = states {
                spec.states = n;
            }
            if let Some(o) = one_hot {
                spec.one_hot = o;
            }
            let b = gen_benchmark(&spec)?;
            write(&out, &write_design(&b.fsm, &b.dp))?;
        }
        Cmd::Synth {
            design,
            out,
            truth,
            one_hot,
            cse,
            prefix,
        } => {
            let (fsm, dp) = parse_design(&read(&design)?)?;
            let opts = SynthOptions {
                allow_reencode: one_hot,
                allow_cse: cse,
                name_prefix: prefix,
                ..SynthOptions::default()
            };
            let s = synthesize(&fsm, &dp, &opts)?;
            write(&out, &s.netlist.to_text())?;
            write(
                &truth.unwrap_or_else(|| truth_path(&out)),
                &s.truth.to_text(),
            )?;
        }
        Cmd::Attack(AttackCmd::Relic { input, zscores }) => {
            let nl = load_net(&input.netlist)?;
            let truth = load_truth(&input.netlist, input.truth.as_ref())?;
            let r = relic_tarjan(&nl, &plan.attack.relic_params())?;
            if let Some(p) = zscores {
                write(&p, &r.table.to_csv())?;
            }
            print!("{}", r.summary());
            print_scores(&r.result.identified, truth.as_ref())?;
        }
        Cmd::Attack(AttackCmd::Topo { input }) => {
            let nl = load_net(&input.netlist)?;
            let truth = load_truth(&input.netlist, input.truth.as_ref())?;
            let t = topo_attack(&nl, &plan.attack.topo_params());
            print!("{}", t.groups.to_text());
            print_scores(&t.result.identified, truth.as_ref())?;
        }
        Cmd::Defend(DefendCmd::Replicate {
            design,
            replicas,
            counters,
            out,
        }) => {
            let (fsm, dp) = parse_design(&read(&design)?)?;
            let rp = ReplicationPlan {
                replicas: replicas.unwrap_or(plan.defense.replicas),
                counters: if counters || plan.defense.replicate_counters {
                    dp.counters.iter().map(|c| c.name.clone()).collect()
                } else {
                    Vec::new()
                },
                allow_one_hot: true,
            };
            let (f, d) = replicate(&fsm, &dp, &rp)?;
            write(&out, &write_design(&f, &d))?;
        }
        Cmd::Defend(DefendCmd::Ra { input, target, out }) => {
            let nl = load_net(&input.netlist)?;
            let truth = load_truth(&input.netlist, input.truth.as_ref())?
                .context("R_A needs the ground-truth state FFs")?;
            let (n, rep) = rewrite_ra(&nl, &truth.sffs, &target)?;
            write(&out, &n.to_text())?;
            write(&truth_path(&out), &truth.to_text())?;
            print!("{}", rep.to_text());
        }
        Cmd::Defend(DefendCmd::Rb { design, bit, out }) => {
            let (fsm, dp) = parse_design(&read(&design)?)?;
            let (f, rep) = rewrite_rb(&fsm, bit.unwrap_or(plan.defense.fp_bit))?;
            write(&out, &write_design(&f, &dp))?;
            print!("{}", rep.to_text());
        }
        Cmd::Defend(DefendCmd::Honeypot {
            input,
            design,
            seed,
            tune,
            out,
        }) => {
            let nl = load_net(&input.netlist)?;
            let truth = load_truth(&input.netlist, input.truth.as_ref())?.unwrap_or_default();
            let (fsm, _) = parse_design(&read(&design)?)?;
            let d = &plan.defense;
            let hp_opts = SynthOptions::default();
            let mut inputs = vec![hp_opts.clk.clone(), hp_opts.rst.clone()];
            inputs.extend(fsm.inputs.iter().cloned());
            let params = HoneypotParams {
                mutation_seed: seed.unwrap_or(d.hp_seed),
                n_transition_mutations: d.hp_transition_mutations,
                n_output_mutations: d.hp_output_mutations,
                attach_mode: d.attach_mode(),
                targets: (!d.hp_targets.is_empty()).then(|| d.hp_targets.clone()),
                ..HoneypotParams::default()
            }
            .with_identity_inputs(inputs);
            let iters = tune.unwrap_or(d.tune_iters);
            let (integ, ok) = if iters > 0 {
                let t = tune_honeypot(
                    &nl,
                    &truth,
                    &fsm,
                    &hp_opts,
                    &params,
                    &plan.attack.relic_params(),
                    iters,
                )?;
                print!("{}", t.to_text());
                let ok = t.success;
                (t.integration, ok)
            } else {
                let hp_fsm = derive_honeypot(&fsm, &params)?;
                let hp = synthesize(&hp_fsm, &Default::default(), &hp_opts)?;
                (
                    integrate_honeypot(&nl, &truth, &hp.netlist, &hp.truth.sffs, &params)?,
                    true,
                )
            };
            let mismatch = harness::first_output_mismatch(
                &nl,
                &integ.netlist,
                plan.checks.vectors,
                plan.checks.seed,
            )?;
            write(&out, &integ.netlist.to_text())?;
            write(&truth_path(&out), &integ.truth.to_text())?;
            print!("{}", integ.to_text());
            if let Some(o) = mismatch {
                eprintln!("honeypot changes {o}");
                return Ok(false);
            }
            return Ok(ok);
        }
        Cmd::Stg {
            netlist,
            truth,
            free,
            dot,
            compare,
            compare_truth,
            freeze,
        } => {
            let opts = ExtractOptions {
                held: BTreeMap::new(),
                max_inputs: Some(plan.checks.max_inputs),
            };
            let extract = |net: &Path, t: Option<&PathBuf>, free: &[String]| -> Result<_> {
                let nl = load_net(net)?;
                let t = load_truth(net, t)?
                    .context("STG extraction needs the ground-truth state FFs")?;
                Ok(extract_stg(
                    &nl,
                    &t.sffs,
                    &BitState::reset(&nl),
                    free,
                    &opts,
                )?)
            };
            let a = extract(&netlist, truth.as_ref(), &free)?;
            print!("{}", a.to_text());
            if let Some(p) = dot {
                write(&p, &a.to_dot())?;
            }
            if let Some(c) = compare {
                let mut cfree = free.clone();
                cfree.extend(freeze.iter().filter(|f| !free.contains(f)).cloned());
                let b = extract(&c, compare_truth.as_ref(), &cfree)?;
                let frozen = freeze.iter().map(|f| (f.clone(), false)).collect();
                let eq = stg_equivalent(&a, &b, &identity_map(&a), &frozen)?;
                println!("equivalent {eq}");
                return Ok(eq);
            }
        }
        Cmd::Overhead { before, after } => {
            let r = harness::overhead(&load_net(&before)?, &load_net(&after)?);
            print!("{}", r.to_csv());
        }
        Cmd::Pipeline { seed, out } => {
            let mut plan = plan;
            if let Some(s) = seed {
                plan.benchmark = BenchmarkSpec::for_seed(s);
            }
            let bench = gen_benchmark(&plan.benchmark)?;
            let report = match harness::run_pipeline(&bench, &plan) {
                Ok(r) => r,
                Err(e @ harness::HarnessError::Preservation(_)) => {
                    eprintln!("{e}");
                    return Ok(false);
                }
                Err(e) => return Err(e.into()),
            };
            report.write_run_dir(&out)?;
            print!("{}", report.summary());
            return Ok(report.all_checks_pass());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
