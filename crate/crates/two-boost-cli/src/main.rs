//! Command-line front end: every number printed here comes straight out of
//! a library call; this crate only parses arguments and formats output.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde::Deserialize;

use output::{array, chord_csv, chord_json, chord_svg, object, ChordRecord, Curve, Field};
use two_boost_core::action::{action_eval, maslov_transverse, DiscretizedPath};
use two_boost_core::bounds::window_constants;
use two_boost_core::chords::{
    asymptotic_sweep, chord_from_eta, constant_circle, find_roots, multiplier_derivative,
    multiplier_function, Chord, RootFindOptions, TwoBoostProblem,
};
use two_boost_core::cutoff::{cutoff_spec, trap_set_check, DecayPotential, TrapGrid};
use two_boost_core::hamiltonian::{CopernicanH0, Hamiltonian, PerturbedHamiltonian, SoftenedPower};
use two_boost_core::integrate::IntegratorConfig;
use two_boost_core::shooting::{default_eta_seeds, shoot, PotentialRef, ShootOptions};
use two_boost_core::suite;
use two_boost_core::symplectic::Vec2;
use two_boost_core::Error as CoreError;

#[derive(Parser)]
#[command(name = "two-boost", version, about = "Chords of the planar two-boost system")]
struct Cli {
    /// JSON file supplying defaults for any omitted flag
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find all chords of a problem and print full records
    Chords {
        #[arg(long, allow_hyphen_values = true)]
        q0: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        q1: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        c: Option<f64>,
        /// relative energy nudge applied before solving, for degenerate roots
        #[arg(long, allow_hyphen_values = true)]
        nudge_c: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        format: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Root counts against the asymptotic lower bound while c halves
    Sweep {
        #[arg(long, allow_hyphen_values = true)]
        q0: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        q1: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        c_start: Option<f64>,
        #[arg(long)]
        halvings: Option<usize>,
        #[arg(long)]
        format: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Index decomposition of every chord: crossings, winding, total
    Maslov {
        #[arg(long, allow_hyphen_values = true)]
        q0: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        q1: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        c: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compactness-window constants for a multiplier range [a, b]
    Bounds {
        #[arg(long, allow_hyphen_values = true)]
        a: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        c: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        j_norm: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        h_norm: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        eps: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        q_min: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Truncation data and trap-set report for a decaying potential
    Cutoff {
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        a: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        r0: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        c: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        q0: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        q1: Option<String>,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Shoot chords of the perturbed problem from the energy circle
    Shoot {
        #[arg(long, allow_hyphen_values = true)]
        q0: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        q1: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        c: Option<f64>,
        /// potential family, e.g. a/r^alpha or 0.1/r^3
        #[arg(long)]
        potential: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        a: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        r0: Option<f64>,
        /// number of circle angles seeded per multiplier
        #[arg(long)]
        seeds: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        abs_tol: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        rel_tol: Option<f64>,
        #[arg(long)]
        format: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance criteria and report machine-readable results
    Verify {
        #[arg(long)]
        suite: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render the positive chords of one or more energies as SVG
    Plot {
        #[arg(long, allow_hyphen_values = true)]
        q0: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        q1: Option<String>,
        /// comma-separated energy list, e.g. 1,0.5,0.2
        #[arg(long, allow_hyphen_values = true)]
        c: Option<String>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    q0: Option<String>,
    q1: Option<String>,
    c: Option<f64>,
    c_start: Option<f64>,
    nudge_c: Option<f64>,
    samples: Option<usize>,
    halvings: Option<usize>,
    format: Option<String>,
    out: Option<String>,
    a: Option<f64>,
    b: Option<f64>,
    alpha: Option<f64>,
    r0: Option<f64>,
    potential: Option<String>,
    j_norm: Option<f64>,
    h_norm: Option<f64>,
    eps: Option<f64>,
    q_min: Option<f64>,
    grid: Option<usize>,
    seeds: Option<usize>,
    abs_tol: Option<f64>,
    rel_tol: Option<f64>,
    suite: Option<String>,
}

enum CliError {
    Usage(String),
    Core(CoreError),
    Verify(usize),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

fn main() -> ExitCode {
    suite::configure_threads_from_env();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Core(e)) => {
            eprintln!("error: {e}");
            if matches!(e, CoreError::DegenerateRoot { .. }) {
                eprintln!("hint: rerun with --nudge-c 1e-9 to move off the degenerate energy");
            }
            ExitCode::from(2)
        }
        Err(CliError::Verify(n)) => {
            eprintln!("error: {n} acceptance criteria failed");
            ExitCode::from(3)
        }
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<FileConfig, CliError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
}

fn need<T>(value: Option<T>, name: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("missing --{name} (flag or config file)")))
}

fn parse_vec2(text: &str, name: &str) -> Result<Vec2, CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::Usage(format!("--{name} wants X,Y, got {text:?}")));
    }
    let x = parts[0].trim().parse::<f64>();
    let y = parts[1].trim().parse::<f64>();
    match (x, y) {
        (Ok(x), Ok(y)) => Ok(Vec2::new(x, y)),
        _ => Err(CliError::Usage(format!("--{name} wants X,Y, got {text:?}"))),
    }
}

fn parse_format(text: Option<String>) -> Result<bool, CliError> {
    match text.as_deref() {
        None | Some("csv") => Ok(false),
        Some("json") => Ok(true),
        Some(other) => Err(CliError::Usage(format!("format must be csv or json, got {other:?}"))),
    }
}

fn positive(value: Option<f64>, name: &str) -> Result<Option<f64>, CliError> {
    if let Some(v) = value {
        if !(v > 0.0) {
            return Err(CliError::Usage(format!("--{name} must be positive, got {v}")));
        }
    }
    Ok(value)
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn chord_record(
    prob: &TwoBoostProblem,
    chord: &Chord,
    h: &dyn Hamiltonian,
) -> Result<ChordRecord, CliError> {
    let path = DiscretizedPath::from_chord(chord);
    let action = action_eval(&path, chord.eta, h, chord.c)?;
    let maslov = maslov_transverse(chord, h)?;
    Ok(ChordRecord {
        eta: chord.eta,
        f_value: multiplier_function(prob, chord.eta),
        f_prime: multiplier_derivative(prob, chord.eta),
        action,
        maslov_tr: maslov.as_rational(),
        res_boundary: chord.residual_boundary,
        res_energy: chord.residual_energy,
        res_ode: chord.residual_ode,
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = load_config(&cli.config)?;
    let cfg_out = cfg.out.clone().map(PathBuf::from);
    match cli.command {
        Command::Chords { q0, q1, c, nudge_c, samples, format, out } => {
            let q0 = parse_vec2(&need(q0.or(cfg.q0.clone()), "q0")?, "q0")?;
            let q1 = parse_vec2(&need(q1.or(cfg.q1.clone()), "q1")?, "q1")?;
            let mut c = need(c.or(cfg.c), "c")?;
            if let Some(nudge) = nudge_c.or(cfg.nudge_c) {
                c *= 1.0 + nudge;
            }
            let samples = samples.or(cfg.samples).unwrap_or(256);
            let json = parse_format(format.or(cfg.format.clone()))?;
            let out = out.or(cfg_out);
            let prob = TwoBoostProblem::new(q0, q1, c)?;
            if prob.coincident() {
                let (center, radius) = constant_circle(q0, c)?;
                let report = object(&[
                    Field::Raw(
                        "constant_circle",
                        object(&[
                            Field::Float("center_x", center.x),
                            Field::Float("center_y", center.y),
                            Field::Float("radius", radius),
                        ]),
                    ),
                    Field::Raw("roots", "[]".into()),
                ]);
                return emit(&out, &format!("{report}\n"));
            }
            let roots = find_roots(&prob, RootFindOptions::default())?;
            let mut records = Vec::new();
            for root in &roots {
                let chord = chord_from_eta(&prob, root.eta, samples)?;
                records.push(chord_record(&prob, &chord, &CopernicanH0)?);
            }
            let body = if json { chord_json(&records) } else { chord_csv(&records) };
            emit(&out, &body)
        }
        Command::Sweep { q0, q1, c_start, halvings, format, out } => {
            let q0 = parse_vec2(&need(q0.or(cfg.q0.clone()), "q0")?, "q0")?;
            let q1 = parse_vec2(&need(q1.or(cfg.q1.clone()), "q1")?, "q1")?;
            let c_start = need(c_start.or(cfg.c_start).or(cfg.c), "c-start")?;
            let halvings = halvings.or(cfg.halvings).unwrap_or(6);
            let json = parse_format(format.or(cfg.format.clone()))?;
            let out = out.or(cfg_out);
            let rows = asymptotic_sweep(q0, q1, c_start, halvings)?;
            let body = if json {
                let items = rows
                    .iter()
                    .map(|r| {
                        object(&[
                            Field::Float("c", r.c),
                            Field::Int("n_plus", r.n_plus as i64),
                            Field::Int("n_minus", r.n_minus as i64),
                            Field::Int("lower_bound", r.lower_bound as i64),
                        ])
                    })
                    .collect();
                format!("{}\n", array(items))
            } else {
                let mut text = String::from("c,n_plus,n_minus,lower_bound\n");
                for r in &rows {
                    text.push_str(&format!(
                        "{},{},{},{}\n",
                        output::float(r.c),
                        r.n_plus,
                        r.n_minus,
                        r.lower_bound
                    ));
                }
                text
            };
            emit(&out, &body)
        }
        Command::Maslov { q0, q1, c, samples, out } => {
            let q0 = parse_vec2(&need(q0.or(cfg.q0.clone()), "q0")?, "q0")?;
            let q1 = parse_vec2(&need(q1.or(cfg.q1.clone()), "q1")?, "q1")?;
            let c = need(c.or(cfg.c), "c")?;
            let samples = samples.or(cfg.samples).unwrap_or(256);
            let out = out.or(cfg_out);
            let prob = TwoBoostProblem::new(q0, q1, c)?;
            let roots = find_roots(&prob, RootFindOptions::default())?;
            let mut items = Vec::new();
            for root in &roots {
                let chord = chord_from_eta(&prob, root.eta, samples)?;
                let m = maslov_transverse(&chord, &CopernicanH0)?;
                let crossings = m
                    .crossings
                    .iter()
                    .map(|x| {
                        object(&[
                            Field::Float("t", x.t),
                            Field::Int("contribution_times_two", x.contribution_times_two),
                        ])
                    })
                    .collect::<Vec<_>>();
                items.push(object(&[
                    Field::Float("eta", root.eta),
                    Field::Str("maslov_tr", m.as_rational()),
                    Field::Int("mu_times_two", m.mu_times_two),
                    Field::Float("winding", m.winding),
                    Field::Raw("crossings", format!("[{}]", crossings.join(", "))),
                ]));
            }
            emit(&out, &format!("{}\n", array(items)))
        }
        Command::Bounds { a, b, c, j_norm, h_norm, eps, q_min, out } => {
            let a = need(a.or(cfg.a), "a")?;
            let b = need(b.or(cfg.b), "b")?;
            let c = need(c.or(cfg.c), "c")?;
            let j_norm = need(j_norm.or(cfg.j_norm), "j-norm")?;
            let h_norm = need(h_norm.or(cfg.h_norm), "h-norm")?;
            let eps = need(eps.or(cfg.eps), "eps")?;
            let q_min = q_min.or(cfg.q_min).unwrap_or(0.0);
            let out = out.or(cfg_out);
            let consts = window_constants(a, b, c, j_norm, h_norm, eps, q_min)?;
            let body = object(&[
                Field::Float("c", consts.c),
                Field::Float("y_frak", consts.y_frak),
                Field::Float("a_frak", consts.a_frak),
                Field::Float("e_frak", consts.e_frak),
                Field::Float("q_frak", consts.q_frak),
                Field::Float("p_frak", consts.p_frak),
                Field::Float("h_frak", consts.h_frak),
            ]);
            emit(&out, &format!("{body}\n"))
        }
        Command::Cutoff { alpha, a, r0, c, q0, q1, grid, out } => {
            let alpha = need(alpha.or(cfg.alpha), "alpha")?;
            let a = need(a.or(cfg.a), "a")?;
            let r0 = need(r0.or(cfg.r0), "r0")?;
            let c = need(c.or(cfg.c), "c")?;
            let q0 = parse_vec2(&need(q0.or(cfg.q0.clone()), "q0")?, "q0")?;
            let q1 = parse_vec2(&need(q1.or(cfg.q1.clone()), "q1")?, "q1")?;
            let grid = grid.or(cfg.grid).unwrap_or(128);
            let out = out.or(cfg_out);
            let v = DecayPotential::new(SoftenedPower { a, alpha, soften: r0 }, a, alpha, r0)?;
            let spec = cutoff_spec(&v, c, q0, q1)?;
            let trap =
                trap_set_check(&spec, &v, TrapGrid { n_r: grid, n_theta: (grid / 2).max(8) })?;
            let negative_only = match trap.violations_only_negative_momentum {
                Some(b) => b.to_string(),
                None => "null".into(),
            };
            let body = object(&[
                Field::Raw(
                    "spec",
                    object(&[
                        Field::Float("r1", spec.r1),
                        Field::Float("beta", spec.beta),
                        Field::Float("sup_v", spec.sup_v),
                        Field::Float("c", spec.c),
                        Field::Float("outer_radius", spec.outer_radius()),
                    ]),
                ),
                Field::Raw(
                    "trap",
                    object(&[
                        Field::Bool("ok", trap.ok),
                        Field::Float("min_margin", trap.min_margin),
                        Field::Float("witness_r", trap.witness.0),
                        Field::Float("witness_theta", trap.witness.1),
                        Field::Float("witness_ell", trap.witness.2),
                        Field::Int("points_checked", trap.points_checked as i64),
                        Field::Int("violations", trap.violations.len() as i64),
                        Field::Raw("violations_only_negative_momentum", negative_only),
                    ]),
                ),
            ]);
            emit(&out, &format!("{body}\n"))
        }
        Command::Shoot {
            q0,
            q1,
            c,
            potential,
            a,
            alpha,
            r0,
            seeds,
            abs_tol,
            rel_tol,
            format,
            out,
        } => {
            let q0 = parse_vec2(&need(q0.or(cfg.q0.clone()), "q0")?, "q0")?;
            let q1 = parse_vec2(&need(q1.or(cfg.q1.clone()), "q1")?, "q1")?;
            let c = need(c.or(cfg.c), "c")?;
            let (pot_a, pot_alpha) =
                parse_potential(&potential.or(cfg.potential.clone()).unwrap_or("a/r^alpha".into()))?;
            let a = need(a.or(pot_a).or(cfg.a), "a")?;
            let alpha = need(alpha.or(pot_alpha).or(cfg.alpha), "alpha")?;
            let r0 = need(r0.or(cfg.r0), "r0")?;
            let psi_seeds = seeds.or(cfg.seeds).unwrap_or(64);
            let abs_tol = positive(abs_tol.or(cfg.abs_tol), "abs-tol")?;
            let rel_tol = positive(rel_tol.or(cfg.rel_tol), "rel-tol")?;
            let json = parse_format(format.or(cfg.format.clone()))?;
            let out = out.or(cfg_out);
            let prob = TwoBoostProblem::new(q0, q1, c)?;
            let v = DecayPotential::new(SoftenedPower { a, alpha, soften: r0 }, a, alpha, r0)?;
            v.verify(c)?;
            let mut opts = ShootOptions { psi_seeds, ..ShootOptions::default() };
            if let Some(tol) = abs_tol {
                opts.integrator = IntegratorConfig { abs_tol: tol, ..opts.integrator };
            }
            if let Some(tol) = rel_tol {
                opts.integrator = IntegratorConfig { rel_tol: tol, ..opts.integrator };
            }
            let outcome = shoot(&prob, &v, &default_eta_seeds(&prob), &opts)?;
            let h = PerturbedHamiltonian::new(PotentialRef(&v), c);
            let mut records = Vec::new();
            for shot in &outcome.chords {
                records.push(chord_record(&prob, &shot.chord, &h)?);
            }
            eprintln!(
                "shoot: {} chords from {} seeds ({} converged, {} abandoned)",
                outcome.chords.len(),
                outcome.seeds_tried,
                outcome.converged,
                outcome.skipped_singular
            );
            let body = if json { chord_json(&records) } else { chord_csv(&records) };
            emit(&out, &body)
        }
        Command::Verify { suite: which, out } => {
            let which = which.or(cfg.suite).unwrap_or_else(|| "all".into());
            let out = out.or(cfg_out);
            let outcomes = match which.as_str() {
                "all" => suite::run_all(),
                "figures" => suite::run_figures(),
                other => {
                    return Err(CliError::Usage(format!(
                        "suite must be all or figures, got {other:?}"
                    )))
                }
            };
            for o in &outcomes {
                eprintln!("{}", o.line());
            }
            let items = outcomes
                .iter()
                .map(|o| {
                    object(&[
                        Field::Int("id", o.id as i64),
                        Field::Str("name", o.name.into()),
                        Field::Str("status", if o.passed { "pass" } else { "fail" }.into()),
                        Field::Str("measured", o.measured.clone()),
                        Field::Str("tolerance", o.tolerance.clone()),
                        Field::Float("seconds", o.seconds),
                    ])
                })
                .collect();
            emit(&out, &format!("{}\n", array(items)))?;
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            if failed > 0 {
                return Err(CliError::Verify(failed));
            }
            Ok(())
        }
        Command::Plot { q0, q1, c, samples, out } => {
            let q0 = parse_vec2(&need(q0.or(cfg.q0.clone()), "q0")?, "q0")?;
            let q1 = parse_vec2(&need(q1.or(cfg.q1.clone()), "q1")?, "q1")?;
            let c_text = need(c.or(cfg.c.map(|v| v.to_string())), "c")?;
            let points = samples.or(cfg.samples).unwrap_or(512).max(2);
            let out = out.or(cfg_out);
            let mut curves = Vec::new();
            for part in c_text.split(',') {
                let c: f64 = part.trim().parse().map_err(|_| {
                    CliError::Usage(format!("--c wants comma-separated numbers, got {c_text:?}"))
                })?;
                let prob = TwoBoostProblem::new(q0, q1, c)?;
                let roots = find_roots(&prob, RootFindOptions::default())?;
                for root in roots.iter().filter(|r| r.eta > 0.0) {
                    let chord = chord_from_eta(&prob, root.eta, points - 1)?;
                    curves.push(Curve {
                        label: format!("c={c} eta={:.6}", root.eta),
                        points: chord.samples.iter().map(|x| (x.q.x, x.q.y)).collect(),
                    });
                }
            }
            let body = chord_svg(&curves, &[(q0.x, q0.y), (q1.x, q1.y)]);
            emit(&out, &body)
        }
    }
}

fn parse_potential(text: &str) -> Result<(Option<f64>, Option<f64>), CliError> {
    let Some((num, pow)) = text.trim().split_once("/r^") else {
        return Err(CliError::Usage(format!(
            "potential must look like a/r^alpha, got {text:?}"
        )));
    };
    let a = match num.trim() {
        "a" => None,
        lit => Some(lit.parse::<f64>().map_err(|_| {
            CliError::Usage(format!("potential coefficient must be a number or 'a', got {lit:?}"))
        })?),
    };
    let alpha = match pow.trim() {
        "alpha" => None,
        lit => Some(lit.parse::<f64>().map_err(|_| {
            CliError::Usage(format!("potential power must be a number or 'alpha', got {lit:?}"))
        })?),
    };
    Ok((a, alpha))
}
