//! Batch experiment harness behind the `orlicz-ergodic` binary: loads or
//! generates an instance from a [`Config`], runs one command and writes its
//! CSV tables.
//!
//! Randomness flows from `config.seed` through named sub-seeds: `bundle`,
//! `sections`, `operator`, `verify` and `suite`.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;

use crate::bundle::{BaseSpace, Bundle, NormKind, Section};
use crate::config::{BundleSource, Config, OperatorSource};
use crate::ergodic::{self, AveragingParams};
use crate::error::{usage, Error, Result};
use crate::io::{self, fmt_float, Csv};
use crate::measure::{Fiber, FiberVector};
use crate::nfunction::NFunction;
use crate::operators::{self, BundleOperator, ConditionReport};
use crate::orlicz;
use crate::seed;
use crate::suite;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Conjugate,
    Norms,
    Verify,
    Converge,
    Suite,
}

impl Command {
    pub const ALL: [Command; 5] = [
        Command::Conjugate,
        Command::Norms,
        Command::Verify,
        Command::Converge,
        Command::Suite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Conjugate => "conjugate",
            Command::Norms => "norms",
            Command::Verify => "verify",
            Command::Converge => "converge",
            Command::Suite => "suite",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| usage(format!("unknown command `{s}`")))
    }
}

/// Everything a command may need, loaded or generated from a config.
#[derive(Debug, Clone)]
pub struct Instance {
    pub nfunction: NFunction,
    pub bundle: Bundle,
    pub sections: Vec<(String, Section)>,
    pub operator: BundleOperator,
}

/// Result of [`run_command`]: files written, verdict and a short report.
#[derive(Debug, Clone)]
pub struct CommandOutcome {
    pub files: Vec<PathBuf>,
    /// False only when `suite` has a failing criterion.
    pub success: bool,
    pub report: Vec<String>,
}

fn load_nfunction(cfg: &Config, base_dir: &Path) -> Result<NFunction> {
    cfg.nfunction.load(base_dir).map_err(|e| match &cfg.nfunction {
        crate::config::NFunctionSpec::Tabulated(p) => in_file(&base_dir.join(p), e),
        _ => e,
    })
}

/// Bundle with `base_atoms` fibers of `fiber_atoms` atoms each; base weights
/// in `[0.5, 2)`, atom weights in `[0.1, 2)`.
pub fn generate_bundle(base_atoms: usize, fiber_atoms: usize, seed: u64) -> Result<Bundle> {
    if base_atoms == 0 || fiber_atoms == 0 {
        return Err(usage("generated bundles need at least one base atom and one fiber atom"));
    }
    let mut rng = seed::rng(seed);
    let base = BaseSpace::new((0..base_atoms).map(|_| rng.random_range(0.5..2.0)).collect())?;
    let fibers = (0..base_atoms)
        .map(|_| Fiber::new((0..fiber_atoms).map(|_| rng.random_range(0.1..2.0)).collect()))
        .collect::<Result<_>>()?;
    Bundle::new(base, fibers)
}

/// `count` sections named `s0, s1, ...` with values uniform in `[-2, 2)`.
pub fn generate_sections(bundle: &Bundle, count: usize, seed: u64) -> Vec<(String, Section)> {
    let mut rng = seed::rng(seed);
    (0..count)
        .map(|i| {
            let comps = bundle
                .fibers()
                .iter()
                .map(|f| {
                    let v = (0..f.atom_count()).map(|_| rng.random_range(-2.0..2.0)).collect();
                    FiberVector::new(v).expect("finite samples")
                })
                .collect();
            (format!("s{i}"), Section::new(comps))
        })
        .collect()
}

fn in_file(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    }
}

/// Loads or generates the N-function, bundle, sections and operator.
/// Relative paths resolve against `base_dir`.
pub fn load_instance(cfg: &Config, base_dir: &Path) -> Result<Instance> {
    let nfunction = load_nfunction(cfg, base_dir)?;
    let (bundle, mut sections) = match &cfg.bundle {
        BundleSource::Generate => (
            generate_bundle(cfg.base_atoms, cfg.fiber_atoms, seed::sub_seed(cfg.seed, "bundle"))?,
            Vec::new(),
        ),
        BundleSource::File(p) => {
            let path = base_dir.join(p);
            let file = io::read_bundle_file(&path).map_err(|e| in_file(&path, e))?;
            (file.bundle, file.sections)
        }
    };
    if sections.is_empty() {
        sections = generate_sections(&bundle, cfg.sections, seed::sub_seed(cfg.seed, "sections"));
    }
    let operator = match &cfg.operator {
        OperatorSource::Generate => {
            operators::generate_bundle_operator(&bundle, seed::sub_seed(cfg.seed, "operator"), cfg.mixing)?
        }
        OperatorSource::Identity => BundleOperator::identity(&bundle),
        OperatorSource::File(p) => {
            let path = base_dir.join(p);
            io::read_operator_file(&path, &bundle).map_err(|e| in_file(&path, e))?
        }
    };
    Ok(Instance {
        nfunction,
        bundle,
        sections,
        operator,
    })
}

/// Runs `cmd` and writes its tables into `out_dir` (created if missing).
///
/// `conjugate` and `suite` do not touch the bundle, so a bad bundle or
/// operator source only fails the other commands.
pub fn run_command(cmd: Command, cfg: &Config, base_dir: &Path, out_dir: &Path) -> Result<CommandOutcome> {
    fs::create_dir_all(out_dir)?;
    match cmd {
        Command::Conjugate => conjugate(cfg, base_dir, out_dir),
        Command::Suite => suite_command(cfg, out_dir),
        Command::Norms => norms(&load_instance(cfg, base_dir)?, out_dir),
        Command::Verify => verify(cfg, &load_instance(cfg, base_dir)?, out_dir),
        Command::Converge => converge(cfg, &load_instance(cfg, base_dir)?, out_dir),
    }
}

fn written(path: PathBuf, csv: &Csv) -> Result<PathBuf> {
    csv.write_to(&path)?;
    Ok(path)
}

fn conjugate(cfg: &Config, base_dir: &Path, out_dir: &Path) -> Result<CommandOutcome> {
    let m = load_nfunction(cfg, base_dir)?;
    m.validate()?;
    let n = m.complement()?;
    let mut csv = Csv::new(&["t", "M_t", "p_t", "N_t", "q_t", "young_gap_at_p"]);
    let mut worst_gap = 0.0f64;
    for i in 0..=cfg.conjugate_points {
        let t = cfg.conjugate_t_max * i as f64 / cfg.conjugate_points as f64;
        let p = m.density(t)?;
        let gap = m.young_gap(t, p)?;
        worst_gap = worst_gap.max(gap.abs());
        csv.row(&[
            fmt_float(t),
            fmt_float(m.eval(t)?),
            fmt_float(p),
            fmt_float(n.eval(t)?),
            fmt_float(n.density(t)?),
            fmt_float(gap),
        ]);
    }
    let path = written(out_dir.join("conjugate.csv"), &csv)?;
    Ok(CommandOutcome {
        files: vec![path],
        success: true,
        report: vec![
            format!("N-function {}", m.label()),
            format!("{} grid points on [0, {}]", cfg.conjugate_points + 1, cfg.conjugate_t_max),
            format!("max |young gap at v = p(t)| = {worst_gap:.3e}"),
        ],
    })
}

fn norms(inst: &Instance, out_dir: &Path) -> Result<CommandOutcome> {
    let m = &inst.nfunction;
    let mut csv = Csv::new(&["section", "omega", "norm_kind", "value", "witness_modular", "iterations"]);
    let mut report = vec![format!("N-function {}", m.label())];
    for (name, f) in &inst.sections {
        inst.bundle.check_section(f)?;
        let mut worst_ratio = 0.0f64;
        for (omega, (fiber, x)) in inst.bundle.fibers().iter().zip(f.components()).enumerate() {
            let lux = orlicz::luxemburg_norm(m, fiber, x)?;
            let orl = orlicz::orlicz_norm(m, fiber, x)?;
            csv.row(&[
                name.clone(),
                omega.to_string(),
                NormKind::Luxemburg.name().into(),
                fmt_float(lux.value),
                fmt_float(lux.modular_at_lambda),
                lux.iterations.to_string(),
            ]);
            csv.row(&[
                name.clone(),
                omega.to_string(),
                NormKind::Orlicz.name().into(),
                fmt_float(orl.value),
                fmt_float(orl.witness_modular),
                orl.iterations.to_string(),
            ]);
            if lux.value > 0.0 {
                worst_ratio = worst_ratio.max(orl.value / lux.value);
            }
        }
        report.push(format!("section {name}: max orlicz/luxemburg ratio = {worst_ratio:.6}"));
    }
    let path = written(out_dir.join("norms.csv"), &csv)?;
    Ok(CommandOutcome {
        files: vec![path],
        success: true,
        report,
    })
}

fn condition_report(cfg: &Config, inst: &Instance) -> Result<ConditionReport> {
    operators::verify_conditions(
        &inst.operator,
        &inst.bundle,
        &inst.nfunction,
        cfg.samples,
        seed::sub_seed(cfg.seed, "verify"),
    )
}

fn verify(cfg: &Config, inst: &Instance, out_dir: &Path) -> Result<CommandOutcome> {
    let report = condition_report(cfg, inst)?;
    let mut csv = Csv::new(&["omega", "condition", "status", "residual"]);
    let mut lines = Vec::new();
    for fr in &report.fibers {
        for (name, pass, residual) in fr.rows() {
            csv.row(&[
                fr.omega.to_string(),
                name.into(),
                if pass { "pass" } else { "fail" }.into(),
                fmt_float(residual),
            ]);
            if !pass {
                lines.push(format!("fiber {}: {name} fails (residual {residual:.3e})", fr.omega));
            }
        }
    }
    lines.insert(
        0,
        format!(
            "operator {} on {} fibers ({} samples each)",
            if report.admissible() { "admissible" } else { "NOT admissible" },
            report.fibers.len(),
            cfg.samples
        ),
    );
    let path = written(out_dir.join("verify.csv"), &csv)?;
    Ok(CommandOutcome {
        files: vec![path],
        success: true,
        report: lines,
    })
}

/// Per-fiber reference limit: the spectral prediction where every fiber has
/// one, otherwise the final average.
fn reference_limit(inst: &Instance, w: &crate::weights::WeightSequence, f: &Section, fallback: &Section) -> Result<(Section, bool)> {
    let mut comps = Vec::with_capacity(f.base_len());
    for ((op, fiber), x) in inst.operator.components().iter().zip(inst.bundle.fibers()).zip(f.components()) {
        match ergodic::spectral_limit_oracle(op, fiber, w, x)? {
            Some(p) => comps.push(p),
            None => return Ok((fallback.clone(), false)),
        }
    }
    Ok((Section::new(comps), true))
}

fn fiber_sup_distance(a: &FiberVector, b: &FiberVector) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn converge(cfg: &Config, inst: &Instance, out_dir: &Path) -> Result<CommandOutcome> {
    let conditions = condition_report(cfg, inst)?;
    let admissible = conditions.admissible();
    if !admissible && !cfg.allow_inadmissible {
        return Err(usage(
            "operator fails verification; set `allow_inadmissible = true` to run the averages anyway",
        ));
    }
    let m = &inst.nfunction;
    let w = &cfg.weights;
    let params = AveragingParams {
        n_max: cfg.n_max,
        n_dense: cfg.n_dense,
        include_k0: cfg.include_k0,
    };
    let mut header = vec!["section", "n", "omega", "atom"];
    if cfg.emit_values {
        header.push("A_n_value");
    }
    header.extend(["residual_envelope", "luxemburg_norm_An", "maximal_ratio"]);
    let mut csv = Csv::new(&header);
    let mut summary = Csv::new(&[
        "section",
        "omega",
        "reference",
        "converged",
        "final_envelope",
        "luxemburg_gap",
        "dominant_sup_finite",
        "maximal_ratio",
        "admissible",
    ]);
    let mut report = vec![format!(
        "weights {w}, n_max {}, operator {}",
        cfg.n_max,
        if admissible { "admissible" } else { "NOT admissible (forced)" }
    )];
    let mut all_converged = true;
    for (name, f) in &inst.sections {
        inst.bundle.check_section(f)?;
        let trace = ergodic::weighted_averages(&inst.operator, w, f, &params)?;
        let dom = ergodic::dominant_sup(&inst.operator, &inst.bundle, w, f, m, &params)?;
        let olimit = ergodic::detect_o_limit(&trace, cfg.tol)?;
        let (reference, predicted) = reference_limit(inst, w, f, &trace.limit_estimate)?;

        // sup over recorded m >= n of the fiber sup-distance to the reference
        let steps = trace.schedule.len();
        let mut residual = vec![vec![0.0; inst.bundle.base_len()]; steps];
        let mut running = vec![0.0f64; inst.bundle.base_len()];
        for (row, avg) in residual.iter_mut().zip(&trace.averages).rev() {
            for (omega, (cell, run)) in row.iter_mut().zip(running.iter_mut()).enumerate() {
                *run = run.max(fiber_sup_distance(avg.component(omega), reference.component(omega)));
                *cell = *run;
            }
        }

        for (i, &n) in trace.schedule.iter().enumerate() {
            let avg = &trace.averages[i];
            let ratios = &dom.ratio_history[i].1;
            for (omega, fiber) in inst.bundle.fibers().iter().enumerate() {
                let lux = orlicz::luxemburg_norm(m, fiber, avg.component(omega))?.value;
                for (atom, v) in avg.component(omega).values().iter().enumerate() {
                    let mut row = vec![name.clone(), n.to_string(), omega.to_string(), atom.to_string()];
                    if cfg.emit_values {
                        row.push(fmt_float(*v));
                    }
                    row.extend([
                        fmt_float(residual[i][omega]),
                        fmt_float(lux),
                        fmt_float(ratios.values()[omega]),
                    ]);
                    csv.row(&row);
                }
            }
        }

        for (omega, fiber) in inst.bundle.fibers().iter().enumerate() {
            let gap = trace.limit_estimate.component(omega).combine(1.0, reference.component(omega), -1.0)?;
            summary.row(&[
                name.clone(),
                omega.to_string(),
                if predicted { "spectral" } else { "final_average" }.into(),
                olimit.per_base_converged[omega].to_string(),
                fmt_float(olimit.convergence.per_base_final.values()[omega]),
                fmt_float(orlicz::luxemburg_norm(m, fiber, &gap)?.value),
                dom.finite.to_string(),
                fmt_float(dom.ratio.values()[omega]),
                conditions.fibers[omega].passes().to_string(),
            ]);
        }
        all_converged &= olimit.converged;
        report.push(format!(
            "section {name}: {} (tail envelope {:.3e}, tol {:.1e}), reference {}, max maximal ratio {:.4}",
            if olimit.converged { "converged" } else { "not converged" },
            olimit.convergence.final_max,
            cfg.tol,
            if predicted { "spectral" } else { "final average" },
            dom.ratio.values().iter().fold(0.0f64, |a, b| a.max(*b)),
        ));
    }
    if !all_converged {
        report.push("some sections did not converge within tol".into());
    }
    let files = vec![
        written(out_dir.join("converge.csv"), &csv)?,
        written(out_dir.join("converge_summary.csv"), &summary)?,
    ];
    Ok(CommandOutcome {
        files,
        success: true,
        report,
    })
}

fn suite_command(cfg: &Config, out_dir: &Path) -> Result<CommandOutcome> {
    let report = suite::run_suite(seed::sub_seed(cfg.seed, "suite"))?;
    let path = written(out_dir.join("suite.csv"), &report.csv)?;
    let mut lines: Vec<String> = report.outcomes.iter().flat_map(|o| o.summary_lines()).collect();
    let failed = report.outcomes.iter().filter(|o| !o.passed()).count();
    lines.push(format!("{} of {} criteria passed", report.outcomes.len() - failed, report.outcomes.len()));
    Ok(CommandOutcome {
        files: vec![path],
        success: report.passed(),
        report: lines,
    })
}
