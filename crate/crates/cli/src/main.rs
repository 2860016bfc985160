//! Command-line front end: JSON problem documents in, JSON reports and
//! resolution traces out. Exit codes: 0 success, 1 I/O failure, 2 invalid
//! input or failed check, 3 engine non-termination or incomparable maxima.

mod doc;
mod fiber;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use toric_res_core::fan::deduplicated_faces;
use toric_res_core::hasse::face_multiplicity;
use toric_res_core::strata::is_smooth_chart;
use toric_res_core::{
    global_invariant, glue_hasse_ideal, hs_at_distinguished, resolve_general,
    resolve_hypersurface, standard_basis, CompletionCaps, EmbeddingState, EngineError,
};

use doc::{ProblemDocument, ReplayStep, Violation};

#[derive(Parser)]
#[command(name = "toric-res", version, about = "Resolution of embedded toric schemes over the integers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// One binomial per chart, centres from the derivative-locus invariant.
    Hypersurface,
    /// Arbitrarily many generators per chart (experimental).
    General,
}

#[derive(Subcommand)]
enum Command {
    /// Check a problem document and report violations with JSON pointers.
    Validate {
        #[arg(long)]
        input: PathBuf,
    },
    /// Resolve the singularities and emit a replayable trace document.
    Resolve {
        #[arg(long)]
        input: PathBuf,
        /// Driver to use; defaults to the document's `mode`, then hypersurface.
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Write the trace here instead of stdout.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        max_steps: usize,
        /// Reserved for corpus tooling; the drivers are deterministic.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Report the maximal-multiplicity locus and the glued derivative ideal.
    HasseLocus {
        #[arg(long)]
        input: PathBuf,
    },
    /// Compute the standard basis of one chart's ideal.
    StandardBasis {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        chart: usize,
    },
    /// Tabulate the Hilbert-Samuel function of one chart at its distinguished point.
    HilbertSamuel {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        chart: usize,
        #[arg(long, default_value_t = 8)]
        lmax: u64,
    },
    /// Cross-check torus rank, smoothness, and derivative loci over finite fields.
    FiberCheck {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = vec![2u64, 3])]
        primes: Vec<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Validate { input } => cmd_validate(&input),
        Command::Resolve { input, mode, trace, max_steps, seed } => {
            cmd_resolve(&input, mode, trace.as_deref(), max_steps, seed)
        }
        Command::HasseLocus { input } => cmd_hasse_locus(&input),
        Command::StandardBasis { input, chart } => cmd_standard_basis(&input, chart),
        Command::HilbertSamuel { input, chart, lmax } => {
            cmd_hilbert_samuel(&input, chart, lmax)
        }
        Command::FiberCheck { input, primes } => cmd_fiber_check(&input, &primes),
    };
    ExitCode::from(code)
}

fn engine_exit(e: &EngineError) -> u8 {
    match e {
        EngineError::IncomparableMaxima | EngineError::NonTermination(_) => 3,
        _ => 2,
    }
}

fn print_json<T: Serialize>(value: &T) {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    print!("{s}");
}

fn read_document(path: &Path) -> Result<ProblemDocument, u8> {
    let text = fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        1u8
    })?;
    serde_json::from_str(&text).map_err(|e| {
        eprintln!("error: {}: not a problem document: {e}", path.display());
        2u8
    })
}

fn load_state(path: &Path) -> Result<EmbeddingState, u8> {
    let document = read_document(path)?;
    document.to_state().map_err(|violations| {
        for v in &violations {
            eprintln!("invalid: {}: {}", v.path, v.message);
        }
        2u8
    })
}

#[derive(Serialize)]
struct ValidationDocument {
    valid: bool,
    violations: Vec<Violation>,
}

fn cmd_validate(input: &Path) -> u8 {
    let text = match fs::read_to_string(input) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", input.display());
            return 1;
        }
    };
    let violations = match serde_json::from_str::<ProblemDocument>(&text) {
        Ok(document) => match document.to_state() {
            Ok(_) => Vec::new(),
            Err(vs) => vs,
        },
        Err(e) => vec![Violation { path: String::new(), message: e.to_string() }],
    };
    let valid = violations.is_empty();
    print_json(&ValidationDocument { valid, violations });
    if valid {
        0
    } else {
        2
    }
}

fn cmd_resolve(
    input: &Path,
    mode: Option<Mode>,
    trace_path: Option<&Path>,
    max_steps: usize,
    _seed: Option<u64>,
) -> u8 {
    let document = match read_document(input) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let state = match document.to_state() {
        Ok(s) => s,
        Err(violations) => {
            for v in &violations {
                eprintln!("invalid: {}: {}", v.path, v.message);
            }
            return 2;
        }
    };
    let mode = mode.unwrap_or(match document.mode.as_deref() {
        Some("general") => Mode::General,
        _ => Mode::Hypersurface,
    });
    let caps = CompletionCaps::default();
    let built = match mode {
        Mode::Hypersurface => resolve_hypersurface(&state, max_steps).and_then(|trace| {
            let steps = trace
                .steps
                .iter()
                .map(|s| ReplayStep {
                    center: s.center.clone(),
                    center_rays: s.center_rays.clone(),
                    barycentre_id: s.barycentre_id,
                    invariant_before: s.triple,
                    attaining_face: None,
                })
                .collect();
            let smooth = smooth_flags(&trace.final_state, &caps)?;
            let fiber = fiber::check_state(&trace.final_state, &[2, 3], &caps)?;
            doc::build_trace(
                "hypersurface",
                false,
                &state,
                steps,
                &trace.final_state,
                Some(trace.final_triple),
                smooth,
                Some(fiber),
            )
        }),
        Mode::General => {
            eprintln!("note: the general driver is experimental");
            resolve_general(&state, &caps, max_steps).and_then(|trace| {
                let steps = trace
                    .steps
                    .iter()
                    .map(|s| ReplayStep {
                        center: s.center.clone(),
                        center_rays: s.center_rays.clone(),
                        barycentre_id: s.barycentre_id,
                        invariant_before: None,
                        attaining_face: Some(s.attaining_face.clone()),
                    })
                    .collect();
                let smooth = smooth_flags(&trace.final_state, &caps)?;
                let fiber = fiber::check_state(&trace.final_state, &[2, 3], &caps)?;
                doc::build_trace(
                    "general",
                    true,
                    &state,
                    steps,
                    &trace.final_state,
                    None,
                    smooth,
                    Some(fiber),
                )
            })
        }
    };
    let trace_doc = match built {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return engine_exit(&e);
        }
    };
    match trace_path {
        Some(path) => {
            if let Err(e) = fs::write(path, trace_doc.canonical_json()) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return 1;
            }
            eprintln!(
                "resolved in {} steps; {} final charts, all smooth: {}",
                trace_doc.steps.len(),
                trace_doc.final_problem.charts.len(),
                trace_doc.smooth_charts.iter().all(|&s| s)
            );
        }
        None => print!("{}", trace_doc.canonical_json()),
    }
    0
}

fn smooth_flags(
    state: &EmbeddingState,
    caps: &CompletionCaps,
) -> toric_res_core::Result<Vec<bool>> {
    state
        .charts
        .iter()
        .map(|chart| is_smooth_chart(chart, caps))
        .collect()
}

#[derive(Serialize)]
struct HasseLocusDocument {
    gamma: u64,
    omega: u64,
    attaining: usize,
    /// Centre the hypersurface driver would blow up next, as global ray ids.
    center: Option<Vec<usize>>,
    /// Inclusion-minimal faces of maximal multiplicity, as global ray ids.
    components: Vec<Vec<usize>>,
    /// Per chart: generators of the glued derivative ideal as divisor
    /// exponents, or `null` for the unit ideal.
    chart_ideals: Option<Vec<Option<Vec<Vec<u64>>>>>,
}

fn cmd_hasse_locus(input: &Path) -> u8 {
    let state = match load_state(input) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let invariant = match global_invariant(&state) {
        Ok(inv) => inv,
        Err(e) => {
            eprintln!("error: {e}");
            return engine_exit(&e);
        }
    };
    let gamma = invariant.triple.gamma;
    let mut components = Vec::new();
    if gamma >= 1 {
        let mut attaining: Vec<Vec<usize>> = Vec::new();
        for face in deduplicated_faces(&state.fan) {
            let chart = state
                .charts
                .iter()
                .find(|c| face.iter().all(|id| c.cone.binary_search(id).is_ok()))
                .expect("every face lies in some maximal cone");
            let positions: Vec<usize> = face
                .iter()
                .map(|id| chart.cone.binary_search(id).unwrap())
                .collect();
            if face_multiplicity(&chart.binomials[0], &positions) == gamma {
                attaining.push(face);
            }
        }
        components = attaining
            .iter()
            .filter(|face| {
                !attaining
                    .iter()
                    .any(|o| o.len() < face.len() && o.iter().all(|id| face.contains(id)))
            })
            .cloned()
            .collect();
        components.sort();
    }
    let chart_ideals = if gamma >= 2 {
        match glue_hasse_ideal(&state) {
            Ok(ideals) => Some(ideals),
            Err(e) => {
                eprintln!("error: {e}");
                return engine_exit(&e);
            }
        }
    } else {
        None
    };
    print_json(&HasseLocusDocument {
        gamma,
        omega: invariant.triple.omega,
        attaining: invariant.triple.attaining,
        center: invariant.center,
        components,
        chart_ideals,
    });
    0
}

#[derive(Serialize)]
struct StandardBasisDocument {
    chart: usize,
    nonlinear: Vec<doc::BinomialDocument>,
    linear: Vec<doc::BinomialDocument>,
    unit_like: Vec<doc::BinomialDocument>,
    torus_rank: usize,
    torus_rows: Vec<Vec<i64>>,
}

fn binomial_docs(list: &[toric_res_core::ChartBinomial]) -> Vec<doc::BinomialDocument> {
    list.iter()
        .map(|g| doc::BinomialDocument {
            alpha: g.alpha.clone(),
            beta: g.beta.clone(),
            gamma: g.gamma.clone(),
        })
        .collect()
}

fn chart_index(state: &EmbeddingState, chart: usize) -> Result<(), u8> {
    if chart >= state.charts.len() {
        eprintln!(
            "error: chart {chart} out of range; the document has {} charts",
            state.charts.len()
        );
        return Err(2);
    }
    Ok(())
}

fn cmd_standard_basis(input: &Path, chart: usize) -> u8 {
    let state = match load_state(input) {
        Ok(s) => s,
        Err(code) => return code,
    };
    if let Err(code) = chart_index(&state, chart) {
        return code;
    }
    match standard_basis(&state.charts[chart], &CompletionCaps::default()) {
        Ok(basis) => {
            print_json(&StandardBasisDocument {
                chart,
                nonlinear: binomial_docs(&basis.nonlinear),
                linear: binomial_docs(&basis.linear),
                unit_like: binomial_docs(&basis.unit_like),
                torus_rank: basis.torus.rank(),
                torus_rows: basis.torus.rows.clone(),
            });
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            engine_exit(&e)
        }
    }
}

#[derive(Serialize)]
struct HilbertSamuelDocument {
    chart: usize,
    off_scheme: bool,
    /// Codimension cut out of the torus directions.
    nu: usize,
    /// Number of divisor variables in the staircase model.
    r: usize,
    free: usize,
    vertices: Vec<Vec<u64>>,
    regularity: u64,
    /// Pairs `[l, H(l)]` for `l = 0..=lmax`.
    values: Vec<[u64; 2]>,
}

fn cmd_hilbert_samuel(input: &Path, chart: usize, lmax: u64) -> u8 {
    let state = match load_state(input) {
        Ok(s) => s,
        Err(code) => return code,
    };
    if let Err(code) = chart_index(&state, chart) {
        return code;
    }
    let stalk = match hs_at_distinguished(&state.charts[chart], &CompletionCaps::default())
    {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return engine_exit(&e);
        }
    };
    let mut values = Vec::new();
    for l in 0..=lmax {
        let h = stalk.fiber.eval(l);
        let Ok(h) = u64::try_from(h) else {
            eprintln!("error: H({l}) does not fit in 64 bits; lower --lmax");
            return 2;
        };
        values.push([l, h]);
    }
    print_json(&HilbertSamuelDocument {
        chart,
        off_scheme: stalk.off_scheme,
        nu: stalk.nu,
        r: stalk.fiber.r,
        free: stalk.fiber.free,
        vertices: stalk.fiber.vertices.clone(),
        regularity: stalk.fiber.regularity(),
        values,
    });
    0
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

fn cmd_fiber_check(input: &Path, primes: &[u64]) -> u8 {
    if primes.is_empty() {
        eprintln!("error: --primes needs at least one prime");
        return 2;
    }
    if let Some(&bad) = primes.iter().find(|&&p| !is_prime(p) || p > 97) {
        eprintln!("error: {bad} is not a prime up to 97");
        return 2;
    }
    let state = match load_state(input) {
        Ok(s) => s,
        Err(code) => return code,
    };
    match fiber::check_state(&state, primes, &CompletionCaps::default()) {
        Ok(report) => {
            let passed = report.all_passed;
            print_json(&report);
            if passed {
                0
            } else {
                2
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            engine_exit(&e)
        }
    }
}
