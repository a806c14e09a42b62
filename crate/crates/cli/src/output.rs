//! Command implementations: each one computes its study and writes CSV
//! and/or JSON files with a provenance header (artifact version, config
//! hash, effective seed), so identical configs reproduce identical bytes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use speclift::estimation::{self, bounds, qubit, ProbeState, Spectrum};
use speclift::ioncompile::{self, IonSchedule, IonState};
use speclift::optimize::{self, StateChoice};
use speclift::protocols;
use speclift::C64;

use crate::config::{CliError, CliResult, Config};

const VERSION: &str = env!("CARGO_PKG_VERSION");

fn provenance(config: &Config, seed: Option<u64>) -> String {
    match seed {
        Some(s) => format!("# speclift={VERSION} config={} seed={s}", config.hash),
        None => format!("# speclift={VERSION} config={}", config.hash),
    }
}

fn write_file(out: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    std::fs::create_dir_all(out)?;
    let path = out.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x:.12e}"))
}

#[derive(Serialize)]
struct Provenance {
    version: &'static str,
    config: String,
    seed: Option<u64>,
}

impl Provenance {
    fn new(config: &Config, seed: Option<u64>) -> Self {
        Provenance {
            version: VERSION,
            config: config.hash.clone(),
            seed,
        }
    }
}

pub fn cmd_bounds(config: &Config, out: &Path) -> CliResult<Vec<PathBuf>> {
    let prior = config.prior()?;
    let section = config.bounds()?;
    let n = section.levels;

    let mut csv = String::new();
    writeln!(csv, "{}", provenance(config, None)).unwrap();
    writeln!(csv, "t,bcrb,entropic_d,mse").unwrap();

    if n == 1 {
        // a single level never gains information: mse stays at the prior
        // variance and the entropic bound equals it
        let entropic = bounds::entropic_bound(&prior, 1)?;
        for i in 0..section.t_points {
            let t = section.t_max * i as f64 / (section.t_points - 1) as f64;
            writeln!(csv, "{t:.12e},,{entropic:.12e},{:.12e}", prior.variance()).unwrap();
        }
    } else {
        let spectrum = Spectrum::equally_gapped(n);
        let state = match &section.state {
            Some(raw) => ProbeState::from_real(raw)?,
            None => ProbeState::flat(n),
        };
        let entropic = bounds::entropic_bound(&prior, n)?;
        for i in 0..section.t_points {
            let t = section.t_max * i as f64 / (section.t_points - 1) as f64;
            let pair = estimation::averaged_pair(&prior, &state, &spectrum, t)?;
            let sol = estimation::personick_solve(&pair)?;
            let mse = estimation::mse(&prior, &pair, &sol);
            let bcrb = bounds::bcrb(&prior, &state, &spectrum, t).ok();
            writeln!(csv, "{t:.12e},{},{entropic:.12e},{mse:.12e}", fmt_opt(bcrb)).unwrap();
        }
    }
    Ok(vec![write_file(out, "bounds.csv", &csv)?])
}

#[derive(Serialize)]
struct QubitOptReport {
    provenance: Provenance,
    t_max: f64,
    mse_min: f64,
    gain: f64,
    closed_form_gain: f64,
    oracle_mse: f64,
    max_pairwise_delta: f64,
}

pub fn cmd_qubit_opt(config: &Config, out: &Path) -> CliResult<Vec<PathBuf>> {
    let prior = config.prior()?;
    let state = ProbeState::flat(2);
    let spectrum = Spectrum::qubit();
    let (t_max, mse_min) = optimize::find_tmax(&prior, StateChoice::Fixed(&state), &spectrum)?;

    let pair = estimation::averaged_pair(&prior, &state, &spectrum, t_max)?;
    let sol = estimation::personick_solve(&pair)?;
    let gain = estimation::gain(&pair, &sol);
    let (_, closed_form_gain) = qubit::qubit_general_solution(&prior, t_max)?;
    let grid = prior.grid_default()?;
    let oracle = estimation::simulate_bayes(&grid, &state, &spectrum, t_max, &sol)?;

    let mse_personick = prior.variance() - gain;
    let mse_closed = prior.variance() - closed_form_gain;
    let max_pairwise_delta = (mse_personick - mse_closed)
        .abs()
        .max((mse_personick - oracle.mse).abs())
        .max((mse_closed - oracle.mse).abs());

    let report = QubitOptReport {
        provenance: Provenance::new(config, None),
        t_max,
        mse_min,
        gain,
        closed_form_gain,
        oracle_mse: oracle.mse,
        max_pairwise_delta,
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    Ok(vec![write_file(out, "qubit_opt.json", &json)?])
}

pub fn cmd_nlevel_sweep(config: &Config, out: &Path) -> CliResult<Vec<PathBuf>> {
    let prior = config.prior()?;
    let section = config.nlevel_sweep()?;
    let seed = config.seed(section.seed)?;
    let grid = optimize::default_t_grid(&prior, section.t_points);
    let rows = optimize::nlevel_sweep(&prior, section.n_min..=section.n_max, &grid, seed)?;

    let mut csv = String::new();
    writeln!(csv, "{}", provenance(config, Some(seed))).unwrap();
    writeln!(csv, "n,t,mse,bound_entropic,bound_bcrb,converged").unwrap();
    for r in &rows {
        writeln!(
            csv,
            "{},{:.12e},{:.12e},{:.12e},{},{}",
            r.n,
            r.t,
            r.mse,
            r.bound_entropic,
            fmt_opt(r.bound_bcrb),
            r.converged
        )
        .unwrap();
    }

    let mut env_csv = String::new();
    writeln!(env_csv, "{}", provenance(config, Some(seed))).unwrap();
    writeln!(env_csv, "t,mse,best_n").unwrap();
    let counts = optimize::best_level_counts(&rows, 1e-9);
    for ((t, mse), (_, n)) in optimize::envelope(&rows).iter().zip(&counts) {
        writeln!(env_csv, "{t:.12e},{mse:.12e},{n}").unwrap();
    }

    Ok(vec![
        write_file(out, "nlevel_sweep.csv", &csv)?,
        write_file(out, "nlevel_envelope.csv", &env_csv)?,
    ])
}

pub fn cmd_onthefly(config: &Config, out: &Path) -> CliResult<Vec<PathBuf>> {
    let prior = config.prior()?;
    let section = config.onthefly()?;
    let seed = config.seed(section.seed)?;
    let trace = protocols::onthefly_run(&prior, section.steps, section.tau, seed)?;

    let mut csv = String::new();
    writeln!(csv, "{}", provenance(config, Some(seed))).unwrap();
    let mut body = Vec::new();
    trace.write_csv(&mut body)?;
    csv.push_str(&String::from_utf8(body).expect("csv is utf8"));

    #[derive(Serialize)]
    struct TraceReport<'a> {
        provenance: Provenance,
        trace: &'a protocols::ProtocolTrace,
    }
    let json = serde_json::to_string_pretty(&TraceReport {
        provenance: Provenance::new(config, Some(seed)),
        trace: &trace,
    })
    .expect("trace serializes");

    Ok(vec![
        write_file(out, "onthefly.csv", &csv)?,
        write_file(out, "onthefly.json", &json)?,
    ])
}

#[derive(Serialize)]
struct SequentialReport {
    provenance: Provenance,
    a_star: f64,
    coefficient_at_a_star: f64,
    a_used: f64,
    reduction_factor: f64,
}

pub fn cmd_sequential(config: &Config, out: &Path) -> CliResult<Vec<PathBuf>> {
    let section = config.sequential()?;
    let (a_star, coefficient) = protocols::sequential_optimize_a();
    let a_used = section.a.unwrap_or(a_star);
    let plan = protocols::sequential_plan(section.v0, a_used, section.steps)?;

    let mut csv = String::new();
    writeln!(csv, "{}", provenance(config, None)).unwrap();
    writeln!(csv, "k,variance,step_time,cumulative_time").unwrap();
    for k in 0..=section.steps {
        let step_time = plan.times.get(k).copied();
        writeln!(
            csv,
            "{k},{:.12e},{},{:.12e}",
            plan.variances[k],
            fmt_opt(step_time),
            plan.cumulative[k]
        )
        .unwrap();
    }

    let report = SequentialReport {
        provenance: Provenance::new(config, None),
        a_star,
        coefficient_at_a_star: coefficient,
        a_used,
        reduction_factor: plan.r,
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");

    Ok(vec![
        write_file(out, "sequential.csv", &csv)?,
        write_file(out, "sequential.json", &json)?,
    ])
}

pub fn cmd_two_qubit(config: &Config, out: &Path) -> CliResult<Vec<PathBuf>> {
    let prior = config.prior()?;
    let section = config.two_qubit()?;
    let seed = config.seed(section.seed)?;
    let report = optimize::two_qubit_study(&prior, seed)?;

    #[derive(Serialize)]
    struct StudyReport<'a> {
        provenance: Provenance,
        report: &'a optimize::TwoQubitReport,
    }
    let json = serde_json::to_string_pretty(&StudyReport {
        provenance: Provenance::new(config, Some(seed)),
        report: &report,
    })
    .expect("report serializes");
    Ok(vec![write_file(out, "two_qubit.json", &json)?])
}

/// Self-contained compiled schedule: the pulse program plus the protocol it
/// realizes, so verification needs no other inputs.
#[derive(Serialize, Deserialize)]
pub struct ScheduleFile {
    pub schedule: IonSchedule,
    pub spectrum: Vec<f64>,
    pub state: Vec<C64>,
}

pub fn cmd_compile(config: &Config, out: &Path) -> CliResult<Vec<PathBuf>> {
    let section = config.compile()?;
    let spectrum = Spectrum::new(section.spectrum.clone())?;
    let state = ProbeState::from_real(&section.state)?;
    let mut schedule =
        ioncompile::compile_protocol(&spectrum, &state, section.t, section.cutoff)?;
    schedule.field = Some(section.field);

    let file = ScheduleFile {
        spectrum: spectrum.levels().to_vec(),
        state: state.coeffs().to_vec(),
        schedule,
    };
    let json = serde_json::to_string_pretty(&file).expect("schedule serializes");
    let name = section
        .schedule_file
        .to_str()
        .ok_or_else(|| CliError::Config("schedule_file is not valid UTF-8".into()))?;
    Ok(vec![write_file(out, name, &json)?])
}

#[derive(Serialize)]
struct VerifyReport {
    provenance: Provenance,
    max_deviation: f64,
    norm_deviation: f64,
    measurement_deviation: f64,
}

pub fn cmd_verify_pulses(config: &Config, out: &Path) -> CliResult<Vec<PathBuf>> {
    let section = config.verify_pulses()?;
    let path = out.join(&section.schedule_file);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let file: ScheduleFile =
        serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
    let field = file
        .schedule
        .field
        .ok_or_else(|| CliError::Config("schedule has no field strength".into()))?;

    let spectrum = Spectrum::new(file.spectrum.clone())?;
    let state = ProbeState::new(file.state.clone())?;
    let cutoff = file.schedule.cutoff;
    let t = file.schedule.total_time;

    let final_state = ioncompile::simulate_ion(
        &file.schedule.pulses,
        field,
        t,
        &IonState::ground(cutoff),
    )?;
    let target = ioncompile::effective_target(&spectrum, &state, field, t, cutoff)?;
    let max_deviation = (0..4 * cutoff)
        .map(|i| {
            use speclift::ioncompile::Electronic::*;
            let el = [G, E, GPrime, EPrime][i / cutoff];
            let k = i % cutoff + 1;
            (final_state.amp(el, k) - target.amp(el, k)).norm()
        })
        .fold(0.0f64, f64::max);
    let norm_deviation = (final_state.norm() - 1.0).abs();

    let dist = ioncompile::measurement_distribution(&final_state, &file.schedule.measurement)?;
    let weights = state.weights();
    let measurement_deviation = dist
        .iter()
        .zip(weights.iter().chain(std::iter::repeat(&0.0)))
        .map(|(p, w)| (p - w).abs())
        .fold(0.0f64, f64::max);

    let report = VerifyReport {
        provenance: Provenance::new(config, None),
        max_deviation,
        norm_deviation,
        measurement_deviation,
    };
    use std::io::Write as _;
    let _ = writeln!(
        std::io::stdout(),
        "max deviation vs effective model: {max_deviation:.3e} (norm drift {norm_deviation:.3e})"
    );
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    Ok(vec![write_file(out, "verify_pulses.json", &json)?])
}
