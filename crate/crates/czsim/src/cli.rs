//! Command-line entry point: reproducible batch runs over the calibration
//! experiments, benchmarking, and tune-up, emitting plot-ready CSV data and
//! JSON summaries into an output directory.
//!
//! Every artifact embeds the config hash and master seed; identical
//! (config, seed) pairs produce byte-identical artifacts.

use crate::bench::{
    error_rates, fit_decay_fixed_floor, run_pb, run_rb, CliffordGroup, DecayModel,
    LindbladBackend, RbPoint,
};
use crate::config::Config;
use crate::device::{self, DeviceParams, FluxMap};
use crate::error::{Error, Result};
use crate::evolve::{cz_target, ComputationalBasis};
use crate::experiments::{
    conditional_phase_scan, coupler_spectroscopy, coupling_from_chevron, iswap_chevron,
    leakage_map, ramsey_conditional_phase, ramsey_phi_c, CzPulse, ShotNoise,
};
use crate::report::{write_csv, write_json, write_map_csv, Summary};
use crate::tuneup::{
    tune_adiabatic_cz, tune_diabatic_cz, CalibrationRecord, NmConfig, NmResult,
};
use crate::units;
use clap::{Parser, Subcommand};
use serde::Serialize;
use std::path::PathBuf;

/// Shot handling: exact expectation values or sampled counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shots {
    Exact,
    Count(u64),
}

fn parse_shots(s: &str) -> std::result::Result<Shots, String> {
    if s == "exact" {
        return Ok(Shots::Exact);
    }
    match s.parse::<u64>() {
        Ok(n) if n >= 1 => Ok(Shots::Count(n)),
        _ => Err(format!("expected 'exact' or a positive count, got '{s}'")),
    }
}

fn parse_on_off(s: &str) -> std::result::Result<bool, String> {
    match s {
        "on" => Ok(true),
        "off" => Ok(false),
        _ => Err(format!("expected 'on' or 'off', got '{s}'")),
    }
}

/// Pulse-level two-transmon + tunable-coupler simulator.
#[derive(Debug, Parser)]
#[command(name = "czsim", version, about)]
pub struct Cli {
    /// TOML run configuration (defaults to the reference device).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed for every stochastic element of the run.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output directory for CSV/JSON artifacts.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker-thread cap (default: one per core).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// 'exact' for expectation values, or a shot count for sampled readout.
    #[arg(long, global = true, default_value = "exact", value_parser = parse_shots)]
    pub shots: Shots,
    /// Include T1/T_φ decay channels ('on') or run unitary ('off').
    #[arg(long, global = true, default_value = "off", value_parser = parse_on_off,
          action = clap::ArgAction::Set)]
    pub decoherence: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Dressed single-excitation spectrum vs coupler bias.
    Spectroscopy,
    /// iSWAP chevron map (qubits on resonance, coupler swept).
    Chevron,
    /// Effective coupling |g̃| extracted from the chevron by Fourier analysis.
    Coupling,
    /// Ramsey conditional-phase measurement of the configured CZ pulse.
    RamseyPhase,
    /// Conditional phase vs adiabatic pulse peak bias.
    PhaseScan,
    /// Diabatic-pulse leakage map over (V_b, V_q).
    LeakageMap,
    /// Two-qubit Clifford randomized benchmarking on the simulated device.
    Rb,
    /// Purity benchmarking on the simulated device.
    Pb,
    /// Nelder–Mead tune-up of the adiabatic (half-cosine) CZ.
    TuneAdiabatic,
    /// Nelder–Mead tune-up of the diabatic (square) CZ.
    TuneDiabatic,
    /// Residual ZZ rate at the idle point.
    Zz,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Spectroscopy => "spectroscopy",
            Command::Chevron => "chevron",
            Command::Coupling => "coupling",
            Command::RamseyPhase => "ramsey-phase",
            Command::PhaseScan => "phase-scan",
            Command::LeakageMap => "leakage-map",
            Command::Rb => "rb",
            Command::Pb => "pb",
            Command::TuneAdiabatic => "tune-adiabatic",
            Command::TuneDiabatic => "tune-diabatic",
            Command::Zz => "zz",
        }
    }
}

struct Ctx {
    cfg: Config,
    params: DeviceParams,
    flux: FluxMap,
    hash: String,
    seed: u64,
    out: PathBuf,
    shots: Shots,
    decoherence: bool,
}

impl Ctx {
    fn basis(&self) -> Result<ComputationalBasis> {
        ComputationalBasis::at_idle(&self.params)
    }

    fn shot_noise(&self) -> Option<ShotNoise> {
        match self.shots {
            Shots::Exact => None,
            Shots::Count(shots) => Some(ShotNoise {
                shots,
                seed: self.seed,
            }),
        }
    }

    fn summary<T: Serialize>(&self, command: Command, result: T) -> Summary<T> {
        Summary::new(command.name(), &self.hash, self.seed, result)
    }

    fn path(&self, file: &str) -> PathBuf {
        self.out.join(file)
    }
}

/// Run a parsed invocation; artifacts land in `cli.out`.
pub fn execute(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n < 1 {
            return Err(Error::Config("--threads must be ≥ 1".into()));
        }
        // First caller wins; later runs in the same process keep the
        // existing pool.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let ctx = Ctx {
        params: cfg.device_params()?,
        flux: cfg.flux_map()?,
        hash: cfg.hash(),
        cfg,
        seed: cli.seed,
        out: cli.out.clone(),
        shots: cli.shots,
        decoherence: cli.decoherence,
    };
    std::fs::create_dir_all(&ctx.out)?;
    match cli.command {
        Command::Spectroscopy => spectroscopy(&ctx),
        Command::Chevron => chevron(&ctx),
        Command::Coupling => coupling(&ctx),
        Command::RamseyPhase => ramsey_phase(&ctx),
        Command::PhaseScan => phase_scan(&ctx),
        Command::LeakageMap => leakage(&ctx),
        Command::Rb => benchmark(&ctx, Command::Rb),
        Command::Pb => benchmark(&ctx, Command::Pb),
        Command::TuneAdiabatic => tune(&ctx, Command::TuneAdiabatic),
        Command::TuneDiabatic => tune(&ctx, Command::TuneDiabatic),
        Command::Zz => zz(&ctx),
    }
}

fn spectroscopy(ctx: &Ctx) -> Result<()> {
    let grid = ctx.cfg.spectroscopy.coupler_bias.values()?;
    let r = coupler_spectroscopy(&ctx.params, &ctx.flux, &grid)?;
    write_csv(
        ctx.path("spectroscopy.csv"),
        &["V_c (V)", "branch0 (GHz)", "branch1 (GHz)", "branch2 (GHz)"],
        r.points
            .iter()
            .map(|p| [p.v, p.freqs_ghz[0], p.freqs_ghz[1], p.freqs_ghz[2]]),
    )?;
    #[derive(Serialize)]
    struct Out {
        gap_at_q1_ghz: f64,
        gap_at_q2_ghz: f64,
        points: usize,
    }
    write_json(
        ctx.path("spectroscopy.json"),
        &ctx.summary(
            Command::Spectroscopy,
            Out {
                gap_at_q1_ghz: r.gap_at_q1_ghz,
                gap_at_q2_ghz: r.gap_at_q2_ghz,
                points: r.points.len(),
            },
        ),
    )
}

fn chevron_map(ctx: &Ctx) -> Result<crate::experiments::Map2D> {
    let c = &ctx.cfg.chevron;
    iswap_chevron(
        &ctx.params,
        &ctx.flux,
        &c.coupler_bias.values()?,
        &c.tau_values()?,
        units::ghz(c.resonance_ghz),
    )
}

fn chevron(ctx: &Ctx) -> Result<()> {
    let map = chevron_map(ctx)?;
    write_map_csv(ctx.path("chevron.csv"), &map, "P(Q1 excited)")?;
    #[derive(Serialize)]
    struct Out {
        bias_points: usize,
        tau_points: usize,
        resonance_ghz: f64,
    }
    write_json(
        ctx.path("chevron.json"),
        &ctx.summary(
            Command::Chevron,
            Out {
                bias_points: map.x.len(),
                tau_points: map.y.len(),
                resonance_ghz: ctx.cfg.chevron.resonance_ghz,
            },
        ),
    )
}

fn coupling(ctx: &Ctx) -> Result<()> {
    let map = chevron_map(ctx)?;
    let points = coupling_from_chevron(&map)?;
    write_csv(
        ctx.path("coupling.csv"),
        &["V_b (V)", "g (MHz)"],
        points
            .iter()
            .map(|p| [p.v_b, p.g_mhz.unwrap_or(f64::NAN)]),
    )?;
    let resolved: Vec<f64> = points.iter().filter_map(|p| p.g_mhz).collect();
    #[derive(Serialize)]
    struct Out {
        resolved_points: usize,
        unresolved_points: usize,
        g_min_mhz: Option<f64>,
        g_max_mhz: Option<f64>,
    }
    write_json(
        ctx.path("coupling.json"),
        &ctx.summary(
            Command::Coupling,
            Out {
                resolved_points: resolved.len(),
                unresolved_points: points.len() - resolved.len(),
                g_min_mhz: resolved.iter().copied().reduce(f64::min),
                g_max_mhz: resolved.iter().copied().reduce(f64::max),
            },
        ),
    )
}

fn configured_cz(ctx: &Ctx) -> (CzPulse, f64) {
    (
        CzPulse::Adiabatic {
            duration: ctx.cfg.cz.duration_ns,
        },
        ctx.cfg.cz.v_b,
    )
}

fn ramsey_phase(ctx: &Ctx) -> Result<()> {
    let basis = ctx.basis()?;
    let (pulse, v_b) = configured_cz(ctx);
    let sched = pulse.schedule(&ctx.params, &ctx.flux, v_b, None)?;
    let n = ctx.cfg.ramsey.alpha_points.max(5);
    let alphas: Vec<f64> = (0..n)
        .map(|k| units::TWO_PI * k as f64 / (n - 1) as f64)
        .collect();
    let sn = ctx.shot_noise();
    let ground =
        ramsey_conditional_phase(&ctx.params, &ctx.flux, &basis, &sched, &alphas, false, sn)?;
    let excited =
        ramsey_conditional_phase(&ctx.params, &ctx.flux, &basis, &sched, &alphas, true, sn)?;
    let phi_c = ramsey_phi_c(&ctx.params, &ctx.flux, &basis, &sched, &alphas, sn)?;
    write_csv(
        ctx.path("ramsey.csv"),
        &["alpha (rad)", "P_exc (control 0)", "P_exc (control 1)"],
        alphas
            .iter()
            .zip(ground.p_excited.iter().zip(&excited.p_excited))
            .map(|(&a, (&p0, &p1))| [a, p0, p1]),
    )?;
    #[derive(Serialize)]
    struct Out {
        phi_c_rad: f64,
        phase_ground_rad: f64,
        phase_excited_rad: f64,
        contrast: f64,
    }
    write_json(
        ctx.path("ramsey.json"),
        &ctx.summary(
            Command::RamseyPhase,
            Out {
                phi_c_rad: phi_c,
                phase_ground_rad: ground.phase,
                phase_excited_rad: excited.phase,
                contrast: ground.contrast.min(excited.contrast),
            },
        ),
    )
}

fn phase_scan(ctx: &Ctx) -> Result<()> {
    let basis = ctx.basis()?;
    let map = conditional_phase_scan(
        &ctx.params,
        &ctx.flux,
        &basis,
        CzPulse::Adiabatic {
            duration: ctx.cfg.phase_scan.duration_ns,
        },
        &ctx.cfg.phase_scan.coupler_bias.values()?,
        None,
    )?;
    write_csv(
        ctx.path("phase_scan.csv"),
        &["V_b (V)", "phi_c (rad)"],
        map.x.iter().zip(&map.values).map(|(&v, col)| [v, col[0]]),
    )?;
    #[derive(Serialize)]
    struct Out {
        duration_ns: f64,
        points: usize,
    }
    write_json(
        ctx.path("phase_scan.json"),
        &ctx.summary(
            Command::PhaseScan,
            Out {
                duration_ns: ctx.cfg.phase_scan.duration_ns,
                points: map.x.len(),
            },
        ),
    )
}

fn leakage(ctx: &Ctx) -> Result<()> {
    let basis = ctx.basis()?;
    let l = &ctx.cfg.leakage;
    let (ground, noncomp) = leakage_map(
        &ctx.params,
        &ctx.flux,
        &basis,
        CzPulse::Diabatic {
            duration: l.duration_ns,
            rise: l.rise_ns,
        },
        &l.coupler_bias.values()?,
        &l.qubit_bias.values()?,
    )?;
    write_map_csv(ctx.path("leakage_ground.csv"), &ground, "ΔP(Q1 ground)")?;
    write_map_csv(
        ctx.path("leakage_noncomputational.csv"),
        &noncomp,
        "P(non-computational)",
    )?;
    let peak = |m: &crate::experiments::Map2D| {
        m.values
            .iter()
            .flatten()
            .fold(0.0f64, |a, &b| a.max(b))
    };
    #[derive(Serialize)]
    struct Out {
        duration_ns: f64,
        rise_ns: f64,
        peak_ground: f64,
        peak_noncomputational: f64,
    }
    write_json(
        ctx.path("leakage.json"),
        &ctx.summary(
            Command::LeakageMap,
            Out {
                duration_ns: l.duration_ns,
                rise_ns: l.rise_ns,
                peak_ground: peak(&ground),
                peak_noncomputational: peak(&noncomp),
            },
        ),
    )
}

#[derive(Serialize)]
struct DecayOut {
    points: Vec<RbPoint>,
    a: f64,
    p: f64,
    b: f64,
    p_err: f64,
    error_per_clifford: f64,
}

fn benchmark(ctx: &Ctx, which: Command) -> Result<()> {
    // Validate the cheap settings before paying for the CZ channel build.
    if ctx.cfg.rb.samples < 1 {
        return Err(Error::Config("rb.samples must be ≥ 1".into()));
    }
    if ctx.cfg.rb.lengths.is_empty() || ctx.cfg.rb.lengths.iter().any(|&m| m < 1) {
        return Err(Error::Config("rb.lengths must be non-empty, all ≥ 1".into()));
    }
    let basis = ctx.basis()?;
    let group = CliffordGroup::generate();
    let (pulse, v_b) = configured_cz(ctx);
    // A calibration record for the configured working point; tune-adiabatic
    // produces one of these directly.
    let record = CalibrationRecord {
        pulse,
        v_b,
        v_q: None,
        infidelity: f64::NAN,
        phi_c: f64::NAN,
        phi_1: f64::NAN,
        phi_2: f64::NAN,
        leakage: f64::NAN,
        evaluations: 0,
    };
    let backend = LindbladBackend::new(
        &group,
        &ctx.params,
        &ctx.flux,
        &basis,
        &record,
        ctx.decoherence,
    )?;
    let rb_cfg = &ctx.cfg.rb;
    let (file, points, model) = match which {
        Command::Pb => (
            "pb",
            run_pb(
                &group,
                &backend,
                &rb_cfg.lengths,
                rb_cfg.samples,
                ctx.seed,
            )?,
            DecayModel::Purity,
        ),
        _ => {
            let cz = cz_target();
            let interleave = rb_cfg.interleave_cz.then_some(&cz);
            (
                "rb",
                run_rb(
                    &group,
                    &backend,
                    &rb_cfg.lengths,
                    rb_cfg.samples,
                    interleave,
                    ctx.seed,
                )?,
                DecayModel::Fidelity,
            )
        }
    };
    write_csv(
        ctx.path(&format!("{file}.csv")),
        &["m", "mean", "std"],
        points.iter().map(|p| [p.m as f64, p.mean, p.std]),
    )?;
    // Pin the depolarizing asymptote: the device decays are shallow at these
    // sequence lengths and the free three-parameter fit is ill-conditioned.
    let fit = fit_decay_fixed_floor(&points, model, 0.25)?;
    let error_per_clifford = match model {
        DecayModel::Fidelity => error_rates(fit.p, None, None)?.r_ref,
        DecayModel::Purity => error_rates(1.0, None, Some(fit.p))?
            .r_incoherent
            .unwrap_or(f64::NAN),
    };
    write_json(
        ctx.path(&format!("{file}.json")),
        &ctx.summary(
            which,
            DecayOut {
                points,
                a: fit.a,
                p: fit.p,
                b: fit.b,
                p_err: fit.p_err,
                error_per_clifford,
            },
        ),
    )
}

#[derive(Serialize)]
struct TuneOut {
    record: CalibrationRecord,
    best_value: f64,
    evaluations: usize,
}

fn write_trace(ctx: &Ctx, file: &str, nm: &NmResult, names: &[&str]) -> Result<()> {
    let mut header = vec!["evaluation"];
    header.extend_from_slice(names);
    header.push("objective");
    write_csv(
        ctx.path(file),
        &header,
        nm.trace.iter().enumerate().map(|(k, (x, v))| {
            let mut row = vec![k as f64];
            row.extend_from_slice(x);
            row.push(*v);
            row
        }),
    )
}

fn tune(ctx: &Ctx, which: Command) -> Result<()> {
    let basis = ctx.basis()?;
    let t = &ctx.cfg.tuneup;
    let (record, nm, stem, names): (_, _, &str, Vec<&str>) = match which {
        Command::TuneDiabatic => {
            let nm_cfg = NmConfig::new(vec![0.01, 0.01, 2.0], t.max_evals);
            let (record, nm) = tune_diabatic_cz(
                &ctx.params,
                &ctx.flux,
                &basis,
                t.diabatic_rise_ns,
                t.diabatic_max_duration_ns,
                &nm_cfg,
            )?;
            (record, nm, "diabatic", vec!["V_b (V)", "V_q (V)", "duration (ns)"])
        }
        _ => {
            let nm_cfg = NmConfig::new(vec![0.01, 10.0], t.max_evals);
            let (record, nm) = tune_adiabatic_cz(
                &ctx.params,
                &ctx.flux,
                &basis,
                t.adiabatic_scan_duration_ns,
                &nm_cfg,
            )?;
            (record, nm, "adiabatic", vec!["V_b (V)", "duration (ns)"])
        }
    };
    write_trace(ctx, &format!("tune_{stem}_trace.csv"), &nm, &names)?;
    record.save(&ctx.path(&format!("calibration_{stem}.json")))?;
    write_json(
        ctx.path(&format!("tune_{stem}.json")),
        &ctx.summary(
            which,
            TuneOut {
                best_value: nm.value,
                evaluations: nm.evaluations,
                record,
            },
        ),
    )
}

fn zz(ctx: &Ctx) -> Result<()> {
    let zeta = device::compute_zz(&ctx.params, ctx.params.omega_idle)?;
    let zeta_mhz = units::to_mhz(zeta);
    write_csv(ctx.path("zz.csv"), &["zeta (MHz)"], [[zeta_mhz]])?;
    #[derive(Serialize)]
    struct Out {
        zeta_mhz: f64,
        abs_zeta_mhz: f64,
    }
    write_json(
        ctx.path("zz.json"),
        &ctx.summary(
            Command::Zz,
            Out {
                zeta_mhz,
                abs_zeta_mhz: zeta_mhz.abs(),
            },
        ),
    )
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::ConfigParse(_)
        | Error::InvalidDimension(_)
        | Error::DimensionOverflow(_, _) => 2,
        _ => 1,
    }
}

/// Process entry point: parse arguments, run, map errors to exit codes
/// (2 = invalid configuration, 1 = runtime failure).
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version printing; usage errors are
            // configuration errors.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(err) => {
            let diagnostic = serde_json::json!({
                "error": err.to_string(),
                "subcommand": cli.command.name(),
            });
            eprintln!("{diagnostic}");
            exit_code(&err)
        }
    }
}

/// Convenience for tests: run a full invocation from string arguments.
pub fn run_from<S: AsRef<str>>(args: &[S]) -> i32 {
    run(std::iter::once("czsim".to_string())
        .chain(args.iter().map(|s| s.as_ref().to_string())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outdir(tag: &str) -> PathBuf {
        let d = std::env::temp_dir().join(format!("czsim-cli-{tag}-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&d);
        std::fs::create_dir_all(&d).unwrap();
        d
    }

    #[test]
    fn parses_all_subcommands_and_flags() {
        for name in [
            "spectroscopy",
            "chevron",
            "coupling",
            "ramsey-phase",
            "phase-scan",
            "leakage-map",
            "rb",
            "pb",
            "tune-adiabatic",
            "tune-diabatic",
            "zz",
        ] {
            let cli = Cli::try_parse_from([
                "czsim",
                name,
                "--seed",
                "7",
                "--out",
                "/tmp/x",
                "--shots",
                "2000",
                "--decoherence",
                "on",
                "--threads",
                "1",
            ])
            .unwrap();
            assert_eq!(cli.command.name(), name);
            assert_eq!(cli.seed, 7);
            assert_eq!(cli.shots, Shots::Count(2000));
            assert!(cli.decoherence);
        }
        assert!(Cli::try_parse_from(["czsim", "zz", "--shots", "-3"]).is_err());
        assert!(Cli::try_parse_from(["czsim", "zz", "--decoherence", "maybe"]).is_err());
        assert!(Cli::try_parse_from(["czsim", "unknown-command"]).is_err());
    }

    #[test]
    fn zz_reports_small_residual_coupling() {
        let out = outdir("zz");
        let code = run_from(&["zz", "--out", out.to_str().unwrap()]);
        assert_eq!(code, 0);
        let summary: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("zz.json")).unwrap()).unwrap();
        // Idle-point residual ZZ below 0.5 MHz.
        let zeta = summary["result"]["abs_zeta_mhz"].as_f64().unwrap();
        assert!(zeta < 0.5, "|ζ|/2π = {zeta} MHz");
        assert!(out.join("zz.csv").exists());
        assert!(summary["config_hash"].as_str().unwrap().len() == 64);
    }

    #[test]
    fn invalid_config_exits_two() {
        let out = outdir("badcfg");
        let cfg = out.join("bad.toml");
        std::fs::write(&cfg, "[device]\nnot_a_key = 1\n").unwrap();
        let code = run_from(&[
            "zz",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 2);
        // rb with samples = 0 is a validation error, also exit 2.
        let cfg2 = out.join("zero.toml");
        std::fs::write(&cfg2, "[rb]\nsamples = 0\nlengths = [1,2,3]\ninterleave_cz = false\n")
            .unwrap();
        let code = run_from(&[
            "rb",
            "--config",
            cfg2.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 2);
    }

    #[test]
    fn spectroscopy_is_byte_reproducible() {
        let (a, b) = (outdir("spec-a"), outdir("spec-b"));
        let cfg = a.join("cfg.toml");
        std::fs::write(
            &cfg,
            "[spectroscopy.coupler_bias]\nstart = 0.0\nstop = 0.3\npoints = 9\n",
        )
        .unwrap();
        for dir in [&a, &b] {
            let code = run_from(&[
                "spectroscopy",
                "--config",
                cfg.to_str().unwrap(),
                "--seed",
                "5",
                "--out",
                dir.to_str().unwrap(),
            ]);
            assert_eq!(code, 0);
        }
        for f in ["spectroscopy.csv", "spectroscopy.json"] {
            assert_eq!(
                std::fs::read(a.join(f)).unwrap(),
                std::fs::read(b.join(f)).unwrap(),
                "{f} differs between identical runs"
            );
        }
    }
}
