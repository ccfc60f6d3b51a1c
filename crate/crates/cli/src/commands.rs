//! Subcommands. Each returns its output files in memory; the binary writes
//! them from a single place after everything has been computed.

use serde_json::{json, Value};

use nlbeat_core::bell::violation_scan;
use nlbeat_core::correlation::{correlation_scan, multiply_traces, Sampling};
use nlbeat_core::noise::{sample_phase_trace, PhaseProcess};
use nlbeat_core::qkd::{pack_bits, run_session, SessionConfig};
use nlbeat_core::{
    quantum_correlation, AnalyzerSetting, BellPreparation, TwoPhotonState,
};

use crate::config::{
    bench_config, phase_model, BellArgs, OutputFormat, QkdArgs, QuantumArgs, RunConfig,
    ScanArgs, TraceArgs,
};
use crate::error::CliError;
use crate::grid::parse_angles;
use crate::output::{csv_document, json_document, Provenance};

/// One output file.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    fn new(name: impl Into<String>, contents: String) -> Self {
        Artifact {
            name: name.into(),
            contents,
        }
    }
}

pub fn execute(config: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    config.validate()?;
    let provenance = Provenance::of(config);
    match config {
        RunConfig::Trace(a) => cmd_trace(a, &provenance),
        RunConfig::Scan(a) => cmd_scan(a, &provenance),
        RunConfig::Bell(a) => cmd_bell(a, &provenance),
        RunConfig::Quantum(a) => cmd_quantum(a, &provenance),
        RunConfig::Qkd(a) => cmd_qkd(a, &provenance),
    }
}

fn deg(d: f64) -> AnalyzerSetting {
    AnalyzerSetting::from_degrees(d)
}

fn num(x: f64) -> String {
    x.to_string()
}

fn table(
    provenance: &Provenance,
    format: OutputFormat,
    stem: &str,
    header: &[&str],
    rows: Vec<Vec<f64>>,
    extra: Value,
) -> Result<Artifact, CliError> {
    match format {
        OutputFormat::Csv => {
            let text = csv_document(
                provenance,
                header,
                rows.into_iter().map(|r| r.into_iter().map(num).collect()),
            )?;
            Ok(Artifact::new(format!("{stem}.csv"), text))
        }
        OutputFormat::Json => {
            let mut body = json!({ "columns": header, "rows": rows });
            if let (Value::Object(b), Value::Object(e)) = (&mut body, extra) {
                b.extend(e);
            }
            Ok(Artifact::new(format!("{stem}.json"), json_document(provenance, body)))
        }
    }
}

pub fn cmd_trace(args: &TraceArgs, provenance: &Provenance) -> Result<Vec<Artifact>, CliError> {
    let model = phase_model(args.noise, args.dwell, args.diffusion_rate)?;
    let bench = bench_config(args.signal_amplitude, args.noise_amplitude)?;
    let prep: BellPreparation = args.prep.into();
    let phases = sample_phase_trace(PhaseProcess::new(model, args.seed), args.n)?;
    let (d1, d2) = nlbeat_core::simulate_beat_traces(
        prep,
        deg(args.theta1),
        deg(args.theta2),
        &phases,
        &bench,
    )?;
    let product = multiply_traces(&d1, &d2)?;
    let rows = (0..args.n)
        .map(|k| {
            vec![
                k as f64,
                phases.samples()[k],
                d1.samples[k],
                d2.samples[k],
                product.samples[k],
            ]
        })
        .collect();
    let artifact = table(
        provenance,
        args.format,
        "trace",
        &["k", "phi", "d1", "d2", "product"],
        rows,
        json!({ "preparation": prep.name(), "theta1_deg": args.theta1, "theta2_deg": args.theta2 }),
    )?;
    Ok(vec![artifact])
}

pub fn cmd_scan(args: &ScanArgs, provenance: &Provenance) -> Result<Vec<Artifact>, CliError> {
    let model = phase_model(args.noise, args.dwell, args.diffusion_rate)?;
    let bench = bench_config(args.signal_amplitude, args.noise_amplitude)?;
    let grid_deg = parse_angles(&args.theta2_grid)?;
    let grid: Vec<_> = grid_deg.iter().copied().map(deg).collect();
    let sampling = Sampling::new(args.n, args.seed).with_model(model);
    let scan = correlation_scan(args.prep.into(), deg(args.theta1), &grid, &bench, &sampling)?;
    let rows = grid_deg
        .iter()
        .zip(&scan.points)
        .map(|(&t2, p)| vec![t2, p.value(), p.std_error(), p.estimate.n_samples as f64])
        .collect();
    let artifact = table(
        provenance,
        args.format,
        "scan",
        &["theta2_deg", "corr_normalized", "std_error", "n_samples"],
        rows,
        json!({ "theta1_deg": args.theta1, "calibration": scan.calibration }),
    )?;
    Ok(vec![artifact])
}

pub fn cmd_bell(args: &BellArgs, provenance: &Provenance) -> Result<Vec<Artifact>, CliError> {
    let model = phase_model(args.noise, args.dwell, args.diffusion_rate)?;
    let bench = bench_config(args.signal_amplitude, args.noise_amplitude)?;
    let c_deg = parse_angles(&args.c_grid)?;
    let grid: Vec<_> = c_deg.iter().copied().map(deg).collect();
    let sampling = Sampling::new(args.n, args.seed).with_model(model);
    let result = violation_scan(args.prep.into(), deg(args.a), deg(args.b), &grid, &bench, &sampling)?;
    let best = result.max_index();
    let summary = json!({
        "max_F": result.max_f,
        "max_F_err": result.f_errors[best],
        "argmax_c": c_deg[best],
        "a_deg": args.a,
        "b_deg": args.b,
        "C_ab": result.c_ab.value(),
        "C_ab_err": result.c_ab.std_error(),
        "calibration": result.calibration,
        "error_model": "statistical only; F_err adds C(a,b), C(a,c), C(b,c) errors in quadrature and the C(a,b) term is shared by every point",
    });
    let rows: Vec<Vec<f64>> = c_deg
        .iter()
        .zip(result.f_values.iter().zip(&result.f_errors))
        .map(|(&c, (&f, &e))| vec![c, f, e])
        .collect();
    let header = ["c_deg", "F", "F_err"];
    match args.format {
        OutputFormat::Csv => Ok(vec![
            table(provenance, OutputFormat::Csv, "bell", &header, rows, Value::Null)?,
            Artifact::new("bell_summary.json", json_document(provenance, summary)),
        ]),
        OutputFormat::Json => Ok(vec![table(
            provenance,
            OutputFormat::Json,
            "bell",
            &header,
            rows,
            json!({ "summary": summary }),
        )?]),
    }
}

pub fn cmd_quantum(args: &QuantumArgs, provenance: &Provenance) -> Result<Vec<Artifact>, CliError> {
    let state = TwoPhotonState::bell(args.state.into());
    let rows = parse_angles(&args.theta2_grid)?
        .into_iter()
        .map(|t2| Ok(vec![t2, quantum_correlation(&state, deg(args.theta1), deg(t2))?]))
        .collect::<Result<Vec<_>, CliError>>()?;
    let artifact = table(
        provenance,
        args.format,
        "quantum",
        &["theta2_deg", "c_quantum"],
        rows,
        json!({ "theta1_deg": args.theta1 }),
    )?;
    Ok(vec![artifact])
}

pub fn cmd_qkd(args: &QkdArgs, provenance: &Provenance) -> Result<Vec<Artifact>, CliError> {
    let alice_deg = parse_angles(&args.alice_angles)?;
    let bob_deg = parse_angles(&args.bob_angles)?;
    let bell_deg = parse_angles(&args.bell_angles)?;
    let config = SessionConfig {
        n_rounds: args.rounds,
        alice_angles: alice_deg.iter().copied().map(deg).collect(),
        bob_angles: bob_deg.iter().copied().map(deg).collect(),
        samples_per_round: args.samples_per_round,
        preparation: args.prep.into(),
        seed: args.seed,
        channel_decorrelation: args.decorrelation,
        threshold: args.epsilon,
        bell_angles: [deg(bell_deg[0]), deg(bell_deg[1]), deg(bell_deg[2])],
        calibration_samples: args.calibration_samples,
        ..SessionConfig::default()
    };
    let t = run_session(&config)?;

    // Report angles in the user's own degree values.
    let label = |angles: &[f64], setting: AnalyzerSetting| {
        angles
            .iter()
            .copied()
            .find(|&d| deg(d) == setting)
            .unwrap_or_else(|| setting.degrees())
    };
    let rounds: Vec<Value> = t
        .rounds
        .iter()
        .map(|r| {
            json!({
                "round": r.round,
                "alice_deg": label(&alice_deg, r.alice_basis),
                "bob_deg": label(&bob_deg, r.bob_basis),
                "alice_sample": r.alice_sample,
                "bob_sample": r.bob_sample,
                "alice_outcome": r.alice_outcome,
                "bob_outcome": r.bob_outcome,
                "usage": r.usage,
            })
        })
        .collect();
    let bell = t.bell_check.as_ref().map(|b| {
        json!({
            "a_deg": bell_deg[0],
            "b_deg": bell_deg[1],
            "c_deg": bell_deg[2],
            "F": b.max_f,
            "F_err": b.f_errors[0],
            "C_ab": b.c_ab.value(),
            "C_ac": b.c_ac[0].value(),
            "C_bc": b.c_bc[0].value(),
            "rounds_ab": b.c_ab.estimate.n_samples,
            "rounds_ac": b.c_ac[0].estimate.n_samples,
            "rounds_bc": b.c_bc[0].estimate.n_samples,
        })
    });
    let body = json!({
        "summary": {
            "rounds": args.rounds,
            "sifted_bits": t.sifted_len(),
            "erasures": t.erasures,
            "qber": t.qber,
            "bell_check": bell,
            "calibration": t.calibration,
        },
        "keys": {
            "bits": t.sifted_len(),
            "alice_hex": hex::encode(pack_bits(&t.alice_key)),
            "bob_hex": hex::encode(pack_bits(&t.bob_key)),
        },
        "rounds": rounds,
    });
    Ok(vec![Artifact::new("transcript.json", json_document(provenance, body))])
}
