use std::f64::consts::TAU;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use mss_core::magic::{c_closed_form, wigner_distance, MixtureEntry};
use mss_core::protocol::{
    self, BroadcastMessage, CorrectionConvention, CorrectionRecord, Outcome, OutcomeMode, PartyRole,
};
use mss_core::qcore::{BlochVector, DensityMatrix, PureState, Unitary1Q, C64};
use mss_core::stabilizer::stabilizer_set;
use mss_core::steering;
use mss_core::tomo::{self, NoiseModel};
use mss_core::MssError;

use crate::args::*;
use crate::output::Output;

#[derive(Debug)]
pub enum CliError {
    /// Bad input from the user; exit code 2.
    Usage(String),
    /// A computed result broke a guaranteed property; exit code 1.
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Invariant(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "error: {msg}"),
            CliError::Invariant(msg) => write!(f, "invariant violated: {msg}"),
        }
    }
}

impl From<MssError> for CliError {
    fn from(e: MssError) -> Self {
        match e {
            MssError::InvalidArgument(_)
            | MssError::MalformedBitstring(_)
            | MssError::UnsupportedQubits(_)
            | MssError::NonUnitary(_)
            | MssError::MissingSetting(_)
            | MssError::ImpossibleBranch(_)
            | MssError::EmptySample(_) => CliError::Usage(e.to_string()),
            other => CliError::Invariant(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Invariant(format!("serialisation failed: {e}"))
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

struct Ctx {
    format: Option<Format>,
    degrees: bool,
}

impl Ctx {
    fn angle(&self, x: f64) -> f64 {
        if self.degrees {
            x.to_radians()
        } else {
            x
        }
    }

    fn emit(&self, out: &Output, default: Format, path: Option<&Path>) -> CliResult<()> {
        let text = out.render(self.format.unwrap_or(default));
        match path {
            Some(p) => write_file(p, &text),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

fn parse_floats(flag: &str, s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| usage(format!("{flag}: {t:?} is not a number"))))
        .collect()
}

fn parse_noise(s: &str) -> CliResult<NoiseModel> {
    match parse_floats("--noise", s)?.as_slice() {
        &[p1, p2, r] => NoiseModel::symmetric(p1, p2, r).map_err(|e| usage(format!("--noise: {e}"))),
        _ => Err(usage("--noise expects three values p1,p2,readout")),
    }
}

fn parse_grid(ctx: &Ctx, s: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts.as_slice() else { return Err(usage("--grid expects start:stop:steps")) };
    let start = ctx.angle(a.parse().map_err(|_| usage(format!("--grid: bad start {a:?}")))?);
    let stop = ctx.angle(b.parse().map_err(|_| usage(format!("--grid: bad stop {b:?}")))?);
    let steps: usize = n.parse().map_err(|_| usage(format!("--grid: bad step count {n:?}")))?;
    if steps == 0 || !start.is_finite() || !stop.is_finite() {
        return Err(usage("--grid needs finite endpoints and at least one step"));
    }
    if steps == 1 {
        return Ok(vec![start]);
    }
    Ok((0..steps).map(|i| start + (stop - start) * i as f64 / (steps - 1) as f64).collect())
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    let ctx = Ctx { format: cli.format, degrees: cli.degrees };
    match &cli.command {
        Command::Run(a) | Command::Protocol(ProtocolCommand::Run(a)) => run(&ctx, a),
        Command::Scan(a) | Command::Protocol(ProtocolCommand::Scan(a)) => scan(&ctx, a),
        Command::GateCheck(a) | Command::Protocol(ProtocolCommand::GateCheck(a)) => gate_check(&ctx, a),
        Command::MagicEval(a) | Command::Magic(MagicCommand::Eval(a)) => magic_eval(&ctx, a),
        Command::Certify(a) => certify(&ctx, a),
        Command::Experiment(a) => experiment(&ctx, a),
        Command::DumpStabilizers(a) => dump_stabilizers(&ctx, a),
    }
}

#[derive(Serialize)]
struct PartyView {
    party: usize,
    role: PartyRole,
    c_value: f64,
    trace_distance_to_i2: f64,
}

#[derive(Serialize)]
struct SecurityView {
    parties: Vec<PartyView>,
    max_intermediate_trace_distance: f64,
    secure: bool,
}

#[derive(Serialize)]
struct RunReport {
    phi: f64,
    n_parties: usize,
    convention: CorrectionConvention,
    outcomes: String,
    branch_probability: f64,
    messages: Vec<BroadcastMessage>,
    corrections: Vec<CorrectionRecord>,
    final_bloch: BlochVector,
    final_state: DensityMatrix,
    fidelity: f64,
    c_value: f64,
    c_theory: f64,
    security: SecurityView,
}

fn run(ctx: &Ctx, a: &RunArgs) -> CliResult<()> {
    let phi = ctx.angle(a.phi);
    let n = a.n;
    let mode = match (&a.outcomes, a.seed) {
        (Some(s), _) => OutcomeMode::Forced(Outcome::parse_list(s)?),
        (None, Some(seed)) => OutcomeMode::Seeded(seed),
        (None, None) => OutcomeMode::Forced(vec![Outcome::Plus; n.saturating_sub(1)]),
    };
    let convention = match a.convention {
        Convention::Every => CorrectionConvention::EveryBroadcast,
        Convention::Last => CorrectionConvention::LastIntermediateOnly,
    };
    let t = protocol::run_with_gate(&Unitary1Q::phase(phi), phi, n, &mode, convention)?;
    let report = protocol::security_report(&t)?;
    let fidelity = t.final_state.fidelity(&PureState::phase_plus(phi))?;
    let c_value = wigner_distance(&t.final_state)?.c_value;
    let c_theory = c_closed_form(phi);

    if (c_value - c_theory).abs() > 1e-7 {
        return Err(CliError::Invariant(format!("recipient magic {c_value} differs from closed form {c_theory}")));
    }
    if convention == CorrectionConvention::EveryBroadcast && fidelity < 1.0 - 1e-9 {
        return Err(CliError::Invariant(format!("faithfulness: fidelity {fidelity} below 1")));
    }
    if !report.secure(1e-9) {
        return Err(CliError::Invariant("security: a non-recipient marginal differs from I/2".into()));
    }

    let security = SecurityView {
        secure: true,
        max_intermediate_trace_distance: report.max_intermediate_trace_distance,
        parties: report
            .parties
            .iter()
            .map(|p| PartyView {
                party: p.party,
                role: p.role,
                c_value: p.c_value,
                trace_distance_to_i2: p.trace_distance_to_i2,
            })
            .collect(),
    };
    let out = RunReport {
        phi,
        n_parties: n,
        convention,
        outcomes: t.outcomes().iter().map(|o| o.symbol()).collect(),
        branch_probability: t.branch_probability,
        messages: t.messages.clone(),
        corrections: t.corrections.clone(),
        final_bloch: t.final_bloch,
        final_state: t.final_state.clone(),
        fidelity,
        c_value,
        c_theory,
        security,
    };
    ctx.emit(&Output::record(&out)?, Format::Json, a.out.as_deref())
}

fn scan(ctx: &Ctx, a: &ScanArgs) -> CliResult<()> {
    let grid = parse_grid(ctx, &a.grid)?;
    let rows = protocol::magic_scan(&grid, a.n)?;
    if let Some(bad) = rows.iter().find(|r| (r.c_theory - r.c_protocol).abs() > 1e-7) {
        return Err(CliError::Invariant(format!(
            "C_protocol {} differs from C_theory {} at φ = {}",
            bad.c_protocol, bad.c_theory, bad.phi
        )));
    }
    ctx.emit(&Output::table(&rows)?, Format::Csv, a.out.as_deref())
}

#[derive(Serialize)]
struct GateCheckReport {
    source: String,
    unitary: bool,
    gate: [[f64; 2]; 4],
    col0_sum_abs: f64,
    col1_sum_abs: f64,
    column_sum_condition: bool,
    secure: bool,
    faithful: bool,
    probes: Vec<protocol::GateProbe>,
}

fn gate_check(ctx: &Ctx, a: &GateCheckArgs) -> CliResult<()> {
    let probes = match &a.probes {
        Some(s) => parse_floats("--probes", s)?.into_iter().map(|x| ctx.angle(x)).collect(),
        None => (1..=16).map(|k| TAU * k as f64 / 17.0).collect::<Vec<f64>>(),
    };
    let report = match (&a.matrix, a.family) {
        (Some(m), _) => {
            let v = parse_floats("--matrix", m)?;
            if v.len() != 8 {
                return Err(usage(format!("--matrix expects 8 reals, got {}", v.len())));
            }
            let z = |i: usize| C64::new(v[2 * i], v[2 * i + 1]);
            let m = [[z(0), z(1)], [z(2), z(3)]];
            let (c0, c1) = protocol::column_sums(&m);
            let condition = protocol::column_sum_condition(&m);
            match Unitary1Q::with_tolerance(m, 1e-10) {
                Ok(gate) => {
                    let g = protocol::check_gate_admissibility(|_| gate, &probes)?;
                    GateCheckReport {
                        source: "matrix".into(),
                        unitary: true,
                        gate: g.gate,
                        col0_sum_abs: g.col0_sum_abs,
                        col1_sum_abs: g.col1_sum_abs,
                        column_sum_condition: condition,
                        secure: g.secure,
                        faithful: g.faithful,
                        probes: g.probes,
                    }
                }
                Err(MssError::NonUnitary(_)) => GateCheckReport {
                    source: "matrix".into(),
                    unitary: false,
                    gate: [[v[0], v[1]], [v[2], v[3]], [v[4], v[5]], [v[6], v[7]]],
                    col0_sum_abs: c0,
                    col1_sum_abs: c1,
                    column_sum_condition: condition,
                    secure: condition,
                    faithful: false,
                    probes: vec![],
                },
                Err(e) => return Err(e.into()),
            }
        }
        (None, Some(family)) => {
            let f: fn(f64) -> Unitary1Q = match family {
                Family::Phase => Unitary1Q::phase,
                Family::XRotation => |phi| Unitary1Q::exp_ix(phi / 2.0),
            };
            let g = protocol::check_gate_admissibility(f, &probes)?;
            let condition = g.secure;
            GateCheckReport {
                source: match family {
                    Family::Phase => "phase".into(),
                    Family::XRotation => "x-rotation".into(),
                },
                unitary: true,
                gate: g.gate,
                col0_sum_abs: g.col0_sum_abs,
                col1_sum_abs: g.col1_sum_abs,
                column_sum_condition: condition,
                secure: g.secure,
                faithful: g.faithful,
                probes: g.probes,
            }
        }
        (None, None) => return Err(usage("gate-check needs --matrix or --family")),
    };
    ctx.emit(&Output::record(&report)?, Format::Json, a.out.as_deref())
}

#[derive(Serialize)]
struct MagicEvalReport {
    state: String,
    n_qubits: usize,
    c: f64,
    f_lhs: f64,
    witness_trace: f64,
    mixture: Vec<MixtureEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c_closed_form: Option<f64>,
}

fn named(state: NamedState) -> CliResult<(String, DensityMatrix)> {
    let pure = |amps: Vec<C64>, n| PureState::normalized(n, amps).map(|p| p.to_density());
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let rho = match state {
        NamedState::Zero => pure(vec![one, zero], 1)?,
        NamedState::One => pure(vec![zero, one], 1)?,
        NamedState::Plus => pure(vec![one, one], 1)?,
        NamedState::Minus => pure(vec![one, -one], 1)?,
        NamedState::PlusI => pure(vec![one, i], 1)?,
        NamedState::MinusI => pure(vec![one, -i], 1)?,
        NamedState::T => PureState::phase_plus(std::f64::consts::FRAC_PI_4).to_density(),
        NamedState::Mixed => DensityMatrix::maximally_mixed(1),
        NamedState::Bell => PureState::ghz_with_phase(2, 0.0)?.to_density(),
    };
    let label = format!("{state:?}").to_lowercase();
    Ok((label, rho))
}

fn magic_eval(ctx: &Ctx, a: &MagicEvalArgs) -> CliResult<()> {
    let (label, rho, closed) = match (a.phi, &a.bloch, a.state) {
        (Some(phi), _, _) => {
            let phi = ctx.angle(phi);
            if a.two_qubit {
                (format!("ghz2({phi})"), PureState::ghz_with_phase(2, phi)?.to_density(), None)
            } else {
                (format!("phase_plus({phi})"), PureState::phase_plus(phi).to_density(), Some(c_closed_form(phi)))
            }
        }
        (None, Some(b), _) => match parse_floats("--bloch", b)?.as_slice() {
            &[x, y, z] => {
                let bv = BlochVector::new(x, y, z).map_err(|e| usage(format!("--bloch: {e}")))?;
                (format!("bloch({x},{y},{z})"), DensityMatrix::from_bloch(&bv), None)
            }
            _ => return Err(usage("--bloch expects x,y,z")),
        },
        (None, None, Some(s)) => {
            let (l, r) = named(s)?;
            (l, r, None)
        }
        (None, None, None) => return Err(usage("magic-eval needs --phi, --bloch or --state")),
    };
    let result = wigner_distance(&rho)?;
    let summary = result.summary(&rho)?;
    if (summary.witness_trace - summary.f_lhs - summary.c).abs() > 1e-7 {
        return Err(CliError::Invariant("dual witness is not tight at the evaluated state".into()));
    }
    let report = MagicEvalReport {
        state: label,
        n_qubits: rho.n_qubits(),
        c: summary.c,
        f_lhs: summary.f_lhs,
        witness_trace: summary.witness_trace,
        mixture: summary.mixture,
        c_closed_form: closed,
    };
    ctx.emit(&Output::record(&report)?, Format::Json, a.out.as_deref())
}

#[derive(Serialize)]
struct CertifyReport {
    phi: f64,
    f: f64,
    f_lhs: f64,
    gap: f64,
    certified_c: f64,
    phi_hidden: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    shots: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

fn certify(ctx: &Ctx, a: &CertifyArgs) -> CliResult<()> {
    let phi = ctx.angle(a.phi);
    let (record, sigma_gap) = match (a.shots, a.seed) {
        (Some(shots), Some(seed)) => {
            let noise = parse_noise(&a.noise)?;
            let s = steering::certify_sampled(phi, shots, &noise, seed, a.n_boot)?;
            (s.record, Some(s.sigma_gap))
        }
        (Some(_), None) => return Err(usage("--shots requires --seed")),
        (None, _) => {
            let r = steering::certify(phi)?;
            if (r.gap - c_closed_form(phi)).abs() > 1e-7 {
                return Err(CliError::Invariant(format!("steering gap {} differs from C(φ)", r.gap)));
            }
            (r, None)
        }
    };
    let report = CertifyReport {
        phi,
        f: record.f_value,
        f_lhs: record.f_lhs,
        gap: record.gap,
        certified_c: record.certified_c,
        phi_hidden: record.phi_hidden,
        sigma_gap,
        shots: a.shots,
        seed: a.shots.and(a.seed),
    };
    ctx.emit(&Output::record(&report)?, Format::Json, a.out.as_deref())
}

fn experiment(ctx: &Ctx, a: &ExperimentArgs) -> CliResult<()> {
    let phis: Vec<f64> = parse_floats("--phis", &a.phis)?.into_iter().map(|x| ctx.angle(x)).collect();
    let noise = parse_noise(&a.noise)?;
    let report = tomo::experiment_table(&phis, a.shots, &noise, a.seed, a.n_boot)?;
    let table = Output::table(&report.rows)?;
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir).map_err(|e| usage(format!("cannot create {}: {e}", dir.display())))?;
        write_file(&dir.join("table.csv"), &table.render(Format::Csv))?;
        write_file(&dir.join("detail.json"), &Output::record(&report)?.render(Format::Json))?;
        let plot = Output::table(&tomo::plot_data(&report))?;
        write_file(&dir.join("plot.csv"), &plot.render(Format::Csv))?;
    }
    ctx.emit(&table, Format::Csv, None)
}

fn dump_stabilizers(ctx: &Ctx, a: &DumpArgs) -> CliResult<()> {
    let set = stabilizer_set(a.qubits)?;
    let mut rows = Vec::with_capacity(set.len());
    for ((label, state), w) in set.labels().iter().zip(set.states()).zip(set.wigner_vertices()) {
        let mut row = Map::new();
        row.insert("label".into(), Value::String(label.clone()));
        if a.qubits == 1 {
            let b = state.to_density().bloch()?;
            row.insert("bloch_x".into(), b.x.into());
            row.insert("bloch_y".into(), b.y.into());
            row.insert("bloch_z".into(), b.z.into());
        } else {
            for (i, amp) in state.amplitudes().iter().enumerate() {
                row.insert(format!("amp{i}_re"), amp.re.into());
                row.insert(format!("amp{i}_im"), amp.im.into());
            }
        }
        for (i, v) in w.values().iter().enumerate() {
            row.insert(format!("w{i}"), (*v).into());
        }
        rows.push(row);
    }
    ctx.emit(&Output::Table(rows), Format::Csv, a.out.as_deref())
}
