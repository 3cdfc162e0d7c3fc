//! Shot-sampled (2,3) experiment: noisy circuit simulation, counts,
//! post-selection, linear-inversion tomography and parametric bootstrap.
//!
//! Qubit 0 is Alice (dealer), 1 is Bob, 2 is Charlie. Count strings use the
//! LSb-0 layout `"c2c1c0"`, so the rightmost character is Alice's bit.
//!
//! Randomness comes from ChaCha8 seeded with the user seed; every independent
//! task (one circuit, one bootstrap replica) gets its own ChaCha stream whose
//! id is a SplitMix64 hash of `(φ bits, target, basis, replica)`.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{MssError, Result};
use crate::magic::{c_closed_form, wigner_distance};
use crate::qcore::{Basis, BlochVector, DensityMatrix, PureState, Unitary1Q};

pub const DISTILLATION_THRESHOLD: f64 = 0.856;
pub const DEFAULT_SHOTS: u64 = 4096;
pub const DEFAULT_BOOTSTRAP: usize = 2000;
pub const MIN_BOOTSTRAP: usize = 100;
pub const PLOT_POINTS: usize = 200;

const ALICE: usize = 0;
const BOB: usize = 1;
const CHARLIE: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseModel {
    pub p1: f64,
    pub p2: f64,
    /// `readout[measured][actual]`; each column sums to 1.
    pub readout: [[f64; 2]; 2],
}

impl NoiseModel {
    pub fn ideal() -> Self {
        Self { p1: 0.0, p2: 0.0, readout: [[1.0, 0.0], [0.0, 1.0]] }
    }

    /// Depolarizing `p1`, `p2` and a symmetric bit-flip readout error `r`.
    pub fn symmetric(p1: f64, p2: f64, r: f64) -> Result<Self> {
        let m = Self { p1, p2, readout: [[1.0 - r, r], [r, 1.0 - r]] };
        m.validate()?;
        Ok(m)
    }

    pub fn new(p1: f64, p2: f64, readout: [[f64; 2]; 2]) -> Result<Self> {
        let m = Self { p1, p2, readout };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let flips = [self.readout[1][0], self.readout[0][1]];
        for (name, p) in [("p1", self.p1), ("p2", self.p2), ("readout", flips[0]), ("readout", flips[1])] {
            if !(0.0..=0.5).contains(&p) {
                return Err(MssError::InvalidArgument(format!("{name} probability {p} outside [0, 0.5]")));
            }
        }
        for col in 0..2 {
            let s = self.readout[0][col] + self.readout[1][col];
            if (s - 1.0).abs() > 1e-12 || self.readout[0][col] < 0.0 || self.readout[1][col] < 0.0 {
                return Err(MssError::InvalidArgument(format!("confusion column {col} is not stochastic")));
            }
        }
        Ok(())
    }

    pub fn is_ideal(&self) -> bool {
        *self == Self::ideal()
    }
}

/// Which party's qubit is reconstructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TomoTarget {
    Bob,
    Charlie,
}

impl TomoTarget {
    fn qubit(self) -> usize {
        match self {
            TomoTarget::Bob => BOB,
            TomoTarget::Charlie => CHARLIE,
        }
    }
}

/// One circuit: which party is measured in which basis, and Alice's setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CircuitSpec {
    pub target: TomoTarget,
    pub basis: Basis,
    /// Alice's measurement basis, X in the protocol and X or Y for steering.
    pub alice_setting: Basis,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountsTable {
    pub basis_label: Basis,
    pub target: TomoTarget,
    pub alice_setting: Basis,
    pub counts: BTreeMap<String, u64>,
    pub shots: u64,
}

/// Post-selected, corrected single-qubit counts in one basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MarginalCounts {
    pub basis: Basis,
    pub n0: u64,
    pub n1: u64,
}

impl MarginalCounts {
    pub fn n_eff(&self) -> u64 {
        self.n0 + self.n1
    }

    pub fn expectation(&self) -> Result<f64> {
        let n = self.n_eff();
        if n == 0 {
            return Err(MssError::EmptySample(format!("no post-selected shots in the {} basis", self.basis)));
        }
        Ok((self.n0 as f64 - self.n1 as f64) / n as f64)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReconstructionResult {
    pub rho: DensityMatrix,
    pub bloch_raw: BlochVector,
    pub bloch: BlochVector,
    /// Smallest post-selected sample over the three bases.
    pub n_eff: u64,
    pub n_eff_per_basis: [u64; 3],
    pub c_value: f64,
    pub fidelity: Option<f64>,
    pub sigma_c: f64,
    pub sigma_f: f64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream id for a task, hashed from its coordinates.
pub fn stream_id(parts: &[u64]) -> u64 {
    parts.iter().fold(0x6d73_735f_746f_6d6f, |h, &p| splitmix64(h ^ p))
}

fn basis_tag(b: Basis) -> u64 {
    match b {
        Basis::X => 1,
        Basis::Y => 2,
        Basis::Z => 3,
    }
}

fn target_tag(t: TomoTarget) -> u64 {
    match t {
        TomoTarget::Bob => 1,
        TomoTarget::Charlie => 2,
    }
}

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

struct NoisyRegister {
    rho: DensityMatrix,
    noise: NoiseModel,
}

impl NoisyRegister {
    fn gate(&mut self, g: &Unitary1Q, q: usize) -> Result<()> {
        self.rho = self.rho.apply_1q(g, q)?.depolarize_1q(q, self.noise.p1)?;
        Ok(())
    }

    fn cx(&mut self, c: usize, t: usize) -> Result<()> {
        self.rho = self.rho.apply_cx(c, t)?.depolarize_2q(c, t, self.noise.p2)?;
        Ok(())
    }
}

/// Outcome distribution of the circuit over big-endian indices, readout error included.
pub fn circuit_distribution(phi: f64, spec: CircuitSpec, noise: &NoiseModel) -> Result<Vec<f64>> {
    noise.validate()?;
    let mut reg = NoisyRegister { rho: PureState::zero(3)?.to_density(), noise: *noise };
    reg.gate(&Unitary1Q::hadamard(), ALICE)?;
    reg.cx(ALICE, BOB)?;
    reg.cx(ALICE, CHARLIE)?;
    reg.gate(&Unitary1Q::phase(phi), ALICE)?;
    for g in spec.alice_setting.rotation() {
        reg.gate(&g, ALICE)?;
    }
    match spec.target {
        TomoTarget::Charlie => reg.gate(&Unitary1Q::hadamard(), BOB)?,
        TomoTarget::Bob => {}
    }
    for g in spec.basis.rotation() {
        reg.gate(&g, spec.target.qubit())?;
    }
    let mut probs = reg.rho.diagonal_probabilities();
    for q in 0..3 {
        let bit = 2 - q;
        let mut next = vec![0.0; probs.len()];
        for (i, &p) in probs.iter().enumerate() {
            let actual = (i >> bit) & 1;
            for measured in 0..2 {
                let j = (i & !(1 << bit)) | (measured << bit);
                next[j] += noise.readout[measured][actual] * p;
            }
        }
        probs = next;
    }
    let total: f64 = probs.iter().sum();
    Ok(probs.into_iter().map(|p| p / total).collect())
}

/// LSb-0 string `"c2c1c0"` for a big-endian index.
pub fn lsb0_string(index: usize) -> String {
    (0..3).rev().map(|q| if (index >> (2 - q)) & 1 == 1 { '1' } else { '0' }).collect()
}

/// Multinomial draw by sequential conditional binomials.
fn multinomial(rng: &mut ChaCha8Rng, shots: u64, probs: &[f64]) -> Result<Vec<u64>> {
    let mut remaining = shots;
    let mut mass = 1.0;
    let mut out = Vec::with_capacity(probs.len());
    for (i, &p) in probs.iter().enumerate() {
        let k = if i + 1 == probs.len() || remaining == 0 {
            remaining
        } else if mass <= 0.0 {
            0
        } else {
            let q = (p / mass).clamp(0.0, 1.0);
            Binomial::new(remaining, q).map_err(|e| MssError::InvalidArgument(e.to_string()))?.sample(rng)
        };
        out.push(k);
        remaining -= k;
        mass -= p;
    }
    Ok(out)
}

pub fn sample_circuit(phi: f64, spec: CircuitSpec, shots: u64, noise: &NoiseModel, seed: u64) -> Result<CountsTable> {
    if shots == 0 {
        return Err(MssError::InvalidArgument("shots must be at least 1".into()));
    }
    let probs = circuit_distribution(phi, spec, noise)?;
    let stream = stream_id(&[
        phi.to_bits(),
        target_tag(spec.target),
        basis_tag(spec.basis),
        basis_tag(spec.alice_setting),
        u64::MAX,
    ]);
    let mut rng = rng_for(seed, stream);
    let draws = multinomial(&mut rng, shots, &probs)?;
    let counts = draws
        .iter()
        .enumerate()
        .filter(|(_, &k)| k > 0)
        .map(|(i, &k)| (lsb0_string(i), k))
        .collect();
    Ok(CountsTable { basis_label: spec.basis, target: spec.target, alice_setting: spec.alice_setting, counts, shots })
}

/// Charlie tomography circuit in `basis` with the protocol's Alice X setting.
pub fn sample_run(phi: f64, basis: Basis, shots: u64, noise: &NoiseModel, seed: u64) -> Result<CountsTable> {
    sample_circuit(phi, CircuitSpec { target: TomoTarget::Charlie, basis, alice_setting: Basis::X }, shots, noise, seed)
}

fn parse_bits(s: &str) -> Result<[u8; 3]> {
    let b = s.as_bytes();
    if b.len() != 3 || b.iter().any(|c| *c != b'0' && *c != b'1') {
        return Err(MssError::MalformedBitstring(s.to_string()));
    }
    // LSb-0: position 0 of the string is qubit 2.
    Ok([b[2] - b'0', b[1] - b'0', b[0] - b'0'])
}

/// Keeps Alice-`+` shots and returns the target's corrected marginal.
///
/// For Charlie, Bob's bit `m_B` stands for a `Z^{m_B}` correction. Pushed
/// through the measurement rotation it becomes a bit flip in the X and Y
/// bases and nothing in Z. Bob's own marginal needs no correction.
pub fn post_select_and_correct(counts: &CountsTable) -> Result<MarginalCounts> {
    post_select_on(counts, 0)
}

/// As [`post_select_and_correct`], keeping shots where Alice reported `alice_bit`.
pub fn post_select_on(counts: &CountsTable, alice_bit: u8) -> Result<MarginalCounts> {
    let mut m = MarginalCounts { basis: counts.basis_label, n0: 0, n1: 0 };
    let mut total = 0;
    for (s, &k) in &counts.counts {
        let bits = parse_bits(s)?;
        total += k;
        if bits[ALICE] != alice_bit {
            continue;
        }
        let bit = match counts.target {
            TomoTarget::Charlie if counts.basis_label != Basis::Z => bits[CHARLIE] ^ bits[BOB],
            TomoTarget::Charlie => bits[CHARLIE],
            TomoTarget::Bob => bits[BOB],
        };
        if bit == 0 {
            m.n0 += k;
        } else {
            m.n1 += k;
        }
    }
    if total != counts.shots {
        return Err(MssError::InvalidArgument(format!("counts sum to {total}, table says {}", counts.shots)));
    }
    Ok(m)
}

fn check_bases(x: &MarginalCounts, y: &MarginalCounts, z: &MarginalCounts) -> Result<()> {
    for (m, b) in [(x, Basis::X), (y, Basis::Y), (z, Basis::Z)] {
        if m.basis != b {
            return Err(MssError::MissingSetting(format!("expected {b} counts, got {}", m.basis)));
        }
    }
    Ok(())
}

/// State from (possibly unphysical) Bloch components, projected radially onto the unit ball.
pub fn reconstruct_from_bloch(raw: BlochVector, phi: Option<f64>) -> Result<ReconstructionResult> {
    let norm = raw.norm();
    let bloch = if norm > 1.0 {
        BlochVector { x: raw.x / norm, y: raw.y / norm, z: raw.z / norm }
    } else {
        raw
    };
    let rho = DensityMatrix::from_bloch(&bloch);
    let c_value = wigner_distance(&rho)?.c_value;
    let fidelity = phi.map(|p| rho.fidelity(&PureState::phase_plus(p))).transpose()?;
    Ok(ReconstructionResult {
        rho,
        bloch_raw: raw,
        bloch,
        n_eff: 0,
        n_eff_per_basis: [0; 3],
        c_value,
        fidelity,
        sigma_c: 0.0,
        sigma_f: 0.0,
    })
}

/// Linear-inversion tomography. Fidelity is scored against P(φ)|+⟩ when `phi` is given.
pub fn reconstruct(
    x: &MarginalCounts,
    y: &MarginalCounts,
    z: &MarginalCounts,
    phi: Option<f64>,
) -> Result<ReconstructionResult> {
    check_bases(x, y, z)?;
    let raw = BlochVector { x: x.expectation()?, y: y.expectation()?, z: z.expectation()? };
    let mut r = reconstruct_from_bloch(raw, phi)?;
    r.n_eff_per_basis = [x.n_eff(), y.n_eff(), z.n_eff()];
    r.n_eff = *r.n_eff_per_basis.iter().min().expect("three bases");
    Ok(r)
}

fn sample_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if values.len() < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

pub fn resample(rng: &mut ChaCha8Rng, m: &MarginalCounts) -> Result<MarginalCounts> {
    let n = m.n_eff();
    let p = m.n0 as f64 / n as f64;
    let n0 = Binomial::new(n, p).map_err(|e| MssError::InvalidArgument(e.to_string()))?.sample(rng);
    Ok(MarginalCounts { basis: m.basis, n0, n1: n - n0 })
}

/// Runs `stat` on `n_boot` parametric resamples of the three marginals, one RNG stream per replica.
pub fn bootstrap_replicas<T, F>(
    marginals: &[MarginalCounts; 3],
    n_boot: usize,
    seed: u64,
    tag: u64,
    stat: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&[MarginalCounts; 3]) -> Result<T> + Sync,
{
    if n_boot < MIN_BOOTSTRAP {
        return Err(MssError::InvalidArgument(format!("n_boot {n_boot} is below {MIN_BOOTSTRAP}")));
    }
    for m in marginals {
        m.expectation()?;
    }
    (0..n_boot)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_for(seed, stream_id(&[tag, r as u64]));
            let sample = [
                resample(&mut rng, &marginals[0])?,
                resample(&mut rng, &marginals[1])?,
                resample(&mut rng, &marginals[2])?,
            ];
            stat(&sample)
        })
        .collect()
}

/// Parametric bootstrap of (σ_C, σ_F). σ_F is 0 when `phi` is `None`.
pub fn bootstrap(marginals: &[MarginalCounts; 3], phi: Option<f64>, n_boot: usize, seed: u64) -> Result<(f64, f64)> {
    let tag = stream_id(&[phi.map_or(u64::MAX - 1, f64::to_bits), basis_tag(Basis::X), 0xb007]);
    let reps = bootstrap_replicas(marginals, n_boot, seed, tag, |m| {
        let r = reconstruct(&m[0], &m[1], &m[2], phi)?;
        Ok((r.c_value, r.fidelity.unwrap_or(0.0)))
    })?;
    let cs: Vec<f64> = reps.iter().map(|r| r.0).collect();
    let fs: Vec<f64> = reps.iter().map(|r| r.1).collect();
    Ok((sample_std(&cs), sample_std(&fs)))
}

#[derive(Debug, Clone, Serialize)]
pub struct TargetDetail {
    pub counts: Vec<CountsTable>,
    pub marginals: [MarginalCounts; 3],
    pub result: ReconstructionResult,
}

/// Three-basis tomography of one party, post-selected on Alice `+`.
pub fn tomography(
    phi: f64,
    target: TomoTarget,
    alice_setting: Basis,
    shots: u64,
    noise: &NoiseModel,
    seed: u64,
) -> Result<TargetDetail> {
    let counts = Basis::ALL
        .iter()
        .map(|&basis| sample_circuit(phi, CircuitSpec { target, basis, alice_setting }, shots, noise, seed))
        .collect::<Result<Vec<_>>>()?;
    let m = counts.iter().map(post_select_and_correct).collect::<Result<Vec<_>>>()?;
    let marginals = [m[0], m[1], m[2]];
    let score = (target == TomoTarget::Charlie && alice_setting == Basis::X).then_some(phi);
    let result = reconstruct(&marginals[0], &marginals[1], &marginals[2], score)?;
    Ok(TargetDetail { counts, marginals, result })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub phi: f64,
    pub c_th: f64,
    pub c_charlie: f64,
    pub sigma_c: f64,
    pub fidelity: f64,
    pub sigma_f: f64,
    pub c_bob: f64,
    pub above_distillation_threshold: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhiDetail {
    pub phi: f64,
    pub charlie: TargetDetail,
    pub bob: TargetDetail,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub shots: u64,
    pub n_boot: usize,
    pub seed: u64,
    pub noise: NoiseModel,
    pub distillation_threshold: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub rows: Vec<ExperimentRow>,
    pub details: Vec<PhiDetail>,
}

/// One row per φ, computed in parallel; row order follows `phis`.
pub fn experiment_table(phis: &[f64], shots: u64, noise: &NoiseModel, seed: u64, n_boot: usize) -> Result<ExperimentReport> {
    if phis.is_empty() {
        return Err(MssError::InvalidArgument("empty φ list".into()));
    }
    noise.validate()?;
    let per_phi = phis
        .par_iter()
        .map(|&phi| {
            let mut charlie = tomography(phi, TomoTarget::Charlie, Basis::X, shots, noise, seed)?;
            let bob = tomography(phi, TomoTarget::Bob, Basis::X, shots, noise, seed)?;
            let (sigma_c, sigma_f) = bootstrap(&charlie.marginals, Some(phi), n_boot, seed)?;
            charlie.result.sigma_c = sigma_c;
            charlie.result.sigma_f = sigma_f;
            let fidelity = charlie.result.fidelity.unwrap_or(0.0);
            let row = ExperimentRow {
                phi,
                c_th: c_closed_form(phi),
                c_charlie: charlie.result.c_value,
                sigma_c,
                fidelity,
                sigma_f,
                c_bob: bob.result.c_value,
                above_distillation_threshold: fidelity > DISTILLATION_THRESHOLD,
            };
            Ok((row, PhiDetail { phi, charlie, bob }))
        })
        .collect::<Result<Vec<_>>>()?;
    let (rows, details) = per_phi.into_iter().unzip();
    Ok(ExperimentReport {
        config: ExperimentConfig { shots, n_boot, seed, noise: *noise, distillation_threshold: DISTILLATION_THRESHOLD },
        rows,
        details,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlotRow {
    pub series: &'static str,
    pub phi: f64,
    pub c: f64,
    pub sigma: f64,
}

/// Theory curve on `PLOT_POINTS` angles spanning [0, 2π], then measured points with error bars.
pub fn plot_data(report: &ExperimentReport) -> Vec<PlotRow> {
    let tau = std::f64::consts::TAU;
    let theory = (0..PLOT_POINTS).map(|i| {
        let phi = tau * i as f64 / (PLOT_POINTS - 1) as f64;
        PlotRow { series: "theory", phi, c: c_closed_form(phi), sigma: 0.0 }
    });
    let measured = report
        .rows
        .iter()
        .map(|r| PlotRow { series: "measured", phi: r.phi, c: r.c_charlie, sigma: r.sigma_c });
    theory.chain(measured).collect()
}
