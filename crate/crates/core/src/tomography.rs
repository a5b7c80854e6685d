//! Simulated process tomography of a single-qubit, trace-non-increasing map.
//!
//! Six Pauli eigenstates are sent through the map and the output is measured
//! in the X, Y and Z bases. Each setting has three outcomes: `+1`, `−1`, or no
//! coincidence (the map failed to herald). The loss outcome is what lets a
//! reconstruction estimate the success probability `Tr χ`.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::channels::{ProcessMap, ProcessMatrix};
use crate::error::{Error, Result};
use crate::qmath::{
    eig_hermitian4, tensor, Complex2Matrix, Complex2Vector, Complex4Matrix, C64, I, ONE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Probe {
    Zero,
    One,
    Plus,
    Minus,
    PlusI,
    MinusI,
}

impl Probe {
    pub const ALL: [Probe; 6] = [
        Probe::Zero,
        Probe::One,
        Probe::Plus,
        Probe::Minus,
        Probe::PlusI,
        Probe::MinusI,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Probe::Zero => "0",
            Probe::One => "1",
            Probe::Plus => "+",
            Probe::Minus => "-",
            Probe::PlusI => "+i",
            Probe::MinusI => "-i",
        }
    }

    pub fn state(&self) -> Complex2Vector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (a, b) = match self {
            Probe::Zero => (ONE, C64::from(0.0)),
            Probe::One => (C64::from(0.0), ONE),
            Probe::Plus => (ONE, ONE),
            Probe::Minus => (ONE, -ONE),
            Probe::PlusI => (ONE, I),
            Probe::MinusI => (ONE, -I),
        };
        let s = if matches!(self, Probe::Zero | Probe::One) { 1.0 } else { h };
        Complex2Vector::new(a * s, b * s)
    }

    pub fn density(&self) -> Complex2Matrix {
        let v = self.state();
        v.outer(&v)
    }
}

impl fmt::Display for Probe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Probe {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Probe::ALL
            .into_iter()
            .find(|p| p.label() == s)
            .ok_or_else(|| Error::Parse(format!("unknown probe {s:?}")))
    }
}

/// The probe states used in an experiment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeSet(pub Vec<Probe>);

impl ProbeSet {
    /// Eigenstates of X, Y and Z.
    pub fn pauli_six() -> Self {
        Self(Probe::ALL.to_vec())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::X, Basis::Y, Basis::Z];

    fn pauli(&self) -> Complex2Matrix {
        match self {
            Basis::X => Complex2Matrix::pauli_x(),
            Basis::Y => Complex2Matrix::pauli_y(),
            Basis::Z => Complex2Matrix::pauli_z(),
        }
    }

    /// `(I ± σ)/2`.
    pub fn projector(&self, outcome: Outcome) -> Complex2Matrix {
        let sign = match outcome {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
            Outcome::NoCoincidence => return Complex2Matrix::zero(),
        };
        (Complex2Matrix::identity() + self.pauli().scale(sign.into())).scale(0.5.into())
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Basis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "X" => Ok(Basis::X),
            "Y" => Ok(Basis::Y),
            "Z" => Ok(Basis::Z),
            _ => Err(Error::Parse(format!("unknown basis {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Plus,
    Minus,
    NoCoincidence,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::Plus, Outcome::Minus, Outcome::NoCoincidence];

    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Plus => "+1",
            Outcome::Minus => "-1",
            Outcome::NoCoincidence => "none",
        }
    }

    fn index(&self) -> usize {
        match self {
            Outcome::Plus => 0,
            Outcome::Minus => 1,
            Outcome::NoCoincidence => 2,
        }
    }
}

impl FromStr for Outcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Outcome::ALL
            .into_iter()
            .find(|o| o.label() == s)
            .ok_or_else(|| Error::Parse(format!("unknown outcome {s:?}")))
    }
}

/// Outcome probabilities `[+1, −1, none]` of one (probe, basis) setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SettingProbabilities {
    pub probe: Probe,
    pub basis: Basis,
    pub probs: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTable {
    pub rows: Vec<SettingProbabilities>,
}

/// `P(o) = Tr(Π_o L(ρ))` for coincidences and `1 − Tr L(ρ)` for loss.
pub fn exact_probabilities(map: &ProcessMap, probes: &ProbeSet, bases: &[Basis]) -> ProbabilityTable {
    let mut rows = Vec::with_capacity(probes.0.len() * bases.len());
    for &probe in &probes.0 {
        let out = map.apply_unchecked(&probe.density());
        for &basis in bases {
            let plus = (basis.projector(Outcome::Plus) * out).trace().re.clamp(0.0, 1.0);
            let minus = (basis.projector(Outcome::Minus) * out).trace().re.clamp(0.0, 1.0);
            let loss = (1.0 - plus - minus).clamp(0.0, 1.0);
            rows.push(SettingProbabilities {
                probe,
                basis,
                probs: [plus, minus, loss],
            });
        }
    }
    ProbabilityTable { rows }
}

/// Counts `[+1, −1, none]` of one setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SettingCounts {
    pub probe: Probe,
    pub basis: Basis,
    pub counts: [u64; 3],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountsTable {
    pub rows: Vec<SettingCounts>,
    pub shots_per_setting: u64,
    /// `None` when loaded from a file.
    pub seed: Option<u64>,
}

/// Draws a multinomial sample per setting. Setting `i` uses stream `i` of a
/// ChaCha generator seeded with `seed`, so tables are reproducible and
/// independent of evaluation order.
pub fn sample_counts(probabilities: &ProbabilityTable, shots: u64, seed: u64) -> Result<CountsTable> {
    if shots == 0 {
        return Err(Error::out_of_range("shots", 0.0, "[1, inf)"));
    }
    let rows = probabilities
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut remaining = shots;
            let mut mass = 1.0;
            let mut counts = [0u64; 3];
            for k in 0..2 {
                let p = row.probs[k].clamp(0.0, 1.0);
                let conditional = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
                let n = Binomial::new(remaining, conditional)
                    .map_err(|e| Error::Parse(e.to_string()))?
                    .sample(&mut rng);
                counts[k] = n;
                remaining -= n;
                mass -= p;
            }
            counts[2] = remaining;
            Ok(SettingCounts {
                probe: row.probe,
                basis: row.basis,
                counts,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CountsTable {
        rows,
        shots_per_setting: shots,
        seed: Some(seed),
    })
}

impl CountsTable {
    /// CSV with header `probe,basis,outcome,count`, one row per outcome.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["probe", "basis", "outcome", "count"])?;
        for row in &self.rows {
            for o in Outcome::ALL {
                w.write_record([
                    row.probe.label(),
                    &row.basis.to_string(),
                    o.label(),
                    &row.counts[o.index()].to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["probe", "basis", "outcome", "count"] {
            return Err(Error::Parse("expected header probe,basis,outcome,count".into()));
        }
        let mut rows: Vec<SettingCounts> = Vec::new();
        for record in r.records() {
            let record = record?;
            let probe: Probe = record[0].parse()?;
            let basis: Basis = record[1].parse()?;
            let outcome: Outcome = record[2].parse()?;
            let count: u64 = record[3]
                .parse()
                .map_err(|_| Error::Parse(format!("bad count {:?}", &record[3])))?;
            let idx = match rows.iter().position(|s| s.probe == probe && s.basis == basis) {
                Some(i) => i,
                None => {
                    rows.push(SettingCounts {
                        probe,
                        basis,
                        counts: [0; 3],
                    });
                    rows.len() - 1
                }
            };
            rows[idx].counts[outcome.index()] += count;
        }
        let shots = rows.first().map_or(0, |s| s.counts.iter().sum());
        if rows.iter().any(|s| s.counts.iter().sum::<u64>() != shots) {
            return Err(Error::Parse("settings have different shot totals".into()));
        }
        Ok(Self {
            rows,
            shots_per_setting: shots,
            seed: None,
        })
    }
}

/// How the no-coincidence outcome is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Detection {
    /// Loss counts are recorded; `Tr χ̂` estimates the success probability.
    #[default]
    LossAware,
    /// Only coincidences are kept; `χ̂` is normalized to unit trace.
    PostSelected,
}

/// Per-setting outcome weights ready for reconstruction: counts, or exact
/// probabilities for infinite statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Observations {
    pub settings: Vec<(Probe, Basis, [f64; 3])>,
    pub detection: Detection,
}

impl Observations {
    pub fn from_counts(counts: &CountsTable, detection: Detection) -> Self {
        Self {
            settings: counts
                .rows
                .iter()
                .map(|r| (r.probe, r.basis, r.counts.map(|c| c as f64)))
                .collect(),
            detection,
        }
    }

    pub fn from_probabilities(table: &ProbabilityTable, detection: Detection) -> Self {
        Self {
            settings: table.rows.iter().map(|r| (r.probe, r.basis, r.probs)).collect(),
            detection,
        }
    }

    /// Relative frequencies of `+1` and `−1` (conditional on a coincidence
    /// in post-selected mode) and the coincidence fraction.
    fn frequencies(&self, weights: &[f64; 3]) -> ([f64; 2], f64) {
        let total: f64 = weights.iter().sum();
        let coinc = weights[0] + weights[1];
        let frac = if total > 0.0 { coinc / total } else { 0.0 };
        let norm = match self.detection {
            Detection::LossAware => total,
            Detection::PostSelected => coinc,
        };
        if norm > 0.0 {
            ([weights[0] / norm, weights[1] / norm], frac)
        } else {
            ([0.0, 0.0], frac)
        }
    }

    /// Mean coincidence fraction; equals `Tr χ` because the six probes
    /// average to `I/2`.
    pub fn estimated_success(&self) -> f64 {
        if self.settings.is_empty() {
            return 0.0;
        }
        let sum: f64 = self.settings.iter().map(|(_, _, w)| self.frequencies(w).1).sum();
        sum / self.settings.len() as f64
    }

    fn target_trace(&self) -> f64 {
        match self.detection {
            Detection::LossAware => self.estimated_success(),
            Detection::PostSelected => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Linear,
    Mle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Least-squares residual of the linear model (linear inversion) or the
    /// last log-likelihood change (MLE).
    pub residual: f64,
    pub iterations: usize,
    pub log_likelihood: f64,
    /// `false` flags non-convergence; the estimate is still returned.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionResult {
    pub chi_hat: ProcessMatrix,
    pub method: Method,
    pub diagnostics: Diagnostics,
}

/// `E = 2 ρᵀ ⊗ Π`, so that `Tr(E χ) = Tr(Π L(ρ))`.
fn effect(probe: Probe, basis: Basis, outcome: Outcome) -> Complex4Matrix {
    tensor(&probe.density().transpose(), &basis.projector(outcome)).scale_real(2.0)
}

/// Orthonormal Hermitian operator basis `σ_a ⊗ σ_b / 2`.
fn operator_basis() -> [Complex4Matrix; 16] {
    let paulis = [
        Complex2Matrix::identity(),
        Complex2Matrix::pauli_x(),
        Complex2Matrix::pauli_y(),
        Complex2Matrix::pauli_z(),
    ];
    std::array::from_fn(|m| tensor(&paulis[m / 4], &paulis[m % 4]).scale_real(0.5))
}

fn hs_real(a: &Complex4Matrix, b: &Complex4Matrix) -> f64 {
    let mut acc = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            acc += (a.0[i][j] * b.0[j][i]).re;
        }
    }
    acc
}

/// Solves the symmetric positive system `a x = b` by Gaussian elimination
/// with partial pivoting; `None` when a pivot vanishes.
fn solve_normal_equations(mut a: [[f64; 16]; 16], mut b: [f64; 16]) -> Option<[f64; 16]> {
    let scale = (0..16).map(|i| a[i][i].abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    for col in 0..16 {
        let piv = (col..16).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-10 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in (col + 1)..16 {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..16 {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = [0.0; 16];
    for row in (0..16).rev() {
        let s: f64 = ((row + 1)..16).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Clips negative eigenvalues and rescales to `trace`.
fn project_psd(chi: &Complex4Matrix, trace: f64) -> Result<Complex4Matrix> {
    let eig = eig_hermitian4(&chi.hermitize())?;
    let clipped = eig.map_spectrum(|x| x.max(0.0));
    let tr = clipped.trace().re;
    if tr > 0.0 {
        Ok(clipped.scale_real(trace / tr).hermitize())
    } else {
        Ok(clipped)
    }
}

/// Linear inversion, then eigenvalue clipping and rescaling of the trace.
pub fn reconstruct_linear(obs: &Observations) -> Result<ReconstructionResult> {
    let basis = operator_basis();
    let mut ata = [[0.0; 16]; 16];
    let mut atb = [0.0; 16];
    let mut rows: Vec<([f64; 16], f64)> = Vec::with_capacity(2 * obs.settings.len());
    for (probe, b, weights) in &obs.settings {
        let (freq, _) = obs.frequencies(weights);
        for (k, outcome) in [Outcome::Plus, Outcome::Minus].into_iter().enumerate() {
            let e = effect(*probe, *b, outcome);
            let row: [f64; 16] = std::array::from_fn(|m| hs_real(&e, &basis[m]));
            rows.push((row, freq[k]));
        }
    }
    for (row, f) in &rows {
        for i in 0..16 {
            atb[i] += row[i] * f;
            for j in 0..16 {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    let x = solve_normal_equations(ata, atb).ok_or(Error::SingularDesign)?;
    let residual = rows
        .iter()
        .map(|(row, f)| {
            let model: f64 = row.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
            (model - f).powi(2)
        })
        .sum::<f64>()
        .sqrt();

    let raw = basis
        .iter()
        .zip(x.iter())
        .fold(Complex4Matrix::zero(), |acc, (b, c)| acc + b.scale_real(*c));
    let chi = project_psd(&raw, obs.target_trace())?;
    let log_likelihood = log_likelihood(obs, &chi);
    Ok(ReconstructionResult {
        chi_hat: ProcessMatrix::from_hermitian(chi),
        method: Method::Linear,
        diagnostics: Diagnostics {
            residual,
            iterations: 0,
            log_likelihood,
            converged: true,
        },
    })
}

fn branch_probs(chi: &Complex4Matrix, probe: Probe, basis: Basis) -> [f64; 2] {
    [Outcome::Plus, Outcome::Minus].map(|o| hs_real(&effect(probe, basis, o), chi))
}

fn xlogy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if y > 0.0 {
        x * y.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// Multinomial log-likelihood of `obs` under `chi` (up to a constant).
/// Infeasible models (`Tr L(ρ) > 1` on a probe in loss-aware mode) give −∞.
pub fn log_likelihood(obs: &Observations, chi: &Complex4Matrix) -> f64 {
    let mut total = 0.0;
    for (probe, basis, w) in &obs.settings {
        let [qp, qm] = branch_probs(chi, *probe, *basis);
        let coinc = qp + qm;
        total += match obs.detection {
            Detection::LossAware => {
                if coinc > 1.0 + 1e-12 {
                    return f64::NEG_INFINITY;
                }
                xlogy(w[0], qp) + xlogy(w[1], qm) + xlogy(w[2], 1.0 - coinc)
            }
            Detection::PostSelected => {
                xlogy(w[0], qp) + xlogy(w[1], qm) - xlogy(w[0] + w[1], coinc)
            }
        };
        if !total.is_finite() {
            return f64::NEG_INFINITY;
        }
    }
    total
}

/// Gradient `R` of the log-likelihood with respect to `χ`.
fn likelihood_gradient(obs: &Observations, chi: &Complex4Matrix) -> Complex4Matrix {
    let mut r = Complex4Matrix::zero();
    for (probe, basis, w) in &obs.settings {
        let ep = effect(*probe, *basis, Outcome::Plus);
        let em = effect(*probe, *basis, Outcome::Minus);
        let [qp, qm] = branch_probs(chi, *probe, *basis);
        let ratio = |w: f64, q: f64| if w == 0.0 { 0.0 } else { w / q };
        r = r + ep.scale_real(ratio(w[0], qp)) + em.scale_real(ratio(w[1], qm));
        let common = match obs.detection {
            Detection::LossAware => ratio(w[2], 1.0 - qp - qm),
            Detection::PostSelected => ratio(w[0] + w[1], qp + qm),
        };
        r = r - (ep + em).scale_real(common);
    }
    r
}

fn normalize_for(obs: &Observations, chi: Complex4Matrix) -> Complex4Matrix {
    match obs.detection {
        Detection::LossAware => chi,
        Detection::PostSelected => {
            let tr = chi.trace().re;
            chi.scale_real(1.0 / tr)
        }
    }
}

fn coordinates(chi: &Complex4Matrix, basis: &[Complex4Matrix; 16]) -> [f64; 16] {
    std::array::from_fn(|m| hs_real(chi, &basis[m]))
}

/// Damped Newton step on the log-likelihood in operator-basis coordinates.
/// Returns `None` unless some damped step stays positive semidefinite and
/// does not lower the likelihood.
fn newton_step(obs: &Observations, chi: &Complex4Matrix, logl: f64) -> Option<(Complex4Matrix, f64)> {
    let basis = operator_basis();
    let x = coordinates(chi, &basis);
    let mut grad = [0.0; 16];
    let mut neg_hess = [[0.0; 16]; 16];
    let mut add = |w: f64, a: &[f64; 16], q: f64, sign: f64| {
        if w == 0.0 {
            return;
        }
        for i in 0..16 {
            grad[i] += sign * w * a[i] / q;
            for j in 0..16 {
                neg_hess[i][j] += sign * w * a[i] * a[j] / (q * q);
            }
        }
    };
    for (probe, b, w) in &obs.settings {
        let ap = coordinates(&effect(*probe, *b, Outcome::Plus), &basis);
        let am = coordinates(&effect(*probe, *b, Outcome::Minus), &basis);
        let qp = ap.iter().zip(&x).map(|(a, x)| a * x).sum::<f64>();
        let qm = am.iter().zip(&x).map(|(a, x)| a * x).sum::<f64>();
        let sum: [f64; 16] = std::array::from_fn(|i| ap[i] + am[i]);
        add(w[0], &ap, qp, 1.0);
        add(w[1], &am, qm, 1.0);
        match obs.detection {
            Detection::LossAware => add(w[2], &sum.map(|v| -v), 1.0 - qp - qm, 1.0),
            Detection::PostSelected => add(w[0] + w[1], &sum, qp + qm, -1.0),
        }
    }
    if obs.detection == Detection::PostSelected {
        // the likelihood is flat along χ itself; pin the trace
        let t: [f64; 16] = std::array::from_fn(|m| basis[m].trace().re);
        for i in 0..16 {
            for j in 0..16 {
                neg_hess[i][j] += t[i] * t[j];
            }
        }
    }
    if !grad.iter().all(|g| g.is_finite()) {
        return None;
    }
    let d = solve_normal_equations(neg_hess, grad)?;
    if d.iter().zip(&grad).map(|(d, g)| d * g).sum::<f64>() <= 0.0 {
        return None;
    }
    let mut t = 1.0;
    for _ in 0..8 {
        let raw = basis
            .iter()
            .enumerate()
            .fold(Complex4Matrix::zero(), |acc, (m, b)| acc + b.scale_real(x[m] + t * d[m]));
        let psd = eig_hermitian4(&raw).map(|e| e.values[3] >= 0.0).unwrap_or(false);
        if psd {
            let candidate = normalize_for(obs, raw);
            let l = log_likelihood(obs, &candidate);
            if l >= logl {
                return Some((candidate, l));
            }
        }
        t *= 0.5;
    }
    None
}

/// Maximum-likelihood estimate. Each iteration tries a damped Newton step
/// and otherwise falls back to a diluted `RχR` step,
/// `χ ← (I + εR)χ(I + εR)` with `R` the normalized likelihood gradient.
/// Either step is accepted only if it keeps `χ` positive semidefinite and
/// does not lower the likelihood, so the log-likelihood sequence is monotone. Stops when the gain falls below
/// `tol` or after `max_iter` iterations; in the latter case the result is
/// flagged as not converged.
pub fn reconstruct_mle(obs: &Observations, max_iter: usize, tol: f64) -> Result<ReconstructionResult> {
    let mut trace_log = Vec::new();
    reconstruct_mle_traced(obs, max_iter, tol, &mut trace_log)
}

/// As [`reconstruct_mle`], additionally recording the log-likelihood after
/// every accepted step.
pub fn reconstruct_mle_traced(
    obs: &Observations,
    max_iter: usize,
    tol: f64,
    history: &mut Vec<f64>,
) -> Result<ReconstructionResult> {
    let target = obs.target_trace();
    let start_trace = match obs.detection {
        // strictly inside the feasible set so every outcome has support
        Detection::LossAware => target.clamp(1e-6, 1.0 - 1e-6),
        Detection::PostSelected => 1.0,
    };
    let mut chi = Complex4Matrix::identity().scale_real(start_trace / 4.0);
    let weight: f64 = obs.settings.iter().map(|(_, _, w)| w.iter().sum::<f64>()).sum();
    let mut logl = log_likelihood(obs, &chi);
    history.push(logl);

    let mut eps = 1.0;
    let mut last_gain = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let mut accepted = newton_step(obs, &chi, logl);
        if accepted.is_none() {
            let grad = likelihood_gradient(obs, &chi).scale_real(1.0 / weight.max(f64::MIN_POSITIVE));
            let mut step = eps;
            while step > 1e-14 {
                let m = Complex4Matrix::identity() + grad.scale_real(step);
                let candidate = normalize_for(obs, (m * chi * m.adjoint()).hermitize());
                let l = log_likelihood(obs, &candidate);
                if l >= logl {
                    accepted = Some((candidate, l));
                    eps = (step * 2.0).min(1e6);
                    break;
                }
                step *= 0.5;
            }
        }
        let Some((candidate, l)) = accepted else {
            // no ascent direction left at machine precision
            last_gain = 0.0;
            converged = true;
            break;
        };
        last_gain = l - logl;
        chi = candidate;
        logl = l;
        history.push(logl);
        if last_gain.abs() < tol {
            converged = true;
            break;
        }
    }

    Ok(ReconstructionResult {
        chi_hat: ProcessMatrix::from_hermitian(chi),
        method: Method::Mle,
        diagnostics: Diagnostics {
            residual: if last_gain.is_finite() { last_gain } else { f64::NAN },
            iterations,
            log_likelihood: logl,
            converged,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    /// Uhlmann fidelity (squared convention) of the unit-trace matrices.
    pub fidelity: f64,
    /// `½‖A − B‖₁` of the unit-trace matrices.
    pub trace_distance: f64,
}

fn psd_sqrt(m: &Complex4Matrix) -> Result<Complex4Matrix> {
    Ok(eig_hermitian4(&m.hermitize())?.map_spectrum(|x| x.max(0.0).sqrt()))
}

pub fn compare(chi_hat: &ProcessMatrix, chi_true: &ProcessMatrix) -> Result<Comparison> {
    let a = chi_hat.normalized()?;
    let b = chi_true.normalized()?;
    let sa = psd_sqrt(&a)?;
    let inner = psd_sqrt(&(sa * b * sa))?;
    let fidelity = inner.trace().re.powi(2).clamp(0.0, 1.0);
    let diff = eig_hermitian4(&(a - b).hermitize())?;
    let trace_distance = (0.5 * diff.values.iter().map(|x| x.abs()).sum::<f64>()).clamp(0.0, 1.0);
    Ok(Comparison {
        fidelity,
        trace_distance,
    })
}

/// Trace distance between unnormalized process matrices, `½‖A − B‖₁`.
pub fn trace_distance_raw(a: &ProcessMatrix, b: &ProcessMatrix) -> Result<f64> {
    let diff = eig_hermitian4(&(a.chi - b.chi).hermitize())?;
    Ok(0.5 * diff.values.iter().map(|x| x.abs()).sum::<f64>())
}
