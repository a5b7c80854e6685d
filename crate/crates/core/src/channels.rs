//! Single-qubit maps for the three operating modes of the transfer protocol
//! and their process (Choi) matrices.
//!
//! Process matrices are kept unnormalized: `Tr χ` is the input-averaged
//! success probability. Normalize only for display or fidelity.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::protocol::{
    feed_forward_plan, measurement_operator, synthesize_filter, conditional_states, Coupling,
    PureQubit,
};
use crate::qmath::{
    eig_hermitian4, svd2, Complex2Matrix, Complex4Matrix, Complex4Vector, HermitianEigen, C64,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterSetting {
    Off,
    /// The filter synthesized for the `+` outcome, applied to both outcomes.
    FixedPlus,
}

/// Operating mode: which of the filter and feed-forward stages are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Scenario {
    filter: FilterSetting,
    feed_forward: bool,
}

impl Scenario {
    /// No filter, no feed-forward; every coincidence is accepted.
    pub const BARE: Scenario = Scenario {
        filter: FilterSetting::Off,
        feed_forward: false,
    };
    /// Fixed `+` filter, no feed-forward.
    pub const FILTER_ONLY: Scenario = Scenario {
        filter: FilterSetting::FixedPlus,
        feed_forward: false,
    };
    /// Fixed filter followed by the outcome-conditioned correction.
    pub const FULL: Scenario = Scenario {
        filter: FilterSetting::FixedPlus,
        feed_forward: true,
    };

    pub const ALL: [Scenario; 3] = [Self::BARE, Self::FILTER_ONLY, Self::FULL];

    pub fn new(filter: FilterSetting, feed_forward: bool) -> Result<Self> {
        if feed_forward && filter == FilterSetting::Off {
            return Err(Error::InvalidScenario);
        }
        Ok(Self { filter, feed_forward })
    }

    pub fn filter(&self) -> FilterSetting {
        self.filter
    }

    pub fn feed_forward(&self) -> bool {
        self.feed_forward
    }

    /// `a`, `b` or `c`.
    pub fn letter(&self) -> char {
        match (self.filter, self.feed_forward) {
            (FilterSetting::Off, _) => 'a',
            (FilterSetting::FixedPlus, false) => 'b',
            (FilterSetting::FixedPlus, true) => 'c',
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" => Ok(Self::BARE),
            "b" => Ok(Self::FILTER_ONLY),
            "c" => Ok(Self::FULL),
            other => Err(Error::Parse(format!("unknown scenario {other:?}, expected a, b or c"))),
        }
    }
}

/// A completely positive, trace-non-increasing single-qubit map in Kraus form.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessMap {
    pub kraus: Vec<Complex2Matrix>,
    pub label: String,
}

impl ProcessMap {
    /// Checks `Σ K†K ≤ I` within `1e-9`.
    pub fn new(kraus: Vec<Complex2Matrix>, label: impl Into<String>) -> Result<Self> {
        let map = Self {
            kraus,
            label: label.into(),
        };
        let largest = svd2(&map.effect()).sigma[0];
        if !(largest <= 1.0 + 1e-9) {
            return Err(Error::out_of_range("largest eigenvalue of sum K†K", largest, "[0, 1]"));
        }
        Ok(map)
    }

    pub fn identity() -> Self {
        Self {
            kraus: vec![Complex2Matrix::identity()],
            label: "identity".into(),
        }
    }

    /// Complete dephasing in the computational basis, `ρ → (ρ + ZρZ)/2`.
    pub fn dephasing() -> Self {
        let h = C64::from(std::f64::consts::FRAC_1_SQRT_2);
        Self {
            kraus: vec![Complex2Matrix::identity().scale(h), Complex2Matrix::pauli_z().scale(h)],
            label: "dephasing".into(),
        }
    }

    /// `Σ K†K`: the success-probability effect.
    pub fn effect(&self) -> Complex2Matrix {
        self.kraus
            .iter()
            .fold(Complex2Matrix::zero(), |acc, k| acc + k.adjoint() * *k)
    }

    /// Output of the map on a density matrix, without renormalization.
    pub fn apply_unchecked(&self, rho: &Complex2Matrix) -> Complex2Matrix {
        self.kraus
            .iter()
            .fold(Complex2Matrix::zero(), |acc, k| acc + *k * *rho * k.adjoint())
    }
}

/// `χ = (I ⊗ L)(|Φ⁺⟩⟨Φ⁺|)`, positive semidefinite; the first factor is the
/// reference qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessMatrix {
    pub chi: Complex4Matrix,
    pub trace: f64,
}

impl ProcessMatrix {
    /// Validates Hermiticity (`1e-10`) and positivity (`−1e-9`).
    pub fn new(chi: Complex4Matrix) -> Result<Self> {
        let deviation = chi.hermitian_deviation();
        if !(deviation <= 1e-10) {
            return Err(Error::NotHermitian { deviation });
        }
        let min = eig_hermitian4(&chi)?.values[3];
        if min < -1e-9 {
            return Err(Error::out_of_range("smallest eigenvalue of chi", min, "[0, inf)"));
        }
        Ok(Self::from_hermitian(chi.hermitize()))
    }

    pub(crate) fn from_hermitian(chi: Complex4Matrix) -> Self {
        Self {
            chi,
            trace: chi.trace().re,
        }
    }

    /// `|Φ⁺⟩⟨Φ⁺|`, the identity channel.
    pub fn bell() -> Self {
        let b = Complex4Vector::bell_phi_plus();
        Self::from_hermitian(b.outer(&b))
    }

    /// Unit-trace copy.
    pub fn normalized(&self) -> Result<Complex4Matrix> {
        if !(self.trace > 1e-300) {
            return Err(Error::ZeroTrace);
        }
        Ok(self.chi.scale_real(1.0 / self.trace))
    }

    pub fn eigen(&self) -> Result<HermitianEigen> {
        eig_hermitian4(&self.chi)
    }

    /// Kraus operators from the spectral decomposition, dropping eigenvalues
    /// below `1e-14 · Tr χ`.
    pub fn kraus(&self) -> Result<ProcessMap> {
        let eig = self.eigen()?;
        let cutoff = 1e-14 * self.trace.abs().max(f64::MIN_POSITIVE);
        let kraus = (0..4)
            .filter(|&k| eig.values[k] > cutoff)
            .map(|k| {
                let v = eig.vector(k);
                let s = C64::from((2.0 * eig.values[k]).sqrt());
                let mut m = Complex2Matrix::zero();
                for i in 0..2 {
                    for j in 0..2 {
                        m.0[j][i] = v.0[2 * i + j] * s;
                    }
                }
                m
            })
            .collect();
        Ok(ProcessMap {
            kraus,
            label: "from-choi".into(),
        })
    }
}

pub fn choi(map: &ProcessMap) -> ProcessMatrix {
    let mut chi = Complex4Matrix::zero();
    for k in &map.kraus {
        // |K⟩⟩ = Σ_i |i⟩ ⊗ K|i⟩
        let mut v = Complex4Vector::zero();
        for i in 0..2 {
            for j in 0..2 {
                v.0[2 * i + j] = k.0[j][i];
            }
        }
        chi = chi + v.outer(&v);
    }
    ProcessMatrix::from_hermitian(chi.scale_real(0.5).hermitize())
}

/// Normalized overlap `⟨Φ⁺|χ|Φ⁺⟩ / Tr χ`.
pub fn channel_fidelity(chi: &ProcessMatrix) -> Result<f64> {
    let normalized = chi.normalized()?;
    let f = normalized.expectation(&Complex4Vector::bell_phi_plus()).re;
    Ok(f.clamp(0.0, 1.0))
}

fn validate_density(rho: &Complex2Matrix) -> Result<()> {
    if !rho.is_finite() {
        return Err(Error::InvalidDensityMatrix("non-finite entries"));
    }
    if !rho.is_hermitian(1e-9) {
        return Err(Error::InvalidDensityMatrix("not Hermitian"));
    }
    let tr = rho.trace().re;
    if (tr - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDensityMatrix("trace is not 1"));
    }
    let a = rho.0[0][0].re;
    let d = rho.0[1][1].re;
    let min = 0.5 * (tr - ((a - d).powi(2) + 4.0 * rho.0[0][1].norm_sqr()).sqrt());
    if min < -1e-9 {
        return Err(Error::InvalidDensityMatrix("negative eigenvalue"));
    }
    Ok(())
}

/// `ρ → Σ KρK†`, returned unnormalized together with its trace (the success
/// probability for this input).
pub fn apply(map: &ProcessMap, rho: &Complex2Matrix) -> Result<(Complex2Matrix, f64)> {
    validate_density(rho)?;
    let out = map.apply_unchecked(rho);
    let success = out.trace().re;
    Ok((out, success))
}

/// Reference values for judging a transfer channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityBounds {
    /// Best average state fidelity of a measure-and-prepare strategy.
    pub classical_average: f64,
    pub note: &'static str,
}

impl FidelityBounds {
    /// Average state fidelity of a channel with normalized overlap `f`.
    pub fn average_from_channel(f: f64) -> f64 {
        (2.0 * f + 1.0) / 3.0
    }

    /// Inverse of [`FidelityBounds::average_from_channel`].
    pub fn channel_from_average(f_avg: f64) -> f64 {
        (3.0 * f_avg - 1.0) / 2.0
    }
}

pub fn fidelity_bounds() -> FidelityBounds {
    FidelityBounds {
        classical_average: 2.0 / 3.0,
        note: "2/3 bounds the average state fidelity; the matching channel fidelity is 1/2 \
               (F_avg = (2 F_channel + 1) / 3)",
    }
}

/// Kraus operators of the single-qubit map for a given scenario.
///
/// `actual` are two-qubit Kraus operators of the physical coupling; filters
/// and the feed-forward plan are always derived from `design`. For an ideal
/// model pass `&[design.operator()]`.
pub fn scenario_kraus<D: Coupling + ?Sized>(
    actual: &[Complex4Matrix],
    design: &D,
    g: &PureQubit,
    kappa: f64,
    scenario: Scenario,
) -> Result<Vec<Complex2Matrix>> {
    let pi_plus = PureQubit::from_angle(kappa);
    let pi_minus = pi_plus.perp();

    let (left_plus, left_minus) = match (scenario.filter, scenario.feed_forward) {
        (FilterSetting::Off, _) => (Some(Complex2Matrix::identity()), Some(Complex2Matrix::identity())),
        (FilterSetting::FixedPlus, false) => {
            let f = synthesize_filter(&conditional_states(design, g, &pi_plus))?;
            (Some(f.g), Some(f.g))
        }
        (FilterSetting::FixedPlus, true) => {
            let f = synthesize_filter(&conditional_states(design, g, &pi_plus))?;
            let plan = feed_forward_plan(design, g, kappa)?;
            let minus = match (plan.correction, plan.filter_minus) {
                (Some(c), _) => Some(c * f.g),
                (None, Some(m)) => Some(m.g),
                // no filter for this outcome: it is discarded
                (None, None) => None,
            };
            (Some(f.g), minus)
        }
    };

    let mut kraus = Vec::with_capacity(2 * actual.len());
    for op in actual {
        if let Some(l) = left_plus {
            kraus.push(l * measurement_operator(op, g, &pi_plus));
        }
        if let Some(l) = left_minus {
            kraus.push(l * measurement_operator(op, g, &pi_minus));
        }
    }
    Ok(kraus)
}

/// The transfer channel realized by an ideal coupling `V̂` in one scenario.
pub fn scenario_channel<V: Coupling + ?Sized>(
    coupling: &V,
    g: &PureQubit,
    kappa: f64,
    scenario: Scenario,
) -> Result<ProcessMap> {
    let kraus = scenario_kraus(&[coupling.operator()], coupling, g, kappa, scenario)?;
    Ok(ProcessMap {
        kraus,
        label: format!("scenario-{scenario}"),
    })
}
