//! Partially polarizing beam splitter (PPBS) model beyond the ideal device.
//!
//! Two photons, one per input port, interfere on a beam splitter whose
//! amplitude transmittance depends on polarization. Post-selecting one photon
//! per output port heralds a two-qubit operator built from two paths: both
//! photons transmitted (`Vtt`), or both reflected (`Vrr`). On the reflected
//! path the photons exchange ports, so `Vrr` carries a qubit swap; it only
//! acts trivially when one polarization is fully transmitted.
//!
//! Polarization H is qubit `|0⟩`, V is `|1⟩`. The source photon enters port
//! `a` and is read out at the port `c` it reaches by transmission.

use std::collections::BTreeMap;

use crate::channels::{scenario_kraus, ProcessMap, Scenario};
use crate::error::{Error, Result};
use crate::protocol::{InteractionSpec, PureQubit};
use crate::qmath::{Complex4Matrix, C64, ONE, ZERO};

/// Amplitude transmittances of a PPBS for horizontal and vertical light.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PpbsPhysical {
    pub t_h: f64,
    pub t_v: f64,
}

impl PpbsPhysical {
    pub fn new(t_h: f64, t_v: f64) -> Result<Self> {
        for (what, t) in [("t_H", t_h), ("t_V", t_v)] {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::out_of_range(what, t, "[0, 1]"));
            }
        }
        Ok(Self { t_h, t_v })
    }

    /// From intensity transmittances `T_H = t_H²`, `T_V = t_V²`.
    pub fn from_intensities(th_squared: f64, tv_squared: f64) -> Result<Self> {
        for (what, t) in [("T_H", th_squared), ("T_V", tv_squared)] {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::out_of_range(what, t, "[0, 1]"));
            }
        }
        Self::new(th_squared.sqrt(), tv_squared.sqrt())
    }

    /// Fully transmitting for H.
    pub fn ideal(t_v: f64) -> Result<Self> {
        Self::new(1.0, t_v)
    }

    pub fn r_h(&self) -> f64 {
        (1.0 - self.t_h * self.t_h).max(0.0).sqrt()
    }

    pub fn r_v(&self) -> f64 {
        (1.0 - self.t_v * self.t_v).max(0.0).sqrt()
    }

    fn t(&self, pol: usize) -> f64 {
        [self.t_h, self.t_v][pol]
    }

    fn r(&self, pol: usize) -> f64 {
        [self.r_h(), self.r_v()][pol]
    }

    /// The coupling the filter is designed for: same `t_V`, perfect `t_H`.
    pub fn design_interaction(&self) -> InteractionSpec {
        // t_v is validated on construction
        InteractionSpec::ppbs(self.t_v).expect("t_v in [0, 1]")
    }
}

/// Interference visibility `v` between the transmitted and reflected paths;
/// `v = 1` for indistinguishable photons, `v = 0` for a classical mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistinguishabilityModel {
    visibility: f64,
}

impl DistinguishabilityModel {
    pub fn new(visibility: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&visibility) {
            return Err(Error::out_of_range("visibility", visibility, "[0, 1]"));
        }
        Ok(Self { visibility })
    }

    pub fn indistinguishable() -> Self {
        Self { visibility: 1.0 }
    }

    pub fn visibility(&self) -> f64 {
        self.visibility
    }
}

/// Post-selected two-qubit operator of a PPBS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostselectedPpbs {
    /// Heralding amplitudes, `Vtt − Vrr`.
    pub raw: Complex4Matrix,
    /// Largest singular value of `raw`.
    pub scale: f64,
    /// `raw / scale`, so that the largest singular value is one.
    pub normalized: Complex4Matrix,
}

impl PostselectedPpbs {
    /// The diagonal form, when the reflected path leaves no swap term
    /// (`t_H = 1` or `t_V = 1`).
    pub fn as_interaction(&self) -> Option<InteractionSpec> {
        let off = self.normalized.0[1][2].norm().max(self.normalized.0[2][1].norm());
        if off > 1e-12 {
            return None;
        }
        InteractionSpec::new(self.normalized.diagonal()).ok()
    }
}

/// Transmit–transmit and reflect–reflect path operators.
///
/// `Vtt = diag(t_p t_q)`, `Vrr = SWAP · diag(r_p r_q)`; the heralded operator
/// is `Vtt − Vrr`.
pub fn distinguishable_branches(p: &PpbsPhysical) -> (Complex4Matrix, Complex4Matrix) {
    let mut tt = [ZERO; 4];
    let mut rr = [ZERO; 4];
    for s in 0..2 {
        for t in 0..2 {
            tt[2 * s + t] = C64::from(p.t(s) * p.t(t));
            rr[2 * s + t] = C64::from(p.r(s) * p.r(t));
        }
    }
    (Complex4Matrix::diag(tt), Complex4Matrix::swap() * Complex4Matrix::diag(rr))
}

/// Closed-form heralded operator:
/// `|00⟩ → (2t_H² − 1)|00⟩`, `|11⟩ → (2t_V² − 1)|11⟩`,
/// `|01⟩ → t_H t_V |01⟩ − r_H r_V |10⟩` and symmetrically for `|10⟩`.
pub fn ppbs_postselected(p: &PpbsPhysical) -> PostselectedPpbs {
    let (tt, rr) = distinguishable_branches(p);
    let raw = tt - rr;
    // block-diagonal: singular values are |d00|, |d11| and |t_H t_V ± r_H r_V|
    let cross = p.t_h * p.t_v;
    let refl = p.r_h() * p.r_v();
    let scale = [
        raw.0[0][0].norm(),
        raw.0[3][3].norm(),
        (cross + refl).abs(),
        (cross - refl).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let normalized = if scale > 0.0 { raw.scale_real(1.0 / scale) } else { raw };
    PostselectedPpbs {
        raw,
        scale,
        normalized,
    }
}

/// Sign of the reflection amplitude for light entering the second port.
/// `Standard` gives a unitary beam splitter; `Flipped` is a deliberately
/// wrong convention used as a negative control.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReflectionConvention {
    #[default]
    Standard,
    Flipped,
}

type FockState = BTreeMap<[u8; 4], C64>;

// mode index: port * 2 + polarization; inputs a = 0, b = 1; outputs c = 0, d = 1
fn mode(port: usize, pol: usize) -> usize {
    2 * port + pol
}

fn create(state: &FockState, superposition: &[(usize, C64)]) -> FockState {
    let mut out = FockState::new();
    for (occ, amp) in state {
        for &(m, coeff) in superposition {
            let mut next = *occ;
            next[m] += 1;
            let bosonic = f64::from(next[m]).sqrt();
            *out.entry(next).or_insert(ZERO) += amp * coeff * bosonic;
        }
    }
    out
}

/// Derives the heralded operator by propagating two-photon Fock states.
///
/// Each input creation operator is mapped through the beam splitter,
/// `a_p† → t_p c_p† + r_p d_p†` and `b_p† → ∓r_p c_p† + t_p d_p†`, the
/// product is expanded over the ten two-photon occupations of the four
/// output modes, and only terms with one photon at `c` and one at `d` are
/// kept.
pub fn fock_oracle(p: &PpbsPhysical) -> Complex4Matrix {
    fock_oracle_with(p, ReflectionConvention::Standard)
}

pub fn fock_oracle_with(p: &PpbsPhysical, convention: ReflectionConvention) -> Complex4Matrix {
    let b_sign = match convention {
        ReflectionConvention::Standard => -1.0,
        ReflectionConvention::Flipped => 1.0,
    };
    let out_a = |pol: usize| {
        vec![
            (mode(0, pol), C64::from(p.t(pol))),
            (mode(1, pol), C64::from(p.r(pol))),
        ]
    };
    let out_b = |pol: usize| {
        vec![
            (mode(0, pol), C64::from(b_sign * p.r(pol))),
            (mode(1, pol), C64::from(p.t(pol))),
        ]
    };

    let mut vacuum = FockState::new();
    vacuum.insert([0; 4], ONE);

    let mut v = Complex4Matrix::zero();
    for s in 0..2 {
        for t in 0..2 {
            let state = create(&create(&vacuum, &out_a(s)), &out_b(t));
            for (occ, amp) in &state {
                let in_c = occ[mode(0, 0)] + occ[mode(0, 1)];
                let in_d = occ[mode(1, 0)] + occ[mode(1, 1)];
                if in_c != 1 || in_d != 1 {
                    continue;
                }
                let pc = usize::from(occ[mode(0, 1)] == 1);
                let pd = usize::from(occ[mode(1, 1)] == 1);
                v.0[2 * pc + pd][2 * s + t] += *amp;
            }
        }
    }
    v
}

/// Single-qubit transfer map through an imperfect PPBS.
///
/// The two-qubit heralded map is
/// `ρ → Vtt ρ Vtt† + Vrr ρ Vrr† − v (Vtt ρ Vrr† + Vrr ρ Vtt†)`, written here
/// with the Kraus pair `√((1+v)/2)(Vtt − Vrr)`, `√((1−v)/2)(Vtt + Vrr)`.
/// Filters and feed-forward are set from the design coupling (`t_H = 1`).
pub fn imperfect_transfer_channel(
    p: &PpbsPhysical,
    v: &DistinguishabilityModel,
    g: &PureQubit,
    kappa: f64,
    scenario: Scenario,
) -> Result<ProcessMap> {
    let (tt, rr) = distinguishable_branches(p);
    let vis = v.visibility();
    let actual: Vec<Complex4Matrix> = [
        ((1.0 + vis) / 2.0, tt - rr),
        ((1.0 - vis) / 2.0, tt + rr),
    ]
    .into_iter()
    .filter(|(w, _)| *w > 0.0)
    .map(|(w, op)| op.scale_real(w.sqrt()))
    .collect();
    let kraus = scenario_kraus(&actual, &p.design_interaction(), g, kappa, scenario)?;
    ProcessMap::new(kraus, format!("ppbs-scenario-{scenario}"))
}

/// Intensity pairs `(T_H, T_V)` on a 7 × 7 grid over `[0, 1]` plus the
/// experimental `(0.983, 0.334)`: 50 devices in all.
pub fn oracle_grid() -> Vec<PpbsPhysical> {
    let ts: Vec<f64> = (0..7).map(|i| f64::from(i) / 6.0).collect();
    let mut out: Vec<PpbsPhysical> = ts
        .iter()
        .flat_map(|&th| {
            ts.iter()
                .map(move |&tv| PpbsPhysical::from_intensities(th, tv).expect("grid point in [0, 1]"))
        })
        .collect();
    out.push(PpbsPhysical::from_intensities(0.983, 0.334).expect("in range"));
    out
}

/// Largest entry-wise deviation between the Fock-space oracle and the
/// closed form for one device.
pub fn oracle_deviation(p: &PpbsPhysical, convention: ReflectionConvention) -> f64 {
    fock_oracle_with(p, convention).max_abs_diff(&ppbs_postselected(p).raw)
}
