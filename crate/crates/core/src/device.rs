//! Transmon hardware, two-tone parametric drives, the driven-pair
//! interaction-picture Hamiltonian and Lindblad collapse operators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{angular, tensor_product, CMatrix, SparseOp, C64};

/// One anharmonic multi-level transmon. Frequencies and rates in MHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmonSpec {
    pub frequency: f64,
    pub anharmonicity: f64,
    pub levels: usize,
    #[serde(default)]
    pub drift: f64,
    pub decay: f64,
    pub dephasing: f64,
}

impl TransmonSpec {
    pub fn validate(&self) -> Result<()> {
        if self.levels < 3 {
            return Err(Error::InvalidDevice(format!(
                "transmon truncation must hold level |2>, got {} levels",
                self.levels
            )));
        }
        let finite = [self.frequency, self.anharmonicity, self.drift, self.decay, self.dephasing]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidDevice("transmon parameters must be finite".into()));
        }
        if self.anharmonicity <= 0.0 {
            return Err(Error::InvalidDevice(format!(
                "anharmonicity must be positive, got {}",
                self.anharmonicity
            )));
        }
        if self.decay < 0.0 || self.dephasing < 0.0 {
            return Err(Error::InvalidDevice("decoherence rates must be non-negative".into()));
        }
        Ok(())
    }

    /// Bare energy of level `n` in MHz: `n ω − n(n−1)α/2`.
    pub fn level_energy(&self, n: usize) -> f64 {
        let n = n as f64;
        n * self.frequency - 0.5 * n * (n - 1.0) * self.anharmonicity
    }

    pub fn with_levels(mut self, levels: usize) -> Self {
        self.levels = levels;
        self
    }

    pub fn without_decoherence(mut self) -> Self {
        self.decay = 0.0;
        self.dephasing = 0.0;
        self
    }
}

/// One frequency-modulation tone `F(t) = β sin(2π(ω + Δ)t + φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DriveTone {
    pub amplitude: f64,
    /// Base frequency in MHz.
    pub frequency: f64,
    /// Static chirp offset added to the base frequency, MHz.
    pub offset: f64,
    pub phase: f64,
}

impl DriveTone {
    pub fn new(amplitude: f64, frequency: f64, offset: f64, phase: f64) -> Self {
        Self { amplitude, frequency, offset, phase }
    }

    pub fn off() -> Self {
        Self::default()
    }

    /// Modulation phase `F(t)` in radians, `t` in ns.
    #[inline]
    pub fn modulation(&self, t: f64) -> f64 {
        self.amplitude * (angular(self.frequency + self.offset) * t + self.phase).sin()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// Two capacitively coupled transmons with a two-tone frequency modulation
/// on one of them. Product-state index is `left_level * d_right + right_level`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrivenPair {
    pub left: TransmonSpec,
    pub right: TransmonSpec,
    /// Coupling strength g_c in MHz.
    pub coupling: f64,
    pub modulated: Side,
    pub tones: [DriveTone; 2],
}

impl DrivenPair {
    pub fn new(
        left: TransmonSpec,
        right: TransmonSpec,
        coupling: f64,
        modulated: Side,
        tones: [DriveTone; 2],
    ) -> Result<Self> {
        let pair = Self { left, right, coupling, modulated, tones };
        pair.validate()?;
        Ok(pair)
    }

    pub fn validate(&self) -> Result<()> {
        self.left.validate()?;
        self.right.validate()?;
        if !(self.coupling >= 0.0) || !self.coupling.is_finite() {
            return Err(Error::InvalidDevice(format!("coupling must be >= 0, got {}", self.coupling)));
        }
        for tone in &self.tones {
            if !(tone.amplitude >= 0.0) {
                return Err(Error::InvalidDevice("tone amplitude must be >= 0".into()));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.left.levels * self.right.levels
    }

    pub fn index(&self, left_level: usize, right_level: usize) -> usize {
        left_level * self.right.levels + right_level
    }

    pub fn modulated_transmon(&self) -> &TransmonSpec {
        match self.modulated {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    pub fn other_transmon(&self) -> &TransmonSpec {
        match self.modulated {
            Side::Left => &self.right,
            Side::Right => &self.left,
        }
    }

    /// `Δ_pair = ω_modulated − ω_other` in MHz.
    pub fn frequency_difference(&self) -> f64 {
        self.modulated_transmon().frequency - self.other_transmon().frequency
    }

    /// `δ_mod − δ_other` in MHz.
    pub fn drift_difference(&self) -> f64 {
        self.modulated_transmon().drift - self.other_transmon().drift
    }

    pub fn with_tones(&self, tones: [DriveTone; 2]) -> Self {
        Self { tones, ..self.clone() }
    }

    pub fn with_levels(&self, levels: usize) -> Self {
        Self { left: self.left.with_levels(levels), right: self.right.with_levels(levels), ..self.clone() }
    }

    pub fn without_decoherence(&self) -> Self {
        Self {
            left: self.left.without_decoherence(),
            right: self.right.without_decoherence(),
            ..self.clone()
        }
    }

    /// Total modulation phase `F₁(t) + F₂(t)`.
    #[inline]
    pub fn modulation(&self, t: f64) -> f64 {
        self.tones[0].modulation(t) + self.tones[1].modulation(t)
    }

    /// Every excitation-exchange channel `|n+1, m−1⟩⟨n, m|` (modulated
    /// transmon gains) as `(row, col, amplitude rad/ns, carrier rad/ns)`.
    pub fn exchange_channels(&self) -> Vec<ExchangeChannel> {
        let (dm, dother) = (self.modulated_transmon().levels, self.other_transmon().levels);
        let (amod, aother) = (self.modulated_transmon().anharmonicity, self.other_transmon().anharmonicity);
        let base = self.frequency_difference() + self.drift_difference();
        let mut out = Vec::new();
        for n in 0..dm - 1 {
            for m in 1..dother {
                let (row, col) = match self.modulated {
                    Side::Left => (self.index(n + 1, m - 1), self.index(n, m)),
                    Side::Right => (self.index(m - 1, n + 1), self.index(m, n)),
                };
                out.push(ExchangeChannel {
                    row,
                    col,
                    amplitude: (((n + 1) * m) as f64).sqrt() * angular(self.coupling),
                    carrier: angular(base - n as f64 * amod + (m as f64 - 1.0) * aother),
                });
            }
        }
        out
    }

    /// Writes `H(t)` in sparse form into `out` (rad/ns).
    pub fn write_hamiltonian(&self, t: f64, out: &mut SparseOp) {
        out.clear();
        if self.coupling == 0.0 {
            return;
        }
        let drive = self.modulation(t);
        for ch in self.exchange_channels() {
            let v = C64::from_polar(ch.amplitude, ch.carrier * t + drive);
            out.push_hermitian_pair(ch.row, ch.col, v);
        }
    }
}

/// One `|n+1, m−1⟩⟨n, m|` exchange term of the pair Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExchangeChannel {
    pub row: usize,
    pub col: usize,
    pub amplitude: f64,
    pub carrier: f64,
}

/// Interaction-picture Hamiltonian of the driven pair at time `t` (ns), in
/// rad/ns on the `d_left · d_right` product space.
pub fn interaction_hamiltonian(pair: &DrivenPair, t: f64) -> Result<CMatrix> {
    pair.validate()?;
    let mut op = SparseOp::new(pair.dim());
    pair.write_hamiltonian(t, &mut op);
    Ok(op.to_dense())
}

/// Truncated lowering operator `Σ √n |n−1⟩⟨n|`.
pub fn lowering(levels: usize) -> CMatrix {
    let mut s = CMatrix::zeros(levels, levels);
    for n in 1..levels {
        s[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    s
}

pub fn number(levels: usize) -> CMatrix {
    CMatrix::from_fn(levels, levels, |i, j| if i == j { C64::new(i as f64, 0.0) } else { C64::default() })
}

/// Embeds a single-transmon operator at `position` of a register.
pub fn embed(op: &CMatrix, dims: &[usize], position: usize) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    for (k, &d) in dims.iter().enumerate() {
        let factor = if k == position { op.clone() } else { CMatrix::identity(d, d) };
        out = tensor_product(&out, &factor);
    }
    out
}

/// Relaxation `√κ₁·S` and dephasing `√κ_φ·n̂` for one transmon embedded in a
/// register, rates converted to angular units.
pub fn transmon_collapse_operators(spec: &TransmonSpec, dims: &[usize], position: usize) -> Vec<CMatrix> {
    let d = spec.levels;
    let relax = embed(&lowering(d), dims, position) * C64::new(angular(spec.decay).sqrt(), 0.0);
    let dephase = embed(&number(d), dims, position) * C64::new(angular(spec.dephasing).sqrt(), 0.0);
    vec![relax, dephase]
}

/// Collapse operators of the pair, ordered `[left relax, left dephase,
/// right relax, right dephase]`.
pub fn collapse_operators(pair: &DrivenPair) -> Vec<CMatrix> {
    let dims = [pair.left.levels, pair.right.levels];
    let mut ops = transmon_collapse_operators(&pair.left, &dims, 0);
    ops.extend(transmon_collapse_operators(&pair.right, &dims, 1));
    ops
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    Single,
    Double,
}

/// A labelled physical product state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabeledState {
    pub label: String,
    /// Level of each transmon, most significant first.
    pub levels: Vec<usize>,
    pub index: usize,
}

impl LabeledState {
    fn new(label: &str, levels: Vec<usize>, d: usize) -> Self {
        let index = levels.iter().fold(0, |acc, &l| acc * d + l);
        Self { label: label.to_string(), levels, index }
    }
}

/// Logical basis of the decoherence-free encoding in a register where every
/// transmon has `levels` levels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DfsBasis {
    pub encoding: Encoding,
    pub levels: usize,
    /// Logical states on the whole register (2 transmons for single, 4 for
    /// double).
    pub logical: Vec<LabeledState>,
    /// Auxiliary state on the active pair (T1–T2 for single, T2–T3 for double).
    pub auxiliary: LabeledState,
}

impl DfsBasis {
    /// The logical states restricted to the active T2–T3 pair (double
    /// encoding) or the full pair (single encoding).
    pub fn active_pair_states(&self) -> Vec<LabeledState> {
        match self.encoding {
            Encoding::Single => self.logical.clone(),
            Encoding::Double => self
                .logical
                .iter()
                .map(|s| LabeledState::new(&s.label, vec![s.levels[1], s.levels[2]], self.levels))
                .collect(),
        }
    }

    /// Spectator (T1, T4) levels of each double-encoding logical state.
    pub fn spectator_levels(&self) -> Vec<(usize, usize)> {
        match self.encoding {
            Encoding::Single => Vec::new(),
            Encoding::Double => self.logical.iter().map(|s| (s.levels[0], s.levels[3])).collect(),
        }
    }
}

/// Maps logical labels to product-state indices: `|0⟩_L = |02⟩`,
/// `|1⟩_L = |20⟩`, auxiliary `|11⟩`; double encoding uses
/// `|00⟩_L = |0202⟩ … |11⟩_L = |2020⟩` with auxiliary `|11⟩₂₃`.
pub fn dfs_states(encoding: Encoding, levels: usize) -> Result<DfsBasis> {
    if levels < 3 {
        return Err(Error::InvalidDevice(format!("{levels} levels cannot host |2>")));
    }
    let d = levels;
    let basis = match encoding {
        Encoding::Single => DfsBasis {
            encoding,
            levels,
            logical: vec![LabeledState::new("0", vec![0, 2], d), LabeledState::new("1", vec![2, 0], d)],
            auxiliary: LabeledState::new("a", vec![1, 1], d),
        },
        Encoding::Double => DfsBasis {
            encoding,
            levels,
            logical: vec![
                LabeledState::new("00", vec![0, 2, 0, 2], d),
                LabeledState::new("01", vec![0, 2, 2, 0], d),
                LabeledState::new("10", vec![2, 0, 0, 2], d),
                LabeledState::new("11", vec![2, 0, 2, 0], d),
            ],
            auxiliary: LabeledState::new("a", vec![1, 1], d),
        },
    };
    Ok(basis)
}

/// Parameter sets used by the reference runs (MHz). Absolute transmon
/// frequencies are not fixed by the gate physics; only differences enter.
pub mod presets {
    use super::*;

    pub const RATE: f64 = 4e-3;

    pub fn transmon(frequency: f64, anharmonicity: f64, levels: usize) -> TransmonSpec {
        TransmonSpec { frequency, anharmonicity, levels, drift: 0.0, decay: RATE, dephasing: RATE }
    }

    /// T1–T2 logical pair: Δ₁ = 500 MHz, α = 320/300 MHz, g₁₂ = 12 MHz, T1 modulated.
    pub fn single_qubit_pair(levels: usize) -> DrivenPair {
        DrivenPair {
            left: transmon(5500.0, 320.0, levels),
            right: transmon(5000.0, 300.0, levels),
            coupling: 12.0,
            modulated: Side::Left,
            tones: [DriveTone::off(); 2],
        }
    }

    /// T2–T3 coupling pair: Δ₂ = 560 MHz, α₂ = 300, α₃ = 330 MHz, g₂₃ = 10 MHz, T3 modulated.
    pub fn cp_pair(levels: usize) -> DrivenPair {
        DrivenPair {
            left: transmon(5000.0, 300.0, levels),
            right: transmon(5560.0, 330.0, levels),
            coupling: 10.0,
            modulated: Side::Right,
            tones: [DriveTone::off(); 2],
        }
    }

    /// Idle spectators T1 (α₁ = 320 MHz) and T4 (α₄ = 310 MHz).
    pub fn spectators(levels: usize) -> [TransmonSpec; 2] {
        [transmon(5500.0, 320.0, levels), transmon(5060.0, 310.0, levels)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{commutator, expm_hermitian, frobenius, is_hermitian};
    use std::f64::consts::SQRT_2;

    fn fig3_pair(levels: usize) -> DrivenPair {
        presets::single_qubit_pair(levels)
            .with_tones([DriveTone::new(1.58, 180.0, 0.0, 0.3), DriveTone::new(1.43, 620.0, 0.0, -1.1)])
    }

    #[test]
    fn level_energies() {
        let t = presets::transmon(5000.0, 300.0, 5);
        assert_eq!(t.level_energy(0), 0.0);
        assert_eq!(t.level_energy(1), 5000.0);
        assert_eq!(t.level_energy(2), 9700.0);
        assert_eq!(t.level_energy(3), 15000.0 - 900.0);
    }

    #[test]
    fn logical_matrix_elements_undriven() {
        let pair = presets::single_qubit_pair(3);
        let t = 3.7;
        let h = interaction_hamiltonian(&pair, t).unwrap();
        let g = angular(12.0);
        let want = C64::from_polar(SQRT_2 * g, angular(500.0 + 300.0) * t);
        assert!((h[(pair.index(1, 1), pair.index(0, 2))] - want).norm() < 1e-12);
        let want = C64::from_polar(SQRT_2 * g, angular(500.0 - 320.0) * t);
        assert!((h[(pair.index(2, 0), pair.index(1, 1))] - want).norm() < 1e-12);
    }

    #[test]
    fn sqrt_three_leakage_elements() {
        let pair = presets::cp_pair(5);
        let h = interaction_hamiltonian(&pair, 0.0).unwrap();
        let want = 6f64.sqrt() * angular(10.0);
        // T2 = left, T3 = right; |13⟩₂₃⟨22| and |22⟩₂₃⟨31|
        assert!((h[(pair.index(1, 3), pair.index(2, 2))].norm() - want).abs() < 1e-12);
        assert!((h[(pair.index(2, 2), pair.index(3, 1))].norm() - want).abs() < 1e-12);
        // carriers of the two-qubit exchange terms
        let t = 1.3;
        let h = interaction_hamiltonian(&pair, t).unwrap();
        let e = |row, col| h[(row, col)].arg();
        let check = |row, col, mhz: f64| {
            let want = crate::numerics::wrap_phase(angular(mhz) * t);
            assert!((crate::numerics::wrap_phase(e(row, col) - want)).abs() < 1e-12);
        };
        check(pair.index(0, 2), pair.index(1, 1), 560.0 - 330.0);
        check(pair.index(1, 1), pair.index(2, 0), 560.0 + 300.0);
        check(pair.index(1, 3), pair.index(2, 2), 560.0 + 300.0 - 660.0);
        check(pair.index(2, 2), pair.index(3, 1), 560.0 + 600.0 - 330.0);
    }

    #[test]
    fn zero_coupling_gives_zero() {
        let mut pair = fig3_pair(4);
        pair.coupling = 0.0;
        for &t in &[0.0, 1.0, 17.3] {
            assert_eq!(frobenius(&interaction_hamiltonian(&pair, t).unwrap()), 0.0);
        }
    }

    #[test]
    fn rejects_small_truncation() {
        let pair = presets::single_qubit_pair(2);
        assert!(matches!(interaction_hamiltonian(&pair, 0.0), Err(Error::InvalidDevice(_))));
        assert!(dfs_states(Encoding::Single, 2).is_err());
    }

    #[test]
    fn hermitian_and_excitation_conserving() {
        let pair = fig3_pair(5);
        let dims = [5, 5];
        let n_tot = embed(&number(5), &dims, 0) + embed(&number(5), &dims, 1);
        for k in 0..40 {
            let t = 0.37 * k as f64;
            let h = interaction_hamiltonian(&pair, t).unwrap();
            assert!(is_hermitian(&h, 1e-12));
            assert!(frobenius(&commutator(&h, &n_tot)) <= 1e-12 * frobenius(&h).max(1.0));
        }
    }

    /// Lab-frame construction on a 3-level truncation: H_lab(t) with the
    /// modulated frequency, then U₀(t)† H U₀(t) − (generator of U₀) removed.
    #[test]
    fn frame_transformation_oracle() {
        let pair = fig3_pair(3);
        let d = 3;
        let dims = [d, d];
        let (t1, t2) = (pair.left, pair.right);
        let n1 = embed(&number(d), &dims, 0);
        let s1 = embed(&lowering(d), &dims, 0);
        let s2 = embed(&lowering(d), &dims, 1);
        let coupling = (&s1 * s2.adjoint() + s1.adjoint() * &s2) * C64::new(angular(pair.coupling), 0.0);
        let diag = |spec: &TransmonSpec, pos: usize| {
            let mut m = CMatrix::zeros(d, d);
            for n in 0..d {
                m[(n, n)] = C64::new(angular(spec.level_energy(n)), 0.0);
            }
            embed(&m, &dims, pos)
        };
        let h0 = diag(&t1, 0) + diag(&t2, 1);
        for &t in &[0.0, 0.8, 5.25] {
            // the interaction frame unitary is exp(-i H0 t) exp(-i n1 F(t))
            let u0 = expm_hermitian(&h0, t) * expm_hermitian(&n1, pair.modulation(t));
            let h_int = u0.adjoint() * &coupling * &u0;
            let h = interaction_hamiltonian(&pair, t).unwrap();
            assert!(frobenius(&(h_int - h)) < 1e-9, "t = {t}");
        }
        // ⟨20|H(0)|11⟩ carries the drive phase F(0)
        let h = interaction_hamiltonian(&pair, 0.0).unwrap();
        let want = C64::from_polar(SQRT_2 * angular(12.0), pair.modulation(0.0));
        assert!((h[(pair.index(2, 0), pair.index(1, 1))] - want).norm() < 1e-12);
    }

    #[test]
    fn collapse_operator_definitions() {
        let s = lowering(3);
        assert_eq!(s[(0, 1)], C64::new(1.0, 0.0));
        assert!((s[(1, 2)].re - SQRT_2).abs() < 1e-15);
        assert_eq!(s.iter().filter(|z| z.norm() > 0.0).count(), 2);

        let pair = presets::single_qubit_pair(3);
        let ops = collapse_operators(&pair);
        assert_eq!(ops.len(), 4);
        // relaxation operator norm on a 3-level system: √(2π·0.004 MHz)·√(1+2)
        let k = angular(0.004).sqrt();
        let relax_single = lowering(3) * C64::new(k, 0.0);
        assert!((frobenius(&relax_single) - k * 3f64.sqrt()).abs() < 1e-15);
        // the |2⟩→|1⟩ matrix element carries √2
        assert!((ops[0][(pair.index(1, 0), pair.index(2, 0))].re - k * SQRT_2).abs() < 1e-15);

        let quiet = pair.without_decoherence();
        assert!(collapse_operators(&quiet).iter().all(|op| frobenius(op) == 0.0));
    }

    #[test]
    fn dfs_indices() {
        let b = dfs_states(Encoding::Single, 3).unwrap();
        assert_eq!(b.logical[0].index, 2);
        assert_eq!(b.logical[1].index, 6);
        assert_eq!(b.auxiliary.index, 4);

        let b = dfs_states(Encoding::Double, 3).unwrap();
        let idx = |l: [usize; 4]| ((l[0] * 3 + l[1]) * 3 + l[2]) * 3 + l[3];
        assert_eq!(b.logical[3].label, "11");
        assert_eq!(b.logical[3].index, idx([2, 0, 2, 0]));
        assert_eq!(b.logical[0].index, idx([0, 2, 0, 2]));
        let pair = b.active_pair_states();
        assert_eq!(pair[3].levels, vec![0, 2]);
        assert_eq!(pair[1].levels, vec![2, 2]);
        assert_eq!(b.spectator_levels()[3], (2, 0));
        assert_eq!(b.auxiliary.levels, vec![1, 1]);
    }
}
