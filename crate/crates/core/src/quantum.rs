//! Exact statevector simulation for registers of up to eight qubits.
//!
//! A [`Register`] holds the joint state of every qubit alive in one protocol
//! round, together with per-qubit ownership and consumption bookkeeping.
//! State preparation covers the computational basis, the four Bell states and
//! the three-qubit GHZ state; unitaries are X, Z, CNOT and real single-qubit
//! rotations; measurements are computational, rotated-basis and Bell-basis,
//! all with Born-rule sampling and collapse.
//!
//! # Index convention
//!
//! Amplitude indices are little-endian in qubit order: qubit 0 is the least
//! significant bit of the basis index. Kets are written with qubit 0
//! leftmost, so `|q0 q1 q2⟩` sits at index `q0 + 2*q1 + 4*q2`. For example
//! the GHZ state `(|000⟩ + |111⟩)/√2` over qubits 0, 1, 2 has non-zero
//! amplitudes at indices 0 and 7.
//!
//! # Sampling
//!
//! Measurement outcomes are drawn by inverse CDF over a fixed outcome
//! ordering (0 before 1; `PhiPlus`, `PhiMinus`, `PsiPlus`, `PsiMinus`) from
//! a single seeded stream, so a run is reproducible from its seed. Outcomes
//! with probability below [`MIN_PROB`] are unreachable and never sampled.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::PartyId;

/// Hard cap on register width; protocol rounds never need more.
pub const MAX_QUBITS: usize = 8;
/// Tolerance on the state norm after any operation.
pub const NORM_EPS: f64 = 1e-9;
/// Outcome probabilities below this are treated as exactly zero.
pub const MIN_PROB: f64 = 1e-12;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// A single complex amplitude of the joint state.
pub type Amplitude = Complex64;

/// Handle to one allocated qubit, unique within its [`Register`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QubitId(usize);

impl QubitId {
    /// Position of this qubit in the register (also its index-bit position).
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuantumError {
    #[error("register capacity of {MAX_QUBITS} qubits exceeded")]
    CapacityExceeded,
    #[error("qubit {0} is not allocated in this register")]
    UnknownQubit(usize),
    #[error("qubit {0} was already consumed by a Bell measurement")]
    ConsumedQubit(usize),
    #[error("operation requires two distinct qubits, got qubit {0} twice")]
    SameQubit(usize),
}

/// The four Bell states, in the fixed sampling order used by
/// [`Register::measure_bell`].
///
/// `PhiPlus = (|00⟩+|11⟩)/√2`, `PhiMinus = (|00⟩−|11⟩)/√2`,
/// `PsiPlus = (|01⟩+|10⟩)/√2`, `PsiMinus = (|01⟩−|10⟩)/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellKind {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellKind {
    /// All four kinds in sampling order.
    pub const ALL: [BellKind; 4] = [
        BellKind::PhiPlus,
        BellKind::PhiMinus,
        BellKind::PsiPlus,
        BellKind::PsiMinus,
    ];

    /// Real coefficient of `|ab⟩` in this Bell state (`a` first qubit of the
    /// pair, `b` second).
    pub fn coeff(self, a: usize, b: usize) -> f64 {
        match (self, a, b) {
            (BellKind::PhiPlus, 0, 0) | (BellKind::PhiPlus, 1, 1) => FRAC_1_SQRT_2,
            (BellKind::PhiMinus, 0, 0) => FRAC_1_SQRT_2,
            (BellKind::PhiMinus, 1, 1) => -FRAC_1_SQRT_2,
            (BellKind::PsiPlus, 0, 1) | (BellKind::PsiPlus, 1, 0) => FRAC_1_SQRT_2,
            (BellKind::PsiMinus, 0, 1) => FRAC_1_SQRT_2,
            (BellKind::PsiMinus, 1, 0) => -FRAC_1_SQRT_2,
            _ => 0.0,
        }
    }
}

/// Single-qubit Pauli operators available to the protocols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PauliOp {
    I,
    X,
    Z,
}

#[derive(Debug, Clone)]
struct Slot {
    owner: PartyId,
    consumed: bool,
}

/// Joint statevector of all qubits in one protocol round.
#[derive(Debug, Clone)]
pub struct Register {
    amps: Vec<Amplitude>,
    slots: Vec<Slot>,
}

impl Default for Register {
    fn default() -> Self {
        Self::new()
    }
}

impl Register {
    /// An empty register (zero qubits, scalar state 1).
    pub fn new() -> Self {
        Register {
            amps: vec![Complex64::new(1.0, 0.0)],
            slots: Vec::new(),
        }
    }

    /// Number of allocated qubits, consumed ones included.
    pub fn qubit_count(&self) -> usize {
        self.slots.len()
    }

    /// Raw amplitude vector, little-endian indexed.
    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amps
    }

    /// Current owner of a qubit.
    pub fn owner(&self, q: QubitId) -> Result<PartyId, QuantumError> {
        self.slot(q).map(|s| s.owner)
    }

    pub(crate) fn set_owner(&mut self, q: QubitId, owner: PartyId) -> Result<(), QuantumError> {
        let idx = q.index();
        let slot = self
            .slots
            .get_mut(idx)
            .ok_or(QuantumError::UnknownQubit(idx))?;
        slot.owner = owner;
        Ok(())
    }

    /// True if the qubit exists and has not been consumed.
    pub fn is_live(&self, q: QubitId) -> bool {
        self.slots
            .get(q.index())
            .map(|s| !s.consumed)
            .unwrap_or(false)
    }

    /// L2 norm of the state; 1 within [`NORM_EPS`] at all times.
    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Probability that a computational-basis measurement of every qubit in
    /// `assignment` would yield the given bits. Diagnostic only: does not
    /// disturb the state.
    pub fn prob_of(&self, assignment: &[(QubitId, u8)]) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .filter(|(idx, _)| {
                assignment
                    .iter()
                    .all(|(q, bit)| ((idx >> q.index()) & 1) as u8 == *bit)
            })
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    fn slot(&self, q: QubitId) -> Result<&Slot, QuantumError> {
        self.slots
            .get(q.index())
            .ok_or(QuantumError::UnknownQubit(q.index()))
    }

    fn check_live(&self, q: QubitId) -> Result<(), QuantumError> {
        if self.slot(q)?.consumed {
            return Err(QuantumError::ConsumedQubit(q.index()));
        }
        Ok(())
    }

    fn check_capacity(&self, extra: usize) -> Result<(), QuantumError> {
        if self.slots.len() + extra > MAX_QUBITS {
            return Err(QuantumError::CapacityExceeded);
        }
        Ok(())
    }

    fn debug_check_norm(&self) {
        debug_assert!(
            (self.norm() - 1.0).abs() < NORM_EPS,
            "register norm drifted to {}",
            self.norm()
        );
    }

    /// Appends one qubit in `|initial_bit⟩`; the state becomes
    /// `old ⊗ |initial_bit⟩`.
    pub fn alloc_qubit(&mut self, initial_bit: u8, owner: PartyId) -> Result<QubitId, QuantumError> {
        debug_assert!(initial_bit <= 1);
        self.check_capacity(1)?;
        let k = self.slots.len();
        let shifted = (initial_bit as usize) << k;
        let mut next = vec![Complex64::new(0.0, 0.0); self.amps.len() * 2];
        for (idx, amp) in self.amps.iter().enumerate() {
            next[idx | shifted] = *amp;
        }
        self.amps = next;
        self.slots.push(Slot {
            owner,
            consumed: false,
        });
        self.debug_check_norm();
        Ok(QubitId(k))
    }

    /// Appends two qubits jointly in the Bell state `kind`, unentangled with
    /// everything already in the register. Returns them in ket order (first,
    /// second).
    pub fn prepare_bell(
        &mut self,
        kind: BellKind,
        owner_a: PartyId,
        owner_b: PartyId,
    ) -> Result<(QubitId, QubitId), QuantumError> {
        self.check_capacity(2)?;
        let k = self.slots.len();
        let mut next = vec![Complex64::new(0.0, 0.0); self.amps.len() * 4];
        for (idx, amp) in self.amps.iter().enumerate() {
            for a in 0..2 {
                for b in 0..2 {
                    let c = kind.coeff(a, b);
                    if c != 0.0 {
                        next[idx | (a << k) | (b << (k + 1))] = amp * c;
                    }
                }
            }
        }
        self.amps = next;
        self.slots.push(Slot {
            owner: owner_a,
            consumed: false,
        });
        self.slots.push(Slot {
            owner: owner_b,
            consumed: false,
        });
        self.debug_check_norm();
        Ok((QubitId(k), QubitId(k + 1)))
    }

    /// Appends three qubits in the GHZ state `(|000⟩ + |111⟩)/√2`.
    pub fn prepare_ghz(
        &mut self,
        owner_a: PartyId,
        owner_b: PartyId,
        owner_c: PartyId,
    ) -> Result<(QubitId, QubitId, QubitId), QuantumError> {
        self.check_capacity(3)?;
        let k = self.slots.len();
        let mut next = vec![Complex64::new(0.0, 0.0); self.amps.len() * 8];
        for (idx, amp) in self.amps.iter().enumerate() {
            next[idx] = amp * FRAC_1_SQRT_2;
            next[idx | (0b111 << k)] = amp * FRAC_1_SQRT_2;
        }
        self.amps = next;
        for owner in [owner_a, owner_b, owner_c] {
            self.slots.push(Slot {
                owner,
                consumed: false,
            });
        }
        self.debug_check_norm();
        Ok((QubitId(k), QubitId(k + 1), QubitId(k + 2)))
    }

    /// Applies a Pauli operator to one qubit.
    pub fn apply_pauli(&mut self, op: PauliOp, q: QubitId) -> Result<(), QuantumError> {
        self.check_live(q)?;
        let mask = 1usize << q.index();
        match op {
            PauliOp::I => {}
            PauliOp::X => {
                for idx in 0..self.amps.len() {
                    if idx & mask == 0 {
                        self.amps.swap(idx, idx | mask);
                    }
                }
            }
            PauliOp::Z => {
                for idx in 0..self.amps.len() {
                    if idx & mask != 0 {
                        self.amps[idx] = -self.amps[idx];
                    }
                }
            }
        }
        self.debug_check_norm();
        Ok(())
    }

    /// Applies CNOT with the given control and target.
    pub fn apply_cnot(&mut self, control: QubitId, target: QubitId) -> Result<(), QuantumError> {
        if control == target {
            return Err(QuantumError::SameQubit(control.index()));
        }
        self.check_live(control)?;
        self.check_live(target)?;
        let cmask = 1usize << control.index();
        let tmask = 1usize << target.index();
        for idx in 0..self.amps.len() {
            if idx & cmask != 0 && idx & tmask == 0 {
                self.amps.swap(idx, idx | tmask);
            }
        }
        self.debug_check_norm();
        Ok(())
    }

    /// Applies the real rotation `R(φ) = [[cos φ, −sin φ], [sin φ, cos φ]]`
    /// to one qubit. `R(φ)|0⟩ = cos φ|0⟩ + sin φ|1⟩`.
    pub fn apply_rotation(&mut self, q: QubitId, phi: f64) -> Result<(), QuantumError> {
        self.check_live(q)?;
        let (s, c) = phi.sin_cos();
        let mask = 1usize << q.index();
        for idx in 0..self.amps.len() {
            if idx & mask == 0 {
                let a0 = self.amps[idx];
                let a1 = self.amps[idx | mask];
                self.amps[idx] = a0 * c - a1 * s;
                self.amps[idx | mask] = a0 * s + a1 * c;
            }
        }
        self.debug_check_norm();
        Ok(())
    }

    /// Measures one qubit in the computational basis, collapsing the state.
    /// The qubit stays live; measuring it again returns the same value.
    pub fn measure_computational(
        &mut self,
        q: QubitId,
        rng: &mut impl Rng,
    ) -> Result<u8, QuantumError> {
        self.check_live(q)?;
        let mask = 1usize << q.index();
        let mut probs = [0.0f64; 2];
        for (idx, amp) in self.amps.iter().enumerate() {
            probs[usize::from(idx & mask != 0)] += amp.norm_sqr();
        }
        let outcome = sample_outcome(&probs, rng);
        let keep_p = probs[outcome];
        let scale = 1.0 / keep_p.sqrt();
        for (idx, amp) in self.amps.iter_mut().enumerate() {
            if usize::from(idx & mask != 0) == outcome {
                *amp *= scale;
            } else {
                *amp = Complex64::new(0.0, 0.0);
            }
        }
        self.debug_check_norm();
        Ok(outcome as u8)
    }

    /// Measures one qubit in the basis rotated by `theta` from computational:
    /// `{cos θ|0⟩ + sin θ|1⟩, −sin θ|0⟩ + cos θ|1⟩}`. With `theta = 0` this
    /// is exactly [`Register::measure_computational`].
    pub fn measure_rotated(
        &mut self,
        q: QubitId,
        theta: f64,
        rng: &mut impl Rng,
    ) -> Result<u8, QuantumError> {
        self.apply_rotation(q, -theta)?;
        let outcome = self.measure_computational(q, rng)?;
        self.apply_rotation(q, theta)?;
        Ok(outcome)
    }

    /// Projective measurement of a qubit pair onto the four Bell states,
    /// performed in the full joint space so pairs entangled with other
    /// qubits collapse correctly. Both qubits are consumed; the remaining
    /// state is renormalized.
    pub fn measure_bell(
        &mut self,
        q1: QubitId,
        q2: QubitId,
        rng: &mut impl Rng,
    ) -> Result<BellKind, QuantumError> {
        if q1 == q2 {
            return Err(QuantumError::SameQubit(q1.index()));
        }
        self.check_live(q1)?;
        self.check_live(q2)?;
        let m1 = 1usize << q1.index();
        let m2 = 1usize << q2.index();

        // Overlap of the state with |β⟩⟨β| ⊗ I for each Bell state β:
        // c_β(rest) = Σ_{a,b} β(a,b) · ψ(rest | a·m1 | b·m2).
        let overlap = |kind: BellKind, base: usize, amps: &[Amplitude]| -> Amplitude {
            let mut c = Complex64::new(0.0, 0.0);
            for a in 0..2 {
                for b in 0..2 {
                    let w = kind.coeff(a, b);
                    if w != 0.0 {
                        c += amps[base | (a << q1.index()) | (b << q2.index())] * w;
                    }
                }
            }
            c
        };

        let mut probs = [0.0f64; 4];
        for base in 0..self.amps.len() {
            if base & (m1 | m2) != 0 {
                continue;
            }
            for (k, kind) in BellKind::ALL.iter().enumerate() {
                probs[k] += overlap(*kind, base, &self.amps).norm_sqr();
            }
        }

        let outcome = BellKind::ALL[sample_outcome(&probs, rng)];
        let scale = 1.0 / probs[BellKind::ALL.iter().position(|k| *k == outcome).unwrap()].sqrt();

        // Collapse: Pψ/‖Pψ‖ = Σ_rest c_β(rest)·|β⟩⊗|rest⟩, renormalized.
        let mut next = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for base in 0..self.amps.len() {
            if base & (m1 | m2) != 0 {
                continue;
            }
            let c = overlap(outcome, base, &self.amps) * scale;
            if c.norm_sqr() == 0.0 {
                continue;
            }
            for a in 0..2 {
                for b in 0..2 {
                    let w = outcome.coeff(a, b);
                    if w != 0.0 {
                        next[base | (a << q1.index()) | (b << q2.index())] = c * w;
                    }
                }
            }
        }
        self.amps = next;
        self.slots[q1.index()].consumed = true;
        self.slots[q2.index()].consumed = true;
        self.debug_check_norm();
        Ok(outcome)
    }
}

/// Inverse-CDF draw over outcome probabilities in their fixed order.
/// Outcomes below [`MIN_PROB`] are unreachable; the draw is consumed even
/// when only one outcome is possible, keeping streams aligned.
fn sample_outcome(probs: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last_reachable = 0;
    for (i, p) in probs.iter().enumerate() {
        if *p < MIN_PROB {
            continue;
        }
        acc += p;
        last_reachable = i;
        if u < acc {
            return i;
        }
    }
    // Numerical tail: acc summed to slightly below 1.
    last_reachable
}
