//! Parameterized circuits built from Pauli-generator gates.
//!
//! A parametric element realizes `U_a(t) = exp(i t G_a)` with
//! `G_a = sum_mu g_{a,mu} P_{a,mu}`. Elements are applied in list order, so the
//! last element is the leftmost factor of the operator product.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{PauliString, MAX_QUBITS};
use crate::state::Statevector;

const IMAG: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorTerm {
    pub g: f64,
    pub pauli: PauliString,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum NamedKind {
    H,
    S,
    Sdg,
    Cnot,
    Cz,
}

impl NamedKind {
    fn arity(self) -> usize {
        match self {
            NamedKind::H | NamedKind::S | NamedKind::Sdg => 1,
            NamedKind::Cnot | NamedKind::Cz => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Entangler {
    Cz,
    Cnot,
}

#[derive(Clone, Debug, PartialEq)]
pub enum GateElement {
    Parametric { param_index: usize, generator: Vec<GeneratorTerm> },
    FixedRotation { angle: f64, pauli: PauliString },
    Named { kind: NamedKind, qubits: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    elements: Vec<GateElement>,
    /// Element index of each parameter.
    param_elements: Vec<usize>,
    /// Whether each element's generator terms pairwise commute.
    commuting: Vec<bool>,
}

/// One insertion: after the parametric element at `position`, apply `i P_mu`
/// (or `exp(sign * i pi P_mu / 4)` in shift mode).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Insertion {
    pub position: usize,
    pub mu: usize,
    pub sign: i8,
}

impl Insertion {
    pub fn new(position: usize, mu: usize) -> Insertion {
        Insertion { position, mu, sign: 1 }
    }

    pub fn with_sign(position: usize, mu: usize, sign: i8) -> Insertion {
        Insertion { position, mu, sign }
    }
}

/// Insertions sorted by position; equal positions keep their listed order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct InsertionSpec(Vec<Insertion>);

impl InsertionSpec {
    pub fn new(mut entries: Vec<Insertion>) -> InsertionSpec {
        entries.sort_by_key(|e| e.position);
        InsertionSpec(entries)
    }

    pub fn empty() -> InsertionSpec {
        InsertionSpec(Vec::new())
    }

    pub fn entries(&self) -> &[Insertion] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Circuit {
    pub fn new(n_qubits: usize, elements: Vec<GateElement>) -> Result<Circuit> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::InvalidCircuit(format!("unsupported qubit count {n_qubits}")));
        }
        let mut slots: Vec<Option<usize>> = Vec::new();
        let mut commuting = Vec::with_capacity(elements.len());
        for (k, el) in elements.iter().enumerate() {
            match el {
                GateElement::Parametric { param_index, generator } => {
                    if generator.is_empty() {
                        return Err(Error::InvalidCircuit(format!("gate {k}: empty generator")));
                    }
                    for t in generator {
                        if !t.g.is_finite() || t.g == 0.0 {
                            return Err(Error::InvalidCircuit(format!("gate {k}: generator weight {} must be finite and nonzero", t.g)));
                        }
                        check_width(k, &t.pauli, n_qubits)?;
                    }
                    if *param_index >= slots.len() {
                        slots.resize(param_index + 1, None);
                    }
                    if slots[*param_index].replace(k).is_some() {
                        return Err(Error::InvalidCircuit(format!("parameter {param_index} used by more than one gate")));
                    }
                    let comm = generator
                        .iter()
                        .enumerate()
                        .all(|(i, a)| generator[i + 1..].iter().all(|b| a.pauli.commutes_with(&b.pauli)));
                    commuting.push(comm);
                }
                GateElement::FixedRotation { angle, pauli } => {
                    if !angle.is_finite() {
                        return Err(Error::InvalidCircuit(format!("gate {k}: non-finite angle")));
                    }
                    check_width(k, pauli, n_qubits)?;
                    commuting.push(true);
                }
                GateElement::Named { kind, qubits } => {
                    if qubits.len() != kind.arity() {
                        return Err(Error::InvalidCircuit(format!("gate {k}: {kind:?} takes {} qubit(s)", kind.arity())));
                    }
                    if qubits.iter().any(|&q| q >= n_qubits) {
                        return Err(Error::InvalidCircuit(format!("gate {k}: qubit out of range")));
                    }
                    if qubits.len() == 2 && qubits[0] == qubits[1] {
                        return Err(Error::InvalidCircuit(format!("gate {k}: repeated qubit")));
                    }
                    commuting.push(true);
                }
            }
        }
        let param_elements = slots
            .into_iter()
            .enumerate()
            .map(|(a, s)| s.ok_or_else(|| Error::InvalidCircuit(format!("parameter {a} has no gate"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Circuit { n_qubits, elements, param_elements, commuting })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.param_elements.len()
    }

    pub fn elements(&self) -> &[GateElement] {
        &self.elements
    }

    /// Element index of parameter `a`.
    pub fn param_element(&self, a: usize) -> usize {
        self.param_elements[a]
    }

    pub fn generator(&self, a: usize) -> &[GeneratorTerm] {
        match &self.elements[self.param_elements[a]] {
            GateElement::Parametric { generator, .. } => generator,
            _ => unreachable!("parameter slots point at parametric gates"),
        }
    }

    /// The same circuit on a larger register; the extra qubits are untouched.
    pub fn padded(&self, n_qubits: usize) -> Circuit {
        let elements = self
            .elements
            .iter()
            .map(|el| match el {
                GateElement::Parametric { param_index, generator } => GateElement::Parametric {
                    param_index: *param_index,
                    generator: generator
                        .iter()
                        .map(|t| GeneratorTerm { g: t.g, pauli: t.pauli.padded(n_qubits) })
                        .collect(),
                },
                GateElement::FixedRotation { angle, pauli } => {
                    GateElement::FixedRotation { angle: *angle, pauli: pauli.padded(n_qubits) }
                }
                other => other.clone(),
            })
            .collect();
        Circuit { n_qubits, elements, param_elements: self.param_elements.clone(), commuting: self.commuting.clone() }
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.n_params() {
            return Err(Error::DimensionMismatch { expected: self.n_params(), got: theta.len() });
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite("theta".into()));
        }
        Ok(())
    }

    /// Applies element `k` (or its inverse) to `state`.
    pub fn apply_element(&self, state: &mut Statevector, k: usize, theta: &[f64], inverse: bool) -> Result<()> {
        let sign = if inverse { -1.0 } else { 1.0 };
        match &self.elements[k] {
            GateElement::Parametric { param_index, generator } => {
                let t = sign * theta[*param_index];
                if self.commuting[k] {
                    for term in generator {
                        state.apply_pauli_rotation(&term.pauli, t * term.g)?;
                    }
                    Ok(())
                } else {
                    apply_generator_exp(state, generator, t)
                }
            }
            GateElement::FixedRotation { angle, pauli } => state.apply_pauli_rotation(pauli, sign * angle),
            GateElement::Named { kind, qubits } => match kind {
                NamedKind::H => state.apply_h(qubits[0]),
                NamedKind::S => state.apply_s(qubits[0], inverse),
                NamedKind::Sdg => state.apply_s(qubits[0], !inverse),
                NamedKind::Cnot => state.apply_cnot(qubits[0], qubits[1]),
                NamedKind::Cz => state.apply_cz(qubits[0], qubits[1]),
            },
        }
    }

    /// Runs the circuit on `init`, calling `after(k, state)` after each element.
    pub fn run_with<F>(&self, theta: &[f64], mut state: Statevector, mut after: F) -> Result<Statevector>
    where
        F: FnMut(usize, &mut Statevector) -> Result<()>,
    {
        self.check_theta(theta)?;
        if state.n_qubits() != self.n_qubits {
            return Err(Error::QubitMismatch { left: self.n_qubits, right: state.n_qubits() });
        }
        for k in 0..self.elements.len() {
            self.apply_element(&mut state, k, theta, false)?;
            after(k, &mut state)?;
        }
        Ok(state)
    }

    /// `U(theta)|0...0>`.
    pub fn prepare_state(&self, theta: &[f64]) -> Result<Statevector> {
        self.run_with(theta, Statevector::zero_state(self.n_qubits), |_, _| Ok(()))
    }

    /// Checks that every insertion targets a parametric element and a valid term.
    pub fn validate_insertions(&self, ins: &InsertionSpec) -> Result<()> {
        for e in ins.entries() {
            match self.elements.get(e.position) {
                Some(GateElement::Parametric { generator, .. }) => {
                    if e.mu >= generator.len() {
                        return Err(Error::InvalidInsertion(format!(
                            "term {} out of range at position {} ({} terms)",
                            e.mu,
                            e.position,
                            generator.len()
                        )));
                    }
                    if e.sign != 1 && e.sign != -1 {
                        return Err(Error::InvalidInsertion(format!("sign {} is not +/-1", e.sign)));
                    }
                }
                Some(_) => {
                    return Err(Error::InvalidInsertion(format!("element {} is not parametric", e.position)));
                }
                None => return Err(Error::InvalidInsertion(format!("position {} out of range", e.position))),
            }
        }
        Ok(())
    }

    pub(crate) fn insertion_pauli(&self, e: &Insertion) -> &PauliString {
        match &self.elements[e.position] {
            GateElement::Parametric { generator, .. } => &generator[e.mu].pauli,
            _ => unreachable!("validated insertion"),
        }
    }

    /// Insertion state. Each entry applies `i P_{a,mu}` right after its element;
    /// with `shift` it applies `exp(sign * i pi P / 4)` instead.
    pub fn prepare_phi_state(&self, theta: &[f64], ins: &InsertionSpec, shift: bool) -> Result<Statevector> {
        self.validate_insertions(ins)?;
        let entries = ins.entries();
        let mut next = 0;
        self.run_with(theta, Statevector::zero_state(self.n_qubits), |k, st| {
            while next < entries.len() && entries[next].position == k {
                let e = &entries[next];
                let p = self.insertion_pauli(e);
                if shift {
                    st.apply_pauli_rotation(p, e.sign as f64 * std::f64::consts::FRAC_PI_4)?;
                } else {
                    st.apply_pauli_scaled(p, IMAG)?;
                }
                next += 1;
            }
            Ok(())
        })
    }

    /// `d^k psi / d theta_{a1} ... d theta_{ak}` for the listed parameters
    /// (repeats allowed), built by inserting `i G_a` after each gate.
    pub fn derivative_state(&self, theta: &[f64], params: &[usize]) -> Result<Statevector> {
        let mut by_elem: Vec<usize> = Vec::with_capacity(params.len());
        for &a in params {
            if a >= self.n_params() {
                return Err(Error::InvalidInsertion(format!("parameter {a} out of range")));
            }
            by_elem.push(self.param_elements[a]);
        }
        by_elem.sort_unstable();
        let mut next = 0;
        self.run_with(theta, Statevector::zero_state(self.n_qubits), |k, st| {
            while next < by_elem.len() && by_elem[next] == k {
                if let GateElement::Parametric { generator, .. } = &self.elements[k] {
                    *st = apply_i_generator(st, generator)?;
                }
                next += 1;
            }
            Ok(())
        })
    }

    /// Hardware-efficient ansatz: `depth + 1` layers of per-qubit `R_x` then
    /// `R_y` rotations (generators `-X/2`, `-Y/2`), separated by a linear chain
    /// of entanglers.
    pub fn hardware_efficient(n_qubits: usize, depth: usize, entangler: Entangler) -> Result<Circuit> {
        if n_qubits == 0 || depth == 0 {
            return Err(Error::InvalidCircuit("hardware-efficient ansatz needs n_qubits >= 1 and depth >= 1".into()));
        }
        let mut elements = Vec::new();
        let mut idx = 0;
        for layer in 0..=depth {
            for q in 0..n_qubits {
                for axis in [crate::pauli::Pauli::X, crate::pauli::Pauli::Y] {
                    let pauli = PauliString::from_sparse(n_qubits, &[(q, axis)])?;
                    elements.push(GateElement::Parametric {
                        param_index: idx,
                        generator: vec![GeneratorTerm { g: -0.5, pauli }],
                    });
                    idx += 1;
                }
            }
            if layer < depth {
                let kind = match entangler {
                    Entangler::Cz => NamedKind::Cz,
                    Entangler::Cnot => NamedKind::Cnot,
                };
                for q in 0..n_qubits.saturating_sub(1) {
                    elements.push(GateElement::Named { kind, qubits: vec![q, q + 1] });
                }
            }
        }
        Circuit::new(n_qubits, elements)
    }

    /// Single-qubit `R_y` ansatz: one parametric gate with generator `-Y/2`.
    pub fn y_rotation() -> Circuit {
        let pauli: PauliString = "Y".parse().expect("valid label");
        Circuit::new(1, vec![GateElement::Parametric { param_index: 0, generator: vec![GeneratorTerm { g: -0.5, pauli }] }])
            .expect("valid circuit")
    }

    pub fn from_json(text: &str) -> Result<Circuit> {
        let file: CircuitFile = serde_json::from_str(text)?;
        let n = file.n_qubits;
        let mut elements = Vec::with_capacity(file.gates.len());
        for (k, gate) in file.gates.into_iter().enumerate() {
            let parse = |s: &str| -> Result<PauliString> {
                let p: PauliString = s.parse().map_err(|_| Error::Parse(format!("gates[{k}]: invalid Pauli string {s:?}")))?;
                if p.n_qubits() != n {
                    return Err(Error::Parse(format!("gates[{k}]: Pauli string {s:?} has length {}, expected {n}", p.n_qubits())));
                }
                Ok(p)
            };
            elements.push(match gate {
                GateFile::Param { index, generator } => GateElement::Parametric {
                    param_index: index,
                    generator: generator
                        .iter()
                        .map(|t| Ok(GeneratorTerm { g: t.g, pauli: parse(&t.pauli)? }))
                        .collect::<Result<Vec<_>>>()?,
                },
                GateFile::Rot { angle, pauli } => GateElement::FixedRotation { angle, pauli: parse(&pauli)? },
                GateFile::Named { kind, qubits } => GateElement::Named { kind, qubits },
            });
        }
        Circuit::new(n, elements)
    }

    pub fn to_json(&self) -> String {
        let gates = self
            .elements
            .iter()
            .map(|el| match el {
                GateElement::Parametric { param_index, generator } => GateFile::Param {
                    index: *param_index,
                    generator: generator.iter().map(|t| TermFile { g: t.g, pauli: t.pauli.to_string() }).collect(),
                },
                GateElement::FixedRotation { angle, pauli } => GateFile::Rot { angle: *angle, pauli: pauli.to_string() },
                GateElement::Named { kind, qubits } => GateFile::Named { kind: *kind, qubits: qubits.clone() },
            })
            .collect();
        let file = CircuitFile { n_qubits: self.n_qubits, gates };
        serde_json::to_string_pretty(&file).expect("serializable")
    }
}

fn check_width(k: usize, p: &PauliString, n: usize) -> Result<()> {
    if p.n_qubits() != n {
        return Err(Error::InvalidCircuit(format!("gate {k}: Pauli string on {} qubits, circuit has {n}", p.n_qubits())));
    }
    Ok(())
}

/// `i G |v>`.
pub(crate) fn apply_i_generator(v: &Statevector, generator: &[GeneratorTerm]) -> Result<Statevector> {
    let mut out = Statevector::zeros(v.n_qubits());
    for t in generator {
        let mut pv = v.clone();
        pv.apply_pauli_scaled(&t.pauli, IMAG * t.g)?;
        out.add_scaled(Complex64::new(1.0, 0.0), &pv);
    }
    Ok(out)
}

/// `exp(i t G)|v>` for non-commuting generator terms: Taylor series with
/// scaling so that each sub-step has `|t| * sum|g| <= 1/2`.
fn apply_generator_exp(state: &mut Statevector, generator: &[GeneratorTerm], t: f64) -> Result<()> {
    let scale: f64 = generator.iter().map(|g| g.g.abs()).sum::<f64>() * t.abs();
    let steps = (scale / 0.5).ceil().max(1.0) as usize;
    let dt = t / steps as f64;
    for _ in 0..steps {
        let mut term = state.clone();
        let mut acc = state.clone();
        for k in 1..64 {
            let mut next = apply_i_generator(&term, generator)?;
            next.scale(Complex64::new(dt / k as f64, 0.0));
            term = next;
            acc.add_scaled(Complex64::new(1.0, 0.0), &term);
            if term.norm_sqr() < 1e-36 {
                break;
            }
        }
        *state = acc;
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitFile {
    n_qubits: usize,
    gates: Vec<GateFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum GateFile {
    Param { index: usize, generator: Vec<TermFile> },
    Rot { angle: f64, pauli: String },
    Named { kind: NamedKind, qubits: Vec<usize> },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermFile {
    g: f64,
    pauli: String,
}
