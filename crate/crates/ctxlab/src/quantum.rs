//! Dense complex linear algebra for two-qubit pure states and 4x4 observables.
//!
//! Basis ordering is |00>, |01>, |10>, |11> with the first tensor factor
//! acting on qubit A. All types are immutable values and all operations are
//! pure functions.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

/// Absolute tolerance for Hermiticity / dichotomy checks on matrix entries.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Tolerance on the residual imaginary part of an expectation value.
pub const EXPECTATION_IMAG_TOL: f64 = 1e-10;
/// Tolerance on the squared norm of a state vector.
pub const NORM_TOL: f64 = 1e-12;
/// Norm deviation up to which the state-file parser renormalizes.
pub const PARSE_NORM_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum QuantumError {
    #[error("state vector norm deviates from 1 by {0:.3e}")]
    NotNormalized(f64),
    #[error("operator is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("expectation value has imaginary part {0:.3e}")]
    ComplexExpectation(f64),
    #[error("polar angle theta={0} outside [0, pi]")]
    InvalidTheta(f64),
    #[error("line {line}: {msg}")]
    ParseError { line: usize, msg: String },
}

/// A pure two-qubit state: 4 complex amplitudes with unit norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector {
    amp: [C64; 4],
}

impl StateVector {
    /// Builds a state from amplitudes, requiring the norm to already be 1
    /// within [`NORM_TOL`].
    pub fn new(amp: [C64; 4]) -> Result<Self, QuantumError> {
        let n2: f64 = amp.iter().map(|a| a.norm_sqr()).sum();
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(QuantumError::NotNormalized((n2 - 1.0).abs()));
        }
        Ok(Self { amp })
    }

    /// Builds a state from amplitudes, renormalizing when the norm deviates
    /// by at most `tol`; larger deviations are rejected.
    pub fn new_renormalized(amp: [C64; 4], tol: f64) -> Result<Self, QuantumError> {
        let n2: f64 = amp.iter().map(|a| a.norm_sqr()).sum();
        let n = n2.sqrt();
        if (n - 1.0).abs() > tol {
            return Err(QuantumError::NotNormalized((n - 1.0).abs()));
        }
        let amp = amp.map(|a| a / n);
        Ok(Self { amp })
    }

    pub fn amplitudes(&self) -> &[C64; 4] {
        &self.amp
    }

    /// Computational basis state |k> for k in 0..4.
    pub fn basis(k: usize) -> Self {
        let mut amp = [C64::new(0.0, 0.0); 4];
        amp[k] = C64::new(1.0, 0.0);
        Self { amp }
    }

    /// The singlet (|01> - |10>)/sqrt(2).
    pub fn singlet() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            amp: [
                C64::new(0.0, 0.0),
                C64::new(s, 0.0),
                C64::new(-s, 0.0),
                C64::new(0.0, 0.0),
            ],
        }
    }

    /// The product state |u>|u> with sigma_y |u> = +|u>, i.e. |u> = (1, i)/sqrt(2).
    pub fn circ_circ() -> Self {
        let h = 0.5;
        Self {
            amp: [
                C64::new(h, 0.0),
                C64::new(0.0, h),
                C64::new(0.0, h),
                C64::new(-h, 0.0),
            ],
        }
    }

    /// cos(alpha)|00> + sin(alpha)|11>.
    pub fn schmidt(alpha: f64) -> Self {
        Self {
            amp: [
                C64::new(alpha.cos(), 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(alpha.sin(), 0.0),
            ],
        }
    }
}

/// A 2x2 complex matrix (single-qubit operator).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Operator2 {
    pub m: [[C64; 2]; 2],
}

/// A 4x4 complex matrix (two-qubit operator).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Operator4 {
    pub m: [[C64; 4]; 4],
}

/// One of the four single-qubit Pauli symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliAxis {
    I,
    X,
    Y,
    Z,
}

/// sigma_0 (identity) or the standard Pauli matrix for the given axis.
pub fn pauli(axis: PauliAxis) -> Operator2 {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let m = match axis {
        PauliAxis::I => [[one, z], [z, one]],
        PauliAxis::X => [[z, one], [one, z]],
        PauliAxis::Y => [[z, -i], [i, z]],
        PauliAxis::Z => [[one, z], [z, -one]],
    };
    Operator2 { m }
}

/// Kronecker product; the first factor acts on qubit A.
pub fn tensor(a: &Operator2, b: &Operator2) -> Operator4 {
    let mut m = [[C64::new(0.0, 0.0); 4]; 4];
    for ia in 0..2 {
        for ja in 0..2 {
            for ib in 0..2 {
                for jb in 0..2 {
                    m[2 * ia + ib][2 * ja + jb] = a.m[ia][ja] * b.m[ib][jb];
                }
            }
        }
    }
    Operator4 { m }
}

/// Shorthand for tensor(pauli(a), pauli(b)).
pub fn pauli_pair(a: PauliAxis, b: PauliAxis) -> Operator4 {
    tensor(&pauli(a), &pauli(b))
}

impl Operator4 {
    pub fn identity() -> Self {
        let mut m = [[C64::new(0.0, 0.0); 4]; 4];
        for k in 0..4 {
            m[k][k] = C64::new(1.0, 0.0);
        }
        Self { m }
    }

    pub fn matmul(&self, other: &Operator4) -> Operator4 {
        let mut m = [[C64::new(0.0, 0.0); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                let mut s = C64::new(0.0, 0.0);
                for k in 0..4 {
                    s += self.m[i][k] * other.m[k][j];
                }
                m[i][j] = s;
            }
        }
        Operator4 { m }
    }

    pub fn scale(&self, c: C64) -> Operator4 {
        let mut m = self.m;
        for row in m.iter_mut() {
            for e in row.iter_mut() {
                *e *= c;
            }
        }
        Operator4 { m }
    }

    pub fn add(&self, other: &Operator4) -> Operator4 {
        let mut m = self.m;
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] += other.m[i][j];
            }
        }
        Operator4 { m }
    }

    pub fn sub(&self, other: &Operator4) -> Operator4 {
        let mut m = self.m;
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] -= other.m[i][j];
            }
        }
        Operator4 { m }
    }

    /// Max-abs deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                d = d.max((self.m[i][j] - self.m[j][i].conj()).norm());
            }
        }
        d
    }

    /// Max-abs entry of self*self - I.
    pub fn dichotomy_defect(&self) -> f64 {
        let sq = self.matmul(self);
        let mut d: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                d = d.max((sq.m[i][j] - C64::new(expect, 0.0)).norm());
            }
        }
        d
    }

    pub fn max_abs_diff(&self, other: &Operator4) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                d = d.max((self.m[i][j] - other.m[i][j]).norm());
            }
        }
        d
    }
}

/// <psi|O|psi>, with the residual imaginary part checked against
/// [`EXPECTATION_IMAG_TOL`] before being discarded.
pub fn expectation(psi: &StateVector, o: &Operator4) -> Result<f64, QuantumError> {
    let d = o.hermiticity_defect();
    if d > HERMITICITY_TOL {
        return Err(QuantumError::NotHermitian(d));
    }
    Ok(expectation_unchecked(psi, o))
}

/// <psi|O|psi>.real without the Hermiticity precheck; callers must ensure O
/// is Hermitian. Still asserts the imaginary residue is negligible.
pub fn expectation_unchecked(psi: &StateVector, o: &Operator4) -> f64 {
    let a = psi.amplitudes();
    let mut v = C64::new(0.0, 0.0);
    for i in 0..4 {
        let mut row = C64::new(0.0, 0.0);
        for j in 0..4 {
            row += o.m[i][j] * a[j];
        }
        v += a[i].conj() * row;
    }
    debug_assert!(v.im.abs() <= EXPECTATION_IMAG_TOL, "imag residue {}", v.im);
    v.re
}

/// Left-to-right product of a non-empty operator list.
pub fn product(ops: &[Operator4]) -> Operator4 {
    assert!(!ops.is_empty(), "product of an empty operator list");
    let mut acc = ops[0];
    for o in &ops[1..] {
        acc = acc.matmul(o);
    }
    acc
}

/// True iff the max-abs entry of AB - BA is at most 1e-10.
pub fn commutes(a: &Operator4, b: &Operator4) -> bool {
    a.matmul(b).max_abs_diff(&b.matmul(a)) <= 1e-10
}

/// A direction on the Bloch sphere: theta in [0, pi], phi in [0, 2pi).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochDirection {
    pub theta: f64,
    pub phi: f64,
}

impl BlochDirection {
    pub fn new(theta: f64, phi: f64) -> Result<Self, QuantumError> {
        if !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(QuantumError::InvalidTheta(theta));
        }
        let two_pi = 2.0 * std::f64::consts::PI;
        let phi = phi.rem_euclid(two_pi);
        Ok(Self { theta, phi })
    }

    /// The unit vector (sin t cos p, sin t sin p, cos t).
    pub fn unit_vector(&self) -> [f64; 3] {
        let (st, ct) = (self.theta.sin(), self.theta.cos());
        let (sp, cp) = (self.phi.sin(), self.phi.cos());
        [st * cp, st * sp, ct]
    }

    /// Recovers (theta, phi) from a unit vector; phi = 0 at the poles.
    pub fn from_unit_vector(w: [f64; 3]) -> Self {
        let theta = w[2].clamp(-1.0, 1.0).acos();
        let phi = if w[0] == 0.0 && w[1] == 0.0 {
            0.0
        } else {
            w[1].atan2(w[0]).rem_euclid(2.0 * std::f64::consts::PI)
        };
        Self { theta, phi }
    }
}

/// The spin observable w.sigma along the given direction: traceless,
/// Hermitian, squares to the identity.
pub fn direction_observable(d: &BlochDirection) -> Operator2 {
    let [wx, wy, wz] = d.unit_vector();
    let m = [
        [C64::new(wz, 0.0), C64::new(wx, -wy)],
        [C64::new(wx, wy), C64::new(-wz, 0.0)],
    ];
    Operator2 { m }
}

// --- state file format -------------------------------------------------------
//
// One state per line: `re0 im0 re1 im1 re2 im2 re3 im3`, whitespace-separated.
// Lines starting with `#` are headers/comments; the sampler writes
// `# master_seed=<u64>` as the first line.

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = self.amp;
        write!(
            f,
            "{} {} {} {} {} {} {} {}",
            a[0].re, a[0].im, a[1].re, a[1].im, a[2].re, a[2].im, a[3].re, a[3].im
        )
    }
}

impl FromStr for StateVector {
    type Err = QuantumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let vals: Result<Vec<f64>, _> = s.split_whitespace().map(f64::from_str).collect();
        let vals = vals.map_err(|e| QuantumError::ParseError {
            line: 0,
            msg: format!("bad float: {e}"),
        })?;
        if vals.len() != 8 {
            return Err(QuantumError::ParseError {
                line: 0,
                msg: format!("expected 8 floats, got {}", vals.len()),
            });
        }
        let amp = [
            C64::new(vals[0], vals[1]),
            C64::new(vals[2], vals[3]),
            C64::new(vals[4], vals[5]),
            C64::new(vals[6], vals[7]),
        ];
        StateVector::new_renormalized(amp, PARSE_NORM_TOL)
    }
}

/// Parses a state file; `#` lines are skipped. Returns the states and the
/// master_seed header value when present.
pub fn parse_state_file(text: &str) -> Result<(Vec<StateVector>, Option<u64>), QuantumError> {
    let mut states = Vec::new();
    let mut seed = None;
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(v) = rest.trim().strip_prefix("master_seed=") {
                seed = v.trim().parse().ok();
            }
            continue;
        }
        let st = line.parse::<StateVector>().map_err(|e| match e {
            QuantumError::ParseError { msg, .. } => QuantumError::ParseError { line: k + 1, msg },
            other => QuantumError::ParseError {
                line: k + 1,
                msg: other.to_string(),
            },
        })?;
        states.push(st);
    }
    Ok((states, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn approx(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn pauli_basics() {
        let id = pauli(PauliAxis::I);
        assert_eq!(id.m[0][0], C64::new(1.0, 0.0));
        assert_eq!(id.m[0][1], C64::new(0.0, 0.0));
        let z = pauli(PauliAxis::Z);
        assert_eq!(z.m[1][1], C64::new(-1.0, 0.0));
        // each Pauli squares to the identity and is traceless
        for ax in [PauliAxis::X, PauliAxis::Y, PauliAxis::Z] {
            let p = pauli(ax);
            let sq = tensor(&p, &pauli(PauliAxis::I));
            assert!(sq.matmul(&sq).max_abs_diff(&Operator4::identity()) < 1e-15);
            assert!((p.m[0][0] + p.m[1][1]).norm() < 1e-15);
        }
    }

    #[test]
    fn tensor_identity_and_diagonal() {
        let ii = pauli_pair(PauliAxis::I, PauliAxis::I);
        assert!(ii.max_abs_diff(&Operator4::identity()) < 1e-15);
        let zz = pauli_pair(PauliAxis::Z, PauliAxis::Z);
        for k in 0..4 {
            let expect = [1.0, -1.0, -1.0, 1.0][k];
            assert_eq!(zz.m[k][k], C64::new(expect, 0.0));
        }
    }

    #[test]
    fn tensor_mixed_product_matches_direct_multiplication() {
        // (sigma_z sigma_x) x (sigma_x sigma_z) = sigma_y x sigma_y,
        // via the direct 4x4 multiplication oracle.
        let lhs = pauli_pair(PauliAxis::Z, PauliAxis::X).matmul(&pauli_pair(PauliAxis::X, PauliAxis::Z));
        let rhs = pauli_pair(PauliAxis::Y, PauliAxis::Y);
        assert!(lhs.max_abs_diff(&rhs) < 1e-15);
    }

    #[test]
    fn expectation_eigenstate_and_bell() {
        let psi00 = StateVector::basis(0);
        let zi = pauli_pair(PauliAxis::Z, PauliAxis::I);
        assert!(approx(expectation(&psi00, &zi).unwrap(), 1.0, 1e-14));

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::new([
            C64::new(s, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(s, 0.0),
        ])
        .unwrap();
        let xx = pauli_pair(PauliAxis::X, PauliAxis::X);
        assert!(approx(expectation(&bell, &xx).unwrap(), 1.0, 1e-14));
        assert!(approx(expectation(&bell, &Operator4::identity()).unwrap(), 1.0, 1e-14));
    }

    #[test]
    fn expectation_rejects_bad_inputs() {
        let mut m = Operator4::identity();
        m.m[0][1] = C64::new(0.5, 0.5); // not Hermitian
        let psi = StateVector::basis(0);
        assert!(matches!(
            expectation(&psi, &m),
            Err(QuantumError::NotHermitian(_))
        ));
        let bad = StateVector::new([
            C64::new(2.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
        ]);
        assert!(matches!(bad, Err(QuantumError::NotNormalized(_))));
    }

    #[test]
    fn commutes_cases() {
        assert!(commutes(
            &pauli_pair(PauliAxis::Z, PauliAxis::I),
            &pauli_pair(PauliAxis::I, PauliAxis::Z)
        ));
        assert!(!commutes(
            &pauli_pair(PauliAxis::Z, PauliAxis::I),
            &pauli_pair(PauliAxis::X, PauliAxis::I)
        ));
    }

    #[test]
    fn direction_observable_poles_and_equator() {
        let z = direction_observable(&BlochDirection::new(0.0, 0.0).unwrap());
        assert!(matrix2_close(&z, &pauli(PauliAxis::Z)));
        let half_pi = std::f64::consts::FRAC_PI_2;
        let x = direction_observable(&BlochDirection::new(half_pi, 0.0).unwrap());
        assert!(matrix2_close(&x, &pauli(PauliAxis::X)));
        let y = direction_observable(&BlochDirection::new(half_pi, half_pi).unwrap());
        assert!(matrix2_close(&y, &pauli(PauliAxis::Y)));
    }

    fn matrix2_close(a: &Operator2, b: &Operator2) -> bool {
        (0..2).all(|i| (0..2).all(|j| (a.m[i][j] - b.m[i][j]).norm() < 1e-12))
    }

    #[test]
    fn state_file_round_trip_and_errors() {
        let psi = StateVector::circ_circ();
        let text = format!("# master_seed=42\n{psi}\n");
        let (states, seed) = parse_state_file(&text).unwrap();
        assert_eq!(states.len(), 1);
        assert_eq!(seed, Some(42));
        assert_eq!(states[0], psi);

        let bad = "0.5 0 0.5 0 0.5\n";
        let err = parse_state_file(bad).unwrap_err();
        assert!(err.to_string().contains("line 1"));

        // norm off by more than 1e-6 is rejected
        let off = "1.1 0 0 0 0 0 0 0\n";
        assert!(parse_state_file(off).is_err());
        // small deviation gets renormalized
        let near = "1.0000001 0 0 0 0 0 0 0\n";
        let (s, _) = parse_state_file(near).unwrap();
        let n2: f64 = s[0].amplitudes().iter().map(|a| a.norm_sqr()).sum();
        assert!(approx(n2, 1.0, 1e-14));
    }

    proptest! {
        #[test]
        fn direction_observable_is_dichotomic_and_traceless(
            theta in 0.0..std::f64::consts::PI,
            phi in 0.0..(2.0 * std::f64::consts::PI),
        ) {
            let d = BlochDirection::new(theta, phi).unwrap();
            let o = direction_observable(&d);
            let o4 = tensor(&o, &pauli(PauliAxis::I));
            prop_assert!(o4.matmul(&o4).max_abs_diff(&Operator4::identity()) < 1e-12);
            prop_assert!((o.m[0][0] + o.m[1][1]).norm() < 1e-12);
            prop_assert!(o4.hermiticity_defect() < 1e-12);
        }

        #[test]
        fn expectation_global_phase_invariant(
            re in proptest::collection::vec(-1.0..1.0f64, 4),
            im in proptest::collection::vec(-1.0..1.0f64, 4),
            phase in 0.0..(2.0 * std::f64::consts::PI),
        ) {
            let mut amp = [C64::new(0.0, 0.0); 4];
            for k in 0..4 {
                amp[k] = C64::new(re[k], im[k]);
            }
            let n: f64 = amp.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            prop_assume!(n > 1e-3);
            let amp = amp.map(|a| a / n);
            let psi = StateVector::new(amp).unwrap();
            let rot = C64::from_polar(1.0, phase);
            let psi2 = StateVector::new_renormalized(amp.map(|a| a * rot), 1e-9).unwrap();
            let o = pauli_pair(PauliAxis::Y, PauliAxis::Y);
            let e1 = expectation(&psi, &o).unwrap();
            let e2 = expectation(&psi2, &o).unwrap();
            prop_assert!((e1 - e2).abs() < 1e-12);
        }

        #[test]
        fn tensor_is_bilinear(scale in -3.0..3.0f64) {
            let a = pauli(PauliAxis::X);
            let mut sa = a;
            for i in 0..2 { for j in 0..2 { sa.m[i][j] *= C64::new(scale, 0.0); } }
            let b = pauli(PauliAxis::Y);
            let lhs = tensor(&sa, &b);
            let rhs = tensor(&a, &b).scale(C64::new(scale, 0.0));
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
    }
}
