//! Uniform representation of the noncontextuality / Bell functionals
//! (Peres-Mermin square, its state-dependent C variant, the 18-observable
//! inequality, CHSH) with brute-force classical bounds.
//!
//! A functional is a signed list of contexts over abstract observable
//! indices; pairing it with an operator realization makes it evaluable on a
//! state. Classical bounds come from exhaustive enumeration of all +-1
//! assignments, exact integer arithmetic throughout.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use thiserror::Error;

use crate::quantum::{
    commutes, direction_observable, expectation, pauli, product, tensor, BlochDirection,
    Operator4, PauliAxis, QuantumError, StateVector, C64,
};

/// Enumeration guard: refuse brute force beyond 2^24 assignments.
pub const MAX_ENUM_OBSERVABLES: usize = 24;

/// Bundled text of the 18-ray realization shipped with the crate.
pub const CABELLO18_DATA: &str = include_str!("../data/cabello18.txt");

#[derive(Debug, Error)]
pub enum FunctionalError {
    #[error("term has no members")]
    EmptyTerm,
    #[error("duplicate observable index {0} within one term")]
    DuplicateMember(usize),
    #[error("observable index {index} out of range (n_observables = {n})")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("{n} observables exceed the enumeration guard of {MAX_ENUM_OBSERVABLES}")]
    TooManyObservables { n: usize },
    #[error("realization has {got} observables, functional needs {want}")]
    RealizationSize { got: usize, want: usize },
    #[error("observable {0} is not Hermitian (defect {1:.3e})")]
    NotHermitian(usize, f64),
    #[error("observable {0} is not dichotomic (defect {1:.3e})")]
    NotDichotomic(usize, f64),
    #[error("observables {0} and {1} in term {2} do not commute")]
    Incompatible(usize, usize, usize),
    #[error("realization file, line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("basis {0} is not orthonormal (max Gram defect {1:.3e})")]
    NotOrthonormal(usize, f64),
    #[error("ray {0} appears in {1} bases instead of exactly 2")]
    BadSharing(usize, usize),
    #[error("context product of basis {0} deviates from -I by {1:.3e}")]
    ContextProductNotMinusI(usize, f64),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

/// One signed correlator: a product of mutually compatible observables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextTerm {
    pub sign: i64,
    pub members: Vec<usize>,
}

impl ContextTerm {
    pub fn new(sign: i64, members: Vec<usize>) -> Result<Self, FunctionalError> {
        assert!(sign == 1 || sign == -1);
        if members.is_empty() {
            return Err(FunctionalError::EmptyTerm);
        }
        for (k, &m) in members.iter().enumerate() {
            if members[..k].contains(&m) {
                return Err(FunctionalError::DuplicateMember(m));
            }
        }
        Ok(Self { sign, members })
    }
}

/// A signed sum of context terms over n abstract dichotomic observables,
/// together with its classical (NCHV/LHV) bound.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityFunctional {
    pub name: String,
    pub n_observables: usize,
    pub terms: Vec<ContextTerm>,
    pub classical_bound: i64,
}

impl InequalityFunctional {
    /// Validates indices and fills the classical bound by enumeration.
    pub fn new(
        name: &str,
        n_observables: usize,
        terms: Vec<ContextTerm>,
    ) -> Result<Self, FunctionalError> {
        for t in &terms {
            for &m in &t.members {
                if m >= n_observables {
                    return Err(FunctionalError::IndexOutOfRange {
                        index: m,
                        n: n_observables,
                    });
                }
            }
        }
        let mut f = Self {
            name: name.to_string(),
            n_observables,
            terms,
            classical_bound: 0,
        };
        f.classical_bound = f.compute_classical_bound()?;
        Ok(f)
    }

    /// Max over all 2^n sign assignments of the signed term sum. Each term
    /// contributes sign * parity of its members under the assignment.
    pub fn compute_classical_bound(&self) -> Result<i64, FunctionalError> {
        let n = self.n_observables;
        if n > MAX_ENUM_OBSERVABLES {
            return Err(FunctionalError::TooManyObservables { n });
        }
        let masks: Vec<(i64, u32)> = self
            .terms
            .iter()
            .map(|t| {
                let mut mask = 0u32;
                for &m in &t.members {
                    mask |= 1 << m;
                }
                (t.sign, mask)
            })
            .collect();
        let mut best = i64::MIN;
        for assignment in 0u32..(1u32 << n) {
            let mut value = 0i64;
            for &(sign, mask) in &masks {
                // bit set means the observable takes value -1
                let neg = (assignment & mask).count_ones() % 2 == 1;
                value += if neg { -sign } else { sign };
            }
            best = best.max(value);
        }
        Ok(best)
    }

    /// 2^n, the number of enumerated assignments.
    pub fn assignment_count(&self) -> u64 {
        1u64 << self.n_observables
    }
}

/// Concrete 4x4 observables backing a functional, one per index.
#[derive(Debug, Clone)]
pub struct OperatorRealization {
    pub observables: Vec<Operator4>,
}

const REALIZATION_TOL: f64 = 1e-10;

impl OperatorRealization {
    /// Checks Hermiticity and dichotomy of every observable plus pairwise
    /// commutation inside every term of `f`.
    pub fn validate(&self, f: &InequalityFunctional) -> Result<(), FunctionalError> {
        if self.observables.len() != f.n_observables {
            return Err(FunctionalError::RealizationSize {
                got: self.observables.len(),
                want: f.n_observables,
            });
        }
        for (k, o) in self.observables.iter().enumerate() {
            let h = o.hermiticity_defect();
            if h > REALIZATION_TOL {
                return Err(FunctionalError::NotHermitian(k, h));
            }
            let d = o.dichotomy_defect();
            if d > REALIZATION_TOL {
                return Err(FunctionalError::NotDichotomic(k, d));
            }
        }
        for (ti, t) in f.terms.iter().enumerate() {
            for (a, &i) in t.members.iter().enumerate() {
                for &j in &t.members[a + 1..] {
                    if !commutes(&self.observables[i], &self.observables[j]) {
                        return Err(FunctionalError::Incompatible(i, j, ti));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Sum over terms of sign * <psi| product(members) |psi>. Rejects
/// realizations whose contexts are not mutually compatible.
pub fn eval(
    f: &InequalityFunctional,
    r: &OperatorRealization,
    psi: &StateVector,
) -> Result<f64, FunctionalError> {
    r.validate(f)?;
    let mut total = 0.0;
    for t in &f.terms {
        let ops: Vec<Operator4> = t.members.iter().map(|&m| r.observables[m]).collect();
        let ctx = product(&ops);
        total += t.sign as f64 * expectation(psi, &ctx)?;
    }
    Ok(total)
}

/// The nine Pauli-product observables of the quantum square, row-major:
/// row 1 (zI, Iz, zz), row 2 (Ix, xI, xx), row 3 (zx, xz, yy).
fn pm_observables() -> Vec<Operator4> {
    use PauliAxis::*;
    [
        (Z, I),
        (I, Z),
        (Z, Z),
        (I, X),
        (X, I),
        (X, X),
        (Z, X),
        (X, Z),
        (Y, Y),
    ]
    .iter()
    .map(|&(a, b)| tensor(&pauli(a), &pauli(b)))
    .collect()
}

/// Peres-Mermin functional: three rows and the first two columns with sign
/// +1, the third column with sign -1; classical bound 4, quantum value 6 on
/// every state.
pub fn build_pm() -> (InequalityFunctional, OperatorRealization) {
    let terms = vec![
        ContextTerm::new(1, vec![0, 1, 2]).unwrap(),
        ContextTerm::new(1, vec![3, 4, 5]).unwrap(),
        ContextTerm::new(1, vec![6, 7, 8]).unwrap(),
        ContextTerm::new(1, vec![0, 3, 6]).unwrap(),
        ContextTerm::new(1, vec![1, 4, 7]).unwrap(),
        ContextTerm::new(-1, vec![2, 5, 8]).unwrap(),
    ];
    let f = InequalityFunctional::new("pm", 9, terms).unwrap();
    let r = OperatorRealization {
        observables: pm_observables(),
    };
    (f, r)
}

/// State-dependent variant of the square with the corner observable dropped
/// (replaced by the identity): 8 observables, classical bound 4, quantum
/// range [2, 6]. Algebraically equal to 4 + 2<sigma_y x sigma_y>.
pub fn build_c() -> (InequalityFunctional, OperatorRealization) {
    let terms = vec![
        ContextTerm::new(1, vec![0, 1, 2]).unwrap(),
        ContextTerm::new(1, vec![3, 4, 5]).unwrap(),
        ContextTerm::new(1, vec![6, 7]).unwrap(),
        ContextTerm::new(1, vec![0, 3, 6]).unwrap(),
        ContextTerm::new(1, vec![1, 4, 7]).unwrap(),
        ContextTerm::new(-1, vec![2, 5]).unwrap(),
    ];
    let f = InequalityFunctional::new("c", 8, terms).unwrap();
    let mut obs = pm_observables();
    obs.truncate(8);
    let r = OperatorRealization { observables: obs };
    (f, r)
}

/// Measurement settings of a CHSH experiment: Bloch directions for
/// A1, A2, B1, B2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSettings {
    pub a1: BlochDirection,
    pub a2: BlochDirection,
    pub b1: BlochDirection,
    pub b2: BlochDirection,
}

/// CHSH functional +A1B1 +A1B2 +A2B1 -A2B2 with the four direction
/// observables tensored against the identity on the opposite side;
/// classical bound 2.
pub fn build_chsh(s: &MeasurementSettings) -> (InequalityFunctional, OperatorRealization) {
    let terms = vec![
        ContextTerm::new(1, vec![0, 2]).unwrap(),
        ContextTerm::new(1, vec![0, 3]).unwrap(),
        ContextTerm::new(1, vec![1, 2]).unwrap(),
        ContextTerm::new(-1, vec![1, 3]).unwrap(),
    ];
    let f = InequalityFunctional::new("chsh", 4, terms).unwrap();
    let id = pauli(PauliAxis::I);
    let r = OperatorRealization {
        observables: vec![
            tensor(&direction_observable(&s.a1), &id),
            tensor(&direction_observable(&s.a2), &id),
            tensor(&id, &direction_observable(&s.b1)),
            tensor(&id, &direction_observable(&s.b2)),
        ],
    };
    (f, r)
}

/// 18-observable functional loaded from a ray data file at the given path.
pub fn build_cabello18(
    path: &Path,
) -> Result<(InequalityFunctional, OperatorRealization), FunctionalError> {
    let text = std::fs::read_to_string(path).map_err(|e| FunctionalError::Malformed {
        line: 0,
        msg: format!("cannot read {}: {e}", path.display()),
    })?;
    build_cabello18_from_str(&text)
}

/// Same as [`build_cabello18`] for already-loaded text; the crate's bundled
/// realization is [`CABELLO18_DATA`].
pub fn build_cabello18_from_str(
    text: &str,
) -> Result<(InequalityFunctional, OperatorRealization), FunctionalError> {
    let bases = parse_ray_file(text)?;
    if bases.len() != 9 {
        return Err(FunctionalError::Malformed {
            line: 0,
            msg: format!("expected 9 bases, found {}", bases.len()),
        });
    }

    for (bid, vecs) in &bases {
        if vecs.len() != 4 {
            return Err(FunctionalError::Malformed {
                line: 0,
                msg: format!("basis {bid} has {} vectors instead of 4", vecs.len()),
            });
        }
        let mut defect: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let g: Complex64 = (0..4).map(|k| vecs[i][k].conj() * vecs[j][k]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((g - Complex64::new(expect, 0.0)).norm());
            }
        }
        if defect > REALIZATION_TOL {
            return Err(FunctionalError::NotOrthonormal(*bid, defect));
        }
    }

    // group vectors into rays (equal up to phase) and demand each ray shows
    // up in exactly two distinct bases
    let mut rays: Vec<[C64; 4]> = Vec::new();
    let mut ray_bases: Vec<Vec<usize>> = Vec::new();
    let mut terms = Vec::new();
    let basis_ids: Vec<usize> = bases.keys().copied().collect();
    let mut members_per_basis: Vec<Vec<usize>> = Vec::new();
    for bid in &basis_ids {
        let mut members = Vec::new();
        for v in &bases[bid] {
            let idx = rays.iter().position(|r| {
                let ov: Complex64 = (0..4).map(|k| r[k].conj() * v[k]).sum();
                (ov.norm() - 1.0).abs() <= REALIZATION_TOL
            });
            let idx = match idx {
                Some(i) => i,
                None => {
                    rays.push(*v);
                    ray_bases.push(Vec::new());
                    rays.len() - 1
                }
            };
            ray_bases[idx].push(*bid);
            members.push(idx);
        }
        members_per_basis.push(members);
    }
    if rays.len() != 18 {
        return Err(FunctionalError::Malformed {
            line: 0,
            msg: format!("expected 18 distinct rays, found {}", rays.len()),
        });
    }
    for (k, bs) in ray_bases.iter().enumerate() {
        let mut distinct = bs.clone();
        distinct.dedup();
        if distinct.len() != 2 || bs.len() != 2 {
            return Err(FunctionalError::BadSharing(k, distinct.len()));
        }
    }

    // O = 2|v><v| - I
    let observables: Vec<Operator4> = rays
        .iter()
        .map(|v| {
            let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    m[i][j] = 2.0 * v[i] * v[j].conj();
                }
                m[i][i] -= Complex64::new(1.0, 0.0);
            }
            Operator4 { m }
        })
        .collect();

    // every context product must equal -I
    let minus_i = Operator4::identity().scale(Complex64::new(-1.0, 0.0));
    for (slot, members) in members_per_basis.iter().enumerate() {
        let ops: Vec<Operator4> = members.iter().map(|&m| observables[m]).collect();
        let d = product(&ops).max_abs_diff(&minus_i);
        if d > REALIZATION_TOL {
            return Err(FunctionalError::ContextProductNotMinusI(basis_ids[slot], d));
        }
        terms.push(ContextTerm::new(-1, members.clone())?);
    }

    let f = InequalityFunctional::new("cabello18", 18, terms)?;
    let r = OperatorRealization { observables };
    r.validate(&f)?;
    Ok((f, r))
}

/// Parses `basis_id re0 im0 ... re3 im3` lines into normalized vectors keyed
/// by basis id. `#` lines and blanks are skipped.
fn parse_ray_file(text: &str) -> Result<BTreeMap<usize, Vec<[C64; 4]>>, FunctionalError> {
    let mut bases: BTreeMap<usize, Vec<[C64; 4]>> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 9 {
            return Err(FunctionalError::Malformed {
                line: lineno + 1,
                msg: format!("expected 9 fields, got {}", fields.len()),
            });
        }
        let bid: usize = fields[0].parse().map_err(|e| FunctionalError::Malformed {
            line: lineno + 1,
            msg: format!("bad basis id: {e}"),
        })?;
        let mut v = [Complex64::new(0.0, 0.0); 4];
        for k in 0..4 {
            let re: f64 = fields[1 + 2 * k]
                .parse()
                .map_err(|e| FunctionalError::Malformed {
                    line: lineno + 1,
                    msg: format!("bad float: {e}"),
                })?;
            let im: f64 = fields[2 + 2 * k]
                .parse()
                .map_err(|e| FunctionalError::Malformed {
                    line: lineno + 1,
                    msg: format!("bad float: {e}"),
                })?;
            v[k] = Complex64::new(re, im);
        }
        let norm: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(FunctionalError::Malformed {
                line: lineno + 1,
                msg: "zero vector".into(),
            });
        }
        for c in v.iter_mut() {
            *c /= norm;
        }
        bases.entry(bid).or_default().push(v);
    }
    Ok(bases)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::{random_pure_state, SeedSpec};
    use crate::quantum::pauli_pair;
    use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

    /// Independent straightforward oracle for small n: materializes every
    /// assignment as a vector of +-1 values and loops over terms.
    fn brute_force_oracle(f: &InequalityFunctional) -> i64 {
        assert!(f.n_observables <= 10);
        let mut best = i64::MIN;
        for a in 0u32..(1 << f.n_observables) {
            let vals: Vec<i64> = (0..f.n_observables)
                .map(|k| if a & (1 << k) != 0 { -1 } else { 1 })
                .collect();
            let mut total = 0;
            for t in &f.terms {
                let mut p = t.sign;
                for &m in &t.members {
                    p *= vals[m];
                }
                total += p;
            }
            best = best.max(total);
        }
        best
    }

    #[test]
    fn classical_bounds() {
        let (pm, _) = build_pm();
        assert_eq!(pm.classical_bound, 4);
        let (c, _) = build_c();
        assert_eq!(c.classical_bound, 4);
        let s = chsh_optimal_settings();
        let (chsh, _) = build_chsh(&s);
        assert_eq!(chsh.classical_bound, 2);
        let (cab, _) = build_cabello18_from_str(CABELLO18_DATA).unwrap();
        assert_eq!(cab.classical_bound, 7);
        assert_eq!(cab.assignment_count(), 262144);
    }

    #[test]
    fn classical_bound_matches_independent_oracle() {
        let (pm, _) = build_pm();
        assert_eq!(pm.classical_bound, brute_force_oracle(&pm));
        let (c, _) = build_c();
        assert_eq!(c.classical_bound, brute_force_oracle(&c));
        let (chsh, _) = build_chsh(&chsh_optimal_settings());
        assert_eq!(chsh.classical_bound, brute_force_oracle(&chsh));
    }

    #[test]
    fn classical_bound_symmetries() {
        // permuting observable indices leaves the bound unchanged
        let (c, _) = build_c();
        let perm = [3usize, 1, 0, 7, 4, 2, 6, 5];
        let terms: Vec<ContextTerm> = c
            .terms
            .iter()
            .map(|t| {
                ContextTerm::new(t.sign, t.members.iter().map(|&m| perm[m]).collect()).unwrap()
            })
            .collect();
        let permuted = InequalityFunctional::new("c-perm", 8, terms).unwrap();
        assert_eq!(permuted.classical_bound, c.classical_bound);
    }

    #[test]
    fn pm_row_column_products() {
        let (_, r) = build_pm();
        let id = Operator4::identity();
        for row in [[0, 1, 2], [3, 4, 5], [6, 7, 8]] {
            let ops: Vec<_> = row.iter().map(|&k| r.observables[k]).collect();
            assert!(product(&ops).max_abs_diff(&id) < 1e-12);
        }
        for col in [[0, 3, 6], [1, 4, 7]] {
            let ops: Vec<_> = col.iter().map(|&k| r.observables[k]).collect();
            assert!(product(&ops).max_abs_diff(&id) < 1e-12);
        }
        let ops: Vec<_> = [2, 5, 8].iter().map(|&k| r.observables[k]).collect();
        let minus_i = id.scale(Complex64::new(-1.0, 0.0));
        assert!(product(&ops).max_abs_diff(&minus_i) < 1e-12);
    }

    #[test]
    fn pm_is_state_independent() {
        let (f, r) = build_pm();
        r.validate(&f).unwrap();
        for k in 0..100 {
            let psi = random_pure_state(SeedSpec::new(31, k));
            let v = eval(&f, &r, &psi).unwrap();
            assert!((v - 6.0).abs() < 1e-10, "PM = {v}");
        }
        assert!((eval(&f, &r, &StateVector::basis(0)).unwrap() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn c_known_values_and_identity() {
        let (f, r) = build_c();
        let circ = StateVector::circ_circ();
        assert!((eval(&f, &r, &circ).unwrap() - 6.0).abs() < 1e-12);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi_plus = StateVector::new([
            C64::new(0.0, 0.0),
            C64::new(s, 0.0),
            C64::new(s, 0.0),
            C64::new(0.0, 0.0),
        ])
        .unwrap();
        assert!((eval(&f, &r, &psi_plus).unwrap() - 6.0).abs() < 1e-12);

        let phi_plus = StateVector::new([
            C64::new(s, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(s, 0.0),
        ])
        .unwrap();
        assert!((eval(&f, &r, &phi_plus).unwrap() - 2.0).abs() < 1e-12);

        // C = 4 + 2<sigma_y x sigma_y> on random states
        let yy = pauli_pair(PauliAxis::Y, PauliAxis::Y);
        for k in 0..1000 {
            let psi = random_pure_state(SeedSpec::new(77, k));
            let c = eval(&f, &r, &psi).unwrap();
            let oracle = 4.0 + 2.0 * expectation(&psi, &yy).unwrap();
            assert!((c - oracle).abs() < 1e-10);
            assert!((2.0..=6.0 + 1e-9).contains(&c));
        }
    }

    pub fn chsh_optimal_settings() -> MeasurementSettings {
        // a1 = z, a2 = x, b1 = -(z+x)/sqrt2, b2 = (x-z)/sqrt2
        MeasurementSettings {
            a1: BlochDirection::new(0.0, 0.0).unwrap(),
            a2: BlochDirection::new(FRAC_PI_2, 0.0).unwrap(),
            b1: BlochDirection::from_unit_vector([-1.0 / SQRT_2, 0.0, -1.0 / SQRT_2]),
            b2: BlochDirection::from_unit_vector([1.0 / SQRT_2, 0.0, -1.0 / SQRT_2]),
        }
    }

    #[test]
    fn chsh_singlet_reaches_tsirelson() {
        let (f, r) = build_chsh(&chsh_optimal_settings());
        let v = eval(&f, &r, &StateVector::singlet()).unwrap();
        assert!((v - 2.0 * SQRT_2).abs() < 1e-9, "B = {v}");
        // A and B observables always commute across the cut
        for i in 0..2 {
            for j in 2..4 {
                assert!(commutes(&r.observables[i], &r.observables[j]));
            }
        }
    }

    #[test]
    fn chsh_product_state_stays_classical() {
        // grid over the four directions at coarse resolution; |00> never
        // exceeds the classical bound
        let psi = StateVector::basis(0);
        let step = 8;
        let mut max = f64::MIN;
        let dirs: Vec<BlochDirection> = (0..=step)
            .flat_map(|t| {
                (0..2 * step).map(move |p| {
                    BlochDirection::new(
                        PI * t as f64 / step as f64,
                        PI * p as f64 / step as f64,
                    )
                    .unwrap()
                })
            })
            .collect();
        // exploit the bilinear structure: optimal a1, a2 follow from b1, b2,
        // so a coarse scan over (b1, b2) suffices
        let t = crate::chsh::correlation_matrix(&psi).unwrap();
        for b1 in &dirs {
            for b2 in &dirs {
                let u = t.apply(b1.unit_vector());
                let v = t.apply(b2.unit_vector());
                let plus = [u[0] + v[0], u[1] + v[1], u[2] + v[2]];
                let minus = [u[0] - v[0], u[1] - v[1], u[2] - v[2]];
                let norm = |w: [f64; 3]| (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
                max = max.max(norm(plus) + norm(minus));
            }
        }
        assert!(max <= 2.0 + 1e-9, "max {max}");
    }

    #[test]
    fn cabello18_loads_and_is_state_independent() {
        let (f, r) = build_cabello18_from_str(CABELLO18_DATA).unwrap();
        assert_eq!(f.n_observables, 18);
        assert_eq!(f.terms.len(), 9);
        assert!(f.terms.iter().all(|t| t.sign == -1 && t.members.len() == 4));
        for k in 0..100 {
            let psi = random_pure_state(SeedSpec::new(13, k));
            let v = eval(&f, &r, &psi).unwrap();
            assert!((v - 9.0).abs() < 1e-9, "value {v}");
        }
    }

    #[test]
    fn cabello18_rejects_corrupted_data() {
        // flip one entry: breaks orthonormality
        let corrupted = CABELLO18_DATA.replacen("1 1 0 -1 0 0 0 0 0", "1 1 0 1 0 0 0 0 0", 1);
        assert!(build_cabello18_from_str(&corrupted).is_err());
        // drop a line: malformed basis
        let truncated: String = CABELLO18_DATA
            .lines()
            .take(20)
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(build_cabello18_from_str(&truncated).is_err());
        // garbage field
        let garbage = CABELLO18_DATA.replacen("1 0 0 0 0 0 0 1 0", "1 0 0 x 0 0 0 1 0", 1);
        let err = build_cabello18_from_str(&garbage).unwrap_err();
        assert!(err.to_string().contains("line"));
    }

    #[test]
    fn eval_rejects_incompatible_realization() {
        let (f, _) = build_pm();
        // z x on both slots of a context breaks commutation
        let bad = OperatorRealization {
            observables: (0..9)
                .map(|k| {
                    if k == 1 {
                        pauli_pair(PauliAxis::X, PauliAxis::I)
                    } else {
                        pauli_pair(PauliAxis::Z, PauliAxis::I)
                    }
                })
                .collect(),
        };
        let psi = StateVector::basis(0);
        assert!(matches!(
            eval(&f, &bad, &psi),
            Err(FunctionalError::Incompatible(..))
        ));
    }

    #[test]
    fn enumeration_guard() {
        let terms = vec![ContextTerm::new(1, vec![0]).unwrap()];
        let err = InequalityFunctional::new("big", 25, terms).unwrap_err();
        assert!(matches!(err, FunctionalError::TooManyObservables { .. }));
    }
}
