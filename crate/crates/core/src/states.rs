//! Two-mode field states: the separable mixture, the entangled pure state,
//! product states, validation, a PPT entanglement witness and the JSON
//! state-file loader.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    hermiticity_residual, joint_index, partial_trace_matrix, split_index, tensor, FockOperator,
    Mode, TruncationPolicy,
};

pub const HERMITICITY_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
/// Eigenvalues down to this value are accepted as round-off.
pub const POSITIVITY_TOL: f64 = -1e-10;
/// Largest disagreement tolerated between a declared entry and the
/// conjugate of its declared transpose in a state file.
pub const LOAD_CONTRADICTION_TOL: f64 = 1e-9;

const EIGEN_MAX_ITER: usize = 100_000;

/// Correlation classification of a two-mode state.
///
/// `Factorizable` implies separable. `Undetermined` means the PPT witness
/// is non-negative but no product or convex decomposition is known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CorrelationClass {
    Factorizable,
    Separable,
    EntangledByPpt,
    Undetermined,
}

impl CorrelationClass {
    pub fn is_separable(self) -> bool {
        matches!(self, Self::Factorizable | Self::Separable)
    }
}

impl fmt::Display for CorrelationClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Factorizable => "factorizable",
            Self::Separable => "separable",
            Self::EntangledByPpt => "entangled-by-PPT-witness",
            Self::Undetermined => "undetermined",
        })
    }
}

/// Density matrix over `|m⟩⊗|n⟩`, `m < dim_a`, `n < dim_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeState {
    dim_a: usize,
    dim_b: usize,
    matrix: DMatrix<Complex64>,
    label: String,
    known_class: Option<CorrelationClass>,
    terms: Vec<StateTerm>,
}

impl TwoModeState {
    /// Validated construction from a full matrix.
    pub fn new(
        dim_a: usize,
        dim_b: usize,
        matrix: DMatrix<Complex64>,
        label: impl Into<String>,
    ) -> Result<Self> {
        check_mode_dim(dim_a)?;
        check_mode_dim(dim_b)?;
        let n = dim_a * dim_b;
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::Shape(format!(
                "state matrix is {}x{}, expected {n}x{n}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        validate_density_matrix(&matrix)?;
        Ok(Self::assemble(dim_a, dim_b, matrix, label.into(), None))
    }

    fn assemble(
        dim_a: usize,
        dim_b: usize,
        matrix: DMatrix<Complex64>,
        label: String,
        known_class: Option<CorrelationClass>,
    ) -> Self {
        let mut terms = Vec::new();
        let n = matrix.nrows();
        for i in 0..n {
            for j in 0..n {
                let value = matrix[(i, j)];
                if value != Complex64::new(0.0, 0.0) {
                    terms.push(StateTerm {
                        bra: split_index(i, dim_b),
                        ket: split_index(j, dim_b),
                        value,
                    });
                }
            }
        }
        Self {
            dim_a,
            dim_b,
            matrix,
            label,
            known_class,
            terms,
        }
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Class known from construction, if any.
    pub fn known_class(&self) -> Option<CorrelationClass> {
        self.known_class
    }

    /// `⟨m n|ρ|p q⟩`.
    pub fn entry(&self, bra: (usize, usize), ket: (usize, usize)) -> Complex64 {
        self.matrix[(
            joint_index(bra.0, bra.1, self.dim_b),
            joint_index(ket.0, ket.1, self.dim_b),
        )]
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn marginal(&self, keep: Mode) -> Result<FockOperator> {
        crate::fock::partial_trace(self, keep)
    }

    /// Runs the Hermiticity, trace and positivity checks again.
    pub fn validate(&self) -> Result<()> {
        validate_density_matrix(&self.matrix)
    }

    /// Largest per-mode index carrying weight, plus one, for each mode.
    /// Traces against `ρ` only see operator entries inside this block.
    pub fn support(&self) -> (usize, usize) {
        let (mut sa, mut sb) = (0, 0);
        for t in self.terms() {
            sa = sa.max(t.bra.0 + 1).max(t.ket.0 + 1);
            sb = sb.max(t.bra.1 + 1).max(t.ket.1 + 1);
        }
        (sa.max(1), sb.max(1))
    }

    /// Nonzero matrix elements `⟨bra|ρ|ket⟩` in row-major order.
    pub fn terms(&self) -> &[StateTerm] {
        &self.terms
    }

    /// Nonzero `(row, col) → ρ_row,col` entries in row-major order.
    pub fn nonzero_entries(&self) -> Vec<((usize, usize), Complex64)> {
        self.terms
            .iter()
            .map(|t| {
                let i = joint_index(t.bra.0, t.bra.1, self.dim_b);
                let j = joint_index(t.ket.0, t.ket.1, self.dim_b);
                ((i, j), t.value)
            })
            .collect()
    }
}

/// One nonzero element `⟨bra|ρ|ket⟩` with per-mode labels `(m, n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateTerm {
    pub bra: (usize, usize),
    pub ket: (usize, usize),
    pub value: Complex64,
}

fn check_mode_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::InvalidDimension {
            dim,
            reason: "each mode needs at least |0⟩ and |1⟩",
        });
    }
    Ok(())
}

fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::Numeric("Hermitian eigensolver did not converge".into()))?;
    Ok(eig.eigenvalues.iter().copied().collect())
}

fn min_eigenvalue(m: &DMatrix<Complex64>) -> Result<f64> {
    Ok(hermitian_eigenvalues(m)?
        .into_iter()
        .fold(f64::INFINITY, f64::min))
}

/// Hermitian to 1e−12, unit trace to 1e−12, eigenvalues ≥ −1e−10.
pub fn validate_density_matrix(m: &DMatrix<Complex64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Shape(format!(
            "density matrix must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if let Some(z) = m.iter().find(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Validation {
            invariant: "finite",
            detail: format!("entry {z}"),
        });
    }
    let herm = hermiticity_residual(m);
    if herm > HERMITICITY_TOL {
        return Err(Error::Validation {
            invariant: "hermiticity",
            detail: format!("max |ρ_ij − conj ρ_ji| = {herm:e}"),
        });
    }
    let tr = m.trace();
    if (tr - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
        return Err(Error::Validation {
            invariant: "trace",
            detail: format!("trace = {tr}, expected 1"),
        });
    }
    let lmin = min_eigenvalue(m)?;
    if lmin < POSITIVITY_TOL {
        return Err(Error::Validation {
            invariant: "positivity",
            detail: format!("minimum eigenvalue {lmin:e}"),
        });
    }
    Ok(())
}

fn ket_projector_sum(dim: usize, entries: &[((usize, usize), (usize, usize), f64)]) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(dim * dim, dim * dim);
    for &(bra, ket, w) in entries {
        m[(joint_index(bra.0, bra.1, dim), joint_index(ket.0, ket.1, dim))] =
            Complex64::new(w, 0.0);
    }
    m
}

/// `½(|01⟩⟨01| + |10⟩⟨10|)` embedded with `dim` levels per mode.
pub fn make_rho_sep(dim: usize) -> Result<TwoModeState> {
    check_mode_dim(dim)?;
    let matrix = ket_projector_sum(dim, &[((0, 1), (0, 1), 0.5), ((1, 0), (1, 0), 0.5)]);
    Ok(TwoModeState::assemble(dim, dim, matrix, "sep".into(), Some(CorrelationClass::Separable)))
}

/// `|S⟩⟨S|` with `|S⟩ = (|01⟩ + |10⟩)/√2`: `ρ_sep` plus the coherences
/// `½(|01⟩⟨10| + |10⟩⟨01|)`.
pub fn make_rho_ent(dim: usize) -> Result<TwoModeState> {
    check_mode_dim(dim)?;
    let matrix = ket_projector_sum(
        dim,
        &[
            ((0, 1), (0, 1), 0.5),
            ((1, 0), (1, 0), 0.5),
            ((0, 1), (1, 0), 0.5),
            ((1, 0), (0, 1), 0.5),
        ],
    );
    Ok(TwoModeState::assemble(dim, dim, matrix, "ent".into(), None))
}

/// `ρ_A ⊗ ρ_B` for validated single-mode density matrices.
pub fn make_product(rho_a: &FockOperator, rho_b: &FockOperator) -> Result<TwoModeState> {
    make_product_with(rho_a, rho_b, &TruncationPolicy::default())
}

pub fn make_product_with(
    rho_a: &FockOperator,
    rho_b: &FockOperator,
    policy: &TruncationPolicy,
) -> Result<TwoModeState> {
    rho_a.validate_density()?;
    rho_b.validate_density()?;
    let joint = tensor(rho_a, rho_b, policy)?;
    Ok(TwoModeState::assemble(
        rho_a.dim(),
        rho_b.dim(),
        joint.into_matrix(),
        "product".into(),
        Some(CorrelationClass::Factorizable),
    ))
}

/// Partial transpose over `mode`:
/// `⟨m n|ρ^{T_B}|m' n'⟩ = ⟨m n'|ρ|m' n⟩`.
pub fn partial_transpose(rho: &TwoModeState, mode: Mode) -> DMatrix<Complex64> {
    let db = rho.dim_b;
    let n = rho.matrix.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        let (m, nb) = split_index(i, db);
        let (mp, nbp) = split_index(j, db);
        match mode {
            Mode::B => rho.matrix[(joint_index(m, nbp, db), joint_index(mp, nb, db))],
            Mode::A => rho.matrix[(joint_index(mp, nb, db), joint_index(m, nbp, db))],
        }
    })
}

/// Minimum eigenvalue of `ρ^{T_B}`. Negative certifies entanglement.
pub fn ppt_min_eigenvalue(rho: &TwoModeState) -> Result<f64> {
    min_eigenvalue(&partial_transpose(rho, Mode::B))
}

/// Classification using the construction history, a factorization test
/// and the PPT witness.
pub fn classify(rho: &TwoModeState) -> Result<CorrelationClass> {
    if ppt_min_eigenvalue(rho)? < POSITIVITY_TOL {
        return Ok(CorrelationClass::EntangledByPpt);
    }
    if let Some(c) = rho.known_class {
        return Ok(c);
    }
    let ra = partial_trace_matrix(&rho.matrix, rho.dim_a, rho.dim_b, Mode::A)?;
    let rb = partial_trace_matrix(&rho.matrix, rho.dim_a, rho.dim_b, Mode::B)?;
    let product = ra.kronecker(&rb);
    let gap = product
        .iter()
        .zip(rho.matrix.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    if gap <= HERMITICITY_TOL {
        Ok(CorrelationClass::Factorizable)
    } else {
        Ok(CorrelationClass::Undetermined)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    dims: [usize; 2],
    entries: Vec<StateEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateEntry {
    bra: [usize; 2],
    ket: [usize; 2],
    re: f64,
    im: f64,
}

/// Parses and validates a JSON state file.
///
/// Omitted entries are zero. Each declared off-diagonal entry also sets its
/// conjugate transpose; if both halves are declared they are averaged after
/// checking they agree to 1e−9.
pub fn load_state(text: &str) -> Result<TwoModeState> {
    let file: StateFile =
        serde_json::from_str(text).map_err(|e| Error::Load(format!("schema: {e}")))?;
    let [da, db] = file.dims;
    if da < 2 || db < 2 {
        return Err(Error::Load(format!("dims must be >= 2 per mode, got [{da}, {db}]")));
    }

    let mut declared: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
    for (k, e) in file.entries.iter().enumerate() {
        if e.bra[0] >= da || e.ket[0] >= da || e.bra[1] >= db || e.ket[1] >= db {
            return Err(Error::Load(format!(
                "entry {k}: index bra={:?} ket={:?} outside dims [{da}, {db}]",
                e.bra, e.ket
            )));
        }
        if !(e.re.is_finite() && e.im.is_finite()) {
            return Err(Error::Load(format!("entry {k}: non-finite value")));
        }
        let i = joint_index(e.bra[0], e.bra[1], db);
        let j = joint_index(e.ket[0], e.ket[1], db);
        if declared.insert((i, j), Complex64::new(e.re, e.im)).is_some() {
            return Err(Error::Load(format!(
                "entry {k}: bra={:?} ket={:?} declared twice",
                e.bra, e.ket
            )));
        }
    }

    let n = da * db;
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for (&(i, j), &v) in &declared {
        if i == j {
            if v.im.abs() > LOAD_CONTRADICTION_TOL {
                return Err(Error::Validation {
                    invariant: "hermiticity",
                    detail: format!("diagonal entry {i} has imaginary part {}", v.im),
                });
            }
            m[(i, i)] = Complex64::new(v.re, 0.0);
            continue;
        }
        let value = match declared.get(&(j, i)) {
            Some(&t) => {
                let gap = (v - t.conj()).norm();
                if gap > LOAD_CONTRADICTION_TOL {
                    return Err(Error::Validation {
                        invariant: "hermiticity",
                        detail: format!(
                            "entries ({i},{j}) and ({j},{i}) are not conjugate (gap {gap:e})"
                        ),
                    });
                }
                0.5 * (v + t.conj())
            }
            None => v,
        };
        m[(i, j)] = value;
        m[(j, i)] = value.conj();
    }
    TwoModeState::new(da, db, m, "file")
}

pub fn load_state_file(path: impl AsRef<Path>) -> Result<TwoModeState> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Load(format!("{}: {e}", path.display())))?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "file".into());
    Ok(load_state(&text)?.with_label(label))
}

/// Serializes the upper triangle (`row <= col`) of the nonzero entries in
/// the state-file schema.
pub fn state_to_json(rho: &TwoModeState) -> String {
    let entries = rho
        .nonzero_entries()
        .into_iter()
        .filter(|((i, j), _)| i <= j)
        .map(|((i, j), z)| {
            let (m, n) = split_index(i, rho.dim_b);
            let (p, q) = split_index(j, rho.dim_b);
            StateEntry {
                bra: [m, n],
                ket: [p, q],
                re: z.re,
                im: z.im,
            }
        })
        .collect();
    let file = StateFile {
        dims: [rho.dim_a, rho.dim_b],
        entries,
    };
    serde_json::to_string_pretty(&file).expect("state file serialization")
}
