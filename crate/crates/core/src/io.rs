//! JSON file formats. Matrices are `{"dim": n, "re": [[..]], "im": [[..]]}`,
//! row-major; vectors are `{"re": [..], "im": [..]}`.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{MeasurementResult, MeasurementScheme, SchemeKind};
use crate::operator::{CMatrix, CVector, Hermitian, Unitary, C64};
use crate::schmidt::{schmidt_decompose, BipartiteHamiltonian};
use crate::spin_chain::ChainSpec;
use crate::tolerance::Tolerances;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let rows = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect()
        };
        Self {
            dim: m.nrows(),
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let n = self.dim;
        if n == 0 {
            return Err(Error::Empty);
        }
        for part in [&self.re, &self.im] {
            if part.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: part.len() });
            }
            if let Some(row) = part.iter().find(|r| r.len() != n) {
                return Err(Error::NotSquare { rows: n, cols: row.len() });
            }
        }
        Ok(CMatrix::from_fn(n, n, |i, j| C64::new(self.re[i][j], self.im[i][j])))
    }

    pub fn to_hermitian(&self, tol: &Tolerances) -> Result<Hermitian> {
        Hermitian::with_tolerance(self.to_matrix()?, tol.hermitian)
    }

    pub fn to_unitary(&self, tol: &Tolerances) -> Result<Unitary> {
        Unitary::with_tolerance(self.to_matrix()?, tol.unitary)
    }
}

impl From<&Hermitian> for MatrixJson {
    fn from(h: &Hermitian) -> Self {
        Self::from_matrix(h.matrix())
    }
}

impl From<&Unitary> for MatrixJson {
    fn from(u: &Unitary) -> Self {
        Self::from_matrix(u.matrix())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct VectorJson {
    pub re: Vec<f64>,
    #[serde(default)]
    pub im: Vec<f64>,
}

impl VectorJson {
    pub fn from_vector(v: &CVector) -> Self {
        Self {
            re: v.iter().map(|z| z.re).collect(),
            im: v.iter().map(|z| z.im).collect(),
        }
    }

    pub fn to_vector(&self) -> Result<CVector> {
        let im = if self.im.is_empty() { vec![0.0; self.re.len()] } else { self.im.clone() };
        if im.len() != self.re.len() {
            return Err(Error::DimensionMismatch { expected: self.re.len(), found: im.len() });
        }
        if self.re.is_empty() {
            return Err(Error::Empty);
        }
        Ok(CVector::from_iterator(self.re.len(), self.re.iter().zip(&im).map(|(&r, &i)| C64::new(r, i))))
    }
}

/// A joint Hamiltonian with its factor dimensions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HamiltonianFile {
    pub dim_c: usize,
    pub dim_s: usize,
    pub hamiltonian: MatrixJson,
}

/// Either a [`HamiltonianFile`] or a bare matrix whose dimensions come from elsewhere.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum HamiltonianInput {
    Full(HamiltonianFile),
    Bare(MatrixJson),
}

impl HamiltonianInput {
    /// Resolves the factor dimensions, letting explicit values override the file.
    pub fn resolve(
        &self,
        dim_c: Option<usize>,
        dim_s: Option<usize>,
        tol: &Tolerances,
    ) -> Result<(Hermitian, usize, usize)> {
        let (m, fc, fs) = match self {
            Self::Full(f) => (&f.hamiltonian, Some(f.dim_c), Some(f.dim_s)),
            Self::Bare(m) => (m, None, None),
        };
        let h = m.to_hermitian(tol)?;
        let (dc, ds) = match (dim_c.or(fc), dim_s.or(fs)) {
            (Some(c), Some(s)) => (c, s),
            (Some(c), None) if c > 0 && h.dim() % c == 0 => (c, h.dim() / c),
            (None, Some(s)) if s > 0 && h.dim() % s == 0 => (h.dim() / s, s),
            _ => {
                return Err(Error::InvalidArgument(
                    "factor dimensions dim_c and dim_s are required for a bare matrix".into(),
                ))
            }
        };
        if dc * ds != h.dim() {
            return Err(Error::DimensionMismatch { expected: dc * ds, found: h.dim() });
        }
        Ok((h, dc, ds))
    }

    pub fn decompose(
        &self,
        dim_c: Option<usize>,
        dim_s: Option<usize>,
        tol: &Tolerances,
    ) -> Result<BipartiteHamiltonian> {
        let (h, dc, ds) = self.resolve(dim_c, dim_s, tol)?;
        schmidt_decompose(&h, dc, ds)
    }
}

/// One side of a composite measurement: `E (x) A`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CouplingFile {
    pub controller: MatrixJson,
    pub system: MatrixJson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BondTerm {
    pub a: MatrixJson,
    pub b: MatrixJson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainFile {
    pub site_dims: Vec<usize>,
    pub couplings: Vec<Vec<BondTerm>>,
}

impl ChainFile {
    pub fn from_spec(spec: &ChainSpec) -> Self {
        Self {
            site_dims: spec.site_dims().to_vec(),
            couplings: spec
                .couplings()
                .iter()
                .map(|bond| bond.iter().map(|(a, b)| BondTerm { a: a.into(), b: b.into() }).collect())
                .collect(),
        }
    }

    pub fn to_spec(&self, tol: &Tolerances) -> Result<ChainSpec> {
        let mut couplings = Vec::new();
        for bond in &self.couplings {
            let mut terms = Vec::new();
            for t in bond {
                terms.push((t.a.to_hermitian(tol)?, t.b.to_hermitian(tol)?));
            }
            couplings.push(terms);
        }
        ChainSpec::new(self.site_dims.clone(), couplings)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrotterTerm {
    pub generator: MatrixJson,
    pub coefficient: f64,
}

/// Input for `synthesize`; which fields are needed depends on the kind.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SynthesisSpec {
    pub dim_c: Option<usize>,
    pub dim_s: Option<usize>,
    pub hamiltonian: Option<MatrixJson>,
    pub eps: Option<f64>,
    #[serde(default)]
    pub terms: Vec<TrotterTerm>,
    pub a: Option<MatrixJson>,
    pub b: Option<MatrixJson>,
    pub m: Option<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StepJson {
    pub t: f64,
    pub w: MatrixJson,
}

/// Output of `synthesize`: the steps, repeated `repeat` times, and the error
/// of the resulting unitary against `target`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProcedureFile {
    pub kind: String,
    pub dim_c: usize,
    pub dim_s: usize,
    pub steps: Vec<StepJson>,
    pub repeat: u64,
    pub t_p: Option<f64>,
    pub unitary: MatrixJson,
    pub target: MatrixJson,
    pub error: f64,
    pub error_bound: Option<f64>,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SchemeFile {
    pub kind: String,
    pub m: Option<u64>,
    pub dim_c: usize,
    pub dim_s: usize,
    pub effective_h: MatrixJson,
    pub controller_init: VectorJson,
    pub evolution_time: f64,
    pub pointer_states: Vec<VectorJson>,
    pub projections: Vec<MatrixJson>,
    pub eigenvalues: Vec<f64>,
    pub observable: MatrixJson,
    pub evolution: Option<MatrixJson>,
    pub exact_pointers: bool,
    #[serde(default)]
    pub provenance: Vec<String>,
    #[serde(default)]
    pub seed: u64,
}

impl SchemeFile {
    pub fn from_scheme(s: &MeasurementScheme, seed: u64) -> Self {
        Self {
            kind: s.kind.name().into(),
            m: s.kind.steps(),
            dim_c: s.dim_c,
            dim_s: s.dim_s,
            effective_h: (&s.effective_h).into(),
            controller_init: VectorJson::from_vector(&s.controller_init),
            evolution_time: s.evolution_time,
            pointer_states: s.pointer_states.iter().map(VectorJson::from_vector).collect(),
            projections: s.projections.iter().map(Into::into).collect(),
            eigenvalues: s.eigenvalues.clone(),
            observable: (&s.observable).into(),
            evolution: s.evolution.as_ref().map(Into::into),
            exact_pointers: s.exact_pointers,
            provenance: s.provenance.clone(),
            seed,
        }
    }

    pub fn to_scheme(&self, tol: &Tolerances) -> Result<MeasurementScheme> {
        let kind = match (self.kind.as_str(), self.m) {
            ("direct", _) => SchemeKind::Direct,
            ("sum", Some(m)) => SchemeKind::Sum { m },
            ("commutator", Some(m)) => SchemeKind::Commutator { m },
            ("jordan", Some(m)) => SchemeKind::Jordan { m },
            (k, _) => return Err(Error::InvalidArgument(format!("unknown scheme kind {k:?} or missing m"))),
        };
        let vec = |v: &VectorJson| -> Result<CVector> {
            let x = v.to_vector()?;
            if x.len() != self.dim_c {
                return Err(Error::DimensionMismatch { expected: self.dim_c, found: x.len() });
            }
            Ok(x)
        };
        let controller_init = vec(&self.controller_init)?;
        let norm = controller_init.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized { norm });
        }
        let effective_h = self.effective_h.to_hermitian(tol)?;
        if effective_h.dim() != self.dim_c * self.dim_s {
            return Err(Error::DimensionMismatch {
                expected: self.dim_c * self.dim_s,
                found: effective_h.dim(),
            });
        }
        let projections = self
            .projections
            .iter()
            .map(|p| p.to_hermitian(tol))
            .collect::<Result<Vec<_>>>()?;
        if projections.len() != self.pointer_states.len() || projections.len() != self.eigenvalues.len() {
            return Err(Error::InvalidArgument(
                "projections, pointer_states and eigenvalues must have equal length".into(),
            ));
        }
        let scheme = MeasurementScheme {
            dim_c: self.dim_c,
            dim_s: self.dim_s,
            effective_h,
            controller_init,
            evolution_time: self.evolution_time,
            pointer_states: self.pointer_states.iter().map(vec).collect::<Result<_>>()?,
            projections,
            eigenvalues: self.eigenvalues.clone(),
            observable: self.observable.to_hermitian(tol)?,
            evolution: self.evolution.as_ref().map(|u| u.to_unitary(tol)).transpose()?,
            kind,
            exact_pointers: self.exact_pointers,
            provenance: self.provenance.clone(),
        };
        let defect = scheme.projection_defect();
        if defect > 1e-10 * self.dim_s as f64 {
            return Err(Error::InvalidArgument(format!(
                "projections are not a complete orthogonal family (defect {defect:.3e})"
            )));
        }
        Ok(scheme)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeasurementResultFile {
    pub probabilities: Vec<f64>,
    pub born: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    pub post_states: Vec<Option<VectorJson>>,
    pub pointer_overlaps: MatrixJson,
    pub pointer_defect: f64,
    pub unassigned: f64,
    pub tv_distance: f64,
    /// Largest intermediate-time disturbance of the observable's eigenvectors.
    pub disturbance: f64,
    pub seed: u64,
}

impl MeasurementResultFile {
    pub fn new(scheme: &MeasurementScheme, r: &MeasurementResult, disturbance: f64, seed: u64) -> Self {
        Self {
            probabilities: r.probabilities.clone(),
            born: r.born.clone(),
            eigenvalues: scheme.eigenvalues.clone(),
            post_states: r.post_states.iter().map(|p| p.as_ref().map(VectorJson::from_vector)).collect(),
            pointer_overlaps: MatrixJson::from_matrix(&r.pointer_overlaps),
            pointer_defect: scheme.pointer_defect(),
            unassigned: r.unassigned,
            tv_distance: r.tv_distance(),
            disturbance,
            seed,
        }
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json(value)?)?;
    Ok(())
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn read_hermitian(path: &Path, tol: &Tolerances) -> Result<Hermitian> {
    read_json::<MatrixJson>(path)?.to_hermitian(tol)
}

pub fn read_generators(path: &Path, tol: &Tolerances) -> Result<Vec<Hermitian>> {
    read_json::<Vec<MatrixJson>>(path)?
        .iter()
        .map(|m| m.to_hermitian(tol))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::{build_cqnd_scheme, scheme_sum};
    use crate::named::{gell_mann, sigma_x, sigma_y, sigma_z};
    use crate::random::OperatorSampler;

    fn max_entry_diff(a: &CMatrix, b: &CMatrix) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn matrix_round_trip_is_lossless() {
        let mut rng = OperatorSampler::new(1);
        for d in 1..6 {
            let h = rng.hermitian(d);
            let text = to_json(&MatrixJson::from(&h)).unwrap();
            let back: MatrixJson = serde_json::from_str(&text).unwrap();
            let m = back.to_hermitian(&Tolerances::default()).unwrap();
            assert!(max_entry_diff(m.matrix(), h.matrix()) <= 1e-15);
        }
    }

    #[test]
    fn malformed_matrices_are_rejected() {
        let ragged = MatrixJson { dim: 2, re: vec![vec![1.0, 0.0], vec![0.0]], im: vec![vec![0.0; 2]; 2] };
        assert!(matches!(ragged.to_matrix(), Err(Error::NotSquare { .. })));
        let short = MatrixJson { dim: 2, re: vec![vec![1.0, 0.0]], im: vec![vec![0.0; 2]; 2] };
        assert!(matches!(short.to_matrix(), Err(Error::DimensionMismatch { .. })));
        let nonherm = MatrixJson { dim: 2, re: vec![vec![0.0, 1.0], vec![0.0, 0.0]], im: vec![vec![0.0; 2]; 2] };
        assert!(matches!(nonherm.to_hermitian(&Tolerances::default()), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn vectors_default_to_real() {
        let v: VectorJson = serde_json::from_str(r#"{"re": [0.6, 0.8]}"#).unwrap();
        let x = v.to_vector().unwrap();
        assert_eq!(x.len(), 2);
        assert_eq!(x[1], C64::new(0.8, 0.0));
    }

    #[test]
    fn hamiltonian_inputs() {
        let h = crate::operator::tensor(&sigma_x(), &sigma_x()) + crate::operator::tensor(&sigma_y(), &sigma_y());
        let full = HamiltonianFile { dim_c: 2, dim_s: 2, hamiltonian: (&h).into() };
        let text = to_json(&full).unwrap();
        let input: HamiltonianInput = serde_json::from_str(&text).unwrap();
        assert!(matches!(input, HamiltonianInput::Full(_)));
        let d = input.decompose(None, None, &Tolerances::default()).unwrap();
        assert_eq!(d.terms().len(), 2);

        let bare: HamiltonianInput = serde_json::from_str(&to_json(&MatrixJson::from(&h)).unwrap()).unwrap();
        assert!(bare.resolve(None, None, &Tolerances::default()).is_err());
        let (_, dc, ds) = bare.resolve(Some(2), None, &Tolerances::default()).unwrap();
        assert_eq!((dc, ds), (2, 2));
        assert!(bare.resolve(Some(3), Some(2), &Tolerances::default()).is_err());
    }

    #[test]
    fn scheme_round_trip() {
        let tol = Tolerances::default();
        for s in [
            build_cqnd_scheme(&Hermitian::diagonal(&[5.0, 5.0, -1.0]), 3).unwrap(),
            scheme_sum((&gell_mann(3), &sigma_z()), (&gell_mann(3), &sigma_x()), 4).unwrap(),
        ] {
            let f = SchemeFile::from_scheme(&s, 7);
            let back: SchemeFile = serde_json::from_str(&to_json(&f).unwrap()).unwrap();
            assert_eq!(back.seed, 7);
            let t = back.to_scheme(&tol).unwrap();
            assert_eq!(t.kind, s.kind);
            assert!(max_entry_diff(t.effective_h.matrix(), s.effective_h.matrix()) <= 1e-15);
            assert!(
                max_entry_diff(t.joint_evolution().matrix(), s.joint_evolution().matrix()) <= 1e-15
            );
        }
    }

    #[test]
    fn chain_round_trip() {
        let spec = ChainSpec::uniform(2, 3, vec![(gell_mann(1), gell_mann(2))]).unwrap();
        let f = ChainFile::from_spec(&spec);
        let back: ChainFile = serde_json::from_str(&to_json(&f).unwrap()).unwrap();
        let s = back.to_spec(&Tolerances::default()).unwrap();
        assert_eq!(s.site_dims(), &[3, 3]);
        assert!((s.couplings()[0][0].1.clone() - gell_mann(2)).norm() == 0.0);
    }
}
