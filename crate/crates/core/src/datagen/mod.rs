//! Sampling manipulators from designed input distributions and labelling
//! them with the classical workspace computation.
//!
//! The full input vector is laid out as `r_d, r_a, r_alpha, n_x, n_y, n_z,
//! n_i`. A subspace fixes some of its elements with Dirac distributions;
//! only the remaining (free) elements are fed to the network.

mod format;

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{DhRow, IkSettings, Manipulator};
use crate::workspace::{
    build_scope, discretize_workspace, flatten, slice_output, Scope, ScopeMode,
};

pub use format::{read_dataset, to_csv, write_dataset, DATASET_MAGIC};

/// Distribution of a single input element.
///
/// Serializes as `uniform(lo, hi)` or `dirac(value)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ElementDist {
    Uniform { lo: f64, hi: f64 },
    Dirac(f64),
}

impl ElementDist {
    pub fn is_fixed(&self) -> bool {
        matches!(self, ElementDist::Dirac(_))
    }

    fn validate(&self) -> std::result::Result<(), String> {
        match *self {
            ElementDist::Uniform { lo, hi } if !(lo.is_finite() && hi.is_finite() && lo < hi) => {
                Err(format!("uniform({lo}, {hi}) needs finite lo < hi"))
            }
            ElementDist::Dirac(v) if !v.is_finite() => Err(format!("dirac({v}) must be finite")),
            _ => Ok(()),
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        match *self {
            ElementDist::Uniform { lo, hi } => rng.random_range(lo..hi),
            ElementDist::Dirac(v) => v,
        }
    }

    /// Whether `v` lies in the support.
    pub fn admits(&self, v: f64) -> bool {
        match *self {
            ElementDist::Uniform { lo, hi } => (lo..=hi).contains(&v),
            ElementDist::Dirac(d) => d == v,
        }
    }
}

impl fmt::Display for ElementDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementDist::Uniform { lo, hi } => write!(f, "uniform({lo:?}, {hi:?})"),
            ElementDist::Dirac(v) => write!(f, "dirac({v:?})"),
        }
    }
}

impl FromStr for ElementDist {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        let open = s
            .find('(')
            .ok_or_else(|| format!("expected name(args), got {s:?}"))?;
        if !s.ends_with(')') {
            return Err(format!("missing closing parenthesis in {s:?}"));
        }
        let args: Vec<f64> = s[open + 1..s.len() - 1]
            .split(',')
            .map(|a| a.trim().parse::<f64>().map_err(|e| format!("{a:?}: {e}")))
            .collect::<std::result::Result<_, _>>()?;
        let dist = match (&s[..open], args.as_slice()) {
            ("uniform", &[lo, hi]) => ElementDist::Uniform { lo, hi },
            ("dirac", &[v]) => ElementDist::Dirac(v),
            _ => return Err(format!("unknown distribution {s:?}")),
        };
        dist.validate()?;
        Ok(dist)
    }
}

impl TryFrom<String> for ElementDist {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl From<ElementDist> for String {
    fn from(d: ElementDist) -> Self {
        d.to_string()
    }
}

/// Input distribution `p(x)`: one tag per element of the full input vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionSpec {
    pub beta: f64,
    pub mode: ScopeMode,
    pub r_d: Vec<ElementDist>,
    pub r_a: Vec<ElementDist>,
    pub r_alpha: Vec<ElementDist>,
    pub n_x: Vec<ElementDist>,
    pub n_y: Vec<ElementDist>,
    pub n_z: Vec<ElementDist>,
    pub n_i: Vec<ElementDist>,
}

impl DistributionSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::invalid(
                "distribution.beta",
                "must be positive and finite",
            ));
        }
        let dof = self.r_d.len();
        if dof == 0 || self.r_a.len() != dof || self.r_alpha.len() != dof {
            return Err(Error::invalid(
                "distribution",
                format!(
                    "r_d, r_a, r_alpha need equal nonzero lengths, got {}, {}, {}",
                    self.r_d.len(),
                    self.r_a.len(),
                    self.r_alpha.len()
                ),
            ));
        }
        if self.n_x.is_empty() || self.n_y.is_empty() || self.n_z.is_empty() {
            return Err(Error::invalid(
                "distribution",
                "scope axes n_x, n_y, n_z must be tagged",
            ));
        }
        if self.n_i.len() != 3 {
            return Err(Error::invalid(
                "distribution.n_i",
                "needs exactly 3 elements",
            ));
        }
        for (group, dists) in self.groups() {
            for (i, d) in dists.iter().enumerate() {
                d.validate().map_err(|reason| {
                    Error::invalid(format!("distribution.{group}[{}]", i + 1), reason)
                })?;
            }
        }
        Ok(())
    }

    fn groups(&self) -> [(&'static str, &[ElementDist]); 7] {
        [
            ("r_d", &self.r_d),
            ("r_a", &self.r_a),
            ("r_alpha", &self.r_alpha),
            ("n_x", &self.n_x),
            ("n_y", &self.n_y),
            ("n_z", &self.n_z),
            ("n_i", &self.n_i),
        ]
    }

    pub fn dof(&self) -> usize {
        self.r_d.len()
    }

    /// All element tags in input-vector order.
    pub fn elements(&self) -> impl Iterator<Item = &ElementDist> + '_ {
        self.r_d
            .iter()
            .chain(&self.r_a)
            .chain(&self.r_alpha)
            .chain(&self.n_x)
            .chain(&self.n_y)
            .chain(&self.n_z)
            .chain(&self.n_i)
    }

    pub fn input_len(&self) -> usize {
        self.elements().count()
    }

    /// 0-based positions of the non-Dirac elements.
    pub fn free_indices(&self) -> Vec<usize> {
        self.elements()
            .enumerate()
            .filter(|(_, d)| !d.is_fixed())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn label_len(&self) -> usize {
        self.n_x.len() * self.n_y.len() * self.n_z.len()
    }

    /// Replaces the scope elements with Dirac tags at `scope`'s values.
    pub fn with_scope(mut self, scope: &Scope) -> Self {
        let dirac = |v: &[f64]| v.iter().map(|x| ElementDist::Dirac(*x)).collect::<Vec<_>>();
        self.mode = scope.mode;
        self.n_x = dirac(&scope.axes[0]);
        self.n_y = dirac(&scope.axes[1]);
        self.n_z = dirac(&scope.axes[2]);
        self.n_i = dirac(&scope.fixed);
        self
    }

    /// Errors unless every scope element is a Dirac tag at `scope`'s value.
    pub fn check_scope(&self, scope: &Scope) -> Result<()> {
        if self.mode != scope.mode {
            return Err(Error::invalid(
                "scope.mode",
                "differs from the distribution's workspace mode",
            ));
        }
        let expected = scope.input_elements();
        let tagged: Vec<&ElementDist> = self
            .n_x
            .iter()
            .chain(&self.n_y)
            .chain(&self.n_z)
            .chain(&self.n_i)
            .collect();
        let matches = tagged.len() == expected.len()
            && tagged
                .iter()
                .zip(&expected)
                .all(|(d, v)| **d == ElementDist::Dirac(*v));
        if !matches {
            return Err(Error::invalid(
                "scope",
                "distribution scope elements must be Dirac tags equal to the labelling scope",
            ));
        }
        Ok(())
    }
}

/// Constant-orientation scope over `[-2 beta, 2 beta]^3` at identity orientation.
pub fn default_scope(beta: f64, delta: f64) -> Result<Scope> {
    build_scope(
        [-2.0 * beta; 3],
        [2.0 * beta; 3],
        [delta; 3],
        [0.0; 3],
        ScopeMode::ConstantOrientation,
    )
}

/// Six-joint arm with a spherical wrist: `d` of joints 3 and 4 and `a` of
/// joints 2 and 3 are uniform on `[0, beta)`, everything else is fixed.
pub fn spherical_wrist_spec(beta: f64, scope: &Scope) -> Result<DistributionSpec> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::invalid("beta", "must be positive and finite"));
    }
    let u = ElementDist::Uniform { lo: 0.0, hi: beta };
    let z = ElementDist::Dirac(0.0);
    let spec = DistributionSpec {
        beta,
        mode: scope.mode,
        r_d: vec![z, z, u, u, z, z],
        r_a: vec![z, u, u, z, z, z],
        r_alpha: [FRAC_PI_2, 0.0, -FRAC_PI_2, FRAC_PI_2, -FRAC_PI_2, 0.0]
            .into_iter()
            .map(ElementDist::Dirac)
            .collect(),
        n_x: Vec::new(),
        n_y: Vec::new(),
        n_z: Vec::new(),
        n_i: Vec::new(),
    }
    .with_scope(scope);
    spec.validate()?;
    Ok(spec)
}

/// Draws every element of the full input vector in order and assembles the
/// manipulator from its `r_d, r_a, r_alpha` part (theta offsets zero).
pub fn sample_manipulator(
    spec: &DistributionSpec,
    rng: &mut impl Rng,
) -> Result<(Manipulator, Vec<f64>)> {
    let x: Vec<f64> = spec.elements().map(|d| d.sample(rng)).collect();
    let m = manipulator_from_input(spec.dof(), &x)?;
    Ok((m, x))
}

pub fn manipulator_from_input(dof: usize, x: &[f64]) -> Result<Manipulator> {
    if x.len() < 3 * dof {
        return Err(Error::DimensionMismatch {
            context: "manipulator input",
            expected: 3 * dof,
            actual: x.len(),
        });
    }
    let rows = (0..dof)
        .map(|j| DhRow::new(0.0, x[j], x[dof + j], x[2 * dof + j]))
        .collect();
    Manipulator::new(rows)
}

/// Full input vector of a manipulator over a scope.
pub fn full_input(m: &Manipulator, scope: &Scope) -> Vec<f64> {
    let rows = m.rows();
    rows.iter()
        .map(|r| r.d)
        .chain(rows.iter().map(|r| r.a))
        .chain(rows.iter().map(|r| r.alpha))
        .chain(scope.input_elements())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubspaceDescriptor {
    pub id: String,
    pub spec: DistributionSpec,
    /// 1-based inclusive range into the flattened label vector.
    pub output_slice: [usize; 2],
}

impl SubspaceDescriptor {
    pub fn new(
        id: impl Into<String>,
        spec: DistributionSpec,
        output_slice: [usize; 2],
    ) -> Result<Self> {
        let d = Self {
            id: id.into(),
            spec,
            output_slice,
        };
        d.validate()?;
        Ok(d)
    }

    /// Descriptor covering the whole label vector.
    pub fn full(id: impl Into<String>, spec: DistributionSpec) -> Result<Self> {
        let len = spec.label_len();
        Self::new(id, spec, [1, len])
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.trim().is_empty() {
            return Err(Error::invalid("subspace.id", "must be non-empty"));
        }
        self.spec.validate()?;
        let [lo, hi] = self.output_slice;
        let len = self.spec.label_len();
        if lo == 0 || lo > hi || hi > len {
            return Err(Error::invalid(
                "subspace.output_slice",
                format!("[{lo}, {hi}] must satisfy 1 <= lo <= hi <= {len}"),
            ));
        }
        Ok(())
    }

    pub fn free_indices(&self) -> Vec<usize> {
        self.spec.free_indices()
    }

    pub fn input_dim(&self) -> usize {
        self.free_indices().len()
    }

    pub fn output_dim(&self) -> usize {
        self.output_slice[1] - self.output_slice[0] + 1
    }

    /// Free elements of a full input vector, or `None` if it lies outside
    /// this subspace's support.
    pub fn project(&self, full: &[f64]) -> Option<Vec<f64>> {
        if full.len() != self.spec.input_len() {
            return None;
        }
        let mut free = Vec::new();
        for (d, v) in self.spec.elements().zip(full) {
            if !d.admits(*v) {
                return None;
            }
            if !d.is_fixed() {
                free.push(*v);
            }
        }
        Some(free)
    }

    /// Rebuilds the full input vector from the free elements.
    pub fn expand(&self, free: &[f64]) -> Result<Vec<f64>> {
        let idx = self.free_indices();
        if free.len() != idx.len() {
            return Err(Error::DimensionMismatch {
                context: "free input",
                expected: idx.len(),
                actual: free.len(),
            });
        }
        let mut it = free.iter();
        Ok(self
            .spec
            .elements()
            .map(|d| match d {
                ElementDist::Dirac(v) => *v,
                ElementDist::Uniform { .. } => *it.next().expect("length checked"),
            })
            .collect())
    }
}

/// Paired samples in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub descriptor: SubspaceDescriptor,
    pub seed: u64,
    x: Vec<f64>,
    y: Vec<bool>,
    rows: usize,
}

impl Dataset {
    pub fn new(
        descriptor: SubspaceDescriptor,
        seed: u64,
        x: Vec<f64>,
        y: Vec<bool>,
    ) -> Result<Self> {
        let (xc, yc) = (descriptor.input_dim(), descriptor.output_dim());
        let rows = y.len().checked_div(yc).unwrap_or(0);
        if y.len() != rows * yc || x.len() != rows * xc {
            return Err(Error::invalid(
                "dataset",
                format!(
                    "X has {} values and Y {} bits, inconsistent with {xc} inputs and {yc} outputs",
                    x.len(),
                    y.len()
                ),
            ));
        }
        Ok(Self {
            descriptor,
            seed,
            x,
            y,
            rows,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn x_cols(&self) -> usize {
        self.descriptor.input_dim()
    }

    pub fn y_cols(&self) -> usize {
        self.descriptor.output_dim()
    }

    pub fn x_row(&self, i: usize) -> &[f64] {
        let c = self.x_cols();
        &self.x[i * c..(i + 1) * c]
    }

    pub fn y_row(&self, i: usize) -> &[bool] {
        let c = self.y_cols();
        &self.y[i * c..(i + 1) * c]
    }

    pub fn x_values(&self) -> &[f64] {
        &self.x
    }

    pub fn y_bits(&self) -> &[bool] {
        &self.y
    }

    pub fn positive_rate(&self) -> f64 {
        if self.y.is_empty() {
            return 0.0;
        }
        self.y.iter().filter(|b| **b).count() as f64 / self.y.len() as f64
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let x = indices
            .iter()
            .flat_map(|&i| self.x_row(i).iter().copied())
            .collect();
        let y = indices
            .iter()
            .flat_map(|&i| self.y_row(i).iter().copied())
            .collect();
        Dataset {
            descriptor: self.descriptor.clone(),
            seed: self.seed,
            x,
            y,
            rows: indices.len(),
        }
    }
}

/// RNG for sample `index`: one ChaCha8 stream per sample under a shared key.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn label_sample(
    desc: &SubspaceDescriptor,
    scope: &Scope,
    ik: &IkSettings,
    seed: u64,
    i: usize,
) -> Result<(Vec<f64>, Vec<bool>)> {
    let (m, x) = sample_manipulator(&desc.spec, &mut sample_rng(seed, i as u64))?;
    let tensor = discretize_workspace(&m, scope, ik)?;
    let y = slice_output(
        &flatten(&tensor),
        desc.output_slice[0],
        desc.output_slice[1],
    )?;
    let free = desc.free_indices().iter().map(|&j| x[j]).collect();
    Ok((free, y))
}

pub fn generate_dataset(
    n: usize,
    desc: &SubspaceDescriptor,
    scope: &Scope,
    ik: &IkSettings,
    seed: u64,
) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    desc.validate()?;
    desc.spec.check_scope(scope)?;
    ik.validate()?;

    let samples = (0..n)
        .into_par_iter()
        .map(|i| label_sample(desc, scope, ik, seed, i))
        .collect::<Result<Vec<_>>>()?;

    // Relabel every hundredth row from scratch.
    for i in (0..n).step_by(100) {
        let (_, y) = label_sample(desc, scope, ik, seed, i)?;
        if y != samples[i].1 {
            return Err(Error::LabelMismatch { sample: i });
        }
    }

    let (x, y): (Vec<Vec<f64>>, Vec<Vec<bool>>) = samples.into_iter().unzip();
    Dataset::new(desc.clone(), seed, x.concat(), y.concat())
}

/// Seeded permutation of `0..n` cut into train/validation/test index sets.
/// Validation and test sizes are floored; the remainder goes to training.
pub fn split_indices(n: usize, ratios: [f64; 3], seed: u64) -> Result<[Vec<usize>; 3]> {
    if ratios.iter().any(|r| !r.is_finite() || *r <= 0.0)
        || (ratios.iter().sum::<f64>() - 1.0).abs() > 1e-9
    {
        return Err(Error::invalid(
            "split ratios",
            format!("{ratios:?} must be positive and sum to 1"),
        ));
    }
    let n_val = (n as f64 * ratios[1]).floor() as usize;
    let n_test = (n as f64 * ratios[2]).floor() as usize;
    let n_train = n.saturating_sub(n_val + n_test);
    if n_train == 0 || n_val == 0 || n_test == 0 {
        return Err(Error::invalid(
            "split",
            format!("{n} samples give an empty split ({n_train}/{n_val}/{n_test})"),
        ));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let test = perm.split_off(n_train + n_val);
    let val = perm.split_off(n_train);
    Ok([perm, val, test])
}

#[derive(Debug, Clone)]
pub struct Splits {
    pub train: Dataset,
    pub validation: Dataset,
    pub test: Dataset,
}

pub fn split_dataset(d: &Dataset, ratios: [f64; 3], seed: u64) -> Result<Splits> {
    let [train, val, test] = split_indices(d.rows(), ratios, seed)?;
    Ok(Splits {
        train: d.subset(&train),
        validation: d.subset(&val),
        test: d.subset(&test),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wrist_desc(delta: f64) -> (SubspaceDescriptor, Scope) {
        let scope = default_scope(0.5, delta).unwrap();
        let spec = spherical_wrist_spec(0.5, &scope).unwrap();
        (SubspaceDescriptor::full("wrist", spec).unwrap(), scope)
    }

    #[test]
    fn element_dist_text_form() {
        for d in [
            ElementDist::Uniform { lo: 0.0, hi: 0.5 },
            ElementDist::Dirac(FRAC_PI_2),
            ElementDist::Dirac(-0.1),
        ] {
            assert_eq!(d.to_string().parse::<ElementDist>().unwrap(), d);
        }
        assert!("uniform(1, 0)".parse::<ElementDist>().is_err());
        assert!("normal(0, 1)".parse::<ElementDist>().is_err());
        assert!("dirac(inf)".parse::<ElementDist>().is_err());
    }

    #[test]
    fn spherical_wrist_layout() {
        let scope = default_scope(0.5, 0.5).unwrap();
        let spec = spherical_wrist_spec(0.5, &scope).unwrap();
        assert_eq!(spec.free_indices(), vec![2, 3, 7, 8]);
        for i in spec.free_indices() {
            assert_eq!(
                *spec.elements().nth(i).unwrap(),
                ElementDist::Uniform { lo: 0.0, hi: 0.5 }
            );
        }
        assert_eq!(spec.label_len(), 125);
        assert_eq!(spec.input_len(), 18 + 15 + 3);
        assert!(spherical_wrist_spec(0.0, &scope).is_err());

        let scope = default_scope(0.5, 0.1).unwrap();
        let spec = spherical_wrist_spec(0.5, &scope).unwrap();
        assert_eq!(spec.input_len(), 6 + 6 + 6 + 21 + 21 + 21 + 3);
    }

    #[test]
    fn sampling_respects_bounds_and_dirac() {
        let (desc, _) = wrist_desc(0.5);
        let mut first: Option<Vec<f64>> = None;
        for seed in 0..50 {
            let (m, x) = sample_manipulator(&desc.spec, &mut sample_rng(seed, 0)).unwrap();
            let r = m.rows();
            for v in [r[2].d, r[3].d, r[1].a, r[2].a] {
                assert!((0.0..=0.5).contains(&v));
            }
            let fixed: Vec<f64> = x
                .iter()
                .enumerate()
                .filter(|(i, _)| !desc.free_indices().contains(i))
                .map(|(_, v)| *v)
                .collect();
            match &first {
                None => first = Some(fixed),
                Some(f) => assert_eq!(f, &fixed),
            }
        }
    }

    #[test]
    fn all_dirac_spec_is_deterministic() {
        let (desc, _) = wrist_desc(1.0);
        let mut spec = desc.spec.clone();
        spec.r_d[2] = ElementDist::Dirac(0.2);
        spec.r_d[3] = ElementDist::Dirac(0.3);
        spec.r_a[1] = ElementDist::Dirac(0.4);
        spec.r_a[2] = ElementDist::Dirac(0.1);
        let a = sample_manipulator(&spec, &mut sample_rng(1, 0)).unwrap();
        let b = sample_manipulator(&spec, &mut sample_rng(2, 7)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.0.rows()[2].d, 0.2);
    }

    #[test]
    fn project_and_expand() {
        let (desc, scope) = wrist_desc(1.0);
        let (m, x) = sample_manipulator(&desc.spec, &mut sample_rng(3, 0)).unwrap();
        assert_eq!(full_input(&m, &scope), x);
        let free = desc.project(&x).unwrap();
        assert_eq!(free.len(), 4);
        assert_eq!(desc.expand(&free).unwrap(), x);
        let mut other = x.clone();
        other[12] = 0.3; // alpha_1 is fixed at pi/2
        assert!(desc.project(&other).is_none());
    }

    #[test]
    fn descriptor_validation() {
        let (desc, _) = wrist_desc(1.0);
        assert!(SubspaceDescriptor::new("a", desc.spec.clone(), [1, 27]).is_ok());
        assert!(SubspaceDescriptor::new("a", desc.spec.clone(), [0, 27]).is_err());
        assert!(SubspaceDescriptor::new("a", desc.spec.clone(), [5, 28]).is_err());
        assert!(SubspaceDescriptor::new("", desc.spec.clone(), [1, 2]).is_err());
    }

    #[test]
    fn generation_contract() {
        let (desc, scope) = wrist_desc(1.0);
        let desc = SubspaceDescriptor::new("mid", desc.spec, [10, 18]).unwrap();
        let ik = IkSettings::default();
        let d = generate_dataset(10, &desc, &scope, &ik, 42).unwrap();
        assert_eq!((d.rows(), d.x_cols(), d.y_cols()), (10, 4, 9));
        let again = generate_dataset(10, &desc, &scope, &ik, 42).unwrap();
        assert_eq!(d, again);

        // Recompute row 7 independently.
        let (m, x) = sample_manipulator(&desc.spec, &mut sample_rng(42, 7)).unwrap();
        let y = flatten(&discretize_workspace(&m, &scope, &ik).unwrap())[9..18].to_vec();
        assert_eq!(d.y_row(7), y.as_slice());
        assert_eq!(d.x_row(7), desc.project(&x).unwrap().as_slice());

        assert!(generate_dataset(0, &desc, &scope, &ik, 1).is_err());
        let other_scope = default_scope(0.5, 0.5).unwrap();
        assert!(generate_dataset(1, &desc, &other_scope, &ik, 1).is_err());
    }

    #[test]
    fn split_sizes() {
        let [a, b, c] = split_indices(1000, [0.7, 0.15, 0.15], 3).unwrap();
        assert_eq!((a.len(), b.len(), c.len()), (700, 150, 150));
        let [a, b, c] = split_indices(10, [0.7, 0.15, 0.15], 3).unwrap();
        assert_eq!((a.len(), b.len(), c.len()), (8, 1, 1));
        let mut all: Vec<usize> = a.iter().chain(&b).chain(&c).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        assert!(split_indices(3, [0.7, 0.15, 0.15], 3).is_err());
        assert!(split_indices(100, [0.7, 0.2, 0.2], 3).is_err());
        assert!(split_indices(100, [1.0, 0.0, 0.0], 3).is_err());
    }
}
