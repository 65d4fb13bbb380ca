use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::data::{self, Dataset, FeatureId, FeatureMask, Label, Standardization};
use crate::error::{Error, Result};

use super::kernel::{rbf, KernelParams};
use super::smo::TrainConfig;

const SCHEMA: &str = "galloping-svm-model 1";

/// Trained Gaussian-kernel classifier.
///
/// Support vectors live in the scaled feature space; [`SvmModel::prepare`]
/// maps raw data into that space.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    columns: Vec<FeatureId>,
    support_vectors: Vec<f64>,
    dual_coefficients: Vec<f64>,
    bias: f64,
    kernel: KernelParams,
    c: f64,
    standardization: Option<Standardization>,
}

impl SvmModel {
    /// Assembles a model and checks its structural invariants.
    pub fn from_parts(
        mask: FeatureMask,
        support_vectors: Vec<Vec<f64>>,
        dual_coefficients: Vec<f64>,
        bias: f64,
        kernel: KernelParams,
        c: f64,
        standardization: Option<Standardization>,
    ) -> Result<Self> {
        let columns = mask.features();
        let d = columns.len();
        if support_vectors.is_empty() || support_vectors.len() != dual_coefficients.len() {
            return Err(Error::InvalidParameter(format!(
                "{} support vectors with {} coefficients",
                support_vectors.len(),
                dual_coefficients.len()
            )));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("C must be > 0, got {c}")));
        }
        if !bias.is_finite() {
            return Err(Error::InvalidParameter("bias is not finite".into()));
        }
        for &a in &dual_coefficients {
            if !a.is_finite() || a.abs() > c * (1.0 + 1e-9) {
                return Err(Error::InvalidParameter(format!(
                    "coefficient {a} outside [-C, C] for C = {c}"
                )));
            }
        }
        if let Some(s) = &standardization {
            if s.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: s.len(),
                });
            }
            if s.std_devs.iter().any(|&v| !(v > 0.0 && v.is_finite()))
                || s.means.iter().any(|v| !v.is_finite())
            {
                return Err(Error::InvalidParameter("invalid standardization".into()));
            }
        }
        let mut flat = Vec::with_capacity(support_vectors.len() * d);
        for sv in &support_vectors {
            if sv.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: sv.len(),
                });
            }
            if sv.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter("non-finite support vector".into()));
            }
            flat.extend_from_slice(sv);
        }
        Ok(Self {
            columns,
            support_vectors: flat,
            dual_coefficients,
            bias,
            kernel,
            c,
            standardization,
        })
    }

    pub(crate) fn from_solution(
        data: &Dataset,
        alpha: &[f64],
        bias: f64,
        config: &TrainConfig,
    ) -> Result<Self> {
        let floor = 1e-8 * config.c;
        let mut svs = Vec::new();
        let mut coef = Vec::new();
        for (i, &a) in alpha.iter().enumerate() {
            if a >= floor {
                svs.push(data.row(i).to_vec());
                coef.push(a * data.label(i).sign());
            }
        }
        Self::from_parts(
            data.mask()?,
            svs,
            coef,
            bias,
            config.kernel,
            config.c,
            data.standardization().cloned(),
        )
    }

    pub fn feature_mask(&self) -> FeatureMask {
        FeatureMask::from_features(&self.columns).expect("model columns form a valid mask")
    }

    pub fn columns(&self) -> &[FeatureId] {
        &self.columns
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn support_vector_count(&self) -> usize {
        self.dual_coefficients.len()
    }

    pub fn support_vector(&self, k: usize) -> &[f64] {
        let d = self.dim();
        &self.support_vectors[k * d..(k + 1) * d]
    }

    pub fn support_vectors(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.support_vector_count()).map(move |k| self.support_vector(k))
    }

    /// `alpha_i * y_i` for each support vector.
    pub fn dual_coefficients(&self) -> &[f64] {
        &self.dual_coefficients
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn kernel(&self) -> KernelParams {
        self.kernel
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn standardization(&self) -> Option<&Standardization> {
        self.standardization.as_ref()
    }

    /// `sum_i coef_i k(sv_i, x) + bias` for an already scaled `x`.
    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let gamma = self.kernel.gamma();
        let sum: f64 = self
            .support_vectors()
            .zip(&self.dual_coefficients)
            .map(|(sv, a)| a * rbf(sv, x, gamma))
            .sum();
        Ok(sum + self.bias)
    }

    /// Galloping when the decision value is `>= 0`; an exact zero counts as
    /// galloping.
    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        Ok(label_for(self.decision_value(x)?))
    }

    /// Projects `dataset` onto the model's features and applies the stored
    /// scaling, unless the data already carries that same scaling.
    pub fn prepare(&self, dataset: &Dataset) -> Result<Dataset> {
        let projected = data::project(dataset, self.feature_mask())?;
        match (projected.standardization(), &self.standardization) {
            (None, Some(s)) => data::apply_standardization(&projected, s),
            (None, None) => Ok(projected),
            (Some(have), Some(want)) if have == want => Ok(projected),
            _ => Err(Error::InvalidParameter(
                "dataset scaling does not match the model".into(),
            )),
        }
    }

    /// Same support vectors with every coefficient and the bias negated.
    pub fn negated(&self) -> Self {
        let mut m = self.clone();
        m.dual_coefficients.iter_mut().for_each(|a| *a = -*a);
        m.bias = -m.bias;
        m
    }

    fn to_text(&self) -> String {
        let mut s = String::new();
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ");
        let _ = writeln!(s, "{SCHEMA}");
        let _ = writeln!(s, "gamma {:?}", self.kernel.gamma());
        let _ = writeln!(s, "c {:?}", self.c);
        let _ = writeln!(s, "bias {:?}", self.bias);
        let _ = writeln!(s, "features {}", self.feature_mask().names());
        match &self.standardization {
            Some(st) => {
                let _ = writeln!(s, "standardization yes");
                let _ = writeln!(s, "mean {}", join(&st.means));
                let _ = writeln!(s, "std_dev {}", join(&st.std_devs));
            }
            None => {
                let _ = writeln!(s, "standardization no");
            }
        }
        let _ = writeln!(s, "support_vectors {}", self.support_vector_count());
        for (sv, a) in self.support_vectors().zip(&self.dual_coefficients) {
            let _ = writeln!(s, "{a:?} {}", join(sv));
        }
        s
    }
}

pub(crate) fn label_for(decision: f64) -> Label {
    if decision >= 0.0 {
        Label::Galloping
    } else {
        Label::Normal
    }
}

pub fn save_model(model: &SvmModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model.to_text()).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SvmModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let schema = |message: String| Error::Schema {
        path: path.to_path_buf(),
        message,
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));

    let mut next = |key: &str| -> Result<(usize, String)> {
        let (n, line) = lines
            .next()
            .ok_or_else(|| schema(format!("file ends before `{key}`")))?;
        if key.is_empty() {
            return Ok((n, line.to_string()));
        }
        match line.split_once(' ') {
            Some((k, rest)) if k == key => Ok((n, rest.trim().to_string())),
            _ if line == key => Ok((n, String::new())),
            _ => Err(schema(format!("line {n}: expected `{key}`"))),
        }
    };
    let floats = |n: usize, text: &str| -> Result<Vec<f64>> {
        text.split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| schema(format!("line {n}: bad number `{t}`")))
            })
            .collect()
    };
    let scalar = |n: usize, text: &str| -> Result<f64> {
        match floats(n, text)?.as_slice() {
            [v] => Ok(*v),
            _ => Err(schema(format!("line {n}: expected one number"))),
        }
    };

    let (_, version) = next("")?;
    if version != SCHEMA {
        return Err(schema(format!("unsupported schema `{version}`, expected `{SCHEMA}`")));
    }
    let (n, v) = next("gamma")?;
    let kernel = KernelParams::new(scalar(n, &v)?)?;
    let (n, v) = next("c")?;
    let c = scalar(n, &v)?;
    let (n, v) = next("bias")?;
    let bias = scalar(n, &v)?;
    let (_, v) = next("features")?;
    let mask = FeatureMask::parse_names(&v)?;
    let (n, v) = next("standardization")?;
    let standardization = match v.as_str() {
        "yes" => {
            let (n, m) = next("mean")?;
            let means = floats(n, &m)?;
            let (n, s) = next("std_dev")?;
            let std_devs = floats(n, &s)?;
            Some(Standardization { means, std_devs })
        }
        "no" => None,
        other => return Err(schema(format!("line {n}: bad standardization flag `{other}`"))),
    };
    let (n, v) = next("support_vectors")?;
    let count: usize = v
        .parse()
        .map_err(|_| schema(format!("line {n}: bad support vector count")))?;
    let mut svs = Vec::with_capacity(count);
    let mut coef = Vec::with_capacity(count);
    for _ in 0..count {
        let (n, line) = next("")?;
        let mut values = floats(n, &line)?;
        if values.len() != mask.len() + 1 {
            return Err(schema(format!(
                "line {n}: expected {} values, found {}",
                mask.len() + 1,
                values.len()
            )));
        }
        coef.push(values.remove(0));
        svs.push(values);
    }
    if let Some((n, _)) = lines.find(|(_, l)| !l.is_empty()) {
        return Err(schema(format!("line {n}: unexpected trailing content")));
    }
    SvmModel::from_parts(mask, svs, coef, bias, kernel, c, standardization)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_sv() -> SvmModel {
        SvmModel::from_parts(
            FeatureMask::from_features(&[FeatureId::WindSpeed, FeatureId::Humidity]).unwrap(),
            vec![vec![0.5, -1.0]],
            vec![1.0],
            0.0,
            KernelParams::new(0.7).unwrap(),
            10.0,
            None,
        )
        .unwrap()
    }

    #[test]
    fn decision_at_support_vector() {
        let m = one_sv();
        assert_eq!(m.decision_value(&[0.5, -1.0]).unwrap(), 1.0);
        assert_eq!(m.negated().decision_value(&[0.5, -1.0]).unwrap(), -1.0);
        assert!(m.decision_value(&[0.5]).is_err());
    }

    #[test]
    fn sign_rule() {
        assert_eq!(label_for(2.3), Label::Galloping);
        assert_eq!(label_for(-0.1), Label::Normal);
        assert_eq!(label_for(0.0), Label::Galloping);
    }

    #[test]
    fn rejects_broken_parts() {
        let mask = FeatureMask::from_features(&[FeatureId::WindSpeed]).unwrap();
        let k = KernelParams::new(1.0).unwrap();
        assert!(SvmModel::from_parts(mask, vec![], vec![], 0.0, k, 1.0, None).is_err());
        assert!(SvmModel::from_parts(mask, vec![vec![0.0]], vec![2.0], 0.0, k, 1.0, None).is_err());
        assert!(SvmModel::from_parts(mask, vec![vec![0.0, 1.0]], vec![1.0], 0.0, k, 1.0, None).is_err());
    }

    #[test]
    fn text_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.txt");
        let mut m = one_sv();
        m.standardization = Some(Standardization {
            means: vec![3.25, 70.0],
            std_devs: vec![0.1, 1.0 / 3.0],
        });
        save_model(&m, &path).unwrap();
        assert_eq!(load_model(&path).unwrap(), m);
    }

    #[test]
    fn malformed_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.txt");
        save_model(&one_sv(), &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();

        let cut: String = text.lines().take(5).map(|l| format!("{l}\n")).collect();
        fs::write(&path, cut).unwrap();
        assert!(matches!(load_model(&path), Err(Error::Schema { .. })));

        fs::write(&path, text.replace("gamma 0.7", "gamma -1.0")).unwrap();
        assert!(matches!(load_model(&path), Err(Error::InvalidParameter(_))));

        fs::write(&path, text.replace("model 1", "model 9")).unwrap();
        assert!(matches!(load_model(&path), Err(Error::Schema { .. })));
    }
}
