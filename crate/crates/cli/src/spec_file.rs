//! On-disk manifold specs (TOML).

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;
use specgeo::charts::ManifoldSpec;
use specgeo::parse_expression;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindName {
    Prepotential,
    OneForm,
}

/// Spec file schema. Angles are in degrees; complex numbers are `[re, im]`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub n: usize,
    pub kind: KindName,
    pub components: Vec<String>,
    pub sample_points: Vec<Vec<[f64; 2]>>,
    pub fd_step: Option<f64>,
    pub tol: Option<f64>,
    #[serde(default)]
    pub conic: bool,
    pub theta_samples: Option<Vec<f64>>,
    #[serde(default)]
    pub lambda_samples: Vec<[f64; 2]>,
    #[serde(default)]
    pub fibers: Vec<Vec<f64>>,
    #[serde(default)]
    pub expected_fail: Vec<String>,
    #[serde(default)]
    pub expected_skip: bool,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    pub seed: Option<u64>,
}

fn complex(p: &[f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

impl SpecFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Schema(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
        Self::parse(&text)
    }

    pub fn to_spec(&self) -> Result<ManifoldSpec<f64>, CliError> {
        let components = self
            .components
            .iter()
            .map(|c| parse_expression(c, self.n).map_err(|e| CliError::Schema(format!("component `{c}`: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let mut spec = match self.kind {
            KindName::Prepotential => {
                if components.len() != 1 {
                    return Err(CliError::Schema(format!(
                        "a prepotential takes exactly one component, got {}",
                        components.len()
                    )));
                }
                ManifoldSpec::prepotential(components.into_iter().next().unwrap())
            }
            KindName::OneForm => ManifoldSpec::one_form(components),
        };
        // validate() compares the declared n with the component count
        spec.n = self.n;
        spec.sample_points = self.sample_points.iter().map(|z| z.iter().map(complex).collect()).collect();
        if let Some(h) = self.fd_step {
            spec.fd_step = h;
        }
        if let Some(t) = self.tol {
            spec.tol = t;
        }
        spec.conic = self.conic;
        if let Some(th) = &self.theta_samples {
            spec.theta_samples = th.iter().map(|d| d.to_radians()).collect();
        }
        spec.lambda_samples = self.lambda_samples.iter().map(complex).collect();
        spec.fibers = self.fibers.clone();
        spec.expected_fail = self.expected_fail.clone();
        spec.expected_skip = self.expected_skip;
        spec.tolerances = self.tolerances.clone();
        if let Some(seed) = self.seed {
            spec.seed = seed;
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// Reads, schema-checks and converts a spec file.
pub fn load_spec(path: &Path) -> Result<ManifoldSpec<f64>, CliError> {
    SpecFile::load(path)?.to_spec()
}
