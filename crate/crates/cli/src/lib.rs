//! Command implementations behind the `specgeo` binary.

mod spec_file;

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use specgeo::charts::{regularity_matrix, ManifoldSpec};
use specgeo::cotangent::{g_n_at, j1_at, j2_at, BundlePoint, FormChoice};
use specgeo::geometry::{d_nabla_j, nabla_j, PointGeometry};
use specgeo::verify::{run_report, VerificationReport};
use thiserror::Error;

pub use spec_file::{load_spec, KindName, SpecFile};

/// Everything that maps to exit code 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {0}")]
    Io(String, #[source] std::io::Error),
    #[error("spec file rejected: {0}")]
    Schema(String),
    #[error(transparent)]
    Spec(#[from] specgeo::Error),
    #[error("point index {index} out of range (spec has {count} sample points)")]
    BadPoint { index: usize, count: usize },
    #[error("bad grid axis `{0}`: expected z<k>.<re|im>=<start>:<end>:<count>")]
    BadAxis(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

/// Exit status of a verification run: 0 when every check passed (or failed
/// as expected), 1 otherwise.
pub fn verify_exit_code(report: &VerificationReport) -> i32 {
    if report.summary.ok {
        0
    } else {
        1
    }
}

/// Loads a spec, runs the registry and returns the report.
pub fn cmd_verify(path: &Path, seed: Option<u64>) -> Result<VerificationReport, CliError> {
    let mut spec = load_spec(path)?;
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    Ok(run_report(&spec)?)
}

/// Tensors that `tensor` can print.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum TensorName {
    #[value(name = "J")]
    J,
    #[value(name = "g")]
    G,
    #[value(name = "omega")]
    Omega,
    #[value(name = "omega11")]
    Omega11,
    #[value(name = "omegaprime")]
    OmegaPrime,
    #[value(name = "J1")]
    J1,
    #[value(name = "J2")]
    J2,
    #[value(name = "gN")]
    GN,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FormName {
    Omega,
    Omega11,
    Omegaprime,
}

impl TensorName {
    pub fn label(self) -> &'static str {
        match self {
            TensorName::J => "J",
            TensorName::G => "g",
            TensorName::Omega => "omega",
            TensorName::Omega11 => "omega11",
            TensorName::OmegaPrime => "omegaprime",
            TensorName::J1 => "J1",
            TensorName::J2 => "J2",
            TensorName::GN => "gN",
        }
    }
}

impl From<FormName> for FormChoice {
    fn from(f: FormName) -> Self {
        match f {
            FormName::Omega => FormChoice::Full,
            FormName::Omega11 => FormChoice::Omega11,
            FormName::Omegaprime => FormChoice::OmegaPrime,
        }
    }
}

fn sample(spec: &ManifoldSpec<f64>, index: usize) -> Result<&[Complex64], CliError> {
    spec.sample_points
        .get(index)
        .map(Vec::as_slice)
        .ok_or(CliError::BadPoint { index, count: spec.sample_points.len() })
}

/// The requested tensor at sample `point`, as computed inside `verify`.
pub fn tensor_matrix(
    spec: &ManifoldSpec<f64>,
    point: usize,
    what: TensorName,
    form: FormName,
) -> Result<DMatrix<f64>, CliError> {
    let z = sample(spec, point)?;
    let geom = PointGeometry::at(spec, z)?;
    let fiber = spec
        .fibers
        .first()
        .map(|f| nalgebra::DVector::from_vec(f.clone()))
        .unwrap_or_else(|| nalgebra::DVector::zeros(geom.dim()));
    let xi = || BundlePoint::new(geom.clone(), fiber.clone());
    Ok(match what {
        TensorName::J => geom.j.clone(),
        TensorName::G => geom.metric.g.clone(),
        TensorName::Omega => geom.omega.clone(),
        TensorName::Omega11 => geom.split.omega11.clone(),
        TensorName::OmegaPrime => geom.split.omega_prime.clone(),
        TensorName::J1 => j1_at(&xi()).matrix,
        TensorName::J2 => j2_at(&xi(), form.into(), spec.tol)?.matrix,
        TensorName::GN => g_n_at(&xi())?,
    })
}

/// Plain-text matrix table, one row per line, 17 significant digits.
pub fn format_matrix(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| format!("{:>24.16e}", m[(r, c)])).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn cmd_tensor(path: &Path, point: usize, what: TensorName, form: FormName) -> Result<String, CliError> {
    let spec = load_spec(path)?;
    let m = tensor_matrix(&spec, point, what, form)?;
    let frame = if matches!(what, TensorName::J1 | TensorName::J2 | TensorName::GN) {
        "frame (dx, dy, dp)"
    } else {
        "frame (dx, dy)"
    };
    Ok(format!("# {} at sample {point}, {frame}, {}x{}\n{}", what.label(), m.nrows(), m.ncols(), format_matrix(&m)))
}

/// One scan direction: coordinate `z_k`, real or imaginary part, sampled
/// uniformly on `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub coordinate: usize,
    pub imaginary: bool,
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl Axis {
    /// Parses `z2.im=0.1:2:20`.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let bad = || CliError::BadAxis(text.to_string());
        let (var, range) = text.split_once('=').ok_or_else(bad)?;
        let (name, part) = var.trim().split_once('.').ok_or_else(bad)?;
        let coordinate: usize =
            name.strip_prefix('z').and_then(|k| k.parse().ok()).filter(|&k| k >= 1).ok_or_else(bad)?;
        let imaginary = match part {
            "re" => false,
            "im" => true,
            _ => return Err(bad()),
        };
        let parts: Vec<&str> = range.split(':').collect();
        let [start, end, count] = parts[..] else { return Err(bad()) };
        let start: f64 = start.trim().parse().map_err(|_| bad())?;
        let end: f64 = end.trim().parse().map_err(|_| bad())?;
        let count: usize = count.trim().parse().map_err(|_| bad())?;
        if count == 0 || !start.is_finite() || !end.is_finite() {
            return Err(bad());
        }
        Ok(Self { coordinate: coordinate - 1, imaginary, start, end, count })
    }

    pub fn value(&self, k: usize) -> f64 {
        if self.count == 1 {
            self.start
        } else {
            self.start + (self.end - self.start) * k as f64 / (self.count - 1) as f64
        }
    }

    fn label(&self) -> String {
        format!("z{}_{}", self.coordinate + 1, if self.imaginary { "im" } else { "re" })
    }
}

/// Scalars reported at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub params: Vec<f64>,
    /// `None` with a flag when the point is outside the regular domain.
    pub values: Option<ScanValues>,
    pub flag: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanValues {
    /// `det Im ∂F_i/∂z^j` (the Hessian of a prepotential).
    pub det_im_df: f64,
    pub det_g: f64,
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
    /// Extrapolated `max |d^∇J|`; `None` when the stencil leaves the regular domain.
    pub d_nabla_j: Option<f64>,
}

/// Evaluates the scan grid. Axes override coordinates of sample `base`.
pub fn scan(spec: &ManifoldSpec<f64>, base: usize, axes: &[Axis]) -> Result<Vec<ScanRow>, CliError> {
    let z0 = sample(spec, base)?.to_vec();
    if axes.is_empty() || axes.len() > 2 {
        return Err(CliError::BadAxis("a scan takes one or two --axis arguments".into()));
    }
    if let Some(a) = axes.iter().find(|a| a.coordinate >= spec.n) {
        return Err(CliError::BadAxis(format!("z{} exceeds n = {}", a.coordinate + 1, spec.n)));
    }
    let outer = axes.get(1).map_or(1, |a| a.count);
    let mut rows = Vec::with_capacity(axes[0].count * outer);
    for k1 in 0..outer {
        for k0 in 0..axes[0].count {
            let mut z = z0.clone();
            let mut params = Vec::with_capacity(axes.len());
            for (a, k) in axes.iter().zip([k0, k1]) {
                let v = a.value(k);
                if a.imaginary {
                    z[a.coordinate].im = v;
                } else {
                    z[a.coordinate].re = v;
                }
                params.push(v);
            }
            rows.push(scan_point(spec, &z, params));
        }
    }
    Ok(rows)
}

fn scan_point(spec: &ManifoldSpec<f64>, z: &[Complex64], params: Vec<f64>) -> ScanRow {
    let reg = match regularity_matrix(spec, z) {
        Ok(r) => r,
        Err(_) => return ScanRow { params, values: None, flag: "eval_error" },
    };
    let geom = match PointGeometry::at(spec, z) {
        Ok(g) => g,
        Err(_) => return ScanRow { params, values: None, flag: "not_regular" },
    };
    let d_nabla = nabla_j(spec, &geom.point).ok().map(|d| d_nabla_j(&d.extrapolated).max_abs());
    let sig = geom.metric.signature;
    ScanRow {
        params,
        values: Some(ScanValues {
            det_im_df: reg.det,
            det_g: geom.metric.g.clone().determinant(),
            positive: sig.positive,
            negative: sig.negative,
            zero: sig.zero,
            d_nabla_j: d_nabla,
        }),
        flag: if d_nabla.is_some() { "ok" } else { "fd_error" },
    }
}

/// CSV with a header; rejected grid points keep their parameters and an
/// empty value block.
pub fn scan_csv(axes: &[Axis], rows: &[ScanRow]) -> String {
    let mut out = String::new();
    let labels: Vec<String> = axes.iter().map(Axis::label).collect();
    let _ = writeln!(out, "{},det_im_df,det_g,sig_pos,sig_neg,sig_zero,d_nabla_j,flag", labels.join(","));
    for r in rows {
        let params: Vec<String> = r.params.iter().map(|p| format!("{p:.16e}")).collect();
        let values = match &r.values {
            Some(v) => format!(
                "{:.16e},{:.16e},{},{},{},{}",
                v.det_im_df,
                v.det_g,
                v.positive,
                v.negative,
                v.zero,
                v.d_nabla_j.map_or(String::new(), |d| format!("{d:.16e}"))
            ),
            None => ",,,,,".to_string(),
        };
        let _ = writeln!(out, "{},{},{}", params.join(","), values, r.flag);
    }
    out
}

pub fn cmd_scan(path: &Path, base: usize, axes: &[String]) -> Result<String, CliError> {
    let spec = load_spec(path)?;
    let axes = axes.iter().map(|a| Axis::parse(a)).collect::<Result<Vec<_>, _>>()?;
    let rows = scan(&spec, base, &axes)?;
    Ok(scan_csv(&axes, &rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_parsing() {
        let a = Axis::parse("z2.im=0.1:2:20").unwrap();
        assert_eq!(a, Axis { coordinate: 1, imaginary: true, start: 0.1, end: 2.0, count: 20 });
        assert!((a.value(19) - 2.0).abs() < 1e-15);
        for bad in ["z0.re=0:1:3", "z1.mod=0:1:3", "z1.re=0:1", "z1.re=0:1:0", "x1.re=0:1:2"] {
            assert!(Axis::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn matrix_table_round_trips() {
        let m = DMatrix::from_row_slice(2, 2, &[0.1, -2.0, 1e-300, 3.0]);
        let text = format_matrix(&m);
        let back: Vec<f64> = text.split_whitespace().map(|t| t.parse().unwrap()).collect();
        assert_eq!(back, vec![0.1, -2.0, 1e-300, 3.0]);
    }
}
