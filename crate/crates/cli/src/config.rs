//! Run configuration: one TOML document with `[system.*]`, `[task]` and
//! `[output]` tables. Unknown keys are rejected and every numeric parameter
//! is range-checked before any computation starts.

use std::path::PathBuf;

use num_complex::Complex64;
use psdyn_core::rational::CertificateParams;
use psdyn_core::sft::{Condition, WindowPotential};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemBlock,
    #[serde(default)]
    pub task: TaskConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemBlock {
    pub rational: Option<RationalConfig>,
    pub sft: Option<SftConfig>,
}

/// Complex numbers are written `[re, im]`.
pub type ComplexPair = [f64; 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RationalConfig {
    /// Lowest degree first.
    pub numerator: Vec<ComplexPair>,
    #[serde(default = "one")]
    pub denominator: Vec<ComplexPair>,
    pub seed: Option<ComplexPair>,
    #[serde(default = "default_root_tol")]
    pub root_tol: f64,
    #[serde(default)]
    pub certificate: CertificateConfig,
}

fn one() -> Vec<ComplexPair> {
    vec![[1.0, 0.0]]
}

fn default_root_tol() -> f64 {
    psdyn_core::rational::DEFAULT_ROOT_TOL
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertificateConfig {
    pub iterations: usize,
    pub attraction_tol: f64,
    pub max_period: usize,
    pub min_distance: f64,
    pub julia_points: usize,
}

impl Default for CertificateConfig {
    fn default() -> Self {
        let p = CertificateParams::default();
        CertificateConfig {
            iterations: p.iterations,
            attraction_tol: p.attraction_tol,
            max_period: p.max_period,
            min_distance: p.min_distance,
            julia_points: p.julia_points,
        }
    }
}

impl CertificateConfig {
    pub fn params(&self) -> CertificateParams {
        CertificateParams {
            iterations: self.iterations,
            attraction_tol: self.attraction_tol,
            max_period: self.max_period,
            min_distance: self.min_distance,
            julia_points: self.julia_points,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SftConfig {
    /// Optional symbol names, one per row.
    pub alphabet: Option<Vec<String>>,
    pub matrix: Vec<Vec<u8>>,
    pub eigen_tol: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CocycleChoice {
    #[default]
    Level,
    Derivative,
}

/// One term of a two-sided window potential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum PotentialTerm {
    Symbol { coefficient: f64, position: i64, symbol: u8 },
    Equal { coefficient: f64, a: i64, b: i64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskConfig {
    /// When present, must name the subcommand being run.
    pub command: Option<String>,
    pub cocycle: CocycleChoice,
    /// Level depth of the cone.
    pub depth: Option<u32>,
    /// Derivative-cocycle budget for rational preimage cones.
    pub budget: Option<f64>,
    pub n_max: Option<u32>,
    pub tolerance: f64,
    /// Absolute `s` values; otherwise `beta + s_offsets`.
    pub s_values: Option<Vec<f64>>,
    pub s_offsets: Vec<f64>,
    pub cell_depth: u32,
    pub alpha: Option<f64>,
    pub epsilon: f64,
    pub distortion_limit: f64,
    /// Largest accepted Radon-Nikodym factor of the conformal measure.
    pub rn_factor_limit: f64,
    /// Ball around the seed whose branch images are compared.
    pub rn_radius: f64,
    /// Deepest inverse branch in the conformal ratio check.
    pub rn_branch_depth: u32,
    pub seed: Option<u64>,
    pub pairs: usize,
    pub max_period: usize,
    pub measure_file: Option<PathBuf>,
    pub potential: Vec<PotentialTerm>,
    pub holder_constant: Option<f64>,
    pub holder_theta: f64,
    pub projection_depth: usize,
    /// Pressure of `-tilt * nu` in the growth command.
    pub tilt: f64,
}

impl Default for TaskConfig {
    fn default() -> Self {
        TaskConfig {
            command: None,
            cocycle: CocycleChoice::Level,
            depth: None,
            budget: None,
            n_max: None,
            tolerance: 1e-6,
            s_values: None,
            s_offsets: vec![0.1, 0.05, 0.02],
            cell_depth: 6,
            alpha: None,
            epsilon: 1e-4,
            distortion_limit: 1.5,
            rn_factor_limit: 1.5,
            rn_radius: 0.1,
            rn_branch_depth: 8,
            seed: None,
            pairs: 100,
            max_period: 6,
            measure_file: None,
            potential: Vec::new(),
            holder_constant: None,
            holder_theta: 0.5,
            projection_depth: 40,
            tilt: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: None,
            formats: vec![Format::Json, Format::Csv],
        }
    }
}

impl OutputConfig {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

/// The validated system block.
#[derive(Clone, Debug, PartialEq)]
pub enum SystemSpec {
    Rational(RationalConfig),
    Sft(SftConfig),
}

pub const MAX_DEPTH: u32 = 30;
/// Atoms sit this many levels below the deepest branch.
pub const RN_ATOM_GAP: u32 = 10;
pub const MAX_RN_BRANCH_DEPTH: u32 = 10;
pub const MAX_PERIOD: usize = 16;

fn bad<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Config(msg.into()))
}

fn in_open(name: &str, v: f64, lo: f64, hi: f64) -> Result<(), CliError> {
    if v > lo && v < hi {
        Ok(())
    } else {
        bad(format!("{name} = {v} must lie in ({lo}, {hi})"))
    }
}

fn finite(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() {
        Ok(())
    } else {
        bad(format!("{name} must be finite"))
    }
}

pub fn complex(p: ComplexPair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn system(&self) -> SystemSpec {
        match (&self.system.rational, &self.system.sft) {
            (Some(r), None) => SystemSpec::Rational(r.clone()),
            (None, Some(s)) => SystemSpec::Sft(s.clone()),
            _ => unreachable!("validated"),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        match (&self.system.rational, &self.system.sft) {
            (Some(r), None) => validate_rational(r)?,
            (None, Some(s)) => validate_sft(s)?,
            (None, None) => return bad("the system table needs a rational or an sft block"),
            (Some(_), Some(_)) => return bad("give exactly one of system.rational and system.sft"),
        }
        let t = &self.task;
        if let Some(d) = t.depth {
            if d == 0 || d > MAX_DEPTH {
                return bad(format!("depth = {d} must lie in 1..={MAX_DEPTH}"));
            }
        }
        if let Some(b) = t.budget {
            in_open("budget", b, 0.0, 200.0)?;
        }
        if let Some(n) = t.n_max {
            if n < psdyn_core::growth::MIN_ANNULI || n > 64 {
                return bad(format!("n_max = {n} must lie in {}..=64", psdyn_core::growth::MIN_ANNULI));
            }
        }
        in_open("tolerance", t.tolerance, 0.0, 1.0)?;
        if let Some(s) = &t.s_values {
            check_decreasing("s_values", s)?;
        }
        check_decreasing("s_offsets", &t.s_offsets)?;
        if t.s_offsets.iter().any(|&o| !(o > 0.0)) {
            return bad("s_offsets must be positive");
        }
        if t.cell_depth == 0 || t.cell_depth >= MAX_DEPTH {
            return bad(format!("cell_depth = {} must lie in 1..{MAX_DEPTH}", t.cell_depth));
        }
        if let Some(a) = t.alpha {
            in_open("alpha", a, 0.0, 1e6)?;
        }
        in_open("epsilon", t.epsilon, 0.0, 0.1)?;
        if !(t.distortion_limit >= 1.0) || !t.distortion_limit.is_finite() {
            return bad("distortion_limit must be finite and at least 1");
        }
        if !(t.rn_factor_limit >= 1.0) || !t.rn_factor_limit.is_finite() {
            return bad("rn_factor_limit must be finite and at least 1");
        }
        if !(t.rn_radius > 0.0) || !t.rn_radius.is_finite() {
            return bad("rn_radius must be positive");
        }
        if !(1..=MAX_RN_BRANCH_DEPTH).contains(&t.rn_branch_depth) {
            return bad(format!("rn_branch_depth must lie in 1..={MAX_RN_BRANCH_DEPTH}"));
        }
        if t.pairs == 0 || t.pairs > 1_000_000 {
            return bad("pairs must lie in 1..=1000000");
        }
        if t.max_period == 0 || t.max_period > MAX_PERIOD {
            return bad(format!("max_period must lie in 1..={MAX_PERIOD}"));
        }
        for term in &t.potential {
            let c = match term {
                PotentialTerm::Symbol { coefficient, .. } | PotentialTerm::Equal { coefficient, .. } => *coefficient,
            };
            finite("potential coefficient", c)?;
        }
        if let Some(c) = t.holder_constant {
            if !(c >= 0.0) || !c.is_finite() {
                return bad("holder_constant must be finite and non-negative");
            }
        }
        in_open("holder_theta", t.holder_theta, 0.0, 1.0)?;
        if t.projection_depth == 0 || t.projection_depth > 200 {
            return bad("projection_depth must lie in 1..=200");
        }
        finite("tilt", t.tilt)?;
        if self.output.formats.is_empty() {
            return bad("output.formats must not be empty");
        }
        Ok(())
    }

    pub fn window_potential(&self) -> WindowPotential {
        WindowPotential {
            terms: self
                .task
                .potential
                .iter()
                .map(|t| match *t {
                    PotentialTerm::Symbol {
                        coefficient,
                        position,
                        symbol,
                    } => (coefficient, Condition::Symbol { position, symbol }),
                    PotentialTerm::Equal { coefficient, a, b } => (coefficient, Condition::Equal { a, b }),
                })
                .collect(),
        }
    }
}

fn check_decreasing(name: &str, v: &[f64]) -> Result<(), CliError> {
    if v.is_empty() {
        return bad(format!("{name} must not be empty"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return bad(format!("{name} must be finite"));
    }
    if v.windows(2).any(|w| !(w[1] < w[0])) {
        return bad(format!("{name} must be strictly decreasing"));
    }
    Ok(())
}

fn validate_rational(r: &RationalConfig) -> Result<(), CliError> {
    for (name, coeffs) in [("numerator", &r.numerator), ("denominator", &r.denominator)] {
        if coeffs.is_empty() {
            return bad(format!("{name} needs at least one coefficient"));
        }
        if coeffs.len() > 65 {
            return bad(format!("{name} degree exceeds 64"));
        }
        if coeffs.iter().flatten().any(|x| !x.is_finite()) {
            return bad(format!("{name} coefficients must be finite"));
        }
    }
    if let Some(s) = r.seed {
        finite("seed re", s[0])?;
        finite("seed im", s[1])?;
    }
    in_open("root_tol", r.root_tol, 0.0, 1e-3)?;
    let c = &r.certificate;
    if c.iterations == 0 || c.iterations > 1_000_000 {
        return bad("certificate.iterations must lie in 1..=1000000");
    }
    if c.max_period == 0 || c.max_period > 10_000 {
        return bad("certificate.max_period must lie in 1..=10000");
    }
    if c.julia_points < 2 || c.julia_points > 1 << 22 {
        return bad("certificate.julia_points must lie in 2..=4194304");
    }
    in_open("certificate.attraction_tol", c.attraction_tol, 0.0, 1.0)?;
    in_open("certificate.min_distance", c.min_distance, 0.0, 1.0)?;
    Ok(())
}

fn validate_sft(s: &SftConfig) -> Result<(), CliError> {
    let k = s.matrix.len();
    if k == 0 || k > 255 {
        return bad("sft matrix must have between 1 and 255 rows");
    }
    for (i, row) in s.matrix.iter().enumerate() {
        if row.len() != k {
            return bad(format!("sft matrix row {i} has {} entries, expected {k}", row.len()));
        }
        if row.iter().any(|&x| x > 1) {
            return bad(format!("sft matrix row {i} has an entry other than 0 or 1"));
        }
    }
    if let Some(a) = &s.alphabet {
        if a.len() != k {
            return bad(format!("alphabet has {} names for {k} symbols", a.len()));
        }
    }
    if let Some(t) = s.eigen_tol {
        in_open("eigen_tol", t, 0.0, 1e-3)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN: &str = "[system.sft]\nmatrix = [[1, 1], [1, 0]]\n";

    #[test]
    fn minimal_sft_config() {
        let c = RunConfig::parse(GOLDEN).unwrap();
        assert!(matches!(c.system(), SystemSpec::Sft(_)));
        assert_eq!(c.task.s_offsets, vec![0.1, 0.05, 0.02]);
    }

    #[test]
    fn unknown_keys_rejected() {
        let e = RunConfig::parse(&format!("{GOLDEN}[task]\ndepht = 4\n")).unwrap_err();
        assert!(matches!(e, CliError::Config(_)));
        assert!(RunConfig::parse(&format!("{GOLDEN}colour = 1\n")).is_err());
    }

    #[test]
    fn ragged_matrix_rejected() {
        let e = RunConfig::parse("[system.sft]\nmatrix = [[1, 1], [1]]\n").unwrap_err();
        assert!(e.to_string().contains("row 1"), "{e}");
    }

    #[test]
    fn exactly_one_system() {
        let both = format!("{GOLDEN}[system.rational]\nnumerator = [[0, 0], [0, 0], [1, 0]]\n");
        assert!(RunConfig::parse(&both).is_err());
        assert!(RunConfig::parse("[task]\ndepth = 3\n").is_err());
    }

    #[test]
    fn ranges_checked() {
        for extra in ["depth = 0", "tolerance = 2.0", "s_offsets = [0.05, 0.1]", "epsilon = -1.0", "holder_theta = 1.0"] {
            assert!(RunConfig::parse(&format!("{GOLDEN}[task]\n{extra}\n")).is_err(), "{extra}");
        }
    }

    #[test]
    fn potential_terms() {
        let text = format!(
            "{GOLDEN}[[task.potential]]\ncoefficient = 0.7\nposition = -1\nsymbol = 1\n[[task.potential]]\ncoefficient = 0.2\na = -2\nb = 0\n"
        );
        let c = RunConfig::parse(&text).unwrap();
        assert_eq!(
            c.window_potential(),
            WindowPotential::new().symbol(0.7, -1, 1).equal(0.2, -2, 0)
        );
    }
}
