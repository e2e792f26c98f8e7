//! The JSON run configuration.
//!
//! ```json
//! {"scenario": "four_event",
//!  "u": [[[0,0],[1,0]], [[1,0],[0,0]]],
//!  "v": [[[1,0],[0,0]], [[0,0],[-1,0]]],
//!  "psi": [[1,0],[0,0]]}
//! ```
//!
//! Complex numbers are `[re, im]` pairs and matrices are lists of rows.
//! Missing `u`, `v` or `psi` are drawn from `seed` (default 0), in that order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use switchsim_core::random::{haar_unitary, random_state};
use switchsim_core::scenario::{ScenarioConfig, ScenarioKind};
use switchsim_core::{c64, Matrix, C64};

use crate::CliError;

pub type Complex = [f64; 2];
pub type Matrix2 = [[Complex; 2]; 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub scenario: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Matrix2>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Matrix2>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<[Complex; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_beta: Option<[Complex; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<[Complex; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn cx([re, im]: Complex) -> C64 {
    c64(re, im)
}

fn pair(z: C64) -> Complex {
    [z.re, z.im]
}

fn matrix(m: &Matrix2) -> Matrix {
    Matrix::from_rows(&[&[cx(m[0][0]), cx(m[0][1])], &[cx(m[1][0]), cx(m[1][1])]])
}

fn matrix2(m: &Matrix) -> Matrix2 {
    [[pair(m[(0, 0)]), pair(m[(0, 1)])], [pair(m[(1, 0)]), pair(m[(1, 1)])]]
}

impl RunConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse(format!("config: {e}")))
    }

    /// Resolves random fills and checks the configuration invariants.
    pub fn into_config(self) -> Result<ScenarioConfig, CliError> {
        let kind: ScenarioKind = self.scenario.parse()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed.unwrap_or(0));
        let u = self.u.as_ref().map_or_else(|| haar_unitary(2, &mut rng), matrix);
        let v = self.v.as_ref().map_or_else(|| haar_unitary(2, &mut rng), matrix);
        let psi = match self.psi {
            Some([a, b]) => [cx(a), cx(b)],
            None => {
                let p = random_state(2, &mut rng);
                [p[0], p[1]]
            }
        };
        let mut cfg = ScenarioConfig::new(kind, u, v, psi);
        cfg.alpha_beta = self.alpha_beta.map(|[a, b]| (cx(a), cx(b)));
        cfg.gamma = self.gamma.map(|[a, b]| [cx(a), cx(b)]);
        cfg.validate()?;
        Ok(cfg)
    }

    /// The fully explicit file describing `cfg`.
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        Self {
            scenario: cfg.kind.as_str().to_string(),
            u: Some(matrix2(&cfg.u)),
            v: Some(matrix2(&cfg.v)),
            psi: Some(cfg.psi.map(pair)),
            alpha_beta: cfg.alpha_beta.map(|(a, b)| [pair(a), pair(b)]),
            gamma: cfg.gamma.map(|g| g.map(pair)),
            seed: None,
        }
    }
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig, CliError> {
    RunConfigFile::parse(text)?.into_config()
}

pub fn load_config(path: &str) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text)
}
