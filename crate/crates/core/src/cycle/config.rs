use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn default_kappa0() -> u32 {
    3
}

fn default_k1() -> f64 {
    1.0
}

/// Linear saddles `(λx, γy, A·u)` joined by polynomial transition maps.
///
/// Vector-valued fields have length `ss_dim`; an empty vector means zero.
/// Empty `a1`/`a2` default to `0.5·min(|λ₁|, |λ₂|)·I`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleModelConfig {
    pub lambda1: f64,
    pub gamma1: f64,
    pub lambda2: f64,
    pub gamma2: f64,
    pub ss_dim: usize,
    #[serde(default)]
    pub a1: Vec<Vec<f64>>,
    #[serde(default)]
    pub a2: Vec<Vec<f64>>,

    pub a12: f64,
    pub b12: f64,
    pub c12: f64,
    pub d12: f64,
    #[serde(default)]
    pub e12: Vec<f64>,
    #[serde(default)]
    pub f12: Vec<f64>,

    pub a21: f64,
    pub b21: f64,
    pub c21: f64,
    #[serde(default)]
    pub e21: Vec<f64>,
    #[serde(default)]
    pub f21: Vec<f64>,
    pub g21: f64,

    #[serde(default)]
    pub x1in: f64,
    pub y1out: f64,
    pub x2in: f64,
    #[serde(default)]
    pub u2in: Vec<f64>,
    #[serde(default)]
    pub y2out: f64,
    #[serde(default)]
    pub u1in: Vec<f64>,

    #[serde(default)]
    pub mu1: f64,
    pub delta_dom: f64,
    #[serde(default = "default_kappa0")]
    pub kappa0: u32,
    /// Constant in the admissibility inequality.
    #[serde(default = "default_k1")]
    pub k1: f64,
}

impl CycleModelConfig {
    /// The reference configuration `C₀`.
    pub fn reference() -> Self {
        Self {
            lambda1: 0.4,
            gamma1: 2.0,
            lambda2: 0.5,
            gamma2: 2.6,
            ss_dim: 1,
            a1: vec![vec![0.2]],
            a2: vec![vec![0.2]],
            a12: 0.0,
            b12: 1.0,
            c12: 1.0,
            d12: 1.0,
            e12: vec![0.0],
            f12: vec![0.0],
            a21: 0.0,
            b21: 1.0,
            c21: 1.0,
            e21: vec![0.0],
            f21: vec![0.0],
            g21: -1.0,
            x1in: 0.0,
            y1out: 1.0,
            x2in: 1.0,
            u2in: vec![0.0],
            y2out: 0.0,
            u1in: vec![0.0],
            mu1: 0.0,
            delta_dom: 0.25,
            kappa0: 3,
            k1: 1.0,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Toml(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn j12(&self) -> f64 {
        self.a12 * self.d12 - self.b12 * self.c12
    }

    pub fn sigma1(&self) -> f64 {
        (self.lambda1 * self.gamma1).abs()
    }

    pub fn sigma2(&self) -> f64 {
        (self.lambda2 * self.gamma2).abs()
    }

    /// `log σ₂ / log σ₁` with `γ₂` multiplied by `gamma2_scale`.
    pub fn mu2(&self, gamma2_scale: f64) -> f64 {
        (self.sigma2() * gamma2_scale.abs()).ln() / self.sigma1().ln()
    }

    /// `ς_ij = sign(−b21·c21·J₁₂·(λ₁γ₁)ⁱ(λ₂γ₂)ʲ)`.
    pub fn orientation(&self, i: u32, j: u32) -> f64 {
        let base = -self.b21 * self.c21 * self.j12();
        let p1 = (self.lambda1 * self.gamma1).signum().powi(i as i32);
        let p2 = (self.lambda2 * self.gamma2).signum().powi(j as i32);
        (base * p1 * p2).signum()
    }

    pub fn is_decoupled(&self) -> bool {
        let zero = |v: &Vec<f64>| v.iter().all(|&x| x == 0.0);
        zero(&self.e12) && zero(&self.f12) && zero(&self.e21) && zero(&self.f21)
    }

    fn ss_block(&self, m: &[Vec<f64>]) -> DMatrix<f64> {
        let n = self.ss_dim;
        if m.is_empty() {
            let d = 0.5 * self.lambda1.abs().min(self.lambda2.abs());
            return DMatrix::identity(n, n) * d;
        }
        DMatrix::from_fn(n, n, |r, c| m[r][c])
    }

    pub fn a1_matrix(&self) -> DMatrix<f64> {
        self.ss_block(&self.a1)
    }

    pub fn a2_matrix(&self) -> DMatrix<f64> {
        self.ss_block(&self.a2)
    }

    pub(crate) fn vector(&self, v: &[f64]) -> nalgebra::DVector<f64> {
        if v.is_empty() {
            nalgebra::DVector::zeros(self.ss_dim)
        } else {
            nalgebra::DVector::from_column_slice(v)
        }
    }

    fn shape_problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.ss_dim == 0 {
            out.push("ss_dim must be at least 1".to_string());
        }
        for (name, m) in [("a1", &self.a1), ("a2", &self.a2)] {
            if !m.is_empty() && (m.len() != self.ss_dim || m.iter().any(|r| r.len() != self.ss_dim)) {
                out.push(format!("{name} must be {0}x{0}", self.ss_dim));
            }
        }
        for (name, v) in [
            ("e12", &self.e12),
            ("f12", &self.f12),
            ("e21", &self.e21),
            ("f21", &self.f21),
            ("u2in", &self.u2in),
            ("u1in", &self.u1in),
        ] {
            if !v.is_empty() && v.len() != self.ss_dim {
                out.push(format!("{name} must have length {}", self.ss_dim));
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub value: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub sigma1: f64,
    pub sigma2: f64,
    pub mu2: f64,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues().iter().map(|l| l.norm()).fold(0.0, f64::max)
}

pub fn validate(cfg: &CycleModelConfig) -> ValidationReport {
    let mut checks = Vec::new();
    let mut push = |name, passed, value, detail: String| {
        checks.push(Check {
            name,
            passed,
            value,
            detail,
        })
    };
    let shape = cfg.shape_problems();
    push("dimensions", shape.is_empty(), shape.len() as f64, shape.join("; "));

    for (name, l, g) in [
        ("saddle1", cfg.lambda1, cfg.gamma1),
        ("saddle2", cfg.lambda2, cfg.gamma2),
    ] {
        let ok = l.abs() > 0.0 && l.abs() < 1.0 && g.abs() > 1.0;
        push(name, ok, l.abs(), format!("|lambda| = {}, |gamma| = {}", l.abs(), g.abs()));
    }
    let (s1, s2) = (cfg.sigma1(), cfg.sigma2());
    push(
        "dissipative_expanding",
        s1 < 1.0 && 1.0 < s2,
        s2,
        format!("sigma1 = {s1}, sigma2 = {s2}"),
    );
    let floor = cfg.lambda1.abs().min(cfg.lambda2.abs());
    let rho = if shape.is_empty() {
        spectral_radius(&cfg.a1_matrix()).max(spectral_radius(&cfg.a2_matrix()))
    } else {
        f64::NAN
    };
    push(
        "strong_stable",
        rho < floor,
        rho,
        format!("spectral radius {rho} vs min |lambda| {floor}"),
    );
    push("P1", cfg.g21 != 0.0, cfg.g21, "g21 != 0 (quadratic tangency)".into());
    push("P2", cfg.j12() != 0.0, cfg.j12(), "J12 = a12 d12 - b12 c12 != 0".into());
    push(
        "P3",
        cfg.b21 * cfg.c21 != 0.0,
        cfg.b21 * cfg.c21,
        "b21 c21 != 0".into(),
    );
    push("transversality", cfg.d12 != 0.0, cfg.d12, "d12 != 0".into());
    let signs = [(1, 1), (1, 2), (2, 1), (2, 2)].map(|(i, j)| cfg.orientation(i, j));
    push(
        "P4",
        signs.contains(&1.0),
        signs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        format!("orientation over parities (odd/even i, j): {signs:?}"),
    );
    push(
        "delta_dom",
        cfg.delta_dom > 0.0,
        cfg.delta_dom,
        "box half-width must be positive".into(),
    );
    ValidationReport {
        checks,
        sigma1: s1,
        sigma2: s2,
        mu2: cfg.mu2(1.0),
    }
}
