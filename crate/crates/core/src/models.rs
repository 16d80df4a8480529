//! Anyon species and the local braiding data derived from them.
//!
//! Every non-Abelian model acts on the sequential fusion path basis through
//! `b = c_id * 1 + c_e * e`, where `e` is the positive Jones-Wenzl projector
//! scaled so that its nonzero eigenvalue equals the quantum dimension `d`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mat2 = [[C64; 2]; 2];
pub type Mat4 = [[C64; 4]; 4];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum AnyonModel {
    Ising,
    SU2k(u32),
    /// Counterclockwise exchange multiplies the state by `e^{i phi / 2}`.
    AbelianPhase(f64),
}

/// Coefficients of a generator in the path basis: `b = id * 1 + e * E`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneratorCoefficients {
    pub id: C64,
    pub e: C64,
}

impl GeneratorCoefficients {
    pub fn inverse(self) -> Self {
        GeneratorCoefficients {
            id: self.id.conj(),
            e: self.e.conj(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModelScalars {
    pub k: u32,
    pub d: f64,
    pub q: C64,
    pub a: C64,
}

impl ModelScalars {
    /// Loop value `-A^2 - A^{-2}` of the bracket at this `A`.
    pub fn loop_value(&self) -> f64 {
        (-self.a * self.a - (self.a * self.a).inv()).re
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalBraidMatrices {
    pub r: Mat2,
    pub b: Mat2,
    pub p: Mat4,
    pub f: [[f64; 2]; 2],
}

/// Recoupling and exchange data for spin-1/2 irreps at level `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelData {
    pub scalars: ModelScalars,
    /// `F^{1/2 1/2 1/2}_{1/2}` in the basis of intermediate charge 0, 1.
    pub f: [[f64; 2]; 2],
    /// Exchange eigenvalue of two spin-1/2 anyons in fusion channel 0 and 1.
    pub exchange: [C64; 2],
    pub coefficients: GeneratorCoefficients,
    /// The qubit-structured matrices; only defined at `k = 2`.
    pub local: Option<LocalBraidMatrices>,
}

/// Quantum integer `[n] = sin(n pi/(k+2)) / sin(pi/(k+2))`.
pub fn qint(n: i64, k: u32) -> f64 {
    let x = PI / (k as f64 + 2.0);
    (n as f64 * x).sin() / x.sin()
}

pub fn quantum_scalars(k: u32) -> Result<ModelScalars> {
    if k == 0 {
        return Err(Error::ZeroLevel);
    }
    let kk = k as f64 + 2.0;
    Ok(ModelScalars {
        k,
        d: 2.0 * (PI / kk).cos(),
        q: C64::from_polar(1.0, 2.0 * PI / kk),
        a: C64::from_polar(1.0, -PI / (2.0 * kk)),
    })
}

fn phase(x: f64) -> C64 {
    C64::from_polar(1.0, x)
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

const ISING_F: [[f64; 2]; 2] = [
    [
        std::f64::consts::FRAC_1_SQRT_2,
        std::f64::consts::FRAC_1_SQRT_2,
    ],
    [
        std::f64::consts::FRAC_1_SQRT_2,
        -std::f64::consts::FRAC_1_SQRT_2,
    ],
];

pub fn ising_matrices() -> LocalBraidMatrices {
    let w = phase(-PI / 8.0);
    let z = C64::new(0.0, 0.0);
    let i = c(0.0, 1.0);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let b = [
        [w * s * phase(PI / 4.0), w * s * phase(-PI / 4.0)],
        [w * s * phase(-PI / 4.0), w * s * phase(PI / 4.0)],
    ];
    let mut p = [[z; 4]; 4];
    p[0][0] = w;
    p[1][1] = w * i;
    p[2][2] = w * i;
    p[3][3] = w;
    LocalBraidMatrices {
        r: [[w, z], [z, w * i]],
        b,
        p,
        f: ISING_F,
    }
}

fn i_conj2(m: &Mat2) -> Mat2 {
    let i = c(0.0, 1.0);
    let mut out = *m;
    for row in out.iter_mut() {
        for x in row.iter_mut() {
            *x = i * x.conj();
        }
    }
    out
}

pub fn su2_2_matrices() -> LocalBraidMatrices {
    let m = ising_matrices();
    let i = c(0.0, 1.0);
    let mut p = m.p;
    for row in p.iter_mut() {
        for x in row.iter_mut() {
            *x = i * x.conj();
        }
    }
    LocalBraidMatrices {
        r: i_conj2(&m.r),
        b: i_conj2(&m.b),
        p,
        f: m.f,
    }
}

/// Qubit-structured matrices of a `k = 2` path-basis representation.
fn local_from_coefficients(co: GeneratorCoefficients) -> LocalBraidMatrices {
    let z = C64::new(0.0, 0.0);
    let d = std::f64::consts::SQRT_2;
    let vac = co.id + co.e * d;
    let h = co.e * std::f64::consts::FRAC_1_SQRT_2;
    let mut p = [[z; 4]; 4];
    p[0][0] = vac;
    p[1][1] = co.id;
    p[2][2] = co.id;
    p[3][3] = vac;
    LocalBraidMatrices {
        r: [[vac, z], [z, co.id]],
        b: [[co.id + h, h], [h, co.id + h]],
        p,
        f: ISING_F,
    }
}

pub fn su2_k_data(k: u32) -> Result<LevelData> {
    let scalars = quantum_scalars(k)?;
    let d = scalars.d;
    let off = (d * d - 1.0).max(0.0).sqrt() / d;
    let coefficients = GeneratorCoefficients {
        id: scalars.a.inv(),
        e: -scalars.a,
    };
    Ok(LevelData {
        scalars,
        f: [[1.0 / d, off], [off, -1.0 / d]],
        exchange: [coefficients.id + coefficients.e * d, coefficients.id],
        coefficients,
        local: (k == 2).then(|| local_from_coefficients(coefficients)),
    })
}

impl AnyonModel {
    pub fn trivial() -> Self {
        AnyonModel::AbelianPhase(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            AnyonModel::SU2k(0) => Err(Error::ZeroLevel),
            AnyonModel::AbelianPhase(phi) if !phi.is_finite() => {
                Err(Error::InvalidModel(format!("non-finite phase {phi}")))
            }
            _ => Ok(()),
        }
    }

    /// Truncation level of the fusion rules, `None` for Abelian phases.
    pub fn level(&self) -> Option<u32> {
        match *self {
            AnyonModel::Ising => Some(2),
            AnyonModel::SU2k(k) => Some(k),
            AnyonModel::AbelianPhase(_) => None,
        }
    }

    pub fn is_abelian(&self) -> bool {
        self.level().is_none()
    }

    pub fn scalars(&self) -> Option<ModelScalars> {
        self.level().and_then(|k| quantum_scalars(k).ok())
    }

    pub fn quantum_dimension(&self) -> f64 {
        self.scalars().map_or(1.0, |s| s.d)
    }

    pub fn coefficients(&self) -> Result<GeneratorCoefficients> {
        self.validate()?;
        Ok(match *self {
            AnyonModel::Ising => GeneratorCoefficients {
                id: phase(3.0 * PI / 8.0),
                e: phase(-3.0 * PI / 8.0),
            },
            AnyonModel::SU2k(k) => su2_k_data(k)?.coefficients,
            AnyonModel::AbelianPhase(phi) => GeneratorCoefficients {
                id: phase(phi / 2.0),
                e: C64::new(0.0, 0.0),
            },
        })
    }

    /// Abelian exchange phase, `None` for non-Abelian models.
    pub fn abelian_phase(&self) -> Option<C64> {
        match *self {
            AnyonModel::AbelianPhase(phi) => Some(phase(phi / 2.0)),
            _ => None,
        }
    }

    /// Bracket variable `X` for which `b = X^{-1} + X U` with `U` a
    /// Temperley-Lieb generator of loop value `-X^2 - X^{-2}`.
    pub fn bracket_variable(&self) -> Option<C64> {
        match *self {
            AnyonModel::Ising => Some(phase(-3.0 * PI / 8.0)),
            AnyonModel::SU2k(k) => quantum_scalars(k).ok().map(|s| s.a),
            AnyonModel::AbelianPhase(_) => None,
        }
    }

    pub fn local_matrices(&self) -> Option<LocalBraidMatrices> {
        match *self {
            AnyonModel::Ising => Some(ising_matrices()),
            AnyonModel::SU2k(2) => Some(su2_2_matrices()),
            _ => None,
        }
    }
}

impl fmt::Display for AnyonModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnyonModel::Ising => write!(f, "ising"),
            AnyonModel::SU2k(k) => write!(f, "su2k:{k}"),
            AnyonModel::AbelianPhase(phi) => write!(f, "abelian:{phi}"),
        }
    }
}

/// Parses `1.2`, `pi`, `pi/4`, `2pi/3`, `2*pi/3`.
fn parse_angle(s: &str) -> Option<f64> {
    let s = s.trim().to_ascii_lowercase().replace(' ', "");
    if let Ok(x) = s.parse::<f64>() {
        return Some(x);
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.to_string(), d.parse::<f64>().ok()?),
        None => (s.clone(), 1.0),
    };
    let coeff = num.strip_suffix("pi")?.trim_end_matches('*');
    let coeff = if coeff.is_empty() {
        1.0
    } else if coeff == "-" {
        -1.0
    } else {
        coeff.parse::<f64>().ok()?
    };
    Some(coeff * PI / den)
}

impl FromStr for AnyonModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        let model = match t.split_once(':') {
            None if t == "ising" => AnyonModel::Ising,
            None if t == "hadamard" || t == "trivial" => AnyonModel::trivial(),
            Some(("su2k", k)) => {
                AnyonModel::SU2k(k.parse().map_err(|_| Error::InvalidModel(s.to_string()))?)
            }
            Some(("abelian", phi)) => AnyonModel::AbelianPhase(
                parse_angle(phi).ok_or_else(|| Error::InvalidModel(s.to_string()))?,
            ),
            _ => return Err(Error::InvalidModel(s.to_string())),
        };
        model.validate()?;
        Ok(model)
    }
}

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn mat2_adjoint(a: &Mat2) -> Mat2 {
    [
        [a[0][0].conj(), a[1][0].conj()],
        [a[0][1].conj(), a[1][1].conj()],
    ]
}
