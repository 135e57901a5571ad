//! Mixed-integer test problems.
//!
//! Each base objective `f̃(x̃)` is defined on an original box `[ℓ, u]`. The
//! mixed-integer instance keeps the continuous variables as they are and
//! replaces each integer variable by an integer `x_i ∈ {0, …, 100}` decoded
//! as `x̃_i = ℓ_i + x_i (u_i - ℓ_i) / 100`. Constraint families are applied
//! to the decoded vector.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Bounds, VariablePartition};
use crate::oracle::{ProblemInstance, Response};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseObjective {
    /// `max_i x_i^2`
    Maxq,
    /// `max_i |Σ_j x_j / (i + j + 1)|` (0-based indices)
    Mxhilb,
    /// `Σ_i |Σ_j x_j / (i + j + 1)|`
    L1hilb,
    /// `n max_i x_i - Σ_i x_i`
    Goffin,
    /// `max_i |x_i|`
    Maxl,
    /// `Σ_{c}(x_i - c_i)^2 + Σ_{z}|x_i - z_i|` on 2 + 2 variables.
    Sepquad,
    /// `max(|x_0 - 1.5|, |x_1 + 2|) + 10|z_0 - z_1| + |z_0 + z_1 - 140|`:
    /// the integer optimum lies along the diagonal, which coordinate moves
    /// cannot follow.
    Diagvalley,
}

/// Continuous targets and integer targets of [`BaseObjective::Sepquad`].
pub const SEPQUAD_CONTINUOUS_TARGET: [f64; 2] = [2.5, 7.25];
pub const SEPQUAD_INTEGER_TARGET: [f64; 2] = [37.0, 62.0];

impl BaseObjective {
    pub fn name(self) -> &'static str {
        match self {
            Self::Maxq => "maxq",
            Self::Mxhilb => "mxhilb",
            Self::L1hilb => "l1hilb",
            Self::Goffin => "goffin",
            Self::Maxl => "maxl",
            Self::Sepquad => "sepquad",
            Self::Diagvalley => "diagvalley",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "maxq" => Self::Maxq,
            "mxhilb" => Self::Mxhilb,
            "l1hilb" => Self::L1hilb,
            "goffin" => Self::Goffin,
            "maxl" => Self::Maxl,
            "sepquad" => Self::Sepquad,
            "diagvalley" => Self::Diagvalley,
            _ => return None,
        })
    }

    /// Fixed dimension for synthetic bases.
    fn fixed_dimension(self) -> Option<usize> {
        match self {
            Self::Sepquad | Self::Diagvalley => Some(4),
            _ => None,
        }
    }

    /// Default dimension when a name omits `(n)`.
    fn default_dimension(self) -> usize {
        match self {
            Self::Maxq | Self::Maxl => 20,
            Self::Mxhilb | Self::Goffin | Self::L1hilb => 50,
            Self::Sepquad | Self::Diagvalley => 4,
        }
    }

    pub fn evaluate(self, x: &[f64]) -> f64 {
        let n = x.len();
        let hilbert_row = |i: usize| -> f64 {
            x.iter()
                .enumerate()
                .map(|(j, &v)| v / (i + j + 1) as f64)
                .sum()
        };
        match self {
            Self::Maxq => x.iter().map(|v| v * v).fold(f64::NEG_INFINITY, f64::max),
            Self::Mxhilb => (0..n).map(|i| hilbert_row(i).abs()).fold(0.0, f64::max),
            Self::L1hilb => (0..n).map(|i| hilbert_row(i).abs()).sum(),
            Self::Goffin => {
                let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                n as f64 * max - x.iter().sum::<f64>()
            }
            Self::Maxl => x.iter().map(|v| v.abs()).fold(0.0, f64::max),
            Self::Sepquad => {
                let c = SEPQUAD_CONTINUOUS_TARGET;
                let z = SEPQUAD_INTEGER_TARGET;
                (x[0] - c[0]).powi(2)
                    + (x[1] - c[1]).powi(2)
                    + (x[2] - z[0]).abs()
                    + (x[3] - z[1]).abs()
            }
            Self::Diagvalley => {
                (x[0] - 1.5).abs().max((x[1] + 2.0).abs())
                    + 10.0 * (x[2] - x[3]).abs()
                    + (x[2] + x[3] - 140.0).abs()
            }
        }
    }

    /// Original box in the decoded space.
    fn original_box(self, n: usize, n_c: usize) -> (Vec<f64>, Vec<f64>) {
        match self {
            // all-ones reference point, widened by 10 on each side
            Self::Maxq | Self::Mxhilb | Self::L1hilb | Self::Goffin | Self::Maxl => {
                (vec![1.0 - 10.0; n], vec![1.0 + 10.0; n])
            }
            Self::Sepquad => {
                let mut l = vec![0.0; n_c];
                let mut u = vec![10.0; n_c];
                l.extend([0.0, 0.0]);
                u.extend([100.0, 100.0]);
                (l, u)
            }
            Self::Diagvalley => {
                let mut l = vec![-5.0; n_c];
                let mut u = vec![5.0; n_c];
                l.extend([0.0, 0.0]);
                u.extend([100.0, 100.0]);
                (l, u)
            }
        }
    }
}

/// Which of the two shipped suites to list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Bound,
    Constrained,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub base: BaseObjective,
    pub n_c: usize,
    pub n_z: usize,
    pub original_lower: Vec<f64>,
    pub original_upper: Vec<f64>,
    pub family: Option<u8>,
}

impl ProblemSpec {
    /// Spec for `base` in dimension `n` with `⌈n/2⌉` continuous and `⌊n/2⌋`
    /// integer variables.
    pub fn new(base: BaseObjective, n: usize) -> Result<Self> {
        if let Some(fixed) = base.fixed_dimension() {
            if n != fixed {
                return Err(Error::UnknownProblem(format!("{}({n})", base.name())));
            }
        }
        if n < 2 {
            return Err(Error::UnknownProblem(format!("{}({n})", base.name())));
        }
        let n_z = n / 2;
        let n_c = n - n_z;
        let (original_lower, original_upper) = base.original_box(n, n_c);
        Ok(Self {
            base,
            n_c,
            n_z,
            original_lower,
            original_upper,
            family: None,
        })
    }

    pub fn with_family(mut self, family: u8) -> Result<Self> {
        let min = family_min_dimension(family)?;
        if self.n() < min {
            return Err(Error::DimensionTooSmall {
                family,
                min,
                n: self.n(),
            });
        }
        self.family = Some(family);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n_c + self.n_z
    }

    pub fn base_name(&self) -> String {
        match self.base.fixed_dimension() {
            Some(_) => self.base.name().to_string(),
            None => format!("{}({})", self.base.name(), self.n()),
        }
    }

    pub fn name(&self) -> String {
        match self.family {
            None => self.base_name(),
            Some(f) => format!("{}/f{f}", self.base_name()),
        }
    }

    /// Parses `maxq`, `maxq(30)`, `sepquad`, or any of these with a `/fK`
    /// family suffix.
    pub fn parse(name: &str) -> Result<Self> {
        let unknown = || Error::UnknownProblem(name.to_string());
        let (base_part, family) = match name.split_once("/f") {
            Some((b, f)) => (b, Some(f.parse::<u8>().map_err(|_| unknown())?)),
            None => (name, None),
        };
        let (base_name, n) = match base_part.split_once('(') {
            Some((b, rest)) => {
                let n = rest
                    .strip_suffix(')')
                    .and_then(|d| d.parse::<usize>().ok())
                    .ok_or_else(unknown)?;
                (b, Some(n))
            }
            None => (base_part, None),
        };
        let base = BaseObjective::from_name(base_name).ok_or_else(unknown)?;
        let spec = Self::new(base, n.unwrap_or_else(|| base.default_dimension()))
            .map_err(|_| unknown())?;
        match family {
            Some(f) => spec.with_family(f),
            None => Ok(spec),
        }
    }

    /// `x̃` from the encoded mixed-integer point.
    pub fn decode(&self, x: &[f64]) -> Vec<f64> {
        let mut xt = x.to_vec();
        for i in self.n_c..self.n() {
            let (l, u) = (self.original_lower[i], self.original_upper[i]);
            xt[i] = l + x[i] * (u - l) / 100.0;
        }
        xt
    }

    pub fn num_constraints(&self) -> usize {
        self.family.map_or(0, |f| family_len(f, self.n()))
    }
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

fn family_min_dimension(family: u8) -> Result<usize> {
    match family {
        1 | 2 | 5 | 6 => Ok(3),
        3 | 4 => Ok(2),
        _ => Err(Error::UnknownProblem(format!("constraint family {family}"))),
    }
}

fn family_len(family: u8, n: usize) -> usize {
    match family {
        1 | 2 | 5 => n - 2,
        3 | 4 => n - 1,
        _ => 1,
    }
}

/// Constraint values `g(x̃)` of family `1..=6` (feasible iff `g <= 0`).
pub fn constraint_family(family: u8, x: &[f64]) -> Result<Vec<f64>> {
    let n = x.len();
    let min = family_min_dimension(family)?;
    if n < min {
        return Err(Error::DimensionTooSmall { family, min, n });
    }
    let triple =
        |k: usize, a: f64, c: f64| (3.0 - a * x[k + 1]) * x[k + 1] - x[k] - 2.0 * x[k + 2] + c;
    let pair = |k: usize| x[k] * x[k] + x[k + 1] * x[k + 1] + x[k] * x[k + 1];
    Ok(match family {
        1 => (0..n - 2).map(|k| triple(k, 2.0, 1.0)).collect(),
        2 => (0..n - 2).map(|k| triple(k, 2.0, 2.5)).collect(),
        3 => (0..n - 1)
            .map(|k| pair(k) - 2.0 * x[k] - 2.0 * x[k + 1] + 1.0)
            .collect(),
        4 => (0..n - 1).map(|k| pair(k) - 1.0).collect(),
        5 => (0..n - 2).map(|k| triple(k, 0.5, 1.0)).collect(),
        _ => vec![(0..n - 2).map(|k| triple(k, 0.5, 1.0)).sum()],
    })
}

/// Builds the encoded mixed-integer instance.
pub fn build_problem(spec: &ProblemSpec) -> Result<ProblemInstance> {
    let n = spec.n();
    let partition = VariablePartition::split(spec.n_c, spec.n_z)?;
    let mut lower = spec.original_lower[..spec.n_c].to_vec();
    let mut upper = spec.original_upper[..spec.n_c].to_vec();
    lower.extend(std::iter::repeat_n(0.0, spec.n_z));
    upper.extend(std::iter::repeat_n(100.0, spec.n_z));
    let bounds = Bounds::new(lower, upper, &partition)?;

    // (u - l)/2 on continuous variables, 50 on integer ones; the clamp only
    // matters for boxes where (u - l)/2 falls outside [l, u]
    let mut start: Vec<f64> = (0..n)
        .map(|i| {
            if i < spec.n_c {
                bounds.width(i) / 2.0
            } else {
                50.0
            }
        })
        .collect();
    bounds.project_in_place(&mut start);

    let m = spec.num_constraints();
    let owned = spec.clone();
    ProblemInstance::from_fn(spec.name(), partition, bounds, start, m, move |x| {
        let xt = owned.decode(x);
        let f = owned.base.evaluate(&xt);
        let g = match owned.family {
            Some(fam) => constraint_family(fam, &xt).expect("dimension checked at construction"),
            None => Vec::new(),
        };
        Response { f, g }
    })
}

/// Bases shipped with the crate, at the dimensions used for benchmarking.
pub fn shipped_bases() -> Vec<ProblemSpec> {
    use BaseObjective::*;
    [
        (Goffin, 50),
        (L1hilb, 20),
        (L1hilb, 30),
        (L1hilb, 40),
        (L1hilb, 50),
        (Maxl, 20),
        (Maxq, 20),
        (Maxq, 30),
        (Maxq, 40),
        (Maxq, 50),
        (Mxhilb, 50),
        (Sepquad, 4),
        (Diagvalley, 4),
    ]
    .into_iter()
    .map(|(b, n)| ProblemSpec::new(b, n).expect("shipped dimensions are valid"))
    .collect()
}

pub fn list_problems(suite: Suite) -> Vec<ProblemSpec> {
    let bases = shipped_bases();
    match suite {
        Suite::Bound => bases,
        Suite::Constrained => bases
            .into_iter()
            .flat_map(|b| (1..=6).filter_map(move |f| b.clone().with_family(f).ok()))
            .collect(),
    }
}
