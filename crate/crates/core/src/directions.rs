//! Search directions: a dense sequence of unit directions on the continuous
//! variables, and a growing set of feasible primitive directions on the
//! integer variables.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::model::{Bounds, VariablePartition};

/// Unit vector supported on the continuous variables.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousDirection(Vec<f64>);

impl ContinuousDirection {
    /// Normalizes `values` after checking that it vanishes on `I^z`.
    pub fn new(mut values: Vec<f64>, partition: &VariablePartition) -> Result<Self> {
        if values.len() != partition.n() || partition.integer().iter().any(|&i| values[i] != 0.0) {
            return Err(Error::Config(
                "continuous direction must have length n and vanish on integer variables".into(),
            ));
        }
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::ZeroVector);
        }
        values.iter_mut().for_each(|v| *v /= norm);
        Ok(Self(values))
    }

    /// `sign * e_i` in `R^n`.
    pub fn coordinate(n: usize, i: usize, sign: f64) -> Self {
        let mut v = vec![0.0; n];
        v[i] = sign.signum();
        Self(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|v| -v).collect())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Integer direction supported on `I^z` whose nonzero entries have gcd 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PrimitiveDirection(Vec<i64>);

impl PrimitiveDirection {
    pub fn new(values: Vec<i64>, partition: &VariablePartition) -> Result<Self> {
        if values.len() != partition.n() || partition.continuous().iter().any(|&i| values[i] != 0) {
            return Err(Error::Config(
                "primitive direction must have length n and vanish on continuous variables".into(),
            ));
        }
        if !is_primitive(&values)? {
            return Err(Error::Config(format!("{values:?} is not primitive")));
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn gcd_of(v: &[i64]) -> u64 {
    v.iter().fold(0, |g, &c| gcd(g, c.unsigned_abs()))
}

/// True iff the gcd of the nonzero absolute components is 1.
pub fn is_primitive(v: &[i64]) -> Result<bool> {
    match gcd_of(v) {
        0 => Err(Error::ZeroVector),
        g => Ok(g == 1),
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const SOBOL_BLOCK: u64 = 1 << 16;
const SOBOL_DIMS: usize = 256;
const MAX_REDRAWS: usize = 1000;

/// Deterministic dense sequence of unit directions on `I^c`.
///
/// Point `k` of an Owen-scrambled Sobol sequence in `[0,1]^{|I^c|}` is mapped
/// to `[-1,1]^{|I^c|}` and normalized; near-zero draws are skipped. Beyond
/// 2^16 points, or 256 dimensions, the sequence continues with a reseeded
/// scramble.
#[derive(Debug, Clone)]
pub struct DenseSequence {
    n: usize,
    continuous: Vec<usize>,
    seed: u64,
    index: u64,
}

impl DenseSequence {
    pub fn new(partition: &VariablePartition, seed: u64) -> Result<Self> {
        if partition.continuous().is_empty() {
            return Err(Error::Config(
                "dense sequence needs at least one continuous variable".into(),
            ));
        }
        Ok(Self {
            n: partition.n(),
            continuous: partition.continuous().to_vec(),
            seed,
            index: 0,
        })
    }

    pub fn dimension(&self) -> usize {
        self.continuous.len()
    }

    pub fn generator_index(&self) -> u64 {
        self.index
    }

    fn coordinate(&self, index: u64, dim: usize) -> f64 {
        let block = index / SOBOL_BLOCK;
        let dim_block = (dim / SOBOL_DIMS) as u64;
        let seed = splitmix64(self.seed ^ splitmix64(block ^ (dim_block << 40))) as u32;
        let u = sobol_burley::sample(
            (index % SOBOL_BLOCK) as u32,
            (dim % SOBOL_DIMS) as u32,
            seed,
        );
        2.0 * f64::from(u) - 1.0
    }

    /// The raw draw at `index`, or `None` when its norm is below `1e-8`.
    pub fn direction_at(&self, index: u64) -> Option<ContinuousDirection> {
        let mut v = vec![0.0; self.n];
        for (d, &i) in self.continuous.iter().enumerate() {
            v[i] = self.coordinate(index, d);
        }
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm < 1e-8 {
            return None;
        }
        v.iter_mut().for_each(|c| *c /= norm);
        Some(ContinuousDirection(v))
    }

    pub fn next_direction(&mut self) -> Result<ContinuousDirection> {
        for _ in 0..MAX_REDRAWS {
            let k = self.index;
            self.index += 1;
            if let Some(d) = self.direction_at(k) {
                return Ok(d);
            }
        }
        Err(Error::DegenerateSequence(MAX_REDRAWS))
    }
}

/// Upper bound on candidates inspected by a single expansion call.
const SCAN_CAP: u128 = 4_000_000;

/// Walks the feasible displacement boxes
/// `B_s = Π_j [max(-s, lo_j), min(s, hi_j)]`, `s = 1, 2, …, W`, visiting each
/// box in a seeded Weyl-sequence permutation of its lexicographic order and
/// yielding the vectors of infinity norm exactly `s`.
#[derive(Debug, Clone)]
struct ShellCursor {
    lo: Vec<i64>,
    hi: Vec<i64>,
    max_shell: u64,
    seed: u64,
    shell: u64,
    pos: u64,
    size: Option<u64>,
    mult: u64,
    offset: u64,
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

impl ShellCursor {
    /// `lo_j <= 0 <= hi_j` are the admissible integer displacements of
    /// coordinate `j`.
    fn new(lo: Vec<i64>, hi: Vec<i64>, seed: u64) -> Self {
        let max_shell = lo
            .iter()
            .zip(&hi)
            .map(|(&l, &h)| l.unsigned_abs().max(h.unsigned_abs()))
            .max()
            .unwrap_or(0);
        let mut c = Self {
            lo,
            hi,
            max_shell,
            seed,
            shell: 1,
            pos: 0,
            size: None,
            mult: 1,
            offset: 0,
        };
        c.enter_shell(1);
        c
    }

    fn range(&self, j: usize, shell: u64) -> (i64, i64) {
        let s = shell as i64;
        (self.lo[j].max(-s), self.hi[j].min(s))
    }

    fn box_size(&self, shell: u64) -> Option<u64> {
        (0..self.lo.len()).try_fold(1u64, |acc, j| {
            let (a, b) = self.range(j, shell);
            acc.checked_mul((b - a + 1) as u64)
        })
    }

    fn enter_shell(&mut self, shell: u64) {
        self.shell = shell;
        self.pos = 0;
        self.size = self.box_size(shell);
        if let Some(size) = self.size {
            let mut a = ((size as f64 * GOLDEN).round() as u64).clamp(1, size.max(2) - 1);
            while gcd(a, size) != 1 {
                a += 1;
            }
            self.mult = a;
            self.offset = splitmix64(self.seed ^ shell.wrapping_mul(0x2545_f491_4f6c_dd1d)) % size;
        }
    }

    /// Number of positions in one full cycle, `None` if not representable.
    fn cycle_length(&self) -> Option<u128> {
        (1..=self.max_shell).try_fold(0u128, |acc, s| Some(acc + u128::from(self.box_size(s)?)))
    }

    /// Next box vector together with its shell, wrapping after the last shell.
    fn next(&mut self) -> Result<(Vec<i64>, u64)> {
        let size = self.size.ok_or(Error::EnumerationLimit)?;
        let mut rest = ((u128::from(self.mult) * u128::from(self.pos) + u128::from(self.offset))
            % u128::from(size)) as u64;
        let m = self.lo.len();
        let mut v = vec![0i64; m];
        // lexicographic order has the first component most significant
        for j in (0..m).rev() {
            let (a, b) = self.range(j, self.shell);
            let radix = (b - a + 1) as u64;
            v[j] = a + (rest % radix) as i64;
            rest /= radix;
        }
        let shell = self.shell;
        self.pos += 1;
        if self.pos == size {
            let next = if self.shell >= self.max_shell {
                1
            } else {
                self.shell + 1
            };
            self.enter_shell(next);
        }
        Ok((v, shell))
    }
}

/// The ordered set `D_k` of primitive discrete directions with their
/// tentative integer stepsizes.
#[derive(Debug, Clone)]
pub struct DirectionSet {
    n: usize,
    integer: Vec<usize>,
    directions: Vec<PrimitiveDirection>,
    steps: Vec<u64>,
    members: HashSet<Vec<i64>>,
    seed: u64,
    /// Enumeration state for the integer point it was built at.
    cursor: Option<(Vec<i64>, ShellCursor)>,
    complete_at: Option<Vec<i64>>,
}

fn feasible_at(x: &[f64], integer: &[usize], dz: &[i64], bounds: &Bounds) -> bool {
    integer.iter().zip(dz).all(|(&i, &c)| {
        let v = x[i] + c as f64;
        bounds.lower()[i] <= v && v <= bounds.upper()[i]
    })
}

impl DirectionSet {
    /// `D_0`: the feasible coordinate directions `±e_i`, `i ∈ I^z`, at `x0`,
    /// all with tentative step 1.
    pub fn initial(
        x0: &[f64],
        partition: &VariablePartition,
        bounds: &Bounds,
        seed: u64,
    ) -> Result<Self> {
        let integer = partition.integer().to_vec();
        let m = integer.len();
        let mut set = Self {
            n: partition.n(),
            directions: Vec::new(),
            steps: Vec::new(),
            members: HashSet::new(),
            seed,
            cursor: None,
            complete_at: None,
            integer,
        };
        for k in 0..m {
            for sign in [1, -1] {
                let mut dz = vec![0i64; m];
                dz[k] = sign;
                if feasible_at(x0, &set.integer, &dz, bounds) {
                    set.push(dz);
                }
            }
        }
        if m > 0 && set.directions.is_empty() {
            return Err(Error::EmptyDirectionSet);
        }
        Ok(set)
    }

    fn push(&mut self, dz: Vec<i64>) {
        let mut full = vec![0i64; self.n];
        for (&i, &c) in self.integer.iter().zip(&dz) {
            full[i] = c;
        }
        self.directions.push(PrimitiveDirection(full));
        self.steps.push(1);
        self.members.insert(dz);
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn direction(&self, k: usize) -> &PrimitiveDirection {
        &self.directions[k]
    }

    pub fn directions(&self) -> &[PrimitiveDirection] {
        &self.directions
    }

    pub fn step(&self, k: usize) -> u64 {
        self.steps[k]
    }

    pub fn steps(&self) -> &[u64] {
        &self.steps
    }

    pub fn set_step(&mut self, k: usize, step: u64) {
        assert!(step >= 1, "tentative discrete steps are at least 1");
        self.steps[k] = step;
    }

    pub fn contains(&self, d: &[i64]) -> bool {
        let dz: Vec<i64> = self.integer.iter().map(|&i| d[i]).collect();
        self.members.contains(&dz)
    }

    /// Appends up to `batch` new primitive directions feasible at `x`, each
    /// with tentative step 1, and returns how many were added.
    ///
    /// Candidates are integer displacements that keep `x_z` inside the box,
    /// taken from increasing infinity-norm shells and divided by their gcd
    /// before the membership test. The enumeration restarts whenever `x_z`
    /// changes. Returns [`Error::SetComplete`] when a full pass over every
    /// shell finds nothing new at this `x_z`.
    pub fn expand(&mut self, x: &[f64], bounds: &Bounds, batch: usize) -> Result<usize> {
        if self.integer.is_empty() {
            return Err(Error::SetComplete);
        }
        let xz: Vec<i64> = self.integer.iter().map(|&i| x[i] as i64).collect();
        if self.complete_at.as_ref() == Some(&xz) {
            return Err(Error::SetComplete);
        }
        if self.cursor.as_ref().is_none_or(|(at, _)| *at != xz) {
            let lo = self
                .integer
                .iter()
                .map(|&i| (bounds.lower()[i] - x[i]) as i64)
                .collect();
            let hi = self
                .integer
                .iter()
                .map(|&i| (bounds.upper()[i] - x[i]) as i64)
                .collect();
            self.cursor = Some((xz.clone(), ShellCursor::new(lo, hi, self.seed)));
        }
        let cursor = &mut self.cursor.as_mut().expect("cursor was just built").1;
        let cycle = cursor.cycle_length();
        let mut scanned: u128 = 0;
        let mut found = Vec::new();
        while found.len() < batch {
            if cycle.is_some_and(|c| scanned >= c) || scanned >= SCAN_CAP {
                break;
            }
            let (mut v, shell) = cursor.next()?;
            scanned += 1;
            if v.iter().all(|c| c.unsigned_abs() < shell) {
                continue;
            }
            let g = gcd_of(&v) as i64;
            if g > 1 {
                v.iter_mut().for_each(|c| *c /= g);
            }
            if self.members.contains(&v) || found.contains(&v) {
                continue;
            }
            if feasible_at(x, &self.integer, &v, bounds) {
                found.push(v);
            }
        }
        let full_cycle = cycle.is_some_and(|c| scanned >= c);
        let added = found.len();
        for v in found {
            self.push(v);
        }
        match added {
            0 if full_cycle => {
                self.complete_at = Some(xz);
                Err(Error::SetComplete)
            }
            0 => Err(Error::EnumerationLimit),
            _ => Ok(added),
        }
    }
}
