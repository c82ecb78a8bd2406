//! Fuzzy measures over the three selection criteria and the discrete
//! Choquet integral used to rank candidate poses.
//!
//! Everything here is generic over [`Scalar`], so the same code runs on
//! `f64` in the engine and on exact rationals in tests.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::scalar::Scalar;

/// Tolerance on `x1 + x2 + x3 = 1` for custom weights.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// Pair bonus used when building a measure from singleton weights.
pub const DEFAULT_SYNERGY_BONUS: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CriterionId {
    InformationGain,
    TravelDistance,
    SensingTime,
}

impl CriterionId {
    pub const ALL: [CriterionId; 3] = [
        CriterionId::InformationGain,
        CriterionId::TravelDistance,
        CriterionId::SensingTime,
    ];

    /// 1-based position, matching the `x1, x2, x3` weight names.
    pub fn ordinal(self) -> usize {
        self.index() + 1
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Information gain is a benefit; distance and time are costs.
    pub fn is_benefit(self) -> bool {
        self == CriterionId::InformationGain
    }
}

/// A subset of the criteria, stored as a bitmask over [`CriterionId::index`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct CriterionSet(u8);

impl CriterionSet {
    pub const EMPTY: CriterionSet = CriterionSet(0);
    pub const FULL: CriterionSet = CriterionSet(0b111);

    pub fn from_bits(bits: u8) -> Self {
        CriterionSet(bits & 0b111)
    }

    pub fn of(criteria: &[CriterionId]) -> Self {
        CriterionSet(criteria.iter().fold(0, |acc, c| acc | 1 << c.index()))
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn contains(self, c: CriterionId) -> bool {
        self.0 >> c.index() & 1 == 1
    }

    pub fn without(self, c: CriterionId) -> Self {
        CriterionSet(self.0 & !(1 << c.index()))
    }

    pub fn is_subset_of(self, other: CriterionSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// All eight subsets, by bitmask.
    pub fn all() -> impl Iterator<Item = CriterionSet> {
        (0..8).map(CriterionSet)
    }
}

impl fmt::Display for CriterionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let members: Vec<String> = CriterionId::ALL
            .iter()
            .filter(|&&c| self.contains(c))
            .map(|c| c.ordinal().to_string())
            .collect();
        write!(f, "{{{}}}", members.join(","))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeasureViolation {
    /// `μ(∅) ≠ 0` or `μ(N) ≠ 1`.
    Boundary { set: CriterionSet, value: String },
    /// A weight outside `[0, 1]`.
    Range { set: CriterionSet, value: String },
    /// `A ⊂ B` but `μ(A) > μ(B)`.
    Monotonicity {
        subset: CriterionSet,
        superset: CriterionSet,
    },
}

impl fmt::Display for MeasureViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureViolation::Boundary { set, value } => {
                write!(f, "boundary: weight of {set} is {value}")
            }
            MeasureViolation::Range { set, value } => {
                write!(f, "range: weight of {set} is {value}, outside [0, 1]")
            }
            MeasureViolation::Monotonicity { subset, superset } => {
                write!(f, "monotonicity: weight of {subset} exceeds weight of {superset}")
            }
        }
    }
}

impl MeasureViolation {
    pub fn kind(&self) -> &'static str {
        match self {
            MeasureViolation::Boundary { .. } => "boundary",
            MeasureViolation::Range { .. } => "range",
            MeasureViolation::Monotonicity { .. } => "monotonicity",
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum McdmError {
    #[error("weights must satisfy x1 + x2 + x3 = 1, got sum {sum}")]
    Simplex { sum: f64 },
    #[error("weight {name} = {value} is outside [0, 1]")]
    WeightRange { name: &'static str, value: f64 },
    #[error("synergy bonus must be >= 0, got {0}")]
    NegativeBonus(f64),
    #[error("invalid fuzzy measure: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidMeasure(Vec<MeasureViolation>),
    #[error("unknown configuration {0:?}, expected A-M or custom")]
    UnknownConfig(String),
}

/// Weights for every subset of the criteria.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuzzyMeasure<T> {
    weights: [T; 8],
}

impl<T: Scalar> FuzzyMeasure<T> {
    /// Validated construction from weights indexed by [`CriterionSet::bits`].
    pub fn new(weights: [T; 8]) -> Result<Self, McdmError> {
        let measure = Self { weights };
        validate_measure(&measure).map_err(McdmError::InvalidMeasure)?;
        Ok(measure)
    }

    /// No validation; for diagnostics.
    pub fn new_unchecked(weights: [T; 8]) -> Self {
        Self { weights }
    }

    #[inline]
    pub fn weight(&self, set: CriterionSet) -> T {
        self.weights[set.bits() as usize]
    }

    pub fn weights(&self) -> &[T; 8] {
        &self.weights
    }

    pub fn map<U>(&self, f: impl Fn(T) -> U) -> FuzzyMeasure<U> {
        FuzzyMeasure {
            weights: self.weights.map(f),
        }
    }
}

/// Checks `μ(∅) = 0`, `μ(N) = 1`, range and monotonicity over every pair of
/// nested subsets.
pub fn validate_measure<T: Scalar>(measure: &FuzzyMeasure<T>) -> Result<(), Vec<MeasureViolation>> {
    let show = |set| format!("{:?}", measure.weight(set));
    let mut violations = Vec::new();
    if measure.weight(CriterionSet::EMPTY) != T::zero() {
        violations.push(MeasureViolation::Boundary {
            set: CriterionSet::EMPTY,
            value: show(CriterionSet::EMPTY),
        });
    }
    if measure.weight(CriterionSet::FULL) != T::one() {
        violations.push(MeasureViolation::Boundary {
            set: CriterionSet::FULL,
            value: show(CriterionSet::FULL),
        });
    }
    for set in CriterionSet::all() {
        let w = measure.weight(set);
        if !(w >= T::zero() && w <= T::one()) {
            violations.push(MeasureViolation::Range {
                set,
                value: show(set),
            });
        }
    }
    for a in CriterionSet::all() {
        for b in CriterionSet::all() {
            // negated so that NaN weights are reported too
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if a != b && a.is_subset_of(b) && !(measure.weight(a) <= measure.weight(b)) {
                violations.push(MeasureViolation::Monotonicity {
                    subset: a,
                    superset: b,
                });
            }
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// The thirteen named weight configurations, sampled on the simplex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NamedConfig {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H,
    I,
    J,
    K,
    L,
    M,
}

// Thousandths: x1, x2, x3, {1,2}, {1,3}, {2,3}, {1,2,3}.
const TABLE: [[u16; 7]; 13] = [
    [1000, 0, 0, 1000, 1000, 0, 1000],
    [0, 1000, 0, 1000, 0, 1000, 1000],
    [0, 0, 1000, 0, 1000, 1000, 1000],
    [333, 333, 333, 766, 766, 766, 1000],
    [600, 200, 200, 900, 900, 500, 1000],
    [428, 428, 144, 956, 672, 672, 1000],
    [200, 600, 200, 900, 500, 900, 1000],
    [144, 428, 428, 672, 672, 956, 1000],
    [200, 200, 600, 500, 900, 900, 1000],
    [428, 144, 428, 672, 956, 672, 1000],
    [500, 500, 0, 1000, 600, 600, 1000],
    [0, 500, 500, 600, 600, 1000, 1000],
    [500, 0, 500, 600, 1000, 600, 1000],
];

fn thousandths<T: Scalar>(v: u16) -> T {
    T::from_u16(v).unwrap() / T::from_u16(1000).unwrap()
}

impl NamedConfig {
    pub const ALL: [NamedConfig; 13] = [
        NamedConfig::A,
        NamedConfig::B,
        NamedConfig::C,
        NamedConfig::D,
        NamedConfig::E,
        NamedConfig::F,
        NamedConfig::G,
        NamedConfig::H,
        NamedConfig::I,
        NamedConfig::J,
        NamedConfig::K,
        NamedConfig::L,
        NamedConfig::M,
    ];

    pub fn letter(self) -> char {
        (b'A' + self as u8) as char
    }

    /// Row of the weight table: singletons, pairs `{1,2} {1,3} {2,3}`, full set.
    pub fn table_row<T: Scalar>(self) -> [T; 7] {
        TABLE[self as usize].map(thousandths)
    }

    pub fn singletons<T: Scalar>(self) -> [T; 3] {
        let row = self.table_row::<T>();
        [row[0], row[1], row[2]]
    }

    /// The measure of this row, copied verbatim from the table.
    pub fn measure<T: Scalar>(self) -> FuzzyMeasure<T> {
        let [x1, x2, x3, x12, x13, x23, x123] = self.table_row::<T>();
        // index = bitmask over (gain, distance, time)
        FuzzyMeasure::new_unchecked([T::zero(), x1, x2, x12, x3, x13, x23, x123])
    }
}

impl fmt::Display for NamedConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for NamedConfig {
    type Err = McdmError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.trim().chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) if c.is_ascii_alphabetic() => {
                let i = (c.to_ascii_uppercase() as u8).wrapping_sub(b'A') as usize;
                NamedConfig::ALL
                    .get(i)
                    .copied()
                    .ok_or_else(|| McdmError::UnknownConfig(s.to_string()))
            }
            _ => Err(McdmError::UnknownConfig(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConfigLabel {
    Named(NamedConfig),
    Custom,
}

impl fmt::Display for ConfigLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigLabel::Named(n) => write!(f, "{n}"),
            ConfigLabel::Custom => write!(f, "custom"),
        }
    }
}

/// Singleton weights plus the pair synergy bonus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightConfig<T> {
    pub label: ConfigLabel,
    /// `x1, x2, x3` for information gain, travel distance and sensing time.
    pub x: [T; 3],
    pub synergy_bonus: T,
}

impl<T: Scalar> WeightConfig<T> {
    pub fn named(config: NamedConfig) -> Self {
        Self {
            label: ConfigLabel::Named(config),
            x: config.singletons(),
            synergy_bonus: T::from_f64(DEFAULT_SYNERGY_BONUS).unwrap(),
        }
    }

    /// Custom weights, which must lie on the simplex.
    pub fn custom(x: [T; 3], synergy_bonus: T) -> Result<Self, McdmError> {
        let to_f64 = |v: T| v.to_f64();
        for (name, &v) in ["x1", "x2", "x3"].into_iter().zip(&x) {
            if !(v >= T::zero() && v <= T::one()) {
                return Err(McdmError::WeightRange {
                    name,
                    value: to_f64(v).unwrap_or(f64::NAN),
                });
            }
        }
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(synergy_bonus >= T::zero()) {
            return Err(McdmError::NegativeBonus(to_f64(synergy_bonus).unwrap_or(f64::NAN)));
        }
        let sum = x[0] + x[1] + x[2];
        let tol = T::from_f64(SIMPLEX_TOLERANCE).unwrap();
        let off = if sum > T::one() { sum - T::one() } else { T::one() - sum };
        if off > tol {
            let approx: f64 = x
                .iter()
                .map(|&v| to_f64(v).unwrap_or(f64::NAN))
                .sum();
            return Err(McdmError::Simplex { sum: approx });
        }
        Ok(Self {
            label: ConfigLabel::Custom,
            x,
            synergy_bonus,
        })
    }
}

/// Measure with the given singletons, pairs `min(1, x_i + x_j + bonus)` and
/// the full set at 1.
pub fn synergic_measure<T: Scalar>(x: [T; 3], bonus: T) -> Result<FuzzyMeasure<T>, McdmError> {
    let pair = |a: T, b: T| {
        let v = a + b + bonus;
        if v > T::one() {
            T::one()
        } else {
            v
        }
    };
    let [x1, x2, x3] = x;
    FuzzyMeasure::new([
        T::zero(),
        x1,
        x2,
        pair(x1, x2),
        x3,
        pair(x1, x3),
        pair(x2, x3),
        T::one(),
    ])
}

/// Named configurations use the weight table verbatim; custom weights go
/// through [`synergic_measure`].
pub fn build_measure<T: Scalar>(config: &WeightConfig<T>) -> Result<FuzzyMeasure<T>, McdmError> {
    match config.label {
        ConfigLabel::Named(n) => {
            let m = n.measure();
            validate_measure(&m).map_err(McdmError::InvalidMeasure)?;
            Ok(m)
        }
        ConfigLabel::Custom => synergic_measure(config.x, config.synergy_bonus),
    }
}

/// Per-criterion utilities in `[0, 1]`, higher is better.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilityVector<T>(pub [T; 3]);

impl<T: Scalar> UtilityVector<T> {
    pub fn get(&self, c: CriterionId) -> T {
        self.0[c.index()]
    }
}

/// Discrete Choquet integral of `u` with respect to `measure`.
pub fn choquet<T: Scalar>(u: &UtilityVector<T>, measure: &FuzzyMeasure<T>) -> T {
    let mut order = CriterionId::ALL;
    order.sort_by(|a, b| u.get(*a).partial_cmp(&u.get(*b)).expect("utilities are comparable"));
    let mut remaining = CriterionSet::FULL;
    let mut previous = T::zero();
    let mut total = T::zero();
    for c in order {
        let value = u.get(c);
        total = total + (value - previous) * measure.weight(remaining);
        previous = value;
        remaining = remaining.without(c);
    }
    total
}

/// Raw criterion values of one candidate, indexed by [`CriterionId`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawCriteria<T>(pub [T; 3]);

/// Min-max normalization over the candidate set. Information gain maps its
/// minimum to 0; the cost criteria map their minimum to 1. A criterion with
/// no spread gives every candidate utility 1.
pub fn normalize_utilities<T: Scalar>(candidates: &[RawCriteria<T>]) -> Vec<UtilityVector<T>> {
    let Some(first) = candidates.first() else {
        return Vec::new();
    };
    let mut lo = first.0;
    let mut hi = first.0;
    for c in candidates {
        for k in 0..3 {
            if c.0[k] < lo[k] {
                lo[k] = c.0[k];
            }
            if c.0[k] > hi[k] {
                hi[k] = c.0[k];
            }
        }
    }
    candidates
        .iter()
        .map(|c| {
            let mut u = [T::one(); 3];
            for criterion in CriterionId::ALL {
                let k = criterion.index();
                if hi[k] > lo[k] {
                    let span = hi[k] - lo[k];
                    u[k] = if criterion.is_benefit() {
                        (c.0[k] - lo[k]) / span
                    } else {
                        (hi[k] - c.0[k]) / span
                    };
                }
            }
            UtilityVector(u)
        })
        .collect()
}
