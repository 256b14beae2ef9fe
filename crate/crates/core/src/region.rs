//! Axis-aligned regions: closed intervals, category sets, and their Cartesian
//! products.

use std::fmt;

use fixedbitset::FixedBitSet;
use rand::Rng;

use crate::space::{Point, Value};

/// Interval with per-end openness. Tree splits `x <= t` produce `(.., t]` on
/// the left and `(t, ..)` on the right, so sibling leaves never share a point.
/// Empty when `lo > hi`, or `lo == hi` with either end open.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl Interval {
    /// Closed interval `[lo, hi]`.
    pub const fn new(lo: f64, hi: f64) -> Self {
        Interval {
            lo,
            hi,
            lo_open: false,
            hi_open: false,
        }
    }

    pub const fn with_openness(lo: f64, hi: f64, lo_open: bool, hi_open: bool) -> Self {
        Interval {
            lo,
            hi,
            lo_open,
            hi_open,
        }
    }

    pub fn point(x: f64) -> Self {
        Interval::new(x, x)
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo < self.hi || (self.lo == self.hi && !self.lo_open && !self.hi_open))
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_open {
            self.lo < x
        } else {
            self.lo <= x
        };
        let below = if self.hi_open {
            x < self.hi
        } else {
            x <= self.hi
        };
        above && below
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        !self.intersect(other).is_empty()
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        let (lo, lo_open) = if self.lo > other.lo {
            (self.lo, self.lo_open)
        } else if other.lo > self.lo {
            (other.lo, other.lo_open)
        } else {
            (self.lo, self.lo_open || other.lo_open)
        };
        let (hi, hi_open) = if self.hi < other.hi {
            (self.hi, self.hi_open)
        } else if other.hi < self.hi {
            (other.hi, other.hi_open)
        } else {
            (self.hi, self.hi_open || other.hi_open)
        };
        Interval {
            lo,
            hi,
            lo_open,
            hi_open,
        }
    }

    /// The same bounds with both ends closed.
    pub fn closure(&self) -> Interval {
        Interval::new(self.lo, self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        if self.lo.is_finite() && self.hi.is_finite() {
            self.lo + 0.5 * (self.hi - self.lo)
        } else if self.lo.is_finite() {
            self.lo
        } else if self.hi.is_finite() {
            self.hi
        } else {
            0.0
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_open { '(' } else { '[' },
            self.lo,
            self.hi,
            if self.hi_open { ')' } else { ']' }
        )
    }
}

/// Subset of the categories of one categorical feature.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CategorySet(FixedBitSet);

impl CategorySet {
    pub fn empty(n: usize) -> Self {
        CategorySet(FixedBitSet::with_capacity(n))
    }

    pub fn full(n: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(n);
        bits.insert_range(..);
        CategorySet(bits)
    }

    pub fn singleton(n: usize, k: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(n);
        bits.insert(k);
        CategorySet(bits)
    }

    pub fn from_indices(n: usize, members: impl IntoIterator<Item = usize>) -> Self {
        let mut bits = FixedBitSet::with_capacity(n);
        for k in members {
            bits.insert(k);
        }
        CategorySet(bits)
    }

    /// Number of categories of the feature (not the number of members).
    pub fn universe(&self) -> usize {
        self.0.len()
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn contains(&self, k: usize) -> bool {
        self.0.contains(k)
    }

    pub fn insert(&mut self, k: usize) {
        self.0.insert(k)
    }

    pub fn intersects(&self, other: &CategorySet) -> bool {
        !self.0.is_disjoint(&other.0)
    }

    pub fn intersect(&self, other: &CategorySet) -> CategorySet {
        let mut bits = self.0.clone();
        bits.intersect_with(&other.0);
        CategorySet(bits)
    }

    pub fn difference(&self, other: &CategorySet) -> CategorySet {
        let mut bits = self.0.clone();
        bits.difference_with(&other.0);
        CategorySet(bits)
    }

    pub fn is_subset(&self, other: &CategorySet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.ones()
    }

    pub fn first(&self) -> Option<usize> {
        self.0.minimum()
    }

    /// Splits the members into a lower and an upper half.
    pub fn halves(&self) -> (CategorySet, CategorySet) {
        let members: Vec<usize> = self.iter().collect();
        let mid = members.len() / 2;
        let n = self.universe();
        (
            CategorySet::from_indices(n, members[..mid].iter().copied()),
            CategorySet::from_indices(n, members[mid..].iter().copied()),
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Component {
    Interval(Interval),
    Categories(CategorySet),
}

impl Component {
    pub fn is_empty(&self) -> bool {
        match self {
            Component::Interval(i) => i.is_empty(),
            Component::Categories(c) => c.is_empty(),
        }
    }

    pub fn intersects(&self, other: &Component) -> bool {
        match (self, other) {
            (Component::Interval(a), Component::Interval(b)) => a.intersects(b),
            (Component::Categories(a), Component::Categories(b)) => a.intersects(b),
            _ => false,
        }
    }

    pub fn intersect(&self, other: &Component) -> Option<Component> {
        match (self, other) {
            (Component::Interval(a), Component::Interval(b)) => {
                Some(Component::Interval(a.intersect(b)))
            }
            (Component::Categories(a), Component::Categories(b)) => {
                Some(Component::Categories(a.intersect(b)))
            }
            _ => None,
        }
    }

    pub fn contains(&self, v: Value) -> bool {
        match (self, v) {
            (Component::Interval(i), Value::Num(x)) => i.contains(x),
            (Component::Categories(c), Value::Cat(k)) => c.contains(k),
            _ => false,
        }
    }

    pub fn is_subset(&self, other: &Component) -> bool {
        match (self, other) {
            (Component::Interval(a), Component::Interval(b)) => {
                a.is_empty() || a.intersect(b) == *a
            }
            (Component::Categories(a), Component::Categories(b)) => a.is_subset(b),
            _ => false,
        }
    }

    /// Edge length under the one-hot l-infinity metric.
    pub fn extent(&self) -> f64 {
        match self {
            Component::Interval(i) => i.width().max(0.0),
            Component::Categories(c) => {
                if c.len() > 1 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Cartesian product of one component per feature.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureBox {
    comps: Vec<Component>,
}

impl FeatureBox {
    pub fn new(comps: Vec<Component>) -> Self {
        FeatureBox { comps }
    }

    /// Box over continuous features only.
    pub fn from_intervals(intervals: &[(f64, f64)]) -> Self {
        FeatureBox::new(
            intervals
                .iter()
                .map(|&(lo, hi)| Component::Interval(Interval::new(lo, hi)))
                .collect(),
        )
    }

    /// Degenerate box holding a single point.
    pub fn from_point(x: &Point, categories: impl Fn(usize) -> usize) -> Self {
        FeatureBox::new(
            x.values()
                .iter()
                .enumerate()
                .map(|(j, v)| match *v {
                    Value::Num(x) => Component::Interval(Interval::point(x)),
                    Value::Cat(k) => {
                        Component::Categories(CategorySet::singleton(categories(j), k))
                    }
                })
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn components(&self) -> &[Component] {
        &self.comps
    }

    pub fn component(&self, j: usize) -> &Component {
        &self.comps[j]
    }

    pub fn component_mut(&mut self, j: usize) -> &mut Component {
        &mut self.comps[j]
    }

    /// Panics if feature `j` is categorical.
    pub fn interval(&self, j: usize) -> Interval {
        match &self.comps[j] {
            Component::Interval(i) => *i,
            Component::Categories(_) => panic!("feature {j} is categorical"),
        }
    }

    /// Panics if feature `j` is continuous.
    pub fn categories(&self, j: usize) -> &CategorySet {
        match &self.comps[j] {
            Component::Categories(c) => c,
            Component::Interval(_) => panic!("feature {j} is continuous"),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.comps.iter().any(Component::is_empty)
    }

    /// Whether the two boxes share at least one point, without allocating.
    pub fn intersects(&self, other: &FeatureBox) -> bool {
        self.comps.len() == other.comps.len()
            && self
                .comps
                .iter()
                .zip(&other.comps)
                .all(|(a, b)| a.intersects(b))
    }

    /// Componentwise intersection, `None` when empty or of mismatched shape.
    pub fn intersect(&self, other: &FeatureBox) -> Option<FeatureBox> {
        if self.comps.len() != other.comps.len() {
            return None;
        }
        let mut comps = Vec::with_capacity(self.comps.len());
        for (a, b) in self.comps.iter().zip(&other.comps) {
            let c = a.intersect(b)?;
            if c.is_empty() {
                return None;
            }
            comps.push(c);
        }
        Some(FeatureBox { comps })
    }

    pub fn contains(&self, x: &Point) -> bool {
        x.len() == self.dim()
            && self
                .comps
                .iter()
                .zip(x.values())
                .all(|(c, v)| c.contains(*v))
    }

    pub fn is_subset(&self, other: &FeatureBox) -> bool {
        self.dim() == other.dim()
            && self
                .comps
                .iter()
                .zip(&other.comps)
                .all(|(a, b)| a.is_subset(b))
    }

    /// The same box with every interval closed.
    pub fn closure(&self) -> FeatureBox {
        FeatureBox::new(
            self.comps
                .iter()
                .map(|c| match c {
                    Component::Interval(i) => Component::Interval(i.closure()),
                    other => other.clone(),
                })
                .collect(),
        )
    }

    /// Midpoint of every interval, lowest member of every category set.
    pub fn center(&self) -> Point {
        Point(
            self.comps
                .iter()
                .map(|c| match c {
                    Component::Interval(i) => Value::Num(i.midpoint()),
                    Component::Categories(s) => Value::Cat(s.first().unwrap_or(0)),
                })
                .collect(),
        )
    }

    /// Longest edge under the one-hot l-infinity metric.
    pub fn diameter(&self) -> f64 {
        self.comps.iter().map(Component::extent).fold(0.0, f64::max)
    }

    /// Product of interval widths and category counts; zero-width intervals
    /// contribute a factor of one so lower-dimensional boxes stay comparable.
    pub fn measure(&self) -> f64 {
        self.comps
            .iter()
            .map(|c| match c {
                Component::Interval(i) if i.width() > 0.0 => i.width(),
                Component::Interval(_) => 1.0,
                Component::Categories(s) => s.len() as f64,
            })
            .product()
    }

    /// Uniform sample from the box. Infinite bounds are not supported.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        Point(
            self.comps
                .iter()
                .map(|c| match c {
                    Component::Interval(i) => {
                        if i.width() > 0.0 {
                            Value::Num(rng.random_range(i.lo..=i.hi))
                        } else {
                            Value::Num(i.lo)
                        }
                    }
                    Component::Categories(s) => {
                        let members: Vec<usize> = s.iter().collect();
                        Value::Cat(members[rng.random_range(0..members.len())])
                    }
                })
                .collect(),
        )
    }

    /// Hashable identity of the box (bitwise on interval ends).
    pub fn key(&self) -> Vec<u64> {
        let mut key = Vec::with_capacity(2 * self.comps.len());
        for c in &self.comps {
            match c {
                Component::Interval(i) => {
                    key.push(i.lo.to_bits());
                    key.push(i.hi.to_bits());
                    key.push(u64::from(i.lo_open) | u64::from(i.hi_open) << 1);
                }
                Component::Categories(s) => {
                    key.push(u64::MAX);
                    key.extend(s.iter().map(|k| k as u64));
                }
            }
        }
        key
    }
}

impl fmt::Display for FeatureBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, c) in self.comps.iter().enumerate() {
            if j > 0 {
                write!(f, " x ")?;
            }
            match c {
                Component::Interval(i) => write!(f, "{i}")?,
                Component::Categories(s) => {
                    write!(f, "{{")?;
                    for (n, k) in s.iter().enumerate() {
                        if n > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{k}")?;
                    }
                    write!(f, "}}")?;
                }
            }
        }
        Ok(())
    }
}
