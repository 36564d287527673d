//! Unions of closed rational intervals, the workhorse behind visit-time sets,
//! coverage measures and the phase-measure computation for randomized tours.

use num::Zero;

use crate::ratio::{rem_euclid, zero, Ratio};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Ratio,
    pub hi: Ratio,
}

impl Interval {
    pub fn new(lo: Ratio, hi: Ratio) -> Self {
        assert!(lo <= hi, "interval bounds out of order");
        Interval { lo, hi }
    }

    pub fn point(at: Ratio) -> Self {
        Interval {
            lo: at.clone(),
            hi: at,
        }
    }

    pub fn length(&self) -> Ratio {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Ratio) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.clone().max(other.lo.clone());
        let hi = self.hi.clone().min(other.hi.clone());
        if lo <= hi {
            Some(Interval::new(lo, hi))
        } else {
            None
        }
    }
}

/// Sorted union of disjoint closed intervals. Touching intervals are merged,
/// so the representation is canonical and measures never double-count
/// endpoints.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IntervalSet {
    ivs: Vec<Interval>,
}

impl IntervalSet {
    pub fn new() -> Self {
        IntervalSet::default()
    }

    pub fn from_intervals<I: IntoIterator<Item = Interval>>(it: I) -> Self {
        let mut s = IntervalSet::new();
        for iv in it {
            s.insert(iv);
        }
        s
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.ivs
    }

    pub fn is_empty(&self) -> bool {
        self.ivs.is_empty()
    }

    pub fn insert(&mut self, iv: Interval) {
        // Find the run of existing intervals overlapping or touching iv.
        let mut lo = iv.lo;
        let mut hi = iv.hi;
        let start = self.ivs.partition_point(|e| e.hi < lo);
        let mut end = start;
        while end < self.ivs.len() && self.ivs[end].lo <= hi {
            lo = lo.min(self.ivs[end].lo.clone());
            hi = hi.max(self.ivs[end].hi.clone());
            end += 1;
        }
        self.ivs.splice(start..end, [Interval::new(lo, hi)]);
    }

    pub fn insert_point(&mut self, at: Ratio) {
        self.insert(Interval::point(at));
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = self.clone();
        for iv in &other.ivs {
            out.insert(iv.clone());
        }
        out
    }

    pub fn measure(&self) -> Ratio {
        self.ivs.iter().fold(zero(), |acc, iv| acc + iv.length())
    }

    pub fn contains(&self, x: &Ratio) -> bool {
        let i = self.ivs.partition_point(|e| &e.hi < x);
        i < self.ivs.len() && self.ivs[i].contains(x)
    }

    pub fn intersect_interval(&self, window: &Interval) -> IntervalSet {
        IntervalSet {
            ivs: self
                .ivs
                .iter()
                .filter_map(|iv| iv.intersect(window))
                .collect(),
        }
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = IntervalSet::new();
        for w in &other.ivs {
            for iv in self.intersect_interval(w).ivs {
                out.insert(iv);
            }
        }
        out
    }

    /// Complement within [lo, hi], as closed intervals (boundary points shared
    /// with `self` carry zero measure, which is all callers rely on).
    pub fn complement_within(&self, lo: &Ratio, hi: &Ratio) -> IntervalSet {
        let mut out = IntervalSet::new();
        let mut cursor = lo.clone();
        for iv in &self.ivs {
            if &iv.lo > hi {
                break;
            }
            if iv.hi < cursor {
                continue;
            }
            if iv.lo > cursor {
                out.insert(Interval::new(cursor.clone(), iv.lo.clone().min(hi.clone())));
            }
            cursor = cursor.max(iv.hi.clone());
        }
        if &cursor < hi {
            out.insert(Interval::new(cursor, hi.clone()));
        }
        out
    }
}

/// Interval union on the circle [0, L). Intervals longer than the period
/// saturate to the full circle.
#[derive(Debug, Clone)]
pub struct CircularSet {
    period: Ratio,
    set: IntervalSet,
    full: bool,
}

impl CircularSet {
    pub fn new(period: Ratio) -> Self {
        assert!(period > zero());
        CircularSet {
            period,
            set: IntervalSet::new(),
            full: false,
        }
    }

    /// Inserts [lo, hi] reduced mod the period, splitting at the wrap point.
    pub fn insert(&mut self, lo: Ratio, hi: Ratio) {
        assert!(lo <= hi);
        if self.full {
            return;
        }
        if &hi - &lo >= self.period {
            self.full = true;
            self.set = IntervalSet::from_intervals([Interval::new(zero(), self.period.clone())]);
            return;
        }
        let start = rem_euclid(&lo, &self.period);
        let len = &hi - &lo;
        let end = &start + &len;
        if end <= self.period {
            self.set.insert(Interval::new(start, end));
        } else {
            self.set
                .insert(Interval::new(start, self.period.clone()));
            self.set.insert(Interval::new(zero(), end - &self.period));
        }
    }

    pub fn measure(&self) -> Ratio {
        // [0,L) and the closed interval [0,L] have the same measure; endpoint
        // overlap at the wrap point is already merged by IntervalSet.
        let m = self.set.measure();
        if m > self.period {
            self.period.clone()
        } else {
            m
        }
    }

    pub fn contains(&self, t: &Ratio) -> bool {
        let t = rem_euclid(t, &self.period);
        self.set.contains(&t) || (t.is_zero() && self.set.contains(&self.period))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::{frac, rat};

    #[test]
    fn merging_and_measure() {
        let mut s = IntervalSet::new();
        s.insert(Interval::new(rat(0), rat(1)));
        s.insert(Interval::new(rat(2), rat(3)));
        assert_eq!(s.measure(), rat(2));
        s.insert(Interval::new(rat(1), rat(2)));
        assert_eq!(s.intervals().len(), 1);
        assert_eq!(s.measure(), rat(3));
    }

    #[test]
    fn complement() {
        let s = IntervalSet::from_intervals([
            Interval::new(rat(1), rat(2)),
            Interval::new(rat(4), rat(5)),
        ]);
        let c = s.complement_within(&rat(0), &rat(6));
        assert_eq!(c.measure(), rat(4));
        assert!(c.contains(&rat(3)));
        assert!(!c.contains(&frac(3, 2)));
    }

    #[test]
    fn circular_wrap() {
        let mut c = CircularSet::new(rat(10));
        c.insert(rat(8), rat(12));
        assert_eq!(c.measure(), rat(4));
        assert!(c.contains(&rat(1)));
        assert!(c.contains(&rat(9)));
        assert!(!c.contains(&rat(5)));
        c.insert(rat(-3), rat(20));
        assert_eq!(c.measure(), rat(10));
    }

    #[test]
    fn intersection() {
        let a = IntervalSet::from_intervals([Interval::new(rat(0), rat(4))]);
        let b = IntervalSet::from_intervals([
            Interval::new(rat(1), rat(2)),
            Interval::new(rat(3), rat(6)),
        ]);
        assert_eq!(a.intersect(&b).measure(), rat(2));
    }
}
