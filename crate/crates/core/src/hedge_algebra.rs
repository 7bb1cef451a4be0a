//! Linguistic terms over the generators `small`/`big` and the hedges
//! `less`, `possibly`, `more`, `very`.
//!
//! Every term owns a closed semantic interval inside `[0, 1]`. The two
//! generators split the unit interval by their fuzziness measure, and each
//! hedge `h` applied to a term `x` takes a sub-interval of `I(x)` of width
//! `mu(h) * |I(x)|`. The quantitative value `v(x)` sits at the point of
//! `I(x)` that separates the children moving `x` down from the children
//! moving it up, so with the sign rule
//!
//! ```text
//! sign(small) = -1, sign(big) = +1
//! sign(h x)   = dir(h) * sign(x),  dir(less) = dir(possibly) = -1, dir(more) = dir(very) = +1
//! ```
//!
//! a positive term lays out its children ascending as
//! `[less x | possibly x | v(x) | more x | very x]` and a negative one as the
//! mirror image.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Generator {
    Small,
    Big,
}

impl Generator {
    pub const ALL: [Generator; 2] = [Generator::Small, Generator::Big];

    fn sign(self) -> i8 {
        match self {
            Generator::Small => -1,
            Generator::Big => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Generator::Small => "small",
            Generator::Big => "big",
        }
    }
}

/// Declaration order doubles as the lexicographic order used for tie-breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hedge {
    Less,
    Possibly,
    More,
    Very,
}

impl Hedge {
    pub const ALL: [Hedge; 4] = [Hedge::Less, Hedge::Possibly, Hedge::More, Hedge::Very];

    fn direction(self) -> i8 {
        match self {
            Hedge::Less | Hedge::Possibly => -1,
            Hedge::More | Hedge::Very => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Hedge::Less => "less",
            Hedge::Possibly => "possibly",
            Hedge::More => "more",
            Hedge::Very => "very",
        }
    }
}

/// Fuzziness parameters of the algebra.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HedgeParams {
    pub fm_small: f64,
    pub fm_big: f64,
    pub mu_less: f64,
    pub mu_possibly: f64,
    pub mu_more: f64,
    pub mu_very: f64,
    /// Maximum number of hedges in a term.
    pub depth_bound: usize,
}

impl Default for HedgeParams {
    fn default() -> Self {
        HedgeParams {
            fm_small: 0.5,
            fm_big: 0.5,
            mu_less: 0.25,
            mu_possibly: 0.25,
            mu_more: 0.25,
            mu_very: 0.25,
            depth_bound: 3,
        }
    }
}

impl HedgeParams {
    pub fn fm(&self, generator: Generator) -> f64 {
        match generator {
            Generator::Small => self.fm_small,
            Generator::Big => self.fm_big,
        }
    }

    pub fn mu(&self, hedge: Hedge) -> f64 {
        match hedge {
            Hedge::Less => self.mu_less,
            Hedge::Possibly => self.mu_possibly,
            Hedge::More => self.mu_more,
            Hedge::Very => self.mu_very,
        }
    }

    fn fm_mut(&mut self, generator: Generator) -> &mut f64 {
        match generator {
            Generator::Small => &mut self.fm_small,
            Generator::Big => &mut self.fm_big,
        }
    }

    fn mu_mut(&mut self, hedge: Hedge) -> &mut f64 {
        match hedge {
            Hedge::Less => &mut self.mu_less,
            Hedge::Possibly => &mut self.mu_possibly,
            Hedge::More => &mut self.mu_more,
            Hedge::Very => &mut self.mu_very,
        }
    }

    /// Total weight of the hedges that move a term towards its negative side.
    pub fn alpha(&self) -> f64 {
        self.mu_less + self.mu_possibly
    }

    pub fn beta(&self) -> f64 {
        self.mu_more + self.mu_very
    }

    /// The six tunable parameters with their names, in reporting order.
    pub fn named(&self) -> [(&'static str, f64); 6] {
        [
            ("fm_small", self.fm_small),
            ("fm_big", self.fm_big),
            ("mu_less", self.mu_less),
            ("mu_possibly", self.mu_possibly),
            ("mu_more", self.mu_more),
            ("mu_very", self.mu_very),
        ]
    }

    fn values(&self) -> [f64; 6] {
        self.named().map(|(_, v)| v)
    }

    /// Checks the strict domain and both unit-sum constraints.
    pub fn validate(&self) -> Result<()> {
        if self.depth_bound == 0 {
            return Err(Error::Domain("depth bound must be at least 1".into()));
        }
        for (name, value) in self.named() {
            if !(value.is_finite() && value > 0.0 && value < 1.0) {
                return Err(Error::Domain(format!("{name} = {value} is not in (0, 1)")));
            }
        }
        let fm_sum = self.fm_small + self.fm_big;
        if (fm_sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::Domain(format!("fm_small + fm_big = {fm_sum}, expected 1")));
        }
        let mu_sum = self.alpha() + self.beta();
        if (mu_sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::Domain(format!("hedge measures sum to {mu_sum}, expected 1")));
        }
        Ok(())
    }

    /// Rescales the hedge measures and the generator measures to unit sums.
    pub fn normalized(&self) -> Result<HedgeParams> {
        for (name, value) in self.named() {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Domain(format!("{name} = {value} must be positive")));
            }
        }
        let fm_sum = self.fm_small + self.fm_big;
        let mu_sum = self.mu_less + self.mu_possibly + self.mu_more + self.mu_very;
        Ok(HedgeParams {
            fm_small: self.fm_small / fm_sum,
            fm_big: self.fm_big / fm_sum,
            mu_less: self.mu_less / mu_sum,
            mu_possibly: self.mu_possibly / mu_sum,
            mu_more: self.mu_more / mu_sum,
            mu_very: self.mu_very / mu_sum,
            depth_bound: self.depth_bound,
        })
    }

    /// Normalizes, then lifts any measure below `floor` up to it and
    /// renormalizes its group, so long runs of updates cannot round a
    /// measure down to zero.
    pub fn normalized_with_floor(&self, floor: f64) -> Result<HedgeParams> {
        let mut p = self.normalized()?;
        let lift = |vals: &mut [&mut f64]| {
            if vals.iter().any(|v| **v < floor) {
                for v in vals.iter_mut() {
                    **v = v.max(floor);
                }
                let total: f64 = vals.iter().map(|v| **v).sum();
                for v in vals.iter_mut() {
                    **v /= total;
                }
            }
        };
        lift(&mut [&mut p.fm_small, &mut p.fm_big]);
        lift(&mut [&mut p.mu_less, &mut p.mu_possibly, &mut p.mu_more, &mut p.mu_very]);
        Ok(p)
    }

    /// Adds `e` to the measure of every hedge in `term` (once per occurrence)
    /// and to the measure of its generator. The result is not normalized.
    pub fn with_error_update(&self, term: &LinguisticTerm, e: f64) -> Result<HedgeParams> {
        if !(e.is_finite() && e >= 0.0) {
            return Err(Error::Domain(format!("mapping error {e} must be non-negative")));
        }
        self.check_depth(term)?;
        let mut next = *self;
        for &hedge in &term.hedges {
            *next.mu_mut(hedge) += e;
        }
        *next.fm_mut(term.generator) += e;
        Ok(next)
    }

    /// Adds an accumulated [`ParamDelta`] to these parameters.
    pub fn with_delta(&self, delta: &ParamDelta) -> HedgeParams {
        let mut next = *self;
        for (slot, d) in next.slots_mut().into_iter().zip(delta.0) {
            *slot += d;
        }
        next
    }

    fn slots_mut(&mut self) -> [&mut f64; 6] {
        [
            &mut self.fm_small,
            &mut self.fm_big,
            &mut self.mu_less,
            &mut self.mu_possibly,
            &mut self.mu_more,
            &mut self.mu_very,
        ]
    }

    fn check_depth(&self, term: &LinguisticTerm) -> Result<()> {
        if term.depth() > self.depth_bound {
            return Err(Error::Domain(format!(
                "term '{term}' has {} hedges, bound is {}",
                term.depth(),
                self.depth_bound
            )));
        }
        Ok(())
    }

    /// Largest absolute difference between any pair of corresponding parameters.
    pub fn max_abs_diff(&self, other: &HedgeParams) -> f64 {
        self.values()
            .iter()
            .zip(other.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Accumulator for the per-parameter increments of several error updates.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ParamDelta([f64; 6]);

impl ParamDelta {
    pub fn add(&mut self, term: &LinguisticTerm, e: f64) {
        let gen_slot = match term.generator {
            Generator::Small => 0,
            Generator::Big => 1,
        };
        self.0[gen_slot] += e;
        for &hedge in &term.hedges {
            self.0[2 + hedge as usize] += e;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&d| d == 0.0)
    }
}

/// A generator modified by hedges. `hedges[0]` is the outermost word, so
/// "very very more big" is `[Very, Very, More]` over `Big`, and `More` is
/// applied to `Big` first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LinguisticTerm {
    pub generator: Generator,
    pub hedges: Vec<Hedge>,
}

impl LinguisticTerm {
    pub fn new(generator: Generator, hedges: Vec<Hedge>) -> Self {
        LinguisticTerm { generator, hedges }
    }

    pub fn bare(generator: Generator) -> Self {
        LinguisticTerm::new(generator, Vec::new())
    }

    pub fn depth(&self) -> usize {
        self.hedges.len()
    }

    pub fn sign(&self) -> i8 {
        self.hedges
            .iter()
            .fold(self.generator.sign(), |s, h| s * h.direction())
    }

    /// Returns `hedge self`.
    pub fn modified(&self, hedge: Hedge) -> LinguisticTerm {
        let mut hedges = Vec::with_capacity(self.hedges.len() + 1);
        hedges.push(hedge);
        hedges.extend_from_slice(&self.hedges);
        LinguisticTerm::new(self.generator, hedges)
    }
}

impl fmt::Display for LinguisticTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for hedge in &self.hedges {
            write!(f, "{} ", hedge.name())?;
        }
        f.write_str(self.generator.name())
    }
}

impl FromStr for LinguisticTerm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let words: Vec<&str> = s.split_whitespace().collect();
        let (last, rest) = words
            .split_last()
            .ok_or_else(|| Error::Domain("empty linguistic term".into()))?;
        let generator = match *last {
            "small" => Generator::Small,
            "big" => Generator::Big,
            other => return Err(Error::Domain(format!("unknown generator '{other}'"))),
        };
        let hedges = rest
            .iter()
            .map(|w| match *w {
                "less" => Ok(Hedge::Less),
                "possibly" => Ok(Hedge::Possibly),
                "more" => Ok(Hedge::More),
                "very" => Ok(Hedge::Very),
                other => Err(Error::Domain(format!("unknown hedge '{other}'"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LinguisticTerm::new(generator, hedges))
    }
}

/// Ascending order of the two negative hedges inside a positive parent.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum NegativeBlockOrder {
    /// `less x < possibly x`
    #[default]
    LessFirst,
    PossiblyFirst,
}

impl NegativeBlockOrder {
    /// Children of a positive parent, ascending.
    fn ascending_positive(self) -> [Hedge; 4] {
        match self {
            NegativeBlockOrder::LessFirst => [Hedge::Less, Hedge::Possibly, Hedge::More, Hedge::Very],
            NegativeBlockOrder::PossiblyFirst => {
                [Hedge::Possibly, Hedge::Less, Hedge::More, Hedge::Very]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermSemantics {
    pub term: LinguisticTerm,
    pub lo: f64,
    pub hi: f64,
    pub v: f64,
    pub fm: f64,
}

impl TermSemantics {
    fn tie_break(&self, other: &TermSemantics) -> Ordering {
        self.term
            .depth()
            .cmp(&other.term.depth())
            .then(self.v.total_cmp(&other.v))
            .then_with(|| self.term.hedges.cmp(&other.term.hedges))
            .then(self.term.generator.cmp(&other.term.generator))
    }
}

/// A hedge algebra with its term table built up to the depth bound.
#[derive(Debug, Clone)]
pub struct HedgeAlgebra {
    params: HedgeParams,
    order: NegativeBlockOrder,
    /// Sorted ascending by `v`.
    table: Vec<TermSemantics>,
}

impl HedgeAlgebra {
    pub fn new(params: HedgeParams) -> Result<Self> {
        HedgeAlgebra::with_order(params, NegativeBlockOrder::default())
    }

    pub fn with_order(params: HedgeParams, order: NegativeBlockOrder) -> Result<Self> {
        params.validate()?;
        let mut table = Vec::new();
        for generator in Generator::ALL {
            let (lo, hi) = match generator {
                Generator::Small => (0.0, params.fm_small),
                Generator::Big => (params.fm_small, 1.0),
            };
            build(&params, order, LinguisticTerm::bare(generator), lo, hi, &mut table);
        }
        table.sort_by(|a, b| a.v.total_cmp(&b.v).then_with(|| a.tie_break(b)));
        Ok(HedgeAlgebra { params, order, table })
    }

    pub fn params(&self) -> &HedgeParams {
        &self.params
    }

    pub fn order(&self) -> NegativeBlockOrder {
        self.order
    }

    /// All terms of depth `0..=L`, ascending by `v`.
    pub fn terms(&self) -> &[TermSemantics] {
        &self.table
    }

    pub fn quantify(&self, term: &LinguisticTerm) -> Result<f64> {
        Ok(self.semantics(term)?.2)
    }

    /// Interval and value of an arbitrary term, computed by walking from the
    /// generator outwards.
    pub fn semantics(&self, term: &LinguisticTerm) -> Result<(f64, f64, f64)> {
        self.params.check_depth(term)?;
        let p = &self.params;
        let (mut lo, mut hi) = match term.generator {
            Generator::Small => (0.0, p.fm_small),
            Generator::Big => (p.fm_small, 1.0),
        };
        let mut current = LinguisticTerm::bare(term.generator);
        for &hedge in term.hedges.iter().rev() {
            let (clo, chi) = child_interval(p, self.order, current.sign(), lo, hi, hedge);
            lo = clo;
            hi = chi;
            current = current.modified(hedge);
        }
        Ok((lo, hi, value_in(p, current.sign(), lo, hi)))
    }

    /// The enumerated term whose value is nearest to `q`.
    pub fn inverse_quantify(&self, q: f64) -> Result<&TermSemantics> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::Domain(format!("q = {q} is outside [0, 1]")));
        }
        let t = &self.table;
        // First index with v >= q; the nearest terms sit on either side of it.
        let split = t.partition_point(|s| s.v < q);
        let below = split.checked_sub(1).map(|i| q - t[i].v);
        let above = t.get(split).map(|s| s.v - q);
        let best = match (below, above) {
            (Some(b), Some(a)) => b.min(a),
            (Some(b), None) => b,
            (None, Some(a)) => a,
            (None, None) => unreachable!("term table is never empty"),
        };
        let lower = t[..split].iter().rev().take_while(|s| q - s.v <= best);
        let upper = t[split..].iter().take_while(|s| s.v - q <= best);
        let winner = lower
            .chain(upper)
            .filter(|s| (s.v - q).abs() == best)
            .min_by(|a, b| a.tie_break(b));
        Ok(winner.expect("nearest term exists"))
    }

    /// `|v(v^-1(q)) - q|`
    pub fn mapping_error(&self, q: f64) -> Result<f64> {
        Ok((self.inverse_quantify(q)?.v - q).abs())
    }

    /// Fuzziness measure of the term nearest to `q`.
    pub fn confidence(&self, q: f64) -> Result<f64> {
        Ok(self.inverse_quantify(q)?.fm)
    }
}

fn value_in(p: &HedgeParams, sign: i8, lo: f64, hi: f64) -> f64 {
    let width = hi - lo;
    if sign > 0 {
        lo + p.alpha() * width
    } else {
        lo + p.beta() * width
    }
}

fn child_interval(
    p: &HedgeParams,
    order: NegativeBlockOrder,
    parent_sign: i8,
    lo: f64,
    hi: f64,
    target: Hedge,
) -> (f64, f64) {
    let width = hi - lo;
    let mut layout = order.ascending_positive();
    if parent_sign < 0 {
        layout.reverse();
    }
    let mut cursor = lo;
    for (pos, hedge) in layout.iter().enumerate() {
        let next = if pos == layout.len() - 1 {
            hi
        } else {
            cursor + p.mu(*hedge) * width
        };
        if *hedge == target {
            return (cursor, next);
        }
        cursor = next;
    }
    unreachable!("every hedge appears in the layout")
}

fn build(
    p: &HedgeParams,
    order: NegativeBlockOrder,
    term: LinguisticTerm,
    lo: f64,
    hi: f64,
    out: &mut Vec<TermSemantics>,
) {
    let sign = term.sign();
    let fm = term
        .hedges
        .iter()
        .fold(p.fm(term.generator), |acc, h| acc * p.mu(*h));
    if term.depth() < p.depth_bound {
        for hedge in Hedge::ALL {
            let (clo, chi) = child_interval(p, order, sign, lo, hi, hedge);
            build(p, order, term.modified(hedge), clo, chi, out);
        }
    }
    out.push(TermSemantics {
        v: value_in(p, sign, lo, hi),
        term,
        lo,
        hi,
        fm,
    });
}

/// Every term of depth `0..=L` with its semantics, ascending by `v`.
pub fn enumerate_terms(params: &HedgeParams) -> Result<Vec<TermSemantics>> {
    Ok(HedgeAlgebra::new(*params)?.table)
}

pub fn quantify(term: &LinguisticTerm, params: &HedgeParams) -> Result<f64> {
    // Only the path from the generator matters; no table needed.
    params.validate()?;
    let algebra = HedgeAlgebra {
        params: *params,
        order: NegativeBlockOrder::default(),
        table: Vec::new(),
    };
    algebra.quantify(term)
}

/// `fm(generator) * prod(mu(h))`
pub fn fuzziness_measure(term: &LinguisticTerm, params: &HedgeParams) -> Result<f64> {
    params.check_depth(term)?;
    Ok(term
        .hedges
        .iter()
        .fold(params.fm(term.generator), |acc, h| acc * params.mu(*h)))
}

pub fn inverse_quantify(q: f64, params: &HedgeParams) -> Result<(LinguisticTerm, f64, f64)> {
    let algebra = HedgeAlgebra::new(*params)?;
    let s = algebra.inverse_quantify(q)?;
    Ok((s.term.clone(), s.v, s.fm))
}

pub fn mapping_error(q: f64, params: &HedgeParams) -> Result<f64> {
    HedgeAlgebra::new(*params)?.mapping_error(q)
}

pub fn confidence(q: f64, params: &HedgeParams) -> Result<f64> {
    HedgeAlgebra::new(*params)?.confidence(q)
}

pub fn apply_error_update(params: &HedgeParams, term: &LinguisticTerm, e: f64) -> Result<HedgeParams> {
    params.with_error_update(term, e)
}

pub fn normalize_params(params: &HedgeParams) -> Result<HedgeParams> {
    params.normalized()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use Hedge::*;

    fn term(s: &str) -> LinguisticTerm {
        s.parse().unwrap()
    }

    fn uniform() -> HedgeParams {
        HedgeParams::default()
    }

    #[test]
    fn table_size_matches_depth() {
        assert_eq!(enumerate_terms(&uniform()).unwrap().len(), 170);
        let shallow = HedgeParams { depth_bound: 1, ..uniform() };
        assert_eq!(enumerate_terms(&shallow).unwrap().len(), 10);
    }

    #[test]
    fn uniform_generator_values() {
        let p = uniform();
        assert_abs_diff_eq!(quantify(&term("small"), &p).unwrap(), 0.25);
        assert_abs_diff_eq!(quantify(&term("big"), &p).unwrap(), 0.75);
    }

    #[test]
    fn very_big_interval() {
        let algebra = HedgeAlgebra::new(uniform()).unwrap();
        let (lo, hi, v) = algebra.semantics(&term("very big")).unwrap();
        assert_abs_diff_eq!(lo, 0.875);
        assert_abs_diff_eq!(hi, 1.0);
        assert_abs_diff_eq!(v, 0.9375);
        assert_abs_diff_eq!(fuzziness_measure(&term("very big"), &uniform()).unwrap(), 0.125);
    }

    #[test]
    fn less_big_sits_below_big() {
        let v = quantify(&term("less big"), &uniform()).unwrap();
        assert_abs_diff_eq!(v, 0.5625);
    }

    #[test]
    fn small_value_tracks_beta_near_full_measure() {
        let eps = 1e-6;
        let p = HedgeParams {
            fm_small: 1.0 - eps,
            fm_big: eps,
            mu_less: 0.1,
            mu_possibly: 0.2,
            mu_more: 0.3,
            mu_very: 0.4,
            depth_bound: 3,
        };
        let v = quantify(&term("small"), &p).unwrap();
        assert_abs_diff_eq!(v, p.beta() * p.fm_small, epsilon = 1e-15);
    }

    #[test]
    fn fuzziness_products() {
        let p = uniform();
        assert_abs_diff_eq!(fuzziness_measure(&term("big"), &p).unwrap(), 0.5);
        assert_abs_diff_eq!(
            fuzziness_measure(&term("very very more big"), &p).unwrap(),
            0.0078125
        );
        let q = HedgeParams {
            fm_small: 0.6,
            fm_big: 0.4,
            mu_less: 0.4,
            mu_possibly: 0.2,
            mu_more: 0.2,
            mu_very: 0.2,
            depth_bound: 3,
        };
        assert_abs_diff_eq!(fuzziness_measure(&term("less small"), &q).unwrap(), 0.24, epsilon = 1e-15);
    }

    #[test]
    fn depth_beyond_bound_is_rejected() {
        let deep = term("very very very very big");
        assert!(matches!(quantify(&deep, &uniform()), Err(Error::Domain(_))));
        assert!(matches!(fuzziness_measure(&deep, &uniform()), Err(Error::Domain(_))));
    }

    #[test]
    fn inverse_of_exact_value_is_that_term() {
        let (t, v, fm) = inverse_quantify(0.75, &uniform()).unwrap();
        assert_eq!(t, term("big"));
        assert_eq!(v, 0.75);
        assert_eq!(fm, 0.5);
        assert_eq!(mapping_error(0.75, &uniform()).unwrap(), 0.0);
    }

    #[test]
    fn inverse_of_zero_is_lowest_depth_three_term() {
        let (t, v, fm) = inverse_quantify(0.0, &uniform()).unwrap();
        assert_eq!(t, term("very very very small"));
        assert_abs_diff_eq!(v, 0.0078125 * 0.5);
        assert_abs_diff_eq!(fm, 0.0078125);
        assert_abs_diff_eq!(confidence(0.0, &uniform()).unwrap(), 0.0078125);
    }

    #[test]
    fn midpoint_tie_resolves_deterministically() {
        // Under uniform params the table is symmetric about 0.5, so the two
        // nearest terms are mirror images at equal distance.
        let algebra = HedgeAlgebra::new(uniform()).unwrap();
        let nearest: Vec<&TermSemantics> = {
            let best = algebra
                .terms()
                .iter()
                .map(|s| (s.v - 0.5).abs())
                .fold(f64::INFINITY, f64::min);
            algebra
                .terms()
                .iter()
                .filter(|s| (s.v - 0.5).abs() == best)
                .collect()
        };
        assert_eq!(nearest.len(), 2);
        let chosen = algebra.inverse_quantify(0.5).unwrap();
        assert!(chosen.v < 0.5, "smaller v wins among equal-depth ties");
        assert_eq!(chosen.term.generator, Generator::Small);
        let gap = nearest[1].v - nearest[0].v;
        assert_abs_diff_eq!(algebra.mapping_error(0.5).unwrap(), gap / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn confidence_near_big_is_generator_measure() {
        assert_eq!(confidence(0.7501, &uniform()).unwrap(), 0.5);
    }

    #[test]
    fn out_of_range_q_is_rejected() {
        assert!(inverse_quantify(-0.01, &uniform()).is_err());
        assert!(mapping_error(1.5, &uniform()).is_err());
        assert!(confidence(f64::NAN, &uniform()).is_err());
    }

    #[test]
    fn error_update_matches_worked_example() {
        let p = uniform();
        let next = apply_error_update(&p, &term("very very more big"), 0.01).unwrap();
        assert_abs_diff_eq!(next.mu_very, p.mu_very + 0.02);
        assert_abs_diff_eq!(next.mu_more, p.mu_more + 0.01);
        assert_abs_diff_eq!(next.fm_big, p.fm_big + 0.01);
        assert_eq!(next.mu_less, p.mu_less);
        assert_eq!(next.mu_possibly, p.mu_possibly);
        assert_eq!(next.fm_small, p.fm_small);
    }

    #[test]
    fn error_update_edge_cases() {
        let p = uniform();
        assert_eq!(apply_error_update(&p, &term("very big"), 0.0).unwrap(), p);
        let next = apply_error_update(&p, &term("less small"), 0.05).unwrap();
        assert_abs_diff_eq!(next.mu_less, 0.30);
        assert_abs_diff_eq!(next.fm_small, 0.55);
        assert_eq!(next.fm_big, 0.5);
        assert_eq!(next.mu_very, 0.25);
        assert!(apply_error_update(&p, &term("big"), -0.1).is_err());
    }

    #[test]
    fn delta_accumulator_agrees_with_sequential_updates() {
        let p = uniform();
        let updates = [(term("very very more big"), 0.01), (term("less small"), 0.003)];
        let mut delta = ParamDelta::default();
        let mut seq = p;
        for (t, e) in &updates {
            delta.add(t, *e);
            seq = seq.with_error_update(t, *e).unwrap();
        }
        assert!(p.with_delta(&delta).max_abs_diff(&seq) < 1e-15);
    }

    #[test]
    fn normalization_examples() {
        let p = HedgeParams {
            mu_less: 0.5,
            mu_possibly: 0.1,
            mu_more: 0.2,
            mu_very: 0.3,
            fm_small: 0.56,
            fm_big: 0.46,
            depth_bound: 3,
        };
        let n = normalize_params(&p).unwrap();
        assert_abs_diff_eq!(n.mu_less, 0.5 / 1.1, epsilon = 1e-15);
        assert_abs_diff_eq!(n.mu_possibly, 0.1 / 1.1, epsilon = 1e-15);
        assert_abs_diff_eq!(n.mu_more, 0.2 / 1.1, epsilon = 1e-15);
        assert_abs_diff_eq!(n.mu_very, 0.3 / 1.1, epsilon = 1e-15);
        assert_abs_diff_eq!(n.fm_small, 0.56 / 1.02, epsilon = 1e-15);
        assert_abs_diff_eq!(n.fm_big, 0.46 / 1.02, epsilon = 1e-15);
        assert_eq!(normalize_params(&uniform()).unwrap(), uniform());
        let bad = HedgeParams { mu_more: 0.0, ..uniform() };
        assert!(normalize_params(&bad).is_err());
    }

    #[test]
    fn invalid_params_are_rejected() {
        let unbalanced = HedgeParams { fm_small: 0.6, ..uniform() };
        assert!(enumerate_terms(&unbalanced).is_err());
        let negative = HedgeParams { mu_less: -0.25, mu_very: 0.75, ..uniform() };
        assert!(enumerate_terms(&negative).is_err());
    }

    #[test]
    fn possibly_first_order_swaps_negative_block() {
        let algebra = HedgeAlgebra::with_order(
            HedgeParams { mu_less: 0.1, mu_possibly: 0.4, ..uniform() },
            NegativeBlockOrder::PossiblyFirst,
        )
        .unwrap();
        let less = algebra.quantify(&term("less big")).unwrap();
        let possibly = algebra.quantify(&term("possibly big")).unwrap();
        assert!(possibly < less);
        let default = HedgeAlgebra::new(HedgeParams { mu_less: 0.1, mu_possibly: 0.4, ..uniform() }).unwrap();
        assert!(default.quantify(&term("less big")).unwrap() < default.quantify(&term("possibly big")).unwrap());
    }

    #[test]
    fn term_text_round_trips() {
        let t = LinguisticTerm::new(Generator::Big, vec![Very, Very, More]);
        assert_eq!(t.to_string(), "very very more big");
        assert_eq!(term("very very more big"), t);
        assert_eq!(t.sign(), 1);
        assert_eq!(term("less big").sign(), -1);
        assert_eq!(term("less small").sign(), 1);
        assert!("huge".parse::<LinguisticTerm>().is_err());
    }
}
