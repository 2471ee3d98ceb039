//! Generated sequences of aligned box tilings of `Z` and `Z^2` and the
//! checks that make them usable as a primely congruent, exhausting
//! tiling sequence.
//!
//! Level `n` (1-based) has shape `prod_k [-a_{n,k}, b_{n,k}]` and centers
//! `prod_k q_{n,k} Z` with `q = a + b + 1`. Alignment means `q_n | q_{n+1}`
//! and `a_{n+1} ≡ a_n (mod q_n)`, which makes every level-`n+1` tile an
//! exact union of level-`n` tiles, translated identically each time.

use std::str::FromStr;

use num::{BigUint, Integer, One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::group::{is_invariant, FiniteSubset, GroupElement, GroupId};
use crate::tiling::{
    check_irreducibility_witness, congruence_report, verify_partition, verify_syndetic_centers,
    FiniteTiling, Verdict,
};
use crate::{Error, Int, Rational, Result};

/// Per-level multiplier of the period. The last entry repeats forever.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Growth {
    factors: Vec<Rational>,
}

impl Growth {
    pub fn constant(factor: impl Into<Rational>) -> Self {
        Growth {
            factors: vec![factor.into()],
        }
    }

    pub fn sequence(factors: Vec<Rational>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Argument("growth sequence is empty".into()));
        }
        Ok(Growth { factors })
    }

    /// Factor applied when going from level `n` to `n + 1`.
    pub fn factor(&self, n: usize) -> &Rational {
        &self.factors[(n - 1).min(self.factors.len() - 1)]
    }
}

impl FromStr for Growth {
    type Err = Error;

    /// `"3"`, `"5/2"`, or a comma list `"2,3,3"`.
    fn from_str(s: &str) -> Result<Self> {
        let factors = s
            .split(',')
            .map(|p| parse_rational(p.trim()))
            .collect::<Result<Vec<_>>>()?;
        Growth::sequence(factors)
    }
}

impl std::fmt::Display for Growth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|r| r.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"2.5"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("not a rational number: `{s}`"));
    if let Some((p, q)) = s.split_once('/') {
        let p: Int = p.trim().parse().map_err(|_| bad())?;
        let q: Int = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((w, frac)) = s.split_once('.') {
        let neg = w.trim_start().starts_with('-');
        let w: Int = if w.is_empty() || w == "-" {
            Int::zero()
        } else {
            w.parse().map_err(|_| bad())?
        };
        if frac.is_empty() || !frac.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let scale = num::pow::pow(Int::from(10), frac.len());
        let f = Rational::new(frac.parse::<Int>().map_err(|_| bad())?, scale);
        return Ok(if neg {
            Rational::from_integer(w) - f
        } else {
            Rational::from_integer(w) + f
        });
    }
    Ok(Rational::from_integer(s.parse().map_err(|_| bad())?))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxisLevel {
    pub a: Int,
    pub b: Int,
}

impl AxisLevel {
    pub fn period(&self) -> Int {
        &self.a + &self.b + Int::one()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TilingSchedule {
    group: GroupId,
    /// `levels[n - 1][axis]`.
    levels: Vec<Vec<AxisLevel>>,
    /// Level indices `l_n` picked by the construction, if recorded.
    nesting: Vec<usize>,
}

fn split_extra(extra: &Int, n: usize) -> (Int, Int) {
    let (half, odd) = extra.div_rem(&Int::from(2));
    let left = if !odd.is_zero() && n.is_multiple_of(2) {
        &half + Int::one()
    } else {
        half.clone()
    };
    let right = extra - &left;
    (left, right)
}

fn grow_axis(prev: &AxisLevel, factor: &Rational, n: usize) -> Result<AxisLevel> {
    let err = |reason: String| Error::Schedule {
        level: n + 1,
        reason,
    };
    let q = prev.period();
    let q_next = Rational::from_integer(q.clone()) * factor;
    if !q_next.is_integer() {
        return Err(err(format!("period {q} times {factor} is not an integer")));
    }
    if !factor.is_integer() || factor.to_integer() < Int::from(2) {
        return Err(err(format!(
            "growth factor {factor} must be an integer >= 2"
        )));
    }
    let extra = factor.to_integer() - Int::one();
    let (left, right) = split_extra(&extra, n);
    Ok(AxisLevel {
        a: &prev.a + left * &q,
        b: &prev.b + right * &q,
    })
}

/// A `Z` schedule: `S_1 = [-seed_a, seed_b]`, each period multiplied by the
/// growth factor, the new tiles split as evenly as possible between sides.
pub fn generate_interval_schedule(
    seed_a: u64,
    seed_b: u64,
    growth: &Growth,
    levels: usize,
) -> Result<TilingSchedule> {
    generate_schedule(GroupId::Z, &[(seed_a, seed_b)], growth, levels)
}

/// Axis-product schedule; one `(seed_a, seed_b)` per axis.
pub fn generate_schedule(
    group: GroupId,
    seeds: &[(u64, u64)],
    growth: &Growth,
    levels: usize,
) -> Result<TilingSchedule> {
    if seeds.len() != group.rank() {
        return Err(Error::Argument(format!(
            "{} needs {} seed pairs",
            group,
            group.rank()
        )));
    }
    if levels == 0 {
        return Err(Error::Argument(
            "a schedule needs at least one level".into(),
        ));
    }
    let first: Vec<AxisLevel> = seeds
        .iter()
        .map(|&(a, b)| {
            if a + b == 0 {
                Err(Error::Schedule {
                    level: 1,
                    reason: "seed_a + seed_b must be >= 1".into(),
                })
            } else {
                Ok(AxisLevel {
                    a: a.into(),
                    b: b.into(),
                })
            }
        })
        .collect::<Result<_>>()?;
    let mut all = vec![first];
    for n in 1..levels {
        let prev = &all[n - 1];
        let next = prev
            .iter()
            .map(|ax| grow_axis(ax, growth.factor(n), n))
            .collect::<Result<Vec<_>>>()?;
        all.push(next);
    }
    TilingSchedule::from_levels(group, all)
}

impl TilingSchedule {
    /// Validates nesting, divisibility and alignment.
    pub fn from_levels(group: GroupId, levels: Vec<Vec<AxisLevel>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Argument(
                "a schedule needs at least one level".into(),
            ));
        }
        for (i, lv) in levels.iter().enumerate() {
            let n = i + 1;
            if lv.len() != group.rank() {
                return Err(Error::Schedule {
                    level: n,
                    reason: "axis count does not match the group".into(),
                });
            }
            for ax in lv {
                if ax.a.is_negative() || ax.b.is_negative() {
                    return Err(Error::Schedule {
                        level: n,
                        reason: "shape must contain the identity".into(),
                    });
                }
            }
            if i == 0 {
                continue;
            }
            for (prev, cur) in levels[i - 1].iter().zip(lv) {
                let (qp, qc) = (prev.period(), cur.period());
                if !qc.is_multiple_of(&qp) {
                    return Err(Error::Schedule {
                        level: n,
                        reason: format!("period {qc} is not a multiple of {qp}"),
                    });
                }
                if cur.a < prev.a || cur.b < prev.b {
                    return Err(Error::Schedule {
                        level: n,
                        reason: "shape does not contain the previous shape".into(),
                    });
                }
                if !(&cur.a - &prev.a).is_multiple_of(&qp) {
                    return Err(Error::Schedule {
                        level: n,
                        reason: "left end is not aligned with the previous level".into(),
                    });
                }
            }
        }
        Ok(TilingSchedule {
            group,
            levels,
            nesting: Vec::new(),
        })
    }

    pub fn intervals(bounds: &[(i64, i64)]) -> Result<Self> {
        TilingSchedule::from_levels(
            GroupId::Z,
            bounds
                .iter()
                .map(|&(a, b)| {
                    vec![AxisLevel {
                        a: a.into(),
                        b: b.into(),
                    }]
                })
                .collect(),
        )
    }

    pub fn group(&self) -> GroupId {
        self.group
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    fn level(&self, n: usize) -> Result<&[AxisLevel]> {
        if n == 0 || n > self.levels.len() {
            return Err(Error::Argument(format!(
                "level {n} out of range 1..={}",
                self.levels.len()
            )));
        }
        Ok(&self.levels[n - 1])
    }

    pub fn axes(&self, n: usize) -> Result<&[AxisLevel]> {
        self.level(n)
    }

    /// `(a_n, b_n)` of a `Z` schedule.
    pub fn interval(&self, n: usize) -> Result<(Int, Int)> {
        let lv = self.level(n)?;
        if self.group != GroupId::Z {
            return Err(Error::Unsupported("interval() needs a Z schedule".into()));
        }
        Ok((lv[0].a.clone(), lv[0].b.clone()))
    }

    pub fn periods(&self, n: usize) -> Result<Vec<Int>> {
        Ok(self.level(n)?.iter().map(AxisLevel::period).collect())
    }

    /// `|S_n|`.
    pub fn cardinality(&self, n: usize) -> Result<Int> {
        Ok(self.periods(n)?.iter().product())
    }

    /// Number of level-`n` tiles inside one level-`m` tile (`n <= m`).
    pub fn ratio(&self, n: usize, m: usize) -> Result<Int> {
        if n > m {
            return Err(Error::Argument(format!(
                "ratio needs n <= m, got {n} > {m}"
            )));
        }
        Ok(self.cardinality(m)? / self.cardinality(n)?)
    }

    pub fn shape(&self, n: usize) -> Result<FiniteSubset> {
        let lv = self.level(n)?;
        Ok(FiniteSubset::boxed(
            self.group,
            lv.iter().map(|ax| -ax.a.clone()).collect(),
            lv.iter().map(|ax| ax.b.clone()).collect(),
        ))
    }

    /// Center of the level-`n` tile containing `g`.
    pub fn center_of(&self, n: usize, g: &GroupElement) -> Result<GroupElement> {
        let lv = self.level(n)?;
        crate::group::same_group(self.group, g.group())?;
        let coords = g
            .coords()
            .iter()
            .zip(lv)
            .map(|(x, ax)| {
                let q = ax.period();
                (x + &ax.a).div_floor(&q) * q
            })
            .collect();
        Ok(GroupElement::new(self.group, coords))
    }

    /// Smallest level whose shape contains `g`.
    pub fn first_level_containing(&self, g: &GroupElement) -> Option<usize> {
        (1..=self.len()).find(|&n| self.shape(n).map(|s| s.contains(g)).unwrap_or(false))
    }

    pub fn nesting(&self) -> &[usize] {
        &self.nesting
    }

    pub fn with_nesting(mut self, l: Vec<usize>) -> Self {
        self.nesting = l;
        self
    }

    pub fn truncated(&self, levels: usize) -> Result<Self> {
        self.level(levels)?;
        Ok(TilingSchedule {
            group: self.group,
            levels: self.levels[..levels].to_vec(),
            nesting: self.nesting.clone(),
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(&ScheduleFile::from(self)).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_toml(src: &str) -> Result<Self> {
        let file: ScheduleFile = toml::from_str(src).map_err(|e| Error::Parse(e.to_string()))?;
        file.try_into()
    }
}

/// Arithmetic-resolver tiling of level `n`:
/// `tile_of(g) = (1, q_n floor((g + a_n) / q_n))`.
pub fn materialize_level(schedule: &TilingSchedule, n: usize) -> Result<FiniteTiling> {
    let lv = schedule.level(n)?;
    FiniteTiling::lattice(
        schedule.group,
        lv.iter().map(|ax| ax.a.clone()).collect(),
        lv.iter().map(|ax| ax.b.clone()).collect(),
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InvarianceReport {
    pub pass: bool,
    /// Per checked level, whether `S_k` is `(K_k, eps_k)`-invariant.
    pub levels: Vec<bool>,
    pub first_failure: Option<usize>,
}

/// Checks `S_k` is `(K_k, eps_k)`-invariant for `k = 1..K_list.len()`.
pub fn verify_invariance_profile(
    schedule: &TilingSchedule,
    k_list: &[FiniteSubset],
    eps_list: &[Rational],
) -> Result<InvarianceReport> {
    if k_list.len() != eps_list.len() {
        return Err(Error::Argument(format!(
            "{} sets but {} tolerances",
            k_list.len(),
            eps_list.len()
        )));
    }
    let mut levels = Vec::with_capacity(k_list.len());
    for (i, (k, eps)) in k_list.iter().zip(eps_list).enumerate() {
        let shape = schedule.shape(i + 1)?;
        let ok = if eps.is_positive() {
            is_invariant(&shape, k, eps)?
        } else {
            false
        };
        levels.push(ok);
    }
    let first_failure = levels.iter().position(|ok| !ok).map(|i| i + 1);
    Ok(InvarianceReport {
        pass: first_failure.is_none(),
        levels,
        first_failure,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NestingReport {
    pub pass: bool,
    pub chain_ok: bool,
    /// Smallest level whose shape holds `g_1..g_N`.
    pub covering_level: Option<usize>,
    #[serde(serialize_with = "ser_opt_display")]
    pub first_uncovered: Option<GroupElement>,
    pub first_uncovered_index: Option<u64>,
}

fn ser_opt_display<S: serde::Serializer>(
    v: &Option<GroupElement>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(g) => s.collect_str(g),
        None => s.serialize_none(),
    }
}

/// Checks `S_n ⊂ S_{n+1}` and that the first `N` elements of the spiral
/// enumeration lie in some `S_n` of the schedule.
pub fn nesting_report(schedule: &TilingSchedule, n_elems: u64) -> Result<NestingReport> {
    let chain_ok = (2..=schedule.len()).all(|n| {
        schedule
            .shape(n - 1)
            .unwrap()
            .is_subset(&schedule.shape(n).unwrap())
    });
    let top = schedule.shape(schedule.len())?;
    let mut first_uncovered = None;
    let mut lo: Option<Vec<Int>> = None;
    let mut hi: Option<Vec<Int>> = None;
    for i in 1..=n_elems {
        let g = schedule.group.enumerate(&BigUint::from(i))?;
        if first_uncovered.is_none() && !top.contains(&g) {
            first_uncovered = Some((i, g.clone()));
        }
        let c = g.coords();
        lo = Some(match lo {
            None => c.to_vec(),
            Some(v) => v.iter().zip(c).map(|(x, y)| x.min(y).clone()).collect(),
        });
        hi = Some(match hi {
            None => c.to_vec(),
            Some(v) => v.iter().zip(c).map(|(x, y)| x.max(y).clone()).collect(),
        });
    }
    let covering_level = match (&first_uncovered, lo, hi) {
        (None, Some(lo), Some(hi)) => {
            let bbox = FiniteSubset::boxed(schedule.group, lo, hi);
            (1..=schedule.len()).find(|&n| bbox.is_subset(&schedule.shape(n).unwrap()))
        }
        (None, _, _) => Some(1),
        _ => None,
    };
    Ok(NestingReport {
        pass: chain_ok && first_uncovered.is_none(),
        chain_ok,
        covering_level,
        first_uncovered_index: first_uncovered.as_ref().map(|(i, _)| *i),
        first_uncovered: first_uncovered.map(|(_, g)| g),
    })
}

pub fn verify_nesting(schedule: &TilingSchedule, n_elems: u64) -> Result<bool> {
    Ok(nesting_report(schedule, n_elems)?.pass)
}

/// Irreducibility witness for a single-shape box level: with `T` the box
/// `prod [0, 2 q_k - 2]` and `eps = 1`, a set holding no whole tile has
/// `|∂_T F| >= |F|`, so every invariant set holds a tile.
pub fn irreducibility_witness(
    schedule: &TilingSchedule,
    n: usize,
) -> Result<(FiniteSubset, Rational)> {
    let q = schedule.periods(n)?;
    let hi = q.iter().map(|q| q * Int::from(2) - Int::from(2)).collect();
    Ok((
        FiniteSubset::boxed(schedule.group, vec![Int::zero(); q.len()], hi),
        Rational::one(),
    ))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub pass: bool,
    pub checks: Vec<CheckLine>,
}

/// Window containing three whole tiles of level `m` around the identity.
fn three_tile_window(schedule: &TilingSchedule, m: usize) -> Result<FiniteSubset> {
    let lv = schedule.level(m)?;
    Ok(FiniteSubset::boxed(
        schedule.group,
        lv.iter().map(|ax| -(&ax.a) - ax.period()).collect(),
        lv.iter().map(|ax| &ax.b + ax.period()).collect(),
    ))
}

/// The full verification battery used by `gen-tilings`: partition per level,
/// congruence and prime congruence between consecutive levels, syndetic
/// centers, irreducibility witness, nesting for `n_elems` elements and the
/// invariance profile `K_k = [-k, k]^d`, `eps_k = 1/k` restricted to levels
/// whose shapes have at least `4k^2` cells per axis. Windows stay below
/// `max_cells`.
pub fn verify_suite(
    schedule: &TilingSchedule,
    n_elems: u64,
    max_cells: u64,
    seed: u64,
) -> Result<SuiteReport> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let limit = Int::from(max_cells);
    let mut push =
        |name: String, pass: bool, detail: String| checks.push(CheckLine { name, pass, detail });

    for n in 1..=schedule.len() {
        let w = three_tile_window(schedule, n)?;
        if w.cardinality() > limit {
            break;
        }
        let t = materialize_level(schedule, n)?;
        let r = verify_partition(&t, &w)?;
        push(
            format!("partition level {n}"),
            r.ok(),
            format!(
                "{} violations on {} cells",
                r.violations.len(),
                w.cardinality()
            ),
        );

        let q = schedule.periods(n)?;
        let f = FiniteSubset::boxed(
            schedule.group,
            vec![Int::zero(); q.len()],
            q.iter().map(|x| x - Int::one()).collect(),
        );
        let syn = verify_syndetic_centers(&t, 1, &f, &w)?;
        push(
            format!("syndetic centers level {n}"),
            syn,
            "witness F = [0, q_n)".into(),
        );

        let (twit, eps) = irreducibility_witness(schedule, n)?;
        let mut candidates = Vec::new();
        for _ in 0..12 {
            let lo: Vec<Int> = q
                .iter()
                .map(|qq| {
                    Int::from(rng.gen_range(-3i64..=3)) * qq + Int::from(rng.gen_range(0i64..7))
                })
                .collect();
            let len: Vec<Int> = q
                .iter()
                .map(|qq| {
                    qq * Int::from(rng.gen_range(4i64..=12)) + Int::from(rng.gen_range(0i64..3))
                })
                .collect();
            let hi = lo.iter().zip(&len).map(|(l, d)| l + d).collect();
            let cand = FiniteSubset::boxed(schedule.group, lo, hi);
            if cand.cardinality() <= limit {
                candidates.push(cand);
            }
        }
        let ir = check_irreducibility_witness(&t, &twit, &eps, &candidates)?;
        if ir.checked > 0 || !ir.pass {
            push(
                format!("irreducibility level {n}"),
                ir.pass,
                format!(
                    "{} invariant candidates checked, {} skipped",
                    ir.checked, ir.skipped
                ),
            );
        }

        if n < schedule.len() {
            let wc = three_tile_window(schedule, n + 1)?;
            if wc.cardinality() <= limit {
                let coarse = materialize_level(schedule, n + 1)?;
                let c = congruence_report(&t, &coarse, &wc)?;
                push(
                    format!("congruent {n}->{}", n + 1),
                    c.congruent == Verdict::True,
                    format!(
                        "{:?} over {} coarse tiles",
                        c.congruent, c.coarse_tiles_checked
                    ),
                );
                push(
                    format!("primely congruent {n}->{}", n + 1),
                    c.primely == Verdict::True,
                    c.failure.unwrap_or_else(|| format!("{:?}", c.primely)),
                );
            }
        }
    }

    let nest = nesting_report(schedule, n_elems)?;
    push(
        format!("nesting N={n_elems}"),
        nest.pass,
        match (&nest.covering_level, &nest.first_uncovered) {
            (Some(l), _) => format!("covered at level {l}"),
            (None, Some(g)) => format!(
                "first uncovered g_{} = {g}",
                nest.first_uncovered_index.unwrap_or(0)
            ),
            _ => "chain broken".into(),
        },
    );

    // K_k = [-k, k]^d with eps_k = 1/k starts at the first level o + 1 whose
    // periods satisfy sum_i 4k^2 / q_i < 1 for every later profile index;
    // earlier levels get ({e}, 1).
    let rank = schedule.group.rank();
    let profile_len = 6usize;
    let fits = |o: usize| -> Result<bool> {
        for k in 1..=profile_len {
            if o + k > schedule.len() {
                break;
            }
            let load: Rational = schedule
                .periods(o + k)?
                .iter()
                .map(|q| Rational::new(Int::from(4 * k * k), q.clone()))
                .sum();
            if load >= Rational::one() {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let mut offset = 0;
    while offset < schedule.len() && !fits(offset)? {
        offset += 1;
    }
    let mut ks = Vec::new();
    let mut eps = Vec::new();
    for _ in 0..offset {
        ks.push(FiniteSubset::identity(schedule.group));
        eps.push(Rational::one());
    }
    for k in 1..=profile_len.min(schedule.len() - offset) {
        let kk = k as i64;
        ks.push(FiniteSubset::boxed(
            schedule.group,
            vec![Int::from(-kk); rank],
            vec![Int::from(kk); rank],
        ));
        eps.push(Rational::new(Int::one(), Int::from(k)));
    }
    let inv = verify_invariance_profile(schedule, &ks, &eps)?;
    push(
        "invariance profile".into(),
        inv.pass,
        format!(
            "K_k = [-k,k], eps_k = 1/k on levels {}..={}, first failure {:?}",
            offset + 1,
            inv.levels.len(),
            inv.first_failure
        ),
    );

    let pass = checks.iter().all(|c| c.pass);
    Ok(SuiteReport { pass, checks })
}

#[derive(Serialize, Deserialize)]
struct ScheduleFile {
    group: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    nesting: Vec<usize>,
    level: Vec<LevelEntry>,
}

#[derive(Serialize, Deserialize)]
struct LevelEntry {
    a: Vec<String>,
    b: Vec<String>,
}

impl From<&TilingSchedule> for ScheduleFile {
    fn from(s: &TilingSchedule) -> Self {
        ScheduleFile {
            group: s.group.to_string(),
            nesting: s.nesting.clone(),
            level: s
                .levels
                .iter()
                .map(|lv| LevelEntry {
                    a: lv.iter().map(|ax| ax.a.to_string()).collect(),
                    b: lv.iter().map(|ax| ax.b.to_string()).collect(),
                })
                .collect(),
        }
    }
}

impl TryFrom<ScheduleFile> for TilingSchedule {
    type Error = Error;

    fn try_from(f: ScheduleFile) -> Result<Self> {
        let group: GroupId = f.group.parse()?;
        let parse = |s: &String| {
            s.parse::<Int>()
                .map_err(|_| Error::Parse(format!("bad integer `{s}`")))
        };
        let levels = f
            .level
            .iter()
            .map(|e| {
                if e.a.len() != e.b.len() {
                    return Err(Error::Parse("a and b differ in length".into()));
                }
                e.a.iter()
                    .zip(&e.b)
                    .map(|(a, b)| {
                        Ok(AxisLevel {
                            a: parse(a)?,
                            b: parse(b)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TilingSchedule::from_levels(group, levels)?.with_nesting(f.nesting))
    }
}

/// `log2 |S_n|` rounded down, for summaries of huge levels.
pub fn level_bits(schedule: &TilingSchedule, n: usize) -> Result<u64> {
    Ok(schedule.cardinality(n)?.bits().saturating_sub(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn default_z(levels: usize) -> TilingSchedule {
        generate_interval_schedule(1, 2, &Growth::constant(Int::from(3)), levels).unwrap()
    }

    #[test]
    fn triple_growth_levels() {
        let s = default_z(6);
        let expect = [(1, 2), (5, 6), (17, 18), (53, 54), (161, 162), (485, 486)];
        for (n, (a, b)) in expect.iter().enumerate() {
            assert_eq!(s.interval(n + 1).unwrap(), (Int::from(*a), Int::from(*b)));
        }
        let q: Vec<Int> = (1..=4).map(|n| s.periods(n).unwrap()[0].clone()).collect();
        assert_eq!(q, vec![4.into(), 12.into(), 36.into(), 108.into()]);
        for n in 1..6 {
            let (a0, _) = s.interval(n).unwrap();
            let (a1, _) = s.interval(n + 1).unwrap();
            assert!((a1 - a0).is_multiple_of(&s.periods(n).unwrap()[0]));
        }
    }

    #[test]
    fn single_level_and_bad_growth() {
        assert_eq!(default_z(1).len(), 1);
        let e = generate_interval_schedule(1, 2, &"5/2".parse().unwrap(), 3).unwrap_err();
        assert!(matches!(e, Error::Schedule { level: 2, .. }), "{e:?}");
        assert!(generate_interval_schedule(0, 0, &Growth::constant(Int::from(2)), 3).is_err());
        assert!(generate_interval_schedule(1, 1, &"1".parse().unwrap(), 3).is_err());
        assert!(TilingSchedule::intervals(&[(1, 2), (4, 7)]).is_err());
        assert!(TilingSchedule::intervals(&[(1, 2), (5, 7)]).is_err());
    }

    #[test]
    fn materialized_levels() {
        let s = default_z(4);
        let t = materialize_level(&s, 1).unwrap();
        assert_eq!(
            t.tile_of(&GroupElement::z(5)).unwrap().center,
            GroupElement::z(4)
        );
        for n in 1..=4 {
            let t = materialize_level(&s, n).unwrap();
            assert!(t.tile_of(&GroupElement::z(0)).unwrap().center.is_identity());
            assert!(verify_partition(&t, &FiniteSubset::interval(-1000, 1000))
                .unwrap()
                .ok());
        }
        assert!(materialize_level(&s, 0).is_err());
        assert!(materialize_level(&s, 5).is_err());
    }

    #[test]
    fn nesting_examples() {
        let s = default_z(6);
        let rep = nesting_report(&s, 100).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.covering_level, Some(4));
        assert_eq!(nesting_report(&s, 1).unwrap().covering_level, Some(1));
        let one_sided = TilingSchedule::intervals(&[(0, 3), (0, 15), (0, 63)]).unwrap();
        let rep = nesting_report(&one_sided, 10).unwrap();
        assert!(!rep.pass);
        assert_eq!(rep.first_uncovered, Some(GroupElement::z(-1)));
        assert_eq!(rep.first_uncovered_index, Some(3));
    }

    #[test]
    fn invariance_profiles() {
        let doubling =
            generate_interval_schedule(4, 5, &Growth::constant(Int::from(2)), 6).unwrap();
        let ks: Vec<FiniteSubset> = (1..=6).map(|k| FiniteSubset::interval(-k, k)).collect();
        let eps: Vec<Rational> = (1..=6).map(|k| r(1, k)).collect();
        assert!(
            verify_invariance_profile(&doubling, &ks, &eps)
                .unwrap()
                .pass
        );

        let zero = vec![Rational::zero(); 6];
        let rep = verify_invariance_profile(&doubling, &ks, &zero).unwrap();
        assert_eq!(rep.first_failure, Some(1));

        let singles = vec![FiniteSubset::identity(GroupId::Z); 6];
        assert!(
            verify_invariance_profile(&doubling, &singles, &eps)
                .unwrap()
                .pass
        );
        assert!(verify_invariance_profile(&doubling, &ks[..2], &eps).is_err());

        let small = generate_interval_schedule(1, 2, &Growth::constant(Int::from(2)), 6).unwrap();
        assert_eq!(
            verify_invariance_profile(&small, &ks, &eps)
                .unwrap()
                .first_failure,
            Some(1)
        );
    }

    #[test]
    fn toml_round_trip() {
        let s = default_z(40).with_nesting(vec![3, 5]);
        let text = s.to_toml().unwrap();
        let back = TilingSchedule::from_toml(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_toml().unwrap(), text);
        let sq = generate_schedule(
            GroupId::Z2,
            &[(1, 2), (0, 1)],
            &Growth::constant(Int::from(2)),
            5,
        )
        .unwrap();
        assert_eq!(
            TilingSchedule::from_toml(&sq.to_toml().unwrap()).unwrap(),
            sq
        );
    }

    #[test]
    fn suites_pass() {
        let rep = verify_suite(&default_z(8), 100, 10_000, 7).unwrap();
        assert!(
            rep.pass,
            "{:#?}",
            rep.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>()
        );
        assert!(rep
            .checks
            .iter()
            .any(|c| c.name.starts_with("primely congruent 5->6")));
        let sq = generate_schedule(
            GroupId::Z2,
            &[(1, 2), (1, 1)],
            &Growth::constant(Int::from(3)),
            4,
        )
        .unwrap();
        let rep = verify_suite(&sq, 100, 10_000, 7).unwrap();
        assert!(rep.pass, "{:#?}", rep.checks);
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("1/2").unwrap(), r(1, 2));
        assert_eq!(parse_rational("2.5").unwrap(), r(5, 2));
        assert_eq!(parse_rational("3").unwrap(), r(3, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }
}
