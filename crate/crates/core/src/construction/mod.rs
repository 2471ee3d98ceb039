//! The construction engine: per-level plans, pointwise evaluation of the
//! words `w_n`, `w_n'`, `v_n`, the limit `w` and the final configuration `x`,
//! plus a literal small-instance materializer used as an oracle.
//!
//! Only `G = Z` is constructed. Level `n` of the construction uses the
//! schedule level `L_n`, shape `[-alpha_n, beta_n]`, and every tile carries
//! the same word with exactly `s_n = floor(rho |S_n|) + 1` stars.

mod eval;
mod materialize;

pub use eval::LazyConfiguration;
pub use materialize::{materialize, MaterializedWords, MATERIALIZE_LIMIT};

use std::fmt;

use num::{BigUint, Integer, One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::group::GroupId;
use crate::polyhedron::{format_point, Net, Point, Polyhedron};
use crate::schedule::TilingSchedule;
use crate::{Error, Int, Rational, Result};

/// `|R_n|` is only computed exactly up to this many bits.
pub const EXACT_BITS_LIMIT: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    Capped(u64),
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exact => f.write_str("exact"),
            Mode::Capped(c) => write!(f, "capped:{c}"),
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "exact" => Ok(Mode::Exact),
            other => {
                let cap = other
                    .strip_prefix("capped:")
                    .and_then(|c| c.trim().parse::<u64>().ok())
                    .filter(|c| *c >= 1)
                    .ok_or_else(|| {
                        Error::Parse(format!(
                            "mode must be `exact` or `capped:N` (N >= 1), got `{s}`"
                        ))
                    })?;
                Ok(Mode::Capped(cap))
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConstructionParams {
    pub rho: Rational,
    pub schedule: TilingSchedule,
    pub polyhedron: Polyhedron,
    /// `nets[n - 1]` is `P_{delta_n}`.
    pub nets: Vec<Net>,
    pub depth: usize,
    pub mode: Mode,
}

impl ConstructionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho.is_positive() && self.rho < Rational::one()) {
            return Err(Error::Argument(format!(
                "rho must lie in (0, 1), got {}",
                self.rho
            )));
        }
        if self.depth == 0 {
            return Err(Error::Argument("depth must be >= 1".into()));
        }
        if self.schedule.group() != GroupId::Z {
            return Err(Error::Unsupported(format!(
                "the construction is implemented for Z only, got a {} schedule",
                self.schedule.group()
            )));
        }
        if self.nets.len() < self.depth {
            return Err(Error::Argument(format!(
                "{} nets supplied for depth {}",
                self.nets.len(),
                self.depth
            )));
        }
        for (i, net) in self.nets.iter().enumerate() {
            if net.dim() != self.polyhedron.dim() {
                return Err(Error::Argument(format!(
                    "net {} has dimension {}",
                    i + 1,
                    net.dim()
                )));
            }
            if i > 0 && !net.refines(&self.nets[i - 1]) {
                return Err(Error::Argument(format!(
                    "net {} does not contain net {}",
                    i + 1,
                    i
                )));
            }
        }
        Ok(())
    }
}

/// A symbol of `P ∪ {*, #}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", content = "point", rename_all = "snake_case")]
pub enum SymbolValue {
    Star,
    Hash,
    Point(#[serde(serialize_with = "ser_point")] Point),
}

fn ser_point<S: serde::Serializer>(p: &Point, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(&format_point(p))
}

impl SymbolValue {
    pub fn is_star(&self) -> bool {
        matches!(self, SymbolValue::Star)
    }
}

impl fmt::Display for SymbolValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolValue::Star => f.write_str("*"),
            SymbolValue::Hash => f.write_str("#"),
            SymbolValue::Point(p) => f.write_str(&format_point(p)),
        }
    }
}

/// Substitution data of step `n`: the level `l_n` whose tile `D = S'_{l_n}`
/// (placed at the identity) hosts the block `R_n` of `|R_n|` consecutive
/// `T_n` centers followed by `h_n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Substitution {
    #[serde(serialize_with = "crate::report::ser_display")]
    pub net_size: BigUint,
    #[serde(serialize_with = "crate::report::ser_display")]
    pub r_size: Int,
    /// `false` when capped mode truncated `|P|^{s_n}`.
    pub r_exact: bool,
    pub l_level: usize,
    #[serde(serialize_with = "crate::report::ser_display")]
    pub d_lo: Int,
    #[serde(serialize_with = "crate::report::ser_display")]
    pub d_hi: Int,
    /// `T_n` tiles in `D`.
    #[serde(serialize_with = "crate::report::ser_display")]
    pub d_tiles: Int,
    /// First center of the block.
    #[serde(serialize_with = "crate::report::ser_display")]
    pub r_start: Int,
    /// Index of the block's first tile among the tiles of `D`.
    #[serde(serialize_with = "crate::report::ser_display")]
    pub r_offset: Int,
    #[serde(serialize_with = "crate::report::ser_display")]
    pub h: Int,
}

/// Conversion data of step `n`: `T_{n+1}` is schedule level `m_n`, and the
/// first `K` stars outside `D` (greedy, at most `allow` per `T_n` tile, tiles
/// and cells left to right) turn into `#`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Conversion {
    pub m_level: usize,
    /// `T_n` tiles per `T_{n+1}` tile.
    #[serde(serialize_with = "crate::report::ser_display")]
    pub tiles: Int,
    /// Index of the first `D` tile among them.
    #[serde(serialize_with = "crate::report::ser_display")]
    pub d_offset: Int,
    #[serde(serialize_with = "crate::report::ser_display")]
    pub outside_tiles: Int,
    #[serde(serialize_with = "crate::report::ser_display")]
    pub stars_before: Int,
    #[serde(serialize_with = "crate::report::ser_display")]
    pub target: Int,
    #[serde(serialize_with = "crate::report::ser_display")]
    pub conversions: Int,
    #[serde(serialize_with = "crate::report::ser_display")]
    pub allow: Int,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelPlan {
    pub n: usize,
    pub schedule_level: usize,
    #[serde(serialize_with = "crate::report::ser_display")]
    pub alpha: Int,
    #[serde(serialize_with = "crate::report::ser_display")]
    pub beta: Int,
    #[serde(serialize_with = "crate::report::ser_display")]
    pub size: Int,
    /// Stars of `w_n` per `T_n` tile.
    #[serde(serialize_with = "crate::report::ser_display")]
    pub stars: Int,
    /// `floor(rho |S_n|)`: fewest stars a tile may keep during conversion.
    #[serde(serialize_with = "crate::report::ser_display")]
    pub floor: Int,
    pub substitution: Option<Substitution>,
    pub conversion: Option<Conversion>,
}

impl LevelPlan {
    pub fn star_density(&self) -> Rational {
        Rational::new(self.stars.clone(), self.size.clone())
    }

    fn sub(&self) -> Result<&Substitution> {
        self.substitution.as_ref().ok_or_else(|| {
            Error::Depth(format!(
                "level {} has no substitution block at this depth",
                self.n
            ))
        })
    }

    fn conv(&self) -> Result<&Conversion> {
        self.conversion
            .as_ref()
            .ok_or_else(|| Error::Depth(format!("level {} has no successor at this depth", self.n)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Plan {
    #[serde(serialize_with = "crate::report::ser_display")]
    pub rho: Rational,
    pub depth: usize,
    pub mode: Mode,
    /// Set in capped mode once some `|R_n|` was truncated.
    pub approximate: bool,
    /// `|A|`: the first `|A|` cells of `S_1` carry `*` in `w_1`.
    #[serde(serialize_with = "crate::report::ser_display")]
    pub a_count: Int,
    pub levels: Vec<LevelPlan>,
    /// `H_n = h_1 + ... + h_n`.
    #[serde(serialize_with = "crate::report::ser_display_seq")]
    pub h_sums: Vec<Int>,
}

impl Plan {
    pub fn level(&self, n: usize) -> Result<&LevelPlan> {
        self.levels
            .get(n.wrapping_sub(1))
            .ok_or_else(|| Error::Depth(format!("level {n} is not planned (depth {})", self.depth)))
    }

    /// Schedule levels `l_n` of every planned substitution.
    pub fn nesting(&self) -> Vec<usize> {
        self.levels
            .iter()
            .filter_map(|l| l.substitution.as_ref().map(|s| s.l_level))
            .collect()
    }
}

/// `floor(rho * v)`.
pub fn floor_mul(rho: &Rational, v: &Int) -> Int {
    (rho * Rational::from_integer(v.clone()))
        .floor()
        .to_integer()
}

fn bits_of_power(base: &BigUint, exp: &Int) -> Option<u64> {
    let e = exp.to_u64()?;
    e.checked_mul(base.bits())
}

/// `|P|^s`, exact or capped. `None` when exact mode cannot represent it.
fn r_size(mode: Mode, base: &BigUint, s: &Int) -> Option<(Int, bool)> {
    let bits = bits_of_power(base, s);
    match mode {
        Mode::Exact => {
            let bits = bits?;
            if bits > EXACT_BITS_LIMIT {
                return None;
            }
            let e = s.to_usize()?;
            Some((Int::from(num::pow::pow(base.clone(), e)), true))
        }
        Mode::Capped(cap) => {
            let cap = Int::from(cap);
            match bits {
                Some(b) if b <= 128 => {
                    let exact = Int::from(num::pow::pow(base.clone(), s.to_usize()?));
                    if exact <= cap {
                        Some((exact, true))
                    } else {
                        Some((cap, false))
                    }
                }
                _ => Some((cap, false)),
            }
        }
    }
}

fn find_substitution(
    params: &ConstructionParams,
    lp: &LevelPlan,
    base: &BigUint,
    required: bool,
) -> Result<Option<Substitution>> {
    let Some((r, r_exact)) = r_size(params.mode, base, &lp.stars) else {
        if required {
            return Err(Error::Depth(format!(
                "|R_{}| = {}^{} exceeds {} bits; use capped mode or a smaller depth",
                lp.n, base, lp.stars, EXACT_BITS_LIMIT
            )));
        }
        return Ok(None);
    };
    let sched = &params.schedule;
    let q = &lp.size;
    for l in (lp.schedule_level + 1)..=sched.len() {
        let d_tiles = sched.ratio(lp.schedule_level, l)?;
        if d_tiles <= r {
            continue;
        }
        let (a_l, b_l) = sched.interval(l)?;
        let c_min = -&a_l + &lp.alpha;
        let c_max = &b_l - &lp.beta;
        let start = c_min.clone().max(-((&r - Int::one()) * q));
        let h = &start + &r * q;
        if h > c_max {
            continue;
        }
        let r_offset = (&start - &c_min) / q;
        return Ok(Some(Substitution {
            net_size: base.clone(),
            r_size: r,
            r_exact,
            l_level: l,
            d_lo: -a_l,
            d_hi: b_l,
            d_tiles,
            r_start: start,
            r_offset,
            h,
        }));
    }
    if required {
        return Err(Error::Capacity(format!(
            "no schedule level (of {}) holds more than |R_{}| = {} tiles of level {}; extend the schedule",
            sched.len(),
            lp.n,
            r,
            lp.schedule_level
        )));
    }
    Ok(None)
}

fn find_conversion(
    params: &ConstructionParams,
    lp: &LevelPlan,
    sub: &Substitution,
    target_point: &Int,
) -> Result<Conversion> {
    let sched = &params.schedule;
    let rho = &params.rho;
    let s = &lp.stars;
    let allow = s - &lp.floor;
    let mut last_failure = String::from("no level above l_n");
    for m in (sub.l_level + 1)..=sched.len() {
        let (a_m, b_m) = sched.interval(m)?;
        if !(-&a_m <= *target_point && *target_point <= b_m) {
            last_failure = format!("requirement (1): {target_point} not in S_{{{}}}", lp.n + 1);
            continue;
        }
        let q_m = sched.cardinality(m)?;
        let tiles = sched.ratio(lp.schedule_level, m)?;
        let outside = &tiles - &sub.d_tiles;
        let outside_stars = &outside * s;
        if Rational::from_integer(outside_stars.clone())
            <= rho * Rational::from_integer(q_m.clone())
        {
            last_failure =
                "requirement (3): star mass outside the designated tile does not exceed rho".into();
            continue;
        }
        let target = floor_mul(rho, &q_m) + Int::one();
        let stars_before = (&sub.d_tiles - &sub.r_size) * s + &outside_stars;
        let conversions = &stars_before - &target;
        if conversions.is_negative() || conversions > &outside * &allow {
            last_failure =
                "conversion target unreachable without taking a tile below its floor".into();
            continue;
        }
        let d_offset = (&a_m - (-&sub.d_lo)) / &lp.size;
        return Ok(Conversion {
            m_level: m,
            tiles,
            d_offset,
            outside_tiles: outside,
            stars_before,
            target,
            conversions,
            allow,
        });
    }
    Err(Error::Capacity(format!(
        "no schedule level (of {}) can host level {}: {last_failure}",
        sched.len(),
        lp.n + 1
    )))
}

/// Plans steps `1..depth-1` (each fixing `T_{n+1}`) and, when representable,
/// the substitution block of level `depth`, which defines `w'_depth`.
pub fn plan(params: &ConstructionParams) -> Result<Plan> {
    params.validate()?;
    let sched = &params.schedule;
    let (a1, b1) = sched.interval(1)?;
    let size = sched.cardinality(1)?;
    let floor = floor_mul(&params.rho, &size);
    let a_count = &floor + Int::one();
    let mut lp = LevelPlan {
        n: 1,
        schedule_level: 1,
        alpha: a1,
        beta: b1,
        size,
        stars: a_count.clone(),
        floor,
        substitution: None,
        conversion: None,
    };
    let mut levels = Vec::new();
    let mut h_sums = Vec::new();
    let mut h_sum = Int::zero();
    let mut approximate = false;
    for n in 1..=params.depth {
        let required = n < params.depth;
        let base = params.nets[n - 1].size();
        let sub = find_substitution(params, &lp, &base, required)?;
        if let Some(sub) = &sub {
            approximate |= !sub.r_exact;
        }
        lp.substitution = sub;
        if !required {
            levels.push(lp);
            break;
        }
        let sub = lp.substitution.clone().expect("required substitution");
        h_sum += &sub.h;
        h_sums.push(h_sum.clone());
        let g_n = GroupId::Z.enumerate(&BigUint::from(n))?.value().clone();
        let target_point = &g_n + &h_sum;
        let conv = find_conversion(params, &lp, &sub, &target_point)?;
        let m = conv.m_level;
        lp.conversion = Some(conv);
        let next_stars = lp.conversion.as_ref().unwrap().target.clone();
        levels.push(lp);
        let (a, b) = sched.interval(m)?;
        let size = sched.cardinality(m)?;
        let floor = floor_mul(&params.rho, &size);
        lp = LevelPlan {
            n: n + 1,
            schedule_level: m,
            alpha: a,
            beta: b,
            size,
            stars: next_stars,
            floor,
            substitution: None,
            conversion: None,
        };
    }
    Ok(Plan {
        rho: params.rho.clone(),
        depth: params.depth,
        mode: params.mode,
        approximate,
        a_count,
        levels,
        h_sums,
    })
}

/// Digit `j` (little-endian) of `r` in base `base`.
pub fn digit(r: &Int, base: &BigUint, j: &Int) -> BigUint {
    let r = r.to_biguint().expect("block index is non-negative");
    let Some(j) = j.to_u64() else {
        return BigUint::zero();
    };
    if j >= r.bits() {
        return BigUint::zero();
    }
    (r / num::pow::pow(base.clone(), j as usize)).mod_floor(base)
}
