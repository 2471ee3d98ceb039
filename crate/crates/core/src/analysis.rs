//! Checkable consequences of the construction: symbol densities, the free
//! set `J_n`, the two mean-dimension estimators and a minimality diagnostic.

use num::{Integer, One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::construction::{LazyConfiguration, SymbolValue};
use crate::group::{covers_window, FiniteSubset, GroupElement, GroupId};
use crate::polyhedron::Point;
use crate::report::ser_display;
use crate::{Error, Int, Rational, Result};

/// Sets up to this many cells are listed element by element.
pub const LIST_LIMIT: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DensityReport {
    pub cells: usize,
    #[serde(serialize_with = "ser_display")]
    pub star_density: Rational,
    #[serde(serialize_with = "ser_display")]
    pub hash_density: Rational,
}

pub fn densities(word: &[SymbolValue]) -> Result<DensityReport> {
    if word.is_empty() {
        return Err(Error::Argument("density of an empty word".into()));
    }
    let n = Int::from(word.len());
    let stars = word
        .iter()
        .filter(|v| matches!(v, SymbolValue::Star))
        .count();
    let hashes = word
        .iter()
        .filter(|v| matches!(v, SymbolValue::Hash))
        .count();
    Ok(DensityReport {
        cells: word.len(),
        star_density: Rational::new(Int::from(stars), n.clone()),
        hash_density: Rational::new(Int::from(hashes), n),
    })
}

/// `J_n`: star positions of `v_n` in `S_{n+1}`, shifted by `-H_n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FreeSet {
    pub n: usize,
    #[serde(serialize_with = "ser_display")]
    pub shift: Int,
    #[serde(serialize_with = "ser_display")]
    pub size: Int,
    #[serde(serialize_with = "ser_display")]
    pub window_size: Int,
    /// Listed when `S_{n+1}` is small enough.
    #[serde(skip)]
    pub elements: Option<Vec<Int>>,
}

impl FreeSet {
    pub fn density(&self) -> Rational {
        Rational::new(self.size.clone(), self.window_size.clone())
    }
}

/// Membership in `J_n` without listing it.
pub fn in_free_set(cfg: &LazyConfiguration, n: usize, g: &Int) -> Result<bool> {
    if n == 0 {
        return Ok(false);
    }
    let plan = cfg.plan();
    let shift = plan
        .h_sums
        .get(n - 1)
        .ok_or_else(|| Error::Depth(format!("J_{n} needs depth >= {}", n + 1)))?;
    let next = plan.level(n + 1)?;
    let p = g + shift;
    if p < -next.alpha.clone() || p > next.beta {
        return Ok(false);
    }
    Ok(cfg.w_level(n + 1, &p)?.is_star())
}

pub fn free_set(cfg: &LazyConfiguration, n: usize) -> Result<FreeSet> {
    let plan = cfg.plan();
    if n == 0 {
        return Ok(FreeSet {
            n,
            shift: Int::zero(),
            size: Int::zero(),
            window_size: Int::one(),
            elements: Some(Vec::new()),
        });
    }
    let shift = plan
        .h_sums
        .get(n - 1)
        .cloned()
        .ok_or_else(|| Error::Depth(format!("J_{n} needs depth >= {}", n + 1)))?;
    let next = plan.level(n + 1)?;
    let size = cfg.stars_before(n + 1, &(&next.beta + Int::one()))?;
    let elements = match next.size.to_u64().filter(|v| *v <= LIST_LIMIT) {
        Some(len) => {
            let mut out = Vec::new();
            for i in 0..len {
                let p = -&next.alpha + Int::from(i);
                if cfg.w_level(n + 1, &p)?.is_star() {
                    out.push(&p - &shift);
                }
            }
            Some(out)
        }
        None => None,
    };
    Ok(FreeSet {
        n,
        shift,
        size,
        window_size: next.size.clone(),
        elements,
    })
}

/// `|J_n| / |S_{n+1}| · dim P`.
pub fn lower_bound_estimate(cfg: &LazyConfiguration, n: usize) -> Result<Rational> {
    let j = free_set_summary(cfg, n)?;
    Ok(j * Int::from(cfg.params().polyhedron.dim()))
}

fn free_set_summary(cfg: &LazyConfiguration, n: usize) -> Result<Rational> {
    let plan = cfg.plan();
    if n == 0 || plan.h_sums.len() < n {
        return Err(Error::Depth(format!("J_{n} needs depth >= {}", n + 1)));
    }
    let next = plan.level(n + 1)?;
    let size = cfg.stars_before(n + 1, &(&next.beta + Int::one()))?;
    Ok(Rational::new(size, next.size.clone()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundEstimate {
    pub level: usize,
    #[serde(serialize_with = "ser_display")]
    pub window_lo: Int,
    #[serde(serialize_with = "ser_display")]
    pub window_hi: Int,
    /// Translation classes of `T_n` relative to the window.
    #[serde(serialize_with = "ser_display")]
    pub classes: Int,
    /// Largest count of coordinates outside the coincidence set.
    #[serde(serialize_with = "ser_display")]
    pub max_free: Int,
    /// `max_free / |W|`, no `dim P` factor.
    #[serde(serialize_with = "ser_display")]
    pub upper_literal: Rational,
    #[serde(serialize_with = "ser_display")]
    pub upper: Rational,
    /// `(rho + 1/|S_n| + 2(|S_n| - 1)/|W|) · dim P`.
    #[serde(serialize_with = "ser_display")]
    pub envelope: Rational,
    /// Per-class counts, listed when there are few classes.
    #[serde(skip)]
    pub class_counts: Option<Vec<Int>>,
}

const CLASS_LIST_LIMIT: u64 = 100_000;

/// Free coordinates in `[lo, hi]` when the `T_n` tiles are shifted by `o`:
/// `s_n` per whole tile plus every cell of a cut tile.
fn class_count(lo: &Int, hi: &Int, o: &Int, alpha: &Int, beta: &Int, q: &Int, s: &Int) -> Int {
    let first = (lo - o + alpha + q - Int::one()).div_floor(q);
    let last = (hi - o - beta).div_floor(q);
    let whole = (last - first + Int::one()).max(Int::zero());
    let len = hi - lo + Int::one();
    s * &whole + len - q * whole
}

/// Upper estimate from coordinate counting on the interval `w`, maximized
/// over the `|S_n|` translation classes of `T_n`.
pub fn upper_bound_estimate(
    cfg: &LazyConfiguration,
    n: usize,
    w: &FiniteSubset,
) -> Result<BoundEstimate> {
    if w.group() != GroupId::Z {
        return Err(Error::Unsupported(
            "upper_bound_estimate handles Z windows".into(),
        ));
    }
    let (lo, hi) = w
        .as_box()
        .map(|(l, h)| (l[0].clone(), h[0].clone()))
        .ok_or_else(|| Error::Argument("upper_bound_estimate needs an interval window".into()))?;
    let lp = cfg.plan().level(n)?;
    let q = &lp.size;
    let len = &hi - &lo + Int::one();
    if &len < q {
        return Err(Error::Argument(format!(
            "inconclusive: window of {len} cells cannot hold a whole tile of {q} cells"
        )));
    }
    let (m, r) = len.div_rem(q);
    let n_min = if r == q - Int::one() {
        m.clone()
    } else {
        &m - Int::one()
    };
    let max_free = &lp.stars * &n_min + &len - q * &n_min;
    let class_counts = q.to_u64().filter(|v| *v <= CLASS_LIST_LIMIT).map(|qq| {
        (0..qq)
            .map(|o| class_count(&lo, &hi, &Int::from(o), &lp.alpha, &lp.beta, q, &lp.stars))
            .collect::<Vec<_>>()
    });
    if let Some(counts) = &class_counts {
        let brute = counts.iter().max().cloned().unwrap_or_default();
        debug_assert_eq!(brute, max_free);
    }
    let d = Int::from(cfg.params().polyhedron.dim());
    let upper_literal = Rational::new(max_free.clone(), len.clone());
    let envelope = (cfg.plan().rho.clone()
        + Rational::new(Int::one(), q.clone())
        + Rational::new(Int::from(2) * (q - Int::one()), len.clone()))
        * &d;
    Ok(BoundEstimate {
        level: n,
        window_lo: lo,
        window_hi: hi,
        classes: q.clone(),
        upper: &upper_literal * &d,
        upper_literal,
        max_free,
        envelope,
        class_counts,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MdimRow {
    pub n: usize,
    /// `|J_n| / |S_{n+1}| · dim P`.
    #[serde(serialize_with = "ser_display")]
    pub lower_estimate: Rational,
    /// `lower_estimate - dim P / |S_{n+1}|`, never above `rho · dim P`.
    #[serde(serialize_with = "ser_display")]
    pub lower: Rational,
    #[serde(serialize_with = "ser_display")]
    pub upper: Rational,
    #[serde(serialize_with = "ser_display")]
    pub upper_literal: Rational,
    #[serde(serialize_with = "ser_display")]
    pub envelope: Rational,
    #[serde(serialize_with = "ser_display")]
    pub gap: Rational,
    pub contains_target: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MdimReport {
    pub depth: usize,
    #[serde(serialize_with = "ser_display")]
    pub target: Rational,
    #[serde(serialize_with = "ser_display")]
    pub lower: Rational,
    #[serde(serialize_with = "ser_display")]
    pub upper: Rational,
    #[serde(serialize_with = "ser_display")]
    pub gap: Rational,
    pub gap_nonincreasing: bool,
    pub approximate: bool,
    pub notes: Vec<String>,
    pub rows: Vec<MdimRow>,
}

/// Rows `n = 1..=depth`: the free-set estimate on `S_{n+1}` and the
/// counting estimate for `T_n` on the same window. Needs `depth + 1`
/// planned levels.
pub fn mdim_report(cfg: &LazyConfiguration, depth: usize) -> Result<MdimReport> {
    if depth == 0 {
        return Err(Error::Argument("mdim_report needs depth >= 1".into()));
    }
    let plan = cfg.plan();
    if plan.h_sums.len() < depth {
        return Err(Error::Depth(format!(
            "an mdim report of depth {depth} needs a configuration planned to depth {}",
            depth + 1
        )));
    }
    let dim = cfg.params().polyhedron.dim();
    let d = Int::from(dim);
    let target = &plan.rho * &d;
    let mut rows = Vec::new();
    for n in 1..=depth {
        let next = plan.level(n + 1)?;
        let w = FiniteSubset::interval(-next.alpha.clone(), next.beta.clone());
        let lower_estimate = lower_bound_estimate(cfg, n)?;
        let lower = &lower_estimate - Rational::new(d.clone(), next.size.clone());
        let ub = upper_bound_estimate(cfg, n, &w)?;
        let gap = &ub.upper - &lower;
        rows.push(MdimRow {
            n,
            contains_target: lower <= target && target <= ub.upper,
            lower_estimate,
            lower,
            upper: ub.upper,
            upper_literal: ub.upper_literal,
            envelope: ub.envelope,
            gap,
        });
    }
    let gap_nonincreasing = rows.windows(2).all(|p| p[1].gap <= p[0].gap);
    let last = rows.last().expect("depth >= 1");
    let mut notes = vec![
        "the lower bound is a window estimate along the construction's own Folner sets".to_string(),
    ];
    if dim > 1 {
        notes.push(format!(
            "the coordinate-counting upper bound carries no dim P factor; `upper` multiplies it by {dim}, `upper_literal` does not"
        ));
    }
    if plan.approximate {
        notes.push(
            "capped mode: block sizes were truncated, values deviate from the exact construction"
                .into(),
        );
    }
    Ok(MdimReport {
        depth,
        target,
        lower: last.lower.clone(),
        upper: last.upper.clone(),
        gap: last.gap.clone(),
        gap_nonincreasing,
        approximate: plan.approximate,
        notes,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MinimalityReport {
    pub n: usize,
    pub label: &'static str,
    pub samples: usize,
    pub matches: usize,
    #[serde(serialize_with = "crate::report::ser_display_seq")]
    pub mismatches: Vec<Int>,
    pub syndetic: bool,
    pub witness_window_cells: u64,
    pub pass: bool,
}

/// Sampled recurrence of `x` on `S_n` along `C(S_{n+1})`, plus a
/// syndeticity witness `F = [0, |S_{n+1}|)` for those centers. Evidence,
/// not proof.
pub fn minimality_check(
    cfg: &LazyConfiguration,
    n: usize,
    sample_size: usize,
    seed: u64,
) -> Result<MinimalityReport> {
    minimality_check_with(cfg, n, sample_size, seed, |g| cfg.eval_x(g))
}

/// [`minimality_check`] against an arbitrary evaluator of `x`.
pub fn minimality_check_with<F>(
    cfg: &LazyConfiguration,
    n: usize,
    sample_size: usize,
    seed: u64,
    eval: F,
) -> Result<MinimalityReport>
where
    F: Fn(&GroupElement) -> Result<Point>,
{
    let plan = cfg.plan();
    if plan.levels.len() < n + 1 || plan.level(n)?.conversion.is_none() {
        return Err(Error::Depth(format!(
            "minimality at level {n} needs depth >= {}",
            n + 1
        )));
    }
    let lp = plan.level(n)?;
    let q_next = plan.level(n + 1)?.size.clone();
    let cells: Vec<Int> = {
        let len = lp
            .size
            .to_u64()
            .filter(|v| *v <= LIST_LIMIT)
            .ok_or_else(|| {
                Error::SizeBound(format!("|S_{n}| = {} is too large to compare", lp.size))
            })?;
        (0..len).map(|i| -&lp.alpha + Int::from(i)).collect()
    };
    let reference: Vec<Point> = cells
        .iter()
        .map(|g| eval(&GroupElement::z(g.clone())))
        .collect::<Result<_>>()?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = Vec::new();
    let mut matches = 0;
    for i in 0..sample_size {
        let k = if i == 0 {
            0
        } else {
            rng.gen_range(-1_000_000i64..=1_000_000)
        };
        let c = Int::from(k) * &q_next;
        let mut same = true;
        for (g, want) in cells.iter().zip(&reference) {
            if &eval(&GroupElement::z(g + &c))? != want {
                same = false;
                break;
            }
        }
        if same {
            matches += 1;
        } else {
            mismatches.push(c);
        }
    }
    let witness = FiniteSubset::interval(Int::zero(), &q_next - Int::one());
    let span: i64 = 1000.max(2 * q_next.to_i64().unwrap_or(0).min(5000));
    let w = FiniteSubset::interval(-span / 2, span / 2 + span % 2);
    let reach = crate::group::set_product(&crate::group::set_inverse(&witness), &w)?;
    let (rlo, rhi) = reach.bounds().expect("non-empty");
    let first = rlo[0].div_ceil(&q_next);
    let last = rhi[0].div_floor(&q_next);
    let centers = FiniteSubset::from_elements(
        GroupId::Z,
        num::range_inclusive(first, last).map(|k| GroupElement::z(k * &q_next)),
    )?;
    let syndetic = covers_window(&witness, &centers, &w)?;
    let wcells = w.cardinality().to_u64().unwrap_or(u64::MAX);
    Ok(MinimalityReport {
        n,
        label: "diagnostic",
        samples: sample_size,
        matches,
        pass: mismatches.is_empty() && syndetic && !cells.is_empty(),
        mismatches,
        syndetic,
        witness_window_cells: wcells,
    })
}

/// `|W|`-weighted star density of `w_n` over an interval (scan).
pub fn window_densities(
    cfg: &LazyConfiguration,
    n: usize,
    w: &FiniteSubset,
) -> Result<DensityReport> {
    let word: Vec<SymbolValue> = w
        .elements()?
        .iter()
        .map(|g| cfg.w_level(n, g.value()))
        .collect::<Result<_>>()?;
    densities(&word)
}
