//! Literal execution of the first two construction steps on explicit arrays. Shares no
//! arithmetic with the evaluator: tiles come from the tiling module, star
//! counts from scanning, the searches for `l_1` and `m_1` are redone here.

use num::{BigUint, Integer, One, ToPrimitive, Zero};

use super::{floor_mul, ConstructionParams, Mode, Plan, SymbolValue};
use crate::group::{FiniteSubset, GroupElement, GroupId};
use crate::schedule::materialize_level;
use crate::{Error, Int, Rational, Result};

/// Largest word (in cells) the materializer will build.
pub const MATERIALIZE_LIMIT: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaterializedWords {
    pub depth: usize,
    /// Cells of `A`, the stars of `w_1` on `S_1`.
    pub a_cells: Vec<Int>,
    pub l1: usize,
    pub r1_centers: Vec<Int>,
    pub h1: Int,
    /// `w_1` on the largest materialized window (`S'_{l_1}` or `S_2`).
    pub w1: Vec<(Int, SymbolValue)>,
    /// `w_1'` on `S'_{l_1}`.
    pub w1_prime: Vec<(Int, SymbolValue)>,
    pub m1: Option<usize>,
    /// `v_1` on `S_2`.
    pub v1: Option<Vec<(Int, SymbolValue)>>,
    /// The limit `w` on `S_depth`.
    pub limit: Vec<(Int, SymbolValue)>,
}

/// `r` in base `base`, little-endian, `len` digits.
fn base_digits(r: &Int, base: &BigUint, len: usize) -> Vec<BigUint> {
    let mut rest = r.to_biguint().expect("non-negative");
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let (q, d) = rest.div_rem(base);
        out.push(d);
        rest = q;
    }
    out
}

struct Word {
    lo: Int,
    cells: Vec<SymbolValue>,
}

impl Word {
    fn at(&self, g: &Int) -> &SymbolValue {
        &self.cells[(g - &self.lo).to_usize().expect("inside word")]
    }

    fn set(&mut self, g: &Int, v: SymbolValue) {
        let i = (g - &self.lo).to_usize().expect("inside word");
        self.cells[i] = v;
    }

    fn stars_in(&self, lo: &Int, hi: &Int) -> usize {
        let mut g = lo.clone();
        let mut n = 0;
        while &g <= hi {
            n += self.at(&g).is_star() as usize;
            g += 1;
        }
        n
    }

    fn restrict(&self, lo: &Int, hi: &Int) -> Vec<(Int, SymbolValue)> {
        let mut g = lo.clone();
        let mut out = Vec::new();
        while &g <= hi {
            out.push((g.clone(), self.at(&g).clone()));
            g += 1;
        }
        out
    }
}

fn bounds(s: &FiniteSubset) -> (Int, Int) {
    let (lo, hi) = s.bounds().expect("non-empty shape");
    (lo[0].clone(), hi[0].clone())
}

fn tile_centers(params: &ConstructionParams, inside: &FiniteSubset) -> Result<Vec<Int>> {
    let t1 = materialize_level(&params.schedule, 1)?;
    let mut cs: Vec<Int> = t1
        .tiles_inside(1, inside)?
        .into_iter()
        .map(|t| t.center.value().clone())
        .collect();
    cs.sort();
    Ok(cs)
}

/// Builds `w_1`, `w_1'`, and for depth 2 `v_1` and the limit on `S_2`.
/// `plan` supplies only the index of the identity tile in the `R_2` block.
pub fn materialize(
    params: &ConstructionParams,
    plan: &Plan,
    depth: usize,
) -> Result<MaterializedWords> {
    params.validate()?;
    if !(1..=2).contains(&depth) {
        return Err(Error::Argument(format!(
            "materialize supports depth 1 or 2, got {depth}"
        )));
    }
    if params.mode != Mode::Exact {
        return Err(Error::Argument(
            "materialize runs in exact mode only".into(),
        ));
    }
    let sched = &params.schedule;
    let rho = &params.rho;
    let s1 = sched.shape(1)?;
    let (s1_lo, s1_hi) = bounds(&s1);
    let s1_len = s1.cardinality();
    let a_len = {
        // smallest |A| with rho < |A| / |S_1|
        let mut k = Int::zero();
        while Rational::new(k.clone(), s1_len.clone()) <= *rho {
            k += 1;
        }
        k
    };
    let a_cells: Vec<Int> = s1
        .iter()
        .take(a_len.to_usize().unwrap())
        .map(|g| g.value().clone())
        .collect();
    let floor1 = floor_mul(rho, &s1_len).to_usize().unwrap();

    let build_w1 = |lo: &Int, hi: &Int| -> Result<Word> {
        let len = (hi - lo + Int::one())
            .to_u64()
            .filter(|l| *l <= MATERIALIZE_LIMIT)
            .ok_or_else(|| {
                Error::SizeBound(format!(
                    "word on [{lo}, {hi}] exceeds {MATERIALIZE_LIMIT} cells"
                ))
            })?;
        let t1 = materialize_level(sched, 1)?;
        let mut cells = Vec::with_capacity(len as usize);
        for i in 0..len {
            let g = lo + Int::from(i);
            let c = t1.tile_of(&GroupElement::z(g.clone()))?.center;
            let rel = &g - c.value();
            cells.push(if a_cells.contains(&rel) {
                SymbolValue::Star
            } else {
                SymbolValue::Hash
            });
        }
        Ok(Word {
            lo: lo.clone(),
            cells,
        })
    };

    let w1_on_s1 = build_w1(&s1_lo, &s1_hi)?;
    let stars1 = w1_on_s1.stars_in(&s1_lo, &s1_hi);
    let net1 = &params.nets[0];
    let base1 = net1.size();
    let r1 = num::pow::pow(base1.clone(), stars1);
    let r1_int = Int::from(r1.clone());

    // l_1: first level holding more than |R_1| tiles of T_1 with room for the block and h_1
    let mut found = None;
    for l in 2..=sched.len() {
        let d = sched.shape(l)?;
        if d.cardinality() > Int::from(MATERIALIZE_LIMIT) {
            return Err(Error::SizeBound(format!(
                "S'_{l} exceeds {MATERIALIZE_LIMIT} cells before l_1 was found"
            )));
        }
        let centers = tile_centers(params, &d)?;
        if Int::from(centers.len()) <= r1_int {
            continue;
        }
        let r1u = r1.to_usize().unwrap();
        let i0 = centers
            .iter()
            .position(|c| c.is_zero())
            .expect("identity tile");
        let start = i0.saturating_sub(r1u - 1);
        if start + r1u < centers.len() {
            found = Some((
                l,
                centers[start..start + r1u].to_vec(),
                centers[start + r1u].clone(),
            ));
            break;
        }
    }
    let (l1, r1_centers, h1) =
        found.ok_or_else(|| Error::Capacity("no schedule level can host R_1 and h_1".into()))?;
    let (d_lo, d_hi) = bounds(&sched.shape(l1)?);

    // w_1' on D
    let mut w1_prime = build_w1(&d_lo, &d_hi)?;
    for (r, c) in r1_centers.iter().enumerate() {
        let digits = base_digits(&Int::from(r), &base1, stars1);
        let mut j = 0;
        for cell in s1.iter() {
            let g = c + cell.value();
            if w1_prime.at(&g).is_star() {
                w1_prime.set(&g, SymbolValue::Point(net1.point_at(&digits[j])?));
                j += 1;
            }
        }
    }

    if depth == 1 {
        let limit = w1_prime.restrict(&s1_lo, &s1_hi);
        return Ok(MaterializedWords {
            depth,
            a_cells,
            l1,
            r1_centers,
            h1,
            w1: w1_on_s1.restrict(&s1_lo, &s1_hi),
            w1_prime: w1_prime.restrict(&d_lo, &d_hi),
            m1: None,
            v1: None,
            limit,
        });
    }

    // m_1: requirement (1), (3), then run the greedy conversion and keep the
    // first level where it reaches the target without breaking a floor
    let g1 = GroupId::Z.enumerate(&BigUint::one())?.value().clone();
    let mut chosen = None;
    for m in (l1 + 1)..=sched.len() {
        let sm = sched.shape(m)?;
        let (lo, hi) = bounds(&sm);
        if !(lo <= &g1 + &h1 && &g1 + &h1 <= hi) {
            continue;
        }
        if sm.cardinality() > Int::from(MATERIALIZE_LIMIT) {
            return Err(Error::SizeBound(format!(
                "S_2 candidate at level {m} exceeds {MATERIALIZE_LIMIT} cells"
            )));
        }
        let w1 = build_w1(&lo, &hi)?;
        let total_cells = sm.cardinality();
        let mut outside_stars = 0usize;
        let mut g = lo.clone();
        while g <= hi {
            if (g < d_lo || g > d_hi) && w1.at(&g).is_star() {
                outside_stars += 1;
            }
            g += 1;
        }
        if Rational::from_integer(Int::from(outside_stars))
            <= rho * Rational::from_integer(total_cells.clone())
        {
            continue;
        }
        let mut v1 = Word {
            lo: lo.clone(),
            cells: w1.cells.clone(),
        };
        let mut g = d_lo.clone();
        while g <= d_hi {
            v1.set(&g, w1_prime.at(&g).clone());
            g += 1;
        }
        let target = floor_mul(rho, &total_cells).to_usize().unwrap() + 1;
        let mut total = v1.stars_in(&lo, &hi);
        if total < target {
            continue;
        }
        for c in tile_centers(params, &sm)? {
            if total == target {
                break;
            }
            if c >= d_lo && c <= d_hi {
                continue;
            }
            let mut tile_stars = v1.stars_in(&(&c + &s1_lo), &(&c + &s1_hi));
            for cell in s1.iter() {
                if total == target || tile_stars <= floor1 {
                    break;
                }
                let g = &c + cell.value();
                if v1.at(&g).is_star() {
                    v1.set(&g, SymbolValue::Hash);
                    tile_stars -= 1;
                    total -= 1;
                }
            }
        }
        if total == target {
            chosen = Some((m, w1, v1));
            break;
        }
    }
    let (m1, w1, v1) = chosen.ok_or_else(|| {
        Error::Capacity("no schedule level satisfies the second-step requirements".into())
    })?;
    let (s2_lo, s2_hi) = bounds(&sched.shape(m1)?);

    // the limit on S_2: the identity tile of T_2 sits in the R_2 block at index r0
    let lp2 = plan.level(2)?;
    let sub2 = lp2
        .substitution
        .as_ref()
        .ok_or_else(|| Error::Depth("plan has no R_2 block".into()))?;
    let r0 = (-&sub2.r_start) / &lp2.size;
    let net2 = &params.nets[1];
    let stars2 = v1.stars_in(&s2_lo, &s2_hi);
    let digits = base_digits(&r0, &net2.size(), stars2);
    let mut limit = Word {
        lo: v1.lo.clone(),
        cells: v1.cells.clone(),
    };
    let mut j = 0;
    let mut g = s2_lo.clone();
    while g <= s2_hi {
        if limit.at(&g).is_star() {
            limit.set(&g, SymbolValue::Point(net2.point_at(&digits[j])?));
            j += 1;
        }
        g += 1;
    }

    Ok(MaterializedWords {
        depth,
        a_cells,
        l1,
        r1_centers,
        h1,
        w1: w1.restrict(&s2_lo, &s2_hi),
        w1_prime: w1_prime.restrict(&d_lo, &d_hi),
        m1: Some(m1),
        v1: Some(v1.restrict(&s2_lo, &s2_hi)),
        limit: limit.restrict(&s2_lo, &s2_hi),
    })
}
