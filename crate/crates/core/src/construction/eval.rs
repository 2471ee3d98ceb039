use std::collections::HashMap;
use std::sync::RwLock;

use num::{BigUint, Integer, One, Signed, ToPrimitive, Zero};

use super::{digit, plan, ConstructionParams, LevelPlan, Plan, SymbolValue};
use crate::group::{FiniteSubset, GroupElement, GroupId};
use crate::polyhedron::Point;
use crate::{Error, Int, Result};

/// Params plus plan, evaluated on demand. Caches are write-once maps: a key
/// is only ever inserted with the value every other thread would compute.
#[derive(Debug)]
pub struct LazyConfiguration {
    params: ConstructionParams,
    plan: Plan,
    star_rank: RwLock<HashMap<(usize, Int), Int>>,
    values: RwLock<HashMap<Int, SymbolValue>>,
}

fn clamp(v: Int, lo: &Int, hi: &Int) -> Int {
    v.max(lo.clone()).min(hi.clone())
}

impl LazyConfiguration {
    pub fn new(params: ConstructionParams) -> Result<Self> {
        let plan = plan(&params)?;
        Ok(LazyConfiguration {
            params,
            plan,
            star_rank: RwLock::default(),
            values: RwLock::default(),
        })
    }

    pub fn params(&self) -> &ConstructionParams {
        &self.params
    }

    pub fn plan(&self) -> &Plan {
        &self.plan
    }

    fn lp(&self, n: usize) -> Result<&LevelPlan> {
        self.plan.level(n)
    }

    /// Center of the `T_n` tile containing `g`.
    pub fn center(&self, n: usize, g: &Int) -> Result<Int> {
        let lp = self.lp(n)?;
        Ok((g + &lp.alpha).div_floor(&lp.size) * &lp.size)
    }

    fn net_point(&self, n: usize, index: &BigUint) -> Result<Point> {
        self.params.nets[n - 1].point_at(index)
    }

    /// `w_n(g)` for `1 <= n <= depth`.
    pub fn w_level(&self, n: usize, g: &Int) -> Result<SymbolValue> {
        let lp = self.lp(n)?;
        if n == 1 {
            let p = g - self.center(1, g)?;
            return Ok(if &p + &lp.alpha < self.plan.a_count {
                SymbolValue::Star
            } else {
                SymbolValue::Hash
            });
        }
        let p = g - self.center(n, g)?;
        self.v_word(n - 1, &p)
    }

    /// `w'_n(g)` on `S'_{l_n}` placed at the identity.
    pub fn w_prime(&self, n: usize, g: &Int) -> Result<SymbolValue> {
        let lp = self.lp(n)?;
        let sub = lp.sub()?;
        if g < &sub.d_lo || g > &sub.d_hi {
            return Err(Error::OutOfSupport(format!(
                "{g} is outside S'_{{l_{n}}} = [{}, {}]",
                sub.d_lo, sub.d_hi
            )));
        }
        let base = self.w_level(n, g)?;
        if !base.is_star() {
            return Ok(base);
        }
        let tc = self.center(n, g)?;
        let di = (&tc - (&sub.d_lo + &lp.alpha)) / &lp.size;
        let r = &di - &sub.r_offset;
        if r.is_negative() || r >= sub.r_size {
            return Ok(SymbolValue::Star);
        }
        let j = self.stars_before(n, &(g - &tc))?;
        let idx = digit(&r, &sub.net_size, &j);
        Ok(SymbolValue::Point(self.net_point(n, &idx)?))
    }

    /// `v_k` at `p` relative to a `T_{k+1}` tile center.
    pub fn v_word(&self, k: usize, p: &Int) -> Result<SymbolValue> {
        let lp = self.lp(k)?;
        let sub = lp.sub()?;
        let conv = lp.conv()?;
        if &sub.d_lo <= p && p <= &sub.d_hi {
            return self.w_prime(k, p);
        }
        let base = self.w_level(k, p)?;
        if !base.is_star() {
            return Ok(base);
        }
        let next = self.lp(k + 1)?;
        let tc = self.center(k, p)?;
        let idx = (&tc - (-&next.alpha + &lp.alpha)) / &lp.size;
        let t = if idx < conv.d_offset {
            idx
        } else {
            idx - &sub.d_tiles
        };
        let converted = self.conversions_in(k, &t)?;
        let j = self.stars_before(k, &(p - &tc))?;
        Ok(if j < converted {
            SymbolValue::Hash
        } else {
            SymbolValue::Star
        })
    }

    /// `*` to `#` conversions in the `t`-th outside tile of step `k`.
    fn conversions_in(&self, k: usize, t: &Int) -> Result<Int> {
        let conv = self.lp(k)?.conv()?;
        Ok(clamp(
            &conv.conversions - t * &conv.allow,
            &Int::zero(),
            &conv.allow,
        ))
    }

    /// Stars of `w_n` strictly before relative position `p` in a `T_n` tile.
    pub fn stars_before(&self, n: usize, p: &Int) -> Result<Int> {
        let key = (n, p.clone());
        if let Some(v) = self.star_rank.read().expect("cache lock").get(&key) {
            return Ok(v.clone());
        }
        let v = self.stars_before_uncached(n, p)?;
        self.star_rank
            .write()
            .expect("cache lock")
            .entry(key)
            .or_insert_with(|| v.clone());
        Ok(v)
    }

    fn stars_before_uncached(&self, n: usize, p: &Int) -> Result<Int> {
        let lp = self.lp(n)?;
        let off = p + &lp.alpha;
        if n == 1 {
            return Ok(clamp(off, &Int::zero(), &self.plan.a_count));
        }
        let prev = self.lp(n - 1)?;
        let sub = prev.sub()?;
        let conv = prev.conv()?;
        let off = clamp(off, &Int::zero(), &lp.size);
        let (full, rem) = off.div_rem(&prev.size);
        let d_before = clamp(&full - &conv.d_offset, &Int::zero(), &sub.d_tiles);
        let r_before = clamp(&d_before - &sub.r_offset, &Int::zero(), &sub.r_size);
        let t_before = &full - &d_before;
        let converted = (&t_before * &conv.allow).min(conv.conversions.clone());
        let mut total = (&d_before - &r_before + &t_before) * &prev.stars - converted;
        if !rem.is_zero() {
            let partial = self.stars_before(n - 1, &(-&prev.alpha + &rem))?;
            let di = &full - &conv.d_offset;
            if !di.is_negative() && di < sub.d_tiles {
                let r = &di - &sub.r_offset;
                if r.is_negative() || r >= sub.r_size {
                    total += partial;
                }
            } else {
                let t = if full < conv.d_offset {
                    full
                } else {
                    full - &sub.d_tiles
                };
                let c = self.conversions_in(n - 1, &t)?;
                total += (partial - c).max(Int::zero());
            }
        }
        Ok(total)
    }

    /// The limit `w(g)`: the first non-star among `w_1(g), ..., w_depth(g)`,
    /// then `w'_depth(g)` if planned. Non-star values never change later.
    pub fn eval_w(&self, g: &GroupElement) -> Result<SymbolValue> {
        if g.group() != GroupId::Z {
            return Err(Error::Unsupported(
                "the construction evaluates Z only".into(),
            ));
        }
        let g = g.value();
        if let Some(v) = self.values.read().expect("cache lock").get(g) {
            return Ok(v.clone());
        }
        let v = self.eval_w_uncached(g)?;
        self.values
            .write()
            .expect("cache lock")
            .entry(g.clone())
            .or_insert_with(|| v.clone());
        Ok(v)
    }

    fn eval_w_uncached(&self, g: &Int) -> Result<SymbolValue> {
        for n in 1..=self.plan.depth {
            let v = self.w_level(n, g)?;
            if !v.is_star() {
                return Ok(v);
            }
        }
        let top = self.lp(self.plan.depth)?;
        if let Some(sub) = &top.substitution {
            if &sub.d_lo <= g && g <= &sub.d_hi {
                let v = self.w_prime(self.plan.depth, g)?;
                if !v.is_star() {
                    return Ok(v);
                }
            }
        }
        Err(Error::Depth(format!(
            "{g} is still * after depth {}; increase the depth",
            self.plan.depth
        )))
    }

    /// `x(g)`: `#` becomes the basepoint of `P`.
    pub fn eval_x(&self, g: &GroupElement) -> Result<Point> {
        match self.eval_w(g)? {
            SymbolValue::Point(p) => Ok(p),
            SymbolValue::Hash => Ok(self.params.polyhedron.basepoint()),
            SymbolValue::Star => unreachable!("eval_w never returns *"),
        }
    }

    pub fn window_w(&self, w: &FiniteSubset) -> Result<Vec<(GroupElement, SymbolValue)>> {
        w.elements()?
            .into_iter()
            .map(|g| Ok((g.clone(), self.eval_w(&g)?)))
            .collect()
    }

    pub fn window_x(&self, w: &FiniteSubset) -> Result<Vec<(GroupElement, Point)>> {
        w.elements()?
            .into_iter()
            .map(|g| Ok((g.clone(), self.eval_x(&g)?)))
            .collect()
    }

    /// `S_n` as a subset of `Z`.
    pub fn shape(&self, n: usize) -> Result<FiniteSubset> {
        let lp = self.lp(n)?;
        Ok(FiniteSubset::interval(-lp.alpha.clone(), lp.beta.clone()))
    }

    /// Center of the `r`-th tile of the `R_n` block.
    pub fn r_center(&self, n: usize, r: &Int) -> Result<Int> {
        let lp = self.lp(n)?;
        let sub = lp.sub()?;
        if r.is_negative() || r >= &sub.r_size {
            return Err(Error::Argument(format!("block index {r} out of range")));
        }
        Ok(&sub.r_start + r * &lp.size)
    }

    /// Relative positions of the stars of `w_n` in a `T_n` tile, in order.
    /// Only for tiles small enough to scan.
    pub fn star_positions(&self, n: usize) -> Result<Vec<Int>> {
        let lp = self.lp(n)?;
        let len = lp
            .size
            .to_u64()
            .filter(|v| *v <= crate::group::ENUMERATION_LIMIT)
            .ok_or_else(|| {
                Error::SizeBound(format!("|S_{n}| = {} is too large to scan", lp.size))
            })?;
        let mut out = Vec::new();
        for i in 0..len {
            let p = -&lp.alpha + Int::from(i);
            if self.w_level(n, &p)?.is_star() {
                out.push(p);
            }
        }
        Ok(out)
    }

    /// The `R_n` center whose substituted stars spell `assignment`.
    pub fn realization_decode(&self, n: usize, assignment: &[Point]) -> Result<GroupElement> {
        let lp = self.lp(n)?;
        let sub = lp.sub()?;
        if Int::from(assignment.len()) != lp.stars {
            return Err(Error::Argument(format!(
                "assignment has {} entries, level {n} has {} stars per tile",
                assignment.len(),
                lp.stars
            )));
        }
        let net = &self.params.nets[n - 1];
        let base = Int::from(net.size());
        let mut r = Int::zero();
        let mut scale = Int::one();
        for p in assignment {
            let d = net
                .index_of(p)
                .ok_or_else(|| Error::Argument(format!("{p:?} is not a point of net {n}")))?;
            r += Int::from(d) * &scale;
            scale *= &base;
        }
        if r >= sub.r_size {
            return Err(Error::NotRealized(format!(
                "assignment index {r} is beyond the truncated block of {} (capped mode)",
                sub.r_size
            )));
        }
        Ok(GroupElement::z(self.r_center(n, &r)?))
    }
}
