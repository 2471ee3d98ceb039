//! JSON and plain-text rendering helpers.

use std::fmt::{Display, Write};

use serde::{Serialize, Serializer};

use crate::analysis::{MdimReport, MinimalityReport};
use crate::construction::{Plan, SymbolValue};
use crate::group::GroupElement;
use crate::schedule::{CheckLine, SuiteReport};
use num::ToPrimitive;

use crate::{Error, Rational, Result};

pub fn ser_display<T: Display, S: Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

pub fn ser_display_seq<T: Display, S: Serializer>(
    v: &[T],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

pub fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| Error::Argument(e.to_string()))
}

/// One line for `Z`, one row per second coordinate for `Z^2`.
pub fn window_text(cells: &[(GroupElement, SymbolValue)]) -> String {
    let mut out = String::new();
    let Some((first, _)) = cells.first() else {
        return out;
    };
    if first.coords().len() == 1 {
        let line: Vec<String> = cells.iter().map(|(_, v)| v.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
        return out;
    }
    let mut rows: std::collections::BTreeMap<_, Vec<(&GroupElement, &SymbolValue)>> =
        Default::default();
    for (g, v) in cells {
        rows.entry(g.coords()[1].clone()).or_default().push((g, v));
    }
    for row in rows.values_mut() {
        row.sort_by(|a, b| a.0.coords()[0].cmp(&b.0.coords()[0]));
        let line: Vec<String> = row.iter().map(|(_, v)| v.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct WindowJson {
    cells: Vec<(String, String)>,
}

pub fn window_json(cells: &[(GroupElement, SymbolValue)]) -> Result<String> {
    to_json(&WindowJson {
        cells: cells
            .iter()
            .map(|(g, v)| (g.to_string(), v.to_string()))
            .collect(),
    })
}

pub fn plan_text(plan: &Plan) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "rho {}  depth {}  mode {}  |A| {}",
        plan.rho, plan.depth, plan.mode, plan.a_count
    );
    if plan.approximate {
        let _ = writeln!(
            s,
            "APPROXIMATE: capped block sizes, not the exact construction"
        );
    }
    for lp in &plan.levels {
        let _ = writeln!(
            s,
            "level {}: S = [-{}, {}] (schedule level {}), |S| {}, stars {}, floor {}",
            lp.n, lp.alpha, lp.beta, lp.schedule_level, lp.size, lp.stars, lp.floor
        );
        if let Some(sub) = &lp.substitution {
            let _ = writeln!(
                s,
                "  substitution: l {}, D [{}, {}] ({} tiles), |P| {}, |R| {}{}, R from {}, h {}",
                sub.l_level,
                sub.d_lo,
                sub.d_hi,
                sub.d_tiles,
                sub.net_size,
                abbreviate(&sub.r_size.to_string()),
                if sub.r_exact { "" } else { " (capped)" },
                abbreviate(&sub.r_start.to_string()),
                abbreviate(&sub.h.to_string())
            );
        }
        if let Some(c) = &lp.conversion {
            let _ = writeln!(
                s,
                "  conversion: m {}, stars before {}, target {}, converted {}, per tile {}",
                c.m_level,
                abbreviate(&c.stars_before.to_string()),
                abbreviate(&c.target.to_string()),
                abbreviate(&c.conversions.to_string()),
                c.allow
            );
        }
    }
    s
}

/// Long decimals are shortened for the text view; JSON keeps every digit.
fn abbreviate(d: &str) -> String {
    if d.len() <= 60 {
        return d.to_string();
    }
    format!(
        "{}...{} ({} digits)",
        &d[..20],
        &d[d.len() - 20..],
        d.trim_start_matches('-').len()
    )
}

fn check_line(c: &CheckLine) -> String {
    format!(
        "{} {}: {}",
        if c.pass { "PASS" } else { "FAIL" },
        c.name,
        c.detail
    )
}

pub fn suite_text(r: &SuiteReport) -> String {
    let mut s: String = r.checks.iter().map(|c| check_line(c) + "\n").collect();
    let _ = writeln!(
        s,
        "{}",
        if r.pass {
            "all checks passed"
        } else {
            "verification FAILED"
        }
    );
    s
}

fn short(r: &Rational) -> String {
    let (n, d) = (r.numer().to_string(), r.denom().to_string());
    if n.len() + d.len() <= 40 {
        return r.to_string();
    }
    let approx = r
        .to_f64()
        .map_or_else(|| "?".into(), |f| format!("{f:.12}"));
    format!("~{approx} ({}/{} digits)", n.len(), d.len())
}

pub fn mdim_text(r: &MdimReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "target rho*dim P = {}", r.target);
    let _ = writeln!(
        s,
        "{:>3}  {:>28}  {:>28}  {:>28}  {:>28}",
        "n", "lower", "upper", "envelope", "gap"
    );
    for row in &r.rows {
        let _ = writeln!(
            s,
            "{:>3}  {:>28}  {:>28}  {:>28}  {:>28}",
            row.n,
            short(&row.lower),
            short(&row.upper),
            short(&row.envelope),
            short(&row.gap)
        );
    }
    let _ = writeln!(
        s,
        "bracket [{}, {}], gap {}",
        short(&r.lower),
        short(&r.upper),
        short(&r.gap)
    );
    let _ = writeln!(s, "gap non-increasing: {}", r.gap_nonincreasing);
    if r.approximate {
        let _ = writeln!(s, "APPROXIMATE: capped block sizes");
    }
    for n in &r.notes {
        let _ = writeln!(s, "note: {n}");
    }
    s
}

pub fn minimality_text(r: &MinimalityReport) -> String {
    format!(
        "{} minimality ({}) n={}: {}/{} sampled centers recur, syndetic witness on {} cells: {}\n",
        if r.pass { "PASS" } else { "FAIL" },
        r.label,
        r.n,
        r.matches,
        r.samples,
        r.witness_window_cells,
        r.syndetic
    )
}
