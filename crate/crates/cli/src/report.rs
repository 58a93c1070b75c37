//! Text and JSON renderings of command results.

use serde_json::{json, Value};

use sdorder::oracle::AgreementReport;
use sdorder::utility::{InconclusiveReason, Violation};
use sdorder::{ExclusionVerdict, GreedinessProfile, MemberReason, MembershipVerdict, Verdict};

/// JSON number, or `"inf"`, `"-inf"`, `"nan"` for non-finite values.
pub fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v.is_nan() {
        json!("nan")
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn txt(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Margins carry twelve significant digits in text output.
pub fn margin_txt(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.11e}")
    } else {
        txt(v)
    }
}

fn opt(v: Option<f64>) -> Value {
    v.map_or(Value::Null, num)
}

pub fn verdict_json(v: &Verdict) -> Value {
    let diagnostics: Vec<Value> =
        v.diagnostics.iter().map(|d| json!({"t": num(d.t), "lhs": num(d.lhs), "rhs": num(d.rhs)})).collect();
    json!({
        "order": v.order.tag(),
        "holds": v.holds,
        "witness_t": opt(v.witness_t),
        "margin": num(v.margin),
        "diagnostics": diagnostics,
    })
}

pub fn verdict_text(v: &Verdict) -> String {
    let mut s = format!(
        "order: {}\nholds: {}\nwitness_t: {}\nmargin: {}\ndiagnostics (t lhs rhs):\n",
        v.order,
        v.holds,
        v.witness_t.map_or("none".into(), txt),
        margin_txt(v.margin)
    );
    for d in &v.diagnostics {
        s.push_str(&format!("  {} {} {}\n", txt(d.t), txt(d.lhs), txt(d.rhs)));
    }
    s
}

fn violation_json(v: &Violation) -> Value {
    json!({
        "x_segment": v.x_segment,
        "y_segment": v.y_segment,
        "x": num(v.x),
        "y": num(v.y),
        "lhs": num(v.lhs),
        "rhs": num(v.rhs),
    })
}

pub fn membership_json(m: &MembershipVerdict) -> Value {
    json!({"member": m.member, "violation": m.violation.as_ref().map_or(Value::Null, violation_json)})
}

fn reason_json(r: &MemberReason) -> Value {
    match r {
        MemberReason::Concave => json!({"reason": "Concave"}),
        MemberReason::FractionalUpper => json!({"reason": "FractionalUpper"}),
        MemberReason::BaseClass { t } => json!({"reason": "BaseClass", "t": num(*t)}),
    }
}

pub fn exclusion_json(e: &ExclusionVerdict) -> Value {
    match e {
        ExclusionVerdict::MemberByConstruction(r) => {
            let mut v = json!({"verdict": "MemberByConstruction"});
            v.as_object_mut().unwrap().extend(reason_json(r).as_object().unwrap().clone());
            v
        }
        ExclusionVerdict::ExcludedByStrictIncrease { x0, z } => {
            json!({"verdict": "ExcludedByStrictIncrease", "x0": num(*x0), "z": num(*z)})
        }
        ExclusionVerdict::ExcludedByTwoTouches { x0, x1 } => {
            json!({"verdict": "ExcludedByTwoTouches", "x0": num(*x0), "x1": num(*x1)})
        }
        ExclusionVerdict::Inconclusive(InconclusiveReason::NotInDpm(v)) => {
            json!({"verdict": "Inconclusive", "reason": "NotInDpm", "violation": violation_json(v)})
        }
        ExclusionVerdict::Inconclusive(InconclusiveReason::NoCriterionFired) => {
            json!({"verdict": "Inconclusive", "reason": "NoCriterionFired"})
        }
    }
}

pub fn exclusion_text(e: &ExclusionVerdict) -> String {
    match e {
        ExclusionVerdict::MemberByConstruction(MemberReason::BaseClass { t }) => {
            format!("MemberByConstruction (BaseClass, t = {})", txt(*t))
        }
        ExclusionVerdict::MemberByConstruction(r) => format!("MemberByConstruction ({r:?})"),
        ExclusionVerdict::ExcludedByStrictIncrease { x0, z } => {
            format!("ExcludedByStrictIncrease (x0 = {}, z = {})", txt(*x0), txt(*z))
        }
        ExclusionVerdict::ExcludedByTwoTouches { x0, x1 } => {
            format!("ExcludedByTwoTouches (x0 = {}, x1 = {})", txt(*x0), txt(*x1))
        }
        ExclusionVerdict::Inconclusive(InconclusiveReason::NotInDpm(_)) => "Inconclusive (NotInDpm)".into(),
        ExclusionVerdict::Inconclusive(InconclusiveReason::NoCriterionFired) => "Inconclusive (NoCriterionFired)".into(),
    }
}

pub fn profile_json(p: &GreedinessProfile) -> Value {
    json!({
        "knots": p.knots().iter().map(|&k| num(k)).collect::<Vec<_>>(),
        "values": p.values().iter().map(|&v| num(v)).collect::<Vec<_>>(),
        "global": num(p.global()),
        "constant_initial_segment": p.constant_initial_segment(),
    })
}

pub fn profile_text(p: &GreedinessProfile) -> String {
    let mut s = format!("global greediness: {}\nprofile (from value):\n", txt(p.global()));
    let starts = std::iter::once("-inf".to_string()).chain(p.knots().iter().map(|&k| txt(k)));
    for (from, &v) in starts.zip(p.values()) {
        s.push_str(&format!("  {from} {}\n", txt(v)));
    }
    if p.constant_initial_segment() {
        s.push_str("note: the utility is flat on its first segment\n");
    }
    s
}

pub fn agreement_json(r: &AgreementReport, violating: Value) -> Value {
    json!({
        "order": r.verdict.order.tag(),
        "agree": r.agree,
        "samples": r.tested,
        "min_gap": num(r.min_gap),
        "witness_gap": opt(r.witness_gap),
        "summary": r.summary(),
        "verdict": verdict_json(&r.verdict),
        "violating": violating,
    })
}

pub fn agreement_text(r: &AgreementReport) -> String {
    format!(
        "order: {}\nagree: {}\nsamples: {}\nmin_gap: {}\nwitness_gap: {}\nsummary: {}\nholds: {}\nmargin: {}\n",
        r.verdict.order,
        r.agree,
        r.tested,
        margin_txt(r.min_gap),
        r.witness_gap.map_or("none".into(), margin_txt),
        r.summary(),
        r.verdict.holds,
        margin_txt(r.verdict.margin)
    )
}
