//! JSON documents for carpets and modulus results.

use serde_json::{json, Value};

use crate::carpet::{Carpet, PeripheralCircle};
use crate::modulus::{GroupMode, ModulusResult, SolverOptions};
use crate::pathgrid::GridDomain;
use crate::{Error, Rational, Real, Result};

/// Printed with every modulus result.
pub const CONTINUOUS_NOTE: &str = "finite values rely on the density on carpet material: \
     with circle weights alone, paths that slip between the finitely many squares have \
     zero length and no distribution is admissible";

fn frac(r: &Rational) -> Value {
    json!([r.numer(), r.denom()])
}

/// Display label of a circle: its tag, its address, or `#id`.
pub fn circle_label(carpet: &Carpet, id: usize) -> String {
    let c = &carpet.circles()[id];
    match (c.tag, &c.address) {
        (Some(t), _) => t.to_string(),
        (None, Some(a)) => a.to_string(),
        (None, None) => format!("#{id}"),
    }
}

/// Resolves `M`, `O`, `#id` or a printed address to a circle id.
pub fn parse_circle(carpet: &Carpet, label: &str) -> Result<usize> {
    if let Some(id) = label.strip_prefix('#') {
        let id: usize = id.parse().map_err(|_| Error::param(format!("bad circle id {label:?}")))?;
        carpet.circle(id)?;
        return Ok(id);
    }
    if let Some(id) = carpet.find_tag(label) {
        return Ok(id);
    }
    let hits: Vec<usize> = carpet
        .circles()
        .iter()
        .filter(|c| c.address.as_ref().is_some_and(|a| a.to_string() == label))
        .map(|c| c.id)
        .collect();
    match hits.as_slice() {
        [id] => Ok(*id),
        [] => Err(Error::param(format!("no circle labelled {label:?}"))),
        _ => Err(Error::param(format!("label {label:?} is ambiguous; use #id"))),
    }
}

fn circle_entry(carpet: &Carpet, c: &PeripheralCircle) -> Value {
    json!({
        "id": c.id,
        "kind": c.kind,
        "tag": c.tag,
        "label": circle_label(carpet, c.id),
        "address": c.address,
        "generation": c.generation(),
        "corner": c.corner.map(|(x, y)| json!([frac(&x), frac(&y)])),
        "side": c.side.as_ref().map(frac),
    })
}

/// `{p, generation, region, circles: [...]}` with exact corners and sides as
/// `[numerator, denominator]` pairs, circles in carpet order.
pub fn carpet_document(carpet: &Carpet) -> Value {
    json!({
        "p": carpet.p(),
        "generation": carpet.generation(),
        "region": carpet.spec().region,
        "circle_count": carpet.len(),
        "circles": carpet.circles().iter().map(|c| circle_entry(carpet, c)).collect::<Vec<_>>(),
    })
}

fn real<T: Real>(x: T) -> Value {
    let x = x.as_f64();
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// Result document of one modulus computation.
pub fn result_document<T: Real>(
    carpet: Option<&Carpet>,
    grid: &GridDomain<T>,
    result: &ModulusResult<T>,
    opts: &SolverOptions<T>,
) -> Value {
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); result.group_weights.len()];
    for (v, &g) in result.var_group.iter().enumerate() {
        if let Some(m) = members.get_mut(g) {
            m.push(grid.variables[v].circle);
        }
    }
    let weights: Vec<Value> = result
        .group_weights
        .iter()
        .zip(&members)
        .enumerate()
        .map(|(g, (&w, circles))| match (result.group, circles.as_slice()) {
            (GroupMode::Trivial, [c]) => json!({
                "circle_id": c,
                "label": carpet.map(|k| circle_label(k, *c)),
                "value": real(w),
            }),
            _ => json!({ "orbit_id": g, "circles": circles, "value": real(w) }),
        })
        .collect();
    let mut doc = json!({
        "family": result.family.name(),
        "family_spec": result.family,
        "p": carpet.map(Carpet::p),
        "generation": carpet.map(Carpet::generation),
        "resolution": result.resolution,
        "cells": grid.num_cells(),
        "group": result.group,
        "continuous": opts.continuous,
        "value": real(result.value),
        "bracket": [real(result.bracket.0), real(result.bracket.1)],
        "mass_split": {
            "circles": real(result.circle_mass),
            "continuous": real(result.continuous_mass),
        },
        "iterations": result.iterations,
        "status": result.status,
        "min_length": real(result.min_length),
        "kkt": real(result.kkt),
        "constraints_generated": result.num_constraints,
        "tolerances": { "tol_feas": real(opts.tol_feas), "tol_qp": real(opts.tol_qp) },
        "weights": weights,
        "note": CONTINUOUS_NOTE,
    });
    if opts.keep_constraints {
        doc["constraints"] = serde_json::to_value(&result.constraints).unwrap_or(Value::Null);
    }
    doc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::carpet::{build_carpet, CarpetSpec};

    #[test]
    fn labels_round_trip() {
        let c = build_carpet(CarpetSpec::unit_square(3, 2)).unwrap();
        for circle in c.circles() {
            let l = circle_label(&c, circle.id);
            assert_eq!(parse_circle(&c, &l).unwrap(), circle.id);
            assert_eq!(parse_circle(&c, &format!("#{}", circle.id)).unwrap(), circle.id);
        }
        assert!(parse_circle(&c, "Q").is_err());
        assert!(parse_circle(&c, "#99").is_err());
    }

    #[test]
    fn carpet_document_shape() {
        let c = build_carpet(CarpetSpec::unit_square(5, 1)).unwrap();
        let d = carpet_document(&c);
        let m = d["circles"].as_array().unwrap().iter().find(|e| e["tag"] == "M").unwrap();
        assert_eq!(m["corner"], json!([[2, 5], [2, 5]]));
        assert_eq!(m["side"], json!([1, 5]));
    }
}
