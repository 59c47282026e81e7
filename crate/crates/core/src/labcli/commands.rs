use serde_json::{json, Value};

use super::document::{carpet_document, circle_label, parse_circle, result_document};
use super::oracle::run_oracle_suite;
use super::render::{
    render_carpet, render_distribution, render_heat_map, render_square_sides, RenderKind, RenderSpec,
};
use super::{
    Cli, Command, DimensionArgs, FamilyArg, GenArgs, GroupArg, Lemma74Args, ModulusArgs, OracleArgs,
    OrbitArgs, Outcome, RegionArg, RenderArgs, RenderWhat, ScalingArgs, StripArgs, TableArgs,
};
use crate::carpet::{
    build_carpet, conformal_dim_lower_bound, dimension_distinguishable, hausdorff_dimension,
    is_corner_square, orbit_of_point, orbits, Carpet, CarpetSpec, GroupKind, Isometry, Point,
    TangentAngle,
};
use crate::modulus::{
    compute_group_modulus, compute_modulus, distinguished_pair_table, lemma74_check,
    scaling_law_check, serial_law_check, synthesize_square_sides, GroupMode, ModulusResult,
    SolverOptions, Status, TANGENT_LEVELS,
};
use crate::pathgrid::{GridDomain, PathFamilySpec, StripKind};
use crate::{Error, Rational, Result};

/// Runs the command without writing anything.
pub fn execute(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Gen(a) => gen(a, cli.render),
        Command::Modulus(a) => modulus(a, cli.render),
        Command::Lemma51(a) => lemma51(a),
        Command::ScalingLaw(a) => scaling_law(a),
        Command::SerialLaw(a) => serial_law(a),
        Command::Lemma74(a) => lemma74(a),
        Command::Orbits(a) => orbit_report(a),
        Command::Dimensions(a) => dimensions(a),
        Command::OracleSuite(a) => oracle_suite(a, cli.seed),
        Command::Render(a) => render(a),
    }
}

fn outcome(stem: String, doc: Value) -> Outcome {
    Outcome {
        stem,
        doc,
        verdict: None,
        converged: true,
        svgs: Vec::new(),
        summary: Vec::new(),
        pin_paths: Vec::new(),
    }
}

fn region_spec(p: u32, generation: u32, region: RegionArg, levels: u32) -> CarpetSpec {
    let angle = match region {
        RegionArg::Unit => return CarpetSpec::unit_square(p, generation),
        RegionArg::Quarter => TangentAngle::Quarter,
        RegionArg::Half => TangentAngle::Half,
        RegionArg::ThreeQuarter => TangentAngle::ThreeQuarter,
    };
    CarpetSpec::weak_tangent(p, generation, angle, levels)
}

fn region_name(region: RegionArg) -> &'static str {
    match region {
        RegionArg::Unit => "unit",
        RegionArg::Quarter => "quarter",
        RegionArg::Half => "half",
        RegionArg::ThreeQuarter => "three_quarter",
    }
}

fn gen(a: &GenArgs, render: bool) -> Result<Outcome> {
    let carpet = build_carpet(region_spec(a.p, a.generation, a.region, a.levels))?;
    let stem = format!("carpet_p{}_g{}_{}", a.p, a.generation, region_name(a.region));
    let mut o = outcome(stem.clone(), carpet_document(&carpet));
    o.summary.push(format!(
        "carpet p={} generation={} region={}: {} circles",
        a.p,
        a.generation,
        region_name(a.region),
        carpet.len()
    ));
    if render {
        o.svgs.push((format!("{stem}.svg"), render_carpet(&carpet, &RenderSpec::default())));
    }
    o.pin_paths = vec!["/circle_count".into()];
    Ok(o)
}

fn sanitize(s: &str) -> String {
    let mut out = String::new();
    for ch in s.chars() {
        if ch.is_ascii_alphanumeric() || ch == '.' {
            out.push(ch);
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    out.trim_matches('_').to_string()
}

fn value_line(r: &ModulusResult<f64>) -> String {
    format!(
        "value {:.10} bracket [{:.10}, {:.10}] status {:?} iterations {} (circles {:.6}, continuous {:.6})",
        r.value, r.bracket.0, r.bracket.1, r.status, r.iterations, r.circle_mass.max(0.0) + 0.0, r.continuous_mass
    )
}

struct Solved {
    carpet: Option<Carpet>,
    grid: GridDomain<f64>,
    result: ModulusResult<f64>,
    opts: SolverOptions<f64>,
}

fn solve_family(a: &ModulusArgs) -> Result<Solved> {
    let group = |default: GroupArg| -> Result<GroupMode> {
        Ok(match a.group.unwrap_or(default) {
            GroupArg::Trivial => GroupMode::Trivial,
            GroupArg::Dihedral => GroupMode::Dihedral,
            GroupArg::Scaling => GroupMode::Scaling { k: a.k },
        })
    };
    match a.family {
        FamilyArg::Pair => {
            let g = a.gen.unwrap_or(3);
            let carpet = build_carpet(CarpetSpec::unit_square(a.p, g))?;
            let ids = a.pair.iter().map(|l| parse_circle(&carpet, l)).collect::<Result<Vec<_>>>()?;
            let family = PathFamilySpec::ConnectCircles { a: ids[0], b: ids[1] };
            let opts = a.solver.options(group(GroupArg::Trivial)?);
            let (grid, result) = compute_modulus(Some(&carpet), family, a.resolution.unwrap_or(g as usize), &opts)?;
            Ok(Solved { carpet: Some(carpet), grid, result, opts })
        }
        FamilyArg::Rect | FamilyArg::Annulus => {
            let family = if a.family == FamilyArg::Rect {
                PathFamilySpec::VerticalSegments { width: a.a }
            } else {
                PathFamilySpec::RadialSegments { ratio: a.ratio }
            };
            let opts = a.solver.options(group(GroupArg::Trivial)?);
            let (grid, result) = compute_modulus(None, family, a.resolution.unwrap_or(64), &opts)?;
            Ok(Solved { carpet: None, grid, result, opts })
        }
        FamilyArg::Quarter | FamilyArg::ThreeQuarter => {
            let (angle, strip) = if a.family == FamilyArg::Quarter {
                (TangentAngle::Quarter, StripKind::Quarter)
            } else {
                (TangentAngle::ThreeQuarter, StripKind::ThreeQuarter)
            };
            let g = a.gen.unwrap_or(crate::modulus::TANGENT_GENERATION);
            let carpet = build_carpet(CarpetSpec::weak_tangent(a.p, g, angle, TANGENT_LEVELS))?;
            let opts = a.solver.options(group(GroupArg::Scaling)?);
            let family = PathFamilySpec::quotient(strip, a.k);
            let (grid, result) = compute_group_modulus(&carpet, family, a.resolution.unwrap_or(18), &opts)?;
            Ok(Solved { carpet: Some(carpet), grid, result, opts })
        }
    }
}

fn converged(status: Status) -> bool {
    status != Status::IterationLimit
}

fn modulus(a: &ModulusArgs, render: bool) -> Result<Outcome> {
    let s = solve_family(a)?;
    let doc = result_document(s.carpet.as_ref(), &s.grid, &s.result, &s.opts);
    let stem = match s.carpet {
        Some(_) => format!("modulus_{}_p{}_r{}", sanitize(&s.result.family.name()), a.p, s.result.resolution),
        None => format!("modulus_{}_r{}", sanitize(&s.result.family.name()), s.result.resolution),
    };
    let mut o = outcome(stem.clone(), doc);
    o.converged = converged(s.result.status);
    o.summary.push(format!("{} on {} cells", s.result.family.name(), s.grid.num_cells()));
    o.summary.push(value_line(&s.result));
    if render {
        o.svgs = distribution_svgs(&stem, &s, &RenderSpec::default())?;
    }
    o.pin_paths = vec!["/value".into(), "/status".into()];
    Ok(o)
}

fn distribution_svgs(stem: &str, s: &Solved, spec: &RenderSpec) -> Result<Vec<(String, String)>> {
    let mut svgs = Vec::new();
    if let (Some(carpet), PathFamilySpec::ConnectCircles { .. }) = (&s.carpet, s.result.family) {
        svgs.push((format!("{stem}_heat.svg"), render_heat_map(carpet, &s.grid, &s.result, spec)));
    }
    let cells = RenderSpec { kind: RenderKind::WitnessPath, ..*spec };
    svgs.push((format!("{stem}_witness.svg"), render_distribution(&s.grid, &s.result, &cells)));
    if s.result.is_converged() && matches!(s.result.family, PathFamilySpec::ConnectCircles { .. }) {
        if let Ok(sides) = synthesize_square_sides(&s.grid, &s.result) {
            svgs.push((format!("{stem}_sides.svg"), render_square_sides(&sides, spec)));
        }
    }
    Ok(svgs)
}

fn lemma51(a: &TableArgs) -> Result<Outcome> {
    let opts = a.solver.options(GroupMode::Trivial);
    let table = distinguished_pair_table(a.p, a.gen, a.resolution, &opts)?;
    let mut o = outcome(format!("lemma51_p{}_g{}_m{}", a.p, a.gen, a.resolution), serde_json::to_value(&table)?);
    o.converged = table.all_converged;
    o.verdict = table.verdict;
    for (i, r) in table.rows.iter().enumerate() {
        let mark = if i == table.distinguished { " *" } else { "" };
        o.summary.push(format!(
            "{:>8} {:>8}  orbit {}  value {:.8}  bracket [{:.8}, {:.8}]  {:?}{mark}",
            r.label_a, r.label_b, r.orbit_size, r.result.value, r.result.bracket.0, r.result.bracket.1, r.result.status
        ));
    }
    o.summary.push(format!("margin {:.8} verdict {:?}", table.margin, table.verdict));
    o.pin_paths = vec!["/verdict".into(), "/margin".into()];
    o.pin_paths.extend((0..table.rows.len()).map(|i| format!("/rows/{i}/result/value")));
    Ok(o)
}

fn strip_opts(s: &StripArgs) -> SolverOptions<f64> {
    s.solver.options(GroupMode::Trivial)
}

fn scaling_law(a: &ScalingArgs) -> Result<Outcome> {
    let s = &a.strip;
    let r = scaling_law_check(s.p, a.k, s.rows, s.gen, &strip_opts(s))?;
    let mut o = outcome(format!("scaling_law_p{}_k{}_r{}", s.p, a.k, s.rows), serde_json::to_value(&r)?);
    o.converged = converged(r.base.status) && converged(r.scaled.status);
    o.verdict = Some(r.holds);
    o.summary.push(format!(
        "k={} ratio {:.10} band [{:.3}, {:.3}] holds {}",
        a.k, r.ratio, r.band.0, r.band.1, r.holds
    ));
    o.pin_paths = vec!["/ratio".into(), "/holds".into(), "/base/value".into()];
    Ok(o)
}

fn serial_law(s: &StripArgs) -> Result<Outcome> {
    let r = serial_law_check(s.p, s.rows, s.gen, &strip_opts(s))?;
    let mut o = outcome(format!("serial_law_p{}_r{}", s.p, s.rows), serde_json::to_value(&r)?);
    o.converged = converged(r.quarter.status) && converged(r.three_quarter.status);
    o.verdict = Some(r.holds);
    o.summary.push(format!(
        "three-quarter {:.10} <= quarter/3 {:.10} x (1 + {}): {}",
        r.lhs, r.rhs, r.eps_report, r.holds
    ));
    o.pin_paths = vec!["/lhs".into(), "/rhs".into(), "/holds".into()];
    Ok(o)
}

fn lemma74(a: &Lemma74Args) -> Result<Outcome> {
    let s = &a.strip;
    let r = lemma74_check(s.p, s.rows, s.gen, &strip_opts(s), a.min_length)?;
    let mut doc = serde_json::to_value(&r)?;
    let holds = r.positive && r.bounded && r.admissible;
    doc["holds"] = json!(holds);
    let mut o = outcome(format!("lemma74_p{}_r{}", s.p, s.rows), doc);
    o.converged = converged(r.quotient.status);
    o.verdict = Some(holds);
    o.summary.push(format!(
        "0 < {:.10} <= angle mass {:.10}; angle density min length {:.6} (floor {})",
        r.quotient.value, r.angle_mass, r.angle_min_length, a.min_length
    ));
    o.pin_paths = vec!["/quotient/value".into(), "/angle_mass".into(), "/holds".into()];
    Ok(o)
}

fn frac(r: &Rational) -> Value {
    json!([r.numer(), r.denom()])
}

fn point_orbit(name: &str, z: Point) -> Result<Value> {
    let orbit = orbit_of_point(z)?;
    Ok(json!({
        "name": name,
        "point": [frac(&z.0), frac(&z.1)],
        "size": orbit.len(),
        "orbit": orbit.iter().map(|(x, y)| json!([frac(x), frac(y)])).collect::<Vec<_>>(),
    }))
}

fn orbit_report(a: &OrbitArgs) -> Result<Outcome> {
    let carpet = build_carpet(CarpetSpec::unit_square(a.p, a.gen))?;
    let part = orbits(&carpet, GroupKind::Dihedral)?;
    let circle_orbits: Vec<Value> = part
        .orbits
        .iter()
        .map(|orb| {
            json!({
                "representative": circle_label(&carpet, orb.representative),
                "generation": carpet.circles()[orb.representative].generation(),
                "size": orb.size,
                "members": orb.members.iter().map(|&m| circle_label(&carpet, m)).collect::<Vec<_>>(),
            })
        })
        .collect();

    let second: Vec<usize> = carpet.circles().iter().filter(|c| c.generation() == 2).map(|c| c.id).collect();
    let mut corner = Vec::new();
    let mut side = Vec::new();
    for &id in &second {
        if is_corner_square(&carpet, id)? {
            corner.push(id);
        } else {
            side.push(id);
        }
    }
    let orbit_sizes = |ids: &[usize]| -> Vec<usize> {
        let mut seen: Vec<usize> = ids.iter().map(|&i| part.orbit_of(i)).collect();
        seen.sort_unstable();
        seen.dedup();
        seen.iter().map(|&o| part.orbits[o].size).collect()
    };
    let labels = |ids: &[usize]| ids.iter().map(|&i| circle_label(&carpet, i)).collect::<Vec<_>>();

    let p = i64::from(a.p);
    let lo = Rational::new((p - 1) / 2, p);
    let half = Rational::new(1, 2);
    let zero = Rational::from_integer(0);
    let points = vec![
        point_orbit("corner of O", (zero, zero))?,
        point_orbit("corner of M", (lo, lo))?,
        point_orbit("side midpoint m of O", (half, zero))?,
        point_orbit("side midpoint m' of M", (half, lo))?,
        point_orbit("generic boundary point", (Rational::new(1, 2 * p), zero))?,
    ];
    let sizes: Vec<usize> = points.iter().map(|v| v["size"].as_u64().unwrap_or(0) as usize).collect();
    let doc = json!({
        "p": a.p,
        "generation": a.gen,
        "group_order": Isometry::all().len(),
        "circle_count": carpet.len(),
        "circle_orbits": circle_orbits,
        "second_generation": {
            "corner_squares": labels(&corner),
            "side_squares": labels(&side),
            "corner_orbit_sizes": orbit_sizes(&corner),
            "side_orbit_sizes": orbit_sizes(&side),
        },
        "points": points,
    });
    let mut o = outcome(format!("orbits_p{}_g{}", a.p, a.gen), doc);
    o.summary.push(format!("isometry group of order {}", Isometry::all().len()));
    o.summary.push(format!("{} circles in {} dihedral orbits", carpet.len(), part.len()));
    o.summary.push(format!(
        "generation 2: corner squares {:?} (orbits {:?}), side squares {:?} (orbits {:?})",
        labels(&corner),
        orbit_sizes(&corner),
        labels(&side),
        orbit_sizes(&side)
    ));
    o.summary.push(format!(
        "point orbits: corner of O {}, corner of M {}, m {}, m' {}, generic {}",
        sizes[0], sizes[1], sizes[2], sizes[3], sizes[4]
    ));
    o.pin_paths = vec!["/circle_count".into(), "/second_generation".into()];
    Ok(o)
}

fn dimension_row(p: u32, q: u32) -> Result<Value> {
    Ok(json!({
        "p": p,
        "q": q,
        "hausdorff_p": hausdorff_dimension(p)?,
        "lower_bound_p": conformal_dim_lower_bound(p)?,
        "hausdorff_q": hausdorff_dimension(q)?,
        "lower_bound_q": conformal_dim_lower_bound(q)?,
        "distinguishable": dimension_distinguishable(p, q)?,
    }))
}

fn dimensions(a: &DimensionArgs) -> Result<Outcome> {
    let mut doc = dimension_row(a.p, a.q)?;
    if let Some(n) = a.sweep {
        if n < 3 {
            return Err(Error::param("sweep bound must be at least 3"));
        }
        let odd: Vec<u32> = (3..=n).step_by(2).collect();
        let rows = odd
            .iter()
            .flat_map(|&p| odd.iter().map(move |&q| (p, q)))
            .map(|(p, q)| dimension_row(p, q))
            .collect::<Result<Vec<_>>>()?;
        doc["sweep"] = Value::Array(rows);
    }
    let mut o = outcome(format!("dimensions_p{}_q{}", a.p, a.q), doc.clone());
    o.summary.push(format!(
        "S_{}: Hausdorff {:.10}, conformal lower bound {:.10}",
        a.p, doc["hausdorff_p"], doc["lower_bound_p"]
    ));
    o.summary.push(format!(
        "S_{}: Hausdorff {:.10}; distinguishable by dimensions: {}",
        a.q, doc["hausdorff_q"], doc["distinguishable"]
    ));
    o.pin_paths = vec!["/hausdorff_p".into(), "/lower_bound_p".into(), "/distinguishable".into()];
    Ok(o)
}

fn oracle_suite(a: &OracleArgs, seed: u64) -> Result<Outcome> {
    let r = run_oracle_suite(seed, a.count)?;
    let mut o = outcome(format!("oracle_suite_s{seed}_n{}", a.count), serde_json::to_value(&r)?);
    o.verdict = Some(r.passed);
    o.summary.push(format!("{}/{} random instances agree (max difference {:e})", r.agreed, r.count, r.max_difference));
    o.summary.push(format!(
        "corridor fixture: per-entry {} vs exact {}, gap {} ({})",
        r.fixture.search_length,
        r.fixture.exact_length,
        r.fixture.gap,
        if r.fixture.flagged { "flagged" } else { "not flagged" }
    ));
    o.pin_paths = vec!["/agreed".into(), "/fixture/gap".into()];
    Ok(o)
}

fn render(a: &RenderArgs) -> Result<Outcome> {
    let spec = RenderSpec { kind: RenderKind::Carpet, canvas: a.canvas };
    if a.what == RenderWhat::Carpet {
        let carpet = build_carpet(region_spec(a.p, a.gen, a.region, a.levels))?;
        let stem = format!("carpet_p{}_g{}_{}", a.p, a.gen, region_name(a.region));
        let mut o = outcome(stem.clone(), json!({ "rendered": format!("{stem}.svg"), "circles": carpet.len() }));
        o.svgs.push((format!("{stem}.svg"), render_carpet(&carpet, &spec)));
        o.summary.push(format!("carpet with {} circles", carpet.len()));
        return Ok(o);
    }
    let args = ModulusArgs {
        family: FamilyArg::Pair,
        pair: a.pair.clone(),
        p: a.p,
        gen: Some(a.gen),
        resolution: a.resolution,
        a: 1.0,
        ratio: std::f64::consts::E,
        k: 1,
        group: None,
        solver: a.solver.clone(),
    };
    let s = solve_family(&args)?;
    let stem = format!("render_{}_p{}_r{}", sanitize(&s.result.family.name()), a.p, s.result.resolution);
    let carpet = s.carpet.as_ref().expect("pair family has a carpet");
    let (name, svg) = match a.what {
        RenderWhat::HeatMap => (format!("{stem}_heat.svg"), render_heat_map(carpet, &s.grid, &s.result, &spec)),
        RenderWhat::Witness => {
            let cells = RenderSpec { kind: RenderKind::WitnessPath, ..spec };
            (format!("{stem}_witness.svg"), render_distribution(&s.grid, &s.result, &cells))
        }
        RenderWhat::SquareSides => {
            let sides = synthesize_square_sides(&s.grid, &s.result)?;
            (format!("{stem}_sides.svg"), render_square_sides(&sides, &spec))
        }
        RenderWhat::Carpet => unreachable!("handled above"),
    };
    let mut o = outcome(stem, json!({ "rendered": name, "value": s.result.value, "status": s.result.status }));
    o.converged = converged(s.result.status);
    o.summary.push(value_line(&s.result));
    o.svgs.push((name, svg));
    Ok(o)
}
