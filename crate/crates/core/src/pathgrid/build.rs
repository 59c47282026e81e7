use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use super::{
    neighbourhood, CellClass, GridDomain, GridSymmetry, PathFamilySpec, PathMode, StripKind,
    TouchKey, Variable,
};
use crate::carpet::{
    apply_symmetry, Carpet, Isometry, Quadrant, Region, SquareAddress, SymmetryElement,
    TangentAngle,
};
use crate::{Error, Real, Result};

/// Largest grid the builders accept.
const MAX_CELLS: usize = 4_000_000;

/// Cell layout of a log-polar strip. Columns run over the angle, rows over
/// `u = log |z|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StripLayout {
    pub rows_per_period: usize,
    /// Columns covering one quarter turn.
    pub quarter_cols: usize,
    pub hu: f64,
    pub htheta: f64,
}

impl StripLayout {
    /// Rows of height `log p / rows_per_period`; the angular size is chosen as
    /// close to the row height as a whole number of columns per quarter allows.
    pub fn new(p: u32, rows_per_period: usize) -> Self {
        let hu = f64::from(p).ln() / rows_per_period as f64;
        let quarter_cols = ((FRAC_PI_2 / hu).round() as usize).max(2);
        StripLayout { rows_per_period, quarter_cols, hu, htheta: FRAC_PI_2 / quarter_cols as f64 }
    }
}

/// Discretises `family` at the given resolution.
///
/// The meaning of `resolution` depends on the family: the exponent `m` of the
/// `p^m × p^m` grid for [`PathFamilySpec::ConnectCircles`], rows per period
/// `log p` for [`PathFamilySpec::AxisToAxis`], and cells across the short side
/// for the segment families (which need no carpet).
pub fn build_grid<T: Real>(
    carpet: Option<&Carpet>,
    resolution: usize,
    family: PathFamilySpec,
) -> Result<GridDomain<T>> {
    if resolution == 0 {
        return Err(Error::param("resolution must be positive"));
    }
    let need = || carpet.ok_or_else(|| Error::param(format!("{} needs a carpet", family.name())));
    match family {
        PathFamilySpec::ConnectCircles { a, b } => build_connect(need()?, resolution, a, b),
        PathFamilySpec::AxisToAxis { strip, periods, periodic } => {
            build_strip(need()?, resolution, strip, periods, periodic)
        }
        PathFamilySpec::VerticalSegments { width } => build_rectangle(resolution, width),
        PathFamilySpec::RadialSegments { ratio } => build_annulus(resolution, ratio),
    }
}

fn check_size(nx: usize, ny: usize) -> Result<()> {
    if nx.saturating_mul(ny) > MAX_CELLS {
        return Err(Error::TooLarge(format!("{nx} x {ny} grid")));
    }
    Ok(())
}

fn circle_label(carpet: &Carpet, id: usize) -> String {
    let c = &carpet.circles()[id];
    match (c.tag, &c.address) {
        (Some(t), _) => t.to_string(),
        (None, Some(a)) => a.to_string(),
        (None, None) => "boundary".to_string(),
    }
}

fn build_connect<T: Real>(carpet: &Carpet, m: usize, a: usize, b: usize) -> Result<GridDomain<T>> {
    if carpet.is_weak_tangent() {
        return Err(Error::domain("circle pairs are only supported on the unit square"));
    }
    carpet.circle(a)?;
    carpet.circle(b)?;
    if a == b {
        return Err(Error::param("the two circles of a pair must differ"));
    }
    if (m as u32) < carpet.generation() {
        return Err(Error::Alignment(format!(
            "resolution exponent {m} below generation {}",
            carpet.generation()
        )));
    }
    let p = carpet.p() as usize;
    let n = (0..m).try_fold(1usize, |acc, _| acc.checked_mul(p)).unwrap_or(usize::MAX);
    check_size(n, n)?;
    let outer = carpet.outer().expect("unit-square carpets have O");

    let mut class = vec![CellClass::Material; n * n];
    for c in carpet.circles() {
        if c.id == outer {
            continue;
        }
        let (x0, y0, _, _) = c.bounds().expect("bounded");
        let s = c.side.expect("bounded") * n as i64;
        let (i0, j0) = ((x0 * n as i64).to_integer() as usize, (y0 * n as i64).to_integer() as usize);
        let s = s.to_integer() as usize;
        for j in j0..j0 + s {
            for i in i0..i0 + s {
                class[j * n + i] = CellClass::Inside(c.id);
            }
        }
    }

    let raw: Vec<BTreeSet<usize>> = (0..n * n)
        .map(|cell| {
            let mut set: BTreeSet<usize> = neighbourhood(n, n, false, cell)
                .filter_map(|(nb, _)| match class[nb] {
                    CellClass::Inside(c) => Some(c),
                    _ => None,
                })
                .collect();
            let (i, j) = (cell % n, cell / n);
            if i == 0 || j == 0 || i + 1 == n || j + 1 == n {
                set.insert(outer);
            }
            set
        })
        .collect();
    for c in class.iter_mut() {
        if matches!(*c, CellClass::Inside(id) if id == a || id == b) {
            *c = CellClass::Blocked;
        }
    }
    let passable = |cell: usize| class[cell] != CellClass::Blocked;
    let sources = (0..n * n).filter(|&c| passable(c) && raw[c].contains(&a)).collect();
    let sinks = (0..n * n).filter(|&c| passable(c) && raw[c].contains(&b)).collect();
    let exterior = outer != a && outer != b;
    let mut touch: Vec<Vec<TouchKey>> = raw
        .iter()
        .enumerate()
        .map(|(cell, set)| {
            if !passable(cell) {
                return Vec::new();
            }
            set.iter()
                .filter(|&&c| c != a && c != b)
                .map(|&c| TouchKey { var: c as u32, lift: 0 })
                .collect()
        })
        .collect();
    if exterior {
        touch.push(vec![TouchKey { var: outer as u32, lift: 0 }]);
    }

    let mut symmetries = Vec::new();
    for g in Isometry::all() {
        let perm = carpet.circle_permutation(SymmetryElement::Dihedral(g))?;
        let (ga, gb) = (perm[a].expect("closed"), perm[b].expect("closed"));
        if !((ga == a && gb == b) || (ga == b && gb == a)) {
            continue;
        }
        let mut node: Vec<usize> = (0..n * n)
            .map(|cell| {
                let (i, j) = g.apply_cell(n, (cell % n, cell / n));
                j * n + i
            })
            .collect();
        if exterior {
            node.push(n * n);
        }
        let var = perm.iter().map(|x| x.expect("closed")).collect();
        symmetries.push(GridSymmetry { name: g.to_string(), node, var });
    }

    let h = T::one() / T::from_usize_lossy(n);
    let grid = GridDomain {
        family: PathFamilySpec::ConnectCircles { a, b },
        resolution: m,
        nx: n,
        ny: n,
        hx: h,
        hy: h,
        cell_area: h * h,
        terminal: h,
        class,
        touch,
        exterior,
        periodic: false,
        mode: PathMode::Free,
        sources,
        sinks,
        variables: (0..carpet.len())
            .map(|id| Variable { circle: id, label: circle_label(carpet, id) })
            .collect(),
        circle_var: (0..carpet.len()).map(Some).collect(),
        symmetries,
        is_source: Vec::new(),
        is_sink: Vec::new(),
    };
    grid.finish()
}

fn segment_grid<T: Real>(
    family: PathFamilySpec,
    resolution: usize,
    nx: usize,
    ny: usize,
    hx: f64,
    hy: f64,
) -> Result<GridDomain<T>> {
    check_size(nx, ny)?;
    let grid = GridDomain {
        family,
        resolution,
        nx,
        ny,
        hx: T::lit(hx),
        hy: T::lit(hy),
        cell_area: T::lit(hx * hy),
        terminal: T::lit(hy),
        class: vec![CellClass::Material; nx * ny],
        touch: vec![Vec::new(); nx * ny],
        exterior: false,
        periodic: false,
        mode: PathMode::Columns,
        sources: (0..nx).collect(),
        sinks: ((ny - 1) * nx..ny * nx).collect(),
        variables: Vec::new(),
        circle_var: Vec::new(),
        symmetries: Vec::new(),
        is_source: Vec::new(),
        is_sink: Vec::new(),
    };
    grid.finish()
}

fn build_rectangle<T: Real>(n: usize, width: f64) -> Result<GridDomain<T>> {
    if !(width.is_finite() && width > 0.0) {
        return Err(Error::param("rectangle width must be positive"));
    }
    let (nx, ny, h) = if width >= 1.0 {
        let h = 1.0 / n as f64;
        (((width / h).round() as usize).max(1), n, h)
    } else {
        let h = width / n as f64;
        (n, ((1.0 / h).round() as usize).max(1), h)
    };
    // the rectangle is [0, nx·h] × [0, ny·h]; rounding is absorbed in the cell size
    let hx = width / nx as f64;
    let hy = 1.0 / ny as f64;
    debug_assert!((hx / h - 1.0).abs() < 0.5 && (hy / h - 1.0).abs() < 0.5);
    segment_grid(PathFamilySpec::VerticalSegments { width }, n, nx, ny, hx, hy)
}

fn build_annulus<T: Real>(n: usize, ratio: f64) -> Result<GridDomain<T>> {
    if !(ratio.is_finite() && ratio > 1.0) {
        return Err(Error::param("annulus ratio R/r must exceed 1"));
    }
    let height = ratio.ln();
    let (nx, ny) = if height <= 2.0 * PI {
        let h = height / n as f64;
        (((2.0 * PI / h).round() as usize).max(1), n)
    } else {
        let h = 2.0 * PI / n as f64;
        (n, ((height / h).round() as usize).max(1))
    };
    segment_grid(
        PathFamilySpec::RadialSegments { ratio },
        n,
        nx,
        ny,
        2.0 * PI / nx as f64,
        height / ny as f64,
    )
}

/// Removed square of the quarter-plane tangent containing `(x, y)`:
/// base digits and level `e` (the square is `p^(e+1)` times a square of `S_p`).
fn classify_point(p: u32, generation: u32, x: f64, y: f64) -> Option<(Vec<(u32, u32)>, i32)> {
    let pf = f64::from(p);
    let m = x.max(y);
    if !(m > 0.0) || x < 0.0 || y < 0.0 {
        return None;
    }
    let mut e = (m.ln() / pf.ln()).floor() as i32;
    while m < pf.powi(e) {
        e -= 1;
    }
    while m >= pf.powi(e + 1) {
        e += 1;
    }
    let f = pf.powi(e + 1);
    let (mut wx, mut wy) = (x / f, y / f);
    let mid = (p - 1) / 2;
    let mut digits = Vec::new();
    for depth in 0..generation {
        let dx = ((wx * pf).floor().max(0.0) as u32).min(p - 1);
        let dy = ((wy * pf).floor().max(0.0) as u32).min(p - 1);
        if depth == 0 && (dx, dy) == (0, 0) {
            return None;
        }
        digits.push((dx, dy));
        if (dx, dy) == (mid, mid) {
            return Some((digits, e));
        }
        wx = wx * pf - f64::from(dx);
        wy = wy * pf - f64::from(dy);
    }
    None
}

/// Classification of one period of the quarter strip, mirrored across the
/// diagonal so that the column reflection is an exact symmetry.
fn quarter_period(carpet: &Carpet, layout: &StripLayout) -> Vec<Option<(Vec<(u32, u32)>, i32)>> {
    let (nq, rows) = (layout.quarter_cols, layout.rows_per_period);
    let mut out = vec![None; nq * rows];
    let swap = |d: &Vec<(u32, u32)>| d.iter().map(|&(x, y)| (y, x)).collect::<Vec<_>>();
    for j in 0..rows {
        let u = (j as f64 + 0.5) * layout.hu;
        for i in 0..nq.div_ceil(2) {
            let t = (i as f64 + 0.5) * layout.htheta;
            let mut cls = classify_point(carpet.p(), carpet.generation(), u.exp() * t.cos(), u.exp() * t.sin());
            if 2 * i + 1 == nq {
                // the middle column sits on the diagonal; keep it symmetric
                if cls.as_ref().is_some_and(|(d, _)| swap(d) != *d) {
                    cls = None;
                }
            }
            out[j * nq + nq - 1 - i] = cls.as_ref().map(|(d, e)| (swap(d), *e));
            out[j * nq + i] = cls;
        }
    }
    out
}

fn build_strip<T: Real>(
    carpet: &Carpet,
    rows_per_period: usize,
    strip: StripKind,
    periods: u32,
    periodic: bool,
) -> Result<GridDomain<T>> {
    let Region::WeakTangent { angle, levels } = carpet.spec().region else {
        return Err(Error::domain("quotient strips need a weak-tangent carpet"));
    };
    let expected = match strip {
        StripKind::Quarter => TangentAngle::Quarter,
        StripKind::ThreeQuarter => TangentAngle::ThreeQuarter,
    };
    if angle != expected {
        return Err(Error::domain(format!("{strip:?} strip on a {angle:?} tangent")));
    }
    if periods == 0 {
        return Err(Error::param("period multiplier k must be at least 1"));
    }
    if periods > levels {
        return Err(Error::param(format!(
            "period multiplier {periods} exceeds the window levels {levels}"
        )));
    }
    if rows_per_period < 3 {
        return Err(Error::param("at least 3 rows per period"));
    }
    let k = periods as i32;
    let layout = StripLayout::new(carpet.p(), rows_per_period);
    let nq = layout.quarter_cols;
    let nx = nq * strip.quarter_turns();
    let sheets: Vec<i32> = if periodic { (0..k).collect() } else { (-(levels as i32)..levels as i32).collect() };
    let ny = rows_per_period * sheets.len();
    check_size(nx, ny)?;

    // variables: one per orbit slot of <μ^k>, represented by the circle at scale e mod k
    let mut slot_var: BTreeMap<(Vec<(u32, u32)>, Option<Quadrant>, i32), usize> = BTreeMap::new();
    let mut variables = Vec::new();
    for c in carpet.circles() {
        let Some(a) = &c.address else { continue };
        let e = a.scale.expect("tangent circles have a scale");
        if (0..k).contains(&e) {
            slot_var.insert((a.digits.clone(), a.quadrant, e), variables.len());
            variables.push(Variable { circle: c.id, label: a.to_string() });
        }
    }
    let slot_of = |a: &SquareAddress| {
        let e = a.scale.expect("scale");
        slot_var.get(&(a.digits.clone(), a.quadrant, e.rem_euclid(k))).copied()
    };
    let circle_var: Vec<Option<usize>> = carpet
        .circles()
        .iter()
        .map(|c| c.address.as_ref().and_then(|a| slot_of(a)))
        .collect();

    let period = quarter_period(carpet, &layout);
    let mut class = vec![CellClass::Material; nx * ny];
    for (t_index, &t) in sheets.iter().enumerate() {
        for jr in 0..rows_per_period {
            let j = t_index * rows_per_period + jr;
            for c in 0..nx {
                let (quadrant, qi) = match strip {
                    StripKind::Quarter => (None, c),
                    StripKind::ThreeQuarter => match c / nq {
                        0 => (Some(Quadrant::II), nq - 1 - c),
                        1 => (Some(Quadrant::III), c - nq),
                        _ => (Some(Quadrant::IV), nq - 1 - (c - 2 * nq)),
                    },
                };
                if let Some((digits, e0)) = &period[jr * nq + qi] {
                    let address =
                        SquareAddress { digits: digits.clone(), scale: Some(e0 + t), quadrant };
                    if let Some(id) = carpet.find(&address) {
                        class[j * nx + c] = CellClass::Inside(id);
                    }
                }
            }
        }
    }

    let key_of = |id: usize| -> (u32, i32) {
        let a = carpet.circles()[id].address.as_ref().expect("removed square");
        let var = circle_var[id].expect("every window circle has a slot");
        (var as u32, a.scale.expect("scale").div_euclid(k))
    };
    let touch: Vec<Vec<TouchKey>> = (0..nx * ny)
        .map(|cell| {
            let set: BTreeSet<TouchKey> = neighbourhood(nx, ny, periodic, cell)
                .filter_map(|(nb, shift)| match class[nb] {
                    CellClass::Inside(id) => {
                        let (var, lift) = key_of(id);
                        Some(TouchKey { var, lift: if periodic { lift + shift } else { lift } })
                    }
                    _ => None,
                })
                .collect();
            set.into_iter().collect()
        })
        .collect();

    // reflection in the bisector of the sector: column mirror
    let mut symmetries = Vec::new();
    let var_image: Option<Vec<usize>> = variables
        .iter()
        .map(|v| {
            let a = carpet.circles()[v.circle].address.as_ref().expect("address");
            let img = apply_symmetry(carpet, SymmetryElement::Dihedral(Isometry::DIAGONAL), a).ok()?;
            slot_of(&img)
        })
        .collect();
    if let Some(var) = var_image {
        let node = (0..nx * ny)
            .map(|cell| {
                let (i, j) = (cell % nx, cell / nx);
                j * nx + (nx - 1 - i)
            })
            .collect();
        symmetries.push(GridSymmetry { name: "mirror".to_string(), node, var });
    }

    let grid = GridDomain {
        family: PathFamilySpec::AxisToAxis { strip, periods, periodic },
        resolution: rows_per_period,
        nx,
        ny,
        hx: T::lit(layout.htheta),
        hy: T::lit(layout.hu),
        cell_area: T::lit(layout.htheta * layout.hu),
        terminal: T::lit(layout.htheta),
        class,
        touch,
        exterior: false,
        periodic,
        mode: PathMode::Free,
        sources: (0..ny).map(|j| j * nx).collect(),
        sinks: (0..ny).map(|j| j * nx + nx - 1).collect(),
        variables,
        circle_var,
        symmetries,
        is_source: Vec::new(),
        is_sink: Vec::new(),
    };
    grid.finish()
}
