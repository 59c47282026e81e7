//! SVG 1.1 rendering.
//!
//! Every coordinate is computed as an exact rational through one affine map
//! from carpet (or cell) coordinates to the canvas and only converted to a
//! float when printed.

use std::fmt::Write;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::carpet::{Carpet, CircleKind, Quadrant, Region, TangentAngle};
use crate::modulus::{ModulusResult, SquareSides};
use crate::pathgrid::{CellClass, GridDomain};
use crate::{ratio_to_real, Rational, Real};

const MARGIN: i64 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RenderKind {
    Carpet,
    HeatMap,
    WitnessPath,
    SquareSides,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderSpec {
    pub kind: RenderKind,
    /// Width of the drawing area in pixels, margins excluded.
    pub canvas: u32,
}

impl Default for RenderSpec {
    fn default() -> Self {
        RenderSpec { kind: RenderKind::Carpet, canvas: 720 }
    }
}

/// `(x, y) ↦ (MARGIN + (x - x0)·s, MARGIN + (y1 - y)·s)`, with `y` pointing up.
#[derive(Clone, Copy, Debug)]
pub struct Affine {
    pub x0: Rational,
    pub y1: Rational,
    pub scale: Rational,
}

impl Affine {
    pub fn x(&self, x: Rational) -> Rational {
        Rational::from_integer(MARGIN) + (x - self.x0) * self.scale
    }

    pub fn y(&self, y: Rational) -> Rational {
        Rational::from_integer(MARGIN) + (self.y1 - y) * self.scale
    }

    pub fn length(&self, l: Rational) -> Rational {
        l * self.scale
    }
}

/// Shortest decimal that reads back as the same `f64`.
pub fn num(r: Rational) -> String {
    format!("{}", ratio_to_real::<f64>(&r))
}

fn header(width: Rational, height: Rational) -> String {
    let w = num(width + Rational::from_integer(2 * MARGIN));
    let h = num(height + Rational::from_integer(2 * MARGIN));
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    )
}

fn rect(out: &mut String, x: Rational, y: Rational, w: Rational, h: Rational, style: &str) {
    let _ = writeln!(
        out,
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" {style}/>",
        num(x),
        num(y),
        num(w),
        num(h)
    );
}

/// Linear white-to-red scale.
pub fn color(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let mix = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", 255, mix(255.0, 24.0), mix(255.0, 24.0))
}

/// Bounding box `(x0, y0, x1, y1)` of the region drawn for `carpet`.
pub fn carpet_bounds(carpet: &Carpet) -> (Rational, Rational, Rational, Rational) {
    match carpet.spec().region {
        Region::UnitSquare => (Rational::zero(), Rational::zero(), Rational::one(), Rational::one()),
        Region::WeakTangent { .. } => {
            let r = tangent_radius(carpet);
            (-r, -r, r, r)
        }
    }
}

fn tangent_radius(carpet: &Carpet) -> Rational {
    carpet
        .circles()
        .iter()
        .filter_map(|c| c.bounds())
        .flat_map(|(a, b, c, d)| [a.abs(), b.abs(), c.abs(), d.abs()])
        .fold(Rational::one(), |m, v| if v > m { v } else { m })
}

fn sector_quadrants(angle: TangentAngle) -> &'static [Quadrant] {
    match angle {
        TangentAngle::Quarter => &[Quadrant::I],
        TangentAngle::Half => &[Quadrant::I, Quadrant::II],
        TangentAngle::ThreeQuarter => &[Quadrant::II, Quadrant::III, Quadrant::IV],
    }
}

fn carpet_affine(carpet: &Carpet, canvas: u32) -> (Affine, Rational, Rational) {
    let (x0, y0, x1, y1) = carpet_bounds(carpet);
    let scale = Rational::from_integer(i64::from(canvas)) / (x1 - x0);
    (Affine { x0, y1, scale }, (x1 - x0) * scale, (y1 - y0) * scale)
}

fn draw_material(out: &mut String, carpet: &Carpet, map: &Affine) {
    let style = "fill=\"#3a3a3a\"";
    match carpet.spec().region {
        Region::UnitSquare => {
            let one = Rational::one();
            rect(out, map.x(Rational::zero()), map.y(one), map.length(one), map.length(one), style);
        }
        Region::WeakTangent { angle, .. } => {
            let r = tangent_radius(carpet);
            for q in sector_quadrants(angle) {
                let (x, y) = match q {
                    Quadrant::I => (Rational::zero(), r),
                    Quadrant::II => (-r, r),
                    Quadrant::III => (-r, Rational::zero()),
                    Quadrant::IV => (Rational::zero(), Rational::zero()),
                };
                rect(out, map.x(x), map.y(y), map.length(r), map.length(r), style);
            }
        }
    }
}

fn draw_squares(out: &mut String, carpet: &Carpet, map: &Affine, fill: impl Fn(usize) -> String) {
    for c in carpet.circles() {
        if c.kind == CircleKind::SectorBoundary {
            continue;
        }
        let Some((x0, _, _, y1)) = c.bounds() else { continue };
        let s = c.side.expect("bounded");
        let style = if c.kind == CircleKind::Outer {
            "fill=\"none\" stroke=\"#000000\" stroke-width=\"1\"".to_string()
        } else {
            format!("fill=\"{}\" id=\"circle-{}\"", fill(c.id), c.id)
        };
        rect(out, map.x(x0), map.y(y1), map.length(s), map.length(s), &style);
    }
}

/// The carpet: material in grey, removed squares in white.
pub fn render_carpet(carpet: &Carpet, spec: &RenderSpec) -> String {
    let (map, w, h) = carpet_affine(carpet, spec.canvas);
    let mut out = header(w, h);
    draw_material(&mut out, carpet, &map);
    draw_squares(&mut out, carpet, &map, |_| "#ffffff".to_string());
    out.push_str("</svg>\n");
    out
}

fn cell_affine<T: Real>(grid: &GridDomain<T>, canvas: u32) -> (Affine, Rational, Rational) {
    // one cell is canvas / nx pixels wide; y counts cells upwards
    let nx = grid.nx as i64;
    let scale = Rational::new(i64::from(canvas), nx);
    let map = Affine { x0: Rational::zero(), y1: Rational::from_integer(grid.ny as i64), scale };
    (map, Rational::from_integer(i64::from(canvas)), scale * grid.ny as i64)
}

fn draw_cells<T: Real>(out: &mut String, grid: &GridDomain<T>, result: &ModulusResult<T>, map: &Affine) {
    let rho = &result.distribution;
    let dmax = grid.material_cells().map(|c| rho.density_at(c).as_f64()).fold(0.0, f64::max);
    let wmax = rho.weights.iter().map(|w| w.as_f64()).fold(0.0, f64::max);
    let one = Rational::one();
    for cell in 0..grid.num_cells() {
        let (i, j) = grid.cell_coords(cell);
        let fill = match grid.class[cell] {
            CellClass::Material => color(rho.density_at(cell).as_f64() / dmax),
            CellClass::Inside(c) => match grid.circle_var.get(c).copied().flatten() {
                Some(v) => color(rho.weight(v).as_f64() / wmax),
                None => "#ffffff".to_string(),
            },
            CellClass::Blocked => "#9a9a9a".to_string(),
        };
        let x = Rational::from_integer(i as i64);
        let y = Rational::from_integer(j as i64 + 1);
        rect(out, map.x(x), map.y(y), map.length(one), map.length(one), &format!("fill=\"{fill}\""));
    }
}

fn draw_path<T: Real>(out: &mut String, grid: &GridDomain<T>, result: &ModulusResult<T>, map: &Affine) {
    let Some(path) = &result.witness else { return };
    let half = Rational::new(1, 2);
    let points: Vec<String> = path
        .nodes
        .iter()
        .filter(|&&n| n < grid.num_cells())
        .map(|&n| {
            let (i, j) = grid.cell_coords(n);
            let x = map.x(Rational::from_integer(i as i64) + half);
            let y = map.y(Rational::from_integer(j as i64) + half);
            format!("{},{}", num(x), num(y))
        })
        .collect();
    if points.is_empty() {
        return;
    }
    let _ = writeln!(
        out,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f4fd1\" stroke-width=\"2\"/>",
        points.join(" ")
    );
}

/// Cell densities and circle weights on the solver grid, optionally with
/// the witness path of minimum ρ-length on top.
pub fn render_distribution<T: Real>(
    grid: &GridDomain<T>,
    result: &ModulusResult<T>,
    spec: &RenderSpec,
) -> String {
    let (map, w, h) = cell_affine(grid, spec.canvas);
    let mut out = header(w, h);
    draw_cells(&mut out, grid, result, &map);
    if spec.kind == RenderKind::WitnessPath {
        draw_path(&mut out, grid, result, &map);
    }
    out.push_str("</svg>\n");
    out
}

/// Circle weights drawn on the exact carpet squares over the grey material.
pub fn render_heat_map<T: Real>(
    carpet: &Carpet,
    grid: &GridDomain<T>,
    result: &ModulusResult<T>,
    spec: &RenderSpec,
) -> String {
    let (map, w, h) = carpet_affine(carpet, spec.canvas);
    let mut out = header(w, h);
    draw_material(&mut out, carpet, &map);
    let weight = |id: usize| -> f64 {
        grid.circle_var
            .get(id)
            .copied()
            .flatten()
            .and_then(|v| result.var_group.get(v))
            .and_then(|&g| result.group_weights.get(g))
            .map_or(0.0, |w| w.as_f64())
    };
    let wmax = result.group_weights.iter().map(|w| w.as_f64()).fold(0.0, f64::max);
    draw_squares(&mut out, carpet, &map, |id| color(weight(id) / wmax));
    out.push_str("</svg>\n");
    out
}

/// Bar chart of the synthesised square sides, largest first.
pub fn render_square_sides<T: Real>(sides: &SquareSides<T>, spec: &RenderSpec) -> String {
    let mut values: Vec<(usize, f64)> = sides.sides.iter().map(|(&c, &l)| (c, l.as_f64())).collect();
    values.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let n = values.len().max(1) as i64;
    let width = Rational::from_integer(i64::from(spec.canvas));
    let height = width / 2;
    let bar = width / n;
    let top = values.first().map_or(1.0, |v| v.1).max(f64::MIN_POSITIVE);
    let mut out = header(width, height);
    let m = Rational::from_integer(MARGIN);
    for (k, &(c, l)) in values.iter().enumerate() {
        // bar heights are data, quantised to 1/1000 of the chart height
        let q = Rational::new((l / top * 1000.0).round() as i64, 1000);
        let h = height * q;
        let x = m + bar * k as i64;
        let y = m + height - h;
        rect(&mut out, x, y, bar, h, &format!("fill=\"#b31818\" id=\"circle-{c}\""));
    }
    out.push_str("</svg>\n");
    out
}
