use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;

use super::solve::{
    check_admissibility, compute_group_modulus, compute_modulus, GroupMode, ModulusResult,
    SolverOptions, Status,
};
use crate::carpet::{
    angle_density, build_carpet, Carpet, CarpetSpec, Isometry, Region, SymmetryElement,
    TangentAngle,
};
use crate::pathgrid::{GridDomain, MassDistribution, PathFamilySpec, StripKind};
use crate::{Error, Real, Result};

/// Slack used by the inequality checks between two discretised sides.
pub const EPS_REPORT: f64 = 0.02;
/// Relative band around `k` accepted by the scaling-law check.
pub const SCALING_BAND: f64 = 0.05;

/// Scalar part of a [`ModulusResult`], small enough for tables.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModulusSummary<T: Real> {
    pub family: String,
    pub value: T,
    pub bracket: (T, T),
    pub circle_mass: T,
    pub continuous_mass: T,
    pub min_length: T,
    pub iterations: usize,
    pub constraints: usize,
    pub status: Status,
}

impl<T: Real> From<&ModulusResult<T>> for ModulusSummary<T> {
    fn from(r: &ModulusResult<T>) -> Self {
        ModulusSummary {
            family: r.family.name(),
            value: r.value,
            bracket: r.bracket,
            circle_mass: r.circle_mass,
            continuous_mass: r.continuous_mass,
            min_length: r.min_length,
            iterations: r.iterations,
            constraints: r.num_constraints,
            status: r.status,
        }
    }
}

fn label(carpet: &Carpet, id: usize) -> String {
    let c = &carpet.circles()[id];
    match (&c.tag, &c.address) {
        (Some(t), _) => t.to_string(),
        (None, Some(a)) => a.to_string(),
        (None, None) => format!("#{id}"),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SquareSides<T: Real> {
    /// `log(R/r) = 2π / modulus`.
    pub log_ratio: T,
    /// Side length of every circle other than the two ends, by circle id.
    pub sides: BTreeMap<usize, T>,
    pub sum_sq: T,
    /// `2π log(R/r)`.
    pub target: T,
    pub defect: T,
    pub continuous_share: T,
    /// `continuous_share · target`, the defect the continuous mass accounts for.
    pub allowed: T,
}

/// Side lengths of the squares of the cylinder picture, `ℓ(C) = ρ(C) log(R/r)`.
pub fn synthesize_square_sides<T: Real>(
    grid: &GridDomain<T>,
    result: &ModulusResult<T>,
) -> Result<SquareSides<T>> {
    if !result.is_converged() {
        return Err(Error::NotConverged(format!("{:?} result", result.status)));
    }
    let PathFamilySpec::ConnectCircles { a, b } = result.family else {
        return Err(Error::param("square synthesis needs a ConnectCircles result"));
    };
    if result.group != GroupMode::Trivial {
        return Err(Error::param("square synthesis needs a per-circle (trivial group) result"));
    }
    if result.value <= T::zero() {
        return Err(Error::domain("modulus is zero"));
    }
    let two_pi = T::lit(2.0 * PI);
    let log_ratio = two_pi / result.value;
    let per_circle = grid.circle_weights(&result.distribution.weights);
    let sides: BTreeMap<usize, T> = per_circle
        .iter()
        .enumerate()
        .filter(|&(id, _)| id != a && id != b)
        .map(|(id, &w)| (id, w * log_ratio))
        .collect();
    let sum_sq = sides.values().fold(T::zero(), |s, &l| s + l * l);
    let target = two_pi * log_ratio;
    let continuous_share = result.continuous_share();
    Ok(SquareSides {
        log_ratio,
        sides,
        sum_sq,
        target,
        defect: (sum_sq - target).abs(),
        continuous_share,
        allowed: continuous_share * target,
    })
}

/// Structure of an extremal distribution for `ConnectCircles` on a unit-square carpet.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtremalStructure<T: Real> {
    /// Weights of the two end circles.
    pub end_weights: (T, T),
    /// Largest `|ρ(C) - ρ(g C)|` over the isometries preserving the pair.
    pub symmetry_defect: T,
    /// Circles of generation ≤ `max_generation` other than the ends.
    pub candidates: usize,
    pub positive: usize,
    pub positivity_fraction: T,
}

pub fn extremal_structure<T: Real>(
    carpet: &Carpet,
    grid: &GridDomain<T>,
    result: &ModulusResult<T>,
    max_generation: usize,
    threshold: T,
) -> Result<ExtremalStructure<T>> {
    let PathFamilySpec::ConnectCircles { a, b } = result.family else {
        return Err(Error::param("extremal structure needs a ConnectCircles result"));
    };
    let w = grid.circle_weights(&result.distribution.weights);
    let mut defect = T::zero();
    for g in Isometry::all() {
        let perm = carpet.circle_permutation(SymmetryElement::Dihedral(g))?;
        let (ga, gb) = (perm[a], perm[b]);
        if !(ga == Some(a) && gb == Some(b) || ga == Some(b) && gb == Some(a)) {
            continue;
        }
        for (id, img) in perm.iter().enumerate() {
            if let Some(j) = *img {
                defect = defect.max((w[id] - w[j]).abs());
            }
        }
    }
    let ids: Vec<usize> = carpet
        .circles()
        .iter()
        .filter(|c| c.id != a && c.id != b && c.is_bounded() && c.generation() <= max_generation)
        .map(|c| c.id)
        .collect();
    let positive = ids.iter().filter(|&&id| w[id] > threshold).count();
    let fraction = if ids.is_empty() {
        T::one()
    } else {
        T::from_usize_lossy(positive) / T::from_usize_lossy(ids.len())
    };
    Ok(ExtremalStructure {
        end_weights: (w[a], w[b]),
        symmetry_defect: defect,
        candidates: ids.len(),
        positive,
        positivity_fraction: fraction,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairRow<T: Real> {
    pub a: usize,
    pub b: usize,
    pub label_a: String,
    pub label_b: String,
    /// Number of unordered pairs in the dihedral orbit of this pair.
    pub orbit_size: usize,
    pub result: ModulusSummary<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairTable<T: Real> {
    pub p: u32,
    pub generation: u32,
    pub resolution: usize,
    /// One row per dihedral orbit of pairs, ordered by representative.
    pub rows: Vec<PairRow<T>>,
    /// Row of the pair {M, O}.
    pub distinguished: usize,
    /// Lower end of the {M, O} bracket minus the largest upper end of the others.
    pub margin: T,
    pub all_converged: bool,
    /// Strict maximum at {M, O} with positive margin; `None` when some pair
    /// did not converge.
    pub verdict: Option<bool>,
}

/// Canonical representative of every dihedral orbit of pairs of circles with
/// generation ≤ 2, with the orbit size.
pub fn candidate_pairs(carpet: &Carpet) -> Result<Vec<((usize, usize), usize)>> {
    if !matches!(carpet.spec().region, Region::UnitSquare) {
        return Err(Error::domain("pair table needs a unit-square carpet"));
    }
    let ids: Vec<usize> =
        carpet.circles().iter().filter(|c| c.generation() <= 2).map(|c| c.id).collect();
    let perms = Isometry::all()
        .iter()
        .map(|&g| carpet.circle_permutation(SymmetryElement::Dihedral(g)))
        .collect::<Result<Vec<_>>>()?;
    let mut orbits: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (i, &a) in ids.iter().enumerate() {
        for &b in &ids[i + 1..] {
            let images: std::collections::BTreeSet<(usize, usize)> = perms
                .iter()
                .map(|perm| {
                    let (x, y) = (perm[a].expect("total"), perm[b].expect("total"));
                    (x.min(y), x.max(y))
                })
                .collect();
            let rep = *images.iter().next().expect("identity image");
            orbits.insert(rep, images.len());
        }
    }
    Ok(orbits.into_iter().collect())
}

/// Modulus of `ConnectCircles` for every dihedral orbit of pairs of circles
/// of generation ≤ 2. Pairs run on worker threads; rows are merged by pair.
pub fn distinguished_pair_table<T: Real + Send + Sync>(
    p: u32,
    generation: u32,
    resolution: usize,
    opts: &SolverOptions<T>,
) -> Result<PairTable<T>> {
    if generation < 2 {
        return Err(Error::param("the pair table needs generation ≥ 2"));
    }
    opts.validate()?;
    let carpet = build_carpet(CarpetSpec::unit_square(p, generation))?;
    let pairs = candidate_pairs(&carpet)?;
    let (m, o) = (carpet.middle().expect("middle"), carpet.outer().expect("outer"));
    let key_mo = (m.min(o), m.max(o));

    let next = AtomicUsize::new(0);
    let done: Mutex<BTreeMap<(usize, usize), Result<ModulusSummary<T>>>> = Mutex::new(BTreeMap::new());
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(pairs.len()).max(1);
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(&((a, b), _)) = pairs.get(k) else { break };
                let family = PathFamilySpec::ConnectCircles { a, b };
                let r = compute_modulus(Some(&carpet), family, resolution, opts)
                    .map(|(_, r)| ModulusSummary::from(&r));
                done.lock().expect("poisoned").insert((a, b), r);
            });
        }
    });
    let mut done = done.into_inner().expect("poisoned");

    let mut rows = Vec::with_capacity(pairs.len());
    for ((a, b), size) in pairs {
        let result = done.remove(&(a, b)).expect("every pair ran")?;
        rows.push(PairRow {
            a,
            b,
            label_a: label(&carpet, a),
            label_b: label(&carpet, b),
            orbit_size: size,
            result,
        });
    }
    let distinguished = rows.iter().position(|r| (r.a, r.b) == key_mo).expect("{M, O} is a candidate");
    let others_hi = rows
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != distinguished)
        .map(|(_, r)| r.result.bracket.1)
        .fold(T::neg_infinity(), T::max);
    let margin = rows[distinguished].result.bracket.0 - others_hi;
    let all_converged = rows.iter().all(|r| r.result.status == Status::Converged);
    Ok(PairTable {
        p,
        generation,
        resolution,
        rows,
        distinguished,
        margin,
        all_converged,
        verdict: all_converged.then_some(margin > T::zero()),
    })
}

/// The window of scales kept around the origin by the tangent experiments.
pub const TANGENT_LEVELS: u32 = 3;
/// Carpet generation used inside every scale band of a tangent.
pub const TANGENT_GENERATION: u32 = 2;

fn tangent(p: u32, angle: TangentAngle, generation: u32) -> Result<Carpet> {
    build_carpet(CarpetSpec::weak_tangent(p, generation, angle, TANGENT_LEVELS))
}

fn quotient<T: Real>(
    carpet: &Carpet,
    strip: StripKind,
    k: u32,
    rows: usize,
    opts: &SolverOptions<T>,
) -> Result<ModulusResult<T>> {
    let opts = opts.clone().with_group(GroupMode::Scaling { k });
    compute_group_modulus(carpet, PathFamilySpec::quotient(strip, k), rows, &opts).map(|(_, r)| r)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingLawReport<T: Real> {
    pub p: u32,
    pub k: u32,
    pub rows: usize,
    pub base: ModulusSummary<T>,
    pub scaled: ModulusSummary<T>,
    pub ratio: T,
    /// Accepted interval for the ratio.
    pub band: (T, T),
    pub holds: bool,
}

/// Quarter-strip quotient modulus under `⟨μ^k⟩` against `⟨μ⟩`.
pub fn scaling_law_check<T: Real>(
    p: u32,
    k: u32,
    rows: usize,
    generation: u32,
    opts: &SolverOptions<T>,
) -> Result<ScalingLawReport<T>> {
    if k == 0 {
        return Err(Error::param("period multiplier k must be at least 1"));
    }
    let carpet = build_carpet(CarpetSpec::weak_tangent(p, generation, TangentAngle::Quarter, k.max(TANGENT_LEVELS)))?;
    let base = quotient(&carpet, StripKind::Quarter, 1, rows, opts)?;
    let scaled = quotient(&carpet, StripKind::Quarter, k, rows, opts)?;
    let ratio = scaled.value / base.value;
    let kf = T::from_usize_lossy(k as usize);
    let band = (kf * T::lit(1.0 - SCALING_BAND), kf * T::lit(1.0 + SCALING_BAND));
    Ok(ScalingLawReport {
        p,
        k,
        rows,
        base: (&base).into(),
        scaled: (&scaled).into(),
        ratio,
        band,
        holds: ratio >= band.0 && ratio <= band.1,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SerialLawReport<T: Real> {
    pub p: u32,
    pub rows: usize,
    pub three_quarter: ModulusSummary<T>,
    pub quarter: ModulusSummary<T>,
    pub lhs: T,
    /// One third of the quarter-strip value.
    pub rhs: T,
    pub eps_report: T,
    pub holds: bool,
}

/// Three-quarter strip against one third of the quarter strip, both under `⟨μ⟩`.
pub fn serial_law_check<T: Real>(
    p: u32,
    rows: usize,
    generation: u32,
    opts: &SolverOptions<T>,
) -> Result<SerialLawReport<T>> {
    let q = tangent(p, TangentAngle::Quarter, generation)?;
    let tq = tangent(p, TangentAngle::ThreeQuarter, generation)?;
    let quarter = quotient(&q, StripKind::Quarter, 1, rows, opts)?;
    let three = quotient(&tq, StripKind::ThreeQuarter, 1, rows, opts)?;
    let lhs = three.value;
    let rhs = quarter.value / T::lit(3.0);
    let eps = T::lit(EPS_REPORT);
    Ok(SerialLawReport {
        p,
        rows,
        three_quarter: (&three).into(),
        quarter: (&quarter).into(),
        lhs,
        rhs,
        eps_report: eps,
        holds: lhs <= rhs * (T::one() + eps),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lemma74Report<T: Real> {
    pub p: u32,
    pub rows: usize,
    pub quotient: ModulusSummary<T>,
    /// Mass of the angle density over one fundamental domain.
    pub angle_mass: T,
    pub angle_circle_mass: T,
    pub angle_continuous_mass: T,
    /// Minimum length of the angle density over the quotient family.
    pub angle_min_length: T,
    pub positive: bool,
    pub bounded: bool,
    pub admissible: bool,
}

/// `(2/π)θ(C)` on circles and `2/π` per unit angle on material cells of the
/// quarter quotient strip.
pub fn strip_angle_density<T: Real>(carpet: &Carpet, grid: &GridDomain<T>) -> Result<MassDistribution<T>> {
    let per_circle = angle_density::<T>(carpet)?;
    let weights = grid.weights_from_circles(&per_circle.weights);
    let d = T::lit(2.0 / PI);
    let density = (0..grid.num_cells()).map(|c| if grid.is_material(c) { d } else { T::zero() }).collect();
    Ok(MassDistribution::from_weights(weights).with_density(density))
}

/// Quotient modulus of the quarter tangent against the angle density.
pub fn lemma74_check<T: Real>(
    p: u32,
    rows: usize,
    generation: u32,
    opts: &SolverOptions<T>,
    min_length_floor: T,
) -> Result<Lemma74Report<T>> {
    let carpet = tangent(p, TangentAngle::Quarter, generation)?;
    let opts = opts.clone().with_group(GroupMode::Scaling { k: 1 });
    let (grid, result) =
        compute_group_modulus(&carpet, PathFamilySpec::quotient(StripKind::Quarter, 1), rows, &opts)?;
    let rho = strip_angle_density(&carpet, &grid)?;
    let adm = check_admissibility(&rho, &grid)?;
    let circle = rho.circle_mass();
    let cont = rho.continuous_mass(&grid);
    let mass = circle + cont;
    Ok(Lemma74Report {
        p,
        rows,
        quotient: (&result).into(),
        angle_mass: mass,
        angle_circle_mass: circle,
        angle_continuous_mass: cont,
        angle_min_length: adm.min_length,
        positive: result.value > T::zero(),
        bounded: result.value <= mass,
        admissible: adm.min_length >= min_length_floor,
    })
}

/// Continuous share of the {M, O} modulus at generations `gens`, each at
/// resolution exponent `generation + 1`.
pub fn continuous_share_trend<T: Real>(
    p: u32,
    gens: &[u32],
    opts: &SolverOptions<T>,
) -> Result<Vec<(u32, T)>> {
    gens.iter()
        .map(|&g| {
            let c = build_carpet(CarpetSpec::unit_square(p, g))?;
            let family = PathFamilySpec::ConnectCircles {
                a: c.middle().ok_or_else(|| Error::param("generation 0 has no middle square"))?,
                b: c.outer().expect("outer"),
            };
            let (_, r) = compute_modulus(Some(&c), family, g as usize + 1, opts)?;
            Ok((g, r.continuous_share()))
        })
        .collect()
}
