//! Brute-force point–line incidences in `F_p²` and point–plane incidences
//! in `F_p³`, with the classical right-hand sides evaluated at constant 1.

use std::collections::{HashMap, HashSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::is_prime_u64;

/// Largest modulus for which the line-major walk over `F_p` is always allowed.
pub const SMALL_FIELD: u64 = 1 << 13;

/// Cap on elementary incidence tests.
pub const WORK_CAP: u128 = 1_000_000_000;

pub type Point2 = [u64; 2];
pub type Point3 = [u64; 3];

/// `y = slope·x + intercept`, or the vertical line `x = c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Line {
    Sloped { slope: u64, intercept: u64 },
    Vertical { x: u64 },
}

/// `a·x + b·y + c·z = e` with the first nonzero of `(a, b, c)` equal to 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "[u64; 4]", into = "[u64; 4]")]
pub struct Plane {
    coeffs: [u64; 4],
}

fn mul(p: u64, a: u64, b: u64) -> u64 {
    ((u128::from(a) * u128::from(b)) % u128::from(p)) as u64
}

fn add(p: u64, a: u64, b: u64) -> u64 {
    ((u128::from(a) + u128::from(b)) % u128::from(p)) as u64
}

fn sub(p: u64, a: u64, b: u64) -> u64 {
    add(p, a, p - b % p)
}

fn inv(p: u64, a: u64) -> u64 {
    // Fermat
    let (mut base, mut e, mut acc) = (a % p, p - 2, 1u64);
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(p, acc, base);
        }
        base = mul(p, base, base);
        e >>= 1;
    }
    acc
}

fn check_modulus(p: u64) -> Result<()> {
    if p > 2 && p < (1 << 63) && is_prime_u64(p) {
        Ok(())
    } else {
        Err(Error::InvalidModulus(p))
    }
}

impl Line {
    pub fn contains(&self, p: u64, pt: Point2) -> bool {
        match *self {
            Line::Sloped { slope, intercept } => add(p, mul(p, slope, pt[0]), intercept) == pt[1],
            Line::Vertical { x } => pt[0] == x,
        }
    }

    fn validate(&self, p: u64) -> Result<()> {
        let ok = match *self {
            Line::Sloped { slope, intercept } => slope < p && intercept < p,
            Line::Vertical { x } => x < p,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("line {self:?} has coordinates outside F_{p}")))
        }
    }
}

impl Plane {
    pub fn new(p: u64, a: u64, b: u64, c: u64, e: u64) -> Result<Plane> {
        let raw = [a % p, b % p, c % p, e % p];
        let lead =
            raw[..3].iter().copied().find(|&v| v != 0).ok_or_else(|| Error::Domain("plane with zero normal".into()))?;
        let s = inv(p, lead);
        Ok(Plane { coeffs: raw.map(|v| mul(p, v, s)) })
    }

    pub fn coeffs(&self) -> [u64; 4] {
        self.coeffs
    }

    pub fn contains(&self, p: u64, pt: Point3) -> bool {
        let [a, b, c, e] = self.coeffs;
        add(p, add(p, mul(p, a, pt[0]), mul(p, b, pt[1])), mul(p, c, pt[2])) == e
    }

    fn is_normalized(&self) -> bool {
        self.coeffs[..3].iter().copied().find(|&v| v != 0) == Some(1)
    }
}

impl TryFrom<[u64; 4]> for Plane {
    type Error = Error;

    fn try_from(v: [u64; 4]) -> Result<Plane> {
        let plane = Plane { coeffs: v };
        if plane.is_normalized() {
            Ok(plane)
        } else {
            Err(Error::Domain(format!("plane {v:?} is not normalized")))
        }
    }
}

impl From<Plane> for [u64; 4] {
    fn from(p: Plane) -> [u64; 4] {
        p.coeffs
    }
}

/// A point set and line family in `F_p²`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance2d {
    pub p: u64,
    pub points: Vec<Point2>,
    pub lines: Vec<Line>,
}

/// A point set and plane family in `F_p³`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance3d {
    pub p: u64,
    pub points: Vec<Point3>,
    pub planes: Vec<Plane>,
}

impl Instance2d {
    /// Validates coordinates and removes duplicate points and lines.
    pub fn new(p: u64, mut points: Vec<Point2>, mut lines: Vec<Line>) -> Result<Self> {
        check_modulus(p)?;
        if let Some(pt) = points.iter().find(|pt| pt.iter().any(|&c| c >= p)) {
            return Err(Error::Domain(format!("point {pt:?} outside F_{p}²")));
        }
        for l in &lines {
            l.validate(p)?;
        }
        points.sort_unstable();
        points.dedup();
        lines.sort_unstable();
        lines.dedup();
        Ok(Instance2d { p, points, lines })
    }

    /// Every point of `F_p²` and all `p² + p` lines.
    pub fn full_grid(p: u64) -> Result<Self> {
        check_modulus(p)?;
        let points = (0..p).flat_map(|x| (0..p).map(move |y| [x, y])).collect();
        let mut lines: Vec<Line> =
            (0..p).flat_map(|slope| (0..p).map(move |intercept| Line::Sloped { slope, intercept })).collect();
        lines.extend((0..p).map(|x| Line::Vertical { x }));
        Ok(Instance2d { p, points, lines })
    }

    /// Points of `A × B` against `n_lines` distinct random lines (vertical
    /// lines included).
    pub fn random_grid(p: u64, a: &[u64], b: &[u64], n_lines: usize, rng: &mut impl Rng) -> Result<Self> {
        check_modulus(p)?;
        let points = a.iter().flat_map(|&x| b.iter().map(move |&y| [x % p, y % p])).collect();
        let total = (p as u128) * (p as u128) + p as u128;
        let n_lines = (n_lines as u128).min(total) as usize;
        let mut lines = HashSet::with_capacity(n_lines);
        while lines.len() < n_lines {
            let code = rng.gen_range(0..total as u64);
            lines.insert(if code < p * p {
                Line::Sloped { slope: code / p, intercept: code % p }
            } else {
                Line::Vertical { x: code - p * p }
            });
        }
        Instance2d::new(p, points, lines.into_iter().collect())
    }
}

impl Instance3d {
    pub fn new(p: u64, mut points: Vec<Point3>, mut planes: Vec<Plane>) -> Result<Self> {
        check_modulus(p)?;
        if let Some(pt) = points.iter().find(|pt| pt.iter().any(|&c| c >= p)) {
            return Err(Error::Domain(format!("point {pt:?} outside F_{p}³")));
        }
        if planes.iter().any(|pl| pl.coeffs.iter().any(|&c| c >= p)) {
            return Err(Error::Domain(format!("plane coefficient outside F_{p}")));
        }
        points.sort_unstable();
        points.dedup();
        planes.sort_unstable();
        planes.dedup();
        Ok(Instance3d { p, points, planes })
    }

    pub fn random(p: u64, n_points: usize, n_planes: usize, rng: &mut impl Rng) -> Result<Self> {
        check_modulus(p)?;
        let cube = (p as u128).pow(3);
        let mut points = HashSet::new();
        while (points.len() as u128) < (n_points as u128).min(cube) {
            points.insert([rng.gen_range(0..p), rng.gen_range(0..p), rng.gen_range(0..p)]);
        }
        let mut planes = HashSet::new();
        // p³ + p² + p normalized planes
        while (planes.len() as u128) < (n_planes as u128).min(cube + (p as u128).pow(2) + p as u128) {
            let normal = [rng.gen_range(0..p), rng.gen_range(0..p), rng.gen_range(0..p)];
            if normal == [0, 0, 0] {
                continue;
            }
            planes.insert(Plane::new(p, normal[0], normal[1], normal[2], rng.gen_range(0..p))?);
        }
        Instance3d::new(p, points.into_iter().collect(), planes.into_iter().collect())
    }
}

/// Incidence totals from two independent traversals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncidenceCount {
    pub p: u64,
    pub n_points: usize,
    pub n_curves: usize,
    /// Sum over lines (planes) of the number of points on each.
    pub curve_major: u64,
    /// Sum over points of the number of lines (planes) through each.
    pub point_major: u64,
    /// Largest number of collinear points (3D only).
    pub max_collinear: Option<u64>,
}

impl IncidenceCount {
    pub fn consistent(&self) -> bool {
        self.curve_major == self.point_major
    }

    pub fn incidences(&self) -> u64 {
        self.curve_major
    }
}

fn check_work(what: &'static str, requested: u128) -> Result<()> {
    if requested > WORK_CAP {
        Err(Error::CapExceeded { what, requested, cap: WORK_CAP })
    } else {
        Ok(())
    }
}

/// `I(P, L)`, counted line by line and point by point.
pub fn count_incidences_2d(inst: &Instance2d) -> Result<IncidenceCount> {
    let p = inst.p;
    let (np, nl) = (inst.points.len() as u128, inst.lines.len() as u128);
    if p > SMALL_FIELD {
        check_work("incidence pairs", np * nl)?;
    }
    let point_set: HashSet<Point2> = inst.points.iter().copied().collect();

    // line-major: walk each line through F_p
    let mut curve_major = 0u64;
    let walk = (p as u128) <= np;
    for line in &inst.lines {
        curve_major += if walk {
            match *line {
                Line::Sloped { slope, intercept } => {
                    (0..p).filter(|&x| point_set.contains(&[x, add(p, mul(p, slope, x), intercept)])).count() as u64
                }
                Line::Vertical { x } => (0..p).filter(|&y| point_set.contains(&[x, y])).count() as u64,
            }
        } else {
            inst.points.iter().filter(|&&pt| line.contains(p, pt)).count() as u64
        };
    }

    // point-major: per slope, the intercept through the point
    let mut by_slope: HashMap<u64, HashSet<u64>> = HashMap::new();
    let mut verticals = HashSet::new();
    for line in &inst.lines {
        match *line {
            Line::Sloped { slope, intercept } => {
                by_slope.entry(slope).or_default().insert(intercept);
            }
            Line::Vertical { x } => {
                verticals.insert(x);
            }
        }
    }
    check_work("incidence slope scan", np * (by_slope.len() as u128 + 1))?;
    let mut point_major = 0u64;
    for &[x, y] in &inst.points {
        for (&slope, intercepts) in &by_slope {
            if intercepts.contains(&sub(p, y, mul(p, slope, x))) {
                point_major += 1;
            }
        }
        if verticals.contains(&x) {
            point_major += 1;
        }
    }
    Ok(IncidenceCount {
        p,
        n_points: inst.points.len(),
        n_curves: inst.lines.len(),
        curve_major,
        point_major,
        max_collinear: None,
    })
}

/// `I(P, Π)` counted both ways, and the maximum number of collinear points.
pub fn count_incidences_3d(inst: &Instance3d) -> Result<IncidenceCount> {
    let p = inst.p;
    let (np, nl) = (inst.points.len() as u128, inst.planes.len() as u128);
    let p2 = (p as u128) * (p as u128);
    check_work("incidence pairs", np * nl)?;
    check_work("collinearity scan", np * np)?;
    let point_set: HashSet<Point3> = inst.points.iter().copied().collect();

    // plane-major: solve for the last coordinate with nonzero coefficient
    let mut curve_major = 0u64;
    let walk = p2 <= np;
    for plane in &inst.planes {
        curve_major += if walk {
            let [a, b, c, e] = plane.coeffs;
            let mut n = 0u64;
            for u in 0..p {
                for v in 0..p {
                    let pt = if c != 0 {
                        let rest = sub(p, e, add(p, mul(p, a, u), mul(p, b, v)));
                        [u, v, mul(p, rest, inv(p, c))]
                    } else if b != 0 {
                        let rest = sub(p, e, mul(p, a, u));
                        [u, mul(p, rest, inv(p, b)), v]
                    } else {
                        [e, u, v]
                    };
                    if point_set.contains(&pt) {
                        n += 1;
                    }
                }
            }
            n
        } else {
            inst.points.iter().filter(|&&pt| plane.contains(p, pt)).count() as u64
        };
    }

    let plane_set: HashSet<Plane> = inst.planes.iter().copied().collect();
    let normals: HashSet<[u64; 3]> = inst.planes.iter().map(|pl| [pl.coeffs[0], pl.coeffs[1], pl.coeffs[2]]).collect();
    let mut point_major = 0u64;
    for &pt in &inst.points {
        if walk {
            point_major += inst.planes.iter().filter(|pl| pl.contains(p, pt)).count() as u64;
        } else {
            // a normal and a point fix the offset
            for &[a, b, c] in &normals {
                let e = add(p, add(p, mul(p, a, pt[0]), mul(p, b, pt[1])), mul(p, c, pt[2]));
                if plane_set.contains(&Plane { coeffs: [a, b, c, e] }) {
                    point_major += 1;
                }
            }
        }
    }

    Ok(IncidenceCount {
        p,
        n_points: inst.points.len(),
        n_curves: inst.planes.len(),
        curve_major,
        point_major,
        max_collinear: Some(max_collinear(p, &inst.points)),
    })
}

/// Largest number of points on one line, by counting normalized directions
/// from each point.
pub fn max_collinear(p: u64, points: &[Point3]) -> u64 {
    if points.is_empty() {
        return 0;
    }
    let mut best = 1u64;
    let mut dirs: HashMap<[u64; 3], u64> = HashMap::new();
    for (i, &a) in points.iter().enumerate() {
        dirs.clear();
        for &b in &points[i + 1..] {
            let d = [sub(p, b[0], a[0]), sub(p, b[1], a[1]), sub(p, b[2], a[2])];
            let lead = d.iter().copied().find(|&v| v != 0).expect("distinct points");
            let s = inv(p, lead);
            *dirs.entry(d.map(|v| mul(p, v, s))).or_insert(0) += 1;
        }
        if let Some(&m) = dirs.values().max() {
            best = best.max(m + 1);
        }
    }
    best
}

/// `|P|^{2/3}|L|^{2/3} + |P| + |L|`.
pub fn szt_rhs(n_points: u64, n_lines: u64) -> f64 {
    let (pp, ll) = (n_points as f64, n_lines as f64);
    (pp * ll).powf(2.0 / 3.0) + pp + ll
}

/// `|A|^{3/4}|B|^{1/2}|L|^{3/4} + |L| + |A||B|`.
pub fn sdz_rhs(a: u64, b: u64, n_lines: u64) -> f64 {
    let (a, b, l) = (a as f64, b as f64, n_lines as f64);
    a.powf(0.75) * b.sqrt() * l.powf(0.75) + l + a * b
}

/// `|A||B||L|/p`.
pub fn sdz_main_term(a: u64, b: u64, n_lines: u64, p: u64) -> f64 {
    a as f64 * b as f64 * n_lines as f64 / p as f64
}

/// `|P|^{1/2}|Π| + k|Π|`.
pub fn misha_rhs(n_points: u64, n_planes: u64, k: u64) -> f64 {
    (n_points as f64).sqrt() * n_planes as f64 + k as f64 * n_planes as f64
}

/// `|P||Π|/p`.
pub fn misha_main_term(n_points: u64, n_planes: u64, p: u64) -> f64 {
    n_points as f64 * n_planes as f64 / p as f64
}

/// Measured incidences against the constant-1 right-hand sides. These are
/// ratios to record, not inequalities to assert.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncidenceReport {
    pub count: IncidenceCount,
    pub comparisons: Vec<Comparison>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub name: String,
    /// The quantity compared: `I` or `|I − main term|`.
    pub measured: f64,
    pub rhs: f64,
    pub ratio: f64,
}

impl Comparison {
    fn new(name: &str, measured: f64, rhs: f64) -> Self {
        Comparison { name: name.into(), measured, rhs, ratio: if rhs > 0.0 { measured / rhs } else { f64::NAN } }
    }
}

/// Report for a 2D instance; `grid` gives `(|A|, |B|)` when `P = A × B`.
pub fn report_2d(inst: &Instance2d, grid: Option<(u64, u64)>) -> Result<IncidenceReport> {
    let count = count_incidences_2d(inst)?;
    let i = count.incidences() as f64;
    let (np, nl) = (count.n_points as u64, count.n_curves as u64);
    let mut comparisons = vec![Comparison::new("szemeredi_trotter", i, szt_rhs(np, nl))];
    if let Some((a, b)) = grid {
        let main = sdz_main_term(a, b, nl, inst.p);
        comparisons.push(Comparison::new("grid_lines", (i - main).abs(), sdz_rhs(a, b, nl)));
    }
    Ok(IncidenceReport { count, comparisons })
}

pub fn report_3d(inst: &Instance3d) -> Result<IncidenceReport> {
    let count = count_incidences_3d(inst)?;
    let i = count.incidences() as f64;
    let (np, nl) = (count.n_points as u64, count.n_curves as u64);
    let k = count.max_collinear.unwrap_or(0);
    let main = misha_main_term(np, nl, inst.p);
    let comparisons = vec![
        Comparison::new("point_plane", (i - main).abs(), misha_rhs(np, nl, k)),
        Comparison::new("point_plane_total", i, main + misha_rhs(np, nl, k)),
    ];
    Ok(IncidenceReport { count, comparisons })
}
