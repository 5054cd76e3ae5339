use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::forbidden::ForbiddenRegion;
use super::partition::NoncrossingPartition;
use crate::error::{Error, Result};
use crate::poly::{angle_distance, SectorSet};
use crate::serde_pts;

/// Which end of an arc's node list a ray tag refers to: `tail` is the first
/// node, `head` the last.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArcEnd {
    Head,
    Tail,
}

/// Marks an arc end as a truncated ray stretching into a sector (1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RayTag {
    pub arc: usize,
    pub end: ArcEnd,
    pub sector: usize,
}

/// Finite union of oriented polylines whose tagged ends stand for rays to
/// infinity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    #[serde(with = "serde_pts::polylines")]
    pub arcs: Vec<Vec<Complex64>>,
    pub rays: Vec<RayTag>,
    /// Connected-component id of every arc.
    pub components: Vec<usize>,
}

/// Segment midpoints of a contour: the support nodes of a discrete measure.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeLayout {
    pub points: Vec<Complex64>,
    pub seg: Vec<f64>,
    pub tangents: Vec<Complex64>,
    pub arc_of: Vec<usize>,
}

impl NodeLayout {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl Contour {
    pub fn arc_length(&self, i: usize) -> f64 {
        polyline_length(&self.arcs[i])
    }

    pub fn total_length(&self) -> f64 {
        (0..self.arcs.len()).map(|i| self.arc_length(i)).sum()
    }

    pub fn segment_count(&self) -> usize {
        self.arcs.iter().map(|a| a.len().saturating_sub(1)).sum()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Complex64> {
        self.arcs.iter().flatten()
    }

    pub fn end_point(&self, arc: usize, end: ArcEnd) -> Complex64 {
        let a = &self.arcs[arc];
        match end {
            ArcEnd::Tail => a[0],
            ArcEnd::Head => a[a.len() - 1],
        }
    }

    /// Unit vector pointing out of the contour at a tagged end.
    pub fn outward(&self, arc: usize, end: ArcEnd) -> Complex64 {
        let a = &self.arcs[arc];
        let d = match end {
            ArcEnd::Tail => a[0] - a[1],
            ArcEnd::Head => a[a.len() - 1] - a[a.len() - 2],
        };
        d / d.norm()
    }

    /// Midpoint discretization of the current polyline segments.
    pub fn layout(&self) -> NodeLayout {
        let n = self.segment_count();
        let mut out = NodeLayout {
            points: Vec::with_capacity(n),
            seg: Vec::with_capacity(n),
            tangents: Vec::with_capacity(n),
            arc_of: Vec::with_capacity(n),
        };
        for (i, arc) in self.arcs.iter().enumerate() {
            for w in arc.windows(2) {
                let d = w[1] - w[0];
                let len = d.norm();
                out.points.push((w[0] + w[1]) * 0.5);
                out.seg.push(len);
                out.tangents.push(d / len);
                out.arc_of.push(i);
            }
        }
        out
    }

    /// Equal-arclength resampling with `n` segments in total, allocated to
    /// arcs in proportion to their lengths (at least two per arc).
    pub fn resample(&self, n: usize) -> Contour {
        let lengths: Vec<f64> = (0..self.arcs.len()).map(|i| self.arc_length(i)).collect();
        let counts = allocate(&lengths, n);
        let arcs = self
            .arcs
            .iter()
            .zip(counts)
            .map(|(arc, m)| resample_polyline(arc, m))
            .collect();
        Contour {
            arcs,
            rays: self.rays.clone(),
            components: self.components.clone(),
        }
    }

    /// Applies `f` to every node.
    pub fn map_nodes(&self, mut f: impl FnMut(Complex64) -> Complex64) -> Contour {
        Contour {
            arcs: self
                .arcs
                .iter()
                .map(|a| a.iter().map(|&z| f(z)).collect())
                .collect(),
            rays: self.rays.clone(),
            components: self.components.clone(),
        }
    }

    /// Lengthens every tagged ray end by moving it outward along its last
    /// segment direction until its distance from `center` grows by `factor`.
    pub fn extend_rays(&self, center: Complex64, factor: f64, spacing: f64) -> Contour {
        let mut out = self.clone();
        for tag in &self.rays {
            let tip = self.end_point(tag.arc, tag.end);
            let dir = self.outward(tag.arc, tag.end);
            let extra = (tip - center).norm() * (factor - 1.0);
            let steps = (extra / spacing).ceil().max(1.0) as usize;
            let added = (1..=steps).map(|k| tip + dir * (extra * k as f64 / steps as f64));
            let arc = &mut out.arcs[tag.arc];
            match tag.end {
                ArcEnd::Head => arc.extend(added),
                ArcEnd::Tail => {
                    let mut front: Vec<Complex64> = added.collect();
                    front.reverse();
                    front.extend(arc.iter().copied());
                    *arc = front;
                }
            }
        }
        out
    }

    /// Gaussian smoothing of every arc along arclength with width `sigma`;
    /// arc endpoints stay fixed and the window is closed by odd reflection
    /// about them, so straight pieces are reproduced exactly.
    pub fn smooth(&self, sigma: f64) -> Contour {
        let mut out = self.clone();
        if sigma <= 0.0 {
            return out;
        }
        for arc in out.arcs.iter_mut() {
            let m = arc.len();
            if m < 3 {
                continue;
            }
            let mut s = vec![0.0];
            for w in arc.windows(2) {
                s.push(s.last().unwrap() + (w[1] - w[0]).norm());
            }
            let total = s[m - 1];
            let (z0, z1) = (arc[0], arc[m - 1]);
            let src = arc.clone();
            let reach = 4.0 * sigma;
            for i in 1..m - 1 {
                let (mut acc, mut wsum) = (Complex64::new(0.0, 0.0), 0.0);
                let lo = s.partition_point(|&x| x < s[i] - reach);
                let hi = s.partition_point(|&x| x <= s[i] + reach);
                for j in lo..hi {
                    let w = (-(s[j] - s[i]).powi(2) / (2.0 * sigma * sigma)).exp();
                    acc += src[j] * w;
                    wsum += w;
                    // mirrored copies beyond either end
                    if j > 0 && s[i] - reach < -s[j] {
                        let w = (-(s[i] + s[j]).powi(2) / (2.0 * sigma * sigma)).exp();
                        acc += (z0 * 2.0 - src[j]) * w;
                        wsum += w;
                    }
                    if j < m - 1 && s[i] + reach > 2.0 * total - s[j] {
                        let w = (-(2.0 * total - s[j] - s[i]).powi(2) / (2.0 * sigma * sigma)).exp();
                        acc += (z1 * 2.0 - src[j]) * w;
                        wsum += w;
                    }
                }
                arc[i] = acc / wsum;
            }
        }
        out
    }

    /// Largest turning angle between consecutive segments, in radians.
    pub fn max_turning_angle(&self) -> f64 {
        self.arcs
            .iter()
            .flat_map(|a| {
                a.windows(3).map(|w| {
                    let d1 = w[1] - w[0];
                    let d2 = w[2] - w[1];
                    (d2 / d1).arg().abs()
                })
            })
            .fold(0.0, f64::max)
    }

    /// Checks the structural invariants and admissibility for `partition`.
    pub fn validate(&self, partition: &NoncrossingPartition, sectors: &SectorSet) -> Result<()> {
        if self.arcs.is_empty() {
            return Err(Error::Validation("contour has no arcs".into()));
        }
        if self.components.len() != self.arcs.len() {
            return Err(Error::Validation(format!(
                "{} component ids for {} arcs",
                self.components.len(),
                self.arcs.len()
            )));
        }
        for (i, arc) in self.arcs.iter().enumerate() {
            if arc.len() < 2 {
                return Err(Error::Validation(format!("arc {i} has fewer than two nodes")));
            }
            for w in arc.windows(2) {
                if (w[1] - w[0]).norm() <= 1e-12 * (1.0 + w[0].norm()) {
                    return Err(Error::Validation(format!(
                        "arc {i} repeats node {}",
                        w[0]
                    )));
                }
            }
        }
        self.check_connectivity()?;

        let n = sectors.degree;
        let mut tags_of: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for tag in &self.rays {
            if tag.arc >= self.arcs.len() || tag.sector == 0 || tag.sector > n {
                return Err(Error::Validation(format!("malformed ray tag {tag:?}")));
            }
            let dir = self.outward(tag.arc, tag.end).arg();
            if angle_distance(dir, sectors.angles[tag.sector - 1]) >= sectors.half_width {
                return Err(Error::Validation(format!(
                    "ray on arc {} leaves sector {} (direction {:.3} rad)",
                    tag.arc, tag.sector, dir
                )));
            }
            tags_of
                .entry(self.components[tag.arc])
                .or_default()
                .push(tag.sector);
        }
        let comps: std::collections::BTreeSet<usize> = self.components.iter().copied().collect();
        let p0 = partition.nontrivial_blocks().count();
        if comps.len() > p0 {
            return Err(Error::Validation(format!(
                "{} components but only {p0} nontrivial blocks",
                comps.len()
            )));
        }
        for c in &comps {
            let count = tags_of.get(c).map_or(0, Vec::len);
            if count < 2 {
                return Err(Error::Validation(format!(
                    "component {c} stretches to infinity in {count} sector(s)"
                )));
            }
        }
        for block in partition.nontrivial_blocks() {
            let served = tags_of
                .values()
                .any(|tags| block.iter().all(|j| tags.contains(j)));
            if !served {
                return Err(Error::Validation(format!(
                    "no component reaches all sectors of block {block:?}"
                )));
            }
        }
        Ok(())
    }

    fn check_connectivity(&self) -> Result<()> {
        let m = self.arcs.len();
        let mut parent: Vec<usize> = (0..m).collect();
        fn find(p: &mut [usize], i: usize) -> usize {
            let mut r = i;
            while p[r] != r {
                r = p[r];
            }
            p[i] = r;
            r
        }
        for a in 0..m {
            for b in 0..m {
                if a == b {
                    continue;
                }
                let ends = [self.arcs[a][0], *self.arcs[a].last().unwrap()];
                let touches = ends.iter().any(|&e| {
                    let tol = 1e-9 * (1.0 + e.norm());
                    super::metric::point_polyline_distance(e, &self.arcs[b]) <= tol
                });
                if touches {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    parent[ra] = rb;
                }
            }
        }
        for a in 0..m {
            for b in 0..a {
                if self.components[a] == self.components[b]
                    && find(&mut parent, a) != find(&mut parent, b)
                {
                    return Err(Error::Validation(format!(
                        "arcs {a} and {b} share component {} but do not touch",
                        self.components[a]
                    )));
                }
            }
        }
        Ok(())
    }
}

pub fn polyline_length(p: &[Complex64]) -> f64 {
    p.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
}

fn allocate(lengths: &[f64], n: usize) -> Vec<usize> {
    let total: f64 = lengths.iter().sum();
    let mut counts: Vec<usize> = lengths
        .iter()
        .map(|l| ((n as f64 * l / total).round() as usize).max(2))
        .collect();
    loop {
        let s: usize = counts.iter().sum();
        if s == n {
            break;
        }
        // adjust the arc with the largest (or smallest) length per segment
        if s < n {
            let i = (0..counts.len())
                .max_by(|&a, &b| {
                    (lengths[a] / counts[a] as f64)
                        .partial_cmp(&(lengths[b] / counts[b] as f64))
                        .unwrap()
                })
                .unwrap();
            counts[i] += 1;
        } else {
            let candidates = (0..counts.len()).filter(|&i| counts[i] > 2);
            match candidates.min_by(|&a, &b| {
                (lengths[a] / counts[a] as f64)
                    .partial_cmp(&(lengths[b] / counts[b] as f64))
                    .unwrap()
            }) {
                Some(i) => counts[i] -= 1,
                None => break,
            }
        }
    }
    counts
}

/// `m` equal-length pieces along the polyline, endpoints kept.
pub fn resample_polyline(p: &[Complex64], m: usize) -> Vec<Complex64> {
    let cum: Vec<f64> = std::iter::once(0.0)
        .chain(p.windows(2).scan(0.0, |acc, w| {
            *acc += (w[1] - w[0]).norm();
            Some(*acc)
        }))
        .collect();
    let total = *cum.last().unwrap();
    let mut out = Vec::with_capacity(m + 1);
    let mut seg = 0;
    for k in 0..=m {
        let s = total * k as f64 / m as f64;
        while seg + 1 < p.len() - 1 && cum[seg + 1] < s {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let t = if len > 0.0 { (s - cum[seg]) / len } else { 0.0 };
        out.push(p[seg] + (p[seg + 1] - p[seg]) * t.clamp(0.0, 1.0));
    }
    out[0] = p[0];
    out[m] = p[p.len() - 1];
    out
}

fn straight(a: Complex64, b: Complex64, spacing: f64) -> Vec<Complex64> {
    let m = ((b - a).norm() / spacing).ceil().max(1.0) as usize;
    (0..=m).map(|k| a + (b - a) * (k as f64 / m as f64)).collect()
}

fn push_path(path: &mut Vec<Complex64>, pts: impl IntoIterator<Item = Complex64>) {
    for z in pts {
        if path
            .last()
            .is_none_or(|&l| (l - z).norm() > 1e-12 * (1.0 + z.norm()))
        {
            path.push(z);
        }
    }
}

/// Geometry of the initial star-shaped contour.
#[derive(Clone, Debug)]
pub struct JoinParams {
    /// Point the rays emanate from.
    pub center: Complex64,
    /// Radius at which rays turn into joining chords.
    pub r_join: f64,
    /// Radius at which rays are truncated.
    pub r_trunc: f64,
    /// Target node spacing of the polyline.
    pub spacing: f64,
}

/// Builds one component per nontrivial block: rays at the sector angles
/// from `r_join` to `r_trunc`, joined by chords through a hub inside the
/// circle `|z - center| = r_join`.
///
/// With a single block the hub is `center`; otherwise each hub sits at the
/// centroid of its block's join points, which keeps components of a
/// noncrossing partition disjoint. If a chord enters the forbidden region
/// the join is rerouted along the circle.
pub fn initial_contour(
    partition: &NoncrossingPartition,
    sectors: &SectorSet,
    params: &JoinParams,
    forbidden: Option<&ForbiddenRegion>,
) -> Result<Contour> {
    if params.r_join <= 0.0 || params.r_trunc <= params.r_join {
        return Err(Error::Configuration(format!(
            "need 0 < r_join < r_trunc, got {} and {}",
            params.r_join, params.r_trunc
        )));
    }
    let c = params.center;
    let single = partition.nontrivial_blocks().count() == 1;
    let dir = |j: usize| Complex64::from_polar(1.0, sectors.angles[j - 1]);
    let mut arcs = Vec::new();
    let mut rays = Vec::new();
    let mut components = Vec::new();

    for (comp, block) in partition.nontrivial_blocks().enumerate() {
        let hub = if single {
            c
        } else {
            c + block.iter().map(|&j| dir(j)).sum::<Complex64>() * (params.r_join / block.len() as f64)
        };
        let join = |j: usize| c + dir(j) * params.r_join;
        let far = |j: usize| c + dir(j) * params.r_trunc;
        let blocked = |pts: &[Complex64]| forbidden.is_some_and(|f| pts.iter().any(|&z| f.contains(z)));

        let (j1, j2) = (block[0], block[1]);
        let mut main = Vec::new();
        push_path(&mut main, straight(far(j1), join(j1), params.spacing));
        let via_hub: Vec<Complex64> = straight(join(j1), hub, params.spacing)
            .into_iter()
            .chain(straight(hub, join(j2), params.spacing))
            .collect();
        if blocked(&via_hub) {
            let detour = circle_detour(c, params.r_join, sectors.angles[j1 - 1], sectors.angles[j2 - 1], params.spacing, forbidden)?;
            push_path(&mut main, detour);
        } else {
            push_path(&mut main, via_hub);
        }
        push_path(&mut main, straight(join(j2), far(j2), params.spacing));
        let main_idx = arcs.len();
        arcs.push(main);
        components.push(comp);
        rays.push(RayTag {
            arc: main_idx,
            end: ArcEnd::Tail,
            sector: j1,
        });
        rays.push(RayTag {
            arc: main_idx,
            end: ArcEnd::Head,
            sector: j2,
        });

        for &j in &block[2..] {
            let chord = straight(hub, join(j), params.spacing);
            if blocked(&chord) {
                return Err(Error::Configuration(format!(
                    "join chord to sector {j} crosses the forbidden region"
                )));
            }
            let mut arc = Vec::new();
            push_path(&mut arc, chord);
            push_path(&mut arc, straight(join(j), far(j), params.spacing));
            rays.push(RayTag {
                arc: arcs.len(),
                end: ArcEnd::Head,
                sector: j,
            });
            arcs.push(arc);
            components.push(comp);
        }
    }
    let contour = Contour {
        arcs,
        rays,
        components,
    };
    if let Some(f) = forbidden {
        if let Some(&z) = contour.nodes().find(|&&z| f.contains(z)) {
            return Err(Error::ConstraintViolation(z));
        }
    }
    Ok(contour)
}

fn circle_detour(
    c: Complex64,
    r: f64,
    from: f64,
    to: f64,
    spacing: f64,
    forbidden: Option<&ForbiddenRegion>,
) -> Result<Vec<Complex64>> {
    let ccw = (to - from).rem_euclid(2.0 * PI);
    for sweep in [ccw, ccw - 2.0 * PI] {
        let m = ((sweep.abs() * r) / spacing).ceil().max(2.0) as usize;
        let pts: Vec<Complex64> = (0..=m)
            .map(|k| c + Complex64::from_polar(r, from + sweep * k as f64 / m as f64))
            .collect();
        if !forbidden.is_some_and(|f| pts.iter().any(|&z| f.contains(z))) {
            return Ok(pts);
        }
    }
    Err(Error::Configuration(
        "no join avoids the forbidden region".into(),
    ))
}
