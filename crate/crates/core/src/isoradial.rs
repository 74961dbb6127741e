//! Isoradial embeddings, rhombus half-angles and the critical weights built
//! from them.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::oracles::digraph::WeightedDigraph;
use crate::planar::{EdgeOrigin, ExtendedDouble, ExtendedPair, PlanarMap, VertexClass};
use crate::scalar::{cis, im_unit, real, Scalar, Tolerances};

/// Validated isoradial embedding of a map.
#[derive(Debug, Clone)]
pub struct IsoradialData<T: Scalar> {
    pub map: PlanarMap,
    pub coords: Vec<[T; 2]>,
    /// Circumcentre of every inner face.
    pub centers: Vec<Option<[T; 2]>>,
    /// Rhombus half-angle per edge.
    pub theta: Vec<T>,
    /// Boundary half-angle per outer dart (corner), `None` elsewhere.
    pub theta_boundary: Vec<Option<T>>,
    /// Same, computed from the reflected circumcentres.
    pub theta_boundary_geometric: Vec<Option<T>>,
    /// Circumcentres all lie in the closure of their faces.
    pub regular: bool,
}

fn sub<T: Scalar>(a: [T; 2], b: [T; 2]) -> [T; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn cross<T: Scalar>(a: [T; 2], b: [T; 2]) -> T {
    a[0] * b[1] - a[1] * b[0]
}

fn dot<T: Scalar>(a: [T; 2], b: [T; 2]) -> T {
    a[0] * b[0] + a[1] * b[1]
}

fn norm<T: Scalar>(a: [T; 2]) -> T {
    dot(a, a).sqrt()
}

fn circumcenter<T: Scalar>(a: [T; 2], b: [T; 2], c: [T; 2]) -> Option<[T; 2]> {
    let (ab, ac) = (sub(b, a), sub(c, a));
    let d = T::lit(2.0) * cross(ab, ac);
    if d.abs() <= T::epsilon() {
        return None;
    }
    let (b2, c2) = (dot(ab, ab), dot(ac, ac));
    Some([
        a[0] + (ac[1] * b2 - ab[1] * c2) / d,
        a[1] + (ab[0] * c2 - ac[0] * b2) / d,
    ])
}

/// Point in closed polygon, with `tol` slack on the boundary.
fn in_closure<T: Scalar>(p: [T; 2], poly: &[[T; 2]], tol: T) -> bool {
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let ab = sub(b, a);
        let t = (dot(sub(p, a), ab) / dot(ab, ab)).max(T::zero()).min(T::one());
        let proj = [a[0] + t * ab[0], a[1] + t * ab[1]];
        if norm(sub(p, proj)) <= tol {
            return true;
        }
    }
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Checks that every inner face is inscribed in a unit circle and derives
/// the half-angles.
pub fn validate_isoradial<T: Scalar>(map: &PlanarMap, coords: &[[T; 2]], tol: &Tolerances) -> Result<IsoradialData<T>> {
    if coords.len() != map.num_vertices() {
        return Err(Error::NotIsoradial(format!(
            "{} coordinates for {} vertices",
            coords.len(),
            map.num_vertices()
        )));
    }
    let geom = T::lit(tol.geom);
    let mut centers = vec![None; map.num_faces()];
    let mut regular = true;
    for f in map.inner_faces() {
        let pts: Vec<[T; 2]> = map.face_darts(f).iter().map(|&d| coords[map.vertex(d)]).collect();
        let c = (2..pts.len())
            .find_map(|k| circumcenter(pts[0], pts[1], pts[k]))
            .ok_or_else(|| Error::NotIsoradial(format!("face {f} is degenerate")))?;
        for (k, &p) in pts.iter().enumerate() {
            let r = norm(sub(p, c));
            if (r - T::one()).abs() > geom {
                return Err(Error::NotIsoradial(format!(
                    "vertex {} of face {f} is at distance {} from the circumcentre",
                    map.vertex(map.face_darts(f)[k]),
                    r
                )));
            }
        }
        regular &= in_closure(c, &pts, geom);
        centers[f] = Some(c);
    }

    let mut theta = Vec::with_capacity(map.num_edges());
    for e in 0..map.num_edges() {
        let (d, a) = map.edge_darts(e);
        let x = if !map.is_outer(d) { d } else { a };
        let c = centers[map.face(x)].ok_or_else(|| Error::NotIsoradial(format!("edge {e} borders no inner face")))?;
        let u = coords[map.vertex(x)];
        let v = coords[map.head(x)];
        let (uv, uc) = (sub(v, u), sub(c, u));
        theta.push(cross(uv, uc).abs().atan2(dot(uv, uc)));
    }

    let mut data = IsoradialData {
        map: map.clone(),
        coords: coords.to_vec(),
        centers,
        theta,
        theta_boundary: vec![None; map.num_darts()],
        theta_boundary_geometric: vec![None; map.num_darts()],
        regular,
    };
    if regular {
        for x in 0..map.num_vertices() {
            if map.darts_at(x).iter().all(|&d| !map.is_outer(d)) {
                let s: T = map.darts_at(x).iter().map(|&d| data.theta[map.edge(d)]).sum();
                if (s - T::PI()).abs() > geom {
                    return Err(Error::NotIsoradial(format!(
                        "half-angles around inner vertex {x} sum to {s}, not pi"
                    )));
                }
            }
        }
    }
    data.compute_boundary_angles();
    Ok(data)
}

impl<T: Scalar> IsoradialData<T> {
    /// Replaces the geometric half-angles by exact values after checking
    /// that they agree within the geometric tolerance.
    pub fn with_exact_theta(mut self, exact: Vec<T>, tol: &Tolerances) -> Result<Self> {
        if exact.len() != self.theta.len() {
            return Err(Error::NotIsoradial("one exact angle per edge required".into()));
        }
        for (e, (&g, &x)) in self.theta.iter().zip(&exact).enumerate() {
            if (g - x).abs().to_f64_lossy() > tol.geom {
                return Err(Error::NotIsoradial(format!(
                    "edge {e}: exact angle {x} disagrees with geometry {g}"
                )));
            }
        }
        self.theta = exact;
        self.compute_boundary_angles();
        Ok(self)
    }

    /// Boundary half-angles from the closure identity: around a boundary
    /// vertex the half-angles of its edges plus its boundary angle sum to
    /// pi. A vertex with several boundary corners takes the geometric
    /// value on all corners but its first, which absorbs the remainder.
    fn compute_boundary_angles(&mut self) {
        let map = &self.map;
        let outer = map.outer_darts();
        let mut geo = vec![None; map.num_darts()];
        let mut reflected = vec![None; map.num_darts()];
        for &d in &outer {
            let inner = map.alpha(d);
            if let Some(c) = self.centers[map.face(inner)] {
                let (u, v) = (self.coords[map.vertex(d)], self.coords[map.head(d)]);
                reflected[d] = Some([u[0] + v[0] - c[0], u[1] + v[1] - c[1]]);
            }
        }
        for &d in &outer {
            let x = self.coords[map.vertex(d)];
            let other = map.alpha(map.sigma(d));
            if let (Some(a), Some(b)) = (reflected[d], reflected[other]) {
                let (xa, xb) = (sub(a, x), sub(b, x));
                let mut phi = cross(xa, xb).atan2(dot(xa, xb));
                if phi < T::zero() {
                    phi += T::TAU();
                }
                geo[d] = Some(phi / T::lit(2.0));
            }
        }
        let mut closure = vec![None; map.num_darts()];
        for x in map.boundary_vertices() {
            let corners: Vec<usize> = outer.iter().copied().filter(|&d| map.vertex(d) == x).collect();
            let s: T = map.darts_at(x).iter().map(|&d| self.theta[map.edge(d)]).sum();
            let others: T = corners[1..].iter().map(|&d| geo[d].unwrap_or(T::zero())).sum();
            closure[corners[0]] = Some(T::PI() - s - others);
            for &d in &corners[1..] {
                closure[d] = geo[d];
            }
        }
        self.theta_boundary = closure;
        self.theta_boundary_geometric = geo;
    }

    pub fn boundary_angle(&self, d: usize) -> Option<T> {
        self.theta_boundary[d]
    }

    /// Corners whose closure and geometric boundary angles disagree, as
    /// `(dart, |e^{2i a} - e^{2i b}|)`. The half-angle is only defined
    /// modulo pi geometrically, hence the doubled comparison.
    pub fn boundary_mismatches(&self, tol: f64) -> Vec<(usize, f64)> {
        let two = T::lit(2.0);
        (0..self.map.num_darts())
            .filter_map(|d| {
                let (a, b) = (self.theta_boundary[d]?, self.theta_boundary_geometric[d]?);
                let gap = (cis(two * a) - cis(two * b)).norm().to_f64_lossy();
                (gap > tol).then_some((d, gap))
            })
            .collect()
    }

    /// Largest violation of the closure identities at primal vertices.
    pub fn closure_residual(&self) -> f64 {
        let map = &self.map;
        (0..map.num_vertices())
            .map(|x| {
                let s: T = map
                    .darts_at(x)
                    .iter()
                    .map(|&d| self.theta[map.edge(d)] + self.theta_boundary[d].unwrap_or(T::zero()))
                    .sum();
                (s - T::PI()).abs().to_f64_lossy()
            })
            .fold(0.0, f64::max)
    }
}

/// Critical coupling of a single edge.
pub fn coupling<T: Scalar>(theta: T) -> T {
    let half = T::lit(0.5);
    half * ((T::one() + theta.sin()) / theta.cos()).ln()
}

pub fn critical_couplings<T: Scalar>(iso: &IsoradialData<T>) -> Result<Vec<T>> {
    iso.theta
        .iter()
        .enumerate()
        .map(|(edge, &t)| {
            if t <= T::zero() || t >= T::FRAC_PI_2() {
                Err(Error::AngleOutOfRange {
                    edge,
                    theta: t.to_f64_lossy(),
                })
            } else {
                Ok(coupling(t))
            }
        })
        .collect()
}

/// Dimer weights on the decorated graph for arbitrary couplings `j`
/// (indexed by edge of the input map): 1 on external edges, `1/cosh 2J`
/// across primal edges, `tanh 2J` across dual edges.
pub fn dimer_weights<T: Scalar>(map: &PlanarMap, gq: &crate::planar::DerivedMap, j: &[T]) -> Result<Vec<T>> {
    let two = T::lit(2.0);
    gq.edge_origin
        .iter()
        .enumerate()
        .map(|(k, o)| match *o {
            EdgeOrigin::External { .. } => Ok(T::one()),
            EdgeOrigin::CrossesPrimal { dart } => Ok(T::one() / (two * j[map.edge(dart)]).cosh()),
            EdgeOrigin::CrossesDual { dart } => Ok((two * j[map.edge(dart)]).tanh()),
            _ => Err(Error::MissingProvenance(k)),
        })
        .collect()
}

/// Tree weights on both orientations of every edge of the extended graph
/// and of the extended dual.
pub fn tree_weights_tau<T: Scalar>(
    iso: &IsoradialData<T>,
    ext: &ExtendedPair,
) -> (WeightedDigraph<T>, WeightedDigraph<T>) {
    let two = T::lit(2.0);
    let zero = real(T::zero());
    let primal = WeightedDigraph::bidirected(&ext.graph, |e, forward| match ext.graph.edge_origin[e] {
        EdgeOrigin::PrimalEdge { edge } => real(iso.theta[edge].tan()),
        EdgeOrigin::CornerEdge { dart } => {
            // corner edges run from the boundary vertex to r
            if forward {
                real(two * (iso.theta_boundary[dart].unwrap() / two).sin())
            } else {
                zero
            }
        }
        _ => unreachable!("extended graph edges are primal or corner edges"),
    });
    let dual = WeightedDigraph::bidirected(&ext.dual, |e, forward| match ext.dual.edge_origin[e] {
        EdgeOrigin::DualEdge { .. } => real(T::one()),
        EdgeOrigin::DualCycle { dart } => {
            let half = iso.theta_boundary[dart].unwrap() / two;
            let (a, _) = ext.dual.map.edge_endpoints(e);
            let from = if forward { a } else { ext.dual.map.edge_endpoints(e).1 };
            // from u_d towards the next split vertex: e^{-i t/2}; back: e^{+i t/2}
            if ext.dual.vertex_class[from] == (VertexClass::SplitDual { dart }) {
                cis(-half)
            } else {
                cis(half)
            }
        }
        _ => unreachable!("extended dual edges are dual or cycle edges"),
    });
    (primal, dual)
}

/// Weights on the extended double: `rho_star` for the tree model and
/// `tau2` for the dimer model, both indexed by edge of the double.
pub fn double_weights<T: Scalar>(iso: &IsoradialData<T>, dd: &ExtendedDouble) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
    let map = &iso.map;
    let two = T::lit(2.0);
    let i = im_unit::<T>();
    let one = real(T::one());
    let mut rho = Vec::with_capacity(dd.double.edge_origin.len());
    let mut tau2 = Vec::with_capacity(dd.double.edge_origin.len());
    for o in &dd.double.edge_origin {
        let (r, t) = match *o {
            EdgeOrigin::HalfPrimal { dart } => {
                let s = real(iso.theta[map.edge(dart)].sin());
                (s, s)
            }
            EdgeOrigin::HalfDual { dart } => {
                let c = i * iso.theta[map.edge(dart)].cos();
                (c, c)
            }
            EdgeOrigin::BoundaryPrimal { dart } => {
                let tb = iso.theta_boundary[dart].unwrap();
                (cis(-tb) - one, real(two * (tb / two).sin()))
            }
            EdgeOrigin::BoundaryDualOpen { dart } => {
                let tb = iso.theta_boundary[dart].unwrap();
                (one, i * cis(tb / two))
            }
            EdgeOrigin::SplitEdge { dart } => {
                let tb = iso.theta_boundary[dart].unwrap();
                (one, i * cis(-tb / two))
            }
            _ => unreachable!("extended double edges carry half-edge provenance"),
        };
        rho.push(r);
        tau2.push(t);
    }
    (rho, tau2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use std::f64::consts::PI;

    fn iso(g: &generators::EmbeddedGraph) -> IsoradialData<f64> {
        validate_isoradial(&g.map, &g.coords, &Tolerances::default()).unwrap()
    }

    #[test]
    fn half_angles_of_corpus() {
        let c4 = iso(&generators::cycle(4).unwrap());
        assert!(c4.theta.iter().all(|t| (t - PI / 4.0).abs() < 1e-12));
        assert!(c4.regular);
        let c3 = iso(&generators::cycle(3).unwrap());
        assert!(c3.theta.iter().all(|t| (t - PI / 6.0).abs() < 1e-12));
        let grid = iso(&generators::grid(3, 3).unwrap());
        assert!(grid.theta.iter().all(|t| (t - PI / 4.0).abs() < 1e-12));
    }

    #[test]
    fn boundary_angles_close_and_match_geometry() {
        for (g, expected) in [
            (generators::cycle(4).unwrap(), Some(PI / 2.0)),
            (generators::cycle(3).unwrap(), Some(2.0 * PI / 3.0)),
            (generators::grid(3, 3).unwrap(), None),
            (generators::wheel().unwrap(), None),
            (generators::rhombic(3, 2, 1, 3).unwrap(), None),
        ] {
            let data = iso(&g);
            assert!(data.closure_residual() < 1e-12, "{}", g.name);
            assert!(data.boundary_mismatches(1e-9).is_empty(), "{}", g.name);
            if let Some(x) = expected {
                for d in data.map.outer_darts() {
                    assert!((data.theta_boundary[d].unwrap() - x).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn off_circle_vertex_is_rejected() {
        let g = generators::cycle(4).unwrap();
        let mut coords = g.coords.clone();
        coords[0] = [1.1, 0.0];
        assert!(matches!(
            validate_isoradial(&g.map, &coords, &Tolerances::default()),
            Err(Error::NotIsoradial(_))
        ));
    }

    #[test]
    fn coupling_values() {
        assert!((coupling(PI / 4.0) - 0.5 * (1.0 + 2f64.sqrt()).ln()).abs() < 1e-14);
        assert!((coupling(PI / 6.0) - 0.25 * 3f64.ln()).abs() < 1e-14);
        assert!((coupling(PI / 3.0) - 0.5 * (2.0 + 3f64.sqrt()).ln()).abs() < 1e-14);
    }

    #[test]
    fn critical_dimer_weights_are_cos_and_sin() {
        for t in [0.1, PI / 6.0, PI / 4.0, 1.3] {
            let j = coupling(t);
            assert!((1.0 / (2.0 * j).cosh() - t.cos()).abs() < 1e-13);
            assert!(((2.0 * j).tanh() - t.sin()).abs() < 1e-13);
        }
    }

    #[test]
    fn single_precision_embedding() {
        let g = generators::grid(3, 3).unwrap();
        let coords: Vec<[f32; 2]> = g.coords.iter().map(|p| [p[0] as f32, p[1] as f32]).collect();
        let data = validate_isoradial(&g.map, &coords, &Tolerances::single_precision()).unwrap();
        assert!(data
            .theta
            .iter()
            .all(|t| (t - std::f32::consts::FRAC_PI_4).abs() < 1e-5));
    }
}
