//! Phases, flatness and the Kasteleyn matrix of the decorated graph `G^Q`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::isoradial::{dimer_weights, IsoradialData};
use crate::oracles::{dimer_z, ComplexMatrix, EnumCaps, SpinGraph};
use crate::planar::{double_graph_q, DerivedMap, EdgeOrigin, PlanarMap, VertexClass};
use crate::report::Check;
use crate::scalar::{cis, im_unit, real, Scalar, Tolerances};

/// Phase per edge of `G^Q`, in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct Phasing<T: Scalar> {
    pub phase: Vec<T>,
}

pub fn assign_phases<T: Scalar>(gq: &DerivedMap, iso: &IsoradialData<T>) -> Result<Phasing<T>> {
    let map = &iso.map;
    let three_halves = T::lit(1.5) * T::PI();
    let phase = gq
        .edge_origin
        .iter()
        .enumerate()
        .map(|(k, o)| match *o {
            EdgeOrigin::CrossesDual { .. } => Ok(T::zero()),
            EdgeOrigin::CrossesPrimal { .. } => Ok(T::FRAC_PI_2()),
            EdgeOrigin::External { dart, boundary } => {
                let t = iso.theta[map.edge(dart)];
                if boundary {
                    let tb = iso.theta_boundary[dart].ok_or(Error::MissingProvenance(k))?;
                    Ok(three_halves - (t + tb))
                } else {
                    Ok(three_halves - t)
                }
            }
            _ => Err(Error::MissingProvenance(k)),
        })
        .collect::<Result<_>>()?;
    Ok(Phasing { phase })
}

/// Kasteleyn curvature of a face: with the boundary read clockwise as
/// `w1 b1 ... wk bk`, `(-1)^(k-1)` times the phases of the edges leaving
/// whites over those leaving blacks.
pub fn curvature<T: Scalar>(gq: &DerivedMap, phasing: &Phasing<T>, face: usize) -> Result<Complex<T>> {
    let m = &gq.map;
    if m.outer_dart().is_some() && face == m.outer_face() {
        return Err(Error::NotIsoradial("curvature of the outer face is undefined".into()));
    }
    let darts = m.face_darts(face);
    let k = darts.len() / 2;
    // faces are traced counterclockwise; read backwards each edge starts
    // at the head of its dart
    let mut c = real(T::one());
    for &d in darts {
        let z = cis(phasing.phase[m.edge(d)]);
        if gq.is_white(m.head(d)) {
            c *= z;
        } else {
            c /= z;
        }
    }
    Ok(if k.is_multiple_of(2) { -c } else { c })
}

#[derive(Debug, Clone)]
pub struct FlatnessReport {
    /// `(face, |C(F) - 1|)` for every inner face.
    pub faces: Vec<(usize, f64)>,
    pub pass: bool,
}

impl FlatnessReport {
    pub fn worst(&self) -> f64 {
        self.faces.iter().map(|f| f.1).fold(0.0, f64::max)
    }

    pub fn failing(&self, tol: f64) -> Vec<usize> {
        self.faces.iter().filter(|f| f.1 > tol).map(|f| f.0).collect()
    }
}

pub fn check_flat<T: Scalar>(gq: &DerivedMap, phasing: &Phasing<T>, tol: f64) -> FlatnessReport {
    let faces: Vec<(usize, f64)> = gq
        .map
        .inner_faces()
        .into_iter()
        .map(|f| {
            let c = curvature(gq, phasing, f).expect("inner face");
            (f, (c - real(T::one())).norm().to_f64_lossy())
        })
        .collect();
    let pass = faces.iter().all(|f| f.1 <= tol);
    FlatnessReport { faces, pass }
}

/// Rows are the whites `W(d)`; column `c` is the black `B(sigma c)`, so
/// that the external edge of every white sits on the diagonal.
#[derive(Debug, Clone)]
pub struct KasteleynMatrix<T: Scalar> {
    pub matrix: ComplexMatrix<T>,
    /// Vertex of `G^Q` for each row.
    pub white: Vec<usize>,
    /// Vertex of `G^Q` for each column.
    pub black: Vec<usize>,
}

/// Entry of edge `k` is `weight[k] * e^{i phase[k]}`.
pub fn build_kasteleyn<T: Scalar>(
    map: &PlanarMap,
    gq: &DerivedMap,
    weight: &[T],
    phasing: &Phasing<T>,
) -> KasteleynMatrix<T> {
    let n = map.num_darts();
    let mut k = ComplexMatrix::zeros(n, n);
    let white: Vec<usize> = (0..n).collect();
    let black: Vec<usize> = (0..n).map(|c| n + map.sigma(c)).collect();
    for (e, (&w, &p)) in weight.iter().zip(&phasing.phase).enumerate() {
        let (wv, bv) = gq.map.edge_endpoints(e);
        let VertexClass::QuadBlack { dart } = gq.vertex_class[bv] else {
            unreachable!("edges of G^Q run white to black");
        };
        k[(wv, map.sigma_inv(dart))] += cis(p) * w;
    }
    k.row_labels = (0..n).map(|d| format!("W{d}")).collect();
    k.col_labels = (0..n).map(|c| format!("B{}", map.sigma(c))).collect();
    KasteleynMatrix {
        matrix: k,
        white,
        black,
    }
}

/// Determinant of `K` with its modulus, argument and realness ratio.
#[derive(Debug, Clone, Copy)]
pub struct DetReport<T: Scalar> {
    pub det: Complex<T>,
    pub modulus: T,
    pub arg: T,
    /// `|Im det| / |det|`.
    pub imag_ratio: f64,
}

pub fn dimer_z_det<T: Scalar>(k: &KasteleynMatrix<T>, tol: &Tolerances) -> Result<DetReport<T>> {
    let det = k.matrix.det(tol.pivot)?;
    let modulus = det.norm();
    let imag_ratio = if modulus > T::zero() {
        (det.im.abs() / modulus).to_f64_lossy()
    } else {
        0.0
    };
    Ok(DetReport {
        det,
        modulus,
        arg: det.arg(),
        imag_ratio,
    })
}

/// Sum of the three entries in the row of each white vertex, with the
/// expected value: 0 inside, `-i e^{-i theta}(e^{-i theta_bd} - 1)` on the
/// boundary.
pub fn white_sums<T: Scalar>(k: &KasteleynMatrix<T>, iso: &IsoradialData<T>) -> Vec<(usize, Complex<T>, Complex<T>)> {
    let map = &iso.map;
    let i = im_unit::<T>();
    (0..k.matrix.rows())
        .map(|d| {
            let sum = k.matrix.row(d).iter().fold(real(T::zero()), |a, &b| a + b);
            let expected = match iso.theta_boundary[d] {
                Some(tb) if map.is_outer(d) => -i * cis(-iso.theta[map.edge(d)]) * (cis(-tb) - real(T::one())),
                _ => real(T::zero()),
            };
            (d, sum, expected)
        })
        .collect()
}

/// Everything the Kasteleyn route produces for a graph.
#[derive(Debug, Clone)]
pub struct KasteleynData<T: Scalar> {
    pub gq: DerivedMap,
    pub nu: Vec<T>,
    pub phasing: Phasing<T>,
    pub k: KasteleynMatrix<T>,
}

/// Builds `G^Q`, critical weights, phases and `K`.
pub fn critical_kasteleyn<T: Scalar>(iso: &IsoradialData<T>) -> Result<KasteleynData<T>> {
    let gq = double_graph_q(&iso.map);
    let j = crate::isoradial::critical_couplings(iso)?;
    let nu = dimer_weights(&iso.map, &gq, &j)?;
    let phasing = assign_phases(&gq, iso)?;
    let k = build_kasteleyn(&iso.map, &gq, &nu, &phasing);
    Ok(KasteleynData { gq, nu, phasing, k })
}

/// Brute-force dimer partition function of `G^Q` for couplings `j`.
pub fn dimer_z_gq<T: Scalar>(map: &PlanarMap, gq: &DerivedMap, j: &[T], caps: &EnumCaps) -> Result<T> {
    let nu = dimer_weights(map, gq, j)?;
    let edges: Vec<(usize, usize)> = (0..gq.map.num_edges()).map(|e| gq.map.edge_endpoints(e)).collect();
    let w: Vec<Complex<T>> = nu.into_iter().map(real).collect();
    Ok(dimer_z(gq.map.num_vertices(), &edges, &w, caps)?.re)
}

/// Squared Ising partition function against the dimer model on `G^Q`,
/// for each coupling vector given (both sides by enumeration).
pub fn verify_squared_ising<T: Scalar>(
    map: &PlanarMap,
    couplings: &[(String, Vec<T>)],
    caps: &EnumCaps,
    tol: f64,
) -> Result<Vec<Check>> {
    let gq = double_graph_q(map);
    let two = T::lit(2.0);
    couplings
        .iter()
        .map(|(label, j)| {
            let z = SpinGraph::from_map(map, j).ising_z(caps)?;
            let dimer = dimer_z_gq(map, &gq, j, caps)?;
            let cosh: T = j.iter().fold(T::one(), |a, &x| a * (two * x).cosh());
            let rhs = two.powi(map.num_vertices() as i32) * cosh * dimer;
            Ok(
                Check::relative(format!("ising_squared_vs_dimer[{label}]"), real(z * z), real(rhs), tol)
                    .with_route("spin enumeration vs matching enumeration"),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::isoradial::validate_isoradial;
    use std::f64::consts::PI;

    fn data(g: &generators::EmbeddedGraph) -> (IsoradialData<f64>, KasteleynData<f64>) {
        let iso = validate_isoradial(&g.map, &g.coords, &Tolerances::default()).unwrap();
        let kd = critical_kasteleyn(&iso).unwrap();
        (iso, kd)
    }

    #[test]
    fn phase_formula_values() {
        let (_, kd) = data(&generators::cycle(4).unwrap());
        for (o, &p) in kd.gq.edge_origin.iter().zip(&kd.phasing.phase) {
            let expected = match o {
                EdgeOrigin::CrossesDual { .. } => 0.0,
                EdgeOrigin::CrossesPrimal { .. } => PI / 2.0,
                EdgeOrigin::External { boundary: true, .. } => 3.0 * PI / 4.0,
                EdgeOrigin::External { .. } => 5.0 * PI / 4.0,
                _ => unreachable!(),
            };
            assert!((p - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn corpus_is_flat() {
        for g in generators::corpus().iter().chain([&generators::wheel().unwrap()]) {
            let (_, kd) = data(g);
            let rep = check_flat(&kd.gq, &kd.phasing, 1e-9);
            assert!(rep.pass, "{}: worst {}", g.name, rep.worst());
        }
    }

    #[test]
    fn perturbed_phase_breaks_flatness() {
        let (_, kd) = data(&generators::grid(3, 3).unwrap());
        let mut bad = kd.phasing.clone();
        bad.phase[0] += 0.3;
        let rep = check_flat(&kd.gq, &bad, 1e-9);
        assert_eq!(rep.failing(1e-9).len(), 2);
    }

    #[test]
    fn quadrangle_entries() {
        let (_, kd) = data(&generators::cycle(3).unwrap());
        let row = kd.k.matrix.row(0);
        let nonzero: Vec<_> = row.iter().filter(|z| z.norm() > 0.0).collect();
        assert_eq!(nonzero.len(), 3);
        let s = (PI / 6.0).sin();
        let c = (PI / 6.0).cos();
        assert!(nonzero.iter().any(|z| (**z - Complex::new(s, 0.0)).norm() < 1e-14));
        assert!(nonzero.iter().any(|z| (**z - Complex::new(0.0, c)).norm() < 1e-14));
    }

    #[test]
    fn white_sums_match_closed_form() {
        for g in generators::corpus() {
            let (iso, kd) = data(&g);
            for (_, s, e) in white_sums(&kd.k, &iso) {
                assert!((s - e).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn gauge_changes_det_by_the_factor() {
        let (_, kd) = data(&generators::cycle(4).unwrap());
        let tol = Tolerances::default();
        let base = kd.k.matrix.det(tol.pivot).unwrap();
        let mut k2 = kd.k.matrix.clone();
        let u = cis(0.7);
        for c in 0..k2.cols() {
            k2[(2, c)] *= u;
        }
        let det2 = k2.det(tol.pivot).unwrap();
        assert!((det2 - base * u).norm() < 1e-12);
        assert!((det2.norm() - base.norm()).abs() < 1e-12);
    }
}
