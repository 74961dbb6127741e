//! Isoradially embedded test graphs.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::planar::PlanarMap;

/// A map with vertex coordinates and, when known, exact rhombus
/// half-angles stored as fractions `[p, q]` of pi, one per edge.
#[derive(Debug, Clone)]
pub struct EmbeddedGraph {
    pub name: String,
    pub map: PlanarMap,
    pub coords: Vec<[f64; 2]>,
    pub theta_pi: Option<Vec<[i64; 2]>>,
}

/// Regular `n`-gon inscribed in the unit circle.
pub fn cycle(n: usize) -> Result<EmbeddedGraph> {
    if n < 3 {
        return Err(Error::BadParams(format!(
            "a cycle needs at least 3 vertices to be simple, got {n}"
        )));
    }
    let coords = (0..n)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / n as f64;
            [a.cos(), a.sin()]
        })
        .collect();
    let edges: Vec<(usize, usize)> = (0..n).map(|k| (k, (k + 1) % n)).collect();
    let rot: Vec<Vec<usize>> = (0..n).map(|k| vec![(k + 1) % n, (k + n - 1) % n]).collect();
    let map = PlanarMap::build(n, &edges, &rot, (1, 0))?;
    let n = n as i64;
    Ok(EmbeddedGraph {
        name: format!("cycle-{n}"),
        map,
        coords,
        theta_pi: Some(vec![reduce([n - 2, 2 * n]); n as usize]),
    })
}

/// `w` by `h` vertices of the square lattice with spacing sqrt(2).
pub fn grid(w: usize, h: usize) -> Result<EmbeddedGraph> {
    rectangular(w, h, [1, 4], "grid")
}

/// `w` by `h` vertices of a rectangular lattice whose faces are inscribed
/// in unit circles: horizontal spacing `2 cos a`, vertical `2 sin a`, with
/// `a = (p/q) pi` strictly between 0 and pi/2.
pub fn rhombic(w: usize, h: usize, p: i64, q: i64) -> Result<EmbeddedGraph> {
    if q <= 0 || p <= 0 || 2 * p >= q {
        return Err(Error::BadParams(format!(
            "angle {p}/{q} pi must lie strictly between 0 and pi/2"
        )));
    }
    rectangular(w, h, reduce([p, q]), "rhombic")
}

fn rectangular(w: usize, h: usize, alpha: [i64; 2], name: &str) -> Result<EmbeddedGraph> {
    if w < 2 || h < 2 {
        return Err(Error::BadParams(format!(
            "lattice patch needs at least 2x2 vertices, got {w}x{h}"
        )));
    }
    let a = PI * alpha[0] as f64 / alpha[1] as f64;
    let (dx, dy) = (2.0 * a.cos(), 2.0 * a.sin());
    let id = |i: usize, j: usize| j * w + i;
    let mut coords = Vec::with_capacity(w * h);
    for j in 0..h {
        for i in 0..w {
            coords.push([i as f64 * dx, j as f64 * dy]);
        }
    }
    let mut edges = Vec::new();
    let mut theta_pi = Vec::new();
    let vertical = reduce([alpha[1] - 2 * alpha[0], 2 * alpha[1]]);
    for j in 0..h {
        for i in 0..w - 1 {
            edges.push((id(i, j), id(i + 1, j)));
            theta_pi.push(alpha);
        }
    }
    for j in 0..h - 1 {
        for i in 0..w {
            edges.push((id(i, j), id(i, j + 1)));
            theta_pi.push(vertical);
        }
    }
    let mut rot = vec![Vec::new(); w * h];
    for j in 0..h {
        for i in 0..w {
            let r = &mut rot[id(i, j)];
            if i + 1 < w {
                r.push(id(i + 1, j));
            }
            if j + 1 < h {
                r.push(id(i, j + 1));
            }
            if i > 0 {
                r.push(id(i - 1, j));
            }
            if j > 0 {
                r.push(id(i, j - 1));
            }
        }
    }
    let map = PlanarMap::build(w * h, &edges, &rot, (id(1, 0), id(0, 0)))?;
    Ok(EmbeddedGraph {
        name: format!("{name}-{w}x{h}"),
        map,
        coords,
        theta_pi: Some(theta_pi),
    })
}

/// Hexagonal patch of the triangular lattice: a centre joined to six rim
/// vertices at distance sqrt(3). All faces are equilateral triangles.
pub fn wheel() -> Result<EmbeddedGraph> {
    let s = 3f64.sqrt();
    let mut coords = vec![[0.0, 0.0]];
    for k in 0..6 {
        let a = PI * k as f64 / 3.0;
        coords.push([s * a.cos(), s * a.sin()]);
    }
    let rim = |k: usize| 1 + k % 6;
    let mut edges: Vec<(usize, usize)> = (0..6).map(|k| (0, rim(k))).collect();
    edges.extend((0..6).map(|k| (rim(k), rim(k + 1))));
    let mut rot = vec![(0..6).map(rim).collect::<Vec<_>>()];
    for k in 0..6 {
        rot.push(vec![rim(k + 1), 0, rim(k + 5)]);
    }
    let map = PlanarMap::build(7, &edges, &rot, (rim(1), rim(0)))?;
    Ok(EmbeddedGraph {
        name: "wheel-6".into(),
        map,
        coords,
        theta_pi: Some(vec![[1, 6]; 12]),
    })
}

/// Builds a generator from its CLI name and integer parameters.
pub fn by_name(name: &str, params: &[i64]) -> Result<EmbeddedGraph> {
    let us = |i: usize| -> Result<usize> {
        let v = *params
            .get(i)
            .ok_or_else(|| Error::BadParams(format!("{name}: missing parameter {}", i + 1)))?;
        usize::try_from(v).map_err(|_| Error::BadParams(format!("{name}: negative parameter {v}")))
    };
    let arity = |k: usize| -> Result<()> {
        if params.len() == k {
            Ok(())
        } else {
            Err(Error::BadParams(format!(
                "{name} takes {k} parameters, got {}",
                params.len()
            )))
        }
    };
    match name {
        "cycle" => {
            arity(1)?;
            cycle(us(0)?)
        }
        "grid" => {
            arity(2)?;
            grid(us(0)?, us(1)?)
        }
        "rhombic" => {
            arity(4)?;
            rhombic(us(0)?, us(1)?, params[2], params[3])
        }
        "wheel" => {
            arity(0)?;
            wheel()
        }
        other => Err(Error::UnknownGenerator(other.to_string())),
    }
}

/// The three graphs every acceptance check runs on.
pub fn corpus() -> Vec<EmbeddedGraph> {
    vec![
        cycle(3).expect("C3"),
        cycle(4).expect("C4"),
        grid(3, 3).expect("3x3 grid"),
    ]
}

fn reduce([p, q]: [i64; 2]) -> [i64; 2] {
    let (mut a, mut b) = (p.abs(), q.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    let g = a.max(1);
    [p / g, q / g]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_angles_are_reduced() {
        assert_eq!(cycle(4).unwrap().theta_pi.unwrap()[0], [1, 4]);
        assert_eq!(cycle(3).unwrap().theta_pi.unwrap()[0], [1, 6]);
        let r = rhombic(2, 3, 1, 3).unwrap().theta_pi.unwrap();
        assert!(r.contains(&[1, 3]) && r.contains(&[1, 6]));
    }

    #[test]
    fn bad_parameters_are_rejected() {
        assert!(matches!(cycle(2), Err(Error::BadParams(_))));
        assert!(matches!(grid(1, 3), Err(Error::BadParams(_))));
        assert!(matches!(rhombic(2, 2, 1, 2), Err(Error::BadParams(_))));
        assert!(matches!(by_name("torus", &[]), Err(Error::UnknownGenerator(_))));
    }

    #[test]
    fn wheel_shape() {
        let w = wheel().unwrap();
        assert_eq!(w.map.num_faces(), 7);
        assert_eq!(w.map.boundary_vertices().len(), 6);
    }
}
