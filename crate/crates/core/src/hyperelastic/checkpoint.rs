//! Plain-text field checkpoints.
//!
//! ```text
//! # hyperequil checkpoint v1
//! mesh_hash <sha256 of the mesh text export>
//! k 1
//! mu <μ>
//! lambda <λ | inf>
//! gamma <γ>
//! level <refinement level>
//! displacement <n>     then n lines: ux uy
//! pressure <m>         then m lines: p
//! ```
//! Floats are written in shortest round-trip form, so reading a checkpoint
//! back reproduces the coefficients bit for bit.

use std::fmt::Write as _;

use super::{Field, Material};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::Vec2;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub mesh_hash: String,
    pub material: Material,
    pub gamma: f64,
    pub level: usize,
    pub field: Field,
}

impl Checkpoint {
    pub fn new(mesh: &Mesh, material: Material, gamma: f64, level: usize, field: Field) -> Checkpoint {
        Checkpoint { mesh_hash: mesh.content_hash(), material, gamma, level, field }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("# hyperequil checkpoint v1\n");
        let _ = writeln!(s, "mesh_hash {}", self.mesh_hash);
        let _ = writeln!(s, "k 1");
        let _ = writeln!(s, "mu {:e}", self.material.mu);
        match self.material.lambda {
            Some(l) => {
                let _ = writeln!(s, "lambda {l:e}");
            }
            None => s.push_str("lambda inf\n"),
        }
        let _ = writeln!(s, "gamma {:e}", self.gamma);
        let _ = writeln!(s, "level {}", self.level);
        let _ = writeln!(s, "displacement {}", self.field.u.len());
        for u in &self.field.u {
            let _ = writeln!(s, "{:e} {:e}", u.x, u.y);
        }
        let _ = writeln!(s, "pressure {}", self.field.p.len());
        for p in &self.field.p {
            let _ = writeln!(s, "{p:e}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Checkpoint> {
        let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
        let mut key = |name: &str| -> Result<String> {
            let line = lines.next().ok_or_else(|| Error::Parse(format!("missing {name}")))?;
            let (k, v) = line.split_once(' ').ok_or_else(|| Error::Parse(format!("malformed line {line:?}")))?;
            if k != name {
                return Err(Error::Parse(format!("expected {name}, found {k}")));
            }
            Ok(v.trim().to_string())
        };
        fn num<T: std::str::FromStr>(s: &str) -> Result<T> {
            s.parse().map_err(|_| Error::Parse(format!("bad number {s:?}")))
        }
        let mesh_hash = key("mesh_hash")?;
        if key("k")? != "1" {
            return Err(Error::Parse("only k = 1 is supported".into()));
        }
        let mu: f64 = num(&key("mu")?)?;
        let lambda = match key("lambda")?.as_str() {
            "inf" => None,
            v => Some(num(v)?),
        };
        let material = Material::new(mu, lambda)?;
        let gamma = num(&key("gamma")?)?;
        let level = num(&key("level")?)?;
        let nu: usize = num(&key("displacement")?)?;
        let mut rest = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()).skip(7);
        let mut u = Vec::with_capacity(nu);
        for _ in 0..nu {
            let line = rest.next().ok_or_else(|| Error::Parse("truncated displacement".into()))?;
            let mut it = line.split_whitespace();
            let x = num(it.next().unwrap_or(""))?;
            let y = num(it.next().unwrap_or(""))?;
            u.push(Vec2::new(x, y));
        }
        let header = rest.next().ok_or_else(|| Error::Parse("missing pressure".into()))?;
        let np: usize = match header.split_once(' ') {
            Some(("pressure", n)) => num(n.trim())?,
            _ => return Err(Error::Parse("expected pressure header".into())),
        };
        let p = (0..np)
            .map(|_| rest.next().ok_or_else(|| Error::Parse("truncated pressure".into())).and_then(|l| num(l.trim())))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Checkpoint { mesh_hash, material, gamma, level, field: Field { u, p } })
    }

    /// Checks that the checkpoint was written for `mesh`.
    pub fn verify_mesh(&self, mesh: &Mesh) -> Result<()> {
        if self.mesh_hash != mesh.content_hash() {
            return Err(Error::InvalidInput("checkpoint mesh hash does not match the mesh".into()));
        }
        if self.field.u.len() != mesh.num_vertices() + mesh.num_edges() || self.field.p.len() != mesh.num_vertices() {
            return Err(Error::InvalidInput("checkpoint size does not match the mesh".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_cook_mesh;

    #[test]
    fn round_trip_is_bit_exact() {
        let mesh = build_cook_mesh(1);
        let mut field = Field::zeros(&mesh);
        for (i, u) in field.u.iter_mut().enumerate() {
            *u = Vec2::new((i as f64).sin() / 3.0, 1e-17 * i as f64 - 0.1);
        }
        for (i, p) in field.p.iter_mut().enumerate() {
            *p = (i as f64 * 0.7).exp() * std::f64::consts::PI;
        }
        for mat in [Material::incompressible(1.0), Material::compressible(0.3, 7.25)] {
            let c = Checkpoint::new(&mesh, mat, 0.2, 1, field.clone());
            let back = Checkpoint::from_text(&c.to_text()).unwrap();
            assert_eq!(back, c);
            back.verify_mesh(&mesh).unwrap();
        }
        let c = Checkpoint::new(&mesh, Material::incompressible(1.0), 0.2, 1, field);
        assert!(c.verify_mesh(&build_cook_mesh(2)).is_err());
    }
}
