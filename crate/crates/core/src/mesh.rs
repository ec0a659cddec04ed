//! Triangulations of the reference configuration, uniform refinement and the
//! vertex-patch partition of unity used by the local equilibration.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::Vec2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryLabel {
    Dirichlet,
    Neumann,
}

impl BoundaryLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryLabel::Dirichlet => "DIRICHLET",
            BoundaryLabel::Neumann => "NEUMANN",
        }
    }
}

/// Label of a boundary edge plus a user tag identifying the geometric
/// segment it lies on (used to attach tractions to parts of Γ_N).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BoundarySegment {
    pub label: BoundaryLabel,
    pub tag: u8,
}

/// Edge with a fixed unit normal. For interior edges the normal is the
/// tangent from the lower to the higher vertex index rotated by +90° and
/// points into `plus`; boundary edges carry the outward normal and `plus`
/// is `None`.
#[derive(Clone, Debug)]
pub struct Edge {
    /// Endpoints in ascending index order; the arc-length parameter runs
    /// from `vertices[0]` to `vertices[1]`.
    pub vertices: [usize; 2],
    pub normal: Vec2,
    pub length: f64,
    pub minus: usize,
    pub plus: Option<usize>,
    pub boundary: Option<BoundarySegment>,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.plus.is_none()
    }

    pub fn label(&self) -> Option<BoundaryLabel> {
        self.boundary.map(|b| b.label)
    }
}

#[derive(Clone, Debug)]
pub struct Mesh {
    vertices: Vec<Vec2>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    /// Local edge `k` of a triangle is the edge opposite local vertex `k`.
    triangle_edges: Vec<[usize; 3]>,
    on_dirichlet: Vec<bool>,
    on_neumann: Vec<bool>,
}

impl Mesh {
    /// Builds a mesh from counterclockwise triangles. `classify` is called
    /// with the endpoints (ascending) of every boundary edge.
    pub fn from_parts<F>(vertices: Vec<Vec2>, triangles: Vec<[usize; 3]>, classify: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> Option<BoundarySegment>,
    {
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidInput(format!("triangle {t} references a missing vertex")));
            }
            let [a, b, c] = tri.map(|v| vertices[v]);
            if signed_area(a, b, c) <= 0.0 {
                return Err(Error::InvalidInput(format!("triangle {t} is not positively oriented")));
            }
        }

        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut adjacency: Vec<Vec<usize>> = Vec::new();
        let mut keys: Vec<(usize, usize)> = Vec::new();
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut local = [0; 3];
            for (k, slot) in local.iter_mut().enumerate() {
                let a = tri[(k + 1) % 3];
                let b = tri[(k + 2) % 3];
                let key = (a.min(b), a.max(b));
                let e = *index.entry(key).or_insert_with(|| {
                    keys.push(key);
                    adjacency.push(Vec::new());
                    keys.len() - 1
                });
                adjacency[e].push(t);
                *slot = e;
            }
            triangle_edges.push(local);
        }

        let mut edges = Vec::with_capacity(keys.len());
        let mut on_dirichlet = vec![false; vertices.len()];
        let mut on_neumann = vec![false; vertices.len()];
        for (e, &(a, b)) in keys.iter().enumerate() {
            let tangent = vertices[b] - vertices[a];
            let length = tangent.norm();
            let rotated = Vec2::new(-tangent.y, tangent.x) / length;
            let mid = (vertices[a] + vertices[b]) * 0.5;
            let side = |t: usize| rotated.dot(&(centroid(&vertices, &triangles[t]) - mid));
            let edge = match *adjacency[e].as_slice() {
                [t] => {
                    let segment = classify(a, b).ok_or_else(|| {
                        Error::InvalidInput(format!("boundary edge ({a}, {b}) has no label"))
                    })?;
                    let flags = match segment.label {
                        BoundaryLabel::Dirichlet => &mut on_dirichlet,
                        BoundaryLabel::Neumann => &mut on_neumann,
                    };
                    flags[a] = true;
                    flags[b] = true;
                    let normal = if side(t) > 0.0 { -rotated } else { rotated };
                    Edge { vertices: [a, b], normal, length, minus: t, plus: None, boundary: Some(segment) }
                }
                [t0, t1] => {
                    let (minus, plus) = if side(t0) > 0.0 { (t1, t0) } else { (t0, t1) };
                    Edge { vertices: [a, b], normal: rotated, length, minus, plus: Some(plus), boundary: None }
                }
                _ => {
                    return Err(Error::InvalidInput(format!("edge ({a}, {b}) is shared by more than two triangles")))
                }
            };
            edges.push(edge);
        }

        let mesh = Mesh { vertices, triangles, edges, triangle_edges, on_dirichlet, on_neumann };
        if !mesh.edges.iter().any(|e| e.label() == Some(BoundaryLabel::Dirichlet)) {
            return Err(Error::InvalidInput("the Dirichlet boundary is empty".into()));
        }
        if !mesh.edges.iter().any(|e| e.label() == Some(BoundaryLabel::Neumann)) {
            return Err(Error::InvalidInput("the Neumann boundary is empty".into()));
        }
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> Vec2 {
        self.vertices[v]
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn triangle(&self, t: usize) -> [usize; 3] {
        self.triangles[t]
    }

    pub fn triangle_coords(&self, t: usize) -> [Vec2; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.triangle_edges[t]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Vertex lies on (the closure of) at least one Neumann edge.
    pub fn on_neumann(&self, v: usize) -> bool {
        self.on_neumann[v]
    }

    pub fn on_dirichlet(&self, v: usize) -> bool {
        self.on_dirichlet[v]
    }

    pub fn boundary_edges(&self) -> impl Iterator<Item = (usize, &Edge)> {
        self.edges.iter().enumerate().filter(|(_, e)| e.is_boundary())
    }

    pub fn edges_with_label(&self, label: BoundaryLabel) -> impl Iterator<Item = (usize, &Edge)> {
        self.boundary_edges().filter(move |(_, e)| e.label() == Some(label))
    }

    /// Sorted vertex neighbours of every vertex.
    pub fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for e in &self.edges {
            let [a, b] = e.vertices;
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Triangles incident to every vertex, ascending.
    pub fn vertex_triangles(&self) -> Vec<Vec<usize>> {
        let mut star = vec![Vec::new(); self.vertices.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                star[v].push(t);
            }
        }
        star
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_coords(t);
        signed_area(a, b, c)
    }

    pub fn centroid(&self, t: usize) -> Vec2 {
        centroid(&self.vertices, &self.triangles[t])
    }

    /// Local index (0..3) of edge `e` within triangle `t`.
    pub fn local_edge(&self, t: usize, e: usize) -> Option<usize> {
        self.triangle_edges[t].iter().position(|&x| x == e)
    }

    /// Red refinement: every triangle is split into four through its edge
    /// midpoints. New vertex `num_vertices() + e` is the midpoint of edge `e`.
    pub fn refine_uniform(&self) -> Mesh {
        let nv = self.vertices.len();
        let mut vertices = self.vertices.clone();
        vertices.extend(self.edges.iter().map(|e| (self.vertices[e.vertices[0]] + self.vertices[e.vertices[1]]) * 0.5));

        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for (t, &[a, b, c]) in self.triangles.iter().enumerate() {
            let [e0, e1, e2] = self.triangle_edges[t];
            // midpoint opposite a, b, c respectively
            let (mbc, mca, mab) = (nv + e0, nv + e1, nv + e2);
            triangles.push([a, mab, mca]);
            triangles.push([mab, b, mbc]);
            triangles.push([mca, mbc, c]);
            triangles.push([mab, mbc, mca]);
        }

        let mut inherited: HashMap<(usize, usize), BoundarySegment> = HashMap::new();
        for (e, edge) in self.boundary_edges() {
            let seg = edge.boundary.expect("boundary edge carries a segment");
            let m = nv + e;
            for v in edge.vertices {
                inherited.insert((v.min(m), v.max(m)), seg);
            }
        }
        Mesh::from_parts(vertices, triangles, |a, b| inherited.get(&(a, b)).copied())
            .expect("refinement of a valid mesh is valid")
    }

    /// Plain-text export.
    ///
    /// ```text
    /// # hyperequil mesh v1
    /// vertices <n>            then n lines: index x y
    /// triangles <m>           then m lines: index v0 v1 v2   (counterclockwise)
    /// boundary_edges <k>      then k lines: v0 v1 label tag
    /// ```
    pub fn to_text(&self) -> String {
        let mut s = String::from("# hyperequil mesh v1\n");
        let _ = writeln!(s, "vertices {}", self.vertices.len());
        for (i, x) in self.vertices.iter().enumerate() {
            let _ = writeln!(s, "{i} {:e} {:e}", x.x, x.y);
        }
        let _ = writeln!(s, "triangles {}", self.triangles.len());
        for (i, t) in self.triangles.iter().enumerate() {
            let _ = writeln!(s, "{i} {} {} {}", t[0], t[1], t[2]);
        }
        let boundary: Vec<_> = self.boundary_edges().collect();
        let _ = writeln!(s, "boundary_edges {}", boundary.len());
        for (_, e) in boundary {
            let seg = e.boundary.expect("boundary edge carries a segment");
            let _ = writeln!(s, "{} {} {} {}", e.vertices[0], e.vertices[1], seg.label.as_str(), seg.tag);
        }
        s
    }

    /// Parses the output of [`Mesh::to_text`].
    pub fn from_text(text: &str) -> Result<Mesh> {
        let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
        let mut next = |what: &str| -> Result<Vec<&str>> {
            lines
                .next()
                .map(|l| l.split_whitespace().collect())
                .ok_or_else(|| Error::Parse(format!("truncated input reading {what}")))
        };
        fn num<T: std::str::FromStr>(s: Option<&&str>) -> Result<T> {
            s.and_then(|v| v.parse().ok()).ok_or_else(|| Error::Parse(format!("bad field {s:?}")))
        }
        fn header(fields: &[&str], name: &str) -> Result<usize> {
            if fields.first() != Some(&name) {
                return Err(Error::Parse(format!("expected {name} header")));
            }
            num(fields.get(1))
        }

        let nv = header(&next("header")?, "vertices")?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let f = next("vertices")?;
            vertices.push(Vec2::new(num(f.get(1))?, num(f.get(2))?));
        }
        let nt = header(&next("header")?, "triangles")?;
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let f = next("triangles")?;
            triangles.push([num(f.get(1))?, num(f.get(2))?, num(f.get(3))?]);
        }
        let nb = header(&next("header")?, "boundary_edges")?;
        let mut segments = HashMap::new();
        for _ in 0..nb {
            let f = next("boundary edges")?;
            let a: usize = num(f.first())?;
            let b: usize = num(f.get(1))?;
            let label = match f.get(2) {
                Some(&"DIRICHLET") => BoundaryLabel::Dirichlet,
                Some(&"NEUMANN") => BoundaryLabel::Neumann,
                other => return Err(Error::Parse(format!("unknown boundary label {other:?}"))),
            };
            segments.insert((a.min(b), a.max(b)), BoundarySegment { label, tag: num(f.get(3))? });
        }
        Mesh::from_parts(vertices, triangles, |a, b| segments.get(&(a, b)).copied())
    }

    /// SHA-256 of the plain-text export, hex encoded.
    pub fn content_hash(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Legacy VTK ASCII unstructured grid, optionally with vertex displacements
    /// added to the coordinates and per-vertex scalar data.
    pub fn write_vtk<W: Write>(
        &self,
        mut out: W,
        displacement: Option<&[Vec2]>,
        point_data: &[(&str, &[f64])],
    ) -> std::io::Result<()> {
        writeln!(out, "# vtk DataFile Version 3.0")?;
        writeln!(out, "hyperequil mesh")?;
        writeln!(out, "ASCII")?;
        writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
        writeln!(out, "POINTS {} double", self.vertices.len())?;
        for (i, x) in self.vertices.iter().enumerate() {
            let d = displacement.map_or(Vec2::zeros(), |d| d[i]);
            writeln!(out, "{:e} {:e} 0", x.x + d.x, x.y + d.y)?;
        }
        writeln!(out, "CELLS {} {}", self.triangles.len(), 4 * self.triangles.len())?;
        for t in &self.triangles {
            writeln!(out, "3 {} {} {}", t[0], t[1], t[2])?;
        }
        writeln!(out, "CELL_TYPES {}", self.triangles.len())?;
        for _ in &self.triangles {
            writeln!(out, "5")?;
        }
        if !point_data.is_empty() {
            writeln!(out, "POINT_DATA {}", self.vertices.len())?;
            for (name, values) in point_data {
                writeln!(out, "SCALARS {name} double 1")?;
                writeln!(out, "LOOKUP_TABLE default")?;
                for v in *values {
                    writeln!(out, "{v:e}")?;
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn signed_area(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
}

fn centroid(vertices: &[Vec2], tri: &[usize; 3]) -> Vec2 {
    (vertices[tri[0]] + vertices[tri[1]] + vertices[tri[2]]) / 3.0
}

/// Boundary tags of the Cook's membrane geometry.
pub mod cook {
    pub const LEFT: u8 = 0;
    pub const BOTTOM: u8 = 1;
    pub const RIGHT: u8 = 2;
    pub const TOP: u8 = 3;

    /// Corners in counterclockwise order.
    pub const CORNERS: [[f64; 2]; 4] = [[0.0, 0.0], [0.48, 0.44], [0.48, 0.6], [0.0, 0.44]];
}

/// Cook's membrane after `level` uniform refinements of the base mesh.
///
/// The base mesh splits the quadrilateral into four triangles meeting at the
/// vertex average (0.24, 0.37); the left segment is Dirichlet and the
/// bottom, right and top segments are Neumann.
pub fn build_cook_mesh(level: usize) -> Mesh {
    let mut vertices: Vec<Vec2> = cook::CORNERS.iter().map(|c| Vec2::new(c[0], c[1])).collect();
    let center = vertices.iter().sum::<Vec2>() / 4.0;
    vertices.push(center);
    let triangles = vec![[0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4]];
    let segment = |a: usize, b: usize| {
        let (label, tag) = match (a, b) {
            (0, 1) => (BoundaryLabel::Neumann, cook::BOTTOM),
            (1, 2) => (BoundaryLabel::Neumann, cook::RIGHT),
            (2, 3) => (BoundaryLabel::Neumann, cook::TOP),
            (0, 3) => (BoundaryLabel::Dirichlet, cook::LEFT),
            _ => return None,
        };
        Some(BoundarySegment { label, tag })
    };
    let mut mesh = Mesh::from_parts(vertices, triangles, segment).expect("Cook base mesh is valid");
    for _ in 0..level {
        mesh = mesh.refine_uniform();
    }
    mesh
}

pub fn refine_uniform(mesh: &Mesh) -> Mesh {
    mesh.refine_uniform()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PatchKind {
    /// ∂ω_z does not share an edge with Γ_D.
    Interior,
    Dirichlet,
}

/// Support of one modified partition-of-unity function φ_z.
#[derive(Clone, Debug)]
pub struct VertexPatch {
    pub center: usize,
    /// Neumann vertices at which φ_z is extended by the value one.
    pub adopted: Vec<usize>,
    pub kind: PatchKind,
    /// Triangles of ω_z, ascending.
    pub elements: Vec<usize>,
    /// Sides carrying jump constraints: interior sides of ω_z and sides on
    /// Γ_N in the closure of ω_z.
    pub sides: Vec<usize>,
    /// Sides on ∂ω_z \ ∂Ω where the local correction has zero normal trace.
    pub closed_sides: Vec<usize>,
    /// Sides on Γ_D ∩ ∂ω_z (normal trace left free).
    pub dirichlet_sides: Vec<usize>,
    /// Vertices of ω_z, ascending; nodes of the weak-symmetry multipliers.
    pub nodes: Vec<usize>,
}

impl VertexPatch {
    pub fn contains_element(&self, t: usize) -> bool {
        self.elements.binary_search(&t).is_ok()
    }
}

/// Modified partition of unity Σ_z φ_z ≡ 1 over the vertices off Γ_N.
#[derive(Clone, Debug)]
pub struct PartitionOfUnity {
    /// For every vertex, the patch centre whose φ equals one there.
    owner: Vec<usize>,
    patches: Vec<VertexPatch>,
    patch_of_center: HashMap<usize, usize>,
}

impl PartitionOfUnity {
    pub fn patches(&self) -> &[VertexPatch] {
        &self.patches
    }

    pub fn patch(&self, i: usize) -> &VertexPatch {
        &self.patches[i]
    }

    pub fn patch_index(&self, center: usize) -> Option<usize> {
        self.patch_of_center.get(&center).copied()
    }

    pub fn owner(&self, v: usize) -> usize {
        self.owner[v]
    }

    /// Nodal values of φ_z at the three vertices of triangle `t`.
    pub fn hat_values(&self, mesh: &Mesh, center: usize, t: usize) -> [f64; 3] {
        mesh.triangle(t).map(|v| if self.owner[v] == center { 1.0 } else { 0.0 })
    }

    /// φ_z at barycentric coordinates `bary` of triangle `t`.
    pub fn hat(&self, mesh: &Mesh, center: usize, t: usize, bary: [f64; 3]) -> f64 {
        let nodal = self.hat_values(mesh, center, t);
        nodal.iter().zip(bary).map(|(a, b)| a * b).sum()
    }

    /// Centres z with φ_z not identically zero on triangle `t`, ascending.
    pub fn centers_on(&self, mesh: &Mesh, t: usize) -> Vec<usize> {
        let mut c: Vec<usize> = mesh.triangle(t).iter().map(|&v| self.owner[v]).collect();
        c.sort_unstable();
        c.dedup();
        c
    }
}

/// Builds one patch per vertex not on Γ_N. Every Γ_N vertex is adopted by
/// its lowest-index neighbour off Γ_N.
pub fn build_patches(mesh: &Mesh) -> Result<PartitionOfUnity> {
    let nv = mesh.num_vertices();
    let neighbors = mesh.vertex_neighbors();
    let star = mesh.vertex_triangles();

    let mut owner = vec![usize::MAX; nv];
    let mut adopted: HashMap<usize, Vec<usize>> = HashMap::new();
    for v in 0..nv {
        if !mesh.on_neumann(v) {
            owner[v] = v;
        }
    }
    for v in 0..nv {
        if mesh.on_neumann(v) {
            let z = neighbors[v]
                .iter()
                .copied()
                .find(|&w| !mesh.on_neumann(w))
                .ok_or(Error::NoInteriorNeighbor { vertex: v })?;
            owner[v] = z;
            adopted.entry(z).or_default().push(v);
        }
    }

    let mut patches = Vec::new();
    let mut patch_of_center = HashMap::new();
    for z in (0..nv).filter(|&v| !mesh.on_neumann(v)) {
        let adopted = adopted.remove(&z).unwrap_or_default();
        let mut elements: Vec<usize> =
            std::iter::once(z).chain(adopted.iter().copied()).flat_map(|v| star[v].iter().copied()).collect();
        elements.sort_unstable();
        elements.dedup();

        let mut edge_ids: Vec<usize> = elements.iter().flat_map(|&t| mesh.triangle_edges(t)).collect();
        edge_ids.sort_unstable();
        edge_ids.dedup();

        let inside = |t: usize| elements.binary_search(&t).is_ok();
        let (mut sides, mut closed_sides, mut dirichlet_sides) = (Vec::new(), Vec::new(), Vec::new());
        for e in edge_ids {
            let edge = mesh.edge(e);
            match (edge.plus, edge.label()) {
                (None, Some(BoundaryLabel::Dirichlet)) => dirichlet_sides.push(e),
                (None, _) => sides.push(e),
                (Some(plus), _) => {
                    if inside(edge.minus) && inside(plus) {
                        sides.push(e)
                    } else {
                        closed_sides.push(e)
                    }
                }
            }
        }

        let mut nodes: Vec<usize> = elements.iter().flat_map(|&t| mesh.triangle(t)).collect();
        nodes.sort_unstable();
        nodes.dedup();

        let kind = if dirichlet_sides.is_empty() { PatchKind::Interior } else { PatchKind::Dirichlet };
        patch_of_center.insert(z, patches.len());
        patches.push(VertexPatch { center: z, adopted, kind, elements, sides, closed_sides, dirichlet_sides, nodes });
    }

    Ok(PartitionOfUnity { owner, patches, patch_of_center })
}
