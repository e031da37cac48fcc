use crate::mesh::{FractureNetwork, PolyMesh, SideClasses};

/// Numbering of the vector-valued degrees of freedom.
///
/// Each block carries three scalar unknowns (`3 * block + component`).
/// Blocks are numbered vertex classes first, then edge classes, face sides
/// and cells. A fracture face carries two sides: side 0 belongs to the
/// positive cell and side 1 to the negative cell.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub sides: SideClasses,
    vertex_start: Vec<usize>,
    edge_start: Vec<usize>,
    face_start: Vec<usize>,
    face_positive: Vec<Option<usize>>,
    cell_start: usize,
    num_blocks: usize,
    boundary: Vec<bool>,
    counts: [usize; 4],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    Vertex(usize),
    Edge(usize),
    Face(usize),
    Cell(usize),
}

impl DofMap {
    pub fn new(mesh: &PolyMesh, sides: SideClasses, fracture: &FractureNetwork) -> Self {
        let mut next = 0;
        let mut boundary = Vec::new();
        let mut vertex_start = Vec::with_capacity(mesh.num_vertices());
        for s in 0..mesh.num_vertices() {
            vertex_start.push(next);
            let k = sides.vertex_classes(s).len();
            next += k;
            boundary.extend(std::iter::repeat_n(mesh.vertex_boundary[s], k));
        }
        let nv = next;
        let mut edge_start = Vec::with_capacity(mesh.num_edges());
        for e in 0..mesh.num_edges() {
            edge_start.push(next);
            let k = sides.edge_classes(e).len();
            next += k;
            boundary.extend(std::iter::repeat_n(mesh.edge_boundary[e], k));
        }
        let ne = next - nv;
        let mut face_start = Vec::with_capacity(mesh.num_faces());
        let mut face_positive = vec![None; mesh.num_faces()];
        for (f, face) in mesh.faces.iter().enumerate() {
            face_start.push(next);
            let k = match fracture.index_of(f) {
                Some(q) => {
                    face_positive[f] = Some(fracture.faces[q].positive_cell);
                    2
                }
                None => 1,
            };
            next += k;
            boundary.extend(std::iter::repeat_n(face.is_boundary(), k));
        }
        let nf = next - nv - ne;
        let cell_start = next;
        next += mesh.num_cells();
        boundary.extend(std::iter::repeat_n(false, mesh.num_cells()));
        Self {
            sides,
            vertex_start,
            edge_start,
            face_start,
            face_positive,
            cell_start,
            num_blocks: next,
            boundary,
            counts: [nv, ne, nf, mesh.num_cells()],
        }
    }

    pub fn num_blocks(&self) -> usize {
        self.num_blocks
    }

    pub fn num_dofs(&self) -> usize {
        3 * self.num_blocks
    }

    /// Block counts `[vertex classes, edge classes, face sides, cells]`.
    pub fn counts(&self) -> [usize; 4] {
        self.counts
    }

    pub fn is_boundary_block(&self, b: usize) -> bool {
        self.boundary[b]
    }

    /// Scalar DOF mask of the boundary blocks.
    pub fn boundary_mask(&self) -> Vec<bool> {
        self.boundary.iter().flat_map(|&b| [b, b, b]).collect()
    }

    pub fn vertex_block(&self, s: usize, cell: usize) -> Option<usize> {
        self.sides.vertex_class_of(s, cell).map(|k| self.vertex_start[s] + k)
    }

    pub fn edge_block(&self, e: usize, cell: usize) -> Option<usize> {
        self.sides.edge_class_of(e, cell).map(|k| self.edge_start[e] + k)
    }

    pub fn face_block(&self, f: usize, cell: usize) -> usize {
        match self.face_positive[f] {
            Some(pos) if pos != cell => self.face_start[f] + 1,
            _ => self.face_start[f],
        }
    }

    /// Blocks of the two sides of a fracture face, positive first.
    pub fn fracture_blocks(&self, f: usize) -> Option<(usize, usize)> {
        self.face_positive[f].map(|_| (self.face_start[f], self.face_start[f] + 1))
    }

    pub fn cell_block(&self, c: usize) -> usize {
        self.cell_start + c
    }

    /// Which entity a block belongs to.
    pub fn kind(&self, b: usize) -> BlockKind {
        if b >= self.cell_start {
            return BlockKind::Cell(b - self.cell_start);
        }
        let find = |starts: &[usize]| starts.partition_point(|&s| s <= b) - 1;
        if b < self.counts[0] {
            BlockKind::Vertex(find(&self.vertex_start))
        } else if b < self.counts[0] + self.counts[1] {
            BlockKind::Edge(find(&self.edge_start))
        } else {
            BlockKind::Face(find(&self.face_start))
        }
    }

    /// Global blocks of a cell in local order: vertices, edges and faces in
    /// the cell's own ordering, then the cell itself.
    pub fn cell_blocks(&self, mesh: &PolyMesh, c: usize) -> Vec<usize> {
        let cell = &mesh.cells[c];
        let mut out = Vec::with_capacity(cell.vertices.len() + cell.edges.len() + cell.faces.len() + 1);
        out.extend(cell.vertices.iter().map(|&s| self.vertex_block(s, c).expect("cell lies in a vertex class")));
        out.extend(cell.edges.iter().map(|&e| self.edge_block(e, c).expect("cell lies in an edge class")));
        out.extend(cell.faces.iter().map(|&f| self.face_block(f, c)));
        out.push(self.cell_block(c));
        out
    }
}
