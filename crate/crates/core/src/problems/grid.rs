use crate::error::{Error, Result};
use crate::linalg::{LinearOperator, StateVec};

/// Structured tensor grid on a box with homogeneous Dirichlet boundary.
///
/// Only interior nodes carry unknowns: `cells[a] - 1` per axis, numbered
/// lexicographically with axis 0 fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    cells: Vec<usize>,
    extent: Vec<f64>,
}

impl GridSpec {
    pub fn new(cells: Vec<usize>, extent: Vec<f64>) -> Result<Self> {
        if cells.is_empty() || cells.len() > 3 {
            return Err(Error::InvalidArgument(format!("grid must have 1 to 3 axes, got {}", cells.len())));
        }
        if cells.len() != extent.len() {
            return Err(Error::InvalidArgument("grid cells and extent lengths differ".into()));
        }
        if let Some(c) = cells.iter().find(|c| **c < 2) {
            return Err(Error::InvalidArgument(format!("each axis needs at least 2 cells, got {c}")));
        }
        if let Some(e) = extent.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(Error::InvalidArgument(format!("grid extent must be positive, got {e}")));
        }
        Ok(Self { cells, extent })
    }

    /// Unit box with `cells_per_side` cells along each of `dims` axes.
    pub fn unit(dims: usize, cells_per_side: usize) -> Result<Self> {
        Self::new(vec![cells_per_side; dims], vec![1.0; dims])
    }

    pub fn dims(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn extent(&self) -> &[f64] {
        &self.extent
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.extent[axis] / self.cells[axis] as f64
    }

    pub fn interior(&self, axis: usize) -> usize {
        self.cells[axis] - 1
    }

    pub fn dof_count(&self) -> usize {
        (0..self.dims()).map(|a| self.interior(a)).product()
    }

    /// Distance between consecutive dofs along `axis` in the flat vector.
    pub fn stride(&self, axis: usize) -> usize {
        (0..axis).map(|a| self.interior(a)).product()
    }

    /// Interior multi-index of flat dof `k` (0-based interior numbering).
    pub fn multi_index(&self, mut k: usize) -> [usize; 3] {
        let mut idx = [0; 3];
        for (a, slot) in idx.iter_mut().enumerate().take(self.dims()) {
            let n = self.interior(a);
            *slot = k % n;
            k /= n;
        }
        idx
    }

    /// Physical coordinates of flat dof `k`.
    pub fn coordinates(&self, k: usize) -> [f64; 3] {
        let idx = self.multi_index(k);
        let mut x = [0.0; 3];
        for a in 0..self.dims() {
            x[a] = (idx[a] + 1) as f64 * self.spacing(a);
        }
        x
    }

    /// Samples `f` at every interior node.
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> StateVec {
        (0..self.dof_count())
            .map(|k| f(&self.coordinates(k)[..self.dims()]))
            .collect()
    }

    /// Flat dof of global node multi-index `node` (`0..=cells` per axis),
    /// `None` on the boundary.
    pub(crate) fn node_dof(&self, node: &[usize]) -> Option<usize> {
        let mut k = 0;
        for a in (0..self.dims()).rev() {
            let i = node[a];
            if i == 0 || i >= self.cells[a] {
                return None;
            }
            k = k * self.interior(a) + (i - 1);
        }
        Some(k)
    }

    /// Applies `out = diag * u + off * (left + right neighbours)` along one
    /// axis, with zero Dirichlet values beyond the interior.
    pub(crate) fn tridiag_sweep(&self, axis: usize, diag: f64, off: f64, u: &[f64], out: &mut [f64]) {
        let n = self.interior(axis);
        let stride = self.stride(axis);
        for (k, o) in out.iter_mut().enumerate() {
            let i = (k / stride) % n;
            let mut v = diag * u[k];
            if i > 0 {
                v += off * u[k - stride];
            }
            if i + 1 < n {
                v += off * u[k + stride];
            }
            *o = v;
        }
    }

    /// Kronecker product of per-axis symmetric tridiagonal factors
    /// `(diag_a, off_a)`, applied axis by axis.
    pub(crate) fn kron_apply(&self, factors: &[(f64, f64)], u: &[f64], out: &mut [f64]) {
        debug_assert_eq!(factors.len(), self.dims());
        let mut cur = u.to_vec();
        let mut next = vec![0.0; u.len()];
        for (a, &(d, o)) in factors.iter().enumerate() {
            self.tridiag_sweep(a, d, o, &cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        out.copy_from_slice(&cur);
    }
}

/// Which stencil plays the role of the stiffness matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StiffnessKind {
    /// Second-order finite differences, scaled by `1/h^2`.
    FiniteDifference,
    /// Tensor-product Q1 finite elements (unscaled FE stiffness).
    Q1,
}

/// Matrix-free negative Laplacian with Dirichlet dofs eliminated.
#[derive(Debug, Clone)]
pub struct Stiffness {
    grid: GridSpec,
    kind: StiffnessKind,
}

impl Stiffness {
    pub fn new(grid: GridSpec, kind: StiffnessKind) -> Self {
        Self { grid, kind }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn kind(&self) -> StiffnessKind {
        self.kind
    }
}

pub(crate) fn q1_mass_1d(h: f64) -> (f64, f64) {
    (4.0 * h / 6.0, h / 6.0)
}

pub(crate) fn q1_stiffness_1d(h: f64) -> (f64, f64) {
    (2.0 / h, -1.0 / h)
}

impl LinearOperator for Stiffness {
    fn dim(&self) -> usize {
        self.grid.dof_count()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let g = &self.grid;
        match self.kind {
            StiffnessKind::FiniteDifference => {
                y.fill(0.0);
                let mut tmp = vec![0.0; x.len()];
                for a in 0..g.dims() {
                    let h2 = g.spacing(a).powi(2);
                    g.tridiag_sweep(a, 2.0 / h2, -1.0 / h2, x, &mut tmp);
                    for (yi, ti) in y.iter_mut().zip(&tmp) {
                        *yi += ti;
                    }
                }
            }
            StiffnessKind::Q1 => {
                y.fill(0.0);
                let mut tmp = vec![0.0; x.len()];
                for a in 0..g.dims() {
                    let factors: Vec<(f64, f64)> = (0..g.dims())
                        .map(|b| {
                            let h = g.spacing(b);
                            if b == a {
                                q1_stiffness_1d(h)
                            } else {
                                q1_mass_1d(h)
                            }
                        })
                        .collect();
                    g.kron_apply(&factors, x, &mut tmp);
                    for (yi, ti) in y.iter_mut().zip(&tmp) {
                        *yi += ti;
                    }
                }
            }
        }
    }

    fn is_symmetric(&self) -> bool {
        true
    }

    fn diagonal(&self) -> Option<StateVec> {
        let g = &self.grid;
        let d: f64 = match self.kind {
            StiffnessKind::FiniteDifference => (0..g.dims()).map(|a| 2.0 / g.spacing(a).powi(2)).sum(),
            StiffnessKind::Q1 => (0..g.dims())
                .map(|a| {
                    (0..g.dims())
                        .map(|b| {
                            let h = g.spacing(b);
                            if b == a {
                                q1_stiffness_1d(h).0
                            } else {
                                q1_mass_1d(h).0
                            }
                        })
                        .product::<f64>()
                })
                .sum(),
        };
        Some(vec![d; g.dof_count()])
    }
}

/// Consistent tensor-product Q1 mass matrix.
#[derive(Debug, Clone)]
pub struct ConsistentMass {
    grid: GridSpec,
}

impl ConsistentMass {
    pub fn new(grid: GridSpec) -> Self {
        Self { grid }
    }
}

impl LinearOperator for ConsistentMass {
    fn dim(&self) -> usize {
        self.grid.dof_count()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let factors: Vec<(f64, f64)> = (0..self.grid.dims()).map(|a| q1_mass_1d(self.grid.spacing(a))).collect();
        self.grid.kron_apply(&factors, x, y);
    }

    fn is_symmetric(&self) -> bool {
        true
    }

    fn diagonal(&self) -> Option<StateVec> {
        let d: f64 = (0..self.grid.dims()).map(|a| q1_mass_1d(self.grid.spacing(a)).0).product();
        Some(vec![d; self.grid.dof_count()])
    }
}
