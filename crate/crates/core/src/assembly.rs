//! The bordered tau system for Poisson (`b = 2`) and biharmonic (`b = 4`)
//! problems on a box in one to three dimensions.
//!
//! Unknowns are ordered as solution coefficients (row-major), interior taus,
//! boundary taus (per condition), interface taus (per block), then the gauge
//! tau. Rows follow the same pattern: interior test rows, boundary rows,
//! interface rows, gauge row.

use thiserror::Error;

use crate::basis::{
    affine_scale, conversion_chain, derivative_into, evaluation_matrix, BandedOperator, BasisError, BasisId, Grid1D,
    GridKind, Side,
};
use crate::field::integral_weights;
use crate::operators::{cross_apply, BoundaryOperator, FaceData, OperatorError};
use crate::sparse::SparseMatrix;
use crate::tau::{boundary_tau_columns, interface_blocks, interior_tau_columns, InterfaceBlock, TauColumn, TauError, TauSpec};
use crate::tensor::{flat_index, CoeffTensor, MultiIndex};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssemblyError {
    #[error("dimension {0} is not supported (1 to 3)")]
    Dimension(usize),
    #[error("{what}: expected {expected}, got {got}")]
    Shape { what: String, expected: usize, got: usize },
    #[error("axis {axis} needs {expected} boundary conditions, got {got}")]
    BoundaryCount { axis: usize, expected: usize, got: usize },
    #[error("condition {label} listed on axis {listed} acts on axis {actual}")]
    WrongAxis { label: String, listed: usize, actual: usize },
    #[error("condition {label} has order {order}; at most {max} is allowed")]
    ConditionOrder { label: String, order: usize, max: usize },
    #[error("extent {n} on axis {axis} must exceed the equation order {b}")]
    TooSmall { axis: usize, n: usize, b: usize },
    #[error("forcing has axes {got:?} and extents {got_extents:?}, expected the full box {expected:?}")]
    Forcing { got: Vec<usize>, got_extents: Vec<usize>, expected: Vec<usize> },
    #[error(transparent)]
    Tau(#[from] TauError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Basis(#[from] BasisError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equation {
    /// `Δu = f`
    Poisson,
    /// `Δ²u = f`
    Biharmonic,
}

impl Equation {
    pub fn order(self) -> usize {
        match self {
            Equation::Poisson => 2,
            Equation::Biharmonic => 4,
        }
    }
}

/// How the interior residual is tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InteriorTest {
    /// Coefficients in the order-`b` ultraspherical basis.
    #[default]
    Ultraspherical,
    /// Values at the `N`-point type-I grid of every axis.
    Collocation,
}

/// A boundary-value problem together with its discretization choices.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub equation: Equation,
    pub extents: Vec<usize>,
    pub domain: Vec<(f64, f64)>,
    /// `bcs[j]` holds the `b` conditions normal to axis `j`.
    pub bcs: Vec<Vec<FaceData>>,
    pub tau: TauSpec,
    /// Border the system with `∫u = 0` and a constant interior tau.
    pub gauge: bool,
    pub test: InteriorTest,
}

impl ProblemSpec {
    /// Homogeneous boundary data, standard taus, no gauge.
    pub fn new(equation: Equation, extents: Vec<usize>, domain: Vec<(f64, f64)>, operators: Vec<Vec<BoundaryOperator>>) -> Self {
        let bcs = operators
            .into_iter()
            .map(|ops| ops.into_iter().map(|op| FaceData::homogeneous(op, &extents)).collect())
            .collect();
        ProblemSpec { equation, tau: TauSpec::standard(equation.order()), extents, domain, bcs, gauge: false, test: InteriorTest::default() }
    }

    /// Same extent on every axis and the same interval on every axis.
    pub fn isotropic(equation: Equation, n: usize, interval: (f64, f64), operators: Vec<Vec<BoundaryOperator>>) -> Self {
        let d = operators.len();
        Self::new(equation, vec![n; d], vec![interval; d], operators)
    }

    pub fn with_tau(mut self, tau: TauSpec) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_gauge(mut self, gauge: bool) -> Self {
        self.gauge = gauge;
        self
    }

    pub fn with_test(mut self, test: InteriorTest) -> Self {
        self.test = test;
        self
    }

    pub fn dim(&self) -> usize {
        self.extents.len()
    }

    pub fn order(&self) -> usize {
        self.equation.order()
    }

    /// Replace the data of condition `bc` on `axis`.
    pub fn set_data(&mut self, axis: usize, bc: usize, rhs: CoeffTensor) -> Result<(), AssemblyError> {
        let face = self.bcs.get_mut(axis).and_then(|v| v.get_mut(bc)).ok_or_else(|| AssemblyError::Shape {
            what: format!("condition index on axis {axis}"),
            expected: bc + 1,
            got: 0,
        })?;
        *face = FaceData::new(face.operator.clone(), rhs, &self.extents)?;
        Ok(())
    }

    /// Every condition is a pure derivative (no value term).
    pub fn is_pure_neumann(&self) -> bool {
        self.bcs.iter().flatten().all(|f| f.operator.normal_poly()[0] == 0.0)
    }

    pub fn validate(&self) -> Result<(), AssemblyError> {
        let d = self.dim();
        if !(1..=3).contains(&d) {
            return Err(AssemblyError::Dimension(d));
        }
        for (what, got) in [("domain intervals", self.domain.len()), ("boundary condition axes", self.bcs.len())] {
            if got != d {
                return Err(AssemblyError::Shape { what: what.into(), expected: d, got });
            }
        }
        let b = self.order();
        for (axis, &n) in self.extents.iter().enumerate() {
            if n <= b {
                return Err(AssemblyError::TooSmall { axis, n, b });
            }
            affine_scale(self.domain[axis].0, self.domain[axis].1, 1)?;
        }
        for (axis, faces) in self.bcs.iter().enumerate() {
            if faces.len() != b {
                return Err(AssemblyError::BoundaryCount { axis, expected: b, got: faces.len() });
            }
            for face in faces {
                let op = &face.operator;
                if op.axis() != axis {
                    return Err(AssemblyError::WrongAxis { label: op.label().into(), listed: axis, actual: op.axis() });
                }
                if op.order() >= b {
                    return Err(AssemblyError::ConditionOrder { label: op.label().into(), order: op.order(), max: b - 1 });
                }
                FaceData::new(op.clone(), face.rhs.clone(), &self.extents)?;
            }
        }
        Ok(())
    }

    fn test_basis(&self) -> BasisId {
        BasisId::from_index(self.order() as u32)
    }
}

/// What a matrix row enforces.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RowKind {
    /// Interior residual: test coefficient (or collocation node) index.
    Interior(Vec<usize>),
    /// Condition `bc` on `axis`, at a tangential coefficient index.
    Boundary { axis: usize, bc: usize, index: Vec<usize> },
    /// Interface condition of the conditions `bcs` on `axes`.
    Interface { axes: Vec<usize>, bcs: Vec<usize>, index: Vec<usize> },
    Gauge,
}

/// What a matrix column multiplies.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ColKind {
    Solution(Vec<usize>),
    InteriorTau { level: usize, index: Vec<usize> },
    BoundaryTau { axis: usize, bc: usize, level: usize, index: Vec<usize> },
    InterfaceTau { axes: Vec<usize>, bcs: Vec<usize>, level: usize, index: Vec<usize> },
    Gauge,
}

impl ColKind {
    pub fn is_tau(&self) -> bool {
        !matches!(self, ColKind::Solution(_))
    }
}

/// Row counts per block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockCounts {
    pub interior: usize,
    pub boundary: usize,
    pub interface: usize,
    pub gauge: usize,
    pub interior_taus: usize,
    pub boundary_taus: usize,
    pub interface_taus: usize,
}

/// The bordered system `M x = r`.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    spec: ProblemSpec,
    matrix: SparseMatrix,
    rhs: Vec<f64>,
    rows: Vec<RowKind>,
    cols: Vec<ColKind>,
    blocks: Vec<InterfaceBlock>,
    counts: BlockCounts,
    warnings: Vec<String>,
}

impl AssembledSystem {
    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn rows(&self) -> &[RowKind] {
        &self.rows
    }

    pub fn cols(&self) -> &[ColKind] {
        &self.cols
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn counts(&self) -> BlockCounts {
        self.counts
    }

    pub fn interface_blocks(&self) -> &[InterfaceBlock] {
        &self.blocks
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn row_of(&self, kind: &RowKind) -> Option<usize> {
        self.rows.iter().position(|r| r == kind)
    }

    pub fn col_of(&self, kind: &ColKind) -> Option<usize> {
        self.cols.iter().position(|c| c == kind)
    }

    /// Replace the right-hand side (e.g. for new forcing or boundary data
    /// with the same operators).
    pub fn set_rhs(&mut self, rhs: Vec<f64>) -> Result<(), AssemblyError> {
        if rhs.len() != self.size() {
            return Err(AssemblyError::Shape { what: "right-hand side".into(), expected: self.size(), got: rhs.len() });
        }
        self.rhs = rhs;
        Ok(())
    }

    /// Solution coefficients making up the first `N^d` unknowns.
    pub fn solution_len(&self) -> usize {
        self.spec.extents.iter().product()
    }

    /// Singular values of the dense matrix, decreasing. Small systems only.
    pub fn singular_values(&self) -> Vec<f64> {
        crate::linalg::singular_values(&self.matrix.to_dense())
    }

    /// Solution-constraining rows per level once every tau has absorbed
    /// its own row: `(N-b)^d`, then the boundary rows, then each interface
    /// level.
    pub fn constraining_rows_per_level(&self) -> Vec<usize> {
        let d = self.spec.dim();
        let b = self.spec.order();
        let mut levels = vec![0; d + 1];
        levels[0] = self.spec.extents.iter().map(|n| n - b).product();
        levels[1] = self.counts.boundary - self.counts.boundary_taus;
        for block in &self.blocks {
            levels[block.axes.len()] += block.constraining_rows();
        }
        levels
    }

    /// Interior mass operator for `A x = σ B x`: the trial-to-test
    /// conversion on interior rows and solution columns, zero elsewhere.
    pub fn mass_matrix(&self) -> SparseMatrix {
        let spec = &self.spec;
        let factors: Vec<Vec<Vec<(usize, f64)>>> = spec
            .extents
            .iter()
            .enumerate()
            .map(|(j, &n)| row_transform(spec, j, banded_rows(&conversion_chain(BasisId::Chebyshev, spec.test_basis(), n))))
            .collect();
        let mut triplets = Vec::new();
        kron_rows(&factors, &spec.extents, &spec.extents, 1.0, 0, 0, &mut triplets);
        SparseMatrix::from_triplets(self.size(), self.size(), triplets)
    }

    /// Partition used by block elimination; see [`BlockPartition`].
    pub fn block_partition(&self) -> Result<BlockPartition, String> {
        BlockPartition::new(self)
    }
}

/// Rows/columns grouped for block elimination.
///
/// `tau_pairs` are columns with a single nonzero, each paired with its row;
/// these taus are recovered after the solution. The principal block couples
/// the low interior test rows (every index below `N - b`) to the solution
/// modes with every index at least `b`; everything else is the rest block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPartition {
    pub tau_pairs: Vec<(usize, usize)>,
    pub principal_rows: Vec<usize>,
    pub principal_cols: Vec<usize>,
    pub rest_rows: Vec<usize>,
    pub rest_cols: Vec<usize>,
}

impl BlockPartition {
    fn new(sys: &AssembledSystem) -> Result<Self, String> {
        let spec = &sys.spec;
        if spec.test != InteriorTest::Ultraspherical {
            return Err("block elimination needs the ultraspherical interior test".into());
        }
        let b = spec.order();
        let is_principal_row = |r: &RowKind| match r {
            RowKind::Interior(idx) => idx.iter().zip(&spec.extents).all(|(&i, &n)| i < n - b),
            _ => false,
        };
        let counts = sys.matrix.column_counts();
        let mut single_row = vec![usize::MAX; sys.size()];
        for (i, j, _) in sys.matrix.entries() {
            if counts[j] == 1 {
                single_row[j] = i;
            }
        }
        let mut claimed = vec![false; sys.size()];
        let mut tau_pairs = Vec::new();
        for (j, col) in sys.cols.iter().enumerate() {
            let i = single_row[j];
            if col.is_tau() && counts[j] == 1 && !is_principal_row(&sys.rows[i]) && !claimed[i] {
                claimed[i] = true;
                tau_pairs.push((j, i));
            }
        }
        let mut is_tau_col = vec![false; sys.size()];
        for &(j, _) in &tau_pairs {
            is_tau_col[j] = true;
        }
        let principal_rows: Vec<usize> = (0..sys.size()).filter(|&i| is_principal_row(&sys.rows[i])).collect();
        let principal_cols: Vec<usize> = (0..sys.size())
            .filter(|&j| matches!(&sys.cols[j], ColKind::Solution(idx) if idx.iter().all(|&n| n >= b)))
            .collect();
        let rest_rows: Vec<usize> = (0..sys.size()).filter(|&i| !claimed[i] && !is_principal_row(&sys.rows[i])).collect();
        let principal_set: std::collections::HashSet<usize> = principal_cols.iter().copied().collect();
        let rest_cols: Vec<usize> = (0..sys.size()).filter(|j| !is_tau_col[*j] && !principal_set.contains(j)).collect();
        if principal_rows.len() != principal_cols.len() || rest_rows.len() != rest_cols.len() {
            return Err(format!(
                "unbalanced partition: principal {}x{}, rest {}x{}",
                principal_rows.len(),
                principal_cols.len(),
                rest_rows.len(),
                rest_cols.len()
            ));
        }
        Ok(BlockPartition { tau_pairs, principal_rows, principal_cols, rest_rows, rest_cols })
    }

    /// Largest magnitude of `M` in the tau columns outside their own rows.
    /// Zero means the tau bordering is exactly block triangular.
    pub fn forbidden_max(&self, matrix: &SparseMatrix) -> f64 {
        let mut own = vec![usize::MAX; matrix.ncols()];
        for &(j, i) in &self.tau_pairs {
            own[j] = i;
        }
        matrix.entries().filter(|&(i, j, _)| own[j] != usize::MAX && own[j] != i).fold(0.0, |m, (_, _, v)| m.max(v.abs()))
    }

    /// Whether every tau column was eliminated, leaving a pure solution block.
    pub fn all_taus_eliminated(&self, sys: &AssembledSystem) -> bool {
        self.rest_cols.iter().all(|&j| !sys.cols[j].is_tau())
    }
}

fn banded_rows(op: &BandedOperator) -> Vec<Vec<(usize, f64)>> {
    let mut rows = vec![Vec::new(); op.rows()];
    for (i, j, v) in op.entries() {
        if v != 0.0 {
            rows[i].push((j, v));
        }
    }
    for r in &mut rows {
        r.sort_by_key(|e| e.0);
    }
    rows
}

/// Collocation rows: evaluations of test-basis expansions at type-I nodes.
fn collocation_matrix(spec: &ProblemSpec, axis: usize) -> Vec<f64> {
    let n = spec.extents[axis];
    let grid = Grid1D::new(GridKind::TypeI, n).expect("n >= 1");
    evaluation_matrix(spec.test_basis(), n, grid.nodes())
}

/// Apply the interior row transform of `axis` to a per-row sparse factor.
fn row_transform(spec: &ProblemSpec, axis: usize, rows: Vec<Vec<(usize, f64)>>) -> Vec<Vec<(usize, f64)>> {
    match spec.test {
        InteriorTest::Ultraspherical => rows,
        InteriorTest::Collocation => {
            let n = spec.extents[axis];
            let e = collocation_matrix(spec, axis);
            let ncols = rows.iter().flatten().map(|e| e.0 + 1).max().unwrap_or(0);
            (0..n)
                .map(|p| {
                    let mut dense = vec![0.0; ncols];
                    for (k, row) in rows.iter().enumerate() {
                        let w = e[p * n + k];
                        for &(j, v) in row {
                            dense[j] += w * v;
                        }
                    }
                    dense.into_iter().enumerate().filter(|e| e.1 != 0.0).collect()
                })
                .collect()
        }
    }
}

/// Transform a test-space vector (one column) along `axis`.
fn vector_transform(spec: &ProblemSpec, axis: usize, v: &[(usize, f64)]) -> Vec<(usize, f64)> {
    match spec.test {
        InteriorTest::Ultraspherical => v.to_vec(),
        InteriorTest::Collocation => {
            let n = spec.extents[axis];
            let e = collocation_matrix(spec, axis);
            (0..n)
                .map(|p| (p, v.iter().map(|&(k, c)| e[p * n + k] * c).sum::<f64>()))
                .filter(|e| e.1 != 0.0)
                .collect()
        }
    }
}

/// Kronecker product of per-axis row factors: row multi-index `i` gets the
/// products of `factors[j][i_j]` entries.
fn kron_rows(
    factors: &[Vec<Vec<(usize, f64)>>],
    row_extents: &[usize],
    col_extents: &[usize],
    scale: f64,
    row_offset: usize,
    col_offset: usize,
    out: &mut Vec<(usize, usize, f64)>,
) {
    for (flat, idx) in MultiIndex::new(row_extents).enumerate() {
        let mut acc = vec![(0usize, scale)];
        for (j, &i) in idx.iter().enumerate() {
            let row = &factors[j][i];
            let mut next = Vec::with_capacity(acc.len() * row.len());
            for &(c, v) in &acc {
                for &(k, w) in row {
                    next.push((c * col_extents[j] + k, v * w));
                }
            }
            acc = next;
        }
        out.extend(acc.into_iter().map(|(c, v)| (row_offset + flat, col_offset + c, v)));
    }
}

/// Per-axis factors (trial to test) of each term of the interior operator.
fn interior_terms(spec: &ProblemSpec) -> Result<Vec<Vec<BandedOperator>>, AssemblyError> {
    let d = spec.dim();
    let test = spec.test_basis();
    let conv = |j: usize| conversion_chain(BasisId::Chebyshev, test, spec.extents[j]);
    let deriv = |j: usize, k: usize| -> Result<BandedOperator, AssemblyError> {
        let (a, b) = spec.domain[j];
        Ok(derivative_into(BasisId::Chebyshev, k, test, spec.extents[j]).scaled(affine_scale(a, b, k)?))
    };
    let mut terms = Vec::new();
    for j in 0..d {
        let mut factors: Vec<BandedOperator> = (0..d).map(conv).collect();
        factors[j] = deriv(j, spec.order())?;
        terms.push(factors);
    }
    if spec.equation == Equation::Biharmonic {
        for j in 0..d {
            for m in j + 1..d {
                let mut factors: Vec<BandedOperator> = (0..d).map(conv).collect();
                factors[j] = deriv(j, 2)?.scaled(2.0);
                factors[m] = deriv(m, 2)?;
                terms.push(factors);
            }
        }
    }
    Ok(terms)
}

fn column_entries(col: &TauColumn, extents: &[usize]) -> Vec<(usize, f64)> {
    col.entries(extents).into_iter().filter(|e| e.1 != 0.0).collect()
}

fn sides(spec: &ProblemSpec) -> Vec<Vec<Side>> {
    spec.bcs.iter().map(|faces| faces.iter().map(|f| f.operator.side()).collect()).collect()
}

fn face_extents(spec: &ProblemSpec, axis: usize) -> Vec<usize> {
    spec.extents.iter().enumerate().filter(|&(j, _)| j != axis).map(|(_, &n)| n).collect()
}

/// Assemble matrix and right-hand side for forcing `f` (Chebyshev
/// coefficients over the full box).
pub fn assemble(spec: &ProblemSpec, f: &CoeffTensor) -> Result<AssembledSystem, AssemblyError> {
    spec.validate()?;
    let d = spec.dim();
    let b = spec.order();
    let extents = &spec.extents;
    let n_sol: usize = extents.iter().product();
    let mut triplets = Vec::new();
    let mut rows: Vec<RowKind> = MultiIndex::new(extents).map(RowKind::Interior).collect();
    let mut cols: Vec<ColKind> = MultiIndex::new(extents).map(ColKind::Solution).collect();
    let mut warnings = Vec::new();

    for term in interior_terms(spec)? {
        let factors: Vec<_> = term.iter().enumerate().map(|(j, op)| row_transform(spec, j, banded_rows(op))).collect();
        kron_rows(&factors, extents, extents, 1.0, 0, 0, &mut triplets);
    }

    let interior_taus = interior_tau_columns(extents, b, &spec.tau, spec.test_basis())?;
    for tau in &interior_taus {
        let transformed = TauColumn {
            level: tau.level,
            index: tau.index.clone(),
            factors: tau.factors.iter().enumerate().map(|(j, f)| vector_transform(spec, j, f)).collect(),
        };
        let c = cols.len();
        for (r, v) in column_entries(&transformed, extents) {
            triplets.push((r, c, v));
        }
        cols.push(ColKind::InteriorTau { level: tau.level, index: tau.index.clone() });
    }

    let functionals: Vec<Vec<Vec<f64>>> = spec
        .bcs
        .iter()
        .enumerate()
        .map(|(j, faces)| faces.iter().map(|fd| fd.operator.functional_row(extents[j], spec.domain[j])).collect::<Result<_, _>>())
        .collect::<Result<_, _>>()?;

    // boundary rows
    let boundary_start = rows.len();
    let mut boundary_taus = 0;
    for axis in 0..d {
        let tangential = face_extents(spec, axis);
        let taus = if d >= 2 { boundary_tau_columns(&tangential, b, &spec.tau)? } else { Vec::new() };
        for bc in 0..b {
            let row_start = rows.len();
            let row = &functionals[axis][bc];
            for t in MultiIndex::new(&tangential) {
                let r = rows.len();
                let mut full: Vec<usize> = t.clone();
                full.insert(axis, 0);
                for (n, &v) in row.iter().enumerate() {
                    if v != 0.0 {
                        full[axis] = n;
                        triplets.push((r, flat_index(extents, &full), v));
                    }
                }
                rows.push(RowKind::Boundary { axis, bc, index: t });
            }
            for tau in &taus {
                let c = cols.len();
                for (r, v) in column_entries(tau, &tangential) {
                    triplets.push((row_start + r, c, v));
                }
                cols.push(ColKind::BoundaryTau { axis, bc, level: tau.level, index: tau.index.clone() });
                boundary_taus += 1;
            }
        }
    }
    let boundary_rows = rows.len() - boundary_start;

    if spec.tau.naive && d != 2 {
        return Err(TauError::Unsupported("the one-tau-per-edge scheme is defined for squares only".into()).into());
    }
    let blocks = interface_blocks(extents, b, &sides(spec), &spec.tau)?;
    let interface_start = rows.len();
    let mut interface_taus = 0;
    for block in &blocks {
        let row_start = rows.len();
        let block_factors: Vec<&Vec<f64>> = block.axes.iter().zip(&block.bcs).map(|(&a, &i)| &functionals[a][i]).collect();
        let block_extents: Vec<usize> = block.axes.iter().map(|&a| extents[a]).collect();
        let rest: Vec<usize> = (0..d).filter(|j| !block.axes.contains(j)).collect();
        for t in MultiIndex::new(&block.extents) {
            let r = rows.len();
            let mut full = vec![0usize; d];
            for (p, &a) in rest.iter().enumerate() {
                full[a] = t[p];
            }
            for m in MultiIndex::new(&block_extents) {
                let mut v = block.lhs_weight;
                for (p, &a) in block.axes.iter().enumerate() {
                    v *= block_factors[p][m[p]];
                    full[a] = m[p];
                }
                if v != 0.0 {
                    triplets.push((r, flat_index(extents, &full), v));
                }
            }
            rows.push(RowKind::Interface { axes: block.axes.clone(), bcs: block.bcs.clone(), index: t });
        }
        for tau in &block.taus {
            let c = cols.len();
            for (r, v) in column_entries(tau, &block.extents) {
                triplets.push((row_start + r, c, v));
            }
            cols.push(ColKind::InterfaceTau { axes: block.axes.clone(), bcs: block.bcs.clone(), level: tau.level, index: tau.index.clone() });
            interface_taus += 1;
        }
    }
    let interface_rows = rows.len() - interface_start;

    if spec.gauge {
        if spec.equation != Equation::Poisson || !spec.is_pure_neumann() {
            warnings.push("gauge applied to a problem that is not pure-Neumann Poisson".to_string());
        }
        let r = rows.len();
        for (k, w) in integral_weights(extents, &spec.domain).into_iter().enumerate() {
            if w != 0.0 {
                triplets.push((r, k, w));
            }
        }
        rows.push(RowKind::Gauge);
        let constant = TauColumn {
            level: 0,
            index: vec![0; d],
            factors: (0..d).map(|j| vector_transform(spec, j, &[(0, 1.0)])).collect(),
        };
        let c = cols.len();
        for (row, v) in column_entries(&constant, extents) {
            triplets.push((row, c, v));
        }
        cols.push(ColKind::Gauge);
    }

    if rows.len() != cols.len() {
        return Err(AssemblyError::Shape { what: "square system (columns)".into(), expected: rows.len(), got: cols.len() });
    }
    let size = rows.len();
    let counts = BlockCounts {
        interior: n_sol,
        boundary: boundary_rows,
        interface: interface_rows,
        gauge: usize::from(spec.gauge),
        interior_taus: interior_taus.len(),
        boundary_taus,
        interface_taus,
    };
    let mut sys = AssembledSystem {
        spec: spec.clone(),
        matrix: SparseMatrix::from_triplets(size, size, triplets),
        rhs: Vec::new(),
        rows,
        cols,
        blocks,
        counts,
        warnings,
    };
    sys.rhs = assemble_rhs(&sys, f)?;
    Ok(sys)
}

/// Right-hand side for forcing `f` and the boundary data held in the
/// system's spec.
pub fn assemble_rhs(sys: &AssembledSystem, f: &CoeffTensor) -> Result<Vec<f64>, AssemblyError> {
    assemble_rhs_with(sys, f, &sys.spec.bcs)
}

/// Right-hand side for forcing `f` and explicit boundary data (same
/// operators as the assembled system).
pub fn assemble_rhs_with(sys: &AssembledSystem, f: &CoeffTensor, bcs: &[Vec<FaceData>]) -> Result<Vec<f64>, AssemblyError> {
    let spec = &sys.spec;
    let d = spec.dim();
    let full_axes: Vec<usize> = (0..d).collect();
    if f.axes() != full_axes.as_slice() || f.extents() != spec.extents.as_slice() {
        return Err(AssemblyError::Forcing { got: f.axes().to_vec(), got_extents: f.extents().to_vec(), expected: spec.extents.clone() });
    }
    if bcs.len() != d || bcs.iter().zip(&spec.bcs).any(|(a, b)| a.len() != b.len() || a.iter().zip(b).any(|(x, y)| x.operator != y.operator)) {
        return Err(AssemblyError::Shape { what: "boundary data matching the assembled operators".into(), expected: d, got: bcs.len() });
    }
    let mut rhs = Vec::with_capacity(sys.size());
    let mut projected = f.clone();
    for j in 0..d {
        let n = spec.extents[j];
        let conv = conversion_chain(BasisId::Chebyshev, spec.test_basis(), n);
        let rows = row_transform(spec, j, banded_rows(&conv));
        let mut dense = vec![0.0; rows.len() * n];
        for (i, row) in rows.iter().enumerate() {
            for &(k, v) in row {
                dense[i * n + k] = v;
            }
        }
        projected = projected.apply_along(j, &dense, rows.len()).map_err(OperatorError::from)?;
    }
    rhs.extend_from_slice(projected.values());
    for faces in bcs {
        for face in faces {
            FaceData::new(face.operator.clone(), face.rhs.clone(), &spec.extents)?;
            rhs.extend_from_slice(face.rhs.values());
        }
    }
    for block in &sys.blocks {
        let mut acc = vec![0.0; block.rows()];
        for (i, (&a, &bc)) in block.axes.iter().zip(&block.bcs).enumerate() {
            let w = block.rhs_weights[i];
            if w == 0.0 {
                continue;
            }
            let others: Vec<&BoundaryOperator> =
                block.axes.iter().zip(&block.bcs).filter(|&(&o, _)| o != a).map(|(&o, &ob)| &bcs[o][ob].operator).collect();
            let data = &bcs[a][bc].rhs;
            let applied = cross_apply(&others, data, &spec.domain)?;
            for (s, v) in acc.iter_mut().zip(applied.values()) {
                *s += w * v;
            }
        }
        rhs.extend(acc);
    }
    if spec.gauge {
        rhs.push(0.0);
    }
    debug_assert_eq!(rhs.len(), sys.size());
    Ok(rhs)
}
