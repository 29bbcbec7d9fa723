//! Tau polynomials, quotient index sets, interface-condition blocks and the
//! one-dimensional generalized tau solve.
//!
//! A tau term must span the quotient `Π_N^d / Π_{N-b}^d`. Its basis is
//! indexed by multi-indices with at least one "high" component
//! (`n_j >= N_j - b`); the level of a member is the number of high axes. A
//! high component `n_j = N_j - k` carries the tau polynomial `P_k`, a low
//! component carries the single basis element of degree `n_j`.
//!
//! Members are ordered by (level, high-axis subset, row-major index), so
//! generated matrices are reproducible.

use thiserror::Error;

use crate::basis::{
    conversion_chain, derivative_into, to_chebyshev, BasisId, ChebyshevTransform, Side,
};
use crate::linalg::{mat_from_row_major, singular_values, DenseLu};
use crate::operators::{BoundaryOperator, OperatorError};
use crate::tensor::MultiIndex;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TauError {
    #[error("tau family {family} does not span the quotient space (top-{b} block is singular)")]
    NotSpanning { family: String, b: usize },
    #[error("custom tau family needs {expected} vectors of length {n}, got {got}")]
    CustomShape { expected: usize, n: usize, got: usize },
    #[error("size {n} must exceed the equation order {b}")]
    TooSmall { n: usize, b: usize },
    #[error("{0}")]
    Unsupported(String),
    #[error("operator polynomial must have a nonzero leading coefficient")]
    ZeroLeading,
    #[error("expected {expected} boundary conditions, got {got}")]
    BoundaryCount { expected: usize, got: usize },
    #[error("singular tau system: rank {rank} of {size}")]
    Singular { rank: usize, size: usize },
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

/// Family of `b` tau polynomials `P_1..P_b` (`P_k` of degree `N - k` for the
/// orthogonal families).
#[derive(Debug, Clone, PartialEq)]
pub enum TauFamily {
    Chebyshev,
    Ultraspherical(u32),
    /// Lagrange polynomials of the boundary-adjacent type-II nodes.
    EndpointLagrange,
    /// `b` explicit polynomials in Chebyshev coefficients.
    Custom(Vec<Vec<f64>>),
}

impl TauFamily {
    /// `0` is Chebyshev.
    pub fn ultraspherical(alpha: u32) -> Self {
        if alpha == 0 {
            TauFamily::Chebyshev
        } else {
            TauFamily::Ultraspherical(alpha)
        }
    }

    pub fn name(&self) -> String {
        match self {
            TauFamily::Chebyshev => "chebyshev".into(),
            TauFamily::Ultraspherical(a) => format!("ultraspherical({a})"),
            TauFamily::EndpointLagrange => "endpoint-lagrange".into(),
            TauFamily::Custom(_) => "custom".into(),
        }
    }

    fn native_basis(&self) -> Option<BasisId> {
        match self {
            TauFamily::Chebyshev => Some(BasisId::Chebyshev),
            TauFamily::Ultraspherical(a) => Some(BasisId::from_index(*a)),
            _ => None,
        }
    }

    /// `P_1..P_b` as Chebyshev coefficient vectors of length `n`.
    pub fn chebyshev_coeffs(&self, n: usize, b: usize) -> Result<Vec<Vec<f64>>, TauError> {
        if n <= b {
            return Err(TauError::TooSmall { n, b });
        }
        let polys = match self {
            TauFamily::Chebyshev | TauFamily::Ultraspherical(_) => {
                let basis = self.native_basis().unwrap();
                (1..=b).map(|k| to_chebyshev(basis, &unit(n, n - k))).collect()
            }
            TauFamily::EndpointLagrange => {
                let tr = ChebyshevTransform::new(n).expect("n > b >= 1");
                let left = b.div_ceil(2);
                let mut nodes: Vec<usize> = (0..b - left).map(|i| n - 1 - i).collect();
                nodes.extend(0..left);
                nodes.iter().map(|&j| tr.forward(&unit(n, j)).unwrap()).collect()
            }
            TauFamily::Custom(vecs) => {
                if vecs.len() != b || vecs.iter().any(|v| v.len() != n) {
                    return Err(TauError::CustomShape { expected: b, n, got: vecs.len() });
                }
                vecs.clone()
            }
        };
        check_spanning(&polys, n, b).map_err(|_| TauError::NotSpanning { family: self.name(), b })?;
        Ok(polys)
    }

    /// `P_1..P_b` in the coefficients of `target`. Exact unit vectors when the
    /// family coincides with `target`.
    pub fn coeffs_in(&self, n: usize, b: usize, target: BasisId) -> Result<Vec<Vec<f64>>, TauError> {
        if self.native_basis() == Some(target) {
            if n <= b {
                return Err(TauError::TooSmall { n, b });
            }
            return Ok((1..=b).map(|k| unit(n, n - k)).collect());
        }
        let cheb = self.chebyshev_coeffs(n, b)?;
        let s = conversion_chain(BasisId::Chebyshev, target, n);
        Ok(cheb.iter().map(|p| s.apply(p)).collect())
    }
}

fn unit(n: usize, k: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[k] = 1.0;
    e
}

/// The top-`b` coefficients of the polynomials must form a nonsingular block.
fn check_spanning(polys: &[Vec<f64>], n: usize, b: usize) -> Result<(), ()> {
    let block: Vec<f64> = polys.iter().flat_map(|p| p[n - b..].iter().copied()).collect();
    let scale = block.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Err(());
    }
    let s = singular_values(&mat_from_row_major(b, b, &block));
    if s[b - 1] <= 1e-12 * s[0] {
        return Err(());
    }
    Ok(())
}

/// How interface (corner) conditions weight the incoming boundary data.
#[derive(Debug, Clone, PartialEq)]
pub enum CornerScheme {
    /// Symmetric average over all incoming faces (any dimension).
    Dihedral,
    /// 2D only: each edge's data wins at its clockwise corner.
    Clockwise,
    /// 2D only: north/south (axis-1) data wins at every corner.
    EastWest,
    /// 2D only: `(weight on x-face data, weight on y-face data)` per corner
    /// block, in interface enumeration order.
    Custom(Vec<(f64, f64)>),
}

/// The full tau choice for an assembly.
#[derive(Debug, Clone, PartialEq)]
pub struct TauSpec {
    pub interior: TauFamily,
    pub boundary: TauFamily,
    pub corner_scheme: CornerScheme,
    /// One tau polynomial per edge and no corner conditions (2D only); the
    /// resulting system is singular for even-weight families.
    pub naive: bool,
}

impl TauSpec {
    /// Interior taus in the order-`b` test basis, Chebyshev boundary taus,
    /// dihedral corners.
    pub fn standard(b: usize) -> Self {
        TauSpec {
            interior: TauFamily::ultraspherical(b as u32),
            boundary: TauFamily::Chebyshev,
            corner_scheme: CornerScheme::Dihedral,
            naive: false,
        }
    }

    pub fn with_interior(mut self, family: TauFamily) -> Self {
        self.interior = family;
        self
    }

    pub fn with_boundary(mut self, family: TauFamily) -> Self {
        self.boundary = family;
        self
    }

    pub fn with_scheme(mut self, scheme: CornerScheme) -> Self {
        self.corner_scheme = scheme;
        self
    }

    pub fn naive(mut self) -> Self {
        self.naive = true;
        self
    }
}

/// One member of a quotient index set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct QuotientMember {
    pub level: usize,
    /// Local positions (not physical axes) of the high components.
    pub high: Vec<usize>,
    pub index: Vec<usize>,
}

/// Multi-indices spanning `Π_N^d / Π_{N-b}^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientIndexSet {
    extents: Vec<usize>,
    b: usize,
    members: Vec<QuotientMember>,
}

impl QuotientIndexSet {
    pub fn new(extents: &[usize], b: usize) -> Result<Self, TauError> {
        if let Some(&n) = extents.iter().find(|&&n| n <= b) {
            return Err(TauError::TooSmall { n, b });
        }
        let d = extents.len();
        let mut members = Vec::new();
        for level in 1..=d {
            for high in combinations(d, level) {
                let box_extents: Vec<usize> = (0..d).map(|j| if high.contains(&j) { b } else { extents[j] - b }).collect();
                for offset in MultiIndex::new(&box_extents) {
                    // high components run P_1, P_2, ... i.e. downward from N - 1
                    let index = (0..d).map(|j| if high.contains(&j) { extents[j] - 1 - offset[j] } else { offset[j] }).collect();
                    members.push(QuotientMember { level, high: high.clone(), index });
                }
            }
        }
        Ok(QuotientIndexSet { extents: extents.to_vec(), b, members })
    }

    pub fn isotropic(d: usize, n: usize, b: usize) -> Result<Self, TauError> {
        Self::new(&vec![n; d], b)
    }

    pub fn members(&self) -> &[QuotientMember] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    /// Member counts for levels `1..=d` (index 0 unused, always 0).
    pub fn level_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.extents.len() + 1];
        for m in &self.members {
            counts[m.level] += 1;
        }
        counts
    }

    pub fn order(&self) -> usize {
        self.b
    }
}

/// All `k`-subsets of `0..d` in lexicographic order.
pub fn combinations(d: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, d: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..d {
            cur.push(i);
            rec(i + 1, d, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, d, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// A tau column: a Kronecker product of per-axis sparse factors over a local
/// block of coefficients (row-major over the block's extents).
#[derive(Debug, Clone, PartialEq)]
pub struct TauColumn {
    pub level: usize,
    pub index: Vec<usize>,
    pub factors: Vec<Vec<(usize, f64)>>,
}

impl TauColumn {
    /// Nonzero `(flat offset, value)` pairs within a block of `extents`.
    pub fn entries(&self, extents: &[usize]) -> Vec<(usize, f64)> {
        let mut out = vec![(0usize, 1.0f64)];
        for (factor, &extent) in self.factors.iter().zip(extents) {
            let mut next = Vec::with_capacity(out.len() * factor.len());
            for &(flat, v) in &out {
                for &(i, w) in factor {
                    next.push((flat * extent + i, v * w));
                }
            }
            out = next;
        }
        out
    }

    /// Whether this column is a single unit entry.
    pub fn is_unit(&self) -> bool {
        self.factors.iter().all(|f| f.len() == 1 && f[0].1 == 1.0)
    }
}

fn sparse(v: &[f64]) -> Vec<(usize, f64)> {
    v.iter().enumerate().filter(|(_, &x)| x != 0.0).map(|(i, &x)| (i, x)).collect()
}

/// Tau columns spanning the quotient over a block of `extents`, with the
/// family's polynomials expressed in `target`.
pub fn quotient_columns(extents: &[usize], b: usize, family: &TauFamily, target: BasisId) -> Result<Vec<TauColumn>, TauError> {
    let set = QuotientIndexSet::new(extents, b)?;
    let polys: Vec<Vec<Vec<(usize, f64)>>> = extents
        .iter()
        .map(|&n| family.coeffs_in(n, b, target).map(|ps| ps.iter().map(|p| sparse(p)).collect()))
        .collect::<Result<_, _>>()?;
    Ok(set
        .members
        .iter()
        .map(|m| {
            let factors = m
                .index
                .iter()
                .enumerate()
                .map(|(j, &n_j)| {
                    if m.high.contains(&j) {
                        polys[j][extents[j] - n_j - 1].clone()
                    } else {
                        vec![(n_j, 1.0)]
                    }
                })
                .collect();
            TauColumn { level: m.level, index: m.index.clone(), factors }
        })
        .collect())
}

/// Interior tau columns in the coefficients of the test basis.
pub fn interior_tau_columns(extents: &[usize], b: usize, spec: &TauSpec, test: BasisId) -> Result<Vec<TauColumn>, TauError> {
    quotient_columns(extents, b, &spec.interior, test)
}

/// Tau columns for one boundary condition, over its face's tangential
/// extents, in Chebyshev coefficients.
pub fn boundary_tau_columns(face_extents: &[usize], b: usize, spec: &TauSpec) -> Result<Vec<TauColumn>, TauError> {
    if spec.naive {
        if face_extents.len() != 1 {
            return Err(TauError::Unsupported("naive boundary taus are defined for squares only".into()));
        }
        let q1 = spec.boundary.coeffs_in(face_extents[0], b, BasisId::Chebyshev)?.swap_remove(0);
        return Ok(vec![TauColumn { level: 1, index: vec![face_extents[0] - 1], factors: vec![sparse(&q1)] }]);
    }
    quotient_columns(face_extents, b, &spec.boundary, BasisId::Chebyshev)
}

/// One interface condition: `lhs_weight · (Π β) u + τ = Σ_i w_i (Π_{m≠i} β_m) g_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceBlock {
    /// Physical axes of the intersecting faces, increasing.
    pub axes: Vec<usize>,
    /// Boundary-condition index chosen on each axis.
    pub bcs: Vec<usize>,
    pub lhs_weight: f64,
    /// Weight on the term carrying `g` of the condition on `axes[i]`.
    pub rhs_weights: Vec<f64>,
    /// Extents of the remaining (tangential) axes.
    pub extents: Vec<usize>,
    pub taus: Vec<TauColumn>,
}

impl InterfaceBlock {
    /// Rows in this block.
    pub fn rows(&self) -> usize {
        self.extents.iter().product()
    }

    /// Rows left constraining `u` once the block's own taus are absorbed.
    pub fn constraining_rows(&self) -> usize {
        self.rows() - self.taus.len()
    }
}

/// Enumerate interface conditions for levels `2..=d`.
///
/// `sides[j]` lists the side of each boundary condition on axis `j`.
pub fn interface_blocks(extents: &[usize], b: usize, sides: &[Vec<Side>], spec: &TauSpec) -> Result<Vec<InterfaceBlock>, TauError> {
    let d = extents.len();
    if spec.naive {
        return Ok(Vec::new());
    }
    if d != 2 && spec.corner_scheme != CornerScheme::Dihedral {
        return Err(TauError::Unsupported("only the dihedral interface scheme is defined beyond two dimensions".into()));
    }
    let mut blocks = Vec::new();
    for level in 2..=d {
        for axes in combinations(d, level) {
            let rest: Vec<usize> = (0..d).filter(|j| !axes.contains(j)).collect();
            let rest_extents: Vec<usize> = rest.iter().map(|&j| extents[j]).collect();
            let counts: Vec<usize> = axes.iter().map(|&j| sides[j].len()).collect();
            for bcs in MultiIndex::new(&counts) {
                let taus = if rest.is_empty() {
                    Vec::new()
                } else {
                    quotient_columns(&rest_extents, b, &spec.boundary, BasisId::Chebyshev)?
                };
                blocks.push(InterfaceBlock {
                    axes: axes.clone(),
                    bcs,
                    lhs_weight: level as f64,
                    rhs_weights: vec![1.0; level],
                    extents: rest_extents.clone(),
                    taus,
                });
            }
        }
    }
    if d == 2 {
        apply_corner_scheme(&mut blocks, sides, &spec.corner_scheme)?;
    }
    Ok(blocks)
}

fn apply_corner_scheme(blocks: &mut [InterfaceBlock], sides: &[Vec<Side>], scheme: &CornerScheme) -> Result<(), TauError> {
    if let CornerScheme::Custom(w) = scheme {
        if w.len() != blocks.len() {
            return Err(TauError::Unsupported(format!("custom corner scheme needs {} weight pairs, got {}", blocks.len(), w.len())));
        }
    }
    for (i, block) in blocks.iter_mut().enumerate() {
        let sx = sides[0][block.bcs[0]];
        let sy = sides[1][block.bcs[1]];
        let (wx, wy) = match scheme {
            CornerScheme::Dihedral => (1.0, 1.0),
            CornerScheme::Clockwise if sx == sy => (1.0, 0.0),
            CornerScheme::Clockwise => (0.0, 1.0),
            CornerScheme::EastWest => (0.0, 1.0),
            CornerScheme::Custom(w) => w[i],
        };
        block.lhs_weight = wx + wy;
        block.rhs_weights = vec![wx, wy];
    }
    Ok(())
}

/// Per-level constraint counts `C(d,k) b^k (N-b)^{d-k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountingTable {
    pub d: usize,
    pub n: usize,
    pub b: usize,
    /// `(conditions, rows per condition, total)` for `k = 0..=d`.
    pub levels: Vec<(u128, u128, u128)>,
    pub total: u128,
    pub holds: bool,
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Check `N^d = Σ_k C(d,k) b^k (N-b)^{d-k}` level by level.
pub fn counting_identity(d: usize, n: usize, b: usize) -> Result<CountingTable, TauError> {
    if n <= b {
        return Err(TauError::TooSmall { n, b });
    }
    let levels: Vec<(u128, u128, u128)> = (0..=d)
        .map(|k| {
            let conditions = binomial(d, k) * (b as u128).pow(k as u32);
            let rows = ((n - b) as u128).pow((d - k) as u32);
            (conditions, rows, conditions * rows)
        })
        .collect();
    let total = levels.iter().map(|l| l.2).sum();
    Ok(CountingTable { d, n, b, levels, total, holds: total == (n as u128).pow(d as u32) })
}

/// Constant-coefficient operator `L(∂) = Σ_k l_k ∂^k` of exact order `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorPolynomial1D {
    coeffs: Vec<f64>,
}

impl OperatorPolynomial1D {
    pub fn new(coeffs: Vec<f64>) -> Result<Self, TauError> {
        match coeffs.last() {
            Some(&c) if c != 0.0 => Ok(OperatorPolynomial1D { coeffs }),
            _ => Err(TauError::ZeroLeading),
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Degree `a` of the largest monomial factor, `L = ∂^a L̃`.
    pub fn monomial_degree(&self) -> usize {
        self.coeffs.iter().position(|&c| c != 0.0).unwrap()
    }

    /// Coefficients of `L̃`, with `L̃(0) != 0`.
    pub fn quotient_factor(&self) -> &[f64] {
        &self.coeffs[self.monomial_degree()..]
    }
}

/// Solution of a one-dimensional tau problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Tau1dSolution {
    /// Chebyshev coefficients of `u`.
    pub u: Vec<f64>,
    pub taus: Vec<f64>,
}

/// Solve `L(∂) u + Σ τ_k P_k = f`, `β_i u = g_i` on `domain` with `n` modes.
///
/// `f` holds Chebyshev coefficients (at most `n`); the residual is projected
/// onto the order-`b` ultraspherical test basis.
pub fn solve_tau_1d(
    op: &OperatorPolynomial1D,
    bcs: &[(BoundaryOperator, f64)],
    f: &[f64],
    spec: &TauSpec,
    n: usize,
    domain: (f64, f64),
) -> Result<Tau1dSolution, TauError> {
    let b = op.order();
    if bcs.len() != b {
        return Err(TauError::BoundaryCount { expected: b, got: bcs.len() });
    }
    if n <= b || f.len() > n {
        return Err(TauError::TooSmall { n, b: b.max(f.len().saturating_sub(1)) });
    }
    let test = BasisId::from_index(b as u32);
    let size = n + b;
    let mut a = vec![0.0; size * size];
    let scale = 2.0 / (domain.1 - domain.0);
    for (k, &l) in op.coeffs().iter().enumerate() {
        if l == 0.0 {
            continue;
        }
        let term = derivative_into(BasisId::Chebyshev, k, test, n);
        let factor = l * scale.powi(k as i32);
        for (i, j, v) in term.entries() {
            a[i * size + j] += factor * v;
        }
    }
    for (k, p) in spec.interior.coeffs_in(n, b, test)?.iter().enumerate() {
        for (i, &v) in p.iter().enumerate() {
            a[i * size + n + k] = v;
        }
    }
    let mut rhs = vec![0.0; size];
    let mut fpad = f.to_vec();
    fpad.resize(n, 0.0);
    rhs[..n].copy_from_slice(&conversion_chain(BasisId::Chebyshev, test, n).apply(&fpad));
    for (r, (bc, g)) in bcs.iter().enumerate() {
        let row = bc.functional_row(n, domain)?;
        a[(n + r) * size..(n + r) * size + n].copy_from_slice(&row);
        rhs[n + r] = *g;
    }
    let mat = mat_from_row_major(size, size, &a);
    let s = singular_values(&mat);
    let rank = s.iter().filter(|&&v| v > 1e-12 * s[0]).count();
    if rank < size {
        return Err(TauError::Singular { rank, size });
    }
    let x = DenseLu::new(&mat).solve(&rhs);
    Ok(Tau1dSolution { u: x[..n].to_vec(), taus: x[n..].to_vec() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{eval_all, Side};
    use approx::assert_abs_diff_eq;

    #[test]
    fn interior_column_counts() {
        let spec = TauSpec::standard(2);
        let c2 = BasisId::Ultraspherical(2);
        assert_eq!(interior_tau_columns(&[16, 16], 2, &spec, c2).unwrap().len(), 60);
        assert_eq!(interior_tau_columns(&[16, 16, 16], 2, &spec, c2).unwrap().len(), 1352);
        assert_eq!(interior_tau_columns(&[8], 2, &spec, c2).unwrap().len(), 2);
        let cols = interior_tau_columns(&[16, 16], 2, &spec, c2).unwrap();
        assert!(cols.iter().all(TauColumn::is_unit), "standard choice gives unit columns");
    }

    #[test]
    fn boundary_column_counts() {
        let spec = TauSpec::standard(2);
        let cols = boundary_tau_columns(&[16], 2, &spec).unwrap();
        assert_eq!(cols.len(), 2);
        assert_eq!(cols[0].factors[0], vec![(15, 1.0)]);
        assert_eq!(cols[1].factors[0], vec![(14, 1.0)]);
        assert_eq!(boundary_tau_columns(&[10, 10], 2, &spec).unwrap().len(), 36);
        let naive = boundary_tau_columns(&[16], 2, &spec.clone().naive()).unwrap();
        assert_eq!(naive.len(), 1);
        assert!(boundary_tau_columns(&[10, 10], 2, &spec.naive()).is_err());
    }

    #[test]
    fn quotient_cardinalities() {
        for d in 1..=3 {
            for b in [2usize, 4] {
                for n in [b + 1, 8, 13] {
                    let set = QuotientIndexSet::isotropic(d, n, b).unwrap();
                    assert_eq!(set.len(), n.pow(d as u32) - (n - b).pow(d as u32));
                    let counts = set.level_counts();
                    for (k, &c) in counts.iter().enumerate().skip(1) {
                        assert_eq!(c as u128, binomial(d, k) * (b.pow(k as u32) * (n - b).pow((d - k) as u32)) as u128);
                    }
                }
            }
        }
        assert!(QuotientIndexSet::isotropic(2, 2, 2).is_err());
    }

    #[test]
    fn quotient_order_is_stable() {
        let set = QuotientIndexSet::isotropic(2, 4, 2).unwrap();
        let first = &set.members()[0];
        assert_eq!((first.level, first.high.clone(), first.index.clone()), (1, vec![0], vec![3, 0]));
        let last = set.members().last().unwrap();
        assert_eq!((last.level, last.index.clone()), (2, vec![2, 2]));
        assert!(set.members().windows(2).all(|w| (w[0].level, &w[0].high) <= (w[1].level, &w[1].high)));
    }

    #[test]
    fn counting_examples() {
        let t = counting_identity(2, 16, 2).unwrap();
        assert_eq!(t.levels.iter().map(|l| l.2).collect::<Vec<_>>(), vec![196, 56, 4]);
        assert!(t.holds);
        let t = counting_identity(3, 16, 2).unwrap();
        assert_eq!(t.levels.iter().map(|l| l.2).collect::<Vec<_>>(), vec![2744, 1176, 168, 8]);
        assert_eq!(t.total, 4096);
        let t = counting_identity(1, 8, 4).unwrap();
        assert_eq!(t.levels.iter().map(|l| l.2).collect::<Vec<_>>(), vec![4, 4]);
    }

    #[test]
    fn interface_counts_3d() {
        let sides = vec![vec![Side::Low, Side::High]; 3];
        let blocks = interface_blocks(&[16, 16, 16], 2, &sides, &TauSpec::standard(2)).unwrap();
        let edges: Vec<_> = blocks.iter().filter(|b| b.axes.len() == 2).collect();
        let corners: Vec<_> = blocks.iter().filter(|b| b.axes.len() == 3).collect();
        assert_eq!(edges.len(), 12);
        assert_eq!(corners.len(), 8);
        assert!(edges.iter().all(|b| b.constraining_rows() == 14 && b.lhs_weight == 2.0));
        let total: usize = blocks.iter().map(InterfaceBlock::constraining_rows).sum();
        assert_eq!(total, 176);
    }

    #[test]
    fn clockwise_and_east_west_weights() {
        let sides = vec![vec![Side::Low, Side::High]; 2];
        let spec = TauSpec::standard(2).with_scheme(CornerScheme::Clockwise);
        let blocks = interface_blocks(&[8, 8], 2, &sides, &spec).unwrap();
        // (W, N) corner takes the north data
        let nw = blocks.iter().find(|b| b.bcs == vec![0, 1]).unwrap();
        assert_eq!(nw.rhs_weights, vec![0.0, 1.0]);
        let ne = blocks.iter().find(|b| b.bcs == vec![1, 1]).unwrap();
        assert_eq!(ne.rhs_weights, vec![1.0, 0.0]);
        let ew = interface_blocks(&[8, 8], 2, &sides, &TauSpec::standard(2).with_scheme(CornerScheme::EastWest)).unwrap();
        assert!(ew.iter().all(|b| b.rhs_weights == vec![0.0, 1.0] && b.lhs_weight == 1.0));
        let three = vec![vec![Side::Low, Side::High]; 3];
        assert!(interface_blocks(&[8, 8, 8], 2, &three, &spec).is_err());
    }

    #[test]
    fn spanning_checked() {
        let bad = TauFamily::Custom(vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0]]);
        assert!(matches!(bad.chebyshev_coeffs(4, 2), Err(TauError::NotSpanning { .. })));
        let good = TauFamily::Custom(vec![vec![0.0, 0.0, 1.0, 1.0], vec![0.0, 0.0, 1.0, -1.0]]);
        assert!(good.chebyshev_coeffs(4, 2).is_ok());
        for fam in [TauFamily::Chebyshev, TauFamily::Ultraspherical(2), TauFamily::EndpointLagrange] {
            for b in [2, 4] {
                assert!(fam.chebyshev_coeffs(12, b).is_ok(), "{fam:?} b={b}");
            }
        }
    }

    #[test]
    fn endpoint_lagrange_is_cardinal() {
        let polys = TauFamily::EndpointLagrange.chebyshev_coeffs(9, 2).unwrap();
        let tr = ChebyshevTransform::new(9).unwrap();
        let at_right = tr.inverse(&polys[0]).unwrap();
        assert_abs_diff_eq!(at_right[8], 1.0, epsilon = 1e-13);
        assert!(at_right[..8].iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn operator_polynomial() {
        let op = OperatorPolynomial1D::new(vec![0.0, 0.0, 1.0, 3.0]).unwrap();
        assert_eq!(op.order(), 3);
        assert_eq!(op.monomial_degree(), 2);
        assert_eq!(op.quotient_factor(), &[1.0, 3.0]);
        assert!(OperatorPolynomial1D::new(vec![1.0, 0.0]).is_err());
    }

    fn dirichlet_pair() -> Vec<BoundaryOperator> {
        vec![BoundaryOperator::dirichlet(0, Side::Low), BoundaryOperator::dirichlet(0, Side::High)]
    }

    #[test]
    fn harmonic_1d() {
        let op = OperatorPolynomial1D::new(vec![0.0, 0.0, 1.0]).unwrap();
        let bcs: Vec<_> = dirichlet_pair().into_iter().zip([-1.0, 1.0]).collect();
        let sol = solve_tau_1d(&op, &bcs, &[0.0; 8], &TauSpec::standard(2), 8, (-1.0, 1.0)).unwrap();
        for (k, v) in sol.u.iter().enumerate() {
            assert_abs_diff_eq!(*v, if k == 1 { 1.0 } else { 0.0 }, epsilon = 1e-13);
        }
        assert!(sol.taus.iter().all(|t| t.abs() < 1e-13));
    }

    /// Monomial coefficients of C^(2)_n via its recurrence.
    fn c2_monomial(n: usize) -> Vec<f64> {
        let mut p = vec![vec![1.0], vec![0.0, 4.0]];
        for k in 1..n {
            let kf = k as f64;
            let mut next = vec![0.0; k + 2];
            for (i, &c) in p[k].iter().enumerate() {
                next[i + 1] += 2.0 * (kf + 2.0) * c / (kf + 1.0);
            }
            for (i, &c) in p[k - 1].iter().enumerate() {
                next[i] -= (kf + 3.0) * c / (kf + 1.0);
            }
            p.push(next);
        }
        p[n].clone()
    }

    fn poly_eval(m: &[f64], x: f64) -> f64 {
        m.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    #[test]
    fn forced_1d_matches_antiderivative_construction() {
        // u'' + τ1 C2_5 + τ2 C2_4 = T_5, u(±1) = 0 with N = 6.
        let n = 6;
        let t5 = [0.0, 5.0, 0.0, -20.0, 0.0, 16.0]; // monomials of T_5
        let c5 = c2_monomial(5);
        let c4 = c2_monomial(4);
        // tau values from matching the x^5 and x^4 coefficients
        let tau1 = t5[5] / c5[5];
        let tau2 = (t5[4] - tau1 * c5[4]) / c4[4];
        let mut fhat = t5.to_vec();
        for i in 0..6 {
            fhat[i] -= tau1 * c5.get(i).unwrap_or(&0.0) + tau2 * c4.get(i).unwrap_or(&0.0);
        }
        assert!(fhat[4].abs() < 1e-12 && fhat[5].abs() < 1e-12);
        // integrate twice, then fix a + b x from u(±1) = 0
        let mut u = vec![0.0; 8];
        for (i, &c) in fhat.iter().enumerate() {
            u[i + 2] = c / ((i + 1) * (i + 2)) as f64;
        }
        let (up, um) = (poly_eval(&u, 1.0), poly_eval(&u, -1.0));
        u[0] -= (up + um) / 2.0;
        u[1] -= (up - um) / 2.0;

        let op = OperatorPolynomial1D::new(vec![0.0, 0.0, 1.0]).unwrap();
        let bcs: Vec<_> = dirichlet_pair().into_iter().zip([0.0, 0.0]).collect();
        let mut f = vec![0.0; n];
        f[5] = 1.0;
        let sol = solve_tau_1d(&op, &bcs, &f, &TauSpec::standard(2), n, (-1.0, 1.0)).unwrap();
        assert_abs_diff_eq!(sol.taus[0], tau1, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.taus[1], tau2, epsilon = 1e-12);
        for i in 0..11 {
            let x = -1.0 + 0.2 * i as f64;
            let got: f64 = eval_all(BasisId::Chebyshev, n, x).iter().zip(&sol.u).map(|(p, c)| p * c).sum();
            assert_abs_diff_eq!(got, poly_eval(&u, x), epsilon = 1e-12);
        }
    }

    #[test]
    fn duplicated_conditions_are_singular() {
        let op = OperatorPolynomial1D::new(vec![0.0, 0.0, 1.0]).unwrap();
        let d = BoundaryOperator::dirichlet(0, Side::Low);
        let bcs = vec![(d.clone(), 0.0), (d, 0.0)];
        let err = solve_tau_1d(&op, &bcs, &[1.0], &TauSpec::standard(2), 8, (-1.0, 1.0)).unwrap_err();
        assert_eq!(err, TauError::Singular { rank: 9, size: 10 });
    }

    #[test]
    fn straight_derivative_needs_no_tau() {
        // ∂^b u = f with deg f < N - b: taus vanish and the residual is exact.
        for (b, bcs) in [
            (2usize, dirichlet_pair()),
            (
                4,
                vec![
                    BoundaryOperator::dirichlet(0, Side::Low),
                    BoundaryOperator::dirichlet(0, Side::High),
                    BoundaryOperator::neumann(0, Side::Low),
                    BoundaryOperator::neumann(0, Side::High),
                ],
            ),
        ] {
            let n = 12;
            let mut coeffs = vec![0.0; b + 1];
            coeffs[b] = 1.0;
            let op = OperatorPolynomial1D::new(coeffs).unwrap();
            let f: Vec<f64> = (0..n - b).map(|k| 1.0 / (1.0 + k as f64)).collect();
            let data: Vec<_> = bcs.into_iter().zip([0.3, -0.2, 0.5, 0.1]).collect();
            for family in [TauFamily::Chebyshev, TauFamily::Ultraspherical(b as u32), TauFamily::EndpointLagrange] {
                let spec = TauSpec::standard(b).with_interior(family);
                let sol = solve_tau_1d(&op, &data, &f, &spec, n, (-1.0, 1.0)).unwrap();
                assert!(sol.taus.iter().all(|t| t.abs() < 1e-10), "b={b} taus={:?}", sol.taus);
                for (bc, g) in &data {
                    let row = bc.functional_row(n, (-1.0, 1.0)).unwrap();
                    let val: f64 = row.iter().zip(&sol.u).map(|(r, c)| r * c).sum();
                    assert_abs_diff_eq!(val, *g, epsilon = 1e-10);
                }
            }
        }
    }
}
