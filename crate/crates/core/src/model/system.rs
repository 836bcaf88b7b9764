use std::collections::BTreeSet;

use super::{BlockStructure, InverseJet, ModelError, PhasePoint};
use crate::expr::{BoundExpr, Expression, ParseError};
use crate::linalg::{checked_inverse, ConditionedInverse, LinalgError, Mat};
use crate::sampling::{self, CoordinateBox, DEFAULT_SEED};
use crate::scalar::Scalar;

/// Number of seeded samples drawn from the probe region at build time.
pub const PROBE_SAMPLES: usize = 20;

/// `n × n` grid of expressions; entry `(r, a)` is `S^a_r` and row `r` may only
/// depend on block-`r` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct StackelMatrix {
    entries: Vec<Vec<Expression>>,
}

impl StackelMatrix {
    pub fn new(entries: Vec<Vec<Expression>>) -> Result<Self, ModelError> {
        let n = entries.len();
        for (r, row) in entries.iter().enumerate() {
            if row.len() != n {
                return Err(ModelError::Dimension {
                    what: format!("Stäckel row {}", r + 1),
                    expected: n,
                    got: row.len(),
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn parse<S: AsRef<str>>(rows: &[Vec<S>]) -> Result<Self, ModelError> {
        let entries = rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                row.iter()
                    .enumerate()
                    .map(|(a, s)| parse_entry(s.as_ref(), || stackel_name(r, a)))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(entries)
    }

    pub fn identity(n: usize) -> Self {
        let entries = (0..n)
            .map(|r| (0..n).map(|a| Expression::constant(if r == a { 1.0 } else { 0.0 })).collect())
            .collect();
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, r: usize, a: usize) -> &Expression {
        &self.entries[r][a]
    }

    pub fn rows(&self) -> &[Vec<Expression>] {
        &self.entries
    }

    /// Copy with entry `(r, a)` replaced.
    pub fn with_entry(&self, r: usize, a: usize, e: Expression) -> Self {
        let mut out = self.clone();
        out.entries[r][a] = e;
        out
    }
}

/// `H_r = ½ g_r^{ij} p_i p_j + V_r` on one block.
#[derive(Debug, Clone, PartialEq)]
pub struct NaturalBlock {
    metric: Vec<Vec<Expression>>,
    potential: Expression,
}

impl NaturalBlock {
    /// Full contravariant grid; must be structurally symmetric.
    pub fn new(metric: Vec<Vec<Expression>>, potential: Expression) -> Result<Self, ModelError> {
        let m = metric.len();
        for (i, row) in metric.iter().enumerate() {
            if row.len() != m {
                return Err(ModelError::Dimension { what: format!("metric row {}", i + 1), expected: m, got: row.len() });
            }
            for j in 0..i {
                if metric[i][j].to_string() != metric[j][i].to_string() {
                    return Err(ModelError::Asymmetric { entry: format!("entries ({},{}) and ({},{})", i + 1, j + 1, j + 1, i + 1) });
                }
            }
        }
        Ok(Self { metric, potential })
    }

    /// Symmetric metric from its upper triangle: `upper[i][j - i]` holds `g^{ij}` for `j ≥ i`.
    pub fn from_upper(upper: Vec<Vec<Expression>>, potential: Expression) -> Result<Self, ModelError> {
        let m = upper.len();
        for (i, row) in upper.iter().enumerate() {
            if row.len() != m - i {
                return Err(ModelError::Dimension { what: format!("upper metric row {}", i + 1), expected: m - i, got: row.len() });
            }
        }
        let metric = (0..m)
            .map(|i| (0..m).map(|j| if j >= i { upper[i][j - i].clone() } else { upper[j][i - j].clone() }).collect())
            .collect();
        Ok(Self { metric, potential })
    }

    pub fn diagonal(diag: Vec<Expression>, potential: Expression) -> Self {
        let m = diag.len();
        let metric = (0..m)
            .map(|i| (0..m).map(|j| if i == j { diag[i].clone() } else { Expression::constant(0.0) }).collect())
            .collect();
        Self { metric, potential }
    }

    pub fn parse_diagonal<S: AsRef<str>>(diag: &[S], potential: &str) -> Result<Self, ModelError> {
        let d = diag
            .iter()
            .enumerate()
            .map(|(i, s)| parse_entry(s.as_ref(), || format!("metric entry ({},{})", i + 1, i + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::diagonal(d, parse_entry(potential, || "potential".into())?))
    }

    /// Free particle in `m` Euclidean coordinates.
    pub fn free(m: usize) -> Self {
        Self::diagonal(vec![Expression::constant(1.0); m], Expression::constant(0.0))
    }

    pub fn size(&self) -> usize {
        self.metric.len()
    }

    pub fn metric(&self) -> &[Vec<Expression>] {
        &self.metric
    }

    pub fn potential(&self) -> &Expression {
        &self.potential
    }
}

fn parse_entry(src: &str, name: impl Fn() -> String) -> Result<Expression, ModelError> {
    Expression::parse(src).map_err(|e: ParseError| ModelError::Structure(format!("{}: {e}", name())))
}

fn stackel_name(r: usize, a: usize) -> String {
    format!("Stäckel entry S[{}][{}]", r + 1, a + 1)
}

fn metric_name(r: usize, i: usize, j: usize) -> String {
    format!("block {} metric entry ({},{})", r + 1, i + 1, j + 1)
}

fn potential_name(r: usize) -> String {
    format!("block {} potential", r + 1)
}

/// Points used to validate a system at build time.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSet {
    pub points: Vec<Vec<f64>>,
    pub region: Option<CoordinateBox>,
    pub samples: usize,
    pub seed: u64,
}

impl Default for ProbeSet {
    fn default() -> Self {
        Self { points: Vec::new(), region: None, samples: PROBE_SAMPLES, seed: DEFAULT_SEED }
    }
}

impl ProbeSet {
    pub fn points(points: Vec<Vec<f64>>) -> Self {
        Self { points, ..Self::default() }
    }

    pub fn with_region(mut self, region: CoordinateBox) -> Self {
        self.region = Some(region);
        self
    }

    fn resolve(&self) -> Vec<Vec<f64>> {
        let mut out = self.points.clone();
        if let Some(region) = &self.region {
            let mut rng = sampling::rng(self.seed);
            out.extend((0..self.samples).map(|_| region.sample(&mut rng)));
        }
        out
    }
}

/// A validated twisted product `H = α^r H_r`.
///
/// All expressions are bound to the global coordinate list, so every
/// evaluation method takes full-length `q` (and `p`) slices.
#[derive(Debug, Clone)]
pub struct TwistedSystem {
    structure: BlockStructure,
    stackel: StackelMatrix,
    blocks: Vec<NaturalBlock>,
    probes: ProbeSet,
    probe_points: Vec<Vec<f64>>,
    s: Vec<Vec<BoundExpr>>,
    g: Vec<Vec<Vec<BoundExpr>>>,
    v: Vec<BoundExpr>,
}

/// Validates and assembles a [`TwistedSystem`].
///
/// Checks dimensions, that row `r` of `S` and the data of block `r` only
/// mention block-`r` coordinates, and that `S` is invertible and every block
/// metric nondegenerate at the declared probe points plus
/// [`PROBE_SAMPLES`] seeded samples from the probe region.
pub fn build_system(
    structure: BlockStructure,
    stackel: StackelMatrix,
    blocks: Vec<NaturalBlock>,
    probes: ProbeSet,
) -> Result<TwistedSystem, ModelError> {
    let n = structure.n_blocks();
    if stackel.dim() != n {
        return Err(ModelError::Dimension { what: "Stäckel matrix".into(), expected: n, got: stackel.dim() });
    }
    if blocks.len() != n {
        return Err(ModelError::Dimension { what: "block list".into(), expected: n, got: blocks.len() });
    }
    for (r, b) in blocks.iter().enumerate() {
        if b.size() != structure.size(r) {
            return Err(ModelError::Dimension {
                what: format!("block {} metric", r + 1),
                expected: structure.size(r),
                got: b.size(),
            });
        }
    }

    let names = structure.names();
    let check = |e: &Expression, r: usize, entry: &dyn Fn() -> String| -> Result<BoundExpr, ModelError> {
        let own: BTreeSet<&str> = structure.block_names(r).iter().map(String::as_str).collect();
        for var in e.free_variables() {
            if own.contains(var.as_str()) {
                continue;
            }
            return Err(match structure.index_of(&var) {
                Some(k) => ModelError::ForeignVariable {
                    entry: entry(),
                    variable: var,
                    block: r + 1,
                    owner: structure.block_of(k) + 1,
                },
                None => ModelError::UnknownVariable { entry: entry(), variable: var },
            });
        }
        e.bind(names).map_err(ModelError::eval(entry()))
    };

    let mut s = Vec::with_capacity(n);
    for r in 0..n {
        let row = (0..n)
            .map(|a| check(stackel.entry(r, a), r, &|| stackel_name(r, a)))
            .collect::<Result<Vec<_>, _>>()?;
        s.push(row);
    }
    let mut g = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for (r, b) in blocks.iter().enumerate() {
        let m = b.size();
        let grid = (0..m)
            .map(|i| (0..m).map(|j| check(&b.metric[i][j], r, &|| metric_name(r, i, j))).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        g.push(grid);
        v.push(check(&b.potential, r, &|| potential_name(r))?);
    }

    for (k, pt) in probes.points.iter().enumerate() {
        if pt.len() != structure.dim() {
            return Err(ModelError::Dimension { what: format!("probe point {}", k + 1), expected: structure.dim(), got: pt.len() });
        }
    }
    if let Some(region) = &probes.region {
        if region.dim() != structure.dim() {
            return Err(ModelError::Dimension { what: "probe region".into(), expected: structure.dim(), got: region.dim() });
        }
    }

    let probe_points = probes.resolve();
    let sys = TwistedSystem { structure, stackel, blocks, probes, probe_points, s, g, v };
    for q in &sys.probe_points {
        sys.twist_rows(q)?;
        for r in 0..n {
            let gm = sys.block_metric(r, q)?;
            if gm.lu().is_err() {
                return Err(ModelError::DegenerateMetric { block: r, point: q.clone() });
            }
        }
    }
    Ok(sys)
}

impl TwistedSystem {
    pub fn structure(&self) -> &BlockStructure {
        &self.structure
    }

    pub fn stackel(&self) -> &StackelMatrix {
        &self.stackel
    }

    pub fn blocks(&self) -> &[NaturalBlock] {
        &self.blocks
    }

    pub fn n_blocks(&self) -> usize {
        self.structure.n_blocks()
    }

    /// Total number of configuration coordinates.
    pub fn dim(&self) -> usize {
        self.structure.dim()
    }

    pub fn probes(&self) -> &ProbeSet {
        &self.probes
    }

    /// Declared plus sampled probe points used at build time.
    pub fn probe_points(&self) -> &[Vec<f64>] {
        &self.probe_points
    }

    /// Rebuilds with a different Stäckel matrix and the same blocks and probes.
    pub fn with_stackel(&self, stackel: StackelMatrix) -> Result<Self, ModelError> {
        build_system(self.structure.clone(), stackel, self.blocks.clone(), self.probes.clone())
    }

    pub fn stackel_bound(&self, r: usize, a: usize) -> &BoundExpr {
        &self.s[r][a]
    }

    pub fn metric_bound(&self, r: usize, i: usize, j: usize) -> &BoundExpr {
        &self.g[r][i][j]
    }

    pub fn potential_bound(&self, r: usize) -> &BoundExpr {
        &self.v[r]
    }

    fn check_len<T>(&self, q: &[T]) {
        assert_eq!(q.len(), self.dim(), "coordinate vector has wrong length");
    }

    pub fn stackel_at<T: Scalar>(&self, q: &[T]) -> Result<Mat<T>, ModelError> {
        self.check_len(q);
        let n = self.n_blocks();
        let mut m = Mat::zeros(n, n);
        for r in 0..n {
            for a in 0..n {
                m[(r, a)] = self.s[r][a].eval(q).map_err(ModelError::eval(stackel_name(r, a)))?;
            }
        }
        Ok(m)
    }

    fn singular(q: &[impl Scalar], source: LinalgError) -> ModelError {
        ModelError::SingularStackel { point: q.iter().map(Scalar::real).collect(), source }
    }

    /// `S⁻¹` by LU, over any scalar (dual inputs give its derivatives).
    pub fn inverse_at<T: Scalar>(&self, q: &[T]) -> Result<Mat<T>, ModelError> {
        self.stackel_at(q)?.inverse().map_err(|e| Self::singular(q, e))
    }

    /// `S⁻¹(q)` with its condition number; row `a` holds the coefficients of `K_a`.
    pub fn twist_rows(&self, q: &[f64]) -> Result<ConditionedInverse, ModelError> {
        checked_inverse(&self.stackel_at(q)?).map_err(|e| Self::singular(q, e))
    }

    /// Twist functions `α^r`, the first row of `S⁻¹`.
    pub fn alpha<T: Scalar>(&self, q: &[T]) -> Result<Vec<T>, ModelError> {
        Ok(self.inverse_at(q)?.row(0).to_vec())
    }

    /// `∂_k S`, exact via dual numbers.
    pub fn stackel_gradient(&self, q: &[f64]) -> Result<Vec<Mat<f64>>, ModelError> {
        self.check_len(q);
        let n = self.n_blocks();
        let mut out = vec![Mat::zeros(n, n); self.dim()];
        for r in 0..n {
            for a in 0..n {
                let e = &self.s[r][a];
                for &k in e.slots() {
                    out[k][(r, a)] = e.partial(q, k).map_err(ModelError::eval(stackel_name(r, a)))?;
                }
            }
        }
        Ok(out)
    }

    /// `∂_k ∂_l S`.
    pub fn stackel_hessian(&self, q: &[f64]) -> Result<Vec<Vec<Mat<f64>>>, ModelError> {
        self.check_len(q);
        let n = self.n_blocks();
        let dim = self.dim();
        let mut out = vec![vec![Mat::zeros(n, n); dim]; dim];
        for r in 0..n {
            for a in 0..n {
                let e = &self.s[r][a];
                for &k in e.slots() {
                    for &l in e.slots() {
                        if l < k {
                            continue;
                        }
                        let d = e.second_partial(q, k, l).map_err(ModelError::eval(stackel_name(r, a)))?;
                        out[k][l][(r, a)] = d;
                        out[l][k][(r, a)] = d;
                    }
                }
            }
        }
        Ok(out)
    }

    /// `S⁻¹` with analytic first (and optionally second) partials.
    pub fn inverse_jet(&self, q: &[f64], second: bool) -> Result<InverseJet, ModelError> {
        let s = self.stackel_at(q)?;
        let ds = self.stackel_gradient(q)?;
        let dds = if second { Some(self.stackel_hessian(q)?) } else { None };
        InverseJet::new(&s, &ds, dds.as_deref()).map_err(|e| Self::singular(q, e))
    }

    /// Contravariant metric `g_r` of block `r`.
    pub fn block_metric<T: Scalar>(&self, r: usize, q: &[T]) -> Result<Mat<T>, ModelError> {
        self.check_len(q);
        let m = self.structure.size(r);
        let mut out = Mat::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                out[(i, j)] = self.g[r][i][j].eval(q).map_err(ModelError::eval(metric_name(r, i, j)))?;
            }
        }
        Ok(out)
    }

    pub fn block_potential<T: Scalar>(&self, r: usize, q: &[T]) -> Result<T, ModelError> {
        self.check_len(q);
        self.v[r].eval(q).map_err(ModelError::eval(potential_name(r)))
    }

    /// `½ g_r^{ij} p_i p_j` from global slices.
    pub fn block_kinetic<T: Scalar>(&self, r: usize, q: &[T], p: &[T]) -> Result<T, ModelError> {
        let g = self.block_metric(r, q)?;
        let pr = &p[self.structure.range(r)];
        let gp = g.matvec(pr);
        let two = T::lit(2.0);
        Ok(pr.iter().zip(&gp).fold(T::zero(), |acc, (&a, &b)| acc + a * b) / two)
    }

    /// `H_r`, reading only the block-`r` slices of `pt`.
    pub fn block_energy<T: Scalar>(&self, r: usize, pt: &PhasePoint<T>) -> Result<T, ModelError> {
        self.block_energy_qp(r, &pt.q, &pt.p)
    }

    pub fn block_energy_qp<T: Scalar>(&self, r: usize, q: &[T], p: &[T]) -> Result<T, ModelError> {
        self.check_len(p);
        Ok(self.block_kinetic(r, q, p)? + self.block_potential(r, q)?)
    }

    pub fn block_energies<T: Scalar>(&self, pt: &PhasePoint<T>) -> Result<Vec<T>, ModelError> {
        (0..self.n_blocks()).map(|r| self.block_energy(r, pt)).collect()
    }

    /// `H = α^r H_r`.
    pub fn hamiltonian<T: Scalar>(&self, pt: &PhasePoint<T>) -> Result<T, ModelError> {
        self.first_integral(0, pt)
    }

    /// `K_a = (S⁻¹)_a^r H_r`; `a = 0` is `H`.
    pub fn first_integral<T: Scalar>(&self, a: usize, pt: &PhasePoint<T>) -> Result<T, ModelError> {
        let n = self.n_blocks();
        if a >= n {
            return Err(ModelError::IndexOutOfRange { what: "first integral", index: a, limit: n });
        }
        let inv = self.inverse_at(&pt.q)?;
        let h = self.block_energies(pt)?;
        Ok(inv.row(a).iter().zip(&h).fold(T::zero(), |acc, (&x, &y)| acc + x * y))
    }

    /// All `K_a`, `K_0 = H`.
    pub fn first_integrals<T: Scalar>(&self, pt: &PhasePoint<T>) -> Result<Vec<T>, ModelError> {
        Ok(self.inverse_at(&pt.q)?.matvec(&self.block_energies(pt)?))
    }

    /// `c_a = K_a(P)`, obtained by solving `S c = (H_1, …, H_n)`.
    pub fn separation_constants(&self, pt: &PhasePoint) -> Result<Vec<f64>, ModelError> {
        let s = self.stackel_at(&pt.q)?;
        let lu = s.lu().map_err(|e| Self::singular(&pt.q, e))?;
        Ok(lu.solve(&self.block_energies(pt)?))
    }

    /// `H̃_r = H_r − c_a S^a_r`.
    pub fn reduced_hamiltonian<T: Scalar>(&self, r: usize, c: &[f64], pt: &PhasePoint<T>) -> Result<T, ModelError> {
        let n = self.n_blocks();
        if c.len() != n {
            return Err(ModelError::Dimension { what: "separation constants".into(), expected: n, got: c.len() });
        }
        let mut h = self.block_energy(r, pt)?;
        for (a, &ca) in c.iter().enumerate() {
            h = h - T::lit(ca) * self.s[r][a].eval(&pt.q).map_err(ModelError::eval(stackel_name(r, a)))?;
        }
        Ok(h)
    }

    /// Total potential `V = α^r V_r`.
    pub fn potential<T: Scalar>(&self, q: &[T]) -> Result<T, ModelError> {
        self.integral_potential(0, q)
    }

    /// `W_a = (S⁻¹)_a^r V_r`, the potential part of `K_a`.
    pub fn integral_potential<T: Scalar>(&self, a: usize, q: &[T]) -> Result<T, ModelError> {
        let inv = self.inverse_at(q)?;
        let mut w = T::zero();
        for r in 0..self.n_blocks() {
            w = w + inv[(a, r)] * self.block_potential(r, q)?;
        }
        Ok(w)
    }

    /// Contravariant `k_a`, block diagonal with blocks `(S⁻¹)_a^r g_r`;
    /// `a = 0` gives the metric `G`.
    pub fn integral_tensor<T: Scalar>(&self, a: usize, q: &[T]) -> Result<Mat<T>, ModelError> {
        let inv = self.inverse_at(q)?;
        let dim = self.dim();
        let mut out = Mat::zeros(dim, dim);
        for r in 0..self.n_blocks() {
            let g = self.block_metric(r, q)?;
            let off = self.structure.range(r).start;
            for i in 0..g.rows() {
                for j in 0..g.cols() {
                    out[(off + i, off + j)] = inv[(a, r)] * g[(i, j)];
                }
            }
        }
        Ok(out)
    }

    /// Contravariant metric `G^{r_i r_j} = α^r g_r^{ij}`.
    pub fn contravariant_metric<T: Scalar>(&self, q: &[T]) -> Result<Mat<T>, ModelError> {
        self.integral_tensor(0, q)
    }
}
