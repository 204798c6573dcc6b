//! Structured linear operators: position/momentum diagonals, products, sums,
//! spectral sign projections, residual metrics, and a dense-matrix oracle.
//!
//! Operators are immutable expression trees applied matrix-free; a
//! momentum-diagonal factor costs one transform pair, except for exact
//! translations by an integer number of sites, which are applied as circular
//! index shifts.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lattice::{inner, l2_norm, Basis, LatticeConfig, PureState, C64};

/// Diagonal magnitudes closer to zero than this abort sign projection: the
/// ≥0/<0 split would be decided by rounding, which signals an incommensurate
/// grid/parameter combination rather than a legitimate spectrum.
pub const SIGN_ZERO_GUARD: f64 = 1e-9;

/// Memory guard for [`dense_materialize`].
pub const DENSE_MAX_N: usize = 4096;

#[derive(Debug)]
enum Node {
    PosDiag(Vec<C64>),
    MomDiag {
        values: Vec<C64>,
        /// Exact circular shift by this many sites, when the diagonal is the
        /// translation phase e^{i·b·p} with b an integer multiple of dx.
        shift_sites: Option<i64>,
    },
    /// Product; the rightmost factor is applied first.
    Chain(Vec<LinOp>),
    Sum(Vec<(C64, LinOp)>),
}

/// Immutable structured linear operator on one lattice.
#[derive(Debug, Clone)]
pub struct LinOp {
    cfg: Arc<LatticeConfig>,
    node: Arc<Node>,
}

impl LinOp {
    fn from_node(cfg: Arc<LatticeConfig>, node: Node) -> Self {
        LinOp {
            cfg,
            node: Arc::new(node),
        }
    }

    pub fn lattice(&self) -> &Arc<LatticeConfig> {
        &self.cfg
    }

    pub fn identity(cfg: &Arc<LatticeConfig>) -> Self {
        Self::from_node(
            Arc::clone(cfg),
            Node::PosDiag(vec![C64::new(1.0, 0.0); cfg.n()]),
        )
    }

    pub fn zero(cfg: &Arc<LatticeConfig>) -> Self {
        Self::from_node(
            Arc::clone(cfg),
            Node::PosDiag(vec![C64::new(0.0, 0.0); cfg.n()]),
        )
    }

    /// Position-diagonal operator from explicit entries.
    pub fn pos_diag(cfg: &Arc<LatticeConfig>, values: Vec<C64>) -> Result<Self> {
        cfg.check_len(values.len())?;
        check_finite(&values)?;
        Ok(Self::from_node(Arc::clone(cfg), Node::PosDiag(values)))
    }

    /// Momentum-diagonal operator from explicit entries in `p_samples` order.
    pub fn mom_diag(cfg: &Arc<LatticeConfig>, values: Vec<C64>) -> Result<Self> {
        cfg.check_len(values.len())?;
        check_finite(&values)?;
        Ok(Self::from_node(
            Arc::clone(cfg),
            Node::MomDiag {
                values,
                shift_sites: None,
            },
        ))
    }

    /// Position-diagonal operator with entries f(q_j); f must be finite on
    /// every sample.
    pub fn diag_q(cfg: &Arc<LatticeConfig>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values: Vec<C64> = cfg.q_samples().iter().map(|&q| C64::new(f(q), 0.0)).collect();
        check_finite(&values)?;
        Ok(Self::from_node(Arc::clone(cfg), Node::PosDiag(values)))
    }

    /// Complex position diagonal, e.g. the phase e^{i a q}.
    pub fn diag_q_complex(cfg: &Arc<LatticeConfig>, f: impl Fn(f64) -> C64) -> Result<Self> {
        let values: Vec<C64> = cfg.q_samples().iter().map(|&q| f(q)).collect();
        check_finite(&values)?;
        Ok(Self::from_node(Arc::clone(cfg), Node::PosDiag(values)))
    }

    /// Momentum-diagonal operator with entries g(p_k), applied as
    /// transform → multiply → inverse transform.
    pub fn diag_p(cfg: &Arc<LatticeConfig>, g: impl Fn(f64) -> f64) -> Result<Self> {
        let values: Vec<C64> = cfg.p_samples().iter().map(|&p| C64::new(g(p), 0.0)).collect();
        check_finite(&values)?;
        Ok(Self::from_node(
            Arc::clone(cfg),
            Node::MomDiag {
                values,
                shift_sites: None,
            },
        ))
    }

    pub fn diag_p_complex(cfg: &Arc<LatticeConfig>, g: impl Fn(f64) -> C64) -> Result<Self> {
        let values: Vec<C64> = cfg.p_samples().iter().map(|&p| g(p)).collect();
        check_finite(&values)?;
        Ok(Self::from_node(
            Arc::clone(cfg),
            Node::MomDiag {
                values,
                shift_sites: None,
            },
        ))
    }

    /// e^{i a q̂} as a position diagonal.
    pub fn phase_q(cfg: &Arc<LatticeConfig>, a: f64) -> Self {
        let values: Vec<C64> = cfg
            .q_samples()
            .iter()
            .map(|&q| C64::from_polar(1.0, a * q))
            .collect();
        Self::from_node(Arc::clone(cfg), Node::PosDiag(values))
    }

    /// Translation e^{i b p̂} with b = sites·dx: (Tψ)(q_j) = ψ(q_{j+sites}),
    /// applied as an exact circular permutation.
    pub fn translation(cfg: &Arc<LatticeConfig>, sites: i64) -> Self {
        let b = sites as f64 * cfg.dx();
        let values: Vec<C64> = cfg
            .p_samples()
            .iter()
            .map(|&p| C64::from_polar(1.0, b * p))
            .collect();
        Self::from_node(
            Arc::clone(cfg),
            Node::MomDiag {
                values,
                shift_sites: Some(sites),
            },
        )
    }

    /// Translation by a length b, which must be an integer number of sites.
    pub fn translation_by(cfg: &Arc<LatticeConfig>, b: f64) -> Result<Self> {
        let sites = b / cfg.dx();
        let rounded = sites.round();
        if (sites - rounded).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "translation by {b} is not an integer number of sites (b/dx = {sites})"
            )));
        }
        Ok(Self::translation(cfg, rounded as i64))
    }

    /// Ordered product; the rightmost factor is applied first.
    pub fn product(factors: Vec<LinOp>) -> Result<Self> {
        let cfg = match factors.first() {
            Some(f) => Arc::clone(f.lattice()),
            None => {
                return Err(Error::InvalidParameter(
                    "product of zero operators".into(),
                ))
            }
        };
        for f in &factors {
            if !f.lattice().same_grid(&cfg) {
                return Err(Error::DimensionMismatch {
                    expected: cfg.n(),
                    got: f.lattice().n(),
                });
            }
        }
        Ok(Self::from_node(cfg, Node::Chain(factors)))
    }

    pub fn weighted_sum(terms: Vec<(C64, LinOp)>) -> Result<Self> {
        let cfg = match terms.first() {
            Some((_, t)) => Arc::clone(t.lattice()),
            None => return Err(Error::InvalidParameter("sum of zero operators".into())),
        };
        for (_, t) in &terms {
            if !t.lattice().same_grid(&cfg) {
                return Err(Error::DimensionMismatch {
                    expected: cfg.n(),
                    got: t.lattice().n(),
                });
            }
        }
        Ok(Self::from_node(cfg, Node::Sum(terms)))
    }

    /// k-th power; diagonal operators are raised entrywise, everything else
    /// becomes a k-fold chain. k = 0 yields the identity.
    pub fn pow(&self, k: u32) -> Self {
        if k == 0 {
            return Self::identity(&self.cfg);
        }
        if k == 1 {
            return self.clone();
        }
        match &*self.node {
            Node::PosDiag(v) => Self::from_node(
                Arc::clone(&self.cfg),
                Node::PosDiag(v.iter().map(|z| z.powu(k)).collect()),
            ),
            Node::MomDiag {
                values,
                shift_sites,
            } => Self::from_node(
                Arc::clone(&self.cfg),
                Node::MomDiag {
                    values: values.iter().map(|z| z.powu(k)).collect(),
                    // (e^{ibp})^k translates by k times as many sites
                    shift_sites: shift_sites.map(|s| s * k as i64),
                },
            ),
            _ => Self::from_node(
                Arc::clone(&self.cfg),
                Node::Chain(vec![self.clone(); k as usize]),
            ),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::from_node(Arc::clone(&self.cfg), Node::Sum(vec![(c, self.clone())]))
    }

    pub fn pos_diag_values(&self) -> Option<&[C64]> {
        match &*self.node {
            Node::PosDiag(v) => Some(v),
            _ => None,
        }
    }

    pub fn mom_diag_values(&self) -> Option<&[C64]> {
        match &*self.node {
            Node::MomDiag { values, .. } => Some(values),
            _ => None,
        }
    }

    /// Evaluate the expression tree on a position-basis amplitude vector.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        self.cfg.check_len(v.len())?;
        self.apply_unchecked(v)
    }

    fn apply_unchecked(&self, v: &[C64]) -> Result<Vec<C64>> {
        match &*self.node {
            Node::PosDiag(d) => Ok(v.iter().zip(d).map(|(x, y)| x * y).collect()),
            Node::MomDiag {
                shift_sites: Some(s),
                ..
            } => {
                let n = self.cfg.n() as i64;
                let out = (0..n)
                    .map(|j| v[((j + s).rem_euclid(n)) as usize])
                    .collect();
                Ok(out)
            }
            Node::MomDiag { values, .. } => {
                let mut mom = self.cfg.to_momentum(v)?;
                for (m, g) in mom.iter_mut().zip(values) {
                    *m *= g;
                }
                self.cfg.to_position(&mom)
            }
            Node::Chain(factors) => {
                let mut cur = v.to_vec();
                for f in factors.iter().rev() {
                    cur = f.apply_unchecked(&cur)?;
                }
                Ok(cur)
            }
            Node::Sum(terms) => {
                let mut acc = vec![C64::new(0.0, 0.0); self.cfg.n()];
                for (c, t) in terms {
                    let part = t.apply_unchecked(v)?;
                    for (a, p) in acc.iter_mut().zip(part) {
                        *a += c * p;
                    }
                }
                Ok(acc)
            }
        }
    }

    /// Apply to a [`PureState`] (position basis); the result may be
    /// unnormalized.
    pub fn apply_state(&self, s: &PureState) -> Result<Vec<C64>> {
        if s.basis() != Basis::Position {
            return Err(Error::InvalidParameter(
                "operators act on position-basis states".into(),
            ));
        }
        if !s.config().same_grid(&self.cfg) {
            return Err(Error::DimensionMismatch {
                expected: self.cfg.n(),
                got: s.config().n(),
            });
        }
        self.apply(s.amplitudes())
    }
}

fn check_finite(values: &[C64]) -> Result<()> {
    for (i, z) in values.iter().enumerate() {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "non-finite operator diagonal value at sample {i}"
            )));
        }
    }
    Ok(())
}

/// Symmetrized product A∘B = (AB + BA)/2.
pub fn sym_product(a: &LinOp, b: &LinOp) -> Result<LinOp> {
    let half = C64::new(0.5, 0.0);
    LinOp::weighted_sum(vec![
        (half, LinOp::product(vec![a.clone(), b.clone()])?),
        (half, LinOp::product(vec![b.clone(), a.clone()])?),
    ])
}

/// Commutator AB − BA as an operator.
pub fn commutator(a: &LinOp, b: &LinOp) -> Result<LinOp> {
    let one = C64::new(1.0, 0.0);
    LinOp::weighted_sum(vec![
        (one, LinOp::product(vec![a.clone(), b.clone()])?),
        (-one, LinOp::product(vec![b.clone(), a.clone()])?),
    ])
}

/// Complementary spectral indicator projections of a real position diagonal,
/// split by the ≥ 0 / < 0 convention. Entries are exactly 0 or 1.
#[derive(Debug, Clone)]
pub struct SignProjectionPair {
    e_plus: LinOp,
    e_minus: LinOp,
}

impl SignProjectionPair {
    pub fn e_plus(&self) -> &LinOp {
        &self.e_plus
    }

    pub fn e_minus(&self) -> &LinOp {
        &self.e_minus
    }

    /// E⁺ − E⁻: the ±1 sign operator, an exact involution.
    pub fn difference(&self) -> LinOp {
        let plus = self.e_plus.pos_diag_values().expect("projection is diagonal");
        let minus = self.e_minus.pos_diag_values().expect("projection is diagonal");
        let values: Vec<C64> = plus.iter().zip(minus).map(|(p, m)| p - m).collect();
        LinOp::from_node(Arc::clone(self.e_plus.lattice()), Node::PosDiag(values))
    }

    pub fn as_slice(&self) -> [LinOp; 2] {
        [self.e_plus.clone(), self.e_minus.clone()]
    }
}

/// Indicator projections of f(q̂) ≥ 0 and f(q̂) < 0 for a real
/// position-diagonal operator. Fails loudly if any diagonal value sits within
/// [`SIGN_ZERO_GUARD`] of zero.
pub fn sign_projections(op: &LinOp) -> Result<SignProjectionPair> {
    let values = op.pos_diag_values().ok_or_else(|| {
        Error::NotDiagonal("sign projections require a position-diagonal operator".into())
    })?;
    let mut plus = Vec::with_capacity(values.len());
    let mut minus = Vec::with_capacity(values.len());
    for (i, z) in values.iter().enumerate() {
        if z.im.abs() > 1e-12 {
            return Err(Error::NotDiagonal(format!(
                "sign projections require real diagonal values, found imaginary part {} at site {i}",
                z.im
            )));
        }
        if z.re.abs() < SIGN_ZERO_GUARD {
            return Err(Error::ZeroGuard {
                value: z.re,
                index: i,
                guard: SIGN_ZERO_GUARD,
            });
        }
        if z.re >= 0.0 {
            plus.push(C64::new(1.0, 0.0));
            minus.push(C64::new(0.0, 0.0));
        } else {
            plus.push(C64::new(0.0, 0.0));
            minus.push(C64::new(1.0, 0.0));
        }
    }
    let cfg = Arc::clone(op.lattice());
    Ok(SignProjectionPair {
        e_plus: LinOp::from_node(Arc::clone(&cfg), Node::PosDiag(plus)),
        e_minus: LinOp::from_node(cfg, Node::PosDiag(minus)),
    })
}

/// Max applied-norm residuals of the commutator and anticommutator of (A, B)
/// over a nonempty state list.
pub fn residual_suite(a: &LinOp, b: &LinOp, states: &[PureState]) -> Result<(f64, f64)> {
    if states.is_empty() {
        return Err(Error::InvalidParameter(
            "residual suite requires at least one state".into(),
        ));
    }
    let mut comm: f64 = 0.0;
    let mut anti: f64 = 0.0;
    for s in states {
        let bv = a.apply(b.apply_state(s)?.as_slice())?;
        let av = b.apply(a.apply_state(s)?.as_slice())?;
        let mut c2 = 0.0;
        let mut a2 = 0.0;
        for (x, y) in bv.iter().zip(&av) {
            c2 += (x - y).norm_sqr();
            a2 += (x + y).norm_sqr();
        }
        comm = comm.max(c2.sqrt());
        anti = anti.max(a2.sqrt());
    }
    Ok((comm, anti))
}

/// Max over states of ‖opψ‖.
pub fn applied_norm(op: &LinOp, states: &[PureState]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for s in states {
        worst = worst.max(l2_norm(&op.apply_state(s)?));
    }
    Ok(worst)
}

/// Max over states of ‖(A − B)ψ‖; the workhorse for operator identities.
pub fn identity_residual(lhs: &LinOp, rhs: &LinOp, states: &[PureState]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for s in states {
        let a = lhs.apply_state(s)?;
        let b = rhs.apply_state(s)?;
        let d2: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).norm_sqr()).sum();
        worst = worst.max(d2.sqrt());
    }
    Ok(worst)
}

/// Tr(ρ·op) = Σ_i w_i ⟨ψ_i| op ψ_i⟩.
pub fn expectation(rho: &crate::lattice::Ensemble, op: &LinOp) -> Result<C64> {
    if !rho.config().same_grid(op.lattice()) {
        return Err(Error::DimensionMismatch {
            expected: op.lattice().n(),
            got: rho.config().n(),
        });
    }
    let mut acc = C64::new(0.0, 0.0);
    for (w, s) in rho.members() {
        let opv = op.apply_state(s)?;
        acc += C64::new(*w, 0.0) * inner(s.amplitudes(), &opv);
    }
    Ok(acc)
}

/// Column-major dense matrix, the oracle for structured computations.
#[derive(Debug, Clone)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<C64>,
}

impl DenseMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[col * self.n + row]
    }

    pub fn mat_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.n);
        let mut out = vec![C64::new(0.0, 0.0); self.n];
        for (col, &x) in v.iter().enumerate() {
            let column = &self.data[col * self.n..(col + 1) * self.n];
            for (o, m) in out.iter_mut().zip(column) {
                *o += m * x;
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry of |M − M†|.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }
}

/// Materialize the operator column by column (column j = op·e_j).
/// Guarded at N ≤ [`DENSE_MAX_N`].
pub fn dense_materialize(op: &LinOp) -> Result<DenseMatrix> {
    let n = op.lattice().n();
    if n > DENSE_MAX_N {
        return Err(Error::InvalidParameter(format!(
            "dense materialization guard: N = {n} exceeds {DENSE_MAX_N}"
        )));
    }
    let mut data = vec![C64::new(0.0, 0.0); n * n];
    let mut basis = vec![C64::new(0.0, 0.0); n];
    for j in 0..n {
        basis[j] = C64::new(1.0, 0.0);
        let col = op.apply(&basis)?;
        data[j * n..(j + 1) * n].copy_from_slice(&col);
        basis[j] = C64::new(0.0, 0.0);
    }
    Ok(DenseMatrix { n, data })
}
